//! Second-order forward-mode jets: a value together with its exact gradient
//! and Hessian with respect to the ambient coordinates.
//!
//! Metric coefficients are assembled from jets so that first and second
//! coordinate derivatives are exact to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_DIM: usize = 8;
const PACKED: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

#[derive(Clone, Copy, Debug)]
pub struct Jet {
    n: usize,
    pub v: f64,
    d: [f64; MAX_DIM],
    h: [f64; PACKED],
}

impl Jet {
    pub fn constant(n: usize, v: f64) -> Self {
        Jet { n, v, d: [0.0; MAX_DIM], h: [0.0; PACKED] }
    }

    /// The coordinate function `x_k` evaluated at `value`.
    pub fn variable(n: usize, k: usize, value: f64) -> Self {
        let mut j = Jet::constant(n, value);
        j.d[k] = 1.0;
        j
    }

    pub fn coordinates(x: &[f64]) -> Vec<Jet> {
        let n = x.len();
        (0..n).map(|k| Jet::variable(n, k, x[k])).collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grad(&self, k: usize) -> f64 {
        self.d[k]
    }

    pub fn hess(&self, k: usize, l: usize) -> f64 {
        self.h[packed(k, l)]
    }

    /// Applies a scalar function given its value and first two derivatives.
    #[inline]
    pub fn chain(&self, f: f64, f1: f64, f2: f64) -> Jet {
        let n = self.n;
        let mut out = Jet::constant(n, f);
        for k in 0..n {
            out.d[k] = f1 * self.d[k];
        }
        for b in 0..n {
            for a in 0..=b {
                let p = packed(a, b);
                out.h[p] = f1 * self.h[p] + f2 * self.d[a] * self.d[b];
            }
        }
        out
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powf(&self, p: f64) -> Jet {
        let v = self.v;
        let f = v.powf(p);
        self.chain(f, p * f / v, p * (p - 1.0) * f / (v * v))
    }

    pub fn powi(&self, p: i32) -> Jet {
        let v = self.v;
        let f = v.powi(p);
        let f1 = if p == 0 { 0.0 } else { p as f64 * v.powi(p - 1) };
        let f2 = if p == 0 || p == 1 { 0.0 } else { (p * (p - 1)) as f64 * v.powi(p - 2) };
        self.chain(f, f1, f2)
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn recip(&self) -> Jet {
        let v = self.v;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = *self;
        out.v *= s;
        for k in 0..self.n {
            out.d[k] *= s;
        }
        for p in 0..PACKED {
            out.h[p] *= s;
        }
        out
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = *self;
        out.v += c;
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for k in 0..self.n {
            out.d[k] += o.d[k];
        }
        for p in 0..PACKED {
            out.h[p] += o.h[p];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let n = self.n;
        let mut out = Jet::constant(n, self.v * o.v);
        for k in 0..n {
            out.d[k] = self.d[k] * o.v + self.v * o.d[k];
        }
        for b in 0..n {
            for a in 0..=b {
                let p = packed(a, b);
                out.h[p] = self.h[p] * o.v
                    + self.v * o.h[p]
                    + self.d[a] * o.d[b]
                    + self.d[b] * o.d[a];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        self.add_const(c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity in between.
pub fn smooth_step(t: &Jet) -> Jet {
    let n = t.dim();
    if t.v <= 0.0 {
        return Jet::constant(n, 0.0);
    }
    if t.v >= 1.0 {
        return Jet::constant(n, 1.0);
    }
    let a = t.recip().scale(-1.0).exp();
    let one_minus = t.scale(-1.0).add_const(1.0);
    let b = one_minus.recip().scale(-1.0).exp();
    a / (a + b)
}
