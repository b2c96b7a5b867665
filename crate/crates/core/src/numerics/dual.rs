//! First-order multi-directional dual numbers and the small scalar trait the
//! pointwise hypersurface geometry is written against.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Number of independent directions carried by [`Dual`].
pub const DIRS: usize = 6;

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; DIRS],
}

impl Dual {
    pub fn new(v: f64, d: [f64; DIRS]) -> Self {
        Dual { v, d }
    }

    pub fn seed(v: f64, dir: usize) -> Self {
        let mut d = [0.0; DIRS];
        d[dir] = 1.0;
        Dual { v, d }
    }
}

impl Real for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual { v, d: [0.0; DIRS] }
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let f = 0.5 / s;
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= f;
        }
        Dual { v: s, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, o: Dual) -> Dual {
        self.v += o.v;
        for k in 0..DIRS {
            self.d[k] += o.d[k];
        }
        self
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        *self = *self + o;
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, o: Dual) -> Dual {
        self.v -= o.v;
        for k in 0..DIRS {
            self.d[k] -= o.d[k];
        }
        self
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(mut self) -> Dual {
        self.v = -self.v;
        for x in self.d.iter_mut() {
            *x = -*x;
        }
        self
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        let mut d = [0.0; DIRS];
        for k in 0..DIRS {
            d[k] = self.d[k] * o.v + self.v * o.d[k];
        }
        Dual { v: self.v * o.v, d }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        let mut d = [0.0; DIRS];
        for k in 0..DIRS {
            d[k] = (self.d[k] - q * o.d[k]) * inv;
        }
        Dual { v: q, d }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, c: f64) -> Dual {
        self.v += c;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(mut self, s: f64) -> Dual {
        self.v *= s;
        for x in self.d.iter_mut() {
            *x *= s;
        }
        self
    }
}

/// Inverts a small dense matrix (row-major, `k x k`) by Gauss-Jordan
/// elimination with partial pivoting on the values. Returns `None` when a
/// pivot vanishes.
pub fn invert<T: Real>(a: &[T], k: usize) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut inv: Vec<T> = (0..k * k).map(|i| T::cst(if i / k == i % k { 1.0 } else { 0.0 })).collect();
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r * k + col].value().abs() > m[piv * k + col].value().abs() {
                piv = r;
            }
        }
        if m[piv * k + col].value() == 0.0 || !m[piv * k + col].value().is_finite() {
            return None;
        }
        if piv != col {
            for c in 0..k {
                m.swap(piv * k + c, col * k + c);
                inv.swap(piv * k + c, col * k + c);
            }
        }
        let p = m[col * k + col];
        for c in 0..k {
            m[col * k + c] = m[col * k + c] / p;
            inv[col * k + c] = inv[col * k + c] / p;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = m[r * k + col];
            for c in 0..k {
                m[r * k + c] = m[r * k + c] - f * m[col * k + c];
                inv[r * k + c] = inv[r * k + c] - f * inv[col * k + c];
            }
        }
    }
    Some(inv)
}

/// Determinant via LU without pivot reuse; adequate for the small SPD
/// matrices used here.
pub fn determinant<T: Real>(a: &[T], k: usize) -> T {
    let mut m = a.to_vec();
    let mut det = T::cst(1.0);
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r * k + col].value().abs() > m[piv * k + col].value().abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..k {
                m.swap(piv * k + c, col * k + c);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det = det * p;
        if p.value() == 0.0 {
            return det;
        }
        for r in col + 1..k {
            let f = m[r * k + col] / p;
            for c in col..k {
                m[r * k + c] = m[r * k + c] - f * m[col * k + c];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_quotient_rule() {
        let x = Dual::seed(2.0, 0);
        let y = Dual::seed(3.0, 1);
        let q = (x * y + 1.0) / (x - y * 0.5).sqrt();
        // f = (xy+1)/sqrt(x - y/2) at (2,3): sqrt(0.5)
        let s = 0.5f64.sqrt();
        assert!((q.v - 7.0 / s).abs() < 1e-12);
        let dfdx = 3.0 / s - 7.0 * 0.5 / (0.5 * s);
        assert!((q.d[0] - dfdx).abs() < 1e-10);
    }

    #[test]
    fn invert_and_determinant() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = invert(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let d = determinant(&a, 3);
        let expected = 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((d - expected).abs() < 1e-12);
    }
}
