//! Spectral grids on the unit sphere `S^{n-1}`.
//!
//! Functions are band-limited expansions in an `L^2`-orthonormal basis:
//! real spherical harmonics of degree `<= L` on `S^2` (full mode), or zonal
//! Gegenbauer polynomials in `cos(theta)` on `S^{n-1}` (axisymmetric mode,
//! symmetric about the `x_n` axis). Derivatives of basis functions are exact
//! (computed with jets through the recurrences), so the surface operators
//! built from them are spectrally accurate.
//!
//! Parameters: full mode uses `(theta, phi)`; axisymmetric mode uses
//! `(theta, psi_1, .., psi_{n-2})` with `omega = (sin(theta) v(psi), cos(theta))`
//! and `v(psi) = (1, psi) / sqrt(1 + |psi|^2)`. Grid nodes sit at `psi = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::jet::{Jet, MAX_DIM};
use crate::numerics::quadrature::{gamma_half, gauss_legendre, polar_rule, unit_sphere_area};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Colatitude x longitude grid on `S^2` (n = 3).
    Full,
    /// Colatitude-only grid on `S^{n-1}` for functions of `theta`.
    Axisymmetric,
}

/// Nodes, weights and basis tables of a spectral sphere grid.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub n: usize,
    pub mode: GridMode,
    pub lmax: usize,
    /// Chart parameters of the nodes.
    pub params: Vec<Vec<f64>>,
    /// Quadrature weights for the round measure; they sum to `omega_{n-1}`.
    pub weights: Vec<f64>,
    /// Degree of each basis function.
    pub degrees: Vec<usize>,
    /// Azimuthal order of each basis function (0 in axisymmetric mode).
    pub orders: Vec<i64>,
    /// Basis derivative channels: `[channel][node * dim + k]`.
    channels: Vec<Vec<f64>>,
    /// Parameter directions carried by the channels (2 full, 1 axisymmetric).
    basis_dim: usize,
    pub resolution: (usize, usize),
}

fn jet_sin_cos(t: &Jet) -> (Jet, Jet) {
    let (s, c) = t.v.sin_cos();
    (t.chain(s, c, -s), t.chain(c, -s, -c))
}

/// Unit-sphere embedding `omega(params)` as jets in the parameters.
pub fn chart(n: usize, mode: GridMode, params: &[f64]) -> Vec<Jet> {
    let d = n - 1;
    let p = Jet::coordinates(params);
    let (st, ct) = jet_sin_cos(&p[0]);
    match mode {
        GridMode::Full => {
            let (sp, cp) = jet_sin_cos(&p[1]);
            vec![st * cp, st * sp, ct]
        }
        GridMode::Axisymmetric => {
            let mut q = Jet::constant(d, 1.0);
            for v in &p[1..] {
                q = q + *v * *v;
            }
            let inv = q.sqrt().recip();
            let mut out = Vec::with_capacity(n);
            out.push(st * inv);
            for v in &p[1..] {
                out.push(st * *v * inv);
            }
            out.push(ct);
            out
        }
    }
}

fn legendre_norm_diag(m: usize) -> f64 {
    let mut v = (0.5f64).sqrt();
    for k in 1..=m {
        v *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
    }
    v
}

/// Real orthonormal spherical harmonics on `S^2`, ordered by `l` then
/// `m = -l..=l`, as jets in `(theta, phi)`.
fn harmonics(lmax: usize, params: &[f64]) -> Vec<Jet> {
    let p = Jet::coordinates(params);
    let (s, x) = jet_sin_cos(&p[0]);
    let d = 2;
    // plm[m][l - m]
    let mut plm: Vec<Vec<Jet>> = Vec::with_capacity(lmax + 1);
    let mut smm = Jet::constant(d, 1.0);
    for m in 0..=lmax {
        if m > 0 {
            smm = smm * s;
        }
        let mut col = Vec::with_capacity(lmax + 1 - m);
        col.push(smm.scale(legendre_norm_diag(m)));
        if m < lmax {
            col.push((x * col[0]).scale(((2 * m + 3) as f64).sqrt()));
        }
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let v = (x * col[l - m - 1] - col[l - m - 2].scale(b)).scale(a);
            col.push(v);
        }
        plm.push(col);
    }
    let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let inv_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut out = Vec::with_capacity((lmax + 1) * (lmax + 1));
    for l in 0..=lmax {
        for mi in -(l as i64)..=(l as i64) {
            let m = mi.unsigned_abs() as usize;
            let leg = plm[m][l - m];
            if mi == 0 {
                out.push(leg.scale(inv_2pi));
            } else {
                let ang = p[1].scale(m as f64);
                let (sm, cm) = jet_sin_cos(&ang);
                let trig = if mi > 0 { cm } else { sm };
                out.push((leg * trig).scale(inv_pi));
            }
        }
    }
    out
}

/// Zonal orthonormal basis on `S^{n-1}`: orthonormal polynomials in
/// `cos(theta)` for the weight `(1 - t^2)^{(n-3)/2}`, as jets in `n - 1`
/// parameters.
fn zonal(n: usize, lmax: usize, params: &[f64]) -> Vec<Jet> {
    let d = n - 1;
    let th = Jet::variable(d, 0, params[0]);
    let (_, x) = jet_sin_cos(&th);
    let a = (n as f64 - 3.0) / 2.0;
    let lam = a + 0.5;
    let mu0 = std::f64::consts::PI.sqrt() * gamma_half(n - 1) / gamma_half(n);
    let beta = |j: usize| -> f64 {
        let j = j as f64;
        j * (j + 2.0 * lam - 1.0) / (4.0 * (j + lam) * (j + lam - 1.0))
    };
    let scale = 1.0 / (mu0 * unit_sphere_area(n - 2)).sqrt();
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(Jet::constant(d, scale));
    if lmax >= 1 {
        out.push((x * out[0]).scale(1.0 / beta(1).sqrt()));
    }
    for j in 2..=lmax {
        let v = (x * out[j - 1] - out[j - 2].scale(beta(j - 1).sqrt())).scale(1.0 / beta(j).sqrt());
        out.push(v);
    }
    out
}

impl SphereGrid {
    /// Gauss-Legendre colatitudes times uniform longitudes on `S^2`.
    pub fn full(n_theta: usize, n_phi: usize, lmax: usize) -> Result<Self> {
        if lmax + 1 > n_theta || 2 * lmax + 1 > n_phi {
            return Err(Error::InvalidParameter(format!("grid {n_theta}x{n_phi} cannot resolve degree {lmax}")));
        }
        let (t, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut params = Vec::new();
        let mut weights = Vec::new();
        // ascending theta
        for (ti, wi) in t.iter().rev().zip(w.iter().rev()) {
            for j in 0..n_phi {
                params.push(vec![ti.acos(), dphi * j as f64]);
                weights.push(wi * dphi);
            }
        }
        let mut degrees = Vec::new();
        let mut orders = Vec::new();
        for l in 0..=lmax {
            for m in -(l as i64)..=(l as i64) {
                degrees.push(l);
                orders.push(m);
            }
        }
        let mut g = SphereGrid {
            n: 3,
            mode: GridMode::Full,
            lmax,
            params,
            weights,
            degrees,
            orders,
            channels: Vec::new(),
            basis_dim: 2,
            resolution: (n_theta, n_phi),
        };
        g.tabulate();
        Ok(g)
    }

    /// Gauss-Gegenbauer colatitudes on `S^{n-1}`, zonal basis of degree `<= lmax`.
    pub fn axisymmetric(n: usize, nodes: usize, lmax: usize) -> Result<Self> {
        if !(3..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidParameter(format!("dimension {n} outside 3..={MAX_DIM}")));
        }
        if lmax + 1 > nodes {
            return Err(Error::InvalidParameter(format!("{nodes} nodes cannot resolve degree {lmax}")));
        }
        let (t, w) = polar_rule(nodes, n - 2);
        let scale = unit_sphere_area(n - 2);
        let params = t.iter().map(|t| {
            let mut p = vec![0.0; n - 1];
            p[0] = *t;
            p
        });
        let mut g = SphereGrid {
            n,
            mode: GridMode::Axisymmetric,
            lmax,
            params: params.collect(),
            weights: w.iter().map(|w| w * scale).collect(),
            degrees: (0..=lmax).collect(),
            orders: vec![0; lmax + 1],
            channels: Vec::new(),
            basis_dim: 1,
            resolution: (nodes, 1),
        };
        g.tabulate();
        Ok(g)
    }

    /// Default resolution: 48x96 with `L = 16` for `n = 3` full mode, 256
    /// nodes with `L = 32` in axisymmetric mode.
    pub fn standard(n: usize, mode: GridMode) -> Result<Self> {
        match mode {
            GridMode::Full if n == 3 => Self::full(48, 96, 16),
            GridMode::Full => Err(Error::Unsupported(format!("full sphere grids require n = 3, got {n}"))),
            GridMode::Axisymmetric => Self::axisymmetric(n, 256, 32),
        }
    }

    /// The same kind of grid with every resolution parameter scaled by `f`.
    pub fn refined(&self, f: f64) -> Result<Self> {
        let sc = |v: usize| ((v as f64) * f).round() as usize;
        match self.mode {
            GridMode::Full => Self::full(sc(self.resolution.0), sc(self.resolution.1), sc(self.lmax)),
            GridMode::Axisymmetric => Self::axisymmetric(self.n, sc(self.resolution.0), sc(self.lmax)),
        }
    }

    fn tabulate(&mut self) {
        let k = self.dim();
        let nch = self.channel_count();
        let mut ch = vec![vec![0.0; self.len() * k]; nch];
        for (i, p) in self.params.iter().enumerate() {
            let b = self.basis_at(p);
            for (j, y) in b.iter().enumerate() {
                let row = i * k + j;
                for (c, v) in self.jet_channels(y).into_iter().enumerate() {
                    ch[c][row] = v;
                }
            }
        }
        self.channels = ch;
    }

    fn channel_count(&self) -> usize {
        let d = self.basis_dim;
        1 + d + d * (d + 1) / 2
    }

    fn jet_channels(&self, y: &Jet) -> Vec<f64> {
        let d = self.basis_dim;
        let mut out = vec![y.v];
        for a in 0..d {
            out.push(y.grad(a));
        }
        for a in 0..d {
            for b in a..d {
                out.push(y.hess(a, b));
            }
        }
        out
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    /// Number of chart parameters (`n - 1`).
    pub fn param_dim(&self) -> usize {
        self.n - 1
    }

    /// Unit-sphere point and its parameter jets at `params`.
    pub fn chart(&self, params: &[f64]) -> Vec<Jet> {
        chart(self.n, self.mode, params)
    }

    /// Basis functions as jets in all `n - 1` parameters.
    pub fn basis_at(&self, params: &[f64]) -> Vec<Jet> {
        match self.mode {
            GridMode::Full => harmonics(self.lmax, params),
            GridMode::Axisymmetric => zonal(self.n, self.lmax, params),
        }
    }

    /// Jet of the expansion `sum c_k Y_k` at an arbitrary parameter point.
    pub fn eval_at(&self, coeffs: &[f64], params: &[f64]) -> Jet {
        let b = self.basis_at(params);
        let mut out = Jet::constant(self.param_dim(), 0.0);
        for (c, y) in coeffs.iter().zip(&b) {
            if *c != 0.0 {
                out = out + y.scale(*c);
            }
        }
        out
    }

    /// Channel layout at a node: value, first derivatives, then
    /// `(a, b)` with `a <= b` second derivatives, in the basis directions.
    pub fn node_channels(&self, coeffs: &[f64], node: usize) -> Vec<f64> {
        let k = self.dim();
        self.channels
            .iter()
            .map(|ch| ch[node * k..(node + 1) * k].iter().zip(coeffs).map(|(b, c)| b * c).sum())
            .collect()
    }

    /// Basis channel values for one node and one basis function.
    pub fn basis_channels(&self, node: usize, k: usize) -> Vec<f64> {
        let dim = self.dim();
        self.channels.iter().map(|ch| ch[node * dim + k]).collect()
    }

    /// Expansion jet at a node, built from the tabulated channels.
    pub fn eval_node(&self, coeffs: &[f64], node: usize) -> Jet {
        channels_to_jet(self.param_dim(), self.basis_dim, &self.node_channels(coeffs, node))
    }

    pub fn basis_dim(&self) -> usize {
        self.basis_dim
    }

    /// Nodal values of an expansion.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let k = self.dim();
        (0..self.len()).map(|i| self.channels[0][i * k..(i + 1) * k].iter().zip(coeffs).map(|(b, c)| b * c).sum()).collect()
    }

    /// Quadrature projection of nodal values onto the basis.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let mut c = vec![0.0; k];
        for (i, (v, w)) in values.iter().zip(&self.weights).enumerate() {
            let f = v * w;
            for (j, cj) in c.iter_mut().enumerate() {
                *cj += f * self.channels[0][i * k + j];
            }
        }
        c
    }

    /// `sum w f` over the nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Laplace-Beltrami eigenvalue `-l(l + n - 2)` of each basis function.
    pub fn laplacian_eigenvalues(&self) -> Vec<f64> {
        self.degrees.iter().map(|l| -((l * (l + self.n - 2)) as f64)).collect()
    }

    /// Expansion of a function given pointwise on the unit sphere.
    pub fn project(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let vals: Vec<f64> = self
            .params
            .iter()
            .map(|p| {
                let w: Vec<f64> = self.chart(p).iter().map(|j| j.v).collect();
                f(&w)
            })
            .collect();
        self.analyze(&vals)
    }

    /// Coefficient vector of the constant function 1.
    pub fn constant_coeffs(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[0] = unit_sphere_area(self.n - 1).sqrt();
        c
    }
}

/// Rebuilds a jet in `d` parameters from channels carrying `basis_dim`
/// directions; the remaining directions have zero derivatives.
pub fn channels_to_jet(d: usize, basis_dim: usize, ch: &[f64]) -> Jet {
    // value + linear terms + quadratic terms reconstruct the jet exactly
    let mut out = Jet::constant(d, ch[0]);
    let z = vec![0.0; d];
    let x = Jet::coordinates(&z);
    for a in 0..basis_dim {
        out = out + x[a].scale(ch[1 + a]);
    }
    let mut idx = 1 + basis_dim;
    for a in 0..basis_dim {
        for b in a..basis_dim {
            let f = if a == b { 0.5 } else { 1.0 };
            out = out + (x[a] * x[b]).scale(f * ch[idx]);
            idx += 1;
        }
    }
    out
}

/// Metric, inverse metric and Christoffel symbols of the round sphere in the
/// chart at a point, from the embedding jets.
#[derive(Clone, Debug)]
pub struct RoundFrame {
    pub d: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    /// `gamma[(c*d + a)*d + b]`.
    pub gamma: Vec<f64>,
    pub sqrt_det: f64,
}

impl RoundFrame {
    pub fn new(omega: &[Jet]) -> Result<Self> {
        let d = omega[0].dim();
        let mut g = vec![0.0; d * d];
        let mut low = vec![0.0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                g[a * d + b] = omega.iter().map(|w| w.grad(a) * w.grad(b)).sum();
                for c in 0..d {
                    low[(c * d + a) * d + b] = omega.iter().map(|w| w.grad(c) * w.hess(a, b)).sum();
                }
            }
        }
        let ginv = crate::numerics::dual::invert(&g, d).ok_or_else(|| Error::Degenerate("round chart is singular".into()))?;
        let mut gamma = vec![0.0; d * d * d];
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    gamma[(c * d + a) * d + b] = (0..d).map(|e| ginv[c * d + e] * low[(e * d + a) * d + b]).sum();
                }
            }
        }
        let det = crate::numerics::dual::determinant(&g, d);
        Ok(RoundFrame { d, g, ginv, gamma, sqrt_det: det.sqrt() })
    }

    /// Covariant Hessian of `f` on the round sphere.
    pub fn hessian(&self, f: &Jet) -> Vec<f64> {
        let d = self.d;
        let mut h = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                h[a * d + b] = f.hess(a, b) - (0..d).map(|c| self.gamma[(c * d + a) * d + b] * f.grad(c)).sum::<f64>();
            }
        }
        h
    }

    pub fn gradient_norm(&self, f: &Jet) -> f64 {
        let d = self.d;
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += self.ginv[a * d + b] * f.grad(a) * f.grad(b);
            }
        }
        s.max(0.0).sqrt()
    }

    /// `|T|` for a covariant 2-tensor.
    pub fn norm2(&self, t: &[f64]) -> f64 {
        let d = self.d;
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        s += self.ginv[a * d + c] * self.ginv[b * d + e] * t[a * d + b] * t[c * d + e];
                    }
                }
            }
        }
        s.max(0.0).sqrt()
    }

    pub fn laplacian(&self, f: &Jet) -> f64 {
        let h = self.hessian(f);
        (0..self.d * self.d).map(|i| self.ginv[i] * h[i]).sum()
    }
}
