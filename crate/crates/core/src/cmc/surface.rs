//! Pointwise geometry of `graph(u) = {(R + u(omega)) omega}` in an ambient
//! metric, and the nodal fields of a graph surface.
//!
//! With `X(p) = (R + u) omega(p)` in chart parameters `p`, the tangent
//! vectors are `X_a`, the induced metric is `g(X_a, X_b)`, the normal is
//! the `g`-unit vector dual to the Euclidean conormal `N` (the generalized
//! cross product of the `X_a`, oriented outward), and
//! `h_ab = -g(D_a X_b, nu)` so that round spheres have positive mean
//! curvature. The computation is generic over [`Real`] so that the same code
//! yields exact derivatives of `H` with respect to the jet of `u`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{RoundFrame, SphereGrid};
use crate::error::{Error, Result};
use crate::geometry::curvature::riemann_exact;
use crate::geometry::metric::{MetricField, MetricSample};
use crate::geometry::tensor::Tensor4;
use crate::numerics::dual::{determinant, invert, Real};
use crate::numerics::jet::Jet;

/// Geometry at one point, generic over the scalar type.
#[derive(Clone, Debug)]
pub struct PointGeometry<T> {
    pub n: usize,
    pub d: usize,
    pub x: Vec<T>,
    /// `xa[a*n + i]`.
    pub xa: Vec<T>,
    /// `xab[(a*d + b)*n + i]`.
    pub xab: Vec<T>,
    pub g: Vec<T>,
    pub ginv: Vec<T>,
    /// `gamma[(m*n + i)*n + j] = G^m_ij`.
    pub gamma: Vec<T>,
    pub gbar: Vec<T>,
    pub gbar_inv: Vec<T>,
    /// Unit normal, contravariant.
    pub nu: Vec<T>,
    /// Unit normal, covariant.
    pub nu_low: Vec<T>,
    pub h: Vec<T>,
    pub mean_curvature: T,
    pub sqrt_det_gbar: T,
}

/// Inputs for [`point_geometry`]: the round embedding jets and the jet of
/// `u` at the point, with `du[a]`, `ddu[a*d + b]`.
pub struct GraphJet<'a, T> {
    pub omega: &'a [Jet],
    pub u: T,
    pub du: &'a [T],
    pub ddu: &'a [T],
}

/// Evaluates the graph geometry using a metric sample taken at the value
/// point of `X`; for dual scalars the metric is linearized about it.
pub fn point_geometry<T: Real>(radius: f64, jet: &GraphJet<'_, T>, sample: &MetricSample) -> Result<PointGeometry<T>> {
    let n = sample.n;
    let d = n - 1;
    let om = jet.omega;
    let ru = jet.u + radius;
    let mut x = Vec::with_capacity(n);
    let mut xa = vec![T::cst(0.0); d * n];
    let mut xab = vec![T::cst(0.0); d * d * n];
    for i in 0..n {
        x.push(ru * om[i].v);
        for a in 0..d {
            xa[a * n + i] = jet.du[a] * om[i].v + ru * om[i].grad(a);
            for b in 0..d {
                xab[(a * d + b) * n + i] = jet.ddu[a * d + b] * om[i].v
                    + jet.du[a] * om[i].grad(b)
                    + jet.du[b] * om[i].grad(a)
                    + ru * om[i].hess(a, b);
            }
        }
    }
    let dx: Vec<T> = x.iter().map(|v| *v + (-v.value())).collect();
    let mut g = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut v = T::cst(sample.g(i, j));
            for k in 0..n {
                v += dx[k] * sample.dg(k, i, j);
            }
            g.push(v);
        }
    }
    let mut dg = vec![T::cst(0.0); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = T::cst(sample.dg(k, i, j));
                for l in 0..n {
                    v += dx[l] * sample.ddg(k, l, i, j);
                }
                dg[(k * n + i) * n + j] = v;
            }
        }
    }
    let r = x.iter().map(|v| v.value() * v.value()).sum::<f64>().sqrt();
    let ginv = invert(&g, n).ok_or(Error::SingularMetric(r))?;
    let mut gamma = vec![T::cst(0.0); n * n * n];
    for m in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut v = T::cst(0.0);
                for k in 0..n {
                    let low = (dg[(i * n + j) * n + k] + dg[(j * n + i) * n + k] - dg[(k * n + i) * n + j]) * 0.5;
                    v += ginv[m * n + k] * low;
                }
                gamma[(m * n + i) * n + j] = v;
                gamma[(m * n + j) * n + i] = v;
            }
        }
    }
    let mut gbar = vec![T::cst(0.0); d * d];
    for a in 0..d {
        for b in a..d {
            let mut v = T::cst(0.0);
            for i in 0..n {
                for j in 0..n {
                    v += g[i * n + j] * xa[a * n + i] * xa[b * n + j];
                }
            }
            gbar[a * d + b] = v;
            gbar[b * d + a] = v;
        }
    }
    let gbar_inv = invert(&gbar, d).ok_or_else(|| Error::Degenerate(format!("induced metric singular at |x| = {r}")))?;
    let det = determinant(&gbar, d);
    if !(det.value() > 0.0) {
        return Err(Error::Degenerate(format!("induced metric not positive at |x| = {r}")));
    }
    // conormal: N_j = (-1)^j det(X_a^i, i != j)
    let mut ncov = Vec::with_capacity(n);
    let mut minor = vec![T::cst(0.0); d * d];
    for j in 0..n {
        for a in 0..d {
            let mut c = 0;
            for i in 0..n {
                if i != j {
                    minor[a * d + c] = xa[a * n + i];
                    c += 1;
                }
            }
        }
        let m = determinant(&minor, d);
        ncov.push(if j % 2 == 0 { m } else { -m });
    }
    let outward: f64 = ncov.iter().zip(&x).map(|(a, b)| a.value() * b.value()).sum();
    if outward < 0.0 {
        ncov.iter_mut().for_each(|v| *v = -*v);
    }
    let mut nn = T::cst(0.0);
    let mut nu = vec![T::cst(0.0); n];
    for i in 0..n {
        for j in 0..n {
            nu[i] += ginv[i * n + j] * ncov[j];
        }
        nn += nu[i] * ncov[i];
    }
    if !(nn.value() > 0.0) {
        return Err(Error::Degenerate("normal has zero length".into()));
    }
    let nlen = nn.sqrt();
    let inv_len = T::cst(1.0) / nlen;
    let nu: Vec<T> = nu.iter().map(|v| *v * inv_len).collect();
    let nu_low: Vec<T> = ncov.iter().map(|v| *v * inv_len).collect();
    let mut h = vec![T::cst(0.0); d * d];
    let mut hm = T::cst(0.0);
    for a in 0..d {
        for b in a..d {
            let mut v = T::cst(0.0);
            for m in 0..n {
                let mut acc = xab[(a * d + b) * n + m];
                for i in 0..n {
                    for j in 0..n {
                        acc += gamma[(m * n + i) * n + j] * xa[a * n + i] * xa[b * n + j];
                    }
                }
                v += acc * nu_low[m];
            }
            h[a * d + b] = -v;
            h[b * d + a] = -v;
        }
    }
    for a in 0..d {
        for b in 0..d {
            hm += gbar_inv[a * d + b] * h[a * d + b];
        }
    }
    Ok(PointGeometry {
        n,
        d,
        x,
        xa,
        xab,
        g,
        ginv,
        gamma,
        gbar,
        gbar_inv,
        nu,
        nu_low,
        h,
        mean_curvature: hm,
        sqrt_det_gbar: det.sqrt(),
    })
}

/// Point of `X = (R + u) omega` at the value of the jet.
pub fn graph_point(radius: f64, omega: &[Jet], u: f64) -> Vec<f64> {
    omega.iter().map(|w| (radius + u) * w.v).collect()
}

/// Splits a scalar jet into `(u, du, ddu)` arrays in `d` parameters.
pub fn jet_parts(u: &Jet) -> (f64, Vec<f64>, Vec<f64>) {
    let d = u.dim();
    let du = (0..d).map(|a| u.grad(a)).collect();
    let mut ddu = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            ddu[a * d + b] = u.hess(a, b);
        }
    }
    (u.v, du, ddu)
}

/// Full `f64` geometry at a chart point, including ambient curvature.
#[derive(Clone, Debug)]
pub struct SurfacePoint {
    pub params: Vec<f64>,
    pub geom: PointGeometry<f64>,
    pub riemann: Tensor4,
    /// Ratio of the induced area element to the round one.
    pub area_ratio: f64,
    /// `u` and its round-sphere derivative norms `|grad u|`, `|Hess u|`.
    pub u: f64,
    pub du_norm: f64,
    pub ddu_norm: f64,
}

impl SurfacePoint {
    pub fn evaluate(radius: f64, omega: &[Jet], u: &Jet, metric: &MetricField, params: &[f64]) -> Result<Self> {
        let (u0, du, ddu) = jet_parts(u);
        if !(radius + u0 > 0.0) {
            return Err(Error::Degenerate(format!("graph leaves the chart: 1 + u/R = {}", 1.0 + u0 / radius)));
        }
        let x = graph_point(radius, omega, u0);
        let sample = metric.sample(&x)?;
        let geom = point_geometry(radius, &GraphJet { omega, u: u0, du: &du, ddu: &ddu }, &sample)?;
        let riemann = riemann_exact(&sample)?;
        let frame = RoundFrame::new(omega)?;
        Ok(SurfacePoint {
            params: params.to_vec(),
            area_ratio: geom.sqrt_det_gbar / frame.sqrt_det,
            u: u0,
            du_norm: frame.gradient_norm(u),
            ddu_norm: frame.norm2(&frame.hessian(u)),
            geom,
            riemann,
        })
    }

    pub fn mean_curvature(&self) -> f64 {
        self.geom.mean_curvature
    }

    /// Trace-free second fundamental form `h - H gbar / (n-1)`.
    pub fn h_ring(&self) -> Vec<f64> {
        let d = self.geom.d;
        let f = self.geom.mean_curvature / d as f64;
        self.geom.h.iter().zip(&self.geom.gbar).map(|(h, g)| h - f * g).collect()
    }

    /// `<A, B>` for covariant 2-tensors on the surface.
    pub fn inner2(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = self.geom.d;
        let gi = &self.geom.gbar_inv;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        s += gi[i * d + k] * gi[j * d + l] * a[i * d + j] * b[k * d + l];
                    }
                }
            }
        }
        s
    }

    pub fn h_norm2(&self) -> f64 {
        self.inner2(&self.geom.h, &self.geom.h)
    }

    pub fn h_ring_norm(&self) -> f64 {
        let r = self.h_ring();
        self.inner2(&r, &r).max(0.0).sqrt()
    }

    /// `Rm(A, B, C, D)` of ambient vectors.
    pub fn rm4(&self, a: &[f64], b: &[f64], c: &[f64], e: &[f64]) -> f64 {
        let n = self.geom.n;
        let mut s = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        s += self.riemann.get(i, j, k, l) * a[i] * b[j] * c[k] * e[l];
                    }
                }
            }
        }
        s
    }

    /// Ambient Ricci tensor.
    pub fn ricci(&self) -> Vec<f64> {
        self.riemann.ricci_contraction(&self.geom.ginv)
    }

    /// `Rc(nu, nu)`.
    pub fn ricci_normal(&self) -> f64 {
        let n = self.geom.n;
        let rc = self.ricci();
        let nu = &self.geom.nu;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += rc[i * n + j] * nu[i] * nu[j];
            }
        }
        s
    }

    /// Tangent vector `X_a`.
    pub fn tangent(&self, a: usize) -> &[f64] {
        let n = self.geom.n;
        &self.geom.xa[a * n..(a + 1) * n]
    }

    /// Sup over orthonormal tangent frames of `|Rm(nu, e_i, e_j, e_k)|`,
    /// as the norm of the tangential tensor.
    pub fn rm_normal_norm(&self) -> f64 {
        let d = self.geom.d;
        let gi = &self.geom.gbar_inv;
        let mut t = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    t[(i * d + j) * d + k] = self.rm4(&self.geom.nu, self.tangent(i), self.tangent(j), self.tangent(k));
                }
            }
        }
        let mut s = 0.0;
        for (i, j, k) in triples(d) {
            for (a, b, c) in triples(d) {
                s += gi[i * d + a] * gi[j * d + b] * gi[k * d + c] * t[(i * d + j) * d + k] * t[(a * d + b) * d + c];
            }
        }
        s.max(0.0).sqrt()
    }

    /// `|Rm|_g` of the ambient curvature at the point.
    pub fn rm_norm(&self) -> f64 {
        let n = self.geom.n;
        let gi = &self.geom.ginv;
        // raise all indices of Rm and contract
        let mut up = self.riemann.clone();
        for pass in 0..4 {
            let mut next = Tensor4::zeros(n);
            for (i, j, k, l) in quads(n) {
                let mut s = 0.0;
                for m in 0..n {
                    let idx = match pass {
                        0 => (m, j, k, l),
                        1 => (i, m, k, l),
                        2 => (i, j, m, l),
                        _ => (i, j, k, m),
                    };
                    let gidx = match pass {
                        0 => i,
                        1 => j,
                        2 => k,
                        _ => l,
                    };
                    s += gi[gidx * n + m] * up.get(idx.0, idx.1, idx.2, idx.3);
                }
                next.set(i, j, k, l, s);
            }
            up = next;
        }
        self.riemann.data.iter().zip(&up.data).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }
}

fn triples(d: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..d).flat_map(move |i| (0..d).flat_map(move |j| (0..d).map(move |k| (i, j, k))))
}

fn quads(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    triples(n).flat_map(move |(i, j, k)| (0..n).map(move |l| (i, j, k, l)))
}

/// Nodal data of a graph surface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeField {
    pub x: Vec<f64>,
    pub nu: Vec<f64>,
    pub mean_curvature: f64,
    pub h_norm2: f64,
    pub h_ring_norm: f64,
    pub ricci_normal: f64,
    pub rm_norm: f64,
    pub rm_normal_norm: f64,
    /// Induced area element relative to the round one.
    pub area_ratio: f64,
    /// `|u| / R + |Du| + R |D^2 u|` with derivatives on `S_R(0)`.
    pub scaled_c2: f64,
}

/// `graph(u)` over `S_R(0)` with `u` given by basis coefficients.
#[derive(Clone, Debug)]
pub struct GraphSurface {
    pub grid: Arc<SphereGrid>,
    pub radius: f64,
    pub coeffs: Vec<f64>,
    pub metric: MetricField,
    pub nodes: Vec<NodeField>,
}

impl GraphSurface {
    /// Builds all nodal fields.
    pub fn build(grid: Arc<SphereGrid>, radius: f64, coeffs: Vec<f64>, metric: &MetricField) -> Result<Self> {
        check_compatible(&grid, metric)?;
        if coeffs.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!("{} coefficients for a basis of size {}", coeffs.len(), grid.dim())));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        let nodes: Result<Vec<NodeField>> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = &grid.params[i];
                let omega = grid.chart(p);
                let u = grid.eval_node(&coeffs, i);
                let sp = SurfacePoint::evaluate(radius, &omega, &u, metric, p)?;
                Ok(NodeField {
                    x: sp.geom.x.clone(),
                    nu: sp.geom.nu.clone(),
                    mean_curvature: sp.mean_curvature(),
                    h_norm2: sp.h_norm2(),
                    h_ring_norm: sp.h_ring_norm(),
                    ricci_normal: sp.ricci_normal(),
                    rm_norm: sp.rm_norm(),
                    rm_normal_norm: sp.rm_normal_norm(),
                    area_ratio: sp.area_ratio,
                    scaled_c2: (sp.u.abs() + sp.du_norm + sp.ddu_norm) / radius,
                })
            })
            .collect();
        Ok(GraphSurface { grid, radius, coeffs, metric: metric.clone(), nodes: nodes? })
    }

    /// Full pointwise geometry at an arbitrary chart point.
    pub fn point(&self, params: &[f64]) -> Result<SurfacePoint> {
        let omega = self.grid.chart(params);
        let u = self.grid.eval_at(&self.coeffs, params);
        SurfacePoint::evaluate(self.radius, &omega, &u, &self.metric, params)
    }

    pub fn nodal_u(&self) -> Vec<f64> {
        self.grid.synthesize(&self.coeffs)
    }

    /// `sup |u|`.
    pub fn sup_u(&self) -> f64 {
        self.nodal_u().iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// Scaled norm `sup(R^{-1}|u| + |Du| + R|D^2 u|)` over the nodes.
    pub fn scaled_norm(&self) -> f64 {
        self.nodes.iter().fold(0.0f64, |a, f| a.max(f.scaled_c2))
    }

    pub fn mean_curvatures(&self) -> Vec<f64> {
        self.nodes.iter().map(|f| f.mean_curvature).collect()
    }

    /// `max |H - target|`.
    pub fn residual(&self, target: f64) -> f64 {
        self.nodes.iter().fold(0.0f64, |a, f| a.max((f.mean_curvature - target).abs()))
    }

    /// Induced area by quadrature.
    pub fn area(&self) -> f64 {
        let v: Vec<f64> = self.nodes.iter().map(|f| f.area_ratio).collect();
        self.grid.integrate(&v)
    }

    /// Area-weighted mean of the mean curvature.
    pub fn mean_of_mean_curvature(&self) -> f64 {
        let v: Vec<f64> = self.nodes.iter().map(|f| f.area_ratio * f.mean_curvature).collect();
        self.grid.integrate(&v) / self.area()
    }

    pub fn sup_h_ring(&self) -> f64 {
        self.nodes.iter().fold(0.0f64, |a, f| a.max(f.h_ring_norm))
    }

    pub fn to_text(&self) -> String {
        let header = serde_json::json!({
            "R": self.radius,
            "n": self.grid.n,
            "mode": self.grid.mode,
            "lmax": self.grid.lmax,
            "metric": self.metric.spec,
            "path_t": self.metric.path_t,
        });
        let mut out = format!("# {}\n", header);
        for (p, u) in self.grid.params.iter().zip(self.nodal_u()) {
            for v in p {
                out.push_str(&format!("{:.16e} ", v));
            }
            out.push_str(&format!("{:.16e}\n", u));
        }
        out
    }
}

/// Axisymmetric grids only represent metrics symmetric about the `x_n` axis.
pub fn check_compatible(grid: &SphereGrid, metric: &MetricField) -> Result<()> {
    if grid.n != metric.n() {
        return Err(Error::InvalidParameter(format!("grid dimension {} vs metric dimension {}", grid.n, metric.n())));
    }
    if grid.mode == super::grid::GridMode::Axisymmetric && !metric.spec.is_axisymmetric() {
        return Err(Error::Unsupported("axisymmetric grid with a metric that is not axisymmetric about x_n".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::grid::GridMode;
    use crate::geometry::schwarzschild::{sphere_area_nm, sphere_mean_curvature_nm};

    #[test]
    fn round_sphere_in_euclidean_space() {
        for (n, mode) in [(3, GridMode::Full), (3, GridMode::Axisymmetric), (5, GridMode::Axisymmetric)] {
            let grid = Arc::new(match mode {
                GridMode::Full => SphereGrid::full(12, 24, 4).unwrap(),
                GridMode::Axisymmetric => SphereGrid::axisymmetric(n, 16, 4).unwrap(),
            });
            let m = MetricField::euclidean(n).unwrap();
            let s = GraphSurface::build(grid.clone(), 7.0, vec![0.0; grid.dim()], &m).unwrap();
            let h = (n as f64 - 1.0) / 7.0;
            assert!(s.residual(h) < 1e-14, "{n} {mode:?}");
            assert!(s.sup_h_ring() < 1e-14);
            let area = crate::numerics::quadrature::unit_sphere_area(n - 1) * 7f64.powi(n as i32 - 1);
            assert!((s.area() / area - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn coordinate_sphere_in_schwarzschild() {
        for n in 3..=5 {
            let grid = Arc::new(SphereGrid::axisymmetric(n, 16, 4).unwrap());
            let m = MetricField::schwarzschild(n, 2.0).unwrap();
            let s = GraphSurface::build(grid.clone(), 9.0, vec![0.0; grid.dim()], &m).unwrap();
            let h = sphere_mean_curvature_nm(n, 2.0, 9.0);
            assert!(s.residual(h) < 1e-8 * h);
            assert!((s.area() / sphere_area_nm(n, 2.0, 9.0) - 1.0).abs() < 1e-12);
            let rc = crate::geometry::schwarzschild::radial_ricci(n, 2.0, 9.0);
            assert!((s.nodes[3].ricci_normal - rc).abs() < 1e-12 * rc.abs());
        }
        let grid = Arc::new(SphereGrid::full(12, 24, 5).unwrap());
        let m = MetricField::schwarzschild(3, 2.0).unwrap();
        let s = GraphSurface::build(grid.clone(), 9.0, vec![0.0; grid.dim()], &m).unwrap();
        assert!(s.residual(sphere_mean_curvature_nm(3, 2.0, 9.0)) < 1e-14);
    }

    #[test]
    fn linearization_of_mean_curvature() {
        // H(eps Y) = (n-1)/R - eps (Delta Y + (n-1) Y) / R^2 + O(eps^2) in Euclidean space
        let grid = Arc::new(SphereGrid::full(16, 32, 4).unwrap());
        let m = MetricField::euclidean(3).unwrap();
        let radius = 5.0;
        let k = 6; // an l = 2 harmonic
        assert_eq!(grid.degrees[k], 2);
        let mut errs = Vec::new();
        for eps in [1e-3, 5e-4] {
            let mut c = vec![0.0; grid.dim()];
            c[k] = eps;
            let s = GraphSurface::build(grid.clone(), radius, c.clone(), &m).unwrap();
            let y = grid.synthesize(&c);
            let mut worst: f64 = 0.0;
            for (f, yv) in s.nodes.iter().zip(&y) {
                let lin = 2.0 / radius - (-6.0 * yv + 2.0 * yv) / (radius * radius);
                worst = worst.max((f.mean_curvature - lin).abs());
            }
            errs.push(worst);
        }
        // quadratic remainder
        assert!(errs[0] / errs[1] > 3.5 && errs[0] / errs[1] < 4.5, "{errs:?}");
    }

    #[test]
    fn dual_derivatives_match_finite_differences() {
        use crate::numerics::dual::Dual;
        let spec = crate::geometry::ManifoldSpec::schwarzschild(3, 1.0)
            .with_perturbation(crate::geometry::PerturbationSpec::new(0.3, crate::geometry::Parity::Mixed, 2).with_support(1.0));
        let metric = MetricField::new(spec).unwrap();
        let grid = SphereGrid::full(8, 16, 3).unwrap();
        let p = vec![0.9, 1.3];
        let omega = grid.chart(&p);
        let base = [0.3, 0.1, -0.2, 0.05, 0.02, -0.07];
        let eval = |v: &[f64; 6]| -> f64 {
            let du = [v[1], v[2]];
            let ddu = [v[3], v[4], v[4], v[5]];
            let x = graph_point(6.0, &omega, v[0]);
            let s = metric.sample(&x).unwrap();
            point_geometry(6.0, &GraphJet { omega: &omega, u: v[0], du: &du, ddu: &ddu }, &s).unwrap().mean_curvature
        };
        let du = [Dual::seed(base[1], 1), Dual::seed(base[2], 2)];
        let ddu = [Dual::seed(base[3], 3), Dual::seed(base[4], 4), Dual::seed(base[4], 4), Dual::seed(base[5], 5)];
        let x = graph_point(6.0, &omega, base[0]);
        let s = metric.sample(&x).unwrap();
        let hd = point_geometry(6.0, &GraphJet { omega: &omega, u: Dual::seed(base[0], 0), du: &du, ddu: &ddu }, &s)
            .unwrap()
            .mean_curvature;
        assert!((hd.v - eval(&base)).abs() < 1e-15);
        for k in 0..6 {
            let step = 1e-5;
            let mut a = base;
            let mut b = base;
            a[k] += step;
            b[k] -= step;
            let fd = (eval(&a) - eval(&b)) / (2.0 * step);
            assert!((fd - hd.d[k]).abs() < 1e-8 * (1.0 + fd.abs()), "direction {k}: {fd} vs {}", hd.d[k]);
        }
    }

    #[test]
    fn axisymmetric_grid_rejects_general_metric() {
        let spec = crate::geometry::ManifoldSpec::schwarzschild(3, 1.0)
            .with_perturbation(crate::geometry::PerturbationSpec::new(0.1, crate::geometry::Parity::Even, 2));
        let metric = MetricField::new(spec).unwrap();
        let grid = Arc::new(SphereGrid::axisymmetric(3, 8, 3).unwrap());
        assert!(matches!(GraphSurface::build(grid, 9.0, vec![0.0; 4], &metric), Err(Error::Unsupported(_))));
    }
}
