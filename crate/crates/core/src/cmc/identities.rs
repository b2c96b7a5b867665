//! Discrete checks of the Gauss, Codazzi and Simons identities on graph
//! surfaces.
//!
//! Pointwise fields (`h`, `H`, `|h°|^2`, induced Christoffel symbols,
//! tangential curvature contractions) are evaluated exactly from the
//! spectral representation of `u`; their chart derivatives are taken with
//! fourth-order central differences of step `h` in the chart parameters.
//! Residuals therefore decrease like `h^4` under refinement until rounding
//! dominates. Contractions are carried out in an orthonormal tangent frame.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::surface::{GraphSurface, SurfacePoint};
use crate::error::{Error, Result};
use crate::numerics::fit::loglog_slope;

/// Finite-difference order of the identity residuals.
pub const SCHEME_ORDER: f64 = 4.0;

/// Tangential fields at one chart point, in chart components.
#[derive(Clone, Debug)]
struct Local {
    d: usize,
    gbar: Vec<f64>,
    h: Vec<f64>,
    hring: Vec<f64>,
    hm: f64,
    hring2: f64,
    /// Induced Christoffel symbols `G^e_ab` at `(e*d + a)*d + b`.
    gamma: Vec<f64>,
    /// `Rc(nu, X_i)`.
    w: Vec<f64>,
    /// `Rm(nu, X_i, X_j, X_k)`.
    q: Vec<f64>,
    /// `Rm(X_i, X_j, X_k, X_l)`.
    rm: Vec<f64>,
    /// `Rm(X_k, X_i, nu, X_j)` at `(k*d + i)*d + j`.
    codazzi_rhs: Vec<f64>,
}

impl Local {
    fn new(p: &SurfacePoint) -> Self {
        let g = &p.geom;
        let (n, d) = (g.n, g.d);
        let xa = |a: usize| &g.xa[a * n..(a + 1) * n];
        // D_a X_b = X_ab + G(X_a, X_b)
        let mut dx = vec![0.0; d * d * n];
        for a in 0..d {
            for b in 0..d {
                for m in 0..n {
                    let mut v = g.xab[(a * d + b) * n + m];
                    for i in 0..n {
                        for j in 0..n {
                            v += g.gamma[(m * n + i) * n + j] * g.xa[a * n + i] * g.xa[b * n + j];
                        }
                    }
                    dx[(a * d + b) * n + m] = v;
                }
            }
        }
        let gdot = |u: &[f64], v: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += g.g[i * n + j] * u[i] * v[j];
                }
            }
            s
        };
        let mut low = vec![0.0; d * d * d];
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    low[(c * d + a) * d + b] = gdot(&dx[(a * d + b) * n..(a * d + b + 1) * n], xa(c));
                }
            }
        }
        let mut gamma = vec![0.0; d * d * d];
        for e in 0..d {
            for a in 0..d {
                for b in 0..d {
                    gamma[(e * d + a) * d + b] = (0..d).map(|c| g.gbar_inv[e * d + c] * low[(c * d + a) * d + b]).sum();
                }
            }
        }
        let rc = p.ricci();
        let mut w = vec![0.0; d];
        for (i, wi) in w.iter_mut().enumerate() {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += rc[a * n + b] * g.nu[a] * xa(i)[b];
                }
            }
            *wi = s;
        }
        let mut q = vec![0.0; d * d * d];
        let mut codazzi_rhs = vec![0.0; d * d * d];
        let mut rm = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    q[(i * d + j) * d + k] = p.rm4(&g.nu, xa(i), xa(j), xa(k));
                    codazzi_rhs[(i * d + j) * d + k] = p.rm4(xa(i), xa(j), &g.nu, xa(k));
                    for l in 0..d {
                        rm[((i * d + j) * d + k) * d + l] = p.rm4(xa(i), xa(j), xa(k), xa(l));
                    }
                }
            }
        }
        let hring = p.h_ring();
        Local {
            d,
            gbar: g.gbar.clone(),
            h: g.h.clone(),
            hring2: p.inner2(&hring, &hring),
            hring,
            hm: g.mean_curvature,
            gamma,
            w,
            q,
            rm,
            codazzi_rhs,
        }
    }
}

/// Fields on a finite-difference stencil around one chart point.
struct Stencil<'a> {
    surface: &'a GraphSurface,
    center: Vec<f64>,
    step: f64,
    cache: HashMap<Vec<i8>, Local>,
}

impl<'a> Stencil<'a> {
    fn new(surface: &'a GraphSurface, center: &[f64], step: f64) -> Self {
        Stencil { surface, center: center.to_vec(), step, cache: HashMap::new() }
    }

    fn at(&mut self, off: &[i8]) -> Result<&Local> {
        if !self.cache.contains_key(off) {
            let p: Vec<f64> = self.center.iter().zip(off).map(|(c, o)| c + *o as f64 * self.step).collect();
            let sp = self.surface.point(&p)?;
            self.cache.insert(off.to_vec(), Local::new(&sp));
        }
        Ok(&self.cache[off])
    }

    fn offset(&self, a: usize, k: i8) -> Vec<i8> {
        let mut o = vec![0i8; self.center.len()];
        o[a] = k;
        o
    }

    /// `d_a F` for a vector-valued field.
    fn first(&mut self, a: usize, f: &dyn Fn(&Local) -> Vec<f64>) -> Result<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for (k, c) in [(2i8, -1.0), (1, 8.0), (-1, -8.0), (-2, 1.0)] {
            let o = self.offset(a, k);
            let v = f(self.at(&o)?);
            let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            for (x, y) in acc.iter_mut().zip(v) {
                *x += c * y;
            }
        }
        let h = self.step;
        Ok(acc.unwrap().into_iter().map(|v| v / (12.0 * h)).collect())
    }

    /// `d_a d_b f` for a scalar field.
    fn second(&mut self, a: usize, b: usize, f: &dyn Fn(&Local) -> f64) -> Result<f64> {
        let h = self.step;
        if a == b {
            let mut s = 0.0;
            for (k, c) in [(2i8, -1.0), (1, 16.0), (0, -30.0), (-1, 16.0), (-2, -1.0)] {
                let o = self.offset(a, k);
                s += c * f(self.at(&o)?);
            }
            return Ok(s / (12.0 * h * h));
        }
        let w = [(2i8, -1.0), (1, 8.0), (-1, -8.0), (-2, 1.0)];
        let mut s = 0.0;
        for (ka, ca) in w {
            for (kb, cb) in w {
                let mut o = vec![0i8; self.center.len()];
                o[a] = ka;
                o[b] = kb;
                s += ca * cb * f(self.at(&o)?);
            }
        }
        Ok(s / (144.0 * h * h))
    }
}

/// Orthonormal frame `F` with `F^T gbar F = I` (columns are frame vectors in
/// chart components).
fn frame(gbar: &[f64], d: usize) -> Result<Vec<f64>> {
    let m = nalgebra::DMatrix::from_row_slice(d, d, gbar);
    let l = m.cholesky().ok_or_else(|| Error::Degenerate("induced metric not positive definite".into()))?.l();
    let inv = l.try_inverse().ok_or_else(|| Error::Degenerate("frame".into()))?;
    // F = L^{-T}
    let f = inv.transpose();
    let mut out = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            out[r * d + c] = f[(r, c)];
        }
    }
    Ok(out)
}

/// Components of a covariant tensor of the given rank in the frame `F`.
fn to_frame(t: &[f64], rank: usize, f: &[f64], d: usize) -> Vec<f64> {
    let mut cur = t.to_vec();
    let total = d.pow(rank as u32);
    for slot in 0..rank {
        let stride = d.pow((rank - 1 - slot) as u32);
        let mut next = vec![0.0; total];
        for (idx, out) in next.iter_mut().enumerate() {
            let i = (idx / stride) % d;
            let base = idx - i * stride;
            let mut s = 0.0;
            for a in 0..d {
                s += f[a * d + i] * cur[base + a * stride];
            }
            *out = s;
        }
        cur = next;
    }
    cur
}

/// Residual of one identity over the sampled points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// Max absolute residual in an orthonormal frame.
    pub absolute: f64,
    /// Max size of the individual terms.
    pub scale: f64,
    pub points: usize,
    pub step: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.absolute / self.scale
        } else {
            self.absolute
        }
    }
}

/// Interior nodes (colatitude at least `margin` from the poles), thinned to
/// at most `max_points`.
pub fn sample_nodes(s: &GraphSurface, margin: f64, max_points: usize) -> Vec<Vec<f64>> {
    let pi = std::f64::consts::PI;
    let inner: Vec<&Vec<f64>> = s.grid.params.iter().filter(|p| p[0] > margin && p[0] < pi - margin).collect();
    if inner.is_empty() || max_points == 0 {
        return Vec::new();
    }
    let stride = inner.len().div_ceil(max_points).max(1);
    // an odd offset spreads samples over longitudes in full mode
    inner.iter().step_by(stride).map(|p| (*p).clone()).collect()
}

fn covariant_derivative(gamma: &[f64], t: &[f64], dt: &[Vec<f64>], rank: usize, d: usize) -> Vec<f64> {
    // out[(c, i1..ir)] = d_c T - sum_slots G^e_{c i_s} T(.., e, ..)
    let total = d.pow(rank as u32);
    let mut out = vec![0.0; d * total];
    for c in 0..d {
        for idx in 0..total {
            let mut v = dt[c][idx];
            for slot in 0..rank {
                let stride = d.pow((rank - 1 - slot) as u32);
                let i = (idx / stride) % d;
                let base = idx - i * stride;
                for e in 0..d {
                    v -= gamma[(e * d + c) * d + i] * t[base + e * stride];
                }
            }
            out[c * total + idx] = v;
        }
    }
    out
}

struct SimonsTerms {
    lhs: f64,
    rhs: f64,
    scale: f64,
}

fn simons_at(s: &GraphSurface, p: &[f64], step: f64) -> Result<SimonsTerms> {
    let mut st = Stencil::new(s, p, step);
    let c = st.at(&vec![0i8; p.len()])?.clone();
    let d = c.d;
    let n = s.grid.n as f64;
    let mut df = vec![0.0; d];
    let mut dh = vec![0.0; d];
    let mut ddf = vec![0.0; d * d];
    let mut ddh = vec![0.0; d * d];
    for a in 0..d {
        df[a] = st.first(a, &|l| vec![l.hring2])?[0];
        dh[a] = st.first(a, &|l| vec![l.hm])?[0];
        for b in a..d {
            ddf[a * d + b] = st.second(a, b, &|l| l.hring2)?;
            ddf[b * d + a] = ddf[a * d + b];
            ddh[a * d + b] = st.second(a, b, &|l| l.hm)?;
            ddh[b * d + a] = ddh[a * d + b];
        }
    }
    let mut d_hring = Vec::with_capacity(d);
    let mut d_w = Vec::with_capacity(d);
    let mut d_q = Vec::with_capacity(d);
    for a in 0..d {
        d_hring.push(st.first(a, &|l| l.hring.clone())?);
        d_w.push(st.first(a, &|l| l.w.clone())?);
        d_q.push(st.first(a, &|l| l.q.clone())?);
    }
    // covariant Hessians of the scalars
    let hess = |dd: &[f64], d1: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                out[a * d + b] = dd[a * d + b] - (0..d).map(|e| c.gamma[(e * d + a) * d + b] * d1[e]).sum::<f64>();
            }
        }
        out
    };
    let f = frame(&c.gbar, d)?;
    let hf = to_frame(&hess(&ddf, &df), 2, &f, d);
    let hh = to_frame(&hess(&ddh, &dh), 2, &f, d);
    let hr = to_frame(&c.hring, 2, &f, d);
    let dhr = to_frame(&covariant_derivative(&c.gamma, &c.hring, &d_hring, 2, d), 3, &f, d);
    let dw = to_frame(&covariant_derivative(&c.gamma, &c.w, &d_w, 1, d), 2, &f, d);
    let dq = to_frame(&covariant_derivative(&c.gamma, &c.q, &d_q, 3, d), 4, &f, d);
    let rm = to_frame(&c.rm, 4, &f, d);
    let idx2 = |i: usize, j: usize| i * d + j;
    let idx3 = |i: usize, j: usize, k: usize| (i * d + j) * d + k;
    let idx4 = |i: usize, j: usize, k: usize, l: usize| ((i * d + j) * d + k) * d + l;
    let lhs = 0.5 * (0..d).map(|i| hf[idx2(i, i)]).sum::<f64>();
    let mut t = [0.0f64; 9];
    let hr2: f64 = hr.iter().map(|v| v * v).sum();
    for i in 0..d {
        for j in 0..d {
            t[0] += hr[idx2(i, j)] * hh[idx2(i, j)];
            // dw[(j, i)] = nabla_j W_i
            t[7] += hr[idx2(i, j)] * dw[idx2(j, i)];
            for k in 0..d {
                t[1] += dhr[idx3(k, i, j)].powi(2);
                t[2] += c.hm * hr[idx2(i, j)] * hr[idx2(j, k)] * hr[idx2(k, i)];
                // dq[(l, i, j, k)] = nabla_l Q_ijk, contracted l = k
                t[8] -= hr[idx2(i, j)] * dq[idx4(k, i, j, k)];
                for l in 0..d {
                    t[5] -= hr[idx2(i, j)] * hr[idx2(i, k)] * rm[idx4(l, j, l, k)];
                    t[6] -= hr[idx2(i, j)] * hr[idx2(k, l)] * rm[idx4(k, i, j, l)];
                }
            }
        }
    }
    t[3] = c.hm * c.hm * hr2 / (n - 1.0);
    t[4] = -hr2 * hr2;
    let rhs: f64 = t.iter().sum();
    let scale = t.iter().fold(lhs.abs(), |a, b| a.max(b.abs()));
    Ok(SimonsTerms { lhs, rhs, scale })
}

/// `max |1/2 Lap |h°|^2 - (right-hand side)|` of the trace-free Simons
/// identity over interior sample nodes. With `Q_ijk = Rm(nu, e_i, e_j, e_k)`
/// and `W_i = Rc(nu, e_i)` the right-hand side reads
///
/// `<h°, D^2 H> + |D h°|^2 + H tr h°^3 + H^2 |h°|^2/(n-1) - |h°|^4
///  - h°_ij h°_ik Rm_ljlk - h°_ij h°_kl Rm_kijl + h°_ij D_j W_i - h°_ij D_k Q_ijk`,
///
/// the signs matching the Gauss and Codazzi conventions of this module.
pub fn simons_residual(s: &GraphSurface, step: f64, max_points: usize) -> Result<IdentityResidual> {
    let pts = sample_nodes(s, 0.35, max_points);
    if pts.is_empty() {
        return Err(Error::InvalidParameter("no interior sample nodes".into()));
    }
    let mut absolute = 0.0f64;
    let mut scale = 0.0f64;
    for p in &pts {
        let t = simons_at(s, p, step)?;
        absolute = absolute.max((t.lhs - t.rhs).abs());
        scale = scale.max(t.scale);
    }
    Ok(IdentityResidual { absolute, scale, points: pts.len(), step })
}

/// Residuals of the Codazzi equation `D_k h_ij - D_i h_kj = Rm(X_k, X_i, nu, X_j)`
/// and of the Gauss equation `Rm_bar_ijkl = Rm_ijkl + h_il h_jk - h_ik h_jl`.
pub fn gauss_codazzi_residual(s: &GraphSurface, step: f64, max_points: usize) -> Result<(IdentityResidual, IdentityResidual)> {
    let pts = sample_nodes(s, 0.35, max_points);
    if pts.is_empty() {
        return Err(Error::InvalidParameter("no interior sample nodes".into()));
    }
    let mut cod = IdentityResidual { absolute: 0.0, scale: 0.0, points: pts.len(), step };
    let mut gau = cod;
    for p in &pts {
        let mut st = Stencil::new(s, p, step);
        let c = st.at(&vec![0i8; p.len()])?.clone();
        let d = c.d;
        let mut d_h = Vec::with_capacity(d);
        let mut d_gamma = Vec::with_capacity(d);
        for a in 0..d {
            d_h.push(st.first(a, &|l| l.h.clone())?);
            d_gamma.push(st.first(a, &|l| l.gamma.clone())?);
        }
        let f = frame(&c.gbar, d)?;
        let dh = covariant_derivative(&c.gamma, &c.h, &d_h, 2, d);
        let mut codazzi = vec![0.0; d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    codazzi[(k * d + i) * d + j] = dh[(k * d + i) * d + j] - dh[(i * d + k) * d + j] - c.codazzi_rhs[(k * d + i) * d + j];
                }
            }
        }
        let cf = to_frame(&codazzi, 3, &f, d);
        let rf = to_frame(&c.codazzi_rhs, 3, &f, d);
        let dhf = to_frame(&dh, 3, &f, d);
        cod.absolute = cod.absolute.max(cf.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        let h2: f64 = to_frame(&c.h, 2, &f, d).iter().map(|v| v * v).sum();
        cod.scale = cod.scale.max(rf.iter().chain(&dhf).fold(h2, |a, b| a.max(b.abs())));
        // intrinsic curvature from the induced Christoffel symbols
        let ga = |e: usize, a: usize, b: usize| c.gamma[(e * d + a) * d + b];
        let dga = |l: usize, e: usize, a: usize, b: usize| d_gamma[l][(e * d + a) * d + b];
        let mut gauss = vec![0.0; d * d * d * d];
        let mut extrinsic = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut rbar = 0.0;
                        for m in 0..d {
                            let mut up = dga(i, m, j, k) - dga(j, m, i, k);
                            for q in 0..d {
                                up += ga(q, j, k) * ga(m, i, q) - ga(q, i, k) * ga(m, j, q);
                            }
                            rbar += c.gbar[l * d + m] * up;
                        }
                        let h = |a: usize, b: usize| c.h[a * d + b];
                        let ext = c.rm[((i * d + j) * d + k) * d + l] + h(i, l) * h(j, k) - h(i, k) * h(j, l);
                        gauss[((i * d + j) * d + k) * d + l] = rbar - ext;
                        extrinsic[((i * d + j) * d + k) * d + l] = ext;
                    }
                }
            }
        }
        let gf = to_frame(&gauss, 4, &f, d);
        let ef = to_frame(&extrinsic, 4, &f, d);
        gau.absolute = gau.absolute.max(gf.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        gau.scale = gau.scale.max(ef.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }
    Ok((cod, gau))
}

/// Residuals over a sequence of steps and observed orders between
/// consecutive levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
    /// Least-squares slope of `log residual` against `log step`.
    pub fitted_order: f64,
}

pub fn refinement_study(steps: &[f64], mut residual: impl FnMut(f64) -> Result<f64>) -> Result<RefinementStudy> {
    if steps.len() < 2 {
        return Err(Error::InvalidParameter("refinement needs at least two steps".into()));
    }
    let residuals: Vec<f64> = steps.iter().map(|h| residual(*h)).collect::<Result<_>>()?;
    let orders = steps
        .windows(2)
        .zip(residuals.windows(2))
        .map(|(h, r)| (r[0] / r[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    let fitted_order = loglog_slope(steps, &residuals)?.slope;
    Ok(RefinementStudy { steps: steps.to_vec(), residuals, orders, fitted_order })
}

/// Coefficients of the off-center coordinate sphere `|x - p| = rho` as a
/// graph over `S_R(0)`.
pub fn off_center_sphere(grid: &super::grid::SphereGrid, radius: f64, center: &[f64], rho: f64) -> Vec<f64> {
    grid.project(|w| {
        let wp: f64 = w.iter().zip(center).map(|(a, b)| a * b).sum();
        let p2: f64 = center.iter().map(|v| v * v).sum();
        wp + (rho * rho - p2 + wp * wp).sqrt() - radius
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::grid::SphereGrid;
    use crate::geometry::metric::MetricField;
    use crate::geometry::{ManifoldSpec, Parity, PerturbationSpec};
    use std::sync::Arc;

    fn off_center(metric: &MetricField, grid: SphereGrid) -> GraphSurface {
        let grid = Arc::new(grid);
        let n = grid.n;
        let mut p = vec![0.0; n];
        p[n - 1] = 1.5;
        let mut c = off_center_sphere(&grid, 12.0, &p, 12.0);
        // break umbilicity: coordinate spheres are umbilic in conformally flat metrics
        for (k, v) in c.iter_mut().enumerate().skip(2).take(5) {
            *v += 0.3 / k as f64;
        }
        GraphSurface::build(grid, 12.0, c, metric).unwrap()
    }

    #[test]
    fn round_sphere_in_euclidean_space_is_exact() {
        let grid = Arc::new(SphereGrid::full(12, 24, 4).unwrap());
        let s = GraphSurface::build(grid.clone(), 5.0, vec![0.0; grid.dim()], &MetricField::euclidean(3).unwrap()).unwrap();
        let r = simons_residual(&s, 0.02, 6).unwrap();
        assert!(r.absolute < 1e-12, "{r:?}");
        let (c, g) = gauss_codazzi_residual(&s, 0.005, 6).unwrap();
        assert!(c.relative() < 1e-6 && g.relative() < 1e-6, "{c:?} {g:?}");
    }

    #[test]
    fn identities_converge_on_off_center_sphere() {
        let metric = MetricField::schwarzschild(3, 2.0).unwrap();
        let s = off_center(&metric, SphereGrid::full(32, 64, 20).unwrap());
        let steps = [0.08, 0.04, 0.02];
        let simons = refinement_study(&steps, |h| Ok(simons_residual(&s, h, 6)?.absolute)).unwrap();
        assert!(simons.orders.iter().all(|o| *o > SCHEME_ORDER - 0.5), "{simons:?}");
        let gauss = refinement_study(&steps, |h| Ok(gauss_codazzi_residual(&s, h, 6)?.1.absolute)).unwrap();
        assert!(gauss.orders.iter().all(|o| *o > SCHEME_ORDER - 0.5), "{gauss:?}");
        let codazzi = refinement_study(&steps, |h| Ok(gauss_codazzi_residual(&s, h, 6)?.0.absolute)).unwrap();
        assert!(codazzi.orders.iter().all(|o| *o > SCHEME_ORDER - 0.5), "{codazzi:?}");
    }

    #[test]
    fn identities_in_axisymmetric_mode() {
        let spec = ManifoldSpec::schwarzschild(4, 2.0).with_perturbation(PerturbationSpec::new(0.5, Parity::Mixed, 0).with_support(1.0));
        let metric = MetricField::new(spec).unwrap();
        let s = off_center(&metric, SphereGrid::axisymmetric(4, 48, 30).unwrap());
        let r1 = simons_residual(&s, 0.04, 4).unwrap();
        let r2 = simons_residual(&s, 0.02, 4).unwrap();
        assert!(r2.absolute < r1.absolute / 10.0, "{r1:?} {r2:?}");
        assert!(r2.relative() < 1e-4, "{r2:?}");
        let (c, g) = gauss_codazzi_residual(&s, 0.01, 4).unwrap();
        assert!(c.relative() < 1e-5 && g.relative() < 1e-5, "{c:?} {g:?}");
    }
}
