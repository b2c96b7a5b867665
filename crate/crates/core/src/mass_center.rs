//! Center of mass: the flux definition, the boundary expression through the
//! mean curvature of off-center coordinate spheres, least-squares sphere
//! fits, and the centroids of the CMC foliation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmc::estimates::solve_leaf;
use crate::cmc::grid::{GridMode, SphereGrid};
use crate::cmc::newton::ContinuationOptions;
use crate::cmc::surface::GraphSurface;
use crate::error::{Error, Result};
use crate::geometry::hypersurface::level_sphere_point;
use crate::geometry::metric::{MetricField, MetricSample};
use crate::numerics::fit::{loglog_slope, richardson_in_inverse_radius};
use crate::numerics::quadrature::{unit_sphere_area, SphereQuadrature};

/// `h_ij = g_ij - delta_ij` and `h_ij,k` at a point.
struct Deviation {
    n: usize,
    s: MetricSample,
}

impl Deviation {
    fn at(metric: &MetricField, x: &[f64]) -> Result<Self> {
        Ok(Deviation { n: metric.n(), s: metric.sample(x)? })
    }

    fn h(&self, i: usize, j: usize) -> f64 {
        self.s.g(i, j) - if i == j { 1.0 } else { 0.0 }
    }

    fn dh(&self, k: usize, i: usize, j: usize) -> f64 {
        self.s.dg(k, i, j)
    }

    fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.h(i, i)).sum()
    }
}

/// `sum_j [x_l (h_ij,i - h_ii,j) - (h_jl - h_ii delta_lj)] x_j / r` at `x` on `S_r(0)`.
fn flux_density(d: &Deviation, x: &[f64], r: f64, l: usize) -> f64 {
    let n = d.n;
    let tr = d.trace();
    let mut s = 0.0;
    for j in 0..n {
        let mut div = 0.0;
        for i in 0..n {
            div += d.dh(i, i, j) - d.dh(j, i, i);
        }
        let lin = d.h(j, l) - if j == l { tr } else { 0.0 };
        s += (x[l] * div - lin) * x[j];
    }
    s / r
}

/// Quadrature used for sphere integrals of dimension `n`.
pub fn flux_quadrature(n: usize) -> SphereQuadrature {
    SphereQuadrature::standard(n)
}

fn coarse_quadrature(n: usize) -> SphereQuadrature {
    match n {
        3 => SphereQuadrature::new(3, 30, 60),
        4 => SphereQuadrature::new(4, 18, 36),
        _ => SphereQuadrature::new(n, 9, 18),
    }
}

/// Partial center-of-mass integral at radius `r`, normalized so that its
/// limit is the center of mass.
pub fn center_integral(metric: &MetricField, r: f64, quad: &SphereQuadrature) -> Result<Vec<f64>> {
    let n = metric.n();
    let m = metric.mass();
    if m <= 0.0 {
        return Err(Error::InvalidParameter("the center of mass needs m > 0".into()));
    }
    let norm = 2.0 * m * (n as f64 - 1.0) * unit_sphere_area(n - 1);
    let scale = r.powi(n as i32 - 1);
    let mut out = vec![0.0; n];
    for (w, om) in quad.weights.iter().zip(&quad.points) {
        let x: Vec<f64> = om.iter().map(|v| r * v).collect();
        let d = Deviation::at(metric, &x)?;
        for (l, o) in out.iter_mut().enumerate() {
            *o += w * scale * flux_density(&d, &x, r, l);
        }
    }
    Ok(out.into_iter().map(|v| v / norm).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterReport {
    pub n: usize,
    pub radii: Vec<f64>,
    /// Partial integrals, one vector per radius.
    pub partial: Vec<Vec<f64>>,
    /// Extrapolated center of mass.
    pub center: Vec<f64>,
    /// Max difference between the extrapolants of the two highest orders.
    pub error: f64,
    /// Max change of the partial integral under a coarser quadrature.
    pub quadrature_change: f64,
    pub warning: Option<String>,
}

/// Richardson order used for limits in `1/r`.
pub const RICHARDSON_ORDER: usize = 2;

/// Flux center of mass extrapolated from a ladder of radii.
pub fn adm_center(metric: &MetricField, radii: &[f64]) -> Result<CenterReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be increasing, at least two".into()));
    }
    if *radii.last().unwrap() < 100.0 {
        return Err(Error::InvalidParameter("the largest radius must be at least 100".into()));
    }
    let n = metric.n();
    let quad = flux_quadrature(n);
    let partial: Vec<Vec<f64>> = radii.par_iter().map(|r| center_integral(metric, *r, &quad)).collect::<Result<_>>()?;
    let rmax = *radii.last().unwrap();
    let coarse = center_integral(metric, rmax, &coarse_quadrature(n))?;
    let last = partial.last().unwrap();
    let quadrature_change = coarse.iter().zip(last).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    if quadrature_change > 1e-6 * (1.0 + last.iter().fold(0.0f64, |a, b| a.max(b.abs()))) {
        return Err(Error::NotConverged(format!("center integral changed by {quadrature_change:e} under coarsening")));
    }
    let order = RICHARDSON_ORDER.min(radii.len() - 1);
    let mut center = vec![0.0; n];
    let mut error = 0.0f64;
    for l in 0..n {
        let f: Vec<f64> = partial.iter().map(|p| p[l]).collect();
        center[l] = richardson_in_inverse_radius(radii, &f, order)?;
        let lower = richardson_in_inverse_radius(radii, &f, order - 1)?;
        error = error.max((center[l] - lower).abs());
    }
    let warning = (!metric.spec.is_asymptotically_even()).then(|| "metric is not asymptotically even; the limit may not exist".to_string());
    Ok(CenterReport { n, radii: radii.to_vec(), partial, center, error, quadrature_change, warning })
}

fn check_offset(p: &[f64], r: f64, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidParameter(format!("center has {} coordinates, expected {n}", p.len())));
    }
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < 1.0 || 2.0 * norm > r {
        return Err(Error::Refused(format!("requires r >= 1 and 2|p| <= r, got r = {r}, |p| = {norm}")));
    }
    Ok(())
}

fn sphere_nodes(p: &[f64], r: f64, quad: &SphereQuadrature) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    let scale = r.powi(p.len() as i32 - 1);
    quad.points
        .iter()
        .zip(&quad.weights)
        .map(|(om, w)| (p.iter().zip(om).map(|(a, b)| a + r * b).collect(), om.clone(), w * scale))
        .collect()
}

/// `int_{S_r(p)} (x_l - p_l)(H - (n-1)/r) dA_delta`.
pub fn alternative_center_integral(metric: &MetricField, p: &[f64], r: f64, l: usize) -> Result<f64> {
    let n = metric.n();
    check_offset(p, r, n)?;
    if l >= n {
        return Err(Error::InvalidParameter(format!("component {l} out of range")));
    }
    let quad = flux_quadrature(n);
    let mut s = 0.0;
    for (x, om, w) in sphere_nodes(p, r, &quad) {
        let pt = level_sphere_point(metric, p, &x)?;
        s += w * r * om[l] * (pt.mean_curvature - (n as f64 - 1.0) / r);
    }
    Ok(s)
}

/// `m (n-1) omega_{n-1} (p_l - C_l)`.
pub fn alternative_center_prediction(metric: &MetricField, p: &[f64], center: &[f64], l: usize) -> f64 {
    let n = metric.n();
    metric.mass() * (n as f64 - 1.0) * unit_sphere_area(n - 1) * (p[l] - center[l])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternativeCenterPoint {
    pub r: f64,
    pub integral: f64,
    pub prediction: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternativeCenterReport {
    pub l: usize,
    pub p: Vec<f64>,
    pub points: Vec<AlternativeCenterPoint>,
    /// Log-log slope of `|residual|` against `r`; `None` if some residual vanishes.
    pub residual_slope: Option<f64>,
}

/// Boundary integral against its prediction over a ladder of radii.
pub fn alternative_center_ladder(metric: &MetricField, p: &[f64], center: &[f64], radii: &[f64], l: usize) -> Result<AlternativeCenterReport> {
    let points: Vec<AlternativeCenterPoint> = radii
        .par_iter()
        .map(|r| {
            let integral = alternative_center_integral(metric, p, *r, l)?;
            let prediction = alternative_center_prediction(metric, p, center, l);
            Ok(AlternativeCenterPoint { r: *r, integral, prediction, residual: integral - prediction })
        })
        .collect::<Result<_>>()?;
    let res: Vec<f64> = points.iter().map(|q| q.residual).collect();
    let residual_slope = if radii.len() >= 2 && res.iter().all(|v| *v != 0.0) { Some(loglog_slope(radii, &res)?.slope) } else { None };
    Ok(AlternativeCenterReport { l, p: p.to_vec(), points, residual_slope })
}

/// First-order expansion of `H - (n-1)/r` on `S_r(p)` in terms of `h = g - delta`.
fn expansion_terms(d: &Deviation, rho: &[f64], r: f64) -> f64 {
    let n = d.n;
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                t += 0.5 * d.dh(k, i, j) * rho[i] * rho[j] * rho[k];
            }
            t += 0.5 * d.dh(j, i, i) * rho[j];
            t -= d.dh(i, i, j) * rho[j];
            t += 0.5 * (n as f64 + 1.0) * d.h(i, j) * rho[i] * rho[j] / r;
        }
    }
    t - d.trace() / r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub r: f64,
    /// `max |H - (n-1)/r|`.
    pub max_exact: f64,
    /// `max |expansion|`.
    pub max_expansion: f64,
    /// `max |H - (n-1)/r - expansion|`.
    pub max_residual: f64,
}

/// Exact mean curvature of `S_r(p)` against its first-order expansion at the
/// quadrature nodes.
pub fn mean_curvature_expansion(metric: &MetricField, p: &[f64], r: f64) -> Result<ExpansionReport> {
    let n = metric.n();
    check_offset(p, r, n)?;
    let quad = flux_quadrature(n);
    let mut rep = ExpansionReport { r, max_exact: 0.0, max_expansion: 0.0, max_residual: 0.0 };
    for (x, om, _) in sphere_nodes(p, r, &quad) {
        let exact = level_sphere_point(metric, p, &x)?.mean_curvature - (n as f64 - 1.0) / r;
        let e = expansion_terms(&Deviation::at(metric, &x)?, &om, r);
        rep.max_exact = rep.max_exact.max(exact.abs());
        rep.max_expansion = rep.max_expansion.max(e.abs());
        rep.max_residual = rep.max_residual.max((exact - e).abs());
    }
    Ok(rep)
}

/// Both sides of the integration-by-parts identity for
/// `1/2 int (x_l - p_l) h_ij,k rho_i rho_j rho_k dA_delta` over `S_r(p)`.
pub fn integral_identity(metric: &MetricField, p: &[f64], r: f64, l: usize) -> Result<(f64, f64)> {
    let n = metric.n();
    check_offset(p, r, n)?;
    let quad = flux_quadrature(n);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (x, om, w) in sphere_nodes(p, r, &quad) {
        let d = Deviation::at(metric, &x)?;
        let y = r * om[l];
        let mut a = 0.0;
        let mut b = 0.0;
        let mut c = 0.0;
        for i in 0..n {
            b += d.h(i, l) * om[i];
            for j in 0..n {
                c += d.dh(j, i, j) * om[i] - (n as f64 + 1.0) * d.h(i, j) * om[i] * om[j] / r;
                for k in 0..n {
                    a += d.dh(k, i, j) * om[i] * om[j] * om[k];
                }
            }
        }
        lhs += w * 0.5 * y * a;
        rhs += w * 0.5 * (b + y * (d.trace() / r + c));
    }
    Ok((lhs, rhs))
}

/// Least-squares sphere through a graph surface and the graph function over it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereFit {
    pub center: Vec<f64>,
    pub radius: f64,
    pub iterations: usize,
    /// `|x - p| - r` at the surface nodes.
    pub v: Vec<f64>,
    /// `|Dv|` on the fitted sphere at the nodes.
    pub dv: Vec<f64>,
    pub mean_curvature: f64,
    pub sup_h_ring: f64,
    pub sup_mean_deviation: f64,
    /// `sup(r^{-1}|v| + |Dv|)`.
    pub graph_norm: f64,
    /// `graph_norm / (r (sup|h°| + sup|H - H_bar|))`, when the denominator is positive.
    pub constant: Option<f64>,
    /// `(n-1)/(2 H_bar) < r < 2(n-1)/H_bar`.
    pub radius_in_range: bool,
}

/// Closeness to a round sphere required by [`fit_sphere`], relative to `H_bar`.
pub const FIT_DELTA: f64 = 0.1;

/// Gauss-Newton fit of `(p, r)` minimizing the weighted radial deviation.
pub fn fit_points(points: &[Vec<f64>], weights: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
    let k = points.len();
    let n = points.first().map_or(0, |p| p.len());
    if k < n + 1 || n == 0 {
        return Err(Error::InvalidParameter("not enough points to fit a sphere".into()));
    }
    let wsum: f64 = weights.iter().sum();
    let mut p: Vec<f64> = (0..n).map(|i| points.iter().zip(weights).map(|(x, w)| w * x[i]).sum::<f64>() / wsum).collect();
    let dist = |p: &[f64], x: &[f64]| x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let mut r = points.iter().zip(weights).map(|(x, w)| w * dist(&p, x)).sum::<f64>() / wsum;
    for it in 1..=100 {
        let mut jac = DMatrix::zeros(k, n + 1);
        let mut res = DVector::zeros(k);
        for (row, (x, w)) in points.iter().zip(weights).enumerate() {
            let d = dist(&p, x);
            let sw = w.sqrt();
            for i in 0..n {
                jac[(row, i)] = -sw * (x[i] - p[i]) / d;
            }
            jac[(row, n)] = -sw;
            res[row] = sw * (d - r);
        }
        let step = jac.svd(true, true).solve(&(-res), 1e-14).map_err(|e| Error::Degenerate(e.to_string()))?;
        for i in 0..n {
            p[i] += step[i];
        }
        r += step[n];
        if step.amax() <= 1e-15 * r.max(1.0) {
            return Ok((p, r, it));
        }
    }
    Err(Error::NotConverged("sphere fit did not converge".into()))
}

pub fn fit_sphere(surface: &GraphSurface) -> Result<SphereFit> {
    let n = surface.grid.n;
    let hbar = surface.mean_of_mean_curvature();
    let sup_h_ring = surface.sup_h_ring();
    let sup_dev = surface.nodes.iter().fold(0.0f64, |a, f| a.max((f.mean_curvature - hbar).abs()));
    if !(hbar > 0.0) || sup_h_ring + sup_dev > FIT_DELTA * hbar {
        return Err(Error::Precondition(format!(
            "surface not close to round: sup|h°| + sup|H - H_bar| = {:e}, H_bar = {hbar:e}",
            sup_h_ring + sup_dev
        )));
    }
    let points: Vec<Vec<f64>> = surface.nodes.iter().map(|f| f.x.clone()).collect();
    let weights: Vec<f64> = surface.grid.weights.iter().zip(&surface.nodes).map(|(w, f)| w * f.area_ratio).collect();
    let (center, radius, iterations) = fit_points(&points, &weights)?;
    let mut v = Vec::with_capacity(points.len());
    let mut dv = Vec::with_capacity(points.len());
    for (x, params) in points.iter().zip(&surface.grid.params) {
        let y: Vec<f64> = x.iter().zip(&center).map(|(a, b)| a - b).collect();
        let rho = y.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.push(rho - radius);
        // angle between the radial direction and the surface normal (the conormal is metric independent)
        let nu = surface.point(params)?.geom.nu_low;
        let nn = nu.iter().map(|t| t * t).sum::<f64>().sqrt();
        let cos = (nu.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / (nn * rho)).clamp(-1.0, 1.0);
        let tan = (1.0 - cos * cos).max(0.0).sqrt() / cos;
        dv.push(rho * tan / radius);
    }
    let graph_norm = v.iter().zip(&dv).fold(0.0f64, |a, (v, d)| a.max(v.abs() / radius + d));
    let denom = radius * (sup_h_ring + sup_dev);
    let d = n as f64 - 1.0;
    Ok(SphereFit {
        center,
        radius,
        iterations,
        v,
        dv,
        mean_curvature: hbar,
        sup_h_ring,
        sup_mean_deviation: sup_dev,
        graph_norm,
        constant: (denom > 0.0).then(|| graph_norm / denom),
        radius_in_range: radius > d / (2.0 * hbar) && radius < 2.0 * d / hbar,
    })
}

/// `a_l = int_Sigma x_l dA_delta / int_Sigma dA_delta`. On axisymmetric
/// grids the nodes lie in one meridian, so only the axis component is
/// computed and the others vanish by symmetry.
pub fn euclidean_centroid(surface: &GraphSurface) -> Result<Vec<f64>> {
    let n = surface.grid.n;
    let flat = MetricField::euclidean(n)?;
    let e = GraphSurface::build(surface.grid.clone(), surface.radius, surface.coeffs.clone(), &flat)?;
    let w: Vec<f64> = e.nodes.iter().map(|f| f.area_ratio).collect();
    let area = surface.grid.integrate(&w);
    let axis_only = surface.grid.mode == GridMode::Axisymmetric;
    Ok((0..n)
        .map(|l| {
            if axis_only && l + 1 < n {
                return 0.0;
            }
            let f: Vec<f64> = e.nodes.iter().map(|f| f.area_ratio * f.x[l]).collect();
            surface.grid.integrate(&f) / area
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComReport {
    pub radii: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    /// `|a(V) - C|` per leaf.
    pub errors: Vec<f64>,
    /// Log-log slope of `errors` against `R`; `None` if some error vanishes.
    pub fitted_rate: Option<f64>,
}

/// Centroids of the CMC leaves through `S_R(0)`, `R` in `radii`, compared
/// with `center`.
pub fn com_convergence(metric: &MetricField, grid: Arc<SphereGrid>, radii: &[f64], center: &[f64], opts: &ContinuationOptions) -> Result<ComReport> {
    if !metric.spec.is_asymptotically_even() {
        return Err(Error::Precondition("center-of-mass convergence needs an asymptotically even metric".into()));
    }
    let centroids: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|r| {
            let (sol, _) = solve_leaf(metric, grid.clone(), *r, opts)?;
            euclidean_centroid(&sol.surface)
        })
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = centroids.iter().map(|a| a.iter().zip(center).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()).collect();
    let fitted_rate = if radii.len() >= 2 && errors.iter().all(|e| *e > 0.0) { Some(loglog_slope(radii, &errors)?.slope) } else { None };
    Ok(ComReport { radii: radii.to_vec(), centroids, center: center.to_vec(), errors, fitted_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldSpec;

    fn translated(q: &[f64]) -> MetricField {
        MetricField::new(ManifoldSpec::schwarzschild(3, 2.0).with_translation(q)).unwrap()
    }

    #[test]
    fn centered_schwarzschild_has_zero_center() {
        let rep = adm_center(&MetricField::schwarzschild(3, 2.0).unwrap(), &[100.0, 316.0, 1000.0]).unwrap();
        assert!(rep.center.iter().all(|c| c.abs() < 1e-10), "{rep:?}");
        assert!(rep.warning.is_none());
    }

    #[test]
    fn translation_is_recovered() {
        let rep = adm_center(&translated(&[1.0, 0.0, 0.0]), &[100.0, 316.227766, 1000.0]).unwrap();
        assert!((rep.center[0] - 1.0).abs() < 1e-2 && rep.center[1].abs() < 1e-8, "{rep:?}");
    }

    #[test]
    fn boundary_integral_matches_prediction() {
        let m = translated(&[1.0, 0.0, 0.0]);
        let v = alternative_center_integral(&m, &[0.0; 3], 1000.0, 0).unwrap();
        let pi = std::f64::consts::PI;
        assert!((v + 16.0 * pi).abs() < 0.05 * 16.0 * pi, "{v}");
        let c = alternative_center_integral(&MetricField::schwarzschild(3, 2.0).unwrap(), &[0.0; 3], 100.0, 0).unwrap();
        assert!(c.abs() < 1e-10);
        assert!(alternative_center_integral(&m, &[60.0, 0.0, 0.0], 100.0, 0).is_err());
    }

    #[test]
    fn expansion_residual_decays() {
        let m = MetricField::schwarzschild(3, 2.0).unwrap();
        let radii = [100.0, 316.227766, 1000.0];
        let res: Vec<f64> = radii.iter().map(|r| mean_curvature_expansion(&m, &[0.0; 3], *r).unwrap().max_residual).collect();
        let slope = loglog_slope(&radii, &res).unwrap().slope;
        assert!((slope + 3.0).abs() < 0.3, "{slope} {res:?}");
        let e = mean_curvature_expansion(&MetricField::euclidean(3).unwrap(), &[1.0, 0.0, 0.0], 10.0).unwrap();
        assert!(e.max_exact < 1e-14 && e.max_expansion == 0.0);
    }

    #[test]
    fn divergence_identity_holds() {
        let m = translated(&[1.0, 0.5, 0.0]);
        let (a, b) = integral_identity(&m, &[2.0, 0.0, 1.0], 30.0, 0).unwrap();
        assert!((a - b).abs() < 1e-9 * (a.abs() + b.abs()), "{a} {b}");
    }

    #[test]
    fn sphere_fit_is_idempotent() {
        let q = SphereQuadrature::new(3, 8, 16);
        let pts: Vec<Vec<f64>> = q.points.iter().map(|w| vec![1.0 + 5.0 * w[0], -2.0 + 5.0 * w[1], 0.5 + 5.0 * w[2]]).collect();
        let (p, r, _) = fit_points(&pts, &q.weights).unwrap();
        assert!((r - 5.0).abs() < 1e-12 && (p[0] - 1.0).abs() < 1e-12 && (p[1] + 2.0).abs() < 1e-12);
        let again: Vec<Vec<f64>> = q.points.iter().map(|w| (0..3).map(|i| p[i] + r * w[i]).collect()).collect();
        let (p2, r2, _) = fit_points(&again, &q.weights).unwrap();
        assert!((r2 - r).abs() <= 1e-12 && p.iter().zip(&p2).all(|(a, b)| (a - b).abs() <= 1e-12));
    }

    #[test]
    fn schwarzschild_leaf_fits_centered_sphere() {
        let grid = Arc::new(SphereGrid::full(16, 32, 6).unwrap());
        let s = GraphSurface::build(grid.clone(), 50.0, vec![0.0; grid.dim()], &MetricField::schwarzschild(3, 2.0).unwrap()).unwrap();
        let f = fit_sphere(&s).unwrap();
        assert!(f.center.iter().all(|c| c.abs() < 1e-10));
        assert!(f.v.iter().all(|v| v.abs() <= 1e-8 * f.radius));
        assert!(f.radius_in_range);
    }

    #[test]
    fn boundary_residual_ladder() {
        let m = translated(&[1.0, 0.0, 0.0]);
        let rep = alternative_center_ladder(&m, &[0.0; 3], &[1.0, 0.0, 0.0], &[100.0, 316.227766, 1000.0], 0).unwrap();
        let slope = rep.residual_slope.unwrap();
        assert!((slope + 1.0).abs() < 0.3, "{rep:?}");
    }

    #[test]
    fn translated_leaves_have_translated_centroids() {
        let m = translated(&[1.0, 0.0, 0.0]);
        let grid = Arc::new(SphereGrid::full(24, 48, 10).unwrap());
        let rep = com_convergence(&m, grid, &[50.0, 100.0], &[1.0, 0.0, 0.0], &ContinuationOptions::default()).unwrap();
        assert!(rep.errors.iter().all(|e| *e < 1e-2), "{rep:?}");
    }

    #[test]
    fn axisymmetric_centroid_along_axis() {
        let m = translated(&[0.0, 0.0, 1.0]);
        let grid = Arc::new(SphereGrid::axisymmetric(3, 48, 16).unwrap());
        let rep = com_convergence(&m, grid, &[50.0, 100.0], &[0.0, 0.0, 1.0], &ContinuationOptions::default()).unwrap();
        assert!(rep.errors.iter().all(|e| *e < 1e-2), "{rep:?}");
        assert!(rep.centroids.iter().all(|c| c[0] == 0.0 && c[1] == 0.0));
    }
}
