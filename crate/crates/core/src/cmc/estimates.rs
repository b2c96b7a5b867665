//! Sweeps of CMC leaves over the radius and regressions of their decay
//! against the predicted rates.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SphereGrid;
use super::newton::{continuation_path, solve_from, CmcSolution, ContinuationOptions};
use crate::error::{Error, Result};
use crate::geometry::metric::MetricField;
use crate::geometry::schwarzschild::sphere_mean_curvature_nm;
use crate::numerics::fit::loglog_slope;

/// Diagnostics of one solved leaf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafSample {
    pub n: usize,
    pub radius: f64,
    pub target: f64,
    pub sup_u: f64,
    pub scaled_norm: f64,
    pub sup_h_ring: f64,
    /// Range of `|H| R` over the nodes.
    pub hr_min: f64,
    pub hr_max: f64,
    /// `sup |Rm| R^n`.
    pub rm_scaled: f64,
    pub area: f64,
    pub residual: f64,
    /// `sup_t ||du/dt||_inf` along the continuation, when one was run.
    pub max_du_dt: Option<f64>,
    pub newton_iterations: usize,
}

impl LeafSample {
    fn from_solution(sol: &CmcSolution, max_du_dt: Option<f64>, iterations: usize) -> Self {
        let s = &sol.surface;
        let r = s.radius;
        let hr: Vec<f64> = s.mean_curvatures().iter().map(|h| h.abs() * r).collect();
        LeafSample {
            n: s.grid.n,
            radius: r,
            target: sol.target,
            sup_u: s.sup_u(),
            scaled_norm: s.scaled_norm(),
            sup_h_ring: s.sup_h_ring(),
            hr_min: hr.iter().copied().fold(f64::INFINITY, f64::min),
            hr_max: hr.iter().copied().fold(0.0, f64::max),
            rm_scaled: s.nodes.iter().fold(0.0f64, |a, p| a.max(p.rm_norm)) * r.powi(s.grid.n as i32),
            area: s.area(),
            residual: s.residual(sol.target),
            max_du_dt,
            newton_iterations: iterations,
        }
    }

    /// `(n-1)/2 <= |H R| <= 2(n-1)` at every node.
    pub fn mean_curvature_bounds_hold(&self) -> bool {
        let d = self.n as f64 - 1.0;
        self.hr_min >= 0.5 * d && self.hr_max <= 2.0 * d
    }
}

/// Solves the leaf of mean curvature `H_{g_m}(S_R)`: directly when the
/// metric is Schwarzschild, by continuation from it otherwise.
pub fn solve_leaf(metric: &MetricField, grid: Arc<SphereGrid>, radius: f64, opts: &ContinuationOptions) -> Result<(CmcSolution, LeafSample)> {
    let target = sphere_mean_curvature_nm(metric.n(), metric.mass(), radius);
    if metric.is_pure_schwarzschild() {
        let sol = solve_from(grid.clone(), radius, vec![0.0; grid.dim()], metric, target, &opts.newton)?;
        let it = sol.report.iterations;
        let sample = LeafSample::from_solution(&sol, None, it);
        return Ok((sol, sample));
    }
    let (sol, rep) = continuation_path(metric, grid, radius, target, opts)?;
    let sample = LeafSample::from_solution(&sol, Some(rep.max_du_dt()), rep.newton_iterations);
    Ok((sol, sample))
}

/// Parallel map of [`solve_leaf`] over `radii`, in input order.
pub fn foliation_sweep(metric: &MetricField, grid: Arc<SphereGrid>, radii: &[f64], opts: &ContinuationOptions) -> Result<Vec<LeafSample>> {
    radii.par_iter().map(|r| solve_leaf(metric, grid.clone(), *r, opts).map(|(_, s)| s)).collect()
}

/// Fitted power law against its prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub slope: f64,
    pub expected: f64,
    /// `max y R^{-expected}` over the sweep.
    pub constant: f64,
}

impl PowerLaw {
    fn fit(r: &[f64], y: &[f64], expected: f64) -> Result<Self> {
        let slope = loglog_slope(r, y)?.slope;
        let constant = r.iter().zip(y).fold(0.0f64, |a, (r, y)| a.max(y.abs() * r.powf(-expected)));
        Ok(PowerLaw { slope, expected, constant })
    }

    pub fn within(&self, tol: f64) -> bool {
        (self.slope - self.expected).abs() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimateReport {
    pub radii: Vec<f64>,
    pub sup_h_ring: Vec<f64>,
    /// `None` when `h°` vanishes to rounding on some leaf.
    pub fit: Option<PowerLaw>,
    /// `max sup|h°| R^{n-1}`.
    pub umbilic_scaled: f64,
    pub mean_curvature_bounds_hold: bool,
}

fn check_sweep(samples: &[LeafSample]) -> Result<usize> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("a sweep needs at least two radii".into()));
    }
    let n = samples[0].n;
    if samples.iter().any(|s| s.n != n) {
        return Err(Error::InvalidParameter("mixed dimensions in sweep".into()));
    }
    Ok(n)
}

/// Decay of `sup |h°|` against `R^{1-n-gamma}`.
pub fn curvature_estimate_check(samples: &[LeafSample], gamma: f64) -> Result<CurvatureEstimateReport> {
    let n = check_sweep(samples)? as f64;
    let radii: Vec<f64> = samples.iter().map(|s| s.radius).collect();
    let hr: Vec<f64> = samples.iter().map(|s| s.sup_h_ring).collect();
    let fit = if hr.iter().all(|v| *v > 0.0) { PowerLaw::fit(&radii, &hr, 1.0 - n - gamma).ok() } else { None };
    let umbilic_scaled = radii.iter().zip(&hr).fold(0.0f64, |a, (r, h)| a.max(h * r.powf(n - 1.0)));
    Ok(CurvatureEstimateReport {
        radii,
        sup_h_ring: hr,
        fit,
        umbilic_scaled,
        mean_curvature_bounds_hold: samples.iter().all(LeafSample::mean_curvature_bounds_hold),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub radii: Vec<f64>,
    pub scaled_norm: Vec<f64>,
    /// `||u||_B` against `R^{-gamma}`; the constant is `C'`.
    pub norm: PowerLaw,
    /// `sup ||du/dt||` against `R^{1-gamma}`, when the sweep used continuation.
    pub path_derivative: Option<PowerLaw>,
}

pub fn scaling_check(samples: &[LeafSample], gamma: f64) -> Result<ScalingReport> {
    check_sweep(samples)?;
    let radii: Vec<f64> = samples.iter().map(|s| s.radius).collect();
    let norms: Vec<f64> = samples.iter().map(|s| s.scaled_norm).collect();
    let norm = PowerLaw::fit(&radii, &norms, -gamma)?;
    let du: Option<Vec<f64>> = samples.iter().map(|s| s.max_du_dt).collect();
    let path_derivative = match du {
        Some(du) if du.iter().all(|v| *v > 0.0) => Some(PowerLaw::fit(&radii, &du, 1.0 - gamma)?),
        _ => None,
    };
    Ok(ScalingReport { radii, scaled_norm: norms, norm, path_derivative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ManifoldSpec, Parity, PerturbationSpec};

    #[test]
    fn schwarzschild_leaves_are_umbilic() {
        let grid = Arc::new(SphereGrid::axisymmetric(3, 24, 8).unwrap());
        let metric = MetricField::schwarzschild(3, 2.0).unwrap();
        let s = foliation_sweep(&metric, grid, &[20.0, 40.0, 80.0], &ContinuationOptions::default()).unwrap();
        let rep = curvature_estimate_check(&s, 1.0).unwrap();
        assert!(rep.umbilic_scaled <= 1e-8, "{rep:?}");
        assert!(rep.mean_curvature_bounds_hold);
        assert!(s.iter().all(|l| l.rm_scaled < 10.0 && l.sup_u < 1e-10));
    }

    fn perturbed(parity: Parity) -> MetricField {
        let spec = ManifoldSpec::schwarzschild(3, 2.0).with_gamma(1.0).with_perturbation(PerturbationSpec::new(0.5, parity, 0));
        MetricField::new(spec).unwrap()
    }

    #[test]
    fn traceless_curvature_decay_for_even_perturbation() {
        // the odd conformal pattern only moves the leaf at l = 1, which keeps it umbilic to leading order
        let grid = Arc::new(SphereGrid::axisymmetric(3, 48, 16).unwrap());
        let s = foliation_sweep(&perturbed(Parity::Even), grid, &[50.0, 100.0, 200.0], &ContinuationOptions::default()).unwrap();
        let c = curvature_estimate_check(&s, 1.0).unwrap();
        assert!(c.fit.unwrap().within(0.3), "{c:?}");
        assert!(c.mean_curvature_bounds_hold);
    }

    #[test]
    fn graph_norm_decay_for_odd_perturbation() {
        let grid = Arc::new(SphereGrid::axisymmetric(3, 48, 16).unwrap());
        let s = foliation_sweep(&perturbed(Parity::Odd), grid, &[50.0, 100.0, 200.0], &ContinuationOptions::default()).unwrap();
        let sc = scaling_check(&s, 1.0).unwrap();
        assert!(sc.norm.within(0.3), "{sc:?}");
        assert!(sc.path_derivative.unwrap().within(0.3), "{sc:?}");
        assert!(s.iter().all(LeafSample::mean_curvature_bounds_hold));
    }

    #[test]
    fn short_sweeps_are_rejected() {
        assert!(curvature_estimate_check(&[], 1.0).is_err());
    }
}
