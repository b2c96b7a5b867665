//! Newton's method for `H(u) = H_target` on graph spheres and continuation
//! along the metric path `g_t = t g_m + (1 - t) g`.
//!
//! Unknowns are basis coefficients of `u`. The residual is the Galerkin
//! projection of `H(u) - H_target`; its Jacobian is exact, obtained by
//! differentiating the pointwise geometry with dual numbers with respect to
//! the jet `(u, Du, D^2 u)` at every node (position dependence of the metric
//! included). This is the linearized mean curvature operator, i.e. the
//! Jacobi operator composed with the normal speed of the graph variation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SphereGrid;
use super::surface::{check_compatible, graph_point, point_geometry, GraphJet, GraphSurface};
use crate::error::{Error, Result};
use crate::geometry::metric::MetricField;
use crate::numerics::dual::{Dual, DIRS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Convergence when `max |H - H_target| <= tolerance * |H_target|`.
    pub tolerance: f64,
    pub max_halvings: usize,
    /// Singular value ratio below which the linearization counts as singular.
    pub singular_ratio: f64,
    /// Solve singular steps by truncated pseudo-inverse instead of failing.
    pub allow_kernel: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iterations: 40, tolerance: 1e-10, max_halvings: 30, singular_ratio: 1e-12, allow_kernel: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Nodal `max |H - H_target|` before each step and at the end.
    pub residuals: Vec<f64>,
    /// Euclidean norm of the Galerkin residual, same indexing.
    pub galerkin: Vec<f64>,
    pub halvings: usize,
    /// Smallest singular value ratio seen.
    pub min_singular_ratio: f64,
    /// Number of directions dropped by the pseudo-inverse.
    pub kernel_dimension: usize,
    /// Rounding floor of the nodal residual, `64 eps |H_target|`.
    pub floor: f64,
}

impl NewtonReport {
    /// `max r_{k+1} / r_k^2` over the final three steps, skipping steps that
    /// land on the rounding floor (they carry no rate information).
    pub fn quadratic_constant(&self) -> Option<f64> {
        let r = &self.residuals;
        if r.len() < 3 {
            return None;
        }
        let start = r.len().saturating_sub(4);
        r[start..]
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > self.floor)
            .map(|w| w[1] / (w[0] * w[0]))
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))))
    }
}

#[derive(Clone, Debug)]
pub struct CmcSolution {
    pub surface: GraphSurface,
    pub target: f64,
    pub report: NewtonReport,
}

/// Galerkin residual, nodal residual and (optionally) the exact Jacobian.
pub struct Linearization {
    pub residual: DVector<f64>,
    pub nodal_max: f64,
    pub jacobian: Option<DMatrix<f64>>,
}

/// Evaluates `H` at all nodes with derivatives with respect to each basis
/// channel, returns the Galerkin residual and Jacobian.
pub fn linearize(grid: &SphereGrid, radius: f64, coeffs: &[f64], metric: &MetricField, target: f64, jacobian: bool) -> Result<Linearization> {
    let d = grid.param_dim();
    let bd = grid.basis_dim();
    let k = grid.dim();
    let per_node: Result<Vec<(f64, [f64; DIRS])>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let omega = grid.chart(&grid.params[i]);
            let ch = grid.node_channels(coeffs, i);
            let u = Dual::seed(ch[0], 0);
            let mut du = vec![Dual::cst_value(0.0); d];
            let mut ddu = vec![Dual::cst_value(0.0); d * d];
            for a in 0..bd {
                du[a] = Dual::seed(ch[1 + a], 1 + a);
            }
            let mut idx = 1 + bd;
            for a in 0..bd {
                for b in a..bd {
                    ddu[a * d + b] = Dual::seed(ch[idx], idx);
                    ddu[b * d + a] = Dual::seed(ch[idx], idx);
                    idx += 1;
                }
            }
            if !(radius + ch[0] > 0.0) {
                return Err(Error::Degenerate(format!("graph leaves the chart: 1 + u/R = {}", 1.0 + ch[0] / radius)));
            }
            let x = graph_point(radius, &omega, ch[0]);
            let sample = metric.sample(&x)?;
            let g = point_geometry(radius, &GraphJet { omega: &omega, u, du: &du, ddu: &ddu }, &sample)?;
            Ok((g.mean_curvature.v - target, g.mean_curvature.d))
        })
        .collect();
    let per_node = per_node?;
    let nodal_max = per_node.iter().fold(0.0f64, |a, (r, _)| a.max(r.abs()));
    let nodes = grid.len();
    let mut residual = DVector::zeros(k);
    for (i, (r, _)) in per_node.iter().enumerate() {
        let f = r * grid.weights[i];
        for j in 0..k {
            residual[j] += f * grid.basis_channels(i, j)[0];
        }
    }
    let jac = if jacobian {
        let nch = 1 + bd + bd * (bd + 1) / 2;
        let mut a = DMatrix::zeros(nodes, k);
        let mut dmat = DMatrix::zeros(nodes, k);
        for (i, (_, dh)) in per_node.iter().enumerate() {
            for j in 0..k {
                let b = grid.basis_channels(i, j);
                a[(i, j)] = grid.weights[i] * b[0];
                let mut s = 0.0;
                for c in 0..nch {
                    s += dh[c] * b[c];
                }
                dmat[(i, j)] = s;
            }
        }
        Some(a.transpose() * dmat)
    } else {
        None
    };
    Ok(Linearization { residual, nodal_max, jacobian: jac })
}

impl Dual {
    fn cst_value(v: f64) -> Dual {
        <Dual as crate::numerics::dual::Real>::cst(v)
    }
}

fn solve_step(j: DMatrix<f64>, rhs: &DVector<f64>, opts: &NewtonOptions, report: &mut NewtonReport) -> Result<DVector<f64>> {
    let svd = j.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    report.min_singular_ratio = if report.iterations == 0 { ratio } else { report.min_singular_ratio.min(ratio) };
    if ratio < opts.singular_ratio {
        if !opts.allow_kernel {
            return Err(Error::SingularJacobi(ratio));
        }
        report.kernel_dimension = svd.singular_values.iter().filter(|s| **s < opts.singular_ratio * smax).count();
    }
    let eps = if opts.allow_kernel { opts.singular_ratio * smax } else { 0.0 };
    svd.solve(rhs, eps).map_err(|e| Error::Degenerate(e.to_string()))
}

/// Damped Newton iteration from `initial`.
pub fn newton_solve_cmc(metric: &MetricField, target: f64, initial: &GraphSurface, opts: &NewtonOptions) -> Result<CmcSolution> {
    let grid = initial.grid.clone();
    check_compatible(&grid, metric)?;
    let radius = initial.radius;
    let mut c = initial.coeffs.clone();
    let mut report = NewtonReport { floor: 64.0 * f64::EPSILON * target.abs(), ..NewtonReport::default() };
    let tol = opts.tolerance * target.abs();
    let mut lin = linearize(&grid, radius, &c, metric, target, true)?;
    loop {
        report.residuals.push(lin.nodal_max);
        report.galerkin.push(lin.residual.norm());
        if lin.nodal_max <= tol {
            break;
        }
        if report.iterations >= opts.max_iterations {
            return Err(Error::Divergence { iterations: report.iterations, residual: lin.nodal_max });
        }
        let step = solve_step(lin.jacobian.take().expect("jacobian requested"), &(-&lin.residual), opts, &mut report)?;
        report.iterations += 1;
        let f0 = lin.residual.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(a, b)| a + lambda * b).collect();
            match linearize(&grid, radius, &trial, metric, target, true) {
                Ok(l) if l.residual.norm() < (1.0 - 1e-4 * lambda) * f0 || l.nodal_max <= tol => {
                    accepted = Some((trial, l));
                    break;
                }
                _ => {
                    lambda *= 0.5;
                    report.halvings += 1;
                }
            }
        }
        match accepted {
            Some((trial, l)) => {
                c = trial;
                lin = l;
            }
            None => {
                // the Galerkin residual is at its floor while the nodal one is not
                if f0 <= 1e-13 * target.abs() * grid.weights.iter().sum::<f64>().sqrt() {
                    return Err(Error::NotConverged(format!(
                        "nodal residual {:e} is limited by the basis truncation (lmax = {}); refine the grid",
                        lin.nodal_max, grid.lmax
                    )));
                }
                return Err(Error::Divergence { iterations: report.iterations, residual: lin.nodal_max });
            }
        }
    }
    let surface = GraphSurface::build(grid, radius, c, metric)?;
    Ok(CmcSolution { surface, target, report })
}

/// Convenience: solve from given initial coefficients.
pub fn solve_from(grid: Arc<SphereGrid>, radius: f64, coeffs: Vec<f64>, metric: &MetricField, target: f64, opts: &NewtonOptions) -> Result<CmcSolution> {
    let init = GraphSurface::build(grid, radius, coeffs, metric)?;
    newton_solve_cmc(metric, target, &init, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { initial_step: 0.25, min_step: 1.0 / 4096.0, newton: NewtonOptions::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    /// Accepted path parameters, starting at 1.
    pub t: Vec<f64>,
    /// `sup |u_t - u_{t'}| / |t - t'|` over each accepted step.
    pub du_dt: Vec<f64>,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
}

impl ContinuationReport {
    pub fn max_du_dt(&self) -> f64 {
        self.du_dt.iter().fold(0.0f64, |a, b| a.max(*b))
    }
}

/// Follows solutions of `H(u; g_t) = target` from `t = 1` (where `u = 0`
/// solves in Schwarzschild when `target` is the coordinate-sphere value) to
/// `t = 0`, halving the step on Newton failure.
pub fn continuation_path(metric: &MetricField, grid: Arc<SphereGrid>, radius: f64, target: f64, opts: &ContinuationOptions) -> Result<(CmcSolution, ContinuationReport)> {
    let mut report = ContinuationReport::default();
    let start = solve_from(grid.clone(), radius, vec![0.0; grid.dim()], &metric.on_path(1.0), target, &opts.newton)?;
    report.t.push(1.0);
    report.newton_iterations += start.report.iterations;
    let mut t = 1.0;
    let mut dt = opts.initial_step;
    let mut current = start;
    let mut previous: Option<(f64, Vec<f64>)> = None;
    while t > 0.0 {
        let next_t = (t - dt).max(0.0);
        // secant predictor
        let guess: Vec<f64> = match &previous {
            Some((tp, cp)) => {
                let f = (next_t - t) / (t - tp);
                current.surface.coeffs.iter().zip(cp).map(|(a, b)| a + f * (a - b)).collect()
            }
            None => current.surface.coeffs.clone(),
        };
        let path_metric = if next_t == 0.0 { metric.clone() } else { metric.on_path(next_t) };
        match solve_from(grid.clone(), radius, guess, &path_metric, target, &opts.newton) {
            Ok(sol) => {
                let nu_new = sol.surface.nodal_u();
                let nu_old = current.surface.nodal_u();
                let diff = nu_new.iter().zip(&nu_old).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                report.du_dt.push(diff / (t - next_t));
                report.t.push(next_t);
                report.newton_iterations += sol.report.iterations;
                previous = Some((t, current.surface.coeffs.clone()));
                current = sol;
                t = next_t;
                dt = (dt * 1.5).min(opts.initial_step);
            }
            Err(e) => {
                if matches!(e, Error::InvalidParameter(_) | Error::Unsupported(_)) {
                    return Err(e);
                }
                report.rejected_steps += 1;
                dt *= 0.5;
                if dt < opts.min_step {
                    return Err(Error::ContinuationStuck { last_good_t: t });
                }
            }
        }
    }
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::grid::GridMode;
    use crate::geometry::schwarzschild::{sphere_area_nm, sphere_mean_curvature_nm};
    use crate::geometry::{ManifoldSpec, Parity, PerturbationSpec};

    fn l2_seed(grid: &SphereGrid, amp: f64) -> Vec<f64> {
        // a degree-2 basis function, scaled to sup-norm `amp`
        let k = grid.degrees.iter().position(|l| *l == 2).unwrap();
        let mut c = vec![0.0; grid.dim()];
        c[k] = 1.0;
        let sup = grid.synthesize(&c).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        c[k] = amp / sup;
        c
    }

    #[test]
    fn schwarzschild_from_quadrupole_seed() {
        let grid = Arc::new(SphereGrid::full(24, 48, 10).unwrap());
        let metric = MetricField::schwarzschild(3, 2.0).unwrap();
        let r = 20.0;
        let target = sphere_mean_curvature_nm(3, 2.0, r);
        let sol = solve_from(grid.clone(), r, l2_seed(&grid, 0.05 * r), &metric, target, &NewtonOptions::default()).unwrap();
        assert!(sol.surface.sup_u() < 1e-8, "{}", sol.surface.sup_u());
        assert!((sol.surface.area() / sphere_area_nm(3, 2.0, r) - 1.0).abs() < 1e-8);
        let k = sol.report.quadratic_constant().unwrap();
        assert!(k.is_finite() && k < 1e3, "{:?}", sol.report.residuals);
    }

    #[test]
    fn euclidean_translation_seed() {
        let grid = Arc::new(SphereGrid::full(24, 48, 12).unwrap());
        let metric = MetricField::euclidean(3).unwrap();
        let r = 10.0;
        let mut c = vec![0.0; grid.dim()];
        c[2] = 0.3; // l = 1, m = 0
        let opts = NewtonOptions { allow_kernel: true, ..NewtonOptions::default() };
        let sol = solve_from(grid, r, c, &metric, 0.2, &opts).unwrap();
        assert!(sol.surface.residual(0.2) <= 1e-10 * 0.2);
        // a translated round sphere: trace-free part vanishes
        assert!(sol.surface.sup_h_ring() < 1e-9);
    }

    #[test]
    fn euclidean_kernel_is_reported() {
        let grid = Arc::new(SphereGrid::full(12, 24, 4).unwrap());
        let metric = MetricField::euclidean(3).unwrap();
        let c = vec![0.0; grid.dim()];
        let e = solve_from(grid.clone(), 10.0, c.clone(), &metric, 0.25, &NewtonOptions::default()).unwrap_err();
        assert!(matches!(e, Error::SingularJacobi(_)));
        let opts = NewtonOptions { allow_kernel: true, ..NewtonOptions::default() };
        let sol = solve_from(grid, 10.0, c, &metric, 0.25, &opts).unwrap();
        assert_eq!(sol.report.kernel_dimension, 3);
        let u = sol.surface.nodal_u();
        assert!(u.iter().all(|v| (v + 2.0).abs() < 1e-9));
    }

    #[test]
    fn continuation_in_schwarzschild_is_trivial() {
        let grid = Arc::new(SphereGrid::axisymmetric(3, 24, 8).unwrap());
        let metric = MetricField::schwarzschild(3, 2.0).unwrap();
        let target = sphere_mean_curvature_nm(3, 2.0, 30.0);
        let (sol, rep) = continuation_path(&metric, grid, 30.0, target, &ContinuationOptions::default()).unwrap();
        assert!(sol.surface.sup_u() < 1e-12);
        assert_eq!(*rep.t.last().unwrap(), 0.0);
        assert!(rep.max_du_dt() < 1e-10);
    }

    #[test]
    fn continuation_to_perturbed_metric() {
        let spec = ManifoldSpec::schwarzschild(3, 2.0)
            .with_gamma(1.0)
            .with_perturbation(PerturbationSpec::new(0.5, Parity::Odd, 0));
        let metric = MetricField::new(spec).unwrap();
        let grid = Arc::new(SphereGrid::standard(3, GridMode::Axisymmetric).unwrap());
        let r = 50.0;
        let target = sphere_mean_curvature_nm(3, 2.0, r);
        let (sol, rep) = continuation_path(&metric, grid, r, target, &ContinuationOptions::default()).unwrap();
        assert!(sol.surface.residual(target) <= 1e-10 * target);
        assert!(sol.surface.scaled_norm() > 0.0 && sol.surface.scaled_norm() < 0.5);
        assert!(rep.t.len() >= 5);
    }
}
