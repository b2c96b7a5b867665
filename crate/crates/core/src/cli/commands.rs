use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use isolab::acceptance::{self, DEFICIT_OFFSETS, ISO_RADII};
use isolab::bray::{deficit_sweep, solve_chart, u_increment_leading};
use isolab::cmc::estimates::{curvature_estimate_check, foliation_sweep, scaling_check, solve_leaf};
use isolab::cmc::grid::SphereGrid;
use isolab::cmc::newton::{continuation_path, solve_from, ContinuationOptions, NewtonOptions};
use isolab::cmc::spectrum::jacobi_spectrum;
use isolab::cmc::surface::GraphSurface;
use isolab::config::ExperimentConfig;
use isolab::geometry::curvature::{curvature_at, relative_difference, CurvatureMethod};
use isolab::geometry::metric::MetricField;
use isolab::geometry::schwarzschild::{horizon_radius_nm, sphere_area_nm, sphere_mean_curvature_nm};
use isolab::io::{Cell, OutputDir, Table};
use isolab::iso_mass::{iso_mass_exhaustion, modified_iso_mass, schwarzschild_profile};
use isolab::mass_center::{adm_center, com_convergence};
use isolab::quasilocal::{hawking_mass, hawking_profile, RotProfile};
use isolab::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub report: Value,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// `value <= tolerance`.
    fn at_most(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.0.push(Check { name: name.into(), passed: value <= tolerance, value, tolerance });
    }

    /// `value >= tolerance`.
    fn at_least(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.0.push(Check { name: name.into(), passed: value >= tolerance, value, tolerance });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.0.push(Check { name: name.into(), passed: ok, value: ok as u8 as f64, tolerance: 1.0 });
    }

    fn finish(self, command: &str, report: Value) -> Summary {
        Summary { command: command.into(), passed: self.0.iter().all(|c| c.passed), checks: self.0, report }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn metric(cfg: &ExperimentConfig) -> Result<MetricField> {
    MetricField::new(cfg.manifold.clone())
}

fn grid(cfg: &ExperimentConfig) -> Result<Arc<SphereGrid>> {
    Ok(Arc::new(cfg.grid.build(cfg.manifold.n)?))
}

fn newton(cfg: &ExperimentConfig) -> NewtonOptions {
    NewtonOptions {
        tolerance: cfg.newton_tolerance,
        max_iterations: cfg.newton_max_iterations,
        allow_kernel: cfg.manifold.mass == 0.0 && cfg.manifold.is_pure_schwarzschild(),
        ..NewtonOptions::default()
    }
}

fn continuation(cfg: &ExperimentConfig) -> ContinuationOptions {
    ContinuationOptions { newton: newton(cfg), ..ContinuationOptions::default() }
}

fn horizon_or_unit(cfg: &ExperimentConfig) -> f64 {
    horizon_radius_nm(cfg.manifold.n, cfg.manifold.mass).unwrap_or(1.0).max(1.0)
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    match cfg.command.as_str() {
        "report-geometry" => report_geometry(cfg, out),
        "hawking-profile" => hawking(cfg, out),
        "bray-chart" => bray_chart(cfg, out),
        "volume-comparison" => volume_comparison(cfg, out),
        "cmc-solve" => cmc_solve(cfg, out),
        "jacobi-spectrum" => spectrum(cfg, out),
        "foliation-sweep" => foliation(cfg, out),
        "center-of-mass" => center(cfg, out),
        "iso-mass" => iso(cfg, out),
        "acceptance" => acceptance_suite(out),
        other => Err(Error::InvalidParameter(format!("unknown command `{other}`"))),
    }
}

fn report_geometry(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let f = metric(cfg)?;
    let n = cfg.manifold.n;
    let m = cfg.manifold.mass;
    let radii = cfg.radii_or(&[2.0, 5.0, 10.0, 20.0, 50.0, 100.0]);
    let reference = if f.is_pure_schwarzschild() { CurvatureMethod::ClosedForm } else { CurvatureMethod::Exact };
    let mut t = Table::new(&["r", "area", "mean_curvature", "hawking_mass", "scalar_curvature", "riemann_max", "fd_relative_error"]);
    let mut worst = 0.0f64;
    for &r in &radii {
        let x = vec![r / (n as f64).sqrt(); n];
        let fd = curvature_at(&f, &x, CurvatureMethod::FiniteDifference)?;
        let rf = curvature_at(&f, &x, reference)?;
        let err = relative_difference(&fd.riemann, &rf.riemann);
        worst = worst.max(err);
        let area = sphere_area_nm(n, m, r);
        let h = sphere_mean_curvature_nm(n, m, r);
        let mass = if h > 0.0 { hawking_mass(n, area, h, false).ok() } else { None };
        t.push(vec![r.into(), area.into(), h.into(), mass.into(), rf.scalar.into(), rf.riemann.max_abs().into(), err.into()])?;
    }
    out.table("geometry", &t)?;
    let mut c = Checks::default();
    c.at_most("finite-difference curvature relative error", worst, 1e-6);
    Ok(c.finish("report-geometry", json!({ "radii": radii, "reference": format!("{reference:?}"), "max_relative_error": worst })))
}

fn hawking(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    if !cfg.manifold.is_pure_schwarzschild() {
        return Err(Error::Unsupported("hawking-profile needs a rotationally symmetric metric".into()));
    }
    let n = cfg.manifold.n;
    let m = cfg.manifold.mass;
    let rh = horizon_radius_nm(n, m).unwrap_or(0.0);
    let (a, b) = match (cfg.radii.first(), cfg.radii.last()) {
        (Some(a), Some(b)) if cfg.radii.len() >= 2 => (*a, *b),
        // rounding in the mass grows like r^{n-2}; stop where it is still ~1e-12
        _ => (2.0 * rh.max(1.0), 2.0 * rh.max(1.0) * 10f64.powf(3.0 / (n as f64 - 2.0))),
    };
    let mut p = if m > 0.0 { RotProfile::schwarzschild(n, m, a, b, 64)? } else { RotProfile::euclidean(n, a, b, 64)? };
    p.verify();
    let rep = hawking_profile(&p, None, false)?;
    let alpha = if m > 0.0 { isolab::bray::solve_matching(m, n, a.max(2.0 * rh))?.alpha } else { 1.0 };
    let mut cone = RotProfile::cone(n, alpha, a, b, 64)?;
    cone.verify();
    let cone_rep = hawking_profile(&cone, None, false)?;
    let mut t = Table::new(&["r", "schwarzschild_mass", "cone_mass"]);
    for i in 0..rep.r.len() {
        t.push(vec![rep.r[i].into(), rep.mass[i].into(), cone_rep.mass[i].into()])?;
    }
    out.table("hawking_profile", &t)?;
    let mut c = Checks::default();
    c.at_most("schwarzschild relative variation", rep.relative_variation, 1e-10);
    c.holds("cone profile monotone", cone_rep.mass.windows(2).all(|w| w[1] >= w[0]));
    Ok(c.finish("hawking-profile", json!({ "schwarzschild": to_value(&rep)?, "cone_alpha": alpha, "cone": to_value(&cone_rep)? })))
}

fn bray_chart(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let n = cfg.manifold.n;
    let m = cfg.manifold.mass;
    let taus = cfg.taus_or(&[1.5, 2.0]);
    let mut c = Checks::default();
    let mut charts = Vec::new();
    let mut t = Table::new(&["r", "alpha", "c", "one_minus_alpha", "c_power_excess", "v0"]);
    let mut inc = Table::new(&["r", "tau", "increment", "leading_term"]);
    for (i, &r) in cfg.radii_or(&[100.0]).iter().enumerate() {
        let sol = solve_chart(m, n, r, 10.0, 200, &taus)?;
        let mt = isolab::bray::solve_matching(m, n, r)?;
        t.push(vec![r.into(), sol.alpha.into(), sol.c.into(), mt.one_minus_alpha.into(), mt.c_power_excess.into(), sol.v0.into()])?;
        let mut increments = Vec::new();
        for &tau in &taus {
            let u = sol.u_at(tau * sol.c).ok_or_else(|| Error::Degenerate("chart node missing".into()))?;
            let lead = u_increment_leading(m, n, sol.c, tau);
            inc.push(vec![r.into(), tau.into(), (u - sol.alpha).into(), lead.into()])?;
            increments.push(json!({ "tau": tau, "increment": u - sol.alpha, "leading_term": lead }));
        }
        c.holds(format!("chart r={r} monotone"), sol.is_monotone());
        c.at_most(format!("chart r={r} sandwich violation"), sol.sandwich_violation(), 1e-12);
        out.write(&format!("chart_{i}.txt"), &sol.to_text())?;
        charts.push(json!({
            "m": m, "n": n, "r": r, "alpha": sol.alpha, "c": sol.c, "v0": sol.v0,
            "one_minus_alpha": mt.one_minus_alpha, "c_power_excess": mt.c_power_excess, "increments": increments,
        }));
    }
    out.table("bray_chart", &t)?;
    out.table("bray_increments", &inc)?;
    Ok(c.finish("bray-chart", json!({ "charts": charts })))
}

fn volume_comparison(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let n = cfg.manifold.n;
    let m = cfg.manifold.mass;
    let radii = cfg.radii_or(&[50.0, 100.0, 200.0]);
    let taus = cfg.taus_or(&[1.25, 1.5, 2.0]);
    let offsets = if cfg.offsets.is_empty() { DEFICIT_OFFSETS.to_vec() } else { cfg.offsets.clone() };
    let rows: Vec<_> = deficit_sweep(m, n, &radii, &taus, &offsets).into_iter().collect::<Result<_>>()?;
    let mut t = Table::new(&["r", "tau", "offset", "ball_radius", "eta", "volume", "area_boundary", "area_centered", "deficit", "ratio", "theta"]);
    for k in &rows {
        t.push(vec![
            k.r.into(),
            k.tau.into(),
            k.offset.into(),
            k.ball_radius.into(),
            k.eta.into(),
            k.volume.into(),
            k.area_boundary.into(),
            k.area_centered.into(),
            k.deficit.into(),
            k.ratio.into(),
            k.theta.into(),
        ])?;
    }
    out.table("volume_comparison", &t)?;
    let min_deficit = rows.iter().map(|k| k.deficit).fold(f64::INFINITY, f64::min);
    let min_ratio = rows.iter().filter_map(|k| k.ratio).fold(f64::INFINITY, f64::min);
    let mut c = Checks::default();
    c.at_least("minimal deficit", min_deficit, f64::MIN_POSITIVE);
    if min_ratio.is_finite() {
        c.at_least("minimal deficit ratio over off-center competitors", min_ratio, f64::MIN_POSITIVE);
    }
    Ok(c.finish("volume-comparison", json!({ "rows": to_value(&rows)?, "min_deficit": min_deficit, "min_ratio": min_ratio })))
}

fn seed(grid: &SphereGrid, degree: usize, amplitude: f64) -> Result<Vec<f64>> {
    let mut c = vec![0.0; grid.dim()];
    if amplitude == 0.0 {
        return Ok(c);
    }
    let k = grid
        .degrees
        .iter()
        .position(|l| *l == degree)
        .ok_or_else(|| Error::InvalidParameter(format!("grid has no degree-{degree} basis function")))?;
    c[k] = 1.0;
    let sup = grid.synthesize(&c).iter().fold(0.0f64, |a, b| a.max(b.abs()));
    c[k] = amplitude / sup;
    Ok(c)
}

fn cmc_solve(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let f = metric(cfg)?;
    let g = grid(cfg)?;
    let n = cfg.manifold.n;
    let r = cfg.radii_or(&[20.0 * horizon_or_unit(cfg)])[0];
    let target = cfg.cmc_target.unwrap_or_else(|| sphere_mean_curvature_nm(n, cfg.manifold.mass, r));
    let sol = if f.is_pure_schwarzschild() {
        let c0 = seed(&g, cfg.cmc_seed_degree, cfg.cmc_seed_amplitude * r)?;
        solve_from(g.clone(), r, c0, &f, target, &newton(cfg))?
    } else {
        continuation_path(&f, g.clone(), r, target, &continuation(cfg))?.0
    };
    let s = &sol.surface;
    let residual = s.residual(target);
    out.write("surface.txt", &s.to_text())?;
    let mut t = Table::new(&["k", "degree", "order", "coefficient"]);
    for (k, v) in s.coeffs.iter().enumerate() {
        t.push(vec![k.into(), g.degrees[k].into(), Cell::Int(g.orders[k]), (*v).into()])?;
    }
    out.table("cmc_coefficients", &t)?;
    let mut c = Checks::default();
    c.at_most("relative mean curvature residual", residual / target.abs(), cfg.newton_tolerance);
    Ok(c.finish(
        "cmc-solve",
        json!({
            "radius": r, "target": target, "residual": residual, "sup_u": s.sup_u(), "scaled_norm": s.scaled_norm(),
            "sup_h_ring": s.sup_h_ring(), "area": s.area(), "newton": to_value(&sol.report)?,
        }),
    ))
}

fn spectrum(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let f = metric(cfg)?;
    let g = grid(cfg)?;
    let radii = cfg.radii_or(&[100.0, 1000.0]);
    let mut t = Table::new(&["R", "mu0", "mu1", "lambda1", "lambda1_predicted", "lambda1_ratio", "mu0_predicted", "laplace_first", "asymmetry"]);
    let mut c = Checks::default();
    let mut reports = Vec::new();
    for &r in &radii {
        let s = if f.is_pure_schwarzschild() {
            GraphSurface::build(g.clone(), r, vec![0.0; g.dim()], &f)?
        } else {
            solve_leaf(&f, g.clone(), r, &continuation(cfg))?.0.surface
        };
        let rep = jacobi_spectrum(&s, cfg.spectrum_count)?;
        let ratio = if rep.lambda1_predicted > 0.0 { Some(rep.lambda1_ratio()) } else { None };
        t.push(vec![
            r.into(),
            rep.mu0.into(),
            rep.mu1.into(),
            rep.lambda1.into(),
            rep.lambda1_predicted.into(),
            ratio.into(),
            rep.mu0_predicted.into(),
            rep.laplace_first.into(),
            rep.asymmetry.into(),
        ])?;
        c.at_most(format!("R={r} stiffness asymmetry"), rep.asymmetry, 1e-10);
        c.at_least(format!("R={r} volume-preserving stability lambda1 R^2"), rep.lambda1 * r * r, -1e-8);
        reports.push(to_value(&rep)?);
    }
    out.table("jacobi_spectrum", &t)?;
    Ok(c.finish("jacobi-spectrum", json!({ "radii": radii, "spectra": reports })))
}

fn foliation(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let f = metric(cfg)?;
    let g = grid(cfg)?;
    let radii = cfg.radii_or(&[50.0, 100.0, 200.0]);
    let samples = foliation_sweep(&f, g, &radii, &continuation(cfg))?;
    let mut t = Table::new(&["R", "target", "sup_u", "scaled_norm", "sup_h_ring", "hr_min", "hr_max", "rm_scaled", "area", "residual", "max_du_dt"]);
    for s in &samples {
        t.push(vec![
            s.radius.into(),
            s.target.into(),
            s.sup_u.into(),
            s.scaled_norm.into(),
            s.sup_h_ring.into(),
            s.hr_min.into(),
            s.hr_max.into(),
            s.rm_scaled.into(),
            s.area.into(),
            s.residual.into(),
            s.max_du_dt.into(),
        ])?;
    }
    out.table("foliation", &t)?;
    let gamma = cfg.manifold.gamma;
    let curvature = if samples.len() >= 2 { Some(curvature_estimate_check(&samples, gamma)?) } else { None };
    let scaling = if samples.len() >= 2 && samples.iter().all(|s| s.scaled_norm > 0.0) { Some(scaling_check(&samples, gamma)?) } else { None };
    let mut c = Checks::default();
    c.holds("mean curvature bounds on every leaf", samples.iter().all(|s| s.mean_curvature_bounds_hold()));
    let worst = samples.iter().map(|s| s.residual / s.target.abs()).fold(0.0, f64::max);
    c.at_most("relative mean curvature residual", worst, cfg.newton_tolerance);
    Ok(c.finish("foliation-sweep", json!({ "leaves": to_value(&samples)?, "curvature": to_value(&curvature)?, "scaling": to_value(&scaling)? })))
}

fn center(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let f = metric(cfg)?;
    let radii = cfg.radii_or(&[100.0, 316.227766, 1000.0]);
    let adm = adm_center(&f, &radii)?;
    let mut t = Table::new(&["r", "component", "partial_center"]);
    for (r, p) in adm.radii.iter().zip(&adm.partial) {
        for (l, v) in p.iter().enumerate() {
            t.push(vec![(*r).into(), l.into(), (*v).into()])?;
        }
    }
    out.table("adm_center", &t)?;
    let mut c = Checks::default();
    let foliation = if cfg.manifold.is_asymptotically_even() {
        let com = com_convergence(&f, grid(cfg)?, &radii, &adm.center, &continuation(cfg))?;
        let mut ft = Table::new(&["R", "component", "centroid", "error"]);
        for ((r, p), e) in com.radii.iter().zip(&com.centroids).zip(&com.errors) {
            for (l, v) in p.iter().enumerate() {
                ft.push(vec![(*r).into(), l.into(), (*v).into(), (*e).into()])?;
            }
        }
        out.table("foliation_centroids", &ft)?;
        let scale = adm.center.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        c.at_most("foliation centroid vs ADM center", com.errors.last().copied().unwrap_or(f64::INFINITY) / scale, 1e-2);
        Some(com)
    } else {
        None
    };
    Ok(c.finish("center-of-mass", json!({ "adm": to_value(&adm)?, "foliation": to_value(&foliation)? })))
}

fn iso(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Summary> {
    let f = metric(cfg)?;
    let radii = cfg.radii_or(&ISO_RADII);
    let est = iso_mass_exhaustion(&f, &radii)?;
    let mut profile = est.profile_points();
    if f.is_pure_schwarzschild() {
        profile.extend(schwarzschild_profile(cfg.manifold.mass, 3, &est.volumes)?);
    }
    if !cfg.volumes.is_empty() && f.is_pure_schwarzschild() {
        profile.extend(schwarzschild_profile(cfg.manifold.mass, 3, &cfg.volumes)?);
    }
    let modified = modified_iso_mass(&profile)?;
    let mut t = Table::new(&["r", "volume", "area", "quasi_mass", "extrapolant"]);
    for i in 0..est.radii.len() {
        t.push(vec![est.radii[i].into(), est.volumes[i].into(), est.areas[i].into(), est.quasi_masses[i].into(), est.extrapolants.get(i).copied().into()])?;
    }
    out.table("iso_mass", &t)?;
    let mut c = Checks::default();
    c.holds("limit is finite", est.limit.is_finite());
    c.holds("modified mass dominates plain mass", modified.quasi_masses.iter().zip(&est.quasi_masses).all(|(a, b)| a >= b));
    Ok(c.finish("iso-mass", json!({ "plain": to_value(&est)?, "modified": to_value(&modified)? })))
}

fn acceptance_suite(out: &mut OutputDir) -> Result<Summary> {
    let results = acceptance::run_all();
    let mut t = Table::new(&["id", "name", "passed", "within_budget", "detail"]);
    let mut mt = Table::new(&["id", "metric", "value"]);
    let mut c = Checks::default();
    for r in &results {
        println!("{}", r.line());
        t.push(vec![r.id.into(), r.name.as_str().into(), r.passed.into(), r.within_budget.into(), r.detail.as_str().into()])?;
        for (k, v) in &r.metrics {
            mt.push(vec![r.id.into(), k.as_str().into(), (*v).into()])?;
        }
        c.holds(format!("criterion {} {}", r.id, r.name), r.ok());
    }
    out.table("acceptance", &t)?;
    out.table("acceptance_metrics", &mt)?;
    Ok(c.finish("acceptance", to_value(&results)?))
}
