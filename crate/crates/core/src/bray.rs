//! Volume-preserving charts for Schwarzschild and the effective volume
//! comparison on explicit off-center competitors.
//!
//! # Exterior chart
//!
//! The chart metric `u^{-2} ds^2 + u^{2/(n-1)} s^2 g_sphere` must be isometric
//! to `g_m` outside `S_r` through a rotationally invariant map `s -> rho(s)`.
//! Such a map preserves the area of spheres and radial arclength, so
//!
//! ```text
//! u(s) s^{n-1} = a(rho),        a(rho) = phi(rho)^{2(n-1)/(n-2)} rho^{n-1},
//! ds / u(s)    = phi(rho)^{2/(n-2)} d rho.
//! ```
//!
//! Eliminating `u` gives `d rho / ds = s^{n-1} / (a(rho) phi(rho)^{2/(n-2)})`
//! with `rho(c) = r`, and then `u_c(s) = a(rho(s)) / s^{n-1}`.
//!
//! With `b = m / (2 r^{n-2})`, the matching of area and mean curvature at
//! `s = c` has the closed form `alpha^n = ((1 - b) / (1 + b))^{n-1}` and
//! `c = alpha (n-1) / H`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::schwarzschild::{
    enclosed_volume, horizon_radius_nm, phi, shell_volume, sphere_area_nm, sphere_mean_curvature_nm,
};
use crate::numerics::fit::bisect;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quadrature::{gauss_legendre_on, polar_rule, unit_sphere_area};

fn nf(n: usize) -> f64 {
    n as f64
}

/// Solution of the two matching equations at `S_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub alpha: f64,
    pub c: f64,
    /// `1 - alpha`, computed without cancellation.
    pub one_minus_alpha: f64,
    /// `c^n / r^n - 1`, computed without cancellation.
    pub c_power_excess: f64,
}

/// Cone parameters `(alpha, c)` whose sphere `{c} x S^{n-1}` has the area and
/// mean curvature of `S_r` in `g_m`.
pub fn solve_matching(m: f64, n: usize, r: f64) -> Result<Matching> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} but n >= 3 is required")));
    }
    if !(m >= 0.0) || !(r > 0.0) {
        return Err(Error::InvalidParameter("need m >= 0 and r > 0".into()));
    }
    let b = m / (2.0 * r.powi(n as i32 - 2));
    if b >= 1.0 {
        return Err(Error::Refused(format!("r = {r} is not outside the horizon; mean curvature is not positive")));
    }
    let ln_alpha = (nf(n) - 1.0) / nf(n) * ((-b).ln_1p() - b.ln_1p());
    let alpha = ln_alpha.exp();
    let ln_c_over_r = ln_alpha + nf(n) / (nf(n) - 2.0) * b.ln_1p() - (-b).ln_1p();
    let h = sphere_mean_curvature_nm(n, m, r);
    Ok(Matching {
        alpha,
        c: alpha * (nf(n) - 1.0) / h,
        one_minus_alpha: -ln_alpha.exp_m1(),
        c_power_excess: (nf(n) * ln_c_over_r).exp_m1(),
    })
}

/// Leading term of `u_c(tau c) - alpha` for large `c`.
pub fn u_increment_leading(m: f64, n: usize, c: f64, tau: f64) -> f64 {
    let nn = nf(n);
    (nn - 1.0) * m / (2.0 * nn * c.powi(n as i32 - 2) * tau.powi(n as i32)) * (2.0 * tau.powi(n as i32) - nn * tau * tau + (nn - 2.0))
}

/// Bray chart data on `s >= c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSolution {
    pub m: f64,
    pub n: usize,
    pub r: f64,
    pub alpha: f64,
    pub c: f64,
    pub v0: f64,
    /// Nodes `s` in `[c, s_max]`.
    pub s: Vec<f64>,
    /// `u_c(s)` at the nodes.
    pub u: Vec<f64>,
    /// `u_c'(s)` at the nodes.
    pub du: Vec<f64>,
    /// Schwarzschild radius `rho(s)` matched to each node.
    pub rho: Vec<f64>,
    /// Interior conformal factor table; not constructed.
    pub interior: Vec<(f64, f64)>,
    /// Inner endpoint of the interior chart; not constructed.
    pub s0: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChartHeader {
    m: f64,
    n: usize,
    r: f64,
    alpha: f64,
    c: f64,
    v0: f64,
}

fn area_function(n: usize, m: f64, rho: f64) -> f64 {
    phi(n, m, rho).powf(2.0 * (nf(n) - 1.0) / (nf(n) - 2.0)) * rho.powi(n as i32 - 1)
}

fn area_function_derivative(n: usize, m: f64, rho: f64) -> f64 {
    sphere_area_nm(n, m, rho) / unit_sphere_area(n - 1) * sphere_mean_curvature_nm(n, m, rho) * phi(n, m, rho).powf(2.0 / (nf(n) - 2.0))
}

/// Integrates the isometry equation from `s = c` to `s_max` and tabulates
/// `u_c` on a geometric grid of `nodes` points merged with `extra` nodes.
pub fn exterior_chart_ode(m: f64, n: usize, r: f64, matching: &Matching, s_max: f64, nodes: usize, extra: &[f64]) -> Result<ChartSolution> {
    let c = matching.c;
    if !(s_max > c) || nodes < 2 {
        return Err(Error::InvalidParameter("need s_max > c and at least two nodes".into()));
    }
    let mut targets: Vec<f64> = (1..nodes).map(|i| c * (s_max / c).powf(i as f64 / (nodes - 1) as f64)).collect();
    targets.extend(extra.iter().copied().filter(|s| *s > c && *s <= s_max));
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let p = 2.0 / (nf(n) - 2.0);
    let rhs = |s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let rho = y[0];
        if !(rho > 0.0) {
            return Err(Error::Integration(format!("non-positive radius at s = {s}")));
        }
        Ok(vec![s.powi(n as i32 - 1) / (area_function(n, m, rho) * phi(n, m, rho).powf(p))])
    };
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14 * r, ..OdeOptions::default() };
    let pts = integrate(rhs, c, &[r], &targets, opts)?;
    let mut s = vec![c];
    let mut rho = vec![r];
    let mut ti = 0;
    for pt in pts.iter().skip(1) {
        if ti < targets.len() && pt.t == targets[ti] {
            s.push(pt.t);
            rho.push(pt.y[0]);
            ti += 1;
        }
    }
    if rho.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Integration("matched radius is not increasing".into()));
    }
    let mut u = Vec::with_capacity(s.len());
    let mut du = Vec::with_capacity(s.len());
    for (sv, rv) in s.iter().zip(&rho) {
        let a = area_function(n, m, *rv);
        let drho = sv.powi(n as i32 - 1) / (a * phi(n, m, *rv).powf(p));
        u.push(a / sv.powi(n as i32 - 1));
        du.push(area_function_derivative(n, m, *rv) * drho / sv.powi(n as i32 - 1) - (nf(n) - 1.0) * a / sv.powi(n as i32));
    }
    // exact value at the matching sphere
    u[0] = matching.alpha;
    let v0 = volume_gap(m, n, r, matching)?;
    Ok(ChartSolution { m, n, r, alpha: matching.alpha, c, v0, s, u, du, rho, interior: Vec::new(), s0: None })
}

/// Schwarzschild volume between the horizon and `S_r` minus the cone volume
/// `omega c^n / n`.
pub fn volume_gap(m: f64, n: usize, r: f64, matching: &Matching) -> Result<f64> {
    let rh = horizon_radius_nm(n, m)?;
    let v = shell_volume(n, m, rh, r) - unit_sphere_area(n - 1) * matching.c.powi(n as i32) / nf(n);
    if !(v > 0.0) {
        return Err(Error::Integration(format!("volume gap {v} is not positive; chart data inconsistent")));
    }
    Ok(v)
}

/// Leading-order prediction of the volume gap.
pub fn volume_gap_leading(m: f64, n: usize, r: f64) -> f64 {
    unit_sphere_area(n - 1) * r.powi(n as i32) / nf(n) * (nf(n) - 2.0) / 2.0 * m / r.powi(n as i32 - 2)
}

/// Solves the matching and the exterior chart for one `(m, n, r)`.
pub fn solve_chart(m: f64, n: usize, r: f64, s_max_factor: f64, nodes: usize, extra_tau: &[f64]) -> Result<ChartSolution> {
    let mt = solve_matching(m, n, r)?;
    let extra: Vec<f64> = extra_tau.iter().map(|t| t * mt.c).collect();
    exterior_chart_ode(m, n, r, &mt, s_max_factor * mt.c, nodes, &extra)
}

/// Parallel map of [`solve_chart`] over parameter tuples.
pub fn chart_sweep(params: &[(f64, usize, f64)], s_max_factor: f64, nodes: usize, extra_tau: &[f64]) -> Vec<Result<ChartSolution>> {
    params.par_iter().map(|&(m, n, r)| solve_chart(m, n, r, s_max_factor, nodes, extra_tau)).collect()
}

impl ChartSolution {
    /// `u_c` at a stored node.
    pub fn u_at(&self, s: f64) -> Option<f64> {
        self.s.iter().position(|v| (v - s).abs() <= 1e-12 * s).map(|i| self.u[i])
    }

    pub fn is_monotone(&self) -> bool {
        self.u.windows(2).all(|w| w[1] >= w[0] - 1e-14)
    }

    /// Largest violation of `alpha^2 g_c <= ds^2 + s^2 g_sphere <= u^{-2/(n-1)} g_c`
    /// over the nodes, as the most negative eigenvalue of the two differences
    /// (clipped at 0).
    pub fn sandwich_violation(&self) -> f64 {
        let q = 2.0 / (nf(self.n) - 1.0);
        let mut worst = 0.0f64;
        for &u in &self.u {
            // both forms are diagonal in (ds, s dtheta)
            let gc = [u.powi(-2), u.powf(q)];
            for g in gc {
                worst = worst.min(1.0 - self.alpha * self.alpha * g);
                worst = worst.min(u.powf(-q) * g - 1.0);
            }
        }
        -worst
    }

    /// JSON header line followed by `s u` columns.
    pub fn to_text(&self) -> String {
        let header = ChartHeader { m: self.m, n: self.n, r: self.r, alpha: self.alpha, c: self.c, v0: self.v0 };
        let mut out = format!("# {}\n", serde_json::to_string(&header).expect("header serializes"));
        for (s, u) in self.s.iter().zip(&self.u) {
            out.push_str(&format!("{:.16e} {:.16e}\n", s, u));
        }
        out
    }

    /// Header and `(s, u)` table from [`ChartSolution::to_text`].
    pub fn parse_text(text: &str) -> Result<(f64, usize, f64, f64, f64, f64, Vec<(f64, f64)>)> {
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| Error::Parse("empty chart table".into()))?;
        let json = first.strip_prefix('#').ok_or_else(|| Error::Parse("missing JSON header".into()))?;
        let h: ChartHeader = serde_json::from_str(json.trim()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut rows = Vec::new();
        for l in lines.filter(|l| !l.trim().is_empty()) {
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            if v.len() != 2 {
                return Err(Error::Parse("expected two columns".into()));
            }
            rows.push((v[0], v[1]));
        }
        Ok((h.m, h.n, h.r, h.alpha, h.c, h.v0, rows))
    }
}

/// Off-center competitor `Omega = B_{r'}(p) ∪ B_{r_h}` against the centered
/// ball `B_r` of equal volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffCenterCheck {
    pub m: f64,
    pub n: usize,
    pub tau: f64,
    pub eta: f64,
    pub r: f64,
    pub offset: f64,
    pub ball_radius: f64,
    /// Whether `B_{r'}(p)` contains the horizon ball (otherwise disjoint).
    pub contains_horizon: bool,
    pub volume: f64,
    pub area_boundary: f64,
    pub area_centered: f64,
    pub deficit: f64,
    /// `deficit / (eta m (1 - 1/tau)^2 r)`, `None` when `eta = 0`.
    pub ratio: Option<f64>,
    /// `max(A^{1/(n-1)} V^{-1/n}, sup_sigma A(∂Ω ∩ B_sigma) / sigma^{n-1})`.
    pub theta: f64,
}

/// Quadrature resolution for the competitor integrals.
const POLAR: usize = 96;
const RADIAL: usize = 64;

struct Ball {
    n: usize,
    m: f64,
    d: f64,
    rp: f64,
    rh: f64,
}

impl Ball {
    fn contains_horizon(&self) -> bool {
        self.d + self.rh < self.rp
    }

    fn disjoint(&self) -> bool {
        self.d - self.rp > self.rh
    }

    fn weight(&self) -> f64 {
        unit_sphere_area(self.n - 2)
    }

    /// `|p + sigma w|` with `w` at angle `beta` from `p`.
    fn dist(&self, sigma: f64, cb: f64) -> f64 {
        (self.d * self.d + sigma * sigma + 2.0 * self.d * sigma * cb).max(0.0).sqrt()
    }

    /// Volume of `B_{r'}(p) \ B_{r_h}`.
    fn volume(&self) -> f64 {
        let n = self.n;
        let vp = 2.0 * nf(n) / (nf(n) - 2.0);
        if self.disjoint() {
            let (bt, bw) = polar_rule(POLAR, n - 2);
            let (st, sw) = gauss_legendre_on(RADIAL, 0.0, self.rp);
            let mut v = 0.0;
            for (s, ws) in st.iter().zip(&sw) {
                for (b, wb) in bt.iter().zip(&bw) {
                    v += ws * wb * phi(n, self.m, self.dist(*s, b.cos())).powf(vp) * s.powi(n as i32 - 1);
                }
            }
            v * self.weight()
        } else {
            let (tt, tw) = polar_rule(POLAR, n - 2);
            let mut v = 0.0;
            for (t, wt) in tt.iter().zip(&tw) {
                let (ct, st) = (t.cos(), t.sin());
                let rmax = self.d * ct + (self.rp * self.rp - self.d * self.d * st * st).sqrt();
                v += wt * shell_volume(n, self.m, self.rh, rmax) / unit_sphere_area(n - 1);
            }
            v * self.weight()
        }
    }

    /// Area of the part of `S_{r'}(p)` with `cos(beta) >= cut` (cut in [-1, 1]).
    fn sphere_area_above(&self, cut: f64) -> f64 {
        let n = self.n;
        let ap = 2.0 * (nf(n) - 1.0) / (nf(n) - 2.0);
        if cut >= 1.0 {
            return 0.0;
        }
        let bmax = cut.max(-1.0).acos();
        let (bt, bw) = gauss_legendre_on(POLAR, 0.0, bmax);
        let mut a = 0.0;
        for (b, wb) in bt.iter().zip(&bw) {
            a += wb * b.sin().powi(n as i32 - 2) * phi(n, self.m, self.dist(self.rp, b.cos())).powf(ap);
        }
        a * self.rp.powi(n as i32 - 1) * self.weight()
    }

    fn sphere_area(&self) -> f64 {
        let n = self.n;
        let ap = 2.0 * (nf(n) - 1.0) / (nf(n) - 2.0);
        let (bt, bw) = polar_rule(POLAR, n - 2);
        let a: f64 = bt.iter().zip(&bw).map(|(b, w)| w * phi(n, self.m, self.dist(self.rp, b.cos())).powf(ap)).sum();
        a * self.rp.powi(n as i32 - 1) * self.weight()
    }

    /// `cos(beta)` on `S_{r'}(p)` where `|x| = rad`.
    fn cut_for_radius(&self, rad: f64) -> f64 {
        (rad * rad - self.d * self.d - self.rp * self.rp) / (2.0 * self.d * self.rp)
    }
}

/// Measures the competitor with center offset `offset` (along `e_n`) whose
/// volume outside the horizon matches `B_r \ B_{r_h}`.
pub fn effective_deficit(m: f64, n: usize, r: f64, offset: f64, tau: f64) -> Result<OffCenterCheck> {
    let rh = horizon_radius_nm(n, m)?;
    if !(r > rh) || !(tau > 1.0) || !(offset >= 0.0) {
        return Err(Error::InvalidParameter("need r > r_h, tau > 1, offset >= 0".into()));
    }
    let target = enclosed_volume(n, m, r);
    let vol = |rp: f64| Ball { n, m, d: offset, rp, rh }.volume();
    // disjoint family first: r' < offset - r_h
    let sup_disjoint = offset - rh;
    let rp = if sup_disjoint > 0.0 && vol(sup_disjoint * (1.0 - 1e-9)) >= target {
        bisect(|x| vol(x) - target, 1e-9 * r, sup_disjoint * (1.0 - 1e-9), 1e-14)?
    } else {
        let lo = (offset + rh) * (1.0 + 1e-9) + 1e-12;
        if vol(lo) > target {
            return Err(Error::Unsupported(format!(
                "no volume-matched ball at offset {offset}: the sphere would intersect the horizon"
            )));
        }
        let mut hi = lo.max(r) * 2.0;
        while vol(hi) < target {
            hi *= 2.0;
        }
        bisect(|x| vol(x) - target, lo, hi, 1e-14)?
    };
    let ball = Ball { n, m, d: offset, rp, rh };
    if !(ball.disjoint() || ball.contains_horizon()) {
        return Err(Error::Unsupported("competitor sphere intersects the horizon".into()));
    }
    let sphere = ball.sphere_area();
    let horizon = if ball.contains_horizon() { 0.0 } else { sphere_area_nm(n, m, rh) };
    let area_boundary = sphere + horizon;
    let area_centered = sphere_area_nm(n, m, r);
    let outside = if offset == 0.0 {
        if rp > tau * r {
            sphere
        } else {
            0.0
        }
    } else {
        ball.sphere_area_above(ball.cut_for_radius(tau * r))
    };
    let eta = outside / area_centered;
    let deficit = area_boundary - area_centered;
    let denom = eta * m * (1.0 - 1.0 / tau).powi(2) * r;
    let ratio = if eta > 0.0 { Some(deficit / denom) } else { None };
    // isoperimetric ratio and area growth
    let volume = ball.volume();
    let iso = area_boundary.powf(1.0 / (nf(n) - 1.0)) * volume.powf(-1.0 / nf(n));
    let mut growth = 0.0f64;
    let top = offset + rp;
    for k in 0..48 {
        let sigma = top.max(1.0).powf(k as f64 / 47.0);
        let inside_sphere = if offset == 0.0 {
            if rp <= sigma {
                sphere
            } else {
                0.0
            }
        } else {
            sphere - ball.sphere_area_above(ball.cut_for_radius(sigma))
        };
        let inside = inside_sphere + if horizon > 0.0 && rh <= sigma { horizon } else { 0.0 };
        growth = growth.max(inside / sigma.powi(n as i32 - 1));
    }
    Ok(OffCenterCheck {
        m,
        n,
        tau,
        eta,
        r,
        offset,
        ball_radius: rp,
        contains_horizon: ball.contains_horizon(),
        volume,
        area_boundary,
        area_centered,
        deficit,
        ratio,
        theta: iso.max(growth),
    })
}

/// One row of the acceptance sweep: offset expressed as a multiple of `r`.
pub fn deficit_sweep(m: f64, n: usize, radii: &[f64], taus: &[f64], offsets: &[f64]) -> Vec<Result<OffCenterCheck>> {
    let mut jobs = Vec::new();
    for &r in radii {
        for &t in taus {
            for &o in offsets {
                jobs.push((r, t, o));
            }
        }
    }
    jobs.par_iter().map(|&(r, t, o)| effective_deficit(m, n, r, o * r, t)).collect()
}
