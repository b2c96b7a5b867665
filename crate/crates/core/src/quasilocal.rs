//! Generalized Hawking mass of coordinate spheres in rotationally symmetric
//! metrics, and its monotonicity along radial profiles.
//!
//! For a sphere of area `A` and mean curvature `H` in dimension `n`,
//!
//! ```text
//! m_raw = (A/w)^{(n-2)/(n-1)} (1 - A^{2/(n-1)} H^2 / (w^{2/(n-1)} (n-1)^2)),   w = |S^{n-1}|
//! ```
//!
//! evaluates to `2m` on every centered sphere of Schwarzschild with mass `m`.
//! The normalized mass is `m_raw / 2`, which reports `m` and agrees with the
//! classical Hawking mass when `n = 3`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::schwarzschild::{sphere_area_nm, sphere_mean_curvature_nm};
use crate::numerics::quadrature::unit_sphere_area;

/// Normalization applied to the raw expression.
pub const KAPPA: f64 = 0.5;

pub fn hawking_mass_raw(n: usize, area: f64, h: f64) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::InvalidParameter(format!("area must be positive (got {area})")));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} but n >= 3 is required")));
    }
    let nf = n as f64;
    let w = unit_sphere_area(n - 1);
    let ratio = area / w;
    Ok(ratio.powf((nf - 2.0) / (nf - 1.0)) * (1.0 - ratio.powf(2.0 / (nf - 1.0)) * h * h / ((nf - 1.0) * (nf - 1.0))))
}

/// Normalized Hawking mass, `KAPPA * m_raw`. With `raw = true` the
/// unnormalized expression is returned instead.
pub fn hawking_mass(n: usize, area: f64, h: f64, raw: bool) -> Result<f64> {
    let v = hawking_mass_raw(n, area, h)?;
    Ok(if raw { v } else { KAPPA * v })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Schwarzschild { mass: f64 },
    /// `alpha^{-2} ds^2 + alpha^{2/(n-1)} s^2 g_sphere`
    Cone { alpha: f64 },
    Euclidean,
    Table,
}

/// Result of the sampling checks required before monotonicity applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFlags {
    pub area_nondecreasing: bool,
    pub scalar_nonnegative: bool,
}

/// Sphere area, mean curvature, and ambient scalar curvature sampled along
/// the radial parameter of a rotationally symmetric metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotProfile {
    pub n: usize,
    pub provenance: Provenance,
    pub r: Vec<f64>,
    pub area: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    pub scalar: Vec<f64>,
    pub flags: Option<ProfileFlags>,
}

fn geometric_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a * (b / a).powf(i as f64 / (k - 1) as f64)).collect()
}

impl RotProfile {
    fn analytic(n: usize, provenance: Provenance, a: f64, b: f64, k: usize, f: impl Fn(f64) -> (f64, f64, f64)) -> Result<Self> {
        if !(a > 0.0 && b > a) || k < 5 {
            return Err(Error::InvalidParameter("profile needs 0 < a < b and at least 5 samples".into()));
        }
        let r = geometric_grid(a, b, k);
        let mut area = Vec::with_capacity(k);
        let mut hh = Vec::with_capacity(k);
        let mut sc = Vec::with_capacity(k);
        for &x in &r {
            let (aa, h, s) = f(x);
            area.push(aa);
            hh.push(h);
            sc.push(s);
        }
        Ok(RotProfile { n, provenance, r, area, mean_curvature: hh, scalar: sc, flags: None })
    }

    /// Centered spheres `S_r`, `r` in `[a, b]`, of Schwarzschild.
    pub fn schwarzschild(n: usize, m: f64, a: f64, b: f64, k: usize) -> Result<Self> {
        Self::analytic(n, Provenance::Schwarzschild { mass: m }, a, b, k, |r| {
            (sphere_area_nm(n, m, r), sphere_mean_curvature_nm(n, m, r), 0.0)
        })
    }

    pub fn euclidean(n: usize, a: f64, b: f64, k: usize) -> Result<Self> {
        Self::analytic(n, Provenance::Euclidean, a, b, k, |r| {
            (unit_sphere_area(n - 1) * r.powi(n as i32 - 1), (n as f64 - 1.0) / r, 0.0)
        })
    }

    /// The metric cone with parameter `alpha`.
    pub fn cone(n: usize, alpha: f64, a: f64, b: f64, k: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("cone parameter must be positive".into()));
        }
        let nf = n as f64;
        Self::analytic(n, Provenance::Cone { alpha }, a, b, k, |s| {
            (
                alpha * s.powi(n as i32 - 1) * unit_sphere_area(n - 1),
                alpha * (nf - 1.0) / s,
                (nf - 1.0) * (nf - 2.0) / (s * s) * (alpha.powf(-2.0 / (nf - 1.0)) - alpha * alpha),
            )
        })
    }

    pub fn from_table(n: usize, r: Vec<f64>, area: Vec<f64>, mean_curvature: Vec<f64>, scalar: Vec<f64>) -> Result<Self> {
        let k = r.len();
        if area.len() != k || mean_curvature.len() != k || scalar.len() != k || k < 5 {
            return Err(Error::InvalidParameter("profile columns must have equal length >= 5".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("profile radii must increase strictly".into()));
        }
        if area.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidParameter("profile areas must be positive".into()));
        }
        Ok(RotProfile { n, provenance: Provenance::Table, r, area, mean_curvature, scalar, flags: None })
    }

    /// Samples the monotonicity hypotheses and records them.
    pub fn verify(&mut self) -> ProfileFlags {
        let amax = self.area.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let smax = self.scalar.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let area_ok = self.area.windows(2).all(|w| w[1] >= w[0] - 1e-14 * amax);
        let area_ok = area_ok && self.area_derivative().iter().all(|d| *d >= -1e-10 * amax);
        let scalar_ok = self.scalar.iter().all(|s| *s >= -1e-12 * smax.max(f64::MIN_POSITIVE));
        let flags = ProfileFlags { area_nondecreasing: area_ok, scalar_nonnegative: scalar_ok };
        self.flags = Some(flags);
        flags
    }

    /// `dA/dr` on the grid by five-point finite differences.
    pub fn area_derivative(&self) -> Vec<f64> {
        five_point_derivative(&self.r, &self.area)
    }

    pub fn mean_curvature_derivative(&self) -> Vec<f64> {
        five_point_derivative(&self.r, &self.mean_curvature)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n = {}", self.n);
        let _ = writeln!(s, "# r A H R");
        for i in 0..self.r.len() {
            let _ = writeln!(s, "{:.16e} {:.16e} {:.16e} {:.16e}", self.r[i], self.area[i], self.mean_curvature[i], self.scalar[i]);
        }
        s
    }

    pub fn from_table_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut cols = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("n =") {
                    n = Some(v.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad dimension: {e}")))?);
                }
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad number `{t}`: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns, found {}", vals.len())));
            }
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing `# n = ...` header".into()))?;
        let [r, a, h, s] = cols;
        Self::from_table(n, r, a, h, s)
    }
}

/// Derivative on a non-uniform grid from the degree-4 Lagrange interpolant
/// through five neighbouring nodes (one-sided near the ends).
pub fn five_point_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let k = x.len();
    assert!(k >= 5 && y.len() == k);
    (0..k)
        .map(|i| {
            let start = i.saturating_sub(2).min(k - 5);
            let idx: Vec<usize> = (start..start + 5).collect();
            let xi = x[i];
            let mut d = 0.0;
            for &j in &idx {
                // derivative of the j-th Lagrange basis polynomial at xi
                let mut denom = 1.0;
                for &l in &idx {
                    if l != j {
                        denom *= x[j] - x[l];
                    }
                }
                let mut num = 0.0;
                for &skip in &idx {
                    if skip == j {
                        continue;
                    }
                    let mut p = 1.0;
                    for &l in &idx {
                        if l != j && l != skip {
                            p *= xi - x[l];
                        }
                    }
                    num += p;
                }
                d += y[j] * num / denom;
            }
            d
        })
        .collect()
}

/// Masses along a verified profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HawkingProfileReport {
    pub r: Vec<f64>,
    pub mass: Vec<f64>,
    /// Largest `m(r_i) - m(r_{i+1})` over consecutive samples, clipped at 0.
    pub max_violation: f64,
    /// Relative spread `(max - min) / max |m|`.
    pub relative_variation: f64,
    pub monotone: bool,
}

/// Hawking masses at every sample of a profile whose hypotheses have been
/// verified. `indices`, if given, selects samples from the stored grid.
pub fn hawking_profile(profile: &RotProfile, indices: Option<&[usize]>, raw: bool) -> Result<HawkingProfileReport> {
    let flags = profile.flags.ok_or_else(|| Error::Refused("profile hypotheses have not been verified".into()))?;
    if !(flags.area_nondecreasing && flags.scalar_nonnegative) {
        return Err(Error::Refused(format!(
            "profile fails the monotonicity hypotheses (area non-decreasing: {}, scalar >= 0: {})",
            flags.area_nondecreasing, flags.scalar_nonnegative
        )));
    }
    let all: Vec<usize> = (0..profile.r.len()).collect();
    let idx = indices.unwrap_or(&all);
    let mut r = Vec::with_capacity(idx.len());
    let mut mass = Vec::with_capacity(idx.len());
    for &i in idx {
        if i >= profile.r.len() {
            return Err(Error::InvalidParameter(format!("sample index {i} out of range")));
        }
        r.push(profile.r[i]);
        mass.push(hawking_mass(profile.n, profile.area[i], profile.mean_curvature[i], raw)?);
    }
    let scale = mass.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let max_violation = mass.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max);
    let (lo, hi) = mass.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let relative_variation = if scale > 0.0 { (hi - lo) / scale } else { hi - lo };
    Ok(HawkingProfileReport { r, mass, max_violation, relative_variation, monotone: max_violation <= 1e-10 * scale.max(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_sphere_has_zero_mass() {
        for n in 3..=6 {
            let r: f64 = 3.7;
            let a = unit_sphere_area(n - 1) * r.powi(n as i32 - 1);
            assert!(hawking_mass(n, a, (n as f64 - 1.0) / r, false).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn schwarzschild_examples() {
        let a = sphere_area_nm(3, 2.0, 2.0);
        let h = sphere_mean_curvature_nm(3, 2.0, 2.0);
        assert!((hawking_mass(3, a, h, false).unwrap() - 2.0).abs() < 1e-13);
        assert!((hawking_mass(3, a, h, true).unwrap() - 4.0).abs() < 1e-13);
        assert!((hawking_mass(3, 64.0 * PI, 0.0, false).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn refuses_unverified_profiles() {
        let p = RotProfile::schwarzschild(3, 2.0, 1.0, 10.0, 20).unwrap();
        assert!(matches!(hawking_profile(&p, None, false), Err(Error::Refused(_))));
        // below the horizon the area decreases
        let mut q = RotProfile::schwarzschild(3, 2.0, 0.5, 10.0, 20).unwrap();
        q.verify();
        assert!(!q.flags.unwrap().area_nondecreasing);
        assert!(hawking_profile(&q, None, false).is_err());
    }

    #[test]
    fn cone_profile_is_monotone() {
        for n in 3..=6 {
            let mut p = RotProfile::cone(n, 0.9, 1.0, 1e3, 60).unwrap();
            let f = p.verify();
            assert!(f.area_nondecreasing && f.scalar_nonnegative);
            let rep = hawking_profile(&p, None, false).unwrap();
            assert!(rep.monotone && rep.max_violation == 0.0);
        }
    }

    #[test]
    fn table_round_trip() {
        let p = RotProfile::cone(4, 0.8, 1.0, 5.0, 9).unwrap();
        let q = RotProfile::from_table_text(&p.to_table()).unwrap();
        assert_eq!(p.r, q.r);
        assert_eq!(p.area, q.area);
        assert_eq!(p.scalar, q.scalar);
    }

    #[test]
    fn finite_difference_area_derivative() {
        let p = RotProfile::euclidean(3, 1.0, 2.0, 41).unwrap();
        let d = p.area_derivative();
        for (r, v) in p.r.iter().zip(&d) {
            assert!((v - 8.0 * PI * r).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn schwarzschild_mass_is_constant(n in 3usize..=6, m in 0.1f64..10.0, t in 0.0f64..1.0) {
            // keep m / r^{n-2} >= 1e-4 so the 1 - (...) factor keeps ~12 digits
            let rh = (m / 2.0).powf(1.0 / (n as f64 - 2.0));
            let r = rh * 10f64.powf(t * 3.5 / (n as f64 - 2.0));
            let v = hawking_mass(n, sphere_area_nm(n, m, r), sphere_mean_curvature_nm(n, m, r), false).unwrap();
            prop_assert!((v - m).abs() <= 1e-10 * m);
        }

        #[test]
        fn verified_cones_are_monotone(n in 3usize..=6, alpha in 0.05f64..1.0) {
            let mut p = RotProfile::cone(n, alpha, 0.5, 50.0, 30).unwrap();
            p.verify();
            let rep = hawking_profile(&p, None, false).unwrap();
            prop_assert!(rep.monotone);
        }
    }
}
