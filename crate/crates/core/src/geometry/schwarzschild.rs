//! Closed-form Schwarzschild quantities in isotropic coordinates,
//! `g_m = phi^{4/(n-2)} delta`, `phi = 1 + m / (2 r^{n-2})`.

use crate::error::{Error, Result};
use crate::geometry::spec::ManifoldSpec;
use crate::geometry::tensor::{kulkarni_nomizu, Sym2, Tensor4};
use crate::numerics::quadrature::{radial_rule, unit_sphere_area};

#[inline]
fn nf(n: usize) -> f64 {
    n as f64
}

pub fn phi(n: usize, m: f64, r: f64) -> f64 {
    1.0 + m / (2.0 * r.powi(n as i32 - 2))
}

/// Conformal factor `phi^{4/(n-2)}`.
pub fn conformal_factor(n: usize, m: f64, r: f64) -> f64 {
    phi(n, m, r).powf(4.0 / (nf(n) - 2.0))
}

pub fn horizon_radius_nm(n: usize, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::NoHorizon(m));
    }
    Ok((m / 2.0).powf(1.0 / (nf(n) - 2.0)))
}

/// `r_h = (m/2)^{1/(n-2)}`.
pub fn horizon_radius(spec: &ManifoldSpec) -> Result<f64> {
    horizon_radius_nm(spec.n, spec.mass)
}

fn require_pure(spec: &ManifoldSpec, r: f64) -> Result<()> {
    spec.validate()?;
    if !spec.is_pure_schwarzschild() {
        return Err(Error::Precondition("closed-form sphere quantities need an unperturbed, centered metric".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive (got {r})")));
    }
    Ok(())
}

pub fn sphere_area_nm(n: usize, m: f64, r: f64) -> f64 {
    phi(n, m, r).powf(2.0 * (nf(n) - 1.0) / (nf(n) - 2.0)) * r.powi(n as i32 - 1) * unit_sphere_area(n - 1)
}

/// `g_m`-area of the coordinate sphere `S_r`.
pub fn sphere_area(spec: &ManifoldSpec, r: f64) -> Result<f64> {
    require_pure(spec, r)?;
    Ok(sphere_area_nm(spec.n, spec.mass, r))
}

pub fn sphere_mean_curvature_nm(n: usize, m: f64, r: f64) -> f64 {
    let a = m / (2.0 * r.powi(n as i32 - 2));
    phi(n, m, r).powf(-nf(n) / (nf(n) - 2.0)) * (1.0 - a) * (nf(n) - 1.0) / r
}

/// Mean curvature of `S_r` with respect to the outward normal.
pub fn sphere_mean_curvature(spec: &ManifoldSpec, r: f64) -> Result<f64> {
    require_pure(spec, r)?;
    Ok(sphere_mean_curvature_nm(spec.n, spec.mass, r))
}

/// Radial derivative of the area, `dA/dr`.
pub fn sphere_area_derivative_nm(n: usize, m: f64, r: f64) -> f64 {
    // dA/dr = H * A * |dr|_g^{-1}, |dr|^{-1} = phi^{2/(n-2)}
    sphere_mean_curvature_nm(n, m, r) * sphere_area_nm(n, m, r) * phi(n, m, r).powf(2.0 / (nf(n) - 2.0))
}

/// `m / (r^n phi^{2n/(n-2)})`, the common curvature scale.
pub fn curvature_scale(n: usize, m: f64, r: f64) -> f64 {
    m / (r.powi(n as i32) * phi(n, m, r).powf(2.0 * nf(n) / (nf(n) - 2.0)))
}

/// `Rc(nu, nu)` for the unit radial normal.
pub fn radial_ricci(n: usize, m: f64, r: f64) -> f64 {
    -(nf(n) - 1.0) * (nf(n) - 2.0) * curvature_scale(n, m, r)
}

fn metric_and_dr(n: usize, m: f64, x: &[f64]) -> (f64, Sym2, Sym2, f64) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cf = conformal_factor(n, m, r);
    let mut g = vec![0.0; n * n];
    let mut drdr = vec![0.0; n * n];
    for i in 0..n {
        g[i * n + i] = cf;
        for j in 0..n {
            drdr[i * n + j] = x[i] * x[j] / (r * r);
        }
    }
    (r, g, drdr, cf)
}

/// `Rm = K (g ⊙ g - n phi^{4/(n-2)} dr² ⊙ g)`.
pub fn riemann_closed_form(n: usize, m: f64, x: &[f64]) -> Tensor4 {
    let (r, g, drdr, cf) = metric_and_dr(n, m, x);
    let k = curvature_scale(n, m, r);
    let mut out = kulkarni_nomizu(n, &g, &g);
    let b = kulkarni_nomizu(n, &drdr, &g);
    for (a, b) in out.data.iter_mut().zip(&b.data) {
        *a = k * (*a - nf(n) * cf * b);
    }
    out
}

/// `Rc = (n-2) K (g - n phi^{4/(n-2)} dr²)`.
pub fn ricci_closed_form(n: usize, m: f64, x: &[f64]) -> Sym2 {
    let (r, g, drdr, cf) = metric_and_dr(n, m, x);
    let k = curvature_scale(n, m, r);
    g.iter().zip(&drdr).map(|(a, b)| (nf(n) - 2.0) * k * (a - nf(n) * cf * b)).collect()
}

/// Volume density `phi^{2n/(n-2)} rho^{n-1} omega_{n-1}` of the region
/// between spheres.
pub fn volume_density(n: usize, m: f64, rho: f64) -> f64 {
    phi(n, m, rho).powf(2.0 * nf(n) / (nf(n) - 2.0)) * rho.powi(n as i32 - 1) * unit_sphere_area(n - 1)
}

/// Volume between `S_a` and `S_b`.
pub fn shell_volume(n: usize, m: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = radial_rule(a, b);
    x.iter().zip(&w).map(|(x, w)| w * volume_density(n, m, *x)).sum()
}

/// Volume enclosed by `S_r` outside the horizon (from the origin when
/// `m = 0`).
pub fn enclosed_volume(n: usize, m: f64, r: f64) -> f64 {
    let rh = if m > 0.0 { (m / 2.0).powf(1.0 / (nf(n) - 2.0)) } else { 0.0 };
    shell_volume(n, m, rh, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn horizon_examples() {
        assert_eq!(horizon_radius_nm(3, 2.0).unwrap(), 1.0);
        assert!((horizon_radius_nm(4, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(horizon_radius_nm(5, 2.0).unwrap(), 1.0);
        assert!(matches!(horizon_radius_nm(3, 0.0), Err(Error::NoHorizon(_))));
    }

    #[test]
    fn area_examples() {
        assert!((sphere_area_nm(3, 0.0, 1.0) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area_nm(3, 2.0, 1.0) - 64.0 * PI).abs() < 1e-12);
        let r = 1e7;
        assert!((sphere_area_nm(3, 2.0, r) / (4.0 * PI * r * r) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn area_by_surface_quadrature() {
        // phi^4 dA_delta integrated over the sphere (constant integrand)
        let q = crate::numerics::quadrature::SphereQuadrature::standard(3);
        let a = q.integrate(|_| 2f64.powi(4));
        assert!((a - 64.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn mean_curvature_examples() {
        assert!(sphere_mean_curvature_nm(3, 2.0, 1.0).abs() < 1e-15);
        assert!((sphere_mean_curvature_nm(3, 0.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((sphere_mean_curvature_nm(3, 2.0, 2.0) - 0.148148148148148).abs() < 1e-12);
    }

    #[test]
    fn mean_curvature_is_first_variation_of_area() {
        for n in 3..=6 {
            let (m, r, h) = (1.3, 2.7, 1e-4);
            let da = (sphere_area_nm(n, m, r + h) - sphere_area_nm(n, m, r - h)) / (2.0 * h);
            let fd = da / (sphere_area_nm(n, m, r) * phi(n, m, r).powf(2.0 / (n as f64 - 2.0)));
            assert!((fd - sphere_mean_curvature_nm(n, m, r)).abs() < 1e-7, "n={n}");
        }
    }

    #[test]
    fn radial_ricci_example() {
        let v = radial_ricci(3, 2.0, 2.0);
        assert!((v + 4.0 / (8.0 * 1.5f64.powi(6))).abs() < 1e-15);
        assert!((v + 0.0438957475994513).abs() < 1e-12);
    }

    #[test]
    fn closed_form_traces_vanish() {
        for n in 3..=5 {
            let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.7).collect();
            let rm = riemann_closed_form(n, 2.0, &x);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cf = conformal_factor(n, 2.0, r);
            let ginv: Vec<f64> = (0..n * n).map(|p| if p / n == p % n { 1.0 / cf } else { 0.0 }).collect();
            let rc = rm.ricci_contraction(&ginv);
            let rc2 = ricci_closed_form(n, 2.0, &x);
            let scale = rc2.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for (a, b) in rc.iter().zip(&rc2) {
                assert!((a - b).abs() < 1e-12 * scale);
            }
            let s: f64 = (0..n).map(|i| rc[i * n + i] / cf).sum();
            assert!(s.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn volume_closed_form_three_dimensions() {
        // (1 + m/(2 rho))^6 rho^2 expanded; the rho^{-1} term integrates to a log
        let (m, r) = (2.0, 10.0);
        let a: f64 = m / 2.0;
        let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
        let anti = |x: f64| -> f64 {
            (0..7)
                .map(|k| {
                    let c: f64 = binom[k] * a.powi(k as i32);
                    let p = 2 - k as i32;
                    if p == -1 {
                        c * x.ln()
                    } else {
                        c * x.powi(p + 1) / (p + 1) as f64
                    }
                })
                .sum()
        };
        let exact = 4.0 * PI * (anti(r) - anti(1.0));
        assert!((enclosed_volume(3, m, r) - exact).abs() < 1e-11 * exact);
    }
}
