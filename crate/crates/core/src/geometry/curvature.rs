//! Christoffel symbols and curvature tensors.
//!
//! Conventions: `R^m_ijk = d_i G^m_jk - d_j G^m_ik + G^p_jk G^m_ip - G^p_ik G^m_jp`,
//! `Rm_ijkl = g_lm R^m_ijk`, `Rc_jk = g^{il} Rm_ijkl`. The round unit sphere
//! has `Rm = (g ⊙ g) / 2` and `Rc = (n-1) g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::metric::{MetricField, MetricSample};
use crate::geometry::schwarzschild;
use crate::geometry::tensor::{Sym2, Tensor4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMethod {
    ClosedForm,
    FiniteDifference,
    /// Exact derivatives of the Christoffel symbols from the metric jets.
    Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub riemann: Tensor4,
    pub ricci: Sym2,
    pub scalar: f64,
    pub method: CurvatureMethod,
}

/// Christoffel symbols of the second kind, `gamma[(m*n + i)*n + j] = G^m_ij`.
pub fn christoffel(s: &MetricSample, ginv: &[f64]) -> Vec<f64> {
    let n = s.n;
    let low = christoffel_first_kind(s);
    let mut out = vec![0.0; n * n * n];
    for m in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += ginv[m * n + k] * low[(k * n + i) * n + j];
                }
                out[(m * n + i) * n + j] = v;
                out[(m * n + j) * n + i] = v;
            }
        }
    }
    out
}

/// `G_kij = (d_i g_jk + d_j g_ik - d_k g_ij) / 2`, index `(k*n + i)*n + j`.
pub fn christoffel_first_kind(s: &MetricSample) -> Vec<f64> {
    let n = s.n;
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (s.dg(i, j, k) + s.dg(j, i, k) - s.dg(k, i, j));
                out[(k * n + i) * n + j] = v;
                out[(k * n + j) * n + i] = v;
            }
        }
    }
    out
}

fn assemble(n: usize, g: &[f64], gamma: &[f64], dgamma: impl Fn(usize, usize, usize, usize) -> f64) -> Tensor4 {
    // dgamma(l, m, i, j) = d_l G^m_ij
    let ga = |m: usize, i: usize, j: usize| gamma[(m * n + i) * n + j];
    let mut up = vec![0.0; n * n * n * n]; // R^m_ijk at ((m*n+i)*n+j)*n+k
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dgamma(i, m, j, k) - dgamma(j, m, i, k);
                    for p in 0..n {
                        v += ga(p, j, k) * ga(m, i, p) - ga(p, i, k) * ga(m, j, p);
                    }
                    up[((m * n + i) * n + j) * n + k] = v;
                }
            }
        }
    }
    let mut rm = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v: f64 = (0..n).map(|m| g[l * n + m] * up[((m * n + i) * n + j) * n + k]).sum();
                    rm.set(i, j, k, l, v);
                }
            }
        }
    }
    rm
}

/// Riemann tensor from exact second metric derivatives.
pub fn riemann_exact(s: &MetricSample) -> Result<Tensor4> {
    let n = s.n;
    let ginv = s.inverse().ok_or(Error::SingularMetric(f64::NAN))?;
    let gamma = christoffel(s, &ginv);
    let low = christoffel_first_kind(s);
    // d_l G_kij
    let dlow = |l: usize, k: usize, i: usize, j: usize| 0.5 * (s.ddg(l, i, j, k) + s.ddg(l, j, i, k) - s.ddg(l, k, i, j));
    // d_l g^{mk} = -g^{ma} d_l g_ab g^{bk}
    let mut dginv = vec![0.0; n * n * n];
    for l in 0..n {
        for m in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        v -= ginv[m * n + a] * s.dg(l, a, b) * ginv[b * n + k];
                    }
                }
                dginv[(l * n + m) * n + k] = v;
            }
        }
    }
    let mut dgam = vec![0.0; n * n * n * n];
    for l in 0..n {
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    for k in 0..n {
                        v += dginv[(l * n + m) * n + k] * low[(k * n + i) * n + j] + ginv[m * n + k] * dlow(l, k, i, j);
                    }
                    dgam[((l * n + m) * n + i) * n + j] = v;
                }
            }
        }
    }
    Ok(assemble(n, &s.g, &gamma, |l, m, i, j| dgam[((l * n + m) * n + i) * n + j]))
}

/// Finite-difference step `h = max(1e-3, 1e-4 |x|)`.
pub fn fd_step(x: &[f64]) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (1e-4 * r).max(1e-3)
}

/// Riemann tensor from 4th-order central differences of the Christoffel
/// symbols.
pub fn riemann_finite_difference(metric: &MetricField, x: &[f64], h: f64) -> Result<Tensor4> {
    let n = metric.n();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(h > 1e-12 * r.max(1.0)) || !h.is_finite() {
        return Err(Error::StepUnderflow(h));
    }
    let gamma_at = |y: &[f64]| -> Result<Vec<f64>> {
        let s = metric.sample(y)?;
        let ginv = s.inverse().ok_or(Error::SingularMetric(r))?;
        Ok(christoffel(&s, &ginv))
    };
    let s0 = metric.sample(x)?;
    let ginv0 = s0.inverse().ok_or(Error::SingularMetric(r))?;
    let gamma0 = christoffel(&s0, &ginv0);
    let mut dgam = vec![0.0; n * n * n * n];
    let mut y = x.to_vec();
    for l in 0..n {
        let mut acc = vec![0.0; n * n * n];
        for (off, wgt) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
            y[l] = x[l] + off * h;
            let gm = gamma_at(&y)?;
            for (a, b) in acc.iter_mut().zip(&gm) {
                *a += wgt * b;
            }
        }
        y[l] = x[l];
        for (p, v) in acc.iter().enumerate() {
            dgam[l * n * n * n + p] = v / (12.0 * h);
        }
    }
    Ok(assemble(n, &s0.g, &gamma0, |l, m, i, j| dgam[((l * n + m) * n + i) * n + j]))
}

impl CurvatureSample {
    fn from_riemann(point: &[f64], rm: Tensor4, ginv: &[f64], method: CurvatureMethod) -> Self {
        let ricci = rm.ricci_contraction(ginv);
        let scalar = crate::geometry::tensor::trace(rm.n, ginv, &ricci);
        CurvatureSample { point: point.to_vec(), riemann: rm, ricci, scalar, method }
    }
}

/// Curvature of `metric` at `x` by the requested method. The closed form is
/// only available for centered, unperturbed Schwarzschild.
pub fn curvature_at(metric: &MetricField, x: &[f64], method: CurvatureMethod) -> Result<CurvatureSample> {
    let s = metric.sample(x)?;
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ginv = s.inverse().ok_or(Error::SingularMetric(r))?;
    let rm = match method {
        CurvatureMethod::ClosedForm => {
            if !metric.is_pure_schwarzschild() {
                return Err(Error::Unsupported("closed-form curvature requires centered Schwarzschild".into()));
            }
            schwarzschild::riemann_closed_form(metric.n(), metric.mass(), x)
        }
        CurvatureMethod::FiniteDifference => riemann_finite_difference(metric, x, fd_step(x))?,
        CurvatureMethod::Exact => riemann_exact(&s)?,
    };
    Ok(CurvatureSample::from_riemann(x, rm, &ginv, method))
}

/// `max |A - B| / max |B|` over Riemann components.
pub fn relative_difference(a: &Tensor4, b: &Tensor4) -> f64 {
    a.sub(b).max_abs() / b.max_abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::spec::{ManifoldSpec, Parity, PerturbationSpec};

    fn point(n: usize, r: f64, seed: usize) -> Vec<f64> {
        let mut x: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * 1.7 + seed as f64 * 0.37).sin()).collect();
        let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v *= r / s);
        x
    }

    #[test]
    fn euclidean_is_flat() {
        let f = MetricField::euclidean(4).unwrap();
        for m in [CurvatureMethod::FiniteDifference, CurvatureMethod::Exact, CurvatureMethod::ClosedForm] {
            let c = curvature_at(&f, &point(4, 3.0, 1), m).unwrap();
            assert!(c.riemann.max_abs() < 1e-14);
        }
    }

    #[test]
    fn methods_agree_on_schwarzschild() {
        for n in 3..=5 {
            let f = MetricField::schwarzschild(n, 2.0).unwrap();
            for (k, r) in [2.0, 7.0, 30.0, 100.0].iter().enumerate() {
                let x = point(n, *r, k);
                let cf = curvature_at(&f, &x, CurvatureMethod::ClosedForm).unwrap();
                let ex = curvature_at(&f, &x, CurvatureMethod::Exact).unwrap();
                let fd = curvature_at(&f, &x, CurvatureMethod::FiniteDifference).unwrap();
                assert!(relative_difference(&ex.riemann, &cf.riemann) < 1e-11, "exact n={n} r={r}");
                assert!(relative_difference(&fd.riemann, &cf.riemann) < 1e-6, "fd n={n} r={r}");
                assert!(cf.scalar.abs() < 1e-8 * cf.riemann.max_abs());
                assert!(ex.riemann.symmetry_defect() < 1e-10 * ex.riemann.max_abs());
            }
        }
    }

    #[test]
    fn radial_ricci_matches_contraction() {
        let f = MetricField::schwarzschild(3, 2.0).unwrap();
        let x = [0.0, 0.0, 2.0];
        let c = curvature_at(&f, &x, CurvatureMethod::FiniteDifference).unwrap();
        // nu = phi^{-2} e_3
        let nu = 1.0 / 1.5f64.powi(2);
        let v = c.ricci[8] * nu * nu;
        assert!((v - schwarzschild::radial_ricci(3, 2.0, 2.0)).abs() < 1e-9);
        assert!((v + 0.043896).abs() < 1e-6);
    }

    #[test]
    fn perturbed_exact_matches_finite_difference() {
        let spec = ManifoldSpec::schwarzschild(3, 1.0).with_perturbation(PerturbationSpec::new(0.4, Parity::Mixed, 1).with_support(1.0));
        let f = MetricField::new(spec).unwrap();
        let x = point(3, 5.0, 2);
        let ex = curvature_at(&f, &x, CurvatureMethod::Exact).unwrap();
        let fd = curvature_at(&f, &x, CurvatureMethod::FiniteDifference).unwrap();
        assert!(relative_difference(&fd.riemann, &ex.riemann) < 1e-6);
        assert!(ex.riemann.symmetry_defect() < 1e-10 * ex.riemann.max_abs());
    }
}
