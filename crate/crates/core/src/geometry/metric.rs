//! Pointwise metric evaluation with exact first and second derivatives.

use crate::error::{Error, Result};
use crate::geometry::spec::{ManifoldSpec, Pattern, PerturbationSpec, RadialProfile};
use crate::numerics::jet::{smooth_step, Jet};

/// Metric coefficients and coordinate derivatives at one point.
///
/// Layout: `g[i*n + j]`, `dg[(k*n + i)*n + j] = d_k g_ij`,
/// `ddg[((k*n + l)*n + i)*n + j] = d_k d_l g_ij`.
#[derive(Clone, Debug)]
pub struct MetricSample {
    pub n: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Vec<f64>,
}

impl MetricSample {
    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }
    #[inline]
    pub fn dg(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dg[(k * self.n + i) * self.n + j]
    }
    #[inline]
    pub fn ddg(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        let n = self.n;
        self.ddg[((k * n + l) * n + i) * n + j]
    }

    fn from_jets(n: usize, comps: &[Jet]) -> Self {
        let mut g = vec![0.0; n * n];
        let mut dg = vec![0.0; n * n * n];
        let mut ddg = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                let c = &comps[i * n + j];
                g[i * n + j] = c.v;
                for k in 0..n {
                    dg[(k * n + i) * n + j] = c.grad(k);
                    for l in 0..n {
                        ddg[((k * n + l) * n + i) * n + j] = c.hess(k, l);
                    }
                }
            }
        }
        MetricSample { n, g, dg, ddg }
    }

    /// `a * self + b * other`, used for metric paths.
    pub fn combine(&self, a: f64, other: &MetricSample, b: f64) -> MetricSample {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        MetricSample { n: self.n, g: mix(&self.g, &other.g), dg: mix(&self.dg, &other.dg), ddg: mix(&self.ddg, &other.ddg) }
    }

    /// Inverse metric `g^{ij}`, row-major.
    pub fn inverse(&self) -> Option<Vec<f64>> {
        crate::numerics::dual::invert(&self.g, self.n)
    }
}

/// Immutable evaluator of the metric described by a [`ManifoldSpec`], on the
/// asymptotic chart `|x| >= 1/2`.
///
/// When `path_t` is set, the metric is `t g_m + (1 - t) g` along the
/// straight path from (centered) Schwarzschild to the full metric.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub spec: ManifoldSpec,
    pub path_t: Option<f64>,
}

impl MetricField {
    pub fn new(spec: ManifoldSpec) -> Result<Self> {
        spec.validate()?;
        Ok(MetricField { spec, path_t: None })
    }

    pub fn schwarzschild(n: usize, m: f64) -> Result<Self> {
        Self::new(ManifoldSpec::schwarzschild(n, m))
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(ManifoldSpec::euclidean(n))
    }

    /// The metric `t g_m + (1 - t) g`.
    pub fn on_path(&self, t: f64) -> MetricField {
        MetricField { spec: self.spec.clone(), path_t: Some(t) }
    }

    /// The Schwarzschild background `g_m` of the same dimension and mass.
    pub fn background(&self) -> MetricField {
        MetricField { spec: ManifoldSpec::schwarzschild(self.spec.n, self.spec.mass), path_t: None }
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn mass(&self) -> f64 {
        self.spec.mass
    }

    /// True when the metric is exactly the centered Schwarzschild metric.
    pub fn is_pure_schwarzschild(&self) -> bool {
        self.spec.is_pure_schwarzschild() || self.path_t == Some(1.0)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.n {
            return Err(Error::InvalidParameter(format!("point has {} coordinates, expected {}", x.len(), self.spec.n)));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r >= 0.5) {
            return Err(Error::OutOfChart(r));
        }
        Ok(())
    }

    /// Metric components as jets in the ambient coordinates.
    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet>> {
        self.check_point(x)?;
        let n = self.spec.n;
        match self.path_t {
            None => Ok(full_jets(&self.spec, x)),
            Some(t) => {
                let bg = schwarzschild_jets(n, self.spec.mass, &Jet::coordinates(x));
                let full = full_jets(&self.spec, x);
                Ok(bg.iter().zip(&full).map(|(a, b)| a.scale(t) + b.scale(1.0 - t)).collect())
            }
        }
    }

    pub fn sample(&self, x: &[f64]) -> Result<MetricSample> {
        let jets = self.jets(x)?;
        Ok(MetricSample::from_jets(self.spec.n, &jets))
    }

    /// Metric components only (no derivatives).
    pub fn components(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jets(x)?.iter().map(|j| j.v).collect())
    }
}

fn full_jets(spec: &ManifoldSpec, x: &[f64]) -> Vec<Jet> {
    let n = spec.n;
    let y: Vec<f64> = x.iter().zip(&spec.translation).map(|(a, q)| a - q).collect();
    let yj = Jet::coordinates(&y);
    let mut g = schwarzschild_jets(n, spec.mass, &yj);
    if let Some(p) = &spec.perturbation {
        if p.amplitude != 0.0 {
            let h = perturbation_jets(p, spec.gamma, &yj);
            for (a, b) in g.iter_mut().zip(h) {
                *a = *a + b;
            }
        }
    }
    g
}

fn radius(y: &[Jet]) -> Jet {
    let n = y[0].dim();
    let mut s = Jet::constant(n, 0.0);
    for c in y {
        s = s + *c * *c;
    }
    s.sqrt()
}

/// `phi^{4/(n-2)} delta_ij` with `phi = 1 + m / (2 r^{n-2})`.
pub(crate) fn schwarzschild_jets(n: usize, m: f64, y: &[Jet]) -> Vec<Jet> {
    let zero = Jet::constant(n, 0.0);
    let mut out = vec![zero; n * n];
    let conf = if m == 0.0 {
        Jet::constant(n, 1.0)
    } else {
        let r = radius(y);
        let phi = r.powi(2 - n as i32).scale(0.5 * m).add_const(1.0);
        phi.powf(4.0 / (n as f64 - 2.0))
    };
    for i in 0..n {
        out[i * n + i] = conf;
    }
    out
}

fn perturbation_jets(p: &PerturbationSpec, gamma: f64, y: &[Jet]) -> Vec<Jet> {
    let n = y.len();
    let r = radius(y);
    let r0 = p.support_radius;
    let rise = smooth_step(&(r.add_const(-r0)).scale(1.0 / r0));
    let envelope = match p.profile {
        RadialProfile::Decaying => rise,
        RadialProfile::Compact => rise * smooth_step(&(r.scale(-1.0).add_const(4.0 * r0)).scale(1.0 / r0)),
    };
    let radial = envelope * r.powf(2.0 - n as f64 - gamma).scale(p.amplitude);
    let inv_r = r.recip();
    let mut out = vec![Jet::constant(n, 0.0); n * n];
    if radial.v == 0.0 && (0..n).all(|k| radial.grad(k) == 0.0) {
        return out;
    }
    let unit: Vec<Jet> = y.iter().map(|c| *c * inv_r).collect();
    let last = unit[n - 1];
    for pat in p.patterns() {
        let (scalar, radial_tensor) = match pat {
            Pattern::ConformalEven => ((last * last).add_const(1.0), false),
            Pattern::RadialEven => (Jet::constant(n, 1.0), true),
            Pattern::QuadrupoleEven => (unit[0] * unit[1], false),
            Pattern::ConformalOdd => (last, false),
            Pattern::RadialOdd => (last, true),
            Pattern::TiltedOdd => (unit[0], false),
        };
        let coef = radial * scalar;
        for i in 0..n {
            for j in i..n {
                let t = if radial_tensor {
                    coef * unit[i] * unit[j]
                } else if i == j {
                    coef
                } else {
                    continue;
                };
                out[i * n + j] = out[i * n + j] + t;
                if i != j {
                    out[j * n + i] = out[j * n + i] + t;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::spec::Parity;

    #[test]
    fn schwarzschild_components_closed_form() {
        let f = MetricField::schwarzschild(3, 2.0).unwrap();
        let s = f.sample(&[2.0, 0.0, 0.0]).unwrap();
        assert!((s.g(0, 0) - 1.5f64.powi(4)).abs() < 1e-14);
        assert_eq!(s.g(0, 1), 0.0);
        // d_r phi^4 = 4 phi^3 (-m/(2 r^2))
        assert!((s.dg(0, 1, 1) - 4.0 * 1.5f64.powi(3) * (-0.25)).abs() < 1e-13);
    }

    #[test]
    fn out_of_chart_rejected() {
        let f = MetricField::schwarzschild(3, 2.0).unwrap();
        assert!(matches!(f.sample(&[0.1, 0.1, 0.1]), Err(Error::OutOfChart(_))));
    }

    #[test]
    fn translation_shifts_the_metric() {
        let q = [1.0, 0.0, 0.0];
        let f = MetricField::new(ManifoldSpec::schwarzschild(3, 2.0).with_translation(&q)).unwrap();
        let g = MetricField::schwarzschild(3, 2.0).unwrap();
        let a = f.sample(&[4.0, 1.0, -2.0]).unwrap();
        let b = g.sample(&[3.0, 1.0, -2.0]).unwrap();
        for (u, v) in a.ddg.iter().zip(&b.ddg) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn path_interpolates() {
        let spec = ManifoldSpec::schwarzschild(3, 1.0).with_perturbation(PerturbationSpec::new(0.3, Parity::Mixed, 1));
        let f = MetricField::new(spec).unwrap();
        let x = [5.0, -3.0, 4.0];
        let mid = f.on_path(0.25).sample(&x).unwrap();
        let a = f.background().sample(&x).unwrap();
        let b = f.sample(&x).unwrap();
        let expect = a.combine(0.25, &b, 0.75);
        for (u, v) in mid.dg.iter().zip(&expect.dg) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbation_decay_bounds_hold_on_samples() {
        for n in [3usize, 4, 5] {
            for parity in [Parity::Even, Parity::Odd, Parity::Mixed] {
                for pattern in 0..3 {
                    for (r0, profile) in [(0.5, RadialProfile::Decaying), (3.0, RadialProfile::Decaying), (1.0, RadialProfile::Compact)] {
                        for gamma in [0.5, 1.0] {
                            let p = PerturbationSpec::new(0.7, parity, pattern).with_support(r0).with_profile(profile);
                            let c = p.decay_constant;
                            let spec = ManifoldSpec::schwarzschild(n, 1.0).with_gamma(gamma).with_perturbation(p);
                            let f = MetricField::new(spec).unwrap();
                            let bg = f.background();
                            for k in 0..40 {
                                let r = 10f64.powf(3.0 * k as f64 / 39.0);
                                let mut x: Vec<f64> = (0..n).map(|i| ((i * 7 + k * 3) as f64 * 0.61).cos()).collect();
                                let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                                x.iter_mut().for_each(|v| *v *= r / s);
                                let a = f.sample(&x).unwrap();
                                let b = bg.sample(&x).unwrap();
                                let sup = |u: &[f64], v: &[f64]| u.iter().zip(v).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                                let e = 2.0 - n as f64 - gamma;
                                assert!(sup(&a.g, &b.g) <= c * r.powf(e), "h n={n} r={r}");
                                assert!(sup(&a.dg, &b.dg) <= c * r.powf(e - 1.0), "dh n={n} r={r}");
                                assert!(sup(&a.ddg, &b.ddg) <= c * r.powf(e - 2.0), "ddh n={n} r={r}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn even_patterns_are_reflection_symmetric() {
        use crate::geometry::curvature::{curvature_at, CurvatureMethod};
        for pattern in 0..3 {
            let spec = ManifoldSpec::schwarzschild(3, 1.0).with_perturbation(PerturbationSpec::new(0.5, Parity::Even, pattern).with_support(1.0));
            let f = MetricField::new(spec).unwrap();
            let x = [2.0, -1.5, 3.0];
            let y = [-2.0, 1.5, -3.0];
            let a = curvature_at(&f, &x, CurvatureMethod::Exact).unwrap().scalar;
            let b = curvature_at(&f, &y, CurvatureMethod::Exact).unwrap().scalar;
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn metric_is_symmetric_positive_definite() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        let strat = (3usize..=5, 0usize..3, 0usize..3, 0.0f64..3.0, proptest::collection::vec(-1.0f64..1.0, 5), -0.5f64..0.5);
        runner
            .run(&strat, |(n, par, pat, lr, dir, amp)| {
                let parity = [Parity::Even, Parity::Odd, Parity::Mixed][par];
                let spec = ManifoldSpec::schwarzschild(n, 2.0).with_perturbation(PerturbationSpec::new(amp, parity, pat).with_support(1.0));
                let f = MetricField::new(spec).unwrap();
                let r = 10f64.powf(lr);
                let norm = dir[..n].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
                let x: Vec<f64> = dir[..n].iter().map(|v| (v + 1e-3) * r / norm).collect();
                let s = f.sample(&x).unwrap();
                let m = nalgebra::DMatrix::from_row_slice(n, n, &s.g);
                prop_assert!((&m - m.transpose()).amax() == 0.0);
                prop_assert!(m.clone().cholesky().is_some());
                for k in 0..n {
                    for l in 0..n {
                        for i in 0..n {
                            for j in 0..n {
                                prop_assert!((s.ddg(k, l, i, j) - s.ddg(l, k, i, j)).abs() <= 1e-14 * s.ddg(k, l, i, j).abs().max(1e-300));
                            }
                        }
                    }
                }
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn perturbation_vanishes_inside_support() {
        let spec = ManifoldSpec::schwarzschild(4, 1.0).with_perturbation(PerturbationSpec::new(0.5, Parity::Even, 0).with_support(5.0));
        let f = MetricField::new(spec).unwrap();
        let g = MetricField::schwarzschild(4, 1.0).unwrap();
        let x = [1.0, 2.0, 0.5, 1.5];
        assert_eq!(f.components(&x).unwrap(), g.components(&x).unwrap());
    }
}
