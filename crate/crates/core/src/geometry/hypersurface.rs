//! Geometry of coordinate spheres `S_r(p) = {|x - p| = r}` as level sets in an
//! arbitrary metric.

use crate::error::{Error, Result};
use crate::geometry::metric::MetricField;

/// Pointwise data of the level set of `f = |x - p|` through `x`.
#[derive(Clone, Debug)]
pub struct LevelSpherePoint {
    /// Outward unit normal, contravariant components.
    pub normal: Vec<f64>,
    /// Mean curvature with respect to `normal`.
    pub mean_curvature: f64,
    /// Ratio of the induced area element to the Euclidean one.
    pub area_density: f64,
}

/// `H = d_i nu^i + nu^i d_i log sqrt(det g)` with `nu = grad f / |grad f|`.
pub fn level_sphere_point(metric: &MetricField, p: &[f64], x: &[f64]) -> Result<LevelSpherePoint> {
    let n = metric.n();
    let s = metric.sample(x)?;
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ginv = s.inverse().ok_or(Error::SingularMetric(r))?;
    let y: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
    let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rho == 0.0 {
        return Err(Error::Degenerate("level sphere of zero radius".into()));
    }
    let f1: Vec<f64> = y.iter().map(|v| v / rho).collect();
    let f2 = |i: usize, j: usize| ((if i == j { 1.0 } else { 0.0 }) - f1[i] * f1[j]) / rho;
    // d_l g^{ab}
    let dginv = |l: usize, a: usize, b: usize| -> f64 {
        let mut v = 0.0;
        for c in 0..n {
            for d in 0..n {
                v -= ginv[a * n + c] * s.dg(l, c, d) * ginv[d * n + b];
            }
        }
        v
    };
    let mut grad = vec![0.0; n];
    for i in 0..n {
        grad[i] = (0..n).map(|j| ginv[i * n + j] * f1[j]).sum();
    }
    let nn2: f64 = (0..n).map(|i| grad[i] * f1[i]).sum();
    let nn = nn2.sqrt();
    let mut dn = vec![0.0; n];
    let mut div_grad = 0.0;
    for i in 0..n {
        let mut a = 0.0;
        let mut b = 0.0;
        for j in 0..n {
            for k in 0..n {
                a += dginv(i, j, k) * f1[j] * f1[k] + 2.0 * ginv[j * n + k] * f2(j, i) * f1[k];
            }
            b += dginv(i, i, j) * f1[j] + ginv[i * n + j] * f2(i, j);
        }
        dn[i] = a / (2.0 * nn);
        div_grad += b;
    }
    let mut div_nu = div_grad / nn;
    for i in 0..n {
        div_nu -= grad[i] * dn[i] / nn2;
    }
    let mut logdet = 0.0;
    for i in 0..n {
        let mut v = 0.0;
        for a in 0..n {
            for b in 0..n {
                v += ginv[a * n + b] * s.dg(i, a, b);
            }
        }
        logdet += 0.5 * v * grad[i] / nn;
    }
    let det = crate::numerics::dual::determinant(&s.g, n);
    Ok(LevelSpherePoint {
        normal: grad.iter().map(|v| v / nn).collect(),
        mean_curvature: div_nu + logdet,
        area_density: det.sqrt() * nn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::schwarzschild::{conformal_factor, sphere_mean_curvature_nm};
    use crate::geometry::spec::ManifoldSpec;

    #[test]
    fn centered_spheres_match_closed_form() {
        for n in 3..=5 {
            let f = MetricField::schwarzschild(n, 2.0).unwrap();
            let mut x = vec![0.0; n];
            x[0] = 1.2;
            x[n - 1] = -2.1;
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let pt = level_sphere_point(&f, &vec![0.0; n], &x).unwrap();
            assert!((pt.mean_curvature - sphere_mean_curvature_nm(n, 2.0, r)).abs() < 1e-13);
            let expect = conformal_factor(n, 2.0, r).powf((n as f64 - 1.0) / 2.0);
            assert!((pt.area_density - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn translated_metric_has_shifted_spheres() {
        let q = [1.0, 0.0, 0.0];
        let f = MetricField::new(ManifoldSpec::schwarzschild(3, 2.0).with_translation(&q)).unwrap();
        let x = [1.0, 3.0, 4.0];
        let pt = level_sphere_point(&f, &q, &x).unwrap();
        assert!((pt.mean_curvature - sphere_mean_curvature_nm(3, 2.0, 5.0)).abs() < 1e-13);
    }

    #[test]
    fn euclidean_off_center() {
        let f = MetricField::euclidean(3).unwrap();
        let pt = level_sphere_point(&f, &[0.3, -0.2, 1.0], &[3.3, 3.8, 1.0]).unwrap();
        assert!((pt.mean_curvature - 2.0 / 5.0).abs() < 1e-14);
    }
}
