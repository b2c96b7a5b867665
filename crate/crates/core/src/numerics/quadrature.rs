//! Gauss-Legendre rules, composite radial rules, and product quadrature on
//! unit spheres of arbitrary dimension.

use std::f64::consts::PI;

/// Gamma function at half-integer arguments `k/2`, `k >= 1`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1, "gamma_half needs a positive argument");
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Area of the unit sphere `S^{d}` embedded in `R^{d+1}`:
/// `omega_d = 2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
pub fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf((d + 1) as f64 / 2.0) / gamma_half(d + 1)
}

/// Nodes and weights of the `k`-point Gauss-Legendre rule on `[-1, 1]`,
/// ascending in the node.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    let m = (k + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..k {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = k as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[k - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[k - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(k: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(k);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect())
}

/// Gauss-Gegenbauer rule for the weight `(1 - t^2)^a` on `[-1, 1]`, `a` a
/// non-negative half-integer, by Golub-Welsch. Nodes ascending.
pub fn gauss_gegenbauer(k: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1 && a >= 0.0);
    if a == 0.0 {
        return gauss_legendre(k);
    }
    let lam = a + 0.5;
    let mut jac = nalgebra::DMatrix::<f64>::zeros(k, k);
    for j in 1..k {
        let jf = j as f64;
        let beta = jf * (jf + 2.0 * lam - 1.0) / (4.0 * (jf + lam) * (jf + lam - 1.0));
        jac[(j, j - 1)] = beta.sqrt();
        jac[(j - 1, j)] = beta.sqrt();
    }
    let twice = (2.0 * a).round() as usize;
    let mu0 = PI.sqrt() * gamma_half(twice + 2) / gamma_half(twice + 3);
    let eig = nalgebra::SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // symmetrize
    for i in 0..k / 2 {
        let j = k - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if k % 2 == 1 {
        pairs[k / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Polar angles in `(0, pi)` and weights integrating `f(theta) sin^p(theta)`,
/// exact for polynomials in `cos(theta)` times `sin^p` of degree `< 2k`
/// when `p` is odd and spectrally accurate otherwise.
pub fn polar_rule(k: usize, p: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (p as f64 - 1.0) / 2.0;
    if p == 0 {
        return gauss_legendre_on(k, 0.0, PI);
    }
    let (t, w) = gauss_gegenbauer(k, a);
    // ascending theta means descending t
    let th: Vec<f64> = t.iter().rev().map(|t| t.acos()).collect();
    let wr: Vec<f64> = w.into_iter().rev().collect();
    (th, wr)
}

/// Composite radial rule on `[a, b]` with 16-point panels, four panels per
/// decade (64 nodes per decade), at least one panel.
pub fn radial_rule(a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(b > a);
    const PANEL: usize = 16;
    let panels = if a > 0.0 {
        ((b / a).log10() * 4.0).ceil().max(1.0) as usize
    } else {
        4
    };
    let mut nodes = Vec::with_capacity(panels * PANEL);
    let mut weights = Vec::with_capacity(panels * PANEL);
    let edges: Vec<f64> = if a > 0.0 {
        let ratio = (b / a).powf(1.0 / panels as f64);
        (0..=panels).map(|i| if i == panels { b } else { a * ratio.powi(i as i32) }).collect()
    } else {
        (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect()
    };
    for p in 0..panels {
        let (x, w) = gauss_legendre_on(PANEL, edges[p], edges[p + 1]);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Product quadrature on the unit sphere `S^{n-1}` in `R^n`.
///
/// Hyperspherical angles `theta_1..theta_{n-2}` in `(0, pi)` use
/// Gauss-Legendre in the angle with the `sin^{n-1-k}` density folded into the
/// weights, and the final azimuth is uniform. Spectrally accurate for smooth
/// integrands.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(n: usize, polar: usize, azimuth: usize) -> Self {
        assert!(n >= 2);
        let mut points = vec![Vec::new()];
        let mut weights = vec![1.0];
        // build angles from the outermost (x_n axis) inwards
        for k in 0..n.saturating_sub(2) {
            let power = n - 2 - k;
            let (tx, tw) = polar_rule(polar, power);
            let mut np = Vec::with_capacity(points.len() * polar);
            let mut nw = Vec::with_capacity(points.len() * polar);
            for (p, w) in points.iter().zip(&weights) {
                for (t, tw) in tx.iter().zip(&tw) {
                    let mut q = p.clone();
                    q.push(*t);
                    np.push(q);
                    nw.push(w * tw);
                }
            }
            points = np;
            weights = nw;
        }
        let dphi = 2.0 * PI / azimuth as f64;
        let mut cart = Vec::with_capacity(points.len() * azimuth);
        let mut cw = Vec::with_capacity(points.len() * azimuth);
        for (angles, w) in points.iter().zip(&weights) {
            for j in 0..azimuth {
                let phi = dphi * j as f64;
                let mut x = vec![0.0; n];
                let mut s = 1.0;
                for (k, t) in angles.iter().enumerate() {
                    x[n - 1 - k] = s * t.cos();
                    s *= t.sin();
                }
                x[0] = s * phi.cos();
                x[1] = s * phi.sin();
                cart.push(x);
                cw.push(w * dphi);
            }
        }
        SphereQuadrature { n, points: cart, weights: cw }
    }

    /// Default resolution used by the flux integrals.
    pub fn standard(n: usize) -> Self {
        match n {
            3 => SphereQuadrature::new(3, 40, 80),
            4 => SphereQuadrature::new(4, 24, 48),
            _ => SphereQuadrature::new(n, 12, 24),
        }
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn gegenbauer_moments() {
        for twice_a in 1..6 {
            let a = twice_a as f64 / 2.0;
            let (x, w) = gauss_gegenbauer(7, a);
            let (gx, gw) = gauss_legendre(400);
            for p in [0, 2, 4, 6] {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
                let r: f64 = gx.iter().zip(&gw).map(|(x, w)| w * x.powi(p) * (1.0 - x * x).powf(a)).sum();
                assert!((q - r).abs() < 1e-6 * r.abs(), "a={a} p={p}: {q} vs {r}");
            }
        }
        let (x, w) = gauss_gegenbauer(6, 1.0);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((q - 4.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn radial_rule_integrates_power_laws() {
        let (x, w) = radial_rule(1.0, 1000.0);
        assert_eq!(x.len(), 12 * 16);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w / (x * x)).sum();
        assert!((q - (1.0 - 1e-3)).abs() < 1e-13);
    }

    #[test]
    fn product_sphere_weights_and_moments() {
        for n in 3..=5 {
            let q = SphereQuadrature::standard(n);
            let area = q.integrate(|_| 1.0);
            assert!((area - unit_sphere_area(n - 1)).abs() < 1e-11 * area, "n={n}");
            let second = q.integrate(|x| x[n - 1] * x[n - 1]);
            assert!((second - area / n as f64).abs() < 1e-11 * area, "n={n} {second} {}", area / n as f64);
            let first = q.integrate(|x| x[0]);
            assert!(first.abs() < 1e-12);
        }
    }
}
