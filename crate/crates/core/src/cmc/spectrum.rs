//! Spectrum of the Jacobi operator `L = -Lap - (|h|^2 + Rc(nu, nu))` on a
//! graph surface, by Rayleigh-Ritz on the spectral basis:
//! `K_kl = int <grad Y_k, grad Y_l> - q Y_k Y_l dA`, `M_kl = int Y_k Y_l dA`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::surface::GraphSurface;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Lowest eigenvalues of `L`, ascending.
    pub eigenvalues: Vec<f64>,
    pub mu0: f64,
    pub mu1: f64,
    /// Lowest eigenvalue on functions with zero mean for the induced area.
    pub lambda1: f64,
    /// First nonzero eigenvalue of `-Lap`.
    pub laplace_first: f64,
    /// `n (n-1) m / R^n`.
    pub lambda1_predicted: f64,
    /// `-H^2/(n-1) + (n-1)(n-2) m / R^n` with `H` the mean of the mean curvature.
    pub mu0_predicted: f64,
    /// `max |K - K^T| / max |K|`.
    pub asymmetry: f64,
    /// `max |P^2 - P|` of the mean-zero projector.
    pub projector_defect: f64,
    /// Relative change of `lambda1` against a doubled resolution, when checked.
    pub resolution_change: Option<f64>,
}

impl SpectrumReport {
    /// `lambda1 R^n / (n (n-1) m)`.
    pub fn lambda1_ratio(&self) -> f64 {
        self.lambda1 / self.lambda1_predicted
    }
}

struct Forms {
    k: DMatrix<f64>,
    lap: DMatrix<f64>,
    m: DMatrix<f64>,
}

fn assemble(s: &GraphSurface) -> Result<Forms> {
    let grid = &s.grid;
    let kdim = grid.dim();
    let bd = grid.basis_dim();
    let d = grid.param_dim();
    // per node: area weight, potential, inverse induced metric in basis directions
    let data: Result<Vec<(f64, f64, Vec<f64>)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = s.point(&grid.params[i])?;
            let gi = &p.geom.gbar_inv;
            let mut sub = vec![0.0; bd * bd];
            for a in 0..bd {
                for b in 0..bd {
                    sub[a * bd + b] = gi[a * d + b];
                }
            }
            Ok((grid.weights[i] * p.area_ratio, p.h_norm2() + p.ricci_normal(), sub))
        })
        .collect();
    let data = data?;
    let nodes = grid.len();
    let mut v = DMatrix::zeros(nodes, kdim);
    let mut wv = DMatrix::zeros(nodes, kdim);
    let mut qv = DMatrix::zeros(nodes, kdim);
    let mut grads: Vec<DMatrix<f64>> = (0..bd).map(|_| DMatrix::zeros(nodes, kdim)).collect();
    let mut wgrads: Vec<DMatrix<f64>> = (0..bd).map(|_| DMatrix::zeros(nodes, kdim)).collect();
    for (i, (w, q, gi)) in data.iter().enumerate() {
        for j in 0..kdim {
            let b = grid.basis_channels(i, j);
            v[(i, j)] = b[0];
            wv[(i, j)] = w * b[0];
            qv[(i, j)] = w * q * b[0];
            for a in 0..bd {
                grads[a][(i, j)] = b[1 + a];
                let mut s = 0.0;
                for c in 0..bd {
                    s += gi[a * bd + c] * b[1 + c];
                }
                wgrads[a][(i, j)] = w * s;
            }
        }
    }
    let m = v.transpose() * &wv;
    let mut lap = DMatrix::zeros(kdim, kdim);
    for a in 0..bd {
        lap += grads[a].transpose() * &wgrads[a];
    }
    let k = &lap - v.transpose() * &qv;
    Ok(Forms { k, lap, m })
}

fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Eigenvalues of `K v = lambda M v`, ascending.
fn generalized(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::Degenerate("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::Degenerate("mass factor not invertible".into()))?;
    let c = symmetrize(&(&linv * symmetrize(k) * linv.transpose()));
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Basis (columns) of the `M`-orthogonal complement of the constants.
fn mean_zero_basis(m: &DMatrix<f64>, one: &[f64]) -> (DMatrix<f64>, f64) {
    let k = m.nrows();
    let e = nalgebra::DVector::from_column_slice(one);
    let me = m * &e;
    let norm = e.dot(&me);
    // projector P = I - e (M e)^T / (e^T M e)
    let p = DMatrix::identity(k, k) - &e * me.transpose() / norm;
    let defect = (&p * &p - &p).amax();
    // drop the column of the constant mode
    let pivot = one.iter().enumerate().fold(0, |b, (i, v)| if v.abs() > one[b].abs() { i } else { b });
    let cols: Vec<usize> = (0..k).filter(|c| *c != pivot).collect();
    let z = DMatrix::from_fn(k, cols.len(), |r, c| p[(r, cols[c])]);
    (z, defect)
}

/// Lowest `count` eigenvalues and the mean-zero data of the Jacobi operator.
pub fn jacobi_spectrum(s: &GraphSurface, count: usize) -> Result<SpectrumReport> {
    if count < 3 {
        return Err(Error::InvalidParameter("at least three eigenvalues are required".into()));
    }
    let f = assemble(s)?;
    let asymmetry = (&f.k - f.k.transpose()).amax() / f.k.amax().max(f64::MIN_POSITIVE);
    let ev = generalized(&f.k, &f.m)?;
    let (z, projector_defect) = mean_zero_basis(&f.m, &s.grid.constant_coeffs());
    let kz = z.transpose() * &f.k * &z;
    let mz = z.transpose() * &f.m * &z;
    let lz = z.transpose() * &f.lap * &z;
    let lambda1 = generalized(&kz, &mz)?[0];
    let laplace_first = generalized(&lz, &mz)?[0];
    let n = s.grid.n as f64;
    let m = s.metric.mass();
    let rn = s.radius.powi(s.grid.n as i32);
    let hbar = s.mean_of_mean_curvature();
    Ok(SpectrumReport {
        mu0: ev[0],
        mu1: ev[1],
        eigenvalues: ev.into_iter().take(count).collect(),
        lambda1,
        laplace_first,
        lambda1_predicted: n * (n - 1.0) * m / rn,
        mu0_predicted: -hbar * hbar / (n - 1.0) + (n - 1.0) * (n - 2.0) * m / rn,
        asymmetry,
        projector_defect,
        resolution_change: None,
    })
}

/// [`jacobi_spectrum`] with a cross-check at doubled resolution; fails when
/// `lambda1` moves by more than `tolerance` relative to the spectral scale
/// `(n-1)/R^2`.
pub fn jacobi_spectrum_checked(s: &GraphSurface, count: usize, tolerance: f64) -> Result<SpectrumReport> {
    let mut rep = jacobi_spectrum(s, count)?;
    let fine = std::sync::Arc::new(s.grid.refined(2.0)?);
    let mut c = s.coeffs.clone();
    c.resize(fine.dim(), 0.0);
    let fs = GraphSurface::build(fine, s.radius, c, &s.metric)?;
    let rf = jacobi_spectrum(&fs, count)?;
    let scale = (s.grid.n as f64 - 1.0) / (s.radius * s.radius);
    let change = (rf.lambda1 - rep.lambda1).abs() / scale;
    rep.resolution_change = Some(change);
    if change > tolerance {
        return Err(Error::NotConverged(format!("lambda1 changed by {change:e} (relative to (n-1)/R^2) under refinement")));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::grid::SphereGrid;
    use crate::geometry::metric::MetricField;
    use std::sync::Arc;

    #[test]
    fn euclidean_round_sphere() {
        let grid = Arc::new(SphereGrid::full(16, 32, 6).unwrap());
        let r = 10.0;
        let s = GraphSurface::build(grid.clone(), r, vec![0.0; grid.dim()], &MetricField::euclidean(3).unwrap()).unwrap();
        let rep = jacobi_spectrum(&s, 5).unwrap();
        assert!(rep.lambda1.abs() < 1e-8 / (r * r));
        assert!((rep.mu0 + 2.0 / (r * r)).abs() < 1e-12);
        assert!((rep.laplace_first - 2.0 / (r * r)).abs() < 1e-12);
        assert!(rep.asymmetry < 1e-12);
        assert!(rep.projector_defect < 1e-12);
        // l = 1 triple, then l = 2: (6 - 2)/R^2
        assert!((rep.eigenvalues[4] - 4.0 / (r * r)).abs() < 1e-12);
    }

    #[test]
    fn schwarzschild_lambda1() {
        for n in 3..=4 {
            let grid = Arc::new(SphereGrid::axisymmetric(n, 24, 8).unwrap());
            let r = 200.0;
            let m = MetricField::schwarzschild(n, 2.0).unwrap();
            let s = GraphSurface::build(grid.clone(), r, vec![0.0; grid.dim()], &m).unwrap();
            let rep = jacobi_spectrum(&s, 3).unwrap();
            assert!((rep.lambda1_ratio() - 1.0).abs() < 0.05, "n = {n}: {}", rep.lambda1_ratio());
            assert!(rep.mu0 <= rep.lambda1);
            let mterm = (n as f64 - 1.0) * (n as f64 - 2.0) * 2.0 / r.powi(n as i32);
            assert!((rep.mu0 - rep.mu0_predicted).abs() < 0.05 * mterm);
        }
    }
}
