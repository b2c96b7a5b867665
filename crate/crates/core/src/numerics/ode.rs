//! Adaptive Dormand-Prince 5(4) integrator.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-14, max_steps: 200_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted step of the trajectory.
#[derive(Clone, Debug)]
pub struct OdePoint {
    pub t: f64,
    pub y: Vec<f64>,
}

/// Integrates `y' = f(t, y)` from `t0` through each of the increasing `targets`,
/// landing on every target exactly. Returns every accepted step (targets
/// included), in order.
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], targets: &[f64], opts: OdeOptions) -> Result<Vec<OdePoint>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = vec![OdePoint { t, y: y.clone() }];
    let end = *targets.last().ok_or_else(|| Error::Integration("no targets".into()))?;
    if end <= t0 {
        return Err(Error::Integration("targets must exceed the initial time".into()));
    }
    let mut h = (end - t0) * 1e-3;
    let mut k = vec![vec![0.0; dim]; 7];
    let mut next_target = 0;
    let mut steps = 0;
    let mut fsal: Option<Vec<f64>> = None;
    while next_target < targets.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
        }
        let target = targets[next_target];
        let mut hit = false;
        if t + h >= target {
            h = target - t;
            hit = true;
        }
        k[0] = match fsal.take() {
            Some(v) => v,
            None => f(t, &y)?,
        };
        let mut stage = vec![0.0; dim];
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                stage[i] = acc;
            }
            k[s] = f(t + C[s] * h, &stage)?;
        }
        let mut err = 0.0f64;
        let mut ynew = vec![0.0; dim];
        for i in 0..dim {
            let mut y5 = y[i];
            let mut y4 = y[i];
            for s in 0..7 {
                y5 += h * B5[s] * k[s][i];
                y4 += h * B4[s] * k[s][i];
            }
            ynew[i] = y5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5.abs());
            err = err.max(((y5 - y4) / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
        }
        if err <= 1.0 {
            t = if hit { target } else { t + h };
            y = ynew;
            fsal = Some(k[6].clone());
            out.push(OdePoint { t, y: y.clone() });
            if hit {
                next_target += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !hit {
                h *= fac;
            } else {
                h = (h * fac).max((end - t0) * 1e-12);
            }
        } else {
            h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration(format!("step rejected to underflow at t = {t}")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_hits_targets() {
        let pts = integrate(|_, y| Ok(vec![y[0]]), 0.0, &[1.0], &[0.5, 1.0, 2.0], OdeOptions::default()).unwrap();
        let at = |t: f64| pts.iter().find(|p| p.t == t).unwrap().y[0];
        assert!((at(1.0) - 1f64.exp()).abs() < 1e-9);
        assert!((at(2.0) - 2f64.exp()).abs() < 1e-8);
        assert!((at(0.5) - 0.5f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let pts = integrate(|_, y| Ok(vec![y[1], -y[0]]), 0.0, &[1.0, 0.0], &[10.0], OdeOptions::default()).unwrap();
        let last = &pts.last().unwrap().y;
        assert!((last[0] - 10f64.cos()).abs() < 1e-8);
    }
}
