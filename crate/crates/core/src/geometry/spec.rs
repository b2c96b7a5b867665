//! Parameters describing the metric under study.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reflection behaviour of a perturbation pattern under `x -> -x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "mixed" => Ok(Parity::Mixed),
            other => Err(Error::Parse(format!("unknown parity `{other}`"))),
        }
    }
}

/// Radial envelope of a perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialProfile {
    /// Smoothly switched on at `r0`, fully on beyond `2 r0`, decaying like
    /// `r^{2-n-gamma}`.
    Decaying,
    /// Smooth bump supported in `[r0, 4 r0]`.
    Compact,
}

impl std::str::FromStr for RadialProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "decaying" => Ok(RadialProfile::Decaying),
            "compact" => Ok(RadialProfile::Compact),
            other => Err(Error::Parse(format!("unknown radial profile `{other}`"))),
        }
    }
}

/// Angular polynomial times symmetric tensor basis element, see
/// [`PerturbationSpec`] for the enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// `(1 + (x_n/r)^2) delta_ij`
    ConformalEven,
    /// `x_i x_j / r^2`
    RadialEven,
    /// `(x_1 x_2 / r^2) delta_ij`
    QuadrupoleEven,
    /// `(x_n / r) delta_ij`
    ConformalOdd,
    /// `(x_n / r) x_i x_j / r^2`
    RadialOdd,
    /// `(x_1 / r) delta_ij`
    TiltedOdd,
}

pub const EVEN_PATTERNS: [Pattern; 3] = [Pattern::ConformalEven, Pattern::RadialEven, Pattern::QuadrupoleEven];
pub const ODD_PATTERNS: [Pattern; 3] = [Pattern::ConformalOdd, Pattern::RadialOdd, Pattern::TiltedOdd];

impl Pattern {
    /// Invariant under rotations fixing the `x_n` axis.
    pub fn is_axisymmetric(self) -> bool {
        !matches!(self, Pattern::QuadrupoleEven | Pattern::TiltedOdd)
    }
}

/// Deterministic, smooth perturbation `h_ij = g_ij - (g_m)_ij`.
///
/// `h = amplitude * psi(r) * r^{2-n-gamma} * P(x/r) * T_ij(x)` where `psi` is
/// the radial envelope, and `(P, T)` is selected from a fixed enumeration by
/// `parity` and `pattern`: even patterns are
/// `[(1 + (x_n/r)^2) delta, x x / r^2, (x_1 x_2 / r^2) delta]`, odd patterns are
/// `[(x_n/r) delta, (x_n/r) x x / r^2, (x_1/r) delta]`, and `Mixed` adds the
/// even and odd pattern with the same index. Every `|P T| <= 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub parity: Parity,
    pub pattern: usize,
    pub support_radius: f64,
    pub decay_constant: f64,
    pub profile: RadialProfile,
}

impl PerturbationSpec {
    pub fn new(amplitude: f64, parity: Parity, pattern: usize) -> Self {
        PerturbationSpec {
            amplitude,
            parity,
            pattern,
            support_radius: 2.0,
            decay_constant: 0.0,
            profile: RadialProfile::Decaying,
        }
        .with_default_constant()
    }

    /// Sets the stored decay constant to a bound that covers the enumeration
    /// on `r >= 1` (checked by sampling in the tests).
    pub fn with_default_constant(mut self) -> Self {
        self.decay_constant = self.amplitude.abs() * 100.0;
        self
    }

    pub fn with_support(mut self, r0: f64) -> Self {
        self.support_radius = r0;
        self.with_default_constant()
    }

    pub fn with_profile(mut self, profile: RadialProfile) -> Self {
        self.profile = profile;
        self.with_default_constant()
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        let k = self.pattern % 3;
        match self.parity {
            Parity::Even => vec![EVEN_PATTERNS[k]],
            Parity::Odd => vec![ODD_PATTERNS[k]],
            Parity::Mixed => vec![EVEN_PATTERNS[k], ODD_PATTERNS[k]],
        }
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.patterns().iter().all(|p| p.is_axisymmetric())
    }

    pub fn is_even(&self) -> bool {
        self.parity == Parity::Even || self.amplitude == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("perturbation amplitude must be finite".into()));
        }
        if !(self.support_radius > 0.0) {
            return Err(Error::InvalidParameter("perturbation support radius must be positive".into()));
        }
        if !(self.decay_constant >= 0.0) {
            return Err(Error::InvalidParameter("decay constant must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dimension, mass, decay rate, optional perturbation, and coordinate
/// translation of the metric under study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub n: usize,
    pub mass: f64,
    pub gamma: f64,
    pub perturbation: Option<PerturbationSpec>,
    pub translation: Vec<f64>,
}

impl ManifoldSpec {
    pub fn schwarzschild(n: usize, mass: f64) -> Self {
        ManifoldSpec { n, mass, gamma: 1.0, perturbation: None, translation: vec![0.0; n] }
    }

    pub fn euclidean(n: usize) -> Self {
        Self::schwarzschild(n, 0.0)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_perturbation(mut self, p: PerturbationSpec) -> Self {
        self.perturbation = Some(p);
        self
    }

    pub fn with_translation(mut self, q: &[f64]) -> Self {
        self.translation = q.to_vec();
        self
    }

    pub fn is_translated(&self) -> bool {
        self.translation.iter().any(|v| *v != 0.0)
    }

    pub fn is_pure_schwarzschild(&self) -> bool {
        self.perturbation.as_ref().map_or(true, |p| p.amplitude == 0.0) && !self.is_translated()
    }

    /// Asymptotically even in the sense that the scalar curvature odd part
    /// decays fast enough for the center-of-mass limit to exist. Translations of
    /// even data keep this property.
    pub fn is_asymptotically_even(&self) -> bool {
        self.perturbation.as_ref().map_or(true, |p| p.is_even())
    }

    pub fn is_axisymmetric(&self) -> bool {
        let pert = self.perturbation.as_ref().map_or(true, |p| p.amplitude == 0.0 || p.is_axisymmetric());
        let n = self.n;
        let trans = self.translation.iter().take(n.saturating_sub(1)).all(|v| *v == 0.0);
        pert && trans
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!("dimension n = {} but n >= 3 is required", self.n)));
        }
        if self.n > crate::numerics::jet::MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension n = {} exceeds the supported maximum {}",
                self.n,
                crate::numerics::jet::MAX_DIM
            )));
        }
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass m = {} must be finite and >= 0", self.mass)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!("decay rate gamma = {} must lie in (0, 1]", self.gamma)));
        }
        if self.translation.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "translation has {} components, expected {}",
                self.translation.len(),
                self.n
            )));
        }
        if let Some(p) = &self.perturbation {
            p.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(ManifoldSpec::schwarzschild(2, 1.0).validate().is_err());
        assert!(ManifoldSpec::schwarzschild(3, -1.0).validate().is_err());
        assert!(ManifoldSpec::schwarzschild(3, 1.0).with_gamma(1.5).validate().is_err());
        assert!(ManifoldSpec::schwarzschild(3, 1.0).with_gamma(0.0).validate().is_err());
        assert!(ManifoldSpec::schwarzschild(3, 1.0).with_translation(&[1.0, 0.0]).validate().is_err());
        assert!(ManifoldSpec::schwarzschild(5, 1.0).with_gamma(0.5).validate().is_ok());
    }

    #[test]
    fn pattern_enumeration() {
        let p = PerturbationSpec::new(0.1, Parity::Mixed, 1);
        assert_eq!(p.patterns(), vec![Pattern::RadialEven, Pattern::RadialOdd]);
        assert!(p.is_axisymmetric());
        assert!(!PerturbationSpec::new(0.1, Parity::Even, 2).is_axisymmetric());
        assert!(!PerturbationSpec::new(0.1, Parity::Odd, 0).is_even());
    }
}
