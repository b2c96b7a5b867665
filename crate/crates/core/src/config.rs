//! Experiment configuration: a flat `key = value` file with optional
//! `[section]` headers that prefix keys, overridden by `ISOLAB_` environment
//! variables.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cmc::grid::{GridMode, SphereGrid};
use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, Parity, PerturbationSpec, RadialProfile};

pub const ENV_PREFIX: &str = "ISOLAB_";

pub const COMMANDS: [&str; 10] = [
    "report-geometry",
    "hawking-profile",
    "bray-chart",
    "volume-comparison",
    "cmc-solve",
    "jacobi-spectrum",
    "foliation-sweep",
    "center-of-mass",
    "iso-mass",
    "acceptance",
];

/// Every recognized key with its meaning; also the documentation source.
pub const KEYS: [(&str, &str); 28] = [
    ("command", "subcommand to run"),
    ("seed", "deterministic seed; selects the perturbation pattern when none is given"),
    ("threads", "worker threads (0 = all cores)"),
    ("output.dir", "artifact directory"),
    ("manifold.n", "dimension n >= 3"),
    ("manifold.mass", "Schwarzschild mass m >= 0"),
    ("manifold.gamma", "decay rate in (0, 1]"),
    ("manifold.translation", "comma-separated translation of the center"),
    ("perturbation.amplitude", "perturbation amplitude; 0 disables it"),
    ("perturbation.parity", "even | odd | mixed"),
    ("perturbation.pattern", "pattern index within the parity class"),
    ("perturbation.support", "inner radius of the perturbation support"),
    ("perturbation.profile", "decaying | compact"),
    ("grid.mode", "full | axisymmetric"),
    ("grid.n_theta", "colatitude nodes (full mode)"),
    ("grid.n_phi", "longitude nodes (full mode)"),
    ("grid.nodes", "colatitude nodes (axisymmetric mode)"),
    ("grid.lmax", "maximal spherical harmonic degree"),
    ("ladder.radii", "comma-separated radii"),
    ("ladder.volumes", "comma-separated volumes"),
    ("ladder.tau", "comma-separated tau values"),
    ("ladder.offsets", "comma-separated competitor offsets in multiples of r"),
    ("newton.tolerance", "relative residual tolerance"),
    ("newton.max_iterations", "Newton iteration cap"),
    ("cmc.target", "target mean curvature (default: centered sphere value)"),
    ("cmc.seed_degree", "spherical harmonic degree of the initial graph"),
    ("cmc.seed_amplitude", "sup norm of the initial graph as a fraction of R"),
    ("spectrum.count", "number of reported Jacobi eigenvalues"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub mode: GridMode,
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes: usize,
    pub lmax: usize,
}

impl GridConfig {
    pub fn build(&self, n: usize) -> Result<SphereGrid> {
        match self.mode {
            GridMode::Full => SphereGrid::full(self.n_theta, self.n_phi, self.lmax),
            GridMode::Axisymmetric => SphereGrid::axisymmetric(n, self.nodes, self.lmax),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub manifold: ManifoldSpec,
    pub grid: GridConfig,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub taus: Vec<f64>,
    pub offsets: Vec<f64>,
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    pub cmc_target: Option<f64>,
    pub cmc_seed_degree: usize,
    pub cmc_seed_amplitude: f64,
    pub spectrum_count: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

/// Raw key-value pairs in key order.
pub type RawConfig = BTreeMap<String, String>;

/// Parses the text format. Later assignments to a key win.
pub fn parse_text(text: &str) -> Result<RawConfig> {
    let mut out = RawConfig::new();
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse(format!("line {}: unterminated section header", i + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", i + 1)));
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// `ISOLAB_GRID__N_THETA=32` sets `grid.n_theta`; `__` separates sections.
pub fn env_overrides(vars: impl IntoIterator<Item = (String, String)>) -> RawConfig {
    vars.into_iter()
        .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|rest| (rest.to_ascii_lowercase().replace("__", "."), v)))
        .collect()
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("{key}: `{s}` is not a number"))))
        .collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::Parse(format!("{key}: cannot parse `{v}`")))
}

impl ExperimentConfig {
    /// Builds a configuration from merged raw values. Unknown keys are errors.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        if let Some(k) = raw.keys().find(|k| !KEYS.iter().any(|(name, _)| name == k)) {
            return Err(Error::Parse(format!("unknown configuration key `{k}`")));
        }
        let get = |k: &str| raw.get(k).map(String::as_str);
        let n: usize = get("manifold.n").map_or(Ok(3), |v| num("manifold.n", v))?;
        let mass = get("manifold.mass").map_or(Ok(2.0), |v| num("manifold.mass", v))?;
        let gamma = get("manifold.gamma").map_or(Ok(1.0), |v| num("manifold.gamma", v))?;
        let seed: u64 = get("seed").map_or(Ok(0), |v| num("seed", v))?;
        let mut spec = ManifoldSpec::schwarzschild(n, mass).with_gamma(gamma);
        if let Some(v) = get("manifold.translation") {
            spec = spec.with_translation(&list("manifold.translation", v)?);
        }
        let amplitude: f64 = get("perturbation.amplitude").map_or(Ok(0.0), |v| num("perturbation.amplitude", v))?;
        if amplitude != 0.0 {
            let parity: Parity = get("perturbation.parity").map_or(Ok(Parity::Even), str::parse)?;
            let pattern = match get("perturbation.pattern") {
                Some(v) => num("perturbation.pattern", v)?,
                None => (seed % 3) as usize,
            };
            let mut p = PerturbationSpec::new(amplitude, parity, pattern);
            if let Some(v) = get("perturbation.support") {
                p = p.with_support(num("perturbation.support", v)?);
            }
            if let Some(v) = get("perturbation.profile") {
                p = p.with_profile(v.parse::<RadialProfile>()?);
            }
            spec = spec.with_perturbation(p);
        }
        let mode = match get("grid.mode") {
            Some("full") => GridMode::Full,
            Some("axisymmetric") => GridMode::Axisymmetric,
            Some(other) => return Err(Error::Parse(format!("grid.mode: unknown mode `{other}`"))),
            None if n == 3 && !spec.is_axisymmetric() => GridMode::Full,
            None => GridMode::Axisymmetric,
        };
        let default_lmax = if mode == GridMode::Full { 10 } else { 16 };
        let grid = GridConfig {
            mode,
            n_theta: get("grid.n_theta").map_or(Ok(24), |v| num("grid.n_theta", v))?,
            n_phi: get("grid.n_phi").map_or(Ok(48), |v| num("grid.n_phi", v))?,
            nodes: get("grid.nodes").map_or(Ok(48), |v| num("grid.nodes", v))?,
            lmax: get("grid.lmax").map_or(Ok(default_lmax), |v| num("grid.lmax", v))?,
        };
        let ladder = |k: &str| get(k).map_or(Ok(Vec::new()), |v| list(k, v));
        Ok(ExperimentConfig {
            command: get("command").unwrap_or("acceptance").to_string(),
            manifold: spec,
            grid,
            radii: ladder("ladder.radii")?,
            volumes: ladder("ladder.volumes")?,
            taus: ladder("ladder.tau")?,
            offsets: ladder("ladder.offsets")?,
            newton_tolerance: get("newton.tolerance").map_or(Ok(1e-10), |v| num("newton.tolerance", v))?,
            newton_max_iterations: get("newton.max_iterations").map_or(Ok(40), |v| num("newton.max_iterations", v))?,
            cmc_target: get("cmc.target").map(|v| num("cmc.target", v)).transpose()?,
            cmc_seed_degree: get("cmc.seed_degree").map_or(Ok(2), |v| num("cmc.seed_degree", v))?,
            cmc_seed_amplitude: get("cmc.seed_amplitude").map_or(Ok(0.05), |v| num("cmc.seed_amplitude", v))?,
            spectrum_count: get("spectrum.count").map_or(Ok(5), |v| num("spectrum.count", v))?,
            output_dir: PathBuf::from(get("output.dir").unwrap_or("isolab-out")),
            seed,
            threads: get("threads").map_or(Ok(0), |v| num("threads", v))?,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_raw(&parse_text(text)?)
    }

    /// Radii of the ladder, or the command default when none were given.
    pub fn radii_or(&self, default: &[f64]) -> Vec<f64> {
        if self.radii.is_empty() {
            default.to_vec()
        } else {
            self.radii.clone()
        }
    }

    pub fn taus_or(&self, default: &[f64]) -> Vec<f64> {
        if self.taus.is_empty() {
            default.to_vec()
        } else {
            self.taus.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Schema and range checks. Errors reject the run; warnings flag parameters
/// outside the regime the acceptance suite covers.
pub fn validate(c: &ExperimentConfig) -> Diagnostics {
    let mut d = Diagnostics::default();
    if !COMMANDS.contains(&c.command.as_str()) {
        d.errors.push(format!("unknown command `{}`; expected one of {}", c.command, COMMANDS.join(", ")));
    }
    if let Err(e) = c.manifold.validate() {
        d.errors.push(e.to_string());
    }
    let n = c.manifold.n;
    if c.command == "iso-mass" && n != 3 {
        d.errors.push(format!(
            "iso-mass needs n = 3: the isoperimetric mass is defined here through the three-dimensional quasi-mass 2/A (V - A^{{3/2}}/(6 sqrt(pi))); got n = {n}"
        ));
    }
    if c.grid.mode == GridMode::Full && n != 3 {
        d.errors.push(format!("full grids are only available for n = 3 (got n = {n})"));
    }
    if c.grid.mode == GridMode::Axisymmetric && !c.manifold.is_axisymmetric() {
        d.errors.push("the manifold is not axisymmetric; use grid.mode = full".into());
    }
    if c.grid.lmax < 2 {
        d.errors.push("grid.lmax must be at least 2".into());
    }
    if c.radii.iter().any(|r| !(*r > 0.0)) {
        d.errors.push("ladder.radii must be positive".into());
    }
    if c.volumes.iter().any(|v| !(*v > 0.0)) {
        d.errors.push("ladder.volumes must be positive".into());
    }
    if c.taus.iter().any(|t| !(*t > 1.0)) {
        d.errors.push("ladder.tau values must exceed 1".into());
    }
    if c.offsets.iter().any(|o| !(*o >= 0.0)) {
        d.errors.push("ladder.offsets must be non-negative".into());
    }
    if !(c.newton_tolerance > 0.0) {
        d.errors.push("newton.tolerance must be positive".into());
    }
    if !(c.cmc_seed_amplitude >= 0.0 && c.cmc_seed_amplitude < 0.5) {
        d.errors.push("cmc.seed_amplitude must lie in [0, 0.5)".into());
    }
    if c.spectrum_count < 3 {
        d.errors.push("spectrum.count must be at least 3".into());
    }
    if !d.errors.is_empty() {
        return d;
    }
    let rh = if c.manifold.mass > 0.0 { (c.manifold.mass / 2.0).powf(1.0 / (n as f64 - 2.0)) } else { 0.0 };
    let cmc = matches!(c.command.as_str(), "cmc-solve" | "jacobi-spectrum" | "foliation-sweep" | "center-of-mass");
    if cmc {
        if let Some(r) = c.radii.iter().find(|r| **r < 20.0 * rh.max(1.0)) {
            d.warnings.push(format!("radius {r} is below 20 r_h, where the CMC leaves are verified"));
        }
    }
    if c.command == "center-of-mass" && !c.radii.is_empty() && c.radii.iter().copied().fold(0.0, f64::max) < 100.0 {
        d.warnings.push("center-of-mass flux integrals need a radius >= 100".into());
    }
    if c.manifold.mass == 0.0 && matches!(c.command.as_str(), "bray-chart" | "volume-comparison" | "center-of-mass") {
        d.warnings.push("m = 0: there is no horizon and these quantities degenerate".into());
    }
    if c.manifold.perturbation.as_ref().is_some_and(|p| p.amplitude.abs() > 1.0) {
        d.warnings.push("perturbation amplitude above 1 leaves the tested regime".into());
    }
    if c.grid.lmax > 24 {
        d.warnings.push("grid.lmax above 24 has not been exercised".into());
    }
    d
}

/// Canonical text form: the resolved values, one `key = value` per line.
pub fn to_text(c: &ExperimentConfig) -> String {
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
    let mut lines = vec![
        format!("command = {}", c.command),
        format!("seed = {}", c.seed),
        format!("threads = {}", c.threads),
        format!("output.dir = {}", c.output_dir.display()),
        format!("manifold.n = {}", c.manifold.n),
        format!("manifold.mass = {:?}", c.manifold.mass),
        format!("manifold.gamma = {:?}", c.manifold.gamma),
        format!("manifold.translation = {}", fmt(&c.manifold.translation)),
    ];
    if let Some(p) = &c.manifold.perturbation {
        lines.push(format!("perturbation.amplitude = {:?}", p.amplitude));
        lines.push(format!("perturbation.parity = {}", format!("{:?}", p.parity).to_ascii_lowercase()));
        lines.push(format!("perturbation.pattern = {}", p.pattern));
        lines.push(format!("perturbation.support = {:?}", p.support_radius));
        lines.push(format!("perturbation.profile = {}", format!("{:?}", p.profile).to_ascii_lowercase()));
    }
    let mode = match c.grid.mode {
        GridMode::Full => "full",
        GridMode::Axisymmetric => "axisymmetric",
    };
    lines.extend([
        format!("grid.mode = {mode}"),
        format!("grid.n_theta = {}", c.grid.n_theta),
        format!("grid.n_phi = {}", c.grid.n_phi),
        format!("grid.nodes = {}", c.grid.nodes),
        format!("grid.lmax = {}", c.grid.lmax),
    ]);
    for (k, v) in [("ladder.radii", &c.radii), ("ladder.volumes", &c.volumes), ("ladder.tau", &c.taus), ("ladder.offsets", &c.offsets)] {
        if !v.is_empty() {
            lines.push(format!("{k} = {}", fmt(v)));
        }
    }
    lines.push(format!("newton.tolerance = {:?}", c.newton_tolerance));
    lines.push(format!("newton.max_iterations = {}", c.newton_max_iterations));
    if let Some(t) = c.cmc_target {
        lines.push(format!("cmc.target = {t:?}"));
    }
    lines.push(format!("cmc.seed_degree = {}", c.cmc_seed_degree));
    lines.push(format!("cmc.seed_amplitude = {:?}", c.cmc_seed_amplitude));
    lines.push(format!("spectrum.count = {}", c.spectrum_count));
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_prefix_keys() {
        let raw = parse_text("command = bray-chart # trailing\n[manifold]\nn = 4\nmass=1.5\n[ladder]\nradii = 10, 20\n").unwrap();
        assert_eq!(raw["manifold.n"], "4");
        let c = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(c.manifold.n, 4);
        assert_eq!(c.radii, [10.0, 20.0]);
        assert_eq!(c.grid.mode, GridMode::Axisymmetric);
        assert!(validate(&c).is_ok());
    }

    #[test]
    fn environment_overrides() {
        let env = env_overrides([("ISOLAB_GRID__N_THETA".to_string(), "32".to_string()), ("PATH".into(), "/bin".into())]);
        assert_eq!(env.len(), 1);
        assert_eq!(env["grid.n_theta"], "32");
    }

    #[test]
    fn rejections() {
        for (text, needle) in [
            ("manifold.n = 2", "n >= 3"),
            ("manifold.gamma = 1.5", "(0, 1]"),
            ("command = iso-mass\nmanifold.n = 4", "iso-mass needs n = 3"),
            ("command = nope", "unknown command"),
        ] {
            let d = validate(&ExperimentConfig::from_text(text).unwrap());
            assert!(d.errors.iter().any(|e| e.contains(needle)), "{text}: {d:?}");
        }
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("manifold.n = three").is_err());
    }

    #[test]
    fn warnings_outside_verified_regime() {
        let d = validate(&ExperimentConfig::from_text("command = cmc-solve\nladder.radii = 5").unwrap());
        assert!(d.is_ok() && !d.warnings.is_empty());
    }

    #[test]
    fn seed_selects_pattern() {
        let c = ExperimentConfig::from_text("seed = 5\nperturbation.amplitude = 0.3\nperturbation.parity = odd").unwrap();
        assert_eq!(c.manifold.perturbation.unwrap().pattern, 2);
    }

    #[test]
    fn canonical_text_round_trip() {
        let c = ExperimentConfig::from_text(
            "command = foliation-sweep\nseed = 4\nperturbation.amplitude = 0.5\nperturbation.parity = mixed\nladder.radii = 50, 100.5\ncmc.target = 0.04",
        )
        .unwrap();
        assert_eq!(ExperimentConfig::from_text(&to_text(&c)).unwrap(), c);
    }
}
