//! Run configuration: the TOML (or JSON) file schema and its resolution
//! into library types.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use dephasing::analysis::{beta_from_occupation, default_step, SweepAxis, SweepParameter};
use dephasing::chain::{ChainParams, CouplingConfig, EdgeConvention};
use dephasing::oracle::{ConvergencePolicy, Truncation};
use dephasing::qubits::BlochAngles;
use serde::{Deserialize, Serialize};

/// A problem with the configuration file or its values (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// N = 10³, t_end = 10³.
    #[default]
    Desk,
    /// N = 10⁴, t_end = 10⁶.
    Paper,
}

impl Profile {
    pub fn n_sites(self) -> usize {
        match self {
            Profile::Desk => 1000,
            Profile::Paper => 10_000,
        }
    }

    pub fn t_end(self) -> f64 {
        match self {
            Profile::Desk => 1e3,
            Profile::Paper => 1e6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_convention: Option<EdgeConvention>,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgen: Option<TgenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlations: Option<CorrelationsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    /// Give either `j0` or `omega0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    /// Give either `beta` or `n0`; neither means the ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// Give either `gamma` or both `gamma_a` and `gamma_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
    #[serde(default)]
    pub distance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSection {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
}

impl Default for StateSection {
    fn default() -> Self {
        StateSection { theta_a: FRAC_PI_4, phi_a: 0.0, theta_b: FRAC_PI_4, phi_b: 0.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either an explicit `values` list or `from`, `to`, `count` and `spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

impl AxisSection {
    fn resolve(&self, name: &str) -> Result<SweepAxis, ConfigError> {
        let values = match (&self.values, self.from, self.to, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n < 2 {
                    return bad(format!("sweep.{name}.count must be at least 2"));
                }
                let f = |i: usize| i as f64 / (n - 1) as f64;
                match self.spacing.unwrap_or_default() {
                    Spacing::Linear => (0..n).map(|i| a + (b - a) * f(i)).collect(),
                    Spacing::Log => {
                        if !(a > 0.0 && b > 0.0) {
                            return bad(format!("sweep.{name}: log spacing needs positive bounds"));
                        }
                        (0..n).map(|i| a * (b / a).powf(f(i))).collect()
                    }
                }
            }
            _ => return bad(format!("sweep.{name}: give either `values` or `from`, `to` and `count`")),
        };
        if values.is_empty() {
            return bad(format!("sweep.{name} has no values"));
        }
        Ok(SweepAxis { parameter: self.parameter, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub rows: AxisSection,
    pub cols: AxisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TgenSection {
    pub distances: Vec<usize>,
    /// Symmetric couplings to scan; the `[coupling]` section when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationsSection {
    /// When set, also write two-time correlations from this origin with
    /// the lag running over the time grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "OracleSection::default_sites")]
    pub n_sites: usize,
    #[serde(default)]
    pub truncation: TruncationKind,
    #[serde(default = "OracleSection::default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "OracleSection::default_step")]
    pub cutoff_step: usize,
    #[serde(default = "OracleSection::default_max_cutoff")]
    pub max_cutoff: usize,
    #[serde(default = "OracleSection::default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "OracleSection::default_t_end")]
    pub t_end: f64,
    #[serde(default = "OracleSection::default_time_step")]
    pub time_step: f64,
}

impl OracleSection {
    fn default_sites() -> usize {
        3
    }
    fn default_cutoff() -> usize {
        12
    }
    fn default_step() -> usize {
        ConvergencePolicy::default().step
    }
    fn default_max_cutoff() -> usize {
        ConvergencePolicy::default().max_cutoff
    }
    fn default_tolerance() -> f64 {
        ConvergencePolicy::default().tolerance
    }
    fn default_t_end() -> f64 {
        30.0
    }
    fn default_time_step() -> f64 {
        0.1
    }

    pub fn truncation(&self) -> Truncation {
        match self.truncation {
            TruncationKind::TotalQuanta => Truncation::TotalQuanta(self.cutoff),
            TruncationKind::PerSite => Truncation::PerSite(self.cutoff),
        }
    }

    pub fn policy(&self) -> ConvergencePolicy {
        ConvergencePolicy { step: self.cutoff_step, max_cutoff: self.max_cutoff, tolerance: self.tolerance }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_end / self.time_step - 1e-9).ceil() as usize;
        (0..=n).map(|k| (k as f64 * self.time_step).min(self.t_end)).collect()
    }
}

impl Default for OracleSection {
    fn default() -> Self {
        toml::from_str("").expect("oracle defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKind {
    #[default]
    TotalQuanta,
    PerSite,
}

/// A configuration with every value made explicit, plus the library types
/// built from it.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub echo: RunConfig,
    pub convention: EdgeConvention,
    pub params: ChainParams,
    pub coupling: CouplingConfig,
    pub angles: BlochAngles,
    pub t_end: f64,
    pub step: f64,
}

pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
    };
    Ok(parsed)
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bad(format!("{name} must be positive and finite, got {v}"))
    }
}

impl RunConfig {
    /// Fills defaults from the profile and checks module preconditions.
    pub fn resolve(&self, profile_flag: Option<Profile>) -> Result<Resolved, ConfigError> {
        let profile = profile_flag.or(self.profile).unwrap_or_default();
        let convention = self.edge_convention.unwrap_or_default();

        let c = &self.chain;
        let n_sites = c.n_sites.unwrap_or(profile.n_sites());
        let j0 = match (c.j0, c.omega0) {
            (Some(j0), None) => j0,
            (None, Some(w)) => 1.0 - w * w,
            (None, None) => return bad("chain: give `j0` or `omega0`"),
            (Some(_), Some(_)) => return bad("chain: give only one of `j0` and `omega0`"),
        };
        if !(0.0..1.0).contains(&j0) {
            return bad(format!("chain: j0 must lie in [0, 1), got {j0}"));
        }
        let beta = match (c.beta, c.n0) {
            (Some(b), None) => b,
            (None, Some(n0)) => {
                beta_from_occupation(n0, (1.0 - j0).sqrt()).map_err(|e| ConfigError(format!("chain: {e}")))?
            }
            (None, None) => f64::INFINITY,
            (Some(_), Some(_)) => return bad("chain: give only one of `beta` and `n0`"),
        };
        let params = ChainParams::new(n_sites, j0, beta).map_err(|e| ConfigError(format!("chain: {e}")))?;

        let k = &self.coupling;
        let (gamma_a, gamma_b) = match (k.gamma, k.gamma_a, k.gamma_b) {
            (Some(g), None, None) => (g, g),
            (None, Some(a), Some(b)) => (a, b),
            _ => return bad("coupling: give `gamma` or both `gamma_a` and `gamma_b`"),
        };
        let coupling = CouplingConfig { gamma_a, gamma_b, distance: k.distance };
        coupling.validate(n_sites).map_err(|e| ConfigError(format!("coupling: {e}")))?;

        let s = self.state.unwrap_or_default();
        let angles = BlochAngles { theta_a: s.theta_a, phi_a: s.phi_a, theta_b: s.theta_b, phi_b: s.phi_b };
        if [s.theta_a, s.phi_a, s.theta_b, s.phi_b].iter().any(|v| !v.is_finite()) {
            return bad("state: angles must be finite");
        }

        let time = self.time.clone().unwrap_or_default();
        let t_end = positive("time.t_end", time.t_end.unwrap_or(profile.t_end()))?;
        let step = positive("time.step", time.step.unwrap_or_else(|| default_step(&params)))?;

        if let Some(sw) = &self.sweep {
            sw.rows.resolve("rows")?;
            sw.cols.resolve("cols")?;
        }
        if let Some(tg) = &self.tgen {
            if tg.distances.is_empty() {
                return bad("tgen.distances is empty");
            }
            if tg.gammas.as_ref().is_some_and(|g| g.is_empty()) {
                return bad("tgen.gammas is empty");
            }
        }

        let echo = RunConfig {
            profile: Some(profile),
            edge_convention: Some(convention),
            chain: ChainSection {
                n_sites: Some(n_sites),
                j0: Some(j0),
                omega0: None,
                // infinity has no JSON form; absence means the ground state
                beta: beta.is_finite().then_some(beta),
                n0: None,
            },
            coupling: CouplingSection { gamma: None, gamma_a: Some(gamma_a), gamma_b: Some(gamma_b), distance: k.distance },
            state: Some(s),
            // the default step depends on the chain, which sweeps vary per cell
            time: Some(TimeSection { t_end: Some(t_end), step: time.step }),
            sweep: self.sweep.clone(),
            tgen: self.tgen.clone(),
            correlations: self.correlations.clone(),
            oracle: self.oracle.clone(),
        };
        Ok(Resolved { echo, convention, params, coupling, angles, t_end, step })
    }
}

impl Resolved {
    pub fn sweep_axes(&self) -> Result<(SweepAxis, SweepAxis, Option<PathBuf>), ConfigError> {
        let Some(sw) = &self.echo.sweep else {
            return bad("the sweep command needs a [sweep] section");
        };
        Ok((sw.rows.resolve("rows")?, sw.cols.resolve("cols")?, sw.journal.clone()))
    }
}

pub fn parameter_name(p: SweepParameter) -> &'static str {
    match p {
        SweepParameter::Gamma => "gamma",
        SweepParameter::Omega0 => "omega0",
        SweepParameter::N0 => "n0",
        SweepParameter::Distance => "distance",
    }
}
