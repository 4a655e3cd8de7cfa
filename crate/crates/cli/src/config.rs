use hrect::carleson::DichotomyConfig;
use hrect::coeff::{CoeffKind, Exponent, Family, FitOptions};
use hrect::corona::CoronaParams;
use hrect::curve::{CurveConfig, DEFAULT_C0};
use hrect::hgroup::AmbientGroup;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

pub const SEED_VAR: &str = "HRECT_SEED";
pub const THREADS_VAR: &str = "HRECT_THREADS";

/// A configuration problem, reported with the offending field path.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "invalid config: {}", self.message)
        } else {
            write!(f, "invalid config at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), message: message.into() }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; does not affect any output.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub curve: CurveSection,
    #[serde(default)]
    pub cloud: CloudSection,
    #[serde(default)]
    pub cubes: CubesSection,
    #[serde(default)]
    pub coeff: CoeffSection,
    #[serde(default)]
    pub carleson: CarlesonSection,
    #[serde(default)]
    pub corona: CoronaSection,
    #[serde(default)]
    pub io: IoSection,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    #[serde(rename = "C0", default = "default_c0")]
    pub c0: f64,
    #[serde(default = "default_generations")]
    pub generations: usize,
}

fn default_c0() -> f64 {
    DEFAULT_C0
}

fn default_generations() -> usize {
    5
}

impl Default for CurveSection {
    fn default() -> Self {
        Self { c0: DEFAULT_C0, generations: default_generations() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudSource {
    /// Samples of the Juillet curve at `curve.generations`.
    Juillet,
    /// Equally spaced points on the unit segment of the x-axis.
    Segment,
    /// Middle-half Cantor set on the t-axis.
    Cantor,
    /// Read from `io.cloud`.
    File,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudSection {
    #[serde(default = "default_source")]
    pub source: CloudSource,
    /// Sampling step along the curve; defaults to the finest segment length.
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Random balls drawn for the regularity profile.
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_source() -> CloudSource {
    CloudSource::Juillet
}

fn default_points() -> usize {
    128
}

fn default_levels() -> usize {
    6
}

fn default_trials() -> usize {
    200
}

impl Default for CloudSection {
    fn default() -> Self {
        Self { source: default_source(), step: None, points: default_points(), levels: default_levels(), trials: default_trials() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubesSection {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_rho() -> f64 {
    0.5
}

fn default_lambda() -> f64 {
    2.0
}

impl Default for CubesSection {
    fn default() -> Self {
        Self { rho: default_rho(), lambda: default_lambda() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSection {
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default = "default_p")]
    pub p: Vec<Exponent>,
    /// Angle seeds of the line search.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_opt_points")]
    pub max_opt_points: usize,
}

fn default_families() -> Vec<Family> {
    vec![Family::BetaHorizontal, Family::BetaStratified]
}

fn default_p() -> Vec<Exponent> {
    vec![Exponent::One, Exponent::Inf]
}

fn default_seeds() -> usize {
    FitOptions::default().angle_seeds
}

fn default_restarts() -> usize {
    FitOptions::default().restarts
}

fn default_max_opt_points() -> usize {
    256
}

impl Default for CoeffSection {
    fn default() -> Self {
        Self {
            families: default_families(),
            p: default_p(),
            seeds: default_seeds(),
            restarts: default_restarts(),
            max_opt_points: default_max_opt_points(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlesonSection {
    /// Exponent of the cube sums.
    #[serde(default = "default_q")]
    pub q: f64,
    /// Generation whose cubes serve as roots; the top generation if unset.
    #[serde(default)]
    pub root_generation: Option<i32>,
    #[serde(rename = "A", default = "default_a")]
    pub a: f64,
    #[serde(default)]
    pub a_sensitivity: Vec<f64>,
}

fn default_q() -> f64 {
    2.0
}

fn default_a() -> f64 {
    5.0
}

impl Default for CarlesonSection {
    fn default() -> Self {
        Self { q: default_q(), root_generation: None, a: default_a(), a_sensitivity: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoronaSection {
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
    #[serde(rename = "K0", default = "default_k0")]
    pub k0: f64,
    /// Sampled pairs per tree in the projection check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Accept `K` below the admissible bound (the projection check is skipped).
    #[serde(default)]
    pub exploratory: bool,
}

fn default_eta() -> f64 {
    0.1
}

fn default_k0() -> f64 {
    4.0
}

fn default_samples() -> usize {
    10_000
}

impl Default for CoronaSection {
    fn default() -> Self {
        Self { eta: default_eta(), epsilon: None, k: None, k0: default_k0(), samples: default_samples(), exploratory: false }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    /// Input cloud for `cloud.source = "file"`, relative to the config file.
    #[serde(default)]
    pub cloud: Option<PathBuf>,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parses TOML text; `base` resolves relative input paths.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| invalid("", e.message().to_string()))?;
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            invalid(if path == "." { String::new() } else { path }, inner.message().to_string())
        })?;
        if let Some(p) = &cfg.io.cloud {
            if p.is_relative() {
                cfg.io.cloud = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Re-validates every parameter against the owning module's rules.
    pub fn validate(&self) -> Result<(), ConfigError> {
        lib(AmbientGroup::new(self.n, self.k))?;
        lib(CurveConfig::new(self.curve.c0, self.curve.generations))?;
        if self.curve.generations > 10 {
            return Err(invalid("curve.generations", "at most 10"));
        }
        if let Some(step) = self.cloud.step {
            if !(step > 0.0) {
                return Err(invalid("cloud.step", "must be positive"));
            }
        }
        if self.cloud.points < 2 {
            return Err(invalid("cloud.points", "at least 2"));
        }
        if self.cloud.levels == 0 || self.cloud.levels > 16 {
            return Err(invalid("cloud.levels", "must lie in 1..=16"));
        }
        if self.cloud.source == CloudSource::File && self.io.cloud.is_none() {
            return Err(invalid("io.cloud", "required when cloud.source = \"file\""));
        }
        if self.cloud.source != CloudSource::File && self.n != 1 {
            return Err(invalid("cloud.source", "built-in clouds live in the first Heisenberg group; use n = 1"));
        }
        if !(self.cubes.rho > 0.0 && self.cubes.rho < 1.0) {
            return Err(invalid("cubes.rho", "must lie in (0, 1)"));
        }
        if !(self.cubes.lambda >= 1.0) {
            return Err(invalid("cubes.lambda", "must be at least 1"));
        }
        if self.coeff.families.is_empty() {
            return Err(invalid("coeff.families", "must not be empty"));
        }
        if self.coeff.p.is_empty() {
            return Err(invalid("coeff.p", "must not be empty"));
        }
        if self.coeff.max_opt_points < 2 {
            return Err(invalid("coeff.max_opt_points", "at least 2"));
        }
        if !(self.carleson.q > 0.0) {
            return Err(invalid("carleson.q", "must be positive"));
        }
        if !(self.carleson.a > 1.0) {
            return Err(invalid("carleson.A", "must exceed 1"));
        }
        lib(self.corona_params())?;
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn kinds(&self) -> Vec<CoeffKind> {
        let mut out = Vec::new();
        for &family in &self.coeff.families {
            for &p in &self.coeff.p {
                let kind = CoeffKind::new(family, p);
                if !out.contains(&kind) {
                    out.push(kind);
                }
            }
        }
        out
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            k: self.k,
            angle_seeds: self.coeff.seeds,
            restarts: self.coeff.restarts,
            max_opt_points: self.coeff.max_opt_points,
            ..FitOptions::default()
        }
    }

    pub fn corona_params(&self) -> hrect::Result<CoronaParams> {
        let c = &self.corona;
        let epsilon = c.epsilon.unwrap_or((0.05f64).min(c.eta / 4.0));
        let k = c.k.unwrap_or_else(|| CoronaParams::k_bound(c.k0, c.eta));
        if c.exploratory {
            CoronaParams::exploratory(c.eta, epsilon, k, c.k0)
        } else {
            CoronaParams::new(c.eta, epsilon, k, c.k0)
        }
    }

    pub fn dichotomy(&self, generations: usize) -> DichotomyConfig {
        DichotomyConfig {
            c0: self.curve.c0,
            generations,
            a: self.carleson.a,
            a_sensitivity: self.carleson.a_sensitivity.clone(),
            lambda: self.cubes.lambda,
            rho: self.cubes.rho,
            fit: self.fit_options(),
            ..DichotomyConfig::default()
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_toml("", Path::new(".")).expect("empty config is valid")
    }
}

fn lib<T>(r: hrect::Result<T>) -> Result<T, ConfigError> {
    r.map_err(|e| match e {
        hrect::Error::InvalidParameter { field, reason } => invalid(field, reason),
        hrect::Error::KConstraint { k, bound } => {
            invalid("corona.K", format!("must satisfy K ≥ 2·K0·(1 + 1/eta) + 1 = {bound} (got {k}); set corona.exploratory = true to skip"))
        }
        other => invalid("", other.to_string()),
    })
}
