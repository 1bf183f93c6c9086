use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::estimate::AnalyticSequence;
use crate::models::{matrix_bytes, FourierMultiplier, DEFAULT_BUDGET_MB};
use crate::trend::TrendPolicy;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest dyadic horizon a config may request.
pub const MAX_HORIZON: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelSpec,
    #[serde(default)]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget_mb: u64,
    /// Run the invariant suite alongside the estimators.
    #[serde(default)]
    pub invariants: bool,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET_MB
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Harmonic {
        #[serde(default = "one")]
        c: f64,
    },
    Oscillator {
        #[serde(default = "one")]
        scale: f64,
    },
    PowerLog {
        c: f64,
        a: f64,
        b: f64,
    },
    Torus {
        n: u32,
        cutoff: f64,
    },
    NcTorus {
        theta: f64,
        cutoff: f64,
    },
    Matrix {
        n: u32,
        half_width: i64,
        f: Vec<FourierCoefficient>,
    },
    SequenceFile {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<TailSpec>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierCoefficient {
    pub mode: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub c: f64,
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

pub const MODEL_KINDS: [&str; 7] =
    ["harmonic", "oscillator", "power_log", "torus", "nc_torus", "matrix", "sequence_file"];

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Harmonic { .. } => "harmonic",
            ModelSpec::Oscillator { .. } => "oscillator",
            ModelSpec::PowerLog { .. } => "power_log",
            ModelSpec::Torus { .. } => "torus",
            ModelSpec::NcTorus { .. } => "nc_torus",
            ModelSpec::Matrix { .. } => "matrix",
            ModelSpec::SequenceFile { .. } => "sequence_file",
        }
    }

    pub fn analytic(&self) -> Option<AnalyticSequence> {
        match *self {
            ModelSpec::Harmonic { c } => Some(AnalyticSequence::Harmonic { c }),
            ModelSpec::Oscillator { scale } => Some(AnalyticSequence::Oscillator { scale }),
            ModelSpec::PowerLog { c, a, b } => Some(AnalyticSequence::PowerLog { c, a, b }),
            _ => None,
        }
    }

    pub fn multiplier(&self) -> Option<crate::Result<FourierMultiplier>> {
        match self {
            ModelSpec::Matrix { n, f, .. } => Some(FourierMultiplier::new(
                *n,
                f.iter().map(|c| (c.mode.clone(), Complex64::new(c.re, c.im))).collect(),
            )),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    DixmierAlpha {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        checkpoints: Option<Vec<u64>>,
        #[serde(default = "yes")]
        extrapolate: bool,
    },
    ZetaResidue {
        #[serde(default = "default_k_max")]
        k_max: u64,
        #[serde(default = "default_points")]
        points: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        checkpoints: Option<Vec<u64>>,
    },
    HeatRaw(HeatSpec),
    HeatCesaro(HeatSpec),
}

fn yes() -> bool {
    true
}

fn default_k_max() -> u64 {
    200
}

fn default_points() -> u64 {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSpec {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_per_decade")]
    pub per_decade: u32,
    #[serde(default = "one")]
    pub alpha: f64,
}

fn default_per_decade() -> u32 {
    4
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_eps_conv")]
    pub eps_conv: f64,
    #[serde(default = "default_eps_osc")]
    pub eps_osc: f64,
    /// Relative cross-method tolerance of the measurability verdict.
    #[serde(default = "default_eps_conv")]
    pub measurability: f64,
}

fn default_window() -> usize {
    TrendPolicy::default().window
}

fn default_eps_conv() -> f64 {
    TrendPolicy::default().eps_conv
}

fn default_eps_osc() -> f64 {
    TrendPolicy::default().eps_osc
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            window: default_window(),
            eps_conv: default_eps_conv(),
            eps_osc: default_eps_osc(),
            measurability: default_eps_conv(),
        }
    }
}

impl Tolerances {
    pub fn policy(&self) -> TrendPolicy {
        TrendPolicy { window: self.window, eps_conv: self.eps_conv, eps_osc: self.eps_osc }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// One schema violation and where it sits in the config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigViolation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parses JSON text and reports every semantic violation at once.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError {
            violations: vec![ConfigViolation {
                path: if path == "." { "(root)".into() } else { path },
                message: e.into_inner().to_string(),
            }],
        }
    })?;
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { violations })
    }
}

pub fn emit_config(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

pub fn validate(config: &ExperimentConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    let mut bad = |path: &str, message: String| out.push(ConfigViolation { path: path.into(), message });
    if config.schema_version != SCHEMA_VERSION {
        bad(
            "schema_version",
            format!("unsupported schema version {} (expected {SCHEMA_VERSION})", config.schema_version),
        );
    }
    if config.budget_mb == 0 {
        bad("budget_mb", "budget must be positive".into());
    }
    let positive = |x: f64| x > 0.0 && x.is_finite();
    match &config.model {
        ModelSpec::Harmonic { c } if !positive(*c) => bad("model.c", format!("must be positive, got {c}")),
        ModelSpec::Oscillator { scale } if !positive(*scale) => {
            bad("model.scale", format!("must be positive, got {scale}"))
        }
        ModelSpec::PowerLog { c, a, b } => {
            if !positive(*c) {
                bad("model.c", format!("must be positive, got {c}"));
            }
            if !positive(*a) {
                bad("model.a", format!("must be positive, got {a}"));
            }
            if !(*b >= 0.0 && *b <= *a) {
                bad("model.b", format!("must lie in [0, a] for a nonincreasing sequence, got {b}"));
            }
        }
        ModelSpec::Torus { n, cutoff } => {
            if !(1..=3).contains(n) {
                bad("model.n", format!("dimension must be 1, 2 or 3, got {n}"));
            }
            if !(*cutoff >= 1.0 && cutoff.is_finite()) {
                bad("model.cutoff", format!("cutoff must be >= 1, got {cutoff}"));
            }
        }
        ModelSpec::NcTorus { theta, cutoff } => {
            if !(0.0..1.0).contains(theta) {
                bad("model.theta", format!("must lie in [0, 1), got {theta}"));
            }
            if !(*cutoff >= 1.0 && cutoff.is_finite()) {
                bad("model.cutoff", format!("cutoff must be >= 1, got {cutoff}"));
            } else if (std::f64::consts::PI * cutoff * cutoff * 8.0) / (1u64 << 20) as f64 > config.budget_mb as f64 {
                bad(
                    "model.cutoff",
                    format!("spectrum for cutoff {cutoff} exceeds the budget of {} MB", config.budget_mb),
                );
            }
        }
        ModelSpec::Matrix { n, half_width, f } => {
            if !(1..=2).contains(n) {
                bad("model.n", format!("matrix models support n = 1 or 2, got {n}"));
            }
            if *half_width < 1 {
                bad("model.half_width", format!("must be >= 1, got {half_width}"));
            } else if (1..=2).contains(n) {
                let size = (2 * *half_width + 1).pow(*n);
                let mb = matrix_bytes(size as usize).div_ceil(1 << 20);
                if mb > config.budget_mb {
                    bad(
                        "model.half_width",
                        format!("matrix of size {size} needs {mb} MB, budget {} MB", config.budget_mb),
                    );
                }
            }
            if f.is_empty() {
                bad("model.f", "at least one Fourier coefficient is required".into());
            }
            for (i, c) in f.iter().enumerate() {
                if c.mode.len() != *n as usize {
                    bad(&format!("model.f[{i}].mode"), format!("expected {n} components, got {}", c.mode.len()));
                }
                if !(c.re.is_finite() && c.im.is_finite()) {
                    bad(&format!("model.f[{i}]"), "coefficient must be finite".into());
                }
            }
        }
        ModelSpec::SequenceFile { tail: Some(t), .. } => {
            if !positive(t.c) {
                bad("model.tail.c", format!("must be positive, got {}", t.c));
            }
            if !positive(t.a) {
                bad("model.tail.a", format!("must be positive, got {}", t.a));
            }
        }
        _ => {}
    }
    let tol = &config.tolerances;
    if tol.window < 2 {
        bad("tolerances.window", format!("must be >= 2, got {}", tol.window));
    }
    if !positive(tol.eps_conv) {
        bad("tolerances.eps_conv", format!("must be positive, got {}", tol.eps_conv));
    }
    if !(tol.eps_osc >= tol.eps_conv && tol.eps_osc.is_finite()) {
        bad("tolerances.eps_osc", format!("must be finite and >= eps_conv, got {}", tol.eps_osc));
    }
    if !positive(tol.measurability) {
        bad("tolerances.measurability", format!("must be positive, got {}", tol.measurability));
    }
    for (i, e) in config.estimators.iter().enumerate() {
        let at = |field: &str| format!("estimators[{i}].{field}");
        match e {
            EstimatorSpec::DixmierAlpha { horizon, checkpoints, .. } => {
                if let Some(h) = horizon {
                    if *h < 2 || *h > MAX_HORIZON {
                        bad(&at("horizon"), format!("must lie in [2, 2^40], got {h}"));
                    }
                }
                if let Some(ks) = checkpoints {
                    check_schedule(ks, &at("checkpoints"), &mut bad);
                }
                if horizon.is_some() && checkpoints.is_some() {
                    bad(&at("checkpoints"), "give either horizon or checkpoints, not both".into());
                }
            }
            EstimatorSpec::ZetaResidue { k_max, points, checkpoints } => {
                if *k_max < 1 || *k_max > 1_000_000 {
                    bad(&at("k_max"), format!("must lie in [1, 10^6], got {k_max}"));
                }
                if *points < 1 {
                    bad(&at("points"), "must be >= 1".into());
                }
                if let Some(ks) = checkpoints {
                    check_schedule(ks, &at("checkpoints"), &mut bad);
                }
            }
            EstimatorSpec::HeatRaw(h) | EstimatorSpec::HeatCesaro(h) => {
                let lower = if matches!(e, EstimatorSpec::HeatCesaro(_)) { 1.0 } else { 0.0 };
                if !(h.t_min > lower && h.t_min.is_finite()) {
                    bad(&at("t_min"), format!("must exceed {lower}, got {}", h.t_min));
                }
                if !(h.t_max > h.t_min && h.t_max <= 1e12) {
                    bad(&at("t_max"), format!("must lie in (t_min, 1e12], got {}", h.t_max));
                }
                if h.per_decade < 1 || h.per_decade > 64 {
                    bad(&at("per_decade"), format!("must lie in [1, 64], got {}", h.per_decade));
                }
                if !positive(h.alpha) {
                    bad(&at("alpha"), format!("must be positive, got {}", h.alpha));
                }
            }
        }
    }
    out
}

fn check_schedule(ks: &[u64], path: &str, bad: &mut impl FnMut(&str, String)) {
    if ks.is_empty() {
        bad(path, "schedule is empty".into());
    } else if ks[0] < 1 || ks.windows(2).any(|w| w[0] >= w[1]) {
        bad(path, "checkpoints must be strictly increasing and >= 1".into());
    } else if *ks.last().expect("nonempty") > MAX_HORIZON {
        bad(path, format!("checkpoint beyond 2^40: {}", ks.last().expect("nonempty")));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"schema_version": 1, "model": {"kind": "harmonic"}, "estimators": [{"method": "dixmier_alpha"}]}"#;

    #[test]
    fn minimal_config_is_valid() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.model, ModelSpec::Harmonic { c: 1.0 });
        assert_eq!(c.format, OutputFormat::Csv);
        assert_eq!(c.estimators.len(), 1);
    }

    #[test]
    fn negative_cutoff_is_reported_at_its_path() {
        let text = r#"{"schema_version": 1, "model": {"kind": "torus", "n": 2, "cutoff": -1}}"#;
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.violations.len(), 1);
        assert_eq!(e.violations[0].path, "model.cutoff");
    }

    #[test]
    fn all_violations_are_collected() {
        let text = r#"{"schema_version": 2, "model": {"kind": "torus", "n": 7, "cutoff": 0},
            "estimators": [{"method": "heat_raw", "t_min": 10, "t_max": 1}]}"#;
        let paths: Vec<String> = parse_config(text).unwrap_err().violations.into_iter().map(|v| v.path).collect();
        assert_eq!(paths, ["schema_version", "model.n", "model.cutoff", "estimators[0].t_max"]);
    }

    #[test]
    fn unknown_keys_and_kinds_are_rejected() {
        let e = parse_config(r#"{"schema_version": 1, "model": {"kind": "harmonic"}, "extra": 1}"#).unwrap_err();
        assert!(e.violations[0].message.contains("extra"));
        let e = parse_config(r#"{"schema_version": 1, "model": {"kind": "sphere"}}"#).unwrap_err();
        assert_eq!(e.violations[0].path, "model.kind");
        let e = parse_config(r#"{"schema_version": 1, "model": {"kind": "harmonic", "d": 2}}"#).unwrap_err();
        assert!(e.violations[0].message.contains('d'));
    }

    #[test]
    fn matrix_over_budget_is_rejected() {
        let text = r#"{"schema_version": 1, "budget_mb": 8,
            "model": {"kind": "matrix", "n": 1, "half_width": 600, "f": [{"mode": [0], "re": 2}]}}"#;
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.violations[0].path, "model.half_width");
    }

    #[test]
    fn round_trip_is_exact() {
        let text = r#"{"schema_version": 1, "name": "rt", "seed": 9, "format": "json", "invariants": true,
            "model": {"kind": "matrix", "n": 1, "half_width": 20, "f": [{"mode": [0], "re": 2}, {"mode": [1], "re": 0.5, "im": -0.25}]},
            "tolerances": {"window": 8, "eps_conv": 0.02},
            "estimators": [{"method": "dixmier_alpha", "checkpoints": [3, 5, 9]}, {"method": "zeta_residue"},
                           {"method": "heat_cesaro", "t_min": 2, "t_max": 1e5, "alpha": 0.5}]}"#;
        let c = parse_config(text).unwrap();
        let again = parse_config(&emit_config(&c)).unwrap();
        assert_eq!(c, again);
        assert_eq!(emit_config(&c), emit_config(&again));
    }
}
