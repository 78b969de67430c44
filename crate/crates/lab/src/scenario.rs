//! Scenario files: a fixed TOML schema, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use timereg::dirichlet::{dirichlet_operator, sine_coefficients, GridFunction, IntervalDomain, Profile};
use timereg::{KernelScheme, SpectralOperator, SpectralVector};

pub const BUNDLED: [(&str, &str); 4] = [
    ("bh-counterexample", include_str!("../scenarios/bh-counterexample.toml")),
    ("dirichlet-h1", include_str!("../scenarios/dirichlet-h1.toml")),
    ("mc-validation", include_str!("../scenarios/mc-validation.toml")),
    ("smr-rough", include_str!("../scenarios/smr-rough.toml")),
];

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Scenario {
    pub name: String,
    pub horizon: f64,
    /// Relative quadrature tolerance of the moment oracle.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub operator: OperatorSpec,
    pub data: DataSpec,
    pub query: QuerySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_check: Option<CoefficientCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Explicit { eigenvalues: Vec<f64> },
    /// `λ_k = scale · k^exponent`.
    Power { scale: f64, exponent: f64, modes: usize },
    /// Dirichlet Laplacian on `(0, length)`.
    Dirichlet { length: f64, modes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Explicit { coefficients: Vec<f64> },
    /// `x_k = amplitude · k^{−exponent}`.
    Power { amplitude: f64, exponent: f64 },
    /// Named boundary profile; closed-form coefficients unless `intervals` asks
    /// for Simpson quadrature on that many intervals.
    Profile {
        profile: Profile,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervals: Option<usize>,
    },
    /// Two-column CSV of uniform `(position, value)` samples on `[0, L]`.
    Samples { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    /// `D(A^{1/2})`.
    #[default]
    Theorem,
    /// `D(A^{1/2−α})`.
    Smr,
}

impl Space {
    pub fn theta(self, alpha: f64) -> f64 {
        match self {
            Space::Theorem => 0.5,
            Space::Smr => 0.5 - alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct QuerySpec {
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub space: Space,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepSpec {
    pub truncations: Vec<usize>,
    pub stability_tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Expectation {
    pub alpha: f64,
    pub verdict: ExpectedVerdict,
    /// Expected increment slope for `diverging`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    /// Relative tolerance on `slope`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedVerdict {
    FiniteStable,
    Diverging,
    SlowlyConvergent,
}

impl ExpectedVerdict {
    pub fn label(self) -> &'static str {
        match self {
            ExpectedVerdict::FiniteStable => "finite-stable",
            ExpectedVerdict::Diverging => "diverging",
            ExpectedVerdict::SlowlyConvergent => "slowly-convergent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MonteCarloSpec {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    #[serde(default = "default_k_sigma")]
    pub k_sigma: f64,
    /// Seminorm gates; L² is always gated.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: KernelScheme,
    #[serde(default)]
    pub dump_ensemble: bool,
}

fn default_k_sigma() -> f64 {
    3.0
}

fn default_scheme() -> KernelScheme {
    KernelScheme::CellExact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CoefficientCheck {
    pub intervals: usize,
    pub modes: usize,
    pub tolerance: f64,
}

/// A validation failure at a field path such as `query.alphas[1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
    #[error("{0}")]
    Data(String),
}

/// Loads a scenario from a TOML path, the scenario echoed in a `report.json`,
/// or a bundled scenario by name when no such file exists. Relative data paths are resolved against the file's directory.
pub fn load(spec: &str) -> Result<Scenario, ScenarioError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == spec) {
            return parse(text);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scenario = if path.extension().is_some_and(|e| e == "json") {
        from_report_json(&text)?
    } else {
        parse(&text)?
    };
    if let DataSpec::Samples { path: data } = &mut scenario.data {
        if data.is_relative() {
            if let Some(dir) = path.parent() {
                *data = dir.join(&*data);
            }
        }
    }
    Ok(scenario)
}

/// The scenario echoed in a `report.json`.
pub fn from_report_json(text: &str) -> Result<Scenario, ScenarioError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ScenarioError::Data(format!("report does not parse: {e}")))?;
    let echo = value
        .get_mut("scenario")
        .map(serde_json::Value::take)
        .ok_or_else(|| ScenarioError::Data("report has no scenario field".into()))?;
    let scenario: Scenario =
        serde_json::from_value(echo).map_err(|e| ScenarioError::Data(format!("report scenario: {e}")))?;
    scenario.validate().map_err(ScenarioError::Invalid)?;
    Ok(scenario)
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text)?;
    scenario.validate().map_err(ScenarioError::Invalid)?;
    Ok(scenario)
}

struct Checker(Vec<FieldError>);

impl Checker {
    fn require(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.0.push(FieldError {
                path: path.into(),
                message: message.into(),
            });
        }
    }
}

impl Scenario {
    pub fn modes(&self) -> usize {
        match &self.operator {
            OperatorSpec::Explicit { eigenvalues } => eigenvalues.len(),
            OperatorSpec::Power { modes, .. } | OperatorSpec::Dirichlet { modes, .. } => *modes,
        }
    }

    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut c = Checker(Vec::new());
        c.require(!self.name.is_empty(), "name", "must not be empty");
        c.require(self.horizon > 0.0 && self.horizon.is_finite(), "horizon", "must be positive and finite");
        c.require(
            self.tolerance > 0.0 && self.tolerance <= 1e-2,
            "tolerance",
            "must lie in (0, 1e-2]",
        );

        match &self.operator {
            OperatorSpec::Explicit { eigenvalues } => {
                c.require(!eigenvalues.is_empty(), "operator.eigenvalues", "must not be empty");
                for (i, l) in eigenvalues.iter().enumerate() {
                    c.require(
                        *l > 0.0 && l.is_finite(),
                        format!("operator.eigenvalues[{i}]"),
                        format!("{l} is not a positive finite eigenvalue"),
                    );
                }
            }
            OperatorSpec::Power { scale, exponent, modes } => {
                c.require(*scale > 0.0 && scale.is_finite(), "operator.scale", "must be positive and finite");
                c.require(*exponent > 0.0 && exponent.is_finite(), "operator.exponent", "must be positive and finite");
                c.require(*modes >= 1, "operator.modes", "must be at least 1");
            }
            OperatorSpec::Dirichlet { length, modes } => {
                c.require(*length > 0.0 && length.is_finite(), "operator.length", "must be positive and finite");
                c.require(*modes >= 1, "operator.modes", "must be at least 1");
            }
        }
        let modes = self.modes();
        let dirichlet = matches!(self.operator, OperatorSpec::Dirichlet { .. });

        match &self.data {
            DataSpec::Explicit { coefficients } => {
                c.require(
                    coefficients.len() == modes,
                    "data.coefficients",
                    format!("has {} entries but the operator has {modes} modes", coefficients.len()),
                );
                for (i, v) in coefficients.iter().enumerate() {
                    c.require(v.is_finite(), format!("data.coefficients[{i}]"), "must be finite");
                }
            }
            DataSpec::Power { amplitude, exponent } => {
                c.require(amplitude.is_finite(), "data.amplitude", "must be finite");
                c.require(exponent.is_finite(), "data.exponent", "must be finite");
            }
            DataSpec::Profile { intervals, .. } => {
                c.require(dirichlet, "data.profile", "boundary profiles need a dirichlet operator");
                if let Some(m) = intervals {
                    c.require(
                        *m >= 2 * modes && *m >= 8,
                        "data.intervals",
                        format!("{m} intervals cannot resolve {modes} modes (need at least {})", (2 * modes).max(8)),
                    );
                }
            }
            DataSpec::Samples { .. } => {
                c.require(dirichlet, "data.path", "sampled profiles need a dirichlet operator");
            }
        }

        c.require(!self.query.alphas.is_empty(), "query.alphas", "must not be empty");
        for (i, a) in self.query.alphas.iter().enumerate() {
            c.require(
                (0.0..0.5).contains(a),
                format!("query.alphas[{i}]"),
                format!("{a} is outside [0, 1/2)"),
            );
        }

        if let Some(sweep) = &self.sweep {
            let t = &sweep.truncations;
            c.require(t.len() >= 3, "sweep.truncations", "needs at least three truncations");
            c.require(
                t.windows(2).all(|w| w[0] < w[1]) && t.first().is_some_and(|&n| n >= 1),
                "sweep.truncations",
                "must be strictly ascending and positive",
            );
            c.require(
                t.last().is_none_or(|&n| n <= modes),
                "sweep.truncations",
                format!("largest truncation exceeds the operator's {modes} modes"),
            );
            c.require(sweep.stability_tolerance > 0.0, "sweep.stability-tolerance", "must be positive");
            for (i, e) in sweep.expect.iter().enumerate() {
                c.require(
                    self.query.alphas.contains(&e.alpha) && e.alpha > 0.0,
                    format!("sweep.expect[{i}].alpha"),
                    "must be a nonzero entry of query.alphas",
                );
                c.require(
                    e.slope.is_none() || e.verdict == ExpectedVerdict::Diverging,
                    format!("sweep.expect[{i}].slope"),
                    "only diverging expectations carry a slope",
                );
                c.require(
                    e.slope.is_some() == e.slope_tolerance.is_some(),
                    format!("sweep.expect[{i}].slope-tolerance"),
                    "slope and slope-tolerance go together",
                );
            }
        }

        if let Some(mc) = &self.monte_carlo {
            c.require(mc.paths >= 2, "monte-carlo.paths", "needs at least two paths");
            c.require(mc.steps >= 2, "monte-carlo.steps", "needs at least two steps");
            c.require(mc.k_sigma > 0.0, "monte-carlo.k-sigma", "must be positive");
            c.require(modes <= 256, "monte-carlo", format!("sampling is limited to 256 modes, operator has {modes}"));
            for (i, a) in mc.alphas.iter().enumerate() {
                c.require(
                    *a > 0.0 && *a < 0.5,
                    format!("monte-carlo.alphas[{i}]"),
                    format!("{a} is outside (0, 1/2)"),
                );
            }
        }

        if let Some(check) = &self.coefficient_check {
            c.require(
                matches!(self.data, DataSpec::Profile { .. }),
                "coefficient-check",
                "needs a named profile to compare against",
            );
            c.require(
                check.intervals >= 2 * check.modes && check.intervals >= 8,
                "coefficient-check.intervals",
                "must be at least twice the number of modes and at least 8",
            );
            c.require(check.modes >= 1, "coefficient-check.modes", "must be at least 1");
            c.require(check.tolerance > 0.0, "coefficient-check.tolerance", "must be positive");
        }

        if c.0.is_empty() {
            Ok(())
        } else {
            Err(c.0)
        }
    }

    pub fn build_operator(&self) -> Result<SpectralOperator, ScenarioError> {
        let a = match &self.operator {
            OperatorSpec::Explicit { eigenvalues } => SpectralOperator::new(eigenvalues.clone()),
            OperatorSpec::Power { scale, exponent, modes } => {
                SpectralOperator::new((1..=*modes).map(|k| scale * (k as f64).powf(*exponent)).collect())
            }
            OperatorSpec::Dirichlet { length, modes } => IntervalDomain::new(*length).and_then(|d| dirichlet_operator(d, *modes)),
        };
        a.map_err(|e| ScenarioError::Data(format!("operator: {e}")))
    }

    pub fn domain(&self) -> Option<IntervalDomain> {
        match self.operator {
            OperatorSpec::Dirichlet { length, .. } => IntervalDomain::new(length).ok(),
            _ => None,
        }
    }

    pub fn build_data(&self) -> Result<SpectralVector, ScenarioError> {
        let modes = self.modes();
        let data_err = |e: timereg::Error| ScenarioError::Data(format!("data: {e}"));
        match &self.data {
            DataSpec::Explicit { coefficients } => SpectralVector::new(coefficients.clone()).map_err(data_err),
            DataSpec::Power { amplitude, exponent } => {
                SpectralVector::new((1..=modes).map(|k| amplitude * (k as f64).powf(-exponent)).collect()).map_err(data_err)
            }
            DataSpec::Profile { profile, intervals } => {
                let domain = self.domain().ok_or_else(|| ScenarioError::Data("data: no dirichlet domain".into()))?;
                match intervals {
                    None => profile.coefficients(domain, modes).map_err(data_err),
                    Some(m) => sine_coefficients(&profile.sample(domain, *m).map_err(data_err)?, modes).map_err(data_err),
                }
            }
            DataSpec::Samples { path } => {
                let h = read_profile_csv(path)?;
                if let Some(domain) = self.domain() {
                    let (got, want) = (h.domain().length(), domain.length());
                    if (got - want).abs() > 1e-9 * want {
                        return Err(ScenarioError::Data(format!(
                            "data.path: samples span [0, {got}] but the operator domain is [0, {want}]"
                        )));
                    }
                }
                sine_coefficients(&h, modes).map_err(data_err)
            }
        }
    }
}

/// Reads `(position, value)` rows; a non-numeric first row is taken as a header.
pub fn read_profile_csv(path: &Path) -> Result<GridFunction, ScenarioError> {
    let err = |m: String| ScenarioError::Data(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != 2 {
            return Err(err(format!("row {} has {} columns, expected 2", i + 1, record.len())));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(s), Ok(v)) => pairs.push((s, v)),
            _ if i == 0 => continue,
            _ => return Err(err(format!("row {} is not numeric", i + 1))),
        }
    }
    GridFunction::from_pairs(&pairs).map_err(|e| err(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        for (name, text) in BUNDLED {
            let s = parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BUNDLED[0].1.replace("horizon = 1.0", "horizon = 1.0\nhorizn = 2.0");
        assert!(matches!(parse(&text), Err(ScenarioError::Parse(_))));
        let text = BUNDLED[0].1.replace("[query]", "[query]\nspaces = \"smr\"");
        assert!(matches!(parse(&text), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn validation_reports_field_paths() {
        let text = BUNDLED[0].1.replace("alphas = [0.2, 0.3]", "alphas = [0.2, 0.7]");
        match parse(&text) {
            Err(ScenarioError::Invalid(errors)) => {
                assert!(errors.iter().any(|e| e.path == "query.alphas[1]"), "{errors:?}");
            }
            other => panic!("{other:?}"),
        }
    }
}
