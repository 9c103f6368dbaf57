use std::path::{Path, PathBuf};

use regfrac::galerkin::BoundaryCondition;
use regfrac::mesh::default_grading;
use regfrac::{FracOrder, PowerLaw, ScalarField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Registered scenarios, in the order `all` runs them.
pub const SCENARIOS: [&str; 7] = ["constants", "eval-op", "solve", "rates", "eigen", "extension", "limit-s1"];

/// Canonical scenario name, accepting the underscore spellings.
pub fn canonical_scenario(name: &str) -> Result<&'static str, CliError> {
    let key = name.trim().replace('_', "-");
    let key = match key.as_str() {
        "dirichlet-rate" => "rates",
        other => other,
    };
    if key == "all" {
        return Ok("all");
    }
    SCENARIOS
        .iter()
        .find(|s| **s == key)
        .copied()
        .ok_or_else(|| CliError::Config(format!("unknown scenario '{name}'; expected one of {} or all", SCENARIOS.join(", "))))
}

/// Named right-hand sides on `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldName {
    Const1,
    Linear,
    Sine,
    Manufactured,
}

impl FieldName {
    pub fn field(self) -> ScalarField {
        match self {
            FieldName::Const1 => ScalarField::constant(1.0),
            FieldName::Linear => ScalarField::new(|x| x)
                .with_second_derivative(|_| 0.0),
            FieldName::Sine => ScalarField::new(|x| (std::f64::consts::PI * x).sin()),
            FieldName::Manufactured => ScalarField::new(|x| x * (1.0 - x * x))
                .with_left_tail(PowerLaw::new(0.0, 0.0))
                .with_right_tail(PowerLaw::new(0.0, 0.0)),
        }
    }

    /// `∫_{−1}^{1} f = 0`.
    pub fn compatible(self) -> bool {
        !matches!(self, FieldName::Const1)
    }

    pub fn label(self) -> &'static str {
        match self {
            FieldName::Const1 => "const1",
            FieldName::Linear => "linear",
            FieldName::Sine => "sine",
            FieldName::Manufactured => "manufactured",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Dirichlet => BoundaryCondition::Dirichlet,
            Bc::Neumann => BoundaryCondition::Neumann,
        }
    }
}

/// `"auto"` or a fixed exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grading {
    Fixed(f64),
    Named(GradingName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradingName {
    Auto,
}

/// Contents of a `--config` file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Option<String>,
    pub s: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub grading: Option<Grading>,
    pub f: Option<FieldName>,
    pub bc: Option<Bc>,
    pub k: Option<usize>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Parameters of one scenario after defaults and overrides are applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub scenario: &'static str,
    pub s: Vec<f64>,
    pub n: Vec<usize>,
    pub grading: Grading,
    pub f: FieldName,
    pub bc: Bc,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Resolved {
    pub fn order(&self, s: f64) -> Result<FracOrder, CliError> {
        FracOrder::new(s).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Mesh grading for order `s`: Dirichlet runs resolve the `δ^{2s−1}` layer,
    /// Neumann runs use a mild fixed grading.
    pub fn grading_for(&self, s: FracOrder) -> f64 {
        match self.grading {
            Grading::Fixed(g) => g,
            Grading::Named(GradingName::Auto) => match self.bc {
                Bc::Dirichlet => default_grading(s),
                Bc::Neumann => 2.0,
            },
        }
    }
}

fn defaults(scenario: &str, bc: Bc) -> (Vec<f64>, Vec<usize>) {
    match (scenario, bc) {
        ("constants", _) => (vec![0.3, 0.5, 0.6, 0.75, 0.9], vec![]),
        ("eval-op", _) => (vec![0.6, 0.75, 0.9], vec![]),
        ("solve", Bc::Dirichlet) => (vec![0.75], vec![256]),
        ("solve", Bc::Neumann) => (vec![0.8], vec![256]),
        ("rates", Bc::Dirichlet) => (vec![0.7, 0.8], vec![1024]),
        ("rates", Bc::Neumann) => (vec![0.8], vec![1024]),
        ("eigen", _) => (vec![0.3, 0.5, 0.75, 0.9], vec![512]),
        ("extension", _) => (vec![0.6, 0.75, 0.8], vec![]),
        ("limit-s1", _) => (vec![0.9, 0.95, 0.99], vec![512]),
        _ => (vec![], vec![]),
    }
}

/// Applies scenario defaults to the file contents and validates ranges.
pub fn resolve(scenario: &'static str, cfg: &ExperimentConfig) -> Result<Resolved, CliError> {
    let bc = cfg.bc.unwrap_or(Bc::Dirichlet);
    let (ds, dn) = defaults(scenario, bc);
    let f = cfg.f.unwrap_or(match bc {
        Bc::Dirichlet => FieldName::Const1,
        Bc::Neumann => FieldName::Linear,
    });
    let grading = cfg.grading.unwrap_or(match scenario {
        "limit-s1" => Grading::Fixed(2.0),
        _ => Grading::Named(GradingName::Auto),
    });
    let r = Resolved {
        scenario,
        s: cfg.s.clone().unwrap_or(ds),
        n: cfg.n.clone().unwrap_or(dn),
        grading,
        f,
        bc,
        k: cfg.k.unwrap_or(3),
        trials: cfg.trials.unwrap_or(50),
        seed: cfg.seed.unwrap_or(0),
    };
    for &s in &r.s {
        if !(s > 0.0 && s < 1.0) {
            return Err(CliError::Config(format!("s = {s} outside (0, 1)")));
        }
    }
    for &n in &r.n {
        if n < 4 || n % 2 != 0 {
            return Err(CliError::Config(format!("n = {n} must be even and at least 4")));
        }
    }
    if let Grading::Fixed(g) = r.grading {
        if !(g >= 1.0 && g.is_finite()) {
            return Err(CliError::Config(format!("grading {g} must be at least 1")));
        }
    }
    let solves = matches!(scenario, "solve" | "rates");
    if solves && r.bc == Bc::Dirichlet && r.s.iter().any(|&s| s <= 0.5) {
        return Err(CliError::Config("censored Dirichlet runs need s > 1/2".into()));
    }
    if solves && r.bc == Bc::Neumann && !r.f.compatible() {
        return Err(CliError::Config(format!("f = {} has nonzero mean; Neumann runs need compatible data", r.f.label())));
    }
    if scenario == "rates" && r.s.iter().any(|&s| s <= 0.5) {
        return Err(CliError::Config("boundary probes need s > 1/2".into()));
    }
    if scenario == "limit-s1" && r.s.iter().any(|&s| s <= 0.5) {
        return Err(CliError::Config("the s -> 1 comparison needs s > 1/2".into()));
    }
    if scenario == "eigen" && r.n.iter().any(|&n| n < 32 || r.k == 0 || r.k > n / 4) {
        return Err(CliError::Config("eigen needs n >= 32 and 1 <= k <= n/4".into()));
    }
    Ok(r)
}
