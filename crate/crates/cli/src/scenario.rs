//! Scenario file schema. Every kind is a JSON object with a `"kind"` tag;
//! complex numbers are written as `[re, im]`.

use serde::de::{DeserializeOwned, IgnoredAny};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

pub type ComplexEntry = [f64; 2];
pub type ComplexMatrix = Vec<Vec<ComplexEntry>>;

pub const KINDS: [&str; 8] = [
    "reversal",
    "distribution",
    "sample",
    "abl",
    "retrodict",
    "entropy-flow",
    "markov",
    "dynsys",
];

#[derive(Debug, Clone)]
pub enum Scenario {
    Reversal(ReversalScenario),
    Distribution(DistributionScenario),
    Sample(SampleScenario),
    Abl(AblScenario),
    Retrodict(RetrodictScenario),
    EntropyFlow(EntropyFlowScenario),
    Markov(MarkovScenario),
    Dynsys(DynsysScenario),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Reversal(_) => "reversal",
            Scenario::Distribution(_) => "distribution",
            Scenario::Sample(_) => "sample",
            Scenario::Abl(_) => "abl",
            Scenario::Retrodict(_) => "retrodict",
            Scenario::EntropyFlow(_) => "entropy-flow",
            Scenario::Markov(_) => "markov",
            Scenario::Dynsys(_) => "dynsys",
        }
    }

    pub fn description(&self) -> Option<&str> {
        match self {
            Scenario::Reversal(s) => s.description.as_deref(),
            Scenario::Distribution(s) => s.description.as_deref(),
            Scenario::Sample(s) => s.description.as_deref(),
            Scenario::Abl(s) => s.description.as_deref(),
            Scenario::Retrodict(s) => s.description.as_deref(),
            Scenario::EntropyFlow(s) => s.description.as_deref(),
            Scenario::Markov(s) => s.description.as_deref(),
            Scenario::Dynsys(s) => s.description.as_deref(),
        }
    }
}

/// Parse a scenario, reporting the offending field path and position.
///
/// The `kind` tag is read first; the matching body is then deserialized
/// straight from the text so that positions and field paths survive.
pub fn parse(source: &str, text: &str) -> Result<Scenario, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: source.to_string(),
        line: e.line(),
        column: e.column(),
        field: None,
        message: strip_position(&e.to_string()),
    })?;
    let kind = match value.get("kind") {
        Some(Value::String(k)) => k.as_str(),
        Some(_) => return Err(CliError::field("kind", "must be a string")),
        None if value.is_object() => {
            return Err(CliError::field(
                "kind",
                format!("missing; expected one of {}", KINDS.join(", ")),
            ))
        }
        None => return Err(CliError::field(".", "a scenario must be a JSON object")),
    };
    Ok(match kind {
        "reversal" => Scenario::Reversal(body(source, text)?),
        "distribution" => Scenario::Distribution(body(source, text)?),
        "sample" => Scenario::Sample(body(source, text)?),
        "abl" => Scenario::Abl(body(source, text)?),
        "retrodict" => Scenario::Retrodict(body(source, text)?),
        "entropy-flow" => Scenario::EntropyFlow(body(source, text)?),
        "markov" => Scenario::Markov(body(source, text)?),
        "dynsys" => Scenario::Dynsys(body(source, text)?),
        other => {
            return Err(CliError::field(
                "kind",
                format!(
                    "unknown kind \"{other}\"; expected one of {}",
                    KINDS.join(", ")
                ),
            ))
        }
    })
}

fn body<T: DeserializeOwned>(source: &str, text: &str) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Parse {
            origin: source.to_string(),
            line: inner.line(),
            column: inner.column(),
            field: (path != ".").then_some(path),
            message: strip_position(&inner.to_string()),
        }
    })
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// Hamiltonian, initial state, times and observables of a measurement run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub sites: usize,
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    pub times: TimesSpec,
    /// Measured at every time.
    pub observable: Option<ObservableSpec>,
    /// One per time.
    pub observables: Option<Vec<ObservableSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    Zero {},
    /// Real symmetric Gaussian matrix; the seed defaults to the scenario seed.
    RandomReal {
        seed: Option<u64>,
    },
    RandomHermitian {
        seed: Option<u64>,
    },
    /// `Σ_i ω(1 − σ^x_i)/2`.
    Precession {
        omega: f64,
    },
    Matrix {
        entries: ComplexMatrix,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Mixed {},
    Basis { index: usize },
    Pure { amplitudes: Vec<ComplexEntry> },
    Matrix { entries: ComplexMatrix },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Mixed {}
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TimesSpec {
    List(Vec<f64>),
    Grid(TimeGrid),
}

/// `count` times `start, start + step, …`. With `period_of: ω`, `start` and
/// `step` are in units of the period `2π/ω`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: f64,
    pub step: f64,
    pub count: usize,
    pub period_of: Option<f64>,
}

/// `"mz"`, `"sz:i"`, `"sx:i"`, `"sy:i"`, `"sum"`, `"diff"`, or an explicit
/// Hermitian matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(String),
    Matrix(ComplexMatrix),
}

/// `"conjugation"`, `"spin-flip"`, or `{"unitary": matrix}` for `V·conj`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PiSpec {
    Named(String),
    Unitary { unitary: ComplexMatrix },
}

impl Default for PiSpec {
    fn default() -> Self {
        PiSpec::Named("conjugation".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReversalScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub pi: PiSpec,
    /// Bound on `max |Prob[ω] − Prob[Θω]|`.
    pub tol: Option<f64>,
    /// Bound on the detailed-balance ratio deviation.
    pub ratio_tol: Option<f64>,
    /// Also require every trajectory to be equally likely.
    #[serde(default)]
    pub uniform: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub schedule: ScheduleSpec,
    /// Bound on `|Σ Prob − 1|`.
    pub tol: Option<f64>,
    #[serde(default)]
    pub uniform: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub schedule: ScheduleSpec,
    pub samples: Option<usize>,
    /// Bound on the total-variation distance to the exact law.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub schedule: ScheduleSpec,
    pub first: String,
    pub last: String,
    /// When set, also check the reversed-trajectory symmetry of the conditional.
    pub pi: Option<PiSpec>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub expect: Vec<AblExpectation>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblExpectation {
    pub intermediate: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrodictScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    /// Amplitudes of `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
    pub coefficients: [ComplexEntry; 4],
    pub tol: Option<f64>,
    pub expect: Option<RetrodictExpectation>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrodictExpectation {
    pub forward: f64,
    pub reversed: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyFlowScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub sites: Option<usize>,
    pub seeds: Option<usize>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub states: Option<Vec<String>>,
    pub transitions: Option<Vec<Vec<f64>>>,
    pub potential_form: Option<PotentialFormSpec>,
    /// Kinematic reversal of states; identity when absent.
    pub involution: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub expect_detailed_balance: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFormSpec {
    pub activity: Vec<Vec<f64>>,
    pub potential: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynsysScenario {
    #[serde(rename = "kind")]
    _kind: IgnoredAny,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub system: SystemSpec,
    /// Mechanical reversibility is checked for `0..=max_time`.
    pub max_time: Option<u32>,
    #[serde(default)]
    pub pairs: Vec<MacroPair>,
    pub random_pairs: Option<RandomPairs>,
    #[serde(default = "yes")]
    pub expect_reversible: bool,
}

fn yes() -> bool {
    true
}

/// `"free-motion:n"` or explicit permutation tables.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Named(String),
    Tables {
        forward: Vec<usize>,
        involution: Vec<usize>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroPair {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub t: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPairs {
    pub count: usize,
    #[serde(default = "half")]
    pub density: f64,
}

fn half() -> f64 {
    0.5
}
