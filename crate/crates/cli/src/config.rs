use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use limsup_core::algebra::AlgebraOp;
use limsup_core::automaton::AutomatonDoc;
use limsup_core::game::MAX_ROUNDS;
use limsup_core::Dyadic;

pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_CAP: usize = 100_000;

/// Everything one `play`, `verify` or `construct` run depends on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    #[serde(default)]
    pub tree: TreeChoice,
    pub function: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player_i: Option<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player_ii: Option<StrategySpec>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub branches: BranchCorpusSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    Gamma,
    GammaPrime,
    GammaRestricted { values: Vec<Dyadic> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeChoice {
    #[default]
    Binary,
    Naturals,
    Arity(u64),
}

/// A machine given by file, inline document or name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineRef {
    Path(PathBuf),
    Inline(AutomatonDoc),
    /// One state, output = letter read, over `k` letters.
    LetterOutput(u64),
    /// One state, output = `1 - letter`, over two letters.
    Flip,
    Constant(Dyadic),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stage {
    FromAutomaton { machine: MachineRef },
    /// Asserts the level family is non-increasing and monotone on a sample.
    Regularize,
    Discretize,
    ConstructU,
    Algebra { op: AlgebraOp, left: MachineRef, right: MachineRef },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionSpec {
    Machine(MachineRef),
    /// Indicator of the eventually-zero branches.
    EventuallyZero,
    Pipeline(Vec<Stage>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    /// II answers `u` of I's prefix; `u` defaults to the function's machine.
    FromU {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        machine: Option<MachineRef>,
    },
    MeagerDense,
    Oscillation,
    Copycat,
    ApproxCopycat {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        search_cap: Option<usize>,
    },
    Lift { values: Vec<Dyadic>, inner: Box<StrategySpec> },
    Relabel { map: Vec<(Dyadic, Dyadic)>, inner: Box<StrategySpec> },
    Pair { first: Box<StrategySpec>, second: Box<StrategySpec> },
    /// I plays `letter` forever; II plays `value` (and `w` in pair games).
    Constant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        letter: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<Dyadic>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<Dyadic>,
    },
    RandomFsm {
        states: usize,
        values: Vec<Dyadic>,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchCorpusSpec {
    pub count: usize,
    pub max_stem: usize,
    pub max_cycle: usize,
}

impl Default for BranchCorpusSpec {
    fn default() -> Self {
        BranchCorpusSpec { count: 30, max_stem: 3, max_cycle: 3 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default)]
    pub trace: TraceFormat,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_stem() -> String {
    "run".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out"), trace: TraceFormat::Csv, stem: default_stem() }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Rejects caps above the global round limit and empty pipelines.
    pub fn validate(&self) -> Result<(), String> {
        if self.cap > MAX_ROUNDS || self.horizon > MAX_ROUNDS {
            return Err(format!("horizon {} / cap {} exceed the limit of {MAX_ROUNDS} rounds", self.horizon, self.cap));
        }
        if matches!(&self.function, FunctionSpec::Pipeline(stages) if stages.is_empty()) {
            return Err("empty pipeline".into());
        }
        Ok(())
    }
}
