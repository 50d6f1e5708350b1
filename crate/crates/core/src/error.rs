use thiserror::Error;

pub type Result<T, E = PlanError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("invalid PDDL: {0}")]
    Semantic(String),

    #[error("goal atom refers to undeclared object `{0}`")]
    UndeclaredObject(String),

    #[error("grounding produced more than {cap} actions")]
    GroundingCap { cap: usize },

    #[error("SAS file error at line {line}: {msg}")]
    SasFormat { line: usize, msg: String },

    #[error("unsupported SAS file version {0} (expected 3)")]
    SasVersion(String),

    #[error("action `{0}` is not applicable")]
    InapplicableAction(String),

    #[error("action `{0}` cannot be regressed through this partial state")]
    InapplicableRegression(String),

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("could not complete the goal into an expandable state after {attempts} attempts")]
    GoalCompletionFailure { attempts: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite loss during epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model was trained for task {model:016x}, not {task:016x}")]
    FingerprintMismatch { model: u64, task: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
