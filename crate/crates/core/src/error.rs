use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty factor list")]
    EmptyFactors,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },

    #[error("subsystem index {0} out of range")]
    TargetOutOfRange(usize),

    #[error("target subsystems must be distinct")]
    DuplicateTarget,

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("negative Born probability {0:e} for outcome {1}")]
    NegativeProbability(f64, usize),

    #[error("all outcome probabilities vanish")]
    NoOutcome,

    #[error("empty register")]
    EmptyRegister,

    #[error("duplicate subsystem: photon {photon} {dof}")]
    DuplicateSubsystem { photon: u8, dof: &'static str },

    #[error("unknown label {label:?} for subsystem {subsystem}")]
    UnknownLabel { subsystem: usize, label: String },

    #[error("wrong label count: expected {expected}, got {actual}")]
    LabelCount { expected: usize, actual: usize },

    #[error("photon {photon} has no {dof} subsystem")]
    MissingDof { photon: u8, dof: &'static str },

    #[error("controlled flip needs a 2-dimensional target, subsystem {0} has dim {1}")]
    TargetNotQubit(usize, usize),

    #[error("control and target must differ")]
    ControlIsTarget,

    #[error("unsupported dimension {0}")]
    UnsupportedDim(usize),

    #[error("degenerate SPDC profile: parity weights ({0}, {1})")]
    DegenerateProfile(f64, f64),

    #[error("no correction recipe restores outcome {0}")]
    NoRecipe(String),

    #[error("empty tally cell: {0}")]
    EmptyCell(String),

    #[error("unknown eavesdropper model {0:?}")]
    UnknownEveModel(String),

    #[error("round count must be at least 1")]
    NoRounds,
}

pub type Result<T> = std::result::Result<T, Error>;
