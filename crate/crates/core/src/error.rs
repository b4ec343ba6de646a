use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrnError {
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("duplicate species `{0}`")]
    DuplicateSpecies(String),
    #[error("invalid species name `{0}`")]
    InvalidSpeciesName(String),
    #[error("rate constant must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("volume must be positive and finite, got {0}")]
    InvalidVolume(f64),
    #[error("stoichiometry of `{0}` must be at least 1")]
    ZeroStoichiometry(String),
    #[error("reaction index {index} out of range ({count} reactions)")]
    ReactionIndex { index: usize, count: usize },
    #[error("state has {found} entries, network has {expected} species")]
    StateLength { expected: usize, found: usize },
    #[error("negative count {1} for `{0}`")]
    NegativeCount(String, i64),
    #[error("reaction {reaction} lacks reactant `{species}`")]
    InsufficientReactants { reaction: usize, species: String },
    #[error("count overflow for `{0}`")]
    CountOverflow(String),
    #[error("cannot merge networks with volumes {0} and {1}")]
    VolumeMismatch(f64, f64),
    #[error("{0}")]
    Build(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Crn(#[from] CrnError),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("non-finite total propensity {total} at t={time}")]
    Numerical { time: f64, total: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CtmcError {
    #[error(transparent)]
    Crn(#[from] CrnError),
    #[error("state space exceeds {limit} states (explored {explored})")]
    TooManyStates { limit: usize, explored: usize },
    #[error("initial state exceeds the per-species cap")]
    InitialOutsideCaps,
    #[error("time bound must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CslError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("predicate `{0}` is not defined for this model")]
    UndefinedPredicate(String),
    #[error("unknown species `{0}` in formula")]
    UnknownSpecies(String),
    #[error("probability bound {0} outside [0, 1]")]
    BadBound(f64),
    #[error("time bound {0} is negative")]
    BadTime(f64),
    #[error("horizon {horizon} is shorter than the formula's time bound {needed}")]
    HorizonTooShort { horizon: f64, needed: f64 },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("state index {0} out of range")]
    StateIndex(usize),
    #[error("{0}")]
    Precondition(String),
}
