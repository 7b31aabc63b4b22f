use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("invalid generator name `{0}` (expected [a-z][a-z0-9_]*)")]
    InvalidGeneratorName(String),
    #[error("self-loop edge on `{0}`")]
    SelfLoop(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed letter `{0}`")]
    MalformedLetter(String),
    #[error("alphabet is not a transitive forest (induced {pattern} on {witness:?})")]
    NotTransitiveForest { pattern: &'static str, witness: Vec<String> },
    #[error("decomposition tree does not match the alphabet")]
    TreeMismatch,
    #[error("invalid free-product split: {0}")]
    InvalidSplit(String),
    #[error("word represents the identity")]
    TrivialElement,
    #[error("letters {0} and {1} are independent")]
    IndependentPair(String, String),
    #[error("automaton is not acyclic (cycle through states {0:?})")]
    Cyclic(Vec<usize>),
    #[error("state {state} carries more than one loop")]
    MultipleLoops { state: usize },
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("resource limit exhausted: {0}")]
    ResourceExhausted(String),
    #[error("cap exceeded: {what} = {value} > {cap}")]
    CapExceeded { what: &'static str, value: u128, cap: u128 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("not a solution")]
    NotASolution,
    #[error("invalid cancellation: violates {0}")]
    InvalidCancellation(crate::cancellation::Axiom),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
