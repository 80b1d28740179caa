use thiserror::Error;

/// Errors produced by formula parsing and construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: invalid literal token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("clause {clause}: variable {var} out of range 1..={n}")]
    VariableOutOfRange { clause: usize, var: u64, n: usize },
    #[error("clause {clause}: variable {var} appears more than once")]
    DuplicateVariable { clause: usize, var: usize },
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("last clause is missing its terminating 0")]
    MissingTerminator,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("assignment has length {found}, formula has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },
    #[error("variable {var} out of range for {n} variables")]
    NoSuchVariable { var: usize, n: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least 3 variables, got {0}")]
    TooFewVariables(usize),
    #[error("need at least one clause")]
    NoClauses,
    #[error("triple variables must be distinct and < n")]
    BadTriple,
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("manifest line {line}: {reason}")]
    ManifestParse { line: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("node budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("no backbone of unsatisfiable formula")]
    Unsatisfiable,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("noise must lie in [0, 1], got {0}")]
    BadNoise(f64),
    #[error("iteration budget must be at least 1")]
    ZeroIterations,
    #[error("policy `textbook` needs a flip distribution")]
    MissingDistribution,
    #[error("flip distribution row {row}: {reason}")]
    BadDistribution { row: usize, reason: String },
    #[error("initial assignment mode GIVEN without an assignment")]
    MissingInitial,
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("matrix with {0} rows cannot be split into literal pairs")]
    OddRows(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad magic bytes, expected EMB1")]
    BadMagic,
    #[error("dump header: {0}")]
    BadHeader(String),
    #[error("dump truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-finite value in embedding")]
    NonFinite,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConceptError {
    #[error("no trajectories supplied")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("matrix contains NaN")]
    NaN,
    #[error("need dimension >= 2 for a top-2 decomposition")]
    TooSmall,
    #[error("keep count {k} outside 1..={d}")]
    KeepCount { k: usize, d: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("interval [{a}, {b}] has a > b")]
    BadInterval { a: String, b: String },
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("spec line {line}: {reason}")]
    Spec { line: usize, reason: String },
    #[error("comparison needs at least one {0}")]
    Empty(&'static str),
    #[error("{path}: {source}")]
    Instance { path: String, source: CnfError },
    #[error("no `*.curves.csv` files in {0}")]
    NoResults(String),
    #[error("{path}: malformed curve CSV at line {line}")]
    BadCsv { path: String, line: usize },
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
