use thiserror::Error;

pub type Result<T> = std::result::Result<T, CdsError>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CdsError {
    #[error("modulus {0} is not a supported prime")]
    InvalidModulus(u32),
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(String, String),
    #[error("unknown side label in vertex name {0:?} (expected A<n> or B<n>)")]
    UnknownSide(String),
    #[error("edge {{{0},{1}}} does not join an A-side vertex to a B-side vertex")]
    NotBipartite(String, String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex set is not a qualified component")]
    NotQualifiedComponent,
    #[error("no unqualified path from {0} to {1}")]
    NoPath(String, String),
    #[error("instance is degenerate: vertices without an unqualified edge: {0:?}")]
    Degenerate(Vec<String>),
    #[error("instance violates the half-rate condition: qualified edge {{{0},{1}}} is internal to an unqualified path")]
    Infeasible(String, String),

    #[error("scheme has no matrices for vertex {0}")]
    MissingSignal(String),
    #[error("scheme signal {0} is not a vertex of the instance")]
    UnknownSignal(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(String, String),
    #[error("signals along the path have unequal lengths")]
    UnequalSignalLengths,
    #[error("scheme does not pass verification")]
    Unverified,
    #[error("converse bound {0} is below the achieved rate {1}")]
    InconsistentBounds(String, String),

    #[error("enumeration needs {needed} rows, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("lemma audit requires rate 1/2: signal {vertex} has length {n}, secret length is {l}")]
    NotHalfRate { vertex: String, n: usize, l: usize },
    #[error("empty variable subset")]
    EmptySubset,

    #[error("ground set of {0} variables exceeds the limit of {1}; restrict the vertex set")]
    GroundSetTooLarge(usize, usize),
    #[error("invalid LP: {0}")]
    InvalidLp(String),
    #[error("LP solution is not optimal")]
    NotOptimal,
    #[error("dual certificate check failed: {0}")]
    CertificateMismatch(String),
}
