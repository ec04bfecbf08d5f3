use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("table kernel queried off-node at ({x:?}, {y:?})")]
    OffNode { x: [f64; 2], y: [f64; 2] },

    #[error("kernel is not symmetric: K(x_{i}, x_{j}) differs from K(x_{j}, x_{i}) by {defect:e}")]
    Asymmetric { i: usize, j: usize, defect: f64 },

    #[error("table kernel file line {line}: {msg}")]
    TableFormat { line: usize, msg: String },

    #[error("node count {nodes} exceeds the configured cap {cap}")]
    TooManyNodes { nodes: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("positivity graph of the kernel is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("iteration diverged past {bound} after {iterations} iterations")]
    Diverged { iterations: usize, bound: f64 },

    #[error("shift {beta} must exceed the maximal row sum {sup}")]
    ShiftTooSmall { beta: f64, sup: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("hypothesis {hypothesis} failed: {detail}")]
    Hypothesis { hypothesis: &'static str, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("supersolution is not positive at node {node} (value {value:e})")]
    SupersolutionNotPositive { node: usize, value: f64 },

    #[error("monotonicity violated at iteration {iteration}, node {node} (change {change:e})")]
    MonotonicityViolation { iteration: usize, node: usize, change: f64 },

    #[error("iterate left the bracket at iteration {iteration}, node {node}")]
    BracketEscape { iteration: usize, node: usize },

    #[error("no certified solution found after {doublings} downward doublings")]
    DegenerateFamily { doublings: usize },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
