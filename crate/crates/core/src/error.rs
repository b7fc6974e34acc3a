use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid interaction matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid spin value {0}; spins must be -1 or +1")]
    InvalidSpin(i64),

    #[error("invalid moment function: {0}")]
    InvalidMoment(String),

    #[error("lattice point requested below -1 (s = {0})")]
    BelowLattice(f64),

    #[error("n * d = {n} * {d} is odd; no {d}-regular graph on {n} vertices")]
    DegreeParity { n: usize, d: usize },

    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),

    #[error("random regular generation gave up after {0} attempts")]
    RestartBudgetExceeded(usize),

    #[error("graph is not regular")]
    NotRegular,

    #[error("n = {n} exceeds the exact-enumeration cap {cap}")]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("Poisson solve failed: {0}")]
    SingularSystem(String),

    #[error("Dobrushin-like condition violated: |||L|||_2 = {0} >= 1")]
    DobrushinViolated(f64),

    #[error("function is not a-Lipschitz: flip at state {state}, site {site} moves f by {jump} > {bound}")]
    NotLipschitz {
        state: usize,
        site: usize,
        jump: f64,
        bound: f64,
    },

    #[error("inverse temperature {0} has no positive magnetization root (requires beta > 1)")]
    NoPositiveRoot(f64),

    #[error("beta = {0} is outside the admissible range: {1}")]
    BetaRange(f64, &'static str),

    #[error("initial state has negative spin sum {0}; restricted chains live on sum >= 0")]
    OutsidePositivePhase(i64),

    #[error("odds ratio alpha = {0} must lie in (0, 1)")]
    InvalidAlpha(f64),

    #[error("birth-death start state {m} outside 0..{r}")]
    InvalidStart { m: usize, r: usize },

    #[error("monotone coupling violated at step {step}, site {site}")]
    MonotonicityViolated { step: u64, site: usize },

    #[error("coupling mode unavailable: {0}")]
    CouplingUnavailable(String),

    #[error("requires a ferromagnetic interaction matrix")]
    NotFerromagnetic,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
