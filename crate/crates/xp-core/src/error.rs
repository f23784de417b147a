use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its evaluation budget.
    #[error("quadrature did not converge: best {best:e}, error bound {bound:e} after {evals} evaluations")]
    QuadratureDiverged { best: f64, bound: f64, evals: usize },

    /// Root refinement exhausted its iteration budget.
    #[error("root search did not converge in [{lo}, {hi}]")]
    RootDiverged { lo: f64, hi: f64 },

    /// A bracket handed to the root finder does not change sign.
    #[error("no sign change over [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    /// Adaptive ODE step collapsed below the minimum step size.
    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// Adaptive ODE exceeded its step budget.
    #[error("ODE exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    /// No classical turning points: |E| must exceed 2 inf w.
    #[error("no closed orbit at E = {energy}: requires |E| > {threshold}")]
    NoOrbit { energy: f64, threshold: f64 },

    /// A gauge-map or norm integral diverges on the requested domain.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// Malformed zeros table.
    #[error("zeros file, line {line}: {message}")]
    ZerosFile { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
