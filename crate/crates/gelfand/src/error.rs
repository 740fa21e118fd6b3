//! Error type shared by all solver and analysis routines.

/// Errors produced by construction, evaluation, and solving.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Parameters or arguments outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An evaluator produced a non-finite intermediate value.
    #[error("evaluation error: {0}")]
    Eval(String),
    /// The solution exceeded overflow guards before reaching the target radius.
    #[error("blow-up: {0}")]
    Blowup(String),
    /// The requested accuracy could not be met with the minimum step size.
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    /// A root or level radius could not be bracketed.
    #[error("bracketing failed: {0}")]
    Bracket(String),
    /// The seed radius is outside the asymptotic regime.
    #[error("seed error: {0}")]
    Seed(String),
    /// No integration cutoff achieved the analytic tail bound.
    #[error("tail bound failed: {0}")]
    Tail(String),
    /// A least-squares fit was degenerate or below the noise floor.
    #[error("fit error: {0}")]
    Fit(String),
    /// A phase-plane orbit started outside the vector-field domain.
    #[error("domain exit at t = {t}")]
    DomainExit { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
