use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config schema violation: {0}")]
    Schema(String),

    #[error("trap is not a stable linear chain: {0}")]
    Stability(String),

    #[error("equilibrium solver did not converge for n = {n} after {iterations} iterations (residual {residual:.3e})")]
    EquilibriumNotConverged { n: usize, iterations: usize, residual: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("zig-zag instability in {direction} modes: lowest Hessian eigenvalue {eigenvalue:.6e}")]
    ZigZag { direction: String, eigenvalue: f64 },

    #[error("degenerate {direction} modes {index} and {next}: {freq_hz:.6} Hz")]
    DegenerateModes { direction: String, index: usize, next: usize, freq_hz: f64 },

    #[error("invalid pulse: {0}")]
    Pulse(String),

    #[error("quadrature did not converge at delta = {detuning:.6e} rad/s after {panels} panels")]
    Quadrature { detuning: f64, panels: usize },

    #[error("mode {mode} is resonant: sideband detuning {detuning_hz:.3} Hz")]
    Resonance { mode: usize, detuning_hz: f64 },

    #[error("no sign change of dtheta/d(delta_c) across bracket [{lo:.6e}, {hi:.6e}] rad/s: f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finder did not converge after {0} iterations")]
    RootNotConverged(usize),

    #[error("invalid bracket: {0}")]
    Bracket(String),

    #[error("trial entangling phase is zero; the coupling geometry is degenerate")]
    ZeroPhase,

    #[error("density matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
