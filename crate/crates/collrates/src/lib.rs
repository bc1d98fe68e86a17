//! Achievable rates of binary fingerprinting codes under worst-case collusion.
//!
//! A binary fingerprinting code embeds one codeword per user into a licensed
//! object. Each codeword symbol is drawn independently: position `i` first
//! draws a bias `p_i` from a *time-sharing distribution* on (0, 1), then every
//! user independently receives a `1` with probability `p_i`. A coalition of
//! `c` colluders compares its codewords and forges a pirate copy, choosing
//! each output symbol from the symbols it actually received (it cannot forge
//! a symbol in positions where all its codewords agree). Under this *marking
//! condition* the coalition's per-position behaviour is a *collusion channel*:
//! the probability of outputting `1` given that `sigma` of the `c` colluders
//! hold a `1`.
//!
//! The achievable rate of the code against a given coalition strategy is a
//! mutual-information functional of the time-sharing distribution and the
//! collusion channel. This crate computes those rates and solves for the
//! channels that minimise them:
//!
//! * [`timeshare`] — time-sharing distributions (arcsine, uniform, discrete)
//!   and the quadrature rules used to take expectations over the bias.
//! * [`collusion`] — collusion channels, channel classes, and the Bernstein
//!   polynomial machinery shared by every rate formula.
//! * [`rates`] — pointwise and expected rates for the joint and simple
//!   decoders, plus closed forms where they exist.
//! * [`worst`] — minimisation of the rates over channel classes: a
//!   Blahut–Arimoto style fixed-point solver for the joint decoder,
//!   projected gradient descent for the simple decoder, and closed-form or
//!   semi-analytic solutions for bias-aware (class-D) adversaries.
//! * [`oracle`] — a Monte-Carlo mutual-information estimator, independent of
//!   the quadrature path, used to validate every rate this crate reports.
//!
//! Rates are reported in bits per code symbol; all internal entropy
//! arithmetic is carried out in nats and converted once at the boundary.

pub mod collusion;
pub mod entropy;
pub mod oracle;
pub mod rates;
pub mod timeshare;
pub mod worst;

mod numeric;

pub use collusion::{ClassDStrategy, ClassTag, CollusionChannel, StrategyKind};
pub use oracle::{CodeMatrix, McEstimate};
pub use rates::{ChannelSpec, Decoder, RateReport};
pub use timeshare::TimeSharingDist;
pub use worst::SolverConfig;

/// Errors reported by rate computations, solvers, and the Monte-Carlo oracle.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The integrand handed to a quadrature rule returned a non-finite value.
    #[error("integrand failure at p={p}")]
    IntegrandFailure {
        /// Quadrature node at which the integrand was not finite.
        p: f64,
    },

    /// The arcsine density was queried at an endpoint where it diverges.
    #[error("endpoint singularity: the arcsine density is unbounded at p={p}")]
    EndpointSingularity {
        /// Offending evaluation point (0 or 1).
        p: f64,
    },

    /// A time-sharing distribution selector or parameter set was rejected.
    #[error("invalid time-sharing distribution: {0}")]
    InvalidDistribution(String),

    /// A collusion-channel vector violated the marking condition, left the
    /// unit box, or failed to parse.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A coalition size outside the domain of the requested operation.
    #[error("invalid collusion size: c={c} ({reason})")]
    InvalidCollusionSize {
        /// Rejected coalition size.
        c: usize,
        /// Why it was rejected.
        reason: &'static str,
    },

    /// A coalition size beyond the supported limit of a solver or closed form.
    #[error("collusion size c={c} exceeds the limit {limit} supported by {what}")]
    CapabilityLimit {
        /// Requested coalition size.
        c: usize,
        /// Largest supported size.
        limit: usize,
        /// Operation that enforces the limit.
        what: &'static str,
    },

    /// A solver configuration field was out of range.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    /// An iterative solver exhausted its iteration budget.
    #[error(
        "no convergence after {iters} iterations: rate gap {gap_bits:.3e} bits \
         (tolerance {tol_bits:.3e}), max channel update {theta_gap:.3e}"
    )]
    NoConvergence {
        /// Iterations performed.
        iters: usize,
        /// Rate change over the final iteration, in bits.
        gap_bits: f64,
        /// Configured rate tolerance, in bits.
        tol_bits: f64,
        /// Largest channel-coordinate change over the final iteration.
        theta_gap: f64,
    },

    /// A fixed-point update became ill-defined because the output
    /// distribution was degenerate at an interior quadrature node.
    #[error("degenerate update: P(Y=1)={q} at node p={p}")]
    DegenerateUpdate {
        /// Degenerate conditional output probability.
        q: f64,
        /// Quadrature node at which it occurred.
        p: f64,
    },

    /// Every restart of a descent solver failed to make line-search progress.
    #[error("optimizer stalled: no restart made progress (best rate {best_rate_bits} bits)")]
    OptimizerStalled {
        /// Best objective value seen across all restarts, in bits.
        best_rate_bits: f64,
        /// Channel achieving that value.
        best_theta: Vec<f64>,
    },

    /// The zero-rate bias interval is undefined for this coalition size.
    #[error("no null-rate interval for c={c}: defined only for c >= 3")]
    NoNullRateInterval {
        /// Rejected coalition size.
        c: usize,
    },

    /// A bias-aware strategy could not produce a channel at the given bias.
    #[error("strategy undefined at p={p}")]
    StrategyUndefined {
        /// Bias at which the strategy rule failed.
        p: f64,
    },

    /// The coalition handed to the collusion simulator does not match the
    /// channel's coalition size.
    #[error("collusion size mismatch: channel expects c={expected} colluders, got {got}")]
    CollusionSizeMismatch {
        /// Coalition size of the channel.
        expected: usize,
        /// Number of colluders supplied.
        got: usize,
    },

    /// A Monte-Carlo request violated a precondition (sample floor, estimator
    /// applicability).
    #[error("invalid monte-carlo request: {0}")]
    InvalidMcRequest(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
