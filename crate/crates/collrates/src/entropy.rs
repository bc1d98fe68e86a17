//! Binary entropy utilities.
//!
//! Every rate in this crate is a difference of binary entropies of output
//! probabilities. Internal arithmetic is in nats; conversion to bits happens
//! once, at the reporting boundary, via [`nats_to_bits`]. The convention
//! `0 * ln 0 = 0` is applied throughout so that entropies are continuous at
//! the endpoints of [0, 1].

use std::f64::consts::LN_2;

/// Clamp used by [`hb_prime_nats`] only: the entropy derivative diverges at
/// the endpoints, so gradient evaluations pin their argument to
/// `[EPS, 1 - EPS]`. Entropy values themselves are never clamped this way.
const DERIVATIVE_EPS: f64 = 1e-15;

/// `x * ln x` with the continuous extension `0 * ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy in nats: `-x ln x - (1-x) ln(1-x)`.
///
/// Arguments a few ulps outside [0, 1] (from accumulated rounding in
/// probability arithmetic) are treated as the nearest endpoint.
#[inline]
pub fn hb_nats(x: f64) -> f64 {
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&x),
        "entropy argument {x} far outside [0, 1]"
    );
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -xlnx(x) - xlnx(1.0 - x)
}

/// Binary entropy in bits.
#[inline]
pub fn hb_bits(x: f64) -> f64 {
    hb_nats(x) / LN_2
}

/// Derivative of the binary entropy in nats, `ln((1-x)/x)`, with the
/// argument clamped to `[1e-15, 1 - 1e-15]`.
///
/// The clamp exists solely so that gradient-based solvers receive a finite
/// (if enormous) slope when an output probability sits exactly on the
/// boundary; rate evaluations never use it.
#[inline]
pub fn hb_prime_nats(x: f64) -> f64 {
    let x = x.clamp(DERIVATIVE_EPS, 1.0 - DERIVATIVE_EPS);
    ((1.0 - x) / x).ln()
}

/// Converts a value in nats to bits.
#[inline]
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}
