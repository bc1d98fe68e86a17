//! Achievable rates for the joint and simple decoders.
//!
//! Fix a coalition size `c`, a collusion channel `theta`, and a bias `p`.
//! With `b_sigma(p)` the Bernstein weights and
//! `q(p) = sum_sigma b_sigma(p) theta_sigma` the output distribution, the two
//! decoders achieve the per-position mutual-information rates
//!
//! * **joint** (score computed against the whole coalition):
//!   `r_joint(p) = (1/c) * [h(q) - sum_sigma b_sigma(p) h(theta_sigma)]`,
//!   the conditional mutual information between the coalition's symbol count
//!   and the forged output, normalised per colluder;
//! * **simple** (score computed against one user at a time):
//!   `r_simple(p) = h(q) - p h(q1) - (1-p) h(q0)`, the mutual information
//!   between a single colluder's symbol and the output, where
//!   `q1 = P(Y=1 | X=1, p)` and `q0 = P(Y=1 | X=0, p)`.
//!
//! The code rate of the fingerprinting scheme is the expectation of either
//! quantity over the time-sharing distribution. Entropies are accumulated in
//! nats internally; every public function reports bits.
//!
//! The joint rate has an equivalent Kullback–Leibler form,
//! `(1/c) sum_sigma b_sigma(p) d(theta_sigma || q)`, exposed separately so
//! tests can cross-check the two evaluation routes, and closed forms exist
//! for the uniform-pick channel under both continuous bias densities and for
//! the bias-aware joint-decoder minimiser.

use std::f64::consts::{LOG2_E, PI};
use std::fmt;

use statrs::function::gamma::ln_gamma;

use crate::collusion::{bernstein_row, ClassDStrategy, ClassTag, CollusionChannel, MAX_COALITION};
use crate::entropy::{hb_bits, hb_nats, nats_to_bits};
use crate::numeric::KahanSum;
use crate::timeshare::TimeSharingDist;
use crate::{Error, Result};

/// Which decoder a rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    /// Scores the coalition jointly; rates are per colluder.
    Joint,
    /// Scores one user at a time.
    Simple,
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Joint => "joint",
            Decoder::Simple => "simple",
        })
    }
}

impl std::str::FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joint" => Ok(Decoder::Joint),
            "simple" => Ok(Decoder::Simple),
            other => Err(Error::InvalidConfig(format!(
                "unknown decoder {other:?}; expected joint or simple"
            ))),
        }
    }
}

/// Mutual-information functionals are non-negative; accumulated rounding may
/// leave a value a few ulps below zero, which is snapped to exactly 0. A
/// deficit beyond this budget indicates a genuine bug and is not masked.
const NEGATIVE_RATE_SLOP: f64 = 1e-12;

#[inline]
fn clamp_rate(r: f64) -> f64 {
    if r < 0.0 && r > -NEGATIVE_RATE_SLOP {
        0.0
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Pointwise rates
// ---------------------------------------------------------------------------

/// Pointwise joint-decoder rate at bias `p`, in bits:
/// `(1/c) [h(q(p)) - sum_sigma b_sigma(p) h(theta_sigma)]`.
pub fn r_joint_point(ch: &CollusionChannel, p: f64) -> f64 {
    let c = ch.c();
    let row = bernstein_row(c, p);
    let mut q = KahanSum::new();
    let mut cond = KahanSum::new();
    for (b, &t) in row.iter().zip(ch.theta()) {
        q.add(b * t);
        cond.add(b * hb_nats(t));
    }
    let i_nats = hb_nats(q.value()) - cond.value();
    clamp_rate(nats_to_bits(i_nats) / c as f64)
}

/// Pointwise joint-decoder rate in its Kullback–Leibler form,
/// `(1/c) sum_sigma b_sigma(p) d(theta_sigma || q(p))`, in bits.
///
/// Mathematically identical to [`r_joint_point`]; evaluated through a
/// different expression so the two routes can be compared numerically.
pub fn r_joint_point_kl(ch: &CollusionChannel, p: f64) -> f64 {
    let c = ch.c();
    let row = bernstein_row(c, p);
    let q: f64 = row.iter().zip(ch.theta()).map(|(b, t)| b * t).sum();
    let mut acc = KahanSum::new();
    for (b, &t) in row.iter().zip(ch.theta()) {
        if *b == 0.0 {
            continue;
        }
        acc.add(b * kl_binary_nats(t, q));
    }
    clamp_rate(nats_to_bits(acc.value()) / c as f64)
}

/// Binary Kullback–Leibler divergence `d(a || b)` in nats, with the usual
/// `0 ln 0 = 0` conventions. Infinite when `a` puts mass where `b` has none.
fn kl_binary_nats(a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    if a > 0.0 {
        acc += a * (a / b).ln();
    }
    if a < 1.0 {
        acc += (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    }
    acc
}

/// Pointwise simple-decoder rate at bias `p`, in bits:
/// `h(q(p)) - p h(q1(p)) - (1-p) h(q0(p))`.
pub fn r_simple_point(ch: &CollusionChannel, p: f64) -> f64 {
    let q1 = ch.prob_y1_given_x(true, p);
    let q0 = ch.prob_y1_given_x(false, p);
    let q = p * q1 + (1.0 - p) * q0;
    let i_nats = hb_nats(q) - p * hb_nats(q1) - (1.0 - p) * hb_nats(q0);
    clamp_rate(nats_to_bits(i_nats))
}

/// Pointwise rate of the requested decoder.
pub fn r_point(decoder: Decoder, ch: &CollusionChannel, p: f64) -> f64 {
    match decoder {
        Decoder::Joint => r_joint_point(ch, p),
        Decoder::Simple => r_simple_point(ch, p),
    }
}

// ---------------------------------------------------------------------------
// Expected rates
// ---------------------------------------------------------------------------

/// Joint-decoder code rate: `E_P[r_joint(P)]` in bits.
pub fn rate_joint(ch: &CollusionChannel, dist: &TimeSharingDist) -> Result<f64> {
    dist.expect(|p| r_joint_point(ch, p))
}

/// Simple-decoder code rate: `E_P[r_simple(P)]` in bits.
pub fn rate_simple(ch: &CollusionChannel, dist: &TimeSharingDist) -> Result<f64> {
    dist.expect(|p| r_simple_point(ch, p))
}

/// Code rate of the requested decoder against a stationary channel.
pub fn rate(decoder: Decoder, ch: &CollusionChannel, dist: &TimeSharingDist) -> Result<f64> {
    match decoder {
        Decoder::Joint => rate_joint(ch, dist),
        Decoder::Simple => rate_simple(ch, dist),
    }
}

/// Code rate of the requested decoder against a bias-aware strategy: the
/// expectation of the pointwise rate with the channel re-evaluated at every
/// quadrature node.
pub fn rate_classd(
    strategy: &ClassDStrategy,
    decoder: Decoder,
    dist: &TimeSharingDist,
) -> Result<f64> {
    let quad = dist.quadrature();
    let mut acc = KahanSum::new();
    for (&p, &w) in quad.nodes.iter().zip(&quad.weights) {
        let ch = strategy.channel_at(p)?;
        let r = r_point(decoder, &ch, p);
        if !r.is_finite() {
            return Err(Error::IntegrandFailure { p });
        }
        acc.add(w * r);
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

fn check_closed_form_size(c: usize) -> Result<()> {
    if c == 0 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "a coalition needs at least one member",
        });
    }
    if c > MAX_COALITION {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_COALITION,
            what: "closed-form rates",
        });
    }
    Ok(())
}

/// Closed-form joint-decoder rate of the uniform-pick channel under the
/// arcsine bias density, in bits:
///
/// `(1/c) [2 - log2(e) - (1/pi) sum_sigma G(sigma) h_b(sigma/c)]`
///
/// where `G(sigma) = Gamma(sigma + 1/2) Gamma(c - sigma + 1/2) /
/// (Gamma(sigma + 1) Gamma(c - sigma + 1))` is the arcsine expectation of the
/// Bernstein weight `b_sigma` (times `pi`).
pub fn rate_joint_class_a_tardos(c: usize) -> Result<f64> {
    check_closed_form_size(c)?;
    let cf = c as f64;
    let mut sum = KahanSum::new();
    for sigma in 1..c {
        let sf = sigma as f64;
        let ln_g = ln_gamma(sf + 0.5) + ln_gamma(cf - sf + 0.5)
            - ln_gamma(sf + 1.0)
            - ln_gamma(cf - sf + 1.0);
        sum.add(ln_g.exp() * hb_bits(sf / cf));
    }
    Ok((2.0 - LOG2_E - sum.value() / PI) / cf)
}

/// Closed-form joint-decoder rate of the uniform-pick channel under the
/// uniform bias density, in bits:
/// `(1/c) [log2(e)/2 - (1/(c+1)) sum_sigma h_b(sigma/c)]`.
pub fn rate_joint_class_a_flat(c: usize) -> Result<f64> {
    check_closed_form_size(c)?;
    let cf = c as f64;
    let mut sum = KahanSum::new();
    for sigma in 1..c {
        sum.add(hb_bits(sigma as f64 / cf));
    }
    Ok((0.5 * LOG2_E - sum.value() / (cf + 1.0)) / cf)
}

/// Pointwise joint-decoder rate against the bias-aware minimiser, in bits:
///
/// `(1/c) [p^c log2((1-p)^c / p^c + 1) + (1-p)^c log2(p^c / (1-p)^c + 1)]`.
///
/// This is `r_joint_point` evaluated at the closed-form worst channel, which
/// plays `theta_sigma = p^c / (p^c + (1-p)^c)` in every interior coordinate.
pub fn r_joint_classd_closed(c: usize, p: f64) -> Result<f64> {
    check_closed_form_size(c)?;
    let a = p.powi(c as i32);
    let b = (1.0 - p).powi(c as i32);
    let mut acc = 0.0;
    if a > 0.0 {
        acc += a * (b / a + 1.0).log2();
    }
    if b > 0.0 {
        acc += b * (a / b + 1.0).log2();
    }
    Ok(acc / c as f64)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Solver/evaluation diagnostics attached to a [`RateReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Iterations spent by the solver (0 for direct evaluations).
    pub iterations: usize,
    /// Rate change over the final solver iteration, in bits.
    pub final_gap_bits: f64,
    /// Quadrature nodes used for expectations.
    pub node_count: usize,
}

/// The channel or strategy a reported rate was evaluated against.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    /// A stationary channel (classes A–C).
    Stationary(CollusionChannel),
    /// A bias-aware strategy (class D).
    BiasAware(ClassDStrategy),
}

impl ChannelSpec {
    /// Compact textual form: the coordinate list for stationary channels,
    /// the rule kind for bias-aware strategies.
    pub fn serialize(&self) -> String {
        match self {
            ChannelSpec::Stationary(ch) => ch.serialize(),
            ChannelSpec::BiasAware(strat) => format!("p-aware:{}", strat.kind()),
        }
    }

    /// Coalition size the channel or strategy plays against.
    pub fn c(&self) -> usize {
        match self {
            ChannelSpec::Stationary(ch) => ch.c(),
            ChannelSpec::BiasAware(strat) => strat.c(),
        }
    }

    /// The channel in play at bias `p`: stationary channels ignore `p`,
    /// bias-aware strategies re-evaluate their rule there.
    pub fn channel_at(&self, p: f64) -> Result<CollusionChannel> {
        match self {
            ChannelSpec::Stationary(ch) => Ok(ch.clone()),
            ChannelSpec::BiasAware(strat) => strat.channel_at(p),
        }
    }

    /// Pointwise rate at bias `p` for `decoder`, in bits.
    pub fn r_point(&self, decoder: Decoder, p: f64) -> Result<f64> {
        match self {
            ChannelSpec::Stationary(ch) => Ok(r_point(decoder, ch, p)),
            ChannelSpec::BiasAware(strat) => Ok(r_point(decoder, &strat.channel_at(p)?, p)),
        }
    }
}

/// A fully-specified rate result, as produced by the solvers and the CLI.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Decoder the rate applies to.
    pub decoder: Decoder,
    /// Adversary class the channel was drawn from or optimised over.
    pub class_tag: ClassTag,
    /// Time-sharing distribution of the code.
    pub dist: TimeSharingDist,
    /// Coalition size.
    pub c: usize,
    /// Achievable rate in bits per position.
    pub rate_bits: f64,
    /// Channel or strategy the rate was evaluated against.
    pub channel: ChannelSpec,
    /// Evaluation diagnostics.
    pub diagnostics: Diagnostics,
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
