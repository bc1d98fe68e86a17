//! Collusion channels and the Bernstein-polynomial machinery behind them.
//!
//! A coalition of `c` colluders holding a code position with bias `p`
//! observes `Sigma ~ Binomial(c, p)` ones among its symbols. Under the
//! marking condition its behaviour is fully described by the vector
//! `theta = (theta_0, ..., theta_c)` with
//! `theta_sigma = P(Y = 1 | Sigma = sigma)`, pinned to `theta_0 = 0` and
//! `theta_c = 1` (a position where all colluders agree cannot be forged).
//!
//! Channel classes, from weakest to strongest adversary:
//!
//! * **A** — `theta_sigma = sigma / c`: output a symbol picked from a
//!   uniformly chosen colluder.
//! * **B** — reflection-symmetric channels, `theta_sigma = 1 - theta_{c-sigma}`.
//! * **C** — every vector in the unit box satisfying the marking condition.
//! * **D** — bias-aware strategies: a channel-valued function of `p`,
//!   modelling a coalition that knows the embedding distribution.
//!
//! The binomial mixture weights `P(Sigma = sigma | P = p)` are Bernstein
//! polynomials; everything downstream (output distributions, rates,
//! gradients) is linear algebra over them, so they live here too.

use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Largest coalition size accepted anywhere in the crate. Beyond this the
/// Bernstein weights underflow so completely that every rate is numerically
/// zero and no supported computation remains meaningful.
pub const MAX_COALITION: usize = 200;

/// Tolerance for marking/box validation and for channel-class tagging.
const CLASS_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Binomial and Bernstein helpers
// ---------------------------------------------------------------------------

/// Binomial coefficient as a float: exact integer arithmetic for `n <= 60`,
/// log-gamma otherwise.
pub fn binom(n: usize, k: usize) -> f64 {
    assert!(k <= n, "binomial coefficient needs k <= n, got ({n}, {k})");
    if n <= 60 {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 1..=k {
            acc = acc * (n - k + i) as u128 / i as u128;
        }
        acc as f64
    } else {
        (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
            .exp()
    }
}

/// Bernstein basis polynomial `C(c, sigma) p^sigma (1-p)^(c-sigma)`: the
/// probability that exactly `sigma` of `c` colluders hold a `1` at bias `p`.
///
/// # Panics
///
/// Panics with "invalid sigma" when `sigma > c`.
pub fn bernstein(c: usize, sigma: usize, p: f64) -> f64 {
    assert!(sigma <= c, "invalid sigma: {sigma} > c = {c}");
    if c <= 60 {
        binom(c, sigma) * p.powi(sigma as i32) * (1.0 - p).powi((c - sigma) as i32)
    } else if p <= 0.0 {
        if sigma == 0 {
            1.0
        } else {
            0.0
        }
    } else if p >= 1.0 {
        if sigma == c {
            1.0
        } else {
            0.0
        }
    } else {
        let ln_b = ln_gamma(c as f64 + 1.0)
            - ln_gamma(sigma as f64 + 1.0)
            - ln_gamma((c - sigma) as f64 + 1.0)
            + sigma as f64 * p.ln()
            + (c - sigma) as f64 * (1.0 - p).ln();
        ln_b.exp()
    }
}

/// All Bernstein weights of order `c` at bias `p`, indexed by `sigma`.
pub fn bernstein_row(c: usize, p: f64) -> Vec<f64> {
    // Powers are built incrementally from both ends so no division is
    // needed, which keeps the row finite (and exact at p = 0 and p = 1).
    if c > 60 {
        return (0..=c).map(|sigma| bernstein(c, sigma, p)).collect();
    }
    let q = 1.0 - p;
    let mut row = vec![0.0; c + 1];
    let mut p_pow = 1.0;
    for (sigma, slot) in row.iter_mut().enumerate() {
        *slot = binom(c, sigma) * p_pow;
        p_pow *= p;
    }
    let mut q_pow = 1.0;
    for sigma in (0..=c).rev() {
        row[sigma] *= q_pow;
        q_pow *= q;
    }
    row
}

/// Derivative of the Bernstein basis polynomial in `p`, via the analytic
/// identity `b'_{sigma,c} = c (b_{sigma-1,c-1} - b_{sigma,c-1})` (terms with
/// out-of-range index vanish).
pub fn bernstein_deriv(c: usize, sigma: usize, p: f64) -> f64 {
    assert!(sigma <= c, "invalid sigma: {sigma} > c = {c}");
    if c == 0 {
        return 0.0;
    }
    let lower = if sigma > 0 {
        bernstein(c - 1, sigma - 1, p)
    } else {
        0.0
    };
    let upper = if sigma < c {
        bernstein(c - 1, sigma, p)
    } else {
        0.0
    };
    c as f64 * (lower - upper)
}

/// Coefficient of `theta_i` in the gap `P(Y=1 | X=1) - P(Y=1 | X=0)` at bias
/// `p`, for `1 <= i <= c`:
///
/// * `i < c`: `C(c, i) p^(i-1) (1-p)^(c-i-1) (i/c - p)`,
/// * `i = c`: `p^(c-1)`.
///
/// The simple-decoder rate vanishes at `p` exactly when the inner-product
/// form `rho_c + sum_i theta_i rho_i` is zero, so these coefficients define
/// the zero-rate hyperplane in channel space.
pub fn scalar_rho(c: usize, i: usize, p: f64) -> f64 {
    assert!(
        (1..=c).contains(&i),
        "hyperplane coefficient index must satisfy 1 <= i <= c, got i = {i}, c = {c}"
    );
    if i == c {
        return p.powi(c as i32 - 1);
    }
    binom(c, i)
        * p.powi(i as i32 - 1)
        * (1.0 - p).powi((c - i) as i32 - 1)
        * (i as f64 / c as f64 - p)
}

// ---------------------------------------------------------------------------
// Stationary channels
// ---------------------------------------------------------------------------

/// Classification of a collusion channel or strategy, from the weakest
/// adversary (A) to the strongest (D). Classes are nested: A is a class-B
/// channel, and every class-B channel is class-C.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassTag {
    /// The uniform-pick channel `theta_sigma = sigma / c`.
    A,
    /// Reflection-symmetric: `theta_sigma = 1 - theta_{c-sigma}`.
    B,
    /// Any marking-feasible channel in the unit box.
    C,
    /// Bias-aware strategy `p -> theta(p)`.
    D,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            ClassTag::A => "A",
            ClassTag::B => "B",
            ClassTag::C => "C",
            ClassTag::D => "D",
        };
        f.write_str(tag)
    }
}

/// A stationary collusion channel `theta = (theta_0, ..., theta_c)`.
///
/// Invariants held by construction: `theta_0 = 0`, `theta_c = 1` (marking
/// condition) and, for channels built with [`CollusionChannel::new`], every
/// coordinate lies in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CollusionChannel {
    theta: Vec<f64>,
}

impl CollusionChannel {
    /// Validates and builds a channel from `(theta_0, ..., theta_c)`.
    ///
    /// Coordinates may stray from the unit box or the marking pins by at
    /// most `1e-9` (they are snapped back); larger violations are rejected.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::InvalidChannel(format!(
                "need at least (theta_0, theta_1) for c = 1, got {} coordinates",
                theta.len()
            )));
        }
        if theta.len() > MAX_COALITION + 1 {
            return Err(Error::CapabilityLimit {
                c: theta.len() - 1,
                limit: MAX_COALITION,
                what: "collusion channels",
            });
        }
        let mut theta = theta;
        for (sigma, t) in theta.iter_mut().enumerate() {
            if !t.is_finite() || *t < -CLASS_TOL || *t > 1.0 + CLASS_TOL {
                return Err(Error::InvalidChannel(format!(
                    "theta_{sigma} = {t} outside [0, 1]"
                )));
            }
            *t = t.clamp(0.0, 1.0);
        }
        let c = theta.len() - 1;
        if theta[0] > CLASS_TOL {
            return Err(Error::InvalidChannel(format!(
                "marking condition needs theta_0 = 0, got {}",
                theta[0]
            )));
        }
        if theta[c] < 1.0 - CLASS_TOL {
            return Err(Error::InvalidChannel(format!(
                "marking condition needs theta_c = 1, got {}",
                theta[c]
            )));
        }
        theta[0] = 0.0;
        theta[c] = 1.0;
        Ok(Self { theta })
    }

    /// Builds a channel that honours the marking pins but whose interior
    /// coordinates may leave [0, 1]. Only used for analysis artefacts (e.g.
    /// least-squares projections of bias-aware attacks), which are evaluated
    /// as polynomials and never simulated.
    pub(crate) fn new_relaxed(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::InvalidChannel(format!(
                "need at least (theta_0, theta_1) for c = 1, got {} coordinates",
                theta.len()
            )));
        }
        let mut theta = theta;
        for (sigma, t) in theta.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidChannel(format!(
                    "theta_{sigma} = {t} is not finite"
                )));
            }
        }
        let c = theta.len() - 1;
        theta[0] = 0.0;
        theta[c] = 1.0;
        Ok(Self { theta })
    }

    /// The uniform-pick (class-A) channel `theta_sigma = sigma / c`.
    pub fn class_a(c: usize) -> Result<Self> {
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
                what: "collusion channels",
            });
        }
        let theta = (0..=c).map(|sigma| sigma as f64 / c as f64).collect();
        Ok(Self { theta })
    }

    /// The all-ones channel `theta = (0, 1, ..., 1)`: output `1` whenever any
    /// colluder holds a `1`.
    pub fn all_ones(c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidCollusionSize {
                c,
                reason: "a coalition needs at least one member",
            });
        }
        let mut theta = vec![1.0; c + 1];
        theta[0] = 0.0;
        Self::new(theta)
    }

    /// Parses the comma-separated channel form, e.g. `0,0.34,0.66,1`.
    pub fn parse(s: &str) -> Result<Self> {
        let theta: std::result::Result<Vec<f64>, _> =
            s.trim().split(',').map(|t| t.trim().parse::<f64>()).collect();
        let theta = theta.map_err(|e| {
            Error::InvalidChannel(format!("unparseable channel {s:?}: {e}"))
        })?;
        Self::new(theta)
    }

    /// Renders the comma-separated channel form; the inverse of
    /// [`CollusionChannel::parse`].
    pub fn serialize(&self) -> String {
        let parts: Vec<String> = self.theta.iter().map(|t| format!("{t}")).collect();
        parts.join(",")
    }

    /// Coalition size `c`.
    pub fn c(&self) -> usize {
        self.theta.len() - 1
    }

    /// Full coordinate vector `(theta_0, ..., theta_c)`.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Single coordinate `theta_sigma`.
    ///
    /// # Panics
    ///
    /// Panics with "invalid sigma" when `sigma > c`.
    pub fn theta_sigma(&self, sigma: usize) -> f64 {
        assert!(
            sigma < self.theta.len(),
            "invalid sigma: {sigma} > c = {}",
            self.c()
        );
        self.theta[sigma]
    }

    /// The reflected channel `theta'_sigma = 1 - theta_{c-sigma}`: the image
    /// of this channel under relabelling both the colluders' symbols and the
    /// output. Class-B channels are the fixed points of this map.
    pub fn mirror(&self) -> Self {
        let c = self.c();
        let theta = (0..=c).map(|sigma| 1.0 - self.theta[c - sigma]).collect();
        Self { theta }
    }

    /// Whether this is the uniform-pick channel, within `1e-9` per
    /// coordinate.
    pub fn is_class_a(&self) -> bool {
        let c = self.c() as f64;
        self.theta
            .iter()
            .enumerate()
            .all(|(sigma, &t)| (t - sigma as f64 / c).abs() <= CLASS_TOL)
    }

    /// Whether the channel is reflection-symmetric, within `1e-9` per
    /// coordinate.
    pub fn is_class_b(&self) -> bool {
        let c = self.c();
        (0..=c).all(|sigma| (self.theta[sigma] - (1.0 - self.theta[c - sigma])).abs() <= CLASS_TOL)
    }

    /// The most specific class tag this stationary channel belongs to.
    pub fn class_tag(&self) -> ClassTag {
        if self.is_class_a() {
            ClassTag::A
        } else if self.is_class_b() {
            ClassTag::B
        } else {
            ClassTag::C
        }
    }

    /// Output distribution `P(Y = 1 | P = p) = sum_sigma b_sigma(p) theta_sigma`.
    pub fn prob_y1(&self, p: f64) -> f64 {
        let row = bernstein_row(self.c(), p);
        row.iter().zip(&self.theta).map(|(b, t)| b * t).sum()
    }

    /// Derivative of [`CollusionChannel::prob_y1`] in `p`, via the analytic
    /// Bernstein identity (no finite differences).
    pub fn prob_y1_deriv(&self, p: f64) -> f64 {
        let c = self.c();
        let row = bernstein_row(c - 1, p);
        let mut acc = 0.0;
        for (sigma, b) in row.iter().enumerate() {
            acc += (self.theta[sigma + 1] - self.theta[sigma]) * b;
        }
        c as f64 * acc
    }

    /// Output distribution conditioned on one colluder's own symbol:
    ///
    /// * `x = true`: `P(Y=1 | X=1, p) = sum_{k=1}^{c} theta_k C(c-1, k-1) p^(k-1) (1-p)^(c-k)`,
    /// * `x = false`: `P(Y=1 | X=0, p) = sum_{k=0}^{c-1} theta_k C(c-1, k) p^k (1-p)^(c-1-k)`.
    ///
    /// Conditioning on `X` shifts the binomial count of the remaining
    /// `c - 1` colluders, hence the order-`c-1` Bernstein weights.
    pub fn prob_y1_given_x(&self, x: bool, p: f64) -> f64 {
        let c = self.c();
        let row = bernstein_row(c - 1, p);
        if x {
            row.iter()
                .enumerate()
                .map(|(k, b)| self.theta[k + 1] * b)
                .sum()
        } else {
            row.iter().enumerate().map(|(k, b)| self.theta[k] * b).sum()
        }
    }

    /// The zero-rate gap `P(Y=1 | X=1, p) - P(Y=1 | X=0, p)` evaluated in its
    /// inner-product form `rho_c(p) + sum_{i=1}^{c-1} theta_i rho_i(p)`.
    pub fn hyperplane_gap(&self, p: f64) -> f64 {
        let c = self.c();
        let mut acc = scalar_rho(c, c, p);
        for i in 1..c {
            acc += self.theta[i] * scalar_rho(c, i, p);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Bias-aware strategies (class D)
// ---------------------------------------------------------------------------

/// How a bias-aware strategy was produced; reported in diagnostics and used
/// to pick serialisation forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// The closed-form minimiser of the joint-decoder rate.
    JointClosedForm,
    /// The semi-analytic minimiser of the simple-decoder rate.
    SimpleWorst,
    /// A caller-supplied rule.
    Custom,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StrategyKind::JointClosedForm => "joint-closed-form",
            StrategyKind::SimpleWorst => "simple-worst",
            StrategyKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// A bias-aware (class-D) collusion strategy: a rule mapping each bias `p`
/// to a stationary channel for that position.
#[derive(Clone)]
pub struct ClassDStrategy {
    c: usize,
    kind: StrategyKind,
    rule: Arc<dyn Fn(f64) -> Result<CollusionChannel> + Send + Sync>,
}

impl fmt::Debug for ClassDStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassDStrategy")
            .field("c", &self.c)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl ClassDStrategy {
    /// Wraps a caller-supplied rule as a class-D strategy.
    pub fn new_custom<F>(c: usize, rule: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<CollusionChannel> + Send + Sync + 'static,
    {
        Self::with_kind(c, StrategyKind::Custom, rule)
    }

    pub(crate) fn with_kind<F>(c: usize, kind: StrategyKind, rule: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<CollusionChannel> + Send + Sync + 'static,
    {
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
                what: "bias-aware strategies",
            });
        }
        Ok(Self { c, kind, rule: Arc::new(rule) })
    }

    /// Coalition size `c`.
    pub fn c(&self) -> usize {
        self.c
    }

    /// Provenance of the rule.
    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    /// The channel this strategy plays at bias `p`.
    pub fn channel_at(&self, p: f64) -> Result<CollusionChannel> {
        let ch = (self.rule)(p).map_err(|_| Error::StrategyUndefined { p })?;
        assert_eq!(
            ch.c(),
            self.c,
            "strategy rule returned a channel for the wrong coalition size"
        );
        Ok(ch)
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
