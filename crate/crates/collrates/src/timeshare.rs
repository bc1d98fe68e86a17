//! Time-sharing distributions over the per-position bias.
//!
//! A binary fingerprinting code draws, independently for each code position,
//! a bias `p` from a distribution on (0, 1); every user's symbol at that
//! position is then a Bernoulli(`p`) draw. All rate functionals in this crate
//! are expectations over that bias, so this module owns both the catalogue of
//! supported distributions and the quadrature rules used to take those
//! expectations:
//!
//! * [`TimeSharingDist::Tardos`] — the arcsine density
//!   `f(p) = 1 / (pi * sqrt(p (1 - p)))`. Its expectation is computed with
//!   the substitution `p = sin^2(u/2)`, under which the integral becomes an
//!   ordinary average over `u` in (0, pi); the midpoint rule in `u` is then
//!   the Gauss–Chebyshev rule in `p` and integrates polynomials of degree up
//!   to `2N - 1` exactly. The endpoint singularities never appear because no
//!   node touches 0 or 1.
//! * [`TimeSharingDist::Flat`] — the uniform density on [0, 1], integrated
//!   with a Gauss–Legendre rule mapped to the unit interval.
//! * [`TimeSharingDist::DiracPair`] — mass 1/2 at `p0` and 1/2 at `1 - p0`
//!   (a single unit atom when `p0 = 1/2`); expectations are exact sums.
//! * [`TimeSharingDist::Discrete`] — an arbitrary finite list of atoms;
//!   expectations are exact sums.
//!
//! Quadrature sums are accumulated serially with compensated summation so
//! that results are bit-for-bit reproducible.

use std::f64::consts::PI;

use crate::numeric::KahanSum;
use crate::{Error, Result};

/// Default node count for the arcsine (midpoint-in-`u`) rule.
pub const TARDOS_NODES: usize = 2001;

/// Default node count for the uniform-density Gauss–Legendre rule.
pub const FLAT_NODES: usize = 501;

// ---------------------------------------------------------------------------
// Distribution type
// ---------------------------------------------------------------------------

/// A time-sharing distribution for the per-position bias.
///
/// Variants are public for pattern matching; use the validating constructors
/// ([`TimeSharingDist::dirac_pair`], [`TimeSharingDist::discrete`],
/// [`TimeSharingDist::parse`]) to build values. Hand-built variants must keep
/// the documented invariants: `DiracPair` needs `p0` in (0, 1/2], `Discrete`
/// needs atoms in (0, 1) with positive weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSharingDist {
    /// Arcsine density `1 / (pi sqrt(p(1-p)))` on (0, 1).
    Tardos,
    /// Uniform density on [0, 1].
    Flat,
    /// Mass 1/2 at `p0` and 1/2 at `1 - p0`; a single atom when `p0 = 1/2`.
    DiracPair {
        /// Lower atom, in (0, 1/2].
        p0: f64,
    },
    /// Finite atom list `(p_i, w_i)`.
    Discrete {
        /// Atoms as `(location, weight)` pairs, in the order supplied.
        atoms: Vec<(f64, f64)>,
    },
}

/// Local value of a distribution at a point: a density for the absolutely
/// continuous distributions, a point mass for the atomic ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    /// Value of the probability density function at the query point.
    Density(f64),
    /// Probability mass sitting exactly at the query point.
    Mass(f64),
}

impl TimeSharingDist {
    /// Builds the symmetric two-atom distribution with mass 1/2 at `p0` and
    /// `1 - p0`. Requires `p0` in (0, 1/2]; `p0 = 1/2` degenerates to a
    /// single unit atom at 1/2.
    pub fn dirac_pair(p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 <= 0.5) {
            return Err(Error::InvalidDistribution(format!(
                "dirac pair location must lie in (0, 1/2], got {p0}"
            )));
        }
        Ok(TimeSharingDist::DiracPair { p0 })
    }

    /// Builds a finite discrete distribution from `(location, weight)` atoms.
    ///
    /// Locations must be distinct and lie in (0, 1); weights must be positive
    /// and sum to 1 within `1e-9`. Weights are renormalised to sum to 1
    /// exactly.
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution(
                "discrete distribution needs at least one atom".into(),
            ));
        }
        let mut total = KahanSum::new();
        for &(p, w) in &atoms {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidDistribution(format!(
                    "atom location must lie in (0, 1), got {p}"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidDistribution(format!(
                    "atom weight must be positive and finite, got {w}"
                )));
            }
            total.add(w);
        }
        for (i, &(p, _)) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|&(q, _)| q == p) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate atom location {p}"
                )));
            }
        }
        let total = total.value();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "atom weights sum to {total}, expected 1"
            )));
        }
        let atoms = atoms.into_iter().map(|(p, w)| (p, w / total)).collect();
        Ok(TimeSharingDist::Discrete { atoms })
    }

    /// Parses a distribution selector.
    ///
    /// Accepted forms: `tardos`, `flat`, `dirac:<p0>`, and
    /// `discrete:<p1>:<w1>,<p2>:<w2>,...`.
    pub fn parse(selector: &str) -> Result<Self> {
        let s = selector.trim();
        match s {
            "tardos" => return Ok(TimeSharingDist::Tardos),
            "flat" => return Ok(TimeSharingDist::Flat),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("dirac:") {
            let p0: f64 = arg.parse().map_err(|_| {
                Error::InvalidDistribution(format!("unparseable dirac location {arg:?}"))
            })?;
            return Self::dirac_pair(p0);
        }
        if let Some(arg) = s.strip_prefix("discrete:") {
            let mut atoms = Vec::new();
            for pair in arg.split(',') {
                let (p_str, w_str) = pair.split_once(':').ok_or_else(|| {
                    Error::InvalidDistribution(format!(
                        "discrete atom {pair:?} is not of the form <p>:<w>"
                    ))
                })?;
                let p: f64 = p_str.parse().map_err(|_| {
                    Error::InvalidDistribution(format!("unparseable atom location {p_str:?}"))
                })?;
                let w: f64 = w_str.parse().map_err(|_| {
                    Error::InvalidDistribution(format!("unparseable atom weight {w_str:?}"))
                })?;
                atoms.push((p, w));
            }
            return Self::discrete(atoms);
        }
        Err(Error::InvalidDistribution(format!(
            "unknown selector {s:?}; expected tardos, flat, dirac:<p0>, or discrete:<p:w,...>"
        )))
    }

    /// Renders the canonical selector string for this distribution; the
    /// inverse of [`TimeSharingDist::parse`].
    pub fn selector(&self) -> String {
        match self {
            TimeSharingDist::Tardos => "tardos".into(),
            TimeSharingDist::Flat => "flat".into(),
            TimeSharingDist::DiracPair { p0 } => format!("dirac:{p0}"),
            TimeSharingDist::Discrete { atoms } => {
                let body: Vec<String> =
                    atoms.iter().map(|(p, w)| format!("{p}:{w}")).collect();
                format!("discrete:{}", body.join(","))
            }
        }
    }

    /// Whether the distribution is invariant under `p -> 1 - p`.
    ///
    /// Worst-case channels inherit a reflection symmetry from symmetric
    /// distributions, and several solver postconditions apply only then.
    pub fn is_symmetric(&self) -> bool {
        match self {
            TimeSharingDist::Tardos | TimeSharingDist::Flat => true,
            TimeSharingDist::DiracPair { .. } => true,
            TimeSharingDist::Discrete { atoms } => atoms.iter().all(|&(p, w)| {
                atoms
                    .iter()
                    .any(|&(q, v)| (q - (1.0 - p)).abs() <= 1e-12 && (v - w).abs() <= 1e-12)
            }),
        }
    }

    /// Local density or point mass at `p`.
    ///
    /// The arcsine density is unbounded at the endpoints and querying it at
    /// `p = 0` or `p = 1` is an error; outside [0, 1] every variant reports
    /// zero. Atomic distributions report the mass at exactly `p` (zero off
    /// the support).
    pub fn density(&self, p: f64) -> Result<DensityValue> {
        match self {
            TimeSharingDist::Tardos => {
                if p == 0.0 || p == 1.0 {
                    return Err(Error::EndpointSingularity { p });
                }
                if !(0.0..=1.0).contains(&p) {
                    return Ok(DensityValue::Density(0.0));
                }
                Ok(DensityValue::Density(1.0 / (PI * (p * (1.0 - p)).sqrt())))
            }
            TimeSharingDist::Flat => Ok(DensityValue::Density(
                if (0.0..=1.0).contains(&p) { 1.0 } else { 0.0 },
            )),
            TimeSharingDist::DiracPair { p0 } => {
                let mass = if *p0 == 0.5 {
                    if p == 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                } else if p == *p0 || p == 1.0 - *p0 {
                    0.5
                } else {
                    0.0
                };
                Ok(DensityValue::Mass(mass))
            }
            TimeSharingDist::Discrete { atoms } => Ok(DensityValue::Mass(
                atoms
                    .iter()
                    .find(|&&(q, _)| q == p)
                    .map_or(0.0, |&(_, w)| w),
            )),
        }
    }

    // -----------------------------------------------------------------------
    // Expectations
    // -----------------------------------------------------------------------

    /// Quadrature rule (nodes and probability weights) at the default node
    /// budget. Weights sum to 1; atomic distributions return their support.
    pub fn quadrature(&self) -> Quadrature {
        match self {
            TimeSharingDist::Tardos => self.quadrature_n(TARDOS_NODES),
            TimeSharingDist::Flat => self.quadrature_n(FLAT_NODES),
            _ => self.quadrature_n(0),
        }
    }

    /// Quadrature rule with an explicit node budget for the continuous
    /// distributions (atomic distributions ignore `nodes`: their rule is the
    /// exact support sum).
    pub fn quadrature_n(&self, nodes: usize) -> Quadrature {
        match self {
            TimeSharingDist::Tardos => {
                let n = nodes.max(1);
                let w = 1.0 / n as f64;
                let (ps, ws) = (0..n)
                    .map(|k| {
                        let u = (k as f64 + 0.5) * PI / n as f64;
                        let s = (0.5 * u).sin();
                        (s * s, w)
                    })
                    .unzip();
                Quadrature { nodes: ps, weights: ws }
            }
            TimeSharingDist::Flat => {
                let (nodes, weights) = gauss_legendre_unit(nodes.max(1));
                Quadrature { nodes, weights }
            }
            TimeSharingDist::DiracPair { p0 } => {
                if *p0 == 0.5 {
                    Quadrature { nodes: vec![0.5], weights: vec![1.0] }
                } else {
                    Quadrature {
                        nodes: vec![*p0, 1.0 - *p0],
                        weights: vec![0.5, 0.5],
                    }
                }
            }
            TimeSharingDist::Discrete { atoms } => {
                let (nodes, weights) = atoms.iter().copied().unzip();
                Quadrature { nodes, weights }
            }
        }
    }

    /// Expectation `E[g(P)]` at the default node budget.
    ///
    /// Fails with [`Error::IntegrandFailure`] if `g` returns a non-finite
    /// value at any node.
    pub fn expect(&self, g: impl FnMut(f64) -> f64) -> Result<f64> {
        self.quadrature().expect(g)
    }

    /// Expectation `E[g(P)]` at an explicit node budget (continuous
    /// distributions only; atoms are always summed exactly).
    pub fn expect_n(&self, nodes: usize, g: impl FnMut(f64) -> f64) -> Result<f64> {
        self.quadrature_n(nodes).expect(g)
    }

    /// Draws one bias from the distribution.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TimeSharingDist::Tardos => {
                // Inverse CDF of the arcsine law: p = sin^2(pi u / 2).
                let u: f64 = rng.gen();
                let s = (0.5 * PI * u).sin();
                s * s
            }
            TimeSharingDist::Flat => rng.gen(),
            TimeSharingDist::DiracPair { p0 } => {
                let u: f64 = rng.gen();
                if u < 0.5 {
                    *p0
                } else {
                    1.0 - *p0
                }
            }
            TimeSharingDist::Discrete { atoms } => {
                let u: f64 = rng.gen();
                let mut cdf = 0.0;
                for &(p, w) in atoms {
                    cdf += w;
                    if u < cdf {
                        return p;
                    }
                }
                atoms.last().expect("non-empty atom list").0
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Quadrature rules
// ---------------------------------------------------------------------------

/// A fixed quadrature rule: nodes in (0, 1) and probability weights.
#[derive(Debug, Clone)]
pub struct Quadrature {
    /// Evaluation points.
    pub nodes: Vec<f64>,
    /// Weights; they sum to 1.
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// Weighted sum `sum_k w_k g(p_k)` with compensated accumulation.
    pub fn expect(&self, mut g: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut acc = KahanSum::new();
        for (&p, &w) in self.nodes.iter().zip(&self.weights) {
            let y = g(p);
            if !y.is_finite() {
                return Err(Error::IntegrandFailure { p });
            }
            acc.add(w * y);
        }
        Ok(acc.value())
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Whether the rule has no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [0, 1], weights summing to 1.
///
/// Roots of the degree-`n` Legendre polynomial are found by Newton iteration
/// from the usual Chebyshev initial guesses; each root is polished to machine
/// precision. The rule is exact for polynomials of degree `2n - 1`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th root in descending order on (-1, 1).
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre_with_derivative(n, x);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        let (_, dpn) = legendre_with_derivative(n, x);
        let w = 1.0 / ((1.0 - x * x) * dpn * dpn);
        // Map the symmetric pair +-x to the unit interval (ascending order);
        // giving mirror nodes identical weights keeps the rule symmetric to
        // the last ulp.
        nodes[i] = 0.5 - 0.5 * x;
        nodes[n - 1 - i] = 0.5 + 0.5 * x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[half - 1] = 0.5;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
