//! Worst-case collusion channels per decoder and adversary class.
//!
//! For a fixed decoder, coalition size, and time-sharing distribution, the
//! achievable rate is minimised over a class of collusion channels. Each
//! class gets the solver its structure admits:
//!
//! * **Joint decoder, classes B/C** — [`worst_joint_bc`]: an alternating
//!   minimisation in the Blahut–Arimoto style. The rate is convex in the
//!   channel, and minimising each coordinate against the current output
//!   distribution has the closed-form update
//!   `theta_sigma <- 1 / (1 + B(sigma))` with
//!   `B(sigma) = exp( E[b_sigma ln((1-q)/q)] / E[b_sigma] )`;
//!   iterating is monotone and converges to the unique worst channel, which
//!   is reflection-symmetric (class B) whenever the distribution is.
//! * **Joint decoder, class D** — [`worst_joint_classd`]: closed form; at
//!   bias `p` every interior coordinate is `p^c / (p^c + (1-p)^c)`. The
//!   capacity of the resulting game, [`capacity_classd_joint`], is
//!   `1/(c 2^(c-1))`, achieved by concentrating the bias at 1/2.
//! * **Simple decoder, classes B/C** — [`worst_simple_bc`]: multistart
//!   projected gradient descent over the channel box with analytic
//!   gradients. The objective is not convex; restarts (class-A start plus
//!   seeded uniform draws) make the search reliable and deterministic, and
//!   boundary coordinates are allowed to stick at 0/1.
//! * **Simple decoder, class D** — [`worst_simple_classd`]: semi-analytic.
//!   Inside the null-rate bias interval `[eta_c, 1 - eta_c]` (see [`eta_c`])
//!   the adversary can zero the rate exactly on the hyperplane where the
//!   conditional outputs coincide; outside it the minimiser has a single
//!   free coordinate found by a grid-plus-golden-section line search.
//! * **Projection heuristic** — [`conv_projection_attack`]: the
//!   least-squares projection, onto stationary channels, of the bias-aware
//!   attack whose output probability equals the arcsine CDF
//!   `2 arcsin(sqrt(p)) / pi`; a conjectured near-minimiser for the simple
//!   decoder, reported for comparison rather than asserted.

use rayon::prelude::*;

use crate::collusion::{
    bernstein, scalar_rho, ClassDStrategy, CollusionChannel, StrategyKind, MAX_COALITION,
};
use crate::entropy::{hb_nats, hb_prime_nats, nats_to_bits};
use crate::numeric::{rng_stream, solve_dense, KahanSum};
use crate::rates::rate_simple;
use crate::timeshare::{Quadrature, TimeSharingDist};
use crate::{Error, Result};

/// Largest coalition size for the joint-decoder fixed-point solver.
pub const MAX_JOINT_SOLVER: usize = 50;

/// Largest coalition size for the simple-decoder box search.
pub const MAX_SIMPLE_SOLVER: usize = 15;

/// Channel-coordinate stability required, on top of the rate gap, before the
/// fixed-point solver declares convergence. The rate is flat to second order
/// around the minimiser, so a rate gap below `gap_tol_bits` alone can leave
/// coordinates (and the fixed-point residual) at ~1e-6; requiring the last
/// update to move no coordinate by more than this pins the residual to ~1e-11.
const THETA_STEP_TOL: f64 = 1e-10;

/// Infinity-norm of the projected gradient at which the box search stops.
const PROJECTED_GRAD_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

/// Tuning knobs shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Iteration budget per solve (fixed point) or per restart (descent).
    pub max_iters: usize,
    /// Stop when the objective improves by less than this many bits.
    pub gap_tol_bits: f64,
    /// Grid resolution for one-dimensional line searches.
    pub grid_points: usize,
    /// Number of descent restarts (first is the class-A start).
    pub restarts: usize,
    /// Seed from which all restart RNG streams are derived.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            gap_tol_bits: 1e-12,
            grid_points: 1001,
            restarts: 20,
            seed: 7,
        }
    }
}

impl SolverConfig {
    /// Validates the field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.gap_tol_bits > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gap_tol_bits must be positive, got {}",
                self.gap_tol_bits
            )));
        }
        if self.grid_points < 11 {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be at least 11, got {}",
                self.grid_points
            )));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Joint decoder: classes B/C by alternating minimisation
// ---------------------------------------------------------------------------

/// Result of the joint-decoder fixed-point solve.
#[derive(Debug, Clone)]
pub struct WorstJointSolve {
    /// The worst channel found (interior coordinates strictly inside (0,1)).
    pub channel: CollusionChannel,
    /// Rate at that channel, in bits.
    pub rate_bits: f64,
    /// Iterations performed.
    pub iterations: usize,
    /// Rate change over the final iteration, in bits.
    pub final_gap_bits: f64,
}

/// Minimises the joint-decoder rate over the full channel box (class C;
/// by symmetry the minimiser is class B for symmetric distributions).
///
/// Starts from the class-A channel and alternates between the output
/// distribution induced by the current channel and the per-coordinate
/// closed-form minimiser against it. The objective decreases monotonically
/// (asserted each iteration); iteration stops when the rate improves by less
/// than `cfg.gap_tol_bits` *and* no coordinate moved by more than 1e-10.
pub fn worst_joint_bc(
    c: usize,
    dist: &TimeSharingDist,
    cfg: &SolverConfig,
) -> Result<WorstJointSolve> {
    cfg.validate()?;
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "worst-case search needs at least two colluders",
        });
    }
    if c > MAX_JOINT_SOLVER {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_JOINT_SOLVER,
            what: "the joint-decoder fixed-point solver",
        });
    }

    let quad = dist.quadrature();
    let n = quad.len();
    // Bernstein rows, node-major: rows[k * (c+1) + sigma].
    let rows: Vec<f64> = quad
        .nodes
        .iter()
        .flat_map(|&p| crate::collusion::bernstein_row(c, p))
        .collect();
    // E[b_sigma]: denominators of the fixed-point update.
    let mut eb = vec![0.0; c + 1];
    for (sigma, e) in eb.iter_mut().enumerate() {
        let mut acc = KahanSum::new();
        for k in 0..n {
            acc.add(quad.weights[k] * rows[k * (c + 1) + sigma]);
        }
        *e = acc.value();
    }

    let rate_nats = |theta: &[f64]| -> f64 {
        let mut acc = KahanSum::new();
        for k in 0..n {
            let row = &rows[k * (c + 1)..(k + 1) * (c + 1)];
            let mut q = KahanSum::new();
            let mut cond = KahanSum::new();
            for (b, &t) in row.iter().zip(theta) {
                q.add(b * t);
                cond.add(b * hb_nats(t));
            }
            acc.add(quad.weights[k] * (hb_nats(q.value()) - cond.value()));
        }
        acc.value() / c as f64
    };

    let mut theta: Vec<f64> = (0..=c).map(|s| s as f64 / c as f64).collect();
    let mut r_prev = rate_nats(&theta);
    let mut iterations = 0;
    let mut final_gap_nats = f64::INFINITY;
    let mut converged = false;
    let mut theta_gap = f64::INFINITY;

    while iterations < cfg.max_iters {
        iterations += 1;
        // Log-odds of the current output distribution, integrated against
        // each Bernstein weight.
        let mut nums = vec![KahanSum::new(); c + 1];
        for k in 0..n {
            let row = &rows[k * (c + 1)..(k + 1) * (c + 1)];
            let q: f64 = row.iter().zip(&theta).map(|(b, t)| b * t).sum();
            if q <= 0.0 || q >= 1.0 {
                return Err(Error::DegenerateUpdate { q, p: quad.nodes[k] });
            }
            let log_odds = ((1.0 - q) / q).ln();
            for (sigma, num) in nums.iter_mut().enumerate() {
                num.add(quad.weights[k] * row[sigma] * log_odds);
            }
        }
        theta_gap = 0.0;
        for sigma in 1..c {
            let b_sigma = (nums[sigma].value() / eb[sigma]).exp();
            let t_new = 1.0 / (1.0 + b_sigma);
            theta_gap = theta_gap.max((t_new - theta[sigma]).abs());
            theta[sigma] = t_new;
        }
        let r_new = rate_nats(&theta);
        assert!(
            r_new <= r_prev + 1e-14 * r_prev.abs().max(1.0),
            "fixed-point iteration increased the objective: {r_prev} -> {r_new}"
        );
        final_gap_nats = r_prev - r_new;
        r_prev = r_new;
        if nats_to_bits(final_gap_nats.abs()) < cfg.gap_tol_bits && theta_gap < THETA_STEP_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iters: iterations,
            gap_bits: nats_to_bits(final_gap_nats.abs()),
            tol_bits: cfg.gap_tol_bits,
            theta_gap,
        });
    }

    // The closed-form update lands strictly inside (0, 1): the box
    // constraint is inactive at the optimum.
    for sigma in 1..c {
        assert!(
            theta[sigma] > 0.0 && theta[sigma] < 1.0,
            "fixed-point update left the open box at sigma = {sigma}"
        );
    }
    if dist.is_symmetric() {
        for sigma in 0..=c {
            let gap = (theta[sigma] - (1.0 - theta[c - sigma])).abs();
            assert!(
                gap <= 1e-6,
                "worst joint channel for a symmetric distribution failed the \
                 class-B reflection check at sigma = {sigma} (gap {gap:.2e})"
            );
        }
    }

    let channel = CollusionChannel::new(theta)?;
    let rate_bits = crate::rates::rate_joint(&channel, dist)?;
    Ok(WorstJointSolve {
        channel,
        rate_bits,
        iterations,
        final_gap_bits: nats_to_bits(final_gap_nats.abs()),
    })
}

// ---------------------------------------------------------------------------
// Joint decoder: class D (closed form)
// ---------------------------------------------------------------------------

/// Interior coordinate of the bias-aware joint-decoder minimiser at bias
/// `p`: `p^c / (p^c + (1-p)^c)`.
pub fn theta_star_joint_classd(c: usize, p: f64) -> f64 {
    let a = p.powi(c as i32);
    let b = (1.0 - p).powi(c as i32);
    a / (a + b)
}

/// The bias-aware strategy minimising the joint-decoder rate: at bias `p`
/// every interior coordinate equals [`theta_star_joint_classd`].
pub fn worst_joint_classd(c: usize) -> Result<ClassDStrategy> {
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "worst-case search needs at least two colluders",
        });
    }
    ClassDStrategy::with_kind(c, StrategyKind::JointClosedForm, move |p| {
        let t = theta_star_joint_classd(c, p);
        let mut theta = vec![t; c + 1];
        theta[0] = 0.0;
        theta[c] = 1.0;
        CollusionChannel::new(theta)
    })
}

/// Joint-decoder capacity against bias-aware adversaries:
/// `1 / (c 2^(c-1))` bits, achieved by concentrating the bias at 1/2.
pub fn capacity_classd_joint(c: usize) -> Result<f64> {
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "the bias-aware capacity is defined for c >= 2",
        });
    }
    if c > MAX_COALITION {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_COALITION,
            what: "the bias-aware joint capacity",
        });
    }
    Ok((2.0f64).powi(1 - (c as i32)) / c as f64)
}

// ---------------------------------------------------------------------------
// Simple decoder: class D (semi-analytic)
// ---------------------------------------------------------------------------

/// Lower endpoint of the null-rate bias interval for the simple decoder.
///
/// For `c >= 3` there is an interval `[eta_c, 1 - eta_c]` of biases on which
/// a bias-aware adversary can drive the simple-decoder rate to exactly zero.
/// Its endpoint is the unique root in `[1/c, 2/c]` of
/// `(1-p)^(c-2) (1 - c p) + p^(c-1)`, located by bisection to absolute
/// tolerance 1e-14. For `c = 3` the polynomial is the perfect square
/// `(1 - 2p)^2`, whose double root defeats sign bisection; that case returns
/// the root 1/2 exactly.
pub fn eta_c(c: usize) -> Result<f64> {
    if c < 3 {
        return Err(Error::NoNullRateInterval { c });
    }
    if c > MAX_COALITION {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_COALITION,
            what: "the null-rate interval endpoint",
        });
    }
    if c == 3 {
        return Ok(0.5);
    }
    let phi = |p: f64| (1.0 - p).powi(c as i32 - 2) * (1.0 - c as f64 * p) + p.powi(c as i32 - 1);
    let mut lo = 1.0 / c as f64;
    let mut hi = 2.0 / c as f64;
    debug_assert!(phi(lo) >= 0.0 && phi(hi) < 0.0, "root not bracketed");
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-coordinate channel `(0, theta_1, 0, ..., 0, 1)` used by the
/// bias-aware simple-decoder minimiser at small biases.
fn sparse_low_channel(c: usize, theta_1: f64) -> Vec<f64> {
    let mut theta = vec![0.0; c + 1];
    theta[1] = theta_1;
    theta[c] = 1.0;
    theta
}

/// Pointwise simple-decoder rate of the one-coordinate channel, in nats.
///
/// With `theta = (0, t, 0, ..., 0, 1)` the three output probabilities have
/// the closed forms
/// `q  = t c p (1-p)^(c-1) + p^c`,
/// `q1 = t (1-p)^(c-1) + p^(c-1)`,
/// `q0 = t (c-1) p (1-p)^(c-2)`.
fn sparse_rate_nats(c: usize, p: f64, t: f64) -> f64 {
    let cf = c as f64;
    let omp = 1.0 - p;
    let q = t * cf * p * omp.powi(c as i32 - 1) + p.powi(c as i32);
    let q1 = t * omp.powi(c as i32 - 1) + p.powi(c as i32 - 1);
    let q0 = t * (cf - 1.0) * p * omp.powi(c as i32 - 2);
    hb_nats(q) - p * hb_nats(q1) - omp * hb_nats(q0)
}

/// Golden-section minimisation of `f` on `[a, b]` to interval width `tol`.
/// Deterministic; assumes `f` is unimodal on the bracket (callers bracket a
/// grid minimum first).
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Grid-then-golden-section line search for the free coordinate of the
/// one-coordinate channel at bias `p < 1/c`.
fn line_search_theta1(c: usize, p: f64, grid_points: usize) -> f64 {
    let n = grid_points.max(11);
    let objective = |t: f64| sparse_rate_nats(c, p, t);
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let v = objective(t);
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    let lo = if best_idx == 0 { 0.0 } else { (best_idx - 1) as f64 / (n - 1) as f64 };
    let hi = if best_idx == n - 1 { 1.0 } else { (best_idx + 1) as f64 / (n - 1) as f64 };
    golden_min(objective, lo, hi, 1e-12)
}

/// The bias-aware strategy minimising the simple-decoder rate.
///
/// * `c = 2`: closed form `theta_1(p) = p^2 / (p^2 + (1-p)^2)` — identical
///   to the joint-decoder rule at `c = 2`.
/// * `c >= 3`, bias inside `[eta_c, 1 - eta_c]`: a channel on the null-rate
///   hyperplane. The solution there is not unique; the canonical
///   representative is the one-coordinate ray `theta = (0, lambda, 0, ..., 0, 1)`
///   with `lambda = -rho_c(p) / rho_1(p)`, mirrored for `p > 1/2`.
/// * `c >= 3`, `p in [1/c, eta_c)`: the free coordinate is pinned at 1.
/// * `c >= 3`, `p < 1/c`: the free coordinate comes from the line search
///   over `[0, 1]` (grid of `cfg.grid_points`, golden-section refinement to
///   1e-12).
pub fn worst_simple_classd(c: usize, cfg: &SolverConfig) -> Result<ClassDStrategy> {
    cfg.validate()?;
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "worst-case search needs at least two colluders",
        });
    }
    if c == 2 {
        return ClassDStrategy::with_kind(2, StrategyKind::SimpleWorst, |p| {
            let t = theta_star_joint_classd(2, p);
            CollusionChannel::new(vec![0.0, t, 1.0])
        });
    }
    let eta = eta_c(c)?;
    let grid_points = cfg.grid_points;
    ClassDStrategy::with_kind(c, StrategyKind::SimpleWorst, move |p| {
        let low_side = p <= 0.5;
        let pl = if low_side { p } else { 1.0 - p };
        let theta_low = if pl >= eta {
            // Null-rate hyperplane: lambda = -rho_c / rho_1 zeroes the gap
            // between the two conditional output probabilities.
            let lambda = -scalar_rho(c, c, pl) / scalar_rho(c, 1, pl);
            assert!(
                (-1e-9..=1.0 + 1e-9).contains(&lambda),
                "hyperplane solution outside [0,1]: lambda = {lambda} at p = {pl}"
            );
            sparse_low_channel(c, lambda.clamp(0.0, 1.0))
        } else if pl >= 1.0 / c as f64 {
            sparse_low_channel(c, 1.0)
        } else {
            sparse_low_channel(c, line_search_theta1(c, pl, grid_points))
        };
        let theta = if low_side {
            theta_low
        } else {
            let c = theta_low.len() - 1;
            (0..=c).map(|s| 1.0 - theta_low[c - s]).collect()
        };
        CollusionChannel::new(theta)
    })
}

// ---------------------------------------------------------------------------
// Simple decoder: classes B/C by projected gradient descent
// ---------------------------------------------------------------------------

/// Endpoint of one descent restart.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    /// Restart index (0 is the class-A start).
    pub index: usize,
    /// Full channel vector at the restart's endpoint.
    pub theta: Vec<f64>,
    /// Objective value there, in bits.
    pub rate_bits: f64,
    /// Descent iterations spent.
    pub iterations: usize,
}

/// Result of the simple-decoder multistart box search.
#[derive(Debug, Clone)]
pub struct WorstSimpleSolve {
    /// Best channel across restarts (ties broken by lowest restart index).
    pub channel: CollusionChannel,
    /// Rate at that channel, in bits.
    pub rate_bits: f64,
    /// Iterations spent by the winning restart.
    pub iterations: usize,
    /// Endpoint log of every restart.
    pub restarts: Vec<RestartRecord>,
    /// For symmetric distributions: the largest violation of the reflection
    /// relation `theta_sigma = 1 - theta_{c-sigma}` by the winner. Reported,
    /// not asserted (the reflection property is conjectural).
    pub reflection_gap: Option<f64>,
    /// For symmetric distributions: the value of the reflection-restricted
    /// search, run as a cross-check; it must agree with `rate_bits` within
    /// 1e-4 bits (asserted).
    pub class_b_rate_bits: Option<f64>,
}

/// Precomputed quadrature-and-Bernstein tables for the simple-decoder
/// objective `E_P[r_simple]` and its analytic gradient.
struct SimpleObjective {
    c: usize,
    quad: Quadrature,
    /// Order-`c-1` Bernstein rows, node-major: `rows1[k * c + j]`, `j < c`.
    rows1: Vec<f64>,
}

impl SimpleObjective {
    fn new(c: usize, dist: &TimeSharingDist) -> Self {
        let quad = dist.quadrature();
        let rows1: Vec<f64> = quad
            .nodes
            .iter()
            .flat_map(|&p| crate::collusion::bernstein_row(c - 1, p))
            .collect();
        Self { c, quad, rows1 }
    }

    /// Objective in nats at a full channel vector.
    fn rate_nats(&self, theta: &[f64]) -> f64 {
        let c = self.c;
        let mut acc = KahanSum::new();
        for (k, (&p, &w)) in self.quad.nodes.iter().zip(&self.quad.weights).enumerate() {
            let row = &self.rows1[k * c..(k + 1) * c];
            let mut q1 = 0.0;
            let mut q0 = 0.0;
            for (j, &b) in row.iter().enumerate() {
                q1 += b * theta[j + 1];
                q0 += b * theta[j];
            }
            let q = p * q1 + (1.0 - p) * q0;
            acc.add(w * (hb_nats(q) - p * hb_nats(q1) - (1.0 - p) * hb_nats(q0)));
        }
        acc.value()
    }

    /// Analytic gradient in nats with respect to the interior coordinates
    /// `theta_1 ... theta_{c-1}`, written into `grad`.
    ///
    /// Per node, `d r / d theta_sigma = b_sigma(p) h'(q)
    /// - p h'(q1) b1_{sigma-1}(p) - (1-p) h'(q0) b1_sigma(p)` where `b1` are
    /// the order-`c-1` rows and `b_sigma = p b1_{sigma-1} + (1-p) b1_sigma`.
    fn grad_nats(&self, theta: &[f64], grad: &mut [f64]) {
        let c = self.c;
        debug_assert_eq!(grad.len(), c - 1);
        grad.fill(0.0);
        for (k, (&p, &w)) in self.quad.nodes.iter().zip(&self.quad.weights).enumerate() {
            let row = &self.rows1[k * c..(k + 1) * c];
            let mut q1 = 0.0;
            let mut q0 = 0.0;
            for (j, &b) in row.iter().enumerate() {
                q1 += b * theta[j + 1];
                q0 += b * theta[j];
            }
            let q = p * q1 + (1.0 - p) * q0;
            let hq = hb_prime_nats(q);
            let h1 = hb_prime_nats(q1);
            let h0 = hb_prime_nats(q0);
            for sigma in 1..c {
                let b_full = p * row[sigma - 1] + (1.0 - p) * row[sigma];
                grad[sigma - 1] +=
                    w * (b_full * hq - p * h1 * row[sigma - 1] - (1.0 - p) * h0 * row[sigma]);
            }
        }
    }
}

/// Endpoint of a projected-descent run.
struct DescentOutcome {
    x: Vec<f64>,
    f_nats: f64,
    iterations: usize,
    made_progress: bool,
}

/// Projected gradient descent on the unit box with Barzilai–Borwein steps
/// and an Armijo backtracking safeguard. Deterministic for a given start.
fn projected_descent(
    mut f: impl FnMut(&[f64]) -> f64,
    mut g: impl FnMut(&[f64], &mut [f64]),
    x0: Vec<f64>,
    max_iters: usize,
) -> DescentOutcome {
    let d = x0.len();
    if d == 0 {
        let f0 = f(&x0);
        return DescentOutcome { x: x0, f_nats: f0, iterations: 0, made_progress: true };
    }
    let project = |x: &mut [f64]| {
        for v in x.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    };
    let mut x = x0;
    project(&mut x);
    let mut fx = f(&x);
    let mut grad = vec![0.0; d];
    g(&x, &mut grad);
    let mut prev_x: Option<Vec<f64>> = None;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut made_progress = false;
    let mut iterations = 0;

    for _ in 0..max_iters {
        // Projected-gradient stationarity measure.
        let pg = x
            .iter()
            .zip(&grad)
            .map(|(&xi, &gi)| (xi - (xi - gi).clamp(0.0, 1.0)).abs())
            .fold(0.0f64, f64::max);
        if pg <= PROJECTED_GRAD_TOL {
            made_progress = true;
            break;
        }
        iterations += 1;

        // Barzilai-Borwein step length from the last displacement, clamped
        // to a sane range; plain normalised steepest descent on the first
        // iteration.
        let mut step = match (&prev_x, &prev_grad) {
            (Some(px), Some(pg_vec)) => {
                let mut sy = 0.0;
                let mut yy = 0.0;
                for i in 0..d {
                    let s = x[i] - px[i];
                    let y = grad[i] - pg_vec[i];
                    sy += s * y;
                    yy += y * y;
                }
                if sy > 0.0 && yy > 0.0 {
                    (sy / yy).clamp(1e-10, 1e6)
                } else {
                    1.0
                }
            }
            _ => {
                let gmax = grad.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                0.1 / gmax.max(1e-12)
            }
        };

        // Armijo backtracking along the projection arc.
        let mut accepted = false;
        let mut x_new = vec![0.0; d];
        let mut f_new = fx;
        for _ in 0..60 {
            for i in 0..d {
                x_new[i] = (x[i] - step * grad[i]).clamp(0.0, 1.0);
            }
            let decrease: f64 = x_new
                .iter()
                .zip(&x)
                .zip(&grad)
                .map(|((&xn, &xo), &gi)| gi * (xn - xo))
                .sum();
            if decrease == 0.0 {
                break; // projection absorbed the whole step
            }
            f_new = f(&x_new);
            if f_new <= fx + 1e-4 * decrease {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        made_progress = true;
        prev_x = Some(x.clone());
        prev_grad = Some(grad.clone());
        x = x_new;
        fx = f_new;
        g(&x, &mut grad);
    }
    DescentOutcome { x, f_nats: fx, iterations, made_progress }
}

/// Expands interior coordinates to a full channel vector.
fn full_theta(c: usize, interior: &[f64]) -> Vec<f64> {
    let mut theta = Vec::with_capacity(c + 1);
    theta.push(0.0);
    theta.extend_from_slice(interior);
    theta.push(1.0);
    theta
}

/// Multistart projected descent over the full interior box (class C).
/// Restart 0 starts at class A; the rest draw uniform starts from streams
/// seeded by `(cfg.seed, restart index)`. Returns the per-restart outcomes.
fn multistart_box(
    obj: &SimpleObjective,
    cfg: &SolverConfig,
    purpose: &str,
) -> Vec<(usize, DescentOutcome)> {
    let c = obj.c;
    let seed = cfg.seed;
    let max_iters = cfg.max_iters;
    (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let x0: Vec<f64> = if i == 0 {
                (1..c).map(|s| s as f64 / c as f64).collect()
            } else {
                use rand::Rng;
                let mut rng = rng_stream(seed, purpose, i as u64);
                (1..c).map(|_| rng.gen::<f64>()).collect()
            };
            let outcome = projected_descent(
                |x| obj.rate_nats(&full_theta(c, x)),
                |x, grad| obj.grad_nats(&full_theta(c, x), grad),
                x0,
                max_iters,
            );
            (i, outcome)
        })
        .collect()
}

/// Multistart projected descent restricted to reflection-symmetric channels:
/// free variables `theta_1 ... theta_m`, `m = floor((c-1)/2)`, with
/// `theta_{c-j} = 1 - theta_j` (and the middle coordinate pinned to 1/2 for
/// even `c`). Used as a cross-check on the full box search.
fn multistart_class_b(obj: &SimpleObjective, cfg: &SolverConfig) -> Vec<(usize, DescentOutcome)> {
    let c = obj.c;
    let m = (c - 1) / 2;
    let lift = move |phi: &[f64]| -> Vec<f64> {
        let mut theta = vec![0.0; c + 1];
        for (j, &v) in phi.iter().enumerate() {
            theta[j + 1] = v;
            theta[c - 1 - j] = 1.0 - v;
        }
        if c % 2 == 0 {
            theta[c / 2] = 0.5;
        }
        theta[0] = 0.0;
        theta[c] = 1.0;
        theta
    };
    let seed = cfg.seed;
    let max_iters = cfg.max_iters;
    (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let phi0: Vec<f64> = if i == 0 {
                (1..=m).map(|j| j as f64 / c as f64).collect()
            } else {
                use rand::Rng;
                let mut rng = rng_stream(seed, "simple-class-b", i as u64);
                (0..m).map(|_| rng.gen::<f64>()).collect()
            };
            let mut full_grad = vec![0.0; c - 1];
            let outcome = projected_descent(
                |phi| obj.rate_nats(&lift(phi)),
                |phi, grad| {
                    obj.grad_nats(&lift(phi), &mut full_grad);
                    for j in 0..phi.len() {
                        // Chain rule through theta_{c-j} = 1 - theta_j.
                        grad[j] = full_grad[j] - full_grad[c - 2 - j];
                    }
                },
                phi0,
                max_iters,
            );
            let theta = lift(&outcome.x);
            (
                i,
                DescentOutcome {
                    x: theta[1..c].to_vec(),
                    f_nats: outcome.f_nats,
                    iterations: outcome.iterations,
                    made_progress: outcome.made_progress,
                },
            )
        })
        .collect()
}

/// Analytic gradient of the simple-decoder rate with respect to the interior
/// channel coordinates `theta_1 ... theta_{c-1}`, in bits per unit change.
///
/// This is the gradient the box search descends along, exposed so it can be
/// verified independently (e.g. against finite differences of
/// [`rate_simple`]).
pub fn simple_rate_gradient(channel: &CollusionChannel, dist: &TimeSharingDist) -> Vec<f64> {
    let c = channel.c();
    if c < 2 {
        return Vec::new();
    }
    let obj = SimpleObjective::new(c, dist);
    let mut grad = vec![0.0; c - 1];
    obj.grad_nats(channel.theta(), &mut grad);
    for g in &mut grad {
        *g *= std::f64::consts::LOG2_E;
    }
    grad
}

/// Picks the winning restart: lowest objective, ties broken by lowest index.
fn best_restart(outcomes: &[(usize, DescentOutcome)]) -> &(usize, DescentOutcome) {
    outcomes
        .iter()
        .min_by(|(ia, a), (ib, b)| {
            a.f_nats
                .partial_cmp(&b.f_nats)
                .expect("finite objectives")
                .then(ia.cmp(ib))
        })
        .expect("at least one restart")
}

/// Minimises the simple-decoder rate over the full channel box (class C).
///
/// Multistart projected gradient descent with analytic gradients; see the
/// module docs for the search contract. For symmetric distributions the
/// result is cross-checked against a search restricted to
/// reflection-symmetric channels, which must agree within 1e-4 bits; the
/// winner's own deviation from reflection symmetry is reported (not
/// asserted — the symmetry of the true minimiser is conjectural).
pub fn worst_simple_bc(
    c: usize,
    dist: &TimeSharingDist,
    cfg: &SolverConfig,
) -> Result<WorstSimpleSolve> {
    cfg.validate()?;
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "worst-case search needs at least two colluders",
        });
    }
    if c > MAX_SIMPLE_SOLVER {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_SIMPLE_SOLVER,
            what: "the simple-decoder box search",
        });
    }

    let obj = SimpleObjective::new(c, dist);
    let outcomes = multistart_box(&obj, cfg, "simple-box");
    if !outcomes.iter().any(|(_, o)| o.made_progress) {
        let (_, best) = best_restart(&outcomes);
        return Err(Error::OptimizerStalled {
            best_rate_bits: nats_to_bits(best.f_nats),
            best_theta: full_theta(c, &best.x),
        });
    }
    let (_, winner) = best_restart(&outcomes);
    let channel = CollusionChannel::new(full_theta(c, &winner.x))?;
    let rate_bits = rate_simple(&channel, dist)?;
    let restarts = outcomes
        .iter()
        .map(|(i, o)| RestartRecord {
            index: *i,
            theta: full_theta(c, &o.x),
            rate_bits: nats_to_bits(o.f_nats),
            iterations: o.iterations,
        })
        .collect();

    let (mut reflection_gap, mut class_b_rate_bits) = (None, None);
    if dist.is_symmetric() {
        let theta = channel.theta();
        let gap = (0..=c)
            .map(|s| (theta[s] - (1.0 - theta[c - s])).abs())
            .fold(0.0f64, f64::max);
        reflection_gap = Some(gap);

        let b_outcomes = multistart_class_b(&obj, cfg);
        let (_, b_best) = best_restart(&b_outcomes);
        let b_bits = nats_to_bits(b_best.f_nats);
        assert!(
            (b_bits - rate_bits).abs() <= 1e-4,
            "reflection-restricted search disagrees with the box search: \
             {b_bits} vs {rate_bits} bits"
        );
        class_b_rate_bits = Some(b_bits);
    }

    Ok(WorstSimpleSolve {
        channel,
        rate_bits,
        iterations: winner.iterations,
        restarts,
        reflection_gap,
        class_b_rate_bits,
    })
}

/// Minimises the simple-decoder rate over reflection-symmetric channels
/// only (class B). Same search contract as [`worst_simple_bc`] with
/// `floor((c-1)/2)` free variables.
pub fn worst_simple_b(
    c: usize,
    dist: &TimeSharingDist,
    cfg: &SolverConfig,
) -> Result<WorstSimpleSolve> {
    cfg.validate()?;
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "worst-case search needs at least two colluders",
        });
    }
    if c > MAX_SIMPLE_SOLVER {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_SIMPLE_SOLVER,
            what: "the simple-decoder reflection-restricted search",
        });
    }
    let obj = SimpleObjective::new(c, dist);
    let outcomes = multistart_class_b(&obj, cfg);
    if !outcomes.iter().any(|(_, o)| o.made_progress) {
        let (_, best) = best_restart(&outcomes);
        return Err(Error::OptimizerStalled {
            best_rate_bits: nats_to_bits(best.f_nats),
            best_theta: full_theta(c, &best.x),
        });
    }
    let (_, winner) = best_restart(&outcomes);
    let channel = CollusionChannel::new(full_theta(c, &winner.x))?;
    let rate_bits = rate_simple(&channel, dist)?;
    let restarts = outcomes
        .iter()
        .map(|(i, o)| RestartRecord {
            index: *i,
            theta: full_theta(c, &o.x),
            rate_bits: nats_to_bits(o.f_nats),
            iterations: o.iterations,
        })
        .collect();
    Ok(WorstSimpleSolve {
        channel,
        rate_bits,
        iterations: winner.iterations,
        restarts,
        reflection_gap: Some(0.0),
        class_b_rate_bits: Some(rate_bits),
    })
}

// ---------------------------------------------------------------------------
// Projection of the arcsine-output attack
// ---------------------------------------------------------------------------

/// Least-squares projection, onto stationary channels, of the bias-aware
/// attack whose output probability is the arcsine CDF
/// `q(p) = 2 arcsin(sqrt(p)) / pi`.
///
/// The returned `theta` satisfies the orthogonality conditions
/// `integral (prob_y1(theta, p) - q(p)) b_sigma(p) dp = 0` for every
/// interior `sigma`, obtained by solving the Gram system of Bernstein inner
/// products `integral b_i b_j dp = C(c,i) C(c,j) / ((2c+1) C(2c, i+j))`.
/// The arcsine moments are integrated exactly (to quadrature precision)
/// under the substitution `p = sin^2(u)`, which removes the square root.
///
/// For `c >= 7` the projection leaves the unit box; the result is an
/// analysis artefact for comparison plots, not a playable channel, and is
/// constructed without box validation.
pub fn conv_projection_attack(c: usize) -> Result<CollusionChannel> {
    if c < 2 {
        return Err(Error::InvalidCollusionSize {
            c,
            reason: "the projection needs at least two colluders",
        });
    }
    if c > MAX_JOINT_SOLVER {
        return Err(Error::CapabilityLimit {
            c,
            limit: MAX_JOINT_SOLVER,
            what: "the arcsine-output projection",
        });
    }
    let d = c - 1;
    // Gram matrix of interior Bernstein polynomials (closed form) and the
    // right-hand side: arcsine-CDF moments minus the pinned theta_c = 1
    // column.
    let gram_entry = |i: usize, j: usize| -> f64 {
        // C(c,i) C(c,j) / ((2c+1) C(2c, i+j)), evaluated in log space for
        // stability at larger c.
        let ln = |n: usize, k: usize| {
            statrs::function::gamma::ln_gamma(n as f64 + 1.0)
                - statrs::function::gamma::ln_gamma(k as f64 + 1.0)
                - statrs::function::gamma::ln_gamma((n - k) as f64 + 1.0)
        };
        (ln(c, i) + ln(c, j) - ln(2 * c, i + j)).exp() / (2.0 * c as f64 + 1.0)
    };
    let mut gram = vec![0.0; d * d];
    for i in 1..c {
        for j in 1..c {
            gram[(i - 1) * d + (j - 1)] = gram_entry(i, j);
        }
    }
    // Moments m_sigma = integral q_conv(p) b_sigma(p) dp via p = sin^2(u):
    // the integrand (2u/pi) b_sigma(sin^2 u) sin(2u) is analytic on
    // [0, pi/2], so Gauss-Legendre converges spectrally.
    let gl = TimeSharingDist::Flat.quadrature();
    let mut rhs = vec![0.0; d];
    for sigma in 1..c {
        let mut acc = KahanSum::new();
        for (&u01, &w) in gl.nodes.iter().zip(&gl.weights) {
            let u = std::f64::consts::FRAC_PI_2 * u01;
            let s = u.sin();
            let p = s * s;
            acc.add(
                w * std::f64::consts::FRAC_PI_2
                    * (2.0 * u / std::f64::consts::PI)
                    * bernstein(c, sigma, p)
                    * (2.0 * u).sin(),
            );
        }
        rhs[sigma - 1] = acc.value() - gram_entry(sigma, c);
    }
    let interior = solve_dense(&mut gram, &mut rhs)
        .expect("Bernstein Gram matrix is positive definite");
    let mut theta = Vec::with_capacity(c + 1);
    theta.push(0.0);
    theta.extend_from_slice(&interior);
    theta.push(1.0);
    CollusionChannel::new_relaxed(theta)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
