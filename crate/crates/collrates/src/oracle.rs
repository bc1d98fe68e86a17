//! Independent Monte-Carlo verification of the rate machinery.
//!
//! The quadrature-based rates in [`crate::rates`] are cross-checked here by
//! simulation: generate probabilistic code symbols, apply a collusion
//! channel, and estimate the mutual information empirically. Two estimators
//! are provided:
//!
//! * [`estimate_mi`] — the primary, Rao-Blackwellized estimator: it samples
//!   the time-sharing value `p` and averages the *exact* pointwise rate at
//!   each sample. This is unbiased for the expected rate, has far lower
//!   variance than a histogram estimate, and exercises the pointwise-rate
//!   code path against the quadrature path.
//! * [`estimate_mi_plugin`] — a fully empirical plug-in (histogram)
//!   estimator over simulated symbol/output pairs. It shares no formulas
//!   with the rate modules, guarding against correlated bugs, at the price
//!   of an O(1/samples) bias. Binning over `p` is only exact for discrete
//!   time-sharing distributions, so that is all it accepts.
//!
//! All sampling is deterministic: every consumer draws from an RNG stream
//! derived from `(seed, purpose tag, index)`, and estimates are accumulated
//! over a fixed number of blocks merged in block order, so results are
//! bit-for-bit identical regardless of thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::entropy::xlnx;
use crate::numeric::{rng_stream, KahanSum};
use crate::rates::{ChannelSpec, Decoder};
use crate::timeshare::TimeSharingDist;
use crate::{Error, Result};

/// Fixed number of sampling blocks. Each block owns an RNG stream and a
/// predetermined share of the samples; the merge is serial in block order.
const MC_BLOCKS: usize = 64;

/// Fewest samples the estimators accept.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Relative floor on reported standard errors, so that zero-variance
/// configurations (e.g. a degenerate time-sharing distribution) still
/// report a strictly positive uncertainty.
const STD_ERR_FLOOR: f64 = 1e-15;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A Monte-Carlo mutual-information estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Estimated rate (mutual information per position), in bits.
    pub mi_bits: f64,
    /// Standard error of the estimate, in bits; strictly positive.
    pub std_err_bits: f64,
    /// Number of samples behind the estimate.
    pub samples: usize,
    /// Seed the sampling streams were derived from.
    pub seed: u64,
}

/// A probabilistic binary code: `n` users, `m` positions, and the secret
/// per-position time-sharing sequence it was drawn against.
///
/// Column `i` of `bits` is i.i.d. Bernoulli(`p_seq[i]`) by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMatrix {
    /// Number of users (rows).
    pub n: usize,
    /// Code length in positions (columns).
    pub m: usize,
    /// Symbol matrix, user-major: `bits[j][i]` is user `j`'s symbol at
    /// position `i`.
    pub bits: Vec<Vec<bool>>,
    /// Time-sharing value per position.
    pub p_seq: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Code generation and collusion
// ---------------------------------------------------------------------------

/// Draws an `n x m` probabilistic code: `p_seq` i.i.d. from `dist`, then
/// each column i.i.d. Bernoulli(`p_seq[i]`). Deterministic for a fixed seed.
pub fn generate_code(
    n: usize,
    m: usize,
    dist: &TimeSharingDist,
    seed: u64,
) -> Result<CodeMatrix> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidMcRequest(format!(
            "a code needs at least one user and one position, got n = {n}, m = {m}"
        )));
    }
    let mut p_rng = rng_stream(seed, "code-pseq", 0);
    let p_seq: Vec<f64> = (0..m).map(|_| dist.sample(&mut p_rng)).collect();
    let mut b_rng = rng_stream(seed, "code-bits", 0);
    let mut bits = vec![vec![false; m]; n];
    for (i, &p) in p_seq.iter().enumerate() {
        for row in bits.iter_mut() {
            row[i] = b_rng.gen::<f64>() < p;
        }
    }
    Ok(CodeMatrix { n, m, bits, p_seq })
}

/// Applies a collusion attack: at every position the pirate output is
/// Bernoulli in the channel coordinate selected by the colluders' symbol
/// sum. Bias-aware strategies re-evaluate their rule at `p_seq[i]` per
/// position. Deterministic for a fixed seed.
pub fn apply_collusion(
    code: &CodeMatrix,
    colluders: &[usize],
    attack: &ChannelSpec,
    seed: u64,
) -> Result<Vec<bool>> {
    if colluders.len() != attack.c() {
        return Err(Error::CollusionSizeMismatch {
            expected: attack.c(),
            got: colluders.len(),
        });
    }
    for &j in colluders {
        if j >= code.n {
            return Err(Error::InvalidMcRequest(format!(
                "colluder index {j} out of range for {} users",
                code.n
            )));
        }
    }
    let mut sorted = colluders.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != colluders.len() {
        return Err(Error::InvalidMcRequest(
            "colluder indices must be distinct".into(),
        ));
    }

    let mut rng = rng_stream(seed, "collusion", 0);
    let mut y = Vec::with_capacity(code.m);
    for i in 0..code.m {
        let sigma = colluders.iter().filter(|&&j| code.bits[j][i]).count();
        let theta_sigma = match attack {
            ChannelSpec::Stationary(ch) => ch.theta_sigma(sigma),
            ChannelSpec::BiasAware(strat) => {
                strat.channel_at(code.p_seq[i])?.theta_sigma(sigma)
            }
        };
        y.push(rng.gen::<f64>() < theta_sigma);
    }
    Ok(y)
}

// ---------------------------------------------------------------------------
// Mutual-information estimators
// ---------------------------------------------------------------------------

/// Per-block share of the total sample budget: all blocks get
/// `samples / MC_BLOCKS`, the first `samples % MC_BLOCKS` one extra.
fn block_size(samples: usize, block: usize) -> usize {
    samples / MC_BLOCKS + usize::from(block < samples % MC_BLOCKS)
}

/// Validates the shared estimator preconditions.
fn check_mc_request(c: usize, attack: &ChannelSpec, samples: usize) -> Result<()> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidMcRequest(format!(
            "the estimator needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    if c != attack.c() {
        return Err(Error::CollusionSizeMismatch { expected: c, got: attack.c() });
    }
    Ok(())
}

/// Turns pooled first and second moments into an estimate with a floored
/// standard error.
fn finish_estimate(sum: f64, sum_sq: f64, samples: usize, seed: u64) -> McEstimate {
    let n = samples as f64;
    let mean = sum / n;
    let variance = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let std_err = (variance / n).sqrt();
    McEstimate {
        mi_bits: mean,
        std_err_bits: std_err.max(STD_ERR_FLOOR * (1.0 + mean.abs())),
        samples,
        seed,
    }
}

/// Rao-Blackwellized Monte-Carlo estimate of the expected rate: samples the
/// time-sharing value and averages the exact pointwise rate there.
///
/// Joint mode estimates the per-colluder symbol-sum information, simple mode
/// the single-user information, matching [`crate::rates::rate`] for the same
/// arguments. The standard error is the sample standard deviation of the
/// pointwise rates divided by `sqrt(samples)`.
pub fn estimate_mi(
    decoder: Decoder,
    c: usize,
    attack: &ChannelSpec,
    dist: &TimeSharingDist,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_mc_request(c, attack, samples)?;
    let block_stats: Vec<(KahanSum, KahanSum)> = (0..MC_BLOCKS)
        .into_par_iter()
        .map(|b| -> Result<(KahanSum, KahanSum)> {
            let mut rng = rng_stream(seed, "mi-sample", b as u64);
            let mut sum = KahanSum::new();
            let mut sum_sq = KahanSum::new();
            for _ in 0..block_size(samples, b) {
                let p = dist.sample(&mut rng);
                let r = attack.r_point(decoder, p)?;
                sum.add(r);
                sum_sq.add(r * r);
            }
            Ok((sum, sum_sq))
        })
        .collect::<Result<_>>()?;
    // Serial merge in block order keeps the reduction independent of the
    // worker count.
    let mut sum = KahanSum::new();
    let mut sum_sq = KahanSum::new();
    for (s, s2) in &block_stats {
        sum.add(s.value());
        sum_sq.add(s2.value());
    }
    Ok(finish_estimate(sum.value(), sum_sq.value(), samples, seed))
}

/// The discrete support of a time-sharing distribution, if it has one.
fn atoms_of(dist: &TimeSharingDist) -> Option<Vec<f64>> {
    match dist {
        TimeSharingDist::DiracPair { p0 } if *p0 == 0.5 => Some(vec![0.5]),
        TimeSharingDist::DiracPair { p0 } => Some(vec![*p0, 1.0 - *p0]),
        TimeSharingDist::Discrete { atoms } => {
            Some(atoms.iter().map(|&(p, _)| p).collect())
        }
        _ => None,
    }
}

/// Histogram over `(atom, row, output)` cells; `row` is the symbol sum
/// (joint mode, `c + 1` rows) or one colluder's symbol (simple mode, 2
/// rows).
#[derive(Clone)]
struct PlugInHistogram {
    rows: usize,
    /// counts[atom][row][y]
    counts: Vec<Vec<[u64; 2]>>,
}

impl PlugInHistogram {
    fn new(n_atoms: usize, rows: usize) -> Self {
        Self { rows, counts: vec![vec![[0u64; 2]; rows]; n_atoms] }
    }

    fn record(&mut self, atom: usize, row: usize, y: bool) {
        self.counts[atom][row][usize::from(y)] += 1;
    }

    fn merge(&mut self, other: &Self) {
        for (a, other_a) in self.counts.iter_mut().zip(&other.counts) {
            for (r, other_r) in a.iter_mut().zip(other_a) {
                r[0] += other_r[0];
                r[1] += other_r[1];
            }
        }
    }

    /// Plug-in conditional mutual information, in nats: the per-atom MI of
    /// the empirical (row, output) table, weighted by empirical atom mass.
    fn mi_nats(&self) -> f64 {
        let total: u64 = self
            .counts
            .iter()
            .flat_map(|a| a.iter().flat_map(|r| r.iter()))
            .sum();
        if total == 0 {
            return 0.0;
        }
        let mut acc = KahanSum::new();
        for atom_counts in &self.counts {
            let n_a: u64 = atom_counts.iter().flat_map(|r| r.iter()).sum();
            if n_a == 0 {
                continue;
            }
            // N*I = sum xlnx(n_ry) - sum xlnx(n_r) - sum xlnx(n_y) + xlnx(N)
            let mut cells = KahanSum::new();
            let mut row_sums = KahanSum::new();
            let mut col = [0u64; 2];
            for r in 0..self.rows {
                let row = &atom_counts[r];
                cells.add(xlnx(row[0] as f64) + xlnx(row[1] as f64));
                row_sums.add(xlnx((row[0] + row[1]) as f64));
                col[0] += row[0];
                col[1] += row[1];
            }
            let mi_a = (cells.value() - row_sums.value() - xlnx(col[0] as f64)
                - xlnx(col[1] as f64)
                + xlnx(n_a as f64))
                / n_a as f64;
            acc.add(n_a as f64 / total as f64 * mi_a);
        }
        acc.value()
    }
}

/// Fully empirical plug-in estimate of the same quantities as
/// [`estimate_mi`]: simulates colluder symbols and pirate outputs, bins them
/// per time-sharing atom, and reads the mutual information off the pooled
/// histogram.
///
/// Only discrete time-sharing distributions are accepted — binning a
/// continuous `p` would bias the conditional MI. The central estimate comes
/// from the pooled histogram (bias O(1/samples)); the standard error is the
/// spread of the per-block histogram estimates, which is insensitive to that
/// shared bias.
pub fn estimate_mi_plugin(
    decoder: Decoder,
    c: usize,
    attack: &ChannelSpec,
    dist: &TimeSharingDist,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_mc_request(c, attack, samples)?;
    let atoms = atoms_of(dist).ok_or_else(|| {
        Error::InvalidMcRequest(
            "the plug-in estimator requires a discrete time-sharing distribution".into(),
        )
    })?;
    let rows = match decoder {
        Decoder::Joint => c + 1,
        Decoder::Simple => 2,
    };
    // Resolve the channel per atom once; bias-aware rules are stationary
    // within an atom.
    let theta_by_atom: Vec<Vec<f64>> = atoms
        .iter()
        .map(|&p| Ok(attack.channel_at(p)?.theta().to_vec()))
        .collect::<Result<_>>()?;

    let block_hists: Vec<PlugInHistogram> = (0..MC_BLOCKS)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_stream(seed, "mi-plugin", b as u64);
            let mut hist = PlugInHistogram::new(atoms.len(), rows);
            for _ in 0..block_size(samples, b) {
                let p = dist.sample(&mut rng);
                let atom = atoms
                    .iter()
                    .position(|&a| a == p)
                    .expect("sampled bias must be one of the atoms");
                let mut sigma = 0usize;
                let mut first = false;
                for k in 0..c {
                    let bit = rng.gen::<f64>() < p;
                    sigma += usize::from(bit);
                    if k == 0 {
                        first = bit;
                    }
                }
                let y = rng.gen::<f64>() < theta_by_atom[atom][sigma];
                let row = match decoder {
                    Decoder::Joint => sigma,
                    Decoder::Simple => usize::from(first),
                };
                hist.record(atom, row, y);
            }
            hist
        })
        .collect();

    let scale = match decoder {
        Decoder::Joint => 1.0 / c as f64,
        Decoder::Simple => 1.0,
    };
    let mut pooled = PlugInHistogram::new(atoms.len(), rows);
    let mut block_mis = Vec::with_capacity(MC_BLOCKS);
    for hist in &block_hists {
        pooled.merge(hist);
        block_mis.push(crate::entropy::nats_to_bits(hist.mi_nats()) * scale);
    }
    let mi_bits = crate::entropy::nats_to_bits(pooled.mi_nats()) * scale;
    let k = block_mis.len() as f64;
    let block_mean = block_mis.iter().sum::<f64>() / k;
    let block_var = block_mis
        .iter()
        .map(|v| (v - block_mean) * (v - block_mean))
        .sum::<f64>()
        / (k - 1.0);
    let std_err = (block_var / k).sqrt();
    Ok(McEstimate {
        mi_bits,
        std_err_bits: std_err.max(STD_ERR_FLOOR * (1.0 + mi_bits.abs())),
        samples,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collusion::CollusionChannel;
    use crate::rates::{r_simple_point, rate_joint};
    use crate::worst::worst_joint_classd;
    use approx::assert_abs_diff_eq;

    fn class_a_spec(c: usize) -> ChannelSpec {
        ChannelSpec::Stationary(CollusionChannel::class_a(c).unwrap())
    }

    #[test]
    fn code_generation_is_deterministic() {
        let dist = TimeSharingDist::Tardos;
        let a = generate_code(3, 200, &dist, 42).unwrap();
        let b = generate_code(3, 200, &dist, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_code(3, 200, &dist, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_bits_concentrate_at_the_bias() {
        // Degenerate time-sharing at 1/2: each user's empirical symbol rate
        // is within 5 sigma of 1/2 (sigma = 0.5 / sqrt(m)).
        let dist = TimeSharingDist::dirac_pair(0.5).unwrap();
        let code = generate_code(4, 100_000, &dist, 7).unwrap();
        let tol = 5.0 * 0.5 / (code.m as f64).sqrt();
        for row in &code.bits {
            let mean = row.iter().filter(|&&b| b).count() as f64 / code.m as f64;
            assert!((mean - 0.5).abs() < tol, "user mean {mean} strays from 1/2");
        }
        assert!(code.p_seq.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn arcsine_time_sharing_sequence_has_mean_half() {
        // The arcsine density is symmetric about 1/2 with variance 1/8.
        let code = generate_code(2, 100_000, &TimeSharingDist::Tardos, 11).unwrap();
        let mean = code.p_seq.iter().sum::<f64>() / code.m as f64;
        let tol = 5.0 * (1.0 / 8.0f64).sqrt() / (code.m as f64).sqrt();
        assert!((mean - 0.5).abs() < tol, "p_seq mean {mean} strays from 1/2");
    }

    #[test]
    fn single_symbol_code_is_well_formed() {
        let code = generate_code(1, 1, &TimeSharingDist::Flat, 0).unwrap();
        assert_eq!(code.bits.len(), 1);
        assert_eq!(code.bits[0].len(), 1);
        assert!(code.p_seq[0] > 0.0 && code.p_seq[0] < 1.0);
    }

    #[test]
    fn all_ones_attack_outputs_one_whenever_it_can() {
        let code = generate_code(5, 20_000, &TimeSharingDist::Tardos, 3).unwrap();
        let colluders = [0, 2, 4];
        let attack = ChannelSpec::Stationary(CollusionChannel::all_ones(3).unwrap());
        let y = apply_collusion(&code, &colluders, &attack, 9).unwrap();
        for i in 0..code.m {
            let sigma = colluders.iter().filter(|&&j| code.bits[j][i]).count();
            assert_eq!(y[i], sigma > 0);
        }
    }

    #[test]
    fn marking_positions_are_never_flipped() {
        // Wherever the colluders agree, the pirate copy must carry their
        // common symbol — for stationary and bias-aware attacks alike.
        let code = generate_code(4, 50_000, &TimeSharingDist::Tardos, 5).unwrap();
        let colluders = [0, 1, 3];
        let attacks = [
            class_a_spec(3),
            ChannelSpec::BiasAware(worst_joint_classd(3).unwrap()),
        ];
        for attack in &attacks {
            let y = apply_collusion(&code, &colluders, attack, 13).unwrap();
            for i in 0..code.m {
                let sigma = colluders.iter().filter(|&&j| code.bits[j][i]).count();
                if sigma == 0 {
                    assert!(!y[i], "all-zero position flipped to 1 at index {i}");
                } else if sigma == 3 {
                    assert!(y[i], "all-one position flipped to 0 at index {i}");
                }
            }
        }
    }

    #[test]
    fn collusion_size_mismatch_is_reported() {
        let code = generate_code(4, 100, &TimeSharingDist::Flat, 1).unwrap();
        let err = apply_collusion(&code, &[0, 1], &class_a_spec(3), 2).unwrap_err();
        assert!(matches!(err, Error::CollusionSizeMismatch { expected: 3, got: 2 }));
        assert!(err.to_string().contains("collusion size mismatch"));
    }

    #[test]
    fn uniform_pick_attack_matches_its_contingency_table() {
        // Chi-squared goodness of fit for the (symbol sum, output) table of
        // the class-A channel at a degenerate bias: 6 reachable cells, so 5
        // degrees of freedom; the 1e-3 critical value is 20.515.
        let dist = TimeSharingDist::dirac_pair(0.5).unwrap();
        let code = generate_code(3, 100_000, &dist, 21).unwrap();
        let colluders = [0, 1, 2];
        let y = apply_collusion(&code, &colluders, &class_a_spec(3), 22).unwrap();
        let mut observed = [[0.0f64; 2]; 4];
        for i in 0..code.m {
            let sigma = colluders.iter().filter(|&&j| code.bits[j][i]).count();
            observed[sigma][usize::from(y[i])] += 1.0;
        }
        let pr_sigma = [1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0];
        let theta = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let mut chi_sq = 0.0;
        for sigma in 0..=3 {
            for y_val in 0..2 {
                let p_cell = pr_sigma[sigma]
                    * if y_val == 1 { theta[sigma] } else { 1.0 - theta[sigma] };
                if p_cell == 0.0 {
                    assert_eq!(observed[sigma][y_val], 0.0, "impossible cell populated");
                    continue;
                }
                let expected = code.m as f64 * p_cell;
                let diff = observed[sigma][y_val] - expected;
                chi_sq += diff * diff / expected;
            }
        }
        assert!(chi_sq < 20.515, "chi-squared statistic {chi_sq} rejects the fit");
    }

    #[test]
    fn degenerate_bias_estimate_is_exact() {
        // Every sample sees p = 1/2, so the estimator returns the pointwise
        // rate with zero sampling noise (and a floored positive std err).
        let dist = TimeSharingDist::dirac_pair(0.5).unwrap();
        let attack = class_a_spec(2);
        let est =
            estimate_mi(Decoder::Simple, 2, &attack, &dist, 1_000_000, 17).unwrap();
        let exact = r_simple_point(&CollusionChannel::class_a(2).unwrap(), 0.5);
        assert_abs_diff_eq!(est.mi_bits, exact, epsilon = 1e-12);
        assert_abs_diff_eq!(est.mi_bits, 0.1887, epsilon = 1e-4);
        assert!(est.std_err_bits > 0.0);
        assert_eq!(est.samples, 1_000_000);
    }

    #[test]
    fn joint_uniform_pick_estimate_brackets_the_quadrature_value() {
        let attack = class_a_spec(2);
        let dist = TimeSharingDist::Tardos;
        let est = estimate_mi(Decoder::Joint, 2, &attack, &dist, 1_000_000, 23).unwrap();
        let reference =
            rate_joint(&CollusionChannel::class_a(2).unwrap(), &dist).unwrap();
        assert!((est.mi_bits - reference).abs() <= 3.0 * est.std_err_bits);
        assert_abs_diff_eq!(est.mi_bits, 0.1537, epsilon = 3.0 * est.std_err_bits + 5e-5);
    }

    #[test]
    fn bias_aware_estimate_hits_the_capacity_at_half() {
        let attack = ChannelSpec::BiasAware(worst_joint_classd(3).unwrap());
        let dist = TimeSharingDist::dirac_pair(0.5).unwrap();
        let est = estimate_mi(Decoder::Joint, 3, &attack, &dist, 1_000_000, 29).unwrap();
        assert!((est.mi_bits - 1.0 / 12.0).abs() <= 3.0 * est.std_err_bits);
    }

    #[test]
    fn estimates_are_deterministic_and_thread_invariant() {
        let attack = class_a_spec(3);
        let dist = TimeSharingDist::Tardos;
        let run = || estimate_mi(Decoder::Simple, 3, &attack, &dist, 50_000, 31).unwrap();
        let reference = run();
        assert_eq!(reference, run());
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let inside = pool.install(run);
            assert_eq!(reference, inside, "estimate varies with {threads} threads");
        }
    }

    #[test]
    fn estimator_rejects_underpowered_requests() {
        let attack = class_a_spec(2);
        let dist = TimeSharingDist::Tardos;
        assert!(matches!(
            estimate_mi(Decoder::Joint, 2, &attack, &dist, 9_999, 1),
            Err(Error::InvalidMcRequest(_))
        ));
        assert!(matches!(
            estimate_mi(Decoder::Joint, 3, &attack, &dist, 10_000, 1),
            Err(Error::CollusionSizeMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn plugin_estimator_agrees_at_a_degenerate_bias() {
        let dist = TimeSharingDist::dirac_pair(0.5).unwrap();
        let attack = class_a_spec(2);
        let est =
            estimate_mi_plugin(Decoder::Simple, 2, &attack, &dist, 1_000_000, 37).unwrap();
        let exact = r_simple_point(&CollusionChannel::class_a(2).unwrap(), 0.5);
        // Histogram bias at this cell count and sample size is ~1e-5.
        assert!(
            (est.mi_bits - exact).abs() <= 3.0 * est.std_err_bits + 1e-4,
            "plug-in {} vs exact {exact}",
            est.mi_bits
        );
    }

    #[test]
    fn plugin_estimator_matches_rao_blackwell_on_discrete_support() {
        let dist = TimeSharingDist::discrete(vec![(0.3, 0.5), (0.7, 0.5)]).unwrap();
        let attack = class_a_spec(3);
        let plugin =
            estimate_mi_plugin(Decoder::Joint, 3, &attack, &dist, 1_000_000, 41).unwrap();
        let rb = estimate_mi(Decoder::Joint, 3, &attack, &dist, 1_000_000, 43).unwrap();
        let gap = (plugin.mi_bits - rb.mi_bits).abs();
        let budget = 3.0 * (plugin.std_err_bits + rb.std_err_bits) + 1e-4;
        assert!(gap <= budget, "estimators disagree: gap {gap}, budget {budget}");
    }

    #[test]
    fn plugin_estimator_rejects_continuous_distributions() {
        let attack = class_a_spec(2);
        assert!(matches!(
            estimate_mi_plugin(
                Decoder::Joint,
                2,
                &attack,
                &TimeSharingDist::Tardos,
                10_000,
                1
            ),
            Err(Error::InvalidMcRequest(_))
        ));
    }

    #[test]
    fn bias_aware_attack_is_reevaluated_per_position() {
        // Two atoms with very different closed-form coordinates: empirical
        // Pr(Y = 1 | symbol sum = 1) must track the rule at each atom.
        let dist = TimeSharingDist::discrete(vec![(0.2, 0.5), (0.8, 0.5)]).unwrap();
        let code = generate_code(2, 200_000, &dist, 47).unwrap();
        let attack = ChannelSpec::BiasAware(worst_joint_classd(2).unwrap());
        let y = apply_collusion(&code, &[0, 1], &attack, 53).unwrap();
        for (&atom, expected) in [0.2f64, 0.8].iter().zip([1.0 / 17.0, 16.0 / 17.0]) {
            let mut hits = 0usize;
            let mut trials = 0usize;
            for i in 0..code.m {
                let sigma = usize::from(code.bits[0][i]) + usize::from(code.bits[1][i]);
                if code.p_seq[i] == atom && sigma == 1 {
                    trials += 1;
                    hits += usize::from(y[i]);
                }
            }
            let freq = hits as f64 / trials as f64;
            let sigma_hat = (expected * (1.0 - expected) / trials as f64).sqrt();
            assert!(
                (freq - expected).abs() < 5.0 * sigma_hat,
                "empirical {freq} vs rule {expected} at bias {atom}"
            );
        }
    }
}
