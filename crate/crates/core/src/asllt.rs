//! Monte Carlo probe of the almost-sure local limit statistic
//! `A_N = (1/log N) * sum_{n<=N} n^(-1/2) 1{S_n = kappa_n}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conv::{convolve_n, ConvolveOptions};
use crate::correlation::TargetSequence;
use crate::error::{Error, Result};
use crate::lattice::LatticePmf;
use crate::num::{KahanSum, Real};

/// Streaming sampler of i.i.d. offset increments of the base law.
pub struct IncrementSampler<F: Real> {
    cdf: Vec<(F, i64)>,
    rng: ChaCha8Rng,
}

impl<F: Real> IncrementSampler<F> {
    pub fn new(pmf: &LatticePmf<F>, seed: u64) -> Self {
        let mut cdf = Vec::with_capacity(pmf.support_len());
        let mut acc = F::zero();
        for (k, p) in pmf.atoms() {
            acc += p;
            cdf.push((acc, k));
        }
        IncrementSampler {
            cdf,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<F: Real> Iterator for IncrementSampler<F> {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        let u = F::of(self.rng.random::<f64>());
        let &(_, k) = self
            .cdf
            .iter()
            .find(|&&(c, _)| u < c)
            .unwrap_or(self.cdf.last().expect("non-empty support"));
        Some(k)
    }
}

/// One path's log-averaged hit statistic at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct AslltRun<F: Real> {
    pub seed: u64,
    pub n_max: u64,
    pub checkpoints: Vec<u64>,
    /// `A_N` per checkpoint.
    pub values: Vec<F>,
    /// The Gaussian constant this statistic converges to.
    pub limit: F,
    /// Number of hits `S_n = kappa_n` over the whole path.
    pub hit_count: u64,
}

fn checked_checkpoints(n_max: u64, checkpoints: &[u64]) -> Result<Vec<u64>> {
    if n_max < 10 {
        return Err(Error::DomainError {
            what: "n_max",
            value: n_max as f64,
            range: "[10, inf)",
        });
    }
    let mut cps: Vec<u64> = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    for &cp in &cps {
        if cp < 10 || cp > n_max {
            return Err(Error::DomainError {
                what: "checkpoint",
                value: cp as f64,
                range: "[10, n_max]",
            });
        }
    }
    if cps.is_empty() {
        cps.push(n_max);
    }
    Ok(cps)
}

/// Simulate one path in a single streaming pass, deterministic per seed.
pub fn run_path<F: Real>(
    pmf: &LatticePmf<F>,
    seq: &dyn TargetSequence<F>,
    n_max: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<AslltRun<F>> {
    let stats = pmf.validate()?;
    let cps = checked_checkpoints(n_max, checkpoints)?;
    let limit = seq.limit(&stats, pmf.span());
    let mut sampler = IncrementSampler::new(pmf, seed);
    let mut offset_sum: i128 = 0;
    let mut weighted_hits = KahanSum::new();
    let mut hit_count = 0u64;
    let mut values = Vec::with_capacity(cps.len());
    let mut next_cp = 0usize;
    for n in 1..=n_max {
        offset_sum += sampler.next().expect("sampler is infinite") as i128;
        let nf = F::of(n as f64);
        // S_n = n*v0 + D*offset_sum; hit iff the target sits on the
        // same lattice point
        let x = (seq.target(n) - nf * pmf.v0()) / pmf.span();
        let r = x.round();
        let on_lattice = (x - r).abs() < F::of(1e-9);
        if on_lattice && r == F::of(offset_sum as f64) {
            weighted_hits.add(nf.sqrt().recip());
            hit_count += 1;
        }
        while next_cp < cps.len() && cps[next_cp] == n {
            values.push(weighted_hits.total() / nf.ln());
            next_cp += 1;
        }
    }
    Ok(AslltRun {
        seed,
        n_max,
        checkpoints: cps,
        values,
        limit,
        hit_count,
    })
}

/// Per-checkpoint cross-path statistics of `A_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary<F: Real> {
    pub checkpoints: Vec<u64>,
    pub mean: Vec<F>,
    pub std_dev: Vec<F>,
    pub min: Vec<F>,
    pub max: Vec<F>,
    pub limit: F,
    pub paths: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-path sub-seed.
pub fn sub_seed(master_seed: u64, path_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(path_index.wrapping_add(1)))
}

/// Independent replications with sub-seeds derived from the master
/// seed; aggregation is a reduction in fixed path order.
pub fn run_ensemble<F: Real>(
    pmf: &LatticePmf<F>,
    seq: &dyn TargetSequence<F>,
    n_max: u64,
    checkpoints: &[u64],
    paths: u64,
    master_seed: u64,
) -> Result<EnsembleSummary<F>> {
    if paths < 2 {
        return Err(Error::DomainError {
            what: "paths",
            value: paths as f64,
            range: "[2, inf)",
        });
    }
    use rayon::prelude::*;
    let runs = (0..paths)
        .into_par_iter()
        .map(|i| run_path(pmf, seq, n_max, checkpoints, sub_seed(master_seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let cps = runs[0].checkpoints.clone();
    let pf = F::of(paths as f64);
    let mut mean = Vec::new();
    let mut std_dev = Vec::new();
    let mut min = Vec::new();
    let mut max = Vec::new();
    for j in 0..cps.len() {
        let mut acc = KahanSum::new();
        let mut lo = F::infinity();
        let mut hi = F::neg_infinity();
        for r in &runs {
            let v = r.values[j];
            acc.add(v);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let mu = acc.total() / pf;
        let mut var = KahanSum::new();
        for r in &runs {
            let d = r.values[j] - mu;
            var.add(d * d);
        }
        mean.push(mu);
        std_dev.push((var.total() / (pf - F::one())).sqrt());
        min.push(lo);
        max.push(hi);
    }
    Ok(EnsembleSummary {
        checkpoints: cps,
        mean,
        std_dev,
        min,
        max,
        limit: runs[0].limit,
        paths,
    })
}

/// The deterministic mean of `A_N`:
/// `(1/log N) * sum_{n<=N} n^(-1/2) P{S_n = kappa_n}` by exact
/// convolution over every prefix.
pub fn expected_average<F: Real>(
    pmf: &LatticePmf<F>,
    seq: &dyn TargetSequence<F>,
    n_target: u64,
    opts: &ConvolveOptions,
) -> Result<F> {
    pmf.validate()?;
    crate::conv::check_cap(pmf, n_target.max(1), opts)?;
    let mut ladder = convolve_n(pmf, 1, opts)?;
    let mut acc = KahanSum::new();
    for n in 1..=n_target {
        if n > 1 {
            ladder.extend_by(pmf);
        }
        let p = ladder.prob_at(seq.target(n));
        acc.add(p / F::of(n as f64).sqrt());
    }
    Ok(acc.total() / F::of(n_target as f64).ln())
}
