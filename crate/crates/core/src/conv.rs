//! Exact n-fold convolution of a lattice law.
//!
//! Two strategies compute the law of `S_n = X_1 + ... + X_n`: iterated
//! direct convolution (the testing reference, also the cheap way to walk
//! all prefixes) and binary exponentiation (the fast path for a single
//! large `n`). Both use a fixed summation order per output entry, so
//! results are bit-stable.


use crate::error::{Error, Result};
use crate::lattice::LatticePmf;
use crate::num::{kahan_sum, KahanSum, Real};

/// Default cap on the dense reachable-support array.
pub const DEFAULT_MAX_ENTRIES: usize = 100_000_000;

#[derive(Debug, Clone, Copy)]
pub struct ConvolveOptions {
    /// Reject convolutions whose reachable support exceeds this many entries.
    pub max_entries: usize,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        ConvolveOptions {
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

/// Exact law of `S_n`, dense over the reachable offset range:
/// entry `j` is `P{S_n = n*v0 + D*(k_min + j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumDistribution<F: Real> {
    n: u64,
    v0: F,
    d: F,
    k_min: i64,
    probs: Vec<F>,
}

impl<F: Real> SumDistribution<F> {
    fn single(pmf: &LatticePmf<F>) -> Self {
        let k_min = pmf.min_offset();
        let len = (pmf.max_offset() - k_min + 1) as usize;
        let mut probs = vec![F::zero(); len];
        for (k, p) in pmf.atoms() {
            probs[(k - k_min) as usize] = p;
        }
        SumDistribution {
            n: 1,
            v0: pmf.v0(),
            d: pmf.span(),
            k_min,
            probs,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn span(&self) -> F {
        self.d
    }

    /// First reachable offset on the lattice `L(n*v0, D)`.
    pub fn min_offset(&self) -> i64 {
        self.k_min
    }

    pub fn max_offset(&self) -> i64 {
        self.k_min + self.probs.len() as i64 - 1
    }

    /// `P{S_n = n*v0 + D*k}`.
    pub fn prob_at_offset(&self, k: i64) -> F {
        if k < self.k_min || k > self.max_offset() {
            F::zero()
        } else {
            self.probs[(k - self.k_min) as usize]
        }
    }

    /// `P{S_n = target}` for a real target. Off-lattice targets give
    /// exactly 0; membership is decided within 1e-9 on the index scale.
    pub fn prob_at(&self, target: F) -> F {
        match self.offset_of(target) {
            Some(k) => self.prob_at_offset(k),
            None => F::zero(),
        }
    }

    /// Offset of `target` on `L(n*v0, D)`, or `None` if off-lattice.
    pub fn offset_of(&self, target: F) -> Option<i64> {
        let x = (target - self.v0 * F::of(self.n as f64)) / self.d;
        let r = x.round();
        if (x - r).abs() < F::of(1e-9) {
            r.to_i64()
        } else {
            None
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, F)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(j, &p)| (self.k_min + j as i64, p))
    }

    pub fn total_mass(&self) -> F {
        kahan_sum(self.probs.iter().copied())
    }

    /// One more convolution step with the base law: replaces `self` by
    /// the law of `S_{n+1}`.
    pub fn extend_by(&mut self, pmf: &LatticePmf<F>) {
        let step = SumDistribution::single(pmf);
        *self = convolve_pair(self, &step);
    }
}

fn convolve_pair<F: Real>(a: &SumDistribution<F>, b: &SumDistribution<F>) -> SumDistribution<F> {
    let len = a.probs.len() + b.probs.len() - 1;
    let mut out = vec![KahanSum::new(); len];
    for (i, &pa) in a.probs.iter().enumerate() {
        if pa == F::zero() {
            continue;
        }
        for (j, &pb) in b.probs.iter().enumerate() {
            out[i + j].add(pa * pb);
        }
    }
    SumDistribution {
        n: a.n + b.n,
        v0: a.v0,
        d: a.d,
        k_min: a.k_min + b.k_min,
        probs: out.into_iter().map(|s| s.total()).collect(),
    }
}

pub(crate) fn check_cap<F: Real>(pmf: &LatticePmf<F>, n: u64, opts: &ConvolveOptions) -> Result<()> {
    let width = (pmf.max_offset() - pmf.min_offset()) as u128;
    let required = n as u128 * width + 1;
    if required > opts.max_entries as u128 {
        return Err(Error::SupportTooLarge {
            required,
            cap: opts.max_entries,
        });
    }
    Ok(())
}

/// Exact law of `S_n` by binary exponentiation (square-and-multiply on
/// distributions). Fast path for a single large `n`.
pub fn convolve_n<F: Real>(
    pmf: &LatticePmf<F>,
    n: u64,
    opts: &ConvolveOptions,
) -> Result<SumDistribution<F>> {
    if n == 0 {
        return Err(Error::DomainError {
            what: "n",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    check_cap(pmf, n, opts)?;
    let mut base = SumDistribution::single(pmf);
    let mut acc: Option<SumDistribution<F>> = None;
    let mut rem = n;
    loop {
        if rem & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => convolve_pair(&a, &base),
            });
        }
        rem >>= 1;
        if rem == 0 {
            break;
        }
        base = convolve_pair(&base, &base);
    }
    Ok(acc.expect("n >= 1"))
}

/// Exact law of `S_n` by iterated direct convolution. Reference
/// implementation used to cross-check the fast path.
pub fn convolve_n_direct<F: Real>(
    pmf: &LatticePmf<F>,
    n: u64,
    opts: &ConvolveOptions,
) -> Result<SumDistribution<F>> {
    if n == 0 {
        return Err(Error::DomainError {
            what: "n",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    check_cap(pmf, n, opts)?;
    let mut acc = SumDistribution::single(pmf);
    for _ in 1..n {
        acc.extend_by(pmf);
    }
    Ok(acc)
}

/// `P{S_n = kn, S_m = km}` through the independent-increments
/// factorization `P{S_m = km} * P{S_{n-m} = kn - km}`.
pub fn joint_prob<F: Real>(
    pmf: &LatticePmf<F>,
    n: u64,
    m: u64,
    kn: F,
    km: F,
    opts: &ConvolveOptions,
) -> Result<F> {
    if m == 0 || m >= n {
        return Err(Error::BadOrder { m, n });
    }
    let sm = convolve_n(pmf, m, opts)?;
    let p_m = sm.prob_at(km);
    if p_m == F::zero() {
        return Ok(F::zero());
    }
    let snm = convolve_n(pmf, n - m, opts)?;
    Ok(p_m * snm.prob_at(kn - km))
}
