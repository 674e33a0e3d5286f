//! Target sequences `kappa_n`, the exact covariance of the centered hit
//! indicators, and empirical scans of the correlation-bound shapes.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::conv::{convolve_n, ConvolveOptions, SumDistribution};
use crate::error::{Error, Result};
use crate::lattice::{DistStats, LatticePmf};
use crate::num::Real;

/// A deterministic rule `n -> kappa_n` of real targets.
pub trait TargetSequence<F: Real>: Send + Sync {
    fn target(&self, n: u64) -> F;

    /// Limit of `sqrt(n) P{S_n = kappa_n}` for this rule.
    fn limit(&self, stats: &DistStats<F>, span: F) -> F;
}

/// The canonical rule: `kappa_n` is the nearest point of `L(n*v0, D)`
/// to `n*mu + kappa*sqrt(n)`, ties broken toward minus infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSequence<F: Real> {
    kappa: F,
    mu: F,
    v0: F,
    d: F,
}

impl<F: Real> KappaSequence<F> {
    pub fn new(pmf: &LatticePmf<F>, stats: &DistStats<F>, kappa: F) -> Self {
        KappaSequence {
            kappa,
            mu: stats.mu,
            v0: pmf.v0(),
            d: pmf.span(),
        }
    }

    pub fn kappa(&self) -> F {
        self.kappa
    }

    /// Lattice offset `j` with `kappa_n = n*v0 + D*j`.
    pub fn offset(&self, n: u64) -> i64 {
        let nf = F::of(n as f64);
        let x = (nf * self.mu + self.kappa * nf.sqrt() - nf * self.v0) / self.d;
        // ceil(x - 1/2) rounds to nearest with ties toward -inf
        (x - F::of(0.5))
            .ceil()
            .to_i64()
            .expect("target offset fits i64")
    }
}

impl<F: Real> TargetSequence<F> for KappaSequence<F> {
    fn target(&self, n: u64) -> F {
        F::of(n as f64) * self.v0 + self.d * F::of(self.offset(n) as f64)
    }

    fn limit(&self, stats: &DistStats<F>, span: F) -> F {
        let two = F::of(2.0);
        span / ((two * F::of(std::f64::consts::PI)).sqrt() * stats.sigma2.sqrt())
            * (-(self.kappa * self.kappa) / (two * stats.sigma2)).exp()
    }
}

/// The canonical rule shifted off the lattice by half a span: every
/// target has probability identically zero, so every hit statistic
/// degenerates to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffLatticeSequence<F: Real> {
    inner: KappaSequence<F>,
}

impl<F: Real> OffLatticeSequence<F> {
    pub fn new(inner: KappaSequence<F>) -> Self {
        OffLatticeSequence { inner }
    }
}

impl<F: Real> TargetSequence<F> for OffLatticeSequence<F> {
    fn target(&self, n: u64) -> F {
        self.inner.target(n) + self.inner.d / F::of(2.0)
    }

    fn limit(&self, _stats: &DistStats<F>, _span: F) -> F {
        F::zero()
    }
}

/// Memoized exact sum laws, shared across scan pairs. Reads dominate;
/// a miss computes outside the lock and a single writer inserts.
pub struct ConvCache<F: Real> {
    pmf: LatticePmf<F>,
    opts: ConvolveOptions,
    map: RwLock<HashMap<u64, Arc<SumDistribution<F>>>>,
}

impl<F: Real> ConvCache<F> {
    pub fn new(pmf: LatticePmf<F>, opts: ConvolveOptions) -> Self {
        ConvCache {
            pmf,
            opts,
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn pmf(&self) -> &LatticePmf<F> {
        &self.pmf
    }

    pub fn get(&self, n: u64) -> Result<Arc<SumDistribution<F>>> {
        if let Some(d) = self.map.read().expect("cache lock").get(&n) {
            return Ok(d.clone());
        }
        let dist = Arc::new(convolve_n(&self.pmf, n, &self.opts)?);
        let mut w = self.map.write().expect("cache lock");
        Ok(w.entry(n).or_insert(dist).clone())
    }

    /// Fill 1..=n_max by one incremental convolution ladder; much
    /// cheaper than n_max independent fast-path calls when a scan will
    /// touch most values anyway.
    pub fn prefill(&self, n_max: u64) -> Result<()> {
        crate::conv::check_cap(&self.pmf, n_max.max(1), &self.opts)?;
        let mut ladder = convolve_n(&self.pmf, 1, &self.opts)?;
        let mut w = self.map.write().expect("cache lock");
        for n in 1..=n_max {
            if n > 1 {
                ladder.extend_by(&self.pmf);
            }
            w.entry(n).or_insert_with(|| Arc::new(ladder.clone()));
        }
        Ok(())
    }
}

/// `E[Y_n Y_m]` for the centered scaled indicators
/// `Y_n = sqrt(n) (1{S_n = kappa_n} - P{S_n = kappa_n})`, computed by
/// the exact factorization identity; the diagonal uses
/// `n p (1 - p)`.
pub fn exact_cov<F: Real>(
    cache: &ConvCache<F>,
    seq: &dyn TargetSequence<F>,
    n: u64,
    m: u64,
) -> Result<F> {
    if m == 0 || m > n {
        return Err(Error::BadOrder { m, n });
    }
    let sn = cache.get(n)?;
    let p_n = sn.prob_at(seq.target(n));
    if m == n {
        return Ok(F::of(n as f64) * p_n * (F::one() - p_n));
    }
    let sm = cache.get(m)?;
    let p_m = sm.prob_at(seq.target(m));
    let snm = cache.get(n - m)?;
    let p_inc = snm.prob_at(seq.target(n) - seq.target(m));
    Ok(F::of(m as f64).sqrt() * p_m * F::of(n as f64).sqrt() * (p_inc - p_n))
}

/// One scan entry: the exact covariance next to the bound shapes it is
/// compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRecord<F: Real> {
    pub n: u64,
    pub m: u64,
    pub exact_cov: F,
    /// `1/(sqrt(n/m) - 1) + n^(1/2)/(n - m)^(3/2)`
    pub thm1_shape: F,
    /// `sqrt(m/n)`
    pub cor1_shape: F,
    /// `1/(sqrt(n/m) - 1) + sqrt(n/(n-m)) (n-m)^(-alpha)`
    pub gw_shape: F,
    /// `|exact_cov| / thm1_shape`
    pub ratio: F,
}

pub fn thm1_shape<F: Real>(n: u64, m: u64) -> F {
    let (nf, mf) = (F::of(n as f64), F::of(m as f64));
    let gap = F::of((n - m) as f64);
    F::one() / ((nf / mf).sqrt() - F::one()) + nf.sqrt() / (gap * gap.sqrt())
}

pub fn cor1_shape<F: Real>(n: u64, m: u64) -> F {
    (F::of(m as f64) / F::of(n as f64)).sqrt()
}

pub fn gw_shape<F: Real>(n: u64, m: u64, alpha: F) -> F {
    let (nf, mf) = (F::of(n as f64), F::of(m as f64));
    let gap = F::of((n - m) as f64);
    F::one() / ((nf / mf).sqrt() - F::one()) + (nf / gap).sqrt() * gap.powf(-alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundScan<F: Real> {
    pub records: Vec<CorrelationRecord<F>>,
    /// Grid maximum of `|exact_cov| / thm1_shape`.
    pub c_hat: F,
    /// Maximum of `|exact_cov| / cor1_shape` over pairs with `m <= c*n`.
    pub c_c_hat: F,
}

/// Evaluate the exact covariance against the bound shapes over a grid
/// of `(n, m)` pairs with `1 <= m < n`.
pub fn bound_scan<F: Real>(
    cache: &ConvCache<F>,
    seq: &dyn TargetSequence<F>,
    grid: &[(u64, u64)],
    c: F,
    alpha: F,
) -> Result<BoundScan<F>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let records = grid
        .par_iter()
        .map(|&(n, m)| {
            if m == 0 || m >= n {
                return Err(Error::BadOrder { m, n });
            }
            let cov = exact_cov(cache, seq, n, m)?;
            let t1 = thm1_shape(n, m);
            Ok(CorrelationRecord {
                n,
                m,
                exact_cov: cov,
                thm1_shape: t1,
                cor1_shape: cor1_shape(n, m),
                gw_shape: gw_shape(n, m, alpha),
                ratio: cov.abs() / t1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_hat = records
        .iter()
        .map(|r| r.ratio)
        .fold(F::zero(), |a, b| a.max(b));
    let c_c_hat = records
        .iter()
        .filter(|r| F::of(r.m as f64) <= c * F::of(r.n as f64))
        .map(|r| r.exact_cov.abs() / r.cor1_shape)
        .fold(F::zero(), |a, b| a.max(b));
    Ok(BoundScan {
        records,
        c_hat,
        c_c_hat,
    })
}

/// `n` over powers of two up to `n_ceiling`, `m` over quartile points
/// plus the `m = n - 1` stress pair.
pub fn decade_grid(n_ceiling: u64) -> Vec<(u64, u64)> {
    let mut grid = Vec::new();
    let mut n = 64u64;
    while n <= n_ceiling {
        let mut ms = vec![n / 4, n / 2, 3 * n / 4, n - 1];
        ms.dedup();
        for m in ms {
            if m >= 1 && m < n {
                grid.push((n, m));
            }
        }
        n *= 2;
    }
    grid
}

/// `n` over powers of two up to `n_ceiling`, all `1 <= m < n`.
pub fn full_grid(n_ceiling: u64) -> Vec<(u64, u64)> {
    let mut grid = Vec::new();
    let mut n = 64u64;
    while n <= n_ceiling {
        for m in 1..n {
            grid.push((n, m));
        }
        n *= 2;
    }
    grid
}
