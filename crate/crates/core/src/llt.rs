//! Sup-norm error of the Gaussian local approximation and its
//! empirical rate, plus the fair-coin local limit discrepancy.

use crate::binomial::scan_ln_binomial_pmf;
use crate::conv::{convolve_n, ConvolveOptions};
use crate::error::Result;
use crate::lattice::LatticePmf;
use crate::num::Real;

/// The Gaussian local term `D/(sqrt(2 pi) sigma) * exp(-(N - n mu)^2 / (2 n sigma^2))`,
/// the comparand of `sqrt(n) P{S_n = N}`.
pub fn gauss_local<F: Real>(n: u64, target: F, mu: F, sigma2: F, d: F) -> F {
    let two = F::of(2.0);
    let sigma = sigma2.sqrt();
    let c = target - mu * F::of(n as f64);
    d / ((two * F::of(std::f64::consts::PI)).sqrt() * sigma)
        * (-(c * c) / (two * F::of(n as f64) * sigma2)).exp()
}

/// Least-squares rate exponent from `(log n, -log delta_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<F: Real> {
    pub alpha_hat: F,
    pub std_err: F,
}

/// Sup-norm local-limit error per `n`, with the fitted decay exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct LltErrorCurve<F: Real> {
    /// `(n, delta_n)` in strictly increasing `n`.
    pub entries: Vec<(u64, F)>,
    /// Fitted on the largest half of the `n` values; `None` with fewer
    /// than two usable points.
    pub fit: Option<RateFit<F>>,
}

/// `delta_n = sup_N |sqrt(n) P{S_n = N} - gauss_local(N)|`, the sup
/// running over the full reachable support (the Gaussian term decays
/// monotonically beyond it, so nothing larger hides outside).
pub fn llt_error<F: Real>(
    pmf: &LatticePmf<F>,
    ns: &[u64],
    opts: &ConvolveOptions,
) -> Result<LltErrorCurve<F>> {
    let stats = pmf.validate()?;
    let mut sorted: Vec<u64> = ns.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut entries = Vec::with_capacity(sorted.len());
    for &n in &sorted {
        let dist = convolve_n(pmf, n, opts)?;
        let sqrt_n = F::of(n as f64).sqrt();
        let mut sup = F::zero();
        for (k, p) in dist.entries() {
            let target = pmf.v0() * F::of(n as f64) + pmf.span() * F::of(k as f64);
            let g = gauss_local(n, target, stats.mu, stats.sigma2, pmf.span());
            sup = sup.max((sqrt_n * p - g).abs());
        }
        entries.push((n, sup));
    }
    let fit = fit_rate(&entries);
    Ok(LltErrorCurve { entries, fit })
}

fn fit_rate<F: Real>(entries: &[(u64, F)]) -> Option<RateFit<F>> {
    // small-n transients pollute the slope; keep the largest half
    let keep = (entries.len() / 2).max(2).min(entries.len());
    let start = entries.len() - keep;
    let pts: Vec<(F, F)> = entries[start..]
        .iter()
        .filter(|&&(_, d)| d > F::zero())
        .map(|&(n, d)| (F::of(n as f64).ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = F::of(pts.len() as f64);
    let xbar = pts.iter().map(|&(x, _)| x).sum::<F>() / m;
    let ybar = pts.iter().map(|&(_, y)| y).sum::<F>() / m;
    let sxx = pts.iter().map(|&(x, _)| (x - xbar) * (x - xbar)).sum::<F>();
    let sxy = pts
        .iter()
        .map(|&(x, y)| (x - xbar) * (y - ybar))
        .sum::<F>();
    if sxx == F::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let std_err = if pts.len() > 2 {
        let ss_res = pts
            .iter()
            .map(|&(x, y)| {
                let r = y - ybar - slope * (x - xbar);
                r * r
            })
            .sum::<F>();
        (ss_res / (m - F::of(2.0)) / sxx).sqrt()
    } else {
        F::zero()
    };
    Some(RateFit {
        alpha_hat: -slope,
        std_err,
    })
}

/// Exact sup-norm discrepancy of the fair-coin local limit at `n`,
/// returned as `(sup, n * sup)`.
pub fn bernoulli_llt_error<F: Real>(n: u64) -> (F, F) {
    assert!(n >= 1);
    let sqrt_n = F::of(n as f64).sqrt();
    let half_n = F::of(n as f64) / F::of(2.0);
    let amp = F::of(2.0) / (F::of(2.0) * F::of(std::f64::consts::PI)).sqrt();
    let mut sup = F::zero();
    scan_ln_binomial_pmf(n, F::of(0.5), |z, ln_p| {
        let c = F::of(z as f64) - half_n;
        let g = amp * (-(c * c) / half_n).exp();
        sup = sup.max((sqrt_n * ln_p.exp() - g).abs());
    });
    (sup, F::of(n as f64) * sup)
}
