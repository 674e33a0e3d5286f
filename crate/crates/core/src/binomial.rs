//! Log-space binomial probabilities.
//!
//! The binomial pmf is walked with the ratio recurrence
//! `ln p(k+1) = ln p(k) + ln((n-k)/(k+1)) + ln(p/(1-p))`,
//! which is stable for n well beyond the range where factorials overflow.

use crate::num::{KahanSum, Real};

/// `ln P{Bin(n, p) = k}` for 0 < p < 1.
pub fn ln_binomial_pmf<F: Real>(n: u64, k: u64, p: F) -> F {
    assert!(k <= n);
    assert!(p > F::zero() && p < F::one());
    let mut ln_pk = F::of(n as f64) * (F::one() - p).ln();
    let step = p.ln() - (F::one() - p).ln();
    for j in 0..k {
        ln_pk += (F::of((n - j) as f64) / F::of((j + 1) as f64)).ln() + step;
    }
    ln_pk
}

/// Walk `ln P{Bin(n, p) = k}` for k = 0..=n, calling `f(k, ln_pmf)`.
pub fn scan_ln_binomial_pmf<F: Real>(n: u64, p: F, mut f: impl FnMut(u64, F)) {
    assert!(p > F::zero() && p < F::one());
    let mut ln_pk = F::of(n as f64) * (F::one() - p).ln();
    let step = p.ln() - (F::one() - p).ln();
    f(0, ln_pk);
    for k in 0..n {
        ln_pk += (F::of((n - k) as f64) / F::of((k + 1) as f64)).ln() + step;
        f(k + 1, ln_pk);
    }
}

/// Exact lower tail `P{Bin(n, p) <= k}` by coefficient summation.
pub fn binomial_cdf<F: Real>(n: u64, p: F, k: u64) -> F {
    let mut acc = KahanSum::new();
    scan_ln_binomial_pmf(n, p, |j, ln_pj| {
        if j <= k {
            acc.add(ln_pj.exp());
        }
    });
    acc.total().min(F::one())
}
