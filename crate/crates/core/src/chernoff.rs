//! The Chernoff rate function `psi` for the Bernoulli count `B_n` and
//! the exact verification `P{B_n <= theta*n} <= psi(theta)^n`.


use crate::binomial::binomial_cdf;
use crate::error::{Error, Result};
use crate::num::Real;

/// `psi(theta) = ((1-vartheta)/(1-theta))^(1-theta) * (vartheta/theta)^theta`
/// for `0 < theta <= vartheta < 1`, evaluated in log space.
pub fn psi<F: Real>(theta: F, vartheta: F) -> Result<F> {
    check_vartheta(vartheta)?;
    if theta <= F::zero() || theta > vartheta {
        return Err(Error::DomainError {
            what: "theta",
            value: theta.to_f64().unwrap_or(f64::NAN),
            range: "(0, vartheta]",
        });
    }
    let one = F::one();
    let ln_psi = (one - theta) * ((one - vartheta).ln() - (one - theta).ln())
        + theta * (vartheta.ln() - theta.ln());
    Ok(ln_psi.exp())
}

fn check_vartheta<F: Real>(vartheta: F) -> Result<()> {
    if vartheta <= F::zero() || vartheta >= F::one() {
        return Err(Error::DomainError {
            what: "vartheta",
            value: vartheta.to_f64().unwrap_or(f64::NAN),
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// The unique `theta` in `(0, vartheta)` with `psi(theta) = rho`, for
/// `1 - vartheta < rho < 1`. Bisection on the nondecreasing `psi`;
/// residual `|psi(theta) - rho| <= 1e-12`.
pub fn solve_theta<F: Real>(rho: F, vartheta: F) -> Result<F> {
    check_vartheta(vartheta)?;
    if rho <= F::one() - vartheta || rho >= F::one() {
        return Err(Error::DomainError {
            what: "rho",
            value: rho.to_f64().unwrap_or(f64::NAN),
            range: "(1 - vartheta, 1)",
        });
    }
    let mut lo = F::zero();
    let mut hi = vartheta;
    let two = F::of(2.0);
    // psi extends continuously to psi(0+) = 1 - vartheta < rho and
    // psi(vartheta) = 1 > rho, so the bracket is valid from the start.
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let val = psi(mid, vartheta)?;
        if (val - rho).abs() <= crate::num::tol(1e-13) {
            return Ok(mid);
        }
        if val < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / two)
}

/// Parameters tying `vartheta`, `rho` and the solved `theta` together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffParams<F: Real> {
    pub vartheta: F,
    pub rho: F,
    pub theta: F,
}

impl<F: Real> ChernoffParams<F> {
    pub fn new(vartheta: F, rho: F) -> Result<Self> {
        let theta = solve_theta(rho, vartheta)?;
        Ok(ChernoffParams {
            vartheta,
            rho,
            theta,
        })
    }

    /// The default choice `rho = 1 - vartheta/2`.
    pub fn with_default_rho(vartheta: F) -> Result<Self> {
        check_vartheta(vartheta)?;
        Self::new(vartheta, F::one() - vartheta / F::of(2.0))
    }
}

/// Exact tail `P{Bin(n, vartheta) <= floor(theta*n)}` next to the bound
/// `psi(theta)^n`. The exact value never exceeds the bound.
pub fn verify_chernoff<F: Real>(vartheta: F, theta: F, n: u64) -> Result<(F, F)> {
    let psi_val = psi(theta, vartheta)?;
    let cut = (theta * F::of(n as f64)).floor().to_u64().unwrap_or(0);
    let exact = binomial_cdf(n, vartheta, cut.min(n));
    let bound = (F::of(n as f64) * psi_val.ln()).exp();
    Ok((exact, bound))
}
