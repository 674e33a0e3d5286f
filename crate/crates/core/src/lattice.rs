//! Finitely supported lattice laws and their scalar characteristics.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{kahan_sum, tol, KahanSum, Real};

/// Tolerance inside which a total mass off 1 is silently renormalized.
pub const MASS_TOL: f64 = 1e-12;

/// A probability mass function on the lattice `v0 + D*Z` with finitely
/// many atoms: `probs[k] = P{X = v0 + D*k}`.
///
/// Construction checks finiteness and total mass; span maximality is
/// checked by [`LatticePmf::validate`] so that non-maximal inputs can
/// still be canonicalized through [`LatticePmf::normalize_span`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf<F: Real> {
    v0: F,
    d: F,
    probs: BTreeMap<i64, F>,
}

/// Scalar characteristics of a validated law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistStats<F: Real> {
    /// Mean of X.
    pub mu: F,
    /// Variance of X, strictly positive.
    pub sigma2: F,
    /// Total Bernoulli mass: sum over k of min(f(k), f(k+1)).
    pub vartheta: F,
    /// True iff two adjacent atoms both carry mass (vartheta > 0).
    pub basber: bool,
}

impl<F: Real> LatticePmf<F> {
    pub fn new(v0: F, d: F, probs: BTreeMap<i64, F>) -> Result<Self> {
        if !v0.is_finite() || !d.is_finite() || d <= F::zero() {
            return Err(Error::DomainError {
                what: "D",
                value: d.to_f64().unwrap_or(f64::NAN),
                range: "(0, inf)",
            });
        }
        let mut clean = BTreeMap::new();
        for (&k, &p) in &probs {
            if !p.is_finite() || p < F::zero() || p > F::one() {
                return Err(Error::DomainError {
                    what: "probability",
                    value: p.to_f64().unwrap_or(f64::NAN),
                    range: "[0, 1]",
                });
            }
            if p > F::zero() {
                clean.insert(k, p);
            }
        }
        if clean.is_empty() {
            return Err(Error::SumNotOne {
                sum: 0.0,
                tol: MASS_TOL,
            });
        }
        let total = kahan_sum(clean.values().copied());
        if (total - F::one()).abs() > tol(MASS_TOL) {
            return Err(Error::SumNotOne {
                sum: total.to_f64().unwrap_or(f64::NAN),
                tol: MASS_TOL,
            });
        }
        if total != F::one() {
            for p in clean.values_mut() {
                *p = *p / total;
            }
        }
        Ok(LatticePmf { v0, d, probs: clean })
    }

    /// Convenience constructor for the fair Bernoulli law on {0, 1}.
    pub fn bernoulli_half() -> Self {
        let half = F::of(0.5);
        LatticePmf::new(F::zero(), F::one(), BTreeMap::from([(0, half), (1, half)]))
            .expect("fair coin is a valid pmf")
    }

    pub fn v0(&self) -> F {
        self.v0
    }

    pub fn span(&self) -> F {
        self.d
    }

    /// Atoms in ascending offset order.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, F)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn prob(&self, k: i64) -> F {
        self.probs.get(&k).copied().unwrap_or_else(F::zero)
    }

    pub fn min_offset(&self) -> i64 {
        *self.probs.keys().next().expect("non-empty support")
    }

    pub fn max_offset(&self) -> i64 {
        *self.probs.keys().next_back().expect("non-empty support")
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    /// Real value carried by offset `k`.
    pub fn value(&self, k: i64) -> F {
        self.v0 + self.d * F::of(k as f64)
    }

    fn gap_gcd(&self) -> i64 {
        let k0 = self.min_offset();
        self.probs
            .keys()
            .skip(1)
            .fold(0i64, |g, &k| g.gcd(&(k - k0)))
    }

    /// Check span maximality and non-degeneracy, returning the scalar
    /// characteristics mu, sigma^2, vartheta and the adjacent-mass flag.
    pub fn validate(&self) -> Result<DistStats<F>> {
        if self.probs.len() < 2 {
            return Err(Error::DegenerateLaw);
        }
        let g = self.gap_gcd();
        if g != 1 {
            return Err(Error::NonMaximalSpan { gcd: g });
        }
        let mut mean = KahanSum::new();
        for (k, p) in self.atoms() {
            mean.add(p * self.value(k));
        }
        let mu = mean.total();
        let mut var = KahanSum::new();
        for (k, p) in self.atoms() {
            let c = self.value(k) - mu;
            var.add(p * c * c);
        }
        let sigma2 = var.total();
        if sigma2 <= F::zero() {
            return Err(Error::DegenerateLaw);
        }
        let mut theta = KahanSum::new();
        for (k, p) in self.atoms() {
            theta.add(p.min(self.prob(k + 1)));
        }
        let vartheta = theta.total();
        Ok(DistStats {
            mu,
            sigma2,
            vartheta,
            basber: vartheta > F::zero(),
        })
    }

    /// Re-index offsets so the smallest support point is 0 and the gcd
    /// of support gaps is 1, rescaling `D`. The pushforward law is
    /// unchanged; idempotent.
    pub fn normalize_span(&self) -> Result<Self> {
        if self.probs.len() < 2 {
            return Err(Error::DegenerateLaw);
        }
        let k0 = self.min_offset();
        let g = self.gap_gcd();
        debug_assert!(g >= 1);
        let v0 = self.value(k0);
        let d = self.d * F::of(g as f64);
        let probs = self
            .probs
            .iter()
            .map(|(&k, &p)| ((k - k0) / g, p))
            .collect();
        Ok(LatticePmf { v0, d, probs })
    }
}

#[derive(Serialize, Deserialize)]
struct PmfFile {
    v0: f64,
    #[serde(rename = "D")]
    d: f64,
    probs: BTreeMap<String, f64>,
}

impl LatticePmf<f64> {
    /// Parse the JSON file format `{"v0": .., "D": .., "probs": {"k": p}}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: PmfFile = serde_json::from_str(s).map_err(|e| Error::DomainError {
            what: "pmf json",
            value: e.line() as f64,
            range: "parseable JSON object",
        })?;
        let mut probs = BTreeMap::new();
        for (key, p) in file.probs {
            let k: i64 = key.parse().map_err(|_| Error::DomainError {
                what: "offset key",
                value: f64::NAN,
                range: "integer string",
            })?;
            probs.insert(k, p);
        }
        LatticePmf::new(file.v0, file.d, probs)
    }

    pub fn to_json_string(&self) -> String {
        let file = PmfFile {
            v0: self.v0,
            d: self.d,
            probs: self
                .probs
                .iter()
                .map(|(k, p)| (k.to_string(), *p))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("pmf serializes")
    }
}
