//! MacDonald's Bernoulli-part decomposition.
//!
//! From an admissible tau sequence the joint law of `(V, eps)` is built
//! so that `V + eps*D*L` (with `L` an independent fair bit) has the law
//! of `X`, and `S_n` decomposes as `W_n + D*M_n` with `M_n` a sum of
//! `B_n` fair bits.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticePmf;
use crate::num::{kahan_sum, tol, Real};

/// Non-negative weights `tau_k` with `tau_{k-1} + tau_k <= 2 f(k)` and
/// total mass `vartheta` in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TauSequence<F: Real> {
    tau: BTreeMap<i64, F>,
    vartheta: F,
}

impl<F: Real> TauSequence<F> {
    /// The canonical choice `tau_k = min(f(k), f(k+1))`, total `vartheta_X`.
    pub fn canonical(pmf: &LatticePmf<F>) -> Result<Self> {
        let stats = pmf.validate()?;
        if !stats.basber {
            return Err(Error::NoBernoulliPart);
        }
        let tau: BTreeMap<i64, F> = pmf
            .atoms()
            .filter_map(|(k, p)| {
                let t = p.min(pmf.prob(k + 1));
                (t > F::zero()).then_some((k, t))
            })
            .collect();
        Ok(TauSequence {
            tau,
            vartheta: stats.vartheta,
        })
    }

    /// A user-supplied sequence, checked for admissibility against `pmf`.
    pub fn new(pmf: &LatticePmf<F>, tau: BTreeMap<i64, F>) -> Result<Self> {
        let tau: BTreeMap<i64, F> = tau.into_iter().filter(|&(_, t)| t != F::zero()).collect();
        for (&k, &t) in &tau {
            if !t.is_finite() || t < F::zero() {
                return Err(Error::InadmissibleTau {
                    reason: format!("tau[{k}] = {t} is negative or non-finite"),
                });
            }
        }
        // tau_{k-1} + tau_k <= 2 f(k) must hold at every k
        let ks: Vec<i64> = tau
            .keys()
            .flat_map(|&k| [k, k + 1])
            .chain(pmf.atoms().map(|(k, _)| k))
            .collect();
        let get = |k: i64| tau.get(&k).copied().unwrap_or_else(F::zero);
        for k in ks {
            let pair = get(k - 1) + get(k);
            if pair > F::of(2.0) * pmf.prob(k) + tol(1e-12) {
                return Err(Error::InadmissibleTau {
                    reason: format!("tau[{}] + tau[{}] exceeds 2 f({k})", k - 1, k),
                });
            }
        }
        let vartheta = kahan_sum(tau.values().copied());
        if vartheta <= F::zero() || vartheta >= F::one() {
            return Err(Error::InadmissibleTau {
                reason: format!("total mass {vartheta} outside (0, 1)"),
            });
        }
        Ok(TauSequence { tau, vartheta })
    }

    pub fn vartheta(&self) -> F {
        self.vartheta
    }

    pub fn weight(&self, k: i64) -> F {
        self.tau.get(&k).copied().unwrap_or_else(F::zero)
    }

    pub fn weights(&self) -> impl Iterator<Item = (i64, F)> + '_ {
        self.tau.iter().map(|(&k, &t)| (k, t))
    }
}

/// Joint law of `(V, eps)`: `P{(V,eps)=(v_k,1)} = tau_k` and
/// `P{(V,eps)=(v_k,0)} = f(k) - (tau_{k-1}+tau_k)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliPart<F: Real> {
    base: LatticePmf<F>,
    vartheta: F,
    /// atoms with eps = 1, i.e. tau_k
    smoothed: BTreeMap<i64, F>,
    /// atoms with eps = 0
    plain: BTreeMap<i64, F>,
}

impl<F: Real> BernoulliPart<F> {
    pub fn build(pmf: &LatticePmf<F>, tau: &TauSequence<F>) -> Result<Self> {
        let smoothed: BTreeMap<i64, F> = tau.weights().collect();
        let mut plain = BTreeMap::new();
        let ks: std::collections::BTreeSet<i64> = pmf
            .atoms()
            .map(|(k, _)| k)
            .chain(smoothed.keys().map(|&k| k))
            .chain(smoothed.keys().map(|&k| k + 1))
            .collect();
        for k in ks {
            let p = pmf.prob(k) - (tau.weight(k - 1) + tau.weight(k)) / F::of(2.0);
            if p < -tol::<F>(1e-12) {
                return Err(Error::InadmissibleTau {
                    reason: format!("P{{(V,eps)=(v_{k},0)}} = {p} is negative"),
                });
            }
            if p > F::zero() {
                plain.insert(k, p);
            }
        }
        let part = BernoulliPart {
            base: pmf.clone(),
            vartheta: tau.vartheta(),
            smoothed,
            plain,
        };
        // mass identity below the joint-law display, and the eps marginal
        let total = kahan_sum(
            part.smoothed
                .values()
                .chain(part.plain.values())
                .copied(),
        );
        if (total - F::one()).abs() > tol(1e-10) {
            return Err(Error::InadmissibleTau {
                reason: format!("joint law mass {total} != 1"),
            });
        }
        Ok(part)
    }

    pub fn base(&self) -> &LatticePmf<F> {
        &self.base
    }

    pub fn vartheta(&self) -> F {
        self.vartheta
    }

    /// `P{(V, eps) = (v_k, e)}`.
    pub fn joint_prob(&self, k: i64, e: bool) -> F {
        let map = if e { &self.smoothed } else { &self.plain };
        map.get(&k).copied().unwrap_or_else(F::zero)
    }

    /// Positive joint atoms in the fixed sampling order: ascending `k`,
    /// `eps = 1` before `eps = 0`.
    pub fn joint_atoms(&self) -> Vec<(i64, bool, F)> {
        let ks: std::collections::BTreeSet<i64> = self
            .smoothed
            .keys()
            .chain(self.plain.keys())
            .copied()
            .collect();
        let mut out = Vec::new();
        for k in ks {
            let t = self.joint_prob(k, true);
            if t > F::zero() {
                out.push((k, true, t));
            }
            let p = self.joint_prob(k, false);
            if p > F::zero() {
                out.push((k, false, p));
            }
        }
        out
    }

    /// Marginal `P{V = v_k} = f(k) + (tau_k - tau_{k-1})/2`.
    pub fn v_marginal(&self, k: i64) -> F {
        self.joint_prob(k, true) + self.joint_prob(k, false)
    }

    /// Exact law of `Z = V + eps*D*L` with `L` fair and independent;
    /// equals the base law.
    pub fn reconstructed_law(&self) -> Result<LatticePmf<F>> {
        let half = F::of(0.5);
        let mut out: BTreeMap<i64, F> = BTreeMap::new();
        for (&k, &t) in &self.smoothed {
            *out.entry(k).or_insert_with(F::zero) += t * half;
            *out.entry(k + 1).or_insert_with(F::zero) += t * half;
        }
        for (&k, &p) in &self.plain {
            *out.entry(k).or_insert_with(F::zero) += p;
        }
        LatticePmf::new(self.base.v0(), self.base.span(), out)
    }
}

/// One simulated step of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Offset `k` with `V_j = v_k`.
    pub v_offset: i64,
    /// `eps_j`.
    pub eps: bool,
    /// The fair bit `L_j`.
    pub flip: bool,
}

/// `n` i.i.d. draws of `(V_j, eps_j, L_j)` with the derived aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionSample<F: Real> {
    pub steps: Vec<StepRecord>,
    /// `W_n`, the sum of the `V_j`.
    pub w_n: F,
    /// `B_n`, the number of steps with `eps_j = 1`.
    pub b_n: u64,
    /// `M_n`, the number of steps with `eps_j = 1` and `L_j = 1`.
    pub m_n: u64,
    /// `S_n = W_n + D * M_n`.
    pub s_n: F,
}

/// Deterministic inverse-CDF sampler over the joint `(V, eps)` law plus
/// an independent fair bit per step.
pub fn sample_decomposition<F: Real>(
    part: &BernoulliPart<F>,
    n: u64,
    seed: u64,
) -> DecompositionSample<F> {
    assert!(n >= 1, "need n >= 1");
    let atoms = part.joint_atoms();
    let mut cdf = Vec::with_capacity(atoms.len());
    let mut acc = F::zero();
    for &(k, e, p) in &atoms {
        acc += p;
        cdf.push((acc, k, e));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::with_capacity(n as usize);
    let mut w = crate::num::KahanSum::new();
    let (mut b_n, mut m_n) = (0u64, 0u64);
    for _ in 0..n {
        let u = F::of(rng.random::<f64>());
        let &(_, k, e) = cdf
            .iter()
            .find(|&&(c, _, _)| u < c)
            .unwrap_or(cdf.last().expect("non-empty joint law"));
        let flip = rng.random::<bool>();
        steps.push(StepRecord {
            v_offset: k,
            eps: e,
            flip,
        });
        w.add(part.base.value(k));
        if e {
            b_n += 1;
            if flip {
                m_n += 1;
            }
        }
    }
    let w_n = w.total();
    let s_n = w_n + part.base.span() * F::of(m_n as f64);
    DecompositionSample {
        steps,
        w_n,
        b_n,
        m_n,
        s_n,
    }
}
