//! Scalar abstraction and compensated summation.

use std::fmt;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Scalar type the whole library is generic over.
///
/// `f64` is the intended default (see the aliases at the crate root);
/// `f32` works too, with tolerances widened to its epsilon.
pub trait Real:
    Float + FromPrimitive + AddAssign + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Lift an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + AddAssign + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// A tolerance stated for f64, widened so it stays meaningful for
/// lower-precision scalars.
pub fn tol<F: Real>(t: f64) -> F {
    F::of(t).max(F::epsilon() * F::of(64.0))
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<F: Real> {
    sum: F,
    err: F,
}

impl<F: Real> KahanSum<F> {
    pub fn new() -> Self {
        KahanSum {
            sum: F::zero(),
            err: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        let y = x - self.err;
        let t = self.sum + y;
        self.err = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> F {
        self.sum
    }
}

impl<F: Real> Default for KahanSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

/// Compensated sum of an iterator of scalars.
pub fn kahan_sum<F: Real, I: IntoIterator<Item = F>>(it: I) -> F {
    let mut acc = KahanSum::new();
    for x in it {
        acc.add(x);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_small_terms() {
        let terms: Vec<f64> = std::iter::once(1.0)
            .chain(std::iter::repeat(1e-16).take(10_000))
            .collect();
        let naive: f64 = terms.iter().sum();
        let comp = kahan_sum(terms.iter().copied());
        let exact = 1.0 + 1e-16 * 10_000.0;
        assert!((comp - exact).abs() < (naive - exact).abs() || naive == exact);
        assert!((comp - exact).abs() < 1e-15);
    }
}
