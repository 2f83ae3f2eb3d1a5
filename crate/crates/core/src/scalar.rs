//! Floating-point scalar abstraction.
//!
//! All numerics are generic over the real scalar type; `f64` is the
//! default used by the CLI and the concrete aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar the whole crate is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion from an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize must convert")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Centralized numeric tolerances.
///
/// One instance of this record is the single source of defaults for every
/// check in the crate; call sites that need an override take a `Tolerances`
/// argument instead of a bare float.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<F> {
    /// Max allowed |entry - conj(transposed entry)| for Hermiticity.
    pub hermiticity: F,
    /// Max allowed |Tr rho - 1|.
    pub trace: F,
    /// Smallest eigenvalue must be >= -psd.
    pub psd: F,
    /// Entrywise tolerance for projector idempotence/orthogonality/completeness.
    pub pvm: F,
    /// Orthonormality tolerance for basis vectors fed to a PVM constructor.
    pub basis: F,
    /// Largest imaginary residue accepted on a physical probability.
    pub prob_imag: F,
    /// Probabilities at or below this are treated as impossible outcomes.
    pub zero_prob: F,
    /// Probability sums must equal 1 within this.
    pub normalization: F,
    /// L-infinity threshold for LP behavior reproduction (Fine membership).
    pub behavior_eq: F,
    /// Max marginal discrepancy allowed by the no-signaling check.
    pub no_signaling: F,
}

impl<F: Scalar> Default for Tolerances<F> {
    fn default() -> Self {
        Tolerances {
            hermiticity: F::of(1e-10),
            trace: F::of(1e-10),
            psd: F::of(1e-9),
            pvm: F::of(1e-10),
            basis: F::of(1e-8),
            prob_imag: F::of(1e-10),
            zero_prob: F::of(1e-12),
            normalization: F::of(1e-9),
            behavior_eq: F::of(1e-8),
            no_signaling: F::of(1e-9),
        }
    }
}

/// Compensated (Kahan) summation so reductions do not depend on how the
/// caller might want to chunk them.
pub fn kahan_sum<F: Scalar>(values: impl IntoIterator<Item = F>) -> F {
    let mut sum = F::zero();
    let mut c = F::zero();
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
