//! Violating-state constructions: the maximally entangled qudit pair, the
//! Fourier measurement bases with setting-dependent phase offsets, and the
//! Schwinger spin-labeling bijection for two-mode boson occupations.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quantum::{pvm_from_basis, DensityOperator, PureState, Pvm};
use crate::scalar::{Scalar, Tolerances};
use crate::sequences::MeasurementScenario;

/// Phase offsets used by [`cglmp_bases`]: A-side settings use
/// (alpha_1, alpha_2), B-side settings (beta_1, beta_2).
pub const BASIS_OFFSETS: BasisOffsets = BasisOffsets {
    alpha_1: 0.0,
    alpha_2: 0.5,
    beta_1: 0.25,
    beta_2: -0.25,
};

#[derive(Debug, Clone, Copy)]
pub struct BasisOffsets {
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub beta_1: f64,
    pub beta_2: f64,
}

/// |psi> = sum_m |m>|m> / sqrt(d) in the A-major index convention.
pub fn maximally_entangled<F: Scalar>(d: usize) -> Result<PureState<F>> {
    if d < 2 {
        return Err(Error::OutcomeCountOutOfRange { d, min: 2, max: usize::MAX });
    }
    let mut amps = vec![Complex::new(F::zero(), F::zero()); d * d];
    for m in 0..d {
        amps[m * d + m] = Complex::new(F::one(), F::zero());
    }
    PureState::new(amps) // normalizes to 1/sqrt(d)
}

/// The maximally entangled state as a density operator with dims (d, d).
pub fn maximally_entangled_density<F: Scalar>(d: usize, tol: &Tolerances<F>) -> Result<DensityOperator<F>> {
    DensityOperator::from_pure(&maximally_entangled(d)?, (d, d), tol)
}

/// Fourier basis vector v_k[j] = exp(sign * 2 pi i j (k + offset) / d) / sqrt(d).
fn fourier_vector<F: Scalar>(d: usize, k: usize, offset: f64, sign: f64) -> PureState<F> {
    let amps = (0..d)
        .map(|j| {
            let phase = sign * 2.0 * std::f64::consts::PI * j as f64 * (k as f64 + offset) / d as f64;
            Complex::from_polar(F::one(), F::of(phase))
        })
        .collect();
    PureState::new(amps).expect("unit-modulus amplitudes")
}

fn fourier_pvm_a<F: Scalar>(d: usize, offset: f64, tol: &Tolerances<F>) -> Result<Pvm<F>> {
    let vectors: Vec<PureState<F>> = (0..d).map(|k| fourier_vector(d, k, offset, 1.0)).collect();
    pvm_from_basis(&vectors, tol)
}

/// B-side eigenvectors use conjugate phases: exp(2 pi i j (-l + beta) / d).
fn fourier_pvm_b<F: Scalar>(d: usize, offset: f64, tol: &Tolerances<F>) -> Result<Pvm<F>> {
    let vectors: Vec<PureState<F>> = (0..d)
        .map(|l| {
            let amps = (0..d)
                .map(|j| {
                    let phase =
                        2.0 * std::f64::consts::PI * j as f64 * (-(l as f64) + offset) / d as f64;
                    Complex::from_polar(F::one(), F::of(phase))
                })
                .collect();
            PureState::new(amps).expect("unit-modulus amplitudes")
        })
        .collect();
    pvm_from_basis(&vectors, tol)
}

/// The four measurement bases that violate I <= 3 on the maximally
/// entangled state: discrete-Fourier superpositions with the phase offsets
/// in [`BASIS_OFFSETS`].
pub fn cglmp_bases<F: Scalar>(d: usize, tol: &Tolerances<F>) -> Result<MeasurementScenario<F>> {
    if d < 2 {
        return Err(Error::OutcomeCountOutOfRange { d, min: 2, max: usize::MAX });
    }
    let o = BASIS_OFFSETS;
    MeasurementScenario::new(
        fourier_pvm_a(d, o.alpha_1, tol)?,
        fourier_pvm_a(d, o.alpha_2, tol)?,
        fourier_pvm_b(d, o.beta_1, tol)?,
        fourier_pvm_b(d, o.beta_2, tol)?,
    )
}

/// Angular-momentum label |s, m>; both stored doubled so half-integer
/// spins stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinLabel {
    twice_s: u32,
    twice_m: i64,
}

impl SpinLabel {
    pub fn new(twice_s: u32, twice_m: i64) -> Result<Self> {
        if twice_m.unsigned_abs() > twice_s as u64 {
            return Err(Error::InvalidInput(format!(
                "m = {}/2 outside [-s, s] for s = {}/2",
                twice_m, twice_s
            )));
        }
        if (twice_s as i64 - twice_m) % 2 != 0 {
            return Err(Error::InvalidInput("m must differ from s by an integer".into()));
        }
        Ok(SpinLabel { twice_s, twice_m })
    }

    pub fn twice_s(&self) -> u32 {
        self.twice_s
    }

    pub fn twice_m(&self) -> i64 {
        self.twice_m
    }

    /// d = 2s + 1.
    pub fn dimension(&self) -> usize {
        self.twice_s as usize + 1
    }
}

/// Bijection m <-> index: index = m + s, counting up from m = -s.
pub fn spin_label_to_index(label: SpinLabel) -> usize {
    ((label.twice_m + label.twice_s as i64) / 2) as usize
}

/// Inverse of [`spin_label_to_index`].
pub fn index_to_spin_label(twice_s: u32, index: usize) -> Result<SpinLabel> {
    let twice_m = 2 * index as i64 - twice_s as i64;
    SpinLabel::new(twice_s, twice_m)
}

/// Boson counts in the two hyperfine modes of one well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeOccupation {
    pub n_up: u64,
    pub n_down: u64,
}

/// Schwinger map: s = (n_up + n_down)/2, m = (n_up - n_down)/2.
pub fn schwinger_label(occ: ModeOccupation) -> Result<SpinLabel> {
    let twice_s = occ.n_up + occ.n_down;
    if twice_s > u32::MAX as u64 {
        return Err(Error::InvalidInput("occupation too large".into()));
    }
    let twice_m = occ.n_up as i64 - occ.n_down as i64;
    SpinLabel::new(twice_s as u32, twice_m)
}
