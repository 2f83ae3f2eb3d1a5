//! Dense complex operators, density operators, pure states and
//! projector-valued measurements on small bipartite Hilbert spaces.
//!
//! Index convention for a bipartite space of dimensions `(d_a, d_b)` is
//! A-major everywhere: the composite index is `i_a * d_b + i_b`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{kahan_sum, Scalar, Tolerances};

pub type C<F> = Complex<F>;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator<F> {
    dim: usize,
    entries: Vec<C<F>>,
}

impl<F: Scalar> ComplexOperator<F> {
    pub fn zeros(dim: usize) -> Self {
        ComplexOperator {
            dim,
            entries: vec![C::new(F::zero(), F::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C::new(F::one(), F::zero());
        }
        m
    }

    /// Builds from a row-major entry list; must be exactly `dim * dim` long.
    pub fn from_entries(dim: usize, entries: Vec<C<F>>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(ComplexOperator { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C<F> {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C<F>) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[C<F>] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ComplexOperator {
            dim: self.dim,
            entries,
        })
    }

    pub fn scale(&self, factor: C<F>) -> Self {
        ComplexOperator {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: F) -> Self {
        self.scale(C::new(factor, F::zero()))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<F> {
        self.check_same_dim(other)?;
        let mut worst = F::zero();
        for (a, b) in self.entries.iter().zip(&other.entries) {
            worst = worst.max((a - b).norm());
        }
        Ok(worst)
    }

    /// Apply to a vector: `self * v`.
    pub fn apply(&self, v: &[C<F>]) -> Result<Vec<C<F>>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let mut out = vec![C::new(F::zero(), F::zero()); self.dim];
        for i in 0..self.dim {
            let mut acc = C::new(F::zero(), F::zero());
            for j in 0..self.dim {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }
}

/// Matrix product `a * b`.
pub fn mat_mul<F: Scalar>(a: &ComplexOperator<F>, b: &ComplexOperator<F>) -> Result<ComplexOperator<F>> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            actual: b.dim,
        });
    }
    let n = a.dim;
    let mut out = ComplexOperator::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik.norm_sqr() == F::zero() {
                continue;
            }
            for j in 0..n {
                let v = out.get(i, j) + aik * b.get(k, j);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn adjoint<F: Scalar>(a: &ComplexOperator<F>) -> ComplexOperator<F> {
    let n = a.dim;
    let mut out = ComplexOperator::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out.set(j, i, a.get(i, j).conj());
        }
    }
    out
}

/// Trace; returned as a complex number, callers assert near-realness where
/// the physics demands it.
pub fn trace<F: Scalar>(a: &ComplexOperator<F>) -> C<F> {
    let re = kahan_sum((0..a.dim).map(|i| a.get(i, i).re));
    let im = kahan_sum((0..a.dim).map(|i| a.get(i, i).im));
    C::new(re, im)
}

/// Kronecker product with A-major index convention `i_a * d_b + i_b`.
pub fn tensor_product<F: Scalar>(a: &ComplexOperator<F>, b: &ComplexOperator<F>) -> ComplexOperator<F> {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexOperator::zeros(n);
    for ia in 0..da {
        for ja in 0..da {
            let aij = a.get(ia, ja);
            for ib in 0..db {
                for jb in 0..db {
                    out.set(ia * db + ib, ja * db + jb, aij * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<F> {
    dim: usize,
    amplitudes: Vec<C<F>>,
}

impl<F: Scalar> PureState<F> {
    /// Normalizes on ingestion; rejects a zero vector.
    pub fn new(amplitudes: Vec<C<F>>) -> Result<Self> {
        let norm_sqr = kahan_sum(amplitudes.iter().map(|a| a.norm_sqr()));
        if norm_sqr <= F::zero() {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let inv = norm_sqr.sqrt().recip();
        let dim = amplitudes.len();
        Ok(PureState {
            dim,
            amplitudes: amplitudes
                .into_iter()
                .map(|a| a * C::new(inv, F::zero()))
                .collect(),
        })
    }

    /// Computational basis state |i>.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amps = vec![C::new(F::zero(), F::zero()); dim];
        amps[index] = C::new(F::one(), F::zero());
        PureState {
            dim,
            amplitudes: amps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C<F>] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C<F> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .fold(C::new(F::zero(), F::zero()), |acc, v| acc + v)
    }

    /// Rank-one projector |v><v|.
    pub fn projector(&self) -> ComplexOperator<F> {
        let n = self.dim;
        let mut out = ComplexOperator::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        out
    }
}

/// Projector-valued measurement: `dim` orthogonal rank-one projectors
/// summing to the identity, indexed by outcome.
#[derive(Debug, Clone)]
pub struct Pvm<F> {
    dim: usize,
    projectors: Vec<ComplexOperator<F>>,
}

impl<F: Scalar> Pvm<F> {
    /// Builds from projectors and checks idempotence, pairwise orthogonality
    /// and completeness.
    pub fn new(projectors: Vec<ComplexOperator<F>>, tol: &Tolerances<F>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidInput("empty projector family".into()));
        }
        let dim = projectors[0].dim;
        if projectors.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: projectors.len(),
            });
        }
        for p in &projectors {
            if p.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.dim,
                });
            }
            let sq = mat_mul(p, p)?;
            if sq.max_abs_diff(p)? > tol.pvm {
                return Err(Error::InvalidInput("projector is not idempotent".into()));
            }
        }
        let zero = ComplexOperator::zeros(dim);
        for (x, px) in projectors.iter().enumerate() {
            for py in projectors.iter().skip(x + 1) {
                let prod = mat_mul(px, py)?;
                if prod.max_abs_diff(&zero)? > tol.pvm {
                    return Err(Error::InvalidInput("projectors are not orthogonal".into()));
                }
            }
        }
        let mut sum = ComplexOperator::zeros(dim);
        for p in &projectors {
            sum = sum.add(p)?;
        }
        if sum.max_abs_diff(&ComplexOperator::identity(dim))? > tol.pvm {
            return Err(Error::InvalidInput("projectors do not sum to identity".into()));
        }
        Ok(Pvm { dim, projectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projector(&self, outcome: usize) -> &ComplexOperator<F> {
        &self.projectors[outcome]
    }

    pub fn projectors(&self) -> &[ComplexOperator<F>] {
        &self.projectors
    }

    /// The PVM of the computational basis.
    pub fn computational(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|i| PureState::<F>::basis_state(dim, i).projector())
            .collect();
        Pvm { dim, projectors }
    }
}

/// Builds a PVM from an orthonormal basis, one rank-one projector per vector.
pub fn pvm_from_basis<F: Scalar>(vectors: &[PureState<F>], tol: &Tolerances<F>) -> Result<Pvm<F>> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    let dim = vectors[0].dim();
    if vectors.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: vectors.len(),
        });
    }
    let mut defect = F::zero();
    for (i, vi) in vectors.iter().enumerate() {
        if vi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: vi.dim(),
            });
        }
        for (j, vj) in vectors.iter().enumerate() {
            let expected = if i == j { F::one() } else { F::zero() };
            defect = defect.max((vi.inner(vj).norm() - expected).abs());
        }
    }
    if defect > tol.basis {
        return Err(Error::NonOrthonormalBasis {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    let projectors = vectors.iter().map(|v| v.projector()).collect();
    Pvm::new(projectors, tol)
}

/// Trace-one positive Hermitian operator on a bipartite space.
#[derive(Debug, Clone)]
pub struct DensityOperator<F> {
    op: ComplexOperator<F>,
    dims: (usize, usize),
}

impl<F: Scalar> DensityOperator<F> {
    /// Checks Hermiticity and unit trace on construction; positivity is
    /// reported by [`validate_density`] rather than enforced here.
    pub fn new(op: ComplexOperator<F>, dims: (usize, usize), tol: &Tolerances<F>) -> Result<Self> {
        if dims.0 * dims.1 != op.dim {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                actual: op.dim,
            });
        }
        let herm = op.max_abs_diff(&adjoint(&op))?;
        if herm > tol.hermiticity {
            return Err(Error::InvalidInput(format!(
                "density operator not Hermitian (defect {herm})"
            )));
        }
        let tr = trace(&op);
        if (tr - C::new(F::one(), F::zero())).norm() > tol.trace {
            return Err(Error::InvalidInput(format!("density operator trace is {tr}")));
        }
        Ok(DensityOperator { op, dims })
    }

    /// |psi><psi| for a pure state on the bipartite space.
    pub fn from_pure(state: &PureState<F>, dims: (usize, usize), tol: &Tolerances<F>) -> Result<Self> {
        Self::new(state.projector(), dims, tol)
    }

    /// Maximally mixed state I/(d_a d_b).
    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        let op = ComplexOperator::identity(n).scale_real(F::of_usize(n).recip());
        DensityOperator { op, dims }
    }

    /// Wraps an operator without validity checks; for intermediate states
    /// whose invariants are re-established by the caller.
    pub(crate) fn from_op_unchecked(op: ComplexOperator<F>, dims: (usize, usize)) -> Self {
        DensityOperator { op, dims }
    }

    pub fn op(&self) -> &ComplexOperator<F> {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.op.dim
    }

    /// Partial trace over subsystem B, leaving the A-side reduced operator.
    pub fn partial_trace_b(&self) -> ComplexOperator<F> {
        let (da, db) = self.dims;
        let mut out = ComplexOperator::zeros(da);
        for ia in 0..da {
            for ja in 0..da {
                let mut acc = C::new(F::zero(), F::zero());
                for ib in 0..db {
                    acc += self.op.get(ia * db + ib, ja * db + ib);
                }
                out.set(ia, ja, acc);
            }
        }
        out
    }

    /// Partial trace over subsystem A.
    pub fn partial_trace_a(&self) -> ComplexOperator<F> {
        let (da, db) = self.dims;
        let mut out = ComplexOperator::zeros(db);
        for ib in 0..db {
            for jb in 0..db {
                let mut acc = C::new(F::zero(), F::zero());
                for ia in 0..da {
                    acc += self.op.get(ia * db + ib, ia * db + jb);
                }
                out.set(ib, jb, acc);
            }
        }
        out
    }
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone)]
pub struct ValidationReport<F> {
    pub hermiticity_defect: F,
    pub trace_defect: F,
    pub min_eigenvalue: F,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
    pub psd_ok: bool,
}

impl<F: Scalar> ValidationReport<F> {
    pub fn passed(&self) -> bool {
        self.hermitian_ok && self.trace_ok && self.psd_ok
    }
}

/// Reports Hermiticity defect, trace defect and the minimum eigenvalue of a
/// candidate density operator. Never errors; failures are carried in the
/// report.
pub fn validate_density<F: Scalar>(rho: &DensityOperator<F>, tol: &Tolerances<F>) -> ValidationReport<F> {
    let op = &rho.op;
    let hermiticity_defect = op
        .max_abs_diff(&adjoint(op))
        .expect("same dim by construction");
    let trace_defect = (trace(op) - C::new(F::one(), F::zero())).norm();
    let min_eigenvalue = min_eigenvalue_hermitian(op);
    ValidationReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        hermitian_ok: hermiticity_defect <= tol.hermiticity,
        trace_ok: trace_defect <= tol.trace,
        psd_ok: min_eigenvalue >= -tol.psd,
    }
}

/// Smallest eigenvalue of a Hermitian operator via a shifted power method.
///
/// The dominant eigenvalue of `shift*I - H` is `shift - lambda_min` when
/// `shift` upper-bounds the spectrum (Gershgorin); deflation is not needed.
pub fn min_eigenvalue_hermitian<F: Scalar>(h: &ComplexOperator<F>) -> F {
    let n = h.dim;
    if n == 0 {
        return F::zero();
    }
    // Gershgorin upper bound on the spectrum.
    let mut shift = F::zero();
    for i in 0..n {
        let mut row = F::zero();
        for j in 0..n {
            row += h.get(i, j).norm();
        }
        shift = shift.max(row);
    }
    shift = shift + F::one();
    let mut shifted = ComplexOperator::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut v = -h.get(i, j);
            if i == j {
                v += C::new(shift, F::zero());
            }
            shifted.set(i, j, v);
        }
    }
    // Deterministic pseudo-random start to avoid orthogonality accidents.
    let mut v: Vec<C<F>> = (0..n)
        .map(|i| {
            let x = F::of((i as f64 * 0.754_877_666 + 0.1).sin());
            let y = F::of((i as f64 * 0.569_840_290 + 0.2).cos());
            C::new(x, y)
        })
        .collect();
    let mut lambda = F::zero();
    for _ in 0..120 {
        let w = shifted.apply(&v).expect("dims match");
        let norm = kahan_sum(w.iter().map(|x| x.norm_sqr())).sqrt();
        if norm == F::zero() {
            return shift; // shifted matrix annihilated v; spectrum at `shift`
        }
        let inv = norm.recip();
        v = w.iter().map(|x| x * C::new(inv, F::zero())).collect();
        // Rayleigh quotient of the shifted matrix.
        let hv = shifted.apply(&v).expect("dims match");
        lambda = kahan_sum(v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re));
    }
    shift - lambda
}
