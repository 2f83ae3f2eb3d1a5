//! The CGLMP quantity
//! I = P(A1=B1) + P(B1=A2+1) + P(A2=B2) + P(B2=A1),
//! its classical bound I <= 3, the algebraic bound I <= 4, and quantum
//! evaluation under any of the three measurement processes.

use crate::error::{Error, Result};
use crate::hvt::{BehaviorTable, HvtDistribution, JointDistribution};
use crate::quantum::DensityOperator;
use crate::scalar::{kahan_sum, Scalar, Tolerances};
use crate::sequences::{process_probability, MeasurementScenario, ProcessKind, SettingPair};

/// A shifted-agreement probability specification: which setting pair, and
/// by how much the B outcome leads the A outcome (mod d).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftSpec {
    pub setting: SettingPair,
    pub shift: usize,
}

/// The four terms of I, in the order they appear in the defining sum.
pub const TERM_SPECS: [ShiftSpec; 4] = [
    ShiftSpec { setting: SettingPair::A1B1, shift: 0 }, // P(A1 = B1)
    ShiftSpec { setting: SettingPair::A2B1, shift: 1 }, // P(B1 = A2 + 1)
    ShiftSpec { setting: SettingPair::A2B2, shift: 0 }, // P(A2 = B2)
    ShiftSpec { setting: SettingPair::A1B2, shift: 0 }, // P(B2 = A1)
];

pub const TERM_LABELS: [&str; 4] = [
    "P(A1=B1)",
    "P(B1=A2+1)",
    "P(A2=B2)",
    "P(B2=A1)",
];

/// I with its term-by-term structure.
#[derive(Debug, Clone, Copy)]
pub struct CglmpBreakdown<F> {
    pub terms: [F; 4],
    pub total: F,
}

impl<F: Scalar> CglmpBreakdown<F> {
    fn from_terms(terms: [F; 4]) -> Self {
        CglmpBreakdown {
            terms,
            total: kahan_sum(terms),
        }
    }
}

/// P(B = A + p mod d) evaluated on one joint outcome table.
pub fn shift_probability<F: Scalar>(joint: &JointDistribution<F>, shift: usize) -> F {
    let d = joint.d();
    kahan_sum((0..d).map(|alpha| joint.get(alpha, (alpha + shift) % d)))
}

/// The Kronecker-delta bracket
/// delta_{l,j} + delta_{l,k+1 mod d} + delta_{m,k} + delta_{m,j},
/// an integer in {0, 1, 2, 3}. The value 4 would need j = k = l = m and
/// l = k+1 mod d simultaneously, impossible once d >= 2.
pub fn bracket_weight(j: usize, k: usize, l: usize, m: usize, d: usize) -> Result<u8> {
    if d < 2 {
        return Err(Error::OutcomeCountOutOfRange { d, min: 2, max: usize::MAX });
    }
    for out in [j, k, l, m] {
        if out >= d {
            return Err(Error::InvalidInput(format!("outcome {out} out of range for d={d}")));
        }
    }
    let mut w = 0u8;
    if l == j {
        w += 1;
    }
    if l == (k + 1) % d {
        w += 1;
    }
    if m == k {
        w += 1;
    }
    if m == j {
        w += 1;
    }
    Ok(w)
}

/// I evaluated on a fundamental C table.
///
/// Computed twice: as the bracket-weighted sum over all (j,k,l,m) and as
/// the four marginal shifted-agreement sums; the routes must agree.
pub fn i_from_c<F: Scalar>(c: &HvtDistribution<F>) -> Result<CglmpBreakdown<F>> {
    let d = c.d();
    // Route 1: the four terms as direct sums over C.
    let term = |spec: &ShiftSpec| -> F {
        let mut parts = Vec::with_capacity(d * d * d);
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    for m in 0..d {
                        let s = crate::hvt::DeterministicStrategy { j, k, l, m };
                        let alpha = s.outcome_a(spec.setting.a);
                        let beta = s.outcome_b(spec.setting.b);
                        if beta == (alpha + spec.shift) % d {
                            parts.push(c.get(j, k, l, m));
                        }
                    }
                }
            }
        }
        kahan_sum(parts)
    };
    let terms = [
        term(&TERM_SPECS[0]),
        term(&TERM_SPECS[1]),
        term(&TERM_SPECS[2]),
        term(&TERM_SPECS[3]),
    ];
    let breakdown = CglmpBreakdown::from_terms(terms);

    // Route 2: single bracket-weighted sum.
    let mut parts = Vec::with_capacity(d * d * d * d);
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                for m in 0..d {
                    let w = bracket_weight(j, k, l, m, d)?;
                    parts.push(F::of_usize(w as usize) * c.get(j, k, l, m));
                }
            }
        }
    }
    let bracket_total = kahan_sum(parts);
    if (bracket_total - breakdown.total).abs() > F::of(1e-12) {
        return Err(Error::InvalidInput(format!(
            "I routes disagree: bracket {bracket_total} vs terms {}",
            breakdown.total
        )));
    }
    Ok(breakdown)
}

/// I evaluated on a behavior table via the four shifted-agreement
/// probabilities.
pub fn i_from_behavior<F: Scalar>(b: &BehaviorTable<F>) -> CglmpBreakdown<F> {
    let terms = [
        shift_probability(b.joint(TERM_SPECS[0].setting), TERM_SPECS[0].shift),
        shift_probability(b.joint(TERM_SPECS[1].setting), TERM_SPECS[1].shift),
        shift_probability(b.joint(TERM_SPECS[2].setting), TERM_SPECS[2].shift),
        shift_probability(b.joint(TERM_SPECS[3].setting), TERM_SPECS[3].shift),
    ];
    CglmpBreakdown::from_terms(terms)
}

/// The behavior of a quantum state under the chosen measurement process:
/// each setting pair is recorded in turn, the complementary pair playing
/// the unrecorded role.
pub fn quantum_behavior<F: Scalar>(
    rho: &DensityOperator<F>,
    scenario: &MeasurementScenario<F>,
    kind: ProcessKind,
    tol: &Tolerances<F>,
) -> Result<BehaviorTable<F>> {
    let d = scenario.d();
    let mut joints = Vec::with_capacity(4);
    for pair in SettingPair::ALL {
        let mut p = vec![F::zero(); d * d];
        for j in 0..d {
            for l in 0..d {
                p[j * d + l] = process_probability(rho, scenario, pair, (j, l), kind, tol)?;
            }
        }
        joints.push(JointDistribution::new(d, pair, p, tol)?);
    }
    BehaviorTable::new([
        joints.remove(0),
        joints.remove(0),
        joints.remove(0),
        joints.remove(0),
    ])
}

/// Quantum evaluation of I under a measurement process.
pub fn i_quantum<F: Scalar>(
    rho: &DensityOperator<F>,
    scenario: &MeasurementScenario<F>,
    kind: ProcessKind,
    tol: &Tolerances<F>,
) -> Result<CglmpBreakdown<F>> {
    Ok(i_from_behavior(&quantum_behavior(rho, scenario, kind, tol)?))
}
