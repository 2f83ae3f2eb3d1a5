//! Shared seeded random fixtures for the integration suites.
#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qudit_bell::hvt::{
    marginals_from_c, strategy_to_c, BehaviorTable, DeterministicStrategy, HvtDistribution,
    JointDistribution,
};
use qudit_bell::quantum::{adjoint, mat_mul, pvm_from_basis, trace, ComplexOperator, PureState, Pvm};
use qudit_bell::sequences::{MeasurementScenario, SettingPair};
use qudit_bell::{Behavior64, Density64, Scenario64, Tolerances64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex<f64> {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random full-rank density operator G G^dag / Tr on a (d_a, d_b) space.
pub fn random_density(rng: &mut ChaCha8Rng, d_a: usize, d_b: usize, tol: &Tolerances64) -> Density64 {
    let n = d_a * d_b;
    let g = ComplexOperator::from_entries(n, (0..n * n).map(|_| random_complex(rng)).collect())
        .unwrap();
    let h = mat_mul(&g, &adjoint(&g)).unwrap();
    let t = trace(&h).re;
    Density64::new(h.scale_real(t.recip()), (d_a, d_b), tol).unwrap()
}

/// Random orthonormal basis by Gram-Schmidt on random vectors.
pub fn random_pvm(rng: &mut ChaCha8Rng, d: usize, tol: &Tolerances64) -> Pvm<f64> {
    loop {
        let mut basis: Vec<Vec<Complex<f64>>> = Vec::with_capacity(d);
        let mut degenerate = false;
        for _ in 0..d {
            let mut v: Vec<Complex<f64>> = (0..d).map(|_| random_complex(rng)).collect();
            for b in &basis {
                let overlap: Complex<f64> =
                    b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                degenerate = true;
                break;
            }
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
        if degenerate {
            continue;
        }
        let states: Vec<PureState<f64>> =
            basis.into_iter().map(|v| PureState::new(v).unwrap()).collect();
        return pvm_from_basis(&states, tol).unwrap();
    }
}

pub fn random_scenario(rng: &mut ChaCha8Rng, d: usize, tol: &Tolerances64) -> Scenario64 {
    MeasurementScenario::new(
        random_pvm(rng, d, tol),
        random_pvm(rng, d, tol),
        random_pvm(rng, d, tol),
        random_pvm(rng, d, tol),
    )
    .unwrap()
}

/// Random normalized hidden-variable distribution.
pub fn random_c(rng: &mut ChaCha8Rng, d: usize, tol: &Tolerances64) -> HvtDistribution<f64> {
    let n = d * d * d * d;
    let mut raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    for v in &mut raw {
        *v /= total;
    }
    HvtDistribution::new(d, raw, tol).unwrap()
}

pub fn vertex_behavior(s: DeterministicStrategy, d: usize, tol: &Tolerances64) -> Behavior64 {
    marginals_from_c(&strategy_to_c::<f64>(s, d).unwrap(), tol).unwrap()
}

/// Convex mixture of behaviors; weights must be nonnegative and sum to 1.
pub fn mix_behaviors(parts: &[(f64, &Behavior64)], tol: &Tolerances64) -> Behavior64 {
    let d = parts[0].1.d();
    let joints: Vec<JointDistribution<f64>> = SettingPair::ALL
        .iter()
        .map(|&pair| {
            let mut p = vec![0.0f64; d * d];
            for (w, b) in parts {
                let j = b.joint(pair);
                for alpha in 0..d {
                    for beta in 0..d {
                        p[alpha * d + beta] += w * j.get(alpha, beta);
                    }
                }
            }
            JointDistribution::new(d, pair, p, tol).unwrap()
        })
        .collect();
    let [a, b, c, e] = <[JointDistribution<f64>; 4]>::try_from(joints).unwrap();
    BehaviorTable::new([a, b, c, e]).unwrap()
}

/// Random mixture of the 16 deterministic d = 2 vertices.
pub fn random_local_behavior(rng: &mut ChaCha8Rng, d: usize, tol: &Tolerances64) -> Behavior64 {
    let strategies: Vec<DeterministicStrategy> =
        qudit_bell::hvt::enumerate_strategies(d).unwrap().collect();
    let mut weights: Vec<f64> = (0..strategies.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let behaviors: Vec<Behavior64> = strategies
        .iter()
        .map(|&s| vertex_behavior(s, d, tol))
        .collect();
    let parts: Vec<(f64, &Behavior64)> =
        weights.iter().copied().zip(behaviors.iter()).collect();
    mix_behaviors(&parts, tol)
}
