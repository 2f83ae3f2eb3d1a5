//! Classical hidden-variable machinery: the fundamental four-observable
//! distribution C(j,k,l,m), its marginals, local models, no-signaling
//! checks, deterministic-strategy enumeration and the two LP membership
//! tests whose agreement is Fine's theorem.

use crate::error::{Error, Result};
use crate::scalar::{kahan_sum, Scalar, Tolerances};
use crate::sequences::{Setting, SettingPair};
use crate::simplex::{LpProblem, Relation};

/// Enumeration guard for deterministic strategies and LP columns.
pub const MIN_D: usize = 2;
pub const MAX_D: usize = 8;

const LP_MAX_ITERATIONS: usize = 200_000;

fn check_d(d: usize) -> Result<()> {
    if !(MIN_D..=MAX_D).contains(&d) {
        return Err(Error::OutcomeCountOutOfRange { d, min: MIN_D, max: MAX_D });
    }
    Ok(())
}

/// The fundamental probability table C(j,k,l,m) over simultaneous outcomes
/// of all four observables. Index order (j, k, l, m) = (A1, A2, B1, B2).
#[derive(Debug, Clone)]
pub struct HvtDistribution<F> {
    d: usize,
    c: Vec<F>,
}

impl<F: Scalar> HvtDistribution<F> {
    /// Validates entry positivity (clamping tiny negatives) and
    /// normalization.
    pub fn new(d: usize, c: Vec<F>, tol: &Tolerances<F>) -> Result<Self> {
        if d < 2 {
            return Err(Error::OutcomeCountOutOfRange { d, min: 2, max: usize::MAX });
        }
        if c.len() != d * d * d * d {
            return Err(Error::DimensionMismatch { expected: d * d * d * d, actual: c.len() });
        }
        let mut c = c;
        for v in &mut c {
            if *v < F::zero() {
                if *v < -tol.zero_prob {
                    return Err(Error::InvalidInput(format!("negative entry {v} in C")));
                }
                *v = F::zero();
            }
        }
        let total = kahan_sum(c.iter().copied());
        if (total - F::one()).abs() > tol.normalization {
            return Err(Error::InvalidInput(format!("C sums to {total}, not 1")));
        }
        Ok(HvtDistribution { d, c })
    }

    pub fn uniform(d: usize) -> Self {
        let n = d * d * d * d;
        HvtDistribution { d, c: vec![F::of_usize(n).recip(); n] }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize, l: usize, m: usize) -> usize {
        ((j * self.d + k) * self.d + l) * self.d + m
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize, l: usize, m: usize) -> F {
        self.c[self.index(j, k, l, m)]
    }

    pub fn entries(&self) -> &[F] {
        &self.c
    }
}

/// d x d outcome table for one setting pair, row index = A outcome.
#[derive(Debug, Clone)]
pub struct JointDistribution<F> {
    d: usize,
    setting: SettingPair,
    p: Vec<F>,
}

impl<F: Scalar> JointDistribution<F> {
    pub fn new(d: usize, setting: SettingPair, p: Vec<F>, tol: &Tolerances<F>) -> Result<Self> {
        if p.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, actual: p.len() });
        }
        for v in &p {
            if *v < -tol.zero_prob {
                return Err(Error::InvalidInput(format!("negative probability {v}")));
            }
        }
        let total = kahan_sum(p.iter().copied());
        if (total - F::one()).abs() > tol.normalization {
            return Err(Error::InvalidInput(format!(
                "joint table for {} sums to {total}",
                setting.label()
            )));
        }
        let p = p.into_iter().map(|v| v.max(F::zero())).collect();
        Ok(JointDistribution { d, setting, p })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn setting(&self) -> SettingPair {
        self.setting
    }

    #[inline]
    pub fn get(&self, alpha: usize, beta: usize) -> F {
        self.p[alpha * self.d + beta]
    }

    pub fn entries(&self) -> &[F] {
        &self.p
    }

    /// Marginal over the B outcome: P(alpha | A_a).
    pub fn marginal_a(&self, alpha: usize) -> F {
        kahan_sum((0..self.d).map(|beta| self.get(alpha, beta)))
    }

    /// Marginal over the A outcome: P(beta | B_b).
    pub fn marginal_b(&self, beta: usize) -> F {
        kahan_sum((0..self.d).map(|alpha| self.get(alpha, beta)))
    }
}

/// The four joint outcome tables, one per setting pair. No-signaling is
/// not assumed; [`no_signaling_check`] tests it.
#[derive(Debug, Clone)]
pub struct BehaviorTable<F> {
    d: usize,
    joints: [JointDistribution<F>; 4],
}

impl<F: Scalar> BehaviorTable<F> {
    pub fn new(joints: [JointDistribution<F>; 4]) -> Result<Self> {
        let d = joints[0].d;
        for (expected, j) in SettingPair::ALL.iter().zip(&joints) {
            if j.d != d {
                return Err(Error::DimensionMismatch { expected: d, actual: j.d });
            }
            if j.setting != *expected {
                return Err(Error::InvalidInput(format!(
                    "joint tables must be ordered A1B1, A1B2, A2B1, A2B2; found {}",
                    j.setting.label()
                )));
            }
        }
        Ok(BehaviorTable { d, joints })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn joint(&self, setting: SettingPair) -> &JointDistribution<F> {
        let idx = SettingPair::ALL.iter().position(|s| *s == setting).expect("covered");
        &self.joints[idx]
    }

    pub fn joints(&self) -> &[JointDistribution<F>; 4] {
        &self.joints
    }

    /// Flattened entry vector in the fixed order used by the LP columns:
    /// setting pairs in `SettingPair::ALL` order, each table row-major.
    pub fn flatten(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(4 * self.d * self.d);
        for j in &self.joints {
            out.extend_from_slice(&j.p);
        }
        out
    }

    /// Largest entrywise absolute difference against another behavior.
    pub fn max_abs_diff(&self, other: &BehaviorTable<F>) -> Result<F> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, actual: other.d });
        }
        let mut worst = F::zero();
        for (a, b) in self.flatten().iter().zip(other.flatten()) {
            worst = worst.max((*a - b).abs());
        }
        Ok(worst)
    }
}

/// Hidden-variable mixture with per-lambda single-side response tables.
#[derive(Debug, Clone)]
pub struct LocalModel<F> {
    /// P(lambda) for each hidden-variable value.
    pub weights: Vec<F>,
    /// Per lambda: P(alpha | A_1, lambda) over d outcomes.
    pub responses_a1: Vec<Vec<F>>,
    pub responses_a2: Vec<Vec<F>>,
    pub responses_b1: Vec<Vec<F>>,
    pub responses_b2: Vec<Vec<F>>,
}

impl<F: Scalar> LocalModel<F> {
    pub fn num_lambdas(&self) -> usize {
        self.weights.len()
    }

    pub fn d(&self) -> usize {
        self.responses_a1.first().map_or(0, |r| r.len())
    }

    fn response_a(&self, setting: Setting) -> &[Vec<F>] {
        match setting {
            Setting::One => &self.responses_a1,
            Setting::Two => &self.responses_a2,
        }
    }

    fn response_b(&self, setting: Setting) -> &[Vec<F>] {
        match setting {
            Setting::One => &self.responses_b1,
            Setting::Two => &self.responses_b2,
        }
    }

    pub fn validate(&self, tol: &Tolerances<F>) -> Result<()> {
        let n = self.weights.len();
        let d = self.d();
        let total = kahan_sum(self.weights.iter().copied());
        if (total - F::one()).abs() > tol.normalization {
            return Err(Error::InvalidInput(format!("lambda weights sum to {total}")));
        }
        for tables in [&self.responses_a1, &self.responses_a2, &self.responses_b1, &self.responses_b2] {
            if tables.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: tables.len() });
            }
            for t in tables {
                if t.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, actual: t.len() });
                }
                if t.iter().any(|v| *v < -tol.zero_prob) {
                    return Err(Error::InvalidInput("negative response probability".into()));
                }
                let s = kahan_sum(t.iter().copied());
                if (s - F::one()).abs() > tol.normalization {
                    return Err(Error::InvalidInput(format!("response table sums to {s}")));
                }
            }
        }
        Ok(())
    }
}

/// One deterministic assignment of outcomes to all four observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
}

impl DeterministicStrategy {
    /// Outcome assigned to the A-side observable of the given setting.
    pub fn outcome_a(&self, setting: Setting) -> usize {
        match setting {
            Setting::One => self.j,
            Setting::Two => self.k,
        }
    }

    pub fn outcome_b(&self, setting: Setting) -> usize {
        match setting {
            Setting::One => self.l,
            Setting::Two => self.m,
        }
    }
}

/// All d^4 deterministic strategies in lexicographic (j, k, l, m) order.
pub fn enumerate_strategies(d: usize) -> Result<impl Iterator<Item = DeterministicStrategy>> {
    check_d(d)?;
    Ok((0..d * d * d * d).map(move |idx| {
        let m = idx % d;
        let l = (idx / d) % d;
        let k = (idx / (d * d)) % d;
        let j = idx / (d * d * d);
        DeterministicStrategy { j, k, l, m }
    }))
}

/// Delta table at (j, k, l, m).
pub fn strategy_to_c<F: Scalar>(s: DeterministicStrategy, d: usize) -> Result<HvtDistribution<F>> {
    check_d(d)?;
    for out in [s.j, s.k, s.l, s.m] {
        if out >= d {
            return Err(Error::InvalidInput(format!("outcome {out} out of range for d={d}")));
        }
    }
    let mut c = vec![F::zero(); d * d * d * d];
    let idx = ((s.j * d + s.k) * d + s.l) * d + s.m;
    c[idx] = F::one();
    Ok(HvtDistribution { d, c })
}

/// Sums out the complementary index pair for each of the four settings.
pub fn marginals_from_c<F: Scalar>(c: &HvtDistribution<F>, tol: &Tolerances<F>) -> Result<BehaviorTable<F>> {
    let d = c.d;
    let mut joints = Vec::with_capacity(4);
    for pair in SettingPair::ALL {
        let mut p = vec![F::zero(); d * d];
        for (alpha, row) in p.chunks_mut(d).enumerate() {
            for (beta, slot) in row.iter_mut().enumerate() {
                let mut terms = Vec::with_capacity(d * d);
                for other_a in 0..d {
                    for other_b in 0..d {
                        let (j, k) = match pair.a {
                            Setting::One => (alpha, other_a),
                            Setting::Two => (other_a, alpha),
                        };
                        let (l, m) = match pair.b {
                            Setting::One => (beta, other_b),
                            Setting::Two => (other_b, beta),
                        };
                        terms.push(c.get(j, k, l, m));
                    }
                }
                *slot = kahan_sum(terms);
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

/// C(j,k,l,m) = sum_lambda P(lambda) P(j|A1) P(k|A2) P(l|B1) P(m|B2).
pub fn local_model_to_c<F: Scalar>(model: &LocalModel<F>, tol: &Tolerances<F>) -> Result<HvtDistribution<F>> {
    model.validate(tol)?;
    let d = model.d();
    let n = d * d * d * d;
    let mut c = vec![F::zero(); n];
    for lam in 0..model.num_lambdas() {
        let w = model.weights[lam];
        if w == F::zero() {
            continue;
        }
        for j in 0..d {
            let pj = model.responses_a1[lam][j];
            for k in 0..d {
                let pk = model.responses_a2[lam][k];
                for l in 0..d {
                    let pl = model.responses_b1[lam][l];
                    for m in 0..d {
                        let pm = model.responses_b2[lam][m];
                        c[((j * d + k) * d + l) * d + m] += w * pj * pk * pl * pm;
                    }
                }
            }
        }
    }
    HvtDistribution::new(d, c, tol)
}

/// P(alpha, beta | A_a, B_b) = sum_lambda P(lambda) P(alpha|A_a) P(beta|B_b).
pub fn behavior_from_local_model<F: Scalar>(
    model: &LocalModel<F>,
    tol: &Tolerances<F>,
) -> Result<BehaviorTable<F>> {
    model.validate(tol)?;
    let d = model.d();
    let mut joints = Vec::with_capacity(4);
    for pair in SettingPair::ALL {
        let ra = model.response_a(pair.a);
        let rb = model.response_b(pair.b);
        let mut p = vec![F::zero(); d * d];
        for lam in 0..model.num_lambdas() {
            let w = model.weights[lam];
            for alpha in 0..d {
                for beta in 0..d {
                    p[alpha * d + beta] += w * ra[lam][alpha] * rb[lam][beta];
                }
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

/// Result of the no-signaling marginal comparison.
#[derive(Debug, Clone)]
pub struct NoSignalingReport<F> {
    pub max_discrepancy: F,
    /// Human-readable description of the worst offending marginal.
    pub worst: String,
    pub passed: bool,
}

/// Compares each side's marginals across the other side's setting choice.
pub fn no_signaling_check<F: Scalar>(b: &BehaviorTable<F>, tol: &Tolerances<F>) -> NoSignalingReport<F> {
    let d = b.d;
    let mut max_discrepancy = F::zero();
    let mut worst = String::from("none");
    // A-side: P(alpha | A_a) from B setting 1 vs 2.
    for a in [Setting::One, Setting::Two] {
        let j1 = b.joint(SettingPair { a, b: Setting::One });
        let j2 = b.joint(SettingPair { a, b: Setting::Two });
        for alpha in 0..d {
            let diff = (j1.marginal_a(alpha) - j2.marginal_a(alpha)).abs();
            if diff > max_discrepancy {
                max_discrepancy = diff;
                worst = format!("P(alpha={alpha} | A{}) across B settings", a.label());
            }
        }
    }
    // B-side: P(beta | B_b) from A setting 1 vs 2.
    for bb in [Setting::One, Setting::Two] {
        let j1 = b.joint(SettingPair { a: Setting::One, b: bb });
        let j2 = b.joint(SettingPair { a: Setting::Two, b: bb });
        for beta in 0..d {
            let diff = (j1.marginal_b(beta) - j2.marginal_b(beta)).abs();
            if diff > max_discrepancy {
                max_discrepancy = diff;
                worst = format!("P(beta={beta} | B{}) across A settings", bb.label());
            }
        }
    }
    NoSignalingReport {
        max_discrepancy,
        worst,
        passed: max_discrepancy <= tol.no_signaling,
    }
}

/// Verdict of an LP membership test. The margin is the minimized
/// L-infinity reproduction error.
#[derive(Debug, Clone)]
pub enum Membership<T, F> {
    Feasible { certificate: T, reproduction_error: F },
    Infeasible { margin: F },
}

impl<T, F> Membership<T, F> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Membership::Feasible { .. })
    }
}

/// Behavior entry of a deterministic strategy at a flattened entry index,
/// matching [`BehaviorTable::flatten`] ordering.
fn strategy_behavior_entry(s: DeterministicStrategy, d: usize, entry: usize) -> bool {
    let per_table = d * d;
    let table = entry / per_table;
    let within = entry % per_table;
    let (alpha, beta) = (within / d, within % d);
    let pair = SettingPair::ALL[table];
    s.outcome_a(pair.a) == alpha && s.outcome_b(pair.b) == beta
}

fn require_no_signaling<F: Scalar>(b: &BehaviorTable<F>, tol: &Tolerances<F>) -> Result<()> {
    let report = no_signaling_check(b, tol);
    if !report.passed {
        return Err(Error::SignalingBehavior {
            discrepancy: report.max_discrepancy.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Fine's-theorem membership test: finds nonnegative weights over the d^4
/// deterministic strategies whose mixture reproduces the behavior within
/// the L-infinity tolerance, by minimizing the worst reproduction error.
pub fn fine_membership<F: Scalar>(
    b: &BehaviorTable<F>,
    tol: &Tolerances<F>,
) -> Result<Membership<LocalModel<F>, F>> {
    require_no_signaling(b, tol)?;
    let d = b.d;
    check_d(d)?;
    let strategies: Vec<DeterministicStrategy> = enumerate_strategies(d)?.collect();
    let n = strategies.len();
    let target = b.flatten();

    // Variables: w_0..w_{n-1}, then t (the L-infinity error bound).
    let mut objective = vec![F::zero(); n + 1];
    objective[n] = F::one();
    let mut lp = LpProblem::new(n + 1, objective);
    for (e, &value) in target.iter().enumerate() {
        let mut upper = vec![F::zero(); n + 1];
        let mut lower = vec![F::zero(); n + 1];
        for (s_idx, &s) in strategies.iter().enumerate() {
            if strategy_behavior_entry(s, d, e) {
                upper[s_idx] = F::one();
                lower[s_idx] = -F::one();
            }
        }
        upper[n] = -F::one();
        lower[n] = -F::one();
        lp.add_row(upper, Relation::Le, value);
        lp.add_row(lower, Relation::Le, -value);
    }
    let mut normalization = vec![F::one(); n + 1];
    normalization[n] = F::zero();
    lp.add_row(normalization, Relation::Eq, F::one());

    let solution = lp.solve(LP_MAX_ITERATIONS).map_err(|e| match e {
        Error::LpInconclusive { .. } => Error::LpInconclusive { iterations: LP_MAX_ITERATIONS },
        other => other,
    })?;

    // Rebuild the model from the support and re-measure the error directly;
    // the verdict is based on the recomputed error, not the raw LP value.
    let support: Vec<(DeterministicStrategy, F)> = strategies
        .iter()
        .zip(&solution.x[..n])
        .filter(|(_, &w)| w > tol.zero_prob)
        .map(|(&s, &w)| (s, w))
        .collect();
    let total: F = kahan_sum(support.iter().map(|(_, w)| *w));
    let model = LocalModel {
        weights: support.iter().map(|(_, w)| *w / total).collect(),
        responses_a1: support.iter().map(|(s, _)| delta_response(d, s.j)).collect(),
        responses_a2: support.iter().map(|(s, _)| delta_response(d, s.k)).collect(),
        responses_b1: support.iter().map(|(s, _)| delta_response(d, s.l)).collect(),
        responses_b2: support.iter().map(|(s, _)| delta_response(d, s.m)).collect(),
    };
    let reproduced = behavior_from_local_model(&model, tol)?;
    let err = b.max_abs_diff(&reproduced)?;
    if err <= tol.behavior_eq {
        Ok(Membership::Feasible { certificate: model, reproduction_error: err })
    } else {
        Ok(Membership::Infeasible { margin: solution.objective.max(F::zero()) })
    }
}

fn delta_response<F: Scalar>(d: usize, outcome: usize) -> Vec<F> {
    let mut r = vec![F::zero(); d];
    r[outcome] = F::one();
    r
}

/// Non-local-form reconstruction: looks for any C(j,k,l,m) >= 0 summing to
/// one whose four marginals reproduce the behavior. By Fine's theorem this
/// must agree with [`fine_membership`] on feasibility.
pub fn c_reconstruction_test<F: Scalar>(
    b: &BehaviorTable<F>,
    tol: &Tolerances<F>,
) -> Result<Membership<HvtDistribution<F>, F>> {
    require_no_signaling(b, tol)?;
    let d = b.d;
    check_d(d)?;
    let n = d * d * d * d;
    let target = b.flatten();

    // Variables: C entries then t.
    let mut objective = vec![F::zero(); n + 1];
    objective[n] = F::one();
    let mut lp = LpProblem::new(n + 1, objective);
    for (e, &value) in target.iter().enumerate() {
        let per_table = d * d;
        let pair = SettingPair::ALL[e / per_table];
        let within = e % per_table;
        let (alpha, beta) = (within / d, within % d);
        let mut upper = vec![F::zero(); n + 1];
        let mut lower = vec![F::zero(); n + 1];
        for idx in 0..n {
            let m = idx % d;
            let l = (idx / d) % d;
            let k = (idx / (d * d)) % d;
            let j = idx / (d * d * d);
            let s = DeterministicStrategy { j, k, l, m };
            if s.outcome_a(pair.a) == alpha && s.outcome_b(pair.b) == beta {
                upper[idx] = F::one();
                lower[idx] = -F::one();
            }
        }
        upper[n] = -F::one();
        lower[n] = -F::one();
        lp.add_row(upper, Relation::Le, value);
        lp.add_row(lower, Relation::Le, -value);
    }
    let mut normalization = vec![F::one(); n + 1];
    normalization[n] = F::zero();
    lp.add_row(normalization, Relation::Eq, F::one());

    let solution = lp.solve(LP_MAX_ITERATIONS).map_err(|e| match e {
        Error::LpInconclusive { .. } => Error::LpInconclusive { iterations: LP_MAX_ITERATIONS },
        other => other,
    })?;

    let raw: Vec<F> = solution.x[..n].iter().map(|&v| v.max(F::zero())).collect();
    let total = kahan_sum(raw.iter().copied());
    let c = HvtDistribution { d, c: raw.iter().map(|&v| v / total).collect() };
    let reproduced = marginals_from_c(&c, tol)?;
    let err = b.max_abs_diff(&reproduced)?;
    if err <= tol.behavior_eq {
        Ok(Membership::Feasible { certificate: c, reproduction_error: err })
    } else {
        Ok(Membership::Infeasible { margin: solution.objective.max(F::zero()) })
    }
}
