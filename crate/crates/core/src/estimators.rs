//! Plug-in single-trajectory estimators and the identity tester, together
//! with their lazy extensions: simulate `L_α(M)`, estimate, then pull the
//! estimate back to `M`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{self, examples, inf_norm_distance, Distribution, StochasticMatrix};
use crate::config::TOL;
use crate::error::{Error, Result};
use crate::lazy::{self, LazyParams, RowSampler};
use crate::matrix::Matrix;
use crate::projection::project_matrix;
use crate::spectral::{self, DEFAULT_K_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub estimate: StochasticMatrix,
    /// Estimate of `L_α(M)` before the pull-back, extended runs only.
    pub lazy_estimate: Option<StochasticMatrix>,
    pub m_used: usize,
    /// Base-chain steps consumed, extended runs only.
    pub m_act: Option<usize>,
    /// Laziness used; `0` for a direct run.
    pub alpha: f64,
    pub visits: Vec<usize>,
    pub seed: Option<u64>,
}

fn check_states(path: &[usize], d: usize) -> Result<()> {
    match path.iter().find(|&&s| s >= d) {
        Some(&state) => Err(Error::StateOutOfRange { state, d }),
        None => Ok(()),
    }
}

/// Successor counts `N(i,j)`, row-major.
pub fn transition_counts(path: &[usize], d: usize) -> Result<Vec<u64>> {
    check_states(path, d)?;
    let mut counts = vec![0u64; d * d];
    for w in path.windows(2) {
        counts[w[0] * d + w[1]] += 1;
    }
    Ok(counts)
}

pub fn visit_counts(path: &[usize], d: usize) -> Result<Vec<usize>> {
    check_states(path, d)?;
    let mut visits = vec![0; d];
    for &s in path {
        visits[s] += 1;
    }
    Ok(visits)
}

/// Empirical transition matrix. Rows of states with no observed successor
/// default to uniform.
pub fn learn_matrix_direct(path: &[usize], d: usize) -> Result<StochasticMatrix> {
    if path.len() < 2 {
        return Err(Error::PathTooShort {
            len: path.len(),
            min: 2,
        });
    }
    let counts = transition_counts(path, d)?;
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let row = &counts[i * d..(i + 1) * d];
        let total: u64 = row.iter().sum();
        rows.push(if total == 0 {
            vec![1.0 / d as f64; d]
        } else {
            row.iter().map(|&c| c as f64 / total as f64).collect()
        });
    }
    StochasticMatrix::from_rows(&rows)
}

/// The pull-back `g(N) = P(L_α⁻¹(N))`: undo the laziness, then project
/// each row back onto the simplex.
pub fn pull_back(lazy_estimate: &StochasticMatrix, alpha: f64) -> Result<StochasticMatrix> {
    project_matrix(&lazy::unlazy(lazy_estimate, alpha)?)
}

/// One extended learning run driven by a caller-supplied generator.
pub fn learn_extended_with<R: Rng + ?Sized>(
    rows: &RowSampler,
    initial: &RowSampler,
    d: usize,
    alpha: f64,
    m: usize,
    rng: &mut R,
) -> Result<LearnReport> {
    let alpha = LazyParams::new(alpha)?.alpha();
    if m < 2 {
        return Err(Error::BadLength { m, min: 2 });
    }
    let (path, m_act) = lazy::simulate_lazy_with(rows, initial, alpha, m, rng);
    let lazy_estimate = learn_matrix_direct(&path, d)?;
    let estimate = pull_back(&lazy_estimate, alpha)?;
    Ok(LearnReport {
        estimate,
        lazy_estimate: Some(lazy_estimate),
        m_used: m,
        m_act: Some(m_act),
        alpha,
        visits: visit_counts(&path, d)?,
        seed: None,
    })
}

/// `g ∘ θ̂ ∘ L_α`: learns `M` from a simulated trajectory of `L_α(M)`.
pub fn learn_matrix_extended(
    m: &StochasticMatrix,
    mu: &Distribution,
    alpha: f64,
    len: usize,
    seed: u64,
) -> Result<LearnReport> {
    if m.dim() != mu.dim() {
        return Err(Error::ShapeMismatch {
            left: m.dim(),
            right: mu.dim(),
        });
    }
    let mut rng = lazy::trial_rng(seed, 0);
    let mut report = learn_extended_with(
        &RowSampler::new(m),
        &RowSampler::for_distribution(mu),
        m.dim(),
        alpha,
        len,
        &mut rng,
    )?;
    report.seed = Some(seed);
    Ok(report)
}

pub fn learn_direct_report(path: &[usize], d: usize, seed: Option<u64>) -> Result<LearnReport> {
    Ok(LearnReport {
        estimate: learn_matrix_direct(path, d)?,
        lazy_estimate: None,
        m_used: path.len(),
        m_act: None,
        alpha: 0.0,
        visits: visit_counts(path, d)?,
        seed,
    })
}

/// Smallest empirical visit frequency. Laziness leaves `π⋆` unchanged, so
/// the same estimate serves lazy paths with the identity pull-back.
pub fn estimate_pi_star(path: &[usize], d: usize) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::PathTooShort { len: 0, min: 1 });
    }
    let visits = visit_counts(path, d)?;
    if let Some(state) = visits.iter().position(|&v| v == 0) {
        return Err(Error::UnvisitedState { state });
    }
    let min = *visits.iter().min().expect("d > 0");
    Ok(min as f64 / path.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTestReport {
    /// `true` means the tester outputs 1 (reject `M = M̄`).
    pub reject: bool,
    pub statistic: f64,
    pub threshold: f64,
}

impl IdentityTestReport {
    pub fn decision(&self) -> u8 {
        u8::from(self.reject)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::BadEpsilon { eps })
    }
}

/// Plug-in tester: rejects when `‖M̂ − M̄‖∞ > ε/2`.
pub fn identity_test(
    path: &[usize],
    reference: &StochasticMatrix,
    eps: f64,
) -> Result<IdentityTestReport> {
    check_eps(eps)?;
    let estimate = learn_matrix_direct(path, reference.dim())?;
    let statistic = inf_norm_distance(estimate.matrix(), reference.matrix())?;
    let threshold = eps / 2.0;
    Ok(IdentityTestReport {
        reject: statistic > threshold,
        statistic,
        threshold,
    })
}

/// `τ̂ ∘ L_α`: tests a lazy path against `L_α(M̄)` at accuracy `(1−α)ε`.
pub fn identity_test_lazy_path(
    lazy_path: &[usize],
    reference: &StochasticMatrix,
    alpha: f64,
    eps: f64,
) -> Result<IdentityTestReport> {
    check_eps(eps)?;
    let lazy_reference = lazy::lazy(reference, alpha)?;
    identity_test(lazy_path, &lazy_reference, (1.0 - alpha) * eps)
}

pub fn identity_test_extended(
    m: &StochasticMatrix,
    mu: &Distribution,
    reference: &StochasticMatrix,
    alpha: f64,
    eps: f64,
    len: usize,
    seed: u64,
) -> Result<IdentityTestReport> {
    let trajectory = lazy::simulate_lazy(m, mu, alpha, len, seed)?;
    identity_test_lazy_path(&trajectory.states, reference, alpha, eps)
}

/// A parameter `θ` of chains, valued in a metric space `(Θ, ρ)`.
pub trait EstimationProblem {
    type Value;

    fn theta(&self, m: &StochasticMatrix) -> Result<Self::Value>;
    fn rho(&self, a: &Self::Value, b: &Self::Value) -> f64;
    /// Description of the restricted class the problem is posed on.
    fn class_tag(&self) -> String;
}

/// `π⋆` in relative error, `ρ(x, y) = |x/y − 1|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PiStarProblem;

impl EstimationProblem for PiStarProblem {
    type Value = f64;

    fn theta(&self, m: &StochasticMatrix) -> Result<f64> {
        Ok(chain::stationary(m)?.min())
    }

    fn rho(&self, a: &f64, b: &f64) -> f64 {
        (a / b - 1.0).abs()
    }

    fn class_tag(&self) -> String {
        "irreducible chains, pi_star in (0, 1/2]".into()
    }
}

/// The transition matrix itself under `‖·‖∞`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MatrixProblem;

impl EstimationProblem for MatrixProblem {
    type Value = StochasticMatrix;

    fn theta(&self, m: &StochasticMatrix) -> Result<StochasticMatrix> {
        Ok(m.clone())
    }

    fn rho(&self, a: &StochasticMatrix, b: &StochasticMatrix) -> f64 {
        inf_norm_distance(a.matrix(), b.matrix()).unwrap_or(f64::INFINITY)
    }

    fn class_tag(&self) -> String {
        "stochastic matrices under the infinity norm".into()
    }
}

type PullBack<V> = Box<dyn Fn(&V) -> Result<V> + Send + Sync>;
type Budget = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A pull-back `g: Θ → Θ` together with the accuracy budget `ℓ`.
pub struct ExtensionMaps<V> {
    pub g: PullBack<V>,
    pub ell: Budget,
}

impl<V: Clone + 'static> ExtensionMaps<V> {
    pub fn identity() -> Self {
        Self {
            g: Box::new(|x: &V| Ok(x.clone())),
            ell: Box::new(|eps| eps),
        }
    }
}

impl ExtensionMaps<StochasticMatrix> {
    /// `g = P ∘ L_α⁻¹` with `ℓ(ε) = (1−α)ε`.
    pub fn matrix_pull_back(alpha: f64) -> Result<Self> {
        let alpha = LazyParams::new(alpha)?.alpha();
        Ok(Self {
            g: Box::new(move |x| pull_back(x, alpha)),
            ell: Box::new(move |eps| (1.0 - alpha) * eps),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionCheck {
    pub checked: usize,
    /// Samples where `ρ(x, θ(L_α(M))) < ℓ(ε)` held.
    pub premise_held: usize,
    /// Indices of samples where the premise held but `ρ(g(x), θ(M)) < ε` failed.
    pub violations: Vec<usize>,
}

impl ExtensionCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `ρ(x, θ(L_α(M))) < ℓ(ε) ⇒ ρ(g(x), θ(M)) < ε` on every sample
/// `(x, M, ε)`. A sample whose evaluation errors counts as a violation.
pub fn check_extension_condition<P: EstimationProblem>(
    problem: &P,
    maps: &ExtensionMaps<P::Value>,
    alpha: f64,
    samples: &[(P::Value, StochasticMatrix, f64)],
) -> Result<ExtensionCheck> {
    let mut check = ExtensionCheck {
        checked: samples.len(),
        premise_held: 0,
        violations: vec![],
    };
    for (idx, (x, m, eps)) in samples.iter().enumerate() {
        let outcome = (|| -> Result<Option<bool>> {
            let lazy_theta = problem.theta(&lazy::lazy(m, alpha)?)?;
            if problem.rho(x, &lazy_theta) >= (maps.ell)(*eps) {
                return Ok(None);
            }
            let pulled = (maps.g)(x)?;
            Ok(Some(problem.rho(&pulled, &problem.theta(m)?) < *eps))
        })();
        match outcome {
            Ok(None) => {}
            Ok(Some(true)) => check.premise_held += 1,
            Ok(Some(false)) | Err(_) => {
                check.premise_held += 1;
                check.violations.push(idx);
            }
        }
    }
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityCheck {
    pub quantity: String,
    pub got: f64,
    pub expected: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub checks: Vec<QuantityCheck>,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

/// Two reversible chains whose 0.5-lazy versions share a pseudo spectral
/// gap while the chains themselves do not, so no continuous pull-back can
/// recover `γ_ps` from the lazy version.
pub fn counterexample_values() -> Result<CounterexampleReport> {
    let tol = TOL.spectral;
    let m1 = examples::m1();
    let m2 = examples::m2();
    let l1 = lazy::lazy(&m1, 0.5)?;
    let l2 = lazy::lazy(&m2, 0.5)?;
    let mut checks = Vec::new();
    let mut push = |quantity: String, got: f64, expected: f64| {
        checks.push(QuantityCheck {
            ok: (got - expected).abs() <= tol,
            quantity,
            got,
            expected,
        });
    };
    let gps =
        |m: &StochasticMatrix| spectral::pseudo_spectral_gap(m, DEFAULT_K_CAP).map(|g| g.value);
    push("gamma_ps(L_0.5(M1))".into(), gps(&l1)?, 0.75);
    push("gamma_ps(L_0.5(M2))".into(), gps(&l2)?, 0.75);
    push("gamma_ps(M1)".into(), gps(&m1)?, 0.0);
    push("gamma_ps(M2)".into(), gps(&m2)?, 1.0);
    let pi1 = chain::stationary(&m1)?;
    let pi2 = chain::stationary(&m2)?;
    for (i, want) in [0.25, 0.5, 0.25].into_iter().enumerate() {
        push(format!("pi1[{i}]"), pi1[i], want);
    }
    for (i, want) in [0.5, 0.2, 0.3].into_iter().enumerate() {
        push(format!("pi2[{i}]"), pi2[i], want);
    }
    let q1_want = Matrix::from_rows(&[[0.0, 0.25, 0.0], [0.25, 0.0, 0.25], [0.0, 0.25, 0.0]])?;
    let q2_want = Matrix::from_rows(&[[0.25, 0.1, 0.15], [0.1, 0.04, 0.06], [0.15, 0.06, 0.09]])?;
    let q1 = chain::edge_measure(&m1)?;
    let q2 = chain::edge_measure(&m2)?;
    push(
        "max |Q1 - displayed|".into(),
        q1.sub(&q1_want).max_abs(),
        0.0,
    );
    push(
        "max |Q2 - displayed|".into(),
        q2.sub(&q2_want).max_abs(),
        0.0,
    );
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    push(
        "reversible(M1)".into(),
        flag(chain::is_reversible(&m1)?),
        1.0,
    );
    push(
        "reversible(M2)".into(),
        flag(chain::is_reversible(&m2)?),
        1.0,
    );
    push(
        "reversible(L_0.5(M1))".into(),
        flag(chain::is_reversible(&l1)?),
        1.0,
    );
    push(
        "reversible(L_0.5(M2))".into(),
        flag(chain::is_reversible(&l2)?),
        1.0,
    );
    Ok(CounterexampleReport { checks })
}

/// Like [`counterexample_values`], but any mismatch is an error.
pub fn counterexample_report() -> Result<CounterexampleReport> {
    let report = counterexample_values()?;
    if let Some(bad) = report.checks.iter().find(|c| !c.ok) {
        return Err(Error::CounterexampleMismatch {
            quantity: bad.quantity.clone(),
            got: bad.got,
            expected: bad.expected,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::examples::*;

    #[test]
    fn direct_learner_examples() {
        let est = learn_matrix_direct(&[0, 1, 0, 1, 0], 2).unwrap();
        assert_eq!(est, swap());
        let est = learn_matrix_direct(&[0, 0, 0], 2).unwrap();
        assert_eq!(est.row(0), &[1.0, 0.0]);
        assert_eq!(est.row(1), &[0.5, 0.5]);
        assert!(matches!(
            learn_matrix_direct(&[0], 2),
            Err(Error::PathTooShort { .. })
        ));
        assert!(matches!(
            learn_matrix_direct(&[0, 2], 2),
            Err(Error::StateOutOfRange { state: 2, d: 2 })
        ));
    }

    #[test]
    fn pi_star_examples() {
        assert_eq!(estimate_pi_star(&[0, 1, 0, 1], 2), Ok(0.5));
        assert_eq!(
            estimate_pi_star(&[0, 0, 2], 3),
            Err(Error::UnvisitedState { state: 1 })
        );
    }

    #[test]
    fn tester_thresholds_at_half_eps() {
        let path = [0, 1, 0, 1, 0];
        let r = identity_test(&path, &swap(), 0.5).unwrap();
        assert!(!r.reject && r.statistic == 0.0 && r.threshold == 0.25);
        let r = identity_test(&path, &StochasticMatrix::identity(2), 0.5).unwrap();
        assert!(r.reject);
        assert_eq!(r.decision(), 1);
        assert!(matches!(
            identity_test(&path, &swap(), 1.0),
            Err(Error::BadEpsilon { .. })
        ));
    }

    #[test]
    fn extension_condition_on_named_maps() {
        let alpha = 0.5;
        let problem = PiStarProblem;
        let m = m1();
        let samples: Vec<_> = [0.2, 0.24, 0.25, 0.26, 0.3, 0.4]
            .into_iter()
            .map(|x| (x, m.clone(), 0.1))
            .collect();
        let check =
            check_extension_condition(&problem, &ExtensionMaps::identity(), alpha, &samples)
                .unwrap();
        assert!(check.passed());
        assert!(check.premise_held >= 3);

        let broken = ExtensionMaps {
            g: Box::new(|_: &f64| Ok(0.45)),
            ell: Box::new(|e| e),
        };
        let check = check_extension_condition(&problem, &broken, alpha, &samples).unwrap();
        assert!(!check.passed());
    }

    #[test]
    fn counterexample_recomputes() {
        let r = counterexample_report().unwrap();
        assert!(r.passed());
        assert_eq!(r.checks.len(), 16);
    }

    #[test]
    fn pull_back_inverts_lazy_exactly_in_range() {
        let l = lazy::lazy(&m1(), 0.5).unwrap();
        let back = pull_back(&l, 0.5).unwrap();
        assert!(inf_norm_distance(back.matrix(), m1().matrix()).unwrap() < 1e-12);
    }
}
