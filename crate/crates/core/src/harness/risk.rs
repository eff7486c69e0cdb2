use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TaggedChain;
use crate::chain::{self, inf_norm_distance, Distribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::estimators;
use crate::lazy::{self, LazyParams, RowSampler};

/// Which estimator a risk experiment runs. Paths start from the uniform law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorConfig {
    /// Returns the true matrix; a control with zero risk.
    Oracle,
    MatrixDirect,
    MatrixExtended {
        alpha: f64,
    },
    PiStarDirect,
    PiStarExtended {
        alpha: f64,
    },
}

impl EstimatorConfig {
    fn alpha(&self) -> Option<f64> {
        match *self {
            EstimatorConfig::MatrixExtended { alpha }
            | EstimatorConfig::PiStarExtended { alpha } => Some(alpha),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BudgetTally {
    /// Trials where the lazy-stage error was below `(1−α)ε`.
    pub premise_held: u64,
    /// Of those, trials whose pulled-back error was not below `ε`.
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRisk {
    pub tag: String,
    pub failures: u64,
    pub risk: f64,
    /// Trials where the estimator itself returned an error.
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub m: usize,
    pub eps: f64,
    pub trials: u64,
    pub worst_chain_tag: String,
    pub empirical_risk: f64,
    pub ci95: [f64; 2],
    pub per_chain: Vec<ChainRisk>,
    pub budget_law: Option<BudgetTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexityCurve {
    pub eps: f64,
    pub delta: f64,
    pub grid: Vec<usize>,
    pub risks: Vec<f64>,
    pub worst_tags: Vec<String>,
    pub m0_hat: Option<usize>,
    /// Budget-law tally summed over every grid point.
    pub budget_law: Option<BudgetTally>,
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> [f64; 2] {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    [
        (centre - half).max(0.0).min(p),
        (centre + half).min(1.0).max(p),
    ]
}

#[derive(Default, Clone, Copy)]
struct Tally {
    failures: u64,
    errors: u64,
    budget: BudgetTally,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            failures: self.failures + o.failures,
            errors: self.errors + o.errors,
            budget: BudgetTally {
                premise_held: self.budget.premise_held + o.budget.premise_held,
                violations: self.budget.violations + o.budget.violations,
            },
        }
    }
}

struct Prepared<'a> {
    chain: &'a StochasticMatrix,
    rows: RowSampler,
    initial: RowSampler,
    lazy_chain: Option<StochasticMatrix>,
    pi_star: Option<f64>,
}

fn prepare<'a>(est: &EstimatorConfig, c: &'a TaggedChain) -> Result<Prepared<'a>> {
    let d = c.chain.dim();
    let lazy_chain = est.alpha().map(|a| lazy::lazy(&c.chain, a)).transpose()?;
    let pi_star = match est {
        EstimatorConfig::PiStarDirect | EstimatorConfig::PiStarExtended { .. } => {
            Some(chain::stationary(&c.chain)?.min())
        }
        _ => None,
    };
    Ok(Prepared {
        chain: &c.chain,
        rows: RowSampler::new(&c.chain),
        initial: RowSampler::for_distribution(&Distribution::uniform(d)),
        lazy_chain,
        pi_star,
    })
}

fn run_trial(
    est: &EstimatorConfig,
    p: &Prepared,
    m: usize,
    eps: f64,
    seed: u64,
    stream: u64,
) -> Tally {
    let mut rng = lazy::trial_rng(seed, stream);
    let d = p.chain.dim();
    let mut tally = Tally::default();
    let outcome: Result<f64> = match *est {
        EstimatorConfig::Oracle => Ok(0.0),
        EstimatorConfig::MatrixDirect => {
            let path = lazy::simulate_with(&p.rows, &p.initial, m, &mut rng);
            estimators::learn_matrix_direct(&path, d)
                .and_then(|e| inf_norm_distance(e.matrix(), p.chain.matrix()))
        }
        EstimatorConfig::MatrixExtended { alpha } => estimators::learn_extended_with(
            &p.rows, &p.initial, d, alpha, m, &mut rng,
        )
        .and_then(|report| {
            let err = inf_norm_distance(report.estimate.matrix(), p.chain.matrix())?;
            let lazy_est = report.lazy_estimate.as_ref().expect("extended run");
            let lazy_chain = p.lazy_chain.as_ref().expect("prepared");
            let lazy_err = inf_norm_distance(lazy_est.matrix(), lazy_chain.matrix())?;
            if lazy_err < (1.0 - alpha) * eps {
                tally.budget.premise_held += 1;
                if err >= eps {
                    tally.budget.violations += 1;
                }
            }
            Ok(err)
        }),
        EstimatorConfig::PiStarDirect | EstimatorConfig::PiStarExtended { .. } => {
            let path = match est.alpha() {
                Some(alpha) => lazy::simulate_lazy_with(&p.rows, &p.initial, alpha, m, &mut rng).0,
                None => lazy::simulate_with(&p.rows, &p.initial, m, &mut rng),
            };
            let truth = p.pi_star.expect("prepared");
            estimators::estimate_pi_star(&path, d).map(|x| (x / truth - 1.0).abs())
        }
    };
    match outcome {
        Ok(err) if err < eps => {}
        Ok(_) => tally.failures += 1,
        Err(_) => {
            tally.failures += 1;
            tally.errors += 1;
        }
    }
    tally
}

fn check_common(family: &[TaggedChain], trials: u64, est: &EstimatorConfig) -> Result<()> {
    if family.is_empty() {
        return Err(Error::BadSpec("empty chain family".into()));
    }
    if trials == 0 {
        return Err(Error::BadSpec("trials must be at least 1".into()));
    }
    if let Some(alpha) = est.alpha() {
        LazyParams::new(alpha)?;
    }
    Ok(())
}

/// `max over the family of P(ρ(θ̂_m(M), θ(M)) ≥ ε)`, estimated from `trials`
/// seeded runs per chain. Estimator errors count as failures.
pub fn empirical_risk(
    estimator: &EstimatorConfig,
    family: &[TaggedChain],
    m: usize,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<RiskReport> {
    check_common(family, trials, estimator)?;
    let mut per_chain = Vec::with_capacity(family.len());
    let mut budget = BudgetTally::default();
    for (c_idx, c) in family.iter().enumerate() {
        let prepared = prepare(estimator, c)?;
        let tally = (0..trials)
            .into_par_iter()
            .map(|t| {
                run_trial(
                    estimator,
                    &prepared,
                    m,
                    eps,
                    seed,
                    ((c_idx as u64) << 32) | t,
                )
            })
            .reduce(Tally::default, Tally::merge);
        budget.premise_held += tally.budget.premise_held;
        budget.violations += tally.budget.violations;
        per_chain.push(ChainRisk {
            tag: c.tag.clone(),
            failures: tally.failures,
            risk: tally.failures as f64 / trials as f64,
            errors: tally.errors,
        });
    }
    // First chain attaining the maximum.
    let worst = per_chain.iter().enumerate().fold(0, |best, (i, c)| {
        if c.failures > per_chain[best].failures {
            i
        } else {
            best
        }
    });
    Ok(RiskReport {
        m,
        eps,
        trials,
        worst_chain_tag: per_chain[worst].tag.clone(),
        empirical_risk: per_chain[worst].risk,
        ci95: wilson_interval(per_chain[worst].failures, trials, 1.959_963_984_540_054),
        budget_law: matches!(estimator, EstimatorConfig::MatrixExtended { .. }).then_some(budget),
        per_chain,
    })
}

/// Risk at each grid length and the first length whose risk is below `delta`.
pub fn empirical_sample_complexity(
    estimator: &EstimatorConfig,
    family: &[TaggedChain],
    eps: f64,
    delta: f64,
    m_grid: &[usize],
    trials: u64,
    seed: u64,
) -> Result<SampleComplexityCurve> {
    if m_grid.is_empty() {
        return Err(Error::BadGrid("empty length grid".into()));
    }
    if m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadGrid(
            "length grid must be strictly increasing".into(),
        ));
    }
    let mut risks = Vec::with_capacity(m_grid.len());
    let mut worst_tags = Vec::with_capacity(m_grid.len());
    let mut budget_law: Option<BudgetTally> = None;
    for (g, &m) in m_grid.iter().enumerate() {
        let report = empirical_risk(
            estimator,
            family,
            m,
            eps,
            trials,
            seed.wrapping_add(g as u64),
        )?;
        risks.push(report.empirical_risk);
        worst_tags.push(report.worst_chain_tag);
        if let Some(b) = report.budget_law {
            let total = budget_law.get_or_insert_with(BudgetTally::default);
            total.premise_held += b.premise_held;
            total.violations += b.violations;
        }
    }
    let m0_hat = m_grid
        .iter()
        .zip(&risks)
        .find(|(_, &r)| r < delta)
        .map(|(&m, _)| m);
    Ok(SampleComplexityCurve {
        eps,
        delta,
        grid: m_grid.to_vec(),
        risks,
        worst_tags,
        m0_hat,
        budget_law,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::examples::*;

    fn fam(m: StochasticMatrix) -> Vec<TaggedChain> {
        vec![TaggedChain::new("chain", m)]
    }

    #[test]
    fn oracle_has_zero_risk() {
        let family = fam(m2());
        let r = empirical_risk(&EstimatorConfig::Oracle, &family, 10, 0.1, 50, 1).unwrap();
        assert_eq!(r.empirical_risk, 0.0);
        let curve = empirical_sample_complexity(
            &EstimatorConfig::Oracle,
            &family,
            0.1,
            0.1,
            &[10, 100],
            20,
            1,
        )
        .unwrap();
        assert_eq!(curve.m0_hat, Some(10));
    }

    #[test]
    fn error_bound_of_two_gives_zero_risk() {
        let r = empirical_risk(&EstimatorConfig::MatrixDirect, &fam(m2()), 5, 2.0, 200, 3).unwrap();
        assert_eq!(r.empirical_risk, 0.0);
    }

    #[test]
    fn risk_decreases_with_length() {
        let family = fam(m2());
        let small = empirical_risk(&EstimatorConfig::MatrixDirect, &family, 1_000, 0.05, 200, 5)
            .unwrap()
            .empirical_risk;
        let large = empirical_risk(
            &EstimatorConfig::MatrixDirect,
            &family,
            100_000,
            0.05,
            200,
            5,
        )
        .unwrap()
        .empirical_risk;
        assert!(large < small, "risk {large} at 1e5 vs {small} at 1e3");
    }

    #[test]
    fn reports_name_the_worst_chain() {
        let uniform = StochasticMatrix::from_rows(&vec![vec![1.0 / 6.0; 6]; 6]).unwrap();
        let family = vec![
            TaggedChain::new("easy", m2()),
            TaggedChain::new("hard", uniform),
        ];
        let r = empirical_risk(&EstimatorConfig::MatrixDirect, &family, 300, 0.1, 100, 7).unwrap();
        assert_eq!(r.worst_chain_tag, "hard");
        assert!(r.ci95[0] <= r.empirical_risk && r.empirical_risk <= r.ci95[1]);
    }

    #[test]
    fn runs_are_deterministic() {
        let family = fam(m1());
        let est = EstimatorConfig::MatrixExtended { alpha: 0.5 };
        let a = empirical_risk(&est, &family, 2_000, 0.1, 64, 11).unwrap();
        let b = empirical_risk(&est, &family, 2_000, 0.1, 64, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.budget_law.is_some());
    }

    #[test]
    fn grid_must_increase() {
        let family = fam(m2());
        let err = empirical_sample_complexity(
            &EstimatorConfig::Oracle,
            &family,
            0.1,
            0.1,
            &[10, 10],
            1,
            0,
        );
        assert!(matches!(err, Err(Error::BadGrid(_))));
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for (s, n) in [(0, 10), (3, 10), (10, 10), (500, 1000)] {
            let [lo, hi] = wilson_interval(s, n, 1.96);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }
}
