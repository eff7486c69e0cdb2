//! Numerical checks of the claims relating a chain to its α-lazy version.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{oracles, TaggedChain};
use crate::chain::{self, Distribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::lazy::{self, LazyParams, RowSampler};
use crate::projection;
use crate::spectral::{self, DEFAULT_K_CAP};

/// Additive slack for every inequality checked in this module.
pub const CLAIM_TOL: f64 = 1e-9;

fn check_alphas(alpha_grid: &[f64]) -> Result<()> {
    alpha_grid
        .iter()
        .try_for_each(|&a| LazyParams::new(a).map(|_| ()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapIdentityRow {
    pub tag: String,
    pub alpha: f64,
    pub gamma: f64,
    pub gamma_lazy: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapIdentityReport {
    pub rows: Vec<GapIdentityRow>,
    pub max_deviation: f64,
    pub violations: usize,
}

/// `γ(L_α(M)) = (1−α)γ(M)` on reversible ergodic chains.
pub fn lazy_spectral_identity(
    family: &[TaggedChain],
    alpha_grid: &[f64],
) -> Result<GapIdentityReport> {
    check_alphas(alpha_grid)?;
    let rows = family
        .par_iter()
        .map(|c| -> Result<Vec<GapIdentityRow>> {
            if !chain::is_reversible(&c.chain)? {
                return Err(Error::NotReversible);
            }
            let gamma = spectral::spectral_gaps(&c.chain)?.gamma;
            alpha_grid
                .iter()
                .map(|&alpha| {
                    let gamma_lazy = spectral::spectral_gaps(&lazy::lazy(&c.chain, alpha)?)?.gamma;
                    Ok(GapIdentityRow {
                        tag: c.tag.clone(),
                        alpha,
                        gamma,
                        gamma_lazy,
                        deviation: (gamma_lazy - (1.0 - alpha) * gamma).abs(),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    Ok(GapIdentityReport {
        max_deviation: rows.iter().map(|r| r.deviation).fold(0.0, f64::max),
        violations: rows.iter().filter(|r| r.deviation > CLAIM_TOL).count(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversibilizationGapRow {
    pub tag: String,
    pub alpha: f64,
    /// `γ(L_α(M)†)`.
    pub lhs: f64,
    /// `(1−α)γ(M†)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversibilizationGapReport {
    pub rows: Vec<ReversibilizationGapRow>,
    pub min_slack: f64,
    pub violations: Vec<ReversibilizationGapRow>,
}

/// `γ(L_α(M)†) ≥ (1−α)γ(M†)` on ergodic chains.
pub fn verify_lazy_reversibilization_gap(
    family: &[TaggedChain],
    alpha_grid: &[f64],
) -> Result<ReversibilizationGapReport> {
    check_alphas(alpha_grid)?;
    let rows = family
        .par_iter()
        .map(|c| -> Result<Vec<ReversibilizationGapRow>> {
            if !chain::is_ergodic(&c.chain) {
                return Err(Error::NotErgodic);
            }
            let base = spectral::reversibilization_gap(&c.chain)?;
            alpha_grid
                .iter()
                .map(|&alpha| {
                    let lhs = spectral::reversibilization_gap(&lazy::lazy(&c.chain, alpha)?)?;
                    Ok(ReversibilizationGapRow {
                        tag: c.tag.clone(),
                        alpha,
                        lhs,
                        rhs: (1.0 - alpha) * base,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let violations = rows
        .iter()
        .filter(|r| r.lhs < r.rhs - CLAIM_TOL)
        .cloned()
        .collect();
    Ok(ReversibilizationGapReport {
        min_slack: rows
            .iter()
            .map(|r| r.lhs - r.rhs)
            .fold(f64::INFINITY, f64::min),
        violations,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LazyMixingRow {
    pub alpha: f64,
    pub eps: f64,
    pub t_mix_lazy: u64,
    /// `t_mix(M, ε/2)`.
    pub t_mix_half: u64,
    /// `max{2 ln(2/ε)/(1−α)², (2/(1−α)) t_mix(M, ε/2)}`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LazyMixingReport {
    pub rows: Vec<LazyMixingRow>,
    pub t_mix: u64,
    /// Per α: `(t_mix(L_α(M)), max{5/(1−α)², (6/(1−α)) t_mix(M)}, holds)`.
    pub quarter_form: Vec<(f64, u64, f64, bool)>,
    pub violations: usize,
}

/// Exact mixing times of `L_α(M)` against both forms of the lazy mixing bound.
pub fn verify_lazy_mixing_bound(
    m: &StochasticMatrix,
    alpha_grid: &[f64],
    eps_grid: &[f64],
) -> Result<LazyMixingReport> {
    check_alphas(alpha_grid)?;
    if !chain::is_ergodic(m) {
        return Err(Error::NotErgodic);
    }
    if let Some(&eps) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::BadEpsilon { eps });
    }
    let t_mix = spectral::mixing_time(m, 0.25)?;
    let mut rows = Vec::new();
    let mut quarter_form = Vec::new();
    for &alpha in alpha_grid {
        let lazy_m = lazy::lazy(m, alpha)?;
        let a = 1.0 - alpha;
        for &eps in eps_grid {
            let t_mix_lazy = spectral::mixing_time(&lazy_m, eps)?;
            let t_mix_half = spectral::mixing_time(m, eps / 2.0)?;
            let bound = (2.0 * (2.0 / eps).ln() / (a * a)).max(2.0 / a * t_mix_half as f64);
            rows.push(LazyMixingRow {
                alpha,
                eps,
                t_mix_lazy,
                t_mix_half,
                bound,
                holds: t_mix_lazy as f64 <= bound + CLAIM_TOL,
            });
        }
        let t_lazy = spectral::mixing_time(&lazy_m, 0.25)?;
        let bound = (5.0 / (a * a)).max(6.0 / a * t_mix as f64);
        quarter_form.push((alpha, t_lazy, bound, t_lazy as f64 <= bound + CLAIM_TOL));
    }
    let violations =
        rows.iter().filter(|r| !r.holds).count() + quarter_form.iter().filter(|q| !q.3).count();
    Ok(LazyMixingReport {
        rows,
        t_mix,
        quarter_form,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoGapRatioEntry {
    pub tag: String,
    pub d: usize,
    pub alpha: f64,
    pub gamma_ps: f64,
    pub gamma_ps_lazy: f64,
    pub argmax_k: Option<usize>,
    /// `γ_ps(L_α(M)) / ((1−α)γ_ps(M))`; absent when `γ_ps(M) = 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoGapRatioScan {
    pub entries: Vec<PseudoGapRatioEntry>,
    pub min_ratio: Option<f64>,
    /// `(tag, α)` attaining `min_ratio`.
    pub argmin: Option<(String, f64)>,
    /// `(lower edge, count)` over buckets of width 0.25, the last open-ended.
    pub histogram: Vec<(f64, usize)>,
    pub per_d_min: BTreeMap<usize, f64>,
    /// Entries whose base pseudo spectral gap is attained at `k = 1`.
    pub k1_checked: usize,
    /// Of those, entries with `γ_ps(L_α(M)) < (1−α)γ_ps(M) − tol`.
    pub k1_violations: Vec<PseudoGapRatioEntry>,
}

const HISTOGRAM_EDGES: [f64; 9] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

/// Ratios `γ_ps(L_α(M)) / ((1−α)γ_ps(M))` over a family. Only the `k = 1`
/// case is checked; everything else is reported.
pub fn scan_pseudo_gap_ratios(
    family: &[TaggedChain],
    alpha_grid: &[f64],
) -> Result<PseudoGapRatioScan> {
    check_alphas(alpha_grid)?;
    let entries = family
        .par_iter()
        .map(|c| -> Result<Vec<PseudoGapRatioEntry>> {
            if !chain::is_irreducible(&c.chain) {
                return Err(Error::NotIrreducible);
            }
            let base = spectral::pseudo_spectral_gap(&c.chain, DEFAULT_K_CAP)?;
            alpha_grid
                .iter()
                .map(|&alpha| {
                    let lazy_gap = spectral::pseudo_spectral_gap(
                        &lazy::lazy(&c.chain, alpha)?,
                        DEFAULT_K_CAP,
                    )?;
                    let denom = (1.0 - alpha) * base.value;
                    Ok(PseudoGapRatioEntry {
                        tag: c.tag.clone(),
                        d: c.chain.dim(),
                        alpha,
                        gamma_ps: base.value,
                        gamma_ps_lazy: lazy_gap.value,
                        argmax_k: base.argmax_k,
                        ratio: (denom > 0.0).then(|| lazy_gap.value / denom),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    let mut min_ratio: Option<f64> = None;
    let mut argmin = None;
    let mut histogram: Vec<(f64, usize)> = HISTOGRAM_EDGES.iter().map(|&e| (e, 0)).collect();
    let mut per_d_min = BTreeMap::new();
    for e in &entries {
        let Some(r) = e.ratio else { continue };
        if min_ratio.is_none_or(|m| r < m) {
            min_ratio = Some(r);
            argmin = Some((e.tag.clone(), e.alpha));
        }
        let bucket = HISTOGRAM_EDGES
            .iter()
            .rposition(|&edge| r >= edge)
            .unwrap_or(0);
        histogram[bucket].1 += 1;
        per_d_min
            .entry(e.d)
            .and_modify(|m: &mut f64| *m = m.min(r))
            .or_insert(r);
    }
    let k1: Vec<&PseudoGapRatioEntry> = entries.iter().filter(|e| e.argmax_k == Some(1)).collect();
    let k1_violations = k1
        .iter()
        .filter(|e| e.gamma_ps_lazy < (1.0 - e.alpha) * e.gamma_ps - CLAIM_TOL)
        .map(|e| (*e).clone())
        .collect();
    Ok(PseudoGapRatioScan {
        min_ratio,
        argmin,
        histogram,
        per_d_min,
        k1_checked: k1.len(),
        k1_violations,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub tag: String,
    pub t_mix: u64,
    pub pi_star: f64,
    pub gamma_ps: f64,
    pub pseudo_lower: f64,
    pub pseudo_upper: f64,
    /// `γ_ps ≥ 1/(2 t_mix)`.
    pub pseudo_half_lower_ok: bool,
    pub gamma_star: Option<f64>,
    pub absolute_lower: Option<f64>,
    pub absolute_upper: Option<f64>,
}

impl SandwichRow {
    pub fn pseudo_lower_ok(&self) -> bool {
        self.pseudo_lower <= self.t_mix as f64 + CLAIM_TOL
    }

    pub fn pseudo_upper_ok(&self) -> bool {
        self.t_mix as f64 <= self.pseudo_upper + CLAIM_TOL
    }

    pub fn absolute_ok(&self) -> Option<bool> {
        let t = self.t_mix as f64;
        Some(self.absolute_lower? <= t + CLAIM_TOL && t <= self.absolute_upper? + CLAIM_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub pseudo_lower_violations: usize,
    pub pseudo_upper_violations: usize,
    pub pseudo_half_lower_violations: usize,
    pub reversible_checked: usize,
    pub absolute_violations: usize,
}

/// Two-sided mixing-time bounds from `γ_ps` on every ergodic chain and from
/// `γ⋆` on every reversible one.
pub fn check_sandwiches(family: &[TaggedChain]) -> Result<SandwichReport> {
    let rows = family
        .par_iter()
        .map(|c| -> Result<SandwichRow> {
            if !chain::is_ergodic(&c.chain) {
                return Err(Error::NotErgodic);
            }
            let pi_star = chain::stationary(&c.chain)?.min();
            let t_mix = spectral::mixing_time(&c.chain, 0.25)?;
            let gamma_ps = spectral::pseudo_spectral_gap(&c.chain, DEFAULT_K_CAP)?.value;
            let (pseudo_lower, pseudo_upper) =
                spectral::pseudo_gap_mixing_bounds(gamma_ps, pi_star);
            let gamma_star = match chain::is_reversible(&c.chain)? {
                true => Some(spectral::spectral_gaps(&c.chain)?.gamma_star),
                false => None,
            };
            let absolute = gamma_star.map(|g| spectral::absolute_gap_mixing_bounds(g, pi_star));
            Ok(SandwichRow {
                tag: c.tag.clone(),
                t_mix,
                pi_star,
                gamma_ps,
                pseudo_lower,
                pseudo_upper,
                pseudo_half_lower_ok: 2.0 * t_mix as f64 * gamma_ps >= 1.0 - CLAIM_TOL,
                gamma_star,
                absolute_lower: absolute.map(|a| a.0),
                absolute_upper: absolute.map(|a| a.1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport {
        pseudo_lower_violations: rows.iter().filter(|r| !r.pseudo_lower_ok()).count(),
        pseudo_upper_violations: rows.iter().filter(|r| !r.pseudo_upper_ok()).count(),
        pseudo_half_lower_violations: rows.iter().filter(|r| !r.pseudo_half_lower_ok).count(),
        reversible_checked: rows.iter().filter(|r| r.gamma_star.is_some()).count(),
        absolute_violations: rows
            .iter()
            .filter(|r| r.absolute_ok() == Some(false))
            .count(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub rho: f64,
    /// Fraction of trials with `m_act − (1−α)n ≥ ρn`, `n = m − 1`.
    pub upper: f64,
    /// Fraction of trials with `(1−α)n − m_act ≥ ρn`.
    pub lower: f64,
    /// `e^{−2ρ²n}`.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialCostReport {
    pub alpha: f64,
    pub m: usize,
    pub trials: u64,
    pub mean: f64,
    /// `(1−α)(m−1)`.
    pub expected: f64,
    /// Standard error of the mean under the binomial law.
    pub sigma: f64,
    pub mean_holds: bool,
    pub tails: Vec<TailRow>,
}

impl BinomialCostReport {
    pub fn passed(&self) -> bool {
        self.mean_holds && self.tails.iter().all(|t| t.holds)
    }
}

/// Distribution of the base-step count `m_act` of the coin construction
/// against `Binomial(m − 1, 1 − α)`.
pub fn verify_binomial_cost(
    m: &StochasticMatrix,
    mu: &Distribution,
    alpha: f64,
    len: usize,
    trials: u64,
    rho_grid: &[f64],
    seed: u64,
) -> Result<BinomialCostReport> {
    let alpha = LazyParams::new(alpha)?.alpha();
    if m.dim() != mu.dim() {
        return Err(Error::ShapeMismatch {
            left: m.dim(),
            right: mu.dim(),
        });
    }
    if len < 2 {
        return Err(Error::BadLength { m: len, min: 2 });
    }
    if trials == 0 {
        return Err(Error::BadSpec("trials must be at least 1".into()));
    }
    let rows = RowSampler::new(m);
    let initial = RowSampler::for_distribution(mu);
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = lazy::trial_rng(seed, t);
            lazy::count_base_steps(&rows, &initial, alpha, len, &mut rng)
        })
        .collect();
    let n = (len - 1) as f64;
    let b = 1.0 - alpha;
    let expected = b * n;
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    let mean = total as f64 / trials as f64;
    let sigma = (n * b * alpha / trials as f64).sqrt();
    let tails = rho_grid
        .iter()
        .map(|&rho| {
            let upper = counts
                .iter()
                .filter(|&&c| c as f64 - expected >= rho * n)
                .count();
            let lower = counts
                .iter()
                .filter(|&&c| expected - c as f64 >= rho * n)
                .count();
            let upper = upper as f64 / trials as f64;
            let lower = lower as f64 / trials as f64;
            let bound = (-2.0 * rho * rho * n).exp();
            let slack = 4.0 * (bound * (1.0 - bound) / trials as f64).sqrt() + 1.0 / trials as f64;
            TailRow {
                rho,
                upper,
                lower,
                bound,
                slack,
                holds: upper.max(lower) <= bound + slack,
            }
        })
        .collect();
    Ok(BinomialCostReport {
        alpha,
        m: len,
        trials,
        mean,
        expected,
        sigma,
        mean_holds: (mean - expected).abs() <= 4.0 * sigma,
        tails,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub d: usize,
    pub m: usize,
    pub alpha: f64,
    pub paths: usize,
    pub max_abs_diff: f64,
    /// Total mass of the coin construction over all paths.
    pub total_mass: f64,
}

impl CouplingReport {
    pub fn exact(&self, tol: f64) -> bool {
        self.max_abs_diff <= tol && (self.total_mass - 1.0).abs() <= tol
    }
}

/// Compares, path by path over all `d^m` paths, the law of the coin
/// construction with the path law of `(L_α(M), μ)`.
pub fn coupling_exactness(
    m: &StochasticMatrix,
    mu: &Distribution,
    alpha: f64,
    len: usize,
) -> Result<CouplingReport> {
    let alpha = LazyParams::new(alpha)?.alpha();
    if len < 1 {
        return Err(Error::BadLength { m: len, min: 1 });
    }
    let d = m.dim();
    if d != mu.dim() {
        return Err(Error::ShapeMismatch {
            left: d,
            right: mu.dim(),
        });
    }
    let lazy_m = lazy::lazy(m, alpha)?;
    let paths = d
        .checked_pow(len as u32)
        .filter(|&p| p <= 1 << 22)
        .ok_or_else(|| Error::BadSpec(format!("{d}^{len} paths is too many to enumerate")))?;
    let mut path = vec![0usize; len];
    let mut max_abs_diff: f64 = 0.0;
    let mut total_mass = 0.0;
    for code in 0..paths {
        let mut c = code;
        for slot in path.iter_mut().rev() {
            *slot = c % d;
            c /= d;
        }
        let coin = lazy::coin_path_probability(m, mu, alpha, &path);
        let direct = chain::path_probability(&lazy_m, mu, &path);
        max_abs_diff = max_abs_diff.max((coin - direct).abs());
        total_mass += coin;
    }
    Ok(CouplingReport {
        d,
        m: len,
        alpha,
        paths,
        max_abs_diff,
        total_mass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub input: Vec<f64>,
    pub oracle: f64,
    pub general: f64,
    /// Present for inputs summing to one.
    pub rowsum1: Option<f64>,
    /// Negative mass of the input, for inputs summing to one.
    pub negative_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptimalityReport {
    pub resolution: u32,
    pub rows: Vec<ProjectionRow>,
    /// Largest `|projection distance − oracle distance|`.
    pub max_gap: f64,
    /// Largest amount by which a projection beat the grid oracle.
    pub max_oracle_excess: f64,
    /// Largest `|rowsum1 distance − 2·negative mass|`.
    pub max_contract_error: f64,
    pub contract_checked: usize,
}

/// Inputs for the projection check: hand-picked corner cases followed by
/// random vectors, half of them summing to one.
pub fn projection_inputs(count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut inputs: Vec<Vec<f64>> = vec![
        vec![0.2, 0.9, 0.3],
        vec![-0.5, -0.25],
        vec![-1.0, -2.0, -3.0, -4.0],
        vec![1.5, -0.5],
        vec![0.0, 0.0, 1.0],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![2.0, 2.0, 2.0],
        vec![1.0 + 1e-9, -1e-9, 0.0],
        vec![0.0, 0.0, 0.0, 0.0],
        vec![0.7, 0.7, -0.4],
        vec![3.0, -1.0, -0.5, -0.5],
        vec![0.1, 0.1, 0.1],
    ];
    let mut rng = lazy::trial_rng(seed, 0);
    let mut i = 0;
    while inputs.len() < count {
        let d = 2 + i % 3;
        let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..2.0)).collect();
        if i % 2 == 0 {
            let head: f64 = x[..d - 1].iter().sum();
            x[d - 1] = 1.0 - head;
        }
        inputs.push(x);
        i += 1;
    }
    inputs.truncate(count);
    inputs
}

/// Both projections against the exhaustive grid oracle at resolution
/// `1/resolution`, and the distance contract for inputs summing to one.
pub fn projection_optimality(
    inputs: &[Vec<f64>],
    resolution: u32,
) -> Result<ProjectionOptimalityReport> {
    let rows = inputs
        .par_iter()
        .map(|x| -> Result<ProjectionRow> {
            let general = projection::project_simplex_general(x)?.distance;
            let (rowsum1, negative_mass) = match projection::project_simplex_rowsum1(x) {
                Ok(p) => (
                    Some(p.distance),
                    Some(x.iter().map(|v| (-v).max(0.0)).sum()),
                ),
                Err(Error::RowSumNotOne { .. }) => (None, None),
                Err(e) => return Err(e),
            };
            Ok(ProjectionRow {
                input: x.clone(),
                oracle: oracles::grid_simplex_distance(x, resolution),
                general,
                rowsum1,
                negative_mass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_gap: f64 = 0.0;
    let mut max_oracle_excess: f64 = 0.0;
    let mut max_contract_error: f64 = 0.0;
    let mut contract_checked = 0;
    for r in &rows {
        for v in std::iter::once(r.general).chain(r.rowsum1) {
            max_gap = max_gap.max((v - r.oracle).abs());
            max_oracle_excess = max_oracle_excess.max(v - r.oracle);
        }
        if let (Some(v), Some(n)) = (r.rowsum1, r.negative_mass) {
            contract_checked += 1;
            max_contract_error = max_contract_error.max((v - 2.0 * n).abs());
        }
    }
    Ok(ProjectionOptimalityReport {
        resolution,
        rows,
        max_gap,
        max_oracle_excess,
        max_contract_error,
        contract_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::examples::*;

    fn tagged(m: StochasticMatrix) -> Vec<TaggedChain> {
        vec![TaggedChain::new("m", m)]
    }

    #[test]
    fn reversibilization_gap_on_m2() {
        let r = verify_lazy_reversibilization_gap(&tagged(m2()), &[0.5]).unwrap();
        assert!((r.rows[0].lhs - 0.75).abs() < 1e-9);
        assert!((r.rows[0].rhs - 0.5).abs() < 1e-9);
        assert!(r.violations.is_empty());
        let heavy = lazy::lazy(&m2(), 0.9).unwrap();
        assert!(
            verify_lazy_reversibilization_gap(&tagged(heavy), &[0.1, 0.5, 0.9])
                .unwrap()
                .violations
                .is_empty()
        );
    }

    #[test]
    fn reversibilization_gap_rejects_periodic_chains() {
        assert_eq!(
            verify_lazy_reversibilization_gap(&tagged(m1()), &[0.5]).unwrap_err(),
            Error::NotErgodic
        );
    }

    #[test]
    fn lazy_mixing_bound_on_lazy_m1() {
        let m = lazy::lazy(&m1(), 0.5).unwrap();
        let r = verify_lazy_mixing_bound(&m, &[0.5], &[0.25]).unwrap();
        assert_eq!(r.violations, 0);
        assert!(matches!(
            verify_lazy_mixing_bound(&m1(), &[0.5], &[0.25]),
            Err(Error::NotErgodic)
        ));
    }

    #[test]
    fn lazy_mixing_bound_on_rank_one() {
        let r = verify_lazy_mixing_bound(&m2(), &[0.1, 0.9], &[0.25, 0.1]).unwrap();
        assert_eq!(r.t_mix, 1);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn pseudo_gap_ratio_for_m2() {
        let s = scan_pseudo_gap_ratios(&tagged(m2()), &[0.5]).unwrap();
        assert!((s.entries[0].ratio.unwrap() - 1.5).abs() < 1e-9);
        assert_eq!(s.k1_checked, 1);
        assert!(s.k1_violations.is_empty());
        assert_eq!(s.per_d_min.get(&3).copied(), s.min_ratio);
    }

    #[test]
    fn cost_mean_for_small_lengths() {
        let mu = Distribution::uniform(3);
        let r = verify_binomial_cost(&m2(), &mu, 0.5, 101, 20_000, &[0.1, 0.2], 3).unwrap();
        assert!((r.mean - 50.0).abs() < 0.5);
        assert!(r.passed());
        let r = verify_binomial_cost(&m2(), &mu, 0.9, 101, 20_000, &[0.1], 3).unwrap();
        assert!((r.mean - 10.0).abs() < 0.2);
    }

    #[test]
    fn coupling_is_exact_for_two_states() {
        let m = two_state(0.3, 0.6);
        let mu = Distribution::new(vec![0.4, 0.6]).unwrap();
        let r = coupling_exactness(&m, &mu, 0.35, 3).unwrap();
        assert_eq!(r.paths, 8);
        assert!(r.exact(1e-12), "{r:?}");
    }

    #[test]
    fn projection_inputs_are_reproducible() {
        assert_eq!(projection_inputs(40, 9), projection_inputs(40, 9));
        assert_eq!(projection_inputs(40, 9).len(), 40);
    }

    #[test]
    fn projection_matches_coarse_oracle() {
        let r = projection_optimality(&projection_inputs(30, 1), 100).unwrap();
        assert!(r.max_gap <= 3e-2, "{}", r.max_gap);
        assert!(r.max_oracle_excess <= 1e-12);
        assert!(r.max_contract_error <= 1e-12);
        assert!(r.contract_checked > 0);
    }

    #[test]
    fn sandwich_on_rank_one() {
        let r = check_sandwiches(&tagged(m2())).unwrap();
        assert_eq!(r.rows[0].t_mix, 1);
        assert_eq!(r.pseudo_upper_violations, 0);
        assert_eq!(r.absolute_violations, 0);
    }
}
