//! Spectral gaps, the pseudo spectral gap, total-variation decay and mixing
//! times.
//!
//! Every spectrum computed here is that of a matrix reversible with respect
//! to a known positive law `π`, so it is obtained from the symmetric matrix
//! `diag(π)^{1/2} A diag(π)^{-1/2}` with a cyclic Jacobi solver.

use serde::{Deserialize, Serialize};

use crate::chain::{self, Distribution, StochasticMatrix};
use crate::config::TOL;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_K_CAP: usize = 1000;
pub const MIXING_TIME_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Descending eigenvalues, reversible chains only.
    pub eigenvalues: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub gamma_star: Option<f64>,
    pub gamma_ps: f64,
    pub gamma_ps_argmax_k: Option<usize>,
    pub gamma_ps_stop: GapStop,
    /// `t_mix(M, 1/4)`, ergodic chains only.
    pub t_mix_quarter: Option<u64>,
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, unsorted.
pub fn jacobi_eigenvalues(sym: &Matrix) -> Result<Vec<f64>> {
    let d = sym.dim();
    let mut a = sym.clone();
    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > TOL.jacobi_off_diagonal {
        if sweeps == TOL.jacobi_max_sweeps {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..d {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    Ok((0..d).map(|i| a[(i, i)]).collect())
}

/// Descending spectrum of `m`, assumed reversible with respect to `pi`.
pub(crate) fn spectrum_with_law(m: &Matrix, pi: &[f64]) -> Result<Vec<f64>> {
    let d = m.dim();
    let roots: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let s = Matrix::from_fn(d, |i, j| {
        let a = roots[i] * m[(i, j)] / roots[j];
        let b = roots[j] * m[(j, i)] / roots[i];
        0.5 * (a + b)
    });
    let mut eig = jacobi_eigenvalues(&s)?;
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}

/// `1 − λ₂` of a matrix reversible with respect to `pi`, clamped at zero.
pub(crate) fn gap_with_law(m: &Matrix, pi: &[f64]) -> Result<f64> {
    let eig = spectrum_with_law(m, pi)?;
    Ok((1.0 - eig[1]).max(0.0))
}

pub fn reversible_spectrum(m: &StochasticMatrix) -> Result<Vec<f64>> {
    let pi = chain::stationary(m)?;
    if !chain::is_reversible(m)? {
        return Err(Error::NotReversible);
    }
    spectrum_with_law(m.matrix(), pi.probs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGaps {
    pub gamma: f64,
    pub gamma_star: f64,
}

pub fn spectral_gaps(m: &StochasticMatrix) -> Result<SpectralGaps> {
    let eig = reversible_spectrum(m)?;
    Ok(gaps_from_spectrum(&eig))
}

fn gaps_from_spectrum(eig: &[f64]) -> SpectralGaps {
    let l2 = eig[1];
    let ld = eig[eig.len() - 1];
    SpectralGaps {
        gamma: (1.0 - l2).max(0.0),
        gamma_star: (1.0 - l2.max(ld.abs())).max(0.0),
    }
}

/// `γ(M)` of the reversibilization `M†`, computed against the stationary law of `M`.
pub fn reversibilization_gap(m: &StochasticMatrix) -> Result<f64> {
    let pi = chain::stationary(m)?;
    let rev = chain::reversibilization_with(m.matrix(), pi.probs());
    gap_with_law(rev.matrix(), pi.probs())
}

/// Why the pseudo-spectral-gap scan stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapStop {
    /// `1/(k+1)` fell to or below the best ratio, so no larger power can win.
    EarlyStop,
    /// The scan hit `k_cap`; the value is a lower bound.
    KCap,
    /// Periodic chains have zero pseudo spectral gap.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoSpectralGap {
    pub value: f64,
    pub argmax_k: Option<usize>,
    pub stop: GapStop,
    /// Set when the scan was cut off by `k_cap`.
    pub lower_bound: bool,
}

/// `max_k γ((Mᵏ)†)/k`.
pub fn pseudo_spectral_gap(m: &StochasticMatrix, k_cap: usize) -> Result<PseudoSpectralGap> {
    if chain::period(m)? > 1 {
        return Ok(PseudoSpectralGap {
            value: 0.0,
            argmax_k: None,
            stop: GapStop::Periodic,
            lower_bound: false,
        });
    }
    let pi = chain::stationary(m)?;
    let pi = pi.probs();
    let mut power = m.matrix().clone();
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 1;
    for k in 1..=k_cap.max(1) {
        let rev = chain::reversibilization_with(&power, pi);
        let ratio = gap_with_law(rev.matrix(), pi)? / k as f64;
        if ratio > best {
            best = ratio;
            argmax = k;
        }
        if 1.0 / (k as f64 + 1.0) <= best {
            return Ok(PseudoSpectralGap {
                value: best,
                argmax_k: Some(argmax),
                stop: GapStop::EarlyStop,
                lower_bound: false,
            });
        }
        power = StochasticMatrix::renormalized(power.mul(m.matrix())).into_matrix();
    }
    Ok(PseudoSpectralGap {
        value: best,
        argmax_k: Some(argmax),
        stop: GapStop::KCap,
        lower_bound: true,
    })
}

pub(crate) fn tv_slices(mu: &[f64], nu: &[f64]) -> f64 {
    0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::ShapeMismatch {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    Ok(tv_slices(mu.probs(), nu.probs()))
}

/// `d(t)` evaluator for a fixed ergodic chain.
pub(crate) struct Decay<'a> {
    m: &'a Matrix,
    pi: Distribution,
}

impl<'a> Decay<'a> {
    pub(crate) fn new(m: &'a StochasticMatrix) -> Result<Self> {
        match chain::period(m) {
            Ok(1) => {}
            _ => return Err(Error::NotErgodic),
        }
        Ok(Self {
            m: m.matrix(),
            pi: chain::stationary(m)?,
        })
    }

    pub(crate) fn at(&self, t: u64) -> f64 {
        let p = self.m.pow(t);
        p.rows()
            .map(|row| tv_slices(row, self.pi.probs()))
            .fold(0.0, f64::max)
    }

    /// Least `t ≥ 1` with `d(t) ≤ eps`: doubling, then bisection.
    pub(crate) fn mixing_time(&self, eps: f64) -> Result<u64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadEpsilon { eps });
        }
        let mut probes: Vec<(u64, f64)> = Vec::new();
        let mut probe = |t: u64| {
            let v = self.at(t);
            probes.push((t, v));
            v
        };
        let mut hi = 1u64;
        while probe(hi) > eps {
            if hi >= MIXING_TIME_CAP {
                return Err(Error::CapExceeded {
                    cap: MIXING_TIME_CAP,
                });
            }
            hi = (hi * 2).min(MIXING_TIME_CAP);
        }
        let mut lo = hi / 2; // d(lo) > eps, or lo = 0
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe(mid) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if cfg!(debug_assertions) {
            probes.sort_by_key(|p| p.0);
            for w in probes.windows(2) {
                debug_assert!(
                    w[1].1 <= w[0].1 + 1e-12,
                    "d(t) not monotone: d({})={} < d({})={}",
                    w[0].0,
                    w[0].1,
                    w[1].0,
                    w[1].1
                );
            }
        }
        Ok(hi)
    }
}

/// `d(t) = max_i ‖Mᵗ(i,·) − π‖_TV`.
pub fn worst_case_decay(m: &StochasticMatrix, t: u64) -> Result<f64> {
    Ok(Decay::new(m)?.at(t))
}

/// `t_mix(M, ε) = min{t ≥ 1 : d(t) ≤ ε}`.
pub fn mixing_time(m: &StochasticMatrix, eps: f64) -> Result<u64> {
    Decay::new(m)?.mixing_time(eps)
}

/// Two-sided bounds on `t_mix(M)` in terms of the pseudo spectral gap:
/// `(1/γ_ps, (1/γ_ps)(1 + 2 ln 2 + ln(1/π⋆)))`.
pub fn pseudo_gap_mixing_bounds(gamma_ps: f64, pi_star: f64) -> (f64, f64) {
    let inv = 1.0 / gamma_ps;
    (
        inv,
        inv * (1.0 + 2.0 * std::f64::consts::LN_2 + (1.0 / pi_star).ln()),
    )
}

/// Two-sided bounds on `t_mix(M)` for reversible ergodic chains:
/// `((1/γ⋆ − 1) ln 2, (1/γ⋆) ln(4/π⋆))`.
pub fn absolute_gap_mixing_bounds(gamma_star: f64, pi_star: f64) -> (f64, f64) {
    let inv = 1.0 / gamma_star;
    (
        (inv - 1.0) * std::f64::consts::LN_2,
        inv * (4.0 / pi_star).ln(),
    )
}

pub fn spectral_report(m: &StochasticMatrix) -> Result<SpectralReport> {
    let reversible = chain::is_reversible(m)?;
    let (eigenvalues, gaps) = if reversible {
        let eig = reversible_spectrum(m)?;
        let gaps = gaps_from_spectrum(&eig);
        (Some(eig), Some(gaps))
    } else {
        (None, None)
    };
    let ps = pseudo_spectral_gap(m, DEFAULT_K_CAP)?;
    let t_mix_quarter = match chain::period(m)? {
        1 => Some(mixing_time(m, 0.25)?),
        _ => None,
    };
    Ok(SpectralReport {
        eigenvalues,
        gamma: gaps.map(|g| g.gamma),
        gamma_star: gaps.map(|g| g.gamma_star),
        gamma_ps: ps.value,
        gamma_ps_argmax_k: ps.argmax_k,
        gamma_ps_stop: ps.stop,
        t_mix_quarter,
    })
}
