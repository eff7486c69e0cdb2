//! Row-stochastic matrices, probability vectors and their structural analysis.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::error::{Error, Result};
use crate::matrix::{solve_dense, Matrix, MatrixDoc};
use crate::spectral::{self, SpectralReport};

/// A validated `d×d` row-stochastic matrix with `d ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDoc", into = "MatrixDoc")]
pub struct StochasticMatrix(Matrix);

impl TryFrom<MatrixDoc> for StochasticMatrix {
    type Error = Error;

    fn try_from(doc: MatrixDoc) -> Result<Self> {
        validate_stochastic(&Matrix::try_from(doc)?)
    }
}

impl From<StochasticMatrix> for MatrixDoc {
    fn from(m: StochasticMatrix) -> Self {
        m.0.into()
    }
}

impl StochasticMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        validate_stochastic(&Matrix::from_rows(rows)?)
    }

    pub fn identity(d: usize) -> Self {
        Self(Matrix::identity(d))
    }

    /// Wraps a matrix that is stochastic up to floating-point rounding:
    /// entries within `-validation` of zero are clamped and every row is
    /// rescaled to sum to one.
    pub(crate) fn renormalized(m: Matrix) -> Self {
        let d = m.dim();
        let mut out = m;
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                let v = out[(i, j)];
                debug_assert!(v >= -1e-9, "renormalizing a clearly negative entry {v}");
                if v < 0.0 {
                    out[(i, j)] = 0.0;
                }
                s += out[(i, j)];
            }
            for j in 0..d {
                out[(i, j)] /= s;
            }
        }
        Self(out)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn mul(&self, rhs: &StochasticMatrix) -> StochasticMatrix {
        Self::renormalized(self.0.mul(&rhs.0))
    }

    pub fn pow(&self, t: u64) -> StochasticMatrix {
        Self::renormalized(self.0.pow(t))
    }
}

impl AsRef<Matrix> for StochasticMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDoc", into = "DistributionDoc")]
pub struct Distribution(Vec<f64>);

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionDoc {
    d: usize,
    probs: Vec<f64>,
}

impl TryFrom<DistributionDoc> for Distribution {
    type Error = Error;

    fn try_from(doc: DistributionDoc) -> Result<Self> {
        if doc.d != doc.probs.len() {
            return Err(Error::ShapeMismatch {
                left: doc.d,
                right: doc.probs.len(),
            });
        }
        Distribution::new(doc.probs)
    }
}

impl From<Distribution> for DistributionDoc {
    fn from(p: Distribution) -> Self {
        DistributionDoc {
            d: p.0.len(),
            probs: p.0,
        }
    }
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeProbability { index, value });
            }
        }
        let deviation = probs.iter().sum::<f64>() - 1.0;
        if deviation.abs() > TOL.validation {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self(probs))
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    pub fn point_mass(d: usize, i: usize) -> Self {
        let mut p = vec![0.0; d];
        p[i] = 1.0;
        Self(p)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Structural and spectral facts about a chain. Fields past `irreducible`
/// are only populated for irreducible chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainProfile {
    pub d: usize,
    pub irreducible: bool,
    pub period: Option<usize>,
    pub aperiodic: Option<bool>,
    pub reversible: Option<bool>,
    pub pi: Option<Distribution>,
    pub pi_star: Option<f64>,
    pub spectral: Option<SpectralReport>,
}

impl ChainProfile {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic == Some(true)
    }
}

pub fn validate_stochastic(raw: &Matrix) -> Result<StochasticMatrix> {
    let d = raw.dim();
    if d < 2 {
        return Err(Error::TooSmall { d });
    }
    for (i, row) in raw.rows().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        let deviation = row.iter().sum::<f64>() - 1.0;
        if deviation.abs() > TOL.validation {
            return Err(Error::RowSumNotOne { row: i, deviation });
        }
    }
    Ok(StochasticMatrix(raw.clone()))
}

fn reaches_all(d: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; d];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..d {
            if !seen[j] && edge(i, j) {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == d
}

/// Strong connectivity of the graph `{(i,j) : M(i,j) > 0}`, checked by
/// forward and backward reachability from state 0.
pub fn is_irreducible(m: &StochasticMatrix) -> bool {
    positive_graph_strongly_connected(m.matrix())
}

pub(crate) fn positive_graph_strongly_connected(m: &Matrix) -> bool {
    let d = m.dim();
    d > 0 && reaches_all(d, |i, j| m[(i, j)] > 0.0) && reaches_all(d, |i, j| m[(j, i)] > 0.0)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of an irreducible chain: the gcd of `level(i) + 1 − level(j)`
/// over all positive edges, where `level` is BFS depth from state 0.
pub fn period(m: &StochasticMatrix) -> Result<usize> {
    if !is_irreducible(m) {
        return Err(Error::NotIrreducible);
    }
    let d = m.dim();
    let mut level = vec![usize::MAX; d];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for j in 0..d {
            if m.get(i, j) > 0.0 && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut g = 0;
    for i in 0..d {
        for j in 0..d {
            if m.get(i, j) > 0.0 {
                g = gcd(g, (level[i] + 1).abs_diff(level[j]));
            }
        }
    }
    Ok(g)
}

pub fn is_ergodic(m: &StochasticMatrix) -> bool {
    matches!(period(m), Ok(1))
}

/// Unique stationary law of an irreducible chain, from a dense solve of
/// `(Mᵀ − I)πᵀ = 0` with the last equation replaced by `Σπ = 1`.
pub fn stationary(m: &StochasticMatrix) -> Result<Distribution> {
    if !is_irreducible(m) {
        return Err(Error::NotIrreducible);
    }
    let d = m.dim();
    let mut a = Matrix::from_fn(d, |i, j| m.get(j, i) - if i == j { 1.0 } else { 0.0 });
    for j in 0..d {
        a[(d - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; d];
    rhs[d - 1] = 1.0;
    let mut pi = solve_dense(&a, &rhs, 1e-14).ok_or(Error::SingularSystem)?;
    for p in pi.iter_mut() {
        if *p < 0.0 {
            if *p < -TOL.identity {
                return Err(Error::SingularSystem);
            }
            *p = 0.0;
        }
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    let image = m.matrix().left_mul(&pi);
    let residual: f64 = image.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
    if residual > TOL.identity {
        return Err(Error::SingularSystem);
    }
    Distribution::new(pi)
}

/// `Q(M) = diag(π) M`.
pub fn edge_measure(m: &StochasticMatrix) -> Result<Matrix> {
    let pi = stationary(m)?;
    Ok(edge_measure_with(m.matrix(), pi.probs()))
}

pub(crate) fn edge_measure_with(m: &Matrix, pi: &[f64]) -> Matrix {
    Matrix::from_fn(m.dim(), |i, j| pi[i] * m[(i, j)])
}

pub fn is_reversible(m: &StochasticMatrix) -> Result<bool> {
    let q = edge_measure(m)?;
    Ok(q.sub(&q.transpose()).inf_norm() <= TOL.identity)
}

/// `M* = diag(π)⁻¹ Mᵀ diag(π)`.
pub fn time_reversal(m: &StochasticMatrix) -> Result<StochasticMatrix> {
    let pi = stationary(m)?;
    Ok(time_reversal_with(m.matrix(), pi.probs()))
}

pub(crate) fn time_reversal_with(m: &Matrix, pi: &[f64]) -> StochasticMatrix {
    StochasticMatrix::renormalized(Matrix::from_fn(m.dim(), |i, j| m[(j, i)] * pi[j] / pi[i]))
}

/// Multiplicative reversibilization `M† = M* M`.
pub fn reversibilization(m: &StochasticMatrix) -> Result<StochasticMatrix> {
    let pi = stationary(m)?;
    Ok(reversibilization_with(m.matrix(), pi.probs()))
}

pub(crate) fn reversibilization_with(m: &Matrix, pi: &[f64]) -> StochasticMatrix {
    let rev = time_reversal_with(m, pi);
    StochasticMatrix::renormalized(rev.matrix().mul(m))
}

pub use crate::matrix::inf_norm_distance;

/// `‖μ/π‖₂,π = (Σ μ(i)²/π(i))^{1/2}`.
pub fn chi_square_norm(mu: &Distribution, pi: &Distribution) -> Result<f64> {
    if mu.dim() != pi.dim() {
        return Err(Error::ShapeMismatch {
            left: mu.dim(),
            right: pi.dim(),
        });
    }
    let mut s = 0.0;
    for (index, (&m, &p)) in mu.probs().iter().zip(pi.probs()).enumerate() {
        if p <= 0.0 {
            return Err(Error::ZeroStationaryEntry { index });
        }
        s += m * m / p;
    }
    Ok(s.sqrt())
}

/// Probability of observing `path` from `(M, μ)`: `μ(i₁) ∏ M(i_t, i_{t+1})`.
pub fn path_probability(m: &StochasticMatrix, mu: &Distribution, path: &[usize]) -> f64 {
    let Some(&first) = path.first() else {
        return 0.0;
    };
    path.windows(2)
        .fold(mu[first], |p, w| p * m.get(w[0], w[1]))
}

pub fn profile(m: &StochasticMatrix) -> Result<ChainProfile> {
    let d = m.dim();
    if !is_irreducible(m) {
        return Ok(ChainProfile {
            d,
            irreducible: false,
            period: None,
            aperiodic: None,
            reversible: None,
            pi: None,
            pi_star: None,
            spectral: None,
        });
    }
    let per = period(m)?;
    let pi = stationary(m)?;
    let reversible = is_reversible(m)?;
    let spectral = spectral::spectral_report(m)?;
    Ok(ChainProfile {
        d,
        irreducible: true,
        period: Some(per),
        aperiodic: Some(per == 1),
        reversible: Some(reversible),
        pi_star: Some(pi.min()),
        pi: Some(pi),
        spectral: Some(spectral),
    })
}

/// The chains used throughout the tests and the counterexample report.
pub mod examples {
    use super::StochasticMatrix;

    /// Periodic (period 2) reversible chain on three states.
    pub fn m1() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[[0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]])
            .expect("valid")
    }

    /// Rank-one chain whose rows all equal `(0.5, 0.2, 0.3)`.
    pub fn m2() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[[0.5, 0.2, 0.3], [0.5, 0.2, 0.3], [0.5, 0.2, 0.3]])
            .expect("valid")
    }

    pub fn three_cycle() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
            .expect("valid")
    }

    pub fn two_state(p: f64, q: f64) -> StochasticMatrix {
        StochasticMatrix::from_rows(&[[1.0 - p, p], [q, 1.0 - q]]).expect("valid")
    }

    pub fn swap() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).expect("valid")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn validate_examples() {
        assert!(StochasticMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).is_ok());
        match StochasticMatrix::from_rows(&[[0.5, 0.6], [1.0, 0.0]]) {
            Err(Error::RowSumNotOne { row: 0, deviation }) => {
                assert!((deviation - 0.1).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            StochasticMatrix::from_rows(&[[1.5, -0.5], [1.0, 0.0]]),
            Err(Error::NegativeEntry { row: 0, col: 1, .. })
        ));
        assert_eq!(
            StochasticMatrix::from_rows(&[[1.0]]),
            Err(Error::TooSmall { d: 1 })
        );
        let _ = m1();
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&m1()));
        assert!(!is_irreducible(&StochasticMatrix::identity(2)));
        let absorbing = StochasticMatrix::from_rows(&[[1.0, 0.0], [0.5, 0.5]]).unwrap();
        assert!(!is_irreducible(&absorbing));
    }

    #[test]
    fn periods() {
        assert_eq!(period(&m1()), Ok(2));
        assert_eq!(period(&m2()), Ok(1));
        assert_eq!(period(&swap()), Ok(2));
        assert_eq!(period(&three_cycle()), Ok(3));
        assert_eq!(
            period(&StochasticMatrix::identity(2)),
            Err(Error::NotIrreducible)
        );
    }

    #[test]
    fn stationary_laws() {
        assert!(close(
            stationary(&m1()).unwrap().probs(),
            &[0.25, 0.5, 0.25],
            1e-12
        ));
        assert!(close(
            stationary(&m2()).unwrap().probs(),
            &[0.5, 0.2, 0.3],
            1e-12
        ));
        // (q, p)/(p + q) with p = 0.3, q = 0.1
        assert!(close(
            stationary(&two_state(0.3, 0.1)).unwrap().probs(),
            &[0.25, 0.75],
            1e-12
        ));
        assert_eq!(
            stationary(&StochasticMatrix::identity(3)),
            Err(Error::NotIrreducible)
        );
    }

    #[test]
    fn edge_measures() {
        let q1 = edge_measure(&m1()).unwrap();
        let want1 =
            Matrix::from_rows(&[[0.0, 0.25, 0.0], [0.25, 0.0, 0.25], [0.0, 0.25, 0.0]]).unwrap();
        assert!(inf_norm_distance(&q1, &want1).unwrap() < 1e-12);
        let q2 = edge_measure(&m2()).unwrap();
        let want2 =
            Matrix::from_rows(&[[0.25, 0.1, 0.15], [0.1, 0.04, 0.06], [0.15, 0.06, 0.09]]).unwrap();
        assert!(inf_norm_distance(&q2, &want2).unwrap() < 1e-12);
        let qs = edge_measure(&swap()).unwrap();
        assert!(close(qs.as_slice(), &[0.0, 0.5, 0.5, 0.0], 1e-15));
    }

    #[test]
    fn reversibility_flags() {
        assert_eq!(is_reversible(&m1()), Ok(true));
        assert_eq!(is_reversible(&m2()), Ok(true));
        assert_eq!(is_reversible(&three_cycle()), Ok(false));
    }

    #[test]
    fn reversal_examples() {
        let m2r = time_reversal(&m2()).unwrap();
        assert!(inf_norm_distance(m2r.matrix(), m2().matrix()).unwrap() < 1e-12);
        let c = three_cycle();
        let cr = time_reversal(&c).unwrap();
        assert!(inf_norm_distance(cr.matrix(), &c.matrix().transpose()).unwrap() < 1e-12);
        let m1r = time_reversal(&m1()).unwrap();
        assert!(inf_norm_distance(m1r.matrix(), m1().matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn reversibilization_examples() {
        let p = three_cycle();
        let pd = reversibilization(&p).unwrap();
        assert!(inf_norm_distance(pd.matrix(), &Matrix::identity(3)).unwrap() < 1e-12);
        let m2d = reversibilization(&m2()).unwrap();
        assert!(inf_norm_distance(m2d.matrix(), m2().matrix()).unwrap() < 1e-12);
        let q = edge_measure_with(
            reversibilization(&m1()).unwrap().matrix(),
            &[0.25, 0.5, 0.25],
        );
        assert!(q.sub(&q.transpose()).max_abs() < 1e-12);
    }

    #[test]
    fn chi_square_examples() {
        let pi = Distribution::new(vec![0.25, 0.75]).unwrap();
        assert!((chi_square_norm(&pi, &pi).unwrap() - 1.0).abs() < 1e-15);
        let point = Distribution::point_mass(2, 0);
        assert!((chi_square_norm(&point, &pi).unwrap() - 2.0).abs() < 1e-15);
        let mu = Distribution::uniform(2);
        let want = (0.25f64 / 0.25 + 0.25 / 0.75).sqrt();
        assert!((chi_square_norm(&mu, &pi).unwrap() - want).abs() < 1e-15);
        let zero = Distribution::point_mass(2, 1);
        assert_eq!(
            chi_square_norm(&mu, &zero),
            Err(Error::ZeroStationaryEntry { index: 0 })
        );
    }

    #[test]
    fn profiles() {
        let p1 = profile(&m1()).unwrap();
        assert!(p1.irreducible);
        assert_eq!(p1.period, Some(2));
        assert_eq!(p1.reversible, Some(true));
        assert!((p1.pi_star.unwrap() - 0.25).abs() < 1e-12);
        let p2 = profile(&m2()).unwrap();
        assert_eq!(p2.period, Some(1));
        assert!((p2.pi_star.unwrap() - 0.2).abs() < 1e-12);
        let pi = profile(&StochasticMatrix::identity(2)).unwrap();
        assert!(!pi.irreducible && pi.pi.is_none());
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            Distribution::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            Distribution::new(vec![1.5, -0.5]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
    }
}
