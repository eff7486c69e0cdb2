//! The α-lazy transform `L_α(M) = αI + (1−α)M`, its affine inverse, and
//! trajectory simulation through the coin-toss coupling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{Distribution, StochasticMatrix};
use crate::config::TOL;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Identifier of the generator behind every simulated trajectory.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Laziness parameter, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LazyParams {
    alpha: f64,
}

impl LazyParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self { alpha })
        } else {
            Err(Error::BadAlpha { alpha })
        }
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }
}

impl TryFrom<f64> for LazyParams {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<LazyParams> for f64 {
    fn from(p: LazyParams) -> f64 {
        p.alpha
    }
}

pub fn lazy(m: &StochasticMatrix, alpha: f64) -> Result<StochasticMatrix> {
    let alpha = LazyParams::new(alpha)?.alpha();
    let d = m.dim();
    let raw = Matrix::from_fn(d, |i, j| {
        let stay = if i == j { alpha } else { 0.0 };
        stay + (1.0 - alpha) * m.get(i, j)
    });
    Ok(StochasticMatrix::renormalized(raw))
}

/// `L_α⁻¹(N) = (N − αI)/(1−α)`. Rows still sum to one; the diagonal goes
/// negative wherever `N(i,i) < α`.
pub fn unlazy(n: &StochasticMatrix, alpha: f64) -> Result<Matrix> {
    let alpha = LazyParams::new(alpha)?.alpha();
    let scale = 1.0 / (1.0 - alpha);
    Ok(Matrix::from_fn(n.dim(), |i, j| {
        let v = n.get(i, j);
        if i == j {
            (v - alpha) * scale
        } else {
            v * scale
        }
    }))
}

/// Whether `N` lies in the image of `L_α`, i.e. every `N(i,i) ≥ α`, up to
/// the `1e-12` validation tolerance.
pub fn in_lazy_range(n: &StochasticMatrix, alpha: f64) -> Result<bool> {
    let alpha = LazyParams::new(alpha)?.alpha();
    Ok((0..n.dim()).all(|i| n.get(i, i) >= alpha - TOL.validation))
}

/// Per-row inverse-CDF sampler, built once per matrix.
#[derive(Debug, Clone)]
pub struct RowSampler {
    d: usize,
    cumulative: Vec<f64>,
    last_positive: Vec<usize>,
}

impl RowSampler {
    pub fn new(m: &StochasticMatrix) -> Self {
        let rows: Vec<&[f64]> = (0..m.dim()).map(|i| m.row(i)).collect();
        Self::from_rows(&rows)
    }

    pub fn for_distribution(mu: &Distribution) -> Self {
        Self::from_rows(&[mu.probs()])
    }

    fn from_rows(rows: &[&[f64]]) -> Self {
        let d = rows[0].len();
        let mut cumulative = Vec::with_capacity(rows.len() * d);
        let mut last_positive = Vec::with_capacity(rows.len());
        for row in rows {
            let mut acc = 0.0;
            for &p in row.iter() {
                acc += p;
                cumulative.push(acc);
            }
            last_positive.push(row.iter().rposition(|&p| p > 0.0).unwrap_or(d - 1));
        }
        Self {
            d,
            cumulative,
            last_positive,
        }
    }

    /// First `j` with `u < F(i, j)`; rounding slack at the top of the CDF
    /// falls to the last state of positive mass.
    pub fn sample_with(&self, row: usize, u: f64) -> usize {
        let cdf = &self.cumulative[row * self.d..(row + 1) * self.d];
        cdf.iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive[row])
    }

    pub fn sample<R: Rng + ?Sized>(&self, row: usize, rng: &mut R) -> usize {
        self.sample_with(row, rng.random::<f64>())
    }
}

/// Reproducible generator for stream `stream` under `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_dims(m: &StochasticMatrix, mu: &Distribution) -> Result<()> {
    if m.dim() != mu.dim() {
        return Err(Error::ShapeMismatch {
            left: m.dim(),
            right: mu.dim(),
        });
    }
    Ok(())
}

/// Draws `(X₁, …, X_m) ∼ (M, μ)`.
pub fn simulate_with<R: Rng + ?Sized>(
    rows: &RowSampler,
    initial: &RowSampler,
    m: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut path = Vec::with_capacity(m);
    let mut x = initial.sample(0, rng);
    path.push(x);
    for _ in 1..m {
        x = rows.sample(x, rng);
        path.push(x);
    }
    path
}

pub fn simulate(
    m: &StochasticMatrix,
    mu: &Distribution,
    len: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    check_dims(m, mu)?;
    if len < 1 {
        return Err(Error::BadLength { m: len, min: 1 });
    }
    let mut rng = trial_rng(seed, 0);
    Ok(simulate_with(
        &RowSampler::new(m),
        &RowSampler::for_distribution(mu),
        len,
        &mut rng,
    ))
}

/// A path of `L_α(M)` produced by the coin construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LazyTrajectory {
    pub states: Vec<usize>,
    pub m: usize,
    /// Heads among the `m − 1` coins, i.e. draws taken from `M`.
    pub m_act: usize,
    pub seed: u64,
    pub stream: u64,
    pub rng: String,
    pub alpha: f64,
    pub initial_law: Distribution,
}

/// Coin construction: the first state is drawn from `μ` at no cost; every
/// later step tosses a coin that lands heads with probability `1−α`, and
/// a head advances the base chain. Returns the path and the head count.
pub fn simulate_lazy_with<R: Rng + ?Sized>(
    rows: &RowSampler,
    initial: &RowSampler,
    alpha: f64,
    m: usize,
    rng: &mut R,
) -> (Vec<usize>, usize) {
    let advance = 1.0 - alpha;
    let mut path = Vec::with_capacity(m);
    let mut x = initial.sample(0, rng);
    path.push(x);
    let mut m_act = 0;
    for _ in 1..m {
        if rng.random::<f64>() < advance {
            x = rows.sample(x, rng);
            m_act += 1;
        }
        path.push(x);
    }
    (path, m_act)
}

/// As [`simulate_lazy_with`], but only the head count is kept.
pub fn count_base_steps<R: Rng + ?Sized>(
    rows: &RowSampler,
    initial: &RowSampler,
    alpha: f64,
    m: usize,
    rng: &mut R,
) -> usize {
    let advance = 1.0 - alpha;
    let mut x = initial.sample(0, rng);
    let mut m_act = 0;
    for _ in 1..m {
        if rng.random::<f64>() < advance {
            x = rows.sample(x, rng);
            m_act += 1;
        }
    }
    m_act
}

pub fn simulate_lazy(
    m: &StochasticMatrix,
    mu: &Distribution,
    alpha: f64,
    len: usize,
    seed: u64,
) -> Result<LazyTrajectory> {
    let alpha = LazyParams::new(alpha)?.alpha();
    check_dims(m, mu)?;
    if len < 1 {
        return Err(Error::BadLength { m: len, min: 1 });
    }
    let mut rng = trial_rng(seed, 0);
    let (states, m_act) = simulate_lazy_with(
        &RowSampler::new(m),
        &RowSampler::for_distribution(mu),
        alpha,
        len,
        &mut rng,
    );
    Ok(LazyTrajectory {
        states,
        m: len,
        m_act,
        seed,
        stream: 0,
        rng: RNG_ALGORITHM.to_string(),
        alpha,
        initial_law: mu.clone(),
    })
}

/// Probability that the coin construction emits `path`, obtained by summing
/// over every coin sequence: a tail keeps the state (weight `α`), a head
/// moves by `M` (weight `(1−α)M(i,j)`).
pub fn coin_path_probability(
    m: &StochasticMatrix,
    mu: &Distribution,
    alpha: f64,
    path: &[usize],
) -> f64 {
    let Some(&first) = path.first() else {
        return 0.0;
    };
    let steps = path.len() - 1;
    let mut total = 0.0;
    for coins in 0u64..(1u64 << steps) {
        let mut p = mu[first];
        for (t, w) in path.windows(2).enumerate() {
            let head = coins >> t & 1 == 1;
            p *= if head {
                (1.0 - alpha) * m.get(w[0], w[1])
            } else if w[0] == w[1] {
                alpha
            } else {
                0.0
            };
        }
        total += p;
    }
    total
}
