//! Random chain families.

use rand::Rng;
use rand_distr::{Distribution as _, Gamma};
use serde::{Deserialize, Serialize};

use crate::chain::{self, StochasticMatrix};
use crate::error::{Error, Result};
use crate::io;
use crate::lazy::trial_rng;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Dirichlet rows blended with a little uniform mass; generically
    /// non-reversible.
    DirichletErgodic,
    /// Row-normalised random symmetric weights.
    ReversibleRandomWalk,
    /// Supported on a bipartition, so period 2.
    PeriodicBipartite,
    /// Every row equal to one random law.
    RankOne,
    /// A deterministic cycle leaking into Dirichlet rows.
    LeakyCycle,
    UserFile,
}

impl FamilyKind {
    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::DirichletErgodic => "dirichlet-ergodic",
            FamilyKind::ReversibleRandomWalk => "reversible-random-walk",
            FamilyKind::PeriodicBipartite => "periodic-bipartite",
            FamilyKind::RankOne => "rank-one",
            FamilyKind::LeakyCycle => "leaky-cycle",
            FamilyKind::UserFile => "user-file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyParams {
    /// Symmetric Dirichlet concentration (default 1).
    pub concentration: Option<f64>,
    /// Uniform mass blended into Dirichlet rows (default 1e-3).
    pub blend: Option<f64>,
    /// Weight on the random rows of a leaky cycle (default 0.1).
    pub leak: Option<f64>,
    /// Matrix file for `user-file`.
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFamilySpec {
    pub kind: FamilyKind,
    #[serde(default)]
    pub d: usize,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(default)]
    pub seed: u64,
}

/// A chain together with a name identifying it in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedChain {
    pub tag: String,
    pub chain: StochasticMatrix,
}

impl TaggedChain {
    pub fn new(tag: impl Into<String>, chain: StochasticMatrix) -> Self {
        Self {
            tag: tag.into(),
            chain,
        }
    }
}

fn dirichlet_row<R: Rng>(rng: &mut R, d: usize, concentration: f64, blend: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    let mut row: Vec<f64> = (0..d).map(|_| gamma.sample(rng)).collect();
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        row.iter_mut()
            .for_each(|v| *v = (1.0 - blend) * *v / s + blend / d as f64);
    } else {
        row.iter_mut().for_each(|v| *v = 1.0 / d as f64);
    }
    row
}

fn normalize_rows(w: Matrix) -> Matrix {
    let d = w.dim();
    let sums: Vec<f64> = w.rows().map(|r| r.iter().sum()).collect();
    Matrix::from_fn(d, |i, j| w[(i, j)] / sums[i])
}

pub fn generate_chain(spec: &ChainFamilySpec) -> Result<StochasticMatrix> {
    let d = spec.d;
    if spec.kind != FamilyKind::UserFile && d < 2 {
        return Err(Error::BadSpec(format!("d = {d}; need at least 2 states")));
    }
    let concentration = spec.params.concentration.unwrap_or(1.0);
    let blend = spec.params.blend.unwrap_or(1e-3);
    if !(concentration > 0.0) {
        return Err(Error::BadSpec(format!(
            "concentration {concentration} must be positive"
        )));
    }
    if !(blend > 0.0 && blend <= 1.0) {
        return Err(Error::BadSpec(format!("blend {blend} must lie in (0, 1]")));
    }
    let mut rng = trial_rng(spec.seed, spec.kind as u64);
    let chain = match spec.kind {
        FamilyKind::DirichletErgodic => {
            let rows: Vec<Vec<f64>> = (0..d)
                .map(|_| dirichlet_row(&mut rng, d, concentration, blend))
                .collect();
            StochasticMatrix::renormalized(Matrix::from_rows(&rows)?)
        }
        FamilyKind::ReversibleRandomWalk => {
            let mut w = Matrix::zeros(d);
            for i in 0..d {
                for j in i..d {
                    let v = rng.random::<f64>() + 1e-3;
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            StochasticMatrix::renormalized(normalize_rows(w))
        }
        FamilyKind::PeriodicBipartite => {
            let left = d.div_ceil(2);
            let mut w = Matrix::zeros(d);
            for i in 0..d {
                let (lo, hi) = if i < left { (left, d) } else { (0, left) };
                let row = dirichlet_row(&mut rng, hi - lo, concentration, blend);
                for (k, v) in row.into_iter().enumerate() {
                    w[(i, lo + k)] = v;
                }
            }
            StochasticMatrix::renormalized(normalize_rows(w))
        }
        FamilyKind::RankOne => {
            let row = dirichlet_row(&mut rng, d, concentration, blend);
            StochasticMatrix::renormalized(Matrix::from_fn(d, |_, j| row[j]))
        }
        FamilyKind::LeakyCycle => {
            let leak = spec.params.leak.unwrap_or(0.1);
            if !(leak > 0.0 && leak <= 1.0) {
                return Err(Error::BadSpec(format!("leak {leak} must lie in (0, 1]")));
            }
            let mut w = Matrix::zeros(d);
            for i in 0..d {
                let row = dirichlet_row(&mut rng, d, concentration, blend);
                for j in 0..d {
                    let cycle = if j == (i + 1) % d { 1.0 } else { 0.0 };
                    w[(i, j)] = (1.0 - leak) * cycle + leak * row[j];
                }
            }
            StochasticMatrix::renormalized(w)
        }
        FamilyKind::UserFile => {
            let path = spec
                .params
                .path
                .as_deref()
                .ok_or_else(|| Error::BadSpec("user-file needs params.path".into()))?;
            io::read_stochastic(std::path::Path::new(path))?
        }
    };
    check_promise(spec.kind, &chain)?;
    Ok(chain)
}

fn check_promise(kind: FamilyKind, m: &StochasticMatrix) -> Result<()> {
    let broken = |what: &str| Err(Error::BadSpec(format!("{} output {what}", kind.label())));
    match kind {
        FamilyKind::DirichletErgodic | FamilyKind::RankOne | FamilyKind::LeakyCycle => {
            if !chain::is_ergodic(m) {
                return broken("is not ergodic");
            }
        }
        FamilyKind::ReversibleRandomWalk => {
            if !chain::is_ergodic(m) || !chain::is_reversible(m)? {
                return broken("is not reversible and ergodic");
            }
        }
        FamilyKind::PeriodicBipartite => {
            if chain::period(m)? != 2 {
                return broken("does not have period 2");
            }
        }
        FamilyKind::UserFile => {}
    }
    Ok(())
}

/// `count` chains of one kind with `d` cycling through `d_min..=d_max` and
/// seeds derived from `seed`.
pub fn generate_family(
    kind: FamilyKind,
    count: usize,
    d_min: usize,
    d_max: usize,
    params: &FamilyParams,
    seed: u64,
) -> Result<Vec<TaggedChain>> {
    if d_min < 2 || d_max < d_min {
        return Err(Error::BadSpec(format!(
            "bad dimension range {d_min}..={d_max}"
        )));
    }
    let span = d_max - d_min + 1;
    (0..count)
        .map(|i| {
            let spec = ChainFamilySpec {
                kind,
                d: d_min + i % span,
                params: params.clone(),
                seed: seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            };
            Ok(TaggedChain::new(
                format!("{}#{i}/d{}", kind.label(), spec.d),
                generate_chain(&spec)?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: FamilyKind, d: usize, seed: u64) -> ChainFamilySpec {
        ChainFamilySpec {
            kind,
            d,
            params: FamilyParams::default(),
            seed,
        }
    }

    #[test]
    fn generators_keep_their_promises() {
        for seed in 0..20 {
            for d in 2..=7 {
                let r = generate_chain(&spec(FamilyKind::ReversibleRandomWalk, d, seed)).unwrap();
                assert_eq!(chain::is_reversible(&r), Ok(true));
                let p = generate_chain(&spec(FamilyKind::PeriodicBipartite, d, seed)).unwrap();
                assert_eq!(chain::period(&p), Ok(2));
                let e = generate_chain(&spec(FamilyKind::DirichletErgodic, d, seed)).unwrap();
                assert!(chain::is_ergodic(&e));
                let c = generate_chain(&spec(FamilyKind::LeakyCycle, d, seed)).unwrap();
                assert!(chain::is_ergodic(&c));
            }
        }
    }

    #[test]
    fn rank_one_mixes_in_one_step() {
        for seed in 0..10 {
            let m = generate_chain(&spec(FamilyKind::RankOne, 4, seed)).unwrap();
            let g = crate::spectral::pseudo_spectral_gap(&m, 1000).unwrap();
            assert!((g.value - 1.0).abs() < 1e-9);
            assert_eq!(crate::spectral::mixing_time(&m, 0.25), Ok(1));
        }
    }

    #[test]
    fn same_seed_same_chain() {
        let a = generate_chain(&spec(FamilyKind::DirichletErgodic, 5, 9)).unwrap();
        let b = generate_chain(&spec(FamilyKind::DirichletErgodic, 5, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(matches!(
            generate_chain(&spec(FamilyKind::RankOne, 1, 0)),
            Err(Error::BadSpec(_))
        ));
        assert!(matches!(
            generate_chain(&spec(FamilyKind::UserFile, 0, 0)),
            Err(Error::BadSpec(_))
        ));
    }
}
