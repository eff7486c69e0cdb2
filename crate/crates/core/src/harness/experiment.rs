//! JSON experiment documents for the risk and sample-complexity runs.

use serde::{Deserialize, Serialize};

use super::{generate_family, EstimatorConfig, FamilyKind, FamilyParams, TaggedChain};
use crate::error::{Error, Result};

/// A generated or file-backed part of a chain family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySource {
    pub kind: FamilyKind,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "two")]
    pub d_min: usize,
    #[serde(default)]
    pub d_max: Option<usize>,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn quarter() -> f64 {
    0.25
}

fn hundred() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub estimator: EstimatorConfig,
    pub families: Vec<FamilySource>,
    /// Trajectory length for a single risk evaluation.
    #[serde(default)]
    pub m: Option<usize>,
    /// Length grid for a sample-complexity curve.
    #[serde(default)]
    pub grid: Option<Vec<usize>>,
    pub eps: f64,
    #[serde(default = "quarter")]
    pub delta: f64,
    #[serde(default = "hundred")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn build_family(&self) -> Result<Vec<TaggedChain>> {
        if self.families.is_empty() {
            return Err(Error::BadSpec("no chain families given".into()));
        }
        let mut out = Vec::new();
        for (i, f) in self.families.iter().enumerate() {
            let d_max = f.d_max.unwrap_or(f.d_min);
            let seed = f.seed ^ (i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
            out.extend(generate_family(
                f.kind, f.count, f.d_min, d_max, &f.params, seed,
            )?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_document() {
        let text = r#"{
            "estimator": {"kind": "matrix-extended", "alpha": 0.5},
            "families": [{"kind": "dirichlet-ergodic", "count": 3, "d_min": 2, "d_max": 4}],
            "eps": 0.1,
            "grid": [100, 1000]
        }"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.delta, 0.25);
        assert_eq!(c.trials, 100);
        let fam = c.build_family().unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(
            fam.iter().map(|c| c.chain.dim()).collect::<Vec<_>>(),
            vec![2, 3, 4]
        );
    }
}
