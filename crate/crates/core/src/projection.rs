//! ℓ1 projections onto the probability simplex and, row by row, onto the
//! set of stochastic matrices.
//!
//! ℓ1 projections are not unique. Mass is always added to, or removed from,
//! the lowest-index eligible coordinates first so the output is fully
//! determined by the input.

use serde::{Deserialize, Serialize};

use crate::chain::{Distribution, StochasticMatrix};
use crate::config::TOL;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub point: Distribution,
    /// `‖point − input‖₁`.
    pub distance: f64,
    /// Coordinates whose value changed.
    pub touched: Vec<usize>,
}

fn finish(x: &[f64], y: Vec<f64>) -> Result<ProjectionResult> {
    let distance = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
    let touched = x
        .iter()
        .zip(&y)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect();
    Ok(ProjectionResult {
        point: Distribution::new(y)?,
        distance,
        touched,
    })
}

/// Removes `excess` from the entries of `y`, lowest index first, never
/// pushing an entry below zero.
fn remove_greedily(y: &mut [f64], mut excess: f64) {
    for v in y.iter_mut() {
        if excess <= 0.0 {
            break;
        }
        let take = v.min(excess);
        *v -= take;
        excess -= take;
    }
}

/// ℓ1 projection of an arbitrary vector onto `Δ_d`.
///
/// Negative coordinates are zeroed. If nothing survives the result is the
/// uniform law. Otherwise with `s` the surviving mass, a deficit `1 − s` is
/// added to the first surviving coordinate and an excess `s − 1` is removed
/// greedily in index order. A surviving mass within `1e-12` of one is
/// left as is.
pub fn project_simplex_general(x: &[f64]) -> Result<ProjectionResult> {
    let d = x.len();
    if d == 0 {
        return Err(Error::EmptyVector);
    }
    if x.iter().all(|&v| v < 0.0) {
        return finish(x, vec![1.0 / d as f64; d]);
    }
    let mut y: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let s: f64 = y.iter().sum();
    if (s - 1.0).abs() <= TOL.validation {
        // Already a distribution up to rounding.
    } else if s < 1.0 {
        let first = x
            .iter()
            .position(|&v| v >= 0.0)
            .expect("some coordinate survives");
        y[first] += 1.0 - s;
    } else if s > 1.0 {
        remove_greedily(&mut y, s - 1.0);
    }
    finish(x, y)
}

/// ℓ1 projection of a vector whose coordinates sum to one.
///
/// Negatives are zeroed and their total mass `n` is absorbed by the
/// nonnegative coordinates in increasing index order, so the result moves
/// exactly `2n` and is never farther than `x` from any point of the simplex.
pub fn project_simplex_rowsum1(x: &[f64]) -> Result<ProjectionResult> {
    if x.is_empty() {
        return Err(Error::EmptyVector);
    }
    let deviation = x.iter().sum::<f64>() - 1.0;
    if deviation.abs() > TOL.row_sum {
        return Err(Error::RowSumNotOne { row: 0, deviation });
    }
    // With Σx = 1 the surviving mass is 1 + (negative mass), so this is
    // the excess branch of the general construction.
    project_simplex_general(x)
}

/// Projects every row of `a` with [`project_simplex_rowsum1`].
pub fn project_matrix(a: &Matrix) -> Result<StochasticMatrix> {
    let rows = project_matrix_rows(a)?;
    let raw = Matrix::from_rows(
        &rows
            .into_iter()
            .map(|r| r.point.into_vec())
            .collect::<Vec<_>>(),
    )?;
    Ok(StochasticMatrix::renormalized(raw))
}

/// Row-wise projection results, in row order.
pub fn project_matrix_rows(a: &Matrix) -> Result<Vec<ProjectionResult>> {
    a.rows()
        .enumerate()
        .map(|(i, row)| {
            project_simplex_rowsum1(row).map_err(|e| match e {
                Error::RowSumNotOne { deviation, .. } => Error::RowSumNotOne { row: i, deviation },
                other => other,
            })
        })
        .collect()
}
