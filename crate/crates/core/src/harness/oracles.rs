//! Brute-force reference computations used by the verification suite.

/// Smallest ℓ1 distance from `x` to a simplex point whose coordinates are
/// multiples of `1/n`. Exhaustive over all compositions of `n` into
/// `x.len()` parts.
pub fn grid_simplex_distance(x: &[f64], n: u32) -> f64 {
    assert!(!x.is_empty(), "empty vector");
    let step = 1.0 / n as f64;
    let d = x.len();
    let mut best = f64::INFINITY;
    // Last coordinate is determined by the rest.
    fn walk(x: &[f64], i: usize, left: u32, acc: f64, step: f64, best: &mut f64) {
        let d = x.len();
        if acc >= *best {
            return;
        }
        if i == d - 1 {
            let v = acc + (x[i] - left as f64 * step).abs();
            if v < *best {
                *best = v;
            }
            return;
        }
        for k in 0..=left {
            let cost = (x[i] - k as f64 * step).abs();
            walk(x, i + 1, left - k, acc + cost, step, best);
        }
    }
    if d == 1 {
        return (x[0] - 1.0).abs();
    }
    walk(x, 0, n, 0.0, step, &mut best);
    best
}

/// Period of a matrix's positive graph as the gcd of all `t ≤ limit` with a
/// positive diagonal entry in `Mᵗ`. Exact for irreducible chains once
/// `limit ≥ 2d²`.
pub fn period_by_powers(m: &crate::Matrix, limit: usize) -> usize {
    let d = m.dim();
    let support = crate::Matrix::from_fn(d, |i, j| if m[(i, j)] > 0.0 { 1.0 } else { 0.0 });
    let mut power = support.clone();
    let mut g = 0usize;
    for t in 1..=limit {
        if (0..d).any(|i| power[(i, i)] > 0.0) {
            g = gcd(g, t);
        }
        let next = power.mul(&support);
        power = crate::Matrix::from_fn(d, |i, j| if next[(i, j)] > 0.0 { 1.0 } else { 0.0 });
    }
    g
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_distance_of_simplex_point_is_zero() {
        assert!(grid_simplex_distance(&[0.25, 0.5, 0.25], 100) < 1e-12);
    }

    #[test]
    fn grid_distance_matches_known_projection() {
        let v = grid_simplex_distance(&[0.2, 0.9, 0.3], 1000);
        assert!((v - 0.4).abs() < 1e-9);
    }

    #[test]
    fn power_period_of_cycle() {
        let c = crate::chain::examples::three_cycle();
        assert_eq!(period_by_powers(c.matrix(), 18), 3);
    }
}
