//! Numerical tolerances shared by every module.

/// Tolerances used for validation and for derived-identity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Row sums and probability vectors must sum to one within this.
    pub validation: f64,
    /// Derived identities such as `πM = π` or `Qᵀ = Q`.
    pub identity: f64,
    /// Spectral invariants (`λ₁ = 1`, gap inequalities).
    pub spectral: f64,
    /// Jacobi sweeps stop once the off-diagonal Frobenius norm is below this.
    pub jacobi_off_diagonal: f64,
    pub jacobi_max_sweeps: usize,
    /// Inputs to the sum-one projection and to `project_matrix`.
    pub row_sum: f64,
}

impl Tolerances {
    pub const fn new() -> Self {
        Self {
            validation: 1e-12,
            identity: 1e-10,
            spectral: 1e-9,
            jacobi_off_diagonal: 1e-12,
            jacobi_max_sweeps: 100,
            row_sum: 1e-10,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new()
    }
}

pub const TOL: Tolerances = Tolerances::new();
