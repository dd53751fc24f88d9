//! Weighted proper orthogonal decomposition and the Galerkin reduced
//! operators.
//!
//! `pod(B, X, k)` returns the k leading modes of the snapshot matrix `B`
//! in the `X`-weighted inner product. With `X = M = R^T R` the modes are
//! the left singular vectors of `R B` mapped back through `R^{-1}`
//! (the generalized SVD route), which makes them `M`-orthonormal by
//! construction: `Psi^T M Psi = I`.

use faer::{Col, Mat};

use crate::assembly::MassMatrix;
use crate::error::Error;
use crate::Result;

/// Relative singular value threshold below which a direction counts as
/// numerically rank deficient.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Inner product weighting for [`pod`].
#[derive(Clone, Copy)]
pub enum PodWeight<'a> {
    Identity,
    Mass(&'a MassMatrix),
}

/// POD output: weighted-orthonormal modes and the full singular value
/// spectrum (retained and discarded) of the weighted snapshot matrix.
#[derive(Debug, Clone)]
pub struct PodResult {
    pub modes: Mat<f64>,
    pub singular_values: Vec<f64>,
}

/// Leading `k` POD modes of `b` in the weighted inner product.
pub fn pod(b: &Mat<f64>, weight: PodWeight<'_>, k: usize) -> Result<PodResult> {
    let weighted = match weight {
        PodWeight::Identity => b.clone(),
        PodWeight::Mass(m) => m.apply_r_mat(b),
    };
    let svd = weighted
        .thin_svd()
        .map_err(|e| Error::LinearSolve(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S();
    let n_sv = s.dim();
    let singular_values: Vec<f64> = (0..n_sv).map(|i| s[i]).collect();

    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&sv| sv > RANK_CUTOFF * sigma_max).count();
    if k == 0 || k > rank {
        return Err(Error::RankDeficiency { requested: k, rank });
    }

    let u_k = svd.U().submatrix(0, 0, b.nrows(), k).to_owned();
    let mut modes = match weight {
        PodWeight::Identity => u_k,
        PodWeight::Mass(m) => m.solve_r_mat(&u_k),
    };
    fix_signs(&mut modes);
    Ok(PodResult { modes, singular_values })
}

/// Numerical rank of a snapshot matrix in the weighted inner product,
/// with a relative singular value cutoff.
pub fn numerical_rank(b: &Mat<f64>, weight: PodWeight<'_>, rel_cutoff: f64) -> Result<usize> {
    let weighted = match weight {
        PodWeight::Identity => b.clone(),
        PodWeight::Mass(m) => m.apply_r_mat(b),
    };
    let svd = weighted
        .thin_svd()
        .map_err(|e| Error::LinearSolve(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S();
    let sigma_max = if s.dim() > 0 { s[0] } else { 0.0 };
    Ok((0..s.dim()).filter(|&i| s[i] > rel_cutoff * sigma_max).count())
}

/// Deterministic sign convention: the entry of largest magnitude in each
/// mode is made positive (lowest index on exact ties).
fn fix_signs(modes: &mut Mat<f64>) {
    for c in 0..modes.ncols() {
        let mut best = 0;
        let mut best_abs = 0.0;
        for r in 0..modes.nrows() {
            let a = modes[(r, c)].abs();
            if a > best_abs {
                best_abs = a;
                best = r;
            }
        }
        if modes[(best, c)] < 0.0 {
            for r in 0..modes.nrows() {
                modes[(r, c)] = -modes[(r, c)];
            }
        }
    }
}

/// M-orthonormal reduced basis.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    /// Mode matrix Psi, one column per basis function.
    pub psi: Mat<f64>,
    /// Singular value spectrum associated with the POD (or, for a
    /// greedy-built basis, the dominant singular value that produced
    /// each mode).
    pub singular_values: Vec<f64>,
}

impl ReducedBasis {
    pub fn n_modes(&self) -> usize {
        self.psi.ncols()
    }

    /// Largest deviation of `Psi^T M Psi` from the identity.
    pub fn orthonormality_defect(&self, mass: &MassMatrix) -> f64 {
        let n = self.n_modes();
        let mut defect = 0.0f64;
        for i in 0..n {
            let ci = self.psi.col(i).to_owned();
            for j in i..n {
                let cj = self.psi.col(j).to_owned();
                let dot = mass.inner(&ci, &cj);
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((dot - want).abs());
            }
        }
        defect
    }
}

/// Reduced operators; the reduced mass matrix is the identity because the
/// basis is M-orthonormal, and `Ar(eps) = eps * (Psi^T A1 Psi)` by the
/// affine dependence of the SIPG form on the diffusivity.
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    /// Cached `Psi^T A1 Psi` so changing eps is a scalar rescale.
    pub ar_unit: Mat<f64>,
    pub epsilon: f64,
}

impl ReducedOperators {
    pub fn dim(&self) -> usize {
        self.ar_unit.nrows()
    }

    /// Reduced stiffness at the stored diffusivity.
    pub fn ar(&self) -> Mat<f64> {
        self.ar_scaled(self.epsilon)
    }

    /// Reduced stiffness at a different diffusivity, reusing the cache.
    pub fn ar_scaled(&self, epsilon: f64) -> Mat<f64> {
        faer::Scale(epsilon) * &self.ar_unit
    }
}

/// Galerkin-reduce the stiffness: `Ar = eps * Psi^T A1 Psi`.
pub fn build_reduced_operators(
    psi: &Mat<f64>,
    a1: faer::sparse::SparseColMatRef<'_, usize, f64>,
    epsilon: f64,
) -> ReducedOperators {
    let a1_psi = a1 * psi;
    let ar_unit = psi.transpose() * &a1_psi;
    ReducedOperators { ar_unit, epsilon }
}

/// Lift reduced coefficients to the full space: `u = Psi u_r`.
pub fn lift(psi: &Mat<f64>, u_r: &Col<f64>) -> Col<f64> {
    psi * u_r
}

/// M-orthogonal projection onto the span of Psi; returns the projection
/// and the error vector. An empty basis projects to zero.
pub fn project_onto_basis(
    u: &Col<f64>,
    psi: &Mat<f64>,
    mass: &MassMatrix,
) -> (Col<f64>, Col<f64>) {
    if psi.ncols() == 0 {
        return (Col::zeros(u.nrows()), u.clone());
    }
    let coeffs = reduce_state(psi, mass, u);
    let proj = lift(psi, &coeffs);
    let err = u - &proj;
    (proj, err)
}

/// Reduced coordinates of a full state: `Psi^T M u`.
pub fn reduce_state(psi: &Mat<f64>, mass: &MassMatrix, u: &Col<f64>) -> Col<f64> {
    let mu = mass.apply(u);
    psi.transpose() * &mu
}
