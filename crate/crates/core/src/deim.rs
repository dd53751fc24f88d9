//! Discrete empirical interpolation of the nonlinear vector, and the
//! energy-stability time-step bounds of the reduced model.
//!
//! Given an orthonormal mode matrix `W` for the nonlinear snapshots, the
//! greedy selection picks `M` interpolation rows `P`, and the nonlinear
//! vector is approximated by `f ~ Q P^T f` with the precomputed
//! `Q = W (P^T W)^{-1}`. For the dG discretization each sampled entry
//! touches a single element, so the reduced nonlinearity costs `O(n_q M)`
//! per evaluation instead of a full-order sweep.
//!
//! The interpolation error obeys the a priori bound
//! `|f - Q P^T f|_2 <= |(P^T W)^{-1}|_2 |(I - W W^T) f|_2`, which in turn
//! bounds the step sizes for which the lifted reduced solution still
//! decreases the discrete energy; [`stability_bounds`] reports those
//! per-step and global bounds.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, Mat};

use crate::assembly::{
    avf_nonlinear_entry, avf_nonlinear_entry_grad, eval_nonlinear, nonlinear_entry, MassMatrix,
};
use crate::error::Error;
use crate::mesh::Mesh;
use crate::potential::{ClampPolicy, Potential};
use crate::space::{DgSpace, N_LOC};
use crate::Result;

/// Greedy DEIM row selection.
///
/// The first index is the largest-magnitude entry of the first mode; each
/// following index is the largest-magnitude entry of the residual between
/// the next mode and its interpolation on the rows picked so far. Exact
/// magnitude ties go to the lowest row index.
pub fn deim_select(w: &Mat<f64>) -> Result<(Vec<usize>, Mat<f64>)> {
    let m = w.ncols();
    if m == 0 {
        return Err(Error::DimensionMismatch("DEIM needs at least one mode".into()));
    }
    let n = w.nrows();
    let mut indices = Vec::with_capacity(m);
    indices.push(argmax_abs(&w.col(0).to_owned()));

    for k in 1..m {
        // Interpolate mode k on the current rows and take the residual.
        let sub = gather_rows(w, &indices, k);
        let rhs = Col::<f64>::from_fn(k, |i| w[(indices[i], k)]);
        let lu = PartialPivLu::new(sub.as_ref());
        let c = lu.solve(&rhs);
        let mut residual = w.col(k).to_owned();
        for j in 0..k {
            let wj = w.col(j);
            for i in 0..n {
                residual[i] -= c[j] * wj[i];
            }
        }
        let idx = argmax_abs(&residual);
        if residual[idx].abs() <= 1e-13 * w.col(k).norm_l2().max(1e-300) {
            return Err(Error::SingularInterpolation { selected: k, requested: m });
        }
        indices.push(idx);
    }

    // Q = W (P^T W)^{-1}; solve (P^T W)^T Q^T = W^T.
    let ptw = gather_rows(w, &indices, m);
    let lu = PartialPivLu::new(ptw.transpose().to_owned().as_ref());
    let qt = lu.solve(w.transpose().to_owned());
    Ok((indices, qt.transpose().to_owned()))
}

fn argmax_abs(v: &Col<f64>) -> usize {
    let mut best = 0;
    let mut best_abs = f64::NEG_INFINITY;
    for i in 0..v.nrows() {
        let a = v[i].abs();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    best
}

/// Rows `indices[0..k]` of the first `k` columns of `w`.
fn gather_rows(w: &Mat<f64>, indices: &[usize], k: usize) -> Mat<f64> {
    Mat::from_fn(k, k, |i, j| w[(indices[i], j)])
}

/// Precomputed DEIM data tied to a reduced basis.
#[derive(Debug, Clone)]
pub struct DeimData {
    /// Orthonormal nonlinear mode matrix `W`.
    pub modes: Mat<f64>,
    /// Selected interpolation rows (the `P` columns).
    pub indices: Vec<usize>,
    /// `Q = W (P^T W)^{-1}`.
    pub q: Mat<f64>,
    /// `Psi^T Q`, the reduced-side factor.
    pub psi_t_q: Mat<f64>,
    /// `|(P^T W)^{-1}|_2`.
    pub norm_ptw_inv: f64,
    /// Condition number of `P^T W`.
    pub cond_ptw: f64,
    /// Element and local basis index of each sampled row.
    sample_elements: Vec<usize>,
    sample_local: Vec<usize>,
    /// Rows of Psi for each sampled element (3 x N each).
    psi_sample_rows: Vec<Mat<f64>>,
}

impl DeimData {
    /// Run the greedy selection for `w` and precompute everything the
    /// online phase needs against the reduced basis `psi`.
    pub fn new(w: Mat<f64>, psi: &Mat<f64>) -> Result<Self> {
        if w.nrows() != psi.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "DEIM modes have {} rows, basis has {}",
                w.nrows(),
                psi.nrows()
            )));
        }
        let (indices, q) = deim_select(&w)?;
        let m = indices.len();

        let ptw = gather_rows(&w, &indices, m);
        let svd = ptw
            .svd()
            .map_err(|e| Error::LinearSolve(format!("SVD of P^T W failed: {e:?}")))?;
        let s = svd.S();
        let smax = s[0];
        let smin = s[m - 1];
        let norm_ptw_inv = 1.0 / smin;
        let cond_ptw = smax / smin;

        let psi_t_q = psi.transpose() * &q;

        let n_modes = psi.ncols();
        let mut sample_elements = Vec::with_capacity(m);
        let mut sample_local = Vec::with_capacity(m);
        let mut psi_sample_rows = Vec::with_capacity(m);
        for &row in &indices {
            let element = row / N_LOC;
            sample_elements.push(element);
            sample_local.push(row % N_LOC);
            psi_sample_rows.push(Mat::from_fn(N_LOC, n_modes, |i, j| {
                psi[(N_LOC * element + i, j)]
            }));
        }

        Ok(Self {
            modes: w,
            indices,
            q,
            psi_t_q,
            norm_ptw_inv,
            cond_ptw,
            sample_elements,
            sample_local,
            psi_sample_rows,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.indices.len()
    }

    /// Element-local coefficients of `Psi u_r` on the sampled element `k`.
    fn lifted_coeffs(&self, k: usize, u_r: &Col<f64>) -> [f64; 3] {
        let rows = &self.psi_sample_rows[k];
        let mut c = [0.0; 3];
        for i in 0..N_LOC {
            let mut acc = 0.0;
            for j in 0..rows.ncols() {
                acc += rows[(i, j)] * u_r[j];
            }
            c[i] = acc;
        }
        c
    }

    /// Sampled entries of the plain nonlinear vector `f(Psi u_r)`.
    pub fn sampled_nonlinear(
        &self,
        u_r: &Col<f64>,
        potential: &Potential,
        space: &DgSpace,
        clamp: ClampPolicy,
    ) -> Result<Col<f64>> {
        let m = self.n_samples();
        let mut fm = Col::zeros(m);
        for k in 0..m {
            let coeffs = self.lifted_coeffs(k, u_r);
            fm[k] = nonlinear_entry(
                space,
                &coeffs,
                self.sample_elements[k],
                self.sample_local[k],
                potential,
                clamp,
            )?;
        }
        Ok(fm)
    }

    /// Sampled entries of the AVF pair integral between two reduced
    /// states.
    pub fn sampled_avf(
        &self,
        curr_r: &Col<f64>,
        next_r: &Col<f64>,
        potential: &Potential,
        space: &DgSpace,
        clamp: ClampPolicy,
    ) -> Result<Col<f64>> {
        let m = self.n_samples();
        let mut bm = Col::zeros(m);
        for k in 0..m {
            let ca = self.lifted_coeffs(k, curr_r);
            let cb = self.lifted_coeffs(k, next_r);
            bm[k] = avf_nonlinear_entry(
                space,
                &ca,
                &cb,
                self.sample_elements[k],
                self.sample_local[k],
                potential,
                clamp,
            )?;
        }
        Ok(bm)
    }

    /// Jacobian of the sampled AVF entries with respect to the reduced
    /// next state: an `M x N` matrix assembled element-locally.
    pub fn sampled_avf_jacobian(
        &self,
        curr_r: &Col<f64>,
        next_r: &Col<f64>,
        potential: &Potential,
        space: &DgSpace,
        clamp: ClampPolicy,
    ) -> Result<Mat<f64>> {
        let m = self.n_samples();
        let n = self.psi_t_q.nrows();
        let mut jac = Mat::zeros(m, n);
        for k in 0..m {
            let ca = self.lifted_coeffs(k, curr_r);
            let cb = self.lifted_coeffs(k, next_r);
            let grad = avf_nonlinear_entry_grad(
                space,
                &ca,
                &cb,
                self.sample_elements[k],
                self.sample_local[k],
                potential,
                clamp,
            )?;
            let rows = &self.psi_sample_rows[k];
            for j in 0..n {
                let mut acc = 0.0;
                for i in 0..N_LOC {
                    acc += grad[i] * rows[(i, j)];
                }
                jac[(k, j)] = acc;
            }
        }
        Ok(jac)
    }
}

/// Reduced DEIM evaluation of the plain nonlinearity:
/// `Psi^T Q f_m(Psi u_r)` where `f_m` holds only the sampled entries.
pub fn deim_eval(
    u_r: &Col<f64>,
    data: &DeimData,
    potential: &Potential,
    space: &DgSpace,
    clamp: ClampPolicy,
) -> Result<Col<f64>> {
    if u_r.nrows() != data.psi_t_q.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "reduced state has {} entries, basis has {} modes",
            u_r.nrows(),
            data.psi_t_q.nrows()
        )));
    }
    let fm = data.sampled_nonlinear(u_r, potential, space, clamp)?;
    Ok(&data.psi_t_q * &fm)
}

/// Right-hand side of the DEIM a priori error bound
/// `|(P^T W)^{-1}|_2 * |(I - W W^T) v|_2`.
pub fn deim_error_bound(v: &Col<f64>, data: &DeimData) -> f64 {
    data.norm_ptw_inv * orthogonal_defect(v, &data.modes)
}

/// `|(I - W W^T) v|_2`.
fn orthogonal_defect(v: &Col<f64>, w: &Mat<f64>) -> f64 {
    let coeffs = w.transpose() * v;
    let proj = w * &coeffs;
    let diff = v - &proj;
    diff.norm_l2()
}

/// Energy-stability report for a reduced trajectory solved with DEIM.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// `|R^{-1}|_2` for the Cholesky factor of the mass matrix.
    pub norm_r_inv: f64,
    /// `|(P^T W)^{-1}|_2`.
    pub norm_ptw_inv: f64,
    /// Per-step admissible step sizes (steps `1 .. J-1`).
    pub per_step_bounds: Vec<f64>,
    /// Global admissible step size over the whole trajectory.
    pub global_bound: f64,
    pub dt_used: f64,
    /// Whether `dt_used <= global_bound`.
    pub satisfied: bool,
    /// Steps skipped because the state difference was numerically zero.
    pub skipped_steps: Vec<usize>,
}

/// Evaluate the per-step and global energy-stability step bounds along a
/// reduced trajectory.
///
/// The defect norm is evaluated at the midpoint of each step, the
/// canonical surrogate for the mean-value point of the bound, so the
/// report is an estimate rather than a certificate.
pub fn stability_bounds(
    reduced: &crate::avf::Trajectory,
    psi: &Mat<f64>,
    data: &DeimData,
    mass: &MassMatrix,
    mesh: &Mesh,
    space: &DgSpace,
    potential: &Potential,
    dt: f64,
    clamp: ClampPolicy,
) -> Result<StabilityReport> {
    let levels = reduced.n_levels();
    if levels < 3 {
        return Err(Error::DimensionMismatch(
            "stability bounds need a trajectory with at least 2 steps".into(),
        ));
    }
    let norm_r_inv = mass.norm_r_inv();
    let norm_ptw_inv = data.norm_ptw_inv;

    let mut per_step = Vec::new();
    let mut skipped = Vec::new();
    let mut min_diff = f64::INFINITY;
    let mut max_defect: f64 = 0.0;

    // Steps n = 1 .. J-1, matching the global bound's index range.
    for n in 1..levels - 1 {
        let curr = reduced.level(n);
        let next = reduced.level(n + 1);
        let diff: Col<f64> = &next - &curr;
        // M-orthonormal basis: the lifted L2 norm is the Euclidean norm
        // of the reduced coefficients.
        let diff_l2 = diff.norm_l2();
        if diff_l2 < 1e-14 {
            skipped.push(n);
            continue;
        }
        let mid: Col<f64> = faer::Scale(0.5) * &(&curr + &next);
        let lifted = psi * &mid;
        let f_full = eval_nonlinear(&lifted, potential, mesh, space, clamp)?;
        let defect = orthogonal_defect(&f_full, &data.modes);

        min_diff = min_diff.min(diff_l2);
        max_defect = max_defect.max(defect);
        let denom = norm_r_inv * norm_ptw_inv * defect;
        per_step.push(if denom == 0.0 { f64::INFINITY } else { diff_l2 / denom });
    }

    let global_bound = if per_step.is_empty() {
        f64::INFINITY
    } else {
        let denom = norm_r_inv * norm_ptw_inv * max_defect;
        if denom == 0.0 {
            f64::INFINITY
        } else {
            min_diff / denom
        }
    };

    Ok(StabilityReport {
        norm_r_inv,
        norm_ptw_inv,
        per_step_bounds: per_step,
        global_bound,
        dt_used: dt,
        satisfied: dt <= global_bound,
        skipped_steps: skipped,
    })
}
