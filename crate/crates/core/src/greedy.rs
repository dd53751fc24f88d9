//! POD-greedy adaptive sampling over a parameter training set.
//!
//! Each iteration solves the full-order model at the currently selected
//! parameter (cached if already solved), extends the basis with the
//! dominant POD mode of the projection errors of that trajectory, builds
//! a temporary inner DEIM basis from the nonlinear snapshots of all
//! solved parameters, solves the reduced model at every training
//! parameter with that DEIM data, and picks the next parameter as the
//! argmax of a residual-based error indicator. The loop stops when the
//! indicator falls below the tolerance or the basis reaches its maximum
//! size. Afterwards the outer DEIM basis is rebuilt from the concatenated
//! nonlinear snapshots of the selected parameters, in selection order.
//!
//! The indicator plugs the lifted reduced trajectory into the full-order
//! AVF step equation and accumulates dual norms of the residuals:
//! `Delta = (dt * sum_n |R_h(u_r^n)|_dual)^(1/2)`. The dual norm is
//! either the discrete H^-1 norm through the Riesz map `K = M + A1`
//! (SPD on the dG space because A1 carries the jump penalty), or a
//! cheaper `M^{-1}`-weighted surrogate.

use faer::sparse::linalg::solvers::Llt;
use faer::{Col, Mat};

use crate::assembly::{avf_nonlinear, eval_nonlinear, FomOperators};
use crate::avf::{solve, EnergyCheck, NewtonConfig, TimeGrid, Trajectory};
use crate::deim::DeimData;
use crate::error::Error;
use crate::mesh::Mesh;
use crate::pod::{numerical_rank, pod, reduce_state, PodWeight, ReducedBasis};
use crate::potential::{ClampPolicy, Potential};
use crate::problem::ProblemSetup;
use crate::rom::{RomNonlinearity, RomSystem};
use crate::space::DgSpace;
use crate::Result;

/// Dual norm used by the error indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorNorm {
    /// Discrete H^-1 norm via the factorized Riesz map `K = M + A1`.
    DualH1,
    /// `sqrt(r^T M^{-1} r)`, cheaper and rank-equivalent in practice.
    L2Surrogate,
}

/// Whether the indicator's nonlinear residual term goes through the inner
/// DEIM interpolation or is evaluated exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorNonlinearity {
    Deim,
    Exact,
}

#[derive(Debug, Clone)]
pub struct GreedyConfig {
    pub train_set: Vec<f64>,
    /// Greedy tolerance on the max indicator.
    pub tol: f64,
    /// Maximum number of basis functions.
    pub n_max: usize,
    /// Outer DEIM size (clamped to the numerical rank of the snapshot
    /// set, which is reported in the result).
    pub m_deim: usize,
    pub indicator_norm: IndicatorNorm,
    pub indicator_nonlinearity: IndicatorNonlinearity,
    /// Relative singular value cutoff for the inner DEIM rank.
    pub inner_rank_cutoff: f64,
    /// Cap on the inner DEIM size; the discarded tail is far below the
    /// indicator scale at this size.
    pub inner_max_modes: usize,
    pub newton: NewtonConfig,
}

impl GreedyConfig {
    pub fn new(train_set: Vec<f64>, tol: f64, n_max: usize, m_deim: usize) -> Result<Self> {
        if train_set.is_empty() {
            return Err(Error::Config("greedy training set is empty".into()));
        }
        if tol <= 0.0 || n_max == 0 {
            return Err(Error::Config("greedy needs tol > 0 and n_max >= 1".into()));
        }
        Ok(Self {
            train_set,
            tol,
            n_max,
            m_deim,
            indicator_norm: IndicatorNorm::DualH1,
            indicator_nonlinearity: IndicatorNonlinearity::Deim,
            inner_rank_cutoff: 1e-10,
            inner_max_modes: 200,
            newton: NewtonConfig::default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TolReached,
    MaxModesReached,
}

/// A solved full-order run kept in the greedy cache.
pub struct FomRun {
    pub mu: f64,
    pub trajectory: Trajectory,
    /// Nonlinear snapshots `f(u^n)` for `n = 1..J`, one column each,
    /// recorded at every accepted time level.
    pub nonlinear_snapshots: Mat<f64>,
}

pub struct GreedyResult {
    pub basis: ReducedBasis,
    pub outer_deim: DeimData,
    /// Outer DEIM size actually used (min of the request and the rank).
    pub outer_deim_size: usize,
    /// Solved parameters in selection order.
    pub selected: Vec<f64>,
    /// Indicator table, one row per iteration, one column per training
    /// parameter (NaN marks a skipped reduced solve).
    pub indicator_history: Vec<Vec<f64>>,
    pub termination: Termination,
    pub fom_solve_count: usize,
    pub cache_hits: usize,
    /// Reduced solves that failed, with the iteration and reason.
    pub skipped: Vec<(usize, f64, String)>,
    pub fom_cache: Vec<FomRun>,
}

impl GreedyResult {
    /// Max indicator over the training set per iteration.
    pub fn max_indicator_per_iteration(&self) -> Vec<f64> {
        self.indicator_history
            .iter()
            .map(|row| row.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max))
            .collect()
    }
}

/// Factorized Riesz map for the dual norm.
pub struct RieszSolver {
    llt: Llt<usize, f64>,
}

impl RieszSolver {
    /// Factorize `K = M + A1` once.
    pub fn new(ops: &FomOperators) -> Result<Self> {
        let k = ops.compose(1.0, 1.0, None);
        let llt = k
            .sp_cholesky(faer::Side::Lower)
            .map_err(|e| Error::LinearSolve(format!("Riesz map factorization failed: {e:?}")))?;
        Ok(Self { llt })
    }

    /// `sqrt(r^T K^{-1} r)` per column, solved in one batch.
    pub fn dual_norms(&self, residuals: &Mat<f64>) -> Vec<f64> {
        use faer::linalg::solvers::Solve;
        let x = self.llt.solve(residuals);
        (0..residuals.ncols())
            .map(|c| {
                let mut acc = 0.0;
                for r in 0..residuals.nrows() {
                    acc += residuals[(r, c)] * x[(r, c)];
                }
                acc.max(0.0).sqrt()
            })
            .collect()
    }
}

/// Residual-based error indicator of a reduced trajectory at one
/// parameter value.
#[allow(clippy::too_many_arguments)]
pub fn error_indicator(
    reduced: &Trajectory,
    psi: &Mat<f64>,
    ops: &FomOperators,
    mesh: &Mesh,
    space: &DgSpace,
    potential: &Potential,
    epsilon: f64,
    grid: &TimeGrid,
    norm: IndicatorNorm,
    riesz: Option<&RieszSolver>,
    inner_deim: Option<&DeimData>,
    clamp: ClampPolicy,
) -> Result<f64> {
    let j = grid.steps;
    if reduced.n_levels() != j + 1 {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} levels, grid has {}",
            reduced.n_levels(),
            j + 1
        )));
    }
    let n_dof = space.n_dof;
    let mut residuals = Mat::zeros(n_dof, j);

    let mut prev_r = reduced.level(0);
    let mut prev = psi * &prev_r;
    for n in 1..=j {
        let curr_r = reduced.level(n);
        let curr = psi * &curr_r;
        let diff: Col<f64> = &curr - &prev;
        let sum: Col<f64> = &curr + &prev;
        let m_diff = ops.mass.apply(&diff);
        let a_sum = ops.apply_a1(&sum);
        let b = match inner_deim {
            Some(data) => {
                let bm = data.sampled_avf(&prev_r, &curr_r, potential, space, clamp)?;
                &data.q * &bm
            }
            None => avf_nonlinear(&prev, &curr, potential, mesh, space, clamp)?,
        };
        for i in 0..n_dof {
            residuals[(i, n - 1)] =
                m_diff[i] / grid.dt + 0.5 * epsilon * a_sum[i] + b[i];
        }
        prev_r = curr_r;
        prev = curr;
    }

    let norms: Vec<f64> = match norm {
        IndicatorNorm::DualH1 => {
            let solver = riesz.ok_or_else(|| {
                Error::Config("DualH1 indicator needs a Riesz solver".into())
            })?;
            solver.dual_norms(&residuals)
        }
        IndicatorNorm::L2Surrogate => (0..j)
            .map(|c| {
                let r = residuals.col(c).to_owned();
                let x = ops.mass.solve(&r);
                let mut acc = 0.0;
                for i in 0..n_dof {
                    acc += r[i] * x[i];
                }
                acc.max(0.0).sqrt()
            })
            .collect(),
    };

    Ok((grid.dt * norms.iter().sum::<f64>()).sqrt())
}

/// Run the POD-greedy sampling loop.
pub fn pod_greedy(setup: &ProblemSetup, config: &GreedyConfig) -> Result<GreedyResult> {
    let n_dof = setup.space.n_dof;
    let n_train = config.train_set.len();
    let riesz = match config.indicator_norm {
        IndicatorNorm::DualH1 => Some(RieszSolver::new(&setup.ops)?),
        IndicatorNorm::L2Surrogate => None,
    };

    let mut cache: Vec<FomRun> = Vec::new();
    let mut solved_of_train: Vec<Option<usize>> = vec![None; n_train];
    let mut selected: Vec<f64> = Vec::new();
    let mut fom_solve_count = 0;
    let mut cache_hits = 0;
    let mut skipped = Vec::new();

    let mut psi: Mat<f64> = Mat::zeros(n_dof, 0);
    let mut sigma_history: Vec<f64> = Vec::new();
    let mut indicator_history: Vec<Vec<f64>> = Vec::new();
    let mut mu_star_idx = 0usize;
    let termination;

    let mut iteration = 0usize;
    loop {
        iteration += 1;

        // Solve (or fetch) the FOM at the current parameter.
        let run_idx = match solved_of_train[mu_star_idx] {
            Some(idx) => {
                cache_hits += 1;
                idx
            }
            None => {
                let mu = config.train_set[mu_star_idx];
                let run = solve_fom_with_snapshots(setup, mu, &config.newton)?;
                fom_solve_count += 1;
                cache.push(run);
                selected.push(mu);
                solved_of_train[mu_star_idx] = Some(cache.len() - 1);
                cache.len() - 1
            }
        };

        // Projection errors of the solved trajectory and basis extension
        // by their dominant weighted POD mode. The snapshot set includes
        // level 0: leaving the initial condition out of the span lets
        // its projection error dominate both the transient solution
        // error and the t = 0 energy error at test parameters.
        let traj = &cache[run_idx].trajectory;
        let levels = traj.n_levels();
        let mut errors = Mat::zeros(n_dof, levels);
        for n in 0..levels {
            let u = traj.level(n);
            let e = if psi.ncols() == 0 {
                u
            } else {
                let coeffs = reduce_state(&psi, &setup.ops.mass, &u);
                &u - &(&psi * &coeffs)
            };
            for i in 0..n_dof {
                errors[(i, n)] = e[i];
            }
        }
        let mode = pod(&errors, PodWeight::Mass(&setup.ops.mass), 1)?;
        sigma_history.push(mode.singular_values[0]);
        let mut new_mode = mode.modes.col(0).to_owned();
        // One Gram-Schmidt pass guards M-orthonormality against drift.
        for c in 0..psi.ncols() {
            let col = psi.col(c).to_owned();
            let dot = setup.ops.mass.inner(&col, &new_mode);
            for i in 0..n_dof {
                new_mode[i] -= dot * col[i];
            }
        }
        let norm = setup.ops.mass.norm(&new_mode);
        if norm < 1e-12 {
            return Err(Error::RankDeficiency { requested: psi.ncols() + 1, rank: psi.ncols() });
        }
        let mut grown = Mat::zeros(n_dof, psi.ncols() + 1);
        for c in 0..psi.ncols() {
            for i in 0..n_dof {
                grown[(i, c)] = psi[(i, c)];
            }
        }
        for i in 0..n_dof {
            grown[(i, psi.ncols())] = new_mode[i] / norm;
        }
        psi = grown;

        // Temporary inner DEIM from the nonlinear snapshots of every
        // solved parameter, at numerical rank (capped; an inner basis
        // drawn from one parameter alone floors the indicator with its
        // interpolation error at distant training parameters).
        let inner_deim = build_inner_deim(
            &concat_snapshots(&cache),
            &psi,
            config.inner_rank_cutoff,
            config.inner_max_modes,
        )?;

        // Reduced solves and indicators over the training set.
        let ar_unit = crate::pod::build_reduced_operators(&psi, setup.ops.a1(), 1.0).ar_unit;
        let mut row = vec![f64::NAN; n_train];
        for (i, &mu) in config.train_set.iter().enumerate() {
            match rom_indicator_at(
                setup,
                mu,
                &psi,
                &ar_unit,
                &inner_deim,
                config,
                riesz.as_ref(),
            ) {
                Ok(delta) => row[i] = delta,
                Err(err) => {
                    skipped.push((iteration, mu, err.to_string()));
                }
            }
        }
        indicator_history.push(row.clone());

        // Greedy argmax (exact over the training set, lowest index on
        // ties; NaN rows from skipped solves never win).
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = None;
        for (i, &v) in row.iter().enumerate() {
            if v.is_finite() && v > best {
                best = v;
                best_idx = Some(i);
            }
        }
        let best_idx = best_idx.ok_or_else(|| {
            Error::Config("every reduced solve failed in a greedy iteration".into())
        })?;

        if row[best_idx] <= config.tol {
            termination = Termination::TolReached;
            break;
        }
        if iteration >= config.n_max {
            termination = Termination::MaxModesReached;
            break;
        }
        mu_star_idx = best_idx;
    }

    // Outer DEIM from the concatenated snapshots of the selected
    // parameters in selection order.
    let f_concat = concat_snapshots(&cache);
    let outer_rank = numerical_rank(&f_concat, PodWeight::Identity, config.inner_rank_cutoff)?;
    let outer_size = config.m_deim.min(outer_rank).max(1);
    let outer_pod = pod(&f_concat, PodWeight::Identity, outer_size)?;
    let outer_deim = DeimData::new(outer_pod.modes, &psi)?;

    Ok(GreedyResult {
        basis: ReducedBasis { psi, singular_values: sigma_history },
        outer_deim,
        outer_deim_size: outer_size,
        selected,
        indicator_history,
        termination,
        fom_solve_count,
        cache_hits,
        skipped,
        fom_cache: cache,
    })
}

/// Solve the FOM at `mu` and record the nonlinear snapshots.
pub fn solve_fom_with_snapshots(
    setup: &ProblemSetup,
    mu: f64,
    newton: &NewtonConfig,
) -> Result<FomRun> {
    let system = setup.fom_system(mu);
    let initial = setup.initial_vector(mu);
    let trajectory = solve(&system, &initial, &setup.grid, newton, EnergyCheck::fom_default())?;

    let potential = setup.potential_for(mu);
    let j = trajectory.n_levels() - 1;
    let mut snaps = Mat::zeros(setup.space.n_dof, j);
    for n in 1..=j {
        let f = eval_nonlinear(
            &trajectory.level(n),
            &potential,
            &setup.mesh,
            &setup.space,
            setup.clamp,
        )?;
        for i in 0..setup.space.n_dof {
            snaps[(i, n - 1)] = f[i];
        }
    }
    Ok(FomRun { mu, trajectory, nonlinear_snapshots: snaps })
}

fn concat_snapshots(cache: &[FomRun]) -> Mat<f64> {
    let n_dof = cache[0].nonlinear_snapshots.nrows();
    let total: usize = cache.iter().map(|r| r.nonlinear_snapshots.ncols()).sum();
    let mut out = Mat::zeros(n_dof, total);
    let mut col = 0;
    for run in cache {
        let f = &run.nonlinear_snapshots;
        for c in 0..f.ncols() {
            for i in 0..n_dof {
                out[(i, col)] = f[(i, c)];
            }
            col += 1;
        }
    }
    out
}

fn build_inner_deim(
    snapshots: &Mat<f64>,
    psi: &Mat<f64>,
    rel_cutoff: f64,
    max_modes: usize,
) -> Result<DeimData> {
    let rank = numerical_rank(snapshots, PodWeight::Identity, rel_cutoff)?.max(1);
    let inner_pod = pod(snapshots, PodWeight::Identity, rank.min(max_modes))?;
    DeimData::new(inner_pod.modes, psi)
}

/// Reduced solve plus indicator at one training parameter.
fn rom_indicator_at(
    setup: &ProblemSetup,
    mu: f64,
    psi: &Mat<f64>,
    ar_unit: &Mat<f64>,
    inner_deim: &DeimData,
    config: &GreedyConfig,
    riesz: Option<&RieszSolver>,
) -> Result<f64> {
    let epsilon = setup.epsilon_for(mu);
    let potential = setup.potential_for(mu);
    let ar = faer::Scale(epsilon) * ar_unit;
    let system = RomSystem::new(
        psi,
        ar,
        &setup.mesh,
        &setup.space,
        potential,
        epsilon,
        RomNonlinearity::Deim(inner_deim),
    )?;
    let u0 = setup.initial_vector(mu);
    let u0_r = reduce_state(psi, &setup.ops.mass, &u0);
    let reduced = solve(&system, &u0_r, &setup.grid, &config.newton, EnergyCheck::Off)?;

    let indicator_deim = match config.indicator_nonlinearity {
        IndicatorNonlinearity::Deim => Some(inner_deim),
        IndicatorNonlinearity::Exact => None,
    };
    error_indicator(
        &reduced,
        psi,
        &setup.ops,
        &setup.mesh,
        &setup.space,
        &potential,
        epsilon,
        &setup.grid,
        config.indicator_norm,
        riesz,
        indicator_deim,
        setup.clamp,
    )
}
