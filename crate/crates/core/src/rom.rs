//! Galerkin reduced-order model advanced by the shared AVF stepper.
//!
//! The reduced system for the coefficient vector `u_r` is
//! `u_r' + Ar u_r + f_r(u_r) = 0` with `Ar = eps Psi^T A1 Psi` and
//! `f_r = Psi^T f(Psi u_r)`; the reduced mass matrix is the identity
//! because the basis is M-orthonormal. In `Exact` mode the nonlinearity
//! is evaluated full-order and projected; in `Deim` mode only the sampled
//! entries are touched, so no online operation scales with the full
//! dimension. A counter records every full-length nonlinear evaluation to
//! let tests pin that property down.

use std::cell::Cell;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, Mat};

use crate::assembly::{avf_nonlinear, avf_nonlinear_jacobian, discrete_energy};
use crate::avf::{solve, AvfSystem, EnergyCheck, NewtonConfig, TimeGrid, Trajectory};
use crate::deim::DeimData;
use crate::error::Error;
use crate::mesh::Mesh;
use crate::pod::lift;
use crate::potential::{ClampPolicy, Potential};
use crate::space::DgSpace;
use crate::Result;

/// How the reduced nonlinear term is evaluated.
pub enum RomNonlinearity<'a> {
    /// Full-order evaluation projected by `Psi^T` (no hyper-reduction).
    Exact,
    /// DEIM interpolation on the sampled entries.
    Deim(&'a DeimData),
}

/// Reduced AVF system.
pub struct RomSystem<'a> {
    pub psi: &'a Mat<f64>,
    /// Reduced stiffness at the run's diffusivity.
    pub ar: Mat<f64>,
    pub mesh: &'a Mesh,
    pub space: &'a DgSpace,
    pub potential: Potential,
    pub epsilon: f64,
    pub clamp: ClampPolicy,
    pub nonlinearity: RomNonlinearity<'a>,
    full_evals: Cell<usize>,
}

impl<'a> RomSystem<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        psi: &'a Mat<f64>,
        ar: Mat<f64>,
        mesh: &'a Mesh,
        space: &'a DgSpace,
        potential: Potential,
        epsilon: f64,
        nonlinearity: RomNonlinearity<'a>,
    ) -> Result<Self> {
        if let RomNonlinearity::Deim(data) = &nonlinearity {
            if data.psi_t_q.nrows() != psi.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "DEIM data is built for {} modes, basis has {}",
                    data.psi_t_q.nrows(),
                    psi.ncols()
                )));
            }
        }
        if ar.nrows() != psi.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "reduced stiffness is {} x {}, basis has {} modes",
                ar.nrows(),
                ar.ncols(),
                psi.ncols()
            )));
        }
        Ok(Self {
            psi,
            ar,
            mesh,
            space,
            potential,
            epsilon,
            clamp: ClampPolicy::Clamp,
            nonlinearity,
            full_evals: Cell::new(0),
        })
    }

    /// Number of full-length nonlinear evaluations performed so far.
    pub fn full_eval_count(&self) -> usize {
        self.full_evals.get()
    }

    /// Reduced AVF nonlinear term between two reduced states.
    fn reduced_avf(&self, curr: &Col<f64>, next: &Col<f64>) -> Result<Col<f64>> {
        match &self.nonlinearity {
            RomNonlinearity::Exact => {
                self.full_evals.set(self.full_evals.get() + 1);
                let c = lift(self.psi, curr);
                let n = lift(self.psi, next);
                let b = avf_nonlinear(&c, &n, &self.potential, self.mesh, self.space, self.clamp)?;
                Ok(self.psi.transpose() * &b)
            }
            RomNonlinearity::Deim(data) => {
                let bm = data.sampled_avf(curr, next, &self.potential, self.space, self.clamp)?;
                Ok(&data.psi_t_q * &bm)
            }
        }
    }
}

impl AvfSystem for RomSystem<'_> {
    fn dim(&self) -> usize {
        self.psi.ncols()
    }

    fn residual(&self, curr: &Col<f64>, next: &Col<f64>, dt: f64) -> Result<Col<f64>> {
        let mut r: Col<f64> = next - curr;
        let sum: Col<f64> = next + curr;
        let a_sum = &self.ar * &sum;
        let g = self.reduced_avf(curr, next)?;
        for i in 0..r.nrows() {
            r[i] += 0.5 * dt * a_sum[i] + dt * g[i];
        }
        Ok(r)
    }

    fn solve_newton(
        &self,
        curr: &Col<f64>,
        next: &Col<f64>,
        dt: f64,
        r: &Col<f64>,
    ) -> Result<Col<f64>> {
        let n = self.dim();
        let gj = match &self.nonlinearity {
            RomNonlinearity::Exact => {
                self.full_evals.set(self.full_evals.get() + 1);
                let c = lift(self.psi, curr);
                let nx = lift(self.psi, next);
                let jb = avf_nonlinear_jacobian(
                    &c,
                    &nx,
                    &self.potential,
                    self.mesh,
                    self.space,
                    self.clamp,
                )?;
                let jb_psi = jb.apply_mat(self.psi);
                self.psi.transpose() * &jb_psi
            }
            RomNonlinearity::Deim(data) => {
                let jm =
                    data.sampled_avf_jacobian(curr, next, &self.potential, self.space, self.clamp)?;
                &data.psi_t_q * &jm
            }
        };
        let mut jac = Mat::from_fn(n, n, |i, j| 0.5 * dt * self.ar[(i, j)] + dt * gj[(i, j)]);
        for i in 0..n {
            jac[(i, i)] += 1.0;
        }
        let lu = PartialPivLu::new(jac.as_ref());
        let dx = lu.solve(r);
        Ok(faer::Scale(-1.0) * &dx)
    }

    fn energy(&self, u_r: &Col<f64>) -> f64 {
        let lifted = lift(self.psi, u_r);
        discrete_energy(&lifted, self.mesh, self.space, self.epsilon, &self.potential)
    }
}

/// Solve the reduced model over a time grid from a reduced initial state
/// (normally `Psi^T M u0`).
#[allow(clippy::too_many_arguments)]
pub fn solve_rom(
    initial_reduced: &Col<f64>,
    system: &RomSystem<'_>,
    grid: &TimeGrid,
    newton: &NewtonConfig,
    check: EnergyCheck,
) -> Result<Trajectory> {
    solve(system, initial_reduced, grid, newton, check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::FomOperators;
    use crate::avf::solve_fom;
    use crate::mesh::{build_mesh, BoundaryKind, Rect};
    use crate::pod::{build_reduced_operators, pod, reduce_state, PodWeight};
    use crate::rng::SplitMix64;

    /// A full-space M-orthonormal basis turns the ROM into the FOM in
    /// different coordinates.
    #[test]
    fn full_basis_reproduces_fom() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        let ops = FomOperators::new(&mesh, &space).unwrap();
        let n = space.n_dof;

        let mut rng = SplitMix64::new(31);
        let u0 = Col::from_fn(n, |_| rng.next_symmetric(0.4));
        let grid = TimeGrid::new(0.0, 0.2, 0.05).unwrap();
        let newton = NewtonConfig::default();
        let eps = 0.05;

        let fom = solve_fom(
            &u0,
            &mesh,
            &space,
            &ops,
            Potential::Quartic,
            eps,
            &grid,
            &newton,
            EnergyCheck::fom_default(),
        )
        .unwrap();

        // Full-rank basis from a random full-rank snapshot matrix.
        let basis_raw = Mat::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else if j == 0 {
                0.01 * ((i * 13 % 7) as f64)
            } else {
                0.0
            }
        });
        let basis = pod(&basis_raw, PodWeight::Mass(&ops.mass), n).unwrap();
        let ar = build_reduced_operators(&basis.modes, ops.a1(), eps).ar();
        let system = RomSystem::new(
            &basis.modes,
            ar,
            &mesh,
            &space,
            Potential::Quartic,
            eps,
            RomNonlinearity::Exact,
        )
        .unwrap();
        let u0_r = reduce_state(&basis.modes, &ops.mass, &u0);
        let rom = solve_rom(&u0_r, &system, &grid, &newton, EnergyCheck::rom_default()).unwrap();

        for lvl in 0..fom.n_levels() {
            let lifted = lift(&basis.modes, &rom.level(lvl));
            let diff: Col<f64> = &lifted - &fom.level(lvl);
            let denom = fom.level(lvl).norm_l2().max(1.0);
            assert!(
                diff.norm_l2() <= 5e-8 * denom,
                "level {lvl}: ROM on the full space differs from FOM by {}",
                diff.norm_l2()
            );
        }
        assert!(system.full_eval_count() > 0, "exact mode counts full evaluations");
    }
}
