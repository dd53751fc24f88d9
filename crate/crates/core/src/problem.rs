//! Experiment setup: how the parameter enters the equation, and how
//! initial conditions are produced.
//!
//! The parameter `mu` is either the inverse diffusivity (`eps = 1/mu`,
//! potential fixed) or the temperature of the logarithmic potential
//! (`eps` fixed, `theta = mu`). Initial conditions may depend on the
//! parameter (the tanh circle profile sharpens with smaller `eps`), so
//! they are produced per `mu`.

use faer::Col;

use crate::assembly::FomOperators;
use crate::avf::{project_initial, FomSystem, TimeGrid};
use crate::error::Error;
use crate::mesh::Mesh;
use crate::potential::{ClampPolicy, Potential};
use crate::rng::SplitMix64;
use crate::space::DgSpace;
use crate::Result;

/// What the sampling parameter controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterKind {
    /// `mu = 1 / eps`.
    InverseDiffusivity,
    /// `mu = theta` of the logarithmic potential.
    Temperature,
}

/// Initial condition family.
#[derive(Debug, Clone, Copy)]
pub enum InitialCondition {
    /// `tanh((radius - |x - center|) / (sqrt(2) eps))`, the profile
    /// sharpening with the diffusivity of the run.
    TanhCircle { center: (f64, f64), radius: f64 },
    /// Independent uniform values in `[-amplitude, amplitude]` per dG
    /// coefficient, seeded and reproducible.
    Random { amplitude: f64, seed: u64 },
    Constant(f64),
}

/// Everything a parametrized run needs: discretization, operators, time
/// grid and the parameter semantics.
pub struct ProblemSetup {
    pub mesh: Mesh,
    pub space: DgSpace,
    pub ops: FomOperators,
    pub grid: TimeGrid,
    pub kind: ParameterKind,
    /// Potential template; for [`ParameterKind::Temperature`] its theta
    /// is replaced by the run's `mu`.
    pub potential: Potential,
    /// Fixed diffusivity for [`ParameterKind::Temperature`] runs.
    pub epsilon: f64,
    pub initial: InitialCondition,
    pub clamp: ClampPolicy,
}

impl ProblemSetup {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: Mesh,
        space: DgSpace,
        ops: FomOperators,
        grid: TimeGrid,
        kind: ParameterKind,
        potential: Potential,
        epsilon: f64,
        initial: InitialCondition,
    ) -> Result<Self> {
        if kind == ParameterKind::Temperature && !matches!(potential, Potential::Logarithmic { .. })
        {
            return Err(Error::Config(
                "temperature parametrization requires the logarithmic potential".into(),
            ));
        }
        if epsilon <= 0.0 {
            return Err(Error::Config(format!("diffusivity must be positive, got {epsilon}")));
        }
        Ok(Self {
            mesh,
            space,
            ops,
            grid,
            kind,
            potential,
            epsilon,
            initial,
            clamp: ClampPolicy::Clamp,
        })
    }

    pub fn epsilon_for(&self, mu: f64) -> f64 {
        match self.kind {
            ParameterKind::InverseDiffusivity => 1.0 / mu,
            ParameterKind::Temperature => self.epsilon,
        }
    }

    pub fn potential_for(&self, mu: f64) -> Potential {
        match (self.kind, self.potential) {
            (ParameterKind::Temperature, Potential::Logarithmic { theta_c, .. }) => {
                Potential::Logarithmic { theta: mu, theta_c }
            }
            (_, p) => p,
        }
    }

    /// Initial coefficient vector for a run at `mu`.
    pub fn initial_vector(&self, mu: f64) -> Col<f64> {
        match self.initial {
            InitialCondition::TanhCircle { center, radius } => {
                let eps = self.epsilon_for(mu);
                let width = std::f64::consts::SQRT_2 * eps;
                project_initial(
                    |x, y| {
                        let r = ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt();
                        ((radius - r) / width).tanh()
                    },
                    &self.mesh,
                    &self.space,
                    &self.ops,
                )
            }
            InitialCondition::Random { amplitude, seed } => {
                random_initial(seed, &self.space, amplitude)
            }
            InitialCondition::Constant(c) => Col::from_fn(self.space.n_dof, |_| c),
        }
    }

    pub fn fom_system(&self, mu: f64) -> FomSystem<'_> {
        FomSystem {
            mesh: &self.mesh,
            space: &self.space,
            ops: &self.ops,
            potential: self.potential_for(mu),
            epsilon: self.epsilon_for(mu),
            clamp: self.clamp,
        }
    }
}

/// Seeded uniform random coefficients in `[-amplitude, amplitude]`,
/// one independent draw per dG coefficient.
pub fn random_initial(seed: u64, space: &DgSpace, amplitude: f64) -> Col<f64> {
    let mut rng = SplitMix64::new(seed);
    Col::from_fn(space.n_dof, |_| rng.next_symmetric(amplitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BoundaryKind, Rect};

    #[test]
    fn random_initial_is_deterministic_and_bounded() {
        let mesh = build_mesh(Rect::unit_square(), 0.125, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        let a = random_initial(42, &space, 0.05);
        let b = random_initial(42, &space, 0.05);
        let mut mean = 0.0;
        for i in 0..space.n_dof {
            assert_eq!(a[i], b[i], "same seed must give the identical vector");
            assert!(a[i].abs() <= 0.05);
            mean += a[i];
        }
        mean /= space.n_dof as f64;
        // 3 sigma CLT bound for the mean of uniforms on [-A, A]
        let bound = 3.0 * 0.05 / (3.0_f64 * space.n_dof as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean} outside the 3-sigma bound {bound}");
    }

    #[test]
    fn temperature_kind_requires_logarithmic() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        let ops = FomOperators::new(&mesh, &space).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.5).unwrap();
        let bad = ProblemSetup::new(
            mesh,
            space,
            ops,
            grid,
            ParameterKind::Temperature,
            Potential::Quartic,
            0.04,
            InitialCondition::Constant(0.0),
        );
        assert!(matches!(bad, Err(Error::Config(_))));
    }

    #[test]
    fn parameter_semantics() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        let ops = FomOperators::new(&mesh, &space).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.5).unwrap();
        let setup = ProblemSetup::new(
            mesh,
            space,
            ops,
            grid,
            ParameterKind::Temperature,
            Potential::logarithmic(0.1, 1.0).unwrap(),
            0.04,
            InitialCondition::Constant(0.0),
        )
        .unwrap();
        assert_eq!(setup.epsilon_for(0.08), 0.04);
        match setup.potential_for(0.08) {
            Potential::Logarithmic { theta, theta_c } => {
                assert_eq!(theta, 0.08);
                assert_eq!(theta_c, 1.0);
            }
            _ => panic!("temperature run must stay logarithmic"),
        }
    }
}
