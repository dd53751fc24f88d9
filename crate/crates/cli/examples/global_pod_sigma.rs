use acmor::assembly::FomOperators;
use acmor::avf::{solve_fom, EnergyCheck, NewtonConfig, TimeGrid};
use acmor::mesh::{build_mesh, BoundaryKind, Rect};
use acmor::metrics::l2_time_error;
use acmor::pod::{build_reduced_operators, pod, reduce_state, PodWeight};
use acmor::potential::Potential;
use acmor::rom::{solve_rom, RomNonlinearity, RomSystem};
use acmor::space::DgSpace;
use faer::{Col, Mat};

fn main() {
    let train = [10.0, 24.78, 67.32, 132.5, 212.46, 297.54, 377.5, 442.68, 485.22, 500.0];
    for sigma in [6.0, 18.0] {
        let mesh = build_mesh(Rect::unit_square(), 0.015, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::new(&mesh, sigma);
        let ops = FomOperators::new(&mesh, &space).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.01).unwrap();
        let n = space.n_dof;
        let j = grid.steps;
        let ic = |mu: f64| {
            let eps = 1.0 / mu;
            acmor::avf::project_initial(
                move |x, y| {
                    let r = ((x - 0.5f64).powi(2) + (y - 0.5f64).powi(2)).sqrt();
                    ((0.25 - r) / (std::f64::consts::SQRT_2 * eps)).tanh()
                },
                &mesh, &space, &ops,
            )
        };
        let solve_mu = |mu: f64| {
            solve_fom(&ic(mu), &mesh, &space, &ops, Potential::Quartic, 1.0 / mu, &grid,
                &NewtonConfig::default(), EnergyCheck::fom_default()).unwrap()
        };
        let mut all = Mat::zeros(n, train.len() * (j + 1));
        let mut col = 0;
        for &mu in &train {
            let t = solve_mu(mu);
            for c in 0..=j {
                for i in 0..n { all[(i, col)] = t.snapshots[(i, c)]; }
                col += 1;
            }
        }
        let basis = pod(&all, PodWeight::Mass(&ops.mass), 20).unwrap();
        drop(all);
        let fom = solve_mu(200.0);
        let eps = 1.0 / 200.0;
        let ar = build_reduced_operators(&basis.modes, ops.a1(), eps).ar();
        let system = RomSystem::new(&basis.modes, ar, &mesh, &space, Potential::Quartic, eps,
            RomNonlinearity::Exact).unwrap();
        let u0r = reduce_state(&basis.modes, &ops.mass, &ic(200.0));
        let rom = solve_rom(&u0r, &system, &grid, &NewtonConfig::default(), EnergyCheck::Off).unwrap();
        let lifted = &basis.modes * &rom.snapshots;
        let solerr = l2_time_error(&lifted, &fom.snapshots, &ops.mass, grid.dt).unwrap();
        let mut e_err = (0usize, 0.0f64);
        let mut e_err_tail = 0.0f64;
        for c in 0..=j {
            let l: Col<f64> = &basis.modes * &rom.level(c);
            let e = acmor::assembly::discrete_energy(&l, &mesh, &space, eps, &Potential::Quartic);
            let d = (e - fom.energies[c]).abs();
            if d > e_err.1 { e_err = (c, d); }
            if c >= 5 { e_err_tail = e_err_tail.max(d); }
        }
        println!(
            "sigma {sigma}: solerr {solerr:.3e}, energy err {:.3e} (worst level {}), energy err levels>=5: {e_err_tail:.3e}",
            e_err.1, e_err.0
        );
    }
}
