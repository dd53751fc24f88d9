use acmor::assembly::{discrete_energy, FomOperators};
use acmor::avf::{solve_fom, EnergyCheck, NewtonConfig, TimeGrid};
use acmor::mesh::{build_mesh, BoundaryKind, Rect};
use acmor::metrics::l2_time_error;
use acmor::pod::{build_reduced_operators, pod, reduce_state, PodWeight};
use acmor::potential::Potential;
use acmor::rom::{solve_rom, RomNonlinearity, RomSystem};
use acmor::space::DgSpace;
use faer::Col;

fn main() {
    let eps = 1.0 / 200.0;
    for sigma in [6.0, 10.0, 18.0] {
        let mesh = build_mesh(Rect::unit_square(), 0.015, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::new(&mesh, sigma);
        let ops = FomOperators::new(&mesh, &space).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.01).unwrap();
        let u0 = acmor::avf::project_initial(
            |x, y| {
                let r = ((x - 0.5f64).powi(2) + (y - 0.5f64).powi(2)).sqrt();
                ((0.25 - r) / (std::f64::consts::SQRT_2 * eps)).tanh()
            },
            &mesh, &space, &ops,
        );
        let fom = solve_fom(&u0, &mesh, &space, &ops, Potential::Quartic, eps, &grid,
            &NewtonConfig::default(), EnergyCheck::fom_default()).unwrap();
        // best 20-dim basis for THIS trajectory
        let basis = pod(&fom.snapshots, PodWeight::Mass(&ops.mass), 20).unwrap();
        let sv = &basis.singular_values;
        let tail: f64 = sv[20..].iter().map(|s| s * s).sum::<f64>().sqrt();
        let ar = build_reduced_operators(&basis.modes, ops.a1(), eps).ar();
        let system = RomSystem::new(&basis.modes, ar, &mesh, &space, Potential::Quartic, eps,
            RomNonlinearity::Exact).unwrap();
        let u0r = reduce_state(&basis.modes, &ops.mass, &u0);
        let rom = solve_rom(&u0r, &system, &grid, &NewtonConfig::default(), EnergyCheck::Off).unwrap();
        let lifted = &basis.modes * &rom.snapshots;
        let solerr = l2_time_error(&lifted, &fom.snapshots, &ops.mass, grid.dt).unwrap();
        let mut e_err = 0.0f64;
        for n in 0..=grid.steps {
            let l: Col<f64> = &basis.modes * &rom.level(n);
            let e = discrete_energy(&l, &mesh, &space, eps, &Potential::Quartic);
            e_err = e_err.max((e - fom.energies[n]).abs());
        }
        println!(
            "sigma {sigma:4}: E0 {:.4}, sv tail(20) {tail:.3e}, self-POD rom solerr {solerr:.3e}, energy err {e_err:.3e}",
            fom.energies[0]
        );
    }
}
