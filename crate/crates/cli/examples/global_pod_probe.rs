use acmor::metrics::l2_time_error;
use acmor::pod::{build_reduced_operators, pod, project_onto_basis, reduce_state, PodWeight};
use acmor::rom::{solve_rom, RomNonlinearity, RomSystem};
use acmor::avf::{EnergyCheck, NewtonConfig};
use acmor_cli::commands::solve_fom_at;
use acmor_cli::config::ExperimentConfig;
use faer::{Col, Mat};
use std::path::Path;

fn main() {
    let cfg = ExperimentConfig::load(Path::new("configs/quartic_circle.cfg")).unwrap();
    let setup = cfg.build_setup().unwrap();
    let n = setup.space.n_dof;
    let j = setup.grid.steps;
    // all 10 training trajectories, all levels
    let mut all = Mat::zeros(n, cfg.train_set.len() * (j + 1));
    let mut col = 0;
    for &mu in &cfg.train_set {
        let t = solve_fom_at(&setup, mu).unwrap();
        for c in 0..=j {
            for i in 0..n {
                all[(i, col)] = t.snapshots[(i, c)];
            }
            col += 1;
        }
        eprintln!("solved mu={mu}");
    }
    let basis = pod(&all, PodWeight::Mass(&setup.ops.mass), 20).unwrap();
    let fom = solve_fom_at(&setup, 200.0).unwrap();
    let mut acc = 0.0;
    for c in 1..=j {
        let (_, e) = project_onto_basis(&fom.level(c), &basis.modes, &setup.ops.mass);
        acc += setup.ops.mass.inner(&e, &e);
    }
    println!("global POD-20 best-in-span at mu=200: {:.3e}", (setup.grid.dt * acc).sqrt());
    let eps = setup.epsilon_for(200.0);
    let ar = build_reduced_operators(&basis.modes, setup.ops.a1(), eps).ar();
    let system = RomSystem::new(&basis.modes, ar, &setup.mesh, &setup.space,
        setup.potential_for(200.0), eps, RomNonlinearity::Exact).unwrap();
    let u0r = reduce_state(&basis.modes, &setup.ops.mass, &setup.initial_vector(200.0));
    let rom = solve_rom(&u0r, &system, &setup.grid, &NewtonConfig::default(), EnergyCheck::Off).unwrap();
    let lifted = &basis.modes * &rom.snapshots;
    println!("global POD-20 rom solerr: {:.3e}", l2_time_error(&lifted, &fom.snapshots, &setup.ops.mass, setup.grid.dt).unwrap());
    let pot = setup.potential_for(200.0);
    let mut e_err = 0.0f64;
    for c in 0..=j {
        let l: Col<f64> = &basis.modes * &rom.level(c);
        let e = acmor::assembly::discrete_energy(&l, &setup.mesh, &setup.space, eps, &pot);
        e_err = e_err.max((e - fom.energies[c]).abs());
    }
    println!("global POD-20 energy err: {:.3e}", e_err);
}
