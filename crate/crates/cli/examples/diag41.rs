use acmor::deim::{stability_bounds, DeimData};
use acmor::io::read_matrix;
use acmor::pod::{pod, PodWeight};
use acmor_cli::commands::{solve_fom_at, solve_rom_at};
use acmor_cli::config::ExperimentConfig;
use std::path::Path;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "/tmp/q41b".into());
    let dir = Path::new(&dir);
    let cfg = ExperimentConfig::load(Path::new("configs/quartic_circle.cfg")).unwrap();
    let setup = cfg.build_setup().unwrap();
    let psi = read_matrix(&dir.join("basis.bin")).unwrap();
    let w = read_matrix(&dir.join("deim_modes.bin")).unwrap();
    let data = DeimData::new(w, &psi).unwrap();
    let mu = cfg.test_mu;
    let pot = setup.potential_for(mu);

    let (deim_run, evals) = solve_rom_at(&setup, &psi, Some(&data), mu).unwrap();
    println!("deim run: full evals {evals}, violations {}", deim_run.energy_violations.len());
    let report = stability_bounds(
        &deim_run, &psi, &data, &setup.ops.mass, &setup.mesh, &setup.space, &pot,
        setup.grid.dt, setup.clamp,
    )
    .unwrap();
    println!(
        "M=50: norm_r_inv {:.1}, norm_ptw_inv {:.1}, global bound {:.4e}, dt {}, satisfied {}",
        report.norm_r_inv, report.norm_ptw_inv, report.global_bound, report.dt_used, report.satisfied
    );
    let minb = report.per_step_bounds.iter().cloned().fold(f64::INFINITY, f64::min);
    let maxb = report.per_step_bounds.iter().cloned().fold(0.0f64, f64::max);
    println!("per-step bounds: min {minb:.4e} max {maxb:.4e}, skipped {}", report.skipped_steps.len());

    // M = 1 counterexample
    let fom = solve_fom_at(&setup, mu).unwrap();
    let mut f_snaps = faer::Mat::zeros(setup.space.n_dof, setup.grid.steps);
    for n in 1..=setup.grid.steps {
        let f = acmor::assembly::eval_nonlinear(&fom.level(n), &pot, &setup.mesh, &setup.space, setup.clamp).unwrap();
        for i in 0..setup.space.n_dof {
            f_snaps[(i, n - 1)] = f[i];
        }
    }
    let w1 = pod(&f_snaps, PodWeight::Identity, 1).unwrap();
    let d1 = DeimData::new(w1.modes, &psi).unwrap();
    match solve_rom_at(&setup, &psi, Some(&d1), mu) {
        Ok((bad, _)) => {
            let worst = bad.energy_violations.iter().map(|(_, i)| *i).fold(0.0, f64::max);
            let r1 = stability_bounds(
                &bad, &psi, &d1, &setup.ops.mass, &setup.mesh, &setup.space, &pot,
                setup.grid.dt, setup.clamp,
            )
            .unwrap();
            println!(
                "M=1: satisfied {}, bound {:.3e}, energy violations {} (worst {:.3e})",
                r1.satisfied, r1.global_bound, bad.energy_violations.len(), worst
            );
            let lifted = &psi * &bad.snapshots;
            let err = acmor::metrics::l2_time_error(&lifted, &fom.snapshots, &setup.ops.mass, setup.grid.dt).unwrap();
            println!("M=1 solution error {err:.3e}");
        }
        Err(e) => println!("M=1 rom solve failed: {e}"),
    }
}
