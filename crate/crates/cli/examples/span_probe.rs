use acmor::io::read_matrix;
use acmor::pod::project_onto_basis;
use acmor_cli::commands::solve_fom_at;
use acmor_cli::config::ExperimentConfig;
use std::path::Path;

fn main() {
    let cfg = ExperimentConfig::load(Path::new("configs/quartic_circle.cfg")).unwrap();
    let setup = cfg.build_setup().unwrap();
    let psi = read_matrix(Path::new("/tmp/q41b/basis.bin")).unwrap();
    let fom = solve_fom_at(&setup, 200.0).unwrap();
    // best-in-span approximation error per level (L2-in-time aggregate)
    let mut acc = 0.0;
    let mut worst = 0.0f64;
    for n in 1..=setup.grid.steps {
        let u = fom.level(n);
        let (_, e) = project_onto_basis(&u, &psi, &setup.ops.mass);
        let en = setup.ops.mass.inner(&e, &e);
        acc += en;
        worst = worst.max(en.sqrt());
    }
    println!(
        "mu=200 best-in-span: L2(0,T) {:.3e}, worst level {:.3e}",
        (setup.grid.dt * acc).sqrt(),
        worst
    );
    let sel = std::fs::read_to_string("/tmp/q41b/selected.csv").unwrap();
    println!("selected:\n{sel}");
}
