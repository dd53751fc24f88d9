use acmor::assembly::discrete_energy;
use acmor::io::read_matrix;
use acmor_cli::commands::{solve_fom_at, solve_rom_at};
use acmor_cli::config::ExperimentConfig;
use faer::Col;
use std::path::Path;

fn main() {
    let cfg = ExperimentConfig::load(Path::new("configs/quartic_circle.cfg")).unwrap();
    let setup = cfg.build_setup().unwrap();
    let psi = read_matrix(Path::new("/tmp/q41b/basis.bin")).unwrap();
    let mu = 200.0;
    let fom = solve_fom_at(&setup, mu).unwrap();
    let (podg, _) = solve_rom_at(&setup, &psi, None, mu).unwrap();
    let pot = setup.potential_for(mu);
    let eps = setup.epsilon_for(mu);
    let mut worst = (0usize, 0.0f64);
    for n in 0..=setup.grid.steps {
        let lift: Col<f64> = &psi * &podg.level(n);
        let e_rom = discrete_energy(&lift, &setup.mesh, &setup.space, eps, &pot);
        let de = (e_rom - fom.energies[n]).abs();
        if de > worst.1 { worst = (n, de); }
        if n <= 4 || n % 20 == 0 {
            let diff: Col<f64> = &lift - &fom.level(n);
            println!("level {n:3}: L2 {:.3e}  dE {de:.3e}", setup.ops.mass.norm(&diff));
        }
    }
    println!("worst energy error at level {} = {:.4e}", worst.0, worst.1);
}
