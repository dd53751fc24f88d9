//! Subcommand implementations over on-disk artifacts.
//!
//! `greedy` writes the reduced basis and DEIM modes into the output
//! directory; `rom`, `compare`, `bench` and `stability` read them back.
//! Trajectories and bases use the binary matrix format, traces and
//! histories CSV.

use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::{Col, Mat};

use acmor::avf::{solve, EnergyCheck, NewtonConfig, Trajectory};
use acmor::deim::{stability_bounds, DeimData};
use acmor::error::Error;
use acmor::greedy::{pod_greedy, Termination};
use acmor::io;
use acmor::metrics::{l2_time_error, linf_energy_error};
use acmor::pod::{build_reduced_operators, reduce_state};
use acmor::problem::ProblemSetup;
use acmor::rom::{RomNonlinearity, RomSystem};
use acmor::Result;

use crate::config::ExperimentConfig;
use crate::report::ComparisonReport;

/// Reduced nonlinearity mode selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RomMode {
    Exact,
    Deim,
}

impl RomMode {
    fn tag(self) -> &'static str {
        match self {
            RomMode::Exact => "exact",
            RomMode::Deim => "deim",
        }
    }
}

fn out_dir(cfg: &ExperimentConfig, out: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn basis_path(dir: &Path) -> PathBuf {
    dir.join("basis.bin")
}

fn deim_modes_path(dir: &Path) -> PathBuf {
    dir.join("deim_modes.bin")
}

fn load_basis(dir: &Path) -> Result<Mat<f64>> {
    let path = basis_path(dir);
    if !path.exists() {
        return Err(Error::Config(format!(
            "missing {} (run `acmor greedy` first)",
            path.display()
        )));
    }
    io::read_matrix(&path)
}

fn load_deim(dir: &Path, psi: &Mat<f64>) -> Result<DeimData> {
    let path = deim_modes_path(dir);
    if !path.exists() {
        return Err(Error::Config(format!(
            "missing {} (run `acmor greedy` first)",
            path.display()
        )));
    }
    let w = io::read_matrix(&path)?;
    DeimData::new(w, psi)
}

/// Solve the full-order model and persist the trajectory and energies.
pub fn run_fom(
    cfg: &ExperimentConfig,
    mu: Option<f64>,
    out: &Option<PathBuf>,
    export_mesh: bool,
    export_operators: bool,
) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let setup = cfg.build_setup()?;
    let mu = mu.unwrap_or(cfg.test_mu);

    let start = Instant::now();
    let traj = solve_fom_at(&setup, mu)?;
    let secs = start.elapsed().as_secs_f64();

    io::write_matrix(&dir.join(format!("fom_mu{mu}.bin")), &traj.snapshots)?;
    io::write_energy_csv(
        &dir.join(format!("fom_mu{mu}_energies.csv")),
        setup.grid.t0,
        setup.grid.dt,
        &traj.energies,
    )?;
    if export_mesh {
        io::write_mesh_csv(&dir, &setup.mesh)?;
    }
    if export_operators {
        io::write_coo(&dir.join("stiffness_unit.coo"), setup.ops.a1())?;
        let mass = setup.ops.compose(1.0, 0.0, None);
        io::write_coo(&dir.join("mass.coo"), mass.as_ref())?;
    }
    println!(
        "fom: mu = {mu}, {} steps, mean newton iters {:.2}, energy {:.6e} -> {:.6e}, {secs:.2} s",
        setup.grid.steps,
        traj.mean_newton_iters(),
        traj.energies.first().unwrap(),
        traj.energies.last().unwrap()
    );
    Ok(())
}

/// Run the sampling loop and persist every offline artifact.
pub fn run_greedy(cfg: &ExperimentConfig, out: &Option<PathBuf>) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let setup = cfg.build_setup()?;
    let greedy_cfg = cfg.greedy_config()?;

    let start = Instant::now();
    let result = pod_greedy(&setup, &greedy_cfg)?;
    let secs = start.elapsed().as_secs_f64();

    io::write_matrix(&basis_path(&dir), &result.basis.psi)?;
    io::write_csv(
        &dir.join("basis_singular_values.csv"),
        "mode,sigma",
        result
            .basis
            .singular_values
            .iter()
            .enumerate()
            .map(|(i, &s)| vec![i as f64, s]),
    )?;
    io::write_matrix(&deim_modes_path(&dir), &result.outer_deim.modes)?;
    io::write_csv(
        &dir.join("deim_indices.csv"),
        "k,row",
        result
            .outer_deim
            .indices
            .iter()
            .enumerate()
            .map(|(k, &r)| vec![k as f64, r as f64]),
    )?;
    io::write_csv(
        &dir.join("selected.csv"),
        "iteration,mu",
        result.selected.iter().enumerate().map(|(i, &mu)| vec![i as f64, mu]),
    )?;
    let mu_header: Vec<String> =
        cfg.train_set.iter().map(|mu| format!("mu_{mu}")).collect();
    io::write_csv(
        &dir.join("indicator_history.csv"),
        &format!("iteration,{}", mu_header.join(",")),
        result.indicator_history.iter().enumerate().map(|(i, row)| {
            let mut v = vec![i as f64 + 1.0];
            v.extend_from_slice(row);
            v
        }),
    )?;
    io::write_report(
        &dir.join("greedy_summary.txt"),
        &[
            ("modes", result.basis.n_modes().to_string()),
            ("deim_modes", result.outer_deim_size.to_string()),
            (
                "termination",
                match result.termination {
                    Termination::TolReached => "tolerance reached".into(),
                    Termination::MaxModesReached => "max modes reached".into(),
                },
            ),
            ("fom_solves", result.fom_solve_count.to_string()),
            ("cache_hits", result.cache_hits.to_string()),
            ("skipped_rom_solves", result.skipped.len().to_string()),
            ("cond_ptw", format!("{:.6e}", result.outer_deim.cond_ptw)),
            ("norm_ptw_inv", format!("{:.6e}", result.outer_deim.norm_ptw_inv)),
            ("offline_seconds", format!("{secs:.2}")),
        ],
    )?;
    println!(
        "greedy: {} modes, {} DEIM modes, {} FOM solves ({} cache hits), {:?}, {secs:.1} s",
        result.basis.n_modes(),
        result.outer_deim_size,
        result.fom_solve_count,
        result.cache_hits,
        result.termination
    );
    Ok(())
}

/// Online reduced solve at one parameter.
pub fn run_rom(
    cfg: &ExperimentConfig,
    mu: Option<f64>,
    mode: RomMode,
    out: &Option<PathBuf>,
) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let setup = cfg.build_setup()?;
    let mu = mu.unwrap_or(cfg.test_mu);
    let psi = load_basis(&dir)?;
    let deim = match mode {
        RomMode::Deim => Some(load_deim(&dir, &psi)?),
        RomMode::Exact => None,
    };

    let start = Instant::now();
    let (reduced, _) = solve_rom_at(&setup, &psi, deim.as_ref(), mu)?;
    let secs = start.elapsed().as_secs_f64();

    io::write_matrix(&dir.join(format!("rom_mu{mu}_{}.bin", mode.tag())), &reduced.snapshots)?;
    io::write_energy_csv(
        &dir.join(format!("rom_mu{mu}_{}_energies.csv", mode.tag())),
        setup.grid.t0,
        setup.grid.dt,
        &reduced.energies,
    )?;
    println!(
        "rom ({}): mu = {mu}, {} modes, mean newton iters {:.2}, energy {:.6e} -> {:.6e}, {secs:.3} s",
        mode.tag(),
        psi.ncols(),
        reduced.mean_newton_iters(),
        reduced.energies.first().unwrap(),
        reduced.energies.last().unwrap()
    );
    if !reduced.energy_violations.is_empty() {
        println!(
            "  warning: {} energy increases along the lifted trace (largest {:.3e})",
            reduced.energy_violations.len(),
            reduced
                .energy_violations
                .iter()
                .map(|(_, inc)| *inc)
                .fold(0.0, f64::max)
        );
    }
    Ok(())
}

/// Full comparison: FOM vs PODG vs PODG-DEIM at a test parameter.
pub fn run_compare(cfg: &ExperimentConfig, mu: Option<f64>, out: &Option<PathBuf>) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let setup = cfg.build_setup()?;
    let mu = mu.unwrap_or(cfg.test_mu);
    let psi = load_basis(&dir)?;
    let deim = load_deim(&dir, &psi)?;
    let report = compare_at(&setup, &psi, &deim, mu)?;
    report.append_csv(&dir.join("compare_report.csv"))?;
    report.print();
    Ok(())
}

/// Best-of-3 timing loop.
pub fn run_bench(cfg: &ExperimentConfig, mu: Option<f64>, out: &Option<PathBuf>) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let setup = cfg.build_setup()?;
    let mu = mu.unwrap_or(cfg.test_mu);
    let psi = load_basis(&dir)?;
    let deim = load_deim(&dir, &psi)?;

    let mut wall_fom = f64::INFINITY;
    let mut wall_podg = f64::INFINITY;
    let mut wall_deim = f64::INFINITY;
    for _ in 0..3 {
        let t = Instant::now();
        let _ = solve_fom_at(&setup, mu)?;
        wall_fom = wall_fom.min(t.elapsed().as_secs_f64());

        let t = Instant::now();
        let _ = solve_rom_at(&setup, &psi, None, mu)?;
        wall_podg = wall_podg.min(t.elapsed().as_secs_f64());

        let t = Instant::now();
        let _ = solve_rom_at(&setup, &psi, Some(&deim), mu)?;
        wall_deim = wall_deim.min(t.elapsed().as_secs_f64());
    }

    let path = dir.join("bench_report.csv");
    let new = !path.exists();
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&path)?;
    if new {
        writeln!(f, "mu,wall_fom,wall_podg,wall_deim,speedup_podg,speedup_deim")?;
    }
    writeln!(
        f,
        "{mu},{wall_fom:.6},{wall_podg:.6},{wall_deim:.6},{:.3},{:.3}",
        wall_fom / wall_podg,
        wall_fom / wall_deim
    )?;
    println!(
        "bench (best of 3): FOM {wall_fom:.3} s, PODG {wall_podg:.3} s ({:.1}x), PODG-DEIM {wall_deim:.3} s ({:.1}x)",
        wall_fom / wall_podg,
        wall_fom / wall_deim
    );
    Ok(())
}

/// Energy-stability step-size bounds of the DEIM reduced solve.
pub fn run_stability(cfg: &ExperimentConfig, mu: Option<f64>, out: &Option<PathBuf>) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let setup = cfg.build_setup()?;
    let mu = mu.unwrap_or(cfg.test_mu);
    let psi = load_basis(&dir)?;
    let deim = load_deim(&dir, &psi)?;

    let (reduced, _) = solve_rom_at(&setup, &psi, Some(&deim), mu)?;
    let report = stability_bounds(
        &reduced,
        &psi,
        &deim,
        &setup.ops.mass,
        &setup.mesh,
        &setup.space,
        &setup.potential_for(mu),
        setup.grid.dt,
        setup.clamp,
    )?;

    io::write_report(
        &dir.join(format!("stability_mu{mu}.txt")),
        &[
            ("mu", mu.to_string()),
            ("dt_used", report.dt_used.to_string()),
            ("norm_r_inv", format!("{:.6e}", report.norm_r_inv)),
            ("norm_ptw_inv", format!("{:.6e}", report.norm_ptw_inv)),
            ("global_bound", format!("{:.6e}", report.global_bound)),
            ("satisfied", report.satisfied.to_string()),
            ("skipped_steps", report.skipped_steps.len().to_string()),
            (
                "energy_violations",
                reduced.energy_violations.len().to_string(),
            ),
        ],
    )?;
    io::write_csv(
        &dir.join(format!("stability_mu{mu}_bounds.csv")),
        "step,bound",
        report
            .per_step_bounds
            .iter()
            .enumerate()
            .map(|(i, &b)| vec![i as f64 + 1.0, b]),
    )?;
    println!(
        "stability: mu = {mu}, dt = {} vs global bound {:.3e} -> satisfied = {}",
        report.dt_used, report.global_bound, report.satisfied
    );
    Ok(())
}

/// FOM solve with the monotone-energy guard.
pub fn solve_fom_at(setup: &ProblemSetup, mu: f64) -> Result<Trajectory> {
    let system = setup.fom_system(mu);
    let initial = setup.initial_vector(mu);
    solve(
        &system,
        &initial,
        &setup.grid,
        &NewtonConfig::default(),
        EnergyCheck::fom_default(),
    )
}

/// Reduced solve; returns the reduced trajectory and the count of
/// full-length nonlinear evaluations spent in its online loop.
pub fn solve_rom_at(
    setup: &ProblemSetup,
    psi: &Mat<f64>,
    deim: Option<&DeimData>,
    mu: f64,
) -> Result<(Trajectory, usize)> {
    let epsilon = setup.epsilon_for(mu);
    let potential = setup.potential_for(mu);
    let ar = build_reduced_operators(psi, setup.ops.a1(), epsilon).ar();
    let nonlinearity = match deim {
        Some(d) => RomNonlinearity::Deim(d),
        None => RomNonlinearity::Exact,
    };
    let system =
        RomSystem::new(psi, ar, &setup.mesh, &setup.space, potential, epsilon, nonlinearity)?;
    let u0 = setup.initial_vector(mu);
    let u0_r = reduce_state(psi, &setup.ops.mass, &u0);
    let reduced = solve(
        &system,
        &u0_r,
        &setup.grid,
        &NewtonConfig::default(),
        EnergyCheck::rom_default(),
    )?;
    Ok((reduced, system.full_eval_count()))
}

/// Comparison report used by `compare` and the acceptance suite.
pub fn compare_at(
    setup: &ProblemSetup,
    psi: &Mat<f64>,
    deim: &DeimData,
    mu: f64,
) -> Result<ComparisonReport> {
    let t = Instant::now();
    let fom = solve_fom_at(setup, mu)?;
    let wall_fom = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (podg, _) = solve_rom_at(setup, psi, None, mu)?;
    let wall_podg = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (deim_run, full_evals) = solve_rom_at(setup, psi, Some(deim), mu)?;
    let wall_deim = t.elapsed().as_secs_f64();
    debug_assert_eq!(full_evals, 0);

    let lifted_podg = psi * &podg.snapshots;
    let lifted_deim = psi * &deim_run.snapshots;
    Ok(ComparisonReport {
        mu,
        sol_err_podg: l2_time_error(&lifted_podg, &fom.snapshots, &setup.ops.mass, setup.grid.dt)?,
        sol_err_deim: l2_time_error(&lifted_deim, &fom.snapshots, &setup.ops.mass, setup.grid.dt)?,
        energy_err_podg: linf_energy_error(&podg.energies, &fom.energies)?,
        energy_err_deim: linf_energy_error(&deim_run.energies, &fom.energies)?,
        wall_fom,
        wall_podg,
        wall_deim,
    })
}

/// Reduced initial condition helper shared with tests.
pub fn reduced_initial(setup: &ProblemSetup, psi: &Mat<f64>, mu: f64) -> Col<f64> {
    reduce_state(psi, &setup.ops.mass, &setup.initial_vector(mu))
}
