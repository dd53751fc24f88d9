//! Comparison and benchmark reports.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use acmor::Result;

/// Full-order vs reduced-order comparison at one test parameter.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub mu: f64,
    /// `L2(0,T;L2)` solution errors against the full-order run.
    pub sol_err_podg: f64,
    pub sol_err_deim: f64,
    /// `L^inf(0,T)` discrete-energy errors.
    pub energy_err_podg: f64,
    pub energy_err_deim: f64,
    /// Wall-clock seconds of the online solves.
    pub wall_fom: f64,
    pub wall_podg: f64,
    pub wall_deim: f64,
}

impl ComparisonReport {
    pub fn speedup_podg(&self) -> f64 {
        self.wall_fom / self.wall_podg
    }

    pub fn speedup_deim(&self) -> f64 {
        self.wall_fom / self.wall_deim
    }

    pub const CSV_HEADER: &'static str = "mu,sol_err_podg,sol_err_deim,energy_err_podg,\
energy_err_deim,wall_fom,wall_podg,wall_deim,speedup_podg,speedup_deim";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.6},{:.6},{:.6},{:.3},{:.3}",
            self.mu,
            self.sol_err_podg,
            self.sol_err_deim,
            self.energy_err_podg,
            self.energy_err_deim,
            self.wall_fom,
            self.wall_podg,
            self.wall_deim,
            self.speedup_podg(),
            self.speedup_deim()
        )
    }

    /// Append to a CSV file, writing the header if the file is new.
    pub fn append_csv(&self, path: &Path) -> Result<()> {
        let new = !path.exists();
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        if new {
            writeln!(f, "{}", Self::CSV_HEADER)?;
        }
        writeln!(f, "{}", self.csv_row())?;
        Ok(())
    }

    pub fn print(&self) {
        println!("comparison at mu = {}", self.mu);
        println!("  solution error  PODG {:.3e}  PODG-DEIM {:.3e}", self.sol_err_podg, self.sol_err_deim);
        println!(
            "  energy error    PODG {:.3e}  PODG-DEIM {:.3e}",
            self.energy_err_podg, self.energy_err_deim
        );
        println!(
            "  wall seconds    FOM {:.3}  PODG {:.3}  PODG-DEIM {:.3}",
            self.wall_fom, self.wall_podg, self.wall_deim
        );
        println!(
            "  speedups        PODG {:.2}x  PODG-DEIM {:.2}x",
            self.speedup_podg(),
            self.speedup_deim()
        );
    }
}
