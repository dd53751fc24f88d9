//! Error metrics between trajectories.

use faer::Mat;

use crate::assembly::MassMatrix;
use crate::error::Error;
use crate::Result;

/// `L2(0,T; L2)` distance between two trajectories over the same grid:
/// `(dt * sum_{n=1..J} (a_n - b_n)^T M (a_n - b_n))^(1/2)`.
///
/// The sum starts at the first step so that `J * dt` spans exactly the
/// time interval.
pub fn l2_time_error(a: &Mat<f64>, b: &Mat<f64>, mass: &MassMatrix, dt: f64) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "trajectories are {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut acc = 0.0;
    for n in 1..a.ncols() {
        let diff = a.col(n).to_owned() - b.col(n).to_owned();
        acc += mass.inner(&diff, &diff);
    }
    Ok((dt * acc).max(0.0).sqrt())
}

/// `L^inf(0,T)` distance between two discrete energy traces: the largest
/// pointwise difference over the stored time levels.
pub fn linf_energy_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "energy traces have {} vs {} entries",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
