//! The density-driven following gain.

use hexflow::adaptive::{kt_from_density, local_density, SensorRange, SigmoidParams};
use hexflow::hexgeom::{CellCoord, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = SigmoidParams::default();
    println!("{:>12} {:>8}", "aircraft/mi2", "k_t");
    for i in 0..=8 {
        let rho = p.midpoint_density * i as f64 / 4.0;
        println!("{rho:>12.5} {:>8.4}", kt_from_density(rho, &p).0);
    }

    let grid = GridSpec::new(5, 2.5)?;
    let own = grid.cell_center(CellCoord::ORIGIN);
    let others: Vec<_> = grid.cells().iter().step_by(6).map(|c| grid.cell_center(*c)).filter(|p| *p != own).collect();
    for miles in [15.0, 25.0, 50.0] {
        let rho = local_density(own, &others, SensorRange::new(miles)?, &grid);
        println!(
            "R_s = {miles:>4} mi: {} others in the air, density {rho:.5}, k_t {:.3}",
            others.len(),
            kt_from_density(rho, &p).0
        );
    }
    Ok(())
}
