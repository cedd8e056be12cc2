//! Chi-square acceptance bands for the average NEES.
//!
//! cargo run --example chi2_band

use cooploc::sim::chi2_band;

fn main() {
    for (runs, dof) in [(1, 1), (1, 2), (10, 2), (50, 2), (50, 3), (200, 2)] {
        let b = chi2_band(runs, dof, 0.05);
        println!("M = {runs:>3}, dof = {dof}: [{:.4}, {:.4}]", b.r1, b.r2);
    }
}
