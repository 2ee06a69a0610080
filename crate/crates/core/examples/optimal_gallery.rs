//! |q(t)| of the optimized 2-soliton for four phase combinations, in the
//! long CSV format of the `gallery` subcommand.
//!
//! cargo run --release --example optimal_gallery > traces.csv

use soliton_forge::optimizer::{optimal_pulse_gallery, optimize_eta, EtaSearch};
use soliton_forge::symmetric::EigenvalueSet;

fn main() -> soliton_forge::Result<()> {
    let eps = 1e-4;
    let omega = EigenvalueSet::from_ratios(0.5, &[1.14])?;
    let (etas, rec) = optimize_eta(&omega, eps, &EtaSearch::default())?;
    eprintln!("etas {:?}, T_max {:.3}, B_max {:.3}, ratio to 1-soliton {:.4}", etas.etas(), rec.t_max, rec.b_max, rec.tb_ratio_vs_1soliton);
    println!("phase_index,t,abs_q");
    for (i, p) in optimal_pulse_gallery(&omega, &etas, eps, 4)?.iter().enumerate() {
        for (t, q) in p.grid().times().zip(p.samples()).step_by(4) {
            println!("{i},{t:.4},{:.6e}", q.norm());
        }
    }
    Ok(())
}
