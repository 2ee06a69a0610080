//! Worst-case duration and bandwidth of {0.5j, 1j} 2-solitons against the
//! magnitude ratio eta_2, as CSV on stdout (eps, eta_2, T_max, B_max, B_min).
//!
//! cargo run --release --example eta_sweep > eta.csv

use soliton_forge::optimizer::{logspace, phase_extremes, PhaseSearch};
use soliton_forge::symmetric::{b_sep, t_sym, EigenvalueSet, EtaVector};

fn main() -> soliton_forge::Result<()> {
    let omega = EigenvalueSet::new(vec![0.5, 1.0])?;
    let search = PhaseSearch::default();
    println!("epsilon,eta_2,t_max,b_max,b_min");
    for eps in [1e-3, 1e-4, 1e-6] {
        eprintln!("eps {eps:.0e}: T_sym {:.4}, B_sep {:.4}", t_sym(&omega, eps)?, b_sep(&omega, eps)?);
        for eta in logspace(1e-5, 1.0, 21) {
            let r = phase_extremes(&omega, &EtaVector::from_free(&[eta])?, eps, &search)?;
            println!("{eps:e},{eta:e},{},{},{}", r.t_max, r.b_max, r.b_min);
        }
    }
    Ok(())
}
