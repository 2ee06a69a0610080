//! Closed-form duration and bandwidth estimates against measured worst cases
//! for symmetric multi-solitons.
//!
//! cargo run --release --example closed_form_estimates

use soliton_forge::optimizer::{phase_extremes, PhaseSearch};
use soliton_forge::symmetric::{b_sep, t_sym, tb_estimate, EigenvalueSet, EtaVector};

fn main() -> soliton_forge::Result<()> {
    for sigmas in [vec![0.5, 1.0], vec![0.5, 0.64, 0.675]] {
        let omega = EigenvalueSet::new(sigmas.clone())?;
        let search = PhaseSearch { coarse_n: if sigmas.len() > 2 { 16 } else { 64 }, refine_rounds: 2 };
        for eps in [1e-3, 1e-4, 1e-6] {
            let r = phase_extremes(&omega, &EtaVector::ones(omega.len()), eps, &search)?;
            println!(
                "{sigmas:?} eps {eps:.0e}: T_sym {:.4} vs T_max {:.4}; B_sep {:.4} <= B_max {:.4}; T*B/N estimate {:.3}",
                t_sym(&omega, eps)?,
                r.t_max,
                b_sep(&omega, eps)?,
                r.b_max,
                tb_estimate(&omega, eps)?
            );
        }
    }
    Ok(())
}
