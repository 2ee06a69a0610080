//! Time-bandwidth product per eigenvalue, relative to the 1-soliton, after
//! optimizing the magnitudes for each eigenvalue ratio.
//!
//! cargo run --release --example eigenvalue_sweep          # N = 2
//! cargo run --release --example eigenvalue_sweep -- 3     # N = 3 near the optimum (slow)

use soliton_forge::optimizer::{eigenvalue_sweep, EtaSearch, PhaseSearch};

fn main() -> soliton_forge::Result<()> {
    let eps = 1e-4;
    let three = std::env::args().nth(1).as_deref() == Some("3");
    let (grid, search): (Vec<Vec<f64>>, EtaSearch) = if three {
        let mut g = Vec::new();
        for r2 in [1.18, 1.28, 1.38] {
            for r3 in [1.25, 1.35, 1.45] {
                if r3 > r2 {
                    g.push(vec![r2, r3]);
                }
            }
        }
        (g, EtaSearch { phases: PhaseSearch { coarse_n: 16, refine_rounds: 2 }, ..EtaSearch::default() })
    } else {
        ((0..=20).map(|i| vec![1.02 + 0.02 * i as f64]).collect(), EtaSearch::default())
    };
    println!("ratios,etas,t_max,b_max,tb_ratio");
    for r in eigenvalue_sweep(&grid, eps, &search)? {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        println!("{},{},{:.5},{:.5},{:.5}", fmt(&r.sigma_ratios), fmt(&r.etas), r.t_max, r.b_max, r.tb_ratio_vs_1soliton);
    }
    Ok(())
}
