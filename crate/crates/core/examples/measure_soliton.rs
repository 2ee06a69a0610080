//! Energy-fraction duration and bandwidth of the fundamental soliton compared
//! with their closed forms.
//!
//! cargo run --example measure_soliton

use std::f64::consts::PI;

use soliton_forge::metrics::{measure, time_bandwidth_1};
use soliton_forge::pulse::{SampledPulse, TimeGrid};
use soliton_forge::Complex64;

fn main() -> soliton_forge::Result<()> {
    let sigma = 0.5;
    let grid = TimeGrid::centered(60.0, 0.01)?;
    let pulse = SampledPulse::from_fn(grid, |t| Complex64::new(2.0 * sigma / (2.0 * sigma * t).cosh(), 0.0));
    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "eps", "T_w", "closed", "B_w", "closed", "T*B", "closed");
    for eps in [1e-3, 1e-4, 1e-6, 1e-10] {
        let m = measure(&pulse, eps, 4.0 * sigma)?;
        let l = (2.0 / eps).ln();
        println!(
            "{eps:>8.0e} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            m.t_w,
            l / (2.0 * sigma),
            m.b_w,
            2.0 * sigma * l / (PI * PI),
            m.time_bandwidth(),
            time_bandwidth_1(eps)?
        );
    }
    Ok(())
}
