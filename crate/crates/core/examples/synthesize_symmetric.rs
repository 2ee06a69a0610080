//! Symmetric 2-soliton from eigenvalues {0.5j, 1j}: for any phases the pulse
//! is even in time, and scaling one magnitude breaks that.
//!
//! cargo run --example synthesize_symmetric [out.csv]

use soliton_forge::cli::{default_grid, write_pulse_csv};
use soliton_forge::darboux::{numerical_energy, synthesize};
use soliton_forge::symmetric::{build_spectrum, symmetric_amplitudes, EigenvalueSet, EtaVector};

fn main() -> soliton_forge::Result<()> {
    let omega = EigenvalueSet::new(vec![0.5, 1.0])?;
    println!("symmetric |Q_d|: {:?}", symmetric_amplitudes(&omega)?);

    for (etas, phases) in [([1.0, 1.0], [0.0, 0.0]), ([1.0, 1.0], [0.0, 2.1]), ([1.0, 0.9], [0.0, 2.1])] {
        let spectrum = build_spectrum(&omega, &EtaVector::new(etas.to_vec())?, &phases)?;
        let pulse = synthesize(&spectrum, &default_grid(&spectrum)?)?;
        println!(
            "etas {etas:?} phases {phases:?}: peak {:.4}, energy {:.8} (4 sum sigma = {}), max|q(t)-q(-t)|/max|q| = {:.2e}",
            pulse.peak(),
            numerical_energy(&pulse),
            spectrum.energy(),
            pulse.symmetry_residual()
        );
        if let Some(path) = std::env::args().nth(1) {
            write_pulse_csv(path.as_ref(), &pulse)?;
        }
    }
    Ok(())
}
