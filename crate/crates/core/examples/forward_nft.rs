//! Forward nonlinear Fourier transform of `2 sech(t)`, whose eigenvalues are
//! 0.5j and 1.5j, and a round trip through synthesis.
//!
//! cargo run --example forward_nft

use soliton_forge::darboux::synthesize;
use soliton_forge::nft::{continuous_spectrum, discrete_spectrum, scatter};
use soliton_forge::pulse::{SampledPulse, TimeGrid};
use soliton_forge::spectrum::DiscreteSpectrum;
use soliton_forge::Complex64;

fn main() -> soliton_forge::Result<()> {
    let grid = TimeGrid::centered(25.0, 0.01)?;
    let pulse = SampledPulse::from_fn(grid, |t| Complex64::new(2.0 / t.cosh(), 0.0));
    let spectrum = discrete_spectrum(&pulse, 3.0, 64)?;
    for e in spectrum.entries() {
        println!("lambda = {:.8}j  Q_d = {:.6}", e.sigma, e.qd);
    }
    let qc = continuous_spectrum(&pulse, &[-1.0, 0.0, 1.0])?;
    println!("|Q_c| at -1, 0, 1: {:.2e} {:.2e} {:.2e}", qc[0].norm(), qc[1].norm(), qc[2].norm());

    let jost = scatter(&pulse, Complex64::new(0.3, 0.0))?;
    println!("|a|^2 + |b|^2 on the real axis: {:.10}", jost.a.norm_sqr() + jost.b.norm_sqr());

    // Synthesize a spectrum of our own and read it back.
    let chosen = DiscreteSpectrum::from_parts(&[0.4, 0.9, 1.3], &[
        Complex64::new(1.0, 2.0),
        Complex64::new(-3.0, 0.5),
        Complex64::new(0.0, -4.0),
    ])?;
    let q = synthesize(&chosen, &TimeGrid::centered(50.0, 0.01)?)?;
    let back = discrete_spectrum(&q, 2.0, 128)?;
    for (a, b) in chosen.entries().iter().zip(back.entries()) {
        println!("sigma {:.4} -> {:.8}, Q_d {:.4} -> {:.6}", a.sigma, b.sigma, a.qd, b.qd);
    }
    Ok(())
}
