//! Converting a normalized pulse to a standard single-mode fiber:
//! beta2 = -21.67 ps^2/km, gamma = 1.27 /W/km, T0 = 100 ps.
//!
//! cargo run --example physical_units

use soliton_forge::darboux::synthesize;
use soliton_forge::metrics::{measure, to_physical, PhysicalScale};
use soliton_forge::pulse::TimeGrid;
use soliton_forge::symmetric::{build_symmetric_spectrum, EigenvalueSet};

fn main() -> soliton_forge::Result<()> {
    let scale = PhysicalScale::new(-21.67e-27, 1.27e-3, 100e-12)?;
    println!("P0 = {:.4e} W, unit distance = {:.1} km", scale.p0(), scale.z_to_meters() / 1e3);

    let omega = EigenvalueSet::new(vec![0.5, 1.0])?;
    let pulse = synthesize(&build_symmetric_spectrum(&omega, &[0.0, 0.0])?, &TimeGrid::centered(30.0, 0.01)?)?;
    let m = measure(&pulse, 1e-4, omega.energy())?;
    let phys = to_physical(&pulse, &scale);
    let peak_power = phys.field.iter().map(|f| f.norm_sqr()).fold(0.0, f64::max);
    println!("peak power {:.3} mW", peak_power * 1e3);
    println!("T_w = {:.1} ps, B_w = {:.2} GHz", m.t_w * scale.t0 * 1e12, m.b_w / scale.t0 / 1e9);
    Ok(())
}
