//! Propagation along the fiber: linear evolution of the discrete spectrum and
//! a split-step solver for `q_z + j q_tt + 2j |q|^2 q = 0` used as an oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::metrics::{check_aliasing, energy_spectrum};
use crate::pulse::{SampledPulse, DEFAULT_DECAY_TOL};
use crate::spectrum::DiscreteSpectrum;

pub const DEFAULT_MAX_STEP: f64 = 1e-3;
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// `Q_d(lambda_k; z) = Q_d(lambda_k) exp(-4j lambda_k^2 z)`; eigenvalues are unchanged.
pub fn evolve_spectrum(spectrum: &DiscreteSpectrum, z: f64) -> DiscreteSpectrum {
    spectrum.map_amplitudes(|e| {
        let l = e.lambda();
        e.qd * (-4.0 * J * l * l * z).exp()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub z_total: f64,
    pub n_steps: usize,
}

impl PropagationConfig {
    pub fn new(z_total: f64, n_steps: usize) -> Result<Self> {
        if !(z_total >= 0.0) || !z_total.is_finite() {
            return Err(Error::InvalidInput(format!("z must be non-negative, got {z_total}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidInput("at least one step is required".into()));
        }
        Ok(PropagationConfig { z_total, n_steps })
    }

    /// Fewest steps with `dz <= max_step`.
    pub fn with_max_step(z_total: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return Err(Error::InvalidInput(format!("step must be positive, got {max_step}")));
        }
        Self::new(z_total, ((z_total / max_step).ceil() as usize).max(1))
    }

    pub fn dz(&self) -> f64 {
        self.z_total / self.n_steps as f64
    }
}

/// Symmetrized split-step Fourier solution at `config.z_total`.
///
/// Each step applies half the Kerr phase, the full dispersion in the
/// frequency domain (periodic grid), then the other half of the Kerr phase.
pub fn propagate_nlse(pulse: &SampledPulse, config: &PropagationConfig) -> Result<SampledPulse> {
    pulse.check_decay(DEFAULT_DECAY_TOL)?;
    check_aliasing(&energy_spectrum(pulse, 1).2)?;
    if config.z_total == 0.0 {
        return Ok(pulse.clone());
    }

    let n = pulse.samples().len();
    let dt = pulse.grid().dt();
    let dz = config.dz();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // q_z = -j q_tt  =>  Q_z = j w^2 Q
    let dispersion: Vec<Complex64> = (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * PI * kk / (n as f64 * dt);
            (J * w * w * dz).exp() / n as f64
        })
        .collect();
    let kerr = |q: &mut [Complex64], h: f64| {
        for x in q.iter_mut() {
            *x *= (-2.0 * J * x.norm_sqr() * h).exp();
        }
    };

    let energy = |q: &[Complex64]| q.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let mut q = pulse.samples().to_vec();
    let e0 = energy(&q);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    for _ in 0..config.n_steps {
        kerr(&mut q, 0.5 * dz);
        fwd.process_with_scratch(&mut q, &mut scratch);
        for (x, d) in q.iter_mut().zip(&dispersion) {
            *x *= d;
        }
        inv.process_with_scratch(&mut q, &mut scratch);
        kerr(&mut q, 0.5 * dz);
    }

    let e1 = energy(&q);
    if e0 > 0.0 {
        let drift = (e1 - e0).abs() / e0;
        if drift > ENERGY_DRIFT_TOL {
            return Err(Error::EnergyDrift { drift });
        }
    }
    let out = SampledPulse::new(*pulse.grid(), q)?;
    check_aliasing(&energy_spectrum(&out, 1).2)?;
    Ok(out)
}
