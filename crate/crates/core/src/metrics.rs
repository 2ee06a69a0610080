//! Energy-fraction duration and bandwidth, linear spectra and physical units.
//!
//! `T_w` (`B_w`) is the shortest time interval (frequency band) holding
//! `(1 - epsilon)` of the total energy. The total is supplied by the caller,
//! normally `4 * sum(sigma_k)` of the generating spectrum, so a grid that
//! truncates the pulse shows up as [`Error::InsufficientEnergy`].
//!
//! Frequencies are ordinary frequencies (cycles per normalized time unit).

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::pulse::SampledPulse;

pub const DEFAULT_ZERO_PADDING: usize = 4;
/// Largest edge-to-peak spectral density ratio accepted by [`bandwidth`].
pub const ALIASING_TOL: f64 = 1e-6;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Duration and bandwidth of one pulse at one energy threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureResult {
    pub t_w: f64,
    pub b_w: f64,
    pub epsilon: f64,
    pub time_interval: [f64; 2],
    pub freq_interval: [f64; 2],
}

impl MeasureResult {
    pub fn time_bandwidth(&self) -> f64 {
        self.t_w * self.b_w
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Shortest interval `[x_a, x_b]` with `C(x_b) - C(x_a) >= target`, where `C` is
/// the trapezoidal cumulative integral of `density` sampled at `x0 + i*h`,
/// linearly interpolated between samples.
pub(crate) fn shortest_window(density: &[f64], x0: f64, h: f64, target: f64) -> Result<[f64; 2]> {
    let n = density.len();
    let mut cum = Vec::with_capacity(n);
    cum.push(0.0);
    for i in 1..n {
        let c = cum[i - 1] + 0.5 * h * (density[i - 1] + density[i]);
        cum.push(c);
    }
    let total = cum[n - 1];
    if total < target {
        return Err(Error::InsufficientEnergy { captured: total, required: target });
    }
    let x = |i: usize| x0 + i as f64 * h;

    // Position inside segment k (cum[k] <= y <= cum[k+1]).
    let locate = |k: usize, y: f64| -> f64 {
        let dc = cum[k + 1] - cum[k];
        if dc <= 0.0 {
            x(k)
        } else {
            x(k) + h * ((y - cum[k]) / dc).clamp(0.0, 1.0)
        }
    };

    let mut best = [x(0), x(n - 1)];
    let mut best_width = best[1] - best[0];

    // Left edge on a sample: smallest x_b with C(x_b) >= C_i + target.
    let mut k = 0;
    for i in 0..n {
        let y = cum[i] + target;
        if y > total {
            break;
        }
        while k + 1 < n - 1 && cum[k + 1] < y {
            k += 1;
        }
        let xb = locate(k, y).max(x(i));
        if xb - x(i) < best_width {
            best_width = xb - x(i);
            best = [x(i), xb];
        }
    }
    // Right edge on a sample: largest x_a with C(x_a) <= C_j - target.
    let mut k = 0;
    for j in 0..n {
        let y = cum[j] - target;
        if y < 0.0 {
            continue;
        }
        while k + 1 < n - 1 && cum[k + 1] <= y {
            k += 1;
        }
        let xa = locate(k, y).min(x(j));
        if x(j) - xa < best_width {
            best_width = x(j) - xa;
            best = [xa, x(j)];
        }
    }
    Ok(best)
}

/// Shortest time interval holding `(1 - epsilon) * e_total`.
pub fn duration(pulse: &SampledPulse, epsilon: f64, e_total: f64) -> Result<(f64, [f64; 2])> {
    check_epsilon(epsilon)?;
    let density: Vec<f64> = pulse.samples().iter().map(|q| q.norm_sqr()).collect();
    let grid = pulse.grid();
    let iv = shortest_window(&density, grid.t_start(), grid.dt(), (1.0 - epsilon) * e_total)?;
    Ok((iv[1] - iv[0], iv))
}

/// Energy spectral density `|Q(f)|^2` on ascending frequencies, with
/// `Q(f) = dt * sum_n q_n exp(-2 pi j f t_n)` and the signal zero-padded to
/// `padding` times its length. Returns `(f_start, df, density)`.
///
/// `sum(density) * df` equals `dt * sum |q_n|^2` (Parseval).
pub fn energy_spectrum(pulse: &SampledPulse, padding: usize) -> (f64, f64, Vec<f64>) {
    let n = pulse.samples().len();
    let m = n * padding.max(1);
    let dt = pulse.grid().dt();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(pulse.samples());
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m));
    fft.process(&mut buf);

    let df = 1.0 / (m as f64 * dt);
    // fftshift: bins m - m/2 .. m-1 are negative frequencies
    let half = m / 2;
    let density: Vec<f64> = (0..m)
        .map(|i| {
            let k = (i + m - half) % m;
            (buf[k] * dt).norm_sqr()
        })
        .collect();
    (-(half as f64) * df, df, density)
}

/// Shortest frequency band holding `(1 - epsilon) * e_total`.
pub fn bandwidth(pulse: &SampledPulse, epsilon: f64, e_total: f64) -> Result<(f64, [f64; 2])> {
    bandwidth_padded(pulse, epsilon, e_total, DEFAULT_ZERO_PADDING)
}

pub fn bandwidth_padded(
    pulse: &SampledPulse,
    epsilon: f64,
    e_total: f64,
    padding: usize,
) -> Result<(f64, [f64; 2])> {
    check_epsilon(epsilon)?;
    let (f0, df, density) = energy_spectrum(pulse, padding);
    check_aliasing(&density)?;
    let iv = shortest_window(&density, f0, df, (1.0 - epsilon) * e_total)?;
    Ok((iv[1] - iv[0], iv))
}

/// Fails when the density at the Nyquist edge exceeds [`ALIASING_TOL`] of the peak.
pub(crate) fn check_aliasing(density: &[f64]) -> Result<()> {
    let peak = density.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let edge = density[0].max(density[density.len() - 1]);
    let ratio = edge / peak;
    if ratio > ALIASING_TOL {
        return Err(Error::AliasingDetected { ratio });
    }
    Ok(())
}

/// Both measurements of one pulse.
pub fn measure(pulse: &SampledPulse, epsilon: f64, e_total: f64) -> Result<MeasureResult> {
    let (t_w, time_interval) = duration(pulse, epsilon, e_total)?;
    let (b_w, freq_interval) = bandwidth(pulse, epsilon, e_total)?;
    Ok(MeasureResult { t_w, b_w, epsilon, time_interval, freq_interval })
}

/// Time-bandwidth product of a first-order soliton, `ln^2(2/epsilon) / pi^2`.
pub fn time_bandwidth_1(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((2.0 / epsilon).ln().powi(2) / (PI * PI))
}

/// Fiber parameters fixing the normalization `P0 * T0^2 = |beta2| / gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScale {
    /// Group-velocity dispersion in s^2/m (anomalous, negative).
    pub beta2: f64,
    /// Kerr coefficient in 1/(W m).
    pub gamma: f64,
    /// Time scale in s.
    pub t0: f64,
}

impl PhysicalScale {
    pub fn new(beta2: f64, gamma: f64, t0: f64) -> Result<Self> {
        if !(beta2 < 0.0) || !(gamma > 0.0) || !(t0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need beta2 < 0, gamma > 0, t0 > 0 (got {beta2}, {gamma}, {t0})"
            )));
        }
        Ok(PhysicalScale { beta2, gamma, t0 })
    }

    /// Peak-power scale `P0 = |beta2| / (gamma * T0^2)` in W.
    pub fn p0(&self) -> f64 {
        self.beta2.abs() / (self.gamma * self.t0 * self.t0)
    }

    /// Meters per unit of normalized distance, `2 T0^2 / |beta2|`.
    pub fn z_to_meters(&self) -> f64 {
        2.0 * self.t0 * self.t0 / self.beta2.abs()
    }
}

/// A pulse in physical units: field in sqrt(W), time in s.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPulse {
    pub times: Vec<f64>,
    pub field: Vec<Complex64>,
    pub z_to_meters: f64,
}

pub fn to_physical(pulse: &SampledPulse, scale: &PhysicalScale) -> PhysicalPulse {
    let amp = scale.p0().sqrt();
    PhysicalPulse {
        times: pulse.grid().times().map(|t| t * scale.t0).collect(),
        field: pulse.samples().iter().map(|q| q * amp).collect(),
        z_to_meters: scale.z_to_meters(),
    }
}
