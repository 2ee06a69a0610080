//! Forward nonlinear Fourier transform.
//!
//! The Zakharov-Shabat system
//!
//! ```text
//! d/dt [v1]   [ -j*lambda     q      ] [v1]
//!      [v2] = [ -conj(q)   j*lambda  ] [v2]
//! ```
//!
//! is propagated across the grid with one closed-form transfer matrix per
//! sample, each sample holding `q` constant over `[t_i - dt/2, t_i + dt/2]`,
//! and Richardson-extrapolated against the same scheme at twice the step.
//! The Jost coefficients follow from the boundary limits
//! `a = v1 * exp(j*lambda*t)` and `b = v2 * exp(-j*lambda*t)` at the right edge,
//! starting from `v = (1, 0) * exp(-j*lambda*t)` at the left edge.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulse::{SampledPulse, DEFAULT_DECAY_TOL};
use crate::spectrum::{DiscreteSpectrum, SpectralEntry};

/// Step of the central difference used for `a'(lambda)` in [`spectral_amplitude`].
pub const AMPLITUDE_DIFF_STEP: f64 = 1e-5;
/// Step of the central difference used inside the Newton refinement.
pub const NEWTON_DIFF_STEP: f64 = 1e-6;
/// Newton stops once `|a(lambda)|` falls below this.
pub const NEWTON_TOL: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 50;
/// Allowed `| |a|^2 + |b|^2 - 1 |` at real `lambda` before a result is flagged.
pub const UNIMODULARITY_TOL: f64 = 1e-4;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Jost coefficients `a(lambda)`, `b(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostPair {
    pub a: Complex64,
    pub b: Complex64,
    pub lambda: Complex64,
    /// Set when `lambda` is real and `|a|^2 + |b|^2` misses 1 by more than
    /// [`UNIMODULARITY_TOL`].
    pub degraded: bool,
}

/// `exp(M h) = cosh(kappa h) I + sinh(kappa h)/kappa M` for constant `q`, where
/// `M^2 = kappa^2 I` and `kappa^2 = -lambda^2 - |q|^2`. Returns the two scalars.
#[inline]
fn cell_exponential(lambda_sq: Complex64, q: Complex64, h: f64) -> (Complex64, Complex64) {
    let kappa = (-lambda_sq - q.norm_sqr()).sqrt();
    let x = kappa * h;
    if x.norm() < 1e-4 {
        let x2 = x * x;
        (1.0 + x2 * 0.5, h * (1.0 + x2 / 6.0))
    } else {
        (x.cosh(), x.sinh() / kappa)
    }
}

/// Product of closed-form transfer matrices for cells of constant `q`.
///
/// `cells` yields `(q, width)`; the cells tile `[t_lo, t_lo + sum(width)]`.
fn transfer(
    cells: impl Iterator<Item = (Complex64, f64)>,
    lambda: Complex64,
    t_lo: f64,
) -> (Complex64, Complex64) {
    let lambda_sq = lambda * lambda;
    let jl = J * lambda;

    let mut v1 = Complex64::new(1.0, 0.0);
    let mut v2 = Complex64::new(0.0, 0.0);
    let mut log_scale = 0.0_f64;
    let mut t_hi = t_lo;

    for (q, h) in cells {
        t_hi += h;
        let (ch, sh) = cell_exponential(lambda_sq, q, h);
        let n1 = ch * v1 + sh * (-jl * v1 + q * v2);
        let n2 = ch * v2 + sh * (-q.conj() * v1 + jl * v2);
        v1 = n1;
        v2 = n2;

        let mag = v1.norm().max(v2.norm());
        if mag > 1e100 {
            v1 /= mag;
            v2 /= mag;
            log_scale += mag.ln();
        }
    }

    let a = v1 * (log_scale + jl * (t_hi - t_lo)).exp();
    let b = v2 * (log_scale - jl * (t_hi + t_lo)).exp();
    (a, b)
}

/// Jost coefficients without input validation.
///
/// Each sample is a cell of width `dt`. The result is Richardson-extrapolated
/// against a second pass with cells of width `2 dt` whose values are cubic
/// midpoint interpolants, cancelling the leading `dt^2` error term.
pub(crate) fn jost_coefficients(pulse: &SampledPulse, lambda: Complex64) -> (Complex64, Complex64) {
    let grid = pulse.grid();
    let dt = grid.dt();
    let t_lo = grid.t_start() - 0.5 * dt;
    let s = pulse.samples();
    let fine = transfer(s.iter().map(|&q| (q, dt)), lambda, t_lo);

    let zero = Complex64::new(0.0, 0.0);
    let at = |i: isize| -> Complex64 {
        if i < 0 || i as usize >= s.len() {
            zero
        } else {
            s[i as usize]
        }
    };
    let coarse_cells = (0..s.len().div_ceil(2)).map(|j| {
        let i = 2 * j as isize;
        let mid = (9.0 * (at(i) + at(i + 1)) - at(i - 1) - at(i + 2)) / 16.0;
        (mid, 2.0 * dt)
    });
    let coarse = transfer(coarse_cells, lambda, t_lo);

    (
        (4.0 * fine.0 - coarse.0) / 3.0,
        (4.0 * fine.1 - coarse.1) / 3.0,
    )
}

/// Scaled state of a sweep: the true solution is `v * exp(log_scale)` times
/// the analytic boundary factor of the sweep.
#[derive(Clone, Copy)]
struct SweepState {
    v: [Complex64; 2],
    log_scale: f64,
}

/// Sweep over `cells` (right to left when `backward`), recording the state at
/// every cell boundary in left-to-right order.
fn sweep_states(cells: &[(Complex64, f64)], lambda: Complex64, start: [Complex64; 2], backward: bool) -> Vec<SweepState> {
    let lambda_sq = lambda * lambda;
    let jl = J * lambda;
    let sign = if backward { -1.0 } else { 1.0 };
    let mut st = SweepState { v: start, log_scale: 0.0 };
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.push(st);
    let step = |st: &mut SweepState, q: Complex64, h: f64| {
        let (ch, sh) = cell_exponential(lambda_sq, q, h);
        // exp(-M h) for the backward sweep
        let sh = sign * sh;
        let [v1, v2] = st.v;
        st.v = [ch * v1 + sh * (-jl * v1 + q * v2), ch * v2 + sh * (-q.conj() * v1 + jl * v2)];
        let mag = st.v[0].norm().max(st.v[1].norm());
        if mag > 1e50 || (mag < 1e-50 && mag > 0.0) {
            st.v[0] /= mag;
            st.v[1] /= mag;
            st.log_scale += mag.ln();
        }
    };
    if backward {
        for &(q, h) in cells.iter().rev() {
            step(&mut st, q, h);
            out.push(st);
        }
        out.reverse();
    } else {
        for &(q, h) in cells {
            step(&mut st, q, h);
            out.push(st);
        }
    }
    out
}

/// `b(lambda_k)` at an eigenvalue from the proportionality of the left and
/// right Jost solutions, `phi = b * psi`, matched where the bound state peaks.
///
/// The forward limit of `v2` is useless here: any residual `a` multiplies a
/// mode that grows across the whole grid.
fn bound_state_b_cells(cells: &[(Complex64, f64)], lambda: Complex64, t_lo: f64, stride: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let left = sweep_states(cells, lambda, [one, zero], false);
    let right = sweep_states(cells, lambda, [zero, one], true);
    let t_hi = t_lo + cells.iter().map(|c| c.1).sum::<f64>();
    let jl = J * lambda;
    // log|phi| + log|psi| including the boundary factors exp(-j l t_lo), exp(j l t_hi)
    let offset = (-jl * t_lo).re + (jl * t_hi).re;
    let weights: Vec<f64> = left
        .iter()
        .zip(&right)
        .step_by(stride)
        .map(|(l, r)| {
            let nl = l.v[0].norm().max(l.v[1].norm());
            let nr = r.v[0].norm().max(r.v[1].norm());
            nl.ln() + l.log_scale + nr.ln() + r.log_scale + offset
        })
        .collect();
    let best = weights
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bw), (i, &w)| if w > bw { (i, w) } else { (bi, bw) })
        .0;
    let (l, r) = (left[best * stride], right[best * stride]);
    let ratio = (l.v[0] * r.v[0].conj() + l.v[1] * r.v[1].conj()) / (r.v[0].norm_sqr() + r.v[1].norm_sqr());
    ratio * (l.log_scale - r.log_scale - jl * (t_lo + t_hi)).exp()
}

/// Richardson-extrapolated bound-state `b`, matched at the same boundary on
/// both the fine and the coarse grid.
fn bound_state_b(pulse: &SampledPulse, lambda: Complex64) -> Complex64 {
    let grid = pulse.grid();
    let dt = grid.dt();
    let t_lo = grid.t_start() - 0.5 * dt;
    let s = pulse.samples();
    let zero = Complex64::new(0.0, 0.0);
    // Pad to an even count so coarse cells tile the same interval.
    let mut fine: Vec<(Complex64, f64)> = s.iter().map(|&q| (q, dt)).collect();
    if fine.len() % 2 == 1 {
        fine.push((zero, dt));
    }
    let at = |i: isize| -> Complex64 {
        if i < 0 || i as usize >= s.len() {
            zero
        } else {
            s[i as usize]
        }
    };
    let coarse: Vec<(Complex64, f64)> = (0..fine.len() / 2)
        .map(|j| {
            let i = 2 * j as isize;
            ((9.0 * (at(i) + at(i + 1)) - at(i - 1) - at(i + 2)) / 16.0, 2.0 * dt)
        })
        .collect();
    let b_fine = bound_state_b_cells(&fine, lambda, t_lo, 2);
    let b_coarse = bound_state_b_cells(&coarse, lambda, t_lo, 1);
    (4.0 * b_fine - b_coarse) / 3.0
}

fn check_pulse(pulse: &SampledPulse) -> Result<()> {
    pulse.check_decay(DEFAULT_DECAY_TOL)
}

/// Jost coefficients of `pulse` at `lambda` (`Im(lambda) >= 0`).
pub fn scatter(pulse: &SampledPulse, lambda: Complex64) -> Result<JostPair> {
    check_pulse(pulse)?;
    if lambda.im < 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda must be finite with Im >= 0, got {lambda}"
        )));
    }
    let (a, b) = jost_coefficients(pulse, lambda);
    let degraded = lambda.im == 0.0 && (a.norm_sqr() + b.norm_sqr() - 1.0).abs() > UNIMODULARITY_TOL;
    Ok(JostPair { a, b, lambda, degraded })
}

fn a_at(pulse: &SampledPulse, lambda: Complex64) -> Complex64 {
    jost_coefficients(pulse, lambda).0
}

/// Newton iteration on `a(lambda) / prod(lambda - r)` for the already found
/// roots `r`, stopping on the undeflated residual.
fn newton(
    pulse: &SampledPulse,
    start: Complex64,
    found: &[Complex64],
) -> std::result::Result<Complex64, (usize, f64)> {
    let mut lambda = start;
    let mut residual = f64::INFINITY;
    for _ in 0..=NEWTON_MAX_ITER {
        let a = a_at(pulse, lambda);
        residual = a.norm();
        if residual < NEWTON_TOL {
            return Ok(lambda);
        }
        let h = NEWTON_DIFF_STEP;
        let da = (a_at(pulse, lambda + h) - a_at(pulse, lambda - h)) / (2.0 * h);
        // f = a / D, f'/f = a'/a - sum 1/(lambda - r)
        let log_deriv = da / a - found.iter().map(|r| 1.0 / (lambda - r)).sum::<Complex64>();
        if log_deriv.norm() == 0.0 || !log_deriv.re.is_finite() {
            break;
        }
        let step = 1.0 / log_deriv;
        lambda -= step;
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            break;
        }
    }
    Err((NEWTON_MAX_ITER, residual))
}

/// All eigenvalues `j*sigma`, `0 < sigma <= sigma_max`, sorted by ascending sigma.
///
/// `a(j*sigma)` is scanned on `n_seed` equispaced points. Sign changes of its real
/// part and local minima of `|a|` seed a deflated Newton refinement.
pub fn find_eigenvalues(pulse: &SampledPulse, sigma_max: f64, n_seed: usize) -> Result<Vec<Complex64>> {
    check_pulse(pulse)?;
    if !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(Error::InvalidInput(format!("sigma_max must be positive, got {sigma_max}")));
    }
    if n_seed < 8 {
        return Err(Error::InvalidInput(format!("n_seed must be at least 8, got {n_seed}")));
    }
    let step = sigma_max / n_seed as f64;
    let seeds: Vec<f64> = (1..=n_seed).map(|i| step * i as f64).collect();
    let values: Vec<Complex64> =
        seeds.par_iter().map(|&s| a_at(pulse, Complex64::new(0.0, s))).collect();

    // Sign changes first: they are certain roots. Minima catch close pairs.
    let mut bracketed = Vec::new();
    let mut minima = Vec::new();
    for i in 0..n_seed {
        if i + 1 < n_seed && values[i].re * values[i + 1].re < 0.0 {
            let (s0, s1) = (seeds[i], seeds[i + 1]);
            let (f0, f1) = (values[i].re, values[i + 1].re);
            bracketed.push(s0 - f0 * (s1 - s0) / (f1 - f0));
        }
        let left = if i == 0 { f64::INFINITY } else { values[i - 1].norm() };
        let right = if i + 1 == n_seed { f64::INFINITY } else { values[i + 1].norm() };
        let here = values[i].norm();
        if here < left && here < right && here < 0.5 {
            minima.push(seeds[i]);
        }
    }

    let mut roots: Vec<Complex64> = Vec::new();
    let accept = |roots: &mut Vec<Complex64>, root: Complex64| -> Result<()> {
        if root.im <= 0.0 || roots.iter().any(|r| (r - root).norm() < 1e-7) {
            return Ok(());
        }
        if root.im > sigma_max - 0.5 * step {
            return Err(Error::SearchRangeTooSmall { sigma_max });
        }
        roots.push(root);
        Ok(())
    };

    for &s in &bracketed {
        match newton(pulse, Complex64::new(0.0, s), &roots) {
            Ok(root) => accept(&mut roots, root)?,
            Err((iterations, residual)) => return Err(Error::NoConvergence { iterations, residual }),
        }
    }
    for &s in &minima {
        // Repeat from the same seed: a close pair may hide two roots in one minimum.
        for _ in 0..2 {
            match newton(pulse, Complex64::new(0.0, s), &roots) {
                Ok(root) => {
                    let before = roots.len();
                    accept(&mut roots, root)?;
                    if roots.len() == before {
                        break;
                    }
                }
                Err(_) => break,
            }
        }
    }
    roots.sort_by(|x, y| x.im.total_cmp(&y.im));
    Ok(roots)
}

/// `Q_d = b(lambda_k) / a'(lambda_k)` with `a'` by central difference.
pub fn spectral_amplitude(pulse: &SampledPulse, lambda_k: Complex64) -> Result<Complex64> {
    check_pulse(pulse)?;
    let a = a_at(pulse, lambda_k);
    if a.norm() > 1e-4 {
        return Err(Error::NotAnEigenvalue { lambda: lambda_k.to_string(), residual: a.norm() });
    }
    let h = AMPLITUDE_DIFF_STEP;
    let da = (a_at(pulse, lambda_k + h) - a_at(pulse, lambda_k - h)) / (2.0 * h);
    if da.norm() < 1e-8 {
        return Err(Error::DegenerateRoot { lambda: lambda_k.to_string(), derivative: da.norm() });
    }
    Ok(bound_state_b(pulse, lambda_k) / da)
}

/// `Q_c(lambda) = b / a` on real frequencies.
pub fn continuous_spectrum(pulse: &SampledPulse, lambda_grid: &[f64]) -> Result<Vec<Complex64>> {
    check_pulse(pulse)?;
    if let Some(bad) = lambda_grid.iter().find(|l| !l.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite frequency {bad}")));
    }
    Ok(lambda_grid
        .par_iter()
        .map(|&l| {
            let (a, b) = jost_coefficients(pulse, Complex64::new(l, 0.0));
            b / a
        })
        .collect())
}

/// Eigenvalues and spectral amplitudes of `pulse`, projected onto the imaginary axis.
pub fn discrete_spectrum(pulse: &SampledPulse, sigma_max: f64, n_seed: usize) -> Result<DiscreteSpectrum> {
    let roots = find_eigenvalues(pulse, sigma_max, n_seed)?;
    let entries = roots
        .iter()
        .map(|&l| Ok(SpectralEntry::new(l.im, spectral_amplitude(pulse, l)?)))
        .collect::<Result<Vec<_>>>()?;
    DiscreteSpectrum::new(entries)
}

/// Heuristic upper bound for the eigenvalue search: a bound state needs
/// `sigma < max|q|`, padded by one so the boundary check has room.
pub fn default_sigma_max(pulse: &SampledPulse) -> f64 {
    pulse.peak() + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::TimeGrid;
    use std::f64::consts::PI;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    fn sech_pulse(amp: f64, half_span: f64, dt: f64) -> SampledPulse {
        let grid = TimeGrid::centered(half_span, dt).unwrap();
        SampledPulse::from_fn(grid, |t| Complex64::new(amp * sech(t), 0.0))
    }

    #[test]
    fn zero_pulse_leaves_boundary_state_unchanged() {
        let pulse = SampledPulse::zeros(TimeGrid::centered(10.0, 0.1).unwrap());
        let jp = scatter(&pulse, Complex64::new(0.3, 0.1)).unwrap();
        assert!((jp.a - 1.0).norm() < 1e-12);
        assert!(jp.b.norm() < 1e-12);
        assert!(find_eigenvalues(&pulse, 2.0, 32).unwrap().is_empty());
        let qc = continuous_spectrum(&pulse, &[-1.0, 0.0, 2.5]).unwrap();
        assert!(qc.iter().all(|q| q.norm() == 0.0));
    }

    #[test]
    fn fundamental_soliton_is_a_root() {
        let pulse = sech_pulse(-1.0, 30.0, 0.01);
        let jp = scatter(&pulse, Complex64::new(0.0, 0.5)).unwrap();
        assert!(jp.a.norm() < 1e-6, "|a| = {}", jp.a.norm());
        // a(lambda) = (lambda - j sigma)/(lambda + j sigma) away from the root
        let l = Complex64::new(0.0, 1.2);
        let exact = (l - Complex64::new(0.0, 0.5)) / (l + Complex64::new(0.0, 0.5));
        assert!((scatter(&pulse, l).unwrap().a - exact).norm() < 1e-5);
    }

    #[test]
    fn rectangular_pulse_at_zero_frequency() {
        // q = 1 on [0, pi/2]: cells of width dt centred on samples tile the interval exactly.
        let n_in = 400;
        let dt = PI / 2.0 / n_in as f64;
        let pad = 200;
        let grid = TimeGrid::new(0.5 * dt - pad as f64 * dt, dt, n_in + 2 * pad).unwrap();
        let samples = (0..grid.len())
            .map(|i| {
                let inside = i >= pad && i < pad + n_in;
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        let pulse = SampledPulse::new(grid, samples).unwrap();
        let jp = scatter(&pulse, Complex64::new(0.0, 0.0)).unwrap();
        assert!(jp.a.norm() < 1e-3);
        assert!(!jp.degraded);
        let qc = continuous_spectrum(&pulse, &[0.0]).unwrap();
        assert!(qc[0].norm() > 1.0);
    }

    #[test]
    fn satsuma_yajima_eigenvalues() {
        let pulse = sech_pulse(2.0, 30.0, 0.005);
        let eig = find_eigenvalues(&pulse, 3.0, 64).unwrap();
        assert_eq!(eig.len(), 2);
        assert!((eig[0] - Complex64::new(0.0, 0.5)).norm() < 1e-5, "{eig:?}");
        assert!((eig[1] - Complex64::new(0.0, 1.5)).norm() < 1e-5, "{eig:?}");
    }

    #[test]
    fn unimodular_on_the_real_axis() {
        let pulse = sech_pulse(1.7, 25.0, 0.01);
        for l in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let jp = scatter(&pulse, Complex64::new(l, 0.0)).unwrap();
            assert!((jp.a.norm_sqr() + jp.b.norm_sqr() - 1.0).abs() < 1e-4);
            assert!(!jp.degraded);
        }
    }

    #[test]
    fn non_decaying_pulse_is_rejected() {
        let pulse = sech_pulse(1.0, 3.0, 0.01);
        assert!(matches!(
            scatter(&pulse, Complex64::new(0.0, 0.5)),
            Err(Error::NonDecayingPulse { .. })
        ));
    }

    #[test]
    fn search_range_boundary() {
        let pulse = sech_pulse(2.0, 30.0, 0.01);
        assert!(matches!(
            find_eigenvalues(&pulse, 1.52, 32),
            Err(Error::SearchRangeTooSmall { .. })
        ));
    }

    #[test]
    fn amplitude_requires_a_root() {
        let pulse = sech_pulse(-1.0, 30.0, 0.01);
        assert!(matches!(
            spectral_amplitude(&pulse, Complex64::new(0.0, 0.8)),
            Err(Error::NotAnEigenvalue { .. })
        ));
    }
}
