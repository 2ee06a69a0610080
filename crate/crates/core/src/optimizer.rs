//! Worst-case duration and bandwidth over spectral phases, and the searches
//! over amplitude magnitudes (`eta`) and eigenvalue ratios built on top.
//!
//! Every evaluation synthesizes a pulse and measures it; evaluations are
//! independent and run on the ambient rayon pool. Reductions scan results in
//! grid order with the lowest index winning ties, so the output does not
//! depend on the number of workers.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::darboux::synthesize;
use crate::error::{Error, Result};
use crate::metrics::{measure, time_bandwidth_1};
use crate::pulse::{SampledPulse, TimeGrid};
use crate::symmetric::{b_sep, build_spectrum, EigenvalueSet, EtaVector};

/// Phase-grid search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSearch {
    /// Points per free phase axis, on the coarse grid and on every refinement.
    pub coarse_n: usize,
    pub refine_rounds: usize,
}

impl Default for PhaseSearch {
    fn default() -> Self {
        PhaseSearch { coarse_n: 64, refine_rounds: 2 }
    }
}

/// Amplitude-magnitude search parameters.
///
/// `eta_2` runs over `[eta_min, 1]`; reflection in time maps every `eta_k` to
/// `1 / eta_k`, so that covers both orientations. The remaining magnitudes
/// are not constrained by that symmetry and run over `[eta_min, 1 / eta_min]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSearch {
    /// Logarithmic grid density of the initial scan.
    pub points_per_decade: usize,
    pub eta_min: f64,
    /// Rounds of re-gridding the +-1 cell neighbourhood of the optimum.
    pub refine_rounds: usize,
    /// Points per axis in each refinement round.
    pub refine_points: usize,
    pub phases: PhaseSearch,
}

impl Default for EtaSearch {
    fn default() -> Self {
        EtaSearch {
            points_per_decade: 4,
            eta_min: 1e-3,
            refine_rounds: 2,
            refine_points: 7,
            phases: PhaseSearch::default(),
        }
    }
}

impl EtaSearch {
    /// Initial scan points for free axis `k` (0 for `eta_2`).
    pub fn axis(&self, k: usize) -> Vec<f64> {
        let hi = if k == 0 { 1.0 } else { 1.0 / self.eta_min };
        let decades = (hi / self.eta_min).log10();
        let n = (decades * self.points_per_decade as f64).round() as usize + 1;
        logspace(self.eta_min, hi, n.max(2))
    }
}

/// Extremes of `T_w` and `B_w` over all phase combinations with `phi_1 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSweepResult {
    pub t_max: f64,
    pub b_max: f64,
    pub b_min: f64,
    pub phases_at_tmax: Vec<f64>,
    pub phases_at_bmax: Vec<f64>,
    pub phases_at_bmin: Vec<f64>,
    pub epsilon: f64,
    /// `T_max` and `B_max` on the coarse grid, before refinement.
    pub coarse_t_max: f64,
    pub coarse_b_max: f64,
    pub coarse_b_min: f64,
}

/// One row of an eta or eigenvalue sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sigma_ratios: Vec<f64>,
    pub etas: Vec<f64>,
    pub epsilon: f64,
    pub t_max: f64,
    pub b_max: f64,
    pub tb_per_eig: f64,
    pub tb_ratio_vs_1soliton: f64,
}

impl SweepRecord {
    pub fn new(omega: &EigenvalueSet, etas: &EtaVector, epsilon: f64, t_max: f64, b_max: f64) -> Result<Self> {
        let tb_per_eig = t_max * b_max / omega.len() as f64;
        Ok(SweepRecord {
            sigma_ratios: omega.ratios(),
            etas: etas.etas().to_vec(),
            epsilon,
            t_max,
            b_max,
            tb_per_eig,
            tb_ratio_vs_1soliton: tb_per_eig / time_bandwidth_1(epsilon)?,
        })
    }
}

/// `T_sym` without its validity guard, for grid sizing only.
fn t_sym_raw(omega: &EigenvalueSet, epsilon: f64) -> f64 {
    let s1 = omega.min();
    let pairs: f64 = omega.sigmas()[1..].iter().map(|&s| ((s + s1) / (s - s1)).ln()).sum();
    ((2.0 * pairs + (2.0 / epsilon).ln() - (omega.sum() / s1).ln()) / (2.0 * s1)).max(0.0)
}

/// A-priori grid for the pulses of `(omega, etas)` at threshold `epsilon`.
///
/// Span `2 (T_sym + 6 / (2 sigma_1))`, widened by the spread of the component
/// offsets `ln(eta_k) / (2 sigma_k)` and centred between them; the step puts
/// the Nyquist frequency at `4 B_sep`.
pub fn auto_grid(omega: &EigenvalueSet, etas: &EtaVector, epsilon: f64) -> Result<TimeGrid> {
    sized_grid(omega, etas.etas(), epsilon, 4.0)
}

/// [`auto_grid`] for unnormalized magnitudes `rel_mags` (relative to the
/// symmetric amplitudes) and Nyquist frequency `nyquist_factor * B_sep`.
pub fn sized_grid(omega: &EigenvalueSet, rel_mags: &[f64], epsilon: f64, nyquist_factor: f64) -> Result<TimeGrid> {
    if rel_mags.len() != omega.len() || rel_mags.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidInput(format!("bad relative magnitudes {rel_mags:?}")));
    }
    let offsets: Vec<f64> = omega.sigmas().iter().zip(rel_mags).map(|(s, e)| e.ln() / (2.0 * s)).collect();
    let lo = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half_span = t_sym_raw(omega, epsilon) + 6.0 / (2.0 * omega.min()) + 0.5 * (hi - lo);
    let dt = 1.0 / (2.0 * nyquist_factor * b_sep(omega, epsilon)?);
    let centre = 0.5 * (lo + hi);
    TimeGrid::spanning(centre - half_span, centre + half_span, dt)
}

fn widen(grid: &TimeGrid) -> Result<TimeGrid> {
    let centre = 0.5 * (grid.t_start() + grid.t_end());
    let half = grid.t_end() - grid.t_start();
    TimeGrid::spanning(centre - half, centre + half, grid.dt())
}

/// `(T_w, B_w)` of the pulse with the given phases, doubling the grid span
/// once if it truncates the pulse.
pub fn evaluate(
    omega: &EigenvalueSet,
    etas: &EtaVector,
    phases: &[f64],
    epsilon: f64,
    grid: &TimeGrid,
) -> Result<(f64, f64)> {
    let spectrum = build_spectrum(omega, etas, phases)?;
    let e_total = omega.energy();
    let attempt = |g: &TimeGrid| -> Result<(f64, f64)> {
        let pulse = synthesize(&spectrum, g)?;
        let m = measure(&pulse, epsilon, e_total)?;
        Ok((m.t_w, m.b_w))
    };
    match attempt(grid) {
        Err(Error::InsufficientEnergy { .. }) => attempt(&widen(grid)?),
        other => other,
    }
}

/// Mixed-radix enumeration of an `n^dims` grid, first axis fastest.
fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = axes.iter().map(|a| a.len()).product();
    (0..total)
        .map(|mut idx| {
            axes.iter()
                .map(|a| {
                    let v = a[idx % a.len()];
                    idx /= a.len();
                    v
                })
                .collect()
        })
        .collect()
}

fn with_leading_zero(free: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(free.len() + 1);
    p.push(0.0);
    p.extend_from_slice(free);
    p
}

#[derive(Clone, Copy)]
enum Extreme {
    MaxT,
    MaxB,
    MinB,
}

impl Extreme {
    fn key(self, tb: (f64, f64)) -> f64 {
        match self {
            Extreme::MaxT => tb.0,
            Extreme::MaxB => tb.1,
            Extreme::MinB => -tb.1,
        }
    }
}

/// Index of the largest key; the first one wins ties.
fn argmax(values: &[(f64, f64)], which: Extreme) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if which.key(v) > which.key(values[best]) {
            best = i;
        }
    }
    best
}

/// Worst-case (`T_max`, `B_max`) and best-case (`B_min`) over phases.
///
/// The free phases `phi_2..phi_N` are first scanned on a uniform
/// `coarse_n`-point grid per axis. Each extreme is then refined
/// `refine_rounds` times by re-gridding the +-1 cell neighbourhood of the
/// current optimum with `coarse_n` points per axis.
pub fn phase_extremes(
    omega: &EigenvalueSet,
    etas: &EtaVector,
    epsilon: f64,
    search: &PhaseSearch,
) -> Result<PhaseSweepResult> {
    if etas.len() != omega.len() {
        return Err(Error::InvalidInput(format!(
            "{} eigenvalues but {} etas",
            omega.len(),
            etas.len()
        )));
    }
    if search.coarse_n < 2 {
        return Err(Error::InvalidInput("coarse_n must be at least 2".into()));
    }
    let grid = auto_grid(omega, etas, epsilon)?;
    let free = omega.len() - 1;
    let eval = |phases: &[f64]| evaluate(omega, etas, &with_leading_zero(phases), epsilon, &grid);

    if free == 0 {
        let (t, b) = eval(&[])?;
        let zero = vec![0.0];
        return Ok(PhaseSweepResult {
            t_max: t,
            b_max: b,
            b_min: b,
            phases_at_tmax: zero.clone(),
            phases_at_bmax: zero.clone(),
            phases_at_bmin: zero,
            epsilon,
            coarse_t_max: t,
            coarse_b_max: b,
            coarse_b_min: b,
        });
    }

    let n = search.coarse_n;
    let cell = 2.0 * PI / n as f64;
    let axis: Vec<f64> = (0..n).map(|i| i as f64 * cell).collect();
    let points = grid_points(&vec![axis; free]);
    let values = points.par_iter().map(|p| eval(p)).collect::<Result<Vec<_>>>()?;

    let refine = |which: Extreme| -> Result<(Vec<f64>, (f64, f64))> {
        let i = argmax(&values, which);
        let mut best_point = points[i].clone();
        let mut best_value = values[i];
        let mut half_width = cell;
        for _ in 0..search.refine_rounds {
            let axes: Vec<Vec<f64>> = best_point
                .iter()
                .map(|&c| (0..n).map(|j| c - half_width + 2.0 * half_width * j as f64 / (n - 1) as f64).collect())
                .collect();
            let pts = grid_points(&axes);
            let vals = pts.par_iter().map(|p| eval(p)).collect::<Result<Vec<_>>>()?;
            let j = argmax(&vals, which);
            if which.key(vals[j]) > which.key(best_value) {
                best_value = vals[j];
                best_point = pts[j].clone();
            }
            half_width = 2.0 * half_width / (n - 1) as f64;
        }
        let wrapped = best_point.iter().map(|p| p.rem_euclid(2.0 * PI)).collect::<Vec<_>>();
        Ok((with_leading_zero(&wrapped), best_value))
    };

    let coarse_t_max = values[argmax(&values, Extreme::MaxT)].0;
    let coarse_b_max = values[argmax(&values, Extreme::MaxB)].1;
    let coarse_b_min = values[argmax(&values, Extreme::MinB)].1;
    let (phases_at_tmax, tmax) = refine(Extreme::MaxT)?;
    let (phases_at_bmax, bmax) = refine(Extreme::MaxB)?;
    let (phases_at_bmin, bmin) = refine(Extreme::MinB)?;
    Ok(PhaseSweepResult {
        t_max: tmax.0,
        b_max: bmax.1,
        b_min: bmin.1,
        phases_at_tmax,
        phases_at_bmax,
        phases_at_bmin,
        epsilon,
        coarse_t_max,
        coarse_b_max,
        coarse_b_min,
    })
}

/// One record per `(epsilon, eta)` pair, epsilon-major.
pub fn eta_sweep(
    omega: &EigenvalueSet,
    epsilon_list: &[f64],
    eta_grid: &[EtaVector],
    search: &PhaseSearch,
) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::with_capacity(epsilon_list.len() * eta_grid.len());
    for &eps in epsilon_list {
        for etas in eta_grid {
            let r = phase_extremes(omega, etas, eps, search)?;
            out.push(SweepRecord::new(omega, etas, eps, r.t_max, r.b_max)?);
        }
    }
    Ok(out)
}

/// `resolution` points spaced logarithmically on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..resolution).map(|i| (a + (b - a) * i as f64 / (resolution - 1) as f64).exp()).collect()
}

/// Magnitudes minimizing `T_max * B_max` for fixed eigenvalues.
///
/// A logarithmic grid scan (see [`EtaSearch`]) followed by `refine_rounds`
/// re-griddings of the +-1 cell neighbourhood of the best point, in `ln eta`.
pub fn optimize_eta(omega: &EigenvalueSet, epsilon: f64, search: &EtaSearch) -> Result<(EtaVector, SweepRecord)> {
    let free = omega.len() - 1;
    let objective = |free_etas: &[f64]| -> Result<(f64, SweepRecord)> {
        let etas = EtaVector::from_free(free_etas)?;
        let r = phase_extremes(omega, &etas, epsilon, &search.phases)?;
        let rec = SweepRecord::new(omega, &etas, epsilon, r.t_max, r.b_max)?;
        Ok((r.t_max * r.b_max, rec))
    };
    if free == 0 {
        let (_, rec) = objective(&[])?;
        return Ok((EtaVector::ones(1), rec));
    }
    if search.points_per_decade == 0 || search.refine_points < 2 || !(search.eta_min > 0.0 && search.eta_min < 1.0) {
        return Err(Error::InvalidInput(format!("invalid eta search settings: {search:?}")));
    }

    let axes: Vec<Vec<f64>> = (0..free).map(|k| search.axis(k)).collect();
    let mut log_cells: Vec<f64> = axes.iter().map(|a| (a[1] / a[0]).ln()).collect();
    // Parallelism lives inside phase_extremes; grid points run in order.
    let mut best: Option<(f64, Vec<f64>, SweepRecord)> = None;
    let consider = |best: &mut Option<(f64, Vec<f64>, SweepRecord)>, p: Vec<f64>| -> Result<()> {
        let (obj, rec) = objective(&p)?;
        if best.as_ref().map_or(true, |b| obj < b.0) {
            *best = Some((obj, p, rec));
        }
        Ok(())
    };
    for p in grid_points(&axes) {
        consider(&mut best, p)?;
    }
    let m = search.refine_points;
    for _ in 0..search.refine_rounds {
        let centre = best.as_ref().expect("non-empty grid").1.clone();
        let axes: Vec<Vec<f64>> = centre
            .iter()
            .zip(&log_cells)
            .map(|(&c, &cell)| {
                let lo = c.ln() - cell;
                let hi = c.ln() + cell;
                (0..m).map(|j| (lo + (hi - lo) * j as f64 / (m - 1) as f64).exp()).collect()
            })
            .collect();
        for p in grid_points(&axes) {
            if p[0] <= 1.0 {
                consider(&mut best, p)?;
            }
        }
        for cell in log_cells.iter_mut() {
            *cell *= 2.0 / (m - 1) as f64;
        }
    }
    let (_, p, rec) = best.expect("non-empty grid");
    Ok((EtaVector::from_free(&p)?, rec))
}

/// For each ratio vector `[sigma_2/sigma_1, ...]`, the eta-optimized record.
/// `sigma_1` is fixed to 0.5; results are scale invariant.
pub fn eigenvalue_sweep(ratio_grid: &[Vec<f64>], epsilon: f64, search: &EtaSearch) -> Result<Vec<SweepRecord>> {
    ratio_grid
        .iter()
        .map(|ratios| {
            if ratios.iter().any(|&r| !(r > 1.0)) {
                return Err(Error::InvalidInput(format!("eigenvalue ratios must exceed 1: {ratios:?}")));
            }
            let omega = EigenvalueSet::from_ratios(0.5, ratios)?;
            Ok(optimize_eta(&omega, epsilon, search)?.1)
        })
        .collect()
}

/// Pulses for `phase_samples` phase combinations: combination `i` uses
/// `phi_k = 2 pi i (k - 1) / phase_samples`.
pub fn optimal_pulse_gallery(
    omega: &EigenvalueSet,
    etas: &EtaVector,
    epsilon: f64,
    phase_samples: usize,
) -> Result<Vec<SampledPulse>> {
    if phase_samples == 0 {
        return Err(Error::InvalidInput("phase_samples must be positive".into()));
    }
    let grid = auto_grid(omega, etas, epsilon)?;
    (0..phase_samples)
        .map(|i| {
            let phases: Vec<f64> = (0..omega.len())
                .map(|k| 2.0 * PI * (i * k) as f64 / phase_samples as f64)
                .collect();
            synthesize(&build_spectrum(omega, etas, &phases)?, &grid)
        })
        .collect()
}
