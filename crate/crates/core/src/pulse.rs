//! Time grids and sampled complex envelopes.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default ratio `|q(edge)| / max|q|` below which a pulse counts as decayed.
pub const DEFAULT_DECAY_TOL: f64 = 1e-6;

/// Uniform time grid `t_start + i * dt`, `i = 0..n_samples`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n_samples: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if n_samples < 2 {
            return Err(Error::InvalidInput(format!(
                "a grid needs at least 2 samples, got {n_samples}"
            )));
        }
        if !t_start.is_finite() {
            return Err(Error::InvalidInput("t_start must be finite".into()));
        }
        Ok(TimeGrid { t_start, dt, n_samples })
    }

    /// Grid on `[t_min, t_max]` with spacing at most `dt`; both ends are samples.
    pub fn spanning(t_min: f64, t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max > t_min) {
            return Err(Error::InvalidInput(format!("empty interval [{t_min}, {t_max}]")));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        let intervals = ((t_max - t_min) / dt).ceil().max(1.0) as usize;
        TimeGrid::new(t_min, (t_max - t_min) / intervals as f64, intervals + 1)
    }

    /// Grid symmetric about zero: `t = (i - (n-1)/2) * dt`.
    pub fn centered(half_span: f64, dt: f64) -> Result<Self> {
        TimeGrid::spanning(-half_span, half_span, dt)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_samples - 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |i| self.time(i))
    }
}

/// Uniformly sampled normalized envelope `q(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl SampledPulse {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidInput("pulse contains non-finite samples".into()));
        }
        Ok(SampledPulse { grid, samples })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.times().map(f).collect();
        SampledPulse { grid, samples }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        SampledPulse { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Ratio of the larger boundary magnitude to the peak (0 for a zero pulse).
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self.samples[0].norm().max(self.samples[self.samples.len() - 1].norm());
        edge / peak
    }

    pub fn check_decay(&self, tol: f64) -> Result<()> {
        let ratio = self.edge_ratio();
        if ratio > tol {
            return Err(Error::NonDecayingPulse { ratio, tol });
        }
        Ok(())
    }

    /// `max_t |q(t) - q(-t)| / max|q|`, assuming a grid symmetric about zero.
    pub fn symmetry_residual(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.samples.len();
        (0..n / 2)
            .map(|i| (self.samples[i] - self.samples[n - 1 - i]).norm())
            .fold(0.0, f64::max)
            / peak
    }

    /// Time of the sample with the largest magnitude.
    pub fn peak_time(&self) -> f64 {
        let (idx, _) = self
            .samples
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, s)| if s.norm() > bv { (i, s.norm()) } else { (bi, bv) });
        self.grid.time(idx)
    }

    /// Linear interpolation of the envelope at `t` (zero outside the grid).
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let x = (t - self.grid.t_start()) / self.grid.dt();
        if x < 0.0 || x > (self.samples.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(self.samples.len() - 2);
        let frac = x - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Multiply every sample by `factor`.
    pub fn scaled(&self, factor: Complex64) -> SampledPulse {
        SampledPulse { grid: self.grid, samples: self.samples.iter().map(|s| s * factor).collect() }
    }
}
