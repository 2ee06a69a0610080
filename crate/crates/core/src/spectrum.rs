//! Discrete nonlinear spectra with eigenvalues on the imaginary axis.

use num_complex::Complex64;
use crate::error::{Error, Result};

/// One eigenvalue `lambda = j*sigma` and its spectral amplitude `Q_d(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEntry {
    pub sigma: f64,
    pub qd: Complex64,
}

impl SpectralEntry {
    pub fn new(sigma: f64, qd: Complex64) -> Self {
        SpectralEntry { sigma, qd }
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(0.0, self.sigma)
    }
}

/// Discrete spectrum of an N-soliton, sorted by ascending `Im(lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    entries: Vec<SpectralEntry>,
}

impl DiscreteSpectrum {
    pub fn new(mut entries: Vec<SpectralEntry>) -> Result<Self> {
        for e in &entries {
            if !(e.sigma > 0.0) || !e.sigma.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "eigenvalue imaginary part must be positive, got {}",
                    e.sigma
                )));
            }
            if !e.qd.re.is_finite() || !e.qd.im.is_finite() || e.qd.norm() == 0.0 {
                return Err(Error::InvalidInput(format!(
                    "spectral amplitude must be finite and nonzero, got {}",
                    e.qd
                )));
            }
        }
        entries.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
        for w in entries.windows(2) {
            if w[0].sigma == w[1].sigma {
                return Err(Error::DuplicateEigenvalue(format!("{}j", w[0].sigma)));
            }
        }
        Ok(DiscreteSpectrum { entries })
    }

    pub fn from_parts(sigmas: &[f64], qds: &[Complex64]) -> Result<Self> {
        if sigmas.len() != qds.len() {
            return Err(Error::InvalidInput(format!(
                "{} eigenvalues but {} amplitudes",
                sigmas.len(),
                qds.len()
            )));
        }
        Self::new(sigmas.iter().zip(qds).map(|(&s, &q)| SpectralEntry::new(s, q)).collect())
    }

    pub fn empty() -> Self {
        DiscreteSpectrum { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.sigma).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.qd).collect()
    }

    /// Invariant energy `4 * sum(sigma_k)` of the corresponding N-soliton.
    pub fn energy(&self) -> f64 {
        4.0 * self.entries.iter().map(|e| e.sigma).sum::<f64>()
    }

    /// Same eigenvalues, amplitudes transformed entry by entry.
    pub fn map_amplitudes(&self, f: impl Fn(&SpectralEntry) -> Complex64) -> Self {
        DiscreteSpectrum {
            entries: self.entries.iter().map(|e| SpectralEntry::new(e.sigma, f(e))).collect(),
        }
    }
}
