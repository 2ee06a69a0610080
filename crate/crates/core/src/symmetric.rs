//! Symmetric multi-solitons and closed-form duration/bandwidth estimates.
//!
//! With eigenvalues `j*sigma_k`, the N-soliton is even in time, and stays even
//! under propagation, exactly when
//!
//! ```text
//! |Q_d(j sigma_k)| = 2 sigma_k prod_{m != k} |(sigma_k + sigma_m) / (sigma_k - sigma_m)|
//! ```
//!
//! Other magnitudes are parametrized relative to these by `eta_k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{DiscreteSpectrum, SpectralEntry};

/// Validity guard: [`t_sym`] requires `epsilon < T_SYM_GUARD * sigma_1 / sum(sigma)`.
pub const T_SYM_GUARD: f64 = 0.1;

/// Imaginary parts of the eigenvalues, strictly ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueSet {
    sigmas: Vec<f64>,
}

impl EigenvalueSet {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::InvalidInput("at least one eigenvalue is required".into()));
        }
        if sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidInput(format!("eigenvalues must be positive: {sigmas:?}")));
        }
        if sigmas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "eigenvalues must be strictly ascending: {sigmas:?}"
            )));
        }
        Ok(EigenvalueSet { sigmas })
    }

    /// `sigma_1 * [1, r_2, ..., r_N]`.
    pub fn from_ratios(sigma_1: f64, ratios: &[f64]) -> Result<Self> {
        let mut sigmas = vec![sigma_1];
        sigmas.extend(ratios.iter().map(|r| r * sigma_1));
        Self::new(sigmas)
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.sigmas[0]
    }

    pub fn max(&self) -> f64 {
        self.sigmas[self.sigmas.len() - 1]
    }

    pub fn sum(&self) -> f64 {
        self.sigmas.iter().sum()
    }

    /// `sigma_k / sigma_1` for every k, starting with 1.
    pub fn ratios(&self) -> Vec<f64> {
        self.sigmas.iter().map(|s| s / self.sigmas[0]).collect()
    }

    pub fn energy(&self) -> f64 {
        4.0 * self.sum()
    }
}

/// Magnitudes relative to the symmetric amplitudes; `eta_1 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaVector {
    etas: Vec<f64>,
}

impl EtaVector {
    pub fn new(etas: Vec<f64>) -> Result<Self> {
        if etas.is_empty() || etas[0] != 1.0 {
            return Err(Error::InvalidInput(format!("eta_1 must be 1, got {etas:?}")));
        }
        if etas.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidInput(format!("etas must be positive: {etas:?}")));
        }
        Ok(EtaVector { etas })
    }

    /// `[1, free...]`.
    pub fn from_free(free: &[f64]) -> Result<Self> {
        let mut etas = vec![1.0];
        etas.extend_from_slice(free);
        Self::new(etas)
    }

    pub fn ones(n: usize) -> Self {
        EtaVector { etas: vec![1.0; n.max(1)] }
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Spectral-amplitude magnitudes of the symmetric N-soliton.
pub fn symmetric_amplitudes(omega: &EigenvalueSet) -> Result<Vec<f64>> {
    let s = omega.sigmas();
    let mut out = Vec::with_capacity(s.len());
    for (k, &sk) in s.iter().enumerate() {
        let mut prod = 2.0 * sk;
        for (m, &sm) in s.iter().enumerate() {
            if m == k {
                continue;
            }
            let gap = (sk - sm).abs();
            if gap < 1e-12 {
                return Err(Error::DegenerateEigenvalues(gap));
            }
            prod *= (sk + sm) / gap;
        }
        out.push(prod);
    }
    Ok(out)
}

/// Spectrum with magnitudes `eta_k * |Q_d,sym|` and phases `phi_k`.
pub fn build_spectrum(omega: &EigenvalueSet, etas: &EtaVector, phases: &[f64]) -> Result<DiscreteSpectrum> {
    let n = omega.len();
    if etas.len() != n || phases.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n} eigenvalues but {} etas and {} phases",
            etas.len(),
            phases.len()
        )));
    }
    let mags = symmetric_amplitudes(omega)?;
    let entries = omega
        .sigmas()
        .iter()
        .zip(&mags)
        .zip(etas.etas())
        .zip(phases)
        .map(|(((&s, &m), &eta), &phi)| SpectralEntry::new(s, Complex64::from_polar(eta * m, phi)))
        .collect();
    DiscreteSpectrum::new(entries)
}

/// Symmetric spectrum (all `eta_k = 1`) with the given phases.
pub fn build_symmetric_spectrum(omega: &EigenvalueSet, phases: &[f64]) -> Result<DiscreteSpectrum> {
    build_spectrum(omega, &EtaVector::ones(omega.len()), phases)
}

/// Estimated duration of the symmetric N-soliton,
/// `(1/2 sigma_1) (2 sum_{m>1} ln((sigma_m + sigma_1)/(sigma_m - sigma_1)) + ln(2/eps) - ln(sum sigma / sigma_1))`.
pub fn t_sym(omega: &EigenvalueSet, epsilon: f64) -> Result<f64> {
    let s1 = omega.min();
    let bound = T_SYM_GUARD * s1 / omega.sum();
    if !(epsilon > 0.0) || epsilon >= bound {
        return Err(Error::ValidityViolated { epsilon, bound });
    }
    let pair_terms: f64 = omega.sigmas()[1..].iter().map(|&sm| ((sm + s1) / (sm - s1)).ln()).sum();
    Ok((2.0 * pair_terms + (2.0 / epsilon).ln() - (omega.sum() / s1).ln()) / (2.0 * s1))
}

/// Lower bound on the worst-case bandwidth,
/// `(2 sigma_N / pi^2) (ln(2/eps) - ln(sum sigma / sigma_N))`.
pub fn b_sep(omega: &EigenvalueSet, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let sn = omega.max();
    Ok(2.0 * sn / (PI * PI) * ((2.0 / epsilon).ln() - (omega.sum() / sn).ln()))
}

/// Time-bandwidth product per eigenvalue estimated as `T_sym * B_sep / N`.
pub fn tb_estimate(omega: &EigenvalueSet, epsilon: f64) -> Result<f64> {
    Ok(t_sym(omega, epsilon)? * b_sep(omega, epsilon)? / omega.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::time_bandwidth_1;

    fn set(s: &[f64]) -> EigenvalueSet {
        EigenvalueSet::new(s.to_vec()).unwrap()
    }

    #[test]
    fn amplitudes() {
        assert_eq!(symmetric_amplitudes(&set(&[0.5, 1.0])).unwrap(), vec![3.0, 6.0]);
        assert_eq!(symmetric_amplitudes(&set(&[0.7])).unwrap(), vec![1.4]);
        let a = symmetric_amplitudes(&set(&[0.5, 0.64, 0.675])).unwrap();
        let expect0 = 1.0 * (1.14 / 0.14) * (1.175 / 0.175);
        assert!((a[0] - expect0).abs() < 1e-9 * expect0);
        assert!(matches!(
            symmetric_amplitudes(&set(&[0.5, 0.5 + 1e-13])),
            Err(Error::DegenerateEigenvalues(_))
        ));
    }

    #[test]
    fn duration_estimate() {
        assert!((t_sym(&set(&[0.5]), 1e-4).unwrap() - 9.9035).abs() < 1e-3);
        assert!((t_sym(&set(&[0.5, 1.0]), 1e-4).unwrap() - 11.002).abs() < 1e-3);
        assert!(matches!(t_sym(&set(&[0.5, 1.0]), 0.05), Err(Error::ValidityViolated { .. })));
    }

    #[test]
    fn separation_bound() {
        assert!((b_sep(&set(&[0.5]), 1e-4).unwrap() - 1.0034).abs() < 1e-3);
        assert!((b_sep(&set(&[0.5, 1.0]), 1e-4).unwrap() - 1.925).abs() < 1e-3);
    }

    #[test]
    fn product_estimate() {
        assert!((tb_estimate(&set(&[0.5, 1.0]), 1e-4).unwrap() - 10.59).abs() < 1e-2);
        for eps in [1e-3, 1e-4, 1e-10] {
            let one = tb_estimate(&set(&[0.8]), eps).unwrap();
            assert!((one - time_bandwidth_1(eps).unwrap()).abs() < 1e-12 * one);
        }
    }

    #[test]
    fn eta_normalization() {
        assert!(EtaVector::new(vec![0.5, 1.0]).is_err());
        assert!(EtaVector::from_free(&[0.0]).is_err());
        assert_eq!(EtaVector::from_free(&[0.3]).unwrap().etas(), &[1.0, 0.3]);
    }
}
