//! Inverse NFT of purely discrete spectra by the recursive Darboux transformation.
//!
//! Every time sample is independent. Per sample, the auxiliary functions
//!
//! ```text
//! rho_k(t) = Q_d(l_k) / (l_k - l_k*) * prod_{m != k} (l_k - l_m) / (l_k - l_m*) * exp(2j l_k t)
//! ```
//!
//! are folded in one eigenvalue at a time:
//!
//! ```text
//! q   <- q + 2j (l_k - l_k*) rho* / (1 + |rho|^2)
//! rho_m <- [(l_m - l_k) rho_m + c/(1+|rho|^2) (rho_m - rho)]
//!        / [l_m - l_k* - c/(1+|rho|^2) (1 + rho* rho_m)],   c = l_k - l_k*
//! ```
//!
//! Samples where `|ln|rho_k(t)||` exceeds [`LOG_DOMAIN_THRESHOLD`] are evaluated
//! on log-scaled numbers so wide grids cannot overflow.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulse::{SampledPulse, TimeGrid};
use crate::spectrum::DiscreteSpectrum;

pub const LOG_DOMAIN_THRESHOLD: f64 = 300.0;
/// Largest `|rho|` tolerated by the plain floating-point path.
pub const RHO_LIMIT: f64 = 1e150;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Synthesize the N-soliton of `spectrum` on `grid`, inserting eigenvalues by
/// ascending `sigma`.
pub fn synthesize(spectrum: &DiscreteSpectrum, grid: &TimeGrid) -> Result<SampledPulse> {
    let pairs: Vec<(Complex64, Complex64)> =
        spectrum.entries().iter().map(|e| (e.lambda(), e.qd)).collect();
    synthesize_ordered(&pairs, grid)
}

/// Darboux recursion over `(lambda_k, Q_d(lambda_k))` in the given insertion order.
///
/// Eigenvalues may lie anywhere in the upper half plane.
pub fn synthesize_ordered(pairs: &[(Complex64, Complex64)], grid: &TimeGrid) -> Result<SampledPulse> {
    for (i, (l, q)) in pairs.iter().enumerate() {
        if !(l.im > 0.0) {
            return Err(Error::InvalidInput(format!("eigenvalue {l} is not in the upper half plane")));
        }
        if !q.re.is_finite() || !q.im.is_finite() || q.norm() == 0.0 {
            return Err(Error::InvalidInput(format!("invalid spectral amplitude {q}")));
        }
        for (m, _) in &pairs[..i] {
            if (l - m).norm() <= 1e-12 * l.norm().max(m.norm()) {
                return Err(Error::DuplicateEigenvalue(l.to_string()));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(SampledPulse::zeros(*grid));
    }

    let lambdas: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let coeffs: Vec<Complex64> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(lk, qd))| {
            let prod: Complex64 = lambdas
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != k)
                .map(|(_, &lm)| (lk - lm) / (lk - lm.conj()))
                .product();
            qd / (lk - lk.conj()) * prod
        })
        .collect();
    let log_coeffs: Vec<f64> = coeffs.iter().map(|c| c.norm().ln()).collect();

    let kernel = Kernel { lambdas: &lambdas, coeffs: &coeffs, log_coeffs: &log_coeffs };
    let samples: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .with_min_len(512)
        .map(|i| kernel.sample(grid.time(i)))
        .collect();
    if let Some(i) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
        return Err(Error::OverflowGuard { t: grid.time(i) });
    }
    SampledPulse::new(*grid, samples)
}

struct Kernel<'a> {
    lambdas: &'a [Complex64],
    coeffs: &'a [Complex64],
    log_coeffs: &'a [f64],
}

impl Kernel<'_> {
    fn sample(&self, t: f64) -> Complex64 {
        let needs_log = self
            .lambdas
            .iter()
            .zip(self.log_coeffs)
            .any(|(l, lc)| (lc - 2.0 * l.im * t).abs() > LOG_DOMAIN_THRESHOLD);
        if !needs_log {
            if let Some(q) = self.sample_plain(t) {
                return q;
            }
        }
        self.sample_log(t)
    }

    /// Plain complex arithmetic; `None` when some `|rho|` leaves the safe range.
    fn sample_plain(&self, t: f64) -> Option<Complex64> {
        let n = self.lambdas.len();
        let mut rho: [Complex64; 8] = [Complex64::new(0.0, 0.0); 8];
        let mut heap;
        let rho: &mut [Complex64] = if n <= 8 {
            &mut rho[..n]
        } else {
            heap = vec![Complex64::new(0.0, 0.0); n];
            &mut heap[..]
        };
        for k in 0..n {
            rho[k] = self.coeffs[k] * (2.0 * J * self.lambdas[k] * t).exp();
        }
        let mut q = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let r = rho[k];
            let rn = r.norm();
            if !(rn <= RHO_LIMIT) {
                return None;
            }
            let lk = self.lambdas[k];
            let c = lk - lk.conj();
            let w = 1.0 / (1.0 + rn * rn);
            // rho* / (1 + |rho|^2), written to stay finite for large |rho|
            let g = if rn > 1.0 { 1.0 / (r + r / (rn * rn)) } else { r.conj() * w };
            q += 2.0 * J * c * g;
            for m in (k + 1)..n {
                let lm = self.lambdas[m];
                let rm = rho[m];
                let num = (lm - lk) * rm + c * (w * rm - g.conj());
                let den = lm - lk.conj() - c * (w + g * rm);
                rho[m] = num / den;
            }
        }
        Some(q)
    }

    fn sample_log(&self, t: f64) -> Complex64 {
        let n = self.lambdas.len();
        let mut rho: Vec<LogComplex> = (0..n)
            .map(|k| {
                let l = self.lambdas[k];
                let phase = Complex64::new(0.0, 2.0 * l.re * t).exp();
                LogComplex::new(self.coeffs[k] * phase, -2.0 * l.im * t)
            })
            .collect();
        let mut q = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let r = rho[k];
            let lk = self.lambdas[k];
            let c = lk - lk.conj();
            // w = 1 / (1 + |rho|^2) = exp(-softplus(ln |rho|^2))
            let w = LogComplex::new(Complex64::new(1.0, 0.0), -softplus(2.0 * r.ln_norm()));
            let g = r.conj().mul(w);
            q += 2.0 * J * c * g.value();
            for m in (k + 1)..n {
                let lm = self.lambdas[m];
                let rm = rho[m];
                let num = rm.scale(lm - lk).add(w.mul(rm).sub(g.conj()).scale(c));
                let den = LogComplex::from(lm - lk.conj()).sub(w.add(g.mul(rm)).scale(c));
                rho[m] = num.div(den);
            }
        }
        q
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `mant * exp(log_scale)` with `|mant|` kept near one.
#[derive(Debug, Clone, Copy)]
struct LogComplex {
    mant: Complex64,
    log_scale: f64,
}

impl LogComplex {
    fn new(mant: Complex64, log_scale: f64) -> Self {
        let n = mant.norm();
        if n == 0.0 || !n.is_finite() {
            return LogComplex { mant, log_scale: if n == 0.0 { 0.0 } else { log_scale } };
        }
        LogComplex { mant: mant / n, log_scale: log_scale + n.ln() }
    }

    fn is_zero(&self) -> bool {
        self.mant.norm() == 0.0
    }

    fn ln_norm(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.norm().ln() + self.log_scale
        }
    }

    fn value(&self) -> Complex64 {
        if self.is_zero() {
            return self.mant;
        }
        self.mant * self.log_scale.exp()
    }

    fn conj(&self) -> Self {
        LogComplex { mant: self.mant.conj(), log_scale: self.log_scale }
    }

    fn mul(&self, o: LogComplex) -> Self {
        LogComplex::new(self.mant * o.mant, self.log_scale + o.log_scale)
    }

    fn div(&self, o: LogComplex) -> Self {
        LogComplex::new(self.mant / o.mant, self.log_scale - o.log_scale)
    }

    fn scale(&self, c: Complex64) -> Self {
        LogComplex::new(self.mant * c, self.log_scale)
    }

    fn add(&self, o: LogComplex) -> Self {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return *self;
        }
        let s = self.log_scale.max(o.log_scale);
        LogComplex::new(
            self.mant * (self.log_scale - s).exp() + o.mant * (o.log_scale - s).exp(),
            s,
        )
    }

    fn sub(&self, o: LogComplex) -> Self {
        self.add(LogComplex { mant: -o.mant, log_scale: o.log_scale })
    }
}

impl From<Complex64> for LogComplex {
    fn from(z: Complex64) -> Self {
        LogComplex::new(z, 0.0)
    }
}

/// Trapezoidal `integral |q|^2 dt` over the grid.
pub fn numerical_energy(pulse: &SampledPulse) -> f64 {
    let s = pulse.samples();
    let inner: f64 = s.iter().map(|x| x.norm_sqr()).sum();
    (inner - 0.5 * (s[0].norm_sqr() + s[s.len() - 1].norm_sqr())) * pulse.grid().dt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectralEntry;

    fn single(sigma: f64, qd: Complex64, half_span: f64, dt: f64) -> SampledPulse {
        let spec = DiscreteSpectrum::new(vec![SpectralEntry::new(sigma, qd)]).unwrap();
        synthesize(&spec, &TimeGrid::centered(half_span, dt).unwrap()).unwrap()
    }

    #[test]
    fn one_soliton_closed_form() {
        // Q_d = 2j sigma e^{j theta}  =>  q = -2 sigma e^{-j theta} sech(2 sigma t)
        let pulse = single(0.5, Complex64::new(0.0, 1.0), 25.0, 0.01);
        for (t, q) in pulse.grid().times().zip(pulse.samples()) {
            assert!((q - Complex64::new(-1.0 / t.cosh(), 0.0)).norm() < 1e-12);
        }
        let theta = 0.7;
        let qd = Complex64::new(0.0, 2.0 * 0.8) * Complex64::from_polar(1.0, theta);
        let pulse = single(0.8, qd, 25.0, 0.01);
        for (t, q) in pulse.grid().times().zip(pulse.samples()) {
            let exact = -1.6 * Complex64::from_polar(1.0, -theta) / (1.6 * t).cosh();
            assert!((q - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn sech_energy_is_two() {
        let pulse = single(0.5, Complex64::new(0.0, 1.0), 25.0, 0.01);
        assert!((numerical_energy(&pulse) - 2.0).abs() < 1e-6);
        let zero = SampledPulse::zeros(TimeGrid::centered(5.0, 0.1).unwrap());
        assert_eq!(numerical_energy(&zero), 0.0);
    }

    #[test]
    fn log_domain_matches_plain_path() {
        let lambdas = [Complex64::new(0.0, 0.5), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.3)];
        let coeffs = [Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.4), Complex64::new(0.1, -5.0)];
        let log_coeffs: Vec<f64> = coeffs.iter().map(|c| c.norm().ln()).collect();
        let k = Kernel { lambdas: &lambdas, coeffs: &coeffs, log_coeffs: &log_coeffs };
        for t in [-12.0, -3.0, -0.4, 0.0, 0.9, 4.0, 15.0] {
            let plain = k.sample_plain(t).unwrap();
            let log = k.sample_log(t);
            assert!((plain - log).norm() < 1e-10 * (1.0 + plain.norm()), "t={t}: {plain} vs {log}");
        }
    }

    #[test]
    fn wide_grid_stays_finite() {
        let spec = DiscreteSpectrum::from_parts(
            &[1.0, 2.0],
            &[Complex64::new(0.0, 6.0), Complex64::new(0.0, 12.0)],
        )
        .unwrap();
        let pulse = synthesize(&spec, &TimeGrid::centered(400.0, 0.05).unwrap()).unwrap();
        assert!(pulse.samples().iter().all(|s| s.norm().is_finite()));
        assert!(pulse.edge_ratio() < 1e-100);
        let e = numerical_energy(&pulse);
        assert!((e - 12.0).abs() < 1e-6 * 12.0, "energy {e}");
    }

    #[test]
    fn duplicate_eigenvalues_rejected() {
        let l = Complex64::new(0.0, 0.5);
        let grid = TimeGrid::centered(10.0, 0.1).unwrap();
        let err = synthesize_ordered(&[(l, Complex64::new(1.0, 0.0)), (l, Complex64::new(2.0, 0.0))], &grid);
        assert!(matches!(err, Err(Error::DuplicateEigenvalue(_))));
    }
}
