use std::f64::consts::PI;

use proptest::prelude::*;
use soliton_forge::darboux::{numerical_energy, synthesize, synthesize_ordered};
use soliton_forge::evolution::evolve_spectrum;
use soliton_forge::metrics::{duration, measure};
use soliton_forge::nft::scatter;
use soliton_forge::pulse::{SampledPulse, TimeGrid};
use soliton_forge::spectrum::DiscreteSpectrum;
use soliton_forge::symmetric::{build_spectrum, EigenvalueSet, EtaVector};
use soliton_forge::Complex64;

fn j() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Up to three eigenvalues in [0.3, 1.5], at least 0.1 apart, with
/// magnitudes within a factor 3 of the symmetric ones.
fn spectra() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=3)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.3f64..1.5, n),
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(0.0f64..2.0 * PI, n),
            )
        })
        .prop_filter_map("eigenvalues too close", |(mut s, log_eta, phases)| {
            s.sort_by(f64::total_cmp);
            if s.windows(2).any(|w| w[1] - w[0] < 0.1) {
                return None;
            }
            let etas = log_eta.iter().enumerate().map(|(k, l)| if k == 0 { 1.0 } else { 3f64.powf(*l) }).collect();
            Some((s, etas, phases))
        })
}

fn build(s: &[f64], etas: &[f64], phases: &[f64]) -> DiscreteSpectrum {
    build_spectrum(&EigenvalueSet::new(s.to_vec()).unwrap(), &EtaVector::new(etas.to_vec()).unwrap(), phases).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn grid() -> TimeGrid {
    TimeGrid::centered(40.0, 0.02).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_matches_eigenvalue_sum((s, etas, phases) in spectra()) {
        let spec = build(&s, &etas, &phases);
        let q = synthesize(&spec, &TimeGrid::centered(60.0, 0.01).unwrap()).unwrap();
        let e = numerical_energy(&q);
        prop_assert!((e - spec.energy()).abs() < 1e-6 * spec.energy(), "{} vs {}", e, spec.energy());
    }

    #[test]
    fn insertion_order_does_not_matter((s, etas, phases) in spectra(), rot in 0usize..3) {
        let spec = build(&s, &etas, &phases);
        let mut pairs: Vec<(Complex64, Complex64)> = spec.entries().iter().map(|e| (e.lambda(), e.qd)).collect();
        let a = synthesize_ordered(&pairs, &grid()).unwrap();
        let len = pairs.len();
        pairs.rotate_left(rot % len);
        pairs.reverse();
        let b = synthesize_ordered(&pairs, &grid()).unwrap();
        prop_assert!(max_diff(a.samples(), b.samples()) < 1e-9 * a.peak());
    }

    #[test]
    fn amplitude_scaling_shifts_in_time((s, etas, phases) in spectra(), steps in -100i32..100) {
        let g = grid();
        let t0 = steps as f64 * g.dt();
        let spec = build(&s, &etas, &phases);
        let shifted = spec.map_amplitudes(|e| e.qd * (-2.0 * e.sigma * t0).exp());
        let q = synthesize(&spec, &g).unwrap();
        let moved = TimeGrid::new(g.t_start() - t0, g.dt(), g.len()).unwrap();
        let p = synthesize(&shifted, &moved).unwrap();
        // p(t - t0) = q(t) on matching samples.
        prop_assert!(max_diff(q.samples(), p.samples()) < 1e-9 * q.peak());
    }

    #[test]
    fn reciprocal_etas_reflect_in_time((s, etas, phases) in spectra()) {
        let recip: Vec<f64> = etas.iter().map(|e| 1.0 / e).collect();
        let q = synthesize(&build(&s, &etas, &phases), &grid()).unwrap();
        let r = synthesize(&build(&s, &recip, &phases), &grid()).unwrap();
        let mirrored: Vec<Complex64> = r.samples().iter().rev().cloned().collect();
        prop_assert!(max_diff(q.samples(), &mirrored) < 1e-8 * q.peak());
    }

    #[test]
    fn common_phase_rotates_the_pulse((s, etas, phases) in spectra(), theta in 0.0f64..2.0 * PI) {
        let spec = build(&s, &etas, &phases);
        let rotated = spec.map_amplitudes(|e| e.qd * (j() * theta).exp());
        let q = synthesize(&spec, &grid()).unwrap();
        let r = synthesize(&rotated, &grid()).unwrap();
        let expect: Vec<Complex64> = q.samples().iter().map(|x| x * (-j() * theta).exp()).collect();
        prop_assert!(max_diff(r.samples(), &expect) < 1e-9 * q.peak());
    }

    #[test]
    fn eigenvalue_scaling_compresses_time((s, etas, phases) in spectra(), c in prop::sample::select(vec![0.5, 2.0])) {
        let spec = build(&s, &etas, &phases);
        let scaled_s: Vec<f64> = s.iter().map(|x| c * x).collect();
        let scaled = build(&scaled_s, &etas, &phases);
        let g = grid();
        let q = synthesize(&spec, &g).unwrap();
        let fine = TimeGrid::new(g.t_start() / c, g.dt() / c, g.len()).unwrap();
        let p = synthesize(&scaled, &fine).unwrap();
        // p(t / c) = c q(t).
        let expect: Vec<Complex64> = q.samples().iter().map(|x| x * c).collect();
        prop_assert!(max_diff(p.samples(), &expect) < 1e-8 * p.peak());
    }

    #[test]
    fn symmetric_pulses_stay_symmetric(s2 in 0.65f64..2.0, phases in prop::collection::vec(0.0f64..2.0 * PI, 2), z in -2.0f64..2.0) {
        let spec = build(&[0.5, s2], &[1.0, 1.0], &phases);
        let q = synthesize(&evolve_spectrum(&spec, z), &grid()).unwrap();
        prop_assert!(q.symmetry_residual() < 1e-9);
    }

    #[test]
    fn duration_ignores_position(steps in -500i32..500, sigma in 0.3f64..1.5) {
        let g = TimeGrid::centered(50.0, 0.01).unwrap();
        let shift = steps as f64 * g.dt();
        let e = 4.0 * sigma;
        let centred = SampledPulse::from_fn(g, |t| Complex64::new(2.0 * sigma / (2.0 * sigma * t).cosh(), 0.0));
        let moved = SampledPulse::from_fn(g, |t| Complex64::new(2.0 * sigma / (2.0 * sigma * (t - shift)).cosh(), 0.0));
        let (a, ia) = duration(&centred, 1e-4, e).unwrap();
        let (b, ib) = duration(&moved, 1e-4, e).unwrap();
        prop_assert!((a - b).abs() < 1e-6 * a);
        prop_assert!(((ib[0] - ia[0]) - shift).abs() < 1e-6, "{:?} {:?}", ia, ib);
    }

    #[test]
    fn smaller_threshold_widens_windows(eps in 1e-8f64..1e-2, sigma in 0.3f64..1.5) {
        let g = TimeGrid::centered(50.0, 0.01).unwrap();
        let q = SampledPulse::from_fn(g, |t| Complex64::new(2.0 * sigma / (2.0 * sigma * t).cosh(), 0.0));
        let loose = measure(&q, eps, 4.0 * sigma).unwrap();
        let tight = measure(&q, eps / 10.0, 4.0 * sigma).unwrap();
        prop_assert!(tight.t_w > loose.t_w && tight.b_w > loose.b_w);
    }
}

#[test]
fn jost_residual_shrinks_with_the_step() {
    // Satsuma-Yajima: 2 sech(t) has eigenvalues 0.5j and 1.5j.
    let residual = |dt: f64| {
        let q = SampledPulse::from_fn(TimeGrid::centered(25.0, dt).unwrap(), |t| Complex64::new(2.0 / t.cosh(), 0.0));
        scatter(&q, Complex64::new(0.0, 1.5)).unwrap().a.norm()
    };
    let (coarse, fine) = (residual(0.04), residual(0.02));
    assert!(coarse / fine > 4.0, "{coarse:e} -> {fine:e}");
}
