use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_forge::darboux::numerical_energy;
use soliton_forge::metrics::time_bandwidth_1;
use soliton_forge::optimizer::{
    auto_grid, eigenvalue_sweep, evaluate, optimal_pulse_gallery, optimize_eta, phase_extremes, EtaSearch,
    PhaseSearch,
};
use soliton_forge::symmetric::{b_sep, t_sym, EigenvalueSet, EtaVector};

fn omega(s: &[f64]) -> EigenvalueSet {
    EigenvalueSet::new(s.to_vec()).unwrap()
}

#[test]
fn symmetric_worst_case_duration_matches_estimate() {
    let o = omega(&[0.5, 1.0]);
    let r = phase_extremes(&o, &EtaVector::ones(2), 1e-4, &PhaseSearch::default()).unwrap();
    let est = t_sym(&o, 1e-4).unwrap();
    assert!((r.t_max - est).abs() < 0.03 * est, "{} vs {est}", r.t_max);
    assert!(r.b_min <= r.b_max);
    assert_eq!(r.phases_at_tmax[0], 0.0);
}

#[test]
fn interaction_raises_worst_case_bandwidth() {
    let o = omega(&[0.5, 1.0]);
    let s = PhaseSearch::default();
    let close = phase_extremes(&o, &EtaVector::ones(2), 1e-4, &s).unwrap();
    let apart = phase_extremes(&o, &EtaVector::from_free(&[1e-3]).unwrap(), 1e-4, &s).unwrap();
    assert!(close.b_max > apart.b_max);
    for r in [&close, &apart] {
        assert!(r.b_max >= b_sep(&o, 1e-4).unwrap());
    }
}

#[test]
fn refinement_never_loses_ground() {
    let o = omega(&[0.5, 0.8, 1.1]);
    let etas = EtaVector::from_free(&[0.3, 2.0]).unwrap();
    let r = phase_extremes(&o, &etas, 1e-4, &PhaseSearch { coarse_n: 12, refine_rounds: 2 }).unwrap();
    assert!(r.t_max >= r.coarse_t_max);
    assert!(r.b_max >= r.coarse_b_max);
    assert!(r.b_min <= r.coarse_b_min);
}

#[test]
fn random_phases_do_not_beat_the_worst_case() {
    let o = omega(&[0.5, 0.75]);
    let etas = EtaVector::from_free(&[0.2]).unwrap();
    let r = phase_extremes(&o, &etas, 1e-4, &PhaseSearch::default()).unwrap();
    let grid = auto_grid(&o, &etas, 1e-4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let phi = rng.gen_range(0.0..2.0 * PI);
        let (t, b) = evaluate(&o, &etas, &[0.0, phi], 1e-4, &grid).unwrap();
        assert!(t <= r.t_max * 1.01 && b <= r.b_max * 1.01, "phi {phi}: {t} {b} vs {} {}", r.t_max, r.b_max);
        assert!(b >= r.b_min * 0.99);
    }
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let o = omega(&[0.5, 0.9]);
    let etas = EtaVector::from_free(&[0.1]).unwrap();
    let run = |n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| phase_extremes(&o, &etas, 1e-4, &PhaseSearch { coarse_n: 32, refine_rounds: 2 }).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn single_eigenvalue_has_the_closed_form_product() {
    let (_, rec) = optimize_eta(&omega(&[0.7]), 1e-4, &EtaSearch::default()).unwrap();
    let tb1 = time_bandwidth_1(1e-4).unwrap();
    assert!((rec.tb_per_eig - tb1).abs() < 0.02 * tb1);
    assert_eq!(rec.etas, vec![1.0]);
}

fn quick() -> EtaSearch {
    EtaSearch { phases: PhaseSearch { coarse_n: 32, refine_rounds: 1 }, ..EtaSearch::default() }
}

#[test]
fn two_solitons_beat_one_per_eigenvalue() {
    let (_, rec) = optimize_eta(&omega(&[0.5, 0.575]), 1e-4, &quick()).unwrap();
    assert!(rec.tb_ratio_vs_1soliton < 1.0, "{rec:?}");
    assert!((rec.tb_per_eig - rec.t_max * rec.b_max / 2.0).abs() < 1e-12);
}

#[test]
fn equidistant_eigenvalues_are_a_poor_choice() {
    let recs = eigenvalue_sweep(&[vec![1.15], vec![2.0]], 1e-4, &quick()).unwrap();
    assert!(recs[1].tb_ratio_vs_1soliton > 1.1 * recs[0].tb_ratio_vs_1soliton, "{recs:?}");
}

#[test]
fn optimum_is_stable_under_finer_eta_grids() {
    let o = omega(&[0.5, 0.575]);
    let coarse = EtaSearch { refine_rounds: 0, ..quick() };
    let fine = EtaSearch { points_per_decade: 8, ..coarse };
    let (a, _) = optimize_eta(&o, 1e-4, &coarse).unwrap();
    let (b, _) = optimize_eta(&o, 1e-4, &fine).unwrap();
    // One coarse cell is a quarter decade.
    assert!((a.etas()[1].log10() - b.etas()[1].log10()).abs() <= 0.25 + 1e-9, "{a:?} {b:?}");
}

#[test]
fn gallery_traces() {
    let o = omega(&[0.5, 0.575]);
    let etas = EtaVector::from_free(&[0.1]).unwrap();
    let pulses = optimal_pulse_gallery(&o, &etas, 1e-4, 4).unwrap();
    assert_eq!(pulses.len(), 4);
    for p in &pulses {
        assert!((numerical_energy(p) - o.energy()).abs() < 1e-4 * o.energy());
        // A train of two 1-solitons: two local maxima of |q| well above the tails.
        let m: Vec<f64> = p.samples().iter().map(|q| q.norm()).collect();
        let peaks = (1..m.len() - 1).filter(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1] && m[i] > 0.2 * p.peak()).count();
        assert_eq!(peaks, 2);
    }

    let one = optimal_pulse_gallery(&omega(&[0.5]), &EtaVector::ones(1), 1e-4, 3).unwrap();
    for p in &one[1..] {
        for (a, b) in p.samples().iter().zip(one[0].samples()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }
}
