use std::f64::consts::TAU;

use proptest::prelude::*;
use twophoton_core::analysis::prominent_maxima;
use twophoton_core::correlation::{gamma1_coherence, gamma2_mode_locked, generalized_f, pair_amplitude};
use twophoton_core::{ModeComb, SpectralAmplitude, TimeGrid};

fn lorentz_comb(n: usize, gamma: f64) -> ModeComb {
    ModeComb::locked(n, 1.0, 1e3, SpectralAmplitude::lorentzian(gamma).unwrap()).unwrap()
}

#[test]
fn first_order_coherence_peaks_only_at_round_trips() {
    let comb = lorentz_comb(10, 0.01);
    let tr = comb.round_trip_time();
    let grid = TimeGrid::symmetric(2.5 * tr, 8193).unwrap();
    let trace = gamma1_coherence(&comb, &grid).unwrap();
    let moduli = trace.moduli();
    let peaks = prominent_maxima(&moduli, 0.5);
    let times: Vec<f64> = peaks.iter().map(|&i| grid.time(i) / tr).collect();
    assert_eq!(peaks.len(), 5, "{times:?}");
    for (k, &i) in (-2..=2).zip(&peaks) {
        assert!((grid.time(i) - k as f64 * tr).abs() <= grid.spacing(), "{times:?}");
    }
}

#[test]
fn locked_comb_has_deep_valleys_between_peaks() {
    for gamma in [0.001, 0.005, 0.01] {
        let comb = lorentz_comb(10, gamma);
        let tr = comb.round_trip_time();
        let grid = TimeGrid::new(0.0, tr, 4001).unwrap();
        let values = gamma2_mode_locked(&comb, &grid).unwrap().real();
        let floor = grid
            .times()
            .zip(&values)
            .filter(|(t, _)| (0.2 * tr..=0.8 * tr).contains(t))
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        assert!(floor < 1e-3 * values[0], "γ={gamma}: {floor} vs {}", values[0]);
    }
}

#[test]
fn random_phases_average_to_the_incoherent_sum() {
    let comb = lorentz_comb(5, 0.01);
    let tr = comb.round_trip_time();
    let draws = 1000;
    let mean: f64 = (0..draws)
        .map(|s| {
            let mut rng = twophoton_core::montecarlo::chunk_rng(s, 0, 0);
            generalized_f(tr, &comb.with_random_phases(&mut rng)).norm_sqr()
        })
        .sum::<f64>()
        / draws as f64;
    // |F|² for random phases has mean 11 and standard deviation about 10.
    assert!((mean - 11.0).abs() < 1.5, "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Over one period, the mean of |F|² is the mode count for any phases.
    #[test]
    fn period_mean_of_comb_factor_is_mode_count(
        n in 0usize..12,
        phases in prop::collection::vec(0.0..TAU, 25),
        offset in 0.0..TAU,
    ) {
        let comb = lorentz_comb(n, 0.01).with_phases(phases[..2 * n + 1].to_vec()).unwrap();
        let samples = 4 * (2 * n + 1) + 3;
        let tr = comb.round_trip_time();
        let mean = (0..samples)
            .map(|k| generalized_f(offset + k as f64 * tr / samples as f64, &comb).norm_sqr())
            .sum::<f64>() / samples as f64;
        prop_assert!((mean / (2 * n + 1) as f64 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pair_amplitude_is_even(tau in -20.0f64..20.0, n in 0usize..8) {
        let comb = lorentz_comb(n, 0.02);
        let a = pair_amplitude(&comb, tau);
        let b = pair_amplitude(&comb, -tau);
        prop_assert!((a - b).norm() <= 1e-12 * (2 * n + 1) as f64);
    }
}
