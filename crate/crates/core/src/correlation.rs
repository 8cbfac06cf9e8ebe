//! Time-domain envelopes, the comb factor and the correlation traces built
//! from them.
//!
//! The envelopes are transforms of the pair profile ρ (see
//! [`SpectralAmplitude::pair_profile`]) and are normalised to 1 at zero delay:
//!
//! | shape       | g(τ)                 | G(τ)                          |
//! |-------------|----------------------|-------------------------------|
//! | Lorentzian  | `e^{-γ|τ|}`          | `(1 + γ|τ|) e^{-γ|τ|}`        |
//! | Gaussian    | `e^{-σ²τ²/2}`        | `e^{-σ²τ²/4}`                 |
//! | Rectangular | `sin(Wτ)/(Wτ)`       | `sin(Wτ)/(Wτ)`                |
//!
//! times `e^{-icτ}` for g and `e^{+icτ}` for G, where `c` is the centre offset.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::spectral::{ModeComb, SpectralAmplitude, SpectralShape, TimeGrid};
use crate::{Error, Result};

/// Below this distance from a pole of `1/sin(ΔΩτ/2)` the comb factor is
/// evaluated by its Taylor expansion.
const POLE_EPS: f64 = 1e-6;

/// Minimum samples across one comb peak of width `t_r/(2N+1)`.
pub const SAMPLES_PER_PEAK: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Amplitude,
    Intensity,
}

/// A complex function of delay sampled on a [`TimeGrid`].
///
/// Times are seconds; `normalization` is the factor the raw physical quantity
/// was divided by, so the paper's unspecified overall constants live here.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    grid: TimeGrid,
    samples: Vec<Complex64>,
    kind: TraceKind,
    normalization: f64,
}

impl CorrelationTrace {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>, kind: TraceKind, normalization: f64) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::invalid(
                "samples",
                format!("{} samples for a {}-point grid", samples.len(), grid.n_points()),
            ));
        }
        let mut samples = samples;
        if kind == TraceKind::Intensity {
            for z in samples.iter_mut() {
                if !(z.re >= 0.0) || z.im.abs() > 1e-10 * z.norm() {
                    return Err(Error::invalid("samples", "intensity traces must be real and non-negative"));
                }
                *z = Complex64::new(z.re, 0.0);
            }
        }
        Ok(CorrelationTrace {
            grid,
            samples,
            kind,
            normalization,
        })
    }

    /// An intensity trace from real samples.
    pub fn intensity(grid: TimeGrid, values: Vec<f64>, normalization: f64) -> Result<Self> {
        let samples = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        Self::new(grid, samples, TraceKind::Intensity, normalization)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Real parts (the values of an intensity trace).
    pub fn real(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    /// Index of the largest modulus (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, z) in self.samples.iter().enumerate() {
            if z.norm() > self.samples[best].norm() {
                best = i;
            }
        }
        best
    }
}

/// `sin[(2N+1)ΔΩτ/2] / sin(ΔΩτ/2)`, continuous through its removable poles.
pub fn dirichlet_f(tau: f64, n_side_modes: usize, mode_spacing: f64) -> f64 {
    let modes = (2 * n_side_modes + 1) as f64;
    let x = 0.5 * mode_spacing * tau;
    let k = (x / core::f64::consts::PI).round();
    let eps = x - k * core::f64::consts::PI;
    // sin((2N+1)(kπ+ε)) / sin(kπ+ε) = sin((2N+1)ε) / sin(ε): the signs
    // (-1)^{k(2N+1)} and (-1)^k cancel because 2N+1 is odd.
    if eps.abs() < POLE_EPS {
        modes * (1.0 - (modes * modes - 1.0) * eps * eps / 6.0)
    } else {
        (modes * eps).sin() / eps.sin()
    }
}

/// `Σ_m e^{iφ_m} e^{-imΔΩτ}`; equal to [`dirichlet_f`] for a locked comb.
pub fn generalized_f(tau: f64, comb: &ModeComb) -> Complex64 {
    if comb.is_locked() {
        return Complex64::new(dirichlet_f(tau, comb.n_side_modes(), comb.mode_spacing()), 0.0);
    }
    let w = comb.mode_spacing() * tau;
    comb.modes().map(|(m, phase)| Complex64::cis(phase - m as f64 * w)).sum()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Closed-form `g(τ)`, normalised so `g(0) = 1`.
pub fn envelope_g_at(s: &SpectralAmplitude, tau: f64) -> Complex64 {
    let w = s.halfwidth();
    let magnitude = match s.shape() {
        SpectralShape::Lorentzian => (-w * tau.abs()).exp(),
        SpectralShape::Gaussian => (-0.5 * w * w * tau * tau).exp(),
        SpectralShape::Rectangular => sinc(w * tau),
    };
    Complex64::cis(-s.center() * tau) * magnitude
}

/// Closed-form `G(τ)` (the transform of the power spectrum), `G(0) = 1`.
pub fn envelope_big_g_at(s: &SpectralAmplitude, tau: f64) -> Complex64 {
    let w = s.halfwidth();
    let magnitude = match s.shape() {
        SpectralShape::Lorentzian => {
            let a = w * tau.abs();
            (1.0 + a) * (-a).exp()
        }
        SpectralShape::Gaussian => (-0.25 * w * w * tau * tau).exp(),
        SpectralShape::Rectangular => sinc(w * tau),
    };
    Complex64::cis(s.center() * tau) * magnitude
}

/// Largest grid spacing that still resolves the spectral support of `s`.
pub fn nyquist_limit(s: &SpectralAmplitude) -> f64 {
    core::f64::consts::PI / (10.0 * s.halfwidth() * s.shape().support_factor())
}

pub fn check_nyquist(s: &SpectralAmplitude, grid: &TimeGrid) -> Result<()> {
    let limit = nyquist_limit(s);
    let spacing = grid.spacing();
    if spacing < limit {
        Ok(())
    } else {
        Err(Error::Nyquist { spacing, limit })
    }
}

fn check_comb_resolution(comb: &ModeComb, grid: &TimeGrid) -> Result<()> {
    let peak = comb.round_trip_time() / comb.mode_count() as f64;
    if grid.spacing() * SAMPLES_PER_PEAK > peak {
        return Err(Error::Grid {
            reason: format!(
                "spacing {:e} s gives fewer than {} samples across the {:e} s comb peak",
                grid.spacing(),
                SAMPLES_PER_PEAK,
                peak
            ),
        });
    }
    Ok(())
}

/// `g(τ)` sampled on `grid`.
pub fn envelope_g(s: &SpectralAmplitude, grid: &TimeGrid) -> Result<CorrelationTrace> {
    check_nyquist(s, grid)?;
    let samples = grid.times().map(|t| envelope_g_at(s, t)).collect();
    CorrelationTrace::new(*grid, samples, TraceKind::Amplitude, s.amplitude_integral())
}

/// `G(τ)` sampled on `grid`.
pub fn envelope_big_g(s: &SpectralAmplitude, grid: &TimeGrid) -> Result<CorrelationTrace> {
    check_nyquist(s, grid)?;
    let samples = grid.times().map(|t| envelope_big_g_at(s, t)).collect();
    CorrelationTrace::new(*grid, samples, TraceKind::Amplitude, s.power_integral())
}

/// Exchange-symmetrised two-photon amplitude `½[g(τ)F(τ) + g(-τ)F(-τ)]`.
///
/// Swapping the photons maps τ to -τ, so only this combination is
/// observable. For a locked comb with real envelope it is exactly `g(τ)F(τ)`.
pub fn pair_amplitude(comb: &ModeComb, tau: f64) -> Complex64 {
    let s = comb.single_mode();
    let forward = envelope_g_at(s, tau) * generalized_f(tau, comb);
    let backward = envelope_g_at(s, -tau) * generalized_f(-tau, comb);
    (forward + backward) * 0.5
}

/// `Γ²(τ) = |g(τ)F(τ)|²`, equal to `(2N+1)²` at τ = 0 for a locked comb.
pub fn gamma2_mode_locked(comb: &ModeComb, grid: &TimeGrid) -> Result<CorrelationTrace> {
    check_nyquist(comb.single_mode(), grid)?;
    check_comb_resolution(comb, grid)?;
    let values = grid.times().map(|t| pair_amplitude(comb, t).norm_sqr()).collect();
    CorrelationTrace::intensity(*grid, values, comb.single_mode().amplitude_integral().powi(2))
}

/// First-order coherence `γ(τ) = e^{iω_pτ/2} G(τ) F(τ) / (2N+1)`.
///
/// Single-photon statistics sum the modes incoherently, so the comb factor
/// here is the plain Dirichlet kernel whatever the mode phases are.
pub fn gamma1_at(comb: &ModeComb, tau: f64) -> Complex64 {
    let modes = comb.mode_count() as f64;
    let f = dirichlet_f(tau, comb.n_side_modes(), comb.mode_spacing());
    Complex64::cis(0.5 * comb.pump_frequency() * tau) * envelope_big_g_at(comb.single_mode(), tau) * (f / modes)
}

pub fn gamma1_coherence(comb: &ModeComb, grid: &TimeGrid) -> Result<CorrelationTrace> {
    check_nyquist(comb.single_mode(), grid)?;
    check_comb_resolution(comb, grid)?;
    let samples = grid.times().map(|t| gamma1_at(comb, t)).collect();
    let norm = comb.single_mode().power_integral() * comb.mode_count() as f64;
    CorrelationTrace::new(*grid, samples, TraceKind::Amplitude, norm)
}

/// Moving average of an intensity trace over a detector resolution time.
///
/// The trace is treated as piecewise linear and extended by reflection at both
/// ends; each output sample is the exact mean of that interpolant over
/// `[τ - T_R/2, τ + T_R/2]`. Only meaningful when the window spans several
/// round trips, which is enforced.
pub fn gamma2_detector_averaged(
    trace: &CorrelationTrace,
    resolution: f64,
    round_trip: f64,
) -> Result<CorrelationTrace> {
    if trace.kind() != TraceKind::Intensity {
        return Err(Error::invalid("trace", "detector averaging needs an intensity trace"));
    }
    if !(round_trip > 0.0) {
        return Err(Error::invalid("round_trip", "must be positive"));
    }
    let minimum = 3.0 * round_trip;
    if !(resolution >= minimum) {
        return Err(Error::Window { resolution, minimum });
    }
    let values = trace.real();
    let averaged = moving_average(trace.grid(), &values, resolution)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    CorrelationTrace::intensity(*trace.grid(), averaged, trace.normalization())
}

/// Exact window mean of the reflected piecewise-linear interpolant of `y`.
pub fn moving_average(grid: &TimeGrid, y: &[f64], width: f64) -> Vec<f64> {
    let cumulative = CumulativeIntegral::new(grid, y);
    grid.times()
        .map(|t| (cumulative.at(t + 0.5 * width) - cumulative.at(t - 0.5 * width)) / width)
        .collect()
}

struct CumulativeIntegral<'a> {
    t_min: f64,
    span: f64,
    h: f64,
    y: &'a [f64],
    prefix: Vec<f64>,
}

impl<'a> CumulativeIntegral<'a> {
    fn new(grid: &TimeGrid, y: &'a [f64]) -> Self {
        let h = grid.spacing();
        let mut prefix = Vec::with_capacity(y.len());
        prefix.push(0.0);
        // Neumaier-compensated running sum of trapezoid cells.
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for w in y.windows(2) {
            let cell = 0.5 * h * (w[0] + w[1]);
            let t = sum + cell;
            if sum.abs() >= cell.abs() {
                carry += (sum - t) + cell;
            } else {
                carry += (cell - t) + sum;
            }
            sum = t;
            prefix.push(sum + carry);
        }
        CumulativeIntegral {
            t_min: grid.t_min(),
            span: grid.t_max() - grid.t_min(),
            h,
            y,
            prefix,
        }
    }

    fn total(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    /// Integral from `t_min` to `t` inside the grid.
    fn inside(&self, t: f64) -> f64 {
        let x = ((t - self.t_min) / self.h).max(0.0);
        let last = self.y.len() - 1;
        let i = (x.floor() as usize).min(last - 1);
        let d = (t - self.t_min - i as f64 * self.h).clamp(0.0, self.h);
        let slope = (self.y[i + 1] - self.y[i]) / self.h;
        self.prefix[i] + d * self.y[i] + 0.5 * slope * d * d
    }

    /// Integral of the even-periodic (reflected) extension.
    fn at(&self, t: f64) -> f64 {
        let period = 2.0 * self.span;
        let offset = t - self.t_min;
        let wraps = (offset / period).floor();
        let r = offset - wraps * period;
        let base = wraps * 2.0 * self.total();
        if r <= self.span {
            base + self.inside(self.t_min + r)
        } else {
            // Reflected half: ∫ over the mirrored part equals T - I(2 t_max - x).
            base + 2.0 * self.total() - self.inside(self.t_min + period - r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{PI, TAU};
    use proptest::prelude::*;

    fn locked(n: usize, gamma: f64) -> ModeComb {
        ModeComb::locked(n, 1.0, 1.0e3, SpectralAmplitude::lorentzian(gamma).unwrap()).unwrap()
    }

    fn direct_dirichlet(tau: f64, n: usize, spacing: f64) -> f64 {
        let n = n as i64;
        (-n..=n).map(|m| (m as f64 * spacing * tau).cos()).sum()
    }

    #[test]
    fn dirichlet_spec_values() {
        assert_eq!(dirichlet_f(0.0, 4, 1.0), 9.0);
        assert!((dirichlet_f(PI, 1, 1.0) + 1.0).abs() < 1e-15);
        assert!(dirichlet_f(TAU / 7.0, 3, 1.0).abs() < 1e-14);
        for n in [0usize, 1, 5, 10] {
            assert!((dirichlet_f(TAU, n, 1.0) - (2 * n + 1) as f64).abs() < 1e-9);
            assert!((dirichlet_f(3.0 * TAU, n, 1.0) - (2 * n + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn dirichlet_is_continuous_across_the_series_switch() {
        let n = 7;
        for k in [0.0, 1.0, 2.0, -3.0] {
            let pole = k * TAU;
            for d in [0.5e-6, 0.99e-6, 1.01e-6, 2e-6, 1e-4] {
                let tau = pole + 2.0 * d;
                let direct = direct_dirichlet(tau, n, 1.0);
                assert!((dirichlet_f(tau, n, 1.0) - direct).abs() < 1e-9, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn generalized_f_examples() {
        let c = locked(1, 0.01).with_phases(vec![0.0, 0.0, PI]).unwrap();
        let f0 = generalized_f(0.0, &c);
        assert!((f0.re - 1.0).abs() < 1e-15 && f0.im.abs() < 1e-15);
        let lk = locked(3, 0.01);
        assert_eq!(generalized_f(0.37, &lk).re, dirichlet_f(0.37, 3, 1.0));
    }

    #[test]
    fn random_phases_add_incoherently() {
        use rand_chacha::rand_core::SeedableRng;
        let base = locked(5, 0.01);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let draws = 1000;
        let mut mean = 0.0;
        for _ in 0..draws {
            let c = base.with_random_phases(&mut rng);
            mean += generalized_f(base.round_trip_time(), &c).norm_sqr();
        }
        mean /= draws as f64;
        // Var(|F|²) = N_m² - N_m for N_m unit phasors, so the standard error
        // of the mean is about 0.34.
        assert!((mean - 11.0).abs() < 1.5, "mean |F|² = {mean}");
    }

    #[test]
    fn envelope_closed_form_examples() {
        let s = SpectralAmplitude::lorentzian(2.0).unwrap();
        assert!((envelope_g_at(&s, 0.5).norm() - (-1.0f64).exp()).abs() < 1e-15);
        for shape in [SpectralShape::Lorentzian, SpectralShape::Gaussian, SpectralShape::Rectangular] {
            let s = SpectralAmplitude::new(shape, 0.3, 1.3, 0.2).unwrap();
            assert_eq!(envelope_g_at(&s, 0.0), Complex64::new(1.0, 0.0));
            assert_eq!(envelope_big_g_at(&s, 0.0), Complex64::new(1.0, 0.0));
        }
        let r = SpectralAmplitude::rectangular(3.0).unwrap();
        assert!(envelope_g_at(&r, PI / 3.0).norm() < 1e-9);
        let g = SpectralAmplitude::gaussian(0.5).unwrap();
        assert!((envelope_big_g_at(&g, 2.0 / 0.5).norm() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn nyquist_rejects_coarse_grids() {
        let s = SpectralAmplitude::lorentzian(0.01).unwrap();
        let limit = nyquist_limit(&s);
        let coarse = TimeGrid::new(0.0, 10.0 * limit, 6).unwrap();
        assert!(matches!(envelope_g(&s, &coarse), Err(Error::Nyquist { .. })));
        let fine = TimeGrid::new(0.0, 10.0 * limit, 12).unwrap();
        assert!(envelope_g(&s, &fine).is_ok());
    }

    #[test]
    fn gamma2_examples() {
        let gamma = 0.01;
        let c = locked(10, gamma);
        let tr = c.round_trip_time();
        let grid = TimeGrid::new(-2.0 * tr, 2.0 * tr, 4 * 21 * 16 + 1).unwrap();
        let trace = gamma2_mode_locked(&c, &grid).unwrap();
        let zero = grid.nearest_index(0.0);
        assert_eq!(trace.samples()[zero].re, 441.0);
        let at_tr = pair_amplitude(&c, tr).norm_sqr();
        assert!((at_tr / (441.0 * (-2.0 * gamma * tr).exp()) - 1.0).abs() < 1e-12);
        // F(t_r/2) = ±1, so the midpoint sits at the bare envelope.
        let mid = pair_amplitude(&c, 0.5 * tr).norm_sqr();
        assert!(mid < 1e-2 * 441.0);
        assert!((mid - (-gamma * tr).exp()).abs() < 1e-12);
    }

    #[test]
    fn gamma2_needs_resolved_peaks() {
        let c = locked(10, 0.01);
        let tr = c.round_trip_time();
        let grid = TimeGrid::new(-tr, tr, 2 * 21 * 4).unwrap();
        assert!(matches!(gamma2_mode_locked(&c, &grid), Err(Error::Grid { .. })));
    }

    #[test]
    fn gamma2_reduces_to_envelope_for_single_mode() {
        let c = locked(0, 0.02);
        let grid = TimeGrid::new(-20.0, 20.0, 801).unwrap();
        let trace = gamma2_mode_locked(&c, &grid).unwrap();
        let env = envelope_g(c.single_mode(), &grid).unwrap();
        for (a, g) in trace.samples().iter().zip(env.samples()) {
            assert_eq!(a.re, g.norm_sqr());
        }
    }

    #[test]
    fn gamma1_examples() {
        let c = locked(10, 0.01);
        let tr = c.round_trip_time();
        assert!((gamma1_at(&c, 0.0).norm() - 1.0).abs() < 1e-15);
        let g_tr = envelope_big_g_at(c.single_mode(), tr).norm();
        assert!((gamma1_at(&c, tr).norm() - g_tr).abs() < 1e-9);
        // |F(t_r/2)|/(2N+1) = 1/21 for N = 10; N = 60 is needed to go under 1e-2.
        assert!((gamma1_at(&c, 0.5 * tr).norm() - envelope_big_g_at(c.single_mode(), 0.5 * tr).norm() / 21.0).abs() < 1e-12);
        let wide = locked(60, 0.001);
        assert!(gamma1_at(&wide, 0.5 * wide.round_trip_time()).norm() < 1e-2);
    }

    #[test]
    fn averaging_constant_is_constant() {
        let grid = TimeGrid::new(-5.0, 5.0, 1001).unwrap();
        let trace = CorrelationTrace::intensity(grid, vec![2.5; 1001], 1.0).unwrap();
        let avg = gamma2_detector_averaged(&trace, 3.0, 1.0).unwrap();
        for v in avg.real() {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn averaging_window_is_enforced() {
        let grid = TimeGrid::new(-5.0, 5.0, 11).unwrap();
        let trace = CorrelationTrace::intensity(grid, vec![1.0; 11], 1.0).unwrap();
        assert!(matches!(
            gamma2_detector_averaged(&trace, 2.9, 1.0),
            Err(Error::Window { .. })
        ));
    }

    #[test]
    fn averaging_linear_ramp_is_exact_in_the_interior() {
        let grid = TimeGrid::new(0.0, 10.0, 101).unwrap();
        let y: Vec<f64> = grid.times().map(|t| 3.0 * t + 1.0).collect();
        let avg = moving_average(&grid, &y, 2.0);
        for (i, t) in grid.times().enumerate() {
            if (1.0..=9.0).contains(&t) {
                assert!((avg[i] - y[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn averaging_matches_brute_force_at_the_edges() {
        let grid = TimeGrid::new(0.0, 4.0, 41).unwrap();
        let y: Vec<f64> = grid.times().map(|t| (t * 1.7).sin().powi(2) + 0.1 * t).collect();
        let width = 3.0;
        let avg = moving_average(&grid, &y, width);
        let interp = |t: f64| {
            // reflect into [0, 4]
            let mut r = t.rem_euclid(8.0);
            if r > 4.0 {
                r = 8.0 - r;
            }
            let x = r / 0.1;
            let i = (x.floor() as usize).min(39);
            let d = x - i as f64;
            y[i] * (1.0 - d) + y[i + 1] * d
        };
        for (i, t) in grid.times().enumerate() {
            let n = 30_000;
            let h = width / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                acc += interp(t - 0.5 * width + (k as f64 + 0.5) * h);
            }
            assert!((avg[i] - acc / n as f64).abs() < 1e-6, "t={t}");
        }
    }

    proptest! {
        #[test]
        fn dirichlet_matches_direct_sum(tau in -50.0f64..50.0, n in 0usize..30) {
            let got = dirichlet_f(tau, n, 1.0);
            let direct = direct_dirichlet(tau, n, 1.0);
            prop_assert!((got - direct).abs() < 1e-9 * (2 * n + 1) as f64);
        }

        #[test]
        fn dirichlet_is_periodic(tau in -20.0f64..20.0, n in 0usize..40) {
            let a = dirichlet_f(tau + TAU, n, 1.0).abs();
            let b = dirichlet_f(tau, n, 1.0).abs();
            prop_assert!((a - b).abs() < 1e-9 * (2 * n + 1) as f64);
        }

        #[test]
        fn envelopes_are_bounded_by_one(tau in -100.0f64..100.0, w in 0.01f64..3.0) {
            for shape in [SpectralShape::Lorentzian, SpectralShape::Gaussian, SpectralShape::Rectangular] {
                let s = SpectralAmplitude::new(shape, 0.0, w, 0.0).unwrap();
                prop_assert!(envelope_g_at(&s, tau).norm() <= 1.0 + 1e-15);
                prop_assert!(envelope_big_g_at(&s, tau).norm() <= 1.0 + 1e-15);
            }
        }

        #[test]
        fn pair_amplitude_is_exchange_symmetric(tau in -30.0f64..30.0, seed in 0u64..1000) {
            use rand_chacha::rand_core::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let c = locked(4, 0.01).with_random_phases(&mut rng);
            let a = pair_amplitude(&c, tau);
            let b = pair_amplitude(&c, -tau);
            prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }
}
