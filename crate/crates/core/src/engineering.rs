//! Excising one comb peak by interfering the mode-locked pair amplitude with a
//! delayed wideband one: `|η g(τ)F(τ) + ζ f(τ − δt)|²`.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::correlation::{check_nyquist, envelope_g_at, pair_amplitude, CorrelationTrace, SAMPLES_PER_PEAK};
use crate::spectral::{ModeComb, SpectralAmplitude, TimeGrid};
use crate::{Error, Result};

/// `|g(M t_r)|` at or below this makes a peak unreachable.
pub const REACHABLE_ENVELOPE: f64 = 1e-3;
/// Largest residual accepted from the solver.
pub const MAX_RESIDUAL: f64 = 0.25;
/// Smallest fraction of its energy a neighbouring peak has to keep.
pub const MIN_NEIGHBOR_RETENTION: f64 = 0.9;

/// A broadband pair source, `Γ²(τ) = |f(τ − δt)|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidebandState {
    spectrum: SpectralAmplitude,
    delay: f64,
}

impl WidebandState {
    pub fn new(spectrum: SpectralAmplitude, delay: f64) -> Result<Self> {
        if !delay.is_finite() {
            return Err(Error::invalid("delay", "must be finite"));
        }
        Ok(WidebandState { spectrum, delay })
    }

    pub fn spectrum(&self) -> &SpectralAmplitude {
        &self.spectrum
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn with_delay(self, delay: f64) -> Result<Self> {
        Self::new(self.spectrum, delay)
    }

    /// `f(τ − δt)`, normalised to 1 at its peak.
    pub fn amplitude(&self, tau: f64) -> Complex64 {
        envelope_g_at(&self.spectrum, tau - self.delay)
    }

    fn check_wider_than(&self, comb: &ModeComb) -> Result<()> {
        if self.spectrum.halfwidth() <= comb.single_mode().halfwidth() {
            return Err(Error::invalid(
                "wideband_halfwidth",
                format!(
                    "wideband halfwidth {:e} must exceed the single-mode halfwidth {:e}",
                    self.spectrum.halfwidth(),
                    comb.single_mode().halfwidth()
                ),
            ));
        }
        Ok(())
    }
}

/// Wideband halfwidth `(2N+1)ΔΩ/2`, which makes `f` about as wide in time as
/// one comb peak.
pub fn default_wideband_halfwidth(comb: &ModeComb) -> f64 {
    0.5 * comb.mode_count() as f64 * comb.mode_spacing()
}

/// `|f(τ − δt)|²` on `grid`.
pub fn wideband_gamma2(w: &WidebandState, grid: &TimeGrid) -> Result<CorrelationTrace> {
    check_nyquist(w.spectrum(), grid)?;
    let values = grid.times().map(|t| w.amplitude(t).norm_sqr()).collect();
    CorrelationTrace::intensity(*grid, values, w.spectrum().amplitude_integral().powi(2))
}

/// `|η h(τ) + ζ f(τ − δt)|²`, the coherent sum of the two pair amplitudes.
pub fn combined_gamma2(
    comb: &ModeComb,
    w: &WidebandState,
    eta: Complex64,
    zeta: Complex64,
    grid: &TimeGrid,
) -> Result<CorrelationTrace> {
    check_nyquist(comb.single_mode(), grid)?;
    check_nyquist(w.spectrum(), grid)?;
    let values = grid
        .times()
        .map(|t| (eta * pair_amplitude(comb, t) + zeta * w.amplitude(t)).norm_sqr())
        .collect();
    CorrelationTrace::intensity(*grid, values, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcisionSolution {
    pub eta: Complex64,
    pub zeta: Complex64,
    /// Wideband delay `δt = M t_r`.
    pub delay: f64,
    pub target_peak: i64,
    /// Window energy after excision over window energy before.
    pub residual: f64,
    /// Energy kept in the windows of peaks `M − 1` and `M + 1`.
    pub neighbor_retention: [f64; 2],
    pub wideband: WidebandState,
}

/// Grid indices inside the ownership window `k·t_r ± t_r/4` of peak `k`.
pub fn peak_window(grid: &TimeGrid, round_trip: f64, peak: i64) -> core::ops::Range<usize> {
    let center = peak as f64 * round_trip;
    let lo = center - 0.25 * round_trip;
    let hi = center + 0.25 * round_trip;
    let h = grid.spacing();
    let first = ((lo - grid.t_min()) / h).ceil().max(0.0) as usize;
    let last = (((hi - grid.t_min()) / h).floor() as i64).min(grid.n_points() as i64 - 1);
    if last < first as i64 {
        first..first
    } else {
        first..last as usize + 1
    }
}

/// Sum of `values` over the window of peak `k`.
pub fn window_energy(values: &[f64], grid: &TimeGrid, round_trip: f64, peak: i64) -> f64 {
    values[peak_window(grid, round_trip, peak)].iter().sum()
}

/// Least-squares `ζ/η` that cancels comb peak `M` over its window.
///
/// With `η = 1`, the window energy `Σ|a_i + ζ f_i|²` is minimised by
/// `ζ = −Σ f̄_i a_i / Σ |f_i|²`.
pub fn solve_excision(
    comb: &ModeComb,
    template: &WidebandState,
    target_peak: i64,
    grid: &TimeGrid,
) -> Result<ExcisionSolution> {
    template.check_wider_than(comb)?;
    let tr = comb.round_trip_time();
    let delay = target_peak as f64 * tr;
    let envelope = envelope_g_at(comb.single_mode(), delay).norm();
    if envelope <= REACHABLE_ENVELOPE {
        return Err(Error::UnreachablePeak {
            peak: target_peak,
            envelope,
        });
    }
    check_nyquist(comb.single_mode(), grid)?;
    check_nyquist(template.spectrum(), grid)?;
    let peak_width = tr / comb.mode_count() as f64;
    if grid.spacing() * SAMPLES_PER_PEAK > peak_width {
        return Err(Error::Grid {
            reason: format!("spacing {:e} s under-resolves the {:e} s comb peak", grid.spacing(), peak_width),
        });
    }
    let lo = (target_peak as f64 - 1.25) * tr;
    let hi = (target_peak as f64 + 1.25) * tr;
    if grid.t_min() > lo || grid.t_max() < hi {
        return Err(Error::Grid {
            reason: format!(
                "grid [{:e}, {:e}] must cover the windows of peaks {}..={} ([{lo:e}, {hi:e}])",
                grid.t_min(),
                grid.t_max(),
                target_peak - 1,
                target_peak + 1
            ),
        });
    }

    let wideband = template.with_delay(delay)?;
    let window = peak_window(grid, tr, target_peak);
    let a: Vec<Complex64> = window.clone().map(|i| pair_amplitude(comb, grid.time(i))).collect();
    let f: Vec<Complex64> = window.map(|i| wideband.amplitude(grid.time(i))).collect();
    let projection: Complex64 = f.iter().zip(&a).map(|(fi, ai)| fi.conj() * ai).sum();
    let f_energy: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let eta = Complex64::new(1.0, 0.0);
    let zeta = -projection / f_energy;

    let before: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let after: f64 = a.iter().zip(&f).map(|(ai, fi)| (ai + zeta * fi).norm_sqr()).sum();
    let residual = after / before;

    let retention = |peak: i64| {
        let range = peak_window(grid, tr, peak);
        let mut pre = 0.0;
        let mut post = 0.0;
        for i in range {
            let t = grid.time(i);
            let ai = pair_amplitude(comb, t);
            pre += ai.norm_sqr();
            post += (eta * ai + zeta * wideband.amplitude(t)).norm_sqr();
        }
        post / pre
    };
    let neighbor_retention = [retention(target_peak - 1), retention(target_peak + 1)];

    if residual > MAX_RESIDUAL {
        return Err(Error::PoorMatch { residual });
    }
    for (k, &kept) in [target_peak - 1, target_peak + 1].iter().zip(&neighbor_retention) {
        if kept < MIN_NEIGHBOR_RETENTION {
            return Err(Error::NeighborLoss { peak: *k, retained: kept });
        }
    }
    Ok(ExcisionSolution {
        eta,
        zeta,
        delay,
        target_peak,
        residual,
        neighbor_retention,
        wideband,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralShape;

    fn setup(shape: SpectralShape) -> (ModeComb, WidebandState, TimeGrid) {
        let comb = ModeComb::locked(10, 1.0, 1e3, SpectralAmplitude::lorentzian(0.01).unwrap()).unwrap();
        let tr = comb.round_trip_time();
        let phi = SpectralAmplitude::new(shape, 0.0, default_wideband_halfwidth(&comb), 0.0).unwrap();
        let w = WidebandState::new(phi, 0.0).unwrap();
        let grid = TimeGrid::new(-1.5 * tr, 3.5 * tr, 16384).unwrap();
        (comb, w, grid)
    }

    #[test]
    fn wideband_peak_sits_at_its_delay() {
        let (comb, w, grid) = setup(SpectralShape::Gaussian);
        let tr = comb.round_trip_time();
        let at_zero = wideband_gamma2(&w, &grid).unwrap();
        assert_eq!(w.amplitude(0.0).norm(), 1.0);
        assert!((grid.time(at_zero.argmax())).abs() <= grid.spacing());
        let shifted = w.with_delay(3.0 * tr).unwrap();
        let g = TimeGrid::new(2.0 * tr, 4.0 * tr, 4001).unwrap();
        let trace = wideband_gamma2(&shifted, &g).unwrap();
        assert_eq!(trace.argmax(), 2000);
    }

    #[test]
    fn combined_reduces_to_either_source() {
        let (comb, w, grid) = setup(SpectralShape::Gaussian);
        let eta = Complex64::new(0.3, -1.2);
        let only_comb = combined_gamma2(&comb, &w, eta, Complex64::new(0.0, 0.0), &grid).unwrap();
        let only_wide = combined_gamma2(&comb, &w, Complex64::new(0.0, 0.0), eta, &grid).unwrap();
        for (i, t) in grid.times().enumerate().step_by(97) {
            let h = pair_amplitude(&comb, t).norm_sqr() * eta.norm_sqr();
            let f = w.amplitude(t).norm_sqr() * eta.norm_sqr();
            assert!((only_comb.samples()[i].re - h).abs() <= 1e-12 * h.max(1.0));
            assert!((only_wide.samples()[i].re - f).abs() <= 1e-12 * f.max(1.0));
        }
    }

    #[test]
    fn constructed_null_cancels_peak_centre() {
        let (comb, w, _) = setup(SpectralShape::Gaussian);
        let tr = comb.round_trip_time();
        let m = 1.0;
        let w = w.with_delay(m * tr).unwrap();
        let zeta = -pair_amplitude(&comb, m * tr) / w.amplitude(m * tr);
        let g = TimeGrid::new(0.5 * tr, 1.5 * tr, 2001).unwrap();
        let trace = combined_gamma2(&comb, &w, Complex64::new(1.0, 0.0), zeta, &g).unwrap();
        assert_eq!(trace.samples()[1000].re, 0.0);
    }

    #[test]
    fn unreachable_peak() {
        let (comb, w, grid) = setup(SpectralShape::Gaussian);
        // γ M t_r > 7
        let m = (7.0 / (0.01 * comb.round_trip_time())).ceil() as i64 + 1;
        assert!(matches!(
            solve_excision(&comb, &w, m, &grid),
            Err(Error::UnreachablePeak { .. })
        ));
    }

    #[test]
    fn grid_must_cover_neighbours() {
        let (comb, w, grid) = setup(SpectralShape::Rectangular);
        assert!(matches!(solve_excision(&comb, &w, 3, &grid), Err(Error::Grid { .. })));
    }

    #[test]
    fn rectangular_wideband_matches_comb_peaks() {
        let (comb, w, grid) = setup(SpectralShape::Rectangular);
        for m in 0..=2 {
            let sol = solve_excision(&comb, &w, m, &grid).unwrap();
            assert!(sol.residual < 1e-3, "M={m}: {}", sol.residual);
            assert!(sol.neighbor_retention.iter().all(|&r| r >= 0.9));
        }
    }

    #[test]
    fn wideband_must_be_wider() {
        let (comb, _, grid) = setup(SpectralShape::Gaussian);
        let narrow = WidebandState::new(SpectralAmplitude::gaussian(0.001).unwrap(), 0.0).unwrap();
        assert!(matches!(
            solve_excision(&comb, &narrow, 0, &grid),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
