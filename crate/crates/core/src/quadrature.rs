//! Direct numerical Fourier transforms of the pair profile.
//!
//! This is the slow, independent route to the envelopes: composite Simpson
//! quadrature of `∫ ρ(u) cos(uτ) du` over a finite window, plus an analytic
//! correction for the part of a Lorentzian tail that lies outside it. The
//! closed forms in [`crate::correlation`] are checked against it.

#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::special::sici;
use crate::spectral::{SpectralAmplitude, SpectralShape};

/// Which transform of the pair profile to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// `g(τ) ∝ ∫ ρ(u) e^{-iuτ} du`.
    Amplitude,
    /// `G(τ) ∝ ∫ ρ(u)² e^{+iuτ} du`.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simpson {
    /// Integration window in units of the halfwidth, `u ∈ [0, K·halfwidth]`.
    pub window: f64,
    /// Number of Simpson intervals (rounded up to even).
    pub intervals: usize,
    /// Add the analytic Lorentzian tail beyond the window.
    pub tail_correction: bool,
}

impl Default for Simpson {
    fn default() -> Self {
        Simpson {
            window: 50.0,
            intervals: 100_000,
            tail_correction: true,
        }
    }
}

impl Simpson {
    /// Unnormalised `2 ∫_0^∞ w(u) cos(uτ) du` where `w` is ρ or ρ².
    pub fn cosine_transform(&self, s: &SpectralAmplitude, kind: Transform, tau: f64) -> f64 {
        let gamma = s.halfwidth();
        let upper = match s.shape() {
            SpectralShape::Rectangular => gamma,
            _ => self.window * gamma,
        };
        let n = (self.intervals + self.intervals % 2).max(2);
        let h = upper / n as f64;
        let weight = |u: f64| {
            let r = s.pair_profile(u);
            match kind {
                Transform::Amplitude => r,
                Transform::Power => r * r,
            }
        };
        let node = |i: usize| {
            let u = if i == n { upper } else { i as f64 * h };
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * weight(u) * (u * tau).cos()
        };
        let mut total = pairwise_sum(0, n + 1, &node) * h / 3.0;
        if self.tail_correction && s.shape() == SpectralShape::Lorentzian {
            total += lorentzian_tail(gamma, upper, tau, kind);
        }
        2.0 * total
    }

    /// The envelope normalised to 1 at τ = 0, with the centre-frequency phase
    /// `e^{∓icτ}` attached.
    pub fn envelope(&self, s: &SpectralAmplitude, kind: Transform, tau: f64) -> Complex64 {
        let norm = self.cosine_transform(s, kind, 0.0);
        let value = self.cosine_transform(s, kind, tau) / norm;
        let sign = match kind {
            Transform::Amplitude => -1.0,
            Transform::Power => 1.0,
        };
        Complex64::cis(sign * s.center() * tau) * value
    }
}

/// Sum `f(lo..hi)` by recursive halving, so the result does not depend on
/// how a caller might split the range.
pub fn pairwise_sum<T, F>(lo: usize, hi: usize, f: &F) -> T
where
    T: core::ops::Add<Output = T> + Default,
    F: Fn(usize) -> T,
{
    const LEAF: usize = 64;
    if hi - lo <= LEAF {
        let mut acc = T::default();
        for i in lo..hi {
            acc = acc + f(i);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f)
    }
}

/// `∫_L^∞ w(u) cos(uτ) du` for the Lorentzian pair profile, from the
/// expansion of `w` in inverse powers of `u` (valid since `L ≫ γ`).
fn lorentzian_tail(gamma: f64, lower: f64, tau: f64, kind: Transform) -> f64 {
    const TERMS: usize = 6;
    let (first, step) = match kind {
        // 1/(1+γ²/u²)·γ²/u² = Σ (-1)^k (γ/u)^{2k+2}
        Transform::Amplitude => (2usize, 2usize),
        // (γ/u)^4 / (1+γ²/u²)² = Σ (-1)^k (k+1) (γ/u)^{2k+4}
        Transform::Power => (4usize, 2usize),
    };
    let max_order = first + step * (TERMS - 1);
    let cos_moments = inverse_power_cosine_moments(lower, tau.abs(), max_order);
    let mut total = 0.0;
    for k in 0..TERMS {
        let order = first + step * k;
        let multiplicity = match kind {
            Transform::Amplitude => 1.0,
            Transform::Power => (k + 1) as f64,
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * multiplicity * gamma.powi(order as i32) * cos_moments[order];
    }
    total
}

/// `T_n = ∫_L^∞ u^{-n} cos(uτ) du` for `n = 0..=max_order` (entry 0 unused),
/// with `τ ≥ 0`.
fn inverse_power_cosine_moments(lower: f64, tau: f64, max_order: usize) -> alloc::vec::Vec<f64> {
    let mut t = alloc::vec![0.0; max_order + 1];
    if tau == 0.0 {
        for (n, slot) in t.iter_mut().enumerate().skip(2) {
            *slot = lower.powi(1 - n as i32) / (n - 1) as f64;
        }
        return t;
    }
    let x = lower * tau;
    let (si, ci) = sici(x);
    let (sx, cx) = x.sin_cos();
    let mut cos_m = -ci;
    let mut sin_m = FRAC_PI_2 - si;
    t[1] = cos_m;
    for (n, slot) in t.iter_mut().enumerate().skip(2) {
        let m = (n - 1) as f64;
        let scale = lower.powi(1 - n as i32);
        let next_cos = cx * scale / m - tau * sin_m / m;
        let next_sin = sx * scale / m + tau * cos_m / m;
        cos_m = next_cos;
        sin_m = next_sin;
        *slot = cos_m;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn zero_delay_integrals_match_closed_forms() {
        let q = Simpson::default();
        for s in [
            SpectralAmplitude::lorentzian(0.7).unwrap(),
            SpectralAmplitude::gaussian(0.7).unwrap(),
            SpectralAmplitude::rectangular(0.7).unwrap(),
        ] {
            let a = q.cosine_transform(&s, Transform::Amplitude, 0.0);
            let p = q.cosine_transform(&s, Transform::Power, 0.0);
            assert!((a / s.amplitude_integral() - 1.0).abs() < 1e-12, "{:?}", s.shape());
            assert!((p / s.power_integral() - 1.0).abs() < 1e-12, "{:?}", s.shape());
        }
    }

    #[test]
    fn tail_correction_is_needed_for_lorentzian() {
        let s = SpectralAmplitude::lorentzian(1.0).unwrap();
        let bare = Simpson {
            tail_correction: false,
            ..Simpson::default()
        };
        let a = bare.cosine_transform(&s, Transform::Amplitude, 0.0);
        assert!((a / PI - 1.0).abs() > 1e-3);
    }

    #[test]
    fn tail_moments_match_direct_integration() {
        // T_4 against Simpson on [L, 400L]; the neglected tail is ~1e-13.
        let lower = 5.0;
        let tau = 0.3;
        let t = inverse_power_cosine_moments(lower, tau, 4);
        let upper = 400.0 * lower;
        let n = 2_000_000;
        let h = (upper - lower) / n as f64;
        let f = |i: usize| {
            let u = lower + i as f64 * h;
            let c = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            c * (u * tau).cos() / (u * u * u * u)
        };
        let direct = pairwise_sum(0, n + 1, &f) * h / 3.0;
        assert!((t[4] - direct).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_of_ones() {
        assert_eq!(pairwise_sum(0, 1000, &|_| 1.0), 1000.0);
        assert_eq!(pairwise_sum(5, 5, &|_| 1.0), 0.0);
    }
}
