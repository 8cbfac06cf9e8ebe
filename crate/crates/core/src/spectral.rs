//! Spectral building blocks: the single-mode amplitude, the mode comb and the
//! uniform time grid every trace is sampled on.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_core::RngCore;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralShape {
    Lorentzian,
    Gaussian,
    Rectangular,
}

impl SpectralShape {
    pub fn name(self) -> &'static str {
        match self {
            SpectralShape::Lorentzian => "lorentzian",
            SpectralShape::Gaussian => "gaussian",
            SpectralShape::Rectangular => "rectangular",
        }
    }

    /// Spectral extent, in halfwidths, that a time grid has to resolve.
    ///
    /// Lorentzian tails are heavy, so they get the full 50 halfwidths of the
    /// quadrature window; a Gaussian is below 1e-14 past 8 halfwidths and a
    /// rectangle has no content past its edge.
    pub fn support_factor(self) -> f64 {
        match self {
            SpectralShape::Lorentzian => 50.0,
            SpectralShape::Gaussian => 8.0,
            SpectralShape::Rectangular => 1.0,
        }
    }
}

impl core::str::FromStr for SpectralShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lorentzian" => Ok(SpectralShape::Lorentzian),
            "gaussian" => Ok(SpectralShape::Gaussian),
            "rectangular" => Ok(SpectralShape::Rectangular),
            other => Err(Error::invalid(
                "shape",
                format!("unknown spectral shape `{other}` (lorentzian, gaussian, rectangular)"),
            )),
        }
    }
}

/// Single-mode spectral amplitude ψ(Ω), or the wideband φ(Ω).
///
/// `halfwidth` is the HWHM for a Lorentzian, the `σ` of `exp(-u²/2σ²)` for a
/// Gaussian and the half-support for a rectangle. The peak modulus is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAmplitude {
    shape: SpectralShape,
    center: f64,
    halfwidth: f64,
    phase: f64,
}

impl SpectralAmplitude {
    pub fn new(shape: SpectralShape, center: f64, halfwidth: f64, phase: f64) -> Result<Self> {
        if !(halfwidth > 0.0 && halfwidth.is_finite()) {
            return Err(Error::invalid("halfwidth", format!("must be positive and finite, got {halfwidth}")));
        }
        if !center.is_finite() || !phase.is_finite() {
            return Err(Error::invalid("center", "center and phase must be finite"));
        }
        Ok(SpectralAmplitude {
            shape,
            center,
            halfwidth,
            phase,
        })
    }

    pub fn lorentzian(halfwidth: f64) -> Result<Self> {
        Self::new(SpectralShape::Lorentzian, 0.0, halfwidth, 0.0)
    }

    pub fn gaussian(halfwidth: f64) -> Result<Self> {
        Self::new(SpectralShape::Gaussian, 0.0, halfwidth, 0.0)
    }

    pub fn rectangular(halfwidth: f64) -> Result<Self> {
        Self::new(SpectralShape::Rectangular, 0.0, halfwidth, 0.0)
    }

    pub fn with_center(self, center: f64) -> Result<Self> {
        Self::new(self.shape, center, self.halfwidth, self.phase)
    }

    pub fn with_phase(self, phase: f64) -> Result<Self> {
        Self::new(self.shape, self.center, self.halfwidth, phase)
    }

    pub fn shape(&self) -> SpectralShape {
        self.shape
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// ψ(Ω).
    pub fn eval(&self, omega: f64) -> Complex64 {
        let u = (omega - self.center) / self.halfwidth;
        let profile = match self.shape {
            SpectralShape::Lorentzian => Complex64::new(1.0, -u).inv(),
            SpectralShape::Gaussian => Complex64::new((-0.5 * u * u).exp(), 0.0),
            SpectralShape::Rectangular => {
                Complex64::new(if u.abs() <= 1.0 { 1.0 } else { 0.0 }, 0.0)
            }
        };
        profile * Complex64::cis(self.phase)
    }

    /// Real, even profile of the exchange-symmetrised pair amplitude at detuning
    /// `u` from the mode centre.
    ///
    /// Both photons of a pair occupy the same spatial mode, so only the part of
    /// ψ that is even about the mode centre reaches any detector. For the
    /// single-pole Lorentzian that is `1 / (1 + u²/γ²)`; the Gaussian and the
    /// rectangle are already even.
    pub fn pair_profile(&self, u: f64) -> f64 {
        let x = u / self.halfwidth;
        match self.shape {
            SpectralShape::Lorentzian => 1.0 / (1.0 + x * x),
            SpectralShape::Gaussian => (-0.5 * x * x).exp(),
            SpectralShape::Rectangular => {
                if x.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// ∫ pair_profile(u) du, the factor that normalises g(0) to 1.
    pub fn amplitude_integral(&self) -> f64 {
        let w = self.halfwidth;
        match self.shape {
            SpectralShape::Lorentzian => PI * w,
            SpectralShape::Gaussian => (TAU).sqrt() * w,
            SpectralShape::Rectangular => 2.0 * w,
        }
    }

    /// ∫ pair_profile(u)² du, the factor that normalises G(0) to 1.
    pub fn power_integral(&self) -> f64 {
        let w = self.halfwidth;
        match self.shape {
            SpectralShape::Lorentzian => 0.5 * PI * w,
            SpectralShape::Gaussian => PI.sqrt() * w,
            SpectralShape::Rectangular => 2.0 * w,
        }
    }
}

/// How frequency inputs are expressed.
///
/// Internally every frequency is angular. Under the ordinary convention inputs
/// are in Hz (cycles per second) and get multiplied by 2π on ingestion, which
/// makes the round-trip time `1 / Δν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    #[default]
    Angular,
    Ordinary,
}

impl FrequencyConvention {
    pub fn to_angular(self, value: f64) -> f64 {
        match self {
            FrequencyConvention::Angular => value,
            FrequencyConvention::Ordinary => TAU * value,
        }
    }

    pub fn from_angular(self, value: f64) -> f64 {
        match self {
            FrequencyConvention::Angular => value,
            FrequencyConvention::Ordinary => value / TAU,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FrequencyConvention::Angular => "angular",
            FrequencyConvention::Ordinary => "ordinary",
        }
    }
}

impl core::str::FromStr for FrequencyConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "angular" => Ok(FrequencyConvention::Angular),
            "ordinary" => Ok(FrequencyConvention::Ordinary),
            other => Err(Error::invalid(
                "units",
                format!("unknown unit convention `{other}` (angular, ordinary)"),
            )),
        }
    }
}

/// The frequency comb of a mode-locked two-photon state: `2N+1` copies of the
/// single-mode amplitude spaced by the free spectral range.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeComb {
    n_side_modes: usize,
    mode_spacing: f64,
    pump_frequency: f64,
    mode_phases: Vec<f64>,
    single_mode: SpectralAmplitude,
}

impl ModeComb {
    /// A comb with every mode phase zero.
    pub fn locked(
        n_side_modes: usize,
        mode_spacing: f64,
        pump_frequency: f64,
        single_mode: SpectralAmplitude,
    ) -> Result<Self> {
        Self::new(
            n_side_modes,
            mode_spacing,
            pump_frequency,
            vec![0.0; 2 * n_side_modes + 1],
            single_mode,
        )
    }

    pub fn new(
        n_side_modes: usize,
        mode_spacing: f64,
        pump_frequency: f64,
        mode_phases: Vec<f64>,
        single_mode: SpectralAmplitude,
    ) -> Result<Self> {
        if !(mode_spacing > 0.0 && mode_spacing.is_finite()) {
            return Err(Error::invalid("mode_spacing", format!("must be positive, got {mode_spacing}")));
        }
        if !(pump_frequency > 0.0 && pump_frequency.is_finite()) {
            return Err(Error::invalid("pump_frequency", format!("must be positive, got {pump_frequency}")));
        }
        if mode_phases.len() != 2 * n_side_modes + 1 {
            return Err(Error::invalid(
                "mode_phases",
                format!("expected {} phases, got {}", 2 * n_side_modes + 1, mode_phases.len()),
            ));
        }
        if mode_phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("mode_phases", "phases must be finite"));
        }
        if single_mode.halfwidth() >= 0.5 * mode_spacing {
            return Err(Error::invalid(
                "linewidth",
                format!(
                    "single-mode halfwidth {:e} must be below half the mode spacing {:e} (modes must be resolved)",
                    single_mode.halfwidth(),
                    0.5 * mode_spacing
                ),
            ));
        }
        Ok(ModeComb {
            n_side_modes,
            mode_spacing,
            pump_frequency,
            mode_phases,
            single_mode,
        })
    }

    /// Same comb with phases drawn independently and uniformly from `[0, 2π)`.
    pub fn with_random_phases<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self {
        let phases = (0..self.mode_count())
            .map(|_| TAU * crate::montecarlo::unit_f64(rng))
            .collect();
        ModeComb {
            mode_phases: phases,
            ..self.clone()
        }
    }

    pub fn with_phases(&self, mode_phases: Vec<f64>) -> Result<Self> {
        Self::new(
            self.n_side_modes,
            self.mode_spacing,
            self.pump_frequency,
            mode_phases,
            self.single_mode,
        )
    }

    pub fn with_single_mode(&self, single_mode: SpectralAmplitude) -> Result<Self> {
        Self::new(
            self.n_side_modes,
            self.mode_spacing,
            self.pump_frequency,
            self.mode_phases.clone(),
            single_mode,
        )
    }

    pub fn n_side_modes(&self) -> usize {
        self.n_side_modes
    }

    /// `2N + 1`.
    pub fn mode_count(&self) -> usize {
        2 * self.n_side_modes + 1
    }

    pub fn mode_spacing(&self) -> f64 {
        self.mode_spacing
    }

    pub fn pump_frequency(&self) -> f64 {
        self.pump_frequency
    }

    pub fn single_mode(&self) -> &SpectralAmplitude {
        &self.single_mode
    }

    pub fn mode_phases(&self) -> &[f64] {
        &self.mode_phases
    }

    /// Phase of mode `m`, for `m` in `-N..=N`.
    pub fn mode_phase(&self, m: i64) -> f64 {
        self.mode_phases[(m + self.n_side_modes as i64) as usize]
    }

    /// Iterator over `(m, phase)` for `m = -N..=N`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n_side_modes as i64;
        self.mode_phases.iter().enumerate().map(move |(k, &p)| (k as i64 - n, p))
    }

    pub fn is_locked(&self) -> bool {
        self.mode_phases.iter().all(|&p| p == 0.0)
    }

    /// Cavity round-trip time `2π / ΔΩ`.
    pub fn round_trip_time(&self) -> f64 {
        TAU / self.mode_spacing
    }

    /// Joint spectral amplitude `Σ_m e^{iφ_m} ψ(Ω + mΔΩ)`.
    pub fn joint_amplitude(&self, omega: f64) -> Complex64 {
        self.modes()
            .map(|(m, phase)| {
                Complex64::cis(phase) * self.single_mode.eval(omega + m as f64 * self.mode_spacing)
            })
            .sum()
    }
}

/// Uniform sampling of the delay axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::invalid("n_points", format!("need at least 2 points, got {n_points}")));
        }
        if !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::invalid("t_max", format!("need t_max > t_min, got [{t_min:e}, {t_max:e}]")));
        }
        Ok(TimeGrid {
            t_min,
            t_max,
            n_points,
        })
    }

    /// Grid on `[-half_span, half_span]`.
    pub fn symmetric(half_span: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_span, half_span, n_points)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_max
        } else {
            self.t_min + i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }

    /// Index of the sample closest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = ((t - self.t_min) / self.spacing()).round();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.n_points - 1)
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}
