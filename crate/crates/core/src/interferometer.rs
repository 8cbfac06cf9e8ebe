//! Unbalanced Mach-Zehnder / Hong-Ou-Mandel interferometer fed with the
//! mode-locked pair state.
//!
//! One arm is longer by a delay Δ. Coincidences between the two output
//! detectors contain a pump-phase fringe `(1 − cos ω_pΔ)` from the
//! both-transmitted and both-reflected paths, and a HOM term from the split
//! pair that dips whenever `h(τ+Δ)` overlaps `h(τ−Δ)`, i.e. at Δ = k·t_r/2.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;

use crate::analysis::{fit_sinusoid, Sinusoid};
use crate::correlation::{dirichlet_f, envelope_big_g_at, envelope_g_at, pair_amplitude};
use crate::quadrature::pairwise_sum;
use crate::spectral::{ModeComb, SpectralShape};
use crate::{Error, Result};

/// Samples per comb peak used by the τ integrals.
const INTEGRATION_SAMPLES_PER_PEAK: f64 = 8.0;
/// Ceiling on τ nodes for one rate evaluation.
const MAX_NODES: usize = 50_000_000;
/// Largest allowed `|∫h*(h₊ − h₋)| / R0`.
pub const CROSS_TERM_TOLERANCE: f64 = 1e-6;
/// Points with `|V(Δ)|` below this are treated as wings, outside every dip
/// and every side-lobe bump.
pub const WING_THRESHOLD: f64 = 0.01;

/// Output amplitudes over `{|2,0⟩, |0,2⟩, |1,1⟩}` when two photons in one
/// input mode meet a lossless splitter with intensity transmissivity `t²`.
///
/// The creation operator is mapped as `a† → t c† + r d†` and `(a†)²|0⟩/√2`
/// expanded in the two output modes.
pub fn bs_two_photon_state(transmissivity: f64) -> Result<[f64; 3]> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::invalid("transmissivity", format!("must lie in [0, 1], got {transmissivity}")));
    }
    let t = transmissivity.sqrt();
    let r = (1.0 - transmissivity).sqrt();
    // Coefficients of c†^p d†^(2-p) in (t c† + r d†)², indexed by p.
    let linear = [r, t];
    let mut poly = [0.0f64; 3];
    for (p1, &x) in linear.iter().enumerate() {
        for (p2, &y) in linear.iter().enumerate() {
            poly[p1 + p2] += x * y;
        }
    }
    let factorial = [1.0f64, 1.0, 2.0];
    // c†^p d†^q |0,0⟩ = √(p! q!) |p,q⟩, and the input carries 1/√2.
    let amplitude = |p: usize| poly[p] * (factorial[p] * factorial[2 - p]).sqrt() / SQRT_2;
    Ok([amplitude(2), amplitude(0), amplitude(1)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    comb: ModeComb,
    delay: f64,
    pump_phase: f64,
    resolution: f64,
    mode_match: f64,
    mode_match_length: Option<f64>,
    splitters: [f64; 2],
}

impl InterferometerConfig {
    /// Balanced splitters, perfect mode match and pump phase `ω_pΔ mod 2π`.
    pub fn new(comb: ModeComb, delay: f64, resolution: f64) -> Result<Self> {
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::invalid("delay", format!("must be non-negative, got {delay}")));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::invalid("resolution", format!("must be positive, got {resolution}")));
        }
        let phase = comb.pump_frequency() * delay;
        let pump_phase = phase - TAU * (phase / TAU).floor();
        Ok(InterferometerConfig {
            comb,
            delay,
            pump_phase,
            resolution,
            mode_match: 1.0,
            mode_match_length: None,
            splitters: [0.5, 0.5],
        })
    }

    pub fn with_pump_phase(mut self, phase: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::invalid("pump_phase", "must be finite"));
        }
        self.pump_phase = phase;
        Ok(self)
    }

    /// Moves the arm delay, keeping the pump phase.
    pub fn with_delay(mut self, delay: f64) -> Result<Self> {
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::invalid("delay", format!("must be non-negative, got {delay}")));
        }
        self.delay = delay;
        Ok(self)
    }

    pub fn with_mode_match(mut self, mode_match: f64) -> Result<Self> {
        if !(mode_match > 0.0 && mode_match <= 1.0) {
            return Err(Error::invalid("mode_match", format!("must lie in (0, 1], got {mode_match}")));
        }
        self.mode_match = mode_match;
        Ok(self)
    }

    /// Exponential loss of mode overlap with delay, `μ(Δ) = μ e^{-Δ/L}`.
    pub fn with_mode_match_decay(mut self, length: Option<f64>) -> Result<Self> {
        if let Some(l) = length {
            if !(l > 0.0) {
                return Err(Error::invalid("mode_match_decay", format!("must be positive, got {l}")));
            }
        }
        self.mode_match_length = length;
        Ok(self)
    }

    /// Intensity transmissivities of the first and second splitter.
    pub fn with_splitters(mut self, t1: f64, t2: f64) -> Result<Self> {
        for t in [t1, t2] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::invalid("splitter", format!("transmissivity must lie in (0, 1), got {t}")));
            }
        }
        self.splitters = [t1, t2];
        Ok(self)
    }

    pub fn comb(&self) -> &ModeComb {
        &self.comb
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn pump_phase(&self) -> f64 {
        self.pump_phase
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn splitters(&self) -> [f64; 2] {
        self.splitters
    }

    pub fn mode_match_length(&self) -> Option<f64> {
        self.mode_match_length
    }

    /// Mode match at the configured delay.
    pub fn mode_match(&self) -> f64 {
        match self.mode_match_length {
            Some(l) => self.mode_match * (-self.delay / l).exp(),
            None => self.mode_match,
        }
    }

    pub fn base_mode_match(&self) -> f64 {
        self.mode_match
    }

    /// `(a, b, c, d) = (√(T₁T₂), √(R₁R₂), √(T₁R₂), √(R₁T₂))`.
    fn path_weights(&self) -> [f64; 4] {
        let [t1, t2] = self.splitters;
        let (r1, r2) = (1.0 - t1, 1.0 - t2);
        [(t1 * t2).sqrt(), (r1 * r2).sqrt(), (t1 * r2).sqrt(), (r1 * t2).sqrt()]
    }

    fn is_balanced(&self) -> bool {
        self.splitters == [0.5, 0.5]
    }
}

/// Pair amplitude, short-cut to `g·F` when that is already exchange symmetric.
fn amplitude(comb: &ModeComb, tau: f64) -> Complex64 {
    let s = comb.single_mode();
    if comb.is_locked() && s.center() == 0.0 {
        envelope_g_at(s, tau) * dirichlet_f(tau, comb.n_side_modes(), comb.mode_spacing())
    } else {
        pair_amplitude(comb, tau)
    }
}

/// Two-detector correlation `Γ₁₂(τ)` including the pointwise cross term.
pub fn gamma12(tau: f64, cfg: &InterferometerConfig) -> f64 {
    let comb = &cfg.comb;
    let dl = cfg.delay;
    let theta = cfg.pump_phase;
    let mu = cfg.mode_match();
    let h = amplitude(comb, tau);
    let hp = amplitude(comb, tau + dl);
    let hm = amplitude(comb, tau - dl);
    if cfg.is_balanced() {
        let first = 0.5 * (1.0 - theta.cos()) * h.norm_sqr();
        let second = 0.25 * (hp.norm_sqr() + hm.norm_sqr() - 2.0 * mu * (hp * hm.conj()).re);
        let cross = mu * (Complex64::i() * (0.5 * theta).sin() * h.conj() * (hp - hm)).re;
        return first + second + cross;
    }
    let [a, b, c, d] = cfg.path_weights();
    let same_path = Complex64::new(a * c, 0.0) - Complex64::cis(theta) * (b * d);
    let split = |hp: Complex64, hm: Complex64| hp * (b * c) - hm * (a * d);
    let first = h.norm_sqr() * same_path.norm_sqr();
    let second = b * b * c * c * hp.norm_sqr() + a * a * d * d * hm.norm_sqr()
        - 2.0 * mu * a * b * c * d * (hp * hm.conj()).re;
    let cross = 2.0 * mu * (h.conj() * same_path.conj() * Complex64::cis(0.5 * theta) * split(hp, hm)).re;
    4.0 * (first + second + cross)
}

/// Integrated coincidence rate and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceRate {
    /// `R₂(Δ)` at the configured pump phase.
    pub rate: f64,
    /// `R₂` averaged over the pump phase.
    pub dithered: f64,
    /// `R₀ = ∫|h|²`.
    pub r0: f64,
    /// `V(Δ)`, including the mode match.
    pub visibility: f64,
    /// `|∫h*(h₊ − h₋)| / R₀`.
    pub cross_ratio: f64,
}

fn support(comb: &ModeComb) -> f64 {
    let s = comb.single_mode();
    match s.shape() {
        // |g|² below 1e-17
        SpectralShape::Lorentzian => 20.0 / s.halfwidth(),
        SpectralShape::Gaussian => 7.0 / s.halfwidth(),
        SpectralShape::Rectangular => f64::INFINITY,
    }
}

/// Node spacing for the τ integrals.
pub fn integration_step(comb: &ModeComb) -> f64 {
    let peak = comb.round_trip_time() / (INTEGRATION_SAMPLES_PER_PEAK * comb.mode_count() as f64);
    let s = comb.single_mode();
    let envelope = core::f64::consts::PI / (10.0 * s.halfwidth() * s.shape().support_factor());
    peak.min(envelope)
}

/// `[h(τ_j), h(τ_j + Δ), h(τ_j − Δ)]` on the nodes `τ_j = (j − half)·dτ`.
///
/// For a locked comb with a centred envelope, and a step that divides the
/// round trip, the comb factor repeats every `t_r/dτ` nodes and is tabulated
/// once per offset.
fn node_amplitudes(comb: &ModeComb, half: usize, dt: f64, dl: f64) -> Vec<[Complex64; 3]> {
    let n = 2 * half + 1;
    let node = |j: usize| (j as f64 - half as f64) * dt;
    let s = comb.single_mode();
    let tr = comb.round_trip_time();
    let period = (tr / dt).round();
    let periodic = comb.is_locked() && s.center() == 0.0 && (period * dt - tr).abs() <= 1e-12 * tr;
    if !periodic {
        return (0..n)
            .map(|j| {
                let t = node(j);
                [amplitude(comb, t), amplitude(comb, t + dl), amplitude(comb, t - dl)]
            })
            .collect();
    }
    let p = period as usize;
    let table = |offset: f64| -> Vec<f64> {
        (0..p)
            .map(|k| dirichlet_f(k as f64 * dt + offset, comb.n_side_modes(), comb.mode_spacing()))
            .collect()
    };
    let tables = [table(0.0), table(dl), table(-dl)];
    let phase0 = (p - half % p) % p;
    (0..n)
        .map(|j| {
            let t = node(j);
            let k = (phase0 + j) % p;
            let at = |i: usize, offset: f64| Complex64::new(envelope_g_at(s, t + offset).re * tables[i][k], 0.0);
            [at(0, 0.0), at(1, dl), at(2, -dl)]
        })
        .collect()
}

/// Evaluates `R₀`, `V(Δ)` and the cross-term integral by the trapezoid rule on
/// nodes `τ_j = j·dτ`, `|τ_j| ≤ min(T_R/2, Δ + support)`.
pub fn coincidence_rate(cfg: &InterferometerConfig) -> Result<CoincidenceRate> {
    if cfg.resolution < cfg.delay {
        return Err(Error::Resolution {
            resolution: cfg.resolution,
            delay: cfg.delay,
        });
    }
    let comb = &cfg.comb;
    let dl = cfg.delay;
    let dt = integration_step(comb);
    let span = (0.5 * cfg.resolution).min(dl + support(comb));
    let half = (span / dt).floor() as usize;
    if 2 * half + 1 > MAX_NODES {
        return Err(Error::Grid {
            reason: format!("rate integral needs {} nodes (limit {MAX_NODES})", 2 * half + 1),
        });
    }
    let n = 2 * half + 1;
    let weight = |j: usize| if j == 0 || j + 1 == n { 0.5 * dt } else { dt };

    let values = node_amplitudes(comb, half, dt, dl);
    let r0 = pairwise_sum(0, n, &|j| weight(j) * values[j][0].norm_sqr());
    let overlap = pairwise_sum(0, n, &|j| weight(j) * (values[j][1] * values[j][2].conj()).re);
    let cross_re = pairwise_sum(0, n, &|j| weight(j) * (values[j][0].conj() * (values[j][1] - values[j][2])).re);
    let cross_im = pairwise_sum(0, n, &|j| weight(j) * (values[j][0].conj() * (values[j][1] - values[j][2])).im);

    if !(r0 > 0.0) {
        return Err(Error::Grid {
            reason: format!("R0 integrates to {r0:e}; the window misses the correlation peak"),
        });
    }
    let cross_ratio = cross_re.hypot(cross_im) / r0;
    if cross_ratio >= CROSS_TERM_TOLERANCE {
        return Err(Error::CrossTerm { ratio: cross_ratio });
    }

    let mu = cfg.mode_match();
    let visibility = mu * overlap / r0;
    let theta = cfg.pump_phase;
    let (rate, dithered) = if cfg.is_balanced() {
        let hom = 0.5 * r0 * (1.0 - visibility);
        (0.5 * r0 * (1.0 - theta.cos()) + hom, 0.5 * r0 + hom)
    } else {
        // The split-path cross term no longer cancels when b·c ≠ a·d.
        let [a, b, c, d] = cfg.path_weights();
        let sum_plus = pairwise_sum(0, n, &|j| weight(j) * values[j][0].conj() * values[j][1]);
        let sum_minus = pairwise_sum(0, n, &|j| weight(j) * values[j][0].conj() * values[j][2]);
        let same_path = Complex64::new(a * c, 0.0) - Complex64::cis(theta) * (b * d);
        let split = sum_plus * (b * c) - sum_minus * (a * d);
        let cross = 2.0 * mu * (same_path.conj() * Complex64::cis(0.5 * theta) * split).re;
        let fringe = a * a * c * c + b * b * d * d;
        let hom = b * b * c * c + a * a * d * d - 2.0 * a * b * c * d * visibility;
        let rate = 4.0 * (r0 * (fringe - 2.0 * a * b * c * d * theta.cos() + hom) + cross);
        // Dithering over a full period of the half-angle terms removes every
        // phase-dependent contribution.
        (rate, 4.0 * r0 * (fringe + hom))
    };
    Ok(CoincidenceRate {
        rate: rate.max(0.0),
        dithered: dithered.max(0.0),
        r0,
        visibility,
        cross_ratio,
    })
}

/// Phase-dithered rate `R₀/2 + R₀/2 (1 − V)` (for balanced splitters).
pub fn dither_averaged_rate(cfg: &InterferometerConfig) -> Result<f64> {
    coincidence_rate(cfg).map(|r| r.dithered)
}

/// Single-photon coherence at the arm delay without the fast pump phase:
/// `G(Δ) F(Δ) / (2N+1)`.
pub fn singles_coherence(comb: &ModeComb, delay: f64) -> Complex64 {
    let f = dirichlet_f(delay, comb.n_side_modes(), comb.mode_spacing());
    envelope_big_g_at(comb.single_mode(), delay) * (f / comb.mode_count() as f64)
}

/// Normalised single counts at the two outputs for pump phase `θ`; the signal
/// photon picks up half the pump phase.
pub fn singles(cfg: &InterferometerConfig, theta: f64) -> (f64, f64) {
    let coh = singles_coherence(&cfg.comb, cfg.delay) * cfg.mode_match();
    let fringe = coh.norm() * (0.5 * theta + coh.arg()).cos();
    ((1.0 + fringe).max(0.0), (1.0 - fringe).max(0.0))
}

/// Rates at one abscissa point, before normalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub coincidence: f64,
    pub singles: (f64, f64),
    pub visibility: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Delays (s) for a delay scan, pump phases (rad) for a fringe scan.
    pub abscissa: Vec<f64>,
    pub coincidence: Vec<f64>,
    pub singles_1: Vec<f64>,
    pub singles_2: Vec<f64>,
    /// `V(Δ)` at each point.
    pub visibility: Vec<f64>,
    /// Rate that `coincidence` was divided by.
    pub baseline: f64,
    pub config: InterferometerConfig,
}

/// Fitted fringes of a phase scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFits {
    pub coincidence: Option<Sinusoid>,
    pub singles_1: Option<Sinusoid>,
    pub singles_2: Option<Sinusoid>,
}

impl ScanResult {
    /// Fits `a + b cos θ + c sin θ` to coincidences and the half-angle
    /// version to the singles.
    pub fn fringe_fits(&self) -> FringeFits {
        FringeFits {
            coincidence: fit_sinusoid(&self.abscissa, &self.coincidence, 1.0),
            singles_1: fit_sinusoid(&self.abscissa, &self.singles_1, 0.5),
            singles_2: fit_sinusoid(&self.abscissa, &self.singles_2, 0.5),
        }
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }
}

/// One delay-scan point at `delay` with the configuration's pump phase.
pub fn delay_scan_point(cfg: &InterferometerConfig, delay: f64, dithered: bool) -> Result<ScanPoint> {
    let at = cfg.clone().with_delay(delay)?;
    let rate = coincidence_rate(&at)?;
    let singles = if dithered { (1.0, 1.0) } else { singles(&at, at.pump_phase) };
    Ok(ScanPoint {
        coincidence: if dithered { rate.dithered } else { rate.rate },
        singles,
        visibility: rate.visibility,
        r0: rate.r0,
    })
}

/// Normalises raw scan points by the mean coincidence over the wings
/// (`|V| < 0.01`), falling back to `R₀` when no point qualifies.
pub fn assemble_delay_scan(cfg: &InterferometerConfig, delays: &[f64], points: &[ScanPoint]) -> ScanResult {
    let wings: Vec<f64> = points
        .iter()
        .filter(|p| p.visibility.abs() < WING_THRESHOLD)
        .map(|p| p.coincidence)
        .collect();
    let baseline = if wings.is_empty() {
        points.first().map_or(1.0, |p| p.r0)
    } else {
        wings.iter().sum::<f64>() / wings.len() as f64
    };
    ScanResult {
        abscissa: delays.to_vec(),
        coincidence: points.iter().map(|p| p.coincidence / baseline).collect(),
        singles_1: points.iter().map(|p| p.singles.0).collect(),
        singles_2: points.iter().map(|p| p.singles.1).collect(),
        visibility: points.iter().map(|p| p.visibility).collect(),
        baseline,
        config: cfg.clone(),
    }
}

/// Coincidence (dithered or at fixed pump phase) and singles versus arm delay.
pub fn delay_scan(cfg: &InterferometerConfig, delays: &[f64], dithered: bool) -> Result<ScanResult> {
    let points = delays
        .iter()
        .map(|&d| delay_scan_point(cfg, d, dithered))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_delay_scan(cfg, delays, &points))
}

/// Coincidence and singles versus pump phase at the configured delay.
///
/// Coincidences are normalised to `R₀`.
pub fn phase_fringe_scan(cfg: &InterferometerConfig, phases: &[f64]) -> Result<ScanResult> {
    let base = coincidence_rate(cfg)?;
    let mut coincidence = Vec::with_capacity(phases.len());
    let mut s1 = Vec::with_capacity(phases.len());
    let mut s2 = Vec::with_capacity(phases.len());
    for &theta in phases {
        let at = cfg.clone().with_pump_phase(theta)?;
        let rate = if at.is_balanced() {
            0.5 * base.r0 * (1.0 - theta.cos()) + 0.5 * base.r0 * (1.0 - base.visibility)
        } else {
            coincidence_rate(&at)?.rate
        };
        coincidence.push(rate.max(0.0) / base.r0);
        let (a, b) = singles(&at, theta);
        s1.push(a);
        s2.push(b);
    }
    Ok(ScanResult {
        abscissa: phases.to_vec(),
        coincidence,
        singles_1: s1,
        singles_2: s2,
        visibility: alloc::vec![base.visibility; phases.len()],
        baseline: base.r0,
        config: cfg.clone(),
    })
}
