//! Numerics for mode-locked two-photon states.
//!
//! A cavity-filtered parametric down-converter emits photon pairs into a comb of
//! `2N+1` longitudinal modes. When the modes share a common phase the two-photon
//! correlation function becomes a pulse train with period equal to the cavity
//! round-trip time, and an unbalanced Hong-Ou-Mandel interferometer shows its
//! coincidence dip reviving at every half round trip.
//!
//! The crate is `no_std` (it needs `alloc`) and is split by physical layer:
//!
//! * [`spectral`] - single-mode amplitudes, the mode comb and time grids.
//! * [`correlation`] - envelopes, the Dirichlet comb factor and the first- and
//!   second-order correlation traces.
//! * [`interferometer`] - beam-splitter Fock transform, two-detector correlation,
//!   coincidence rates, dither averaging and scans.
//! * [`engineering`] - excision of one comb peak by interference with a delayed
//!   wideband pair amplitude.
//! * [`montecarlo`] - inverse-CDF pair sampling, detector model, coincidence
//!   pairing and delay histograms, organised in independently seeded chunks.
//!
//! Frequencies are angular (rad/s) and times are seconds throughout, so the
//! round-trip time is `2π / ΔΩ`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod correlation;
pub mod engineering;
mod error;
pub mod interferometer;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use correlation::{CorrelationTrace, TraceKind};
pub use engineering::{ExcisionSolution, WidebandState};
pub use interferometer::{InterferometerConfig, ScanResult};
pub use montecarlo::{DetectorModel, EventRecord, Timestamp};
pub use spectral::{FrequencyConvention, ModeComb, SpectralAmplitude, SpectralShape, TimeGrid};
