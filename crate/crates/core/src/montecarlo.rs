//! Monte Carlo detection of photon pairs.
//!
//! Pair delays are drawn from a correlation trace by inverse CDF, turned into
//! two click streams by a detector model (jitter, efficiency, dark counts) and
//! paired into coincidences. All random work is split into chunks of
//! [`CHUNK_LEN`] events, each with its own ChaCha stream derived from
//! `(seed, chunk)`, so any schedule over chunks gives identical output.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::correlation::{CorrelationTrace, TraceKind};
use crate::{Error, Result};

pub const CHUNK_LEN: usize = 1 << 16;

const DELAY_SALT: u64 = 0;
const DETECT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const DARK_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// Uniform double in `[0, 1)` from the top 53 bits of a `u64`.
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// RNG for one chunk of one random stream.
pub fn chunk_rng(seed: u64, salt: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(chunk as u64);
    rng
}

pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK_LEN)
}

/// Index range of chunk `c` out of `n` events.
pub fn chunk_range(n: usize, chunk: usize) -> core::ops::Range<usize> {
    let lo = chunk * CHUNK_LEN;
    lo..(lo + CHUNK_LEN).min(n)
}

/// Inverse-CDF sampler over an intensity trace.
///
/// Sample `i` owns the cell `[t_i − h/2, t_i + h/2]` clipped to the grid, with
/// mass `y_i × width`; within a cell the CDF is linear.
#[derive(Debug, Clone)]
pub struct DelaySampler {
    edges: Vec<f64>,
    cdf: Vec<f64>,
}

impl DelaySampler {
    pub fn new(trace: &CorrelationTrace) -> Result<Self> {
        if trace.kind() != TraceKind::Intensity {
            return Err(Error::invalid("trace", "sampling needs an intensity trace"));
        }
        let grid = trace.grid();
        let n = grid.n_points();
        let h = grid.spacing();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(grid.t_min());
        for i in 0..n - 1 {
            edges.push(grid.time(i) + 0.5 * h);
        }
        edges.push(grid.t_max());
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for (i, z) in trace.samples().iter().enumerate() {
            let w = z.re;
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::DegenerateDensity);
            }
            acc += w * (edges[i + 1] - edges[i]);
            cdf.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::DegenerateDensity);
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(DelaySampler { edges, cdf })
    }

    /// Delay at cumulative probability `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        // First cell whose upper CDF exceeds u; empty cells are skipped.
        let cell = self.cdf[1..].partition_point(|&c| c <= u).min(self.cdf.len() - 2);
        let (c0, c1) = (self.cdf[cell], self.cdf[cell + 1]);
        let (t0, t1) = (self.edges[cell], self.edges[cell + 1]);
        if c1 > c0 {
            t0 + (u - c0) / (c1 - c0) * (t1 - t0)
        } else {
            t0
        }
    }

    /// CDF of the sampling distribution at `t`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.edges[0] {
            return 0.0;
        }
        let last = self.edges.len() - 1;
        if t >= self.edges[last] {
            return 1.0;
        }
        let cell = self.edges.partition_point(|&e| e <= t) - 1;
        let frac = (t - self.edges[cell]) / (self.edges[cell + 1] - self.edges[cell]);
        self.cdf[cell] + frac * (self.cdf[cell + 1] - self.cdf[cell])
    }

    /// Delays for chunk `chunk` of an `n`-event run.
    pub fn sample_chunk(&self, seed: u64, chunk: usize, n: usize) -> Vec<f64> {
        let mut rng = chunk_rng(seed, DELAY_SALT, chunk);
        chunk_range(n, chunk).map(|_| self.quantile(unit_f64(&mut rng))).collect()
    }

    pub fn t_min(&self) -> f64 {
        self.edges[0]
    }

    pub fn t_max(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }
}

/// `n` i.i.d. pair delays distributed as the trace.
pub fn sample_pair_delays(trace: &CorrelationTrace, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = DelaySampler::new(trace)?;
    let mut out = Vec::with_capacity(n);
    for c in 0..chunk_count(n) {
        out.extend(sampler.sample_chunk(seed, c, n));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Jitter {
    /// Uniform on `±T_R/2`.
    #[default]
    Rectangular,
    /// Normal with the same variance, `T_R/√12`.
    Gaussian,
}

impl core::str::FromStr for Jitter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rectangular" => Ok(Jitter::Rectangular),
            "gaussian" => Ok(Jitter::Gaussian),
            other => Err(Error::invalid(
                "jitter",
                alloc::format!("unknown jitter kernel `{other}` (rectangular, gaussian)"),
            )),
        }
    }
}

impl Jitter {
    pub fn name(self) -> &'static str {
        match self {
            Jitter::Rectangular => "rectangular",
            Jitter::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub resolution: f64,
    pub coincidence_window: f64,
    pub efficiency: f64,
    /// Dark clicks per second on each detector.
    pub dark_rate: f64,
    pub jitter: Jitter,
}

impl DetectorModel {
    pub fn new(resolution: f64, coincidence_window: f64, efficiency: f64, dark_rate: f64) -> Result<Self> {
        let det = DetectorModel {
            resolution,
            coincidence_window,
            efficiency,
            dark_rate,
            jitter: Jitter::Rectangular,
        };
        det.validate()?;
        Ok(det)
    }

    /// Perfect detector: no jitter, no loss, no dark counts.
    pub fn ideal(coincidence_window: f64) -> Result<Self> {
        Self::new(0.0, coincidence_window, 1.0, 0.0)
    }

    pub fn with_jitter(mut self, jitter: Jitter) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution >= 0.0 && self.resolution.is_finite()) {
            return Err(Error::invalid("resolution", alloc::format!("must be >= 0, got {}", self.resolution)));
        }
        if !(self.coincidence_window > 0.0 && self.coincidence_window.is_finite()) {
            return Err(Error::invalid(
                "coincidence_window",
                alloc::format!("must be positive, got {}", self.coincidence_window),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", alloc::format!("must lie in (0, 1], got {}", self.efficiency)));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::invalid("dark_rate", alloc::format!("must be >= 0, got {}", self.dark_rate)));
        }
        Ok(())
    }

    fn jitter_sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        if self.resolution == 0.0 {
            return 0.0;
        }
        match self.jitter {
            Jitter::Rectangular => (unit_f64(rng) - 0.5) * self.resolution,
            Jitter::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                z * self.resolution / 12f64.sqrt()
            }
        }
    }

    /// How far jitter can move a timestamp (six sigma for Gaussian jitter).
    fn jitter_reach(&self) -> f64 {
        match self.jitter {
            Jitter::Rectangular => 0.5 * self.resolution,
            Jitter::Gaussian => 6.0 * self.resolution / 12f64.sqrt(),
        }
    }
}

/// Where a click came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// Photon of pair number `id`.
    Photon(u64),
    Dark,
}

/// Click time as an unevaluated sum `hi + lo` with `hi = fl(hi + lo)`.
///
/// Runs can last far longer than the delays they resolve; the low part keeps
/// what rounding to a single `f64` would drop, so differences of nearby
/// clicks are accurate however long the run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timestamp {
    hi: f64,
    lo: f64,
}

impl Timestamp {
    /// Exact `base + offset` (TwoSum).
    pub fn new(base: f64, offset: f64) -> Self {
        let hi = base + offset;
        let b = hi - base;
        let lo = (base - (hi - b)) + (offset - b);
        Timestamp { hi, lo }
    }

    /// Seconds since the start of the run, rounded to one `f64`.
    pub fn seconds(self) -> f64 {
        self.hi
    }

    /// `self − earlier` in seconds.
    pub fn since(self, earlier: Timestamp) -> f64 {
        (self.hi - earlier.hi) + (self.lo - earlier.lo)
    }

    pub fn total_cmp(&self, other: &Timestamp) -> core::cmp::Ordering {
        self.hi.total_cmp(&other.hi).then(self.lo.total_cmp(&other.lo))
    }
}

impl From<f64> for Timestamp {
    fn from(seconds: f64) -> Self {
        Timestamp::new(seconds, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Click {
    pub time: Timestamp,
    pub source: Source,
}

/// Origin of a coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Both photons of one pair.
    Pair,
    /// At least one dark click.
    Dark,
    /// Photons of two different pairs.
    CrossPair,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Pair => "pair",
            Origin::Dark => "dark",
            Origin::CrossPair => "cross_pair",
        }
    }
}

/// Click times on detectors 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub t1: Timestamp,
    pub t2: Timestamp,
    pub origin: Origin,
}

impl EventRecord {
    pub fn delay(&self) -> f64 {
        self.t2.since(self.t1)
    }
}

/// Emission timeline shared by all chunks of a run.
///
/// Pair `k` is emitted uniformly inside the slot of its chunk, so chunk `c`
/// occupies `[margin + c·L/rate, margin + (c·L + len)/rate]`; the margin keeps
/// every timestamp positive and every click inside the dark-count span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionPlan {
    pub n: usize,
    pub pair_rate: f64,
    pub margin: f64,
}

impl EmissionPlan {
    /// `max_delay` bounds `|τ|` of every sampled delay.
    pub fn new(n: usize, pair_rate: f64, max_delay: f64, det: &DetectorModel) -> Result<Self> {
        if !(pair_rate > 0.0 && pair_rate.is_finite()) {
            return Err(Error::invalid("pair_rate", alloc::format!("must be positive, got {pair_rate}")));
        }
        let margin = max_delay.abs() + 2.0 * det.jitter_reach() + det.resolution;
        Ok(EmissionPlan { n, pair_rate, margin })
    }

    /// Total time covered by the run, margins included.
    pub fn span(&self) -> f64 {
        self.n as f64 / self.pair_rate + 2.0 * self.margin
    }

    fn slot(&self, chunk: usize) -> (f64, f64) {
        let range = chunk_range(self.n, chunk);
        let lo = self.margin + range.start as f64 / self.pair_rate;
        let hi = self.margin + range.end as f64 / self.pair_rate;
        (lo, hi)
    }
}

/// Clicks produced by one chunk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChunkDetections {
    pub pairs: Vec<EventRecord>,
    pub clicks: [Vec<Click>; 2],
}

/// Detects the pairs of chunk `chunk`; `delays` are that chunk's delays.
pub fn detect_chunk(
    delays: &[f64],
    chunk: usize,
    plan: &EmissionPlan,
    det: &DetectorModel,
    seed: u64,
) -> ChunkDetections {
    let mut rng = chunk_rng(seed, DETECT_SALT, chunk);
    let (lo, hi) = plan.slot(chunk);
    let first_id = (chunk * CHUNK_LEN) as u64;
    let mut out = ChunkDetections::default();
    for (k, &tau) in delays.iter().enumerate() {
        let id = first_id + k as u64;
        let t0 = lo + unit_f64(&mut rng) * (hi - lo);
        let j1 = det.jitter_sample(&mut rng);
        let j2 = det.jitter_sample(&mut rng);
        let keep1 = det.efficiency >= 1.0 || unit_f64(&mut rng) < det.efficiency;
        let keep2 = det.efficiency >= 1.0 || unit_f64(&mut rng) < det.efficiency;
        let t1 = Timestamp::new(t0, j1);
        let t2 = Timestamp::new(t0, tau + j2);
        if keep1 {
            out.clicks[0].push(Click {
                time: t1,
                source: Source::Photon(id),
            });
        }
        if keep2 {
            out.clicks[1].push(Click {
                time: t2,
                source: Source::Photon(id),
            });
        }
        if keep1 && keep2 {
            out.pairs.push(EventRecord {
                t1,
                t2,
                origin: Origin::Pair,
            });
        }
    }
    out
}

/// Dark clicks for time slice `slice` of `slices` equal slices of the run.
pub fn dark_chunk(slice: usize, slices: usize, plan: &EmissionPlan, det: &DetectorModel, seed: u64) -> [Vec<Click>; 2] {
    let mut out: [Vec<Click>; 2] = [Vec::new(), Vec::new()];
    if det.dark_rate == 0.0 {
        return out;
    }
    let width = plan.span() / slices as f64;
    let lo = slice as f64 * width;
    let mut rng = chunk_rng(seed, DARK_SALT, slice);
    for channel in out.iter_mut() {
        let count = match Poisson::new(det.dark_rate * width) {
            Ok(p) => {
                let k: f64 = p.sample(&mut rng);
                k as usize
            }
            Err(_) => 0,
        };
        for _ in 0..count {
            channel.push(Click {
                time: Timestamp::from(lo + unit_f64(&mut rng) * width),
                source: Source::Dark,
            });
        }
    }
    out
}

/// All detections of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Detections {
    /// Pairs with both photons detected, in emission order.
    pub pairs: Vec<EventRecord>,
    /// Clicks on each detector, sorted by time.
    pub clicks: [Vec<Click>; 2],
}

impl Detections {
    /// Concatenates per-chunk results (in chunk order) and sorts the clicks.
    pub fn assemble(chunks: Vec<ChunkDetections>, dark: Vec<[Vec<Click>; 2]>) -> Self {
        let mut out = Detections::default();
        for c in chunks {
            out.pairs.extend(c.pairs);
            let [a, b] = c.clicks;
            out.clicks[0].extend(a);
            out.clicks[1].extend(b);
        }
        for [a, b] in dark {
            out.clicks[0].extend(a);
            out.clicks[1].extend(b);
        }
        for ch in out.clicks.iter_mut() {
            ch.sort_by(|x, y| x.time.total_cmp(&y.time).then(x.source.cmp(&y.source)));
        }
        out
    }

    pub fn dark_slices(plan: &EmissionPlan) -> usize {
        chunk_count(plan.n).max(1)
    }
}

/// Sequential detection of a full run.
pub fn detect(delays: &[f64], plan: &EmissionPlan, det: &DetectorModel, seed: u64) -> Result<Detections> {
    det.validate()?;
    if delays.len() != plan.n {
        return Err(Error::invalid("delays", "length does not match the emission plan"));
    }
    let chunks = (0..chunk_count(plan.n))
        .map(|c| detect_chunk(&delays[chunk_range(plan.n, c)], c, plan, det, seed))
        .collect();
    let slices = Detections::dark_slices(plan);
    let dark = (0..slices).map(|s| dark_chunk(s, slices, plan, det, seed)).collect();
    Ok(Detections::assemble(chunks, dark))
}

/// Every (detector 1, detector 2) click pair with `|t₂ − t₁| ≤ window`.
pub fn coincidences(det: &Detections, window: f64) -> Vec<EventRecord> {
    let [a, b] = &det.clicks;
    let mut out = Vec::new();
    let mut start = 0;
    for c1 in a {
        while start < b.len() && b[start].time.since(c1.time) < -window {
            start += 1;
        }
        for c2 in &b[start..] {
            if c2.time.since(c1.time) > window {
                break;
            }
            let origin = match (c1.source, c2.source) {
                (Source::Photon(x), Source::Photon(y)) if x == y => Origin::Pair,
                (Source::Photon(_), Source::Photon(_)) => Origin::CrossPair,
                _ => Origin::Dark,
            };
            out.push(EventRecord {
                t1: c1.time,
                t2: c2.time,
                origin,
            });
        }
    }
    out
}

/// Counts per bin over `[lo, lo + bins·width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    /// Bins of `bin_width` covering `[lo, hi)`; the last bin may overhang `hi`.
    pub fn new(lo: f64, hi: f64, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::invalid("bin_width", alloc::format!("must be positive, got {bin_width}")));
        }
        if !(hi > lo) {
            return Err(Error::invalid("range", alloc::format!("need hi > lo, got [{lo:e}, {hi:e})")));
        }
        let bins = ((hi - lo) / bin_width).ceil().max(1.0) as usize;
        Ok(Histogram {
            lo,
            bin_width,
            counts: alloc::vec![0; bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let k = ((x - self.lo) / self.bin_width).floor();
        if k < 0.0 || k >= self.counts.len() as f64 {
            None
        } else {
            Some(k as usize)
        }
    }

    pub fn add(&mut self, x: f64) {
        match self.bin_of(x) {
            Some(k) => self.counts[k] += 1,
            None if x < self.lo => self.underflow += 1,
            None => self.overflow += 1,
        }
    }

    /// Adds another histogram with identical binning.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.bin_width != other.bin_width || self.counts.len() != other.counts.len() {
            return Err(Error::invalid("histogram", "cannot merge histograms with different binning"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range() + self.underflow + self.overflow
    }

    pub fn edge(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.bin_width
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.bin_width
    }

    /// `1 − n(t_r/2) / n(0)`, comparing the bins holding the two delays.
    pub fn comb_contrast(&self, round_trip: f64) -> Option<f64> {
        let peak = self.counts[self.bin_of(0.0)?];
        let valley = self.counts[self.bin_of(0.5 * round_trip)?];
        if peak == 0 {
            None
        } else {
            Some(1.0 - valley as f64 / peak as f64)
        }
    }
}

/// Histogram of `t₂ − t₁`.
pub fn histogram_delays(records: &[EventRecord], bin_width: f64, lo: f64, hi: f64) -> Result<Histogram> {
    let mut h = Histogram::new(lo, hi, bin_width)?;
    for r in records {
        h.add(r.delay());
    }
    Ok(h)
}
