//! The five pipelines behind the command line. Each returns its files
//! instead of writing them, so callers decide where they go.

use rayon::prelude::*;

use twophoton_core::correlation::{gamma1_coherence, gamma2_detector_averaged, gamma2_mode_locked};
use twophoton_core::engineering::{combined_gamma2, default_wideband_halfwidth, solve_excision};
use twophoton_core::interferometer::{assemble_delay_scan, delay_scan_point, phase_fringe_scan};
use twophoton_core::montecarlo::{
    chunk_count, chunk_range, coincidences, dark_chunk, detect_chunk, histogram_delays, DelaySampler, Detections,
    EmissionPlan, Origin,
};
use twophoton_core::{
    DetectorModel, InterferometerConfig, Result, SpectralAmplitude, TimeGrid, WidebandState,
};

use crate::config::{GridSection, RunConfig};
use crate::output::{csv, header, record, OutputFile};
use crate::Command;

fn grid(g: &GridSection) -> Result<TimeGrid> {
    TimeGrid::new(g.t_min, g.t_max, g.n_points)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + i as f64 * step }).collect()
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    match command {
        Command::Correlation => correlation(cfg),
        Command::Homscan => homscan(cfg),
        Command::Fringe => fringe(cfg),
        Command::Engineer => engineer(cfg),
        Command::Mc => mc(cfg),
    }
}

pub fn correlation(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let comb = cfg.mode_comb()?;
    let g = grid(&cfg.grid)?;
    let tr = comb.round_trip_time();
    let gamma2 = gamma2_mode_locked(&comb, &g)?;
    let averaged = cfg
        .correlation
        .average_resolution
        .map(|res| gamma2_detector_averaged(&gamma2, res, tr))
        .transpose()?;
    let gamma1 = if cfg.correlation.coherence {
        Some(gamma1_coherence(&comb, &g)?)
    } else {
        None
    };

    let tau: Vec<f64> = g.times().collect();
    let g2 = gamma2.real();
    let avg = averaged.map(|t| t.real());
    let g1 = gamma1.map(|t| t.moduli());
    let mut columns: Vec<(&str, &[f64])> = vec![("tau_s", &tau), ("gamma2", &g2)];
    if let Some(a) = &avg {
        columns.push(("gamma2_averaged", a));
    }
    if let Some(a) = &g1 {
        columns.push(("gamma1_abs", a));
    }
    let meta = [("round_trip_time_s", fmt(tr)), ("mode_count", comb.mode_count().to_string())];
    Ok(vec![OutputFile {
        name: "correlation.csv",
        contents: csv(&header("correlation", cfg), &meta, &columns),
    }])
}

fn interferometer(cfg: &RunConfig, delay: f64) -> Result<InterferometerConfig> {
    let i = &cfg.interferometer;
    let mut ic = InterferometerConfig::new(cfg.mode_comb()?, delay, i.resolution)?
        .with_mode_match(i.mode_match)?
        .with_mode_match_decay(i.mode_match_decay)?
        .with_splitters(i.splitter_1, i.splitter_2)?;
    if let Some(p) = i.pump_phase {
        ic = ic.with_pump_phase(p)?;
    }
    Ok(ic)
}

pub fn homscan(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let s = &cfg.scan;
    let ic = interferometer(cfg, s.delay_min)?;
    let delays = linspace(s.delay_min, s.delay_max, s.points);
    let points = delays
        .par_iter()
        .map(|&d| delay_scan_point(&ic, d, s.dithered))
        .collect::<Result<Vec<_>>>()?;
    let scan = assemble_delay_scan(&ic, &delays, &points);

    let position: Option<Vec<f64>> = cfg
        .interferometer
        .mm_per_second
        .map(|k| delays.iter().map(|d| d * k).collect());
    let mut columns: Vec<(&str, &[f64])> = vec![("delay_s", &scan.abscissa)];
    if let Some(p) = &position {
        columns.push(("position_mm", p));
    }
    columns.extend([
        ("coincidence", scan.coincidence.as_slice()),
        ("singles_1", scan.singles_1.as_slice()),
        ("singles_2", scan.singles_2.as_slice()),
        ("visibility", scan.visibility.as_slice()),
    ]);
    let meta = [
        ("round_trip_time_s", fmt(ic.comb().round_trip_time())),
        ("baseline", fmt(scan.baseline)),
        ("pump_phase", fmt(ic.pump_phase())),
    ];
    Ok(vec![OutputFile {
        name: "homscan.csv",
        contents: csv(&header("homscan", cfg), &meta, &columns),
    }])
}

pub fn fringe(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let f = &cfg.fringe;
    let ic = interferometer(cfg, f.delay)?;
    let phases = linspace(f.phase_min, f.phase_max, f.points);
    let scan = phase_fringe_scan(&ic, &phases)?;
    let fits = scan.fringe_fits();
    let fit = |s: Option<twophoton_core::analysis::Sinusoid>, what: fn(&twophoton_core::analysis::Sinusoid) -> f64| {
        s.map_or_else(|| "undefined".to_string(), |s| fmt(what(&s)))
    };
    let meta = [
        ("round_trip_time_s", fmt(ic.comb().round_trip_time())),
        ("r0", fmt(scan.baseline)),
        ("visibility_v", fmt(scan.visibility[0])),
        ("coincidence_visibility", fit(fits.coincidence, |s| s.visibility())),
        ("singles_1_visibility", fit(fits.singles_1, |s| s.visibility())),
        ("singles_2_visibility", fit(fits.singles_2, |s| s.visibility())),
        ("singles_1_phase", fit(fits.singles_1, |s| s.phase)),
        ("singles_2_phase", fit(fits.singles_2, |s| s.phase)),
    ];
    let columns: [(&str, &[f64]); 4] = [
        ("pump_phase_rad", &scan.abscissa),
        ("coincidence", &scan.coincidence),
        ("singles_1", &scan.singles_1),
        ("singles_2", &scan.singles_2),
    ];
    Ok(vec![OutputFile {
        name: "fringe.csv",
        contents: csv(&header("fringe", cfg), &meta, &columns),
    }])
}

pub fn engineer(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let e = &cfg.engineer;
    let comb = cfg.mode_comb()?;
    let g = grid(&e.grid)?;
    let halfwidth = e
        .wideband_halfwidth
        .map_or_else(|| default_wideband_halfwidth(&comb), |w| cfg.angular(w));
    let template = WidebandState::new(SpectralAmplitude::new(e.wideband_shape, 0.0, halfwidth, 0.0)?, 0.0)?;
    let sol = solve_excision(&comb, &template, e.target_peak, &g)?;
    let before = gamma2_mode_locked(&comb, &g)?.real();
    let after = combined_gamma2(&comb, &sol.wideband, sol.eta, sol.zeta, &g)?.real();
    let tau: Vec<f64> = g.times().collect();
    let head = header("engineer", cfg);
    let meta = [("round_trip_time_s", fmt(comb.round_trip_time()))];
    let solution = [
        ("target_peak", sol.target_peak.to_string()),
        ("delay_s", fmt(sol.delay)),
        ("eta_re", fmt(sol.eta.re)),
        ("eta_im", fmt(sol.eta.im)),
        ("zeta_re", fmt(sol.zeta.re)),
        ("zeta_im", fmt(sol.zeta.im)),
        ("wideband_shape", e.wideband_shape.name().to_string()),
        ("wideband_halfwidth_rad_s", fmt(halfwidth)),
        ("residual", fmt(sol.residual)),
        ("retention_lower", fmt(sol.neighbor_retention[0])),
        ("retention_upper", fmt(sol.neighbor_retention[1])),
    ];
    Ok(vec![
        OutputFile {
            name: "engineer_before.csv",
            contents: csv(&head, &meta, &[("tau_s", &tau), ("gamma2", &before)]),
        },
        OutputFile {
            name: "engineer_after.csv",
            contents: csv(&head, &meta, &[("tau_s", &tau), ("gamma2", &after)]),
        },
        OutputFile {
            name: "engineer_solution.txt",
            contents: record(&head, &solution),
        },
    ])
}

/// Result of a Monte Carlo run before serialisation.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub detections: Detections,
    pub coincidences: Vec<twophoton_core::EventRecord>,
    pub histogram: twophoton_core::montecarlo::Histogram,
}

/// Samples, detects and pairs `cfg.mc.events` photon pairs, one chunk per
/// task; chunk seeds depend only on the chunk index.
pub fn simulate(cfg: &RunConfig) -> Result<McRun> {
    let m = &cfg.mc;
    let d = &cfg.detector;
    let comb = cfg.mode_comb()?;
    let det = DetectorModel::new(d.resolution, d.coincidence_window, d.efficiency, d.dark_rate)?.with_jitter(d.jitter);
    let trace = gamma2_mode_locked(&comb, &grid(&m.grid)?)?;
    let sampler = DelaySampler::new(&trace)?;
    let seed = cfg.seed;
    let n = m.events;
    let chunks = chunk_count(n);

    let delays: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| sampler.sample_chunk(seed, c, n))
        .collect::<Vec<_>>()
        .concat();
    let max_delay = sampler.t_min().abs().max(sampler.t_max().abs());
    let plan = EmissionPlan::new(n, m.pair_rate, max_delay, &det)?;
    let detected = (0..chunks)
        .into_par_iter()
        .map(|c| detect_chunk(&delays[chunk_range(n, c)], c, &plan, &det, seed))
        .collect();
    let slices = Detections::dark_slices(&plan);
    let dark = (0..slices)
        .into_par_iter()
        .map(|s| dark_chunk(s, slices, &plan, &det, seed))
        .collect();
    let detections = Detections::assemble(detected, dark);
    let coincidences = coincidences(&detections, det.coincidence_window);
    let histogram = histogram_delays(&coincidences, m.bin_width, m.hist_min, m.hist_max)?;
    Ok(McRun {
        detections,
        coincidences,
        histogram,
    })
}

pub fn mc(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let run = simulate(cfg)?;
    let h = &run.histogram;
    let tr = cfg.round_trip_time();
    let head = header("mc", cfg);
    let starts: Vec<f64> = (0..h.counts.len()).map(|k| h.edge(k)).collect();
    let centers: Vec<f64> = (0..h.counts.len()).map(|k| h.center(k)).collect();
    let counts: Vec<f64> = h.counts.iter().map(|&c| c as f64).collect();
    let by_origin = |o: Origin| run.coincidences.iter().filter(|r| r.origin == o).count();
    let pairs = by_origin(Origin::Pair);
    let dark = by_origin(Origin::Dark);
    let cross = by_origin(Origin::CrossPair);
    let summary = [
        ("events", cfg.mc.events.to_string()),
        ("seed", cfg.seed.to_string()),
        ("clicks_1", run.detections.clicks[0].len().to_string()),
        ("clicks_2", run.detections.clicks[1].len().to_string()),
        ("pairs_detected", run.detections.pairs.len().to_string()),
        ("coincidences", run.coincidences.len().to_string()),
        ("coincidences_pair", pairs.to_string()),
        ("coincidences_dark", dark.to_string()),
        ("coincidences_cross_pair", cross.to_string()),
        ("accidentals", (dark + cross).to_string()),
        ("histogram_in_range", h.in_range().to_string()),
        ("histogram_underflow", h.underflow.to_string()),
        ("histogram_overflow", h.overflow.to_string()),
        ("round_trip_time_s", fmt(tr)),
        (
            "comb_contrast",
            h.comb_contrast(tr).map_or_else(|| "undefined".to_string(), fmt),
        ),
    ];
    Ok(vec![
        OutputFile {
            name: "mc_histogram.csv",
            contents: csv(
                &head,
                &[("bin_width_s", fmt(h.bin_width))],
                &[("bin_start_s", &starts), ("bin_center_s", &centers), ("count", &counts)],
            ),
        },
        OutputFile {
            name: "mc_summary.txt",
            contents: record(&head, &summary),
        },
    ])
}
