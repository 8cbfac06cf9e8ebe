//! Run configuration: a flat `key = value` file.
//!
//! ```text
//! # comments run to the end of the line
//! units = angular              # or `ordinary` (frequencies in Hz, scaled by 2π)
//! comb.n_side_modes = 10
//! comb.linewidth = 0.01 fsr    # fraction of the mode spacing
//! grid.t_min = -2 tr           # multiple of the round-trip time
//! fringe.phase_max = 4 pi
//! ```
//!
//! Numbers may carry one suffix: `tr` on times, `fsr` on frequencies, `pi` on
//! phases. Keys not listed in [`KEYS`] and repeated keys are rejected.
//!
//! Every output file starts with the fully resolved configuration as `#@`
//! lines. When a config file contains any `#@` line, only those lines are
//! read, so an output file can be fed straight back in.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use twophoton_core::montecarlo::Jitter;
use twophoton_core::{FrequencyConvention, ModeComb, SpectralAmplitude, SpectralShape};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Time,
    Frequency,
    Phase,
    Real,
    Count,
    Integer,
    Seed,
    Flag,
    Word,
}

/// Every accepted key with its default, in header order. `comb.round_trip_time`
/// has no default: it replaces `comb.mode_spacing` when given.
pub const KEYS: &[(&str, &str)] = &[
    ("units", "angular"),
    ("comb.n_side_modes", "10"),
    ("comb.mode_spacing", "6.283185307179586e9"),
    ("comb.linewidth", "0.01 fsr"),
    ("comb.shape", "lorentzian"),
    ("comb.center", "0"),
    ("comb.pump_frequency", "4.71e15"),
    ("comb.phases", "locked"),
    ("comb.phase_seed", "0"),
    ("grid.t_min", "-2 tr"),
    ("grid.t_max", "2 tr"),
    ("grid.n_points", "4096"),
    ("correlation.coherence", "true"),
    ("correlation.average_resolution", "none"),
    ("interferometer.resolution", "1e-6"),
    ("interferometer.mode_match", "1"),
    ("interferometer.mode_match_decay", "none"),
    ("interferometer.pump_phase", "auto"),
    ("interferometer.splitter_1", "0.5"),
    ("interferometer.splitter_2", "0.5"),
    ("interferometer.mm_per_second", "none"),
    ("scan.delay_min", "0 tr"),
    ("scan.delay_max", "1.3 tr"),
    ("scan.points", "521"),
    ("scan.dithered", "true"),
    ("fringe.delay", "0.5 tr"),
    ("fringe.phase_min", "0"),
    ("fringe.phase_max", "4 pi"),
    ("fringe.points", "181"),
    ("engineer.target_peak", "1"),
    ("engineer.wideband_shape", "gaussian"),
    ("engineer.wideband_halfwidth", "auto"),
    ("engineer.t_min", "-1.5 tr"),
    ("engineer.t_max", "3.5 tr"),
    ("engineer.n_points", "16384"),
    ("detector.resolution", "0"),
    ("detector.coincidence_window", "10e-9"),
    ("detector.efficiency", "1"),
    ("detector.dark_rate", "0"),
    ("detector.jitter", "rectangular"),
    ("mc.events", "100000"),
    ("mc.pair_rate", "1e3"),
    ("mc.bin_width", "0.01 tr"),
    ("mc.hist_min", "-2 tr"),
    ("mc.hist_max", "2 tr"),
    ("mc.t_min", "-3 tr"),
    ("mc.t_max", "3 tr"),
    ("mc.n_points", "16384"),
    ("run.seed", "1"),
];

fn kind(key: &str) -> Option<Kind> {
    use Kind::*;
    Some(match key {
        "units" | "comb.shape" | "comb.phases" | "engineer.wideband_shape" | "detector.jitter" => Word,
        "comb.n_side_modes" | "grid.n_points" | "scan.points" | "fringe.points" | "engineer.n_points"
        | "mc.events" | "mc.n_points" => Count,
        "engineer.target_peak" => Integer,
        "comb.phase_seed" | "run.seed" => Seed,
        "correlation.coherence" | "scan.dithered" => Flag,
        "comb.mode_spacing" | "comb.linewidth" | "comb.center" | "comb.pump_frequency"
        | "engineer.wideband_halfwidth" => Frequency,
        "interferometer.pump_phase" | "fringe.phase_min" | "fringe.phase_max" => Phase,
        "interferometer.mode_match" | "interferometer.splitter_1" | "interferometer.splitter_2"
        | "interferometer.mm_per_second" | "detector.efficiency" | "detector.dark_rate" | "mc.pair_rate" => Real,
        "comb.round_trip_time" => Time,
        k if KEYS.iter().any(|(name, _)| *name == k) => Time,
        _ => return None,
    })
}

/// A `key = value` line and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a config file into entries, checking keys and duplicates.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let header_only = text.lines().any(|l| l.starts_with("#@"));
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = if header_only {
            match raw.strip_prefix("#@") {
                Some(rest) => rest,
                None => continue,
            }
        } else {
            raw.split('#').next().unwrap_or("")
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError {
                line: Some(line),
                key: None,
                message: format!("expected `key = value`, found `{body}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if kind(key).is_none() {
            return Err(ConfigError::at(Some(line), key, "unknown key"));
        }
        if value.is_empty() {
            return Err(ConfigError::at(Some(line), key, "missing value"));
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(ConfigError::at(
                Some(line),
                key,
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phases {
    Locked,
    Random,
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombSection {
    pub n_side_modes: usize,
    /// In the input convention (rad/s or Hz).
    pub mode_spacing: f64,
    pub linewidth: f64,
    pub shape: SpectralShape,
    pub center: f64,
    pub pump_frequency: f64,
    pub phases: Phases,
    pub phase_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSection {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSection {
    pub coherence: bool,
    pub average_resolution: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerSection {
    pub resolution: f64,
    pub mode_match: f64,
    pub mode_match_decay: Option<f64>,
    pub pump_phase: Option<f64>,
    pub splitter_1: f64,
    pub splitter_2: f64,
    pub mm_per_second: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSection {
    pub delay_min: f64,
    pub delay_max: f64,
    pub points: usize,
    pub dithered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeSection {
    pub delay: f64,
    pub phase_min: f64,
    pub phase_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineerSection {
    pub target_peak: i64,
    pub wideband_shape: SpectralShape,
    pub wideband_halfwidth: Option<f64>,
    pub grid: GridSection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSection {
    pub resolution: f64,
    pub coincidence_window: f64,
    pub efficiency: f64,
    pub dark_rate: f64,
    pub jitter: Jitter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSection {
    pub events: usize,
    pub pair_rate: f64,
    pub bin_width: f64,
    pub hist_min: f64,
    pub hist_max: f64,
    pub grid: GridSection,
}

/// Fully resolved configuration. Frequencies are kept in the input
/// convention; [`RunConfig::angular`] converts them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: FrequencyConvention,
    pub comb: CombSection,
    pub grid: GridSection,
    pub correlation: CorrelationSection,
    pub interferometer: InterferometerSection,
    pub scan: ScanSection,
    pub fringe: FringeSection,
    pub engineer: EngineerSection,
    pub detector: DetectorSection,
    pub mc: McSection,
    pub seed: u64,
}

struct Resolver {
    values: BTreeMap<String, (Option<usize>, String)>,
    units: FrequencyConvention,
    spacing: f64,
    round_trip: f64,
}

impl Resolver {
    fn raw(&self, key: &str) -> (Option<usize>, &str) {
        let (line, v) = &self.values[key];
        (*line, v.as_str())
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::at(self.values.get(key).and_then(|v| v.0), key, message)
    }

    fn number(&self, key: &str) -> Result<f64, ConfigError> {
        let (_, text) = self.raw(key);
        self.number_text(key, text)
    }

    fn number_text(&self, key: &str, text: &str) -> Result<f64, ConfigError> {
        let kind = kind(key).expect("known key");
        let text = text.trim();
        // The exponent marker is the only letter a plain number may contain.
        let (number, suffix) = match text.find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
            Some(i) => (text[..i].trim(), text[i..].trim()),
            None => (text, ""),
        };
        let x = if number.is_empty() && suffix == "pi" {
            1.0
        } else {
            f64::from_str(number).map_err(|_| self.err(key, format!("`{text}` is not a number")))?
        };
        let scale = match (suffix, kind) {
            ("", _) => 1.0,
            ("tr", Kind::Time) => self.round_trip,
            ("fsr", Kind::Frequency) => self.spacing,
            ("pi", Kind::Phase) => PI,
            (s, k) => {
                let allowed = match k {
                    Kind::Time => "`tr`",
                    Kind::Frequency => "`fsr`",
                    Kind::Phase => "`pi`",
                    _ => "no suffix",
                };
                return Err(self.err(key, format!("unit suffix `{s}` not allowed here ({allowed})")));
            }
        };
        let v = x * scale;
        if !v.is_finite() {
            return Err(self.err(key, format!("`{text}` is not finite")));
        }
        Ok(v)
    }

    fn optional(&self, key: &str, word: &str) -> Result<Option<f64>, ConfigError> {
        let (_, text) = self.raw(key);
        if text.eq_ignore_ascii_case(word) {
            Ok(None)
        } else {
            self.number(key).map(Some)
        }
    }

    fn count(&self, key: &str) -> Result<usize, ConfigError> {
        let (_, text) = self.raw(key);
        text.parse()
            .map_err(|_| self.err(key, format!("`{text}` is not a non-negative integer")))
    }

    fn integer(&self, key: &str) -> Result<i64, ConfigError> {
        let (_, text) = self.raw(key);
        text.parse().map_err(|_| self.err(key, format!("`{text}` is not an integer")))
    }

    fn seed(&self, key: &str) -> Result<u64, ConfigError> {
        let (_, text) = self.raw(key);
        text.parse().map_err(|_| self.err(key, format!("`{text}` is not a 64-bit seed")))
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key).1 {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.err(key, format!("expected `true` or `false`, got `{other}`"))),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key).1.parse().map_err(|e: T::Err| self.err(key, e.to_string()))
    }

    fn grid(&self, prefix: &str) -> Result<GridSection, ConfigError> {
        Ok(GridSection {
            t_min: self.number(&format!("{prefix}.t_min"))?,
            t_max: self.number(&format!("{prefix}.t_max"))?,
            n_points: self.count(&format!("{prefix}.n_points"))?,
        })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_entries(&parse_entries(text)?)
    }

    pub fn from_entries(entries: &[Entry]) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, (Option<usize>, String)> =
            KEYS.iter().map(|(k, v)| (k.to_string(), (None, v.to_string()))).collect();
        let spacing_given = entries.iter().find(|e| e.key == "comb.mode_spacing");
        let round_trip_given = entries.iter().find(|e| e.key == "comb.round_trip_time");
        if let (Some(a), Some(b)) = (spacing_given, round_trip_given) {
            return Err(ConfigError::at(
                Some(b.line),
                &b.key,
                format!("conflicts with comb.mode_spacing on line {}; give one of them", a.line),
            ));
        }
        for e in entries {
            values.insert(e.key.clone(), (Some(e.line), e.value.clone()));
        }

        let mut r = Resolver {
            values,
            units: FrequencyConvention::Angular,
            spacing: f64::NAN,
            round_trip: f64::NAN,
        };
        r.units = r.parsed("units")?;
        if let Some(e) = round_trip_given {
            let t = r.number_text("comb.round_trip_time", &e.value)?;
            if !(t > 0.0) {
                return Err(r.err("comb.round_trip_time", "must be positive"));
            }
            let spacing = r.units.from_angular(TAU / t);
            r.values.remove("comb.round_trip_time");
            r.values.insert("comb.mode_spacing".into(), (Some(e.line), format!("{spacing:e}")));
        }
        r.spacing = r.number("comb.mode_spacing")?;
        if !(r.spacing > 0.0) {
            return Err(r.err("comb.mode_spacing", "must be positive"));
        }
        r.round_trip = TAU / r.units.to_angular(r.spacing);

        let phases = match r.raw("comb.phases").1 {
            "locked" => Phases::Locked,
            "random" => Phases::Random,
            list => {
                let values = list
                    .split(',')
                    .map(|p| r.number_text("fringe.phase_min", p))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| {
                        r.err(
                            "comb.phases",
                            format!("expected `locked`, `random` or a comma-separated phase list, got `{list}`"),
                        )
                    })?;
                Phases::List(values)
            }
        };

        let cfg = RunConfig {
            units: r.units,
            comb: CombSection {
                n_side_modes: r.count("comb.n_side_modes")?,
                mode_spacing: r.spacing,
                linewidth: r.number("comb.linewidth")?,
                shape: r.parsed("comb.shape")?,
                center: r.number("comb.center")?,
                pump_frequency: r.number("comb.pump_frequency")?,
                phases,
                phase_seed: r.seed("comb.phase_seed")?,
            },
            grid: r.grid("grid")?,
            correlation: CorrelationSection {
                coherence: r.flag("correlation.coherence")?,
                average_resolution: r.optional("correlation.average_resolution", "none")?,
            },
            interferometer: InterferometerSection {
                resolution: r.number("interferometer.resolution")?,
                mode_match: r.number("interferometer.mode_match")?,
                mode_match_decay: r.optional("interferometer.mode_match_decay", "none")?,
                pump_phase: r.optional("interferometer.pump_phase", "auto")?,
                splitter_1: r.number("interferometer.splitter_1")?,
                splitter_2: r.number("interferometer.splitter_2")?,
                mm_per_second: r.optional("interferometer.mm_per_second", "none")?,
            },
            scan: ScanSection {
                delay_min: r.number("scan.delay_min")?,
                delay_max: r.number("scan.delay_max")?,
                points: r.count("scan.points")?,
                dithered: r.flag("scan.dithered")?,
            },
            fringe: FringeSection {
                delay: r.number("fringe.delay")?,
                phase_min: r.number("fringe.phase_min")?,
                phase_max: r.number("fringe.phase_max")?,
                points: r.count("fringe.points")?,
            },
            engineer: EngineerSection {
                target_peak: r.integer("engineer.target_peak")?,
                wideband_shape: r.parsed("engineer.wideband_shape")?,
                wideband_halfwidth: r.optional("engineer.wideband_halfwidth", "auto")?,
                grid: r.grid("engineer")?,
            },
            detector: DetectorSection {
                resolution: r.number("detector.resolution")?,
                coincidence_window: r.number("detector.coincidence_window")?,
                efficiency: r.number("detector.efficiency")?,
                dark_rate: r.number("detector.dark_rate")?,
                jitter: r.parsed("detector.jitter")?,
            },
            mc: McSection {
                events: r.count("mc.events")?,
                pair_rate: r.number("mc.pair_rate")?,
                bin_width: r.number("mc.bin_width")?,
                hist_min: r.number("mc.hist_min")?,
                hist_max: r.number("mc.hist_max")?,
                grid: r.grid("mc")?,
            },
            seed: r.seed("run.seed")?,
        };
        cfg.check_points(&r)?;
        Ok(cfg)
    }

    fn check_points(&self, r: &Resolver) -> Result<(), ConfigError> {
        for (key, n, min) in [
            ("scan.points", self.scan.points, 1),
            ("fringe.points", self.fringe.points, 3),
            ("mc.events", self.mc.events, 1),
        ] {
            if n < min {
                return Err(r.err(key, format!("must be at least {min}, got {n}")));
            }
        }
        if self.scan.delay_max < self.scan.delay_min {
            return Err(r.err("scan.delay_max", "must not be below scan.delay_min"));
        }
        if self.fringe.phase_max <= self.fringe.phase_min {
            return Err(r.err("fringe.phase_max", "must exceed fringe.phase_min"));
        }
        if self.mc.hist_max <= self.mc.hist_min {
            return Err(r.err("mc.hist_max", "must exceed mc.hist_min"));
        }
        Ok(())
    }

    /// Round-trip time `2π/ΔΩ` in seconds.
    pub fn round_trip_time(&self) -> f64 {
        TAU / self.angular(self.comb.mode_spacing)
    }

    /// A frequency from this config in rad/s.
    pub fn angular(&self, value: f64) -> f64 {
        self.units.to_angular(value)
    }

    /// The mode comb, with phases resolved.
    pub fn mode_comb(&self) -> twophoton_core::Result<ModeComb> {
        let c = &self.comb;
        let single = SpectralAmplitude::new(c.shape, self.angular(c.center), self.angular(c.linewidth), 0.0)?;
        let locked = ModeComb::locked(
            c.n_side_modes,
            self.angular(c.mode_spacing),
            self.angular(c.pump_frequency),
            single,
        )?;
        match &c.phases {
            Phases::Locked => Ok(locked),
            Phases::Random => {
                let mut rng = twophoton_core::montecarlo::chunk_rng(c.phase_seed, 0, 0);
                Ok(locked.with_random_phases(&mut rng))
            }
            Phases::List(p) => locked.with_phases(p.clone()),
        }
    }

    /// The resolved configuration as `(key, value)` pairs in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:e}");
        let opt = |x: Option<f64>, word: &str| x.map_or_else(|| word.to_string(), f);
        let c = &self.comb;
        let i = &self.interferometer;
        let phases = match &c.phases {
            Phases::Locked => "locked".to_string(),
            Phases::Random => "random".to_string(),
            Phases::List(p) => p.iter().map(|&x| f(x)).collect::<Vec<_>>().join(", "),
        };
        let values = vec![
            self.units.name().to_string(),
            c.n_side_modes.to_string(),
            f(c.mode_spacing),
            f(c.linewidth),
            c.shape.name().to_string(),
            f(c.center),
            f(c.pump_frequency),
            phases,
            c.phase_seed.to_string(),
            f(self.grid.t_min),
            f(self.grid.t_max),
            self.grid.n_points.to_string(),
            self.correlation.coherence.to_string(),
            opt(self.correlation.average_resolution, "none"),
            f(i.resolution),
            f(i.mode_match),
            opt(i.mode_match_decay, "none"),
            opt(i.pump_phase, "auto"),
            f(i.splitter_1),
            f(i.splitter_2),
            opt(i.mm_per_second, "none"),
            f(self.scan.delay_min),
            f(self.scan.delay_max),
            self.scan.points.to_string(),
            self.scan.dithered.to_string(),
            f(self.fringe.delay),
            f(self.fringe.phase_min),
            f(self.fringe.phase_max),
            self.fringe.points.to_string(),
            self.engineer.target_peak.to_string(),
            self.engineer.wideband_shape.name().to_string(),
            opt(self.engineer.wideband_halfwidth, "auto"),
            f(self.engineer.grid.t_min),
            f(self.engineer.grid.t_max),
            self.engineer.grid.n_points.to_string(),
            f(self.detector.resolution),
            f(self.detector.coincidence_window),
            f(self.detector.efficiency),
            f(self.detector.dark_rate),
            self.detector.jitter.name().to_string(),
            self.mc.events.to_string(),
            f(self.mc.pair_rate),
            f(self.mc.bin_width),
            f(self.mc.hist_min),
            f(self.mc.hist_max),
            f(self.mc.grid.t_min),
            f(self.mc.grid.t_max),
            self.mc.grid.n_points.to_string(),
            self.seed.to_string(),
        ];
        KEYS.iter().map(|(k, _)| *k).zip(values).collect()
    }

    /// `#@ key = value` lines for an output header.
    pub fn header(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("#@ {k} = {v}\n"))
            .collect()
    }
}
