//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! x_r = 5e-3
//! num_interferers = 700
//! seeds = 0,1,2
//! sweep.axis = u
//! sweep.values = 1e-5, 2e-5, 3e-5
//! schedule.u = 1e-5 0.18 0.02 0.005
//! ```
//!
//! Unspecified keys keep their defaults; unknown keys are rejected.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytic::{ChannelParams, NoiseStats};
use crate::control::{GainSchedule, PidGains, DEFAULT_INTEGRAL_LIMIT, DEFAULT_SETPOINT_WINDOW};
use crate::detector::detectors;
use crate::error::{invalid, Error, Result};
use crate::link::CskScheme;
use crate::particles::{propagators, ParticleConfig, SimClock, DEFAULT_PROPAGATOR};

/// Parameters that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepAxis {
    NumInterferers,
    N0,
    U,
    Xr,
    D0,
    KBind,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::NumInterferers,
        SweepAxis::N0,
        SweepAxis::U,
        SweepAxis::Xr,
        SweepAxis::D0,
        SweepAxis::KBind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::NumInterferers => "num_interferers",
            SweepAxis::N0 => "n0",
            SweepAxis::U => "u",
            SweepAxis::Xr => "x_r",
            SweepAxis::D0 => "d0",
            SweepAxis::KBind => "k_bind",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, SweepAxis::NumInterferers | SweepAxis::N0)
    }

    /// Ten-point ranges of the reference study; six points for interferers.
    pub fn default_values(self) -> Vec<f64> {
        let decade = |unit: f64| (1..=10).map(|k| f64::from(k) * unit).collect();
        match self {
            SweepAxis::NumInterferers => vec![100.0, 400.0, 700.0, 1000.0, 1300.0, 1600.0],
            SweepAxis::N0 => (1..=9).map(|k| f64::from(k) * 100.0).collect(),
            SweepAxis::U => decade(1e-5),
            SweepAxis::Xr => decade(1e-3),
            SweepAxis::D0 => decade(1e-11),
            SweepAxis::KBind => decade(1e-17),
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        if self.is_count() && !(value >= 0.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
            return Err(invalid(format!("{} needs a non-negative integer, got {value}", self.name())));
        }
        let mut c = cfg.clone();
        match self {
            SweepAxis::NumInterferers => c.num_interferers = value as u32,
            SweepAxis::N0 => c.scheme.n0 = value as u32,
            SweepAxis::U => c.channel.u = value,
            SweepAxis::Xr => c.channel.x_r = value,
            SweepAxis::D0 => c.channel.d0 = value,
            SweepAxis::KBind => c.channel.k_bind = value,
        }
        Ok(c)
    }

    /// Current value of this parameter in `cfg`.
    pub fn value_in(self, cfg: &ExperimentConfig) -> f64 {
        match self {
            SweepAxis::NumInterferers => f64::from(cfg.num_interferers),
            SweepAxis::N0 => f64::from(cfg.scheme.n0),
            SweepAxis::U => cfg.channel.u,
            SweepAxis::Xr => cfg.channel.x_r,
            SweepAxis::D0 => cfg.channel.d0,
            SweepAxis::KBind => cfg.channel.k_bind,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| Error::UnknownStrategy {
            kind: "sweep axis",
            name: s.to_string(),
            known: SweepAxis::ALL.map(SweepAxis::name).join(", "),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Result<Self> {
        let s = Self { axis, values };
        s.validate()?;
        Ok(s)
    }

    /// Values must be nonempty, finite and strictly monotone.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid(format!("sweep over {} has no values", self.axis)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep values must be finite"));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(invalid(format!("sweep values for {} must be strictly monotone", self.axis)));
        }
        Ok(())
    }
}

/// How interferers enter the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfererMode {
    /// Released with the information molecules at the start of each symbol.
    #[default]
    PerSymbol,
    /// Released evenly spread over each symbol interval.
    Trickle,
}

impl InterfererMode {
    pub fn name(self) -> &'static str {
        match self {
            InterfererMode::PerSymbol => "per_symbol",
            InterfererMode::Trickle => "trickle",
        }
    }
}

impl FromStr for InterfererMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_symbol" => Ok(InterfererMode::PerSymbol),
            "trickle" => Ok(InterfererMode::Trickle),
            _ => Err(Error::UnknownStrategy {
                kind: "interferer mode",
                name: s.to_string(),
                known: "per_symbol, trickle".into(),
            }),
        }
    }
}

/// A fully specified, seeded scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub scheme: CskScheme,
    pub num_symbols: usize,
    pub num_interferers: u32,
    pub gains: PidGains,
    /// Per-axis overrides of the built-in gain schedules.
    pub schedules: BTreeMap<SweepAxis, GainSchedule>,
    /// Given interference statistics; estimated by a calibration run when absent.
    pub noise: Option<NoiseStats>,
    pub calibration_symbols: usize,
    pub dt: Option<f64>,
    pub symbol_period: Option<f64>,
    pub i_clamp: f64,
    pub setpoint_window: usize,
    pub seeds: Vec<u64>,
    pub detectors: Vec<String>,
    pub sweep: Option<SweepSpec>,
    pub propagator: String,
    pub interferer_mode: InterfererMode,
    pub capture_depth: Option<f64>,
    pub drain_margin: Option<f64>,
    /// Diffusion coefficient of the analytic model; defaults to `d0`.
    pub d_eff: Option<f64>,
}

pub const DEFAULT_SEEDS: u64 = 10;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            scheme: CskScheme::default(),
            num_symbols: 100,
            num_interferers: 700,
            gains: PidGains::BASELINE,
            schedules: BTreeMap::new(),
            noise: None,
            calibration_symbols: 20,
            dt: None,
            symbol_period: None,
            i_clamp: DEFAULT_INTEGRAL_LIMIT,
            setpoint_window: DEFAULT_SETPOINT_WINDOW,
            seeds: (0..DEFAULT_SEEDS).collect(),
            detectors: vec!["artrx".into(), "optimal".into()],
            sweep: None,
            propagator: DEFAULT_PROPAGATOR.into(),
            interferer_mode: InterfererMode::PerSymbol,
            capture_depth: None,
            drain_margin: None,
            d_eff: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.scheme.validate()?;
        self.gains.validate()?;
        if self.num_symbols == 0 {
            return Err(invalid("num_symbols must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        if self.detectors.is_empty() {
            return Err(invalid("at least one detector is required"));
        }
        let reg = detectors();
        let mut seen = HashSet::new();
        for d in &self.detectors {
            reg.get(d)?;
            if !seen.insert(d) {
                return Err(invalid(format!("detector `{d}` listed twice")));
            }
        }
        propagators().get(&self.propagator)?;
        if !(self.i_clamp >= 0.0) {
            return Err(invalid(format!("i_clamp must be >= 0, got {}", self.i_clamp)));
        }
        if self.setpoint_window == 0 {
            return Err(invalid("setpoint_window must be >= 1"));
        }
        if let Some(n) = &self.noise {
            if !(n.var_i > 0.0) {
                return Err(invalid(format!("var_i must be > 0, got {}", n.var_i)));
            }
        } else if self.calibration_symbols == 0 {
            return Err(invalid("calibration_symbols must be >= 1 when mu_i/var_i are not given"));
        }
        if let Some(d) = self.d_eff {
            if !(d > 0.0) {
                return Err(invalid(format!("d_eff must be > 0, got {d}")));
            }
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        self.particle_config().validate()?;
        self.clock()?;
        Ok(())
    }

    pub fn d_eff(&self) -> f64 {
        self.d_eff.unwrap_or(self.channel.d0)
    }

    pub fn particle_config(&self) -> ParticleConfig {
        let mut p = ParticleConfig::for_channel(self.channel.clone());
        if let Some(c) = self.capture_depth {
            p.capture_depth = c;
        }
        if let Some(m) = self.drain_margin {
            p.drain_margin = m;
        }
        p
    }

    /// With only `dt` given, the default symbol period is rounded to a
    /// whole number of steps.
    pub fn clock(&self) -> Result<SimClock> {
        let ch = &self.channel;
        match (self.dt, self.symbol_period) {
            (Some(dt), Some(ts)) => SimClock::new(dt, ts),
            (None, Some(ts)) => SimClock::with_period(ch, ch.d0, ts),
            (Some(dt), None) => {
                let ts = 1.5 * ch.peak_arrival_time()?;
                SimClock::new(dt, (ts / dt).round().max(1.0) * dt)
            }
            (None, None) => SimClock::for_channel(ch, ch.d0),
        }
    }

    /// Gain schedule for `axis`: the configured one, else the built-in one.
    pub fn schedule_for(&self, axis: SweepAxis) -> Option<GainSchedule> {
        self.schedules
            .get(&axis)
            .cloned()
            .or_else(|| crate::control::builtin_schedule(axis.name()))
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}

struct Located<'a> {
    path: &'a Path,
    line: usize,
    key: &'a str,
}

impl Located<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Config {
            path: PathBuf::from(self.path),
            line: self.line,
            key: self.key.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, value: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        value.parse::<T>().map_err(|e| self.err(format!("cannot parse `{value}`: {e}")))
    }

    fn count(&self, value: &str) -> Result<u32> {
        let v: i64 = self.parse(value)?;
        u32::try_from(v).map_err(|_| self.err(format!("must be a non-negative integer, got {v}")))
    }

    fn list<T: FromStr>(&self, value: &str) -> Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        split_list(value).map(|v| self.parse(v)).collect()
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

/// Seed syntax shared with the CLI: a bare integer `n` means seeds
/// `0..n`; a comma or space separated list is taken literally.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let items: Vec<&str> = split_list(value).collect();
    let bad = |s: &str| invalid(format!("bad seed `{s}`"));
    match items.as_slice() {
        [] => Err(invalid("empty seed list")),
        [n] if !value.contains(',') => {
            let n: u64 = n.parse().map_err(|_| bad(n))?;
            Ok((0..n).collect())
        }
        _ => items.iter().map(|s| s.parse().map_err(|_| bad(s))).collect(),
    }
}

/// Parses config text; `path` is used for diagnostics only.
pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut schedule_rows: BTreeMap<SweepAxis, Vec<(f64, PidGains)>> = BTreeMap::new();
    let mut sweep_axis: Option<SweepAxis> = None;
    let mut sweep_values: Option<Vec<f64>> = None;
    let mut mu_i = None;
    let mut var_i = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                path: path.into(),
                line: idx + 1,
                key: line.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let at = Located { path, line: idx + 1, key };
        if !key.starts_with("schedule.") && !seen.insert(key.to_string()) {
            return Err(at.err("duplicate key"));
        }
        let ch = &mut cfg.channel;
        match key {
            "h_ch" => ch.h_ch = at.parse(value)?,
            "w_ch" => ch.w_ch = at.parse(value)?,
            "l_ch" => ch.l_ch = at.parse(value)?,
            "u" => ch.u = at.parse(value)?,
            "x_r" => ch.x_r = at.parse(value)?,
            "d0" => ch.d0 = at.parse(value)?,
            "k_bind" => ch.k_bind = at.parse(value)?,
            "k_unbind" => ch.k_unbind = at.parse(value)?,
            "n_r" => {
                let n = at.count(value)?;
                if n == 0 {
                    return Err(at.err("n_r must be >= 1"));
                }
                ch.n_r = n;
            }
            "l_gr" => ch.l_gr = at.parse(value)?,
            "w_gr" => ch.w_gr = at.parse(value)?,
            "kp" => cfg.gains.kp = at.parse(value)?,
            "ki" => cfg.gains.ki = at.parse(value)?,
            "kd" => cfg.gains.kd = at.parse(value)?,
            "num_symbols" => cfg.num_symbols = at.count(value)? as usize,
            "n1" => cfg.scheme.n1 = at.count(value)?,
            "n0" => cfg.scheme.n0 = at.count(value)?,
            "num_interferers" => cfg.num_interferers = at.count(value)?,
            "dt" => cfg.dt = Some(at.parse(value)?),
            "symbol_period" => cfg.symbol_period = Some(at.parse(value)?),
            "i_clamp" => cfg.i_clamp = at.parse(value)?,
            "setpoint_window" => cfg.setpoint_window = at.count(value)? as usize,
            "seeds" => cfg.seeds = parse_seeds(value).map_err(|e| at.err(e.to_string()))?,
            "sweep.axis" => sweep_axis = Some(at.parse(value)?),
            "sweep.values" => sweep_values = Some(at.list(value)?),
            "detector" => cfg.detectors = parse_detectors(value),
            "propagator" => cfg.propagator = value.to_string(),
            "interferer_mode" => cfg.interferer_mode = at.parse(value)?,
            "capture_depth" => cfg.capture_depth = Some(at.parse(value)?),
            "drain_margin" => cfg.drain_margin = Some(at.parse(value)?),
            "d_eff" => cfg.d_eff = Some(at.parse(value)?),
            "calibration_symbols" => cfg.calibration_symbols = at.count(value)? as usize,
            "mu_i" => mu_i = Some(at.parse::<f64>(value)?),
            "var_i" => var_i = Some(at.parse::<f64>(value)?),
            _ => {
                let Some(axis) = key.strip_prefix("schedule.") else {
                    return Err(at.err("unknown key"));
                };
                let axis: SweepAxis = axis.parse().map_err(|e: Error| at.err(e.to_string()))?;
                let nums: Vec<f64> = at.list(value)?;
                let [k, kp, ki, kd] = nums[..] else {
                    return Err(at.err("expected `value kp ki kd`"));
                };
                let g = PidGains::new(kp, ki, kd).map_err(|e| at.err(e.to_string()))?;
                schedule_rows.entry(axis).or_default().push((k, g));
            }
        }
    }

    for (axis, rows) in schedule_rows {
        cfg.schedules.insert(axis, GainSchedule::from_unsorted(axis.name(), rows)?);
    }
    cfg.noise = match (mu_i, var_i) {
        (Some(mu_i), Some(var_i)) => Some(NoiseStats { mu_i, var_i }),
        (None, None) => None,
        _ => return Err(invalid("mu_i and var_i must be given together")),
    };
    cfg.sweep = match (sweep_axis, sweep_values) {
        (Some(axis), values) => Some(SweepSpec::new(axis, values.unwrap_or_else(|| axis.default_values()))?),
        (None, Some(_)) => return Err(invalid("sweep.values given without sweep.axis")),
        (None, None) => None,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `both` expands to the adaptive and optimal detectors; otherwise a
/// comma separated list of registered names.
pub fn parse_detectors(value: &str) -> Vec<String> {
    if value.trim() == "both" {
        return vec!["artrx".into(), "optimal".into()];
    }
    split_list(value).map(str::to_string).collect()
}
