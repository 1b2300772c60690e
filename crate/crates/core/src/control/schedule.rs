use crate::error::{invalid, Error, Result};

use super::PidGains;

/// Gain sets keyed by one scenario parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSchedule {
    pub axis: String,
    entries: Vec<(f64, PidGains)>,
}

impl GainSchedule {
    /// Keys must be finite and strictly increasing.
    pub fn new(axis: impl Into<String>, entries: Vec<(f64, PidGains)>) -> Result<Self> {
        let axis = axis.into();
        if entries.is_empty() {
            return Err(Error::EmptySchedule(axis));
        }
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid(format!(
                    "schedule `{axis}` keys must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for (k, g) in &entries {
            if !k.is_finite() {
                return Err(invalid(format!("schedule `{axis}` has non-finite key {k}")));
            }
            g.validate()?;
        }
        Ok(Self { axis, entries })
    }

    pub fn entries(&self) -> &[(f64, PidGains)] {
        &self.entries
    }

    /// Builds a schedule from unordered entries, sorting by key.
    pub fn from_unsorted(axis: impl Into<String>, mut entries: Vec<(f64, PidGains)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::new(axis, entries)
    }
}

/// Gains of the entry whose key is nearest to `value`; halfway ties go to
/// the lower key.
pub fn schedule_gains(sched: &GainSchedule, value: f64) -> Result<PidGains> {
    let mut best: Option<(f64, PidGains)> = None;
    for &(k, g) in &sched.entries {
        let d = (k - value).abs();
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, g)),
        }
    }
    best.map(|(_, g)| g).ok_or_else(|| Error::EmptySchedule(sched.axis.clone()))
}

const fn g(kp: f64, ki: f64, kd: f64) -> PidGains {
    PidGains { kp, ki, kd }
}

/// Axes that ship with a tuned schedule.
pub const SCHEDULED_AXES: [&str; 4] = ["u", "x_r", "d0", "k_bind"];

/// Tuned schedule for one of [`SCHEDULED_AXES`].
pub fn builtin_schedule(axis: &str) -> Option<GainSchedule> {
    let entries: Vec<(f64, PidGains)> = match axis {
        "u" => vec![
            (1e-5, g(0.18, 0.02, 0.005)),
            (2e-5, g(0.15, 0.02, 0.01)),
            (3e-5, g(0.15, 0.02, 0.01)),
            (4e-5, g(0.15, 0.02, 0.01)),
            (5e-5, g(0.13, 0.025, 0.015)),
            (6e-5, g(0.13, 0.025, 0.015)),
            (7e-5, g(0.13, 0.025, 0.015)),
            (8e-5, g(0.12, 0.03, 0.02)),
            (9e-5, g(0.12, 0.03, 0.02)),
            (10e-5, g(0.15, 0.02, 0.01)),
        ],
        "x_r" => vec![
            (1e-3, g(0.18, 0.02, 0.005)),
            (2e-3, g(0.13, 0.025, 0.01)),
            (3e-3, g(0.13, 0.04, 0.01)),
            (4e-3, g(0.13, 0.03, 0.015)),
            (5e-3, g(0.12, 0.045, 0.005)),
            (6e-3, g(0.13, 0.026, 0.01)),
            (7e-3, g(0.132, 0.04, 0.012)),
            (8e-3, g(0.13, 0.02, 0.01)),
            (9e-3, g(0.16, 0.02, 0.008)),
            (10e-3, g(0.122, 0.012, 0.006)),
        ],
        "d0" => vec![
            (1e-11, g(0.18, 0.02, 0.006)),
            (2e-11, g(0.12, 0.01, 0.005)),
            (3e-11, g(0.12, 0.01, 0.005)),
            (4e-11, g(0.12, 0.01, 0.005)),
            (5e-11, g(0.12, 0.01, 0.005)),
            (6e-11, g(0.14, 0.012, 0.005)),
            (7e-11, g(0.12, 0.01, 0.006)),
            (8e-11, g(0.14, 0.011, 0.005)),
            (9e-11, g(0.12, 0.01, 0.005)),
            (10e-11, g(0.13, 0.012, 0.005)),
        ],
        "k_bind" => vec![
            (1e-17, g(0.16, 0.01, 0.006)),
            (2e-17, g(0.18, 0.02, 0.006)),
            (3e-17, g(0.15, 0.012, 0.006)),
            (4e-17, g(0.16, 0.011, 0.005)),
            (5e-17, g(0.12, 0.01, 0.005)),
            (6e-17, g(0.14, 0.0115, 0.005)),
            (7e-17, g(0.22, 0.014, 0.006)),
            (8e-17, g(0.146, 0.011, 0.007)),
            (9e-17, g(0.16, 0.012, 0.006)),
            (10e-17, g(0.163, 0.011, 0.007)),
        ],
        _ => return None,
    };
    Some(GainSchedule::new(axis, entries).expect("built-in schedules are ordered"))
}
