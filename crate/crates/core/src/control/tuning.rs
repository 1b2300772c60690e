use crate::error::{invalid, Error, Result};

use super::PidGains;

/// Rectangle-rule integral of the squared error.
pub fn performance_index(errors: &[f64], dt: f64) -> f64 {
    errors.iter().map(|e| e * e).sum::<f64>() * dt
}

/// Closed loop under proportional-only control. Returns the error trace
/// for the given `kp`; must be deterministic.
pub trait Plant {
    fn respond(&mut self, kp: f64) -> Vec<f64>;
}

impl<F: FnMut(f64) -> Vec<f64>> Plant for F {
    fn respond(&mut self, kp: f64) -> Vec<f64> {
        self(kp)
    }
}

/// Classic ultimate-gain rule.
pub fn zn_gains(ku: f64, tu: f64) -> PidGains {
    PidGains {
        kp: 0.6 * ku,
        ki: 1.2 * ku / tu,
        kd: 0.075 * ku * tu,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    /// Period in samples.
    pub period: f64,
    /// Amplitude ratio over one period.
    pub decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub ku: f64,
    pub tu: f64,
    pub gains: PidGains,
}

/// Ultimate-gain search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ZieglerNichols {
    pub kp_start: f64,
    pub kp_max: f64,
    /// Geometric grid ratio.
    pub ratio: f64,
    pub min_alternations: usize,
    /// Accepted per-period amplitude ratio is `[1 - tol, 1 + tol]`.
    pub decay_tolerance: f64,
    /// Largest coefficient of variation of the half-periods.
    pub max_period_cv: f64,
    /// Leading fraction of every trace discarded as transient.
    pub transient: f64,
    /// Sample spacing used to report `T_u`.
    pub dt: f64,
}

impl Default for ZieglerNichols {
    fn default() -> Self {
        Self {
            kp_start: 1e-3,
            kp_max: 1e3,
            ratio: 1.02,
            min_alternations: 4,
            decay_tolerance: 0.1,
            max_period_cv: 0.25,
            transient: 0.25,
            dt: 1.0,
        }
    }
}

impl ZieglerNichols {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp_start > 0.0 && self.kp_max > self.kp_start && self.ratio > 1.0) {
            return Err(invalid("need 0 < kp_start < kp_max and ratio > 1"));
        }
        if !(0.0..1.0).contains(&self.transient) || !(self.dt > 0.0) {
            return Err(invalid("transient must be in [0, 1) and dt > 0"));
        }
        Ok(())
    }

    /// Looks for sustained oscillation in an error trace.
    pub fn detect_oscillation(&self, trace: &[f64]) -> Option<Oscillation> {
        let start = (trace.len() as f64 * self.transient) as usize;
        let w = &trace[start..];
        if w.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mean = w.iter().sum::<f64>() / w.len().max(1) as f64;
        let scale = w.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return None;
        }

        // Sign changes around the window mean, skipping near-zero samples.
        let mut crossings = Vec::new();
        let mut last: Option<bool> = None;
        for (i, &v) in w.iter().enumerate() {
            let d = v - mean;
            if d.abs() <= 1e-12 * scale {
                continue;
            }
            let pos = d > 0.0;
            if last.is_some_and(|p| p != pos) {
                crossings.push(i);
            }
            last = Some(pos);
        }
        if crossings.len() < self.min_alternations {
            return None;
        }

        let halves: Vec<f64> = crossings.windows(2).map(|c| (c[1] - c[0]) as f64).collect();
        let h_mean = halves.iter().sum::<f64>() / halves.len() as f64;
        let h_var = halves.iter().map(|h| (h - h_mean).powi(2)).sum::<f64>() / halves.len() as f64;
        if h_var.sqrt() / h_mean > self.max_period_cv {
            return None;
        }

        // One peak per complete half-wave.
        let peaks: Vec<f64> = crossings
            .windows(2)
            .map(|c| w[c[0]..c[1]].iter().map(|v| (v - mean).abs()).fold(0.0, f64::max))
            .collect();
        if peaks.len() < 3 {
            return None;
        }
        let logs: Vec<f64> = peaks.windows(3).map(|p| (p[2] / p[0]).ln()).collect();
        let decay = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        Some(Oscillation {
            period: 2.0 * h_mean,
            decay,
        })
    }

    /// Sweeps `kp` upward and keeps the grid point whose oscillation is
    /// closest to constant amplitude.
    pub fn tune<P: Plant + ?Sized>(&self, plant: &mut P) -> Result<Tuning> {
        self.validate()?;
        let tol = self.decay_tolerance;
        let mut best: Option<(f64, f64, Oscillation)> = None;
        let mut kp = self.kp_start;
        while kp <= self.kp_max {
            let trace = plant.respond(kp);
            match self.detect_oscillation(&trace) {
                Some(osc) if (osc.decay - 1.0).abs() <= tol => {
                    let miss = osc.decay.ln().abs();
                    if best.as_ref().is_none_or(|b| miss < b.0) {
                        best = Some((miss, kp, osc));
                    }
                }
                Some(osc) if osc.decay > 1.0 + tol && best.is_some() => break,
                None if best.is_some() && trace.iter().any(|v| !v.is_finite()) => break,
                _ => {}
            }
            kp *= self.ratio;
        }
        let (_, ku, osc) = best.ok_or_else(|| {
            Error::Tuning(format!("no sustained oscillation for kp in [{}, {}]", self.kp_start, self.kp_max))
        })?;
        let tu = osc.period * self.dt;
        Ok(Tuning {
            ku,
            tu,
            gains: zn_gains(ku, tu),
        })
    }
}
