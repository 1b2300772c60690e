use std::collections::VecDeque;

use crate::error::{invalid, Result};

/// Proportional, integral and derivative gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    /// Gains used when the channel is fixed and only interference varies.
    pub const BASELINE: PidGains = PidGains {
        kp: 0.18,
        ki: 0.02,
        kd: 0.005,
    };

    pub const ZERO: PidGains = PidGains {
        kp: 0.0,
        ki: 0.0,
        kd: 0.0,
    };

    pub fn new(kp: f64, ki: f64, kd: f64) -> Result<Self> {
        let g = Self { kp, ki, kd };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for PidGains {
    fn default() -> Self {
        Self::BASELINE
    }
}

/// Integral anti-windup limit used unless configured otherwise.
pub const DEFAULT_INTEGRAL_LIMIT: f64 = 100.0;

/// Controller memory carried between symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub i_min: f64,
    pub i_max: f64,
}

impl PidState {
    pub fn new(i_min: f64, i_max: f64) -> Result<Self> {
        if !(i_min <= i_max) || i_min.is_nan() || i_max.is_nan() {
            return Err(invalid(format!("integral clamp needs i_min <= i_max ({i_min}, {i_max})")));
        }
        Ok(Self {
            integral: 0.0_f64.clamp(i_min, i_max),
            prev_error: 0.0,
            i_min,
            i_max,
        })
    }

    /// Symmetric clamp `[-limit, limit]`.
    pub fn symmetric(limit: f64) -> Result<Self> {
        Self::new(-limit, limit)
    }
}

impl Default for PidState {
    fn default() -> Self {
        Self {
            integral: 0.0,
            prev_error: 0.0,
            i_min: -DEFAULT_INTEGRAL_LIMIT,
            i_max: DEFAULT_INTEGRAL_LIMIT,
        }
    }
}

/// Deviation of the observed peak from the setpoint.
pub fn compute_error(y: f64, r: f64) -> f64 {
    y - r
}

/// One controller step. The accumulator is clamped before it is scaled by
/// `ki`, so windup never reaches the control signal.
pub fn pid_update(state: &PidState, gains: &PidGains, e: f64, dt: f64) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let integral = (state.integral + e * dt).clamp(state.i_min, state.i_max);
    let derivative = (e - state.prev_error) / dt;
    let u = gains.kp * e + gains.ki * integral + gains.kd * derivative;
    let next = PidState {
        integral,
        prev_error: e,
        ..*state
    };
    (u, next)
}

/// Applies the control signal and keeps the threshold in `[0, n_r]`.
pub fn update_threshold(theta: f64, u: f64, n_r: u32) -> f64 {
    (theta + u).clamp(0.0, f64::from(n_r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    pub r: f64,
    pub window: usize,
}

pub const DEFAULT_SETPOINT_WINDOW: usize = 10;

impl Setpoint {
    pub fn new(r: f64, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(invalid("setpoint window must be >= 1"));
        }
        Ok(Self { r, window })
    }
}

/// Moving average of the last `window` observations. An empty history
/// leaves the setpoint where it is.
pub fn update_setpoint(sp: &Setpoint, y_history: &[f64]) -> Setpoint {
    if y_history.is_empty() {
        return *sp;
    }
    let tail = &y_history[y_history.len().saturating_sub(sp.window)..];
    Setpoint {
        r: tail.iter().sum::<f64>() / tail.len() as f64,
        window: sp.window,
    }
}

/// The adaptive threshold loop: error against a moving-average setpoint,
/// PID update, threshold step.
///
/// One call to [`ThresholdController::observe`] per symbol; the returned
/// threshold is the one the current symbol is decided against.
#[derive(Debug, Clone)]
pub struct ThresholdController {
    gains: PidGains,
    state: PidState,
    setpoint: Setpoint,
    history: VecDeque<f64>,
    theta: f64,
    n_r: u32,
    dt: f64,
}

impl ThresholdController {
    pub fn new(gains: PidGains, state: PidState, setpoint: Setpoint, theta0: f64, n_r: u32) -> Self {
        Self {
            gains,
            state,
            setpoint,
            history: VecDeque::with_capacity(setpoint.window),
            theta: theta0.clamp(0.0, f64::from(n_r)),
            n_r,
            dt: 1.0,
        }
    }

    /// Controller time step. Defaults to one symbol.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.theta
    }

    pub fn state(&self) -> &PidState {
        &self.state
    }

    pub fn setpoint(&self) -> &Setpoint {
        &self.setpoint
    }

    /// Feeds one peak observation and returns the updated threshold.
    pub fn observe(&mut self, y: f64) -> f64 {
        let e = compute_error(y, self.setpoint.r);
        let (u, next) = pid_update(&self.state, &self.gains, e, self.dt);
        self.state = next;
        self.theta = update_threshold(self.theta, u, self.n_r);

        if self.history.len() == self.setpoint.window {
            self.history.pop_front();
        }
        self.history.push_back(y);
        self.setpoint = update_setpoint(&self.setpoint, self.history.make_contiguous());
        self.theta
    }
}
