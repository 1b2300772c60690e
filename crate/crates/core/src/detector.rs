//! Per-symbol decision rules selectable by name.

use crate::analytic::{initial_threshold, optimal_threshold, BitModel, NoiseStats};
use crate::control::{PidGains, PidState, Setpoint, ThresholdController};
use crate::error::Result;
use crate::link::detect;
use crate::registry::Registry;

/// Decides one bit per observed peak.
pub trait Detector: Send {
    fn name(&self) -> &'static str;

    /// Returns the decoded bit and the threshold it was compared against.
    fn decide(&mut self, y: f64) -> (u8, f64);
}

/// Everything a detector may be built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorContext {
    pub model: BitModel,
    pub noise: NoiseStats,
    pub gains: PidGains,
    pub i_clamp: f64,
    pub setpoint_window: usize,
    pub n_r: u32,
}

impl DetectorContext {
    /// Starting threshold of the adaptive loop.
    pub fn gamma0(&self) -> Result<f64> {
        initial_threshold(self.n_r, self.model.p0, self.model.p1, &self.noise)
    }

    /// Minimum-error static threshold of the interference-free model.
    pub fn lambda(&self) -> Result<f64> {
        optimal_threshold(&self.model.stats)
    }
}

/// Adaptive PID threshold. The threshold is updated from `y` first and the
/// symbol is then decided against the updated value.
pub struct ArtRx {
    ctl: ThresholdController,
}

impl ArtRx {
    pub fn new(ctx: &DetectorContext) -> Result<Self> {
        ctx.gains.validate()?;
        let state = PidState::symmetric(ctx.i_clamp)?;
        let sp = Setpoint::new(ctx.model.stats.midpoint(), ctx.setpoint_window)?;
        Ok(Self {
            ctl: ThresholdController::new(ctx.gains, state, sp, ctx.gamma0()?, ctx.n_r),
        })
    }
}

impl Detector for ArtRx {
    fn name(&self) -> &'static str {
        "artrx"
    }

    fn decide(&mut self, y: f64) -> (u8, f64) {
        let theta = self.ctl.observe(y);
        (detect(y, theta), theta)
    }
}

/// Fixed threshold.
pub struct Static {
    name: &'static str,
    theta: f64,
}

impl Static {
    pub fn new(name: &'static str, theta: f64) -> Self {
        Self { name, theta }
    }
}

impl Detector for Static {
    fn name(&self) -> &'static str {
        self.name
    }

    fn decide(&mut self, y: f64) -> (u8, f64) {
        (detect(y, self.theta), self.theta)
    }
}

pub type DetectorFactory = fn(&DetectorContext) -> Result<Box<dyn Detector>>;

/// `artrx`: adaptive PID threshold starting at γ₀.
/// `optimal`: static two-Gaussian minimum-error threshold.
/// `fixed`: static threshold held at γ₀.
pub fn detectors() -> Registry<DetectorFactory> {
    let mut reg: Registry<DetectorFactory> = Registry::new("detector");
    reg.register("artrx", |ctx| Ok(Box::new(ArtRx::new(ctx)?)));
    reg.register("optimal", |ctx| Ok(Box::new(Static::new("optimal", ctx.lambda()?))));
    reg.register("fixed", |ctx| Ok(Box::new(Static::new("fixed", ctx.gamma0()?.clamp(0.0, f64::from(ctx.n_r))))));
    reg
}
