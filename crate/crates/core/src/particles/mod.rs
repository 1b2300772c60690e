//! Stochastic particle channel.
//!
//! Molecules are released at the channel inlet, carried by plug flow along
//! `x`, diffuse in all three axes with reflecting side walls, and bind to a
//! patch of receptors on the floor (`z = 0`) centred at `x_r`. Two engines
//! implement [`Propagator`]: `brute` steps every particle every timestep,
//! `farfield` advances particles that cannot reach the patch in exact
//! multi-step jumps and only steps the ones near it.

mod brute;
mod farfield;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analytic::ChannelParams;
use crate::error::{invalid, Result};
use crate::registry::Registry;

pub use brute::BruteForce;
pub use farfield::FarField;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    Information,
    Interferer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    Free,
    Bound(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: [f64; 3],
    pub species: Species,
    pub state: Binding,
}

/// Timestep bookkeeping for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimClock {
    pub dt: f64,
    pub t: f64,
    pub symbol_period: f64,
    steps_per_symbol: u64,
}

impl SimClock {
    /// `symbol_period` must be an integer multiple of `dt` (to 1e-9 relative).
    pub fn new(dt: f64, symbol_period: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(symbol_period > 0.0 && symbol_period.is_finite()) {
            return Err(invalid(format!(
                "clock needs dt > 0 and symbol_period > 0 (dt = {dt}, symbol_period = {symbol_period})"
            )));
        }
        let steps = (symbol_period / dt).round();
        if steps < 1.0 || (steps * dt - symbol_period).abs() > 1e-9 * symbol_period {
            return Err(invalid(format!(
                "symbol_period {symbol_period} is not an integer multiple of dt {dt}"
            )));
        }
        Ok(Self {
            dt,
            t: 0.0,
            symbol_period,
            steps_per_symbol: steps as u64,
        })
    }

    /// Default clock for a channel: `T_s = 1.5 x_r/u` and
    /// `dt = min(0.05 min(T_s, h²/2D), 0.1)`, with `dt` shrunk slightly so
    /// that it divides `T_s`.
    pub fn for_channel(ch: &ChannelParams, diffusion: f64) -> Result<Self> {
        let symbol_period = 1.5 * ch.peak_arrival_time()?;
        Self::with_period(ch, diffusion, symbol_period)
    }

    pub fn with_period(ch: &ChannelParams, diffusion: f64, symbol_period: f64) -> Result<Self> {
        let mixing = if diffusion > 0.0 {
            ch.h_ch * ch.h_ch / (2.0 * diffusion)
        } else {
            f64::INFINITY
        };
        let target = (0.05 * symbol_period.min(mixing)).min(0.1);
        let steps = (symbol_period / target).ceil().max(1.0);
        Self::new(symbol_period / steps, symbol_period)
    }

    pub fn steps_per_symbol(&self) -> u64 {
        self.steps_per_symbol
    }

    pub(crate) fn advance(&mut self) {
        self.t += self.dt;
    }
}

/// Physical setup shared by both engines.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    pub channel: ChannelParams,
    /// Diffusion coefficient of both species (m²/s).
    pub diffusion: f64,
    /// Thickness of the binding layer above the receptor patch (m).
    pub capture_depth: f64,
    /// Free particles further than this past `x_r` are discarded (m).
    pub drain_margin: f64,
}

impl ParticleConfig {
    /// Capture layer spans the full channel height; drain margin is `10 l_gr`.
    pub fn for_channel(channel: ChannelParams) -> Self {
        Self {
            diffusion: channel.d0,
            capture_depth: channel.h_ch,
            drain_margin: 10.0 * channel.l_gr,
            channel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(invalid(format!("diffusion must be >= 0, got {}", self.diffusion)));
        }
        if !(self.capture_depth > 0.0 && self.capture_depth <= self.channel.h_ch) {
            return Err(invalid(format!(
                "capture_depth must lie in (0, h_ch], got {}",
                self.capture_depth
            )));
        }
        if !(self.drain_margin > 0.0) {
            return Err(invalid(format!("drain_margin must be > 0, got {}", self.drain_margin)));
        }
        Ok(())
    }

    /// Extent of the simulated channel along the flow.
    pub fn x_extent(&self) -> f64 {
        self.channel.l_ch.max(self.channel.x_r + self.drain_margin)
    }

    pub fn drain_limit(&self) -> f64 {
        self.channel.x_r + self.drain_margin
    }

    pub(crate) fn patch(&self) -> Patch {
        let ch = &self.channel;
        let y_lo = 0.5 * (ch.w_ch - ch.w_gr);
        Patch {
            x_lo: ch.x_r - 0.5 * ch.l_gr,
            x_hi: ch.x_r + 0.5 * ch.l_gr,
            y_lo,
            y_hi: y_lo + ch.w_gr,
            depth: self.capture_depth,
        }
    }

    /// Per-step binding rate coefficient `k_bind dt / V_c`; multiply by the
    /// number of empty receptors for the per-particle hazard.
    pub(crate) fn binding_hazard(&self, dt: f64) -> f64 {
        let ch = &self.channel;
        ch.k_bind * dt / (ch.l_gr * ch.w_gr * self.capture_depth)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Patch {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub depth: f64,
}

impl Patch {
    pub fn captures(&self, p: &[f64; 3]) -> bool {
        p[0] >= self.x_lo && p[0] <= self.x_hi && p[1] >= self.y_lo && p[1] <= self.y_hi && p[2] < self.depth
    }
}

/// Particle accounting. `injected == free + bound + removed` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Census {
    pub injected: u64,
    pub free: u64,
    pub bound: u64,
    pub removed: u64,
}

impl Census {
    pub fn is_balanced(&self) -> bool {
        self.injected == self.free + self.bound + self.removed
    }
}

/// Fixed-size receptor patch. Bound particles are stored in their slot.
#[derive(Debug, Clone)]
pub struct ReceptorArray<T> {
    slots: Vec<Option<T>>,
    empty: Vec<u32>,
}

impl<T> ReceptorArray<T> {
    pub fn new(n_r: u32) -> Self {
        Self {
            slots: (0..n_r).map(|_| None).collect(),
            empty: (0..n_r).rev().collect(),
        }
    }

    pub fn n_r(&self) -> u32 {
        self.slots.len() as u32
    }

    pub fn occupied(&self) -> u32 {
        self.n_r() - self.empty.len() as u32
    }

    pub fn empty_count(&self) -> u32 {
        self.empty.len() as u32
    }

    /// Places `item` on a uniformly chosen empty receptor.
    pub fn bind_random(&mut self, item: T, rng: &mut SimRng) -> Option<u32> {
        use rand::Rng;
        if self.empty.is_empty() {
            return None;
        }
        let k = rng.random_range(0..self.empty.len());
        let idx = self.empty.swap_remove(k);
        debug_assert!(self.slots[idx as usize].is_none());
        self.slots[idx as usize] = Some(item);
        Some(idx)
    }

    pub fn release(&mut self, idx: u32) -> Option<T> {
        let item = self.slots.get_mut(idx as usize)?.take()?;
        self.empty.push(idx);
        Some(item)
    }

    pub(crate) fn slots_mut(&mut self, idx: u32) -> Option<&mut T> {
        self.slots.get_mut(idx as usize)?.as_mut()
    }

    pub fn get(&self, idx: u32) -> Option<&T> {
        self.slots.get(idx as usize)?.as_ref()
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = (u32, &T)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|t| (i as u32, t)))
    }
}

/// A channel engine. One instance belongs to exactly one run.
pub trait Propagator: Send {
    fn name(&self) -> &'static str;

    /// Releases `count` particles at `x = 0`, uniform over the cross-section.
    fn inject(&mut self, count: u32, species: Species, rng: &mut SimRng);

    /// Advances one symbol period and returns the peak number of occupied
    /// receptors seen after any step of the interval. `trickle` interferers
    /// are released evenly spread over the interval.
    fn run_symbol(&mut self, clock: &mut SimClock, trickle: u32, rng: &mut SimRng) -> u32;

    fn census(&self) -> Census;

    fn occupied(&self) -> u32;
}

pub type PropagatorFactory = fn(ParticleConfig) -> Box<dyn Propagator>;

/// Channel engines selectable by name.
pub fn propagators() -> Registry<PropagatorFactory> {
    let mut reg: Registry<PropagatorFactory> = Registry::new("propagator");
    reg.register("farfield", |cfg| Box::new(FarField::new(cfg)));
    reg.register("brute", |cfg| Box::new(BruteForce::new(cfg)));
    reg
}

pub const DEFAULT_PROPAGATOR: &str = "farfield";

/// Folds `v` back into `[0, len]` as repeated mirror reflections.
pub fn reflect(v: f64, len: f64) -> f64 {
    if (0.0..=len).contains(&v) {
        return v;
    }
    let m = v.rem_euclid(2.0 * len);
    if m > len {
        2.0 * len - m
    } else {
        m
    }
}

pub(crate) fn inlet_position(ch: &ChannelParams, rng: &mut SimRng) -> [f64; 3] {
    use rand::Rng;
    [0.0, rng.random::<f64>() * ch.w_ch, rng.random::<f64>() * ch.h_ch]
}

/// Advects by `u t` and adds an isotropic Gaussian displacement of
/// variance `2 D t` per axis, reflecting off the side walls.
pub(crate) fn displace(pos: &mut [f64; 3], ch: &ChannelParams, diffusion: f64, t: f64, rng: &mut SimRng) {
    let sigma = (2.0 * diffusion * t).sqrt();
    let g: [f64; 3] = [
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    ];
    pos[0] += ch.u * t + sigma * g[0];
    pos[1] = reflect(pos[1] + sigma * g[1], ch.w_ch);
    pos[2] = reflect(pos[2] + sigma * g[2], ch.h_ch);
}

/// Number of whole steps until a bound particle lets go, drawn from the
/// geometric law with per-step release probability `1 - exp(-k dt)`.
pub(crate) fn unbinding_delay(k_unbind: f64, dt: f64, rng: &mut SimRng) -> u64 {
    use rand::Rng;
    let u: f64 = 1.0 - rng.random::<f64>();
    let steps = (-u.ln() / (k_unbind * dt)).ceil();
    if steps.is_finite() {
        (steps as u64).max(1)
    } else {
        u64::MAX / 4
    }
}
