use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;

use super::{
    displace, inlet_position, unbinding_delay, Binding, Census, Particle, ParticleConfig, Patch, Propagator,
    ReceptorArray, SimClock, SimRng, Species,
};

/// Safety margin, in standard deviations, between a sleeping particle and
/// the capture zone over the whole jump.
const SIGMA_MARGIN: f64 = 6.0;
/// Particles whose admissible jump is shorter than this many steps stay
/// in the per-step set.
const MIN_JUMP: u64 = 2;
const MAX_JUMP: u64 = 1 << 40;

#[derive(Debug, Clone)]
struct Slot {
    particle: Particle,
    /// Step index at which `particle.position` is current.
    clock: u64,
}

/// Event-driven engine.
///
/// Free Brownian motion with drift and reflecting side walls has an exact
/// multi-step transition law (a Gaussian in `x`, folded Gaussians in `y`
/// and `z`), so a particle that cannot reach the capture zone within `n`
/// steps except with ~1e-9 probability is moved in one draw and put to
/// sleep until then. Only particles near the receptor patch are stepped
/// every `dt`. Unbinding is scheduled with exact geometric delays.
#[derive(Debug, Clone)]
pub struct FarField {
    cfg: ParticleConfig,
    patch: Patch,
    slots: Vec<Slot>,
    vacant: Vec<usize>,
    active: Vec<usize>,
    dormant: BinaryHeap<Reverse<(u64, usize)>>,
    unbind: BinaryHeap<Reverse<(u64, u32)>>,
    receptors: ReceptorArray<usize>,
    now: u64,
    injected: u64,
    removed: u64,
    free: u64,
}

impl FarField {
    pub fn new(cfg: ParticleConfig) -> Self {
        let patch = cfg.patch();
        let receptors = ReceptorArray::new(cfg.channel.n_r);
        Self {
            cfg,
            patch,
            slots: Vec::new(),
            vacant: Vec::new(),
            active: Vec::new(),
            dormant: BinaryHeap::new(),
            unbind: BinaryHeap::new(),
            receptors,
            now: 0,
            injected: 0,
            removed: 0,
            free: 0,
        }
    }

    /// Number of particles currently stepped every `dt`.
    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    fn alloc(&mut self, particle: Particle) -> usize {
        let slot = Slot {
            particle,
            clock: self.now,
        };
        match self.vacant.pop() {
            Some(i) => {
                self.slots[i] = slot;
                i
            }
            None => {
                self.slots.push(slot);
                self.slots.len() - 1
            }
        }
    }

    /// Longest jump, in steps, that keeps the particle clear of the patch.
    fn admissible_steps(&self, x: f64, dt: f64) -> u64 {
        let ch = &self.cfg.channel;
        let spread = SIGMA_MARGIN * (2.0 * self.cfg.diffusion).sqrt();
        let horizon = if x < self.patch.x_lo {
            let d = self.patch.x_lo - x;
            if ch.u > 0.0 {
                let s = (-spread + (spread * spread + 4.0 * ch.u * d).sqrt()) / (2.0 * ch.u);
                s * s
            } else if spread > 0.0 {
                (d / spread).powi(2)
            } else {
                f64::INFINITY
            }
        } else if x > self.patch.x_hi {
            let d = x - self.patch.x_hi;
            if spread > 0.0 {
                (d / spread).powi(2)
            } else {
                f64::INFINITY
            }
        } else {
            0.0
        };
        let n = (horizon / dt).floor();
        if n >= MAX_JUMP as f64 {
            MAX_JUMP
        } else {
            n as u64
        }
    }

    /// Files a free particle whose position is current at `self.now` as
    /// removed, sleeping or active.
    fn classify(&mut self, idx: usize, dt: f64, active: &mut Vec<usize>) {
        let x = self.slots[idx].particle.position[0];
        if x > self.cfg.drain_limit() {
            self.vacant.push(idx);
            self.removed += 1;
            self.free -= 1;
            return;
        }
        let n = self.admissible_steps(x, dt);
        if n >= MIN_JUMP {
            self.dormant.push(Reverse((self.now + n, idx)));
        } else {
            active.push(idx);
        }
    }

    fn step(&mut self, dt: f64, rng: &mut SimRng) {
        let next = self.now + 1;
        let ch = self.cfg.channel.clone();
        for &i in &self.active {
            let slot = &mut self.slots[i];
            displace(&mut slot.particle.position, &ch, self.cfg.diffusion, dt, rng);
            slot.clock = next;
        }

        let mut released = Vec::new();
        while let Some(&Reverse((at, r))) = self.unbind.peek() {
            if at > next {
                break;
            }
            self.unbind.pop();
            if let Some(i) = self.receptors.release(r) {
                let slot = &mut self.slots[i];
                slot.particle.state = Binding::Free;
                slot.clock = next;
                self.free += 1;
                released.push(i);
            }
        }

        let hazard = self.cfg.binding_hazard(dt);
        let mut still_free = Vec::with_capacity(self.active.len());
        for &i in &self.active {
            let empty = self.receptors.empty_count();
            if empty > 0 && self.patch.captures(&self.slots[i].particle.position) {
                let p_bind = 1.0 - (-hazard * f64::from(empty)).exp();
                if rng.random::<f64>() < p_bind {
                    if let Some(r) = self.receptors.bind_random(i, rng) {
                        self.slots[i].particle.state = Binding::Bound(r);
                        self.free -= 1;
                        let delay = unbinding_delay(ch.k_unbind, dt, rng);
                        self.unbind.push(Reverse((next.saturating_add(delay), r)));
                        continue;
                    }
                }
            }
            still_free.push(i);
        }

        let mut woken = Vec::new();
        while let Some(&Reverse((at, i))) = self.dormant.peek() {
            if at > next {
                break;
            }
            self.dormant.pop();
            let slot = &mut self.slots[i];
            let elapsed = (next - slot.clock) as f64 * dt;
            displace(&mut slot.particle.position, &ch, self.cfg.diffusion, elapsed, rng);
            slot.clock = next;
            woken.push(i);
        }

        self.now = next;
        let mut active = Vec::with_capacity(still_free.len() + released.len());
        for i in still_free.into_iter().chain(released).chain(woken) {
            self.classify(i, dt, &mut active);
        }
        self.active = active;
    }
}

impl Propagator for FarField {
    fn name(&self) -> &'static str {
        "farfield"
    }

    fn inject(&mut self, count: u32, species: Species, rng: &mut SimRng) {
        for _ in 0..count {
            let position = inlet_position(&self.cfg.channel, rng);
            let idx = self.alloc(Particle {
                position,
                species,
                state: Binding::Free,
            });
            self.active.push(idx);
            self.injected += 1;
            self.free += 1;
        }
    }

    fn run_symbol(&mut self, clock: &mut SimClock, trickle: u32, rng: &mut SimRng) -> u32 {
        let steps = clock.steps_per_symbol();
        let mut fed = 0u32;
        let mut peak = 0;
        for k in 0..steps {
            let due = ((k + 1) * u64::from(trickle) / steps) as u32;
            if due > fed {
                self.inject(due - fed, Species::Interferer, rng);
                fed = due;
            }
            self.step(clock.dt, rng);
            clock.advance();
            peak = peak.max(self.receptors.occupied());
        }
        peak
    }

    fn census(&self) -> Census {
        Census {
            injected: self.injected,
            free: self.free,
            bound: u64::from(self.receptors.occupied()),
            removed: self.removed,
        }
    }

    fn occupied(&self) -> u32 {
        self.receptors.occupied()
    }
}
