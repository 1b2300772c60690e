use rand::Rng;

use super::{
    displace, inlet_position, Binding, Census, Particle, ParticleConfig, Propagator, ReceptorArray, SimClock, SimRng,
    Species,
};

/// Reference engine: every free particle takes every timestep.
///
/// Exact to the discretisation but slow for long channels; the far-field
/// engine is checked against it.
#[derive(Debug, Clone)]
pub struct BruteForce {
    cfg: ParticleConfig,
    free: Vec<Particle>,
    receptors: ReceptorArray<Particle>,
    injected: u64,
    removed: u64,
}

impl BruteForce {
    pub fn new(cfg: ParticleConfig) -> Self {
        let receptors = ReceptorArray::new(cfg.channel.n_r);
        Self {
            cfg,
            free: Vec::new(),
            receptors,
            injected: 0,
            removed: 0,
        }
    }

    pub fn config(&self) -> &ParticleConfig {
        &self.cfg
    }

    pub fn free_particles(&self) -> &[Particle] {
        &self.free
    }

    pub fn receptors(&self) -> &ReceptorArray<Particle> {
        &self.receptors
    }

    /// Places a free particle at an explicit position (tests, custom sources).
    pub fn insert_at(&mut self, position: [f64; 3], species: Species) {
        self.injected += 1;
        self.free.push(Particle {
            position,
            species,
            state: Binding::Free,
        });
    }

    /// One timestep: move, release, bind.
    pub fn step(&mut self, dt: f64, rng: &mut SimRng) {
        let ch = &self.cfg.channel;
        for p in &mut self.free {
            displace(&mut p.position, ch, self.cfg.diffusion, dt, rng);
        }

        // Released particles rejoin the free pool after the binding pass.
        let p_release = 1.0 - (-ch.k_unbind * dt).exp();
        let bound: Vec<u32> = self.receptors.iter_occupied().map(|(i, _)| i).collect();
        let mut released = Vec::new();
        for idx in bound {
            if rng.random::<f64>() < p_release {
                if let Some(mut p) = self.receptors.release(idx) {
                    p.state = Binding::Free;
                    released.push(p);
                }
            }
        }

        let patch = self.cfg.patch();
        let hazard = self.cfg.binding_hazard(dt);
        let mut i = 0;
        while i < self.free.len() {
            let empty = self.receptors.empty_count();
            if empty > 0 && patch.captures(&self.free[i].position) {
                let p_bind = 1.0 - (-hazard * f64::from(empty)).exp();
                if rng.random::<f64>() < p_bind {
                    let p = self.free.swap_remove(i);
                    if let Some(idx) = self.receptors.bind_random(p, rng) {
                        if let Some(slot) = self.receptors.slots_mut(idx) {
                            slot.state = Binding::Bound(idx);
                        }
                    }
                    continue;
                }
            }
            i += 1;
        }
        self.free.extend(released);
    }

    /// Drops free particles that have drifted past the drain limit.
    pub fn purge(&mut self) -> u64 {
        let limit = self.cfg.drain_limit();
        let before = self.free.len();
        self.free.retain(|p| p.position[0] <= limit);
        let n = (before - self.free.len()) as u64;
        self.removed += n;
        n
    }
}

impl Propagator for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn inject(&mut self, count: u32, species: Species, rng: &mut SimRng) {
        for _ in 0..count {
            let pos = inlet_position(&self.cfg.channel, rng);
            self.insert_at(pos, species);
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
            self.purge();
            clock.advance();
            peak = peak.max(self.receptors.occupied());
        }
        peak
    }

    fn census(&self) -> Census {
        Census {
            injected: self.injected,
            free: self.free.len() as u64,
            bound: u64::from(self.receptors.occupied()),
            removed: self.removed,
        }
    }

    fn occupied(&self) -> u32 {
        self.receptors.occupied()
    }
}
