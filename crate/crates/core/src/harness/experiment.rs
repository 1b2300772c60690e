use rand::SeedableRng;

use crate::analytic::{BitModel, NoiseStats};
use crate::detector::{detectors, DetectorContext};
use crate::error::Result;
use crate::link::{bit_error_rate, generate_bitstream, modulate, RunResult};
use crate::particles::{propagators, Propagator, SimClock, SimRng, Species};

use super::config::{ExperimentConfig, InterfererMode};

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Bits = 0,
    Channel = 1,
    Calibration = 2,
}

pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Floor applied to a calibrated variance of zero.
pub const MIN_NOISE_VARIANCE: f64 = 1.0;

struct Channel {
    engine: Box<dyn Propagator>,
    clock: SimClock,
    rng: SimRng,
    num_interferers: u32,
    mode: InterfererMode,
}

impl Channel {
    fn new(cfg: &ExperimentConfig, rng: SimRng) -> Result<Self> {
        let factory = propagators().get(&cfg.propagator).copied()?;
        Ok(Self {
            engine: factory(cfg.particle_config()),
            clock: cfg.clock()?,
            rng,
            num_interferers: cfg.num_interferers,
            mode: cfg.interferer_mode,
        })
    }

    /// One symbol interval; returns the peak receptor occupancy.
    fn symbol(&mut self, information: u32) -> f64 {
        self.engine.inject(information, Species::Information, &mut self.rng);
        let trickle = match self.mode {
            InterfererMode::PerSymbol => {
                self.engine.inject(self.num_interferers, Species::Interferer, &mut self.rng);
                0
            }
            InterfererMode::Trickle => self.num_interferers,
        };
        f64::from(self.engine.run_symbol(&mut self.clock, trickle, &mut self.rng))
    }
}

/// Interference statistics from an interferers-only pre-run, in receptor
/// counts: sample mean and variance of the per-symbol peaks.
pub fn calibrate(cfg: &ExperimentConfig, seed: u64) -> Result<NoiseStats> {
    let mut ch = Channel::new(cfg, stream_rng(seed, Stream::Calibration))?;
    let ys: Vec<f64> = (0..cfg.calibration_symbols).map(|_| ch.symbol(0)).collect();
    let n = ys.len() as f64;
    let mu_i = ys.iter().sum::<f64>() / n;
    let var = if ys.len() > 1 {
        ys.iter().map(|y| (y - mu_i).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(NoiseStats {
        mu_i,
        var_i: var.max(MIN_NOISE_VARIANCE),
    })
}

/// Model, noise and gains the detectors of one run are built from.
pub fn detector_context(cfg: &ExperimentConfig, seed: u64) -> Result<DetectorContext> {
    let model = BitModel::predict(&cfg.channel, f64::from(cfg.scheme.n0), f64::from(cfg.scheme.n1), cfg.d_eff())?;
    let noise = match cfg.noise {
        Some(n) => n,
        None => calibrate(cfg, seed)?,
    };
    Ok(DetectorContext {
        model,
        noise,
        gains: cfg.gains,
        i_clamp: cfg.i_clamp,
        setpoint_window: cfg.setpoint_window,
        n_r: cfg.channel.n_r,
    })
}

/// Simulates one seeded realization and decodes it with every configured
/// detector. All detectors see the same peak sequence.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let ctx = detector_context(cfg, seed)?;
    let reg = detectors();
    let mut dets = cfg
        .detectors
        .iter()
        .map(|name| reg.get(name).and_then(|f| f(&ctx)))
        .collect::<Result<Vec<_>>>()?;

    let tx = generate_bitstream(cfg.num_symbols, &mut stream_rng(seed, Stream::Bits));
    let mut ch = Channel::new(cfg, stream_rng(seed, Stream::Channel))?;
    let mut y_trace = Vec::with_capacity(tx.len());
    let mut rx = vec![Vec::with_capacity(tx.len()); dets.len()];
    let mut theta = vec![Vec::with_capacity(tx.len()); dets.len()];
    for &bit in &tx {
        let y = ch.symbol(modulate(bit, &cfg.scheme));
        y_trace.push(y);
        for (k, d) in dets.iter_mut().enumerate() {
            let (b, t) = d.decide(y);
            rx[k].push(b);
            theta[k].push(t);
        }
    }

    let mut out = Vec::with_capacity(dets.len());
    for ((d, rx_bits), threshold_trace) in dets.iter().zip(rx).zip(theta) {
        out.push(RunResult {
            detector: d.name().to_string(),
            seed,
            ber: bit_error_rate(&tx, &rx_bits)?,
            tx_bits: tx.clone(),
            rx_bits,
            threshold_trace,
            y_trace: y_trace.clone(),
        });
    }
    Ok(out)
}
