//! Experiment orchestration: config, seeded runs, sweeps and output.

pub mod config;
pub mod experiment;
pub mod output;
pub mod sweep;

pub use config::{load_config, parse_config, parse_seeds, ExperimentConfig, InterfererMode, SweepAxis, SweepSpec};
pub use experiment::{calibrate, detector_context, run_experiment, stream_rng, Stream};
pub use output::{csv_string, emit_csv, emit_plot, fmt_sig, CSV_HEADER};
pub use sweep::{configured_sweep, point_config, run_sweep, GroupSummary, SweepRecord, SweepResults};

/// Axis label for the interferer-count sweep: `10 log10(n1 / num_interferers)` dB.
pub fn snr_db(n1: u32, num_interferers: u32) -> f64 {
    10.0 * (f64::from(n1) / f64::from(num_interferers)).log10()
}
