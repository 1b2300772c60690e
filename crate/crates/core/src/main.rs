use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use artrx::control::{PidGains, PidState, Setpoint, ThresholdController, ZieglerNichols};
use artrx::harness::{
    calibrate, configured_sweep, csv_string, detector_context, emit_plot, load_config, parse_seeds, run_experiment,
    snr_db, ExperimentConfig, SweepAxis, SweepSpec,
};
use artrx::Result;

/// Adaptive-threshold molecular communication receiver simulator.
#[derive(Debug, Parser)]
#[command(name = "artrx", version)]
struct Cli {
    /// Experiment file (`key = value` lines); defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Sweep axis: num_interferers, n0, u, x_r, d0 or k_bind.
    #[arg(long)]
    sweep: Option<SweepAxis>,

    /// Seed count `n` (seeds 0..n) or a comma separated list.
    #[arg(long)]
    seeds: Option<String>,

    /// Output directory for results.csv and plots; CSV goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also render SVG plots (needs --out).
    #[arg(long)]
    plot: bool,

    /// artrx, optimal, both, or a comma separated list of detector names.
    #[arg(long)]
    detector: Option<String>,

    /// Run the ultimate-gain search on the adaptive loop and print gains.
    #[arg(long)]
    tune: bool,

    /// Print interference statistics from the calibration pre-run.
    #[arg(long)]
    calibrate: bool,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = &cli.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(d) = &cli.detector {
        cfg.detectors = artrx::harness::config::parse_detectors(d);
    }
    if let Some(axis) = cli.sweep {
        let values = match &cfg.sweep {
            Some(s) if s.axis == axis => s.values.clone(),
            _ => axis.default_values(),
        };
        cfg.sweep = Some(SweepSpec::new(axis, values)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_calibration(cfg: &ExperimentConfig) -> Result<()> {
    println!("seed,mu_i,var_i");
    for &seed in &cfg.seeds {
        let n = calibrate(cfg, seed)?;
        println!("{seed},{},{}", n.mu_i, n.var_i);
    }
    Ok(())
}

fn tune(cfg: &ExperimentConfig) -> Result<()> {
    let seed = cfg.seeds[0];
    let ctx = detector_context(cfg, seed)?;
    let mut probe = cfg.clone();
    probe.detectors = vec!["optimal".into()];
    let ys = run_experiment(&probe, seed)?.remove(0).y_trace;
    let gamma0 = ctx.gamma0()?;
    let mut plant = |kp: f64| {
        let sp = Setpoint::new(ctx.model.stats.midpoint(), ctx.setpoint_window).expect("validated window");
        let state = PidState::symmetric(ctx.i_clamp).expect("validated clamp");
        let mut c = ThresholdController::new(PidGains { kp, ki: 0.0, kd: 0.0 }, state, sp, gamma0, ctx.n_r);
        ys.iter()
            .map(|&y| {
                c.observe(y);
                c.state().prev_error
            })
            .collect::<Vec<f64>>()
    };
    let t = ZieglerNichols::default().tune(&mut plant)?;
    println!("ku = {}\ntu = {} symbols", t.ku, t.tu);
    println!("kp = {}\nki = {}\nkd = {}", t.gains.kp, t.gains.ki, t.gains.kd);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = build_config(cli)?;
    if cli.calibrate {
        return print_calibration(&cfg);
    }
    if cli.tune {
        return tune(&cfg);
    }
    let spec = configured_sweep(&cfg);
    let results = artrx::harness::run_sweep(&cfg, &spec)?;
    let csv = csv_string(&results)?;
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("results.csv"), &csv)?;
            if cli.plot {
                for p in emit_plot(&results, dir)? {
                    eprintln!("wrote {}", p.display());
                }
            }
        }
        None => print!("{csv}"),
    }
    for g in results.groups() {
        let snr = match spec.axis {
            SweepAxis::NumInterferers if g.value > 0.0 => format!(" (snr {:.1} dB)", snr_db(cfg.scheme.n1, g.value as u32)),
            _ => String::new(),
        };
        eprintln!("{} = {}{snr}: {} bep {:.4} over {} runs", spec.axis, g.value, g.detector, g.bep, g.runs);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.plot && cli.out.is_none() {
        eprintln!("error: --plot needs --out");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
