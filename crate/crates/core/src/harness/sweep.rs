use rayon::prelude::*;

use crate::control::schedule_gains;
use crate::error::{Error, Result};
use crate::link::{bep, RunResult};

use super::config::{ExperimentConfig, SweepAxis, SweepSpec};
use super::experiment::run_experiment;

/// One run at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub value: f64,
    pub result: RunResult,
}

/// All runs of a sweep, ordered by (value, detector, seed).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub axis: SweepAxis,
    pub records: Vec<SweepRecord>,
}

/// Aggregate over the seeds of one (value, detector) group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub value: f64,
    pub detector: String,
    pub bep: f64,
    pub runs: usize,
}

impl SweepResults {
    /// Mean BER per (value, detector), in record order.
    pub fn groups(&self) -> Vec<GroupSummary> {
        let mut out: Vec<GroupSummary> = Vec::new();
        let mut start = 0;
        while start < self.records.len() {
            let head = &self.records[start];
            let end = start
                + self.records[start..]
                    .iter()
                    .take_while(|r| r.value == head.value && r.result.detector == head.result.detector)
                    .count();
            let runs: Vec<RunResult> = self.records[start..end].iter().map(|r| r.result.clone()).collect();
            out.push(GroupSummary {
                value: head.value,
                detector: head.result.detector.clone(),
                bep: bep(&runs).expect("group is nonempty"),
                runs: runs.len(),
            });
            start = end;
        }
        out
    }

    /// BEP curve of one detector, ordered by axis value.
    pub fn curve(&self, detector: &str) -> Vec<(f64, f64)> {
        self.groups()
            .into_iter()
            .filter(|g| g.detector == detector)
            .map(|g| (g.value, g.bep))
            .collect()
    }
}

/// Scenario for one sweep point, with scheduled gains when the axis has
/// a schedule.
pub fn point_config(cfg: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut c = axis.apply(cfg, value)?;
    if let Some(s) = cfg.schedule_for(axis) {
        c.gains = schedule_gains(&s, value)?;
    }
    c.sweep = None;
    Ok(c)
}

/// Runs every (value, seed) pair in parallel. Output order does not
/// depend on scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<SweepResults> {
    spec.validate()?;
    let points = spec
        .values
        .iter()
        .map(|&v| point_config(cfg, spec.axis, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>>>()?;
    for (_, c) in &points {
        c.validate()?;
    }
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let (value, c) = &points[i];
            run_experiment(c, seed).map(|rs| rs.into_iter().map(|result| SweepRecord { value: *value, result }).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<SweepRecord> = runs.into_iter().flatten().collect();
    if records.is_empty() {
        return Err(Error::EmptyResults("sweep produced no runs"));
    }
    records.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.result.detector.cmp(&b.result.detector))
            .then_with(|| a.result.seed.cmp(&b.result.seed))
    });
    Ok(SweepResults { axis: spec.axis, records })
}

/// Sweep from the config, or a single point at the configured interferer
/// count when none is set.
pub fn configured_sweep(cfg: &ExperimentConfig) -> SweepSpec {
    cfg.sweep.clone().unwrap_or_else(|| SweepSpec {
        axis: SweepAxis::NumInterferers,
        values: vec![f64::from(cfg.num_interferers)],
    })
}
