use std::path::PathBuf;
use std::time::Instant;

use serde_json::json;

use super::field::{TubeField, Variable};
use super::step::{cfl_dt, Stepper};
use crate::error::{invalid, Error, Result};
use crate::io;
use crate::scalar::Real;

/// Callback invoked on every snapshot.
pub trait Observer<T> {
    fn observe(&mut self, field: &TubeField<T>) -> Result<()>;
}

impl<T, F> Observer<T> for F
where
    F: FnMut(&TubeField<T>) -> Result<()>,
{
    fn observe(&mut self, field: &TubeField<T>) -> Result<()> {
        self(field)
    }
}

/// Everything needed to reproduce one evolution.
#[derive(Debug, Clone)]
pub struct RunConfig<T> {
    /// Initial field; its `time` is the start time and its `variable` picks the equation.
    pub initial: TubeField<T>,
    pub end_time: T,
    pub snapshot_interval: T,
    /// Fraction of the stability bound used for each step.
    pub safety: T,
    pub max_dt: Option<T>,
    /// Values above this count as support for the truncation guard; `None` disables it.
    pub support_threshold: Option<T>,
    pub guard_nodes: usize,
    pub output_dir: Option<PathBuf>,
    pub csv_export: bool,
    pub keep_in_memory: bool,
}

impl<T: Real> RunConfig<T> {
    pub fn new(initial: TubeField<T>, end_time: T, snapshot_interval: T) -> Self {
        Self {
            initial,
            end_time,
            snapshot_interval,
            safety: T::lit(0.9),
            max_dt: None,
            support_threshold: None,
            guard_nodes: 5,
            output_dir: None,
            csv_export: false,
            keep_in_memory: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.end_time >= self.initial.time) {
            return Err(invalid(format!(
                "end time {} precedes start time {}",
                self.end_time, self.initial.time
            )));
        }
        if !(self.snapshot_interval > T::zero()) {
            return Err(invalid("snapshot interval must be positive"));
        }
        if !(self.safety > T::zero() && self.safety <= T::one()) {
            return Err(invalid(format!(
                "safety must lie in (0, 1], got {}",
                self.safety
            )));
        }
        if let Some(dt) = self.max_dt {
            if !(dt > T::zero()) {
                return Err(invalid("max_dt must be positive"));
            }
        }
        if self.guard_nodes * 2 + 1 >= self.initial.grid.ny() {
            return Err(invalid("guard band covers the whole y grid"));
        }
        Ok(())
    }

    /// JSON echo written into the run manifest.
    pub fn echo(&self) -> serde_json::Value {
        json!({
            "start_time": self.initial.time.as_f64(),
            "end_time": self.end_time.as_f64(),
            "snapshot_interval": self.snapshot_interval.as_f64(),
            "safety": self.safety.as_f64(),
            "max_dt": self.max_dt.map(|x| x.as_f64()),
            "support_threshold": self.support_threshold.map(|x| x.as_f64()),
            "guard_nodes": self.guard_nodes,
            "initial": io::FieldMeta::of(&self.initial),
        })
    }

    fn snapshot_times(&self) -> Vec<T> {
        let start = self.initial.time;
        let mut times = vec![start];
        let slack = self.snapshot_interval * T::lit(1e-9);
        let mut k = 1usize;
        loop {
            let t = start + T::from_usize_lossy(k) * self.snapshot_interval;
            if t >= self.end_time - slack {
                break;
            }
            times.push(t);
            k += 1;
        }
        if self.end_time > start {
            times.push(self.end_time);
        }
        times
    }
}

/// Result of [`run_evolution`].
#[derive(Debug, Clone)]
pub struct RunRecord<T> {
    pub config: serde_json::Value,
    pub snapshot_times: Vec<T>,
    /// Binary snapshot paths, when an output directory was given.
    pub snapshot_files: Vec<PathBuf>,
    /// Snapshots held in memory, when `keep_in_memory` was set.
    pub snapshots: Vec<TubeField<T>>,
    pub steps: u64,
    pub clamps: u64,
    pub wall_time_secs: f64,
}

impl<T: Real> RunRecord<T> {
    /// Reproducible summary written as `run.json`: file names are relative to
    /// the output directory and wall time is left out, so identical runs
    /// produce identical files.
    pub fn manifest(&self) -> serde_json::Value {
        let names: Vec<_> = self
            .snapshot_files
            .iter()
            .filter_map(|p| p.file_name().and_then(|n| n.to_str()))
            .collect();
        json!({
            "config": self.config,
            "snapshot_times": self.snapshot_times.iter().map(|t| t.as_f64()).collect::<Vec<_>>(),
            "snapshot_files": names,
            "steps": self.steps,
            "clamps": self.clamps,
        })
    }

    /// Loads the persisted snapshots back from disk.
    pub fn load_snapshots(&self) -> Result<Vec<TubeField<T>>> {
        self.snapshot_files
            .iter()
            .map(|p| {
                let dir = p.parent().unwrap_or_else(|| std::path::Path::new("."));
                let stem = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| Error::Format(format!("bad snapshot path {}", p.display())))?;
                io::read_field(dir, stem)
            })
            .collect()
    }
}

/// Steps the configured equation to the end time, persisting and observing a
/// snapshot at every multiple of the snapshot interval and at the end.
pub fn run_evolution<T: Real>(
    config: &RunConfig<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<RunRecord<T>> {
    config.validate()?;
    let clock = Instant::now();
    let mut field = config.initial.clone();
    let mut stepper = Stepper::default();
    let times = config.snapshot_times();
    let mut record = RunRecord {
        config: config.echo(),
        snapshot_times: Vec::with_capacity(times.len()),
        snapshot_files: Vec::new(),
        snapshots: Vec::new(),
        steps: 0,
        clamps: 0,
        wall_time_secs: 0.0,
    };

    for (k, &target) in times.iter().enumerate() {
        while field.time < target {
            let remaining = target - field.time;
            let mut dt = cfl_dt(&field, config.safety);
            if let Some(cap) = config.max_dt {
                dt = dt.min(cap);
            }
            let last = dt >= remaining;
            if last {
                dt = remaining;
            }
            match field.variable {
                Variable::Physical => stepper.advance_pme(&mut field, dt)?,
                Variable::Rescaled => stepper.advance_rescaled(&mut field, dt)?,
            }
            if last {
                field.time = target;
            }
            record.steps += 1;
            if let Some(threshold) = config.support_threshold {
                check_guard(&field, threshold, config.guard_nodes)?;
            }
        }
        for obs in observers.iter_mut() {
            obs.observe(&field)?;
        }
        if let Some(dir) = &config.output_dir {
            let stem = format!("snap_{k:05}");
            io::write_field(&field, dir, &stem, config.csv_export)?;
            record.snapshot_files.push(dir.join(format!("{stem}.bin")));
        }
        if config.keep_in_memory {
            record.snapshots.push(field.clone());
        }
        record.snapshot_times.push(field.time);
    }
    record.clamps = field.clamps;
    record.wall_time_secs = clock.elapsed().as_secs_f64();
    if let Some(dir) = &config.output_dir {
        io::write_json(&dir.join("run.json"), &record.manifest())?;
    }
    Ok(record)
}

fn check_guard<T: Real>(field: &TubeField<T>, threshold: T, guard: usize) -> Result<()> {
    let ny = field.grid.ny();
    for i in 0..field.grid.nz() {
        let row = field.row(i);
        let near_low = row[..=guard].iter().any(|&v| v > threshold);
        let near_high = row[ny - 1 - guard..].iter().any(|&v| v > threshold);
        if near_low || near_high {
            return Err(Error::TruncationGuard {
                guard,
                time: field.time.as_f64(),
            });
        }
    }
    Ok(())
}
