use std::path::Path;

use anyhow::Result;
use pme_tube::diagnostics::FrontSeries;
use pme_tube::dynamics::*;
use pme_tube::io;
use pme_tube::section::relax_profile;
use pme_tube::Field;
use serde_json::json;

use super::prepare_out;
use crate::config::EvolveConfig;
use crate::datum;
use crate::manifest::{Manifest, Recorder};

pub const PROFILE_STEM: &str = "profile";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub fn run(cfg: &EvolveConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    prepare_out(out)?;
    let mut rec = Recorder::new("evolve", cfg)?;
    let profile = rec.timed("profile", || {
        relax_profile(cfg.length, cfg.m, cfg.nz, cfg.profile_tol)
    })?;
    io::write_profile(&profile, out, PROFILE_STEM)?;

    let grid = TubeGrid::new(profile.grid, -cfg.y_extent, cfg.y_extent, cfg.ny)?;
    let u0 = datum::build(&cfg.datum, grid, &profile)?;
    let t0 = match cfg.t0 {
        Some(t0) => t0,
        None => admissible_t0(&u0, &profile)?,
    };
    let mut v0 = to_rescaled(&u0, t0)?;
    if let Some(speed) = cfg.frame_speed {
        v0 = v0.with_frame(Frame::Comoving { speed });
    }

    // the rescaled clock starts at ln t0; an earlier end keeps just the initial snapshot
    let tau_end = cfg.tau_end.max(v0.time);
    let mut run_cfg = RunConfig::new(v0, tau_end, cfg.snapshot_interval);
    run_cfg.safety = cfg.safety;
    run_cfg.support_threshold = Some(cfg.support_threshold * profile.sup_phi);
    run_cfg.output_dir = Some(out.join(SNAPSHOT_DIR));
    run_cfg.csv_export = cfg.csv_export;
    run_cfg.keep_in_memory = false;

    let threshold = cfg.front_threshold * profile.sup_phi;
    let mut fronts = FrontSeries::new();
    let mut series = Vec::new();
    let mut observe = |f: &Field| -> pme_tube::Result<()> {
        fronts.record(f, threshold);
        series.push([f.time, f.max_value(), f.mass()]);
        Ok(())
    };
    let record = rec.timed("evolution", || run_evolution(&run_cfg, &mut [&mut observe]))?;

    io::write_text(
        &out.join("fronts.csv"),
        &fronts.to_csv(&profile.grid.nodes()),
    )?;
    io::write_text(&out.join("series.csv"), &io::csv("tau,max,mass", &series))?;
    io::write_json(
        &out.join("evolve.json"),
        &json!({
            "t0": t0,
            "cstar": profile.cstar,
            "sup_phi": profile.sup_phi,
            "front_threshold": threshold,
            "snapshots": record.snapshot_times.len(),
            "steps": record.steps,
            "clamps": record.clamps,
        }),
    )?;
    println!(
        "evolved to tau = {tau_end} in {} steps ({} snapshots, t0 = {t0:.6e})",
        record.steps,
        record.snapshot_times.len()
    );
    rec.finish(out)
}
