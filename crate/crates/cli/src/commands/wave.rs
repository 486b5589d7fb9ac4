use std::path::Path;

use anyhow::Result;
use pme_tube::io;
use pme_tube::section::relax_profile;
use pme_tube::waves::*;
use pme_tube::Wave;
use serde_json::json;

use super::prepare_out;
use crate::config::WaveConfig;
use crate::manifest::{Manifest, Recorder};

/// CSV with columns `z,xi,value`.
pub fn wave_csv(w: &Wave) -> String {
    let xis = w.xis();
    let rows = (0..w.section.n()).flat_map(|i| {
        let z = w.section.node(i);
        let xis = &xis;
        (0..w.n_xi).map(move |j| [z, xis[j], w.value(i, j)])
    });
    io::csv("z,xi,value", rows)
}

pub fn run(cfg: &WaveConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    prepare_out(out)?;
    let mut rec = Recorder::new("wave", cfg)?;
    let profile = rec.timed("profile", || {
        relax_profile(cfg.length, cfg.m, cfg.nz, cfg.profile_tol)
    })?;
    let c = cfg.c.unwrap_or(profile.cstar);
    let (raw, stats) = rec.timed("relaxation", || {
        relax_wave_with(
            &profile,
            c,
            (cfg.xi_min, cfg.xi_max),
            cfg.n_xi,
            cfg.tol,
            &WaveOptions::default(),
        )
    })?;
    let wave = normalize_wave(&raw)?;
    let inv = wave.check_invariants();
    rec.check(
        "invariants",
        inv.passed(),
        format!(
            "monotone defect {:.2e}, plateau defect {:.2e}, beyond-support max {:.2e}, empty rows {}",
            inv.monotone_defect,
            inv.plateau_defect,
            inv.beyond_support_max,
            inv.empty_rows.len()
        ),
    );
    io::write_text(&out.join("wave.csv"), &wave_csv(&wave))?;
    io::write_json(
        &out.join("wave.json"),
        &json!({
            "requested_speed": c,
            "cstar": profile.cstar,
            "speed": wave.speed,
            "xi_min": wave.xi_min,
            "xi_max": wave.xi_max,
            "n_xi": wave.n_xi,
            "xi0": wave.xi0,
            "threshold": wave.threshold,
            "front": wave.front,
            "plateau": wave.plateau,
            "invariants": inv,
            "stats": stats,
        }),
    )?;
    rec.finish(out)
}
