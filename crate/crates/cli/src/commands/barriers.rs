use std::path::Path;

use anyhow::Result;
use pme_tube::barriers::*;
use pme_tube::io;
use pme_tube::section::{analytic_lambda1, critical_speed};
use serde_json::json;

use super::prepare_out;
use crate::config::BarriersConfig;
use crate::manifest::{Manifest, Recorder};

pub fn run(cfg: &BarriersConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let cstar = match cfg.cstar {
        Some(c) => c,
        None => critical_speed(cfg.m, analytic_lambda1(cfg.length)?)?,
    };
    let params = match cfg.kind {
        BarrierKind::Super => BarrierParams::super_(cfg.m, cstar, cfg.f0, cfg.g0)?,
        BarrierKind::Sub => {
            let delta0 = match cfg.delta0 {
                Some(d) => d,
                None => admissible_delta0(cfg.m, cstar, cfg.f0)?,
            };
            BarrierParams::sub(cfg.m, cstar, cfg.f0, cfg.g0, delta0)?
        }
    };
    prepare_out(out)?;
    let mut rec = Recorder::new("barriers", cfg)?;
    let path = rec.timed("integration", || {
        integrate_barrier(&params, cfg.tau_end, cfg.dtau)
    })?;

    let tail = *path.shift_series().last().expect("path has samples");
    let gap = (tail - path.predicted_shift).abs();
    rec.check(
        "shift_limit",
        gap <= cfg.shift_tol,
        format!(
            "g - c* tau at tau = {}: {tail:.6} vs limit {:.6} (gap {gap:.2e}, tol {:e})",
            path.tau_end(),
            path.predicted_shift,
            cfg.shift_tol
        ),
    );
    let excess = path.ceiling_excess();
    let rk4_gap = match params.kind {
        BarrierKind::Sub => {
            rec.check(
                "ceiling",
                excess <= 0.0,
                format!("largest excess over the ceiling {excess:.3e}"),
            );
            None
        }
        BarrierKind::Super => {
            let mut worst = 0.0f64;
            for k in 0..path.tau.len() {
                let (f, g) = super_closed_form(params.f0, params.g0, cstar, params.m, path.tau[k])?;
                worst = worst.max((path.f[k] - f).abs()).max((path.g[k] - g).abs());
            }
            Some(worst)
        }
    };
    io::write_text(&out.join("barrier.csv"), &path.to_csv())?;
    io::write_json(
        &out.join("barrier.json"),
        &json!({
            "params": params,
            "tau_end": path.tau_end(),
            "dtau": path.dtau,
            "predicted_shift": path.predicted_shift,
            "final_shift": tail,
            "shift_gap": gap,
            "ceiling_excess": excess,
            "closed_form_gap": rk4_gap,
            "delta_bar": delta_bar(params.m, cstar, params.f0).ok(),
        }),
    )?;
    rec.finish(out)
}
