use std::path::Path;

use anyhow::Result;
use pme_tube::io;
use pme_tube::section::*;
use serde_json::json;

use super::{interior_distance, prepare_out};
use crate::config::SectionConfig;
use crate::manifest::{Manifest, Recorder};

pub fn run(cfg: &SectionConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    prepare_out(out)?;
    let mut rec = Recorder::new("section", cfg)?;
    let (l, m, n) = (cfg.length, cfg.m, cfg.n);
    let shot = rec.timed("shoot", || shoot_profile(l, m, n))?;
    let relaxed = rec.timed("relax", || relax_profile(l, m, n, cfg.tol))?;
    let lambda_exact = analytic_lambda1(l)?;
    let lambda_grid = numeric_lambda1(&relaxed.grid)?;

    let distance = interior_distance(&relaxed, &shot);
    rec.check(
        "agreement",
        distance <= cfg.agreement_tol,
        format!(
            "relaxation vs shooting {distance:.3e} (tol {:e})",
            cfg.agreement_tol
        ),
    );
    for (name, p) in [("relax", &relaxed), ("shoot", &shot)] {
        let verdict = p.check_invariants(1e-8 * p.sup_phi);
        let detail = verdict
            .clone()
            .err()
            .unwrap_or_else(|| "trace, positivity, symmetry, Hopf sign".into());
        rec.check(&format!("invariants_{name}"), verdict.is_ok(), detail);
    }
    io::write_profile(&shot, out, "profile_shoot")?;
    io::write_profile(&relaxed, out, "profile_relax")?;

    let mut dilation = None;
    if let Some(lam) = cfg.dilate {
        let predicted = dilate_profile(&relaxed, lam)?;
        let direct = rec.timed("dilated_shoot", || shoot_profile(lam * l, m, n))?;
        let d = interior_distance(&predicted, &direct);
        rec.check(
            "dilation",
            d <= cfg.agreement_tol,
            format!(
                "scaled profile vs direct solve on (0, {}) {d:.3e} (tol {:e})",
                lam * l,
                cfg.agreement_tol
            ),
        );
        io::write_profile(&predicted, out, "profile_dilated")?;
        dilation = Some(d);
    }

    let report = json!({
        "lambda1": lambda_exact,
        "lambda1_grid": lambda_grid,
        "cstar": critical_speed(m, lambda_exact)?,
        "sup_phi": relaxed.sup_phi,
        "relax_vs_shoot": distance,
        "dilation_distance": dilation,
        "hopf_slopes": relaxed.hopf_slopes(),
        "residual_sup": relaxed.residual().iter().fold(0.0f64, |a, r| a.max(r.abs())),
    });
    io::write_json(&out.join("report.json"), &report)?;
    rec.finish(out)
}
