use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use anyhow::{Context as _, Result};
use pme_tube::barriers::*;
use pme_tube::diagnostics::*;
use pme_tube::dynamics::*;
use pme_tube::io;
use pme_tube::section::*;
use pme_tube::waves::*;
use pme_tube::{Barrier, Field, Fronts, Profile, Wave};
use serde::Serialize;

use super::evolve::{PROFILE_STEM, SNAPSHOT_DIR};
use super::{interior_distance, prepare_out};
use crate::config::{Audit, VerifyConfig};
use crate::manifest::{Manifest, Recorder};

pub const THREADS_VAR: &str = "PME_TUBE_THREADS";

struct RunData {
    profile: Profile,
    snapshots: Vec<Field>,
    fronts: Fronts,
}

impl RunData {
    fn load(dir: &Path, front_threshold: f64) -> Result<Self> {
        let profile: Profile = io::read_profile(dir, PROFILE_STEM)?;
        let snap_dir = dir.join(SNAPSHOT_DIR);
        let mut stems: Vec<String> = fs::read_dir(&snap_dir)
            .with_context(|| format!("listing {}", snap_dir.display()))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".bin").map(str::to_owned)
            })
            .collect();
        stems.sort();
        let snapshots = stems
            .iter()
            .map(|s| io::read_field(&snap_dir, s))
            .collect::<pme_tube::Result<Vec<Field>>>()?;
        if snapshots.is_empty() {
            anyhow::bail!(pme_tube::Error::Format(format!(
                "no snapshots in {}",
                snap_dir.display()
            )));
        }
        let mut fronts = FrontSeries::new();
        for s in &snapshots {
            fronts.record(s, front_threshold * profile.sup_phi);
        }
        Ok(Self {
            profile,
            snapshots,
            fronts,
        })
    }

    fn tau_end(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.time)
    }
}

struct Audits<'a> {
    cfg: &'a VerifyConfig,
    run: Option<RunData>,
    base: OnceLock<pme_tube::Result<Profile>>,
    wave: OnceLock<pme_tube::Result<Wave>>,
}

type Verdict = (bool, String);

impl Audits<'_> {
    fn run(&self) -> &RunData {
        self.run
            .as_ref()
            .expect("run-based audits are validated to have a run")
    }

    /// Profile of the run, or the reference section when there is no run.
    fn profile(&self) -> pme_tube::Result<&Profile> {
        if let Some(r) = &self.run {
            return Ok(&r.profile);
        }
        self.base
            .get_or_init(|| relax_profile(PI, 2.0, 64, 1e-12))
            .as_ref()
            .map_err(clone_err)
    }

    fn wave(&self) -> pme_tube::Result<&Wave> {
        self.wave
            .get_or_init(|| {
                let p = self.profile()?;
                let c = self.cfg;
                normalize_wave(&relax_wave(
                    p,
                    p.cstar,
                    (c.xi_min, c.xi_max),
                    c.n_xi,
                    c.wave_tol,
                )?)
            })
            .as_ref()
            .map_err(clone_err)
    }

    fn audit(&self, a: Audit) -> pme_tube::Result<Verdict> {
        match a {
            Audit::Speed => self.speed(),
            Audit::Oracle => self.oracle(),
            Audit::Scaling => self.scaling(),
            Audit::Inner => self.inner(),
            Audit::Outer => self.outer(),
            Audit::FrontLaw => self.front_law(),
            Audit::Barriers => self.barriers(),
            Audit::Ordering => self.ordering(),
            Audit::Concavity => self.concavity(),
            Audit::Wave => self.wave_audit(),
            Audit::Stepper => self.stepper(),
        }
    }

    fn speed(&self) -> pme_tube::Result<Verdict> {
        let r = self.run();
        let (slope, _, resid) = measure_speed(&r.fronts, (self.cfg.speed_from, r.tau_end()))?;
        let rel = (slope - r.profile.cstar).abs() / r.profile.cstar;
        Ok((
            rel <= self.cfg.speed_tol,
            format!(
                "slope {slope:.4} vs c* {:.4} ({:.2}%, tol {}%), fit residual {resid:.2e}",
                r.profile.cstar,
                100.0 * rel,
                100.0 * self.cfg.speed_tol
            ),
        ))
    }

    fn oracle(&self) -> pme_tube::Result<Verdict> {
        let (n, tol) = (self.cfg.oracle_n, self.cfg.oracle_tol);
        let (mut ok, mut worst, mut ratios) = (true, 0.0f64, Vec::new());
        for m in [1.5, 2.0, 3.0] {
            for l in [1.0, PI] {
                let err = |n| -> pme_tube::Result<f64> {
                    Ok(interior_distance(
                        &relax_profile(l, m, n, 1e-11)?,
                        &shoot_profile(l, m, n)?,
                    ))
                };
                let (coarse, fine) = (err(n)?, err(2 * n - 1)?);
                let ratio = coarse / fine;
                worst = worst.max(fine);
                ok &= fine <= tol && (3.0..=5.0).contains(&ratio);
                ratios.push(format!("{ratio:.2}"));
            }
        }
        Ok((
            ok,
            format!(
                "max distance {worst:.2e} (tol {tol:e}); refinement ratios [{}]",
                ratios.join(", ")
            ),
        ))
    }

    fn scaling(&self) -> pme_tube::Result<Verdict> {
        let p = self.profile()?;
        let (l, m, n) = (p.grid.length(), p.m, 2 * self.cfg.oracle_n - 1);
        let predicted = dilate_profile(&shoot_profile(l, m, n)?, 2.0)?;
        let direct = relax_profile(2.0 * l, m, n, 1e-11)?;
        let d = interior_distance(&predicted, &direct);
        Ok((
            d <= self.cfg.oracle_tol,
            format!(
                "dilated by 2 vs direct solve {d:.2e} (tol {:e})",
                self.cfg.oracle_tol
            ),
        ))
    }

    fn inner(&self) -> pme_tube::Result<Verdict> {
        let r = self.run();
        let cstar = r.profile.cstar;
        let series = error_series(&r.snapshots, &r.profile, self.cfg.inner_factor * cstar)?;
        let last = series
            .samples
            .last()
            .and_then(|s| s.error)
            .unwrap_or(f64::INFINITY);
        let burn = burn_in(&series);
        let (trend, pairs) = trend_check(&series, burn.unwrap_or(f64::INFINITY), 1.0);
        let sharp = error_series(&r.snapshots, &r.profile, cstar)?;
        let floor = sharp
            .samples
            .iter()
            .filter_map(|s| s.error)
            .fold(f64::INFINITY, f64::min);
        let ok = last <= self.cfg.inner_tol
            && burn.is_some()
            && pairs > 0
            && trend <= 0.0
            && floor >= self.cfg.sharpness_floor;
        Ok((
            ok,
            format!(
                "error at tau = {}: {last:.3e} (tol {}); burn-in {burn:?}; worst lag-1 increase {trend:.2e} over {pairs} pairs; min error at c*: {floor:.3} (floor {})",
                r.tau_end(),
                self.cfg.inner_tol,
                self.cfg.sharpness_floor
            ),
        ))
    }

    fn outer(&self) -> pme_tube::Result<Verdict> {
        let r = self.run();
        let c = self.cfg.outer_factor * r.profile.cstar;
        let samples = r
            .snapshots
            .iter()
            .map(|s| outer_support_max(s, c))
            .collect::<pme_tube::Result<Vec<_>>>()?;
        let inconclusive = samples.iter().any(|s| s.inconclusive);
        let k = samples
            .iter()
            .rposition(|s| s.value != 0.0)
            .map_or(0, |k| k + 1);
        let tau_c = samples.get(k).map(|s| s.tau);
        Ok((
            !inconclusive && tau_c.is_some_and(|t| t < r.tau_end()),
            format!("zero for all tau >= tau_c = {tau_c:?}; inconclusive samples: {inconclusive}"),
        ))
    }

    fn front_law(&self) -> pme_tube::Result<Verdict> {
        let r = self.run();
        let a = front_law_audit(
            &r.fronts,
            r.profile.cstar,
            self.wave()?,
            self.cfg.front_from,
        )?;
        Ok((
            a.ratio_error <= self.cfg.front_tol && a.c_emp.is_finite() && a.non_drifting,
            format!(
                "Gamma/tau {:.4} ({:.2}%, tol {}%); C_emp {:.3}; non-drifting {}; envelope gap {:.2e}",
                a.final_ratio,
                100.0 * a.ratio_error,
                100.0 * self.cfg.front_tol,
                a.c_emp,
                a.non_drifting,
                a.envelope_gap
            ),
        ))
    }

    fn barriers(&self) -> pme_tube::Result<Verdict> {
        let (m, c, f0, tau_end) = (2.0, 1.0, 0.5, self.cfg.barrier_tau_end);
        let sup = integrate_barrier(&BarrierParams::super_(m, c, f0, 0.0)?, tau_end, 1e-3)?;
        let mut rk4 = 0.0f64;
        for k in 0..sup.tau.len() {
            let (f, g) = super_closed_form(f0, 0.0, c, m, sup.tau[k])?;
            rk4 = rk4.max((sup.f[k] - f).abs()).max((sup.g[k] - g).abs());
        }
        let sub = integrate_barrier(
            &BarrierParams::sub(m, c, f0, 0.0, self.cfg.exact_delta0)?,
            tau_end,
            1e-3,
        )?;
        let gap = |p: &Barrier| {
            (p.shift_series().last().copied().unwrap_or(f64::NAN) - p.predicted_shift).abs()
        };
        let (sup_gap, sub_gap) = (gap(&sup), gap(&sub));
        let tol = self.cfg.shift_tol;
        Ok((
            rk4 <= 1e-8 && sup_gap <= tol && sub_gap <= tol,
            format!("RK4 vs closed form {rk4:.2e} (tol 1e-8); shift gap at tau = {tau_end}: super {sup_gap:.2e}, sub {sub_gap:.2e} (tol {tol:e})"),
        ))
    }

    fn ordering(&self) -> pme_tube::Result<Verdict> {
        let (r, cfg) = (self.run(), self.cfg);
        let (m, c) = (r.profile.m, r.profile.cstar);
        let sub = integrate_barrier(
            &BarrierParams::sub(m, c, cfg.sub_f0, 0.0, cfg.sub_delta0)?,
            cfg.barrier_tau_end,
            cfg.barrier_dtau,
        )?;
        let sup = integrate_barrier(
            &BarrierParams::super_(m, c, cfg.super_f0, cfg.super_g0)?,
            cfg.barrier_tau_end,
            cfg.barrier_dtau,
        )?;
        let a = search_alignment(
            &r.snapshots,
            &sub,
            &sup,
            self.wave()?,
            0.0,
            &cfg.big_t,
            &cfg.tau1,
        )?;
        Ok((
            a.passed(),
            format!(
                "T = {}, tau1 = {}; violations sub {:.2e}, super {:.2e} (tol {:.2e}); worst {:?}",
                a.alignment.big_t,
                a.alignment.tau1,
                a.sub_violation,
                a.super_violation,
                a.tolerance,
                a.worst
            ),
        ))
    }

    fn concavity(&self) -> pme_tube::Result<Verdict> {
        let f = &self.cfg.flat;
        let flat = flat_problem_checks(&FlatProblem {
            m: f.m,
            half_width: f.half_width,
            k: f.k,
            eps: f.eps,
            inner: f.inner,
            n: f.n,
            dtau: f.dtau,
            tau_end: f.tau_end,
        })?;
        let r = self.run();
        let station = self.cfg.rate_station.unwrap_or(r.profile.grid.n() / 2);
        let fit = exp_rate_fit(&r.snapshots, &r.profile, station, self.cfg.rate_window)?;
        Ok((
            flat.passed() && fit.slope < 0.0 && fit.r_squared >= self.cfg.rate_min_r2,
            format!(
                "flat problem concave {} monotone {} exponential {}; centerline rate {:.3} with R^2 {:.4}",
                flat.concave, flat.monotone, flat.exponential, fit.slope, fit.r_squared
            ),
        ))
    }

    fn wave_audit(&self) -> pme_tube::Result<Verdict> {
        let inv = self.wave()?.check_invariants();
        let p = self.profile()?;
        // drift signs on a coarser section: only the sign matters
        let coarse = relax_profile(p.grid.length(), p.m, 33, 1e-12)?;
        let window = (self.cfg.xi_min, self.cfg.xi_max);
        let slow = measure_drift(&coarse, 0.8 * coarse.cstar, window, self.cfg.n_xi, 20.0)?;
        let fast = measure_drift(&coarse, 1.2 * coarse.cstar, window, self.cfg.n_xi, 20.0)?;
        Ok((
            inv.passed() && slow > 0.0 && fast < 0.0,
            format!(
                "monotone {}, plateau {}, compact {}, normalized {}; drift at 0.8c* {slow:+.3}, at 1.2c* {fast:+.3}",
                inv.monotone(),
                inv.plateau(),
                inv.compact(),
                inv.normalization()
            ),
        ))
    }

    fn stepper(&self) -> pme_tube::Result<Verdict> {
        let m = 2.0;
        let barenblatt = |y: f64, t: f64| {
            let a = 1.0 / (m + 1.0);
            let kappa = (m - 1.0) / (2.0 * m * (m + 1.0));
            t.powf(-a)
                * (1.0 - kappa * y * y * t.powf(-2.0 * a))
                    .max(0.0)
                    .powf(1.0 / (m - 1.0))
        };
        let mut errors = Vec::new();
        for ny in [161, 321, 641] {
            let grid = TubeGrid::new(SectionGrid::new(1000.0, 3)?, -8.0, 8.0, ny)?;
            let u0 = TubeField::from_fn(grid, m, Variable::Physical, |_, y| barenblatt(y, 1.0))?
                .with_time(1.0)
                .with_boundary(Boundary {
                    z: ZBoundary::Reflecting,
                    y: YBoundary::Zero,
                });
            let rec = run_evolution(&RunConfig::new(u0, 2.0, 1.0), &mut [])?;
            let u = rec.snapshots.last().expect("end snapshot");
            errors.push((0..ny).fold(0.0f64, |a, j| {
                a.max((u.value(1, j).powf(m) - barenblatt(grid.y(j), 2.0).powf(m)).abs())
            }));
        }
        let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        let shown: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
        Ok((
            ratios.iter().all(|r| (3.5..=4.5).contains(r)),
            format!(
                "sup |u^m - U^m| errors [{}], ratios {ratios:.2?} (band [3.5, 4.5])",
                shown.join(", ")
            ),
        ))
    }
}

fn clone_err(e: &pme_tube::Error) -> pme_tube::Error {
    pme_tube::Error::Estimation(e.to_string())
}

#[derive(Serialize)]
struct AuditResult {
    criterion: usize,
    audit: Audit,
    title: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

fn threads() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run(cfg: &VerifyConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let run = match &cfg.run {
        Some(dir) if cfg.audits.iter().any(|a| a.needs_run()) => {
            Some(RunData::load(dir, cfg.front_threshold)?)
        }
        _ => None,
    };
    prepare_out(out)?;
    let mut rec = Recorder::new("verify", cfg)?;
    let ctx = Audits {
        cfg,
        run,
        base: OnceLock::new(),
        wave: OnceLock::new(),
    };
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    rec.timed("audits", || {
        std::thread::scope(|s| {
            for _ in 0..threads().min(cfg.audits.len()) {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&a) = cfg.audits.get(k) else { break };
                    let t = std::time::Instant::now();
                    let (passed, detail) = ctx
                        .audit(a)
                        .unwrap_or_else(|e| (false, format!("error: {e}")));
                    results
                        .lock()
                        .expect("no poisoned audits")
                        .push(AuditResult {
                            criterion: a.number(),
                            audit: a,
                            title: a.title(),
                            passed,
                            detail,
                            seconds: t.elapsed().as_secs_f64(),
                        });
                });
            }
        })
    });
    let mut results = results.into_inner().expect("no poisoned audits");
    results.sort_by_key(|r| r.criterion);
    let mut summary = String::new();
    for r in &results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        summary += &format!(
            "criterion {} {}: {verdict} {}\n",
            r.criterion, r.title, r.detail
        );
        rec.check(
            &format!("criterion {} {}", r.criterion, r.title),
            r.passed,
            r.detail.clone(),
        );
    }
    io::write_text(&out.join("summary.txt"), &summary)?;
    io::write_json(&out.join("verify.json"), &results)?;
    rec.finish(out)
}
