//! Experiment configuration: one JSON document with an optional section per
//! command. Unknown keys are rejected everywhere; missing keys take defaults.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pme_tube::barriers::BarrierKind;
use serde::{Deserialize, Serialize};

use crate::exit::Invalid;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub section: SectionConfig,
    pub evolve: EvolveConfig,
    pub wave: WaveConfig,
    pub barriers: BarriersConfig,
    pub verify: VerifyConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| Invalid(format!("config {}: {e}", path.display())).into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectionConfig {
    #[serde(rename = "L")]
    pub length: f64,
    pub m: f64,
    pub n: usize,
    pub tol: f64,
    /// Also check the scaling law against a direct solve on the dilated section.
    pub dilate: Option<f64>,
    /// Largest accepted relative sup distance between the two solvers.
    pub agreement_tol: f64,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            length: PI,
            m: 2.0,
            n: 201,
            tol: 1e-11,
            dilate: None,
            agreement_tol: 1e-3,
        }
    }
}

impl SectionConfig {
    pub fn validate(&self) -> Result<()> {
        positive("L", self.length)?;
        exponent(self.m)?;
        at_least("n", self.n, 5)?;
        positive("tol", self.tol)?;
        positive("agreement_tol", self.agreement_tol)?;
        if let Some(lam) = self.dilate {
            positive("dilate", lam)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DatumKind {
    /// `a Phi(z) (1 - (y/w)^2)_+`
    #[default]
    Bump,
    /// `a Phi(z)` on `|y| <= w`
    Plateau,
    /// two bumps centred at `y = -s/2` and `y = s/2`
    TwoBump,
    /// physical values read from a `z,y,value` file on the tube grid
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatumConfig {
    pub kind: DatumKind,
    pub amplitude: f64,
    pub width: f64,
    pub separation: f64,
    pub path: Option<PathBuf>,
}

impl Default for DatumConfig {
    fn default() -> Self {
        Self {
            kind: DatumKind::Bump,
            amplitude: 0.5,
            width: 0.5,
            separation: 4.0,
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    #[serde(rename = "L")]
    pub length: f64,
    pub m: f64,
    pub nz: usize,
    pub ny: usize,
    /// The tube is cut to `|y| <= y_extent`.
    pub y_extent: f64,
    /// Start time of the physical solution; `None` picks the smallest admissible one.
    pub t0: Option<f64>,
    pub datum: DatumConfig,
    /// Comoving frame speed; `None` keeps the lab frame.
    pub frame_speed: Option<f64>,
    /// End on the rescaled clock `tau = ln(t + t0)`; values below `ln t0`
    /// keep only the initial snapshot.
    pub tau_end: f64,
    pub snapshot_interval: f64,
    pub safety: f64,
    pub profile_tol: f64,
    /// Truncation-guard level relative to `sup Phi`.
    pub support_threshold: f64,
    /// Front level relative to `sup Phi`.
    pub front_threshold: f64,
    pub csv_export: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            length: PI,
            m: 2.0,
            nz: 64,
            ny: 1024,
            y_extent: 40.0,
            t0: None,
            datum: DatumConfig::default(),
            frame_speed: None,
            tau_end: 20.0,
            snapshot_interval: 0.25,
            safety: 0.9,
            profile_tol: 1e-12,
            support_threshold: 1e-10,
            front_threshold: pme_tube::waves::FRONT_THRESHOLD,
            csv_export: false,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        positive("L", self.length)?;
        exponent(self.m)?;
        at_least("nz", self.nz, 5)?;
        at_least("ny", self.ny, 16)?;
        positive("y_extent", self.y_extent)?;
        if let Some(t0) = self.t0 {
            positive("t0", t0)?;
        }
        if let Some(c) = self.frame_speed {
            finite("frame_speed", c)?;
        }
        nonnegative("tau_end", self.tau_end)?;
        positive("snapshot_interval", self.snapshot_interval)?;
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Invalid(format!("safety must lie in (0, 1], got {}", self.safety)).into());
        }
        positive("profile_tol", self.profile_tol)?;
        positive("support_threshold", self.support_threshold)?;
        positive("front_threshold", self.front_threshold)?;
        let d = &self.datum;
        match d.kind {
            DatumKind::Csv => {
                if d.path.is_none() {
                    return Err(Invalid("datum kind csv needs a path".into()).into());
                }
            }
            _ => {
                positive("datum.amplitude", d.amplitude)?;
                positive("datum.width", d.width)?;
                nonnegative("datum.separation", d.separation)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveConfig {
    #[serde(rename = "L")]
    pub length: f64,
    pub m: f64,
    pub nz: usize,
    /// Frame speed; `None` uses the critical speed of the section.
    pub c: Option<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    pub tol: f64,
    pub profile_tol: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            length: PI,
            m: 2.0,
            nz: 64,
            c: None,
            xi_min: -20.0,
            xi_max: 10.0,
            n_xi: 301,
            tol: 1e-9,
            profile_tol: 1e-12,
        }
    }
}

impl WaveConfig {
    pub fn validate(&self) -> Result<()> {
        positive("L", self.length)?;
        exponent(self.m)?;
        at_least("nz", self.nz, 5)?;
        if let Some(c) = self.c {
            positive("c", c)?;
        }
        window("xi window", (self.xi_min, self.xi_max))?;
        at_least("n_xi", self.n_xi, 8)?;
        positive("tol", self.tol)?;
        positive("profile_tol", self.profile_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarriersConfig {
    pub kind: BarrierKind,
    pub m: f64,
    /// `None` takes the critical speed of `(0, L)`.
    pub cstar: Option<f64>,
    #[serde(rename = "L")]
    pub length: f64,
    pub f0: f64,
    pub g0: f64,
    /// Sub-barrier only; `None` takes the largest admissible value (capped at 1/2).
    pub delta0: Option<f64>,
    pub tau_end: f64,
    pub dtau: f64,
    /// Accepted gap between the final and the limiting shift.
    pub shift_tol: f64,
}

impl Default for BarriersConfig {
    fn default() -> Self {
        Self {
            kind: BarrierKind::Super,
            m: 2.0,
            cstar: None,
            length: PI,
            f0: 0.5,
            g0: 0.0,
            delta0: None,
            tau_end: 30.0,
            dtau: 1e-3,
            shift_tol: 1e-3,
        }
    }
}

impl BarriersConfig {
    pub fn validate(&self) -> Result<()> {
        exponent(self.m)?;
        if let Some(c) = self.cstar {
            positive("cstar", c)?;
        }
        positive("L", self.length)?;
        if !(self.f0 > 0.0 && self.f0 < 1.0) {
            return Err(Invalid(format!("f0 must lie in (0, 1), got {}", self.f0)).into());
        }
        finite("g0", self.g0)?;
        if let Some(d) = self.delta0 {
            nonnegative("delta0", d)?;
        }
        positive("tau_end", self.tau_end)?;
        positive("dtau", self.dtau)?;
        positive("shift_tol", self.shift_tol)
    }
}

/// The audits `verify` knows, numbered as in the acceptance list.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Audit {
    Speed,
    Oracle,
    Scaling,
    Inner,
    Outer,
    FrontLaw,
    Barriers,
    Ordering,
    Concavity,
    Wave,
    Stepper,
}

impl Audit {
    pub const ALL: [Audit; 11] = [
        Audit::Speed,
        Audit::Oracle,
        Audit::Scaling,
        Audit::Inner,
        Audit::Outer,
        Audit::FrontLaw,
        Audit::Barriers,
        Audit::Ordering,
        Audit::Concavity,
        Audit::Wave,
        Audit::Stepper,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).expect("listed") + 1
    }

    pub fn needs_run(self) -> bool {
        matches!(
            self,
            Audit::Speed
                | Audit::Inner
                | Audit::Outer
                | Audit::FrontLaw
                | Audit::Ordering
                | Audit::Concavity
        )
    }

    pub fn title(self) -> &'static str {
        match self {
            Audit::Speed => "speed formula",
            Audit::Oracle => "stationary oracle equivalence",
            Audit::Scaling => "scaling identity",
            Audit::Inner => "inner relative error",
            Audit::Outer => "outer vanishing",
            Audit::FrontLaw => "free-boundary law",
            Audit::Barriers => "barrier ODE exactness",
            Audit::Ordering => "ordering audit",
            Audit::Concavity => "concavity and rate",
            Audit::Wave => "wave invariants",
            Audit::Stepper => "stepper oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlatConfig {
    pub m: f64,
    pub half_width: f64,
    pub k: f64,
    pub eps: f64,
    pub inner: f64,
    pub n: usize,
    pub dtau: f64,
    pub tau_end: f64,
}

impl Default for FlatConfig {
    fn default() -> Self {
        Self {
            m: 2.0,
            half_width: 2.0,
            k: 1.0,
            eps: 0.1,
            inner: 1.0,
            n: 81,
            dtau: 5e-4,
            tau_end: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Output directory of an `evolve` command.
    pub run: Option<PathBuf>,
    pub audits: Vec<Audit>,
    pub speed_from: f64,
    pub speed_tol: f64,
    /// Window speeds as multiples of the critical speed.
    pub inner_factor: f64,
    pub outer_factor: f64,
    pub inner_tol: f64,
    pub sharpness_floor: f64,
    pub front_from: f64,
    pub front_tol: f64,
    pub front_threshold: f64,
    pub rate_station: Option<usize>,
    pub rate_window: (f64, f64),
    pub rate_min_r2: f64,
    pub oracle_n: usize,
    pub oracle_tol: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    pub wave_tol: f64,
    pub sub_f0: f64,
    pub sub_delta0: f64,
    pub super_f0: f64,
    pub super_g0: f64,
    pub barrier_tau_end: f64,
    pub barrier_dtau: f64,
    pub big_t: Vec<f64>,
    pub tau1: Vec<f64>,
    /// Sub-barrier `delta0` of the shift-limit check.
    pub exact_delta0: f64,
    pub shift_tol: f64,
    pub flat: FlatConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            run: None,
            audits: Audit::ALL.to_vec(),
            speed_from: 5.0,
            speed_tol: 0.05,
            inner_factor: 0.5,
            outer_factor: 1.5,
            inner_tol: 0.05,
            sharpness_floor: 0.5,
            front_from: 5.0,
            front_tol: 0.05,
            front_threshold: pme_tube::waves::FRONT_THRESHOLD,
            rate_station: None,
            rate_window: (3.0, 12.0),
            rate_min_r2: 0.99,
            oracle_n: 101,
            oracle_tol: 1e-3,
            xi_min: -20.0,
            xi_max: 10.0,
            n_xi: 301,
            wave_tol: 1e-9,
            sub_f0: 0.5,
            sub_delta0: 0.2,
            super_f0: 0.9,
            super_g0: 5.0,
            barrier_tau_end: 30.0,
            barrier_dtau: 0.01,
            big_t: vec![0.0, 1.0, 2.0, 5.0],
            tau1: vec![0.0, 1.0, 2.0],
            exact_delta0: 0.05,
            shift_tol: 1e-3,
            flat: FlatConfig::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.audits.is_empty() {
            return Err(Invalid("no audits selected".into()).into());
        }
        if self.run.is_none() {
            if let Some(a) = self.audits.iter().find(|a| a.needs_run()) {
                return Err(Invalid(format!("audit {a:?} needs --run <evolve output dir>")).into());
            }
        }
        nonnegative("speed_from", self.speed_from)?;
        for (name, x) in [
            ("speed_tol", self.speed_tol),
            ("inner_factor", self.inner_factor),
            ("outer_factor", self.outer_factor),
            ("inner_tol", self.inner_tol),
            ("sharpness_floor", self.sharpness_floor),
            ("front_tol", self.front_tol),
            ("front_threshold", self.front_threshold),
            ("rate_min_r2", self.rate_min_r2),
            ("oracle_tol", self.oracle_tol),
            ("wave_tol", self.wave_tol),
            ("barrier_tau_end", self.barrier_tau_end),
            ("barrier_dtau", self.barrier_dtau),
            ("shift_tol", self.shift_tol),
        ] {
            positive(name, x)?;
        }
        nonnegative("front_from", self.front_from)?;
        window("rate_window", self.rate_window)?;
        window("xi window", (self.xi_min, self.xi_max))?;
        at_least("oracle_n", self.oracle_n, 9)?;
        at_least("n_xi", self.n_xi, 8)?;
        if self.big_t.is_empty() || self.tau1.is_empty() {
            return Err(Invalid("alignment search needs candidates".into()).into());
        }
        Ok(())
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Invalid(format!("{name} must be finite, got {x}")).into())
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Invalid(format!("{name} must be positive, got {x}")).into())
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Invalid(format!("{name} must be nonnegative, got {x}")).into())
    }
}

fn at_least(name: &str, n: usize, min: usize) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(Invalid(format!("{name} must be at least {min}, got {n}")).into())
    }
}

fn window(name: &str, (a, b): (f64, f64)) -> Result<()> {
    finite(name, a)?;
    finite(name, b)?;
    if a < b {
        Ok(())
    } else {
        Err(Invalid(format!("{name} must be increasing, got ({a}, {b})")).into())
    }
}

fn exponent(m: f64) -> Result<()> {
    pme_tube::Exponent::new(m)?;
    Ok(())
}
