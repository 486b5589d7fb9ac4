mod commands;
mod config;
mod datum;
mod exit;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pme_tube::barriers::BarrierKind;

use config::{Audit, DatumKind, ExperimentConfig};

/// Porous medium flow in an infinite tube: stationary section profiles,
/// rescaled evolution, traveling waves, barrier paths and long-time audits.
///
/// Set PME_TUBE_THREADS to cap the number of worker threads used by `verify`.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: `pme-out/<command>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the effective config to this path after applying flags.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary profile by shooting and by relaxation, with cross-checks.
    Section(SectionArgs),
    /// Rescaled evolution from a built-in or imported initial datum.
    Evolve(EvolveArgs),
    /// Traveling wave by comoving relaxation.
    Wave(WaveArgs),
    /// Amplitude/shift path of a sub- or super-barrier.
    Barriers(BarriersArgs),
    /// PASS/FAIL audits, optionally against the output of `evolve`.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SectionArgs {
    /// Section length.
    #[arg(long = "L", visible_alias = "length")]
    length: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    /// Nodes including both ends.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Also check the scaling law on the section dilated by this factor.
    #[arg(long)]
    dilate: Option<f64>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long = "L", visible_alias = "length")]
    length: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Half-length of the y window.
    #[arg(long)]
    y_extent: Option<f64>,
    /// Physical start time (default: smallest admissible).
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long, value_enum)]
    datum: Option<DatumKind>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
    /// `z,y,value` file with physical values on the tube grid.
    #[arg(long)]
    datum_csv: Option<PathBuf>,
    /// Evolve in a frame moving with this speed.
    #[arg(long)]
    frame_speed: Option<f64>,
    #[arg(long)]
    tau_end: Option<f64>,
    #[arg(long)]
    snapshot_interval: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    /// Also write every snapshot as CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct WaveArgs {
    #[arg(long = "L", visible_alias = "length")]
    length: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    nz: Option<usize>,
    /// Frame speed.
    #[arg(long, conflicts_with = "auto_cstar")]
    c: Option<f64>,
    /// Use the critical speed of the section (the default).
    #[arg(long)]
    auto_cstar: bool,
    #[arg(long, allow_hyphen_values = true)]
    xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_max: Option<f64>,
    #[arg(long)]
    n_xi: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sub,
    Super,
}

#[derive(Args)]
struct BarriersArgs {
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    cstar: Option<f64>,
    #[arg(long = "L", visible_alias = "length")]
    length: Option<f64>,
    #[arg(long)]
    f0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g0: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long)]
    tau_end: Option<f64>,
    #[arg(long)]
    dtau: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Output directory of an `evolve` command.
    #[arg(long)]
    run: Option<PathBuf>,
    /// Run every audit.
    #[arg(long, conflicts_with = "audit")]
    all: bool,
    /// Run only these audits (repeatable).
    #[arg(long, value_enum)]
    audit: Vec<Audit>,
    #[arg(long)]
    speed_tol: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Section(_) => "section",
            Command::Evolve(_) => "evolve",
            Command::Wave(_) => "wave",
            Command::Barriers(_) => "barriers",
            Command::Verify(_) => "verify",
        }
    }

    /// Applies the command-line flags on top of the file values.
    fn apply(self, cfg: &mut ExperimentConfig) {
        match self {
            Command::Section(a) => {
                let c = &mut cfg.section;
                set(&mut c.length, a.length);
                set(&mut c.m, a.m);
                set(&mut c.n, a.n);
                set(&mut c.tol, a.tol);
                if a.dilate.is_some() {
                    c.dilate = a.dilate;
                }
            }
            Command::Evolve(a) => {
                let c = &mut cfg.evolve;
                set(&mut c.length, a.length);
                set(&mut c.m, a.m);
                set(&mut c.nz, a.nz);
                set(&mut c.ny, a.ny);
                set(&mut c.y_extent, a.y_extent);
                if a.t0.is_some() {
                    c.t0 = a.t0;
                }
                set(&mut c.datum.kind, a.datum);
                set(&mut c.datum.amplitude, a.amplitude);
                set(&mut c.datum.width, a.width);
                set(&mut c.datum.separation, a.separation);
                if a.datum_csv.is_some() {
                    c.datum.path = a.datum_csv;
                    if a.datum.is_none() {
                        c.datum.kind = DatumKind::Csv;
                    }
                }
                if a.frame_speed.is_some() {
                    c.frame_speed = a.frame_speed;
                }
                set(&mut c.tau_end, a.tau_end);
                set(&mut c.snapshot_interval, a.snapshot_interval);
                set(&mut c.safety, a.safety);
                c.csv_export |= a.csv;
            }
            Command::Wave(a) => {
                let c = &mut cfg.wave;
                set(&mut c.length, a.length);
                set(&mut c.m, a.m);
                set(&mut c.nz, a.nz);
                if a.auto_cstar {
                    c.c = None;
                }
                if a.c.is_some() {
                    c.c = a.c;
                }
                set(&mut c.xi_min, a.xi_min);
                set(&mut c.xi_max, a.xi_max);
                set(&mut c.n_xi, a.n_xi);
                set(&mut c.tol, a.tol);
            }
            Command::Barriers(a) => {
                let c = &mut cfg.barriers;
                set(
                    &mut c.kind,
                    a.kind.map(|k| match k {
                        KindArg::Sub => BarrierKind::Sub,
                        KindArg::Super => BarrierKind::Super,
                    }),
                );
                set(&mut c.m, a.m);
                if a.cstar.is_some() {
                    c.cstar = a.cstar;
                }
                set(&mut c.length, a.length);
                set(&mut c.f0, a.f0);
                set(&mut c.g0, a.g0);
                if a.delta0.is_some() {
                    c.delta0 = a.delta0;
                }
                set(&mut c.tau_end, a.tau_end);
                set(&mut c.dtau, a.dtau);
            }
            Command::Verify(a) => {
                let c = &mut cfg.verify;
                if a.run.is_some() {
                    c.run = a.run;
                }
                if a.all {
                    c.audits = Audit::ALL.to_vec();
                } else if !a.audit.is_empty() {
                    let mut list = a.audit;
                    list.sort();
                    list.dedup();
                    c.audits = list;
                }
                set(&mut c.speed_tol, a.speed_tol);
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let name = cli.command.name();
    let out = cli
        .out
        .unwrap_or_else(|| PathBuf::from("pme-out").join(name));
    cli.command.apply(&mut cfg);
    if let Some(path) = &cli.save_config {
        pme_tube::io::write_json(path, &cfg)?;
    }
    let manifest = match name {
        "section" => commands::section::run(&cfg.section, &out)?,
        "evolve" => commands::evolve::run(&cfg.evolve, &out)?,
        "wave" => commands::wave::run(&cfg.wave, &out)?,
        "barriers" => commands::barriers::run(&cfg.barriers, &out)?,
        _ => commands::verify::run(&cfg.verify, &out)?,
    };
    println!("manifest: {}", out.join(manifest::FILE).display());
    Ok(manifest.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(exit::CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e))
        }
    }
}
