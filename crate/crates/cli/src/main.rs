use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use asep_coupling::diagnostics::{OrderingKind, Verdict};
use asep_coupling::dynamics::Direction;
use asep_coupling::harness::{
    self, Coupling, DiagnosticSpec, ExperimentConfig, InitialSpec, LatticeSpec, ModelSpec, TimeSpec,
};
use asep_coupling::initdata::{approx_viable, ProfileSpec};
use asep_coupling::{BoundaryMode, ClockScheme, DriftSign, HeightSnapshot, Window};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "asep-coupling",
    version,
    about = "Coupled weakly asymmetric exclusion simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Lattice half-width in sites.
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Zero,
    Tanh,
    SinDamped,
}

impl Profile {
    fn spec(self) -> ProfileSpec {
        match self {
            Profile::Zero => ProfileSpec::Zero,
            Profile::Tanh => ProfileSpec::Tanh { amplitude: 1.0 },
            Profile::SinDamped => ProfileSpec::SinDamped,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Single-replica ASEP run from Bernoulli(rho) or approximated data.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Microscopic horizon.
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_enum, default_value = "tanh")]
        profile: Profile,
        #[arg(long)]
        periodic: bool,
    },
    /// Two coupled replicas from approximated profiles plus their max and min.
    Couple {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, value_enum, default_value = "tanh")]
        first: Profile,
        #[arg(long, value_enum, default_value = "sin-damped")]
        second: Profile,
        /// Independent clocks instead of the basic coupling.
        #[arg(long)]
        independent: bool,
    },
    /// Print the verdicts of a finished run; fails if any check failed.
    Diagnose { dir: PathBuf },
    /// Print the lattice approximation of a profile as JSON.
    Approx {
        #[arg(long, value_enum, default_value = "tanh")]
        profile: Profile,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.04)]
        epsilon: f64,
        #[arg(long, default_value_t = 64)]
        window: i64,
    },
    /// Run a named catalog scenario (`list` prints the names).
    Scenario {
        name: String,
        #[command(flatten)]
        common: Common,
        /// Write the scenario config as TOML instead of running it.
        #[arg(long)]
        dump: bool,
    },
    /// Run an experiment from a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn apply(cfg: &mut ExperimentConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.ensemble {
        cfg.ensemble = n;
    }
    if let Some(w) = c.window {
        cfg.lattice.half_width = w;
        cfg.lattice.observation_half_width = cfg.lattice.observation_half_width.min(w);
    }
    if let Some(e) = c.epsilon {
        match &mut cfg.model {
            ModelSpec::Asep { epsilon, .. }
            | ModelSpec::Ssep { epsilon }
            | ModelSpec::AsepQj { epsilon, .. } => *epsilon = e,
        }
    }
}

fn light_cone(half_width: i64, horizon: f64, boundary: BoundaryMode) -> i64 {
    if boundary == BoundaryMode::Frozen {
        half_width
            .saturating_sub((4.0 * horizon).ceil() as i64 + 8)
            .max(0)
    } else {
        half_width
    }
}

fn adhoc(name: &str, c: &Common, horizon: f64, boundary: BoundaryMode) -> ExperimentConfig {
    let epsilon = c.epsilon.unwrap_or(0.04);
    let half_width = c.window.unwrap_or((4.0 * horizon).ceil() as i64 + 40);
    ExperimentConfig {
        schema_version: harness::SCHEMA_VERSION,
        name: name.into(),
        seed: c.seed.unwrap_or(1),
        ensemble: c.ensemble.unwrap_or(1),
        record: 1,
        coupling: Coupling::Coupled,
        clocks: ClockScheme::PerBondQueue,
        model: ModelSpec::Asep {
            epsilon,
            drift: Direction::Right,
        },
        lattice: LatticeSpec {
            half_width,
            boundary,
            observation_half_width: light_cone(half_width, horizon, boundary),
        },
        time: TimeSpec {
            horizon,
            snapshot_every: horizon / 10.0,
            snapshot_times: Vec::new(),
        },
        initial: Vec::new(),
        drift_sign: DriftSign::Plus,
        diagnostics: Vec::new(),
    }
}

fn print_verdicts(verdicts: &[Verdict]) -> bool {
    for v in verdicts {
        println!(
            "{} {} estimate={:.6} stderr={:.3e} threshold={}",
            if v.pass { "PASS" } else { "FAIL" },
            v.check,
            v.estimate,
            v.stderr,
            v.threshold
        );
    }
    verdicts.iter().all(|v| v.pass)
}

fn run(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<bool> {
    let manifest = harness::run_experiment(cfg, out, threads)?;
    let verdicts = read_verdicts(out)?;
    print_verdicts(&verdicts);
    println!(
        "{}: {} trajectories, outputs in {}",
        manifest.name,
        cfg.ensemble,
        out.display()
    );
    Ok(manifest.pass)
}

fn read_verdicts(dir: &Path) -> Result<Vec<Verdict>> {
    let path = dir.join(harness::VERDICT_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            common,
            horizon,
            rho,
            profile,
            periodic,
        } => {
            let boundary = if periodic {
                BoundaryMode::Periodic
            } else {
                BoundaryMode::Frozen
            };
            let mut cfg = adhoc("simulate", &common, horizon, boundary);
            cfg.initial = vec![match rho {
                Some(rho) => InitialSpec::Bernoulli { rho },
                None => InitialSpec::Approx {
                    profile: profile.spec(),
                    delta: 0.5,
                },
            }];
            run(&cfg, &common.out, common.threads)
        }
        Command::Couple {
            common,
            horizon,
            first,
            second,
            independent,
        } => {
            let mut cfg = adhoc("couple", &common, horizon, BoundaryMode::Frozen);
            if independent {
                cfg.coupling = Coupling::Independent;
            }
            cfg.initial = vec![
                InitialSpec::Approx {
                    profile: first.spec(),
                    delta: 0.5,
                },
                InitialSpec::Approx {
                    profile: second.spec(),
                    delta: 0.5,
                },
                InitialSpec::Max { of: [0, 1] },
                InitialSpec::Min { of: [0, 1] },
            ];
            cfg.diagnostics = vec![DiagnosticSpec::Ordering {
                ordering: OrderingKind::M,
                pairs: vec![[3, 0], [3, 1], [0, 2], [1, 2]],
            }];
            run(&cfg, &common.out, common.threads)
        }
        Command::Diagnose { dir } => {
            let manifest = harness::load_manifest(&dir.join(harness::MANIFEST_FILE))?;
            println!("{} (config {})", manifest.name, &manifest.config_hash[..12]);
            Ok(print_verdicts(&read_verdicts(&dir)?))
        }
        Command::Approx {
            profile,
            delta,
            epsilon,
            window,
        } => {
            let f = profile.spec().build(delta)?;
            let a = approx_viable(&f, epsilon, Window::new(-window - 1, window)?)?;
            let snap = HeightSnapshot::from_height(0.0, &a.height);
            println!("{}", serde_json::to_string(&snap)?);
            Ok(true)
        }
        Command::Scenario { name, common, dump } => {
            if name == "list" {
                for c in harness::scenario_catalog() {
                    println!("{}", c.name);
                }
                return Ok(true);
            }
            let mut cfg = harness::scenario(&name)?;
            apply(&mut cfg, &common);
            if dump {
                print!("{}", cfg.to_toml());
                return Ok(true);
            }
            run(&cfg, &common.out, common.threads)
        }
        Command::Run { config, common } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply(&mut cfg, &common);
            run(&cfg, &common.out, common.threads)
        }
        Command::Replay {
            manifest,
            out,
            threads,
        } => {
            let report = harness::replay(&manifest, &out, threads)?;
            if report.identical {
                println!("replay identical");
            } else {
                bail!("replay differs in {}", report.mismatched.join(", "));
            }
            Ok(true)
        }
    }
}
