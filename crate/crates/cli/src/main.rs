//! `mcsc`: run MC-SC experiments and write CSV results with a JSON run manifest.

mod manifest;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mcsc_core::channel::derive_link_budget;
use mcsc_core::experiments::{
    alpha_sum_star, alpha_tradeoff_star, blockage_sweep, delay_sweep, feasibility_region, misalignment_sweep,
    range_grid, strict_hc_sweep, time_sharing_plan, time_sharing_point, Scheme, StrictHcOptions,
};
use mcsc_core::export::{write_delay_csv, write_sweep_csv, write_trace_csv};
use mcsc_core::optimizer::{default_init, oracle_check, sca_solve_traced, solve_zero_load, ScaOptions};
use mcsc_core::queueing::{simulate_plan, TransmissionPlan};
use mcsc_core::{rng, SystemConfig};

use manifest::{manifest_path, Experiment, RunManifest};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "mcsc", version, about = "Mixed-criticality superposition coding experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Flat `key = value` file overriding the defaults field by field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; the manifest is written next to it as `<stem>.manifest.json`.
    /// Without it results go to stdout and no manifest is written.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed of every stochastic step.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Per-iteration SCA records as JSON lines on stderr (solve).
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Mcsc,
    TimeSharing,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Mcsc => Scheme::Mcsc,
            SchemeArg::TimeSharing => Scheme::TimeSharing,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the power allocation at one α and print the result as JSON.
    Solve {
        #[arg(long)]
        alpha: f64,
    },
    /// MC-SC and time-sharing throughput over an α grid.
    Feasibility {
        /// `start:step:end`
        #[arg(long, default_value = "0:0.05:1")]
        alpha_grid: String,
    },
    /// Throughput at α ∈ {0, α_T*, 1} over a grid of direct-path blockage probabilities.
    BlockageSweep {
        #[arg(long, default_value = "0:0.1:0.5")]
        q_grid: String,
    },
    /// Throughput at α ∈ {0, α_T*, 1} over a grid of pointing-error scales.
    MisalignmentSweep {
        #[arg(long, default_value = "0.02:0.02:0.3")]
        sigma_grid: String,
    },
    /// Pointing-error sweep with the reflected beam adapted to an HC outage target.
    StrictHc {
        #[arg(long, default_value = "0.02:0.02:0.3")]
        sigma_grid: String,
        #[arg(long, default_value_t = 0.3)]
        alpha_min: f64,
        #[arg(long, default_value_t = 0.05)]
        target: f64,
    },
    /// Queue simulation at the configured load over an α grid.
    QueueSim {
        #[arg(long, default_value = "0:0.05:1")]
        alpha_grid: String,
        #[arg(long, value_enum, default_value = "mcsc")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 20_000)]
        slots: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        /// Also write `<stem>.trace.csv` with replication 0 at the first grid α.
        #[arg(long)]
        slot_trace: bool,
    },
    /// Compare SCA with the grid and exact oracles on random configurations.
    OracleCheck {
        #[arg(long, default_value_t = 50)]
        n: usize,
    },
    /// Print the configuration in effect.
    Config {
        /// Print the built-in defaults, ignoring `--config`.
        #[arg(long)]
        show_defaults: bool,
    },
    /// Re-run the experiment recorded in a manifest.
    Rerun { manifest: PathBuf },
}

fn parse_grid(name: &str, text: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || mcsc_core::Error::Config(format!("{name} grid must be `start:step:end` or a single value, got `{text}`"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match parts[..] {
        [x] if x.is_finite() => Ok(vec![x]),
        [a, s, b] if a.is_finite() && b.is_finite() && s > 0.0 && b >= a => Ok(range_grid(a, s, b)),
        _ => Err(bad().into()),
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<SystemConfig> {
    let cfg = match path {
        Some(p) => SystemConfig::from_file(p).with_context(|| format!("loading {}", p.display()))?,
        None => SystemConfig::default(),
    };
    cfg.validate()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn trace_path(out: &Path) -> PathBuf {
    out.with_extension("trace.csv")
}

/// Runs one experiment and returns the files written and the exit code.
fn run(cfg: &SystemConfig, exp: &Experiment, seed: u64, out: Option<&Path>, trace: bool) -> anyhow::Result<(Vec<PathBuf>, u8)> {
    let mut outputs: Vec<PathBuf> = out.map(Path::to_path_buf).into_iter().collect();
    let mut code = 0;
    match exp {
        Experiment::Solve { alpha } => {
            let c = cfg.with_alpha(*alpha);
            c.validate()?;
            let budget = derive_link_budget(&c)?;
            let mut on_iter = |r: &mcsc_core::optimizer::IterationRecord| {
                if trace {
                    eprintln!("{}", serde_json::to_string(r).expect("serialisable record"));
                }
            };
            let s = sca_solve_traced(&c, &budget, default_init(c.p_max), ScaOptions::default(), &mut on_iter)?;
            let mut w = sink(out)?;
            serde_json::to_writer_pretty(&mut w, &s)?;
            writeln!(w)?;
            w.flush()?;
            if !s.converged {
                eprintln!("SCA stopped after {} iterations without converging", s.iterations);
                code = EXIT_NUMERICAL;
            }
        }
        Experiment::Feasibility { alpha_grid } => {
            let r = feasibility_region(cfg, alpha_grid)?;
            write_sweep_csv(sink(out)?, &r)?;
            let s = alpha_sum_star(cfg)?;
            let t = alpha_tradeoff_star(cfg, &s)?;
            eprintln!("alpha_sum* = {:.4}, alpha_T* = {:.4}", s.alpha, t.alpha);
        }
        Experiment::BlockageSweep { q_d_grid } => write_sweep_csv(sink(out)?, &blockage_sweep(cfg, q_d_grid)?)?,
        Experiment::MisalignmentSweep { sigma_grid } => {
            write_sweep_csv(sink(out)?, &misalignment_sweep(cfg, sigma_grid)?)?
        }
        Experiment::StrictHc { sigma_grid, alpha_min, target } => {
            let opts = StrictHcOptions {
                alpha_min: *alpha_min,
                target: *target,
            };
            let r = strict_hc_sweep(cfg, sigma_grid, opts)?;
            write_sweep_csv(sink(out)?, &r)?;
            let infeasible: Vec<f64> = r.case("mcsc").iter().filter(|row| row.point.is_none()).map(|row| row.value).collect();
            if !infeasible.is_empty() {
                eprintln!("target {target} infeasible at sigma_m = {infeasible:?}");
            }
            if infeasible.len() == sigma_grid.len() {
                code = EXIT_INFEASIBLE;
            }
        }
        Experiment::QueueSim {
            alpha_grid,
            scheme,
            slots,
            reps,
            slot_trace,
        } => {
            let r = delay_sweep(cfg, alpha_grid, *scheme, *slots, *reps, seed)?;
            write_delay_csv(sink(out)?, &r)?;
            eprintln!(
                "{}: instability onset {:?}, delay minimum {:?}",
                scheme.name(),
                r.instability_onset,
                r.delay_minimum
            );
            if *slot_trace {
                let Some(out) = out else {
                    bail!(mcsc_core::Error::Config("--slot-trace needs --out".into()));
                };
                let alpha = alpha_grid[0];
                let c = cfg.with_alpha(alpha);
                let budget = derive_link_budget(&c)?;
                let plan = match scheme {
                    Scheme::Mcsc => TransmissionPlan::from_solve(&solve_zero_load(&c, &budget, alpha)?),
                    Scheme::TimeSharing => time_sharing_plan(&time_sharing_point(&c, &budget, alpha)),
                };
                let mut g = rng::stream(seed, rng::job_index(0, 0));
                let t = simulate_plan(&c, &budget, &plan, *slots, &mut g);
                let p = trace_path(out);
                write_trace_csv(sink(Some(&p))?, &t)?;
                outputs.push(p);
            }
        }
        Experiment::OracleCheck { n } => {
            let cases = oracle_check(*n, seed)?;
            let mut w = sink(out)?;
            writeln!(w, "index,alpha,a_bar,sca,grid,exact,iterations,converged,max_trace_drop,grid_ok,trace_ok")?;
            for c in &cases {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    c.index,
                    c.config.alpha,
                    c.config.a_bar,
                    c.sca,
                    c.grid,
                    c.exact,
                    c.iterations,
                    u8::from(c.converged),
                    c.max_trace_drop,
                    u8::from(c.grid_ok()),
                    u8::from(c.trace_ok())
                )?;
            }
            w.flush()?;
            let failed = cases.iter().filter(|c| !c.passed()).count();
            eprintln!("{} of {} configurations passed", cases.len() - failed, cases.len());
            if failed > 0 {
                code = EXIT_NUMERICAL;
            }
        }
    }
    Ok((outputs, code))
}

fn experiment(command: Command) -> anyhow::Result<Experiment> {
    Ok(match command {
        Command::Solve { alpha } => Experiment::Solve { alpha },
        Command::Feasibility { alpha_grid } => Experiment::Feasibility {
            alpha_grid: parse_grid("alpha", &alpha_grid)?,
        },
        Command::BlockageSweep { q_grid } => Experiment::BlockageSweep {
            q_d_grid: parse_grid("q_d", &q_grid)?,
        },
        Command::MisalignmentSweep { sigma_grid } => Experiment::MisalignmentSweep {
            sigma_grid: parse_grid("sigma_m", &sigma_grid)?,
        },
        Command::StrictHc {
            sigma_grid,
            alpha_min,
            target,
        } => Experiment::StrictHc {
            sigma_grid: parse_grid("sigma_m", &sigma_grid)?,
            alpha_min,
            target,
        },
        Command::QueueSim {
            alpha_grid,
            scheme,
            slots,
            reps,
            slot_trace,
        } => Experiment::QueueSim {
            alpha_grid: parse_grid("alpha", &alpha_grid)?,
            scheme: scheme.into(),
            slots,
            reps,
            slot_trace,
        },
        Command::OracleCheck { n } => Experiment::OracleCheck { n },
        Command::Config { .. } | Command::Rerun { .. } => unreachable!("handled before dispatch"),
    })
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: --jobs ignored: {e}");
        }
    }
    let g = cli.global;
    let (cfg, exp, seed, out) = match cli.command {
        Command::Config { show_defaults } => {
            let cfg = if show_defaults {
                SystemConfig::default()
            } else {
                load_config(g.config.as_deref())?
            };
            print!("{}", cfg.to_kv_string());
            return Ok(0);
        }
        Command::Rerun { manifest } => {
            let m = RunManifest::read(&manifest)?;
            m.config.validate()?;
            let out = g.out.or_else(|| m.outputs.first().cloned());
            (m.config, m.experiment, m.seed, out)
        }
        other => (load_config(g.config.as_deref())?, experiment(other)?, g.seed, g.out),
    };

    let start = Instant::now();
    let (outputs, code) = run(&cfg, &exp, seed, out.as_deref(), g.trace)?;
    if let Some(out) = out.as_deref() {
        let m = RunManifest::new(&cfg, exp, seed, outputs, start.elapsed().as_secs_f64());
        m.write(&manifest_path(out))?;
    }
    Ok(code)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<mcsc_core::Error>() {
        Some(mcsc_core::Error::NonConvergence { .. }) => EXIT_NUMERICAL,
        Some(mcsc_core::Error::Infeasible(_)) => EXIT_INFEASIBLE,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
