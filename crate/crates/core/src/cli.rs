//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
//! run fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::algorithms::Algorithm;
use crate::env::EnvironmentSpec;
use crate::harness::{
    pow2_checkpoints, run_matrix, ExperimentConfig, MatrixOutput, DEFAULT_EPSILONS,
    DEFAULT_HORIZON, DEFAULT_REPETITIONS,
};
use crate::io;
use crate::noise::NoiseMode;
use crate::{Error, Result};

/// Built-in mean-reward settings.
pub const SETTINGS: [(u8, [f64; 5]); 3] = [
    (1, [0.75, 0.70, 0.70, 0.70, 0.70]),
    (2, [0.75, 0.625, 0.5, 0.375, 0.25]),
    (3, [0.75, 0.15, 0.15, 0.15, 0.15]),
];

pub const SEED_ENV: &str = "DPBANDITS_SEED";

pub fn setting_means(id: u8) -> Option<Vec<f64>> {
    SETTINGS
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, m)| m.to_vec())
}

#[derive(Debug, Parser)]
#[command(
    name = "dpbandits",
    version,
    about = "Private stochastic bandit and full-information regret experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment grid and write traces, summary and plots.
    Run(RunArgs),
    /// Re-run the grid behind one of the standard figures.
    Reproduce(ReproduceArgs),
    /// Print the built-in mean-reward settings and defaults.
    ListSettings,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Comma-separated arm means.
    #[arg(long, conflicts_with = "setting")]
    means: Option<String>,
    /// Built-in mean setting (1, 2 or 3).
    #[arg(long)]
    setting: Option<u8>,
    #[arg(long, default_value = "alucb,hybrid,dpse")]
    algos: String,
    /// Comma-separated privacy levels.
    #[arg(long)]
    eps: Option<String>,
    /// Rounds per run. Without it the run is anytime-only and simulates
    /// 2*2^21 rounds.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: u32,
    /// Master seed; defaults to $DPBANDITS_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// `pow2`, `all`, or a comma-separated list of rounds.
    #[arg(long, default_value = "pow2")]
    checkpoints: String,
    /// Replace every Laplace draw by 0.
    #[arg(long)]
    zero_noise: bool,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Figure number (1-12) or `all`.
    #[arg(long)]
    figure: String,
    /// Divide the horizon by this factor for a quicker run.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_output(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with_output<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Reproduce(a) => cmd_reproduce(a, out),
        Command::ListSettings => cmd_list_settings(out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_config() {
                1
            } else {
                2
            }
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("cannot parse {what} '{s}'")))
        })
        .collect()
}

fn master_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn workers(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn format_means(means: &[f64]) -> String {
    means
        .iter()
        .map(|m| {
            let two = format!("{m:.2}");
            if two.parse::<f64>() == Ok(*m) {
                two
            } else {
                m.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Shortest round-trip form, e.g. `0.7` rather than `0.69999999999999996`.
fn join_reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn eps_tag(eps: f64) -> String {
    eps.to_string().replace('.', "p")
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

type Manifest = Vec<(&'static str, serde_json::Value)>;

fn manifest(
    config: &ExperimentConfig,
    command: &str,
    checkpoints: &str,
    extra: Manifest,
) -> Manifest {
    let mut m = vec![
        ("command", json!(command)),
        ("means", json!(join_reals(config.environment.means()))),
        (
            "algorithms",
            json!(config
                .algorithms
                .iter()
                .map(|a| a.id())
                .collect::<Vec<_>>()
                .join(",")),
        ),
        ("epsilons", json!(join_reals(&config.epsilons))),
        ("horizon", json!(config.horizon)),
        ("horizon_known", json!(config.horizon_known)),
        ("repetitions", json!(config.repetitions)),
        ("seed", json!(config.seed)),
        ("checkpoints", json!(checkpoints)),
        (
            "noise_mode",
            json!(match config.noise_mode {
                NoiseMode::Live => "live",
                NoiseMode::Zeroed => "zeroed",
            }),
        ),
        ("dpse_hoeffding_scale", json!(config.dpse.hoeffding_scale)),
        (
            "dpse_hoeffding_log_factor",
            json!(config.dpse.hoeffding_log_factor),
        ),
        ("dpse_privacy_scale", json!(config.dpse.privacy_scale)),
        (
            "dpse_privacy_log_factor",
            json!(config.dpse.privacy_log_factor),
        ),
        ("version", json!(env!("CARGO_PKG_VERSION"))),
    ];
    m.extend(extra);
    m
}

fn write_outputs(dir: &Path, stem: &str, output: &MatrixOutput) -> Result<()> {
    io::write_traces(&output.traces, dir.join(format!("traces{stem}.csv")))?;
    io::write_summary(&output.summary, dir.join(format!("summary{stem}.csv")))
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<()> {
    let means = match (&a.means, a.setting) {
        (Some(m), _) => parse_list::<f64>(m, "mean")?,
        (None, Some(id)) => setting_means(id)
            .ok_or_else(|| Error::Config(format!("unknown setting {id}; expected 1, 2 or 3")))?,
        (None, None) => setting_means(1).unwrap(),
    };
    let environment = EnvironmentSpec::new(means).map_err(|e| Error::Config(e.to_string()))?;
    let algorithms = parse_list::<String>(&a.algos, "algorithm")?
        .iter()
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<Vec<_>>>()?;
    let epsilons = match &a.eps {
        Some(e) => parse_list::<f64>(e, "epsilon")?,
        None => DEFAULT_EPSILONS.to_vec(),
    };
    let horizon_known = a.horizon.is_some();
    let horizon = a.horizon.unwrap_or(DEFAULT_HORIZON);
    if !horizon_known {
        if let Some(alg) = algorithms.iter().find(|a| a.needs_horizon()) {
            return Err(Error::Config(format!(
                "{} is not an anytime algorithm and needs the horizon; pass --horizon T",
                alg.display_name()
            )));
        }
    }
    let checkpoints = match a.checkpoints.as_str() {
        "pow2" => pow2_checkpoints(horizon),
        "all" => (1..=horizon).collect(),
        list => {
            let mut c = parse_list::<u64>(list, "checkpoint")?;
            c.sort_unstable();
            c.dedup();
            if c.last() != Some(&horizon) {
                c.push(horizon);
            }
            c
        }
    };
    let config = ExperimentConfig {
        environment,
        algorithms,
        epsilons,
        horizon,
        horizon_known,
        repetitions: a.reps,
        seed: master_seed(a.seed)?,
        checkpoints,
        noise_mode: if a.zero_noise {
            NoiseMode::Zeroed
        } else {
            NoiseMode::Live
        },
        dpse: Default::default(),
    };
    config.validate()?;
    create_dir(&a.out)?;
    let output = run_matrix(&config, workers(a.workers))?;
    write_outputs(&a.out, "", &output)?;
    for &eps in &config.epsilons {
        let title = format!(
            "means {}: regret with epsilon = {}",
            format_means(config.environment.means()),
            eps
        );
        io::plot_regret_curves(
            &output.summary.for_epsilon(eps),
            &title,
            a.out.join(format!("regret_eps_{}.svg", eps_tag(eps))),
        )?;
    }
    io::plot_final_regret(
        &output.summary,
        "final regret for all epsilon",
        a.out.join("final_regret.svg"),
    )?;
    io::write_manifest(
        &manifest(&config, "run", &a.checkpoints, Vec::new()),
        a.out.join("manifest.json"),
    )?;
    for row in &output.summary.rows {
        let _ = writeln!(
            out,
            "{:<18} eps={:<6} final regret {:>12.2} (sd {:.2}, {} runs)",
            row.algorithm,
            row.epsilon,
            row.final_stats().mean,
            row.final_stats().sd,
            row.runs
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum FigureKind {
    Curves(&'static [f64]),
    Final,
}

#[derive(Debug, Clone, Copy)]
struct Figure {
    id: u8,
    setting: u8,
    kind: FigureKind,
}

/// Figure ids, the setting each is drawn from, and what it plots.
const FIGURES: [Figure; 12] = [
    Figure {
        id: 1,
        setting: 1,
        kind: FigureKind::Curves(&[0.5]),
    },
    Figure {
        id: 2,
        setting: 1,
        kind: FigureKind::Curves(&[1.0]),
    },
    Figure {
        id: 3,
        setting: 1,
        kind: FigureKind::Curves(&[8.0]),
    },
    Figure {
        id: 4,
        setting: 1,
        kind: FigureKind::Curves(&[64.0]),
    },
    Figure {
        id: 5,
        setting: 1,
        kind: FigureKind::Final,
    },
    Figure {
        id: 6,
        setting: 2,
        kind: FigureKind::Curves(&[0.5]),
    },
    Figure {
        id: 7,
        setting: 2,
        kind: FigureKind::Curves(&[8.0]),
    },
    Figure {
        id: 8,
        setting: 2,
        kind: FigureKind::Curves(&[64.0]),
    },
    Figure {
        id: 9,
        setting: 1,
        kind: FigureKind::Curves(&[0.1, 0.25, 128.0]),
    },
    Figure {
        id: 10,
        setting: 2,
        kind: FigureKind::Final,
    },
    Figure {
        id: 11,
        setting: 2,
        kind: FigureKind::Curves(&[0.1, 0.25, 1.0, 128.0]),
    },
    Figure {
        id: 12,
        setting: 3,
        kind: FigureKind::Final,
    },
];

fn figure_epsilons(f: &Figure) -> Vec<f64> {
    match f.kind {
        FigureKind::Curves(e) => e.to_vec(),
        FigureKind::Final => DEFAULT_EPSILONS.to_vec(),
    }
}

/// Standard horizon divided by `scale`.
pub fn scaled_horizon(scale: f64) -> Result<u64> {
    if !(scale >= 1.0 && scale.is_finite()) {
        return Err(Error::Config(format!(
            "--scale must be a finite number >= 1, got {scale}"
        )));
    }
    Ok((DEFAULT_HORIZON as f64 / scale).floor() as u64)
}

fn cmd_reproduce(a: ReproduceArgs, out: &mut dyn Write) -> Result<()> {
    let selected: Vec<Figure> = if a.figure.eq_ignore_ascii_case("all") {
        FIGURES.to_vec()
    } else {
        let id: u8 = a.figure.trim().parse().map_err(|_| {
            Error::Config(format!(
                "unknown figure '{}'; expected 1-12 or all",
                a.figure
            ))
        })?;
        vec![*FIGURES
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::Config(format!("unknown figure {id}; expected 1-12 or all")))?]
    };
    let horizon = scaled_horizon(a.scale)?;
    let seed = master_seed(a.seed)?;
    create_dir(&a.out)?;

    for setting in 1..=3u8 {
        let figures: Vec<&Figure> = selected.iter().filter(|f| f.setting == setting).collect();
        if figures.is_empty() {
            continue;
        }
        // one grid per setting covering every epsilon its figures need
        let epsilons: Vec<f64> = DEFAULT_EPSILONS
            .iter()
            .copied()
            .filter(|e| figures.iter().any(|f| figure_epsilons(f).contains(e)))
            .collect();
        let mut config =
            ExperimentConfig::standard(EnvironmentSpec::new(setting_means(setting).unwrap())?);
        config.epsilons = epsilons;
        config.horizon = horizon;
        config.checkpoints = pow2_checkpoints(horizon);
        config.repetitions = a.reps;
        config.seed = seed;
        config.validate()?;
        let output = run_matrix(&config, workers(a.workers))?;
        let stem = format!("_setting{setting}");
        write_outputs(&a.out, &stem, &output)?;
        io::write_manifest(
            &manifest(
                &config,
                "reproduce",
                "pow2",
                vec![
                    ("figure", json!(a.figure)),
                    ("setting", json!(setting)),
                    ("scale", json!(a.scale)),
                ],
            ),
            a.out.join(format!("manifest{stem}.json")),
        )?;
        let means = format_means(config.environment.means());
        for f in figures {
            match f.kind {
                FigureKind::Final => {
                    let path = a.out.join(format!("fig{}.svg", f.id));
                    let title =
                        format!("Mean reward setting {setting}: final regret for all epsilon");
                    io::plot_final_regret(&output.summary, &title, &path)?;
                    let _ = writeln!(out, "wrote {}", path.display());
                    if f.id == 12 {
                        for &eps in &config.epsilons {
                            let path = a.out.join(format!("fig12_eps_{}.svg", eps_tag(eps)));
                            let title = format!(
                                "Mean reward setting {setting}: regret with epsilon = {eps}"
                            );
                            io::plot_regret_curves(
                                &output.summary.for_epsilon(eps),
                                &title,
                                &path,
                            )?;
                            let _ = writeln!(out, "wrote {}", path.display());
                        }
                    }
                }
                FigureKind::Curves(eps_list) => {
                    for &eps in eps_list {
                        let path = if eps_list.len() == 1 {
                            a.out.join(format!("fig{}.svg", f.id))
                        } else {
                            a.out.join(format!("fig{}_eps_{}.svg", f.id, eps_tag(eps)))
                        };
                        let title = format!(
                            "Mean reward setting {setting} ({means}): regret with epsilon = {eps}"
                        );
                        io::plot_regret_curves(&output.summary.for_epsilon(eps), &title, &path)?;
                        let _ = writeln!(out, "wrote {}", path.display());
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_list_settings(out: &mut dyn Write) -> Result<()> {
    let w =
        |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(|e| Error::io("<stdout>", e));
    for (id, means) in SETTINGS {
        w(out, format!("setting {id}: {}", format_means(&means)))?;
    }
    w(
        out,
        format!(
            "defaults: horizon {DEFAULT_HORIZON}, repetitions {DEFAULT_REPETITIONS}, epsilons {}",
            DEFAULT_EPSILONS
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}
