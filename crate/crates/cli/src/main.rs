use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use quasar_zo::checkers::{
    check_oracle_statistics, check_proximal_quasar_convexity, check_quasar_convexity, CheckReport, SamplingBox,
};
use quasar_zo::harness::bundled;
use quasar_zo::harness::{parse_constants, run_experiment, ExperimentConfig};
use quasar_zo::smoothing::SmoothingConfig;
use quasar_zo::theory::{self, Regime};
use quasar_zo::{Objective, RandomStream};

#[derive(Parser)]
#[command(name = "qzo", version, about = "Zeroth-order Random Min experiments and calculators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Step size, smoothing, iteration and batch prescriptions for a regime.
    Tune {
        /// qc-unconstrained, sqc-unconstrained, sqc-distance, qc-constrained or sqc-constrained.
        regime: Regime,
        /// `key = value` file with l1, gamma, beta, n, r, dx, sigma, h, mu, t, eps.
        #[arg(long)]
        constants: PathBuf,
        /// Safety factor for the strongly quasar-convex default step.
        #[arg(long, default_value_t = theory::DEFAULT_SAFETY)]
        safety: f64,
    },
    /// Run an experiment config (a file path or a bundled config name).
    Run {
        config: String,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time in traces and summaries.
        #[arg(long)]
        timing: bool,
    },
    /// Sample a property of a config's problem.
    Check {
        checker: Checker,
        config: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Overrides the problem's declared gamma.
        #[arg(long)]
        gamma: Option<f64>,
        /// Overrides the problem's declared beta (default 0 when undeclared).
        #[arg(long)]
        beta: Option<f64>,
        /// Gradient-mapping parameter for the proximal checker.
        #[arg(long, default_value_t = 0.1)]
        a: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every config of a bundled suite (quick, full or all).
    Bench {
        suite: String,
        /// Root directory; each config writes to `<out>/<name>`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        timing: bool,
    },
    /// List bundled configs.
    List,
    /// Print a bundled config in canonical form.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Checker {
    Quasar,
    Proximal,
    Oracle,
}

fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let config = match bundled::find(arg) {
        Some(b) if !PathBuf::from(arg).exists() => b.config()?,
        _ => {
            let text = fs::read_to_string(arg).with_context(|| format!("reading config `{arg}`"))?;
            ExperimentConfig::parse(&text).with_context(|| format!("in config `{arg}`"))?
        }
    };
    Ok(config.with_env_overrides()?)
}

fn tune(regime: Regime, constants: &PathBuf, safety: f64) -> Result<()> {
    let text = fs::read_to_string(constants).with_context(|| format!("reading {}", constants.display()))?;
    let mut c = parse_constants(&text)?;
    if c.h.is_none() && c.gamma.is_some() && c.n.is_some() && c.l1.is_some() {
        if let Ok(h) = theory::default_step(regime, &c, safety) {
            c.h = Some(h);
        }
    }
    println!("regime = {regime}");
    if let Some(h) = c.h {
        println!("step = {h:e}");
    }
    let hp = theory::hyperparameters(regime, &c)?;
    println!("mu_max = {:e}", hp.mu_max);
    println!("n_min = {}", hp.n_min);
    println!("t_min = {}", hp.t_min);
    match theory::plug_back(regime, &c) {
        Ok(b) => println!("bound_at_prescription = {b:e}"),
        Err(e) => println!("bound_at_prescription = unavailable ({e})"),
    }
    Ok(())
}

fn print_report(name: &str, r: &CheckReport) {
    println!("checker = {name}");
    println!("passed = {}", r.passed);
    println!("trials = {}", r.trials);
    println!("worst_violation = {:e}", r.worst_violation);
    if let Some(w) = &r.witness {
        let coords: Vec<String> = w.iter().map(|v| format!("{v:e}")).collect();
        println!("witness = {}", coords.join(","));
    }
    for s in &r.subchecks {
        let verdict = match s.passed {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "skipped",
        };
        println!("{} = {verdict} ({})", s.name, s.detail);
    }
}

#[allow(clippy::too_many_arguments)]
fn check(
    checker: Checker,
    config: &str,
    trials: usize,
    gamma: Option<f64>,
    beta: Option<f64>,
    a: f64,
    seed: u64,
) -> Result<bool> {
    let c = load_config(config)?;
    let problem = c.build_problem()?;
    let set = c.build_set(problem.dim())?;
    let mut stream = RandomStream::new(seed);
    let region = SamplingBox::of_problem(&problem)?;
    let reference = || -> Result<_> {
        match &problem.optimum {
            Some((x, _)) => Ok(x.clone()),
            None => bail!("problem `{}` declares no optimum to check against", problem.name),
        }
    };
    let gamma = || -> Result<f64> {
        match gamma.or(problem.constants.gamma) {
            Some(g) => Ok(g),
            None => bail!("problem `{}` declares no gamma; pass --gamma", problem.name),
        }
    };
    let beta = beta.or(problem.constants.beta).unwrap_or(0.0);
    let (name, report) = match checker {
        Checker::Quasar => (
            "quasar",
            check_quasar_convexity(&problem, gamma()?, beta, &reference()?, &region, trials, &mut stream)?,
        ),
        Checker::Proximal => (
            "proximal",
            check_proximal_quasar_convexity(&problem, &set, gamma()?, beta, a, &reference()?, &region, trials, &mut stream)?,
        ),
        Checker::Oracle => {
            let x = c.start_point(&problem, &set, 0)?;
            let cfg = SmoothingConfig::new(c.mu, c.batch)?;
            ("oracle", check_oracle_statistics(&problem, &x, cfg, trials, &mut stream)?)
        }
    };
    print_report(name, &report);
    Ok(report.passed)
}

fn run_one(mut c: ExperimentConfig, out: Option<PathBuf>, timing: bool) -> Result<()> {
    c.record_time |= timing;
    let clock = Instant::now();
    let (summary, dir) = run_experiment(&c, out.as_deref())?;
    let (mean, std) = summary.final_f();
    let mut line = format!(
        "{}: {} seeds, final f {mean:.6e} +- {std:.3e}, flagged {}",
        summary.name,
        summary.runs.len(),
        summary.flagged()
    );
    if let Some(m) = &summary.metric_name {
        let (mm, ms) = summary.metric();
        line.push_str(&format!(", {m} {mm:.6e} +- {ms:.3e}"));
    }
    println!("{line} [{:.1}s] -> {}", clock.elapsed().as_secs_f64(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tune {
            regime,
            constants,
            safety,
        } => tune(regime, &constants, safety).map(|_| true),
        Command::Run { config, out, timing } => load_config(&config).and_then(|c| run_one(c, out, timing)).map(|_| true),
        Command::Check {
            checker,
            config,
            trials,
            gamma,
            beta,
            a,
            seed,
        } => check(checker, &config, trials, gamma, beta, a, seed),
        Command::Bench { suite, out, timing } => (|| {
            for b in bundled::suite(&suite)? {
                let c = b.config()?.with_env_overrides()?;
                run_one(c, Some(out.join(b.name)), timing)?;
            }
            Ok(true)
        })(),
        Command::List => {
            let mut out = io::stdout().lock();
            for b in bundled::ALL {
                let c = b.config().expect("bundled configs parse");
                if writeln!(out, "{:<28} {} {} on {}", b.name, c.method, c.iterations, c.problem.kind()).is_err() {
                    break;
                }
            }
            Ok(true)
        }
        Command::Show { name } => match bundled::find(&name) {
            Some(b) => b.config().map(|c| print!("{}", c.render())).map(|_| true).map_err(Into::into),
            None => Err(anyhow::anyhow!("no bundled config named `{name}`")),
        },
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
