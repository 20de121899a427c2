//! Multi-seed experiment execution and summary aggregation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::geometry::FeasibleSet;
use crate::par;
use crate::problems::ldsi::{mass_spring_experiment, MassSpringSetup};
use crate::problems::svm::synthetic_svm_dataset;
use crate::problems::{
    bandit, glm, hard_quasar_problem, quadratic_problem, radial_angular_problem, smoothed_hinge_svm, toy,
    LabeledDataset, Problem,
};
use crate::rng::RandomStream;
use crate::solvers::{projected_gd, random_min, RunConfig, Trace};
use crate::vector::Vector;

use super::config::{config_error, ExperimentConfig, InitSpec, Method, ProblemSpec, SetSpec, SvmData, SyntheticSvm};
use super::io::{fmt_sig17, load_labeled_csv, render_trace, CsvSchema};

/// Percentage decay `100 (1 - f(x_N) / f(x_0))`.
pub fn decay_rate(trace: &Trace) -> Result<f64> {
    let first = trace
        .records
        .first()
        .ok_or_else(|| invalid("trace", "no records"))?;
    let last = trace.records.last().expect("nonempty");
    if first.f == 0.0 {
        return Err(Error::NonPositiveDenominator("decay rate: f(x_0) = 0"));
    }
    Ok(100.0 * (1.0 - last.f / first.f))
}

fn synthetic_svm(d: &SyntheticSvm) -> Result<LabeledDataset> {
    let mut s = RandomStream::new(d.data_seed);
    synthetic_svm_dataset(d.samples, d.dim, d.scale, d.shift, d.flip, &mut s)
}

impl ExperimentConfig {
    /// Builds the objective. Generated data depends only on the problem
    /// parameters, including `problem.data_seed`.
    pub fn build_problem(&self) -> Result<Problem> {
        let p = match &self.problem {
            ProblemSpec::Quadratic { dim, beta, center } => quadratic_problem(Vector::filled(*dim, *center), *beta)?,
            ProblemSpec::Hard { t, sigma } => hard_quasar_problem(*t, *sigma)?,
            ProblemSpec::DoubleWell => toy::double_well(),
            ProblemSpec::Bilinear => toy::bilinear(),
            ProblemSpec::ProductSquare => toy::product_square(),
            ProblemSpec::Glm { link, samples, dim, data_seed } => {
                let (data, w) = glm::glm_dataset(*samples, *dim, *link, &mut RandomStream::new(*data_seed))?;
                glm::glm_problem(&data, *link)?.with_optimum(w, 0.0)
            }
            ProblemSpec::Svm { alpha, data, standardize } => {
                let data = match data {
                    SvmData::Wdbc { path } => load_labeled_csv(path, &CsvSchema::Wdbc)?,
                    SvmData::Synthetic(d) => synthetic_svm(d)?,
                    SvmData::Auto { path, fallback } => {
                        if Path::new(path).is_file() {
                            load_labeled_csv(path, &CsvSchema::Wdbc)?
                        } else {
                            synthetic_svm(fallback)?
                        }
                    }
                };
                if *standardize {
                    smoothed_hinge_svm(&data.standardized(), *alpha)?
                } else {
                    smoothed_hinge_svm(&data, *alpha)?
                }
            }
            ProblemSpec::Radial { dim, data_seed } => {
                // The set comes from the config; the paired l1-ball is only a default.
                radial_angular_problem(*dim, 1.0, &mut RandomStream::new(*data_seed))?.0
            }
            ProblemSpec::Bandit { arms, tau, data_seed } => {
                let r = bandit::random_rewards(*arms, &mut RandomStream::new(*data_seed));
                bandit::bandit_problem(r, *tau)?
            }
            ProblemSpec::MassSpring {
                sequences,
                horizon,
                warmup,
                noise,
                perturbation,
                data_seed,
            } => {
                let setup = MassSpringSetup {
                    sequences: *sequences,
                    horizon: *horizon,
                    warmup: *warmup,
                    noise: *noise,
                    perturbation: *perturbation,
                };
                mass_spring_experiment(&setup, &mut RandomStream::new(*data_seed))?
            }
        };
        Ok(p)
    }

    pub fn build_set(&self, dim: usize) -> Result<FeasibleSet> {
        match self.set {
            SetSpec::Whole => Ok(FeasibleSet::WholeSpace),
            SetSpec::Box { lower, upper } => FeasibleSet::cube(dim, lower, upper),
            SetSpec::L2 { radius } => FeasibleSet::l2_ball(Vector::zeros(dim), radius),
            SetSpec::L1 { radius } => FeasibleSet::l1_ball(Vector::zeros(dim), radius),
        }
    }

    /// Initial point of the run at position `index` in the seed list,
    /// projected onto `set`. Drawn from the stream derived as `(seed, 0)`.
    pub fn start_point(&self, problem: &Problem, set: &FeasibleSet, index: usize) -> Result<Vector> {
        let owner = if self.init_points > 0 { index % self.init_points } else { index };
        let seed = *self
            .seeds
            .get(owner)
            .ok_or_else(|| config_error("seeds", format!("no seed at position {owner}")))?;
        let n = crate::objective::Objective::dim(problem);
        let x = match self.init {
            InitSpec::Gaussian { scale } => RandomStream::derive(seed, 0).standard_normal(n).scaled(scale)?,
            InitSpec::Constant { value } => Vector::filled(n, value),
            InitSpec::ProblemDefault => problem
                .default_start
                .clone()
                .ok_or_else(|| config_error("init", format!("problem `{}` has no default start", problem.name)))?,
        };
        set.project(&x)
    }

    /// Solver settings of the run at position `index`; the oracle stream is
    /// derived as `(seed, 1)`.
    pub fn run_config(&self, start: Vector, index: usize) -> RunConfig {
        let mut run = RunConfig::new(start, self.iterations, self.step)
            .with_seed(crate::rng::derive_seed(self.seeds[index], 1))
            .with_smoothing(self.mu, self.batch);
        run.record_time = self.record_time;
        run
    }
}

/// Outcome of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub trace: Trace,
    pub start: Vector,
    pub final_f: f64,
    pub best_f: f64,
    /// NaN when `f(x_0) = 0`.
    pub decay_rate: f64,
    /// 0 unless the config records time.
    pub wall_ms: f64,
    /// The run stopped on an evaluation failure or ended above its start.
    pub flagged: bool,
    pub metric: Option<f64>,
}

/// Per-seed rows sorted by seed plus cross-seed aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub metric_name: Option<String>,
    pub runs: Vec<SeedRun>,
}

/// Mean and sample standard deviation; std is NaN for fewer than two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (m - 1.0)).sqrt())
}

pub const SUMMARY_HEADER: &str = "seed,final_f,best_f,decay_rate,wall_ms,flagged,metric";

impl RunSummary {
    fn by_seed(&self) -> Vec<&SeedRun> {
        let mut rows: Vec<&SeedRun> = self.runs.iter().collect();
        rows.sort_by_key(|r| r.seed);
        rows
    }

    fn column(&self, unflagged_only: bool, get: impl Fn(&SeedRun) -> f64) -> Vec<f64> {
        self.by_seed()
            .into_iter()
            .filter(|r| !(unflagged_only && r.flagged))
            .map(get)
            .collect()
    }

    pub fn final_f(&self) -> (f64, f64) {
        mean_std(&self.column(false, |r| r.final_f))
    }

    pub fn decay_rate(&self) -> (f64, f64) {
        mean_std(&self.column(false, |r| r.decay_rate))
    }

    pub fn metric(&self) -> (f64, f64) {
        mean_std(&self.column(false, |r| r.metric.unwrap_or(f64::NAN)))
    }

    pub fn flagged(&self) -> usize {
        self.runs.iter().filter(|r| r.flagged).count()
    }

    /// CSV with one row per seed followed by `mean`, `std`, `mean_unflagged`
    /// and `std_unflagged`. The aggregate rows' `flagged` field counts
    /// flagged runs in the rows they cover.
    pub fn render_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(SUMMARY_HEADER);
        s.push('\n');
        let metric = |m: Option<f64>| m.map(fmt_sig17).unwrap_or_default();
        for r in self.by_seed() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.seed,
                fmt_sig17(r.final_f),
                fmt_sig17(r.best_f),
                fmt_sig17(r.decay_rate),
                fmt_sig17(r.wall_ms),
                u8::from(r.flagged),
                metric(r.metric)
            );
        }
        let has_metric = self.metric_name.is_some();
        for (label_mean, label_std, only) in [("mean", "std", false), ("mean_unflagged", "std_unflagged", true)] {
            let cols: Vec<(f64, f64)> = [
                self.column(only, |r| r.final_f),
                self.column(only, |r| r.best_f),
                self.column(only, |r| r.decay_rate),
                self.column(only, |r| r.wall_ms),
                self.column(only, |r| r.metric.unwrap_or(f64::NAN)),
            ]
            .iter()
            .map(|c| mean_std(c))
            .collect();
            let flagged = if only { 0 } else { self.flagged() };
            for (label, pick) in [(label_mean, 0), (label_std, 1)] {
                let v = |i: usize| {
                    let (m, sd) = cols[i];
                    fmt_sig17(if pick == 0 { m } else { sd })
                };
                let _ = writeln!(
                    s,
                    "{label},{},{},{},{},{flagged},{}",
                    v(0),
                    v(1),
                    v(2),
                    v(3),
                    if has_metric { v(4) } else { String::new() }
                );
            }
        }
        s
    }
}

/// Runs every seed in memory. Seeds may execute in parallel; the result is
/// sorted by seed and independent of scheduling.
pub fn execute(config: &ExperimentConfig) -> Result<RunSummary> {
    let problem = config.build_problem()?;
    let set = config.build_set(crate::objective::Objective::dim(&problem))?;
    let starts = (0..config.seeds.len())
        .map(|i| config.start_point(&problem, &set, i))
        .collect::<Result<Vec<_>>>()?;
    let indices: Vec<usize> = (0..config.seeds.len()).collect();
    let runs = par::map_slice(&indices, |&i| -> Result<SeedRun> {
        let run = config.run_config(starts[i].clone(), i);
        let clock = Instant::now();
        let trace = match config.method {
            Method::Rm => random_min(&problem, &set, &run)?,
            Method::Gd => projected_gd(&problem, &set, &run)?,
        };
        let wall_ms = if config.record_time {
            clock.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        let final_f = trace.final_f();
        let flagged = !trace.completed() || !(final_f <= trace.initial_f());
        Ok(SeedRun {
            seed: config.seeds[i],
            start: starts[i].clone(),
            final_f,
            best_f: trace.best_f(),
            decay_rate: decay_rate(&trace).unwrap_or(f64::NAN),
            wall_ms,
            flagged,
            metric: problem.metric_value(&trace.final_point),
            trace,
        })
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    runs.sort_by_key(|r| r.seed);
    Ok(RunSummary {
        name: config.name.clone(),
        metric_name: problem.metric_name().map(str::to_string),
        runs,
    })
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

pub const SUMMARY_FILE: &str = "summary.csv";

/// Runs the experiment and writes `trace_seed<seed>.csv` per seed plus
/// `summary.csv` into `out_dir` (the config's `output` when `None`).
/// Returns the summary and the directory written.
pub fn run_experiment(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<(RunSummary, PathBuf)> {
    let summary = execute(config)?;
    let dir = out_dir.map_or_else(|| PathBuf::from(&config.output), Path::to_path_buf);
    fs::create_dir_all(&dir)?;
    for r in &summary.runs {
        fs::write(dir.join(trace_file_name(r.seed)), render_trace(&r.trace.records))?;
    }
    fs::write(dir.join(SUMMARY_FILE), summary.render_csv())?;
    Ok((summary, dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::Record;
    use proptest::prelude::*;

    fn trace_of(fs: &[f64]) -> Trace {
        Trace {
            records: fs
                .iter()
                .enumerate()
                .map(|(i, f)| Record { iter: i, f: *f, best_f: *f, step: 0.0, fevals: 0, elapsed_ms: 0.0 })
                .collect(),
            final_point: Vector::zeros(1),
            best_point: Vector::zeros(1),
            failure: None,
        }
    }

    #[test]
    fn decay_rate_examples() {
        assert!((decay_rate(&trace_of(&[1.0, 0.5, 0.02830])).unwrap() - 97.170).abs() < 1e-9);
        assert_eq!(decay_rate(&trace_of(&[2.0, 2.0])).unwrap(), 0.0);
        assert_eq!(decay_rate(&trace_of(&[2.0, 0.0])).unwrap(), 100.0);
        assert!(decay_rate(&trace_of(&[0.0, 1.0])).is_err());
        assert!(decay_rate(&trace_of(&[])).is_err());
    }

    #[test]
    fn sample_std_convention() {
        assert_eq!(mean_std(&[1.0, 2.0, 3.0]), (2.0, 1.0));
        assert!(mean_std(&[4.0]).1.is_nan());
    }

    fn base() -> ExperimentConfig {
        ExperimentConfig::parse(
            "name = t\nproblem = quadratic\nproblem.dim = 4\nmethod = rm\niterations = 50\n\
             step = fixed\nstep.h = 0.1\nseeds = 5,3,9\nmu = 1e-4",
        )
        .unwrap()
    }

    #[test]
    fn execution_is_deterministic_and_sorted() {
        let c = base();
        let a = execute(&c).unwrap();
        let b = execute(&c).unwrap();
        assert_eq!(a.render_csv(), b.render_csv());
        assert_eq!(a.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![3, 5, 9]);
        assert!(a.runs.iter().all(|r| r.final_f < r.trace.initial_f() && !r.flagged));
        let mut shuffled = c.clone();
        shuffled.seeds = vec![9, 5, 3];
        assert_eq!(execute(&shuffled).unwrap().render_csv(), a.render_csv());
    }

    #[test]
    fn start_is_projected_and_shared_by_repeats() {
        let mut c = base();
        c.set = SetSpec::L2 { radius: 0.5 };
        c.seeds = vec![1, 2, 3, 4];
        c.init_points = 2;
        let p = c.build_problem().unwrap();
        let set = c.build_set(4).unwrap();
        let starts: Vec<Vector> = (0..4).map(|i| c.start_point(&p, &set, i).unwrap()).collect();
        assert!(starts.iter().all(|s| s.norm() <= 0.5 + 1e-12));
        assert_eq!(starts[0], starts[2]);
        assert_eq!(starts[1], starts[3]);
        assert_ne!(starts[0], starts[1]);

        c.init = InitSpec::ProblemDefault;
        assert!(matches!(c.start_point(&p, &set, 0), Err(Error::Config { path, .. }) if path == "init"));
    }

    #[test]
    fn divergent_runs_are_flagged_not_dropped() {
        let mut c = base();
        c.method = Method::Gd;
        c.step = crate::solvers::StepRule::Fixed(3.0);
        let s = execute(&c).unwrap();
        assert_eq!(s.runs.len(), 3);
        assert_eq!(s.flagged(), 3);
        let csv = s.render_csv();
        assert!(csv.lines().any(|l| l.starts_with("mean_unflagged,NaN")));
    }

    #[test]
    fn files_written() {
        let dir = tempfile::tempdir().unwrap();
        let (s, out) = run_experiment(&base(), Some(dir.path())).unwrap();
        for r in &s.runs {
            let text = fs::read_to_string(out.join(trace_file_name(r.seed))).unwrap();
            assert_eq!(text.lines().count(), 52);
        }
        let summary = fs::read_to_string(out.join(SUMMARY_FILE)).unwrap();
        assert_eq!(summary.lines().next().unwrap(), SUMMARY_HEADER);
        assert_eq!(summary.lines().count(), 1 + 3 + 4);
    }

    fn run_with(seed: u64, final_f: f64, flagged: bool) -> SeedRun {
        SeedRun {
            seed,
            trace: trace_of(&[1.0]),
            start: Vector::zeros(1),
            final_f,
            best_f: final_f,
            decay_rate: 100.0 * (1.0 - final_f),
            wall_ms: 0.0,
            flagged,
            metric: None,
        }
    }

    #[test]
    fn three_seed_aggregate() {
        let s = RunSummary {
            name: "x".into(),
            metric_name: None,
            runs: vec![run_with(1, 1.0, false), run_with(2, 2.0, false), run_with(3, 3.0, true)],
        };
        assert_eq!(s.final_f(), (2.0, 1.0));
        let csv = s.render_csv();
        let mean_row: Vec<&str> = csv.lines().find(|l| l.starts_with("mean,")).unwrap().split(',').collect();
        assert_eq!(mean_row[1].parse::<f64>().unwrap(), 2.0);
        assert_eq!(mean_row[5], "1");
        let unflagged: Vec<&str> = csv.lines().find(|l| l.starts_with("mean_unflagged,")).unwrap().split(',').collect();
        assert_eq!(unflagged[1].parse::<f64>().unwrap(), 1.5);
    }

    proptest! {
        #[test]
        fn aggregates_match_columns_and_ignore_order(values in proptest::collection::vec(-1e3..1e3f64, 2..12), rot in 0..12usize) {
            let runs: Vec<SeedRun> = values.iter().enumerate().map(|(i, v)| run_with(i as u64, *v, false)).collect();
            let s = RunSummary { name: "p".into(), metric_name: None, runs: runs.clone() };
            let (m, sd) = s.final_f();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
            prop_assert!((m - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
            prop_assert!((sd - var.sqrt()).abs() <= 1e-12 * (1.0 + sd));

            let csv = s.render_csv();
            let parsed: Vec<f64> = csv.lines().skip(1).take(values.len())
                .map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
            let (pm, psd) = mean_std(&parsed);
            let row = |label: &str| -> f64 {
                csv.lines().find(|l| l.starts_with(&format!("{label},"))).unwrap().split(',').nth(1).unwrap().parse().unwrap()
            };
            prop_assert!((row("mean") - pm).abs() <= 1e-12 * (1.0 + pm.abs()));
            prop_assert!((row("std") - psd).abs() <= 1e-12 * (1.0 + psd));

            let mut permuted = runs;
            let k = rot % permuted.len();
            permuted.rotate_left(k);
            let last = permuted.len() - 1;
            permuted.swap(0, last);
            let t = RunSummary { name: "p".into(), metric_name: None, runs: permuted };
            prop_assert_eq!(t.render_csv(), csv);
        }
    }
}
