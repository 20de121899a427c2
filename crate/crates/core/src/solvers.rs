//! Random Min, projected gradient descent, and Armijo backtracking.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::geometry::FeasibleSet;
use crate::objective::{check_dim, eval_checked, Objective};
use crate::rng::RandomStream;
use crate::smoothing::{zo_oracle_batch, SmoothingConfig};
use crate::vector::{dist_sq, Vector};

/// Backtracking parameters: try `h0 * shrink^i` for `i = 0..=max_backtracks`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoParams {
    pub h0: f64,
    pub shrink: f64,
    pub slope: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            h0: 1.0,
            shrink: 0.5,
            slope: 1e-4,
            max_backtracks: 30,
        }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(invalid("step.h0", format!("must be positive, got {}", self.h0)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(invalid("step.shrink", format!("must lie in (0, 1), got {}", self.shrink)));
        }
        if !(self.slope > 0.0 && self.slope < 1.0) {
            return Err(invalid("step.slope", format!("must lie in (0, 1), got {}", self.slope)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    Armijo(ArmijoParams),
}

impl StepRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Fixed(h) if !(*h > 0.0 && h.is_finite()) => {
                Err(invalid("step.h", format!("must be positive, got {h}")))
            }
            Self::Fixed(_) => Ok(()),
            Self::Armijo(p) => p.validate(),
        }
    }
}

/// Settings for one solver run. `smoothing` is ignored by gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub iterations: usize,
    pub step: StepRule,
    pub seed: u64,
    pub smoothing: SmoothingConfig,
    pub start: Vector,
    /// When false every `elapsed_ms` is 0 so traces are reproducible byte for byte.
    pub record_time: bool,
}

impl RunConfig {
    pub fn new(start: Vector, iterations: usize, step: StepRule) -> Self {
        Self {
            iterations,
            step,
            seed: 0,
            smoothing: SmoothingConfig { mu: 1e-6, batch: 1 },
            start,
            record_time: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_smoothing(mut self, mu: f64, batch: usize) -> Self {
        self.smoothing = SmoothingConfig { mu, batch };
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub iter: usize,
    pub f: f64,
    pub best_f: f64,
    /// Step that produced this iterate; 0 for the start and for rejected updates.
    pub step: f64,
    /// Cumulative objective (or gradient) evaluations spent by the algorithm.
    /// Monitoring evaluations of `f` are not counted.
    pub fevals: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<Record>,
    pub final_point: Vector,
    pub best_point: Vector,
    /// Set when an evaluation failed; the records stop at the last good iterate.
    pub failure: Option<String>,
}

impl Trace {
    pub fn initial_f(&self) -> f64 {
        self.records[0].f
    }

    pub fn final_f(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.f)
    }

    pub fn best_f(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.best_f)
    }

    /// Objective value at iteration `k`, if recorded.
    pub fn f_at(&self, k: usize) -> Option<f64> {
        self.records.get(k).map(|r| r.f)
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Result of one backtracking search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearch {
    pub step: f64,
    /// Accepted point, or `x` itself when the step is 0.
    pub point: Vector,
    pub value: f64,
    pub evals: u64,
}

/// Largest `h = h0 * shrink^i` with `f(x + h d) <= f(x) - slope * h * |d|^2`,
/// or 0 when no trial qualifies. Trials with a non-finite value are rejected.
pub fn armijo_step<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    direction: &Vector,
    params: &ArmijoParams,
) -> Result<f64> {
    let fx = eval_checked(f, x)?;
    Ok(armijo_search(f, x, fx, direction, params, &FeasibleSet::WholeSpace)?.step)
}

/// Backtracking along `d` from `x` with known value `fx`. On a constrained
/// set the trial point is `project(x + h d)` and the decrease test uses the
/// realised displacement, `f(p) <= f(x) - slope * |x - p|^2 / h`, which is the
/// unconstrained test whenever no projection occurs.
pub fn armijo_search<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    fx: f64,
    direction: &Vector,
    params: &ArmijoParams,
    set: &FeasibleSet,
) -> Result<LineSearch> {
    params.validate()?;
    check_dim(f, x)?;
    check_dim(f, direction)?;
    if !fx.is_finite() {
        return Err(Error::Evaluation {
            point: x.to_vec(),
            value: fx,
        });
    }
    let mut h = params.h0;
    let mut evals = 0;
    for _ in 0..=params.max_backtracks {
        let raw: Vec<f64> = x.iter().zip(direction.iter()).map(|(a, d)| a + h * d).collect();
        if let Ok(raw) = Vector::new(raw) {
            let trial = set.project(&raw)?;
            let ft = f.value(&trial);
            evals += 1;
            let decrease = params.slope * dist_sq(x, &trial) / h;
            if ft.is_finite() && ft <= fx - decrease {
                return Ok(LineSearch {
                    step: h,
                    point: trial,
                    value: ft,
                    evals,
                });
            }
        }
        h *= params.shrink;
    }
    Ok(LineSearch {
        step: 0.0,
        point: x.clone(),
        value: fx,
        evals,
    })
}

enum Method {
    RandomMin,
    GradientDescent,
}

/// Random Min: `x_{k+1} = project(x_k - h_k g)` with `g` the mini-batch
/// Gaussian-smoothing oracle. With Armijo steps the direction is `-g` and
/// only objective values enter the decrease test.
pub fn random_min<F: Objective + ?Sized>(
    f: &F,
    set: &FeasibleSet,
    run: &RunConfig,
) -> Result<Trace> {
    run.smoothing.validate()?;
    solve(f, set, run, Method::RandomMin)
}

/// Projected gradient descent using the analytic gradient.
pub fn projected_gd<F: Objective + ?Sized>(
    f: &F,
    set: &FeasibleSet,
    run: &RunConfig,
) -> Result<Trace> {
    if !f.has_gradient() {
        return Err(Error::MissingGradient(
            "projected gradient descent needs an analytic gradient".into(),
        ));
    }
    solve(f, set, run, Method::GradientDescent)
}

fn solve<F: Objective + ?Sized>(
    f: &F,
    set: &FeasibleSet,
    run: &RunConfig,
    method: Method,
) -> Result<Trace> {
    run.step.validate()?;
    check_dim(f, &run.start)?;
    if !set.contains(&run.start) {
        return Err(Error::InfeasibleStart);
    }
    let clock = run.record_time.then(Instant::now);
    let elapsed = || clock.map_or(0.0, |c| c.elapsed().as_secs_f64() * 1e3);

    let mut stream = RandomStream::new(run.seed);
    let mut x = run.start.clone();
    let mut fx = eval_checked(f, &x)?;
    let mut best_point = x.clone();
    let mut best_f = fx;
    let mut fevals = 0u64;
    let mut records = Vec::with_capacity(run.iterations + 1);
    records.push(Record {
        iter: 0,
        f: fx,
        best_f,
        step: 0.0,
        fevals,
        elapsed_ms: elapsed(),
    });

    let mut failure = None;
    for k in 1..=run.iterations {
        let step = match step_once(f, set, run, &method, &x, fx, &mut stream) {
            Ok((next, h, evals)) => {
                fevals += evals;
                let value = match next.1 {
                    Some(v) => Ok(v),
                    None => eval_checked(f, &next.0),
                };
                value.map(|v| (next.0, v, h))
            }
            Err(e) => Err(e),
        };
        match step {
            Ok((next, value, h)) => {
                x = next;
                fx = value;
                if fx < best_f {
                    best_f = fx;
                    best_point = x.clone();
                }
                records.push(Record {
                    iter: k,
                    f: fx,
                    best_f,
                    step: h,
                    fevals,
                    elapsed_ms: elapsed(),
                });
            }
            Err(e) => {
                failure = Some(format!("iteration {k}: {e}"));
                break;
            }
        }
    }
    Ok(Trace {
        records,
        final_point: x,
        best_point,
        failure,
    })
}

type Step = ((Vector, Option<f64>), f64, u64);

fn step_once<F: Objective + ?Sized>(
    f: &F,
    set: &FeasibleSet,
    run: &RunConfig,
    method: &Method,
    x: &Vector,
    fx: f64,
    stream: &mut RandomStream,
) -> Result<Step> {
    let (g, mut evals) = match method {
        Method::RandomMin => (
            zo_oracle_batch(f, x, run.smoothing, stream)?,
            2 * run.smoothing.batch as u64,
        ),
        Method::GradientDescent => {
            let g = f
                .gradient(x)
                .ok_or_else(|| Error::MissingGradient("gradient returned None".into()))?;
            let g = Vector::new(g).map_err(|_| Error::Evaluation {
                point: x.to_vec(),
                value: f64::NAN,
            })?;
            (g, 1)
        }
    };
    match run.step {
        StepRule::Fixed(h) => {
            let raw = x.axpy(-h, &g).map_err(|_| Error::Evaluation {
                point: x.to_vec(),
                value: f64::INFINITY,
            })?;
            Ok(((set.project(&raw)?, None), h, evals))
        }
        StepRule::Armijo(params) => {
            let d = g.scaled(-1.0)?;
            let ls = armijo_search(f, x, fx, &d, &params, set)?;
            evals += ls.evals;
            Ok(((ls.point, Some(ls.value)), ls.step, evals))
        }
    }
}
