//! Sampling-based verification of quasar-convexity inequalities and of the
//! statistics of the smoothing oracle.
//!
//! The inequalities quantify over all points, so a passing report only
//! covers the caller's sampling box.

use crate::error::{invalid, Error, Result};
use crate::geometry::{gradient_mapping, FeasibleSet};
use crate::objective::{eval_checked, gradient_or_fd, Objective};
use crate::par;
use crate::problems::Problem;
use crate::rng::RandomStream;
use crate::smoothing::{
    estimate_batch_variance, estimate_f_mu, estimate_oracle_mean, estimate_smoothed_gradient,
    SmoothingConfig,
};
use crate::vector::{dist_sq, Vector};

pub const DEFAULT_SLACK: f64 = 1e-9;

/// Extra allowance `FD_ALLOWANCE * (1 + |f(x)|)` granted when the gradient
/// comes from finite differences.
pub const FD_ALLOWANCE: f64 = 1e-4;

/// Critical z-value for the unbiasedness sub-check.
pub const Z_LIMIT: f64 = 4.0;

/// Allowed multiplicative deviation from the `1/t` variance law.
pub const VARIANCE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SubCheck {
    pub name: &'static str,
    /// `None` when the sub-check was skipped for lack of information.
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub passed: bool,
    pub trials: usize,
    /// Largest observed violation; the check passes iff it is at most `slack`.
    pub worst_violation: f64,
    pub witness: Option<Vector>,
    pub slack: f64,
    pub subchecks: Vec<SubCheck>,
}

impl CheckReport {
    fn from_worst(trials: usize, worst: f64, witness: Option<Vector>, slack: f64) -> Self {
        Self {
            passed: worst <= slack,
            trials,
            worst_violation: worst,
            witness: if worst > 0.0 { witness } else { None },
            slack,
            subchecks: Vec::new(),
        }
    }
}

/// Axis-aligned sampling region.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(invalid("box", "bounds must be finite with lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn of_problem(p: &Problem) -> Result<Self> {
        Self::new(p.test_box.0.clone(), p.test_box.1.clone())
    }

    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn draw(&self, trials: usize, stream: &mut RandomStream) -> Vec<Vec<f64>> {
        (0..trials)
            .map(|_| {
                self.lower
                    .iter()
                    .zip(&self.upper)
                    .map(|(l, u)| stream.uniform_in(*l, *u))
                    .collect()
            })
            .collect()
    }
}

fn check_gamma_beta(gamma: f64, beta: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be non-negative, got {beta}")));
    }
    Ok(())
}

/// Evaluates `violation(i)` for every probe in parallel and keeps the
/// largest, preferring the lowest index on ties.
fn worst_of(
    probes: &[Vec<f64>],
    violation: impl Fn(&[f64]) -> Result<f64> + Sync + Send,
) -> Result<(f64, Option<Vector>)> {
    let values = par::map_slice(probes, |x| violation(x));
    let mut worst = f64::NEG_INFINITY;
    let mut arg = None;
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > worst {
            worst = v;
            arg = Some(i);
        }
    }
    let witness = arg.map(|i| Vector::new(probes[i].clone())).transpose()?;
    Ok((worst, witness))
}

/// Samples `trials` points `x` uniformly from `region` and reports the
/// largest `f(x) + <grad f(x), x* - x> / gamma + (beta / 2) |x* - x|^2 - f(x*)`.
/// Non-positive everywhere means the (strong) quasar-convexity inequality
/// held on every probe.
pub fn check_quasar_convexity<F: Objective + ?Sized>(
    f: &F,
    gamma: f64,
    beta: f64,
    xstar: &Vector,
    region: &SamplingBox,
    trials: usize,
    stream: &mut RandomStream,
) -> Result<CheckReport> {
    check_quasar_inputs(f, gamma, beta, xstar, region)?;
    let probes = region.draw(trials, stream);
    let fstar = eval_checked(f, xstar)?;
    let (worst, witness) = worst_of(&probes, |x| {
        let fx = eval_checked(f, x)?;
        let (g, fd) = gradient_or_fd(f, x)?;
        let inner: f64 = g.iter().zip(xstar.iter().zip(x)).map(|(gi, (s, xi))| gi * (s - xi)).sum();
        let v = fx + inner / gamma + 0.5 * beta * dist_sq(xstar, x) - fstar;
        Ok(if fd { v - FD_ALLOWANCE * (1.0 + fx.abs()) } else { v })
    })?;
    Ok(CheckReport::from_worst(trials, worst, witness, DEFAULT_SLACK))
}

fn check_quasar_inputs<F: Objective + ?Sized>(
    f: &F,
    gamma: f64,
    beta: f64,
    xstar: &Vector,
    region: &SamplingBox,
) -> Result<()> {
    check_gamma_beta(gamma, beta)?;
    for d in [xstar.dim(), region.dim()] {
        if d != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: d,
            });
        }
    }
    Ok(())
}

/// Constrained analogue of [`check_quasar_convexity`]: probes are sampled
/// from `region` and projected onto `set`, and the gradient is replaced by
/// the gradient mapping `(x - project(x - a grad f(x))) / a`. On the whole
/// space it reproduces [`check_quasar_convexity`] exactly.
#[allow(clippy::too_many_arguments)]
pub fn check_proximal_quasar_convexity<F: Objective + ?Sized>(
    f: &F,
    set: &FeasibleSet,
    gamma: f64,
    beta: f64,
    a: f64,
    xstar: &Vector,
    region: &SamplingBox,
    trials: usize,
    stream: &mut RandomStream,
) -> Result<CheckReport> {
    check_quasar_inputs(f, gamma, beta, xstar, region)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be positive, got {a}")));
    }
    if !set.contains(xstar) {
        return Err(invalid("xstar", "reference point is not feasible"));
    }
    let probes = region
        .draw(trials, stream)
        .into_iter()
        .map(|x| Ok(set.project(&Vector::new(x)?)?.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let fstar = eval_checked(f, xstar)?;
    let (worst, witness) = worst_of(&probes, |x| {
        let fx = eval_checked(f, x)?;
        let (g, fd) = gradient_or_fd(f, x)?;
        let xv = Vector::new(x.to_vec())?;
        let p = gradient_mapping(&xv, &Vector::new(g)?, a, set)?;
        let inner: f64 = p.iter().zip(xstar.iter().zip(x)).map(|(pi, (s, xi))| pi * (s - xi)).sum();
        let v = fx + inner / gamma + 0.5 * beta * dist_sq(xstar, x) - fstar;
        Ok(if fd { v - FD_ALLOWANCE * (1.0 + fx.abs()) } else { v })
    })?;
    Ok(CheckReport::from_worst(trials, worst, witness, DEFAULT_SLACK))
}

/// Batch sizes used by the variance-scaling sub-check.
pub const SCALING_BATCHES: [usize; 3] = [1, 4, 16];

/// Three statistical sub-checks of the oracle at `x`:
/// unbiasedness (mean oracle vs mean `grad f(x + mu u)`, z below
/// [`Z_LIMIT`] per coordinate), smoothing bias
/// (`|f_mu(x) - f(x)| <= mu^2 L1 n / 2 + 3 se`), and variance scaling
/// (`v(t)` within [`VARIANCE_FACTOR`] of `v(1) / t`). Sub-checks that need
/// an analytic gradient or a declared `L1` are skipped when those are missing.
/// `worst_violation` is the largest margin by which any sub-check missed.
pub fn check_oracle_statistics(
    problem: &Problem,
    x: &Vector,
    cfg: SmoothingConfig,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<CheckReport> {
    cfg.validate()?;
    if samples < 8 {
        return Err(invalid("samples", "need at least 8 samples"));
    }
    let mut subchecks = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let n = x.dim();

    if problem.has_gradient() {
        let mut s1 = stream.child(0);
        let mut s2 = stream.child(1);
        let oracle = estimate_oracle_mean(problem, x, cfg.mu, samples, &mut s1)?;
        let smooth = estimate_smoothed_gradient(problem, x, cfg.mu, samples, &mut s2)?;
        let mut zmax: f64 = 0.0;
        for j in 0..n {
            let diff = (oracle.mean[j] - smooth.mean[j]).abs();
            let se = oracle.stderr[j].hypot(smooth.stderr[j]);
            let z = if diff == 0.0 { 0.0 } else { diff / se };
            zmax = zmax.max(z);
        }
        worst = worst.max(zmax - Z_LIMIT);
        subchecks.push(SubCheck {
            name: "unbiasedness",
            passed: Some(zmax < Z_LIMIT),
            detail: format!("max |z| = {zmax:.3} over {n} coordinates"),
        });
    } else {
        subchecks.push(SubCheck {
            name: "unbiasedness",
            passed: None,
            detail: "skipped: no analytic gradient".into(),
        });
    }

    if let Some(l1) = problem.constants.l1 {
        let mut s3 = stream.child(2);
        let fx = eval_checked(problem, x)?;
        let est = estimate_f_mu(problem, x, cfg.mu, samples, &mut s3)?;
        let bias = (est.mean - fx).abs();
        let allowed = cfg.mu * cfg.mu * l1 * n as f64 / 2.0 + 3.0 * est.stderr;
        worst = worst.max(bias - allowed);
        subchecks.push(SubCheck {
            name: "bias",
            passed: Some(bias <= allowed),
            detail: format!("|f_mu - f| = {bias:.3e}, allowed {allowed:.3e}"),
        });
    } else {
        subchecks.push(SubCheck {
            name: "bias",
            passed: None,
            detail: "skipped: no declared L1".into(),
        });
    }

    let replicates = (samples / 4).max(8);
    let mut variances = Vec::new();
    for (k, &t) in SCALING_BATCHES.iter().enumerate() {
        let mut s = stream.child(3 + k as u64);
        let c = SmoothingConfig { mu: cfg.mu, batch: t };
        variances.push(estimate_batch_variance(problem, x, c, replicates, &mut s)?.mean);
    }
    let mut ratio_worst: f64 = 1.0;
    for (&t, v) in SCALING_BATCHES.iter().zip(&variances) {
        let expected = variances[0] / t as f64;
        let ratio = if expected == 0.0 && *v == 0.0 { 1.0 } else { v / expected };
        ratio_worst = ratio_worst.max(ratio.max(1.0 / ratio));
    }
    worst = worst.max(ratio_worst - VARIANCE_FACTOR);
    subchecks.push(SubCheck {
        name: "variance_scaling",
        passed: Some(ratio_worst <= VARIANCE_FACTOR),
        detail: format!(
            "v(1), v(4), v(16) = {:.4e}, {:.4e}, {:.4e}; worst ratio {ratio_worst:.3}",
            variances[0], variances[1], variances[2]
        ),
    });

    let passed = subchecks.iter().all(|s| s.passed != Some(false));
    Ok(CheckReport {
        passed,
        trials: samples,
        worst_violation: if passed { worst.min(0.0) } else { worst },
        witness: None,
        slack: 0.0,
        subchecks,
    })
}
