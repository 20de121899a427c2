//! Gaussian smoothing: the two-point zeroth-order oracle, its mini-batch
//! average, and Monte-Carlo estimators for `f_mu`, the oracle variance and
//! the smoothed gradient.
//!
//! The correlation operator is the identity, so a direction is a standard
//! normal vector and the oracle is `(f(x + mu u) - f(x)) / mu * u`.
//!
//! Monte-Carlo estimators draw directions sequentially from the caller's
//! stream in fixed-size chunks, evaluate each chunk with [`crate::par`], and
//! reduce in draw order. Results are bit-identical for any worker count.

use crate::error::{invalid, Result};
use crate::objective::{check_dim, eval_checked, gradient_or_fd, Objective};
use crate::par;
use crate::rng::RandomStream;
use crate::vector::Vector;

/// Smoothing radius `mu` and directions per iterate `batch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    pub mu: f64,
    pub batch: usize,
}

impl SmoothingConfig {
    pub fn new(mu: f64, batch: usize) -> Result<Self> {
        let cfg = Self { mu, batch };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(invalid("mu", format!("must be positive, got {}", self.mu)));
        }
        if self.batch == 0 {
            return Err(invalid("batch", "must be at least 1"));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Per-coordinate sample means with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    fn estimate(&self) -> MonteCarloEstimate {
        MonteCarloEstimate {
            mean: self.mean,
            stderr: (self.variance() / self.count as f64).sqrt(),
            samples: self.count,
        }
    }
}

#[derive(Debug, Clone)]
struct VecWelford {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl VecWelford {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / k;
            *s += delta * (v - *m);
        }
    }

    fn estimate(&self) -> VectorEstimate {
        let denom = (self.count.max(2) - 1) as f64;
        VectorEstimate {
            mean: self.mean.clone(),
            stderr: self
                .m2
                .iter()
                .map(|s| (s / denom / self.count as f64).sqrt())
                .collect(),
            samples: self.count,
        }
    }
}

const CHUNK: usize = 2048;

/// Draws `blocks` blocks of `per_block` directions of dimension `dim`, in
/// order, evaluates each block (possibly in parallel) and feeds the results
/// to `sink` in draw order.
fn for_each_block<T, E, S>(
    dim: usize,
    per_block: usize,
    blocks: usize,
    stream: &mut RandomStream,
    eval: E,
    mut sink: S,
) -> Result<()>
where
    T: Send,
    E: Fn(&[f64]) -> Result<T> + Sync + Send,
    S: FnMut(T),
{
    let width = dim * per_block;
    let chunk = (CHUNK / per_block).max(1);
    let mut buf = vec![0.0; chunk * width];
    let mut remaining = blocks;
    while remaining > 0 {
        let m = remaining.min(chunk);
        for dir in buf[..m * width].chunks_exact_mut(dim.max(1)).take(m * per_block) {
            if dim > 0 {
                stream.fill_standard_normal(dir);
            }
        }
        let results = par::map_range(m, |i| eval(&buf[i * width..(i + 1) * width]));
        for r in results {
            sink(r?);
        }
        remaining -= m;
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(invalid("mu", format!("must be positive, got {mu}")))
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples >= 2 {
        Ok(())
    } else {
        Err(invalid("samples", "need at least 2"))
    }
}

fn shifted(x: &[f64], mu: f64, u: &[f64]) -> Vec<f64> {
    x.iter().zip(u).map(|(a, b)| a + mu * b).collect()
}

/// Oracle from a known `f(x)`: two evaluations' worth of information, one
/// of which the caller already paid for.
fn oracle_with_fx<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    fx: f64,
    mu: f64,
    u: &[f64],
) -> Result<Vec<f64>> {
    let fy = eval_checked(f, &shifted(x, mu, u))?;
    let scale = (fy - fx) / mu;
    Ok(u.iter().map(|v| scale * v).collect())
}

/// Single-direction oracle `((f(x + mu u) - f(x)) / mu) u`. Exactly two
/// objective evaluations.
pub fn zo_oracle_single<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    mu: f64,
    u: &Vector,
) -> Result<Vector> {
    check_mu(mu)?;
    check_dim(f, x)?;
    check_dim(f, u)?;
    let fx = eval_checked(f, x)?;
    Vector::new(oracle_with_fx(f, x, fx, mu, u)?)
}

fn single_raw<F: Objective + ?Sized>(f: &F, x: &[f64], mu: f64, u: &[f64]) -> Result<Vec<f64>> {
    let fx = eval_checked(f, x)?;
    oracle_with_fx(f, x, fx, mu, u)
}

/// Batches at least this large are evaluated on the worker pool.
const PARALLEL_BATCH: usize = 16;

fn batch_mean_raw<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    dirs: &[f64],
    batch: usize,
) -> Result<Vec<f64>> {
    let n = x.len();
    let mut sum: Option<Vec<f64>> = None;
    let mut add = |g: Vec<f64>| match sum.as_mut() {
        None => sum = Some(g),
        Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
    };
    if batch >= PARALLEL_BATCH && n > 0 {
        let gs = par::map_range(batch, |i| single_raw(f, x, mu, &dirs[i * n..(i + 1) * n]));
        for g in gs {
            add(g?);
        }
    } else {
        for i in 0..batch {
            add(single_raw(f, x, mu, &dirs[i * n..(i + 1) * n])?);
        }
    }
    let mut mean = sum.unwrap_or_default();
    let t = batch as f64;
    mean.iter_mut().for_each(|v| *v /= t);
    Ok(mean)
}

/// Mini-batch oracle: draws exactly `cfg.batch` directions from `stream`
/// and returns the mean of the single-direction oracles, summed in draw
/// order. Uses `2 * cfg.batch` objective evaluations.
pub fn zo_oracle_batch<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    cfg: SmoothingConfig,
    stream: &mut RandomStream,
) -> Result<Vector> {
    cfg.validate()?;
    check_dim(f, x)?;
    let n = x.dim();
    let mut dirs = vec![0.0; n * cfg.batch];
    if n > 0 {
        for d in dirs.chunks_exact_mut(n) {
            stream.fill_standard_normal(d);
        }
    }
    Vector::new(batch_mean_raw(f, x, cfg.mu, &dirs, cfg.batch)?)
}

/// Monte-Carlo estimate of the smoothed value `f_mu(x) = E f(x + mu u)`.
pub fn estimate_f_mu<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    mu: f64,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<MonteCarloEstimate> {
    check_mu(mu)?;
    check_samples(samples)?;
    check_dim(f, x)?;
    let mut acc = Welford::default();
    for_each_block(
        x.dim(),
        1,
        samples,
        stream,
        |u| eval_checked(f, &shifted(x, mu, u)),
        |v| acc.push(v),
    )?;
    Ok(acc.estimate())
}

/// Per-coordinate Monte-Carlo mean of the single-direction oracle.
pub fn estimate_oracle_mean<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    mu: f64,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<VectorEstimate> {
    check_mu(mu)?;
    check_samples(samples)?;
    check_dim(f, x)?;
    let fx = eval_checked(f, x)?;
    let mut acc = VecWelford::new(x.dim());
    for_each_block(
        x.dim(),
        1,
        samples,
        stream,
        |u| oracle_with_fx(f, x, fx, mu, u),
        |g| acc.push(&g),
    )?;
    Ok(acc.estimate())
}

/// Per-coordinate Monte-Carlo mean of `grad f(x + mu u)`, an independent
/// estimator of `grad f_mu(x)`. Falls back to central differences when the
/// objective has no analytic gradient.
pub fn estimate_smoothed_gradient<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    mu: f64,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<VectorEstimate> {
    check_mu(mu)?;
    check_samples(samples)?;
    check_dim(f, x)?;
    let mut acc = VecWelford::new(x.dim());
    for_each_block(
        x.dim(),
        1,
        samples,
        stream,
        |u| gradient_or_fd(f, &shifted(x, mu, u)).map(|(g, _)| g),
        |g| acc.push(&g),
    )?;
    Ok(acc.estimate())
}

/// Estimates `E ||G - E G||^2` for a random vector `G` produced block by
/// block, using two passes over the same directions (a cloned stream).
/// The mean is the unbiased `1/(M-1)` variance; the standard error comes
/// from the per-sample squared deviations.
fn spread_estimate<E>(
    dim: usize,
    per_block: usize,
    samples: usize,
    stream: &mut RandomStream,
    eval: E,
) -> Result<MonteCarloEstimate>
where
    E: Fn(&[f64]) -> Result<Vec<f64>> + Sync + Send,
{
    let mut replay = stream.clone();
    let mut first = VecWelford::new(dim);
    for_each_block(dim, per_block, samples, stream, &eval, |g| first.push(&g))?;
    let center = first.mean;
    let mut dev = Welford::default();
    for_each_block(
        dim,
        per_block,
        samples,
        &mut replay,
        |u| {
            let g = eval(u)?;
            Ok(g.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        },
        |d| dev.push(d),
    )?;
    let correction = samples as f64 / (samples - 1) as f64;
    let mut est = dev.estimate();
    est.mean *= correction;
    est.stderr *= correction;
    Ok(est)
}

/// Monte-Carlo estimate of the oracle variance `E ||g_mu(x) - grad f_mu(x)||^2`,
/// with the empirical mean oracle standing in for `grad f_mu(x)`.
pub fn estimate_sigma_squared<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    cfg: SmoothingConfig,
    samples: usize,
    stream: &mut RandomStream,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    check_samples(samples)?;
    check_dim(f, x)?;
    let fx = eval_checked(f, x)?;
    spread_estimate(x.dim(), 1, samples, stream, |u| {
        oracle_with_fx(f, x, fx, cfg.mu, u)
    })
}

/// Variance of the mini-batch oracle mean at batch size `cfg.batch`, from
/// `replicates` independent batches. Replicate `i` uses the same directions
/// that the `i`-th consecutive [`zo_oracle_batch`] call on `stream` would.
pub fn estimate_batch_variance<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    cfg: SmoothingConfig,
    replicates: usize,
    stream: &mut RandomStream,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    check_samples(replicates)?;
    check_dim(f, x)?;
    spread_estimate(x.dim(), cfg.batch, replicates, stream, |dirs| {
        batch_mean_raw(f, x, cfg.mu, dirs, cfg.batch)
    })
}

/// Candidate upper bound on the oracle second moment for an objective with
/// `l1`-Lipschitz gradient: `(mu^2 / 2) l1^2 (n + 6)^3 + 2 (n + 4) ||grad f(x)||^2`.
pub fn sigma_squared_candidate(mu: f64, l1: f64, n: usize, grad_norm_sq: f64) -> f64 {
    let n = n as f64;
    0.5 * mu * mu * l1 * l1 * (n + 6.0).powi(3) + 2.0 * (n + 4.0) * grad_norm_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnObjective;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn half_sq(n: usize) -> FnObjective {
        FnObjective::new(n, |x| 0.5 * x.iter().map(|a| a * a).sum::<f64>())
            .with_gradient(|x| x.to_vec())
    }

    #[test]
    fn single_oracle_examples() {
        let lin = FnObjective::new(2, |x| x[0]);
        for mu in [1e-3, 0.5, 7.0] {
            let g = zo_oracle_single(&lin, &v(&[0.0, 0.0]), mu, &v(&[1.0, 1.0])).unwrap();
            assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-12);
        }
        let g = zo_oracle_single(&half_sq(2), &v(&[1.0, 0.0]), 2.0, &v(&[0.0, 1.0])).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 1.0]);
        let c = FnObjective::new(3, |_| 4.2);
        let g = zo_oracle_single(&c, &v(&[1.0, 2.0, 3.0]), 0.3, &v(&[0.5, -1.0, 2.0])).unwrap();
        assert!(g.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn single_oracle_errors() {
        let f = FnObjective::new(1, |x| if x[0] > 0.5 { f64::NAN } else { x[0] });
        let err = zo_oracle_single(&f, &v(&[0.0]), 1.0, &v(&[1.0])).unwrap_err();
        match err {
            crate::Error::Evaluation { point, .. } => assert_eq!(point, vec![1.0]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(zo_oracle_single(&f, &v(&[0.0]), 0.0, &v(&[1.0])).is_err());
        assert!(zo_oracle_single(&f, &v(&[0.0, 1.0]), 1.0, &v(&[1.0])).is_err());
    }

    #[test]
    fn batch_of_one_matches_single() {
        let f = half_sq(4);
        let x = v(&[1.0, -2.0, 0.5, 3.0]);
        let mut s1 = RandomStream::new(9);
        let mut s2 = RandomStream::new(9);
        let cfg = SmoothingConfig::new(0.01, 1).unwrap();
        let g_batch = zo_oracle_batch(&f, &x, cfg, &mut s1).unwrap();
        let u = s2.standard_normal(4);
        let g_single = zo_oracle_single(&f, &x, 0.01, &u).unwrap();
        assert_eq!(g_batch, g_single);
        assert_eq!(s1.position(), s2.position());
    }

    #[test]
    fn batch_mean_of_linear_objective_is_unbiased() {
        let c = [2.0, -1.0, 0.5];
        let f = FnObjective::new(3, move |x| c.iter().zip(x).map(|(a, b)| a * b).sum());
        let x = v(&[0.3, 0.1, -0.2]);
        let m = 10_000;
        let est = estimate_oracle_mean(&f, &x, 0.1, m, &mut RandomStream::new(5)).unwrap();
        for i in 0..3 {
            assert!(
                (est.mean[i] - c[i]).abs() < 3.0 * est.stderr[i],
                "coord {i}: {} vs {} (se {})",
                est.mean[i],
                c[i],
                est.stderr[i]
            );
        }
        // One batch of 10^4 draws averages to the same neighbourhood.
        let cfg = SmoothingConfig::new(0.1, m).unwrap();
        let g = zo_oracle_batch(&f, &x, cfg, &mut RandomStream::new(6)).unwrap();
        for i in 0..3 {
            assert!((g[i] - c[i]).abs() < 3.0 * est.stderr[i] * 1.5);
        }
    }

    #[test]
    fn f_mu_examples() {
        let c = FnObjective::new(3, |_| 1.5);
        let est = estimate_f_mu(&c, &Vector::zeros(3), 0.2, 100, &mut RandomStream::new(1)).unwrap();
        assert_eq!(est.mean, 1.5);
        assert_eq!(est.stderr, 0.0);

        let f = half_sq(5);
        let est =
            estimate_f_mu(&f, &Vector::zeros(5), 0.1, 100_000, &mut RandomStream::new(2)).unwrap();
        assert!((est.mean - 0.025).abs() < 3.0 * est.stderr, "{est:?}");

        assert!(estimate_f_mu(&f, &Vector::zeros(5), 0.1, 1, &mut RandomStream::new(2)).is_err());
    }

    #[test]
    fn sigma_squared_examples() {
        let c = FnObjective::new(2, |_| 3.0);
        let cfg = SmoothingConfig::new(0.1, 1).unwrap();
        let est =
            estimate_sigma_squared(&c, &Vector::zeros(2), cfg, 1000, &mut RandomStream::new(3))
                .unwrap();
        assert_eq!(est.mean, 0.0);

        // f = x_1 on R^3: E||g - e_1||^2 = n + 1.
        let lin = FnObjective::new(3, |x| x[0]);
        let est = estimate_sigma_squared(
            &lin,
            &Vector::zeros(3),
            cfg,
            100_000,
            &mut RandomStream::new(4),
        )
        .unwrap();
        assert!((est.mean - 4.0).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn sigma_squared_respects_candidate_bound() {
        let f = half_sq(4);
        let x = v(&[1.0, -1.0, 2.0, 0.0]);
        let cfg = SmoothingConfig::new(0.05, 1).unwrap();
        let est = estimate_sigma_squared(&f, &x, cfg, 50_000, &mut RandomStream::new(8)).unwrap();
        let bound = sigma_squared_candidate(0.05, 1.0, 4, x.norm_sq());
        assert!(est.mean <= bound + 3.0 * est.stderr, "{est:?} vs {bound}");
    }

    #[test]
    fn batch_variance_follows_inverse_batch_law() {
        let f = half_sq(3);
        let x = v(&[1.0, 1.0, 1.0]);
        let mut vars = Vec::new();
        for t in [1, 4, 16, 64] {
            let cfg = SmoothingConfig::new(1e-4, t).unwrap();
            let est =
                estimate_batch_variance(&f, &x, cfg, 4000, &mut RandomStream::derive(11, t as u64))
                    .unwrap();
            vars.push((t, est.mean));
        }
        let v1 = vars[0].1;
        for (t, vt) in vars {
            let ratio = vt * t as f64 / v1;
            assert!((1.0 / 1.5..=1.5).contains(&ratio), "t={t}: ratio {ratio}");
        }
    }

    #[test]
    fn batch_replicates_match_sequential_batches() {
        let f = half_sq(2);
        let x = v(&[0.5, -0.5]);
        let cfg = SmoothingConfig::new(0.01, 3).unwrap();
        let mut s = RandomStream::new(12);
        let gs: Vec<Vector> = (0..50)
            .map(|_| zo_oracle_batch(&f, &x, cfg, &mut s).unwrap())
            .collect();
        let mean: Vec<f64> = (0..2)
            .map(|j| gs.iter().map(|g| g[j]).sum::<f64>() / 50.0)
            .collect();
        let direct = gs
            .iter()
            .map(|g| (g[0] - mean[0]).powi(2) + (g[1] - mean[1]).powi(2))
            .sum::<f64>()
            / 49.0;
        let est = estimate_batch_variance(&f, &x, cfg, 50, &mut RandomStream::new(12)).unwrap();
        assert!((est.mean - direct).abs() < 1e-12 * direct.max(1.0));
    }
}
