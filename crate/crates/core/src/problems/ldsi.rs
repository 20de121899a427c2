//! Linear dynamical system identification.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::objective::Objective;
use crate::par;
use crate::rng::RandomStream;
use crate::vector::{dot, Vector};

use super::Problem;

/// Single-input single-output system `x' = A x + B u`, `y = C x + D u`.
/// `a` is row-major `n x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

fn mat_vec(a: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (o, row) in out.iter_mut().zip(a.chunks_exact(n)) {
        *o = dot(row, x);
    }
}

impl LtiSystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: f64) -> Result<Self> {
        let n = b.len();
        if a.len() != n * n || c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        let all = a.iter().chain(&b).chain(&c).chain(std::iter::once(&d));
        if let Some(i) = all.clone().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { n, a, b, c, d })
    }

    /// Outputs for inputs `u_0..u_T` from `x_0 = 0`.
    pub fn simulate(&self, inputs: &[f64]) -> Vec<f64> {
        simulate(&self.a, &self.b, &self.c, self.d, inputs)
    }

    /// Parameters `(A row-major, C, D)` in the layout used by [`ldsi_problem`].
    pub fn pack(&self) -> Vector {
        let mut v = self.a.clone();
        v.extend_from_slice(&self.c);
        v.push(self.d);
        Vector::new(v).expect("system entries are finite")
    }

    pub fn spectral_radius_bound(&self) -> f64 {
        spectral_radius_bound(&self.a, self.n)
    }
}

fn simulate(a: &[f64], b: &[f64], c: &[f64], d: f64, inputs: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    inputs
        .iter()
        .map(|&u| {
            let y = dot(c, &x) + d * u;
            mat_vec(a, &x, &mut next);
            for (xi, (ni, bi)) in x.iter_mut().zip(next.iter().zip(b)) {
                *xi = ni + bi * u;
            }
            y
        })
        .collect()
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    out
}

/// Upper bound on the spectral radius from `|A^k|_F^(1/k)` over
/// `k = 1, 2, 4, ..., 2^40`, using normalised repeated squaring. Every term
/// bounds the radius from above and the sequence converges to it.
pub fn spectral_radius_bound(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut log_scale = 0.0;
    let mut k = 1.0;
    let mut best = f64::INFINITY;
    for _ in 0..=40 {
        let norm = frobenius(&m);
        if norm == 0.0 {
            return 0.0;
        }
        if !norm.is_finite() {
            break;
        }
        m.iter_mut().for_each(|v| *v /= norm);
        log_scale += norm.ln();
        best = best.min((log_scale / k).exp());
        m = mat_mul(&m, &m, n);
        log_scale *= 2.0;
        k *= 2.0;
    }
    best
}

/// Chain of five coupled mass-spring-dampers (positions and velocities
/// interleaved), discretised by forward Euler with step 0.05.
///
/// The end masses use the diagonal `-(k + k_cpl) / m` and the inner ones
/// `-(k + 2 k_cpl) / m`.
pub fn mass_spring_chain() -> LtiSystem {
    let masses = [1.0, 1.1, 1.2, 1.0, 0.9];
    let (k, c, k_cpl, ts) = (2.0, 0.4, 0.6, 0.05);
    let n = 10;
    let mut ac = vec![0.0; n * n];
    let mut bc = vec![0.0; n];
    for (j, &m) in masses.iter().enumerate() {
        let (p, v) = (2 * j, 2 * j + 1);
        ac[p * n + v] = 1.0;
        let couplings = if j == 0 || j == masses.len() - 1 { 1.0 } else { 2.0 };
        ac[v * n + p] = -(k + couplings * k_cpl) / m;
        ac[v * n + v] = -c / m;
        if j > 0 {
            ac[v * n + p - 2] = k_cpl / m;
        }
        if j + 1 < masses.len() {
            ac[v * n + p + 2] = k_cpl / m;
        }
        bc[v] = 1.0 / m;
    }
    let mut a: Vec<f64> = ac.iter().map(|v| ts * v).collect();
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    let b = bc.iter().map(|v| ts * v).collect();
    let c_out = vec![0.0, 0.0, 0.2, 0.0, 1.0, 0.0, 0.2, 0.0, 0.2, 0.0];
    LtiSystem::new(a, b, c_out, 0.0).expect("finite chain")
}

/// Input/output sequences `u_0..u_T`, `y_0..y_T` with a loss window
/// starting at `warmup`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDataset {
    sequences: Vec<(Vec<f64>, Vec<f64>)>,
    horizon: usize,
    warmup: usize,
}

impl SequenceDataset {
    pub fn new(sequences: Vec<(Vec<f64>, Vec<f64>)>, horizon: usize, warmup: usize) -> Result<Self> {
        if warmup >= horizon {
            return Err(invalid("warmup", format!("must be below the horizon {horizon}, got {warmup}")));
        }
        if sequences.is_empty() {
            return Err(invalid("sequences", "need at least one sequence"));
        }
        for (i, (u, y)) in sequences.iter().enumerate() {
            if u.len() != horizon + 1 || y.len() != horizon + 1 {
                return Err(invalid(
                    "sequences",
                    format!("sequence {i} must hold {} inputs and outputs", horizon + 1),
                ));
            }
        }
        Ok(Self {
            sequences,
            horizon,
            warmup,
        })
    }

    /// `count` sequences with standard-normal inputs and outputs of
    /// `system` plus `noise * N(0, 1)`.
    pub fn generate(
        system: &LtiSystem,
        count: usize,
        horizon: usize,
        warmup: usize,
        noise: f64,
        stream: &mut RandomStream,
    ) -> Result<Self> {
        let sequences = (0..count)
            .map(|_| {
                let u = stream.standard_normal(horizon + 1).into_inner();
                let mut y = system.simulate(&u);
                let xi = stream.standard_normal(horizon + 1);
                y.iter_mut().zip(xi.iter()).for_each(|(yi, e)| *yi += noise * e);
                (u, y)
            })
            .collect();
        Self::new(sequences, horizon, warmup)
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn sequences(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.sequences
    }
}

struct LdsiLoss {
    data: SequenceDataset,
    b: Vec<f64>,
    n: usize,
}

impl LdsiLoss {
    fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], f64) {
        let nn = self.n * self.n;
        (&p[..nn], &p[nn..nn + self.n], p[nn + self.n])
    }

    fn window_norm(&self) -> f64 {
        (self.data.horizon - self.data.warmup) as f64
    }

    fn sequence_loss(&self, p: &[f64], u: &[f64], y: &[f64]) -> f64 {
        let (a, c, d) = self.split(p);
        let yhat = simulate(a, &self.b, c, d, u);
        yhat.iter()
            .zip(y)
            .skip(self.data.warmup)
            .map(|(h, t)| (t - h) * (t - h))
            .sum::<f64>()
            / self.window_norm()
    }

    /// Adjoint pass: `lambda_i = C^T e'_i + A^T lambda_{i+1}` with
    /// `e'_i = 2 w (yhat_i - y_i)` inside the window.
    fn sequence_gradient(&self, p: &[f64], u: &[f64], y: &[f64], w: f64) -> Vec<f64> {
        let n = self.n;
        let (a, c, d) = self.split(p);
        let steps = u.len();
        let mut states = vec![0.0; steps * n];
        let mut next = vec![0.0; n];
        for i in 0..steps - 1 {
            let (cur, rest) = states.split_at_mut((i + 1) * n);
            let x = &cur[i * n..];
            mat_vec(a, x, &mut next);
            for (j, s) in rest[..n].iter_mut().enumerate() {
                *s = next[j] + self.b[j] * u[i];
            }
        }
        let mut grad = vec![0.0; n * n + n + 1];
        let mut lambda = vec![0.0; n];
        let mut prev = vec![0.0; n];
        for i in (0..steps).rev() {
            let x = &states[i * n..(i + 1) * n];
            // Contribution of x_{i+1} = A x_i + B u_i.
            if i + 1 < steps {
                for r in 0..n {
                    let lr = lambda[r];
                    if lr != 0.0 {
                        for (g, xc) in grad[r * n..(r + 1) * n].iter_mut().zip(x) {
                            *g += lr * xc;
                        }
                    }
                }
            }
            let e = if i >= self.data.warmup {
                2.0 * w * (dot(c, x) + d * u[i] - y[i])
            } else {
                0.0
            };
            for (g, xc) in grad[n * n..n * n + n].iter_mut().zip(x) {
                *g += e * xc;
            }
            grad[n * n + n] += e * u[i];
            // lambda_i = C^T e + A^T lambda_{i+1}
            for (j, pj) in prev.iter_mut().enumerate() {
                let mut s = c[j] * e;
                for r in 0..n {
                    s += a[r * n + j] * lambda[r];
                }
                *pj = s;
            }
            std::mem::swap(&mut lambda, &mut prev);
        }
        grad
    }
}

impl Objective for LdsiLoss {
    fn dim(&self) -> usize {
        self.n * self.n + self.n + 1
    }

    fn value(&self, p: &[f64]) -> f64 {
        let seqs = self.data.sequences();
        let losses = par::map_range(seqs.len(), |s| self.sequence_loss(p, &seqs[s].0, &seqs[s].1));
        losses.iter().sum::<f64>() / seqs.len() as f64
    }

    fn gradient(&self, p: &[f64]) -> Option<Vec<f64>> {
        let seqs = self.data.sequences();
        let w = 1.0 / (self.window_norm() * seqs.len() as f64);
        let parts = par::map_range(seqs.len(), |s| {
            self.sequence_gradient(p, &seqs[s].0, &seqs[s].1, w)
        });
        let mut g = vec![0.0; self.dim()];
        for part in parts {
            g.iter_mut().zip(&part).for_each(|(a, b)| *a += b);
        }
        Some(g)
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// Windowed squared output error averaged over sequences, as a function
/// of `(A row-major, C, D)` with `B = b` known and `x_0 = 0`. A diverging
/// simulation evaluates to a non-finite value, which solvers report as an
/// evaluation failure.
pub fn ldsi_problem(data: SequenceDataset, b: Vec<f64>, n: usize) -> Result<Problem> {
    if b.len() != n || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let loss = LdsiLoss { data, b, n };
    Ok(Problem::new("ldsi", Arc::new(loss), -1.0, 1.0))
}

/// Perturbs `(A, C, D)` by `scale * N(0, 1)` entrywise. Only `A` bears
/// on stability, so its perturbation alone is halved and redrawn until the
/// perturbed `A` has spectral radius bound below 1.
pub fn perturbed_parameters(system: &LtiSystem, scale: f64, stream: &mut RandomStream) -> Vector {
    let base = system.pack();
    let nn = system.n * system.n;
    let mut p: Vec<f64> = base
        .iter()
        .zip(stream.standard_normal(base.dim()).iter())
        .map(|(b, e)| b + scale * e)
        .collect();
    let mut s = scale;
    while spectral_radius_bound(&p[..nn], system.n) >= 1.0 && s > 0.0 {
        s = if s < 1e-12 { 0.0 } else { s / 2.0 };
        let noise = stream.standard_normal(nn);
        for ((pi, b), e) in p[..nn].iter_mut().zip(base.iter()).zip(noise.iter()) {
            *pi = b + s * e;
        }
    }
    Vector::new(p).expect("finite perturbation")
}

/// Mean squared error over the whole horizon between the outputs of the
/// model `p` and the noiseless `targets`.
pub fn test_mse(p: &[f64], b: &[f64], n: usize, inputs: &[f64], targets: &[f64]) -> f64 {
    let nn = n * n;
    let yhat = simulate(&p[..nn], b, &p[nn..nn + n], p[nn + n], inputs);
    yhat.iter()
        .zip(targets)
        .map(|(h, t)| (h - t) * (h - t))
        .sum::<f64>()
        / targets.len() as f64
}

/// Settings of the mass-spring identification experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSpringSetup {
    pub sequences: usize,
    pub horizon: usize,
    pub warmup: usize,
    pub noise: f64,
    pub perturbation: f64,
}

/// Training loss on data generated by [`mass_spring_chain`], a perturbed
/// starting model as the default start, and the metric `test_mse` on a
/// fresh noiseless test sequence of the same horizon.
pub fn mass_spring_experiment(setup: &MassSpringSetup, stream: &mut RandomStream) -> Result<Problem> {
    let system = mass_spring_chain();
    let data = SequenceDataset::generate(
        &system,
        setup.sequences,
        setup.horizon,
        setup.warmup,
        setup.noise,
        stream,
    )?;
    let test_u = stream.standard_normal(setup.horizon + 1).into_inner();
    let test_y = system.simulate(&test_u);
    let start = perturbed_parameters(&system, setup.perturbation, stream);
    let b = system.b.clone();
    let n = system.n;
    let mut p = ldsi_problem(data, system.b.clone(), n)?
        .with_default_start(start)
        .with_metric("test_mse", move |q| test_mse(q, &b, n, &test_u, &test_y));
    p.name = "mass_spring".into();
    Ok(p)
}
