//! Convergence bounds and hyperparameter rules for Random Min.
//!
//! Unconstrained quasar-convex bounds assume one direction per iteration;
//! those regimes reject `t > 1` instead of extrapolating.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Quasar-convex, unconstrained: bound on the averaged gap.
    QcUnconstrained,
    /// Strongly quasar-convex, unconstrained: bound on the final gap.
    SqcUnconstrained,
    /// Strongly quasar-convex, unconstrained: bound on `E |x_N - x*|^2`.
    SqcDistance,
    /// Proximal quasar-convex over a compact set.
    QcConstrained,
    /// Proximal strongly quasar-convex over a compact set.
    SqcConstrained,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::QcUnconstrained,
        Regime::SqcUnconstrained,
        Regime::SqcDistance,
        Regime::QcConstrained,
        Regime::SqcConstrained,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::QcUnconstrained => "qc-unconstrained",
            Self::SqcUnconstrained => "sqc-unconstrained",
            Self::SqcDistance => "sqc-distance",
            Self::QcConstrained => "qc-constrained",
            Self::SqcConstrained => "sqc-constrained",
        }
    }

    pub fn is_strong(self) -> bool {
        !matches!(self, Self::QcUnconstrained | Self::QcConstrained)
    }

    pub fn is_constrained(self) -> bool {
        matches!(self, Self::QcConstrained | Self::SqcConstrained)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| invalid("regime", format!("unknown regime `{s}`")))
    }
}

/// Symbols consumed by the bounds. Each formula reads only what it needs
/// and reports the first missing one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProblemConstants {
    pub l1: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub dx: Option<f64>,
    pub sigma: Option<f64>,
    pub h: Option<f64>,
    pub mu: Option<f64>,
    pub t: Option<usize>,
    pub eps: Option<f64>,
}

impl ProblemConstants {
    fn l1(&self) -> Result<f64> {
        positive("L1", self.l1)
    }

    fn gamma(&self) -> Result<f64> {
        let g = positive("gamma", self.gamma)?;
        if g > 1.0 {
            return Err(invalid("gamma", format!("must lie in (0, 1], got {g}")));
        }
        Ok(g)
    }

    fn beta(&self) -> Result<f64> {
        let b = self.beta.ok_or(Error::MissingConstant("beta"))?;
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid(
                "beta",
                format!("strongly quasar-convex regimes need beta > 0, got {b}"),
            ));
        }
        Ok(b)
    }

    fn n(&self) -> Result<f64> {
        match self.n {
            Some(n) if n >= 1 => Ok(n as f64),
            Some(_) => Err(invalid("n", "dimension must be at least 1")),
            None => Err(Error::MissingConstant("n")),
        }
    }

    fn r(&self) -> Result<f64> {
        non_negative("R", self.r)
    }

    fn dx(&self) -> Result<f64> {
        let d = self.dx.ok_or(Error::MissingConstant("dX"))?;
        if d.is_infinite() {
            return Err(invalid("dX", "constrained bounds need a bounded set"));
        }
        positive("dX", Some(d))
    }

    fn sigma(&self) -> Result<f64> {
        non_negative("sigma", self.sigma)
    }

    fn h(&self) -> Result<f64> {
        positive("h", self.h)
    }

    fn mu(&self) -> Result<f64> {
        non_negative("mu", self.mu)
    }

    fn eps(&self) -> Result<f64> {
        positive("eps", self.eps)
    }

    fn t(&self) -> Result<f64> {
        match self.t {
            Some(t) if t >= 1 => Ok(t as f64),
            Some(_) => Err(invalid("t", "batch must be at least 1")),
            None => Err(Error::MissingConstant("t")),
        }
    }

    /// Batch for unconstrained regimes: absent or 1.
    fn unit_batch(&self, regime: Regime) -> Result<()> {
        match self.t {
            None | Some(1) => Ok(()),
            Some(t) => Err(invalid(
                "t",
                format!("{regime} bounds are stated for a single direction per iteration, got t = {t}"),
            )),
        }
    }

    /// `gamma - 2 (n + 4) L1 h`, required to be positive.
    fn margin(&self) -> Result<f64> {
        let m = self.gamma()? - 2.0 * (self.n()? + 4.0) * self.l1()? * self.h()?;
        if m > 0.0 {
            Ok(m)
        } else {
            Err(Error::NonPositiveDenominator("gamma - 2(n+4) L1 h"))
        }
    }

    /// `gamma * beta * h`, required to lie in (0, 1].
    fn contraction(&self) -> Result<f64> {
        let c = self.gamma()? * self.beta()? * self.h()?;
        if c > 0.0 && c <= 1.0 {
            Ok(c)
        } else {
            Err(invalid("h", format!("gamma * beta * h must lie in (0, 1], got {c}")))
        }
    }
}

fn positive(name: &'static str, v: Option<f64>) -> Result<f64> {
    let v = v.ok_or(Error::MissingConstant(name))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &'static str, v: Option<f64>) -> Result<f64> {
    let v = v.ok_or(Error::MissingConstant(name))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be non-negative and finite, got {v}")))
    }
}

/// Default safety factor applied to strongly quasar-convex step sizes.
pub const DEFAULT_SAFETY: f64 = 0.9;

/// Step size prescribed for the regime. Quasar-convex regimes use
/// `gamma / (4 (n + 4) L1)`; strongly quasar-convex regimes use
/// `safety * min(gamma / (2 (n + 4) L1), 1 / (gamma beta))`.
pub fn default_step(regime: Regime, c: &ProblemConstants, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(invalid("safety", format!("must lie in (0, 1], got {safety}")));
    }
    let (g, n, l1) = (c.gamma()?, c.n()?, c.l1()?);
    if regime.is_strong() {
        let b = c.beta()?;
        Ok(safety * (g / (2.0 * (n + 4.0) * l1)).min(1.0 / (g * b)))
    } else {
        Ok(g / (4.0 * (n + 4.0) * l1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub mu_max: f64,
    pub n_min: u64,
    pub t_min: u64,
}

fn ceil_count(v: f64) -> Result<u64> {
    if v.is_nan() {
        return Err(invalid("N", "bound evaluated to NaN"));
    }
    let c = v.ceil().max(0.0);
    Ok(if c >= u64::MAX as f64 { u64::MAX } else { c as u64 })
}

/// Positive root of `a mu^2 + b mu = eps`, i.e. `(sqrt(b^2 + 4 a eps) - b) / (2a)`,
/// rewritten to avoid cancellation when `b^2` dominates `4 a eps`.
fn quadratic_root(a: f64, b: f64, eps: f64) -> f64 {
    2.0 * eps / ((b * b + 4.0 * a * eps).sqrt() + b)
}

/// Largest `mu`, smallest `N`, and smallest `t` prescribed for tolerance `eps`.
/// Strongly quasar-convex regimes read the step `h` from the constants.
pub fn hyperparameters(regime: Regime, c: &ProblemConstants) -> Result<Hyperparameters> {
    let (l1, g, n, r, eps) = (c.l1()?, c.gamma()?, c.n()?, c.r()?, c.eps()?);
    match regime {
        Regime::QcUnconstrained => {
            c.unit_batch(regime)?;
            let denom = 4.0 * l1 * n * (1.0 + g) / g + (n + 6.0).powi(3) / (4.0 * (n + 4.0)) * l1;
            Ok(Hyperparameters {
                mu_max: (eps / denom).sqrt(),
                n_min: ceil_count(4.0 * (n + 4.0) * l1 * r * r / (g * g * eps) - 1.0)?,
                t_min: 1,
            })
        }
        Regime::SqcUnconstrained | Regime::SqcDistance => {
            c.unit_batch(regime)?;
            let (b, h, m) = (c.beta()?, c.h()?, c.margin()?);
            let gbh = c.contraction()?;
            let (a_coef, b_coef, q, r2) = if regime == Regime::SqcUnconstrained {
                (
                    l1 * n * (1.0 + g) / (h * g * b * m),
                    l1 * l1 * (n + 6.0).powi(3) / (4.0 * g * b * m),
                    2.0 * h * m,
                    r * r,
                )
            } else {
                let gb3 = (g * b).powi(3);
                (
                    8.0 * l1 * l1 * n * (1.0 + g) / (h * gb3 * m),
                    2.0 * l1.powi(3) * (n + 6.0).powi(3) / (gb3 * m),
                    2.0 * h * g * g * b * b * m,
                    8.0 * l1 * r * r,
                )
            };
            Ok(Hyperparameters {
                mu_max: (eps / 2.0 / (a_coef + b_coef)).sqrt(),
                n_min: ceil_count((r2 / (q * eps)).ln() / gbh - 1.0)?,
                t_min: 1,
            })
        }
        Regime::QcConstrained => {
            let (dx, sigma) = (c.dx()?, c.sigma()?);
            let a = (n + 6.0).powi(3) / (8.0 * (n + 4.0)) * l1;
            let b = dx * l1 * (n + 3.0).powf(1.5) / g;
            Ok(Hyperparameters {
                mu_max: quadratic_root(a, b, eps),
                n_min: ceil_count(16.0 * (n + 4.0) * l1 * r * r / (g * g * eps) - 1.0)?,
                t_min: ceil_count(16.0 * dx * dx * sigma * sigma / (eps * eps * g * g))?.max(1),
            })
        }
        Regime::SqcConstrained => {
            let (dx, sigma) = (c.dx()?, c.sigma()?);
            let (b, h, m) = (c.beta()?, c.h()?, c.margin()?);
            let gbh = c.contraction()?;
            let a_coef = l1 * l1 * (n + 6.0).powi(3) / (4.0 * g * b * m);
            let b_coef = dx * l1 * (n + 3.0).powf(1.5) / (2.0 * g * b * h * m);
            let q = 2.0 * h * m;
            Ok(Hyperparameters {
                mu_max: quadratic_root(a_coef, b_coef, eps),
                n_min: ceil_count((r * r / (q * eps)).ln() / gbh - 1.0)?,
                t_min: ceil_count(
                    4.0 * dx * dx * sigma * sigma / (q * q * g * g * b * b * eps * eps),
                )?
                .max(1),
            })
        }
    }
}

/// Right-hand side split by origin: initialisation, smoothing, and oracle
/// variance (constrained regimes only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub initialization: f64,
    pub smoothing: f64,
    pub variance: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.initialization + self.smoothing + self.variance
    }
}

/// Terms of the regime's bound after `iterations` steps with smoothing `mu`.
/// Quasar-convex regimes bound the averaged gap over `x_0..x_N`; strongly
/// quasar-convex regimes bound the final gap (or squared distance for
/// [`Regime::SqcDistance`]).
pub fn bound_terms(regime: Regime, c: &ProblemConstants, iterations: u64) -> Result<BoundTerms> {
    let (l1, g, n, r, mu) = (c.l1()?, c.gamma()?, c.n()?, c.r()?, c.mu()?);
    let np1 = iterations as f64 + 1.0;
    let cube = (n + 6.0).powi(3);
    match regime {
        Regime::QcUnconstrained => {
            c.unit_batch(regime)?;
            Ok(BoundTerms {
                initialization: 4.0 * (n + 4.0) * l1 * r * r / (g * g * np1),
                smoothing: 2.0 * mu * mu * l1 * n * (1.0 + g) / g
                    + mu * mu * cube * l1 / (8.0 * (n + 4.0)),
                variance: 0.0,
            })
        }
        Regime::SqcUnconstrained | Regime::SqcDistance => {
            c.unit_batch(regime)?;
            let (b, h, m) = (c.beta()?, c.h()?, c.margin()?);
            let gbh = c.contraction()?;
            let scale = if regime == Regime::SqcDistance {
                8.0 * l1 / (g * g * b * b)
            } else {
                1.0
            };
            Ok(BoundTerms {
                initialization: scale * (1.0 - gbh).powf(np1) * r * r / (2.0 * h * m),
                smoothing: scale
                    * (mu * mu * l1 * n * (1.0 + g) / (h * g * b * m)
                        + mu * mu * l1 * l1 * cube / (4.0 * g * b * m)),
                variance: 0.0,
            })
        }
        Regime::QcConstrained => {
            let (dx, sigma, t) = (c.dx()?, c.sigma()?, c.t()?);
            Ok(BoundTerms {
                initialization: 4.0 * (n + 4.0) * l1 * r * r / (g * g * np1),
                smoothing: dx * mu * l1 * (n + 3.0).powf(1.5) / g
                    + mu * mu * cube * l1 / (8.0 * (n + 4.0)),
                variance: 2.0 * dx * sigma / (t.sqrt() * g),
            })
        }
        Regime::SqcConstrained => {
            let (dx, sigma, t) = (c.dx()?, c.sigma()?, c.t()?);
            let (b, h, m) = (c.beta()?, c.h()?, c.margin()?);
            let gbh = c.contraction()?;
            Ok(BoundTerms {
                initialization: (1.0 - gbh).powf(np1) * r * r / (2.0 * h * m),
                smoothing: mu * mu * l1 * l1 * cube / (4.0 * g * b * m)
                    + dx * mu * l1 * (n + 3.0).powf(1.5) / (2.0 * g * b * h * m),
                variance: dx * sigma / (h * t.sqrt() * g * b * m),
            })
        }
    }
}

/// Total bound after `iterations` steps.
pub fn theorem_bound(regime: Regime, c: &ProblemConstants, iterations: u64) -> Result<f64> {
    Ok(bound_terms(regime, c, iterations)?.total())
}

/// Bound obtained by substituting the prescribed `(mu_max, N_min, t_min)`
/// back into [`theorem_bound`].
pub fn plug_back(regime: Regime, c: &ProblemConstants) -> Result<f64> {
    let hp = hyperparameters(regime, c)?;
    let mut tuned = *c;
    tuned.mu = Some(hp.mu_max);
    if regime.is_constrained() {
        tuned.t = Some(usize::try_from(hp.t_min).unwrap_or(usize::MAX));
    }
    theorem_bound(regime, &tuned, hp.n_min)
}

/// Polyak-Lojasiewicz and quadratic-growth moduli implied by strong
/// quasar-convexity: `(gamma^2 beta^2 / (4 L1), gamma^2 beta^2 / (8 L1))`.
pub fn pl_qg_constants(gamma: f64, beta: f64, l1: f64) -> Result<(f64, f64)> {
    for (name, v) in [("gamma", gamma), ("beta", beta), ("L1", l1)] {
        positive(name, Some(v))?;
    }
    let s = gamma * gamma * beta * beta;
    Ok((s / (4.0 * l1), s / (8.0 * l1)))
}
