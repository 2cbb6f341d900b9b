//! Stochastic Lanczos quadrature trace estimator.
//!
//! For each probe `v_i` the Lanczos Gauss rule of `q0 = v_i / ‖v_i‖`
//! estimates `q0ᵀ f(M) q0`; the trace estimate is
//!
//! ```text
//! Γ = n / n_v · Σ_i Σ_k τ_ik² f(θ_ik)
//! ```
//!
//! Probe `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so the
//! estimate does not depend on scheduling, and shrinking `n_v` keeps a prefix
//! of the per-probe values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{lanczos_tridiagonalize, quadrature_rule, QuadratureRule};
use crate::numeric::norm2;
use crate::operators::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeDistribution {
    Rademacher,
    Gaussian,
}

impl std::str::FromStr for ProbeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rademacher" => Ok(Self::Rademacher),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown distribution {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlqConfig {
    /// Number of probe vectors.
    pub n_v: usize,
    /// Lanczos steps per probe (capped at the operator dimension).
    pub steps: usize,
    pub distribution: ProbeDistribution,
    pub seed: u64,
    /// Full reorthogonalization inside each Lanczos run.
    pub reorthogonalize: bool,
    /// Experimental: subtract a quadratic interpolant of `f` whose trace is
    /// known from `tr(M)` and `tr(M²)`, and add its trace back exactly.
    pub control_variate: bool,
}

impl Default for SlqConfig {
    fn default() -> Self {
        Self {
            n_v: 100,
            steps: 10,
            distribution: ProbeDistribution::Rademacher,
            seed: 0,
            reorthogonalize: true,
            control_variate: false,
        }
    }
}

impl SlqConfig {
    fn validate(&self) -> Result<()> {
        if self.n_v < 1 {
            return Err(Error::InvalidArgument("n_v must be at least 1".into()));
        }
        if self.steps < 1 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlqEstimate {
    /// The trace estimate Γ.
    pub value: f64,
    /// Per-probe quadrature sums for the unit start vector, before scaling by `n`.
    pub per_vector: Vec<f64>,
    /// Sample standard deviation of `n · per_vector` over `√n_v`; zero when `n_v = 1`.
    pub std_error: f64,
}

/// The `index`-th probe vector for `cfg`, unnormalized.
pub fn probe_vector(n: usize, cfg: &SlqConfig, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    match cfg.distribution {
        ProbeDistribution::Rademacher => (0..n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
        ProbeDistribution::Gaussian => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
    }
}

/// Gauss rule of one probe, with nodes clamped into the operator's
/// spectral bounds.
pub fn probe_rule<O: LinearOperator + ?Sized>(
    op: &O,
    cfg: &SlqConfig,
    index: usize,
) -> Result<QuadratureRule> {
    let n = op.dim();
    let mut q0 = probe_vector(n, cfg, index);
    let norm = norm2(&q0);
    if norm == 0.0 {
        // Only reachable for Gaussian draws that underflow; fall back to e_0.
        q0[0] = 1.0;
    } else {
        q0.iter_mut().for_each(|x| *x /= norm);
    }
    let t = lanczos_tridiagonalize(op, &q0, cfg.steps.min(n), cfg.reorthogonalize)?;
    let mut rule = quadrature_rule(&t)?;
    let (lo, hi) = op.spectral_bounds();
    for x in rule.nodes.iter_mut() {
        *x = x.clamp(lo, hi);
    }
    Ok(rule)
}

/// Gauss rules of all `n_v` probes, in probe order.
pub fn probe_rules<O: LinearOperator + ?Sized>(op: &O, cfg: &SlqConfig) -> Result<Vec<QuadratureRule>> {
    cfg.validate()?;
    (0..cfg.n_v)
        .into_par_iter()
        .map(|i| probe_rule(op, cfg, i))
        .collect()
}

/// Quadratic `c0 + c1 x + c2 x²` interpolating `f` at the three Chebyshev
/// points of `[lo, hi]`.
fn quadratic_interpolant(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> [f64; 3] {
    if hi <= lo {
        return [f(lo), 0.0, 0.0];
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let x: Vec<f64> = (0..3)
        .map(|j| mid + half * ((2 * j + 1) as f64 * std::f64::consts::PI / 6.0).cos())
        .collect();
    let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
    // Newton divided differences.
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let d012 = (d12 - d01) / (x[2] - x[0]);
    // p(x) = y0 + d01 (x - x0) + d012 (x - x0)(x - x1)
    let c2 = d012;
    let c1 = d01 - d012 * (x[0] + x[1]);
    let c0 = y[0] - d01 * x[0] + d012 * x[0] * x[1];
    [c0, c1, c2]
}

/// Combines precomputed probe rules into a trace estimate.
pub fn estimate_from_rules<O, F>(op: &O, rules: &[QuadratureRule], f: F, cfg: &SlqConfig) -> Result<SlqEstimate>
where
    O: LinearOperator + ?Sized,
    F: Fn(f64) -> f64,
{
    let n = op.dim() as f64;
    let n_v = rules.len();
    if n_v == 0 {
        return Err(Error::InvalidArgument("no probe rules".into()));
    }
    let checked = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { node: x, value: y })
        }
    };

    let per_vector: Vec<f64> = if cfg.control_variate {
        let (tr, tr2) = match (op.trace(), op.trace_squared()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvalidArgument(
                    "control variate needs an operator with known tr(M) and tr(M²)".into(),
                ))
            }
        };
        let (lo, hi) = op.spectral_bounds();
        let [c0, c1, c2] = quadratic_interpolant(&f, lo, hi);
        let poly_trace_share = (c0 * n + c1 * tr + c2 * tr2) / n;
        rules
            .iter()
            .map(|r| {
                let mut acc = 0.0;
                for (&x, &w) in r.nodes.iter().zip(&r.weights) {
                    acc += w * (checked(x)? - (c0 + c1 * x + c2 * x * x));
                }
                Ok(acc + poly_trace_share)
            })
            .collect::<Result<_>>()?
    } else {
        rules
            .iter()
            .map(|r| {
                let mut acc = 0.0;
                for (&x, &w) in r.nodes.iter().zip(&r.weights) {
                    acc += w * checked(x)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?
    };

    let sum: f64 = per_vector.iter().sum();
    let value = n * sum / n_v as f64;
    let std_error = if n_v > 1 {
        let mean = value;
        let ss: f64 = per_vector.iter().map(|p| (n * p - mean).powi(2)).sum();
        (ss / (n_v - 1) as f64).sqrt() / (n_v as f64).sqrt()
    } else {
        0.0
    };
    Ok(SlqEstimate {
        value,
        per_vector,
        std_error,
    })
}

/// Estimates `tr f(M)`.
pub fn slq_trace<O, F>(op: &O, f: F, cfg: &SlqConfig) -> Result<SlqEstimate>
where
    O: LinearOperator + ?Sized,
    F: Fn(f64) -> f64,
{
    let rules = probe_rules(op, cfg)?;
    estimate_from_rules(op, &rules, f, cfg)
}

/// Estimates `tr f_t(M)` for every `t` in `grid`, reusing each probe's Gauss
/// rule across grid points. Bit-identical to calling [`slq_trace`] per point.
pub fn slq_trace_grid<O, F>(op: &O, f_family: F, grid: &[f64], cfg: &SlqConfig) -> Result<Vec<SlqEstimate>>
where
    O: LinearOperator + ?Sized,
    F: Fn(f64, f64) -> f64,
{
    let rules = probe_rules(op, cfg)?;
    grid.iter()
        .map(|&t| estimate_from_rules(op, &rules, |x| f_family(t, x), cfg))
        .collect()
}
