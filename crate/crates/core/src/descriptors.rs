//! NetLSD heat traces and von Neumann graph entropy.
//!
//! | method      | NetLSD                     | VNGE                        |
//! |-------------|----------------------------|-----------------------------|
//! | exact       | dense spectrum of 𝓛        | dense spectrum of P         |
//! | slaq        | SLQ on 𝓛, `f = exp(-t x)`  | SLQ on P, `f = -x ln x`     |
//! | taylor      | `n - t tr𝓛 + t²/2 tr𝓛²`    | `1 - tr(L²)/tr(L)²`         |
//! | linear      | extremal eigenvalues + linear interior | -               |
//! | finger-bar / finger-hat | -              | `-Q ln(bound)` / `-Q ln λmax` |

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_io::Graph;
use crate::lanczos::{dense_spectrum, extremal_eigenvalues, SpectrumEnd};
use crate::numeric::{compensated_sum, euclidean_distance, xlogx};
use crate::operators::{degrees, make_operator, trace, trace_squared, OperatorKind};
use crate::slq::{slq_trace, slq_trace_grid, ProbeDistribution, SlqConfig};

pub const DEFAULT_T_MIN: f64 = 1e-2;
pub const DEFAULT_T_MAX: f64 = 1e2;
pub const DEFAULT_GRID_POINTS: usize = 256;
pub const DEFAULT_INTERPOLATION_K: usize = 300;

/// Heat-trace time points, strictly increasing and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub values: Vec<f64>,
}

impl TimeGrid {
    /// `d` logarithmically spaced points from `t_min` to `t_max` inclusive.
    pub fn logspace(t_min: f64, t_max: f64, d: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if d < 2 {
            return Err(Error::InvalidArgument("time grid needs at least 2 points".into()));
        }
        let (lo, hi) = (t_min.log10(), t_max.log10());
        let step = (hi - lo) / (d - 1) as f64;
        let mut values: Vec<f64> = (0..d).map(|i| 10f64.powf(lo + step * i as f64)).collect();
        values[0] = t_min;
        values[d - 1] = t_max;
        Ok(Self { t_min, t_max, values })
    }

    /// Grid from explicit points.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values[0] <= 0.0 || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "time grid must be nonempty, positive and strictly increasing".into(),
            ));
        }
        Ok(Self {
            t_min: values[0],
            t_max: values[values.len() - 1],
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::logspace(DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_GRID_POINTS).expect("valid default grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorKind {
    Netlsd,
    Vnge,
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "netlsd" => Ok(Self::Netlsd),
            "vnge" => Ok(Self::Vnge),
            other => Err(Error::InvalidArgument(format!("unknown descriptor kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Netlsd => "netlsd",
            Self::Vnge => "vnge",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Slaq,
    /// Second-order Taylor expansion; for VNGE the corrected form.
    Taylor,
    /// VNGE Taylor expansion evaluated literally as `1 - (tr L + 2 tr L²)/tr(L)²`.
    TaylorAsPrinted,
    Linear,
    FingerBar,
    FingerHat,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Exact,
        Method::Slaq,
        Method::Taylor,
        Method::TaylorAsPrinted,
        Method::Linear,
        Method::FingerBar,
        Method::FingerHat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Slaq => "slaq",
            Method::Taylor => "taylor",
            Method::TaylorAsPrinted => "taylor-as-printed",
            Method::Linear => "linear",
            Method::FingerBar => "finger-bar",
            Method::FingerHat => "finger-hat",
        }
    }

    pub fn supports(self, kind: DescriptorKind) -> bool {
        match kind {
            DescriptorKind::Netlsd => matches!(self, Method::Exact | Method::Slaq | Method::Taylor | Method::Linear),
            DescriptorKind::Vnge => !matches!(self, Method::Linear),
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == Method::Slaq
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters a method actually consumed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<ProbeDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Set only when the quadratic control variate was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_variate: Option<bool>,
}

impl MethodParams {
    fn from_slq(cfg: &SlqConfig) -> Self {
        Self {
            n_v: Some(cfg.n_v),
            steps: Some(cfg.steps),
            distribution: Some(cfg.distribution),
            seed: Some(cfg.seed),
            k: None,
            control_variate: cfg.control_variate.then_some(true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceDescriptor {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub method: Method,
    pub params: MethodParams,
    /// Per-point standard errors for stochastic methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub method: Method,
    pub params: MethodParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    HeatTrace(HeatTraceDescriptor),
    Entropy(EntropyValue),
}

impl Descriptor {
    pub fn kind(&self) -> DescriptorKind {
        match self {
            Descriptor::HeatTrace(_) => DescriptorKind::Netlsd,
            Descriptor::Entropy(_) => DescriptorKind::Vnge,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Descriptor::HeatTrace(h) => h.method,
            Descriptor::Entropy(e) => e.method,
        }
    }

    /// Values as a feature vector (length 1 for entropies).
    pub fn as_features(&self) -> Vec<f64> {
        match self {
            Descriptor::HeatTrace(h) => h.values.clone(),
            Descriptor::Entropy(e) => vec![e.value],
        }
    }
}

/// Eigenvalues are clamped to the normalized-Laplacian range `[0, 2]`.
fn heat_trace_from_spectrum(spectrum: &[f64], grid: &TimeGrid) -> Vec<f64> {
    grid.values
        .iter()
        .map(|&t| compensated_sum(spectrum.iter().map(|&l| (-t * l.clamp(0.0, 2.0)).exp())))
        .collect()
}

/// `h_t = Σ_i exp(-t λ_i)` over the full normalized-Laplacian spectrum.
pub fn netlsd_exact(g: &Graph, grid: &TimeGrid) -> Result<HeatTraceDescriptor> {
    let spectrum = dense_spectrum(g, OperatorKind::NormalizedLaplacian)?;
    Ok(HeatTraceDescriptor {
        grid: grid.clone(),
        values: heat_trace_from_spectrum(&spectrum, grid),
        method: Method::Exact,
        params: MethodParams::default(),
        std_errors: None,
    })
}

pub fn netlsd_slaq(g: &Graph, grid: &TimeGrid, cfg: &SlqConfig) -> Result<HeatTraceDescriptor> {
    let op = make_operator(g, OperatorKind::NormalizedLaplacian)?;
    let est = slq_trace_grid(&op, |t, x| (-t * x).exp(), &grid.values, cfg)?;
    Ok(HeatTraceDescriptor {
        grid: grid.clone(),
        values: est.iter().map(|e| e.value).collect(),
        method: Method::Slaq,
        params: MethodParams::from_slq(cfg),
        std_errors: Some(est.iter().map(|e| e.std_error).collect()),
    })
}

/// Second-order Taylor expansion of the heat trace around `t = 0`.
pub fn netlsd_taylor(g: &Graph, grid: &TimeGrid) -> Result<HeatTraceDescriptor> {
    let n = g.n() as f64;
    let tr = trace(g, OperatorKind::NormalizedLaplacian)?;
    let tr2 = trace_squared(g, OperatorKind::NormalizedLaplacian)?;
    Ok(HeatTraceDescriptor {
        grid: grid.clone(),
        values: grid
            .values
            .iter()
            .map(|&t| n - t * tr + 0.5 * t * t * tr2)
            .collect(),
        method: Method::Taylor,
        params: MethodParams::default(),
        std_errors: None,
    })
}

/// Spectrum with `k` exact eigenvalues at each end and a linearly
/// interpolated interior.
pub fn interpolated_spectrum(low: &[f64], high: &[f64], n: usize) -> Vec<f64> {
    let k = low.len();
    let interior = n - low.len() - high.len();
    let a = low[k - 1];
    let b = high[0];
    let mut spectrum = low.to_vec();
    spectrum.extend((1..=interior).map(|j| a + (b - a) * j as f64 / (interior + 1) as f64));
    spectrum.extend_from_slice(high);
    spectrum
}

/// Heat trace from `k` extremal eigenvalues on each end with the interior
/// assumed to grow linearly. Falls back to [`netlsd_exact`] when `2k ≥ n`.
pub fn netlsd_linear(g: &Graph, grid: &TimeGrid, k: usize) -> Result<HeatTraceDescriptor> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let params = MethodParams {
        k: Some(k),
        ..Default::default()
    };
    if 2 * k >= g.n() {
        let exact = netlsd_exact(g, grid)?;
        return Ok(HeatTraceDescriptor {
            method: Method::Linear,
            params,
            ..exact
        });
    }
    let op = make_operator(g, OperatorKind::NormalizedLaplacian)?;
    let low = extremal_eigenvalues(&op, k, SpectrumEnd::Smallest)?;
    let high = extremal_eigenvalues(&op, k, SpectrumEnd::Largest)?;
    let spectrum = interpolated_spectrum(&low, &high, g.n());
    Ok(HeatTraceDescriptor {
        grid: grid.clone(),
        values: heat_trace_from_spectrum(&spectrum, grid),
        method: Method::Linear,
        params,
        std_errors: None,
    })
}

fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    -compensated_sum(spectrum.iter().map(|&l| xlogx(l.max(0.0))))
}

/// `-Σ λ ln λ` over the density-matrix spectrum.
pub fn vnge_exact(g: &Graph) -> Result<EntropyValue> {
    if g.m() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let spectrum = dense_spectrum(g, OperatorKind::Density)?;
    Ok(EntropyValue {
        value: entropy_of_spectrum(&spectrum),
        method: Method::Exact,
        params: MethodParams::default(),
        std_error: None,
    })
}

pub fn vnge_slaq(g: &Graph, cfg: &SlqConfig) -> Result<EntropyValue> {
    let op = make_operator(g, OperatorKind::Density)?;
    let est = slq_trace(&op, xlogx, cfg)?;
    Ok(EntropyValue {
        value: -est.value,
        method: Method::Slaq,
        params: MethodParams::from_slq(cfg),
        std_error: Some(est.std_error),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaylorVariant {
    AsPrinted,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerVariant {
    Bar,
    Hat,
}

/// `Q = 1 - tr(L²)/tr(L)²`.
pub fn quadratic_entropy(g: &Graph) -> Result<f64> {
    if g.m() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let tr = trace(g, OperatorKind::Laplacian)?;
    let tr2 = trace_squared(g, OperatorKind::Laplacian)?;
    Ok(1.0 - tr2 / (tr * tr))
}

pub fn vnge_taylor(g: &Graph, variant: TaylorVariant) -> Result<EntropyValue> {
    if g.m() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let (value, method) = match variant {
        TaylorVariant::Corrected => (quadratic_entropy(g)?, Method::Taylor),
        TaylorVariant::AsPrinted => {
            let tr = trace(g, OperatorKind::Laplacian)?;
            let tr2 = trace_squared(g, OperatorKind::Laplacian)?;
            (1.0 - (tr + 2.0 * tr2) / (tr * tr), Method::TaylorAsPrinted)
        }
    };
    Ok(EntropyValue {
        value,
        method,
        params: MethodParams::default(),
        std_error: None,
    })
}

/// FINGER estimates `-Q ln(λ)`: `Hat` uses the largest density-matrix
/// eigenvalue, `Bar` its Gershgorin bound `2 d_max / tr(L)`.
pub fn vnge_finger(g: &Graph, variant: FingerVariant) -> Result<EntropyValue> {
    let q = quadratic_entropy(g)?;
    let (lambda, method) = match variant {
        FingerVariant::Bar => {
            let deg = degrees(g);
            let d_max = deg.iter().copied().fold(0.0, f64::max);
            let tr: f64 = compensated_sum(deg.iter().copied());
            ((2.0 * d_max / tr).min(1.0), Method::FingerBar)
        }
        FingerVariant::Hat => {
            let op = make_operator(g, OperatorKind::Density)?;
            let top = extremal_eigenvalues(&op, 1, SpectrumEnd::Largest)?;
            (top[0].min(1.0), Method::FingerHat)
        }
    };
    if lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!("log argument {lambda} is not positive")));
    }
    let value = if lambda == 1.0 { 0.0 } else { -q * lambda.ln() };
    Ok(EntropyValue {
        value,
        method,
        params: MethodParams::default(),
        std_error: None,
    })
}

/// Everything needed to compute any descriptor by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSpec {
    pub kind: DescriptorKind,
    pub method: Method,
    pub grid: TimeGrid,
    pub slq: SlqConfig,
    /// Extremal eigenvalue count for the linear baseline.
    pub k: usize,
}

impl DescriptorSpec {
    pub fn new(kind: DescriptorKind, method: Method) -> Self {
        Self {
            kind,
            method,
            grid: TimeGrid::default(),
            slq: SlqConfig::default(),
            k: DEFAULT_INTERPOLATION_K,
        }
    }
}

pub fn compute_descriptor(g: &Graph, spec: &DescriptorSpec) -> Result<Descriptor> {
    if !spec.method.supports(spec.kind) {
        return Err(Error::InvalidArgument(format!(
            "method {} does not apply to {}",
            spec.method, spec.kind
        )));
    }
    Ok(match spec.kind {
        DescriptorKind::Netlsd => Descriptor::HeatTrace(match spec.method {
            Method::Exact => netlsd_exact(g, &spec.grid)?,
            Method::Slaq => netlsd_slaq(g, &spec.grid, &spec.slq)?,
            Method::Taylor => netlsd_taylor(g, &spec.grid)?,
            Method::Linear => netlsd_linear(g, &spec.grid, spec.k)?,
            _ => unreachable!("filtered by supports"),
        }),
        DescriptorKind::Vnge => Descriptor::Entropy(match spec.method {
            Method::Exact => vnge_exact(g)?,
            Method::Slaq => vnge_slaq(g, &spec.slq)?,
            Method::Taylor => vnge_taylor(g, TaylorVariant::Corrected)?,
            Method::TaylorAsPrinted => vnge_taylor(g, TaylorVariant::AsPrinted)?,
            Method::FingerBar => vnge_finger(g, FingerVariant::Bar)?,
            Method::FingerHat => vnge_finger(g, FingerVariant::Hat)?,
            Method::Linear => unreachable!("filtered by supports"),
        }),
    })
}

fn paired_values<'a>(a: &'a Descriptor, b: &'a Descriptor) -> Result<(Vec<f64>, Vec<f64>)> {
    match (a, b) {
        (Descriptor::HeatTrace(x), Descriptor::HeatTrace(y)) => {
            if x.grid.values != y.grid.values {
                return Err(Error::Mismatch("heat traces use different time grids".into()));
            }
            Ok((x.values.clone(), y.values.clone()))
        }
        (Descriptor::Entropy(x), Descriptor::Entropy(y)) => Ok((vec![x.value], vec![y.value])),
        _ => Err(Error::Mismatch("cannot compare a heat trace with an entropy".into())),
    }
}

/// Euclidean distance of heat traces, absolute difference of entropies.
pub fn descriptor_distance(a: &Descriptor, b: &Descriptor) -> Result<f64> {
    let (x, y) = paired_values(a, b)?;
    Ok(euclidean_distance(&x, &y))
}

/// `‖approx - reference‖₂ / ‖reference‖₂`.
pub fn relative_error(approx: &Descriptor, reference: &Descriptor) -> Result<f64> {
    let (x, r) = paired_values(approx, reference)?;
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(euclidean_distance(&x, &r) / norm)
}

/// On-disk descriptor record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRecord {
    pub kind: DescriptorKind,
    pub method: Method,
    pub params: MethodParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub graph_hash: String,
    /// Free-form run configuration echoed by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl DescriptorRecord {
    pub fn new(descriptor: &Descriptor, graph_hash: String) -> Self {
        match descriptor {
            Descriptor::HeatTrace(h) => Self {
                kind: DescriptorKind::Netlsd,
                method: h.method,
                params: h.params.clone(),
                grid: Some(h.grid.clone()),
                values: Some(h.values.clone()),
                value: None,
                std_errors: h.std_errors.clone(),
                std_error: None,
                seed: h.params.seed,
                graph_hash,
                config: None,
            },
            Descriptor::Entropy(e) => Self {
                kind: DescriptorKind::Vnge,
                method: e.method,
                params: e.params.clone(),
                grid: None,
                values: None,
                value: Some(e.value),
                std_errors: None,
                std_error: e.std_error,
                seed: e.params.seed,
                graph_hash,
                config: None,
            },
        }
    }

    pub fn into_descriptor(self) -> Result<Descriptor> {
        match self.kind {
            DescriptorKind::Netlsd => Ok(Descriptor::HeatTrace(HeatTraceDescriptor {
                grid: self.grid.ok_or_else(|| Error::Mismatch("netlsd record without grid".into()))?,
                values: self
                    .values
                    .ok_or_else(|| Error::Mismatch("netlsd record without values".into()))?,
                method: self.method,
                params: self.params,
                std_errors: self.std_errors,
            })),
            DescriptorKind::Vnge => Ok(Descriptor::Entropy(EntropyValue {
                value: self
                    .value
                    .ok_or_else(|| Error::Mismatch("vnge record without value".into()))?,
                method: self.method,
                params: self.params,
                std_error: self.std_error,
            })),
        }
    }
}
