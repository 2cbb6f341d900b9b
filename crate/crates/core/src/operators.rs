//! Implicit graph matrices.
//!
//! The Laplacian `L = D - A`, the normalized Laplacian
//! `𝓛 = I - D^{-1/2} A D^{-1/2}` and the density matrix `P = L / tr(L)` are
//! exposed as matrix-free operators over a borrowed [`Graph`]. Each product
//! is a single pass over the CSR arrays.
//!
//! Isolated vertices get a zero row and column in `𝓛`, so an edgeless graph
//! has the all-zero spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_io::Graph;
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Laplacian,
    NormalizedLaplacian,
    Density,
}

/// A symmetric real linear map applied without materializing its matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `M x` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// An interval guaranteed to contain the spectrum.
    fn spectral_bounds(&self) -> (f64, f64);

    fn kind(&self) -> Option<OperatorKind> {
        None
    }

    /// `tr(M)`, when it is cheaply known.
    fn trace(&self) -> Option<f64> {
        None
    }

    /// `tr(M²)`, when it is cheaply known.
    fn trace_squared(&self) -> Option<f64> {
        None
    }

    /// Largest absolute value in [`spectral_bounds`](Self::spectral_bounds).
    fn spectral_radius_bound(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs())
    }

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

/// Weighted degree of every vertex.
pub fn degrees(g: &Graph) -> Vec<f64> {
    (0..g.n()).map(|i| g.neighbors(i).map(|(_, w)| w).sum()).collect()
}

/// Matrix-free operator over a graph.
#[derive(Debug, Clone)]
pub struct GraphOperator<'g> {
    graph: &'g Graph,
    kind: OperatorKind,
    degrees: Vec<f64>,
    /// Column indices of the graph CSR, narrowed for cache footprint.
    cols: Vec<u32>,
    /// Off-diagonal entry per CSR position, already negated and scaled:
    /// `-s w_ij` for `L`/`P`, `-w_ij / sqrt(d_i d_j)` for `𝓛`.
    entries: Vec<f64>,
    /// Diagonal of the operator.
    diag: Vec<f64>,
    bounds: (f64, f64),
    trace: f64,
    trace_squared: f64,
}

pub fn make_operator(g: &Graph, kind: OperatorKind) -> Result<GraphOperator<'_>> {
    let degrees = degrees(g);
    let inv_sqrt_deg: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let d_max = degrees.iter().copied().fold(0.0, f64::max);
    let lap_trace = laplacian_trace(&degrees);
    let (scale, bounds) = match kind {
        OperatorKind::Laplacian => (1.0, (0.0, 2.0 * d_max)),
        OperatorKind::NormalizedLaplacian => (1.0, (0.0, if g.m() > 0 { 2.0 } else { 0.0 })),
        OperatorKind::Density => {
            if g.m() == 0 {
                return Err(Error::EdgelessGraph);
            }
            (1.0 / lap_trace, (0.0, (2.0 * d_max / lap_trace).min(1.0)))
        }
    };
    if g.n() > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("{} vertices exceed the operator index range", g.n())));
    }
    let cols = g.col_indices().iter().map(|&j| j as u32).collect();
    let (entries, diag): (Vec<f64>, Vec<f64>) = match kind {
        OperatorKind::NormalizedLaplacian => (
            (0..g.n())
                .flat_map(|i| g.neighbors(i).map(move |(j, w)| (i, j, w)))
                .map(|(i, j, w)| -w * inv_sqrt_deg[i] * inv_sqrt_deg[j])
                .collect(),
            inv_sqrt_deg.iter().map(|&s| if s > 0.0 { 1.0 } else { 0.0 }).collect(),
        ),
        _ => (
            g.weights().iter().map(|&w| -scale * w).collect(),
            degrees.iter().map(|&d| scale * d).collect(),
        ),
    };
    let trace = trace_from_degrees(g, &degrees, kind)?;
    let trace_squared = trace_squared_from_degrees(g, &degrees, kind)?;
    Ok(GraphOperator {
        graph: g,
        kind,
        degrees,
        cols,
        entries,
        diag,
        bounds,
        trace,
        trace_squared,
    })
}

impl GraphOperator<'_> {
    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }
}

impl LinearOperator for GraphOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let offsets = self.graph.row_offsets();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for k in offsets[i]..offsets[i + 1] {
                acc += self.entries[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    fn kind(&self) -> Option<OperatorKind> {
        Some(self.kind)
    }

    fn trace(&self) -> Option<f64> {
        Some(self.trace)
    }

    fn trace_squared(&self) -> Option<f64> {
        Some(self.trace_squared)
    }
}

fn laplacian_trace(degrees: &[f64]) -> f64 {
    degrees.iter().copied().collect::<CompensatedSum>().value()
}

fn trace_from_degrees(g: &Graph, degrees: &[f64], kind: OperatorKind) -> Result<f64> {
    Ok(match kind {
        OperatorKind::Laplacian => laplacian_trace(degrees),
        OperatorKind::NormalizedLaplacian => degrees.iter().filter(|&&d| d > 0.0).count() as f64,
        OperatorKind::Density => {
            if g.m() == 0 {
                return Err(Error::EdgelessGraph);
            }
            1.0
        }
    })
}

fn trace_squared_from_degrees(g: &Graph, degrees: &[f64], kind: OperatorKind) -> Result<f64> {
    // Σ_ij M_ij²: diagonal terms plus every stored off-diagonal entry
    // (each undirected edge appears twice in CSR).
    let mut acc = CompensatedSum::new();
    match kind {
        OperatorKind::Laplacian | OperatorKind::Density => {
            for &d in degrees {
                acc.add(d * d);
            }
            for &w in g.weights() {
                acc.add(w * w);
            }
        }
        OperatorKind::NormalizedLaplacian => {
            for i in 0..g.n() {
                if degrees[i] > 0.0 {
                    acc.add(1.0);
                }
                for (j, w) in g.neighbors(i) {
                    acc.add(w * w / (degrees[i] * degrees[j]));
                }
            }
        }
    }
    let lap_sq = acc.value();
    if kind == OperatorKind::Density {
        if g.m() == 0 {
            return Err(Error::EdgelessGraph);
        }
        let tr = laplacian_trace(degrees);
        return Ok(lap_sq / (tr * tr));
    }
    Ok(lap_sq)
}

/// `tr(M)` for the chosen graph matrix.
pub fn trace(g: &Graph, kind: OperatorKind) -> Result<f64> {
    trace_from_degrees(g, &degrees(g), kind)
}

/// `tr(M²) = Σ_ij M_ij²`, accumulated in one pass over the edges.
pub fn trace_squared(g: &Graph, kind: OperatorKind) -> Result<f64> {
    trace_squared_from_degrees(g, &degrees(g), kind)
}

/// Explicit diagonal operator.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pub diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = di * xi;
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let lo = self.diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn trace(&self) -> Option<f64> {
        Some(self.diag.iter().sum())
    }

    fn trace_squared(&self) -> Option<f64> {
        Some(self.diag.iter().map(|d| d * d).sum())
    }
}

/// Explicit dense symmetric operator, row-major.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    n: usize,
    data: Vec<f64>,
    bounds: (f64, f64),
}

impl DenseOperator {
    /// `data` must be a symmetric `n × n` matrix in row-major order.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument("dense operator needs n*n entries".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidArgument("dense operator is not symmetric".into()));
                }
            }
        }
        // Gershgorin discs.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let row = &data[i * n..(i + 1) * n];
            let radius: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
            lo = lo.min(row[i] - radius);
            hi = hi.max(row[i] + radius);
        }
        Ok(Self { n, data, bounds: (lo, hi) })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = crate::numeric::dot(&self.data[i * self.n..(i + 1) * self.n], x);
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    fn trace(&self) -> Option<f64> {
        Some((0..self.n).map(|i| self.entry(i, i)).sum())
    }

    fn trace_squared(&self) -> Option<f64> {
        Some(self.data.iter().map(|v| v * v).sum())
    }
}
