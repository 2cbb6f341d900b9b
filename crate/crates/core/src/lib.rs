//! Spectral graph descriptors computed with stochastic Lanczos quadrature.
//!
//! Two descriptors are supported, both functions of a Laplacian spectrum:
//!
//! - the NetLSD heat-trace signature `h_t = tr(exp(-t 𝓛))` of the normalized
//!   Laplacian, sampled on a logarithmic time grid;
//! - the von Neumann graph entropy `-Σ λ ln λ` of the density matrix
//!   `P = L / tr(L)`.
//!
//! Every descriptor can be computed exactly (dense eigendecomposition, for
//! small graphs), with the stochastic Lanczos quadrature estimator, or with
//! the classical Taylor / FINGER / linear-interpolation baselines.
//!
//! ```
//! use slaq::graph_io::parse_edge_list_str;
//! use slaq::descriptors::{netlsd_exact, netlsd_slaq, TimeGrid};
//! use slaq::slq::SlqConfig;
//!
//! let g = parse_edge_list_str("0 1\n1 2\n2 0\n").unwrap();
//! let grid = TimeGrid::logspace(0.01, 100.0, 32).unwrap();
//! let exact = netlsd_exact(&g, &grid).unwrap();
//! let approx = netlsd_slaq(&g, &grid, &SlqConfig::default()).unwrap();
//! assert_eq!(exact.values.len(), approx.values.len());
//! ```

pub mod bench;
pub mod cli;
pub mod descriptors;
pub mod error;
pub mod graph_io;
pub mod lanczos;
pub mod numeric;
pub mod operators;
pub mod slq;

pub use error::{Error, Result};
pub use graph_io::Graph;
pub use operators::{LinearOperator, OperatorKind};
