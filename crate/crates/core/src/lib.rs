//! Numerical core for Monte Carlo wavelet frames generated by a reproducing kernel.
//!
//! A frame is built by spectral filtering of the empirical covariance operator
//! `T̂ = N⁻¹ Σ K_{x_k} ⊗ K_{x_k}`, whose nonzero spectrum coincides with that of the
//! normalized kernel matrix `N⁻¹ K`. The crate is organized bottom-up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`linalg`] | small dense matrix type and helpers |
//! | [`kernels`] | kernel definitions, point sets, kernel matrices |
//! | [`eigensolve`] | symmetric eigensolver and a Jacobi reference solver |
//! | [`filters`] | spectral-function families `g_j` and filters `G_j`, `F_j` |
//! | [`frame`] | empirical frames: atoms, analysis, synthesis, reconstruction |
//! | [`spaces`] | Sobolev, Paley–Wiener and Besov norms on finite spectra |
//! | [`graph`] | weighted graphs, Laplacians and Parseval graph frames |
//! | [`model`] | circle heat testbed, smoothness schedules and rate fitting |
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is disabled.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eigensolve;
pub mod error;
pub mod filters;
pub mod frame;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod spaces;

pub use eigensolve::{sym_eig, sym_eig_oracle, sym_eig_raw, EigenSystem};
pub use error::{Error, Result};
pub use filters::{FilterFamily, FilterKind, LipschitzGrowth};
pub use frame::{build_frame, EmpiricalFrame, KernelExpansion, WaveletCoefficients};
pub use graph::{GraphFrame, LaplacianKind, WeightedGraph};
pub use kernels::{KernelSpec, Point, PointSet};
pub use linalg::Matrix;
pub use spaces::{BesovParams, SpectralSignal};
