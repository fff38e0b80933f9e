//! Heat kernels, spectra and anomalous diffusion on fractal and random media.
//!
//! Builders produce [`WeightedGraph`]s (gaskets, IIC trees, uniform spanning
//! trees) and [`TrapEnvironment`]s; the [`kernel`] solvers turn them into
//! [`HeatKernelSeries`] with rigorous error bounds, and [`analysis`] fits
//! exponents, oscillations and ensemble statistics.

pub mod analysis;
pub mod env;
pub mod error;
pub mod gasket;
pub mod graph;
pub mod iic;
pub mod kernel;
pub mod oracles;
pub mod seed;
pub mod spectral;
pub mod ust;

pub use env::{hill_estimate, phi_alpha, sample_traps, volume, PhiValue, TrapEnvironment, Window};
pub use error::{Error, Result};
pub use gasket::{build_gasket, build_recursive_gasket, GasketPlan, PlanNode};
pub use graph::{GraphDescriptor, WeightedGraph};
pub use iic::{build_iic, iic_return_kernel, IicTree};
pub use kernel::{HeatKernelSeries, Method, SeriesPoint};
pub use spectral::{laplacian_spectrum, BoundaryCondition, SpectrumResult};
pub use ust::{spanning_tree_count, wilson_ust, UstBoundary};
