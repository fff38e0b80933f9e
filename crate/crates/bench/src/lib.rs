//! Fixed inputs shared by the benchmarks.

use heatlab_core::kernel::dyadic_grid_ending_at;
use heatlab_core::{build_gasket, sample_traps, GasketPlan, Result, TrapEnvironment, WeightedGraph, Window};

pub const SEED: u64 = 7;

/// SG(2) at the given level.
pub fn gasket(level: usize) -> Result<WeightedGraph> {
    build_gasket(&GasketPlan::constant(2, level))
}

/// Trap environment on `[-half_width, half_width]`.
pub fn traps(alpha: f64, half_width: usize) -> Result<TrapEnvironment> {
    sample_traps(alpha, Window::symmetric(half_width), SEED)
}

/// Dyadic times up to `t_max`, four per octave.
pub fn times(t_max: f64) -> Vec<f64> {
    dyadic_grid_ending_at(1.0, t_max, 4)
}
