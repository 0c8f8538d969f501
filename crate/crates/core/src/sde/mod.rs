//! Brownian increments and the Heun scheme for Stratonovich systems.

mod brownian;
mod convergence;
mod integrator;
mod linear;

pub use brownian::{BrownianDraw, TimeGrid};
pub use convergence::{check_nested, estimate_strong_order, fit_loglog, halving_rate, ExactSolution, OrderFit, StrongOrderReport};
pub use integrator::{integrate_stratonovich, ChartPolicy, NoCharts, StatePath, StratonovichSystem};
pub use linear::LinearSystem;

/// Default grid size.
pub const DEFAULT_STEPS: usize = 4096;
/// Ladder used by convergence studies.
pub const LADDER: [usize; 5] = [512, 1024, 2048, 4096, 8192];
