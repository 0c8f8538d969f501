//! Rotations of Brownian motion by adapted orthogonal processes.

mod counterexamples;
mod picard;
mod stats;
mod theta;
mod unitary;

pub use counterexamples::*;
pub use picard::{picard_inverse, picard_step, CompositionCheck, PicardConfig, PicardReport};
pub use stats::{correlation, gaussian_moments, kolmogorov_tail, ks_two_sample, normal_moment, KsResult, MomentCheck};
pub use theta::{gaussian_law_check, h_norm_sq, theta_apply, theta_apply_matrices, wiener_integral, LawReport, MorphismRun};
pub use unitary::{orthogonality_defect, rotation, UnitaryRule, ORTHOGONALITY_TOL};
