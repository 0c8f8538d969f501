//! Wiener chaos over finitely many Gaussian coordinates, with exact rational
//! coefficients or `f64`.
//!
//! Functions are polynomials in `W(e_1), …, W(e_N)` written in the
//! probabilists' Hermite basis, `E[He_j He_k] = k! δ_jk`. The divergence is the
//! Skorokhod integral, so `div(e_1) = W(e_1)` and `E⟨X, grad φ⟩ = E[(div X) φ]`.

pub mod clark_ocone;
pub mod coeff;
pub mod derivation;
pub mod error;
pub mod field;
pub mod function;
pub mod q0;
pub mod suite;

pub use clark_ocone::{clark_ocone, clark_ocone_defect, ClarkOcone};
pub use coeff::{Coeff, Rational};
pub use derivation::{approx_derivation, derivation_div_a_grad, leibniz_defect, not_a_vector_field, AntisymOperator, ApproxStep, Derivation, DivergenceWitness};
pub use error::{ChaosError, Result};
pub use field::{adjointness_defect, div, grad, pair, partial, VectorField};
pub use function::{Caps, ChaosFunction, MultiIndex};
pub use q0::{fundamental_q0, q0_gradient_defect, q0_nondegenerate, Covector};
pub use suite::{check_ou_ce_commute, run_suite, SuiteCheck};
