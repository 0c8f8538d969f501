//! Tangent directions on path space: the new Cameron–Martin space, the
//! tangent process `(A(v), h₁(v))`, the new gradient and the standard form.

mod gradient;
mod ncm;
mod process;

pub use gradient::{apply_dv_cylinder, new_grad, pair_with_gradient, q_limit, standard_form_q};
pub use ncm::{basis_vector, ncm_inner, FourierMode, NcmBasis, NcmVector, DEFAULT_MODES};
pub use process::{
    build_tangent_process, build_with_tensors, tensor_dv, verify_dv_consistency, CovariantTensor, Extension, FrameTensors,
    TangentProcess, DV_EPSILON,
};
