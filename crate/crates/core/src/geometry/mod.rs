//! Chart-local Riemannian geometry of the built-in models.

mod checks;
mod connection;
mod functions;
mod ids;
mod model;

pub use checks::{
    check_driver, default_frame, laplacian, laplacian_compare, laplacian_in_frame, orthonormal_frame, sample_points,
    DriverReport, DriverWitness,
};
pub use connection::{check_total_antisymmetry, ConnectionSpec, Contorsion, LoweredTorsionField};
pub use functions::TestFunction;
pub use ids::{parse_connection, parse_model};
pub use model::{ChartPoint, ManifoldModel, ModelKind, SPHERE_DOMAIN_RADIUS, SPHERE_SWITCH_RADIUS};
