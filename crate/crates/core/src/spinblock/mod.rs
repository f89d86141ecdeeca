//! Two-spin effective Hamiltonians, exact 4×4 eigenvalues, the XYZ criticality cubic
//! and the product-form variational ground states.

mod criticality;
mod matrix;
mod poly;
mod variational;

pub use criticality::{
    criticality_cubic, cubic_discriminant, cubic_double_root, det4, CriticalityCubic, Discriminant,
};
pub use matrix::{build_h_xyz, eigenvalue_slopes, jacobi_eigen, lowest_eigenvalue_slope, smallest_eigenvalue, xyz_origin_curvature, Eigen4, SymMatrix4, XyzParams};
pub use poly::{char_poly, Poly, Scalar};
pub use variational::{
    photon_distribution_variational, spin_z_expectation, variational_state, PhotonDistribution, VariationalState,
};
