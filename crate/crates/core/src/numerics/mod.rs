//! Linear algebra, Gaussian special functions and seeded random streams.

pub mod linalg;
pub mod mat;
pub mod normal;
pub mod rng;

pub use linalg::{
    cholesky, cholesky_inverse, cholesky_solve, default_pinv_tol, inverse_spectrum, pinv, pinv_from_eigen, sym_eigen, sym_sqrt, SymEigen,
};
pub use mat::{add_vec, axpy, dot, norm1, norm2, norm_inf, sub_vec, Mat};
pub use normal::{bvn_lower_cdf, bvn_lower_cdf_closed, std_normal_cdf, std_normal_pdf, std_normal_sf};
pub use rng::{mvn_sample, rng_stream, RngStream};
