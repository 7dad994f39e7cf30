//! Wishart and inverse-Wishart random matrices, their upper Cholesky factors
//! and log density kernels, with every cubic-cost kernel call counted.
//!
//! ```
//! use invwishart::{rinvwishart, recommend_algorithm, OpCounter, RngStream, SamplerSpec, ScaleParam, SquareMatrix};
//!
//! let omega = SquareMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
//! let spec = SamplerSpec::new(2, 5.0, ScaleParam::precision(omega), true).unwrap();
//! let alg = recommend_algorithm(spec.scale());
//! let mut ops = OpCounter::new();
//! let u_b = rinvwishart(&mut RngStream::new(42), &spec, alg, &mut ops).unwrap();
//! assert!(u_b.is_factor());
//! assert_eq!(ops.total(), 3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod densities;
pub mod error;
pub mod io;
pub mod linalg;
pub mod opcount;
pub mod random;
pub mod samplers;
pub mod validation;

pub use densities::{
    logjac_chol, logjac_tri_inverse, logkernel_cholinvwishart, logkernel_cholwishart,
    logkernel_invwishart, logkernel_wishart,
};
pub use error::{Error, Result};
pub use linalg::{
    chol_upper, gram_ut, gram_vt, tri_inverse, tri_mul, CholeskyFactor, OpCounter, SquareMatrix,
    UpperTriangular,
};
pub use random::{DegreesOfFreedom, RngStream, ScalarSource};
pub use samplers::{
    cholesky_upper_param, recommend_algorithm, recommend_for, rinvwishart, rinvwishart_chol,
    rinvwishart_direct, rinvwishart_indirect, rwishart, rwishart_chol, Algorithm, Parameterization,
    Sample, SamplerSpec, ScaleParam,
};
