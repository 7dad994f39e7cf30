//! C interface to the `invwishart` samplers and density kernels.
//!
//! Matrices cross the boundary as row-major `double[m * m]` buffers. Every
//! function returns an [`IwStatus`]; on failure the output arguments are
//! left untouched.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use invwishart::{
    cholesky_upper_param, logkernel_cholinvwishart, logkernel_cholwishart, logkernel_invwishart,
    logkernel_wishart, recommend_for, rinvwishart, Algorithm, CholeskyFactor, Error, OpCounter,
    Parameterization, RngStream, SamplerSpec, ScaleParam, SquareMatrix, UpperTriangular,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPositiveDefinite = 3,
    NumericalFailure = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwAlgorithm {
    Indirect = 0,
    Direct = 1,
    /// Indirect for a covariance scale, direct for a precision scale.
    Auto = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwKernel {
    /// `log p(A)` for `A ~ W_m(n, Sigma)`.
    Wishart = 0,
    /// `log p(B)` for `B ~ IW_m(n, Omega)`.
    InvWishart = 1,
    /// `log p(U_A)` for the upper Cholesky factor of a Wishart matrix.
    CholWishart = 2,
    /// `log p(U_B)` for the upper Cholesky factor of an inverse-Wishart matrix.
    CholInvWishart = 3,
}

/// Kernel calls made by the most recent draw.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IwOpCounts {
    pub trtri: u64,
    pub trmm: u64,
    pub potrf: u64,
}

impl From<OpCounter> for IwOpCounts {
    fn from(c: OpCounter) -> Self {
        Self {
            trtri: c.trtri,
            trmm: c.trmm,
            potrf: c.potrf,
        }
    }
}

/// Opaque sampler handle: a validated configuration plus its random stream.
pub struct IwSampler {
    spec: SamplerSpec,
    algorithm: Algorithm,
    rng: RngStream,
    last_ops: OpCounter,
}

fn status_of(e: &Error) -> IwStatus {
    match e {
        Error::NotPositiveDefinite { .. } | Error::NotSymmetric { .. } => {
            IwStatus::NotPositiveDefinite
        }
        e if e.is_numerical() => IwStatus::NumericalFailure,
        _ => IwStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), IwStatus>>(f: F) -> IwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => IwStatus::Panic,
    }
}

/// # Safety
/// `data` must be null or point to `m * m` readable doubles.
unsafe fn read_matrix(m: usize, data: *const f64) -> Result<SquareMatrix, IwStatus> {
    if data.is_null() {
        return Err(IwStatus::NullPointer);
    }
    let len = m.checked_mul(m).ok_or(IwStatus::InvalidArgument)?;
    let values = slice::from_raw_parts(data, len).to_vec();
    SquareMatrix::from_row_major(m, values).map_err(|e| status_of(&e))
}

/// Creates a sampler. `scale` is the row-major `m x m` scale matrix, read
/// as `Sigma`/`Omega` (`iscov`) and as a full matrix or its upper Cholesky
/// factor (`ischolu`). The scale is copied.
///
/// # Safety
/// `scale` must point to `m * m` doubles and `out` to writable storage for
/// one pointer. Release the handle with [`iw_sampler_free`].
#[no_mangle]
pub unsafe extern "C" fn iw_sampler_new(
    m: usize,
    n: f64,
    scale: *const f64,
    iscov: bool,
    ischolu: bool,
    retcholu: bool,
    algorithm: IwAlgorithm,
    seed: u64,
    out: *mut *mut IwSampler,
) -> IwStatus {
    guard(|| {
        if out.is_null() {
            return Err(IwStatus::NullPointer);
        }
        let s = read_matrix(m, scale)?;
        let param = ScaleParam::new(s, iscov, ischolu).map_err(|e| status_of(&e))?;
        let spec = SamplerSpec::new(m, n, param, retcholu).map_err(|e| status_of(&e))?;
        let algorithm = match algorithm {
            IwAlgorithm::Indirect => Algorithm::Indirect,
            IwAlgorithm::Direct => Algorithm::Direct,
            IwAlgorithm::Auto => recommend_for(spec.scale().parameterization()),
        };
        let sampler = IwSampler {
            spec,
            algorithm,
            rng: RngStream::new(seed),
            last_ops: OpCounter::new(),
        };
        *out = Box::into_raw(Box::new(sampler));
        Ok(())
    })
}

/// Draws one matrix into `out` (`len >= m * m`): `B` or, with `retcholu`,
/// its upper Cholesky factor with zeros below the diagonal.
///
/// # Safety
/// `sampler` must come from [`iw_sampler_new`]; `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn iw_sampler_draw(
    sampler: *mut IwSampler,
    out: *mut f64,
    len: usize,
) -> IwStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or(IwStatus::NullPointer)?;
        if out.is_null() {
            return Err(IwStatus::NullPointer);
        }
        let m = s.spec.m();
        if len < m * m {
            return Err(IwStatus::BufferTooSmall);
        }
        let mut ops = OpCounter::new();
        let draw =
            rinvwishart(&mut s.rng, &s.spec, s.algorithm, &mut ops).map_err(|e| status_of(&e))?;
        ptr::copy_nonoverlapping(draw.as_slice().as_ptr(), out, m * m);
        s.last_ops = ops;
        Ok(())
    })
}

/// Kernel counts of the most recent successful draw (all zero before the
/// first).
///
/// # Safety
/// `sampler` must come from [`iw_sampler_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_sampler_op_counts(
    sampler: *const IwSampler,
    out: *mut IwOpCounts,
) -> IwStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(IwStatus::NullPointer)?;
        let out = out.as_mut().ok_or(IwStatus::NullPointer)?;
        *out = s.last_ops.into();
        Ok(())
    })
}

/// The algorithm the sampler resolved to (never `IW_ALGORITHM_AUTO`).
///
/// # Safety
/// `sampler` must come from [`iw_sampler_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_sampler_algorithm(
    sampler: *const IwSampler,
    out: *mut IwAlgorithm,
) -> IwStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(IwStatus::NullPointer)?;
        let out = out.as_mut().ok_or(IwStatus::NullPointer)?;
        *out = match s.algorithm {
            Algorithm::Indirect => IwAlgorithm::Indirect,
            Algorithm::Direct => IwAlgorithm::Direct,
        };
        Ok(())
    })
}

/// Releases a sampler. Null is ignored.
///
/// # Safety
/// `sampler` must be null or come from [`iw_sampler_new`] and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn iw_sampler_free(sampler: *mut IwSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

#[no_mangle]
pub extern "C" fn iw_recommend_algorithm(iscov: bool, ischolu: bool) -> IwAlgorithm {
    match recommend_for(Parameterization::from_flags(iscov, ischolu)) {
        Algorithm::Indirect => IwAlgorithm::Indirect,
        Algorithm::Direct => IwAlgorithm::Direct,
    }
}

/// Log density kernel of `x` (row-major `m x m`; upper triangular for the
/// Cholesky kinds) up to its normalizing constant.
///
/// # Safety
/// `x` and `scale` must point to `m * m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_logkernel(
    kind: IwKernel,
    m: usize,
    x: *const f64,
    n: f64,
    scale: *const f64,
    iscov: bool,
    ischolu: bool,
    out: *mut f64,
) -> IwStatus {
    guard(|| {
        let out = out.as_mut().ok_or(IwStatus::NullPointer)?;
        let x = read_matrix(m, x)?;
        let param =
            ScaleParam::new(read_matrix(m, scale)?, iscov, ischolu).map_err(|e| status_of(&e))?;
        let wishart = matches!(kind, IwKernel::Wishart | IwKernel::CholWishart);
        let invert = if wishart { !iscov } else { iscov };
        let value = (|| {
            let u = cholesky_upper_param(&param, invert, &mut OpCounter::new())?;
            let factor =
                || CholeskyFactor::new(UpperTriangular::from_row_major(m, x.as_slice().to_vec())?);
            match kind {
                IwKernel::Wishart => logkernel_wishart(&x, n, &u),
                IwKernel::InvWishart => logkernel_invwishart(&x, n, &u),
                IwKernel::CholWishart => logkernel_cholwishart(&factor()?, n, &u),
                IwKernel::CholInvWishart => logkernel_cholinvwishart(&factor()?, n, &u),
            }
        })()
        .map_err(|e| status_of(&e))?;
        *out = value;
        Ok(())
    })
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn iw_status_message(status: IwStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        IwStatus::Ok => b"ok\0",
        IwStatus::NullPointer => b"null pointer argument\0",
        IwStatus::InvalidArgument => b"invalid argument\0",
        IwStatus::NotPositiveDefinite => b"scale matrix is not symmetric positive definite\0",
        IwStatus::NumericalFailure => b"numerical failure\0",
        IwStatus::BufferTooSmall => b"output buffer too small\0",
        IwStatus::Panic => b"internal error\0",
    };
    msg.as_ptr().cast()
}
