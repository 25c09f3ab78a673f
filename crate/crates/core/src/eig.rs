//! Thin wrapper over LAPACK's divide-and-conquer symmetric eigensolver.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Full eigendecomposition of a real symmetric matrix in standard layout.
///
/// Returns eigenvalues in ascending order and a matrix whose *rows* are the
/// corresponding orthonormal eigenvectors (the row-major reinterpretation of
/// LAPACK's column-major output).
pub(crate) fn eigh_real(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut buf = a
        .as_slice()
        .ok_or_else(|| Error::Backend("matrix not in standard layout".into()))?
        .to_vec();
    let mut w = vec![0.0f64; n];
    let nn = n as i32;
    let mut info = 0i32;

    // workspace query
    let mut wkopt = 0.0f64;
    let mut iwkopt = 0i32;
    unsafe {
        lapack_sys::dsyevd_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &nn,
            buf.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            &mut wkopt,
            &-1,
            &mut iwkopt,
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend(format!("dsyevd workspace query: info={info}")));
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &nn,
            buf.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend(format!("dsyevd failed: info={info}")));
    }
    let vectors = Array2::from_shape_vec((n, n), buf)
        .map_err(|e| Error::Backend(format!("eigenvector reshape: {e}")))?;
    Ok((w, vectors))
}
