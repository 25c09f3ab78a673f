//! Pure-state quantum Fisher information and the Cramer-Rao precision bound.
//!
//! F_Q = 4 [ <dPsi|dPsi> - |<Psi|dPsi>|^2 ]
//!
//! evaluated on co-propagated (|Psi(t)>, |d_h Psi(t)>) pairs. A finite
//! difference route through two separate evolutions at h +/- delta serves as
//! the independent cross-check.

use crate::cvec;
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHermitian;
use crate::propagator::{evolve, EvolveOptions, EvolvedPair};
use serde::Serialize;

/// Absolute round-off floor below zero that is clamped away.
const NEGATIVE_FLOOR: f64 = 1e-10;

/// Relative round-off floor: the subtraction cancels terms of size 4<d|d>,
/// so its rounding grows with that scale.
const NEGATIVE_FLOOR_RELATIVE: f64 = 1e-12;

/// Norm deviation of |Psi> beyond this indicates a broken propagation.
const NORM_GATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QfiSample {
    /// Time in units of 1/J.
    pub t: f64,
    /// QFI in units 1/J^2 (h measured in J-units).
    pub qfi: f64,
    /// qfi / t^2 for t > 0, zero at t = 0.
    pub qfi_over_t2: f64,
}

impl QfiSample {
    fn new(t: f64, qfi: f64) -> Self {
        let qfi_over_t2 = if t > 0.0 { qfi / (t * t) } else { 0.0 };
        Self {
            t,
            qfi,
            qfi_over_t2,
        }
    }
}

fn clamp_qfi(raw: f64, cancelled_scale: f64) -> Result<f64> {
    let floor = NEGATIVE_FLOOR.max(NEGATIVE_FLOOR_RELATIVE * cancelled_scale);
    if raw < -floor {
        return Err(Error::NegativeQfi { value: raw });
    }
    Ok(raw.max(0.0))
}

fn qfi_from_vectors(psi: &[num_complex::Complex64], dpsi: &[num_complex::Complex64]) -> Result<f64> {
    let dd = cvec::norm_sq(dpsi);
    let pd = cvec::dot(psi, dpsi);
    clamp_qfi(4.0 * (dd - pd.norm_sqr()), 4.0 * dd)
}

/// QFI of an evolved pair.
pub fn qfi_pure(pair: &EvolvedPair) -> Result<QfiSample> {
    let deviation = pair.norm_deviation();
    if deviation > NORM_GATE {
        return Err(Error::NotNormalized {
            norm: 1.0 + deviation,
        });
    }
    Ok(QfiSample::new(pair.t, qfi_from_vectors(&pair.psi, &pair.dpsi)?))
}

/// QFI over a whole trajectory.
pub fn qfi_series(pairs: &[EvolvedPair]) -> Result<Vec<QfiSample>> {
    pairs.iter().map(qfi_pure).collect()
}

/// Single central-difference estimate at step `delta`, evolving at h +/- delta.
pub fn qfi_fd_once<F>(
    build: F,
    psi0: &[num_complex::Complex64],
    t: f64,
    h: f64,
    delta: f64,
    opts: &EvolveOptions,
) -> Result<QfiSample>
where
    F: Fn(f64) -> Result<SparseHermitian>,
{
    if delta <= 0.0 {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let state_at = |hv: f64| -> Result<Vec<num_complex::Complex64>> {
        Ok(evolve(&build(hv)?, psi0, &[t], opts)?.pop().unwrap())
    };
    let psi = state_at(h)?;
    let plus = state_at(h + delta)?;
    let minus = state_at(h - delta)?;
    let inv = num_complex::Complex64::new(0.5 / delta, 0.0);
    let dpsi: Vec<num_complex::Complex64> = plus
        .iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) * inv)
        .collect();
    Ok(QfiSample::new(t, qfi_from_vectors(&psi, &dpsi)?))
}

/// Finite-difference QFI with a Richardson consistency check: estimates at
/// delta and delta/2 must agree to the expected O(delta^2) order, and the
/// extrapolated value is returned. Test oracle for [`qfi_pure`].
pub fn qfi_fd_oracle<F>(
    build: F,
    psi0: &[num_complex::Complex64],
    t: f64,
    h: f64,
    delta: f64,
    opts: &EvolveOptions,
) -> Result<QfiSample>
where
    F: Fn(f64) -> Result<SparseHermitian>,
{
    const RICHARDSON_TOL: f64 = 1e-3;
    let coarse = qfi_fd_once(&build, psi0, t, h, delta, opts)?;
    let fine = qfi_fd_once(&build, psi0, t, h, 0.5 * delta, opts)?;
    let extrapolated = (4.0 * fine.qfi - coarse.qfi) / 3.0;
    let disagreement = (fine.qfi - coarse.qfi).abs();
    if disagreement > RICHARDSON_TOL * extrapolated.abs().max(1e-12) {
        return Err(Error::FdStepTooLarge { disagreement });
    }
    Ok(QfiSample::new(t, clamp_qfi(extrapolated, coarse.qfi.abs().max(fine.qfi.abs()))?))
}

/// delta_h = 1 / sqrt(M F_Q) from M independent measurements.
pub fn cramer_rao_bound(qfi: f64, measurements: u64) -> Result<f64> {
    if measurements == 0 {
        return Err(Error::Domain("need at least one measurement".into()));
    }
    if qfi <= 0.0 {
        return Err(Error::ZeroQfi);
    }
    Ok(1.0 / (measurements as f64 * qfi).sqrt())
}
