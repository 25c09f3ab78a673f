//! Site-resolved occupancy diagnostics behind the resonance mechanism:
//! <n_l> and the multiple-occupancy indicator N_l = <n_l (n_l - 1)>.

use crate::basis::BasisIndex;
use crate::cvec;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct OccupancyProfile {
    pub t: f64,
    /// <n_l> per site.
    pub mean_occupation: Vec<f64>,
    /// <n_l (n_l - 1)> per site; zero unless a site holds more than one boson.
    pub multi_occupancy: Vec<f64>,
    /// Sum of multi_occupancy over sites.
    pub total_multi: f64,
}

/// Diagonal expectations in one pass over the basis, weighted by |amplitude|^2.
pub fn occupancy_profile(
    psi: &[Complex64],
    basis: &BasisIndex,
    t: f64,
) -> Result<OccupancyProfile> {
    if psi.len() != basis.dimension() {
        return Err(Error::LengthMismatch {
            expected: basis.dimension(),
            got: psi.len(),
        });
    }
    let norm = cvec::norm(psi);
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm });
    }
    let sites = basis.sites();
    let mut mean = vec![0.0f64; sites];
    let mut multi = vec![0.0f64; sites];
    for (state, amp) in basis.states().zip(psi) {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (l, &n) in state.occupations().iter().enumerate() {
            let nf = n as f64;
            mean[l] += p * nf;
            multi[l] += p * nf * (nf - 1.0);
        }
    }
    let total_multi = multi.iter().sum();
    Ok(OccupancyProfile {
        t,
        mean_occupation: mean,
        multi_occupancy: multi,
        total_multi,
    })
}
