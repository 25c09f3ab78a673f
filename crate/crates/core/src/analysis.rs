//! Parameter sweeps over the model and extraction of the quantitative
//! results: the long-time normalized QFI plateau, the size and particle
//! scaling exponents, the critical tilt, and the interaction resonance
//! coefficient A_r(U, h) = plateau(U, h) / plateau(0, h).
//!
//! Scan cells are independent work items executed on the rayon pool; results
//! are collected back in grid order so outputs are deterministic.

use crate::basis::staggered_initial_state;
use crate::cvec;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_gradient_generator, build_hamiltonian, ModelParams};
use crate::propagator::{evolve_with_derivative, EvolveOptions};
use crate::qfi::{qfi_series, QfiSample};
use rayon::prelude::*;
use serde::Serialize;

/// Shared knobs for every sweep: evolution horizon, sampling step, tail
/// window, and the propagation options.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepSettings {
    /// Evolution horizon T in units of 1/J.
    pub horizon: f64,
    /// Grid spacing for QFI sampling.
    pub dt: f64,
    /// Fraction of the horizon forming the tail window of the plateau.
    pub window_fraction: f64,
    /// spread/value above this flags a non-plateau.
    pub plateau_tolerance: f64,
    #[serde(skip)]
    pub evolve: EvolveOptions,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            dt: 0.5,
            window_fraction: 0.5,
            plateau_tolerance: 0.15,
            evolve: EvolveOptions::default(),
        }
    }
}

impl SweepSettings {
    pub fn time_grid(&self) -> Vec<f64> {
        let steps = (self.horizon / self.dt).round().max(1.0) as usize;
        (0..=steps).map(|k| k as f64 * self.dt).collect()
    }
}

/// QFI trajectory for one parameter point, from the staggered initial state.
pub fn run_qfi_series(params: &ModelParams, settings: &SweepSettings) -> Result<Vec<QfiSample>> {
    params.validate()?;
    let basis = params.basis()?;
    let psi0 = staggered_initial_state(params.sites, params.particles)?;
    let index = basis.rank(&psi0)?;
    let v0 = cvec::unit(basis.dimension(), index);
    let h = build_hamiltonian(params, &basis)?;
    let g = build_gradient_generator(&basis);
    let pairs = evolve_with_derivative(&h, &g, &v0, &settings.time_grid(), &settings.evolve)?;
    qfi_series(&pairs)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlateauEstimate {
    /// Mean of F_Q/t^2 over the tail window.
    pub value: f64,
    /// Standard deviation over the window.
    pub spread: f64,
    /// (t_min, t_max) of the window.
    pub window: (f64, f64),
    /// False when spread/value exceeds the tolerance.
    pub flat: bool,
}

/// Tail-window mean of F_Q/t^2; the operational "long time limit".
pub fn plateau(
    series: &[QfiSample],
    window_fraction: f64,
    tolerance: f64,
) -> Result<PlateauEstimate> {
    if series.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::Domain(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    let t_max = series.last().unwrap().t;
    let t_min = (1.0 - window_fraction) * t_max;
    let tail: Vec<f64> = series
        .iter()
        .filter(|s| s.t >= t_min && s.t > 0.0)
        .map(|s| s.qfi_over_t2)
        .collect();
    if tail.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let n = tail.len() as f64;
    let value = tail.iter().sum::<f64>() / n;
    let spread = (tail.iter().map(|x| (x - value).powi(2)).sum::<f64>() / n).sqrt();
    let flat = spread <= tolerance * value.abs().max(f64::MIN_POSITIVE);
    Ok(PlateauEstimate {
        value,
        spread,
        window: (t_min, t_max),
        flat,
    })
}

/// Plateau for one parameter point.
pub fn run_plateau(params: &ModelParams, settings: &SweepSettings) -> Result<PlateauEstimate> {
    let series = run_qfi_series(params, settings)?;
    plateau(&series, settings.window_fraction, settings.plateau_tolerance)
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// (x, y) pairs actually used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least squares of ln y on ln x.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            got: points.len(),
        });
    }
    for &(x, y) in points {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::NonPositiveFitData(format!("({x}, {y})")));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::NonPositiveFitData("degenerate abscissas".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        points: points.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub at: f64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingOutcome {
    pub fit: PowerLawFit,
    /// Parameter points whose propagation failed and were excluded.
    pub failures: Vec<PointFailure>,
}

fn scaling_fit(results: Vec<(f64, Result<PlateauEstimate>)>) -> Result<ScalingOutcome> {
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (x, r) in results {
        match r {
            Ok(p) => points.push((x, p.value)),
            Err(e) => failures.push(PointFailure {
                at: x,
                error: e.to_string(),
            }),
        }
    }
    Ok(ScalingOutcome {
        fit: fit_power_law(&points)?,
        failures,
    })
}

/// F_Q/t^2 ~ L^beta at fixed N.
pub fn size_scaling(
    base: &ModelParams,
    sizes: &[usize],
    settings: &SweepSettings,
) -> Result<ScalingOutcome> {
    let results: Vec<(f64, Result<PlateauEstimate>)> = sizes
        .par_iter()
        .map(|&l| {
            let p = ModelParams { sites: l, ..*base };
            (l as f64, run_plateau(&p, settings))
        })
        .collect();
    scaling_fit(results)
}

/// F_Q/t^2 ~ N^alpha at fixed L.
pub fn particle_scaling(
    base: &ModelParams,
    particle_counts: &[usize],
    settings: &SweepSettings,
) -> Result<ScalingOutcome> {
    if particle_counts.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            got: particle_counts.len(),
        });
    }
    if let Some(&n_max) = particle_counts.iter().max() {
        if base.sites < 2 * n_max - 1 {
            return Err(Error::Capacity {
                sites: base.sites,
                particles: n_max,
            });
        }
    }
    let results: Vec<(f64, Result<PlateauEstimate>)> = particle_counts
        .par_iter()
        .map(|&n| {
            let p = ModelParams {
                particles: n,
                ..*base
            };
            (n as f64, run_plateau(&p, settings))
        })
        .collect();
    scaling_fit(results)
}

/// Plateau vs h in the localized phase; the expected exponent is -2.
pub fn localized_h_scaling(
    base: &ModelParams,
    h_grid: &[f64],
    settings: &SweepSettings,
) -> Result<ScalingOutcome> {
    let results: Vec<(f64, Result<PlateauEstimate>)> = h_grid
        .par_iter()
        .map(|&h| {
            let p = ModelParams { h, ..*base };
            (h, run_plateau(&p, settings))
        })
        .collect();
    scaling_fit(results)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    /// Peak location after parabolic refinement (in ln h).
    pub h_c: f64,
    pub plateau_at_peak: f64,
    /// False when the maximum sits on the grid boundary.
    pub interior: bool,
    pub scan: Vec<(f64, PlateauEstimate)>,
}

/// Locate the tilt maximizing the plateau over an ascending h grid.
pub fn critical_point(
    base: &ModelParams,
    h_grid: &[f64],
    settings: &SweepSettings,
) -> Result<CriticalPoint> {
    if h_grid.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            got: h_grid.len(),
        });
    }
    if h_grid.windows(2).any(|w| w[1] <= w[0]) || h_grid[0] <= 0.0 {
        return Err(Error::Domain("h grid must be positive ascending".into()));
    }
    let scan: Vec<(f64, PlateauEstimate)> = h_grid
        .par_iter()
        .map(|&h| {
            let p = ModelParams { h, ..*base };
            run_plateau(&p, settings).map(|est| (h, est))
        })
        .collect::<Result<_>>()?;
    let peak = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.value.total_cmp(&b.1 .1.value))
        .map(|(i, _)| i)
        .unwrap();
    let interior = peak > 0 && peak + 1 < scan.len();
    let (h_c, plateau_at_peak) = if interior {
        // one parabolic step in ln h
        let (x0, y0) = (scan[peak - 1].0.ln(), scan[peak - 1].1.value);
        let (x1, y1) = (scan[peak].0.ln(), scan[peak].1.value);
        let (x2, y2) = (scan[peak + 1].0.ln(), scan[peak + 1].1.value);
        match parabolic_vertex(x0, y0, x1, y1, x2, y2) {
            Some((xv, yv)) if xv >= x0 && xv <= x2 => (xv.exp(), yv),
            _ => (scan[peak].0, y1),
        }
    } else {
        (scan[peak].0, scan[peak].1.value)
    };
    Ok(CriticalPoint {
        h_c,
        plateau_at_peak,
        interior,
        scan,
    })
}

fn parabolic_vertex(x0: f64, y0: f64, x1: f64, y1: f64, x2: f64, y2: f64) -> Option<(f64, f64)> {
    let d0 = (x1 - x0) * (y1 - y2);
    let d2 = (x1 - x2) * (y1 - y0);
    let denom = d0 - d2;
    if denom.abs() < 1e-30 {
        return None;
    }
    let xv = x1 - 0.5 * ((x1 - x0) * d0 - (x1 - x2) * d2) / denom;
    // vertex value from the Lagrange form
    let l0 = (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
    Some((xv, y0 * l0 + y1 * l1 + y2 * l2))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanCell {
    pub u: f64,
    pub h: f64,
    pub plateau: Option<PlateauEstimate>,
    /// Resonance coefficient plateau(U,h)/plateau(0,h), when both succeeded.
    pub a_r: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakLine {
    pub h: f64,
    /// Refined U locations of the detected A_r maxima, ascending.
    pub u_peaks: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceScan {
    /// Cells in (h-major, u-minor) order.
    pub cells: Vec<ScanCell>,
    /// Non-interacting baseline plateau per h.
    pub baselines: Vec<(f64, PlateauEstimate)>,
    pub peaks: Vec<PeakLine>,
}

/// Minimum A_r for a local maximum to count as a resonance peak; keeps the
/// +-10% off-resonance ripple out of the peak list.
const PEAK_MIN_HEIGHT: f64 = 1.25;

/// Map the (U, h) plane: plateau, A_r ratios against the U=0 baseline, and
/// the U locations of the resonance maxima for each h.
pub fn resonance_scan(
    base: &ModelParams,
    u_grid: &[f64],
    h_grid: &[f64],
    settings: &SweepSettings,
) -> Result<ResonanceScan> {
    if u_grid.is_empty() || h_grid.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let baselines: Vec<(f64, PlateauEstimate)> = h_grid
        .par_iter()
        .map(|&h| {
            let p = ModelParams { u: 0.0, h, ..*base };
            run_plateau(&p, settings).map(|est| (h, est))
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::with_capacity(h_grid.len() * u_grid.len());
    for &h in h_grid {
        for &u in u_grid {
            jobs.push((u, h));
        }
    }
    let results: Vec<Result<PlateauEstimate>> = jobs
        .par_iter()
        .map(|&(u, h)| {
            let p = ModelParams { u, h, ..*base };
            run_plateau(&p, settings)
        })
        .collect();

    let mut cells = Vec::with_capacity(jobs.len());
    for (&(u, h), result) in jobs.iter().zip(results) {
        let baseline = baselines
            .iter()
            .find(|(bh, _)| *bh == h)
            .map(|(_, est)| est.value)
            .unwrap();
        let cell = match result {
            Ok(est) => ScanCell {
                u,
                h,
                a_r: if u == 0.0 {
                    Some(1.0)
                } else {
                    Some(est.value / baseline)
                },
                plateau: Some(est),
                error: None,
            },
            Err(e) => ScanCell {
                u,
                h,
                plateau: None,
                a_r: None,
                error: Some(e.to_string()),
            },
        };
        cells.push(cell);
    }

    let mut peaks = Vec::with_capacity(h_grid.len());
    for (row, &h) in h_grid.iter().enumerate() {
        let slice = &cells[row * u_grid.len()..(row + 1) * u_grid.len()];
        let profile: Vec<(f64, f64)> = slice
            .iter()
            .filter_map(|c| c.a_r.map(|a| (c.u, a)))
            .collect();
        peaks.push(PeakLine {
            h,
            u_peaks: local_maxima(&profile, PEAK_MIN_HEIGHT),
        });
    }

    Ok(ResonanceScan {
        cells,
        baselines,
        peaks,
    })
}

/// Interior local maxima above `min_height`, refined by one parabolic step.
fn local_maxima(profile: &[(f64, f64)], min_height: f64) -> Vec<f64> {
    let mut found = Vec::new();
    for i in 1..profile.len().saturating_sub(1) {
        let (x, y) = profile[i];
        let (xl, yl) = profile[i - 1];
        let (xr, yr) = profile[i + 1];
        if y > yl && y >= yr && y >= min_height {
            let refined = match parabolic_vertex(xl, yl, x, y, xr, yr) {
                Some((xv, _)) if xv >= xl && xv <= xr => xv,
                _ => x,
            };
            found.push(refined);
        }
    }
    found
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub h: f64,
    /// (N, A_r(U = m h, h)) per particle number.
    pub per_n: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceCoefficientTable {
    pub m: u32,
    pub rows: Vec<CoefficientRow>,
}

/// A_r with U locked to m*h along the grid, for each particle number.
pub fn resonance_coefficient(
    base: &ModelParams,
    particle_counts: &[usize],
    m: u32,
    h_grid: &[f64],
    settings: &SweepSettings,
) -> Result<ResonanceCoefficientTable> {
    if !(1..=4).contains(&m) {
        return Err(Error::Domain(format!("resonance order m={m} not in 1..=4")));
    }
    let mut jobs = Vec::new();
    for &h in h_grid {
        for &n in particle_counts {
            jobs.push((h, n));
        }
    }
    let ratios: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(h, n)| {
            let resonant = ModelParams {
                u: m as f64 * h,
                h,
                particles: n,
                ..*base
            };
            let baseline = ModelParams {
                u: 0.0,
                h,
                particles: n,
                ..*base
            };
            Ok(run_plateau(&resonant, settings)?.value / run_plateau(&baseline, settings)?.value)
        })
        .collect();

    let mut rows: Vec<CoefficientRow> = Vec::with_capacity(h_grid.len());
    for (k, &h) in h_grid.iter().enumerate() {
        let mut per_n = Vec::with_capacity(particle_counts.len());
        for (j, &n) in particle_counts.iter().enumerate() {
            match &ratios[k * particle_counts.len() + j] {
                Ok(a) => per_n.push((n, *a)),
                Err(e) => {
                    return Err(Error::Domain(format!(
                        "resonance coefficient failed at h={h}, N={n}: {e}"
                    )))
                }
            }
        }
        rows.push(CoefficientRow { h, per_n });
    }
    Ok(ResonanceCoefficientTable { m, rows })
}
