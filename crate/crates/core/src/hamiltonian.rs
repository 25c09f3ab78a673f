//! Tilted Bose-Hubbard Hamiltonian and its gradient generator as sparse
//! Hermitian operators in the Fock basis.
//!
//! H = -J sum_l (b+_l b_{l+1} + h.c.) + (U/2) sum_l n_l(n_l - 1) + h sum_l l n_l
//!
//! with open boundaries and the gradient site index starting at l = 0.
//! All entries are real in this basis; the storage is complex so the same
//! operator type covers derived operators and the propagator internals.

use crate::basis::BasisIndex;
use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Model parameters in the unit system of choice. The default experiments
/// work dimensionless: J = 1 fixes the energy unit, times are in 1/J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Nearest-neighbor tunneling energy J >= 0.
    pub j: f64,
    /// On-site interaction energy U.
    pub u: f64,
    /// Gradient energy per site h.
    pub h: f64,
    /// Lattice size L.
    pub sites: usize,
    /// Particle number N.
    pub particles: usize,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.sites < 1 {
            return Err(Error::Domain("need at least one site".into()));
        }
        if self.j < 0.0 || !self.j.is_finite() || !self.u.is_finite() || !self.h.is_finite() {
            return Err(Error::Domain(format!(
                "parameters must be finite with J >= 0, got J={}, U={}, h={}",
                self.j, self.u, self.h
            )));
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<BasisIndex> {
        BasisIndex::new(self.sites, self.particles)
    }
}

/// Row-compressed sparse Hermitian operator. Columns are sorted within each
/// row, which fixes the summation order of [`apply`](Self::apply).
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseHermitian {
    /// Build from per-row triplets; entries in one row are sorted and merged.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        assert_eq!(rows.len(), dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(col, _)| col);
            let mut last_col = usize::MAX;
            for (col, val) in row {
                debug_assert!(col < dim);
                if col == last_col {
                    *values.last_mut().unwrap() += val;
                } else {
                    col_idx.push(col);
                    values.push(val);
                    last_col = col;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn diagonal_from(entries: Vec<f64>) -> Self {
        let dim = entries.len();
        let rows = entries
            .into_iter()
            .enumerate()
            .map(|(i, v)| vec![(i, Complex64::new(v, 0.0))])
            .collect();
        Self::from_rows(dim, rows)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c, v))
    }

    /// y = H x, row by row with ascending columns.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// H x for real H and real x; errors if the operator has complex entries.
    pub fn apply_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.values[k];
                if v.im != 0.0 {
                    return Err(Error::Backend(format!(
                        "operator entry ({i},{}) = {v} is not real",
                        self.col_idx[k]
                    )));
                }
                acc += v.re * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// <v|H|v>.
    pub fn expectation(&self, v: &[Complex64]) -> Result<Complex64> {
        let hv = self.apply(v)?;
        Ok(v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum())
    }

    /// Largest |H_ij - conj(H_ji)| over stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                let vt = self
                    .row(j)
                    .find(|&(c, _)| c == i)
                    .map(|(_, v)| v)
                    .unwrap_or_else(|| Complex64::new(0.0, 0.0));
                worst = worst.max((v - vt.conj()).norm());
            }
        }
        worst
    }

    /// (min, max) of the real diagonal; used to center the spectrum before
    /// Krylov steps.
    pub fn diagonal_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let d = self
                .row(i)
                .find(|&(c, _)| c == i)
                .map(|(_, v)| v.re)
                .unwrap_or(0.0);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[[i, j]] = v;
            }
        }
        m
    }

    /// Dense real part, failing if any entry has a significant imaginary part.
    pub fn to_dense_real(&self) -> Result<Array2<f64>> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                if v.im.abs() > 1e-14 * (1.0 + v.re.abs()) {
                    return Err(Error::Backend(format!(
                        "operator entry ({i},{j}) = {v} is not real"
                    )));
                }
                m[[i, j]] = v.re;
            }
        }
        Ok(m)
    }

    /// Debug export: one "row col re im" line per stored entry, sorted.
    pub fn write_coordinate_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(out, "{} {} {} {}", i, j, v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Assemble the tilted Bose-Hubbard Hamiltonian in the given basis.
pub fn build_hamiltonian(params: &ModelParams, basis: &BasisIndex) -> Result<SparseHermitian> {
    params.validate()?;
    if basis.sites() != params.sites || basis.particles() != params.particles {
        return Err(Error::Membership {
            sites: params.sites,
            particles: params.particles,
            reason: format!(
                "basis is for (L={}, N={})",
                basis.sites(),
                basis.particles()
            ),
        });
    }
    let dim = basis.dimension();
    let sites = basis.sites();
    let mut rows: Vec<Vec<(usize, Complex64)>> = Vec::with_capacity(dim);

    for (i, state) in basis.states().enumerate() {
        let occ = state.occupations();
        let mut row = Vec::with_capacity(2 * sites + 1);

        let mut diag = 0.0;
        for (l, &n) in occ.iter().enumerate() {
            let nf = n as f64;
            diag += 0.5 * params.u * nf * (nf - 1.0) + params.h * (l as f64) * nf;
        }
        row.push((i, Complex64::new(diag, 0.0)));

        if params.j != 0.0 {
            let mut moved = state.clone();
            for l in 0..sites - 1 {
                // move one boson l -> l+1
                if occ[l] > 0 {
                    let amp = -params.j * ((occ[l] as f64) * (occ[l + 1] as f64 + 1.0)).sqrt();
                    moved.0[l] -= 1;
                    moved.0[l + 1] += 1;
                    row.push((basis.rank(&moved)?, Complex64::new(amp, 0.0)));
                    moved.0[l] += 1;
                    moved.0[l + 1] -= 1;
                }
                // move one boson l+1 -> l
                if occ[l + 1] > 0 {
                    let amp = -params.j * ((occ[l + 1] as f64) * (occ[l] as f64 + 1.0)).sqrt();
                    moved.0[l + 1] -= 1;
                    moved.0[l] += 1;
                    row.push((basis.rank(&moved)?, Complex64::new(amp, 0.0)));
                    moved.0[l + 1] += 1;
                    moved.0[l] -= 1;
                }
            }
        }
        rows.push(row);
    }
    Ok(SparseHermitian::from_rows(dim, rows))
}

/// G = dH/dh = sum_l l n_l, diagonal in the Fock basis.
pub fn build_gradient_generator(basis: &BasisIndex) -> SparseHermitian {
    let entries = basis
        .states()
        .map(|s| {
            s.occupations()
                .iter()
                .enumerate()
                .map(|(l, &n)| (l as f64) * (n as f64))
                .sum()
        })
        .collect();
    SparseHermitian::diagonal_from(entries)
}
