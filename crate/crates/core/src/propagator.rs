//! Unitary time evolution under exp(-iHt), with co-propagation of the
//! parameter derivative |d_h Psi(t)>.
//!
//! Two interchangeable paths:
//!
//! * a dense eigenbasis propagator for moderate dimensions (exact up to the
//!   eigensolver), which doubles as the cross-check oracle, and
//! * a Krylov-subspace short-step exponential with adaptive step halving.
//!
//! The derivative state obeys i d/dt |dPsi> = H|dPsi> + G|Psi> with
//! dPsi(0) = 0, which both paths integrate through the block-triangular
//! augmented generator [[H, 0], [G, H]]: exactly (per eigenbasis Duhamel
//! step) in the dense path, and by Arnoldi steps on the augmented operator
//! in the Krylov path. The augmented matrix is not Hermitian, so the Krylov
//! path uses full orthogonalization; applied to H alone this is Lanczos with
//! reorthogonalization.

use crate::cvec;
use crate::eig::eigh_real;
use crate::error::{Error, Result};
use crate::expm::expm_first_column;
use crate::hamiltonian::SparseHermitian;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// |Psi(t)> together with |d_h Psi(t)>, in the Fock basis.
#[derive(Debug, Clone)]
pub struct EvolvedPair {
    /// Time in units of 1/J.
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
}

impl EvolvedPair {
    pub fn norm_deviation(&self) -> f64 {
        (cvec::norm(&self.psi) - 1.0).abs()
    }

    /// Re<psi|dpsi>, zero for norm-preserving differentiation.
    pub fn norm_derivative(&self) -> f64 {
        cvec::dot(&self.psi, &self.dpsi).re
    }
}

/// Propagation path selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dense for dimension <= dense_threshold, Krylov above.
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KrylovOptions {
    /// Maximum Krylov subspace dimension per step.
    pub max_dim: usize,
    /// Residual estimate accepted per step, relative to the state norm.
    pub step_tol: f64,
    /// Give up after this many step halvings.
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            max_dim: 30,
            step_tol: 1e-12,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub method: Method,
    pub dense_threshold: usize,
    pub krylov: KrylovOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            dense_threshold: 1024,
            krylov: KrylovOptions::default(),
        }
    }
}

impl EvolveOptions {
    fn resolve(&self, dim: usize) -> Method {
        match self.method {
            Method::Auto => {
                if dim <= self.dense_threshold {
                    Method::Dense
                } else {
                    Method::Krylov
                }
            }
            m => m,
        }
    }
}

fn check_state(dim: usize, psi0: &[Complex64]) -> Result<()> {
    if psi0.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: psi0.len(),
        });
    }
    let norm = cvec::norm(psi0);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if let Some(&t0) = t_grid.first() {
        if t0 < 0.0 {
            return Err(Error::Domain(format!("grid starts at negative time {t0}")));
        }
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be non-decreasing".into()));
    }
    Ok(())
}

/// |Psi(t_k)> = exp(-iHt_k)|Psi(0)> on an ascending time grid.
pub fn evolve(
    h: &SparseHermitian,
    psi0: &[Complex64],
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<Vec<Complex64>>> {
    check_state(h.dimension(), psi0)?;
    check_grid(t_grid)?;
    match opts.resolve(h.dimension()) {
        Method::Dense => DenseEvolver::new(h)?.evolve(psi0, t_grid),
        _ => {
            let shift = spectral_center(h);
            propagate_krylov(h, shift, psi0.to_vec(), t_grid, &opts.krylov)
        }
    }
}

/// Co-propagate (|Psi>, |d_h Psi>) under the augmented generator.
pub fn evolve_with_derivative(
    h: &SparseHermitian,
    g: &SparseHermitian,
    psi0: &[Complex64],
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<EvolvedPair>> {
    check_state(h.dimension(), psi0)?;
    check_grid(t_grid)?;
    if g.dimension() != h.dimension() {
        return Err(Error::LengthMismatch {
            expected: h.dimension(),
            got: g.dimension(),
        });
    }
    match opts.resolve(h.dimension()) {
        Method::Dense => {
            let evolver = DenseEvolver::new(h)?;
            evolver.evolve_with_derivative(g, psi0, t_grid)
        }
        _ => {
            let dim = h.dimension();
            let shift = spectral_center(h);
            let op = Augmented { h, g };
            let mut v0 = cvec::zeros(2 * dim);
            v0[..dim].copy_from_slice(psi0);
            let states = propagate_krylov(&op, shift, v0, t_grid, &opts.krylov)?;
            Ok(states
                .into_iter()
                .zip(t_grid)
                .map(|(v, &t)| EvolvedPair {
                    t,
                    psi: v[..dim].to_vec(),
                    dpsi: v[dim..].to_vec(),
                })
                .collect())
        }
    }
}

fn spectral_center(h: &SparseHermitian) -> f64 {
    let (lo, hi) = h.diagonal_range();
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// dense eigenbasis path

/// Exact propagator from a full symmetric eigendecomposition, valid for the
/// real Hamiltonians this crate assembles.
pub struct DenseEvolver {
    dim: usize,
    energies: Vec<f64>,
    /// rows are orthonormal eigenvectors
    vectors: Array2<f64>,
}

impl DenseEvolver {
    pub fn new(h: &SparseHermitian) -> Result<Self> {
        let dense = h.to_dense_real()?;
        let (energies, vectors) = eigh_real(&dense)?;
        Ok(Self {
            dim: h.dimension(),
            energies,
            vectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    fn to_eigen(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = cvec::zeros(self.dim);
        for (k, row) in self.vectors.rows().into_iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (vi, xi) in row.iter().zip(x) {
                acc += xi * *vi;
            }
            y[k] = acc;
        }
        y
    }

    fn from_eigen(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut x = cvec::zeros(self.dim);
        for (k, row) in self.vectors.rows().into_iter().enumerate() {
            let yk = y[k];
            for (xi, vi) in x.iter_mut().zip(row) {
                *xi += yk * *vi;
            }
        }
        x
    }

    pub fn evolve(&self, psi0: &[Complex64], t_grid: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        check_state(self.dim, psi0)?;
        check_grid(t_grid)?;
        let c0 = self.to_eigen(psi0);
        Ok(t_grid
            .iter()
            .map(|&t| {
                let ct: Vec<Complex64> = c0
                    .iter()
                    .zip(&self.energies)
                    .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
                    .collect();
                self.from_eigen(&ct)
            })
            .collect())
    }

    /// G rotated into the eigenbasis: Gt[a][b] = v_a . G v_b.
    fn g_in_eigenbasis(&self, g: &SparseHermitian) -> Result<Array2<f64>> {
        let mut gw = Array2::<f64>::zeros((self.dim, self.dim));
        for (k, mut out) in gw.rows_mut().into_iter().enumerate() {
            let row = self.vectors.row(k);
            let gr = g.apply_real(row.as_slice().expect("standard layout"))?;
            out.assign(&ndarray::ArrayView1::from(&gr));
        }
        Ok(self.vectors.dot(&gw.t()))
    }

    /// One-step Duhamel matrices for step dt: the diagonal phase
    /// exp(-i E dt) and M = -i (Gt o K)(dt) with
    /// K_ab = dt exp(-i(E_a+E_b)dt/2) sinc((E_a-E_b)dt/2).
    fn step_matrices(&self, gt: &Array2<f64>, dt: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.dim;
        let phases: Vec<Complex64> = self
            .energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * dt))
            .collect();
        let half: Vec<(f64, f64)> = self
            .energies
            .iter()
            .map(|&e| (0.5 * e * dt).sin_cos())
            .collect();
        let minus_i = Complex64::new(0.0, -1.0);
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for a in 0..n {
            let (sa, ca) = half[a];
            let ea = self.energies[a];
            for b in 0..n {
                let (sb, cb) = half[b];
                let x = 0.5 * (ea - self.energies[b]) * dt;
                let sinc = if x.abs() < 1e-6 {
                    1.0 - x * x / 6.0
                } else {
                    (sa * cb - ca * sb) / x
                };
                // exp(-i(E_a+E_b)dt/2) = (ca cb - sa sb) - i (sa cb + ca sb)
                let phase = Complex64::new(ca * cb - sa * sb, -(sa * cb + ca * sb));
                m[a * n + b] = minus_i * gt[[a, b]] * dt * sinc * phase;
            }
        }
        (phases, m)
    }

    pub fn evolve_with_derivative(
        &self,
        g: &SparseHermitian,
        psi0: &[Complex64],
        t_grid: &[f64],
    ) -> Result<Vec<EvolvedPair>> {
        check_state(self.dim, psi0)?;
        check_grid(t_grid)?;
        let gt = self.g_in_eigenbasis(g)?;
        let n = self.dim;
        let mut c = self.to_eigen(psi0);
        let mut d = cvec::zeros(n);
        let mut t_cur = 0.0;
        let mut cached: Option<(f64, (Vec<Complex64>, Vec<Complex64>))> = None;
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let dt = t - t_cur;
            if dt > 0.0 {
                let rebuild = match &cached {
                    Some((cdt, _)) => (cdt - dt).abs() > 1e-12 * dt.max(1.0),
                    None => true,
                };
                if rebuild {
                    cached = Some((dt, self.step_matrices(&gt, dt)));
                }
                let (phases, m) = &cached.as_ref().unwrap().1;
                let mut mc = cvec::zeros(n);
                for a in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (mv, cv) in m[a * n..(a + 1) * n].iter().zip(&c) {
                        acc += mv * cv;
                    }
                    mc[a] = acc;
                }
                for i in 0..n {
                    d[i] = phases[i] * d[i] + mc[i];
                    c[i] *= phases[i];
                }
                t_cur = t;
            }
            out.push(EvolvedPair {
                t,
                psi: self.from_eigen(&c),
                dpsi: self.from_eigen(&d),
            });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Krylov path

pub(crate) trait LinearOp {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinearOp for SparseHermitian {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        SparseHermitian::apply_into(self, x, y);
    }
}

/// [[H, 0], [G, H]] acting on stacked (psi, dpsi).
struct Augmented<'a> {
    h: &'a SparseHermitian,
    g: &'a SparseHermitian,
}

impl LinearOp for Augmented<'_> {
    fn dim(&self) -> usize {
        2 * self.h.dimension()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.h.dimension();
        let (xt, xb) = x.split_at(n);
        let (yt, yb) = y.split_at_mut(n);
        self.h.apply_into(xt, yt);
        self.h.apply_into(xb, yb);
        let mut gx = cvec::zeros(n);
        self.g.apply_into(xt, &mut gx);
        for (yi, gi) in yb.iter_mut().zip(&gx) {
            *yi += gi;
        }
    }
}

struct ArnoldiDecomp {
    basis: Vec<Vec<Complex64>>,
    /// hess[j] holds column j, entries h[0..=j+1][j].
    hess: Vec<Vec<Complex64>>,
    steps: usize,
    beta: f64,
    /// Happy breakdown: the subspace is invariant and the result exact.
    exact: bool,
}

fn arnoldi<Op: LinearOp>(op: &Op, shift: f64, v: &[Complex64], max_dim: usize) -> ArnoldiDecomp {
    let n = op.dim();
    let m_max = max_dim.min(n);
    let beta = cvec::norm(v);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
    let mut first = v.to_vec();
    cvec::scale_in_place(&mut first, Complex64::new(1.0 / beta, 0.0));
    basis.push(first);

    let mut hess: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
    let mut scale = 1.0f64;
    let mut exact = false;
    let mut steps = 0;

    let mut w = cvec::zeros(n);
    for j in 0..m_max {
        op.apply_into(&basis[j], &mut w);
        if shift != 0.0 {
            cvec::axpy(&mut w, Complex64::new(-shift, 0.0), &basis[j]);
        }
        let mut col = Vec::with_capacity(j + 2);
        for b in basis.iter().take(j + 1) {
            let hij = cvec::dot(b, &w);
            cvec::axpy(&mut w, -hij, b);
            col.push(hij);
        }
        // one reorthogonalization pass keeps the basis orthonormal to
        // machine precision even for the non-normal augmented operator
        for (i, b) in basis.iter().take(j + 1).enumerate() {
            let corr = cvec::dot(b, &w);
            cvec::axpy(&mut w, -corr, b);
            col[i] += corr;
        }
        for hij in &col {
            scale = scale.max(hij.norm());
        }
        let hnext = cvec::norm(&w);
        steps = j + 1;
        if hnext <= 1e-14 * scale {
            col.push(Complex64::new(0.0, 0.0));
            hess.push(col);
            exact = true;
            break;
        }
        col.push(Complex64::new(hnext, 0.0));
        hess.push(col);
        let mut next = w.clone();
        cvec::scale_in_place(&mut next, Complex64::new(1.0 / hnext, 0.0));
        basis.push(next);
    }

    ArnoldiDecomp {
        basis,
        hess,
        steps,
        beta,
        exact,
    }
}

impl ArnoldiDecomp {
    /// beta * V_m exp(-i dt H_m) e_1 and the residual-based error estimate.
    fn apply_exp(&self, dt: f64) -> Result<(Vec<Complex64>, f64)> {
        let m = self.steps;
        let mut small = Array2::<Complex64>::zeros((m, m));
        let coeff = Complex64::new(0.0, -dt);
        for (j, col) in self.hess.iter().enumerate() {
            for (i, &hij) in col.iter().enumerate().take(m) {
                small[[i, j]] = coeff * hij;
            }
        }
        let y = expm_first_column(&small)?;
        let h_next = self.hess[m - 1].last().unwrap().norm();
        let err = if self.exact {
            0.0
        } else {
            self.beta * h_next * y[m - 1].norm()
        };
        let n = self.basis[0].len();
        let mut w = cvec::zeros(n);
        for (k, b) in self.basis.iter().take(m).enumerate() {
            cvec::axpy(&mut w, Complex64::new(self.beta, 0.0) * y[k], b);
        }
        Ok((w, err))
    }
}

fn propagate_krylov<Op: LinearOp>(
    op: &Op,
    shift: f64,
    v0: Vec<Complex64>,
    t_grid: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<Vec<Complex64>>> {
    let mut v = v0;
    let mut t_cur = 0.0f64;
    let mut hint = f64::INFINITY;
    let mut out = Vec::with_capacity(t_grid.len());

    for &t_target in t_grid {
        while t_cur < t_target {
            let norm_scale = cvec::norm(&v).max(1.0);
            let dec = arnoldi(op, shift, &v, opts.max_dim);
            let remaining = t_target - t_cur;
            let mut dt = remaining.min(hint);
            let mut halvings = 0u32;
            loop {
                let (w, err) = dec.apply_exp(dt)?;
                if err <= opts.step_tol * norm_scale {
                    let mut w = w;
                    if shift != 0.0 {
                        cvec::scale_in_place(&mut w, Complex64::from_polar(1.0, -shift * dt));
                    }
                    if w.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                        return Err(Error::Propagation {
                            t: t_cur,
                            reason: "non-finite amplitudes produced".into(),
                        });
                    }
                    v = w;
                    hint = if err <= 1e-3 * opts.step_tol * norm_scale {
                        2.0 * dt
                    } else {
                        dt
                    };
                    if dt >= remaining {
                        t_cur = t_target;
                    } else {
                        t_cur += dt;
                    }
                    break;
                }
                dt *= 0.5;
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(Error::Propagation {
                        t: t_cur,
                        reason: format!(
                            "residual {err:.3e} still above tolerance after {halvings} halvings"
                        ),
                    });
                }
            }
        }
        out.push(v.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{staggered_initial_state, BasisIndex};
    use crate::hamiltonian::{build_gradient_generator, build_hamiltonian, ModelParams};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(j: f64, u: f64, h: f64, sites: usize, particles: usize) -> ModelParams {
        ModelParams {
            j,
            u,
            h,
            sites,
            particles,
        }
    }

    fn fock_vector(p: &ModelParams) -> (BasisIndex, Vec<Complex64>) {
        let basis = p.basis().unwrap();
        let psi0 = staggered_initial_state(p.sites, p.particles).unwrap();
        let k = basis.rank(&psi0).unwrap();
        let v = cvec::unit(basis.dimension(), k);
        (basis, v)
    }

    fn krylov_opts() -> EvolveOptions {
        EvolveOptions {
            method: Method::Krylov,
            ..Default::default()
        }
    }

    fn dense_opts() -> EvolveOptions {
        EvolveOptions {
            method: Method::Dense,
            ..Default::default()
        }
    }

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = cvec::norm(&v);
        cvec::scale_in_place(&mut v, Complex64::new(1.0 / n, 0.0));
        v
    }

    #[test]
    fn zero_hamiltonian_is_identity_evolution() {
        let p = params(0.0, 0.0, 0.0, 3, 2);
        let (basis, v) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        for opts in [dense_opts(), krylov_opts()] {
            let states = evolve(&h, &v, &[0.0, 1.5, 17.0], &opts).unwrap();
            for s in states {
                for (a, b) in s.iter().zip(&v) {
                    assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_site_rabi_oscillation() {
        let p = params(1.0, 0.0, 0.0, 2, 1);
        let basis = p.basis().unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let psi0 = cvec::unit(2, 0);
        let ts: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        for opts in [dense_opts(), krylov_opts()] {
            let states = evolve(&h, &psi0, &ts, &opts).unwrap();
            for (s, &t) in states.iter().zip(&ts) {
                assert_abs_diff_eq!(s[1].norm_sqr(), t.sin().powi(2), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn krylov_matches_dense_at_long_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = params(
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.0..8.0),
            rng.gen_range(0.0..4.0),
            3,
            2,
        );
        let basis = p.basis().unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let psi0 = random_state(basis.dimension(), &mut rng);
        let grid = [50.0];
        let dense = evolve(&h, &psi0, &grid, &dense_opts()).unwrap();
        let krylov = evolve(&h, &psi0, &grid, &krylov_opts()).unwrap();
        let overlap = cvec::dot(&krylov[0], &dense[0]).norm();
        assert!(overlap >= 1.0 - 1e-10, "overlap {overlap}");
        let diff: f64 = dense[0]
            .iter()
            .zip(&krylov[0])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-9, "vector difference {diff:.3e}");
    }

    #[test]
    fn norm_and_energy_conserved_over_long_evolution() {
        let p = params(1.0, 5.0, 2.0, 7, 3);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let e0 = h.expectation(&psi0).unwrap().re;
        let grid: Vec<f64> = (1..=20).map(|k| 5.0 * k as f64).collect();
        for opts in [dense_opts(), krylov_opts()] {
            let states = evolve(&h, &psi0, &grid, &opts).unwrap();
            for s in &states {
                assert!((cvec::norm(s) - 1.0).abs() <= 1e-10);
                let e = h.expectation(s).unwrap().re;
                assert!((e - e0).abs() <= 1e-8 * e0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn time_composition() {
        let p = params(1.0, 3.0, 1.0, 5, 2);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        for opts in [dense_opts(), krylov_opts()] {
            let direct = evolve(&h, &psi0, &[13.0], &opts).unwrap().pop().unwrap();
            let first = evolve(&h, &psi0, &[5.0], &opts).unwrap().pop().unwrap();
            let second = evolve(&h, &first, &[8.0], &opts).unwrap().pop().unwrap();
            let diff: f64 = direct
                .iter()
                .zip(&second)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 1e-9, "composition difference {diff:.3e}");
        }
    }

    #[test]
    fn rejects_unnormalized_and_bad_grids() {
        let p = params(1.0, 0.0, 0.0, 2, 1);
        let h = build_hamiltonian(&p, &p.basis().unwrap()).unwrap();
        let bad = vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(
            evolve(&h, &bad, &[1.0], &dense_opts()),
            Err(Error::NotNormalized { .. })
        ));
        let good = cvec::unit(2, 0);
        assert!(evolve(&h, &good, &[1.0, 0.5], &dense_opts()).is_err());
        assert!(evolve(&h, &good, &[-1.0, 0.5], &dense_opts()).is_err());
    }

    #[test]
    fn diagonal_hamiltonian_derivative_is_pure_phase() {
        // J=0: eigenstate evolution, dpsi = -i t g psi
        let p = params(0.0, 2.0, 1.3, 4, 2);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let g = build_gradient_generator(&basis);
        let gval = {
            let state = staggered_initial_state(4, 2).unwrap();
            state
                .occupations()
                .iter()
                .enumerate()
                .map(|(l, &n)| l as f64 * n as f64)
                .sum::<f64>()
        };
        for opts in [dense_opts(), krylov_opts()] {
            let pairs = evolve_with_derivative(&h, &g, &psi0, &[7.0], &opts).unwrap();
            let pair = &pairs[0];
            let expect: Vec<Complex64> = pair
                .psi
                .iter()
                .map(|a| Complex64::new(0.0, -7.0 * gval) * a)
                .collect();
            for (a, b) in pair.dpsi.iter().zip(&expect) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn zero_generator_gives_zero_derivative() {
        let p = params(1.0, 2.0, 0.5, 4, 2);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let zero = SparseHermitian::diagonal_from(vec![0.0; basis.dimension()]);
        for opts in [dense_opts(), krylov_opts()] {
            let pairs = evolve_with_derivative(&h, &zero, &psi0, &[0.0, 5.0, 20.0], &opts).unwrap();
            for pair in pairs {
                assert!(cvec::norm(&pair.dpsi) <= 1e-10);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let base = params(1.0, 2.0, 1.0, 5, 2);
        let basis = base.basis().unwrap();
        let (_, psi0) = fock_vector(&base);
        let h = build_hamiltonian(&base, &basis).unwrap();
        let g = build_gradient_generator(&basis);
        let t = 20.0;
        let delta = 1e-5;

        let fd = |d: f64| -> Vec<Complex64> {
            let plus = build_hamiltonian(&params(1.0, 2.0, 1.0 + d, 5, 2), &basis).unwrap();
            let minus = build_hamiltonian(&params(1.0, 2.0, 1.0 - d, 5, 2), &basis).unwrap();
            let sp = evolve(&plus, &psi0, &[t], &dense_opts()).unwrap().pop().unwrap();
            let sm = evolve(&minus, &psi0, &[t], &dense_opts()).unwrap().pop().unwrap();
            sp.iter()
                .zip(&sm)
                .map(|(a, b)| (a - b) / Complex64::new(2.0 * d, 0.0))
                .collect()
        };
        let fd1 = fd(delta);
        let fd2 = fd(delta / 2.0);
        // Richardson sanity: the two estimates agree at O(delta^2)
        let fd_disagreement: f64 = fd1
            .iter()
            .zip(&fd2)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = cvec::norm(&fd2).max(1.0);
        assert!(fd_disagreement / scale < 1e-5);

        for opts in [dense_opts(), krylov_opts()] {
            let pairs = evolve_with_derivative(&h, &g, &psi0, &[t], &opts).unwrap();
            let err: f64 = pairs[0]
                .dpsi
                .iter()
                .zip(&fd2)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(
                err / scale <= 1e-6,
                "relative derivative error {:.3e}",
                err / scale
            );
        }
    }

    #[test]
    fn derivative_is_linear_in_generator() {
        let p = params(1.0, 1.5, 0.7, 4, 2);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let g = build_gradient_generator(&basis);
        let scaled_entries: Vec<f64> = (0..basis.dimension())
            .map(|i| {
                3.0 * g
                    .row(i)
                    .find(|&(c, _)| c == i)
                    .map(|(_, v)| v.re)
                    .unwrap_or(0.0)
            })
            .collect();
        let g3 = SparseHermitian::diagonal_from(scaled_entries);
        for opts in [dense_opts(), krylov_opts()] {
            let one = evolve_with_derivative(&h, &g, &psi0, &[11.0], &opts).unwrap();
            let three = evolve_with_derivative(&h, &g3, &psi0, &[11.0], &opts).unwrap();
            for (a, b) in three[0].dpsi.iter().zip(&one[0].dpsi) {
                assert_abs_diff_eq!((a - b * 3.0).norm(), 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn pair_invariants_hold() {
        let p = params(1.0, 4.0, 2.5, 7, 2);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let g = build_gradient_generator(&basis);
        let grid: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
        for opts in [dense_opts(), krylov_opts()] {
            let pairs = evolve_with_derivative(&h, &g, &psi0, &grid, &opts).unwrap();
            for pair in pairs {
                assert!(pair.norm_deviation() <= 1e-10);
                assert!(pair.norm_derivative().abs() <= 1e-8 * cvec::norm(&pair.dpsi).max(1.0));
            }
        }
    }

    #[test]
    fn dense_and_krylov_derivative_paths_agree() {
        let p = params(1.0, 6.0, 3.0, 6, 3);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let g = build_gradient_generator(&basis);
        let grid = [17.0, 50.0];
        let dense = evolve_with_derivative(&h, &g, &psi0, &grid, &dense_opts()).unwrap();
        let krylov = evolve_with_derivative(&h, &g, &psi0, &grid, &krylov_opts()).unwrap();
        for (a, b) in dense.iter().zip(&krylov) {
            let dpsi_scale = cvec::norm(&a.dpsi).max(1.0);
            let psi_diff: f64 = a
                .psi
                .iter()
                .zip(&b.psi)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let dpsi_diff: f64 = a
                .dpsi
                .iter()
                .zip(&b.dpsi)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(psi_diff <= 1e-9, "psi diff {psi_diff:.3e}");
            assert!(
                dpsi_diff / dpsi_scale <= 1e-9,
                "dpsi diff {:.3e}",
                dpsi_diff / dpsi_scale
            );
        }
    }

    #[test]
    fn dense_derivative_uniform_and_scattered_grids_agree() {
        let p = params(1.0, 2.0, 4.0, 5, 2);
        let (basis, psi0) = fock_vector(&p);
        let h = build_hamiltonian(&p, &basis).unwrap();
        let g = build_gradient_generator(&basis);
        let evolver = DenseEvolver::new(&h).unwrap();
        let uniform: Vec<f64> = (1..=8).map(|k| 2.5 * k as f64).collect();
        let pairs_uniform = evolver.evolve_with_derivative(&g, &psi0, &uniform).unwrap();
        // same final time reached through an irregular grid
        let scattered = vec![0.4, 1.1, 7.3, 20.0];
        let pairs_scattered = evolver
            .evolve_with_derivative(&g, &psi0, &scattered)
            .unwrap();
        let a = &pairs_uniform.last().unwrap().dpsi;
        let b = &pairs_scattered.last().unwrap().dpsi;
        let diff: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-9 * cvec::norm(a).max(1.0), "diff {diff:.3e}");
    }
}
