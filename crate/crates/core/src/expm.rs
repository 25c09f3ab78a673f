//! Dense matrix exponential for the small projected matrices produced by the
//! Krylov stepper (scaling-and-squaring with a degree-13 Pade approximant).

use crate::error::{Error, Result};
use ndarray::Array2;
use ndarray_linalg::Solve;
use num_complex::Complex64;

const PADE13_THETA: f64 = 5.371_920_351_148_152;

const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &Array2<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|v| v.norm()).sum();
        worst = worst.max(s);
    }
    worst
}

/// exp(A) for a square complex matrix.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let eye = Array2::<Complex64>::eye(n);

    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(eye);
    }
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new((0.5f64).powi(squarings as i32), 0.0);
    let a = a.mapv(|v| v * scale);

    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = a6.mapv(|v| v * B[13]) + a4.mapv(|v| v * B[11]) + a2.mapv(|v| v * B[9]);
    let u_poly =
        a6.dot(&u_inner) + a6.mapv(|v| v * B[7]) + a4.mapv(|v| v * B[5]) + a2.mapv(|v| v * B[3]);
    let u = a.dot(&(u_poly + eye.mapv(|v| v * B[1])));

    let v_inner = a6.mapv(|v| v * B[12]) + a4.mapv(|v| v * B[10]) + a2.mapv(|v| v * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|v| v * B[6])
        + a4.mapv(|v| v * B[4])
        + a2.mapv(|v| v * B[2])
        + eye.mapv(|v| v * B[0]);

    // (V - U) X = (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut result = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let col = lhs
            .solve(&rhs.column(j).to_owned())
            .map_err(|e| Error::Backend(format!("Pade solve failed: {e}")))?;
        result.column_mut(j).assign(&col);
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}

/// exp(A) e_1, the only column the Krylov stepper consumes.
pub fn expm_first_column(a: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    Ok(expm(a)?.column(0).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_of_zero_is_identity() {
        let z = Array2::<Complex64>::zeros((4, 4));
        let e = expm(&z).unwrap();
        for ((i, j), v) in e.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, want, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn diagonal_case() {
        let a = array![
            [Complex64::new(0.0, -2.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.5, 0.5)],
        ];
        let e = expm(&a).unwrap();
        let e00 = Complex64::new(0.0, -2.0).exp();
        let e11 = Complex64::new(1.5, 0.5).exp();
        assert_abs_diff_eq!(e[[0, 0]].re, e00.re, epsilon = 1e-14);
        assert_abs_diff_eq!(e[[0, 0]].im, e00.im, epsilon = 1e-14);
        assert_abs_diff_eq!(e[[1, 1]].re, e11.re, epsilon = 1e-13);
        assert_abs_diff_eq!(e[[1, 1]].im, e11.im, epsilon = 1e-13);
    }

    #[test]
    fn nilpotent_case() {
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[[0, 1]].re, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[[1, 0]].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn skew_hermitian_gives_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 17;
        let mut h = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let v = if i == j {
                    Complex64::new(v.re, 0.0)
                } else {
                    v
                };
                h[[i, j]] = v;
                h[[j, i]] = v.conj();
            }
        }
        // A = -i H t
        let a = h.mapv(|v| v * Complex64::new(0.0, -0.8));
        let e = expm(&a).unwrap();
        let id = e.t().mapv(|v| v.conj()).dot(&e);
        for ((i, j), v) in id.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, want, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn large_norm_hits_squaring_path() {
        // A = -i t H for Hermitian H, with t large enough to force squaring
        let h = array![[50.0, 1.0], [1.0, -50.0]];
        let t = 0.9;
        let a = h.mapv(|v| Complex64::new(0.0, -t) * v);
        let e = expm(&a).unwrap();
        // exact 2x2: eigenvalues +-w, w = sqrt(50^2 + 1)
        let w = (50.0f64 * 50.0 + 1.0).sqrt();
        let (s, c) = (t * w).sin_cos();
        // exp(-i t H) = cos(tw) I - i sin(tw)/w * H
        let expect = |i: usize, j: usize| {
            let id = if i == j { c } else { 0.0 };
            Complex64::new(id, -s / w * h[[i, j]])
        };
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(e[[i, j]].re, expect(i, j).re, epsilon = 1e-12);
                assert_abs_diff_eq!(e[[i, j]].im, expect(i, j).im, epsilon = 1e-12);
            }
        }
        let id = e.t().mapv(|v| v.conj()).dot(&e);
        assert_abs_diff_eq!(id[[0, 0]].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id[[0, 1]].norm(), 0.0, epsilon = 1e-12);
    }
}
