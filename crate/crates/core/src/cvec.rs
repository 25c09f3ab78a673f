//! Small helpers for complex state vectors. Sums run in index order so
//! results are bit-reproducible.

use num_complex::Complex64;

/// <a|b> with the conjugate on the left argument.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    norm_sq(v).sqrt()
}

pub fn scale_in_place(v: &mut [Complex64], c: Complex64) {
    for x in v {
        *x *= c;
    }
}

/// y += c * x
pub fn axpy(y: &mut [Complex64], c: Complex64, x: &[Complex64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * *xi;
    }
}

pub fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

/// Fock basis vector with a single unit amplitude.
pub fn unit(n: usize, k: usize) -> Vec<Complex64> {
    let mut v = zeros(n);
    v[k] = Complex64::new(1.0, 0.0);
    v
}
