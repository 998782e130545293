//! Small dense helpers shared by the exact engine.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex;

use crate::scalar::{modulus, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Maximum absolute row sum.
pub fn norm_inf_c<T: Real>(m: &CMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |acc, z| acc + modulus(*z)))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Largest entry magnitude.
pub fn max_abs_c<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .map(|z| modulus(*z))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter()
        .map(|x| x.abs())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

pub fn norm_inf<T: Real>(m: &DMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |acc, x| acc + x.abs()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

pub fn asymmetry_c<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_c(&(m - m.transpose()))
}

pub fn symmetrize_c<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = Complex::new(T::lit(0.5), T::zero());
    (m + m.transpose()).map(|z| z * half)
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

pub fn real_part<T: Real>(m: &CMatrix<T>) -> DMatrix<T> {
    m.map(|z| z.re)
}

pub fn imag_part<T: Real>(m: &CMatrix<T>) -> DMatrix<T> {
    m.map(|z| z.im)
}

pub fn from_parts<T: Real>(re: &DMatrix<T>, im: &DMatrix<T>) -> CMatrix<T> {
    re.zip_map(im, |a, b| Complex::new(a, b))
}

pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Inverse together with the infinity-norm condition estimate. `None` when LU fails.
pub fn inverse_with_condition<T: Real>(m: &CMatrix<T>) -> Option<(CMatrix<T>, T)> {
    let inv = m.clone().lu().try_inverse()?;
    let cond = norm_inf_c(m) * norm_inf_c(&inv);
    Some((inv, cond))
}

pub fn cholesky<T: Real>(m: &DMatrix<T>) -> Option<Cholesky<T, Dyn>> {
    Cholesky::new(m.clone())
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .copied()
        .fold(eig.eigenvalues[0], |a, b| if b < a { b } else { a })
}

/// Copy of `m` with the listed rows and columns removed.
pub fn remove_index<N: nalgebra::Scalar + Copy>(m: &DMatrix<N>, drop: usize) -> DMatrix<N> {
    let keep: Vec<usize> = (0..m.nrows()).filter(|&i| i != drop).collect();
    select(m, &keep)
}

/// Principal submatrix on `keep` (in that order).
pub fn select<N: nalgebra::Scalar + Copy>(m: &DMatrix<N>, keep: &[usize]) -> DMatrix<N> {
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}
