//! Symplectic operators on quadratures `x = (q₁…q_N, p₁…p_N)` and their action on graphs,
//! `Z ↦ (C + DZ)(A + BZ)⁻¹`.

use nalgebra::DMatrix;

use super::graph::{measure_q, ExactGraph};
use super::linalg::{
    asymmetry_c, cholesky, complexify, imag_part, inverse_with_condition, max_abs, symmetrize_c,
    CMatrix,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Condition-number guard for `A + BZ`.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Dense `2n × 2n` symplectic matrix in `(q, p)` block form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticOp<T: Real = f64> {
    n: usize,
    matrix: DMatrix<T>,
}

/// `Ω = [[0, I], [-I, 0]]`.
pub fn omega<T: Real>(n: usize) -> DMatrix<T> {
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = T::one();
        w[(n + i, i)] = -T::one();
    }
    w
}

impl<T: Real> SymplecticOp<T> {
    /// Wraps a raw matrix without checking the symplectic condition.
    pub fn from_matrix(matrix: DMatrix<T>) -> Result<Self> {
        let rows = matrix.nrows();
        if rows % 2 != 0 || matrix.ncols() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows + rows % 2,
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            n: rows / 2,
            matrix,
        })
    }

    pub fn from_blocks(
        a: &DMatrix<T>,
        b: &DMatrix<T>,
        c: &DMatrix<T>,
        d: &DMatrix<T>,
    ) -> Result<Self> {
        let n = a.nrows();
        for blk in [a, b, c, d] {
            if blk.nrows() != n || blk.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: blk.nrows().max(blk.ncols()),
                });
            }
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, n)).copy_from(b);
        m.view_mut((n, 0), (n, n)).copy_from(c);
        m.view_mut((n, n), (n, n)).copy_from(d);
        Ok(Self { n, matrix: m })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    fn block(&self, r: usize, c: usize) -> DMatrix<T> {
        self.matrix
            .view((r * self.n, c * self.n), (self.n, self.n))
            .into_owned()
    }

    pub fn a(&self) -> DMatrix<T> {
        self.block(0, 0)
    }

    pub fn b(&self) -> DMatrix<T> {
        self.block(0, 1)
    }

    pub fn c(&self) -> DMatrix<T> {
        self.block(1, 0)
    }

    pub fn d(&self) -> DMatrix<T> {
        self.block(1, 1)
    }

    /// `self` followed by `next`, i.e. the matrix product `next · self`.
    pub fn then(&self, next: &SymplecticOp<T>) -> Result<SymplecticOp<T>> {
        if next.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: next.n,
            });
        }
        Ok(Self {
            n: self.n,
            matrix: &next.matrix * &self.matrix,
        })
    }

    pub fn transpose(&self) -> SymplecticOp<T> {
        Self {
            n: self.n,
            matrix: self.matrix.transpose(),
        }
    }

    /// Two-mode 50:50 beamsplitter; `(first, second)` is the arrow direction.
    pub fn beamsplitter(n: usize, first: usize, second: usize) -> Result<Self> {
        Ok(LocalOp::beamsplitter(first, second)?.embed(n)?)
    }

    /// Phase rotation by `theta` on one mode. `theta = -π/2` is the Fourier transform
    /// (`q ↦ -p`), `theta = π` the phase-plane inversion.
    pub fn rotation(n: usize, mode: usize, theta: T) -> Result<Self> {
        LocalOp::rotation(mode, theta).embed(n)
    }

    /// Single-mode squeezer `diag(e^{-r}, e^{r})`; on vacuum it yields `z = i e^{2r}`.
    pub fn squeezer(n: usize, mode: usize, r: T) -> Result<Self> {
        LocalOp::squeezer(mode, r).embed(n)
    }
}

/// Symplectic defect `‖SᵀΩS − Ω‖∞` (entrywise max).
pub fn symplectic_defect<T: Real>(s: &SymplecticOp<T>) -> T {
    let w = omega::<T>(s.n);
    max_abs(&(s.matrix.transpose() * &w * &s.matrix - w))
}

/// `(is_symplectic, defect)` at the 1e-12 entrywise tolerance.
pub fn symplectic_check<T: Real>(s: &SymplecticOp<T>) -> (bool, T) {
    let defect = symplectic_defect(s);
    (defect < T::tol(1e-12), defect)
}

/// Symplectic action on a few modes, stored as a `2k × 2k` matrix over `(q_modes, p_modes)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOp<T: Real = f64> {
    modes: Vec<usize>,
    matrix: DMatrix<T>,
}

impl<T: Real> LocalOp<T> {
    pub fn new(modes: Vec<usize>, matrix: DMatrix<T>) -> Result<Self> {
        let k = modes.len();
        if matrix.nrows() != 2 * k || matrix.ncols() != 2 * k {
            return Err(Error::DimensionMismatch {
                expected: 2 * k,
                found: matrix.nrows(),
            });
        }
        let mut sorted = modes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::InvalidWiring(
                "repeated mode in local operator".into(),
            ));
        }
        Ok(Self { modes, matrix })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn beamsplitter(first: usize, second: usize) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidWiring(format!(
                "beamsplitter on a single mode {first}"
            )));
        }
        let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            h, -h, T::zero(), T::zero(),
            h,  h, T::zero(), T::zero(),
            T::zero(), T::zero(), h, -h,
            T::zero(), T::zero(), h,  h,
        ]);
        Ok(Self {
            modes: vec![first, second],
            matrix: m,
        })
    }

    pub fn rotation(mode: usize, theta: T) -> Self {
        let (s, c) = (theta.sin(), theta.cos());
        Self {
            modes: vec![mode],
            matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
        }
    }

    pub fn squeezer(mode: usize, r: T) -> Self {
        Self {
            modes: vec![mode],
            matrix: DMatrix::from_row_slice(2, 2, &[(-r).exp(), T::zero(), T::zero(), r.exp()]),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            modes: self.modes.clone(),
            matrix: self.matrix.transpose(),
        }
    }

    /// Embeds into an `n`-mode identity.
    pub fn embed(&self, n: usize) -> Result<SymplecticOp<T>> {
        let k = self.modes.len();
        if let Some(&bad) = self.modes.iter().find(|&&m| m >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let mut full = DMatrix::identity(2 * n, 2 * n);
        for (bi, &mi) in self.modes.iter().enumerate() {
            for (bj, &mj) in self.modes.iter().enumerate() {
                full[(mi, mj)] = self.matrix[(bi, bj)];
                full[(mi, n + mj)] = self.matrix[(bi, k + bj)];
                full[(n + mi, mj)] = self.matrix[(k + bi, bj)];
                full[(n + mi, n + mj)] = self.matrix[(k + bi, k + bj)];
            }
        }
        Ok(SymplecticOp { n, matrix: full })
    }

    pub fn defect(&self) -> T {
        let k = self.modes.len();
        let w = omega::<T>(k);
        max_abs(&(self.matrix.transpose() * &w * &self.matrix - w))
    }
}

fn finish<T: Real>(g: &ExactGraph<T>, z: CMatrix<T>) -> Result<ExactGraph<T>> {
    finish_with(g, z, true)
}

fn finish_with<T: Real>(
    g: &ExactGraph<T>,
    z: CMatrix<T>,
    check_positive: bool,
) -> Result<ExactGraph<T>> {
    let defect = asymmetry_c(&z);
    if !(defect < T::tol(1e-10)) {
        return Err(Error::Asymmetric {
            defect: defect.as_f64(),
        });
    }
    let z = symmetrize_c(&z);
    if check_positive && cholesky(&imag_part(&z)).is_none() {
        return Err(Error::NotPhysical(
            "Im(z') lost positive definiteness".into(),
        ));
    }
    Ok(ExactGraph::from_parts_unchecked(
        z,
        g.labels().to_vec(),
        g.colors().to_vec(),
    ))
}

fn guarded_inverse<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (inv, cond) = inverse_with_condition(m).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    if !(cond < T::lit(CONDITION_LIMIT) / T::lit(T::PRECISION_SCALE)) {
        return Err(Error::IllConditioned {
            condition: cond.as_f64(),
        });
    }
    Ok(inv)
}

/// `Z' = (C + DZ)(A + BZ)⁻¹`, re-symmetrized.
pub fn apply_symplectic<T: Real>(g: &ExactGraph<T>, s: &SymplecticOp<T>) -> Result<ExactGraph<T>> {
    if s.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: s.n(),
        });
    }
    let (ok, defect) = symplectic_check(s);
    if !ok {
        return Err(Error::InvalidOperator {
            defect: defect.as_f64(),
        });
    }
    let z = g.z();
    let denom = complexify(&s.a()) + complexify(&s.b()) * z;
    let numer = complexify(&s.c()) + complexify(&s.d()) * z;
    let inv = guarded_inverse(&denom)?;
    finish(g, numer * inv)
}

/// Same law as [`apply_symplectic`], evaluated blockwise so only the `k` touched modes
/// need an inverse. With `K` the touched modes and `R` the rest,
/// `M = a + b Z_KK`, and
/// `Z'_KK = (c + d Z_KK) M⁻¹`, `Z'_RK = Z_RK M⁻¹`,
/// `Z'_RR = Z_RR − Z_RK M⁻¹ b Z_KR`.
pub fn apply_local<T: Real>(g: &ExactGraph<T>, op: &LocalOp<T>) -> Result<ExactGraph<T>> {
    apply_local_with(g, op, true)
}

/// [`apply_local`] without the global positivity check, for long event streams that
/// validate at snapshots instead.
pub(crate) fn apply_local_streaming<T: Real>(
    g: &ExactGraph<T>,
    op: &LocalOp<T>,
) -> Result<ExactGraph<T>> {
    apply_local_with(g, op, false)
}

fn apply_local_with<T: Real>(
    g: &ExactGraph<T>,
    op: &LocalOp<T>,
    check_positive: bool,
) -> Result<ExactGraph<T>> {
    let n = g.n();
    let k = op.modes.len();
    if let Some(&bad) = op.modes.iter().find(|&&m| m >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let defect = op.defect();
    if !(defect < T::tol(1e-12)) {
        return Err(Error::InvalidOperator {
            defect: defect.as_f64(),
        });
    }
    let z = g.z();
    let blk = |r: usize, c: usize| complexify(&op.matrix.view((r * k, c * k), (k, k)).into_owned());
    let (a, b, c, d) = (blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1));
    let kk = &op.modes;
    let z_kk = CMatrix::from_fn(k, k, |i, j| z[(kk[i], kk[j])]);
    let z_nk = CMatrix::from_fn(n, k, |i, j| z[(i, kk[j])]);

    let m_inv = guarded_inverse(&(&a + &b * &z_kk))?;
    let new_kk = (&c + &d * &z_kk) * &m_inv;
    // Z_NK M⁻¹ for every row, then patched on the K rows
    let zm = &z_nk * &m_inv;
    let passive = b.iter().all(|x| x.re == T::zero());
    let mut out = if passive {
        z.clone()
    } else {
        z - &zm * (&b * z_nk.transpose())
    };
    for (j, &mj) in kk.iter().enumerate() {
        for i in 0..n {
            out[(i, mj)] = zm[(i, j)];
            out[(mj, i)] = zm[(i, j)];
        }
    }
    for (i, &mi) in kk.iter().enumerate() {
        for (j, &mj) in kk.iter().enumerate() {
            out[(mi, mj)] = new_kk[(i, j)];
        }
    }
    // K rows against R columns: Z'_KR = Z'_RKᵀ by symmetry; K×K block set above.
    finish_with(g, out, check_positive)
}

/// Rotates `node` by `pre_rotation`, then measures `q` on it.
pub fn measure_q_rotated<T: Real>(
    g: &ExactGraph<T>,
    node: usize,
    pre_rotation: T,
) -> Result<ExactGraph<T>> {
    if node >= g.n() {
        return Err(Error::IndexOutOfRange {
            index: node,
            len: g.n(),
        });
    }
    if g.n() < 2 {
        return Err(Error::EmptyState);
    }
    if pre_rotation == T::zero() {
        return measure_q(g, node);
    }
    let rotated = apply_local(g, &LocalOp::rotation(node, pre_rotation))?;
    measure_q(&rotated, node)
}
