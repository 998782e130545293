//! Covariance-matrix description, kept as an independent oracle for the graph calculus.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::graph::ExactGraph;
use super::linalg::{from_parts, remove_index, symmetrize, CMatrix};
use super::symplectic::{omega, SymplecticOp};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Zero-mean Gaussian state by its `2n × 2n` covariance in `(q₁..qₙ, p₁..pₙ)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceState<T: Real = f64> {
    sigma: DMatrix<T>,
}

impl<T: Real> CovarianceState<T> {
    pub fn new(sigma: DMatrix<T>) -> Result<Self> {
        let dim = sigma.nrows();
        if dim == 0 || dim % 2 != 0 || sigma.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                found: sigma.ncols(),
            });
        }
        Ok(Self {
            sigma: symmetrize(&sigma),
        })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyState);
        }
        Ok(Self {
            sigma: DMatrix::identity(2 * n, 2 * n) * T::lit(0.5),
        })
    }

    pub fn n(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    /// `det(2σ)`, equal to one for pure states.
    pub fn purity_determinant(&self) -> T {
        (&self.sigma * T::lit(2.0)).determinant()
    }

    fn block(&self, row: usize, col: usize) -> DMatrix<T> {
        let n = self.n();
        self.sigma.view((row * n, col * n), (n, n)).into_owned()
    }
}

/// `σ = S (I/2) Sᵀ` for the ordered product of `ops` applied to the vacuum.
pub fn covariance_from_history<T: Real>(
    n: usize,
    ops: &[SymplecticOp<T>],
) -> Result<CovarianceState<T>> {
    let mut state = CovarianceState::vacuum(n)?;
    for op in ops {
        if op.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: op.n(),
            });
        }
        let s = op.matrix();
        state.sigma = symmetrize(&(s * &state.sigma * s.transpose()));
    }
    Ok(state)
}

/// Conditions on a `q` measurement of `node`: Schur complement over that single quadrature,
/// then both quadratures of the node are dropped.
pub fn condition_on_q<T: Real>(
    state: &CovarianceState<T>,
    node: usize,
) -> Result<CovarianceState<T>> {
    let n = state.n();
    if node >= n {
        return Err(Error::IndexOutOfRange {
            index: node,
            len: n,
        });
    }
    if n < 2 {
        return Err(Error::EmptyState);
    }
    let s = &state.sigma;
    let var = s[(node, node)];
    if !(var.abs() > T::tol(1e-14)) {
        return Err(Error::DegenerateMeasurement);
    }
    let col = s.column(node).into_owned();
    let schur = s - &col * col.transpose() / var;
    // Drop p_node first so the q index stays valid.
    let reduced = remove_index(&remove_index(&schur, n + node), node);
    Ok(CovarianceState {
        sigma: symmetrize(&reduced),
    })
}

/// Recovers `Z = σ_pq σ_qq⁻¹ + (i/2) σ_qq⁻¹` from a pure-state covariance.
pub fn graph_from_covariance<T: Real>(state: &CovarianceState<T>) -> Result<ExactGraph<T>> {
    let det = state.purity_determinant();
    if !((det - T::one()).abs() < T::tol(1e-9) * det.abs().max(T::one())) {
        return Err(Error::NotPure { det: det.as_f64() });
    }
    let sqq = state.block(0, 0);
    let spq = state.block(1, 0);
    let inv = sqq.clone().try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let v = symmetrize(&(&spq * &inv));
    let u = symmetrize(&(inv * T::lit(0.5)));
    ExactGraph::new(from_parts(&v, &u))
}

/// `Σⱼ ⟨n̂ⱼ† n̂ⱼ⟩` for the nullifiers `n̂ = p̂ − Z q̂`, from second moments
/// `⟨x xᵀ⟩ = σ + iΩ/2`. Zero exactly when `Z` is the graph of `σ`.
pub fn nullifier_residual<T: Real>(g: &ExactGraph<T>, state: &CovarianceState<T>) -> Result<T> {
    let n = g.n();
    if state.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.n(),
        });
    }
    let half = T::lit(0.5);
    let moments = from_parts(&state.sigma, &(omega::<T>(n) * half));
    let mut l = CMatrix::<T>::zeros(n, 2 * n);
    l.view_mut((0, 0), (n, n)).copy_from(&(-g.z()));
    l.view_mut((0, n), (n, n)).fill_with_identity();
    let conj = l.map(|c| c.conj());
    let m = conj * moments * l.transpose();
    let trace: Complex<T> = m.trace();
    Ok(trace.re.max(T::zero()))
}
