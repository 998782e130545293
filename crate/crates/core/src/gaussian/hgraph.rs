//! H-graph states `Z = i e^{-2αG}` and their bipartite closed forms.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::graph::{Color, ExactGraph, NodeId};
use super::linalg::{complexify, max_abs, symmetrize, CMatrix};
use super::symplectic::{apply_local_streaming, LocalOp};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real symmetric generator `G`, optionally split as `[[0, G₀ᵀ], [G₀, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HGraph<T: Real = f64> {
    g: DMatrix<T>,
    /// Size of the first set when the bipartite split is known.
    first: Option<usize>,
}

impl<T: Real> HGraph<T> {
    pub fn new(g: DMatrix<T>) -> Result<Self> {
        if g.nrows() != g.ncols() {
            return Err(Error::DimensionMismatch {
                expected: g.nrows(),
                found: g.ncols(),
            });
        }
        if g != g.transpose() {
            return Err(Error::Precondition("H-graph must be symmetric".into()));
        }
        Ok(Self { g, first: None })
    }

    /// Builds `[[0, G₀ᵀ], [G₀, 0]]` with `G₀` of shape `n₂ × n₁`.
    pub fn bipartite(g0: &DMatrix<T>) -> Self {
        let (n2, n1) = g0.shape();
        let mut g = DMatrix::zeros(n1 + n2, n1 + n2);
        g.view_mut((0, n1), (n1, n2)).copy_from(&g0.transpose());
        g.view_mut((n1, 0), (n2, n1)).copy_from(g0);
        Self { g, first: Some(n1) }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn first_size(&self) -> Option<usize> {
        self.first
    }

    /// Off-diagonal block `G₀` (rows: second set, columns: first set).
    pub fn g0(&self) -> Option<DMatrix<T>> {
        let n1 = self.first?;
        let n2 = self.n() - n1;
        Some(self.g.view((n1, 0), (n2, n1)).into_owned())
    }

    /// `‖G·G − I‖∞` (entrywise max).
    pub fn selfinverse_defect(&self) -> T {
        let n = self.n();
        max_abs(&(&self.g * &self.g - DMatrix::identity(n, n)))
    }

    pub fn is_self_inverse(&self) -> bool {
        self.selfinverse_defect() < T::tol(1e-12)
    }

    /// Node colors for a partitioned graph: first set white, second black.
    pub fn colors(&self) -> Vec<Color> {
        let n1 = self.first.unwrap_or(0);
        (0..self.n())
            .map(|i| if i < n1 { Color::White } else { Color::Black })
            .collect()
    }
}

fn labelled<T: Real>(z: CMatrix<T>, h: &HGraph<T>) -> ExactGraph<T> {
    let n = h.n();
    ExactGraph::from_parts_unchecked(z, (0..n).map(NodeId::seq).collect(), h.colors())
}

/// `Z = i·expm(−2αG)` through the symmetric eigendecomposition of `G`.
pub fn hgraph_state<T: Real>(h: &HGraph<T>, alpha: T) -> Result<ExactGraph<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::Precondition("alpha must be positive".into()));
    }
    if h.n() == 0 {
        return Err(Error::EmptyState);
    }
    let eig = h.g.clone().symmetric_eigen();
    let scale = T::lit(-2.0) * alpha;
    let w = eig.eigenvalues.map(|l| (scale * l).exp());
    let u = &eig.eigenvectors * DMatrix::from_diagonal(&w) * eig.eigenvectors.transpose();
    let u = symmetrize(&u);
    let z = u.map(|x| Complex::new(T::zero(), x));
    Ok(labelled(z, h))
}

/// Closed form `i cosh2α·I − i sinh2α·G` for bipartite self-inverse `G`.
pub fn selfinverse_hgraph_state<T: Real>(h: &HGraph<T>, alpha: T) -> Result<ExactGraph<T>> {
    if h.first.is_none() {
        return Err(Error::Precondition("H-graph has no bipartition".into()));
    }
    let defect = h.selfinverse_defect();
    if !(defect < T::tol(1e-12)) {
        return Err(Error::Precondition(format!(
            "G is not self-inverse (defect {:e}); use hgraph_state",
            defect.as_f64()
        )));
    }
    bipartite_form_state(h, alpha)
}

/// `i cosh2α·I − i sinh2α·G` for any bipartite `G`, the form used for imperfect (boundary)
/// generators. Validated, since a large `G` can break positivity.
pub fn bipartite_form_state<T: Real>(h: &HGraph<T>, alpha: T) -> Result<ExactGraph<T>> {
    let n1 = h
        .first
        .ok_or_else(|| Error::Precondition("H-graph has no bipartition".into()))?;
    if h.n() == 0 {
        return Err(Error::EmptyState);
    }
    let g0 = h.g0().expect("partitioned");
    let n = h.n();
    let two_a = alpha + alpha;
    let (ch, sh) = (two_a.cosh(), two_a.sinh());
    let mut z = CMatrix::<T>::from_diagonal_element(n, n, Complex::new(T::zero(), ch));
    let off = g0.map(|x| Complex::new(T::zero(), -sh * x));
    z.view_mut((n1, 0), (n - n1, n1)).copy_from(&off);
    z.view_mut((0, n1), (n1, n - n1))
        .copy_from(&off.transpose());
    let labels = (0..n).map(NodeId::seq).collect();
    ExactGraph::with_metadata(z, labels, h.colors())
}

/// Applies the Fourier transform (rotation by −π/2) on each of the first `n1` modes through
/// the symplectic law.
pub fn fourier_first_partition<T: Real>(g: &ExactGraph<T>, n1: usize) -> Result<ExactGraph<T>> {
    if n1 > g.n() {
        return Err(Error::IndexOutOfRange {
            index: n1,
            len: g.n(),
        });
    }
    rotate_all(g, 0..n1)
}

/// Fourier transform on every white node.
pub fn fourier_white<T: Real>(g: &ExactGraph<T>) -> Result<ExactGraph<T>> {
    rotate_all(g, (0..g.n()).filter(|&i| g.colors()[i] == Color::White))
}

fn rotate_all<T: Real>(
    g: &ExactGraph<T>,
    modes: impl Iterator<Item = usize>,
) -> Result<ExactGraph<T>> {
    let quarter = -T::frac_pi_2();
    let out = modes.into_iter().try_fold(g.clone(), |acc, k| {
        apply_local_streaming(&acc, &LocalOp::rotation(k, quarter))
    })?;
    // Positivity is checked once for the whole sequence.
    ExactGraph::with_metadata(
        out.z().clone(),
        out.labels().to_vec(),
        out.colors().to_vec(),
    )
}

/// Closed form after the first-set Fourier transform, valid for any bipartite `G`:
/// `[[i sech2α I, tanh2α G₀ᵀ], [tanh2α G₀, i sech2α (cosh²2α I − sinh²2α G₀G₀ᵀ)]]`.
/// For self-inverse `G` the lower-right block is `i sech2α I`.
pub fn cluster_closed_form<T: Real>(g0: &DMatrix<T>, alpha: T) -> CMatrix<T> {
    let (n2, n1) = g0.shape();
    let n = n1 + n2;
    let two_a = alpha + alpha;
    let (ch, sh, th) = (two_a.cosh(), two_a.sinh(), two_a.tanh());
    let sech = T::one() / ch;
    let mut z = CMatrix::<T>::zeros(n, n);
    for i in 0..n1 {
        z[(i, i)] = Complex::new(T::zero(), sech);
    }
    let off = complexify(&(g0 * th));
    z.view_mut((n1, 0), (n2, n1)).copy_from(&off);
    z.view_mut((0, n1), (n1, n2)).copy_from(&off.transpose());
    let gg = g0 * g0.transpose();
    let lower = (DMatrix::identity(n2, n2) * (ch * ch) - gg * (sh * sh)) * sech;
    z.view_mut((n1, n1), (n2, n2))
        .copy_from(&lower.map(|x| Complex::new(T::zero(), x)));
    z
}
