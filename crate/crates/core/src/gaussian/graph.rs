use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::linalg::{
    asymmetry_c, cholesky, imag_part, min_eigenvalue, real_part, remove_index, select,
    symmetrize_c, CMatrix,
};
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// Mode identity: emission tick and source rail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct NodeId {
    pub tick: u32,
    pub rail: u16,
}

impl NodeId {
    pub const fn new(tick: u32, rail: u16) -> Self {
        Self { tick, rail }
    }

    /// Plain sequential ids for states that do not come from a circuit.
    pub const fn seq(i: usize) -> Self {
        Self {
            tick: i as u32,
            rail: 0,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tick, self.rail)
    }
}

impl FromStr for NodeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (t, r) = s
            .split_once(':')
            .ok_or_else(|| format!("node id `{s}` is not of the form tick:rail"))?;
        let tick = t.parse().map_err(|e| format!("node id `{s}`: {e}"))?;
        let rail = r.parse().map_err(|e| format!("node id `{s}`: {e}"))?;
        Ok(Self { tick, rail })
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> Self {
        id.to_string()
    }
}

impl TryFrom<String> for NodeId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Bipartition tag. White nodes are the ones that receive the Fourier transform.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    #[default]
    Black,
    White,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Asymmetric { defect: f64 },
    NotPositive { min_eigenvalue: f64 },
    NonFinite,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Asymmetric { defect } => write!(f, "z is not symmetric (defect {defect:e})"),
            Violation::NotPositive { min_eigenvalue } => {
                write!(
                    f,
                    "Im(z) is not positive definite (min eigenvalue {min_eigenvalue:e})"
                )
            }
            Violation::NonFinite => write!(f, "z has non-finite entries"),
        }
    }
}

/// Diagnostic summary of a candidate adjacency matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub symmetry_defect: f64,
    pub min_imag_eigenvalue: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `z = zᵀ` and `Im z > 0` on a raw matrix.
pub fn validate_matrix<T: Real>(z: &CMatrix<T>) -> ValidationReport {
    if z.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return ValidationReport {
            symmetry_defect: f64::NAN,
            min_imag_eigenvalue: f64::NAN,
            violations: vec![Violation::NonFinite],
        };
    }
    let symmetry_defect = asymmetry_c(z).as_f64();
    // eigenvalues of the symmetric part; the asymmetric part is reported separately
    let u = imag_part(&symmetrize_c(z));
    let min_imag_eigenvalue = min_eigenvalue(&u).as_f64();
    let mut violations = Vec::new();
    if symmetry_defect > T::tol(1e-12).as_f64() {
        violations.push(Violation::Asymmetric {
            defect: symmetry_defect,
        });
    }
    if !(min_imag_eigenvalue > 0.0) {
        violations.push(Violation::NotPositive {
            min_eigenvalue: min_imag_eigenvalue,
        });
    }
    ValidationReport {
        symmetry_defect,
        min_imag_eigenvalue,
        violations,
    }
}

/// Gaussian pure state as its complex graph `Z = iU + V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactGraph<T: Real = f64> {
    z: CMatrix<T>,
    labels: Vec<NodeId>,
    colors: Vec<Color>,
}

impl<T: Real> ExactGraph<T> {
    /// Validates and symmetrizes `z`. Labels default to sequential ids, colors to black.
    pub fn new(z: CMatrix<T>) -> Result<Self> {
        let n = z.nrows();
        Self::with_metadata(z, (0..n).map(NodeId::seq).collect(), vec![Color::Black; n])
    }

    pub fn with_metadata(z: CMatrix<T>, labels: Vec<NodeId>, colors: Vec<Color>) -> Result<Self> {
        let n = z.nrows();
        if n == 0 {
            return Err(Error::EmptyState);
        }
        if z.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z.ncols(),
            });
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        if colors.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: colors.len(),
            });
        }
        let report = validate_matrix(&z);
        if !report.is_valid() {
            let msg = report
                .violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>();
            return Err(Error::NotPhysical(msg.join("; ")));
        }
        Ok(Self {
            z: symmetrize_c(&z),
            labels,
            colors,
        })
    }

    /// Internal constructor for results already known to be symmetric and physical.
    pub(crate) fn from_parts_unchecked(
        z: CMatrix<T>,
        labels: Vec<NodeId>,
        colors: Vec<Color>,
    ) -> Self {
        debug_assert_eq!(z.nrows(), labels.len());
        Self { z, labels, colors }
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn z(&self) -> &CMatrix<T> {
        &self.z
    }

    pub fn u(&self) -> DMatrix<T> {
        imag_part(&self.z)
    }

    pub fn v(&self) -> DMatrix<T> {
        real_part(&self.z)
    }

    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.z[(i, j)]
    }

    pub fn index_of(&self, id: NodeId) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == id)
            .ok_or(Error::UnknownNode(id))
    }

    pub fn set_labels(&mut self, labels: Vec<NodeId>) -> Result<()> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(())
    }

    pub fn set_colors(&mut self, colors: Vec<Color>) -> Result<()> {
        if colors.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: colors.len(),
            });
        }
        self.colors = colors;
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_matrix(&self.z)
    }

    /// Tensor product with another state (block-diagonal graph).
    pub fn direct_sum(&self, other: &ExactGraph<T>) -> ExactGraph<T> {
        let (n, m) = (self.n(), other.n());
        let mut z = CMatrix::<T>::zeros(n + m, n + m);
        z.view_mut((0, 0), (n, n)).copy_from(&self.z);
        z.view_mut((n, n), (m, m)).copy_from(&other.z);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut colors = self.colors.clone();
        colors.extend_from_slice(&other.colors);
        Self { z, labels, colors }
    }

    /// Reorders the modes; `order[k]` is the old index placed at position `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<ExactGraph<T>> {
        let mut seen = vec![false; self.n()];
        for &i in order {
            if i >= self.n() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Precondition("order is not a permutation".into()));
            }
        }
        if order.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: order.len(),
            });
        }
        Ok(Self {
            z: select(&self.z, order),
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            colors: order.iter().map(|&i| self.colors[i]).collect(),
        })
    }

    pub(crate) fn drop_index(&self, index: usize) -> ExactGraph<T> {
        let mut labels = self.labels.clone();
        labels.remove(index);
        let mut colors = self.colors.clone();
        colors.remove(index);
        Self {
            z: remove_index(&self.z, index),
            labels,
            colors,
        }
    }
}

/// `n`-mode vacuum, `z = i·I`.
pub fn vacuum_graph<T: Real>(n: usize) -> Result<ExactGraph<T>> {
    if n == 0 {
        return Err(Error::EmptyState);
    }
    let z = CMatrix::<T>::from_diagonal_element(n, n, cplx(T::zero(), T::one()));
    Ok(ExactGraph::from_parts_unchecked(
        z,
        (0..n).map(NodeId::seq).collect(),
        vec![Color::Black; n],
    ))
}

/// Homodyne `q` measurement: removes the node's row and column. Outcome-independent.
pub fn measure_q<T: Real>(g: &ExactGraph<T>, node: usize) -> Result<ExactGraph<T>> {
    if node >= g.n() {
        return Err(Error::IndexOutOfRange {
            index: node,
            len: g.n(),
        });
    }
    if g.n() < 2 {
        return Err(Error::EmptyState);
    }
    Ok(g.drop_index(node))
}

/// Deletes several nodes; the result does not depend on the order.
pub fn measure_q_many<T: Real>(g: &ExactGraph<T>, nodes: &[usize]) -> Result<ExactGraph<T>> {
    let mut drop = nodes.to_vec();
    drop.sort_unstable();
    drop.dedup();
    if let Some(&bad) = drop.iter().find(|&&i| i >= g.n()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: g.n(),
        });
    }
    if drop.len() >= g.n() {
        return Err(Error::EmptyState);
    }
    let keep: Vec<usize> = (0..g.n())
        .filter(|i| drop.binary_search(i).is_err())
        .collect();
    Ok(ExactGraph {
        z: select(&g.z, &keep),
        labels: keep.iter().map(|&i| g.labels[i]).collect(),
        colors: keep.iter().map(|&i| g.colors[i]).collect(),
    })
}

/// Position-space amplitude `(det U)^{1/4} π^{-N/4} exp(-½ qᵀ(U - iV)q)`.
pub fn wavefunction_eval<T: Real>(g: &ExactGraph<T>, q: &[T]) -> Result<Complex<T>> {
    let n = g.n();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.len(),
        });
    }
    let u = g.u();
    let chol =
        cholesky(&u).ok_or_else(|| Error::NotPhysical("U is not positive definite".into()))?;
    let det_u = chol
        .l()
        .diagonal()
        .iter()
        .fold(T::one(), |acc, d| acc * *d * *d);
    let qv = DVector::from_column_slice(q);
    let quad_u = (qv.transpose() * &u * &qv)[(0, 0)];
    let quad_v = (qv.transpose() * g.v() * &qv)[(0, 0)];
    let half = T::lit(0.5);
    let norm = det_u.powf(T::lit(0.25)) * T::pi().powf(-T::lit(n as f64) * T::lit(0.25));
    // exp(-½ quad_u + i ½ quad_v)
    let mag = norm * (-half * quad_u).exp();
    let phase = half * quad_v;
    Ok(cplx(mag * phase.cos(), mag * phase.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn vacuum_is_identity_times_i() {
        let g = vacuum_graph::<f64>(1).unwrap();
        assert_eq!(g.entry(0, 0), c(0.0, 1.0));
        let g = vacuum_graph::<f64>(3).unwrap();
        assert_eq!(g.u(), DMatrix::identity(3, 3));
        assert!(g.v().iter().all(|&x| x == 0.0));
        assert!(g.colors().iter().all(|&c| c == Color::Black));
        assert_eq!(vacuum_graph::<f64>(0), Err(Error::EmptyState));
    }

    #[test]
    fn validation_reports() {
        let ok = CMatrix::<f64>::from_diagonal_element(2, 2, c(0.0, 1.0));
        assert!(validate_matrix(&ok).is_valid());

        let asym =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let r = validate_matrix(&asym);
        assert!(matches!(r.violations[0], Violation::Asymmetric { .. }));
        assert_eq!(r.symmetry_defect, 1.0);

        let neg = CMatrix::<f64>::from_diagonal_element(2, 2, c(0.0, -1.0));
        let r = validate_matrix(&neg);
        assert_eq!(
            r.violations,
            vec![Violation::NotPositive {
                min_eigenvalue: -1.0
            }]
        );
        assert!(ExactGraph::new(neg).is_err());
    }

    #[test]
    fn measure_q_deletes_row_and_column() {
        let g = vacuum_graph::<f64>(3).unwrap();
        let m = measure_q(&g, 1).unwrap();
        assert_eq!(m.z(), vacuum_graph::<f64>(2).unwrap().z());
        assert_eq!(m.labels(), &[NodeId::seq(0), NodeId::seq(2)]);
        let one = vacuum_graph::<f64>(1).unwrap();
        assert_eq!(measure_q(&one, 0), Err(Error::EmptyState));
        assert!(matches!(
            measure_q(&g, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn vacuum_wavefunction() {
        let g = vacuum_graph::<f64>(2).unwrap();
        let a = wavefunction_eval(&g, &[0.0, 0.0]).unwrap();
        assert!((a.re - std::f64::consts::PI.powf(-0.5)).abs() < 1e-15);
        let g = vacuum_graph::<f64>(1).unwrap();
        let a = wavefunction_eval(&g, &[1.0]).unwrap();
        let want = std::f64::consts::PI.powf(-0.25) * (-0.5f64).exp();
        assert!((a.re - want).abs() < 1e-15 && a.im.abs() < 1e-15);
    }

    #[test]
    fn node_id_round_trips_through_text() {
        let id = NodeId::new(12, 3);
        assert_eq!(id.to_string(), "12:3");
        assert_eq!("12:3".parse::<NodeId>().unwrap(), id);
        assert!("12-3".parse::<NodeId>().is_err());
    }
}
