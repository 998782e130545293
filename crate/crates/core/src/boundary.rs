//! Boundary defects of nearly self-inverse generators and their removal by clipping.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gaussian::linalg::{complexify, max_abs, max_abs_c};
use crate::gaussian::{measure_q_many, CMatrix, ExactGraph, HGraph};
use crate::scalar::Real;

/// Selectors built from the open generator `G₀` and its self-inverse reference `Ḡ₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClipPlan<T: Real = f64> {
    pub g0: DMatrix<T>,
    pub g0_bar: DMatrix<T>,
    pub e0: DMatrix<T>,
    pub p0: DMatrix<T>,
    pub p: DMatrix<T>,
    /// Second-set rows of `E₀` that are nonzero; these nodes are deleted.
    pub removed_rows: Vec<usize>,
}

impl<T: Real> ClipPlan<T> {
    pub fn new(g0: DMatrix<T>, g0_bar: DMatrix<T>) -> Result<Self> {
        let e0 = split_error(&g0, &g0_bar)?;
        let p0 = build_p0(&e0);
        let (n2, n1) = g0.shape();
        let kept = p0.nrows();
        let mut p = DMatrix::zeros(n1 + kept, n1 + n2);
        p.view_mut((0, 0), (n1, n1)).fill_with_identity();
        p.view_mut((n1, n1), (kept, n2)).copy_from(&p0);
        let removed_rows = nonzero_rows(&e0);
        Ok(Self {
            g0,
            g0_bar,
            e0,
            p0,
            p,
            removed_rows,
        })
    }

    /// Plan that clips nothing.
    pub fn identity(g0: DMatrix<T>) -> Result<Self> {
        let bar = g0.clone();
        Self::new(g0, bar)
    }

    pub fn first_size(&self) -> usize {
        self.g0.ncols()
    }

    pub fn second_size(&self) -> usize {
        self.g0.nrows()
    }

    /// More than half the second set would be deleted.
    pub fn is_dense(&self) -> bool {
        2 * self.removed_rows.len() > self.second_size()
    }

    /// Full-graph indices (first set first) of the deleted nodes.
    pub fn removed_indices(&self) -> Vec<usize> {
        self.removed_rows
            .iter()
            .map(|r| r + self.first_size())
            .collect()
    }

    pub fn generator(&self) -> HGraph<T> {
        HGraph::bipartite(&self.g0)
    }
}

fn nonzero_rows<T: Real>(m: &DMatrix<T>) -> Vec<usize> {
    (0..m.nrows())
        .filter(|&r| m.row(r).iter().any(|x| *x != T::zero()))
        .collect()
}

/// `E₀ = G₀ − Ḡ₀`; the reference must be self-inverse as a bipartite block.
pub fn split_error<T: Real>(g0: &DMatrix<T>, g0_bar: &DMatrix<T>) -> Result<DMatrix<T>> {
    if g0.shape() != g0_bar.shape() {
        return Err(Error::DimensionMismatch {
            expected: g0.len(),
            found: g0_bar.len(),
        });
    }
    let defect = HGraph::bipartite(g0_bar).selfinverse_defect();
    if !(defect < T::tol(1e-12)) {
        return Err(Error::Precondition(format!(
            "reference generator is not self-inverse (defect {:e})",
            defect.as_f64()
        )));
    }
    Ok(g0 - g0_bar)
}

/// Rows of the identity for every all-zero row of `E₀`, so that `P₀E₀ = 0`.
pub fn build_p0<T: Real>(e0: &DMatrix<T>) -> DMatrix<T> {
    let zero_rows: Vec<usize> = (0..e0.nrows())
        .filter(|&r| e0.row(r).iter().all(|x| *x == T::zero()))
        .collect();
    let mut p0 = DMatrix::zeros(zero_rows.len(), e0.nrows());
    for (i, &r) in zero_rows.iter().enumerate() {
        p0[(i, r)] = T::one();
    }
    p0
}

/// `i sech2α·I + tanh2α·G`, the cluster form of a bipartite generator.
pub fn cluster_form<T: Real>(g: &DMatrix<T>, alpha: T) -> CMatrix<T> {
    let two_a = alpha + alpha;
    let n = g.nrows();
    let sech = T::one() / two_a.cosh();
    complexify(&(g * two_a.tanh()))
        + CMatrix::from_diagonal_element(n, n, Complex::new(T::zero(), sech))
}

/// Result of clipping, with both routes' agreement recorded.
#[derive(Clone, Debug)]
pub struct Clipped<T: Real = f64> {
    pub graph: ExactGraph<T>,
    /// `‖PZ′Pᵀ − (i sech2α I + tanh2α PGPᵀ)‖∞`
    pub closed_form_defect: T,
    /// Conjugation route against q-deletion of the deselected nodes.
    pub route_defect: T,
}

/// Clips a phase-shifted state `Z′` (first set first) by conjugation with `P` and,
/// independently, by q-deleting the deselected nodes. Both routes must agree with the clean
/// closed form within `1e-10`.
pub fn clip<T: Real>(zprime: &ExactGraph<T>, plan: &ClipPlan<T>, alpha: T) -> Result<Clipped<T>> {
    let n = plan.first_size() + plan.second_size();
    if zprime.n() != n {
        return Err(Error::InconsistentPlan(format!(
            "plan covers {n} nodes but the state has {}",
            zprime.n()
        )));
    }
    let p = complexify(&plan.p);
    let conj = &p * zprime.z() * p.transpose();
    let g = plan.generator();
    let pgp = &plan.p * g.matrix() * plan.p.transpose();
    let want = cluster_form(&pgp, alpha);
    let closed_form_defect = max_abs_c(&(&conj - &want));
    let deleted = if plan.removed_rows.is_empty() {
        zprime.clone()
    } else {
        measure_q_many(zprime, &plan.removed_indices())?
    };
    let route_defect = max_abs_c(&(&conj - deleted.z()));
    let tol = T::tol(1e-10);
    if !(closed_form_defect < tol && route_defect < tol) {
        return Err(Error::InconsistentPlan(format!(
            "clipped state off by {:e} from the closed form and {:e} between routes",
            closed_form_defect.as_f64(),
            route_defect.as_f64()
        )));
    }
    Ok(Clipped {
        graph: deleted,
        closed_form_defect,
        route_defect,
    })
}

/// `‖G·G − I‖∞`.
pub fn selfinverse_defect<T: Real>(g: &HGraph<T>) -> T {
    g.selfinverse_defect()
}

/// Nonzero pattern of `G₀G₀ᵀ − I` as second-set index pairs: where the open-boundary `Z′`
/// departs from the clean cluster form.
pub fn deviation_support<T: Real>(g0: &DMatrix<T>) -> BTreeSet<(usize, usize)> {
    let n2 = g0.nrows();
    let d = g0 * g0.transpose() - DMatrix::identity(n2, n2);
    let mut out = BTreeSet::new();
    for i in 0..n2 {
        for j in 0..n2 {
            if d[(i, j)] != T::zero() {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Breadth-first graph distance from `sources` over the nonzero pattern of `g`.
pub fn graph_distances<T: Real>(g: &DMatrix<T>, sources: &[usize]) -> Vec<Option<usize>> {
    let n = g.nrows();
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if s < n && dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have distances");
        for v in 0..n {
            if v != u && g[(u, v)] != T::zero() && dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Largest entry of `|G₀ − Ḡ₀|`, for reporting.
pub fn error_norm<T: Real>(plan: &ClipPlan<T>) -> T {
    max_abs(&plan.e0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{bipartite_form_state, fourier_first_partition};

    /// Staggered Hadamard product: orthogonal and banded with wrap-around; the open
    /// version drops the wrap-around entries.
    fn ring_blocks(k: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = DMatrix::zeros(k, k);
        let mut b = DMatrix::zeros(k, k);
        for p in 0..k / 2 {
            let (i, j) = (2 * p, 2 * p + 1);
            a[(i, i)] = h;
            a[(i, j)] = h;
            a[(j, i)] = h;
            a[(j, j)] = -h;
            let (i, j) = (2 * p + 1, (2 * p + 2) % k);
            b[(i, i)] = h;
            b[(i, j)] = h;
            b[(j, i)] = h;
            b[(j, j)] = -h;
        }
        let bar = a * b;
        let mut open = bar.clone();
        for i in 0..k {
            for j in 0..k {
                if i.abs_diff(j) > k / 2 {
                    open[(i, j)] = 0.0;
                }
            }
        }
        (open, bar)
    }

    #[test]
    fn zero_error_gives_full_selector() {
        let (_, bar) = ring_blocks(4);
        let e0 = split_error(&bar, &bar).unwrap();
        assert_eq!(max_abs(&e0), 0.0);
        assert_eq!(build_p0(&e0), DMatrix::identity(4, 4));
    }

    #[test]
    fn single_defective_row_is_dropped() {
        let mut e0 = DMatrix::<f64>::zeros(3, 3);
        e0[(1, 2)] = 0.5;
        let p0 = build_p0(&e0);
        assert_eq!(
            p0,
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
        );
        assert_eq!(max_abs(&(&p0 * &e0)), 0.0);
        assert_eq!(&p0 * p0.transpose(), DMatrix::identity(2, 2));
    }

    #[test]
    fn rejects_non_selfinverse_reference() {
        let (open, _) = ring_blocks(4);
        assert!(matches!(
            split_error(&open, &open),
            Err(Error::Precondition(_))
        ));
        let (_, bar) = ring_blocks(4);
        assert!(split_error(&DMatrix::zeros(3, 4), &bar).is_err());
    }

    #[test]
    fn open_ring_clips_to_closed_form() {
        let alpha = 0.9;
        let (open, bar) = ring_blocks(6);
        let plan = ClipPlan::new(open.clone(), bar).unwrap();
        assert!(!plan.removed_rows.is_empty());
        assert!(plan.removed_rows.iter().all(|r| [0, 1, 4, 5].contains(r)));
        let p0 = &plan.p0;
        let kept = p0.nrows();
        let gg = &open * open.transpose();
        assert!(max_abs(&(p0 * gg * p0.transpose() - DMatrix::identity(kept, kept))) < 1e-15);
        let z = bipartite_form_state(&plan.generator(), alpha).unwrap();
        let zp = fourier_first_partition(&z, 6).unwrap();
        let clipped = clip(&zp, &plan, alpha).unwrap();
        assert_eq!(clipped.graph.n(), 12 - plan.removed_rows.len());
        assert!(clipped.route_defect < 1e-10);
    }

    #[test]
    fn identity_plan_is_a_no_op() {
        let (_, bar) = ring_blocks(4);
        let plan = ClipPlan::identity(bar).unwrap();
        let z = bipartite_form_state(&plan.generator(), 0.5).unwrap();
        let zp = fourier_first_partition(&z, 4).unwrap();
        let clipped = clip(&zp, &plan, 0.5).unwrap();
        assert_eq!(clipped.graph.z(), zp.z());
    }

    #[test]
    fn open_generator_cannot_be_its_own_reference() {
        let (open, bar) = ring_blocks(6);
        assert!(HGraph::bipartite(&bar).is_self_inverse());
        assert!(ClipPlan::identity(open).is_err());
    }

    #[test]
    fn distances_on_a_path() {
        let mut g = DMatrix::<f64>::zeros(4, 4);
        for i in 0..3 {
            g[(i, i + 1)] = 1.0;
            g[(i + 1, i)] = 1.0;
        }
        assert_eq!(
            graph_distances(&g, &[0]),
            vec![Some(0), Some(1), Some(2), Some(3)]
        );
    }
}
