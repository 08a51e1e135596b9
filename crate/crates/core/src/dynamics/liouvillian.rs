//! Vectorized Liouvillians and their steady states.
//!
//! Column stacking: `vec(ρ)[i + j·d] = ρ[i, j]`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::evolve::LindbladTerm;
use crate::error::{Error, Result};
use crate::operators::{ComplexOperator, DensityOperator, HilbertLayout, C64};

/// Singular values below this fraction of the largest count as null.
pub const NULL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LiouvillianMatrix {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

pub fn liouvillian_matrix(h: Option<&ComplexOperator>, terms: &[LindbladTerm]) -> Result<LiouvillianMatrix> {
    let layout = match (h, terms.first()) {
        (Some(h), _) => h.layout().clone(),
        (None, Some(t)) => t.jump.layout().clone(),
        (None, None) => {
            return Err(Error::InvalidArgument("a Liouvillian needs a Hamiltonian or a dissipator".into()));
        }
    };
    let d = layout.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let mut l = DMatrix::<C64>::zeros(d * d, d * d);
    if let Some(h) = h {
        let hm = h.matrix();
        l += (id.kronecker(hm) - hm.transpose().kronecker(&id)) * C64::new(0.0, -1.0);
    }
    for term in terms {
        if term.jump.layout() != &layout {
            return Err(Error::LayoutMismatch("all operators must share one layout".into()));
        }
        let j = term.jump.matrix();
        let jdj = j.adjoint() * j;
        let half = C64::new(0.5, 0.0);
        let block = j.conjugate().kronecker(j) - id.kronecker(&jdj) * half - jdj.transpose().kronecker(&id) * half;
        l += block * C64::new(term.rate, 0.0);
    }
    Ok(LiouvillianMatrix { layout, matrix: l })
}

impl LiouvillianMatrix {
    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// `L vec(ρ)` reshaped back to a `d×d` matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        DMatrix::from_column_slice(d, d, out.as_slice())
    }

    /// Largest `|Σ_k L[k + k·d, c]|` over columns: zero for a trace-preserving map.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim();
        (0..d * d)
            .map(|c| (0..d).map(|k| self.matrix[(k + k * d, c)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_defect() <= tol * self.norm().max(1.0)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Rows and columns of the Fock-diagonal entries: the population equations.
    pub fn population_block(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |a, b| self.matrix[(a + a * d, b + b * d)])
    }
}

/// Unique `ρ` with `L vec(ρ) = 0`.
///
/// The null space is counted from the singular values of `L`; a unique null
/// vector is then solved for exactly by replacing one population equation
/// with the trace constraint.
pub fn steady_state(l: &LiouvillianMatrix) -> Result<DensityOperator> {
    if !l.is_trace_preserving(1e-10) {
        return Err(Error::InvalidArgument(format!(
            "Liouvillian is not trace preserving (defect {:e})",
            l.trace_defect()
        )));
    }
    let d = l.dim();
    let n = d * d;
    let svd = l.matrix.clone().svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let tol = NULL_TOLERANCE * smax.max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= tol).collect();
    match null.len() {
        0 => {
            return Err(Error::NoSteadyState {
                smallest: sv.min(),
                tolerance: tol,
            });
        }
        1 => {}
        dimension => return Err(Error::DegenerateSteadyState { dimension }),
    }

    let mut a = l.matrix.clone();
    for c in 0..n {
        a[(0, c)] = C64::new(0.0, 0.0);
    }
    for k in 0..d {
        a[(0, k + k * d)] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);
    let v = match a.lu().solve(&rhs) {
        Some(v) if v.iter().all(|z| z.is_finite()) => v,
        _ => {
            let vt = svd.v_t.as_ref().expect("requested V†");
            DVector::from_fn(n, |i, _| vt[(null[0], i)].conj())
        }
    };
    let m = DMatrix::from_column_slice(d, d, v.as_slice());
    Ok(DensityOperator::symmetrized(l.layout.clone(), &m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve::lindblad_rhs;
    use crate::operators::{annihilation, creation};

    #[test]
    fn commutator_part() {
        let layout = HilbertLayout::field(2).unwrap();
        let h = ComplexOperator::new(
            layout,
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    C64::new(1.0, 0.0),
                    C64::new(0.2, 0.3),
                    C64::new(0.0, -0.5),
                    C64::new(0.2, -0.3),
                    C64::new(-0.4, 0.0),
                    C64::new(0.7, 0.0),
                    C64::new(0.0, 0.5),
                    C64::new(0.7, 0.0),
                    C64::new(2.0, 0.0),
                ],
            ),
        )
        .unwrap();
        let l = liouvillian_matrix(Some(&h), &[]).unwrap();
        let rho = DensityOperator::thermal(2, 0.6).unwrap();
        let want = (h.matrix() * rho.matrix() - rho.matrix() * h.matrix()) * C64::new(0.0, -1.0);
        assert!((l.apply(rho.matrix()) - want).norm() < 1e-14);
        assert!(l.is_trace_preserving(1e-14));
    }

    #[test]
    fn two_level_decay_superoperator() {
        let l = liouvillian_matrix(None, &[LindbladTerm::new(0.8, annihilation(1).unwrap()).unwrap()]).unwrap();
        let m = l.matrix();
        // ρ₁₁ index 3, ρ₀₀ index 0, coherence ρ₀₁ index 2
        assert!((m[(3, 3)] - C64::new(-0.8, 0.0)).norm() < 1e-15);
        assert!((m[(0, 3)] - C64::new(0.8, 0.0)).norm() < 1e-15);
        assert!((m[(2, 2)] - C64::new(-0.4, 0.0)).norm() < 1e-15);
        assert_eq!(m.nrows(), 4);
    }

    #[test]
    fn matches_matrix_rhs() {
        let cutoff = 3;
        let terms = [
            LindbladTerm::new(1.3, annihilation(cutoff).unwrap()).unwrap(),
            LindbladTerm::new(0.2, creation(cutoff).unwrap()).unwrap(),
        ];
        let l = liouvillian_matrix(None, &terms).unwrap();
        let rho = DensityOperator::thermal(cutoff, 0.4).unwrap();
        let want = lindblad_rhs(None, &terms, &rho).unwrap();
        assert!((l.apply(rho.matrix()) - want).norm() < 1e-13);
    }

    #[test]
    fn thermal_steady_state() {
        let cutoff = 12;
        let n_bar = 0.05;
        let terms = [
            LindbladTerm::new(1.0 + n_bar, annihilation(cutoff).unwrap()).unwrap(),
            LindbladTerm::new(n_bar, creation(cutoff).unwrap()).unwrap(),
        ];
        let rho = steady_state(&liouvillian_matrix(None, &terms).unwrap()).unwrap();
        let want = DensityOperator::thermal(cutoff, n_bar).unwrap();
        for n in 0..=cutoff {
            assert!((rho.population(n) - want.population(n)).abs() < 1e-8);
        }
    }

    #[test]
    fn dissipation_free_map_is_degenerate() {
        let layout = HilbertLayout::field(2).unwrap();
        let zero = ComplexOperator::zeros(&layout);
        let l = liouvillian_matrix(Some(&zero), &[]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::DegenerateSteadyState { dimension: 9 })));
    }
}
