//! Time-dependent Hamiltonians built from harmonically phased operators.

use crate::error::{Error, Result};
use crate::operators::{ComplexOperator, HilbertLayout, SparseOp, C64};

/// One `op·e^{i·freq·t} + H.c.` contribution.
#[derive(Clone, Debug)]
pub struct PhasedTerm {
    pub op: ComplexOperator,
    pub freq: f64,
}

/// `H(t) = H₀ + Σₖ (Oₖ e^{iωₖt} + Oₖ† e^{−iωₖt})`.
///
/// `H₀` must be Hermitian; the phased terms are Hermitian by construction.
#[derive(Clone, Debug)]
pub struct PhasedHamiltonian {
    layout: HilbertLayout,
    constant: ComplexOperator,
    terms: Vec<PhasedTerm>,
    constant_sparse: SparseOp,
    sparse: Vec<(SparseOp, SparseOp)>,
}

impl PhasedHamiltonian {
    pub fn new(constant: ComplexOperator, terms: Vec<PhasedTerm>) -> Result<Self> {
        let layout = constant.layout().clone();
        if let Some(t) = terms.iter().find(|t| t.op.layout() != &layout) {
            return Err(Error::LayoutMismatch(format!(
                "phased term on {:?}, constant part on {layout:?}",
                t.op.layout()
            )));
        }
        let dev = constant.hermiticity_deviation();
        if dev > 1e-12 * constant.max_abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "constant part is not Hermitian (deviation {dev:e})"
            )));
        }
        let constant_sparse = constant.sparse();
        let sparse = terms
            .iter()
            .map(|t| (t.op.sparse(), t.op.adjoint().sparse()))
            .collect();
        Ok(Self {
            layout,
            constant,
            terms,
            constant_sparse,
            sparse,
        })
    }

    pub fn constant(op: ComplexOperator) -> Result<Self> {
        Self::new(op, Vec::new())
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn is_static(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[PhasedTerm] {
        &self.terms
    }

    pub fn static_part(&self) -> &ComplexOperator {
        &self.constant
    }

    pub fn at(&self, t: f64) -> ComplexOperator {
        let mut m = self.constant.matrix().clone();
        for term in &self.terms {
            let phase = C64::from_polar(1.0, term.freq * t);
            let op = term.op.matrix();
            m += op * phase + op.adjoint() * phase.conj();
        }
        ComplexOperator::new(self.layout.clone(), m).expect("layout checked at construction")
    }

    /// `out = scale · H(t) x`, overwriting `out`.
    pub(crate) fn apply(&self, t: f64, scale: C64, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        self.constant_sparse.apply_add(scale, x, out);
        for (term, (op, op_dag)) in self.terms.iter().zip(&self.sparse) {
            let phase = C64::from_polar(1.0, term.freq * t);
            op.apply_add(scale * phase, x, out);
            op_dag.apply_add(scale * phase.conj(), x, out);
        }
    }

    /// Nonzero entries of H(t) as (row, col, value) with repeated positions allowed.
    pub(crate) fn sparse_entries(&self, t: f64) -> Vec<(usize, usize, C64)> {
        let mut out = self.constant_sparse.entries.clone();
        for (term, (op, op_dag)) in self.terms.iter().zip(&self.sparse) {
            let phase = C64::from_polar(1.0, term.freq * t);
            out.extend(op.entries.iter().map(|&(i, j, z)| (i, j, z * phase)));
            out.extend(op_dag.entries.iter().map(|&(i, j, z)| (i, j, z * phase.conj())));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{annihilation, atomic_sigma, tensor};

    #[test]
    fn apply_matches_dense_evaluation() {
        let sigma = atomic_sigma("f", "g", &["g", "e", "f"]).unwrap();
        let op = tensor(&sigma, &annihilation(3).unwrap());
        let h = PhasedHamiltonian::new(
            ComplexOperator::zeros(op.layout()),
            vec![PhasedTerm { op: op.scale(C64::new(0.7, 0.0)), freq: -2.5 }],
        )
        .unwrap();
        let x: Vec<C64> = (0..op.dim()).map(|k| C64::new(k as f64, 1.0 / (k as f64 + 1.0))).collect();
        let t = 0.37;
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        h.apply(t, C64::new(1.0, 0.0), &x, &mut out);
        let dense = h.at(t).apply(&nalgebra::DVector::from_vec(x));
        for (a, b) in out.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(h.at(t).hermiticity_deviation() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_constant() {
        let op = annihilation(2).unwrap();
        assert!(PhasedHamiltonian::constant(op).is_err());
    }
}
