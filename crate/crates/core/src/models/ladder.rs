//! Weighted Fock ladders and the engineered Hamiltonians built on them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::raman::DerivedCouplings;
use crate::models::CouplingKind;
use crate::operators::{tensor, ComplexOperator, HilbertLayout, C64, ATOM, FIELD};

pub const MAX_STEPS: usize = 4;

/// `A† = Σᵢ wᵢ |M+i+1⟩⟨M+i|` for `i = 0..L`, with `w₀ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    base: usize,
    weights: Vec<C64>,
    zeta_ref: C64,
    kind: CouplingKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LadderMode {
    UpperBounded,
    Sliced,
}

impl LadderSpec {
    pub fn new(base: usize, weights: Vec<C64>, zeta_ref: C64, kind: CouplingKind) -> Result<Self> {
        if weights.is_empty() || weights.len() > MAX_STEPS {
            return Err(Error::InvalidArgument(format!(
                "ladder needs 1..={MAX_STEPS} steps, got {}",
                weights.len()
            )));
        }
        if weights[0] != C64::new(1.0, 0.0) {
            return Err(Error::InvalidArgument(format!(
                "first ladder weight must be exactly 1, got {}",
                weights[0]
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite ladder weight {w}")));
        }
        Ok(Self {
            base,
            weights,
            zeta_ref,
            kind,
        })
    }

    pub fn unit(base: usize, steps: usize, zeta_ref: C64, kind: CouplingKind) -> Result<Self> {
        Self::new(base, vec![C64::new(1.0, 0.0); steps], zeta_ref, kind)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn steps(&self) -> usize {
        self.weights.len()
    }

    /// The dark level `|M+L⟩`.
    pub fn top(&self) -> usize {
        self.base + self.weights.len()
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn zeta_ref(&self) -> C64 {
        self.zeta_ref
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn with_zeta_ref(&self, zeta_ref: C64) -> Self {
        Self { zeta_ref, ..self.clone() }
    }

    /// `A†` on a field factor with the given cutoff.
    pub fn raising_operator(&self, cutoff: usize) -> Result<ComplexOperator> {
        if cutoff < self.top() {
            return Err(Error::CutoffTooSmall {
                cutoff,
                required: self.top(),
            });
        }
        let layout = HilbertLayout::field(cutoff)?;
        let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
        for (i, w) in self.weights.iter().enumerate() {
            m[(self.base + i + 1, self.base + i)] = *w;
        }
        ComplexOperator::new(layout, m)
    }

    /// `A†` restricted to its invariant window `|M⟩..|M+L⟩`; field index
    /// `k` stands for `|M+k⟩`.
    pub fn window_raising_operator(&self) -> ComplexOperator {
        let l = self.steps();
        let layout = HilbertLayout::field(l).expect("ladder has at least one step");
        let mut m = DMatrix::zeros(l + 1, l + 1);
        for (i, w) in self.weights.iter().enumerate() {
            m[(i + 1, i)] = *w;
        }
        ComplexOperator::new(layout, m).expect("square by construction")
    }
}

fn atom_lowering(kind: CouplingKind, dim: usize) -> ComplexOperator {
    let layout = HilbertLayout::atom(dim).expect("atom dim checked by caller");
    let mut m = DMatrix::zeros(dim, dim);
    // g = 0, e = 1
    match kind {
        CouplingKind::Jc => m[(0, 1)] = C64::new(1.0, 0.0),
        CouplingKind::Ajc => m[(1, 0)] = C64::new(1.0, 0.0),
    }
    ComplexOperator::new(layout, m).expect("square by construction")
}

/// `ζ_ref σ_ge ⊗ A† + H.c.` (JC) or `ζ_ref σ_eg ⊗ A† + H.c.` (AJC) on an
/// atom ⊗ field layout whose first two atomic levels are `g`, `e`.
pub fn build_engineered_hamiltonian(spec: &LadderSpec, layout: &HilbertLayout) -> Result<ComplexOperator> {
    let f = layout.factors();
    if f.len() != 2 || f[0].label != ATOM || f[1].label != FIELD {
        return Err(Error::LayoutMismatch("expected an atom ⊗ field layout".into()));
    }
    let cutoff = f[1].dim - 1;
    let required = spec.top() + 2;
    if cutoff < required {
        return Err(Error::CutoffTooSmall { cutoff, required });
    }
    let coupling = tensor(&atom_lowering(spec.kind, f[0].dim), &spec.raising_operator(cutoff)?).scale(spec.zeta_ref);
    Ok(&coupling + &coupling.adjoint())
}

/// Ladder weights that the derived couplings imply:
/// `wᵢ = ζ_{M+i}^{(i+1)} / ζ_M^{(1)}` and `ζ_ref = ζ_M^{(1)}`.
pub fn ladder_from_conditions(
    derived: &DerivedCouplings,
    mode: LadderMode,
    base: usize,
    steps: usize,
    kind: CouplingKind,
) -> Result<LadderSpec> {
    if steps != derived.num_branches() {
        return Err(Error::InvalidArgument(format!(
            "{steps} steps requested from {} branches",
            derived.num_branches()
        )));
    }
    if mode == LadderMode::UpperBounded && base != 0 {
        return Err(Error::InvalidArgument("an upper-bounded ladder starts at |0⟩".into()));
    }
    if derived.zeta[0] == C64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("zeta_1 = 0: no ladder to normalize".into()));
    }
    let zeta_ref = derived.zeta_n(base, 0);
    let mut weights = vec![C64::new(1.0, 0.0)];
    weights.extend((1..steps).map(|i| derived.zeta_n(base + i, i) / zeta_ref));
    LadderSpec::new(base, weights, zeta_ref, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::StateVector;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn derived_with_zeta(zeta: Vec<f64>) -> DerivedCouplings {
        let k = zeta.len();
        DerivedCouplings {
            chi: -0.1,
            chi_tilde: 0.0,
            varpi: 0.0,
            omega3_shift: 0.0,
            zeta: zeta.into_iter().map(c).collect(),
            theta: vec![0.0; k],
        }
    }

    #[test]
    fn weight_rules() {
        let z1 = 0.3;
        let d = derived_with_zeta(vec![z1, z1 / 2f64.sqrt()]);
        let s = ladder_from_conditions(&d, LadderMode::UpperBounded, 0, 2, CouplingKind::Jc).unwrap();
        assert!((s.weights()[1] - c(1.0)).norm() < 1e-15);
        assert!((s.zeta_ref() - c(z1)).norm() < 1e-15);

        let d3 = derived_with_zeta(vec![z1, z1 / 2f64.sqrt(), z1 / 3f64.sqrt()]);
        let s3 = ladder_from_conditions(&d3, LadderMode::UpperBounded, 0, 3, CouplingKind::Jc).unwrap();
        for w in s3.weights() {
            assert!((w - c(1.0)).norm() < 1e-15);
        }

        let flat = derived_with_zeta(vec![z1, z1]);
        let s1 = ladder_from_conditions(&flat, LadderMode::Sliced, 1, 2, CouplingKind::Jc).unwrap();
        assert!((s1.weights()[1] - c(1.5f64.sqrt())).norm() < 1e-15);
        assert!((s1.zeta_ref() - c(2f64.sqrt() * z1)).norm() < 1e-15);

        assert!(ladder_from_conditions(&flat, LadderMode::UpperBounded, 1, 2, CouplingKind::Jc).is_err());
        assert!(ladder_from_conditions(&derived_with_zeta(vec![0.0, 1.0]), LadderMode::Sliced, 0, 2, CouplingKind::Jc).is_err());
    }

    #[test]
    fn rejects_bad_first_weight() {
        assert!(LadderSpec::new(0, vec![c(0.9), c(1.0)], c(1.0), CouplingKind::Jc).is_err());
        assert!(LadderSpec::new(0, vec![], c(1.0), CouplingKind::Jc).is_err());
    }

    #[test]
    fn top_of_ladder_is_dark() {
        let spec = LadderSpec::unit(0, 2, c(1.0), CouplingKind::Jc).unwrap();
        let layout = HilbertLayout::atom_field(2, 4).unwrap();
        let h = build_engineered_hamiltonian(&spec, &layout).unwrap();
        // index = level·(cutoff+1) + n with g = 0, e = 1
        let e0 = StateVector::basis(&layout, 5).unwrap();
        let out = h.apply(e0.amplitudes());
        let g1 = 1;
        assert!((out[g1] - c(1.0)).norm() < 1e-15);
        assert!(out.iter().enumerate().all(|(i, z)| i == g1 || z.norm() == 0.0));
        let e2 = StateVector::basis(&layout, 7).unwrap();
        assert!(h.apply(e2.amplitudes()).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn sliced_support() {
        let spec = LadderSpec::unit(3, 2, c(1.0), CouplingKind::Jc).unwrap();
        let cutoff = 7;
        let layout = HilbertLayout::atom_field(2, cutoff).unwrap();
        let h = build_engineered_hamiltonian(&spec, &layout).unwrap();
        let idx = |level: usize, n: usize| level * (cutoff + 1) + n;
        let allowed = [(idx(1, 3), idx(0, 4)), (idx(1, 4), idx(0, 5))];
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if h.entry(i, j).norm() != 0.0 {
                    assert!(allowed.iter().any(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j)), "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn ajc_pumps_from_ground() {
        let spec = LadderSpec::unit(0, 1, c(1.0), CouplingKind::Ajc).unwrap();
        let layout = HilbertLayout::atom_field(2, 3).unwrap();
        let h = build_engineered_hamiltonian(&spec, &layout).unwrap();
        // |g,0⟩ ↦ |e,1⟩
        assert_eq!(h.entry(4 + 1, 0), c(1.0));
        assert_eq!(h.hermiticity_deviation(), 0.0);
    }

    #[test]
    fn cutoff_guard() {
        let spec = LadderSpec::unit(3, 3, c(1.0), CouplingKind::Jc).unwrap();
        let layout = HilbertLayout::atom_field(2, 7).unwrap();
        assert!(matches!(
            build_engineered_hamiltonian(&spec, &layout),
            Err(Error::CutoffTooSmall { cutoff: 7, required: 8 })
        ));
    }
}
