//! Three-level (`g`, `e`, `i`) Raman scheme that isolates one `|k⟩ → |k+1⟩`
//! step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{PhasedHamiltonian, PhasedTerm};
use crate::models::raman::{RegimeEntry, RegimeReport};
use crate::operators::{annihilation, atomic_sigma, tensor, ComplexOperator, HilbertLayout, C64, ATOM, FIELD};

pub const SELECTIVE_LEVELS: [&str; 3] = ["g", "e", "i"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectiveRamanParams {
    pub lambda: C64,
    pub omega1: C64,
    pub omega2: C64,
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl SelectiveRamanParams {
    pub fn new(lambda: C64, omega1: C64, omega2: C64, delta: f64, delta1: f64, delta2: f64) -> Result<Self> {
        for (branch, d) in [delta, delta1, delta2].into_iter().enumerate() {
            if d == 0.0 || !d.is_finite() {
                return Err(Error::ZeroDetuning { branch });
            }
        }
        Ok(Self {
            lambda,
            omega1,
            omega2,
            delta,
            delta1,
            delta2,
        })
    }

    pub fn xi(&self) -> f64 {
        self.lambda.norm_sqr() / self.delta
    }

    pub fn varpi_g(&self) -> f64 {
        self.omega1.norm_sqr() / self.delta1
    }

    pub fn varpi_e(&self) -> f64 {
        self.omega2.norm_sqr() / self.delta2
    }

    pub fn zeta(&self) -> C64 {
        self.lambda.conj() * self.omega2 * (0.5 * (1.0 / self.delta + 1.0 / self.delta2))
    }

    pub fn small_delta(&self) -> f64 {
        self.delta - self.delta2
    }

    /// φₙ = (n+1)ξ + δ − ϖ_g − ϖ_e
    pub fn phi(&self, n: usize) -> f64 {
        (n as f64 + 1.0) * self.xi() + self.small_delta() - self.varpi_g() - self.varpi_e()
    }

    pub fn zeta_n(&self, n: usize) -> C64 {
        self.zeta() * (n as f64 + 1.0).sqrt()
    }
}

/// Tune the drives so that only the `|k⟩ → |k+1⟩` step is resonant:
/// `|Ω₁|` is set from `(k+1)ξ = ϖ_g` (phase kept) and `Δ₂` from `δ = ϖ_e`,
/// taking the root of `Δ₂² − ΔΔ₂ + |Ω₂|² = 0` closest to `Δ`.
pub fn derive_selective(params: &SelectiveRamanParams, k: usize) -> Result<SelectiveRamanParams> {
    let ratio = (k as f64 + 1.0) * params.delta1 / params.delta;
    if ratio < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "(k+1)Δ₁/Δ = {ratio} < 0: Δ and Δ₁ must share a sign"
        )));
    }
    let mag = ratio.sqrt() * params.lambda.norm();
    let omega1 = if params.omega1.norm() == 0.0 {
        C64::new(mag, 0.0)
    } else {
        params.omega1 * (mag / params.omega1.norm())
    };
    let disc = params.delta * params.delta - 4.0 * params.omega2.norm_sqr();
    if disc < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "no Δ₂ with Δ − Δ₂ = |Ω₂|²/Δ₂: Δ² − 4|Ω₂|² = {disc} < 0"
        )));
    }
    let delta2 = 0.5 * (params.delta + params.delta.signum() * disc.sqrt());
    SelectiveRamanParams::new(params.lambda, omega1, params.omega2, params.delta, params.delta1, delta2)
}

/// `λσ_ig a e^{−iΔt} + Ω₁σ_ig e^{iΔ₁t} + Ω₂σ_ie e^{−iΔ₂t} + H.c.`
pub fn build_selective_full_hamiltonian(
    params: &SelectiveRamanParams,
    layout: &HilbertLayout,
) -> Result<PhasedHamiltonian> {
    let f = layout.factors();
    if f.len() != 2 || f[0].label != ATOM || f[1].label != FIELD || f[0].dim != SELECTIVE_LEVELS.len() {
        return Err(Error::LayoutMismatch("expected a 3-level atom ⊗ field layout".into()));
    }
    let cutoff = f[1].dim - 1;
    let id_field = ComplexOperator::identity(&HilbertLayout::field(cutoff)?);
    let ig = atomic_sigma("i", "g", &SELECTIVE_LEVELS)?;
    let ie = atomic_sigma("i", "e", &SELECTIVE_LEVELS)?;
    let terms = vec![
        PhasedTerm {
            op: tensor(&ig, &annihilation(cutoff)?).scale(params.lambda),
            freq: -params.delta,
        },
        PhasedTerm {
            op: tensor(&ig, &id_field).scale(params.omega1),
            freq: params.delta1,
        },
        PhasedTerm {
            op: tensor(&ie, &id_field).scale(params.omega2),
            freq: -params.delta2,
        },
    ];
    PhasedHamiltonian::new(ComplexOperator::zeros(layout), terms)
}

/// Elimination and selectivity conditions for the step `k`.
pub fn selective_regime(params: &SelectiveRamanParams, k: usize, n_bar: f64, threshold: f64) -> RegimeReport {
    let lam = params.lambda.norm();
    let entries = vec![
        RegimeEntry::new("Delta/(sqrt(nbar+1)*|lambda|)", params.delta, (n_bar + 1.0).sqrt() * lam, threshold),
        RegimeEntry::new("Delta1/|Omega1|", params.delta1, params.omega1.norm(), threshold),
        RegimeEntry::new("Delta2/|Omega2|", params.delta2, params.omega2.norm(), threshold),
        RegimeEntry::new(
            format!("xi/(sqrt({})*|zeta|)", k + 2),
            params.xi(),
            (k as f64 + 2.0).sqrt() * params.zeta().norm(),
            threshold,
        ),
        RegimeEntry::new("varpi_g/delta", params.varpi_g(), params.small_delta(), threshold),
    ];
    let residuals = vec![(format!("phi_{k}"), params.phi(k))];
    RegimeReport::new(threshold, entries, Vec::new(), residuals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(delta: f64, delta1: f64, omega2: f64) -> SelectiveRamanParams {
        SelectiveRamanParams::new(
            C64::new(1.0, 0.0),
            C64::new(0.3, 0.4),
            C64::new(omega2, 0.0),
            delta,
            delta1,
            delta,
        )
        .unwrap()
    }

    #[test]
    fn k0_equal_detunings_gives_lambda() {
        let p = derive_selective(&base(10.0, 10.0, 0.1), 0).unwrap();
        assert!((p.omega1.norm() - 1.0).abs() < 1e-15);
        // phase of the input Ω₁ is kept
        assert!((p.omega1.arg() - C64::new(0.3, 0.4).arg()).abs() < 1e-15);
    }

    #[test]
    fn recipe_for_second_step() {
        let d = 10.0 * 2f64.sqrt();
        let omega1 = 2f64.sqrt();
        let p = derive_selective(&base(d, d, omega1 / 10.0), 1).unwrap();
        assert!((p.omega1.norm() - omega1).abs() < 1e-14);
        let xi = p.xi();
        assert!(p.phi(1).abs() <= 1e-10 * xi);
        assert!((p.phi(2) - xi).abs() < 1e-12);
        assert!((p.phi(0) + xi).abs() < 1e-12);
        assert!((p.small_delta() - p.varpi_e()).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_signs_are_rejected() {
        assert!(derive_selective(&base(10.0, -10.0, 0.1), 1).is_err());
        assert!(derive_selective(&base(1.0, 1.0, 0.6), 0).is_err());
    }

    #[test]
    fn full_hamiltonian_is_hermitian() {
        let p = derive_selective(&base(14.0, 14.0, 0.14), 1).unwrap();
        let layout = HilbertLayout::atom_field(3, 5).unwrap();
        let h = build_selective_full_hamiltonian(&p, &layout).unwrap();
        for t in [0.0, 0.3, 7.1] {
            assert!(h.at(t).hermiticity_deviation() < 1e-14);
        }
    }
}
