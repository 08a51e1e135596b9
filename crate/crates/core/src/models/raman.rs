//! Multi-branch Raman couplings between `g`, `e` and far-detuned auxiliary
//! levels: raw drive parameters, second-order effective couplings, resonance
//! solving and validity checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{PhasedHamiltonian, PhasedTerm};
use crate::models::CouplingKind;
use crate::operators::{annihilation, atomic_sigma, tensor, ComplexOperator, HilbertLayout, C64, ATOM, FIELD};

pub const GROUND: &str = "g";
pub const EXCITED: &str = "e";
/// Auxiliary levels in the order branches use them.
pub const AUX_LEVELS: [&str; 4] = ["f", "h", "i", "j"];

/// Sign of the exponent in `e^{±iΔt}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSign {
    Minus,
    Plus,
}

impl PhaseSign {
    pub fn value(self) -> f64 {
        match self {
            PhaseSign::Minus => -1.0,
            PhaseSign::Plus => 1.0,
        }
    }
}

/// Raw rates of one branch, in units of the reference rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchRates {
    pub lambda: f64,
    pub omega: f64,
    pub delta: f64,
    pub delta_tilde: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RamanBranch {
    pub lambda: f64,
    pub omega: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub sign_cavity: PhaseSign,
    pub sign_laser: PhaseSign,
    /// (upper, lower) levels driven by the cavity mode.
    pub cavity_transition: (String, String),
    /// (upper, lower) levels driven by the laser.
    pub laser_transition: (String, String),
}

impl RamanBranch {
    /// Frequency ω in the `h e^{−iωt}` convention used for second-order
    /// elimination: `e^{∓iΔt}` ↦ ω = ±Δ.
    pub fn cavity_frequency(&self) -> f64 {
        -self.sign_cavity.value() * self.delta
    }

    pub fn laser_frequency(&self) -> f64 {
        -self.sign_laser.value() * self.delta_tilde
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RamanLadderParams {
    branches: Vec<RamanBranch>,
    atom_levels: Vec<String>,
    kind: CouplingKind,
}

impl RamanLadderParams {
    pub fn new(kind: CouplingKind, branches: Vec<RamanBranch>) -> Result<Self> {
        let k = branches.len();
        if !(2..=4).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "{k} Raman branches given; 2, 3 or 4 are supported"
            )));
        }
        let (cavity_lower, laser_lower) = match kind {
            CouplingKind::Jc => (GROUND, EXCITED),
            CouplingKind::Ajc => (EXCITED, GROUND),
        };
        for (j, b) in branches.iter().enumerate() {
            if !(b.lambda > 0.0) {
                return Err(Error::InvalidArgument(format!("branch {j}: lambda must be > 0")));
            }
            if !(b.omega >= 0.0) {
                return Err(Error::InvalidArgument(format!("branch {j}: omega must be ≥ 0")));
            }
            if b.delta == 0.0 || b.delta_tilde == 0.0 || !b.delta.is_finite() || !b.delta_tilde.is_finite() {
                return Err(Error::ZeroDetuning { branch: j });
            }
            let aux = AUX_LEVELS[j];
            let expect_c = (aux.to_string(), cavity_lower.to_string());
            let expect_l = (aux.to_string(), laser_lower.to_string());
            if b.cavity_transition != expect_c || b.laser_transition != expect_l {
                return Err(Error::InvalidArgument(format!(
                    "branch {j}: {kind:?} needs cavity {expect_c:?} and laser {expect_l:?}"
                )));
            }
        }
        let mut atom_levels = vec![GROUND.to_string(), EXCITED.to_string()];
        atom_levels.extend(AUX_LEVELS[..k].iter().map(|s| s.to_string()));
        Ok(Self {
            branches,
            atom_levels,
            kind,
        })
    }

    /// Branch 1 carries `e^{−iΔ₁t}`, `e^{−iΔ̃₁t}`; every later branch carries
    /// `e^{+iΔⱼt}`, `e^{+iΔ̃ⱼt}`.
    ///
    /// In the five-level configuration the third branch couples through its
    /// own auxiliary level `i` (cavity `σ_ig a`, laser `σ_ie`) with its own Ω₃;
    /// a printed `σ_hg`/`σ_he` with Ω₂ in that row would contradict the level
    /// scheme, so it is read as `σ_ig`/`σ_ie` with Ω₃.
    pub fn standard(kind: CouplingKind, rates: &[BranchRates]) -> Result<Self> {
        let (cavity_lower, laser_lower) = match kind {
            CouplingKind::Jc => (GROUND, EXCITED),
            CouplingKind::Ajc => (EXCITED, GROUND),
        };
        if rates.len() > AUX_LEVELS.len() {
            return Err(Error::InvalidArgument(format!(
                "{} Raman branches given; 2, 3 or 4 are supported",
                rates.len()
            )));
        }
        let branches = rates
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let sign = if j == 0 { PhaseSign::Minus } else { PhaseSign::Plus };
                RamanBranch {
                    lambda: r.lambda,
                    omega: r.omega,
                    delta: r.delta,
                    delta_tilde: r.delta_tilde,
                    sign_cavity: sign,
                    sign_laser: sign,
                    cavity_transition: (AUX_LEVELS[j].to_string(), cavity_lower.to_string()),
                    laser_transition: (AUX_LEVELS[j].to_string(), laser_lower.to_string()),
                }
            })
            .collect();
        Self::new(kind, branches)
    }

    pub fn branches(&self) -> &[RamanBranch] {
        &self.branches
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn atom_levels(&self) -> Vec<&str> {
        self.atom_levels.iter().map(String::as_str).collect()
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn delta_tildes(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.delta_tilde).collect()
    }

    pub fn with_delta_tildes(&self, delta_tildes: &[f64]) -> Result<Self> {
        if delta_tildes.len() != self.branches.len() {
            return Err(Error::InvalidArgument("one laser detuning per branch required".into()));
        }
        let mut branches = self.branches.clone();
        for (b, &dt) in branches.iter_mut().zip(delta_tildes) {
            b.delta_tilde = dt;
        }
        Self::new(self.kind, branches)
    }

    /// Every rate multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let mut branches = self.branches.clone();
        for b in &mut branches {
            b.lambda *= s;
            b.omega *= s;
            b.delta *= s;
            b.delta_tilde *= s;
        }
        Self::new(self.kind, branches)
    }

    pub fn rates(&self) -> Vec<BranchRates> {
        self.branches
            .iter()
            .map(|b| BranchRates {
                lambda: b.lambda,
                omega: b.omega,
                delta: b.delta,
                delta_tilde: b.delta_tilde,
            })
            .collect()
    }
}

/// Second-order couplings of the eliminated auxiliary levels.
///
/// Branches are indexed from 0 here; branch `b` carries the 1-based label
/// `j = b + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedCouplings {
    /// λ₁²/Δ₁ − λ₂²/Δ₂
    pub chi: f64,
    /// Σ_{j≥3} λⱼ²/Δⱼ, zero for two branches.
    pub chi_tilde: f64,
    /// Ω₁²/Δ̃₁ − Ω₂²/Δ̃₂
    pub varpi: f64,
    /// Σ_{j≥3} Ωⱼ²/Δ̃ⱼ, zero for two branches.
    pub omega3_shift: f64,
    /// (λⱼΩⱼ/2)(1/Δⱼ + 1/Δ̃ⱼ)
    pub zeta: Vec<C64>,
    /// (−1)^{δ₁ⱼ}(Δ̃ⱼ − Δⱼ)
    pub theta: Vec<f64>,
}

impl DerivedCouplings {
    /// ξₙ = (n+1)χ − ϖ
    pub fn xi(&self, n: usize) -> f64 {
        (n as f64 + 1.0) * self.chi - self.varpi
    }

    /// Ξₙ = ξₙ − (n+1)χ̃ + Ω₃²/Δ̃₃
    pub fn big_xi(&self, n: usize) -> f64 {
        self.xi(n) - (n as f64 + 1.0) * self.chi_tilde + self.omega3_shift
    }

    pub fn phi(&self, n: usize, branch: usize) -> f64 {
        self.xi(n) + self.theta[branch]
    }

    pub fn big_phi(&self, n: usize, branch: usize) -> f64 {
        self.big_xi(n) + self.theta[branch]
    }

    /// ζₙ⁽ʲ⁾ = √(n+1) ζⱼ
    pub fn zeta_n(&self, n: usize, branch: usize) -> C64 {
        self.zeta[branch] * (n as f64 + 1.0).sqrt()
    }

    /// χ − χ̃, the dispersive ladder spacing.
    pub fn chi_eff(&self) -> f64 {
        self.chi - self.chi_tilde
    }

    pub fn num_branches(&self) -> usize {
        self.zeta.len()
    }

    /// Φ_{M+b}^{(b+1)} for every branch b: the conditions that put branch b
    /// on resonance with the step |M+b⟩ → |M+b+1⟩.
    pub fn resonance_residuals(&self, base: usize) -> Vec<f64> {
        (0..self.num_branches())
            .map(|b| self.big_phi(base + b, b))
            .collect()
    }
}

pub fn derive_couplings(params: &RamanLadderParams) -> Result<DerivedCouplings> {
    let mut chi = 0.0;
    let mut chi_tilde = 0.0;
    let mut varpi = 0.0;
    let mut omega3_shift = 0.0;
    let mut zeta = Vec::with_capacity(params.num_branches());
    let mut theta = Vec::with_capacity(params.num_branches());
    for (j, b) in params.branches().iter().enumerate() {
        if b.delta == 0.0 || b.delta_tilde == 0.0 {
            return Err(Error::ZeroDetuning { branch: j });
        }
        let wc = b.cavity_frequency();
        let wl = b.laser_frequency();
        let cav = b.lambda * b.lambda / wc;
        let las = b.omega * b.omega / wl;
        if j < 2 {
            chi += cav;
            varpi += las;
        } else {
            chi_tilde -= cav;
            omega3_shift -= las;
        }
        zeta.push(C64::new(
            0.5 * b.lambda * b.omega * (1.0 / b.delta + 1.0 / b.delta_tilde),
            0.0,
        ));
        theta.push(wc - wl);
    }
    Ok(DerivedCouplings {
        chi,
        chi_tilde,
        varpi,
        omega3_shift,
        zeta,
        theta,
    })
}

/// `H(t) = Σⱼ [λⱼ σ_{auxⱼ,·} a e^{±iΔⱼt} + Ωⱼ σ_{auxⱼ,·} e^{±iΔ̃ⱼt}] + H.c.`
pub fn build_full_hamiltonian(params: &RamanLadderParams, layout: &HilbertLayout) -> Result<PhasedHamiltonian> {
    let levels = params.atom_levels();
    let atom_dim = layout.factor_dim(ATOM)?;
    if atom_dim != levels.len() {
        return Err(Error::LayoutMismatch(format!(
            "atom factor has {atom_dim} levels, {} branches need {}",
            params.num_branches(),
            levels.len()
        )));
    }
    if layout.factors().len() != 2 || layout.factors()[0].label != ATOM || layout.factors()[1].label != FIELD {
        return Err(Error::LayoutMismatch("expected an atom ⊗ field layout".into()));
    }
    let cutoff = layout.field_cutoff().expect("field factor checked above");
    let a = annihilation(cutoff)?;
    let id_field = ComplexOperator::identity(&HilbertLayout::field(cutoff)?);
    let mut terms = Vec::new();
    for b in params.branches() {
        let cav = atomic_sigma(&b.cavity_transition.0, &b.cavity_transition.1, &levels)?;
        terms.push(PhasedTerm {
            op: tensor(&cav, &a).scale(C64::new(b.lambda, 0.0)),
            freq: b.sign_cavity.value() * b.delta,
        });
        if b.omega != 0.0 {
            let las = atomic_sigma(&b.laser_transition.0, &b.laser_transition.1, &levels)?;
            terms.push(PhasedTerm {
                op: tensor(&las, &id_field).scale(C64::new(b.omega, 0.0)),
                freq: b.sign_laser.value() * b.delta_tilde,
            });
        }
    }
    PhasedHamiltonian::new(ComplexOperator::zeros(layout), terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 200,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceSolution {
    pub params: RamanLadderParams,
    pub derived: DerivedCouplings,
    pub iterations: usize,
    /// Φ_{M+b}^{(b+1)} at the solution.
    pub residuals: Vec<f64>,
}

/// Adjust every laser detuning so that branch `b` is resonant with the step
/// `|M+b⟩ → |M+b+1⟩`.
///
/// θⱼ fixes Δ̃ⱼ, which feeds back through ϖ and the Ω₃²/Δ̃₃ shift, so the
/// conditions are iterated to a fixed point. The first update is taken in
/// full (exact whenever the shifts do not depend on Δ̃, e.g. with the lasers
/// off); later updates are damped.
pub fn solve_resonance(params: &RamanLadderParams, base: usize, cfg: &ResonanceConfig) -> Result<ResonanceSolution> {
    if !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(Error::InvalidArgument(format!("damping {} outside (0, 1]", cfg.damping)));
    }
    let mut current = params.clone();
    let mut last_change = f64::INFINITY;
    for iteration in 0..=cfg.max_iterations {
        let derived = derive_couplings(&current)?;
        let target: Vec<f64> = current
            .branches()
            .iter()
            .enumerate()
            .map(|(b, br)| {
                // θ = ω_c − ω_l = −s_c Δ + s_l Δ̃ must equal −Ξ_{M+b}
                let theta = -derived.big_xi(base + b);
                (theta + br.sign_cavity.value() * br.delta) / br.sign_laser.value()
            })
            .collect();
        let dts = current.delta_tildes();
        let scale = dts.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        last_change = target
            .iter()
            .zip(&dts)
            .fold(0.0f64, |m, (t, d)| m.max((t - d).abs()));
        if last_change <= cfg.tolerance * scale {
            let residuals = derived.resonance_residuals(base);
            return Ok(ResonanceSolution {
                params: current,
                derived,
                iterations: iteration,
                residuals,
            });
        }
        if iteration == cfg.max_iterations {
            break;
        }
        let step = if iteration == 0 { 1.0 } else { cfg.damping };
        let next: Vec<f64> = dts.iter().zip(&target).map(|(d, t)| d + step * (t - d)).collect();
        current = current.with_delta_tildes(&next)?;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        last_change,
    })
}

/// One validity condition: `ratio = large side / small side`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeEntry {
    pub name: String,
    #[serde(serialize_with = "serialize_ratio")]
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn serialize_ratio<S: serde::Serializer>(ratio: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if ratio.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*ratio)
    }
}

impl RegimeEntry {
    pub fn new(name: impl Into<String>, large: f64, small: f64, threshold: f64) -> Self {
        let ratio = if small == 0.0 { f64::INFINITY } else { large.abs() / small.abs() };
        Self {
            name: name.into(),
            ratio,
            threshold,
            pass: ratio >= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub threshold: f64,
    pub entries: Vec<RegimeEntry>,
    /// Same inequalities with the cavity/laser detuning roles exchanged.
    /// Reported for comparison only; they do not enter `pass`.
    pub alternate_orientation: Vec<RegimeEntry>,
    pub residuals: Vec<(String, f64)>,
    pub pass: bool,
}

impl RegimeReport {
    pub fn new(
        threshold: f64,
        entries: Vec<RegimeEntry>,
        alternate_orientation: Vec<RegimeEntry>,
        residuals: Vec<(String, f64)>,
    ) -> Self {
        let pass = entries.iter().all(|e| e.pass);
        Self {
            threshold,
            entries,
            alternate_orientation,
            residuals,
            pass,
        }
    }

    pub fn entry(&self, name: &str) -> Option<&RegimeEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("{:<44} {:>12} {:>10}  status\n", "condition", "ratio", "threshold");
        for e in &self.entries {
            out.push_str(&format!(
                "{:<44} {:>12.4} {:>10.2}  {}\n",
                e.name,
                e.ratio,
                e.threshold,
                if e.pass { "pass" } else { "FAIL" }
            ));
        }
        for e in &self.alternate_orientation {
            out.push_str(&format!(
                "{:<44} {:>12.4} {:>10.2}  ({})\n",
                e.name,
                e.ratio,
                e.threshold,
                if e.pass { "pass" } else { "fail" }
            ));
        }
        for (label, v) in &self.residuals {
            out.push_str(&format!("{label:<44} {v:>12.3e}\n"));
        }
        out.push_str(&format!("overall: {}\n", if self.pass { "pass" } else { "FAIL" }));
        out
    }
}

/// Adiabatic-elimination and ladder-hierarchy conditions for `base` = M.
pub fn check_regime(
    params: &RamanLadderParams,
    derived: &DerivedCouplings,
    base: usize,
    n_bar: f64,
    threshold: f64,
) -> RegimeReport {
    let photon = (n_bar + 1.0).sqrt();
    let mut entries = Vec::new();
    let mut alternate = Vec::new();
    for (b, br) in params.branches().iter().enumerate() {
        let j = b + 1;
        entries.push(RegimeEntry::new(
            format!("Delta{j}/(sqrt(nbar+1)*lambda{j})"),
            br.delta,
            photon * br.lambda,
            threshold,
        ));
        entries.push(RegimeEntry::new(
            format!("DeltaTilde{j}/Omega{j}"),
            br.delta_tilde,
            br.omega,
            threshold,
        ));
        alternate.push(RegimeEntry::new(
            format!("DeltaTilde{j}/(sqrt(nbar+1)*lambda{j})"),
            br.delta_tilde,
            photon * br.lambda,
            threshold,
        ));
        alternate.push(RegimeEntry::new(
            format!("Delta{j}/Omega{j}"),
            br.delta,
            br.omega,
            threshold,
        ));
    }
    let spacing = derived.chi_eff();
    // Branch b must stay off resonance with the neighbouring step, whose
    // coupling is ζ_{M+b+1}^{(b+1)} = √(M+b+2) ζ_{b+1}.
    for b in 0..derived.num_branches() {
        let n = base + b + 1;
        let j = b + 1;
        entries.push(RegimeEntry::new(
            format!("|chi-chi_tilde|/|zeta_{n}^({j})|"),
            spacing,
            derived.zeta_n(n, b).norm(),
            threshold,
        ));
    }
    let residuals = derived
        .resonance_residuals(base)
        .into_iter()
        .enumerate()
        .map(|(b, v)| (format!("Phi_{}^({})", base + b, b + 1), v))
        .collect();
    RegimeReport::new(threshold, entries, alternate, residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2a_rates(delta_tilde: [f64; 2]) -> Vec<BranchRates> {
        let omega1 = 1.0 / (5.0 * 2f64.sqrt());
        vec![
            BranchRates { lambda: 1.0, omega: omega1, delta: 10.0, delta_tilde: delta_tilde[0] },
            BranchRates {
                lambda: 1.0,
                omega: omega1 / (2.0 * 2f64.sqrt()),
                delta: 5.0,
                delta_tilde: delta_tilde[1],
            },
        ]
    }

    #[test]
    fn fig2a_chi_and_theta() {
        let p = RamanLadderParams::standard(CouplingKind::Jc, &fig2a_rates([9.9, 5.2])).unwrap();
        let d = derive_couplings(&p).unwrap();
        assert_relative_eq!(d.chi, 1.0 / 10.0 - 1.0 / 5.0, epsilon = 1e-15);
        assert_relative_eq!(d.chi, -0.1, epsilon = 1e-15);
        assert_relative_eq!(d.theta[0], 0.1, epsilon = 1e-13);
        assert_relative_eq!(d.theta[1], 0.2, epsilon = 1e-13);
        assert_eq!(d.chi_tilde, 0.0);
        assert_eq!(d.omega3_shift, 0.0);
    }

    #[test]
    fn no_laser_means_no_raman_coupling() {
        let rates: Vec<_> = fig2a_rates([9.9, 5.2])
            .into_iter()
            .map(|r| BranchRates { omega: 0.0, ..r })
            .collect();
        let d = derive_couplings(&RamanLadderParams::standard(CouplingKind::Jc, &rates).unwrap()).unwrap();
        assert_eq!(d.varpi, 0.0);
        assert!(d.zeta.iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn rejects_zero_detuning_and_bad_branch_count() {
        let mut rates = fig2a_rates([9.9, 5.2]);
        rates[1].delta_tilde = 0.0;
        assert!(matches!(
            RamanLadderParams::standard(CouplingKind::Jc, &rates),
            Err(Error::ZeroDetuning { branch: 1 })
        ));
        assert!(RamanLadderParams::standard(CouplingKind::Jc, &fig2a_rates([9.9, 5.2])[..1]).is_err());
    }

    #[test]
    fn decoupled_fixed_point_in_one_step() {
        let rates: Vec<_> = fig2a_rates([9.0, 6.0])
            .into_iter()
            .map(|r| BranchRates { omega: 0.0, ..r })
            .collect();
        let p = RamanLadderParams::standard(CouplingKind::Jc, &rates).unwrap();
        let d = derive_couplings(&p).unwrap();
        for base in [0usize, 3] {
            let sol = solve_resonance(&p, base, &ResonanceConfig::default()).unwrap();
            assert_eq!(sol.iterations, 1);
            let dt = sol.params.delta_tildes();
            assert_relative_eq!(dt[0], 10.0 + d.xi(base), epsilon = 1e-14);
            assert_relative_eq!(dt[1], 5.0 - d.xi(base + 1), epsilon = 1e-14);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = RamanLadderParams::standard(CouplingKind::Jc, &fig2a_rates([9.9, 5.2])).unwrap();
        let cfg = ResonanceConfig { max_iterations: 1, ..Default::default() };
        assert!(matches!(solve_resonance(&p, 0, &cfg), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn regime_ratios_for_fig2a() {
        let p = RamanLadderParams::standard(CouplingKind::Jc, &fig2a_rates([9.9, 5.2])).unwrap();
        let d = derive_couplings(&p).unwrap();
        let r = check_regime(&p, &d, 0, 0.0, 10.0);
        let e = r.entry("Delta1/(sqrt(nbar+1)*lambda1)").unwrap();
        assert_relative_eq!(e.ratio, 10.0);
        assert!(e.pass);
        let r20 = check_regime(&p, &d, 0, 0.0, 20.0);
        let e2 = r20.entry("Delta2/(sqrt(nbar+1)*lambda2)").unwrap();
        assert_relative_eq!(e2.ratio, 5.0);
        assert!(!e2.pass);
        assert!(!r20.pass);
        // |χ| against √2|ζ₁| and √3|ζ₂|, evaluated by hand
        let omega1 = 1.0 / (5.0 * 2f64.sqrt());
        let z1 = 0.5 * omega1 * (1.0 / 10.0 + 1.0 / 9.9);
        let z2 = 0.5 * (omega1 / 8f64.sqrt()) * (1.0 / 5.0 + 1.0 / 5.2);
        let h1 = r.entry("|chi-chi_tilde|/|zeta_1^(1)|").unwrap();
        let h2 = r.entry("|chi-chi_tilde|/|zeta_2^(2)|").unwrap();
        assert_relative_eq!(h1.ratio, 0.1 / (2f64.sqrt() * z1), max_relative = 1e-12);
        assert_relative_eq!(h2.ratio, 0.1 / (3f64.sqrt() * z2), max_relative = 1e-12);
        assert!(h1.ratio < 5.0 && h2.ratio > 5.0);
    }

    #[test]
    fn zero_zeta_hierarchy_is_infinite() {
        let rates: Vec<_> = fig2a_rates([9.9, 5.2])
            .into_iter()
            .map(|r| BranchRates { omega: 0.0, ..r })
            .collect();
        let p = RamanLadderParams::standard(CouplingKind::Jc, &rates).unwrap();
        let d = derive_couplings(&p).unwrap();
        let r = check_regime(&p, &d, 0, 0.0, 10.0);
        for e in r.entries.iter().filter(|e| e.name.starts_with("|chi")) {
            assert!(e.ratio.is_infinite() && e.pass);
        }
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"inf\""));
    }
}
