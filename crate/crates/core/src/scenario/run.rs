//! Scenario execution: builds the model a config names, evolves it and
//! collects the series and summary metrics.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dynamics::{evolve_density, evolve_state, liouvillian_matrix, steady_state, LindbladTerm, TimeGrid};
use crate::error::{Error, Result};
use crate::models::ladder::LadderMode;
use crate::models::raman::{EXCITED, GROUND};
use crate::models::selective::SELECTIVE_LEVELS;
use crate::models::{
    analytic_probabilities, build_engineered_hamiltonian, build_full_hamiltonian, build_selective_full_hamiltonian,
    check_regime, derive_couplings, derive_selective, ladder_from_conditions, selective_regime, solve_resonance,
    BranchRates, CouplingKind, LadderSpec, RamanLadderParams, RegimeReport, SelectiveRamanParams,
};
use crate::hamiltonian::PhasedHamiltonian;
use crate::observables::{
    detect_steady, fock_probabilities, mandel_q_from_probabilities, trace_distance, ObservableSeries,
};
use crate::operators::{DensityOperator, HilbertLayout, StateVector, C64};
use crate::reservoir::{
    collision_model_evolve, selective_dissipators, thermal_terms, ub_dissipator, AtomInjectionParams,
    ThermalBathParams,
};

use super::config::{
    parse_params, Action, AnchorTarget, CollisionConfig, EngineeredLadderConfig, FullRamanConfig, InitialState,
    ModelKind, OutputKind, RateUnit, ReferenceRate, ScenarioConfig, SelectiveLiouvillianConfig,
    SelectiveRamanConfig, SteadyDetection, UbLiouvillianConfig, WeightsMode,
};

/// Command-line style overrides applied on top of a config.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub cutoff: Option<usize>,
    pub rel_tol: Option<f64>,
    pub regime_threshold: Option<f64>,
}

impl RunOptions {
    pub fn apply(&self, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
        let mut cfg = cfg.clone();
        if let Some(c) = self.cutoff {
            cfg.cutoff = c;
        }
        if let Some(tol) = self.rel_tol {
            cfg.integrator.rel_tol = tol;
            cfg.integrator.abs_tol = cfg.integrator.abs_tol.min(tol * 1e-2);
        }
        if let Some(thr) = self.regime_threshold {
            if let Some(obj) = cfg.parameters.as_object_mut() {
                if matches!(cfg.model, ModelKind::FullRaman | ModelKind::SelectiveRaman) {
                    obj.insert("regime_threshold".into(), json!(thr));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub metric: String,
    pub target: f64,
    pub tol: f64,
    pub actual: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub model: ModelKind,
    pub action: Action,
    pub reference_rate: ReferenceRate,
    pub time_column: String,
    pub metrics: BTreeMap<String, f64>,
    pub details: Map<String, Value>,
    pub steady_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor_figure: Option<String>,
    pub checks: Vec<CheckResult>,
}

impl RunSummary {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Regime verdict for `regime` runs, `None` otherwise.
    pub fn regime_pass(&self) -> Option<bool> {
        self.metric("regime.pass").map(|v| v == 1.0)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub series: ObservableSeries,
    pub summary: RunSummary,
}

impl RunOutput {
    pub fn csv(&self) -> String {
        self.series.to_csv(&self.summary.time_column)
    }
}

struct Collected {
    series: ObservableSeries,
    time_column: String,
    metrics: BTreeMap<String, f64>,
    details: Map<String, Value>,
    steady_time: Option<f64>,
}

impl Collected {
    fn new(times: Vec<f64>, time_column: &str) -> Self {
        Self {
            series: ObservableSeries::new(times),
            time_column: time_column.to_string(),
            metrics: BTreeMap::new(),
            details: Map::new(),
            steady_time: None,
        }
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    fn detail(&mut self, key: &str, v: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(v).expect("detail serializes"));
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let c = match cfg.model {
        ModelKind::FullRaman => run_full_raman(cfg)?,
        ModelKind::SelectiveRaman => run_selective_raman(cfg)?,
        ModelKind::EngineeredLadder => run_engineered(cfg)?,
        ModelKind::UbLiouvillian => run_ub(cfg)?,
        ModelKind::SelectiveLiouvillian => run_selective_liouvillian(cfg)?,
        ModelKind::CollisionModel => run_collision(cfg)?,
    };
    let checks = cfg
        .anchor
        .iter()
        .flat_map(|a| a.targets.iter())
        .filter_map(|t| check_target(t, &c.metrics))
        .collect();
    Ok(RunOutput {
        series: c.series,
        summary: RunSummary {
            name: cfg.name.clone(),
            model: cfg.model,
            action: cfg.action,
            reference_rate: cfg.reference_rate,
            time_column: c.time_column,
            metrics: c.metrics,
            details: c.details,
            steady_time: c.steady_time,
            anchor_figure: cfg.anchor.as_ref().map(|a| a.figure.clone()),
            checks,
        },
    })
}

fn check_target(t: &AnchorTarget, metrics: &BTreeMap<String, f64>) -> Option<CheckResult> {
    let tol = t.tol?;
    let actual = metrics.get(&t.metric).copied();
    Some(CheckResult {
        metric: t.metric.clone(),
        target: t.value,
        tol,
        actual,
        pass: actual.is_some_and(|a| (a - t.value).abs() <= tol),
    })
}

fn dissipative_time_column(unit: RateUnit) -> &'static str {
    match unit {
        RateUnit::Gamma => "gamma_t",
        RateUnit::Lambda1 => "lambda1_t",
        RateUnit::Hz => "ref_t",
    }
}

const LADDER_TIME: &str = "zeta_ref_t";

/// Atom ⊗ field product state on the given atom labels.
fn product_state(init: &InitialState, levels: &[&str], cutoff: usize) -> Result<StateVector> {
    let InitialState::Product { field, atom } = init else {
        return Err(Error::validation("initial_state", "this model needs a product atom ⊗ field state"));
    };
    let amps: Vec<(usize, C64)> = field.iter().map(|&(n, re, im)| (n, C64::new(re, im))).collect();
    let f = StateVector::fock_superposition(cutoff, &amps)
        .map_err(|e| Error::validation("initial_state.field", e.to_string()))?;
    let mut a = DVector::zeros(levels.len());
    for (label, re, im) in atom {
        let idx = levels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::validation("initial_state.atom", format!("unknown level `{label}`")))?;
        a[idx] += C64::new(*re, *im);
    }
    let a = StateVector::new(HilbertLayout::atom(levels.len())?, a)
        .map_err(|e| Error::validation("initial_state.atom", e.to_string()))?;
    Ok(a.tensor(&f))
}

fn field_density(init: &InitialState, cutoff: usize) -> Result<DensityOperator> {
    let v = |e: Error| Error::validation("initial_state", e.to_string());
    match init {
        InitialState::Fock { n } => DensityOperator::fock(cutoff, *n).map_err(v),
        InitialState::Thermal { n_bar } => DensityOperator::thermal(cutoff, *n_bar).map_err(v),
        InitialState::Product { field, atom } => {
            if !atom.is_empty() {
                return Err(Error::validation("initial_state.atom", "field-only model: leave `atom` empty"));
            }
            let amps: Vec<(usize, C64)> = field.iter().map(|&(n, re, im)| (n, C64::new(re, im))).collect();
            Ok(StateVector::fock_superposition(cutoff, &amps).map_err(v)?.to_density())
        }
    }
}

fn scaled_grid(grid: &TimeGrid, unit_rate: f64) -> Result<TimeGrid> {
    TimeGrid::new(grid.t_start / unit_rate, grid.t_end / unit_rate, grid.samples)
}

fn populations<S: crate::operators::QuantumState>(states: &[S]) -> Result<Vec<Vec<f64>>> {
    states.iter().map(fock_probabilities).collect()
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>], levels: impl Iterator<Item = usize> + Clone) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(pa, pb)| levels.clone().map(move |n| (pa[n] - pb[n]).abs()))
        .fold(0.0, f64::max)
}

fn default_levels(base: usize, steps: usize, cutoff: usize) -> Vec<usize> {
    (base.saturating_sub(1)..=(base + steps + 1).min(cutoff)).collect()
}

fn check_levels(levels: &[usize], cutoff: usize) -> Result<()> {
    match levels.iter().find(|&&n| n > cutoff) {
        Some(n) => Err(Error::validation("parameters.levels", format!("level {n} above cutoff {cutoff}"))),
        None => Ok(()),
    }
}

fn push_pop_columns(c: &mut Collected, pops: &[Vec<f64>], levels: &[usize], suffix: &str) -> Result<()> {
    for &n in levels {
        c.series.push_column(format!("P_{n}{suffix}"), pops.iter().map(|p| p[n]).collect())?;
    }
    Ok(())
}

fn regime_metrics(c: &mut Collected, report: &RegimeReport) {
    c.metric("regime.pass", if report.pass { 1.0 } else { 0.0 });
    for e in &report.entries {
        c.metric(format!("regime.{}", e.name), e.ratio);
    }
    for (label, v) in &report.residuals {
        c.metric(format!("residual.{label}"), *v);
    }
    c.detail("regime", report);
    c.detail("regime_table", report.render_table());
}

fn hz_metric(c: &mut Collected, cfg: &ScenarioConfig, key: &str, value: f64) {
    if let Some(hz) = cfg.reference_rate.hz {
        c.metric(format!("{key}_hz"), value * hz);
    }
}

fn run_full_raman(cfg: &ScenarioConfig) -> Result<Collected> {
    let p: FullRamanConfig = parse_params(&cfg.parameters)?;
    let s = cfg.rate_scale();
    let rates: Vec<BranchRates> = p
        .branches
        .iter()
        .map(|b| BranchRates {
            lambda: b.lambda * s,
            omega: b.omega * s,
            delta: b.delta * s,
            delta_tilde: b.delta_tilde * s,
        })
        .collect();
    let literal = RamanLadderParams::standard(p.kind, &rates)?;
    let (params, derived, iterations) = if p.solve_resonance {
        let sol = solve_resonance(&literal, p.base, &p.resonance)?;
        (sol.params, sol.derived, Some(sol.iterations))
    } else {
        let d = derive_couplings(&literal)?;
        (literal, d, None)
    };
    let report = check_regime(&params, &derived, p.base, p.n_bar, p.regime_threshold);

    let mut c = Collected::new(Vec::new(), LADDER_TIME);
    c.detail("derived_couplings", &derived);
    c.detail("delta_tildes", params.delta_tildes());
    if let Some(it) = iterations {
        c.metric("resonance.iterations", it as f64);
    }
    for (b, dt) in params.delta_tildes().iter().enumerate() {
        c.metric(format!("delta_tilde_{}", b + 1), *dt);
    }
    c.metric("chi", derived.chi);
    c.metric("chi_eff", derived.chi_eff());
    for b in 0..derived.num_branches() {
        let z = derived.zeta[b].norm();
        c.metric(format!("zeta_{}", b + 1), z);
        hz_metric(&mut c, cfg, &format!("zeta_{}", b + 1), z);
    }
    regime_metrics(&mut c, &report);
    if cfg.action == Action::Regime {
        return Ok(c);
    }

    let steps = params.num_branches();
    let zeta_ref = derived.zeta_n(p.base, 0);
    let spec = match p.engineered_weights {
        WeightsMode::Derived => {
            let mode = if p.base == 0 { LadderMode::UpperBounded } else { LadderMode::Sliced };
            ladder_from_conditions(&derived, mode, p.base, steps, p.kind)?
        }
        WeightsMode::Unit => LadderSpec::unit(p.base, steps, zeta_ref, p.kind)?,
    };
    let zr = zeta_ref.norm();
    if zr == 0.0 {
        return Err(Error::validation("parameters.branches", "zeta_ref vanishes: no ladder to follow"));
    }
    c.metric("zeta_ref", zr);
    hz_metric(&mut c, cfg, "zeta_ref", zr);
    c.detail(
        "engineered_weights",
        spec.weights().iter().map(|w| [w.re, w.im]).collect::<Vec<_>>(),
    );

    let grid = scaled_grid(&cfg.grid, zr)?;
    let cutoff = cfg.cutoff;
    let full_layout = HilbertLayout::atom_field(steps + 2, cutoff)?;
    let h_full = build_full_hamiltonian(&params, &full_layout)?;
    let psi_full = product_state(&cfg.initial_state, &params.atom_levels(), cutoff)?;
    let full = evolve_state(&h_full, &psi_full, &grid, &cfg.integrator)?;

    let eng_layout = HilbertLayout::atom_field(2, cutoff)?;
    let h_eng = PhasedHamiltonian::constant(build_engineered_hamiltonian(&spec, &eng_layout)?)?;
    let psi_eng = product_state(&cfg.initial_state, &[GROUND, EXCITED], cutoff)?;
    let eng = evolve_state(&h_eng, &psi_eng, &grid, &cfg.integrator)?;

    let p_full = populations(&full.states)?;
    let p_eng = populations(&eng.states)?;
    let levels = p.levels.clone().unwrap_or_else(|| default_levels(p.base, steps, cutoff));
    check_levels(&levels, cutoff)?;

    c.series = ObservableSeries::new(cfg.grid.times());
    push_pop_columns(&mut c, &p_full, &levels, "_full")?;
    push_pop_columns(&mut c, &p_eng, &levels, "_engineered")?;
    c.metric("max_dev_full_vs_engineered", max_abs_diff(&p_full, &p_eng, 0..=cutoff));
    let window = p.base..=p.base + steps;
    let outside = p_full
        .iter()
        .flat_map(|pn| pn.iter().enumerate().filter(|(n, _)| !window.contains(n)).map(|(_, v)| *v))
        .fold(0.0, f64::max);
    c.metric("max_out_of_subspace_full", outside);
    c.metric("leakage_full", full.leakage);
    c.metric("leakage_engineered", eng.leakage);
    c.metric(
        "norm_drift_full",
        full.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max),
    );

    if let Some(preset) = p.analytic {
        let an = analytic_probabilities(preset, &cfg.grid.times());
        let an: Vec<Vec<f64>> = an.iter().map(|r| r.to_vec()).collect();
        let an_levels: Vec<usize> = levels.iter().copied().filter(|&n| n < an[0].len()).collect();
        push_pop_columns(&mut c, &an, &an_levels, "_analytic")?;
        let m = an[0].len().min(cutoff + 1);
        c.metric("max_dev_full_vs_analytic", max_abs_diff(&p_full, &an, 0..m));
        c.metric("max_dev_engineered_vs_analytic", max_abs_diff(&p_eng, &an, 0..m));
    }
    Ok(c)
}

fn selective_params(p: &SelectiveRamanConfig, s: f64) -> Result<SelectiveRamanParams> {
    let lambda = C64::new(p.lambda * s, 0.0);
    let omega2 = C64::new(p.omega2 * s, 0.0);
    if p.derive {
        let omega1 = C64::new(p.omega1.unwrap_or(0.0) * s, 0.0);
        let seed = SelectiveRamanParams::new(lambda, omega1, omega2, p.delta * s, p.delta1 * s, p.delta * s)?;
        derive_selective(&seed, p.k)
    } else {
        let (Some(o1), Some(d2)) = (p.omega1, p.delta2) else {
            return Err(Error::validation("parameters", "omega1 and delta2 are required when derive is off"));
        };
        SelectiveRamanParams::new(lambda, C64::new(o1 * s, 0.0), omega2, p.delta * s, p.delta1 * s, d2 * s)
    }
}

fn run_selective_raman(cfg: &ScenarioConfig) -> Result<Collected> {
    let p: SelectiveRamanConfig = parse_params(&cfg.parameters)?;
    let params = selective_params(&p, cfg.rate_scale())?;
    let report = selective_regime(&params, p.k, p.n_bar, p.regime_threshold);
    let mut c = Collected::new(Vec::new(), LADDER_TIME);
    c.detail("selective_params", &params);
    c.metric("omega1", params.omega1.norm());
    c.metric("delta2", params.delta2);
    c.metric("xi", params.xi());
    let zk = params.zeta_n(p.k).norm();
    c.metric("zeta_k", zk);
    hz_metric(&mut c, cfg, "zeta_k", zk);
    regime_metrics(&mut c, &report);
    if cfg.action == Action::Regime {
        return Ok(c);
    }
    if zk == 0.0 {
        return Err(Error::validation("parameters", "zeta_k vanishes"));
    }
    let cutoff = cfg.cutoff;
    let grid = scaled_grid(&cfg.grid, zk)?;
    let full_layout = HilbertLayout::atom_field(SELECTIVE_LEVELS.len(), cutoff)?;
    let h_full = build_selective_full_hamiltonian(&params, &full_layout)?;
    let full = evolve_state(&h_full, &product_state(&cfg.initial_state, &SELECTIVE_LEVELS, cutoff)?, &grid, &cfg.integrator)?;

    let spec = LadderSpec::unit(p.k, 1, C64::new(zk, 0.0), CouplingKind::Jc)?;
    let eng_layout = HilbertLayout::atom_field(2, cutoff)?;
    let h_eng = PhasedHamiltonian::constant(build_engineered_hamiltonian(&spec, &eng_layout)?)?;
    let eng = evolve_state(&h_eng, &product_state(&cfg.initial_state, &[GROUND, EXCITED], cutoff)?, &grid, &cfg.integrator)?;

    let p_full = populations(&full.states)?;
    let p_eng = populations(&eng.states)?;
    let levels = p.levels.clone().unwrap_or_else(|| default_levels(p.k, 1, cutoff));
    check_levels(&levels, cutoff)?;
    c.series = ObservableSeries::new(cfg.grid.times());
    push_pop_columns(&mut c, &p_full, &levels, "_full")?;
    push_pop_columns(&mut c, &p_eng, &levels, "_engineered")?;
    c.metric("max_dev_full_vs_engineered", max_abs_diff(&p_full, &p_eng, 0..=cutoff));
    c.metric("leakage_full", full.leakage);
    Ok(c)
}

fn run_engineered(cfg: &ScenarioConfig) -> Result<Collected> {
    let p: EngineeredLadderConfig = parse_params(&cfg.parameters)?;
    let spec = p.ladder.to_spec()?;
    let spec = spec.with_zeta_ref(spec.zeta_ref() * cfg.rate_scale());
    let zr = spec.zeta_ref().norm();
    if zr == 0.0 {
        return Err(Error::validation("parameters.ladder.zeta_ref", "must be nonzero"));
    }
    let cutoff = cfg.cutoff;
    let layout = HilbertLayout::atom_field(2, cutoff)?;
    let h = PhasedHamiltonian::constant(build_engineered_hamiltonian(&spec, &layout)?)?;
    let psi = product_state(&cfg.initial_state, &[GROUND, EXCITED], cutoff)?;
    let traj = evolve_state(&h, &psi, &scaled_grid(&cfg.grid, zr)?, &cfg.integrator)?;
    let pops = populations(&traj.states)?;
    let levels = p.levels.clone().unwrap_or_else(|| default_levels(spec.base(), spec.steps(), cutoff));
    check_levels(&levels, cutoff)?;

    let mut c = Collected::new(cfg.grid.times(), LADDER_TIME);
    c.metric("zeta_ref", zr);
    hz_metric(&mut c, cfg, "zeta_ref", zr);
    push_pop_columns(&mut c, &pops, &levels, "")?;
    c.metric("leakage", traj.leakage);
    if let Some(preset) = p.analytic {
        let an: Vec<Vec<f64>> = analytic_probabilities(preset, &cfg.grid.times()).iter().map(|r| r.to_vec()).collect();
        let an_levels: Vec<usize> = levels.iter().copied().filter(|&n| n < an[0].len()).collect();
        push_pop_columns(&mut c, &an, &an_levels, "_analytic")?;
        c.metric("max_dev_vs_analytic", max_abs_diff(&pops, &an, 0..an[0].len().min(cutoff + 1)));
    }
    Ok(c)
}

fn scaled_bath(b: &ThermalBathParams, s: f64) -> Result<ThermalBathParams> {
    ThermalBathParams::new(b.gamma * s, b.n_bar).map_err(|e| Error::validation("parameters.bath", e.to_string()))
}

/// Evolution plus null-space steady state of a field-only Lindbladian.
fn run_field_lindblad(
    cfg: &ScenarioConfig,
    terms: &[LindbladTerm],
    target: usize,
    want_steady: bool,
    detect: Option<SteadyDetection>,
) -> Result<Collected> {
    let rho0 = field_density(&cfg.initial_state, cfg.cutoff)?;
    let traj = evolve_density(None, terms, &rho0, &cfg.grid, &cfg.integrator)?;
    let pops = populations(&traj.states)?;
    let mut c = Collected::new(cfg.grid.times(), dissipative_time_column(cfg.reference_rate.unit));
    add_density_columns(&mut c, cfg, &traj.states, &pops, target)?;

    let last = traj.states.last().expect("grid has samples");
    let final_p = pops.last().expect("grid has samples");
    c.metric(format!("final.F_{target}"), final_p[target]);
    q_metric(&mut c, "final.Q", final_p);
    c.metric("final.mean_n", mean(final_p));
    c.metric("leakage", traj.leakage);
    c.metric(
        "max_trace_error",
        traj.states.iter().map(|s| (s.trace().re - 1.0).abs()).fold(0.0, f64::max),
    );
    c.metric(
        "min_eigenvalue",
        traj.states.iter().map(|s| s.min_eigenvalue()).fold(f64::INFINITY, f64::min),
    );

    if want_steady {
        let l = liouvillian_matrix(None, terms)?;
        c.metric("liouvillian.trace_defect", l.trace_defect());
        let ss = steady_state(&l)?;
        let sp = fock_probabilities(&ss)?;
        c.metric(format!("steady.F_{target}"), sp[target]);
        q_metric(&mut c, "steady.Q", &sp);
        c.metric("steady.mean_n", mean(&sp));
        c.metric("steady.purity", ss.purity());
        c.metric("steady.trace_distance_to_final", trace_distance(&ss, last)?);
        c.detail("steady_populations", &sp);
    }
    if let Some(d) = detect {
        c.steady_time = detect_steady(&c.series, d.window, d.eps)?;
        if let Some(t) = c.steady_time {
            c.metric("steady_time", t);
        }
    }
    Ok(c)
}

fn mean(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, v)| n as f64 * v).sum()
}

fn q_or_nan(p: &[f64]) -> f64 {
    mandel_q_from_probabilities(p).unwrap_or(f64::NAN)
}

/// Mandel Q is left out of the metrics when `⟨n⟩` is too small to define it.
fn q_metric(c: &mut Collected, key: &str, p: &[f64]) {
    match mandel_q_from_probabilities(p) {
        Ok(q) => c.metric(key, q),
        Err(e) => c.detail(key, e.to_string()),
    }
}

fn add_density_columns(
    c: &mut Collected,
    cfg: &ScenarioConfig,
    states: &[DensityOperator],
    pops: &[Vec<f64>],
    target: usize,
) -> Result<()> {
    for out in &cfg.outputs {
        match out {
            OutputKind::Fock => push_pop_columns(c, pops, &(0..=cfg.cutoff).collect::<Vec<_>>(), "")?,
            OutputKind::Fidelity => c.series.push_column(format!("F_{target}"), pops.iter().map(|p| p[target]).collect())?,
            OutputKind::MandelQ => c.series.push_column("Q", pops.iter().map(|p| q_or_nan(p)).collect())?,
            OutputKind::MeanN => c.series.push_column("mean_n", pops.iter().map(|p| mean(p)).collect())?,
            OutputKind::Purity => c.series.push_column("purity", states.iter().map(|s| s.purity()).collect())?,
        }
    }
    Ok(())
}

fn run_ub(cfg: &ScenarioConfig) -> Result<Collected> {
    let p: UbLiouvillianConfig = parse_params(&cfg.parameters)?;
    let s = cfg.rate_scale();
    let spec = p.ladder.to_spec()?;
    let layout = HilbertLayout::field(cfg.cutoff)?;
    let mut terms = ub_dissipator(&spec, p.gamma_engineered * s, &layout)?.terms;
    terms.extend(thermal_terms(&scaled_bath(&p.bath, s)?, &layout)?);
    run_field_lindblad(cfg, &terms, p.target, p.steady_state, p.detect)
}

fn run_selective_liouvillian(cfg: &ScenarioConfig) -> Result<Collected> {
    let p: SelectiveLiouvillianConfig = parse_params(&cfg.parameters)?;
    let s = cfg.rate_scale();
    let layout = HilbertLayout::field(cfg.cutoff)?;
    let channels: Vec<(usize, f64)> = p.channels.iter().map(|&(k, g)| (k, g * s)).collect();
    let mut terms = selective_dissipators(&channels, &layout)?.terms;
    terms.extend(thermal_terms(&scaled_bath(&p.bath, s)?, &layout)?);
    run_field_lindblad(cfg, &terms, p.target, p.steady_state, p.detect)
}

fn run_collision(cfg: &ScenarioConfig) -> Result<Collected> {
    let p: CollisionConfig = parse_params(&cfg.parameters)?;
    let s = cfg.rate_scale();
    let gamma = p.gamma_engineered * s;
    let zeta = gamma / p.zeta_tau;
    let tau = p.zeta_tau * p.zeta_tau / gamma;
    let spec = p.ladder.to_spec()?.with_zeta_ref(C64::new(zeta, 0.0));
    let bath = scaled_bath(&p.bath, s)?;
    let cutoff = cfg.cutoff;
    let levels = [GROUND, EXCITED];
    let atom_idx = levels
        .iter()
        .position(|l| *l == p.atom)
        .ok_or_else(|| Error::validation("parameters.atom", format!("expected g or e, got `{}`", p.atom)))?;
    let atom = StateVector::basis(&HilbertLayout::atom(2)?, atom_idx)?;
    let n_atoms = (cfg.grid.t_end / tau).round() as usize;
    if n_atoms == 0 {
        return Err(Error::validation("grid.t_end", "shorter than one transit"));
    }

    let joint = HilbertLayout::atom_field(2, cutoff)?;
    let h = build_engineered_hamiltonian(&spec, &joint)?;
    let rho0 = field_density(&cfg.initial_state, cutoff)?;
    let inj = AtomInjectionParams::back_to_back(tau, atom)?;
    let coll = collision_model_evolve(&h, &inj, &bath, &rho0, n_atoms, &cfg.integrator)?;

    // Coarse-grained counterpart: excited JC atoms (or ground AJC atoms) pump A†,
    // the opposite pairing pumps A.
    let field_layout = HilbertLayout::field(cutoff)?;
    let mut terms = ub_dissipator(&spec, gamma, &field_layout)?.terms;
    let pumps_up = (spec.kind() == CouplingKind::Jc) == (p.atom == EXCITED);
    if !pumps_up {
        terms[0] = LindbladTerm::new(gamma, terms[0].jump.adjoint())?;
    }
    terms.extend(thermal_terms(&bath, &field_layout)?);
    let grid = TimeGrid::new(0.0, n_atoms as f64 * tau, n_atoms + 1)?;
    let master = evolve_density(None, &terms, &rho0, &grid, &cfg.integrator)?;

    let pc = populations(&coll.states)?;
    let pm = populations(&master.states)?;
    let dist: Vec<f64> = coll
        .states
        .iter()
        .zip(&master.states)
        .map(|(a, b)| trace_distance(a, b))
        .collect::<Result<_>>()?;
    let target = p.target;
    let mut c = Collected::new(coll.times.clone(), dissipative_time_column(cfg.reference_rate.unit));
    c.series.push_column(format!("F_{target}_collision"), pc.iter().map(|v| v[target]).collect())?;
    c.series.push_column(format!("F_{target}_master"), pm.iter().map(|v| v[target]).collect())?;
    c.series.push_column("Q_collision", pc.iter().map(|v| q_or_nan(v)).collect())?;
    c.series.push_column("Q_master", pm.iter().map(|v| q_or_nan(v)).collect())?;
    c.series.push_column("trace_distance", dist.clone())?;
    c.metric("zeta", zeta);
    c.metric("tau", tau);
    c.metric("zeta_tau", p.zeta_tau);
    c.metric("n_atoms", n_atoms as f64);
    c.metric("max_trace_distance", dist.iter().copied().fold(0.0, f64::max));
    c.metric(format!("final.F_{target}_collision"), pc.last().expect("samples")[target]);
    c.metric(format!("final.F_{target}_master"), pm.last().expect("samples")[target]);
    c.metric("leakage", coll.leakage.max(master.leakage));
    let all = || coll.states.iter().chain(&master.states);
    c.metric("max_trace_error", all().map(|s| (s.trace().re - 1.0).abs()).fold(0.0, f64::max));
    c.metric("min_eigenvalue", all().map(|s| s.min_eigenvalue()).fold(f64::INFINITY, f64::min));
    Ok(c)
}
