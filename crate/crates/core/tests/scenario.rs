use serde_json::{json, Value};

use fock_ladder::scenario::{load_scenario, preset, preset_json, run_scenario, sweep, RunOptions, ScenarioConfig};

fn preset_value(name: &str) -> Value {
    serde_json::from_str(preset_json(name).unwrap()).unwrap()
}

fn from_value(v: &Value) -> fock_ladder::Result<ScenarioConfig> {
    ScenarioConfig::from_json(&v.to_string())
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = preset_value("fig4");
    v["parameters"]["gama_engineered"] = json!(63.0);
    assert!(from_value(&v).unwrap_err().to_string().contains("gama_engineered"));

    let mut v = preset_value("fig4");
    v["colour"] = json!("red");
    assert!(from_value(&v).is_err());
}

#[test]
fn degenerate_grids_and_versions_are_rejected() {
    let mut v = preset_value("fig4");
    v["grid"]["t_end"] = json!(0.0);
    assert!(from_value(&v).is_err());

    let mut v = preset_value("fig4");
    v["grid"]["samples"] = json!(1);
    assert!(from_value(&v).is_err());

    let mut v = preset_value("fig4");
    v["schema_version"] = json!(99);
    assert!(from_value(&v).is_err());
}

#[test]
fn unknown_presets_are_validation_errors() {
    assert!(preset("fig5").is_err());
    let e = load_scenario("no-such-thing").unwrap_err();
    assert!(!e.is_numerical_guard());
}

#[test]
fn csv_is_deterministic() {
    let cfg = preset("fig6a").unwrap();
    let a = run_scenario(&cfg).unwrap().csv();
    let b = run_scenario(&cfg).unwrap().csv();
    assert_eq!(a, b);
    assert!(a.starts_with("gamma_t,"));
}

#[test]
fn full_raman_series_have_all_three_columns() {
    let out = run_scenario(&preset("fig2a").unwrap()).unwrap();
    let csv = out.csv();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("zeta_ref_t,"));
    for col in ["P_0_full", "P_0_engineered", "P_0_analytic", "P_2_full"] {
        assert!(header.split(',').any(|h| h == col), "{col} missing from {header}");
    }
    assert_eq!(csv.lines().count(), 402);
}

#[test]
fn hertz_rates_match_gamma_units() {
    let base = preset("fig4").unwrap();
    let mut v = preset_value("fig4");
    v["reference_rate"] = json!({ "unit": "Hz", "hz": 10.0 });
    v["parameters"]["gamma_engineered"] = json!(630.0);
    v["parameters"]["bath"]["gamma"] = json!(10.0);
    let hz = from_value(&v).unwrap();
    let a = run_scenario(&base).unwrap().summary;
    let b = run_scenario(&hz).unwrap().summary;
    for key in ["steady.F_3", "steady.Q", "final.Q", "final.mean_n"] {
        let (x, y) = (a.metric(key).unwrap(), b.metric(key).unwrap());
        assert!((x - y).abs() < 1e-9, "{key}: {x} vs {y}");
    }
}

#[test]
fn stronger_engineering_raises_the_target_population() {
    let cfg = preset("fig4").unwrap();
    let values = [1.0, 10.0, 63.0, 200.0];
    let r = sweep(&cfg, "parameters.gamma_engineered", &values).unwrap();
    let f: Vec<f64> = r.summaries.iter().map(|s| s.metric("steady.F_3").unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]), "{f:?}");
    assert!(r.to_csv().lines().count() == values.len() + 1);
}

#[test]
fn a_colder_bath_gives_a_purer_target() {
    let cfg = preset("fig4").unwrap();
    let r = sweep(&cfg, "parameters.bath.n_bar", &[0.0, 0.05]).unwrap();
    let f: Vec<f64> = r.summaries.iter().map(|s| s.metric("steady.F_3").unwrap()).collect();
    assert!(f[0] > f[1], "{f:?}");
    // Zero temperature: P_{n+1} (n + 1) γ = Γ P_n on the four-state ladder.
    let (g, mut p, mut z) = (63.0, 1.0, 1.0);
    for n in 0..3 {
        p *= g / (n as f64 + 1.0);
        z += p;
    }
    assert!((f[0] - p / z).abs() < 1e-6, "{} vs {}", f[0], p / z);
}

#[test]
fn single_value_sweep_matches_a_plain_run() {
    let cfg = preset("fig6b").unwrap();
    let r = sweep(&cfg, "parameters.bath.n_bar", &[0.05]).unwrap();
    let direct = run_scenario(&cfg).unwrap().summary;
    assert_eq!(r.summaries[0].metrics, direct.metrics);
}

#[test]
fn sweeps_reject_bad_paths() {
    let cfg = preset("fig4").unwrap();
    assert!(sweep(&cfg, "parameters.nope.n_bar", &[0.1]).is_err());
    assert!(sweep(&cfg, "parameters.target", &[2.5]).is_err());
}

#[test]
fn tighter_tolerance_keeps_the_engineered_run_on_the_analytic_curve() {
    let cfg = preset("fig2a").unwrap();
    let tight = RunOptions { rel_tol: Some(5e-11), ..RunOptions::default() }.apply(&cfg).unwrap();
    let a = run_scenario(&cfg).unwrap().summary;
    let b = run_scenario(&tight).unwrap().summary;
    let key = "max_dev_full_vs_engineered";
    assert!((a.metric(key).unwrap() - b.metric(key).unwrap()).abs() <= 1e-7);
    assert!(b.metric("max_dev_engineered_vs_analytic").unwrap() <= 1e-8);
}

#[test]
fn regime_tables_follow_the_threshold() {
    let loose = RunOptions { regime_threshold: Some(5.0), ..RunOptions::default() };
    let strict = RunOptions { regime_threshold: Some(20.0), ..RunOptions::default() };
    let cfg = preset("regime-check-fig3a").unwrap();
    assert_eq!(run_scenario(&loose.apply(&cfg).unwrap()).unwrap().summary.regime_pass(), Some(true));
    assert_eq!(run_scenario(&strict.apply(&cfg).unwrap()).unwrap().summary.regime_pass(), Some(false));
}

#[test]
fn small_cutoffs_trip_the_leakage_guard() {
    let cfg = RunOptions { cutoff: Some(4), ..RunOptions::default() }.apply(&preset("fig4").unwrap()).unwrap();
    match run_scenario(&cfg) {
        Err(e) => assert!(e.is_numerical_guard(), "{e}"),
        Ok(out) => panic!("expected a leakage error, got leakage {:?}", out.summary.metric("leakage")),
    }
}
