//! Field diagnostics: Fock populations, fidelity, photon statistics,
//! distances, and steady-state detection on sampled series.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{hermitian_eigenvalues, DensityOperator, QuantumState, FIELD};

/// Below this mean photon number Mandel Q is reported as undefined.
pub const MANDEL_MEAN_THRESHOLD: f64 = 1e-9;

/// `P_n = ⟨n|Tr_atom ρ|n⟩`.
pub fn fock_probabilities<S: QuantumState>(state: &S) -> Result<Vec<f64>> {
    let pos = state.layout().position(FIELD)?;
    Ok(state.reduced_populations(pos))
}

pub fn fidelity_fock<S: QuantumState>(state: &S, n: usize) -> Result<f64> {
    let p = fock_probabilities(state)?;
    p.get(n).copied().ok_or(Error::IndexOutOfRange {
        index: n,
        cutoff: p.len() - 1,
    })
}

fn moments(p: &[f64]) -> (f64, f64) {
    p.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (n, pn)| {
        let n = n as f64;
        (m1 + n * pn, m2 + n * n * pn)
    })
}

pub fn mean_photon<S: QuantumState>(state: &S) -> Result<f64> {
    Ok(moments(&fock_probabilities(state)?).0)
}

/// `Q = (⟨n²⟩ − ⟨n⟩² − ⟨n⟩)/⟨n⟩`.
pub fn mandel_q<S: QuantumState>(state: &S) -> Result<f64> {
    mandel_q_from_probabilities(&fock_probabilities(state)?)
}

pub fn mandel_q_from_probabilities(p: &[f64]) -> Result<f64> {
    let (m1, m2) = moments(p);
    if m1 < MANDEL_MEAN_THRESHOLD {
        return Err(Error::UndefinedMandelQ { mean: m1 });
    }
    Ok((m2 - m1 * m1 - m1) / m1)
}

pub fn purity(rho: &DensityOperator) -> f64 {
    rho.purity()
}

/// `½ Σ |eig(a − b)|`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch(format!("{:?} vs {:?}", a.layout(), b.layout())));
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
}

/// Named real columns over a shared time axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl ObservableSeries {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            columns: Vec::new(),
        }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::InvalidArgument(format!(
                "column `{name}` has {} values for {} times",
                values.len(),
                self.times.len()
            )));
        }
        if self.column(&name).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate column `{name}`")));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Header row then one row per sample, 17 significant digits.
    pub fn to_csv(&self, time_label: &str) -> String {
        let mut out = String::from(time_label);
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:.16e}");
            for (_, v) in &self.columns {
                let _ = write!(out, ",{:.16e}", v[i]);
            }
            out.push('\n');
        }
        out
    }
}

/// Earliest sample time `tᵢ` such that every column stays within a band of
/// width `< eps` on `[tᵢ, t_end]` and that stretch lasts at least `window`.
pub fn detect_steady(series: &ObservableSeries, window: f64, eps: f64) -> Result<Option<f64>> {
    let n = series.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let t_end = series.times[n - 1];
    let span = t_end - series.times[0];
    if window > span {
        return Err(Error::InvalidArgument(format!(
            "window {window} longer than the series span {span}"
        )));
    }
    let mut lo: Vec<f64> = series.columns.iter().map(|(_, v)| v[n - 1]).collect();
    let mut hi = lo.clone();
    let mut found = None;
    for i in (0..n).rev() {
        let mut steady = true;
        for (c, (_, v)) in series.columns.iter().enumerate() {
            lo[c] = lo[c].min(v[i]);
            hi[c] = hi[c].max(v[i]);
            steady &= hi[c] - lo[c] < eps;
        }
        if !steady {
            break;
        }
        if t_end - series.times[i] >= window {
            found = Some(series.times[i]);
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{DensityOperator, StateVector, C64};

    #[test]
    fn fock_and_superposition_populations() {
        let p = fock_probabilities(&StateVector::fock(4, 2).unwrap()).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let s = StateVector::fock_superposition(4, &[(0, C64::new(1.0, 0.0)), (2, C64::new(1.0, 0.0))]).unwrap();
        let p = fock_probabilities(&s).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn thermal_statistics() {
        let n_bar = 0.05;
        let rho = DensityOperator::thermal(15, n_bar).unwrap();
        assert!((fidelity_fock(&rho, 0).unwrap() - 1.0 / 1.05).abs() < 1e-12);
        let f3 = n_bar.powi(3) / (1.0 + n_bar).powi(4);
        assert!((fidelity_fock(&rho, 3).unwrap() - f3).abs() < 1e-12);
        assert!((mandel_q(&rho).unwrap() - n_bar).abs() < 1e-6);
        assert!((mean_photon(&rho).unwrap() - n_bar).abs() < 1e-6);
    }

    #[test]
    fn fock_q_is_minus_one_and_vacuum_is_undefined() {
        for n in 1..5 {
            assert!((mandel_q(&DensityOperator::fock(6, n).unwrap()).unwrap() + 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            mandel_q(&DensityOperator::fock(6, 0).unwrap()),
            Err(Error::UndefinedMandelQ { .. })
        ));
    }

    #[test]
    fn trace_distance_examples() {
        let z = DensityOperator::fock(10, 0).unwrap();
        let th = DensityOperator::thermal(10, 0.05).unwrap();
        assert_eq!(trace_distance(&z, &z).unwrap(), 0.0);
        assert!((trace_distance(&z, &DensityOperator::fock(10, 1).unwrap()).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_distance(&z, &th).unwrap() - (1.0 - 1.0 / 1.05)).abs() < 1e-9);
    }

    #[test]
    fn steady_detection() {
        let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let mut s = ObservableSeries::new(times.clone());
        s.push_column("flat", vec![0.3; 11]).unwrap();
        assert_eq!(detect_steady(&s, 0.5, 1e-3).unwrap(), Some(0.0));
        s.push_column("ramp", times.clone()).unwrap();
        assert_eq!(detect_steady(&s, 0.5, 1e-3).unwrap(), None);
        assert!(detect_steady(&s, 2.0, 1e-3).is_err());
        assert!(s.push_column("short", vec![1.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut s = ObservableSeries::new(vec![0.0, 0.5]);
        s.push_column("P_0", vec![1.0, 0.25]).unwrap();
        let csv = s.to_csv("gamma_t");
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("gamma_t,P_0"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0"));
    }
}
