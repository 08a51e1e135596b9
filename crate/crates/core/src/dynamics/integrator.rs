//! Adaptive Dormand–Prince 5(4) with continuous (dense) output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DormandPrince54,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the internal step; `None` leaves it free.
    pub max_step: Option<f64>,
    pub method: Method,
    /// Summed population of the two highest Fock levels that aborts a run.
    pub leakage_limit: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: None,
            method: Method::DormandPrince54,
            leakage_limit: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::validation("integrator.rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::validation("integrator.abs_tol", "must be > 0"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::validation("integrator.max_step", "must be > 0"));
            }
        }
        if !(self.leakage_limit > 0.0) {
            return Err(Error::validation("integrator.leakage_limit", "must be > 0"));
        }
        Ok(())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn combine(out: &mut [C64], y: &[C64], h: f64, parts: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in parts {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / n as f64).sqrt()
}

/// Integrate `y' = f(t, y)` from `times[0]` and report the solution at each
/// of `times` (ascending) through `observe(index, t, y)`.
///
/// `observe` may abort the run by returning an error.
pub fn integrate<F, O>(mut f: F, y0: &[C64], times: &[f64], cfg: &IntegratorConfig, mut observe: O) -> Result<()>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    cfg.validate()?;
    let n = y0.len();
    let Some(&t0) = times.first() else {
        return Ok(());
    };
    let t_end = *times.last().expect("nonempty");
    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    observe(0, t0, &y)?;
    let mut next = 1;
    while next < times.len() && times[next] == t0 {
        observe(next, t0, &y)?;
        next += 1;
    }
    if next == times.len() {
        return Ok(());
    }

    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut dense = vec![zero; n];
    let mut r = [vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]];

    let max_step = cfg.max_step.unwrap_or(f64::INFINITY).min(t_end - t0);
    let scale = |y: &[C64], i: usize| cfg.abs_tol + cfg.rel_tol * y[i].norm();

    f(t0, &y, &mut k1);
    let mut h = {
        let d0 = rms((0..n).map(|i| y[i].norm() / scale(&y, i)), n);
        let d1 = rms((0..n).map(|i| k1[i].norm() / scale(&y, i)), n);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(max_step);
        combine(&mut ytmp, &y, h0, &[(1.0, &k1)]);
        f(t0 + h0, &ytmp, &mut k2);
        let d2 = rms((0..n).map(|i| (k2[i] - k1[i]).norm() / scale(&y, i)), n) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(max_step)
    };

    let mut t = t0;
    let mut last_rejected = false;
    while next < times.len() {
        let to_end = t + h >= t_end;
        if to_end {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { time: t, step: h });
        }
        combine(&mut ytmp, &y, h, &[(A21, &k1)]);
        f(t + C2 * h, &ytmp, &mut k2);
        combine(&mut ytmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * h, &ytmp, &mut k3);
        combine(&mut ytmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * h, &ytmp, &mut k4);
        combine(&mut ytmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * h, &ytmp, &mut k5);
        combine(&mut ytmp, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + h, &ytmp, &mut k6);
        combine(&mut ynew, &y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t + h, &ynew, &mut k7);

        let err = rms(
            (0..n).map(|i| {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(ynew[i].norm());
                e.norm() / sc
            }),
            n,
        );
        if !err.is_finite() {
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }
        if err > 1.0 {
            h *= (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            last_rejected = true;
            continue;
        }

        // t + (t_end − t) can round below t_end
        let t_new = if to_end { t_end } else { t + h };
        if next < times.len() && times[next] <= t_new {
            for i in 0..n {
                let dy = ynew[i] - y[i];
                let bspl = k1[i] * h - dy;
                r[0][i] = y[i];
                r[1][i] = dy;
                r[2][i] = bspl;
                r[3][i] = dy - k7[i] * h - bspl;
                r[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
            }
            while next < times.len() && times[next] <= t_new {
                let ts = times[next];
                if ts == t_new {
                    observe(next, ts, &ynew)?;
                } else {
                    let th = (ts - t) / h;
                    let th1 = 1.0 - th;
                    for i in 0..n {
                        dense[i] = r[0][i] + (r[1][i] + (r[2][i] + (r[3][i] + r[4][i] * th1) * th) * th1) * th;
                    }
                    observe(next, ts, &dense)?;
                }
                next += 1;
            }
        }

        std::mem::swap(&mut y, &mut ynew);
        std::mem::swap(&mut k1, &mut k7);
        t = t_new;

        let mut fac = (SAFETY * err.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(max_step);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        // y = e^{-iωt}
        let w = 3.0;
        let times: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
        let mut got = vec![C64::new(0.0, 0.0); times.len()];
        integrate(
            |_, y, dy| dy[0] = C64::new(0.0, -w) * y[0],
            &[C64::new(1.0, 0.0)],
            &times,
            &IntegratorConfig::default(),
            |i, _, y| {
                got[i] = y[0];
                Ok(())
            },
        )
        .unwrap();
        for (t, z) in times.iter().zip(&got) {
            assert!((z - C64::from_polar(1.0, -w * t)).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn short_odd_intervals_reach_their_end() {
        for t_end in [0.35 * 0.35 / 63.0, 0.1 * 0.1 / 63.0, 1.0 / 3.0, 7.3e-5] {
            let mut seen = 0;
            integrate(
                |_, y, dy| dy[0] = C64::new(0.0, -40.0) * y[0],
                &[C64::new(1.0, 0.0)],
                &[0.0, t_end],
                &IntegratorConfig::default(),
                |_, _, _| {
                    seen += 1;
                    Ok(())
                },
            )
            .unwrap();
            assert_eq!(seen, 2);
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = 2t y, y = e^{t²}
        let times = [0.0, 0.5, 1.0, 1.5];
        let mut got = Vec::new();
        integrate(
            |t, y, dy| dy[0] = y[0] * (2.0 * t),
            &[C64::new(1.0, 0.0)],
            &times,
            &IntegratorConfig::default(),
            |_, _, y| {
                got.push(y[0].re);
                Ok(())
            },
        )
        .unwrap();
        for (t, v) in times.iter().zip(got) {
            assert!((v - (t * t).exp()).abs() < 1e-8 * (t * t).exp());
        }
    }

    #[test]
    fn observer_can_abort() {
        let r = integrate(
            |_, y, dy| dy[0] = y[0],
            &[C64::new(1.0, 0.0)],
            &[0.0, 1.0, 2.0],
            &IntegratorConfig::default(),
            |i, _, _| if i == 1 { Err(Error::InvalidArgument("stop".into())) } else { Ok(()) },
        );
        assert!(r.is_err());
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y², y(0) = 1 diverges at t = 1
        let r = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[C64::new(1.0, 0.0)],
            &[0.0, 2.0],
            &IntegratorConfig::default(),
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }
}
