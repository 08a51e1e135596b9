//! Schrödinger and Lindblad propagation on sampled time grids.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::integrator::{integrate, IntegratorConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::PhasedHamiltonian;
use crate::operators::{
    reduced_populations_of_matrix, reduced_populations_of_vector, ComplexOperator, DensityOperator, HilbertLayout,
    SparseOp, StateVector, C64, FIELD,
};

/// Most negative eigenvalue tolerated in a sampled density operator.
pub const NEGATIVITY_LIMIT: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, samples: usize) -> Result<Self> {
        let g = Self { t_start, t_end, samples };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::validation("grid", "bounds must be finite"));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::validation("grid.t_end", "must exceed t_start"));
        }
        if self.samples < 2 {
            return Err(Error::validation("grid.samples", "at least 2 samples required"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let step = (self.t_end - self.t_start) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|k| {
                if k + 1 == self.samples {
                    self.t_end
                } else {
                    self.t_start + step * k as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct LindbladTerm {
    pub rate: f64,
    pub jump: ComplexOperator,
}

impl LindbladTerm {
    pub fn new(rate: f64, jump: ComplexOperator) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("Lindblad rate {rate} must be finite and ≥ 0")));
        }
        Ok(Self { rate, jump })
    }

    /// Same jump lifted onto `layout`, acting on its factor `label`.
    pub fn embedded(&self, layout: &HilbertLayout, label: &str) -> Result<Self> {
        Ok(Self {
            rate: self.rate,
            jump: self.jump.embed(layout, label)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// Largest top-two-Fock-level population seen at any sample.
    pub leakage: f64,
}

fn field_pos(layout: &HilbertLayout) -> Option<usize> {
    layout.position(FIELD).ok()
}

fn top_two(pops: &[f64]) -> f64 {
    pops[pops.len() - 1] + pops[pops.len() - 2]
}

/// Solve `i dψ/dt = H(t) ψ`.
pub fn evolve_state(
    h: &PhasedHamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<StateVector>> {
    grid.validate()?;
    let layout = psi0.layout().clone();
    if h.layout() != &layout {
        return Err(Error::LayoutMismatch("Hamiltonian and initial state differ".into()));
    }
    let times = grid.times();
    let fpos = field_pos(&layout);
    let mut states = Vec::with_capacity(times.len());
    let mut leakage = 0.0f64;
    let minus_i = C64::new(0.0, -1.0);
    integrate(
        |t, y, dy| h.apply(t, minus_i, y, dy),
        psi0.amplitudes().as_slice(),
        &times,
        cfg,
        |_, t, y| {
            if let Some(pos) = fpos {
                let leak = top_two(&reduced_populations_of_vector(&layout, y, pos));
                leakage = leakage.max(leak);
                if leak >= cfg.leakage_limit {
                    return Err(Error::LeakageExceeded {
                        leakage: leak,
                        limit: cfg.leakage_limit,
                        time: t,
                    });
                }
            }
            states.push(StateVector::from_raw(layout.clone(), DVector::from_column_slice(y)));
            Ok(())
        },
    )?;
    Ok(Trajectory {
        times,
        states,
        leakage,
    })
}

/// Right-hand side `ρ̇ = Kρ + ρK† + Σ r JρJ†` with `K = −iH − ½Σ r J†J`,
/// evaluated on column-major `d×d` buffers.
pub(crate) struct LindbladRhs<'a> {
    d: usize,
    h: Option<&'a PhasedHamiltonian>,
    damping: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
    scratch: Vec<C64>,
    scratch_t: Vec<C64>,
}

/// `out[i, c] += scale · Σ_j A[i, j] x[j, c]`
fn sparse_left_mul_add(op: &[(usize, usize, C64)], scale: C64, x: &[C64], out: &mut [C64], d: usize) {
    for &(i, j, z) in op {
        let zs = scale * z;
        for c in 0..d {
            out[i + c * d] += zs * x[j + c * d];
        }
    }
}

impl<'a> LindbladRhs<'a> {
    pub(crate) fn new(layout: &HilbertLayout, h: Option<&'a PhasedHamiltonian>, terms: &[LindbladTerm]) -> Result<Self> {
        if let Some(h) = h {
            if h.layout() != layout {
                return Err(Error::LayoutMismatch("Hamiltonian and density operator differ".into()));
            }
        }
        let d = layout.dim();
        let mut g = DMatrix::<C64>::zeros(d, d);
        let mut jumps = Vec::with_capacity(terms.len());
        for term in terms {
            if term.jump.layout() != layout {
                return Err(Error::LayoutMismatch(format!(
                    "jump operator on {:?}, state on {layout:?}",
                    term.jump.layout()
                )));
            }
            if term.rate == 0.0 {
                continue;
            }
            let j = term.jump.matrix();
            g -= j.adjoint() * j * C64::new(0.5 * term.rate, 0.0);
            jumps.push((term.rate, term.jump.sparse()));
        }
        Ok(Self {
            d,
            h,
            damping: SparseOp::from_dense(&g),
            jumps,
            scratch: vec![C64::new(0.0, 0.0); d * d],
            scratch_t: vec![C64::new(0.0, 0.0); d * d],
        })
    }

    pub(crate) fn apply(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.d;
        let zero = C64::new(0.0, 0.0);
        out.iter_mut().for_each(|z| *z = zero);
        if let Some(h) = self.h {
            sparse_left_mul_add(&h.sparse_entries(t), C64::new(0.0, -1.0), rho, out, d);
        }
        sparse_left_mul_add(&self.damping.entries, C64::new(1.0, 0.0), rho, out, d);
        for (rate, j) in &self.jumps {
            self.scratch.iter_mut().for_each(|z| *z = zero);
            sparse_left_mul_add(&j.entries, C64::new(1.0, 0.0), rho, &mut self.scratch, d);
            // (Jρ)† = ρJ† for Hermitian ρ
            for r in 0..d {
                for c in 0..d {
                    self.scratch_t[r + c * d] = self.scratch[c + r * d].conj();
                }
            }
            sparse_left_mul_add(&j.entries, C64::new(0.5 * rate, 0.0), &self.scratch_t, out, d);
        }
        // out ← A + A†
        for r in 0..d {
            for c in r..d {
                let a = out[r + c * d];
                let b = out[c + r * d];
                out[r + c * d] = a + b.conj();
                out[c + r * d] = b + a.conj();
            }
        }
    }
}

/// `ρ̇` for a static Hamiltonian, as a dense matrix.
pub fn lindblad_rhs(h: Option<&ComplexOperator>, terms: &[LindbladTerm], rho: &DensityOperator) -> Result<DMatrix<C64>> {
    let ph = h.map(|h| PhasedHamiltonian::constant(h.clone())).transpose()?;
    let mut rhs = LindbladRhs::new(rho.layout(), ph.as_ref(), terms)?;
    let mut out = vec![C64::new(0.0, 0.0); rho.layout().dim().pow(2)];
    rhs.apply(0.0, rho.matrix().as_slice(), &mut out);
    let d = rho.layout().dim();
    Ok(DMatrix::from_column_slice(d, d, &out))
}

/// Per-sample checks applied to density trajectories.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DensityGuards {
    pub leakage_limit: f64,
    pub check_positivity: bool,
}

pub(crate) fn sample_density(
    layout: &HilbertLayout,
    raw: &[C64],
    t: f64,
    guards: DensityGuards,
    leakage: &mut f64,
) -> Result<DensityOperator> {
    let d = layout.dim();
    let m = DMatrix::from_column_slice(d, d, raw);
    let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    if let Some(pos) = field_pos(layout) {
        let leak = top_two(&reduced_populations_of_matrix(layout, &sym, pos));
        *leakage = leakage.max(leak);
        if leak >= guards.leakage_limit {
            return Err(Error::LeakageExceeded {
                leakage: leak,
                limit: guards.leakage_limit,
                time: t,
            });
        }
    }
    let rho = DensityOperator::from_raw(layout.clone(), sym);
    if guards.check_positivity {
        let min = rho.min_eigenvalue();
        if min < -NEGATIVITY_LIMIT {
            return Err(Error::NegativeEigenvalue { value: min, time: t });
        }
    }
    Ok(rho)
}

/// Solve `ρ̇ = −i[H,ρ] + Σ r (JρJ† − ½{J†J, ρ})`.
///
/// Samples are Hermitian-symmetrized but not trace-renormalized, so trace
/// drift stays observable.
pub fn evolve_density(
    h: Option<&PhasedHamiltonian>,
    terms: &[LindbladTerm],
    rho0: &DensityOperator,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<DensityOperator>> {
    grid.validate()?;
    let layout = rho0.layout().clone();
    let mut rhs = LindbladRhs::new(&layout, h, terms)?;
    let times = grid.times();
    let guards = DensityGuards {
        leakage_limit: cfg.leakage_limit,
        check_positivity: true,
    };
    let mut states = Vec::with_capacity(times.len());
    let mut leakage = 0.0f64;
    integrate(
        |t, y, dy| rhs.apply(t, y, dy),
        rho0.matrix().as_slice(),
        &times,
        cfg,
        |_, t, y| {
            states.push(sample_density(&layout, y, t, guards, &mut leakage)?);
            Ok(())
        },
    )?;
    Ok(Trajectory {
        times,
        states,
        leakage,
    })
}
