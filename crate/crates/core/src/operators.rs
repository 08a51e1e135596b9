//! Dense complex linear algebra on truncated atom ⊗ field Hilbert spaces.
//!
//! Basis ordering is fixed: factors are listed slowest-varying first, so for
//! the usual `atom ⊗ field` layout the flat index of `|level, n⟩` is
//! `level * (cutoff + 1) + n`. All constructors return new values; nothing is
//! mutated in place after construction.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ATOM: &str = "atom";
pub const FIELD: &str = "field";

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of tensor factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertLayout {
    factors: Vec<Factor>,
}

impl HilbertLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one factor".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.dim < 2) {
            return Err(Error::InvalidArgument(format!(
                "factor `{}` has dimension {} (< 2)",
                f.label, f.dim
            )));
        }
        Ok(Self { factors })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new(vec![Factor {
            label: label.to_string(),
            dim,
        }])
    }

    /// Field factor holding Fock states `|0⟩ … |cutoff⟩`.
    pub fn field(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidArgument("Fock cutoff must be ≥ 1".into()));
        }
        Self::single(FIELD, cutoff + 1)
    }

    pub fn atom(levels: usize) -> Result<Self> {
        Self::single(ATOM, levels)
    }

    pub fn atom_field(levels: usize, cutoff: usize) -> Result<Self> {
        Ok(Self::atom(levels)?.concat(&Self::field(cutoff)?))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn concat(&self, other: &HilbertLayout) -> HilbertLayout {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        HilbertLayout { factors }
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        let mut hits = self
            .factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.label == label)
            .map(|(i, _)| i);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(i),
            (Some(_), Some(_)) => Err(Error::LayoutMismatch(format!(
                "factor label `{label}` is ambiguous"
            ))),
            _ => Err(Error::UnknownLabel(label.to_string())),
        }
    }

    pub fn factor_dim(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].dim)
    }

    /// Fock cutoff of the field factor, if the layout has one.
    pub fn field_cutoff(&self) -> Option<usize> {
        self.factor_dim(FIELD).ok().map(|d| d - 1)
    }

    /// Stride of the factor at `pos` in the flat index.
    fn stride(&self, pos: usize) -> usize {
        self.factors[pos + 1..].iter().map(|f| f.dim).product()
    }

    /// Layout keeping only the factor at `pos`.
    fn reduced(&self, pos: usize) -> HilbertLayout {
        HilbertLayout {
            factors: vec![self.factors[pos].clone()],
        }
    }
}

fn expect_same(a: &HilbertLayout, b: &HilbertLayout) -> Result<()> {
    if a != b {
        return Err(Error::LayoutMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Square complex matrix acting on a declared layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

impl ComplexOperator {
    pub fn new(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{}, layout dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: &HilbertLayout) -> Self {
        let d = layout.dim();
        Self {
            layout: layout.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(layout: &HilbertLayout) -> Self {
        let d = layout.dim();
        Self {
            layout: layout.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * z,
        }
    }

    /// Max |O_ij − conj(O_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &ComplexOperator) -> ComplexOperator {
        &(self * other) - &(other * self)
    }

    /// Raw matrix-vector product.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    /// Lift an operator on one factor of `layout` to the whole space.
    pub fn embed(&self, layout: &HilbertLayout, label: &str) -> Result<ComplexOperator> {
        if self.layout.factors().len() != 1 {
            return Err(Error::LayoutMismatch(
                "only single-factor operators can be embedded".into(),
            ));
        }
        let pos = layout.position(label)?;
        if layout.factors()[pos].dim != self.dim() {
            return Err(Error::LayoutMismatch(format!(
                "factor `{label}` has dim {}, operator has dim {}",
                layout.factors()[pos].dim,
                self.dim()
            )));
        }
        let mut acc: Option<DMatrix<C64>> = None;
        for (i, f) in layout.factors().iter().enumerate() {
            let m = if i == pos {
                self.matrix.clone()
            } else {
                DMatrix::identity(f.dim, f.dim)
            };
            acc = Some(match acc {
                None => m,
                Some(a) => a.kronecker(&m),
            });
        }
        ComplexOperator::new(layout.clone(), acc.expect("layout is non-empty"))
    }

    pub(crate) fn sparse(&self) -> SparseOp {
        SparseOp::from_dense(&self.matrix)
    }
}

impl<'a> Add<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;

    /// Panics if the layouts differ.
    fn add(self, rhs: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.layout, rhs.layout, "layout mismatch in operator sum");
        ComplexOperator {
            layout: self.layout.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;

    fn sub(self, rhs: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.layout, rhs.layout, "layout mismatch in operator difference");
        ComplexOperator {
            layout: self.layout.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl<'a> Mul<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;

    fn mul(self, rhs: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.layout, rhs.layout, "layout mismatch in operator product");
        ComplexOperator {
            layout: self.layout.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

pub(crate) fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Nonzero entries of a dense matrix, used by the integrators.
#[derive(Clone, Debug, Default)]
pub(crate) struct SparseOp {
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z != ZERO {
                    entries.push((i, j, z));
                }
            }
        }
        Self { entries }
    }

    /// `out += scale * A x`
    #[inline]
    pub fn apply_add(&self, scale: C64, x: &[C64], out: &mut [C64]) {
        for &(i, j, z) in &self.entries {
            out[i] += scale * z * x[j];
        }
    }
}

/// Normalized pure state on a declared layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: HilbertLayout,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Normalizes the given amplitudes.
    pub fn new(layout: HilbertLayout, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for layout dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero or non-finite norm".into()));
        }
        Ok(Self {
            layout,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// Integrator output; the norm is whatever the propagation produced.
    pub(crate) fn from_raw(layout: HilbertLayout, amplitudes: DVector<C64>) -> Self {
        Self { layout, amplitudes }
    }

    pub fn basis(layout: &HilbertLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::IndexOutOfRange {
                index,
                cutoff: d - 1,
            });
        }
        let mut v = DVector::zeros(d);
        v[index] = ONE;
        Ok(Self {
            layout: layout.clone(),
            amplitudes: v,
        })
    }

    pub fn fock(cutoff: usize, n: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::IndexOutOfRange { index: n, cutoff });
        }
        Self::basis(&HilbertLayout::field(cutoff)?, n)
    }

    /// Superposition Σ cₙ|n⟩ on the field factor, normalized.
    pub fn fock_superposition(cutoff: usize, amplitudes: &[(usize, C64)]) -> Result<Self> {
        let layout = HilbertLayout::field(cutoff)?;
        let mut v = DVector::zeros(cutoff + 1);
        for &(n, c) in amplitudes {
            if n > cutoff {
                return Err(Error::IndexOutOfRange { index: n, cutoff });
            }
            v[n] += c;
        }
        Self::new(layout, v)
    }

    /// Truncated coherent state, renormalized on `|0⟩ … |cutoff⟩`.
    pub fn coherent(alpha: C64, cutoff: usize) -> Result<Self> {
        let layout = HilbertLayout::field(cutoff)?;
        let mut v = DVector::zeros(cutoff + 1);
        let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        v[0] = term;
        for n in 1..=cutoff {
            term *= alpha / (n as f64).sqrt();
            v[n] = term;
        }
        Self::new(layout, v)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            layout: self.layout.concat(&other.layout),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            layout: self.layout.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Density operator; `new` enforces Hermiticity, unit trace and positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityOperator {
    pub fn new(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{}, layout dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = Self { layout, matrix };
        let herm = rho.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} ≠ 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(layout: HilbertLayout, matrix: DMatrix<C64>) -> Self {
        Self { layout, matrix }
    }

    /// `(ρ + ρ†)/2`, divided by its trace.
    pub(crate) fn symmetrized(layout: HilbertLayout, matrix: &DMatrix<C64>) -> Self {
        let mut m = (matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let tr = m.trace();
        if tr.norm() > 0.0 {
            m /= tr;
        }
        Self { layout, matrix: m }
    }

    pub fn fock(cutoff: usize, n: usize) -> Result<Self> {
        Ok(StateVector::fock(cutoff, n)?.to_density())
    }

    /// Geometric populations pₙ ∝ n̄ⁿ/(1+n̄)ⁿ⁺¹ on the truncated field.
    pub fn thermal(cutoff: usize, n_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0) || !n_bar.is_finite() {
            return Err(Error::InvalidArgument(format!("mean photon number {n_bar} must be ≥ 0")));
        }
        let layout = HilbertLayout::field(cutoff)?;
        let ratio = n_bar / (1.0 + n_bar);
        let mut pops: Vec<f64> = (0..=cutoff)
            .map(|n| ratio.powi(n as i32) / (1.0 + n_bar))
            .collect();
        let total: f64 = pops.iter().sum();
        pops.iter_mut().for_each(|p| *p /= total);
        let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
        for (n, p) in pops.into_iter().enumerate() {
            m[(n, n)] = C64::new(p, 0.0);
        }
        Ok(Self { layout, matrix: m })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            layout: self.layout.concat(&other.layout),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// Spectrum of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// ⟨n−1|a|n⟩ = √n on the single field factor.
pub fn annihilation(cutoff: usize) -> Result<ComplexOperator> {
    let layout = HilbertLayout::field(cutoff)?;
    let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    ComplexOperator::new(layout, m)
}

pub fn creation(cutoff: usize) -> Result<ComplexOperator> {
    Ok(annihilation(cutoff)?.adjoint())
}

/// a†a built directly on the diagonal so its entries are exact integers.
pub fn number(cutoff: usize) -> Result<ComplexOperator> {
    let layout = HilbertLayout::field(cutoff)?;
    let m = DMatrix::from_diagonal(&DVector::from_fn(cutoff + 1, |n, _| C64::new(n as f64, 0.0)));
    ComplexOperator::new(layout, m)
}

/// |m⟩⟨n| on the field factor.
pub fn fock_projector(m: usize, n: usize, cutoff: usize) -> Result<ComplexOperator> {
    let layout = HilbertLayout::field(cutoff)?;
    for idx in [m, n] {
        if idx > cutoff {
            return Err(Error::IndexOutOfRange { index: idx, cutoff });
        }
    }
    let mut mat = DMatrix::zeros(cutoff + 1, cutoff + 1);
    mat[(m, n)] = ONE;
    ComplexOperator::new(layout, mat)
}

/// σ_rs = |r⟩⟨s| on an atom whose levels are listed in basis order.
pub fn atomic_sigma(r: &str, s: &str, levels: &[&str]) -> Result<ComplexOperator> {
    let index = |label: &str| {
        levels
            .iter()
            .position(|l| *l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    };
    let (i, j) = (index(r)?, index(s)?);
    let layout = HilbertLayout::atom(levels.len())?;
    let mut mat = DMatrix::zeros(levels.len(), levels.len());
    mat[(i, j)] = ONE;
    ComplexOperator::new(layout, mat)
}

/// Kronecker product; the layout is the concatenation of factor lists.
pub fn tensor(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    ComplexOperator {
        layout: a.layout.concat(&b.layout),
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// Reduced density operator on the factor labelled `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &str) -> Result<DensityOperator> {
    let layout = rho.layout();
    let pos = layout.position(keep)?;
    let reduced = reduce_matrix(layout, rho.matrix(), pos);
    Ok(DensityOperator::from_raw(layout.reduced(pos), reduced))
}

/// Partial trace over every factor except the one at `pos`.
pub(crate) fn reduce_matrix(layout: &HilbertLayout, m: &DMatrix<C64>, pos: usize) -> DMatrix<C64> {
    let dk = layout.factors()[pos].dim;
    let stride = layout.stride(pos);
    let outer = layout.dim() / (dk * stride);
    let mut out = DMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for hi in 0..outer {
                for lo in 0..stride {
                    let base = hi * dk * stride + lo;
                    acc += m[(base + a * stride, base + b * stride)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Diagonal of the reduced state on factor `pos`, from raw amplitudes.
pub(crate) fn reduced_populations_of_vector(
    layout: &HilbertLayout,
    amps: &[C64],
    pos: usize,
) -> Vec<f64> {
    let dk = layout.factors()[pos].dim;
    let stride = layout.stride(pos);
    let mut pops = vec![0.0; dk];
    for (idx, z) in amps.iter().enumerate() {
        pops[(idx / stride) % dk] += z.norm_sqr();
    }
    pops
}

/// Diagonal of the reduced state on factor `pos`, from a raw density matrix.
pub(crate) fn reduced_populations_of_matrix(
    layout: &HilbertLayout,
    m: &DMatrix<C64>,
    pos: usize,
) -> Vec<f64> {
    let dk = layout.factors()[pos].dim;
    let stride = layout.stride(pos);
    let mut pops = vec![0.0; dk];
    for idx in 0..layout.dim() {
        pops[(idx / stride) % dk] += m[(idx, idx)].re;
    }
    pops
}

/// Anything an operator can be averaged over.
pub trait QuantumState {
    fn layout(&self) -> &HilbertLayout;
    fn expect_matrix(&self, m: &DMatrix<C64>) -> C64;
    /// Populations of the reduced state on factor `pos`.
    fn reduced_populations(&self, pos: usize) -> Vec<f64>;
}

impl QuantumState for StateVector {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    fn expect_matrix(&self, m: &DMatrix<C64>) -> C64 {
        self.amplitudes.dotc(&(m * &self.amplitudes))
    }

    fn reduced_populations(&self, pos: usize) -> Vec<f64> {
        reduced_populations_of_vector(&self.layout, self.amplitudes.as_slice(), pos)
    }
}

impl QuantumState for DensityOperator {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    fn expect_matrix(&self, m: &DMatrix<C64>) -> C64 {
        (m * &self.matrix).trace()
    }

    fn reduced_populations(&self, pos: usize) -> Vec<f64> {
        reduced_populations_of_matrix(&self.layout, &self.matrix, pos)
    }
}

/// ⟨ψ|O|ψ⟩ or Tr(Oρ).
pub fn expectation<S: QuantumState>(op: &ComplexOperator, state: &S) -> Result<C64> {
    expect_same(op.layout(), state.layout())?;
    Ok(state.expect_matrix(op.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GEFH: [&str; 4] = ["g", "e", "f", "h"];

    #[test]
    fn annihilation_matrix_elements() {
        let a = annihilation(3).unwrap();
        assert_eq!(a.entry(0, 1), ONE);
        assert_relative_eq!(a.entry(1, 2).re, 2f64.sqrt(), epsilon = 1e-15);
        let vac = StateVector::fock(3, 0).unwrap();
        assert!(a.apply(vac.amplitudes()).iter().all(|z| *z == ZERO));
        assert!(annihilation(0).is_err());
    }

    #[test]
    fn number_operator_exact_and_commutator_truncation() {
        let cutoff = 6;
        let a = annihilation(cutoff).unwrap();
        let n = &a.adjoint() * &a;
        for k in 0..=cutoff {
            assert_eq!(number(cutoff).unwrap().entry(k, k), C64::new(k as f64, 0.0));
            assert_relative_eq!(n.entry(k, k).re, k as f64, epsilon = 1e-14);
        }
        for k in 0..cutoff {
            assert_relative_eq!(a.commutator(&a.adjoint()).entry(k, k).re, 1.0, epsilon = 1e-14);
        }
        // √c·√c rounds back to c exactly for these cutoffs
        for cutoff in [4, 9, 16] {
            let a = annihilation(cutoff).unwrap();
            let comm = a.commutator(&a.adjoint());
            assert_eq!(comm.entry(cutoff, cutoff), C64::new(-(cutoff as f64), 0.0));
        }
    }

    #[test]
    fn double_adjoint_is_bitwise_identity() {
        let ops = [
            annihilation(5).unwrap(),
            fock_projector(2, 1, 4).unwrap(),
            atomic_sigma("g", "e", &GEFH).unwrap(),
            tensor(&atomic_sigma("f", "g", &GEFH).unwrap(), &annihilation(3).unwrap()),
        ];
        for op in ops {
            assert_eq!(op.adjoint().adjoint(), op);
        }
    }

    #[test]
    fn fock_projector_action() {
        let p = fock_projector(1, 0, 2).unwrap();
        let out = p.apply(StateVector::fock(2, 0).unwrap().amplitudes());
        assert_eq!(out, StateVector::fock(2, 1).unwrap().amplitudes().clone());
        let out = p.apply(StateVector::fock(2, 2).unwrap().amplitudes());
        assert!(out.iter().all(|z| *z == ZERO));
        assert_eq!(p.adjoint(), fock_projector(0, 1, 2).unwrap());
        assert!(matches!(
            fock_projector(3, 0, 2),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn atomic_sigma_algebra() {
        let s_ge = atomic_sigma("g", "e", &GEFH).unwrap();
        assert_eq!(s_ge.entry(0, 1), ONE);
        assert_eq!(s_ge.matrix().iter().filter(|z| **z != ZERO).count(), 1);
        let s_ee = atomic_sigma("e", "e", &GEFH).unwrap();
        assert_eq!(&s_ee * &s_ee, s_ee);
        let s_fg = atomic_sigma("f", "g", &GEFH).unwrap();
        assert_eq!(&s_fg * &s_ge, atomic_sigma("f", "e", &GEFH).unwrap());
        assert!(matches!(atomic_sigma("x", "g", &GEFH), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn tensor_products() {
        let i2 = ComplexOperator::identity(&HilbertLayout::atom(2).unwrap());
        let i3 = ComplexOperator::identity(&HilbertLayout::field(2).unwrap());
        let i6 = tensor(&i2, &i3);
        assert_eq!(i6.matrix(), &DMatrix::<C64>::identity(6, 6));
        assert_eq!(i6.layout().factors().len(), 2);

        let s = atomic_sigma("g", "e", &["g", "e"]).unwrap();
        let p = fock_projector(1, 0, 2).unwrap();
        let sp = tensor(&s, &p);
        assert_eq!(sp.matrix().iter().filter(|z| **z != ZERO).count(), 1);
        // |g,1⟩⟨e,0| sits at (0*3+1, 1*3+0)
        assert_eq!(sp.entry(1, 3), ONE);
        assert_eq!(sp.adjoint(), tensor(&s.adjoint(), &p.adjoint()));
    }

    #[test]
    fn embed_matches_tensor_with_identity() {
        let layout = HilbertLayout::atom_field(3, 4).unwrap();
        let a = annihilation(4).unwrap();
        let lifted = a.embed(&layout, FIELD).unwrap();
        let direct = tensor(&ComplexOperator::identity(&HilbertLayout::atom(3).unwrap()), &a);
        assert_eq!(lifted, direct);
    }

    #[test]
    fn partial_trace_of_product_and_bell_states() {
        let rho_a = DensityOperator::new(
            HilbertLayout::atom(2).unwrap(),
            DMatrix::from_row_slice(
                2,
                2,
                &[C64::new(0.7, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.0)],
            ),
        )
        .unwrap();
        let rho_f = DensityOperator::thermal(3, 0.4).unwrap();
        let joint = rho_a.tensor(&rho_f);
        let back = partial_trace(&joint, FIELD).unwrap();
        assert!((back.matrix() - rho_f.matrix()).norm() < 1e-14);
        let back_a = partial_trace(&joint, ATOM).unwrap();
        assert!((back_a.matrix() - rho_a.matrix()).norm() < 1e-14);

        let layout = HilbertLayout::new(vec![
            Factor { label: "a".into(), dim: 2 },
            Factor { label: "b".into(), dim: 2 },
        ])
        .unwrap();
        let bell = StateVector::new(
            layout,
            DVector::from_vec(vec![ONE, ZERO, ZERO, ONE]),
        )
        .unwrap()
        .to_density();
        for keep in ["a", "b"] {
            let r = partial_trace(&bell, keep).unwrap();
            let half = DMatrix::<C64>::identity(2, 2) * C64::new(0.5, 0.0);
            assert!((r.matrix() - half).norm() < 1e-15);
        }
        assert!(matches!(partial_trace(&bell, "c"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn expectation_values() {
        let n = number(5).unwrap();
        let two = StateVector::fock(5, 2).unwrap();
        assert_relative_eq!(expectation(&n, &two).unwrap().re, 2.0);
        let id = ComplexOperator::identity(two.layout());
        assert_relative_eq!(expectation(&id, &two).unwrap().re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            expectation(&id, &DensityOperator::thermal(5, 0.3).unwrap()).unwrap().re,
            1.0,
            epsilon = 1e-14
        );
        let other = ComplexOperator::identity(&HilbertLayout::field(4).unwrap());
        assert!(matches!(expectation(&other, &two), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn coherent_mean_photon_matches_poisson_series() {
        // Σ_{n≤20} n e^{-1}/n! renormalized by Σ_{n≤20} e^{-1}/n!
        let mut weights = Vec::new();
        let mut w = (-1.0f64).exp();
        weights.push(w);
        for n in 1..=20 {
            w /= n as f64;
            weights.push(w);
        }
        let norm: f64 = weights.iter().sum();
        let oracle: f64 = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / norm;

        let psi = StateVector::coherent(ONE, 20).unwrap();
        let mean = expectation(&number(20).unwrap(), &psi).unwrap();
        assert!(mean.im.abs() < 1e-12);
        assert_relative_eq!(mean.re, oracle, epsilon = 1e-12);
        assert!((mean.re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn density_constructor_rejects_invalid() {
        let layout = HilbertLayout::field(1).unwrap();
        let bad_trace = DMatrix::from_diagonal(&DVector::from_vec(vec![ONE, ONE]));
        assert!(DensityOperator::new(layout.clone(), bad_trace).is_err());
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(DensityOperator::new(layout.clone(), negative).is_err());
        let mut non_herm = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        non_herm[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityOperator::new(layout, non_herm).is_err());
    }
}
