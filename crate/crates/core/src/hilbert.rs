//! Dense complex state vectors, operators and Born-rule measurement.
//!
//! Everything here is sized for small composite spaces (at most 64
//! amplitudes), so plain row-major `Vec<Complex64>` storage is used
//! throughout. Composite indices are mixed-radix with the first subsystem
//! most significant.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::photonreg::PhotonRegister;

/// Tolerance for exact algebra (unitarity, idempotence, norms).
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for accumulated sums (probability totals).
pub const SUM_TOL: f64 = 1e-9;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A pure state: a list of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes as-is. The caller is responsible for normalization.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::UnsupportedDim(0));
        }
        Ok(Self { amps })
    }

    /// Builds a state from amplitudes, rescaling to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        Self::new(amps)?.normalize()
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| re(x)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < EXACT_TOL
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, s: C64) -> StateVector {
        StateVector {
            amps: self.amps.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| re(x)).collect())
            .collect();
        let refs: Vec<&[C64]> = rows.iter().map(|r| r.as_slice()).collect();
        Self::from_rows(&refs)
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = v[r] * v[c].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matrix dims differ");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matrix dims differ");
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    /// Kronecker product, `self` most significant.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (n, m) = (self.dim, other.dim);
        let d = n * m;
        let mut out = Matrix::zeros(d);
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.data[r1 * n + c1];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.data[(r1 * m + r2) * d + c1 * m + c2] = a * other.data[r2 * m + c2];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        assert_eq!(v.len(), n, "vector length differs from matrix dim");
        (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn determinant_2x2(&self) -> C64 {
        assert_eq!(self.dim, 2);
        self.data[0] * self.data[3] - self.data[1] * self.data[2]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix dims differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Expectation value `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }
}

/// A unitary operator. Construction checks `U·U† = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp(Matrix);

impl UnitaryOp {
    pub fn new(m: Matrix) -> Result<Self> {
        let dev = unitarity_defect(&m);
        if dev >= EXACT_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    /// Skips the unitarity check. Only for products of checked unitaries.
    pub(crate) fn from_trusted(m: Matrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// `self · other` (other acts first).
    pub fn compose(&self, other: &UnitaryOp) -> UnitaryOp {
        UnitaryOp(self.0.mul(&other.0))
    }

    pub fn adjoint(&self) -> UnitaryOp {
        UnitaryOp(self.0.adjoint())
    }

    pub fn kron(&self, other: &UnitaryOp) -> UnitaryOp {
        UnitaryOp(self.0.kron(&other.0))
    }

    pub fn act(&self, state: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), state.dim())?;
        Ok(StateVector {
            amps: self.0.mul_vec(&state.amps),
        })
    }

    pub fn approx_eq(&self, other: &UnitaryOp, tol: f64) -> bool {
        self.dim() == other.dim() && self.0.max_abs_diff(&other.0) < tol
    }

    /// Equality after removing a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &UnitaryOp, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let overlap = self.0.adjoint().mul(&other.0).trace();
        if overlap.norm() < 1e-300 {
            return false;
        }
        let phase = overlap / overlap.norm();
        self.0.scale(phase).max_abs_diff(&other.0) < tol
    }
}

/// `‖U·U† − I‖_max`.
pub fn unitarity_defect(m: &Matrix) -> f64 {
    m.mul(&m.adjoint()).max_abs_diff(&Matrix::identity(m.dim))
}

/// A complete set of orthogonal projectors with one label per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    projectors: Vec<Matrix>,
    labels: Vec<String>,
}

impl ProjectorSet {
    /// Validates Hermiticity, idempotence and completeness.
    pub fn new(projectors: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        if projectors.is_empty() || projectors.len() != labels.len() {
            return Err(Error::InvalidProjectors(format!(
                "{} projectors, {} labels",
                projectors.len(),
                labels.len()
            )));
        }
        let dim = projectors[0].dim;
        let mut sum = Matrix::zeros(dim);
        for (p, l) in projectors.iter().zip(&labels) {
            check_dim(dim, p.dim)?;
            if p.max_abs_diff(&p.adjoint()) >= EXACT_TOL {
                return Err(Error::InvalidProjectors(format!("{l} is not Hermitian")));
            }
            if p.mul(p).max_abs_diff(p) >= EXACT_TOL {
                return Err(Error::InvalidProjectors(format!("{l} is not idempotent")));
            }
            sum = sum.add(p);
        }
        let defect = sum.max_abs_diff(&Matrix::identity(dim));
        if defect >= EXACT_TOL {
            return Err(Error::InvalidProjectors(format!(
                "incomplete (deviation {defect:e})"
            )));
        }
        Ok(Self { projectors, labels })
    }

    /// Rank-1 projectors onto the given orthonormal vectors.
    pub fn from_basis<S: Into<String>>(vectors: &[Vec<C64>], labels: Vec<S>) -> Result<Self> {
        Self::new(
            vectors.iter().map(|v| Matrix::outer(v)).collect(),
            labels.into_iter().map(Into::into).collect(),
        )
    }

    /// Computational-basis projectors of dimension `labels.len()`.
    pub fn computational<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let d = labels.len();
        let vectors: Vec<Vec<C64>> = (0..d).map(|i| StateVector::basis(d, i).amps).collect();
        Self::from_basis(&vectors, labels)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn projectors(&self) -> &[Matrix] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> &Matrix {
        &self.projectors[i]
    }

    /// Joint measurement `self ⊗ other`; outcome `(i, j)` sits at index `i·|other| + j`.
    pub fn product(&self, other: &ProjectorSet) -> ProjectorSet {
        let mut projectors = Vec::with_capacity(self.len() * other.len());
        let mut labels = Vec::with_capacity(self.len() * other.len());
        for (p, lp) in self.projectors.iter().zip(&self.labels) {
            for (q, lq) in other.projectors.iter().zip(&other.labels) {
                projectors.push(p.kron(q));
                labels.push(format!("{lp}{lq}"));
            }
        }
        ProjectorSet { projectors, labels }
    }

    /// Conjugates every projector by `u`: `P ↦ U P U†`.
    pub fn conjugated(&self, u: &UnitaryOp) -> Result<ProjectorSet> {
        check_dim(self.dim(), u.dim())?;
        let ud = u.matrix().adjoint();
        Ok(ProjectorSet {
            projectors: self
                .projectors
                .iter()
                .map(|p| u.matrix().mul(p).mul(&ud))
                .collect(),
            labels: self.labels.clone(),
        })
    }

    /// Renames outcomes, keeping projectors.
    pub fn relabeled<S: Into<String>>(&self, labels: Vec<S>) -> Result<ProjectorSet> {
        if labels.len() != self.len() {
            return Err(Error::LabelCount {
                expected: self.len(),
                actual: labels.len(),
            });
        }
        Ok(ProjectorSet {
            projectors: self.projectors.clone(),
            labels: labels.into_iter().map(Into::into).collect(),
        })
    }

    pub(crate) fn from_trusted(projectors: Vec<Matrix>, labels: Vec<String>) -> Self {
        Self { projectors, labels }
    }

    /// Worst Hermiticity/idempotence/completeness defect over the set.
    pub fn defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = Matrix::zeros(dim);
        for p in &self.projectors {
            worst = worst.max(p.max_abs_diff(&p.adjoint()));
            worst = worst.max(p.mul(p).max_abs_diff(p));
            sum = sum.add(p);
        }
        worst.max(sum.max_abs_diff(&Matrix::identity(dim)))
    }
}

/// Tensor product of states; the first factor is most significant.
pub fn tensor(factors: &[StateVector]) -> Result<StateVector> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyFactors)?;
    let mut amps = first.amps.clone();
    for f in rest {
        let mut next = Vec::with_capacity(amps.len() * f.dim());
        for a in &amps {
            for b in &f.amps {
                next.push(a * b);
            }
        }
        amps = next;
    }
    Ok(StateVector { amps })
}

/// Applies `op` to the listed subsystems of `state`, identity elsewhere.
///
/// `targets` lists register subsystem indices; the first target is the most
/// significant factor of `op`.
pub fn apply(
    op: &UnitaryOp,
    state: &StateVector,
    targets: &[usize],
    register: &PhotonRegister,
) -> Result<StateVector> {
    check_dim(register.total_dim(), state.dim())?;
    let dims = register.dims();
    let strides = register.strides();
    let mut op_dim = 1;
    for (k, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(Error::TargetOutOfRange(t));
        }
        if targets[..k].contains(&t) {
            return Err(Error::DuplicateTarget);
        }
        op_dim *= dims[t];
    }
    check_dim(op_dim, op.dim())?;

    // offsets[l] = flat offset of local target index l
    let offsets: Vec<usize> = (0..op_dim)
        .map(|mut l| {
            let mut off = 0;
            for &t in targets.iter().rev() {
                off += (l % dims[t]) * strides[t];
                l /= dims[t];
            }
            off
        })
        .collect();

    let n = state.dim();
    let m = op.matrix();
    let mut out = vec![ZERO; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut local = 0;
        let mut base = i;
        for &t in targets {
            let digit = (i / strides[t]) % dims[t];
            local = local * dims[t] + digit;
            base -= digit * strides[t];
        }
        let mut acc = ZERO;
        for (l, off) in offsets.iter().enumerate() {
            let u = m.get(local, l);
            if u != ZERO {
                acc += u * state.amps[base + off];
            }
        }
        *slot = acc;
    }
    Ok(StateVector { amps: out })
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Born probabilities `⟨ψ|P_i|ψ⟩`.
pub fn exact_probs(state: &StateVector, ps: &ProjectorSet) -> Result<Vec<f64>> {
    check_dim(ps.dim(), state.dim())?;
    let mut probs = Vec::with_capacity(ps.len());
    for (i, p) in ps.projectors.iter().enumerate() {
        let v = p.expectation(&state.amps).re;
        if v < -EXACT_TOL {
            return Err(Error::NegativeProbability(v, i));
        }
        probs.push(v.clamp(0.0, 1.0));
    }
    Ok(probs)
}

/// One sampled measurement result.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub index: usize,
    pub label: String,
    pub probability: f64,
    pub state: StateVector,
}

/// Samples an outcome by the Born rule and returns the collapsed state.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    ps: &ProjectorSet,
    rng: &mut R,
) -> Result<Outcome> {
    let probs = exact_probs(state, ps)?;
    let index = sample_index(&probs, rng.random::<f64>()).ok_or(Error::NoOutcome)?;
    let collapsed = StateVector {
        amps: ps.projectors[index].mul_vec(&state.amps),
    }
    .normalize()?;
    Ok(Outcome {
        index,
        label: ps.labels[index].clone(),
        probability: probs[index],
        state: collapsed,
    })
}

/// Inverse-CDF lookup for `u ∈ [0, 1)`. Zero-probability outcomes are never
/// returned; `None` when every probability vanishes.
pub fn sample_index(probs: &[f64], u: f64) -> Option<usize> {
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    last
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimMismatch { expected, actual });
    }
    Ok(())
}
