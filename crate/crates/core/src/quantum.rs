//! Small dense complex linear algebra: pure states, density matrices,
//! projective measurements and POVMs on qubits, qutrits and two-qubit
//! registers, together with Born-rule sampling and distinguishability
//! measures.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Absolute tolerance used by every invariant check.
pub const TOL: f64 = 1e-9;

const ZERO_AMPLITUDE: f64 = 1e-12;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_dim(dim: usize) -> Result<()> {
    if (2..=4).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// Outcome label of a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// A decoded value: a bit, a trit, or a basis index depending on context.
    Value(u8),
    /// Outcome no honest state can produce (Ambainis' `|2-a>`).
    Reject,
    /// The inconclusive `?` outcome.
    Inconclusive,
}

impl Label {
    pub fn value(self) -> Option<u8> {
        match self {
            Label::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Value(v) => write!(f, "{v}"),
            Label::Reject => f.write_str("reject"),
            Label::Inconclusive => f.write_str("?"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A normalized pure state of dimension 2, 3 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm2 = norm_squared(&amplitudes);
        if (norm2 - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().copied().map(c).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis_vector(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidLabel(format!("|{index}> in dimension {dim}")));
        }
        let mut amplitudes = vec![c(0.0); dim];
        amplitudes[index] = c(1.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

fn norm_squared(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Rescales `amplitudes` to unit norm.
pub fn normalize(amplitudes: &[Complex64]) -> Result<QuantumState> {
    check_dim(amplitudes.len())?;
    if amplitudes.iter().all(|a| a.norm() < ZERO_AMPLITUDE) {
        return Err(Error::ZeroVector);
    }
    let norm = norm_squared(amplitudes).sqrt();
    Ok(QuantumState {
        amplitudes: amplitudes.iter().map(|a| a / norm).collect(),
    })
}

pub fn normalize_real(amplitudes: &[f64]) -> Result<QuantumState> {
    normalize(&amplitudes.iter().copied().map(c).collect::<Vec<_>>())
}

/// Square complex matrix, row-major. Used for density matrices and POVM
/// elements alike.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![c(0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c(1.0);
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut m = Self::zeros(dim);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * dim + i] = c(e);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            same_dim(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// `|v><v|` (unnormalized vectors allowed).
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(v[i] * v[j].conj());
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        same_dim(self.dim, other.dim)?;
        Ok(Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        same_dim(self.dim, other.dim)?;
        Ok(Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self * other)`.
    pub fn trace_product(&self, other: &Matrix) -> Result<Complex64> {
        same_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut acc = c(0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        Ok(acc)
    }

    /// `<v|self|v>`, real part.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64> {
        same_dim(self.dim, state.dim())?;
        let v = state.amplitudes();
        let n = self.dim;
        let mut acc = c(0.0);
        for i in 0..n {
            for j in 0..n {
                acc += v[i].conj() * self.data[i * n + j] * v[j];
            }
        }
        Ok(acc.re)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        same_dim(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order. Only meaningful for Hermitian input.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.hermitian_eigenvalues().iter().all(|&e| e >= -tol)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 2, 3 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Matrix);

impl DensityMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        if !matrix.is_hermitian(TOL) {
            return Err(Error::InvalidDensity("not Hermitian"));
        }
        if (matrix.trace() - c(1.0)).norm() > TOL {
            return Err(Error::InvalidDensity("trace differs from 1"));
        }
        if matrix.hermitian_eigenvalues().iter().any(|&e| e < -TOL) {
            return Err(Error::InvalidDensity("negative eigenvalue"));
        }
        Ok(Self(matrix))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(Matrix::diagonal(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0.get(row, col)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(Matrix::identity(dim).scale(1.0 / dim as f64))
    }
}

/// `|psi><psi|`.
pub fn density_of(state: &QuantumState) -> DensityMatrix {
    DensityMatrix(Matrix::outer(state.amplitudes()))
}

/// Density matrix of an ensemble of pure states.
pub fn mix(ensemble: &[(f64, QuantumState)]) -> Result<DensityMatrix> {
    let Some((_, first)) = ensemble.first() else {
        return Err(Error::ProbabilityMismatch(0.0));
    };
    let dim = first.dim();
    let mut total = 0.0;
    let mut acc = Matrix::zeros(dim);
    for (p, state) in ensemble {
        if *p < 0.0 {
            return Err(Error::ProbabilityMismatch(*p));
        }
        same_dim(dim, state.dim())?;
        total += p;
        acc = acc.add(&Matrix::outer(state.amplitudes()).scale(*p))?;
    }
    if (total - 1.0).abs() > TOL {
        return Err(Error::ProbabilityMismatch(total));
    }
    DensityMatrix::new(acc)
}

/// A complete orthonormal basis with one label per vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    basis: Vec<QuantumState>,
    labels: Vec<Label>,
}

impl ProjectiveMeasurement {
    pub fn new(basis: Vec<QuantumState>, labels: Vec<Label>) -> Result<Self> {
        let dim = basis
            .first()
            .map(QuantumState::dim)
            .ok_or(Error::InvalidMeasurement("empty basis"))?;
        if basis.len() != dim {
            return Err(Error::InvalidMeasurement("basis is not complete"));
        }
        if labels.len() != dim {
            return Err(Error::InvalidMeasurement("one label per basis vector required"));
        }
        for (i, u) in basis.iter().enumerate() {
            same_dim(dim, u.dim())?;
            for v in &basis[i + 1..] {
                if u.inner(v)?.norm() > TOL {
                    return Err(Error::InvalidMeasurement("basis vectors are not orthogonal"));
                }
            }
        }
        Ok(Self { basis, labels })
    }

    /// Computational basis with labels `0..dim`.
    pub fn computational(dim: usize) -> Result<Self> {
        let basis = (0..dim)
            .map(|i| QuantumState::basis_vector(dim, i))
            .collect::<Result<Vec<_>>>()?;
        let labels = (0..dim as u8).map(Label::Value).collect();
        Self::new(basis, labels)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QuantumState] {
        &self.basis
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Born-rule probabilities `|<b_i|psi>|^2`.
    pub fn probabilities(&self, state: &QuantumState) -> Result<Vec<f64>> {
        same_dim(self.dim(), state.dim())?;
        self.basis.iter().map(|b| b.overlap(state)).collect()
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            elements: self.basis.iter().map(|b| Matrix::outer(b.amplitudes())).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Positive operator-valued measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<Matrix>,
    labels: Vec<Label>,
}

impl Povm {
    pub fn new(elements: Vec<Matrix>, labels: Vec<Label>) -> Result<Self> {
        let dim = elements
            .first()
            .map(Matrix::dim)
            .ok_or(Error::InvalidMeasurement("no elements"))?;
        check_dim(dim)?;
        if labels.len() != elements.len() {
            return Err(Error::InvalidMeasurement("one label per element required"));
        }
        let mut sum = Matrix::zeros(dim);
        for e in &elements {
            same_dim(dim, e.dim())?;
            if !e.is_psd(TOL) {
                return Err(Error::InvalidMeasurement("element is not positive semidefinite"));
            }
            sum = sum.add(e)?;
        }
        if sum.max_abs_diff(&Matrix::identity(dim))? > TOL {
            return Err(Error::InvalidMeasurement("elements do not sum to identity"));
        }
        Ok(Self { elements, labels })
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// `Tr(E_i rho)` for every element.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        same_dim(self.dim(), rho.dim())?;
        self.elements
            .iter()
            .map(|e| Ok(e.trace_product(rho.matrix())?.re.max(0.0)))
            .collect()
    }

    /// Same as [`Povm::probabilities`] for a pure state, without building
    /// its density matrix.
    pub fn probabilities_pure(&self, state: &QuantumState) -> Result<Vec<f64>> {
        same_dim(self.dim(), state.dim())?;
        self.elements
            .iter()
            .map(|e| Ok(e.expectation(state)?.max(0.0)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub label: Label,
    pub index: usize,
    /// Collapsed state; only projective measurements produce one.
    pub post_state: Option<QuantumState>,
}

pub fn measure_projective(
    state: &QuantumState,
    m: &ProjectiveMeasurement,
    randomness: &mut RandomStream,
) -> Result<MeasurementOutcome> {
    let probs = m.probabilities(state)?;
    let index = randomness.weighted(&probs);
    Ok(MeasurementOutcome {
        label: m.labels[index],
        index,
        post_state: Some(m.basis[index].clone()),
    })
}

pub fn measure_povm(state: &DensityMatrix, p: &Povm, randomness: &mut RandomStream) -> Result<MeasurementOutcome> {
    let probs = p.probabilities(state)?;
    let index = randomness.weighted(&probs);
    Ok(MeasurementOutcome {
        label: p.labels[index],
        index,
        post_state: None,
    })
}

/// POVM measurement of a pure state.
pub fn measure_povm_pure(state: &QuantumState, p: &Povm, randomness: &mut RandomStream) -> Result<MeasurementOutcome> {
    let probs = p.probabilities_pure(state)?;
    let index = randomness.weighted(&probs);
    Ok(MeasurementOutcome {
        label: p.labels[index],
        index,
        post_state: None,
    })
}

/// `1/2 Tr|r0 - r1|`, from the eigenvalues of the Hermitian difference.
pub fn trace_distance(r0: &DensityMatrix, r1: &DensityMatrix) -> Result<f64> {
    let diff = r0.matrix().sub(r1.matrix())?;
    let d: f64 = diff.hermitian_eigenvalues().iter().map(|e| e.abs()).sum::<f64>() / 2.0;
    Ok(d.clamp(0.0, 1.0))
}

/// Optimal probability of guessing which of two equiprobable states was sent.
pub fn helstrom_success(r0: &DensityMatrix, r1: &DensityMatrix) -> Result<f64> {
    Ok(0.5 + 0.5 * trace_distance(r0, r1)?)
}

/// Measures one half of the singlet `(|01> - |10>)/sqrt(2)` in `keep_basis`.
///
/// Returns the outcome index on the measured half and the state the other
/// half collapses to. The singlet is antisymmetric under exchange, so it does
/// not matter which party is called the measuring one.
pub fn steer_epr(keep_basis: &ProjectiveMeasurement, randomness: &mut RandomStream) -> Result<(u8, QuantumState)> {
    if keep_basis.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: keep_basis.dim(),
            right: 2,
        });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // |q_measured q_other>, index = 2*measured + other
    let singlet = [c(0.0), c(h), c(-h), c(0.0)];

    let conditional = |v: &QuantumState| -> [Complex64; 2] {
        let a = v.amplitudes();
        let mut out = [c(0.0); 2];
        for (j, o) in out.iter_mut().enumerate() {
            *o = a[0].conj() * singlet[j] + a[1].conj() * singlet[2 + j];
        }
        out
    };
    let branches: Vec<[Complex64; 2]> = keep_basis.basis().iter().map(conditional).collect();
    let probs: Vec<f64> = branches.iter().map(|b| norm_squared(b)).collect();
    let k = randomness.weighted(&probs);
    let post = normalize(&branches[k])?;
    Ok((k as u8, post))
}
