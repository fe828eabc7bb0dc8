//! Operator algebra on the truncated photon ⊗ phonon Fock space.
//!
//! Basis ordering is lexicographic `|n_a, n_b>` with the photon index
//! outermost: `index = n_a * n_phonon + n_b`. Every CSV dump of populations
//! relies on this ordering.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// Fock-space cutoffs of the two modes. Levels `0..n_photon` and `0..n_phonon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDims {
    n_photon: usize,
    n_phonon: usize,
}

impl SpaceDims {
    pub fn new(n_photon: usize, n_phonon: usize) -> Result<Self> {
        if n_photon < 2 || n_phonon < 2 {
            return Err(Error::Config(format!(
                "Fock cutoffs must be at least 2, got ({n_photon}, {n_phonon})"
            )));
        }
        Ok(Self { n_photon, n_phonon })
    }

    pub fn n_photon(&self) -> usize {
        self.n_photon
    }

    pub fn n_phonon(&self) -> usize {
        self.n_phonon
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.n_photon * self.n_phonon
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        debug_assert!(n_a < self.n_photon && n_b < self.n_phonon);
        n_a * self.n_phonon + n_b
    }

    /// Inverse of [`SpaceDims::index`].
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / self.n_phonon, index % self.n_phonon)
    }

    pub fn cutoff(&self, mode: Mode) -> usize {
        match mode {
            Mode::Photon => self.n_photon,
            Mode::Phonon => self.n_phonon,
        }
    }
}

impl fmt::Display for SpaceDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n_photon, self.n_phonon)
    }
}

/// Which of the two bosonic modes an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Photon,
    Phonon,
}

/// Anything that can act linearly on a state vector of a fixed dimension.
///
/// Implemented by [`QOperator`] and by the structured Hamiltonians of the
/// model, so the integrators do not care how an operator is stored.
pub trait LinearMap: Sync {
    fn dim(&self) -> usize;

    /// `out = self * input`. Both slices have length [`LinearMap::dim`].
    fn apply_into(&self, input: &[C64], out: &mut [C64]);
}

/// Compressed row storage of the nonzero entries of a dense operator.
#[derive(Debug, Clone, PartialEq)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals }
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = C64::new(0.0, 0.0);
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for i in 0..self.row_ptr.len() - 1 {
            let xi = x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[k]] += self.vals[k].conj() * xi;
            }
        }
    }
}

/// Dense operator on the two-mode space.
///
/// The dense matrix is the canonical representation; the nonzero pattern is
/// cached at construction so matrix-vector products cost `O(nnz)`.
/// Operators are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct QOperator {
    dims: SpaceDims,
    matrix: DMatrix<C64>,
    hermitian: bool,
    csr: Csr,
}

impl QOperator {
    /// Wrap a dense matrix. `hermitian` is a promise by the caller; debug
    /// builds check it.
    pub fn from_matrix(dims: SpaceDims, matrix: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        let d = dims.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if hermitian && cfg!(debug_assertions) {
            let dev = hermitian_deviation(&matrix);
            let scale = matrix.iter().fold(1.0_f64, |m, v| m.max(v.norm()));
            assert!(
                dev <= HERMITIAN_TOL * scale,
                "operator flagged Hermitian deviates by {dev:e}"
            );
        }
        let csr = Csr::from_dense(&matrix);
        Ok(Self {
            dims,
            matrix,
            hermitian,
            csr,
        })
    }

    pub fn identity(dims: SpaceDims) -> Self {
        Self::from_matrix(dims, DMatrix::identity(dims.dim(), dims.dim()), true)
            .expect("dimensions consistent by construction")
    }

    pub fn zeros(dims: SpaceDims) -> Self {
        Self::from_matrix(dims, DMatrix::zeros(dims.dim(), dims.dim()), true)
            .expect("dimensions consistent by construction")
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn nnz(&self) -> usize {
        self.csr.vals.len()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix(self.dims, self.matrix.adjoint(), self.hermitian)
            .expect("adjoint preserves shape")
    }

    /// Multiply by a real scalar (keeps the Hermitian flag).
    pub fn scale(&self, s: f64) -> Self {
        Self::from_matrix(self.dims, self.matrix.map(|v| v * s), self.hermitian)
            .expect("scaling preserves shape")
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&(self * other)? - &(other * self)?)
    }

    /// Mark an operator as Hermitian after checking it numerically.
    pub fn into_hermitian(self) -> Result<Self> {
        let dev = hermitian_deviation(&self.matrix);
        if dev > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::Domain(format!(
                "operator is not Hermitian (deviation {dev:e})"
            )));
        }
        Ok(Self {
            hermitian: true,
            ..self
        })
    }

    /// Largest absolute matrix element.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `out = self^† * input`.
    pub fn apply_adjoint_into(&self, input: &[C64], out: &mut [C64]) {
        self.csr.apply_adjoint_into(input, out);
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape {
                expected: self.dims.dim(),
                found: other.dims.dim(),
            });
        }
        Ok(())
    }
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

impl LinearMap for QOperator {
    fn dim(&self) -> usize {
        self.dims.dim()
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        self.csr.apply_into(input, out);
    }
}

impl Mul for &QOperator {
    type Output = Result<QOperator>;

    fn mul(self, rhs: &QOperator) -> Result<QOperator> {
        self.check_same(rhs)?;
        QOperator::from_matrix(self.dims, &self.matrix * &rhs.matrix, false)
    }
}

impl Add for &QOperator {
    type Output = QOperator;

    /// Panics if the dimensions differ.
    fn add(self, rhs: &QOperator) -> QOperator {
        self.check_same(rhs).expect("operator dimensions must agree");
        QOperator::from_matrix(
            self.dims,
            &self.matrix + &rhs.matrix,
            self.hermitian && rhs.hermitian,
        )
        .expect("shapes checked")
    }
}

impl Sub for &QOperator {
    type Output = QOperator;

    /// Panics if the dimensions differ.
    fn sub(self, rhs: &QOperator) -> QOperator {
        self.check_same(rhs).expect("operator dimensions must agree");
        QOperator::from_matrix(
            self.dims,
            &self.matrix - &rhs.matrix,
            self.hermitian && rhs.hermitian,
        )
        .expect("shapes checked")
    }
}

/// Single-mode ladder matrix `<n-1|a|n> = sqrt(n)` of size `cutoff`.
fn ladder(cutoff: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Embed a single-mode matrix into the two-mode space.
fn embed(dims: SpaceDims, mode: Mode, single: &DMatrix<C64>) -> DMatrix<C64> {
    match mode {
        Mode::Photon => single.kronecker(&DMatrix::identity(dims.n_phonon, dims.n_phonon)),
        Mode::Phonon => DMatrix::identity(dims.n_photon, dims.n_photon).kronecker(single),
    }
}

/// Truncated annihilation operator of `mode`, identity on the other mode.
pub fn annihilation(dims: SpaceDims, mode: Mode) -> QOperator {
    let m = embed(dims, mode, &ladder(dims.cutoff(mode)));
    QOperator::from_matrix(dims, m, false).expect("embedding has the full dimension")
}

/// Truncated creation operator of `mode`.
pub fn creation(dims: SpaceDims, mode: Mode) -> QOperator {
    annihilation(dims, mode).adjoint()
}

/// Number operator of `mode`: diagonal with eigenvalues `0..cutoff`.
pub fn number_op(dims: SpaceDims, mode: Mode) -> QOperator {
    let cutoff = dims.cutoff(mode);
    let single = DMatrix::from_diagonal(&DVector::from_fn(cutoff, |n, _| C64::new(n as f64, 0.0)));
    QOperator::from_matrix(dims, embed(dims, mode, &single), true)
        .expect("embedding has the full dimension")
}

/// Position quadrature `x = (a + a†)/sqrt(2)` of `mode`.
pub fn position(dims: SpaceDims, mode: Mode) -> QOperator {
    let l = ladder(dims.cutoff(mode));
    let x = (&l + l.adjoint()) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    QOperator::from_matrix(dims, embed(dims, mode, &x), true).expect("full dimension")
}

/// Momentum quadrature `p = i(a† - a)/sqrt(2)` of `mode`.
pub fn momentum(dims: SpaceDims, mode: Mode) -> QOperator {
    let l = ladder(dims.cutoff(mode));
    let p = (l.adjoint() - &l) * C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    QOperator::from_matrix(dims, embed(dims, mode, &p), true).expect("full dimension")
}

/// Normalized pure state on the two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    dims: SpaceDims,
    vector: DVector<C64>,
}

impl QState {
    /// Normalize `vector` into a state. Fails on dimension mismatch or a zero vector.
    pub fn new(dims: SpaceDims, mut vector: DVector<C64>) -> Result<Self> {
        if vector.len() != dims.dim() {
            return Err(Error::Shape {
                expected: dims.dim(),
                found: vector.len(),
            });
        }
        let norm = vector.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!("cannot normalize vector of norm {norm}")));
        }
        vector.unscale_mut(norm);
        Ok(Self { dims, vector })
    }

    /// Basis state `|n_a, n_b>`.
    pub fn fock(dims: SpaceDims, n_a: usize, n_b: usize) -> Result<Self> {
        if n_a >= dims.n_photon || n_b >= dims.n_phonon {
            return Err(Error::Domain(format!(
                "Fock state |{n_a},{n_b}> outside cutoffs {dims}"
            )));
        }
        let mut v = DVector::zeros(dims.dim());
        v[dims.index(n_a, n_b)] = C64::new(1.0, 0.0);
        Ok(Self { dims, vector: v })
    }

    pub fn vacuum(dims: SpaceDims) -> Self {
        Self::fock(dims, 0, 0).expect("vacuum always inside the cutoffs")
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vector
    }

    pub fn as_slice(&self) -> &[C64] {
        self.vector.as_slice()
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.vector
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.vector.dotc(&other.vector).norm_sqr()
    }

    /// Probability of each basis state, in basis order.
    pub fn populations(&self) -> Vec<f64> {
        self.vector.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `<psi|op|psi>`.
pub fn expectation(state: &QState, op: &QOperator) -> Result<C64> {
    check_dims(state, op)?;
    let mut tmp = vec![C64::new(0.0, 0.0); state.dims.dim()];
    op.apply_into(state.as_slice(), &mut tmp);
    Ok(inner(state.as_slice(), &tmp))
}

/// `op |psi>` without renormalization.
pub fn apply(op: &QOperator, state: &QState) -> Result<DVector<C64>> {
    check_dims(state, op)?;
    let mut out = DVector::zeros(state.dims.dim());
    op.apply_into(state.as_slice(), out.as_mut_slice());
    Ok(out)
}

fn check_dims(state: &QState, op: &QOperator) -> Result<()> {
    if state.dims != op.dims {
        return Err(Error::Shape {
            expected: op.dims.dim(),
            found: state.dims.dim(),
        });
    }
    Ok(())
}

/// `<x|y>` with the conjugate on the left.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum()
}

/// Scale `x` to unit norm and return the norm it had.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm_sqr(x).sqrt();
    if n > 0.0 {
        let inv = 1.0 / n;
        x.iter_mut().for_each(|c| *c *= inv);
    }
    n
}
