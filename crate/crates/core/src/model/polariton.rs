//! Normal modes (polaritons) of the quadratic Hamiltonian.
//!
//! In quadratures `r = (x_a, p_a, x_b, p_b)` with `x = (c + c†)/√2`,
//! `p = i(c† - c)/√2` the Hamiltonian reads `H = ½ rᵀ M r - (ω_m - Δ)/2` with
//!
//! ```text
//!     | -Δ   0   2G   0  |
//! M = |  0  -Δ   0    0  |
//!     | 2G   0   ω_m  0  |
//!     |  0   0   0    ω_m|
//! ```
//!
//! Williamson's theorem gives a symplectic `S` with `M = Sᵀ D S`,
//! `D = diag(ω_A, ω_A, ω_B, ω_B)`. The rows of `S` are the polariton quadratures.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};

use super::ModelParams;
use crate::qops::{momentum, position, LinearMap, Mode, QOperator, QState, SpaceDims};
use crate::{Error, Result, C64};

/// Standard symplectic form for the ordering `(x_a, p_a, x_b, p_b)`.
pub(crate) fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

fn quadrature_matrix(params: &ModelParams, delta: f64) -> Matrix4<f64> {
    let g2 = 2.0 * params.coupling;
    Matrix4::new(
        -delta, 0.0, g2, 0.0, //
        0.0, -delta, 0.0, 0.0, //
        g2, 0.0, params.omega_m, 0.0, //
        0.0, 0.0, 0.0, params.omega_m,
    )
}

/// Closed-form normal-mode frequencies `(ω_A, ω_B)`, `ω_A ≥ ω_B`.
///
/// `ω² = [Δ² + ω_m² ± sqrt((Δ² - ω_m²)² - 16 G² Δ ω_m)] / 2`.
pub fn normal_mode_frequencies(params: &ModelParams, delta: f64) -> Result<(f64, f64)> {
    let wm = params.omega_m;
    let g = params.coupling;
    let d2 = delta * delta;
    let disc = (d2 - wm * wm).powi(2) - 16.0 * g * g * delta * wm;
    if disc < 0.0 {
        return Err(Error::Stability {
            delta,
            reason: format!("negative discriminant {disc:e}"),
        });
    }
    let root = disc.sqrt();
    let upper = 0.5 * (d2 + wm * wm + root);
    let lower = 0.5 * (d2 + wm * wm - root);
    if lower <= 0.0 {
        return Err(Error::Stability {
            delta,
            reason: format!("lower branch frequency squared is {lower:e}"),
        });
    }
    Ok((upper.sqrt(), lower.sqrt()))
}

/// Symplectic diagonalization of the Hamiltonian at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    pub delta: f64,
    /// Upper branch frequency.
    pub omega_a: f64,
    /// Lower branch frequency.
    pub omega_b: f64,
    /// Rows `(X_A, P_A, X_B, P_B)` in terms of `(x_a, p_a, x_b, p_b)`.
    pub symplectic: Matrix4<f64>,
    /// `H = ω_A N_A + ω_B N_B + constant`.
    pub constant: f64,
}

impl NormalModes {
    /// Polariton populations `(N_A, N_B)` from the symmetrized second moments
    /// `m_jk = <{r_j, r_k}>/2` of the bare quadratures.
    pub fn populations(&self, moments: &Matrix4<f64>) -> (f64, f64) {
        let s = &self.symplectic;
        let quad = |row: usize| {
            let v: Vector4<f64> = s.row(row).transpose();
            v.dot(&(moments * v))
        };
        (
            0.5 * (quad(0) + quad(1) - 1.0),
            0.5 * (quad(2) + quad(3) - 1.0),
        )
    }

    /// Energy of the state with `n_a` A-quanta and `n_b` B-quanta.
    pub fn level(&self, n_a: usize, n_b: usize) -> f64 {
        self.omega_a * n_a as f64 + self.omega_b * n_b as f64 + self.constant
    }
}

/// Williamson decomposition of the quadrature matrix at `delta`.
pub fn normal_modes(params: &ModelParams, delta: f64) -> Result<NormalModes> {
    // Stability check first; it also gives a clean error for soft modes.
    normal_mode_frequencies(params, delta)?;
    let m = quadrature_matrix(params, delta);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|&e| e <= 0.0) {
        return Err(Error::Stability {
            delta,
            reason: "quadrature matrix is not positive definite".into(),
        });
    }
    let sqrt_m = &eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let omega = symplectic_form();
    let antisym = sqrt_m * omega * sqrt_m;
    let sq = -(antisym * antisym);
    let sq = 0.5 * (sq + sq.transpose());
    let eig2 = SymmetricEigen::new(sq);

    // Eigenvalues of -A² come in equal pairs ω_k²; pick one vector u per pair
    // and complete it with A u / ω_k.
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig2.eigenvalues[j].total_cmp(&eig2.eigenvalues[i]));
    let column = |idx: usize| -> Vector4<f64> { eig2.eigenvectors.column(idx).into() };
    let mut cols: Vec<Vector4<f64>> = Vec::with_capacity(4);
    let mut freqs = Vec::with_capacity(2);
    let mut push_branch = |idx: usize, u: Vector4<f64>, cols: &mut Vec<Vector4<f64>>| {
        let u = u / u.norm();
        let w = eig2.eigenvalues[idx].max(0.0).sqrt();
        let v = antisym * u / w;
        cols.push(u);
        cols.push(-v);
        freqs.push(w);
    };
    push_branch(order[0], column(order[0]), &mut cols);
    // The lower branch: the remaining eigenvector least contained in the
    // upper-branch plane.
    let (idx, u) = order[1..]
        .iter()
        .map(|&idx| {
            let mut u = column(idx);
            for c in &cols {
                u -= c * c.dot(&u);
            }
            (idx, u)
        })
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("three candidates remain");
    push_branch(idx, u, &mut cols);
    let o = Matrix4::from_columns(&cols);
    let d_inv_sqrt = Matrix4::from_diagonal(&Vector4::new(
        freqs[0].powf(-0.5),
        freqs[0].powf(-0.5),
        freqs[1].powf(-0.5),
        freqs[1].powf(-0.5),
    ));
    let symplectic = d_inv_sqrt * o.transpose() * sqrt_m;
    let (omega_a, omega_b) = (freqs[0], freqs[1]);
    Ok(NormalModes {
        delta,
        omega_a,
        omega_b,
        symplectic,
        constant: 0.5 * (omega_a + omega_b) - 0.5 * (params.omega_m - delta),
    })
}

/// The four bare quadrature operators, used to evaluate polariton
/// populations of a state without building dense polariton operators.
#[derive(Debug, Clone)]
pub struct QuadratureProbe {
    dims: SpaceDims,
    ops: [QOperator; 4],
}

impl QuadratureProbe {
    pub fn new(dims: SpaceDims) -> Self {
        Self {
            dims,
            ops: [
                position(dims, Mode::Photon),
                momentum(dims, Mode::Photon),
                position(dims, Mode::Phonon),
                momentum(dims, Mode::Phonon),
            ],
        }
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn operators(&self) -> &[QOperator; 4] {
        &self.ops
    }

    /// Symmetrized second moments `Re <r_j r_k>` of a normalized state vector.
    pub fn moments(&self, psi: &[C64]) -> Matrix4<f64> {
        let d = self.dims.dim();
        let mut images = vec![C64::new(0.0, 0.0); 4 * d];
        for (op, chunk) in self.ops.iter().zip(images.chunks_mut(d)) {
            op.apply_into(psi, chunk);
        }
        let mut m = Matrix4::zeros();
        for j in 0..4 {
            for k in j..4 {
                let v = crate::qops::inner(&images[j * d..(j + 1) * d], &images[k * d..(k + 1) * d]).re;
                m[(j, k)] = v;
                m[(k, j)] = v;
            }
        }
        m
    }

    /// `(N_A, N_B)` of a normalized state vector.
    pub fn populations(&self, modes: &NormalModes, psi: &[C64]) -> (f64, f64) {
        modes.populations(&self.moments(psi))
    }
}

/// Normal-mode data at one detuning, including dense polariton number operators.
#[derive(Debug, Clone)]
pub struct PolaritonData {
    pub modes: NormalModes,
    pub n_a_op: QOperator,
    pub n_b_op: QOperator,
}

impl PolaritonData {
    pub fn omega_a(&self) -> f64 {
        self.modes.omega_a
    }

    pub fn omega_b(&self) -> f64 {
        self.modes.omega_b
    }

    pub fn bogoliubov(&self) -> &Matrix4<f64> {
        &self.modes.symplectic
    }

    pub fn constant(&self) -> f64 {
        self.modes.constant
    }

    /// Polariton populations of a state via the dense operators.
    pub fn populations(&self, state: &QState) -> Result<(f64, f64)> {
        Ok((
            crate::qops::expectation(state, &self.n_a_op)?.re,
            crate::qops::expectation(state, &self.n_b_op)?.re,
        ))
    }
}

/// Bogoliubov transformation and polariton number operators at `delta`.
pub fn polariton_data(params: &ModelParams, delta: f64, dims: SpaceDims) -> Result<PolaritonData> {
    let modes = normal_modes(params, delta)?;
    let probe = QuadratureProbe::new(dims);
    let quads: Vec<&DMatrix<C64>> = probe.ops.iter().map(|q| q.matrix()).collect();
    let d = dims.dim();
    let combo = |row: usize| {
        let mut out = DMatrix::<C64>::zeros(d, d);
        for (j, q) in quads.iter().enumerate() {
            out += *q * C64::from(modes.symplectic[(row, j)]);
        }
        out
    };
    let identity = DMatrix::<C64>::identity(d, d);
    let number = |k: usize| -> Result<QOperator> {
        let x = combo(2 * k);
        let p = combo(2 * k + 1);
        let m = (&x * &x + &p * &p - &identity) * C64::from(0.5);
        // Products of Hermitian quadratures are Hermitian up to rounding; symmetrize.
        let m = (&m + m.adjoint()) * C64::from(0.5);
        QOperator::from_matrix(dims, m, true)
    };
    Ok(PolaritonData {
        n_a_op: number(0)?,
        n_b_op: number(1)?,
        modes,
    })
}
