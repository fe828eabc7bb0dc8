//! Jump trajectories under a constant Hamiltonian.
//!
//! With `H` fixed and no measurement, the no-jump evolution is the linear map
//! `exp(-i H_eff t)`, `H_eff = H - (i/2) Σ C†C`. The propagators for
//! `dt·2^k` are tabulated once and shared by all trajectories; a jump happens
//! when the squared norm drops below a uniform threshold, located to within
//! one `dt` by bisection over the table.

use nalgebra::DMatrix;

use super::jumps::{BathChannels, Channel};
use super::rng::RngStream;
use crate::model::{hamiltonian, ModelParams};
use crate::qops::{norm_sqr, normalize, SpaceDims};
use crate::{Error, Result, C64};

const DEFAULT_LEVELS: usize = 12;

/// Dense complex matrix stored as separate real and imaginary row-major
/// planes, which keeps the matrix-vector kernel vectorizable.
#[derive(Debug, Clone)]
struct SplitMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitMatrix {
    fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { n, re, im }
    }

    fn apply(&self, xr: &[f64], xi: &[f64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let rr = &self.re[i * self.n..(i + 1) * self.n];
            let ri = &self.im[i * self.n..(i + 1) * self.n];
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..self.n {
                sr += rr[j] * xr[j] - ri[j] * xi[j];
                si += rr[j] * xi[j] + ri[j] * xr[j];
            }
            *o = C64::new(sr, si);
        }
    }
}

/// `exp(m)` by scaling and squaring with a Taylor core.
pub(crate) fn expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * C64::from(scale);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..30 {
        term = &term * &a * C64::from(1.0 / k as f64);
        result += &term;
        if term.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Tabulated no-jump propagators at one fixed detuning.
#[derive(Debug, Clone)]
pub struct ConstantPropagator {
    dims: SpaceDims,
    dt: f64,
    delta: f64,
    channels: BathChannels,
    levels: Vec<SplitMatrix>,
}

/// Scratch buffers for [`ConstantPropagator::evolve`].
#[derive(Debug, Clone)]
pub struct WaitingScratch {
    xr: Vec<f64>,
    xi: Vec<f64>,
    out: Vec<C64>,
}

impl WaitingScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            xr: vec![0.0; dim],
            xi: vec![0.0; dim],
            out: vec![C64::new(0.0, 0.0); dim],
        }
    }
}

impl ConstantPropagator {
    pub fn new(
        params: &ModelParams,
        delta: f64,
        dims: SpaceDims,
        channels: BathChannels,
        dt: f64,
    ) -> Result<Self> {
        Self::with_levels(params, delta, dims, channels, dt, DEFAULT_LEVELS)
    }

    pub fn with_levels(
        params: &ModelParams,
        delta: f64,
        dims: SpaceDims,
        channels: BathChannels,
        dt: f64,
        n_levels: usize,
    ) -> Result<Self> {
        if channels.dims() != dims {
            return Err(Error::Shape {
                expected: dims.dim(),
                found: channels.dims().dim(),
            });
        }
        if n_levels == 0 {
            return Err(Error::Config("at least one propagator level is required".into()));
        }
        let h = hamiltonian(params, delta, dims);
        let mut generator = h.matrix() * C64::new(0.0, -dt);
        for (i, g) in channels.decay_diagonal().iter().enumerate() {
            generator[(i, i)] -= C64::from(0.5 * dt * g);
        }
        let mut current = expm(&generator);
        let mut levels = Vec::with_capacity(n_levels);
        for k in 0..n_levels {
            levels.push(SplitMatrix::from_dense(&current));
            if k + 1 < n_levels {
                current = &current * &current;
            }
        }
        Ok(Self {
            dims,
            dt,
            delta,
            channels,
            levels,
        })
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn apply_level(&self, k: usize, psi: &[C64], scratch: &mut WaitingScratch) {
        for (j, c) in psi.iter().enumerate() {
            scratch.xr[j] = c.re;
            scratch.xi[j] = c.im;
        }
        self.levels[k].apply(&scratch.xr, &scratch.xi, &mut scratch.out);
    }

    /// Evolve a state over `n_steps` steps of `dt`, with jumps. The state is
    /// normalized on entry and on exit. Returns the jumps that occurred.
    pub fn evolve(
        &self,
        psi: &mut [C64],
        n_steps: usize,
        rng: &mut RngStream,
        scratch: &mut WaitingScratch,
    ) -> Result<Vec<Channel>> {
        let mut jumps = Vec::new();
        normalize(psi);
        let active = self.channels.is_active();
        let mut threshold = if active { rng.uniform_open() } else { 0.0 };
        let mut remaining = n_steps;
        let top = self.levels.len() - 1;
        while remaining > 0 {
            let mut k = (usize::BITS - 1 - remaining.leading_zeros()) as usize;
            k = k.min(top);
            loop {
                self.apply_level(k, psi, scratch);
                let n2 = norm_sqr(&scratch.out);
                if !n2.is_finite() {
                    return Err(Error::Integrator("non-finite state in constant-H propagation".into()));
                }
                if n2 > threshold {
                    psi.copy_from_slice(&scratch.out);
                    remaining -= 1 << k;
                    break;
                }
                if k > 0 {
                    k -= 1;
                    continue;
                }
                // The norm crosses the threshold during this single step.
                psi.copy_from_slice(&scratch.out);
                remaining -= 1;
                let weights = self.channels.channel_weights(psi);
                if weights.iter().sum::<f64>() > 0.0 {
                    let channel = Channel::ALL[rng.categorical(&weights)];
                    self.channels.apply_jump(channel, psi);
                    jumps.push(channel);
                }
                normalize(psi);
                threshold = rng.uniform_open();
                break;
            }
        }
        let n = normalize(psi);
        if !(n > 0.0) {
            return Err(Error::Integrator("state vanished in constant-H propagation".into()));
        }
        Ok(jumps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::QState;
    use crate::traj::rng::StreamKind;
    use crate::traj::unitary::TaylorPropagator;

    #[test]
    fn expm_of_small_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, 1.0),
            C64::new(-2.0, 0.0),
        ]));
        let e = expm(&m);
        assert!((e[(0, 0)] - C64::from_polar(1.0, 1.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - C64::from((-2.0f64).exp())).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-16);
    }

    #[test]
    fn unitary_levels_agree_with_taylor_steps() {
        let dims = SpaceDims::new(5, 5).unwrap();
        let params = ModelParams::default();
        let prop = ConstantPropagator::with_levels(&params, -1.1, dims, BathChannels::none(dims), 0.01, 6)
            .unwrap();
        let h = crate::model::hamiltonian(&params, -1.1, dims);
        let start = QState::fock(dims, 1, 2).unwrap();
        let mut a = start.as_slice().to_vec();
        let mut b = a.clone();
        let mut rng = RngStream::new(0, 0, StreamKind::Jumps);
        let mut scratch = WaitingScratch::new(dims.dim());
        let jumps = prop.evolve(&mut a, 77, &mut rng, &mut scratch).unwrap();
        assert!(jumps.is_empty());
        let mut taylor = TaylorPropagator::new(dims.dim());
        for _ in 0..77 {
            taylor.step(&mut b, &h, 0.01).unwrap();
        }
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-11, "{diff:e}");
    }

    #[test]
    fn damped_levels_decay_as_expected() {
        let dims = SpaceDims::new(3, 2).unwrap();
        let params = ModelParams {
            coupling: 0.0,
            ..ModelParams::default()
        };
        let channels = BathChannels::new(dims, 0.3, 0.0, 0.0);
        let prop = ConstantPropagator::with_levels(&params, -2.0, dims, channels, 0.01, 4).unwrap();
        let psi = QState::fock(dims, 2, 0).unwrap();
        let mut scratch = WaitingScratch::new(dims.dim());
        prop.apply_level(3, psi.as_slice(), &mut scratch);
        // |2> decays at 2κ in the norm squared over 8 dt
        let n2 = norm_sqr(&scratch.out);
        assert!((n2 - (-2.0 * 0.3 * 0.08f64).exp()).abs() < 1e-12);
    }
}
