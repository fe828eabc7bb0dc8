//! Initial states of the cycle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::model::{hamiltonian, ModelParams};
use crate::qops::{QState, SpaceDims};
use crate::traj::RngStream;
use crate::{Error, Result, C64};

/// Largest tolerated probability mass of the thermal distribution beyond the cutoff.
pub const MAX_TAIL_MASS: f64 = 0.05;

/// Occupation distribution the phonon-like mode is prepared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Bose–Einstein distribution at the bath occupation.
    Thermal,
    /// A fixed number of quanta.
    Fock(usize),
}

impl std::fmt::Display for InitialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialState::Thermal => f.write_str("thermal"),
            InitialState::Fock(n) => write!(f, "fock:{n}"),
        }
    }
}

impl std::str::FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "thermal" {
            return Ok(InitialState::Thermal);
        }
        if let Some(n) = s.strip_prefix("fock:") {
            return n
                .trim()
                .parse()
                .map(InitialState::Fock)
                .map_err(|_| Error::Config(format!("invalid Fock level in '{s}'")));
        }
        Err(Error::Config(format!(
            "unknown initial state '{s}' (expected thermal or fock:N)"
        )))
    }
}

/// Basis in which the quanta are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrepBasis {
    /// Eigenstates `|0_A, n_B>` of `H(Δ_i)`.
    Polariton,
    /// Bare states `|0, n>` (photon vacuum, `n` phonons).
    Bare,
}

impl PrepBasis {
    pub fn name(&self) -> &'static str {
        match self {
            PrepBasis::Polariton => "polariton",
            PrepBasis::Bare => "bare",
        }
    }
}

impl std::str::FromStr for PrepBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polariton" => Ok(PrepBasis::Polariton),
            "bare" => Ok(PrepBasis::Bare),
            other => Err(Error::Config(format!(
                "unknown preparation basis '{other}' (expected polariton or bare)"
            ))),
        }
    }
}

/// Bose–Einstein occupation probabilities `n̄ⁿ/(1+n̄)ⁿ⁺¹`, truncated to
/// `cutoff` levels and renormalized. Fails if the discarded tail exceeds
/// [`MAX_TAIL_MASS`].
pub fn thermal_distribution(nbar: f64, cutoff: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::Config(format!("thermal occupation must be non-negative, got {nbar}")));
    }
    let ratio = nbar / (1.0 + nbar);
    let tail = ratio.powi(cutoff as i32);
    if tail > MAX_TAIL_MASS {
        return Err(Error::Config(format!(
            "thermal occupation {nbar} leaves {:.1}% of the distribution above the phonon cutoff {cutoff} (max {:.0}%)",
            100.0 * tail,
            100.0 * MAX_TAIL_MASS
        )));
    }
    let raw: Vec<f64> = (0..cutoff).map(|n| ratio.powi(n as i32) / (1.0 + nbar)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// Draw an index from a discrete distribution.
fn draw(probabilities: &[f64], rng: &mut RngStream) -> usize {
    rng.categorical(probabilities)
}

/// Photon vacuum times a thermally drawn phonon Fock state.
pub fn sample_initial_state(params: &ModelParams, dims: SpaceDims, rng: &mut RngStream) -> Result<QState> {
    let p = thermal_distribution(params.nbar_th, dims.n_phonon())?;
    QState::fock(dims, 0, draw(&p, rng))
}

/// Precomputed initial states and their statistics.
#[derive(Debug, Clone)]
pub struct Preparation {
    dims: SpaceDims,
    probabilities: Vec<f64>,
    states: Vec<Option<DVector<C64>>>,
    energies: Vec<f64>,
}

impl Preparation {
    pub fn new(
        params: &ModelParams,
        dims: SpaceDims,
        initial: InitialState,
        basis: PrepBasis,
    ) -> Result<Self> {
        let cutoff = dims.n_phonon();
        let probabilities = match initial {
            InitialState::Thermal => thermal_distribution(params.nbar_th, cutoff)?,
            InitialState::Fock(n) => {
                if n >= cutoff {
                    return Err(Error::Config(format!(
                        "initial Fock level {n} is outside the phonon cutoff {cutoff}"
                    )));
                }
                let mut p = vec![0.0; cutoff];
                p[n] = 1.0;
                p
            }
        };
        let h = hamiltonian(params, params.delta_i, dims);
        let mut states = vec![None; cutoff];
        let mut energies = vec![0.0; cutoff];
        match basis {
            PrepBasis::Bare => {
                for n in (0..cutoff).filter(|&n| probabilities[n] > 0.0) {
                    let i = dims.index(0, n);
                    states[n] = Some(QState::fock(dims, 0, n)?.into_vector());
                    energies[n] = h.matrix()[(i, i)].re;
                }
            }
            PrepBasis::Polariton => {
                // H is real in the Fock basis.
                let real: DMatrix<f64> = h.matrix().map(|c| c.re);
                let eig = SymmetricEigen::new(real);
                let mut used = vec![false; dims.dim()];
                for n in (0..cutoff).filter(|&n| probabilities[n] > 0.0) {
                    let row = dims.index(0, n);
                    let best = (0..dims.dim())
                        .max_by(|&a, &b| {
                            eig.eigenvectors[(row, a)]
                                .abs()
                                .total_cmp(&eig.eigenvectors[(row, b)].abs())
                        })
                        .expect("non-empty space");
                    if used[best] {
                        return Err(Error::Config(format!(
                            "cannot identify a dressed state for {n} quanta at cutoff {dims}; raise the cutoff"
                        )));
                    }
                    used[best] = true;
                    let v = eig.eigenvectors.column(best);
                    // fix the global phase so the bare component is positive
                    let sign = v[row].signum();
                    states[n] = Some(DVector::from_iterator(
                        dims.dim(),
                        v.iter().map(|&x| C64::new(sign * x, 0.0)),
                    ));
                    energies[n] = eig.eigenvalues[best];
                }
            }
        }
        Ok(Self {
            dims,
            probabilities,
            states,
            energies,
        })
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    /// Probability of preparing `n` quanta.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `<H(Δ_i)>` of the state with `n` quanta.
    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    /// Ensemble-averaged preparation energy `Σ P(n) E_n`.
    pub fn mean_energy(&self) -> f64 {
        self.probabilities
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| p * e)
            .sum()
    }

    /// Mean number of quanta of the preparation distribution.
    pub fn mean_quanta(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// State vector prepared with `n` quanta.
    pub fn state(&self, n: usize) -> Option<&DVector<C64>> {
        self.states.get(n).and_then(|s| s.as_ref())
    }

    /// Draw a level and return it with its state vector.
    pub fn sample(&self, rng: &mut RngStream) -> (usize, &DVector<C64>) {
        let n = draw(&self.probabilities, rng);
        (n, self.states[n].as_ref().expect("drawn levels have states"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::polariton_data;
    use crate::traj::StreamKind;

    #[test]
    fn thermal_weights_are_geometric() {
        let p = thermal_distribution(4.0, 200).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-12);
        assert!((p[1] - 0.16).abs() < 1e-12);
        assert!((p[4] - 0.2 * 0.8f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn heavy_tail_is_rejected() {
        assert!(matches!(thermal_distribution(4.0, 10), Err(Error::Config(_))));
        assert!(thermal_distribution(4.0, 20).is_ok());
    }

    #[test]
    fn zero_temperature_gives_vacuum() {
        let dims = SpaceDims::new(4, 4).unwrap();
        let params = ModelParams {
            nbar_th: 0.0,
            ..ModelParams::default()
        };
        let vac = QState::vacuum(dims);
        for i in 0..50 {
            let mut rng = RngStream::new(9, i, StreamKind::InitialState);
            assert_eq!(sample_initial_state(&params, dims, &mut rng).unwrap(), vac);
        }
    }

    #[test]
    fn dressed_states_are_polariton_number_states() {
        let dims = SpaceDims::new(16, 16).unwrap();
        let params = ModelParams::default();
        let prep = Preparation::new(&params, dims, InitialState::Thermal, PrepBasis::Polariton).unwrap();
        let data = polariton_data(&params, params.delta_i, dims).unwrap();
        for n in 0..5 {
            let s = QState::new(dims, prep.state(n).unwrap().clone()).unwrap();
            let (na, nb) = data.populations(&s).unwrap();
            assert!(na.abs() < 1e-6, "n={n}: N_A={na}");
            assert!((nb - n as f64).abs() < 1e-6, "n={n}: N_B={nb}");
            assert!((prep.energy(n) - data.modes.level(0, n)).abs() < 1e-8);
        }
    }

    #[test]
    fn parses_initial_state_names() {
        assert_eq!("thermal".parse::<InitialState>().unwrap(), InitialState::Thermal);
        assert_eq!("fock:4".parse::<InitialState>().unwrap(), InitialState::Fock(4));
        assert!("fock:x".parse::<InitialState>().is_err());
        assert_eq!(InitialState::Fock(3).to_string(), "fock:3");
    }
}
