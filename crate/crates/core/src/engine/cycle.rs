//! Single-trajectory driver.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::model::{normal_modes, NormalModes, QuadratureProbe, Schedule, SweptHamiltonian};
use crate::qops::{annihilation, normalize, LinearMap, Mode, QOperator, QState};
use crate::traj::sse::{absorptive_in_place, dispersive_in_place};
use crate::traj::{
    BathChannels, ConstantPropagator, JumpOutcome, RngStream, Scheme, SseScratch, StreamKind,
    TaylorPropagator, WaitingScratch,
};
use crate::{Error, Result, C64};

use super::prepare::Preparation;
use super::{CycleConfig, CycleSpan, Stroke4Mode};

/// Ensemble-independent observables of one trajectory at one recording time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub delta: f64,
    /// `<a†a>`.
    pub photons: f64,
    /// Polariton populations `<N_A>`, `<N_B>`.
    pub pop_a: f64,
    pub pop_b: f64,
}

/// Everything recorded along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: u64,
    /// Master seed the trajectory's streams derive from.
    pub seed: u64,
    /// Number of quanta drawn for the initial state.
    pub initial_level: usize,
    /// Work over the strokes that were run.
    pub work: f64,
    /// Work of the first and third strokes.
    pub stroke_work: [f64; 2],
    /// `<H>` at t = 0 and at the end of every completed stroke.
    pub boundary_energies: Vec<f64>,
    /// Heat absorbed in the hot stroke; `None` unless the full cycle ran.
    pub q_in: Option<f64>,
    pub jump_count: usize,
    pub series: Vec<SeriesPoint>,
}

/// `-<a†a> dΔ` for a normalized state.
pub fn work_increment(state: &QState, delta_step: f64) -> f64 {
    let dims = state.dims();
    let photons: f64 = state
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, c)| dims.levels(i).0 as f64 * c.norm_sqr())
        .sum();
    -photons * delta_step
}

/// Heat absorbed during the hot stroke from `<H>` at the stroke boundaries
/// `[E_0, E_1, E_2, E_3, E_4]`. With `fresh_energy` (resampled hot stroke)
/// the heat is `fresh_energy - E_3`, otherwise `E_4 - E_3`.
pub fn heat_bookkeeping(boundary_energies: &[f64], fresh_energy: Option<f64>) -> Result<f64> {
    let needed = if fresh_energy.is_some() { 4 } else { 5 };
    if boundary_energies.len() < needed {
        return Err(Error::Domain(format!(
            "heat bookkeeping needs {needed} boundary energies, got {}",
            boundary_energies.len()
        )));
    }
    let end3 = boundary_energies[3];
    Ok(match fresh_energy {
        Some(e) => e - end3,
        None => boundary_energies[4] - end3,
    })
}

/// Diagonal operator, used for the photon number.
#[derive(Debug, Clone)]
struct Diagonal(Vec<f64>);

impl LinearMap for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        for ((o, x), d) in out.iter_mut().zip(input).zip(&self.0) {
            *o = x * *d;
        }
    }
}

impl Diagonal {
    fn mean(&self, psi: &[C64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (c, d) in psi.iter().zip(&self.0) {
            let p = c.norm_sqr();
            num += p * d;
            den += p;
        }
        num / den
    }
}

/// Detuning grid of one swept stroke.
#[derive(Debug, Clone)]
struct Sweep {
    dt: f64,
    /// Δ at the step boundaries (`n + 1` values) and midpoints (`n` values).
    deltas: Vec<f64>,
    mids: Vec<f64>,
    /// Step indices after which a point is recorded, with the normal modes there.
    records: Vec<(usize, NormalModes)>,
}

impl Sweep {
    fn new(schedule: &Schedule, n_steps: usize, record_every: usize, params: &crate::model::ModelParams) -> Result<Self> {
        let t = schedule.duration();
        let dt = t / n_steps as f64;
        let at = |k: usize| if k == n_steps { t } else { k as f64 * dt };
        let deltas = (0..=n_steps).map(|k| schedule.delta(at(k))).collect::<Result<Vec<_>>>()?;
        let mids = (0..n_steps)
            .map(|k| schedule.delta((k as f64 + 0.5) * dt))
            .collect::<Result<Vec<_>>>()?;
        let records = record_steps(n_steps, record_every)
            .into_iter()
            .map(|k| Ok((k, normal_modes(params, deltas[k])?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dt,
            deltas,
            mids,
            records,
        })
    }

    fn n_steps(&self) -> usize {
        self.mids.len()
    }
}

/// A thermalization stroke at fixed detuning.
#[derive(Debug, Clone)]
struct Hold {
    delta: f64,
    dt: f64,
    records: Vec<usize>,
    modes: NormalModes,
    propagator: Option<ConstantPropagator>,
}

/// Step indices `k` in `1..=n` that are recorded: multiples of `every` and the last step.
fn record_steps(n: usize, every: usize) -> Vec<usize> {
    let every = every.max(1);
    let mut out: Vec<usize> = (1..=n).filter(|k| k % every == 0).collect();
    if out.last() != Some(&n) && n > 0 {
        out.push(n);
    }
    out
}

fn stride_steps(stride: f64, dt: f64) -> usize {
    ((stride / dt).round() as usize).max(1)
}

/// Outcome of an unmonitored, undamped first stroke, which depends only on
/// the initial level.
#[derive(Debug)]
struct CachedStroke {
    psi: Vec<C64>,
    work: f64,
    series: Vec<SeriesPoint>,
}

/// Per-trajectory mutable state.
struct Walker {
    psi: Vec<C64>,
    taylor: TaylorPropagator,
    sse: SseScratch,
    waiting: WaitingScratch,
    scratch: Vec<C64>,
    wiener: RngStream,
    jumps: RngStream,
    jump_count: usize,
}

/// Shared, immutable inputs of all trajectories of one run.
pub struct CycleContext {
    config: CycleConfig,
    hamiltonian: SweptHamiltonian,
    photon_number: Diagonal,
    annihilation: QOperator,
    probe: QuadratureProbe,
    baths: BathChannels,
    no_baths: BathChannels,
    preparation: Preparation,
    initial_modes: NormalModes,
    power: Sweep,
    cold: Hold,
    compression: Sweep,
    hot: Hold,
    stroke1_cache: Mutex<HashMap<usize, Arc<CachedStroke>>>,
}

impl std::fmt::Debug for CycleContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CycleContext").field("config", &self.config).finish_non_exhaustive()
    }
}

impl CycleContext {
    /// Validate the configuration and tabulate all shared data.
    pub fn new(config: &CycleConfig) -> Result<Self> {
        config.validate()?;
        let params = config.params;
        let dims = config.dims;
        let dt = config.stepper.dt;
        let preparation = Preparation::new(&params, dims, config.initial, config.basis)?;
        let baths = BathChannels::from_params(&params, dims);
        let no_baths = BathChannels::none(dims);

        let sweep = |t: f64, from: f64, to: f64| -> Result<Sweep> {
            let schedule = Schedule::new(config.schedule_kind, &params, t, from, to)?;
            let n = config.steps(t);
            Sweep::new(&schedule, n, stride_steps(config.stride, t / n as f64), &params)
        };
        let measured_holds = config.measure_all_strokes && config.meas.is_active();
        let hold = |t: f64, delta: f64, build: bool| -> Result<Hold> {
            let n = config.steps(t);
            let step = if n == 0 { dt } else { t / n as f64 };
            let propagator = if build && n > 0 && !measured_holds {
                Some(ConstantPropagator::new(&params, delta, dims, baths.clone(), step)?)
            } else {
                None
            };
            Ok(Hold {
                delta,
                dt: step,
                records: record_steps(n, stride_steps(config.thermal_stride, step)),
                modes: normal_modes(&params, delta)?,
                propagator,
            })
        };
        let full = config.span == CycleSpan::Full;
        let evolve_hot = full && config.stroke4_mode == Stroke4Mode::Evolve;
        Ok(Self {
            hamiltonian: SweptHamiltonian::new(&params, dims),
            photon_number: Diagonal((0..dims.dim()).map(|i| dims.levels(i).0 as f64).collect()),
            annihilation: annihilation(dims, Mode::Photon),
            probe: QuadratureProbe::new(dims),
            initial_modes: normal_modes(&params, params.delta_i)?,
            power: sweep(config.t1, params.delta_i, params.delta_f)?,
            cold: hold(config.t2, params.delta_f, full)?,
            compression: sweep(config.t3, params.delta_f, params.delta_i)?,
            hot: hold(config.t4, params.delta_i, evolve_hot)?,
            baths,
            no_baths,
            preparation,
            stroke1_cache: Mutex::new(HashMap::new()),
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    pub fn preparation(&self) -> &Preparation {
        &self.preparation
    }

    /// Recording times and detunings, identical for every trajectory.
    pub fn time_grid(&self) -> Vec<(f64, f64)> {
        let c = &self.config;
        let mut grid = vec![(0.0, c.params.delta_i)];
        let sweep_points = |s: &Sweep, t0: f64, grid: &mut Vec<(f64, f64)>| {
            let n = s.n_steps();
            for (k, _) in &s.records {
                let t = if *k == n { s.dt * n as f64 } else { *k as f64 * s.dt };
                grid.push((t0 + t, s.deltas[*k]));
            }
        };
        sweep_points(&self.power, 0.0, &mut grid);
        if c.span == CycleSpan::Full {
            let mut t0 = c.t1;
            for &k in &self.cold.records {
                grid.push((t0 + k as f64 * self.cold.dt, self.cold.delta));
            }
            t0 += c.t2;
            sweep_points(&self.compression, t0, &mut grid);
            t0 += c.t3;
            if c.stroke4_mode == Stroke4Mode::Evolve {
                for &k in &self.hot.records {
                    grid.push((t0 + k as f64 * self.hot.dt, self.hot.delta));
                }
            }
        }
        grid
    }

    fn adiabatic_measured(&self) -> bool {
        self.config.meas.is_active()
    }

    fn hold_measured(&self) -> bool {
        self.config.meas.is_active() && self.config.measure_all_strokes
    }

    fn adiabatic_baths(&self) -> &BathChannels {
        if self.config.adiabatic_damping {
            &self.baths
        } else {
            &self.no_baths
        }
    }

    fn point(&self, psi: &mut [C64], t: f64, delta: f64, modes: &NormalModes) -> SeriesPoint {
        normalize(psi);
        let (pop_a, pop_b) = self.probe.populations(modes, psi);
        SeriesPoint {
            t,
            delta,
            photons: self.photon_number.mean(psi),
            pop_a,
            pop_b,
        }
    }

    fn energy(&self, delta: f64, w: &mut Walker) -> f64 {
        normalize(&mut w.psi);
        self.hamiltonian.energy(delta, &w.psi, &mut w.scratch)
    }

    /// One full step at the midpoint detuning `delta`: Hamiltonian, then
    /// measurement back-action, then bath jumps.
    fn step(&self, w: &mut Walker, delta: f64, dt: f64, measured: bool, baths: &BathChannels) -> Result<()> {
        w.taylor.step(&mut w.psi, &self.hamiltonian.at(delta), dt)?;
        if measured {
            let lambda = self.config.meas.lambda;
            let dw = w.wiener.wiener(dt);
            match self.config.meas.scheme {
                Scheme::Dispersive => dispersive_in_place(&mut w.psi, &self.photon_number, lambda, dt, dw, &mut w.sse)?,
                Scheme::Absorptive => absorptive_in_place(&mut w.psi, &self.annihilation, lambda, dt, dw, &mut w.sse)?,
                Scheme::None => {}
            }
        }
        if let JumpOutcome::Jump(_) = baths.step_in_place(&mut w.psi, dt, &mut w.jumps)? {
            w.jump_count += 1;
        }
        if self.config.stepper.renorm_every_step {
            normalize(&mut w.psi);
        }
        Ok(())
    }

    /// Integrate a swept stroke; returns its work.
    fn sweep_stroke(
        &self,
        w: &mut Walker,
        sweep: &Sweep,
        stroke: usize,
        t0: f64,
        series: &mut Vec<SeriesPoint>,
    ) -> Result<f64> {
        let measured = self.adiabatic_measured();
        let baths = self.adiabatic_baths();
        let n = sweep.n_steps();
        let mut work = 0.0;
        let mut before = self.photon_number.mean(&w.psi);
        let mut next_record = sweep.records.iter().peekable();
        for k in 0..n {
            self.step(w, sweep.mids[k], sweep.dt, measured, baths)
                .map_err(|e| e.in_stroke(stroke, t0 + k as f64 * sweep.dt))?;
            let after = self.photon_number.mean(&w.psi);
            work -= 0.5 * (before + after) * (sweep.deltas[k + 1] - sweep.deltas[k]);
            before = after;
            if let Some((rk, modes)) = next_record.peek() {
                if *rk == k + 1 {
                    let t = t0 + if k + 1 == n { sweep.dt * n as f64 } else { (k + 1) as f64 * sweep.dt };
                    series.push(self.point(&mut w.psi, t, sweep.deltas[k + 1], modes));
                    next_record.next();
                }
            }
        }
        Ok(work)
    }

    /// Integrate a thermalization stroke.
    fn hold_stroke(
        &self,
        w: &mut Walker,
        hold: &Hold,
        stroke: usize,
        t0: f64,
        series: &mut Vec<SeriesPoint>,
    ) -> Result<()> {
        let mut done = 0;
        for &k in &hold.records {
            match &hold.propagator {
                Some(p) => {
                    let jumps = p
                        .evolve(&mut w.psi, k - done, &mut w.jumps, &mut w.waiting)
                        .map_err(|e| e.in_stroke(stroke, t0 + done as f64 * hold.dt))?;
                    w.jump_count += jumps.len();
                }
                None => {
                    let measured = self.hold_measured();
                    for j in done..k {
                        self.step(w, hold.delta, hold.dt, measured, &self.baths)
                            .map_err(|e| e.in_stroke(stroke, t0 + j as f64 * hold.dt))?;
                    }
                }
            }
            done = k;
            series.push(self.point(&mut w.psi, t0 + k as f64 * hold.dt, hold.delta, &hold.modes));
        }
        Ok(())
    }

    fn first_stroke(&self, w: &mut Walker, level: usize, series: &mut Vec<SeriesPoint>) -> Result<f64> {
        let cacheable = !self.adiabatic_measured() && !self.adiabatic_baths().is_active();
        if cacheable {
            let hit = self.stroke1_cache.lock().expect("cache lock").get(&level).cloned();
            if let Some(c) = hit {
                w.psi.copy_from_slice(&c.psi);
                series.extend_from_slice(&c.series);
                return Ok(c.work);
            }
        }
        let start = series.len();
        let work = self.sweep_stroke(w, &self.power, 1, 0.0, series)?;
        if cacheable {
            normalize(&mut w.psi);
            let entry = Arc::new(CachedStroke {
                psi: w.psi.clone(),
                work,
                series: series[start..].to_vec(),
            });
            self.stroke1_cache.lock().expect("cache lock").insert(level, entry);
        }
        Ok(work)
    }

    /// Run trajectory `index` through the configured strokes.
    pub fn run_trajectory(&self, index: u64) -> Result<TrajectoryRecord> {
        let c = &self.config;
        let seed = c.stepper.seed;
        let dim = c.dims.dim();
        let mut init_rng = RngStream::new(seed, index, StreamKind::InitialState);
        let (level, psi0) = self.preparation.sample(&mut init_rng);
        let mut w = Walker {
            psi: psi0.as_slice().to_vec(),
            taylor: TaylorPropagator::new(dim),
            sse: SseScratch::new(dim),
            waiting: WaitingScratch::new(dim),
            scratch: vec![C64::new(0.0, 0.0); dim],
            wiener: RngStream::new(seed, index, StreamKind::Wiener),
            jumps: RngStream::new(seed, index, StreamKind::Jumps),
            jump_count: 0,
        };
        let mut series = Vec::new();
        series.push(self.point(&mut w.psi, 0.0, c.params.delta_i, &self.initial_modes));
        let mut energies = vec![self.preparation.energy(level)];

        let w1 = self.first_stroke(&mut w, level, &mut series)?;
        energies.push(self.energy(c.params.delta_f, &mut w));
        let mut w3 = 0.0;
        let mut q_in = None;
        if c.span == CycleSpan::Full {
            self.hold_stroke(&mut w, &self.cold, 2, c.t1, &mut series)?;
            energies.push(self.energy(c.params.delta_f, &mut w));
            w3 = self.sweep_stroke(&mut w, &self.compression, 3, c.t1 + c.t2, &mut series)?;
            energies.push(self.energy(c.params.delta_i, &mut w));
            let fresh = match c.stroke4_mode {
                Stroke4Mode::Evolve => {
                    self.hold_stroke(&mut w, &self.hot, 4, c.t1 + c.t2 + c.t3, &mut series)?;
                    None
                }
                Stroke4Mode::Resample => {
                    // A fresh draw closes the cycle; its expected energy is exact.
                    let mut rng = RngStream::new(seed, index, StreamKind::Resample);
                    let (_, fresh) = self.preparation.sample(&mut rng);
                    w.psi.copy_from_slice(fresh.as_slice());
                    Some(self.preparation.mean_energy())
                }
            };
            energies.push(self.energy(c.params.delta_i, &mut w));
            q_in = Some(heat_bookkeeping(&energies, fresh)?);
        }
        let work = w1 + w3;
        if !work.is_finite() {
            return Err(Error::Integrator(format!("trajectory {index}: non-finite work")));
        }
        Ok(TrajectoryRecord {
            index,
            seed,
            initial_level: level,
            work,
            stroke_work: [w1, w3],
            boundary_energies: energies,
            q_in,
            jump_count: w.jump_count,
            series,
        })
    }
}

/// Run one trajectory of `config`. Builds a fresh [`CycleContext`]; use the
/// context directly when running many.
pub fn run_trajectory(config: &CycleConfig, index: u64) -> Result<TrajectoryRecord> {
    CycleContext::new(config)?.run_trajectory(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{InitialState, PrepBasis};
    use crate::model::ModelParams;
    use crate::qops::SpaceDims;

    fn small() -> CycleConfig {
        CycleConfig {
            dims: SpaceDims::new(6, 8).unwrap(),
            params: ModelParams {
                nbar_th: 0.5,
                ..ModelParams::default()
            },
            t1: 4.0,
            t2: 5.0,
            t3: 4.0,
            t4: 5.0,
            n_traj: 4,
            ..CycleConfig::default()
        }
    }

    #[test]
    fn work_increment_sign() {
        let d = SpaceDims::new(4, 2).unwrap();
        assert_eq!(work_increment(&QState::vacuum(d), 0.3), 0.0);
        let s = QState::fock(d, 2, 1).unwrap();
        assert!((work_increment(&s, 0.01) + 0.02).abs() < 1e-15);
    }

    #[test]
    fn heat_from_boundaries() {
        assert_eq!(heat_bookkeeping(&[0.0, 1.0, 2.0, 3.0, 5.5], None).unwrap(), 2.5);
        assert_eq!(heat_bookkeeping(&[0.0, 1.0, 2.0, 3.0], Some(4.0)).unwrap(), 1.0);
        assert!(heat_bookkeeping(&[0.0, 1.0, 2.0, 3.0], None).is_err());
    }

    #[test]
    fn uncoupled_cycle_does_no_work() {
        let cfg = CycleConfig {
            params: ModelParams {
                coupling: 0.0,
                kappa: 0.0,
                gamma: 0.0,
                nbar_th: 0.5,
                ..ModelParams::default()
            },
            initial: InitialState::Fock(2),
            basis: PrepBasis::Bare,
            ..small()
        };
        let ctx = CycleContext::new(&cfg).unwrap();
        let rec = ctx.run_trajectory(0).unwrap();
        assert_eq!(rec.work, 0.0);
        assert_eq!(rec.initial_level, 2);
    }

    #[test]
    fn series_matches_time_grid() {
        let cfg = CycleConfig {
            stroke4_mode: Stroke4Mode::Evolve,
            ..small()
        };
        let ctx = CycleContext::new(&cfg).unwrap();
        let rec = ctx.run_trajectory(3).unwrap();
        let grid = ctx.time_grid();
        assert_eq!(rec.series.len(), grid.len());
        for (p, (t, d)) in rec.series.iter().zip(&grid) {
            assert!((p.t - t).abs() < 1e-12 && (p.delta - d).abs() < 1e-12);
        }
        assert_eq!(rec.boundary_energies.len(), 5);
        assert!((grid.last().unwrap().0 - 18.0).abs() < 1e-9);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let cfg = CycleConfig {
            meas: crate::traj::MeasurementConfig::new(Scheme::Dispersive, 0.5).unwrap(),
            ..small()
        };
        let ctx = CycleContext::new(&cfg).unwrap();
        assert_eq!(ctx.run_trajectory(7).unwrap(), ctx.run_trajectory(7).unwrap());
        assert_ne!(ctx.run_trajectory(7).unwrap().work, ctx.run_trajectory(8).unwrap().work);
    }

    #[test]
    fn cached_first_stroke_is_identical() {
        let cfg = CycleConfig {
            adiabatic_damping: false,
            initial: InitialState::Fock(1),
            span: CycleSpan::FirstStroke,
            ..small()
        };
        let ctx = CycleContext::new(&cfg).unwrap();
        let a = ctx.run_trajectory(0).unwrap();
        let b = ctx.run_trajectory(1).unwrap();
        let fresh = CycleContext::new(&cfg).unwrap().run_trajectory(1).unwrap();
        assert_eq!(b.work, fresh.work);
        assert_eq!(a.series, b.series);
        assert!(a.q_in.is_none());
    }
}
