//! Ensemble reduction: work moments, histograms, heat and efficiency.

use super::cycle::TrajectoryRecord;
use crate::{Error, Result};

/// Bins of the `-W` histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            lower: -1.0,
            upper: 6.0,
            width: 0.1,
        }
    }
}

impl HistogramSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lower.is_finite()
            && self.upper.is_finite()
            && self.upper > self.lower
            && self.width > 0.0
            && self.width <= self.upper - self.lower;
        if !ok {
            return Err(Error::Config(format!(
                "invalid histogram range [{}, {}] with bin width {}",
                self.lower, self.upper, self.width
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        (((self.upper - self.lower) / self.width).round() as usize).max(1)
    }

    /// Bin of `x`; values outside the range go to the edge bins.
    pub fn bin(&self, x: f64) -> usize {
        let n = self.n_bins();
        let k = ((x - self.lower) / self.width).floor();
        if k < 0.0 || k.is_nan() {
            0
        } else {
            (k as usize).min(n - 1)
        }
    }
}

/// Normalized histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
    pub probabilities: Vec<f64>,
}

impl Histogram {
    pub fn from_values(spec: HistogramSpec, values: &[f64]) -> Self {
        let mut counts = vec![0u64; spec.n_bins()];
        for &v in values {
            counts[spec.bin(v)] += 1;
        }
        let total = values.len().max(1) as f64;
        let probabilities = counts.iter().map(|&c| c as f64 / total).collect();
        Self {
            spec,
            counts,
            probabilities,
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|k| self.spec.lower + (k as f64 + 0.5) * self.spec.width)
            .collect()
    }

    /// Probability of the bins whose centers lie in `[lo, hi)`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.centers()
            .iter()
            .zip(&self.probabilities)
            .filter(|(c, _)| **c >= lo && **c < hi)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Mean, population variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkMoments {
    pub mean: f64,
    pub var: f64,
    pub sem: f64,
}

impl WorkMoments {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("statistics of an empty ensemble".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
        let sem = if values.len() > 1 { (var / (n - 1.0)).sqrt() } else { 0.0 };
        Ok(Self { mean, var, sem })
    }

    /// Standard error of the population variance, `sqrt((m4 - var²)/N)`.
    pub fn var_sem(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        if values.len() < 2 {
            return 0.0;
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
        let m4 = values.iter().map(|w| (w - mean).powi(4)).sum::<f64>() / n;
        ((m4 - var * var).max(0.0) / n).sqrt()
    }
}

/// Ensemble-averaged time series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PopulationCurves {
    pub t: Vec<f64>,
    pub delta: Vec<f64>,
    pub photons: Vec<f64>,
    pub pop_a: Vec<f64>,
    pub pop_b: Vec<f64>,
}

impl PopulationCurves {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Index of the last point with `t <= time`.
    pub fn index_at(&self, time: f64) -> Option<usize> {
        self.t.iter().rposition(|&t| t <= time + 1e-9)
    }
}

/// Statistics of one ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleResult {
    pub n_traj_used: usize,
    pub mean_work: f64,
    pub var_work: f64,
    pub sem_work: f64,
    /// Work moments of the first stroke alone.
    pub stroke1: WorkMoments,
    /// Mean heat absorbed in the hot stroke.
    pub q_in: Option<f64>,
    pub q_in_sem: Option<f64>,
    /// `-mean_work / q_in`, only when `q_in > 0`.
    pub efficiency: Option<f64>,
    /// Set when the cycle absorbed no heat.
    pub heat_warning: bool,
    /// Histogram of `-W`.
    pub histogram: Histogram,
    /// Histogram of `-W` of the first stroke.
    pub stroke1_histogram: Histogram,
    pub populations: PopulationCurves,
    /// Per-trajectory work in index order.
    pub works: Vec<f64>,
    pub stroke1_works: Vec<f64>,
    pub initial_levels: Vec<usize>,
    pub mean_jumps: f64,
}

/// Order-dependent streaming reduction; feed records in index order.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    spec: HistogramSpec,
    works: Vec<f64>,
    stroke1_works: Vec<f64>,
    levels: Vec<usize>,
    heats: Vec<f64>,
    jumps: usize,
    curves: PopulationCurves,
}

impl EnsembleAccumulator {
    pub fn new(spec: HistogramSpec) -> Self {
        Self {
            spec,
            works: Vec::new(),
            stroke1_works: Vec::new(),
            levels: Vec::new(),
            heats: Vec::new(),
            jumps: 0,
            curves: PopulationCurves::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.works.len()
    }

    pub fn is_empty(&self) -> bool {
        self.works.is_empty()
    }

    pub fn push(&mut self, record: &TrajectoryRecord) -> Result<()> {
        if self.works.is_empty() {
            let s = &record.series;
            self.curves = PopulationCurves {
                t: s.iter().map(|p| p.t).collect(),
                delta: s.iter().map(|p| p.delta).collect(),
                photons: vec![0.0; s.len()],
                pop_a: vec![0.0; s.len()],
                pop_b: vec![0.0; s.len()],
            };
        } else if record.series.len() != self.curves.len() {
            return Err(Error::Domain(format!(
                "trajectory {} has {} series points, expected {}",
                record.index,
                record.series.len(),
                self.curves.len()
            )));
        }
        if record.q_in.is_some() != (self.heats.len() == self.works.len()) && !self.works.is_empty() {
            return Err(Error::Domain("records mix full and partial cycles".into()));
        }
        for (k, p) in record.series.iter().enumerate() {
            self.curves.photons[k] += p.photons;
            self.curves.pop_a[k] += p.pop_a;
            self.curves.pop_b[k] += p.pop_b;
        }
        self.works.push(record.work);
        self.stroke1_works.push(record.stroke_work[0]);
        self.levels.push(record.initial_level);
        if let Some(q) = record.q_in {
            self.heats.push(q);
        }
        self.jumps += record.jump_count;
        Ok(())
    }

    pub fn finish(self) -> Result<CycleResult> {
        let work = WorkMoments::from_values(&self.works)?;
        let stroke1 = WorkMoments::from_values(&self.stroke1_works)?;
        let n = self.works.len();
        let mut curves = self.curves;
        for v in [&mut curves.photons, &mut curves.pop_a, &mut curves.pop_b] {
            for x in v.iter_mut() {
                *x /= n as f64;
            }
        }
        let heat = if self.heats.is_empty() {
            None
        } else {
            Some(WorkMoments::from_values(&self.heats)?)
        };
        let q_in = heat.map(|h| h.mean);
        let efficiency = q_in.filter(|&q| q > 0.0).map(|q| -work.mean / q);
        let neg = |v: &[f64]| v.iter().map(|w| -w).collect::<Vec<_>>();
        Ok(CycleResult {
            n_traj_used: n,
            mean_work: work.mean,
            var_work: work.var,
            sem_work: work.sem,
            stroke1,
            q_in,
            q_in_sem: heat.map(|h| h.sem),
            efficiency,
            heat_warning: matches!(q_in, Some(q) if q <= 0.0),
            histogram: Histogram::from_values(self.spec, &neg(&self.works)),
            stroke1_histogram: Histogram::from_values(self.spec, &neg(&self.stroke1_works)),
            populations: curves,
            works: self.works,
            stroke1_works: self.stroke1_works,
            initial_levels: self.levels,
            mean_jumps: self.jumps as f64 / n as f64,
        })
    }
}

/// Reduce records, in trajectory-index order, to ensemble statistics.
pub fn ensemble_statistics(records: &[TrajectoryRecord], bins: HistogramSpec) -> Result<CycleResult> {
    if records.is_empty() {
        return Err(Error::Domain("ensemble_statistics needs at least one record".into()));
    }
    bins.validate()?;
    let mut order: Vec<&TrajectoryRecord> = records.iter().collect();
    order.sort_by_key(|r| r.index);
    let mut acc = EnsembleAccumulator::new(bins);
    for r in order {
        acc.push(r)?;
    }
    acc.finish()
}
