//! Detuning schedules `Δ(t)` for the adiabatic strokes.

use super::{normal_mode_frequencies, ModelParams};
use crate::{Error, Result};

/// Functional form of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// Constant sweep rate.
    Linear,
    /// `|dΔ/dt| ∝ (ω_A(Δ) - ω_B(Δ))²`: fast far from the avoided crossing,
    /// slow in its vicinity.
    GapAdaptive,
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::GapAdaptive => "gap_adaptive",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "gap_adaptive" => Ok(Self::GapAdaptive),
            other => Err(Error::Config(format!(
                "unknown schedule kind '{other}' (expected linear or gap_adaptive)"
            ))),
        }
    }
}

const TABLE_INTERVALS: usize = 4096;

/// Tabulated inverse of `t(Δ) = (1/c) ∫ dΔ / gap(Δ)²`.
#[derive(Debug, Clone, PartialEq)]
struct GapTable {
    times: Vec<f64>,
    deltas: Vec<f64>,
    rates: Vec<f64>,
}

/// Monotone detuning ramp from `delta_start` at `t = 0` to `delta_end` at
/// `t = t_stroke`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    t_stroke: f64,
    delta_start: f64,
    delta_end: f64,
    table: Option<GapTable>,
}

impl Schedule {
    pub fn linear(t_stroke: f64, delta_start: f64, delta_end: f64) -> Result<Self> {
        check_duration(t_stroke)?;
        Ok(Self {
            kind: ScheduleKind::Linear,
            t_stroke,
            delta_start,
            delta_end,
            table: None,
        })
    }

    /// Gap-adaptive ramp. Fails if the sweep passes through an unstable detuning.
    pub fn gap_adaptive(
        params: &ModelParams,
        t_stroke: f64,
        delta_start: f64,
        delta_end: f64,
    ) -> Result<Self> {
        check_duration(t_stroke)?;
        if delta_start == delta_end {
            return Ok(Self {
                kind: ScheduleKind::GapAdaptive,
                ..Self::linear(t_stroke, delta_start, delta_end)?
            });
        }
        let gap2 = |delta: f64| -> Result<f64> {
            let (wa, wb) = normal_mode_frequencies(params, delta)?;
            Ok((wa - wb).powi(2))
        };
        let n = TABLE_INTERVALS;
        let h = (delta_end - delta_start) / n as f64;
        let deltas: Vec<f64> = (0..=n)
            .map(|k| if k == n { delta_end } else { delta_start + h * k as f64 })
            .collect();
        let gaps: Vec<f64> = deltas.iter().map(|&d| gap2(d)).collect::<Result<_>>()?;
        if gaps.iter().any(|&g| g <= 0.0) {
            return Err(Error::Domain("normal-mode gap closes along the sweep".into()));
        }
        // Cumulative ∫ |dΔ| / gap² by Simpson's rule on each interval.
        let mut integral = Vec::with_capacity(n + 1);
        integral.push(0.0);
        for k in 0..n {
            let mid = gap2(0.5 * (deltas[k] + deltas[k + 1]))?;
            let piece = h.abs() / 6.0 * (1.0 / gaps[k] + 4.0 / mid + 1.0 / gaps[k + 1]);
            integral.push(integral[k] + piece);
        }
        let total = integral[n];
        let c = total / t_stroke;
        let sign = (delta_end - delta_start).signum();
        let mut times: Vec<f64> = integral.iter().map(|f| f / c).collect();
        times[n] = t_stroke;
        let rates = gaps.iter().map(|g| sign * c * g).collect();
        Ok(Self {
            kind: ScheduleKind::GapAdaptive,
            t_stroke,
            delta_start,
            delta_end,
            table: Some(GapTable {
                times,
                deltas,
                rates,
            }),
        })
    }

    pub fn new(
        kind: ScheduleKind,
        params: &ModelParams,
        t_stroke: f64,
        delta_start: f64,
        delta_end: f64,
    ) -> Result<Self> {
        match kind {
            ScheduleKind::Linear => Self::linear(t_stroke, delta_start, delta_end),
            ScheduleKind::GapAdaptive => Self::gap_adaptive(params, t_stroke, delta_start, delta_end),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn duration(&self) -> f64 {
        self.t_stroke
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.delta_start, self.delta_end)
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.t_stroke.max(1.0);
        if !(t >= -slack && t <= self.t_stroke + slack) {
            return Err(Error::Domain(format!(
                "time {t} outside stroke [0, {}]",
                self.t_stroke
            )));
        }
        Ok(t.clamp(0.0, self.t_stroke))
    }

    /// Detuning at time `t ∈ [0, t_stroke]`.
    pub fn delta(&self, t: f64) -> Result<f64> {
        let t = self.check_time(t)?;
        if t == 0.0 {
            return Ok(self.delta_start);
        }
        if t == self.t_stroke {
            return Ok(self.delta_end);
        }
        match &self.table {
            None => Ok(self.delta_start + (self.delta_end - self.delta_start) * t / self.t_stroke),
            Some(tab) => Ok(tab.interpolate(t).0),
        }
    }

    /// Sweep rate `dΔ/dt` at time `t`.
    pub fn rate(&self, t: f64) -> Result<f64> {
        let t = self.check_time(t)?;
        match &self.table {
            None => Ok((self.delta_end - self.delta_start) / self.t_stroke),
            Some(tab) => Ok(tab.interpolate(t).1),
        }
    }
}

impl GapTable {
    /// Cubic Hermite interpolation of `Δ(t)` and its derivative.
    fn interpolate(&self, t: f64) -> (f64, f64) {
        let k = self.times.partition_point(|&x| x <= t).clamp(1, self.times.len() - 1) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (self.deltas[k], self.deltas[k + 1]);
        let (m0, m1) = (self.rates[k] * h, self.rates[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let deriv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        (value, deriv)
    }
}

fn check_duration(t_stroke: f64) -> Result<()> {
    if !(t_stroke > 0.0 && t_stroke.is_finite()) {
        return Err(Error::Config(format!("stroke duration must be positive, got {t_stroke}")));
    }
    Ok(())
}

/// Detuning of `schedule` at time `t`.
pub fn schedule_delta(schedule: &Schedule, t: f64) -> Result<f64> {
    schedule.delta(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig4() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn linear_midpoint() {
        let s = Schedule::linear(40.0, -3.0, -0.4).unwrap();
        assert_abs_diff_eq!(s.delta(20.0).unwrap(), -1.7, epsilon = 1e-14);
    }

    #[test]
    fn endpoints_are_exact() {
        for kind in [ScheduleKind::Linear, ScheduleKind::GapAdaptive] {
            for (a, b) in [(-3.0, -0.4), (-0.4, -3.0)] {
                let s = Schedule::new(kind, &fig4(), 40.0, a, b).unwrap();
                assert_eq!(s.delta(0.0).unwrap(), a);
                assert_eq!(s.delta(40.0).unwrap(), b);
            }
        }
    }

    #[test]
    fn out_of_range_time_is_a_domain_error() {
        let s = Schedule::gap_adaptive(&fig4(), 40.0, -3.0, -0.4).unwrap();
        assert!(matches!(s.delta(-0.1), Err(Error::Domain(_))));
        assert!(matches!(s.delta(40.1), Err(Error::Domain(_))));
        assert!(Schedule::linear(0.0, -3.0, -0.4).is_err());
    }

    #[test]
    fn gap_adaptive_slows_down_at_the_crossing() {
        let s = Schedule::gap_adaptive(&fig4(), 40.0, -3.0, -0.4).unwrap();
        // locate Δ(t) = -1 by bisection
        let (mut lo, mut hi) = (0.0, 40.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if s.delta(mid).unwrap() < -1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let slow = s.rate(lo).unwrap().abs();
        let fast = s.rate(0.0).unwrap().abs();
        assert!(fast >= 4.0 * slow, "fast {fast}, slow {slow}");
        // rate follows the squared gap
        let gap = |d: f64| {
            let (a, b) = normal_mode_frequencies(&fig4(), d).unwrap();
            a - b
        };
        assert_abs_diff_eq!(fast / slow, (gap(-3.0) / gap(-1.0)).powi(2), epsilon = 1e-3 * fast / slow);
    }

    #[test]
    fn gap_adaptive_is_monotone_and_consistent_with_its_rate() {
        for (a, b) in [(-3.0, -0.4), (-0.4, -3.0)] {
            let s = Schedule::gap_adaptive(&fig4(), 40.0, a, b).unwrap();
            let n = 8000;
            let mut prev = s.delta(0.0).unwrap();
            for k in 1..=n {
                let t = 40.0 * k as f64 / n as f64;
                let d = s.delta(t).unwrap();
                assert!((d - prev) * (b - a) >= 0.0);
                // centred finite difference against the analytic rate
                if k < n {
                    let e = 1e-4;
                    let fd = (s.delta(t + e).unwrap() - s.delta(t - e).unwrap()) / (2.0 * e);
                    assert!((fd - s.rate(t).unwrap()).abs() < 1e-5 * (1.0 + fd.abs()));
                }
                prev = d;
            }
        }
    }

    #[test]
    fn unstable_sweep_is_rejected() {
        let p = ModelParams {
            coupling: 0.45,
            ..fig4()
        };
        assert!(matches!(
            Schedule::gap_adaptive(&p, 40.0, -3.0, -0.5),
            Err(Error::Stability { .. })
        ));
    }

    #[test]
    fn kind_parses() {
        assert_eq!("linear".parse::<ScheduleKind>().unwrap(), ScheduleKind::Linear);
        assert_eq!("gap_adaptive".parse::<ScheduleKind>().unwrap(), ScheduleKind::GapAdaptive);
        assert!("cubic".parse::<ScheduleKind>().is_err());
    }
}
