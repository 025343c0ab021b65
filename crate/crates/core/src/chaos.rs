//! Paired trajectories, distance traces and growth-rate fits.
//!
//! Trajectory A starts from `|−1, −1⟩` under the unperturbed schedule.
//! Trajectory B starts from the head rotated by `δ` and, by default, runs the
//! schedule re-seeded with `α₀ = δ`, so the two differ by a perturbed unitary
//! rather than only by their initial states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{
    check_tape_preconditions, finite_delta_head_matrix, finite_delta_tape_ratio, period_conditions,
    stability_limits, tape_stability_limit, OracleError,
};
use crate::schedule::{ScheduleConfig, ScheduleError};
use crate::state::{
    distance_sq, network_distance_sq, overlap_sq, Evolution, NetworkState, Spin, StateError,
    TapeState,
};

/// D² above which a trace is considered saturated for fitting purposes.
pub const SATURATION_GUARD: f64 = 0.5;

/// Minimum number of trace points a fit accepts.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Error)]
pub enum ChaosError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("steps must be at least 2 (got {0})")]
    TooFewSteps(u64),
    #[error("record_every must be at least 1")]
    ZeroStride,
    #[error("delta must be finite and non-negative (got {0})")]
    NegativeDelta(f64),
    #[error("delta must lie in (0, 0.1] (got {0})")]
    DeltaOutOfRange(f64),
    #[error("fit window holds {found} points, need at least {MIN_FIT_POINTS}")]
    TooFewPoints { found: usize },
    #[error("D^2 = {d2} at step {step} is past the saturation guard {SATURATION_GUARD}")]
    Saturated { step: u64, d2: f64 },
    #[error("D^2 vanishes at step {step}; logarithmic fit undefined")]
    ZeroDistance { step: u64 },
    #[error("stability analysis needs an exact rational-pi Fibonacci schedule")]
    NotExact,
    #[error("alpha1 = {p}/{q} pi has no periodic orbit of period {period}")]
    NotPeriodic { p: i64, q: u64, period: u64 },
}

/// Which part of the network the distance is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    Head,
    Tape,
    Network,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schedule: ScheduleConfig,
    pub delta: f64,
    pub steps: u64,
    pub subsystem: Subsystem,
    pub record_every: u64,
    /// Re-seed trajectory B's schedule with `α₀ = δ`. Off means the
    /// perturbation only touches the initial state.
    pub perturb_schedule: bool,
}

impl ExperimentConfig {
    pub const DEFAULT_DELTA: f64 = 0.001;

    pub fn new(schedule: ScheduleConfig, steps: u64, subsystem: Subsystem) -> Self {
        ExperimentConfig {
            schedule,
            delta: Self::DEFAULT_DELTA,
            steps,
            subsystem,
            record_every: 1,
            perturb_schedule: true,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_record_every(mut self, k: u64) -> Self {
        self.record_every = k;
        self
    }

    pub fn validate(&self) -> Result<(), ChaosError> {
        self.schedule.validate()?;
        if self.steps < 2 {
            return Err(ChaosError::TooFewSteps(self.steps));
        }
        if self.record_every == 0 {
            return Err(ChaosError::ZeroStride);
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(ChaosError::NegativeDelta(self.delta));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub d2: f64,
    /// `|⟨ψ|ψ′⟩|²` for the network, `Tr ρρ′` for a single spin.
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTrace {
    pub subsystem: Subsystem,
    pub points: Vec<TracePoint>,
}

impl DistanceTrace {
    pub fn max_d2(&self) -> f64 {
        self.points.iter().map(|p| p.d2).fold(0.0, f64::max)
    }

    pub fn at(&self, step: u64) -> Option<&TracePoint> {
        self.points
            .binary_search_by_key(&step, |p| p.step)
            .ok()
            .map(|i| &self.points[i])
    }

    /// Points with `lo ≤ step ≤ hi`.
    pub fn steps_between(&self, lo: u64, hi: u64) -> impl Iterator<Item = &TracePoint> {
        self.points
            .iter()
            .filter(move |p| (lo..=hi).contains(&p.step))
    }
}

/// The reference and perturbed evolutions of one experiment.
pub fn paired_evolutions(
    schedule: &ScheduleConfig,
    delta: f64,
    perturb_schedule: bool,
) -> Result<(Evolution, Evolution), ChaosError> {
    let base = schedule.with_delta(0.0)?;
    let perturbed = if perturb_schedule {
        schedule.with_delta(delta)?
    } else {
        base
    };
    let a = Evolution::new(&base, NetworkState::ground());
    let b = Evolution::new(&perturbed, NetworkState::init(delta, TapeState::KetMinus1));
    Ok((a, b))
}

fn measure(subsystem: Subsystem, step: u64, a: &NetworkState, b: &NetworkState) -> TracePoint {
    match subsystem {
        Subsystem::Network => TracePoint {
            step,
            d2: network_distance_sq(a, b),
            overlap: overlap_sq(b, a),
        },
        Subsystem::Head | Subsystem::Tape => {
            let spin = if subsystem == Subsystem::Head {
                Spin::Head
            } else {
                Spin::Tape
            };
            let ra = a.reduce(spin);
            let rb = b.reduce(spin);
            let mut overlap = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    overlap += (ra.0[i][j] * rb.0[j][i]).re;
                }
            }
            TracePoint {
                step,
                d2: distance_sq(&ra, &rb),
                overlap,
            }
        }
    }
}

/// Distance between the two trajectories at steps `0, k, 2k, … ≤ steps`.
pub fn distance_trace(cfg: &ExperimentConfig) -> Result<DistanceTrace, ChaosError> {
    cfg.validate()?;
    let (mut a, mut b) = paired_evolutions(&cfg.schedule, cfg.delta, cfg.perturb_schedule)?;
    let mut points = Vec::with_capacity((cfg.steps / cfg.record_every + 1) as usize);
    points.push(measure(cfg.subsystem, 0, a.state(), b.state()));
    for n in 1..=cfg.steps {
        a.advance();
        b.advance();
        if n % cfg.record_every == 0 {
            points.push(measure(cfg.subsystem, n, a.state(), b.state()));
        }
    }
    Ok(DistanceTrace {
        subsystem: cfg.subsystem,
        points,
    })
}

/// Runs independent experiments in parallel; results keep the input order.
pub fn run_batch(configs: &[ExperimentConfig]) -> Vec<Result<DistanceTrace, ChaosError>> {
    configs.par_iter().map(distance_trace).collect()
}

/// Inclusive range of two-step cycles `m = n/2` used by a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleWindow {
    pub first: f64,
    pub last: f64,
}

impl CycleWindow {
    pub fn new(first: f64, last: f64) -> Self {
        CycleWindow { first, last }
    }

    fn contains_step(&self, step: u64) -> bool {
        let m = step as f64 / 2.0;
        m >= self.first && m <= self.last
    }
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

fn fit_points(
    trace: &DistanceTrace,
    keep: impl Fn(u64) -> bool,
) -> Result<Vec<&TracePoint>, ChaosError> {
    let pts: Vec<_> = trace.points.iter().filter(|p| keep(p.step)).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(ChaosError::TooFewPoints { found: pts.len() });
    }
    for p in &pts {
        if p.d2 >= SATURATION_GUARD {
            return Err(ChaosError::Saturated {
                step: p.step,
                d2: p.d2,
            });
        }
        if p.d2 <= 0.0 {
            return Err(ChaosError::ZeroDistance { step: p.step });
        }
    }
    Ok(pts)
}

/// Growth rate of `ln D` per two-step cycle over `window`.
///
/// For the Fibonacci schedule this approaches `ln β ≈ 0.4812`.
pub fn lyapunov_estimate(trace: &DistanceTrace, window: CycleWindow) -> Result<f64, ChaosError> {
    let pts = fit_points(trace, |s| window.contains_step(s))?;
    let xs: Vec<f64> = pts.iter().map(|p| p.step as f64 / 2.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| 0.5 * p.d2.ln()).collect();
    Ok(linear_slope(&xs, &ys))
}

/// Exponent `k` of `D ∝ n^k` fitted over steps `lo ..= hi` (`lo ≥ 1`).
pub fn power_law_exponent(trace: &DistanceTrace, lo: u64, hi: u64) -> Result<f64, ChaosError> {
    let lo = lo.max(1);
    let pts = fit_points(trace, |s| (lo..=hi).contains(&s))?;
    let xs: Vec<f64> = pts.iter().map(|p| (p.step as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| 0.5 * p.d2.ln()).collect();
    Ok(linear_slope(&xs, &ys))
}

/// Slope of `ln D` per step over steps `lo ..= hi`.
pub fn log_slope_per_step(trace: &DistanceTrace, lo: u64, hi: u64) -> Result<f64, ChaosError> {
    let pts = fit_points(trace, |s| (lo..=hi).contains(&s))?;
    let xs: Vec<f64> = pts.iter().map(|p| p.step as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| 0.5 * p.d2.ln()).collect();
    Ok(linear_slope(&xs, &ys))
}

/// Head stability matrix on a periodic orbit, from simulation and from the
/// finite-`δ` closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadStability {
    pub m: u32,
    pub delta: f64,
    /// `Δσ₂(2m)/Δσ₂(0)`
    pub m11: f64,
    /// `σ₃′(2m)/σ₃′(0)`
    pub m22: f64,
    pub m11_closed: f64,
    pub m22_closed: f64,
    pub m11_limit: f64,
    pub m22_limit: f64,
}

fn check_delta(delta: f64) -> Result<(), ChaosError> {
    if delta > 0.0 && delta <= 0.1 {
        Ok(())
    } else {
        Err(ChaosError::DeltaOutOfRange(delta))
    }
}

fn head_at(evo: &mut Evolution, step: u64) -> Result<crate::state::BlochVector, ChaosError> {
    while evo.step() < step {
        evo.advance();
    }
    Ok(evo.state().bloch(Spin::Head)?)
}

fn tape_s3_at(evo: &mut Evolution, step: u64) -> Result<f64, ChaosError> {
    while evo.step() < step {
        evo.advance();
    }
    Ok(evo.state().bloch(Spin::Tape)?.s3)
}

pub fn stability_matrix_numeric(
    m: u32,
    delta: f64,
    schedule: &ScheduleConfig,
) -> Result<HeadStability, ChaosError> {
    check_delta(delta)?;
    let limits = stability_limits(m)?;
    let angle = schedule.exact_fibonacci().ok_or(ChaosError::NotExact)?;
    if !period_conditions(angle, m as u64).all() {
        return Err(ChaosError::NotPeriodic {
            p: angle.p(),
            q: angle.q(),
            period: 2 * m as u64,
        });
    }
    let (mut a, mut b) = paired_evolutions(schedule, delta, true)?;
    let a0 = head_at(&mut a, 0)?;
    let b0 = head_at(&mut b, 0)?;
    let end = 2 * m as u64;
    let a1 = head_at(&mut a, end)?;
    let b1 = head_at(&mut b, end)?;
    let (m11_closed, m22_closed) = finite_delta_head_matrix(m, delta)?;
    Ok(HeadStability {
        m,
        delta,
        m11: (b1.s2 - a1.s2) / (b0.s2 - a0.s2),
        m22: b1.s3 / b0.s3,
        m11_closed,
        m22_closed,
        m11_limit: limits.m11,
        m22_limit: limits.m22,
    })
}

/// Tape ratio `Δσ₃(2m+2)/Δσ₃(2)` from simulation, its finite-`δ` closed form
/// and its `δ → 0` limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TapeStability {
    pub m: u32,
    pub delta: f64,
    pub ratio: f64,
    pub closed: f64,
    pub limit: f64,
}

pub fn tape_stability_numeric(
    m: u32,
    delta: f64,
    schedule: &ScheduleConfig,
) -> Result<TapeStability, ChaosError> {
    check_tape_preconditions(m, schedule)?;
    check_delta(delta)?;
    let (mut a, mut b) = paired_evolutions(schedule, delta, true)?;
    let d_start = tape_s3_at(&mut b, 2)? - tape_s3_at(&mut a, 2)?;
    let end = 2 * m as u64 + 2;
    let d_end = tape_s3_at(&mut b, end)? - tape_s3_at(&mut a, end)?;
    Ok(TapeStability {
        m,
        delta,
        ratio: d_end / d_start,
        closed: finite_delta_tape_ratio(m, delta, schedule)?,
        limit: tape_stability_limit(m, schedule)?,
    })
}
