//! One function per subcommand. Each returns the bytes to emit, so the
//! binary only handles argument parsing, files and exit codes.

use std::fmt::Write as _;

use anyhow::{bail, ensure};
use qtm_core::chaos::SATURATION_GUARD;
use qtm_core::oracle::period_conditions;
use qtm_core::{
    distance_trace, lyapunov_estimate, periodic_orbit_check, stability_matrix_numeric,
    tape_stability_numeric, BlochVector, ChaosError, CycleWindow, DensityMatrix2, Evolution,
    ExperimentConfig, NetworkState, Oracle, ScheduleMode, Spin, Subsystem, SuperpositionWeights,
    TapeState, LN_GOLDEN,
};
use serde::Serialize;

use crate::alpha::AlphaSpec;
use crate::output::float;

/// Largest step count `oracle-check` accepts.
pub const MAX_ORACLE_STEPS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PatternArgs {
    pub alpha1: AlphaSpec,
    pub mode: ScheduleMode,
    pub delta: f64,
    pub steps: u64,
    pub phi0: f64,
    pub tape: TapeState,
}

/// Head Bloch vector after each step, `n = 1 ..= steps`.
pub fn pattern_csv(a: &PatternArgs) -> anyhow::Result<String> {
    ensure!(a.steps >= 1, "steps must be at least 1");
    let schedule = a.alpha1.schedule(a.mode, a.delta)?;
    let init = NetworkState::init(a.phi0, a.tape);
    let mut csv = String::from("n,s1,s2,s3,purity\n");
    for (n, state) in (1..=a.steps).zip(Evolution::new(&schedule, init)) {
        let b = state.bloch(Spin::Head)?;
        writeln!(
            csv,
            "{n},{},{},{},{}",
            float(b.s1),
            float(b.s2),
            float(b.s3),
            float(b.length_sq())
        )?;
    }
    Ok(csv)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DistanceArgs {
    pub alpha1: AlphaSpec,
    pub mode: ScheduleMode,
    pub delta: f64,
    pub steps: u64,
    pub subsystem: Subsystem,
    pub record_every: u64,
    pub state_only: bool,
}

impl DistanceArgs {
    pub fn experiment(&self) -> anyhow::Result<ExperimentConfig> {
        let schedule = self.alpha1.schedule(self.mode, 0.0)?;
        let cfg = ExperimentConfig {
            schedule,
            delta: self.delta,
            steps: self.steps,
            subsystem: self.subsystem,
            record_every: self.record_every,
            perturb_schedule: !self.state_only,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn distance_csv(a: &DistanceArgs) -> anyhow::Result<String> {
    let trace = distance_trace(&a.experiment()?)?;
    let mut csv = String::from("n,d2,overlap\n");
    for p in &trace.points {
        writeln!(csv, "{},{},{}", p.step, float(p.d2), float(p.overlap))?;
    }
    Ok(csv)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityArgs {
    pub alpha1: AlphaSpec,
    pub m: u32,
    pub deltas: Vec<f64>,
}

/// Machine-readable failure written in place of a report.
#[derive(Debug, Serialize)]
pub struct StructuredError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smallest_period: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: StructuredError,
}

#[derive(Debug, Serialize)]
pub struct TapeEntry {
    pub ratio: f64,
    pub closed_form: f64,
    pub limit: f64,
    pub rel_error: f64,
}

#[derive(Debug, Serialize)]
pub struct StabilityEntry {
    pub delta: f64,
    pub m11: f64,
    pub m11_closed_form: f64,
    pub m11_limit: f64,
    pub m11_rel_error: f64,
    pub m22: f64,
    pub m22_closed_form: f64,
    pub m22_limit: f64,
    pub m22_abs_error: f64,
    pub tape: Option<TapeEntry>,
}

#[derive(Debug, Serialize)]
pub struct StabilityReport {
    pub alpha1: AlphaSpec,
    pub m: u32,
    pub period: u64,
    /// Why the tape ratio is absent, if it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tape_unavailable: Option<String>,
    pub entries: Vec<StabilityEntry>,
    /// Errors shrink as `δ` decreases (entries ordered by decreasing `δ`).
    pub m11_error_monotone: bool,
    pub tape_error_monotone: Option<bool>,
}

fn structured(kind: &'static str, message: impl Into<String>) -> ErrorReport {
    ErrorReport {
        error: StructuredError {
            kind,
            message: message.into(),
            smallest_period: None,
        },
    }
}

fn non_increasing(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0])
}

pub fn stability(a: &StabilityArgs) -> Result<StabilityReport, ErrorReport> {
    let Some(angle) = a.alpha1.exact() else {
        return Err(structured(
            "not_exact",
            format!(
                "alpha1 = {} is not of the form p/q; periodic orbits need an exact multiple of pi",
                a.alpha1
            ),
        ));
    };
    if a.m == 0 {
        return Err(structured("bad_m", "m must be positive"));
    }
    if a.deltas.is_empty() {
        return Err(structured("bad_delta", "the delta list is empty"));
    }
    if !period_conditions(angle, a.m as u64).all() {
        let mut report = structured(
            "not_periodic",
            format!(
                "alpha1 = {} pi does not return after 2m = {} steps",
                a.alpha1,
                2 * a.m as u64
            ),
        );
        report.error.smallest_period = periodic_orbit_check(angle.p(), angle.q(), 1_000_000)
            .ok()
            .flatten();
        return Err(report);
    }
    let schedule = a
        .alpha1
        .schedule(ScheduleMode::Fibonacci, 0.0)
        .map_err(|e| structured("bad_alpha", e.to_string()))?;

    let mut deltas = a.deltas.clone();
    deltas.sort_by(|x, y| y.total_cmp(x));
    let mut entries = Vec::with_capacity(deltas.len());
    let mut tape_unavailable = None;
    for &delta in &deltas {
        let head = stability_matrix_numeric(a.m, delta, &schedule).map_err(|e| match e {
            ChaosError::DeltaOutOfRange(_) => structured("bad_delta", e.to_string()),
            other => structured("stability", other.to_string()),
        })?;
        let tape = match tape_stability_numeric(a.m, delta, &schedule) {
            Ok(t) => Some(TapeEntry {
                ratio: t.ratio,
                closed_form: t.closed,
                limit: t.limit,
                rel_error: (t.ratio - t.limit).abs() / t.limit.abs(),
            }),
            Err(e) => {
                tape_unavailable = Some(e.to_string());
                None
            }
        };
        entries.push(StabilityEntry {
            delta,
            m11: head.m11,
            m11_closed_form: head.m11_closed,
            m11_limit: head.m11_limit,
            m11_rel_error: if head.m11_limit == 0.0 {
                head.m11.abs()
            } else {
                (head.m11 - head.m11_limit).abs() / head.m11_limit
            },
            m22: head.m22,
            m22_closed_form: head.m22_closed,
            m22_limit: head.m22_limit,
            m22_abs_error: (head.m22 - head.m22_limit).abs(),
            tape,
        });
    }
    let m11_error_monotone = non_increasing(entries.iter().map(|e| e.m11_rel_error));
    let tape_error_monotone = tape_unavailable.is_none().then(|| {
        non_increasing(
            entries
                .iter()
                .filter_map(|e| e.tape.as_ref().map(|t| t.rel_error)),
        )
    });
    Ok(StabilityReport {
        alpha1: a.alpha1,
        m: a.m,
        period: 2 * a.m as u64,
        tape_unavailable,
        entries,
        m11_error_monotone,
        tape_error_monotone,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleCheckArgs {
    pub alpha1: AlphaSpec,
    pub delta: f64,
    pub steps: u64,
    pub tolerance: f64,
}

#[derive(Debug, Default, Serialize)]
pub struct OracleCheckReport {
    pub pass: bool,
    pub steps: u64,
    pub tolerance: f64,
    pub max_head_superposed: f64,
    pub max_head_product_form: f64,
    pub max_head_primitive: f64,
    pub max_tape_s3: f64,
    pub max_deviation: f64,
    pub first_failing_step: Option<u64>,
    pub first_failing_check: Option<&'static str>,
}

impl OracleCheckReport {
    fn record(&mut self, check: &'static str, step: u64, dev: f64) {
        let slot = match check {
            "head_superposed" => &mut self.max_head_superposed,
            "head_product_form" => &mut self.max_head_product_form,
            "head_primitive" => &mut self.max_head_primitive,
            _ => &mut self.max_tape_s3,
        };
        *slot = slot.max(dev);
        self.max_deviation = self.max_deviation.max(dev);
        let earlier = self.first_failing_step.is_none_or(|s| step < s);
        if (dev.is_nan() || dev > self.tolerance) && earlier {
            self.first_failing_step = Some(step);
            self.first_failing_check = Some(check);
        }
    }
}

/// Bloch components as the simulator reports them.
pub fn standard_bloch(rho: &DensityMatrix2) -> anyhow::Result<BlochVector> {
    Ok(rho.bloch()?)
}

/// Simulation against the closed forms at every step, for the initial state
/// `exp(−iσ₁δ/2)|−1⟩ ⊗ |tape⟩` under the `δ`-seeded Fibonacci schedule.
///
/// `extract` turns a reduced density matrix into Bloch components; swapping
/// it out is how the check is tested against a deliberately broken observable.
pub fn oracle_check_with<F>(a: &OracleCheckArgs, extract: F) -> anyhow::Result<OracleCheckReport>
where
    F: Fn(&DensityMatrix2) -> anyhow::Result<BlochVector>,
{
    if a.steps > MAX_ORACLE_STEPS {
        bail!("steps must be at most {MAX_ORACLE_STEPS}");
    }
    ensure!(a.tolerance > 0.0, "tolerance must be positive");
    let schedule = a.alpha1.schedule(ScheduleMode::Fibonacci, a.delta)?;
    let oracle = Oracle::new(&schedule, a.steps);
    let mut report = OracleCheckReport {
        steps: a.steps,
        tolerance: a.tolerance,
        ..Default::default()
    };

    let weights = SuperpositionWeights::from_tape(TapeState::KetMinus1);
    let init = NetworkState::init(a.delta, TapeState::KetMinus1);
    let states = std::iter::once(init).chain(Evolution::new(&schedule, init));
    for (n, s) in (0..=a.steps).zip(states) {
        let head = extract(&s.reduce(Spin::Head))?;
        report.record(
            "head_superposed",
            n,
            head.max_abs_diff(&oracle.head_bloch_superposed(&weights, n)),
        );
        report.record(
            "head_product_form",
            n,
            head.max_abs_diff(&oracle.head_bloch_product_form(n)),
        );
        let tape = extract(&s.reduce(Spin::Tape))?;
        report.record("tape_s3", n, (tape.s3 - oracle.tape_sigma3(n)?).abs());
    }

    for (tape, branch) in [
        (TapeState::KetPlus, qtm_core::Branch::Plus),
        (TapeState::KetMinus, qtm_core::Branch::Minus),
    ] {
        let init = NetworkState::init(a.delta, tape);
        let states = std::iter::once(init).chain(Evolution::new(&schedule, init));
        for (n, s) in (0..=a.steps).zip(states) {
            let head = extract(&s.reduce(Spin::Head))?;
            report.record(
                "head_primitive",
                n,
                head.max_abs_diff(&oracle.head_bloch_primitive(branch, n)),
            );
        }
    }
    report.pass = report.first_failing_step.is_none();
    Ok(report)
}

pub fn oracle_check(a: &OracleCheckArgs) -> anyhow::Result<OracleCheckReport> {
    oracle_check_with(a, standard_bloch)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LyapunovArgs {
    pub distance: DistanceArgs,
    pub first_cycle: f64,
    pub last_cycle: f64,
}

#[derive(Debug, Serialize)]
pub struct LyapunovReport {
    pub rate_per_cycle: f64,
    pub target: f64,
    pub rel_error: f64,
    pub first_cycle: f64,
    pub last_cycle: f64,
    pub points: usize,
    pub max_d2_in_window: f64,
    pub saturation_guard: f64,
}

pub fn lyapunov(a: &LyapunovArgs) -> anyhow::Result<LyapunovReport> {
    ensure!(
        a.first_cycle <= a.last_cycle,
        "window start is after its end"
    );
    let trace = distance_trace(&a.distance.experiment()?)?;
    let window = CycleWindow::new(a.first_cycle, a.last_cycle);
    let rate = lyapunov_estimate(&trace, window)?;
    let in_window: Vec<f64> = trace
        .points
        .iter()
        .filter(|p| {
            let m = p.step as f64 / 2.0;
            m >= a.first_cycle && m <= a.last_cycle
        })
        .map(|p| p.d2)
        .collect();
    Ok(LyapunovReport {
        rate_per_cycle: rate,
        target: LN_GOLDEN,
        rel_error: (rate - LN_GOLDEN).abs() / LN_GOLDEN,
        first_cycle: a.first_cycle,
        last_cycle: a.last_cycle,
        points: in_window.len(),
        max_d2_in_window: in_window.iter().copied().fold(0.0, f64::max),
        saturation_guard: SATURATION_GUARD,
    })
}
