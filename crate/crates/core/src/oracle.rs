//! Closed-form predictions for the driven network.
//!
//! Everything here is computed from cumulative rotation angles, never from
//! amplitudes, so it serves as an independent check on [`crate::state`].
//!
//! With the tape in a `σ₁` eigenstate `|±⟩` the controlled NOT either does
//! nothing (`|+⟩`) or applies `σ₃` to the head (`|−⟩`), so the head stays
//! pure on the circle `s₁ = 0` at angle `C_n(±)`:
//!
//! ```text
//! C_{2m}(+) = C_{2m-1}(+) = φ₀ + Σ_{j≤m} α_j
//! C_{2m-1}(−) = α_m + C_{2m-2}(−),   C_{2m}(−) = −C_{2m-1}(−),   C_0(−) = φ₀
//! ```
//!
//! A general initial state is a superposition of the two branches and the
//! head Bloch vector is their convex combination.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::wrap_angle;
use crate::schedule::{
    cumulative_minus_from, cumulative_plus_from, fibonacci, AngleTable, RationalPi, ScheduleConfig,
    ScheduleMode,
};
use crate::state::{BlochVector, TapeState, C64};

/// Largest `m` for which the stability limits are evaluated exactly.
pub const MAX_STABILITY_M: u32 = 90;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("rational multiple of pi needs a positive denominator")]
    ZeroDenominator,
    #[error("m = {0} is outside the supported range")]
    BadIndex(u64),
    #[error("m = {0} exceeds the exact Fibonacci range (max {MAX_STABILITY_M})")]
    TooLarge(u64),
    #[error("sin(alpha1) = 0: the tape stability ratio is undefined")]
    SinAlphaZero,
    #[error("period 2m = {0} is not a multiple of 4")]
    WrongPeriodClass(u64),
    #[error("superposition weights are not normalized (|a+|^2 + |a-|^2 = {0})")]
    Unnormalized(f64),
    #[error("the tape formula assumes the initial head phase equals the schedule seed")]
    HeadPhaseNotSeed,
    #[error("step {step} needs alpha_{need}, table only reaches alpha_{have}")]
    OutOfRange { step: u64, need: usize, have: usize },
}

/// Tape eigenstate labelling a primitive (entanglement-free) branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Amplitudes of the `|+⟩` and `|−⟩` tape components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperpositionWeights {
    plus: C64,
    minus: C64,
}

impl SuperpositionWeights {
    pub fn new(plus: C64, minus: C64) -> Result<Self, OracleError> {
        let n = plus.norm_sqr() + minus.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(OracleError::Unnormalized(n));
        }
        Ok(SuperpositionWeights { plus, minus })
    }

    /// Decomposition of a tape ket in the `σ₁` eigenbasis.
    pub fn from_tape(tape: TapeState) -> Self {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let (plus, minus) = match tape {
            TapeState::KetMinus1 => (r, -r),
            TapeState::Ket1 => (r, r),
            TapeState::KetPlus => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            TapeState::KetMinus => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        };
        SuperpositionWeights { plus, minus }
    }

    pub fn plus(&self) -> C64 {
        self.plus
    }

    pub fn minus(&self) -> C64 {
        self.minus
    }
}

/// Closed-form evaluator bound to one schedule and one initial head phase.
#[derive(Clone, Debug)]
pub struct Oracle {
    table: AngleTable,
    head_phase: f64,
}

impl Oracle {
    /// Oracle for the initial state `exp(−iσ₁δ/2)|−1⟩ ⊗ |tape⟩`, i.e. the
    /// head phase equals the schedule seed `α₀ = δ`. Valid for steps
    /// `0 ..= max_step`.
    pub fn new(schedule: &ScheduleConfig, max_step: u64) -> Self {
        let table = AngleTable::new(schedule, table_len(max_step));
        let head_phase = table.seed();
        Oracle { table, head_phase }
    }

    /// Oracle for an arbitrary initial head angle `φ₀`.
    pub fn with_head_phase(schedule: &ScheduleConfig, max_step: u64, head_phase: f64) -> Self {
        let table = AngleTable::new(schedule, table_len(max_step));
        Oracle { table, head_phase }
    }

    pub fn table(&self) -> &AngleTable {
        &self.table
    }

    pub fn head_phase(&self) -> f64 {
        self.head_phase
    }

    /// `C_n(±)`.
    pub fn cumulative(&self, branch: Branch, n: u64) -> f64 {
        match branch {
            Branch::Plus => {
                cumulative_plus_from(&self.table, self.head_phase, n.div_ceil(2) as usize)
            }
            Branch::Minus => cumulative_minus_from(&self.table, self.head_phase, n as usize),
        }
    }

    /// Head Bloch vector `(0, sin C_n(±), −cos C_n(±))` of a primitive branch.
    pub fn head_bloch_primitive(&self, branch: Branch, n: u64) -> BlochVector {
        let (s, c) = self.cumulative(branch, n).sin_cos();
        BlochVector::new(0.0, s, -c)
    }

    /// `|a₊|²·σ(n|+) + |a₋|²·σ(n|−)`.
    pub fn head_bloch_superposed(&self, w: &SuperpositionWeights, n: u64) -> BlochVector {
        let p = w.plus.norm_sqr();
        let q = w.minus.norm_sqr();
        let mut v = BlochVector::default();
        if p != 0.0 {
            v = v + self.head_bloch_primitive(Branch::Plus, n).scale(p);
        }
        if q != 0.0 {
            v = v + self.head_bloch_primitive(Branch::Minus, n).scale(q);
        }
        v
    }

    /// Equal-weight head Bloch vector in product form:
    /// `cos A·(sin B, −cos B)` at step `2m` and `cos B·(sin A, −cos A)` at `2m − 1`.
    ///
    /// The head phase joins the odd-index sum (`A_m` for odd `m`, `B_m` for even).
    pub fn head_bloch_product_form(&self, n: u64) -> BlochVector {
        if n == 0 {
            let (s, c) = self.head_phase.sin_cos();
            return BlochVector::new(0.0, s, -c);
        }
        let m = n.div_ceil(2) as usize;
        let (a, b) = self.table.ab_angles(m);
        let (a, b) = if m % 2 == 1 {
            (wrap_angle(a + self.head_phase), b)
        } else {
            (a, wrap_angle(b + self.head_phase))
        };
        let (outer, inner) = if n.is_multiple_of(2) { (a, b) } else { (b, a) };
        let (s, c) = inner.sin_cos();
        let k = outer.cos();
        BlochVector::new(0.0, k * s, -k * c)
    }

    /// Tape `σ₃` for the initial state `exp(−iσ₁δ/2)|−1⟩ ⊗ |−1⟩`:
    ///
    /// ```text
    /// −cos(α_{k+1} − α₁ + δ·F_k)   n ≡ 0, 1 (mod 4)
    /// +cos(α_{k+1} + δ·F_k)        n ≡ 2, 3 (mod 4)
    /// ```
    ///
    /// with `k = ⌊n/2⌋`. The combination `α_{k+1} + δ·F_k` is exactly the
    /// `δ`-seeded schedule angle `α'_{k+1}`, which is what gets evaluated.
    pub fn tape_sigma3(&self, n: u64) -> Result<f64, OracleError> {
        if self.head_phase != self.table.seed() {
            return Err(OracleError::HeadPhaseNotSeed);
        }
        let k = (n / 2) as usize;
        self.check_range(n, k + 1)?;
        let combined = self.table.angle(k + 1);
        Ok(tape_branch(n, combined, self.table.angle(1)))
    }

    /// The same formula with `α_{k+1}` from the unperturbed schedule and
    /// `δ·F_k` added separately. Agrees with [`Oracle::tape_sigma3`] only while
    /// rounding differences between the two recurrences stay small (k ≲ 30).
    pub fn tape_sigma3_split(&self, n: u64) -> Result<f64, OracleError> {
        let k = (n / 2) as usize;
        self.check_range(n, k + 1)?;
        let mut base_cfg = *self.table.config();
        base_cfg.delta = 0.0;
        let base = AngleTable::new(&base_cfg, k + 1);
        let combined = base.angle(k + 1) + self.table.delta_fib(k);
        Ok(tape_branch(n, combined, base.angle(1)))
    }

    /// Closed forms of the periodic-orbit cumulative angles
    /// for the unperturbed schedule: `α₁(F_{m+2} − 1)` and `α₁((−1)^m − F_{m−1})`.
    pub fn periodic_cumulative_closed_form(&self, m: u32) -> Result<(f64, f64), OracleError> {
        periodic_cumulative_closed_form(self.table.config(), m)
    }

    fn check_range(&self, step: u64, need: usize) -> Result<(), OracleError> {
        let have = self.table.max_m();
        if need > have {
            Err(OracleError::OutOfRange { step, need, have })
        } else {
            Ok(())
        }
    }
}

fn table_len(max_step: u64) -> usize {
    (max_step / 2 + 2) as usize
}

fn tape_branch(n: u64, combined: f64, alpha1: f64) -> f64 {
    match n % 4 {
        0 | 1 => -(combined - alpha1).cos(),
        _ => combined.cos(),
    }
}

/// The three closure conditions of a period-`2m` orbit from `|−1, −1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodConditions {
    /// `C_{2m}(+) ≡ 0 (mod 2π)`
    pub plus_closes: bool,
    /// `C_{2m}(−) ≡ 0 (mod 2π)`
    pub minus_closes: bool,
    /// `α_{m+1} ≡ α₁ (mod 2π)`
    pub angle_returns: bool,
}

impl PeriodConditions {
    pub fn all(&self) -> bool {
        self.plus_closes && self.minus_closes && self.angle_returns
    }
}

/// Integer scan over `m` of the closure conditions for `α₁ = (p/q)·π`.
#[derive(Clone, Debug)]
pub struct PeriodScan {
    residue: u128,
    modulus: u128,
    m: u64,
    f_cur: u128,
    f_next: u128,
    plus: u128,
    alternating: u128,
}

impl PeriodScan {
    pub fn new(angle: RationalPi) -> Self {
        let modulus = angle.modulus() as u128;
        PeriodScan {
            residue: angle.residue() as u128,
            modulus,
            m: 0,
            f_cur: 0,
            f_next: 1 % modulus,
            plus: 0,
            alternating: 0,
        }
    }
}

impl Iterator for PeriodScan {
    /// `(m, conditions at m)`
    type Item = (u64, PeriodConditions);

    fn next(&mut self) -> Option<Self::Item> {
        let md = self.modulus;
        self.m += 1;
        // advance to F_m, F_{m+1}
        let f_m = self.f_next;
        let f_after = (self.f_cur + self.f_next) % md;
        self.f_cur = f_m;
        self.f_next = f_after;
        self.plus = (self.plus + f_m) % md;
        self.alternating = if self.m.is_multiple_of(2) {
            (self.alternating + f_m) % md
        } else {
            (self.alternating + md - f_m) % md
        };
        let closes = |x: u128| (x * self.residue).is_multiple_of(md);
        let cond = PeriodConditions {
            plus_closes: closes(self.plus),
            minus_closes: closes(self.alternating),
            angle_returns: closes((self.f_next + md - 1) % md),
        };
        Some((self.m, cond))
    }
}

/// Closure conditions at a given `m`.
pub fn period_conditions(angle: RationalPi, m: u64) -> PeriodConditions {
    assert!(m >= 1);
    PeriodScan::new(angle)
        .nth((m - 1) as usize)
        .map(|(_, c)| c)
        .expect("scan is unbounded")
}

/// Smallest period `n = 2m` (searching `m ≤ m_max`) of the head pattern for
/// `α₁ = (p/q)·π` started from `|−1, −1⟩`, or `None` if no `m` closes.
pub fn periodic_orbit_check(p: i64, q: u64, m_max: u64) -> Result<Option<u64>, OracleError> {
    let angle = RationalPi::new(p, q).map_err(|_| OracleError::ZeroDenominator)?;
    Ok(PeriodScan::new(angle)
        .take(m_max as usize)
        .find(|(_, c)| c.all())
        .map(|(m, _)| 2 * m))
}

/// `δ → 0` limits of the head stability matrix at period `2m`:
/// `M₁₁ → F_{m−1}`, `M₂₂ → 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadLimits {
    pub m11: f64,
    pub m22: f64,
}

pub fn stability_limits(m: u32) -> Result<HeadLimits, OracleError> {
    if m == 0 {
        return Err(OracleError::BadIndex(0));
    }
    if m > MAX_STABILITY_M {
        return Err(OracleError::TooLarge(m as u64));
    }
    let f = fibonacci(m - 1).expect("within u128 range");
    Ok(HeadLimits {
        m11: f as f64,
        m22: 1.0,
    })
}

/// `δ → 0` limit of the tape ratio `Δσ₃(2m+2)/Δσ₃(2)`:
/// `F_{m+1}·sin(α_{m+2})/sin(α₁)`. Requires `2m ≡ 0 (mod 4)`.
pub fn tape_stability_limit(m: u32, schedule: &ScheduleConfig) -> Result<f64, OracleError> {
    check_tape_preconditions(m, schedule)?;
    let f = fibonacci(m + 1).expect("within u128 range") as f64;
    let alpha_m2 = unperturbed_angle(schedule, (m + 2) as usize);
    Ok(f * alpha_m2.sin() / schedule.alpha1.sin())
}

pub(crate) fn check_tape_preconditions(
    m: u32,
    schedule: &ScheduleConfig,
) -> Result<(), OracleError> {
    if m == 0 {
        return Err(OracleError::BadIndex(0));
    }
    if m > MAX_STABILITY_M {
        return Err(OracleError::TooLarge(m as u64));
    }
    if m % 2 == 1 {
        return Err(OracleError::WrongPeriodClass(2 * m as u64));
    }
    if sin_alpha1(schedule).abs() < 1e-12 {
        return Err(OracleError::SinAlphaZero);
    }
    Ok(())
}

fn sin_alpha1(schedule: &ScheduleConfig) -> f64 {
    match schedule.exact {
        Some(r) => r.angle_of_residue(r.residue()).sin(),
        None => schedule.alpha1.sin(),
    }
}

fn unperturbed_angle(schedule: &ScheduleConfig, m: usize) -> f64 {
    let mut cfg = *schedule;
    cfg.delta = 0.0;
    AngleTable::new(&cfg, m).angle(m)
}

/// `(ΔC_{2m}(+), ΔC_{2m}(−)) = (δ·F_{m+1}, −δ·F_{m−2})`, `m ≥ 2`.
pub fn delta_c(m: u32, delta: f64) -> Result<(f64, f64), OracleError> {
    if m < 2 {
        return Err(OracleError::BadIndex(m as u64));
    }
    let plus = fibonacci(m + 1).ok_or(OracleError::TooLarge(m as u64))? as f64;
    let minus = fibonacci(m - 2).ok_or(OracleError::TooLarge(m as u64))? as f64;
    Ok((delta * plus, -delta * minus))
}

/// `C^per_{2m}(+) = α₁(F_{m+2} − 1)` and `C^per_{2m}(−) = α₁((−1)^m − F_{m−1})`,
/// reduced mod 2π. Exact when the schedule carries `α₁ = (p/q)·π`.
pub fn periodic_cumulative_closed_form(
    schedule: &ScheduleConfig,
    m: u32,
) -> Result<(f64, f64), OracleError> {
    if m == 0 {
        return Err(OracleError::BadIndex(0));
    }
    let f_plus = fibonacci(m + 2).ok_or(OracleError::TooLarge(m as u64))?;
    let f_minus = fibonacci(m - 1).ok_or(OracleError::TooLarge(m as u64))?;
    let sign: i128 = if m.is_multiple_of(2) { 1 } else { -1 };
    let plus_coeff = f_plus as i128 - 1;
    let minus_coeff = sign - f_minus as i128;
    match schedule.exact {
        Some(r) if schedule.mode == ScheduleMode::Fibonacci => {
            let md = r.modulus() as i128;
            let res = r.residue() as i128;
            let ring = |c: i128| ((c.rem_euclid(md) * res).rem_euclid(md)) as u64;
            Ok((
                r.angle_of_residue(ring(plus_coeff)),
                r.angle_of_residue(ring(minus_coeff)),
            ))
        }
        _ => {
            let a1 = schedule.alpha1;
            Ok((
                wrap_angle(a1 * plus_coeff as f64),
                wrap_angle(a1 * minus_coeff as f64),
            ))
        }
    }
}

/// Finite-`δ` head stability matrix on a period-`2m` orbit:
/// `M₁₁ = cos(δF_m)·sin(δF_{m−1})/sin δ`, `M₂₂ = cos(δF_m)·cos(δF_{m−1})/cos δ`.
pub fn finite_delta_head_matrix(m: u32, delta: f64) -> Result<(f64, f64), OracleError> {
    if m == 0 {
        return Err(OracleError::BadIndex(0));
    }
    if m > MAX_STABILITY_M {
        return Err(OracleError::TooLarge(m as u64));
    }
    let fm = fibonacci(m).expect("in range") as f64;
    let fm1 = fibonacci(m - 1).expect("in range") as f64;
    let (s0, c0) = (delta * fm1).sin_cos();
    let c1 = (delta * fm).cos();
    Ok((c1 * s0 / delta.sin(), c1 * c0 / delta.cos()))
}

/// Finite-`δ` tape ratio
/// `[cos(α_{m+2} + δF_{m+1}) − cos α_{m+2}] / [cos(α₁ + δ) − cos α₁]`.
pub fn finite_delta_tape_ratio(
    m: u32,
    delta: f64,
    schedule: &ScheduleConfig,
) -> Result<f64, OracleError> {
    check_tape_preconditions(m, schedule)?;
    let f = fibonacci(m + 1).expect("in range") as f64;
    let a = unperturbed_angle(schedule, (m + 2) as usize);
    let a1 = unperturbed_angle(schedule, 1);
    Ok(((a + delta * f).cos() - a.cos()) / ((a1 + delta).cos() - a1.cos()))
}
