//! Control-angle schedules for the head rotations.
//!
//! Three schedules drive the machine:
//!
//! * **Fibonacci**: `α_{m+1} = α_m + α_{m-1}`, so `α_m = F_m·α₁`.
//! * **Fixed**: `α_m = α₁` for every `m ≥ 1`.
//! * **Arithmetic**: `α_{m+1} = 2α_m - α_{m-1}`, so `α_m = m·α₁`.
//!
//! Every schedule is seeded with `α₀ = δ`. The seed doubles as the initial
//! head phase: the perturbed experiment rotates the head by `δ` before the
//! first gate and feeds the same `δ` into the recurrence, which for the
//! Fibonacci schedule gives `α'_m = α_m + δ·F_{m-1}`.
//!
//! Angles are reduced mod 2π after every recurrence step. When `α₁` is a
//! rational multiple of π the Fibonacci schedule runs on integers
//! (`F_m mod 2q`) and never drifts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::{wrap_angle, Dd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("angle {name} is not finite: {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("rational multiple of pi needs a positive denominator")]
    ZeroDenominator,
    #[error("alpha1 = {alpha1} does not match the exact angle {p}/{q}*pi")]
    ExactMismatch { alpha1: f64, p: i64, q: u64 },
}

/// Which recurrence generates `α_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Fibonacci,
    Fixed,
    Arithmetic,
}

/// An angle `(p/q)·π` with `gcd(p, q) = 1` and `q ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPi {
    p: i64,
    q: u64,
}

impl RationalPi {
    /// Builds `(p/q)·π`, dividing out any common factor.
    pub fn new(p: i64, q: u64) -> Result<Self, ScheduleError> {
        if q == 0 {
            return Err(ScheduleError::ZeroDenominator);
        }
        let g = gcd(p.unsigned_abs(), q);
        let g = g.max(1);
        Ok(RationalPi {
            p: p / g as i64,
            q: q / g,
        })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Modulus of the integer angle ring: `2q` steps of `π/q` make a turn.
    pub fn modulus(&self) -> u64 {
        2 * self.q
    }

    /// `p mod 2q`, the numerator as a ring element.
    pub fn residue(&self) -> u64 {
        self.p.rem_euclid(self.modulus() as i64) as u64
    }

    pub fn radians(&self) -> f64 {
        PI * self.p as f64 / self.q as f64
    }

    /// Angle `π·r/q` for a ring element `r ∈ [0, 2q)`.
    pub fn angle_of_residue(&self, r: u64) -> f64 {
        let a = PI * r as f64 / self.q as f64;
        wrap_angle(a)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Generator parameters for one angle schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub mode: ScheduleMode,
    pub alpha1: f64,
    pub delta: f64,
    pub exact: Option<RationalPi>,
}

impl ScheduleConfig {
    pub fn new(mode: ScheduleMode, alpha1: f64) -> Result<Self, ScheduleError> {
        check_finite("alpha1", alpha1)?;
        Ok(ScheduleConfig {
            mode,
            alpha1,
            delta: 0.0,
            exact: None,
        })
    }

    pub fn fibonacci(alpha1: f64) -> Result<Self, ScheduleError> {
        Self::new(ScheduleMode::Fibonacci, alpha1)
    }

    pub fn fixed(alpha: f64) -> Result<Self, ScheduleError> {
        Self::new(ScheduleMode::Fixed, alpha)
    }

    pub fn arithmetic(alpha1: f64) -> Result<Self, ScheduleError> {
        Self::new(ScheduleMode::Arithmetic, alpha1)
    }

    /// Schedule with `α₁ = (p/q)·π` carried exactly.
    pub fn exact(mode: ScheduleMode, angle: RationalPi) -> Self {
        ScheduleConfig {
            mode,
            alpha1: angle.radians(),
            delta: 0.0,
            exact: Some(angle),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self, ScheduleError> {
        check_finite("delta", delta)?;
        self.delta = delta;
        Ok(self)
    }

    /// Checks the invariants a hand-built (e.g. deserialized) config might break.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        check_finite("alpha1", self.alpha1)?;
        check_finite("delta", self.delta)?;
        if let Some(r) = self.exact {
            if r.q == 0 {
                return Err(ScheduleError::ZeroDenominator);
            }
            let expect = r.radians();
            let ulp = f64::EPSILON * expect.abs().max(f64::MIN_POSITIVE);
            if (expect - self.alpha1).abs() > ulp {
                return Err(ScheduleError::ExactMismatch {
                    alpha1: self.alpha1,
                    p: r.p,
                    q: r.q,
                });
            }
        }
        Ok(())
    }

    /// The integer path only applies to the Fibonacci schedule.
    pub fn exact_fibonacci(&self) -> Option<RationalPi> {
        match self.mode {
            ScheduleMode::Fibonacci => self.exact,
            _ => None,
        }
    }

    pub fn sequence(&self) -> AngleSequence {
        AngleSequence::new(self)
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<(), ScheduleError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ScheduleError::NonFinite { name, value })
    }
}

#[derive(Clone, Debug)]
enum Generator {
    Fixed {
        alpha: f64,
    },
    /// `(α_m, α_{m+1})` for the float recurrences.
    Recurrent {
        mode: ScheduleMode,
        cur: Dd,
        next: Dd,
    },
    /// `(F_m, F_{m+1}) mod 2q`, plus the δ·F_{m-1} drift when perturbed.
    Exact {
        angle: RationalPi,
        f_cur: u64,
        f_next: u64,
        drift: Option<(Dd, Dd)>,
    },
}

/// Stateful generator yielding `α₁, α₂, …`, each in `[0, 2π)`.
///
/// The seed `α₀` is available through [`AngleSequence::seed`].
#[derive(Clone, Debug)]
pub struct AngleSequence {
    seed: f64,
    emitted: u64,
    gen: Generator,
}

impl AngleSequence {
    pub fn new(config: &ScheduleConfig) -> Self {
        let seed_dd = Dd::from_f64(config.delta).wrap();
        let gen = match (config.mode, config.exact_fibonacci()) {
            (ScheduleMode::Fibonacci, Some(angle)) => Generator::Exact {
                angle,
                f_cur: 0,
                f_next: 1 % angle.modulus(),
                drift: (config.delta != 0.0).then_some((seed_dd, Dd::ZERO)),
            },
            (ScheduleMode::Fixed, _) => Generator::Fixed {
                alpha: wrap_angle(config.alpha1),
            },
            (mode, _) => Generator::Recurrent {
                mode,
                cur: seed_dd,
                next: Dd::from_f64(config.alpha1).wrap(),
            },
        };
        AngleSequence {
            seed: seed_dd.to_angle(),
            emitted: 0,
            gen,
        }
    }

    /// `α₀`, the seed and initial head phase.
    pub fn seed(&self) -> f64 {
        self.seed
    }

    /// Number of angles emitted so far; the next call yields `α_{m+1}`.
    pub fn position(&self) -> u64 {
        self.emitted
    }
}

impl Iterator for AngleSequence {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = match &mut self.gen {
            Generator::Fixed { alpha } => *alpha,
            Generator::Recurrent { mode, cur, next } => {
                let out = next.to_angle();
                let after = match mode {
                    ScheduleMode::Arithmetic => next.add(*next).sub(*cur),
                    _ => next.add(*cur),
                }
                .wrap();
                *cur = *next;
                *next = after;
                out
            }
            Generator::Exact {
                angle,
                f_cur,
                f_next,
                drift,
            } => {
                let modulus = angle.modulus() as u128;
                let r = (*f_next as u128 * angle.residue() as u128 % modulus) as u64;
                let base = angle.angle_of_residue(r);
                let out = match drift {
                    None => base,
                    Some((d_cur, d_next)) => {
                        let v = Dd::from_f64(base).add(*d_next).wrap().to_angle();
                        let d_after = d_next.add(*d_cur).wrap();
                        *d_cur = *d_next;
                        *d_next = d_after;
                        v
                    }
                };
                let f_after = ((*f_cur as u128 + *f_next as u128) % modulus) as u64;
                *f_cur = *f_next;
                *f_next = f_after;
                out
            }
        };
        self.emitted += 1;
        Some(out)
    }
}

/// Materialized prefix `α₀ … α_M` of a schedule with the cumulative sums
/// the closed forms need.
#[derive(Clone, Debug)]
pub struct AngleTable {
    config: ScheduleConfig,
    /// `α_0 ..= α_M`.
    angles: Vec<f64>,
    /// `Σ_{j=1}^m α_j mod 2π`.
    plus: Vec<f64>,
    /// `Σ_{j=1}^m (-1)^j α_j mod 2π`.
    alternating: Vec<f64>,
    /// `A_m = α_m + α_{m-2} + …`, with `A_0 = 0`.
    a_sums: Vec<f64>,
    /// `δ·F_m mod 2π`.
    delta_fib: Vec<f64>,
}

impl AngleTable {
    /// Builds `α₀ … α_{max_m}`.
    pub fn new(config: &ScheduleConfig, max_m: usize) -> Self {
        let mut seq = AngleSequence::new(config);
        let mut angles = Vec::with_capacity(max_m + 1);
        angles.push(seq.seed());
        angles.extend(seq.by_ref().take(max_m));

        let mut plus = Vec::with_capacity(max_m + 1);
        let mut alternating = Vec::with_capacity(max_m + 1);
        let mut a_sums = Vec::with_capacity(max_m + 1);
        let (mut p, mut t) = (Dd::ZERO, Dd::ZERO);
        plus.push(0.0);
        alternating.push(0.0);
        a_sums.push(0.0);
        let mut a_dd = vec![Dd::ZERO];
        for (j, &alpha) in angles.iter().enumerate().skip(1) {
            let x = Dd::from_f64(alpha);
            p = p.add(x).wrap();
            t = if j % 2 == 0 { t.add(x) } else { t.sub(x) }.wrap();
            let prev = if j >= 2 { a_dd[j - 2] } else { Dd::ZERO };
            let a = prev.add(x).wrap();
            a_dd.push(a);
            plus.push(p.to_angle());
            alternating.push(t.to_angle());
            a_sums.push(a.to_angle());
        }

        let delta_fib = if config.delta == 0.0 {
            vec![0.0; max_m + 1]
        } else {
            // δ·F_m is the Fibonacci schedule with α₁ = δ.
            let unit = ScheduleConfig {
                mode: ScheduleMode::Fibonacci,
                alpha1: config.delta,
                delta: 0.0,
                exact: None,
            };
            std::iter::once(0.0)
                .chain(AngleSequence::new(&unit).take(max_m))
                .collect()
        };

        AngleTable {
            config: *config,
            angles,
            plus,
            alternating,
            a_sums,
            delta_fib,
        }
    }

    pub fn config(&self) -> &ScheduleConfig {
        &self.config
    }

    /// Largest `m` for which `α_m` is available.
    pub fn max_m(&self) -> usize {
        self.angles.len() - 1
    }

    pub fn seed(&self) -> f64 {
        self.angles[0]
    }

    /// `α_m mod 2π`, `m ≥ 0` (`α₀` is the seed).
    pub fn angle(&self, m: usize) -> f64 {
        self.angles[m]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `Σ_{j=1}^m α_j mod 2π`, without the seed.
    pub fn rotation_sum(&self, m: usize) -> f64 {
        self.plus[m]
    }

    /// `Σ_{j=1}^m (-1)^j α_j mod 2π`.
    pub fn alternating_sum(&self, m: usize) -> f64 {
        self.alternating[m]
    }

    /// `C_{2m}(+) = α₀ + Σ_{j=1}^m α_j mod 2π`. Also the value at step `2m - 1`.
    pub fn cumulative_plus(&self, m: usize) -> f64 {
        cumulative_plus_from(self, self.seed(), m)
    }

    /// `C_n(-)`, the cumulative angle of the `|−⟩` branch after `n` gates.
    pub fn cumulative_minus(&self, n: usize) -> f64 {
        cumulative_minus_from(self, self.seed(), n)
    }

    /// `(A_m, B_m)` by direct summation over alternating indices, `m ≥ 1`.
    ///
    /// `A_m = α_m + α_{m-2} + …` ends at `α₁` or `α₂`; `B_m = A_{m-1}`.
    pub fn ab_angles(&self, m: usize) -> (f64, f64) {
        assert!(m >= 1, "A_m, B_m are defined for m >= 1");
        (self.a_sums[m], self.a_sums[m - 1])
    }

    /// Parity-dependent closed forms of `(A_m, B_m)` in terms of single angles.
    /// Needs `α_{m+1}`, so `m < max_m`.
    pub fn ab_closed_form(&self, m: usize) -> (f64, f64) {
        assert!(m >= 1);
        let a1 = self.angle(1);
        let a_next = self.angle(m + 1);
        let a_m = self.angle(m);
        if m % 2 == 1 {
            (a_next, wrap_angle(a_m - a1))
        } else {
            (wrap_angle(a_next - a1), a_m)
        }
    }

    /// `δ·F_m mod 2π` for this schedule's `δ`.
    pub fn delta_fib(&self, m: usize) -> f64 {
        self.delta_fib[m]
    }
}

pub(crate) fn cumulative_plus_from(table: &AngleTable, phase: f64, m: usize) -> f64 {
    Dd::from_f64(phase)
        .add(Dd::from_f64(table.rotation_sum(m)))
        .wrap()
        .to_angle()
}

/// Closed form of the `|−⟩` branch recursion
/// `C_{2m-1} = α_m + C_{2m-2}`, `C_{2m} = -C_{2m-1}`, with `C_0 = phase`.
pub(crate) fn cumulative_minus_from(table: &AngleTable, phase: f64, n: usize) -> f64 {
    if n == 0 {
        return wrap_angle(phase);
    }
    let m = n.div_ceil(2);
    let t = Dd::from_f64(table.alternating_sum(m));
    let ph = Dd::from_f64(phase);
    // Even n = 2m: (-1)^m·phase + (-1)^(m-1)·T_m; odd n flips both signs.
    let mut phase_sign_neg = m % 2 == 1;
    if n % 2 == 1 {
        phase_sign_neg = !phase_sign_neg;
    }
    let ph = if phase_sign_neg { ph.neg() } else { ph };
    let t = if phase_sign_neg { t } else { t.neg() };
    ph.add(t).wrap().to_angle()
}

/// Exact Fibonacci number `F_n` (`F_0 = 0`, `F_1 = 1`), `None` past `F_186`.
pub fn fibonacci(n: u32) -> Option<u128> {
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..n {
        let c = a.checked_add(b)?;
        a = b;
        b = c;
    }
    Some(a)
}

/// `F_n mod modulus` by fast doubling.
pub fn fibonacci_mod(n: u64, modulus: u64) -> u64 {
    fn go(n: u64, m: u128) -> (u128, u128) {
        if n == 0 {
            return (0, 1 % m);
        }
        let (a, b) = go(n / 2, m);
        let two_b = (2 * b) % m;
        let c = a * ((two_b + m - a) % m) % m;
        let d = (a * a + b * b) % m;
        if n.is_multiple_of(2) {
            (c, d)
        } else {
            (d, (c + d) % m)
        }
    }
    assert!(modulus > 0);
    go(n, modulus as u128).0 as u64
}

/// Binet's formula `(β^m − γ^m)/√5` evaluated in floating point.
pub fn binet(m: i32) -> f64 {
    let sqrt5 = 5f64.sqrt();
    let beta = (1.0 + sqrt5) / 2.0;
    let gamma = (1.0 - sqrt5) / 2.0;
    (beta.powi(m) - gamma.powi(m)) / sqrt5
}

/// `δ·F_m mod 2π` as a standalone evaluation.
pub fn delta_fib(delta: f64, m: usize) -> f64 {
    if m == 0 || delta == 0.0 {
        return 0.0;
    }
    let unit = ScheduleConfig {
        mode: ScheduleMode::Fibonacci,
        alpha1: delta,
        delta: 0.0,
        exact: None,
    };
    AngleSequence::new(&unit).nth(m - 1).unwrap_or(0.0)
}
