//! State-vector simulation of the head ⊗ tape network.
//!
//! Basis ordering: amplitude index `2h + t`, where `h` (head) and `t` (tape)
//! are 0 for the ket `|−1⟩` and 1 for `|1⟩`. With `σ₃ = diag(−1, +1)` the
//! initial ket `|−1⟩` sits at Bloch vector `(0, 0, −1)` and a head rotation
//! by `C` moves it to `(0, sin C, −cos C)`.

use std::f64::consts::{PI, TAU};
use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{AngleSequence, ScheduleConfig};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub type Matrix2 = [[C64; 2]; 2];

/// Pauli matrices in the `(|−1⟩, |1⟩)` ordering.
pub mod pauli {
    use super::{Matrix2, C64, I, ONE, ZERO};

    pub const SIGMA1: Matrix2 = [[ZERO, ONE], [ONE, ZERO]];
    /// `σ₂ = i·σ₁·σ₃`.
    pub const SIGMA2: Matrix2 = [[ZERO, I], [C64::new(0.0, -1.0), ZERO]];
    pub const SIGMA3: Matrix2 = [[C64::new(-1.0, 0.0), ZERO], [ZERO, ONE]];
    pub const IDENTITY: Matrix2 = [[ONE, ZERO], [ZERO, ONE]];

    pub const ALL: [Matrix2; 3] = [SIGMA1, SIGMA2, SIGMA3];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("expectation value of sigma_{component} has imaginary part {imag:e}")]
    NonRealExpectation { component: usize, imag: f64 },
    #[error("density matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix eigenvalue {0} outside [0, 1]")]
    BadEigenvalue(f64),
}

/// Initial tape ket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TapeState {
    /// `|−1⟩`
    KetMinus1,
    /// `|1⟩`
    Ket1,
    /// `|+⟩ = (|−1⟩ + |1⟩)/√2`
    KetPlus,
    /// `|−⟩ = (|−1⟩ − |1⟩)/√2`
    KetMinus,
}

impl TapeState {
    pub fn amplitudes(self) -> [C64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            TapeState::KetMinus1 => [ONE, ZERO],
            TapeState::Ket1 => [ZERO, ONE],
            TapeState::KetPlus => [C64::new(r, 0.0), C64::new(r, 0.0)],
            TapeState::KetMinus => [C64::new(r, 0.0), C64::new(-r, 0.0)],
        }
    }
}

/// One of the two spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Head,
    Tape,
}

/// Pure state of the two-spin network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkState {
    amps: [C64; 4],
}

impl NetworkState {
    /// `exp(−iσ₁φ₀/2)|−1⟩ ⊗ |tape⟩`.
    pub fn init(head_angle: f64, tape: TapeState) -> Self {
        let (s, c) = (head_angle / 2.0).sin_cos();
        let head = [C64::new(c, 0.0), C64::new(0.0, -s)];
        Self::product(head, tape.amplitudes())
    }

    /// `|−1, −1⟩`.
    pub fn ground() -> Self {
        Self::init(0.0, TapeState::KetMinus1)
    }

    pub fn product(head: [C64; 2], tape: [C64; 2]) -> Self {
        let mut amps = [ZERO; 4];
        for h in 0..2 {
            for t in 0..2 {
                amps[2 * h + t] = head[h] * tape[t];
            }
        }
        NetworkState { amps }
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(amps: [C64; 4]) -> Self {
        NetworkState { amps }
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &NetworkState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies `exp(−iσ₁⁽ˢ⁾α/2) ⊗ 1⁽¹⁾`.
    ///
    /// The gate acts as a plane rotation on the real pairs `(Re a₀ₜ, Im a₁ₜ)`
    /// and `(Re a₁ₜ, Im a₀ₜ)`. It is applied as three shears with
    /// `tan(α/4)` and `sin(α/2)`: the usual `cos`/`sin` form has
    /// `cos² + sin² ≠ 1` in floating point, which biases the norm by the same
    /// amount every step and shows up after ~10⁵ gates.
    pub fn rotate_head(&mut self, alpha: f64) {
        // exp(−iσ₁(α − 2π)/2) = −exp(−iσ₁α/2); keep |α/4| ≤ π/4
        let (alpha, flip) = if alpha > PI {
            (alpha - TAU, true)
        } else if alpha < -PI {
            (alpha + TAU, true)
        } else {
            (alpha, false)
        };
        let t = (alpha / 4.0).tan();
        let s = (alpha / 2.0).sin();
        let shear = |x: &mut f64, y: &mut f64| {
            *x += t * *y;
            *y -= s * *x;
            *x += t * *y;
        };
        for k in 0..2 {
            let mut lo = self.amps[k];
            let mut hi = self.amps[2 + k];
            shear(&mut lo.re, &mut hi.im);
            shear(&mut hi.re, &mut lo.im);
            if flip {
                lo = -lo;
                hi = -hi;
            }
            self.amps[k] = lo;
            self.amps[2 + k] = hi;
        }
    }

    /// Controlled NOT: flips the tape when the head is `|−1⟩`.
    pub fn qcnot(&mut self) {
        self.amps.swap(0, 1);
    }

    pub fn with_head_rotation(mut self, alpha: f64) -> Self {
        self.rotate_head(alpha);
        self
    }

    pub fn with_qcnot(mut self) -> Self {
        self.qcnot();
        self
    }

    /// Partial trace over the other spin.
    pub fn reduce(&self, keep: Spin) -> DensityMatrix2 {
        let c = &self.amps;
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] = match keep {
                    Spin::Head => c[2 * i] * c[2 * j].conj() + c[2 * i + 1] * c[2 * j + 1].conj(),
                    Spin::Tape => c[i] * c[j].conj() + c[2 + i] * c[2 + j].conj(),
                };
            }
        }
        DensityMatrix2(rho)
    }

    pub fn bloch(&self, spin: Spin) -> Result<BlochVector, StateError> {
        self.reduce(spin).bloch()
    }
}

/// Reduced state of one spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2(pub Matrix2);

impl DensityMatrix2 {
    /// `|ψ⟩⟨ψ|` for a one-spin ket.
    pub fn pure(ket: [C64; 2]) -> Self {
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] = ket[i] * ket[j].conj();
            }
        }
        DensityMatrix2(rho)
    }

    pub fn maximally_mixed() -> Self {
        let h = C64::new(0.5, 0.0);
        DensityMatrix2([[h, ZERO], [ZERO, h]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// `Tr(ρ·op)`.
    pub fn expectation(&self, op: &Matrix2) -> C64 {
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| self.0[i][j] * op[j][i])
            .sum()
    }

    /// Bloch components `Tr(ρσ_j)`.
    pub fn bloch(&self) -> Result<BlochVector, StateError> {
        let mut s = [0.0; 3];
        for (k, sigma) in pauli::ALL.iter().enumerate() {
            let v = self.expectation(sigma);
            if v.im.abs() > 1e-9 {
                return Err(StateError::NonRealExpectation {
                    component: k + 1,
                    imag: v.im,
                });
            }
            s[k] = v.re;
        }
        Ok(BlochVector::new(s[0], s[1], s[2]))
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1].norm();
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    pub fn validate(&self) -> Result<(), StateError> {
        let r = &self.0;
        let herm = (r[0][1] - r[1][0].conj())
            .norm()
            .max(r[0][0].im.abs())
            .max(r[1][1].im.abs());
        if herm > 1e-12 {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = self.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(StateError::BadTrace(tr));
        }
        let (lo, hi) = self.eigenvalues();
        for e in [lo, hi] {
            if !(-1e-10..=1.0 + 1e-10).contains(&e) {
                return Err(StateError::BadEigenvalue(e));
            }
        }
        Ok(())
    }
}

/// `Tr[(ρ − ρ′)²]`, the squared Hilbert–Schmidt distance.
pub fn distance_sq(rho: &DensityMatrix2, other: &DensityMatrix2) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += (rho.0[i][j] - other.0[i][j]).norm_sqr();
        }
    }
    acc
}

/// `|⟨ψ′|ψ⟩|²`.
pub fn overlap_sq(psi: &NetworkState, other: &NetworkState) -> f64 {
    other.inner(psi).norm_sqr()
}

/// `Tr[(|ψ⟩⟨ψ| − |ψ′⟩⟨ψ′|)²] = 2(1 − |⟨ψ|ψ′⟩|²)` for normalized states.
///
/// Evaluated through the component of `ψ′` orthogonal to `ψ`, which keeps
/// full relative precision when the states are nearly equal.
pub fn network_distance_sq(psi: &NetworkState, other: &NetworkState) -> f64 {
    if psi.amps == other.amps {
        return 0.0;
    }
    let proj = psi.inner(other);
    let residual: f64 = psi
        .amps
        .iter()
        .zip(&other.amps)
        .map(|(a, b)| (b - a * proj).norm_sqr())
        .sum();
    2.0 * residual
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl BlochVector {
    pub const fn new(s1: f64, s2: f64, s3: f64) -> Self {
        BlochVector { s1, s2, s3 }
    }

    pub fn length_sq(&self) -> f64 {
        self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3
    }

    pub fn scale(self, k: f64) -> Self {
        BlochVector::new(k * self.s1, k * self.s2, k * self.s3)
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, o: &BlochVector) -> f64 {
        (self.s1 - o.s1)
            .abs()
            .max((self.s2 - o.s2).abs())
            .max((self.s3 - o.s3).abs())
    }
}

impl Add for BlochVector {
    type Output = BlochVector;

    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.s1 + o.s1, self.s2 + o.s2, self.s3 + o.s3)
    }
}

/// Gate sequence `U₁, U₂, …`: odd step `2m − 1` rotates the head by `α_m`,
/// even step `2m` is the controlled NOT.
///
/// Yields the state after each gate, starting with step 1.
#[derive(Clone, Debug)]
pub struct Evolution {
    state: NetworkState,
    angles: AngleSequence,
    step: u64,
}

impl Evolution {
    pub fn new(schedule: &ScheduleConfig, initial: NetworkState) -> Self {
        Evolution {
            state: initial,
            angles: schedule.sequence(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    /// Applies the next gate in place.
    pub fn advance(&mut self) {
        self.step += 1;
        if self.step % 2 == 1 {
            let alpha = self.angles.next().expect("schedules are unbounded");
            self.state.rotate_head(alpha);
        } else {
            self.state.qcnot();
        }
    }
}

impl Iterator for Evolution {
    type Item = NetworkState;

    fn next(&mut self) -> Option<NetworkState> {
        self.advance();
        Some(self.state)
    }
}

/// State after `n` gates.
pub fn run(schedule: &ScheduleConfig, initial: NetworkState, n: u64) -> NetworkState {
    let mut evo = Evolution::new(schedule, initial);
    for _ in 0..n {
        evo.advance();
    }
    evo.state
}
