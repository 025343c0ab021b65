#![allow(dead_code)]

use num_complex::Complex64 as C64;
use qtm_core::state::{network_distance_sq, Matrix2};
use qtm_core::{
    Branch, DistanceTrace, Evolution, NetworkState, Oracle, ScheduleConfig, Spin, Subsystem,
    SuperpositionWeights, TapeState,
};

pub type Matrix4 = [[C64; 4]; 4];

fn zero4() -> Matrix4 {
    [[C64::new(0.0, 0.0); 4]; 4]
}

pub fn identity4() -> Matrix4 {
    let mut m = zero4();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn matmul4(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut r = zero4();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                r[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    r
}

/// `A ⊗ B` with the head as the more significant index.
pub fn kron(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut r = zero4();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    r
}

/// `exp(−iσ₁α/2) ⊗ 1` built from the Pauli matrix.
pub fn head_rotation(alpha: f64) -> Matrix4 {
    let (s, c) = (alpha / 2.0).sin_cos();
    let id = qtm_core::state::pauli::IDENTITY;
    let x = qtm_core::state::pauli::SIGMA1;
    let mut r: Matrix2 = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = id[i][j] * c - C64::new(0.0, s) * x[i][j];
        }
    }
    kron(&r, &id)
}

/// Controlled NOT flipping the tape when the head is `|−1⟩`:
/// `P₋ ⊗ σ₁ + P₊ ⊗ 1`.
pub fn qcnot_matrix() -> Matrix4 {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let p_minus = [[one, zero], [zero, zero]];
    let p_plus = [[zero, zero], [zero, one]];
    let a = kron(&p_minus, &qtm_core::state::pauli::SIGMA1);
    let b = kron(&p_plus, &qtm_core::state::pauli::IDENTITY);
    let mut r = zero4();
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[i][j] + b[i][j];
        }
    }
    r
}

fn apply4(m: &Matrix4, v: &[C64; 4]) -> [C64; 4] {
    let mut r = [C64::new(0.0, 0.0); 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i] += m[i][j] * v[j];
        }
    }
    r
}

/// Largest amplitude difference between the gate-by-gate evolution and the
/// explicit product `U_n ⋯ U_1` for every `n ≤ steps`.
pub fn brute_force_deviation(schedule: &ScheduleConfig, initial: NetworkState, steps: u64) -> f64 {
    let angles: Vec<f64> = schedule
        .sequence()
        .take(steps.div_ceil(2) as usize)
        .collect();
    let mut product = identity4();
    let mut worst: f64 = 0.0;
    for (n, state) in (1..=steps).zip(Evolution::new(schedule, initial)) {
        let gate = if n % 2 == 1 {
            head_rotation(angles[(n / 2) as usize])
        } else {
            qcnot_matrix()
        };
        product = matmul4(&gate, &product);
        let expect = apply4(&product, initial.amplitudes());
        for (a, b) in expect.iter().zip(state.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

/// Largest `|‖ψ_n‖² − 1|` over `steps` gates.
pub fn unitarity_drift(schedule: &ScheduleConfig, initial: NetworkState, steps: u64) -> f64 {
    let base = initial.norm_sq();
    Evolution::new(schedule, initial)
        .take(steps as usize)
        .map(|s| (s.norm_sq() - base).abs())
        .fold(0.0, f64::max)
}

/// Largest `|purity − 1|` and `|σ₁|` of the head over a primitive branch.
pub fn primitive_deviation(
    schedule: &ScheduleConfig,
    head_angle: f64,
    tape: TapeState,
    steps: u64,
) -> (f64, f64) {
    let mut purity: f64 = 0.0;
    let mut plane: f64 = 0.0;
    for s in Evolution::new(schedule, NetworkState::init(head_angle, tape)).take(steps as usize) {
        let b = s.bloch(Spin::Head).expect("hermitian");
        purity = purity.max((b.length_sq() - 1.0).abs());
        plane = plane.max(b.s1.abs());
    }
    (purity, plane)
}

/// Worst violation of `D² ∈ [0, 2]`, `O′ ∈ [0, 1]` and, for the network,
/// `D² = 2(1 − O′)`.
pub fn metric_violation(trace: &DistanceTrace) -> f64 {
    let mut worst: f64 = 0.0;
    for p in &trace.points {
        worst = worst
            .max(-p.d2)
            .max(p.d2 - 2.0)
            .max(-p.overlap)
            .max(p.overlap - 1.0);
        if trace.subsystem == Subsystem::Network {
            worst = worst.max((p.d2 - 2.0 * (1.0 - p.overlap)).abs());
        }
    }
    worst
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OracleDeviation {
    pub primitive: f64,
    pub superposed: f64,
    pub product_form: f64,
    pub tape: f64,
    pub first_step_over: Option<u64>,
}

impl OracleDeviation {
    pub fn max(&self) -> f64 {
        self.primitive
            .max(self.superposed)
            .max(self.product_form)
            .max(self.tape)
    }
}

/// Simulation against every closed form for the initial state
/// `exp(−iσ₁δ/2)|−1⟩ ⊗ |tape⟩` under the `δ`-seeded schedule, `n ≤ steps`.
pub fn oracle_deviation(schedule: &ScheduleConfig, steps: u64, tol: f64) -> OracleDeviation {
    let delta = schedule.delta;
    let oracle = Oracle::new(schedule, steps);
    let mut dev = OracleDeviation::default();
    let note = |n: u64, d: f64, slot: &mut f64, first: &mut Option<u64>| {
        *slot = slot.max(d);
        if d > tol && first.is_none() {
            *first = Some(n);
        }
    };
    let mut first = None;

    for (tape, branch) in [
        (TapeState::KetPlus, Branch::Plus),
        (TapeState::KetMinus, Branch::Minus),
    ] {
        let init = NetworkState::init(delta, tape);
        let states = std::iter::once(init).chain(Evolution::new(schedule, init));
        for (n, s) in (0..=steps).zip(states) {
            let d = s
                .bloch(Spin::Head)
                .unwrap()
                .max_abs_diff(&oracle.head_bloch_primitive(branch, n));
            note(n, d, &mut dev.primitive, &mut first);
        }
    }

    let w = SuperpositionWeights::from_tape(TapeState::KetMinus1);
    let init = NetworkState::init(delta, TapeState::KetMinus1);
    let states = std::iter::once(init).chain(Evolution::new(schedule, init));
    for (n, s) in (0..=steps).zip(states) {
        let head = s.bloch(Spin::Head).unwrap();
        note(
            n,
            head.max_abs_diff(&oracle.head_bloch_superposed(&w, n)),
            &mut dev.superposed,
            &mut first,
        );
        note(
            n,
            head.max_abs_diff(&oracle.head_bloch_product_form(n)),
            &mut dev.product_form,
            &mut first,
        );
        let tape = s.bloch(Spin::Tape).unwrap().s3;
        note(
            n,
            (tape - oracle.tape_sigma3(n).unwrap()).abs(),
            &mut dev.tape,
            &mut first,
        );
    }
    dev.first_step_over = first;
    dev
}

/// `|ψ⟩` and `|ψ′⟩` differ only by a global phase, so their distance is zero.
pub fn phase_invariance(state: &NetworkState, phase: f64) -> f64 {
    let g = C64::from_polar(1.0, phase);
    let rotated = NetworkState::from_amplitudes(state.amplitudes().map(|a| a * g));
    network_distance_sq(state, &rotated)
}
