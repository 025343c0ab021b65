//! Two-spin quantum Turing machine driven by a Fibonacci angle schedule.
//!
//! A head spin is rotated by `exp(−iσ₁α_m/2)` and then coupled to a tape spin
//! through a controlled NOT, with the rotation angles following
//! `α_{m+1} = α_m + α_{m−1}`. The crate provides:
//!
//! - [`schedule`]: angle generators, including an exact integer path for
//!   `α₁ = (p/q)·π`;
//! - [`state`]: the four-amplitude state vector and its reduced spins;
//! - [`oracle`]: closed-form Bloch vectors and stability limits;
//! - [`chaos`]: paired trajectories, distance traces and growth fits;
//! - [`pattern`]: head patterns, periods and revisit statistics.

mod dd;

pub mod chaos;
pub mod oracle;
pub mod pattern;
pub mod schedule;
pub mod state;

pub use chaos::{
    distance_trace, lyapunov_estimate, run_batch, stability_matrix_numeric, tape_stability_numeric,
    ChaosError, CycleWindow, DistanceTrace, ExperimentConfig, HeadStability, Subsystem,
    TapeStability, TracePoint,
};
pub use oracle::{
    periodic_orbit_check, stability_limits, Branch, Oracle, OracleError, SuperpositionWeights,
};
pub use schedule::{
    AngleSequence, AngleTable, RationalPi, ScheduleConfig, ScheduleError, ScheduleMode,
};
pub use state::{
    BlochVector, DensityMatrix2, Evolution, NetworkState, Spin, StateError, TapeState, C64,
};

/// `ln β`, the growth rate of the Fibonacci numbers per index.
pub const LN_GOLDEN: f64 = 0.481_211_825_059_603_4;
