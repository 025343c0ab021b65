//! Angle generators checked against exact references.

use num_bigint::BigInt;
use num_integer::Integer;
use qtm_core::schedule::{binet, delta_fib, fibonacci, fibonacci_mod};
use qtm_core::{AngleTable, RationalPi, ScheduleConfig, ScheduleMode};
use std::f64::consts::TAU;

const PI_DIGITS: &str = "31415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679821480865132823066470938446095505822317253594081284811174502841027019385211055596446229489549303819";
/// Decimals carried by `PI_DIGITS`.
const SCALE_DIGITS: u32 = 199;

/// `F_m·a mod 2π` for the exact binary value of `a`, using a 200-digit π.
fn exact_fib_angle(m: u32, a: f64) -> f64 {
    assert!(a > 0.0);
    let bits = a.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1075;
    let mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    assert!(exp < 0);
    let scale = BigInt::from(10u32).pow(SCALE_DIGITS);
    let f = BigInt::from(fibonacci(m).unwrap());
    // floor(F_m · mant · 10^200 / 2^-exp)
    let x = (f * BigInt::from(mant) * &scale) >> (-exp) as usize;
    let two_pi = BigInt::parse_bytes(PI_DIGITS.as_bytes(), 10).unwrap() * 2;
    let r = x.mod_floor(&two_pi);
    let top: BigInt = r / BigInt::from(10u32).pow(SCALE_DIGITS - 18);
    let top: u128 = top.try_into().unwrap();
    top as f64 / 1e18
}

fn circle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn reference_reduction_sanity() {
    assert!((exact_fib_angle(1, 0.3) - 0.3).abs() < 1e-17);
    assert!((exact_fib_angle(10, 0.3) - (55.0f64 * 0.3).rem_euclid(TAU)).abs() < 1e-13);
}

#[test]
// the truncated π is deliberate: it breaks the orbit of the exact 2π/5
#[allow(clippy::approx_constant)]
fn recurrence_tracks_exact_values_to_m_70() {
    for a1 in [0.3, 0.4 * 3.141592654, 1.0, 2.5, 0.4 * std::f64::consts::PI] {
        let cfg = ScheduleConfig::fibonacci(a1).unwrap();
        for (m, got) in (1..=70u32).zip(cfg.sequence()) {
            let want = exact_fib_angle(m, a1);
            assert!(
                circle_diff(got, want) < 1e-8,
                "a1={a1} m={m}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn binet_agrees_with_integers() {
    for m in 0..=70 {
        let f = fibonacci(m as u32).unwrap() as f64;
        assert!((binet(m) - f).abs() <= 1e-15 * f.max(1.0) * 4.0, "m={m}");
    }
}

#[test]
fn exact_mode_follows_integer_ring_to_a_million() {
    for (p, q) in [(2, 5), (1, 7), (-3, 11), (5, 97)] {
        let angle = RationalPi::new(p, q).unwrap();
        let md = angle.modulus();
        let cfg = ScheduleConfig::exact(ScheduleMode::Fibonacci, angle);
        for (m, got) in (1..=1_000_000u64).zip(cfg.sequence()) {
            if m <= 2000 || m % 997 == 0 {
                let r =
                    (fibonacci_mod(m, md) as u128 * angle.residue() as u128 % md as u128) as u64;
                assert_eq!(got, angle.angle_of_residue(r), "{p}/{q} m={m}");
            }
        }
    }
}

#[test]
fn seeded_schedule_shifts_by_scaled_fibonacci() {
    for a1 in [0.3, 1.0, 0.4 * std::f64::consts::PI] {
        for delta in [1e-3, 1e-8, 0.05] {
            let base = AngleTable::new(&ScheduleConfig::fibonacci(a1).unwrap(), 50);
            let cfg = ScheduleConfig::fibonacci(a1)
                .unwrap()
                .with_delta(delta)
                .unwrap();
            let pert = AngleTable::new(&cfg, 50);
            for m in 1..=50usize {
                let want = delta * fibonacci(m as u32 - 1).unwrap() as f64;
                // `want` itself is only good to an ulp once it is large
                let tol = 1e-12 + 4.0 * f64::EPSILON * want;
                let d = circle_diff(pert.angle(m) - base.angle(m), want);
                assert!(d < tol, "a1={a1} delta={delta} m={m}: {d}");
                assert!(circle_diff(delta_fib(delta, m - 1), want) < tol, "m={m}");
            }
        }
    }
}

#[test]
fn exact_seeded_schedule_keeps_integer_part() {
    let angle = RationalPi::new(2, 5).unwrap();
    let base = ScheduleConfig::exact(ScheduleMode::Fibonacci, angle);
    let pert = base.with_delta(1e-6).unwrap();
    for (m, (a, b)) in (1..=60u32).zip(base.sequence().zip(pert.sequence())) {
        let want = 1e-6 * fibonacci(m - 1).unwrap() as f64;
        let tol = 1e-12 + 4.0 * f64::EPSILON * want;
        assert!(circle_diff(b - a, want) < tol, "m={m}");
    }
}
