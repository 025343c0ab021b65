//! Double-double angles.
//!
//! The Fibonacci recurrence multiplies any rounding error by roughly 1.618 per
//! step, so a plain `f64` recurrence is wrong in the eighth digit after about
//! 35 cycles. Carrying the unevaluated sum `hi + lo` pushes that horizon out
//! past 100 cycles while keeping only additions on the hot path.

use std::f64::consts::TAU;

/// Low word of 2π in double-double form.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub(crate) const TAU: Dd = Dd {
        hi: TAU,
        lo: TAU_LO,
    };

    pub(crate) fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub(crate) fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub(crate) fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub(crate) fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub(crate) fn mul_f64(self, k: f64) -> Dd {
        let (p, e) = two_prod(self.hi, k);
        let (hi, lo) = quick_two_sum(p, e + self.lo * k);
        Dd { hi, lo }
    }

    fn is_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    fn below_tau(self) -> bool {
        self.hi < TAU || (self.hi == TAU && self.lo < TAU_LO)
    }

    /// Reduces into `[0, 2π)`.
    pub(crate) fn wrap(self) -> Dd {
        let mut x = self;
        if !(0.0..2.0 * TAU).contains(&x.hi) {
            let turns = (x.hi / TAU).floor();
            x = x.sub(Dd::TAU.mul_f64(turns));
        }
        while x.is_negative() {
            x = x.add(Dd::TAU);
        }
        while !x.below_tau() {
            x = x.sub(Dd::TAU);
        }
        x
    }

    /// Rounds a wrapped value to `f64`, keeping the result strictly below 2π.
    pub(crate) fn to_angle(self) -> f64 {
        let v = self.hi + self.lo;
        if v >= TAU {
            f64::from_bits(TAU.to_bits() - 1)
        } else if v < 0.0 {
            0.0
        } else {
            v
        }
    }
}

/// `x mod 2π` in `[0, 2π)`, reduced against the double-double modulus.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    Dd::from_f64(x).wrap().to_angle()
}
