use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use qtm_core::{RationalPi, ScheduleConfig, ScheduleMode};
use serde::{Serialize, Serializer};

/// First rotation angle as given on the command line.
///
/// `p/q` means exactly `(p/q)·π`; anything else is parsed as radians and is
/// never treated as a rational multiple of π, however close it is to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSpec {
    Radians(f64),
    PiFraction(RationalPi),
}

impl AlphaSpec {
    pub fn schedule(&self, mode: ScheduleMode, delta: f64) -> anyhow::Result<ScheduleConfig> {
        let base = match *self {
            AlphaSpec::Radians(a) => ScheduleConfig::new(mode, a)?,
            AlphaSpec::PiFraction(r) => ScheduleConfig::exact(mode, r),
        };
        Ok(base.with_delta(delta)?)
    }

    pub fn exact(&self) -> Option<RationalPi> {
        match self {
            AlphaSpec::PiFraction(r) => Some(*r),
            AlphaSpec::Radians(_) => None,
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .with_context(|| format!("bad numerator in {s:?}"))?;
            let q: u64 = q
                .trim()
                .parse()
                .with_context(|| format!("bad denominator in {s:?}"))?;
            return Ok(AlphaSpec::PiFraction(RationalPi::new(p, q)?));
        }
        let a: f64 = s
            .parse()
            .with_context(|| format!("alpha1 {s:?} is neither a float nor p/q"))?;
        if !a.is_finite() {
            bail!("alpha1 must be finite");
        }
        Ok(AlphaSpec::Radians(a))
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` prints the shortest string that parses back to the same bits
            AlphaSpec::Radians(a) => write!(f, "{a:?}"),
            AlphaSpec::PiFraction(r) => write!(f, "{}/{}", r.p(), r.q()),
        }
    }
}

impl Serialize for AlphaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
