//! The binary floating-point number system and its exact substrate.
//!
//! [`FpnParams`] describes a binary format by precision and exponent range.
//! [`Dyadic`] is an exact arbitrary-precision dyadic rational that every
//! finite binary float embeds into; it is the ground truth that every filter
//! is checked against via [`oracle_sign`].

mod dyadic;
mod oracle;

pub use dyadic::{Dyadic, DyadicError, Rounded};
pub use oracle::{oracle_sign, oracle_value, OracleError};

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Parameters of a binary floating-point number system.
///
/// `precision` counts the hidden bit, so binary64 has `precision == 53` and
/// `epsilon == 2^-53` (half the gap between 1.0 and its successor).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpnParams {
    precision: u32,
    e_min: i32,
    e_max: i32,
    epsilon: f64,
    u_normal: f64,
    u_subnormal: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("precision must be at least 2, got {0}")]
    Precision(u32),
    #[error("exponent range [{e_min}, {e_max}] is empty")]
    ExponentRange { e_min: i32, e_max: i32 },
    #[error("format constants are not representable in binary64")]
    NotRepresentable,
}

impl FpnParams {
    pub fn new(precision: u32, e_min: i32, e_max: i32) -> Result<Self, ParamsError> {
        if precision < 2 {
            return Err(ParamsError::Precision(precision));
        }
        if e_min >= e_max {
            return Err(ParamsError::ExponentRange { e_min, e_max });
        }
        let p = precision as i32;
        // u_S = 2^(e_min - p + 1) must itself be a binary64 number.
        if p > 53 || e_min - p + 1 < -1074 || e_max > 1023 {
            return Err(ParamsError::NotRepresentable);
        }
        Ok(FpnParams {
            precision,
            e_min,
            e_max,
            epsilon: pow2(-p),
            u_normal: pow2(e_min),
            u_subnormal: pow2(e_min - p + 1),
        })
    }

    /// IEEE 754 binary64: p = 53, e_min = -1022, e_max = 1023.
    pub fn binary64() -> Self {
        FpnParams::new(53, -1022, 1023).expect("binary64 parameters are valid")
    }

    /// IEEE 754 binary32: p = 24, e_min = -126, e_max = 127.
    pub fn binary32() -> Self {
        FpnParams::new(24, -126, 127).expect("binary32 parameters are valid")
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn e_min(&self) -> i32 {
        self.e_min
    }

    pub fn e_max(&self) -> i32 {
        self.e_max
    }

    /// Machine epsilon `2^-p`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Smallest positive normalized number `2^e_min`.
    pub fn u_normal(&self) -> f64 {
        self.u_normal
    }

    /// Smallest positive subnormal number `2^(e_min - p + 1) = 2 ε u_N`.
    pub fn u_subnormal(&self) -> f64 {
        self.u_subnormal
    }
}

impl Default for FpnParams {
    fn default() -> Self {
        FpnParams::binary64()
    }
}

/// Exact power of two as binary64; `k` must lie in `[-1074, 1023]`.
pub(crate) fn pow2(k: i32) -> f64 {
    assert!((-1074..=1023).contains(&k), "2^{k} is not a finite binary64");
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// The sign of a real number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative = -1,
    Zero = 0,
    Positive = 1,
}

impl Sign {
    /// Sign of a binary64 value; `None` for NaN.
    pub fn of_f64(x: f64) -> Option<Sign> {
        match x.partial_cmp(&0.0)? {
            Ordering::Less => Some(Sign::Negative),
            Ordering::Equal => Some(Sign::Zero),
            Ordering::Greater => Some(Sign::Positive),
        }
    }

    pub fn to_i32(self) -> i32 {
        self as i32
    }

    pub fn from_i32(v: i32) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Negative),
            0 => Some(Sign::Zero),
            1 => Some(Sign::Positive),
            _ => None,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_i32(self.to_i32() * rhs.to_i32()).unwrap()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-1",
            Sign::Zero => "0",
            Sign::Positive => "+1",
        })
    }
}
