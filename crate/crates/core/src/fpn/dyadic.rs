use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, Zero};
use thiserror::Error;

use super::{FpnParams, Sign};

/// An exact dyadic rational `sign * mantissa * 2^exponent`.
///
/// The representation is canonical: zero has sign `Zero`, mantissa 0 and
/// exponent 0; nonzero values have an odd mantissa. Structural equality is
/// therefore value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    sign: Sign,
    mantissa: BigUint,
    exponent: i64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum DyadicError {
    #[error("non-finite value {0} has no exact dyadic representation")]
    NonFinite(f64),
}

/// Result of rounding a dyadic rational into a floating-point format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rounded {
    Finite(Dyadic),
    Overflow(Sign),
}

impl Dyadic {
    pub fn zero() -> Dyadic {
        Dyadic {
            sign: Sign::Zero,
            mantissa: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Dyadic {
        Dyadic::pow2(0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Dyadic {
        Dyadic {
            sign: Sign::Positive,
            mantissa: BigUint::one(),
            exponent: k,
        }
    }

    /// Builds `sign * mantissa * 2^exponent`, canonicalizing the mantissa.
    pub fn from_parts(sign: Sign, mantissa: BigUint, exponent: i64) -> Dyadic {
        if sign == Sign::Zero || mantissa.is_zero() {
            return Dyadic::zero();
        }
        let mut d = Dyadic {
            sign,
            mantissa,
            exponent,
        };
        d.normalize();
        d
    }

    pub fn from_bigint(v: &BigInt) -> Dyadic {
        let sign = match v.sign() {
            BigSign::Minus => Sign::Negative,
            BigSign::NoSign => Sign::Zero,
            BigSign::Plus => Sign::Positive,
        };
        Dyadic::from_parts(sign, v.magnitude().clone(), 0)
    }

    pub fn from_i64(v: i64) -> Dyadic {
        Dyadic::from_bigint(&BigInt::from(v))
    }

    /// Exact value of a finite binary64 number.
    pub fn from_f64(x: f64) -> Result<Dyadic, DyadicError> {
        if !x.is_finite() {
            return Err(DyadicError::NonFinite(x));
        }
        if x == 0.0 {
            return Ok(Dyadic::zero());
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut m, mut e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let tz = m.trailing_zeros();
        m >>= tz;
        e += tz as i64;
        let sign = if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        };
        Ok(Dyadic {
            sign,
            mantissa: BigUint::from(m),
            exponent: e,
        })
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            *self = Dyadic::zero();
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i64;
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn abs(&self) -> Dyadic {
        let mut d = self.clone();
        if d.sign == Sign::Negative {
            d.sign = Sign::Positive;
        }
        d
    }

    /// `floor(log2 |self|)`, or `None` for zero.
    pub fn msb_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent + self.mantissa.bits() as i64 - 1)
        }
    }

    /// `self * 2^k`, exact.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        let mut d = self.clone();
        if !d.is_zero() {
            d.exponent += k;
        }
        d
    }

    fn cmp_magnitude(&self, other: &Dyadic) -> Ordering {
        match (self.msb_exponent(), other.msb_exponent()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) if a != b => a.cmp(&b),
            _ => {
                let e = self.exponent.min(other.exponent);
                let lhs = &self.mantissa << (self.exponent - e) as u64;
                let rhs = &other.mantissa << (other.exponent - e) as u64;
                lhs.cmp(&rhs)
            }
        }
    }

    fn add_signed(&self, other: &Dyadic, negate_other: bool) -> Dyadic {
        let other_sign = if negate_other { -other.sign } else { other.sign };
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            let mut d = other.clone();
            d.sign = other_sign;
            return d;
        }
        let e = self.exponent.min(other.exponent);
        let lhs = &self.mantissa << (self.exponent - e) as u64;
        let rhs = &other.mantissa << (other.exponent - e) as u64;
        let (sign, mantissa) = if self.sign == other_sign {
            (self.sign, lhs + rhs)
        } else {
            match lhs.cmp(&rhs) {
                Ordering::Equal => return Dyadic::zero(),
                Ordering::Greater => (self.sign, lhs - rhs),
                Ordering::Less => (other_sign, rhs - lhs),
            }
        };
        Dyadic::from_parts(sign, mantissa, e)
    }

    /// Rounds to the nearest number of the given format, ties to even,
    /// with gradual underflow. Magnitudes at or beyond
    /// `2^(e_max+1) - 2^(e_max-p)` overflow.
    pub fn round_to(&self, params: &FpnParams) -> Rounded {
        if self.is_zero() {
            return Rounded::Finite(Dyadic::zero());
        }
        let p = params.precision() as i64;
        let msb = self.msb_exponent().unwrap();
        let lsb = (msb - (p - 1)).max(params.e_min() as i64 - p + 1);
        let rounded = if self.exponent >= lsb {
            self.clone()
        } else {
            let shift = (lsb - self.exponent) as u64;
            let mut q = &self.mantissa >> shift;
            let rem = &self.mantissa - (&q << shift);
            let half = BigUint::one() << (shift - 1);
            let round_up = match rem.cmp(&half) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => q.bit(0),
            };
            if round_up {
                q += 1u32;
            }
            Dyadic::from_parts(self.sign, q, lsb)
        };
        match rounded.msb_exponent() {
            Some(m) if m > params.e_max() as i64 => Rounded::Overflow(self.sign),
            _ => Rounded::Finite(rounded),
        }
    }

    /// True if the value is a (finite) member of the format.
    pub fn is_representable_in(&self, params: &FpnParams) -> bool {
        matches!(self.round_to(params), Rounded::Finite(ref r) if r == self)
    }

    /// Nearest binary64, ties to even; overflow yields a signed infinity.
    pub fn to_f64(&self) -> f64 {
        match self.round_to(&FpnParams::binary64()) {
            Rounded::Overflow(Sign::Negative) => f64::NEG_INFINITY,
            Rounded::Overflow(_) => f64::INFINITY,
            Rounded::Finite(d) => d.to_f64_exact().expect("rounded value is representable"),
        }
    }

    /// The binary64 equal to `self`, if there is one.
    pub fn to_f64_exact(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        if self.mantissa.bits() > 53 {
            return None;
        }
        let m = self.mantissa.iter_u64_digits().next().unwrap_or(0);
        let len = self.mantissa.bits() as i64;
        let msb = self.exponent + len - 1;
        let magnitude_bits = if msb > 1023 {
            return None;
        } else if msb >= -1022 {
            let frac = (m << (53 - len)) & ((1u64 << 52) - 1);
            (((msb + 1023) as u64) << 52) | frac
        } else {
            if self.exponent < -1074 {
                return None;
            }
            m << (self.exponent + 1074)
        };
        let sign_bit = if self.sign == Sign::Negative {
            1u64 << 63
        } else {
            0
        };
        Some(f64::from_bits(sign_bit | magnitude_bits))
    }

    /// Distance from a nonnegative format member to its successor.
    fn ulp_above(&self, params: &FpnParams) -> Dyadic {
        let p = params.precision() as i64;
        let sub = params.e_min() as i64 - p + 1;
        match self.msb_exponent() {
            None => Dyadic::pow2(sub),
            Some(m) => Dyadic::pow2((m - (p - 1)).max(sub)),
        }
    }

    /// Successor of a nonnegative member of the format; `None` on overflow.
    pub fn next_up_in(&self, params: &FpnParams) -> Option<Dyadic> {
        assert!(self.sign != Sign::Negative && self.is_representable_in(params));
        let next = self + &self.ulp_above(params);
        match next.msb_exponent() {
            Some(m) if m > params.e_max() as i64 => None,
            _ => Some(next),
        }
    }

    /// Predecessor of a positive member of the format.
    pub fn next_down_in(&self, params: &FpnParams) -> Dyadic {
        assert!(self.sign == Sign::Positive && self.is_representable_in(params));
        let p = params.precision() as i64;
        let msb = self.msb_exponent().unwrap();
        let is_power_of_two = self.mantissa.is_one();
        let step = if is_power_of_two && msb > params.e_min() as i64 {
            Dyadic::pow2(msb - p)
        } else {
            self.ulp_above(params)
        };
        self - &step
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Dyadic({}, {}, {})",
            self.sign.to_i32(),
            self.mantissa,
            self.exponent
        )
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let s = if self.sign == Sign::Negative { "-" } else { "" };
        write!(f, "{s}{}*2^{}", self.mantissa, self.exponent)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Dyadic) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                Sign::Zero => Ordering::Equal,
                Sign::Positive => self.cmp_magnitude(other),
                Sign::Negative => other.cmp_magnitude(self),
            },
            ord => ord,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(mut self) -> Dyadic {
        self.sign = -self.sign;
        self
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        -self.clone()
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        self.add_signed(rhs, false)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self.add_signed(rhs, true)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // Odd times odd stays odd: already canonical.
        Dyadic {
            sign: self.sign * rhs.sign,
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;

            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }

        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;

            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpn::pow2;
    use proptest::prelude::*;

    fn d(sign: i32, m: u64, e: i64) -> Dyadic {
        Dyadic::from_parts(Sign::from_i32(sign).unwrap(), BigUint::from(m), e)
    }

    #[test]
    fn from_f64_examples() {
        assert_eq!(Dyadic::from_f64(1.0).unwrap(), d(1, 1, 0));
        assert_eq!(Dyadic::from_f64(pow2(-1074)).unwrap(), d(1, 1, -1074));
        assert_eq!(
            Dyadic::from_f64(0.1).unwrap(),
            d(1, 3602879701896397, -55)
        );
        assert_eq!(Dyadic::from_f64(-0.0).unwrap(), Dyadic::zero());
        assert_eq!(Dyadic::from_f64(-6.0).unwrap(), d(-1, 3, 1));
    }

    #[test]
    fn decoding_0_1_by_brute_force() {
        // Independent route: 0.1 = frac * 2^(biased - 1075) read straight off
        // the bit pattern, then stripped of factors of two by division.
        let bits = 0.1f64.to_bits();
        let mut m = (bits & ((1 << 52) - 1)) | (1 << 52);
        let mut e = ((bits >> 52) & 0x7ff) as i64 - 1075;
        while m % 2 == 0 {
            m /= 2;
            e += 1;
        }
        assert_eq!((m, e), (3602879701896397, -55));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Dyadic::from_f64(f64::NAN).is_err());
        assert!(matches!(
            Dyadic::from_f64(f64::INFINITY),
            Err(DyadicError::NonFinite(_))
        ));
    }

    #[test]
    fn arithmetic_examples() {
        assert!((d(1, 1, 0) + d(-1, 1, 0)).is_zero());
        assert_eq!(d(1, 3, -1) * d(1, 3, -1), d(1, 9, -2));
        assert_eq!(d(1, 1, 800) - d(1, 1, 800), Dyadic::zero());
        assert_eq!(d(1, 1, 800) + d(1, 1, -800) - d(1, 1, 800), d(1, 1, -800));
    }

    #[test]
    fn canonical_form_is_structural() {
        assert_eq!(d(1, 12, 0), d(1, 3, 2));
        assert_eq!(d(1, 12, 0).mantissa(), &BigUint::from(3u32));
        assert_eq!(d(0, 5, 7), Dyadic::zero());
    }

    #[test]
    fn ordering() {
        assert!(d(-1, 1, 10) < d(1, 1, -10));
        assert!(d(-1, 3, 0) < d(-1, 1, 0));
        assert!(d(1, 3, 0) > d(1, 5, -1));
        assert_eq!(d(1, 3, 0).cmp(&d(1, 3, 0)), Ordering::Equal);
    }

    #[test]
    fn rounding_ties_to_even_and_overflow() {
        let b64 = FpnParams::binary64();
        // 1 + 2^-53 is a tie between 1 and 1 + 2^-52: rounds to even (1).
        assert_eq!((d(1, 1, 0) + d(1, 1, -53)).to_f64(), 1.0);
        // 1 + 3*2^-53 ties between 1+2^-52 and 1+2^-51: rounds to even.
        assert_eq!(
            (d(1, 1, 0) + d(1, 3, -53)).to_f64(),
            1.0 + f64::EPSILON * 2.0
        );
        // Half of the smallest subnormal ties to zero; three halves to 2 u_S.
        assert_eq!(d(1, 1, -1075).to_f64(), 0.0);
        assert_eq!(d(1, 3, -1075).to_f64(), pow2(-1073));
        // Largest finite plus half an ulp overflows; just below does not.
        let max = Dyadic::from_f64(f64::MAX).unwrap();
        assert_eq!((&max + &d(1, 1, 970)).round_to(&b64), Rounded::Overflow(Sign::Positive));
        assert_eq!((&max + &d(1, 1, 969)).to_f64(), f64::MAX);
        assert_eq!((-(&max + &d(1, 1, 970))).to_f64(), f64::NEG_INFINITY);
    }

    #[test]
    fn next_up_and_down() {
        let b64 = FpnParams::binary64();
        let one = Dyadic::one();
        assert_eq!(one.next_up_in(&b64).unwrap().to_f64(), 1.0 + f64::EPSILON);
        assert_eq!(one.next_down_in(&b64).to_f64(), 1.0 - f64::EPSILON / 2.0);
        assert_eq!(Dyadic::zero().next_up_in(&b64).unwrap().to_f64(), pow2(-1074));
        let min_normal = Dyadic::from_f64(f64::MIN_POSITIVE).unwrap();
        assert_eq!(
            min_normal.next_down_in(&b64).to_f64(),
            f64::MIN_POSITIVE - pow2(-1074)
        );
        let max = Dyadic::from_f64(f64::MAX).unwrap();
        assert!(max.next_up_in(&b64).is_none());
    }

    fn finite_f64() -> impl Strategy<Value = f64> {
        any::<u64>()
            .prop_map(f64::from_bits)
            .prop_filter("finite", |x| x.is_finite())
    }

    proptest! {
        #[test]
        fn from_f64_round_trips(x in finite_f64()) {
            let dx = Dyadic::from_f64(x).unwrap();
            prop_assert_eq!(dx.to_f64_exact().unwrap().to_bits(), (x + 0.0).to_bits());
            prop_assert_eq!(dx.to_f64(), x + 0.0);
        }

        #[test]
        fn rounded_ops_match_hardware(x in finite_f64(), y in finite_f64()) {
            let (dx, dy) = (Dyadic::from_f64(x).unwrap(), Dyadic::from_f64(y).unwrap());
            let agree = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
            prop_assert!(agree((&dx + &dy).to_f64(), x + y));
            prop_assert!(agree((&dx - &dy).to_f64(), x - y));
            prop_assert!(agree((&dx * &dy).to_f64(), x * y));
        }
    }
}
