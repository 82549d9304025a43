use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::DeriveError;
use crate::fpn::{Dyadic, FpnParams};

/// A polynomial in ε without constant term.
///
/// `coeffs[k]` is the coefficient of `ε^(k+1)`; trailing zeros are trimmed,
/// so the zero polynomial has no coefficients at all.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct EpsPoly {
    coeffs: Vec<BigInt>,
}

impl EpsPoly {
    pub fn zero() -> EpsPoly {
        EpsPoly::default()
    }

    /// The polynomial `ε`.
    pub fn epsilon() -> EpsPoly {
        EpsPoly::from_coeffs([1])
    }

    pub fn from_coeffs<T: Into<BigInt>>(coeffs: impl IntoIterator<Item = T>) -> EpsPoly {
        let mut p = EpsPoly {
            coeffs: coeffs.into_iter().map(Into::into).collect(),
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of ε with a nonzero coefficient, 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &EpsPoly) -> EpsPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        EpsPoly::from_coeffs((0..n).map(|k| self.coeff(k) + other.coeff(k)))
    }

    pub fn mul(&self, other: &EpsPoly) -> EpsPoly {
        if self.is_zero() || other.is_zero() {
            return EpsPoly::zero();
        }
        // ε^(i+1) · ε^(j+1) = ε^(i+j+2), stored at index i+j+1.
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j + 1] += a * b;
            }
        }
        EpsPoly::from_coeffs(out)
    }

    /// `(1 + ε) · self`.
    pub fn mul_one_plus_eps(&self) -> EpsPoly {
        let n = self.coeffs.len() + 1;
        EpsPoly::from_coeffs((0..n).map(|k| {
            let lower = if k == 0 {
                BigInt::zero()
            } else {
                self.coeff(k - 1)
            };
            self.coeff(k) + lower
        }))
    }

    /// `self + ε`.
    pub fn plus_eps(&self) -> EpsPoly {
        self.add(&EpsPoly::epsilon())
    }

    /// Exact value at `ε = 2^-p`.
    pub fn eval_at(&self, params: &FpnParams) -> Dyadic {
        let p = params.precision() as i64;
        self.coeffs
            .iter()
            .enumerate()
            .fold(Dyadic::zero(), |acc, (k, c)| {
                acc + Dyadic::from_bigint(c).mul_pow2(-p * (k as i64 + 1))
            })
    }

    /// Checks that every coefficient is below `ε^-1` in magnitude, which is
    /// what makes lexicographic comparison agree with comparison at ε.
    pub fn check_small(&self, params: &FpnParams) -> Result<(), DeriveError> {
        let limit = BigInt::one() << params.precision();
        match self.coeffs.iter().find(|c| c.abs() >= limit) {
            Some(c) => Err(DeriveError::CoefficientTooLarge {
                coefficient: c.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Compares values at ε lexicographically, linear term first. Only
    /// sound when every coefficient is below `ε^-1`; errors otherwise.
    pub fn cmp_lexicographic(&self, other: &EpsPoly, params: &FpnParams) -> Result<Ordering, DeriveError> {
        self.check_small(params)?;
        other.check_small(params)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok((0..n)
            .map(|k| self.coeff(k).cmp(&other.coeff(k)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal))
    }

    /// Exact comparison of the values at ε.
    pub fn cmp_at_eps(&self, other: &EpsPoly, params: &FpnParams) -> Ordering {
        self.eval_at(params).cmp(&other.eval_at(params))
    }

    /// The larger polynomial at ε, chosen lexicographically when that is
    /// sound and by exact evaluation otherwise. Deep products push
    /// higher-order coefficients past `ε^-1`, so the fallback is needed
    /// for real predicates.
    pub fn max(a1: &EpsPoly, a2: &EpsPoly, params: &FpnParams) -> EpsPoly {
        let ord = a1
            .cmp_lexicographic(a2, params)
            .unwrap_or_else(|_| a1.cmp_at_eps(a2, params));
        match ord {
            Ordering::Less => a2.clone(),
            _ => a1.clone(),
        }
    }

    /// Strict variant of [`EpsPoly::max`] that refuses coefficients at or
    /// above `ε^-1`.
    pub fn max_lexicographic(a1: &EpsPoly, a2: &EpsPoly, params: &FpnParams) -> Result<EpsPoly, DeriveError> {
        Ok(match a1.cmp_lexicographic(a2, params)? {
            Ordering::Less => a2.clone(),
            _ => a1.clone(),
        })
    }

    /// `(1+ε)·max(a1, a2) + ε`, the static part of a rounded sum.
    pub fn combine_sum(a1: &EpsPoly, a2: &EpsPoly, params: &FpnParams) -> EpsPoly {
        EpsPoly::max(a1, a2, params).mul_one_plus_eps().plus_eps()
    }

    /// `(1+ε)·(a1 + a2 + a1·a2) + ε`, the static part of a rounded product.
    pub fn combine_product(a1: &EpsPoly, a2: &EpsPoly) -> EpsPoly {
        a1.add(a2).add(&a1.mul(a2)).mul_one_plus_eps().plus_eps()
    }
}

impl fmt::Display for EpsPoly {
    /// Prints e.g. `3ε - 94906250ε^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            if !mag.is_one() {
                write!(f, "{mag}")?;
            }
            f.write_str("ε")?;
            if k > 0 {
                write!(f, "^{}", k + 1)?;
            }
        }
        Ok(())
    }
}
