//! Exact dyadic-rational arithmetic.
//!
//! Every finite binary64 value is a dyadic rational `m * 2^e`, and the set of
//! dyadic rationals is closed under addition and multiplication. That makes
//! [`DyadicReal`] an exact reference for anything built from binary64 adds and
//! multiplies: error-free transformation identities become equality tests, and
//! error bounds are measured with no reference rounding error at all.

mod decimal;
mod matrix;
mod round;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, Zero};

use crate::error::{MpfError, Result};

pub use decimal::{parse_decimal, to_decimal_string, Rational};
pub use matrix::{digit_loss, digits_lost, max_rel_err, o_matmul, DyadicMatrix, DEFAULT_MATMUL_GUARD};
pub use round::RoundingMode;

/// Operations refuse to build significands wider than this.
pub const MAX_SIGNIFICAND_BITS: u64 = 1_000_000;

/// An exact value `significand * 2^exponent`.
///
/// Canonical form: the significand is odd, or zero with exponent 0. Equality
/// and hashing are therefore value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicReal {
    significand: BigInt,
    exponent: i64,
}

impl DyadicReal {
    pub fn zero() -> Self {
        DyadicReal {
            significand: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn new(significand: BigInt, exponent: i64) -> Self {
        if significand.is_zero() {
            return Self::zero();
        }
        let tz = significand.trailing_zeros().unwrap_or(0);
        DyadicReal {
            significand: significand >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    /// Exact conversion; NaN and infinities are rejected.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(MpfError::InvalidArgument(format!(
                "non-finite value {x} has no dyadic representation"
            )));
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut sig = BigInt::from(mant);
        if x.is_sign_negative() {
            sig = -sig;
        }
        Ok(Self::new(sig, exp))
    }

    /// Exact sum of a sequence of binary64 components.
    pub fn from_components(c: &[f64]) -> Result<Self> {
        let mut acc = Self::zero();
        for &x in c {
            acc = acc.checked_add(&Self::from_f64(x)?)?;
        }
        Ok(acc)
    }

    pub fn significand(&self) -> &BigInt {
        &self.significand
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.significand.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.significand.sign() == Sign::Minus
    }

    /// Bit length of the significand magnitude.
    pub fn significand_bits(&self) -> u64 {
        self.significand.bits()
    }

    pub fn abs(&self) -> Self {
        DyadicReal {
            significand: self.significand.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        DyadicReal {
            significand: self.significand.clone(),
            exponent: self.exponent + k,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let (lo, hi) = if self.exponent <= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        let shift = (hi.exponent - lo.exponent) as u64;
        if hi.significand.bits() + shift > MAX_SIGNIFICAND_BITS {
            return Err(growth_error());
        }
        let sum = &lo.significand + (&hi.significand << shift);
        Ok(Self::new(sum, lo.exponent))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        if self.significand.bits() + other.significand.bits() > MAX_SIGNIFICAND_BITS {
            return Err(growth_error());
        }
        // Product of two odd significands is odd: already canonical.
        Ok(DyadicReal {
            significand: &self.significand * &other.significand,
            exponent: self.exponent + other.exponent,
        })
    }

    /// Correctly rounded (ties-to-even) conversion to binary64.
    pub fn to_f64(&self) -> Result<f64> {
        self.round(RoundingMode::NearestEven)
    }

    pub fn round(&self, mode: RoundingMode) -> Result<f64> {
        let (num, den) = self.as_ratio();
        round::round_ratio(&num, &den, mode)
    }

    /// The value as `numerator / denominator` with a positive power-of-two
    /// denominator.
    pub(crate) fn as_ratio(&self) -> (BigInt, BigInt) {
        if self.exponent >= 0 {
            (
                &self.significand << (self.exponent as u64),
                BigInt::from(1u8),
            )
        } else {
            (
                self.significand.clone(),
                BigInt::from(1u8) << ((-self.exponent) as u64),
            )
        }
    }
}

fn growth_error() -> MpfError {
    MpfError::Range(format!(
        "dyadic significand would exceed {MAX_SIGNIFICAND_BITS} bits"
    ))
}

impl Default for DyadicReal {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for DyadicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.significand, self.exponent)
    }
}

impl fmt::Display for DyadicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(40);
        f.write_str(&to_decimal_string(self, digits))
    }
}

impl Ord for DyadicReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self
            .checked_sub(other)
            .expect("comparison operands exceed the significand guard");
        match diff.significand.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl PartialOrd for DyadicReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for DyadicReal {
    fn from(v: i64) -> Self {
        Self::from_i64(v)
    }
}

impl Neg for DyadicReal {
    type Output = DyadicReal;
    fn neg(self) -> DyadicReal {
        DyadicReal {
            significand: -self.significand,
            exponent: self.exponent,
        }
    }
}

impl Neg for &DyadicReal {
    type Output = DyadicReal;
    fn neg(self) -> DyadicReal {
        -(self.clone())
    }
}

// Operator forms panic when the significand guard trips; use the
// `checked_*` methods to handle that case.
macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&DyadicReal> for &DyadicReal {
            type Output = DyadicReal;
            fn $method(self, rhs: &DyadicReal) -> DyadicReal {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<DyadicReal> for DyadicReal {
            type Output = DyadicReal;
            fn $method(self, rhs: DyadicReal) -> DyadicReal {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&DyadicReal> for DyadicReal {
            type Output = DyadicReal;
            fn $method(self, rhs: &DyadicReal) -> DyadicReal {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

/// Exact `a + b`.
pub fn o_add(a: &DyadicReal, b: &DyadicReal) -> DyadicReal {
    a + b
}

/// Exact `a * b`.
pub fn o_mul(a: &DyadicReal, b: &DyadicReal) -> DyadicReal {
    a * b
}

pub fn o_neg(a: &DyadicReal) -> DyadicReal {
    -a
}

pub fn o_from_components(c: &[f64]) -> Result<DyadicReal> {
    DyadicReal::from_components(c)
}

pub fn o_round_to_binary64(x: &DyadicReal) -> Result<f64> {
    x.to_f64()
}

/// `|sum(approx) - exact| / |exact|`, rounded upward to binary64.
///
/// Returns 0 when both sides are zero and
/// [`MpfError::AbsoluteErrorRequired`] when only `exact` is zero.
pub fn o_rel_err(approx: &[f64], exact: &DyadicReal) -> Result<f64> {
    let approx = DyadicReal::from_components(approx)?;
    let diff = approx.checked_sub(exact)?.abs();
    if exact.is_zero() {
        return if diff.is_zero() {
            Ok(0.0)
        } else {
            Err(MpfError::AbsoluteErrorRequired)
        };
    }
    if diff.is_zero() {
        return Ok(0.0);
    }
    let (dn, dd) = diff.as_ratio();
    let (xn, xd) = exact.abs().as_ratio();
    round::round_ratio(&(dn * xd), &(dd * xn), RoundingMode::AwayFromZero)
}

/// `|sum(approx) - exact|`, rounded upward to binary64.
pub fn o_abs_err(approx: &[f64], exact: &DyadicReal) -> Result<f64> {
    let approx = DyadicReal::from_components(approx)?;
    approx
        .checked_sub(exact)?
        .abs()
        .round(RoundingMode::AwayFromZero)
}
