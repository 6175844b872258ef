use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::round::{round_ratio, RoundingMode};
use super::DyadicReal;
use crate::error::{MpfError, Result};

/// Exact rational `num / den` with `den > 0`. Only used to carry parsed
/// decimal literals, which are generally not dyadic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(MpfError::InvalidArgument("zero denominator".into()));
        }
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        Ok(Rational {
            num: &num / &g,
            den: &den / &g,
        })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn round(&self, mode: RoundingMode) -> Result<f64> {
        round_ratio(&self.num, &self.den, mode)
    }

    /// Exact `self - x`.
    pub fn sub_dyadic(&self, x: &DyadicReal) -> Result<Rational> {
        let (xn, xd) = x.as_ratio();
        Rational::new(&self.num * &xd - xn * &self.den, &self.den * xd)
    }

    pub fn from_dyadic(x: &DyadicReal) -> Rational {
        let (num, den) = x.as_ratio();
        Rational { num, den }
    }
}

/// Parses `[+-]digits[.digits][(e|E)[+-]digits]` exactly.
pub fn parse_decimal(input: &str) -> Result<Rational> {
    let err = |reason: &str| MpfError::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let s = input.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp_part) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], Some(&body[pos + 1..])),
        None => (body, None),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err("unexpected character in mantissa"));
    }
    let mut exp10: i64 = match exp_part {
        Some(e) => {
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("malformed exponent"));
            }
            e.parse().map_err(|_| err("exponent out of range"))?
        }
        None => 0,
    };
    if exp10.abs() > 100_000 {
        return Err(err("exponent out of range"));
    }
    exp10 -= frac_part.len() as i64;
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| err("bad digits"))?;
    if negative {
        num = -num;
    }
    let ten = BigInt::from(10u8);
    let (num, den) = if exp10 >= 0 {
        (num * num_traits::pow(ten, exp10 as usize), BigInt::one())
    } else {
        (num, num_traits::pow(ten, (-exp10) as usize))
    };
    Rational::new(num, den)
}

/// Scientific notation with `digits` significant decimal digits, rounded to
/// nearest (ties to even). Trailing zeros are trimmed.
pub fn to_decimal_string(x: &DyadicReal, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let (num, den) = x.abs().as_ratio();
    let ten = BigInt::from(10u8);

    // Decimal exponent d with 10^d <= |x| < 10^(d+1).
    let bits = num.bits() as i64 - den.bits() as i64;
    let mut d = ((bits as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let ge_pow10 = |k: i64| -> bool {
        if k >= 0 {
            num >= &den * num_traits::pow(ten.clone(), k as usize)
        } else {
            &num * num_traits::pow(ten.clone(), (-k) as usize) >= den
        }
    };
    while !ge_pow10(d) {
        d -= 1;
    }
    while ge_pow10(d + 1) {
        d += 1;
    }

    // n = round(|x| * 10^(digits-1-d))
    let shift = digits as i64 - 1 - d;
    let (sn, sd) = if shift >= 0 {
        (&num * num_traits::pow(ten.clone(), shift as usize), den)
    } else {
        (num, den * num_traits::pow(ten.clone(), (-shift) as usize))
    };
    let (mut n, rem) = sn.div_rem(&sd);
    let twice: BigInt = rem << 1u32;
    if twice > sd || (twice == sd && n.is_odd()) {
        n += 1;
    }
    if n == num_traits::pow(ten.clone(), digits) {
        n /= &ten;
        d += 1;
    }
    let s = n.to_string();
    let (lead, rest) = s.split_at(1);
    let rest = rest.trim_end_matches('0');
    let sign = if x.is_negative() { "-" } else { "" };
    if rest.is_empty() {
        format!("{sign}{lead}e{d}")
    } else {
        format!("{sign}{lead}.{rest}e{d}")
    }
}
