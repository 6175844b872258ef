use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{MpfError, Result};

/// Rounding rule used when converting an exact value to binary64.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundingMode {
    NearestEven,
    /// Toward larger magnitude. Used for error estimates that must not
    /// understate.
    AwayFromZero,
}

/// Rounds `num / den` to binary64. `den` must be positive.
pub(crate) fn round_ratio(num: &BigInt, den: &BigInt, mode: RoundingMode) -> Result<f64> {
    debug_assert!(den.is_positive());
    if num.is_zero() {
        return Ok(0.0);
    }
    let negative = num.is_negative();
    let mag = num.abs();

    // Exponent of the leading bit: 2^top <= mag/den < 2^(top+1).
    let mut top = mag.bits() as i64 - den.bits() as i64;
    if !ge_pow2(&mag, den, top) {
        top -= 1;
    }
    if top > 1023 {
        return Err(overflow());
    }
    let quantum = (top - 52).max(-1074);

    // m = floor(mag / (den * 2^quantum)), rem carries the discarded part.
    let (scaled_num, scaled_den) = if quantum >= 0 {
        (mag, den << (quantum as u64))
    } else {
        (mag << ((-quantum) as u64), den.clone())
    };
    let (mut m, rem) = scaled_num.div_rem(&scaled_den);
    let round_up = match mode {
        RoundingMode::NearestEven => {
            let twice: BigInt = &rem << 1u32;
            match twice.cmp(&scaled_den) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => m.is_odd(),
                std::cmp::Ordering::Less => false,
            }
        }
        RoundingMode::AwayFromZero => !rem.is_zero(),
    };
    if round_up {
        m += BigInt::one();
    }
    let m = m.to_u64().expect("rounded significand fits in 54 bits");
    let bits = compose(m, quantum)?;
    let v = f64::from_bits(bits);
    Ok(if negative { -v } else { v })
}

// mag/den >= 2^k
fn ge_pow2(mag: &BigInt, den: &BigInt, k: i64) -> bool {
    if k >= 0 {
        mag >= &(den << (k as u64))
    } else {
        &(mag << ((-k) as u64)) >= den
    }
}

/// Bit pattern of `m * 2^q` where `m <= 2^53` and `q >= -1074`.
fn compose(mut m: u64, mut q: i64) -> Result<u64> {
    if m == 1u64 << 53 {
        m >>= 1;
        q += 1;
    }
    if m >= 1u64 << 52 {
        let biased = q + 1075;
        if biased >= 2047 {
            return Err(overflow());
        }
        Ok(((biased as u64) << 52) | (m - (1u64 << 52)))
    } else {
        debug_assert_eq!(q, -1074);
        Ok(m)
    }
}

fn overflow() -> MpfError {
    MpfError::Range("magnitude exceeds the binary64 range".into())
}
