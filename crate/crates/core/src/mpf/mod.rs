//! Double-double, triple-double and quad-double numbers.
//!
//! A `DoubleK` is an unevaluated sum of `K` binary64 components ordered by
//! non-increasing magnitude with `|c[i+1]| <= ulp(c[i])`. `PackedDK` holds four
//! such numbers component-wise, one [`LaneQuad`] per component.
//!
//! Default arithmetic (the operators, and everything in
//! [`crate::linalg`]) uses [`dd_add`]/[`dd_mul`], [`td_add_q`]/[`td_mul`] and
//! [`qd_add`]/[`qd_mul`].

pub mod kernels;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{MpfError, Result};
use crate::oracle::{self, DyadicReal, RoundingMode};
use crate::simd::{lane_ops, LaneQuad, Lanes};

/// The three supported formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    DD,
    TD,
    QD,
}

impl Precision {
    pub const ALL: [Precision; 3] = [Precision::DD, Precision::TD, Precision::QD];

    /// Number of binary64 components.
    pub const fn width(self) -> usize {
        match self {
            Precision::DD => 2,
            Precision::TD => 3,
            Precision::QD => 4,
        }
    }

    /// Unit roundoff used for error budgets: `2^-104`, `2^-157`, `2^-209`.
    pub fn fmt_eps(self) -> f64 {
        match self {
            Precision::DD => 2f64.powi(-104),
            Precision::TD => 2f64.powi(-157),
            Precision::QD => 2f64.powi(-209),
        }
    }

    /// Decimal digits carried by the format, `-log10(fmt_eps)`.
    pub fn decimal_digits(self) -> f64 {
        -self.fmt_eps().log10()
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::DD => "dd",
            Precision::TD => "td",
            Precision::QD => "qd",
        }
    }

    pub fn from_width(width: usize) -> Option<Precision> {
        match width {
            2 => Some(Precision::DD),
            3 => Some(Precision::TD),
            4 => Some(Precision::QD),
            _ => None,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precision {
    type Err = MpfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dd" => Ok(Precision::DD),
            "td" => Ok(Precision::TD),
            "qd" => Ok(Precision::QD),
            _ => Err(MpfError::Parse {
                input: s.to_string(),
                reason: "expected dd, td or qd".into(),
            }),
        }
    }
}

/// A multi-component format usable by the matrix kernels.
///
/// Component arrays are padded to four entries; only the first
/// `PRECISION.width()` are meaningful and the rest stay zero.
pub trait MpFormat: Copy + Default + PartialEq + fmt::Debug + Send + Sync + 'static {
    const PRECISION: Precision;

    fn add_lanes<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4];
    fn mul_lanes<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4];

    #[inline(always)]
    fn sub_lanes<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
        Self::add_lanes(x, kernels::neg(y))
    }

    fn from_padded(c: [f64; 4]) -> Self;
    fn to_padded(self) -> [f64; 4];
    fn components(&self) -> &[f64];
}

/// `|b| <= ulp(a)` for consecutive components, zeros only trailing.
pub fn is_normalized(c: &[f64]) -> bool {
    if c.iter().any(|x| !x.is_finite()) {
        return false;
    }
    c.windows(2).all(|w| {
        if w[0] == 0.0 {
            w[1] == 0.0
        } else {
            w[1].abs() <= ulp(w[0])
        }
    })
}

/// Unit in the last place of a finite nonzero binary64.
pub fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::from_bits(1);
    }
    let exp = ((a.to_bits() >> 52) & 0x7ff) as i32;
    if exp == 0 {
        f64::from_bits(1)
    } else {
        // 2^(exp - 1075), built directly so subnormal ulps are exact.
        let e = exp - 1075;
        if e >= -1022 {
            f64::from_bits(((e + 1023) as u64) << 52)
        } else {
            f64::from_bits(1u64 << (e + 1074))
        }
    }
}

fn decimal_components<const N: usize>(s: &str) -> Result<[f64; N]> {
    let mut rest = oracle::parse_decimal(s)?;
    let mut out = [0.0; N];
    for slot in out.iter_mut() {
        if rest.is_zero() {
            break;
        }
        let c = rest.round(RoundingMode::NearestEven)?;
        rest = rest.sub_dyadic(&DyadicReal::from_f64(c)?)?;
        *slot = c;
    }
    Ok(out)
}

macro_rules! scalar_format {
    (
        $(#[$doc:meta])*
        $name:ident, $packed:ident, $width:literal, $prec:expr,
        add: $add:ident, mul: $mul:ident
    ) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Default, PartialEq)]
        pub struct $name {
            c: [f64; $width],
        }

        impl $name {
            pub const ZERO: $name = $name { c: [0.0; $width] };

            /// Wraps components as given; see [`is_normalized`].
            pub const fn new(c: [f64; $width]) -> Self {
                $name { c }
            }

            pub const fn from_f64(v: f64) -> Self {
                let mut c = [0.0; $width];
                c[0] = v;
                $name { c }
            }

            pub fn c(&self) -> [f64; $width] {
                self.c
            }

            pub fn lead(&self) -> f64 {
                self.c[0]
            }

            pub fn is_normalized(&self) -> bool {
                is_normalized(&self.c)
            }

            /// Exact value of the component sum.
            pub fn to_dyadic(&self) -> Result<DyadicReal> {
                DyadicReal::from_components(&self.c)
            }

            /// Parses a decimal literal, taking each component as the
            /// correctly rounded value of what remains.
            pub fn from_decimal_string(s: &str) -> Result<Self> {
                Ok($name { c: decimal_components::<$width>(s)? })
            }

            /// Scientific notation with `digits` significant digits.
            pub fn to_decimal_string(&self, digits: usize) -> String {
                let exact = self.to_dyadic().expect("finite components");
                oracle::to_decimal_string(&exact, digits)
            }

            pub fn bits_eq(&self, other: &Self) -> bool {
                self.c.iter().zip(other.c.iter()).all(|(a, b)| a.to_bits() == b.to_bits())
            }

            #[inline(always)]
            fn lanes(self) -> [f64; $width] {
                self.c
            }
        }

        impl MpFormat for $name {
            const PRECISION: Precision = $prec;

            #[inline(always)]
            fn add_lanes<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
                pad(kernels::$add(trunc(x), trunc(y)))
            }

            #[inline(always)]
            fn mul_lanes<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
                pad(kernels::$mul(trunc(x), trunc(y)))
            }

            fn from_padded(c: [f64; 4]) -> Self {
                $name { c: trunc(c) }
            }

            fn to_padded(self) -> [f64; 4] {
                pad(self.c)
            }

            fn components(&self) -> &[f64] {
                &self.c
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_tuple(stringify!($name)).field(&self.c).finish()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let digits = f.precision().unwrap_or(16 * $width);
                f.write_str(&self.to_decimal_string(digits))
            }
        }

        impl FromStr for $name {
            type Err = MpfError;
            fn from_str(s: &str) -> Result<Self> {
                Self::from_decimal_string(s)
            }
        }

        impl From<f64> for $name {
            fn from(v: f64) -> Self {
                Self::from_f64(v)
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name { c: kernels::neg(self.c) }
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name { c: kernels::$add(self.lanes(), rhs.lanes()) }
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                self + (-rhs)
            }
        }

        impl Mul for $name {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                $name { c: kernels::$mul(self.lanes(), rhs.lanes()) }
            }
        }

        /// Four numbers stored component-wise.
        #[derive(Clone, Copy, Default, PartialEq)]
        pub struct $packed {
            pub comp: [LaneQuad; $width],
        }

        impl $packed {
            pub fn splat(x: $name) -> Self {
                $packed { comp: x.c.map(LaneQuad::splat) }
            }

            pub fn from_lanes(v: [$name; 4]) -> Self {
                $packed {
                    comp: std::array::from_fn(|k| LaneQuad::from_fn(|l| v[l].c[k])),
                }
            }

            pub fn lane(&self, l: usize) -> $name {
                $name { c: self.comp.map(|q| q.0[l]) }
            }

            pub fn to_lanes(&self) -> [$name; 4] {
                std::array::from_fn(|l| self.lane(l))
            }

            pub fn bits_eq(&self, other: &Self) -> bool {
                self.comp.iter().zip(other.comp.iter()).all(|(a, b)| a.bits_eq(b))
            }

            #[inline(always)]
            fn up<L: Lanes>(self) -> [L; $width] {
                self.comp.map(L::from_quad)
            }

            #[inline(always)]
            fn down<L: Lanes>(v: [L; $width]) -> Self {
                $packed { comp: v.map(|x| x.to_quad()) }
            }
        }

        impl fmt::Debug for $packed {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_list().entries(self.to_lanes().iter()).finish()
            }
        }

        impl Neg for $packed {
            type Output = $packed;
            fn neg(self) -> $packed {
                $packed { comp: self.comp.map(|q| q.neg()) }
            }
        }
    };
}

#[inline(always)]
pub(crate) fn pad<L: Lanes, const N: usize>(c: [L; N]) -> [L; 4] {
    let mut out = [L::splat(0.0); 4];
    out[..N].copy_from_slice(&c);
    out
}

#[inline(always)]
pub(crate) fn trunc<L: Lanes, const N: usize>(c: [L; 4]) -> [L; N] {
    let mut out = [c[0]; N];
    out.copy_from_slice(&c[..N]);
    out
}

scalar_format! {
    /// Double-double: two binary64 components, about 32 decimal digits.
    Double2, PackedD2, 2, Precision::DD, add: dd_add, mul: dd_mul
}

scalar_format! {
    /// Triple-double: three binary64 components, about 48 decimal digits.
    Double3, PackedD3, 3, Precision::TD, add: td_add_q, mul: td_mul
}

scalar_format! {
    /// Quad-double: four binary64 components, about 64 decimal digits.
    Double4, PackedD4, 4, Precision::QD, add: qd_add, mul: qd_mul
}

macro_rules! scalar_ops {
    ($($(#[$doc:meta])* $fname:ident($ty:ident) => $kernel:ident;)*) => {
        $(
            $(#[$doc])*
            pub fn $fname(x: $ty, y: $ty) -> $ty {
                $ty::new(kernels::$kernel(x.lanes(), y.lanes()))
            }
        )*
    };
}

scalar_ops! {
    dd_add(Double2) => dd_add;
    dd_mul(Double2) => dd_mul;
    /// Merge-based triple-double addition.
    td_add_merge(Double3) => td_add_merge;
    /// Default triple-double addition.
    td_add_q(Double3) => td_add_q;
    /// Default triple-double multiplication.
    td_mul(Double3) => td_mul;
    td_mul_q(Double3) => td_mul_q;
    qd_add(Double4) => qd_add;
    qd_mul(Double4) => qd_mul;
}

pub fn dd_sub(x: Double2, y: Double2) -> Double2 {
    x - y
}

pub fn td_sub(x: Double3, y: Double3) -> Double3 {
    x - y
}

pub fn qd_sub(x: Double4, y: Double4) -> Double4 {
    x - y
}

lane_ops! {
    fn dd_add / dd_add_packed(x: PackedD2, y: PackedD2) -> PackedD2 {
        PackedD2::down(kernels::dd_add::<L>(x.up(), y.up()))
    }
    fn dd_mul / dd_mul_packed(x: PackedD2, y: PackedD2) -> PackedD2 {
        PackedD2::down(kernels::dd_mul::<L>(x.up(), y.up()))
    }
    fn dd_sub / dd_sub_packed(x: PackedD2, y: PackedD2) -> PackedD2 {
        PackedD2::down(kernels::dd_add::<L>(x.up(), kernels::neg(y.up())))
    }
    fn td_add_merge / td_add_merge_packed(x: PackedD3, y: PackedD3) -> PackedD3 {
        PackedD3::down(kernels::td_add_merge::<L>(x.up(), y.up()))
    }
    fn td_add_q / td_add_q_packed(x: PackedD3, y: PackedD3) -> PackedD3 {
        PackedD3::down(kernels::td_add_q::<L>(x.up(), y.up()))
    }
    fn td_sub / td_sub_packed(x: PackedD3, y: PackedD3) -> PackedD3 {
        PackedD3::down(kernels::td_add_q::<L>(x.up(), kernels::neg(y.up())))
    }
    fn td_mul / td_mul_packed(x: PackedD3, y: PackedD3) -> PackedD3 {
        PackedD3::down(kernels::td_mul::<L>(x.up(), y.up()))
    }
    fn td_mul_q / td_mul_q_packed(x: PackedD3, y: PackedD3) -> PackedD3 {
        PackedD3::down(kernels::td_mul_q::<L>(x.up(), y.up()))
    }
    fn qd_add / qd_add_packed(x: PackedD4, y: PackedD4) -> PackedD4 {
        PackedD4::down(kernels::qd_add::<L>(x.up(), y.up()))
    }
    fn qd_sub / qd_sub_packed(x: PackedD4, y: PackedD4) -> PackedD4 {
        PackedD4::down(kernels::qd_add::<L>(x.up(), kernels::neg(y.up())))
    }
    fn qd_mul / qd_mul_packed(x: PackedD4, y: PackedD4) -> PackedD4 {
        PackedD4::down(kernels::qd_mul::<L>(x.up(), y.up()))
    }
}

macro_rules! packed_operators {
    ($packed:ident: $add:ident, $sub:ident, $mul:ident) => {
        impl Add for $packed {
            type Output = $packed;
            fn add(self, rhs: $packed) -> $packed {
                $add(self, rhs)
            }
        }
        impl Sub for $packed {
            type Output = $packed;
            fn sub(self, rhs: $packed) -> $packed {
                $sub(self, rhs)
            }
        }
        impl Mul for $packed {
            type Output = $packed;
            fn mul(self, rhs: $packed) -> $packed {
                $mul(self, rhs)
            }
        }
    };
}

packed_operators!(PackedD2: dd_add_packed, dd_sub_packed, dd_mul_packed);
packed_operators!(PackedD3: td_add_q_packed, td_sub_packed, td_mul_packed);
packed_operators!(PackedD4: qd_add_packed, qd_sub_packed, qd_mul_packed);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::o_rel_err;
    use crate::simd::Backend;

    fn p2(k: i32) -> f64 {
        2f64.powi(k)
    }

    #[test]
    fn precision_metadata() {
        assert_eq!(Precision::TD.width(), 3);
        assert_eq!("QD".parse::<Precision>().unwrap(), Precision::QD);
        assert!("xd".parse::<Precision>().is_err());
        assert!((Precision::DD.decimal_digits() - 31.307).abs() < 1e-3);
        assert_eq!(Precision::from_width(4), Some(Precision::QD));
    }

    #[test]
    fn ulp_values() {
        assert_eq!(ulp(1.0), f64::EPSILON);
        assert_eq!(ulp(1.5), f64::EPSILON);
        assert_eq!(ulp(-2.0), 2.0 * f64::EPSILON);
        assert_eq!(ulp(f64::MIN_POSITIVE), f64::from_bits(1));
        assert_eq!(ulp(1e-310), f64::from_bits(1));
    }

    #[test]
    fn normalization_predicate() {
        assert!(is_normalized(&[1.0, p2(-52), 0.0]));
        assert!(!is_normalized(&[1.0, p2(-51)]));
        assert!(!is_normalized(&[0.0, 1.0]));
        assert!(!is_normalized(&[f64::NAN, 0.0]));
    }

    #[test]
    fn conversions() {
        assert_eq!(Double3::from_f64(1.5).c(), [1.5, 0.0, 0.0]);
        let x = Double2::new([1.0, p2(-60)]);
        let d = x.to_dyadic().unwrap();
        assert_eq!(d, DyadicReal::from_components(&[1.0, p2(-60)]).unwrap());
        assert_eq!(Double4::from_f64(0.1).to_dyadic().unwrap(), DyadicReal::from_f64(0.1).unwrap());
    }

    #[test]
    fn decimal_one_tenth() {
        let tenth = oracle::parse_decimal("0.1").unwrap();
        let dd = Double2::from_decimal_string("0.1").unwrap();
        assert!(dd.is_normalized());
        let err = tenth.sub_dyadic(&dd.to_dyadic().unwrap()).unwrap();
        // |err| / (1/10) <= 2^-104  <=>  |err| * 10 * 2^104 <= 1
        let scaled = num_bigint::BigInt::from(10) * (num_bigint::BigInt::from(1) << 104u32);
        let lhs = num_traits::Signed::abs(err.numerator()) * scaled;
        assert!(lhs <= err.denominator().clone());
        let qd: Double4 = "0.1".parse().unwrap();
        assert!(qd.is_normalized());
        assert!(Double3::from_decimal_string("0.1x").is_err());
        assert_eq!(Double3::from_decimal_string("0").unwrap(), Double3::ZERO);
    }

    #[test]
    fn decimal_print_is_accurate() {
        let mut rng = crate::random::MpRng::new(12);
        for _ in 0..200 {
            let x: Double4 = rng.signed_value();
            let s = x.to_string();
            let back: Double4 = s.parse().unwrap();
            let err = o_rel_err(&back.c(), &x.to_dyadic().unwrap()).unwrap();
            assert!(err <= 1e-63, "{s} -> {err:e}");
        }
    }

    #[test]
    fn neg_sub() {
        let x = Double2::new([1.0, -p2(-60)]);
        assert!((-x).bits_eq(&Double2::new([-1.0, p2(-60)])));
        assert_eq!((x - x).c(), [0.0, 0.0]);
        assert_eq!(dd_sub(Double2::from_f64(2.0), Double2::from_f64(1.0)).c(), [1.0, 0.0]);
        let t = Double3::new([1.0, p2(-60), p2(-120)]);
        assert_eq!(td_sub(t, t), Double3::ZERO);
        let q = Double4::new([1.0, p2(-60), p2(-120), p2(-180)]);
        assert_eq!(qd_sub(q, q), Double4::ZERO);
    }

    #[test]
    fn packed_lanes_roundtrip() {
        let v = [1.0, 2.0, 3.0, 4.0].map(|x| Double3::new([x, x * p2(-60), 0.0]));
        let p = PackedD3::from_lanes(v);
        assert_eq!(p.to_lanes(), v);
        for b in Backend::available() {
            let s = b.td_add_q(p, PackedD3::default());
            assert!(s.bits_eq(&p));
            let m = b.td_mul(p, PackedD3::splat(Double3::from_f64(2.0)));
            for (l, x) in v.iter().enumerate() {
                assert_eq!(m.lane(l), *x + *x);
            }
        }
    }
}
