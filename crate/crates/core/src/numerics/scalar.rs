use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Special;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: u32 = 16;

/// Number of significant decimal digits every scalar of a computation carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    digits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            digits: Self::DEFAULT_DIGITS,
        }
    }
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 400;
    pub const MIN_DIGITS: u32 = 16;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidPrecision(digits));
        }
        Ok(PrecisionContext { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary mantissa width backing `digits` decimal digits.
    pub fn bits(&self) -> u32 {
        bits_for_digits(self.digits)
    }

    pub fn zero(&self) -> Scalar {
        Scalar(Float::new(self.bits()))
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }

    pub fn int(&self, v: i64) -> Scalar {
        Scalar(Float::with_val(self.bits(), v))
    }

    /// Exact binary value of `v` (f64 values are dyadic rationals).
    pub fn from_f64(&self, v: f64) -> Scalar {
        Scalar(Float::with_val(self.bits(), v))
    }

    /// `num / den` rounded once at working precision.
    pub fn ratio(&self, num: i64, den: i64) -> Scalar {
        Scalar(Float::with_val(self.bits(), num) / den)
    }

    /// `10^exp` rounded once at working precision.
    pub fn pow10(&self, exp: i32) -> Scalar {
        let ten = Float::with_val(self.bits(), 10);
        Scalar(ten.pow(exp))
    }

    pub fn infinity(&self) -> Scalar {
        Scalar(Float::with_val(self.bits(), Special::Infinity))
    }

    /// Parses a decimal string (plain or scientific notation) at full precision.
    pub fn parse(&self, s: &str) -> Result<Scalar> {
        let trimmed = s.trim();
        let parsed = Float::parse(trimmed).map_err(|_| Error::Parse(s.to_string()))?;
        Ok(Scalar(Float::with_val(self.bits(), parsed)))
    }

    /// Rounds an existing scalar to this context's precision.
    pub fn round(&self, s: &Scalar) -> Scalar {
        Scalar(Float::with_val(self.bits(), &s.0))
    }
}

pub(crate) fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
}

fn digits_for_bits(bits: u32) -> u32 {
    (bits.saturating_sub(GUARD_BITS) as f64 / LOG2_10).floor() as u32
}

/// Arbitrary-precision real number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Scalar(Float);

impl Scalar {
    pub fn from_float(f: Float) -> Self {
        Scalar(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Decimal digits implied by the mantissa width.
    pub fn digits(&self) -> u32 {
        digits_for_bits(self.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Less)
    }

    pub fn cmp0(&self) -> Option<Ordering> {
        self.0.cmp0()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn unary(&self, op: impl FnOnce(Float) -> Float) -> Scalar {
        Scalar(op(self.0.clone()))
    }

    pub fn abs(&self) -> Scalar {
        self.unary(Float::abs)
    }

    pub fn sqrt(&self) -> Scalar {
        self.unary(Float::sqrt)
    }

    pub fn exp(&self) -> Scalar {
        self.unary(Float::exp)
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Scalar {
        self.unary(Float::ln)
    }

    pub fn sinh(&self) -> Scalar {
        self.unary(Float::sinh)
    }

    pub fn cosh(&self) -> Scalar {
        self.unary(Float::cosh)
    }

    pub fn asinh(&self) -> Scalar {
        self.unary(Float::asinh)
    }

    pub fn powi(&self, n: i32) -> Scalar {
        self.unary(|f| f.pow(n))
    }

    /// `self^e` for positive `self`.
    pub fn powf(&self, e: &Scalar) -> Scalar {
        let prec = self.prec().max(e.prec());
        Scalar(Float::with_val(prec, (&self.0).pow(&e.0)))
    }

    pub fn round_to_integer(&self) -> Scalar {
        self.unary(Float::round)
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn min(&self, other: &Scalar) -> Scalar {
        if other < self {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Digits of the rounded value and its decimal exponent `e` with
    /// `value = 0.d1d2... × 10^e`; `None` for zero and non-finite values.
    fn decimal_digits(&self, sig: usize) -> Option<(bool, String, i32)> {
        let (neg, digits, exp) = self.0.to_sign_string_exp(10, Some(sig.max(1)));
        exp.map(|e| (neg, digits, e))
    }

    fn special_str(&self) -> Option<&'static str> {
        if self.0.is_nan() {
            Some("nan")
        } else if self.0.is_infinite() {
            Some(if self.is_negative() { "-inf" } else { "inf" })
        } else if self.is_zero() {
            Some("0")
        } else {
            None
        }
    }

    /// `sig` significant digits; positional notation for magnitudes in
    /// `[1e-4, 1e6)`, scientific otherwise.
    pub fn to_sig_string(&self, sig: usize) -> String {
        if let Some(s) = self.special_str() {
            return s.to_string();
        }
        let (neg, digits, exp) = self.decimal_digits(sig).expect("normal value");
        let sci_exp = exp - 1;
        let mut out = String::with_capacity(digits.len() + 8);
        if neg {
            out.push('-');
        }
        if (-4..=5).contains(&sci_exp) {
            if sci_exp >= 0 {
                let split = (sci_exp + 1) as usize;
                if digits.len() <= split {
                    out.push_str(&digits);
                    out.extend(std::iter::repeat_n('0', split - digits.len()));
                } else {
                    out.push_str(&digits[..split]);
                    out.push('.');
                    out.push_str(&digits[split..]);
                }
            } else {
                out.push_str("0.");
                out.extend(std::iter::repeat_n('0', (-sci_exp - 1) as usize));
                out.push_str(&digits);
            }
        } else {
            push_mantissa(&mut out, &digits);
            push_exponent(&mut out, sci_exp);
        }
        out
    }

    /// Scientific notation with `decimals` digits after the point, C style
    /// (`1.95e-292`, `5.63e+00`).
    pub fn to_sci_string(&self, decimals: usize) -> String {
        if let Some(s) = self.special_str() {
            if s == "0" {
                let mut out = String::from("0");
                if decimals > 0 {
                    out.push('.');
                    out.extend(std::iter::repeat_n('0', decimals));
                }
                out.push_str("e+00");
                return out;
            }
            return s.to_string();
        }
        let (neg, digits, exp) = self.decimal_digits(decimals + 1).expect("normal value");
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        push_mantissa(&mut out, &digits);
        push_exponent(&mut out, exp - 1);
        out
    }

    /// Fixed-point notation with `decimals` digits after the point, rounding
    /// half away from zero.
    pub fn to_fixed_string(&self, decimals: usize) -> String {
        if let Some(s) = self.special_str() {
            if s != "0" {
                return s.to_string();
            }
        }
        let scale = Float::with_val(self.prec().max(64), 10).pow(decimals as u32);
        let scaled = Float::with_val(
            self.prec().max(64),
            Float::with_val(self.prec(), self.0.abs_ref()) * &scale,
        )
        .round();
        let int_digits = match scaled.to_sign_string_exp(10, None) {
            (_, d, Some(e)) => {
                let e = e as usize;
                let mut s: String = d.chars().take(e).collect();
                s.extend(std::iter::repeat_n('0', e.saturating_sub(s.len())));
                s
            }
            _ => String::from("0"),
        };
        let padded = if int_digits.len() <= decimals {
            format!("{}{}", "0".repeat(decimals + 1 - int_digits.len()), int_digits)
        } else {
            int_digits
        };
        let split = padded.len() - decimals;
        let mut out = String::new();
        if self.is_negative() && padded.chars().any(|c| c != '0') {
            out.push('-');
        }
        out.push_str(&padded[..split]);
        if decimals > 0 {
            out.push('.');
            out.push_str(&padded[split..]);
        }
        out
    }

    /// Parses a serialized scalar, inferring the precision from the number of
    /// significant digits present (at least the 16-digit minimum).
    pub fn parse_self_describing(s: &str) -> Result<Scalar> {
        let mantissa = s.split(['e', 'E']).next().unwrap_or("");
        let sig = mantissa
            .chars()
            .filter(char::is_ascii_digit)
            .skip_while(|&c| c == '0')
            .count() as u32;
        PrecisionContext::new(sig.max(PrecisionContext::MIN_DIGITS))?.parse(s)
    }
}

fn push_mantissa(out: &mut String, digits: &str) {
    out.push_str(&digits[..1]);
    if digits.len() > 1 {
        out.push('.');
        out.push_str(&digits[1..]);
    }
}

fn push_exponent(out: &mut String, exp: i32) {
    out.push('e');
    out.push(if exp < 0 { '-' } else { '+' });
    out.push_str(&format!("{:02}", exp.unsigned_abs()));
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_sig_string(p)),
            None => f.write_str(&self.to_sig_string(self.digits() as usize)),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sig_string(20))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scalar::parse_self_describing(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let prec = self.0.prec().max(rhs.0.prec());
                Scalar(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);
binary_op!(Div, div, /);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0.clone())
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(400).unwrap()
    }

    /// Number of matching significant digits between `a` and reference `b`.
    fn agreeing_digits(a: &Scalar, b: &Scalar) -> f64 {
        let diff = (a - b).abs();
        if diff.is_zero() {
            return f64::INFINITY;
        }
        -((diff / b.abs()).ln().to_f64() / std::f64::consts::LN_10)
    }

    #[test]
    fn rejects_low_precision() {
        assert_eq!(PrecisionContext::new(15), Err(Error::InvalidPrecision(15)));
        assert!(PrecisionContext::new(16).is_ok());
        assert_eq!(PrecisionContext::default().digits(), 400);
    }

    #[test]
    fn sqrt_squares_back() {
        let c = ctx();
        for s in ["2", "3", "0.02", "1e-300"] {
            let v = c.parse(s).unwrap();
            let r = v.sqrt();
            assert!(agreeing_digits(&(&r * &r), &v) >= 396.0, "{s}");
        }
    }

    #[test]
    fn sqrt_two_digits() {
        let c = ctx();
        let r = c.int(2).sqrt();
        assert!(r.to_sig_string(12).starts_with("1.41421356237"));
    }

    #[test]
    fn elementary_inverse_pairs() {
        let c = ctx();
        for i in -20..=20 {
            let t = c.ratio(i, 2);
            if t.is_zero() {
                continue;
            }
            assert!(agreeing_digits(&t.sinh().asinh(), &t) >= 394.0, "asinh(sinh({i}/2))");
            assert!(agreeing_digits(&t.exp().ln(), &t) >= 394.0, "ln(exp({i}/2))");
        }
    }

    #[test]
    fn sig_string_layouts() {
        let c = PrecisionContext::new(20).unwrap();
        assert_eq!(c.parse("6").unwrap().to_sig_string(7), "6.000000");
        assert_eq!(c.parse("-2.5").unwrap().to_sig_string(3), "-2.50");
        assert_eq!(c.parse("0.00012345").unwrap().to_sig_string(3), "0.000123");
        assert_eq!(c.parse("1.95e-292").unwrap().to_sig_string(3), "1.95e-292");
        assert_eq!(c.parse("1234567").unwrap().to_sig_string(3), "1.23e+06");
        assert_eq!(c.parse("123456").unwrap().to_sig_string(3), "123000");
        assert_eq!(c.zero().to_sig_string(5), "0");
        assert_eq!(c.infinity().to_sig_string(5), "inf");
    }

    #[test]
    fn sci_and_fixed_layouts() {
        let c = ctx();
        assert_eq!(c.parse("5.6345").unwrap().to_sci_string(2), "5.63e+00");
        assert_eq!(c.parse("1.9549e-292").unwrap().to_sci_string(2), "1.95e-292");
        assert_eq!(c.parse("6").unwrap().to_fixed_string(6), "6.000000");
        assert_eq!(c.parse("-2.8934439858").unwrap().to_fixed_string(6), "-2.893444");
        assert_eq!(c.parse("0.9999996").unwrap().to_fixed_string(6), "1.000000");
        assert_eq!(c.parse("-0.0000001").unwrap().to_fixed_string(6), "0.000000");
        assert_eq!(c.parse("0.00000051").unwrap().to_fixed_string(6), "0.000001");
        assert_eq!(c.zero().to_fixed_string(6), "0.000000");
    }

    #[test]
    fn full_precision_string_round_trip() {
        let c = ctx();
        let v = c.ratio(3, 8).asinh();
        let s = v.to_string();
        let back = Scalar::parse_self_describing(&s).unwrap();
        assert_eq!(back.to_string(), s);
        assert!(s.starts_with("0.3667246042301367654909"));
        let tiny = c.parse("1.95e-292").unwrap() / c.int(7);
        let s = tiny.to_string();
        assert!(s.contains("e-293"));
        assert_eq!(Scalar::parse_self_describing(&s).unwrap().to_string(), s);
    }

    #[test]
    fn arithmetic_is_deterministic() {
        let c = ctx();
        let a = c.ratio(1, 3).exp();
        let b = c.ratio(2, 7).sinh();
        assert_eq!((&a * &b + &a / &b).as_float(), (&a * &b + &a / &b).as_float());
        assert!(c.zero().is_zero());
    }
}
