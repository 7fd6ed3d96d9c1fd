//! Configurable-precision reals, sampling grids and sup-norm helpers.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::{Assign, Float};
use std::cmp::Ordering;

/// Real scalar with a configurable mantissa width, rounded to nearest.
pub type BigReal = Float;

/// Smallest accepted mantissa width.
pub const MIN_BITS: u32 = 53;
/// Width used when a configuration does not name one.
pub const DEFAULT_BITS: u32 = 256;
/// Extra bits carried by orbit positions beyond the nominal width.
pub const GUARD_BITS: u32 = 32;

/// A mantissa width together with the constants derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { bits: DEFAULT_BITS }
    }
}

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_BITS {
            return Err(Error::PrecisionTooLow {
                bits,
                min: MIN_BITS,
            });
        }
        Ok(Precision { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Width used for orbit positions and derivative products.
    pub fn working_bits(self) -> u32 {
        self.bits + GUARD_BITS
    }

    /// u = 2^(1-B).
    pub fn unit_roundoff(self) -> BigReal {
        Float::with_val(self.bits, 1) >> (self.bits - 1)
    }

    /// u as a binary64 value; only meaningful for logging and tolerances.
    pub fn unit_roundoff_f64(self) -> f64 {
        2f64.powi(1 - self.bits as i32)
    }

    pub fn real(self, text: &str) -> Result<BigReal> {
        make_real(text, self.bits)
    }

    pub fn zero(self) -> BigReal {
        Float::new(self.bits)
    }

    pub fn one(self) -> BigReal {
        Float::with_val(self.bits, 1)
    }

    pub fn int(self, v: i64) -> BigReal {
        Float::with_val(self.bits, v)
    }

    pub fn from_f64(self, v: f64) -> BigReal {
        Float::with_val(self.bits, v)
    }

    pub fn pi(self) -> BigReal {
        Float::with_val(self.bits, Constant::Pi)
    }

    /// Multiples of u, the form every roundoff tolerance takes.
    pub fn ulps(self, k: f64) -> BigReal {
        self.unit_roundoff() * k
    }
}

/// Accepts `[+-]digits[.digits][(e|E)[+-]digits]` with at least one digit in the mantissa.
fn is_signed_decimal(text: &str) -> bool {
    let b = text.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let mut digits = 0;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
        digits += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return false;
        }
    }
    i == b.len()
}

/// Parses a signed decimal string and rounds it correctly to `bits` bits.
pub fn make_real(text: &str, bits: u32) -> Result<BigReal> {
    if bits < MIN_BITS {
        return Err(Error::PrecisionTooLow {
            bits,
            min: MIN_BITS,
        });
    }
    let trimmed = text.trim();
    if !is_signed_decimal(trimmed) {
        return Err(Error::Parse(text.to_string()));
    }
    let parsed = Float::parse(trimmed).map_err(|_| Error::Parse(text.to_string()))?;
    let value = parsed.complete(bits);
    check_finite(&value, "make_real")?;
    Ok(value)
}

pub fn check_finite(x: &BigReal, context: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}

/// Total order on finite values.
pub fn cmp(a: &BigReal, b: &BigReal) -> Ordering {
    a.total_cmp(b)
}

pub fn max_of<'a>(a: &'a BigReal, b: &'a BigReal) -> &'a BigReal {
    if a.total_cmp(b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// max_i |u_i - v_i|.
pub fn sup_norm_diff(u: &[BigReal], v: &[BigReal]) -> Result<BigReal> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    if u.is_empty() {
        return Err(Error::Empty);
    }
    let bits = u
        .iter()
        .chain(v.iter())
        .map(|x| x.prec())
        .max()
        .unwrap_or(DEFAULT_BITS);
    let mut best = Float::new(bits);
    let mut d = Float::new(bits);
    for (a, b) in u.iter().zip(v) {
        d.assign(a - b);
        d.abs_mut();
        check_finite(&d, "sup_norm_diff")?;
        if d > best {
            best.assign(&d);
        }
    }
    Ok(best)
}

/// max_i |u_i|.
pub fn sup_norm(u: &[BigReal]) -> Result<BigReal> {
    if u.is_empty() {
        return Err(Error::Empty);
    }
    let mut best = Float::new(u[0].prec());
    for a in u {
        check_finite(a, "sup_norm")?;
        if a.cmp_abs(&best) == Some(Ordering::Greater) {
            best = Float::with_val(best.prec(), a.abs_ref());
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridScheme {
    Uniform,
    /// Cosine spacing, denser near both ends.
    EndpointRefined,
}

/// Strictly increasing sample points covering [lo, hi].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    lo: BigReal,
    hi: BigReal,
    points: Vec<BigReal>,
    scheme: GridScheme,
}

impl Grid {
    pub fn new(lo: &BigReal, hi: &BigReal, count: usize, scheme: GridScheme) -> Result<Self> {
        if count < 2 {
            return Err(Error::Invalid(format!(
                "a grid needs at least 2 points, got {count}"
            )));
        }
        if lo >= hi {
            return Err(Error::Invalid("grid interval is empty".into()));
        }
        let bits = lo.prec().max(hi.prec());
        let width = Float::with_val(bits, hi - lo);
        let last = (count - 1) as u32;
        let pi = Float::with_val(bits, Constant::Pi);
        let mut points = Vec::with_capacity(count);
        points.push(Float::with_val(bits, lo));
        for k in 1..last {
            let t = match scheme {
                GridScheme::Uniform => Float::with_val(bits, k) / last,
                GridScheme::EndpointRefined => {
                    let angle = Float::with_val(bits, &pi * k) / last;
                    (1 - angle.cos()) / 2u32
                }
            };
            points.push(Float::with_val(
                bits,
                lo + Float::with_val(bits, &width * &t),
            ));
        }
        points.push(Float::with_val(bits, hi));
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::PrecisionExhausted(
                "grid points are not strictly increasing".into(),
            ));
        }
        Ok(Grid {
            lo: Float::with_val(bits, lo),
            hi: Float::with_val(bits, hi),
            points,
            scheme,
        })
    }

    pub fn uniform(lo: &BigReal, hi: &BigReal, count: usize) -> Result<Self> {
        Grid::new(lo, hi, count, GridScheme::Uniform)
    }

    /// The default norm grid on [-1, 0].
    pub fn unit_left(prec: Precision, count: usize) -> Result<Self> {
        Grid::uniform(&prec.int(-1), &prec.zero(), count)
    }

    pub fn lo(&self) -> &BigReal {
        &self.lo
    }

    pub fn hi(&self) -> &BigReal {
        &self.hi
    }

    pub fn points(&self) -> &[BigReal] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }
}

/// Shortest decimal string that parses back to exactly `x` at its own precision.
pub fn to_decimal(x: &BigReal) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let bits = x.prec();
    let mut lo = 1usize;
    let mut hi = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let round_trips = |digits: usize| {
        let s = x.to_string_radix(10, Some(digits));
        match Float::parse(&s) {
            Ok(p) => p.complete(bits) == *x,
            Err(_) => false,
        }
    };
    while lo < hi {
        let mid = (lo + hi) / 2;
        if round_trips(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    x.to_string_radix(10, Some(lo))
}

/// Fixed number of significant decimal digits, as used in CSV output.
pub fn to_sig_digits(x: &BigReal, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix(10, Some(digits))
}

/// Bits needed to run to level n: n·log2(1/λ*) + log2(q_n) + 64.
pub fn required_bits(n: u32, contraction: f64, q_n: f64) -> u32 {
    let shrink = if contraction > 0.0 && contraction < 1.0 {
        n as f64 * (1.0 / contraction).log2()
    } else {
        0.0
    };
    (shrink + q_n.max(1.0).log2() + 64.0).ceil() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_syntax() {
        for ok in ["0", "-1.5", "+.5", "2.", "1e-3", "3.25E+2"] {
            assert!(is_signed_decimal(ok), "{ok}");
        }
        for bad in [
            "", ".", "e5", "1e", "nan", "inf", "0x10", "1.2.3", "1 2", "--1",
        ] {
            assert!(!is_signed_decimal(bad), "{bad}");
        }
    }

    #[test]
    fn dyadic_values_are_exact() {
        assert_eq!(make_real("0.5", 64).unwrap(), 0.5);
        assert_eq!(make_real("1.0", 256).unwrap(), 1);
        assert!(make_real("1", 52).is_err());
        assert!(make_real("abc", 64).is_err());
    }

    #[test]
    fn unit_roundoff_value() {
        let p = Precision::new(64).unwrap();
        assert_eq!(p.unit_roundoff(), (Float::with_val(64, 1u32) >> 63u32));
        assert_eq!(p.unit_roundoff_f64(), 2f64.powi(-63));
    }

    #[test]
    fn norms() {
        let p = Precision::default();
        let u = vec![p.int(0), p.int(1)];
        let v = vec![p.int(1), p.int(1)];
        assert_eq!(sup_norm_diff(&u, &u).unwrap(), 0);
        assert_eq!(sup_norm_diff(&u, &v).unwrap(), 1);
        assert!(matches!(
            sup_norm_diff(&u, &v[..1]),
            Err(Error::LengthMismatch(2, 1))
        ));
        assert!(matches!(sup_norm_diff(&[], &[]), Err(Error::Empty)));
        assert_eq!(sup_norm(&[p.int(-3), p.int(2)]).unwrap(), 3);
    }

    #[test]
    fn grids() {
        let p = Precision::default();
        let g = Grid::unit_left(p, 257).unwrap();
        assert_eq!(g.len(), 257);
        assert_eq!(g.points()[0], -1);
        assert_eq!(g.points()[256], 0);
        assert_eq!(g.points()[128], -0.5);
        let r = Grid::new(&p.int(0), &p.int(1), 33, GridScheme::EndpointRefined).unwrap();
        assert!(r.points().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            r,
            Grid::new(&p.int(0), &p.int(1), 33, GridScheme::EndpointRefined).unwrap()
        );
        assert!(Grid::uniform(&p.int(0), &p.int(0), 5).is_err());
    }

    #[test]
    fn shortest_decimal_round_trips() {
        assert_eq!(to_decimal(&make_real("0.25", 256).unwrap()), "2.5e-1");
        let third = Float::with_val(256, 1) / 3u32;
        let s = to_decimal(&third);
        assert_eq!(make_real(&s, 256).unwrap(), third);
        assert!(s.len() <= 82);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(required_bits(0, 0.5, 1.0), 64);
        assert_eq!(required_bits(10, 0.5, 1024.0), 84);
    }
}
