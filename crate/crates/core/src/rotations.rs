//! Continued-fraction combinatorics of rotation numbers.

use crate::error::{Error, Result};
use crate::numerics::{make_real, BigReal, MIN_BITS};
use rug::float::Round;
use rug::{Float, Integer};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;

/// Partial quotients k_1..k_N with their convergents p_n/q_n.
///
/// Convergents are stored from n = -1, so `p(-1) = 1`, `q(-1) = 0`, `p(0) = 0`, `q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationTarget {
    quotients: Vec<u64>,
    p: Vec<Integer>,
    q: Vec<Integer>,
}

/// Builds the convergents of the given partial quotients.
pub fn build_target(quotients: &[i64]) -> Result<RotationTarget> {
    let mut ks = Vec::with_capacity(quotients.len());
    for (index, &k) in quotients.iter().enumerate() {
        if k < 1 {
            return Err(Error::NonPositiveQuotient { index: index + 1 });
        }
        ks.push(k as u64);
    }
    Ok(RotationTarget::from_positive(ks))
}

impl RotationTarget {
    fn from_positive(quotients: Vec<u64>) -> Self {
        let mut p = vec![Integer::from(1), Integer::from(0)];
        let mut q = vec![Integer::from(0), Integer::from(1)];
        for &k in &quotients {
            let m = p.len();
            let pn = Integer::from(&p[m - 1] * k) + &p[m - 2];
            let qn = Integer::from(&q[m - 1] * k) + &q[m - 2];
            p.push(pn);
            q.push(qn);
        }
        RotationTarget { quotients, p, q }
    }

    /// The first `depth` quotients of the periodic sequence `period, period, ...`.
    pub fn periodic(period: &[u64], depth: usize) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = period.iter().position(|&k| k == 0) {
            return Err(Error::NonPositiveQuotient { index: i + 1 });
        }
        Ok(Self::from_positive(
            period.iter().copied().cycle().take(depth).collect(),
        ))
    }

    pub fn golden(depth: usize) -> Self {
        Self::from_positive(vec![1; depth])
    }

    pub fn silver(depth: usize) -> Self {
        Self::from_positive(vec![2; depth])
    }

    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }

    /// k_n for 1 ≤ n ≤ N.
    pub fn quotient(&self, n: usize) -> Option<u64> {
        if n == 0 {
            None
        } else {
            self.quotients.get(n - 1).copied()
        }
    }

    fn slot(&self, n: i64) -> Option<usize> {
        let idx = n + 1;
        if idx < 0 || idx as usize >= self.p.len() {
            None
        } else {
            Some(idx as usize)
        }
    }

    /// p_n for -1 ≤ n ≤ N.
    pub fn p(&self, n: i64) -> Option<&Integer> {
        self.slot(n).map(|i| &self.p[i])
    }

    /// q_n for -1 ≤ n ≤ N.
    pub fn q(&self, n: i64) -> Option<&Integer> {
        self.slot(n).map(|i| &self.q[i])
    }

    /// q_n as an orbit index.
    pub fn q_index(&self, n: i64) -> Result<usize> {
        let q = self
            .q(n)
            .ok_or_else(|| Error::Invalid(format!("level {n} beyond depth {}", self.depth())))?;
        q.to_usize()
            .ok_or_else(|| Error::Overflow(format!("q_{n} = {q}")))
    }

    /// p_n as a winding number.
    pub fn p_winding(&self, n: i64) -> Result<i64> {
        let p = self
            .p(n)
            .ok_or_else(|| Error::Invalid(format!("level {n} beyond depth {}", self.depth())))?;
        p.to_i64()
            .ok_or_else(|| Error::Overflow(format!("p_{n} = {p}")))
    }

    /// The target cut to its first `n` quotients.
    pub fn prefix(&self, n: usize) -> Self {
        Self::from_positive(self.quotients[..n.min(self.depth())].to_vec())
    }

    /// p_N/q_N rounded to `bits` bits.
    pub fn value(&self, bits: u32) -> Result<BigReal> {
        if self.depth() == 0 {
            return Err(Error::Empty);
        }
        if bits < MIN_BITS {
            return Err(Error::PrecisionTooLow {
                bits,
                min: MIN_BITS,
            });
        }
        let n = self.depth() as i64;
        let ratio = rug::Rational::from((self.p(n).unwrap().clone(), self.q(n).unwrap().clone()));
        Ok(Float::with_val(bits, &ratio))
    }

    /// Largest quotient, the finite-depth surrogate of the type bound.
    pub fn type_bound(&self) -> Result<u64> {
        self.quotients.iter().copied().max().ok_or(Error::Empty)
    }

    /// Largest k_n over odd n.
    pub fn odd_index_max(&self) -> Option<u64> {
        self.quotients.iter().step_by(2).copied().max()
    }

    /// Largest k_n over even n.
    pub fn even_index_max(&self) -> Option<u64> {
        self.quotients.iter().skip(1).step_by(2).copied().max()
    }

    /// Length of the common prefix with another sequence of quotients.
    pub fn common_prefix(&self, other: &[u64]) -> usize {
        self.quotients
            .iter()
            .zip(other)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetJson {
    quotients: Vec<i64>,
    depth: usize,
}

impl Serialize for RotationTarget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TargetJson {
            quotients: self.quotients.iter().map(|&k| k as i64).collect(),
            depth: self.depth(),
        }
        .serialize(s)
    }
}

/// A quotient list shorter than `depth` is repeated periodically.
impl<'de> Deserialize<'de> for RotationTarget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TargetJson::deserialize(d)?;
        if raw.quotients.is_empty() {
            if raw.depth == 0 {
                return Ok(RotationTarget::golden(0));
            }
            return Err(D::Error::custom(
                "quotients must be nonempty when depth > 0",
            ));
        }
        if let Some(i) = raw.quotients.iter().position(|&k| k < 1) {
            return Err(D::Error::custom(format!(
                "partial quotient {} is not positive",
                i + 1
            )));
        }
        let period: Vec<u64> = raw.quotients.iter().map(|&k| k as u64).collect();
        RotationTarget::periodic(&period, raw.depth).map_err(D::Error::custom)
    }
}

/// Gauss-map digit extraction of the first `depth` partial quotients of `x`.
///
/// `x` is taken as exact; the roundoff of every inexact reciprocal is tracked and a digit
/// is refused as soon as the remainder sits within that error (and 16u) of an integer.
pub fn quotients_from_real(x: &BigReal, depth: usize) -> Result<RotationTarget> {
    if !(x.is_finite() && *x > 0 && *x < 1) {
        return Err(Error::OutOfDomain {
            what: "x",
            value: x.to_string(),
            domain: "(0, 1)",
        });
    }
    let bits = x.prec();
    let u = Float::with_val(64, 1) >> (bits - 1);
    let mut rem = x.clone();
    let mut err = Float::with_val(64, 0);
    let mut ks = Vec::with_capacity(depth);
    for level in 1..=depth {
        if rem.is_zero() {
            return Err(Error::RationalBehaviour(level));
        }
        let (r, dir) = Float::with_val_round(bits, rem.recip_ref(), Round::Nearest);
        let rem64 = Float::with_val(64, &rem);
        let r64 = Float::with_val(64, &r);
        // Error of 1/rem due to the inherited error plus the rounding of the reciprocal.
        let mut err_r = Float::with_val(64, &err / Float::with_val(64, rem64.square_ref())) * 2u32;
        if dir != Ordering::Equal {
            err_r += Float::with_val(64, &r64 * &u);
        }
        let k = r.clone().floor();
        let frac = Float::with_val(bits, &r - &k);
        let exact = err_r.is_zero();
        if !exact {
            let margin = Float::with_val(64, &r64 * &u) * 16u32 + &err_r;
            let up = Float::with_val(64, 1 - Float::with_val(64, &frac));
            if Float::with_val(64, &frac) <= margin || up <= margin {
                return Err(Error::PrecisionExhausted(format!(
                    "remainder at quotient {level} is within roundoff of an integer"
                )));
            }
        }
        let k = k
            .to_integer()
            .and_then(|i| i.to_u64())
            .ok_or_else(|| Error::Overflow(format!("quotient {level}")))?;
        ks.push(k);
        rem = frac;
        err = err_r;
    }
    Ok(RotationTarget::from_positive(ks))
}

/// Convenience wrapper: quotients of a decimal string at the given width.
pub fn quotients_from_decimal(text: &str, bits: u32, depth: usize) -> Result<RotationTarget> {
    quotients_from_real(&make_real(text, bits)?, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(t: &RotationTarget) -> Vec<u64> {
        (1..=t.depth() as i64)
            .map(|n| t.q(n).unwrap().to_u64().unwrap())
            .collect()
    }

    #[test]
    fn recurrences() {
        assert_eq!(
            qs(&build_target(&[1, 1, 1, 1, 1, 1]).unwrap()),
            [1, 2, 3, 5, 8, 13]
        );
        assert_eq!(qs(&build_target(&[2, 2, 2, 2]).unwrap()), [2, 5, 12, 29]);
        let empty = build_target(&[]).unwrap();
        assert_eq!(empty.depth(), 0);
        assert_eq!(*empty.q(0).unwrap(), 1);
        assert_eq!(*empty.q(-1).unwrap(), 0);
        assert_eq!(*empty.p(-1).unwrap(), 1);
        assert_eq!(*empty.p(0).unwrap(), 0);
        assert!(matches!(
            build_target(&[1, 0, 2]),
            Err(Error::NonPositiveQuotient { index: 2 })
        ));
        assert!(build_target(&[-3]).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(RotationTarget::golden(12).type_bound().unwrap(), 1);
        assert_eq!(
            build_target(&[1, 3, 1, 3]).unwrap().type_bound().unwrap(),
            3
        );
        let t = build_target(&[2, 1, 2, 1]).unwrap();
        assert_eq!(t.even_index_max(), Some(1));
        assert_eq!(t.odd_index_max(), Some(2));
        assert!(build_target(&[]).unwrap().type_bound().is_err());
    }

    #[test]
    fn simple_values() {
        assert_eq!(build_target(&[2]).unwrap().value(64).unwrap(), 0.5);
        assert!(build_target(&[]).unwrap().value(64).is_err());
        let t = quotients_from_decimal("0.5", 64, 1).unwrap();
        assert_eq!(t.quotients(), &[2]);
        assert!(matches!(
            quotients_from_decimal("0.5", 64, 2),
            Err(Error::RationalBehaviour(2))
        ));
        assert!(quotients_from_decimal("1.5", 64, 2).is_err());
        assert!(quotients_from_decimal("0", 64, 2).is_err());
    }

    #[test]
    fn json_shape() {
        let t = build_target(&[1, 2, 3]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"quotients":[1,2,3],"depth":3}"#);
        let back: RotationTarget = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let periodic: RotationTarget =
            serde_json::from_str(r#"{"quotients":[1,2],"depth":5}"#).unwrap();
        assert_eq!(periodic.quotients(), &[1, 2, 1, 2, 1]);
        assert!(serde_json::from_str::<RotationTarget>(r#"{"quotients":[0],"depth":1}"#).is_err());
    }
}
