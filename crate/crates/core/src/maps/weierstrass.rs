//! Lacunary cosine series whose derivative sits in a logarithmic Zygmund class.

use crate::error::{Error, Result};
use crate::numerics::BigReal;
use rug::float::Constant;
use rug::{Assign, Float};

/// Value, first and second derivative of a scalar function at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: BigReal,
    pub first: BigReal,
    pub second: BigReal,
}

fn check_params(gamma: &BigReal, depth: u32) -> Result<()> {
    if !(gamma.is_finite() && *gamma > 1) {
        return Err(Error::OutOfDomain {
            what: "gamma",
            value: gamma.to_string(),
            domain: "(1, inf)",
        });
    }
    if depth == 0 {
        return Err(Error::Invalid(
            "truncation depth K must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Reference evaluation of
/// W(x) = Σ_{k=1..K} 2^-k k^-γ (-cos 2π2^k x)/(2π2^k),
/// together with W' = Σ 2^-k k^-γ sin 2π2^k x and W'' = Σ 2π k^-γ cos 2π2^k x.
///
/// Every term calls sin/cos directly; the map family uses [`LacunarySeries`] instead.
pub fn weierstrass_log_term(gamma: &BigReal, depth: u32, x: &BigReal) -> Result<Jet> {
    check_params(gamma, depth)?;
    let bits = x.prec().max(gamma.prec()) + 16;
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let mut value = Float::new(bits);
    let mut first = Float::new(bits);
    let mut second = Float::new(bits);
    for k in 1..=depth {
        let decay = (-Float::with_val(bits, gamma) * Float::with_val(bits, k).ln()).exp();
        let freq = Float::with_val(bits, &two_pi << k);
        let theta = Float::with_val(bits, &freq * x);
        let (s, c) = theta.sin_cos(Float::new(bits));
        let weight = Float::with_val(bits, &decay >> k);
        value -= Float::with_val(bits, &weight * &c) / &freq;
        first += Float::with_val(bits, &weight * &s);
        second += Float::with_val(bits, &decay * &c) * &two_pi;
    }
    let out = x.prec().max(gamma.prec());
    Ok(Jet {
        value: Float::with_val(out, value),
        first: Float::with_val(out, first),
        second: Float::with_val(out, second),
    })
}

/// Precomputed coefficients of the lacunary series, evaluated by angle doubling.
///
/// Doubling loses about one bit per term, so the evaluation carries K + 8 guard bits.
#[derive(Clone, Debug)]
pub struct LacunarySeries {
    depth: u32,
    bits: u32,
    two_pi: BigReal,
    value_coef: Vec<BigReal>,
    first_coef: Vec<BigReal>,
    second_coef: Vec<BigReal>,
}

impl LacunarySeries {
    pub fn new(gamma: &BigReal, depth: u32, out_bits: u32) -> Result<Self> {
        check_params(gamma, depth)?;
        let bits = out_bits + depth + 8;
        let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
        let mut value_coef = Vec::with_capacity(depth as usize);
        let mut first_coef = Vec::with_capacity(depth as usize);
        let mut second_coef = Vec::with_capacity(depth as usize);
        for k in 1..=depth {
            let decay = (-Float::with_val(bits, gamma) * Float::with_val(bits, k).ln()).exp();
            let weight = Float::with_val(bits, &decay >> k);
            let freq = Float::with_val(bits, &two_pi << k);
            value_coef.push(Float::with_val(bits, &weight / &freq));
            second_coef.push(Float::with_val(bits, &decay * &two_pi));
            first_coef.push(weight);
        }
        Ok(LacunarySeries {
            depth,
            bits,
            two_pi,
            value_coef,
            first_coef,
            second_coef,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Adds (W(x), W'(x), W''(x)) scaled by `amp` into the three accumulators.
    pub fn accumulate(
        &self,
        x: &BigReal,
        amp: &BigReal,
        value: &mut BigReal,
        first: &mut BigReal,
        second: &mut BigReal,
    ) {
        let b = self.bits;
        let mut theta = Float::with_val(b, &self.two_pi * x);
        theta <<= 1u32;
        let (mut s, mut c) = theta.sin_cos(Float::new(b));
        let mut v = Float::new(b);
        let mut d1 = Float::new(b);
        let mut d2 = Float::new(b);
        let mut t = Float::new(b);
        let mut t2 = Float::new(b);
        for k in 0..self.depth as usize {
            t.assign(&self.value_coef[k] * &c);
            v -= &t;
            t.assign(&self.first_coef[k] * &s);
            d1 += &t;
            t.assign(&self.second_coef[k] * &c);
            d2 += &t;
            if k + 1 < self.depth as usize {
                t.assign(&s * &c);
                t <<= 1u32;
                t2.assign(s.square_ref());
                t2 <<= 1u32;
                c.assign(1 - &t2);
                std::mem::swap(&mut s, &mut t);
            }
        }
        *value += Float::with_val(b, &v * amp);
        *first += Float::with_val(b, &d1 * amp);
        *second += Float::with_val(b, &d2 * amp);
    }

    /// W(0) = -Σ value_coef.
    pub fn value_at_zero(&self) -> BigReal {
        let mut v = Float::new(self.bits);
        for c in &self.value_coef {
            v -= c;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_at_zero() {
        let g = Float::with_val(256, 3);
        let x = Float::new(256);
        let j = weierstrass_log_term(&g, 1, &x).unwrap();
        let pi = Float::with_val(256, Constant::Pi);
        let expected: Float = -Float::with_val(256, 8u32 * &pi).recip();
        assert!(Float::with_val(256, &j.value - &expected).abs() < 1e-70);
        assert_eq!(j.first, 0);
        assert!(Float::with_val(256, &j.second - Float::with_val(256, &pi * 2u32)).abs() < 1e-70);
    }

    #[test]
    fn rejects_bad_parameters() {
        let x = Float::new(64);
        assert!(weierstrass_log_term(&Float::with_val(64, 1), 4, &x).is_err());
        assert!(weierstrass_log_term(&Float::with_val(64, 3), 0, &x).is_err());
    }

    #[test]
    fn doubling_agrees_with_direct_sum() {
        let g = Float::with_val(256, 3);
        let series = LacunarySeries::new(&g, 24, 256).unwrap();
        let one = Float::with_val(256, 1);
        for text in ["0", "0.1", "0.3333", "0.77", "0.999"] {
            let x = Float::with_val(256, Float::parse(text).unwrap());
            let direct = weierstrass_log_term(&g, 24, &x).unwrap();
            let (mut v, mut d1, mut d2) = (Float::new(256), Float::new(256), Float::new(256));
            series.accumulate(&x, &one, &mut v, &mut d1, &mut d2);
            for (a, b) in [
                (&v, &direct.value),
                (&d1, &direct.first),
                (&d2, &direct.second),
            ] {
                let err = Float::with_val(256, a - b).abs();
                assert!(err < 1e-70, "{text}: {err}");
            }
        }
        let w0 = weierstrass_log_term(&g, 24, &Float::new(256))
            .unwrap()
            .value;
        assert!(Float::with_val(256, series.value_at_zero() - &w0).abs() < 1e-70);
    }
}
