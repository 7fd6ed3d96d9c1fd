//! Circle maps with a single break point, their exact derivatives, iteration and tuning.

mod orbit;
mod tune;
mod weierstrass;

pub use orbit::{
    closest_returns, iterate_lift, iterate_with_derivs, BreakOrbit, ClosestReturns,
    DerivativeTriple, LiftPoint,
};
pub use tune::{tune_offset, tuned_member};
pub use weierstrass::{weierstrass_log_term, Jet, LacunarySeries};

use crate::error::{Error, Result};
use crate::numerics::{make_real, to_decimal, BigReal, Precision};
use rug::float::Constant;
use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

/// Which one-sided limit to use at the break point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// G_s(x) = s·x / (1 + (s−1)·x) on [0, 1].
pub fn glue_map(s: &BigReal, x: &BigReal) -> Result<BigReal> {
    Ok(glue_jet(s, x)?.value)
}

/// G_s with its first two derivatives.
pub fn glue_jet(s: &BigReal, x: &BigReal) -> Result<Jet> {
    if !(s.is_finite() && *s > 0) {
        return Err(Error::InvalidGlue(s.to_string()));
    }
    if !(x.is_finite() && *x >= 0 && *x <= 1) {
        return Err(Error::OutOfDomain {
            what: "x",
            value: x.to_string(),
            domain: "[0, 1]",
        });
    }
    let bits = s.prec().max(x.prec());
    let sm1 = Float::with_val(bits, s - 1u32);
    let den = Float::with_val(bits, &sm1 * x) + 1u32;
    let value = Float::with_val(bits, s * x) / &den;
    let den2 = Float::with_val(bits, den.square_ref());
    let first = Float::with_val(bits, s / &den2);
    let second = -Float::with_val(bits, s * &sm1) * 2u32 / den2 / &den;
    Ok(Jet {
        value,
        first,
        second,
    })
}

/// The break parameter s of G_s; s = 1 would produce no break.
#[derive(Clone, Debug, PartialEq)]
pub struct BreakGlue {
    s: BigReal,
}

impl BreakGlue {
    pub fn new(s: BigReal) -> Result<Self> {
        if !(s.is_finite() && s > 0 && s != 1) {
            return Err(Error::InvalidGlue(s.to_string()));
        }
        Ok(BreakGlue { s })
    }

    pub fn s(&self) -> &BigReal {
        &self.s
    }
}

/// A lift perturbation ε/(2πm)·(1 − cos 2πm y), y the offset from the break point.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothTerm {
    pub amplitude: BigReal,
    pub frequency: u32,
}

/// ε_z·(W(y) − W(0)) for the lacunary series W with exponent γ_z and depth K.
#[derive(Clone, Debug)]
pub struct ZygmundTerm {
    pub amplitude: BigReal,
    pub gamma: BigReal,
    pub depth: u32,
    series: LacunarySeries,
    offset: BigReal,
}

impl PartialEq for ZygmundTerm {
    fn eq(&self, other: &Self) -> bool {
        self.amplitude == other.amplitude && self.gamma == other.gamma && self.depth == other.depth
    }
}

/// JSON form of a map; reals are decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapParams {
    pub glue_s: Option<String>,
    pub omega: String,
    #[serde(default)]
    pub smooth_terms: Vec<(String, u32)>,
    #[serde(default)]
    pub zygmund: Option<ZygmundParams>,
    #[serde(default = "default_break_point")]
    pub break_point: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZygmundParams {
    pub eps: String,
    pub gamma: String,
    #[serde(rename = "K")]
    pub depth: u32,
}

fn default_break_point() -> String {
    "0".into()
}

/// Number of grid points used to certify monotonicity at construction.
const MONOTONE_GRID: u32 = 4096;

/// A circle map x ↦ ξ₀ + G_s(y) + ω + perturbations(y), y = (x − ξ₀) mod 1.
///
/// Without a glue the map is smooth (break size 1); such members serve as reference cases.
/// Every stored real lives at the working width and ω, ξ₀ sit on the fixed-point grid used for
/// orbit positions.
#[derive(Clone, Debug)]
pub struct BreakMapSpec {
    prec: Precision,
    glue: Option<BreakGlue>,
    omega: BigReal,
    smooth_terms: Vec<SmoothTerm>,
    zygmund: Option<ZygmundTerm>,
    break_point: BigReal,
    two_pi: BigReal,
    warnings: Vec<String>,
}

impl PartialEq for BreakMapSpec {
    fn eq(&self, other: &Self) -> bool {
        self.prec == other.prec
            && self.glue == other.glue
            && self.omega == other.omega
            && self.smooth_terms == other.smooth_terms
            && self.zygmund == other.zygmund
            && self.break_point == other.break_point
    }
}

/// Rounds x to the absolute grid 2^-bits at width bits + 8.
pub(crate) fn snap_to_grid(x: &BigReal, bits: u32) -> BigReal {
    let mut y = Float::with_val(bits + 8, x);
    y <<= bits;
    y.round_even_mut();
    y >>= bits;
    y
}

fn unit_interval(x: &BigReal, what: &'static str) -> Result<()> {
    if x.is_finite() && *x >= 0 && *x < 1 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what,
            value: x.to_string(),
            domain: "[0, 1)",
        })
    }
}

impl BreakMapSpec {
    /// Builds and validates a family member.
    pub fn new(
        prec: Precision,
        glue: Option<BreakGlue>,
        omega: &BigReal,
        smooth_terms: Vec<SmoothTerm>,
        zygmund: Option<(BigReal, BigReal, u32)>,
        break_point: &BigReal,
    ) -> Result<Self> {
        let w = prec.working_bits();
        unit_interval(omega, "omega")?;
        unit_interval(break_point, "break_point")?;
        let mut omega = snap_to_grid(omega, w);
        if omega == 1 {
            omega = Float::new(w);
        }
        omega.set_prec(w);
        let mut xi0 = snap_to_grid(break_point, w);
        if xi0 == 1 {
            xi0 = Float::new(w);
        }
        xi0.set_prec(w);
        let glue = match glue {
            Some(g) => Some(BreakGlue::new(Float::with_val(w, g.s()))?),
            None => None,
        };
        let mut terms = Vec::with_capacity(smooth_terms.len());
        for t in smooth_terms {
            if !t.amplitude.is_finite() || t.frequency == 0 {
                return Err(Error::Invalid(format!(
                    "smooth term ({}, {}) needs finite amplitude and frequency ≥ 1",
                    t.amplitude, t.frequency
                )));
            }
            terms.push(SmoothTerm {
                amplitude: Float::with_val(w, &t.amplitude),
                frequency: t.frequency,
            });
        }
        let mut warnings = Vec::new();
        let zygmund = match zygmund {
            Some((amp, gamma, depth)) => {
                if !amp.is_finite() {
                    return Err(Error::NonFinite("zygmund amplitude".into()));
                }
                if depth > prec.bits() / 4 {
                    warnings.push(format!(
                        "zygmund depth K = {depth} resolves scales below 2^-{} (B/4)",
                        prec.bits() / 4
                    ));
                }
                let series = LacunarySeries::new(&gamma, depth, w)?;
                let offset = series.value_at_zero();
                Some(ZygmundTerm {
                    amplitude: Float::with_val(w, amp),
                    gamma: Float::with_val(w, gamma),
                    depth,
                    series,
                    offset,
                })
            }
            None => None,
        };
        let map = BreakMapSpec {
            prec,
            glue,
            omega,
            smooth_terms: terms,
            zygmund,
            break_point: xi0,
            two_pi: Float::with_val(w, Constant::Pi) * 2u32,
            warnings,
        };
        map.check_monotone()?;
        Ok(map)
    }

    /// Pure rotation by ω (no break).
    pub fn rotation(prec: Precision, omega: &BigReal) -> Result<Self> {
        Self::new(prec, None, omega, Vec::new(), None, &prec.zero())
    }

    /// G_s followed by rotation by ω, break at 0, no perturbations.
    pub fn glue(prec: Precision, s: &BigReal, omega: &BigReal) -> Result<Self> {
        Self::new(
            prec,
            Some(BreakGlue::new(s.clone())?),
            omega,
            Vec::new(),
            None,
            &prec.zero(),
        )
    }

    pub fn from_params(params: &MapParams, prec: Precision) -> Result<Self> {
        let bits = prec.working_bits();
        let glue = match &params.glue_s {
            Some(s) => Some(BreakGlue::new(make_real(s, bits)?)?),
            None => None,
        };
        let omega = make_real(&params.omega, bits)?;
        let mut terms = Vec::new();
        for (eps, m) in &params.smooth_terms {
            terms.push(SmoothTerm {
                amplitude: make_real(eps, bits)?,
                frequency: *m,
            });
        }
        let zygmund = match &params.zygmund {
            Some(z) => Some((
                make_real(&z.eps, bits)?,
                make_real(&z.gamma, bits)?,
                z.depth,
            )),
            None => None,
        };
        let xi0 = make_real(&params.break_point, bits)?;
        Self::new(prec, glue, &omega, terms, zygmund, &xi0)
    }

    pub fn to_params(&self) -> MapParams {
        MapParams {
            glue_s: self.glue.as_ref().map(|g| to_decimal(g.s())),
            omega: to_decimal(&self.omega),
            smooth_terms: self
                .smooth_terms
                .iter()
                .map(|t| (to_decimal(&t.amplitude), t.frequency))
                .collect(),
            zygmund: self.zygmund.as_ref().map(|z| ZygmundParams {
                eps: to_decimal(&z.amplitude),
                gamma: to_decimal(&z.gamma),
                depth: z.depth,
            }),
            break_point: to_decimal(&self.break_point),
        }
    }

    /// Same family member with a different rotation offset.
    pub fn with_omega(&self, omega: &BigReal) -> Result<Self> {
        unit_interval(omega, "omega")?;
        let w = self.prec.working_bits();
        let mut om = snap_to_grid(omega, w);
        if om == 1 {
            om = Float::new(w);
        }
        om.set_prec(w);
        let mut m = self.clone();
        m.omega = om;
        // Monotonicity does not depend on ω.
        Ok(m)
    }

    /// Same map evaluated at a different width; ω and ξ₀ keep their values.
    pub fn with_precision(&self, prec: Precision) -> Result<Self> {
        Self::new(
            prec,
            self.glue.clone(),
            &self.omega,
            self.smooth_terms.clone(),
            self.zygmund
                .as_ref()
                .map(|z| (z.amplitude.clone(), z.gamma.clone(), z.depth)),
            &self.break_point,
        )
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn omega(&self) -> &BigReal {
        &self.omega
    }

    pub fn break_point(&self) -> &BigReal {
        &self.break_point
    }

    pub fn glue_param(&self) -> Option<&BigReal> {
        self.glue.as_ref().map(|g| g.s())
    }

    pub fn has_break(&self) -> bool {
        self.glue.is_some()
    }

    pub fn smooth_terms(&self) -> &[SmoothTerm] {
        &self.smooth_terms
    }

    pub fn zygmund(&self) -> Option<&ZygmundTerm> {
        self.zygmund.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Local jet in the offset y ∈ [0, 1] from the break: (G(y) + P(y), DG + P', D²G + P'').
    pub fn local_jet(&self, y: &BigReal) -> Jet {
        let mut s = Scratch::new(self);
        s.local(self, y, true);
        Jet {
            value: s.value.clone(),
            first: s.first.clone(),
            second: s.second.clone(),
        }
    }

    /// Offset y = (x − ξ₀) mod 1 for x ∈ [0, 1), with the side deciding y = 0 or y = 1 at ξ₀.
    fn offset(&self, x: &BigReal, side: Side) -> BigReal {
        let w = self.prec.working_bits() + 2;
        let mut y = Float::with_val(w, x - &self.break_point);
        if y < 0 || (y == 0 && side == Side::Left) {
            y += 1u32;
        }
        y
    }

    /// f(x) reduced to [0, 1).
    pub fn eval(&self, x: &BigReal) -> Result<BigReal> {
        let x = reduce_unit(x, self.prec.working_bits())?;
        let y = self.offset(&x, Side::Right);
        let jet = self.local_jet(&y);
        let mut v = Float::with_val(
            self.prec.working_bits() + 8,
            &self.break_point + &self.omega,
        );
        v += &jet.value;
        let v = Float::with_val(self.prec.working_bits(), v.fract_ref());
        Ok(if v < 0 { v + 1u32 } else { v })
    }

    /// Df(x); `side` only matters at ξ₀.
    pub fn deriv(&self, x: &BigReal, side: Side) -> Result<BigReal> {
        let x = reduce_unit(x, self.prec.working_bits())?;
        Ok(self.local_jet(&self.offset(&x, side)).first)
    }

    /// D²f(x); `side` only matters at ξ₀.
    pub fn second_deriv(&self, x: &BigReal, side: Side) -> Result<BigReal> {
        let x = reduce_unit(x, self.prec.working_bits())?;
        Ok(self.local_jet(&self.offset(&x, side)).second)
    }

    /// c = sqrt(Df(ξ₀−0)/Df(ξ₀+0)).
    pub fn break_size(&self) -> Result<BigReal> {
        let left = self.deriv(&self.break_point, Side::Left)?;
        let right = self.deriv(&self.break_point, Side::Right)?;
        if left <= 0 || right <= 0 {
            return Err(Error::NotMonotone(
                "vanishing one-sided derivative at the break".into(),
            ));
        }
        Ok(Float::with_val(self.prec.bits(), (left / right).sqrt()))
    }

    fn check_monotone(&self) -> Result<()> {
        let w = self.prec.working_bits();
        let mut s = Scratch::new(self);
        let mut y = Float::new(w + 2);
        for k in 0..=MONOTONE_GRID {
            y.assign(k);
            y /= MONOTONE_GRID;
            s.local(self, &y, false);
            if !(s.first.is_finite() && s.first > 0) {
                return Err(Error::NotMonotone(format!(
                    "Df = {} at break offset {}",
                    s.first.to_string_radix(10, Some(8)),
                    y.to_string_radix(10, Some(8))
                )));
            }
        }
        Ok(())
    }
}

fn reduce_unit(x: &BigReal, bits: u32) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(Error::NonFinite("map argument".into()));
    }
    let mut r = Float::with_val(bits.max(x.prec()), x.fract_ref());
    if r < 0 {
        r += 1u32;
    }
    if r >= 1 {
        r -= 1u32;
    }
    Ok(r)
}

/// Reusable temporaries for the hot evaluation loop.
pub(crate) struct Scratch {
    pub(crate) value: BigReal,
    pub(crate) first: BigReal,
    pub(crate) second: BigReal,
    den: BigReal,
    t: BigReal,
    theta: BigReal,
    sin: BigReal,
    cos: BigReal,
    sm1: Option<BigReal>,
    curv: Option<BigReal>,
}

impl Scratch {
    pub(crate) fn new(map: &BreakMapSpec) -> Self {
        let w = map.prec.working_bits();
        let (sm1, curv) = match &map.glue {
            Some(g) => {
                let sm1 = Float::with_val(w, g.s() - 1u32);
                let curv = -Float::with_val(w, g.s() * &sm1) * 2u32;
                (Some(sm1), Some(curv))
            }
            None => (None, None),
        };
        Scratch {
            value: Float::new(w + 8),
            first: Float::new(w),
            second: Float::new(w),
            den: Float::new(w),
            t: Float::new(w),
            theta: Float::new(w),
            sin: Float::new(w),
            cos: Float::new(w),
            sm1,
            curv,
        }
    }

    /// Sets value = G(y) + P(y) and, if `second` is wanted, the curvature too.
    pub(crate) fn local(&mut self, map: &BreakMapSpec, y: &BigReal, want_second: bool) {
        match (&map.glue, &self.sm1, &self.curv) {
            (Some(g), Some(sm1), Some(curv)) => {
                let s = g.s();
                self.den.assign(sm1 * y);
                self.den += 1u32;
                self.value.assign(s * y);
                self.value /= &self.den;
                self.t.assign(self.den.square_ref());
                self.first.assign(s / &self.t);
                if want_second {
                    self.second.assign(curv / &self.t);
                    self.second /= &self.den;
                }
            }
            _ => {
                self.value.assign(y);
                self.first.assign(1u32);
                self.second.assign(0u32);
            }
        }
        for term in &map.smooth_terms {
            self.theta.assign(&map.two_pi * y);
            self.theta *= term.frequency;
            self.sin.assign(&self.theta);
            self.cos.assign(0u32);
            self.sin.sin_cos_mut(&mut self.cos);
            // ε/(2πm)·(1 − cos θ)
            self.t.assign(1u32 - &self.cos);
            self.t *= &term.amplitude;
            self.t /= &map.two_pi;
            self.t /= term.frequency;
            self.value += &self.t;
            self.t.assign(&term.amplitude * &self.sin);
            self.first += &self.t;
            if want_second {
                self.t.assign(&term.amplitude * &self.cos);
                self.t *= &map.two_pi;
                self.t *= term.frequency;
                self.second += &self.t;
            }
        }
        if let Some(z) = &map.zygmund {
            let w = map.prec.working_bits();
            let mut v = Float::new(w + 8);
            let mut d1 = Float::new(w);
            let mut d2 = Float::new(w);
            z.series
                .accumulate(y, &z.amplitude, &mut v, &mut d1, &mut d2);
            v -= Float::with_val(w + 8, &z.offset * &z.amplitude);
            self.value += &v;
            self.first += &d1;
            if want_second {
                self.second += &d2;
            }
        }
    }
}
