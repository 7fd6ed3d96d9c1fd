use super::{BreakMapSpec, Scratch, Side};
use crate::error::{Error, Result};
use crate::numerics::BigReal;
use crate::rotations::{build_target, RotationTarget};
use rug::{Assign, Float};
use std::cmp::Ordering;

/// A point of the lift, w + r with integer winding w and fractional part r ∈ [0, 1).
///
/// The fractional part is kept on the absolute grid 2^-W of the working width W, so
/// adding a grid-aligned rotation offset is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftPoint {
    pub wind: i64,
    pub frac: BigReal,
}

impl LiftPoint {
    /// The lift point of a real x, snapped to the map's position grid.
    pub fn from_real(map: &BreakMapSpec, x: &BigReal) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite("lift point".into()));
        }
        let w = map.precision().working_bits();
        let mut frac = super::snap_to_grid(x, w);
        let fl = Float::with_val(frac.prec(), frac.floor_ref());
        let wind = fl
            .to_integer()
            .and_then(|i| i.to_i64())
            .ok_or_else(|| Error::Overflow("winding of lift point".into()))?;
        frac -= &fl;
        frac.set_prec(w);
        Ok(LiftPoint { wind, frac })
    }

    /// w + r as a single real.
    pub fn value(&self) -> BigReal {
        Float::with_val(self.frac.prec() + 64, &self.frac + self.wind)
    }
}

/// f^k(x) with Df^k(x) and D²f^k(x).
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTriple {
    pub value: BigReal,
    pub first: BigReal,
    pub second: BigReal,
}

/// One application of the lift with optional derivative output.
pub(crate) struct Stepper<'a> {
    map: &'a BreakMapSpec,
    scratch: Scratch,
    y: BigReal,
    v: BigReal,
    tiny: BigReal,
    grid_bits: u32,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(map: &'a BreakMapSpec) -> Self {
        let w = map.precision().working_bits();
        Stepper {
            map,
            scratch: Scratch::new(map),
            y: Float::new(w + 2),
            v: Float::new(w + 8),
            tiny: map.precision().ulps(64.0),
            grid_bits: w,
        }
    }

    /// Advances `pt` by one step. Derivatives at the starting point are left in
    /// `self.df()` / `self.d2f()`. Returns the circle distance of the start from ξ₀.
    pub(crate) fn step(&mut self, pt: &mut LiftPoint, side: Side, want_second: bool) -> bool {
        let xi0 = self.map.break_point();
        self.y.assign(&pt.frac - xi0);
        let mut m = pt.wind;
        let near_break;
        if self.y < 0 || (self.y == 0 && side == Side::Left) {
            self.y += 1u32;
            m -= 1;
        }
        {
            // Circle distance from the break point.
            let other = Float::with_val(self.y.prec(), 1u32 - &self.y);
            near_break = self.y < self.tiny || other < self.tiny;
        }
        self.scratch.local(self.map, &self.y, want_second);
        self.v.assign(xi0 + self.map.omega());
        self.v += &self.scratch.value;
        let mut t = 0i64;
        while self.v >= 1 {
            self.v -= 1u32;
            t += 1;
        }
        while self.v < 0 {
            self.v += 1u32;
            t -= 1;
        }
        self.v <<= self.grid_bits;
        self.v.round_even_mut();
        self.v >>= self.grid_bits;
        if self.v >= 1 {
            self.v -= 1u32;
            t += 1;
        }
        pt.frac.assign(&self.v);
        pt.wind = m + t;
        near_break
    }

    pub(crate) fn df(&self) -> &BigReal {
        &self.scratch.first
    }

    pub(crate) fn d2f(&self) -> &BigReal {
        &self.scratch.second
    }
}

/// Iterates the lift k times from `start`, accumulating Df^k and D²f^k by the chain rule.
///
/// `side` selects the one-sided derivative when `start` is the break point itself; any later
/// iterate within 64u of the break point is an error.
pub fn iterate_lift(
    map: &BreakMapSpec,
    start: &LiftPoint,
    k: usize,
    side: Side,
) -> Result<(LiftPoint, BigReal, BigReal)> {
    let w = map.precision().working_bits();
    let mut pt = start.clone();
    pt.frac.set_prec(w);
    let mut d1 = Float::with_val(w, 1u32);
    let mut d2 = Float::new(w);
    let mut t = Float::new(w);
    let mut stepper = Stepper::new(map);
    for j in 0..k {
        let sd = if j == 0 { side } else { Side::Right };
        let near = stepper.step(&mut pt, sd, true);
        if near && j > 0 {
            return Err(Error::OrbitHitsBreak(j));
        }
        // D²(f∘g) = D²f(g)·(Dg)² + Df(g)·D²g
        t.assign(d1.square_ref());
        t *= stepper.d2f();
        d2 *= stepper.df();
        d2 += &t;
        d1 *= stepper.df();
    }
    if !(d1.is_finite() && d2.is_finite()) {
        return Err(Error::NonFinite("derivative products".into()));
    }
    Ok((pt, d1, d2))
}

/// f^k(x) reduced to [0, 1) with its first two derivatives.
pub fn iterate_with_derivs(
    map: &BreakMapSpec,
    x: &BigReal,
    k: usize,
    side: Side,
) -> Result<DerivativeTriple> {
    let start = LiftPoint::from_real(map, x)?;
    let (pt, first, second) = iterate_lift(map, &start, k, side)?;
    Ok(DerivativeTriple {
        value: pt.frac,
        first,
        second,
    })
}

/// Closest-return data of the orbit of ξ₀: q_n, p_n and signed displacements
/// δ_n = f^{q_n}(ξ₀) − ξ₀ − p_n on the lift, for −1 ≤ n ≤ N.
#[derive(Clone, Debug)]
pub struct ClosestReturns {
    pub target: RotationTarget,
    /// q_1..q_N.
    pub times: Vec<usize>,
    qs: Vec<usize>,
    ps: Vec<i64>,
    deltas: Vec<BigReal>,
}

impl ClosestReturns {
    pub fn depth(&self) -> usize {
        self.times.len()
    }

    fn slot(&self, n: i64) -> usize {
        assert!(
            n >= -1 && n <= self.depth() as i64,
            "level {n} out of range"
        );
        (n + 1) as usize
    }

    pub fn q(&self, n: i64) -> usize {
        self.qs[self.slot(n)]
    }

    pub fn p(&self, n: i64) -> i64 {
        self.ps[self.slot(n)]
    }

    pub fn delta(&self, n: i64) -> &BigReal {
        &self.deltas[self.slot(n)]
    }

    pub fn quotient(&self, n: usize) -> u64 {
        self.target.quotients()[n - 1]
    }
}

pub(crate) struct Scan {
    pub(crate) returns: ClosestReturns,
    /// First level whose quotient differs from the cap, with k_map compared to k_target.
    pub(crate) diverged: Option<(usize, Ordering)>,
    pub(crate) min_abs: BigReal,
    pub(crate) points: Vec<LiftPoint>,
}

/// Upper bound on orbit length explored by a single scan.
const SCAN_BUDGET: usize = 1 << 27;

/// Streams the orbit of ξ₀ extracting partial quotients: k_{n+1} is the largest s for which
/// f^{q_{n−1}+s·q_n}(ξ₀) − ξ₀ − (p_{n−1}+s·p_n) keeps the sign of δ_{n−1}.
///
/// With `caps`, level j scans at most caps[j]+1 steps and stops at the first mismatch.
/// `strict` turns returns within 64u (or exact returns) into errors.
pub(crate) fn scan(
    map: &BreakMapSpec,
    depth: usize,
    caps: Option<&[u64]>,
    store: bool,
    strict: bool,
) -> Result<Scan> {
    let prec = map.precision();
    let w = prec.working_bits();
    let xi0 = map.break_point().clone();
    let tiny = prec.ulps(64.0);
    let mut cursor = LiftPoint {
        wind: 0,
        frac: Float::with_val(w, &xi0),
    };
    let mut index = 0usize;
    let mut points = Vec::new();
    if store {
        points.push(cursor.clone());
    }
    let mut stepper = Stepper::new(map);
    let mut min_abs = Float::with_val(w, 1u32);
    let mut disp = Float::new(w + 2);

    let mut qs: Vec<usize> = vec![0, 1];
    let mut ps: Vec<i64> = vec![1, 0];
    let mut ks: Vec<i64> = Vec::new();

    macro_rules! advance {
        ($to:expr) => {{
            let to: usize = $to;
            while index < to {
                stepper.step(&mut cursor, Side::Right, false);
                index += 1;
                if store {
                    points.push(cursor.clone());
                }
                if strict && cursor.frac == xi0 {
                    return Err(Error::RationalBehaviour(index));
                }
                if index > SCAN_BUDGET {
                    return Err(Error::Combinatorics(format!(
                        "no closest return found within {SCAN_BUDGET} iterates; rotation number looks rational"
                    )));
                }
            }
        }};
    }
    macro_rules! displacement {
        ($p:expr) => {{
            let p: i64 = $p;
            disp.assign(&cursor.frac - &xi0);
            disp += cursor.wind - p;
            disp.clone()
        }};
    }

    advance!(1);
    let delta0 = displacement!(0);
    if delta0 <= 0 {
        return Err(Error::RationalBehaviour(1));
    }
    let mut deltas: Vec<BigReal> = vec![Float::with_val(w + 2, -1), delta0];
    let mut diverged = None;

    for level in 1..=depth {
        let (qa, qb) = (qs[level - 1], qs[level]);
        let (pa, pb) = (ps[level - 1], ps[level]);
        let reference = deltas[level - 1].cmp0().unwrap_or(Ordering::Equal);
        let cap = caps.map(|c| c[level - 1]);
        let mut k = 0u64;
        let mut best: Option<BigReal> = None;
        let mut s = 1u64;
        loop {
            if let Some(c) = cap {
                if s > c + 1 {
                    break;
                }
            }
            let idx = (s as usize)
                .checked_mul(qb)
                .and_then(|v| v.checked_add(qa))
                .ok_or_else(|| Error::Overflow("return time".into()))?;
            advance!(idx);
            let d = displacement!(pa + s as i64 * pb);
            let a = Float::with_val(w, d.abs_ref());
            if a < min_abs {
                min_abs.assign(&a);
            }
            if strict {
                if d.is_zero() {
                    return Err(Error::RationalBehaviour(idx));
                }
                if a < tiny {
                    return Err(Error::PrecisionExhausted(format!(
                        "closest return at iterate {idx} is within 64u of the break point"
                    )));
                }
            }
            if d.cmp0() == Some(reference) {
                k = s;
                best = Some(d);
                s += 1;
            } else {
                break;
            }
        }
        if let Some(c) = cap {
            if k != c {
                diverged = Some((level, k.cmp(&c)));
                break;
            }
        }
        if k == 0 {
            return Err(Error::Combinatorics(format!(
                "quotient {level} came out as zero"
            )));
        }
        let delta = best.expect("k ≥ 1 implies a stored displacement");
        if delta.cmp0() == deltas[level].cmp0() {
            return Err(Error::Combinatorics(format!(
                "returns {} and {level} lie on the same side of the break point",
                level - 1
            )));
        }
        let q_next = (k as usize)
            .checked_mul(qb)
            .and_then(|v| v.checked_add(qa))
            .ok_or_else(|| Error::Overflow("q_n".into()))?;
        qs.push(q_next);
        ps.push(k as i64 * pb + pa);
        ks.push(k as i64);
        deltas.push(delta);
    }
    let target = build_target(&ks)?;
    Ok(Scan {
        returns: ClosestReturns {
            target,
            times: qs[2..].to_vec(),
            qs,
            ps,
            deltas,
        },
        diverged,
        min_abs,
        points,
    })
}

/// Partial quotients and return times of the orbit of ξ₀ to depth N.
pub fn closest_returns(map: &BreakMapSpec, depth: usize) -> Result<ClosestReturns> {
    Ok(scan(map, depth, None, false, true)?.returns)
}

/// The orbit prefix ξ_0..ξ_L of the break point together with its closest returns.
#[derive(Clone, Debug)]
pub struct BreakOrbit {
    map: BreakMapSpec,
    returns: ClosestReturns,
    points: Vec<LiftPoint>,
}

impl BreakOrbit {
    /// Stores the orbit up to index q_N + q_{N−1} at least.
    pub fn new(map: &BreakMapSpec, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Invalid("orbit depth must be at least 1".into()));
        }
        let s = scan(map, depth, None, true, true)?;
        Ok(BreakOrbit {
            map: map.clone(),
            returns: s.returns,
            points: s.points,
        })
    }

    /// Ensures ξ_0..ξ_{len−1} are stored.
    pub fn extend_to(&mut self, len: usize) -> Result<()> {
        let mut stepper = Stepper::new(&self.map);
        let xi0 = self.map.break_point().clone();
        while self.points.len() < len {
            let mut next = self.points.last().expect("orbit is never empty").clone();
            stepper.step(&mut next, Side::Right, false);
            if next.frac == xi0 {
                return Err(Error::RationalBehaviour(self.points.len()));
            }
            self.points.push(next);
        }
        Ok(())
    }

    pub fn map(&self) -> &BreakMapSpec {
        &self.map
    }

    pub fn returns(&self) -> &ClosestReturns {
        &self.returns
    }

    pub fn depth(&self) -> usize {
        self.returns.depth()
    }

    pub fn points(&self) -> &[LiftPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Result<&LiftPoint> {
        self.points.get(i).ok_or_else(|| {
            Error::Invalid(format!(
                "orbit index {i} beyond stored length {}",
                self.points.len()
            ))
        })
    }

    /// ξ_i − ξ₀ − p on the lift.
    pub fn displacement(&self, i: usize, p: i64) -> Result<BigReal> {
        let pt = self.point(i)?;
        let w = self.map.precision().working_bits();
        let mut d = Float::with_val(w + 2, &pt.frac - self.map.break_point());
        d += pt.wind - p;
        Ok(d)
    }

    /// (ξ_i − ξ₀) mod 1 in [0, 1); exact on the position grid.
    pub fn offset(&self, i: usize) -> Result<BigReal> {
        let pt = self.point(i)?;
        let w = self.map.precision().working_bits();
        let mut d = Float::with_val(w + 2, &pt.frac - self.map.break_point());
        if d < 0 {
            d += 1u32;
        }
        Ok(d)
    }
}
