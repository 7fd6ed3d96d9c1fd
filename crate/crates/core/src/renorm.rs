//! Renormalizations (f_n, g_n) of a break map and their Möbius approximants.

use crate::error::{Error, Result};
use crate::maps::{iterate_lift, BreakOrbit, Jet, LiftPoint, Side};
use crate::numerics::{BigReal, Precision};
use rug::ops::Pow;
use rug::Float;

/// 𝒜_n(z) = ξ₀ − z·δ_{n−1} on the lift, so [−1, 0] covers Δ^(n−1)_0 and 𝒜_n(a_n) = ξ_{q_n}.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFrame {
    pub origin: BigReal,
    /// δ_{n−1} = f^{q_{n−1}}(ξ₀) − ξ₀ − p_{n−1}.
    pub scale: BigReal,
}

impl AffineFrame {
    pub fn apply(&self, z: &BigReal) -> BigReal {
        let bits = self.origin.prec().max(self.scale.prec()) + 8;
        Float::with_val(bits, &self.origin - Float::with_val(bits, z * &self.scale))
    }

    /// Inverse on the lift: (ξ₀ − x)/δ_{n−1}.
    pub fn inverse(&self, x: &BigReal) -> BigReal {
        let bits = self.origin.prec().max(self.scale.prec()) + 8;
        Float::with_val(bits, &self.origin - x) / &self.scale
    }

    /// The frame reverses orientation when Δ^(n−1)_0 lies counterclockwise of ξ₀.
    pub fn reverses(&self) -> bool {
        self.scale > 0
    }
}

/// Coefficients of the level-n renormalization.
#[derive(Clone, Debug, PartialEq)]
pub struct RenormPair {
    pub n: usize,
    pub q_n: usize,
    pub q_prev: usize,
    pub p_n: i64,
    pub p_prev: i64,
    pub a: BigReal,
    pub b: BigReal,
    pub v: BigReal,
    /// c for even n, 1/c for odd n.
    pub c_n: BigReal,
    pub len_prev: BigReal,
    pub len_cur: BigReal,
    pub frame: AffineFrame,
}

impl RenormPair {
    /// Side of ξ₀ on which Δ^(n−1)_0 lies.
    pub fn prev_side(&self) -> Side {
        if self.frame.scale > 0 {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// Side of ξ₀ on which Δ^(n)_0 lies.
    pub fn cur_side(&self) -> Side {
        match self.prev_side() {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        }
    }

    pub fn mobius(&self, z: &BigReal) -> Result<Jet> {
        mobius_approximant(&self.a, &self.v, &self.c_n, z)
    }
}

/// The frame of level n.
pub fn affine_frame(orbit: &BreakOrbit, n: usize) -> Result<AffineFrame> {
    check_level(orbit, n)?;
    let scale = orbit.returns().delta(n as i64 - 1).clone();
    if scale.is_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "Δ^(n−1)_0 degenerate at n = {n}"
        )));
    }
    Ok(AffineFrame {
        origin: orbit.map().break_point().clone(),
        scale,
    })
}

fn check_level(orbit: &BreakOrbit, n: usize) -> Result<()> {
    if n == 0 || n > orbit.depth() {
        return Err(Error::Invalid(format!(
            "renormalization level {n} outside 1..={}",
            orbit.depth()
        )));
    }
    Ok(())
}

/// a_n, b_n, v_n, c_n and the frame at level n; needs ξ_{q_n+q_{n−1}} stored.
pub fn renorm_pair(orbit: &BreakOrbit, n: usize) -> Result<RenormPair> {
    let frame = affine_frame(orbit, n)?;
    let cr = orbit.returns();
    let ni = n as i64;
    let (q_n, q_prev) = (cr.q(ni), cr.q(ni - 1));
    let (p_n, p_prev) = (cr.p(ni), cr.p(ni - 1));
    let prec = orbit.map().precision();
    let bits = prec.working_bits() + 8;
    let delta_n = cr.delta(ni);
    let a = -Float::with_val(bits, delta_n / &frame.scale);
    if a <= 0 {
        return Err(Error::Combinatorics(format!("a_{n} is not positive")));
    }
    // f_n(−1) = 𝒜_n^{-1}(ξ_{q_n+q_{n−1}}) = −b_n.
    let d = orbit.displacement(q_n + q_prev, p_n + p_prev)?;
    let b = Float::with_val(bits, &d / &frame.scale);
    let c = orbit.map().break_size()?;
    let c_n = if n % 2 == 0 {
        Float::with_val(bits, &c)
    } else {
        Float::with_val(bits, c.recip_ref())
    };
    if b <= 0 {
        return Err(Error::Combinatorics(format!("b_{n} is not positive")));
    }
    let v = Float::with_val(bits, &c_n - &a) - &b;
    let v = v / &b;
    Ok(RenormPair {
        n,
        q_n,
        q_prev,
        p_n,
        p_prev,
        len_prev: Float::with_val(bits, frame.scale.abs_ref()),
        len_cur: Float::with_val(bits, delta_n.abs_ref()),
        a,
        b,
        v,
        c_n,
        frame,
    })
}

/// F(z) = (a + cz)/(1 − vz) with DF = (c + av)(1 − vz)^{-2} and D²F = 2v(c + av)(1 − vz)^{-3}.
pub fn mobius_approximant(a: &BigReal, v: &BigReal, c: &BigReal, z: &BigReal) -> Result<Jet> {
    let bits = a.prec().max(v.prec()).max(c.prec()).max(z.prec());
    let den = Float::with_val(bits, 1u32 - Float::with_val(bits, v * z));
    if den <= 0 {
        return Err(Error::Pole(z.to_string_radix(10, Some(12))));
    }
    let num = Float::with_val(bits, a + Float::with_val(bits, c * z));
    let k = Float::with_val(bits, c + Float::with_val(bits, a * v));
    let den2 = Float::with_val(bits, den.square_ref());
    let first = Float::with_val(bits, &k / &den2);
    let second = Float::with_val(bits, &first * v) * 2u32 / &den;
    Ok(Jet {
        value: num / &den,
        first,
        second,
    })
}

/// One sample of a renormalized branch with its first two derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSample {
    pub z: BigReal,
    pub value: BigReal,
    pub first: BigReal,
    pub second: BigReal,
}

fn branch(
    orbit: &BreakOrbit,
    pair: &RenormPair,
    z: &BigReal,
    steps: usize,
    winding: i64,
    side_at_origin: Side,
) -> Result<BranchSample> {
    let map = orbit.map();
    let x = pair.frame.apply(z);
    let start = LiftPoint::from_real(map, &x)?;
    let side = if start.frac == *map.break_point() {
        side_at_origin
    } else {
        Side::Right
    };
    let (end, d1, d2) = iterate_lift(map, &start, steps, side)?;
    let bits = map.precision().working_bits() + 8;
    let mut y = Float::with_val(bits, &end.frac);
    y += end.wind - winding;
    Ok(BranchSample {
        z: z.clone(),
        value: pair.frame.inverse(&y),
        first: Float::with_val(bits, d1),
        second: -Float::with_val(bits, &pair.frame.scale * &d2),
    })
}

/// f_n(z) = 𝒜_n^{-1}(f^{q_n}(𝒜_n z)) with Df_n = Df^{q_n}(𝒜_n z) and D²f_n = −δ_{n−1}·D²f^{q_n}(𝒜_n z).
pub fn renormalize(
    orbit: &BreakOrbit,
    pair: &RenormPair,
    zs: &[BigReal],
) -> Result<Vec<BranchSample>> {
    zs.iter()
        .map(|z| {
            if *z < -1 || *z > 0 {
                return Err(Error::OutOfDomain {
                    what: "z",
                    value: z.to_string_radix(10, Some(12)),
                    domain: "[-1, 0]",
                });
            }
            branch(orbit, pair, z, pair.q_n, pair.p_n, pair.prev_side())
        })
        .collect()
}

/// g_n(z) = 𝒜_n^{-1}(f^{q_{n−1}}(𝒜_n z)) on [0, a_n].
pub fn renormalize_g(
    orbit: &BreakOrbit,
    pair: &RenormPair,
    zs: &[BigReal],
) -> Result<Vec<BranchSample>> {
    zs.iter()
        .map(|z| {
            if *z < 0 || *z > pair.a {
                return Err(Error::OutOfDomain {
                    what: "z",
                    value: z.to_string_radix(10, Some(12)),
                    domain: "[0, a_n]",
                });
            }
            branch(orbit, pair, z, pair.q_prev, pair.p_prev, pair.cur_side())
        })
        .collect()
}

/// Uniform grid of `count` points on [−1, 0].
pub fn unit_grid(prec: Precision, count: usize) -> Result<Vec<BigReal>> {
    Ok(crate::numerics::Grid::unit_left(prec, count)?
        .points()
        .to_vec())
}

/// Sup-norm distances between two sampled branches: (C⁰, C¹, D² in C⁰).
///
/// The C¹ norm is max(‖u‖_∞, ‖Du‖_∞).
#[derive(Clone, Debug, PartialEq)]
pub struct Distances {
    pub c0: BigReal,
    pub c1: BigReal,
    pub c2: BigReal,
}

fn distances<'a>(
    pairs: impl Iterator<
        Item = (
            &'a BigReal,
            &'a BigReal,
            &'a BigReal,
            &'a BigReal,
            &'a BigReal,
            &'a BigReal,
        ),
    >,
    bits: u32,
) -> Distances {
    let mut c0 = Float::new(bits);
    let mut d1 = Float::new(bits);
    let mut c2 = Float::new(bits);
    for (u0, u1, u2, w0, w1, w2) in pairs {
        for (acc, x, y) in [(&mut c0, u0, w0), (&mut d1, u1, w1), (&mut c2, u2, w2)] {
            let d = Float::with_val(bits, x - y).abs();
            if d > *acc {
                *acc = d;
            }
        }
    }
    let c1 = if d1 > c0 { d1 } else { c0.clone() };
    Distances { c0, c1, c2 }
}

/// ‖f_n − F_n‖ on the sample set.
pub fn mobius_distance(pair: &RenormPair, samples: &[BranchSample]) -> Result<Distances> {
    let jets = samples
        .iter()
        .map(|s| pair.mobius(&s.z))
        .collect::<Result<Vec<_>>>()?;
    let bits = pair.a.prec();
    Ok(distances(
        samples
            .iter()
            .zip(&jets)
            .map(|(s, j)| (&s.value, &s.first, &s.second, &j.value, &j.first, &j.second)),
        bits,
    ))
}

/// ‖f_n − f̃_n‖ for samples on a common grid.
pub fn branch_distance(u: &[BranchSample], w: &[BranchSample]) -> Result<Distances> {
    if u.len() != w.len() {
        return Err(Error::LengthMismatch(u.len(), w.len()));
    }
    let bits = u.first().map(|s| s.value.prec()).ok_or(Error::Empty)?;
    Ok(distances(
        u.iter()
            .zip(w)
            .map(|(s, t)| (&s.value, &s.first, &s.second, &t.value, &t.first, &t.second)),
        bits,
    ))
}

/// ‖f_n‖_{C²} = max(‖f_n‖_∞, ‖Df_n‖_∞, ‖D²f_n‖_∞) over the samples.
pub fn c2_norm(samples: &[BranchSample]) -> BigReal {
    let bits = samples.first().map_or(64, |s| s.value.prec());
    let mut m = Float::new(bits);
    for s in samples {
        for x in [&s.value, &s.first, &s.second] {
            let a = Float::with_val(bits, x.abs_ref());
            if a > m {
                m = a;
            }
        }
    }
    m
}

/// Smallest and largest Df_n over the samples.
pub fn derivative_extremes(samples: &[BranchSample]) -> Result<(BigReal, BigReal)> {
    let lo = samples
        .iter()
        .map(|s| &s.first)
        .min_by(|a, b| a.total_cmp(b))
        .ok_or(Error::Empty)?;
    let hi = samples
        .iter()
        .map(|s| &s.first)
        .max_by(|a, b| a.total_cmp(b))
        .ok_or(Error::Empty)?;
    Ok((lo.clone(), hi.clone()))
}

/// Strict membership (a, v) ∈ Φ_c^ε.
pub fn phi_membership(a: &BigReal, v: &BigReal, c: &BigReal, eps: &BigReal) -> bool {
    if *c == 1 || *eps <= 0 {
        return false;
    }
    let bits = a.prec().max(v.prec()).max(c.prec()).max(eps.prec()) + 8;
    let cm1 = Float::with_val(bits, c - 1u32);
    let ratio = Float::with_val(bits, v / &cm1);
    let upper_a = Float::with_val(bits, c - eps);
    let third = Float::with_val(bits, v + a) - c + 1u32;
    let one_minus = Float::with_val(bits, 1u32 - eps);
    *eps < *a && *a < upper_a && *eps < ratio && ratio < one_minus && third > *eps
}

/// sup{ε : (a, v) ∈ Φ_c^ε}, i.e. the smallest of the five slack quantities (may be ≤ 0).
pub fn phi_margin(a: &BigReal, v: &BigReal, c: &BigReal) -> Result<BigReal> {
    if *c == 1 {
        return Err(Error::OutOfDomain {
            what: "c",
            value: "1".into(),
            domain: "c != 1",
        });
    }
    let bits = a.prec().max(v.prec()).max(c.prec()) + 8;
    let ratio = Float::with_val(bits, v / Float::with_val(bits, c - 1u32));
    let cands = [
        Float::with_val(bits, a),
        Float::with_val(bits, c - a),
        ratio.clone(),
        Float::with_val(bits, 1u32 - &ratio),
        Float::with_val(bits, v + a) - c + 1u32,
    ];
    Ok(cands
        .into_iter()
        .min_by(|x, y| x.total_cmp(y))
        .expect("five candidates"))
}

/// Windows for Df_n: the ε-dependent one and the 𝔠-only one, each widened by `slack`.
#[derive(Clone, Debug, PartialEq)]
pub struct DfnWindow {
    pub n: usize,
    pub df_min: BigReal,
    pub df_max: BigReal,
    pub eps_lo: BigReal,
    pub eps_hi: BigReal,
    pub frak_lo: BigReal,
    pub frak_hi: BigReal,
    pub slack: BigReal,
    pub in_eps_window: bool,
    pub in_frak_window: bool,
}

/// The smallest C with measured extremes inside [1/𝔠² − C/n^γ, 𝔠² + C/n^γ].
pub fn frak_excess(c: &BigReal, df_min: &BigReal, df_max: &BigReal) -> BigReal {
    let bits = c.prec() + 8;
    let cc = if *c >= 1 {
        Float::with_val(bits, c)
    } else {
        Float::with_val(bits, c.recip_ref())
    };
    let hi = Float::with_val(bits, cc.square_ref());
    let lo = Float::with_val(bits, hi.recip_ref());
    let below = Float::with_val(bits, &lo - df_min);
    let above = Float::with_val(bits, df_max - &hi);
    let zero = Float::new(bits);
    [below, above, zero]
        .into_iter()
        .max_by(|x, y| x.total_cmp(y))
        .expect("three candidates")
}

pub fn dfn_bounds_check(
    pair: &RenormPair,
    c: &BigReal,
    df_min: &BigReal,
    df_max: &BigReal,
    eps: &BigReal,
    gamma: &BigReal,
    constant: &BigReal,
) -> DfnWindow {
    let bits = pair.a.prec();
    let cn = &pair.c_n;
    let n_gamma = Float::with_val(bits, Float::with_val(bits, pair.n).pow(gamma));
    let slack = Float::with_val(bits, constant / &n_gamma);
    // c_n/(c_n + ε(1 − c_n))² and c_n² − ε(c_n² − 1 − ε(c_n − 1)).
    let one_minus = Float::with_val(bits, 1u32 - cn);
    let den = Float::with_val(bits, cn + Float::with_val(bits, eps * &one_minus));
    let mob = Float::with_val(bits, cn / Float::with_val(bits, den.square_ref()));
    let cn2 = Float::with_val(bits, cn.square_ref());
    let inner = Float::with_val(bits, &cn2 - 1u32)
        - Float::with_val(bits, eps * Float::with_val(bits, cn - 1u32));
    let quad = Float::with_val(bits, &cn2 - Float::with_val(bits, eps * &inner));
    let (eps_lo, eps_hi) = if *cn > 1 { (mob, quad) } else { (quad, mob) };
    let cc = if *c >= 1 {
        Float::with_val(bits, c)
    } else {
        Float::with_val(bits, c.recip_ref())
    };
    let frak_hi = Float::with_val(bits, cc.square_ref());
    let frak_lo = Float::with_val(bits, frak_hi.recip_ref());
    let within = |lo: &BigReal, hi: &BigReal| {
        *df_min >= Float::with_val(bits, lo - &slack)
            && *df_max <= Float::with_val(bits, hi + &slack)
    };
    DfnWindow {
        n: pair.n,
        df_min: df_min.clone(),
        df_max: df_max.clone(),
        in_eps_window: within(&eps_lo, &eps_hi),
        in_frak_window: within(&frak_lo, &frak_hi),
        eps_lo,
        eps_hi,
        frak_lo,
        frak_hi,
        slack,
    }
}

/// 𝒜_n^{-1}(ξ_{q_n+q_{n−1}}) computed as f_n(−1), g_n(a_n) and directly from the stored orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingReport {
    pub n: usize,
    pub via_f: BigReal,
    pub via_g: BigReal,
    pub direct: BigReal,
    pub gap: BigReal,
    pub tolerance: BigReal,
}

impl CommutingReport {
    pub fn ok(&self) -> bool {
        self.gap <= self.tolerance
    }
}

pub fn commuting_pair_check(orbit: &BreakOrbit, pair: &RenormPair) -> Result<CommutingReport> {
    let bits = pair.a.prec();
    let m1 = Float::with_val(bits, -1);
    let via_f = renormalize(orbit, pair, &[m1])?.remove(0).value;
    let via_g = renormalize_g(orbit, pair, &[pair.a.clone()])?
        .remove(0)
        .value;
    let d = orbit.displacement(pair.q_n + pair.q_prev, pair.p_n + pair.p_prev)?;
    let direct = -Float::with_val(bits, &d / &pair.frame.scale);
    let g1 = Float::with_val(bits, &via_f - &direct).abs();
    let g2 = Float::with_val(bits, &via_g - &direct).abs();
    let gap = if g1 > g2 { g1 } else { g2 };
    let q_next = pair.q_n + pair.q_prev;
    let tolerance = Float::with_val(
        bits,
        orbit.map().precision().ulps(64.0 * q_next as f64) / Float::with_val(bits, &pair.len_prev),
    );
    Ok(CommutingReport {
        n: pair.n,
        via_f,
        via_g,
        direct,
        gap,
        tolerance,
    })
}

/// One row of the convergence table against the Möbius approximant.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusRow {
    pub pair: RenormPair,
    pub phi_margin: Option<BigReal>,
    pub dist: Distances,
    pub c1_scaled: BigReal,
    pub df_min: BigReal,
    pub df_max: BigReal,
    pub c2_norm: BigReal,
}

/// ‖f_n − F_n‖ over the requested levels on a uniform grid of [−1, 0].
pub fn mobius_table(
    orbit: &BreakOrbit,
    levels: impl IntoIterator<Item = usize>,
    grid_points: usize,
    gamma: &BigReal,
) -> Result<Vec<MobiusRow>> {
    let prec = orbit.map().precision();
    let zs = unit_grid(prec, grid_points)?;
    let mut rows = Vec::new();
    for n in levels {
        let pair = renorm_pair(orbit, n)?;
        let samples = renormalize(orbit, &pair, &zs)?;
        let dist = mobius_distance(&pair, &samples)?;
        let bits = pair.a.prec();
        let scale = Float::with_val(bits, Float::with_val(bits, n).pow(gamma));
        let c1_scaled = Float::with_val(bits, &dist.c1 * &scale);
        let phi = if pair.c_n == 1 {
            None
        } else {
            Some(phi_margin(&pair.a, &pair.v, &pair.c_n)?)
        };
        let (df_min, df_max) = derivative_extremes(&samples)?;
        rows.push(MobiusRow {
            phi_margin: phi,
            c2_norm: c2_norm(&samples),
            dist,
            c1_scaled,
            df_min,
            df_max,
            pair,
        });
    }
    Ok(rows)
}

/// One row of the comparison between two renormalization sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRow {
    pub n: usize,
    pub dist: Distances,
    pub a_gap: BigReal,
    pub c2_norm_f: BigReal,
    pub c2_norm_g: BigReal,
}

/// Refuses pairs whose break sizes differ by more than 8u unless `allow_break_mismatch`.
pub fn check_break_equivalence(
    f: &BreakOrbit,
    g: &BreakOrbit,
    levels: usize,
    allow_break_mismatch: bool,
) -> Result<()> {
    let cf = f.map().break_size()?;
    let cg = g.map().break_size()?;
    let tol = f.map().precision().ulps(8.0);
    if Float::with_val(cf.prec(), &cf - &cg).abs() > tol && !allow_break_mismatch {
        return Err(Error::BreakSizeMismatch(
            cf.to_string_radix(10, Some(20)),
            cg.to_string_radix(10, Some(20)),
        ));
    }
    let (tf, tg) = (f.returns(), g.returns());
    if tf.depth() < levels || tg.depth() < levels {
        return Err(Error::Combinatorics(format!(
            "orbit depth below level {levels}"
        )));
    }
    for n in 1..=levels {
        if tf.quotient(n) != tg.quotient(n) {
            return Err(Error::Combinatorics(format!(
                "partial quotient k_{n} differs: {} vs {}",
                tf.quotient(n),
                tg.quotient(n)
            )));
        }
    }
    Ok(())
}

/// ‖f_n − f̃_n‖ over the requested levels, with ‖f_n‖_{C²} and ‖f̃_n‖_{C²}.
pub fn pair_table(
    f: &BreakOrbit,
    g: &BreakOrbit,
    levels: impl IntoIterator<Item = usize>,
    grid_points: usize,
    allow_break_mismatch: bool,
) -> Result<Vec<PairRow>> {
    let levels: Vec<usize> = levels.into_iter().collect();
    let top = levels.iter().copied().max().unwrap_or(0);
    check_break_equivalence(f, g, top, allow_break_mismatch)?;
    let zs = unit_grid(f.map().precision(), grid_points)?;
    let mut rows = Vec::new();
    for n in levels {
        let pf = renorm_pair(f, n)?;
        let pg = renorm_pair(g, n)?;
        let sf = renormalize(f, &pf, &zs)?;
        let sg = renormalize(g, &pg, &zs)?;
        rows.push(PairRow {
            n,
            dist: branch_distance(&sf, &sg)?,
            a_gap: Float::with_val(pf.a.prec(), &pf.a - &pg.a).abs(),
            c2_norm_f: c2_norm(&sf),
            c2_norm_g: c2_norm(&sg),
        });
    }
    Ok(rows)
}

/// Least-squares fits of log y against log n and against n; returns (power exponent, exponential rate),
/// both as decay rates (positive means decreasing). Nonpositive entries are skipped.
pub fn decay_fits(ns: &[usize], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64, f64)> = ns
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0 && y.is_finite())
        .map(|(&n, &y)| ((n as f64).ln(), n as f64, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let slope = |xs: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let m = pts.len() as f64;
        let mx = pts.iter().map(xs).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.2).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (xs(p) - mx) * (p.2 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (xs(p) - mx).powi(2)).sum();
        sxy / sxx
    };
    Some((-slope(&|p| p.0), -slope(&|p| p.1)))
}

/// Iterates q_n from 𝒜_n(z) for any z ∈ [−1, a_n], the neighborhood Δ̂^(n−1)_0 in rescaled form.
pub fn rescaled_return(orbit: &BreakOrbit, pair: &RenormPair, z: &BigReal) -> Result<BranchSample> {
    if *z < -1 || *z > pair.a {
        return Err(Error::OutOfDomain {
            what: "z",
            value: z.to_string_radix(10, Some(12)),
            domain: "[-1, a_n]",
        });
    }
    let side = if *z > 0 {
        pair.cur_side()
    } else {
        pair.prev_side()
    };
    branch(orbit, pair, z, pair.q_n, pair.p_n, side)
}
