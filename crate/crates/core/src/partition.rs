//! Dynamical partitions generated by the orbit of the break point.

use crate::error::{Error, Result};
use crate::maps::{iterate_lift, BreakOrbit, LiftPoint, Side};
use crate::numerics::BigReal;
use rug::ops::Pow;
use rug::Float;
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Which family a partition element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentKind {
    /// Δ^(n)_j = f^j(Δ^(n)_0), 0 ≤ j < q_{n−1}.
    Short,
    /// Δ^(n−1)_i = f^i(Δ^(n−1)_0), 0 ≤ i < q_n.
    Long,
}

/// One element of 𝒫_n, running counterclockwise from `start` to `end` (orbit indices).
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub length: BigReal,
}

/// Level-n partition: the endpoints Ξ_n sorted counterclockwise from ξ₀ and the
/// segments between consecutive endpoints.
#[derive(Clone, Debug)]
pub struct PartitionLevel {
    pub n: usize,
    pub q_n: usize,
    pub q_prev: usize,
    /// Δ^(n)_0 lies counterclockwise of ξ₀ exactly when n is even.
    pub even: bool,
    /// (orbit index, offset from ξ₀ in [0, 1)) in counterclockwise order; `xi[0]` is ξ₀.
    pub xi: Vec<(usize, BigReal)>,
    /// `segments[k]` runs from `xi[k]` to `xi[k+1]` (cyclically).
    pub segments: Vec<Segment>,
    position: Vec<usize>,
    tie: BigReal,
}

/// Endpoints (ccw-first, ccw-last) of Δ^(n)_j and Δ^(n−1)_i.
fn oriented(
    kind: SegmentKind,
    index: usize,
    even: bool,
    q_n: usize,
    q_prev: usize,
) -> (usize, usize) {
    match (kind, even) {
        (SegmentKind::Short, true) => (index, index + q_n),
        (SegmentKind::Short, false) => (index + q_n, index),
        (SegmentKind::Long, true) => (index + q_prev, index),
        (SegmentKind::Long, false) => (index, index + q_prev),
    }
}

/// 𝒫_n built from the stored orbit.
pub fn build_partition(orbit: &BreakOrbit, n: usize) -> Result<PartitionLevel> {
    if n == 0 || n > orbit.depth() {
        return Err(Error::Invalid(format!(
            "partition level {n} outside 1..={}",
            orbit.depth()
        )));
    }
    let cr = orbit.returns();
    let q_n = cr.q(n as i64);
    let q_prev = cr.q(n as i64 - 1);
    let count = q_n + q_prev;
    let even = n % 2 == 0;
    let mut xi = Vec::with_capacity(count);
    for i in 0..count {
        xi.push((i, orbit.offset(i)?));
    }
    xi.sort_by(|a, b| a.1.total_cmp(&b.1));
    let prec = orbit.map().precision();
    let tie = prec.ulps(64.0);
    for w in xi.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(Error::PrecisionExhausted(format!(
                "orbit points {} and {} coincide",
                w[0].0, w[1].0
            )));
        }
    }
    if xi[0].0 != 0 {
        return Err(Error::IdentityViolated(
            "ξ₀ is not the first endpoint".into(),
        ));
    }
    let mut position = vec![0usize; count];
    for (k, (i, _)) in xi.iter().enumerate() {
        position[*i] = k;
    }
    let mut segments = Vec::with_capacity(count);
    let mut seen_short = vec![false; q_prev];
    let mut seen_long = vec![false; q_n];
    let bits = prec.working_bits() + 2;
    for k in 0..count {
        let (a, oa) = (&xi[k].0, &xi[k].1);
        let (b, ob) = if k + 1 < count {
            (xi[k + 1].0, Float::with_val(bits, &xi[k + 1].1))
        } else {
            (xi[0].0, Float::with_val(bits, 1u32))
        };
        let length = Float::with_val(bits, &ob - oa);
        // Identify the element from its endpoints.
        let mut found = None;
        for kind in [SegmentKind::Short, SegmentKind::Long] {
            let (gap, limit) = match kind {
                SegmentKind::Short => (q_n, q_prev),
                SegmentKind::Long => (q_prev, q_n),
            };
            let index = match (kind, even) {
                (SegmentKind::Short, true) | (SegmentKind::Long, false) => {
                    if b >= gap && b - gap == *a {
                        Some(*a)
                    } else {
                        None
                    }
                }
                _ => {
                    if *a >= gap && a - gap == b {
                        Some(b)
                    } else {
                        None
                    }
                }
            };
            if let Some(index) = index {
                if index < limit {
                    found = Some((kind, index));
                    break;
                }
            }
        }
        let (kind, index) = found.ok_or_else(|| {
            Error::IdentityViolated(format!(
                "level {n}: consecutive endpoints ξ_{a}, ξ_{b} do not bound a partition element"
            ))
        })?;
        let seen = match kind {
            SegmentKind::Short => &mut seen_short[index],
            SegmentKind::Long => &mut seen_long[index],
        };
        if *seen {
            return Err(Error::IdentityViolated(format!(
                "level {n}: element {kind:?} {index} appears twice"
            )));
        }
        *seen = true;
        if length <= 0 {
            return Err(Error::PrecisionExhausted(format!(
                "level {n}: empty segment"
            )));
        }
        segments.push(Segment {
            kind,
            index,
            start: *a,
            end: b,
            length,
        });
    }
    Ok(PartitionLevel {
        n,
        q_n,
        q_prev,
        even,
        xi,
        segments,
        position,
        tie,
    })
}

impl PartitionLevel {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Position of ξ_i in the counterclockwise order, for i < q_n + q_{n−1}.
    pub fn position_of(&self, i: usize) -> Option<usize> {
        self.position.get(i).copied()
    }

    /// The segment that starts at ξ_i.
    pub fn segment_starting_at(&self, i: usize) -> Option<&Segment> {
        self.position_of(i).map(|k| &self.segments[k])
    }

    /// The segment that ends at ξ_i.
    pub fn segment_ending_at(&self, i: usize) -> Option<&Segment> {
        self.position_of(i)
            .map(|k| &self.segments[(k + self.segments.len() - 1) % self.segments.len()])
    }

    pub fn segment(&self, kind: SegmentKind, index: usize) -> Option<&Segment> {
        let (a, _) = oriented(kind, index, self.even, self.q_n, self.q_prev);
        let s = self.segment_starting_at(a)?;
        (s.kind == kind && s.index == index).then_some(s)
    }

    pub fn min_length(&self) -> &BigReal {
        self.segments
            .iter()
            .map(|s| &s.length)
            .min_by(|a, b| a.total_cmp(b))
            .expect("partition is nonempty")
    }

    pub fn max_length(&self) -> &BigReal {
        self.segments
            .iter()
            .map(|s| &s.length)
            .max_by(|a, b| a.total_cmp(b))
            .expect("partition is nonempty")
    }

    /// Σ|segments| − 1.
    pub fn length_defect(&self) -> BigReal {
        let bits = self.segments[0].length.prec() + 16;
        let mut sum = Float::new(bits);
        for s in &self.segments {
            sum += &s.length;
        }
        sum - 1u32
    }

    /// |Δ^(n)_0|.
    pub fn len_cur(&self) -> &BigReal {
        &self.segment(SegmentKind::Short, 0).expect("Δ^(n)_0").length
    }

    /// |Δ^(n−1)_0|.
    pub fn len_prev(&self) -> &BigReal {
        &self
            .segment(SegmentKind::Long, 0)
            .expect("Δ^(n−1)_0")
            .length
    }

    /// Offsets bounding Δ̂^(n−1)_0 = [1 − left, 1) ∪ [0, right] around ξ₀.
    fn neighborhood_arms(&self) -> (&BigReal, &BigReal) {
        let cur = self.len_cur();
        let prev = self.len_prev();
        if self.even {
            (prev, cur)
        } else {
            (cur, prev)
        }
    }

    /// Exact membership of an offset in the closed arc Δ̂^(n−1)_0.
    pub fn in_neighborhood(&self, offset: &BigReal) -> bool {
        let (left, right) = self.neighborhood_arms();
        if *offset <= *right {
            return true;
        }
        let back = Float::with_val(offset.prec() + 2, 1u32 - offset);
        back <= *left
    }

    /// Locates the segment containing `offset`, refusing points within 64u of an endpoint.
    pub fn locate(&self, offset: &BigReal) -> Result<&Segment> {
        let k = match self.xi.binary_search_by(|(_, o)| o.total_cmp(offset)) {
            Ok(k) => {
                return Err(Error::PrecisionExhausted(format!(
                    "point coincides with endpoint ξ_{}",
                    self.xi[k].0
                )))
            }
            Err(k) => k - 1,
        };
        let bits = offset.prec().max(self.tie.prec()) + 2;
        let below = Float::with_val(bits, offset - &self.xi[k].1);
        let above = if k + 1 < self.xi.len() {
            Float::with_val(bits, &self.xi[k + 1].1 - offset)
        } else {
            Float::with_val(bits, 1u32 - offset)
        };
        if below < self.tie || above < self.tie {
            return Err(Error::PrecisionExhausted(
                "point lies within 64u of a partition endpoint".into(),
            ));
        }
        Ok(&self.segments[k])
    }
}

/// i_n(x) from the case table, x given by its offset from ξ₀.
pub fn first_entrance(level: &PartitionLevel, offset: &BigReal) -> Result<usize> {
    let seg = level.locate(offset)?;
    Ok(match (seg.kind, seg.index) {
        (_, 0) => 0,
        (SegmentKind::Short, j) => level.q_prev - j,
        (SegmentKind::Long, i) => level.q_n - i,
    })
}

/// i_n(ξ_i) for an orbit point. Endpoints of 𝒫_n use the index table; deeper points are located.
pub fn first_entrance_orbit(level: &PartitionLevel, orbit: &BreakOrbit, i: usize) -> Result<usize> {
    let (qp, qn) = (level.q_prev, level.q_n);
    if i == 0 {
        return Ok(0);
    }
    if i <= qp {
        return Ok(qp - i);
    }
    if i <= qn {
        return Ok(qn - i);
    }
    if i < qn + qp {
        return Ok(qn + qp - i);
    }
    let off = orbit.offset(i)?;
    if level.in_neighborhood(&off) {
        return Ok(0);
    }
    first_entrance(level, &off)
}

/// Outcome of the refinement identity Δ^(n−1)_i = Δ^(n+1)_i ∪ ⋃_s Δ^(n)_{i+q_{n−1}+s·q_n}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementReport {
    pub n: usize,
    pub parents: usize,
    /// (i, s) pairs where the expected child was missing; s = k_{n+1} marks Δ^(n+1)_i.
    pub violations: Vec<(usize, usize)>,
}

impl RefinementReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the refinement identity for every 0 ≤ i < q_n using levels n and n+1.
pub fn refinement_check(orbit: &BreakOrbit, n: usize) -> Result<RefinementReport> {
    let coarse = build_partition(orbit, n)?;
    let fine = build_partition(orbit, n + 1)?;
    let k = orbit.returns().quotient(n + 1) as usize;
    let (qp, qn) = (coarse.q_prev, coarse.q_n);
    let mut violations = Vec::new();
    for i in 0..qn {
        let parent = coarse
            .segment(SegmentKind::Long, i)
            .ok_or_else(|| Error::IdentityViolated(format!("Δ^(n−1)_{i} missing at level {n}")))?;
        // Walk the fine partition across the parent.
        let mut got = BTreeSet::new();
        let mut pos = fine
            .position_of(parent.start)
            .ok_or_else(|| Error::IdentityViolated(format!("endpoint of Δ^(n−1)_{i} missing")))?;
        let stop = fine
            .position_of(parent.end)
            .ok_or_else(|| Error::IdentityViolated(format!("endpoint of Δ^(n−1)_{i} missing")))?;
        let mut steps = 0;
        while pos != stop && steps <= k + 1 {
            let s = &fine.segments[pos];
            got.insert((s.kind, s.index));
            pos = (pos + 1) % fine.segments.len();
            steps += 1;
        }
        // In 𝒫_{n+1}, Short elements are Δ^(n+1) and Long elements are Δ^(n).
        if !got.remove(&(SegmentKind::Short, i)) {
            violations.push((i, k));
        }
        for s in 0..k {
            if !got.remove(&(SegmentKind::Long, i + qp + s * qn)) {
                violations.push((i, s));
            }
        }
        if !got.is_empty() || pos != stop {
            violations.push((i, usize::MAX));
        }
    }
    Ok(RefinementReport {
        n,
        parents: qn,
        violations,
    })
}

/// Outcome of the set identity for Ξ_m ∩ Δ̌^(n−1)_0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionReport {
    pub n: usize,
    pub m: usize,
    pub lhs: BTreeSet<usize>,
    pub rhs: BTreeSet<usize>,
    /// Indices l whose image ξ_{l+q_{n+1}} fell outside Ξ*_m ∩ Δ̂^(n)_0.
    pub landing_failures: Vec<usize>,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.lhs == self.rhs && self.landing_failures.is_empty()
    }

    /// First index in the symmetric difference of the two sides.
    pub fn offending_index(&self) -> Option<usize> {
        self.lhs.symmetric_difference(&self.rhs).next().copied()
    }
}

/// Distance from ξ₀ measured on the side where Δ^(k)_0 lies.
fn side_distance(offset: &BigReal, even: bool) -> BigReal {
    if even {
        offset.clone()
    } else if offset.is_zero() {
        Float::new(offset.prec())
    } else {
        Float::with_val(offset.prec() + 2, 1u32 - offset)
    }
}

/// Verifies Ξ_m ∩ Δ̌^(n−1)_0 = ⋃_{ξ_l ∈ Ξ_m ∩ Δ^(n)_0 ∖ {ξ_{q_n}}} ⋃_{s<k_{n+1}} ξ_{l+s·q_n+q_{n−1}}
/// together with ξ_{l+q_{n+1}} ∈ Ξ*_m ∩ Δ̂^(n)_0.
pub fn decomposition_check(orbit: &BreakOrbit, n: usize, m: usize) -> Result<DecompositionReport> {
    if m <= n || n == 0 {
        return Err(Error::Invalid(format!(
            "need 1 ≤ n < m, got n = {n}, m = {m}"
        )));
    }
    if m > orbit.depth() || n + 1 > orbit.depth() {
        return Err(Error::Invalid(format!(
            "level {m} beyond orbit depth {}",
            orbit.depth()
        )));
    }
    let cr = orbit.returns();
    let ni = n as i64;
    let (qp, qn, qn1) = (cr.q(ni - 1), cr.q(ni), cr.q(ni + 1));
    let k = cr.quotient(n + 1) as usize;
    let count = cr.q(m as i64) + cr.q(m as i64 - 1);
    let star = count + 1;
    if orbit.len() < star {
        return Err(Error::Invalid("orbit shorter than Ξ*_m".into()));
    }
    // Δ^(n−1)_0 and Δ^(n+1)_0 share the side of parity n−1; Δ^(n)_0 is on the other side.
    let prev_even = (n - 1) % 2 == 0;
    let len_prev = side_distance(&orbit.offset(qp)?, prev_even);
    let len_next = side_distance(&orbit.offset(qn1)?, prev_even);
    let len_cur = side_distance(&orbit.offset(qn)?, n % 2 == 0);
    let mut lhs = BTreeSet::new();
    let mut base = Vec::new();
    for i in 0..count {
        let off = orbit.offset(i)?;
        // Open at ξ_{q_{n+1}}, closed at ξ_{q_{n−1}}.
        let dp = side_distance(&off, prev_even);
        if dp > len_next && dp <= len_prev {
            lhs.insert(i);
        }
        if side_distance(&off, n % 2 == 0) <= len_cur && i != qn {
            base.push(i);
        }
    }
    let mut rhs = BTreeSet::new();
    let mut landing_failures = Vec::new();
    // Δ̂^(n)_0 = Δ^(n+1)_0 ∪ Δ^(n)_0.
    for &l in &base {
        for s in 0..k {
            rhs.insert(l + s * qn + qp);
        }
        let j = l + qn1;
        let ok = if j < star {
            let off = orbit.offset(j)?;
            j == 0
                || side_distance(&off, prev_even) <= len_next
                || side_distance(&off, n % 2 == 0) <= len_cur
        } else {
            false
        };
        if !ok {
            landing_failures.push(l);
        }
    }
    Ok(DecompositionReport {
        n,
        m,
        lhs,
        rhs,
        landing_failures,
    })
}

/// Largest |Δ^(n+k)|/|Δ̂^(n−1)_0| over partition elements inside the neighborhood, with λ^k.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioStats {
    pub n: usize,
    pub k: usize,
    pub max_ratio: BigReal,
    pub lambda: BigReal,
    pub lambda_pow_k: BigReal,
}

/// λ = sqrt(𝔠²/(𝔠²+1)) with 𝔠 = max(c, 1/c).
pub fn contraction_lambda(c: &BigReal) -> BigReal {
    let cc = if *c >= 1 {
        c.clone()
    } else {
        Float::with_val(c.prec(), c.recip_ref())
    };
    let c2 = Float::with_val(c.prec(), cc.square_ref());
    let den = Float::with_val(c.prec(), &c2 + 1u32);
    (c2 / den).sqrt()
}

pub fn ratio_stats(orbit: &BreakOrbit, n: usize, k: usize) -> Result<RatioStats> {
    let outer = build_partition(orbit, n)?;
    let fine = build_partition(orbit, n + k)?;
    let bits = outer.len_cur().prec();
    let hat = Float::with_val(bits, outer.len_cur() + outer.len_prev());
    let mut best = Float::new(bits);
    for seg in &fine.segments {
        let off = &fine.xi[fine.position_of(seg.start).expect("segment start")].1;
        // A segment lies in the neighborhood iff it starts there and does not start at its
        // counterclockwise end.
        let (left, right) = outer.neighborhood_arms();
        let inside = if *off < *right {
            true
        } else {
            let back = Float::with_val(bits, 1u32 - off);
            !off.is_zero() && back <= *left
        };
        if inside {
            let r = Float::with_val(bits, &seg.length / &hat);
            if r > best {
                best = r;
            }
        }
    }
    let lambda = contraction_lambda(&orbit.map().break_size()?);
    let lambda_pow_k = Float::with_val(bits, (&lambda).pow(k as u32));
    Ok(RatioStats {
        n,
        k,
        max_ratio: best,
        lambda,
        lambda_pow_k,
    })
}

/// Spread of the Finzi double ratio and the Denjoy bound at level n.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparability {
    pub n: usize,
    pub min_ratio: BigReal,
    pub max_ratio: BigReal,
    pub variation: BigReal,
    pub max_abs_log_dfqn: BigReal,
    pub finzi_ok: bool,
    pub denjoy_ok: bool,
}

/// For 0 ≤ i < q_{n−1}, J ∈ {Δ^(n)_0, Δ^(n−1)_0} and I = Δ̂^(n−1)_0 computes
/// (|J|/|f^i J|)·(|f^i I|/|I|) and checks it against e^{±v}; also samples |log Df^{q_n}| on
/// Δ^(n−1)_0 against v.
pub fn comparability_diagnostics(
    orbit: &BreakOrbit,
    n: usize,
    variation: &BigReal,
    samples: usize,
) -> Result<Comparability> {
    let level = build_partition(orbit, n)?;
    let bits = level.len_cur().prec();
    let one = Float::with_val(bits, 1u32);
    let mut lo = one.clone();
    let mut hi = one.clone();
    let j0 = level.len_cur().clone();
    let l0 = level.len_prev().clone();
    let i0 = Float::with_val(bits, &j0 + &l0);
    for i in 0..level.q_prev {
        let ji = &level
            .segment(SegmentKind::Short, i)
            .ok_or_else(|| Error::IdentityViolated(format!("Δ^(n)_{i} missing")))?
            .length;
        let li = &level
            .segment(SegmentKind::Long, i)
            .ok_or_else(|| Error::IdentityViolated(format!("Δ^(n−1)_{i} missing")))?
            .length;
        let ii = Float::with_val(bits, ji + li);
        for (j, fj) in [(&j0, ji), (&l0, li)] {
            let r = Float::with_val(bits, j / fj) * &ii / &i0;
            if r < lo {
                lo = r.clone();
            }
            if r > hi {
                hi = r;
            }
        }
    }
    let ev = Float::with_val(bits, variation.exp_ref());
    let emv = Float::with_val(bits, ev.recip_ref());
    let slack = orbit.map().precision().ulps(64.0 * level.len() as f64);
    let finzi_ok =
        lo >= Float::with_val(bits, &emv - &slack) && hi <= Float::with_val(bits, &ev + &slack);

    // Denjoy: |log Df^{q_n}| ≤ v, sampled on Δ^(n−1)_0.
    let map = orbit.map();
    let cr = orbit.returns();
    let delta_prev = cr.delta(n as i64 - 1).clone();
    let xi0 = map.break_point().clone();
    let inside = if delta_prev > 0 {
        Side::Right
    } else {
        Side::Left
    };
    let mut worst = Float::new(bits);
    let samples = samples.max(2);
    for t in 0..samples {
        let frac = Float::with_val(bits, t) / (samples - 1) as u32;
        let x = Float::with_val(bits, &delta_prev * &frac) + &xi0;
        let start = LiftPoint::from_real(map, &x)?;
        let (_, d1, _) = iterate_lift(map, &start, level.q_n, inside)?;
        let a = d1.ln().abs();
        if a > worst {
            worst = a;
        }
    }
    let denjoy_ok = worst <= Float::with_val(bits, variation + &slack);
    Ok(Comparability {
        n,
        min_ratio: lo,
        max_ratio: hi,
        variation: variation.clone(),
        max_abs_log_dfqn: worst,
        finzi_ok,
        denjoy_ok,
    })
}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.kind, self.index).cmp(&(other.kind, other.index)))
    }
}
