//! The conjugacy between two break-equivalent maps, realized on the orbit of the break point.

use crate::error::{Error, Result};
use crate::maps::{iterate_lift, BreakOrbit, LiftPoint, Side};
use crate::numerics::BigReal;
use crate::partition::{build_partition, contraction_lambda, first_entrance_orbit, PartitionLevel};
use crate::renorm::{check_break_equivalence, renorm_pair, rescaled_return};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::Float;

/// Matched orbits ξ_i = f^i(ξ₀) and ξ̃_i = f̃^i(ξ̃₀) together with the per-point cocycle terms.
#[derive(Clone, Debug)]
pub struct ConjugacyTable {
    f: BreakOrbit,
    g: BreakOrbit,
    depth: usize,
    /// q_N + q_{N−1}.
    count: usize,
    /// terms[i] = log Df(ξ_i) − log Df̃(ξ̃_i) for i ≥ 1; terms[0] = 0.
    terms: Vec<BigReal>,
    /// prefix[i] = Σ_{t<i} terms[t].
    prefix: Vec<BigReal>,
    /// One-sided terms at ξ₀: (left, right).
    term0: (BigReal, BigReal),
    levels: Vec<PartitionLevel>,
    /// β_n = |Δ̃^(n)_0|/|Δ^(n)_0| for 0 ≤ n ≤ N.
    beta: Vec<BigReal>,
    /// Counterclockwise order of Ξ_N (shared by both orbits).
    order: Vec<usize>,
}

fn log_derivative(orbit: &BreakOrbit, i: usize, side: Side) -> Result<BigReal> {
    let pt = orbit.point(i)?;
    Ok(orbit.map().deriv(&pt.frac, side)?.ln())
}

/// Builds the table to depth N after checking break sizes, quotients and circular order.
pub fn match_orbits(f: &BreakOrbit, g: &BreakOrbit, depth: usize) -> Result<ConjugacyTable> {
    match_orbits_with(f, g, depth, false)
}

/// As [`match_orbits`]; `allow_break_mismatch` skips the break-size comparison.
pub fn match_orbits_with(
    f: &BreakOrbit,
    g: &BreakOrbit,
    depth: usize,
    allow_break_mismatch: bool,
) -> Result<ConjugacyTable> {
    if depth < 2 {
        return Err(Error::Invalid(
            "conjugacy table needs depth at least 2".into(),
        ));
    }
    check_break_equivalence(f, g, depth, allow_break_mismatch)?;
    let mut f = f.clone();
    let mut g = g.clone();
    let nd = depth as i64;
    let count = f.returns().q(nd) + f.returns().q(nd - 1);
    let len = 2 * count + 2;
    f.extend_to(len)?;
    g.extend_to(len)?;

    // Order isomorphism on Ξ_N ∪ {ξ_{q_N+q_{N−1}}}.
    let sorted = |o: &BreakOrbit| -> Result<Vec<usize>> {
        let offs = (0..=count)
            .map(|i| o.offset(i))
            .collect::<Result<Vec<_>>>()?;
        let mut idx: Vec<usize> = (0..=count).collect();
        idx.sort_by(|&a, &b| offs[a].total_cmp(&offs[b]));
        Ok(idx)
    };
    let order_f = sorted(&f)?;
    let order_g = sorted(&g)?;
    if let Some(k) = (0..order_f.len()).find(|&k| order_f[k] != order_g[k]) {
        return Err(Error::Combinatorics(format!(
            "circular order differs at position {k}: ξ_{} vs ξ̃_{}",
            order_f[k], order_g[k]
        )));
    }

    let bits = f.map().precision().working_bits() + 16;
    let mut terms = Vec::with_capacity(len);
    terms.push(Float::new(bits));
    for i in 1..len {
        let t = log_derivative(&f, i, Side::Right)? - log_derivative(&g, i, Side::Right)?;
        terms.push(Float::with_val(bits, t));
    }
    let mut prefix = Vec::with_capacity(len + 1);
    let mut acc = Float::new(bits);
    prefix.push(acc.clone());
    for t in &terms {
        acc += t;
        prefix.push(acc.clone());
    }
    let term0 = (
        Float::with_val(
            bits,
            log_derivative(&f, 0, Side::Left)? - log_derivative(&g, 0, Side::Left)?,
        ),
        Float::with_val(
            bits,
            log_derivative(&f, 0, Side::Right)? - log_derivative(&g, 0, Side::Right)?,
        ),
    );
    let levels = (1..=depth)
        .map(|n| build_partition(&f, n))
        .collect::<Result<Vec<_>>>()?;
    let cr = f.returns();
    let gr = g.returns();
    let beta = (0..=depth as i64)
        .map(|n| {
            let num = Float::with_val(bits, gr.delta(n).abs_ref());
            num / Float::with_val(bits, cr.delta(n).abs_ref())
        })
        .collect();
    Ok(ConjugacyTable {
        f,
        g,
        depth,
        count,
        terms,
        prefix,
        term0,
        levels,
        beta,
        order: order_f,
    })
}

impl ConjugacyTable {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// q_N + q_{N−1}.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn f(&self) -> &BreakOrbit {
        &self.f
    }

    pub fn g(&self) -> &BreakOrbit {
        &self.g
    }

    pub fn level(&self, n: usize) -> Result<&PartitionLevel> {
        if n == 0 || n > self.depth {
            return Err(Error::Invalid(format!(
                "level {n} outside 1..={}",
                self.depth
            )));
        }
        Ok(&self.levels[n - 1])
    }

    /// log Df(ξ_i) − log Df̃(ξ̃_i).
    pub fn term(&self, i: usize) -> Result<&BigReal> {
        if i == 0 {
            return Err(Error::Invalid("the cocycle term at ξ₀ is one-sided".into()));
        }
        self.terms
            .get(i)
            .ok_or_else(|| Error::Invalid(format!("orbit index {i} beyond table")))
    }

    fn sum(&self, from: usize, len: usize) -> Result<BigReal> {
        let to = from + len;
        if to >= self.prefix.len() {
            return Err(Error::Invalid(format!("orbit index {to} beyond table")));
        }
        Ok(Float::with_val(
            self.prefix[0].prec(),
            &self.prefix[to] - &self.prefix[from],
        ))
    }

    pub fn beta(&self, n: usize) -> &BigReal {
        &self.beta[n]
    }

    pub fn betas(&self) -> &[BigReal] {
        &self.beta
    }

    /// Whether ξ_i lies in Δ̂^(n−1)_0.
    pub fn in_neighborhood(&self, n: usize, i: usize) -> Result<bool> {
        Ok(self.level(n)?.in_neighborhood(&self.f.offset(i)?))
    }

    /// i_n(ξ_i).
    pub fn entrance(&self, n: usize, i: usize) -> Result<usize> {
        first_entrance_orbit(self.level(n)?, &self.f, i)
    }

    /// ζ_n(ξ_i) = Σ_{s<i_n(ξ_i)} log Df(ξ_{i+s}) − log Df̃(ξ̃_{i+s}).
    pub fn zeta(&self, n: usize, i: usize) -> Result<BigReal> {
        if i == 0 {
            return Ok(Float::new(self.prefix[0].prec()));
        }
        let e = self.entrance(n, i)?;
        self.sum(i, e)
    }

    /// Λ_n(ξ_i) for ξ_i ∈ Δ̂^(n−1)_0 and i ≥ 1.
    pub fn lambda_at(&self, n: usize, i: usize) -> Result<BigReal> {
        if !self.in_neighborhood(n, i)? {
            return Err(Error::OutOfDomain {
                what: "orbit point",
                value: format!("ξ_{i}"),
                domain: "the renormalization neighborhood",
            });
        }
        let q = self.f.returns().q(n as i64);
        if i == 0 {
            return self.lambda_at_break(n).map(|(_, r)| r);
        }
        self.sum(i, q)
    }

    /// (Λ_n(ξ₀ − 0), Λ_n(ξ₀ + 0)).
    pub fn lambda_at_break(&self, n: usize) -> Result<(BigReal, BigReal)> {
        let q = self.f.returns().q(n as i64);
        let rest = self.sum(1, q - 1)?;
        Ok((
            Float::with_val(rest.prec(), &self.term0.0 + &rest),
            Float::with_val(rest.prec(), &self.term0.1 + &rest),
        ))
    }

    /// Orbit indices i < q_N + q_{N−1} with ξ_i ∈ Δ̂^(n−1)_0.
    pub fn neighborhood_points(&self, n: usize) -> Result<Vec<usize>> {
        let level = self.level(n)?;
        let mut out = Vec::new();
        for i in 0..self.count {
            if level.in_neighborhood(&self.f.offset(i)?) {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Λ_n = max |Λ_n(ξ)| over the orbit points of Ξ_N in Δ̂^(n−1)_0 (both one-sided values at ξ₀).
    pub fn lambda_max(&self, n: usize) -> Result<BigReal> {
        let (l, r) = self.lambda_at_break(n)?;
        let mut best = Float::with_val(l.prec(), l.abs_ref());
        if r.clone().abs() > best {
            best = r.abs();
        }
        for i in self.neighborhood_points(n)? {
            if i == 0 {
                continue;
            }
            let v = self.lambda_at(n, i)?.abs();
            if v > best {
                best = v;
            }
        }
        Ok(best)
    }

    /// The lift position of ξ_i nearest ξ₀ and its counterpart for f̃.
    fn near_lifts(&self, i: usize) -> Result<(BigReal, BigReal)> {
        let near = |o: &BreakOrbit| -> Result<BigReal> {
            let mut s = o.offset(i)?;
            if s > 0.5 {
                s -= 1u32;
            }
            Ok(Float::with_val(s.prec() + 2, &s + o.map().break_point()))
        };
        Ok((near(&self.f)?, near(&self.g)?))
    }

    /// 𝔯_n(ξ_i) and 𝔯̃_n(ξ̃_i).
    pub fn rescaled_points(&self, n: usize, i: usize) -> Result<(BigReal, BigReal)> {
        let pf = renorm_pair(&self.f, n)?;
        let pg = renorm_pair(&self.g, n)?;
        let (x, y) = self.near_lifts(i)?;
        Ok((pf.frame.inverse(&x), pg.frame.inverse(&y)))
    }
}

/// Λ_n(ξ_i) recomputed through the renormalization, log Df_n(𝔯_n ξ_i) − log Df̃_n(𝔯̃_n ξ̃_i).
pub fn lambda_renormalized(table: &ConjugacyTable, n: usize, i: usize) -> Result<BigReal> {
    let pf = renorm_pair(&table.f, n)?;
    let pg = renorm_pair(&table.g, n)?;
    let (z, zt) = table.rescaled_points(n, i)?;
    let a = rescaled_return(&table.f, &pf, &z)?.first.ln();
    let b = rescaled_return(&table.g, &pg, &zt)?.first.ln();
    Ok(a - b)
}

/// Λ_n(ξ₀ ∓ 0) from one-sided derivative products of f^{q_n} and f̃^{q_n}.
pub fn lambda_one_sided(table: &ConjugacyTable, n: usize) -> Result<(BigReal, BigReal)> {
    let q = table.f.returns().q(n as i64);
    let mut out = Vec::new();
    for side in [Side::Left, Side::Right] {
        let lf = LiftPoint::from_real(table.f.map(), table.f.map().break_point())?;
        let lg = LiftPoint::from_real(table.g.map(), table.g.map().break_point())?;
        let (_, df, _) = iterate_lift(table.f.map(), &lf, q, side)?;
        let (_, dg, _) = iterate_lift(table.g.map(), &lg, q, side)?;
        out.push(df.ln() - dg.ln());
    }
    let r = out.pop().expect("two sides");
    let l = out.pop().expect("two sides");
    Ok((l, r))
}

/// Result of the exact identities for ζ_n.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleReport {
    pub n: usize,
    pub points: Vec<usize>,
    /// |ζ_n(f ξ) − ζ_n(ξ) − (log Df̃(h ξ) − log Df(ξ))| per point.
    pub residuals: Vec<BigReal>,
    pub tolerances: Vec<BigReal>,
    pub zeta_at_break: BigReal,
}

impl CocycleReport {
    pub fn ok(&self) -> bool {
        self.zeta_at_break.is_zero()
            && self
                .residuals
                .iter()
                .zip(&self.tolerances)
                .all(|(r, t)| r <= t)
    }
}

/// Checks ζ_n(ξ_{i+1}) − ζ_n(ξ_i) = log Df̃(ξ̃_i) − log Df(ξ_i) at `samples` seeded orbit points
/// with i_n(ξ_i) ≥ 1; the right side is evaluated afresh from the maps.
pub fn cocycle_check(
    table: &ConjugacyTable,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<CocycleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = table.f.map().precision().unit_roundoff();
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    let mut tolerances = Vec::new();
    let mut attempts = 0;
    while points.len() < samples {
        attempts += 1;
        if attempts > 100 * samples + 1000 {
            return Err(Error::Invalid(format!(
                "too few orbit points with i_{n} ≥ 1"
            )));
        }
        let i = rng.gen_range(1..table.count);
        let e = table.entrance(n, i)?;
        if e == 0 {
            continue;
        }
        let lhs = table.zeta(n, i + 1)? - table.zeta(n, i)?;
        let rhs = -(log_derivative(&table.f, i, Side::Right)?
            - log_derivative(&table.g, i, Side::Right)?);
        let res = Float::with_val(lhs.prec(), &lhs - &rhs).abs();
        residuals.push(res);
        tolerances.push(Float::with_val(u.prec(), &u * (64 * e) as u32));
        points.push(i);
    }
    Ok(CocycleReport {
        n,
        points,
        residuals,
        tolerances,
        zeta_at_break: table.zeta(n, 0)?,
    })
}

/// Violations of the closed-form tables for i_{n+1} − i_n on orbit points and of the exact zero cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseReport {
    pub n: usize,
    pub checked: usize,
    /// (orbit index, case label).
    pub violations: Vec<(usize, &'static str)>,
}

impl CaseReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Case II (ξ_i ∈ Ξ_n) and Case III (a to d) (ξ_i ∈ Ξ_{n+1} ∖ Ξ_n) at level n; needs n + 1 ≤ N.
pub fn entrance_case_check(table: &ConjugacyTable, n: usize) -> Result<CaseReport> {
    if n + 1 > table.depth {
        return Err(Error::Invalid(format!(
            "case tables at level {n} need depth {}",
            n + 1
        )));
    }
    let cr = table.f.returns();
    let ni = n as i64;
    let (qp, qn, qn1) = (cr.q(ni - 1), cr.q(ni), cr.q(ni + 1));
    let k = cr.quotient(n + 1) as usize;
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut expect =
        |i: usize, want_n: usize, want_n1: usize, label: &'static str, zero: bool| -> Result<()> {
            checked += 1;
            let (en, en1) = (table.entrance(n, i)?, table.entrance(n + 1, i)?);
            if en != want_n || en1 != want_n1 {
                violations.push((i, label));
            } else if zero && table.zeta(n + 1, i)? != table.zeta(n, i)? {
                violations.push((i, label));
            }
            Ok(())
        };
    expect(0, 0, 0, "II:i=0", true)?;
    for i in 1..qn + qp {
        if i <= qp {
            expect(i, qp - i, qn - i, "II:1<=i<=q_{n-1}", false)?;
        } else if i <= qn {
            expect(i, qn - i, qn - i, "II:q_{n-1}<i<=q_n", true)?;
        } else {
            expect(i, qn + qp - i, qn1 - i, "II:q_n<i<q_n+q_{n-1}", false)?;
        }
    }
    for i in qn + qp..qn1 + qn {
        if i < qn1 {
            let r = i - qp;
            let (l, i1) = (r / qn, r % qn);
            if i1 == 0 {
                expect(i, 0, (k - l) * qn, "IIIa", false)?;
            } else {
                expect(i, qn - i1, qn1 - i, "IIIb", false)?;
            }
        } else if i == qn1 {
            expect(i, 0, 0, "IIIc", true)?;
        } else {
            let i1 = i - qn1;
            expect(i, qn - i1, qn - i1, "IIId", true)?;
        }
    }
    Ok(CaseReport {
        n,
        checked,
        violations,
    })
}

/// max over Ξ_{n+2} of |ζ_{n+1} − ζ_n| against k_nΛ_{n−1} + k_{n+1}Λ_n.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyReport {
    pub n: usize,
    pub increment: BigReal,
    pub bound: BigReal,
    pub slack: BigReal,
}

impl CauchyReport {
    pub fn ok(&self) -> bool {
        self.increment <= Float::with_val(self.bound.prec(), &self.bound + &self.slack)
    }
}

pub fn zeta_increment(table: &ConjugacyTable, n: usize) -> Result<BigReal> {
    let cr = table.f.returns();
    let top = (n + 2).min(table.depth) as i64;
    let m = cr.q(top) + cr.q(top - 1);
    let mut best = Float::new(table.prefix[0].prec());
    for i in 0..m {
        let d = (table.zeta(n + 1, i)? - table.zeta(n, i)?).abs();
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

pub fn zeta_cauchy_check(table: &ConjugacyTable, n: usize) -> Result<CauchyReport> {
    if n < 2 || n + 1 > table.depth {
        return Err(Error::Invalid(format!(
            "Cauchy check at level {n} needs 2 ≤ n < N"
        )));
    }
    let cr = table.f.returns();
    let increment = zeta_increment(table, n)?;
    let kn = cr.quotient(n) as u32;
    let kn1 = cr.quotient(n + 1) as u32;
    let bound = table.lambda_max(n - 1)? * kn + table.lambda_max(n)? * kn1;
    let q = cr.q(n as i64 + 1);
    let slack = table.f.map().precision().ulps(128.0 * q as f64);
    Ok(CauchyReport {
        n,
        increment,
        bound,
        slack,
    })
}

/// Dh on Ξ_N and its comparison with matched-gap slopes over 𝒫_N.
#[derive(Clone, Debug, PartialEq)]
pub struct DhReport {
    pub depth: usize,
    pub beta: BigReal,
    /// |log β_N − log β_{N−1}|.
    pub beta_increment: BigReal,
    /// Dh(ξ_i) = β_N·exp(ζ_N(ξ_i)) for i < q_N + q_{N−1}.
    pub dh: Vec<BigReal>,
    /// max_i |gap ratio / Dh(ξ_i) − 1| over the 𝒫_N segment starting at ξ_i.
    pub max_rel_gap: BigReal,
    /// Extrapolated bound 2Σ_{m>N} k_mΛ_{m−1} on the remaining change of ζ, if the fit decays.
    pub zeta_tail: Option<f64>,
}

/// β_n increments |log β_n − log β_{n−1}| for 1 ≤ n ≤ N.
pub fn beta_increments(table: &ConjugacyTable) -> Vec<BigReal> {
    (1..table.beta.len())
        .map(|n| {
            let a = Float::with_val(table.beta[n].prec(), table.beta[n].ln_ref());
            let b = Float::with_val(table.beta[n].prec(), table.beta[n - 1].ln_ref());
            (a - b).abs()
        })
        .collect()
}

/// Dh at level m ≤ N using ζ_m and β_m on Ξ_m.
pub fn dh_at_level(table: &ConjugacyTable, m: usize) -> Result<Vec<BigReal>> {
    let cr = table.f.returns();
    let count = cr.q(m as i64) + cr.q(m as i64 - 1);
    (0..count)
        .map(|i| Ok(table.zeta(m, i)?.exp() * &table.beta[m]))
        .collect()
}

pub fn dh_construct(table: &ConjugacyTable) -> Result<DhReport> {
    let n = table.depth;
    let dh = dh_at_level(table, n)?;
    let level = table.level(n)?;
    let bits = table.prefix[0].prec();
    let mut worst = Float::new(bits);
    for seg in &level.segments {
        let i = seg.start;
        let (a, b) = (seg.start, seg.end);
        let mut gap_g = Float::with_val(bits, table.g.offset(b)?) - table.g.offset(a)?;
        if gap_g < 0 {
            gap_g += 1u32;
        }
        let ratio = gap_g / &seg.length;
        let rel = (ratio / &dh[i] - 1u32).abs();
        if rel > worst {
            worst = rel;
        }
    }
    let inc = beta_increments(table);
    let lambdas = (1..n)
        .map(|m| table.lambda_max(m).map(|v| v.to_f64()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DhReport {
        depth: n,
        beta: table.beta[n].clone(),
        beta_increment: inc[n - 1].clone(),
        dh,
        max_rel_gap: worst,
        zeta_tail: zeta_tail_bound(table, &lambdas),
    })
}

/// 2·k_max·Λ_{N−1}·Σ_{j≥1} e^{−rj}, r fitted on the last half of the Λ sequence; `None` without decay.
fn zeta_tail_bound(table: &ConjugacyTable, lambdas: &[f64]) -> Option<f64> {
    let half = lambdas.len() / 2;
    let ns: Vec<usize> = (half + 1..=lambdas.len()).collect();
    let ys = &lambdas[half..];
    let (_, rate) = crate::renorm::decay_fits(&ns, ys)?;
    if !(rate > 0.0) {
        return None;
    }
    let kmax = table
        .f
        .returns()
        .target
        .quotients()
        .iter()
        .copied()
        .max()
        .unwrap_or(1) as f64;
    let last = *lambdas.last()?;
    let q = (-rate).exp();
    Some(2.0 * kmax * last * q / (1.0 - q))
}

/// 𝔡_n(ξ_i) = |𝔯_n(ξ_i) − 𝔯̃_n(ξ̃_i)| for ξ_i ∈ Δ̂^(n−1)_0.
pub fn rescaled_distance(table: &ConjugacyTable, n: usize, i: usize) -> Result<BigReal> {
    if !table.in_neighborhood(n, i)? {
        return Err(Error::OutOfDomain {
            what: "orbit point",
            value: format!("ξ_{i}"),
            domain: "the renormalization neighborhood",
        });
    }
    let (a, b) = table.rescaled_points(n, i)?;
    Ok((a - b).abs())
}

/// One row of the rescaled-distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceRow {
    pub n: usize,
    /// Level ℓ whose extended endpoint set was scanned.
    pub ell: usize,
    /// n + ⌊α log_κ n⌋ before capping at the table depth.
    pub ell_uncapped: usize,
    pub d_max: BigReal,
    pub points: usize,
}

/// max 𝔡_n over Ξ*_ℓ ∩ Δ̂^(n−1)_0 with ℓ = n + ⌊α log_κ n⌋, capped at the table depth.
pub fn d_table(
    table: &ConjugacyTable,
    levels: impl IntoIterator<Item = usize>,
    alpha: f64,
    kappa: f64,
) -> Result<Vec<DistanceRow>> {
    if !(kappa > 1.0) {
        return Err(Error::OutOfDomain {
            what: "kappa",
            value: kappa.to_string(),
            domain: "(1, inf)",
        });
    }
    let cr = table.f.returns();
    let mut rows = Vec::new();
    for n in levels {
        let shift = (alpha * (n as f64).ln() / kappa.ln()).floor().max(0.0) as usize;
        let ell_uncapped = n + shift;
        let ell = ell_uncapped.min(table.depth);
        let star = cr.q(ell as i64) + cr.q(ell as i64 - 1);
        let level = table.level(n)?;
        let mut best = Float::new(table.prefix[0].prec());
        let mut points = 0;
        for i in 0..=star {
            if level.in_neighborhood(&table.f.offset(i)?) {
                points += 1;
                let d = rescaled_distance(table, n, i)?;
                if d > best {
                    best = d;
                }
            }
        }
        rows.push(DistanceRow {
            n,
            ell,
            ell_uncapped,
            d_max: best,
            points,
        });
    }
    Ok(rows)
}

/// Predicates of the admissibility condition together with λ and κ.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    /// c^{4m} − c² < 1 for c > 1; c^{4m+2} + c^{4m} > 1 for c < 1.
    pub in_d_set: bool,
    /// 1/λ > κ.
    pub lambda_kappa_ok: bool,
    pub lambda: BigReal,
    pub kappa: BigReal,
}

pub fn admissibility(c: &BigReal, m: u32) -> Result<Admissibility> {
    if !(*c > 0) || *c == 1 {
        return Err(Error::OutOfDomain {
            what: "c",
            value: c.to_string_radix(10, Some(20)),
            domain: "(0, 1) or (1, inf)",
        });
    }
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let bits = c.prec() + 16;
    let c4m = Float::with_val(bits, c.pow(4 * m));
    let in_d_set = if *c > 1 {
        Float::with_val(bits, &c4m - Float::with_val(bits, c.square_ref())) < 1
    } else {
        Float::with_val(bits, Float::with_val(bits, c.pow(4 * m + 2)) + &c4m) > 1
    };
    let lambda = contraction_lambda(&Float::with_val(bits, c));
    let frak = if *c > 1 {
        Float::with_val(bits, c)
    } else {
        Float::with_val(bits, c.recip_ref())
    };
    let kappa = Float::with_val(bits, frak.pow(2 * m));
    let lambda_kappa_ok = Float::with_val(bits, lambda.recip_ref()) > kappa;
    Ok(Admissibility {
        in_d_set,
        lambda_kappa_ok,
        lambda,
        kappa,
    })
}

/// ω_γ(δ) = |log δ|^{−(γ/2 − 1)}.
pub fn omega_gamma(delta: &BigReal, gamma: &BigReal) -> BigReal {
    let bits = delta.prec().max(gamma.prec());
    let l = Float::with_val(bits, delta.ln_ref()).abs();
    let e = Float::with_val(bits, gamma / 2u32) - 1u32;
    Float::with_val(bits, (&l).pow(&e)).recip()
}

/// One dyadic distance bin of the modulus estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusBin {
    /// Distances in [2^{−j−1}, 2^{−j}).
    pub j: u32,
    pub pairs: usize,
    pub max_stat: BigReal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusEstimate {
    pub level: usize,
    pub statistic: BigReal,
    /// Bins without any pair are absent.
    pub bins: Vec<ModulusBin>,
}

/// max over pairs of |log Dh(ξ_j) − log Dh(ξ_i)|·|log|ξ_j − ξ_i||^{γ/2−1}, binned dyadically.
///
/// Pairs are all 𝒫_m-adjacent endpoints plus `random_pairs` seeded pairs per bin; only bins with
/// upper edge at most `max_scale` are kept.
pub fn modulus_estimate(
    table: &ConjugacyTable,
    m: usize,
    gamma: &BigReal,
    max_scale: f64,
    random_pairs: usize,
    seed: u64,
) -> Result<ModulusEstimate> {
    let level = table.level(m)?;
    let cr = table.f.returns();
    let count = cr.q(m as i64) + cr.q(m as i64 - 1);
    let bits = table.prefix[0].prec();
    // log Dh = log β_m + ζ_m; the constant cancels in differences.
    let logs = (0..count)
        .map(|i| table.zeta(m, i))
        .collect::<Result<Vec<_>>>()?;
    let pos: Vec<BigReal> = level.xi.iter().map(|(_, o)| o.clone()).collect();
    let idx: Vec<usize> = level.xi.iter().map(|(i, _)| *i).collect();
    let exponent = Float::with_val(bits, gamma / 2u32) - 1u32;
    let j_min = (-(max_scale.log2())).ceil().max(0.0) as u32;
    let min_len = level.min_length().to_f64();
    let j_max = (-(min_len.log2())).floor() as u32 + 1;
    let nb = (j_max.saturating_sub(j_min) + 1) as usize;
    let mut best: Vec<Option<BigReal>> = vec![None; nb];
    let mut counts = vec![0usize; nb];
    let mut record = |a: usize, b: usize| {
        // Circle distance between sorted positions a and b.
        let mut d = Float::with_val(bits, &pos[b] - &pos[a]).abs();
        if d > 0.5 {
            d = Float::with_val(bits, 1u32 - &d);
        }
        if d.is_zero() {
            return;
        }
        let df = d.to_f64();
        let j = (-(df.log2())).floor() as i64;
        if j < j_min as i64 || j > j_max as i64 {
            return;
        }
        let k = (j as u32 - j_min) as usize;
        let w = Float::with_val(bits, Float::with_val(bits, d.ln_ref()).abs().pow(&exponent));
        let s = Float::with_val(bits, &logs[idx[b]] - &logs[idx[a]]).abs() * w;
        counts[k] += 1;
        match &best[k] {
            Some(cur) if *cur >= s => {}
            _ => best[k] = Some(s),
        }
    };
    let n = pos.len();
    for a in 0..n {
        record(a, (a + 1) % n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in j_min..=j_max {
        let (lo, hi) = (2f64.powi(-(j as i32) - 1), 2f64.powi(-(j as i32)));
        let mut made = 0;
        let mut tries = 0;
        while made < random_pairs && tries < 4 * random_pairs {
            tries += 1;
            let a = rng.gen_range(0..n);
            let d = lo * (hi / lo).powf(rng.gen::<f64>());
            let target = Float::with_val(bits, &pos[a] + d);
            let target = if target >= 1 { target - 1u32 } else { target };
            let b = match pos.binary_search_by(|p| p.total_cmp(&target)) {
                Ok(b) => b,
                Err(b) => b % n,
            };
            if b != a {
                record(a, b);
                made += 1;
            }
        }
    }
    let mut bins = Vec::new();
    let mut statistic = Float::new(bits);
    for (k, b) in best.into_iter().enumerate() {
        if let Some(v) = b {
            if v > statistic {
                statistic = v.clone();
            }
            bins.push(ModulusBin {
                j: j_min + k as u32,
                pairs: counts[k],
                max_stat: v,
            });
        }
    }
    Ok(ModulusEstimate {
        level: m,
        statistic,
        bins,
    })
}

/// The conjugacy on the circle by monotone piecewise-linear interpolation on Ξ_N; exact on orbit points.
pub fn conjugacy_at(table: &ConjugacyTable, x: &BigReal) -> Result<BigReal> {
    let bits = table.prefix[0].prec();
    let xi0 = table.f.map().break_point();
    let mut o = Float::with_val(bits, x - xi0);
    o = Float::with_val(bits, o.fract_ref());
    if o < 0 {
        o += 1u32;
    }
    let offs = table
        .order
        .iter()
        .map(|&i| table.f.offset(i))
        .collect::<Result<Vec<_>>>()?;
    let k = match offs.binary_search_by(|p| p.total_cmp(&o)) {
        Ok(k) => {
            let y = table.g.offset(table.order[k])? + table.g.map().break_point();
            return Ok(Float::with_val(bits, y.fract_ref()));
        }
        Err(k) => k - 1,
    };
    let a = &offs[k];
    let ga = table.g.offset(table.order[k])?;
    let (b, gb) = if k + 1 < offs.len() {
        (offs[k + 1].clone(), table.g.offset(table.order[k + 1])?)
    } else {
        (Float::with_val(bits, 1u32), Float::with_val(bits, 1u32))
    };
    let t = Float::with_val(bits, &o - a) / Float::with_val(bits, &b - a);
    let y = Float::with_val(bits, &gb - &ga) * t + ga + table.g.map().break_point();
    let mut y = Float::with_val(bits, y.fract_ref());
    if y < 0 {
        y += 1u32;
    }
    Ok(y)
}
