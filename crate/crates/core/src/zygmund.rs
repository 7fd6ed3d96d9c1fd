//! Second symmetric differences of Df, the logarithmic Zygmund seminorm and the variation of log Df.

use crate::error::{Error, Result};
use crate::maps::{BreakMapSpec, Scratch};
use crate::numerics::BigReal;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

/// Which family of sample sites a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteClass {
    Uniform,
    NearBreak,
}

impl SiteClass {
    pub fn label(self) -> &'static str {
        match self {
            SiteClass::Uniform => "uniform",
            SiteClass::NearBreak => "near-break",
        }
    }
}

/// A sample site, given by its offset y ∈ (0, 1) from ξ₀.
#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub offset: BigReal,
    pub class: SiteClass,
}

fn df_at(map: &BreakMapSpec, scratch: &mut Scratch, y: &BigReal) -> BigReal {
    scratch.local(map, y, false);
    scratch.first.clone()
}

/// ∇²f(ξ, τ) = Df(ξ+τ) + Df(ξ−τ) − 2Df(ξ) for ξ = ξ₀ + y.
///
/// Returns `None` when the closed τ-ball around ξ meets ξ₀.
pub fn second_symmetric_difference(
    map: &BreakMapSpec,
    y: &BigReal,
    tau: &BigReal,
) -> Result<Option<BigReal>> {
    let mut scratch = Scratch::new(map);
    ssd(map, &mut scratch, y, tau)
}

fn ssd(
    map: &BreakMapSpec,
    scratch: &mut Scratch,
    y: &BigReal,
    tau: &BigReal,
) -> Result<Option<BigReal>> {
    if !(*tau > 0 && *tau <= 0.5) {
        return Err(Error::OutOfDomain {
            what: "tau",
            value: tau.to_string_radix(10, Some(12)),
            domain: "(0, 1/2]",
        });
    }
    if !(*y > 0 && *y < 1) {
        return Err(Error::OutOfDomain {
            what: "site offset",
            value: y.to_string_radix(10, Some(12)),
            domain: "(0, 1)",
        });
    }
    let bits = map.precision().working_bits() + 8;
    let lo = Float::with_val(bits, y - tau);
    let hi = Float::with_val(bits, y + tau);
    if lo <= 0 || hi >= 1 {
        return Ok(None);
    }
    let mut d = df_at(map, scratch, &hi);
    d += df_at(map, scratch, &lo);
    let mid = df_at(map, scratch, y);
    d -= Float::with_val(bits, &mid * 2u32);
    Ok(Some(d))
}

/// Z_γ(τ) = |log τ|^{−γ}.
pub fn zygmund_weight(tau: &BigReal, gamma: &BigReal) -> BigReal {
    let l = Float::with_val(tau.prec(), tau.ln_ref()).abs();
    Float::with_val(tau.prec(), (&l).pow(gamma)).recip()
}

/// 512 uniform sites plus 64 sites on each side accumulating geometrically at ξ₀.
///
/// The uniform sites carry an irrational phase so that dyadic frequencies do not vanish on them.
pub fn default_sites(bits: u32) -> Vec<Site> {
    let mut sites = Vec::with_capacity(512 + 128);
    let phase = (Float::with_val(bits, 5u32).sqrt() - 1u32) / 2u32;
    for i in 0..512u32 {
        let y = Float::with_val(bits, &phase + i) / 512u32;
        sites.push(Site {
            offset: y,
            class: SiteClass::Uniform,
        });
    }
    for j in 0..64u32 {
        // d_j = 2^{-2-j/2}
        let e = Float::with_val(bits, -(4 + j as i32)) / 2u32;
        let d = Float::with_val(bits, e.exp2_ref());
        sites.push(Site {
            offset: d.clone(),
            class: SiteClass::NearBreak,
        });
        sites.push(Site {
            offset: Float::with_val(bits, 1u32 - &d),
            class: SiteClass::NearBreak,
        });
    }
    sites
}

/// Effective series depth: K for a map with a lacunary term, otherwise B/4.
pub fn effective_depth(map: &BreakMapSpec) -> u32 {
    let b = map.precision().bits();
    match map.zygmund() {
        Some(z) => z.depth.min(b / 4),
        None => b / 4,
    }
}

/// Dyadic scales τ = 2^{−j} for j = 2..=j_max.
pub fn dyadic_scales(bits: u32, j_max: u32) -> Vec<BigReal> {
    (2..=j_max.max(2))
        .map(|j| Float::with_val(bits, 1u32) >> j)
        .collect()
}

/// One (τ, site class) cell of the seminorm table.
#[derive(Clone, Debug, PartialEq)]
pub struct ZygmundRow {
    pub tau: BigReal,
    pub class: SiteClass,
    pub max_ratio: BigReal,
    pub samples: usize,
    pub excluded: usize,
}

/// Seminorm estimate and its breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct ZygmundStats {
    pub gamma: BigReal,
    /// sup of |∇²f(ξ, τ)|/(τ·Z_γ(τ)) over straddle-free samples.
    pub seminorm: BigReal,
    pub rows: Vec<ZygmundRow>,
    pub tau_range: (BigReal, BigReal),
    pub variation: Option<BigReal>,
}

pub fn zygmund_seminorm(
    map: &BreakMapSpec,
    gamma: &BigReal,
    scales: &[BigReal],
    sites: &[Site],
) -> Result<ZygmundStats> {
    if !(*gamma > 0) {
        return Err(Error::OutOfDomain {
            what: "gamma",
            value: gamma.to_string_radix(10, Some(12)),
            domain: "(0, inf)",
        });
    }
    if scales.is_empty() || sites.is_empty() {
        return Err(Error::Empty);
    }
    let bits = map.precision().working_bits() + 8;
    let mut scratch = Scratch::new(map);
    let mut rows = Vec::new();
    let mut seminorm = Float::new(bits);
    for tau in scales {
        let denom = Float::with_val(
            bits,
            tau * zygmund_weight(&Float::with_val(bits, tau), gamma),
        );
        for class in [SiteClass::Uniform, SiteClass::NearBreak] {
            let mut best = Float::new(bits);
            let (mut samples, mut excluded) = (0, 0);
            for site in sites.iter().filter(|s| s.class == class) {
                match ssd(map, &mut scratch, &site.offset, tau)? {
                    Some(d) => {
                        samples += 1;
                        let ratio = Float::with_val(bits, d.abs_ref()) / &denom;
                        if ratio > best {
                            best = ratio;
                        }
                    }
                    None => excluded += 1,
                }
            }
            if samples > 0 && best > seminorm {
                seminorm = best.clone();
            }
            rows.push(ZygmundRow {
                tau: tau.clone(),
                class,
                max_ratio: best,
                samples,
                excluded,
            });
        }
    }
    let lo = scales
        .iter()
        .min_by(|a, b| a.total_cmp(b))
        .expect("nonempty")
        .clone();
    let hi = scales
        .iter()
        .max_by(|a, b| a.total_cmp(b))
        .expect("nonempty")
        .clone();
    Ok(ZygmundStats {
        gamma: gamma.clone(),
        seminorm,
        rows,
        tau_range: (lo, hi),
        variation: None,
    })
}

/// Σ|log Df(y_{i+1}) − log Df(y_i)| over y_i = i/N on [0, 1], plus the jump at ξ₀.
///
/// `grid_points` is N; doubling it refines the grid.
pub fn total_variation_log_df(map: &BreakMapSpec, grid_points: usize) -> Result<BigReal> {
    if grid_points < 4096 {
        return Err(Error::Invalid(format!(
            "variation grid needs at least 4096 points, got {grid_points}"
        )));
    }
    let bits = map.precision().working_bits() + 8;
    let mut scratch = Scratch::new(map);
    let steps = grid_points;
    let mut total = Float::new(bits);
    let mut prev: Option<BigReal> = None;
    let mut first = Float::new(bits);
    for i in 0..=steps {
        let y = Float::with_val(bits, i) / steps as u32;
        let l = df_at(map, &mut scratch, &y).ln();
        if let Some(p) = &prev {
            total += Float::with_val(bits, &l - p).abs();
        } else {
            first = l.clone();
        }
        prev = Some(l);
    }
    // y = 1 is ξ₀ − 0 and y = 0 is ξ₀ + 0.
    total += Float::with_val(bits, prev.expect("grid nonempty") - &first).abs();
    Ok(total)
}
