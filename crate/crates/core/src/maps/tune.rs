use super::orbit::scan;
use super::BreakMapSpec;
use crate::error::{Error, Result};
use crate::numerics::BigReal;
use crate::rotations::RotationTarget;
use rug::Float;
use std::cmp::Ordering;

/// Bisects ω ∈ [0, 1) until the closest returns of the family member reproduce the first
/// `depth` quotients of `target`.
///
/// At the first disagreeing level j (1-based), a larger quotient than the target at odd j
/// means the rotation number is too small; parity flips the direction at even j.
pub fn tune_offset(
    family: &BreakMapSpec,
    target: &RotationTarget,
    depth: usize,
) -> Result<BigReal> {
    if depth == 0 || target.depth() < depth {
        return Err(Error::Invalid(format!(
            "target of depth {} cannot pin {depth} quotients",
            target.depth()
        )));
    }
    let caps = &target.quotients()[..depth];
    let prec = family.precision();
    let w = prec.working_bits();
    let mut lo = Float::new(w);
    let mut hi = Float::with_val(w, 1u32);
    let tiny = prec.ulps(64.0);
    for _ in 0..w {
        let mid = Float::with_val(w, &lo + &hi) / 2u32;
        let member = family.with_omega(&mid)?;
        let s = scan(&member, depth, Some(caps), false, false)?;
        match s.diverged {
            None => {
                if s.min_abs < tiny {
                    return Err(Error::PrecisionExhausted(
                        "tuned map has a closest return within 64u of the break point".into(),
                    ));
                }
                return Ok(member.omega().clone());
            }
            Some((level, ord)) => {
                let odd = level % 2 == 1;
                if odd == (ord == Ordering::Greater) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "bisection on omega did not reproduce {depth} quotients; the family may not be monotone in omega"
    )))
}

/// Tunes and returns the tuned family member.
pub fn tuned_member(
    family: &BreakMapSpec,
    target: &RotationTarget,
    depth: usize,
) -> Result<BreakMapSpec> {
    let omega = tune_offset(family, target, depth)?;
    family.with_omega(&omega)
}
