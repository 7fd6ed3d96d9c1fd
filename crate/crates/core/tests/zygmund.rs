use renormlab::maps::{BreakGlue, BreakMapSpec, SmoothTerm};
use renormlab::numerics::{make_real, Precision};
use renormlab::zygmund::{
    default_sites, dyadic_scales, second_symmetric_difference, total_variation_log_df,
    zygmund_seminorm, SiteClass,
};
use rug::float::Constant;
use rug::{Float, Rational};

fn r(t: &str) -> Float {
    make_real(t, 288).unwrap()
}

fn p() -> Precision {
    Precision::default()
}

fn glue(s: &str, terms: Vec<SmoothTerm>) -> BreakMapSpec {
    BreakMapSpec::new(
        p(),
        Some(BreakGlue::new(r(s)).unwrap()),
        &r("0.3"),
        terms,
        None,
        &r("0"),
    )
    .unwrap()
}

#[test]
fn glue_second_difference_closed_form() {
    let m = glue("2", vec![]);
    let d = second_symmetric_difference(&m, &r("0.5"), &r("0.25"))
        .unwrap()
        .unwrap();
    // DG(y) = 2/(1+y)²: 32/49 + 32/25 − 16/9.
    let exact = Rational::from((32, 49)) + Rational::from((32, 25)) - Rational::from((16, 9));
    let exact = Float::with_val(300, &exact);
    assert!(Float::with_val(300, &d - &exact).abs() < 1e-70);
    assert!((d.to_f64() - 0.155283).abs() < 1e-6);
    // The ball around 0.1 of radius 0.25 meets the break.
    assert!(second_symmetric_difference(&m, &r("0.1"), &r("0.25"))
        .unwrap()
        .is_none());
    assert!(second_symmetric_difference(&m, &r("0.5"), &r("0.75")).is_err());
}

#[test]
fn rotation_has_zero_seminorm_and_variation() {
    let m = BreakMapSpec::rotation(p(), &r("0.3")).unwrap();
    let stats =
        zygmund_seminorm(&m, &r("3"), &dyadic_scales(288, 20), &default_sites(288)).unwrap();
    assert_eq!(stats.seminorm, 0);
    assert_eq!(total_variation_log_df(&m, 4096).unwrap(), 0);
}

#[test]
fn sine_term_second_difference() {
    let eps = r("0.05");
    let pert = vec![SmoothTerm {
        amplitude: eps.clone(),
        frequency: 3,
    }];
    let m = BreakMapSpec::new(p(), None, &r("0.3"), pert, None, &r("0")).unwrap();
    let two_pi = Float::with_val(300, Constant::Pi) * 6u32;
    for (y, tau) in [("0.37", "0.01"), ("0.6", "0.125"), ("0.2", "0.0001")] {
        let (y, tau) = (r(y), r(tau));
        let d = second_symmetric_difference(&m, &y, &tau).unwrap().unwrap();
        let s = Float::with_val(300, &two_pi * &y).sin();
        let c = Float::with_val(300, &two_pi * &tau).cos();
        let want = -Float::with_val(300, &eps * &s) * (2u32 - c * 2u32);
        assert!(Float::with_val(300, &d - &want).abs() < 1e-65);
        let bound = Float::with_val(300, &two_pi * &tau).square() * &eps;
        assert!(d.abs() <= bound);
    }
}

#[test]
fn glue_variation_is_four_log_two() {
    let m = glue("2", vec![]);
    let v = total_variation_log_df(&m, 4096).unwrap();
    let want = Float::with_val(300, 2u32).ln() * 4u32;
    assert!(Float::with_val(300, &v - &want).abs() < 1e-60);
    assert!(total_variation_log_df(&m, 100).is_err());
}

#[test]
fn variation_grows_under_refinement() {
    let m = glue(
        "1.1",
        vec![SmoothTerm {
            amplitude: r("0.05"),
            frequency: 2,
        }],
    );
    let coarse = total_variation_log_df(&m, 1 << 12).unwrap();
    let fine = total_variation_log_df(&m, 1 << 13).unwrap();
    assert!(fine >= coarse);
    let c = m.break_size().unwrap();
    let jump = Float::with_val(300, c.ln()).abs() * 2u32;
    assert!(coarse >= jump);
}

#[test]
fn glue_ratio_decreases_below_two_to_minus_eight() {
    let m = glue(
        "1.1",
        vec![SmoothTerm {
            amplitude: r("0.05"),
            frequency: 1,
        }],
    );
    let stats =
        zygmund_seminorm(&m, &r("3"), &dyadic_scales(288, 40), &default_sites(288)).unwrap();
    let uni: Vec<_> = stats
        .rows
        .iter()
        .filter(|r| r.class == SiteClass::Uniform && r.tau <= 1.0 / 256.0)
        .collect();
    assert!(uni.len() > 20);
    for w in uni.windows(2) {
        assert!(w[1].max_ratio < w[0].max_ratio);
    }
}
