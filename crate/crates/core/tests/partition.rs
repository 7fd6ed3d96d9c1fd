use renormlab::maps::{tuned_member, BreakGlue, BreakMapSpec, BreakOrbit};
use renormlab::numerics::{make_real, Precision};
use renormlab::partition::{
    build_partition, contraction_lambda, decomposition_check, first_entrance, first_entrance_orbit,
    ratio_stats, refinement_check, SegmentKind,
};
use renormlab::rotations::RotationTarget;
use rug::Float;
use std::sync::OnceLock;

fn r(t: &str) -> Float {
    make_real(t, 288).unwrap()
}

fn golden() -> Float {
    (Float::with_val(300, 5).sqrt() - 1u32) / 2u32
}

fn rotation_orbit() -> BreakOrbit {
    let m = BreakMapSpec::rotation(Precision::default(), &golden()).unwrap();
    BreakOrbit::new(&m, 12).unwrap()
}

fn break_orbit() -> &'static BreakOrbit {
    static ORBIT: OnceLock<BreakOrbit> = OnceLock::new();
    ORBIT.get_or_init(|| {
        let family = BreakMapSpec::new(
            Precision::default(),
            Some(BreakGlue::new(r("2")).unwrap()),
            &r("0.5"),
            vec![],
            None,
            &r("0"),
        )
        .unwrap();
        let m = tuned_member(&family, &RotationTarget::golden(26), 26).unwrap();
        let mut orbit = BreakOrbit::new(&m, 19).unwrap();
        let cr = orbit.returns();
        let need = cr.q(19) + cr.q(18) + 2;
        orbit.extend_to(need).unwrap();
        orbit
    })
}

#[test]
fn rotation_partition_endpoints_and_lengths() {
    let orbit = rotation_orbit();
    let level = build_partition(&orbit, 3).unwrap();
    // q_3 = 3, q_2 = 2.
    assert_eq!(level.len(), 5);
    let w = golden();
    for (i, off) in &level.xi {
        let expect = Float::with_val(300, &w * *i as u32).fract();
        assert!(Float::with_val(300, off - &expect).abs() < 1e-70);
    }
    assert!(level.length_defect().abs() < 1e-70);
    // Two lengths only, |δ_2| and |δ_3|.
    for s in &level.segments {
        let want = match s.kind {
            SegmentKind::Short => orbit.returns().delta(3).clone().abs(),
            SegmentKind::Long => orbit.returns().delta(2).clone().abs(),
        };
        assert!(Float::with_val(300, &s.length - &want).abs() < 1e-70);
    }
}

#[test]
fn first_entrance_on_rotation() {
    let orbit = rotation_orbit();
    let level = build_partition(&orbit, 4).unwrap();
    let seg = level.segment(SegmentKind::Short, 2).unwrap();
    let a = &level.xi[level.position_of(seg.start).unwrap()].1;
    let mid = Float::with_val(300, a + Float::with_val(300, &seg.length / 2u32));
    // Δ^(4)_2 enters the neighborhood after q_3 − 2 = 1 step.
    assert_eq!(first_entrance(&level, &mid).unwrap(), 1);
    assert!(first_entrance(&level, a).is_err());
    assert_eq!(first_entrance_orbit(&level, &orbit, 0).unwrap(), 0);
    assert_eq!(first_entrance_orbit(&level, &orbit, 3).unwrap(), 0);
    assert_eq!(first_entrance_orbit(&level, &orbit, 2).unwrap(), 1);
    assert_eq!(first_entrance_orbit(&level, &orbit, 4).unwrap(), 1);
    assert_eq!(first_entrance_orbit(&level, &orbit, 6).unwrap(), 2);
}

#[test]
fn refinement_holds_on_break_map() {
    let orbit = break_orbit();
    for n in 1..=16 {
        let rep = refinement_check(orbit, n).unwrap();
        assert!(rep.ok(), "n = {n}: {:?}", rep.violations);
    }
}

#[test]
fn orbit_decomposition_holds_on_break_map() {
    let orbit = break_orbit();
    for n in 1..=16 {
        for m in n + 1..=n + 2 {
            let rep = decomposition_check(orbit, n, m).unwrap();
            assert!(
                rep.ok(),
                "n = {n}, m = {m}: offending {:?}, landing {:?}",
                rep.offending_index(),
                rep.landing_failures
            );
        }
    }
}

#[test]
fn segment_ratios_shrink_geometrically() {
    let orbit = break_orbit();
    let lam = contraction_lambda(&r("2"));
    // λ² = 4/5 for c = 2.
    assert!((Float::with_val(288, lam.square_ref()) - r("0.8")).abs() < 1e-70);
    for k in [1usize, 2, 4] {
        let st = ratio_stats(orbit, 8, k).unwrap();
        assert!(st.max_ratio > 0 && st.max_ratio < 1);
        assert!(st.max_ratio.to_f64() < 4.0 * st.lambda_pow_k.to_f64());
    }
}

#[test]
fn finzi_ratios_within_variation_bounds() {
    use renormlab::partition::comparability_diagnostics;
    use renormlab::zygmund::total_variation_log_df;
    let rot = rotation_orbit();
    let zero = Float::new(288);
    let c = comparability_diagnostics(&rot, 6, &zero, 5).unwrap();
    assert_eq!(c.min_ratio, 1);
    assert_eq!(c.max_ratio, 1);
    assert!(c.finzi_ok && c.denjoy_ok);
    let orbit = break_orbit();
    let v = total_variation_log_df(orbit.map(), 4096).unwrap();
    for n in [2usize, 6, 12] {
        let c = comparability_diagnostics(orbit, n, &v, 9).unwrap();
        assert!(c.finzi_ok, "n = {n}: [{}, {}]", c.min_ratio, c.max_ratio);
        assert!(c.denjoy_ok, "n = {n}: {}", c.max_abs_log_dfqn);
    }
}

#[test]
fn two_step_ratio_bounded_by_lambda_squared() {
    let orbit = break_orbit();
    let lam2 = contraction_lambda(&r("2")).square().to_f64();
    for n in 2..=17i64 {
        let cr = orbit.returns();
        let ratio = cr.delta(n + 1).to_f64().abs() / cr.delta(n - 1).to_f64().abs();
        assert!(ratio < 1.0);
        assert!(ratio <= lam2 + 1e-12, "n = {n}: {ratio}");
    }
}

#[test]
fn first_entrance_matches_direct_iteration() {
    use rand::{Rng, SeedableRng};
    let orbit = break_orbit();
    let map = orbit.map();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in [3, 6, 9] {
        let level = build_partition(orbit, n).unwrap();
        let mut checked = 0;
        while checked < 100 {
            let off = Float::with_val(288, rng.gen::<f64>());
            let Ok(table) = first_entrance(&level, &off) else {
                continue;
            };
            let mut x = Float::with_val(288, &off + map.break_point());
            let mut steps = 0;
            loop {
                let mut o = Float::with_val(288, &x - map.break_point());
                if o < 0 {
                    o += 1u32;
                }
                if level.in_neighborhood(&o) {
                    break;
                }
                x = map.eval(&x).unwrap();
                steps += 1;
                assert!(steps <= level.q_n + level.q_prev, "no entrance for {off}");
            }
            assert_eq!(table, steps, "n={n} offset={off}");
            checked += 1;
        }
    }
}
