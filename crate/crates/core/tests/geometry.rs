use orbitgauge_core::flow::horospherical_frame;
use orbitgauge_core::tessellation::{
    bowen_diameter_bound, count_intersecting_translates, count_intersecting_translates_unchecked, cover_bowen_by_balls,
    cover_v_theta_by_v_r, intersecting_translates, BowenBox, TessellationSpec, R_STAR,
};
use orbitgauge_core::{FlowSpec, HorosphericalFrame, LatticeBasis, NormKind};
use proptest::prelude::*;

/// `(m, n, exponents)` for a flow whose expanded block is `m × n`.
fn weighted_flow(m: usize, x: f64, y: f64) -> (usize, usize, Vec<f64>) {
    match m {
        1 => (1, 1, vec![x, -x]),
        2 => (2, 1, vec![x, y, -(x + y)]),
        _ => (1, 2, vec![x + y, -x, -y]),
    }
}

fn frame_of(m: usize, n: usize, a: &[f64]) -> HorosphericalFrame {
    horospherical_frame(&FlowSpec::new(a.to_vec()).unwrap(), m, n).unwrap()
}

/// Counts translates by testing every candidate box for overlap with the unit cell.
fn brute_count(frame: &HorosphericalFrame, tess: &TessellationSpec, t: f64) -> u64 {
    let s = tess.side();
    let reach: Vec<i64> = frame.entry_exponents.iter().map(|l| ((l * t).exp() as i64) + 2).collect();
    let mut gamma = reach.iter().map(|r| -r).collect::<Vec<_>>();
    let mut count = 0;
    loop {
        let b = BowenBox::new(frame, tess, t, &gamma);
        if b.center.iter().zip(&b.sides).all(|(c, w)| c.abs() - w / 2.0 <= s / 2.0) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == gamma.len() {
                return count;
            }
            if gamma[i] < reach[i] {
                gamma[i] += 1;
                break;
            }
            gamma[i] = -reach[i];
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn translate_count_matches_brute_force_and_bound(
        m in 1usize..=3,
        x in 0.3f64..1.5,
        y in 0.3f64..1.5,
        r in 0.01f64..0.1,
        extra in 0.0f64..1.5,
    ) {
        let (m, n, a) = weighted_flow(m, x, y);
        let frame = frame_of(m, n, &a);
        let tess = TessellationSpec::new(frame.p, r).unwrap();
        let t = orbitgauge_core::tessellation::covering_time_threshold(&frame) + extra;
        let rep = count_intersecting_translates(&frame, &tess, t).unwrap();
        prop_assert_eq!(rep.count, brute_count(&frame, &tess, t));
        prop_assert!(rep.pass && (rep.count as f64) <= rep.bound);
    }

    #[test]
    fn v_theta_cover_within_bound(p in 1usize..=2, r in 0.01f64..0.1, k in 0.0f64..1.0) {
        let tess = TessellationSpec::new(p, r).unwrap();
        let theta = r + k * (R_STAR / 2.0 - r);
        let rep = cover_v_theta_by_v_r(&tess, theta).unwrap();
        prop_assert!(rep.pass);
    }

    #[test]
    fn ball_cover_is_verified_and_within_bound(
        m in 1usize..=3,
        x in 0.3f64..1.2,
        y in 0.3f64..1.2,
        r in 0.01f64..0.2,
        t in 0.1f64..3.0,
    ) {
        let (m, n, a) = weighted_flow(m, x, y);
        let frame = frame_of(m, n, &a);
        let cover = cover_bowen_by_balls(&frame, t, r).unwrap();
        prop_assert!(cover.verified);
        prop_assert!(cover.centers.len() as f64 <= cover.bound * (1.0 + 1e-9));
    }

    #[test]
    fn bowen_boxes_shrink_within_diameter_bound(
        m in 1usize..=3,
        x in 0.3f64..1.2,
        y in 0.3f64..1.2,
        t in 0.0f64..4.0,
    ) {
        let (m, n, a) = weighted_flow(m, x, y);
        let frame = frame_of(m, n, &a);
        let tess = TessellationSpec::new(frame.p, 0.1).unwrap();
        let b = BowenBox::new(&frame, &tess, t, &vec![0; frame.p]);
        prop_assert!(b.diameter() <= bowen_diameter_bound(&frame, 0.1, t) * (1.0 + 1e-12));
        let expected = tess.cell_volume() * (-frame.entry_exponents.iter().sum::<f64>() * t).exp();
        prop_assert!((b.volume() - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn translate_count_grows_with_time() {
    for (m, n) in [(1, 1), (1, 2), (2, 1)] {
        let frame = horospherical_frame(&FlowSpec::standard(m, n).unwrap(), m, n).unwrap();
        let tess = TessellationSpec::new(frame.p, 0.1).unwrap();
        let mut last = 0;
        for i in 0..=60 {
            let c = count_intersecting_translates_unchecked(&frame, &tess, i as f64 * 0.1).unwrap().count;
            assert!(c >= last);
            last = c;
        }
        assert_eq!(intersecting_translates(&frame, 0.0).unwrap(), 3u64.pow(frame.p as u32));
    }
}

#[test]
fn short_times_are_refused() {
    let frame = horospherical_frame(&FlowSpec::standard(1, 1).unwrap(), 1, 1).unwrap();
    let tess = TessellationSpec::new(1, 0.1).unwrap();
    assert!(count_intersecting_translates(&frame, &tess, 1.0).is_err());
}

#[test]
fn weighted_ball_cover_is_small() {
    let frame = frame_of(2, 1, &[2.0 / 3.0, 1.0 / 3.0, -1.0]);
    let cover = cover_bowen_by_balls(&frame, 3.0, 0.1).unwrap();
    assert!(cover.verified);
    assert!(cover.centers.len() <= 3, "{} balls", cover.centers.len());
}

#[test]
fn flow_steps_compose() {
    let flow = FlowSpec::standard(1, 2).unwrap();
    let x = LatticeBasis::from_cols(&[&[1.0, 0.3, 0.1], &[0.0, 1.0, 0.7], &[0.0, 0.0, 1.0]]).unwrap();
    let once = flow.advance(5.0, &x);
    let twice = flow.advance(2.0, &flow.advance(3.0, &x));
    let (a, b) = (once.systole(NormKind::Euclidean), twice.systole(NormKind::Euclidean));
    assert!((a - b).abs() < 1e-9 * a, "{a} vs {b}");
    assert!((once.det().abs() - 1.0).abs() < 1e-9);
}
