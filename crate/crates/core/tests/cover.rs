use orbitgauge_core::combinatorics::{combination_audit, combine_cover_constants, CoverConstants};
use orbitgauge_core::cover::{
    big_c2, c_of_o, codim_bound_s1, codim_bound_s2, cover_count_bound, final_codim, recursive_cover,
    sample_avoidance_set, theta_o, AvoidanceQuery, S2Input,
};
use orbitgauge_core::dimension::{cantor_intervals, dimension_from_counts, IndicatorGrid, IntervalSet};
use orbitgauge_core::mc::{streams, McConfig, Sequential};
use orbitgauge_core::shape::sample_haar_2d;
use orbitgauge_core::target::{measure_of_target, DEFAULT_KAPPA};
use orbitgauge_core::tessellation::{count_intersecting_translates_unchecked, TessellationSpec};
use orbitgauge_core::{FlowSpec, LatticeBasis, TargetSet};
use proptest::prelude::*;

fn query(x: LatticeBasis, s: TargetSet, horizon: u32) -> AvoidanceQuery {
    AvoidanceQuery { x, flow: FlowSpec::standard(1, 1).unwrap(), m: 1, n: 1, t: 2.0, r: 0.1, s, horizon }
}

fn haar_point(seed: u64) -> LatticeBasis {
    sample_haar_2d(&mut McConfig::new(seed, 0).rng(streams::BASE_POINTS, 0))
}

#[test]
fn avoidance_sets_are_nested() {
    for x in [LatticeBasis::identity(2), haar_point(41)] {
        let q = query(x, TargetSet::systole_above(0.2), 5);
        let grid = sample_avoidance_set(&Sequential, 1, &q, 4001).unwrap();
        for level in 1..5 {
            let (outer, inner) = (grid.indicator(level), grid.indicator(level + 1));
            assert!(outer.iter().zip(&inner).all(|(o, i)| *o || !*i));
            assert!(grid.fraction(level + 1) <= grid.fraction(level));
        }
    }
}

#[test]
fn avoidance_fraction_is_stable_under_refinement() {
    for x in [LatticeBasis::identity(2), haar_point(42)] {
        let q = query(x, TargetSet::systole_above(0.2), 3);
        let coarse = sample_avoidance_set(&Sequential, 1, &q, 10_000).unwrap().fraction(3);
        let fine = sample_avoidance_set(&Sequential, 1, &q, 20_000).unwrap().fraction(3);
        assert!((coarse - fine).abs() < 0.02, "{coarse} vs {fine}");
    }
    let whole = sample_avoidance_set(&Sequential, 1, &query(haar_point(43), TargetSet::Whole, 2), 11).unwrap();
    assert_eq!(whole.fraction(2), 1.0);
    let empty = sample_avoidance_set(&Sequential, 1, &query(haar_point(43), TargetSet::Empty, 2), 11).unwrap();
    assert_eq!(empty.fraction(1), 0.0);
}

#[test]
fn trivial_covers() {
    let x = LatticeBasis::identity(2);
    let empty = recursive_cover(&Sequential, 1, &query(x, TargetSet::Empty, 2), 0.1, 101, 1 << 20).unwrap();
    assert!(empty.boxes.is_empty() && empty.audit.uncovered_nodes == 0);

    let q = query(x, TargetSet::Whole, 1);
    let whole = recursive_cover(&Sequential, 1, &q, 0.1, 101, 1 << 20).unwrap();
    let frame = q.frame().unwrap();
    let tess = TessellationSpec::new(1, 0.1).unwrap();
    let translates = count_intersecting_translates_unchecked(&frame, &tess, 2.0).unwrap().count;
    assert_eq!(whole.levels[0].count, translates);
}

#[test]
fn cover_count_respects_its_bound() {
    let s = TargetSet::systole_above(0.2);
    let q = query(LatticeBasis::identity(2), s.clone(), 3);
    let cover = recursive_cover(&Sequential, 1, &q, 0.1, 2001, 1 << 22).unwrap();
    let frame = q.frame().unwrap();
    let o = s.complement();
    let cfg = McConfig::new(44, 200_000).with_shards(4);
    let mu_core = measure_of_target(&o.inner_core(0.1, DEFAULT_KAPPA).unwrap(), &Sequential, &cfg).unwrap();
    let c0 = TessellationSpec::new(1, 0.1).unwrap().c0();
    let c2 = big_c2(c0, 1.0, 1);
    assert!((c2 - (16.0 + 2.0 * 4.0)).abs() < 1e-12);
    let bound = cover_count_bound(frame.delta, 2.0, 3, mu_core.mean, c2, 0.1, 1, frame.lambda_min);
    let count = cover.levels.last().unwrap().count;
    assert!(count as f64 <= bound, "{count} vs {bound}");
    for w in cover.levels.windows(2) {
        // each level refines kept cells into e^{δt} pieces at most
        assert!(w[1].count as f64 <= w[0].count as f64 * ((frame.delta * 2.0).exp() + 2.0));
    }
}

#[test]
fn covers_of_random_points_pass_their_audit() {
    for seed in [45, 46, 47] {
        let q = query(haar_point(seed), TargetSet::systole_above(0.2), 3);
        let cover = recursive_cover(&Sequential, 1, &q, 0.1, 2001, 1 << 22).unwrap();
        assert_eq!(cover.audit.uncovered_nodes, 0);
        assert!(cover.audit.avoiding_nodes <= cover.audit.nodes);
    }
}

#[test]
fn first_bound_is_decreasing_in_c() {
    let s1 = |c: f64| codim_bound_s1(2.0, 2, 5.0, c).unwrap().raw;
    assert_eq!(s1(0.2), 0.0);
    assert!((s1(0.01) - 24.75f64.ln() / 20.0).abs() < 1e-15);
    assert!((s1(0.01) - 0.1604).abs() < 1e-4);
    let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
    assert!(grid.windows(2).all(|w| s1(w[1]) < s1(w[0])));
    let c_star = 1.0 / (4.0 * 0.5f64.exp() + 1.0);
    let (lam, k, t) = (1.5, 3, 2.5);
    let v = codim_bound_s1(lam, k, t, c_star).unwrap().raw;
    assert!((v - 1.0 / (2.0 * lam * k as f64 * t)).abs() < 1e-14);
    let neg = codim_bound_s1(2.0, 2, 5.0, 0.5).unwrap();
    assert!(neg.clamped_flag && neg.clamped == 0.0 && neg.raw < 0.0);
}

#[test]
fn second_and_final_bounds() {
    let input = S2Input {
        mu_core: 0.4,
        big_c1: 2.0,
        theta: 0.5,
        p: 1,
        c: 1e-4,
        big_c2: 1.0,
        r: 0.1,
        lambda: 1.0,
        k: 2,
        t: 10.0,
        lambda_max: 2.0,
    };
    let v = codim_bound_s2(&input).unwrap();
    let expected = (0.4 - 32.0 * 0.01 / 0.9999 - 10.0 * (-20.0f64).exp()) / 40.0;
    assert!((v.raw - expected).abs() < 1e-15 && (v.raw - 0.002).abs() < 1e-5);
    let big_c = codim_bound_s2(&S2Input { c: 0.5, ..input }).unwrap();
    assert!(big_c.clamped_flag && big_c.clamped == 0.0);
    assert!((final_codim(0.1, 2.0, 2, 10.0).unwrap() - 6.25e-4).abs() < 1e-18);
    assert!(final_codim(0.0, 2.0, 2, 10.0).is_err());
    assert_eq!(c_of_o(1.0, 1e-9, 1.0, 1), 1.0 / (4.0 * 0.5f64.exp() + 1.0));
}

#[test]
fn theta_of_targets() {
    let cfg = McConfig::new(48, 100_000).with_shards(4);
    assert_eq!(theta_o(&Sequential, &cfg, &TargetSet::Whole, 1.0, 1e-3).unwrap().theta, 1.0);
    let rep = theta_o(&Sequential, &cfg, &TargetSet::systole_below(0.3), 1.0, 1e-3).unwrap();
    assert!(rep.monotone);
    // μ(λ₁ < ε e^{−4θ}) = μ(λ₁ < ε)/2 exactly when 8θ = log 2.
    assert!((rep.theta - 2f64.ln() / 8.0).abs() < 0.01, "theta {}", rep.theta);
    let mut sorted = rep.trace.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(sorted.windows(2).all(|w| w[1].1.mean <= w[0].1.mean));
}

#[test]
fn combination_constants() {
    let base = CoverConstants { k1: 1.0, a1: 0.5, k2: 1.0, a2: 0.25, c0: 0.0, c1: 1.0, c2: 1.0, p: 1, theta: 0.1, r: 0.1 };
    let (k3, a3) = combine_cover_constants(&base).unwrap();
    assert_eq!(k3, 9.0);
    assert_eq!(a3, 0.5 + 0.25 + 3.0 * 0.5);
    assert_eq!(combine_cover_constants(&CoverConstants { c0: 16.0, ..base }).unwrap().0, 153.0);
    for c0 in [0.0, 1.0, 16.0] {
        let audit = combination_audit(&CoverConstants { c0, ..base }, 5).unwrap();
        assert!(audit.pass && audit.total <= audit.bound);
        assert_eq!(audit.per_subset.len(), 32);
    }
}

proptest! {
    #[test]
    fn interval_unions_have_dimension_at_most_one(
        raw in prop::collection::vec((0.0f64..1.0, 0.0f64..0.05), 1..20),
    ) {
        let ivs: Vec<(f64, f64)> = raw.iter().map(|&(a, w)| (a, (a + w).min(1.0))).collect();
        let est = IntervalSet::new(ivs).unwrap().dimension(&(4..=14).collect::<Vec<_>>()).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.slope));
    }
}

#[test]
fn cantor_times_interval_adds_one() {
    let res = 1usize << 11;
    let cantor = cantor_intervals(14);
    let mut column = vec![false; res];
    for &(a, b) in &cantor.intervals {
        let lo = (a * res as f64).floor() as usize;
        let hi = ((b * res as f64).floor() as usize).min(res - 1);
        column[lo..=hi].iter_mut().for_each(|c| *c = true);
    }
    let data: Vec<bool> = (0..res * res).map(|i| column[i % res]).collect();
    let grid = IndicatorGrid::cells(2, res, data).unwrap();
    let scales: Vec<u32> = (3..=10).collect();
    let est = grid.dimension(&scales).unwrap();
    let target = 2f64.ln() / 3f64.ln() + 1.0;
    assert!((est.slope - target).abs() < 0.05, "{} vs {target}", est.slope);
    let counts: Vec<u64> = scales.iter().map(|&j| cantor.count_boxes(j) << j).collect();
    let direct = dimension_from_counts(&scales, &counts, 2).unwrap();
    assert_eq!(est.counts, direct.counts);
}
