use orbitgauge_core::diophantine::{
    correspondence_audit, dani_orbit_check, dani_t0, di_dimension_scan, is_dirichlet_improvable, is_jointly_di,
    rational_improvability_bound, verify_witness, DiMatrix, Entry,
};
use orbitgauge_core::mc::{McConfig, Sequential};
use rand::Rng;

fn sqrt2m1() -> DiMatrix {
    DiMatrix::scalar(2f64.sqrt() - 1.0)
}

fn golden() -> DiMatrix {
    DiMatrix::scalar((5f64.sqrt() - 1.0) / 2.0)
}

/// Convergents `p_k/q_k` of `√2 − 1 = [0; 2, 2, 2, …]` up to `q ≤ limit`.
fn convergents(limit: i64) -> Vec<(i64, i64)> {
    let (mut p, mut q) = ((0i64, 1i64), (1i64, 0i64));
    let mut out = vec![(0, 1)];
    loop {
        let next = (2 * p.0 + q.0, 2 * p.1 + q.1);
        if next.1 > limit {
            return out;
        }
        out.push(next);
        (q, p) = (p, next);
    }
}

#[test]
fn continued_fraction_oracle_agrees_at_every_n() {
    let y = 2f64.sqrt() - 1.0;
    let c = 0.3;
    let res = is_dirichlet_improvable(&sqrt2m1(), c, (10, 500)).unwrap();
    assert_eq!(res.per_n.len(), 491);
    for row in &res.per_n {
        let (p, q) = *convergents(row.n as i64 - 1).last().unwrap();
        let best = (q as f64 * y - p as f64).abs();
        assert!((row.best - best).abs() < 1e-12, "N {}: {} vs {best}", row.n, row.best);
        assert_eq!(row.improvable, best < c / row.n as f64, "N {}", row.n);
    }
    // q‖q(√2 − 1)‖ stays near 1/(2√2) > 0.3, so no N in range improves.
    assert!(res.per_n.iter().all(|r| !r.improvable));
}

#[test]
fn dirichlet_constant_one_always_improves() {
    let mut rng = McConfig::new(51, 0).rng(0, 0);
    for (m, n) in [(1, 1), (1, 2), (2, 1)] {
        for _ in 0..5 {
            let vals: Vec<f64> = (0..m * n).map(|_| rng.gen()).collect();
            let y = DiMatrix::real(m, n, &vals).unwrap();
            let hi = if m * n == 1 { 400 } else { 60 };
            let res = is_dirichlet_improvable(&y, 1.0, (2, hi)).unwrap();
            assert!(res.all_improvable_over_range, "{vals:?}");
            for row in &res.per_n {
                verify_witness(&y, row.witness.as_ref().unwrap(), 1.0, row.n).unwrap();
            }
        }
    }
}

#[test]
fn tuples_are_an_or_of_their_members() {
    let (a, b) = (sqrt2m1(), golden());
    let range = (10, 300);
    let ra = is_dirichlet_improvable(&a, 0.5, range).unwrap();
    let rb = is_dirichlet_improvable(&b, 0.5, range).unwrap();
    let joint = is_jointly_di(&[a.clone(), b.clone()], 0.5, range).unwrap();
    for ((x, y), z) in ra.per_n.iter().zip(&rb.per_n).zip(&joint.per_n) {
        assert_eq!(z.improvable, x.improvable || y.improvable);
        assert!(z.best <= x.best.min(y.best) + 1e-15);
        if let Some(w) = &z.witness {
            verify_witness([&a, &b][w.i], w, 0.5, z.n).unwrap();
        }
    }
    assert_eq!(is_jointly_di(&[a.clone()], 0.5, range).unwrap(), ra);
    let zero = is_jointly_di(&[DiMatrix::scalar(0.0), a], 0.5, range).unwrap();
    assert!(zero.all_improvable_over_range);
}

#[test]
fn improvability_is_monotone_in_c_and_in_tuples() {
    let mut rng = McConfig::new(52, 0).rng(0, 0);
    let ladder: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    for _ in 0..20 {
        let y = DiMatrix::scalar(rng.gen());
        let extra = DiMatrix::scalar(rng.gen());
        let runs: Vec<_> = ladder.iter().map(|&c| is_dirichlet_improvable(&y, c, (5, 200)).unwrap()).collect();
        for w in runs.windows(2) {
            for (lo, hi) in w[0].per_n.iter().zip(&w[1].per_n) {
                assert!(!lo.improvable || hi.improvable);
            }
        }
        let longer = is_jointly_di(&[y, extra], 0.4, (5, 200)).unwrap();
        for (single, joint) in runs[3].per_n.iter().zip(&longer.per_n) {
            assert!(!single.improvable || joint.improvable);
        }
    }
}

#[test]
fn rationals_improve_past_their_denominator() {
    let mut rng = McConfig::new(53, 0).rng(0, 0);
    for _ in 0..50 {
        let den: i128 = rng.gen_range(2..60);
        let num: i128 = rng.gen_range(0..den);
        let y = DiMatrix::new(1, 1, vec![Entry::Rational(num, den)]).unwrap();
        let d = rational_improvability_bound(&y).unwrap();
        assert!(d as i128 <= den);
        let res = is_dirichlet_improvable(&y, 0.01, (d + 1, d + 200)).unwrap();
        assert!(res.all_improvable_over_range, "{num}/{den}");
    }
    let y = DiMatrix::new(1, 2, vec![Entry::Rational(1, 3), Entry::Rational(2, 5)]).unwrap();
    let d = rational_improvability_bound(&y).unwrap();
    assert_eq!(d, 15);
    assert!(is_dirichlet_improvable(&y, 0.01, (d + 1, d + 20)).unwrap().all_improvable_over_range);
}

#[test]
fn witnesses_survive_recheck() {
    let mut rng = McConfig::new(54, 0).rng(0, 0);
    for (m, n, hi) in [(1, 1, 500), (1, 2, 40), (2, 1, 200)] {
        for _ in 0..5 {
            let vals: Vec<f64> = (0..m * n).map(|_| rng.gen()).collect();
            let y = DiMatrix::real(m, n, &vals).unwrap();
            let res = is_dirichlet_improvable(&y, 0.6, (2, hi)).unwrap();
            for row in res.per_n.iter().filter(|r| r.improvable) {
                let w = row.witness.as_ref().unwrap();
                assert!(w.q.iter().any(|&q| q != 0) && w.q.iter().all(|q| q.unsigned_abs() < row.n));
                verify_witness(&y, w, 0.6, row.n).unwrap();
            }
        }
    }
}

#[test]
fn arithmetic_and_dynamical_criteria_agree_off_the_boundary() {
    let mut rng = McConfig::new(55, 0).rng(0, 0);
    for _ in 0..100 {
        let y = DiMatrix::scalar(rng.gen());
        for c in [0.3, 0.6, 0.9] {
            let audit = correspondence_audit(&y, c, (10, 200)).unwrap();
            assert!(audit.pass, "{:?}", audit.disagreements.iter().find(|d| !d.in_band));
        }
    }
}

#[test]
fn dani_check_on_the_zero_matrix() {
    let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    for c in [0.2, 0.5, 0.9] {
        let r = dani_orbit_check(&[DiMatrix::scalar(0.0)], c, &grid).unwrap();
        assert!(r.all_improvable_from_t0);
        assert_eq!(r.t0, dani_t0(c, 1));
    }
}

#[test]
fn scans_at_full_constant_fill_the_square() {
    let scan = di_dimension_scan(&Sequential, 4, 1.0, 1, 10, 300, 12, &(2..=10).collect::<Vec<_>>(), &[100]).unwrap();
    assert_eq!(scan.surviving_fraction, 1.0);
    assert!((scan.estimate.slope - 1.0).abs() < 1e-9);
    let plane = di_dimension_scan(&Sequential, 4, 1.0, 2, 10, 100, 12, &(2..=6).collect::<Vec<_>>(), &[]).unwrap();
    assert!((plane.estimate.slope - 2.0).abs() < 1e-9);
}

#[test]
fn scan_survivors_shrink_with_the_horizon() {
    let scales: Vec<u32> = (4..=14).collect();
    let scan = di_dimension_scan(&Sequential, 4, 0.5, 1, 10, 1000, 16, &scales, &[100, 1000]).unwrap();
    let (t100, t1000) = (&scan.trend[0], &scan.trend[1]);
    assert!(t1000.surviving_fraction <= t100.surviving_fraction);
    let slack = t100.estimate.ci95.1 - t100.estimate.slope;
    assert!(t1000.estimate.slope <= t100.estimate.slope + slack);
    assert!(scan.surviving_fraction < 0.2 && scan.estimate.excludes(1.0));
    assert_eq!(scan.surviving_fraction, t1000.surviving_fraction);
}
