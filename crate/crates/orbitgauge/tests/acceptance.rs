//! Acceptance criteria. Each test writes one PASS/FAIL line to stderr
//! (bypassing output capture) and then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use orbitgauge::RayonExec;
use orbitgauge_core::combinatorics::{d_counts, subset_sum_bound_exact};
use orbitgauge_core::convolution::convolution_density_check;
use orbitgauge_core::cover::{codim_bound_s1, final_codim, sample_avoidance_set, AvoidanceQuery};
use orbitgauge_core::dimension::{cantor_intervals, cf_bounded_cylinders, IndicatorGrid, IntervalSet};
use orbitgauge_core::diophantine::{
    correspondence_audit, di_dimension_scan, is_dirichlet_improvable, rational_improvability_bound, DiMatrix, Entry,
};
use orbitgauge_core::equidist::{decay_experiment, measure_lower_bound_check};
use orbitgauge_core::flow::{horospherical_frame, FlowSpec};
use orbitgauge_core::height::{
    default_panel, escape_check, iterate_check, margulis_check, EscapeBoundInput, HeightFunctionSpec,
};
use orbitgauge_core::mc::{mc_mean_multi, streams, McConfig};
use orbitgauge_core::shape::sample_haar_2d;
use orbitgauge_core::target::DEFAULT_KAPPA;
use orbitgauge_core::tessellation::{
    count_intersecting_translates, cover_bowen_by_balls, covering_time_threshold, TessellationSpec, R_STAR,
};
use orbitgauge_core::{LatticeBasis, NormKind, ShapePoint2D, TargetSet};
use rand::Rng;

const SEED: u64 = 0;
const SHARDS: usize = 8;

fn report(n: u32, title: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2} {verdict}: {title}: {detail}");
    assert!(pass, "criterion {n} ({title}) failed: {detail}");
}

fn cfg(samples: u64) -> McConfig {
    McConfig::new(SEED, samples).with_shards(SHARDS)
}

fn haar_points(count: usize, label: u64) -> Vec<LatticeBasis> {
    let mut rng = cfg(0).rng(streams::BASE_POINTS, label);
    (0..count).map(|_| sample_haar_2d(&mut rng)).collect()
}

#[test]
fn criterion_01_combinatorics_exact() {
    let mut rng = cfg(0).rng(streams::AUDIT, 1);
    let mut failures = 0;
    let mut cases = 0;
    // Sums stay below 1600 so (n1+n2+n3)^12 fits in u128.
    for _ in 0..1000 {
        let (a, b, c) = (rng.gen_range(1..=500u64), rng.gen_range(1..=500u64), rng.gen_range(1..=500u64));
        for n in 1..=12 {
            cases += 1;
            failures += u32::from(!subset_sum_bound_exact(a, b, c, n).unwrap().pass);
        }
    }
    let mut alternation_violations = 0u64;
    for n in 1..=16u32 {
        for j in 0u32..(1 << n) {
            let (d, dp) = d_counts(j, n);
            alternation_violations += u64::from(dp > d + 1);
        }
    }
    report(
        1,
        "combinatorics exactness",
        failures == 0 && alternation_violations == 0,
        format!("{cases} subset-sum cases, {failures} failures; d' <= d+1 violations for N <= 16: {alternation_violations}"),
    );
}

#[test]
fn criterion_02_covering_lemmas() {
    let mut rng = cfg(0).rng(streams::AUDIT, 2);
    let shapes = [(1usize, 1usize), (1, 2), (2, 1)];
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..100 {
        let (m, n) = shapes[i % 3];
        let pos: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..2.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let (sp, sw): (f64, f64) = (pos.iter().sum(), w.iter().sum());
        let mut a = pos.clone();
        a.extend(w.iter().map(|x| -x * sp / sw));
        let flow = FlowSpec::new(a).unwrap();
        let frame = horospherical_frame(&flow, m, n).unwrap();
        let r = rng.gen_range(0.01..=R_STAR / 2.0);
        let t = covering_time_threshold(&frame) + rng.gen_range(0.0..3.0);
        let rep = count_intersecting_translates(&frame, &TessellationSpec::new(frame.p, r).unwrap(), t).unwrap();
        failures += u32::from(!rep.pass);
        worst = worst.max(rep.count as f64 / rep.bound);
    }
    let mut ball_counts = Vec::new();
    for (m, n) in shapes {
        let frame = horospherical_frame(&FlowSpec::standard(m, n).unwrap(), m, n).unwrap();
        for (t, r) in [(0.5, 0.05), (1.0, 0.1), (3.0, 0.2)] {
            ball_counts.push(cover_bowen_by_balls(&frame, t, r).unwrap().centers.len());
        }
    }
    let single = ball_counts.iter().all(|&k| k == 1);
    report(
        2,
        "covering lemmas",
        failures == 0 && single,
        format!("100 configs, {failures} over bound, max count/bound {worst:.4}; unweighted ball counts {ball_counts:?}"),
    );
}

#[test]
fn criterion_03_haar_calibration() {
    let eps = [0.05, 0.1, 0.2];
    let est = mc_mean_multi(&RayonExec, &cfg(10_000_000), streams::HAAR, 3, |rng, out| {
        let s = sample_haar_2d(rng).systole(NormKind::Euclidean);
        for (o, e) in out.iter_mut().zip(&eps) {
            *o = f64::from(u8::from(s < *e));
        }
    });
    let zs: Vec<f64> = eps
        .iter()
        .zip(&est)
        .map(|(e, est)| (est.mean - 3.0 * e * e / std::f64::consts::PI) / est.std_err)
        .collect();
    let pass = zs.iter().all(|z| z.abs() < 3.0);
    report(3, "Haar sampler against 3 eps^2/pi", pass, format!("1e7 samples, z at eps 0.05/0.1/0.2 = {zs:.3?}"));
}

fn margulis_setup() -> (FlowSpec, orbitgauge_core::HorosphericalFrame, HeightFunctionSpec) {
    let flow = FlowSpec::standard(1, 1).unwrap();
    let frame = horospherical_frame(&flow, 1, 1).unwrap();
    (flow, frame, HeightFunctionSpec::new(0.5).unwrap())
}

#[test]
fn criterion_04_margulis_contraction() {
    let (flow, frame, height) = margulis_setup();
    let panel = default_panel(&height, 2, 8, 10.0, 100.0);
    let rep = margulis_check(&RayonExec, &cfg(100_000), &height, &frame, &flow, 4.0, &panel, 8).unwrap();
    let upper = rep.c_hat + 3.0 * rep.c_sigma;
    report(
        4,
        "Margulis contraction at t = 4",
        upper < 1.0 && rep.c_hat <= 0.9,
        format!("c_hat = {:.4}, sigma = {:.2e}, c_hat + 3 sigma = {upper:.4}, d_hat = {:.4}", rep.c_hat, rep.c_sigma, rep.d_hat),
    );
}

#[test]
fn criterion_05_iteration_and_escape() {
    let (flow, frame, height) = margulis_setup();
    let t = 4.0;
    let panel = default_panel(&height, 2, 8, 10.0, 100.0);
    let rep = margulis_check(&RayonExec, &cfg(100_000), &height, &frame, &flow, t, &panel, 8).unwrap();
    let c0 = rep.c_hat + 3.0 * rep.c_sigma;
    let points = haar_points(20, 5);
    let mut iter_fail = 0;
    let mut iter_cases = 0;
    for n in 1..=4 {
        let checks = iterate_check(&RayonExec, &cfg(20_000).derive(n as u64), &height, &frame, &flow, t, n, c0, rep.d_hat, &points)
            .unwrap();
        for c in checks {
            iter_cases += 1;
            iter_fail += u32::from(c.estimate.mean > c.bound + 3.0 * c.estimate.std_err);
        }
    }
    let alpha = height.alpha(&flow);
    let big_c = height.regularity_constant();
    let mut esc_fail = 0;
    let mut esc_cases = 0;
    for (i, x) in points.iter().enumerate() {
        for n in 1..=3 {
            let input = EscapeBoundInput::new(c0, rep.d_hat, alpha, t, big_c, n, 2, height.value(x)).unwrap();
            let cfg = cfg(20_000).derive(100 + 10 * i as u64 + n as u64);
            let c = escape_check(&RayonExec, &cfg, &height, &frame, &flow, &input, 0.05, x).unwrap();
            esc_cases += 1;
            esc_fail += u32::from(c.estimate.mean > c.bound + 3.0 * c.estimate.std_err);
        }
    }
    report(
        5,
        "iteration and escape bounds",
        iter_fail == 0 && esc_fail == 0,
        format!("iterate: {iter_fail}/{iter_cases} violations; escape (k = 2): {esc_fail}/{esc_cases} violations"),
    );
}

#[test]
fn criterion_06_convolution_density() {
    let frame = horospherical_frame(&FlowSpec::standard(1, 1).unwrap(), 1, 1).unwrap();
    let reps: Vec<_> = (2..=10).map(|n| convolution_density_check(&frame, 1.0, n).unwrap()).collect();
    let exact = reps.iter().all(|r| r.pass && r.min_ratio == 1.0 && r.max_ratio == 1.0);
    let lo = reps.iter().map(|r| r.min_ratio).fold(f64::INFINITY, f64::min);
    let hi = reps.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
    report(6, "convolution density", exact, format!("n = 2..10, ratio range [{lo}, {hi}]"));
}

#[test]
fn criterion_07_equidistribution_decay() {
    let flow = FlowSpec::standard(1, 1).unwrap();
    let frame = horospherical_frame(&flow, 1, 1).unwrap();
    let x = LatticeBasis::identity(2);
    let o = TargetSet::systole_below(0.3);
    let grid: Vec<f64> = (0..=20).map(|i| 3.0 + 0.25 * i as f64).collect();
    let c = cfg(1_000_000);
    let (_, fit) = decay_experiment(&RayonExec, &c, &frame, &flow, &x, &o, 0.1, &grid).unwrap();
    let lb = measure_lower_bound_check(&RayonExec, &c, &frame, &flow, &x, 8.0, &o, 0.1, fit.lambda_hat, DEFAULT_KAPPA)
        .unwrap();
    report(
        7,
        "equidistribution decay",
        fit.positive_95 && lb.pass && !lb.vacuous,
        format!(
            "lambda_hat = {:.4}, 95% CI ({:.4}, {:.4}); lower bound at t = 8: lhs {:.6} vs rhs {:.6}, vacuous = {}",
            fit.lambda_hat, fit.ci95.0, fit.ci95.1, lb.lhs.mean, lb.rhs, lb.vacuous
        ),
    );
}

/// Dimension of the bounded-quotient-2 set by the transfer ratio: the `s`
/// with `Σ_{|w|=20} |I_w|^s = Σ_{|w|=19} |I_w|^s`.
fn cf2_pressure_oracle() -> f64 {
    fn log_lengths(depth: u32) -> Vec<f64> {
        let mut level = vec![(1.0f64, 0.0f64)]; // (q_n, q_{n-1})
        for _ in 0..depth {
            level = level.iter().flat_map(|&(q, qm)| [(q + qm, q), (2.0 * q + qm, q)]).collect();
        }
        level.iter().map(|&(q, qm)| (q * (q + qm)).ln()).collect()
    }
    let (l19, l20) = (log_lengths(19), log_lengths(20));
    let z = |l: &[f64], s: f64| l.iter().map(|x| (-s * x).exp()).sum::<f64>();
    let (mut lo, mut hi) = (0.3, 0.8);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if z(&l20, mid) > z(&l19, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_08_dimension_calibration() {
    let scales: Vec<u32> = (4..=14).collect();
    let unit = IntervalSet::new(vec![(0.0, 1.0)]).unwrap().dimension(&scales).unwrap().slope;
    let cantor = cantor_intervals(12).dimension(&scales).unwrap().slope;
    let cf = cf_bounded_cylinders(2, 14).unwrap().dimension(&scales).unwrap().slope;
    let oracle = cf2_pressure_oracle();
    let pass = (unit - 1.0).abs() <= 0.02 && (cantor - 0.6309).abs() <= 0.03 && (cf - oracle).abs() <= 0.06;
    report(
        8,
        "dimension estimator calibration",
        pass,
        format!("[0,1] {unit:.4}; Cantor {cantor:.4} (0.6309); CF <= 2 {cf:.4} (oracle {oracle:.4})"),
    );
}

#[test]
fn criterion_09_dimension_drop_trend() {
    let mut slopes = Vec::new();
    let mut all_below = true;
    let mut detail = Vec::new();
    for rho in [0.2, 0.3, 0.4] {
        let s = TargetSet::shape_ball(ShapePoint2D::new(0.0, 1.0), rho).complement();
        let q = AvoidanceQuery {
            x: LatticeBasis::identity(2),
            flow: FlowSpec::standard(1, 1).unwrap(),
            m: 1,
            n: 1,
            t: 1.0,
            r: 0.1,
            s,
            horizon: 8,
        };
        let grid = sample_avoidance_set(&RayonExec, SHARDS, &q, (1 << 18) + 1).unwrap();
        let ind = IndicatorGrid::new(1, grid.res, grid.indicator(8)).unwrap();
        let est = ind.dimension(&(4..=14).collect::<Vec<u32>>()).unwrap();
        all_below &= !est.empty && est.slope < 1.0 && est.excludes(1.0);
        detail.push(format!("rho {rho}: {:.4} CI ({:.4}, {:.4})", est.slope, est.ci95.0, est.ci95.1));
        slopes.push(est.slope);
    }
    let monotone = slopes.windows(2).all(|w| w[1] <= w[0]);
    report(9, "dimension drop trend at T = 8", all_below && monotone, detail.join("; "));
}

#[test]
fn criterion_10_bound_calculators() {
    let (lambda_max, k, t) = (2.0, 2, 5.0);
    let c_star = 1.0 / (4.0 * 0.5f64.exp() + 1.0);
    let at_star = codim_bound_s1(lambda_max, k, t, c_star).unwrap().raw;
    let want = 1.0 / (2.0 * lambda_max * k as f64 * t);
    let at_fifth = codim_bound_s1(lambda_max, k, t, 0.2).unwrap();
    let mu = 0.37;
    let fin = final_codim(mu, lambda_max, k, t).unwrap();
    let pass = (at_star - want).abs() <= 1e-12 && at_fifth.raw == 0.0 && fin == mu / (4.0 * lambda_max * k as f64 * t);
    report(
        10,
        "bound calculator fidelity",
        pass,
        format!("S1(c*) - 1/(2 lambda k t) = {:.2e}; S1(1/5) = {}; final = {fin}", at_star - want, at_fifth.raw),
    );
}

#[test]
fn criterion_11_dirichlet_correspondence() {
    let mut rng = cfg(0).rng(streams::AUDIT, 11);
    let (mut checks, mut disagreements, mut out_of_band) = (0u64, 0usize, 0usize);
    for _ in 0..100 {
        let y = DiMatrix::scalar(rng.gen_range(0.0..1.0));
        for c in [0.3, 0.6, 0.9] {
            let a = correspondence_audit(&y, c, (10, 1000)).unwrap();
            checks += a.checks;
            disagreements += a.disagreements.len();
            out_of_band += a.disagreements.iter().filter(|d| !d.in_band).count();
        }
    }
    let mut rational_fail = 0;
    for (p, q) in [(1, 3), (2, 7), (5, 13), (7, 19), (1, 2), (11, 29)] {
        let y = DiMatrix::new(1, 1, vec![Entry::Rational(p, q)]).unwrap();
        let d = rational_improvability_bound(&y).unwrap();
        for c in [0.3, 0.6, 0.9] {
            rational_fail += u32::from(!is_dirichlet_improvable(&y, c, (d + 1, d + 300)).unwrap().all_improvable_over_range);
        }
    }
    let scan = di_dimension_scan(&RayonExec, SHARDS, 0.5, 1, 10, 1000, 16, &(4..=14).collect::<Vec<u32>>(), &[]).unwrap();
    let pass = out_of_band == 0 && rational_fail == 0 && scan.surviving_fraction < 0.2;
    report(
        11,
        "Dirichlet correspondence",
        pass,
        format!(
            "{checks} checks, {disagreements} disagreements, {out_of_band} outside the band; rational failures {rational_fail}; surviving fraction at c = 0.5: {:.4}",
            scan.surviving_fraction
        ),
    );
}

fn orbitgauge(args: &[&str], threads: &str) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_orbitgauge"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .env_remove("ORBITGAUGE_SEED")
        .status()
        .expect("run orbitgauge")
        .code()
        .unwrap_or(-1)
}

fn manifest(dir: &Path, sub: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{sub}.manifest.json"))).unwrap()).unwrap()
}

#[test]
fn criterion_12_manifest_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("avoid.json");
    std::fs::write(
        &spec,
        r#"{"t": 1.0, "r": 0.1, "target": "not:shape-ball:0,1,0.3", "N": 4, "resolution": 4097}"#,
    )
    .unwrap();
    let spec = spec.to_str().unwrap().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["systole", "--samples", "20000"],
        vec!["systole", "--basis", "[[2,1],[1,1]]"],
        vec!["tessellate", "--t", "1.5:3:0.5", "--theta", "0.1"],
        vec!["margulis-check", "--samples", "2000", "--panel", "4", "--anchors", "2"],
        vec!["escape-bound", "--samples", "2000"],
        vec!["equidist", "--samples", "5000"],
        vec!["cover", "--basis", "[[1,0.3],[0.1,1.03]]", "--audit-resolution", "201", "--samples", "5000"],
        vec!["dimension", "--set", "cantor", "--depth", "8", "--scales", "3:8"],
        vec!["dimension", "--set", &spec, "--scales", "3:10"],
        vec!["bounds", "s1", "--c", "0.1"],
        vec!["bounds", "final", "--target", "systole-below:0.3", "--samples", "5000"],
        vec!["di-check", "--Y", "0.41421356", "--Y2", "1/3", "--N", "10:200", "--t-grid", "2:5:1", "--c", "0.6"],
        vec!["di-scan", "--grid-bits", "10", "--Nmax", "200", "--scales", "3:8", "--checkpoints", "50,100"],
        vec!["selftest"],
    ];
    let mut mismatches = Vec::new();
    let mut orphans = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        let sub = run[0];
        let a = tmp.path().join(format!("a{i}"));
        let b = tmp.path().join(format!("b{i}"));
        let mut args = vec!["--seed", "7", "--shards", "4", "--out", a.to_str().unwrap()];
        args.extend(run.iter().copied());
        assert_eq!(orbitgauge(&args, "1"), 0, "run {run:?} failed");
        let m = manifest(&a, sub);
        let listed: Vec<String> =
            m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_string()).collect();
        for entry in std::fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name().to_string_lossy().into_owned();
            if !name.ends_with(".manifest.json") && !listed.contains(&name) {
                orphans.push(format!("{sub}/{name}"));
            }
        }
        let cfg = a.join(format!("{sub}.manifest.json"));
        let rerun = ["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), sub];
        assert_eq!(orbitgauge(&rerun, "3"), 0, "rerun of {run:?} failed");
        let m2 = manifest(&b, sub);
        if m["outputs"] != m2["outputs"] || m["config"] != m2["config"] {
            mismatches.push(format!("{run:?}"));
        }
        for file in &listed {
            if std::fs::read(a.join(file)).unwrap() != std::fs::read(b.join(file)).unwrap() {
                mismatches.push(format!("{sub}/{file}"));
            }
        }
    }
    report(
        12,
        "determinism from manifests",
        mismatches.is_empty() && orphans.is_empty(),
        format!("{} runs re-run from their manifests; mismatches {mismatches:?}; orphans {orphans:?}", runs.len()),
    );
}
