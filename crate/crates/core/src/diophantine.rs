//! Dirichlet-improvable systems of linear forms.
//!
//! `Y` (an `m × n` matrix) is `c`-improvable at `N` if some `p ∈ ℤ^m` and
//! `q ∈ ℤ^n` with `0 < ‖q‖_∞ < N` satisfy `‖Yq − p‖_∞ < c N^{−n/m}`. Along
//! `g_t = diag(e^{nt} I_m, e^{−mt} I_n)` this is the statement that
//! `g_t h_Y ℤ^{m+n}` has a nonzero vector of sup norm below `c^{m/(m+n)}`,
//! with `N = c^{m/(m+n)} e^{mt}`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dimension::{DimensionEstimate, IndicatorGrid};
use crate::error::{Error, Result};
use crate::flow::FlowSpec;
use crate::lattice::{LatticeBasis, NormKind};
use crate::mc::{map_indexed, Executor};

/// Cap on `q`-vector evaluations for one query.
pub const SEARCH_BUDGET: u64 = 500_000_000;
/// Relative half-width of the band where the two criteria may disagree.
pub const BOUNDARY_BAND: f64 = 0.01;

/// A matrix entry: a float, or an exact rational `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Real(f64),
    Rational(i128, i128),
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl Entry {
    pub fn parse(s: &str) -> Result<Entry> {
        let s = s.trim();
        let bad = || Error::invalid(alloc::format!("cannot parse matrix entry {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            let num: i128 = a.trim().parse().map_err(|_| bad())?;
            let den: i128 = b.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(Error::invalid("zero denominator"));
            }
            let g = gcd(num, den).max(1) * den.signum();
            return Ok(Entry::Rational(num / g, den / g));
        }
        if let Ok(k) = s.parse::<i128>() {
            return Ok(Entry::Rational(k, 1));
        }
        s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Entry::Real).ok_or_else(bad)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Entry::Real(x) => x,
            Entry::Rational(a, b) => a as f64 / b as f64,
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match *self {
            Entry::Real(x) => s.serialize_f64(x),
            Entry::Rational(a, 1) => s.serialize_str(&a.to_string()),
            Entry::Rational(a, b) => s.serialize_str(&alloc::format!("{a}/{b}")),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Num(f64),
    Str(String),
}

impl RawEntry {
    fn into_entry(self) -> Result<Entry> {
        match self {
            RawEntry::Num(x) => Ok(Entry::Real(x)),
            RawEntry::Str(s) => Entry::parse(&s),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        RawEntry::deserialize(d)?.into_entry().map_err(serde::de::Error::custom)
    }
}

/// Row-major `m × n` matrix. Serialized as a nested array; a bare scalar is
/// accepted for `1 × 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiMatrix {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<Entry>,
}

impl DiMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<Entry>) -> Result<Self> {
        if m == 0 || n == 0 || entries.len() != m * n {
            return Err(Error::invalid("matrix entries do not match its shape"));
        }
        Ok(DiMatrix { m, n, entries })
    }

    pub fn real(m: usize, n: usize, values: &[f64]) -> Result<Self> {
        Self::new(m, n, values.iter().map(|&x| Entry::Real(x)).collect())
    }

    pub fn scalar(x: f64) -> Self {
        DiMatrix { m: 1, n: 1, entries: vec![Entry::Real(x)] }
    }

    pub fn get(&self, i: usize, j: usize) -> Entry {
        self.entries[i * self.n + j]
    }

    pub fn is_rational(&self) -> bool {
        self.entries.iter().all(|e| matches!(e, Entry::Rational(..)))
    }

    /// Common denominator of all entries, if every entry is rational.
    pub fn common_denominator(&self) -> Option<i128> {
        let mut l: i128 = 1;
        for e in &self.entries {
            let Entry::Rational(_, b) = *e else { return None };
            l = l.checked_mul(b / gcd(l, b))?;
        }
        Some(l)
    }
}

impl Serialize for DiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[Entry]> = self.entries.chunks(self.n).collect();
        rows.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMatrix {
    Scalar(RawEntry),
    Rows(Vec<Vec<RawEntry>>),
}

impl<'de> Deserialize<'de> for DiMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match RawMatrix::deserialize(d)? {
            RawMatrix::Scalar(e) => Ok(DiMatrix { m: 1, n: 1, entries: vec![e.into_entry().map_err(D::Error::custom)?] }),
            RawMatrix::Rows(rows) => {
                let m = rows.len();
                let n = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != n) {
                    return Err(D::Error::custom("matrix rows differ in length"));
                }
                let entries = rows
                    .into_iter()
                    .flatten()
                    .map(RawEntry::into_entry)
                    .collect::<Result<Vec<_>>>()
                    .map_err(D::Error::custom)?;
                DiMatrix::new(m, n, entries).map_err(D::Error::custom)
            }
        }
    }
}

/// Evaluates `‖Yq − p‖_∞` with `p` the nearest integer vector.
enum FormEval {
    Real(Vec<f64>),
    /// Per row: common denominator and integer coefficients over it.
    Exact(Vec<(i128, Vec<i128>)>),
}

impl FormEval {
    fn new(y: &DiMatrix) -> Result<Self> {
        if !y.is_rational() {
            return Ok(FormEval::Real(y.entries.iter().map(Entry::value).collect()));
        }
        let overflow = || Error::budget("rational entries overflow i128", None);
        let mut rows = Vec::with_capacity(y.m);
        for i in 0..y.m {
            let mut den: i128 = 1;
            for j in 0..y.n {
                let Entry::Rational(_, b) = y.get(i, j) else { unreachable!() };
                den = den.checked_mul(b / gcd(den, b)).ok_or_else(overflow)?;
            }
            let coeffs = (0..y.n)
                .map(|j| {
                    let Entry::Rational(a, b) = y.get(i, j) else { unreachable!() };
                    a.checked_mul(den / b).ok_or_else(overflow)
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((den, coeffs));
        }
        Ok(FormEval::Exact(rows))
    }

    fn value(&self, n: usize, q: &[i64]) -> f64 {
        match self {
            FormEval::Real(y) => y
                .chunks(n)
                .map(|row| {
                    let s: f64 = row.iter().zip(q).map(|(a, &b)| a * b as f64).sum();
                    (s - s.round()).abs()
                })
                .fold(0.0, f64::max),
            FormEval::Exact(rows) => rows
                .iter()
                .map(|(den, coeffs)| {
                    // saturation only triggers for absurdly large inputs
                    let num: i128 = coeffs.iter().zip(q).map(|(a, &b)| a.saturating_mul(b as i128)).sum();
                    let r = num.rem_euclid(*den);
                    (r.min(den - r)) as f64 / *den as f64
                })
                .fold(0.0, f64::max),
        }
    }

    fn nearest_p(&self, n: usize, q: &[i64]) -> Vec<i64> {
        match self {
            FormEval::Real(y) => {
                y.chunks(n).map(|row| row.iter().zip(q).map(|(a, &b)| a * b as f64).sum::<f64>().round() as i64).collect()
            }
            FormEval::Exact(rows) => rows
                .iter()
                .map(|(den, coeffs)| {
                    let num: i128 = coeffs.iter().zip(q).map(|(a, &b)| a.saturating_mul(b as i128)).sum();
                    let fl = num.div_euclid(*den);
                    let r = num.rem_euclid(*den);
                    (if 2 * r > *den { fl + 1 } else { fl }) as i64
                })
                .collect(),
        }
    }
}

/// `a + b` as an unevaluated sum.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `Σ y_j q_j − p` in double-double arithmetic.
fn residual_dd(row: &[f64], q: &[i64], p: i64) -> f64 {
    let (mut hi, mut lo) = (-(p as f64), 0.0);
    for (&a, &b) in row.iter().zip(q) {
        let prod = a * b as f64;
        let err = a.mul_add(b as f64, -prod);
        let (s, e) = two_sum(hi, prod);
        hi = s;
        lo += e + err;
    }
    hi + lo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    /// Index of the matrix in the tuple that succeeded.
    pub i: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: u64,
    pub improvable: bool,
    /// Smallest `‖Y_i q − p‖_∞` over `0 < ‖q‖_∞ < N` and all `i`.
    pub best: f64,
    pub threshold: f64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiResult {
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub n_range: (u64, u64),
    pub per_n: Vec<PerN>,
    pub all_improvable_over_range: bool,
    pub first_failure: Option<u64>,
    pub last_checked: u64,
    /// `min_N (threshold − best)/threshold`.
    pub min_margin: f64,
}

fn search_cost(n: usize, n_hi: u64, k: usize) -> Option<u64> {
    let side = 2 * (n_hi - 1) + 1;
    side.checked_pow(n as u32).map(|v| (v - 1) / 2).and_then(|v| v.checked_mul(k as u64))
}

/// Largest `N` whose search fits the budget.
fn max_feasible_n(n: usize, k: usize) -> u64 {
    let (mut lo, mut hi) = (2u64, 1u64 << 40);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if search_cost(n, mid, k).is_some_and(|c| c <= SEARCH_BUDGET) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest form value over each shell `‖q‖_∞ = k`, `1 ≤ k ≤ kmax`, with
/// `q` taken up to sign. Returns `(value, q)` per shell.
fn shell_minima(eval: &FormEval, n: usize, kmax: u64) -> Vec<(f64, Vec<i64>)> {
    let mut best: Vec<(f64, Vec<i64>)> = vec![(f64::INFINITY, vec![0; n]); kmax as usize + 1];
    let k = kmax as i64;
    let mut q = vec![-k; n];
    loop {
        // first nonzero coordinate positive
        if let Some(&lead) = q.iter().find(|&&v| v != 0) {
            if lead > 0 {
                let shell = q.iter().map(|v| v.unsigned_abs()).max().unwrap() as usize;
                let v = eval.value(n, &q);
                if v < best[shell].0 {
                    best[shell] = (v, q.clone());
                }
            }
        }
        let mut j = n;
        loop {
            if j == 0 {
                return best;
            }
            j -= 1;
            if q[j] < k {
                q[j] += 1;
                break;
            }
            q[j] = -k;
        }
    }
}

/// Per-`N` check of `(Y_1, …, Y_k)` being jointly `c`-improvable, OR over `i`.
pub fn is_jointly_di(ys: &[DiMatrix], c: f64, n_range: (u64, u64)) -> Result<DiResult> {
    let Some(first) = ys.first() else {
        return Err(Error::invalid("need at least one matrix"));
    };
    let (m, n) = (first.m, first.n);
    if ys.iter().any(|y| y.m != m || y.n != n) {
        return Err(Error::invalid("all matrices must be m x n"));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::precondition("need 0 < c <= 1"));
    }
    let (lo, hi) = n_range;
    if lo < 1 || hi < lo {
        return Err(Error::precondition("need 1 <= N_lo <= N_hi"));
    }
    if !search_cost(n, hi, ys.len()).is_some_and(|cost| cost <= SEARCH_BUDGET) {
        return Err(Error::budget(
            alloc::format!("search over |q| < {hi} exceeds {SEARCH_BUDGET} evaluations"),
            Some(max_feasible_n(n, ys.len())),
        ));
    }
    let kmax = hi.saturating_sub(1);
    let evals = ys.iter().map(FormEval::new).collect::<Result<Vec<_>>>()?;
    let shells: Vec<Vec<(f64, Vec<i64>)>> = evals.iter().map(|e| shell_minima(e, n, kmax)).collect();

    let mut per_n = Vec::with_capacity((hi - lo + 1) as usize);
    // running minimum over shells 1..=k, across matrices
    let mut run: (f64, usize, usize) = (f64::INFINITY, 0, 0);
    let mut k_done = 0u64;
    for big_n in lo..=hi {
        while k_done < big_n - 1 {
            k_done += 1;
            for (i, s) in shells.iter().enumerate() {
                if s[k_done as usize].0 < run.0 {
                    run = (s[k_done as usize].0, i, k_done as usize);
                }
            }
        }
        let threshold = c * (big_n as f64).powf(-(n as f64) / m as f64);
        let improvable = run.0 < threshold;
        let witness = improvable.then(|| {
            let q = shells[run.1][run.2].1.clone();
            Witness { p: evals[run.1].nearest_p(n, &q), q, i: run.1, value: run.0 }
        });
        if let Some(w) = &witness {
            verify_witness(&ys[w.i], w, c, big_n)?;
        }
        per_n.push(PerN { n: big_n, improvable, best: run.0, threshold, witness });
    }
    let first_failure = per_n.iter().find(|r| !r.improvable).map(|r| r.n);
    let min_margin = per_n.iter().map(|r| (r.threshold - r.best) / r.threshold).fold(f64::INFINITY, f64::min);
    Ok(DiResult {
        m,
        n,
        c,
        n_range,
        all_improvable_over_range: first_failure.is_none(),
        first_failure,
        last_checked: hi,
        min_margin,
        per_n,
    })
}

pub fn is_dirichlet_improvable(y: &DiMatrix, c: f64, n_range: (u64, u64)) -> Result<DiResult> {
    is_jointly_di(core::slice::from_ref(y), c, n_range)
}

/// Re-checks the strict inequalities: exactly for rational `Y`, in
/// double-double arithmetic otherwise.
pub fn verify_witness(y: &DiMatrix, w: &Witness, c: f64, big_n: u64) -> Result<()> {
    let qn = w.q.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    if qn == 0 || qn >= big_n {
        return Err(Error::audit("witness q violates 0 < |q| < N"));
    }
    let threshold = c * (big_n as f64).powf(-(y.n as f64) / y.m as f64);
    let worst = if y.is_rational() {
        FormEval::new(y)?.value(y.n, &w.q)
    } else {
        let vals: Vec<f64> = y.entries.iter().map(Entry::value).collect();
        vals.chunks(y.n).zip(&w.p).map(|(row, &p)| residual_dd(row, &w.q, p).abs()).fold(0.0, f64::max)
    };
    if worst < threshold {
        Ok(())
    } else {
        Err(Error::audit(alloc::format!("witness fails recheck at N = {big_n}: {worst:e} >= {threshold:e}")))
    }
}

/// `N` past which a rational `Y` is improvable for every `c > 0`: `q = D e₁`
/// with `D` the common denominator gives `Yq ∈ ℤ^m`.
pub fn rational_improvability_bound(y: &DiMatrix) -> Option<u64> {
    y.common_denominator().and_then(|d| u64::try_from(d).ok())
}

pub fn dirichlet_flow(m: usize, n: usize) -> Result<FlowSpec> {
    let mut a = vec![n as f64; m];
    a.extend(core::iter::repeat(-(m as f64)).take(n));
    FlowSpec::new(a)
}

/// The lattice `h_Y ℤ^{m+n}` with `h_Y = [[I_m, Y], [0, I_n]]`.
pub fn lattice_of(y: &DiMatrix) -> Result<LatticeBasis> {
    let d = y.m + y.n;
    if d > crate::lattice::MAX_DIM {
        return Err(Error::unsupported("the lattice side is limited to m + n <= 3"));
    }
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else if i < y.m && j >= y.m { y.get(i, j - y.m).value() } else { 0.0 }).collect())
        .collect();
    LatticeBasis::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerT {
    pub t: f64,
    pub improvable: bool,
    /// `min_i λ₁^∞(g_t h_{Y_i} ℤ^{m+n}) / c^{m/(m+n)}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaniResult {
    pub c: f64,
    /// Start of the "sufficiently large t" range, `max(1, log(1/c)/m)`.
    pub t0: f64,
    pub per_t: Vec<PerT>,
    pub all_improvable_from_t0: bool,
}

pub fn dani_t0(c: f64, m: usize) -> f64 {
    (1.0f64).max((1.0 / c).ln() / m as f64)
}

/// Per-`t` sup-norm systole test along `g_t h_{Y_i} ℤ^{m+n}`.
pub fn dani_orbit_check(ys: &[DiMatrix], c: f64, t_grid: &[f64]) -> Result<DaniResult> {
    let Some(first) = ys.first() else {
        return Err(Error::invalid("need at least one matrix"));
    };
    let (m, n) = (first.m, first.n);
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::precondition("need 0 < c <= 1"));
    }
    if t_grid.iter().any(|&t| !(t >= 0.0) || t > 40.0) {
        return Err(Error::budget("t must lie in [0, 40] for the shortest-vector search", None));
    }
    let flow = dirichlet_flow(m, n)?;
    let lattices = ys.iter().map(lattice_of).collect::<Result<Vec<_>>>()?;
    let target = c.powf(m as f64 / (m + n) as f64);
    let per_t = t_grid
        .iter()
        .map(|&t| {
            let ratio = lattices
                .iter()
                .map(|x| flow.advance(t, x).systole(NormKind::Supremum) / target)
                .fold(f64::INFINITY, f64::min);
            PerT { t, improvable: ratio < 1.0, ratio }
        })
        .collect::<Vec<_>>();
    let t0 = dani_t0(c, m);
    let all = per_t.iter().filter(|p| p.t >= t0).all(|p| p.improvable);
    Ok(DaniResult { c, t0, per_t, all_improvable_from_t0: all })
}

/// `t` with `N = c^{m/(m+n)} e^{mt}`.
pub fn t_of_n(big_n: f64, c: f64, m: usize, n: usize) -> f64 {
    (big_n.ln() - m as f64 / (m + n) as f64 * c.ln()) / m as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub n: u64,
    pub t: f64,
    pub arithmetic: bool,
    pub dynamical: bool,
    pub ratio: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceAudit {
    pub checks: u64,
    pub agreements: u64,
    pub disagreements: Vec<Disagreement>,
    pub pass: bool,
}

/// Compares the arithmetic and dynamical criteria at every `N` of the range.
/// Disagreements are tolerated only when the dynamical ratio or the
/// arithmetic margin lies within [`BOUNDARY_BAND`] of 1.
pub fn correspondence_audit(y: &DiMatrix, c: f64, n_range: (u64, u64)) -> Result<CorrespondenceAudit> {
    let arith = is_dirichlet_improvable(y, c, n_range)?;
    let ts: Vec<f64> = arith.per_n.iter().map(|r| t_of_n(r.n as f64, c, y.m, y.n)).collect();
    let dyn_ = dani_orbit_check(core::slice::from_ref(y), c, &ts)?;
    let mut disagreements = Vec::new();
    for (a, d) in arith.per_n.iter().zip(&dyn_.per_t) {
        if a.improvable != d.improvable {
            let in_band = (d.ratio - 1.0).abs() < BOUNDARY_BAND || (a.best / a.threshold - 1.0).abs() < BOUNDARY_BAND;
            disagreements.push(Disagreement { n: a.n, t: d.t, arithmetic: a.improvable, dynamical: d.improvable, ratio: d.ratio, in_band });
        }
    }
    let checks = arith.per_n.len() as u64;
    Ok(CorrespondenceAudit {
        checks,
        agreements: checks - disagreements.len() as u64,
        pass: disagreements.iter().all(|d| d.in_band),
        disagreements,
    })
}

/// First `N ∈ [lo, hi]` at which the scalar tuple `ys` is not `c`-improvable.
fn first_failure_scalar(ys: &[f64], c: f64, lo: u64, hi: u64) -> Option<u64> {
    if lo <= 1 {
        return Some(1);
    }
    let mut best = f64::INFINITY;
    for big_n in 2..=hi {
        let q = (big_n - 1) as f64;
        for y in ys {
            let s = y * q;
            best = best.min((s - s.round()).abs());
        }
        if big_n >= lo && best >= c / big_n as f64 {
            return Some(big_n);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTrend {
    pub n_max: u64,
    pub surviving_fraction: f64,
    pub estimate: DimensionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiScan {
    pub c: f64,
    pub k: usize,
    pub n_min: u64,
    pub n_max: u64,
    pub grid_bits: u32,
    /// Per grid cell, the first failing `N` (0 if it survives the whole range).
    pub first_failure: Vec<u64>,
    pub surviving_fraction: f64,
    pub estimate: DimensionEstimate,
    pub trend: Vec<ScanTrend>,
}

/// Box-counting scan of the finite-range DI set for `m = n = 1` and `k ≤ 2`.
/// Cell `i` of the `2^grid_bits`-point grid over `[0,1]^k` is sampled at an
/// irrational offset so no sample is a low-height rational.
#[allow(clippy::too_many_arguments)]
pub fn di_dimension_scan<E: Executor>(
    exec: &E,
    shards: usize,
    c: f64,
    k: usize,
    n_min: u64,
    n_max: u64,
    grid_bits: u32,
    scales: &[u32],
    checkpoints: &[u64],
) -> Result<DiScan> {
    if !(1..=2).contains(&k) {
        return Err(Error::unsupported("dimension scans need m = n = 1 and k <= 2"));
    }
    if !(c > 0.0 && c <= 1.0) || n_min < 1 || n_max < n_min {
        return Err(Error::precondition("need 0 < c <= 1 and 1 <= N_min <= N_max"));
    }
    if grid_bits % k as u32 != 0 || grid_bits > 26 {
        return Err(Error::budget("grid must have at most 2^26 points split evenly across axes", Some(26)));
    }
    let cost = (1u64 << grid_bits).saturating_mul(n_max).saturating_mul(k as u64);
    if cost > 20 * SEARCH_BUDGET {
        return Err(Error::budget("scan exceeds the search budget", Some(20 * SEARCH_BUDGET / (k as u64 * n_max))));
    }
    let per_axis = 1usize << (grid_bits / k as u32);
    let offset = (5f64.sqrt() - 1.0) / 2.0;
    let total = per_axis.pow(k as u32);
    let first_failure: Vec<u64> = map_indexed(exec, total, shards, |mut i| {
        let mut ys = [0.0; 2];
        for y in ys.iter_mut().take(k) {
            *y = ((i % per_axis) as f64 + offset) / per_axis as f64;
            i /= per_axis;
        }
        first_failure_scalar(&ys[..k], c, n_min, n_max).unwrap_or(0)
    });
    let survives_to = |cap: u64| -> Vec<bool> { first_failure.iter().map(|&f| f == 0 || f > cap).collect() };
    let estimate_for = |cap: u64| -> Result<(f64, DimensionEstimate)> {
        let ind = survives_to(cap);
        let frac = ind.iter().filter(|&&b| b).count() as f64 / total as f64;
        let grid = IndicatorGrid::cells(k, per_axis, ind)?;
        Ok((frac, grid.dimension(scales)?))
    };
    let (surviving_fraction, estimate) = estimate_for(n_max)?;
    let trend = checkpoints
        .iter()
        .filter(|&&cap| cap >= n_min && cap <= n_max)
        .map(|&cap| estimate_for(cap).map(|(f, e)| ScanTrend { n_max: cap, surviving_fraction: f, estimate: e }))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiScan { c, k, n_min, n_max, grid_bits, first_failure, surviving_fraction, estimate, trend })
}
