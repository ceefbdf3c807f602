//! Box-counting dimension on `[0,1]^p` at dyadic scales.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::ols;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Exponents `j` of the scales `δ = 2^{−j}`.
    pub scales: Vec<u32>,
    pub log_inv_delta: Vec<f64>,
    pub log_counts: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub ci95: (f64, f64),
    pub r_squared: f64,
    /// The raw slope fell outside `[0, p]` and was clamped.
    pub clamped: bool,
    /// The set was empty at every scale.
    pub empty: bool,
    /// Finite-horizon truncation the set was computed at, if any.
    pub horizon: Option<u32>,
}

impl DimensionEstimate {
    pub fn excludes(&self, value: f64) -> bool {
        value < self.ci95.0 || value > self.ci95.1
    }
}

/// Least-squares slope of `log N(δ)` against `log(1/δ)` with a 95% interval.
pub fn dimension_from_counts(scales: &[u32], counts: &[u64], p: usize) -> Result<DimensionEstimate> {
    if scales.len() < 4 {
        return Err(Error::precondition("box counting needs at least 4 scales"));
    }
    if scales.len() != counts.len() {
        return Err(Error::invalid("scales and counts differ in length"));
    }
    let ln2 = 2f64.ln();
    let log_inv_delta: Vec<f64> = scales.iter().map(|&j| j as f64 * ln2).collect();
    let mut est = DimensionEstimate {
        scales: scales.to_vec(),
        log_inv_delta,
        log_counts: Vec::new(),
        counts: counts.to_vec(),
        slope: 0.0,
        ci95: (0.0, 0.0),
        r_squared: 1.0,
        clamped: false,
        empty: false,
        horizon: None,
    };
    if counts.iter().all(|&c| c == 0) {
        est.empty = true;
        return Ok(est);
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::invalid("set is empty at some scales but not others"));
    }
    est.log_counts = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = ols(&est.log_inv_delta, &est.log_counts)?;
    let (lo, hi) = fit.slope_ci95();
    let top = p as f64;
    est.clamped = fit.slope < 0.0 || fit.slope > top;
    est.slope = fit.slope.clamp(0.0, top);
    est.ci95 = (lo.clamp(0.0, top), hi.clamp(0.0, top));
    est.r_squared = fit.r_squared;
    Ok(est)
}

/// Boolean field on `[0,1]^p`, axis 0 fastest. Samples sit on the nodes
/// `i/(res−1)`, or inside the cells `[i/res, (i+1)/res)` when `cells` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorGrid {
    pub p: usize,
    pub res: usize,
    #[serde(default)]
    pub cells: bool,
    pub data: Vec<bool>,
}

impl IndicatorGrid {
    pub fn new(p: usize, res: usize, data: Vec<bool>) -> Result<Self> {
        if p == 0 || res < 2 || res.checked_pow(p as u32) != Some(data.len()) {
            return Err(Error::invalid("indicator grid has inconsistent shape"));
        }
        Ok(IndicatorGrid { p, res, cells: false, data })
    }

    pub fn cells(p: usize, res: usize, data: Vec<bool>) -> Result<Self> {
        Ok(IndicatorGrid { cells: true, ..Self::new(p, res, data)? })
    }

    fn spacing(&self) -> usize {
        if self.cells {
            self.res
        } else {
            self.res - 1
        }
    }

    pub fn from_fn(p: usize, res: usize, f: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let total = res.checked_pow(p as u32).ok_or_else(|| Error::budget("grid too large", None))?;
        let mut x = alloc::vec![0.0; p];
        let data = (0..total)
            .map(|mut i| {
                for xk in x.iter_mut() {
                    *xk = (i % res) as f64 / (res - 1) as f64;
                    i /= res;
                }
                f(&x)
            })
            .collect();
        Self::new(p, res, data)
    }

    /// Number of dyadic boxes of side `2^{−j}` holding at least one member node.
    pub fn count_boxes(&self, j: u32) -> u64 {
        let cells = 1usize << j;
        let axis: Vec<usize> = (0..self.res).map(|i| ((i * cells) / self.spacing()).min(cells - 1)).collect();
        let mut seen = alloc::vec![false; cells.pow(self.p as u32)];
        let mut count = 0;
        for (mut i, &on) in self.data.iter().enumerate() {
            if !on {
                continue;
            }
            let mut idx = 0;
            let mut stride = 1;
            for _ in 0..self.p {
                idx += axis[i % self.res] * stride;
                stride *= cells;
                i /= self.res;
            }
            if !seen[idx] {
                seen[idx] = true;
                count += 1;
            }
        }
        count
    }

    pub fn dimension(&self, scales: &[u32]) -> Result<DimensionEstimate> {
        if let Some(&j) = scales.iter().find(|&&j| (1usize << j) > self.spacing()) {
            return Err(Error::precondition(alloc::format!(
                "scale 2^-{j} is finer than the grid spacing 1/{}",
                self.spacing()
            )));
        }
        let counts: Vec<u64> = scales.iter().map(|&j| self.count_boxes(j)).collect();
        dimension_from_counts(scales, &counts, self.p)
    }
}

/// Finite union of closed intervals in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| !(0.0 <= a && a <= b && b <= 1.0)) {
            return Err(Error::invalid("intervals must satisfy 0 <= a <= b <= 1"));
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(IntervalSet { intervals })
    }

    pub fn contains(&self, x: f64) -> bool {
        let k = self.intervals.partition_point(|iv| iv.0 <= x);
        self.intervals[..k].iter().rev().take(64).any(|&(a, b)| a <= x && x <= b)
    }

    /// Number of boxes `[k2^{−j}, (k+1)2^{−j})` meeting the set (the last box is closed).
    pub fn count_boxes(&self, j: u32) -> u64 {
        let cells = 1i64 << j;
        let scale = cells as f64;
        let mut count = 0u64;
        let mut next_free = i64::MIN;
        for &(a, b) in &self.intervals {
            let lo = ((a * scale).floor() as i64).min(cells - 1).max(next_free);
            let hi = ((b * scale).floor() as i64).min(cells - 1);
            if hi >= lo {
                count += (hi - lo + 1) as u64;
                next_free = hi + 1;
            }
        }
        count
    }

    pub fn dimension(&self, scales: &[u32]) -> Result<DimensionEstimate> {
        let counts: Vec<u64> = scales.iter().map(|&j| self.count_boxes(j)).collect();
        dimension_from_counts(scales, &counts, 1)
    }
}

/// The `2^depth` intervals of the middle-thirds construction.
pub fn cantor_intervals(depth: u32) -> IntervalSet {
    let mut ivs = alloc::vec![(0.0f64, 1.0f64)];
    for _ in 0..depth {
        ivs = ivs
            .iter()
            .flat_map(|&(a, b)| {
                let w = (b - a) / 3.0;
                [(a, a + w), (b - w, b)]
            })
            .collect();
    }
    IntervalSet { intervals: ivs }
}

/// Cylinders of depth `depth` of `{x ∈ (0,1) : all partial quotients ≤ bound}`:
/// the interval between `p_n/q_n` and `(p_n + p_{n−1})/(q_n + q_{n−1})` for each
/// admissible word.
pub fn cf_bounded_cylinders(bound: u32, depth: u32) -> Result<IntervalSet> {
    if bound < 1 || depth < 1 {
        return Err(Error::precondition("need bound >= 1 and depth >= 1"));
    }
    let total = (bound as u64).checked_pow(depth).filter(|&n| n <= 50_000_000);
    if total.is_none() {
        return Err(Error::budget("too many cylinders", None));
    }
    let mut out = Vec::with_capacity(total.unwrap() as usize);
    // (p_{n-1}, q_{n-1}, p_n, q_n) with x = [0; a_1, a_2, …]
    let mut stack: Vec<(u32, f64, f64, f64, f64)> = alloc::vec![(0, 1.0, 0.0, 0.0, 1.0)];
    while let Some((n, pm, qm, p, q)) = stack.pop() {
        if n == depth {
            let a = p / q;
            let b = (p + pm) / (q + qm);
            out.push((a.min(b), a.max(b)));
            continue;
        }
        for a in 1..=bound {
            let a = a as f64;
            stack.push((n + 1, p, q, a * p + pm, a * q + qm));
        }
    }
    IntervalSet::new(out)
}
