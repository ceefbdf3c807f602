//! Bookkeeping for the covering combination: alternation counts of subsets
//! of `{1, …, N}`, the subset-sum inequality, and the combined constants.
//!
//! Subsets are bitmasks: bit `i − 1` set means `i ∈ J`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SUBSET_N: u32 = 20;

/// `(d, d′)`: the number of `i < N` with `i ∈ J, i+1 ∉ J`, and with `i ∉ J, i+1 ∈ J`.
pub fn d_counts(j: u32, n: u32) -> (u32, u32) {
    let mut d = 0;
    let mut d_prime = 0;
    for i in 0..n.saturating_sub(1) {
        let here = j >> i & 1 == 1;
        let next = j >> (i + 1) & 1 == 1;
        if here && !next {
            d += 1;
        }
        if !here && next {
            d_prime += 1;
        }
    }
    (d, d_prime)
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::precondition("need N >= 1"));
    }
    if n > MAX_SUBSET_N {
        return Err(Error::budget(alloc::format!("subset enumeration is limited to N <= {MAX_SUBSET_N}"), Some(MAX_SUBSET_N as u64)));
    }
    Ok(())
}

/// Exponents `(N − |J| − d, |J| − d, 2d)` of the subset-sum term for `J`.
pub fn subset_exponents(j: u32, n: u32) -> (u32, u32, u32) {
    let size = j.count_ones();
    let (d, _) = d_counts(j, n);
    (n - size - d, size - d, 2 * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSubsetSum {
    pub lhs: u128,
    pub rhs: u128,
    pub pass: bool,
}

/// `Σ_J n₁^{N−|J|−d} n₂^{|J|−d} n₃^{2d} ≤ (n₁+n₂+n₃)^N` in exact integer
/// arithmetic. Both sides are homogeneous of degree `N`, so rational
/// triples reduce to integer ones by clearing denominators.
pub fn subset_sum_bound_exact(n1: u64, n2: u64, n3: u64, n: u32) -> Result<ExactSubsetSum> {
    check_n(n)?;
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::precondition("need n1, n2, n3 > 0"));
    }
    let overflow = || Error::budget("subset sum exceeds u128", None);
    let rhs = (n1 as u128 + n2 as u128 + n3 as u128).checked_pow(n).ok_or_else(overflow)?;
    let mut lhs: u128 = 0;
    for j in 0u32..(1 << n) {
        let (e1, e2, e3) = subset_exponents(j, n);
        let term = (n1 as u128)
            .checked_pow(e1)
            .and_then(|a| a.checked_mul((n2 as u128).checked_pow(e2)?))
            .and_then(|a| a.checked_mul((n3 as u128).checked_pow(e3)?))
            .ok_or_else(overflow)?;
        lhs = lhs.checked_add(term).ok_or_else(overflow)?;
    }
    Ok(ExactSubsetSum { lhs, rhs, pass: lhs <= rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetSum {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Floating-point version for real triples.
pub fn subset_sum_bound(n1: f64, n2: f64, n3: f64, n: u32) -> Result<SubsetSum> {
    check_n(n)?;
    if !(n1 > 0.0 && n2 > 0.0 && n3 > 0.0) {
        return Err(Error::precondition("need n1, n2, n3 > 0"));
    }
    let mut lhs = 0.0;
    for j in 0u32..(1 << n) {
        let (e1, e2, e3) = subset_exponents(j, n);
        lhs += n1.powi(e1 as i32) * n2.powi(e2 as i32) * n3.powi(e3 as i32);
    }
    let rhs = (n1 + n2 + n3).powi(n as i32);
    Ok(SubsetSum { lhs, rhs, pass: lhs <= rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverConstants {
    pub k1: f64,
    pub a1: f64,
    pub k2: f64,
    pub a2: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub p: usize,
    pub theta: f64,
    pub r: f64,
}

impl CoverConstants {
    /// `(c₂/c₁)(θ/r + 8√p)^p`, the cost of refining a θ-box into r-boxes.
    pub fn refinement(&self) -> f64 {
        self.c2 / self.c1 * (self.theta / self.r + 8.0 * (self.p as f64).sqrt()).powi(self.p as i32)
    }

    fn validate(&self) -> Result<()> {
        if self.theta < self.r {
            return Err(Error::precondition("need theta >= r"));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.a1 > 0.0 && self.a2 > 0.0 && self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::precondition("cover constants must be positive"));
        }
        Ok(())
    }
}

/// `k₃ = (1+C₀)(c₂/c₁)(θ/r + 8√p)^p k₁ k₂²` and `a₃ = a₁ + a₂ + √(k₃ a₂)`.
pub fn combine_cover_constants(cc: &CoverConstants) -> Result<(f64, f64)> {
    cc.validate()?;
    let k3 = (1.0 + cc.c0) * cc.refinement() * cc.k1 * cc.k2 * cc.k2;
    let a3 = cc.a1 + cc.a2 + (k3 * cc.a2).sqrt();
    Ok((k3, a3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationAudit {
    pub n: u32,
    /// Box count for each `J`, divided by `e^{δNt}`.
    pub per_subset: Vec<f64>,
    pub total: f64,
    pub bound: f64,
    pub k3: f64,
    pub a3: f64,
    pub pass: bool,
}

/// Walks the block decomposition of every `J ⊆ {1, …, N}` and multiplies
/// the box counts the induction charges for each block, then compares the
/// sum with `k₃ e^{δNt} a₃^N`. The common factor `e^{δNt}` is divided out.
pub fn combination_audit(cc: &CoverConstants, n: u32) -> Result<CombinationAudit> {
    check_n(n)?;
    let (k3, a3) = combine_cover_constants(cc)?;
    let refine = (1.0 + cc.c0) * cc.refinement() * cc.k1;
    let mut per_subset = Vec::with_capacity(1 << n);
    for j in 0u32..(1 << n) {
        let mut count = 1.0;
        let mut i = 0;
        let mut first = true;
        while i < n {
            let in_j = j >> i & 1 == 1;
            let mut len = 0;
            while i < n && (j >> i & 1 == 1) == in_j {
                len += 1;
                i += 1;
            }
            count *= match (in_j, first) {
                (true, true) => cc.k2 * cc.a2.powi(len),
                (false, true) => cc.k1 * cc.a1.powi(len),
                (true, false) => cc.k2 * cc.a2.powi(len),
                (false, false) => refine * cc.a1.powi(len - 1),
            };
            first = false;
        }
        per_subset.push(count);
    }
    let total: f64 = per_subset.iter().sum();
    let bound = k3 * a3.powi(n as i32);
    Ok(CombinationAudit { n, per_subset, total, bound, k3, a3, pass: total <= bound })
}
