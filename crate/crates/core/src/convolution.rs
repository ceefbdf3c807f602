//! Density of the convolution measures `ν_{n,t}` for an abelian block.
//!
//! For abelian `P`, `η_{n,t}(h₁, …, h_n) = Σ_i e^{−λ(i−1)t} ⊙ h_i`, so
//! `ν_{n,t}` is the law of `h₁ + T` with the tail `T = Σ_{i≥2} e^{−λ(i−1)t} h_i`
//! independent of `h₁ ~ ν`. Its density relative to `ν` at `y` is
//! `P(y − T ∈ B^P(1))`. Whenever `|y| ≤ 1/2` and `|T| ≤ 1/2` surely, that
//! probability is exactly one.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::HorosphericalFrame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: usize,
    pub t: f64,
    pub t1: f64,
    /// Sup-norm bound on the tail `Σ_{i≥2} e^{−λ_min(i−1)t}`.
    pub tail_bound: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// True when the ratio was certified identically one by the support argument.
    pub certified_flat: bool,
    pub pass: bool,
}

/// `t₁ = log 4 / λ_min`: the first time the block contracts by 1/4.
pub fn t1(frame: &HorosphericalFrame) -> f64 {
    4f64.ln() / frame.lambda_min
}

/// CDF of `Σ w_i s_i` with `s_i` uniform on `[−1, 1]`, clamped to exactly
/// 0 and 1 outside the support `[−Σw, Σw]`.
pub fn uniform_sum_cdf(weights: &[f64], x: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    if x <= -total {
        return 0.0;
    }
    if x >= total {
        return 1.0;
    }
    let m = weights.len();
    if m == 0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    // inclusion-exclusion over the 2^m corners of the box
    let mut fact = 1.0;
    for k in 1..=m {
        fact *= k as f64;
    }
    let scale: f64 = weights.iter().map(|w| 2.0 * w).product::<f64>() * fact;
    let mut acc = 0.0;
    for mask in 0u32..(1u32 << m) {
        let mut shift = 0.0;
        let mut sign = 1.0;
        for (i, w) in weights.iter().enumerate() {
            if mask & (1 << i) != 0 {
                shift -= w;
                sign = -sign;
            } else {
                shift += w;
            }
        }
        let z = x + shift;
        if z > 0.0 {
            acc += sign * z.powi(m as i32);
        }
    }
    (acc / scale).clamp(0.0, 1.0)
}

/// Minimum over `B^P(1/2)` of `dν_{n,t}/dν`.
///
/// For `p = 1` the ratio `F_T(y+1) − F_T(y−1)` is evaluated on a grid of
/// `[−1/2, 1/2]`. For `p > 1` only the support certificate is available.
pub fn convolution_density_check(frame: &HorosphericalFrame, t: f64, n: usize) -> Result<DensityReport> {
    if n == 0 {
        return Err(Error::precondition("need n >= 1"));
    }
    let t1 = t1(frame);
    if t < t1 {
        return Err(Error::precondition(alloc::format!("need t >= log 4 / lambda_min = {t1:.6}, got {t}")));
    }
    let q = (-frame.lambda_min * t).exp();
    let tail_bound: f64 = (1..n).map(|i| q.powi(i as i32)).sum();
    let certified_flat = tail_bound <= 0.5;
    let (min_ratio, max_ratio) = if frame.p == 1 {
        let lambda = frame.entry_exponents[0];
        let weights: Vec<f64> = (1..n).map(|i| (-lambda * i as f64 * t).exp()).collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..=1000 {
            let y = -0.5 + j as f64 / 1000.0;
            let r = uniform_sum_cdf(&weights, y + 1.0) - uniform_sum_cdf(&weights, y - 1.0);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    } else if certified_flat {
        (1.0, 1.0)
    } else {
        return Err(Error::unsupported("density for p > 1 is only available through the support certificate"));
    };
    Ok(DensityReport { n, t, t1, tail_bound, min_ratio, max_ratio, certified_flat, pass: min_ratio >= 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{horospherical_frame, FlowSpec};

    #[test]
    fn cdf_of_single_uniform_and_triangle() {
        assert!((uniform_sum_cdf(&[1.0], 0.0) - 0.5).abs() < 1e-15);
        assert!((uniform_sum_cdf(&[1.0], 0.5) - 0.75).abs() < 1e-15);
        // sum of two U[-1,1]: triangular on [-2,2], F(1) = 1 - (1/8)
        assert!((uniform_sum_cdf(&[1.0, 1.0], 1.0) - 0.875).abs() < 1e-15);
        assert_eq!(uniform_sum_cdf(&[0.1, 0.2], 0.3), 1.0);
    }

    #[test]
    fn flat_ratio_for_standard_flow() {
        let frame = horospherical_frame(&FlowSpec::standard(1, 1).unwrap(), 1, 1).unwrap();
        for n in 1..=10 {
            let r = convolution_density_check(&frame, 1.0, n).unwrap();
            assert_eq!((r.min_ratio, r.max_ratio), (1.0, 1.0));
            assert!(r.pass && r.certified_flat);
        }
        assert!(convolution_density_check(&frame, 0.5, 2).is_err());
    }
}
