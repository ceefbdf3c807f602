//! Diagonal flows `g_t = diag(e^{a₁t}, …, e^{a_d t})` and the expanding
//! horospherical block they normalise.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeBasis, MAX_DIM};

/// Largest exponent increment applied between two reductions in [`FlowSpec::advance`].
const MAX_STEP_GROWTH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    exponents: Vec<f64>,
}

impl FlowSpec {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        let d = exponents.len();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::unsupported("flows are supported in dimensions 2 and 3"));
        }
        if exponents.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("flow exponents must be finite"));
        }
        let sum: f64 = exponents.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(Error::invalid(alloc::format!("flow exponents must sum to zero (sum = {sum})")));
        }
        if !exponents.iter().any(|&a| a > 0.0) {
            return Err(Error::invalid("flow needs a positive exponent"));
        }
        Ok(FlowSpec { exponents })
    }

    /// `(n, …, n, −m, …, −m)` with `m` copies of `n` followed by `n` copies of `−m`.
    pub fn standard(m: usize, n: usize) -> Result<Self> {
        let mut e = alloc::vec![n as f64; m];
        e.extend(core::iter::repeat(-(m as f64)).take(n));
        FlowSpec::new(e)
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn max_abs_exponent(&self) -> f64 {
        self.exponents.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn factors(&self, t: f64) -> Vec<f64> {
        self.exponents.iter().map(|a| (a * t).exp()).collect()
    }

    /// `g_t · B`. The second value reports whether the determinant had
    /// drifted beyond `1e-12` and was renormalised.
    pub fn apply(&self, t: f64, basis: &LatticeBasis) -> (LatticeBasis, bool) {
        debug_assert_eq!(basis.dim(), self.dim());
        basis.scale_rows(&self.factors(t)).renormalized()
    }

    /// `g_t · B` followed by reduction, applied in steps so that the basis
    /// never becomes badly conditioned. The result generates the same
    /// lattice as `apply(t, B)` but is a reduced basis of it.
    pub fn advance(&self, t: f64, basis: &LatticeBasis) -> LatticeBasis {
        let rate = self.max_abs_exponent();
        let steps = ((rate * t.abs()) / MAX_STEP_GROWTH).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut b = basis.reduced();
        for _ in 0..steps {
            b = self.apply(dt, &b).0.reduced();
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorosphericalFrame {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    /// Row-major `m × n` matrix of `a_k − a_{m+ℓ}`.
    pub entry_exponents: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub delta: f64,
}

pub fn horospherical_frame(flow: &FlowSpec, m: usize, n: usize) -> Result<HorosphericalFrame> {
    let a = flow.exponents();
    if m == 0 || n == 0 || m + n != a.len() {
        return Err(Error::precondition(alloc::format!(
            "block sizes m = {m}, n = {n} do not match flow dimension {}",
            a.len()
        )));
    }
    if a[..m].iter().any(|&x| x <= 0.0) || a[m..].iter().any(|&x| x >= 0.0) {
        return Err(Error::precondition(
            "exponents must list the m positive entries first and the n negative ones after; permute coordinates",
        ));
    }
    let mut entry_exponents = Vec::with_capacity(m * n);
    for k in 0..m {
        for l in 0..n {
            entry_exponents.push(a[k] - a[m + l]);
        }
    }
    let lambda_min = entry_exponents.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = entry_exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let delta = entry_exponents.iter().sum();
    Ok(HorosphericalFrame { m, n, p: m * n, entry_exponents, lambda_min, lambda_max, delta })
}

impl HorosphericalFrame {
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// Row-major matrix `[[I_m, h], [0, I_n]]` for `h` in row-major order.
    pub fn unipotent(&self, h: &[f64]) -> [[f64; MAX_DIM]; MAX_DIM] {
        let mut u = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for k in 0..self.m {
            for l in 0..self.n {
                u[k][self.m + l] = h[k * self.n + l];
            }
        }
        u
    }

    pub fn apply_unipotent(&self, h: &[f64], basis: &LatticeBasis) -> LatticeBasis {
        basis.left_mul(&self.unipotent(h))
    }

    /// Conjugation `g_{−t} u(h) g_t = u(e^{−λt} ⊙ h)`.
    pub fn contract(&self, t: f64, h: &[f64]) -> Vec<f64> {
        h.iter().zip(&self.entry_exponents).map(|(x, l)| x * (-l * t).exp()).collect()
    }

    /// `g_t u(h) x`, computed stably and returned reduced.
    pub fn push(&self, flow: &FlowSpec, t: f64, h: &[f64], x: &LatticeBasis) -> LatticeBasis {
        flow.advance(t, &self.apply_unipotent(h, x))
    }
}

/// Log of the operator norm of `u(h)` when `‖h‖_op ≤ w`.
pub fn unipotent_log_norm(w: f64) -> f64 {
    (w / 2.0).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::NormKind;

    #[test]
    fn frames_of_standard_and_weighted_flows() {
        let f = horospherical_frame(&FlowSpec::standard(1, 1).unwrap(), 1, 1).unwrap();
        assert_eq!((f.p, f.lambda_min, f.lambda_max, f.delta), (1, 2.0, 2.0, 2.0));
        let f = horospherical_frame(&FlowSpec::new(alloc::vec![2.0, -1.0, -1.0]).unwrap(), 1, 2).unwrap();
        assert_eq!((f.p, f.lambda_min, f.lambda_max, f.delta), (2, 3.0, 3.0, 6.0));
        let w = FlowSpec::new(alloc::vec![2.0 / 3.0, 1.0 / 3.0, -1.0]).unwrap();
        let f = horospherical_frame(&w, 2, 1).unwrap();
        assert!((f.lambda_min - 4.0 / 3.0).abs() < 1e-15);
        assert!((f.lambda_max - 5.0 / 3.0).abs() < 1e-15);
        assert!((f.delta - 3.0).abs() < 1e-15);
    }

    #[test]
    fn unsorted_exponents_are_rejected() {
        let f = FlowSpec::new(alloc::vec![-1.0, 1.0]).unwrap();
        assert!(matches!(horospherical_frame(&f, 1, 1), Err(Error::Precondition(_))));
        assert!(FlowSpec::new(alloc::vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn group_law_and_axis_systole() {
        let f = FlowSpec::standard(1, 1).unwrap();
        let z = LatticeBasis::identity(2);
        assert_eq!(f.apply(0.0, &z).0, z);
        let (g, _) = f.apply(1.0, &z);
        assert!((g.systole(NormKind::Euclidean) - (-1.0f64).exp()).abs() < 1e-15);
        let b = LatticeBasis::from_cols(&[&[1.0, 0.0], &[0.5, 1.0]]).unwrap();
        let back = f.apply(1.0, &f.apply(-1.0, &b).0).0;
        for i in 0..2 {
            for j in 0..2 {
                assert!((back.entry(i, j) - b.entry(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn advance_matches_direct_flow_for_moderate_t() {
        let f = FlowSpec::standard(1, 1).unwrap();
        let x = LatticeBasis::from_cols(&[&[1.0, 0.0], &[0.3, 1.0]]).unwrap();
        let direct = f.apply(3.0, &x).0.systole(NormKind::Euclidean);
        let stepped = f.advance(3.0, &x).systole(NormKind::Euclidean);
        assert!((direct - stepped).abs() < 1e-10 * direct.max(1.0));
    }
}
