//! Shapes of planar unimodular lattices.
//!
//! A lattice `g Z^2` up to rotation is determined by `τ = b₂/b₁` (columns
//! read as complex numbers) modulo the action of SL₂(Z). We reduce `τ` into
//! the closed fundamental domain with the half-open convention
//! `Re τ ∈ (−1/2, 1/2]` and, on the unit circle, `Re τ ≥ 0`.

use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::mc::McRng;

const UNIT_CIRCLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePoint2D {
    pub re: f64,
    pub im: f64,
}

impl ShapePoint2D {
    pub fn new(re: f64, im: f64) -> Self {
        ShapePoint2D { re, im }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Membership in the closed standard fundamental domain.
    pub fn in_fundamental_domain(&self) -> bool {
        self.im > 0.0 && self.re.abs() <= 0.5 + 1e-12 && self.norm_sqr() >= 1.0 - 1e-9
    }

    /// Covolume-one basis with columns `(1, 0)/√y` and `(x, y)/√y`.
    pub fn to_basis(&self) -> LatticeBasis {
        let s = 1.0 / self.im.sqrt();
        let mut cols = [[0.0; 3]; 3];
        cols[0][0] = s;
        cols[1][0] = self.re * s;
        cols[1][1] = self.im * s;
        LatticeBasis::from_raw(2, cols)
    }

    /// Euclidean systole of the lattice, valid for reduced shapes.
    pub fn systole(&self) -> f64 {
        1.0 / self.im.sqrt()
    }
}

/// Reduces an upper half-plane point into the fundamental domain.
pub fn reduce_tau(mut x: f64, mut y: f64) -> ShapePoint2D {
    for _ in 0..10_000 {
        x -= (x - 0.5).ceil();
        let n = x * x + y * y;
        if n < 1.0 - UNIT_CIRCLE_EPS {
            x = -x / n;
            y /= n;
        } else {
            break;
        }
    }
    if (x * x + y * y - 1.0).abs() <= UNIT_CIRCLE_EPS && x < 0.0 {
        x = -x;
    }
    ShapePoint2D { re: x, im: y }
}

/// Unreduced `τ = b₂ / b₁` of a planar basis.
pub fn tau_of(basis: &LatticeBasis) -> Result<(f64, f64)> {
    if basis.dim() != 2 {
        return Err(Error::unsupported("shape coordinates exist only for d = 2"));
    }
    let (a, c) = (basis.entry(0, 0), basis.entry(1, 0));
    let (b, d) = (basis.entry(0, 1), basis.entry(1, 1));
    let n = a * a + c * c;
    // (b + i d) / (a + i c)
    Ok(((b * a + d * c) / n, (d * a - b * c) / n))
}

pub fn reduce_shape_2d(basis: &LatticeBasis) -> Result<ShapePoint2D> {
    let (x, y) = tau_of(basis)?;
    Ok(reduce_tau(x, y))
}

/// Hyperbolic distance on the upper half-plane.
pub fn hyperbolic_distance(a: ShapePoint2D, b: ShapePoint2D) -> f64 {
    let dx = a.re - b.re;
    let dy = a.im - b.im;
    (1.0 + (dx * dx + dy * dy) / (2.0 * a.im * b.im)).acosh()
}

fn apply_word(mut p: ShapePoint2D, word: &[u8]) -> ShapePoint2D {
    for &g in word {
        p = match g {
            0 => {
                let n = p.norm_sqr();
                ShapePoint2D { re: -p.re / n, im: p.im / n }
            }
            1 => ShapePoint2D { re: p.re + 1.0, im: p.im },
            _ => ShapePoint2D { re: p.re - 1.0, im: p.im },
        };
    }
    p
}

/// Distance in the modular surface between two reduced shapes: the minimum
/// over images of `b` under SL₂(Z) words of length at most `max_len` in the
/// generators `τ ↦ −1/τ`, `τ ↦ τ ± 1`.
pub fn quotient_distance(a: ShapePoint2D, b: ShapePoint2D, max_len: usize) -> f64 {
    let mut best = hyperbolic_distance(a, b);
    let mut word = [0u8; 8];
    let max_len = max_len.min(word.len());
    for len in 1..=max_len {
        let total = 3usize.pow(len as u32);
        for code in 0..total {
            let mut c = code;
            for w in word.iter_mut().take(len) {
                *w = (c % 3) as u8;
                c /= 3;
            }
            best = best.min(hyperbolic_distance(a, apply_word(b, &word[..len])));
        }
    }
    best
}

/// Surrogate metric on X at d = 2: the hyperbolic distance between reduced
/// shapes in the modular surface. It ignores the rotation fiber.
pub fn dist_proxy(x: &LatticeBasis, y: &LatticeBasis) -> Result<f64> {
    let a = reduce_shape_2d(x)?;
    let b = reduce_shape_2d(y)?;
    Ok(quotient_distance(a, b, 3))
}

/// Haar-random point of the modular surface.
pub fn sample_shape(rng: &mut McRng) -> ShapePoint2D {
    let y0 = 3f64.sqrt() / 2.0;
    loop {
        let x = rng.gen::<f64>() - 0.5;
        // 1 - gen() lies in (0, 1], so y is finite
        let y = y0 / (1.0 - rng.gen::<f64>());
        if x * x + y * y >= 1.0 {
            return ShapePoint2D { re: x, im: y };
        }
    }
}

/// Haar-random unimodular planar lattice: a random shape with a uniformly
/// random rotation applied.
pub fn sample_haar_2d(rng: &mut McRng) -> LatticeBasis {
    let tau = sample_shape(rng);
    let phi = 2.0 * PI * rng.gen::<f64>();
    rotate(&tau.to_basis(), phi)
}

pub fn rotate(basis: &LatticeBasis, phi: f64) -> LatticeBasis {
    let (s, c) = phi.sin_cos();
    basis.left_mul(&[[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Basis `diag(ε, 1/ε)` rotated by `phi`; its systole is `ε` for `ε ≤ 1`.
pub fn cusp_point(eps: f64, phi: f64) -> LatticeBasis {
    rotate(&LatticeBasis::identity(2).scale_rows(&[eps, 1.0 / eps]), phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::McConfig;

    #[test]
    fn square_lattice_is_i() {
        let t = reduce_shape_2d(&LatticeBasis::identity(2)).unwrap();
        assert_eq!((t.re, t.im), (0.0, 1.0));
    }

    #[test]
    fn boundary_convention_keeps_plus_half() {
        let b = LatticeBasis::from_cols(&[&[1.0, 0.0], &[0.5, 1.0]]).unwrap();
        let t = reduce_shape_2d(&b).unwrap();
        assert_eq!((t.re, t.im), (0.5, 1.0));
        let t = reduce_tau(-0.5, 1.0);
        assert_eq!((t.re, t.im), (0.5, 1.0));
    }

    #[test]
    fn hexagonal_point_is_fixed() {
        let (x, y) = (0.5, 3f64.sqrt() / 2.0);
        let t = reduce_tau(x, y);
        assert!((t.re - x).abs() < 1e-15 && (t.im - y).abs() < 1e-15);
        let t = reduce_tau(-x, y);
        assert!((t.re - x).abs() < 1e-15);
    }

    #[test]
    fn distances() {
        let i = ShapePoint2D::new(0.0, 1.0);
        let d = hyperbolic_distance(i, ShapePoint2D::new(0.0, 2.0));
        assert!((d - 2f64.ln()).abs() < 1e-12);
        let hex = ShapePoint2D::new(0.5, 3f64.sqrt() / 2.0);
        let expected = 0.5 * 3f64.ln();
        assert!((quotient_distance(i, hex, 3) - expected).abs() < 1e-12);
    }

    #[test]
    fn sampled_shapes_lie_in_domain() {
        let mut rng = McConfig::new(3, 0).rng(0, 0);
        for _ in 0..1000 {
            let b = sample_haar_2d(&mut rng);
            assert!((b.det() - 1.0).abs() < 1e-9);
            let t = reduce_shape_2d(&b).unwrap();
            assert!(t.in_fundamental_domain());
        }
    }
}
