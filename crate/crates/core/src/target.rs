//! Symbolic open sets in X.
//!
//! Besides membership, every [`TargetSet`] answers two conservative
//! questions about the image of a point under an unknown group element of
//! bounded size (see [`Displacement`]): whether the image *may* lie in the
//! set and whether it *surely* does. These drive the pruning in the
//! recursive cover and the inner cores used by the measure bounds.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeBasis, NormKind};
use crate::mc::{mc_mean, Estimate, Executor, McConfig};
use crate::shape::{quotient_distance, reduce_shape_2d, sample_haar_2d, ShapePoint2D};

/// Default Lipschitz constant of `log λ₁` with respect to the surrogate metric.
pub const DEFAULT_KAPPA: f64 = 1.0;

/// Bound on a group element `g` acting on a lattice: `log ‖g‖_op` and
/// `log ‖g⁻¹‖_op` are at most `log_norm`, and `g` moves shapes by at most
/// `shape` in hyperbolic distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub log_norm: f64,
    pub shape: f64,
}

impl Displacement {
    pub const ZERO: Displacement = Displacement { log_norm: 0.0, shape: 0.0 };

    /// Unipotents `u(h)` with `‖h‖_F ≤ w`: `‖u(h)‖_op ≤ (w + √(w²+4))/2`,
    /// and an element of norm `e^L` moves a planar shape by at most `2L`.
    pub fn unipotent(w: f64) -> Self {
        let l = crate::flow::unipotent_log_norm(w);
        Displacement { log_norm: l, shape: 2.0 * l }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSet {
    Whole,
    Empty,
    /// `λ₁ < eps` (Euclidean systole).
    SystoleBelow { eps: f64 },
    /// `λ₁ > eps`.
    SystoleAbove { eps: f64 },
    /// Planar shapes at quotient distance `< radius` from `center`.
    ShapeBall { center: ShapePoint2D, radius: f64 },
    /// Sup-norm systole at least `c^{m/(m+n)} e^{core_log}`.
    DirichletTarget { c: f64, m: usize, n: usize, core_log: f64 },
    Complement { inner: Box<TargetSet> },
    /// Product over consecutive factors of a point of `X^k`.
    Product { parts: Vec<TargetSet> },
}

fn sup_systole(x: &LatticeBasis) -> f64 {
    x.systole(NormKind::Supremum)
}

fn euclid_systole(x: &LatticeBasis) -> f64 {
    x.systole(NormKind::Euclidean)
}

impl TargetSet {
    pub fn systole_below(eps: f64) -> Self {
        TargetSet::SystoleBelow { eps }
    }

    pub fn systole_above(eps: f64) -> Self {
        TargetSet::SystoleAbove { eps }
    }

    pub fn shape_ball(center: ShapePoint2D, radius: f64) -> Self {
        TargetSet::ShapeBall { center, radius }
    }

    pub fn dirichlet(c: f64, m: usize, n: usize) -> Self {
        TargetSet::DirichletTarget { c, m, n, core_log: 0.0 }
    }

    pub fn complement(self) -> Self {
        TargetSet::Complement { inner: Box::new(self) }
    }

    /// Number of lattices a point of this set consists of.
    pub fn arity(&self) -> usize {
        match self {
            TargetSet::Product { parts } => parts.iter().map(TargetSet::arity).sum(),
            TargetSet::Complement { inner } => inner.arity(),
            _ => 1,
        }
    }

    fn threshold_dirichlet(c: f64, m: usize, n: usize, core_log: f64) -> f64 {
        c.powf(m as f64 / (m + n) as f64) * core_log.exp()
    }

    pub fn contains(&self, x: &LatticeBasis) -> bool {
        self.contains_point(core::slice::from_ref(x))
    }

    /// Membership of a point of `X^k`, given as `k` lattices.
    pub fn contains_point(&self, xs: &[LatticeBasis]) -> bool {
        match self {
            TargetSet::Whole => true,
            TargetSet::Empty => false,
            TargetSet::SystoleBelow { eps } => euclid_systole(&xs[0]) < *eps,
            TargetSet::SystoleAbove { eps } => euclid_systole(&xs[0]) > *eps,
            TargetSet::ShapeBall { center, radius } => match reduce_shape_2d(&xs[0]) {
                Ok(tau) => quotient_distance(*center, tau, 3) < *radius,
                Err(_) => false,
            },
            TargetSet::DirichletTarget { c, m, n, core_log } => {
                sup_systole(&xs[0]) >= Self::threshold_dirichlet(*c, *m, *n, *core_log)
            }
            TargetSet::Complement { inner } => !inner.contains_point(xs),
            TargetSet::Product { parts } => {
                let mut rest = xs;
                parts.iter().all(|part| {
                    let (head, tail) = rest.split_at(part.arity());
                    rest = tail;
                    part.contains_point(head)
                })
            }
        }
    }

    /// False only if no image `g x` with `g` bounded by `disp` lies in the set.
    pub fn may_meet(&self, x: &LatticeBasis, disp: Displacement) -> bool {
        let grow = disp.log_norm.exp();
        match self {
            TargetSet::Whole => true,
            TargetSet::Empty => false,
            TargetSet::SystoleBelow { eps } => euclid_systole(x) / grow < *eps,
            TargetSet::SystoleAbove { eps } => euclid_systole(x) * grow > *eps,
            TargetSet::ShapeBall { center, radius } => match reduce_shape_2d(x) {
                Ok(tau) => quotient_distance(*center, tau, 3) - disp.shape < *radius,
                Err(_) => false,
            },
            TargetSet::DirichletTarget { c, m, n, core_log } => {
                let sqrt_d = (x.dim() as f64).sqrt();
                sup_systole(x) * grow * sqrt_d >= Self::threshold_dirichlet(*c, *m, *n, *core_log)
            }
            TargetSet::Complement { inner } => !inner.surely_within(x, disp),
            TargetSet::Product { parts } => parts.iter().all(|p| p.may_meet(x, disp)),
        }
    }

    /// True only if every image `g x` with `g` bounded by `disp` lies in the set.
    pub fn surely_within(&self, x: &LatticeBasis, disp: Displacement) -> bool {
        let grow = disp.log_norm.exp();
        match self {
            TargetSet::Whole => true,
            TargetSet::Empty => false,
            TargetSet::SystoleBelow { eps } => euclid_systole(x) * grow < *eps,
            TargetSet::SystoleAbove { eps } => euclid_systole(x) / grow > *eps,
            TargetSet::ShapeBall { center, radius } => match reduce_shape_2d(x) {
                Ok(tau) => quotient_distance(*center, tau, 3) + disp.shape < *radius,
                Err(_) => false,
            },
            TargetSet::DirichletTarget { c, m, n, core_log } => {
                let sqrt_d = (x.dim() as f64).sqrt();
                sup_systole(x) / (grow * sqrt_d) >= Self::threshold_dirichlet(*c, *m, *n, *core_log)
            }
            TargetSet::Complement { inner } => !inner.may_meet(x, disp),
            TargetSet::Product { parts } => parts.iter().all(|p| p.surely_within(x, disp)),
        }
    }

    /// Conservative inner core `σ_r O`: a set of points whose surrogate
    /// distance to the complement exceeds `r`. `kappa` is the Lipschitz
    /// constant of `log λ₁` for the surrogate metric.
    pub fn inner_core(&self, r: f64, kappa: f64) -> Result<TargetSet> {
        if r < 0.0 {
            return Err(Error::precondition("core radius must be non-negative"));
        }
        Ok(match self {
            TargetSet::Whole => TargetSet::Whole,
            TargetSet::Empty => TargetSet::Empty,
            TargetSet::SystoleBelow { eps } => TargetSet::SystoleBelow { eps: eps * (-kappa * r).exp() },
            TargetSet::SystoleAbove { eps } => TargetSet::SystoleAbove { eps: eps * (kappa * r).exp() },
            TargetSet::ShapeBall { center, radius } => {
                if *radius <= r {
                    TargetSet::Empty
                } else {
                    TargetSet::ShapeBall { center: *center, radius: radius - r }
                }
            }
            TargetSet::DirichletTarget { c, m, n, core_log } => {
                TargetSet::DirichletTarget { c: *c, m: *m, n: *n, core_log: core_log + kappa * r }
            }
            TargetSet::Complement { inner } => match inner.as_ref() {
                TargetSet::Whole => TargetSet::Empty,
                TargetSet::Empty => TargetSet::Whole,
                // complement of {λ₁ < ε} is {λ₁ ≥ ε}
                TargetSet::SystoleBelow { eps } => TargetSet::SystoleAbove { eps: eps * (kappa * r).exp() },
                TargetSet::SystoleAbove { eps } => TargetSet::SystoleBelow { eps: eps * (-kappa * r).exp() },
                TargetSet::Complement { inner } => inner.inner_core(r, kappa)?,
                other => {
                    return Err(Error::unsupported(alloc::format!(
                        "inner core of the complement of {} is not supported",
                        other.kind_name()
                    )))
                }
            },
            TargetSet::Product { parts } => TargetSet::Product {
                parts: parts.iter().map(|p| p.inner_core(r, kappa)).collect::<Result<Vec<_>>>()?,
            },
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TargetSet::Whole => "whole",
            TargetSet::Empty => "empty",
            TargetSet::SystoleBelow { .. } => "systole_below",
            TargetSet::SystoleAbove { .. } => "systole_above",
            TargetSet::ShapeBall { .. } => "shape_ball",
            TargetSet::DirichletTarget { .. } => "dirichlet_target",
            TargetSet::Complement { .. } => "complement",
            TargetSet::Product { .. } => "product",
        }
    }

    /// Parses the compact command-line syntax:
    /// `whole`, `empty`, `systole-below:E`, `systole-above:E`,
    /// `shape-ball:RE,IM,RHO`, `dirichlet:C,M,N`, `not:<spec>`.
    pub fn parse(spec: &str) -> Result<TargetSet> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("not:") {
            return Ok(TargetSet::parse(rest)?.complement());
        }
        let (head, args) = match spec.split_once(':') {
            Some((h, a)) => (h, a),
            None => (spec, ""),
        };
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::invalid(alloc::format!("bad number '{s}'"))))
                .collect()
        };
        let expect = |v: Vec<f64>, k: usize| -> Result<Vec<f64>> {
            if v.len() == k {
                Ok(v)
            } else {
                Err(Error::invalid(alloc::format!("target '{head}' takes {k} parameters")))
            }
        };
        match head {
            "whole" => Ok(TargetSet::Whole),
            "empty" => Ok(TargetSet::Empty),
            "systole-below" => Ok(TargetSet::systole_below(expect(nums()?, 1)?[0])),
            "systole-above" => Ok(TargetSet::systole_above(expect(nums()?, 1)?[0])),
            "shape-ball" => {
                let v = expect(nums()?, 3)?;
                Ok(TargetSet::shape_ball(ShapePoint2D::new(v[0], v[1]), v[2]))
            }
            "dirichlet" => {
                let v = expect(nums()?, 3)?;
                Ok(TargetSet::dirichlet(v[0], v[1] as usize, v[2] as usize))
            }
            other => Err(Error::invalid(alloc::format!("unknown target kind '{other}'"))),
        }
    }

    /// Whether some factor lives on lattices of dimension above 2.
    fn needs_higher_dim(&self) -> bool {
        match self {
            TargetSet::DirichletTarget { m, n, .. } => m + n != 2,
            TargetSet::Complement { inner } => inner.needs_higher_dim(),
            TargetSet::Product { parts } => parts.iter().any(TargetSet::needs_higher_dim),
            _ => false,
        }
    }
}

impl core::fmt::Display for TargetSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TargetSet::Whole => write!(f, "whole"),
            TargetSet::Empty => write!(f, "empty"),
            TargetSet::SystoleBelow { eps } => write!(f, "systole-below:{eps}"),
            TargetSet::SystoleAbove { eps } => write!(f, "systole-above:{eps}"),
            TargetSet::ShapeBall { center, radius } => {
                write!(f, "shape-ball:{},{},{radius}", center.re, center.im)
            }
            TargetSet::DirichletTarget { c, m, n, core_log } if *core_log == 0.0 => {
                write!(f, "dirichlet:{c},{m},{n}")
            }
            TargetSet::DirichletTarget { c, m, n, core_log } => {
                write!(f, "dirichlet:{c},{m},{n}@{core_log}")
            }
            TargetSet::Complement { inner } => write!(f, "not:{inner}"),
            TargetSet::Product { parts } => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "product({})", s.join(";"))
            }
        }
    }
}

/// Monte-Carlo estimate of `μ(O)` for planar lattices. Trivial sets are
/// returned exactly.
pub fn measure_of_target<E: Executor>(o: &TargetSet, exec: &E, cfg: &McConfig) -> Result<Estimate> {
    match o {
        TargetSet::Whole => return Ok(Estimate::exact(1.0)),
        TargetSet::Empty => return Ok(Estimate::exact(0.0)),
        _ => {}
    }
    if o.needs_higher_dim() {
        return Err(Error::unsupported("Haar sampling is only available for d = 2"));
    }
    if cfg.samples == 0 {
        return Err(Error::precondition("need at least one sample"));
    }
    let k = o.arity();
    Ok(mc_mean(exec, cfg, crate::mc::streams::MEASURE, |rng| {
        let pts: Vec<LatticeBasis> = (0..k).map(|_| sample_haar_2d(rng)).collect();
        if o.contains_point(&pts) {
            1.0
        } else {
            0.0
        }
    }))
}
