//! Numerical core for experiments on spaces of unimodular lattices.
//!
//! Everything in this crate is pure computation: lattice arithmetic in
//! dimensions 2 and 3, diagonal flows and their horospherical frames,
//! tessellation and Bowen-box counting, height functions and Monte-Carlo
//! verifiers for Margulis-type inequalities, effective-equidistribution
//! experiments, the covering-combination calculus, box-counting dimension
//! estimates, and Dirichlet-improvability checks.
//!
//! The crate is `no_std` and only needs `alloc`. Randomness always comes in
//! through explicit, seeded [`mc::McConfig`] streams, and parallelism is
//! delegated to a caller-supplied [`mc::Executor`], so results are
//! reproducible bit-for-bit at a fixed shard count.

#![no_std]
// `num_traits::Float` is shadowed by inherent float methods whenever std is linked.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod combinatorics;
pub mod convolution;
pub mod cover;
pub mod dimension;
pub mod diophantine;
pub mod equidist;
pub mod error;
pub mod flow;
pub mod height;
pub mod lattice;
pub mod mc;
pub mod regression;
pub mod shape;
pub mod target;
pub mod tessellation;

pub use error::{Error, Result};
pub use flow::{FlowSpec, HorosphericalFrame};
pub use lattice::{LatticeBasis, NormKind, ShortVectorResult};
pub use shape::ShapePoint2D;
pub use target::TargetSet;
