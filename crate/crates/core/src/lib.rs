//! Exact fixed-point realizability for torus-equivariant complex bordism.
//!
//! A fixed-point datum in `MU_*[e_V, e_V^{-1}, Y_{V,d}]` comes from a genuine
//! stably almost complex `(S^1)^r`-manifold exactly when it lies in the
//! geometric cone `MU_*[e_V^{-1}, Y_{V,d}]` and its localized Borel image is
//! an honest (integral) power series. This crate decides both conditions in
//! exact arithmetic, up to a chosen truncation.
//!
//! Module map:
//! - [`lazard`]: `MU_*` as the Lazard ring, the universal formal group law,
//!   and the integral lattice.
//! - [`borel`]: `MU^*[[C_1, ..., C_r]]`, Euler classes, localization.
//! - [`fixedring`]: the fixed-point ring, its cone, and the involution.
//! - [`geometry`]: a small language of `G`-manifolds and their fixed-point data.
//! - [`realizability`]: localization of fixed-point data and the verdict.
//! - [`json`], [`sexpr`]: wire formats.

pub mod borel;
pub mod error;
pub mod fixedring;
pub mod geometry;
pub mod json;
pub mod lazard;
pub mod realizability;
pub mod sexpr;

pub use error::{Error, Result};
pub use lazard::{MuElement, MuMonomial, PowerSeries1, RingContext};
