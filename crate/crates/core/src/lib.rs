//! Locally constrained inverse curvature flows of spacelike, star-shaped
//! hypersurfaces in de Sitter space.
//!
//! The hypersurface is a radial graph `rho` over the round sphere `S^n` and
//! evolves by `rho_t = S w / cosh(rho)` with normal speed
//! `S = u - b_{n,k} sinh(rho) sigma_k^{-1/k}`. Along the way the crate
//! evaluates quermassintegrals, Hsiung-Minkowski residuals and the
//! isoperimetric gap `xi_{2,0}(A_0) - A_2`.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod flow;
pub mod geometry;
pub mod grids;
pub mod linalg;
pub mod quadrature;
pub mod quermass;
pub mod snapshot;
pub mod symfunc;
