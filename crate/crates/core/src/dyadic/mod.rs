//! Maximal dyadic covers `W(η)` of a bounded domain and the inner/outer
//! approximations `F_- ⊆ F ⊆ F_+` built from them.

mod cover;
mod cube;
mod verify;

pub use cover::{approx_domains, build_cover, inner_cover, kmax, kmax_for_boundary, CubeCover};
pub use cube::DyadicCube;
pub use verify::{verify_cover, ConditionCheck, CoverReport, ScaleCount};
