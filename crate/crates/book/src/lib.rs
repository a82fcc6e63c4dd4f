//! Every chapter of the guide as a module, so `cargo test` runs its snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/maps.md")]
pub mod maps {}
#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}
#[doc = include_str!("../../../book/src/carrier.md")]
pub mod carrier {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/limits.md")]
pub mod limits {}
#[doc = include_str!("../../../book/src/quadrant.md")]
pub mod quadrant {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
