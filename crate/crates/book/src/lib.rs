//! The chapters of `book/` as modules, so `cargo test --doc` runs every
//! code block in them against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/maps.md")]
pub mod maps {}
#[doc = include_str!("../../../book/src/one-variable.md")]
pub mod one_variable {}
#[doc = include_str!("../../../book/src/green.md")]
pub mod green {}
#[doc = include_str!("../../../book/src/saddles.md")]
pub mod saddles {}
#[doc = include_str!("../../../book/src/slices.md")]
pub mod slices {}
#[doc = include_str!("../../../book/src/horseshoes.md")]
pub mod horseshoes {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
