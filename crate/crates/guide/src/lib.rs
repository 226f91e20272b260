//! The book under `book/` is the real documentation; this crate exists so
//! `cargo test` runs every code block in it as a doctest. mdbook itself
//! cannot test snippets that depend on other crates, so each chapter is
//! mounted here as a module's doc comment and rustdoc does the work.
//!
//! When a doctest fails, the module name below points at the chapter the
//! offending block lives in.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/tables.md")]
pub mod tables {}

#[doc = include_str!("../../../book/src/cleaning.md")]
pub mod cleaning {}

#[doc = include_str!("../../../book/src/quality-index.md")]
pub mod quality_index {}

#[doc = include_str!("../../../book/src/boosted-trees.md")]
pub mod boosted_trees {}

#[doc = include_str!("../../../book/src/differential-evolution.md")]
pub mod differential_evolution {}

#[doc = include_str!("../../../book/src/fusion.md")]
pub mod fusion {}

#[doc = include_str!("../../../book/src/cross-validation.md")]
pub mod cross_validation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
