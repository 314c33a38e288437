//! The user guide, embedded so its code samples run as doc-tests.
//!
//! Each chapter of `book/src` is attached to an empty module here; `cargo
//! test` then keeps the book and the library in sync.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/enumeration.md")]
pub mod enumeration {}

#[doc = include_str!("../../../book/src/transform.md")]
pub mod transform {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
