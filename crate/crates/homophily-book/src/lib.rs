//! Doc-test harness for the guide in `book/`.
//!
//! Each module below pulls one chapter of the book in as its documentation,
//! so every fenced Rust example in the guide compiles and runs under
//! `cargo test --workspace`. The modules are empty on purpose: they exist
//! to host the chapters, and the book cannot drift from the library
//! without breaking the build.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/null-model.md")]
pub mod null_model {}

#[doc = include_str!("../../../book/src/edge-moments.md")]
pub mod edge_moments {}

#[doc = include_str!("../../../book/src/isolation.md")]
pub mod isolation {}

#[doc = include_str!("../../../book/src/scores.md")]
pub mod scores {}

#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}

#[doc = include_str!("../../../book/src/ingest.md")]
pub mod ingest {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
