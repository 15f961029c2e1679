//! Doc-tests for the guide in `book/`: every Rust listing in the chapters is
//! compiled and run by `cargo test --doc`, keeping the book in sync with the
//! library.

#[doc = include_str!("../../../book/src/index.md")]
mod overview {}

#[doc = include_str!("../../../book/src/groups.md")]
mod groups_chapter {}

#[doc = include_str!("../../../book/src/geometry.md")]
mod geometry_chapter {}

#[doc = include_str!("../../../book/src/conformal.md")]
mod conformal_chapter {}

#[doc = include_str!("../../../book/src/twistor.md")]
mod twistor_chapter {}

#[doc = include_str!("../../../book/src/volume.md")]
mod volume_chapter {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli_chapter {}
