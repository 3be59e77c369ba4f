//! Compiles the guide's Rust snippets as doctests so the book cannot drift
//! from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/pairings.md")]
pub mod pairings {}

#[doc = include_str!("../../../book/src/key-issuance.md")]
pub mod key_issuance {}

#[doc = include_str!("../../../book/src/delegation.md")]
pub mod delegation {}

#[doc = include_str!("../../../book/src/revocation.md")]
pub mod revocation {}

#[doc = include_str!("../../../book/src/directory-log.md")]
pub mod directory_log {}

#[doc = include_str!("../../../book/src/threats.md")]
pub mod threats {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
