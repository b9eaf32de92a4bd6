//! Chapters of the guide in `book/`, compiled so `cargo test --doc` runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/iteration.md")]
pub mod iteration {}
#[doc = include_str!("../../../book/src/step_sizes.md")]
pub mod step_sizes {}
#[doc = include_str!("../../../book/src/p_form.md")]
pub mod p_form {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/ergodic.md")]
pub mod ergodic {}
#[doc = include_str!("../../../book/src/problems.md")]
pub mod problems {}
#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
