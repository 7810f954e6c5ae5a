//! Compiles the guide's code blocks as doc-tests so they track the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rotations.md")]
pub mod rotations {}

#[doc = include_str!("../../../book/src/transversal.md")]
pub mod transversal {}

#[doc = include_str!("../../../book/src/fock.md")]
pub mod fock {}

#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}

#[doc = include_str!("../../../book/src/vanishing.md")]
pub mod vanishing {}

#[doc = include_str!("../../../book/src/feshbach.md")]
pub mod feshbach {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
