//! Guide chapters attached as doc comments so their code blocks run as doc
//! tests. The rendered book lives in `book/` at the repository root.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/weight-systems.md")]
mod weight_systems {}

#[doc = include_str!("../../../book/src/groebner.md")]
mod groebner_engine {}

#[doc = include_str!("../../../book/src/invariants.md")]
mod link_invariants {}

#[doc = include_str!("../../../book/src/datasets.md")]
mod datasets {}

#[doc = include_str!("../../../book/src/surrogates.md")]
mod surrogates {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
