//! Runs the code blocks of the book under `book/src` as doc-tests, one
//! module per chapter so a failure points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/overlap.md")]
mod overlap {}
#[doc = include_str!("../../../book/src/grouping.md")]
mod grouping {}
#[doc = include_str!("../../../book/src/tabu.md")]
mod tabu {}
#[doc = include_str!("../../../book/src/cost-model.md")]
mod cost_model {}
#[doc = include_str!("../../../book/src/offloading.md")]
mod offloading {}
#[doc = include_str!("../../../book/src/gridmaps.md")]
mod gridmaps {}
#[doc = include_str!("../../../book/src/pipeline.md")]
mod pipeline {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
#[doc = include_str!("../../../README.md")]
mod readme {}
