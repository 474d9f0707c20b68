// `!(x > 0.0)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amle;
pub mod bayes;
pub mod censoring;
pub mod cli;
pub mod datasets;
pub mod dist;
pub mod error;
pub mod harness;
pub mod intervals;
pub mod mle;
pub mod numeric;
pub mod report;
pub mod rng;
