#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bonnet;
pub mod canonical;
pub mod catalog;
pub mod cli;
pub mod compatibility;
pub mod error;
pub mod io;
pub mod numerics;
pub mod pipeline;
pub mod shape;
pub mod special;
