#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod curves;
pub mod discretize;
pub mod effective;
pub mod eigensolve;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod frames;
pub mod grid;
pub mod linalg;
pub mod profile;
pub mod stripgeom;
