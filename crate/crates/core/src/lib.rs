#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod cli;
pub mod config;
pub mod datacon;
pub mod device;
pub mod mneme;
pub mod report;
pub mod reneu;
pub mod trace;
