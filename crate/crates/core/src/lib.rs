#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibrium;
pub mod kinetics;
pub mod modesum;
pub mod nonequilibrium;
pub mod numerics;
pub mod specfun;
