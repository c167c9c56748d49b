pub mod analytic;
pub mod arith_core;
pub mod cli;
pub mod density;
pub mod empirical;
pub mod localfactors;
pub mod quadfield;
