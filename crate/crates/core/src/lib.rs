pub mod arith;
pub mod curve;
pub mod localsolve;
pub mod jacobian;
pub mod search;
pub mod sieve;
pub mod zerodim;
pub mod census;
