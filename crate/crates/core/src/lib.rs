//! Local torsion of elliptic curves over the rationals: canonical-lift
//! detection over Galois rings, point counting, Hurwitz class numbers, p-adic
//! division-polynomial checks, and surveys over prime ranges.

pub mod arith;
pub mod classnum;
pub mod counting;
pub mod curves;
pub mod lifttest;
pub mod padic;
pub mod rings;
pub mod survey;
