//! Effective constructions over oracle-presented infinite objects:
//!
//! - [`ceer`]: the diameter-2 computable graphing of computably enumerable
//!   equivalence relations with all-infinite classes;
//! - [`lo`]: coding arbitrary bit streams into isomorphic copies of linear
//!   orders, and decoding payload, base order and isomorphism back out;
//! - [`structure`]: stage-based coding into isomorphic copies of non-trivial
//!   relational structures, with a bounded-search decoder and certificates;
//! - [`ks`]: the Kumabe-Slaman condition poset with path coding;
//! - [`verify`]: the seeded property suites behind `verify` reports.
//!
//! Everything infinite is a total deterministic oracle ([`oracles`]), and
//! every claim is checked at desk scale by replayable certificates and
//! round trips.

pub mod ceer;
pub mod formula;
pub mod gen;
pub mod ks;
pub mod lo;
pub mod oracles;
pub mod structure;
pub mod verify;

pub use oracles::{BitStream, LinearOrderOracle, Signature, StructureOracle};
