//! Inputs shared by the benchmarks.

use voltkit::laxkit::{search_signs, two_diagonal_family, LaxPair};
use voltkit::rootsys::PhiSystem;

/// Lax pair of a root subset with the default sign search.
pub fn pair(rank: usize, phi: &str) -> LaxPair {
    let phi = PhiSystem::parse(rank, phi).expect("valid root subset");
    search_signs(&phi).expect("search within budget").expect("Lax pair exists")
}

/// Two-diagonal Lax pair.
pub fn two_diagonal(m: usize, n: usize) -> LaxPair {
    two_diagonal_family(m, n).expect("valid two-diagonal parameters")
}
