use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rootsys::{PhiSystem, Root};
use crate::symbolic::{Poly, PolyMatrix};

use super::{search_signs_with, LaxPair, LvPolicy, SearchOptions};

/// The five root subsets whose systems reduce to Lotka-Volterra form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Simple roots only.
    Km,
    /// Simple roots plus the highest root.
    PeriodicKm,
    /// Plus `alpha_2 + ... + alpha_{n-1}`.
    Family2,
    /// Plus `alpha_1 + ... + alpha_{n-1}`.
    Family3,
    /// Plus `alpha_2 + ... + alpha_n`.
    Family4,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Km, Family::PeriodicKm, Family::Family2, Family::Family3, Family::Family4];

    pub fn min_rank(self) -> usize {
        match self {
            Family::Km => 1,
            Family::PeriodicKm => 2,
            Family::Family3 | Family::Family4 => 3,
            Family::Family2 => 4,
        }
    }

    /// 1-based inclusive block of the extra root.
    fn extra_block(self, rank: usize) -> Option<(usize, usize)> {
        match self {
            Family::Km => None,
            Family::PeriodicKm => Some((1, rank)),
            Family::Family2 => Some((2, rank - 1)),
            Family::Family3 => Some((1, rank - 1)),
            Family::Family4 => Some((2, rank)),
        }
    }

    pub fn phi(self, rank: usize) -> Result<PhiSystem> {
        if rank < self.min_rank() {
            return Err(Error::RankTooSmall { rank, what: self.to_string() });
        }
        let extra = match self.extra_block(rank) {
            Some((s, e)) => vec![Root::block_root(rank, s, e)?],
            None => Vec::new(),
        };
        PhiSystem::new(rank, &extra)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Km => "km",
            Family::PeriodicKm => "pkm",
            Family::Family2 => "f2",
            Family::Family3 => "f3",
            Family::Family4 => "f4",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "km" => Ok(Family::Km),
            "pkm" => Ok(Family::PeriodicKm),
            "f2" => Ok(Family::Family2),
            "f3" => Ok(Family::Family3),
            "f4" => Ok(Family::Family4),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

/// Lax pair of a named family with the Lotka-Volterra sign choice.
pub fn named_family(family: Family, rank: usize) -> Result<LaxPair> {
    let phi = family.phi(rank)?;
    let opts = SearchOptions { lv: LvPolicy::Require, ..SearchOptions::default() };
    search_signs_with(&phi, &opts)?
        .ok_or_else(|| Error::Constraint(format!("no Lotka-Volterra sign choice for {family} at rank {rank}")))
}

/// Root subset of the `n x n` matrix with the superdiagonal and the `m`
/// entries `(i, i + n - m)`, `i = 1..m` (1-based).
pub fn two_diagonal_phi(m: usize, n: usize) -> Result<PhiSystem> {
    if m == 0 || n < 2 * m || n < 3 {
        return Err(Error::Constraint(format!(
            "two-diagonal family needs m >= 1, n >= 2m and n >= 3 (got m={m}, n={n})"
        )));
    }
    let rank = n - 1;
    let extra: Vec<Root> = (1..=m).map(|i| Root::block_root(rank, i, i + n - m - 1)).collect::<Result<_>>()?;
    PhiSystem::new(rank, &extra)
}

/// Two-diagonal family with `B` given in closed form.
pub fn two_diagonal_family(m: usize, n: usize) -> Result<LaxPair> {
    let phi = two_diagonal_phi(m, n)?;
    let nv = n + m - 1;
    // 1-based variable a_k
    let a = |k: usize| Poly::var(nv, k - 1);
    let mut b = PolyMatrix::zeros(n, nv);
    let mut put = |i: usize, j: usize, v: Poly| {
        if v.is_zero() {
            return;
        }
        b.add_to(i - 1, j - 1, &v);
        b.add_to(j - 1, i - 1, &-&v);
    };
    for i in 1..=n.saturating_sub(2) {
        put(i, i + 2, &a(i) * &a(i + 1));
    }
    for i in 1..=m + 1 {
        let mut v = Poly::zero(nv);
        if i <= m {
            v -= &(&a(n - m + i - 1) * &a(n + i - 1));
        }
        if i >= 2 {
            v -= &(&a(i - 1) * &a(n + i - 2));
        }
        put(i, i + n - m - 1, v);
    }
    for i in 1..m {
        put(i, i + n - m + 1, &(&a(n - m + i) * &a(n + i - 1)) + &(&a(i) * &a(n + i)));
    }
    LaxPair::from_b(&phi, b)
}
