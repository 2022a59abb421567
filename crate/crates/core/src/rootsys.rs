//! Positive roots of type A and the root subsets that index Lax matrices.
//!
//! A root is stored by its coefficients over the simple roots. A positive
//! root of `A_n` is a contiguous block of ones `[p, q]` and corresponds to
//! `e_p - e_{q+1}`, i.e. matrix position `(p, q + 1)` in 1-based indexing.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root {
    coeffs: Vec<i32>,
}

/// Matrix position of a positive root, 1-based, `row < col`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootPosition {
    pub row: usize,
    pub col: usize,
}

impl RootPosition {
    /// Zero-based `(row, col)`.
    pub fn index(self) -> (usize, usize) {
        (self.row - 1, self.col - 1)
    }
}

impl Root {
    pub fn new(coeffs: Vec<i32>) -> Result<Root> {
        let r = Root { coeffs };
        if r.coeffs.is_empty() {
            return Err(Error::InvalidRank(0));
        }
        if r.block().is_none() && r.neg().block().is_none() {
            return Err(Error::InvalidRoot(format!("{:?} is not a root", r.coeffs)));
        }
        Ok(r)
    }

    /// The positive root `alpha_start + ... + alpha_end` (1-based, inclusive).
    pub fn block_root(rank: usize, start: usize, end: usize) -> Result<Root> {
        if rank == 0 {
            return Err(Error::InvalidRank(0));
        }
        if start == 0 || start > end || end > rank {
            return Err(Error::InvalidRoot(format!("block [{start}, {end}] outside A{rank}")));
        }
        let coeffs = (1..=rank).map(|i| i32::from(i >= start && i <= end)).collect();
        Ok(Root { coeffs })
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn neg(&self) -> Root {
        Root { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    /// `(start, end)` 1-based if this is a positive root.
    pub fn block(&self) -> Option<(usize, usize)> {
        let first = self.coeffs.iter().position(|&c| c != 0)?;
        let last = self.coeffs.iter().rposition(|&c| c != 0)?;
        let ok = self.coeffs.iter().enumerate().all(|(i, &c)| if i >= first && i <= last { c == 1 } else { c == 0 });
        ok.then_some((first + 1, last + 1))
    }

    pub fn is_positive(&self) -> bool {
        self.block().is_some()
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.block(), Some((s, e)) if s == e)
    }

    pub fn height(&self) -> i32 {
        self.coeffs.iter().sum()
    }

    /// `e_i - e_j` form, 1-based, for display.
    pub fn epsilon_form(&self) -> Option<(usize, usize)> {
        if let Some((s, e)) = self.block() {
            return Some((s, e + 1));
        }
        self.neg().block().map(|(s, e)| (e + 1, s))
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (sign, pos) = match self.block() {
            Some(_) => ("", self.clone()),
            None => ("-", self.neg()),
        };
        match pos.block() {
            Some((s, e)) => {
                let parts: Vec<String> = (s..=e).map(|i| i.to_string()).collect();
                write!(f, "{sign}{}", parts.join("+"))
            }
            None => write!(f, "{:?}", self.coeffs),
        }
    }
}

/// The `n` simple roots of `A_n`.
pub fn simple_roots(rank: usize) -> Result<Vec<Root>> {
    if rank == 0 {
        return Err(Error::InvalidRank(0));
    }
    (1..=rank).map(|i| Root::block_root(rank, i, i)).collect()
}

/// All positive roots of `A_n` ordered by (block start, block length).
pub fn positive_roots(rank: usize) -> Result<Vec<Root>> {
    if rank == 0 {
        return Err(Error::InvalidRank(0));
    }
    let mut out = Vec::with_capacity(rank * (rank + 1) / 2);
    for start in 1..=rank {
        for end in start..=rank {
            out.push(Root::block_root(rank, start, end)?);
        }
    }
    Ok(out)
}

/// Sum of two roots (or negated roots) when the result is a positive root.
pub fn root_sum(a: &Root, b: &Root) -> Option<Root> {
    if a.rank() != b.rank() {
        return None;
    }
    let coeffs: Vec<i32> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
    let r = Root { coeffs };
    r.is_positive().then_some(r)
}

/// Matrix position of a positive root.
pub fn position_of(r: &Root) -> Result<RootPosition> {
    match r.block() {
        Some((s, e)) => Ok(RootPosition { row: s, col: e + 1 }),
        None => Err(Error::InvalidRoot(format!("{r} is not a positive root"))),
    }
}

/// A validated root subset containing the simple roots, with the variable
/// `a_{k+1}` attached to `roots[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiSystem {
    rank: usize,
    roots: Vec<Root>,
}

impl PhiSystem {
    /// Simple roots first, then `extra` in the given order. Simple roots in
    /// `extra` are ignored; duplicates and non-positive roots are rejected.
    pub fn new(rank: usize, extra: &[Root]) -> Result<PhiSystem> {
        let mut roots = simple_roots(rank)?;
        for r in extra {
            if r.rank() != rank {
                return Err(Error::InvalidRoot(format!("{r} does not belong to A{rank}")));
            }
            if !r.is_positive() {
                return Err(Error::InvalidRoot(format!("{r} is not a positive root")));
            }
            if r.is_simple() {
                continue;
            }
            if roots.contains(r) {
                return Err(Error::InvalidRoot(format!("duplicate root {r}")));
            }
            roots.push(r.clone());
        }
        Ok(PhiSystem { rank, roots })
    }

    /// The subset selected by `mask` over the non-simple positive roots in
    /// [`positive_roots`] order.
    pub fn from_mask(rank: usize, mask: u64) -> Result<PhiSystem> {
        let nonsimple = non_simple_roots(rank)?;
        if nonsimple.len() < 64 && mask >> nonsimple.len() != 0 {
            return Err(Error::InvalidArgument(format!("mask {mask} out of range for A{rank}")));
        }
        let extra: Vec<Root> =
            nonsimple.into_iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, r)| r).collect();
        PhiSystem::new(rank, &extra)
    }

    /// Parses `"1,2,3,1+2"`: each term a `+`-joined run of simple-root
    /// indices. All simple roots are added whether listed or not.
    pub fn parse(rank: usize, text: &str) -> Result<PhiSystem> {
        if rank == 0 {
            return Err(Error::InvalidRank(0));
        }
        let mut extra = Vec::new();
        let mut offset = 0;
        for term in text.split(',') {
            let pos = offset;
            offset += term.len() + 1;
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse { pos, msg: "empty root term".into() });
            }
            let mut coeffs = vec![0i32; rank];
            for idx in term.split('+') {
                let i: usize = idx
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse { pos, msg: format!("bad simple-root index '{}'", idx.trim()) })?;
                if i == 0 || i > rank {
                    return Err(Error::Parse { pos, msg: format!("index {i} outside 1..={rank}") });
                }
                coeffs[i - 1] += 1;
            }
            let r = Root { coeffs };
            if !r.is_positive() {
                return Err(Error::Parse { pos, msg: format!("'{term}' is not a positive root") });
            }
            if !r.is_simple() && extra.contains(&r) {
                return Err(Error::Parse { pos, msg: format!("duplicate root '{term}'") });
            }
            extra.push(r);
        }
        PhiSystem::new(rank, &extra)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Matrix size `n + 1`.
    pub fn dim(&self) -> usize {
        self.rank + 1
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn var_count(&self) -> usize {
        self.roots.len()
    }

    /// Zero-based matrix position of variable `k`.
    pub fn var_position(&self, k: usize) -> (usize, usize) {
        position_of(&self.roots[k]).expect("validated").index()
    }

    /// Bitmask over non-simple positive roots.
    pub fn mask(&self) -> u64 {
        let nonsimple = non_simple_roots(self.rank).expect("validated rank");
        nonsimple.iter().enumerate().filter(|(_, r)| self.roots.contains(r)).fold(0u64, |m, (b, _)| m | 1 << b)
    }

    /// Canonical text, e.g. `"1,2,3,1+2"`.
    pub fn to_text(&self) -> String {
        self.roots.iter().map(Root::to_string).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for PhiSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn non_simple_roots(rank: usize) -> Result<Vec<Root>> {
    Ok(positive_roots(rank)?.into_iter().filter(|r| !r.is_simple()).collect())
}

/// All `2^(n(n+1)/2 - n)` subsets containing the simple roots, in mask order.
pub fn enumerate_phi(rank: usize) -> Result<impl Iterator<Item = PhiSystem>> {
    let count = non_simple_roots(rank)?.len();
    if count >= 64 {
        return Err(Error::InvalidArgument(format!("A{rank} has too many subsets to enumerate")));
    }
    Ok((0..1u64 << count).map(move |mask| PhiSystem::from_mask(rank, mask).expect("mask in range")))
}
