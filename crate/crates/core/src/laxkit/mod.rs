//! Lax pairs `dL/dt = [B, L]` built from root subsets.
//!
//! `L` is symmetric with the variable `a_{k+1}` at the position of
//! `roots[k]` and its transpose. `B` is skew with `c * a_i * a_j` at the
//! position of the sum root of each contributor pair `(i, j)`, where the
//! signs `c` are chosen so that `[B, L]` has the same support as `L`.

mod families;
mod lv;
pub mod signs;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rootsys::{PhiSystem, Root};
use crate::symbolic::{rat, Monomial, Poly, PolyMatrix, Rational};

pub use families::{named_family, two_diagonal_family, two_diagonal_phi, Family};
pub use lv::{detect_lv, LvReduction};
pub use signs::{contributor_pairs, ContributorPair, SignSolver, SignSystem, DEFAULT_NODE_BUDGET};

use signs::{Cubic, Equation};

/// Convention stated in every report.
pub const CONVENTION: &str = "dL/dt = [B, L] = BL - LB";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaxPair {
    pub phi: PhiSystem,
    pub l: PolyMatrix,
    pub b: PolyMatrix,
    pub pairs: Vec<ContributorPair>,
    /// One entry per contributor pair; `0` marks a pair absent from `B`.
    pub signs: Vec<i8>,
    pub xdot: Vec<Poly>,
}

/// Sum root together with every contributor pair producing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiPair {
    pub sum_root: Root,
    pub contributors: Vec<ContributorPair>,
}

/// Whether the sign search should restrict to Lotka-Volterra systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LvPolicy {
    /// Plain lexicographic order.
    #[default]
    Ignore,
    /// First Lotka-Volterra solution if one exists, otherwise the first.
    Prefer,
    /// Only Lotka-Volterra solutions.
    Require,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub budget: u64,
    pub lv: LvPolicy,
    /// Vector field the solution must reproduce exactly.
    pub target: Option<Vec<Poly>>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: DEFAULT_NODE_BUDGET, lv: LvPolicy::Ignore, target: None }
    }
}

pub fn build_l(phi: &PhiSystem) -> PolyMatrix {
    let m = phi.var_count();
    let mut l = PolyMatrix::zeros(phi.dim(), m);
    for k in 0..m {
        let (p, q) = phi.var_position(k);
        l.set(p, q, Poly::var(m, k));
        l.set(q, p, Poly::var(m, k));
    }
    l
}

/// Skew `B` from contributor pairs and their signs.
pub fn build_b(phi: &PhiSystem, pairs: &[ContributorPair], signs: &[i8]) -> PolyMatrix {
    let m = phi.var_count();
    let mut b = PolyMatrix::zeros(phi.dim(), m);
    for (pr, &s) in pairs.iter().zip(signs) {
        if s == 0 {
            continue;
        }
        let t = Poly::product_of(m, &[pr.i, pr.j], rat(i64::from(s)));
        let (p, q) = pr.sum;
        b.add_to(p, q, &t);
        b.add_to(q, p, &-&t);
    }
    b
}

/// Contributor pairs grouped by sum root, ordered by sum-root position.
pub fn build_psi(phi: &PhiSystem) -> Vec<PsiPair> {
    let mut groups: BTreeMap<(usize, usize), Vec<ContributorPair>> = BTreeMap::new();
    for pr in contributor_pairs(phi) {
        groups.entry(pr.sum).or_default().push(pr);
    }
    groups
        .into_iter()
        .map(|((p, q), contributors)| PsiPair {
            sum_root: Root::block_root(phi.rank(), p + 1, q).expect("upper position"),
            contributors,
        })
        .collect()
}

/// First sign assignment in lexicographic order (`+1` before `-1`, pairs in
/// [`contributor_pairs`] order) making `[B, L]` supported on `L`.
pub fn search_signs(phi: &PhiSystem) -> Result<Option<LaxPair>> {
    search_signs_with(phi, &SearchOptions::default())
}

pub fn search_signs_with(phi: &PhiSystem, opts: &SearchOptions) -> Result<Option<LaxPair>> {
    let system = SignSystem::new(phi);
    let signs = match solve_signs(phi, &system, opts)? {
        Some(s) => s,
        None => return Ok(None),
    };
    Ok(Some(assemble(phi, &system, signs)))
}

/// Number of sign assignments admitting a Lax pair, up to `limit`.
pub fn count_sign_solutions(phi: &PhiSystem, limit: usize, budget: u64) -> Result<usize> {
    let system = SignSystem::new(phi);
    let eqs = system.off_support.iter().map(Equation::homogeneous).collect();
    Ok(SignSolver::new(system.pairs.len(), eqs, budget).all(limit)?.len())
}

pub(crate) fn solve_signs(phi: &PhiSystem, system: &SignSystem, opts: &SearchOptions) -> Result<Option<Vec<i8>>> {
    let npairs = system.pairs.len();
    let mut eqs: Vec<Equation> = system.off_support.iter().map(Equation::homogeneous).collect();
    if let Some(target) = &opts.target {
        match target_equations(phi, system, target)? {
            Some(extra) => eqs.extend(extra),
            None => return Ok(None),
        }
    }
    let base = eqs.clone();
    match opts.lv {
        LvPolicy::Ignore => SignSolver::new(npairs, base, opts.budget).first(),
        LvPolicy::Require => SignSolver::new(npairs, with_lv(system, eqs), opts.budget).first(),
        LvPolicy::Prefer => match SignSolver::new(npairs, with_lv(system, eqs), opts.budget).first()? {
            Some(s) => Ok(Some(s)),
            None => SignSolver::new(npairs, base, opts.budget).first(),
        },
    }
}

fn with_lv(system: &SignSystem, mut eqs: Vec<Equation>) -> Vec<Equation> {
    for (k, row) in system.on_support.iter().enumerate() {
        for (mono, form) in row {
            if !is_lv_monomial(k, mono) {
                eqs.push(Equation::homogeneous(form));
            }
        }
    }
    eqs
}

/// `a_k * a_j^2` with `j != k`.
fn is_lv_monomial(k: usize, mono: &Cubic) -> bool {
    let k = k as u16;
    match mono {
        [x, y, z] if *x == k && y == z && *y != k => true,
        [x, y, z] if *z == k && x == y && *x != k => true,
        _ => false,
    }
}

fn target_equations(phi: &PhiSystem, system: &SignSystem, target: &[Poly]) -> Result<Option<Vec<Equation>>> {
    let m = phi.var_count();
    if target.len() != m {
        return Err(Error::VarCountMismatch { expected: m, got: target.len() });
    }
    let mut eqs = Vec::new();
    for (row, want) in system.on_support.iter().zip(target) {
        if want.nvars() != m {
            return Err(Error::VarCountMismatch { expected: m, got: want.nvars() });
        }
        let mut wanted: BTreeMap<Cubic, i64> = BTreeMap::new();
        for (mono, c) in want.terms() {
            let Some(cub) = as_cubic(mono) else {
                return Ok(None);
            };
            if !c.is_integer() {
                return Ok(None);
            }
            let Ok(v) = i64::try_from(c.to_integer()) else {
                return Ok(None);
            };
            wanted.insert(cub, v);
        }
        for (mono, &v) in &wanted {
            let Some(form) = row.get(mono) else {
                return Ok(None);
            };
            eqs.push(Equation { terms: form.iter().map(|(&p, &c)| (p, c)).collect(), rhs: v });
        }
        for (mono, form) in row {
            if !wanted.contains_key(mono) {
                eqs.push(Equation::homogeneous(form));
            }
        }
    }
    Ok(Some(eqs))
}

fn as_cubic(m: &Monomial) -> Option<Cubic> {
    if m.degree() != 3 {
        return None;
    }
    let f = m.factors();
    Some([f[0] as u16, f[1] as u16, f[2] as u16])
}

pub(crate) fn cubic_poly(nvars: usize, mono: &Cubic, coeff: i64) -> Poly {
    let idx: Vec<usize> = mono.iter().map(|&v| v as usize).collect();
    Poly::product_of(nvars, &idx, rat(coeff))
}

fn assemble(phi: &PhiSystem, system: &SignSystem, signs: Vec<i8>) -> LaxPair {
    let m = phi.var_count();
    let xdot = system
        .xdot_coefficients(&signs)
        .iter()
        .map(|row| {
            let mut p = Poly::zero(m);
            for (mono, &c) in row {
                p += &cubic_poly(m, mono, c);
            }
            p
        })
        .collect();
    LaxPair {
        l: build_l(phi),
        b: build_b(phi, &system.pairs, &signs),
        pairs: system.pairs.clone(),
        signs,
        xdot,
        phi: phi.clone(),
    }
}

impl LaxPair {
    /// Builds a pair from an explicit `B`, extracting the vector field from
    /// `[B, L]`. Fails if the commutator leaves the support of `L`.
    pub fn from_b(phi: &PhiSystem, b: PolyMatrix) -> Result<LaxPair> {
        let l = build_l(phi);
        if !b.is_skew() {
            return Err(Error::NotSkew);
        }
        let c = b.commutator(&l);
        let m = phi.var_count();
        let xdot: Vec<Poly> = (0..m)
            .map(|k| {
                let (p, q) = phi.var_position(k);
                c.get(p, q).clone()
            })
            .collect();
        let pairs = contributor_pairs(phi);
        let signs = pairs
            .iter()
            .map(|pr| {
                let mono = Monomial::from_exponents(&exponents(m, &[pr.i, pr.j]));
                let v = b.get(pr.sum.0, pr.sum.1).coeff(&mono);
                sign_of(&v)
            })
            .collect();
        let pair = LaxPair { phi: phi.clone(), l, b, pairs, signs, xdot };
        if let Some((r, s)) = pair.off_support_residual() {
            return Err(Error::Constraint(format!("[B, L] is nonzero at off-support position ({}, {})", r + 1, s + 1)));
        }
        Ok(pair)
    }

    pub fn var_count(&self) -> usize {
        self.phi.var_count()
    }

    pub fn commutator(&self) -> PolyMatrix {
        self.b.commutator(&self.l)
    }

    /// First zero-based position where `[B, L]` is nonzero outside the
    /// support of `L`, or where `[B, L]` fails to be symmetric.
    pub fn off_support_residual(&self) -> Option<(usize, usize)> {
        let c = self.commutator();
        let dim = self.l.dim();
        for r in 0..dim {
            for s in 0..dim {
                if self.l.get(r, s).is_zero() && !c.get(r, s).is_zero() {
                    return Some((r, s));
                }
                if c.get(r, s) != c.get(s, r) {
                    return Some((r, s));
                }
            }
        }
        None
    }

    /// Full consistency check of the stored data.
    pub fn is_consistent(&self) -> bool {
        if self.off_support_residual().is_some() || !self.l.is_symmetric() || !self.b.is_skew() {
            return false;
        }
        let c = self.commutator();
        (0..self.var_count()).all(|k| {
            let (p, q) = self.phi.var_position(k);
            *c.get(p, q) == self.xdot[k]
        })
    }
}

fn exponents(m: usize, vars: &[usize]) -> Vec<u16> {
    let mut e = vec![0u16; m];
    for &v in vars {
        e[v] += 1;
    }
    e
}

fn sign_of(v: &Rational) -> i8 {
    use num_traits::Signed;
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Vars;

    fn polys(m: usize, rows: &[&str]) -> Vec<Poly> {
        let v = Vars::indexed("a", m);
        rows.iter().map(|r| Poly::parse(r, &v).unwrap()).collect()
    }

    #[test]
    fn l_for_one_extra_root() {
        let phi = PhiSystem::parse(3, "1,2,3,1+2").unwrap();
        let l = build_l(&phi);
        assert!(l.is_symmetric());
        assert_eq!(l.get(0, 2), &Poly::var(4, 3));
        assert_eq!(l.get(2, 0), &Poly::var(4, 3));
        assert!(l.get(0, 3).is_zero());
    }

    #[test]
    fn rank_one() {
        let phi = PhiSystem::parse(1, "1").unwrap();
        let l = build_l(&phi);
        assert_eq!(l.get(0, 1), &Poly::var(1, 0));
        assert!(l.get(0, 0).is_zero());
        let pair = search_signs(&phi).unwrap().unwrap();
        assert!(pair.xdot[0].is_zero());
    }

    #[test]
    fn psi_for_one_extra_root() {
        let phi = PhiSystem::parse(3, "1,2,3,1+2").unwrap();
        let mut got: Vec<String> = build_psi(&phi).iter().map(|p| p.sum_root.to_string()).collect();
        got.sort();
        assert_eq!(got, ["1", "1+2", "1+2+3", "2", "2+3"]);
        let a2 = PhiSystem::parse(2, "1,2").unwrap();
        let psi = build_psi(&a2);
        assert_eq!(psi.len(), 1);
        assert_eq!(psi[0].sum_root.to_string(), "1+2");
    }

    #[test]
    fn psi_matches_brute_force_over_signed_roots() {
        use crate::rootsys::root_sum;
        for (rank, text) in [(3, "1,2,3,1+2+3"), (4, "1,2,3,4,2+3,1+2+3+4"), (4, "1,2,3,4,1+2,2+3,3+4")] {
            let phi = PhiSystem::parse(rank, text).unwrap();
            let roots = phi.roots();
            let mut brute = std::collections::BTreeSet::new();
            for i in 0..roots.len() {
                for j in i + 1..roots.len() {
                    for (x, y) in [
                        (roots[i].clone(), roots[j].clone()),
                        (roots[i].neg(), roots[j].clone()),
                        (roots[i].clone(), roots[j].neg()),
                    ] {
                        if let Some(s) = root_sum(&x, &y) {
                            brute.insert(s.to_string());
                        }
                    }
                }
            }
            let got: std::collections::BTreeSet<String> =
                build_psi(&phi).iter().map(|p| p.sum_root.to_string()).collect();
            assert_eq!(got, brute, "{text}");
        }
    }

    #[test]
    fn km_chain() {
        let phi = PhiSystem::parse(3, "1,2,3").unwrap();
        let pair = search_signs(&phi).unwrap().unwrap();
        assert!(pair.is_consistent());
        let want = polys(3, &["a1*a2^2", "-a1^2*a2 + a2*a3^2", "-a2^2*a3"]);
        assert_eq!(pair.xdot, want);
    }

    #[test]
    fn explicit_b_round_trip() {
        let phi = PhiSystem::parse(4, "1,2,3,4,2+3").unwrap();
        let pair = search_signs(&phi).unwrap().unwrap();
        let again = LaxPair::from_b(&phi, pair.b.clone()).unwrap();
        assert_eq!(again, pair);
    }

    #[test]
    fn from_b_rejects_bad_b() {
        let phi = PhiSystem::parse(2, "1,2").unwrap();
        let mut b = PolyMatrix::zeros(3, 2);
        b.set(0, 2, Poly::product_of(2, &[0, 1], rat(1)));
        assert_eq!(LaxPair::from_b(&phi, b.clone()), Err(Error::NotSkew));
        b.set(2, 0, Poly::product_of(2, &[0, 1], rat(1)));
        assert!(LaxPair::from_b(&phi, b).is_err());
    }

    #[test]
    fn target_selects_matching_solution() {
        let phi = PhiSystem::parse(3, "1,2,3").unwrap();
        let reversed = polys(3, &["-a1*a2^2", "a1^2*a2 - a2*a3^2", "a2^2*a3"]);
        let opts = SearchOptions { target: Some(reversed.clone()), ..SearchOptions::default() };
        let pair = search_signs_with(&phi, &opts).unwrap().unwrap();
        assert_eq!(pair.xdot, reversed);
        let impossible = polys(3, &["a1*a2^2", "a1^2*a2", "0"]);
        let opts = SearchOptions { target: Some(impossible), ..SearchOptions::default() };
        assert!(search_signs_with(&phi, &opts).unwrap().is_none());
    }
}
