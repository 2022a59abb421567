//! Sign constraints for `B` and a backtracking solver over `{+1, -1}`.
//!
//! Every coefficient of `[B, L]` is linear in the unknown signs, so the
//! requirement that `[B, L]` vanish off the support of `L` is a system of
//! integer linear equations in variables restricted to `+1` and `-1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rootsys::PhiSystem;

/// Two variables whose root positions share exactly one index, together
/// with the zero-based matrix position of their sum root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContributorPair {
    pub i: usize,
    pub j: usize,
    /// Zero-based upper-triangular position of the sum root.
    pub sum: (usize, usize),
    /// Factor signs: `+1` if the factor enters as a positive root.
    pub sign_i: i8,
    pub sign_j: i8,
}

/// Enumerates contributor pairs `i < j` in lexicographic order.
pub fn contributor_pairs(phi: &PhiSystem) -> Vec<ContributorPair> {
    let m = phi.var_count();
    let pos: Vec<(usize, usize)> = (0..m).map(|k| phi.var_position(k)).collect();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if let Some((sum, si, sj)) = compose(pos[i], pos[j]) {
                out.push(ContributorPair { i, j, sum, sign_i: si, sign_j: sj });
            }
        }
    }
    out
}

/// Sum of `e_p1 - e_q1` and `e_p2 - e_q2` taken with the unique choice of
/// signs that yields a positive root, if any.
fn compose((p1, q1): (usize, usize), (p2, q2): (usize, usize)) -> Option<((usize, usize), i8, i8)> {
    let shared = [p1 == p2, p1 == q2, q1 == p2, q1 == q2].iter().filter(|&&b| b).count();
    if shared != 1 {
        return None;
    }
    if q1 == p2 {
        Some(((p1, q2), 1, 1))
    } else if q2 == p1 {
        Some(((p2, q1), 1, 1))
    } else if p1 == p2 {
        // e_qmin - e_qmax: the root reaching further is the positive one
        if q1 < q2 {
            Some(((q1, q2), -1, 1))
        } else {
            Some(((q2, q1), 1, -1))
        }
    } else if p1 < p2 {
        Some(((p1, p2), 1, -1))
    } else {
        Some(((p2, p1), -1, 1))
    }
}

/// Cubic monomial `a_x a_y a_z` as sorted variable indices.
pub type Cubic = [u16; 3];

fn cubic(i: usize, j: usize, k: usize) -> Cubic {
    let mut c = [i as u16, j as u16, k as u16];
    c.sort_unstable();
    c
}

/// Linear form in the pair signs.
pub type LinearForm = BTreeMap<usize, i64>;

/// Coefficients of `[B, L]` as linear forms in the signs, split into
/// off-support entries (which must vanish) and on-support entries (which
/// give the vector field).
#[derive(Clone, Debug)]
pub struct SignSystem {
    pub pairs: Vec<ContributorPair>,
    /// Per variable `k`: monomial -> linear form of its coefficient in `da_k/dt`.
    pub on_support: Vec<BTreeMap<Cubic, LinearForm>>,
    /// Every linear form that must vanish.
    pub off_support: Vec<LinearForm>,
}

impl SignSystem {
    pub fn new(phi: &PhiSystem) -> SignSystem {
        let pairs = contributor_pairs(phi);
        let dim = phi.dim();
        let m = phi.var_count();
        // l_at[r][s] = variable at (r, s); b_at[r][s] = (pair, sign)
        let mut l_at: Vec<Vec<Option<usize>>> = vec![vec![None; dim]; dim];
        for k in 0..m {
            let (p, q) = phi.var_position(k);
            l_at[p][q] = Some(k);
            l_at[q][p] = Some(k);
        }
        let mut b_at: Vec<Vec<Vec<(usize, i64)>>> = vec![vec![Vec::new(); dim]; dim];
        for (idx, pr) in pairs.iter().enumerate() {
            let (p, q) = pr.sum;
            b_at[p][q].push((idx, 1));
            b_at[q][p].push((idx, -1));
        }
        let mut entries: BTreeMap<(usize, usize), BTreeMap<Cubic, LinearForm>> = BTreeMap::new();
        for r in 0..dim {
            for s in r..dim {
                let mut acc: BTreeMap<Cubic, LinearForm> = BTreeMap::new();
                for t in 0..dim {
                    // (B L)_{rs}
                    if let Some(k) = l_at[t][s] {
                        for &(idx, sg) in &b_at[r][t] {
                            let pr = pairs[idx];
                            *acc.entry(cubic(pr.i, pr.j, k)).or_default().entry(idx).or_default() += sg;
                        }
                    }
                    // -(L B)_{rs}
                    if let Some(k) = l_at[r][t] {
                        for &(idx, sg) in &b_at[t][s] {
                            let pr = pairs[idx];
                            *acc.entry(cubic(pr.i, pr.j, k)).or_default().entry(idx).or_default() -= sg;
                        }
                    }
                }
                for form in acc.values_mut() {
                    form.retain(|_, c| *c != 0);
                }
                acc.retain(|_, f| !f.is_empty());
                if !acc.is_empty() {
                    entries.insert((r, s), acc);
                }
            }
        }
        let mut on_support = vec![BTreeMap::new(); m];
        let mut off_support = Vec::new();
        for ((r, s), acc) in entries {
            match l_at[r][s] {
                Some(k) if r < s => on_support[k] = acc,
                _ => off_support.extend(acc.into_values()),
            }
        }
        SignSystem { pairs, on_support, off_support }
    }

    /// Coefficients of the vector field under a sign assignment.
    pub fn xdot_coefficients(&self, signs: &[i8]) -> Vec<BTreeMap<Cubic, i64>> {
        self.on_support
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|(mono, form)| {
                        let v: i64 = form.iter().map(|(&p, &c)| c * i64::from(signs[p])).sum();
                        (v != 0).then_some((*mono, v))
                    })
                    .collect()
            })
            .collect()
    }
}

/// `sum coef * c_var = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub terms: Vec<(usize, i64)>,
    pub rhs: i64,
}

impl Equation {
    pub fn homogeneous(form: &LinearForm) -> Equation {
        Equation { terms: form.iter().map(|(&v, &c)| (v, c)).collect(), rhs: 0 }
    }
}

/// Solver for integer linear equations over `{+1, -1}`.
///
/// Depth-first search deciding the lowest unassigned variable, `+1` before
/// `-1`, with unit propagation and bound/parity pruning. The first solution
/// found is therefore the lexicographically first one.
pub struct SignSolver {
    nvars: usize,
    eqs: Vec<Equation>,
    occurs: Vec<Vec<usize>>,
    budget: u64,
}

/// Default limit on search decisions.
pub const DEFAULT_NODE_BUDGET: u64 = 1 << 20;

struct State {
    assign: Vec<i8>,
    trail: Vec<usize>,
    nodes: u64,
}

impl SignSolver {
    pub fn new(nvars: usize, eqs: Vec<Equation>, budget: u64) -> SignSolver {
        let mut occurs = vec![Vec::new(); nvars];
        for (e, eq) in eqs.iter().enumerate() {
            for &(v, _) in &eq.terms {
                if occurs[v].last() != Some(&e) {
                    occurs[v].push(e);
                }
            }
        }
        SignSolver { nvars, eqs, occurs, budget }
    }

    /// Lexicographically first solution, if any.
    pub fn first(&self) -> Result<Option<Vec<i8>>> {
        let mut found = None;
        self.run(|s| {
            found = Some(s.to_vec());
            false
        })?;
        Ok(found)
    }

    /// All solutions in lexicographic order, stopping after `limit`.
    pub fn all(&self, limit: usize) -> Result<Vec<Vec<i8>>> {
        let mut out = Vec::new();
        if limit == 0 {
            return Ok(out);
        }
        self.run(|s| {
            out.push(s.to_vec());
            out.len() < limit
        })?;
        Ok(out)
    }

    fn run(&self, mut on_solution: impl FnMut(&[i8]) -> bool) -> Result<()> {
        let mut st = State { assign: vec![0; self.nvars], trail: Vec::new(), nodes: 0 };
        // equations with no variables
        if self.eqs.iter().any(|e| e.terms.is_empty() && e.rhs != 0) {
            return Ok(());
        }
        let all: Vec<usize> = (0..self.eqs.len()).collect();
        if !self.propagate(&mut st, &all) {
            return Ok(());
        }
        self.dfs(&mut st, &mut on_solution)?;
        Ok(())
    }

    /// Returns `false` when the caller should stop.
    fn dfs(&self, st: &mut State, on_solution: &mut impl FnMut(&[i8]) -> bool) -> Result<bool> {
        let Some(var) = st.assign.iter().position(|&a| a == 0) else {
            return Ok(on_solution(&st.assign));
        };
        for value in [1i8, -1] {
            st.nodes += 1;
            if st.nodes > self.budget {
                return Err(Error::SearchSpaceTooLarge { budget: self.budget });
            }
            let mark = st.trail.len();
            st.assign[var] = value;
            st.trail.push(var);
            if self.propagate(st, &self.occurs[var]) && !self.dfs(st, on_solution)? {
                return Ok(false);
            }
            for v in st.trail.drain(mark..) {
                st.assign[v] = 0;
            }
        }
        Ok(true)
    }

    fn propagate(&self, st: &mut State, start: &[usize]) -> bool {
        let mut queue: Vec<usize> = start.to_vec();
        while let Some(e) = queue.pop() {
            let eq = &self.eqs[e];
            let mut sum = 0i64;
            let mut free_abs = 0i64;
            let mut free_sum = 0i64;
            let mut last_free = None;
            let mut nfree = 0;
            for &(v, c) in &eq.terms {
                match st.assign[v] {
                    0 => {
                        free_abs += c.abs();
                        free_sum += c;
                        nfree += 1;
                        last_free = Some((v, c));
                    }
                    a => sum += c * i64::from(a),
                }
            }
            let gap = eq.rhs - sum;
            if nfree == 0 {
                if gap != 0 {
                    return false;
                }
                continue;
            }
            if gap.abs() > free_abs || (gap - free_sum).rem_euclid(2) != 0 {
                return false;
            }
            if nfree == 1 {
                let (v, c) = last_free.expect("one free variable");
                let value = if gap == c {
                    1
                } else if gap == -c {
                    -1
                } else {
                    return false;
                };
                st.assign[v] = value;
                st.trail.push(v);
                queue.extend_from_slice(&self.occurs[v]);
            } else if gap.abs() == free_abs {
                // every free term is forced to the sign of gap
                let dir = gap.signum();
                for &(v, c) in &eq.terms {
                    if st.assign[v] == 0 {
                        st.assign[v] = if c * dir > 0 { 1 } else { -1 };
                        st.trail.push(v);
                        queue.extend_from_slice(&self.occurs[v]);
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(nvars: usize, eqs: &[Equation]) -> Vec<Vec<i8>> {
        let mut out = Vec::new();
        for bits in 0..1u32 << nvars {
            // bit set means -1; iterate so +1 comes first lexicographically
            let s: Vec<i8> = (0..nvars).map(|k| if bits >> (nvars - 1 - k) & 1 == 1 { -1 } else { 1 }).collect();
            let ok = eqs.iter().all(|e| e.terms.iter().map(|&(v, c)| c * i64::from(s[v])).sum::<i64>() == e.rhs);
            if ok {
                out.push(s);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_on_small_systems() {
        let eqs = vec![
            Equation { terms: vec![(0, 1), (1, 1)], rhs: 0 },
            Equation { terms: vec![(1, 1), (2, -1), (3, 1)], rhs: 1 },
            Equation { terms: vec![(3, 2), (4, 1)], rhs: 1 },
        ];
        let solver = SignSolver::new(5, eqs.clone(), DEFAULT_NODE_BUDGET);
        assert_eq!(solver.all(usize::MAX).unwrap(), brute(5, &eqs));
        assert_eq!(solver.first().unwrap(), brute(5, &eqs).into_iter().next());
    }

    #[test]
    fn infeasible_system() {
        let eqs = vec![Equation { terms: vec![(0, 1), (1, 1)], rhs: 1 }];
        assert_eq!(SignSolver::new(2, eqs, 10).first().unwrap(), None);
    }

    #[test]
    fn budget_is_enforced() {
        let solver = SignSolver::new(30, Vec::new(), 8);
        assert!(solver.all(usize::MAX).is_err());
        assert!(solver.first().is_err());
    }

    #[test]
    fn pairs_for_one_extra_root() {
        let phi = PhiSystem::parse(3, "1,2,3,1+2").unwrap();
        let pairs = contributor_pairs(&phi);
        let sums: Vec<_> = pairs.iter().map(|p| (p.i, p.j, p.sum)).collect();
        assert_eq!(sums, vec![(0, 1, (0, 2)), (0, 3, (1, 2)), (1, 2, (1, 3)), (1, 3, (0, 1)), (2, 3, (0, 3))]);
        // a1 + a2 - a2 and a1 + a2 - a1
        assert_eq!((pairs[1].sign_i, pairs[1].sign_j), (-1, 1));
        assert_eq!((pairs[3].sign_i, pairs[3].sign_j), (-1, 1));
    }
}
