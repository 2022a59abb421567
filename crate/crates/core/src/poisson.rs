//! Quadratic Poisson structures, Jacobi certification, Casimirs and ranks.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laxkit::LaxPair;
use crate::symbolic::{rat, Monomial, Poly, PolyMatrix, RatMatrix, Rational, RationalFn};

/// Number of random points tried by [`generic_rank`].
pub const RANK_TRIALS: usize = 10;

/// Skew polynomial matrix together with its certification data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonMatrix {
    pub pi: PolyMatrix,
    pub jacobi_certified: bool,
    pub generic_rank: usize,
    pub rank_seed: u64,
}

impl PoissonMatrix {
    /// Runs the full Jacobi check and computes the generic rank.
    pub fn certify(pi: PolyMatrix, seed: u64) -> Result<PoissonMatrix> {
        if !pi.is_skew() {
            return Err(Error::NotSkew);
        }
        let jacobi_certified = jacobi_violation(&pi).is_none();
        let generic_rank = generic_rank(&pi, seed);
        Ok(PoissonMatrix { pi, jacobi_certified, generic_rank, rank_seed: seed })
    }

    pub fn var_count(&self) -> usize {
        self.pi.nvars()
    }

    /// `pi * grad(h)`.
    pub fn hamiltonian_field(&self, h: &Poly) -> Vec<Poly> {
        let grad = h.gradient();
        (0..self.pi.dim())
            .map(|i| {
                let mut acc = Poly::zero(self.var_count());
                for (j, g) in grad.iter().enumerate() {
                    let e = self.pi.get(i, j);
                    if !e.is_zero() && !g.is_zero() {
                        acc += &(e * g);
                    }
                }
                acc
            })
            .collect()
    }
}

/// `pi_ij = A_ij x_i x_j`.
pub fn lv_poisson(a: &[Vec<i64>], seed: u64) -> Result<PoissonMatrix> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("LV matrix must be square".into()));
    }
    if (0..n).any(|i| (0..n).any(|j| a[i][j] != -a[j][i])) {
        return Err(Error::NotSkew);
    }
    let pi = PolyMatrix::from_fn(n, n, |i, j| {
        if a[i][j] == 0 {
            Poly::zero(n)
        } else {
            Poly::product_of(n, &[i, j], rat(a[i][j]))
        }
    });
    PoissonMatrix::certify(pi, seed)
}

/// First triple `i < j < k` whose Schouten expression is nonzero.
pub fn jacobi_violation(pi: &PolyMatrix) -> Option<(usize, usize, usize)> {
    let n = pi.dim();
    // d[l][a][b] = d pi_ab / d x_l
    let d: Vec<Vec<Vec<Poly>>> = (0..n)
        .map(|l| (0..n).map(|a| (0..n).map(|b| pi.get(a, b).partial(l).expect("in range")).collect()).collect())
        .collect();
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k)))).collect();
    triples
        .par_iter()
        .find_first(|&&(i, j, k)| {
            let mut acc = Poly::zero(pi.nvars());
            for (l, dl) in d.iter().enumerate() {
                for (x, a, b) in [(i, j, k), (j, k, i), (k, i, j)] {
                    let e = pi.get(l, x);
                    let de = &dl[a][b];
                    if !e.is_zero() && !de.is_zero() {
                        acc += &(e * de);
                    }
                }
            }
            !acc.is_zero()
        })
        .copied()
}

/// `{F, G} = sum_ij pi_ij dF/dx_i dG/dx_j`.
pub fn bracket(f: &Poly, g: &Poly, pi: &PoissonMatrix) -> Result<Poly> {
    let n = pi.var_count();
    for p in [f, g] {
        if p.nvars() != n {
            return Err(Error::VarCountMismatch { expected: n, got: p.nvars() });
        }
    }
    let df = f.gradient();
    let field = pi.hamiltonian_field(g);
    let mut acc = Poly::zero(n);
    for (fi, wi) in df.iter().zip(&field) {
        if !fi.is_zero() && !wi.is_zero() {
            acc += &(fi * wi);
        }
    }
    Ok(acc)
}

/// Numerator of `{p/q, r/s}` after clearing denominators, zero iff the
/// bracket vanishes.
pub fn bracket_rational(f: &RationalFn, g: &RationalFn, pi: &PoissonMatrix) -> Result<Poly> {
    // {p/q, r/s} = ({p,r} q s - {p,s} q r - {q,r} p s + {q,s} p r) / (q^2 s^2)
    let (p, q) = (f.num(), f.den());
    let (r, s) = (g.num(), g.den());
    if q.is_constant() && s.is_constant() {
        return bracket(p, r, pi);
    }
    let t1 = &(&bracket(p, r, pi)? * q) * s;
    let t2 = &(&bracket(p, s, pi)? * q) * r;
    let t3 = &(&bracket(q, r, pi)? * p) * s;
    let t4 = &(&bracket(q, s, pi)? * p) * r;
    Ok(&(&t1 - &t2) - &(&t3 - &t4))
}

/// Monomial `x^k`, possibly with negative exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialCasimir {
    pub exponents: Vec<i64>,
}

impl MonomialCasimir {
    pub fn is_polynomial(&self) -> bool {
        self.exponents.iter().all(|&e| e >= 0)
    }

    /// Positive exponents over negative exponents.
    pub fn to_rational_fn(&self) -> RationalFn {
        let part = |sign: i64| {
            let e: Vec<u16> = self.exponents.iter().map(|&k| (k * sign).max(0) as u16).collect();
            Poly::monomial(Monomial::from_exponents(&e), rat(1))
        };
        RationalFn::new(part(1), part(-1)).expect("monomial denominator")
    }

    pub fn to_poly(&self) -> Option<Poly> {
        self.is_polynomial().then(|| self.to_rational_fn().num().clone())
    }
}

/// Integer basis of `ker A`, one primitive vector per free column.
pub fn monomial_casimirs(a: &[Vec<i64>]) -> Result<Vec<MonomialCasimir>> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("LV matrix must be square".into()));
    }
    if (0..n).any(|i| (0..n).any(|j| a[i][j] != -a[j][i])) {
        return Err(Error::NotSkew);
    }
    Ok(RatMatrix::from_i64(a)
        .integer_kernel()
        .into_iter()
        .map(|v| MonomialCasimir { exponents: v.iter().map(|x| x.to_i64().expect("small kernel entry")).collect() })
        .collect())
}

/// Odd integer in `1..=97`.
pub fn random_odd(rng: &mut ChaCha8Rng) -> i64 {
    2 * rng.random_range(0..49) + 1
}

/// Random evaluation point with odd integer coordinates in `1..=97`.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| rat(random_odd(rng))).collect()
}

/// Maximum exact rank over [`RANK_TRIALS`] seeded random points.
pub fn generic_rank(m: &PolyMatrix, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..RANK_TRIALS {
        let pt = random_point(&mut rng, m.nvars());
        let r = m.eval(&pt).expect("point length").rank();
        best = best.max(r);
        if best == m.dim() {
            break;
        }
    }
    best
}

/// Coefficient alphabet searched by [`derive_a_poisson`].
pub const ALPHABET: [i64; 5] = [0, 1, -1, 2, -2];

/// Largest number of free parameters enumerated by [`derive_a_poisson`].
pub const MAX_FREE_PARAMETERS: usize = 8;

/// Quadratic skew `pi` with `da/dt = pi * a`, i.e. Hamiltonian
/// `H = 1/2 sum a_k^2`, passing the Jacobi check.
///
/// Entries are sums of monomials read off the vector field with unknown
/// coefficients. Solutions with all coefficients in [`ALPHABET`] are tried
/// sparsest first and the first Jacobi-certified one is returned.
pub fn derive_a_poisson(pair: &LaxPair, seed: u64) -> Result<Option<PoissonMatrix>> {
    let m = pair.var_count();
    // unknown (i < j, quadratic monomial) contributes u*mu*a_j to row i and -u*mu*a_i to row j
    let mut unknowns: BTreeMap<(usize, usize, Monomial), usize> = BTreeMap::new();
    for (k, f) in pair.xdot.iter().enumerate() {
        for (mono, _) in f.terms() {
            for l in mono.factors() {
                if l == k {
                    continue;
                }
                let mu = mono.div(&Monomial::var(m, l)).expect("factor");
                let key = (k.min(l), k.max(l), mu);
                let next = unknowns.len();
                unknowns.entry(key).or_insert(next);
            }
        }
    }
    let keys: Vec<(usize, usize, Monomial)> = {
        let mut v: Vec<_> = unknowns.iter().map(|(k, &idx)| (idx, k.clone())).collect();
        v.sort_by_key(|(idx, _)| *idx);
        v.into_iter().map(|(_, k)| k).collect()
    };
    let nu = keys.len();
    let mut rows: BTreeMap<(usize, Monomial), Vec<(usize, i64)>> = BTreeMap::new();
    for (u, (i, j, mu)) in keys.iter().enumerate() {
        rows.entry((*i, mu.mul(&Monomial::var(m, *j)))).or_default().push((u, 1));
        rows.entry((*j, mu.mul(&Monomial::var(m, *i)))).or_default().push((u, -1));
    }
    for (k, f) in pair.xdot.iter().enumerate() {
        for (mono, _) in f.terms() {
            if !rows.contains_key(&(k, mono.clone())) {
                return Ok(None);
            }
        }
    }
    let row_keys: Vec<&(usize, Monomial)> = rows.keys().collect();
    let mut aug = RatMatrix::zeros(rows.len(), nu + 1);
    for (r, key) in row_keys.iter().enumerate() {
        for &(u, c) in &rows[*key] {
            let v = aug.get(r, u) + rat(c);
            aug.set(r, u, v);
        }
        aug.set(r, nu, pair.xdot[key.0].coeff(&key.1));
    }
    let (red, pivots) = aug.rref();
    if pivots.last() == Some(&nu) {
        return Ok(None);
    }
    let free: Vec<usize> = (0..nu).filter(|c| !pivots.contains(c)).collect();
    if free.len() > MAX_FREE_PARAMETERS {
        return Ok(None);
    }
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    let total = ALPHABET.len().pow(free.len() as u32);
    'outer: for code in 0..total {
        let mut sol = vec![0i64; nu];
        let mut c = code;
        for &f in &free {
            sol[f] = ALPHABET[c % ALPHABET.len()];
            c /= ALPHABET.len();
        }
        for (r, &p) in pivots.iter().enumerate() {
            let mut v = red.get(r, nu).clone();
            for &f in &free {
                v -= red.get(r, f) * rat(sol[f]);
            }
            if !v.is_integer() {
                continue 'outer;
            }
            let Some(x) = v.to_integer().to_i64() else {
                continue 'outer;
            };
            if !ALPHABET.contains(&x) {
                continue 'outer;
            }
            sol[p] = x;
        }
        candidates.push(sol);
    }
    let rank_key = |x: i64| ALPHABET.iter().position(|&a| a == x).expect("in alphabet");
    candidates
        .sort_by_key(|s| (s.iter().filter(|&&x| x != 0).count(), s.iter().map(|&x| rank_key(x)).collect::<Vec<_>>()));
    for sol in candidates {
        let mut pi = PolyMatrix::zeros(m, m);
        for (u, (i, j, mu)) in keys.iter().enumerate() {
            if sol[u] == 0 {
                continue;
            }
            let t = Poly::monomial(mu.clone(), rat(sol[u]));
            pi.add_to(*i, *j, &t);
            pi.add_to(*j, *i, &-&t);
        }
        if jacobi_violation(&pi).is_none() {
            return PoissonMatrix::certify(pi, seed).map(Some);
        }
    }
    Ok(None)
}

/// Closed-form Poisson matrix of the two-diagonal family in the `n + m - 1`
/// variables of [`two_diagonal_family`](crate::laxkit::two_diagonal_family).
pub fn two_diagonal_poisson(m: usize, n: usize, seed: u64) -> Result<PoissonMatrix> {
    crate::laxkit::two_diagonal_phi(m, n)?;
    let nv = n + m - 1;
    let a = |k: usize| Poly::var(nv, k - 1);
    let mut q = PolyMatrix::zeros(nv, nv);
    let mut add = |i: usize, j: usize, p: Poly| q.add_to(i - 1, j - 1, &p);
    for i in 1..m {
        add(i, i + n, &a(i) * &a(i + n));
        add(i + n - m, i + n - 1, -(&a(i + n - 1) * &a(i + n - m)));
        add(i + n - 1, i + n, (&a(i) * &a(i + n - m)).scale(&rat(2)));
    }
    for i in 1..=m {
        add(i, i + n - 1, -(&a(i) * &a(i + n - 1)));
        add(i + n - m - 1, i + n - 1, &a(i + n - 1) * &a(i + n - m - 1));
    }
    for i in 1..=n - 2 {
        add(i, i + 1, &a(i) * &a(i + 1));
    }
    let pi = q.sub(&q.transpose());
    PoissonMatrix::certify(pi, seed)
}

/// Poisson matrix pushed forward along `y = phi(x)`:
/// `{y_a, y_b} = sum_ij dy_a/dx_i dy_b/dx_j pi_ij`, expressed in `x`.
pub fn push_forward(pi: &PoissonMatrix, map: &[Poly]) -> Result<PolyMatrix> {
    let n = map.len();
    let mut out = PolyMatrix::zeros(n, pi.var_count());
    for a in 0..n {
        for b in a + 1..n {
            let v = bracket(&map[a], &map[b], pi)?;
            out.set(b, a, -&v);
            out.set(a, b, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laxkit::{named_family, search_signs, Family};
    use crate::rootsys::PhiSystem;
    use crate::symbolic::Vars;

    const EX1: [[i64; 4]; 4] = [[0, 1, 0, -1], [-1, 0, 1, 1], [0, -1, 0, 1], [1, -1, -1, 0]];

    fn ex1() -> Vec<Vec<i64>> {
        EX1.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn lv_bracket_entries() {
        let p = lv_poisson(&ex1(), 1).unwrap();
        let v = Vars::indexed("x", 4);
        assert_eq!(p.pi.get(0, 1).fmt_with(&v), "x1*x2");
        assert_eq!(p.pi.get(0, 3).fmt_with(&v), "-x1*x4");
        assert!(p.jacobi_certified);
        assert_eq!(p.generic_rank, 2);
        let zero = lv_poisson(&[vec![0, 0], vec![0, 0]], 1).unwrap();
        assert_eq!(zero.generic_rank, 0);
        assert!(matches!(lv_poisson(&[vec![0, 1], vec![1, 0]], 1), Err(Error::NotSkew)));
    }

    #[test]
    fn casimirs_of_lv_example() {
        let c = monomial_casimirs(&ex1()).unwrap();
        assert_eq!(
            c,
            vec![MonomialCasimir { exponents: vec![1, 0, 1, 0] }, MonomialCasimir { exponents: vec![1, 1, 0, 1] }]
        );
        let p = lv_poisson(&ex1(), 1).unwrap();
        for cas in &c {
            let f = cas.to_poly().unwrap();
            for j in 0..4 {
                assert!(bracket(&f, &Poly::var(4, j), &p).unwrap().is_zero());
            }
        }
        assert!(monomial_casimirs(&[vec![0, 1], vec![-1, 0]]).unwrap().is_empty());
    }

    #[test]
    fn km_hamiltonian_bracket() {
        // {x_i, sum x} = x_i (x_{i+1} - x_{i-1})
        let n = 5;
        let a: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j == i + 1 {
                            1
                        } else if i == j + 1 {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let p = lv_poisson(&a, 3).unwrap();
        let h = (0..n).fold(Poly::zero(n), |acc, k| &acc + &Poly::var(n, k));
        for i in 0..n {
            let got = bracket(&Poly::var(n, i), &h, &p).unwrap();
            let mut want = Poly::zero(n);
            if i + 1 < n {
                want += &Poly::product_of(n, &[i, i + 1], rat(1));
            }
            if i > 0 {
                want -= &Poly::product_of(n, &[i, i - 1], rat(1));
            }
            assert_eq!(got, want);
        }
    }

    #[test]
    fn laurent_casimir() {
        let c = MonomialCasimir { exponents: vec![1, -2, 0] };
        let f = c.to_rational_fn();
        assert_eq!(f.to_string(), "(a1)/(a2^2)");
        assert!(c.to_poly().is_none());
    }

    #[test]
    fn km_a_form_bracket() {
        let pair = search_signs(&PhiSystem::parse(4, "1,2,3,4").unwrap()).unwrap().unwrap();
        let p = derive_a_poisson(&pair, 5).unwrap().unwrap();
        for i in 0..3 {
            assert_eq!(p.pi.get(i, i + 1), &Poly::product_of(4, &[i, i + 1], rat(1)));
        }
    }

    #[test]
    fn push_forward_is_four_times_lv() {
        for f in Family::ALL {
            let pair = named_family(f, 4).unwrap();
            let lv = crate::laxkit::detect_lv(&pair).unwrap();
            let sub = lv.substitution();
            let a_pi = derive_a_poisson(&pair, 2).unwrap().unwrap();
            let pushed = push_forward(&a_pi, &sub).unwrap();
            let x_pi = lv_poisson(&lv.matrix, 2).unwrap();
            let n = sub.len();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(pushed.get(i, j), &x_pi.pi.get(i, j).substitute(&sub).scale(&rat(4)), "{f} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn km_odd_casimir_is_determinant() {
        for n in [3, 5, 7] {
            let pair = named_family(Family::Km, n).unwrap();
            let lv = crate::laxkit::detect_lv(&pair).unwrap();
            let f1 = MonomialCasimir { exponents: (0..n).map(|k| i64::from(k % 2 == 0)).collect() };
            assert!(monomial_casimirs(&lv.matrix).unwrap().contains(&f1));
            let pulled = f1.to_poly().unwrap().substitute(&lv.substitution());
            let det = pair.l.det();
            let scale = rat(1 << n.div_ceil(2));
            assert!(pulled == det.scale(&scale) || pulled == det.scale(&-scale), "n={n}");
        }
    }

    #[test]
    fn family_hamiltonian_field_matches() {
        let pair = named_family(Family::Family2, 5).unwrap();
        let p = derive_a_poisson(&pair, 5).unwrap().unwrap();
        let h = (0..6).fold(Poly::zero(6), |acc, k| &acc + &Poly::product_of(6, &[k, k], crate::symbolic::ratio(1, 2)));
        assert_eq!(p.hamiltonian_field(&h), pair.xdot);
    }
}
