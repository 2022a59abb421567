//! First integrals: trace powers, determinants, chopping, Moser squaring and
//! the closed forms of the two-diagonal family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::matrix::lambda_coefficients;
use crate::symbolic::{rat, Poly, PolyMatrix, Rational, RationalFn};

/// Labelled polynomial and rational integrals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntegralSet {
    pub polys: Vec<(String, Poly)>,
    pub rationals: Vec<(String, RationalFn)>,
}

impl IntegralSet {
    pub fn new() -> Self {
        IntegralSet::default()
    }

    pub fn from_polys(polys: Vec<(String, Poly)>) -> Self {
        IntegralSet { polys, rationals: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, p: Poly) {
        self.polys.push((label.into(), p));
    }

    pub fn push_rational(&mut self, label: impl Into<String>, f: RationalFn) {
        self.rationals.push((label.into(), f));
    }

    pub fn len(&self) -> usize {
        self.polys.len() + self.rationals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<&str> {
        self.polys.iter().map(|(l, _)| l.as_str()).chain(self.rationals.iter().map(|(l, _)| l.as_str())).collect()
    }

    /// Every member as a rational function, polynomials first.
    pub fn as_rational(&self) -> Vec<(String, RationalFn)> {
        self.polys
            .iter()
            .map(|(l, p)| (l.clone(), RationalFn::from_poly(p.clone())))
            .chain(self.rationals.iter().cloned())
            .collect()
    }
}

/// Divisor applied to `tr(L^k)`: `2k` for odd `k`, `k` for even `k`.
pub fn trace_divisor(k: u32) -> u32 {
    if k % 2 == 1 {
        2 * k
    } else {
        k
    }
}

/// Label such as `tr(L^3)/6`.
pub fn trace_label(k: u32) -> String {
    format!("tr(L^{k})/{}", trace_divisor(k))
}

/// `tr(L^k) / trace_divisor(k)`.
pub fn trace_power(l: &PolyMatrix, k: u32) -> Result<Poly> {
    if k == 0 {
        return Err(Error::InvalidArgument("trace power needs k >= 1".into()));
    }
    let t = l.pow(k).trace();
    Ok(t.scale(&Rational::new(1.into(), trace_divisor(k).into())))
}

/// Trace powers `k = 2..=max_k` that are not identically zero.
pub fn trace_integrals(l: &PolyMatrix, max_k: u32) -> Vec<(u32, Poly)> {
    let mut out = Vec::new();
    let mut power = l.clone();
    for k in 2..=max_k {
        power = power.mul(l);
        let t = power.trace();
        if !t.is_zero() {
            out.push((k, t.scale(&Rational::new(1.into(), trace_divisor(k).into()))));
        }
    }
    out
}

/// Determinant of `L - lambda*I` with the first `k` rows and last `k`
/// columns removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoppedDet {
    pub k: usize,
    /// Coefficients of `lambda^(n-2k), ..., lambda^0`.
    pub coeffs: Vec<Poly>,
    /// `(r, E_r / E_lead)` for each nonzero coefficient after the leading one.
    pub rationals: Vec<(usize, RationalFn)>,
}

impl ChoppedDet {
    /// Index of the first nonzero coefficient.
    pub fn leading_index(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// The determinant as a polynomial in the base ring plus `lambda`
    /// as a trailing variable.
    pub fn as_poly(&self) -> Poly {
        let nv = self.coeffs.first().map_or(0, Poly::nvars);
        let deg = self.coeffs.len() - 1;
        let mut acc = Poly::zero(nv + 1);
        for (i, c) in self.coeffs.iter().enumerate() {
            let mono = Poly::var(nv + 1, nv).pow((deg - i) as u32);
            acc += &(&c.extend_vars(nv + 1) * &mono);
        }
        acc
    }
}

/// Chopped determinant at depth `k`.
pub fn chop(l: &PolyMatrix, k: usize) -> Result<ChoppedDet> {
    let n = l.dim();
    if n == 0 || k > (n - 1) / 2 {
        return Err(Error::InvalidArgument(format!("chop depth {k} out of range for {n}x{n} matrix")));
    }
    let nv = l.nvars();
    let ext = nv + 1;
    let rows: Vec<usize> = (k..n).collect();
    let cols: Vec<usize> = (0..n - k).collect();
    let shifted = PolyMatrix::from_fn(n, ext, |i, j| {
        let e = l.get(i, j).extend_vars(ext);
        if i == j {
            &e - &Poly::var(ext, nv)
        } else {
            e
        }
    });
    let det = shifted.submatrix(&rows, &cols).det();
    let coeffs = lambda_coefficients(&det, nv, n - 2 * k);
    let mut rationals = Vec::new();
    if let Some(lead) = coeffs.iter().position(|c| !c.is_zero()) {
        for (r, c) in coeffs.iter().enumerate().skip(lead + 1) {
            if !c.is_zero() {
                rationals.push((r, RationalFn::new(c.clone(), coeffs[lead].clone())?));
            }
        }
    }
    Ok(ChoppedDet { k, coeffs, rationals })
}

/// Flips numerator and denominator so both leading terms are positive.
pub fn normalize_sign(f: RationalFn) -> RationalFn {
    let positive = |p: Poly| if p.leading_term().is_none_or(|(_, c)| c > &rat(0)) { p } else { -p };
    RationalFn::new(positive(f.num().clone()), positive(f.den().clone())).expect("denominator stays nonzero")
}

/// Index class removed by a Moser reduction (1-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Delete odd rows and columns; keeps the even ones.
    Odd,
    /// Delete even rows and columns; keeps the odd ones.
    Even,
}

impl Parity {
    /// 0-based indices kept in an `n x n` matrix.
    pub fn kept(self, n: usize) -> Vec<usize> {
        let keep_odd = self == Parity::Even;
        (0..n).filter(|i| ((i + 1) % 2 == 1) == keep_odd).collect()
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Parity> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(Error::InvalidArgument(format!("unknown parity '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoserReduction {
    pub parity: Parity,
    /// Kept 0-based indices of `L`.
    pub kept: Vec<usize>,
    pub reduced: PolyMatrix,
    /// `B_i` for the diagonal, then `A_i` band by band, skipping zeros.
    pub var_map: Vec<(String, Poly)>,
}

impl MoserReduction {
    /// `(row, col)` positions in `reduced` of each `var_map` entry.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let d = self.reduced.dim();
        let mut out: Vec<(usize, usize)> = (0..d).map(|i| (i, i)).collect();
        for off in 1..d {
            for i in 0..d - off {
                if !self.reduced.get(i, i + off).is_zero() {
                    out.push((i, i + off));
                }
            }
        }
        out
    }

    pub fn get(&self, label: &str) -> Option<&Poly> {
        self.var_map.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    /// The reduced matrix written in the new variables, ordered as `var_map`.
    pub fn symbolic_matrix(&self) -> PolyMatrix {
        let d = self.reduced.dim();
        let nv = self.var_map.len();
        let mut m = PolyMatrix::zeros(d, nv);
        for (k, (i, j)) in self.positions().into_iter().enumerate() {
            m.set(i, j, Poly::var(nv, k));
            m.set(j, i, Poly::var(nv, k));
        }
        m
    }
}

/// Restricts `L^2` to the index class not removed by `parity`.
pub fn moser_reduce(l: &PolyMatrix, parity: Parity) -> MoserReduction {
    let sq = l.mul(l);
    let kept = parity.kept(l.dim());
    let reduced = sq.submatrix(&kept, &kept);
    let d = reduced.dim();
    let mut var_map: Vec<(String, Poly)> = (0..d).map(|i| (format!("B{}", i + 1), reduced.get(i, i).clone())).collect();
    let mut a = 0;
    for off in 1..d {
        for i in 0..d - off {
            let e = reduced.get(i, i + off);
            if !e.is_zero() {
                a += 1;
                var_map.push((format!("A{a}"), e.clone()));
            }
        }
    }
    MoserReduction { parity, kept, reduced, var_map }
}

fn product(nv: usize, vars: impl IntoIterator<Item = usize>) -> Poly {
    let v: Vec<usize> = vars.into_iter().map(|k| k - 1).collect();
    Poly::product_of(nv, &v, rat(1))
}

/// 1-based variable `a_k` in a ring of `nv` variables.
fn a(nv: usize, k: usize) -> Poly {
    Poly::var(nv, k - 1)
}

fn check_two_diagonal(m: usize, n: usize) -> Result<usize> {
    crate::laxkit::two_diagonal_phi(m, n)?;
    Ok(n + m - 1)
}

/// Extra integral obtained by Moser squaring: `m = 2` with `n` odd, or
/// `m = 3` with `n` even.
pub fn moser_extra_integral(m: usize, n: usize) -> Result<Poly> {
    let nv = check_two_diagonal(m, n)?;
    match (m, n % 2) {
        (2, 1) => {
            let head = product(nv, 2..=n - 2);
            let bracket = &(&a(nv, 1) * &a(nv, n)) + &(&a(nv, n - 1) * &a(nv, n + 1));
            Ok(&head * &bracket)
        }
        (3, 0) => {
            let head = product(nv, 2..=n - 3);
            let bracket = &(&a(nv, 1) * &a(nv, n)) + &(&a(nv, n - 2) * &a(nv, n + 1));
            let tail = product(nv, (3..=n - 1).chain([n + 2]));
            Ok(&(&head * &bracket) + &tail)
        }
        _ => Err(Error::Unimplemented { m, n }),
    }
}

/// Moser parity used for the extra integral of the two-diagonal family.
pub fn moser_parity(_m: usize, _n: usize) -> Parity {
    Parity::Odd
}

/// The cubic bracket `a1 a_{n-2} a_{n+2} + a2 a_{n-1} a_n - a_n a_{n+1} a_{n+2}`.
fn m3_bracket(nv: usize, n: usize) -> Poly {
    let t1 = product(nv, [1, n - 2, n + 2]);
    let t2 = product(nv, [2, n - 1, n]);
    let t3 = product(nv, [n, n + 1, n + 2]);
    &(&t1 + &t2) - &t3
}

/// Closed-form Casimirs of the two-diagonal family.
pub fn twodiag_casimirs(m: usize, n: usize) -> Result<Vec<(String, Poly)>> {
    let nv = check_two_diagonal(m, n)?;
    match (m, n % 2) {
        (2, 0) => {
            let left = product(nv, (3..=n.saturating_sub(3)).step_by(2).chain([n, n + 1]));
            let right = product(nv, (1..n).step_by(2));
            Ok(vec![("C".into(), (&left - &right).pow(2))])
        }
        (2, 1) => Ok(Vec::new()),
        (3, 1) => {
            let head = product(nv, [1].into_iter().chain(3..=n - 3).chain([n - 1]));
            Ok(vec![("C".into(), &head * &m3_bracket(nv, n))])
        }
        (3, 0) => {
            let c1 = product(nv, (1..n).step_by(2));
            let mut head = product(nv, (4..=n.saturating_sub(4)).step_by(2));
            if (n / 2) % 2 == 1 {
                head = -head;
            }
            Ok(vec![("C1".into(), c1), ("C2".into(), &head * &m3_bracket(nv, n))])
        }
        _ => Err(Error::Unimplemented { m, n }),
    }
}

/// Hénon map for the Kac-van Moerbeke lattice in `n` variables:
/// `A_i = -a_{2i-1} a_{2i}`, `B_i = a_{2i-1}^2 + a_{2i-2}^2`.
pub fn henon_map(n: usize) -> (Vec<Poly>, Vec<Poly>) {
    let k = n / 2 + 1;
    let sq = |j: usize| if (1..=n).contains(&j) { a(n, j).pow(2) } else { Poly::zero(n) };
    let big_a = (1..k).map(|i| -&(&a(n, 2 * i - 1) * &a(n, 2 * i))).collect();
    let big_b = (1..=k).map(|i| &sq(2 * i - 1) + &sq(2 * i - 2)).collect();
    (big_a, big_b)
}

/// Toda right-hand sides `A_i (B_{i+1} - B_i)` and `2 (A_i^2 - A_{i-1}^2)`
/// evaluated on the given `A`, `B`.
pub fn toda_field(big_a: &[Poly], big_b: &[Poly]) -> (Vec<Poly>, Vec<Poly>) {
    let nv = big_b.first().map_or(0, Poly::nvars);
    let get_a = |i: usize| if (1..=big_a.len()).contains(&i) { big_a[i - 1].clone() } else { Poly::zero(nv) };
    let da = (1..=big_a.len()).map(|i| &get_a(i) * &(&big_b[i] - &big_b[i - 1])).collect();
    let db = (1..=big_b.len()).map(|i| (&get_a(i).pow(2) - &get_a(i - 1).pow(2)).scale(&rat(2))).collect();
    (da, db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laxkit::{build_l, two_diagonal_family, two_diagonal_phi};
    use crate::rootsys::PhiSystem;
    use crate::symbolic::Vars;

    fn p(s: &str, nv: usize) -> Poly {
        Poly::parse(s, &Vars::indexed("a", nv)).unwrap()
    }

    fn l_of(rank: usize, phi: &str) -> PolyMatrix {
        build_l(&PhiSystem::parse(rank, phi).unwrap())
    }

    #[test]
    fn traces() {
        let l = l_of(3, "1,2,3,1+2,2+3");
        assert_eq!(trace_power(&l, 3).unwrap(), p("a1*a2*a4 + a2*a3*a5", 5));
        assert!(trace_power(&l, 1).unwrap().is_zero());
        assert!(trace_power(&l, 0).is_err());
        let l = l_of(3, "1,2,3,2+3,1+2+3");
        assert_eq!(trace_power(&l, 3).unwrap(), p("a1*a4*a5 + a2*a3*a4", 5));
        assert_eq!(trace_label(3), "tr(L^3)/6");
        assert_eq!(trace_label(4), "tr(L^4)/4");
    }

    #[test]
    fn chop_zero_is_char_poly() {
        let l = l_of(3, "1,2,3,1+2");
        let c = chop(&l, 0).unwrap();
        let cp = l.char_poly();
        assert_eq!(c.coeffs, cp);
        assert!(chop(&l, 2).is_err());
    }

    #[test]
    fn full_toda_chop() {
        let v = Vars::new(["f1", "f2", "f3", "g1", "g2", "h1"]);
        let e = |s: &str| Poly::parse(s, &v).unwrap();
        let rows = [["f1", "1", "0"], ["g1", "f2", "1"], ["h1", "g2", "f3"]];
        let l = PolyMatrix::from_fn(3, 6, |i, j| e(rows[i][j]));
        let c = chop(&l, 1).unwrap();
        assert_eq!(c.coeffs, vec![e("h1"), e("g1*g2 - h1*f2")]);
        let expect = RationalFn::new(e("g1*g2 - h1*f2"), e("h1")).unwrap();
        assert!(c.rationals[0].1.equivalent(&expect));
    }

    #[test]
    fn five_by_five_chop() {
        let l = l_of(4, "1,2,3,4,1+2+3");
        let c = chop(&l, 1).unwrap();
        assert!(c.coeffs[0].is_zero());
        assert_eq!(c.coeffs[1], p("a4*a5", 5));
        assert!(c.coeffs[2].is_zero());
        assert_eq!(c.coeffs[3], p("a1*a2*a3*a4 - a2^2*a4*a5", 5));
        let casimir = RationalFn::new(p("a2^2*a5 - a1*a2*a3", 5), p("a5", 5)).unwrap();
        assert!(c.rationals[0].1.equivalent(&casimir.neg()));
    }

    #[test]
    fn km_moser() {
        let l = l_of(4, "1,2,3,4");
        let r = moser_reduce(&l, Parity::Even);
        assert_eq!(r.kept, vec![0, 2, 4]);
        let names: Vec<_> = r.var_map.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["B1", "B2", "B3", "A1", "A2"]);
        let want = ["a1^2", "a2^2 + a3^2", "a4^2", "a1*a2", "a3*a4"];
        for ((_, got), w) in r.var_map.iter().zip(want) {
            assert_eq!(got, &p(w, 4));
        }
        assert!(r.reduced.get(0, 2).is_zero());
    }

    #[test]
    fn moser_partition_recovers_square() {
        let l = build_l(&two_diagonal_phi(3, 8).unwrap());
        let sq = l.mul(&l);
        let odd = moser_reduce(&l, Parity::Odd);
        let even = moser_reduce(&l, Parity::Even);
        for i in 0..8 {
            for j in 0..8 {
                let from = |r: &MoserReduction| {
                    let a = r.kept.iter().position(|&x| x == i)?;
                    let b = r.kept.iter().position(|&x| x == j)?;
                    Some(r.reduced.get(a, b).clone())
                };
                let got = from(&odd).or_else(|| from(&even));
                match got {
                    Some(e) => assert_eq!(&e, sq.get(i, j)),
                    None => assert!(sq.get(i, j).is_zero(), "({i},{j})"),
                }
            }
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(
            moser_extra_integral(3, 8).unwrap(),
            p("a1*a2*a3*a4*a5*a8 + a2*a3*a4*a5*a6*a9 + a3*a4*a5*a6*a7*a10", 10)
        );
        assert_eq!(moser_extra_integral(2, 7).unwrap(), p("a2*a3*a4*a5*(a1*a7 + a6*a8)", 8));
        assert_eq!(moser_extra_integral(2, 9).unwrap(), p("a2*a3*a4*a5*a6*a7*(a1*a9 + a10*a8)", 10));
        assert!(matches!(moser_extra_integral(3, 7), Err(Error::Unimplemented { .. })));
        let c = twodiag_casimirs(3, 8).unwrap();
        assert_eq!(c[0].1, p("a1*a3*a5*a7", 10));
        assert_eq!(c[1].1, p("a4*(a1*a6*a10 + a2*a7*a8 - a8*a9*a10)", 10));
        let c = twodiag_casimirs(3, 7).unwrap();
        assert_eq!(c[0].1, p("a1*a3*a4*a6*(a1*a5*a9 + a2*a6*a7 - a7*a8*a9)", 9));
    }

    #[test]
    fn casimirs_match_determinant() {
        for n in [4, 6, 8] {
            let det = two_diagonal_family(2, n).unwrap().l.det();
            let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(twodiag_casimirs(2, n).unwrap()[0].1.scale(&rat(sign)), det, "m=2 n={n}");
        }
        for n in [7, 9] {
            let det = two_diagonal_family(3, n).unwrap().l.det();
            assert_eq!(twodiag_casimirs(3, n).unwrap()[0].1.scale(&rat(-2)), det, "m=3 n={n}");
        }
        for n in [6, 8, 10] {
            let det = two_diagonal_family(3, n).unwrap().l.det();
            let c = twodiag_casimirs(3, n).unwrap();
            let s = (&c[0].1 + &c[1].1).pow(2);
            assert!(det == s || det == -s, "m=3 n={n}");
        }
    }

    #[test]
    fn henon_reaches_toda() {
        for n in 2..=8 {
            let pair = crate::laxkit::named_family(crate::laxkit::Family::Km, n).unwrap();
            let (big_a, big_b) = henon_map(n);
            let (da, db) = toda_field(&big_a, &big_b);
            let lie = |f: &Poly| f.gradient().iter().zip(&pair.xdot).fold(Poly::zero(n), |acc, (g, x)| &acc + &(g * x));
            for (f, want) in big_a.iter().zip(&da).chain(big_b.iter().zip(&db)) {
                assert_eq!(&lie(f), want, "n={n}");
            }
        }
    }
}
