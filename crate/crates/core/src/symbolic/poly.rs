//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Poly`] stores only nonzero coefficients, keyed by exponent vector, so
//! structural equality is mathematical equality. Every polynomial carries its
//! variable count; mixing counts is a programming error and panics in the
//! operator impls (the `checked_*` methods return an error instead).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num/den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(SmallVec<[u16; 16]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[k] = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exponent(&self, k: usize) -> u16 {
        self.0[k]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for (o, &d) in out.iter_mut().zip(&other.0) {
            *o = o.checked_sub(d)?;
        }
        Some(Monomial(out))
    }

    /// Variables with nonzero exponent, each repeated by its exponent.
    pub fn factors(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.degree() as usize);
        for (k, &e) in self.0.iter().enumerate() {
            for _ in 0..e {
                v.push(k);
            }
        }
        v
    }

    /// Graded-lexicographic comparison: higher total degree first, then
    /// larger exponent of the earliest variable first.
    pub fn grlex_desc(&self, other: &Monomial) -> std::cmp::Ordering {
        other.degree().cmp(&self.degree()).then_with(|| other.0.cmp(&self.0))
    }

    fn with_nvars(&self, nvars: usize) -> Monomial {
        let mut v = self.0.clone();
        v.resize(nvars, 0);
        Monomial(v)
    }
}

/// Names for the variables of a polynomial ring, used for printing and
/// parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vars {
    names: Vec<String>,
}

impl Vars {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Vars { names: names.into_iter().map(Into::into).collect() }
    }

    /// `prefix1, prefix2, ..., prefix{count}`.
    pub fn indexed(prefix: &str, count: usize) -> Self {
        Vars { names: (1..=count).map(|i| format!("{prefix}{i}")).collect() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, k: usize) -> &str {
        &self.names[k]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn with_extra(&self, name: &str) -> Vars {
        let mut names = self.names.clone();
        names.push(name.to_string());
        Vars { names }
    }
}

/// Product skipping the gcd step when both factors are integers.
fn mul_rational(a: &Rational, b: &Rational) -> Rational {
    if a.is_integer() && b.is_integer() {
        Rational::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

fn add_rational(acc: &mut Rational, c: Rational) {
    if acc.is_integer() && c.is_integer() {
        *acc = Rational::from_integer(acc.numer() + c.numer());
    } else {
        *acc += c;
    }
}

/// A polynomial in a fixed number of variables with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    /// The coordinate function of variable `k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        assert!(k < nvars, "variable {k} out of range for {nvars} variables");
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, k), Rational::one());
        p
    }

    pub fn monomial(mono: Monomial, coeff: Rational) -> Self {
        let mut p = Self::zero(mono.nvars());
        if !coeff.is_zero() {
            p.terms.insert(mono, coeff);
        }
        p
    }

    /// Product of the listed variables (with repetition) times `coeff`.
    pub fn product_of(nvars: usize, vars: &[usize], coeff: Rational) -> Self {
        let mut m = Monomial::one(nvars);
        for &k in vars {
            m.0[k] += 1;
        }
        Self::monomial(m, coeff)
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.nvars))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Terms in graded-lexicographic (display) order.
    pub fn terms_grlex(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.grlex_desc(b.0));
        v
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys().map(Monomial::degree);
        match it.next() {
            None => true,
            Some(d) => it.all(|e| e == d),
        }
    }

    /// Leading term in graded-lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().min_by(|a, b| a.0.grlex_desc(b.0))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch { expected: self.nvars, got: other.nvars });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative with respect to variable `k`.
    pub fn partial(&self, k: usize) -> Result<Poly> {
        if k >= self.nvars {
            return Err(Error::VarOutOfRange { index: k, nvars: self.nvars });
        }
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[k];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[k] -= 1;
            out.terms.insert(dm, c * rat(e as i64));
        }
        Ok(out)
    }

    /// All first partials.
    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.nvars).map(|k| self.partial(k).expect("index in range")).collect()
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::VarCountMismatch { expected: self.nvars, got: point.len() });
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (k, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(point[k].clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (k, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        t *= point[k].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Replace every variable `k` by `images[k]`; all images share one
    /// variable count, which becomes the variable count of the result.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let target = images.first().map_or(0, Poly::nvars);
        let mut powers: HashMap<(usize, u16), Poly> = HashMap::new();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (k, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers.entry((k, e)).or_insert_with(|| images[k].pow(e as u32));
                t = &t * &*p;
            }
            out += &t;
        }
        out
    }

    /// Embed into a ring with more variables (new variables appended).
    pub fn extend_vars(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        Poly { nvars, terms: self.terms.iter().map(|(m, c)| (m.with_nvars(nvars), c.clone())).collect() }
    }

    /// Drop trailing variables that do not occur in any term.
    pub fn truncate_vars(&self, nvars: usize) -> Poly {
        assert!(self.terms.keys().all(|m| m.0[nvars..].iter().all(|&e| e == 0)), "truncated variables must not occur");
        Poly { nvars, terms: self.terms.iter().map(|(m, c)| (m.with_nvars(nvars), c.clone())).collect() }
    }

    /// Split into coefficients of powers of variable `k`: entry `d` is the
    /// coefficient of `x_k^d` (with `x_k` removed).
    pub fn coefficients_in(&self, k: usize) -> Vec<Poly> {
        let maxd = self.terms.keys().map(|m| m.0[k]).max().unwrap_or(0) as usize;
        let mut out = vec![Poly::zero(self.nvars); maxd + 1];
        for (m, c) in &self.terms {
            let d = m.0[k] as usize;
            let mut mm = m.clone();
            mm.0[k] = 0;
            out[d].add_term(mm, c.clone());
        }
        out
    }

    /// Does variable `k` divide every term?
    pub fn divisible_by_var(&self, k: usize) -> bool {
        self.terms.keys().all(|m| m.0[k] > 0)
    }

    /// Exact quotient by a monomial, if it divides every term.
    pub fn div_monomial(&self, d: &Monomial) -> Option<Poly> {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.terms.insert(m.div(d)?, c.clone());
        }
        Some(out)
    }

    /// Variables that occur in some term.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&k| self.terms.keys().any(|m| m.0[k] > 0)).collect()
    }

    /// Canonical text using the given variable names.
    pub fn fmt_with(&self, vars: &Vars) -> String {
        assert!(vars.len() >= self.nvars, "not enough variable names");
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms_grlex().into_iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let mono = fmt_monomial(m, vars);
            if mono.is_empty() {
                s.push_str(&fmt_rational(&a));
            } else {
                if !a.is_one() {
                    s.push_str(&fmt_rational(&a));
                    s.push('*');
                }
                s.push_str(&mono);
            }
        }
        s
    }

    pub fn parse(text: &str, vars: &Vars) -> Result<Poly> {
        super::parse::parse_poly(text, vars)
    }
}

fn fmt_monomial(m: &Monomial, vars: &Vars) -> String {
    let mut parts = Vec::new();
    for (k, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(vars.name(k).to_string()),
            _ => parts.push(format!("{}^{}", vars.name(k), e)),
        }
    }
    parts.join("*")
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&Vars::indexed("a", self.nvars)))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.nvars);
        }
        let mut acc: HashMap<Monomial, Rational> = HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let c = mul_rational(ca, cb);
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        add_rational(e.get_mut(), c);
                    }
                }
            }
        }
        Poly { nvars: self.nvars, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Mul<&Rational> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Rational) -> Poly {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(k: usize, n: usize) -> Poly {
        Poly::var(n, k - 1)
    }

    #[test]
    fn products_and_cancellation() {
        let n = 3;
        let p = &(&a(1, n) * &a(2, n)) * &(&a(2, n) * &a(3, n));
        assert_eq!(p, Poly::product_of(n, &[0, 1, 1, 2], rat(1)));
        let q = &a(1, n) + &a(2, n);
        assert!((&q + &-&q).is_zero());
        let sq = &q * &q;
        let expect = Poly::product_of(n, &[0, 0], rat(1))
            + Poly::product_of(n, &[0, 1], rat(2))
            + Poly::product_of(n, &[1, 1], rat(1));
        assert_eq!(sq, expect);
    }

    #[test]
    fn partial_derivatives() {
        let n = 5;
        let p = Poly::product_of(n, &[0, 0, 1], rat(1));
        assert_eq!(p.partial(0).unwrap(), Poly::product_of(n, &[0, 1], rat(2)));
        assert!(a(3, n).partial(0).unwrap().is_zero());
        let f = Poly::product_of(n, &[0, 1, 3], rat(1)) + Poly::product_of(n, &[1, 2, 4], rat(1));
        let expect = Poly::product_of(n, &[0, 3], rat(1)) + Poly::product_of(n, &[2, 4], rat(1));
        assert_eq!(f.partial(1).unwrap(), expect);
        assert!(matches!(f.partial(7), Err(Error::VarOutOfRange { .. })));
    }

    #[test]
    fn evaluation() {
        let p = Poly::product_of(4, &[0, 2], rat(1));
        assert_eq!(p.eval(&[rat(2), rat(5), rat(7), rat(1)]).unwrap(), rat(14));
        assert_eq!(Poly::zero(2).eval(&[rat(3), rat(4)]).unwrap(), rat(0));
        assert!(p.eval(&[rat(1)]).is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        let e = Poly::one(2).checked_add(&Poly::one(3)).unwrap_err();
        assert_eq!(e, Error::VarCountMismatch { expected: 2, got: 3 });
    }

    #[test]
    fn canonical_text() {
        let n = 5;
        let f = Poly::product_of(n, &[1, 2, 4], rat(1)) + Poly::product_of(n, &[0, 1, 3], rat(1));
        assert_eq!(f.to_string(), "a1*a2*a4 + a2*a3*a5");
        let g =
            Poly::product_of(n, &[0, 0], ratio(1, 2)) - Poly::product_of(n, &[1], rat(3)) + Poly::constant(n, rat(-2));
        assert_eq!(g.to_string(), "1/2*a1^2 - 3*a2 - 2");
        assert_eq!((-Poly::var(n, 0)).to_string(), "-a1");
    }

    #[test]
    fn substitution() {
        // x1 -> 2 a1^2, x2 -> 2 a2^2 applied to x1*x2
        let x = Poly::product_of(2, &[0, 1], rat(1));
        let imgs = vec![Poly::product_of(2, &[0, 0], rat(2)), Poly::product_of(2, &[1, 1], rat(2))];
        assert_eq!(x.substitute(&imgs), Poly::product_of(2, &[0, 0, 1, 1], rat(4)));
    }
}
