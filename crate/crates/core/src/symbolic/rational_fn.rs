use std::fmt;

use super::poly::{Poly, Rational, Vars};
use crate::error::{Error, Result};

/// A quotient of two polynomials. Never reduced: zero tests go through
/// cross-multiplication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.nvars() != den.nvars() {
            return Err(Error::VarCountMismatch { expected: num.nvars(), got: den.nvars() });
        }
        Ok(RationalFn { num, den })
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        RationalFn { num: p, den: Poly::one(n) }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    /// Mathematical equality via `p/q = r/s  <=>  p*s = r*q`.
    pub fn equivalent(&self, other: &RationalFn) -> bool {
        (&self.num * &other.den) == (&other.num * &self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn neg(&self) -> RationalFn {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        RationalFn { num: &(&self.num * &other.den) + &(&other.num * &self.den), den: &self.den * &other.den }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        let d = self.den.eval(point)?;
        if num_traits::Zero::is_zero(&d) {
            return Err(Error::ZeroDenominator);
        }
        Ok(self.num.eval(point)? / d)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    pub fn fmt_with(&self, vars: &Vars) -> String {
        if self.den.is_constant() && self.den.constant_term() == Rational::from_integer(1.into()) {
            return self.num.fmt_with(vars);
        }
        format!("({})/({})", self.num.fmt_with(vars), self.den.fmt_with(vars))
    }

    /// Parses either a plain polynomial or `(num)/(den)`.
    pub fn parse(text: &str, vars: &Vars) -> Result<RationalFn> {
        let t = text.trim();
        if let Some(split) = split_quotient(t) {
            let (n, d) = split;
            return RationalFn::new(Poly::parse(n, vars)?, Poly::parse(d, vars)?);
        }
        Ok(RationalFn::from_poly(Poly::parse(t, vars)?))
    }
}

/// Splits `(A)/(B)` at the top-level `)/(`.
fn split_quotient(t: &str) -> Option<(&str, &str)> {
    if !t.starts_with('(') || !t.ends_with(')') {
        return None;
    }
    let bytes = t.as_bytes();
    let mut depth = 0i32;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    let rest = &t[i + 1..];
                    let rest = rest.trim_start();
                    if let Some(r) = rest.strip_prefix('/') {
                        let r = r.trim();
                        if r.starts_with('(') && r.ends_with(')') {
                            return Some((&t[1..i], &r[1..r.len() - 1]));
                        }
                    }
                    return None;
                }
            }
            _ => {}
        }
    }
    None
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&Vars::indexed("a", self.nvars())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rat;

    #[test]
    fn cross_multiplied_equality() {
        let n = 2;
        let x = Poly::var(n, 0);
        let y = Poly::var(n, 1);
        let f = RationalFn::new(&x * &y, &y * &y).unwrap();
        let g = RationalFn::new(x.clone(), y.clone()).unwrap();
        assert!(f.equivalent(&g));
        assert!(RationalFn::new(x, Poly::zero(n)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let v = Vars::indexed("a", 5);
        let f = RationalFn::parse("(a1*a2*a3 - a2^2*a5)/(a5)", &v).unwrap();
        assert_eq!(f.fmt_with(&v), "(a1*a2*a3 - a2^2*a5)/(a5)");
        assert_eq!(RationalFn::parse(&f.fmt_with(&v), &v).unwrap(), f);
        let g = RationalFn::parse("a1 + 1", &v).unwrap();
        assert_eq!(g.den(), &Poly::one(5));
        assert_eq!(g.eval(&[rat(2), rat(0), rat(0), rat(0), rat(0)]).unwrap(), rat(3));
    }
}
