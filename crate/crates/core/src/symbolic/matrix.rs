//! Square matrices with polynomial entries.

use std::collections::HashMap;

use num_traits::Zero;

use super::linalg::RatMatrix;
use super::poly::{Poly, Rational, Vars};
use crate::error::{Error, Result};

/// A `dim x dim` matrix of [`Poly`] entries sharing one variable count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    dim: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(dim: usize, nvars: usize) -> Self {
        PolyMatrix { dim, nvars, entries: vec![Poly::zero(nvars); dim * dim] }
    }

    pub fn identity(dim: usize, nvars: usize) -> Self {
        let mut m = Self::zeros(dim, nvars);
        for i in 0..dim {
            m.set(i, i, Poly::one(nvars));
        }
        m
    }

    pub fn from_fn(dim: usize, nvars: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let p = f(i, j);
                assert_eq!(p.nvars(), nvars);
                entries.push(p);
            }
        }
        PolyMatrix { dim, nvars, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.dim + j] = p;
    }

    pub fn add_to(&mut self, i: usize, j: usize, p: &Poly) {
        self.entries[i * self.dim + j] += p;
    }

    /// Entries in row-major order.
    pub fn entries_iter(&self) -> impl Iterator<Item = &Poly> {
        self.entries.iter()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_skew(&self) -> bool {
        (0..self.dim).all(|i| self.get(i, i).is_zero() && (i + 1..self.dim).all(|j| *self.get(i, j) == -self.get(j, i)))
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.dim, self.nvars, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> Poly {
        let mut t = Poly::zero(self.nvars);
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }

    /// Number of nonzero entries in row `i`.
    pub fn row_support(&self, i: usize) -> usize {
        (0..self.dim).filter(|&j| !self.get(i, j).is_zero()).count()
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.nvars, other.nvars);
        let n = self.dim;
        let mut out = PolyMatrix::zeros(n, self.nvars);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out.entries[i * n + j] += &(a * b);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        PolyMatrix::from_fn(self.dim, self.nvars, |i, j| self.get(i, j) - other.get(i, j))
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &PolyMatrix) -> PolyMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn pow(&self, k: u32) -> PolyMatrix {
        let mut acc = PolyMatrix::identity(self.dim, self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Submatrix on the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        assert_eq!(rows.len(), cols.len(), "submatrix must be square");
        PolyMatrix::from_fn(rows.len(), self.nvars, |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// The same matrix viewed in a ring with more variables.
    pub fn extend_vars(&self, nvars: usize) -> PolyMatrix {
        PolyMatrix { dim: self.dim, nvars, entries: self.entries.iter().map(|p| p.extend_vars(nvars)).collect() }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<RatMatrix> {
        let mut vals = Vec::with_capacity(self.entries.len());
        for p in &self.entries {
            vals.push(p.eval(point)?);
        }
        Ok(RatMatrix::from_vec(self.dim, self.dim, vals))
    }

    /// Exact determinant by Laplace expansion with memoization on the set of
    /// consumed columns. Rows are expanded sparsest first.
    pub fn det(&self) -> Poly {
        let n = self.dim;
        if n == 0 {
            return Poly::one(self.nvars);
        }
        assert!(n <= 63, "determinant supports at most 63 rows");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (self.row_support(i), i));
        let perm_sign = permutation_sign(&order);
        let mut memo: HashMap<u64, Poly> = HashMap::new();
        let d = self.det_rec(&order, 0, 0, &mut memo);
        if perm_sign < 0 {
            -d
        } else {
            d
        }
    }

    fn det_rec(&self, order: &[usize], depth: usize, used: u64, memo: &mut HashMap<u64, Poly>) -> Poly {
        let n = self.dim;
        if depth == n {
            return Poly::one(self.nvars);
        }
        if let Some(p) = memo.get(&used) {
            return p.clone();
        }
        let row = order[depth];
        let mut acc = Poly::zero(self.nvars);
        let mut position = 0usize;
        for col in 0..n {
            if used & (1 << col) != 0 {
                continue;
            }
            let entry = self.get(row, col);
            if !entry.is_zero() {
                let minor = self.det_rec(order, depth + 1, used | (1 << col), memo);
                if !minor.is_zero() {
                    let term = entry * &minor;
                    if position.is_multiple_of(2) {
                        acc += &term;
                    } else {
                        acc -= &term;
                    }
                }
            }
            position += 1;
        }
        memo.insert(used, acc.clone());
        acc
    }

    /// Coefficients of `det(lambda*I - self)` in `lambda`, highest degree
    /// first. Computed by adjoining `lambda` as an extra variable.
    pub fn char_poly(&self) -> Vec<Poly> {
        let n = self.dim;
        let lam = self.nvars;
        let ext = self.nvars + 1;
        let m = PolyMatrix::from_fn(n, ext, |i, j| {
            let e = -self.get(i, j).extend_vars(ext);
            if i == j {
                &e + &Poly::var(ext, lam)
            } else {
                e
            }
        });
        lambda_coefficients(&m.det(), lam, n)
    }

    /// Text rows using the given names.
    pub fn fmt_rows(&self, vars: &Vars) -> Vec<Vec<String>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j).fmt_with(vars)).collect()).collect()
    }

    pub fn parse_rows(rows: &[Vec<String>], vars: &Vars) -> Result<PolyMatrix> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix rows must form a square".into()));
        }
        let mut m = PolyMatrix::zeros(dim, vars.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, s) in r.iter().enumerate() {
                m.set(i, j, Poly::parse(s, vars)?);
            }
        }
        Ok(m)
    }
}

/// Splits a polynomial in the ring with an extra trailing variable `lam`
/// into coefficients of `lam^degree, ..., lam^0`, each in the base ring.
pub(crate) fn lambda_coefficients(p: &Poly, lam: usize, degree: usize) -> Vec<Poly> {
    let parts = p.coefficients_in(lam);
    assert!(parts.len() <= degree + 1, "unexpected lambda degree");
    (0..=degree).rev().map(|d| parts.get(d).map_or_else(|| Poly::zero(lam), |c| c.truncate_vars(lam))).collect()
}

fn permutation_sign(p: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Dense exact determinant of an evaluated matrix, used as an oracle.
pub fn det_rational(m: &RatMatrix) -> Rational {
    let mut a = m.clone();
    let n = a.rows();
    let mut det = Rational::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a.get(r, c).is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap_rows(p, c);
            det = -det;
        }
        let piv = a.get(c, c).clone();
        det *= &piv;
        for r in c + 1..n {
            let f = a.get(r, c) / &piv;
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let v = a.get(r, k) - &(&f * a.get(c, k));
                a.set(r, k, v);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rat;

    fn v(n: usize, k: usize) -> Poly {
        Poly::var(n, k)
    }

    #[test]
    fn identity_det() {
        assert_eq!(PolyMatrix::identity(3, 2).det(), Poly::one(2));
    }

    #[test]
    fn zero_char_poly() {
        let cp = PolyMatrix::zeros(2, 1).char_poly();
        assert_eq!(cp, vec![Poly::one(1), Poly::zero(1), Poly::zero(1)]);
    }

    #[test]
    fn km_char_poly_rank_three() {
        // hollow tridiagonal 3x3 with a1, a2
        let n = 2;
        let mut l = PolyMatrix::zeros(3, n);
        for (k, (i, j)) in [(0, 1), (1, 2)].into_iter().enumerate() {
            l.set(i, j, v(n, k));
            l.set(j, i, v(n, k));
        }
        let cp = l.char_poly();
        let s = &(&v(n, 0) * &v(n, 0)) + &(&v(n, 1) * &v(n, 1));
        assert_eq!(cp, vec![Poly::one(n), Poly::zero(n), -s, Poly::zero(n)]);
    }

    #[test]
    fn det_matches_numeric_on_small_case() {
        let n = 2;
        let m =
            PolyMatrix::from_fn(3, n, |i, j| Poly::constant(n, rat((i * 3 + j) as i64 % 5 - 2)) + v(n, (i + j) % 2));
        let pt = vec![rat(3), rat(-2)];
        assert_eq!(m.det().eval(&pt).unwrap(), det_rational(&m.eval(&pt).unwrap()));
    }
}
