use crate::symbolic::{rat, Poly, Rational};

use super::LaxPair;

/// Lotka-Volterra form of a cubic system: with `x_i = 2 a_i^2` the flow
/// becomes `dx_i/dt = x_i * sum_j A_ij x_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LvReduction {
    pub matrix: Vec<Vec<i64>>,
    /// The constant in `x_i = scale * a_i^2`.
    pub scale: Rational,
}

impl LvReduction {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// Right-hand sides as polynomials in `x_1..x_m`.
    pub fn x_equations(&self) -> Vec<Poly> {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut p = Poly::zero(m);
                for (j, &c) in self.matrix[i].iter().enumerate() {
                    if c != 0 {
                        p += &Poly::product_of(m, &[i, j], rat(c));
                    }
                }
                p
            })
            .collect()
    }

    /// `x_i = scale * a_i^2` as polynomials in the `a` variables.
    pub fn substitution(&self) -> Vec<Poly> {
        let m = self.dim();
        (0..m).map(|i| Poly::product_of(m, &[i, i], self.scale.clone())).collect()
    }
}

/// Present iff every `da_k/dt` is `a_k` times a quadratic form in the
/// squares `a_j^2` with `j != k`, and the resulting matrix is skew.
pub fn detect_lv(pair: &LaxPair) -> Option<LvReduction> {
    let m = pair.var_count();
    let mut matrix = vec![vec![0i64; m]; m];
    for (k, f) in pair.xdot.iter().enumerate() {
        for (mono, c) in f.terms() {
            if mono.degree() != 3 || mono.exponent(k) != 1 || !c.is_integer() {
                return None;
            }
            let others = mono.factors().into_iter().filter(|&v| v != k).collect::<Vec<_>>();
            let [j, j2] = others[..] else {
                return None;
            };
            if j != j2 {
                return None;
            }
            matrix[k][j] = i64::try_from(c.to_integer()).ok()?;
        }
    }
    let skew = (0..m).all(|i| (0..m).all(|j| matrix[i][j] == -matrix[j][i]));
    skew.then(|| LvReduction { matrix, scale: rat(2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laxkit::search_signs;
    use crate::rootsys::PhiSystem;

    #[test]
    fn km_is_tridiagonal() {
        let pair = search_signs(&PhiSystem::parse(4, "1,2,3,4").unwrap()).unwrap().unwrap();
        let lv = detect_lv(&pair).unwrap();
        assert_eq!(lv.matrix, vec![vec![0, 1, 0, 0], vec![-1, 0, 1, 0], vec![0, -1, 0, 1], vec![0, 0, -1, 0]]);
    }

    #[test]
    fn substitution_recovers_the_cubic_field() {
        // 4 a_k da_k/dt = x_k sum_j A_kj x_j after x = 2a^2
        let pair = search_signs(&PhiSystem::parse(3, "1,2,3,1+2").unwrap()).unwrap().unwrap();
        let lv = detect_lv(&pair).unwrap();
        let sub = lv.substitution();
        for (k, eq) in lv.x_equations().iter().enumerate() {
            let lhs = &Poly::product_of(4, &[k], rat(4)) * &pair.xdot[k];
            assert_eq!(eq.substitute(&sub), lhs);
        }
    }
}
