//! Certification: exact constant-of-motion and involution checks,
//! functional independence, and an RK4 drift harness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;
use crate::poisson::{bracket_rational, random_point, PoissonMatrix};
use crate::symbolic::{fmt_rational, Poly, RatMatrix, Rational, RationalFn, Vars};

/// Relative drift tolerance for step `1e-3` over `t_end = 10`.
pub const NUMERIC_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
/// Random points tried by [`functional_independence`].
pub const INDEPENDENCE_TRIALS: usize = 10;
/// Initial data closer than this to a denominator zero is rejected.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Symbolic,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Exact residual, `"0"` on pass.
    Residual {
        poly: String,
    },
    Drift {
        max: f64,
        tolerance: f64,
    },
    Rank {
        rank: usize,
        expected: usize,
        point: Option<Vec<String>>,
    },
    Note {
        text: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub status: Status,
    pub witness: Witness,
    pub seed: Option<u64>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Symbolic check whose witness is an exact residual.
    pub fn residual(name: impl Into<String>, residual: &Poly, vars: &Vars) -> Check {
        Check {
            name: name.into(),
            kind: CheckKind::Symbolic,
            status: Status::of(residual.is_zero()),
            witness: Witness::Residual { poly: residual.fmt_with(vars) },
            seed: None,
        }
    }

    /// Symbolic check with a free-form note.
    pub fn note(name: impl Into<String>, ok: bool, text: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            kind: CheckKind::Symbolic,
            status: Status::of(ok),
            witness: Witness::Note { text: text.into() },
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub system_id: String,
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new(system_id: impl Into<String>) -> Self {
        Certificate { system_id: system_id.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn absorb(&mut self, other: Certificate) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn symbolic_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.kind == CheckKind::Symbolic).all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check_len(nvars: usize, xdot: &[Poly]) -> Result<()> {
    if nvars != xdot.len() {
        return Err(Error::VarCountMismatch { expected: xdot.len(), got: nvars });
    }
    if let Some(p) = xdot.iter().find(|p| p.nvars() != nvars) {
        return Err(Error::VarCountMismatch { expected: nvars, got: p.nvars() });
    }
    Ok(())
}

/// `sum_k dF/da_k * da_k/dt`.
pub fn lie_derivative(f: &Poly, xdot: &[Poly]) -> Result<Poly> {
    check_len(f.nvars(), xdot)?;
    let mut acc = Poly::zero(f.nvars());
    for (k, x) in xdot.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let d = f.partial(k)?;
        if !d.is_zero() {
            acc += &(&d * x);
        }
    }
    Ok(acc)
}

/// `p' q - p q'` for `F = p/q`; zero iff `F` is constant along the flow.
pub fn lie_derivative_rational(f: &RationalFn, xdot: &[Poly]) -> Result<Poly> {
    let dp = lie_derivative(f.num(), xdot)?;
    let dq = lie_derivative(f.den(), xdot)?;
    Ok(&(&dp * f.den()) - &(f.num() * &dq))
}

/// One symbolic check per integral: the Lie derivative is exactly zero.
pub fn certify_constants(set: &IntegralSet, xdot: &[Poly], vars: &Vars) -> Result<Certificate> {
    let items = set.as_rational();
    let residuals: Vec<Poly> = items
        .par_iter()
        .map(
            |(_, f)| {
                if f.den().is_constant() {
                    lie_derivative(f.num(), xdot)
                } else {
                    lie_derivative_rational(f, xdot)
                }
            },
        )
        .collect::<Result<_>>()?;
    let mut cert = Certificate::default();
    for ((label, _), r) in items.iter().zip(&residuals) {
        cert.push(Check::residual(format!("constant of motion: {label}"), r, vars));
    }
    Ok(cert)
}

/// Pairwise brackets of the integrals; pass iff every residual is zero.
pub fn check_involution(set: &IntegralSet, pi: &PoissonMatrix, vars: &Vars) -> Result<Certificate> {
    let items = set.as_rational();
    let pairs: Vec<(usize, usize)> = (0..items.len()).flat_map(|i| (i + 1..items.len()).map(move |j| (i, j))).collect();
    let residuals: Vec<Poly> =
        pairs.par_iter().map(|&(i, j)| bracket_rational(&items[i].1, &items[j].1, pi)).collect::<Result<_>>()?;
    let mut cert = Certificate::default();
    for (&(i, j), r) in pairs.iter().zip(&residuals) {
        cert.push(Check::residual(format!("involution: {{{}, {}}}", items[i].0, items[j].0), r, vars));
    }
    Ok(cert)
}

/// Gradient of `p/q` up to the nonzero factor `1/q^2`, evaluated exactly.
/// `None` when `q` vanishes at the point.
fn scaled_gradient(
    f: &RationalFn,
    grads: &(Vec<Poly>, Vec<Poly>),
    point: &[Rational],
) -> Result<Option<Vec<Rational>>> {
    let q = f.den().eval(point)?;
    if q == Rational::from_integer(0.into()) {
        return Ok(None);
    }
    let p = f.num().eval(point)?;
    let (gp, gq) = grads;
    gp.iter().zip(gq).map(|(a, b)| Ok(&q * a.eval(point)? - &p * b.eval(point)?)).collect::<Result<Vec<_>>>().map(Some)
}

/// Exact Jacobian rank at seeded random points; passes iff some point
/// reaches full rank.
pub fn functional_independence(set: &IntegralSet, trials: usize, seed: u64) -> Result<Certificate> {
    let items = set.as_rational();
    if items.is_empty() {
        return Err(Error::InvalidArgument("functional independence needs a nonempty set".into()));
    }
    let nv = items[0].1.nvars();
    let grads: Vec<(Vec<Poly>, Vec<Poly>)> =
        items.iter().map(|(_, f)| (f.num().gradient(), f.den().gradient())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (0usize, None::<Vec<Rational>>);
    for _ in 0..trials {
        let point = random_point(&mut rng, nv);
        let mut rows = Vec::with_capacity(items.len() * nv);
        let mut usable = true;
        for ((_, f), g) in items.iter().zip(&grads) {
            match scaled_gradient(f, g, &point)? {
                Some(r) => rows.extend(r),
                None => {
                    usable = false;
                    break;
                }
            }
        }
        if !usable {
            continue;
        }
        let rank = RatMatrix::from_vec(items.len(), nv, rows).rank();
        if rank > best.0 || best.1.is_none() {
            best = (rank, Some(point));
        }
        if best.0 == items.len() {
            break;
        }
    }
    let labels: Vec<&str> = items.iter().map(|(l, _)| l.as_str()).collect();
    let mut cert = Certificate::default();
    cert.push(Check {
        name: format!("functional independence: {}", labels.join(", ")),
        kind: CheckKind::Symbolic,
        status: Status::of(best.0 == items.len()),
        witness: Witness::Rank {
            rank: best.0,
            expected: items.len(),
            point: best.1.map(|p| p.iter().map(fmt_rational).collect()),
        },
        seed: Some(seed),
    });
    Ok(cert)
}

/// Coefficient and `(variable, exponent)` factors.
type CompiledTerm = (f64, Vec<(usize, i32)>);

/// Vector field compiled to flat monomial lists for fast `f64` evaluation.
#[derive(Clone, Debug)]
pub struct CompiledField {
    nvars: usize,
    terms: Vec<Vec<CompiledTerm>>,
}

impl CompiledField {
    pub fn new(xdot: &[Poly]) -> Result<Self> {
        check_len(xdot.first().map_or(0, Poly::nvars), xdot)?;
        let terms = xdot
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(m, c)| {
                        let factors = m
                            .exponents()
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(k, &e)| (k, i32::from(e)))
                            .collect();
                        (rational_to_f64(c), factors)
                    })
                    .collect()
            })
            .collect();
        Ok(CompiledField { nvars: xdot.len(), terms })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, eq) in out.iter_mut().zip(&self.terms) {
            *o = eq.iter().map(|(c, fs)| fs.iter().fold(*c, |acc, &(k, e)| acc * x[k].powi(e))).sum();
        }
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
    pub method: String,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }
}

/// Classical fixed-step RK4. A non-finite state aborts with the time at
/// which it appeared.
pub fn integrate_rk4(xdot: &[Poly], x0: &[f64], step: f64, t_end: f64) -> Result<Trajectory> {
    if !(step > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidArgument("step and t_end must be positive".into()));
    }
    let field = CompiledField::new(xdot)?;
    if x0.len() != field.nvars() {
        return Err(Error::VarCountMismatch { expected: field.nvars(), got: x0.len() });
    }
    let steps = (t_end / step).round().max(1.0) as usize;
    let n = x0.len();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(x.clone());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for s in 1..=steps {
        field.eval_into(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * step * k1[i];
        }
        field.eval_into(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * step * k2[i];
        }
        field.eval_into(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + step * k3[i];
        }
        field.eval_into(&tmp, &mut k4);
        for i in 0..n {
            x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = s as f64 * step;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, step, method: "rk4".into() })
}

/// Per integral, `max_t |F(x(t)) - F(x(0))| / max(1, |F(x(0))|)`.
pub fn drift_values(traj: &Trajectory, set: &IntegralSet) -> Result<Vec<(String, f64)>> {
    let items = set.as_rational();
    let x0 = traj.states.first().ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    for (label, f) in &items {
        if f.nvars() != x0.len() {
            return Err(Error::VarCountMismatch { expected: x0.len(), got: f.nvars() });
        }
        if !f.den().is_constant() && f.den().eval_f64(x0).abs() < DENOMINATOR_FLOOR {
            return Err(Error::InvalidArgument(format!("initial point too close to a pole of {label}")));
        }
    }
    Ok(items
        .par_iter()
        .map(|(label, f)| {
            let f0 = f.eval_f64(x0);
            let scale = f0.abs().max(1.0);
            let max = traj.states.iter().map(|x| (f.eval_f64(x) - f0).abs() / scale).fold(0.0, f64::max);
            (label.clone(), max)
        })
        .collect())
}

/// Numeric drift checks against `tolerance`.
pub fn drift_report(traj: &Trajectory, set: &IntegralSet, tolerance: f64) -> Result<Certificate> {
    let mut cert = Certificate::default();
    for (label, max) in drift_values(traj, set)? {
        cert.push(Check {
            name: format!("drift: {label} (step {}, t_end {})", traj.step, traj.times.last().copied().unwrap_or(0.0)),
            kind: CheckKind::Numeric,
            status: Status::of(max < tolerance),
            witness: Witness::Drift { max, tolerance },
            seed: None,
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat;

    fn vars(n: usize) -> Vars {
        Vars::indexed("a", n)
    }

    fn p(s: &str, n: usize) -> Poly {
        Poly::parse(s, &vars(n)).unwrap()
    }

    fn km(n: usize) -> Vec<Poly> {
        (0..n)
            .map(|i| {
                let mut e = Poly::zero(n);
                if i + 1 < n {
                    e += &Poly::product_of(n, &[i, i + 1, i + 1], rat(1));
                }
                if i > 0 {
                    e -= &Poly::product_of(n, &[i, i - 1, i - 1], rat(1));
                }
                e
            })
            .collect()
    }

    #[test]
    fn constants_along_km() {
        let xdot = km(4);
        let h = p("a1^2 + a2^2 + a3^2 + a4^2", 4);
        assert!(lie_derivative(&h, &xdot).unwrap().is_zero());
        assert!(lie_derivative(&Poly::constant(4, rat(7)), &xdot).unwrap().is_zero());
        assert!(!lie_derivative(&p("a1", 4), &xdot).unwrap().is_zero());
        assert!(lie_derivative(&h, &km(3)).is_err());
        let f = RationalFn::new(h.clone(), p("a1^2 + a2^2 + a3^2 + a4^2 + 1", 4)).unwrap();
        assert!(lie_derivative_rational(&f, &xdot).unwrap().is_zero());
    }

    #[test]
    fn dependence_is_detected() {
        let f = p("a1*a3", 4);
        let set = IntegralSet::from_polys(vec![("F".into(), f.clone()), ("F^2".into(), f.pow(2))]);
        let cert = functional_independence(&set, 5, 3).unwrap();
        assert!(!cert.passed());
        assert!(matches!(cert.checks[0].witness, Witness::Rank { rank: 1, expected: 2, .. }));
        let set = IntegralSet::from_polys(vec![("F".into(), f), ("G".into(), p("a2*a4", 4))]);
        assert!(functional_independence(&set, 5, 3).unwrap().passed());
    }

    #[test]
    fn rk4_conserves_and_detects_blowup() {
        let xdot = km(4);
        let traj = integrate_rk4(&xdot, &[1.0, 0.8, 0.6, 0.9], 1e-3, 10.0).unwrap();
        assert_eq!(traj.states.len(), 10001);
        let set = IntegralSet::from_polys(vec![("H".into(), p("a1^2 + a2^2 + a3^2 + a4^2", 4))]);
        assert!(drift_report(&traj, &set, NUMERIC_TOLERANCE).unwrap().passed());

        let still = integrate_rk4(&[Poly::zero(1)], &[2.5], 0.1, 1.0).unwrap();
        assert!(still.states.iter().all(|s| s[0] == 2.5));

        let square = vec![Poly::product_of(1, &[0, 0], rat(1))];
        match integrate_rk4(&square, &[1.0], 1e-3, 2.0) {
            Err(Error::Divergence { time }) => assert!(time > 0.9 && time < 2.0),
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(integrate_rk4(&xdot, &[1.0; 4], 0.0, 1.0).is_err());
    }

    #[test]
    fn poles_are_rejected() {
        let traj = integrate_rk4(&km(2), &[0.0, 1.0], 0.1, 0.2).unwrap();
        let mut set = IntegralSet::new();
        set.push_rational("G", RationalFn::new(p("a2", 2), p("a1", 2)).unwrap());
        assert!(drift_values(&traj, &set).is_err());
    }
}
