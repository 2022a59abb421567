//! Versioned JSON reports and the pipelines that produce and re-check them.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{
    chop, moser_extra_integral, moser_parity, moser_reduce, normalize_sign, trace_integrals, trace_label,
    twodiag_casimirs, IntegralSet, Parity,
};
use crate::laxkit::{
    detect_lv, named_family, search_signs_with, two_diagonal_family, Family, LaxPair, LvPolicy, LvReduction,
    SearchOptions, CONVENTION,
};
use crate::poisson::{
    derive_a_poisson, generic_rank, jacobi_violation, lv_poisson, monomial_casimirs, two_diagonal_poisson,
    PoissonMatrix,
};
use crate::rootsys::{enumerate_phi, PhiSystem};
use crate::symbolic::{rat, ratio, Poly, PolyMatrix, RationalFn, Vars};
use crate::verify::{
    certify_constants, check_involution, drift_report, functional_independence, integrate_rk4, lie_derivative,
    Certificate, Check, Witness, DEFAULT_STEP, DEFAULT_T_END, DENOMINATOR_FLOOR, INDEPENDENCE_TRIALS,
    NUMERIC_TOLERANCE,
};

pub const SCHEMA: u32 = 1;
pub const DEFAULT_SEED: u64 = 1;
/// Largest rank accepted by [`enumerate`] unless raised.
pub const DEFAULT_RANK_CAP: usize = 6;
/// Chopped determinants are computed only up to this matrix size.
pub const MAX_CHOP_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub seed: u64,
    pub numeric: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: DEFAULT_SEED, numeric: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub rank: usize,
    pub phi: String,
    pub convention: String,
    pub seed: u64,
    pub source: String,
    pub variables: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaxSection {
    #[serde(rename = "L")]
    pub l: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    pub signs: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSection {
    pub a_form: Vec<String>,
    /// Right-hand sides in `x_i = 2 a_i^2` when the system is Lotka-Volterra.
    pub x_form: Option<Vec<String>>,
    pub lv_matrix: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSection {
    pub matrix: Vec<Vec<String>>,
    pub hamiltonian: String,
    pub jacobi: bool,
    pub rank: usize,
    pub rank_seed: u64,
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub k: u32,
    pub normalization: String,
    pub poly: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalEntry {
    pub r: usize,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChopEntry {
    pub k: usize,
    pub coeffs: Vec<String>,
    pub rationals: Vec<RationalEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedExpr {
    pub label: String,
    pub expr: String,
    /// `a` or `x`.
    pub variables: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoserEntry {
    pub parity: Parity,
    pub matrix: Vec<Vec<String>>,
    pub var_map: Vec<NamedExpr>,
    pub extra_integral: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegralsSection {
    pub traces: Vec<TraceEntry>,
    pub det: Option<String>,
    pub chops: Vec<ChopEntry>,
    pub moser: Option<MoserEntry>,
    pub casimirs: Vec<NamedExpr>,
    /// Jacobian rank of the `a`-variable integrals at the best random point.
    pub independent_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub schema: u32,
    pub metadata: Metadata,
    pub lax: LaxSection,
    pub odes: OdeSection,
    pub poisson: Option<PoissonSection>,
    pub integrals: IntegralsSection,
    pub certificates: Certificate,
}

fn a_vars(n: usize) -> Vars {
    Vars::indexed("a", n)
}

fn x_vars(n: usize) -> Vars {
    Vars::indexed("x", n)
}

fn half_sum_of_squares(n: usize) -> Poly {
    (0..n).fold(Poly::zero(n), |acc, k| &acc + &Poly::product_of(n, &[k, k], ratio(1, 2)))
}

/// Closed-form material attached by the family constructors.
#[derive(Default)]
struct Extras {
    casimirs: Vec<(String, Poly)>,
    moser: Option<(Parity, Poly)>,
    notes: Vec<String>,
}

/// Root subset given as text: Lax pair by sign search, preferring a
/// Lotka-Volterra sign choice.
pub fn build(rank: usize, phi_text: &str, opts: Options) -> Result<SystemReport> {
    let phi = PhiSystem::parse(rank, phi_text)?;
    let search = SearchOptions { lv: LvPolicy::Prefer, ..SearchOptions::default() };
    let pair = search_signs_with(&phi, &search)?.ok_or_else(|| Error::NoLaxPair(phi.to_text()))?;
    let poisson = derive_a_poisson(&pair, opts.seed)?;
    assemble(format!("build --rank {rank} --phi {}", phi.to_text()), pair, poisson, "derived", Extras::default(), opts)
}

pub fn family(f: Family, rank: usize, opts: Options) -> Result<SystemReport> {
    let pair = named_family(f, rank)?;
    let poisson = derive_a_poisson(&pair, opts.seed)?;
    assemble(format!("family --case {f} --rank {rank}"), pair, poisson, "derived", Extras::default(), opts)
}

pub fn twodiag(m: usize, n: usize, opts: Options) -> Result<SystemReport> {
    let pair = two_diagonal_family(m, n)?;
    let poisson = two_diagonal_poisson(m, n, opts.seed)?;
    let mut extras = Extras::default();
    match twodiag_casimirs(m, n) {
        Ok(c) => extras.casimirs = c,
        Err(Error::Unimplemented { .. }) => {}
        Err(e) => return Err(e),
    }
    match moser_extra_integral(m, n) {
        Ok(f) => extras.moser = Some((moser_parity(m, n), f)),
        Err(Error::Unimplemented { .. }) => {}
        Err(e) => return Err(e),
    }
    if m == 1 {
        let same = Family::PeriodicKm.phi(n - 1).map(|p| p == pair.phi).unwrap_or(false);
        extras.notes.push(format!(
            "m = 1 gives the periodic Kac-van Moerbeke lattice: root subset equal to pkm at rank {}: {same}",
            n - 1
        ));
    }
    extras.notes.push("instance check only; the family statement for all n is not certified".into());
    assemble(format!("twodiag --m {m} --n {n}"), pair, Some(poisson), "closed form", extras, opts)
}

fn assemble(
    source: String,
    pair: LaxPair,
    poisson: Option<PoissonMatrix>,
    origin: &str,
    extras: Extras,
    opts: Options,
) -> Result<SystemReport> {
    let nv = pair.var_count();
    let av = a_vars(nv);
    let xv = x_vars(nv);
    let mut notes = extras.notes;
    let lv = detect_lv(&pair);
    let odes = OdeSection {
        a_form: pair.xdot.iter().map(|p| p.fmt_with(&av)).collect(),
        x_form: lv.as_ref().map(|r| r.x_equations().iter().map(|p| p.fmt_with(&xv)).collect()),
        lv_matrix: lv.as_ref().map(|r| r.matrix.clone()),
    };
    let constant = |f: &RationalFn| -> Result<bool> {
        let r = if f.den().is_constant() {
            lie_derivative(f.num(), &pair.xdot)?
        } else {
            crate::verify::lie_derivative_rational(f, &pair.xdot)?
        };
        Ok(r.is_zero())
    };

    let mut integrals = IntegralsSection::default();
    let dim = pair.l.dim();
    for (k, t) in trace_integrals(&pair.l, dim as u32) {
        integrals.traces.push(TraceEntry { k, normalization: trace_label(k), poly: t.fmt_with(&av) });
    }
    let det = pair.l.det();
    if !det.is_zero() {
        integrals.det = Some(det.fmt_with(&av));
    }
    if dim <= MAX_CHOP_DIM {
        let chops: Vec<_> = (1..=(dim - 1) / 2).into_par_iter().map(|k| chop(&pair.l, k)).collect::<Result<_>>()?;
        for c in chops {
            let mut rationals = Vec::new();
            for (r, f) in c.rationals {
                if constant(&f)? {
                    rationals.push(RationalEntry { r, expr: normalize_sign(f).fmt_with(&av) });
                }
            }
            integrals.chops.push(ChopEntry {
                k: c.k,
                coeffs: c.coeffs.iter().map(|p| p.fmt_with(&av)).collect(),
                rationals,
            });
        }
    }
    for (label, c) in extras.casimirs {
        if constant(&RationalFn::from_poly(c.clone()))? {
            integrals.casimirs.push(NamedExpr { label, expr: c.fmt_with(&av), variables: "a".into() });
        } else {
            notes.push(format!("{label} omitted: not a constant of motion"));
        }
    }
    if let Some(lv) = &lv {
        for (i, c) in monomial_casimirs(&lv.matrix)?.iter().enumerate() {
            let f = c.to_rational_fn();
            integrals.casimirs.push(NamedExpr {
                label: format!("K{}", i + 1),
                expr: f.fmt_with(&xv),
                variables: "x".into(),
            });
        }
    }
    if let Some((parity, extra)) = extras.moser {
        let red = moser_reduce(&pair.l, parity);
        let ok = constant(&RationalFn::from_poly(extra.clone()))?;
        if !ok {
            notes.push("Moser extra integral omitted: not a constant of motion".into());
        }
        integrals.moser = Some(MoserEntry {
            parity,
            matrix: red.reduced.fmt_rows(&av),
            var_map: red
                .var_map
                .iter()
                .map(|(l, p)| NamedExpr { label: l.clone(), expr: p.fmt_with(&av), variables: "a".into() })
                .collect(),
            extra_integral: ok.then(|| extra.fmt_with(&av)),
        });
    }

    let poisson_section = poisson.as_ref().map(|p| PoissonSection {
        matrix: p.pi.fmt_rows(&av),
        hamiltonian: half_sum_of_squares(nv).fmt_with(&av),
        jacobi: p.jacobi_certified,
        rank: p.generic_rank,
        rank_seed: p.rank_seed,
        origin: origin.into(),
    });
    if poisson.is_none() {
        notes.push("no quadratic Poisson matrix with coefficients in {0, 1, -1, 2, -2} found".into());
    }

    let mut report = SystemReport {
        schema: SCHEMA,
        metadata: Metadata {
            rank: pair.phi.rank(),
            phi: pair.phi.to_text(),
            convention: CONVENTION.into(),
            seed: opts.seed,
            source,
            variables: (0..nv).map(|k| av.name(k).to_string()).collect(),
            notes,
        },
        lax: LaxSection { l: pair.l.fmt_rows(&av), b: pair.b.fmt_rows(&av), signs: pair.signs.clone() },
        odes,
        poisson: poisson_section,
        integrals,
        certificates: Certificate::default(),
    };
    let a_set = a_integrals(&report)?;
    if !a_set.is_empty() {
        let cert = functional_independence(&a_set, INDEPENDENCE_TRIALS, opts.seed)?;
        if let Some(Check { witness: Witness::Rank { rank, .. }, .. }) = cert.checks.first() {
            report.integrals.independent_rank = Some(*rank);
        }
    }
    report.certificates = verify_report(&report, opts)?;
    Ok(report)
}

/// Integrals in the `a` variables listed by a report, in report order.
pub fn a_integrals(report: &SystemReport) -> Result<IntegralSet> {
    let av = a_vars(report.metadata.variables.len());
    let mut set = IntegralSet::new();
    let ints = &report.integrals;
    for t in &ints.traces {
        set.push(t.normalization.clone(), Poly::parse(&t.poly, &av)?);
    }
    if let Some(d) = &ints.det {
        set.push("det L", Poly::parse(d, &av)?);
    }
    for c in ints.casimirs.iter().filter(|c| c.variables == "a") {
        set.push(c.label.clone(), Poly::parse(&c.expr, &av)?);
    }
    if let Some(f) = ints.moser.as_ref().and_then(|m| m.extra_integral.as_ref()) {
        set.push("Moser F", Poly::parse(f, &av)?);
    }
    for c in &ints.chops {
        for r in &c.rationals {
            set.push_rational(format!("I_{}{}", r.r, c.k), RationalFn::parse(&r.expr, &av)?);
        }
    }
    Ok(set)
}

/// Casimirs in the Lotka-Volterra variables.
pub fn x_integrals(report: &SystemReport) -> Result<IntegralSet> {
    let xv = x_vars(report.metadata.variables.len());
    let mut set = IntegralSet::new();
    for c in report.integrals.casimirs.iter().filter(|c| c.variables == "x") {
        let f = RationalFn::parse(&c.expr, &xv)?;
        if f.den().is_constant() {
            set.push(c.label.clone(), f.num().scale(&f.den().constant_term().recip()));
        } else {
            set.push_rational(c.label.clone(), f);
        }
    }
    Ok(set)
}

fn parse_matrix(rows: &[Vec<String>], vars: &Vars) -> Result<PolyMatrix> {
    PolyMatrix::parse_rows(rows, vars)
}

fn first_nonzero(polys: impl IntoIterator<Item = Poly>, nv: usize) -> Poly {
    polys.into_iter().find(|p| !p.is_zero()).unwrap_or_else(|| Poly::zero(nv))
}

/// Recomputes every claim of a report from its text fields.
pub fn verify_report(report: &SystemReport, opts: Options) -> Result<Certificate> {
    if report.schema != SCHEMA {
        return Err(Error::InvalidArgument(format!("unsupported schema {}", report.schema)));
    }
    let meta = &report.metadata;
    let nv = meta.variables.len();
    let av = a_vars(nv);
    let xv = x_vars(nv);
    let phi = PhiSystem::parse(meta.rank, &meta.phi)?;
    let mut cert = Certificate::new(format!("{} [{}]", meta.phi, meta.source));

    let l = parse_matrix(&report.lax.l, &av)?;
    let b = parse_matrix(&report.lax.b, &av)?;
    cert.push(Check::note("L matches the root subset", l == crate::laxkit::build_l(&phi), meta.phi.clone()));
    cert.push(Check::note("B is skew-symmetric", b.is_skew(), ""));
    let xdot: Vec<Poly> = report.odes.a_form.iter().map(|s| Poly::parse(s, &av)).collect::<Result<_>>()?;
    if xdot.len() != nv {
        return Err(Error::VarCountMismatch { expected: nv, got: xdot.len() });
    }
    // dL/dt entrywise minus [B, L]
    let comm = b.commutator(&l);
    let dl = PolyMatrix::from_fn(l.dim(), nv, |i, j| lie_derivative(l.get(i, j), &xdot).expect("sizes checked"));
    let lax_residual = first_nonzero(dl.sub(&comm).entries_iter().cloned(), nv);
    cert.push(Check::residual("Lax equation dL/dt = [B, L]", &lax_residual, &av));

    if let (Some(xs), Some(matrix)) = (&report.odes.x_form, &report.odes.lv_matrix) {
        let lv = LvReduction { matrix: matrix.clone(), scale: rat(2) };
        let xeq: Vec<Poly> = xs.iter().map(|s| Poly::parse(s, &xv)).collect::<Result<_>>()?;
        let skew = (0..nv).all(|i| (0..nv).all(|j| matrix[i][j] == -matrix[j][i]));
        cert.push(Check::note("Lotka-Volterra matrix is skew", skew, ""));
        cert.push(Check::residual(
            "x-form matches the Lotka-Volterra matrix",
            &first_nonzero(xeq.iter().zip(lv.x_equations()).map(|(a, b)| a - &b), nv),
            &xv,
        ));
        // d(2 a_k^2)/dt = 4 a_k da_k/dt must equal the x-form at x = 2a^2
        let sub = lv.substitution();
        let residual = first_nonzero(
            xeq.iter()
                .enumerate()
                .map(|(k, e)| &e.substitute(&sub) - &(&Poly::product_of(nv, &[k], rat(4)) * &xdot[k])),
            nv,
        );
        cert.push(Check::residual("x = 2a^2 carries the a-form to the x-form", &residual, &av));
        let x_set = x_integrals(report)?;
        if !x_set.is_empty() {
            cert.absorb(certify_constants(&x_set, &xeq, &xv)?);
            let lvp = lv_poisson(matrix, opts.seed)?;
            for (label, c) in &x_set.polys {
                let field = lvp.hamiltonian_field(c);
                cert.push(Check::residual(
                    format!("Casimir of the Lotka-Volterra bracket: {label}"),
                    &first_nonzero(field, nv),
                    &xv,
                ));
            }
        }
    }

    let a_set = a_integrals(report)?;
    cert.absorb(certify_constants(&a_set, &xdot, &av)?);

    if let Some(ps) = &report.poisson {
        let pi = parse_matrix(&ps.matrix, &av)?;
        cert.push(Check::note("Poisson matrix is skew-symmetric", pi.is_skew(), ""));
        let violation = jacobi_violation(&pi);
        cert.push(Check::note(
            "Jacobi identity",
            violation.is_none() && ps.jacobi,
            violation.map_or_else(
                || "all triples".to_string(),
                |(i, j, k)| format!("fails at ({}, {}, {})", i + 1, j + 1, k + 1),
            ),
        ));
        let rank = generic_rank(&pi, ps.rank_seed);
        cert.push(Check::note(
            "generic rank is even and as reported",
            rank == ps.rank && rank.is_multiple_of(2),
            format!("rank {rank} (reported {})", ps.rank),
        ));
        let pm =
            PoissonMatrix { pi, jacobi_certified: violation.is_none(), generic_rank: rank, rank_seed: ps.rank_seed };
        let h = Poly::parse(&ps.hamiltonian, &av)?;
        let field = pm.hamiltonian_field(&h);
        cert.push(Check::residual(
            "Hamiltonian vector field equals the a-form",
            &first_nonzero(field.iter().zip(&xdot).map(|(f, x)| f - x), nv),
            &av,
        ));
        for c in report.integrals.casimirs.iter().filter(|c| c.variables == "a") {
            let p = Poly::parse(&c.expr, &av)?;
            cert.push(Check::residual(
                format!("Casimir: {}", c.label),
                &first_nonzero(pm.hamiltonian_field(&p), nv),
                &av,
            ));
        }
        if a_set.len() > 1 {
            cert.absorb(check_involution(&a_set, &pm, &av)?);
        }
    }

    if let Some(m) = &report.integrals.moser {
        let red = moser_reduce(&l, m.parity);
        let matches = red.reduced.fmt_rows(&av) == m.matrix
            && red.var_map.len() == m.var_map.len()
            && red.var_map.iter().zip(&m.var_map).all(|((la, p), e)| *la == e.label && p.fmt_with(&av) == e.expr);
        cert.push(Check::note("Moser reduction matches L^2", matches, format!("parity {}", m.parity)));
    }

    if opts.numeric {
        cert.absorb(numeric_checks(&xdot, &a_set, opts.seed)?);
    }
    Ok(cert)
}

/// Seeded initial point in `[0.5, 1.5)^n` away from every denominator zero.
pub fn initial_point(set: &IntegralSet, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        if set.rationals.iter().all(|(_, f)| f.den().eval_f64(&x).abs() >= DENOMINATOR_FLOOR) {
            return x;
        }
    }
}

fn numeric_checks(xdot: &[Poly], set: &IntegralSet, seed: u64) -> Result<Certificate> {
    let x0 = initial_point(set, xdot.len(), seed);
    match integrate_rk4(xdot, &x0, DEFAULT_STEP, DEFAULT_T_END) {
        Ok(traj) => {
            let mut c = drift_report(&traj, set, NUMERIC_TOLERANCE)?;
            for check in &mut c.checks {
                check.seed = Some(seed);
            }
            Ok(c)
        }
        Err(Error::Divergence { time }) => {
            let mut c = Certificate::default();
            c.push(Check {
                name: "trajectory".into(),
                kind: crate::verify::CheckKind::Numeric,
                status: crate::verify::Status::Fail,
                witness: Witness::Note { text: format!("diverged at t = {time}") },
                seed: Some(seed),
            });
            Ok(c)
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaxStatus {
    Ok,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LvStatus {
    Yes,
    No,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumEntry {
    pub mask: u64,
    pub phi: String,
    pub lax: LaxStatus,
    pub lv: LvStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationSummary {
    pub schema: u32,
    pub rank: usize,
    pub subsets: usize,
    pub lax_count: usize,
    pub lv_count: usize,
    pub failing_masks: Vec<u64>,
    pub lv_subsets: Vec<String>,
    pub entries: Vec<EnumEntry>,
}

/// Status of one root subset: a Lax pair exists, and some sign choice
/// gives a Lotka-Volterra system.
pub fn classify(phi: &PhiSystem) -> Result<EnumEntry> {
    let lax = search_signs_with(phi, &SearchOptions::default())?.is_some();
    let lv = lax && {
        let opts = SearchOptions { lv: LvPolicy::Require, ..SearchOptions::default() };
        search_signs_with(phi, &opts)?.is_some()
    };
    Ok(EnumEntry {
        mask: phi.mask(),
        phi: phi.to_text(),
        lax: if lax { LaxStatus::Ok } else { LaxStatus::None },
        lv: if lv { LvStatus::Yes } else { LvStatus::No },
    })
}

/// Classifies every root subset of rank `rank`, in parallel on the current
/// rayon pool, merged in mask order.
pub fn enumerate(rank: usize, cap: usize) -> Result<EnumerationSummary> {
    if rank > cap {
        return Err(Error::Constraint(format!("rank {rank} exceeds the enumeration cap {cap}")));
    }
    let subsets: Vec<PhiSystem> = enumerate_phi(rank)?.collect();
    let entries: Vec<EnumEntry> = subsets.par_iter().map(classify).collect::<Result<_>>()?;
    let lax_count = entries.iter().filter(|e| e.lax == LaxStatus::Ok).count();
    let lv_count = entries.iter().filter(|e| e.lv == LvStatus::Yes).count();
    Ok(EnumerationSummary {
        schema: SCHEMA,
        rank,
        subsets: entries.len(),
        lax_count,
        lv_count,
        failing_masks: entries.iter().filter(|e| e.lax == LaxStatus::None).map(|e| e.mask).collect(),
        lv_subsets: entries.iter().filter(|e| e.lv == LvStatus::Yes).map(|e| e.phi.clone()).collect(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub schema: u32,
    pub system: String,
    pub method: String,
    pub x0: Vec<f64>,
    pub step: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub divergence: Option<f64>,
    pub certificates: Certificate,
}

impl IntegrationReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none() && self.certificates.passed()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub x0: Option<Vec<f64>>,
    pub step: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            x0: None,
            step: DEFAULT_STEP,
            t_end: DEFAULT_T_END,
            sample_every: 100,
            tolerance: NUMERIC_TOLERANCE,
            seed: DEFAULT_SEED,
        }
    }
}

/// RK4 run of the `a`-form of a report with drift checks of its integrals.
pub fn integrate_report(report: &SystemReport, opts: &IntegrateOptions) -> Result<IntegrationReport> {
    let nv = report.metadata.variables.len();
    let av = a_vars(nv);
    let xdot: Vec<Poly> = report.odes.a_form.iter().map(|s| Poly::parse(s, &av)).collect::<Result<_>>()?;
    let set = a_integrals(report)?;
    let x0 = match &opts.x0 {
        Some(x) if x.len() != nv => return Err(Error::VarCountMismatch { expected: nv, got: x.len() }),
        Some(x) => x.clone(),
        None => initial_point(&set, nv, opts.seed),
    };
    let stride = opts.sample_every.max(1);
    let mut out = IntegrationReport {
        schema: SCHEMA,
        system: format!("{} [{}]", report.metadata.phi, report.metadata.source),
        method: "rk4".into(),
        x0: x0.clone(),
        step: opts.step,
        t_end: opts.t_end,
        sample_every: stride,
        times: Vec::new(),
        states: Vec::new(),
        divergence: None,
        certificates: Certificate::new(report.metadata.phi.clone()),
    };
    match integrate_rk4(&xdot, &x0, opts.step, opts.t_end) {
        Ok(traj) => {
            let mut c = drift_report(&traj, &set, opts.tolerance)?;
            c.system_id = out.certificates.system_id.clone();
            out.certificates = c;
            let last = traj.times.len() - 1;
            for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
                if i % stride == 0 || i == last {
                    out.times.push(*t);
                    out.states.push(s.clone());
                }
            }
        }
        Err(Error::Divergence { time }) => out.divergence = Some(time),
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Human-readable report: L, B, equations, Poisson matrix, integrals,
/// certificates.
pub fn render_text(report: &SystemReport) -> String {
    let mut s = String::new();
    let m = &report.metadata;
    let _ = writeln!(s, "system: {} (rank {}, {})", m.phi, m.rank, m.source);
    let _ = writeln!(s, "convention: {}", m.convention);
    let _ = writeln!(s, "seed: {}", m.seed);
    for n in &m.notes {
        let _ = writeln!(s, "note: {n}");
    }
    write_matrix(&mut s, "L", &report.lax.l);
    write_matrix(&mut s, "B", &report.lax.b);
    let _ = writeln!(s, "\nequations of motion:");
    for (v, e) in m.variables.iter().zip(&report.odes.a_form) {
        let _ = writeln!(s, "  {v}' = {e}");
    }
    if let Some(xs) = &report.odes.x_form {
        let _ = writeln!(s, "\nLotka-Volterra form (x_i = 2 a_i^2):");
        for (i, e) in xs.iter().enumerate() {
            let _ = writeln!(s, "  x{}' = {e}", i + 1);
        }
    }
    if let Some(p) = &report.poisson {
        write_matrix(
            &mut s,
            &format!("Poisson matrix ({}, rank {}, Jacobi {})", p.origin, p.rank, p.jacobi),
            &p.matrix,
        );
        let _ = writeln!(s, "  H = {}", p.hamiltonian);
    }
    let ints = &report.integrals;
    let _ = writeln!(s, "\nintegrals:");
    for t in &ints.traces {
        let _ = writeln!(s, "  {} = {}", t.normalization, t.poly);
    }
    if let Some(d) = &ints.det {
        let _ = writeln!(s, "  det L = {d}");
    }
    for c in &ints.casimirs {
        let _ = writeln!(s, "  {} = {} [{}]", c.label, c.expr, c.variables);
    }
    for c in &ints.chops {
        for r in &c.rationals {
            let _ = writeln!(s, "  I_{}{} = {}", r.r, c.k, r.expr);
        }
    }
    if let Some(mo) = &ints.moser {
        write_matrix(&mut s, &format!("Moser reduction ({} rows and columns removed)", mo.parity), &mo.matrix);
        for v in &mo.var_map {
            let _ = writeln!(s, "  {} = {}", v.label, v.expr);
        }
        if let Some(f) = &mo.extra_integral {
            let _ = writeln!(s, "  F = {f}");
        }
    }
    if let Some(r) = ints.independent_rank {
        let _ = writeln!(s, "  functionally independent: {r}");
    }
    let _ = writeln!(s, "\ncertificates:");
    for c in &report.certificates.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "  {status} {}", c.name);
    }
    s
}

fn write_matrix(s: &mut String, title: &str, rows: &[Vec<String>]) {
    let _ = writeln!(s, "\n{title}:");
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    for r in rows {
        let cells: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(s, "  [ {} ]", cells.join("  "));
    }
}
