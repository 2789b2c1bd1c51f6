//! JSON problem specifications, twist files and reports, and the three
//! batch pipelines behind the command-line tool.
//!
//! All rationals are written as `"p/q"` (or integer) strings. Reports are
//! deterministic for a given specification and seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::action::{induced_poisson, LieAction, Poly, PolyVectorField};
use crate::error::{Error, Result};
use crate::hopf::{Hopf, Tensor};
use crate::hpoly::{
    abelian_twist, counit_normalization_check, is_formal_twist, iterated_twisted_coproduct_check, jk_coherence_check,
    jordanian_twist, solve_twist_perturbatively, DegreeSchedule, FormalTwist, TwistedBialgebra,
};
use crate::lie::{bivector, cybe_defect, LieAlgebra, RMatrix};
use crate::quantize::{associativity_report, classical_limit_defect, star_table, StarProduct};
use crate::sample::Sampler;
use crate::scalar::{parse_rational, Rational, Series, DEFAULT_ORDER};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub x: String,
    pub y: String,
    /// Basis name → coefficient of [x, y].
    pub value: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LieSpec {
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RTermSpec {
    pub x: String,
    pub y: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonomialRecord {
    pub exponents: Vec<u8>,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldComponent {
    /// Index of the variable whose partial derivative this multiplies.
    pub var: usize,
    pub coefficient: Vec<MonomialRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub variables: Vec<String>,
    /// Basis name → vector field.
    pub fields: BTreeMap<String, Vec<FieldComponent>>,
}

/// One term of a twist file: PBW exponents per leg and the dense list of ħ
/// coefficients c₀, …, c_N.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TwistTerm {
    pub legs: Vec<Vec<u8>>,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TwistFile {
    pub basis: Vec<String>,
    pub truncation_order: usize,
    pub terms: Vec<TwistTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TwistChoice {
    /// `"trivial"`, `"moyal"`, `"jordanian"` or `"solve"`.
    Named(String),
    Imported { imported: TwistFile },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub lie_algebra: LieSpec,
    #[serde(default)]
    pub r_matrix: Vec<RTermSpec>,
    #[serde(default)]
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub twist: Option<TwistChoice>,
    #[serde(default)]
    pub truncation_order: Option<usize>,
    #[serde(default)]
    pub degree_schedule: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckVerdict {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OrderVerdict {
    pub order: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StarOrder {
    pub order: usize,
    pub polynomial: Vec<MonomialRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StarEntry {
    pub f: Vec<u8>,
    pub g: Vec<u8>,
    pub orders: Vec<StarOrder>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub passed: bool,
    pub checks: Vec<CheckVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<OrderVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist: Option<TwistFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub star_table: Option<Vec<StarEntry>>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            passed: true,
            ..Default::default()
        }
    }

    fn push(&mut self, name: &str, passed: bool, first_failure_order: Option<usize>, witness: Option<String>) {
        self.passed &= passed;
        self.checks.push(CheckVerdict {
            name: name.into(),
            passed,
            first_failure_order,
            witness,
        });
    }

    fn fail(&mut self, e: &Error) {
        self.passed = false;
        self.error = Some(e.to_string());
    }

    /// 0 if every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Command options shared by the pipelines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub order: Option<usize>,
    pub max_degree: usize,
    pub seed: u64,
    pub schedule: Option<String>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            order: None,
            max_degree: 3,
            seed: 0,
            schedule: None,
        }
    }
}

pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

pub fn parse_twist_file(text: &str) -> Result<TwistFile> {
    serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn index_of(names: &[String], name: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Schema(format!("unknown basis element {name:?}")))
}

/// Builds the Lie algebra; antisymmetry and Jacobi failures come back as the
/// corresponding errors.
pub fn build_lie(spec: &LieSpec) -> Result<LieAlgebra> {
    let mut brackets = Vec::new();
    for b in &spec.brackets {
        let i = index_of(&spec.basis, &b.x)?;
        let j = index_of(&spec.basis, &b.y)?;
        let mut terms = Vec::new();
        for (k, c) in &b.value {
            terms.push((index_of(&spec.basis, k)?, parse_rational(c)?));
        }
        brackets.push((i, j, terms));
    }
    LieAlgebra::from_brackets(spec.basis.clone(), &brackets)
}

pub fn build_r(spec: &ProblemSpec, lie: &Arc<LieAlgebra>, order: usize) -> Result<crate::lie::MultiVector> {
    let mut pairs = Vec::new();
    for t in &spec.r_matrix {
        pairs.push((index_of(lie.names(), &t.x)?, index_of(lie.names(), &t.y)?, parse_rational(&t.coefficient)?));
    }
    if pairs.iter().any(|(i, j, _)| i == j) {
        return Err(Error::Schema("r-matrix term with equal indices".into()));
    }
    Ok(bivector(lie, order, &pairs))
}

pub fn build_action(spec: &ActionSpec, lie: &Arc<LieAlgebra>, order: usize) -> Result<LieAction> {
    let n = spec.variables.len();
    if n == 0 {
        return Err(Error::Schema("action needs at least one variable".into()));
    }
    for name in spec.fields.keys() {
        index_of(lie.names(), name)?;
    }
    let mut fields = Vec::new();
    for name in lie.names() {
        let mut x = PolyVectorField::zero(n, order);
        for comp in spec.fields.get(name).map(Vec::as_slice).unwrap_or(&[]) {
            if comp.var >= n {
                return Err(Error::Schema(format!("variable index {} out of range", comp.var)));
            }
            let mut f = Poly::zero(n, order);
            for m in &comp.coefficient {
                if m.exponents.len() != n {
                    return Err(Error::Schema("monomial exponent length differs from variable count".into()));
                }
                f = &f + &Poly::monomial(&m.exponents, Series::constant(order, parse_rational(&m.value)?));
            }
            x = &x + &PolyVectorField::term(&[comp.var], f);
        }
        fields.push(x);
    }
    LieAction::new(lie, n, order, fields)
}

pub fn twist_to_file(j: &Tensor) -> TwistFile {
    let hopf = j.hopf();
    let d = hopf.dim();
    TwistFile {
        basis: hopf.lie().names().to_vec(),
        truncation_order: hopf.order(),
        terms: j
            .terms()
            .iter()
            .map(|(k, c)| TwistTerm {
                legs: k.chunks(d).map(<[u8]>::to_vec).collect(),
                coefficients: c.coeffs().iter().map(format_rational).collect(),
            })
            .collect(),
    }
}

pub fn twist_from_file(file: &TwistFile, hopf: &Arc<Hopf>) -> Result<Tensor> {
    if file.basis != hopf.lie().names() {
        return Err(Error::Schema("twist basis differs from the Lie algebra basis".into()));
    }
    if file.truncation_order != hopf.order() {
        return Err(Error::ConfigMismatch(file.truncation_order, hopf.order()));
    }
    let mut j = Tensor::zero(hopf, 2);
    for t in &file.terms {
        if t.legs.len() != 2 || t.legs.iter().any(|l| l.len() != hopf.dim()) {
            return Err(Error::Schema("twist terms need two legs of basis length".into()));
        }
        if t.coefficients.len() != hopf.order() + 1 {
            return Err(Error::Schema(format!("expected {} coefficients per term", hopf.order() + 1)));
        }
        let coeffs = t.coefficients.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        j = &j + &Tensor::monomial(hopf, &t.legs, Series::from_coeffs(coeffs));
    }
    Ok(j)
}

fn poly_records(p: &Poly, n: usize) -> Vec<MonomialRecord> {
    p.terms()
        .iter()
        .filter(|(_, c)| !c.coeff(n).is_zero())
        .map(|(k, c)| MonomialRecord {
            exponents: k.clone(),
            value: format_rational(c.coeff(n)),
        })
        .collect()
}

/// Everything the pipelines derive from a specification.
struct Problem {
    lie: Arc<LieAlgebra>,
    hopf: Arc<Hopf>,
    order: usize,
    r: crate::lie::MultiVector,
    action: Option<Arc<LieAction>>,
}

enum LieOutcome {
    Built(Problem),
    /// The algebra failed antisymmetry or Jacobi.
    Invalid(Error),
}

fn load(spec: &ProblemSpec, opts: &Options) -> Result<LieOutcome> {
    let order = opts.order.or(spec.truncation_order).unwrap_or(DEFAULT_ORDER);
    let lie = match build_lie(&spec.lie_algebra) {
        Ok(l) => Arc::new(l),
        Err(e @ (Error::NotAntisymmetric { .. } | Error::JacobiViolation { .. })) => return Ok(LieOutcome::Invalid(e)),
        Err(e) => return Err(e),
    };
    let hopf = Hopf::new(lie.clone(), order);
    let r = build_r(spec, &lie, order)?;
    let action = match &spec.action {
        Some(a) => Some(Arc::new(build_action(a, &lie, order)?)),
        None => None,
    };
    Ok(LieOutcome::Built(Problem {
        lie,
        hopf,
        order,
        r,
        action,
    }))
}

fn lie_witness(lie: &LieSpec, e: &Error) -> String {
    let name = |i: &usize| lie.basis.get(*i).cloned().unwrap_or_default();
    match e {
        Error::JacobiViolation { i, j, k, l } => {
            format!("(i,j,k,l) = ({i},{j},{k},{l}) = ({},{},{};{})", name(i), name(j), name(k), name(l))
        }
        Error::NotAntisymmetric { i, j, k } => format!("(i,j,k) = ({i},{j},{k}) = ({},{};{})", name(i), name(j), name(k)),
        other => other.to_string(),
    }
}

fn schedule(spec: &ProblemSpec, opts: &Options) -> Result<DegreeSchedule> {
    match opts.schedule.as_ref().or(spec.degree_schedule.as_ref()) {
        Some(s) => DegreeSchedule::parse(s),
        None => Ok(DegreeSchedule::default()),
    }
}

/// The twist named by the specification (default: solve).
fn obtain_twist(spec: &ProblemSpec, p: &Problem, opts: &Options) -> Result<Tensor> {
    let choice = spec.twist.clone().unwrap_or(TwistChoice::Named("solve".into()));
    match choice {
        TwistChoice::Imported { imported } => twist_from_file(&imported, &p.hopf),
        TwistChoice::Named(name) => match name.as_str() {
            "trivial" => Ok(Tensor::one(&p.hopf, 2)),
            "moyal" => {
                let pairs = RMatrix::new_unchecked(p.r.clone()).pairs();
                abelian_twist(&p.hopf, &pairs)
            }
            "jordanian" => {
                let pairs = RMatrix::new_unchecked(p.r.clone()).pairs();
                let [(a, b, c)] = pairs.as_slice() else {
                    return Err(Error::DomainError("the Jordanian twist needs r = H∧E".into()));
                };
                if !c.is_one() {
                    return Err(Error::DomainError("the Jordanian twist needs r = H∧E with coefficient 1".into()));
                }
                let one = vec![(*b, Rational::from_integer(1.into()))];
                if p.lie.bracket(*a, *b) == one.as_slice() {
                    jordanian_twist(&p.hopf, *a, *b)
                } else {
                    let minus = vec![(*a, Rational::from_integer((-1).into()))];
                    if p.lie.bracket(*a, *b) == minus.as_slice() {
                        // r = E∧H = −H∧E: swap roles and flip J.
                        Ok(jordanian_twist(&p.hopf, *b, *a)?.flip())
                    } else {
                        Err(Error::DomainError("the Jordanian twist needs [H, E] = E".into()))
                    }
                }
            }
            "solve" => {
                let r = RMatrix::new(p.r.clone())?;
                Ok(solve_twist_perturbatively(&r, &p.hopf, &schedule(spec, opts)?)?.j().clone())
            }
            other => Err(Error::Schema(format!("unknown twist {other:?}"))),
        },
    }
}

fn certificate(j: &Tensor) -> (Vec<OrderVerdict>, Option<usize>) {
    let cert = is_formal_twist(j);
    let verdicts = (0..=cert.order)
        .map(|n| OrderVerdict {
            order: n,
            passed: cert.filtered && !cert.failing_orders.contains(&n),
        })
        .collect();
    (verdicts, cert.first_failure())
}

/// Runs the twist checks, returning the certified twist if all pass.
fn check_twist(report: &mut Report, j: &Tensor, seed: u64) -> Option<FormalTwist> {
    let (_, first) = certificate(j);
    let cert = is_formal_twist(j);
    report.push(
        "twist_cocycle",
        cert.is_formal_twist(),
        first,
        (!cert.filtered).then(|| "J is not 1⊗1 modulo ħ".to_string()),
    );
    report.push("counit_normalization", counit_normalization_check(j), None, None);
    if !cert.is_formal_twist() {
        return None;
    }
    let twist = FormalTwist::new_unchecked(j.clone());
    let mut coherent = true;
    let mut witness = None;
    'outer: for k in 0..=3usize {
        for i in 0..=k {
            for l in 0..=2usize {
                if !jk_coherence_check(&twist, k, i, l).unwrap_or(false) {
                    coherent = false;
                    witness = Some(format!("k={k}, i={i}, l={l}"));
                    break 'outer;
                }
            }
        }
    }
    report.push("jk_coherence", coherent, None, witness);
    let tb = TwistedBialgebra::new(twist.clone());
    let hopf = j.hopf();
    let mut samples: Vec<Tensor> = (0..hopf.dim()).map(|i| Tensor::generator(hopf, i)).collect();
    let mut s = Sampler::new(seed);
    samples.push(s.tensor(hopf, 1, 2, 2));
    let mut ok = true;
    let mut witness = None;
    'iter: for (n, x) in samples.iter().enumerate() {
        for k in 0..=3usize {
            if !iterated_twisted_coproduct_check(&tb, x, k).unwrap_or(false) {
                ok = false;
                witness = Some(format!("sample {n}, k={k}"));
                break 'iter;
            }
        }
    }
    report.push("twisted_coproduct_iterates", ok, None, witness);
    Some(twist)
}

/// Jacobi, CYBE, action, Poisson action and twist checks.
pub fn cmd_verify(spec: &ProblemSpec, opts: &Options) -> Result<Report> {
    let mut report = Report::new("verify");
    let p = match load(spec, opts)? {
        LieOutcome::Invalid(e) => {
            report.push("jacobi", false, None, Some(lie_witness(&spec.lie_algebra, &e)));
            return Ok(report);
        }
        LieOutcome::Built(p) => p,
    };
    report.push("jacobi", true, None, None);
    let defect = cybe_defect(&p.r)?;
    let triangular = defect.is_zero();
    report.push("cybe", triangular, None, (!triangular).then(|| format!("[r,r] = {defect}")));
    if let Some(action) = &p.action {
        let defect = action.action_defect();
        let names = p.lie.names();
        report.push(
            "action_morphism",
            defect.is_none(),
            None,
            defect.map(|(i, j)| format!("φ([{},{}]) ≠ [φ({}),φ({})]", names[i], names[j], names[i], names[j])),
        );
        if defect.is_none() && triangular {
            let r = RMatrix::new_unchecked(p.r.clone());
            let pi = induced_poisson(&r, action)?;
            let jac = pi.schouten(&pi);
            report.push("poisson_jacobi", jac.is_zero(), None, (!jac.is_zero()).then(|| format!("[π,π] = {jac}")));
            let pa = crate::action::poisson_action_defect(&r, action, &pi)?;
            report.push(
                "poisson_action",
                pa.is_none(),
                None,
                pa.map(|i| format!("[π, φ({})] ≠ φ∧φ([r, {}])", names[i], names[i])),
            );
        }
    }
    if triangular {
        match obtain_twist(spec, &p, opts) {
            Ok(j) => {
                check_twist(&mut report, &j, opts.seed);
            }
            Err(e @ Error::AnsatzTooSmall { order, .. }) => {
                report.push("twist_cocycle", false, Some(order), Some(e.to_string()));
            }
            Err(e @ Error::DomainError(_)) => report.push("twist_cocycle", false, None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// Star-product table with associativity and classical-limit verdicts.
pub fn cmd_quantize(spec: &ProblemSpec, opts: &Options) -> Result<Report> {
    let mut report = Report::new("quantize");
    let p = match load(spec, opts)? {
        LieOutcome::Invalid(e) => {
            report.push("jacobi", false, None, Some(lie_witness(&spec.lie_algebra, &e)));
            return Ok(report);
        }
        LieOutcome::Built(p) => p,
    };
    let Some(action) = p.action.clone() else {
        return Err(Error::Schema("quantize needs an action".into()));
    };
    if let Err(e) = action.verify() {
        report.push("action_morphism", false, None, Some(e.to_string()));
        return Ok(report);
    }
    let j = match obtain_twist(spec, &p, opts) {
        Ok(j) => j,
        Err(e @ (Error::AnsatzTooSmall { .. } | Error::NotTriangular { .. })) => {
            let order = match &e {
                Error::AnsatzTooSmall { order, .. } => Some(*order),
                _ => None,
            };
            report.push("twist", false, order, Some(e.to_string()));
            report.fail(&e);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let cert = is_formal_twist(&j);
    report.push("twist_cocycle", cert.is_formal_twist(), cert.first_failure(), None);
    let star = StarProduct::from_tensor(j, &action)?;
    let assoc = associativity_report(&star, opts.max_degree);
    report.push(
        "associativity",
        assoc.is_associative(),
        assoc.witness.as_ref().map(|w| w.3),
        assoc.witness.as_ref().map(|(a, b, c, _)| format!("f={a:?}, g={b:?}, h={c:?}")),
    );
    let r = RMatrix::new_unchecked(p.r.clone());
    let pi = action.push_multivector(r.value())?;
    let limit = classical_limit_defect(&star, &pi, opts.max_degree);
    report.push(
        "classical_limit",
        limit.is_none(),
        None,
        limit.map(|(a, b)| format!("f={a:?}, g={b:?}")),
    );
    let table = star_table(&star, opts.max_degree)
        .into_iter()
        .map(|(f, g, prod)| StarEntry {
            f,
            g,
            orders: (0..=p.order)
                .map(|n| StarOrder {
                    order: n,
                    polynomial: poly_records(&prod, n),
                })
                .filter(|o| !o.polynomial.is_empty())
                .collect(),
        })
        .collect();
    report.star_table = Some(table);
    Ok(report)
}

/// Solves for a twist and certifies it order by order.
pub fn cmd_twist_solve(spec: &ProblemSpec, opts: &Options) -> Result<Report> {
    let mut report = Report::new("twist-solve");
    let p = match load(spec, opts)? {
        LieOutcome::Invalid(e) => {
            report.push("jacobi", false, None, Some(lie_witness(&spec.lie_algebra, &e)));
            return Ok(report);
        }
        LieOutcome::Built(p) => p,
    };
    let r = match RMatrix::new(p.r.clone()) {
        Ok(r) => r,
        Err(e @ Error::NotTriangular { .. }) => {
            let Error::NotTriangular { witness } = &e else { unreachable!() };
            report.push("cybe", false, None, Some(format!("[r,r] = {witness}")));
            report.fail(&e);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.push("cybe", true, None, None);
    match solve_twist_perturbatively(&r, &p.hopf, &schedule(spec, opts)?) {
        Ok(tw) => {
            let (verdicts, first) = certificate(tw.j());
            report.push("twist_cocycle", first.is_none(), first, None);
            report.push("counit_normalization", counit_normalization_check(tw.j()), None, None);
            report.certificate = Some(verdicts);
            report.twist = Some(twist_to_file(tw.j()));
        }
        Err(e @ Error::AnsatzTooSmall { order, .. }) => {
            report.push("twist_cocycle", false, Some(order), Some(e.to_string()));
            report.fail(&e);
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}
