//! Definable predicates and sets, the syntactic definability criterion,
//! quantification over zero sets, and definable functions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::{
    best_modulus, eval_exact, formula_table, tuples, Assignment, FiniteStructure, Staircase,
};
use crate::syntax::{fresh_copies, Formula, Signature, Term, Variable};

/// How the Cauchy rate of a predicate's formula sequence is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    /// Asserted by the user; not yet checked anywhere.
    Declared,
    /// Checked on the listed structures.
    Verified(Vec<String>),
}

/// A sequence `φ_0, φ_1, ...` with `|φ_n − φ_{n+1}| ≤ 2^{-n}`. A single
/// formula is the constant sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinablePredicate {
    pub formulas: Vec<Formula>,
    pub context: Vec<Variable>,
    pub rate: Rate,
}

impl DefinablePredicate {
    pub fn new(formulas: Vec<Formula>, context: Vec<Variable>) -> Result<DefinablePredicate> {
        if formulas.is_empty() {
            return Err(Error::Check("a definable predicate needs a formula".into()));
        }
        for f in &formulas {
            for v in f.free_variables() {
                if !context.contains(&v) {
                    return Err(Error::Context(format!(
                        "`{}` is free in `{f}` but not in the context",
                        v.name
                    )));
                }
            }
        }
        Ok(DefinablePredicate {
            formulas,
            context,
            rate: Rate::Declared,
        })
    }

    pub fn single(f: Formula, context: Vec<Variable>) -> Result<DefinablePredicate> {
        let mut p = DefinablePredicate::new(vec![f], context)?;
        p.rate = Rate::Verified(Vec::new());
        Ok(p)
    }

    /// The formula used to evaluate the predicate: the last of the sequence,
    /// within `2^{-(N-1)}` of the limit when the rate holds.
    pub fn representative(&self) -> &Formula {
        self.formulas.last().expect("nonempty")
    }

    pub fn table(&self, m: &FiniteStructure) -> Result<Vec<Rational>> {
        Ok(formula_table(m, self.representative(), &self.context)?.data)
    }

    /// Checks `|φ_n − φ_{n+1}| ≤ 2^{-n}` everywhere on `m`; on success the
    /// label is added to the certificate.
    pub fn verify_rate(&mut self, m: &FiniteStructure, label: &str) -> Result<Vec<Witness>> {
        let tables = self
            .formulas
            .iter()
            .map(|f| Ok(formula_table(m, f, &self.context)?.data))
            .collect::<Result<Vec<_>>>()?;
        let sorts = sorts_of(&self.context);
        let dims = m.dims(&sorts)?;
        let mut out = Vec::new();
        for n in 0..tables.len().saturating_sub(1) {
            let bound = rational::pow2_inv(n as u32);
            for (i, t) in tuples(&dims).enumerate() {
                let diff = rational::abs_diff(&tables[n][i], &tables[n + 1][i]);
                if diff > bound {
                    out.push(Witness::new(
                        "rate",
                        m.names(&sorts, &t),
                        format!(
                            "|φ_{n} − φ_{}| = {} > {}",
                            n + 1,
                            format_ratio(&diff),
                            format_ratio(&bound)
                        ),
                    ));
                }
            }
        }
        if out.is_empty() {
            match &mut self.rate {
                Rate::Verified(v) => {
                    if !v.iter().any(|l| l == label) {
                        v.push(label.to_string())
                    }
                }
                Rate::Declared => self.rate = Rate::Verified(vec![label.to_string()]),
            }
        }
        Ok(out)
    }
}

pub(crate) fn sorts_of(ctx: &[Variable]) -> Vec<String> {
    ctx.iter().map(|v| v.sort.clone()).collect()
}

fn vars_as_terms(vs: &[Variable]) -> Vec<Term> {
    vs.iter().cloned().map(Term::Var).collect()
}

/// Points of a context where a predicate is at most `tolerance`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSet {
    pub tolerance: Rational,
    pub sorts: Vec<String>,
    pub members: Vec<Vec<usize>>,
}

impl ZeroSet {
    pub fn names(&self, m: &FiniteStructure) -> Vec<Vec<String>> {
        self.members.iter().map(|t| m.names(&self.sorts, t)).collect()
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.members.iter().any(|x| x == t)
    }

    /// `D(x̄, Z)` by brute force; 1 when the set is empty.
    pub fn distance(&self, m: &FiniteStructure, x: &[usize]) -> Result<Rational> {
        let mut best = rational::one();
        for z in &self.members {
            let d = m.tuple_distance(&self.sorts, x, z)?;
            if d < best {
                best = d;
            }
        }
        Ok(best)
    }
}

pub fn zero_set(m: &FiniteStructure, p: &DefinablePredicate, tol: &Rational) -> Result<ZeroSet> {
    let data = p.table(m)?;
    let sorts = sorts_of(&p.context);
    let dims = m.dims(&sorts)?;
    let members = tuples(&dims)
        .zip(&data)
        .filter(|(_, v)| *v <= tol)
        .map(|(t, _)| t)
        .collect();
    Ok(ZeroSet {
        tolerance: tol.clone(),
        sorts,
        members,
    })
}

/// The two sentences of the syntactic criterion for `φ(x̄)`:
/// `sup x̄ inf ȳ max(φ(ȳ), |φ(x̄) − D(x̄,ȳ)|)` and
/// `sup x̄ |φ(x̄) − inf ȳ (φ(ȳ) + D(x̄,ȳ))|`.
pub fn criterion_sentences(
    sig: &Signature,
    phi: &Formula,
    ctx: &[Variable],
) -> Result<(Formula, Formula)> {
    for v in ctx {
        sig.metric_name(&v.sort)?;
    }
    let mut avoid = BTreeSet::new();
    phi.all_variable_names(&mut avoid);
    for v in ctx {
        avoid.insert(v.name.clone());
    }
    let ys = fresh_copies(ctx, &mut avoid);
    let pairs: Vec<(Variable, Variable)> = ctx.iter().cloned().zip(ys.iter().cloned()).collect();
    let phi_y = phi.rename_free(&pairs);
    let dist = Formula::tuple_distance(sig, &vars_as_terms(ctx), &vars_as_terms(&ys))?;
    let c1 = Formula::sup(
        ctx.to_vec(),
        Formula::inf(
            ys.clone(),
            Formula::max(phi_y.clone(), Formula::abs_diff(phi.clone(), dist.clone())),
        ),
    );
    let c2 = Formula::sup(
        ctx.to_vec(),
        Formula::abs_diff(phi.clone(), Formula::inf(ys, Formula::add(phi_y, dist))),
    );
    Ok((c1, c2))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDefinability {
    pub label: String,
    pub condition1: Rational,
    pub condition2: Rational,
    /// `φ(x̄) = D(x̄, Z(φ))` at every point (distance to the empty set is 1).
    pub oracle_agrees: bool,
    pub witnesses: Vec<Witness>,
}

impl ModelDefinability {
    pub fn criterion_holds(&self) -> bool {
        self.condition1 == rational::zero() && self.condition2 == rational::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinabilityReport {
    pub formula: Formula,
    pub models: Vec<ModelDefinability>,
}

impl DefinabilityReport {
    pub fn passed(&self) -> bool {
        self.models
            .iter()
            .all(|m| m.criterion_holds() && m.oracle_agrees)
    }

    pub fn witnesses(&self) -> Vec<Witness> {
        self.models.iter().flat_map(|m| m.witnesses.clone()).collect()
    }
}

/// Evaluates both criterion sentences on every model; the distance oracle is
/// computed independently by brute force in each model.
pub fn check_syntactic_definability(
    models: &[(String, FiniteStructure)],
    phi: &Formula,
    ctx: &[Variable],
) -> Result<DefinabilityReport> {
    let mut out = Vec::new();
    for (label, m) in models {
        let sig = m.signature().clone();
        let (c1, c2) = criterion_sentences(&sig, phi, ctx)?;
        let none = Assignment::new();
        let v1 = eval_exact(m, &c1, &none)?;
        let v2 = eval_exact(m, &c2, &none)?;
        let mut witnesses = Vec::new();
        let sorts = sorts_of(ctx);
        let (t1, t2) = match (&c1, &c2) {
            _ if ctx.is_empty() => (vec![v1.clone()], vec![v2.clone()]),
            (Formula::Sup { body: b1, .. }, Formula::Sup { body: b2, .. }) => {
                (formula_table(m, b1, ctx)?.data, formula_table(m, b2, ctx)?.data)
            }
            _ => unreachable!("criterion sentences are suprema"),
        };
        let dims = m.dims(&sorts)?;
        for (i, t) in tuples(&dims).enumerate() {
            if t1[i] != rational::zero() {
                witnesses.push(Witness::new(
                    "condition1",
                    m.names(&sorts, &t),
                    format!("{label}: value {}", format_ratio(&t1[i])),
                ));
            }
            if t2[i] != rational::zero() {
                witnesses.push(Witness::new(
                    "condition2",
                    m.names(&sorts, &t),
                    format!("{label}: value {}", format_ratio(&t2[i])),
                ));
            }
        }
        let p = DefinablePredicate::single(phi.clone(), ctx.to_vec())?;
        let values = p.table(m)?;
        let z = zero_set(m, &p, &rational::zero())?;
        let mut oracle_agrees = true;
        for (i, t) in tuples(&dims).enumerate() {
            let dz = z.distance(m, &t)?;
            if dz != values[i] {
                oracle_agrees = false;
                if v1 == rational::zero() && v2 == rational::zero() {
                    witnesses.push(Witness::new(
                        "distance-oracle",
                        m.names(&sorts, &t),
                        format!(
                            "{label}: φ = {} but distance to the zero set is {}",
                            format_ratio(&values[i]),
                            format_ratio(&dz)
                        ),
                    ));
                }
            }
        }
        out.push(ModelDefinability {
            label: label.clone(),
            condition1: v1,
            condition2: v2,
            oracle_agrees,
            witnesses,
        });
    }
    Ok(DefinabilityReport {
        formula: phi.clone(),
        models: out,
    })
}

/// The criterion applied to each formula of a predicate's sequence.
pub fn check_predicate_definability(
    models: &[(String, FiniteStructure)],
    p: &DefinablePredicate,
) -> Result<Vec<DefinabilityReport>> {
    p.formulas
        .iter()
        .map(|f| check_syntactic_definability(models, f, &p.context))
        .collect()
}

/// Relativized quantifier values at one parameter tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativizedValue {
    pub parameters: Vec<String>,
    /// `inf { φ(x̄, ȳ) : x̄ ∈ Z(ψ) }`
    pub inf: Rational,
    /// `sup { φ(x̄, ȳ) : x̄ ∈ Z(ψ) }`
    pub sup: Rational,
    /// `inf x̄ (φ + ω(ψ))`
    pub syntactic_inf: Rational,
    /// `sup x̄ (φ ∸ ω(ψ))`
    pub syntactic_sup: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relativized {
    pub parameters: Vec<Variable>,
    pub values: Vec<RelativizedValue>,
    pub modulus: Staircase,
    /// `ω(0)`: the allowed gap between the two computations.
    pub slack: Rational,
    pub witnesses: Vec<Witness>,
}

/// Quantifies `φ(x̄, ȳ)` over the zero set of `ψ(x̄)`, both directly and via
/// the modulus-based relativization, and checks that they agree within one
/// step of the staircase.
pub fn relativized_quantifiers(
    m: &FiniteStructure,
    psi: &Formula,
    x: &[Variable],
    phi: &Formula,
) -> Result<Relativized> {
    let rep = check_syntactic_definability(&[("M".into(), m.clone())], psi, x)?;
    if !rep.passed() {
        return Err(Error::Check(format!(
            "`{psi}` does not pass the definability criterion"
        )));
    }
    let params: Vec<Variable> = phi
        .free_variables()
        .into_iter()
        .filter(|v| !x.contains(v))
        .collect();
    let mut full = x.to_vec();
    full.extend(params.iter().cloned());
    let p = DefinablePredicate::single(psi.clone(), x.to_vec())?;
    let z = zero_set(m, &p, &rational::zero())?;
    if z.members.is_empty() {
        return Err(Error::Check(format!("the zero set of `{psi}` is empty")));
    }
    let psi_t = p.table(m)?;
    let phi_t = formula_table(m, phi, &full)?;
    let omega = best_modulus(m, phi, &full)?;
    let slack = omega.omega(&rational::zero()).clone();
    let xs = sorts_of(x);
    let ps = sorts_of(&params);
    let xdims = m.dims(&xs)?;
    let pdims = m.dims(&ps)?;
    let mut values = Vec::new();
    let mut witnesses = Vec::new();
    for pt in tuples(&pdims) {
        let mut inf: Option<Rational> = None;
        let mut sup: Option<Rational> = None;
        let mut sinf = rational::one();
        let mut ssup = rational::zero();
        for (i, xt) in tuples(&xdims).enumerate() {
            let mut at = xt.clone();
            at.extend(pt.iter().copied());
            let v = phi_t.get(&at);
            if z.contains(&xt) {
                if inf.as_ref().map_or(true, |b| v < b) {
                    inf = Some(v.clone());
                }
                if sup.as_ref().map_or(true, |b| v > b) {
                    sup = Some(v.clone());
                }
            }
            let w = omega.omega(&psi_t[i]);
            let a = rational::trunc_add(v, w);
            if a < sinf {
                sinf = a;
            }
            let b = rational::monus(v, w);
            if b > ssup {
                ssup = b;
            }
        }
        let (inf, sup) = (inf.expect("nonempty"), sup.expect("nonempty"));
        let names = m.names(&ps, &pt);
        let upper = rational::trunc_add(&inf, &slack);
        if !(inf <= sinf && sinf <= upper) {
            witnesses.push(Witness::new(
                "relativized-inf",
                names.clone(),
                format!(
                    "direct {} vs syntactic {} (slack {})",
                    format_ratio(&inf),
                    format_ratio(&sinf),
                    format_ratio(&slack)
                ),
            ));
        }
        let lower = rational::monus(&sup, &slack);
        if !(lower <= ssup && ssup <= sup) {
            witnesses.push(Witness::new(
                "relativized-sup",
                names.clone(),
                format!(
                    "direct {} vs syntactic {} (slack {})",
                    format_ratio(&sup),
                    format_ratio(&ssup),
                    format_ratio(&slack)
                ),
            ));
        }
        values.push(RelativizedValue {
            parameters: names,
            inf,
            sup,
            syntactic_inf: sinf,
            syntactic_sup: ssup,
        });
    }
    Ok(Relativized {
        parameters: params,
        values,
        modulus: omega,
        slack,
        witnesses,
    })
}

/// Both clauses of the bounded-by-a-formula lemma: `φ` vanishes on `Z(A)`
/// and `D(x̄, Z(A)) ≤ φ(x̄)` everywhere.
pub fn check_bounded_by_formula(
    m: &FiniteStructure,
    a: &DefinablePredicate,
    phi: &Formula,
) -> Result<Vec<Witness>> {
    let z = zero_set(m, a, &rational::zero())?;
    let t = formula_table(m, phi, &a.context)?.data;
    let sorts = sorts_of(&a.context);
    let mut out = Vec::new();
    for (i, x) in tuples(&m.dims(&sorts)?).enumerate() {
        if z.contains(&x) && t[i] != rational::zero() {
            out.push(Witness::new(
                "vanishes-on-zero-set",
                m.names(&sorts, &x),
                format!("φ = {}", format_ratio(&t[i])),
            ));
        }
        let d = z.distance(m, &x)?;
        if d > t[i] {
            out.push(Witness::new(
                "bounds-distance",
                m.names(&sorts, &x),
                format!(
                    "D(x, Z) = {} > φ = {}",
                    format_ratio(&d),
                    format_ratio(&t[i])
                ),
            ));
        }
    }
    Ok(out)
}

/// A graph predicate `α(x̄, ȳ)` between two definable sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinableFunction {
    pub graph: DefinablePredicate,
    pub source: DefinablePredicate,
    pub target: DefinablePredicate,
}

impl DefinableFunction {
    /// Builds a function whose graph context is the source context followed
    /// by the target context.
    pub fn new(
        graph: Formula,
        source: DefinablePredicate,
        target: DefinablePredicate,
    ) -> Result<DefinableFunction> {
        let mut ctx = source.context.clone();
        for v in &target.context {
            if ctx.contains(v) {
                return Err(Error::Context(format!(
                    "`{}` occurs in both source and target contexts",
                    v.name
                )));
            }
            ctx.push(v.clone());
        }
        Ok(DefinableFunction {
            graph: DefinablePredicate::single(graph, ctx)?,
            source,
            target,
        })
    }

    pub fn x(&self) -> &[Variable] {
        &self.source.context
    }

    pub fn y(&self) -> &[Variable] {
        &self.target.context
    }
}

/// The graph `D(x̄, x̄')` of the identity on `a`.
pub fn identity(sig: &Signature, a: &DefinablePredicate) -> Result<DefinableFunction> {
    let mut avoid = BTreeSet::new();
    for f in &a.formulas {
        f.all_variable_names(&mut avoid);
    }
    for v in &a.context {
        avoid.insert(v.name.clone());
    }
    let ys = fresh_copies(&a.context, &mut avoid);
    let graph = Formula::tuple_distance(sig, &vars_as_terms(&a.context), &vars_as_terms(&ys))?;
    let target = rename_predicate(a, &ys);
    DefinableFunction::new(graph, a.clone(), target)
}

pub fn rename_predicate(p: &DefinablePredicate, to: &[Variable]) -> DefinablePredicate {
    let pairs: Vec<(Variable, Variable)> =
        p.context.iter().cloned().zip(to.iter().cloned()).collect();
    DefinablePredicate {
        formulas: p.formulas.iter().map(|f| f.rename_free(&pairs)).collect(),
        context: to.to_vec(),
        rate: p.rate.clone(),
    }
}

/// The function a graph induces on one model: source tuple ↦ target tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedFunction {
    pub map: BTreeMap<Vec<usize>, Vec<usize>>,
    pub modulus: Staircase,
}

impl InducedFunction {
    pub fn to_names(&self, m: &FiniteStructure, f: &DefinableFunction) -> Vec<(Vec<String>, Vec<String>)> {
        let xs = sorts_of(f.x());
        let ys = sorts_of(f.y());
        self.map
            .iter()
            .map(|(a, b)| (m.names(&xs, a), m.names(&ys, b)))
            .collect()
    }
}

/// Reads off the function induced by the graph on `m`: every point of
/// `Z(A)` needs exactly one `ȳ` with `α = 0`, lying in `Z(B)`. Points outside
/// `Z(A)` are not constrained.
pub fn induced_function(
    m: &FiniteStructure,
    f: &DefinableFunction,
) -> Result<(InducedFunction, Vec<Witness>)> {
    let xs = sorts_of(f.x());
    let ys = sorts_of(f.y());
    let za = zero_set(m, &f.source, &rational::zero())?;
    let zb = zero_set(m, &f.target, &rational::zero())?;
    let g = f.graph.table(m)?;
    let ydims = m.dims(&ys)?;
    let mut dims = m.dims(&xs)?;
    dims.extend(ydims.iter().copied());
    let mut map = BTreeMap::new();
    let mut witnesses = Vec::new();
    for x in &za.members {
        let hits: Vec<Vec<usize>> = tuples(&ydims)
            .filter(|y| {
                let mut t = x.clone();
                t.extend(y.iter().copied());
                g[crate::semantics::encode(&dims, &t)] == rational::zero()
            })
            .collect();
        let at = m.names(&xs, x);
        match hits.len() {
            0 => witnesses.push(Witness::new("total", at, "no image")),
            1 => {
                if !zb.contains(&hits[0]) {
                    witnesses.push(Witness::new(
                        "image",
                        at,
                        format!("image {:?} lies outside the target set", m.names(&ys, &hits[0])),
                    ));
                }
                map.insert(x.clone(), hits[0].clone());
            }
            _ => {
                let imgs: Vec<Vec<String>> = hits.iter().map(|y| m.names(&ys, y)).collect();
                witnesses.push(Witness::new(
                    "single-valued",
                    at,
                    format!("images {imgs:?}"),
                ));
            }
        }
    }
    let mut obs = Vec::new();
    for (a, fa) in &map {
        for (b, fb) in &map {
            obs.push((m.tuple_distance(&xs, a, b)?, m.tuple_distance(&ys, fa, fb)?));
        }
    }
    Ok((
        InducedFunction {
            map,
            modulus: Staircase::from_observations(obs),
        },
        witnesses,
    ))
}

#[derive(Debug, Clone)]
pub struct FunctionReport {
    pub models: Vec<(String, InducedFunction)>,
    pub witnesses: Vec<Witness>,
}

impl FunctionReport {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Totality, single-valuedness and image containment on every model.
pub fn check_definable_function(
    models: &[(String, FiniteStructure)],
    f: &DefinableFunction,
) -> Result<FunctionReport> {
    let mut out = FunctionReport {
        models: Vec::new(),
        witnesses: Vec::new(),
    };
    for (label, m) in models {
        let (ind, ws) = induced_function(m, f)?;
        out.witnesses.extend(ws.into_iter().map(|mut w| {
            w.detail = format!("{label}: {}", w.detail);
            w
        }));
        out.models.push((label.clone(), ind));
    }
    Ok(out)
}

fn same_set(a: &DefinablePredicate, b: &DefinablePredicate) -> bool {
    a.context.len() == b.context.len()
        && a.context
            .iter()
            .zip(&b.context)
            .all(|(x, y)| x.sort == y.sort)
        && rename_predicate(b, &a.context).formulas == a.formulas
}

/// Composite graph `inf ȳ max(α(x̄, ȳ), β(ȳ, z̄))`.
pub fn compose_definable(
    alpha: &DefinableFunction,
    beta: &DefinableFunction,
) -> Result<DefinableFunction> {
    if !same_set(&alpha.target, &beta.source) {
        return Err(Error::Context(
            "target of the first morphism is not the source of the second".into(),
        ));
    }
    let ys = alpha.y().to_vec();
    let mut avoid = BTreeSet::new();
    alpha.graph.representative().all_variable_names(&mut avoid);
    for v in alpha.x().iter().chain(&ys) {
        avoid.insert(v.name.clone());
    }
    beta.graph.representative().all_variable_names(&mut avoid);
    // rename β's variables: source context to ȳ, target context to fresh z̄
    let zs = fresh_copies(beta.y(), &mut avoid);
    let mut pairs: Vec<(Variable, Variable)> =
        beta.x().iter().cloned().zip(ys.iter().cloned()).collect();
    pairs.extend(beta.y().iter().cloned().zip(zs.iter().cloned()));
    let beta_g = beta.graph.representative().rename_free(&pairs);
    let graph = Formula::inf(
        ys,
        Formula::max(alpha.graph.representative().clone(), beta_g),
    );
    let target = rename_predicate(&beta.target, &zs);
    DefinableFunction::new(graph, alpha.source.clone(), target)
}

/// Equality of the induced functions on every model.
pub fn morphism_equal(
    models: &[(String, FiniteStructure)],
    alpha: &DefinableFunction,
    beta: &DefinableFunction,
) -> Result<(bool, Vec<Witness>)> {
    if !same_set(&alpha.source, &beta.source) || !same_set(&alpha.target, &beta.target) {
        return Err(Error::Context("morphisms have different source or target".into()));
    }
    let mut out = Vec::new();
    for (label, m) in models {
        let (fa, wa) = induced_function(m, alpha)?;
        let (fb, wb) = induced_function(m, beta)?;
        if !wa.is_empty() || !wb.is_empty() {
            out.push(Witness::new(
                "not-a-function",
                vec![label.clone()],
                "one of the graphs is not a function on this model",
            ));
            continue;
        }
        let xs = sorts_of(alpha.x());
        let ys = sorts_of(alpha.y());
        for (x, ya) in &fa.map {
            let yb = fb.map.get(x);
            if yb != Some(ya) {
                let mut at = vec![label.clone()];
                at.extend(m.names(&xs, x));
                out.push(Witness::new(
                    "morphism-equal",
                    at,
                    format!(
                        "{:?} vs {:?}",
                        m.names(&ys, ya),
                        yb.map(|y| m.names(&ys, y))
                    ),
                ));
            }
        }
    }
    Ok((out.is_empty(), out))
}

/// The composite's induced table equals the composition of the two tables.
pub fn check_composition(
    models: &[(String, FiniteStructure)],
    alpha: &DefinableFunction,
    beta: &DefinableFunction,
    composite: &DefinableFunction,
) -> Result<Vec<Witness>> {
    let mut out = Vec::new();
    for (label, m) in models {
        let (fa, _) = induced_function(m, alpha)?;
        let (fb, _) = induced_function(m, beta)?;
        let (fc, wc) = induced_function(m, composite)?;
        out.extend(wc);
        for (x, y) in &fa.map {
            let expect = fb.map.get(y);
            if fc.map.get(x) != expect {
                let mut at = vec![label.clone()];
                at.extend(m.names(&sorts_of(alpha.x()), x));
                out.push(Witness::new("composition", at, "composite disagrees with table composition"));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m0, m0_signature};
    use crate::rational::ratio;
    use crate::syntax::{parse_formula, parse_signature};
    use std::sync::Arc;

    fn x() -> Variable {
        Variable::new("x", "S")
    }
    fn y() -> Variable {
        Variable::new("y", "S")
    }
    fn suite() -> Vec<(String, FiniteStructure)> {
        vec![("M0".to_string(), m0())]
    }
    fn f(text: &str) -> Formula {
        parse_formula(&m0_signature(), text).unwrap()
    }
    fn pred(text: &str, ctx: Vec<Variable>) -> DefinablePredicate {
        DefinablePredicate::single(f(text), ctx).unwrap()
    }

    #[test]
    fn zero_set_examples() {
        let m = m0();
        let z = |t: &str| zero_set(&m, &pred(t, vec![x()]), &rational::zero()).unwrap().names(&m);
        assert_eq!(z("R(x)"), vec![vec!["a"]]);
        assert_eq!(z("d(x,e)"), vec![vec!["a"]]);
        assert_eq!(z("0").len(), 3);
    }

    #[test]
    fn criterion_examples() {
        let r = check_syntactic_definability(&suite(), &f("d(x,e)"), &[x()]).unwrap();
        assert!(r.passed());
        let r = check_syntactic_definability(&suite(), &f("R(x)"), &[x()]).unwrap();
        assert!(!r.passed());
        assert_eq!(r.models[0].condition2, ratio(1, 4));
        assert!(r
            .witnesses()
            .iter()
            .any(|w| w.check == "condition2" && w.at == vec!["c"]));
        let r = check_syntactic_definability(&suite(), &f("0"), &[x()]).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn no_metric_is_an_error() {
        let sig = Arc::new(parse_signature("sort S; rel R : S;").unwrap());
        let m = FiniteStructure::from_json(sig.clone(), r#"{"sorts":{"S":["a"]},"relations":{"R":[["a","0"]]}}"#)
            .unwrap();
        let phi = parse_formula(&sig, "R(x)").unwrap();
        assert!(check_syntactic_definability(&[("m".into(), m)], &phi, &[x()]).is_err());
    }

    #[test]
    fn relativized_examples() {
        let m = m0();
        let r = relativized_quantifiers(&m, &f("d(x,e)"), &[x()], &f("R(x)")).unwrap();
        assert_eq!(r.values[0].inf, rational::zero());
        assert_eq!(r.values[0].sup, rational::zero());
        assert!(r.witnesses.is_empty());

        // zero set {a, b}: min(d(x,e), d(x,f(e)))
        let psi = f("min(d(x,e), d(x,f(e)))");
        let r = relativized_quantifiers(&m, &psi, &[x()], &f("R(x)")).unwrap();
        assert_eq!(r.values[0].sup, ratio(1, 4));
        assert!(r.witnesses.is_empty());

        let r = relativized_quantifiers(&m, &f("0"), &[x()], &f("d(x,y)")).unwrap();
        for (i, v) in r.values.iter().enumerate() {
            let a = Assignment::new().with(y(), i);
            assert_eq!(v.inf, eval_exact(&m, &f("inf x:S. d(x,y)"), &a).unwrap());
            assert_eq!(v.sup, eval_exact(&m, &f("sup x:S. d(x,y)"), &a).unwrap());
        }
        assert!(r.witnesses.is_empty());

        assert!(relativized_quantifiers(&m, &f("R(x)"), &[x()], &f("R(x)")).is_err());
    }

    #[test]
    fn bounded_examples() {
        let m = m0();
        assert!(check_bounded_by_formula(&m, &pred("d(x,e)", vec![x()]), &f("d(x,e)"))
            .unwrap()
            .is_empty());
        let w = check_bounded_by_formula(&m, &pred("R(x)", vec![x()]), &f("0")).unwrap();
        assert!(w.iter().any(|w| w.check == "bounds-distance" && w.at == vec!["c"]));
        assert!(check_bounded_by_formula(&m, &pred("0", vec![x()]), &f("0"))
            .unwrap()
            .is_empty());
    }

    fn whole(v: Variable) -> DefinablePredicate {
        DefinablePredicate::single(Formula::zero(), vec![v]).unwrap()
    }

    fn graph_f() -> DefinableFunction {
        DefinableFunction::new(f("d(f(x), y)"), whole(x()), whole(y())).unwrap()
    }

    #[test]
    fn definable_function_examples() {
        let m = m0();
        let r = check_definable_function(&suite(), &graph_f()).unwrap();
        assert!(r.passed());
        let names = r.models[0].1.to_names(&m, &graph_f());
        assert_eq!(names[0], (vec!["a".to_string()], vec!["b".to_string()]));

        let id = DefinableFunction::new(f("d(x,y)"), whole(x()), whole(y())).unwrap();
        let r = check_definable_function(&suite(), &id).unwrap();
        assert!(r.models[0].1.map.iter().all(|(a, b)| a == b));

        let sig = Arc::new(parse_signature("sort S; metric d : S;").unwrap());
        let two = FiniteStructure::from_json(
            sig.clone(),
            r#"{"sorts":{"S":["p","q"]},"metrics":{"d":[["p","q","1"]]}}"#,
        )
        .unwrap();
        let konst = DefinableFunction::new(Formula::zero(), whole(x()), whole(y())).unwrap();
        let r = check_definable_function(&[("two".into(), two)], &konst).unwrap();
        assert!(r.witnesses.iter().any(|w| w.check == "single-valued"));
    }

    #[test]
    fn composition_examples() {
        let m = m0();
        let ff = compose_definable(&graph_f(), &graph_f()).unwrap();
        let (ind, w) = induced_function(&m, &ff).unwrap();
        assert!(w.is_empty());
        assert_eq!(ind.map[&vec![0]], vec![2]);
        assert!(check_composition(&suite(), &graph_f(), &graph_f(), &ff)
            .unwrap()
            .is_empty());

        let id_s = identity(&m0_signature(), &whole(x())).unwrap();
        let g = compose_definable(&graph_f(), &identity(&m0_signature(), &whole(y())).unwrap())
            .unwrap();
        assert!(morphism_equal(&suite(), &graph_f(), &g).unwrap().0);
        let ii = compose_definable(&id_s, &id_s).unwrap();
        assert!(morphism_equal(&suite(), &id_s, &ii).unwrap().0);
    }

    #[test]
    fn morphism_equality_examples() {
        assert!(morphism_equal(&suite(), &graph_f(), &graph_f()).unwrap().0);
        let id_then_f = compose_definable(&identity(&m0_signature(), &whole(x())).unwrap(), &graph_f())
            .unwrap();
        assert!(morphism_equal(&suite(), &graph_f(), &id_then_f).unwrap().0);
        let id = DefinableFunction::new(f("d(x,y)"), whole(x()), whole(y())).unwrap();
        let (eq, w) = morphism_equal(&suite(), &graph_f(), &id).unwrap();
        assert!(!eq);
        assert!(w.iter().any(|w| w.at == vec!["M0", "a"]));
    }

    #[test]
    fn rate_certificate() {
        let m = m0();
        let mut p = DefinablePredicate::new(
            vec![f("R(x)"), f("R(x)/2"), f("R(x)/2 + 1/8")],
            vec![x()],
        )
        .unwrap();
        assert!(p.verify_rate(&m, "M0").unwrap().is_empty());
        assert_eq!(p.rate, Rate::Verified(vec!["M0".into()]));
        let mut bad = DefinablePredicate::new(vec![f("0"), f("1"), f("0")], vec![x()]).unwrap();
        assert!(!bad.verify_rate(&m, "M0").unwrap().is_empty());
        assert_eq!(bad.rate, Rate::Declared);
    }
}
