//! Imaginary sorts: countable products (truncated), definable-set sorts,
//! canonical parameters and finite unions, each with its generated axioms.

mod flim;
mod spec;

pub use flim::{build_canparam_tower, flim, Flim, TowerLevel, TowerResult};
pub use spec::{parse_eq_spec, run_eq_spec, EqProgram, EqStatement, RawSort};

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::definability::{check_syntactic_definability, sorts_of, zero_set, DefinablePredicate};
use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::{eval_exact, formula_table, tuples, Assignment, FiniteStructure};
use crate::syntax::{fresh_copies, fresh_name, Formula, Signature, Term, Variable};

pub const PRODUCT_CLAUSE: &str = "closure under countable products";
pub const DEFSET_CLAUSE: &str = "closure under definable sets";
pub const CANPARAM_CLAUSE: &str = "closure under canonical parameters";
pub const UNION_CLAUSE: &str = "closure under finite unions";

/// A sentence added by an eq construction, with its value on the expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedAxiom {
    pub label: String,
    pub clause: &'static str,
    /// How an ambiguous displayed axiom was read, when it was.
    pub reading: Option<&'static str>,
    pub sentence: Formula,
    pub value: Rational,
}

impl GeneratedAxiom {
    pub fn holds(&self) -> bool {
        self.value == rational::zero()
    }
}

/// A structure expanded by one or more new sorts.
#[derive(Debug, Clone)]
pub struct EqExpansion {
    pub base: FiniteStructure,
    pub structure: FiniteStructure,
    /// The requested sort; helper sorts built on the way come first in
    /// `new_sorts`.
    pub sort: String,
    pub new_sorts: Vec<String>,
    pub axioms: Vec<GeneratedAxiom>,
    /// Bound on the distance to the untruncated product metric.
    pub truncation: Option<Rational>,
    /// For canonical-parameter and union sorts: the function on the `x̄`
    /// context that each element names, as a table in tuple order.
    pub slices: Vec<Vec<Rational>>,
}

impl EqExpansion {
    pub fn verified(&self) -> bool {
        self.axioms.iter().all(GeneratedAxiom::holds)
    }

    pub fn failures(&self) -> Vec<Witness> {
        self.axioms
            .iter()
            .filter(|a| !a.holds())
            .map(|a| {
                Witness::new(
                    "generated-axiom",
                    vec![a.label.clone()],
                    format!("{}: value {}", a.clause, format_ratio(&a.value)),
                )
            })
            .collect()
    }

    pub fn metric(&self) -> &str {
        self.structure
            .signature()
            .metric_name(&self.sort)
            .expect("eq sorts carry a metric")
    }

    /// Lists the generated axioms as text, one per line.
    pub fn axiom_listing(&self) -> String {
        let mut out = String::new();
        for a in &self.axioms {
            out.push_str(&format!("// {} ({})", a.label, a.clause));
            if let Some(r) = a.reading {
                out.push_str(&format!(" reading: {r}"));
            }
            out.push_str(&format!("; value {}\naxiom {};\n", format_ratio(&a.value), a.sentence));
        }
        out
    }
}

pub(crate) fn metric_name_for(sort: &str) -> String {
    format!("d_{sort}")
}

fn tuple_name(names: Vec<String>) -> String {
    if names.len() == 1 {
        names.into_iter().next().unwrap()
    } else {
        format!("<{}>", names.join(","))
    }
}

fn var(v: &Variable) -> Term {
    Term::Var(v.clone())
}

fn dist(d: &str, a: Term, b: Term) -> Formula {
    Formula::atom(d, vec![a, b])
}

/// Adds `sort` with its metric and the given function symbols.
fn extend(
    sig: &Signature,
    sort: &str,
    functions: &[(String, Vec<String>, String)],
) -> Result<Signature> {
    let mut out = sig.clone();
    if out.has_sort(sort) {
        return Err(Error::Check(format!("sort `{sort}` already exists")));
    }
    out.add_sort(sort)?;
    out.add_metric(&metric_name_for(sort), sort)?;
    for (name, dom, cod) in functions {
        let dom: Vec<&str> = dom.iter().map(String::as_str).collect();
        out.add_function(name, &dom, cod)?;
    }
    Ok(out)
}

fn evaluate(
    m: &FiniteStructure,
    label: String,
    clause: &'static str,
    reading: Option<&'static str>,
    sentence: Formula,
) -> Result<GeneratedAxiom> {
    m.signature().check_formula(&sentence)?;
    let value = eval_exact(m, &sentence, &Assignment::new())?;
    Ok(GeneratedAxiom {
        label,
        clause,
        reading,
        sentence,
        value,
    })
}

fn halve_times(f: Formula, k: usize) -> Formula {
    (0..k).fold(f, |f, _| Formula::half(f))
}

/// Product of the first `depth` sorts, with metric `Σ_{i≤N} d_i/2^i` and
/// both axioms at every level `n ≤ N`.
pub fn build_product(
    m: &FiniteStructure,
    name: &str,
    sorts: &[String],
    depth: usize,
) -> Result<EqExpansion> {
    if depth == 0 || depth > sorts.len() {
        return Err(Error::Check(format!(
            "product depth {depth} needs 1 ≤ N ≤ {} supplied sorts",
            sorts.len()
        )));
    }
    let sig = m.signature();
    let factors = &sorts[..depth];
    let metrics = factors
        .iter()
        .map(|s| sig.metric_name(s).map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let proj: Vec<String> = (1..=depth).map(|i| format!("{name}_pi{i}")).collect();
    let funcs: Vec<_> = proj
        .iter()
        .zip(factors)
        .map(|(p, s)| (p.clone(), vec![name.to_string()], s.clone()))
        .collect();
    let new_sig = Arc::new(extend(sig, name, &funcs)?);
    let dims = m.dims(factors)?;
    let elems: Vec<Vec<usize>> = tuples(&dims).collect();
    let mut out = m.with_signature(new_sig.clone())?;
    out.add_carrier(
        name,
        elems.iter().map(|t| tuple_name(m.names(factors, t))).collect(),
    )?;
    for (i, p) in proj.iter().enumerate() {
        out.set_function(p, |a| elems[a[0]][i])?;
    }
    let weights: Vec<Rational> = (1..=depth).map(|i| rational::pow2_inv(i as u32)).collect();
    let mut metric = Vec::with_capacity(elems.len() * elems.len());
    for a in &elems {
        for b in &elems {
            let mut s = rational::zero();
            for i in 0..depth {
                s += m.distance(&factors[i], a[i], b[i])? * &weights[i];
            }
            metric.push(s);
        }
    }
    let mut it = metric.into_iter();
    out.set_relation(&metric_name_for(name), |_| it.next().expect("sized"))?;

    let dp = metric_name_for(name);
    let y = Variable::new("y", name);
    let y2 = Variable::new("y'", name);
    let mut axioms = Vec::new();
    for n in 1..=depth {
        let xs: Vec<Variable> = (1..=n)
            .map(|i| Variable::new(&format!("x{i}"), &factors[i - 1]))
            .collect();
        let covering = Formula::sup(
            xs.clone(),
            Formula::inf(
                vec![y.clone()],
                Formula::max_all(
                    (0..n)
                        .map(|i| {
                            dist(&metrics[i], Term::app(&proj[i], vec![var(&y)]), var(&xs[i]))
                        })
                        .collect(),
                ),
            ),
        );
        axioms.push(evaluate(&out, format!("{name}: covering n={n}"), PRODUCT_CLAUSE, None, covering)?);
        let partial = Formula::add_all(
            (0..n)
                .map(|i| {
                    halve_times(
                        dist(
                            &metrics[i],
                            Term::app(&proj[i], vec![var(&y)]),
                            Term::app(&proj[i], vec![var(&y2)]),
                        ),
                        i + 1,
                    )
                })
                .collect(),
        );
        let truncation = Formula::sup(
            vec![y.clone(), y2.clone()],
            Formula::monus(
                Formula::abs_diff(dist(&dp, var(&y), var(&y2)), partial),
                Formula::constant(rational::pow2_inv(n as u32)),
            ),
        );
        axioms.push(evaluate(
            &out,
            format!("{name}: metric n={n}"),
            PRODUCT_CLAUSE,
            None,
            truncation,
        )?);
    }
    Ok(EqExpansion {
        base: m.clone(),
        structure: out,
        sort: name.to_string(),
        new_sorts: vec![name.to_string()],
        axioms,
        truncation: Some(rational::pow2_inv(depth as u32)),
        slices: Vec::new(),
    })
}

/// The sort `Z(A)` with coordinate maps `f_i` and the max-metric.
pub fn build_defset_sort(
    m: &FiniteStructure,
    name: &str,
    a: &Formula,
    ctx: &[Variable],
) -> Result<EqExpansion> {
    if ctx.is_empty() {
        return Err(Error::Check("a definable set needs a nonempty context".into()));
    }
    let rep = check_syntactic_definability(&[("M".to_string(), m.clone())], a, ctx)?;
    if !rep.passed() {
        let m0 = &rep.models[0];
        let mut failed = Vec::new();
        if m0.condition1 != rational::zero() {
            failed.push(format!("condition (1) has value {}", format_ratio(&m0.condition1)));
        }
        if m0.condition2 != rational::zero() {
            failed.push(format!("condition (2) has value {}", format_ratio(&m0.condition2)));
        }
        if failed.is_empty() {
            failed.push("the distance oracle disagrees".to_string());
        }
        let which = failed.join(", ");
        return Err(Error::Check(format!(
            "{DEFSET_CLAUSE}: `{a}` fails the syntactic definability criterion: {which}"
        )));
    }
    let sorts = sorts_of(ctx);
    let p = DefinablePredicate::single(a.clone(), ctx.to_vec())?;
    let z = zero_set(m, &p, &rational::zero())?;
    if z.members.is_empty() {
        return Err(Error::Check(format!("{DEFSET_CLAUSE}: the zero set of `{a}` is empty")));
    }
    let sig = m.signature();
    let metrics = sorts
        .iter()
        .map(|s| sig.metric_name(s).map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let fs: Vec<String> = (1..=ctx.len()).map(|i| format!("{name}_f{i}")).collect();
    let funcs: Vec<_> = fs
        .iter()
        .zip(&sorts)
        .map(|(f, s)| (f.clone(), vec![name.to_string()], s.clone()))
        .collect();
    let mut out = m.with_signature(Arc::new(extend(sig, name, &funcs)?))?;
    let members = z.members.clone();
    out.add_carrier(
        name,
        members.iter().map(|t| tuple_name(m.names(&sorts, t))).collect(),
    )?;
    for (i, f) in fs.iter().enumerate() {
        out.set_function(f, |u| members[u[0]][i])?;
    }
    let mut metric = Vec::new();
    for u in &members {
        for v in &members {
            metric.push(m.tuple_distance(&sorts, u, v)?);
        }
    }
    let mut it = metric.into_iter();
    out.set_relation(&metric_name_for(name), |_| it.next().expect("sized"))?;

    let mut avoid = BTreeSet::new();
    a.all_variable_names(&mut avoid);
    for v in ctx {
        avoid.insert(v.name.clone());
    }
    let y = Variable::new(&fresh_name("y", &avoid), name);
    let zero_axiom = Formula::sup(
        ctx.to_vec(),
        Formula::abs_diff(
            a.clone(),
            Formula::inf(
                vec![y.clone()],
                Formula::max_all(
                    (0..ctx.len())
                        .map(|i| dist(&metrics[i], var(&ctx[i]), Term::app(&fs[i], vec![var(&y)])))
                        .collect(),
                ),
            ),
        ),
    );
    let u = Variable::new("u", name);
    let v = Variable::new("v", name);
    let metric_axiom = Formula::sup(
        vec![u.clone(), v.clone()],
        Formula::abs_diff(
            dist(&metric_name_for(name), var(&u), var(&v)),
            Formula::max_all(
                (0..ctx.len())
                    .map(|i| {
                        dist(
                            &metrics[i],
                            Term::app(&fs[i], vec![var(&u)]),
                            Term::app(&fs[i], vec![var(&v)]),
                        )
                    })
                    .collect(),
            ),
        ),
    );
    let reading = Some("∧ read as max");
    let axioms = vec![
        evaluate(&out, format!("{name}: zero set"), DEFSET_CLAUSE, reading, zero_axiom)?,
        evaluate(&out, format!("{name}: metric"), DEFSET_CLAUSE, reading, metric_axiom)?,
    ];
    Ok(EqExpansion {
        base: m.clone(),
        structure: out,
        sort: name.to_string(),
        new_sorts: vec![name.to_string()],
        axioms,
        truncation: None,
        slices: Vec::new(),
    })
}

/// A canonical-parameter request `φ(x̄, ȳ)` naming the new sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanParamSpec {
    pub name: String,
    pub formula: Formula,
    pub x: Vec<Variable>,
    pub y: Vec<Variable>,
}

impl CanParamSpec {
    pub fn new(name: &str, formula: Formula, x: Vec<Variable>, y: Vec<Variable>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Check(format!(
                "canonical parameters of `{formula}` need a nonempty parameter context"
            )));
        }
        for v in formula.free_variables() {
            if !x.contains(&v) && !y.contains(&v) {
                return Err(Error::Context(format!(
                    "`{}` is free in `{formula}` but in neither context",
                    v.name
                )));
            }
        }
        for v in &y {
            if x.contains(v) {
                return Err(Error::Context(format!("`{}` is in both contexts", v.name)));
            }
        }
        Ok(CanParamSpec {
            name: name.to_string(),
            formula,
            x,
            y,
        })
    }
}

/// `φ`'s slices: for each `ȳ` tuple, the table of `φ(·, ȳ)` over `x̄`.
fn slices(m: &FiniteStructure, spec: &CanParamSpec) -> Result<(Vec<Vec<usize>>, Vec<Vec<Rational>>)> {
    let mut ctx = spec.x.clone();
    ctx.extend(spec.y.iter().cloned());
    let table = formula_table(m, &spec.formula, &ctx)?;
    let xdims = m.dims(&sorts_of(&spec.x))?;
    let ydims = m.dims(&sorts_of(&spec.y))?;
    let ys: Vec<Vec<usize>> = tuples(&ydims).collect();
    let out = ys
        .iter()
        .map(|yt| {
            tuples(&xdims)
                .map(|mut xt| {
                    xt.extend(yt.iter().copied());
                    table.get(&xt).clone()
                })
                .collect()
        })
        .collect();
    Ok((ys, out))
}

pub(crate) fn sup_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(p, q)| rational::abs_diff(p, q))
        .max()
        .unwrap_or_else(rational::zero)
}

/// Groups equal slices; returns (class of each input, representative index of
/// each class).
fn classes(slices: &[Vec<Rational>]) -> (Vec<usize>, Vec<usize>) {
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = Vec::with_capacity(slices.len());
    for (i, s) in slices.iter().enumerate() {
        match reps.iter().position(|&r| slices[r] == *s) {
            Some(c) => class_of.push(c),
            None => {
                class_of.push(reps.len());
                reps.push(i);
            }
        }
    }
    (class_of, reps)
}

pub(crate) fn projection_name(sort: &str) -> String {
    format!("{sort}_pi")
}

const CANPARAM_METRIC_READING: &str =
    "|φ(x̄,ȳ) − φ(x̄,ȳ')| inside the sup (absolute value added)";
const CANPARAM_SURJECTIVITY_READING: &str = "∀z ∃ȳ d_φ(π_φ(ȳ), z)";

/// Quotient of the parameter tuples by `ρ(b, b') = sup_x̄ |φ(x̄,b) − φ(x̄,b')|`.
pub fn build_canparam(m: &FiniteStructure, spec: &CanParamSpec) -> Result<EqExpansion> {
    let name = spec.name.as_str();
    let (ys, sl) = slices(m, spec)?;
    let (class_of, reps) = classes(&sl);
    let ysorts = sorts_of(&spec.y);
    let pi = projection_name(name);
    let sig = m.signature();
    let mut out = m.with_signature(Arc::new(extend(
        sig,
        name,
        &[(pi.clone(), ysorts.clone(), name.to_string())],
    )?))?;
    out.add_carrier(
        name,
        reps.iter().map(|&r| tuple_name(m.names(&ysorts, &ys[r]))).collect(),
    )?;
    let ydims = m.dims(&ysorts)?;
    out.set_function(&pi, |t| class_of[crate::semantics::encode(&ydims, t)])?;
    out.set_relation(&metric_name_for(name), |t| {
        sup_distance(&sl[reps[t[0]]], &sl[reps[t[1]]])
    })?;

    let dc = metric_name_for(name);
    let mut avoid = BTreeSet::new();
    spec.formula.all_variable_names(&mut avoid);
    for v in spec.x.iter().chain(&spec.y) {
        avoid.insert(v.name.clone());
    }
    let y2 = fresh_copies(&spec.y, &mut avoid);
    let pairs: Vec<(Variable, Variable)> = spec.y.iter().cloned().zip(y2.iter().cloned()).collect();
    let phi2 = spec.formula.rename_free(&pairs);
    let py = Term::app(&pi, spec.y.iter().map(var).collect());
    let py2 = Term::app(&pi, y2.iter().map(var).collect());
    let mut both = spec.y.clone();
    both.extend(y2.iter().cloned());
    let metric_axiom = Formula::sup(
        both,
        Formula::abs_diff(
            dist(&dc, py.clone(), py2),
            Formula::sup(spec.x.clone(), Formula::abs_diff(spec.formula.clone(), phi2)),
        ),
    );
    let z = Variable::new(&fresh_name("z", &avoid), name);
    let surjective = Formula::sup(
        vec![z.clone()],
        Formula::inf(spec.y.clone(), dist(&dc, py, var(&z))),
    );
    let axioms = vec![
        evaluate(
            &out,
            format!("{name}: metric"),
            CANPARAM_CLAUSE,
            Some(CANPARAM_METRIC_READING),
            metric_axiom,
        )?,
        evaluate(
            &out,
            format!("{name}: surjectivity"),
            CANPARAM_CLAUSE,
            Some(CANPARAM_SURJECTIVITY_READING),
            surjective,
        )?,
    ];
    Ok(EqExpansion {
        base: m.clone(),
        structure: out,
        sort: name.to_string(),
        new_sorts: vec![name.to_string()],
        axioms,
        truncation: None,
        slices: reps.iter().map(|&r| sl[r].clone()).collect(),
    })
}

pub(crate) fn injection_name(union: &str, part: &str) -> String {
    format!("{union}_in_{part}")
}

/// Union of canonical-parameter sorts sharing `x̄`; points at
/// cross-distance 0 are identified. Missing parameter sorts are built first.
pub fn build_union(m: &FiniteStructure, name: &str, specs: &[CanParamSpec]) -> Result<EqExpansion> {
    let Some(first) = specs.first() else {
        return Err(Error::Check("a union needs at least one part".into()));
    };
    for s in specs {
        if s.x != first.x {
            return Err(Error::Context(format!(
                "`{}` and `{}` do not share the x̄ context",
                first.name, s.name
            )));
        }
    }
    let mut cur = m.clone();
    let mut axioms = Vec::new();
    let mut new_sorts = Vec::new();
    let mut part_slices: Vec<Vec<Vec<Rational>>> = Vec::new();
    for s in specs {
        if cur.signature().has_sort(&s.name) {
            let (_, sl) = slices(&cur, s)?;
            let (_, reps) = classes(&sl);
            if cur.size(&s.name)? != reps.len() {
                return Err(Error::Check(format!(
                    "existing sort `{}` is not the canonical-parameter sort of `{}`",
                    s.name, s.formula
                )));
            }
            part_slices.push(reps.iter().map(|&r| sl[r].clone()).collect());
        } else {
            let e = build_canparam(&cur, s)?;
            axioms.extend(e.axioms);
            new_sorts.push(s.name.clone());
            part_slices.push(e.slices);
            cur = e.structure;
        }
    }
    // union elements: first occurrence of each slice over all parts
    let mut elems: Vec<(usize, usize)> = Vec::new();
    let mut union_slices: Vec<Vec<Rational>> = Vec::new();
    let mut inj: Vec<Vec<usize>> = Vec::new();
    for (j, ps) in part_slices.iter().enumerate() {
        let mut map = Vec::new();
        for (c, s) in ps.iter().enumerate() {
            match union_slices.iter().position(|u| u == s) {
                Some(i) => map.push(i),
                None => {
                    map.push(union_slices.len());
                    union_slices.push(s.clone());
                    elems.push((j, c));
                }
            }
        }
        inj.push(map);
    }
    let funcs: Vec<_> = specs
        .iter()
        .map(|s| (injection_name(name, &s.name), vec![s.name.clone()], name.to_string()))
        .collect();
    let mut out = cur.with_signature(Arc::new(extend(cur.signature(), name, &funcs)?))?;
    out.add_carrier(
        name,
        elems
            .iter()
            .map(|&(j, c)| format!("{}.{}", specs[j].name, cur.element_name(&specs[j].name, c)))
            .collect(),
    )?;
    for (j, s) in specs.iter().enumerate() {
        out.set_function(&injection_name(name, &s.name), |t| inj[j][t[0]])?;
    }
    out.set_relation(&metric_name_for(name), |t| {
        sup_distance(&union_slices[t[0]], &union_slices[t[1]])
    })?;

    let du = metric_name_for(name);
    let u = Variable::new("u", name);
    let covering = Formula::sup(
        vec![u.clone()],
        Formula::min_all(
            specs
                .iter()
                .map(|s| {
                    let w = Variable::new("w", &s.name);
                    Formula::inf(
                        vec![w.clone()],
                        dist(&du, var(&u), Term::app(&injection_name(name, &s.name), vec![var(&w)])),
                    )
                })
                .collect(),
        ),
    );
    axioms.push(evaluate(&out, format!("{name}: covering"), UNION_CLAUSE, None, covering)?);
    for sj in specs {
        for sk in specs {
            let mut avoid = BTreeSet::new();
            sj.formula.all_variable_names(&mut avoid);
            sk.formula.all_variable_names(&mut avoid);
            for v in sj.x.iter().chain(&sj.y).chain(&sk.y) {
                avoid.insert(v.name.clone());
            }
            let mut taken: BTreeSet<String> = sj.x.iter().chain(&sj.y).map(|v| v.name.clone()).collect();
            taken.extend(avoid.iter().cloned());
            let zs: Vec<Variable> = sk
                .y
                .iter()
                .map(|v| {
                    let n = fresh_name(&v.name, &taken);
                    taken.insert(n.clone());
                    Variable::new(&n, &v.sort)
                })
                .collect();
            let pairs: Vec<_> = sk.y.iter().cloned().zip(zs.iter().cloned()).collect();
            let phik = sk.formula.rename_free(&pairs);
            let lhs = dist(
                &du,
                Term::app(
                    &injection_name(name, &sj.name),
                    vec![Term::app(&projection_name(&sj.name), sj.y.iter().map(var).collect())],
                ),
                Term::app(
                    &injection_name(name, &sk.name),
                    vec![Term::app(&projection_name(&sk.name), zs.iter().map(var).collect())],
                ),
            );
            let mut vars = sj.y.clone();
            vars.extend(zs.iter().cloned());
            let cross = Formula::sup(
                vars,
                Formula::abs_diff(
                    lhs,
                    Formula::sup(sj.x.clone(), Formula::abs_diff(sj.formula.clone(), phik)),
                ),
            );
            axioms.push(evaluate(
                &out,
                format!("{name}: cross-distance {} {}", sj.name, sk.name),
                UNION_CLAUSE,
                Some("parameters quantified through the projections π_j"),
                cross,
            )?);
        }
    }
    new_sorts.push(name.to_string());
    Ok(EqExpansion {
        base: m.clone(),
        structure: out,
        sort: name.to_string(),
        new_sorts,
        axioms,
        truncation: None,
        slices: union_slices,
    })
}

/// One sentence evaluated before and after an expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConservativeRow {
    pub sentence: Formula,
    pub before: Rational,
    pub after: Rational,
}

#[derive(Debug, Clone)]
pub struct ConservativeReport {
    pub rows: Vec<ConservativeRow>,
    pub axioms: Vec<GeneratedAxiom>,
}

impl ConservativeReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.before == r.after) && self.axioms.iter().all(GeneratedAxiom::holds)
    }

    pub fn witnesses(&self) -> Vec<Witness> {
        let mut out: Vec<Witness> = self
            .rows
            .iter()
            .filter(|r| r.before != r.after)
            .map(|r| {
                Witness::new(
                    "conservative",
                    vec![r.sentence.to_string()],
                    format!("{} before, {} after", format_ratio(&r.before), format_ratio(&r.after)),
                )
            })
            .collect();
        out.extend(self.axioms.iter().filter(|a| !a.holds()).map(|a| {
            Witness::new("generated-axiom", vec![a.label.clone()], format_ratio(&a.value))
        }));
        out
    }
}

/// Base-language sentences keep their values on the expansion, and the
/// generated axioms hold there.
pub fn check_conservative(
    m: &FiniteStructure,
    expansion: &EqExpansion,
    sentences: &[Formula],
) -> Result<ConservativeReport> {
    let none = Assignment::new();
    let mut rows = Vec::new();
    for s in sentences {
        m.signature().check_formula(s)?;
        if !s.is_sentence() {
            return Err(Error::Context(format!("`{s}` is not a sentence")));
        }
        rows.push(ConservativeRow {
            sentence: s.clone(),
            before: eval_exact(m, s, &none)?,
            after: eval_exact(&expansion.structure, s, &none)?,
        });
    }
    let axioms = expansion
        .axioms
        .iter()
        .map(|a| {
            let mut a = a.clone();
            a.value = eval_exact(&expansion.structure, &a.sentence, &none)?;
            Ok(a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConservativeReport { rows, axioms })
}

/// Result of searching, for each parameter `ā`, a base-language parameter
/// `b̄` with `sup_x̄ |φ(x̄,ā) − ψ(x̄,b̄)| ≤ ε`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableReport {
    pub holds: bool,
    /// `(ā, best b̄, its distance)` in tuple order of `ā`.
    pub choices: Vec<(Vec<String>, Vec<String>, Rational)>,
    pub witnesses: Vec<Witness>,
}

/// Exhaustive search for stable-embeddedness witnesses.
#[allow(clippy::too_many_arguments)]
pub fn check_stably_embedded(
    m: &FiniteStructure,
    sub: &Signature,
    epsilon: &Rational,
    phi: &Formula,
    x: &[Variable],
    y: &[Variable],
    psi: &Formula,
    z: &[Variable],
) -> Result<StableReport> {
    for v in x.iter().chain(z) {
        if !sub.has_sort(&v.sort) {
            return Err(Error::Context(format!(
                "`{}` has sort `{}` outside the sublanguage",
                v.name, v.sort
            )));
        }
    }
    sub.check_formula(psi)?;
    let (_, phi_slices) = slices(m, &CanParamSpec::new("_", phi.clone(), x.to_vec(), y.to_vec())?)?;
    let psi_slices = if z.is_empty() {
        vec![formula_table(m, psi, x)?.data]
    } else {
        slices(m, &CanParamSpec::new("_", psi.clone(), x.to_vec(), z.to_vec())?)?.1
    };
    let ysorts = sorts_of(y);
    let zsorts = sorts_of(z);
    let ztuples: Vec<Vec<usize>> = tuples(&m.dims(&zsorts)?).collect();
    let mut choices = Vec::new();
    let mut witnesses = Vec::new();
    for (a, sa) in tuples(&m.dims(&ysorts)?).zip(&phi_slices) {
        let (bi, best) = psi_slices
            .iter()
            .enumerate()
            .map(|(i, sb)| (i, sup_distance(sa, sb)))
            .min_by(|p, q| p.1.cmp(&q.1))
            .expect("carriers are nonempty");
        let an = m.names(&ysorts, &a);
        if best > *epsilon {
            witnesses.push(Witness::new(
                "stably-embedded",
                an.clone(),
                format!(
                    "closest base parameter is at distance {} > {}",
                    format_ratio(&best),
                    format_ratio(epsilon)
                ),
            ));
        }
        choices.push((an, m.names(&zsorts, &ztuples[bi]), best));
    }
    Ok(StableReport {
        holds: witnesses.is_empty(),
        choices,
        witnesses,
    })
}
