//! The quotient algebras `∼_A`, the canonical interpretation of a theory in
//! its category of definable sets, and interpretations between theories.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{DefCategory, Mor, Obj, Suite};
use crate::definability::{zero_set, DefinablePredicate};
use crate::error::{Error, Result};
use crate::rational::{self, abs_diff, Rational};
use crate::semantics::{eval_exact, formula_table, tuples, Assignment, FiniteStructure};
use crate::syntax::{fresh_name, Formula, Signature, Term, Theory, Variable};

/// `sup` over the models and over `Z(A)` of `|φ − ψ|`; `φ ∼_A ψ` exactly
/// when this is 0.
pub fn sim_a(models: &[(String, FiniteStructure)], a: &DefinablePredicate, phi: &Formula, psi: &Formula) -> Result<Rational> {
    let mut best = rational::zero();
    for (_, m) in models {
        let z = zero_set(m, a, &rational::zero())?;
        let tp = formula_table(m, phi, &a.context)?;
        let tq = formula_table(m, psi, &a.context)?;
        for t in &z.members {
            let d = abs_diff(tp.get(t), tq.get(t));
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Class index (the first equivalent formula) for each formula.
pub fn quotient_classes(
    models: &[(String, FiniteStructure)],
    a: &DefinablePredicate,
    formulas: &[Formula],
) -> Result<Vec<usize>> {
    let mut class: Vec<usize> = Vec::with_capacity(formulas.len());
    for (i, f) in formulas.iter().enumerate() {
        let mut c = i;
        for j in 0..i {
            if class[j] == j && sim_a(models, a, &formulas[j], f)? == rational::zero() {
                c = j;
                break;
            }
        }
        class.push(c);
    }
    Ok(class)
}

#[derive(Debug, Clone)]
pub struct CanonicalInterpretation {
    /// Sort ↦ the object `[d(x,x)]`.
    pub sorts: BTreeMap<String, Obj>,
    /// Function ↦ the morphism with graph `d(f(x̄), y)`.
    pub functions: BTreeMap<String, Mor>,
    /// Relation ↦ itself, as an element of the algebra of its context object.
    pub relations: BTreeMap<String, (Obj, Formula)>,
}

fn arg_vars(sorts: &[String]) -> Vec<Variable> {
    sorts
        .iter()
        .enumerate()
        .map(|(i, s)| Variable::new(&format!("x{}", i + 1), s))
        .collect()
}

/// The object `max_i d(x_i, x_i)` for a list of sorts (the terminal object
/// when empty).
fn context_object(cat: &mut DefCategory, sorts: &[String]) -> Result<Obj> {
    if sorts.is_empty() {
        return cat.terminal();
    }
    let name = sorts.join("_x_");
    if let Some(o) = cat.object_named(&name) {
        return Ok(o);
    }
    let sig = cat.theory.signature.clone();
    let xs = arg_vars(sorts);
    let f = Formula::max_all(
        xs.iter()
            .map(|x| Ok(Formula::atom(sig.metric_name(&x.sort)?, vec![Term::Var(x.clone()), Term::Var(x.clone())])))
            .collect::<Result<Vec<_>>>()?,
    );
    cat.add_object(&name, f, xs)
}

/// Builds `Def(L,T)` over the suite with the images of every sort, function
/// and relation symbol.
pub fn canonical_interpretation(theory: Theory, suite: Suite) -> Result<(DefCategory, CanonicalInterpretation)> {
    if !theory.is_metric() {
        return Err(Error::Check("the canonical interpretation needs a metric theory".into()));
    }
    let sig = theory.signature.clone();
    let mut cat = super::build_defcat(theory, suite, &[("1".into(), Formula::zero(), Vec::new())])?;
    let mut out = CanonicalInterpretation {
        sorts: BTreeMap::new(),
        functions: BTreeMap::new(),
        relations: BTreeMap::new(),
    };
    for s in sig.sorts() {
        let o = context_object(&mut cat, std::slice::from_ref(s))?;
        out.sorts.insert(s.clone(), o);
    }
    for f in sig.functions() {
        let src = context_object(&mut cat, &f.domain)?;
        let tgt = out.sorts[&f.codomain];
        let xs = arg_vars(&f.domain);
        let y = Variable::new("y", &f.codomain);
        let graph = Formula::atom(
            sig.metric_name(&f.codomain)?,
            vec![
                Term::app(&f.name, xs.iter().cloned().map(Term::Var).collect()),
                Term::Var(y.clone()),
            ],
        );
        let m = cat
            .add_morphism(&f.name, src, tgt, graph, xs, vec![y])
            .map_err(|e| Error::Check(format!("graph of `{}` is not a definable function: {e}", f.name)))?;
        out.functions.insert(f.name.clone(), m);
    }
    for r in sig.relations() {
        if r.metric_for.is_some() {
            continue;
        }
        let o = context_object(&mut cat, &r.domain)?;
        let xs = arg_vars(&r.domain);
        out.relations.insert(
            r.name.clone(),
            (o, Formula::atom(&r.name, xs.into_iter().map(Term::Var).collect())),
        );
    }
    Ok((cat, out))
}

/// `I : T → T'`: sorts to sorts, function symbols to terms and relation
/// symbols to formulas, each over a parameter list.
#[derive(Debug, Clone)]
pub struct InterpretationMap {
    pub source: Arc<Signature>,
    pub target: Arc<Signature>,
    pub sorts: BTreeMap<String, String>,
    pub functions: BTreeMap<String, (Vec<Variable>, Term)>,
    /// Metric symbols left out default to the metric of the image sort.
    pub relations: BTreeMap<String, (Vec<Variable>, Formula)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportRow {
    pub sentence: String,
    pub translated: String,
    pub model: String,
    /// Value of `I(σ)` in `M'`.
    pub direct: Rational,
    /// Value of `σ` in `forgetful(I, M')`.
    pub via_forgetful: Rational,
    /// Value of `σ` on the source suite (max), when one is given.
    pub source: Option<Rational>,
}

impl TransportRow {
    pub fn holds(&self) -> bool {
        self.direct == self.via_forgetful
            && match &self.source {
                Some(v) if *v == rational::zero() => self.direct == rational::zero(),
                _ => true,
            }
    }
}

fn params_of(sorts: &[String], target: &BTreeMap<String, String>) -> Result<Vec<Variable>> {
    sorts
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = target
                .get(s)
                .ok_or_else(|| Error::Sort(format!("interpretation has no image for sort `{s}`")))?;
            Ok(Variable::new(&format!("v{}", i + 1), t))
        })
        .collect()
}

/// `f(v̄)[t̄/v̄]`, simultaneous.
fn instantiate_term(t: &Term, params: &[Variable], args: &[Term]) -> Term {
    let mut avoid = BTreeSet::new();
    for a in args {
        avoid.extend(a.free_variables().into_iter().map(|v| v.name));
    }
    avoid.extend(t.free_variables().into_iter().map(|v| v.name));
    avoid.extend(params.iter().map(|v| v.name.clone()));
    let mut temps = Vec::new();
    let mut out = t.clone();
    for p in params {
        let n = fresh_name(&format!("{}_tmp", p.name), &avoid);
        avoid.insert(n.clone());
        let tv = Variable::new(&n, &p.sort);
        out = out.substitute(p, &Term::Var(tv.clone()));
        temps.push(tv);
    }
    for (tv, a) in temps.iter().zip(args) {
        out = out.substitute(tv, a);
    }
    out
}

fn instantiate_formula(f: &Formula, params: &[Variable], args: &[Term]) -> Formula {
    let mut avoid = BTreeSet::new();
    f.all_variable_names(&mut avoid);
    for a in args {
        avoid.extend(a.free_variables().into_iter().map(|v| v.name));
    }
    avoid.extend(params.iter().map(|v| v.name.clone()));
    let mut temps = Vec::new();
    let mut out = f.clone();
    for p in params {
        let n = fresh_name(&format!("{}_tmp", p.name), &avoid);
        avoid.insert(n.clone());
        let tv = Variable::new(&n, &p.sort);
        out = out.subst_unchecked(p, &Term::Var(tv.clone()));
        temps.push(tv);
    }
    for (tv, a) in temps.iter().zip(args) {
        out = out.subst_unchecked(tv, a);
    }
    out
}

impl InterpretationMap {
    /// Checks sorts of every image against both signatures.
    pub fn new(
        source: Arc<Signature>,
        target: Arc<Signature>,
        sorts: BTreeMap<String, String>,
        functions: BTreeMap<String, (Vec<Variable>, Term)>,
        relations: BTreeMap<String, (Vec<Variable>, Formula)>,
    ) -> Result<InterpretationMap> {
        for s in source.sorts() {
            let t = sorts
                .get(s)
                .ok_or_else(|| Error::Sort(format!("interpretation has no image for sort `{s}`")))?;
            if !target.has_sort(t) {
                return Err(Error::Sort(format!("image `{t}` of sort `{s}` is not a target sort")));
            }
        }
        let expect = |params: &[Variable], domain: &[String], what: &str| -> Result<()> {
            let want = params_of(domain, &sorts)?;
            if params.len() != want.len() || params.iter().zip(&want).any(|(p, w)| p.sort != w.sort) {
                return Err(Error::Sort(format!("parameters of the image of `{what}` do not match its domain")));
            }
            Ok(())
        };
        for f in source.functions() {
            let (params, t) = functions
                .get(&f.name)
                .ok_or_else(|| Error::Context(format!("interpretation has no image for function `{}`", f.name)))?;
            expect(params, &f.domain, &f.name)?;
            let s = target.sort_of_term(t)?;
            if s != sorts[&f.codomain] {
                return Err(Error::Sort(format!(
                    "image of `{}` has sort {s}, expected {}",
                    f.name, sorts[&f.codomain]
                )));
            }
            if t.free_variables().iter().any(|v| !params.contains(v)) {
                return Err(Error::Context(format!("image of `{}` has a variable outside its parameters", f.name)));
            }
        }
        for r in source.relations() {
            match relations.get(&r.name) {
                Some((params, phi)) => {
                    expect(params, &r.domain, &r.name)?;
                    target.check_formula(phi)?;
                    if phi.free_variables().iter().any(|v| !params.contains(v)) {
                        return Err(Error::Context(format!(
                            "image of `{}` has a variable outside its parameters",
                            r.name
                        )));
                    }
                }
                None if r.metric_for.is_some() => {}
                None => {
                    return Err(Error::Context(format!("interpretation has no image for relation `{}`", r.name)))
                }
            }
        }
        Ok(InterpretationMap {
            source,
            target,
            sorts,
            functions,
            relations,
        })
    }

    pub fn identity(sig: Arc<Signature>) -> Result<InterpretationMap> {
        InterpretationMap::inclusion(sig.clone(), sig)
    }

    /// The inclusion of `sig` into an expansion `big` of it.
    pub fn inclusion(sig: Arc<Signature>, big: Arc<Signature>) -> Result<InterpretationMap> {
        let sorts: BTreeMap<String, String> = sig.sorts().iter().map(|s| (s.clone(), s.clone())).collect();
        let mut functions = BTreeMap::new();
        for f in sig.functions() {
            let ps = params_of(&f.domain, &sorts)?;
            let t = Term::app(&f.name, ps.iter().cloned().map(Term::Var).collect());
            functions.insert(f.name.clone(), (ps, t));
        }
        let mut relations = BTreeMap::new();
        for r in sig.relations() {
            let ps = params_of(&r.domain, &sorts)?;
            let phi = Formula::atom(&r.name, ps.iter().cloned().map(Term::Var).collect());
            relations.insert(r.name.clone(), (ps, phi));
        }
        InterpretationMap::new(sig, big, sorts, functions, relations)
    }

    /// The inclusion of the base language into an eq expansion.
    pub fn into_expansion(exp: &crate::eqcons::EqExpansion) -> Result<InterpretationMap> {
        InterpretationMap::inclusion(exp.base.signature().clone(), exp.structure.signature().clone())
    }

    pub fn translate_term(&self, t: &Term) -> Result<Term> {
        let t = map_sorts(t, &|s| self.sort(s))?;
        t.map_functions(&|f, args| self.function(f, args))
    }

    fn sort(&self, s: &str) -> Result<String> {
        self.sorts
            .get(s)
            .cloned()
            .ok_or_else(|| Error::Sort(format!("interpretation has no image for sort `{s}`")))
    }

    fn function(&self, f: &str, args: Vec<Term>) -> Result<Term> {
        let (ps, t) = self
            .functions
            .get(f)
            .ok_or_else(|| Error::UnknownSymbol(f.to_string()))?;
        Ok(instantiate_term(t, ps, &args))
    }

    fn relation(&self, r: &str, args: Vec<Term>) -> Result<Formula> {
        if let Some((ps, phi)) = self.relations.get(r) {
            return Ok(instantiate_formula(phi, ps, &args));
        }
        let sym = self
            .source
            .relation(r)
            .ok_or_else(|| Error::UnknownSymbol(r.to_string()))?;
        match &sym.metric_for {
            Some(s) => Ok(Formula::atom(self.target.metric_name(&self.sort(s)?)?, args)),
            None => Err(Error::UnknownSymbol(r.to_string())),
        }
    }

    pub fn translate_formula(&self, f: &Formula) -> Result<Formula> {
        self.source.check_formula(f)?;
        let out = f.map_symbols(
            &|r, args| self.relation(r, args),
            &|g, args| self.function(g, args),
            &|s| self.sort(s),
        )?;
        self.target.check_formula(&out)?;
        Ok(out)
    }

    /// `J ∘ I`: first `self`, then `j`.
    pub fn then(&self, j: &InterpretationMap) -> Result<InterpretationMap> {
        if *self.target != *j.source {
            return Err(Error::Sort("interpretations are not composable".into()));
        }
        let mut sorts = BTreeMap::new();
        for (s, t) in &self.sorts {
            sorts.insert(s.clone(), j.sort(t)?);
        }
        let mut functions = BTreeMap::new();
        for (f, (ps, t)) in &self.functions {
            let new_ps = ps
                .iter()
                .map(|p| Ok(Variable::new(&p.name, &j.sort(&p.sort)?)))
                .collect::<Result<Vec<_>>>()?;
            functions.insert(f.clone(), (new_ps, j.translate_term(t)?));
        }
        let mut relations = BTreeMap::new();
        for r in self.source.relations() {
            let ps = params_of(&r.domain, &self.sorts)?;
            let phi = self.relation(&r.name, ps.iter().cloned().map(Term::Var).collect())?;
            let new_ps = ps
                .iter()
                .map(|p| Ok(Variable::new(&p.name, &j.sort(&p.sort)?)))
                .collect::<Result<Vec<_>>>()?;
            relations.insert(r.name.clone(), (new_ps, j.translate_formula(&phi)?));
        }
        InterpretationMap::new(self.source.clone(), j.target.clone(), sorts, functions, relations)
    }

    /// `M' ∘ I`: the structure of the source language read off `M'`.
    pub fn forgetful(&self, m: &FiniteStructure) -> Result<FiniteStructure> {
        if **m.signature() != *self.target {
            return Err(Error::Sort("structure is not over the interpretation's target".into()));
        }
        let carriers = self
            .source
            .sorts()
            .iter()
            .map(|s| Ok((s.clone(), m.carrier(&self.sort(s)?)?.to_vec())))
            .collect::<Result<Vec<_>>>()?;
        let mut out = FiniteStructure::new(self.source.clone(), carriers)?;
        for f in self.source.functions() {
            let (ps, t) = &self.functions[&f.name];
            let dims = m.dims(&ps.iter().map(|p| p.sort.clone()).collect::<Vec<_>>())?;
            let mut values = Vec::new();
            for tup in tuples(&dims) {
                values.push(crate::semantics::eval_term(m, t, &Assignment::of_tuple(ps, &tup))?);
            }
            let mut it = values.into_iter();
            out.set_function(&f.name, |_| it.next().unwrap_or(0))?;
        }
        for r in self.source.relations() {
            let ps = params_of(&r.domain, &self.sorts)?;
            let phi = self.relation(&r.name, ps.iter().cloned().map(Term::Var).collect())?;
            let table = formula_table(m, &phi, &ps)?;
            out.set_relation(&r.name, |args| table.get(args).clone())?;
        }
        out.validate()?;
        Ok(out)
    }

    /// For each sentence σ and target model `M'`: `I(σ)` in `M'` against `σ`
    /// in `M' ∘ I`, and, when a source suite is given, whether `T ⊨ σ`
    /// carries over.
    pub fn transport(
        &self,
        sentences: &[Formula],
        source_models: &[(String, FiniteStructure)],
        target_models: &[(String, FiniteStructure)],
    ) -> Result<Vec<TransportRow>> {
        let mut rows = Vec::new();
        for s in sentences {
            let tr = self.translate_formula(s)?;
            let source = if source_models.is_empty() {
                None
            } else {
                let mut v = rational::zero();
                for (_, m) in source_models {
                    v = v.max(eval_exact(m, s, &Assignment::new())?);
                }
                Some(v)
            };
            for (label, m) in target_models {
                let reduct = self.forgetful(m)?;
                rows.push(TransportRow {
                    sentence: s.to_string(),
                    translated: tr.to_string(),
                    model: label.clone(),
                    direct: eval_exact(m, &tr, &Assignment::new())?,
                    via_forgetful: eval_exact(&reduct, s, &Assignment::new())?,
                    source: source.clone(),
                });
            }
        }
        Ok(rows)
    }
}

fn map_sorts(t: &Term, sort: &dyn Fn(&str) -> Result<String>) -> Result<Term> {
    Ok(match t {
        Term::Var(v) => Term::Var(Variable::new(&v.name, &sort(&v.sort)?)),
        Term::App { func, args } => Term::App {
            func: func.clone(),
            args: args.iter().map(|a| map_sorts(a, sort)).collect::<Result<Vec<_>>>()?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defcat::tests::{m0_suite, m0_theory};
    use crate::definability::induced_function;
    use crate::eqcons::build_product;
    use crate::fixtures::{m0, m0_signature};
    use crate::syntax::{parse_binders, parse_formula, parse_formula_in, parse_signature};

    #[test]
    fn canonical_on_m0() {
        let (cat, ci) = canonical_interpretation(m0_theory(), m0_suite()).unwrap();
        let s = cat.object(ci.sorts["S"]).unwrap();
        assert_eq!(s.predicate.representative().to_string(), "d(x1, x1)");
        let m = m0();
        let z = zero_set(&m, &s.predicate, &rational::zero()).unwrap();
        assert_eq!(z.members.len(), 3);
        let f = cat.morphism(ci.functions["f"]).unwrap();
        let (ind, _) = induced_function(&m, &f.function).unwrap();
        for (x, y) in &ind.map {
            assert_eq!(y[0], m.function_value("f", x).unwrap());
        }
        // the constant e is a morphism out of the terminal object
        let e = cat.morphism(ci.functions["e"]).unwrap();
        let (ind, _) = induced_function(&m, &e.function).unwrap();
        assert_eq!(ind.map[&Vec::new()], vec![0]);
        let (o, r) = &ci.relations["R"];
        assert_eq!(*o, ci.sorts["S"]);
        let p = &cat.object(*o).unwrap().predicate;
        let rr = parse_formula_in(&m0_signature(), &p.context, "R(x1)").unwrap();
        assert_eq!(sim_a(cat.suite().models(), p, r, &rr).unwrap(), rational::zero());
        assert!(cat.check_laws().unwrap().passed());
    }

    #[test]
    fn quotient_algebra_classes() {
        let sig = m0_signature();
        let m = vec![("M0".to_string(), m0())];
        let ctx = parse_binders(&sig, "x : S").unwrap();
        let a = DefinablePredicate::single(parse_formula_in(&sig, &ctx, "d(x,e)").unwrap(), ctx.clone()).unwrap();
        let fs: Vec<Formula> = ["R(x)", "0", "d(x,x)", "R(f(x))"]
            .iter()
            .map(|t| parse_formula_in(&sig, &ctx, t).unwrap())
            .collect();
        // on Z(d(x,e)) = {a}: R(a) = 0, R(f(a)) = 1/4
        assert_eq!(quotient_classes(&m, &a, &fs).unwrap(), vec![0, 0, 0, 3]);
    }

    fn chain() -> (InterpretationMap, InterpretationMap, FiniteStructure) {
        // T: sort S, rel R, fn f.  T': sort U, rel Q, fn g.  T'': sort V, rel P, fn h, k.
        let t = m0_signature();
        let t1 = Arc::new(parse_signature("sort U; metric dU : U; rel Q : U; fn g : U -> U; fn c : -> U;").unwrap());
        let t2 = Arc::new(
            parse_signature("sort V; metric dV : V; rel P : V; fn h : V -> V; fn k : -> V;").unwrap(),
        );
        let u = |n: &str| Variable::new(n, "U");
        let v = |n: &str| Variable::new(n, "V");
        let i = InterpretationMap::new(
            t,
            t1.clone(),
            [("S".to_string(), "U".to_string())].into(),
            [
                ("f".to_string(), (vec![u("v1")], Term::app("g", vec![Term::app("g", vec![Term::Var(u("v1"))])]))),
                ("e".to_string(), (vec![], Term::constant("c"))),
            ]
            .into(),
            [(
                "R".to_string(),
                (vec![u("v1")], parse_formula_in(&t1, &[u("v1")], "inf y : U. max(Q(y), dU(y, v1))").unwrap()),
            )]
            .into(),
        )
        .unwrap();
        let j = InterpretationMap::new(
            t1.clone(),
            t2.clone(),
            [("U".to_string(), "V".to_string())].into(),
            [
                ("g".to_string(), (vec![v("v1")], Term::app("h", vec![Term::Var(v("v1"))]))),
                ("c".to_string(), (vec![], Term::app("h", vec![Term::constant("k")]))),
            ]
            .into(),
            [("Q".to_string(), (vec![v("v1")], parse_formula_in(&t2, &[v("v1")], "P(h(v1)) / 2").unwrap()))].into(),
        )
        .unwrap();
        let m2 = FiniteStructure::from_json(
            t2,
            r#"{"sorts":{"V":["p","q","r","s"]},
                "metrics":{"dV":[["p","q","1/2"],["p","r","1"],["p","s","1"],["q","r","1/2"],["q","s","3/4"],["r","s","1/4"]]},
                "relations":{"P":[["p","0"],["q","1/3"],["r","1"],["s","1/2"]]},
                "functions":{"h":{"p":"q","q":"s","r":"r","s":"p"},"k":"r"}}"#,
        )
        .unwrap();
        (i, j, m2)
    }

    #[test]
    fn identity_forgetful() {
        let id = InterpretationMap::identity(m0_signature()).unwrap();
        assert_eq!(id.forgetful(&m0()).unwrap(), m0());
        let phi = parse_formula(&m0_signature(), "sup x : S. inf y : S. max(R(y), d(f(x), y))").unwrap();
        assert_eq!(id.translate_formula(&phi).unwrap(), phi);
    }

    #[test]
    fn inclusion_into_expansion() {
        let exp = build_product(&m0(), "P", &["S".to_string(), "S".to_string()], 2).unwrap();
        let inc = InterpretationMap::into_expansion(&exp).unwrap();
        let red = inc.forgetful(&exp.structure).unwrap();
        assert_eq!(red, m0());
        let sig = m0_signature();
        let ss: Vec<Formula> = ["sup x : S. R(x)", "inf x : S. R(f(x))", "sup x : S. d(x, e)"]
            .iter()
            .map(|t| parse_formula(&sig, t).unwrap())
            .collect();
        let rows = inc.transport(&ss, &[("M0".into(), m0())], &[("exp".into(), exp.structure.clone())]).unwrap();
        for r in &rows {
            assert!(r.holds(), "{r:?}");
            assert_eq!(Some(r.direct.clone()), r.source);
        }
    }

    #[test]
    fn composite_forgetful() {
        let (i, j, m2) = chain();
        let ji = i.then(&j).unwrap();
        let a = ji.forgetful(&m2).unwrap();
        let b = i.forgetful(&j.forgetful(&m2).unwrap()).unwrap();
        assert_eq!(a, b);
        let sig = m0_signature();
        let ss: Vec<Formula> = ["sup x : S. R(x)", "inf x : S. max(R(f(x)), d(x, e))", "sup x : S. inf y : S. d(f(y), x)"]
            .iter()
            .map(|t| parse_formula(&sig, t).unwrap())
            .collect();
        for r in ji.transport(&ss, &[], &[("m2".into(), m2.clone())]).unwrap() {
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn capture_is_avoided() {
        let (i, _, _) = chain();
        let sig = m0_signature();
        // the image of R binds `y`; the argument mentions a free `y`
        let phi = parse_formula_in(&sig, &[Variable::new("y", "S")], "R(y)").unwrap();
        let t = i.translate_formula(&phi).unwrap();
        let fv = t.free_variables();
        assert_eq!(fv, vec![Variable::new("y", "U")]);
    }

    #[test]
    fn sort_mismatch_is_refused() {
        let t1 = Arc::new(parse_signature("sort U; metric dU : U; sort W; metric dW : W; rel Q : U; fn g : U -> W; fn c : -> U;").unwrap());
        let u = |n: &str| Variable::new(n, "U");
        let r = InterpretationMap::new(
            m0_signature(),
            t1,
            [("S".to_string(), "U".to_string())].into(),
            [
                ("f".to_string(), (vec![u("v1")], Term::app("g", vec![Term::Var(u("v1"))]))),
                ("e".to_string(), (vec![], Term::constant("c"))),
            ]
            .into(),
            [("R".to_string(), (vec![u("v1")], Formula::atom("Q", vec![Term::Var(u("v1"))])))].into(),
        );
        assert!(matches!(r, Err(Error::Sort(_))));
    }
}
