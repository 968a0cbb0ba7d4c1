use std::fs;
use std::path::Path;

use cmtk_core::algebra::{build_algebra, check_a7, check_adjunction_all, Op, Projection};
use cmtk_core::defcat::{
    canonical_interpretation, functor_to_model, internal_language, model_to_functor,
    CategorySpec, DefCategory, Suite,
};
use cmtk_core::definability::{check_syntactic_definability, zero_set};
use cmtk_core::eqcons::{check_conservative, check_stably_embedded, parse_eq_spec, run_eq_spec};
use cmtk_core::rational::{self, format_decimal, format_ratio, parse_rational, Rational};
use cmtk_core::report::{Report, Status, Witness};
use cmtk_core::semantics::{
    best_modulus, check_all_metrics, check_declared_moduli, eval_formula, Assignment, FiniteStructure, Value,
};
use cmtk_core::syntax::{
    parse_binders, parse_formula, parse_formula_in, parse_signature, parse_theory, signature_to_string,
    theory_to_string, Formula, Signature, Term, Theory, Variable,
};
use serde_json::{json, Value as Json};

use crate::{CheckArgs, DefcatArgs, EqArgs, EvalArgs, Failure, Inputs, ParseArgs, What};

type Out = Result<Report, Failure>;

pub struct Fmt {
    pub decimal: Option<usize>,
}

impl Fmt {
    pub fn q(&self, q: &Rational) -> String {
        match self.decimal {
            Some(k) => format_decimal(q, k),
            None => format_ratio(q),
        }
    }

    fn value(&self, v: &Value) -> String {
        match v {
            Value::Exact(q) => self.q(q),
            other => other.render(),
        }
    }
}

pub fn summary(r: &Report) -> String {
    let status = serde_json::to_value(r.status).unwrap_or(Json::Null);
    let mut s = format!("{}: {}", r.command, status.as_str().unwrap_or("?"));
    if let Some(v) = &r.value {
        s.push_str(&format!(", value {v}"));
    }
    if !r.witnesses.is_empty() {
        s.push_str(&format!(", {} witness(es)", r.witnesses.len()));
        if let Some(w) = r.witnesses.first() {
            s.push_str(&format!("; first: {} at [{}]: {}", w.check, w.at.join(", "), w.detail));
        }
    }
    if let Some(Json::String(e)) = r.values.get("error") {
        s.push_str(&format!(": {e}"));
    }
    s
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn rational_arg(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_rational(text.trim()).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

fn load(inputs: &Inputs) -> Result<(Theory, Vec<(String, FiniteStructure)>), Failure> {
    let theory = parse_theory(&read(&inputs.sig)?)?;
    let mut models = Vec::new();
    for p in &inputs.structures {
        let label = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string());
        let m = FiniteStructure::from_json(theory.signature.clone(), &read(p)?)?;
        models.push((label, m));
    }
    Ok((theory, models))
}

fn need_models(models: &[(String, FiniteStructure)]) -> Result<(), Failure> {
    if models.is_empty() {
        return Err(Failure::Input("at least one --structure is required".into()));
    }
    Ok(())
}

/// A formula with its context: a bare relation name becomes the relation
/// applied to `x1, ..`; otherwise the context is the declared one or the
/// free variables in order of appearance.
fn formula_in(sig: &Signature, text: &str, context: Option<&str>) -> Result<(Formula, Vec<Variable>), Failure> {
    let t = text.trim();
    if let Some(r) = sig.relation(t) {
        let ctx = match context {
            Some(c) => parse_binders(sig, c)?,
            None => r
                .domain
                .iter()
                .enumerate()
                .map(|(i, s)| Variable::new(&format!("x{}", i + 1), s))
                .collect(),
        };
        let f = Formula::atom(t, ctx.iter().cloned().map(Term::Var).collect());
        sig.check_formula(&f)?;
        return Ok((f, ctx));
    }
    match context {
        Some(c) => {
            let ctx = parse_binders(sig, c)?;
            Ok((parse_formula_in(sig, &ctx, t)?, ctx))
        }
        None => {
            let f = parse_formula(sig, t)?;
            let ctx = f.free_variables();
            Ok((f, ctx))
        }
    }
}

fn labelled(label: &str, ws: Vec<Witness>) -> Vec<Witness> {
    ws.into_iter()
        .map(|mut w| {
            if !w.detail.starts_with(&format!("{label}:")) {
                w.detail = format!("{label}: {}", w.detail);
            }
            w
        })
        .collect()
}

pub fn eval(a: &EvalArgs, fmt: &Fmt) -> Out {
    let (theory, models) = load(&a.inputs)?;
    need_models(&models)?;
    let sig = &theory.signature;
    let tol = rational_arg(&a.tol, "--tol")?;
    let f = parse_formula(sig, &a.formula)?;
    let free = f.free_variables();
    let mut pairs: Vec<(Variable, &str)> = Vec::new();
    for item in a.assign.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, elem) = item
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("assignment `{item}` is not `var=element`")))?;
        let v = free
            .iter()
            .find(|v| v.name == name.trim())
            .ok_or_else(|| Failure::Input(format!("`{}` is not a free variable of the formula", name.trim())))?;
        pairs.push((v.clone(), elem.trim()));
    }
    if let Some(v) = free.iter().find(|v| !pairs.iter().any(|(w, _)| w == *v)) {
        return Err(Failure::Input(format!("free variable `{}` has no value; use --assign", v.name)));
    }
    let mut r = Report::new("eval");
    r.set("formula", f.to_string());
    r.set("tolerance", fmt.q(&tol));
    let mut values = serde_json::Map::new();
    let mut worst: Option<Value> = None;
    for (label, m) in &models {
        let asg = Assignment::from_names(m, &pairs)?;
        let v = eval_formula(m, &f, &asg)?;
        values.insert(label.clone(), Json::String(fmt.value(&v)));
        let holds = match &v {
            Value::Exact(q) => *q <= tol,
            Value::Approx { value, err } => *value <= rational::to_f64(&tol) + err,
        };
        if !v.is_exact() {
            r.status = r.status.and(Status::Approximate);
        }
        if !holds {
            r.record(
                "satisfaction",
                vec![Witness::new(
                    "satisfaction",
                    vec![label.clone()],
                    format!("value {} exceeds tolerance {}", fmt.value(&v), fmt.q(&tol)),
                )],
            );
        } else {
            r.cite("satisfaction");
        }
        if worst.is_none() {
            worst = Some(v);
        }
    }
    if models.len() == 1 {
        r.value = worst.map(|v| fmt.value(&v));
    } else {
        r.set("values", Json::Object(values));
    }
    Ok(r)
}

pub fn check(a: &CheckArgs, fmt: &Fmt) -> Out {
    let (theory, models) = load(&a.inputs)?;
    need_models(&models)?;
    let sig = theory.signature.clone();
    let first_formula = || {
        a.formulas
            .first()
            .ok_or_else(|| Failure::Input("--formula is required".into()))
    };
    let mut r = Report::new("check");
    match a.what {
        What::Metric => {
            r.set("what", "metric");
            for (label, m) in &models {
                r.record("pseudo-metric axioms", labelled(label, check_all_metrics(m)?));
            }
        }
        What::Modulus => {
            r.set("what", "modulus");
            for (label, m) in &models {
                r.record("declared moduli", labelled(label, check_declared_moduli(m)?));
            }
            if !a.formulas.is_empty() {
                let (f, ctx) = formula_in(&sig, first_formula()?, a.context.as_deref())?;
                let mut per = serde_json::Map::new();
                for (label, m) in &models {
                    per.insert(label.clone(), best_modulus(m, &f, &ctx)?.to_json());
                }
                r.cite("empirical modulus");
                r.set("modulus", Json::Object(per));
            }
        }
        What::Definable => {
            r.set("what", "definable");
            let (f, ctx) = formula_in(&sig, first_formula()?, a.context.as_deref())?;
            let rep = check_syntactic_definability(&models, &f, &ctx)?;
            r.set("formula", f.to_string());
            let per: Vec<Json> = rep
                .models
                .iter()
                .map(|m| {
                    json!({
                        "model": m.label,
                        "condition1": fmt.q(&m.condition1),
                        "condition2": fmt.q(&m.condition2),
                        "oracle_agrees": m.oracle_agrees,
                    })
                })
                .collect();
            r.set("models", per);
            r.record("definability criterion", rep.witnesses());
            if !rep.passed() && r.witnesses.is_empty() {
                r.status = Status::Fail;
            }
        }
        What::Adjunction => {
            r.set("what", "adjunction");
            let (_, ctx) = formula_in(&sig, first_formula()?, a.context.as_deref())?;
            let target = parse_binders(&sig, a.target.as_deref().unwrap_or(""))?;
            let seeds = a
                .formulas
                .iter()
                .map(|t| Ok(parse_formula_in(&sig, &ctx, t)?))
                .collect::<Result<Vec<_>, Failure>>()?;
            let tseeds = a
                .target_formulas
                .iter()
                .map(|t| Ok(parse_formula_in(&sig, &target, t)?))
                .collect::<Result<Vec<_>, Failure>>()?;
            let mut sizes = Vec::new();
            for (label, m) in &models {
                let mut src = build_algebra(m, &ctx, &seeds)?;
                let closed_src = src.close(&Op::ALL, a.limit);
                let mut tgt = build_algebra(m, &target, &tseeds)?;
                let closed_tgt = tgt.close(&Op::ALL, a.limit);
                let pi = Projection::new(m, &ctx, &target)?;
                r.record("quantifier adjunction", labelled(label, check_adjunction_all(&pi, &src, &tgt)));
                sizes.push(json!({
                    "model": label,
                    "source_elements": src.len(),
                    "source_closed": closed_src,
                    "target_elements": tgt.len(),
                    "target_closed": closed_tgt,
                }));
            }
            r.set("algebras", sizes);
        }
        What::A7 => {
            r.set("what", "a7");
            let var = parse_binders(&sig, a.var.as_deref().ok_or_else(|| Failure::Input("--var is required".into()))?)?;
            if var.len() != 1 {
                return Err(Failure::Input("--var takes exactly one binder".into()));
            }
            let mut ctx = var.clone();
            ctx.extend(parse_binders(&sig, a.context.as_deref().unwrap_or(""))?);
            let get = |o: &Option<String>, n: &str| -> Result<Formula, Failure> {
                let t = o.as_deref().ok_or_else(|| Failure::Input(format!("--{n} is required")))?;
                Ok(parse_formula_in(&sig, &ctx, t)?)
            };
            let (psi, phi) = (get(&a.psi, "psi")?, get(&a.phi, "phi")?);
            let mut worst = rational::zero();
            for (label, m) in &models {
                let v = check_a7(m, &psi, &phi, &var[0])?;
                if v != rational::zero() {
                    r.record(
                        "A7 instance",
                        vec![Witness::new("a7", vec![label.clone()], format!("value {}", fmt.q(&v)))],
                    );
                }
                worst = worst.max(v);
            }
            r.cite("A7 instance");
            r.value = Some(fmt.q(&worst));
        }
        What::Category => {
            r.set("what", "category");
            let path = a.category.as_ref().ok_or_else(|| Failure::Input("--category is required".into()))?;
            let spec = CategorySpec::from_json(&read(path)?)?;
            let cat = spec.build(theory.clone(), Suite::new(models.clone())?)?;
            category_checks(&cat, &mut r)?;
        }
        What::Conservative => {
            r.set("what", "conservative");
            let path = a.spec.as_ref().ok_or_else(|| Failure::Input("--spec is required".into()))?;
            let prog = parse_eq_spec(&read(path)?)?;
            let mut sentences = theory.metric_axioms()?;
            sentences.extend(theory.axioms.iter().cloned());
            for s in &a.sentences {
                let f = parse_formula(&sig, s)?;
                if !f.is_sentence() {
                    return Err(Failure::Input(format!("`{s}` is not a sentence")));
                }
                sentences.push(f);
            }
            let mut rows = Vec::new();
            for (label, m) in &models {
                for exp in run_eq_spec(m, &prog)? {
                    let rep = check_conservative(m, &exp, &sentences)?;
                    rows.push(json!({
                        "model": label,
                        "sort": exp.sort,
                        "sentences": rep.rows.len(),
                        "axioms": rep.axioms.len(),
                        "passed": rep.passed(),
                    }));
                    r.record("conservative expansion", labelled(label, rep.witnesses()));
                }
            }
            r.set("expansions", rows);
        }
        What::StableEmbedded => {
            r.set("what", "stable-embedded");
            let sub_path = a.sub.as_ref().ok_or_else(|| Failure::Input("--sub is required".into()))?;
            let sub = parse_signature(&read(sub_path)?)?;
            let eps = rational_arg(&a.epsilon, "--epsilon")?;
            let x = parse_binders(&sig, &a.x)?;
            let y = parse_binders(&sig, &a.y)?;
            let z = parse_binders(&sub, &a.z)?;
            let mut cx = x.clone();
            cx.extend(y.iter().cloned());
            let phi = parse_formula_in(&sig, &cx, a.phi.as_deref().ok_or_else(|| Failure::Input("--phi is required".into()))?)?;
            let mut cz = x.clone();
            cz.extend(z.iter().cloned());
            let psi = parse_formula_in(&sub, &cz, a.psi.as_deref().ok_or_else(|| Failure::Input("--psi is required".into()))?)?;
            let mut choices = Vec::new();
            for (label, m) in &models {
                let rep = check_stably_embedded(m, &sub, &eps, &phi, &x, &y, &psi, &z)?;
                for (p, b, d) in &rep.choices {
                    choices.push(json!({"model": label, "parameter": p, "best": b, "distance": fmt.q(d)}));
                }
                let mut ws = labelled(label, rep.witnesses);
                if !rep.holds && ws.is_empty() {
                    ws.push(Witness::new("stable-embedded", vec![label.clone()], "no parameter within epsilon"));
                }
                r.record("stable embeddedness", ws);
            }
            r.set("choices", choices);
        }
    }
    Ok(r)
}

fn category_checks(cat: &DefCategory, r: &mut Report) -> Result<(), Failure> {
    let laws = cat.check_laws()?;
    r.set("identities_checked", laws.identities);
    r.set("triples_checked", laws.triples);
    r.record("category laws", laws.witnesses);
    let mlc = cat.check_metric_logical_category()?;
    r.record("separation", mlc.separation);
    let warnings: Vec<Json> = mlc
        .warnings
        .iter()
        .map(|w| json!({"check": w.check, "at": w.at, "detail": w.detail}))
        .collect();
    r.set("warnings", warnings);
    let moduli: Vec<Json> = mlc
        .moduli
        .iter()
        .map(|(m, label, st)| json!({"morphism": m, "model": label, "modulus": st.to_json()}))
        .collect();
    r.set("moduli", moduli);
    Ok(())
}

pub fn eq(a: &EqArgs, fmt: &Fmt) -> Out {
    let (_, models) = load(&a.inputs)?;
    need_models(&models)?;
    let prog = parse_eq_spec(&read(&a.spec)?)?;
    let mut r = Report::new("eq");
    let mut sorts = Vec::new();
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
    }
    for (label, m) in &models {
        let exps = run_eq_spec(m, &prog)?;
        for exp in &exps {
            let size = exp
                .structure
                .size(&exp.sort)
                .map_err(|e| Failure::Input(e.to_string()))?;
            sorts.push(json!({
                "model": label,
                "sort": exp.sort,
                "size": size,
                "new_sorts": exp.new_sorts,
                "axioms": exp.axioms.len(),
                "verified": exp.verified(),
                "truncation": exp.truncation.as_ref().map(|t| fmt.q(t)),
            }));
            r.record("eq axioms", labelled(label, exp.failures()));
        }
        if let Some(dir) = &a.out {
            let stem = if models.len() == 1 { String::new() } else { format!("{label}.") };
            for exp in &exps {
                fs::write(dir.join(format!("{stem}{}.json", exp.sort)), exp.structure.to_json())?;
                fs::write(dir.join(format!("{stem}{}.axioms", exp.sort)), exp.axiom_listing())?;
            }
        }
    }
    r.set("sorts", sorts);
    Ok(r)
}

pub fn defcat(a: &DefcatArgs, _fmt: &Fmt) -> Out {
    let (theory, models) = load(&a.inputs)?;
    need_models(&models)?;
    let suite = Suite::new(models.clone())?;
    let mut r = Report::new("defcat");
    let (cat, elements) = match &a.category {
        Some(p) => {
            let spec = CategorySpec::from_json(&read(p)?)?;
            let cat = spec.build(theory, suite)?;
            let els = spec.algebra_elements(&cat)?;
            (cat, els)
        }
        None => {
            let (cat, ci) = canonical_interpretation(theory, suite)?;
            r.set("canonical", json!({
                "sorts": ci.sorts.iter().map(|(s, o)| (s.clone(), json!(cat.object(*o).map(|x| x.name.clone()).unwrap_or_default()))).collect::<serde_json::Map<_, _>>(),
                "functions": ci.functions.keys().collect::<Vec<_>>(),
                "relations": ci.relations.keys().collect::<Vec<_>>(),
            }));
            let els = ci.relations.iter().map(|(n, (o, f))| (n.clone(), *o, f.clone())).collect();
            (cat, els)
        }
    };
    let mut objs = Vec::new();
    for (_, o) in cat.objects() {
        let sizes: Vec<Json> = models
            .iter()
            .map(|(label, m)| {
                let z = zero_set(m, &o.predicate, &rational::zero()).map(|z| z.members.len());
                json!({"model": label, "zero_set": z.unwrap_or(0)})
            })
            .collect();
        objs.push(json!({
            "name": o.name,
            "context": o.predicate.context.iter().map(|v| format!("{}:{}", v.name, v.sort)).collect::<Vec<_>>(),
            "formula": o.predicate.representative().to_string(),
            "sizes": sizes,
        }));
    }
    r.set("objects", objs);
    let mut mors = Vec::new();
    for (h, m) in cat.morphisms() {
        let class = cat.morphisms().find(|(k, _)| k.index() == m.class).map(|(_, c)| c.name.clone());
        mors.push(json!({
            "name": m.name,
            "source": cat.object(cat.source(h)?)?.name,
            "target": cat.object(cat.target(h)?)?.name,
            "graph": m.function.graph.representative().to_string(),
            "class": class,
        }));
    }
    r.set("morphisms", mors);
    category_checks(&cat, &mut r)?;
    if a.internal {
        let all: Vec<_> = cat.objects().map(|(o, _)| o).collect();
        let lang = internal_language(&cat, &all, &elements, &[])?;
        r.set("internal_signature", signature_to_string(&lang.signature));
        r.set("internal_axioms", lang.theory.axioms.iter().map(|a| a.to_string()).collect::<Vec<_>>());
        let mut ws = Vec::new();
        for (label, t) in &lang.tautological {
            let fd = model_to_functor(&lang, t)?;
            let back = functor_to_model(&lang, &fd)?;
            if &back != t {
                ws.push(Witness::new("round-trip", vec![label.clone()], "functor_to_model(model_to_functor(M)) differs from M"));
            }
        }
        r.record("model/functor round trip", ws);
    }
    Ok(r)
}

pub fn parse(a: &ParseArgs) -> Out {
    let mut r = Report::new("parse");
    match (&a.formula, &a.theory) {
        (Some(text), None) => {
            let sig = match &a.sig {
                Some(p) => parse_theory(&read(p)?)?.signature.as_ref().clone(),
                None => Signature::new(),
            };
            let f = parse_formula(&sig, text)?;
            let printed = f.to_string();
            r.set("printed", printed.clone());
            if a.roundtrip {
                let ctx = f.free_variables();
                let g = parse_formula_in(&sig, &ctx, &printed)?;
                let again = g.to_string();
                let mut ws = Vec::new();
                if again != printed {
                    ws.push(Witness::new("roundtrip", vec![], format!("reprinted as `{again}`")));
                }
                let h = parse_formula_in(&sig, &ctx, &again)?;
                if h != g {
                    ws.push(Witness::new("roundtrip", vec![], "the normalized tree is not a fixed point"));
                }
                r.record("print/parse round trip", ws);
            }
        }
        (None, Some(p)) => {
            let t = parse_theory(&read(p)?)?;
            let printed = theory_to_string(&t);
            r.set("printed", printed.clone());
            if a.roundtrip {
                let again = theory_to_string(&parse_theory(&printed)?);
                let ws = if again == printed {
                    Vec::new()
                } else {
                    vec![Witness::new("roundtrip", vec![], "the theory reprints differently")]
                };
                r.record("print/parse round trip", ws);
            }
        }
        _ => return Err(Failure::Input("give exactly one of --formula and --theory".into())),
    }
    Ok(r)
}
