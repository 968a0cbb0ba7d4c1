//! The category of definable sets, materialized from requested objects and
//! morphisms over a fixed suite of finite models.

mod internal;
mod interp;

pub use internal::{
    functor_to_model, induced_eta, internal_language, logical_transformation, model_to_functor,
    FragmentData, FunctorData, InternalLanguage, TransformationReport,
};
pub use interp::{
    canonical_interpretation, quotient_classes, sim_a, CanonicalInterpretation, InterpretationMap,
    TransportRow,
};

use std::collections::BTreeSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::Deserialize;

use crate::definability::{
    check_composition, check_definable_function, check_syntactic_definability, compose_definable,
    induced_function, morphism_equal, rename_predicate, DefinableFunction, DefinablePredicate,
};
use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::{eval_exact, Assignment, FiniteStructure, Staircase};
use crate::syntax::{fresh_copies, parse_binders, parse_formula_in, Formula, Term, Theory, Variable};

/// Registered finite models; categories built over one suite refuse handles
/// from another.
#[derive(Debug, Clone)]
pub struct Suite {
    id: u64,
    models: Vec<(String, FiniteStructure)>,
}

impl Suite {
    pub fn new(models: Vec<(String, FiniteStructure)>) -> Result<Suite> {
        if models.is_empty() {
            return Err(Error::Check("a model suite needs at least one structure".into()));
        }
        let mut h = DefaultHasher::new();
        for (label, m) in &models {
            label.hash(&mut h);
            m.to_json().hash(&mut h);
        }
        Ok(Suite {
            id: h.finish(),
            models,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn models(&self) -> &[(String, FiniteStructure)] {
        &self.models
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Obj {
    suite: u64,
    index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mor {
    suite: u64,
    index: usize,
}

impl Obj {
    pub fn index(&self) -> usize {
        self.index
    }
}

impl Mor {
    pub fn index(&self) -> usize {
        self.index
    }
}

#[derive(Debug, Clone)]
pub struct Object {
    pub name: String,
    pub predicate: DefinablePredicate,
}

#[derive(Debug, Clone)]
pub struct Morphism {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub function: DefinableFunction,
    /// Index of the first morphism equal to this one on the suite.
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductData {
    pub object: Obj,
    pub pi1: Mor,
    pub pi2: Mor,
    pub left: Obj,
    pub right: Obj,
}

#[derive(Debug, Clone)]
pub struct DefCategory {
    pub theory: Theory,
    suite: Suite,
    objects: Vec<Object>,
    morphisms: Vec<Morphism>,
    identities: Vec<usize>,
    products: Vec<ProductData>,
}

fn witnesses_text(ws: &[Witness]) -> String {
    ws.iter()
        .map(|w| format!("{} at {:?}: {}", w.check, w.at, w.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

fn names_in(f: &Formula, vars: &[&[Variable]]) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    f.all_variable_names(&mut s);
    for vs in vars {
        s.extend(vs.iter().map(|v| v.name.clone()));
    }
    s
}

/// Builds the category with the listed objects and their identities. With
/// no objects, the terminal object (empty context) is added instead.
pub fn build_defcat(
    theory: Theory,
    suite: Suite,
    objects: &[(String, Formula, Vec<Variable>)],
) -> Result<DefCategory> {
    for (label, m) in suite.models() {
        if m.signature().sorts() != theory.signature.sorts() {
            return Err(Error::Context(format!("model `{label}` is over a different signature")));
        }
        for ax in &theory.axioms {
            let v = eval_exact(m, ax, &Assignment::new())?;
            if v != rational::zero() {
                return Err(Error::Check(format!(
                    "model `{label}` violates axiom `{ax}` (value {})",
                    format_ratio(&v)
                )));
            }
        }
    }
    let mut cat = DefCategory {
        theory,
        suite,
        objects: Vec::new(),
        morphisms: Vec::new(),
        identities: Vec::new(),
        products: Vec::new(),
    };
    if objects.is_empty() {
        cat.terminal()?;
    }
    for (name, f, ctx) in objects {
        cat.add_object(name, f.clone(), ctx.clone())?;
    }
    Ok(cat)
}

impl DefCategory {
    pub fn suite(&self) -> &Suite {
        &self.suite
    }

    pub fn objects(&self) -> impl Iterator<Item = (Obj, &Object)> {
        let s = self.suite.id;
        self.objects
            .iter()
            .enumerate()
            .map(move |(index, o)| (Obj { suite: s, index }, o))
    }

    pub fn morphisms(&self) -> impl Iterator<Item = (Mor, &Morphism)> {
        let s = self.suite.id;
        self.morphisms
            .iter()
            .enumerate()
            .map(move |(index, m)| (Mor { suite: s, index }, m))
    }

    /// One handle per morphism class.
    pub fn classes(&self) -> Vec<Mor> {
        self.morphisms()
            .filter(|(h, m)| m.class == h.index)
            .map(|(h, _)| h)
            .collect()
    }

    pub fn products(&self) -> &[ProductData] {
        &self.products
    }

    fn own_obj(&self, o: Obj) -> Result<&Object> {
        if o.suite != self.suite.id {
            return Err(Error::Check("object belongs to a category over another suite".into()));
        }
        self.objects
            .get(o.index)
            .ok_or_else(|| Error::Check("unknown object".into()))
    }

    fn own_mor(&self, m: Mor) -> Result<&Morphism> {
        if m.suite != self.suite.id {
            return Err(Error::Check("morphism belongs to a category over another suite".into()));
        }
        self.morphisms
            .get(m.index)
            .ok_or_else(|| Error::Check("unknown morphism".into()))
    }

    pub fn object(&self, o: Obj) -> Result<&Object> {
        self.own_obj(o)
    }

    pub fn morphism(&self, m: Mor) -> Result<&Morphism> {
        self.own_mor(m)
    }

    pub fn object_named(&self, name: &str) -> Option<Obj> {
        self.objects().find(|(_, o)| o.name == name).map(|(h, _)| h)
    }

    pub fn morphism_named(&self, name: &str) -> Option<Mor> {
        self.morphisms().find(|(_, m)| m.name == name).map(|(h, _)| h)
    }

    pub fn source(&self, m: Mor) -> Result<Obj> {
        let s = self.own_mor(m)?.source;
        Ok(Obj { suite: self.suite.id, index: s })
    }

    pub fn target(&self, m: Mor) -> Result<Obj> {
        let t = self.own_mor(m)?.target;
        Ok(Obj { suite: self.suite.id, index: t })
    }

    pub fn identity(&self, o: Obj) -> Result<Mor> {
        self.own_obj(o)?;
        Ok(Mor {
            suite: self.suite.id,
            index: self.identities[o.index],
        })
    }

    /// The empty product: context `()`, predicate `0`.
    pub fn terminal(&mut self) -> Result<Obj> {
        if let Some(o) = self
            .objects()
            .find(|(_, o)| o.predicate.context.is_empty())
            .map(|(h, _)| h)
        {
            return Ok(o);
        }
        self.add_object("1", Formula::zero(), Vec::new())
    }

    /// Adds an object after checking the definability criterion on the suite.
    pub fn add_object(&mut self, name: &str, f: Formula, ctx: Vec<Variable>) -> Result<Obj> {
        if self.object_named(name).is_some() {
            return Err(Error::Check(format!("object `{name}` already exists")));
        }
        self.theory.signature.check_formula(&f)?;
        let rep = check_syntactic_definability(self.suite.models(), &f, &ctx)?;
        if !rep.passed() {
            return Err(Error::Check(format!(
                "object `{name}` = `{f}` fails the definability criterion: {}",
                witnesses_text(&rep.witnesses())
            )));
        }
        let predicate = DefinablePredicate::single(f, ctx)?;
        let index = self.objects.len();
        self.objects.push(Object {
            name: name.to_string(),
            predicate,
        });
        let h = Obj { suite: self.suite.id, index };
        let id = crate::definability::identity(&self.theory.signature, &self.objects[index].predicate)?;
        let m = self.insert(&format!("id_{name}"), index, index, id)?;
        self.identities.push(m.index);
        Ok(h)
    }

    /// Adds a morphism from its graph `α(x̄, ȳ)`; `x̄` and `ȳ` rename the
    /// contexts of the source and target objects.
    pub fn add_morphism(
        &mut self,
        name: &str,
        source: Obj,
        target: Obj,
        graph: Formula,
        x: Vec<Variable>,
        y: Vec<Variable>,
    ) -> Result<Mor> {
        let a = self.own_obj(source)?.predicate.clone();
        let b = self.own_obj(target)?.predicate.clone();
        for (vs, p, what) in [(&x, &a, "source"), (&y, &b, "target")] {
            let ok = vs.len() == p.context.len()
                && vs.iter().zip(&p.context).all(|(u, v)| u.sort == v.sort);
            if !ok {
                return Err(Error::Sort(format!(
                    "morphism `{name}`: {what} variables do not match the object's context"
                )));
            }
        }
        self.theory.signature.check_formula(&graph)?;
        let f = DefinableFunction::new(graph, rename_predicate(&a, &x), rename_predicate(&b, &y))?;
        self.insert(name, source.index, target.index, f)
    }

    fn insert(&mut self, name: &str, source: usize, target: usize, f: DefinableFunction) -> Result<Mor> {
        if self.morphism_named(name).is_some() {
            return Err(Error::Check(format!("morphism `{name}` already exists")));
        }
        let r = check_definable_function(self.suite.models(), &f)?;
        if !r.passed() {
            return Err(Error::Check(format!(
                "`{name}` is not a definable function on the suite: {}",
                witnesses_text(&r.witnesses)
            )));
        }
        let index = self.morphisms.len();
        let mut class = index;
        for (i, m) in self.morphisms.iter().enumerate() {
            if m.source == source
                && m.target == target
                && m.class == i
                && morphism_equal(self.suite.models(), &m.function, &f)?.0
            {
                class = i;
                break;
            }
        }
        self.morphisms.push(Morphism {
            name: name.to_string(),
            source,
            target,
            function: f,
            class,
        });
        Ok(Mor {
            suite: self.suite.id,
            index,
        })
    }

    /// The composite graph of `g ∘ f` without registering it.
    pub fn composite(&self, f: Mor, g: Mor) -> Result<DefinableFunction> {
        let (mf, mg) = (self.own_mor(f)?, self.own_mor(g)?);
        if mf.target != mg.source {
            return Err(Error::Context(format!(
                "`{}` ends at `{}` but `{}` starts at `{}`",
                mf.name, self.objects[mf.target].name, mg.name, self.objects[mg.source].name
            )));
        }
        compose_definable(&mf.function, &mg.function)
    }

    /// Registers `g ∘ f`, returning the existing representative when the
    /// composite equals a known morphism.
    pub fn compose(&mut self, f: Mor, g: Mor) -> Result<Mor> {
        let c = self.composite(f, g)?;
        let (mf, mg) = (self.own_mor(f)?.clone(), self.own_mor(g)?.clone());
        let ws = check_composition(self.suite.models(), &mf.function, &mg.function, &c)?;
        if !ws.is_empty() {
            return Err(Error::Check(format!(
                "composite of `{}` and `{}` disagrees with table composition: {}",
                mf.name,
                mg.name,
                witnesses_text(&ws)
            )));
        }
        for (i, m) in self.morphisms.iter().enumerate() {
            if m.source == mf.source
                && m.target == mg.target
                && m.class == i
                && morphism_equal(self.suite.models(), &m.function, &c)?.0
            {
                return Ok(Mor { suite: self.suite.id, index: i });
            }
        }
        self.insert(&format!("{}_o_{}", mg.name, mf.name), mf.source, mg.target, c)
    }

    pub fn equal(&self, f: Mor, g: Mor) -> Result<bool> {
        Ok(self.own_mor(f)?.class == self.own_mor(g)?.class)
    }

    /// `A × B` with context `x̄ ȳ` and predicate `max(A, B)`, plus both
    /// projections.
    pub fn product(&mut self, a: Obj, b: Obj) -> Result<ProductData> {
        if let Some(p) = self.products.iter().find(|p| p.left == a && p.right == b) {
            return Ok(*p);
        }
        let pa = self.own_obj(a)?.clone();
        let pb = self.own_obj(b)?.clone();
        let mut avoid = names_in(pa.predicate.representative(), &[&pa.predicate.context]);
        pb.predicate.representative().all_variable_names(&mut avoid);
        let ys = fresh_copies(&pb.predicate.context, &mut avoid);
        let bren = rename_predicate(&pb.predicate, &ys);
        let mut ctx = pa.predicate.context.clone();
        ctx.extend(ys.iter().cloned());
        let name = format!("{}_x_{}", pa.name, pb.name);
        let f = Formula::max(pa.predicate.representative().clone(), bren.representative().clone());
        let object = match self.object_named(&name) {
            Some(o) => o,
            None => self.add_object(&name, f, ctx.clone())?,
        };
        let sig = self.theory.signature.clone();
        let n = pa.predicate.context.len();
        let mut proj = Vec::new();
        for (k, part) in [&ctx[..n], &ctx[n..]].into_iter().enumerate() {
            let mut avoid: BTreeSet<String> = ctx.iter().map(|v| v.name.clone()).collect();
            let us = fresh_copies(part, &mut avoid);
            let graph = Formula::tuple_distance(
                &sig,
                &part.iter().cloned().map(Term::Var).collect::<Vec<_>>(),
                &us.iter().cloned().map(Term::Var).collect::<Vec<_>>(),
            )?;
            let target = if k == 0 { a } else { b };
            proj.push(self.add_morphism(&format!("pi{}_{name}", k + 1), object, target, graph, ctx.clone(), us)?);
        }
        let p = ProductData {
            object,
            pi1: proj[0],
            pi2: proj[1],
            left: a,
            right: b,
        };
        self.products.push(p);
        Ok(p)
    }

    /// `⟨f, g⟩ : C → A × B` with graph `max(α_f, α_g)`.
    pub fn pairing(&mut self, p: &ProductData, f: Mor, g: Mor) -> Result<Mor> {
        let (mf, mg) = (self.own_mor(f)?.clone(), self.own_mor(g)?.clone());
        if mf.source != mg.source || mf.target != p.left.index || mg.target != p.right.index {
            return Err(Error::Context("pairing needs f : C → A and g : C → B".into()));
        }
        let pctx = self.own_obj(p.object)?.predicate.context.clone();
        let c = self.objects[mf.source].predicate.clone();
        let mut avoid = names_in(mf.function.graph.representative(), &[&pctx]);
        mg.function.graph.representative().all_variable_names(&mut avoid);
        let xs = fresh_copies(&c.context, &mut avoid);
        let n = mf.function.y().len();
        let rename = |m: &Morphism, ys: &[Variable]| {
            let mut pairs: Vec<(Variable, Variable)> =
                m.function.x().iter().cloned().zip(xs.iter().cloned()).collect();
            pairs.extend(m.function.y().iter().cloned().zip(ys.iter().cloned()));
            m.function.graph.representative().rename_free(&pairs)
        };
        let graph = Formula::max(rename(&mf, &pctx[..n]), rename(&mg, &pctx[n..]));
        let name = format!("pair_{}_{}", mf.name, mg.name);
        let source = Obj { suite: self.suite.id, index: mf.source };
        self.add_morphism(&name, source, p.object, graph, xs, pctx)
    }

    /// `π1 ∘ ⟨f,g⟩ = f`, `π2 ∘ ⟨f,g⟩ = g`, and every registered `h` with the
    /// same projections equals `⟨f,g⟩`.
    pub fn check_product_universal(&mut self, p: &ProductData, f: Mor, g: Mor) -> Result<Vec<Witness>> {
        let pair = self.pairing(p, f, g)?;
        let mut out = Vec::new();
        let models = self.suite.models().to_vec();
        for (proj, leg, label) in [(p.pi1, f, "pi1"), (p.pi2, g, "pi2")] {
            let c = self.composite(pair, proj)?;
            if !morphism_equal(&models, &c, &self.own_mor(leg)?.function)?.0 {
                out.push(Witness::new(
                    "product-existence",
                    vec![self.own_mor(pair)?.name.clone(), label.to_string()],
                    "projection of the pairing differs from the leg",
                ));
            }
        }
        let pm = self.own_mor(pair)?.clone();
        for (h, m) in self.morphisms().map(|(h, m)| (h, m.clone())).collect::<Vec<_>>() {
            if m.source != pm.source || m.target != pm.target || m.class == pm.class {
                continue;
            }
            let c1 = self.composite(h, p.pi1)?;
            let c2 = self.composite(h, p.pi2)?;
            if morphism_equal(&models, &c1, &self.own_mor(f)?.function)?.0
                && morphism_equal(&models, &c2, &self.own_mor(g)?.function)?.0
            {
                out.push(Witness::new(
                    "product-uniqueness",
                    vec![m.name.clone()],
                    "has the same projections as the pairing but differs from it",
                ));
            }
        }
        Ok(out)
    }

    /// Identity and associativity laws over all class representatives.
    pub fn check_laws(&self) -> Result<LawReport> {
        let models = self.suite.models();
        let reps = self.classes();
        let mut out = LawReport::default();
        for &f in &reps {
            let m = self.own_mor(f)?;
            let ida = Mor { suite: self.suite.id, index: self.identities[m.source] };
            let idb = Mor { suite: self.suite.id, index: self.identities[m.target] };
            for (c, label) in [(self.composite(ida, f)?, "left identity"), (self.composite(f, idb)?, "right identity")] {
                out.identities += 1;
                if !morphism_equal(models, &c, &m.function)?.0 {
                    out.witnesses.push(Witness::new("identity", vec![m.name.clone()], label));
                }
            }
        }
        for &f in &reps {
            for &g in &reps {
                if self.own_mor(f)?.target != self.own_mor(g)?.source {
                    continue;
                }
                let gf = self.composite(f, g)?;
                for &h in &reps {
                    if self.own_mor(g)?.target != self.own_mor(h)?.source {
                        continue;
                    }
                    out.triples += 1;
                    let hg = self.composite(g, h)?;
                    let left = compose_definable(&gf, &self.own_mor(h)?.function)?;
                    let right = compose_definable(&self.own_mor(f)?.function, &hg)?;
                    if !morphism_equal(models, &left, &right)?.0 {
                        out.witnesses.push(Witness::new(
                            "associativity",
                            vec![
                                self.own_mor(f)?.name.clone(),
                                self.own_mor(g)?.name.clone(),
                                self.own_mor(h)?.name.clone(),
                            ],
                            "(h∘g)∘f differs from h∘(g∘f)",
                        ));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Empirical moduli of every morphism and the separation clause: zero
    /// sup-distance on the suite must identify morphisms.
    pub fn check_metric_logical_category(&self) -> Result<MetricCategoryReport> {
        let models = self.suite.models();
        let mut out = MetricCategoryReport::default();
        for (_, m) in self.morphisms() {
            for (label, st) in models {
                let (ind, _) = induced_function(st, &m.function)?;
                out.moduli.push((m.name.clone(), label.clone(), ind.modulus));
            }
        }
        let ms: Vec<&Morphism> = self.morphisms.iter().collect();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                let (a, b) = (ms[i], ms[j]);
                if a.source != b.source || a.target != b.target {
                    continue;
                }
                let d = self.sup_distance(a, b)?;
                if d == rational::zero() && a.class != b.class {
                    out.separation.push(Witness::new(
                        "separation",
                        vec![a.name.clone(), b.name.clone()],
                        "distance 0 on the suite but not identified",
                    ));
                }
                if a.class == b.class
                    && a.function.graph.representative() != b.function.graph.representative()
                {
                    out.warnings.push(Witness::new(
                        "separation-warning",
                        vec![a.name.clone(), b.name.clone()],
                        "different graphs identified on the suite; it may be too small to tell them apart",
                    ));
                }
            }
        }
        Ok(out)
    }

    /// `max` over models and points of `Z(A)` of `d_B(α(x̄), β(x̄))`.
    fn sup_distance(&self, a: &Morphism, b: &Morphism) -> Result<Rational> {
        let ys = crate::definability::sorts_of(a.function.y());
        let mut best = rational::zero();
        for (_, m) in self.suite.models() {
            let (fa, _) = induced_function(m, &a.function)?;
            let (fb, _) = induced_function(m, &b.function)?;
            for (x, ya) in &fa.map {
                if let Some(yb) = fb.map.get(x) {
                    let d = m.tuple_distance(&ys, ya, yb)?;
                    if d > best {
                        best = d;
                    }
                }
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LawReport {
    pub identities: usize,
    pub triples: usize,
    pub witnesses: Vec<Witness>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct MetricCategoryReport {
    /// `(morphism, model, staircase)`
    pub moduli: Vec<(String, String, Staircase)>,
    pub separation: Vec<Witness>,
    pub warnings: Vec<Witness>,
}

impl MetricCategoryReport {
    pub fn passed(&self) -> bool {
        self.separation.is_empty()
    }
}

/// A category description: objects and morphisms by formula, plus requested
/// products and compositions (all by name).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub morphisms: Vec<MorphismSpec>,
    #[serde(default)]
    pub products: Vec<(String, String)>,
    #[serde(default)]
    pub compose: Vec<(String, String)>,
    /// Algebra elements `(object, formula)` for the internal language.
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    #[serde(default)]
    pub context: String,
    pub formula: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSpec {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub x: String,
    #[serde(default)]
    pub y: String,
    pub graph: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub name: String,
    pub object: String,
    pub formula: String,
}

impl CategorySpec {
    pub fn from_json(text: &str) -> Result<CategorySpec> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the described category; returns it with the morphisms made by
    /// the requested compositions and products.
    pub fn build(&self, theory: Theory, suite: Suite) -> Result<DefCategory> {
        let sig = theory.signature.clone();
        let mut objs = Vec::new();
        for o in &self.objects {
            let ctx = parse_binders(&sig, &o.context)?;
            objs.push((o.name.clone(), parse_formula_in(&sig, &ctx, &o.formula)?, ctx));
        }
        let mut cat = build_defcat(theory, suite, &objs)?;
        let obj = |cat: &DefCategory, n: &str| {
            cat.object_named(n)
                .ok_or_else(|| Error::UnknownSymbol(format!("object `{n}`")))
        };
        for m in &self.morphisms {
            let x = parse_binders(&sig, &m.x)?;
            let y = parse_binders(&sig, &m.y)?;
            let mut ctx = x.clone();
            ctx.extend(y.iter().cloned());
            let g = parse_formula_in(&sig, &ctx, &m.graph)?;
            let (s, t) = (obj(&cat, &m.source)?, obj(&cat, &m.target)?);
            cat.add_morphism(&m.name, s, t, g, x, y)?;
        }
        for (a, b) in &self.products {
            let (a, b) = (obj(&cat, a)?, obj(&cat, b)?);
            cat.product(a, b)?;
        }
        for (f, g) in &self.compose {
            let get = |n: &str| {
                cat.morphism_named(n)
                    .ok_or_else(|| Error::UnknownSymbol(format!("morphism `{n}`")))
            };
            let (f, g) = (get(f)?, get(g)?);
            cat.compose(f, g)?;
        }
        Ok(cat)
    }

    /// Parsed algebra elements `(name, object, formula)`.
    pub fn algebra_elements(&self, cat: &DefCategory) -> Result<Vec<(String, Obj, Formula)>> {
        let sig = cat.theory.signature.clone();
        self.elements
            .iter()
            .map(|e| {
                let o = cat
                    .object_named(&e.object)
                    .ok_or_else(|| Error::UnknownSymbol(format!("object `{}`", e.object)))?;
                let ctx = cat.object(o)?.predicate.context.clone();
                Ok((e.name.clone(), o, parse_formula_in(&sig, &ctx, &e.formula)?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m0, m0_signature};
    use crate::syntax::parse_formula;
    use std::sync::Arc;

    pub(crate) fn m0_theory() -> Theory {
        Theory::new(m0_signature(), Vec::new()).unwrap()
    }

    pub(crate) fn m0_suite() -> Suite {
        Suite::new(vec![("M0".into(), m0())]).unwrap()
    }

    fn s(n: &str) -> Variable {
        Variable::new(n, "S")
    }

    pub(crate) fn m0_category() -> (DefCategory, Obj, Mor) {
        let f = parse_formula(&m0_signature(), "d(x,x)").unwrap();
        let mut cat = build_defcat(m0_theory(), m0_suite(), &[("A".into(), f, vec![s("x")])]).unwrap();
        let a = cat.object_named("A").unwrap();
        let g = parse_formula(&m0_signature(), "d(f(x),y)").unwrap();
        let fm = cat.add_morphism("f", a, a, g, vec![s("x")], vec![s("y")]).unwrap();
        (cat, a, fm)
    }

    #[test]
    fn single_object() {
        let f = parse_formula(&m0_signature(), "d(x,e)").unwrap();
        let cat = build_defcat(m0_theory(), m0_suite(), &[("A".into(), f, vec![s("x")])]).unwrap();
        assert_eq!(cat.objects().count(), 1);
        assert_eq!(cat.morphisms().count(), 1);
        assert!(cat.check_laws().unwrap().passed());
    }

    #[test]
    fn empty_is_terminal() {
        let cat = build_defcat(m0_theory(), m0_suite(), &[]).unwrap();
        let (_, o) = cat.objects().next().unwrap();
        assert!(o.predicate.context.is_empty());
        assert_eq!(cat.morphisms().count(), 1);
        let r = cat.check_laws().unwrap();
        assert!(r.passed());
        assert!(cat.check_metric_logical_category().unwrap().passed());
    }

    #[test]
    fn failing_object_is_rejected() {
        let f = parse_formula(&m0_signature(), "R(x)").unwrap();
        let e = build_defcat(m0_theory(), m0_suite(), &[("A".into(), f, vec![s("x")])]).unwrap_err();
        assert!(e.to_string().contains("condition2"), "{e}");
    }

    #[test]
    fn composition_dedups() {
        let (mut cat, a, f) = m0_category();
        let ff = cat.compose(f, f).unwrap();
        assert_ne!(ff, f);
        let fff = cat.compose(ff, f).unwrap();
        // f∘f∘f sends everything to c, as does f∘f
        assert_eq!(fff, ff);
        let id = cat.identity(a).unwrap();
        assert_eq!(cat.compose(id, f).unwrap(), f);
        let r = cat.check_laws().unwrap();
        assert!(r.passed(), "{:?}", r.witnesses);
        assert!(r.triples > 0);
        assert!(cat.check_metric_logical_category().unwrap().passed());
    }

    #[test]
    fn products_and_pairing() {
        let (mut cat, a, f) = m0_category();
        let p = cat.product(a, a).unwrap();
        let pctx = &cat.object(p.object).unwrap().predicate.context;
        assert_eq!(pctx.len(), 2);
        let id = cat.identity(a).unwrap();
        let ws = cat.check_product_universal(&p, id, f).unwrap();
        assert!(ws.is_empty(), "{ws:?}");
        let r = cat.check_laws().unwrap();
        assert!(r.passed(), "{:?}", r.witnesses);
    }

    #[test]
    fn cross_suite_refused() {
        let (cat, _, f) = m0_category();
        let (mut other, _, _) = {
            let sig = m0_signature();
            let g = parse_formula(&sig, "d(x,x)").unwrap();
            let mut m = m0();
            m.set_relation("R", |_| rational::zero()).unwrap();
            let suite = Suite::new(vec![("M0'".into(), m)]).unwrap();
            let c = build_defcat(m0_theory(), suite, &[("A".into(), g, vec![s("x")])]).unwrap();
            let a = c.object_named("A").unwrap();
            let h = c.identity(a).unwrap();
            (c, a, h)
        };
        assert!(other.compose(f, f).is_err());
        assert!(cat.morphism(f).is_ok());
    }

    #[test]
    fn one_point_suite_warns() {
        let sig = Arc::new(crate::syntax::parse_signature("sort S; metric d : S; fn g : S -> S;").unwrap());
        let one = FiniteStructure::from_json(
            sig.clone(),
            r#"{"sorts":{"S":["p"]},"metrics":{"d":[]},"functions":{"g":{"p":"p"}}}"#,
        )
        .unwrap();
        let th = Theory::new(sig.clone(), Vec::new()).unwrap();
        let f = parse_formula(&sig, "d(x,x)").unwrap();
        let mut cat = build_defcat(th, Suite::new(vec![("one".into(), one)]).unwrap(), &[("A".into(), f, vec![s("x")])])
            .unwrap();
        let a = cat.object_named("A").unwrap();
        let g = parse_formula(&sig, "d(g(x),y)").unwrap();
        cat.add_morphism("g", a, a, g, vec![s("x")], vec![s("y")]).unwrap();
        let r = cat.check_metric_logical_category().unwrap();
        assert!(r.passed());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn spec_file() {
        let spec = CategorySpec::from_json(
            r#"{"objects":[{"name":"A","context":"x : S","formula":"d(x,x)"},
                           {"name":"E","context":"x : S","formula":"d(x,e)"}],
                "morphisms":[{"name":"f","source":"A","target":"A","x":"x : S","y":"y : S","graph":"d(f(x),y)"},
                             {"name":"incl","source":"E","target":"A","x":"x : S","y":"y : S","graph":"d(x,y)"}],
                "products":[["A","E"]],
                "compose":[["incl","f"],["f","f"]]}"#,
        )
        .unwrap();
        let cat = spec.build(m0_theory(), m0_suite()).unwrap();
        assert!(cat.objects().count() <= 5);
        assert!(cat.morphisms().count() <= 12);
        assert!(cat.check_laws().unwrap().passed());
        assert!(CategorySpec::from_json(r#"{"bogus":1}"#).is_err());
    }
}
