//! The internal language of a finitely presented fragment of a category,
//! its tautological models, and the model/functor correspondence.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{DefCategory, Mor, Obj};
use crate::definability::{induced_function, morphism_equal, sorts_of, zero_set};
use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::{eval_exact, formula_table, Assignment, FiniteStructure};
use crate::syntax::{Formula, Signature, Term, Theory, Variable};

fn ident(prefix: &str, name: &str) -> String {
    let body: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    format!("{prefix}_{body}")
}

fn tuple_name(names: Vec<String>) -> String {
    if names.len() == 1 {
        names.into_iter().next().unwrap()
    } else {
        format!("<{}>", names.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct InternalLanguage {
    pub signature: Arc<Signature>,
    /// Object ↦ `S_A`.
    pub sorts: Vec<(Obj, String)>,
    /// Morphism class representative ↦ `f_α`.
    pub functions: Vec<(Mor, String)>,
    /// Algebra element ↦ `R_φ`.
    pub relations: Vec<(String, Obj, Formula, String)>,
    /// Generated functor-law axioms and the supplied sentences that hold in
    /// every tautological model.
    pub theory: Theory,
    /// Supplied sentences dropped, with their largest value.
    pub rejected: Vec<(Formula, Rational)>,
    /// One tautological model per suite model.
    pub tautological: Vec<(String, FiniteStructure)>,
    /// Zero-set tuples behind each element of `S_A`, per suite model.
    pub points: Vec<BTreeMap<String, Vec<Vec<usize>>>>,
}

impl InternalLanguage {
    pub fn sort_of(&self, o: Obj) -> Option<&str> {
        self.sorts.iter().find(|(p, _)| *p == o).map(|(_, s)| s.as_str())
    }

    pub fn function_of(&self, m: Mor) -> Option<&str> {
        self.functions.iter().find(|(p, _)| *p == m).map(|(_, s)| s.as_str())
    }
}

/// Builds `L_C` and the fragment `T_C` for the listed objects, the morphism
/// classes between them and the supplied algebra elements. `sentences` are
/// in `L_C` and are kept when they vanish in every tautological model.
pub fn internal_language(
    cat: &DefCategory,
    objects: &[Obj],
    elements: &[(String, Obj, Formula)],
    sentences: &[Formula],
) -> Result<InternalLanguage> {
    let mut sig = Signature::new();
    let mut sorts = Vec::new();
    for &o in objects {
        let obj = cat.object(o)?;
        if sorts.iter().any(|(p, _)| *p == o) {
            continue;
        }
        let s = ident("S", &obj.name);
        sig.add_sort(&s)?;
        sig.add_metric(&ident("d", &s), &s)?;
        sorts.push((o, s));
    }
    let sort = |o: Obj| sorts.iter().find(|(p, _)| *p == o).map(|(_, s)| s.clone()).unwrap();
    let mut functions = Vec::new();
    for m in cat.classes() {
        let mm = cat.morphism(m)?;
        if !objects.contains(&cat.source(m)?) || !objects.contains(&cat.target(m)?) {
            continue;
        }
        let name = ident("f", &mm.name);
        sig.add_function(&name, &[&sort(cat.source(m)?)], &sort(cat.target(m)?))?;
        functions.push((m, name));
    }
    let mut relations = Vec::new();
    for (name, o, phi) in elements {
        if !objects.contains(o) {
            return Err(Error::Context(format!("element `{name}` lives on an object outside the fragment")));
        }
        let r = ident("R", name);
        sig.add_relation(&r, &[&sort(*o)])?;
        relations.push((name.clone(), *o, phi.clone(), r));
    }
    let sig = Arc::new(sig);

    let mut tautological = Vec::new();
    let mut points = Vec::new();
    for (label, m) in cat.suite().models() {
        let mut carriers = Vec::new();
        let mut pts = BTreeMap::new();
        for (o, s) in &sorts {
            let p = &cat.object(*o)?.predicate;
            let z = zero_set(m, p, &rational::zero())?;
            if z.members.is_empty() {
                return Err(Error::Structure(format!(
                    "object `{}` has an empty zero set in `{label}`",
                    cat.object(*o)?.name
                )));
            }
            let ctx_sorts = sorts_of(&p.context);
            carriers.push((
                s.clone(),
                z.members.iter().map(|t| tuple_name(m.names(&ctx_sorts, t))).collect(),
            ));
            pts.insert(s.clone(), z.members.clone());
        }
        let mut st = FiniteStructure::new(sig.clone(), carriers)?;
        for (o, s) in &sorts {
            let ctx_sorts = sorts_of(&cat.object(*o)?.predicate.context);
            let ps = &pts[s];
            let mut vals = Vec::new();
            for i in 0..ps.len() {
                for j in 0..ps.len() {
                    vals.push(m.tuple_distance(&ctx_sorts, &ps[i], &ps[j])?);
                }
            }
            let n = ps.len();
            st.set_relation(&ident("d", s), |a| vals[a[0] * n + a[1]].clone())?;
        }
        for (h, fname) in &functions {
            let mm = cat.morphism(*h)?;
            let (ind, _) = induced_function(m, &mm.function)?;
            let src = &pts[&sort(cat.source(*h)?)];
            let tgt = &pts[&sort(cat.target(*h)?)];
            let mut table = Vec::with_capacity(src.len());
            for x in src {
                let y = ind.map.get(x).ok_or_else(|| {
                    Error::Check(format!("`{}` is not total on `{label}`", mm.name))
                })?;
                table.push(tgt.iter().position(|t| t == y).ok_or_else(|| {
                    Error::Check(format!("`{}` leaves its target on `{label}`", mm.name))
                })?);
            }
            st.set_function(fname, |a| table[a[0]])?;
        }
        for (_, o, phi, r) in &relations {
            let p = &cat.object(*o)?.predicate;
            let t = formula_table(m, phi, &p.context)?;
            let ps = &pts[&sort(*o)];
            st.set_relation(r, |a| t.get(&ps[a[0]]).clone())?;
        }
        st.validate()?;
        tautological.push((label.clone(), st));
        points.push(pts);
    }

    let mut axioms = Vec::new();
    for (o, s) in &sorts {
        let id = cat.identity(*o)?;
        let fid = functions
            .iter()
            .find(|(m, _)| cat.equal(*m, id).unwrap_or(false))
            .map(|(_, n)| n.clone())
            .unwrap();
        let x = Variable::new("x", s);
        axioms.push(Formula::sup(
            vec![x.clone()],
            Formula::atom(&ident("d", s), vec![Term::app(&fid, vec![Term::Var(x.clone())]), Term::Var(x)]),
        ));
    }
    let models = cat.suite().models();
    for (a, fa) in &functions {
        for (b, fb) in &functions {
            if cat.target(*a)? != cat.source(*b)? {
                continue;
            }
            let c = cat.composite(*a, *b)?;
            let mut found = None;
            for (k, fk) in &functions {
                if cat.source(*k)? == cat.source(*a)?
                    && cat.target(*k)? == cat.target(*b)?
                    && morphism_equal(models, &cat.morphism(*k)?.function, &c)?.0
                {
                    found = Some(fk.clone());
                    break;
                }
            }
            let Some(fba) = found else { continue };
            let x = Variable::new("x", &sort(cat.source(*a)?));
            let xt = Term::Var(x.clone());
            axioms.push(Formula::sup(
                vec![x],
                Formula::atom(
                    &ident("d", &sort(cat.target(*b)?)),
                    vec![
                        Term::app(&fba, vec![xt.clone()]),
                        Term::app(fb, vec![Term::app(fa, vec![xt])]),
                    ],
                ),
            ));
        }
    }
    for ax in &axioms {
        for (label, st) in &tautological {
            let v = eval_exact(st, ax, &Assignment::new())?;
            if v != rational::zero() {
                return Err(Error::Check(format!(
                    "generated axiom `{ax}` has value {} in the tautological model of `{label}`",
                    format_ratio(&v)
                )));
            }
        }
    }
    let mut rejected = Vec::new();
    for s in sentences {
        let mut worst = rational::zero();
        for (_, st) in &tautological {
            worst = worst.max(eval_exact(st, s, &Assignment::new())?);
        }
        if worst == rational::zero() {
            axioms.push(s.clone());
        } else {
            rejected.push((s.clone(), worst));
        }
    }
    let theory = Theory::new(sig.clone(), axioms)?;
    Ok(InternalLanguage {
        signature: sig,
        sorts,
        functions,
        relations,
        theory,
        rejected,
        tautological,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentData {
    pub elements: Vec<String>,
    /// Row-major metric table.
    pub metric: Vec<Rational>,
}

/// A functor from the presented fragment to finite metric spaces: each
/// object to a space, each morphism to a map, each algebra element to a
/// predicate on its object's space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorData {
    pub objects: BTreeMap<String, FragmentData>,
    pub morphisms: BTreeMap<String, Vec<usize>>,
    pub algebra: BTreeMap<String, Vec<Rational>>,
}

/// `A ↦ M(S_A)`, `α ↦ M(f_α)`, `φ ↦ M(R_φ)`, after checking that `M`
/// satisfies the fragment.
pub fn model_to_functor(lang: &InternalLanguage, m: &FiniteStructure) -> Result<FunctorData> {
    if **m.signature() != *lang.signature {
        return Err(Error::Sort("structure is not over the internal language".into()));
    }
    for ax in &lang.theory.axioms {
        let v = eval_exact(m, ax, &Assignment::new())?;
        if v != rational::zero() {
            return Err(Error::Check(format!(
                "fragment axiom `{ax}` has value {}",
                format_ratio(&v)
            )));
        }
    }
    let mut objects = BTreeMap::new();
    for (_, s) in &lang.sorts {
        let n = m.size(s)?;
        let d = ident("d", s);
        let mut metric = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                metric.push(m.relation_value(&d, &[i, j])?.clone());
            }
        }
        objects.insert(s.clone(), FragmentData { elements: m.carrier(s)?.to_vec(), metric });
    }
    let mut morphisms = BTreeMap::new();
    for (_, f) in &lang.functions {
        morphisms.insert(f.clone(), m.function_table(f)?.data.clone());
    }
    let mut algebra = BTreeMap::new();
    for (_, _, _, r) in &lang.relations {
        algebra.insert(r.clone(), m.relation_table(r)?.data.clone());
    }
    Ok(FunctorData { objects, morphisms, algebra })
}

/// The structure of `L_C` with the functor's spaces, maps and predicates.
pub fn functor_to_model(lang: &InternalLanguage, f: &FunctorData) -> Result<FiniteStructure> {
    let carriers = lang
        .sorts
        .iter()
        .map(|(_, s)| {
            let o = f
                .objects
                .get(s)
                .ok_or_else(|| Error::Context(format!("functor has no image for `{s}`")))?;
            Ok((s.clone(), o.elements.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = FiniteStructure::new(lang.signature.clone(), carriers)?;
    for (_, s) in &lang.sorts {
        let o = &f.objects[s];
        let n = o.elements.len();
        if o.metric.len() != n * n {
            return Err(Error::Structure(format!("metric of `{s}` has the wrong size")));
        }
        m.set_relation(&ident("d", s), |a| o.metric[a[0] * n + a[1]].clone())?;
    }
    for (_, name) in &lang.functions {
        let t = f
            .morphisms
            .get(name)
            .ok_or_else(|| Error::Context(format!("functor has no image for `{name}`")))?;
        let sym = lang.signature.function(name).unwrap();
        if t.len() != m.size(&sym.domain[0])? {
            return Err(Error::Structure(format!("map `{name}` has the wrong size")));
        }
        m.set_function(name, |a| t[a[0]])?;
    }
    for (_, _, _, r) in &lang.relations {
        let t = f
            .algebra
            .get(r)
            .ok_or_else(|| Error::Context(format!("functor has no image for `{r}`")))?;
        let sym = lang.signature.relation(r).unwrap();
        if t.len() != m.size(&sym.domain[0])? {
            return Err(Error::Structure(format!("predicate `{r}` has the wrong size")));
        }
        m.set_relation(r, |a| t[a[0]].clone())?;
    }
    m.validate()?;
    Ok(m)
}

#[derive(Debug, Clone, Default)]
pub struct TransformationReport {
    /// `η_A`, per sort `S_A`.
    pub eta: BTreeMap<String, Vec<usize>>,
    pub squares_checked: usize,
    pub witnesses: Vec<Witness>,
}

impl TransformationReport {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Transformation data between the functors of two fragment models `M`,
/// `N` from a map `h` given per sort of `L_C`: checks
/// `η_B ∘ F_M(α) = F_N(α) ∘ η_A` for each morphism, and that precomposing
/// with `η` carries each `F_N(φ)` (and each metric) back to `F_M(φ)`.
pub fn logical_transformation(
    lang: &InternalLanguage,
    m: &FiniteStructure,
    n: &FiniteStructure,
    h: &BTreeMap<String, Vec<usize>>,
) -> Result<TransformationReport> {
    let fm = model_to_functor(lang, m)?;
    let fn_ = model_to_functor(lang, n)?;
    let mut out = TransformationReport::default();
    for (_, s) in &lang.sorts {
        let eta = h
            .get(s)
            .ok_or_else(|| Error::Context(format!("no component of η at `{s}`")))?;
        if eta.len() != fm.objects[s].elements.len() || eta.iter().any(|&b| b >= fn_.objects[s].elements.len()) {
            return Err(Error::Structure(format!("component of η at `{s}` is not a map")));
        }
        out.eta.insert(s.clone(), eta.clone());
    }
    for (_, f) in &lang.functions {
        let sym = lang.signature.function(f).unwrap();
        let (a, b) = (&sym.domain[0], &sym.codomain);
        for x in 0..fm.objects[a].elements.len() {
            out.squares_checked += 1;
            let left = h[b][fm.morphisms[f][x]];
            let right = fn_.morphisms[f][h[a][x]];
            if left != right {
                out.witnesses.push(Witness::new(
                    "naturality",
                    vec![f.clone(), fm.objects[a].elements[x].clone()],
                    &format!(
                        "η then F_N gives {}, F_M then η gives {}",
                        fn_.objects[b].elements[right], fn_.objects[b].elements[left]
                    ),
                ));
            }
        }
    }
    for (_, _, _, r) in &lang.relations {
        let a = &lang.signature.relation(r).unwrap().domain[0];
        for x in 0..fm.objects[a].elements.len() {
            let back = &fn_.algebra[r][h[a][x]];
            if *back != fm.algebra[r][x] {
                out.witnesses.push(Witness::new(
                    "precomposition",
                    vec![r.clone(), fm.objects[a].elements[x].clone()],
                    &format!("{} after η, {} before", format_ratio(back), format_ratio(&fm.algebra[r][x])),
                ));
            }
        }
    }
    for (_, s) in &lang.sorts {
        let k = fm.objects[s].elements.len();
        let kn = fn_.objects[s].elements.len();
        for i in 0..k {
            for j in 0..k {
                let back = &fn_.objects[s].metric[h[s][i] * kn + h[s][j]];
                if *back != fm.objects[s].metric[i * k + j] {
                    out.witnesses.push(Witness::new(
                        "precomposition",
                        vec![ident("d", s), fm.objects[s].elements[i].clone(), fm.objects[s].elements[j].clone()],
                        "η does not preserve the metric",
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// `η` induced on every `S_A` by element maps of the base sorts between
/// suite models `i` and `j` (coordinatewise on zero-set tuples).
pub fn induced_eta(
    cat: &DefCategory,
    lang: &InternalLanguage,
    i: usize,
    j: usize,
    base: &BTreeMap<String, Vec<usize>>,
) -> Result<BTreeMap<String, Vec<usize>>> {
    let mut out = BTreeMap::new();
    for (o, s) in &lang.sorts {
        let ctx = &cat.object(*o)?.predicate.context;
        let mut comp = Vec::new();
        for t in &lang.points[i][s] {
            let image: Vec<usize> = ctx.iter().zip(t).map(|(v, &e)| base[&v.sort][e]).collect();
            let k = lang.points[j][s].iter().position(|u| *u == image).ok_or_else(|| {
                Error::Check(format!("the base map leaves the zero set of `{}`", cat.object(*o).unwrap().name))
            })?;
            comp.push(k);
        }
        out.insert(s.clone(), comp);
    }
    Ok(out)
}
