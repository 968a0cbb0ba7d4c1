use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::syntax::formula::{Formula, Term, Variable};

/// A finite staircase of `(delta, epsilon)` pairs: distance `< delta` in every
/// argument forces a value difference `<= epsilon`. Levels not listed are
/// unconstrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    pairs: Vec<(Rational, Rational)>,
}

impl Modulus {
    pub fn new(mut pairs: Vec<(Rational, Rational)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Check("modulus needs at least one (delta, epsilon) pair".into()));
        }
        for (d, e) in &pairs {
            let positive = |q: &Rational| *q > rational::zero() && *q <= rational::one();
            if !positive(d) || !positive(e) {
                return Err(Error::Check(format!(
                    "modulus entries must lie in (0,1]: ({}, {})",
                    rational::format_ratio(d),
                    rational::format_ratio(e)
                )));
            }
        }
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| b.0.cmp(&a.0)));
        Ok(Modulus { pairs })
    }

    /// Pairs as `(delta, epsilon)`, epsilon descending.
    pub fn pairs(&self) -> &[(Rational, Rational)] {
        &self.pairs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSymbol {
    pub name: String,
    pub domain: Vec<String>,
    pub codomain: String,
    pub modulus: Option<Modulus>,
}

impl FunctionSymbol {
    pub fn arity(&self) -> usize {
        self.domain.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSymbol {
    pub name: String,
    pub domain: Vec<String>,
    pub modulus: Option<Modulus>,
    /// Set when this symbol is the designated pseudo-metric of a sort.
    pub metric_for: Option<String>,
}

pub type NativeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A connective outside the exact basis. It must declare a Lipschitz
/// constant (max-norm on inputs); its implementation is bound at runtime.
#[derive(Clone)]
pub struct NativeConnective {
    pub name: String,
    pub arity: usize,
    pub lipschitz: Rational,
    pub func: Option<NativeFn>,
}

impl fmt::Debug for NativeConnective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NativeConnective")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("lipschitz", &self.lipschitz)
            .field("bound", &self.func.is_some())
            .finish()
    }
}

impl PartialEq for NativeConnective {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.arity == other.arity && self.lipschitz == other.lipschitz
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Signature {
    sorts: Vec<String>,
    functions: IndexMap<String, FunctionSymbol>,
    relations: IndexMap<String, RelationSymbol>,
    natives: IndexMap<String, NativeConnective>,
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if !valid_identifier(name) {
            return Err(Error::Check(format!("`{name}` is not a valid identifier")));
        }
        if self.functions.contains_key(name)
            || self.relations.contains_key(name)
            || self.natives.contains_key(name)
        {
            return Err(Error::Check(format!("symbol `{name}` declared twice")));
        }
        Ok(())
    }

    fn check_sort(&self, sort: &str) -> Result<()> {
        if self.has_sort(sort) {
            Ok(())
        } else {
            Err(Error::UnknownSymbol(sort.to_string()))
        }
    }

    pub fn add_sort(&mut self, name: &str) -> Result<()> {
        if !valid_identifier(name) {
            return Err(Error::Check(format!("`{name}` is not a valid sort name")));
        }
        if self.has_sort(name) {
            return Err(Error::Check(format!("sort `{name}` declared twice")));
        }
        self.sorts.push(name.to_string());
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, domain: &[&str], codomain: &str) -> Result<()> {
        self.check_fresh(name)?;
        for s in domain.iter().chain(std::iter::once(&codomain)) {
            self.check_sort(s)?;
        }
        self.functions.insert(
            name.to_string(),
            FunctionSymbol {
                name: name.to_string(),
                domain: domain.iter().map(|s| s.to_string()).collect(),
                codomain: codomain.to_string(),
                modulus: None,
            },
        );
        Ok(())
    }

    pub fn add_relation(&mut self, name: &str, domain: &[&str]) -> Result<()> {
        self.check_fresh(name)?;
        for s in domain {
            self.check_sort(s)?;
        }
        self.relations.insert(
            name.to_string(),
            RelationSymbol {
                name: name.to_string(),
                domain: domain.iter().map(|s| s.to_string()).collect(),
                modulus: None,
                metric_for: None,
            },
        );
        Ok(())
    }

    /// Declares `name : sort x sort` as the designated metric of `sort`.
    pub fn add_metric(&mut self, name: &str, sort: &str) -> Result<()> {
        if let Some(existing) = self.metric_of(sort) {
            return Err(Error::Check(format!(
                "sort `{sort}` already has metric `{}`",
                existing.name
            )));
        }
        self.add_relation(name, &[sort, sort])?;
        self.relations[name].metric_for = Some(sort.to_string());
        Ok(())
    }

    pub fn add_native(&mut self, name: &str, arity: usize, lipschitz: Rational) -> Result<()> {
        self.check_fresh(name)?;
        if lipschitz < rational::zero() {
            return Err(Error::Check("Lipschitz constant must be non-negative".into()));
        }
        self.natives.insert(
            name.to_string(),
            NativeConnective {
                name: name.to_string(),
                arity,
                lipschitz,
                func: None,
            },
        );
        Ok(())
    }

    pub fn bind_native(&mut self, name: &str, func: NativeFn) -> Result<()> {
        let n = self
            .natives
            .get_mut(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        n.func = Some(func);
        Ok(())
    }

    pub fn set_modulus(&mut self, symbol: &str, modulus: Modulus) -> Result<()> {
        if let Some(f) = self.functions.get_mut(symbol) {
            f.modulus = Some(modulus);
        } else if let Some(r) = self.relations.get_mut(symbol) {
            r.modulus = Some(modulus);
        } else {
            return Err(Error::UnknownSymbol(symbol.to_string()));
        }
        Ok(())
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.iter().any(|s| s == sort)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionSymbol> {
        self.functions.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationSymbol> {
        self.relations.values()
    }

    pub fn natives(&self) -> impl Iterator<Item = &NativeConnective> {
        self.natives.values()
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSymbol> {
        self.functions.get(name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSymbol> {
        self.relations.get(name)
    }

    pub fn native(&self, name: &str) -> Option<&NativeConnective> {
        self.natives.get(name)
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        self.functions.contains_key(name)
            || self.relations.contains_key(name)
            || self.natives.contains_key(name)
    }

    pub fn metric_of(&self, sort: &str) -> Option<&RelationSymbol> {
        self.relations
            .values()
            .find(|r| r.metric_for.as_deref() == Some(sort))
    }

    pub fn metric_name(&self, sort: &str) -> Result<&str> {
        self.metric_of(sort)
            .map(|r| r.name.as_str())
            .ok_or_else(|| Error::Check(format!("no metric designated for sort `{sort}`")))
    }

    /// True when every sort has a designated metric.
    pub fn is_metric(&self) -> bool {
        self.sorts.iter().all(|s| self.metric_of(s).is_some())
    }

    /// Union of two signatures; shared names must agree exactly.
    pub fn merged(&self, other: &Signature) -> Result<Signature> {
        let mut out = self.clone();
        for s in &other.sorts {
            if !out.has_sort(s) {
                out.sorts.push(s.clone());
            }
        }
        for (n, f) in &other.functions {
            match out.functions.get(n) {
                Some(g) if g.domain == f.domain && g.codomain == f.codomain => {}
                Some(_) => return Err(Error::Check(format!("function `{n}` declared differently"))),
                None => {
                    if out.relations.contains_key(n) || out.natives.contains_key(n) {
                        return Err(Error::Check(format!("symbol `{n}` declared twice")));
                    }
                    out.functions.insert(n.clone(), f.clone());
                }
            }
        }
        for (n, r) in &other.relations {
            match out.relations.get(n) {
                Some(g) if g.domain == r.domain && g.metric_for == r.metric_for => {}
                Some(_) => return Err(Error::Check(format!("relation `{n}` declared differently"))),
                None => {
                    if out.functions.contains_key(n) || out.natives.contains_key(n) {
                        return Err(Error::Check(format!("symbol `{n}` declared twice")));
                    }
                    out.relations.insert(n.clone(), r.clone());
                }
            }
        }
        for (n, c) in &other.natives {
            if !out.natives.contains_key(n) {
                out.natives.insert(n.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Sort of a term, checking argument sorts along the way.
    pub fn sort_of_term(&self, t: &Term) -> Result<String> {
        match t {
            Term::Var(v) => {
                self.check_sort(&v.sort)?;
                Ok(v.sort.clone())
            }
            Term::App { func, args } => {
                let sym = self
                    .function(func)
                    .ok_or_else(|| Error::UnknownSymbol(func.clone()))?;
                if sym.arity() != args.len() {
                    return Err(Error::Sort(format!(
                        "`{func}` expects {} arguments, got {}",
                        sym.arity(),
                        args.len()
                    )));
                }
                for (a, s) in args.iter().zip(&sym.domain) {
                    let got = self.sort_of_term(a)?;
                    if &got != s {
                        return Err(Error::Sort(format!(
                            "argument of `{func}` has sort {got}, expected {s}"
                        )));
                    }
                }
                Ok(sym.codomain.clone())
            }
        }
    }

    /// Checks that a formula is well formed over this signature.
    pub fn check_formula(&self, f: &Formula) -> Result<()> {
        match f {
            Formula::Const(c) => {
                if rational::in_unit_interval(c) {
                    Ok(())
                } else {
                    Err(Error::Check(format!(
                        "constant {} outside [0,1]",
                        rational::format_ratio(c)
                    )))
                }
            }
            Formula::Atom { rel, args } => {
                let sym = self
                    .relation(rel)
                    .ok_or_else(|| Error::UnknownSymbol(rel.clone()))?;
                if sym.domain.len() != args.len() {
                    return Err(Error::Sort(format!(
                        "`{rel}` expects {} arguments, got {}",
                        sym.domain.len(),
                        args.len()
                    )));
                }
                for (a, s) in args.iter().zip(&sym.domain) {
                    let got = self.sort_of_term(a)?;
                    if &got != s {
                        return Err(Error::Sort(format!(
                            "argument of `{rel}` has sort {got}, expected {s}"
                        )));
                    }
                }
                Ok(())
            }
            Formula::Neg(a) | Formula::Half(a) => self.check_formula(a),
            Formula::Monus(a, b) | Formula::Add(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                self.check_formula(a)?;
                self.check_formula(b)
            }
            Formula::Native { name, args } => {
                let n = self
                    .native(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                if n.arity != args.len() {
                    return Err(Error::Sort(format!(
                        "native `{name}` expects {} arguments, got {}",
                        n.arity,
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| self.check_formula(a))
            }
            Formula::Sup { vars, body } | Formula::Inf { vars, body } => {
                check_distinct(vars)?;
                for v in vars {
                    self.check_sort(&v.sort)?;
                }
                self.check_formula(body)
            }
        }
    }
}

pub(crate) fn check_distinct(vars: &[Variable]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::Check(format!(
                "variable `{}` repeated in quantifier tuple",
                v.name
            )));
        }
    }
    Ok(())
}

/// A set of sentences over a signature, each asserted to evaluate to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub signature: Arc<Signature>,
    pub axioms: Vec<Formula>,
}

impl Theory {
    pub fn new(signature: Arc<Signature>, axioms: Vec<Formula>) -> Result<Self> {
        for a in &axioms {
            signature.check_formula(a)?;
            let fv = a.free_variables();
            if !fv.is_empty() {
                return Err(Error::Check(format!(
                    "axiom has free variable `{}`",
                    fv[0].name
                )));
            }
        }
        Ok(Theory { signature, axioms })
    }

    pub fn is_metric(&self) -> bool {
        self.signature.is_metric()
    }

    /// Pseudo-metric sentences for every sort's metric, plus one sentence per
    /// declared modulus pair. Modulus sequents are encoded as
    /// `min(min_i (delta ∸ d_i), |Δ| ∸ epsilon)`, which is 0 exactly when some
    /// `d_i >= delta` or the difference is at most epsilon.
    pub fn metric_axioms(&self) -> Result<Vec<Formula>> {
        let sig = &self.signature;
        let mut out = Vec::new();
        for sort in sig.sorts() {
            let d = sig.metric_name(sort)?;
            out.extend(pseudo_metric_sentences(d, sort));
        }
        for f in sig.functions() {
            if let Some(m) = &f.modulus {
                let d_cod = sig.metric_name(&f.codomain)?;
                for (delta, eps) in m.pairs() {
                    out.push(modulus_sentence(sig, &f.domain, delta, eps, |xs, ys| {
                        Formula::atom(
                            d_cod,
                            vec![
                                Term::app(&f.name, xs.iter().cloned().map(Term::Var).collect()),
                                Term::app(&f.name, ys.iter().cloned().map(Term::Var).collect()),
                            ],
                        )
                    })?);
                }
            }
        }
        for r in sig.relations() {
            if let Some(m) = &r.modulus {
                for (delta, eps) in m.pairs() {
                    out.push(modulus_sentence(sig, &r.domain, delta, eps, |xs, ys| {
                        Formula::abs_diff(
                            Formula::atom(&r.name, xs.iter().cloned().map(Term::Var).collect()),
                            Formula::atom(&r.name, ys.iter().cloned().map(Term::Var).collect()),
                        )
                    })?);
                }
            }
        }
        Ok(out)
    }
}

/// `sup x. d(x,x)`, `sup x,y. |d(x,y) - d(y,x)|`, `sup x,y,z. d(x,z) ∸ (d(x,y) + d(y,z))`.
pub fn pseudo_metric_sentences(d: &str, sort: &str) -> Vec<Formula> {
    let x = Variable::new("x", sort);
    let y = Variable::new("y", sort);
    let z = Variable::new("z", sort);
    let dd = |a: &Variable, b: &Variable| {
        Formula::atom(d, vec![Term::Var(a.clone()), Term::Var(b.clone())])
    };
    vec![
        Formula::sup(vec![x.clone()], dd(&x, &x)),
        Formula::sup(
            vec![x.clone(), y.clone()],
            Formula::abs_diff(dd(&x, &y), dd(&y, &x)),
        ),
        Formula::sup(
            vec![x.clone(), y.clone(), z.clone()],
            Formula::monus(dd(&x, &z), Formula::add(dd(&x, &y), dd(&y, &z))),
        ),
    ]
}

fn modulus_sentence(
    sig: &Signature,
    domain: &[String],
    delta: &Rational,
    eps: &Rational,
    body: impl Fn(&[Variable], &[Variable]) -> Formula,
) -> Result<Formula> {
    let xs: Vec<Variable> = domain
        .iter()
        .enumerate()
        .map(|(i, s)| Variable::new(&format!("x{}", i + 1), s))
        .collect();
    let ys: Vec<Variable> = domain
        .iter()
        .enumerate()
        .map(|(i, s)| Variable::new(&format!("y{}", i + 1), s))
        .collect();
    let mut disjuncts = Vec::new();
    for ((x, y), s) in xs.iter().zip(&ys).zip(domain) {
        let d = sig.metric_name(s)?;
        disjuncts.push(Formula::monus(
            Formula::Const(delta.clone()),
            Formula::atom(d, vec![Term::Var(x.clone()), Term::Var(y.clone())]),
        ));
    }
    disjuncts.push(Formula::monus(body(&xs, &ys), Formula::Const(eps.clone())));
    let mut vars = xs.clone();
    vars.extend(ys.iter().cloned());
    Ok(Formula::sup(vars, Formula::min_all(disjuncts)))
}
