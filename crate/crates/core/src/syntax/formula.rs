use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A variable; its sort is part of its identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub name: String,
    pub sort: String,
}

impl Variable {
    pub fn new(name: &str, sort: &str) -> Self {
        Variable {
            name: name.to_string(),
            sort: sort.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Variable),
    App { func: String, args: Vec<Term> },
}

impl Term {
    pub fn var(name: &str, sort: &str) -> Term {
        Term::Var(Variable::new(name, sort))
    }

    pub fn app(func: &str, args: Vec<Term>) -> Term {
        Term::App {
            func: func.to_string(),
            args,
        }
    }

    pub fn constant(func: &str) -> Term {
        Term::app(func, Vec::new())
    }

    pub fn free_variables(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Variable>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn substitute(&self, v: &Variable, t: &Term) -> Term {
        match self {
            Term::Var(w) if w == v => t.clone(),
            Term::Var(_) => self.clone(),
            Term::App { func, args } => Term::App {
                func: func.clone(),
                args: args.iter().map(|a| a.substitute(v, t)).collect(),
            },
        }
    }

    /// Replaces function applications according to `map`, which returns the
    /// translated term for a function symbol applied to translated arguments.
    pub fn map_functions(&self, map: &dyn Fn(&str, Vec<Term>) -> Result<Term>) -> Result<Term> {
        match self {
            Term::Var(_) => Ok(self.clone()),
            Term::App { func, args } => {
                let args = args
                    .iter()
                    .map(|a| a.map_functions(map))
                    .collect::<Result<Vec<_>>>()?;
                map(func, args)
            }
        }
    }

    pub fn function_symbols(&self, out: &mut BTreeSet<String>) {
        if let Term::App { func, args } = self {
            out.insert(func.clone());
            args.iter().for_each(|a| a.function_symbols(out));
        }
    }
}

/// Formulas over the exact connective basis plus `sup`/`inf` quantifiers.
///
/// `Sup` plays the role of the universal quantifier and `Inf` the
/// existential one, since 0 is the designated truth value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Const(Rational),
    Atom { rel: String, args: Vec<Term> },
    /// `1 - a`
    Neg(Box<Formula>),
    /// `a / 2`
    Half(Box<Formula>),
    /// `max(a - b, 0)`
    Monus(Box<Formula>, Box<Formula>),
    /// `min(a + b, 1)`
    Add(Box<Formula>, Box<Formula>),
    Min(Box<Formula>, Box<Formula>),
    Max(Box<Formula>, Box<Formula>),
    Native { name: String, args: Vec<Formula> },
    Sup { vars: Vec<Variable>, body: Box<Formula> },
    Inf { vars: Vec<Variable>, body: Box<Formula> },
}

impl Formula {
    pub fn constant(q: Rational) -> Formula {
        Formula::Const(q)
    }

    pub fn zero() -> Formula {
        Formula::Const(rational::zero())
    }

    pub fn one() -> Formula {
        Formula::Const(rational::one())
    }

    pub fn atom(rel: &str, args: Vec<Term>) -> Formula {
        Formula::Atom {
            rel: rel.to_string(),
            args,
        }
    }

    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn half(a: Formula) -> Formula {
        Formula::Half(Box::new(a))
    }

    pub fn monus(a: Formula, b: Formula) -> Formula {
        Formula::Monus(Box::new(a), Box::new(b))
    }

    pub fn add(a: Formula, b: Formula) -> Formula {
        Formula::Add(Box::new(a), Box::new(b))
    }

    pub fn min(a: Formula, b: Formula) -> Formula {
        Formula::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Formula, b: Formula) -> Formula {
        Formula::Max(Box::new(a), Box::new(b))
    }

    /// `|a - b|`, desugared to `max(a ∸ b, b ∸ a)`.
    pub fn abs_diff(a: Formula, b: Formula) -> Formula {
        Formula::max(Formula::monus(a.clone(), b.clone()), Formula::monus(b, a))
    }

    /// Left fold of `max`; the empty list gives the constant 0.
    pub fn max_all(items: Vec<Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::max)
            .unwrap_or_else(Formula::zero)
    }

    /// Left fold of `min`; the empty list gives the constant 1.
    pub fn min_all(items: Vec<Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::min)
            .unwrap_or_else(Formula::one)
    }

    /// Left fold of truncated addition; the empty list gives 0.
    pub fn add_all(items: Vec<Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::add)
            .unwrap_or_else(Formula::zero)
    }

    /// `sup vars. body`; an empty tuple returns `body` unchanged.
    pub fn sup(vars: Vec<Variable>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Sup {
                vars,
                body: Box::new(body),
            }
        }
    }

    /// `inf vars. body`; an empty tuple returns `body` unchanged.
    pub fn inf(vars: Vec<Variable>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Inf {
                vars,
                body: Box::new(body),
            }
        }
    }

    /// Max-metric `max_i d_i(x_i, y_i)` between two tuples of equal sorts.
    pub fn tuple_distance(
        sig: &crate::syntax::Signature,
        xs: &[Term],
        ys: &[Term],
    ) -> Result<Formula> {
        if xs.len() != ys.len() {
            return Err(Error::Context("tuple lengths differ".into()));
        }
        let mut parts = Vec::with_capacity(xs.len());
        for (x, y) in xs.iter().zip(ys) {
            let s = sig.sort_of_term(x)?;
            let d = sig.metric_name(&s)?;
            parts.push(Formula::atom(d, vec![x.clone(), y.clone()]));
        }
        Ok(Formula::max_all(parts))
    }

    /// Free variables, deduplicated, in first-occurrence order.
    pub fn free_variables(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Variable>, out: &mut Vec<Variable>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom { args, .. } => {
                for a in args {
                    for v in a.free_variables() {
                        if !bound.contains(&v) && !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
            }
            Formula::Neg(a) | Formula::Half(a) => a.collect_free(bound, out),
            Formula::Monus(a, b) | Formula::Add(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Native { args, .. } => args.iter().for_each(|a| a.collect_free(bound, out)),
            Formula::Sup { vars, body } | Formula::Inf { vars, body } => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variable_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom { args, .. } => {
                for a in args {
                    out.extend(a.free_variables().into_iter().map(|v| v.name));
                }
            }
            Formula::Neg(a) | Formula::Half(a) => a.all_variable_names(out),
            Formula::Monus(a, b) | Formula::Add(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.all_variable_names(out);
                b.all_variable_names(out);
            }
            Formula::Native { args, .. } => args.iter().for_each(|a| a.all_variable_names(out)),
            Formula::Sup { vars, body } | Formula::Inf { vars, body } => {
                out.extend(vars.iter().map(|v| v.name.clone()));
                body.all_variable_names(out);
            }
        }
    }

    pub fn has_native(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Atom { .. } => false,
            Formula::Native { .. } => true,
            Formula::Neg(a) | Formula::Half(a) => a.has_native(),
            Formula::Monus(a, b) | Formula::Add(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.has_native() || b.has_native()
            }
            Formula::Sup { body, .. } | Formula::Inf { body, .. } => body.has_native(),
        }
    }

    /// Relation and function symbols used by the formula.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom { rel, args } => {
                out.insert(rel.clone());
                args.iter().for_each(|a| a.function_symbols(out));
            }
            Formula::Neg(a) | Formula::Half(a) => a.collect_symbols(out),
            Formula::Monus(a, b) | Formula::Add(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Formula::Native { name, args } => {
                out.insert(name.clone());
                args.iter().for_each(|a| a.collect_symbols(out));
            }
            Formula::Sup { body, .. } | Formula::Inf { body, .. } => body.collect_symbols(out),
        }
    }

    /// Capture-avoiding substitution of `t` for the free occurrences of `v`.
    pub fn substitute(
        &self,
        sig: &crate::syntax::Signature,
        v: &Variable,
        t: &Term,
    ) -> Result<Formula> {
        let sort = sig.sort_of_term(t)?;
        if sort != v.sort {
            return Err(Error::Sort(format!(
                "cannot substitute a term of sort {sort} for `{}` of sort {}",
                v.name, v.sort
            )));
        }
        Ok(self.subst_unchecked(v, t))
    }

    /// Substitution after the caller has checked sorts (terms whose sort is
    /// only known to a signature are accepted as is).
    pub fn subst_unchecked(&self, v: &Variable, t: &Term) -> Formula {
        match self {
            Formula::Const(_) => self.clone(),
            Formula::Atom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(|a| a.substitute(v, t)).collect(),
            },
            Formula::Neg(a) => Formula::neg(a.subst_unchecked(v, t)),
            Formula::Half(a) => Formula::half(a.subst_unchecked(v, t)),
            Formula::Monus(a, b) => Formula::monus(a.subst_unchecked(v, t), b.subst_unchecked(v, t)),
            Formula::Add(a, b) => Formula::add(a.subst_unchecked(v, t), b.subst_unchecked(v, t)),
            Formula::Min(a, b) => Formula::min(a.subst_unchecked(v, t), b.subst_unchecked(v, t)),
            Formula::Max(a, b) => Formula::max(a.subst_unchecked(v, t), b.subst_unchecked(v, t)),
            Formula::Native { name, args } => Formula::Native {
                name: name.clone(),
                args: args.iter().map(|a| a.subst_unchecked(v, t)).collect(),
            },
            Formula::Sup { vars, body } | Formula::Inf { vars, body } => {
                let is_sup = matches!(self, Formula::Sup { .. });
                if vars.contains(v) {
                    return self.clone();
                }
                if !body.free_variables().contains(v) {
                    return self.clone();
                }
                let t_vars = t.free_variables();
                let mut avoid = BTreeSet::new();
                body.all_variable_names(&mut avoid);
                avoid.extend(t_vars.iter().map(|w| w.name.clone()));
                avoid.insert(v.name.clone());
                let mut new_vars = Vec::with_capacity(vars.len());
                let mut new_body = (**body).clone();
                for w in vars {
                    if t_vars.iter().any(|tv| tv.name == w.name) || w.name == v.name {
                        let fresh_name = fresh_name(&w.name, &avoid);
                        avoid.insert(fresh_name.clone());
                        let fresh = Variable::new(&fresh_name, &w.sort);
                        new_body = new_body.subst_unchecked(w, &Term::Var(fresh.clone()));
                        new_vars.push(fresh);
                    } else {
                        new_vars.push(w.clone());
                    }
                }
                let new_body = new_body.subst_unchecked(v, t);
                if is_sup {
                    Formula::Sup {
                        vars: new_vars,
                        body: Box::new(new_body),
                    }
                } else {
                    Formula::Inf {
                        vars: new_vars,
                        body: Box::new(new_body),
                    }
                }
            }
        }
    }

    /// Simultaneous renaming of free variables to fresh-or-given variables,
    /// implemented as a sequence of capture-avoiding substitutions through
    /// temporary names.
    pub fn rename_free(&self, pairs: &[(Variable, Variable)]) -> Formula {
        let mut avoid = BTreeSet::new();
        self.all_variable_names(&mut avoid);
        for (a, b) in pairs {
            avoid.insert(a.name.clone());
            avoid.insert(b.name.clone());
        }
        let mut temps = Vec::with_capacity(pairs.len());
        let mut f = self.clone();
        for (a, _) in pairs {
            let t = fresh_name(&format!("{}_tmp", a.name), &avoid);
            avoid.insert(t.clone());
            let tv = Variable::new(&t, &a.sort);
            f = f.subst_unchecked(a, &Term::Var(tv.clone()));
            temps.push(tv);
        }
        for (tv, (_, b)) in temps.iter().zip(pairs) {
            f = f.subst_unchecked(tv, &Term::Var(b.clone()));
        }
        f
    }

    /// Rewrites atoms and function applications through the given maps
    /// (used for interpretations between signatures).
    pub fn map_symbols(
        &self,
        rel: &dyn Fn(&str, Vec<Term>) -> Result<Formula>,
        func: &dyn Fn(&str, Vec<Term>) -> Result<Term>,
        sort: &dyn Fn(&str) -> Result<String>,
    ) -> Result<Formula> {
        Ok(match self {
            Formula::Const(_) => self.clone(),
            Formula::Atom { rel: r, args } => {
                let args = args
                    .iter()
                    .map(|a| map_term_sorts(a, sort)?.map_functions(func))
                    .collect::<Result<Vec<_>>>()?;
                rel(r, args)?
            }
            Formula::Neg(a) => Formula::neg(a.map_symbols(rel, func, sort)?),
            Formula::Half(a) => Formula::half(a.map_symbols(rel, func, sort)?),
            Formula::Monus(a, b) => Formula::monus(
                a.map_symbols(rel, func, sort)?,
                b.map_symbols(rel, func, sort)?,
            ),
            Formula::Add(a, b) => Formula::add(
                a.map_symbols(rel, func, sort)?,
                b.map_symbols(rel, func, sort)?,
            ),
            Formula::Min(a, b) => Formula::min(
                a.map_symbols(rel, func, sort)?,
                b.map_symbols(rel, func, sort)?,
            ),
            Formula::Max(a, b) => Formula::max(
                a.map_symbols(rel, func, sort)?,
                b.map_symbols(rel, func, sort)?,
            ),
            Formula::Native { name, args } => Formula::Native {
                name: name.clone(),
                args: args
                    .iter()
                    .map(|a| a.map_symbols(rel, func, sort))
                    .collect::<Result<Vec<_>>>()?,
            },
            Formula::Sup { vars, body } => Formula::Sup {
                vars: map_vars(vars, sort)?,
                body: Box::new(body.map_symbols(rel, func, sort)?),
            },
            Formula::Inf { vars, body } => Formula::Inf {
                vars: map_vars(vars, sort)?,
                body: Box::new(body.map_symbols(rel, func, sort)?),
            },
        })
    }

    /// Node count, used to bound generated formulas.
    pub fn size(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Atom { .. } => 1,
            Formula::Neg(a) | Formula::Half(a) => 1 + a.size(),
            Formula::Monus(a, b) | Formula::Add(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Native { args, .. } => 1 + args.iter().map(Formula::size).sum::<usize>(),
            Formula::Sup { body, .. } | Formula::Inf { body, .. } => 1 + body.size(),
        }
    }
}

fn map_vars(vars: &[Variable], sort: &dyn Fn(&str) -> Result<String>) -> Result<Vec<Variable>> {
    vars.iter()
        .map(|v| Ok(Variable::new(&v.name, &sort(&v.sort)?)))
        .collect()
}

fn map_term_sorts(t: &Term, sort: &dyn Fn(&str) -> Result<String>) -> Result<Term> {
    Ok(match t {
        Term::Var(v) => Term::Var(Variable::new(&v.name, &sort(&v.sort)?)),
        Term::App { func, args } => Term::App {
            func: func.clone(),
            args: args
                .iter()
                .map(|a| map_term_sorts(a, sort))
                .collect::<Result<Vec<_>>>()?,
        },
    })
}

/// `base'`, `base''`, ... until the name is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

/// Fresh copies of `vars` whose names avoid `avoid`; the chosen names are
/// added to `avoid`.
pub fn fresh_copies(vars: &[Variable], avoid: &mut BTreeSet<String>) -> Vec<Variable> {
    vars.iter()
        .map(|v| {
            let name = if avoid.contains(&v.name) {
                fresh_name(&v.name, avoid)
            } else {
                v.name.clone()
            };
            avoid.insert(name.clone());
            Variable::new(&name, &v.sort)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Variable {
        Variable::new("x", "S")
    }
    fn y() -> Variable {
        Variable::new("y", "S")
    }
    fn r(v: &Variable) -> Formula {
        Formula::atom("R", vec![Term::Var(v.clone())])
    }

    #[test]
    fn free_variables_examples() {
        assert!(Formula::sup(vec![x()], r(&x())).free_variables().is_empty());
        assert_eq!(
            Formula::monus(r(&x()), r(&y())).free_variables(),
            vec![x(), y()]
        );
        let f = Formula::max(r(&x()), Formula::sup(vec![x()], r(&x())));
        assert_eq!(f.free_variables(), vec![x()]);
    }

    #[test]
    fn substitution_examples() {
        let e = Term::constant("e");
        assert_eq!(
            r(&x()).subst_unchecked(&x(), &e),
            Formula::atom("R", vec![e.clone()])
        );
        let bound = Formula::sup(vec![x()], r(&x()));
        assert_eq!(bound.subst_unchecked(&x(), &e), bound);

        // sup y. d(x,y) [x := f(y)] renames the binder
        let d = |a: Term, b: Term| Formula::atom("d", vec![a, b]);
        let f = Formula::sup(vec![y()], d(Term::Var(x()), Term::Var(y())));
        let fy = Term::app("f", vec![Term::Var(y())]);
        let y1 = Variable::new("y'", "S");
        assert_eq!(
            f.subst_unchecked(&x(), &fy),
            Formula::sup(vec![y1.clone()], d(fy.clone(), Term::Var(y1)))
        );
    }

    #[test]
    fn substitution_sort_mismatch() {
        let mut sig = crate::syntax::Signature::new();
        sig.add_sort("S").unwrap();
        sig.add_sort("T").unwrap();
        let t = Term::var("z", "T");
        assert!(matches!(
            r(&x()).substitute(&sig, &x(), &t),
            Err(Error::Sort(_))
        ));
    }

    #[test]
    fn rename_free_swaps() {
        let d = Formula::atom("d", vec![Term::Var(x()), Term::Var(y())]);
        let swapped = d.rename_free(&[(x(), y()), (y(), x())]);
        assert_eq!(
            swapped,
            Formula::atom("d", vec![Term::Var(y()), Term::Var(x())])
        );
    }
}
