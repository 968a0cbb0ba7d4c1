//! Seeded random signatures, structures, formulas and category fragments
//! for the property suites. `CMTK_SEED` overrides the default seed.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::defcat::{build_defcat, DefCategory, Suite};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::semantics::FiniteStructure;
use crate::syntax::{Formula, Signature, Term, Theory, Variable};

pub const MAX_SORTS: usize = 3;
pub const MAX_ELEMENTS: usize = 4;
pub const MAX_DEPTH: u32 = 4;

const DENOMINATORS: [i64; 6] = [2, 3, 4, 6, 8, 12];

/// Reads `CMTK_SEED`, falling back to `default`.
pub fn seed_from_env(default: u64) -> Result<u64> {
    match std::env::var("CMTK_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Check(format!("CMTK_SEED `{s}` is not an unsigned integer"))),
        Err(_) => Ok(default),
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    pub fn from_env(default: u64) -> Result<Gen> {
        Ok(Gen::new(seed_from_env(default)?))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A value `k/n` in `[0,1]` with a small denominator.
    pub fn value(&mut self) -> Rational {
        let n = *DENOMINATORS.choose(&mut self.rng).unwrap();
        rational::ratio(self.rng.gen_range(0..=n), n)
    }

    fn positive_value(&mut self) -> Rational {
        let n = *DENOMINATORS.choose(&mut self.rng).unwrap();
        rational::ratio(self.rng.gen_range(1..=n), n)
    }

    /// Sorts `S0..`, metrics `d0..`, a constant `c0..` per sort, one to three
    /// relations of arity at most 2 and up to two unary functions.
    pub fn signature(&mut self) -> Arc<Signature> {
        let mut sig = Signature::new();
        let k = self.rng.gen_range(1..=MAX_SORTS);
        let sorts: Vec<String> = (0..k).map(|i| format!("S{i}")).collect();
        for (i, s) in sorts.iter().enumerate() {
            sig.add_sort(s).unwrap();
            sig.add_metric(&format!("d{i}"), s).unwrap();
            sig.add_function(&format!("c{i}"), &[], s).unwrap();
        }
        for i in 0..self.rng.gen_range(1..=3) {
            let arity = self.rng.gen_range(0..=2);
            let dom: Vec<&str> = (0..arity)
                .map(|_| sorts.choose(&mut self.rng).unwrap().as_str())
                .collect();
            sig.add_relation(&format!("R{i}"), &dom).unwrap();
        }
        for i in 0..self.rng.gen_range(0..=2) {
            let a = sorts.choose(&mut self.rng).unwrap().clone();
            let b = sorts.choose(&mut self.rng).unwrap().clone();
            sig.add_function(&format!("f{i}"), &[&a], &b).unwrap();
        }
        Arc::new(sig)
    }

    /// `min(1, shortest path)` over random edge weights; zero weights (and
    /// so pseudo-metrics) only when `strict` is off.
    fn metric(&mut self, n: usize, strict: bool) -> Vec<Vec<Rational>> {
        let mut d = vec![vec![rational::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let w = if !strict && self.rng.gen_bool(0.15) {
                    rational::zero()
                } else {
                    self.positive_value()
                };
                d[i][j] = w.clone();
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = &d[i][k] + &d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    /// A structure with one to four elements per sort. With `strict`, every
    /// metric separates points.
    pub fn structure(&mut self, sig: &Arc<Signature>, strict: bool) -> FiniteStructure {
        let carriers: Vec<(String, Vec<String>)> = sig
            .sorts()
            .iter()
            .map(|s| {
                let n = self.rng.gen_range(1..=MAX_ELEMENTS);
                let p = s.to_lowercase();
                (s.clone(), (0..n).map(|i| format!("{p}_{i}")).collect())
            })
            .collect();
        let mut m = FiniteStructure::new(sig.clone(), carriers).unwrap();
        for s in sig.sorts() {
            let n = m.size(s).unwrap();
            let d = self.metric(n, strict);
            let name = sig.metric_name(s).unwrap().to_string();
            m.set_relation(&name, |a| d[a[0]][a[1]].clone()).unwrap();
        }
        let rels: Vec<_> = sig.relations().filter(|r| r.metric_for.is_none()).cloned().collect();
        for r in rels {
            let dims = m.dims(&r.domain).unwrap();
            let vals: Vec<Rational> = (0..dims.iter().product::<usize>()).map(|_| self.value()).collect();
            let mut it = vals.into_iter();
            m.set_relation(&r.name, |_| it.next().unwrap()).unwrap();
        }
        let funcs: Vec<_> = sig.functions().cloned().collect();
        for f in funcs {
            let n = m.size(&f.codomain).unwrap();
            let dims = m.dims(&f.domain).unwrap();
            let vals: Vec<usize> = (0..dims.iter().product::<usize>())
                .map(|_| self.rng.gen_range(0..n))
                .collect();
            let mut it = vals.into_iter();
            m.set_function(&f.name, |_| it.next().unwrap()).unwrap();
        }
        m.validate().unwrap();
        m
    }

    pub fn variable(&mut self, sort: &str) -> Variable {
        self.fresh += 1;
        Variable::new(&format!("v{}", self.fresh), sort)
    }

    /// A term of `sort` over the variables in scope, of depth at most 2.
    pub fn term(&mut self, sig: &Signature, scope: &[Variable], sort: &str, depth: u32) -> Term {
        let vars: Vec<&Variable> = scope.iter().filter(|v| v.sort == sort).collect();
        let funcs: Vec<String> = sig
            .functions()
            .filter(|f| f.codomain == sort && !f.domain.is_empty())
            .map(|f| f.name.clone())
            .collect();
        if depth > 0 && !funcs.is_empty() && self.rng.gen_bool(0.3) {
            let f = funcs.choose(&mut self.rng).unwrap();
            let dom = sig.function(f).unwrap().domain.clone();
            let args = dom.iter().map(|s| self.term(sig, scope, s, depth - 1)).collect();
            return Term::app(f, args);
        }
        if !vars.is_empty() && self.rng.gen_bool(0.8) {
            return Term::Var((*vars.choose(&mut self.rng).unwrap()).clone());
        }
        let c = sig
            .functions()
            .find(|f| f.codomain == sort && f.domain.is_empty())
            .map(|f| f.name.clone());
        match c {
            Some(c) => Term::constant(&c),
            None => Term::Var((*vars.choose(&mut self.rng).expect("a variable or constant of the sort")).clone()),
        }
    }

    fn atom(&mut self, sig: &Signature, scope: &[Variable]) -> Formula {
        if self.rng.gen_bool(0.1) {
            return Formula::constant(self.value());
        }
        let rels: Vec<(String, Vec<String>)> = sig
            .relations()
            .map(|r| (r.name.clone(), r.domain.clone()))
            .collect();
        let (name, dom) = rels.choose(&mut self.rng).unwrap().clone();
        let args = dom.iter().map(|s| self.term(sig, scope, s, 2)).collect();
        Formula::atom(&name, args)
    }

    /// A basis formula of connective depth at most `depth` whose free
    /// variables lie in `scope`; quantifiers bind fresh variables.
    pub fn formula(&mut self, sig: &Signature, scope: &[Variable], depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.atom(sig, scope);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => Formula::neg(self.formula(sig, scope, d)),
            1 => Formula::half(self.formula(sig, scope, d)),
            2 => Formula::monus(self.formula(sig, scope, d), self.formula(sig, scope, d)),
            3 => Formula::add(self.formula(sig, scope, d), self.formula(sig, scope, d)),
            4 => Formula::min(self.formula(sig, scope, d), self.formula(sig, scope, d)),
            5 => Formula::max(self.formula(sig, scope, d), self.formula(sig, scope, d)),
            k => {
                let s = sig.sorts().choose(&mut self.rng).unwrap().clone();
                let v = self.variable(&s);
                let mut inner = scope.to_vec();
                inner.push(v.clone());
                let body = self.formula(sig, &inner, d);
                if k == 6 {
                    Formula::sup(vec![v], body)
                } else {
                    Formula::inf(vec![v], body)
                }
            }
        }
    }

    /// A context of one or two fresh variables.
    pub fn context(&mut self, sig: &Signature, max: usize) -> Vec<Variable> {
        let n = self.rng.gen_range(1..=max);
        (0..n)
            .map(|_| {
                let s = sig.sorts().choose(&mut self.rng).unwrap().clone();
                self.variable(&s)
            })
            .collect()
    }

    /// `min_i D(x̄, t̄_i)` for one or two tuples of closed terms: the
    /// distance to a finite set of named points.
    pub fn point_distance(&mut self, sig: &Signature, ctx: &[Variable]) -> Formula {
        let k = self.rng.gen_range(1..=2);
        let xs: Vec<Term> = ctx.iter().cloned().map(Term::Var).collect();
        let parts = (0..k)
            .map(|_| {
                let ts: Vec<Term> = ctx.iter().map(|v| self.term(sig, &[], &v.sort, 1)).collect();
                Formula::tuple_distance(sig, &xs, &ts).unwrap()
            })
            .collect();
        Formula::min_all(parts)
    }

    /// A category over one strict-metric model of a fresh signature: sort
    /// objects, point objects and products (at most 5 objects), and term
    /// maps, constant maps, inclusions and composites (at most 12 morphisms
    /// including identities).
    pub fn fragment(&mut self) -> Result<DefCategory> {
        let sig = self.signature();
        let m = self.structure(&sig, true);
        let theory = Theory::new(sig.clone(), Vec::new())?;
        let suite = Suite::new(vec![("M".into(), m)])?;
        let mut cat = build_defcat(theory, suite, &[])?;
        let mut objs = Vec::new();
        let sorts = sig.sorts().to_vec();
        for s in sorts.iter().take(2) {
            let x = Variable::new("x", s);
            let dx = Formula::atom(sig.metric_name(s)?, vec![Term::Var(x.clone()), Term::Var(x.clone())]);
            objs.push((cat.add_object(&format!("A_{s}"), dx, vec![x.clone()])?, s.clone(), None));
            if self.rng.gen_bool(0.6) {
                let c = self.term(&sig, &[], s, 1);
                let p = Formula::atom(sig.metric_name(s)?, vec![Term::Var(x.clone()), c.clone()]);
                objs.push((cat.add_object(&format!("P_{s}"), p, vec![x])?, s.clone(), Some(c)));
            }
        }
        if objs.len() < 4 && self.rng.gen_bool(0.5) {
            let a = objs[0].0;
            let b = objs.choose(&mut self.rng).unwrap().0;
            cat.product(a, b)?;
        }
        let budget = 12usize;
        for _ in 0..20 {
            if cat.morphisms().count() + 1 >= budget {
                break;
            }
            let (src, ssort, _) = objs.choose(&mut self.rng).unwrap().clone();
            let (tgt, tsort, point) = objs.choose(&mut self.rng).unwrap().clone();
            let x = Variable::new("x", &ssort);
            let y = Variable::new("y", &tsort);
            let t = match &point {
                Some(c) => c.clone(),
                None => self.term(&sig, std::slice::from_ref(&x), &tsort, 2),
            };
            let graph = Formula::atom(sig.metric_name(&tsort)?, vec![t, Term::Var(y.clone())]);
            let name = format!("m{}", cat.morphisms().count());
            // maps leaving a target point set are not morphisms; skip them
            let _ = cat.add_morphism(&name, src, tgt, graph, vec![x], vec![y]);
        }
        for _ in 0..10 {
            if cat.morphisms().count() >= budget {
                break;
            }
            let ms: Vec<_> = cat.morphisms().map(|(h, _)| h).collect();
            let f = *ms.choose(&mut self.rng).unwrap();
            let g = *ms.choose(&mut self.rng).unwrap();
            if cat.target(f)? == cat.source(g)? {
                cat.compose(f, g)?;
            }
        }
        Ok(cat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::check_all_metrics;

    #[test]
    fn structures_are_valid() {
        let mut g = Gen::new(7);
        for _ in 0..50 {
            let sig = g.signature();
            assert!(sig.sorts().len() <= MAX_SORTS);
            let strict = g.rng().gen_bool(0.5);
            let m = g.structure(&sig, strict);
            assert!(check_all_metrics(&m).unwrap().is_empty());
            for s in sig.sorts() {
                assert!(m.size(s).unwrap() <= MAX_ELEMENTS);
                if strict {
                    let n = m.size(s).unwrap();
                    for i in 0..n {
                        for j in 0..n {
                            assert_eq!(*m.distance(s, i, j).unwrap() == rational::zero(), i == j);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn formulas_check() {
        let mut g = Gen::new(8);
        for _ in 0..100 {
            let sig = g.signature();
            let ctx = g.context(&sig, 2);
            let f = g.formula(&sig, &ctx, MAX_DEPTH);
            sig.check_formula(&f).unwrap();
            assert!(f.free_variables().iter().all(|v| ctx.contains(v)));
        }
    }

    #[test]
    fn seeds_repeat() {
        let a = {
            let mut g = Gen::new(3);
            let s = g.signature();
            g.structure(&s, false).to_json()
        };
        let b = {
            let mut g = Gen::new(3);
            let s = g.signature();
            g.structure(&s, false).to_json()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn fragments_are_small() {
        let mut g = Gen::new(9);
        for _ in 0..10 {
            let cat = g.fragment().unwrap();
            assert!(cat.objects().count() <= 5);
            assert!(cat.morphisms().count() <= 12);
        }
    }
}
