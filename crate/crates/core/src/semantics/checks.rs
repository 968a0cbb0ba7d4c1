use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::eval::{formula_table, Assignment, Compiled};
use crate::semantics::structure::{tuples, FiniteStructure};
use crate::syntax::{Formula, Modulus, Variable};

/// Reflexivity, symmetry and the triangle inequality for a binary relation on
/// one sort, over all pairs and triples.
pub fn check_pseudo_metric(m: &FiniteStructure, d: &str) -> Result<Vec<Witness>> {
    let rel = m
        .signature()
        .relation(d)
        .ok_or_else(|| Error::UnknownSymbol(d.to_string()))?;
    if rel.domain.len() != 2 || rel.domain[0] != rel.domain[1] {
        return Err(Error::Sort(format!("`{d}` is not binary on a single sort")));
    }
    let sort = rel.domain[0].clone();
    let n = m.size(&sort)?;
    let t = m.relation_table(d)?;
    let v = |a: usize, b: usize| t.get(&[a, b]);
    let name = |i: usize| m.element_name(&sort, i).to_string();
    let mut out = Vec::new();
    for a in 0..n {
        if *v(a, a) != rational::zero() {
            out.push(Witness::new(
                "reflexivity",
                vec![name(a)],
                format!("{d}({0},{0}) = {1}", name(a), format_ratio(v(a, a))),
            ));
        }
        for b in a + 1..n {
            if v(a, b) != v(b, a) {
                out.push(Witness::new(
                    "symmetry",
                    vec![name(a), name(b)],
                    format!(
                        "{d}({0},{1}) = {2} but {d}({1},{0}) = {3}",
                        name(a),
                        name(b),
                        format_ratio(v(a, b)),
                        format_ratio(v(b, a))
                    ),
                ));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let via = v(a, b) + v(b, c);
                if *v(a, c) > via {
                    out.push(Witness::new(
                        "triangle",
                        vec![name(a), name(b), name(c)],
                        format!(
                            "{d}({0},{2}) = {3} > {d}({0},{1}) + {d}({1},{2}) = {4}",
                            name(a),
                            name(b),
                            name(c),
                            format_ratio(v(a, c)),
                            format_ratio(&via)
                        ),
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Checks every designated metric of the structure.
pub fn check_all_metrics(m: &FiniteStructure) -> Result<Vec<Witness>> {
    let mut out = Vec::new();
    for s in m.signature().sorts() {
        let d = m.signature().metric_name(s)?.to_string();
        for mut w in check_pseudo_metric(m, &d)? {
            w.check = format!("{}:{d}", w.check);
            out.push(w);
        }
    }
    Ok(out)
}

/// Scans a modulus staircase: whenever every argument distance is `< δ`, the
/// values (relations) or the codomain distance (functions) must differ by at
/// most `ε`.
pub fn check_modulus(m: &FiniteStructure, symbol: &str, modulus: &Modulus) -> Result<Vec<Witness>> {
    let sig = m.signature().clone();
    enum Kind<'a> {
        Rel(&'a crate::semantics::Table<Rational>),
        Fun(&'a crate::semantics::Table<usize>, String),
    }
    let (domain, kind) = if let Some(r) = sig.relation(symbol) {
        (r.domain.clone(), Kind::Rel(m.relation_table(symbol)?))
    } else if let Some(f) = sig.function(symbol) {
        (
            f.domain.clone(),
            Kind::Fun(m.function_table(symbol)?, f.codomain.clone()),
        )
    } else {
        return Err(Error::UnknownSymbol(symbol.to_string()));
    };
    let dims = m.dims(&domain)?;
    let all: Vec<Vec<usize>> = tuples(&dims).collect();
    let mut out = Vec::new();
    for (delta, eps) in modulus.pairs() {
        for x in &all {
            for y in &all {
                let mut close = true;
                for (i, s) in domain.iter().enumerate() {
                    if m.distance(s, x[i], y[i])? >= delta {
                        close = false;
                        break;
                    }
                }
                if !close {
                    continue;
                }
                let diff = match &kind {
                    Kind::Rel(t) => rational::abs_diff(t.get(x), t.get(y)),
                    Kind::Fun(t, cod) => m.distance(cod, *t.get(x), *t.get(y))?.clone(),
                };
                if diff > *eps {
                    let mut at = m.names(&domain, x);
                    at.extend(m.names(&domain, y));
                    out.push(Witness::new(
                        "modulus",
                        at,
                        format!(
                            "{symbol}: distance < {} but difference {} > {}",
                            format_ratio(delta),
                            format_ratio(&diff),
                            format_ratio(eps)
                        ),
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Checks every modulus declared in the signature.
pub fn check_declared_moduli(m: &FiniteStructure) -> Result<Vec<Witness>> {
    let sig = m.signature().clone();
    let mut out = Vec::new();
    for r in sig.relations() {
        if let Some(md) = &r.modulus {
            out.extend(check_modulus(m, &r.name, md)?);
        }
    }
    for f in sig.functions() {
        if let Some(md) = &f.modulus {
            out.extend(check_modulus(m, &f.name, md)?);
        }
    }
    Ok(out)
}

/// An empirical modulus: `steps` lists `(δ, ε)` with "max-distance `< δ`
/// implies difference `≤ ε`", one step per observed positive distance level;
/// `beyond` bounds the difference over all pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Staircase {
    pub steps: Vec<(Rational, Rational)>,
    pub beyond: Rational,
}

impl Staircase {
    /// Builds the staircase from observed `(distance, difference)` pairs.
    pub fn from_observations(obs: impl IntoIterator<Item = (Rational, Rational)>) -> Staircase {
        let mut levels: Vec<(Rational, Rational)> = Vec::new();
        for (d, diff) in obs {
            match levels.iter_mut().find(|(l, _)| *l == d) {
                Some((_, e)) => {
                    if diff > *e {
                        *e = diff;
                    }
                }
                None => levels.push((d, diff)),
            }
        }
        levels.sort();
        let mut steps = Vec::new();
        let mut running = rational::zero();
        for (d, diff) in levels {
            if d > rational::zero() {
                steps.push((d, running.clone()));
            }
            if diff > running {
                running = diff;
            }
        }
        Staircase {
            steps,
            beyond: running,
        }
    }

    /// Bound on the difference between points at distance at most `r`: the
    /// ε of the smallest step with δ > r, or `beyond`.
    pub fn omega(&self, r: &Rational) -> &Rational {
        self.steps
            .iter()
            .find(|(d, _)| d > r)
            .map(|(_, e)| e)
            .unwrap_or(&self.beyond)
    }

    pub fn to_json(&self) -> Json {
        let mut rows: Vec<Json> = self
            .steps
            .iter()
            .map(|(d, e)| json!({"delta": format_ratio(d), "epsilon": format_ratio(e)}))
            .collect();
        let last = self
            .steps
            .last()
            .map(|(d, _)| format!(">{}", format_ratio(d)))
            .unwrap_or_else(|| "any".to_string());
        rows.push(json!({"delta": last, "epsilon": format_ratio(&self.beyond)}));
        Json::Array(rows)
    }
}

/// Empirical modulus of a formula in its context, with respect to the
/// max-metric on context tuples.
pub fn best_modulus(m: &FiniteStructure, f: &Formula, ctx: &[Variable]) -> Result<Staircase> {
    let table = formula_table(m, f, ctx)?;
    let sorts: Vec<String> = ctx.iter().map(|v| v.sort.clone()).collect();
    table_modulus(m, &sorts, &table.data)
}

/// Empirical modulus of a value table indexed by tuples of `sorts`.
pub fn table_modulus(m: &FiniteStructure, sorts: &[String], data: &[Rational]) -> Result<Staircase> {
    let dims = m.dims(sorts)?;
    let all: Vec<Vec<usize>> = tuples(&dims).collect();
    let mut obs = Vec::with_capacity(all.len() * all.len());
    for (i, x) in all.iter().enumerate() {
        for (j, y) in all.iter().enumerate() {
            obs.push((
                m.tuple_distance(sorts, x, y)?,
                rational::abs_diff(&data[i], &data[j]),
            ));
        }
    }
    Ok(Staircase::from_observations(obs))
}

/// Identifies points at distance 0 in every sort. Fails if some symbol does
/// not respect the identification, or if a supplied sentence changes value.
pub fn quotient_completion(m: &FiniteStructure, sentences: &[Formula]) -> Result<FiniteStructure> {
    let bad = check_all_metrics(m)?;
    if let Some(w) = bad.first() {
        return Err(Error::Structure(format!(
            "not a pseudo-metric structure: {} at {:?}: {}",
            w.check, w.at, w.detail
        )));
    }
    let sig = m.signature().clone();
    // rep[sort][i] = least element at distance 0 from i
    let mut reps = Vec::new();
    for s in sig.sorts() {
        let n = m.size(s)?;
        let mut r = Vec::with_capacity(n);
        for i in 0..n {
            let mut k = i;
            for j in 0..i {
                if *m.distance(s, j, i)? == rational::zero() {
                    k = j;
                    break;
                }
            }
            r.push(k);
        }
        reps.push(r);
    }
    let sort_ix = |s: &str| sig.sorts().iter().position(|t| t == s).expect("known sort");
    let rep_of = |sorts: &[String], t: &[usize]| -> Vec<usize> {
        sorts
            .iter()
            .zip(t)
            .map(|(s, &i)| reps[sort_ix(s)][i])
            .collect()
    };
    for r in sig.relations() {
        let t = m.relation_table(&r.name)?;
        for x in tuples(&t.dims) {
            let y = rep_of(&r.domain, &x);
            if t.get(&x) != t.get(&y) {
                return Err(Error::Structure(format!(
                    "relation `{}` is not congruent: {:?} and {:?} are at distance 0 but take values {} and {}",
                    r.name,
                    m.names(&r.domain, &x),
                    m.names(&r.domain, &y),
                    format_ratio(t.get(&x)),
                    format_ratio(t.get(&y))
                )));
            }
        }
    }
    for f in sig.functions() {
        let t = m.function_table(&f.name)?;
        let c = sort_ix(&f.codomain);
        for x in tuples(&t.dims) {
            let y = rep_of(&f.domain, &x);
            if reps[c][*t.get(&x)] != reps[c][*t.get(&y)] {
                return Err(Error::Structure(format!(
                    "function `{}` is not congruent at {:?}",
                    f.name,
                    m.names(&f.domain, &x)
                )));
            }
        }
    }
    // new index of each old representative
    let mut keep: Vec<Vec<usize>> = Vec::new();
    let mut carriers = Vec::new();
    for (k, s) in sig.sorts().iter().enumerate() {
        let kept: Vec<usize> = (0..reps[k].len()).filter(|&i| reps[k][i] == i).collect();
        carriers.push((s.clone(), kept.iter().map(|&i| m.element_name(s, i).to_string()).collect()));
        keep.push(kept);
    }
    let mut q = FiniteStructure::new(sig.clone(), carriers)?;
    let lift = |sorts: &[String], t: &[usize]| -> Vec<usize> {
        sorts
            .iter()
            .zip(t)
            .map(|(s, &i)| keep[sort_ix(s)][i])
            .collect()
    };
    for r in sig.relations() {
        let t = m.relation_table(&r.name)?;
        q.set_relation(&r.name, |x| t.get(&lift(&r.domain, x)).clone())?;
    }
    for f in sig.functions() {
        let t = m.function_table(&f.name)?;
        let c = sort_ix(&f.codomain);
        q.set_function(&f.name, |x| {
            let old = reps[c][*t.get(&lift(&f.domain, x))];
            keep[c].iter().position(|&i| i == old).expect("representative kept")
        })?;
    }
    for s in sentences {
        let before = Compiled::new(m, s, &[])?.eval(&[]);
        let after = Compiled::new(&q, s, &[])?.eval(&[]);
        if before != after {
            return Err(Error::Check(format!(
                "quotient changed the value of `{s}` from {before} to {after}"
            )));
        }
    }
    Ok(q)
}

/// Value of a sentence in each structure, with `Assignment` left empty.
pub fn sentence_values(m: &FiniteStructure, sentences: &[Formula]) -> Result<Vec<Rational>> {
    sentences
        .iter()
        .map(|s| crate::semantics::eval_exact(m, s, &Assignment::new()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m0, m0_signature};
    use crate::rational::ratio;
    use crate::syntax::{parse_formula, parse_signature};
    use std::sync::Arc;

    #[test]
    fn m0_is_pseudo_metric() {
        assert!(check_pseudo_metric(&m0(), "d").unwrap().is_empty());
    }

    #[test]
    fn triangle_violation_witnessed() {
        let text = r#"{"sorts":{"S":["a","b","c"]},
            "metrics":{"d":[["a","b","1"],["b","c","0"],["a","c","0"]]},
            "relations":{"R":[["a","0"],["b","0"],["c","0"]]},
            "functions":{"f":{"a":"a","b":"b","c":"c"},"e":"a"}}"#;
        let m = FiniteStructure::from_json(m0_signature(), text).unwrap();
        let w = check_pseudo_metric(&m, "d").unwrap();
        assert!(w
            .iter()
            .any(|w| w.check == "triangle" && w.at == vec!["a", "c", "b"]));
    }

    #[test]
    fn one_point_passes() {
        let sig = Arc::new(parse_signature("sort S; metric d : S;").unwrap());
        let m = FiniteStructure::from_json(sig, r#"{"sorts":{"S":["p"]}}"#).unwrap();
        assert!(check_pseudo_metric(&m, "d").unwrap().is_empty());
    }

    #[test]
    fn modulus_examples() {
        let m = m0();
        let md = |pairs: &[(i64, i64, i64, i64)]| {
            Modulus::new(
                pairs
                    .iter()
                    .map(|&(a, b, c, d)| (ratio(a, b), ratio(c, d)))
                    .collect(),
            )
            .unwrap()
        };
        let w = check_modulus(&m, "R", &md(&[(6, 10, 6, 10)])).unwrap();
        assert!(w.iter().any(|w| w.at == vec!["b", "c"]));
        assert!(check_modulus(&m, "R", &md(&[(4, 10, 1, 1)])).unwrap().is_empty());
        assert!(check_modulus(&m, "f", &md(&[(6, 10, 6, 10)])).unwrap().is_empty());
    }

    #[test]
    fn best_modulus_of_r() {
        let m = m0();
        let x = Variable::new("x", "S");
        let r = parse_formula(m.signature(), "R(x)").unwrap();
        let s = best_modulus(&m, &r, &[x.clone()]).unwrap();
        assert_eq!(
            s.steps,
            vec![(ratio(1, 2), ratio(0, 1)), (ratio(1, 1), ratio(3, 4))]
        );
        assert_eq!(s.beyond, ratio(1, 1));
        assert_eq!(s.omega(&ratio(0, 1)), &ratio(0, 1));
        assert_eq!(s.omega(&ratio(1, 2)), &ratio(3, 4));
        assert_eq!(s.omega(&ratio(1, 1)), &ratio(1, 1));

        let c = best_modulus(&m, &Formula::Const(ratio(1, 3)), &[x.clone()]).unwrap();
        assert!(c.steps.iter().all(|(_, e)| *e == rational::zero()));
        assert_eq!(c.beyond, rational::zero());

        let y = Variable::new("y", "S");
        let d = parse_formula(m.signature(), "d(x,y)").unwrap();
        let s = best_modulus(&m, &d, &[x, y]).unwrap();
        assert!(s.steps.iter().all(|(delta, eps)| eps <= delta));
    }

    #[test]
    fn quotient_examples() {
        let sig = Arc::new(parse_signature("sort S; metric d : S; rel R : S;").unwrap());
        let ok = r#"{"sorts":{"S":["a","a'"]},"metrics":{"d":[["a","a'","0"]]},
                     "relations":{"R":[["a","1/3"],["a'","1/3"]]}}"#;
        let m = FiniteStructure::from_json(sig.clone(), ok).unwrap();
        let s = parse_formula(&sig, "sup x:S. R(x)").unwrap();
        let q = quotient_completion(&m, &[s]).unwrap();
        assert_eq!(q.carrier("S").unwrap(), ["a"]);

        let bad = r#"{"sorts":{"S":["a","a'"]},"metrics":{"d":[["a","a'","0"]]},
                      "relations":{"R":[["a","1/3"],["a'","1/2"]]}}"#;
        let m = FiniteStructure::from_json(sig, bad).unwrap();
        assert!(matches!(quotient_completion(&m, &[]), Err(Error::Structure(_))));

        let m = m0();
        assert_eq!(quotient_completion(&m, &[]).unwrap(), m);
    }
}
