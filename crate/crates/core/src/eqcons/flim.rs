//! The forced-limit operator and the canonical-parameter tower built from
//! per-level approximant families.

use std::sync::Arc;

use super::{
    build_product, build_union, classes, extend, slices, sup_distance, tuple_name, CanParamSpec,
    EqExpansion,
};
use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::{encode, tuples, FiniteStructure};
use crate::syntax::{Formula, Variable};

/// `b_N` of the clamped recursion and the bound `2^{-N}` it satisfies for
/// rate-compliant input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flim {
    pub value: Rational,
    pub bound: Rational,
}

/// `b_0 = a_0`, `b_{k+1} = clamp(a_{k+1}, [b_k − 2^{-k}, b_k + 2^{-k}])`.
pub fn flim(prefix: &[Rational]) -> Result<Flim> {
    let Some(first) = prefix.first() else {
        return Err(Error::Check("Flim needs a nonempty prefix".into()));
    };
    if let Some(v) = prefix.iter().find(|v| !rational::in_unit_interval(v)) {
        return Err(Error::Check(format!("Flim input {} is outside [0,1]", format_ratio(v))));
    }
    let mut b = first.clone();
    for (k, a) in prefix.iter().enumerate().skip(1) {
        let w = rational::pow2_inv((k - 1) as u32);
        b = rational::clamp(a, &(&b - &w), &(&b + &w));
    }
    Ok(Flim {
        value: b,
        bound: rational::pow2_inv((prefix.len() - 1) as u32),
    })
}

/// The family `Ψ_n` for one level: formulas `ψ_i(x̄, ȳ_i)` with their
/// parameter contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerLevel {
    pub approximants: Vec<(Formula, Vec<Variable>)>,
}

#[derive(Debug, Clone)]
pub struct TowerResult {
    /// Unions `U_n`, their product and the quotient sort (the requested one).
    pub expansion: EqExpansion,
    /// For each `c`, the chosen element of each `U_n`, by name.
    pub choices: Vec<(String, Vec<String>)>,
    /// `c ↦ f_φ(c)` by element name.
    pub map: Vec<(String, String)>,
    /// Pairs where `f_φ` and slice equality disagree.
    pub separation: Vec<Witness>,
}

const PRODUCT_CAP: usize = 4096;

/// Builds `U_1 × … × U_N / ρ` and the induced `f_φ` on the sort of `y`.
pub fn build_canparam_tower(
    m: &FiniteStructure,
    name: &str,
    phi: &Formula,
    x: &[Variable],
    y: &Variable,
    levels: &[TowerLevel],
) -> Result<TowerResult> {
    if levels.is_empty() {
        return Err(Error::Check("a tower needs at least one level".into()));
    }
    let target = CanParamSpec::new("_", phi.clone(), x.to_vec(), vec![y.clone()])?;
    let (_, phi_slices) = slices(m, &target)?;

    let mut cur = m.clone();
    let mut axioms = Vec::new();
    let mut new_sorts = Vec::new();
    let mut unions = Vec::new();
    let mut level_slices = Vec::new();
    for (n, level) in levels.iter().enumerate() {
        let specs = level
            .approximants
            .iter()
            .enumerate()
            .map(|(i, (f, ys))| {
                CanParamSpec::new(&format!("{name}_C{}_{}", n + 1, i + 1), f.clone(), x.to_vec(), ys.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let u_name = format!("{name}_U{}", n + 1);
        let e = build_union(&cur, &u_name, &specs)?;
        axioms.extend(e.axioms);
        new_sorts.extend(e.new_sorts);
        level_slices.push(e.slices);
        unions.push(u_name);
        cur = e.structure;
    }
    let sizes: Vec<usize> = level_slices.iter().map(Vec::len).collect();
    if sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&p| p <= PRODUCT_CAP)).is_none() {
        return Err(Error::Check(format!(
            "tower product of sizes {sizes:?} exceeds {PRODUCT_CAP} elements"
        )));
    }
    let p_name = format!("{name}_P");
    let prod = build_product(&cur, &p_name, &unions, unions.len())?;
    axioms.extend(prod.axioms);
    new_sorts.push(p_name.clone());
    let cur = prod.structure;

    // Flim of each product element, pointwise on x̄; a_0 is taken to be a_1
    let elems: Vec<Vec<usize>> = tuples(&sizes).collect();
    let width = phi_slices.first().map_or(0, Vec::len);
    let limits = elems
        .iter()
        .map(|t| {
            (0..width)
                .map(|xi| {
                    let mut prefix = vec![level_slices[0][t[0]][xi].clone()];
                    prefix.extend(t.iter().enumerate().map(|(n, &a)| level_slices[n][a][xi].clone()));
                    Ok(flim(&prefix)?.value)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let (class_of, reps) = classes(&limits);

    let ysort = y.sort.clone();
    let ycarrier = m.carrier(&ysort)?.to_vec();
    let mut choices = Vec::new();
    let mut chosen_class = Vec::new();
    for (c, slice) in phi_slices.iter().enumerate() {
        let mut pick = Vec::new();
        for (n, ls) in level_slices.iter().enumerate() {
            let bound = rational::pow2_inv((n + 1) as u32);
            // nearest approximant, first on ties
            let (i, best) = ls
                .iter()
                .map(|s| sup_distance(s, slice))
                .enumerate()
                .min_by(|p, q| p.1.cmp(&q.1))
                .expect("nonempty");
            if best > bound {
                return Err(Error::Check(format!(
                    "approximation rate violated at level {} for parameter `{}`: closest approximant is at {} > {}",
                    n + 1,
                    ycarrier[c],
                    format_ratio(&best),
                    format_ratio(&bound)
                )));
            }
            pick.push(i);
        }
        chosen_class.push(class_of[encode(&sizes, &pick)]);
        choices.push((
            ycarrier[c].clone(),
            pick.iter()
                .zip(&unions)
                .map(|(&i, u)| cur.element_name(u, i).to_string())
                .collect(),
        ));
    }

    let q = format!("{name}_q");
    let f = format!("{name}_f");
    let sig = extend(
        cur.signature(),
        name,
        &[
            (q.clone(), vec![p_name.clone()], name.to_string()),
            (f.clone(), vec![ysort.clone()], name.to_string()),
        ],
    )?;
    let mut out = cur.with_signature(Arc::new(sig))?;
    out.add_carrier(
        name,
        reps.iter()
            .map(|&r| tuple_name(cur.names(&unions, &elems[r])))
            .collect(),
    )?;
    out.set_function(&q, |t| class_of[t[0]])?;
    out.set_function(&f, |t| chosen_class[t[0]])?;
    out.set_relation(&super::metric_name_for(name), |t| {
        sup_distance(&limits[reps[t[0]]], &limits[reps[t[1]]])
    })?;
    new_sorts.push(name.to_string());

    let mut separation = Vec::new();
    for a in 0..phi_slices.len() {
        for b in a + 1..phi_slices.len() {
            let same_slice = phi_slices[a] == phi_slices[b];
            let same_image = chosen_class[a] == chosen_class[b];
            if same_slice != same_image {
                separation.push(Witness::new(
                    "tower-separation",
                    vec![ycarrier[a].clone(), ycarrier[b].clone()],
                    if same_slice {
                        "equal slices, different images".to_string()
                    } else {
                        format!(
                            "slices differ by {} but images agree",
                            format_ratio(&sup_distance(&phi_slices[a], &phi_slices[b]))
                        )
                    },
                ));
            }
        }
    }
    let map = chosen_class
        .iter()
        .enumerate()
        .map(|(c, &k)| (ycarrier[c].clone(), out.element_name(name, k).to_string()))
        .collect();
    Ok(TowerResult {
        expansion: EqExpansion {
            base: m.clone(),
            structure: out,
            sort: name.to_string(),
            new_sorts,
            axioms,
            truncation: Some(rational::pow2_inv(levels.len() as u32)),
            slices: reps.iter().map(|&r| limits[r].clone()).collect(),
        },
        choices,
        map,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqcons::build_canparam;
    use crate::fixtures::{m0, m0_signature};
    use crate::rational::{int, ratio};
    use crate::syntax::parse_formula;
    use proptest::prelude::*;

    fn v(xs: &[(i64, i64)]) -> Vec<Rational> {
        xs.iter().map(|&(p, q)| ratio(p, q)).collect()
    }

    #[test]
    fn flim_examples() {
        assert_eq!(flim(&v(&[(1, 3); 5])).unwrap().value, ratio(1, 3));
        assert_eq!(flim(&v(&[(1, 1), (0, 1), (0, 1), (0, 1)])).unwrap().value, int(0));
        let n = 6;
        let a: Vec<Rational> = (0..=n).map(|k| rational::pow2_inv(k + 1)).collect();
        let r = flim(&a).unwrap();
        assert!(r.value <= rational::pow2_inv(n));
        assert_eq!(r.bound, rational::pow2_inv(n));
        assert!(flim(&[]).is_err());
        assert!(flim(&[int(2)]).is_err());
    }

    fn unit() -> impl Strategy<Value = Rational> {
        (0i64..=64).prop_map(|k| ratio(k, 64))
    }

    proptest! {
        #[test]
        fn flim_is_lipschitz(a in proptest::collection::vec(unit(), 1..8), b in proptest::collection::vec(unit(), 1..8)) {
            let n = a.len().min(b.len());
            let (a, b) = (&a[..n], &b[..n]);
            let gap: Rational = a.iter().zip(b).map(|(p, q)| rational::abs_diff(p, q)).sum();
            let d = rational::abs_diff(&flim(a).unwrap().value, &flim(b).unwrap().value);
            prop_assert!(d <= gap);
        }

        #[test]
        fn property_two_bound(b in unit(), offs in proptest::collection::vec(-1000i64..=1000, 1..10)) {
            let prefix: Vec<Rational> = offs.iter().enumerate().map(|(n, &o)| {
                let w = rational::pow2_inv(n as u32) * ratio(o, 1000);
                rational::clamp(&(&b + &w), &rational::zero(), &rational::one())
            }).collect();
            let r = flim(&prefix).unwrap();
            prop_assert!(rational::abs_diff(&r.value, &b) <= r.bound);
        }

        #[test]
        fn property_one_bound(start in unit(), steps in proptest::collection::vec(-1000i64..=1000, 1..10)) {
            let mut a = vec![start];
            for (n, &s) in steps.iter().enumerate() {
                let next = rational::clamp(&(a[n].clone() + rational::pow2_inv(n as u32) * ratio(s, 1000)), &rational::zero(), &rational::one());
                a.push(next);
            }
            // the prefix itself is returned unchanged
            prop_assert_eq!(flim(&a).unwrap().value, a.last().unwrap().clone());
        }
    }

    fn s(n: &str) -> Variable {
        Variable::new(n, "S")
    }

    #[test]
    fn tower_examples() {
        let m = m0();
        let sig = m0_signature();
        let phi = parse_formula(&sig, "d(x,y)").unwrap();
        let lvl = TowerLevel {
            approximants: vec![(phi.clone(), vec![s("y")])],
        };
        let t = build_canparam_tower(&m, "T", &phi, &[s("x")], &s("y"), &[lvl.clone()]).unwrap();
        assert!(t.expansion.verified());
        assert!(t.separation.is_empty());
        let cp = build_canparam(&m, &CanParamSpec::new("C", phi.clone(), vec![s("x")], vec![s("y")]).unwrap())
            .unwrap();
        assert_eq!(t.expansion.structure.size("T").unwrap(), cp.structure.size("C").unwrap());

        let konst = Formula::constant(ratio(1, 2));
        let kl = TowerLevel { approximants: vec![(konst.clone(), vec![s("y")])] };
        let t = build_canparam_tower(&m, "T", &konst, &[s("x")], &s("y"), &[kl]).unwrap();
        assert_eq!(t.expansion.structure.size("T").unwrap(), 1);

        // depth 2: level 1 only knows halves, level 2 is exact
        let half = parse_formula(&sig, "d(x,y)/2 + 1/4").unwrap();
        let l1 = TowerLevel { approximants: vec![(half, vec![s("y")]), (Formula::constant(ratio(1, 2)), vec![s("y")])] };
        let t = build_canparam_tower(&m, "T", &phi, &[s("x")], &s("y"), &[l1, lvl]).unwrap();
        assert!(t.expansion.verified(), "{}", t.expansion.axiom_listing());
        assert!(t.separation.is_empty());
        let images: std::collections::BTreeSet<_> = t.map.iter().map(|p| p.1.clone()).collect();
        assert_eq!(images.len(), 3);

        let bad = TowerLevel { approximants: vec![(Formula::one(), vec![s("y")])] };
        let err = build_canparam_tower(&m, "T", &phi, &[s("x")], &s("y"), &[bad]).unwrap_err();
        assert!(err.to_string().contains("level 1"));
    }
}
