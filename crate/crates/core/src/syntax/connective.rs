//! Connectives as expression trees over the exact basis, with formal
//! argument slots.

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::syntax::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connective {
    Slot(usize),
    Const(Rational),
    Neg(Box<Connective>),
    Half(Box<Connective>),
    Monus(Box<Connective>, Box<Connective>),
    Add(Box<Connective>, Box<Connective>),
    Min(Box<Connective>, Box<Connective>),
    Max(Box<Connective>, Box<Connective>),
}

impl Connective {
    /// Number of argument slots (one more than the largest slot index).
    pub fn arity(&self) -> usize {
        match self {
            Connective::Slot(i) => i + 1,
            Connective::Const(_) => 0,
            Connective::Neg(a) | Connective::Half(a) => a.arity(),
            Connective::Monus(a, b)
            | Connective::Add(a, b)
            | Connective::Min(a, b)
            | Connective::Max(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn eval(&self, args: &[Rational]) -> Result<Rational> {
        Ok(match self {
            Connective::Slot(i) => args
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::Check(format!("connective slot {i} has no argument")))?,
            Connective::Const(c) => c.clone(),
            Connective::Neg(a) => rational::negate(&a.eval(args)?),
            Connective::Half(a) => rational::halve(&a.eval(args)?),
            Connective::Monus(a, b) => rational::monus(&a.eval(args)?, &b.eval(args)?),
            Connective::Add(a, b) => rational::trunc_add(&a.eval(args)?, &b.eval(args)?),
            Connective::Min(a, b) => a.eval(args)?.min(b.eval(args)?),
            Connective::Max(a, b) => a.eval(args)?.max(b.eval(args)?),
        })
    }

    /// Lipschitz constant with respect to the max-norm on the arguments,
    /// computed from the tree: every basis node is 1-Lipschitz in each input,
    /// halving scales by 1/2, and the two-argument sums add.
    pub fn lipschitz(&self) -> Rational {
        match self {
            Connective::Slot(_) => rational::one(),
            Connective::Const(_) => rational::zero(),
            Connective::Neg(a) => a.lipschitz(),
            Connective::Half(a) => rational::halve(&a.lipschitz()),
            Connective::Monus(a, b) | Connective::Add(a, b) => a.lipschitz() + b.lipschitz(),
            Connective::Min(a, b) | Connective::Max(a, b) => a.lipschitz().max(b.lipschitz()),
        }
    }

    /// Instantiates the slots with formulas.
    pub fn apply(&self, args: &[Formula]) -> Result<Formula> {
        Ok(match self {
            Connective::Slot(i) => args
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::Check(format!("connective slot {i} has no argument")))?,
            Connective::Const(c) => Formula::Const(c.clone()),
            Connective::Neg(a) => Formula::neg(a.apply(args)?),
            Connective::Half(a) => Formula::half(a.apply(args)?),
            Connective::Monus(a, b) => Formula::monus(a.apply(args)?, b.apply(args)?),
            Connective::Add(a, b) => Formula::add(a.apply(args)?, b.apply(args)?),
            Connective::Min(a, b) => Formula::min(a.apply(args)?, b.apply(args)?),
            Connective::Max(a, b) => Formula::max(a.apply(args)?, b.apply(args)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn slot(i: usize) -> Box<Connective> {
        Box::new(Connective::Slot(i))
    }

    #[test]
    fn abs_difference_has_constant_two() {
        // max(a ∸ b, b ∸ a)
        let c = Connective::Max(
            Box::new(Connective::Monus(slot(0), slot(1))),
            Box::new(Connective::Monus(slot(1), slot(0))),
        );
        assert_eq!(c.arity(), 2);
        assert_eq!(c.lipschitz(), rational::int(2));
        assert_eq!(c.eval(&[ratio(1, 4), ratio(1, 2)]).unwrap(), ratio(1, 4));
    }

    fn arb_connective() -> impl Strategy<Value = Connective> {
        let leaf = prop_oneof![
            (0usize..3).prop_map(Connective::Slot),
            (0i64..=8).prop_map(|n| Connective::Const(ratio(n, 8))),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Connective::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Connective::Half(Box::new(a))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Connective::Monus(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Connective::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Connective::Min(Box::new(a), Box::new(b))),
                (inner.clone(), inner)
                    .prop_map(|(a, b)| Connective::Max(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn lipschitz_constant_bounds_probes(
            c in arb_connective(),
            p in proptest::collection::vec(0i64..=16, 3),
            q in proptest::collection::vec(0i64..=16, 3),
        ) {
            let p: Vec<Rational> = p.into_iter().map(|n| ratio(n, 16)).collect();
            let q: Vec<Rational> = q.into_iter().map(|n| ratio(n, 16)).collect();
            let up = c.eval(&p).unwrap();
            let uq = c.eval(&q).unwrap();
            prop_assert!(rational::in_unit_interval(&up));
            let dist = p.iter().zip(&q).map(|(a, b)| rational::abs_diff(a, b)).max().unwrap();
            prop_assert!(rational::abs_diff(&up, &uq) <= c.lipschitz() * dist);
        }
    }
}
