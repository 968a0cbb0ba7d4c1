//! Printers producing text the parser reads back to the same tree.

use std::fmt::Write;

use crate::rational::format_dsl;
use crate::syntax::{Formula, Signature, Term, Theory, Variable};

const QUANT: u8 = 0;
const LATTICE: u8 = 1;
const ADDITIVE: u8 = 2;
const PREFIX: u8 = 3;
const POSTFIX: u8 = 4;
const PRIMARY: u8 = 5;

pub fn term_to_string(t: &Term) -> String {
    match t {
        Term::Var(v) => v.name.clone(),
        Term::App { func, args } if args.is_empty() => func.clone(),
        Term::App { func, args } => format!(
            "{func}({})",
            args.iter().map(term_to_string).collect::<Vec<_>>().join(", ")
        ),
    }
}

pub fn binders_to_string(vars: &[Variable]) -> String {
    vars.iter()
        .map(|v| format!("{}:{}", v.name, v.sort))
        .collect::<Vec<_>>()
        .join(", ")
}

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Sup { .. } | Formula::Inf { .. } => QUANT,
        Formula::Min(..) | Formula::Max(..) => LATTICE,
        Formula::Add(..) | Formula::Monus(..) => ADDITIVE,
        Formula::Neg(_) => PREFIX,
        Formula::Half(_) => POSTFIX,
        _ => PRIMARY,
    }
}

fn write_at(out: &mut String, f: &Formula, min: u8) {
    if level(f) < min {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::Const(q) => out.push_str(&format_dsl(q)),
        Formula::Atom { rel, args } => {
            out.push_str(rel);
            if !args.is_empty() {
                out.push('(');
                out.push_str(
                    &args.iter().map(term_to_string).collect::<Vec<_>>().join(", "),
                );
                out.push(')');
            }
        }
        Formula::Native { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_formula(out, a);
            }
            out.push(')');
        }
        Formula::Neg(a) => {
            out.push('~');
            write_at(out, a, PREFIX);
        }
        Formula::Half(a) => {
            if matches!(**a, Formula::Const(_)) {
                let _ = write!(out, "({})", format_dsl(match &**a {
                    Formula::Const(q) => q,
                    _ => unreachable!(),
                }));
            } else {
                write_at(out, a, POSTFIX);
            }
            out.push_str("/2");
        }
        Formula::Monus(a, b) | Formula::Add(a, b) => {
            write_at(out, a, ADDITIVE);
            out.push_str(if matches!(f, Formula::Add(..)) { " + " } else { " -. " });
            write_at(out, b, PREFIX);
        }
        Formula::Min(a, b) | Formula::Max(a, b) => {
            write_at(out, a, LATTICE);
            out.push_str(if matches!(f, Formula::Max(..)) { " /\\ " } else { " \\/ " });
            write_at(out, b, ADDITIVE);
        }
        Formula::Sup { vars, body } | Formula::Inf { vars, body } => {
            out.push_str(if matches!(f, Formula::Sup { .. }) { "sup " } else { "inf " });
            out.push_str(&binders_to_string(vars));
            out.push_str(". ");
            write_formula(out, body);
        }
    }
}

pub fn formula_to_string(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&formula_to_string(self))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&term_to_string(self))
    }
}

pub fn signature_to_string(sig: &Signature) -> String {
    let mut out = String::new();
    for s in sig.sorts() {
        let _ = writeln!(out, "sort {s};");
    }
    for r in sig.relations() {
        match &r.metric_for {
            Some(sort) => {
                let _ = writeln!(out, "metric {} : {sort};", r.name);
            }
            None if r.domain.is_empty() => {
                let _ = writeln!(out, "rel {};", r.name);
            }
            None => {
                let _ = writeln!(out, "rel {} : {};", r.name, r.domain.join(", "));
            }
        }
    }
    for f in sig.functions() {
        let _ = writeln!(
            out,
            "fn {} : {} -> {};",
            f.name,
            f.domain.join(", "),
            f.codomain
        );
    }
    for n in sig.natives() {
        let _ = writeln!(
            out,
            "native {} : {} lipschitz {};",
            n.name,
            n.arity,
            format_dsl(&n.lipschitz)
        );
    }
    let moduli = sig
        .relations()
        .filter_map(|r| r.modulus.as_ref().map(|m| (&r.name, m)))
        .chain(
            sig.functions()
                .filter_map(|f| f.modulus.as_ref().map(|m| (&f.name, m))),
        );
    for (name, m) in moduli {
        let _ = write!(out, "modulus {name} {{");
        for (d, e) in m.pairs() {
            let _ = write!(out, " {} -> {};", format_dsl(d), format_dsl(e));
        }
        out.push_str(" }\n");
    }
    out
}

pub fn theory_to_string(t: &Theory) -> String {
    let mut out = signature_to_string(&t.signature);
    for a in &t.axioms {
        let _ = writeln!(out, "axiom {};", formula_to_string(a));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::syntax::parse::{parse_formula, parse_signature, parse_theory};
    use proptest::prelude::*;

    fn sig() -> Signature {
        parse_signature(
            "sort S; sort T; metric d : S; metric dt : T; rel R : S; rel P;\n\
             rel Q : S, T; fn f : S -> S; fn g : S, S -> T; fn e : -> S;\n\
             modulus R { 0.6 -> 0.6; 1/3 -> 0.25; }",
        )
        .unwrap()
    }

    #[test]
    fn prints_examples() {
        let s = sig();
        let f = parse_formula(&s, "sup x:S. |R(x) - 1/4|").unwrap();
        assert_eq!(
            formula_to_string(&f),
            "sup x:S. R(x) -. 0.25 /\\ 0.25 -. R(x)"
        );
        let h = Formula::half(Formula::Const(ratio(1, 3)));
        assert_eq!(formula_to_string(&h), "(1/3)/2");
        assert_eq!(parse_formula(&s, &formula_to_string(&h)).unwrap(), h);
    }

    #[test]
    fn signature_round_trip() {
        let s = sig();
        let text = signature_to_string(&s);
        let back = parse_signature(&text).unwrap();
        assert_eq!(signature_to_string(&back), text);
        assert_eq!(back.relation("R").unwrap().modulus, s.relation("R").unwrap().modulus);
    }

    #[test]
    fn theory_round_trip() {
        let t = parse_theory("sort S; metric d : S; rel R : S; axiom sup x:S. inf y:S. d(x,y) + R(y);")
            .unwrap();
        let back = parse_theory(&theory_to_string(&t)).unwrap();
        assert_eq!(back.axioms, t.axioms);
    }

    fn arb_term(depth: u32) -> BoxedStrategy<Term> {
        let leaf = prop_oneof![
            prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(|n| Term::var(n, "S")),
            Just(Term::constant("e")),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        prop_oneof![
            leaf,
            arb_term(depth - 1).prop_map(|t| Term::app("f", vec![t])),
        ]
        .boxed()
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            (0i64..=12, 1i64..=12)
                .prop_filter("in [0,1]", |(n, d)| n <= d)
                .prop_map(|(n, d)| Formula::Const(ratio(n, d))),
            arb_term(2).prop_map(|t| Formula::atom("R", vec![t])),
            (arb_term(1), arb_term(1)).prop_map(|(a, b)| Formula::atom("d", vec![a, b])),
            Just(Formula::atom("P", vec![])),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let var = prop_oneof![Just("x"), Just("y"), Just("z")];
            prop_oneof![
                inner.clone().prop_map(Formula::neg),
                inner.clone().prop_map(Formula::half),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::monus(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::min(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::max(a, b)),
                (var.clone(), inner.clone())
                    .prop_map(|(v, b)| Formula::sup(vec![Variable::new(v, "S")], b)),
                (var, inner).prop_map(|(v, b)| Formula::inf(vec![Variable::new(v, "S")], b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let s = sig();
            let text = formula_to_string(&f);
            let back = parse_formula(&s, &text).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
