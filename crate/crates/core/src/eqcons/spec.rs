//! The eq-sort request language:
//!
//! ```text
//! pred A(x : S) = d(x, e);
//! eqsort P = product(S, S) depth 2;
//! eqsort D = defset(A);
//! eqsort E = defset(min(d(x,e), d(x,f(e))); x : S);
//! eqsort C = canparam(d(x,y); x : S; y : S);
//! eqsort U = union(C, C2);
//! ```
//!
//! Formulas are kept as text and parsed when their statement is built, so
//! later statements may mention sorts made by earlier ones.

use std::collections::BTreeMap;

use super::{build_canparam, build_defset_sort, build_product, build_union, CanParamSpec, EqExpansion};
use crate::error::{Error, Result};
use crate::semantics::FiniteStructure;
use crate::syntax::{parse_binders, parse_formula, parse_formula_in, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawSort {
    Product { sorts: Vec<String>, depth: Option<usize> },
    DefSet { formula: String, context: Option<String> },
    CanParam { formula: String, x: String, y: String },
    Union(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqStatement {
    pub name: String,
    pub sort: RawSort,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EqProgram {
    /// `pred` declarations: name ↦ (binders, body).
    pub preds: BTreeMap<String, (String, String)>,
    pub sorts: Vec<EqStatement>,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn strip_comments(src: &str) -> String {
    src.lines()
        .map(|l| {
            let cut = [l.find("//"), l.find('#')].into_iter().flatten().min();
            match cut {
                Some(i) => &l[..i],
                None => l,
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Splits at `sep` outside parentheses, keeping byte offsets.
fn split_top(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// `kind(args) rest` → (kind, args, rest).
fn call(text: &str) -> Option<(&str, &str, &str)> {
    let open = text.find('(')?;
    let mut depth = 0;
    for (i, c) in text.char_indices().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((text[..open].trim(), &text[open + 1..i], text[i + 1..].trim()));
                }
            }
            _ => {}
        }
    }
    None
}

pub fn parse_eq_spec(src: &str) -> Result<EqProgram> {
    let clean = strip_comments(src);
    let mut prog = EqProgram::default();
    let parts = split_top(&clean, ';');
    let last = parts.len() - 1;
    for (k, (offset, stmt)) in parts.into_iter().enumerate() {
        let lead = stmt.len() - stmt.trim_start().len();
        let (line, col) = position(&clean, offset + lead);
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        if k == last {
            return Err(syntax(line, col, "missing `;` after statement"));
        }
        if let Some(rest) = stmt.strip_prefix("pred ") {
            let Some((head, body)) = rest.split_once('=') else {
                return Err(syntax(line, col, "expected `pred NAME(binders) = formula`"));
            };
            let Some((name, binders, tail)) = call(head) else {
                return Err(syntax(line, col, "expected `pred NAME(binders)`"));
            };
            if !is_ident(name) || !tail.is_empty() {
                return Err(syntax(line, col, format!("bad predicate head `{}`", head.trim())));
            }
            if prog
                .preds
                .insert(name.to_string(), (binders.trim().to_string(), body.trim().to_string()))
                .is_some()
            {
                return Err(syntax(line, col, format!("predicate `{name}` declared twice")));
            }
        } else if let Some(rest) = stmt.strip_prefix("eqsort ") {
            let Some((name, rhs)) = rest.split_once('=') else {
                return Err(syntax(line, col, "expected `eqsort NAME = ...`"));
            };
            let name = name.trim();
            if !is_ident(name) {
                return Err(syntax(line, col, format!("bad sort name `{name}`")));
            }
            if prog.sorts.iter().any(|s| s.name == name) {
                return Err(syntax(line, col, format!("eq sort `{name}` declared twice")));
            }
            let Some((kind, args, tail)) = call(rhs) else {
                return Err(syntax(line, col, "expected a construction `kind(...)`"));
            };
            let args: Vec<&str> = split_top(args, ';').into_iter().map(|(_, a)| a.trim()).collect();
            let sort = match (kind, args.as_slice()) {
                ("product", [list]) => {
                    let sorts: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
                    if sorts.iter().any(|s| !is_ident(s)) {
                        return Err(syntax(line, col, "product takes a list of sort names"));
                    }
                    let depth = if tail.is_empty() {
                        None
                    } else {
                        let d = tail
                            .strip_prefix("depth")
                            .map(str::trim)
                            .and_then(|d| d.parse::<usize>().ok())
                            .filter(|&d| d >= 1);
                        match d {
                            Some(d) => Some(d),
                            None => return Err(syntax(line, col, format!("bad depth clause `{tail}`"))),
                        }
                    };
                    RawSort::Product { sorts, depth }
                }
                ("defset", [f]) => RawSort::DefSet {
                    formula: f.to_string(),
                    context: None,
                },
                ("defset", [f, ctx]) => RawSort::DefSet {
                    formula: f.to_string(),
                    context: Some(ctx.to_string()),
                },
                ("canparam", [f, x, y]) => RawSort::CanParam {
                    formula: f.to_string(),
                    x: x.to_string(),
                    y: y.to_string(),
                },
                ("union", [list]) => {
                    let parts: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
                    if parts.iter().any(|s| !is_ident(s)) {
                        return Err(syntax(line, col, "union takes a list of canparam sort names"));
                    }
                    RawSort::Union(parts)
                }
                _ => {
                    return Err(syntax(
                        line,
                        col,
                        format!("unknown construction `{kind}` with {} argument(s)", args.len()),
                    ))
                }
            };
            if !tail.is_empty() && !matches!(sort, RawSort::Product { .. }) {
                return Err(syntax(line, col, format!("unexpected `{tail}`")));
            }
            prog.sorts.push(EqStatement {
                name: name.to_string(),
                sort,
                line,
            });
        } else {
            return Err(syntax(line, col, "expected `pred` or `eqsort`"));
        }
    }
    Ok(prog)
}

fn with_line(line: usize, e: Error) -> Error {
    match e {
        Error::Syntax { message, .. } => Error::Syntax {
            line,
            col: 1,
            message,
        },
        other => other,
    }
}

/// Builds every requested sort in order; each expansion's base is the
/// previous one's result.
pub fn run_eq_spec(m: &FiniteStructure, prog: &EqProgram) -> Result<Vec<EqExpansion>> {
    let mut cur = m.clone();
    let mut out: Vec<EqExpansion> = Vec::new();
    let mut canparams: BTreeMap<String, CanParamSpec> = BTreeMap::new();
    for st in &prog.sorts {
        let sig = cur.signature().clone();
        let line = st.line;
        let exp = match &st.sort {
            RawSort::Product { sorts, depth } => {
                build_product(&cur, &st.name, sorts, depth.unwrap_or(sorts.len()))?
            }
            RawSort::DefSet { formula, context } => {
                let (f, ctx) = match (prog.preds.get(formula.as_str()), context) {
                    (Some((binders, body)), None) => {
                        let ctx = parse_binders(&sig, binders).map_err(|e| with_line(line, e))?;
                        (parse_formula_in(&sig, &ctx, body).map_err(|e| with_line(line, e))?, ctx)
                    }
                    (_, Some(c)) => {
                        let ctx = parse_binders(&sig, c).map_err(|e| with_line(line, e))?;
                        let text = prog.preds.get(formula.as_str()).map_or(formula.as_str(), |p| p.1.as_str());
                        (parse_formula_in(&sig, &ctx, text).map_err(|e| with_line(line, e))?, ctx)
                    }
                    (None, None) => {
                        let f = parse_formula(&sig, formula).map_err(|e| with_line(line, e))?;
                        let ctx = f.free_variables();
                        (f, ctx)
                    }
                };
                build_defset_sort(&cur, &st.name, &f, &ctx)?
            }
            RawSort::CanParam { formula, x, y } => {
                let xs = parse_binders(&sig, x).map_err(|e| with_line(line, e))?;
                let ys = parse_binders(&sig, y).map_err(|e| with_line(line, e))?;
                let mut ctx: Vec<Variable> = xs.clone();
                ctx.extend(ys.iter().cloned());
                let text = prog.preds.get(formula.as_str()).map_or(formula.as_str(), |p| p.1.as_str());
                let f = parse_formula_in(&sig, &ctx, text).map_err(|e| with_line(line, e))?;
                let spec = CanParamSpec::new(&st.name, f, xs, ys)?;
                canparams.insert(st.name.clone(), spec.clone());
                build_canparam(&cur, &spec)?
            }
            RawSort::Union(parts) => {
                let specs = parts
                    .iter()
                    .map(|p| {
                        canparams.get(p).cloned().ok_or_else(|| {
                            Error::Check(format!(
                                "line {line}: `{p}` is not an earlier canparam sort"
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                build_union(&cur, &st.name, &specs)?
            }
        };
        cur = exp.structure.clone();
        out.push(exp);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::m0;

    #[test]
    fn parses_all_forms() {
        let p = parse_eq_spec(
            "pred A(x : S) = d(x, e); // comment\n\
             eqsort P = product(S, S) depth 2;\n\
             eqsort D = defset(A);\n\
             eqsort E = defset(min(d(x,e), d(x,f(e))); x : S);\n\
             eqsort C = canparam(d(x,y); x : S; y : S);\n\
             eqsort K = canparam(1/2; x : S; y : S);\n\
             eqsort U = union(C, K);\n",
        )
        .unwrap();
        assert_eq!(p.sorts.len(), 6);
        assert_eq!(
            p.sorts[0].sort,
            RawSort::Product {
                sorts: vec!["S".into(), "S".into()],
                depth: Some(2)
            }
        );
        assert_eq!(p.sorts[3].line, 5);
        let built = run_eq_spec(&m0(), &p).unwrap();
        assert!(built.iter().all(EqExpansion::verified));
        assert_eq!(built[0].structure.size("P").unwrap(), 9);
        assert_eq!(built[1].structure.size("D").unwrap(), 1);
        assert_eq!(built[2].structure.size("E").unwrap(), 2);
        assert_eq!(built[4].structure.size("K").unwrap(), 1);
        assert_eq!(built[5].structure.size("U").unwrap(), 4);
    }

    #[test]
    fn errors() {
        let e = parse_eq_spec("eqsort P = product(S) depth 0;").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, .. }));
        assert!(parse_eq_spec("eqsort P = product(S)").is_err());
        assert!(parse_eq_spec("\n\nfoo;").unwrap_err().to_string().contains("3"));
        let p = parse_eq_spec("eqsort D = defset(R(x));").unwrap();
        let err = run_eq_spec(&m0(), &p).unwrap_err();
        assert!(err.to_string().contains("condition (2)"));
        let p = parse_eq_spec("eqsort U = union(C);").unwrap();
        assert!(run_eq_spec(&m0(), &p).is_err());
    }
}
