//! The small running structure used throughout the docs and tests.
//!
//! `M0`: one sort `S = {a, b, c}` with `d(a,b) = 1/2`, `d(a,c) = 1`,
//! `d(b,c) = 1/2`; `R(a) = 0`, `R(b) = 1/4`, `R(c) = 1`; `f` sends
//! `a -> b -> c -> c`; the constant `e` is `a`.

use std::sync::Arc;

use crate::semantics::FiniteStructure;
use crate::syntax::{parse_signature, Signature};

pub const M0_SIGNATURE: &str = "\
sort S;
metric d : S;
rel R : S;
fn f : S -> S;
fn e : -> S;
";

pub const M0_JSON: &str = r#"{
  "sorts": {"S": ["a", "b", "c"]},
  "metrics": {"d": [["a", "b", "1/2"], ["a", "c", "1"], ["b", "c", "1/2"]]},
  "relations": {"R": [["a", "0"], ["b", "1/4"], ["c", "1"]]},
  "functions": {"f": {"a": "b", "b": "c", "c": "c"}, "e": "a"}
}"#;

pub fn m0_signature() -> Arc<Signature> {
    Arc::new(parse_signature(M0_SIGNATURE).expect("fixture signature parses"))
}

pub fn m0() -> FiniteStructure {
    FiniteStructure::from_json(m0_signature(), M0_JSON).expect("fixture structure loads")
}
