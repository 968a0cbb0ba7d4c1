//! Signatures, theories, formulas and the text format.

mod connective;
mod formula;
pub mod parse;
pub mod print;
mod signature;

pub use connective::Connective;
pub use formula::{fresh_copies, fresh_name, Formula, Term, Variable};
pub(crate) use signature::check_distinct;
pub use signature::{
    pseudo_metric_sentences, FunctionSymbol, Modulus, NativeConnective, NativeFn, RelationSymbol,
    Signature, Theory,
};
pub use parse::{parse_binders, parse_formula, parse_formula_in, parse_signature, parse_theory};
pub use print::{formula_to_string, signature_to_string, term_to_string, theory_to_string};
