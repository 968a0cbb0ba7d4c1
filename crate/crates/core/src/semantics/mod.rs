//! Finite structures, exact evaluation, and the structure-level checks.

mod checks;
mod eval;
mod structure;

pub use checks::{
    best_modulus, check_all_metrics, check_declared_moduli, check_modulus, check_pseudo_metric,
    quotient_completion, sentence_values, table_modulus, Staircase,
};
pub use eval::{
    eval_exact, eval_formula, eval_term, formula_table, satisfies, Assignment, Compiled,
    Satisfaction, Value,
};
pub use structure::{decode, encode, tuples, FiniteStructure, Table};
