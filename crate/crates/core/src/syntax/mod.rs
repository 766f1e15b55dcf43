//! ASTs, parser, printers, variable analyses and normal forms.

mod ast;
mod normal;
mod parser;
mod printer;
mod problem;
mod subst;

pub use ast::{CmpOp, Formula, ODESystem, Sequent, Term, Var};
pub use normal::{negate_normal_form, to_normal_form, Disjunct, NormalForm};
pub use parser::{parse_formula, parse_ode, parse_sequent, parse_term, ParseError};
pub use printer::{print_formula, print_sequent, print_term};
pub use problem::{parse_problem, ClusterHint, Goal, Problem, SampleBox};
pub use subst::{
    formula_free_vars, fresh_var, is_constant_for, substitute_formula, substitute_term,
    term_free_vars,
};
