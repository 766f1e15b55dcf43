//! Printers. Printing then parsing yields a structurally equal AST.

use std::fmt::Write;

use num_traits::Signed;

use super::ast::{Formula, ODESystem, Sequent, Term, Var};
use crate::Q;

fn rat_str(q: &Q) -> String {
    if q.is_integer() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

// Term precedence levels: 0 additive, 1 multiplicative, 2 unary, 3 atom.
fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add(..) => 0,
        Term::Mul(a, b) => {
            if matches!(&**a, Term::Const(q) if *q == -Q::from_integer(1.into()))
                && !matches!(&**b, Term::Const(_))
            {
                2 // printed as unary minus
            } else {
                1
            }
        }
        Term::Const(q) => {
            if q.is_negative() {
                2
            } else {
                3
            }
        }
        Term::Var(_) => 3,
    }
}

fn write_term(out: &mut String, t: &Term, min_prec: u8) {
    let prec = term_prec(t);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match t {
        Term::Var(v) => {
            let _ = write!(out, "{}", v);
        }
        Term::Const(q) => {
            if q.is_negative() {
                out.push('-');
                let _ = write!(out, "{}", rat_str(&-q.clone()));
            } else {
                let _ = write!(out, "{}", rat_str(q));
            }
        }
        Term::Add(a, b) => {
            write_term(out, a, 0);
            // Render `+ (-1)*x` and `+ (-c)` as subtraction-free additions of
            // negatives so reparsing reproduces the same core AST.
            out.push_str(" + ");
            write_term(out, b, 1);
        }
        Term::Mul(a, b) => {
            if matches!(&**a, Term::Const(q) if *q == -Q::from_integer(1.into()))
                && !matches!(&**b, Term::Const(_))
            {
                out.push('-');
                write_term(out, b, 2);
            } else {
                write_term(out, a, 1);
                out.push('*');
                write_term(out, b, 2);
            }
        }
    }
    if parens {
        out.push(')');
    }
}

/// Prints a term; `parse_term(print_term(t)) == t`.
pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, 0);
    s
}

fn write_ode(out: &mut String, ode: &ODESystem) {
    out.push('{');
    let mut first = true;
    for (v, rhs) in ode.equations() {
        if !first {
            out.push_str(", ");
        }
        first = false;
        let _ = write!(out, "{}' = ", v);
        write_term(out, rhs, 0);
    }
    if *ode.domain() != Formula::True {
        out.push_str(" & ");
        write_formula(out, ode.domain(), 0);
    }
    out.push('}');
}

// Formula precedence: 0 imply/equiv, 1 or, 2 and, 3 not/modal prefix, 4 atom.
fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Imply(..) | Formula::Equiv(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(..) | Formula::Box(..) | Formula::Diamond(..) => 3,
        Formula::True | Formula::False | Formula::Cmp(..) => 4,
        // quantifiers print with a parenthesized body, so they act atomic
        Formula::Forall(..) | Formula::Exists(..) => 4,
    }
}

fn write_formula(out: &mut String, f: &Formula, min_prec: u8) {
    let prec = formula_prec(f);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Cmp(a, op, b) => {
            write_term(out, a, 0);
            let _ = write!(out, " {} ", op.symbol());
            write_term(out, b, 0);
        }
        Formula::And(a, b) => {
            write_formula(out, a, 2);
            out.push_str(" & ");
            write_formula(out, b, 3);
        }
        Formula::Or(a, b) => {
            write_formula(out, a, 1);
            out.push_str(" | ");
            write_formula(out, b, 2);
        }
        Formula::Not(a) => {
            out.push('!');
            write_formula(out, a, 4);
        }
        Formula::Imply(a, b) => {
            write_formula(out, a, 1);
            out.push_str(" -> ");
            write_formula(out, b, 0);
        }
        Formula::Equiv(a, b) => {
            write_formula(out, a, 1);
            out.push_str(" <-> ");
            write_formula(out, b, 0);
        }
        Formula::Forall(v, a) => {
            let _ = write!(out, "forall {} (", v);
            write_formula(out, a, 0);
            out.push(')');
        }
        Formula::Exists(v, a) => {
            let _ = write!(out, "exists {} (", v);
            write_formula(out, a, 0);
            out.push(')');
        }
        Formula::Box(ode, a) => {
            out.push('[');
            write_ode(out, ode);
            out.push_str("] ");
            write_formula(out, a, 3);
        }
        Formula::Diamond(ode, a) => {
            out.push('<');
            write_ode(out, ode);
            out.push_str("> ");
            write_formula(out, a, 3);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Prints a formula; `parse_formula(print_formula(f)) == f`.
pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f, 0);
    s
}

/// Prints `Gamma entails phi`.
pub fn print_sequent(s: &Sequent) -> String {
    let mut out = String::new();
    for (i, a) in s.antecedents.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_formula(&mut out, a, 1);
    }
    if !s.antecedents.is_empty() {
        out.push(' ');
    }
    out.push_str("entails ");
    write_formula(&mut out, &s.succedent, 0);
    out
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_term(self))
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_formula(self))
    }
}

impl std::fmt::Display for Sequent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_sequent(self))
    }
}

impl std::fmt::Display for ODESystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        write_ode(&mut s, self);
        write!(f, "{}", s)
    }
}

#[allow(dead_code)]
pub(crate) fn display_var(v: &Var) -> String {
    v.to_string()
}
