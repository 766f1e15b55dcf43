//! Exact builtin validity backend.
//!
//! Validity of a sequent is decided by refuting its negation over the reals:
//! propositional closure first, then a quantifier-preprocessed DNF whose
//! disjuncts are refuted by (in order) constant checks, a full univariate
//! decision, and a Farkas certificate search over a monomial abstraction
//! extended with sound lemmas (even powers, constraint products, squares).
//! Failure to refute never claims satisfiability; the `Invalid` direction
//! only comes from exact evaluation of a concrete rational witness.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::linear::{eliminate_linear_var, farkas_refutes, occurs_linearly, Constraint, Rel};
use super::univariate::{decide_conjunction, Poly1, UniSat};
use crate::poly::{from_term, Monomial, Poly, VarOrder};
use crate::syntax::{
    formula_free_vars, fresh_var, CmpOp, Formula, Sequent, Term, Var,
};
use crate::{Q, QPoly};

/// Bounds on the certificate search, tuned for proof-sized goals.
const MAX_MONOMIALS: usize = 110;
const MAX_SQUARE_BASE: usize = 18;
const MAX_PRODUCT_PAIRS: usize = 160;
const MAX_FORALL_CANDIDATES: usize = 12;
const MAX_NE_SPLITS: usize = 10;

/// Outcome of the builtin backend.
pub enum BuiltinOutcome {
    Valid,
    Invalid(Vec<(Var, Q)>),
    Unknown,
}

// Negation normal form with quantifiers; binders are pre-renamed apart.
#[derive(Clone, Debug)]
enum NForm {
    True,
    False,
    Atom(QPoly, AtomRel),
    And(Vec<NForm>),
    Or(Vec<NForm>),
    Forall(Var, Box<NForm>),
    Exists(Var, Box<NForm>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AtomRel {
    Ge,
    Gt,
    Eq,
    Ne,
}

/// Renames quantifier binders so that all binders are distinct from each
/// other and from every other variable in sight.
pub(crate) fn rename_binders(f: &Formula, avoid: &mut BTreeSet<Var>) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Cmp(..) => f.clone(),
        Formula::And(a, b) => Formula::and(rename_binders(a, avoid), rename_binders(b, avoid)),
        Formula::Or(a, b) => Formula::or(rename_binders(a, avoid), rename_binders(b, avoid)),
        Formula::Imply(a, b) => Formula::imply(rename_binders(a, avoid), rename_binders(b, avoid)),
        Formula::Equiv(a, b) => Formula::Equiv(
            Box::new(rename_binders(a, avoid)),
            Box::new(rename_binders(b, avoid)),
        ),
        Formula::Not(a) => Formula::not(rename_binders(a, avoid)),
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            let forall = matches!(f, Formula::Forall(..));
            let (v2, body) = if avoid.contains(v) {
                let fresh = fresh_var(v.as_str(), avoid);
                let renamed =
                    crate::syntax::substitute_formula(a, v, &Term::Var(fresh.clone()))
                        .expect("binder rename cannot be captured");
                (fresh, renamed)
            } else {
                (v.clone(), (**a).clone())
            };
            avoid.insert(v2.clone());
            let inner = rename_binders(&body, avoid);
            if forall {
                Formula::forall(v2, inner)
            } else {
                Formula::exists(v2, inner)
            }
        }
        Formula::Box(..) | Formula::Diamond(..) => {
            unreachable!("builtin backend requires FOL input")
        }
    }
}

fn nnf(f: &Formula, neg: bool, order: &Arc<VarOrder>) -> NForm {
    match f {
        Formula::True => {
            if neg {
                NForm::False
            } else {
                NForm::True
            }
        }
        Formula::False => {
            if neg {
                NForm::True
            } else {
                NForm::False
            }
        }
        Formula::Cmp(a, op, b) => {
            let diff: QPoly = &from_term(a, order) - &from_term(b, order);
            let op = if neg { op.negate() } else { *op };
            match op {
                CmpOp::Ge => NForm::Atom(diff, AtomRel::Ge),
                CmpOp::Gt => NForm::Atom(diff, AtomRel::Gt),
                CmpOp::Le => NForm::Atom(-&diff, AtomRel::Ge),
                CmpOp::Lt => NForm::Atom(-&diff, AtomRel::Gt),
                CmpOp::Eq => NForm::Atom(diff, AtomRel::Eq),
                CmpOp::Ne => NForm::Atom(diff, AtomRel::Ne),
            }
        }
        Formula::And(a, b) => {
            let l = nnf(a, neg, order);
            let r = nnf(b, neg, order);
            if neg {
                NForm::Or(vec![l, r])
            } else {
                NForm::And(vec![l, r])
            }
        }
        Formula::Or(a, b) => {
            let l = nnf(a, neg, order);
            let r = nnf(b, neg, order);
            if neg {
                NForm::And(vec![l, r])
            } else {
                NForm::Or(vec![l, r])
            }
        }
        Formula::Imply(a, b) => {
            let l = nnf(a, !neg, order);
            let r = nnf(b, neg, order);
            if neg {
                NForm::And(vec![l, r])
            } else {
                NForm::Or(vec![l, r])
            }
        }
        Formula::Equiv(a, b) => {
            let expanded = Formula::or(
                Formula::and((**a).clone(), (**b).clone()),
                Formula::and(Formula::not((**a).clone()), Formula::not((**b).clone())),
            );
            nnf(&expanded, neg, order)
        }
        Formula::Not(a) => nnf(a, !neg, order),
        Formula::Forall(v, a) => {
            let inner = nnf(a, neg, order);
            if neg {
                NForm::Exists(v.clone(), Box::new(inner))
            } else {
                NForm::Forall(v.clone(), Box::new(inner))
            }
        }
        Formula::Exists(v, a) => {
            let inner = nnf(a, neg, order);
            if neg {
                NForm::Forall(v.clone(), Box::new(inner))
            } else {
                NForm::Exists(v.clone(), Box::new(inner))
            }
        }
        Formula::Box(..) | Formula::Diamond(..) => unreachable!("FOL input required"),
    }
}

// ---------------------------------------------------------------------------
// propositional closure
// ---------------------------------------------------------------------------

/// Checks that a sequent follows propositionally, treating comparisons,
/// quantified formulas and modalities as opaque atoms compared structurally.
pub fn propositionally_valid(seq: &Sequent) -> bool {
    let mut atoms: Vec<Formula> = Vec::new();
    let mut shapes: Vec<PropShape> = Vec::new();
    for a in &seq.antecedents {
        shapes.push(prop_shape(a, &mut atoms));
    }
    let succ = prop_shape(&seq.succedent, &mut atoms);
    if atoms.len() > 16 {
        return false;
    }
    let n = atoms.len();
    for bits in 0..(1usize << n) {
        let assign = |i: usize| bits & (1 << i) != 0;
        let all_ants = shapes.iter().all(|s| eval_shape(s, &assign));
        if all_ants && !eval_shape(&succ, &assign) {
            return false;
        }
    }
    true
}

#[derive(Clone)]
enum PropShape {
    Atom(usize),
    True,
    False,
    Not(Box<PropShape>),
    And(Box<PropShape>, Box<PropShape>),
    Or(Box<PropShape>, Box<PropShape>),
    Imply(Box<PropShape>, Box<PropShape>),
    Equiv(Box<PropShape>, Box<PropShape>),
}

fn prop_shape(f: &Formula, atoms: &mut Vec<Formula>) -> PropShape {
    match f {
        Formula::True => PropShape::True,
        Formula::False => PropShape::False,
        Formula::Not(a) => PropShape::Not(Box::new(prop_shape(a, atoms))),
        Formula::And(a, b) => {
            PropShape::And(Box::new(prop_shape(a, atoms)), Box::new(prop_shape(b, atoms)))
        }
        Formula::Or(a, b) => {
            PropShape::Or(Box::new(prop_shape(a, atoms)), Box::new(prop_shape(b, atoms)))
        }
        Formula::Imply(a, b) => {
            PropShape::Imply(Box::new(prop_shape(a, atoms)), Box::new(prop_shape(b, atoms)))
        }
        Formula::Equiv(a, b) => {
            PropShape::Equiv(Box::new(prop_shape(a, atoms)), Box::new(prop_shape(b, atoms)))
        }
        other => {
            if let Some(i) = atoms.iter().position(|a| a == other) {
                PropShape::Atom(i)
            } else {
                atoms.push(other.clone());
                PropShape::Atom(atoms.len() - 1)
            }
        }
    }
}

fn eval_shape(s: &PropShape, assign: &impl Fn(usize) -> bool) -> bool {
    match s {
        PropShape::Atom(i) => assign(*i),
        PropShape::True => true,
        PropShape::False => false,
        PropShape::Not(a) => !eval_shape(a, assign),
        PropShape::And(a, b) => eval_shape(a, assign) && eval_shape(b, assign),
        PropShape::Or(a, b) => eval_shape(a, assign) || eval_shape(b, assign),
        PropShape::Imply(a, b) => !eval_shape(a, assign) || eval_shape(b, assign),
        PropShape::Equiv(a, b) => eval_shape(a, assign) == eval_shape(b, assign),
    }
}

// ---------------------------------------------------------------------------
// refutation engine
// ---------------------------------------------------------------------------

struct Refuter {
    order: Arc<VarOrder>,
    // instantiation candidates for universal quantifiers in refutation
    constants: Vec<Q>,
    free_vars: Vec<Var>,
    fuel: usize,
}

impl Refuter {
    fn refute(&mut self, nf: &NForm) -> bool {
        if self.fuel == 0 {
            return false;
        }
        self.fuel -= 1;
        match nf {
            NForm::False => true,
            NForm::True => false,
            NForm::Or(parts) => parts.iter().all(|p| self.refute(p)),
            NForm::Exists(_, body) => self.refute(body), // bound var acts free
            NForm::Forall(v, body) => self.refute_forall(v, body),
            NForm::Atom(..) | NForm::And(..) => {
                let disjuncts = dnf_units(nf);
                disjuncts.iter().all(|d| self.refute_disjunct(d))
            }
        }
    }

    fn refute_disjunct(&mut self, units: &[NForm]) -> bool {
        // split off quantified units
        let mut atoms: Vec<(QPoly, AtomRel)> = Vec::new();
        let mut quantified: Vec<NForm> = Vec::new();
        for u in units {
            match u {
                NForm::True => {}
                NForm::False => return true,
                NForm::Atom(p, r) => atoms.push((p.clone(), *r)),
                q @ (NForm::Forall(..) | NForm::Exists(..)) => quantified.push(q.clone()),
                NForm::And(..) | NForm::Or(..) => unreachable!("dnf_units flattens these"),
            }
        }
        if quantified.is_empty() {
            return self.refute_atoms(&atoms, 0);
        }
        // peel one quantified unit and recurse
        let rest: Vec<NForm> = units
            .iter()
            .filter(|u| **u != quantified[0])
            .cloned()
            .collect();
        match &quantified[0] {
            NForm::Exists(_, body) => {
                let mut parts = rest;
                parts.push((**body).clone());
                self.refute(&NForm::And(parts))
            }
            NForm::Forall(v, body) => {
                // exact route: linear elimination of v from the negation
                if let Some(equiv) = self.forall_linear_equiv(v, body) {
                    let mut parts = rest;
                    parts.push(equiv);
                    return self.refute(&NForm::And(parts));
                }
                // sound fallback: instantiate v with candidate terms
                let mut parts = rest;
                for inst in self.candidates(v) {
                    parts.push(substitute_nform(body, v, &inst, &self.order));
                }
                self.refute(&NForm::And(parts))
            }
            _ => unreachable!(),
        }
    }

    /// Exact rewriting of `forall v. body` into a quantifier-free `NForm`
    /// when `v` occurs only linearly: `forall v b == !(exists v !b)` with the
    /// existential eliminated by Fourier-Motzkin.
    fn forall_linear_equiv(&mut self, v: &Var, body: &NForm) -> Option<NForm> {
        let idx = self.order.index_of(v)?;
        let neg = negate_nform(body)?; // None if quantifiers nested inside
        let disjuncts = dnf_units(&neg);
        let mut result_clauses: Vec<NForm> = Vec::new();
        for d in &disjuncts {
            let mut cons: Vec<Constraint> = Vec::new();
            for u in d {
                match u {
                    NForm::True => {}
                    NForm::False => {
                        cons.clear();
                        cons.push(Constraint::new(
                            Poly::constant(self.order.clone(), -Q::one()),
                            Rel::Ge,
                        ));
                        break;
                    }
                    NForm::Atom(p, AtomRel::Ge) => cons.push(Constraint::new(p.clone(), Rel::Ge)),
                    NForm::Atom(p, AtomRel::Gt) => cons.push(Constraint::new(p.clone(), Rel::Gt)),
                    NForm::Atom(p, AtomRel::Eq) => cons.push(Constraint::new(p.clone(), Rel::Eq)),
                    NForm::Atom(p, AtomRel::Ne) => {
                        // v must still be linear in both splits; handle by
                        // expanding != into two disjuncts up front instead.
                        let mut left = d.clone();
                        let mut right = d.clone();
                        let pos = NForm::Atom(p.clone(), AtomRel::Gt);
                        let neg_atom = NForm::Atom(-p, AtomRel::Gt);
                        replace_unit(&mut left, u, pos);
                        replace_unit(&mut right, u, neg_atom);
                        let rewritten = NForm::Or(vec![NForm::And(left), NForm::And(right)]);
                        let mut outer = NForm::Exists(v.clone(), Box::new(rewritten));
                        // fall back to full recursion on the rewritten form
                        outer = negate_nform(&outer)?;
                        return Some(outer);
                    }
                    _ => return None,
                }
            }
            if !occurs_linearly(&cons, idx) {
                return None;
            }
            let eliminated = eliminate_linear_var(&cons, idx)?;
            // clause: negation of the conjunction `eliminated`
            let lits: Vec<NForm> = eliminated
                .iter()
                .map(|c| match c.rel {
                    Rel::Ge => NForm::Atom(-&c.poly, AtomRel::Gt),
                    Rel::Gt => NForm::Atom(-&c.poly, AtomRel::Ge),
                    Rel::Eq => NForm::Atom(c.poly.clone(), AtomRel::Ne),
                })
                .collect();
            result_clauses.push(NForm::Or(lits));
        }
        Some(NForm::And(result_clauses))
    }

    fn candidates(&self, _v: &Var) -> Vec<QPoly> {
        let mut out: Vec<QPoly> = Vec::new();
        for v in &self.free_vars {
            if let Some(i) = self.order.index_of(v) {
                out.push(QPoly::var(self.order.clone(), i));
            }
        }
        for c in &self.constants {
            out.push(Poly::constant(self.order.clone(), c.clone()));
        }
        out.truncate(MAX_FORALL_CANDIDATES);
        if out.is_empty() {
            out.push(Poly::constant(self.order.clone(), Q::zero()));
        }
        out
    }

    fn refute_atoms(&mut self, atoms: &[(QPoly, AtomRel)], ne_depth: usize) -> bool {
        // expand one != into a two-case split
        if let Some(pos) = atoms.iter().position(|(_, r)| *r == AtomRel::Ne) {
            if ne_depth > MAX_NE_SPLITS {
                return false;
            }
            let (p, _) = &atoms[pos];
            let mut left = atoms.to_vec();
            left[pos] = (p.clone(), AtomRel::Gt);
            let mut right = atoms.to_vec();
            right[pos] = (-p, AtomRel::Gt);
            return self.refute_atoms(&left, ne_depth + 1) && self.refute_atoms(&right, ne_depth + 1);
        }

        let mut cons: Vec<Constraint> = Vec::new();
        for (p, r) in atoms {
            // constant check
            if let Some(c) = p.as_constant() {
                let ok = match r {
                    AtomRel::Ge => !c.is_negative(),
                    AtomRel::Gt => c.is_positive(),
                    AtomRel::Eq => c.is_zero(),
                    AtomRel::Ne => unreachable!(),
                };
                if !ok {
                    return true;
                }
                continue;
            }
            let rel = match r {
                AtomRel::Ge => Rel::Ge,
                AtomRel::Gt => Rel::Gt,
                AtomRel::Eq => Rel::Eq,
                AtomRel::Ne => unreachable!(),
            };
            cons.push(Constraint::new(p.clone(), rel));
        }
        if cons.is_empty() {
            return false; // satisfiable (all constraints constant-true)
        }

        // full decision in the univariate case
        let mut support: BTreeSet<usize> = BTreeSet::new();
        for c in &cons {
            support.extend(c.poly.support());
        }
        if support.len() == 1 {
            let idx = *support.iter().next().expect("one variable");
            let sys: Vec<(Poly1, Rel)> =
                cons.iter().map(|c| (to_poly1(&c.poly, idx), c.rel)).collect();
            return matches!(decide_conjunction(&sys), UniSat::Unsat);
        }

        // tiered Farkas certificate search
        if farkas_refutes(&cons) {
            return true;
        }
        let with_products = extend_products(&cons);
        if count_monomials(&with_products) <= MAX_MONOMIALS && farkas_refutes(&with_products) {
            return true;
        }
        let with_squares = extend_squares(&with_products, &cons, &self.order);
        count_monomials(&with_squares) <= MAX_MONOMIALS && farkas_refutes(&with_squares)
    }
}

fn replace_unit(units: &mut [NForm], target: &NForm, replacement: NForm) {
    for u in units.iter_mut() {
        if u == target {
            *u = replacement;
            return;
        }
    }
}

impl PartialEq for NForm {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (NForm::True, NForm::True) | (NForm::False, NForm::False) => true,
            (NForm::Atom(p, r), NForm::Atom(q, s)) => r == s && p == q,
            (NForm::And(a), NForm::And(b)) | (NForm::Or(a), NForm::Or(b)) => a == b,
            (NForm::Forall(v, a), NForm::Forall(w, b))
            | (NForm::Exists(v, a), NForm::Exists(w, b)) => v == w && a == b,
            _ => false,
        }
    }
}

/// DNF over the top boolean region, keeping quantified subformulas opaque.
/// Each element of the result is a conjunction of units (atoms/quantified).
fn dnf_units(nf: &NForm) -> Vec<Vec<NForm>> {
    match nf {
        NForm::True => vec![vec![]],
        NForm::False => vec![],
        NForm::Atom(..) | NForm::Forall(..) | NForm::Exists(..) => vec![vec![nf.clone()]],
        NForm::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf_units(p));
            }
            out
        }
        NForm::And(parts) => {
            let mut acc: Vec<Vec<NForm>> = vec![vec![]];
            for p in parts {
                let branches = dnf_units(p);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &branches {
                        let mut merged = a.clone();
                        merged.extend(b.clone());
                        next.push(merged);
                    }
                }
                acc = next;
                if acc.len() > 4000 {
                    // avoid explosion; caller treats oversized input as unknown
                    return vec![vec![NForm::True]];
                }
            }
            acc
        }
    }
}

/// Negation at the NForm level; `None` when quantifiers occur inside.
fn negate_nform(nf: &NForm) -> Option<NForm> {
    Some(match nf {
        NForm::True => NForm::False,
        NForm::False => NForm::True,
        NForm::Atom(p, r) => match r {
            AtomRel::Ge => NForm::Atom(-p, AtomRel::Gt),
            AtomRel::Gt => NForm::Atom(-p, AtomRel::Ge),
            AtomRel::Eq => NForm::Atom(p.clone(), AtomRel::Ne),
            AtomRel::Ne => NForm::Atom(p.clone(), AtomRel::Eq),
        },
        NForm::And(parts) => {
            NForm::Or(parts.iter().map(negate_nform).collect::<Option<Vec<_>>>()?)
        }
        NForm::Or(parts) => {
            NForm::And(parts.iter().map(negate_nform).collect::<Option<Vec<_>>>()?)
        }
        NForm::Forall(..) | NForm::Exists(..) => return None,
    })
}

fn substitute_nform(nf: &NForm, v: &Var, rep: &QPoly, order: &Arc<VarOrder>) -> NForm {
    let idx = order.index_of(v).expect("substituted variable in order");
    map_atoms(nf, &|p: &QPoly| p.subst(idx, rep))
}

fn map_atoms(nf: &NForm, f: &impl Fn(&QPoly) -> QPoly) -> NForm {
    match nf {
        NForm::True => NForm::True,
        NForm::False => NForm::False,
        NForm::Atom(p, r) => NForm::Atom(f(p), *r),
        NForm::And(parts) => NForm::And(parts.iter().map(|p| map_atoms(p, f)).collect()),
        NForm::Or(parts) => NForm::Or(parts.iter().map(|p| map_atoms(p, f)).collect()),
        NForm::Forall(v, b) => NForm::Forall(v.clone(), Box::new(map_atoms(b, f))),
        NForm::Exists(v, b) => NForm::Exists(v.clone(), Box::new(map_atoms(b, f))),
    }
}

fn to_poly1(p: &QPoly, idx: usize) -> Poly1 {
    let deg = p.degree_in(idx) as usize;
    let mut coeffs = vec![Q::zero(); deg + 1];
    for (m, c) in p.monomials() {
        let e = m.exp(idx) as usize;
        coeffs[e] = coeffs[e].clone() + c.clone();
    }
    Poly1::new(coeffs)
}

fn count_monomials(cons: &[Constraint]) -> usize {
    let mut monos: BTreeSet<Monomial> = BTreeSet::new();
    for c in cons {
        for (m, _) in c.poly.monomials() {
            monos.insert(m.clone());
        }
    }
    monos.len()
}

/// Adds even-power monomial lemmas, pairwise products of constraints, and
/// products of equalities with low-degree monomials.
fn extend_products(cons: &[Constraint]) -> Vec<Constraint> {
    let mut out = cons.to_vec();
    let order = cons[0].poly.order().clone();

    let mut universe: BTreeSet<Monomial> = BTreeSet::new();
    for c in cons {
        for (m, _) in c.poly.monomials() {
            if !m.is_one() {
                universe.insert(m.clone());
            }
        }
    }

    // even monomials are nonnegative
    for m in &universe {
        if m.all_even() {
            let mut p = QPoly::zero(order.clone());
            p = &p + &QPoly::one(order.clone()).mul_monomial(m, &Q::one());
            out.push(Constraint::new(p, Rel::Ge));
        }
    }

    // pairwise products of the base constraints
    let mut pairs = 0usize;
    for i in 0..cons.len() {
        for j in i..cons.len() {
            if pairs >= MAX_PRODUCT_PAIRS {
                break;
            }
            let (a, b) = (&cons[i], &cons[j]);
            if a.rel == Rel::Eq || b.rel == Rel::Eq {
                continue; // handled by equality products below
            }
            let prod = &a.poly * &b.poly;
            if prod.total_degree() > 8 || prod.num_terms() > 40 {
                continue;
            }
            let rel = if a.rel == Rel::Gt && b.rel == Rel::Gt {
                Rel::Gt
            } else {
                Rel::Ge
            };
            out.push(Constraint::new(prod, rel));
            pairs += 1;
        }
    }

    // products of equalities with variables and low-degree monomials
    for c in cons.iter().filter(|c| c.rel == Rel::Eq) {
        for m in universe.iter().filter(|m| m.degree() <= 2) {
            let prod = c.poly.mul_monomial(m, &Q::one());
            if prod.total_degree() <= 8 {
                out.push(Constraint::new(prod, Rel::Eq));
            }
        }
        for i in 0..order.len() {
            let prod = c.poly.mul_monomial(&Monomial::var(i), &Q::one());
            if prod.total_degree() <= 8 && !out.iter().any(|d| d.poly == prod) {
                out.push(Constraint::new(prod, Rel::Eq));
            }
        }
    }
    out
}

/// Adds squares of a candidate base: variables, constraint polynomials,
/// low-degree monomials, and their pairwise sums/differences.
fn extend_squares(acc: &[Constraint], base: &[Constraint], order: &Arc<VarOrder>) -> Vec<Constraint> {
    let mut out = acc.to_vec();
    let mut cands: Vec<QPoly> = Vec::new();

    let mut support: BTreeSet<usize> = BTreeSet::new();
    for c in base {
        support.extend(c.poly.support());
    }
    for i in &support {
        cands.push(QPoly::var(order.clone(), *i));
    }
    for c in base {
        if c.poly.total_degree() <= 3 && !cands.contains(&c.poly) {
            cands.push(c.poly.clone());
        }
    }
    let mut universe: BTreeSet<Monomial> = BTreeSet::new();
    for c in base {
        for (m, _) in c.poly.monomials() {
            if !m.is_one() && m.degree() >= 2 && m.degree() <= 3 {
                universe.insert(m.clone());
            }
        }
    }
    for m in &universe {
        let p = QPoly::one(order.clone()).mul_monomial(m, &Q::one());
        if !cands.contains(&p) {
            cands.push(p);
        }
    }
    cands.truncate(MAX_SQUARE_BASE);

    for i in 0..cands.len() {
        let sq = &cands[i] * &cands[i];
        if sq.total_degree() <= 8 {
            out.push(Constraint::new(sq, Rel::Ge));
        }
        for j in (i + 1)..cands.len() {
            let diff = &cands[i] - &cands[j];
            let sum = &cands[i] + &cands[j];
            for p in [diff, sum] {
                let sq = &p * &p;
                if sq.total_degree() <= 8 && sq.num_terms() <= 40 {
                    out.push(Constraint::new(sq, Rel::Ge));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// exact evaluation for witnesses
// ---------------------------------------------------------------------------

/// Evaluates a term under a total rational assignment.
pub fn eval_term(t: &Term, asg: &BTreeMap<Var, Q>) -> Option<Q> {
    Some(match t {
        Term::Var(v) => asg.get(v)?.clone(),
        Term::Const(q) => q.clone(),
        Term::Add(a, b) => eval_term(a, asg)? + eval_term(b, asg)?,
        Term::Mul(a, b) => eval_term(a, asg)? * eval_term(b, asg)?,
    })
}

/// Exact truth evaluation of a FOL formula under a rational assignment of its
/// free variables. Quantified subformulas are decided when they are
/// univariate in the bound variable after substitution; `None` otherwise.
pub fn eval_formula(f: &Formula, asg: &BTreeMap<Var, Q>) -> Option<bool> {
    match f {
        Formula::True => Some(true),
        Formula::False => Some(false),
        Formula::Cmp(a, op, b) => {
            let x = eval_term(a, asg)?;
            let y = eval_term(b, asg)?;
            Some(match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Ge => x >= y,
                CmpOp::Gt => x > y,
                CmpOp::Le => x <= y,
                CmpOp::Lt => x < y,
            })
        }
        Formula::And(a, b) => Some(eval_formula(a, asg)? && eval_formula(b, asg)?),
        Formula::Or(a, b) => Some(eval_formula(a, asg)? || eval_formula(b, asg)?),
        Formula::Not(a) => Some(!eval_formula(a, asg)?),
        Formula::Imply(a, b) => Some(!eval_formula(a, asg)? || eval_formula(b, asg)?),
        Formula::Equiv(a, b) => Some(eval_formula(a, asg)? == eval_formula(b, asg)?),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let forall = matches!(f, Formula::Forall(..));
            decide_univariate_closed(v, body, asg, forall)
        }
        Formula::Box(..) | Formula::Diamond(..) => None,
    }
}

fn decide_univariate_closed(
    v: &Var,
    body: &Formula,
    asg: &BTreeMap<Var, Q>,
    forall: bool,
) -> Option<bool> {
    // the body must become univariate in v once the assignment is applied
    let frees = formula_free_vars(body);
    for w in &frees {
        if w != v && !asg.contains_key(w) {
            return None;
        }
    }
    let order = VarOrder::new(vec![v.clone()]);
    // substitute assignment, keeping v symbolic
    let mut asg_only = asg.clone();
    asg_only.remove(v);
    let grounded = ground_formula(body, &asg_only)?;
    if !grounded.is_quantifier_free() || !grounded.is_fol() {
        return None;
    }
    // decide exists v. (forall: negate twice)
    let target = if forall { Formula::not(grounded) } else { grounded };
    let n = nnf(&target, false, &order);
    let sat = nform_sat_univariate(&n, &order)?;
    Some(if forall { !sat } else { sat })
}

fn ground_formula(f: &Formula, asg: &BTreeMap<Var, Q>) -> Option<Formula> {
    Some(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Cmp(a, op, b) => {
            Formula::Cmp(ground_term(a, asg), *op, ground_term(b, asg))
        }
        Formula::And(a, b) => Formula::and(ground_formula(a, asg)?, ground_formula(b, asg)?),
        Formula::Or(a, b) => Formula::or(ground_formula(a, asg)?, ground_formula(b, asg)?),
        Formula::Not(a) => Formula::not(ground_formula(a, asg)?),
        Formula::Imply(a, b) => Formula::imply(ground_formula(a, asg)?, ground_formula(b, asg)?),
        Formula::Equiv(a, b) => {
            Formula::Equiv(Box::new(ground_formula(a, asg)?), Box::new(ground_formula(b, asg)?))
        }
        Formula::Forall(..) | Formula::Exists(..) => return None,
        Formula::Box(..) | Formula::Diamond(..) => return None,
    })
}

fn ground_term(t: &Term, asg: &BTreeMap<Var, Q>) -> Term {
    match t {
        Term::Var(v) => match asg.get(v) {
            Some(q) => Term::Const(q.clone()),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
        Term::Add(a, b) => Term::add(ground_term(a, asg), ground_term(b, asg)),
        Term::Mul(a, b) => Term::mul(ground_term(a, asg), ground_term(b, asg)),
    }
}

fn nform_sat_univariate(nf: &NForm, order: &Arc<VarOrder>) -> Option<bool> {
    match nf {
        NForm::True => Some(true),
        NForm::False => Some(false),
        NForm::Or(parts) => {
            let mut any = false;
            for p in parts {
                if nform_sat_univariate(p, order)? {
                    any = true;
                    break;
                }
            }
            Some(any)
        }
        _ => {
            let disjuncts = dnf_units(nf);
            let mut any = false;
            for d in &disjuncts {
                let mut sys: Vec<(Poly1, Rel)> = Vec::new();
                let mut ne: Vec<Poly1> = Vec::new();
                let mut ok = true;
                for u in d {
                    match u {
                        NForm::True => {}
                        NForm::False => {
                            ok = false;
                            break;
                        }
                        NForm::Atom(p, r) => {
                            let p1 = to_poly1(p, 0);
                            match r {
                                AtomRel::Ge => sys.push((p1, Rel::Ge)),
                                AtomRel::Gt => sys.push((p1, Rel::Gt)),
                                AtomRel::Eq => sys.push((p1, Rel::Eq)),
                                AtomRel::Ne => ne.push(p1),
                            }
                        }
                        _ => return None,
                    }
                }
                if !ok {
                    continue;
                }
                // expand != constraints by branching
                let sat = sat_with_ne(&sys, &ne);
                if sat {
                    any = true;
                    break;
                }
            }
            Some(any)
        }
    }
}

fn sat_with_ne(sys: &[(Poly1, Rel)], ne: &[Poly1]) -> bool {
    if ne.is_empty() {
        return !matches!(decide_conjunction(sys), UniSat::Unsat);
    }
    let (first, rest) = ne.split_first().expect("nonempty");
    for sign in [1, -1] {
        let mut sys2 = sys.to_vec();
        let p = if sign > 0 {
            first.clone()
        } else {
            Poly1::new(first.coeffs.iter().map(|c| -c.clone()).collect())
        };
        sys2.push((p, Rel::Gt));
        if sat_with_ne(&sys2, rest) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

fn collect_constants(f: &Formula, out: &mut Vec<Q>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Cmp(a, _, b) => {
            collect_term_constants(a, out);
            collect_term_constants(b, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            collect_constants(a, out);
            collect_constants(b, out);
        }
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => {
            collect_constants(a, out)
        }
        Formula::Box(..) | Formula::Diamond(..) => {}
    }
}

fn collect_term_constants(t: &Term, out: &mut Vec<Q>) {
    match t {
        Term::Const(q) => {
            if !out.contains(q) {
                out.push(q.clone());
            }
        }
        Term::Var(_) => {}
        Term::Add(a, b) | Term::Mul(a, b) => {
            collect_term_constants(a, out);
            collect_term_constants(b, out);
        }
    }
}

/// Runs the builtin backend on a FOL sequent.
pub fn builtin_check(seq: &Sequent, witness_budget: usize) -> BuiltinOutcome {
    debug_assert!(seq.is_fol());
    if propositionally_valid(seq) {
        return BuiltinOutcome::Valid;
    }

    let goal = seq.to_formula();
    let mut avoid = crate::syntax::subst::all_vars(&goal);
    let renamed = rename_binders(&goal, &mut avoid);

    let mut vars: Vec<Var> = avoid.iter().cloned().collect();
    vars.sort();
    let order = VarOrder::new(vars);

    let negated = nnf(&renamed, true, &order);
    let free: Vec<Var> = formula_free_vars(&renamed).into_iter().collect();
    let mut constants = vec![Q::zero(), Q::one(), -Q::one()];
    collect_constants(&renamed, &mut constants);
    let mut refuter = Refuter {
        order: order.clone(),
        constants,
        free_vars: free.clone(),
        fuel: 40_000,
    };
    if refuter.refute(&negated) {
        return BuiltinOutcome::Valid;
    }

    // witness search through exact evaluation of the original sequent
    if witness_budget > 0 && free.len() <= 5 {
        if let Some(w) = search_witness(&renamed, &free, witness_budget) {
            return BuiltinOutcome::Invalid(w);
        }
    }
    BuiltinOutcome::Unknown
}

fn grid_values(n_vars: usize) -> Vec<Q> {
    let base: Vec<(i64, i64)> = vec![
        (0, 1),
        (1, 1),
        (-1, 1),
        (1, 2),
        (-1, 2),
        (2, 1),
        (-2, 1),
        (1, 4),
        (-1, 4),
        (3, 2),
        (-3, 2),
        (3, 1),
        (-3, 1),
        (5, 1),
        (-5, 1),
        (10, 1),
        (1, 10),
    ];
    let keep = match n_vars {
        0 | 1 => base.len(),
        2 => 13,
        3 => 9,
        4 => 6,
        _ => 4,
    };
    base.into_iter()
        .take(keep)
        .map(|(n, d)| Q::new(n.into(), d.into()))
        .collect()
}

fn search_witness(goal: &Formula, free: &[Var], budget: usize) -> Option<Vec<(Var, Q)>> {
    if free.is_empty() {
        let asg = BTreeMap::new();
        if eval_formula(goal, &asg) == Some(false) {
            return Some(Vec::new());
        }
        return None;
    }
    let values = grid_values(free.len());
    let mut idx = vec![0usize; free.len()];
    let mut tried = 0usize;
    loop {
        let mut asg = BTreeMap::new();
        for (i, v) in free.iter().enumerate() {
            asg.insert(v.clone(), values[idx[i]].clone());
        }
        if eval_formula(goal, &asg) == Some(false) {
            return Some(free.iter().map(|v| (v.clone(), asg[v].clone())).collect());
        }
        tried += 1;
        if tried >= budget {
            return None;
        }
        // advance the mixed-radix counter
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] < values.len() {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry >= free.len() {
                return None;
            }
        }
    }
}
