//! Semialgebraic normal form: disjunction of conjunctions of `p >= 0` and
//! `q > 0` atoms.

use std::sync::Arc;

use num_traits::Signed;

use super::ast::{CmpOp, Formula, Term};
use crate::poly::{from_term, to_term, VarOrder};
use crate::{Q, QPoly};

/// One conjunction of the normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disjunct {
    /// Atoms `p >= 0`.
    pub nonneg: Vec<Term>,
    /// Atoms `q > 0`.
    pub pos: Vec<Term>,
}

impl Disjunct {
    fn truth() -> Self {
        Disjunct { nonneg: Vec::new(), pos: Vec::new() }
    }

    pub fn to_formula(&self) -> Formula {
        let zero = Term::Const(Q::from_integer(0.into()));
        let mut parts = Vec::new();
        for p in &self.nonneg {
            parts.push(Formula::cmp(p.clone(), CmpOp::Ge, zero.clone()));
        }
        for q in &self.pos {
            parts.push(Formula::cmp(q.clone(), CmpOp::Gt, zero.clone()));
        }
        Formula::conj(parts)
    }
}

/// Disjunction of [`Disjunct`]s. The empty disjunction is `false`; a disjunct
/// with no atoms is `true`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub disjuncts: Vec<Disjunct>,
}

impl NormalForm {
    pub fn to_formula(&self) -> Formula {
        Formula::disj(self.disjuncts.iter().map(Disjunct::to_formula))
    }

    pub fn is_true(&self) -> bool {
        self.disjuncts.iter().any(|d| d.nonneg.is_empty() && d.pos.is_empty())
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("normal form requires a quantifier-free formula")]
    Quantified,
    #[error("normal form requires a modality-free formula")]
    Modal,
}

// Atom with polarity resolved; Eq contributes two nonneg constraints, Ne two
// disjuncts.
#[derive(Clone)]
enum NAtom {
    Nonneg(QPoly),
    Pos(QPoly),
    Eq(QPoly),
    Ne(QPoly),
}

enum Nnf {
    True,
    False,
    Atom(NAtom),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
}

fn nnf(f: &Formula, neg: bool, order: &Arc<VarOrder>) -> Result<Nnf, NormalFormError> {
    Ok(match f {
        Formula::True => {
            if neg {
                Nnf::False
            } else {
                Nnf::True
            }
        }
        Formula::False => {
            if neg {
                Nnf::True
            } else {
                Nnf::False
            }
        }
        Formula::Cmp(a, op, b) => {
            let diff: QPoly = &from_term(a, order) - &from_term(b, order);
            let op = if neg { op.negate() } else { *op };
            let atom = match op {
                CmpOp::Ge => NAtom::Nonneg(diff),
                CmpOp::Gt => NAtom::Pos(diff),
                CmpOp::Le => NAtom::Nonneg(-&diff),
                CmpOp::Lt => NAtom::Pos(-&diff),
                CmpOp::Eq => NAtom::Eq(diff),
                CmpOp::Ne => NAtom::Ne(diff),
            };
            Nnf::Atom(atom)
        }
        Formula::And(a, b) => {
            let (l, r) = (nnf(a, neg, order)?, nnf(b, neg, order)?);
            if neg {
                Nnf::Or(Box::new(l), Box::new(r))
            } else {
                Nnf::And(Box::new(l), Box::new(r))
            }
        }
        Formula::Or(a, b) => {
            let (l, r) = (nnf(a, neg, order)?, nnf(b, neg, order)?);
            if neg {
                Nnf::And(Box::new(l), Box::new(r))
            } else {
                Nnf::Or(Box::new(l), Box::new(r))
            }
        }
        Formula::Not(a) => nnf(a, !neg, order)?,
        Formula::Imply(a, b) => {
            // a -> b == !a | b
            let (l, r) = (nnf(a, !neg, order)?, nnf(b, neg, order)?);
            if neg {
                Nnf::And(Box::new(l), Box::new(r))
            } else {
                Nnf::Or(Box::new(l), Box::new(r))
            }
        }
        Formula::Equiv(a, b) => {
            let both = Formula::or(
                Formula::and((**a).clone(), (**b).clone()),
                Formula::and(Formula::not((**a).clone()), Formula::not((**b).clone())),
            );
            nnf(&both, neg, order)?
        }
        Formula::Forall(..) | Formula::Exists(..) => return Err(NormalFormError::Quantified),
        Formula::Box(..) | Formula::Diamond(..) => return Err(NormalFormError::Modal),
    })
}

// A disjunct under construction, in polynomial form.
#[derive(Clone, Default)]
struct PolyDisjunct {
    nonneg: Vec<QPoly>,
    pos: Vec<QPoly>,
    // trivially false
    dead: bool,
}

impl PolyDisjunct {
    fn push(&mut self, atom: &NAtom) {
        if self.dead {
            return;
        }
        match atom {
            NAtom::Nonneg(p) => self.push_nonneg(p),
            NAtom::Pos(p) => self.push_pos(p),
            NAtom::Eq(p) => {
                self.push_nonneg(p);
                self.push_nonneg(&-p);
            }
            NAtom::Ne(_) => unreachable!("Ne expands to two disjuncts earlier"),
        }
    }

    fn push_nonneg(&mut self, p: &QPoly) {
        if let Some(c) = p.as_constant() {
            if c.is_negative() {
                self.dead = true;
            }
            return;
        }
        if !self.nonneg.contains(p) {
            self.nonneg.push(p.clone());
        }
    }

    fn push_pos(&mut self, p: &QPoly) {
        if let Some(c) = p.as_constant() {
            if !c.is_positive() {
                self.dead = true;
            }
            return;
        }
        if !self.pos.contains(p) {
            self.pos.push(p.clone());
        }
    }
}

fn dnf(n: &Nnf) -> Vec<PolyDisjunct> {
    match n {
        Nnf::True => vec![PolyDisjunct::default()],
        Nnf::False => vec![],
        Nnf::Atom(NAtom::Ne(p)) => {
            let mut a = PolyDisjunct::default();
            a.push_pos(p);
            let mut b = PolyDisjunct::default();
            b.push_pos(&-p);
            [a, b].into_iter().filter(|d| !d.dead).collect()
        }
        Nnf::Atom(atom) => {
            let mut d = PolyDisjunct::default();
            d.push(atom);
            if d.dead {
                vec![]
            } else {
                vec![d]
            }
        }
        Nnf::Or(a, b) => {
            let mut out = dnf(a);
            out.extend(dnf(b));
            out
        }
        Nnf::And(a, b) => {
            let left = dnf(a);
            let right = dnf(b);
            let mut out = Vec::new();
            for l in &left {
                for r in &right {
                    let mut d = l.clone();
                    for p in &r.nonneg {
                        d.push_nonneg(p);
                    }
                    for p in &r.pos {
                        d.push_pos(p);
                    }
                    if !d.dead {
                        out.push(d);
                    }
                }
            }
            out
        }
    }
}

/// Converts a quantifier-free FOL_R formula into normal form: a disjunction
/// of conjunctions of `p >= 0` and `q > 0` atoms, logically equivalent to the
/// input. `!=` expands to a two-disjunct form.
pub fn to_normal_form(f: &Formula, order: &Arc<VarOrder>) -> Result<NormalForm, NormalFormError> {
    let n = nnf(f, false, order)?;
    let polys = dnf(&n);
    let mut disjuncts = Vec::new();
    for d in polys {
        let mut out = Disjunct::truth();
        for p in &d.nonneg {
            out.nonneg.push(to_term(p));
        }
        for p in &d.pos {
            out.pos.push(to_term(p));
        }
        if !disjuncts.contains(&out) {
            disjuncts.push(out);
        }
    }
    Ok(NormalForm { disjuncts })
}

/// Negation at the normal-form level: De Morgan plus atom flipping
/// (`!(p>=0) == -p>0`, `!(q>0) == -q>=0`).
pub fn negate_normal_form(nf: &NormalForm, order: &Arc<VarOrder>) -> NormalForm {
    // negation of each disjunct is a clause (disjunction of flipped atoms);
    // distribute the conjunction of clauses back into a DNF.
    let mut acc: Vec<PolyDisjunct> = vec![PolyDisjunct::default()];
    for d in &nf.disjuncts {
        let mut clause: Vec<NAtom> = Vec::new();
        for p in &d.nonneg {
            clause.push(NAtom::Pos(-&from_term::<Q>(p, order)));
        }
        for q in &d.pos {
            clause.push(NAtom::Nonneg(-&from_term::<Q>(q, order)));
        }
        let mut next = Vec::new();
        for base in &acc {
            for atom in &clause {
                let mut ext = base.clone();
                ext.push(atom);
                if !ext.dead {
                    next.push(ext);
                }
            }
        }
        acc = next;
    }
    let mut disjuncts = Vec::new();
    for d in acc {
        let out = Disjunct {
            nonneg: d.nonneg.iter().map(to_term).collect(),
            pos: d.pos.iter().map(to_term).collect(),
        };
        if !disjuncts.contains(&out) {
            disjuncts.push(out);
        }
    }
    NormalForm { disjuncts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, Var};

    fn ord() -> Arc<VarOrder> {
        VarOrder::new(vec![Var::from("p"), Var::from("q"), Var::from("r"), Var::from("u")])
    }

    #[test]
    fn interval_to_single_disjunct() {
        let f = parse_formula("-1 <= u & u <= 1").unwrap();
        let nf = to_normal_form(&f, &ord()).unwrap();
        assert_eq!(nf.disjuncts.len(), 1);
        let d = &nf.disjuncts[0];
        assert_eq!(d.pos.len(), 0);
        assert_eq!(d.nonneg.len(), 2);
        // u+1 >= 0 and 1-u >= 0 up to canonical polynomial form
        let printed: Vec<String> = d.nonneg.iter().map(|t| t.to_string()).collect();
        assert!(printed.iter().any(|s| s.contains("u")), "{:?}", printed);
    }

    #[test]
    fn negated_nonneg_flips_to_pos() {
        let f = parse_formula("!(p >= 0)").unwrap();
        let nf = to_normal_form(&f, &ord()).unwrap();
        assert_eq!(nf.disjuncts.len(), 1);
        assert_eq!(nf.disjuncts[0].nonneg.len(), 0);
        assert_eq!(nf.disjuncts[0].pos.len(), 1);
        assert_eq!(nf.disjuncts[0].pos[0].to_string(), "-p");
    }

    #[test]
    fn equality_gives_two_nonneg_each_disjunct() {
        let f = parse_formula("(p >= 0 | q > 0) & r = 0").unwrap();
        let nf = to_normal_form(&f, &ord()).unwrap();
        assert_eq!(nf.disjuncts.len(), 2);
        for d in &nf.disjuncts {
            let has_r = d.nonneg.iter().filter(|t| t.to_string().contains('r')).count();
            assert_eq!(has_r, 2, "each disjunct carries r >= 0 and -r >= 0");
        }
    }

    #[test]
    fn true_false_edges() {
        let t = to_normal_form(&Formula::True, &ord()).unwrap();
        assert!(t.is_true());
        let f = to_normal_form(&Formula::False, &ord()).unwrap();
        assert!(f.is_false());
        let neg_t = negate_normal_form(&t, &ord());
        assert!(neg_t.is_false());
        let neg_f = negate_normal_form(&f, &ord());
        assert!(neg_f.is_true());
    }

    #[test]
    fn ne_is_two_disjuncts() {
        let f = parse_formula("u != 0").unwrap();
        let nf = to_normal_form(&f, &ord()).unwrap();
        assert_eq!(nf.disjuncts.len(), 2);
        assert!(nf.disjuncts.iter().all(|d| d.pos.len() == 1 && d.nonneg.is_empty()));
    }
}
