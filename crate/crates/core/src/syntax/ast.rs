use std::fmt;
use std::sync::Arc;

use crate::Q;

/// Variable name. Interned behind an `Arc` since formulas clone heavily.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(Arc::from(s))
    }
}

impl From<String> for Var {
    fn from(s: String) -> Self {
        Var(Arc::from(s.as_str()))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Polynomial term. Subtraction, unary minus and natural-number powers are
/// parser sugar expanded to this core; constants are exact rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Var(Var),
    Const(Q),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::from(name))
    }

    pub fn constant(q: Q) -> Term {
        Term::Const(q)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b))
    }

    /// Unary minus: folds into constants, otherwise multiplies by -1.
    pub fn neg(a: Term) -> Term {
        match a {
            Term::Const(q) => Term::Const(-q),
            t => Term::mul(Term::Const(-Q::from_integer(1.into())), t),
        }
    }
}

/// Comparison operator of an atom `p ~ q`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, CmpOp::Ne | CmpOp::Gt | CmpOp::Lt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
        }
    }
}

/// System of ODEs `x' = f(x) & Q`. Left-hand sides are pairwise distinct and
/// right-hand sides never mention primed symbols.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ODESystem {
    equations: Vec<(Var, Term)>,
    domain: Box<Formula>,
}

impl ODESystem {
    pub fn new(equations: Vec<(Var, Term)>, domain: Formula) -> Self {
        let mut seen: Vec<&Var> = Vec::new();
        for (v, _) in &equations {
            assert!(!seen.contains(&v), "duplicate ODE variable {}", v);
            seen.push(v);
        }
        ODESystem { equations, domain: Box::new(domain) }
    }

    pub fn equations(&self) -> &[(Var, Term)] {
        &self.equations
    }

    pub fn domain(&self) -> &Formula {
        &self.domain
    }

    pub fn lhs_vars(&self) -> Vec<Var> {
        self.equations.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn rhs_of(&self, v: &Var) -> Option<&Term> {
        self.equations.iter().find(|(w, _)| w == v).map(|(_, t)| t)
    }

    pub fn with_domain(&self, domain: Formula) -> ODESystem {
        ODESystem::new(self.equations.clone(), domain)
    }

    /// Appends an equation; the new variable must not already be driven.
    pub fn extend(&self, var: Var, rhs: Term) -> ODESystem {
        let mut eqs = self.equations.clone();
        assert!(self.rhs_of(&var).is_none(), "variable {} already driven", var);
        eqs.push((var, rhs));
        ODESystem::new(eqs, (*self.domain).clone())
    }

    /// Removes one equation by variable.
    pub fn without(&self, var: &Var) -> ODESystem {
        let eqs = self
            .equations
            .iter()
            .filter(|(v, _)| v != var)
            .cloned()
            .collect();
        ODESystem::new(eqs, (*self.domain).clone())
    }
}

/// First-order real arithmetic plus box/diamond modalities over ODE systems.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    True,
    False,
    Cmp(Term, CmpOp, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    Box(ODESystem, Box<Formula>),
    Diamond(ODESystem, Box<Formula>),
}

impl Formula {
    pub fn cmp(a: Term, op: CmpOp, b: Term) -> Formula {
        Formula::Cmp(a, op, b)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn imply(a: Formula, b: Formula) -> Formula {
        Formula::Imply(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, a: Formula) -> Formula {
        Formula::Forall(v, Box::new(a))
    }

    pub fn exists(v: Var, a: Formula) -> Formula {
        Formula::Exists(v, Box::new(a))
    }

    pub fn boxm(ode: ODESystem, a: Formula) -> Formula {
        Formula::Box(ode, Box::new(a))
    }

    pub fn diamond(ode: ODESystem, a: Formula) -> Formula {
        Formula::Diamond(ode, Box::new(a))
    }

    /// Conjunction of a list, `true` when empty.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in fs {
            acc = Some(match acc {
                None => f,
                Some(g) => Formula::and(g, f),
            });
        }
        acc.unwrap_or(Formula::True)
    }

    /// Disjunction of a list, `false` when empty.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in fs {
            acc = Some(match acc {
                None => f,
                Some(g) => Formula::or(g, f),
            });
        }
        acc.unwrap_or(Formula::False)
    }

    /// A formula is FOL_R iff it contains no modality. Used as a precondition
    /// by the arithmetic oracle.
    pub fn is_fol(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                a.is_fol() && b.is_fol()
            }
            Formula::Not(a) => a.is_fol(),
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.is_fol(),
            Formula::Box(..) | Formula::Diamond(..) => false,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::Box(..) | Formula::Diamond(..) => false,
        }
    }
}

/// Sequent with antecedent list and a single succedent. Antecedent order is
/// preserved; proof scripts reference antecedents by 0-based index.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Sequent {
    pub antecedents: Vec<Formula>,
    pub succedent: Formula,
}

impl Sequent {
    pub fn new(antecedents: Vec<Formula>, succedent: Formula) -> Self {
        Sequent { antecedents, succedent }
    }

    pub fn entails(succedent: Formula) -> Self {
        Sequent { antecedents: Vec::new(), succedent }
    }

    /// The formula `/\ Gamma -> phi`.
    pub fn to_formula(&self) -> Formula {
        if self.antecedents.is_empty() {
            return self.succedent.clone();
        }
        Formula::imply(Formula::conj(self.antecedents.iter().cloned()), self.succedent.clone())
    }

    pub fn is_fol(&self) -> bool {
        self.antecedents.iter().all(Formula::is_fol) && self.succedent.is_fol()
    }

    pub fn with_extra_antecedents(&self, extra: impl IntoIterator<Item = Formula>) -> Sequent {
        let mut ants = self.antecedents.clone();
        ants.extend(extra);
        Sequent::new(ants, self.succedent.clone())
    }
}
