//! Canonical multivariate polynomial arithmetic.
//!
//! [`Poly`] is a map from monomials (exponent vectors over a per-problem
//! variable order) to nonzero coefficients, kept in graded-lexicographic
//! order. The coefficient scalar is generic: the symbolic path instantiates
//! it with exact rationals, the simulator with `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::syntax::{Term, Var};
use crate::Q;

/// Coefficient scalar for [`Poly`]. Satisfied by `BigRational` and `f64`.
pub trait Coeff:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    /// Conversion from an exact rational, used when lowering terms.
    fn from_rat(q: &Q) -> Self;
}

impl Coeff for Q {
    fn from_rat(q: &Q) -> Self {
        q.clone()
    }
}

impl Coeff for f64 {
    fn from_rat(q: &Q) -> Self {
        use num_traits::ToPrimitive;
        q.to_f64().unwrap_or(f64::NAN)
    }
}

/// Variable order shared by every polynomial of one problem.
///
/// Fixed at parse time from the declaration order; all `Poly` values in a
/// proof share it so that monomial keys are comparable.
#[derive(Debug, PartialEq, Eq)]
pub struct VarOrder {
    vars: Vec<Var>,
}

impl VarOrder {
    pub fn new(vars: Vec<Var>) -> Arc<Self> {
        Arc::new(VarOrder { vars })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, v: &Var) -> Option<usize> {
        self.vars.iter().position(|x| x == v)
    }

    /// Extends the order with fresh variables, preserving existing indices.
    pub fn extend(self: &Arc<Self>, extra: &[Var]) -> Arc<Self> {
        let mut vars = self.vars.clone();
        for v in extra {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        VarOrder::new(vars)
    }
}

/// Exponent vector over a [`VarOrder`]. Trailing zeros are trimmed so that
/// keys stay stable when the order is extended.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(index: usize) -> Self {
        let mut exps = vec![0; index + 1];
        exps[index] = 1;
        Monomial { exps }
    }

    fn trim(mut self) -> Self {
        while self.exps.last() == Some(&0) {
            self.exps.pop();
        }
        self
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exp(&self, index: usize) -> u32 {
        self.exps.get(index).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.exps.len().max(other.exps.len());
        let mut exps = vec![0; n];
        for (i, e) in exps.iter_mut().enumerate() {
            *e = self.exp(i) + other.exp(i);
        }
        Monomial { exps }.trim()
    }

    /// Divides by `x_index` once. `None` when the exponent is zero.
    fn div_var(&self, index: usize) -> Option<Monomial> {
        if self.exp(index) == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[index] -= 1;
        Some(Monomial { exps }.trim())
    }

    pub fn iter_exps(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().copied().enumerate().filter(|(_, e)| *e > 0)
    }

    pub fn all_even(&self) -> bool {
        self.exps.iter().all(|e| e % 2 == 0)
    }
}

/// Graded-lexicographic order: degree first, then lexicographic on exponents.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| {
                let n = self.exps.len().max(other.exps.len());
                for i in 0..n {
                    match self.exp(i).cmp(&other.exp(i)) {
                        std::cmp::Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                std::cmp::Ordering::Equal
            })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical multivariate polynomial. No zero coefficients are stored; the
/// zero polynomial is the empty map.
#[derive(Clone, Debug)]
pub struct Poly<C: Coeff> {
    order: Arc<VarOrder>,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> PartialEq for Poly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<C: Coeff> Eq for Poly<C> {}

impl<C: Coeff> Poly<C> {
    pub fn zero(order: Arc<VarOrder>) -> Self {
        Poly { order, terms: BTreeMap::new() }
    }

    pub fn constant(order: Arc<VarOrder>, c: C) -> Self {
        let mut p = Poly::zero(order);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn one(order: Arc<VarOrder>) -> Self {
        Poly::constant(order, C::one())
    }

    /// The polynomial `x_index`.
    pub fn var(order: Arc<VarOrder>, index: usize) -> Self {
        assert!(index < order.len(), "variable index out of order");
        let mut p = Poly::zero(order);
        p.terms.insert(Monomial::var(index), C::one());
        p
    }

    pub fn order(&self) -> &Arc<VarOrder> {
        &self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value when `is_constant`, otherwise `None`.
    pub fn as_constant(&self) -> Option<C> {
        if self.terms.is_empty() {
            return Some(C::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Degree in one variable.
    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(index)).max().unwrap_or(0)
    }

    /// Indices of variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = Vec::new();
        for m in self.terms.keys() {
            for (i, _) in m.iter_exps() {
                if !idx.contains(&i) {
                    idx.push(i);
                }
            }
        }
        idx.sort_unstable();
        idx
    }

    fn insert(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero(self.order.clone());
        }
        let mut out = Poly::zero(self.order.clone());
        for (m, a) in &self.terms {
            out.insert(m.clone(), a.clone() * c.clone());
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &C) -> Self {
        let mut out = Poly::zero(self.order.clone());
        for (k, a) in &self.terms {
            out.insert(k.mul(m), a.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::one(self.order.clone());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to `x_index`, on the canonical form.
    pub fn partial(&self, index: usize) -> Self {
        let mut out = Poly::zero(self.order.clone());
        for (m, c) in &self.terms {
            let e = m.exp(index);
            if e == 0 {
                continue;
            }
            let dm = m.div_var(index).expect("nonzero exponent");
            let mut factor = C::zero();
            for _ in 0..e {
                factor = factor + C::one();
            }
            out.insert(dm, c.clone() * factor);
        }
        out
    }

    /// Evaluates at a full assignment over the variable order.
    pub fn eval(&self, point: &[C]) -> C {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, e) in m.iter_exps() {
                for _ in 0..e {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitutes a polynomial for one variable.
    pub fn subst(&self, index: usize, rep: &Poly<C>) -> Self {
        let mut out = Poly::zero(self.order.clone());
        for (m, c) in &self.terms {
            let e = m.exp(index);
            let mut rest = m.clone();
            for _ in 0..e {
                rest = rest.div_var(index).expect("exponent");
            }
            let mut piece = Poly::zero(self.order.clone());
            piece.insert(rest, c.clone());
            out = &out + &(&piece * &rep.pow(e));
        }
        out
    }

    /// Re-keys onto an extended variable order (indices must be preserved).
    pub fn with_order(&self, order: Arc<VarOrder>) -> Self {
        debug_assert!(order.len() >= self.order.len());
        Poly { order, terms: self.terms.clone() }
    }

    /// Maps coefficients into another scalar, e.g. rationals to `f64`.
    pub fn map_coeff<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.order.clone());
        for (m, c) in &self.terms {
            out.insert(m.clone(), f(c));
        }
        out
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        let mut out = Poly::zero(self.order.clone());
        for (m, c) in &self.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero(self.order.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (i, e) in m.iter_exps() {
                write!(f, "*{}", self.order.vars()[i])?;
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

/// Lowers a term to its canonical polynomial. All variables of the term must
/// be present in the order.
pub fn from_term<C: Coeff>(t: &Term, order: &Arc<VarOrder>) -> Poly<C> {
    match t {
        Term::Var(v) => {
            let idx = order
                .index_of(v)
                .unwrap_or_else(|| panic!("variable {} not in polynomial order", v));
            Poly::var(order.clone(), idx)
        }
        Term::Const(q) => Poly::constant(order.clone(), C::from_rat(q)),
        Term::Add(a, b) => &from_term(a, order) + &from_term(b, order),
        Term::Mul(a, b) => &from_term(a, order) * &from_term(b, order),
    }
}

/// Converts a rational polynomial back to a term in canonical monomial order.
/// `from_term(to_term(p)) == p` for every `p`.
pub fn to_term(p: &Poly<Q>) -> Term {
    if p.is_zero() {
        return Term::Const(Q::zero());
    }
    let mut acc: Option<Term> = None;
    for (m, c) in p.monomials() {
        let mut factor: Option<Term> = None;
        for (i, e) in m.iter_exps() {
            let v = Term::Var(p.order().vars()[i].clone());
            for _ in 0..e {
                factor = Some(match factor {
                    None => v.clone(),
                    Some(t) => Term::Mul(Box::new(t), Box::new(v.clone())),
                });
            }
        }
        let piece = match factor {
            None => Term::Const(c.clone()),
            Some(t) => {
                if c.is_one() {
                    t
                } else {
                    Term::Mul(Box::new(Term::Const(c.clone())), Box::new(t))
                }
            }
        };
        acc = Some(match acc {
            None => piece,
            Some(t) => Term::Add(Box::new(t), Box::new(piece)),
        });
    }
    acc.expect("nonzero polynomial")
}

/// Lie derivative of `p` along `x' = f(x)`: sum of `(dp/dx_i) * f_i`.
/// Variables not driven by the ODE contribute zero.
pub fn lie_derivative<C: Coeff>(
    p: &Poly<C>,
    ode: &crate::syntax::ODESystem,
    order: &Arc<VarOrder>,
) -> Poly<C> {
    let mut acc = Poly::zero(order.clone());
    for (v, rhs) in ode.equations() {
        let Some(idx) = order.index_of(v) else { continue };
        let dp = p.partial(idx);
        if dp.is_zero() {
            continue;
        }
        let f = from_term(rhs, order);
        acc = &acc + &(&dp * &f);
    }
    acc
}

/// k-fold Lie derivative; `higher_lie(p, ode, 0) == p`.
pub fn higher_lie<C: Coeff>(
    p: &Poly<C>,
    ode: &crate::syntax::ODESystem,
    order: &Arc<VarOrder>,
    k: u32,
) -> Poly<C> {
    let mut acc = p.clone();
    for _ in 0..k {
        acc = lie_derivative(&acc, ode, order);
    }
    acc
}

/// Dot product of two equal-length polynomial vectors.
pub fn dot<C: Coeff>(xs: &[Poly<C>], ys: &[Poly<C>], order: &Arc<VarOrder>) -> Poly<C> {
    assert_eq!(xs.len(), ys.len(), "dot product length mismatch");
    let mut acc = Poly::zero(order.clone());
    for (x, y) in xs.iter().zip(ys) {
        acc = &acc + &(x * y);
    }
    acc
}

/// Squared Euclidean norm of a polynomial vector.
pub fn sq_norm<C: Coeff>(xs: &[Poly<C>], order: &Arc<VarOrder>) -> Poly<C> {
    dot(xs, xs, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::{int, rat};

    fn order(vars: &[&str]) -> Arc<VarOrder> {
        VarOrder::new(vars.iter().map(|s| Var::from(*s)).collect())
    }

    fn qp(src: &str, ord: &Arc<VarOrder>) -> Poly<Q> {
        from_term(&parse_term(src).unwrap(), ord)
    }

    #[test]
    fn zero_poly_is_empty_map() {
        let ord = order(&["u", "v"]);
        let p = qp("u - u", &ord);
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn from_to_term_round_trip() {
        let ord = order(&["u", "v"]);
        let p = qp("3*u^2*v - 1/2*v + 7", &ord);
        let back: Poly<Q> = from_term(&to_term(&p), &ord);
        assert_eq!(p, back);
    }

    #[test]
    fn lie_derivative_of_disk_under_nonlinear_ode() {
        // alpha_n: u' = -v - u(1/4 - u^2 - v^2), v' = u - v(1/4 - u^2 - v^2)
        let ord = order(&["u", "v"]);
        let ode = crate::syntax::parse_ode(
            "u' = -v - u*(1/4 - u^2 - v^2), v' = u - v*(1/4 - u^2 - v^2)",
        )
        .unwrap();
        // L(1/4 - (u^2+v^2)) = 2(u^2+v^2)(1/4 - (u^2+v^2)) ... = -2s(s-1/4)
        let p = qp("1/4 - (u^2 + v^2)", &ord);
        let lie = lie_derivative(&p, &ode, &ord);
        let expected = qp("2*(u^2+v^2)*(1/4 - (u^2+v^2))", &ord);
        assert_eq!(lie, expected);
        // and L(u^2+v^2) = 2(u^2+v^2)(u^2+v^2-1/4)
        let s = qp("u^2 + v^2", &ord);
        let lie_s = lie_derivative(&s, &ode, &ord);
        let expected_s = qp("2*(u^2+v^2)*(u^2+v^2-1/4)", &ord);
        assert_eq!(lie_s, expected_s);
    }

    #[test]
    fn lie_derivative_of_constant_is_zero() {
        let ord = order(&["u", "v"]);
        let ode = crate::syntax::parse_ode("u' = -v - u, v' = u - v").unwrap();
        let c = Poly::constant(ord.clone(), rat(5, 3));
        assert!(lie_derivative(&c, &ode, &ord).is_zero());
    }

    #[test]
    fn higher_lie_double_integrator() {
        let ord = order(&["u", "v"]);
        let ode = crate::syntax::parse_ode("u' = v, v' = 1").unwrap();
        let u = qp("u", &ord);
        assert_eq!(higher_lie(&u, &ode, &ord, 0), u);
        let l2 = higher_lie(&u, &ode, &ord, 2);
        assert_eq!(l2.as_constant(), Some(int(1)));
    }

    #[test]
    fn higher_lie_decay_returns() {
        let ord = order(&["u"]);
        let ode = crate::syntax::parse_ode("u' = -u").unwrap();
        let u = qp("u", &ord);
        assert_eq!(higher_lie(&u, &ode, &ord, 2), u);
    }

    #[test]
    fn dot_and_sq_norm() {
        let ord = order(&["u", "v"]);
        let u = qp("u", &ord);
        let v = qp("v", &ord);
        let n = sq_norm(&[u.clone(), v.clone()], &ord);
        assert_eq!(n, qp("u^2 + v^2", &ord));
        // Example 1 shape: dot((v), (-v^2)) = -v^3
        let mv2 = qp("-v^2", &ord);
        assert_eq!(dot(&[v], &[mv2], &ord), qp("-v^3", &ord));
        let empty: Vec<Poly<Q>> = Vec::new();
        assert!(dot(&empty, &[], &ord).is_zero());
    }

    #[test]
    fn f64_instantiation_evaluates() {
        let ord = order(&["u", "v"]);
        let p: Poly<f64> = from_term(&parse_term("u^2 + 2*v").unwrap(), &ord);
        let val = p.eval(&[3.0, 0.5]);
        assert!((val - 10.0).abs() < 1e-12);
    }
}
