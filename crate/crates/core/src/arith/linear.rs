//! Exact rational linear algebra: phase-1 simplex for Farkas certificate
//! search and Fourier–Motzkin elimination of linearly occurring variables.

use num_traits::{One, Signed, Zero};

use crate::poly::{Monomial, Poly};
use crate::{Q, QPoly};

/// Relation of a constraint polynomial against zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Gt,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub poly: QPoly,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(poly: QPoly, rel: Rel) -> Self {
        Constraint { poly, rel }
    }
}

/// Finds `lambda >= 0` with `A lambda = b` via phase-1 simplex (Bland's
/// rule). Returns one feasible solution.
pub fn simplex_feasible(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let m = a.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let n = a[0].len();
    // rows scaled so b >= 0
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut rhs: Vec<Q> = Vec::with_capacity(m);
    for i in 0..m {
        if b[i].is_negative() {
            rows.push(a[i].iter().map(|x| -x.clone()).collect());
            rhs.push(-b[i].clone());
        } else {
            rows.push(a[i].clone());
            rhs.push(b[i].clone());
        }
    }
    // tableau columns: n structural + m artificial
    let total = n + m;
    let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = rows[i].clone();
        row.resize(total, Q::zero());
        row[n + i] = Q::one();
        row.push(rhs[i].clone());
        tab.push(row);
    }
    // objective: minimize sum of artificials; reduced cost row
    let mut basis: Vec<usize> = (n..total).collect();
    let mut obj: Vec<Q> = vec![Q::zero(); total + 1];
    for i in 0..m {
        for j in 0..=total {
            let v = tab[i][j].clone();
            obj[j] = obj[j].clone() + v;
        }
    }

    let max_iters = 200 + 20 * (total + m);
    for _ in 0..max_iters {
        // Bland: smallest index with positive reduced cost
        let mut pivot_col = None;
        for (j, c) in obj.iter().enumerate().take(total) {
            if c.is_positive() {
                pivot_col = Some(j);
                break;
            }
        }
        let Some(col) = pivot_col else { break };
        // ratio test, Bland tie-break by basis index
        let mut pivot_row: Option<usize> = None;
        let mut best: Option<Q> = None;
        for i in 0..m {
            if tab[i][col].is_positive() {
                let ratio = tab[i][total].clone() / tab[i][col].clone();
                let better = match &best {
                    None => true,
                    Some(r) => {
                        ratio < *r
                            || (ratio == *r
                                && basis[i] < basis[pivot_row.expect("row set with best")])
                    }
                };
                if better {
                    best = Some(ratio);
                    pivot_row = Some(i);
                }
            }
        }
        let Some(row) = pivot_row else {
            // unbounded in phase 1 cannot happen (objective bounded below by 0)
            break;
        };
        // pivot
        let piv = tab[row][col].clone();
        for j in 0..=total {
            tab[row][j] = tab[row][j].clone() / piv.clone();
        }
        for i in 0..m {
            if i != row && !tab[i][col].is_zero() {
                let f = tab[i][col].clone();
                for j in 0..=total {
                    let delta = f.clone() * tab[row][j].clone();
                    tab[i][j] = tab[i][j].clone() - delta;
                }
            }
        }
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for j in 0..=total {
                let delta = f.clone() * tab[row][j].clone();
                obj[j] = obj[j].clone() - delta;
            }
        }
        basis[row] = col;
    }

    if !obj[total].is_zero() {
        return None; // artificials could not be driven to zero
    }
    let mut lambda = vec![Q::zero(); n];
    for i in 0..m {
        if basis[i] < n {
            lambda[basis[i]] = tab[i][total].clone();
        } else if !tab[i][total].is_zero() {
            // degenerate artificial stuck in basis at zero is fine; nonzero is
            // caught by the objective check above
            return None;
        }
    }
    Some(lambda)
}

/// Searches for a Farkas-style infeasibility certificate: nonnegative
/// multipliers over the constraint polynomials whose sum is a negative
/// constant, or identically zero with at least one strict multiplier.
///
/// Returns `true` when the constraint set is certified infeasible over the
/// reals. Soundness only depends on every input constraint being implied by
/// the refuted system.
pub fn farkas_refutes(constraints: &[Constraint]) -> bool {
    // expand equalities into two inequalities
    let mut polys: Vec<(QPoly, bool)> = Vec::new(); // (poly, strict)
    for c in constraints {
        match c.rel {
            Rel::Ge => polys.push((c.poly.clone(), false)),
            Rel::Gt => polys.push((c.poly.clone(), true)),
            Rel::Eq => {
                polys.push((c.poly.clone(), false));
                polys.push((-&c.poly, false));
            }
        }
    }
    if polys.is_empty() {
        return false;
    }

    // monomial universe
    let mut monos: Vec<Monomial> = Vec::new();
    for (p, _) in &polys {
        for (m, _) in p.monomials() {
            if !m.is_one() && !monos.contains(m) {
                monos.push(m.clone());
            }
        }
    }
    if monos.len() > 120 || polys.len() > 600 {
        return false;
    }

    let coeff_of = |p: &QPoly, m: &Monomial| p.coeff(m);
    let n = polys.len();

    // Attempt (A): sum == -1
    {
        let mut a: Vec<Vec<Q>> = Vec::new();
        let mut b: Vec<Q> = Vec::new();
        for m in &monos {
            a.push(polys.iter().map(|(p, _)| coeff_of(p, m)).collect());
            b.push(Q::zero());
        }
        a.push(polys.iter().map(|(p, _)| coeff_of(p, &Monomial::one())).collect());
        b.push(-Q::one());
        if simplex_feasible(&a, &b).is_some() {
            return true;
        }
    }

    // Attempt (B): sum == 0 with strict mass 1
    if polys.iter().any(|(_, s)| *s) {
        let mut a: Vec<Vec<Q>> = Vec::new();
        let mut b: Vec<Q> = Vec::new();
        for m in &monos {
            a.push(polys.iter().map(|(p, _)| coeff_of(p, m)).collect());
            b.push(Q::zero());
        }
        a.push(polys.iter().map(|(p, _)| coeff_of(p, &Monomial::one())).collect());
        b.push(Q::zero());
        let strict_row: Vec<Q> = polys
            .iter()
            .map(|(_, s)| if *s { Q::one() } else { Q::zero() })
            .collect();
        a.push(strict_row);
        b.push(Q::one());
        let _ = n;
        if simplex_feasible(&a, &b).is_some() {
            return true;
        }
    }
    false
}

/// How a variable occurs across a constraint set.
pub fn occurs_linearly(constraints: &[Constraint], var_idx: usize) -> bool {
    constraints.iter().all(|c| poly_linear_in(&c.poly, var_idx))
}

/// True when every monomial mentioning the variable is exactly that variable
/// to the first power (so its coefficient is a rational constant).
pub fn poly_linear_in(p: &QPoly, var_idx: usize) -> bool {
    p.monomials().all(|(m, _)| {
        let e = m.exp(var_idx);
        e == 0 || (e == 1 && m.degree() == 1)
    })
}

fn split_linear(p: &QPoly, var_idx: usize) -> (Q, QPoly) {
    // p = c * x + rest, assuming poly_linear_in
    let mono = Monomial::var(var_idx);
    let c = p.coeff(&mono);
    let cx = QPoly::var(p.order().clone(), var_idx).scale(&c);
    let rest = p - &cx;
    (c, rest)
}

/// Fourier–Motzkin elimination of an existentially quantified variable that
/// occurs only linearly with rational coefficients. Exact: the result is
/// satisfiable iff the input is (over the remaining variables).
pub fn eliminate_linear_var(constraints: &[Constraint], var_idx: usize) -> Option<Vec<Constraint>> {
    if !occurs_linearly(constraints, var_idx) {
        return None;
    }
    // substitute using an equality when available
    for (i, c) in constraints.iter().enumerate() {
        if c.rel == Rel::Eq {
            let (coef, rest) = split_linear(&c.poly, var_idx);
            if !coef.is_zero() {
                // x = -rest / coef
                let rep = rest.scale(&(-Q::one() / coef));
                let mut out = Vec::new();
                for (j, d) in constraints.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let (cj, restj) = split_linear(&d.poly, var_idx);
                    let newp = &restj + &rep.scale(&cj);
                    out.push(Constraint::new(newp, d.rel));
                }
                return Some(out);
            }
        }
    }
    let mut lowers: Vec<(QPoly, bool)> = Vec::new(); // c*x + r >= 0, c > 0 -> x >= -r/c
    let mut uppers: Vec<(QPoly, bool)> = Vec::new();
    let mut rest: Vec<Constraint> = Vec::new();
    for c in constraints {
        let (coef, r) = split_linear(&c.poly, var_idx);
        let strict = c.rel == Rel::Gt;
        if coef.is_zero() {
            rest.push(c.clone());
        } else if coef.is_positive() {
            // x >= -r/coef (bound poly: -r/coef)
            lowers.push((r.scale(&(-Q::one() / coef)), strict));
        } else {
            // x <= -r/coef
            uppers.push((r.scale(&(-Q::one() / coef.clone())), strict));
        }
    }
    for (lo, ls) in &lowers {
        for (hi, us) in &uppers {
            // hi - lo >= 0 (strict if either side strict)
            let p = hi - lo;
            let rel = if *ls || *us { Rel::Gt } else { Rel::Ge };
            rest.push(Constraint::new(p, rel));
        }
    }
    Some(rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{from_term, VarOrder};
    use crate::syntax::{parse_term, Var};
    use std::sync::Arc;

    fn ord() -> Arc<VarOrder> {
        VarOrder::new(vec![Var::from("x"), Var::from("y")])
    }

    fn c(src: &str, rel: Rel, o: &Arc<VarOrder>) -> Constraint {
        Constraint::new(from_term(&parse_term(src).unwrap(), o), rel)
    }

    #[test]
    fn refutes_contradictory_linear_bounds() {
        let o = ord();
        // x - 1 > 0 and 1 - x >= 0
        let cs = vec![c("x - 1", Rel::Gt, &o), c("1 - x", Rel::Ge, &o)];
        assert!(farkas_refutes(&cs));
    }

    #[test]
    fn does_not_refute_satisfiable() {
        let o = ord();
        let cs = vec![c("x - 1", Rel::Ge, &o), c("y - x", Rel::Ge, &o)];
        assert!(!farkas_refutes(&cs));
    }

    #[test]
    fn refutes_squared_gap() {
        let o = ord();
        // x^2 + y^2 > 1/4 and 1/4 - x^2 - y^2 > 0
        let cs = vec![c("x^2 + y^2 - 1/4", Rel::Gt, &o), c("1/4 - x^2 - y^2", Rel::Gt, &o)];
        assert!(farkas_refutes(&cs));
    }

    #[test]
    fn fm_eliminates_between_bounds() {
        let o = ord();
        // exists x: x >= y and 1 - x >= 0  =>  1 - y >= 0
        let cs = vec![c("x - y", Rel::Ge, &o), c("1 - x", Rel::Ge, &o)];
        let out = eliminate_linear_var(&cs, 0).unwrap();
        assert_eq!(out.len(), 1);
        let t = crate::poly::to_term(&out[0].poly);
        assert_eq!(t.to_string(), "1 + -y");
    }

    #[test]
    fn fm_uses_equality_substitution() {
        let o = ord();
        // x = 2y, x - 1 >= 0 => 2y - 1 >= 0
        let cs = vec![c("x - 2*y", Rel::Eq, &o), c("x - 1", Rel::Ge, &o)];
        let out = eliminate_linear_var(&cs, 0).unwrap();
        assert_eq!(out.len(), 1);
        assert!(!farkas_refutes(&out));
        // adding y <= 0 makes it infeasible
        let mut sys = out;
        sys.push(c("-y", Rel::Ge, &o));
        assert!(farkas_refutes(&sys));
    }

    #[test]
    fn nonlinear_occurrence_blocks_elimination() {
        let o = ord();
        let cs = vec![c("x^2 - y", Rel::Ge, &o)];
        assert!(eliminate_linear_var(&cs, 0).is_none());
    }
}
