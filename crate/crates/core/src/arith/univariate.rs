//! Exact decision machinery for univariate polynomial arithmetic: Sturm
//! chains, real-root isolation, sign-invariant cell decomposition, and truth
//! evaluation of quantifier-free univariate formulas.

use num_traits::{One, Signed, Zero};

use crate::arith::linear::Rel;
use crate::Q;

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly1 {
    pub coeffs: Vec<Q>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().map(Zero::is_zero).unwrap_or(false) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * Q::from_integer(i.into()))
            .collect();
        Poly1::new(coeffs)
    }

    fn scale(&self, s: &Q) -> Poly1 {
        Poly1::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    fn sub(&self, other: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Q::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] = c.clone();
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] = coeffs[i].clone() - c.clone();
        }
        Poly1::new(coeffs)
    }

    fn mul_xk(&self, k: usize) -> Poly1 {
        if self.is_zero() {
            return Poly1::zero();
        }
        let mut coeffs = vec![Q::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly1::new(coeffs)
    }

    /// Euclidean remainder.
    fn rem(&self, div: &Poly1) -> Poly1 {
        assert!(!div.is_zero());
        let mut r = self.clone();
        while !r.is_zero() && r.degree() >= div.degree() {
            let k = r.degree() - div.degree();
            let f = r.lead() / div.lead();
            r = r.sub(&div.scale(&f).mul_xk(k));
        }
        r
    }

    pub fn gcd(&self, other: &Poly1) -> Poly1 {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let lead = a.lead();
            a.scale(&(Q::one() / lead))
        }
    }

    /// Square-free part `p / gcd(p, p')`.
    pub fn square_free(&self) -> Poly1 {
        if self.is_zero() || self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_exact(&g)
    }

    fn div_exact(&self, div: &Poly1) -> Poly1 {
        let mut r = self.clone();
        let mut q = vec![Q::zero(); self.coeffs.len()];
        while !r.is_zero() && r.degree() >= div.degree() {
            let k = r.degree() - div.degree();
            let f = r.lead() / div.lead();
            q[k] = f.clone();
            r = r.sub(&div.scale(&f).mul_xk(k));
        }
        Poly1::new(q)
    }

    /// Cauchy root bound: all real roots lie in (-B, B).
    pub fn root_bound(&self) -> Q {
        if self.coeffs.len() <= 1 {
            return Q::one();
        }
        let lead = self.lead();
        let mut max = Q::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = (c.clone() / lead.clone()).abs();
            if r > max {
                max = r;
            }
        }
        max + Q::one()
    }
}

fn sturm_chain(p: &Poly1) -> Vec<Poly1> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            return chain;
        }
        let r = chain[n - 2].rem(&chain[n - 1]);
        if r.is_zero() {
            return chain;
        }
        let mut neg = r;
        neg = neg.scale(&-Q::one());
        chain.push(neg);
    }
}

fn sign_variations(chain: &[Poly1], x: &Q) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None; // sign positive?
    for p in chain {
        let v = p.eval(x);
        if v.is_zero() {
            continue;
        }
        let pos = v.is_positive();
        if let Some(l) = last {
            if l != pos {
                count += 1;
            }
        }
        last = Some(pos);
    }
    count
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
/// Requires a square-free polynomial.
pub fn roots_in(chain: &[Poly1], a: &Q, b: &Q) -> usize {
    sign_variations(chain, a) - sign_variations(chain, b)
}

/// An isolated real root: either exactly rational or confined to an open
/// interval with rational endpoints containing exactly one root.
#[derive(Debug, Clone, PartialEq)]
pub enum RootLoc {
    Rational(Q),
    Interval(Q, Q),
}

impl RootLoc {
    pub fn lo(&self) -> Q {
        match self {
            RootLoc::Rational(q) => q.clone(),
            RootLoc::Interval(a, _) => a.clone(),
        }
    }

    pub fn hi(&self) -> Q {
        match self {
            RootLoc::Rational(q) => q.clone(),
            RootLoc::Interval(_, b) => b.clone(),
        }
    }
}

/// Isolates all real roots of `p` into disjoint, sorted locations. Rational
/// roots are reported exactly; interval locations contain their root strictly
/// inside, with non-root endpoints.
pub fn isolate_roots(p: &Poly1) -> Vec<RootLoc> {
    if p.is_zero() || p.degree() == 0 {
        return Vec::new();
    }
    let sf = p.square_free();
    let chain = sturm_chain(&sf);
    let bound = sf.root_bound();
    let mut out = Vec::new();
    let total = roots_in(&chain, &-bound.clone(), &bound);
    if total == 0 {
        return out;
    }
    // bisection over half-open intervals (a, b]
    let mut stack = vec![(-bound.clone(), bound.clone(), total)];
    while let Some((a, b, k)) = stack.pop() {
        if k == 0 {
            continue;
        }
        if k == 1 {
            out.push(refine_single(&sf, &chain, a, b));
            continue;
        }
        let mid = (a.clone() + b.clone()) / Q::from_integer(2.into());
        let left = roots_in(&chain, &a, &mid);
        stack.push((a, mid.clone(), left));
        stack.push((mid, b, k - left));
    }
    out.sort_by(|x, y| x.lo().partial_cmp(&y.lo()).unwrap());
    out
}

fn refine_single(sf: &Poly1, chain: &[Poly1], mut a: Q, mut b: Q) -> RootLoc {
    // the single root lies in (a, b]
    if sf.eval(&b).is_zero() {
        return RootLoc::Rational(b);
    }
    for _ in 0..8 {
        let mid = (a.clone() + b.clone()) / Q::from_integer(2.into());
        let v = sf.eval(&mid);
        if v.is_zero() {
            return RootLoc::Rational(mid);
        }
        if roots_in(chain, &a, &mid) == 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    RootLoc::Interval(a, b)
}

/// Narrows a root location below a target width.
pub fn refine_to(p: &Poly1, loc: &RootLoc, width: &Q) -> RootLoc {
    match loc {
        RootLoc::Rational(_) => loc.clone(),
        RootLoc::Interval(a0, b0) => {
            let sf = p.square_free();
            let chain = sturm_chain(&sf);
            let (mut a, mut b) = (a0.clone(), b0.clone());
            while &(b.clone() - a.clone()) > width {
                let mid = (a.clone() + b.clone()) / Q::from_integer(2.into());
                if sf.eval(&mid).is_zero() {
                    return RootLoc::Rational(mid);
                }
                if roots_in(&chain, &a, &mid) == 1 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            RootLoc::Interval(a, b)
        }
    }
}

/// Sign of `p` at an isolated root of `q` (`q` square-free, root confined to
/// `loc`). Exact: detects a shared root via the gcd.
pub fn sign_at_root(p: &Poly1, q: &Poly1, loc: &RootLoc) -> i8 {
    match loc {
        RootLoc::Rational(r) => {
            let v = p.eval(r);
            if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            }
        }
        RootLoc::Interval(a, b) => {
            let g = p.gcd(q);
            if g.degree() >= 1 {
                let chain = sturm_chain(&g);
                if roots_in(&chain, a, b) > 0 {
                    return 0;
                }
            }
            // p has constant sign on a small enough neighborhood; shrink the
            // interval until p has no root inside, then sample an endpoint
            let chain_p = sturm_chain(&p.square_free());
            let chain_q = sturm_chain(q);
            let (mut lo, mut hi) = (a.clone(), b.clone());
            loop {
                if p.eval(&lo).is_zero() || p.eval(&hi).is_zero() || roots_in(&chain_p, &lo, &hi) > 0
                {
                    let mid = (lo.clone() + hi.clone()) / Q::from_integer(2.into());
                    if q.eval(&mid).is_zero() {
                        // the root of q is exactly mid
                        let v = p.eval(&mid);
                        return if v.is_zero() {
                            0
                        } else if v.is_positive() {
                            1
                        } else {
                            -1
                        };
                    }
                    if roots_in(&chain_q, &lo, &mid) == 1 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    continue;
                }
                let v = p.eval(&lo);
                return if v.is_positive() { 1 } else { -1 };
            }
        }
    }
}

/// One cell of the sign-invariant decomposition of the real line.
#[derive(Debug, Clone)]
pub enum Cell {
    /// Open interval with a rational sample point.
    Interval { sample: Q },
    /// A root of one of the decomposition polynomials.
    Point { poly: Poly1, loc: RootLoc },
}

impl Cell {
    /// Rational sample when the cell admits one.
    pub fn rational_sample(&self) -> Option<Q> {
        match self {
            Cell::Interval { sample } => Some(sample.clone()),
            Cell::Point { loc: RootLoc::Rational(q), .. } => Some(q.clone()),
            Cell::Point { .. } => None,
        }
    }

    /// Sign of `p` on this cell.
    pub fn sign(&self, p: &Poly1) -> i8 {
        match self {
            Cell::Interval { sample } => {
                let v = p.eval(sample);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Cell::Point { poly, loc } => sign_at_root(p, poly, loc),
        }
    }
}

/// Decomposes the line into sign-invariant cells for a set of polynomials:
/// all isolated roots, and open intervals between them.
pub fn decompose(polys: &[Poly1]) -> Vec<Cell> {
    let mut roots: Vec<(Poly1, RootLoc)> = Vec::new();
    for p in polys {
        if p.is_zero() || p.degree() == 0 {
            continue;
        }
        let sf = p.square_free();
        for loc in isolate_roots(&sf) {
            roots.push((sf.clone(), loc));
        }
    }
    // sort and separate overlapping isolating intervals
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                let (a1, b1) = (roots[i].1.lo(), roots[i].1.hi());
                let (a2, b2) = (roots[j].1.lo(), roots[j].1.hi());
                let overlap = a1 <= b2 && a2 <= b1;
                if overlap && !same_root(&roots[i], &roots[j]) {
                    let w1 = b1 - a1;
                    let w2 = b2.clone() - a2.clone();
                    let halfw = smallest_positive(&[w1, w2, Q::new(1.into(), 16.into())])
                        / Q::from_integer(4.into());
                    let p1 = roots[i].0.clone();
                    roots[i].1 = refine_to(&p1, &roots[i].1, &halfw);
                    let p2 = roots[j].0.clone();
                    roots[j].1 = refine_to(&p2, &roots[j].1, &halfw);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    // dedupe equal roots
    let mut uniq: Vec<(Poly1, RootLoc)> = Vec::new();
    for r in roots {
        if !uniq.iter().any(|u| same_root(u, &r)) {
            uniq.push(r);
        }
    }
    uniq.sort_by(|x, y| x.1.lo().partial_cmp(&y.1.lo()).unwrap());

    let mut cells = Vec::new();
    if uniq.is_empty() {
        cells.push(Cell::Interval { sample: Q::zero() });
        return cells;
    }
    let first_lo = uniq[0].1.lo();
    cells.push(Cell::Interval { sample: first_lo - Q::one() });
    for i in 0..uniq.len() {
        cells.push(Cell::Point { poly: uniq[i].0.clone(), loc: uniq[i].1.clone() });
        let hi = uniq[i].1.hi();
        let next_lo = if i + 1 < uniq.len() {
            Some(uniq[i + 1].1.lo())
        } else {
            None
        };
        match next_lo {
            Some(nl) => {
                let sample = (hi.clone() + nl) / Q::from_integer(2.into());
                cells.push(Cell::Interval { sample });
            }
            None => cells.push(Cell::Interval { sample: hi + Q::one() }),
        }
    }
    cells
}

fn smallest_positive(qs: &[Q]) -> Q {
    let mut best: Option<Q> = None;
    for q in qs {
        if q.is_positive() && best.as_ref().map(|b| q < b).unwrap_or(true) {
            best = Some(q.clone());
        }
    }
    best.unwrap_or_else(Q::one)
}

fn same_root(a: &(Poly1, RootLoc), b: &(Poly1, RootLoc)) -> bool {
    match (&a.1, &b.1) {
        (RootLoc::Rational(x), RootLoc::Rational(y)) => x == y,
        (RootLoc::Rational(x), RootLoc::Interval(lo, hi)) => {
            lo < x && x < hi && b.0.eval(x).is_zero()
        }
        (RootLoc::Interval(lo, hi), RootLoc::Rational(x)) => {
            lo < x && x < hi && a.0.eval(x).is_zero()
        }
        (RootLoc::Interval(a1, b1), RootLoc::Interval(a2, b2)) => {
            // same root iff the gcd has a root in the intersection
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo >= hi {
                return false;
            }
            let g = a.0.gcd(&b.0);
            if g.degree() == 0 {
                return false;
            }
            let chain = sturm_chain(&g);
            roots_in(&chain, lo, hi) > 0
        }
    }
}

/// Decision outcome for a univariate constraint system.
pub enum UniSat {
    Unsat,
    Sat { rational_witness: Option<Q> },
}

/// Decides a conjunction of univariate constraints exactly.
pub fn decide_conjunction(constraints: &[(Poly1, Rel)]) -> UniSat {
    let polys: Vec<Poly1> = constraints.iter().map(|(p, _)| p.clone()).collect();
    let cells = decompose(&polys);
    let mut witness: Option<Q> = None;
    let mut sat = false;
    for cell in &cells {
        let ok = constraints.iter().all(|(p, rel)| {
            let s = cell.sign(p);
            match rel {
                Rel::Ge => s >= 0,
                Rel::Gt => s > 0,
                Rel::Eq => s == 0,
            }
        });
        if ok {
            sat = true;
            if let Some(q) = cell.rational_sample() {
                witness = Some(q);
                break;
            }
        }
    }
    if sat {
        UniSat::Sat { rational_witness: witness }
    } else {
        UniSat::Unsat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> Poly1 {
        Poly1::new(coeffs.iter().map(|c| Q::from_integer((*c).into())).collect())
    }

    #[test]
    fn isolates_quartic_roots() {
        // x^4 - 5x^2 + 4 has roots -2, -1, 1, 2
        let f = p(&[4, 0, -5, 0, 1]);
        let roots = isolate_roots(&f);
        assert_eq!(roots.len(), 4);
        let expect = [-2i64, -1, 1, 2];
        for (r, e) in roots.iter().zip(expect) {
            let e = Q::from_integer(e.into());
            match r {
                RootLoc::Rational(q) => assert_eq!(*q, e),
                RootLoc::Interval(a, b) => assert!(*a < e && e < *b),
            }
        }
    }

    #[test]
    fn irrational_roots_isolated() {
        // x^2 - 2
        let f = p(&[-2, 0, 1]);
        let roots = isolate_roots(&f);
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn decide_simple_conjunctions() {
        // x > 0 and x < 1 is sat with a rational witness
        let sys = vec![(p(&[0, 1]), Rel::Gt), (p(&[1, -1]), Rel::Gt)];
        match decide_conjunction(&sys) {
            UniSat::Sat { rational_witness: Some(w) } => {
                assert!(w > Q::zero() && w < Q::one());
            }
            _ => panic!("expected sat with witness"),
        }
        // x^2 < 0 is unsat
        let sys = vec![(p(&[0, 0, -1]), Rel::Gt)];
        assert!(matches!(decide_conjunction(&sys), UniSat::Unsat));
        // x^2 - 2 = 0 and x > 0 is sat but has no rational witness
        let sys = vec![(p(&[-2, 0, 1]), Rel::Eq), (p(&[0, 1]), Rel::Gt)];
        match decide_conjunction(&sys) {
            UniSat::Sat { rational_witness } => assert!(rational_witness.is_none()),
            _ => panic!("expected sat"),
        }
    }

    #[test]
    fn sign_at_irrational_root() {
        // at x = sqrt(2): x - 1 > 0, x - 2 < 0
        let f = p(&[-2, 0, 1]);
        let roots = isolate_roots(&f);
        let upper = &roots[1];
        assert_eq!(sign_at_root(&p(&[-1, 1]), &f, upper), 1);
        assert_eq!(sign_at_root(&p(&[-2, 1]), &f, upper), -1);
        // x^2 - 2 itself is zero there
        assert_eq!(sign_at_root(&f, &f, upper), 0);
    }
}
