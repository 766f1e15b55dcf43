//! Variable analyses and capture-avoiding substitution.

use std::collections::BTreeSet;

use super::ast::{Formula, ODESystem, Term, Var};

/// Free variables of a term.
pub fn term_free_vars(t: &Term) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_term(t, &mut out);
    out
}

fn collect_term(t: &Term, out: &mut BTreeSet<Var>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Const(_) => {}
        Term::Add(a, b) | Term::Mul(a, b) => {
            collect_term(a, out);
            collect_term(b, out);
        }
    }
}

/// Free variables of a formula. Quantifier binders are excluded; ODE
/// variables count as free (they are both read and written by the dynamics).
pub fn formula_free_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_formula(f, &mut BTreeSet::new(), &mut out);
    out
}

fn collect_formula(f: &Formula, bound: &mut BTreeSet<Var>, out: &mut BTreeSet<Var>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Cmp(a, _, b) => {
            for v in term_free_vars(a).union(&term_free_vars(b)) {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            collect_formula(a, bound, out);
            collect_formula(b, bound, out);
        }
        Formula::Not(a) => collect_formula(a, bound, out),
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            let fresh = bound.insert(v.clone());
            collect_formula(a, bound, out);
            if fresh {
                bound.remove(v);
            }
        }
        Formula::Box(ode, a) | Formula::Diamond(ode, a) => {
            for (v, rhs) in ode.equations() {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
                for w in term_free_vars(rhs) {
                    if !bound.contains(&w) {
                        out.insert(w);
                    }
                }
            }
            collect_formula(ode.domain(), bound, out);
            collect_formula(a, bound, out);
        }
    }
}

/// All variables occurring anywhere (free, bound, ODE) — freshness pool.
pub fn all_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    all_vars_into(f, &mut out);
    out
}

fn all_vars_into(f: &Formula, out: &mut BTreeSet<Var>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Cmp(a, _, b) => {
            collect_term(a, out);
            collect_term(b, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            all_vars_into(a, out);
            all_vars_into(b, out);
        }
        Formula::Not(a) => all_vars_into(a, out),
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            out.insert(v.clone());
            all_vars_into(a, out);
        }
        Formula::Box(ode, a) | Formula::Diamond(ode, a) => {
            for (v, rhs) in ode.equations() {
                out.insert(v.clone());
                collect_term(rhs, out);
            }
            all_vars_into(ode.domain(), out);
            all_vars_into(a, out);
        }
    }
}

/// True iff the formula/term mentions no variable written by the ODE, so its
/// truth value stays constant along solutions.
pub fn is_constant_for(free: &BTreeSet<Var>, ode: &ODESystem) -> bool {
    ode.equations().iter().all(|(v, _)| !free.contains(v))
}

/// Returns `base` if unused, otherwise `base0`, `base1`, ... with the
/// smallest unused numeric suffix.
pub fn fresh_var(base: &str, avoid: &BTreeSet<Var>) -> Var {
    let direct = Var::from(base);
    if !avoid.contains(&direct) {
        return direct;
    }
    for i in 0.. {
        let v = Var::from(format!("{}{}", base, i));
        if !avoid.contains(&v) {
            return v;
        }
    }
    unreachable!()
}

/// Substitutes `t` for `v` in a term.
pub fn substitute_term(body: &Term, v: &Var, t: &Term) -> Term {
    match body {
        Term::Var(w) => {
            if w == v {
                t.clone()
            } else {
                body.clone()
            }
        }
        Term::Const(_) => body.clone(),
        Term::Add(a, b) => Term::add(substitute_term(a, v, t), substitute_term(b, v, t)),
        Term::Mul(a, b) => Term::mul(substitute_term(a, v, t), substitute_term(b, v, t)),
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SubstError {
    #[error("cannot substitute for {0}: it is driven by an ODE in the formula")]
    OdeBound(Var),
    #[error("substitution would be captured by ODE variable {0}")]
    OdeCapture(Var),
}

/// Capture-avoiding substitution of `t` for `v`. Quantifier capture is
/// resolved by alpha-renaming the binder; ODE variables cannot be renamed, so
/// those cases are rejected.
pub fn substitute_formula(f: &Formula, v: &Var, t: &Term) -> Result<Formula, SubstError> {
    let t_vars = term_free_vars(t);
    subst(f, v, t, &t_vars)
}

fn subst(f: &Formula, v: &Var, t: &Term, t_vars: &BTreeSet<Var>) -> Result<Formula, SubstError> {
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Cmp(a, op, b) => {
            Formula::Cmp(substitute_term(a, v, t), *op, substitute_term(b, v, t))
        }
        Formula::And(a, b) => Formula::and(subst(a, v, t, t_vars)?, subst(b, v, t, t_vars)?),
        Formula::Or(a, b) => Formula::or(subst(a, v, t, t_vars)?, subst(b, v, t, t_vars)?),
        Formula::Imply(a, b) => Formula::imply(subst(a, v, t, t_vars)?, subst(b, v, t, t_vars)?),
        Formula::Equiv(a, b) => {
            Formula::Equiv(Box::new(subst(a, v, t, t_vars)?), Box::new(subst(b, v, t, t_vars)?))
        }
        Formula::Not(a) => Formula::not(subst(a, v, t, t_vars)?),
        Formula::Forall(w, a) | Formula::Exists(w, a) => {
            let forall = matches!(f, Formula::Forall(..));
            if w == v {
                // v is shadowed here
                return Ok(f.clone());
            }
            let (w2, body) = if t_vars.contains(w) {
                // rename the binder away from the substituted term
                let mut avoid = all_vars(a);
                avoid.extend(t_vars.iter().cloned());
                avoid.insert(v.clone());
                let fresh = fresh_var(w.as_str(), &avoid);
                let renamed = subst(a, w, &Term::Var(fresh.clone()), &BTreeSet::new())?;
                (fresh, renamed)
            } else {
                (w.clone(), (**a).clone())
            };
            let inner = subst(&body, v, t, t_vars)?;
            if forall {
                Formula::forall(w2, inner)
            } else {
                Formula::exists(w2, inner)
            }
        }
        Formula::Box(ode, a) | Formula::Diamond(ode, a) => {
            let is_box = matches!(f, Formula::Box(..));
            let lhs = ode.lhs_vars();
            if lhs.contains(v) {
                return Err(SubstError::OdeBound(v.clone()));
            }
            if let Some(captured) = lhs.iter().find(|w| t_vars.contains(w)) {
                // Only an issue if v actually occurs under this modality.
                if occurs(f, v) {
                    return Err(SubstError::OdeCapture(captured.clone()));
                }
                return Ok(f.clone());
            }
            let eqs = ode
                .equations()
                .iter()
                .map(|(w, rhs)| (w.clone(), substitute_term(rhs, v, t)))
                .collect();
            let dom = subst(ode.domain(), v, t, t_vars)?;
            let inner = subst(a, v, t, t_vars)?;
            let new_ode = ODESystem::new(eqs, dom);
            if is_box {
                Formula::boxm(new_ode, inner)
            } else {
                Formula::diamond(new_ode, inner)
            }
        }
    })
}

fn occurs(f: &Formula, v: &Var) -> bool {
    formula_free_vars(f).contains(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term, print_formula};

    #[test]
    fn constant_for_parameter() {
        let ode = crate::syntax::parse_ode("u' = -v - u, v' = u - v").unwrap();
        let eps = term_free_vars(&parse_term("eps").unwrap());
        assert!(is_constant_for(&eps, &ode));
        let s = term_free_vars(&parse_term("u^2 + v^2").unwrap());
        assert!(!is_constant_for(&s, &ode));
    }

    #[test]
    fn binder_excluded_from_free_vars() {
        let f = parse_formula("forall z ((x - z)^2 < eps^2 -> z > 0)").unwrap();
        let fv = formula_free_vars(&f);
        assert!(fv.contains(&Var::from("x")));
        assert!(fv.contains(&Var::from("eps")));
        assert!(!fv.contains(&Var::from("z")));
    }

    #[test]
    fn fresh_var_suffixes() {
        let mut avoid = BTreeSet::new();
        avoid.insert(Var::from("t"));
        assert_eq!(fresh_var("t", &avoid), Var::from("t0"));
        avoid.insert(Var::from("t0"));
        assert_eq!(fresh_var("t", &avoid), Var::from("t1"));
        assert_eq!(fresh_var("s", &avoid), Var::from("s"));
    }

    #[test]
    fn substitution_avoids_quantifier_capture() {
        // substituting x := t + 1 under `forall t` must rename the binder
        let f = parse_formula("forall t (x > t)").unwrap();
        let t = parse_term("t + 1").unwrap();
        let g = substitute_formula(&f, &Var::from("x"), &t).unwrap();
        let printed = print_formula(&g);
        assert!(printed.starts_with("forall t0"), "got {}", printed);
        assert!(printed.contains("t + 1 > t0"), "got {}", printed);
    }

    #[test]
    fn substitution_in_diamond_postcondition() {
        let f = parse_formula("<{t' = 1}> t > tau").unwrap();
        let rep = parse_term("-i*p0").unwrap();
        let g = substitute_formula(&f, &Var::from("tau"), &rep).unwrap();
        assert_eq!(g, parse_formula("<{t' = 1}> t > -i*p0").unwrap());
    }

    #[test]
    fn substitution_for_ode_variable_rejected() {
        let f = parse_formula("[{u' = u}] u > 0").unwrap();
        let rep = parse_term("1").unwrap();
        assert!(substitute_formula(&f, &Var::from("u"), &rep).is_err());
    }
}
