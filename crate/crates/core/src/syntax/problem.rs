//! Problem files: named verification problems with declarations, an ODE, a
//! goal, and optional hints for the automation.

use std::sync::Arc;

use super::ast::{Formula, ODESystem, Term, Var};
use super::parser::{ParseError, Parser, Tok};
use super::subst::{formula_free_vars, term_free_vars};
use crate::poly::VarOrder;
use crate::Q;

/// Proof goal of a problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Diamond(Formula),
    Box(Formula),
    ExistsGlobally,
}

/// Per-cluster existence hint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClusterHint {
    /// `hint cluster {x, y} bounded <formula>`
    BoundedSet { vars: Vec<Var>, set: Formula },
    /// `hint cluster {x} deriv L = <term> M = <term>`
    DerivBound { vars: Vec<Var>, l: Term, m: Term },
    /// `hint cluster {x} norm <term>`
    NormBound { vars: Vec<Var>, p: Term },
}

impl ClusterHint {
    pub fn vars(&self) -> &[Var] {
        match self {
            ClusterHint::BoundedSet { vars, .. }
            | ClusterHint::DerivBound { vars, .. }
            | ClusterHint::NormBound { vars, .. } => vars,
        }
    }
}

/// Rejection-sampling box for the falsifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBox {
    pub ranges: Vec<(Var, Q, Q)>,
}

/// Staging-set hint for the automation (`hint staging <formula> p := <term>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagingHint {
    pub set: Formula,
    pub variant: Term,
    pub eps: Option<Term>,
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub vars: Vec<Var>,
    pub params: Vec<Var>,
    pub assumes: Vec<Formula>,
    pub ode: ODESystem,
    pub goal: Goal,
    pub cluster_hints: Vec<ClusterHint>,
    pub staging_hints: Vec<StagingHint>,
    pub sample_box: Option<SampleBox>,
}

impl Problem {
    /// Declaration-order polynomial variable order: state variables first,
    /// then parameters.
    pub fn var_order(&self) -> Arc<VarOrder> {
        let mut vars = self.vars.clone();
        vars.extend(self.params.iter().cloned());
        VarOrder::new(vars)
    }

    pub fn declared(&self) -> Vec<Var> {
        let mut vs = self.vars.clone();
        vs.extend(self.params.iter().cloned());
        vs
    }
}

fn check_declared(
    free: impl IntoIterator<Item = Var>,
    declared: &[Var],
    what: &str,
) -> Result<(), ParseError> {
    for v in free {
        if !declared.contains(&v) {
            return Err(ParseError {
                line: 0,
                col: 0,
                msg: format!("undeclared variable {} in {}", v, what),
            });
        }
    }
    Ok(())
}

/// Parses a problem file (UTF-8, `#` line comments).
pub fn parse_problem(src: &str) -> Result<Problem, ParseError> {
    let mut p = Parser::new(src)?;

    p.expect(Tok::Ident("problem".into()), "'problem'")?;
    let name = match p.next() {
        Tok::Str(s) => s,
        _ => return p.err("expected problem name string"),
    };

    let mut vars: Vec<Var> = Vec::new();
    let mut params: Vec<Var> = Vec::new();
    let mut assumes = Vec::new();
    let mut ode: Option<ODESystem> = None;
    let mut goal: Option<Goal> = None;
    let mut cluster_hints = Vec::new();
    let mut staging_hints = Vec::new();
    let mut sample_box: Option<SampleBox> = None;

    loop {
        if p.at_eof() {
            break;
        }
        if p.eat_ident("vars") {
            loop {
                vars.push(Var::from(p.expect_ident()?));
                if *p.peek() == Tok::Comma {
                    p.next();
                    continue;
                }
                break;
            }
        } else if p.eat_ident("params") {
            loop {
                params.push(Var::from(p.expect_ident()?));
                if *p.peek() == Tok::Comma {
                    p.next();
                    continue;
                }
                break;
            }
        } else if p.eat_ident("assume") {
            assumes.push(p.formula()?);
        } else if p.eat_ident("ode") {
            let system = p.braced_ode()?;
            // domain may follow the closing brace: `ode { ... } & Q`
            let system = if *p.peek() == Tok::And {
                p.next();
                let q = p.formula()?;
                if *system.domain() != Formula::True {
                    return p.err("domain constraint given both inside and after braces");
                }
                system.with_domain(q)
            } else {
                system
            };
            if ode.is_some() {
                return p.err("duplicate ode declaration");
            }
            ode = Some(system);
        } else if p.eat_ident("goal") {
            if goal.is_some() {
                return p.err("duplicate goal declaration");
            }
            if p.eat_ident("diamond") {
                goal = Some(Goal::Diamond(p.formula()?));
            } else if p.eat_ident("box") {
                goal = Some(Goal::Box(p.formula()?));
            } else if p.eat_ident("exists") {
                p.expect(Tok::Minus, "'-' in exists-globally")?;
                if !p.eat_ident("globally") {
                    return p.err("expected 'globally'");
                }
                goal = Some(Goal::ExistsGlobally);
            } else {
                return p.err("expected 'diamond', 'box' or 'exists-globally'");
            }
        } else if p.eat_ident("hint") {
            if p.eat_ident("cluster") {
                p.expect(Tok::LBrace, "'{'")?;
                let mut cvars = Vec::new();
                loop {
                    cvars.push(Var::from(p.expect_ident()?));
                    if *p.peek() == Tok::Comma {
                        p.next();
                        continue;
                    }
                    break;
                }
                p.expect(Tok::RBrace, "'}'")?;
                if p.eat_ident("bounded") {
                    let set = p.formula()?;
                    cluster_hints.push(ClusterHint::BoundedSet { vars: cvars, set });
                } else if p.eat_ident("deriv") {
                    if !p.eat_ident("L") {
                        return p.err("expected 'L'");
                    }
                    p.expect(Tok::Eq, "'='")?;
                    let l = p.term()?;
                    if !p.eat_ident("M") {
                        return p.err("expected 'M'");
                    }
                    p.expect(Tok::Eq, "'='")?;
                    let m = p.term()?;
                    cluster_hints.push(ClusterHint::DerivBound { vars: cvars, l, m });
                } else if p.eat_ident("norm") {
                    let bound = p.term()?;
                    cluster_hints.push(ClusterHint::NormBound { vars: cvars, p: bound });
                } else {
                    return p.err("expected 'bounded', 'deriv' or 'norm'");
                }
            } else if p.eat_ident("staging") {
                let set = p.formula()?;
                if !p.eat_ident("p") {
                    return p.err("expected 'p := <term>' in staging hint");
                }
                p.expect(Tok::Assign, "':='")?;
                let variant = p.term()?;
                let eps = if p.eat_ident("eps") {
                    p.expect(Tok::Assign, "':='")?;
                    Some(p.term()?)
                } else {
                    None
                };
                staging_hints.push(StagingHint { set, variant, eps });
            } else {
                return p.err("expected 'cluster' or 'staging'");
            }
        } else if p.eat_ident("sample") {
            p.expect(Tok::Minus, "'-' in sample-box")?;
            if !p.eat_ident("box") {
                return p.err("expected 'box'");
            }
            let mut ranges = Vec::new();
            loop {
                let v = Var::from(p.expect_ident()?);
                if !p.eat_ident("in") {
                    return p.err("expected 'in'");
                }
                p.expect(Tok::LBracket, "'['")?;
                let lo = signed_rat(&mut p)?;
                p.expect(Tok::Comma, "','")?;
                let hi = signed_rat(&mut p)?;
                p.expect(Tok::RBracket, "']'")?;
                ranges.push((v, lo, hi));
                if *p.peek() == Tok::Comma {
                    p.next();
                    continue;
                }
                break;
            }
            sample_box = Some(SampleBox { ranges });
        } else {
            return p.err("expected a problem statement (vars/params/assume/ode/goal/hint/sample-box)");
        }
    }

    let Some(ode) = ode else {
        return p.err("problem has no ode declaration");
    };
    let Some(goal) = goal else {
        return p.err("problem has no goal declaration");
    };

    let declared: Vec<Var> = vars.iter().chain(params.iter()).cloned().collect();
    for (v, rhs) in ode.equations() {
        if !vars.contains(v) {
            return Err(ParseError {
                line: 0,
                col: 0,
                msg: format!("ODE drives undeclared state variable {}", v),
            });
        }
        check_declared(term_free_vars(rhs), &declared, "ODE right-hand side")?;
    }
    check_declared(formula_free_vars(ode.domain()), &declared, "domain constraint")?;
    for a in &assumes {
        check_declared(formula_free_vars(a), &declared, "assumption")?;
    }
    match &goal {
        Goal::Diamond(f) | Goal::Box(f) => {
            check_declared(formula_free_vars(f), &declared, "goal")?
        }
        Goal::ExistsGlobally => {}
    }

    Ok(Problem {
        name,
        vars,
        params,
        assumes,
        ode,
        goal,
        cluster_hints,
        staging_hints,
        sample_box,
    })
}

fn signed_rat(p: &mut Parser) -> Result<Q, ParseError> {
    let neg = if *p.peek() == Tok::Minus {
        p.next();
        true
    } else {
        false
    };
    let t = p.term()?;
    match t {
        Term::Const(q) => Ok(if neg { -q } else { q }),
        _ => p.err("expected rational constant"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_problem() {
        let src = r#"
# linear liveness, example usage
problem "ex4"
vars u, v
assume u^2 + v^2 = 1
ode { u' = -v - u, v' = u - v }
goal diamond (1/16 <= u^2 | 1/16 <= v^2) & u^2 <= 1/4 & v^2 <= 1/4
sample-box u in [-2, 2], v in [-2, 2]
"#;
        let prob = parse_problem(src).unwrap();
        assert_eq!(prob.name, "ex4");
        assert_eq!(prob.vars.len(), 2);
        assert_eq!(prob.assumes.len(), 1);
        assert!(matches!(prob.goal, Goal::Diamond(_)));
        assert!(prob.sample_box.is_some());
    }

    #[test]
    fn parse_exists_globally_with_hints() {
        let src = r#"
problem "trapped"
vars u, v
ode { u' = -v - u*(1/4 - u^2 - v^2), v' = u - v*(1/4 - u^2 - v^2) }
assume u^2 + v^2 <= 1/4
goal exists-globally
hint cluster {u, v} bounded u^2 + v^2 <= 1/4
"#;
        let prob = parse_problem(src).unwrap();
        assert_eq!(prob.goal, Goal::ExistsGlobally);
        assert_eq!(prob.cluster_hints.len(), 1);
    }

    #[test]
    fn undeclared_variable_rejected() {
        let src = r#"
problem "bad"
vars u
ode { u' = w }
goal exists-globally
"#;
        assert!(parse_problem(src).is_err());
    }

    #[test]
    fn domain_after_braces() {
        let src = r#"
problem "dom"
vars u
ode { u' = 1 } & u <= 1
goal diamond u >= 0
"#;
        let prob = parse_problem(src).unwrap();
        assert_ne!(*prob.ode.domain(), Formula::True);
    }
}
