//! Nested Datalog: nested-query atoms as built-ins, free-variable analysis and
//! the ways of applying an outer substitution to a nested query.

mod move_down;
mod placement;

use std::collections::BTreeSet;

pub use move_down::{move_down, move_down_all, roots, MoveDown, MAX_RULES};
pub use placement::{place_substitution, Placement, PlacementPlan, SubstitutionPoint};

use crate::datalog::{Evaluator, NestedSemantics};
use crate::error::{Error, Result};
use crate::model::{Atom, Database, FreshNames, Literal, Mode, PredAtom, Program, Query, Rule, Substitution, Symbol};

/// Free variables of a single rule: variables occurring in a filter, or free in
/// a nested query of the rule, without occurring positively in the rule.
pub fn free_in_rule(rule: &Rule) -> BTreeSet<Symbol> {
    let positive = rule.positive_vars();
    let mut candidates = BTreeSet::new();
    for lit in &rule.body {
        match &lit.atom {
            Atom::Eq(..) => candidates.extend(lit.own_vars()),
            Atom::Nested(q) => candidates.extend(q.program.rules.iter().flat_map(free_in_rule)),
            _ => {}
        }
    }
    candidates.retain(|v| !positive.contains(v));
    candidates
}

/// Free variables of each rule of the query's program, in rule order.
pub fn free_variables(query: &Query) -> Vec<BTreeSet<Symbol>> {
    query.program.rules.iter().map(free_in_rule).collect()
}

/// Union of the free variables of all rules.
pub fn all_free_variables(query: &Query) -> BTreeSet<Symbol> {
    free_variables(query).into_iter().flatten().collect()
}

/// Adds `let(X = θ(X))` to every rule where `X` is free.
pub fn substitute_syntactic(theta: &Substitution, program: &Program) -> Program {
    let mut out = program.clone();
    for rule in &mut out.rules {
        for v in free_in_rule(rule) {
            if let Some(value) = theta.get(&v) {
                rule.body.push(Literal::let_(&v, value.clone()));
            }
        }
    }
    out
}

/// Goal variables bound by `theta`, with their values, in goal order.
fn goal_bindings(theta: &Substitution, query: &Query) -> Vec<Literal> {
    query.goal_vars().into_iter().filter_map(|v| theta.get(&v).map(|val| Literal::let_(&v, val.clone()))).collect()
}

fn wrapper_mode(query: &Query) -> Option<Mode> {
    query.program.is_modal().then_some(Mode::Diamond)
}

/// Replaces the goal `p(X̄)` by a fresh `q(X̄)` defined by
/// `q(X̄) <- p(X̄), let(X = θ(X)), …` for the goal variables bound by `theta`.
pub fn substitute_logical_topdown(theta: &Substitution, query: &Query) -> Query {
    let mut fresh = FreshNames::for_query(query);
    topdown_with(theta, query, &mut fresh).0
}

/// Top-down substitution; also returns the wrapper rule index, if one was added.
fn topdown_with(theta: &Substitution, query: &Query, fresh: &mut FreshNames) -> (Query, Option<usize>) {
    let lets = goal_bindings(theta, query);
    if lets.is_empty() {
        return (query.clone(), None);
    }
    let head = PredAtom::new(fresh.fresh(&query.goal.pred), query.goal.args.clone());
    let mut body = vec![Literal::pos(query.goal.clone())];
    body.extend(lets);
    let mut program = query.program.clone();
    program.rules.push(Rule { mode: wrapper_mode(query), head: head.clone(), body });
    let index = program.rules.len() - 1;
    (Query { goal: head, program }, Some(index))
}

/// Top-down substitution followed by `steps` move-down steps (all of them when `None`).
pub fn substitute_logical_partial(theta: &Substitution, query: &Query, steps: Option<usize>) -> Result<Query> {
    let mut fresh = FreshNames::for_query(query);
    let (q, wrapper) = topdown_with(theta, query, &mut fresh);
    let Some(w) = wrapper else { return Ok(q) };
    let lets: Vec<(usize, Symbol)> = q.program.rules[w]
        .body
        .iter()
        .filter_map(|l| match &l.atom {
            Atom::Let { target, .. } => target.as_var().map(|v| (w, v.clone())),
            _ => None,
        })
        .collect();
    let program = move_down_all(&q.program, lets, steps, &mut fresh)?;
    Ok(Query { goal: q.goal, program })
}

/// Top-down substitution with every let moved down to the leaves.
pub fn substitute_logical_bottomup(theta: &Substitution, query: &Query) -> Result<Query> {
    substitute_logical_partial(theta, query, None)
}

/// Splits rule `anchor` = `H <- B` into `H <- u(V̄)` and `u(V̄) <- B, let(X = θ(X))`
/// for each of `vars`, where `V̄` lists `vars` followed by the head variables.
pub fn substitute_improper(theta: &Substitution, query: &Query, anchor: usize, vars: &[Symbol]) -> Result<Query> {
    let rule = query.program.rules.get(anchor).ok_or(Error::NoSuchRule(anchor))?;
    let positive = rule.positive_vars();
    let mut lets = Vec::new();
    for v in vars {
        let value = theta.get(v).filter(|_| positive.contains(v));
        let value = value.ok_or_else(|| Error::VariableAbsent { variable: v.clone() })?;
        lets.push(Literal::let_(v, value.clone()));
    }
    let mut args: Vec<Symbol> = vars.to_vec();
    for v in rule.head.distinct_vars() {
        if !args.contains(&v) {
            args.push(v);
        }
    }
    let mut fresh = FreshNames::for_query(query);
    let u = PredAtom::with_vars(fresh.fresh("u"), &args);
    let upper = Rule { mode: rule.mode, head: rule.head.clone(), body: vec![Literal::pos(u.clone())] };
    let mut body = rule.body.clone();
    body.extend(lets);
    let lower = Rule { mode: rule.mode, head: u, body };
    let mut program = query.program.clone();
    program.rules[anchor] = upper;
    program.rules.push(lower);
    Ok(Query { goal: query.goal.clone(), program })
}

/// How an outer substitution is applied to a nested query.
///
/// Free variables are always substituted syntactically first; the strategy
/// decides how the goal variables are substituted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubstitutionStrategy {
    /// Only free variables are substituted.
    SyntacticOnly,
    TopDown,
    BottomUp,
    /// Top-down followed by the given number of move-down steps.
    PartialMoveDown(usize),
    /// Lets placed by the placement engine.
    AtPoints(Placement),
    /// Top-down for goal variables, plus an improper split of rule `anchor`
    /// for the bound variables that occur positively there but not in the goal.
    Improper {
        anchor: usize,
    },
}

impl SubstitutionStrategy {
    /// Parses `syntactic`, `top-down`, `bottom-up`, `partial=N`, `improper=R`
    /// or a placement (`points=…`, `leaves`, …).
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "syntactic" => SubstitutionStrategy::SyntacticOnly,
            "top-down" => SubstitutionStrategy::TopDown,
            "bottom-up" => SubstitutionStrategy::BottomUp,
            _ => {
                let number = |v: &str| v.parse::<usize>().map_err(|_| Error::InvalidStrategy(s.to_string()));
                if let Some(n) = s.strip_prefix("partial=") {
                    SubstitutionStrategy::PartialMoveDown(number(n)?)
                } else if let Some(n) = s.strip_prefix("improper=") {
                    SubstitutionStrategy::Improper { anchor: number(n)? }
                } else {
                    SubstitutionStrategy::AtPoints(Placement::parse(s)?)
                }
            }
        })
    }
}

impl NestedSemantics for SubstitutionStrategy {
    fn instantiate(&self, theta: &Substitution, nested: &Query) -> Result<Query> {
        let q = Query { goal: nested.goal.clone(), program: substitute_syntactic(theta, &nested.program) };
        match self {
            SubstitutionStrategy::SyntacticOnly => Ok(q),
            SubstitutionStrategy::TopDown => Ok(substitute_logical_topdown(theta, &q)),
            SubstitutionStrategy::BottomUp => substitute_logical_bottomup(theta, &q),
            SubstitutionStrategy::PartialMoveDown(k) => substitute_logical_partial(theta, &q, Some(*k)),
            SubstitutionStrategy::AtPoints(placement) => {
                let plan =
                    PlacementPlan { theta, placement, improper: BTreeSet::new(), wrapper_mode: wrapper_mode(&q) };
                place_substitution(&q, &plan, &mut FreshNames::for_query(&q))
            }
            SubstitutionStrategy::Improper { anchor } => {
                let goal: BTreeSet<Symbol> = q.goal_vars().into_iter().collect();
                let rule = q.program.rules.get(*anchor).ok_or(Error::NoSuchRule(*anchor))?;
                let vars: Vec<Symbol> =
                    rule.positive_vars().into_iter().filter(|v| !goal.contains(v) && theta.contains(v)).collect();
                let q = if vars.is_empty() { q } else { substitute_improper(theta, &q, *anchor, &vars)? };
                Ok(substitute_logical_topdown(theta, &q))
            }
        }
    }
}

/// Truth of the nested atom `nested` (negated unless `positive`) under `theta`.
pub fn eval_nested_atom(
    db: &Database,
    theta: &Substitution,
    nested: &Query,
    positive: bool,
    strategy: &dyn NestedSemantics,
) -> Result<bool> {
    let instantiated = strategy.instantiate(theta, nested)?;
    let nonempty = !Evaluator::new(db, strategy).answer(&instantiated)?.is_empty();
    Ok(nonempty == positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::answer_with;
    use crate::model::{Fact, Term, Value};

    fn atom(p: &str, vars: &[&str]) -> PredAtom {
        PredAtom::with_vars(p, vars)
    }

    fn c(s: &str) -> Value {
        Value::constant(s)
    }

    fn mail_db() -> Database {
        [("j", "m1"), ("j", "m2"), ("k", "m3")].iter().map(|(a, b)| Fact::parse_args("mail", &[a, b])).collect()
    }

    /// Persons with an email address other than the one in the answer.
    fn email_query() -> Query {
        let inner = Query::new(
            atom("q", &["X"]),
            Program::new(vec![Rule::new(
                atom("q", &["X"]),
                vec![Literal::pos(atom("mail", &["X", "Z"])), Literal::neq(Term::var("Z"), Term::var("Y"))],
            )]),
        );
        Query::new(
            atom("p", &["X", "Y"]),
            Program::new(vec![Rule::new(
                atom("p", &["X", "Y"]),
                vec![Literal::pos(atom("mail", &["X", "Y"])), Literal::nested(inner, true)],
            )]),
        )
    }

    #[test]
    fn free_variables_follow_definition() {
        let q = email_query();
        let Atom::Nested(inner) = &q.program.rules[0].body[1].atom else { panic!() };
        assert_eq!(free_variables(inner), vec![[Symbol::new("Y")].into()]);
        assert_eq!(free_variables(&q), vec![BTreeSet::new()]);
        let r = Rule::new(atom("p", &["Z"]), vec![Literal::pos(atom("s", &["X", "Z"]))]);
        assert!(free_in_rule(&r).is_empty());
    }

    #[test]
    fn syntactic_substitution_adds_lets() {
        let q = email_query();
        let Atom::Nested(inner) = &q.program.rules[0].body[1].atom else { panic!() };
        let theta = Substitution::from_pairs(&[("Y", c("m1"))]);
        let out = substitute_syntactic(&theta, &inner.program);
        assert_eq!(out.rules[0].body.last(), Some(&Literal::let_("Y", c("m1"))));
        let unrelated = Substitution::from_pairs(&[("W", c("m1"))]);
        assert_eq!(substitute_syntactic(&unrelated, &inner.program), inner.program);
    }

    #[test]
    fn email_query_answers() {
        for s in [
            SubstitutionStrategy::TopDown,
            SubstitutionStrategy::BottomUp,
            SubstitutionStrategy::AtPoints(Placement::Leaves),
        ] {
            let ans = answer_with(&email_query(), &mail_db(), &s).unwrap();
            let expected = [Fact::parse_args("p", &["j", "m1"]), Fact::parse_args("p", &["j", "m2"])].into();
            assert_eq!(ans, expected, "{s:?}");
        }
    }

    #[test]
    fn topdown_wrapper_shape() {
        let q = Query::new(
            atom("p", &["X"]),
            Program::new(vec![Rule::new(atom("p", &["X"]), vec![Literal::pos(atom("q", &["X"]))])]),
        );
        let theta = Substitution::from_pairs(&[("X", c("a"))]);
        let out = substitute_logical_topdown(&theta, &q);
        assert_eq!(out.program.rules.len(), 2);
        assert_eq!(out.program.rules[1].body, vec![Literal::pos(atom("p", &["X"])), Literal::let_("X", c("a"))]);
        assert_eq!(out.goal.pred, out.program.rules[1].head.pred);
        assert_eq!(substitute_logical_topdown(&Substitution::new(), &q), q);
    }

    #[test]
    fn improper_split() {
        let q = Query::new(
            atom("p", &["Z"]),
            Program::new(vec![Rule::new(atom("p", &["Z"]), vec![Literal::pos(atom("s", &["X", "Z"]))])]),
        );
        let theta = Substitution::from_pairs(&[("X", c("a"))]);
        let out = substitute_improper(&theta, &q, 0, &[Symbol::new("X")]).unwrap();
        assert_eq!(out.program.rules[0].body, vec![Literal::pos(atom("_u_0", &["X", "Z"]))]);
        assert_eq!(out.program.rules[1].body.last(), Some(&Literal::let_("X", c("a"))));
        assert!(matches!(substitute_improper(&theta, &q, 0, &[Symbol::new("W")]), Err(Error::VariableAbsent { .. })));
    }

    #[test]
    fn empty_nested_query_is_false() {
        let q = Query::new(atom("g", &["X"]), Program::default());
        assert!(!eval_nested_atom(&Database::new(), &Substitution::new(), &q, true, &SubstitutionStrategy::TopDown)
            .unwrap());
    }
}
