//! Modal Datalog: `□`/`◇` satisfaction over facts with `⊥`, least-informative
//! inference and modal logical substitution.
//!
//! Rule evaluation itself runs on the shared engine in [`crate::datalog`]; this
//! module supplies the mode-specific matching and satisfaction tests.

use std::collections::{BTreeMap, BTreeSet};

use crate::datalog::{ground_args, ground_pair, Evaluator, FactStore, NestedSemantics};
use crate::error::{Error, Result};
use crate::model::{
    Atom, Database, Fact, FreshNames, Literal, Mode, PredAtom, Program, Query, Rule, Substitution, Symbol, Term, Value,
};

/// Equality (`positive`) or inequality of two ground values under a mode.
///
/// `□` requires the answer in every completion of the nulls, `◇` in at least one.
pub fn modal_term_eq(mode: Mode, positive: bool, a: &Value, b: &Value) -> bool {
    let either_null = a.is_null() || b.is_null();
    match (mode, positive) {
        (Mode::Box, true) => !either_null && a == b,
        (Mode::Box, false) => !either_null && a != b,
        (Mode::Diamond, true) => either_null || a == b,
        (Mode::Diamond, false) => either_null || a != b,
    }
}

/// `◇` matching of one literal argument against a fact value `v`.
///
/// The fact must be less informative than the instantiated literal; a variable
/// keeps the least informative value consistent with every fact matched so far.
pub(crate) fn diamond_match(theta: &mut Substitution, t: &Term, v: &Value) -> Option<()> {
    match t {
        Term::Var(x) => {
            let merged = match theta.get(x) {
                Some(bound) => bound.merge(v)?,
                None => v.clone(),
            };
            theta.insert(x.clone(), merged);
            Some(())
        }
        other => v.less_informative(&other.ground()?).then_some(()),
    }
}

/// Componentwise compatibility of two tuples under a mode.
fn compatible(mode: Mode, a: &[Value], b: &[Value]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| modal_term_eq(mode, true, x, y))
}

/// Satisfaction of a non-nested literal under a fully given `theta`.
pub(crate) fn holds_ground(store: &FactStore, theta: &Substitution, mode: Mode, lit: &Literal) -> Result<bool> {
    match &lit.atom {
        Atom::Pred(a) => {
            let args = ground_args(lit, theta, &a.args)?;
            if lit.positive {
                Ok(match mode {
                    Mode::Box => store.contains(&Fact::new(a.pred.clone(), args)),
                    Mode::Diamond => store
                        .scan(&a.pred)
                        .any(|f| f.len() == args.len() && f.iter().zip(&args).all(|(x, y)| x.less_informative(y))),
                })
            } else {
                // □¬ rules out every ◇-compatible fact, ◇¬ every □-compatible one.
                let dual = match mode {
                    Mode::Box => Mode::Diamond,
                    Mode::Diamond => Mode::Box,
                };
                Ok(!store.scan(&a.pred).any(|f| compatible(dual, f, &args)))
            }
        }
        Atom::Eq(l, r) => {
            let (a, b) = ground_pair(lit, theta, l, r)?;
            Ok(modal_term_eq(mode, lit.positive, &a, &b))
        }
        Atom::Let { target, value } => {
            let bound = ground_args(lit, theta, std::slice::from_ref(target))?.remove(0);
            // A let reads as the positive literal l(X) over the single fact l(t).
            let truth = match mode {
                Mode::Box => &bound == value,
                Mode::Diamond => value.less_informative(&bound),
            };
            Ok(truth == lit.positive)
        }
        Atom::Nested(_) => unreachable!("nested atoms are handled by the evaluator"),
    }
}

/// `S, θ ⊨ ◦L` for any literal kind, with nested queries instantiated by `nested`.
pub fn modal_holds(
    store: &FactStore,
    theta: &Substitution,
    mode: Mode,
    lit: &Literal,
    db: &Database,
    nested: &dyn NestedSemantics,
) -> Result<bool> {
    Evaluator::new(db, nested).holds(store, theta, Some(mode), lit)
}

/// Facts inferred by one application of a modal rule.
pub fn modal_infer_rule(
    store: &FactStore,
    rule: &Rule,
    db: &Database,
    nested: &dyn NestedSemantics,
) -> Result<BTreeSet<Fact>> {
    Evaluator::new(db, nested).infer_rule(store, rule)
}

pub fn modal_answer(query: &Query, db: &Database, nested: &dyn NestedSemantics) -> Result<BTreeSet<Fact>> {
    Evaluator::new(db, nested).answer(query)
}

/// Splits `rule` into a `◇` wrapper carrying one let per substituted variable
/// and a copy of the rule, under a fresh head, keeping its original mode.
pub fn substitute_logical_modal(
    theta: &Substitution,
    rule: &Rule,
    vars: &[Symbol],
    fresh: &mut FreshNames,
) -> Result<(Rule, Rule)> {
    let head_vars = rule.head.distinct_vars();
    let mut lets = Vec::new();
    for v in vars {
        let value = theta.get(v).filter(|_| head_vars.contains(v));
        let value = value.ok_or_else(|| Error::VariableAbsent { variable: v.clone() })?;
        lets.push(Literal::let_(v, value.clone()));
    }
    let u = fresh.fresh(&rule.head.pred);
    let inner_head = PredAtom::new(u, rule.head.args.clone());
    let mut body = vec![Literal::pos(inner_head.clone())];
    body.extend(lets);
    let wrapper = Rule::modal(Mode::Diamond, rule.head.clone(), body);
    let inner = Rule { mode: rule.mode, head: inner_head, body: rule.body.clone() };
    Ok((wrapper, inner))
}

/// Moves the lets of the `◇` wrapper at `wrapper` one level down: the wrapped
/// rules take the wrapper's head, and each positive literal mentioning a
/// substituted variable is wrapped in a fresh `◇` rule carrying the lets.
pub fn modal_move_down(program: &Program, wrapper: usize, fresh: &mut FreshNames) -> Result<Program> {
    let w = program.rules.get(wrapper).ok_or(Error::NoSuchRule(wrapper))?;
    let (inner, lets): (Vec<&Literal>, Vec<&Literal>) = w.body.iter().partition(|l| !l.is_let());
    let inner_atom = match inner.as_slice() {
        [lit] if lit.is_positive_pred() => lit.pred_atom().expect("positive predicate"),
        _ => return Err(Error::InvalidStrategy(format!("rule {wrapper} is not a let wrapper"))),
    };
    let mut carried: BTreeMap<Symbol, Vec<Value>> = BTreeMap::new();
    for lit in &lets {
        if let Atom::Let { target: Term::Var(v), value } = &lit.atom {
            carried.entry(v.clone()).or_default().push(value.clone());
        }
    }
    let mut rules: Vec<Rule> =
        program.rules.iter().enumerate().filter(|(i, _)| *i != wrapper).map(|(_, r)| r.clone()).collect();
    let mut moved_any = false;
    for (_, r) in program.rules_for(&inner_atom.pred) {
        // Wrapper variable at each position, renamed into the defining rule.
        let mut here: BTreeMap<Symbol, Vec<Value>> = BTreeMap::new();
        for (outer, local) in inner_atom.args.iter().zip(&r.head.args) {
            if let (Some(o), Some(l)) = (outer.as_var(), local.as_var()) {
                if let Some(vals) = carried.get(o) {
                    here.entry(l.clone()).or_default().extend(vals.iter().cloned());
                }
            }
        }
        let mut body = Vec::new();
        for lit in &r.body {
            let mentioned: Vec<(Symbol, Value)> = lit
                .own_vars()
                .into_iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .flat_map(|v| here.get(&v).into_iter().flatten().map(move |val| (v.clone(), val.clone())))
                .collect();
            if !lit.is_binder() || mentioned.is_empty() {
                body.push(lit.clone());
                continue;
            }
            moved_any = true;
            let vars: Vec<Symbol> = lit.own_vars().into_iter().fold(Vec::new(), |mut acc, v| {
                if !acc.contains(&v) {
                    acc.push(v);
                }
                acc
            });
            let base = lit.pred_atom().map(|a| a.pred.clone()).unwrap_or_else(|| Symbol::new("l"));
            let head = PredAtom::with_vars(fresh.fresh(&base), &vars);
            let mut wbody = vec![lit.clone()];
            wbody.extend(mentioned.into_iter().map(|(v, val)| Literal::let_(v, val)));
            rules.push(Rule::modal(Mode::Diamond, head.clone(), wbody));
            body.push(Literal::pos(head));
        }
        let renamed_head = PredAtom::new(w.head.pred.clone(), r.head.args.clone());
        rules.push(Rule { mode: r.mode, head: renamed_head, body });
    }
    if !moved_any {
        return Err(Error::NothingBelow {
            rule: wrapper,
            variable: carried.keys().next().cloned().unwrap_or_else(|| Symbol::new("?")),
        });
    }
    Ok(gc_unreachable(Program { rules, facts: program.facts.clone() }, &w.head.pred))
}

/// Drops rules whose head is unreachable from `root`.
pub(crate) fn gc_unreachable(program: Program, root: &Symbol) -> Program {
    let mut reachable: BTreeSet<Symbol> = [root.clone()].into();
    let mut frontier = vec![root.clone()];
    while let Some(p) = frontier.pop() {
        for (_, r) in program.rules_for(&p) {
            for lit in &r.body {
                if let Atom::Pred(a) = &lit.atom {
                    if reachable.insert(a.pred.clone()) {
                        frontier.push(a.pred.clone());
                    }
                }
            }
        }
    }
    let rules = program.rules.into_iter().filter(|r| reachable.contains(&r.head.pred)).collect();
    Program { rules, facts: program.facts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nesting::SubstitutionStrategy;

    fn atom(p: &str, vars: &[&str]) -> PredAtom {
        PredAtom::with_vars(p, vars)
    }

    fn db(facts: &[(&str, &[&str])]) -> Database {
        facts.iter().map(|(p, a)| Fact::parse_args(p, a)).collect()
    }

    fn a() -> Value {
        Value::constant("a")
    }

    #[test]
    fn term_equality_tables() {
        assert!(!modal_term_eq(Mode::Box, true, &a(), &Value::Null));
        assert!(modal_term_eq(Mode::Diamond, true, &a(), &Value::Null));
        assert!(modal_term_eq(Mode::Box, true, &a(), &a()));
        assert!(!modal_term_eq(Mode::Box, false, &Value::Null, &Value::Null));
        assert!(modal_term_eq(Mode::Diamond, false, &a(), &Value::Null));
    }

    #[test]
    fn diamond_positive_uses_less_informative_facts() {
        let store = FactStore::from_database(&db(&[("r", &["⊥"])]));
        let th = Substitution::from_pairs(&[("X", a())]);
        assert!(holds_ground(&store, &th, Mode::Diamond, &Literal::pos(atom("r", &["X"]))).unwrap());
        assert!(!holds_ground(&store, &th, Mode::Box, &Literal::pos(atom("r", &["X"]))).unwrap());
        let store = FactStore::from_database(&db(&[("r", &["a"])]));
        let th = Substitution::from_pairs(&[("X", Value::Null)]);
        assert!(!holds_ground(&store, &th, Mode::Diamond, &Literal::pos(atom("r", &["X"]))).unwrap());
    }

    #[test]
    fn box_negation_rules_out_compatible_facts() {
        let store = FactStore::from_database(&db(&[("q", &["a"])]));
        let th = Substitution::from_pairs(&[("X", Value::Null)]);
        assert!(!holds_ground(&store, &th, Mode::Box, &Literal::neg(atom("q", &["X"]))).unwrap());
        assert!(holds_ground(&store, &th, Mode::Diamond, &Literal::neg(atom("q", &["X"]))).unwrap());
    }

    #[test]
    fn sure_fact_needing_a_maybe_fact_is_underivable() {
        let p = Program::new(vec![
            Rule::modal(
                Mode::Box,
                atom("p", &["X"]),
                vec![Literal::pos(atom("q", &["X"])), Literal::pos(atom("r", &["X"]))],
            ),
            Rule::modal(
                Mode::Diamond,
                atom("q", &["X"]),
                vec![Literal::pos(atom("s", &["X"])), Literal::pos(atom("t", &["X"]))],
            ),
        ]);
        let e = db(&[("r", &["a"]), ("s", &["⊥"]), ("t", &["⊥"])]);
        let q = Query::new(atom("p", &["X"]), p);
        assert!(modal_answer(&q, &e, &SubstitutionStrategy::TopDown).unwrap().is_empty());
    }

    #[test]
    fn diamond_infers_least_informative() {
        let r = Rule::modal(Mode::Diamond, atom("p", &["X"]), vec![Literal::pos(atom("s", &["X"]))]);
        let e = db(&[("s", &["⊥"])]);
        let store = FactStore::from_database(&e);
        let out = modal_infer_rule(&store, &r, &e, &SubstitutionStrategy::TopDown).unwrap();
        assert_eq!(out, [Fact::parse_args("p", &["⊥"])].into());
    }

    #[test]
    fn logical_split_shape() {
        let r = Rule::modal(Mode::Box, atom("p", &["X", "Y"]), vec![Literal::pos(atom("r", &["X"]))]);
        let th = Substitution::from_pairs(&[("X", a()), ("Y", a())]);
        let mut fresh = FreshNames::new();
        let (w, inner) = substitute_logical_modal(&th, &r, &[Symbol::new("X"), Symbol::new("Y")], &mut fresh).unwrap();
        assert_eq!(w.mode, Some(Mode::Diamond));
        assert_eq!(w.body.len(), 3);
        assert_eq!(inner.mode, Some(Mode::Box));
        assert!(matches!(
            substitute_logical_modal(&th, &r, &[Symbol::new("Z")], &mut fresh),
            Err(Error::VariableAbsent { .. })
        ));
    }
}
