//! Stratified bottom-up evaluation of non-recursive programs.
//!
//! The same engine runs plain and modal rules: a rule without a mode matches
//! facts exactly and treats `⊥` as an ordinary symbol that equals nothing in
//! filters, while modal rules delegate matching to [`crate::modal`].

use std::collections::{BTreeMap, BTreeSet};

use tracing::trace;

use crate::error::{Error, Result};
use crate::modal;
use crate::model::{
    stratify, validate_program, Atom, Database, Fact, Literal, Mode, PredAtom, Program, Query, Rule, Substitution,
    Symbol, Term, Value,
};
use crate::nesting::SubstitutionStrategy;

/// Facts indexed by predicate name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactStore {
    by_pred: BTreeMap<Symbol, BTreeSet<Vec<Value>>>,
}

impl FactStore {
    pub fn new() -> Self {
        FactStore::default()
    }

    pub fn from_database(db: &Database) -> Self {
        let mut store = FactStore::new();
        for f in db {
            store.insert(f.clone());
        }
        store
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.by_pred.entry(fact.pred).or_default().insert(fact.args)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.by_pred.get(&fact.pred).is_some_and(|s| s.contains(&fact.args))
    }

    /// Argument tuples stored for `pred`.
    pub fn scan<'a>(&'a self, pred: &str) -> impl Iterator<Item = &'a Vec<Value>> + 'a {
        self.by_pred.get(pred).into_iter().flatten()
    }

    pub fn facts_of(&self, pred: &str) -> BTreeSet<Fact> {
        self.scan(pred).map(|args| Fact::new(pred, args.clone())).collect()
    }

    pub fn len(&self) -> usize {
        self.by_pred.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_database(&self) -> Database {
        self.by_pred
            .iter()
            .flat_map(|(p, tuples)| tuples.iter().map(move |a| Fact::new(p.clone(), a.clone())))
            .collect()
    }
}

/// How a nested-query atom is instantiated for a binding of its enclosing rule.
pub trait NestedSemantics {
    /// Builds `θ(Q)`.
    fn instantiate(&self, theta: &Substitution, nested: &Query) -> Result<Query>;
}

/// Evaluator over a fixed extensional database.
///
/// Nested queries are evaluated against the same extensional database, never
/// against facts derived by the enclosing program.
pub struct Evaluator<'a> {
    db: &'a Database,
    nested: &'a dyn NestedSemantics,
}

impl<'a> Evaluator<'a> {
    pub fn new(db: &'a Database, nested: &'a dyn NestedSemantics) -> Self {
        Evaluator { db, nested }
    }

    pub fn fixpoint(&self, program: &Program) -> Result<FactStore> {
        validate_program(program)?;
        let strata = stratify(program)?;
        let mut store = FactStore::from_database(self.db);
        for f in &program.facts {
            store.insert(f.clone());
        }
        for (level, stratum) in strata.rules.iter().enumerate() {
            loop {
                let mut changed = false;
                for &i in stratum {
                    for fact in self.infer_rule(&store, &program.rules[i])? {
                        if store.insert(fact.clone()) {
                            trace!(stratum = level, rule = i, fact = %fact, "derived");
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        Ok(store)
    }

    /// Facts of the goal predicate matching the goal atom.
    pub fn answer(&self, query: &Query) -> Result<BTreeSet<Fact>> {
        let store = self.fixpoint(&query.program)?;
        Ok(store
            .scan(&query.goal.pred)
            .filter(|args| match_args(None, &Substitution::new(), &query.goal.args, args).is_some())
            .map(|args| Fact::new(query.goal.pred.clone(), args.clone()))
            .collect())
    }

    /// Heads derived by one application of `rule` to `store`.
    pub fn infer_rule(&self, store: &FactStore, rule: &Rule) -> Result<BTreeSet<Fact>> {
        let (binders, builtins): (Vec<&Literal>, Vec<&Literal>) = rule.body.iter().partition(|l| l.is_binder());
        let mut out = BTreeSet::new();
        for theta in bindings(store, rule.mode, &binders) {
            if self.builtins_hold(store, &theta, rule.mode, &builtins)? {
                let fact = rule.head.to_fact_under(&theta).ok_or_else(|| Error::Unsafe {
                    rule: rule.to_string(),
                    variables: rule.head.vars().filter(|v| !theta.contains(v)).cloned().collect(),
                })?;
                out.insert(fact);
            }
        }
        Ok(out)
    }

    fn builtins_hold(
        &self,
        store: &FactStore,
        theta: &Substitution,
        mode: Option<Mode>,
        builtins: &[&Literal],
    ) -> Result<bool> {
        // Filters first, then negations, then nested queries (the most expensive).
        let rank = |l: &Literal| match l.atom {
            Atom::Eq(..) => 0,
            Atom::Pred(_) | Atom::Let { .. } => 1,
            Atom::Nested(_) => 2,
        };
        let mut ordered = builtins.to_vec();
        ordered.sort_by_key(|l| rank(l));
        for lit in ordered {
            if !self.holds(store, theta, mode, lit)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Satisfaction of a single literal under a fully given `theta`.
    pub fn holds(&self, store: &FactStore, theta: &Substitution, mode: Option<Mode>, lit: &Literal) -> Result<bool> {
        if let Atom::Nested(q) = &lit.atom {
            let instantiated = self.nested.instantiate(theta, q)?;
            trace!(theta = %theta, query = %instantiated, "nested query");
            let nonempty = !self.answer(&instantiated)?.is_empty();
            return Ok(nonempty == lit.positive);
        }
        match mode {
            None => plain_holds(store, theta, lit),
            Some(m) => modal::holds_ground(store, theta, m, lit),
        }
    }
}

fn unbound(lit: &Literal, theta: &Substitution) -> Error {
    Error::UnboundBuiltin {
        literal: lit.to_string(),
        variables: lit.own_vars().into_iter().filter(|v| !theta.contains(v)).collect(),
    }
}

/// Instantiates the arguments of a literal, failing on unbound variables.
pub(crate) fn ground_args(lit: &Literal, theta: &Substitution, args: &[Term]) -> Result<Vec<Value>> {
    args.iter().map(|t| theta.resolve(t).ok_or_else(|| unbound(lit, theta))).collect()
}

pub(crate) fn ground_pair(lit: &Literal, theta: &Substitution, l: &Term, r: &Term) -> Result<(Value, Value)> {
    match (theta.resolve(l), theta.resolve(r)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(unbound(lit, theta)),
    }
}

fn plain_holds(store: &FactStore, theta: &Substitution, lit: &Literal) -> Result<bool> {
    let truth = match &lit.atom {
        Atom::Pred(a) => {
            let args = ground_args(lit, theta, &a.args)?;
            store.contains(&Fact::new(a.pred.clone(), args))
        }
        Atom::Eq(l, r) => {
            let (a, b) = ground_pair(lit, theta, l, r)?;
            !a.is_null() && a == b
        }
        Atom::Let { target, value } => {
            let a = theta.resolve(target).ok_or_else(|| unbound(lit, theta))?;
            &a == value
        }
        Atom::Nested(_) => unreachable!("nested atoms are handled by the evaluator"),
    };
    Ok(truth == lit.positive)
}

/// Extends `theta` so that the literal arguments match `tuple`, per the rule mode.
pub(crate) fn match_args(
    mode: Option<Mode>,
    theta: &Substitution,
    args: &[Term],
    tuple: &[Value],
) -> Option<Substitution> {
    if args.len() != tuple.len() {
        return None;
    }
    let mut out = theta.clone();
    for (t, v) in args.iter().zip(tuple) {
        match mode {
            Some(Mode::Diamond) => modal::diamond_match(&mut out, t, v)?,
            _ => match t {
                Term::Var(x) => match out.get(x) {
                    Some(bound) if bound != v => return None,
                    Some(_) => {}
                    None => {
                        out.insert(x.clone(), v.clone());
                    }
                },
                other => {
                    if other.ground().as_ref() != Some(v) {
                        return None;
                    }
                }
            },
        }
    }
    Some(out)
}

/// All substitutions produced by matching the binders left to right.
fn bindings(store: &FactStore, mode: Option<Mode>, binders: &[&Literal]) -> Vec<Substitution> {
    let mut current = vec![Substitution::new()];
    for lit in binders {
        let mut next = Vec::new();
        for theta in &current {
            match &lit.atom {
                Atom::Pred(a) => {
                    for tuple in store.scan(&a.pred) {
                        if let Some(t) = match_args(mode, theta, &a.args, tuple) {
                            next.push(t);
                        }
                    }
                }
                Atom::Let { target, value } => {
                    if let Some(t) = match_args(mode, theta, std::slice::from_ref(target), std::slice::from_ref(value))
                    {
                        next.push(t);
                    }
                }
                _ => unreachable!("binders are positive predicates and lets"),
            }
        }
        next.sort();
        next.dedup();
        current = next;
        if current.is_empty() {
            break;
        }
    }
    current
}

impl PredAtom {
    /// Ground fact obtained by applying `theta`, if every variable is bound.
    pub fn to_fact_under(&self, theta: &Substitution) -> Option<Fact> {
        let args = self.args.iter().map(|t| theta.resolve(t)).collect::<Option<Vec<_>>>()?;
        Some(Fact::new(self.pred.clone(), args))
    }
}

/// Satisfaction of a plain literal; nested atoms use logical top-down substitution.
pub fn eval_literal(store: &FactStore, theta: &Substitution, lit: &Literal) -> Result<bool> {
    let db = store.to_database();
    let strategy = SubstitutionStrategy::TopDown;
    Evaluator::new(&db, &strategy).holds(store, theta, None, lit)
}

pub fn fixpoint(program: &Program, db: &Database) -> Result<FactStore> {
    Evaluator::new(db, &SubstitutionStrategy::TopDown).fixpoint(program)
}

pub fn answer(query: &Query, db: &Database) -> Result<BTreeSet<Fact>> {
    Evaluator::new(db, &SubstitutionStrategy::TopDown).answer(query)
}

/// Answers under an explicit nested-query strategy.
pub fn answer_with(query: &Query, db: &Database, strategy: &dyn NestedSemantics) -> Result<BTreeSet<Fact>> {
    Evaluator::new(db, strategy).answer(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: &str, vars: &[&str]) -> PredAtom {
        PredAtom::with_vars(p, vars)
    }

    fn db(facts: &[(&str, &[&str])]) -> Database {
        facts.iter().map(|(p, a)| Fact::parse_args(p, a)).collect()
    }

    fn theta(pairs: &[(&str, &str)]) -> Substitution {
        pairs.iter().map(|(k, v)| (Symbol::new(k), Value::constant(v))).collect()
    }

    #[test]
    fn literal_satisfaction() {
        let store = FactStore::from_database(&db(&[("q", &["a"])]));
        let q = Literal::pos(atom("q", &["X"]));
        assert!(eval_literal(&store, &theta(&[("X", "a")]), &q).unwrap());
        let eq = Literal::eq(Term::var("X"), Term::var("Y"));
        assert!(eval_literal(&store, &theta(&[("X", "a"), ("Y", "a")]), &eq).unwrap());
        assert!(!eval_literal(&store, &theta(&[("X", "a"), ("Y", "b")]), &eq).unwrap());
        let nq = Literal::neg(atom("q", &["X"]));
        assert!(eval_literal(&store, &theta(&[("X", "b")]), &nq).unwrap());
    }

    #[test]
    fn unbound_builtin_is_reported() {
        let store = FactStore::new();
        let eq = Literal::eq(Term::var("X"), Term::var("Y"));
        assert!(matches!(eval_literal(&store, &theta(&[("X", "a")]), &eq), Err(Error::UnboundBuiltin { .. })));
    }

    #[test]
    fn fixpoint_with_negation() {
        let p = Program::new(vec![
            Rule::new(atom("p", &["X"]), vec![Literal::pos(atom("q", &["X"])), Literal::neg(atom("r", &["X"]))]),
            Rule::new(atom("r", &["X"]), vec![Literal::pos(atom("s", &["X"]))]),
        ]);
        let e = db(&[("q", &["a"]), ("q", &["b"]), ("s", &["b"])]);
        let store = fixpoint(&p, &e).unwrap();
        assert_eq!(store.facts_of("p"), [Fact::parse_args("p", &["a"])].into());
    }

    #[test]
    fn answer_restricts_to_goal() {
        let q = Query::new(
            atom("p", &["X"]),
            Program::new(vec![Rule::new(atom("p", &["X"]), vec![Literal::pos(atom("q", &["X"]))])]),
        );
        assert_eq!(answer(&q, &db(&[("q", &["a"])])).unwrap(), [Fact::parse_args("p", &["a"])].into());
        assert!(answer(&q, &Database::new()).unwrap().is_empty());
    }

    #[test]
    fn plain_null_equals_nothing_in_filters() {
        let store = FactStore::new();
        let eq = Literal::eq(Term::Null, Term::Null);
        assert!(!eval_literal(&store, &Substitution::new(), &eq).unwrap());
    }

    #[test]
    fn repeated_variables_join() {
        let p = Program::new(vec![Rule::new(atom("p", &["X"]), vec![Literal::pos(atom("e", &["X", "X"]))])]);
        let e = db(&[("e", &["a", "a"]), ("e", &["a", "b"])]);
        assert_eq!(fixpoint(&p, &e).unwrap().facts_of("p").len(), 1);
    }
}
