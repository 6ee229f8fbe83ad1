use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::term::{Symbol, Term, Value};

/// Rule label of Modal Datalog: `□` (sure) or `◇` (maybe).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Box,
    Diamond,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Box => "box",
            Mode::Diamond => "diamond",
        })
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredAtom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl PredAtom {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Term>) -> Self {
        PredAtom { pred: pred.into(), args }
    }

    /// Builds an atom whose arguments are all variables.
    pub fn with_vars<S: AsRef<str>>(pred: impl Into<Symbol>, vars: &[S]) -> Self {
        PredAtom { pred: pred.into(), args: vars.iter().map(Term::var).collect() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_var)
    }

    /// Distinct variables in order of first occurrence.
    pub fn distinct_vars(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for v in self.vars() {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn to_fact(&self) -> Option<Fact> {
        let args = self.args.iter().map(Term::ground).collect::<Option<Vec<_>>>()?;
        Some(Fact { pred: self.pred.clone(), args })
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Pred(PredAtom),
    /// `filter(t1 = t2)`; inequality is the negated literal.
    Eq(Term, Term),
    /// `let(X = v)`, sugar for a fresh unary predicate holding the single fact `l(v)`.
    Let {
        target: Term,
        value: Value,
    },
    Nested(Box<Query>),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: PredAtom) -> Self {
        Literal { atom: Atom::Pred(atom), positive: true }
    }

    pub fn neg(atom: PredAtom) -> Self {
        Literal { atom: Atom::Pred(atom), positive: false }
    }

    pub fn eq(left: Term, right: Term) -> Self {
        Literal { atom: Atom::Eq(left, right), positive: true }
    }

    pub fn neq(left: Term, right: Term) -> Self {
        Literal { atom: Atom::Eq(left, right), positive: false }
    }

    pub fn let_(var: impl AsRef<str>, value: Value) -> Self {
        Literal { atom: Atom::Let { target: Term::var(var), value }, positive: true }
    }

    pub fn nested(query: Query, positive: bool) -> Self {
        Literal { atom: Atom::Nested(Box::new(query)), positive }
    }

    pub fn pred_atom(&self) -> Option<&PredAtom> {
        match &self.atom {
            Atom::Pred(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_positive_pred(&self) -> bool {
        self.positive && matches!(self.atom, Atom::Pred(_))
    }

    pub fn is_let(&self) -> bool {
        matches!(self.atom, Atom::Let { .. })
    }

    /// Literals that bind variables: positive predicates and lets.
    pub fn is_binder(&self) -> bool {
        self.positive && matches!(self.atom, Atom::Pred(_) | Atom::Let { .. })
    }

    /// Variables of the literal itself; nested queries contribute nothing.
    pub fn own_vars(&self) -> Vec<Symbol> {
        match &self.atom {
            Atom::Pred(a) => a.vars().cloned().collect(),
            Atom::Eq(l, r) => [l, r].into_iter().filter_map(Term::as_var).cloned().collect(),
            Atom::Let { target, .. } => target.as_var().cloned().into_iter().collect(),
            Atom::Nested(_) => Vec::new(),
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.own_vars().iter().any(|v| &**v == var)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub mode: Option<Mode>,
    pub head: PredAtom,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: PredAtom, body: Vec<Literal>) -> Self {
        Rule { mode: None, head, body }
    }

    pub fn modal(mode: Mode, head: PredAtom, body: Vec<Literal>) -> Self {
        Rule { mode: Some(mode), head, body }
    }

    /// Variables occurring in a positive predicate or let literal of the body.
    pub fn positive_vars(&self) -> BTreeSet<Symbol> {
        self.body.iter().filter(|l| l.is_binder()).flat_map(Literal::own_vars).collect()
    }

    /// Head and body variables of the rule itself, excluding nested queries.
    pub fn own_vars(&self) -> BTreeSet<Symbol> {
        self.head.vars().cloned().chain(self.body.iter().flat_map(Literal::own_vars)).collect()
    }

    pub fn with_mode(mut self, mode: Option<Mode>) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub pred: Symbol,
    pub args: Vec<Value>,
}

impl Fact {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Value>) -> Self {
        Fact { pred: pred.into(), args }
    }

    /// Convenience constructor: `"_"` or `"⊥"` stand for null, anything else is a constant.
    pub fn parse_args(pred: &str, args: &[&str]) -> Self {
        let args = args.iter().map(|a| if *a == "⊥" || *a == "_" { Value::Null } else { Value::constant(a) }).collect();
        Fact { pred: pred.into(), args }
    }

    pub fn to_atom(&self) -> PredAtom {
        PredAtom { pred: self.pred.clone(), args: self.args.iter().map(Term::from).collect() }
    }

    /// Less-informative order lifted to facts of the same predicate.
    pub fn less_informative(&self, other: &Fact) -> bool {
        self.pred == other.pred
            && self.args.len() == other.args.len()
            && self.args.iter().zip(&other.args).all(|(a, b)| a.less_informative(b))
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<Fact>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules, facts: Vec::new() }
    }

    pub fn with_facts(rules: Vec<Rule>, facts: Vec<Fact>) -> Self {
        let mut p = Program { rules, facts: Vec::new() };
        for f in facts {
            p.add_fact(f);
        }
        p
    }

    pub fn add_fact(&mut self, fact: Fact) {
        if !self.facts.contains(&fact) {
            self.facts.push(fact);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.facts.is_empty()
    }

    /// Predicates defined by at least one rule.
    pub fn intensional(&self) -> BTreeSet<Symbol> {
        self.rules.iter().map(|r| r.head.pred.clone()).collect()
    }

    pub fn rules_for<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = (usize, &'a Rule)> + 'a {
        self.rules.iter().enumerate().filter(move |(_, r)| &*r.head.pred == pred)
    }

    /// True when every rule carries a mode.
    pub fn is_modal(&self) -> bool {
        !self.rules.is_empty() && self.rules.iter().all(|r| r.mode.is_some())
    }

    /// Copy with every rule relabelled by `mode` (`None` erases modes).
    pub fn with_mode(&self, mode: Option<Mode>) -> Program {
        Program { rules: self.rules.iter().cloned().map(|r| r.with_mode(mode)).collect(), facts: self.facts.clone() }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query {
    pub goal: PredAtom,
    pub program: Program,
}

impl Query {
    pub fn new(goal: PredAtom, program: Program) -> Self {
        Query { goal, program }
    }

    pub fn goal_vars(&self) -> Vec<Symbol> {
        self.goal.distinct_vars()
    }
}

/// An extensional database: a set of ground facts, possibly containing `⊥`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Database {
    facts: BTreeSet<Fact>,
}

impl Database {
    pub fn new() -> Self {
        Database::default()
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn facts_of<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a Fact> + 'a {
        self.facts.iter().filter(move |f| &*f.pred == pred)
    }

    pub fn predicates(&self) -> BTreeMap<Symbol, usize> {
        self.facts.iter().map(|f| (f.pred.clone(), f.args.len())).collect()
    }

    pub fn null_count(&self) -> usize {
        self.facts.iter().flat_map(|f| &f.args).filter(|v| v.is_null()).count()
    }
}

impl FromIterator<Fact> for Database {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        Database { facts: iter.into_iter().collect() }
    }
}

impl Extend<Fact> for Database {
    fn extend<I: IntoIterator<Item = Fact>>(&mut self, iter: I) {
        self.facts.extend(iter)
    }
}

impl<'a> IntoIterator for &'a Database {
    type Item = &'a Fact;
    type IntoIter = std::collections::btree_set::Iter<'a, Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

/// A finite mapping from variables to constants or `⊥`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Symbol, Value>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, Value)]) -> Self {
        Substitution { bindings: pairs.iter().map(|(k, v)| (Symbol::new(k), v.clone())).collect() }
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.bindings.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn insert(&mut self, var: Symbol, value: Value) -> Option<Value> {
        self.bindings.insert(var, value)
    }

    pub fn remove(&mut self, var: &str) -> Option<Value> {
        self.bindings.remove(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Value)> {
        self.bindings.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Value of a term under this substitution, if it is ground after substitution.
    pub fn resolve(&self, term: &Term) -> Option<Value> {
        match term {
            Term::Var(v) => self.bindings.get(v).cloned(),
            other => other.ground(),
        }
    }

    /// Restriction to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Symbol>) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            if let Some(val) = self.bindings.get(v) {
                out.insert(v.clone(), val.clone());
            }
        }
        out
    }
}

impl FromIterator<(Symbol, Value)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Symbol, Value)>>(iter: I) -> Self {
        Substitution { bindings: iter.into_iter().collect() }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}/{v}")?;
        }
        f.write_str("}")
    }
}

/// Plain textual replacement of variables by their values.
///
/// For queries this is not the semantic `θ(Q)` of nested evaluation; see `nesting`.
pub trait Substitute {
    fn substitute(&self, theta: &Substitution) -> Self;
}

impl Substitute for Term {
    fn substitute(&self, theta: &Substitution) -> Self {
        match self {
            Term::Var(v) => theta.get(v).map(Term::from).unwrap_or_else(|| self.clone()),
            other => other.clone(),
        }
    }
}

impl Substitute for PredAtom {
    fn substitute(&self, theta: &Substitution) -> Self {
        PredAtom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.substitute(theta)).collect() }
    }
}

impl Substitute for Atom {
    fn substitute(&self, theta: &Substitution) -> Self {
        match self {
            Atom::Pred(a) => Atom::Pred(a.substitute(theta)),
            Atom::Eq(l, r) => Atom::Eq(l.substitute(theta), r.substitute(theta)),
            Atom::Let { target, value } => Atom::Let { target: target.substitute(theta), value: value.clone() },
            Atom::Nested(q) => Atom::Nested(Box::new(q.substitute(theta))),
        }
    }
}

impl Substitute for Literal {
    fn substitute(&self, theta: &Substitution) -> Self {
        Literal { atom: self.atom.substitute(theta), positive: self.positive }
    }
}

impl Substitute for Rule {
    fn substitute(&self, theta: &Substitution) -> Self {
        Rule {
            mode: self.mode,
            head: self.head.substitute(theta),
            body: self.body.iter().map(|l| l.substitute(theta)).collect(),
        }
    }
}

impl Substitute for Program {
    fn substitute(&self, theta: &Substitution) -> Self {
        Program { rules: self.rules.iter().map(|r| r.substitute(theta)).collect(), facts: self.facts.clone() }
    }
}

impl Substitute for Query {
    fn substitute(&self, theta: &Substitution) -> Self {
        Query { goal: self.goal.substitute(theta), program: self.program.substitute(theta) }
    }
}

/// Applies `theta` textually to a literal, atom or query.
pub fn apply_substitution<T: Substitute>(theta: &Substitution, target: &T) -> T {
    target.substitute(theta)
}
