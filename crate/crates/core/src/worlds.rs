//! Possible-worlds reading of nulls: every `⊥` occurrence is replaced
//! independently by a constant of a finite domain, giving a set of complete
//! databases. Used as an oracle for the modal decisions.

use std::collections::BTreeSet;

use crate::algebra::{
    diamond_compatible, eval_algebra, join_diamond, minus_box, AlgebraExpr, Condition, Operand, Relation,
};
use crate::datalog::answer;
use crate::error::{Error, Result};
use crate::exists::SemanticsProfile;
use crate::model::{Atom, Database, Fact, Literal, Mode, PredAtom, Program, Query, Rule, Symbol, Term, Value};

/// Upper bound on `⊥` occurrences for enumeration.
pub const MAX_NULLS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldSpace {
    pub base: Database,
    pub domain: BTreeSet<Symbol>,
}

impl WorldSpace {
    /// The active domain of `base` plus `extra` constants, plus `fresh` (at
    /// least one) constants occurring nowhere.
    pub fn new(base: Database, extra: &[&str], fresh: usize) -> Self {
        let mut domain: BTreeSet<Symbol> = base
            .iter()
            .flat_map(|f| f.args.iter())
            .filter_map(|v| match v {
                Value::Const(c) => Some(c.clone()),
                Value::Null => None,
            })
            .collect();
        domain.extend(extra.iter().map(Symbol::new));
        let mut n = 0;
        let mut added = 0;
        while added < fresh.max(1) {
            let c = Symbol::from(format!("_w{n}"));
            n += 1;
            if domain.insert(c) {
                added += 1;
            }
        }
        WorldSpace { base, domain }
    }
}

/// Every completion of the base database, one per assignment of domain
/// constants to `⊥` occurrences.
pub fn enumerate_worlds(space: &WorldSpace) -> Result<Vec<Database>> {
    let count = space.base.null_count();
    if count > MAX_NULLS {
        return Err(Error::TooManyNulls { count, limit: MAX_NULLS });
    }
    let domain: Vec<&Symbol> = space.domain.iter().collect();
    let facts: Vec<&Fact> = space.base.iter().collect();
    let mut worlds = Vec::new();
    let mut choice = vec![0usize; count];
    loop {
        let mut next = choice.iter();
        let world: Database = facts
            .iter()
            .map(|f| {
                let args = f
                    .args
                    .iter()
                    .map(|v| match v {
                        Value::Null => Value::Const(domain[*next.next().expect("one choice per null")].clone()),
                        c => c.clone(),
                    })
                    .collect();
                Fact::new(f.pred.clone(), args)
            })
            .collect();
        worlds.push(world);
        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == count {
                return Ok(worlds);
            }
            choice[i] += 1;
            if choice[i] < domain.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn holds_in(query: &Query, world: &Database) -> Result<bool> {
    Ok(!answer(query, world)?.is_empty())
}

/// Whether the plain query has an answer in every world.
pub fn oracle_sure(query: &Query, space: &WorldSpace) -> Result<bool> {
    for w in enumerate_worlds(space)? {
        if !holds_in(query, &w)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the plain query has an answer in some world.
pub fn oracle_maybe(query: &Query, space: &WorldSpace) -> Result<bool> {
    for w in enumerate_worlds(space)? {
        if holds_in(query, &w)? {
            return Ok(true);
        }
    }
    Ok(false)
}

const TUPLE: &str = "_tuple";
const GOAL: &str = "_holds";

fn vars(prefix: &str, n: usize) -> Vec<Term> {
    (0..n).map(|i| Term::Var(Symbol::from(format!("{prefix}{i}")))).collect()
}

/// `tuple` as the single `_tuple` fact and a nullary goal over it.
fn tuple_condition(tuple: Vec<Value>, body: Vec<Literal>) -> (Query, Database) {
    let width = tuple.len();
    let mut full = vec![Literal::pos(PredAtom::new(TUPLE, vars("V", width)))];
    full.extend(body);
    let goal = PredAtom::new(GOAL, vec![]);
    let query = Query::new(goal.clone(), Program::new(vec![Rule::new(goal, full)]));
    (query, [Fact::new(TUPLE, tuple)].into_iter().collect())
}

fn var(i: usize) -> Term {
    Term::Var(Symbol::from(format!("V{i}")))
}

/// The condition `filter(a = b)` (or `≠`) over two values, as a query.
pub fn equality_condition(a: &Value, b: &Value, positive: bool) -> (Query, Database) {
    let test = if positive { Literal::eq(var(0), var(1)) } else { Literal::neq(var(0), var(1)) };
    tuple_condition(vec![a.clone(), b.clone()], vec![test])
}

/// The condition `¬pred(args)` over `store`, as a query.
pub fn negative_literal_condition(store: &Database, pred: &str, args: &[Value]) -> (Query, Database) {
    let (query, mut db) =
        tuple_condition(args.to_vec(), vec![Literal::neg(PredAtom::new(pred, vars("V", args.len())))]);
    db.extend(store.iter().cloned());
    (query, db)
}

/// `◦φ` for the condition over one tuple of `r`, as a query.
pub fn selection_condition(r: &Relation, tuple: &[Value], cond: &Condition) -> (Query, Database) {
    let operand = |o: &Operand| match o {
        Operand::Attr(a) => var(r.position(a).expect("attribute of the relation")),
        Operand::Value(v) => Term::from(v),
    };
    fn literals(c: &Condition, operand: &dyn Fn(&Operand) -> Term) -> Vec<Literal> {
        match c {
            Condition::Eq(a, b) => vec![Literal::eq(operand(a), operand(b))],
            Condition::Neq(a, b) => vec![Literal::neq(operand(a), operand(b))],
            Condition::And(a, b) => {
                let mut v = literals(a, operand);
                v.extend(literals(b, operand));
                v
            }
        }
    }
    tuple_condition(tuple.to_vec(), literals(cond, &operand))
}

/// Agreement of the two tuples on their common attributes, as a query.
pub fn compatibility_condition(r: &Relation, t: &[Value], s: &Relation, u: &[Value]) -> (Query, Database) {
    let shared: Vec<&Symbol> = r.schema.iter().filter(|a| s.schema.contains(a)).collect();
    let mut tuple: Vec<Value> = shared.iter().map(|a| r.value(t, a).unwrap().clone()).collect();
    tuple.extend(shared.iter().map(|a| s.value(u, a).unwrap().clone()));
    let n = shared.len();
    let tests = (0..n).map(|i| Literal::eq(var(i), var(n + i))).collect();
    tuple_condition(tuple, tests)
}

/// Constants written in the rules of `query`.
fn query_constants(query: &Query) -> Vec<String> {
    let mut out = Vec::new();
    for rule in &query.program.rules {
        for lit in &rule.body {
            let terms: Vec<&Term> = match &lit.atom {
                Atom::Pred(a) => a.args.iter().collect(),
                Atom::Eq(l, r) => vec![l, r],
                _ => vec![],
            };
            out.extend(terms.into_iter().filter_map(|t| match t {
                Term::Const(c) => Some(c.to_string()),
                _ => None,
            }));
        }
    }
    out
}

/// Sure (`□`) or maybe (`◇`) truth of a condition query over its own
/// database; the domain also holds the query's constants and `extra`.
pub fn oracle_decide(mode: Mode, query: &Query, db: Database, extra: &[&str], fresh: usize) -> Result<bool> {
    let constants = query_constants(query);
    let mut all: Vec<&str> = constants.iter().map(String::as_str).collect();
    all.extend_from_slice(extra);
    let space = WorldSpace::new(db, &all, fresh);
    match mode {
        Mode::Box => oracle_sure(query, &space),
        Mode::Diamond => oracle_maybe(query, &space),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    JoinDiamond,
    MinusBox,
    SelectBox,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    /// Number of decisions compared.
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.mismatches.push(what());
        }
    }
}

fn as_base(name: &str, r: &Relation) -> (AlgebraExpr, Vec<Fact>) {
    let expr = AlgebraExpr::base(name, &r.schema);
    (expr, r.tuples.iter().map(|t| Fact::new(name, t.clone())).collect())
}

fn show(t: &[Value]) -> String {
    let parts: Vec<String> = t.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Checks the per-tuple decisions of an operator, as taken by direct algebra
/// evaluation, against quantification over completions of the tuples
/// involved. `cond` is required for `SelectBox`; `s` for the binary operators.
pub fn check_operator_against_oracle(
    op: Operator,
    r: &Relation,
    s: Option<&Relation>,
    cond: Option<&Condition>,
) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    let profile = SemanticsProfile::preset("spec-top-down")?;
    let (re, rf) = as_base("_r", r);
    let missing = |what: &str| Error::SchemaMismatch(format!("operator check needs {what}"));
    match op {
        Operator::SelectBox => {
            let cond = cond.ok_or_else(|| missing("a condition"))?;
            let out =
                eval_algebra(&AlgebraExpr::Select(cond.clone(), Box::new(re)), &rf.into_iter().collect(), &profile)?;
            for t in &r.tuples {
                let (q, db) = selection_condition(r, t, cond);
                let sure = oracle_decide(Mode::Box, &q, db, &["a", "b"], 1)?;
                report.record(out.tuples.contains(t) == sure, || {
                    format!("select-box {cond} on {}: oracle says {sure}", show(t))
                });
            }
        }
        Operator::JoinDiamond | Operator::MinusBox => {
            let s = s.ok_or_else(|| missing("a second relation"))?;
            let (se, sf) = as_base("_s", s);
            let db: Database = rf.into_iter().chain(sf).collect();
            let mut maybe = Vec::new();
            for t in &r.tuples {
                for u in &s.tuples {
                    let (q, cdb) = compatibility_condition(r, t, s, u);
                    let m = oracle_decide(Mode::Diamond, &q, cdb, &["a", "b"], 1)?;
                    report.record(diamond_compatible(r, t, s, u) == m, || {
                        format!("compatibility of {} and {}: oracle says {m}", show(t), show(u))
                    });
                    maybe.push((t, u, m));
                }
            }
            if op == Operator::JoinDiamond {
                let out = eval_algebra(&AlgebraExpr::Join(Box::new(re), Box::new(se)), &db, &profile)?;
                let mut expected = Relation::new(out.schema.clone());
                for (t, u, m) in &maybe {
                    if *m {
                        let single = |rel: &Relation, x: &Vec<Value>| Relation {
                            schema: rel.schema.clone(),
                            tuples: [x.clone()].into(),
                        };
                        expected.tuples.extend(join_diamond(&single(r, t), &single(s, u)).tuples);
                    }
                }
                report.record(out == expected, || "join-diamond output differs from oracle-compatible merges".into());
            } else {
                let out = eval_algebra(&AlgebraExpr::Minus(Box::new(re), Box::new(se)), &db, &profile)?;
                debug_assert_eq!(out, minus_box(r, s));
                for t in &r.tuples {
                    let kept = !maybe.iter().any(|(x, _, m)| *x == t && *m);
                    report.record(out.tuples.contains(t) == kept, || {
                        format!("minus-box on {}: oracle keeps {kept}", show(t))
                    });
                }
            }
        }
    }
    Ok(report)
}

fn small_values() -> [Value; 3] {
    [Value::constant("a"), Value::constant("b"), Value::Null]
}

/// Every subset of `items`.
fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0..1usize << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Exhaustive literal-level agreement over the constants `a`, `b` and `⊥`:
/// modal equality and inequality against sure/maybe truth, and the negative
/// predicate tests against the oracle on stores of up to three facts.
pub fn exhaustive_literal_check() -> Result<OracleReport> {
    use crate::datalog::FactStore;
    use crate::modal::{modal_holds, modal_term_eq};
    use crate::nesting::SubstitutionStrategy;

    let mut report = OracleReport::default();
    let vals = small_values();
    for mode in [Mode::Box, Mode::Diamond] {
        for positive in [true, false] {
            for x in &vals {
                for y in &vals {
                    let (q, db) = equality_condition(x, y, positive);
                    let oracle = oracle_decide(mode, &q, db, &["a", "b"], 1)?;
                    let modal = modal_term_eq(mode, positive, x, y);
                    report.record(modal == oracle, || {
                        format!(
                            "{mode} filter({x} {} {y}): engine {modal}, oracle {oracle}",
                            if positive { "=" } else { "!=" }
                        )
                    });
                }
            }
        }
    }
    let unary: Vec<Fact> = vals.iter().map(|v| Fact::new("q", vec![v.clone()])).collect();
    let mut binary: Vec<Fact> = Vec::new();
    for x in &vals {
        for y in &vals {
            binary.push(Fact::new("q", vec![x.clone(), y.clone()]));
        }
    }
    let mut stores: Vec<(Vec<Fact>, usize)> = subsets(&unary).into_iter().map(|s| (s, 1)).collect();
    stores.extend(subsets(&binary).into_iter().filter(|s| s.len() <= 3).map(|s| (s, 2)));
    let nested = SubstitutionStrategy::TopDown;
    for (facts, arity) in stores {
        let store: Database = facts.into_iter().collect();
        let fact_store = FactStore::from_database(&store);
        let literal_args: Vec<Vec<Value>> = if arity == 1 {
            vals.iter().map(|v| vec![v.clone()]).collect()
        } else {
            vals.iter().flat_map(|x| vals.iter().map(move |y| vec![x.clone(), y.clone()])).collect()
        };
        for args in literal_args {
            let lit = Literal::neg(PredAtom::new("q", args.iter().map(Term::from).collect()));
            let (q, db) = negative_literal_condition(&store, "q", &args);
            for mode in [Mode::Box, Mode::Diamond] {
                let engine = modal_holds(&fact_store, &crate::model::Substitution::new(), mode, &lit, &store, &nested)?;
                let oracle = oracle_decide(mode, &q, db.clone(), &["a", "b"], 1)?;
                report.record(engine == oracle, || {
                    format!(
                        "{mode} {lit} over {{{}}}: engine {engine}, oracle {oracle}",
                        crate::syntax::print_facts(store.iter()).trim().replace('\n', " ")
                    )
                });
            }
        }
    }
    Ok(report)
}

/// All relations over `schema` with at most `max` tuples from `a`, `b`, `⊥`.
pub fn small_relations(schema: &[&str], max: usize) -> Vec<Relation> {
    let vals = small_values();
    let mut tuples: Vec<Vec<Value>> = vec![vec![]];
    for _ in schema {
        tuples =
            tuples.into_iter().flat_map(|t| vals.iter().map(move |v| [t.clone(), vec![v.clone()]].concat())).collect();
    }
    subsets(&tuples).into_iter().filter(|s| s.len() <= max).map(|rows| Relation::from_rows(schema, rows)).collect()
}

/// Exhaustive operator-level agreement: join, minus and selection decisions on
/// all relations of at most two tuples over at most two attributes.
pub fn exhaustive_operator_check() -> Result<OracleReport> {
    let schemas: [&[&str]; 4] = [&["X"], &["Y"], &["X", "Y"], &["X", "Z"]];
    let mut report = OracleReport::default();
    let mut absorb = |r: OracleReport| {
        report.checked += r.checked;
        report.mismatches.extend(r.mismatches);
    };
    for rs in &schemas[..3] {
        for ss in &schemas {
            for r in small_relations(rs, 2) {
                for s in small_relations(ss, 2) {
                    absorb(check_operator_against_oracle(Operator::JoinDiamond, &r, Some(&s), None)?);
                    absorb(check_operator_against_oracle(Operator::MinusBox, &r, Some(&s), None)?);
                }
            }
        }
    }
    let x = || Operand::Attr("X".into());
    let y = || Operand::Attr("Y".into());
    let conds = [
        Condition::Eq(x(), y()),
        Condition::Neq(x(), y()),
        Condition::Eq(x(), Operand::Value(Value::constant("a"))),
        Condition::Neq(x(), Operand::Value(Value::constant("a"))),
        Condition::Eq(x(), Operand::Value(Value::Null)),
        Condition::And(
            Box::new(Condition::Eq(x(), y())),
            Box::new(Condition::Neq(y(), Operand::Value(Value::constant("b")))),
        ),
    ];
    for r in small_relations(&["X", "Y"], 2) {
        for c in &conds {
            absorb(check_operator_against_oracle(Operator::SelectBox, &r, None, Some(c))?);
        }
    }
    Ok(report)
}
