//! Seeded random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use nestlog::algebra::{AlgebraExpr, Condition, Operand, Relation};
use nestlog::model::{
    Atom, Database, Fact, Literal, Mode, PredAtom, Program, Query, Rule, Substitution, Symbol, Term, Value,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Gen = ChaCha8Rng;

pub fn rng(seed: u64) -> Gen {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

pub fn read_example(name: &str) -> String {
    std::fs::read_to_string(example(name)).expect("example file")
}

pub const CONSTANTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 4] = ["X", "Y", "Z", "W"];
/// Extensional predicates and their arities.
const EDB: [(&str, usize); 3] = [("e", 2), ("f", 1), ("g", 2)];

pub fn random_database(rng: &mut Gen, max_facts: usize) -> Database {
    let n = rng.gen_range(max_facts * 3 / 4..=max_facts);
    (0..n)
        .map(|_| {
            let (p, arity) = *EDB.choose(rng).unwrap();
            Fact::new(p, (0..arity).map(|_| Value::constant(*CONSTANTS.choose(rng).unwrap())).collect())
        })
        .collect()
}

fn var(name: &str) -> Term {
    Term::var(name)
}

/// Options for the random program generator.
#[derive(Clone, Copy, Debug)]
pub struct ProgramShape {
    pub max_rules: usize,
    pub nested: bool,
    pub lets: bool,
}

/// A rule body over `preds` whose positive part binds every variable in `must`.
fn random_body(
    rng: &mut Gen,
    preds: &[(String, usize)],
    must: &[Symbol],
    shape: ProgramShape,
    depth: usize,
) -> Vec<Literal> {
    let mut body = Vec::new();
    let mut bound: BTreeSet<Symbol> = BTreeSet::new();
    for i in 0..rng.gen_range(1..=2) {
        // The first literal uses the next layer, so that every layer is reachable.
        let (p, arity) = if i == 0 { preds.last() } else { preds.choose(rng) }.unwrap().clone();
        let args: Vec<Term> = (0..arity).map(|_| var(VARS[rng.gen_range(0..3)])).collect();
        bound.extend(args.iter().filter_map(|t| t.as_var().cloned()));
        body.push(Literal::pos(PredAtom::new(p, args)));
    }
    for v in must {
        if !bound.contains(v) {
            body.push(Literal::pos(PredAtom::new("f", vec![Term::Var(v.clone())])));
            bound.insert(v.clone());
        }
    }
    let bound: Vec<Symbol> = bound.into_iter().collect();
    let pick = |rng: &mut Gen| bound.choose(rng).unwrap().clone();
    if rng.gen_bool(0.25) {
        let (p, arity) = preds.choose(rng).unwrap().clone();
        let args = (0..arity).map(|_| Term::Var(pick(rng))).collect();
        body.push(Literal::neg(PredAtom::new(p, args)));
    }
    if rng.gen_bool(0.35) {
        let l = Term::Var(pick(rng));
        let r = if rng.gen_bool(0.5) { Term::Var(pick(rng)) } else { Term::constant(*CONSTANTS.choose(rng).unwrap()) };
        body.push(if rng.gen_bool(0.5) { Literal::eq(l, r) } else { Literal::neq(l, r) });
    }
    if shape.lets && rng.gen_bool(0.2) {
        body.push(Literal::let_("W", Value::constant(*CONSTANTS.choose(rng).unwrap())));
    }
    if shape.nested && depth == 0 && rng.gen_bool(0.4) {
        let inner = random_nested(rng, &bound);
        body.push(Literal::nested(inner, rng.gen_bool(0.6)));
    }
    body
}

/// A small nested query correlated with the outer variables `outer` through
/// its goal and through free variables in filters.
fn random_nested(rng: &mut Gen, outer: &[Symbol]) -> Query {
    let shape = ProgramShape { max_rules: 2, nested: false, lets: false };
    let mut q = random_query_with(rng, shape, 1, "n");
    if rng.gen_bool(0.5) {
        if let (Some(o), Some(rule)) = (outer.choose(rng).cloned(), q.program.rules.first_mut()) {
            let local: Vec<Symbol> = rule.positive_vars().into_iter().collect();
            if let Some(l) = local.choose(rng) {
                if !local.contains(&o) {
                    rule.body.push(Literal::neq(Term::Var(l.clone()), Term::Var(o)));
                }
            }
        }
    }
    q
}

fn random_query_with(rng: &mut Gen, shape: ProgramShape, depth: usize, prefix: &str) -> Query {
    let idb_count = rng.gen_range(1..=shape.max_rules.min(3));
    let arities: Vec<usize> = (0..idb_count).map(|_| rng.gen_range(1..=2)).collect();
    let name = |i: usize| format!("{prefix}{i}");
    let mut owners: Vec<usize> = (0..idb_count).collect();
    while owners.len() < shape.max_rules && rng.gen_bool(0.4) {
        owners.push(rng.gen_range(0..idb_count));
    }
    let mut rules = Vec::new();
    for &i in &owners {
        let mut preds: Vec<(String, usize)> = EDB.iter().map(|(p, a)| (p.to_string(), *a)).collect();
        preds.extend((i + 1..idb_count).map(|j| (name(j), arities[j])));
        if i + 1 < idb_count {
            preds.push((name(i + 1), arities[i + 1]));
        } else {
            let edb = *EDB.choose(rng).unwrap();
            preds.push((edb.0.to_string(), edb.1));
        }
        let head_vars: Vec<Symbol> = VARS[..arities[i]].iter().map(Symbol::new).collect();
        let body = random_body(rng, &preds, &head_vars, shape, depth);
        rules.push(Rule::new(PredAtom::with_vars(name(i), &head_vars), body));
    }
    Query::new(rules[0].head.clone(), Program::new(rules))
}

/// A random safe, non-recursive, null-free nested query.
pub fn random_query(rng: &mut Gen, shape: ProgramShape) -> Query {
    random_query_with(rng, shape, 0, "p")
}

/// Binds a random subset of the goal variables, usually to the values of
/// one of `answers` (goal facts of the unsubstituted query), otherwise to
/// random constants.
pub fn random_theta(rng: &mut Gen, query: &Query, answers: &BTreeSet<Fact>) -> Substitution {
    let answers: Vec<&Fact> = answers.iter().collect();
    let source = answers.choose(rng).filter(|_| rng.gen_bool(0.75));
    let mut theta = Substitution::new();
    for (i, t) in query.goal.args.iter().enumerate() {
        let Some(v) = t.as_var() else { continue };
        if theta.contains(v) || !rng.gen_bool(0.6) {
            continue;
        }
        let value = match source {
            Some(f) => f.args[i].clone(),
            None => Value::constant(*CONSTANTS.choose(rng).unwrap()),
        };
        theta.insert(v.clone(), value);
    }
    theta
}

/// The program with every rule, nested ones included, labelled by a random mode.
pub fn random_labelling(rng: &mut Gen, program: &Program) -> Program {
    let mut out = program.clone();
    for r in &mut out.rules {
        r.mode = Some(if rng.gen_bool(0.5) { Mode::Box } else { Mode::Diamond });
        for lit in &mut r.body {
            if let Atom::Nested(q) = &mut lit.atom {
                q.program = random_labelling(rng, &q.program);
            }
        }
    }
    out
}

/// A relation over `schema` with at most `max` tuples from `values`.
pub fn random_relation(rng: &mut Gen, schema: &[&str], values: &[Value], max: usize) -> Relation {
    let n = rng.gen_range(0..=max);
    let rows = (0..n).map(|_| schema.iter().map(|_| values.choose(rng).unwrap().clone()).collect::<Vec<_>>());
    Relation::from_rows(schema, rows)
}

/// Base relations of the random algebra expressions.
pub const ALGEBRA_BASES: [(&str, &[&str]); 4] =
    [("r", &["X", "Y"]), ("s", &["X", "Z"]), ("t", &["Y"]), ("u", &["X", "Y"])];

pub fn algebra_database(rng: &mut Gen, values: &[Value], max: usize) -> Database {
    let mut db = Database::new();
    for (name, schema) in ALGEBRA_BASES {
        for t in random_relation(rng, schema, values, max).tuples {
            db.insert(Fact::new(name, t));
        }
    }
    db
}

/// Which operators the algebra generator may use.
#[derive(Clone, Copy, Debug)]
pub struct AlgebraShape {
    pub depth: usize,
    /// Unions and differences only between operands of equal schema.
    pub union_compatible: bool,
    pub left_join: bool,
}

fn operand(rng: &mut Gen, schema: &[Symbol], values: &[Value]) -> Operand {
    if rng.gen_bool(0.6) {
        Operand::Attr(schema.choose(rng).unwrap().clone())
    } else {
        Operand::Value(values.choose(rng).unwrap().clone())
    }
}

pub fn random_algebra(rng: &mut Gen, shape: AlgebraShape, values: &[Value]) -> AlgebraExpr {
    let e = random_algebra_at(rng, shape, shape.depth, values);
    if shape.left_join && shape.union_compatible && rng.gen_bool(0.3) {
        let other = random_algebra_at(rng, shape, shape.depth.saturating_sub(1), values);
        return AlgebraExpr::LeftJoin(Box::new(e), Box::new(other));
    }
    e
}

fn random_algebra_at(rng: &mut Gen, shape: AlgebraShape, depth: usize, values: &[Value]) -> AlgebraExpr {
    let (name, schema) = *ALGEBRA_BASES.choose(rng).unwrap();
    let base = AlgebraExpr::base(name, schema);
    if depth == 0 || rng.gen_bool(0.2) {
        return base;
    }
    let sub = |rng: &mut Gen| random_algebra_at(rng, shape, depth - 1, values);
    let a = sub(rng);
    let schema = a.schema().unwrap();
    let choice = rng.gen_range(0..if shape.union_compatible || !shape.left_join { 7 } else { 8 });
    match choice {
        0 => {
            let c = Condition::Eq(operand(rng, &schema, values), operand(rng, &schema, values));
            let c = if rng.gen_bool(0.5) {
                c
            } else {
                Condition::Neq(operand(rng, &schema, values), operand(rng, &schema, values))
            };
            AlgebraExpr::Select(c, Box::new(a))
        }
        1 => {
            let mut keep: Vec<Symbol> = schema.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            if keep.is_empty() {
                keep.push(schema[0].clone());
            }
            AlgebraExpr::Project(keep, Box::new(a))
        }
        2 => {
            let free: Vec<&str> = VARS.iter().copied().filter(|v| !schema.iter().any(|s| &**s == *v)).collect();
            let Some(to) = free.choose(rng) else { return a };
            let from = schema.choose(rng).unwrap().clone();
            AlgebraExpr::Rename { from, to: Symbol::new(to), expr: Box::new(a) }
        }
        3 | 4 if shape.union_compatible => {
            let b = compatible_with(rng, &a, shape, depth, values);
            if choice == 3 {
                AlgebraExpr::Union(Box::new(a), Box::new(b))
            } else {
                AlgebraExpr::Minus(Box::new(a), Box::new(b))
            }
        }
        3 => AlgebraExpr::Union(Box::new(a), Box::new(sub(rng))),
        4 => AlgebraExpr::Minus(Box::new(a), Box::new(sub(rng))),
        5 | 6 => AlgebraExpr::Join(Box::new(a), Box::new(sub(rng))),
        _ => AlgebraExpr::LeftJoin(Box::new(a), Box::new(sub(rng))),
    }
}

/// An expression with exactly the attributes of `a`: a random one when the
/// generator finds such, otherwise a selection over `a` itself.
fn compatible_with(rng: &mut Gen, a: &AlgebraExpr, shape: AlgebraShape, depth: usize, values: &[Value]) -> AlgebraExpr {
    let schema = a.schema().unwrap();
    for _ in 0..20 {
        let e = random_algebra_at(rng, shape, depth.saturating_sub(1), values);
        let s = e.schema().unwrap();
        if s.len() == schema.len() && s.iter().all(|x| schema.contains(x)) {
            return e;
        }
    }
    let cond = Condition::Neq(operand(rng, &schema, values), operand(rng, &schema, values));
    AlgebraExpr::Select(cond, Box::new(a.clone()))
}

/// Textbook relational algebra over null-free relations, written
/// independently of the library operators. A left outer join pads
/// unmatched tuples with `⊥`.
pub fn classical_eval(expr: &AlgebraExpr, db: &Database) -> Relation {
    use nestlog::algebra::scan_base;
    let schema = expr.schema().expect("well-formed expression");
    match expr {
        AlgebraExpr::Base { name, args } => scan_base(db, name, args).expect("scan"),
        AlgebraExpr::Select(c, e) => {
            let r = classical_eval(e, db);
            let tuples = r.tuples.iter().filter(|t| classical_holds(c, &r, t)).cloned().collect();
            Relation { schema: r.schema, tuples }
        }
        AlgebraExpr::Project(attrs, e) => {
            let r = classical_eval(e, db);
            let tuples =
                r.tuples.iter().map(|t| attrs.iter().map(|a| r.value(t, a).unwrap().clone()).collect()).collect();
            Relation { schema: attrs.clone(), tuples }
        }
        AlgebraExpr::Rename { from, to, expr } => {
            let mut r = classical_eval(expr, db);
            for a in &mut r.schema {
                if a == from {
                    *a = to.clone();
                }
            }
            r
        }
        AlgebraExpr::Union(a, b) => {
            let mut r = classical_eval(a, db);
            let s = classical_eval(b, db).reorder(&r.schema).expect("union-compatible");
            r.tuples.extend(s.tuples);
            r
        }
        AlgebraExpr::Minus(a, b) => {
            let r = classical_eval(a, db);
            let s = classical_eval(b, db).reorder(&r.schema).expect("union-compatible");
            Relation { schema: r.schema, tuples: r.tuples.difference(&s.tuples).cloned().collect() }
        }
        AlgebraExpr::Join(a, b) | AlgebraExpr::LeftJoin(a, b) => {
            let (r, s) = (classical_eval(a, db), classical_eval(b, db));
            let mut out = Relation::new(schema.clone());
            for t in &r.tuples {
                let mut matched = false;
                for u in &s.tuples {
                    let agree = r.schema.iter().all(|x| s.value(u, x).is_none_or(|v| v == r.value(t, x).unwrap()));
                    if agree {
                        matched = true;
                        out.tuples.insert(
                            schema.iter().map(|x| r.value(t, x).or_else(|| s.value(u, x)).unwrap().clone()).collect(),
                        );
                    }
                }
                if !matched && matches!(expr, AlgebraExpr::LeftJoin(..)) {
                    out.tuples.insert(schema.iter().map(|x| r.value(t, x).cloned().unwrap_or(Value::Null)).collect());
                }
            }
            out
        }
        AlgebraExpr::Exists { .. } => unreachable!("the classical evaluator has no exists"),
    }
}

fn classical_holds(c: &Condition, r: &Relation, t: &[Value]) -> bool {
    let val = |o: &Operand| match o {
        Operand::Attr(a) => r.value(t, a).unwrap().clone(),
        Operand::Value(v) => v.clone(),
    };
    match c {
        Condition::Eq(a, b) => val(a) == val(b),
        Condition::Neq(a, b) => val(a) != val(b),
        Condition::And(a, b) => classical_holds(a, r, t) && classical_holds(b, r, t),
    }
}
