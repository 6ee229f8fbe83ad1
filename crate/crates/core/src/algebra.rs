//! A SPARQL-style algebra over relations with nulls: direct evaluation and
//! translation to Modal Datalog.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::exists::{eval_exists_filter, SemanticsProfile};
use crate::modal::{modal_answer, modal_term_eq};
use crate::model::{Database, Fact, FreshNames, Literal, Mode, PredAtom, Program, Query, Rule, Symbol, Term, Value};

/// A set of tuples over an ordered list of attributes; unbound is `⊥`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Relation {
    pub schema: Vec<Symbol>,
    pub tuples: BTreeSet<Vec<Value>>,
}

impl Relation {
    pub fn new(schema: Vec<Symbol>) -> Self {
        Relation { schema, tuples: BTreeSet::new() }
    }

    /// Builds a relation from rows; every row must have the schema's width.
    pub fn from_rows<S: AsRef<str>>(schema: &[S], rows: impl IntoIterator<Item = Vec<Value>>) -> Self {
        let schema: Vec<Symbol> = schema.iter().map(Symbol::new).collect();
        let tuples = rows.into_iter().inspect(|r| assert_eq!(r.len(), schema.len(), "row width")).collect();
        Relation { schema, tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn position(&self, attr: &str) -> Option<usize> {
        self.schema.iter().position(|a| &**a == attr)
    }

    /// Value of `attr` in `tuple`, `⊥` when the attribute is absent.
    pub fn value<'t>(&self, tuple: &'t [Value], attr: &str) -> Option<&'t Value> {
        self.position(attr).map(|i| &tuple[i])
    }

    /// The same tuples with columns reordered to `schema`.
    pub fn reorder(&self, schema: &[Symbol]) -> Result<Relation> {
        let idx = schema
            .iter()
            .map(|a| self.position(a).ok_or_else(|| Error::SchemaMismatch(format!("attribute {a} missing"))))
            .collect::<Result<Vec<_>>>()?;
        if schema.len() != self.schema.len() {
            return Err(Error::SchemaMismatch("schemas differ in width".into()));
        }
        Ok(Relation {
            schema: schema.to_vec(),
            tuples: self.tuples.iter().map(|t| idx.iter().map(|&i| t[i].clone()).collect()).collect(),
        })
    }

    /// Equality up to column order.
    pub fn same_as(&self, other: &Relation) -> bool {
        other.reorder(&self.schema).is_ok_and(|o| o.tuples == self.tuples)
    }

    /// Facts of `goal` read as a relation whose schema is the goal variables.
    pub fn from_answers(goal: &PredAtom, facts: &BTreeSet<Fact>) -> Relation {
        let schema = goal.distinct_vars();
        let idx: Vec<usize> =
            schema.iter().map(|v| goal.args.iter().position(|t| t.as_var() == Some(v)).unwrap()).collect();
        Relation { schema, tuples: facts.iter().map(|f| idx.iter().map(|&i| f.args[i].clone()).collect()).collect() }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.schema.iter().map(|s| s.as_str()).collect();
        writeln!(f, "{}", names.join("\t"))?;
        for t in &self.tuples {
            let row: Vec<String> = t.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

/// Argument of a base relation pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternTerm {
    Attr(Symbol),
    Value(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Attr(Symbol),
    Value(Value),
}

impl Operand {
    fn term(&self) -> Term {
        match self {
            Operand::Attr(a) => Term::Var(a.clone()),
            Operand::Value(v) => Term::from(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Eq(Operand, Operand),
    Neq(Operand, Operand),
    And(Box<Condition>, Box<Condition>),
}

impl Condition {
    pub fn attrs(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        let mut push = |o: &Operand| {
            if let Operand::Attr(a) = o {
                out.push(a.clone());
            }
        };
        match self {
            Condition::Eq(l, r) | Condition::Neq(l, r) => {
                push(l);
                push(r);
            }
            Condition::And(a, b) => {
                out.extend(a.attrs());
                out.extend(b.attrs());
            }
        }
        out
    }

    /// The condition as a conjunction of filter literals.
    pub fn to_literals(&self) -> Vec<Literal> {
        match self {
            Condition::Eq(l, r) => vec![Literal::eq(l.term(), r.term())],
            Condition::Neq(l, r) => vec![Literal::neq(l.term(), r.term())],
            Condition::And(a, b) => {
                let mut v = a.to_literals();
                v.extend(b.to_literals());
                v
            }
        }
    }

    /// `μ ⊨ ◦φ` for a total assignment of the condition's attributes.
    pub fn holds(&self, mode: Mode, value: &dyn Fn(&Operand) -> Option<Value>) -> Result<bool> {
        let get = |o: &Operand| {
            value(o).ok_or_else(|| match o {
                Operand::Attr(a) => Error::SchemaMismatch(format!("attribute {a} is not bound")),
                Operand::Value(_) => unreachable!(),
            })
        };
        Ok(match self {
            Condition::Eq(l, r) => modal_term_eq(mode, true, &get(l)?, &get(r)?),
            Condition::Neq(l, r) => modal_term_eq(mode, false, &get(l)?, &get(r)?),
            Condition::And(a, b) => a.holds(mode, value)? && b.holds(mode, value)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraExpr {
    /// A base relation read through a pattern such as `(corpMail X Y)`.
    Base {
        name: Symbol,
        args: Vec<PatternTerm>,
    },
    Select(Condition, Box<AlgebraExpr>),
    Project(Vec<Symbol>, Box<AlgebraExpr>),
    Rename {
        from: Symbol,
        to: Symbol,
        expr: Box<AlgebraExpr>,
    },
    Union(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Join(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Minus(Box<AlgebraExpr>, Box<AlgebraExpr>),
    LeftJoin(Box<AlgebraExpr>, Box<AlgebraExpr>),
    /// Tuples of `outer` for which `inner` has (or, negated, has no) solution.
    Exists {
        inner: Box<AlgebraExpr>,
        outer: Box<AlgebraExpr>,
        negated: bool,
    },
}

fn union_schema(r: &[Symbol], s: &[Symbol]) -> Vec<Symbol> {
    let mut out = r.to_vec();
    out.extend(s.iter().filter(|a| !r.contains(a)).cloned());
    out
}

fn common(r: &[Symbol], s: &[Symbol]) -> Vec<Symbol> {
    r.iter().filter(|a| s.contains(a)).cloned().collect()
}

impl AlgebraExpr {
    pub fn base<S: AsRef<str>>(name: &str, attrs: &[S]) -> Self {
        AlgebraExpr::Base { name: name.into(), args: attrs.iter().map(|a| PatternTerm::Attr(Symbol::new(a))).collect() }
    }

    pub fn contains_exists(&self) -> bool {
        match self {
            AlgebraExpr::Base { .. } => false,
            AlgebraExpr::Select(_, e) | AlgebraExpr::Project(_, e) | AlgebraExpr::Rename { expr: e, .. } => {
                e.contains_exists()
            }
            AlgebraExpr::Union(a, b)
            | AlgebraExpr::Join(a, b)
            | AlgebraExpr::Minus(a, b)
            | AlgebraExpr::LeftJoin(a, b) => a.contains_exists() || b.contains_exists(),
            AlgebraExpr::Exists { .. } => true,
        }
    }

    /// Output attributes, checking every attribute reference.
    pub fn schema(&self) -> Result<Vec<Symbol>> {
        self.schema_in(&[])
    }

    /// As `schema`, where conditions may also reference the attributes in `scope`
    /// (the outer attributes visible inside an exists).
    pub fn schema_in(&self, scope: &[Symbol]) -> Result<Vec<Symbol>> {
        let mismatch = |m: String| Err(Error::SchemaMismatch(m));
        match self {
            AlgebraExpr::Base { args, .. } => {
                let mut out = Vec::new();
                for a in args {
                    if let PatternTerm::Attr(x) = a {
                        if !out.contains(x) {
                            out.push(x.clone());
                        }
                    }
                }
                Ok(out)
            }
            AlgebraExpr::Select(c, e) => {
                let s = e.schema_in(scope)?;
                for a in c.attrs() {
                    if !s.contains(&a) && !scope.contains(&a) {
                        return mismatch(format!("selection references unknown attribute {a}"));
                    }
                }
                Ok(s)
            }
            AlgebraExpr::Project(attrs, e) => {
                let s = e.schema_in(scope)?;
                for a in attrs {
                    if !s.contains(a) {
                        return mismatch(format!("projection on unknown attribute {a}"));
                    }
                }
                Ok(attrs.clone())
            }
            AlgebraExpr::Rename { from, to, expr } => {
                let s = expr.schema_in(scope)?;
                if !s.contains(from) {
                    return mismatch(format!("rename of unknown attribute {from}"));
                }
                if s.contains(to) && to != from {
                    return mismatch(format!("rename target {to} already present"));
                }
                Ok(s.into_iter().map(|a| if &a == from { to.clone() } else { a }).collect())
            }
            AlgebraExpr::Union(a, b) | AlgebraExpr::Join(a, b) | AlgebraExpr::LeftJoin(a, b) => {
                Ok(union_schema(&a.schema_in(scope)?, &b.schema_in(scope)?))
            }
            AlgebraExpr::Minus(a, b) => {
                b.schema_in(scope)?;
                a.schema_in(scope)
            }
            AlgebraExpr::Exists { inner, outer, .. } => {
                let s = outer.schema_in(scope)?;
                inner.schema_in(&union_schema(scope, &s))?;
                Ok(s)
            }
        }
    }

    /// Base relation names with their arities.
    pub fn relations(&self) -> BTreeMap<Symbol, usize> {
        let mut out = BTreeMap::new();
        self.collect_relations(&mut out);
        out
    }

    fn collect_relations(&self, out: &mut BTreeMap<Symbol, usize>) {
        match self {
            AlgebraExpr::Base { name, args } => {
                out.insert(name.clone(), args.len());
            }
            AlgebraExpr::Select(_, e) | AlgebraExpr::Project(_, e) | AlgebraExpr::Rename { expr: e, .. } => {
                e.collect_relations(out)
            }
            AlgebraExpr::Union(a, b)
            | AlgebraExpr::Join(a, b)
            | AlgebraExpr::Minus(a, b)
            | AlgebraExpr::LeftJoin(a, b)
            | AlgebraExpr::Exists { inner: a, outer: b, .. } => {
                a.collect_relations(out);
                b.collect_relations(out);
            }
        }
    }
}

/// `◇`-compatibility of two tuples on their common attributes.
pub fn diamond_compatible(r: &Relation, t: &[Value], s: &Relation, u: &[Value]) -> bool {
    common(&r.schema, &s.schema).iter().all(|a| {
        let x = r.value(t, a).expect("common attribute");
        let y = s.value(u, a).expect("common attribute");
        modal_term_eq(Mode::Diamond, true, x, y)
    })
}

pub fn select_box(r: &Relation, cond: &Condition) -> Result<Relation> {
    let mut out = Relation::new(r.schema.clone());
    for t in &r.tuples {
        let lookup = |o: &Operand| match o {
            Operand::Attr(a) => r.value(t, a).cloned(),
            Operand::Value(v) => Some(v.clone()),
        };
        if cond.holds(Mode::Box, &lookup)? {
            out.tuples.insert(t.clone());
        }
    }
    Ok(out)
}

pub fn project(r: &Relation, attrs: &[Symbol]) -> Result<Relation> {
    let idx = attrs
        .iter()
        .map(|a| r.position(a).ok_or_else(|| Error::SchemaMismatch(format!("projection on unknown attribute {a}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Relation {
        schema: attrs.to_vec(),
        tuples: r.tuples.iter().map(|t| idx.iter().map(|&i| t[i].clone()).collect()).collect(),
    })
}

pub fn rename(r: &Relation, from: &Symbol, to: &Symbol) -> Relation {
    Relation {
        schema: r.schema.iter().map(|a| if a == from { to.clone() } else { a.clone() }).collect(),
        tuples: r.tuples.clone(),
    }
}

/// Extends `t` (over `r`) to `schema` with `⊥` for the missing attributes.
fn pad(r: &Relation, t: &[Value], schema: &[Symbol]) -> Vec<Value> {
    schema.iter().map(|a| r.value(t, a).cloned().unwrap_or(Value::Null)).collect()
}

pub fn union(r: &Relation, s: &Relation) -> Relation {
    let schema = union_schema(&r.schema, &s.schema);
    let mut out = Relation::new(schema.clone());
    out.tuples.extend(r.tuples.iter().map(|t| pad(r, t, &schema)));
    out.tuples.extend(s.tuples.iter().map(|t| pad(s, t, &schema)));
    out
}

pub fn join_diamond(r: &Relation, s: &Relation) -> Relation {
    let schema = union_schema(&r.schema, &s.schema);
    let mut out = Relation::new(schema.clone());
    for t in &r.tuples {
        for u in &s.tuples {
            if diamond_compatible(r, t, s, u) {
                let merged = schema
                    .iter()
                    .map(|a| match (r.value(t, a), s.value(u, a)) {
                        (Some(x), Some(y)) => x.merge(y).expect("compatible values merge"),
                        (Some(x), None) | (None, Some(x)) => x.clone(),
                        (None, None) => unreachable!(),
                    })
                    .collect();
                out.tuples.insert(merged);
            }
        }
    }
    out
}

pub fn minus_box(r: &Relation, s: &Relation) -> Relation {
    let mut out = Relation::new(r.schema.clone());
    for t in &r.tuples {
        if !s.tuples.iter().any(|u| diamond_compatible(r, t, s, u)) {
            out.tuples.insert(t.clone());
        }
    }
    out
}

pub fn left_outer_join(r: &Relation, s: &Relation) -> Relation {
    union(&join_diamond(r, s), &minus_box(r, s))
}

/// Reads a base pattern: facts of the relation matching the pattern exactly.
pub fn scan_base(db: &Database, name: &str, args: &[PatternTerm]) -> Result<Relation> {
    let schema = AlgebraExpr::Base { name: name.into(), args: args.to_vec() }.schema()?;
    let mut out = Relation::new(schema.clone());
    'facts: for f in db.facts_of(name) {
        if f.args.len() != args.len() {
            return Err(Error::SchemaMismatch(format!(
                "relation {name} has arity {}, pattern has {}",
                f.args.len(),
                args.len()
            )));
        }
        let mut binding: BTreeMap<&Symbol, &Value> = BTreeMap::new();
        for (p, v) in args.iter().zip(&f.args) {
            match p {
                PatternTerm::Value(c) if c != v => continue 'facts,
                PatternTerm::Value(_) => {}
                PatternTerm::Attr(a) => match binding.get(a) {
                    Some(&prev) if prev != v => continue 'facts,
                    _ => {
                        binding.insert(a, v);
                    }
                },
            }
        }
        out.tuples.insert(schema.iter().map(|a| binding[a].clone()).collect());
    }
    Ok(out)
}

/// Translation switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Use the rename rule `◇(p((R∖{X})∪{Y}) <- r(R), filter(X=Y), let(Y=⊥))`
    /// verbatim instead of renaming the head variable.
    pub paper_rename: bool,
}

/// Direct evaluation. Exists nodes are decided per outer tuple under `profile`.
pub fn eval_algebra(expr: &AlgebraExpr, db: &Database, profile: &SemanticsProfile) -> Result<Relation> {
    eval_with_options(expr, db, profile, TranslateOptions::default())
}

/// As `eval_algebra`, with the translation options used inside exists nodes.
pub fn eval_with_options(
    expr: &AlgebraExpr,
    db: &Database,
    profile: &SemanticsProfile,
    opts: TranslateOptions,
) -> Result<Relation> {
    expr.schema()?;
    eval_node(expr, db, profile, opts)
}

fn eval_node(
    expr: &AlgebraExpr,
    db: &Database,
    profile: &SemanticsProfile,
    opts: TranslateOptions,
) -> Result<Relation> {
    let ev = |e: &AlgebraExpr| eval_node(e, db, profile, opts);
    Ok(match expr {
        AlgebraExpr::Base { name, args } => scan_base(db, name, args)?,
        AlgebraExpr::Select(c, e) => select_box(&ev(e)?, c)?,
        AlgebraExpr::Project(attrs, e) => project(&ev(e)?, attrs)?,
        AlgebraExpr::Rename { from, to, expr } => rename(&ev(expr)?, from, to),
        AlgebraExpr::Union(a, b) => union(&ev(a)?, &ev(b)?),
        AlgebraExpr::Join(a, b) => join_diamond(&ev(a)?, &ev(b)?),
        AlgebraExpr::Minus(a, b) => minus_box(&ev(a)?, &ev(b)?),
        AlgebraExpr::LeftJoin(a, b) => left_outer_join(&ev(a)?, &ev(b)?),
        AlgebraExpr::Exists { inner, outer, negated } => {
            eval_exists_filter(&ev(outer)?, inner, *negated, profile, db, opts)?
        }
    })
}

struct Translator {
    fresh: FreshNames,
    rules: Vec<Rule>,
    opts: TranslateOptions,
}

fn vars(attrs: &[Symbol]) -> Vec<Term> {
    attrs.iter().map(|a| Term::Var(a.clone())).collect()
}

impl Translator {
    fn head(&mut self, base: &str, attrs: &[Symbol]) -> PredAtom {
        PredAtom::new(self.fresh.fresh(base), vars(attrs))
    }

    fn emit(&mut self, mode: Mode, head: &PredAtom, body: Vec<Literal>) {
        self.rules.push(Rule::modal(mode, head.clone(), body));
    }

    /// Emits the rules of `expr` and returns the atom naming its result.
    fn node(&mut self, expr: &AlgebraExpr) -> Result<PredAtom> {
        let schema = expr.schema_in(&all_attrs(expr))?;
        Ok(match expr {
            AlgebraExpr::Base { name, args } => {
                let direct = args.iter().all(|a| matches!(a, PatternTerm::Attr(_))) && schema.len() == args.len();
                let atom = PredAtom::new(
                    name.clone(),
                    args.iter()
                        .map(|a| match a {
                            PatternTerm::Attr(x) => Term::Var(x.clone()),
                            PatternTerm::Value(v) => Term::from(v),
                        })
                        .collect(),
                );
                if direct {
                    atom
                } else {
                    let h = self.head(name, &schema);
                    self.emit(Mode::Box, &h, vec![Literal::pos(atom)]);
                    h
                }
            }
            AlgebraExpr::Select(c, e) => {
                let r = self.node(e)?;
                let h = self.head("sel", &schema);
                let mut body = vec![Literal::pos(r)];
                body.extend(c.to_literals());
                self.emit(Mode::Box, &h, body);
                h
            }
            AlgebraExpr::Project(_, e) => {
                let r = self.node(e)?;
                let h = self.head("proj", &schema);
                self.emit(Mode::Diamond, &h, vec![Literal::pos(r)]);
                h
            }
            AlgebraExpr::Rename { from, to, expr: e } => {
                let r = self.node(e)?;
                if self.opts.paper_rename {
                    let mut head_attrs: Vec<Symbol> = r.distinct_vars().into_iter().filter(|a| a != from).collect();
                    head_attrs.push(to.clone());
                    let h = self.head("ren", &head_attrs);
                    let body = vec![
                        Literal::pos(r),
                        Literal::eq(Term::Var(from.clone()), Term::Var(to.clone())),
                        Literal::let_(to, Value::Null),
                    ];
                    self.emit(Mode::Diamond, &h, body);
                    h
                } else {
                    let renamed = PredAtom::new(
                        r.pred.clone(),
                        r.args
                            .iter()
                            .map(|t| if t.as_var() == Some(from) { Term::Var(to.clone()) } else { t.clone() })
                            .collect(),
                    );
                    let h = self.head("ren", &schema);
                    self.emit(Mode::Diamond, &h, vec![Literal::pos(renamed)]);
                    h
                }
            }
            AlgebraExpr::Union(a, b) => {
                let (r, s) = (self.node(a)?, self.node(b)?);
                self.union_rules(&schema, r, s)
            }
            AlgebraExpr::Join(a, b) => {
                let (r, s) = (self.node(a)?, self.node(b)?);
                self.join_rule(&schema, r, s)
            }
            AlgebraExpr::Minus(a, b) => {
                let (r, s) = (self.node(a)?, self.node(b)?);
                self.minus_rules(r, s)
            }
            AlgebraExpr::LeftJoin(a, b) => {
                let (r, s) = (self.node(a)?, self.node(b)?);
                let j = self.join_rule(&schema, r.clone(), s.clone());
                let m = self.minus_rules(r, s);
                self.union_rules(&schema, j, m)
            }
            AlgebraExpr::Exists { inner, outer, negated } => {
                let r = self.node(outer)?;
                let nested = translate_inner(inner, &mut self.fresh, self.opts)?;
                let h = self.head(if *negated { "notexists" } else { "exists" }, &schema);
                self.emit(Mode::Box, &h, vec![Literal::pos(r), Literal::nested(nested, !negated)]);
                h
            }
        })
    }

    fn join_rule(&mut self, schema: &[Symbol], r: PredAtom, s: PredAtom) -> PredAtom {
        let h = self.head("join", schema);
        self.emit(Mode::Diamond, &h, vec![Literal::pos(r), Literal::pos(s)]);
        h
    }

    fn minus_rules(&mut self, r: PredAtom, s: PredAtom) -> PredAtom {
        let rs = r.distinct_vars();
        let shared = common(&rs, &s.distinct_vars());
        let q = self.head("shared", &shared);
        self.emit(Mode::Box, &q, vec![Literal::pos(s)]);
        let h = self.head("minus", &rs);
        self.emit(Mode::Box, &h, vec![Literal::pos(r), Literal::neg(q)]);
        h
    }

    fn union_rules(&mut self, schema: &[Symbol], r: PredAtom, s: PredAtom) -> PredAtom {
        let h = self.head("union", schema);
        for side in [r, s] {
            let present = side.distinct_vars();
            let mut body = vec![Literal::pos(side)];
            body.extend(schema.iter().filter(|a| !present.contains(a)).map(|a| Literal::let_(a, Value::Null)));
            self.emit(Mode::Diamond, &h, body);
        }
        h
    }
}

/// Every attribute name mentioned anywhere, used as a permissive scope while
/// translating: references outside the local schema become free variables.
fn all_attrs(expr: &AlgebraExpr) -> Vec<Symbol> {
    fn walk(e: &AlgebraExpr, out: &mut BTreeSet<Symbol>) {
        match e {
            AlgebraExpr::Base { args, .. } => out.extend(args.iter().filter_map(|a| match a {
                PatternTerm::Attr(x) => Some(x.clone()),
                PatternTerm::Value(_) => None,
            })),
            AlgebraExpr::Select(c, e) => {
                out.extend(c.attrs());
                walk(e, out)
            }
            AlgebraExpr::Project(a, e) => {
                out.extend(a.iter().cloned());
                walk(e, out)
            }
            AlgebraExpr::Rename { from, to, expr } => {
                out.insert(from.clone());
                out.insert(to.clone());
                walk(expr, out)
            }
            AlgebraExpr::Union(a, b)
            | AlgebraExpr::Join(a, b)
            | AlgebraExpr::Minus(a, b)
            | AlgebraExpr::LeftJoin(a, b)
            | AlgebraExpr::Exists { inner: a, outer: b, .. } => {
                walk(a, out);
                walk(b, out)
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(expr, &mut out);
    out.into_iter().collect()
}

/// Translation of an exists body whose conditions may mention `scope`.
pub(crate) fn translate_in_scope(expr: &AlgebraExpr, scope: &[Symbol], opts: TranslateOptions) -> Result<Query> {
    expr.schema_in(scope)?;
    translate_inner(expr, &mut FreshNames::new(), opts)
}

fn translate_inner(expr: &AlgebraExpr, fresh: &mut FreshNames, opts: TranslateOptions) -> Result<Query> {
    let mut t = Translator { fresh: std::mem::take(fresh), rules: Vec::new(), opts };
    let goal = t.node(expr)?;
    *fresh = t.fresh;
    Ok(Query { goal, program: Program::new(t.rules) })
}

/// Modal Datalog query equivalent to `expr`; attribute names become variables.
pub fn translate_algebra(expr: &AlgebraExpr, opts: TranslateOptions) -> Result<Query> {
    expr.schema()?;
    translate_inner(expr, &mut FreshNames::new(), opts)
}

/// Evaluates the translation of `expr` and reads the answers back as a relation.
pub fn eval_translated(
    expr: &AlgebraExpr,
    db: &Database,
    profile: &SemanticsProfile,
    opts: TranslateOptions,
) -> Result<Relation> {
    let q = translate_algebra(expr, opts)?;
    let facts = modal_answer(&q, db, profile)?;
    Ok(Relation::from_answers(&q.goal, &facts))
}

/// Outcome of comparing direct and translated evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub direct: Relation,
    pub translated: Relation,
    /// Tuples produced by only one side, in the direct schema's column order.
    pub only_direct: Vec<Vec<Value>>,
    pub only_translated: Vec<Vec<Value>>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.only_direct.is_empty() && self.only_translated.is_empty()
    }
}

pub fn check_translation_equivalence(
    expr: &AlgebraExpr,
    db: &Database,
    profile: &SemanticsProfile,
    opts: TranslateOptions,
) -> Result<EquivalenceReport> {
    let direct = eval_with_options(expr, db, profile, opts)?;
    let translated = eval_translated(expr, db, profile, opts)?;
    let aligned = translated.reorder(&direct.schema)?;
    Ok(EquivalenceReport {
        only_direct: direct.tuples.difference(&aligned.tuples).cloned().collect(),
        only_translated: aligned.tuples.difference(&direct.tuples).cloned().collect(),
        direct,
        translated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Value {
        Value::constant(s)
    }

    fn rel(schema: &[&str], rows: &[&[&str]]) -> Relation {
        let to_val = |s: &&str| if *s == "⊥" { Value::Null } else { c(s) };
        Relation::from_rows(schema, rows.iter().map(|r| r.iter().map(to_val).collect()))
    }

    #[test]
    fn join_takes_most_informative_value() {
        let r = rel(&["X"], &[&["a"]]);
        let s = rel(&["X", "Y"], &[&["⊥", "b"]]);
        assert_eq!(join_diamond(&r, &s), rel(&["X", "Y"], &[&["a", "b"]]));
    }

    #[test]
    fn minus_removes_compatible_tuples() {
        let r = rel(&["X"], &[&["a"]]);
        assert_eq!(minus_box(&r, &rel(&["X"], &[&["b"]])), r);
        assert!(minus_box(&r, &rel(&["X"], &[&["⊥"]])).is_empty());
    }

    #[test]
    fn union_pads_with_null() {
        let r = rel(&["X"], &[&["a"]]);
        let s = rel(&["X", "Y"], &[&["b", "c"]]);
        assert_eq!(union(&r, &s), rel(&["X", "Y"], &[&["a", "⊥"], &["b", "c"]]));
    }

    #[test]
    fn select_box_rejects_null_comparisons() {
        let r = rel(&["X", "Y"], &[&["a", "⊥"], &["a", "a"]]);
        let cond = Condition::Eq(Operand::Attr("X".into()), Operand::Attr("Y".into()));
        assert_eq!(select_box(&r, &cond).unwrap(), rel(&["X", "Y"], &[&["a", "a"]]));
    }

    fn example_two() -> AlgebraExpr {
        AlgebraExpr::Join(
            Box::new(AlgebraExpr::base("r", &["X", "Y"])),
            Box::new(AlgebraExpr::Minus(
                Box::new(AlgebraExpr::base("s", &["X", "Y"])),
                Box::new(AlgebraExpr::base("t", &["X", "Z"])),
            )),
        )
    }

    #[test]
    fn example_two_translation_has_three_rules() {
        let q = translate_algebra(&example_two(), TranslateOptions::default()).unwrap();
        assert_eq!(q.program.rules.len(), 3);
        let modes: Vec<_> = q.program.rules.iter().map(|r| r.mode.unwrap()).collect();
        assert_eq!(modes, vec![Mode::Box, Mode::Box, Mode::Diamond]);
    }

    #[test]
    fn base_relation_translates_to_goal_only() {
        let q = translate_algebra(&AlgebraExpr::base("r", &["X"]), TranslateOptions::default()).unwrap();
        assert!(q.program.rules.is_empty());
        assert_eq!(q.goal, PredAtom::with_vars("r", &["X"]));
    }

    #[test]
    fn union_translation_lets_missing_attributes() {
        let e =
            AlgebraExpr::Union(Box::new(AlgebraExpr::base("r", &["X"])), Box::new(AlgebraExpr::base("s", &["X", "Y"])));
        let q = translate_algebra(&e, TranslateOptions::default()).unwrap();
        assert_eq!(q.program.rules[0].body.last(), Some(&Literal::let_("Y", Value::Null)));
        assert_eq!(q.program.rules[1].body.len(), 1);
    }

    #[test]
    fn paper_rename_loses_value() {
        let e =
            AlgebraExpr::Rename { from: "X".into(), to: "Y".into(), expr: Box::new(AlgebraExpr::base("r", &["X"])) };
        let db: Database = [Fact::parse_args("r", &["a"])].into_iter().collect();
        let profile = SemanticsProfile::preset("spec-top-down").unwrap();
        assert!(check_translation_equivalence(&e, &db, &profile, TranslateOptions::default()).unwrap().equivalent());
        let verbatim = TranslateOptions { paper_rename: true };
        assert!(!check_translation_equivalence(&e, &db, &profile, verbatim).unwrap().equivalent());
    }
}
