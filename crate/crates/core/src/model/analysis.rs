//! Static checks shared by every evaluator: safety, arity, dependency graph
//! and stratification of non-recursive programs.

use std::collections::{BTreeMap, BTreeSet};

use super::fresh::FreshNames;
use super::program::{Atom, Fact, Literal, PredAtom, Program, Query, Rule};
use super::term::{Symbol, Term};
use crate::error::{Error, Result};

/// Variables of the rule itself (head, predicates, filters, lets) that do not
/// occur positively. Variables appearing only inside nested queries are exempt.
pub fn unsafe_variables(rule: &Rule) -> Vec<Symbol> {
    let positive = rule.positive_vars();
    rule.own_vars().into_iter().filter(|v| !positive.contains(v)).collect()
}

pub fn check_safety(rule: &Rule) -> Result<()> {
    let vars = unsafe_variables(rule);
    if vars.is_empty() {
        Ok(())
    } else {
        Err(Error::Unsafe { rule: rule.to_string(), variables: vars })
    }
}

/// Checks head shape, safety and arity agreement of every rule of `program`.
pub fn validate_program(program: &Program) -> Result<()> {
    let mut arity: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut note = |a: &PredAtom| -> Result<()> {
        match arity.get(&a.pred) {
            Some(&n) if n != a.arity() => {
                Err(Error::ArityMismatch { predicate: a.pred.clone(), expected: n, found: a.arity() })
            }
            Some(_) => Ok(()),
            None => {
                arity.insert(a.pred.clone(), a.arity());
                Ok(())
            }
        }
    };
    for f in &program.facts {
        note(&f.to_atom())?;
    }
    for rule in &program.rules {
        if !rule.head.args.iter().all(Term::is_var) {
            return Err(Error::NonVariableHead { head: rule.head.to_string() });
        }
        note(&rule.head)?;
        for lit in &rule.body {
            if let Atom::Pred(a) = &lit.atom {
                note(a)?;
            }
        }
        check_safety(rule)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dependency {
    pub from: Symbol,
    pub to: Symbol,
    pub negative: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<Symbol>,
    pub arcs: BTreeSet<Dependency>,
}

impl DependencyGraph {
    pub fn successors<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a Symbol> + 'a {
        self.arcs.iter().filter(move |a| &*a.from == pred).map(|a| &a.to)
    }

    pub fn predecessors<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a Symbol> + 'a {
        self.arcs.iter().filter(move |a| &*a.to == pred).map(|a| &a.from)
    }

    /// Pairs `(from, to)` ignoring polarity.
    pub fn edges(&self) -> BTreeSet<(Symbol, Symbol)> {
        self.arcs.iter().map(|a| (a.from.clone(), a.to.clone())).collect()
    }
}

/// Arc `p1 → p2` for each rule with `p1` in the body and `p2` in the head.
/// Nested-query atoms contribute no arcs.
pub fn dependency_graph(program: &Program) -> DependencyGraph {
    let mut g = DependencyGraph::default();
    for rule in &program.rules {
        g.nodes.insert(rule.head.pred.clone());
        for lit in &rule.body {
            if let Atom::Pred(a) = &lit.atom {
                g.nodes.insert(a.pred.clone());
                g.arcs.insert(Dependency { from: a.pred.clone(), to: rule.head.pred.clone(), negative: !lit.positive });
            }
        }
    }
    g
}

/// Evaluation order of a non-recursive program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strata {
    /// Stratum of each predicate; extensional predicates sit at 0.
    pub level: BTreeMap<Symbol, usize>,
    /// Rule indices grouped by the stratum of their head, lowest first.
    pub rules: Vec<Vec<usize>>,
}

pub fn stratify(program: &Program) -> Result<Strata> {
    let graph = dependency_graph(program);
    let mut level: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut on_stack: Vec<Symbol> = Vec::new();

    fn visit(
        pred: &Symbol,
        graph: &DependencyGraph,
        level: &mut BTreeMap<Symbol, usize>,
        on_stack: &mut Vec<Symbol>,
    ) -> Result<usize> {
        if let Some(&l) = level.get(pred) {
            return Ok(l);
        }
        if let Some(pos) = on_stack.iter().position(|p| p == pred) {
            let mut cycle = on_stack[pos..].to_vec();
            cycle.push(pred.clone());
            return Err(Error::RecursiveProgram { cycle });
        }
        on_stack.push(pred.clone());
        let preds: Vec<Symbol> = graph.predecessors(pred).cloned().collect();
        let mut l = 0;
        for p in &preds {
            l = l.max(visit(p, graph, level, on_stack)? + 1);
        }
        on_stack.pop();
        level.insert(pred.clone(), l);
        Ok(l)
    }

    for node in &graph.nodes {
        visit(node, &graph, &mut level, &mut on_stack)?;
    }
    let top = level.values().copied().max().unwrap_or(0);
    let mut rules = vec![Vec::new(); top + 1];
    for (i, rule) in program.rules.iter().enumerate() {
        rules[level[&rule.head.pred]].push(i);
    }
    rules.retain(|s| !s.is_empty());
    Ok(Strata { level, rules })
}

/// Replaces every `let(Y=t)` of `rule` by `l(Y)` for a fresh `l`, adding `l(t)` to the program.
pub fn desugar_let(rule: &Rule, program: &Program, fresh: &mut FreshNames) -> (Rule, Program) {
    let mut program = program.clone();
    let body = rule
        .body
        .iter()
        .map(|lit| match &lit.atom {
            Atom::Let { target, value } => {
                let pred = fresh.fresh("l");
                program.add_fact(Fact::new(pred.clone(), vec![value.clone()]));
                Literal::pos(PredAtom::new(pred, vec![target.clone()]))
            }
            _ => lit.clone(),
        })
        .collect();
    (Rule { mode: rule.mode, head: rule.head.clone(), body }, program)
}

/// Desugars every let literal of every rule of the query's own program.
pub fn desugar_query_lets(query: &Query) -> Query {
    let mut fresh = FreshNames::for_query(query);
    let mut program = Program { rules: Vec::new(), facts: query.program.facts.clone() };
    for rule in &query.program.rules {
        let (r, p) = desugar_let(rule, &program, &mut fresh);
        program = p;
        program.rules.push(r);
    }
    Query { goal: query.goal.clone(), program }
}
