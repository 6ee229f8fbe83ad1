use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::{Atom, FreshNames, Literal, Program, Rule, Symbol, Term, Value};

/// Upper bound on the number of rules after subtree copying.
pub const MAX_RULES: usize = 10_000;

/// Result of one move-down step.
#[derive(Clone, Debug)]
pub struct MoveDown {
    pub program: Program,
    /// Lets added by the step, as (rule index, variable) in the new program.
    pub placed: Vec<(usize, Symbol)>,
    /// For each rule of the new program, the rule of the input it derives from.
    pub lineage: Vec<usize>,
}

/// Predicates that head some rule but occur in no body.
pub fn roots(program: &Program) -> BTreeSet<Symbol> {
    let used: BTreeSet<&Symbol> =
        program.rules.iter().flat_map(|r| r.body.iter().filter_map(|l| l.pred_atom().map(|a| &a.pred))).collect();
    program.intensional().into_iter().filter(|p| !used.contains(p)).collect()
}

/// Indices of `start` and every rule reachable below it through intensional predicates.
fn subtree(program: &Program, start: usize) -> Vec<usize> {
    let mut seen: BTreeSet<usize> = [start].into();
    let mut queue: VecDeque<usize> = [start].into();
    while let Some(i) = queue.pop_front() {
        for lit in &program.rules[i].body {
            if let Atom::Pred(a) = &lit.atom {
                for (j, _) in program.rules_for(&a.pred) {
                    if seen.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    seen.into_iter().collect()
}

fn rename_preds(rule: &Rule, map: &BTreeMap<Symbol, Symbol>) -> Rule {
    let rename = |p: &Symbol| map.get(p).cloned().unwrap_or_else(|| p.clone());
    let mut out = rule.clone();
    out.head.pred = rename(&rule.head.pred);
    for lit in &mut out.body {
        if let Atom::Pred(a) = &mut lit.atom {
            a.pred = rename(&a.pred);
        }
    }
    out
}

/// Relocates the let literal on `var` in rule `rule` one level down the
/// dependency tree.
///
/// Every positive intensional literal of the rule mentioning `var` gets a fresh
/// predicate whose defining rules are deep copies (with consistently renamed
/// intensional predicates) of the originals, each carrying the let on the
/// head variables at the positions where `var` occurred. Rules no longer
/// reachable from the program's roots are dropped.
pub fn move_down(program: &Program, rule: usize, var: &str, fresh: &mut FreshNames) -> Result<MoveDown> {
    let original = program.rules.get(rule).ok_or(Error::NoSuchRule(rule))?;
    let let_pos = original
        .body
        .iter()
        .position(|l| l.positive && matches!(&l.atom, Atom::Let { target: Term::Var(v), .. } if &**v == var))
        .ok_or_else(|| Error::LetNotFound { rule, variable: Symbol::new(var) })?;
    let value: Value = match &original.body[let_pos].atom {
        Atom::Let { value, .. } => value.clone(),
        _ => unreachable!(),
    };
    let idb = program.intensional();
    let targets: Vec<usize> = original
        .body
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_positive_pred())
        .filter(|(_, l)| {
            let a = l.pred_atom().expect("predicate literal");
            idb.contains(&a.pred) && a.args.iter().any(|t| t.as_var().is_some_and(|v| &**v == var))
        })
        .map(|(i, _)| i)
        .collect();
    if targets.is_empty() {
        return Err(Error::NothingBelow { rule, variable: Symbol::new(var) });
    }

    let keep_roots = roots(program);
    let mut rules = program.rules.clone();
    let mut lineage: Vec<usize> = (0..rules.len()).collect();
    let mut placed = Vec::new();
    let mut updated = original.clone();
    for &i in &targets {
        let atom = updated.body[i].pred_atom().expect("predicate literal").clone();
        let renamed = fresh.fresh(&atom.pred);
        let positions: Vec<usize> = atom
            .args
            .iter()
            .enumerate()
            .filter(|(_, t)| t.as_var().is_some_and(|v| &**v == var))
            .map(|(j, _)| j)
            .collect();
        for (k, def) in program.rules_for(&atom.pred) {
            let tree = subtree(program, k);
            let mut map: BTreeMap<Symbol, Symbol> = [(atom.pred.clone(), renamed.clone())].into();
            for &t in &tree {
                let p = &program.rules[t].head.pred;
                if !map.contains_key(p) {
                    map.insert(p.clone(), fresh.fresh(p));
                }
            }
            for &t in &tree {
                let mut copy = rename_preds(&program.rules[t], &map);
                if t == k {
                    for &j in &positions {
                        let z = def.head.args[j].as_var().expect("head arguments are variables").clone();
                        copy.body.push(Literal::let_(&z, value.clone()));
                        placed.push((rules.len(), z));
                    }
                }
                rules.push(copy);
                lineage.push(t);
            }
        }
        if let Atom::Pred(a) = &mut updated.body[i].atom {
            a.pred = renamed;
        }
    }
    updated.body.remove(let_pos);
    rules[rule] = updated;
    if rules.len() > MAX_RULES {
        return Err(Error::InvalidStrategy(format!("move-down copies exceed {MAX_RULES} rules")));
    }

    // Garbage-collect rules unreachable from the original roots.
    let candidate = Program { rules, facts: program.facts.clone() };
    let mut reachable: BTreeSet<Symbol> = keep_roots;
    let mut frontier: Vec<Symbol> = reachable.iter().cloned().collect();
    while let Some(p) = frontier.pop() {
        for (_, r) in candidate.rules_for(&p) {
            for lit in &r.body {
                if let Atom::Pred(a) = &lit.atom {
                    if reachable.insert(a.pred.clone()) {
                        frontier.push(a.pred.clone());
                    }
                }
            }
        }
    }
    let mut index = vec![None; candidate.rules.len()];
    let mut kept = Vec::new();
    let mut kept_lineage = Vec::new();
    for (i, r) in candidate.rules.into_iter().enumerate() {
        if reachable.contains(&r.head.pred) {
            index[i] = Some(kept.len());
            kept.push(r);
            kept_lineage.push(lineage[i]);
        }
    }
    let placed = placed.into_iter().filter_map(|(i, z)| index[i].map(|n| (n, z))).collect();
    Ok(MoveDown { program: Program { rules: kept, facts: candidate.facts }, placed, lineage: kept_lineage })
}

/// Repeatedly moves the given lets down, breadth first, until each sits in a
/// rule where its variable touches only extensional predicates, or until
/// `limit` successful steps have been made.
pub fn move_down_all(
    program: &Program,
    lets: Vec<(usize, Symbol)>,
    limit: Option<usize>,
    fresh: &mut FreshNames,
) -> Result<Program> {
    let mut program = program.clone();
    let mut pending: VecDeque<(usize, Symbol)> = lets.into();
    let mut steps = 0;
    while limit.is_none_or(|l| steps < l) {
        let Some((rule, var)) = pending.pop_front() else { break };
        match move_down(&program, rule, &var, fresh) {
            Ok(step) => {
                let mut next: VecDeque<(usize, Symbol)> = VecDeque::new();
                for (old, v) in &pending {
                    for (new, &from) in step.lineage.iter().enumerate() {
                        if from == *old {
                            next.push_back((new, v.clone()));
                        }
                    }
                }
                next.extend(step.placed);
                pending = next;
                program = step.program;
                steps += 1;
            }
            Err(Error::NothingBelow { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(program)
}
