//! Placement of logical substitutions at chosen points of the dependency tree.
//!
//! The program is first unfolded into a tree (shared intensional subtrees are
//! copied under fresh names). Values for the goal variables are then carried
//! down the tree along the literals that mention them, and each chain stops at
//! a point of the requested placement, or at a leaf: an extensional literal or
//! a let. At the stopping literal `p(t̄)` the literal is replaced by a fresh
//! `w(V̄)` defined by `w(V̄) <- p(t̄), let(X = θ(X)), …`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use tracing::trace;

use super::move_down::MAX_RULES;
use crate::error::{Error, Result};
use crate::model::{Atom, FreshNames, Literal, Mode, PredAtom, Program, Query, Rule, Substitution, Symbol, Value};

/// An edge of the dependency tree: a body literal of a rule of the original
/// program, or the goal itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubstitutionPoint {
    Goal,
    Edge { rule: usize, literal: usize },
}

impl fmt::Display for SubstitutionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstitutionPoint::Goal => f.write_str("goal"),
            SubstitutionPoint::Edge { rule, literal } => write!(f, "{rule}.{literal}"),
        }
    }
}

/// Where the lets of a logical substitution end up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    /// A single wrapper on the goal.
    Top,
    /// At the literals of the goal rules.
    Mid,
    /// At the leaves, continuing a broken chain improperly by variable name.
    Leaves,
    /// At the leaves, following only the logical chain.
    LeavesStrict,
    /// As `Leaves`, plus the lets appended to the goal rules themselves.
    LeavesPlusTop,
    /// At the given edges; chains that meet none of them reach the leaves.
    Points(BTreeSet<SubstitutionPoint>),
}

impl Placement {
    pub fn name(&self) -> String {
        match self {
            Placement::Top => "top".into(),
            Placement::Mid => "mid".into(),
            Placement::Leaves => "leaves".into(),
            Placement::LeavesStrict => "leaves-strict".into(),
            Placement::LeavesPlusTop => "leaves-plus-top".into(),
            Placement::Points(ps) => {
                let items: Vec<String> = ps.iter().map(ToString::to_string).collect();
                format!("points={}", items.join(","))
            }
        }
    }

    /// Parses `top`, `mid`, `leaves`, `leaves-strict`, `leaves-plus-top` or
    /// `points=goal,R.L,…` (rule and literal indices from zero).
    pub fn parse(s: &str) -> Result<Placement> {
        Ok(match s {
            "top" => Placement::Top,
            "mid" => Placement::Mid,
            "leaves" => Placement::Leaves,
            "leaves-strict" => Placement::LeavesStrict,
            "leaves-plus-top" => Placement::LeavesPlusTop,
            _ => {
                let list = s.strip_prefix("points=").ok_or_else(|| Error::InvalidStrategy(s.to_string()))?;
                let mut points = BTreeSet::new();
                for item in list.split(',').filter(|i| !i.is_empty()) {
                    if item == "goal" {
                        points.insert(SubstitutionPoint::Goal);
                        continue;
                    }
                    let bad = || Error::InvalidStrategy(format!("bad substitution point `{item}`"));
                    let (r, l) = item.split_once('.').ok_or_else(bad)?;
                    points.insert(SubstitutionPoint::Edge {
                        rule: r.parse().map_err(|_| bad())?,
                        literal: l.parse().map_err(|_| bad())?,
                    });
                }
                Placement::Points(points)
            }
        })
    }

    fn improper_chain(&self) -> bool {
        matches!(self, Placement::Leaves | Placement::LeavesPlusTop)
    }
}

/// Everything the placement engine needs besides the query.
#[derive(Clone, Debug)]
pub struct PlacementPlan<'a> {
    pub theta: &'a Substitution,
    pub placement: &'a Placement,
    /// Variables substituted improperly: wherever such a name occurs
    /// positively in a rule without being carried there, its value is carried
    /// from that rule down to the leaves.
    pub improper: BTreeSet<Symbol>,
    /// Mode of the generated wrapper rules (`◇` for modal programs).
    pub wrapper_mode: Option<Mode>,
}

struct Node {
    origin: usize,
    rule: Rule,
    children: BTreeMap<usize, Vec<usize>>,
}

#[derive(Clone, Debug)]
struct Carry {
    var: Symbol,
    value: Value,
    logical: bool,
}

fn unfold(query: &Query, fresh: &mut FreshNames) -> Result<(Vec<Node>, Vec<usize>)> {
    let program = &query.program;
    let idb = program.intensional();
    let mut used: BTreeSet<Symbol> = [query.goal.pred.clone()].into();
    let mut nodes: Vec<Node> = Vec::new();
    let mut queue = VecDeque::new();
    for (i, r) in program.rules_for(&query.goal.pred) {
        queue.push_back(nodes.len());
        nodes.push(Node { origin: i, rule: r.clone(), children: BTreeMap::new() });
    }
    let roots: Vec<usize> = (0..nodes.len()).collect();
    while let Some(n) = queue.pop_front() {
        for li in 0..nodes[n].rule.body.len() {
            let Atom::Pred(a) = &nodes[n].rule.body[li].atom else { continue };
            if !idb.contains(&a.pred) {
                continue;
            }
            let pred = a.pred.clone();
            let name = if used.insert(pred.clone()) { pred.clone() } else { fresh.fresh(&pred) };
            used.insert(name.clone());
            if let Atom::Pred(a) = &mut nodes[n].rule.body[li].atom {
                a.pred = name.clone();
            }
            let mut kids = Vec::new();
            for (j, r) in program.rules_for(&pred) {
                let mut rule = r.clone();
                rule.head.pred = name.clone();
                kids.push(nodes.len());
                queue.push_back(nodes.len());
                nodes.push(Node { origin: j, rule, children: BTreeMap::new() });
            }
            if nodes.len() > MAX_RULES {
                return Err(Error::InvalidStrategy(format!("unfolded program exceeds {MAX_RULES} rules")));
            }
            nodes[n].children.insert(li, kids);
        }
    }
    Ok((nodes, roots))
}

/// Carries translated through a literal into the head of a defining rule.
fn carry_into(carries: &[Carry], lit: &PredAtom, head: &PredAtom) -> Vec<Carry> {
    let mut out: Vec<Carry> = Vec::new();
    for c in carries {
        for (t, h) in lit.args.iter().zip(&head.args) {
            if t.as_var() == Some(&c.var) {
                let var = h.as_var().expect("head arguments are variables").clone();
                let carry = Carry { var, value: c.value.clone(), logical: c.logical };
                if !out.iter().any(|o| o.var == carry.var && o.value == carry.value && o.logical == carry.logical) {
                    out.push(carry);
                }
            }
        }
    }
    out
}

struct Placer<'a> {
    nodes: &'a [Node],
    plan: &'a PlacementPlan<'a>,
    improper_names: BTreeSet<Symbol>,
    wraps: BTreeMap<(usize, usize), Vec<(Symbol, Value)>>,
}

impl Placer<'_> {
    fn stops_at(&self, origin: usize, literal: usize, depth: usize) -> bool {
        match self.plan.placement {
            Placement::Mid => depth == 1,
            Placement::Points(ps) => ps.contains(&SubstitutionPoint::Edge { rule: origin, literal }),
            _ => false,
        }
    }

    fn wrap(&mut self, node: usize, literal: usize, carries: &[&Carry]) {
        let entry = self.wraps.entry((node, literal)).or_default();
        for c in carries {
            let item = (c.var.clone(), c.value.clone());
            if !entry.contains(&item) {
                entry.push(item);
            }
        }
    }

    fn visit(&mut self, n: usize, mut carried: Vec<Carry>, depth: usize) {
        let node = &self.nodes[n];
        let positive = node.rule.positive_vars();
        for name in &self.improper_names {
            if positive.contains(name) && !carried.iter().any(|c| &c.var == name) {
                if let Some(value) = self.plan.theta.get(name) {
                    trace!(rule = node.origin, variable = %name, "improper substitution");
                    carried.push(Carry { var: name.clone(), value: value.clone(), logical: false });
                }
            }
        }
        for (li, lit) in node.rule.body.iter().enumerate() {
            let here: Vec<&Carry> = carried.iter().filter(|c| lit.mentions(&c.var)).collect();
            match &lit.atom {
                Atom::Pred(a) => {
                    let Some(kids) = node.children.get(&li) else {
                        if lit.positive && !here.is_empty() {
                            self.wrap(n, li, &here);
                        }
                        continue;
                    };
                    let (stop, go): (Vec<&Carry>, Vec<&Carry>) =
                        here.into_iter().partition(|c| c.logical && self.stops_at(node.origin, li, depth));
                    if lit.positive && !stop.is_empty() {
                        self.wrap(n, li, &stop);
                    }
                    let go: Vec<Carry> = go.into_iter().cloned().collect();
                    for &kid in kids {
                        let next = carry_into(&go, a, &self.nodes[kid].rule.head);
                        self.visit(kid, next, depth + 1);
                    }
                }
                Atom::Let { .. } if lit.positive && !here.is_empty() => self.wrap(n, li, &here),
                _ => {}
            }
        }
    }
}

/// Places the logical substitution of the goal variables bound by `plan.theta`
/// (and any improper substitutions requested) into `query`.
pub fn place_substitution(query: &Query, plan: &PlacementPlan<'_>, fresh: &mut FreshNames) -> Result<Query> {
    let goal_lets: Vec<(Symbol, Value)> =
        query.goal_vars().into_iter().filter_map(|v| plan.theta.get(&v).map(|val| (v.clone(), val.clone()))).collect();
    let goal_is_edb = !query.program.intensional().contains(&query.goal.pred);
    let at_top = match plan.placement {
        Placement::Top => true,
        Placement::Points(ps) => ps.contains(&SubstitutionPoint::Goal),
        _ => false,
    } || goal_is_edb;

    let (mut nodes, roots) = unfold(query, fresh)?;
    let mut improper_names = plan.improper.clone();
    if plan.placement.improper_chain() {
        improper_names.extend(goal_lets.iter().map(|(v, _)| v.clone()));
    }
    let mut placer = Placer { nodes: &nodes, plan, improper_names, wraps: BTreeMap::new() };
    let goal_carries: Vec<Carry> =
        goal_lets.iter().map(|(v, val)| Carry { var: v.clone(), value: val.clone(), logical: true }).collect();
    for &root in &roots {
        let carried = if at_top { Vec::new() } else { carry_into(&goal_carries, &query.goal, &nodes[root].rule.head) };
        placer.visit(root, carried, 1);
    }
    let wraps = placer.wraps;

    if matches!(plan.placement, Placement::LeavesPlusTop) && !at_top {
        for &root in &roots {
            let extra = carry_into(&goal_carries, &query.goal, &nodes[root].rule.head);
            for c in extra {
                nodes[root].rule.body.push(Literal::let_(&c.var, c.value));
            }
        }
    }

    let mut wrappers = Vec::new();
    for ((n, li), lets) in wraps {
        let lit = nodes[n].rule.body[li].clone();
        let mut vars: Vec<Symbol> = Vec::new();
        for v in lit.own_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let base = lit.pred_atom().map(|a| a.pred.clone()).unwrap_or_else(|| Symbol::new("let"));
        let head = PredAtom::with_vars(fresh.fresh(&base), &vars);
        trace!(rule = nodes[n].origin, literal = li, wrapper = %head, "substitution point");
        let mut body = vec![lit];
        body.extend(lets.into_iter().map(|(v, val)| Literal::let_(&v, val)));
        wrappers.push(Rule { mode: plan.wrapper_mode, head: head.clone(), body });
        nodes[n].rule.body[li] = Literal::pos(head);
    }

    let mut rules: Vec<Rule> = nodes.into_iter().map(|n| n.rule).collect();
    rules.extend(wrappers);
    let mut goal = query.goal.clone();
    if at_top && !goal_lets.is_empty() {
        let head = PredAtom::new(fresh.fresh(&goal.pred), goal.args.clone());
        trace!(wrapper = %head, "substitution point at goal");
        let mut body = vec![Literal::pos(goal.clone())];
        body.extend(goal_lets.iter().map(|(v, val)| Literal::let_(v, val.clone())));
        rules.push(Rule { mode: plan.wrapper_mode, head: head.clone(), body });
        goal = head;
    }
    Ok(Query { goal, program: Program { rules, facts: query.program.facts.clone() } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::answer;
    use crate::model::{Database, Fact};

    fn atom(p: &str, vars: &[&str]) -> PredAtom {
        PredAtom::with_vars(p, vars)
    }

    fn chain() -> Query {
        Query::new(
            atom("p", &["X"]),
            Program::new(vec![
                Rule::new(atom("p", &["X"]), vec![Literal::pos(atom("q", &["X"]))]),
                Rule::new(atom("q", &["Y"]), vec![Literal::pos(atom("e", &["Y"]))]),
            ]),
        )
    }

    fn place(q: &Query, placement: Placement) -> Query {
        let theta = Substitution::from_pairs(&[("X", Value::constant("a"))]);
        let plan =
            PlacementPlan { theta: &theta, placement: &placement, improper: BTreeSet::new(), wrapper_mode: None };
        place_substitution(q, &plan, &mut FreshNames::for_query(q)).unwrap()
    }

    #[test]
    fn placements_agree_without_nulls() {
        let db: Database = [Fact::parse_args("e", &["a"]), Fact::parse_args("e", &["b"])].into_iter().collect();
        let q = chain();
        for p in [Placement::Top, Placement::Mid, Placement::Leaves, Placement::LeavesPlusTop, Placement::LeavesStrict]
        {
            let out = place(&q, p.clone());
            let ans = answer(&out, &db).unwrap();
            assert_eq!(ans.len(), 1, "{}", p.name());
        }
    }

    #[test]
    fn leaves_wrap_extensional_literal() {
        let out = place(&chain(), Placement::Leaves);
        let wrapper = out.program.rules.last().unwrap();
        assert_eq!(wrapper.body[0], Literal::pos(atom("e", &["Y"])));
        assert_eq!(wrapper.body[1], Literal::let_("Y", Value::constant("a")));
    }

    #[test]
    fn placement_names_round_trip() {
        for s in ["top", "mid", "leaves", "leaves-strict", "leaves-plus-top", "points=goal,0.1"] {
            assert_eq!(Placement::parse(s).unwrap().name(), s);
        }
        assert!(Placement::parse("sideways").is_err());
    }
}
