//! `FILTER EXISTS` semantics parameterized by three knobs: the free-variable
//! policy, improper substitution, and where the outer substitution is placed.
//! Named presets emulate the behaviors of common SPARQL engines.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::algebra::{eval_with_options, translate_in_scope, AlgebraExpr, Relation, TranslateOptions};
use crate::datalog::NestedSemantics;
use crate::error::{Error, Result};
use crate::modal::modal_answer;
use crate::model::{
    Atom, Database, FreshNames, Literal, Mode, PredAtom, Query, Rule, Substitution, Symbol, Term, Value,
};
use crate::nesting::{all_free_variables, free_in_rule, place_substitution, Placement, PlacementPlan};

/// Treatment of inner variables that occur only in filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FreeVarPolicy {
    /// Free variables take the outer value of the same name.
    Correlate,
    /// Free variables are renamed apart and pinned to `⊥`.
    Decorrelate,
}

impl fmt::Display for FreeVarPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FreeVarPolicy::Correlate => "correlate",
            FreeVarPolicy::Decorrelate => "decorrelate",
        })
    }
}

/// One of the three knobs of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Knob {
    FreeVarPolicy,
    ImproperSubstitution,
    SubstitutionPoints,
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Knob::FreeVarPolicy => "free_var_policy",
            Knob::ImproperSubstitution => "improper_substitution",
            Knob::SubstitutionPoints => "substitution_points",
        })
    }
}

/// A semantics for nested queries in modal programs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticsProfile {
    pub name: String,
    pub free_var_policy: FreeVarPolicy,
    pub improper: bool,
    pub points: Placement,
}

/// Names of the built-in presets.
pub const PRESETS: [&str; 6] = ["fuseki", "blazegraph", "virtuoso", "rdf4j", "spec-top-down", "spec-bottom-up"];

impl SemanticsProfile {
    pub fn new(name: impl Into<String>, free_var_policy: FreeVarPolicy, improper: bool, points: Placement) -> Self {
        SemanticsProfile { name: name.into(), free_var_policy, improper, points }
    }

    /// A named preset.
    pub fn preset(name: &str) -> Result<Self> {
        use FreeVarPolicy::*;
        let (policy, improper, points) = match name {
            "fuseki" => (Decorrelate, true, Placement::Leaves),
            "blazegraph" => (Correlate, true, Placement::Leaves),
            "rdf4j" => (Correlate, false, Placement::Mid),
            "virtuoso" => (Correlate, false, Placement::LeavesPlusTop),
            "spec-top-down" => (Correlate, false, Placement::Top),
            "spec-bottom-up" => (Correlate, false, Placement::LeavesStrict),
            _ => return Err(Error::UnknownProfile(name.to_string())),
        };
        Ok(SemanticsProfile::new(name, policy, improper, points))
    }

    /// A preset name, or a custom profile written
    /// `policy/improper-flag/placement`, e.g. `correlate/on/points=goal,0.1`.
    pub fn parse(s: &str) -> Result<Self> {
        if let Ok(p) = Self::preset(s) {
            return Ok(p);
        }
        let parts: Vec<&str> = s.splitn(3, '/').collect();
        let [policy, improper, points] = parts[..] else {
            return Err(Error::UnknownProfile(s.to_string()));
        };
        let policy = match policy {
            "correlate" => FreeVarPolicy::Correlate,
            "decorrelate" => FreeVarPolicy::Decorrelate,
            _ => return Err(Error::UnknownProfile(s.to_string())),
        };
        let improper = match improper {
            "on" => true,
            "off" => false,
            _ => return Err(Error::UnknownProfile(s.to_string())),
        };
        let points = Placement::parse(points).map_err(|_| Error::UnknownProfile(s.to_string()))?;
        Ok(SemanticsProfile::new(s, policy, improper, points))
    }

    /// The profile with `knob` set to its value in `other`.
    pub fn with_knob_from(&self, knob: Knob, other: &SemanticsProfile) -> SemanticsProfile {
        let mut p = self.clone();
        p.name = format!("{}[{knob}]", self.name);
        match knob {
            Knob::FreeVarPolicy => p.free_var_policy = other.free_var_policy,
            Knob::ImproperSubstitution => p.improper = other.improper,
            Knob::SubstitutionPoints => p.points = other.points.clone(),
        }
        p
    }

    /// Knobs on which the two profiles differ.
    pub fn differing_knobs(&self, other: &SemanticsProfile) -> Vec<Knob> {
        let mut out = Vec::new();
        if self.free_var_policy != other.free_var_policy {
            out.push(Knob::FreeVarPolicy);
        }
        if self.improper != other.improper {
            out.push(Knob::ImproperSubstitution);
        }
        if self.points != other.points {
            out.push(Knob::SubstitutionPoints);
        }
        out
    }
}

impl fmt::Display for SemanticsProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, improper {}, {})",
            self.name,
            self.free_var_policy,
            if self.improper { "on" } else { "off" },
            self.points.name()
        )
    }
}

impl NestedSemantics for SemanticsProfile {
    fn instantiate(&self, theta: &Substitution, nested: &Query) -> Result<Query> {
        apply_profile_substitution(theta, nested, self)
    }
}

/// Renames `from` to `to` where it is free in `rule`, descending into nested
/// queries only where the variable is free as well.
fn rename_free(rule: &mut Rule, from: &Symbol, to: &Symbol) {
    let swap = |t: &mut Term| {
        if t.as_var() == Some(from) {
            *t = Term::Var(to.clone());
        }
    };
    for lit in &mut rule.body {
        match &mut lit.atom {
            Atom::Pred(a) => a.args.iter_mut().for_each(swap),
            Atom::Eq(l, r) => {
                swap(l);
                swap(r);
            }
            Atom::Let { target, .. } => swap(target),
            Atom::Nested(q) => {
                for inner in &mut q.program.rules {
                    if free_in_rule(inner).contains(from) {
                        rename_free(inner, from, to);
                    }
                }
            }
        }
    }
}

/// Applies the outer substitution `theta` to the nested query `inner` the way
/// `profile` prescribes.
///
/// Free variables are correlated (substituted syntactically, `⊥` when `theta`
/// has no value) or renamed apart and pinned to `⊥`. Goal variables are then
/// substituted logically at the profile's substitution points with `◇`
/// wrappers; with improper substitution enabled, bound names that are neither
/// goal variables nor free are pinned as well wherever they occur positively.
pub fn apply_profile_substitution(theta: &Substitution, inner: &Query, profile: &SemanticsProfile) -> Result<Query> {
    let free = all_free_variables(inner);
    let mut fresh = FreshNames::for_query(inner);
    let mut program = inner.program.clone();
    for rule in &mut program.rules {
        for v in free_in_rule(rule) {
            match profile.free_var_policy {
                FreeVarPolicy::Correlate => {
                    let value = theta.get(&v).cloned().unwrap_or(Value::Null);
                    rule.body.push(Literal::let_(&v, value));
                }
                FreeVarPolicy::Decorrelate => {
                    let renamed = fresh.fresh(&v);
                    rename_free(rule, &v, &renamed);
                    rule.body.push(Literal::let_(&renamed, Value::Null));
                }
            }
        }
    }
    let query = Query { goal: inner.goal.clone(), program };
    let goal: BTreeSet<Symbol> = query.goal_vars().into_iter().collect();
    let improper = if profile.improper {
        theta.vars().filter(|v| !goal.contains(*v) && !free.contains(*v)).cloned().collect()
    } else {
        BTreeSet::new()
    };
    let plan = PlacementPlan { theta, placement: &profile.points, improper, wrapper_mode: Some(Mode::Diamond) };
    place_substitution(&query, &plan, &mut fresh)
}

/// The outer tuple as a substitution; unbound attributes map to `⊥`.
pub fn tuple_substitution(schema: &[Symbol], tuple: &[Value]) -> Substitution {
    schema.iter().cloned().zip(tuple.iter().cloned()).collect()
}

/// The exists rule `□(p(T̄) <- r(T̄), [¬](L,P))` over the outer relation's
/// atom, together with the correlation map: for every outer attribute, the
/// inner rules (by index) where a variable of that name occurs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistsTranslation {
    pub rule: Rule,
    pub correlation: BTreeMap<Symbol, Vec<usize>>,
}

pub fn translate_exists(head: PredAtom, outer: PredAtom, inner: Query, negated: bool) -> ExistsTranslation {
    let mut correlation = BTreeMap::new();
    for v in outer.distinct_vars() {
        let rules: Vec<usize> = inner
            .program
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.own_vars().contains(&v) || r.head.args.iter().any(|t| t.as_var() == Some(&v)))
            .map(|(i, _)| i)
            .collect();
        if !rules.is_empty() || inner.goal.args.iter().any(|t| t.as_var() == Some(&v)) {
            correlation.insert(v, rules);
        }
    }
    let rule = Rule::modal(Mode::Box, head, vec![Literal::pos(outer), Literal::nested(inner, !negated)]);
    ExistsTranslation { rule, correlation }
}

/// Keeps the tuples of `outer` for which `inner` has a solution (none, when
/// `negated`) under `profile`.
pub fn eval_exists_filter(
    outer: &Relation,
    inner: &AlgebraExpr,
    negated: bool,
    profile: &SemanticsProfile,
    db: &Database,
    opts: TranslateOptions,
) -> Result<Relation> {
    let query = translate_in_scope(inner, &outer.schema, opts)?;
    let mut out = Relation::new(outer.schema.clone());
    for t in &outer.tuples {
        let theta = tuple_substitution(&outer.schema, t);
        let instantiated = apply_profile_substitution(&theta, &query, profile)?;
        let nonempty = !modal_answer(&instantiated, db, profile)?.is_empty();
        if nonempty != negated {
            out.tuples.insert(t.clone());
        }
    }
    Ok(out)
}

/// A disagreement between two profiles on one tuple, with the knobs whose
/// individual toggle (from `from` towards `to`) reproduces `to`'s outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribution {
    pub tuple: Vec<Value>,
    pub from: String,
    pub to: String,
    pub knobs: Vec<Knob>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileComparison {
    pub schema: Vec<Symbol>,
    pub profiles: Vec<String>,
    /// Every tuple produced by some profile, with membership per profile.
    pub matrix: BTreeMap<Vec<Value>, Vec<bool>>,
    pub attributions: Vec<Attribution>,
}

impl ProfileComparison {
    pub fn all_agree(&self) -> bool {
        self.matrix.values().all(|row| row.iter().all(|&b| b == row[0]))
    }

    /// The answer of the profile at `index`.
    pub fn answer(&self, index: usize) -> BTreeSet<Vec<Value>> {
        self.matrix.iter().filter(|(_, row)| row[index]).map(|(t, _)| t.clone()).collect()
    }
}

/// Evaluates `expr` under every profile and attributes each disagreement.
pub fn compare_profiles(
    expr: &AlgebraExpr,
    db: &Database,
    profiles: &[SemanticsProfile],
    opts: TranslateOptions,
) -> Result<ProfileComparison> {
    let mut results = Vec::new();
    for p in profiles {
        results.push(eval_with_options(expr, db, p, opts)?);
    }
    let schema = results.first().map(|r| r.schema.clone()).unwrap_or_else(|| expr.schema().unwrap_or_default());
    let mut matrix: BTreeMap<Vec<Value>, Vec<bool>> = BTreeMap::new();
    for (i, r) in results.iter().enumerate() {
        for t in &r.tuples {
            matrix.entry(t.clone()).or_insert_with(|| vec![false; profiles.len()])[i] = true;
        }
    }
    let mut toggled: BTreeMap<(usize, Knob, usize), Relation> = BTreeMap::new();
    let mut attributions = Vec::new();
    for (tuple, row) in &matrix {
        for i in 0..profiles.len() {
            for j in i + 1..profiles.len() {
                if row[i] == row[j] {
                    continue;
                }
                let mut knobs = Vec::new();
                for knob in profiles[i].differing_knobs(&profiles[j]) {
                    let toggled = match toggled.entry((i, knob, j)) {
                        Entry::Occupied(e) => e.into_mut(),
                        Entry::Vacant(e) => {
                            let p = profiles[i].with_knob_from(knob, &profiles[j]);
                            e.insert(eval_with_options(expr, db, &p, opts)?)
                        }
                    };
                    if toggled.tuples.contains(tuple) == row[j] {
                        knobs.push(knob);
                    }
                }
                attributions.push(Attribution {
                    tuple: tuple.clone(),
                    from: profiles[i].name.clone(),
                    to: profiles[j].name.clone(),
                    knobs,
                });
            }
        }
    }
    Ok(ProfileComparison { schema, profiles: profiles.iter().map(|p| p.name.clone()).collect(), matrix, attributions })
}
