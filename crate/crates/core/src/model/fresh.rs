use super::program::{Atom, Program, Query};
use super::term::{Symbol, Term};

/// Generator of fresh predicate and variable names.
///
/// Fresh names have the shape `_<root>_<n>` with a counter that is monotone
/// per generator; user names never start with `_`, and a generator seeded from
/// a query starts above every counter already present in it.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    next: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        FreshNames::default()
    }

    pub fn for_query(query: &Query) -> Self {
        let mut gen = FreshNames::new();
        gen.observe_query(query);
        gen
    }

    pub fn for_program(program: &Program) -> Self {
        let mut gen = FreshNames::new();
        gen.observe_program(program);
        gen
    }

    /// Fresh name derived from `base`, e.g. `q` becomes `_q_3`.
    pub fn fresh(&mut self, base: &str) -> Symbol {
        let n = self.next;
        self.next += 1;
        Symbol::from(format!("_{}_{}", root(base), n))
    }

    pub fn observe_query(&mut self, query: &Query) {
        self.observe(&query.goal.pred);
        for t in &query.goal.args {
            self.observe_term(t);
        }
        self.observe_program(&query.program);
    }

    pub fn observe_program(&mut self, program: &Program) {
        for f in &program.facts {
            self.observe(&f.pred);
        }
        for rule in &program.rules {
            self.observe(&rule.head.pred);
            for t in &rule.head.args {
                self.observe_term(t);
            }
            for lit in &rule.body {
                match &lit.atom {
                    Atom::Pred(a) => {
                        self.observe(&a.pred);
                        a.args.iter().for_each(|t| self.observe_term(t));
                    }
                    Atom::Eq(l, r) => {
                        self.observe_term(l);
                        self.observe_term(r);
                    }
                    Atom::Let { target, .. } => self.observe_term(target),
                    Atom::Nested(q) => self.observe_query(q),
                }
            }
        }
    }

    fn observe_term(&mut self, t: &Term) {
        if let Term::Var(v) = t {
            self.observe(v);
        }
    }

    fn observe(&mut self, name: &str) {
        if let Some(n) = counter(name) {
            self.next = self.next.max(n + 1);
        }
    }
}

fn counter(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('_')?;
    let (_, digits) = rest.rsplit_once('_')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn root(name: &str) -> &str {
    match name.strip_prefix('_') {
        Some(rest) if counter(name).is_some() => rest.rsplit_once('_').map(|(r, _)| r).unwrap_or(rest),
        _ => name,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PredAtom, Rule};

    #[test]
    fn fresh_names_do_not_repeat_roots() {
        let mut g = FreshNames::new();
        let a = g.fresh("q");
        let b = g.fresh(&a);
        assert_eq!(&*a, "_q_0");
        assert_eq!(&*b, "_q_1");
    }

    #[test]
    fn seeded_generator_skips_existing_counters() {
        let q = Query::new(
            PredAtom::with_vars("_p_7", &["X"]),
            Program::new(vec![Rule::new(PredAtom::with_vars("_p_7", &["X"]), vec![])]),
        );
        let mut g = FreshNames::for_query(&q);
        assert_eq!(&*g.fresh("p"), "_p_8");
    }
}
