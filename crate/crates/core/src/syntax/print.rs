//! Printers for the surface syntax. Output re-parses to the same AST.

use std::fmt::{self, Display, Formatter, Write};

use crate::model::{Atom, Fact, Literal, PredAtom, Program, Query, Rule, Term, Value};

pub(crate) fn is_bare_constant(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    s != "null" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn write_constant(f: &mut impl Write, s: &str) -> fmt::Result {
    if is_bare_constant(s) {
        return f.write_str(s);
    }
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

pub(crate) fn write_term(f: &mut impl Write, t: &Term) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(v),
        Term::Const(c) => write_constant(f, c),
        Term::Null => f.write_str("null"),
    }
}

pub(crate) fn write_value(f: &mut impl Write, v: &Value) -> fmt::Result {
    match v {
        Value::Null => f.write_str("null"),
        Value::Const(c) => write_constant(f, c),
    }
}

fn write_atom(f: &mut impl Write, a: &PredAtom) -> fmt::Result {
    write!(f, "{}(", a.pred)?;
    for (i, t) in a.args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_term(f, t)?;
    }
    f.write_char(')')
}

fn write_literal(f: &mut impl Write, lit: &Literal) -> fmt::Result {
    match &lit.atom {
        Atom::Pred(a) => {
            if !lit.positive {
                f.write_char('!')?;
            }
            write_atom(f, a)
        }
        Atom::Eq(l, r) => {
            f.write_str("filter(")?;
            write_term(f, l)?;
            f.write_str(if lit.positive { " = " } else { " != " })?;
            write_term(f, r)?;
            f.write_char(')')
        }
        Atom::Let { target, value } => {
            f.write_str("let(")?;
            write_term(f, target)?;
            f.write_str(" = ")?;
            write_value(f, value)?;
            f.write_char(')')
        }
        Atom::Nested(q) => {
            if !lit.positive {
                f.write_char('!')?;
            }
            f.write_str("exists { ")?;
            write_nested(f, q)?;
            f.write_str(" }")
        }
    }
}

fn write_rule(f: &mut impl Write, rule: &Rule) -> fmt::Result {
    if let Some(mode) = rule.mode {
        write!(f, "{mode}: ")?;
    }
    write_atom(f, &rule.head)?;
    f.write_str(" <-")?;
    for (i, lit) in rule.body.iter().enumerate() {
        f.write_str(if i == 0 { " " } else { ", " })?;
        write_literal(f, lit)?;
    }
    Ok(())
}

fn write_fact(f: &mut impl Write, fact: &Fact) -> fmt::Result {
    write!(f, "{}(", fact.pred)?;
    for (i, v) in fact.args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_value(f, v)?;
    }
    f.write_char(')')
}

/// Nested queries on one line; the goal is implicit when it is the first rule's head.
fn write_nested(f: &mut impl Write, q: &Query) -> fmt::Result {
    let implicit = q.program.rules.first().is_some_and(|r| r.head == q.goal);
    let mut items: Vec<String> = Vec::new();
    if !implicit {
        let mut s = String::from("?- ");
        write_atom(&mut s, &q.goal)?;
        items.push(s);
    }
    for r in &q.program.rules {
        let mut s = String::new();
        write_rule(&mut s, r)?;
        items.push(s);
    }
    for fact in &q.program.facts {
        let mut s = String::new();
        write_fact(&mut s, fact)?;
        items.push(s);
    }
    f.write_str(&items.join(". "))
}

impl Display for PredAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_atom(f, self)
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_literal(f, self)
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_rule(f, self)
    }
}

/// One statement per line, each terminated by `.`: rules first, then facts.
impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            write_rule(f, r)?;
            f.write_str(".\n")?;
        }
        for fact in &self.facts {
            write_fact(f, fact)?;
            f.write_str(".\n")?;
        }
        Ok(())
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("?- ")?;
        write_atom(f, &self.goal)?;
        f.write_str(".\n")?;
        Display::fmt(&self.program, f)
    }
}

macro_rules! debug_via_display {
    ($($t:ty),*) => {$(
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
                Display::fmt(self, f)
            }
        }
    )*};
}

debug_via_display!(PredAtom, Literal, Rule, Program, Query);

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_literal(f, &Literal { atom: self.clone(), positive: true })
    }
}

/// Facts in the facts-file syntax, one per line.
pub fn print_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let mut s = String::new();
    for fact in facts {
        write_fact(&mut s, fact).expect("writing to a String cannot fail");
        s.push_str(".\n");
    }
    s
}
