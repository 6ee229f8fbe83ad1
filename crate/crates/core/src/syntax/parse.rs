//! Parsers for facts files and (nested, modal) Datalog programs.

use std::collections::BTreeMap;

use super::lexer::{is_variable, Cursor, Tok};
use crate::error::{Error, Result};
use crate::model::{Database, Fact, Literal, Mode, PredAtom, Program, Query, Rule, Symbol, Term, Value};

/// A facts file: the database plus declared relation schemas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactsFile {
    pub database: Database,
    /// Attribute names declared with `@schema pred(A, B).`
    pub schemas: BTreeMap<Symbol, Vec<Symbol>>,
}

fn value(c: &mut Cursor, what: &str) -> Result<Value> {
    match c.peek().clone() {
        Tok::Bottom => {
            c.next();
            Ok(Value::Null)
        }
        Tok::Str(s) => {
            c.next();
            Ok(Value::constant(s))
        }
        Tok::Ident(s) if s == "null" => {
            c.next();
            Ok(Value::Null)
        }
        Tok::Ident(s) => {
            c.next();
            Ok(Value::constant(s))
        }
        _ => Err(c.error(what)),
    }
}

fn term(c: &mut Cursor) -> Result<Term> {
    match c.peek().clone() {
        Tok::Ident(s) if is_variable(&s) => {
            c.next();
            Ok(Term::Var(Symbol::from(s)))
        }
        _ => value(c, "a term").map(Term::from),
    }
}

/// `(item, item, …)`, or nothing at all for a nullary atom.
fn arg_list<T>(c: &mut Cursor, mut item: impl FnMut(&mut Cursor) -> Result<T>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    if !c.eat(&Tok::LParen) {
        return Ok(out);
    }
    if c.eat(&Tok::RParen) {
        return Ok(out);
    }
    loop {
        out.push(item(c)?);
        if c.eat(&Tok::RParen) {
            return Ok(out);
        }
        if !c.eat(&Tok::Comma) {
            return Err(c.error("`,` or `)`"));
        }
    }
}

fn predicate_name(c: &mut Cursor) -> Result<String> {
    match c.peek() {
        Tok::Ident(s) if !is_variable(s) || s.starts_with('_') => c.ident("a predicate name"),
        _ => Err(c.error("a predicate name")),
    }
}

/// Parses a facts file: `pred(term, …).` per statement, `@schema` declarations
/// and `#` comments. Bare identifiers are constants whatever their case.
pub fn parse_facts_file(text: &str) -> Result<FactsFile> {
    let mut c = Cursor::new(text)?;
    let mut out = FactsFile::default();
    let mut arity: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut check = |pred: &Symbol, n: usize| match arity.insert(pred.clone(), n) {
        Some(m) if m != n => Err(Error::ArityMismatch { predicate: pred.clone(), expected: m, found: n }),
        _ => Ok(()),
    };
    while !c.at_eof() {
        if c.eat(&Tok::At) {
            let kw = c.ident("`schema`")?;
            if kw != "schema" {
                return Err(c.error("`schema`"));
            }
            let pred = Symbol::from(predicate_name(&mut c)?);
            let attrs = arg_list(&mut c, |c| {
                let a = c.ident("an attribute name")?;
                if !is_variable(&a) {
                    return Err(c.error("an uppercase attribute name"));
                }
                Ok(Symbol::from(a))
            })?;
            check(&pred, attrs.len())?;
            out.schemas.insert(pred, attrs);
        } else {
            let pred = Symbol::from(predicate_name(&mut c)?);
            let args = arg_list(&mut c, |c| value(c, "a constant or `null`"))?;
            check(&pred, args.len())?;
            out.database.insert(Fact::new(pred, args));
        }
        c.expect(&Tok::Dot)?;
    }
    Ok(out)
}

pub fn parse_facts(text: &str) -> Result<Database> {
    parse_facts_file(text).map(|f| f.database)
}

/// A parsed program with its goal, if one was given with `?-`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedProgram {
    pub program: Program,
    pub goal: Option<PredAtom>,
}

impl ParsedProgram {
    /// The query, with the given goal or else the head of the first rule.
    pub fn into_query(self) -> Result<Query> {
        let goal = match self.goal {
            Some(g) => g,
            None => self.program.rules.first().map(|r| r.head.clone()).ok_or_else(|| Error::Syntax {
                line: 1,
                col: 1,
                expected: "a goal `?- p(X).` or a rule".into(),
            })?,
        };
        Ok(Query::new(goal, self.program))
    }
}

struct ProgramParser {
    cursor: Cursor,
    /// Whether the first rule seen was modal.
    modal: Option<bool>,
}

enum Statement {
    Goal(PredAtom),
    Rule(Rule),
    Fact(Fact),
}

impl ProgramParser {
    fn atom(&mut self) -> Result<PredAtom> {
        let pred = predicate_name(&mut self.cursor)?;
        let args = arg_list(&mut self.cursor, term)?;
        Ok(PredAtom::new(pred, args))
    }

    fn literal(&mut self) -> Result<Literal> {
        let c = &mut self.cursor;
        let positive = !c.eat(&Tok::Bang);
        let keyword = match c.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(c.error("a literal")),
        };
        let lit = match keyword.as_str() {
            "filter" if c.peek_at(1) == &Tok::LParen => {
                c.next();
                c.next();
                let l = term(c)?;
                let eq = match c.next() {
                    Tok::Eq => true,
                    Tok::Neq => false,
                    _ => return Err(c.error("`=` or `!=`")),
                };
                let r = term(c)?;
                c.expect(&Tok::RParen)?;
                if eq == positive {
                    Literal::eq(l, r)
                } else {
                    Literal::neq(l, r)
                }
            }
            "let" if c.peek_at(1) == &Tok::LParen => {
                c.next();
                c.next();
                let v = c.ident("a variable")?;
                if !is_variable(&v) {
                    return Err(c.error("a variable"));
                }
                c.expect(&Tok::Eq)?;
                let val = value(c, "a constant or `null`")?;
                c.expect(&Tok::RParen)?;
                if !positive {
                    return Err(c.error("a positive let"));
                }
                Literal::let_(v, val)
            }
            "exists" if c.peek_at(1) == &Tok::LBrace => {
                c.next();
                c.next();
                let q = self.nested()?;
                self.cursor.expect(&Tok::RBrace)?;
                Literal::nested(q, positive)
            }
            _ => {
                let a = self.atom()?;
                if positive {
                    Literal::pos(a)
                } else {
                    Literal::neg(a)
                }
            }
        };
        Ok(lit)
    }

    fn statement(&mut self) -> Result<Statement> {
        if self.cursor.eat(&Tok::Query) {
            return self.atom().map(Statement::Goal);
        }
        let (line, col) = self.cursor.here();
        let mode = match (self.cursor.peek(), self.cursor.peek_at(1)) {
            (Tok::Ident(m), Tok::Colon) if m == "box" || m == "diamond" => {
                let m = if m == "box" { Mode::Box } else { Mode::Diamond };
                self.cursor.next();
                self.cursor.next();
                Some(m)
            }
            _ => None,
        };
        let head = self.atom()?;
        if !self.cursor.eat(&Tok::Arrow) {
            if mode.is_none() {
                if let Some(fact) = head.to_fact() {
                    return Ok(Statement::Fact(fact));
                }
            }
            return Err(self.cursor.error("`<-`"));
        }
        match self.modal {
            None => self.modal = Some(mode.is_some()),
            Some(m) if m != mode.is_some() => return Err(Error::MixedModes { line, col }),
            _ => {}
        }
        let mut body = Vec::new();
        if !matches!(self.cursor.peek(), Tok::Dot | Tok::RBrace | Tok::Eof) {
            loop {
                body.push(self.literal()?);
                if !self.cursor.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(Statement::Rule(Rule { mode, head, body }))
    }

    /// Statements separated by `.` up to `}` or the end of input.
    fn statements(&mut self) -> Result<ParsedProgram> {
        let mut program = Program::default();
        let mut goal = None;
        while !matches!(self.cursor.peek(), Tok::RBrace | Tok::Eof) {
            match self.statement()? {
                Statement::Goal(g) => {
                    if goal.is_some() {
                        return Err(self.cursor.error("a single goal"));
                    }
                    goal = Some(g)
                }
                Statement::Rule(r) => program.rules.push(r),
                Statement::Fact(f) => program.facts.push(f),
            }
            if !self.cursor.eat(&Tok::Dot) && !matches!(self.cursor.peek(), Tok::RBrace) {
                return Err(self.cursor.error("`.`"));
            }
        }
        Ok(ParsedProgram { program, goal })
    }

    fn nested(&mut self) -> Result<Query> {
        let (line, col) = self.cursor.here();
        let parsed = self.statements()?;
        parsed.into_query().map_err(|_| Error::Syntax { line, col, expected: "a nested query".into() })
    }
}

/// Parses a program in the rule syntax: optional `box:`/`diamond:` prefixes,
/// `head <- lit, …` rules, ground facts and an optional `?- goal.`
pub fn parse_program(text: &str) -> Result<ParsedProgram> {
    let mut p = ProgramParser { cursor: Cursor::new(text)?, modal: None };
    let parsed = p.statements()?;
    if !p.cursor.at_eof() {
        return Err(p.cursor.error("a statement"));
    }
    Ok(parsed)
}

/// Parses a query: a program with a goal, by default the first rule's head.
pub fn parse_query(text: &str) -> Result<Query> {
    parse_program(text)?.into_query()
}

/// Parses a single atom such as `p(X, Y)`.
pub fn parse_atom(text: &str) -> Result<PredAtom> {
    let mut p = ProgramParser { cursor: Cursor::new(text)?, modal: None };
    let a = p.atom()?;
    p.cursor.eat(&Tok::Dot);
    if !p.cursor.at_eof() {
        return Err(p.cursor.error("end of input"));
    }
    Ok(a)
}
