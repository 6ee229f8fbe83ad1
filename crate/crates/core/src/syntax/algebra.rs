//! Prefix s-expression syntax for algebra expressions.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Formatter};

use super::lexer::{is_variable, Cursor, Tok};
use super::print::write_value;
use crate::algebra::{AlgebraExpr, Condition, Operand, PatternTerm};
use crate::error::{Error, Result};
use crate::model::{Symbol, Value};

/// Relation schemas available to bare relation names.
pub type Schemas = BTreeMap<Symbol, Vec<Symbol>>;

struct AlgebraParser<'a> {
    cursor: Cursor,
    schemas: &'a Schemas,
}

impl AlgebraParser<'_> {
    fn attr(&mut self) -> Result<Symbol> {
        let a = self.cursor.ident("an attribute")?;
        if !is_variable(&a) {
            return Err(self.cursor.error("an uppercase attribute"));
        }
        Ok(Symbol::from(a))
    }

    fn operand(&mut self) -> Result<Operand> {
        let c = &mut self.cursor;
        Ok(match c.peek().clone() {
            Tok::Ident(s) if is_variable(&s) => {
                c.next();
                Operand::Attr(Symbol::from(s))
            }
            Tok::Ident(s) if s == "null" => {
                c.next();
                Operand::Value(Value::Null)
            }
            Tok::Bottom => {
                c.next();
                Operand::Value(Value::Null)
            }
            Tok::Ident(s) | Tok::Str(s) => {
                c.next();
                Operand::Value(Value::constant(s))
            }
            _ => return Err(c.error("an attribute or constant")),
        })
    }

    fn condition(&mut self) -> Result<Condition> {
        self.cursor.expect(&Tok::LParen)?;
        let cond = match self.cursor.next() {
            Tok::Eq => Condition::Eq(self.operand()?, self.operand()?),
            Tok::Neq => Condition::Neq(self.operand()?, self.operand()?),
            Tok::Ident(s) if s == "and" => {
                let mut c = self.condition()?;
                while self.cursor.peek() == &Tok::LParen {
                    c = Condition::And(Box::new(c), Box::new(self.condition()?));
                }
                c
            }
            _ => return Err(self.cursor.error("`=`, `!=` or `and`")),
        };
        self.cursor.expect(&Tok::RParen)?;
        Ok(cond)
    }

    fn bare(&mut self, name: String) -> Result<AlgebraExpr> {
        let attrs = self
            .schemas
            .get(name.as_str())
            .ok_or_else(|| Error::SchemaMismatch(format!("unknown relation `{name}` (declare it with @schema)")))?;
        Ok(AlgebraExpr::Base { name: name.into(), args: attrs.iter().cloned().map(PatternTerm::Attr).collect() })
    }

    fn expr(&mut self) -> Result<AlgebraExpr> {
        if let Tok::Ident(name) = self.cursor.peek().clone() {
            self.cursor.next();
            return self.bare(name);
        }
        self.cursor.expect(&Tok::LParen)?;
        let op = self.cursor.ident("an operator or relation name")?;
        let boxed = |p: &mut Self| p.expr().map(Box::new);
        let e = match op.as_str() {
            "select-box" => AlgebraExpr::Select(self.condition()?, boxed(self)?),
            "project" => {
                self.cursor.expect(&Tok::LParen)?;
                let mut attrs = Vec::new();
                while !self.cursor.eat(&Tok::RParen) {
                    attrs.push(self.attr()?);
                }
                AlgebraExpr::Project(attrs, boxed(self)?)
            }
            "rename" => AlgebraExpr::Rename { from: self.attr()?, to: self.attr()?, expr: boxed(self)? },
            "union" => AlgebraExpr::Union(boxed(self)?, boxed(self)?),
            "join" => AlgebraExpr::Join(boxed(self)?, boxed(self)?),
            "minus" => AlgebraExpr::Minus(boxed(self)?, boxed(self)?),
            "left-outer-join" => AlgebraExpr::LeftJoin(boxed(self)?, boxed(self)?),
            "exists" | "not-exists" => {
                AlgebraExpr::Exists { inner: boxed(self)?, outer: boxed(self)?, negated: op == "not-exists" }
            }
            _ => {
                let mut args = Vec::new();
                while self.cursor.peek() != &Tok::RParen {
                    args.push(match self.operand()? {
                        Operand::Attr(a) => PatternTerm::Attr(a),
                        Operand::Value(v) => PatternTerm::Value(v),
                    });
                }
                if let Some(s) = self.schemas.get(op.as_str()) {
                    if s.len() != args.len() {
                        return Err(Error::SchemaMismatch(format!(
                            "relation `{op}` has {} attributes, pattern has {}",
                            s.len(),
                            args.len()
                        )));
                    }
                }
                AlgebraExpr::Base { name: op.into(), args }
            }
        };
        self.cursor.expect(&Tok::RParen)?;
        Ok(e)
    }
}

/// Parses and schema-checks an algebra expression. Bare relation names take
/// their attributes from `schemas`; patterns such as `(corpMail X "*.com")`
/// name them inline.
pub fn parse_algebra(text: &str, schemas: &Schemas) -> Result<AlgebraExpr> {
    let mut p = AlgebraParser { cursor: Cursor::new(text)?, schemas };
    let e = p.expr()?;
    if !p.cursor.at_eof() {
        return Err(p.cursor.error("end of input"));
    }
    e.schema()?;
    Ok(e)
}

fn write_operand(f: &mut Formatter<'_>, o: &Operand) -> fmt::Result {
    match o {
        Operand::Attr(a) => f.write_str(a),
        Operand::Value(v) => write_value(f, v),
    }
}

impl Display for Condition {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Eq(a, b) | Condition::Neq(a, b) => {
                f.write_str(if matches!(self, Condition::Eq(..)) { "(= " } else { "(!= " })?;
                write_operand(f, a)?;
                f.write_str(" ")?;
                write_operand(f, b)?;
                f.write_str(")")
            }
            Condition::And(a, b) => write!(f, "(and {a} {b})"),
        }
    }
}

impl Display for AlgebraExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraExpr::Base { name, args } => {
                write!(f, "({name}")?;
                for a in args {
                    f.write_str(" ")?;
                    match a {
                        PatternTerm::Attr(x) => f.write_str(x)?,
                        PatternTerm::Value(v) => write_value(f, v)?,
                    }
                }
                f.write_str(")")
            }
            AlgebraExpr::Select(c, e) => write!(f, "(select-box {c} {e})"),
            AlgebraExpr::Project(attrs, e) => {
                let names: Vec<&str> = attrs.iter().map(|a| a.as_str()).collect();
                write!(f, "(project ({}) {e})", names.join(" "))
            }
            AlgebraExpr::Rename { from, to, expr } => write!(f, "(rename {from} {to} {expr})"),
            AlgebraExpr::Union(a, b) => write!(f, "(union {a} {b})"),
            AlgebraExpr::Join(a, b) => write!(f, "(join {a} {b})"),
            AlgebraExpr::Minus(a, b) => write!(f, "(minus {a} {b})"),
            AlgebraExpr::LeftJoin(a, b) => write!(f, "(left-outer-join {a} {b})"),
            AlgebraExpr::Exists { inner, outer, negated } => {
                write!(f, "({} {inner} {outer})", if *negated { "not-exists" } else { "exists" })
            }
        }
    }
}
