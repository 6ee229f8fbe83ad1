//! Tokenizer shared by the three surface grammars, with 1-based positions.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Identifier: letters, digits, `_` and inner `-`.
    Ident(String),
    /// Quoted string with escapes resolved.
    Str(String),
    /// `⊥`
    Bottom,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Eq,
    Neq,
    Bang,
    Arrow,
    Query,
    At,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Bottom => "`⊥`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Query => "`?-`".into(),
            Tok::At => "`@`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    let syntax = |line, col, expected: &str| Error::Syntax { line, col, expected: expected.to_string() };
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        let tok = if c.is_alphanumeric() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| c.is_alphanumeric() || c == '_' || c == '-') {
                s.push(bump(&mut chars).unwrap());
            }
            Tok::Ident(s)
        } else if c == '"' {
            bump(&mut chars);
            let mut s = String::new();
            loop {
                match bump(&mut chars) {
                    None => return Err(syntax(l, k, "closing `\"`")),
                    Some('"') => break,
                    Some('\\') => match bump(&mut chars) {
                        Some('n') => s.push('\n'),
                        Some(e @ ('"' | '\\')) => s.push(e),
                        _ => return Err(syntax(line, col, "escape sequence `\\\"`, `\\\\` or `\\n`")),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            Tok::Str(s)
        } else {
            bump(&mut chars);
            match c {
                '⊥' => Tok::Bottom,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                '=' => Tok::Eq,
                '@' => Tok::At,
                '!' if chars.peek() == Some(&'=') => {
                    bump(&mut chars);
                    Tok::Neq
                }
                '!' => Tok::Bang,
                '<' if chars.peek() == Some(&'-') => {
                    bump(&mut chars);
                    Tok::Arrow
                }
                '?' if chars.peek() == Some(&'-') => {
                    bump(&mut chars);
                    Tok::Query
                }
                _ => return Err(syntax(l, k, "a token")),
            }
        };
        out.push(Token { tok, line: l, col: k });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Cursor over a token stream.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self> {
        Ok(Cursor { toks: tokenize(text)?, pos: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    pub(crate) fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub(crate) fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, expected: &str) -> Error {
        let (line, col) = self.here();
        Error::Syntax { line, col, expected: format!("{expected}, found {}", self.peek().describe()) }
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.peek() == &Tok::Eof
    }
}

pub(crate) fn is_variable(name: &str) -> bool {
    name.starts_with(|c: char| c.is_uppercase() || c == '_')
}
