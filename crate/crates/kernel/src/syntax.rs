//! Concrete syntax for terms.
//!
//! ```text
//! (x:T)U      dependent product        T -> U    non-dependent product
//! [x:T]u      abstraction              (f a b)   application
//! Prop Type   sorts                    (x,y:T)U  several binders
//! ```
//!
//! The lexer and the [`Parser`] cursor are public so that the vernacular
//! can parse instructions over the same token stream.

use std::fmt;

use thiserror::Error;

use crate::term::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(Name),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Colon,
    ColonEq,
    Comma,
    Arrow,
    Dot,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(n) => write!(f, "identifier `{n}`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::LBrack => f.write_str("`[`"),
            Token::RBrack => f.write_str("`]`"),
            Token::Colon => f.write_str("`:`"),
            Token::ColonEq => f.write_str("`:=`"),
            Token::Comma => f.write_str("`,`"),
            Token::Arrow => f.write_str("`->`"),
            Token::Dot => f.write_str("`.`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub pos: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens, skipping whitespace and `(* ... *)` comments
/// (which nest). The result always ends with `Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(ParseError { line: pos.line, col: pos.col, message: "unterminated comment".into() });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    if depth == 0 {
                        break;
                    }
                } else {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                advance(&mut i, &mut line, &mut col);
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Spanned { token: Token::Ident(Name::from(s)), pos });
            continue;
        }
        let (token, width) = match c {
            '(' => (Token::LParen, 1),
            ')' => (Token::RParen, 1),
            '[' => (Token::LBrack, 1),
            ']' => (Token::RBrack, 1),
            ',' => (Token::Comma, 1),
            '.' => (Token::Dot, 1),
            ':' if chars.get(i + 1) == Some(&'=') => (Token::ColonEq, 2),
            ':' => (Token::Colon, 1),
            '-' if chars.get(i + 1) == Some(&'>') => (Token::Arrow, 2),
            other => {
                return Err(ParseError {
                    line: pos.line,
                    col: pos.col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        for _ in 0..width {
            advance(&mut i, &mut line, &mut col);
        }
        out.push(Spanned { token, pos });
    }
    out.push(Spanned { token: Token::Eof, pos: Pos { line, col } });
    Ok(out)
}

/// Cursor over a token stream.
pub struct Parser<'t> {
    toks: &'t [Spanned],
    pos: usize,
}

impl<'t> Parser<'t> {
    pub fn new(toks: &'t [Spanned]) -> Self {
        assert!(matches!(toks.last(), Some(Spanned { token: Token::Eof, .. })), "token stream must end with Eof");
        Parser { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos].token
    }

    pub fn peek_at(&self, k: usize) -> &Token {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].token
    }

    pub fn position(&self) -> Pos {
        self.toks[self.pos].pos
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Token::Eof)
    }

    pub fn advance(&mut self) -> &Token {
        let t = &self.toks[self.pos].token;
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let p = self.position();
        ParseError { line: p.line, col: p.col, message: message.into() }
    }

    pub fn expect(&mut self, tok: &Token) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    pub fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Token::Ident(n) if !is_reserved(&n) => {
                self.advance();
                Ok(n)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    /// `ident (, ident)*`
    pub fn ident_list(&mut self) -> Result<Vec<Name>, ParseError> {
        let mut names = vec![self.expect_ident()?];
        while self.eat(&Token::Comma) {
            names.push(self.expect_ident()?);
        }
        Ok(names)
    }

    pub fn parse_term(&mut self) -> Result<Term, ParseError> {
        let lhs = self.application()?;
        if self.eat(&Token::Arrow) {
            let rhs = self.parse_term()?;
            return Ok(Term::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Token::Ident(_) | Token::LParen | Token::LBrack)
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        if !self.starts_atom() {
            return Err(self.error(format!("expected a term, found {}", self.peek())));
        }
        let mut t = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    fn binder_group(&mut self, close: &Token) -> Result<(Vec<Name>, Term), ParseError> {
        let names = self.ident_list()?;
        self.expect(&Token::Colon)?;
        let domain = self.parse_term()?;
        self.expect(close)?;
        Ok((names, domain))
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Token::Ident(n) => {
                self.advance();
                Ok(match &*n {
                    "Prop" => Term::prop(),
                    "Type" => Term::ty(),
                    _ => Term::Free(n),
                })
            }
            Token::LBrack => {
                self.advance();
                let (names, domain) = self.binder_group(&Token::RBrack)?;
                let body = self.parse_term()?;
                Ok(names.iter().rev().fold(body, |acc, n| Term::lam(n, domain.clone(), &acc)))
            }
            Token::LParen => {
                let is_binder = matches!(self.peek_at(1), Token::Ident(n) if !is_reserved(n))
                    && matches!(self.peek_at(2), Token::Colon | Token::Comma);
                self.advance();
                if is_binder {
                    let (names, domain) = self.binder_group(&Token::RParen)?;
                    let body = self.parse_term()?;
                    Ok(names.iter().rev().fold(body, |acc, n| Term::pi(n, domain.clone(), &acc)))
                } else {
                    let t = self.parse_term()?;
                    self.expect(&Token::RParen)?;
                    Ok(t)
                }
            }
            other => Err(self.error(format!("expected a term, found {other}"))),
        }
    }
}

pub fn is_reserved(name: &str) -> bool {
    matches!(name, "Prop" | "Type")
}

/// Parses a complete term. Identifiers not bound by a binder become free
/// variables.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(&toks);
    let t = p.parse_term()?;
    if !p.at_eof() {
        return Err(p.error(format!("unexpected {} after term", p.peek())));
    }
    Ok(t)
}
