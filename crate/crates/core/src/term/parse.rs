//! Parser for the ASCII term and query grammar.
//!
//! ```text
//! query   := term (('<=' | '==') term)?
//! term    := join
//! join    := meet ('|' meet)*
//! meet    := res ('&' res)*
//! res     := comp (('\' | '/') comp)?      -- non-associative
//! comp    := postfix ('.'? postfix)*       -- juxtaposition composes
//! postfix := atom ('^' ('o' | 'l' | 'r'))*
//! atom    := 'id' | 'bot' | 'top' | ident | '(' term ')'
//! ```
//!
//! The postfix operations desugar through their definitions:
//! `t^l = id/t`, `t^r = t\id`, `t^o = top\t`.

use std::fmt;

use thiserror::Error;

use super::{Query, Term};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {pos}: {message} (expected {})", expected.join(", "))]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tok {
    Ident,
    KwId,
    KwBot,
    KwTop,
    Amp,
    Pipe,
    Dot,
    Backslash,
    Slash,
    Hat,
    LParen,
    RParen,
    Le,
    EqEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident => "identifier",
            Tok::KwId => "'id'",
            Tok::KwBot => "'bot'",
            Tok::KwTop => "'top'",
            Tok::Amp => "'&'",
            Tok::Pipe => "'|'",
            Tok::Dot => "'.'",
            Tok::Backslash => "'\\'",
            Tok::Slash => "'/'",
            Tok::Hat => "'^'",
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::Le => "'<='",
            Tok::EqEq => "'=='",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Result<Lexer<'a>, ParseError> {
        let mut lx = Lexer { src, pos: 0, tok: Tok::Eof, tok_start: 0, text: "" };
        lx.bump()?;
        Ok(lx)
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::Eof;
            self.text = "";
            return Ok(());
        }
        let c = bytes[self.pos];
        let single = |t| (t, 1);
        let (tok, len) = match c {
            b'&' => single(Tok::Amp),
            b'|' => single(Tok::Pipe),
            b'.' => single(Tok::Dot),
            b'\\' => single(Tok::Backslash),
            b'/' => single(Tok::Slash),
            b'^' => single(Tok::Hat),
            b'(' => single(Tok::LParen),
            b')' => single(Tok::RParen),
            b'<' => {
                if bytes.get(self.pos + 1) == Some(&b'=') {
                    (Tok::Le, 2)
                } else {
                    return Err(self.err_at("stray '<'", vec!["'<='"]));
                }
            }
            b'=' => {
                if bytes.get(self.pos + 1) == Some(&b'=') {
                    (Tok::EqEq, 2)
                } else {
                    return Err(self.err_at("stray '='", vec!["'=='"]));
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos + 1;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let word = &self.src[self.pos..end];
                let tok = match word {
                    "id" => Tok::KwId,
                    "bot" => Tok::KwBot,
                    "top" => Tok::KwTop,
                    _ => Tok::Ident,
                };
                (tok, end - self.pos)
            }
            other => {
                return Err(self.err_at(
                    &format!("unexpected character {:?}", other as char),
                    vec!["a term"],
                ))
            }
        };
        self.tok = tok;
        self.text = &self.src[self.pos..self.pos + len];
        self.pos += len;
        Ok(())
    }

    fn err_at(&self, message: &str, expected: Vec<&'static str>) -> ParseError {
        ParseError { pos: self.tok_start, message: message.to_owned(), expected }
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        let found = if self.tok == Tok::Eof {
            "end of input".to_owned()
        } else {
            format!("{:?}", self.text)
        };
        ParseError { pos: self.tok_start, message: format!("unexpected {found}"), expected }
    }

    fn eat(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.bump()
        } else {
            Err(self.unexpected(vec![expected]))
        }
    }
}

fn starts_atom(tok: Tok) -> bool {
    matches!(tok, Tok::Ident | Tok::KwId | Tok::KwBot | Tok::KwTop | Tok::LParen)
}

fn p_atom(lx: &mut Lexer) -> Result<Term, ParseError> {
    match lx.tok {
        Tok::KwId => {
            lx.bump()?;
            Ok(Term::Id)
        }
        Tok::KwBot => {
            lx.bump()?;
            Ok(Term::Bot)
        }
        Tok::KwTop => {
            lx.bump()?;
            Ok(Term::Top)
        }
        Tok::Ident => {
            let name = lx.text.to_owned();
            lx.bump()?;
            Ok(Term::Var(name))
        }
        Tok::LParen => {
            lx.bump()?;
            let t = p_term(lx)?;
            lx.eat(Tok::RParen, "')'")?;
            Ok(t)
        }
        _ => Err(lx.unexpected(vec!["'id'", "'bot'", "'top'", "identifier", "'('"])),
    }
}

fn p_postfix(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut t = p_atom(lx)?;
    while lx.tok == Tok::Hat {
        lx.bump()?;
        if lx.tok != Tok::Ident {
            return Err(lx.unexpected(vec!["'o'", "'l'", "'r'"]));
        }
        t = match lx.text {
            "o" => Term::uo(t),
            "l" => Term::ul(t),
            "r" => Term::ur(t),
            _ => return Err(lx.unexpected(vec!["'o'", "'l'", "'r'"])),
        };
        lx.bump()?;
    }
    Ok(t)
}

fn p_comp(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut t = p_postfix(lx)?;
    loop {
        if lx.tok == Tok::Dot {
            lx.bump()?;
            let r = p_postfix(lx)?;
            t = Term::comp(t, r);
        } else if starts_atom(lx.tok) {
            let r = p_postfix(lx)?;
            t = Term::comp(t, r);
        } else {
            return Ok(t);
        }
    }
}

fn p_res(lx: &mut Lexer) -> Result<Term, ParseError> {
    let l = p_comp(lx)?;
    match lx.tok {
        Tok::Backslash => {
            lx.bump()?;
            let r = p_comp(lx)?;
            Ok(Term::lres(l, r))
        }
        Tok::Slash => {
            lx.bump()?;
            let r = p_comp(lx)?;
            Ok(Term::rres(l, r))
        }
        _ => Ok(l),
    }
}

fn p_meet(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut t = p_res(lx)?;
    while lx.tok == Tok::Amp {
        lx.bump()?;
        let r = p_res(lx)?;
        t = Term::meet(t, r);
    }
    Ok(t)
}

fn p_term(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut t = p_meet(lx)?;
    while lx.tok == Tok::Pipe {
        lx.bump()?;
        let r = p_meet(lx)?;
        t = Term::join(t, r);
    }
    Ok(t)
}

/// Parses a single term; trailing input is an error.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut lx = Lexer::new(src)?;
    let t = p_term(&mut lx)?;
    if lx.tok != Tok::Eof {
        return Err(lx.unexpected(vec!["end of input"]));
    }
    Ok(t)
}

/// Parses a query: `s <= t`, `s == t`, or a bare term `t` (read as
/// `id <= t`).
pub fn parse_query(src: &str) -> Result<Query, ParseError> {
    let mut lx = Lexer::new(src)?;
    let s = p_term(&mut lx)?;
    let q = match lx.tok {
        Tok::Le => {
            lx.bump()?;
            let t = p_term(&mut lx)?;
            Query::Inequation(s, t)
        }
        Tok::EqEq => {
            lx.bump()?;
            let t = p_term(&mut lx)?;
            Query::Equation(s, t)
        }
        Tok::Eof => Query::Inequation(Term::Id, s),
        _ => return Err(lx.unexpected(vec!["'<='", "'=='", "end of input"])),
    };
    if lx.tok != Tok::Eof {
        return Err(lx.unexpected(vec!["end of input"]));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::BasicTerm;

    #[test]
    fn precedence_examples() {
        let q = parse_query("id <= x \\ x").unwrap();
        assert_eq!(q, Query::Inequation(Term::Id, Term::lres(Term::var("x"), Term::var("x"))));

        let t = parse_term("x (y | z)").unwrap();
        assert_eq!(t, Term::comp(Term::var("x"), Term::join(Term::var("y"), Term::var("z"))));

        // composition binds tighter than residuals, meet tighter than join
        let t = parse_term("x y \\ z & w | v").unwrap();
        assert_eq!(
            t,
            Term::join(
                Term::meet(
                    Term::lres(Term::comp(Term::var("x"), Term::var("y")), Term::var("z")),
                    Term::var("w")
                ),
                Term::var("v")
            )
        );
    }

    #[test]
    fn postfix_desugars_to_residuals() {
        let t = parse_term("x^l").unwrap();
        assert_eq!(t, Term::rres(Term::Id, Term::var("x")));
        let t = parse_term("x^r").unwrap();
        assert_eq!(t, Term::lres(Term::var("x"), Term::Id));
        let t = parse_term("x^o").unwrap();
        assert_eq!(t, Term::lres(Term::Top, Term::var("x")));
        // postfix binds tighter than composition
        let t = parse_term("x y^l").unwrap();
        assert_eq!(t, Term::comp(Term::var("x"), Term::ul(Term::var("y"))));
    }

    #[test]
    fn residuals_are_non_associative() {
        assert!(parse_term("x \\ y \\ z").is_err());
        assert!(parse_term("(x \\ y) \\ z").is_ok());
        assert!(parse_term("x \\ (y \\ z)").is_ok());
    }

    #[test]
    fn dot_composition_is_juxtaposition() {
        assert_eq!(parse_term("x.y.z").unwrap(), parse_term("x y z").unwrap());
        // left-associated
        assert_eq!(
            parse_term("x y z").unwrap(),
            Term::comp(Term::comp(Term::var("x"), Term::var("y")), Term::var("z"))
        );
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let err = parse_term("x &").unwrap_err();
        assert_eq!(err.pos, 3);
        assert!(!err.expected.is_empty());
        let err = parse_query("x < y").unwrap_err();
        assert_eq!(err.pos, 2);
    }

    #[test]
    fn keywords_are_reserved() {
        assert_eq!(parse_term("id").unwrap(), Term::Id);
        assert!(parse_term("ident").map(|t| t == Term::var("ident")).unwrap_or(false));
    }

    #[test]
    fn print_parse_roundtrip_on_samples() {
        let samples = [
            "x | y & z",
            "x (y | z) w",
            "(x \\ y) \\ z",
            "x^l^r^o",
            "(x y)^l",
            "top \\ (x & id)",
            "x / (y | bot)",
            "id",
            "x (y z)",
        ];
        for s in samples {
            let t = parse_term(s).unwrap();
            let printed = t.to_string();
            let back = parse_term(&printed).unwrap();
            assert_eq!(t, back, "roundtrip failed: {s} printed as {printed}");
        }
    }

    #[test]
    fn basic_term_printing_roundtrips_through_the_term_grammar() {
        let t = BasicTerm::comp(
            BasicTerm::ur(BasicTerm::comp(BasicTerm::var("x"), BasicTerm::var("y"))),
            BasicTerm::uo(BasicTerm::Bot),
        );
        let printed = t.to_string();
        assert_eq!(printed, "(x y)^r bot^o");
        let back = parse_term(&printed).unwrap();
        assert_eq!(back, t.to_term());
    }
}
