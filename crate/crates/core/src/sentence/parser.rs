//! Recursive-descent parser for the sentence language.
//!
//! ```text
//! sentence := clause | "!" sentence | sentence ("&&"|"||") sentence | "(" sentence ")"
//! clause   := "EXIST" INT "BALL" "r=" INT body+
//! body     := "{" formula "}"
//! formula  := atom | "!" formula | formula ("&"|"|") formula | "(" formula ")"
//! atom     := "C(" INT ("," INT)* ")"
//! ```
//!
//! `!` binds tightest, then `&`/`&&`, then `|`/`||`; binary operators
//! associate to the left. `#` starts a comment running to the end of line.

use crate::error::{Error, Result};
use crate::torus::{BallTemplate, Lattice};

use super::ast::{BasicLocalSentence, Formula, LocalFormula, Sentence};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(i64),
    Bang,
    Amp,
    AmpAmp,
    Bar,
    BarBar,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Eq,
    Minus,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::AmpAmp => "`&&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::BarBar => "`||`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Minus => "`-`".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<(Vec<(Tok, Pos)>, Pos)> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
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
        let tok = match c {
            '!' => {
                bump(&mut chars);
                Tok::Bang
            }
            '&' => {
                bump(&mut chars);
                if chars.peek() == Some(&'&') {
                    bump(&mut chars);
                    Tok::AmpAmp
                } else {
                    Tok::Amp
                }
            }
            '|' => {
                bump(&mut chars);
                if chars.peek() == Some(&'|') {
                    bump(&mut chars);
                    Tok::BarBar
                } else {
                    Tok::Bar
                }
            }
            '(' | ')' | '{' | '}' | ',' | '=' | '-' => {
                bump(&mut chars);
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    '=' => Tok::Eq,
                    _ => Tok::Minus,
                }
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    digits.push(bump(&mut chars).unwrap());
                }
                Tok::Int(
                    digits
                        .parse()
                        .map_err(|_| syntax(pos, format!("integer {digits} too large")))?,
                )
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while chars
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
                {
                    word.push(bump(&mut chars).unwrap());
                }
                Tok::Word(word)
            }
            other => return Err(syntax(pos, format!("unexpected character {other:?}"))),
        };
        out.push((tok, pos));
    }
    Ok((out, Pos { line, column }))
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    lattice: &'a Lattice,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<()> {
        let pos = self.pos();
        match self.next() {
            Some(ref t) if t == want => Ok(()),
            Some(t) => Err(syntax(
                pos,
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(syntax(
                pos,
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<()> {
        self.expect(&Tok::Word(word.into()))
    }

    fn unsigned(&mut self) -> Result<usize> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Int(i)) => Ok(i as usize),
            Some(t) => Err(syntax(pos, format!("expected integer, found {}", t.describe()))),
            None => Err(syntax(pos, "expected integer, found end of input")),
        }
    }

    fn signed(&mut self) -> Result<i64> {
        if self.peek() == Some(&Tok::Minus) {
            self.next();
            Ok(-(self.unsigned()? as i64))
        } else {
            Ok(self.unsigned()? as i64)
        }
    }

    fn sentence(&mut self) -> Result<Sentence> {
        let mut lhs = self.sentence_and()?;
        while self.peek() == Some(&Tok::BarBar) {
            self.next();
            lhs = lhs.or(self.sentence_and()?);
        }
        Ok(lhs)
    }

    fn sentence_and(&mut self) -> Result<Sentence> {
        let mut lhs = self.sentence_unary()?;
        while self.peek() == Some(&Tok::AmpAmp) {
            self.next();
            lhs = lhs.and(self.sentence_unary()?);
        }
        Ok(lhs)
    }

    fn sentence_unary(&mut self) -> Result<Sentence> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Bang) => {
                self.next();
                Ok(self.sentence_unary()?.not())
            }
            Some(Tok::LParen) => {
                self.next();
                let s = self.sentence()?;
                self.expect(&Tok::RParen)?;
                Ok(s)
            }
            Some(Tok::Word(w)) if w == "EXIST" => Ok(Sentence::Basic(self.clause()?)),
            Some(t) => Err(syntax(
                pos,
                format!("expected `EXIST`, `!` or `(`, found {}", t.describe()),
            )),
            None => Err(syntax(pos, "expected a sentence, found end of input")),
        }
    }

    fn clause(&mut self) -> Result<BasicLocalSentence> {
        self.expect_word("EXIST")?;
        let m_pos = self.pos();
        let m = self.unsigned()?;
        if m == 0 {
            return Err(syntax(m_pos, "witness count must be at least 1"));
        }
        self.expect_word("BALL")?;
        self.expect_word("r")?;
        self.expect(&Tok::Eq)?;
        let radius = self.unsigned()?;
        let template = self.lattice.ball(radius);
        let mut psis = Vec::new();
        while self.peek() == Some(&Tok::LBrace) {
            self.next();
            let formula = self.formula()?;
            self.expect(&Tok::RBrace)?;
            psis.push(LocalFormula::with_template(formula, &template)?);
        }
        if psis.is_empty() {
            return Err(syntax(self.pos(), "expected `{` starting a formula body"));
        }
        if psis.len() != m {
            return Err(Error::BodyCount {
                declared: m,
                found: psis.len(),
            });
        }
        BasicLocalSentence::new(radius, psis)
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.formula_and()?;
        while self.peek() == Some(&Tok::Bar) {
            self.next();
            lhs = lhs.or(self.formula_and()?);
        }
        Ok(lhs)
    }

    fn formula_and(&mut self) -> Result<Formula> {
        let mut lhs = self.formula_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.next();
            lhs = lhs.and(self.formula_unary()?);
        }
        Ok(lhs)
    }

    fn formula_unary(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Bang) => {
                self.next();
                Ok(self.formula_unary()?.not())
            }
            Some(Tok::LParen) => {
                self.next();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Word(w)) if w == "C" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let mut offset = vec![self.signed()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.next();
                    offset.push(self.signed()?);
                }
                self.expect(&Tok::RParen)?;
                Ok(Formula::Atom(offset))
            }
            Some(t) => Err(syntax(
                pos,
                format!("expected `C(`, `!` or `(`, found {}", t.describe()),
            )),
            None => Err(syntax(pos, "expected a formula, found end of input")),
        }
    }
}

/// Parses a sentence, validating atom arity and ball membership against `lattice`.
pub fn parse_sentence(text: &str, lattice: &Lattice) -> Result<Sentence> {
    let (toks, end) = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end,
        lattice,
    };
    let s = p.sentence()?;
    if let Some(t) = p.peek() {
        return Err(syntax(p.pos(), format!("unexpected trailing {}", t.describe())));
    }
    Ok(s)
}

/// Parses a single local formula of radius `template.radius()`.
pub fn parse_formula(text: &str, template: &BallTemplate) -> Result<LocalFormula> {
    let lattice = template.lattice();
    let (toks, end) = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end,
        lattice: &lattice,
    };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(syntax(p.pos(), format!("unexpected trailing {}", t.describe())));
    }
    LocalFormula::with_template(f, template)
}
