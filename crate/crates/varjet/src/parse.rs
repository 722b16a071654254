//! Text form of expressions: lexer and recursive-descent parser.
//!
//! The grammar (whitespace-insensitive except inside exponents):
//!
//! ```text
//! expression := term  (('+' | '-') term)*
//! term       := factor (('*' | '/') factor)*
//! factor     := '-' factor | power
//! power      := base ('^' exponent)?
//! base       := number | coordinate | constant | 'sqrt' '(' expression ')'
//!             | '(' expression ')'
//! exponent   := ['-'] digits ['/2']        -- attached to '^', no spaces
//! number     := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! ```
//!
//! The exponent's optional `/2` must follow the digits immediately; a spaced
//! `x^3 / 2` is the division `(x^3) / 2`, while `x^3/2` is the half-integer
//! power. Rendered output always spaces true division, so rendering and
//! reparsing is unambiguous.
//!
//! Coordinate spellings are chart-checked: parametric charts use `t`,
//! `x1..xn`, and `v1..vn` with one prime per extra derivative level
//! (`v1''` is `v^1_(2)`); homogeneous charts use `zeta`, `X0..Xn`, and
//! `u0..un` with primes. An identifier that looks like a coordinate of the
//! other chart family, or indexes outside the chart, is rejected rather than
//! treated as a named constant. Anything else alphabetic is a named
//! constant.

use crate::expr::Expr;
use crate::jet::{ChartKind, CoordId, JetChart};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("unexpected character `{found}`")]
    UnexpectedChar { found: char },
    #[error("malformed number `{text}`")]
    MalformedNumber { text: String },
    #[error("unexpected `{found}`, expected {expected}")]
    UnexpectedToken { found: String, expected: &'static str },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
    #[error("`{name}` is a coordinate of the other chart family (expression chart is {chart})")]
    WrongChart { name: String, chart: String },
    #[error("coordinate `{name}` is outside the {chart}")]
    OutsideChart { name: String, chart: String },
    #[error("malformed coordinate-like identifier `{name}`")]
    MalformedCoordinate { name: String },
    #[error("malformed exponent after `^`: expected an optionally negated integer or half-integer like `3`, `-2`, or `3/2` (no spaces)")]
    BadExponent,
    #[error("trailing input starting at `{found}`")]
    TrailingInput { found: String },
}

/// A parse failure with 1-based line/column location.
#[derive(Debug, Error, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    /// Identifier with a count of trailing primes.
    Ident(String, usize),
    /// `^` with its immediately attached exponent.
    Caret { num: i64, den: u8 },
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s, primes) => {
                write!(f, "{s}")?;
                for _ in 0..*primes {
                    write!(f, "'")?;
                }
                Ok(())
            }
            Tok::Caret { num, den } => {
                if *den == 1 {
                    write!(f, "^{num}")
                } else {
                    write!(f, "^{num}/2")
                }
            }
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, col: self.col, kind }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn take_digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.bump();
        }
        self.pos - start
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let (line, col) = (self.line, self.col);
        self.take_digits();
        if self.peek() == Some(b'.') {
            self.bump();
            if self.take_digits() == 0 {
                let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                return Err(ParseError { line, col, kind: ParseErrorKind::MalformedNumber { text } });
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            self.bump();
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.bump();
            }
            if self.take_digits() == 0 {
                let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                return Err(ParseError { line, col, kind: ParseErrorKind::MalformedNumber { text } });
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError {
                line,
                col,
                kind: ParseErrorKind::MalformedNumber { text: text.to_owned() },
            })
    }

    fn lex_exponent(&mut self) -> Result<Tok, ParseError> {
        // called with the caret consumed; no whitespace is skipped here
        let neg = if self.peek() == Some(b'-') {
            self.bump();
            true
        } else {
            false
        };
        let dstart = self.pos;
        if self.take_digits() == 0 {
            return Err(self.err(ParseErrorKind::BadExponent));
        }
        let digits = std::str::from_utf8(&self.src[dstart..self.pos]).expect("ascii");
        let mut num: i64 = digits.parse().map_err(|_| self.err(ParseErrorKind::BadExponent))?;
        if neg {
            num = -num;
        }
        let den = if self.peek() == Some(b'/') {
            self.bump();
            if self.peek() == Some(b'2') {
                self.bump();
                // reject a digit tail like `^3/25`
                if matches!(self.peek(), Some(b'0'..=b'9')) {
                    return Err(self.err(ParseErrorKind::BadExponent));
                }
                2
            } else {
                return Err(self.err(ParseErrorKind::BadExponent));
            }
        } else {
            1
        };
        Ok(Tok::Caret { num, den })
    }

    fn lex_ident(&mut self) -> Tok {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.bump();
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii").to_owned();
        let mut primes = 0;
        while self.peek() == Some(b'\'') {
            self.bump();
            primes += 1;
        }
        Tok::Ident(name, primes)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else { break };
            let tok = match b {
                b'0'..=b'9' => self.lex_number()?,
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'^' => {
                    self.bump();
                    self.lex_exponent()?
                }
                b if b.is_ascii_alphabetic() => self.lex_ident(),
                other => {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::UnexpectedChar { found: other as char },
                    })
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

/// Chart-aware classification of an identifier token.
fn classify_ident(
    name: &str,
    primes: usize,
    chart: &JetChart,
) -> Result<Classified, ParseErrorKind> {
    let full = || {
        let mut s = name.to_owned();
        for _ in 0..primes {
            s.push('\'');
        }
        s
    };
    // the independent variables
    if name == "t" && primes == 0 {
        return match chart.kind {
            ChartKind::Parametric => Ok(Classified::Time(ChartKind::Parametric)),
            ChartKind::Homogeneous => Err(ParseErrorKind::WrongChart {
                name: full(),
                chart: chart.to_string(),
            }),
        };
    }
    if name == "zeta" && primes == 0 {
        return match chart.kind {
            ChartKind::Homogeneous => Ok(Classified::Time(ChartKind::Homogeneous)),
            ChartKind::Parametric => Err(ParseErrorKind::WrongChart {
                name: full(),
                chart: chart.to_string(),
            }),
        };
    }
    let mut chars = name.chars();
    let stem = chars.next().expect("nonempty identifier");
    let rest = chars.as_str();
    let is_coordinate_shape = matches!(stem, 'x' | 'v' | 'X' | 'u')
        && !rest.is_empty()
        && rest.bytes().all(|b| b.is_ascii_digit());
    if !is_coordinate_shape {
        // a coordinate stem followed by a malformed tail (digits mixed with
        // letters, or primes on a non-coordinate) is almost certainly a typo
        let suspicious = matches!(stem, 'x' | 'v' | 'X' | 'u')
            && rest.bytes().any(|b| b.is_ascii_digit());
        if suspicious || primes > 0 {
            return Err(ParseErrorKind::MalformedCoordinate { name: full() });
        }
        return Ok(Classified::Const(name.to_owned()));
    }
    let idx: usize = rest
        .parse()
        .map_err(|_| ParseErrorKind::MalformedCoordinate { name: full() })?;
    let (kind, i, r) = match stem {
        'x' => {
            if primes > 0 {
                return Err(ParseErrorKind::MalformedCoordinate { name: full() });
            }
            if idx == 0 {
                return Err(ParseErrorKind::OutsideChart { name: full(), chart: chart.to_string() });
            }
            (ChartKind::Parametric, idx - 1, -1)
        }
        'v' => {
            if idx == 0 {
                return Err(ParseErrorKind::OutsideChart { name: full(), chart: chart.to_string() });
            }
            (ChartKind::Parametric, idx - 1, primes as i32)
        }
        'X' => {
            if primes > 0 {
                return Err(ParseErrorKind::MalformedCoordinate { name: full() });
            }
            (ChartKind::Homogeneous, idx, -1)
        }
        'u' => (ChartKind::Homogeneous, idx, primes as i32),
        _ => unreachable!(),
    };
    if kind != chart.kind {
        return Err(ParseErrorKind::WrongChart { name: full(), chart: chart.to_string() });
    }
    let c = CoordId { kind, i, r };
    if !chart.contains(c) {
        return Err(ParseErrorKind::OutsideChart { name: full(), chart: chart.to_string() });
    }
    Ok(Classified::Coord(c))
}

enum Classified {
    Coord(CoordId),
    Time(ChartKind),
    Const(String),
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    chart: &'a JetChart,
    end_line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn err_here(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(s) => ParseError {
                line: s.line,
                col: s.col,
                kind: ParseErrorKind::UnexpectedToken { found: s.tok.to_string(), expected },
            },
            None => ParseError {
                line: self.end_line,
                col: self.end_col,
                kind: ParseErrorKind::UnexpectedEnd { expected },
            },
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(s) if s.tok == Tok::RParen => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here("`)`")),
        }
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Expr::add(acc, rhs);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Expr::sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::mul(acc, rhs);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(s) if s.tok == Tok::Minus) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if let Some(Tok::Caret { num, den }) = self.peek().map(|s| s.tok.clone()) {
            self.pos += 1;
            return Ok(Expr::pow(base, num, den));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let Some(s) = self.bump() else {
            return Err(self.err_here("a number, coordinate, constant, or `(`"));
        };
        let (line, col) = (s.line, s.col);
        match s.tok.clone() {
            Tok::Num(v) => Ok(Expr::num(v)),
            Tok::LParen => {
                let inner = self.expression()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name, primes) => {
                if name == "sqrt" && primes == 0 {
                    match self.peek() {
                        Some(s) if s.tok == Tok::LParen => {
                            self.pos += 1;
                            let inner = self.expression()?;
                            self.expect_rparen()?;
                            return Ok(Expr::sqrt(inner));
                        }
                        _ => return Err(self.err_here("`(` after `sqrt`")),
                    }
                }
                match classify_ident(&name, primes, self.chart) {
                    Ok(Classified::Coord(c)) => Ok(Expr::coord(c)),
                    Ok(Classified::Time(k)) => Ok(Expr::time(k)),
                    Ok(Classified::Const(n)) => Ok(Expr::constant(n)),
                    Err(kind) => Err(ParseError { line, col, kind }),
                }
            }
            tok => Err(ParseError {
                line,
                col,
                kind: ParseErrorKind::UnexpectedToken {
                    found: tok.to_string(),
                    expected: "a number, coordinate, constant, or `(`",
                },
            }),
        }
    }
}

/// Parse an expression against a chart. Coordinates must belong to the chart
/// (family, index range, and derivative level are all checked).
pub fn parse_expression(text: &str, chart: &JetChart) -> Result<Expr, ParseError> {
    let line_count = text.lines().count().max(1);
    let last_len = text.lines().last().map_or(0, |l| l.chars().count());
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        chart,
        end_line: line_count,
        end_col: last_len + 1,
    };
    let e = p.expression()?;
    if let Some(s) = p.peek() {
        return Err(ParseError {
            line: s.line,
            col: s.col,
            kind: ParseErrorKind::TrailingInput { found: s.tok.to_string() },
        });
    }
    Ok(e)
}
