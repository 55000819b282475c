//! Arithmetic payoff expressions.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! expr    := expr ('+' | '-') expr
//!          | expr ('*' | '/') expr
//!          | '-' expr
//!          | expr '^' INT          (0 <= INT <= 8, left-assoc)
//!          | NUMBER | 's'<k> | NAME | '(' expr ')'
//! ```
//!
//! `-s1^2` parses as `-(s1^2)`; `-s1*s2` parses as `(-s1)*s2`.
//! Strategy variables are written one-based (`s1`..`s<n>`) and stored
//! zero-based in [`Expr::Var`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub const MAX_EXPONENT: u32 = 8;
const MAX_DEPTH: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {ch:?} at offset {offset}")]
    Lexical { ch: char, offset: usize },
    #[error("malformed number {text:?} at offset {offset}")]
    BadNumber { text: String, offset: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParen { offset: usize },
    #[error("unknown identifier {name:?} at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at offset {offset} must be an integer literal in 0..={MAX_EXPONENT}")]
    BadExponent { offset: usize },
    #[error("unexpected {found} at offset {offset}")]
    Unexpected { found: String, offset: usize },
    #[error("expression nested deeper than {MAX_DEPTH} levels at offset {offset}")]
    TooDeep { offset: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at profile {profile:?}")]
    DivisionByZero { profile: Vec<f64> },
    #[error("parameter {0:?} is not bound")]
    UnboundParameter(String),
    #[error("strategy variable s{} missing from profile of length {len}", .index + 1)]
    MissingVariable { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based strategy index.
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn contains_division(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.contains_division(),
            Expr::Binary(op, l, r) => {
                *op == BinOp::Div || l.contains_division() || r.contains_division()
            }
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
        }
    }

    /// Replaces every parameter by its bound value.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Param(p) => Expr::Const(
                *params
                    .get(p)
                    .ok_or_else(|| EvalError::UnboundParameter(p.clone()))?,
            ),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(*i),
            Expr::Neg(e) => Expr::Neg(Box::new(e.bind(params)?)),
            Expr::Pow(e, k) => Expr::Pow(Box::new(e.bind(params)?), *k),
            Expr::Binary(op, l, r) => {
                Expr::Binary(*op, Box::new(l.bind(params)?), Box::new(r.bind(params)?))
            }
        })
    }

    pub fn eval(&self, s: &[f64], params: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *s.get(*i).ok_or(EvalError::MissingVariable {
                index: *i,
                len: s.len(),
            })?,
            Expr::Param(p) => *params
                .get(p)
                .ok_or_else(|| EvalError::UnboundParameter(p.clone()))?,
            Expr::Neg(e) => -e.eval(s, params)?,
            Expr::Pow(e, k) => e.eval(s, params)?.powi(*k as i32),
            Expr::Binary(op, l, r) => {
                let a = l.eval(s, params)?;
                let b = r.eval(s, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero {
                                profile: s.to_vec(),
                            });
                        }
                        a / b
                    }
                }
            }
        })
    }
}

/// Fully parenthesized canonical form; reparses to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "s{}", i + 1),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Pow(e, k) => write!(f, "({e} ^ {k})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

pub fn roundtrip_print(expr: &Expr) -> String {
    expr.to_string()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_, t) => format!("number {t}"),
            Tok::Ident(n) => format!("identifier {n}"),
            Tok::Op(c) => format!("operator {c:?}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        match ch {
            c if c.is_whitespace() => {
                chars.next();
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push((Tok::Op(ch), pos));
                chars.next();
            }
            '(' => {
                out.push((Tok::LParen, pos));
                chars.next();
            }
            ')' => {
                out.push((Tok::RParen, pos));
                chars.next();
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut end = pos;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                // optional exponent
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut k = end + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = &src[pos..end];
                let value: f64 = text.parse().map_err(|_| ParseError::BadNumber {
                    text: text.to_string(),
                    offset: pos,
                })?;
                if !value.is_finite() {
                    return Err(ParseError::BadNumber {
                        text: text.to_string(),
                        offset: pos,
                    });
                }
                out.push((Tok::Num(value, text.to_string()), pos));
                while chars.peek().is_some_and(|&(p, _)| p < end) {
                    chars.next();
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = pos;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                out.push((Tok::Ident(src[pos..end].to_string()), pos));
                while chars.peek().is_some_and(|&(p, _)| p < end) {
                    chars.next();
                }
            }
            other => return Err(ParseError::Lexical { ch: other, offset: pos }),
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    params: &'a BTreeSet<String>,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep {
                offset: self.peek().1,
            });
        }
        let mut lhs = self.prefix()?;
        loop {
            let (tok, offset) = self.peek().clone();
            let op = match tok {
                Tok::Op(c) => c,
                Tok::End | Tok::RParen => break,
                other => {
                    return Err(ParseError::Unexpected {
                        found: other.describe(),
                        offset,
                    })
                }
            };
            let (lbp, rbp) = match op {
                '+' | '-' => (10, 11),
                '*' | '/' => (20, 21),
                '^' => (40, 41),
                _ => unreachable!("lexer only emits arithmetic operators"),
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            if op == '^' {
                lhs = Expr::Pow(Box::new(lhs), self.exponent()?);
                continue;
            }
            let rhs = self.expr(rbp)?;
            let bin = match op {
                '+' => BinOp::Add,
                '-' => BinOp::Sub,
                '*' => BinOp::Mul,
                _ => BinOp::Div,
            };
            lhs = Expr::Binary(bin, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v, text)
                if v.fract() == 0.0 && v <= MAX_EXPONENT as f64 && !text.contains(['e', 'E']) =>
            {
                Ok(v as u32)
            }
            _ => Err(ParseError::BadExponent { offset }),
        }
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v, _) => Ok(Expr::Const(v)),
            Tok::Ident(name) => self.identifier(name, offset),
            // binds tighter than * and /, looser than ^
            Tok::Op('-') => Ok(Expr::Neg(Box::new(self.expr(30)?))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (Tok::End, end) => Err(ParseError::UnbalancedParen { offset: end }),
                    (other, at) => Err(ParseError::Unexpected {
                        found: other.describe(),
                        offset: at,
                    }),
                }
            }
            Tok::RParen => Err(ParseError::UnbalancedParen { offset }),
            other => Err(ParseError::Unexpected {
                found: other.describe(),
                offset,
            }),
        }
    }

    fn identifier(&self, name: String, offset: usize) -> Result<Expr, ParseError> {
        if let Some(digits) = name.strip_prefix('s') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return match digits.parse::<usize>() {
                    Ok(k) if (1..=self.n).contains(&k) && !digits.starts_with('0') => {
                        Ok(Expr::Var(k - 1))
                    }
                    _ => Err(ParseError::UnknownIdentifier { name, offset }),
                };
            }
        }
        if self.params.contains(&name) {
            Ok(Expr::Param(name))
        } else {
            Err(ParseError::UnknownIdentifier { name, offset })
        }
    }
}

/// Parses `src` for an `n`-player game whose free parameter names are `params`.
pub fn parse_expression(
    src: &str,
    n: usize,
    params: &BTreeSet<String>,
) -> Result<Expr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        n,
        params,
        depth: 0,
    };
    let e = p.expr(0)?;
    match p.peek().clone() {
        (Tok::End, _) => Ok(e),
        (Tok::RParen, offset) => Err(ParseError::UnbalancedParen { offset }),
        (other, offset) => Err(ParseError::Unexpected {
            found: other.describe(),
            offset,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> BTreeSet<String> {
        BTreeSet::new()
    }

    fn eval(src: &str, s: &[f64]) -> Result<f64, EvalError> {
        parse_expression(src, s.len().max(1), &no_params())
            .unwrap()
            .eval(s, &BTreeMap::new())
    }

    #[test]
    fn product_root() {
        let e = parse_expression("s1*(10 - s1 - s2 - s3)", 3, &no_params()).unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn unbalanced_reports_end_offset() {
        let err = parse_expression("s1 + (s2", 2, &no_params()).unwrap_err();
        assert_eq!(err, ParseError::UnbalancedParen { offset: 8 });
        let err = parse_expression("s1)", 2, &no_params()).unwrap_err();
        assert_eq!(err, ParseError::UnbalancedParen { offset: 2 });
    }

    #[test]
    fn variable_out_of_range() {
        let err = parse_expression("s9", 4, &no_params()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { ref name, offset: 0 } if name == "s9"));
        assert!(parse_expression("s0", 4, &no_params()).is_err());
        assert!(parse_expression("foo", 4, &no_params()).is_err());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval("2*s1 + 3", &[4.0]).unwrap(), 11.0);
        assert_eq!(eval("s1^2", &[3.0]).unwrap(), 9.0);
        assert_eq!(eval("-s1^2", &[3.0]).unwrap(), -9.0);
        assert_eq!(eval("10 - 4 - 3", &[0.0]).unwrap(), 3.0);
        assert_eq!(eval("12 / 3 / 2", &[0.0]).unwrap(), 2.0);
        assert_eq!(eval("2*-s1", &[3.0]).unwrap(), -6.0);
    }

    #[test]
    fn division_by_zero_carries_profile() {
        let err = eval("1/(s1-1)", &[1.0]).unwrap_err();
        assert_eq!(err, EvalError::DivisionByZero { profile: vec![1.0] });
        let e = parse_expression("1/(s1-1)", 1, &no_params()).unwrap();
        assert!(e.contains_division());
    }

    #[test]
    fn canonical_printing() {
        let p = |s| roundtrip_print(&parse_expression(s, 3, &no_params()).unwrap());
        assert_eq!(p("s1+s2*s3"), "(s1 + (s2 * s3))");
        assert_eq!(p("-s1^2"), "(-(s1 ^ 2))");
        assert_eq!(p("-s1*s2"), "((-s1) * s2)");
    }

    #[test]
    fn parameters_bind() {
        let params: BTreeSet<String> = ["a", "cA"].iter().map(|s| s.to_string()).collect();
        let e = parse_expression("(a - s1)*s1 - cA*s1", 1, &params).unwrap();
        let mut vals = BTreeMap::new();
        vals.insert("a".to_string(), 10.0);
        assert!(matches!(e.bind(&vals), Err(EvalError::UnboundParameter(_))));
        vals.insert("cA".to_string(), 1.0);
        let bound = e.bind(&vals).unwrap();
        assert!(bound.params().is_empty());
        assert_eq!(bound.eval(&[2.0], &BTreeMap::new()).unwrap(), 14.0);
    }

    #[test]
    fn exponent_rules() {
        assert!(parse_expression("s1^9", 1, &no_params()).is_err());
        assert!(parse_expression("s1^1.5", 1, &no_params()).is_err());
        assert!(parse_expression("s1^s1", 1, &no_params()).is_err());
        assert_eq!(eval("s1^0", &[5.0]).unwrap(), 1.0);
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let src = "(".repeat(5000) + "s1" + &")".repeat(5000);
        assert!(matches!(
            parse_expression(&src, 1, &no_params()),
            Err(ParseError::TooDeep { .. })
        ));
        let src = "-".repeat(5000) + "s1";
        assert!(parse_expression(&src, 1, &no_params()).is_err());
    }

    #[test]
    fn lexical_errors() {
        assert_eq!(
            parse_expression("s1 # 2", 1, &no_params()).unwrap_err(),
            ParseError::Lexical { ch: '#', offset: 3 }
        );
        assert_eq!(parse_expression("   ", 1, &no_params()).unwrap_err(), ParseError::Empty);
        assert!(parse_expression("1..2", 1, &no_params()).is_err());
        assert!(parse_expression("1e999", 1, &no_params()).is_err());
    }
}
