//! Expression language for user-supplied representing functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' factor)?
//! unary   := '-'? primary
//! primary := number | 'x' | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and unary minus binds tighter than the base of
//! `^`, so `-x^2` reads as `(-x)^2`. The only identifiers are `log`, `exp`
//! and `sqrt`. Numbers are decimal with optional fraction and exponent.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::funcs::{check_monotone, Grid, RepresentingFunction};

/// Longest accepted source text, in bytes.
pub const MAX_LEN: usize = 4096;

/// Deepest accepted nesting of parentheses, calls and exponents.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("expression longer than {MAX_LEN} bytes")]
    TooLong,
    #[error("unexpected character {ch:?} at byte {offset}")]
    Lexical { offset: usize, ch: char },
    #[error("malformed number at byte {offset}")]
    Number { offset: usize },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("unbalanced parenthesis at byte {offset}")]
    Unbalanced { offset: usize },
    #[error("expected {expected} at byte {offset}")]
    Expected {
        offset: usize,
        expected: &'static str,
    },
    #[error("trailing input at byte {offset}")]
    Trailing { offset: usize },
    #[error("nesting deeper than {MAX_DEPTH} at byte {offset}")]
    TooDeep { offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Number(f64),
    X,
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

impl fmt::Display for Ast {
    /// Fully parenthesised; reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Number(v) => write!(f, "{v:?}"),
            Ast::X => f.write_str("x"),
            Ast::Neg(e) => write!(f, "-({e})"),
            Ast::Binary(op, a, b) => write!(f, "({a}){}({b})", op.symbol()),
            Ast::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    X,
    Ident(Func),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> std::result::Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                let digits = |i: &mut usize| {
                    let s = *i;
                    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                        *i += 1;
                    }
                    *i - s
                };
                let mut n = digits(&mut i);
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    n += digits(&mut i);
                }
                if n == 0 {
                    return Err(ParseError::Number { offset: start });
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if digits(&mut i) == 0 {
                        return Err(ParseError::Number { offset: start });
                    }
                }
                let v: f64 = src[start..i]
                    .parse()
                    .map_err(|_| ParseError::Number { offset: start })?;
                if !v.is_finite() {
                    return Err(ParseError::Number { offset: start });
                }
                out.push((start, Tok::Num(v)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let tok = match &src[start..i] {
                    "x" => Tok::X,
                    "log" => Tok::Ident(Func::Log),
                    "exp" => Tok::Ident(Func::Exp),
                    "sqrt" => Tok::Ident(Func::Sqrt),
                    other => {
                        return Err(ParseError::UnknownIdent {
                            offset: start,
                            name: other.to_string(),
                        })
                    }
                };
                out.push((start, tok));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::Lexical { offset: i, ch });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn expr(&mut self) -> std::result::Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn enter(&mut self) -> std::result::Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep {
                offset: self.offset(),
            });
        }
        Ok(())
    }

    fn factor(&mut self) -> std::result::Result<Ast, ParseError> {
        let base = self.unary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            self.enter()?;
            let exp = self.factor()?;
            self.depth -= 1;
            return Ok(Ast::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> std::result::Result<Ast, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.primary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> std::result::Result<Ast, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Ast::Number(v))
            }
            Some(Tok::X) => {
                self.pos += 1;
                Ok(Ast::X)
            }
            Some(Tok::Ident(func)) => {
                self.pos += 1;
                if self.peek() != Some(&Tok::LParen) {
                    return Err(ParseError::Expected {
                        offset: self.offset(),
                        expected: "'(' after function name",
                    });
                }
                let arg = self.parenthesised()?;
                Ok(Ast::Call(func, Box::new(arg)))
            }
            Some(Tok::LParen) => self.parenthesised(),
            Some(Tok::RParen) => Err(ParseError::Unbalanced { offset }),
            _ => Err(ParseError::Expected {
                offset,
                expected: "number, 'x', function call or '('",
            }),
        }
    }

    fn parenthesised(&mut self) -> std::result::Result<Ast, ParseError> {
        let open = self.offset();
        self.enter()?;
        self.pos += 1;
        let inner = self.expr()?;
        if self.peek() != Some(&Tok::RParen) {
            return Err(ParseError::Unbalanced { offset: open });
        }
        self.pos += 1;
        self.depth -= 1;
        Ok(inner)
    }
}

/// Parses `text` with the grammar in the module docs.
pub fn parse(text: &str) -> std::result::Result<Ast, ParseError> {
    if text.len() > MAX_LEN {
        return Err(ParseError::TooLong);
    }
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        depth: 0,
    };
    let ast = p.expr()?;
    match p.peek() {
        None => Ok(ast),
        Some(Tok::RParen) => Err(ParseError::Unbalanced { offset: p.offset() }),
        Some(_) => Err(ParseError::Trailing { offset: p.offset() }),
    }
}

fn domain(x: f64, node: &Ast, reason: &str) -> Error {
    Error::Evaluation {
        x,
        reason: format!("{reason} in `{node}`"),
    }
}

/// Evaluates at `x > 0`. Division by zero, logarithms of non-positive
/// values and non-finite intermediate results are errors.
pub fn eval(ast: &Ast, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Evaluation {
            x,
            reason: "argument must be positive and finite".into(),
        });
    }
    eval_node(ast, x)
}

fn eval_node(node: &Ast, x: f64) -> Result<f64> {
    let v = match node {
        Ast::Number(v) => *v,
        Ast::X => x,
        Ast::Neg(e) => -eval_node(e, x)?,
        Ast::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, x)?, eval_node(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain(x, node, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => a.powf(b),
            }
        }
        Ast::Call(func, e) => {
            let a = eval_node(e, x)?;
            match func {
                Func::Log => {
                    if a <= 0.0 {
                        return Err(domain(x, node, "logarithm of a non-positive value"));
                    }
                    a.ln()
                }
                Func::Exp => a.exp(),
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(domain(x, node, "square root of a negative value"));
                    }
                    a.sqrt()
                }
            }
        }
    };
    if !v.is_finite() {
        return Err(domain(x, node, "non-finite result"));
    }
    Ok(v)
}

/// Half-width of the two-point average used when direct evaluation fails
/// next to `x = 1`.
const SINGULARITY_STEP: f64 = 1e-7;

/// Admits a parsed expression as a representing function.
///
/// Checks that `f(1 ± 1e-6)` lie within 1e-4 of 1, that `f` is
/// nondecreasing on the default grid, and that the numerical weight lies in
/// `[0, 1]`. Sampled checks only: passing them does not prove operator
/// monotonicity, and for functions outside that class the classifier's
/// verdict carries no operator-order meaning.
pub fn to_function(ast: &Ast) -> Result<RepresentingFunction> {
    let tree = ast.clone();
    let raw = move |x: f64| -> Result<f64> {
        match eval(&tree, x) {
            Ok(v) => Ok(v),
            Err(e) if (x - 1.0).abs() < SINGULARITY_STEP => {
                let lo = eval(&tree, 1.0 - SINGULARITY_STEP).map_err(|_| e.clone())?;
                let hi = eval(&tree, 1.0 + SINGULARITY_STEP).map_err(|_| e)?;
                Ok(0.5 * (lo + hi))
            }
            Err(e) => Err(e),
        }
    };
    for x in [1.0 - 1e-6, 1.0 + 1e-6] {
        let v = raw(x)?;
        if (v - 1.0).abs() > 1e-4 {
            return Err(Error::InvalidFunction {
                rule: format!("normalization: f(x) = {v} is not within 1e-4 of 1"),
                witness: x,
            });
        }
    }
    let f = RepresentingFunction::unvalidated_numeric("expr", vec![], raw)?;
    check_monotone(&f, &Grid::default())?;
    Ok(f.renamed(format!("expr:{ast}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(op: BinOp, a: Ast, c: Ast) -> Ast {
        Ast::Binary(op, Box::new(a), Box::new(c))
    }

    #[test]
    fn parses_log_mean() {
        let ast = parse("(x-1)/log(x)").unwrap();
        let expected = b(
            BinOp::Div,
            b(BinOp::Sub, Ast::X, Ast::Number(1.0)),
            Ast::Call(Func::Log, Box::new(Ast::X)),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(eval(&parse("x^0.5").unwrap(), 9.0).unwrap(), 3.0);
        assert_eq!(eval(&parse("2^3^2").unwrap(), 1.0).unwrap(), 512.0);
        assert_eq!(eval(&parse("x").unwrap(), 7.0).unwrap(), 7.0);
        let l = eval(&parse("(x-1)/log(x)").unwrap(), 2.0).unwrap();
        assert!((l - std::f64::consts::LOG2_E).abs() < 1e-12);
        let l = eval(&parse("log(x)").unwrap(), 0.5).unwrap();
        assert!((l - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn unary_minus_binds_to_base() {
        assert_eq!(eval(&parse("-x^2").unwrap(), 3.0).unwrap(), 9.0);
        assert_eq!(eval(&parse("0-x^2").unwrap(), 3.0).unwrap(), -9.0);
        assert_eq!(eval(&parse("2^-1").unwrap(), 3.0).unwrap(), 0.5);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert_eq!(parse(""), Err(ParseError::Empty));
        assert_eq!(
            parse("x + $"),
            Err(ParseError::Lexical { offset: 4, ch: '$' })
        );
        assert_eq!(
            parse("foo(x)"),
            Err(ParseError::UnknownIdent {
                offset: 0,
                name: "foo".into()
            })
        );
        assert_eq!(parse("(x+1"), Err(ParseError::Unbalanced { offset: 0 }));
        assert_eq!(parse("x+1)"), Err(ParseError::Unbalanced { offset: 3 }));
        assert_eq!(parse("x 2"), Err(ParseError::Trailing { offset: 2 }));
        assert_eq!(parse("1e"), Err(ParseError::Number { offset: 0 }));
        assert_eq!(parse("1e999"), Err(ParseError::Number { offset: 0 }));
        assert!(matches!(
            parse("x+"),
            Err(ParseError::Expected { offset: 2, .. })
        ));
        assert!(matches!(
            parse("--x"),
            Err(ParseError::Expected { offset: 1, .. })
        ));
        assert!(matches!(parse("pi"), Err(ParseError::UnknownIdent { .. })));
        assert_eq!(parse(&"1".repeat(MAX_LEN + 1)), Err(ParseError::TooLong));
        let deep = format!("{}x{}", "(".repeat(2000), ")".repeat(2000));
        assert!(matches!(parse(&deep), Err(ParseError::TooDeep { .. })));
        let tower = vec!["2"; 2000].join("^");
        assert!(matches!(parse(&tower), Err(ParseError::TooDeep { .. })));
    }

    #[test]
    fn evaluation_domain_errors() {
        assert!(eval(&parse("1/(x-1)").unwrap(), 1.0).is_err());
        assert!(eval(&parse("log(x-2)").unwrap(), 1.0).is_err());
        assert!(eval(&parse("sqrt(0-x)").unwrap(), 1.0).is_err());
        assert!(eval(&parse("exp(x)").unwrap(), 1000.0).is_err());
        let err = eval(&parse("log(x-2)").unwrap(), 1.0).unwrap_err();
        assert!(err.to_string().contains("log"), "{err}");
    }

    #[test]
    fn display_reparses() {
        for s in ["-x^2", "2^3^2", "(x-1)/log(x)", "1.5e-7*x+sqrt(x)", "-(x)"] {
            let a = parse(s).unwrap();
            assert_eq!(parse(&a.to_string()).unwrap(), a, "{s} -> {a}");
        }
    }

    #[test]
    fn to_function_examples() {
        let f = to_function(&parse("(1+x)/2").unwrap()).unwrap();
        assert!((f.weight() - 0.5).abs() < 1e-9);
        let log = to_function(&parse("(x-1)/log(x)").unwrap()).unwrap();
        assert!((log.weight() - 0.5).abs() < 1e-8);
        assert!((log.eval(1.0).unwrap() - 1.0).abs() < 1e-10);
        let err = to_function(&parse("x^2").unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidFunction { .. }), "{err}");
        assert!(to_function(&parse("2*x").unwrap()).is_err());
        assert!(to_function(&parse("1/x").unwrap()).is_err());
    }
}
