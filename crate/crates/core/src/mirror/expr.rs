//! Infix expressions in one variable `x`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'x' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)` and `2^-1` is `0.5`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numerics::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Abs,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sqrt,
        Func::Abs,
        Func::Exp,
        Func::Ln,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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
pub enum ExprNode {
    Const(f64),
    X,
    Neg(Box<ExprNode>),
    Binary(BinOp, Box<ExprNode>, Box<ExprNode>),
    Call(Func, Box<ExprNode>),
}

/// Why an expression could not be evaluated at some `x`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("`{op}` produced a non-finite value at x = {x}")]
    NonFinite { op: &'static str, x: f64 },
    #[error("non-differentiable point of `abs` at x = {x}")]
    NonDifferentiable { x: f64 },
}

impl ExprNode {
    /// Evaluates over any [`Real`]; use `Dual<f64>` to get `f` and `f'` in one pass.
    pub fn eval<T: Real>(&self, x: T) -> Result<T, EvalError> {
        let at = x.value();
        let check = |v: T, op: &'static str| {
            if v.all_finite() {
                Ok(v)
            } else {
                Err(EvalError::NonFinite { op, x: at })
            }
        };
        match self {
            ExprNode::Const(c) => Ok(T::constant(*c)),
            ExprNode::X => Ok(x),
            ExprNode::Neg(a) => Ok(-a.eval(x)?),
            ExprNode::Binary(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => check(a + b, "+"),
                    BinOp::Sub => check(a - b, "-"),
                    BinOp::Mul => check(a * b, "*"),
                    BinOp::Div => check(a / b, "/"),
                    BinOp::Pow => check(a.pow(b), "^"),
                }
            }
            ExprNode::Call(func, a) => {
                let a = a.eval(x)?;
                let v = match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs().ok_or(EvalError::NonDifferentiable { x: at })?,
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Tanh => a.tanh(),
                };
                check(v, func.name())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprNode::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprNode::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprNode::Neg(_) => 3,
            ExprNode::Binary(BinOp::Pow, ..) => 4,
            ExprNode::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, node: &ExprNode, min: u8) -> fmt::Result {
            if node.precedence() < min {
                write!(f, "({node})")
            } else {
                write!(f, "{node}")
            }
        }
        match self {
            // `{:?}` keeps the shortest round-trip representation
            ExprNode::Const(c) => write!(f, "{c:?}"),
            ExprNode::X => write!(f, "x"),
            ExprNode::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 3)
            }
            ExprNode::Binary(op, a, b) => {
                let p = self.precedence();
                let (left_min, right_min) = match op {
                    BinOp::Pow => (p + 1, 3),
                    _ => (p, p + 1),
                };
                child(f, a, left_min)?;
                write!(f, "{}", op.symbol())?;
                child(f, b, right_min)
            }
            ExprNode::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed expression, cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Arc<ExprNode>,
}

impl Expr {
    pub fn new(root: ExprNode) -> Self {
        Self { root: Arc::new(root) }
    }

    pub fn root(&self) -> &ExprNode {
        &self.root
    }

    pub fn eval<T: Real>(&self, x: T) -> Result<T, EvalError> {
        self.root.eval(x)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at position {pos}")]
    Lexical { pos: usize, ch: char },
    #[error("syntax error at position {pos}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        pos: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("invalid number `{text}` at position {pos}")]
    InvalidNumber { pos: usize, text: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push((i, Tok::Op(c)));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // optional exponent; only consumed when digits follow
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| ParseError::InvalidNumber {
                    pos: start,
                    text: s.clone(),
                })?;
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => return Err(ParseError::Lexical { pos: i, ch: other }),
        }
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected,
            found: self.peek().to_string(),
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprNode, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(ExprNode::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExprNode, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(ExprNode::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprNode, ParseError> {
        const EXPECTED: [&str; 4] = ["number", "`x`", "function name", "`(`"];
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(ExprNode::Const(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "x" {
                    return Ok(ExprNode::X);
                }
                let func = Func::from_name(&name)
                    .ok_or(ParseError::UnknownIdentifier { pos, name })?;
                self.expect_lparen()?;
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(ExprNode::Call(func, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            _ => Err(self.unexpected(EXPECTED.to_vec())),
        }
    }

    fn expect_lparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(vec!["`(`"]))
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(vec!["`)`", "operator"]))
        }
    }
}

/// Parses an infix expression in `x`. Positions in errors are character offsets.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(vec!["operator", "end of input"]));
    }
    Ok(Expr::new(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Dual;

    fn eval(text: &str, x: f64) -> f64 {
        parse_expr(text).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1+2*3", 0.0), 7.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("1-2-3", 0.0), -4.0);
        assert_eq!(eval("(1+2)*3", 0.0), 9.0);
        assert_eq!(eval("1.5e1 + 2E-1", 0.0), 15.2);
    }

    #[test]
    fn functions() {
        assert!((eval("sqrt(1+x^2)", 0.0) - 1.0).abs() < 1e-15);
        assert!((eval("ln(exp(x))", 0.7) - 0.7).abs() < 1e-15);
        assert_eq!(eval("abs(x)", -2.0), 2.0);
    }

    #[test]
    fn dual_evaluation_gives_slope() {
        let e = parse_expr("sin(x)").unwrap();
        let d = e.eval(Dual::variable(0.0)).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.deriv, 1.0);
    }

    #[test]
    fn lexical_error_reports_position_and_char() {
        assert_eq!(
            parse_expr("x + $").unwrap_err(),
            ParseError::Lexical { pos: 4, ch: '$' }
        );
    }

    #[test]
    fn syntax_error_reports_expected_set() {
        match parse_expr("2 * ").unwrap_err() {
            ParseError::Syntax { pos, expected, found } => {
                assert_eq!(pos, 4);
                assert!(expected.contains(&"number"));
                assert_eq!(found, "end of input");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("(x"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expr("x x"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expr("sin x"), Err(ParseError::Syntax { pos: 4, .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse_expr("2*y").unwrap_err(),
            ParseError::UnknownIdentifier { pos: 2, name: "y".into() }
        );
    }

    #[test]
    fn evaluation_errors_carry_location() {
        let e = parse_expr("ln(x)").unwrap();
        assert_eq!(e.eval(-1.0), Err(EvalError::NonFinite { op: "ln", x: -1.0 }));
        let a = parse_expr("abs(x)").unwrap();
        assert_eq!(
            a.eval(Dual::variable(0.0)),
            Err(EvalError::NonDifferentiable { x: 0.0 })
        );
        assert_eq!(a.eval(0.0), Ok(0.0));
    }

    #[test]
    fn printing_parenthesizes_where_needed() {
        for text in ["-(x+1)^2", "(-x)^2", "2^(3^x)", "(2^3)^x", "x-(1-x)", "x/(2*x)", "-(-x)"] {
            let e = parse_expr(text).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            for x in [-1.3, 0.2, 2.5] {
                assert_eq!(e.eval(x).ok(), again.eval(x).ok(), "{text} -> {e}");
            }
        }
    }
}
