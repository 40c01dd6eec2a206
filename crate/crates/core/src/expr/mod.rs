//! Scalar expressions in one free variable.
//!
//! Weight factors are written in `t`, nonlinearities in `u`. The grammar is
//! deliberately small: literals, the free variable, `pi`, `+ - * / ^`, a fixed
//! set of elementary functions and a `piecewise(...)` form whose last branch
//! must be `else`.
//!
//! ```
//! use annulus_core::expr::Expr;
//!
//! let g = Expr::parse("piecewise((u>=1, 1.5), (else, u^2/2 + 1))", "u").unwrap();
//! assert_eq!(g.eval(2.0).unwrap(), 1.5);
//! assert_eq!(g.eval(0.0).unwrap(), 1.0);
//! ```

mod parser;

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use parser::MAX_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
    Abs,
    Exp,
    Log,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub lhs: Node,
    pub op: CmpOp,
    pub rhs: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    /// Guarded branches followed by the mandatory `else` value.
    Piecewise(Vec<(Condition, Node)>, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("unknown identifier `{name}` at offset {offset} (free variable is `{var}`)")]
    UnknownIdentifier {
        offset: usize,
        name: String,
        var: String,
    },
    #[error("piecewise at offset {offset} has no `else` branch")]
    MissingElse { offset: usize },
    #[error("expression nested deeper than {MAX_DEPTH} levels at offset {offset}")]
    TooDeep { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::MissingElse { offset }
            | ParseError::TooDeep { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{expr}` at {var} = {at}")]
    DivisionByZero { expr: String, var: String, at: f64 },
    #[error("domain error in `{expr}` at {var} = {at}")]
    Domain { expr: String, var: String, at: f64 },
    #[error("non-finite result in `{expr}` at {var} = {at}")]
    NonFinite { expr: String, var: String, at: f64 },
}

/// A parsed expression together with its source text and free variable.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Arc<Node>,
    var: Arc<str>,
    source: Arc<str>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var && self.root == other.root
    }
}

impl Expr {
    pub fn parse(src: &str, var: &str) -> Result<Expr, ParseError> {
        let root = parser::parse(src, var)?;
        Ok(Expr {
            root: Arc::new(root),
            var: Arc::from(var),
            source: Arc::from(src),
        })
    }

    /// Shorthand for a constant expression.
    pub fn constant(value: f64, var: &str) -> Expr {
        Expr {
            root: Arc::new(Node::Num(value)),
            var: Arc::from(var),
            source: Arc::from(format_number(value).as_str()),
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    /// True when the expression does not reference its free variable.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::Var => false,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Binary(_, a, b) => walk(a) && walk(b),
                Node::Piecewise(branches, other) => {
                    branches
                        .iter()
                        .all(|(c, v)| walk(&c.lhs) && walk(&c.rhs) && walk(v))
                        && walk(other)
                }
            }
        }
        walk(&self.root)
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, x, &self.var)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.var, 0)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

fn eval_node(node: &Node, x: f64, var: &str) -> Result<f64, EvalError> {
    let fail_domain = |n: &Node| EvalError::Domain {
        expr: render(n, var),
        var: var.to_string(),
        at: x,
    };
    let value = match node {
        Node::Num(v) => return Ok(*v),
        Node::Var => return Ok(x),
        Node::Neg(a) => -eval_node(a, x, var)?,
        Node::Binary(op, a, b) => {
            let l = eval_node(a, x, var)?;
            let r = eval_node(b, x, var)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            expr: render(node, var),
                            var: var.to_string(),
                            at: x,
                        });
                    }
                    l / r
                }
                BinOp::Pow => power(l, r).ok_or_else(|| fail_domain(node))?,
            }
        }
        Node::Call(func, a) => {
            let v = eval_node(a, x, var)?;
            match func {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sinh => v.sinh(),
                Func::Cosh => v.cosh(),
                Func::Sqrt if v < 0.0 => return Err(fail_domain(node)),
                Func::Sqrt => v.sqrt(),
                Func::Abs => v.abs(),
                Func::Exp => v.exp(),
                Func::Log if v <= 0.0 => return Err(fail_domain(node)),
                Func::Log => v.ln(),
            }
        }
        Node::Piecewise(branches, otherwise) => {
            for (cond, value) in branches {
                let l = eval_node(&cond.lhs, x, var)?;
                let r = eval_node(&cond.rhs, x, var)?;
                if cond.op.holds(l, r) {
                    return eval_node(value, x, var);
                }
            }
            return eval_node(otherwise, x, var);
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite {
            expr: render(node, var),
            var: var.to_string(),
            at: x,
        })
    }
}

/// `base^exponent` with an integer fast path; `None` for a negative base with a
/// non-integer exponent and for zero raised to a negative power.
fn power(base: f64, exponent: f64) -> Option<f64> {
    if exponent.fract() == 0.0 && exponent.abs() <= 1024.0 {
        if base == 0.0 && exponent < 0.0 {
            return None;
        }
        return Some(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return None;
    }
    if base == 0.0 {
        return if exponent > 0.0 { Some(0.0) } else { None };
    }
    Some((exponent * base.ln()).exp())
}

// Binding strength used by the printer; mirrors the parser.
fn precedence(node: &Node) -> u8 {
    match node {
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

pub(crate) fn format_number(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:?}");
        s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
    } else {
        // Only reachable for hand-built trees; the parser never yields these.
        format!("({v})")
    }
}

fn render(node: &Node, var: &str) -> String {
    struct R<'a>(&'a Node, &'a str);
    impl fmt::Display for R<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_node(f, self.0, self.1, 0)
        }
    }
    R(node, var).to_string()
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, var: &str, min_prec: u8) -> fmt::Result {
    let prec = precedence(node);
    let paren = prec < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match node {
        Node::Num(v) => f.write_str(&format_number(*v))?,
        Node::Var => f.write_str(var)?,
        Node::Neg(a) => {
            f.write_str("-")?;
            write_node(f, a, var, 3)?;
        }
        Node::Binary(op, a, b) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                // right associative; a negated exponent prints as `a^-b`
                BinOp::Pow => ("^", 5, 3),
            };
            write_node(f, a, var, lp)?;
            f.write_str(sym)?;
            write_node(f, b, var, rp)?;
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, var, 0)?;
            f.write_str(")")?;
        }
        Node::Piecewise(branches, otherwise) => {
            f.write_str("piecewise(")?;
            for (cond, value) in branches {
                f.write_str("(")?;
                write_node(f, &cond.lhs, var, 0)?;
                write!(f, " {} ", cond.op.symbol())?;
                write_node(f, &cond.rhs, var, 0)?;
                f.write_str(", ")?;
                write_node(f, value, var, 0)?;
                f.write_str("), ")?;
            }
            f.write_str("(else, ")?;
            write_node(f, otherwise, var, 0)?;
            f.write_str("))")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, var: &str, x: f64) -> f64 {
        Expr::parse(src, var).unwrap().eval(x).unwrap()
    }

    #[test]
    fn weight_factor_at_one() {
        assert_eq!(ev("1/(t^2+1)", "t", 1.0), 0.5);
    }

    #[test]
    fn piecewise_example_two() {
        let src = "piecewise((u>=1, 1e16), (else, 1e16*u^2 - u + 1))";
        assert_eq!(ev(src, "u", 2.0), 1e16);
        assert_eq!(ev(src, "u", 0.0), 1.0);
    }

    #[test]
    fn example_one_nonlinearity_at_zero() {
        let v = ev("1+cos(1+u)/5+1/(1+u)", "u", 0.0);
        assert!((v - (2.0 + 1f64.cos() / 5.0)).abs() < 1e-15);
        assert!((v - 2.1080605).abs() < 1e-7);
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = Expr::parse("1/(t+", "t").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 5, .. }), "{err:?}");
    }

    #[test]
    fn precedence_rules() {
        assert_eq!(ev("-u^2", "u", 3.0), -9.0);
        assert_eq!(ev("2^3^2", "u", 0.0), 512.0);
        assert_eq!(ev("2^-1", "u", 0.0), 0.5);
        assert_eq!(ev("1-2-3", "u", 0.0), -4.0);
        assert_eq!(ev("8/4/2", "u", 0.0), 1.0);
        assert_eq!(ev("-2*3", "u", 0.0), -6.0);
        assert_eq!(ev("2*pi", "u", 0.0), 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(matches!(
            Expr::parse("foo(t)", "t"),
            Err(ParseError::UnknownFunction { .. })
        ));
        assert!(matches!(
            Expr::parse("u + 1", "t"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn piecewise_requires_else() {
        assert!(matches!(
            Expr::parse("piecewise((u>1, 2))", "u"),
            Err(ParseError::MissingElse { .. })
        ));
        assert!(Expr::parse("piecewise((else, 2), (u > 1, 3))", "u").is_err());
    }

    #[test]
    fn domain_errors_surface_at_eval() {
        let e = Expr::parse("log(u)", "u").unwrap();
        assert!(matches!(e.eval(0.0), Err(EvalError::Domain { .. })));
        let e = Expr::parse("1/u", "u").unwrap();
        match e.eval(0.0) {
            Err(EvalError::DivisionByZero { expr, .. }) => assert_eq!(expr, "1/u"),
            other => panic!("{other:?}"),
        }
        let e = Expr::parse("sqrt(u)", "u").unwrap();
        assert!(e.eval(-1.0).is_err());
        let e = Expr::parse("u^0.5", "u").unwrap();
        assert!(e.eval(-1.0).is_err());
        let e = Expr::parse("exp(u)", "u").unwrap();
        assert!(matches!(e.eval(1e4), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn first_true_branch_wins() {
        let e = Expr::parse("piecewise((u > 0, 1), (u > -1, 2), (else, 3))", "u").unwrap();
        assert_eq!(e.eval(1.0).unwrap(), 1.0);
        assert_eq!(e.eval(-0.5).unwrap(), 2.0);
        assert_eq!(e.eval(-5.0).unwrap(), 3.0);
    }

    #[test]
    fn printing_is_canonical() {
        let e = Expr::parse("1/(t^2+1)", "t").unwrap();
        assert_eq!(e.to_string(), "1/(t^2 + 1)");
        let e = Expr::parse("(-u)^2 - -u", "u").unwrap();
        assert_eq!(e.to_string(), "(-u)^2 - -u");
        let e = Expr::parse("a", "a").unwrap();
        assert!(!e.is_constant());
        assert!(Expr::parse("cos(1)", "u").unwrap().is_constant());
    }

    #[test]
    fn repeated_evaluation_is_bitwise_identical() {
        let e = Expr::parse("cos(u)/10000 + sinh(u)^1.5", "u").unwrap();
        let a = e.eval(0.731).unwrap();
        for _ in 0..10 {
            assert_eq!(a.to_bits(), e.eval(0.731).unwrap().to_bits());
        }
    }
}
