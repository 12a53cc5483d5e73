//! Expressions for prescribed data.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' UINT)?
//! atom    := NUMBER | 'pi' | trig '(' var ')' | '(' expr ')'
//! trig    := 'cos' | 'sin'
//! var     := 'theta' | 'lambda'
//! ```
//!
//! θ is colatitude and λ longitude. Under the antipodal map cos θ, cos λ
//! and sin λ change sign while sin θ does not, so parity can usually be read
//! off the tree. Sums of terms with different parity are reported as
//! undecided and left to a numerical check.

use crate::error::{Error, Result};
use crate::sphere_grid::{Grid, GridMode, SphericalField};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Undecided,
}

impl Parity {
    fn mul(self, other: Parity) -> Parity {
        use Parity::*;
        match (self, other) {
            (Undecided, _) | (_, Undecided) => Undecided,
            (a, b) if a == b => Even,
            _ => Odd,
        }
    }

    fn add(self, other: Parity) -> Parity {
        if self == other {
            self
        } else {
            Parity::Undecided
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    CosTheta,
    SinTheta,
    CosLambda,
    SinLambda,
}

impl Primitive {
    fn eval(self, theta: f64, lambda: f64) -> f64 {
        match self {
            Self::CosTheta => theta.cos(),
            Self::SinTheta => theta.sin(),
            Self::CosLambda => lambda.cos(),
            Self::SinLambda => lambda.sin(),
        }
    }

    fn parity(self) -> Parity {
        match self {
            Self::SinTheta => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Prim(Primitive),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
}

impl Node {
    fn eval(&self, t: f64, l: f64) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Prim(p) => p.eval(t, l),
            Node::Neg(a) => -a.eval(t, l),
            Node::Add(a, b) => a.eval(t, l) + b.eval(t, l),
            Node::Sub(a, b) => a.eval(t, l) - b.eval(t, l),
            Node::Mul(a, b) => a.eval(t, l) * b.eval(t, l),
            Node::Div(a, b) => a.eval(t, l) / b.eval(t, l),
            Node::Pow(a, k) => a.eval(t, l).powi(*k as i32),
        }
    }

    fn parity(&self) -> Parity {
        match self {
            Node::Const(_) => Parity::Even,
            Node::Prim(p) => p.parity(),
            Node::Neg(a) => a.parity(),
            Node::Add(a, b) | Node::Sub(a, b) => a.parity().add(b.parity()),
            Node::Mul(a, b) | Node::Div(a, b) => a.parity().mul(b.parity()),
            Node::Pow(a, k) => match a.parity() {
                _ if *k == 0 => Parity::Even,
                Parity::Odd if k % 2 == 0 => Parity::Even,
                p => p,
            },
        }
    }

    fn uses_lambda(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Prim(p) => matches!(p, Primitive::CosLambda | Primitive::SinLambda),
            Node::Neg(a) | Node::Pow(a, _) => a.uses_lambda(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.uses_lambda() || b.uses_lambda(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = lex(source)?;
        let mut p = Parser { tokens, pos: 0, end: source.chars().count() + 1 };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(err(t.column, format!("unexpected {}", t.kind)));
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, theta: f64, lambda: f64) -> f64 {
        self.root.eval(theta, lambda)
    }

    pub fn parity(&self) -> Parity {
        self.root.parity()
    }

    pub fn uses_lambda(&self) -> bool {
        self.root.uses_lambda()
    }

    /// Samples on the grid. Longitude is not available on axisymmetric grids.
    pub fn field(&self, grid: &Arc<Grid>) -> Result<SphericalField> {
        if grid.mode() == GridMode::Axisymmetric && self.uses_lambda() {
            return Err(err(0, "lambda is not available on an axisymmetric grid".into()));
        }
        SphericalField::from_fn(grid.clone(), |t, l| self.root.eval(t, l))
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

fn err(column: usize, message: String) -> Error {
    Error::Expression { column, message }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(x) => write!(f, "number {x}"),
            Kind::Ident(s) => write!(f, "'{s}'"),
            Kind::Op(c) => write!(f, "'{c}'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| err(column, format!("malformed number '{text}'")))?;
            out.push(Token { kind: Kind::Num(v), column });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { kind: Kind::Ident(chars[start..i].iter().collect()), column });
        } else if "+-*/^()".contains(c) {
            out.push(Token { kind: Kind::Op(c), column });
            i += 1;
        } else {
            return Err(err(column, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| err(self.end, "unexpected end of expression".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: Kind::Op(c), .. }) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        let t = self.next()?;
        if t.kind == Kind::Op(op) {
            Ok(())
        } else {
            Err(err(t.column, format!("expected '{op}', found {}", t.kind)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let t = self.next()?;
            match t.kind {
                Kind::Num(x) if x >= 0.0 && x.fract() == 0.0 && x <= 64.0 => {
                    return Ok(Node::Pow(Box::new(base), x as u32));
                }
                _ => return Err(err(t.column, "exponent must be an integer between 0 and 64".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let t = self.next()?;
        match t.kind {
            Kind::Num(x) => Ok(Node::Const(x)),
            Kind::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Kind::Ident(ref s) if s == "pi" => Ok(Node::Const(std::f64::consts::PI)),
            Kind::Ident(ref s) if s == "cos" || s == "sin" => {
                self.expect('(')?;
                let v = self.next()?;
                let prim = match (s.as_str(), &v.kind) {
                    ("cos", Kind::Ident(x)) if x == "theta" => Primitive::CosTheta,
                    ("sin", Kind::Ident(x)) if x == "theta" => Primitive::SinTheta,
                    ("cos", Kind::Ident(x)) if x == "lambda" => Primitive::CosLambda,
                    ("sin", Kind::Ident(x)) if x == "lambda" => Primitive::SinLambda,
                    _ => {
                        return Err(err(
                            v.column,
                            format!("{s} takes 'theta' or 'lambda', found {}", v.kind),
                        ))
                    }
                };
                self.expect(')')?;
                Ok(Node::Prim(prim))
            }
            Kind::Ident(s) => Err(err(t.column, format!("unknown name '{s}'"))),
            k => Err(err(t.column, format!("unexpected {k}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_grid::build_grid;

    fn col(src: &str) -> usize {
        match Expr::parse(src) {
            Err(Error::Expression { column, .. }) => column,
            other => panic!("expected parse error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn evaluates() {
        let e = Expr::parse("1 + 0.3*cos(theta)^2 - 2e-1/4").unwrap();
        assert!((e.eval(0.4, 0.0) - (1.0 + 0.3 * 0.4f64.cos().powi(2) - 0.05)).abs() < 1e-15);
        let e = Expr::parse("-cos(lambda)*sin(theta) ^ 3 * pi").unwrap();
        let (t, l) = (1.1, 2.3);
        assert!((e.eval(t, l) + l.cos() * t.sin().powi(3) * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn parity() {
        let cases = [
            ("4", Parity::Even),
            ("1 + 0.3*cos(theta)^2", Parity::Even),
            ("sin(theta)", Parity::Even),
            ("cos(lambda)*sin(theta)", Parity::Odd),
            ("cos(lambda)*sin(theta)*cos(theta)", Parity::Even),
            ("1 + 0.1*cos(theta)", Parity::Undecided),
            ("(1 + cos(theta))^2", Parity::Undecided),
            ("cos(theta)/cos(lambda)", Parity::Even),
            ("(cos(theta) + cos(lambda))^2", Parity::Even),
        ];
        for (src, p) in cases {
            assert_eq!(Expr::parse(src).unwrap().parity(), p, "{src}");
        }
    }

    #[test]
    fn parity_matches_sampling() {
        let g = build_grid(2, GridMode::FullS2, 10).unwrap();
        for src in ["2 + cos(lambda)*sin(theta)*cos(theta)", "1 + sin(theta)^2*sin(lambda)^2", "1.5 + sin(lambda)*sin(theta)"] {
            let e = Expr::parse(src).unwrap();
            let f = e.field(&g).unwrap();
            let dev = (0..g.len())
                .map(|i| (f.values()[i] - f.values()[g.antipode()[i]]).abs())
                .fold(0.0, f64::max);
            match e.parity() {
                Parity::Even => assert!(dev < 1e-14, "{src}"),
                Parity::Odd => assert!(dev > 0.1, "{src}"),
                Parity::Undecided => {}
            }
        }
    }

    #[test]
    fn errors_carry_columns() {
        assert_eq!(col("1 + cos(x)"), 9);
        assert_eq!(col("1 + tan(theta)"), 5);
        assert_eq!(col("2 ^ 1.5"), 5);
        assert_eq!(col("(1 + 2"), 7);
        assert_eq!(col("1 $ 2"), 3);
        assert_eq!(col("1 2"), 3);
        assert_eq!(col(""), 1);
    }

    #[test]
    fn lambda_rejected_on_axisymmetric_grid() {
        let g = build_grid(3, GridMode::Axisymmetric, 8).unwrap();
        assert!(Expr::parse("1 + cos(lambda)").unwrap().field(&g).is_err());
        assert!(Expr::parse("1 + cos(theta)^2").unwrap().field(&g).is_ok());
    }
}
