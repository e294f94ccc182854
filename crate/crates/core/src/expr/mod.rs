//! Scalar expression trees over named real variables.
//!
//! Every user-supplied function of the laboratory (couplings, potentials,
//! frequencies, the scale function `rho`) is an [`Expr`]. Trees are
//! immutable after construction and can be shared freely between threads.
//!
//! ```
//! use ermakov_core::expr::{parse, Bindings};
//!
//! let e = parse("(g1 + g2*cos(theta))/sin(theta)^2").unwrap();
//! let env = Bindings::new()
//!     .with("theta", std::f64::consts::FRAC_PI_2)
//!     .with("g1", 1.0)
//!     .with("g2", 0.0);
//! assert!((e.eval(&env).unwrap() - 1.0).abs() < 1e-15);
//! ```

mod calculus;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parser::{parse, ParseError, ParseErrorKind};

/// Elementary functions understood by the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Asin,
        Func::Acos,
        Func::Atan,
        Func::Sqrt,
        Func::Exp,
        Func::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Asin => "asin",
            Func::Acos => "acos",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        let domain = |what: &'static str| EvalError::Domain { op: what, value: x };
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Tan => Ok(x.tan()),
            Func::Asin if (-1.0..=1.0).contains(&x) => Ok(x.asin()),
            Func::Asin => Err(domain("asin")),
            Func::Acos if (-1.0..=1.0).contains(&x) => Ok(x.acos()),
            Func::Acos => Err(domain("acos")),
            Func::Atan => Ok(x.atan()),
            Func::Sqrt if x >= 0.0 => Ok(x.sqrt()),
            Func::Sqrt => Err(domain("sqrt")),
            Func::Exp => Ok(x.exp()),
            Func::Log if x > 0.0 => Ok(x.ln()),
            Func::Log => Err(domain("log")),
        }
    }
}

/// Failure while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in {op} at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
    #[error("{name}: {message}")]
    External { name: String, message: String },
}

type ExternEval = dyn Fn(f64) -> Result<f64, EvalError> + Send + Sync;

/// A numerically defined function of a single bound variable.
///
/// Used for quantities that have no closed form in the grammar, such as a
/// potential defined through a quadrature. The symbolic derivative is
/// supplied alongside so that the tree stays differentiable.
pub struct ExternFn {
    name: String,
    var: String,
    eval: Box<ExternEval>,
    derivative: Expr,
}

impl ExternFn {
    pub fn new<F>(name: impl Into<String>, var: impl Into<String>, eval: F, derivative: Expr) -> Self
    where
        F: Fn(f64) -> Result<f64, EvalError> + Send + Sync + 'static,
    {
        ExternFn {
            name: name.into(),
            var: var.into(),
            eval: Box::new(eval),
            derivative,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn derivative(&self) -> &Expr {
        &self.derivative
    }

    pub fn call(&self, x: f64) -> Result<f64, EvalError> {
        (self.eval)(x)
    }
}

impl fmt::Debug for ExternFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternFn")
            .field("name", &self.name)
            .field("var", &self.var)
            .finish_non_exhaustive()
    }
}

/// Abstract syntax tree of a scalar expression.
#[derive(Clone, Debug)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Extern(Arc<ExternFn>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Num(a), Num(b)) => a == b,
            (Pi, Pi) => true,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d))
            | (Sub(a, b), Sub(c, d))
            | (Mul(a, b), Mul(c, d))
            | (Div(a, b), Div(c, d))
            | (Pow(a, b), Pow(c, d)) => a == c && b == d,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            (Extern(a), Extern(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

// Constructors. Kept as free-standing associated functions so that the
// builders in `model` read close to the formulas they encode.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn one() -> Expr {
        Expr::Num(1.0)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Pow(Box::new(a), Box::new(b))
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        Expr::pow(a, Expr::Num(n as f64))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::call(Func::Sin, a)
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::call(Func::Cos, a)
    }

    pub fn tan(a: Expr) -> Expr {
        Expr::call(Func::Tan, a)
    }

    pub fn extern_fn(f: ExternFn) -> Expr {
        Expr::Extern(Arc::new(f))
    }
}

impl Expr {
    /// True for the literal `0` node only; no algebra is attempted.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    /// Value of a tree containing no variables, if it evaluates cleanly.
    pub fn constant_value(&self) -> Option<f64> {
        if self.free_vars().is_empty() {
            self.eval_with(&|_: &str| None).ok()
        } else {
            None
        }
    }

    /// Names of all variables the tree reads.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Pi => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Extern(f) => {
                out.insert(f.var.clone());
            }
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => false,
            Expr::Var(v) => v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Expr::Extern(f) => f.var == var,
        }
    }

    /// Replace every occurrence of `var` by `replacement`.
    ///
    /// External nodes keep their bound variable; substituting into it is
    /// refused.
    pub fn substitute(&self, var: &str, replacement: &Expr) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Num(_) | Expr::Pi => self.clone(),
            Expr::Var(v) if v == var => replacement.clone(),
            Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::neg(a.substitute(var, replacement)?),
            Expr::Add(a, b) => Expr::add(a.substitute(var, replacement)?, b.substitute(var, replacement)?),
            Expr::Sub(a, b) => Expr::sub(a.substitute(var, replacement)?, b.substitute(var, replacement)?),
            Expr::Mul(a, b) => Expr::mul(a.substitute(var, replacement)?, b.substitute(var, replacement)?),
            Expr::Div(a, b) => Expr::div(a.substitute(var, replacement)?, b.substitute(var, replacement)?),
            Expr::Pow(a, b) => Expr::pow(a.substitute(var, replacement)?, b.substitute(var, replacement)?),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(var, replacement)?),
            Expr::Extern(f) if f.var == var => {
                return Err(EvalError::External {
                    name: f.name.clone(),
                    message: format!("cannot substitute into the bound variable `{var}`"),
                })
            }
            Expr::Extern(_) => self.clone(),
        })
    }

    /// Substitute numeric values for named parameters.
    pub fn bind_constants(&self, params: &BTreeMap<String, f64>) -> Result<Expr, EvalError> {
        let mut out = self.clone();
        for (name, value) in params {
            if out.depends_on(name) {
                out = out.substitute(name, &Expr::Num(*value))?;
            }
        }
        Ok(out)
    }

    /// Evaluate against a binding map.
    pub fn eval(&self, env: &Bindings) -> Result<f64, EvalError> {
        self.eval_with(&|name: &str| env.get(name))
    }

    /// Evaluate with an arbitrary variable lookup.
    pub fn eval_with<L>(&self, lookup: &L) -> Result<f64, EvalError>
    where
        L: Fn(&str) -> Option<f64> + ?Sized,
    {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(a) => -a.eval_with(lookup)?,
            Expr::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            Expr::Sub(a, b) => a.eval_with(lookup)? - b.eval_with(lookup)?,
            Expr::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            Expr::Div(a, b) => {
                let num = a.eval_with(lookup)?;
                let den = b.eval_with(lookup)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, b) => power(a.eval_with(lookup)?, b.eval_with(lookup)?)?,
            Expr::Call(f, a) => f.apply(a.eval_with(lookup)?)?,
            Expr::Extern(f) => {
                let x = lookup(&f.var).ok_or_else(|| EvalError::Unbound(f.var.clone()))?;
                f.call(x)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluate a function of one variable.
    pub fn eval_at(&self, var: &str, x: f64) -> Result<f64, EvalError> {
        self.eval_with(&|name: &str| (name == var).then_some(x))
    }

    pub fn differentiate(&self, var: &str) -> Expr {
        calculus::differentiate(self, var)
    }

    pub fn simplify(&self) -> Expr {
        calculus::simplify(self)
    }

    /// Simplified derivative, the form most callers want.
    pub fn derivative(&self, var: &str) -> Expr {
        self.differentiate(var).simplify()
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    let integral = exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64;
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if integral {
        Ok(base.powi(exponent as i32))
    } else if base < 0.0 {
        Err(EvalError::Domain { op: "pow", value: base })
    } else {
        Ok(base.powf(exponent))
    }
}

/// Variable bindings for [`Expr::eval`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    vars: BTreeMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.vars.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vars.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<'a> FromIterator<(&'a str, f64)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        let mut b = Bindings::new();
        for (k, v) in iter {
            b.set(k, v);
        }
        b
    }
}

// Printing. The output re-parses to the same tree; parentheses are added
// only where precedence or associativity requires them.

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
        Expr::Neg(_) => PREC_UNARY,
        Expr::Num(v) if v.is_sign_negative() => PREC_UNARY,
        Expr::Pow(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

struct Paren<'a>(&'a Expr, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(a) => {
                // `-2` would read back as a negative literal, so a negated
                // literal keeps its parentheses.
                let wrap = precedence(a) < PREC_ATOM || matches!(**a, Expr::Num(_));
                write!(f, "-{}", Paren(a, wrap))
            }
            Expr::Add(a, b) => write!(f, "{} + {}", a, Paren(b, precedence(b) <= PREC_ADD)),
            Expr::Sub(a, b) => write!(f, "{} - {}", a, Paren(b, precedence(b) <= PREC_ADD)),
            Expr::Mul(a, b) => write!(
                f,
                "{}*{}",
                Paren(a, precedence(a) < PREC_MUL),
                Paren(b, precedence(b) <= PREC_MUL)
            ),
            Expr::Div(a, b) => write!(
                f,
                "{}/{}",
                Paren(a, precedence(a) < PREC_MUL),
                Paren(b, precedence(b) <= PREC_MUL)
            ),
            Expr::Pow(a, b) => write!(
                f,
                "{}^{}",
                Paren(a, precedence(a) <= PREC_POW),
                Paren(b, precedence(b) < PREC_UNARY)
            ),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
            Expr::Extern(ext) => write!(f, "{}({})", ext.name, ext.var),
        }
    }
}
