use super::{Expr, Func};

/// Symbolic derivative. The result is left unsimplified.
pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    let d = |x: &Expr| differentiate(x, var);
    match e {
        Expr::Num(_) | Expr::Pi => Expr::zero(),
        Expr::Var(v) => Expr::num(if v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::neg(d(a)),
        Expr::Add(a, b) => Expr::add(d(a), d(b)),
        Expr::Sub(a, b) => Expr::sub(d(a), d(b)),
        Expr::Mul(a, b) => Expr::add(Expr::mul(d(a), (**b).clone()), Expr::mul((**a).clone(), d(b))),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(Expr::mul(d(a), (**b).clone()), Expr::mul((**a).clone(), d(b))),
            Expr::powi((**b).clone(), 2),
        ),
        Expr::Pow(base, exponent) => {
            if exponent.depends_on(var) {
                // u^v * (v' ln u + v u'/u)
                Expr::mul(
                    e.clone(),
                    Expr::add(
                        Expr::mul(d(exponent), Expr::call(Func::Log, (**base).clone())),
                        Expr::div(Expr::mul((**exponent).clone(), d(base)), (**base).clone()),
                    ),
                )
            } else {
                Expr::mul(
                    Expr::mul(
                        (**exponent).clone(),
                        Expr::pow((**base).clone(), Expr::sub((**exponent).clone(), Expr::one())),
                    ),
                    d(base),
                )
            }
        }
        Expr::Call(f, a) => {
            let u = (**a).clone();
            let outer = match f {
                Func::Sin => Expr::cos(u),
                Func::Cos => Expr::neg(Expr::sin(u)),
                Func::Tan => Expr::div(Expr::one(), Expr::powi(Expr::cos(u), 2)),
                Func::Asin => Expr::div(
                    Expr::one(),
                    Expr::call(Func::Sqrt, Expr::sub(Expr::one(), Expr::powi(u, 2))),
                ),
                Func::Acos => Expr::neg(Expr::div(
                    Expr::one(),
                    Expr::call(Func::Sqrt, Expr::sub(Expr::one(), Expr::powi(u, 2))),
                )),
                Func::Atan => Expr::div(Expr::one(), Expr::add(Expr::one(), Expr::powi(u, 2))),
                Func::Sqrt => Expr::div(Expr::one(), Expr::mul(Expr::num(2.0), Expr::call(Func::Sqrt, u))),
                Func::Exp => Expr::call(Func::Exp, u),
                Func::Log => Expr::div(Expr::one(), u),
            };
            Expr::mul(outer, d(a))
        }
        Expr::Extern(f) => {
            if f.var() == var {
                f.derivative().clone()
            } else {
                Expr::zero()
            }
        }
    }
}

fn is_constant(e: &Expr) -> bool {
    matches!(e, Expr::Num(_) | Expr::Pi)
}

/// Fold a node whose children are all constants, if it evaluates cleanly.
fn fold(e: Expr) -> Expr {
    let all_const = match &e {
        Expr::Neg(a) | Expr::Call(_, a) => is_constant(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            is_constant(a) && is_constant(b)
        }
        _ => false,
    };
    if all_const {
        if let Ok(v) = e.eval_with(&|_: &str| None) {
            return Expr::Num(v);
        }
    }
    e
}

/// Constant folding plus the identities `x+0`, `x-0`, `x*1`, `x*0`, `x/1`,
/// `0/x`, `x^1` and `x^0`. Nothing else is rewritten.
pub(super) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Pi | Expr::Var(_) | Expr::Extern(_) => e.clone(),
        Expr::Neg(a) => fold(Expr::neg(simplify(a))),
        Expr::Call(f, a) => fold(Expr::call(*f, simplify(a))),
        Expr::Add(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if b.is_zero_literal() {
                a
            } else if a.is_zero_literal() {
                b
            } else {
                fold(Expr::add(a, b))
            }
        }
        Expr::Sub(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if b.is_zero_literal() {
                a
            } else {
                fold(Expr::sub(a, b))
            }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a.is_zero_literal() || b.is_zero_literal() {
                Expr::zero()
            } else if a.is_one_literal() {
                b
            } else if b.is_one_literal() {
                a
            } else {
                fold(Expr::mul(a, b))
            }
        }
        Expr::Div(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if b.is_one_literal() {
                a
            } else if a.is_zero_literal() && !b.is_zero_literal() {
                Expr::zero()
            } else {
                fold(Expr::div(a, b))
            }
        }
        Expr::Pow(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if b.is_one_literal() {
                a
            } else if b.is_zero_literal() {
                Expr::one()
            } else {
                fold(Expr::pow(a, b))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Bindings};
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn constant_has_zero_derivative() {
        assert_eq!(parse("c").unwrap().derivative("theta"), Expr::zero());
        assert_eq!(parse("3.5").unwrap().derivative("theta"), Expr::zero());
    }

    #[test]
    fn derivative_of_cos() {
        let d = parse("cos(t)").unwrap().derivative("t");
        let v = d.eval_at("t", 0.3).unwrap();
        assert!((v + 0.29552020666133955).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_sin_squared_matches_central_difference() {
        let e = parse("sin(theta)^2").unwrap();
        let d = e.derivative("theta");
        let theta = 0.7;
        let step = 1e-6;
        let fd = (e.eval_at("theta", theta + step).unwrap() - e.eval_at("theta", theta - step).unwrap()) / (2.0 * step);
        let exact = d.eval_at("theta", theta).unwrap();
        assert!(((exact - fd) / exact).abs() < 1e-8, "{exact} vs {fd}");
        assert!((exact - 2.0 * theta.sin() * theta.cos()).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent() {
        let e = parse("x^x").unwrap();
        let d = e.derivative("x").eval_at("x", 1.7).unwrap();
        let exact = 1.7f64.powf(1.7) * (1.7f64.ln() + 1.0);
        assert!((d - exact).abs() < 1e-13);
    }

    #[test]
    fn identities() {
        assert_eq!(simplify(&Expr::add(x(), Expr::zero())), x());
        assert_eq!(
            simplify(&Expr::mul(Expr::zero(), Expr::sin(Expr::var("t")))),
            Expr::zero()
        );
        assert_eq!(simplify(&Expr::pow(x(), Expr::one())), x());
        assert_eq!(simplify(&Expr::pow(x(), Expr::zero())), Expr::one());
        assert_eq!(simplify(&Expr::mul(Expr::one(), x())), x());
        assert_eq!(simplify(&Expr::sub(x(), Expr::zero())), x());
        assert_eq!(simplify(&Expr::div(x(), Expr::one())), x());
    }

    #[test]
    fn folds_constants() {
        assert_eq!(
            simplify(&parse("pi/2").unwrap()),
            Expr::num(std::f64::consts::FRAC_PI_2)
        );
        assert_eq!(simplify(&parse("2*3 + x").unwrap()), parse("6 + x").unwrap());
        assert_eq!(simplify(&parse("-(2)").unwrap()), Expr::num(-2.0));
        // division by a folded zero is left alone
        assert_eq!(simplify(&parse("1/(1-1)").unwrap()), parse("1/0").unwrap());
    }

    #[test]
    fn simplify_keeps_values() {
        let e = parse("(x + 0)*1 + 0*sin(x) + x^1 - (y^0)*2").unwrap();
        let s = simplify(&e);
        let env = Bindings::new().with("x", 0.4).with("y", 3.0);
        assert_eq!(e.eval(&env).unwrap(), s.eval(&env).unwrap());
    }
}
