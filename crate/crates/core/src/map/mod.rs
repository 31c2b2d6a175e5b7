//! Scalar maps `f: ℝ → ℝ` with exact first derivatives.
//!
//! A map is either a built-in family selected by a designator such as
//! `logistic:r=4`, or an expression in `x` and named parameters, e.g.
//! `r*x*(1-x)` with `r` bound separately.

mod dual;
mod expr;

use std::collections::BTreeMap;
use std::fmt;

pub use dual::Dual;
pub use expr::{parse_expr, Expr, Func};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// `f(x) = r·x·(1 − x)`
    Logistic { r: f64 },
    /// `f(x) = x² + c`
    Quadratic { c: f64 },
    /// `f(x) = b·x − x³`
    Cubic { b: f64 },
}

impl Builtin {
    fn from_designator(name: &str, params: &BTreeMap<String, f64>) -> Result<Option<Self>> {
        let key = match name {
            "logistic" => "r",
            "quadratic" => "c",
            "cubic" => "b",
            _ => return Ok(None),
        };
        if let Some(extra) = params.keys().find(|k| k.as_str() != key) {
            return Err(Error::UnknownIdentifier {
                name: extra.clone(),
                position: 0,
            });
        }
        let v = *params.get(key).ok_or_else(|| {
            Error::InvalidArgument(format!("builtin `{name}` needs parameter `{key}`"))
        })?;
        Ok(Some(match name {
            "logistic" => Builtin::Logistic { r: v },
            "quadratic" => Builtin::Quadratic { c: v },
            _ => Builtin::Cubic { b: v },
        }))
    }

    fn default_domain(&self) -> (f64, f64) {
        match self {
            Builtin::Logistic { .. } => (0.0, 1.0),
            Builtin::Quadratic { .. } | Builtin::Cubic { .. } => (-2.0, 2.0),
        }
    }

    fn eval_dual(&self, x: Dual) -> Dual {
        match *self {
            Builtin::Logistic { r } => Dual::constant(r) * x * (Dual::constant(1.0) - x),
            Builtin::Quadratic { c } => x * x + Dual::constant(c),
            Builtin::Cubic { b } => Dual::constant(b) * x - x.powi(3),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    Builtin(Builtin),
    Expression {
        expr: Expr,
        params: BTreeMap<String, f64>,
    },
}

/// An immutable scalar map together with the interval searched for cycles.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    kind: MapKind,
    domain: (f64, f64),
}

/// Default search interval for expression maps.
pub const DEFAULT_EXPR_DOMAIN: (f64, f64) = (0.0, 1.0);

impl MapSpec {
    pub fn builtin(b: Builtin) -> Self {
        Self {
            domain: b.default_domain(),
            kind: MapKind::Builtin(b),
        }
    }

    pub fn logistic(r: f64) -> Self {
        Self::builtin(Builtin::Logistic { r })
    }

    /// Parses a designator `name:key=val,...` or a raw expression.
    /// `extra` binds parameters (and overrides designator values).
    pub fn parse(source: &str, extra: &BTreeMap<String, f64>) -> Result<Self> {
        let source = source.trim();
        let (head, tail) = match source.split_once(':') {
            Some((h, t)) => (h.trim(), Some(t)),
            None => (source, None),
        };
        let mut params = BTreeMap::new();
        if let Some(tail) = tail {
            let offset = source.len() - tail.len();
            for (k, v) in parse_bindings(tail, offset)? {
                params.insert(k, v);
            }
        }
        params.extend(extra.iter().map(|(k, v)| (k.clone(), *v)));

        if let Some(b) = Builtin::from_designator(head, &params)? {
            return Ok(Self::builtin(b));
        }
        if tail.is_some() {
            return Err(Error::UnknownIdentifier {
                name: head.to_string(),
                position: 0,
            });
        }
        let expr = parse_expr(source, &|name| params.contains_key(name))?;
        let used: Vec<String> = expr.params().into_iter().map(String::from).collect();
        params.retain(|k, _| used.contains(k));
        Ok(Self {
            kind: MapKind::Expression { expr, params },
            domain: DEFAULT_EXPR_DOMAIN,
        })
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "domain [{lo}, {hi}] must be a finite interval with lo < hi"
            )));
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `(f(x), f′(x))` by forward-mode propagation.
    pub fn eval_dual(&self, x: f64) -> Result<Dual> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("x = {x} is not finite")));
        }
        let d = match &self.kind {
            MapKind::Builtin(b) => b.eval_dual(Dual::variable(x)),
            MapKind::Expression { expr, params } => expr.eval_dual(Dual::variable(x), params)?,
        };
        if !d.value.is_finite() || !d.deriv.is_finite() {
            return Err(Error::Overflow { x });
        }
        Ok(d)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("x = {x} is not finite")));
        }
        let v = match &self.kind {
            MapKind::Builtin(b) => b.eval_dual(Dual::constant(x)).value,
            MapKind::Expression { expr, params } => {
                expr.eval_dual(Dual::constant(x), params)?.value
            }
        };
        if !v.is_finite() {
            return Err(Error::Overflow { x });
        }
        Ok(v)
    }

    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        Ok(self.eval_dual(x)?.deriv)
    }

    /// `f^n(x)`.
    pub fn iterate(&self, x: f64, n: usize) -> Result<f64> {
        (0..n).try_fold(x, |acc, _| self.eval(acc))
    }
}

fn parse_bindings(text: &str, offset: usize) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    let mut at = offset;
    for part in text.split(',') {
        let trimmed = part.trim();
        if !trimmed.is_empty() {
            let (k, v) = trimmed.split_once('=').ok_or_else(|| Error::Syntax {
                position: at,
                message: format!("expected key=value, got `{trimmed}`"),
            })?;
            let v = v.trim().parse::<f64>().map_err(|_| Error::Syntax {
                position: at,
                message: format!("`{}` is not a number", v.trim()),
            })?;
            out.push((k.trim().to_string(), v));
        }
        at += part.len() + 1;
    }
    Ok(out)
}

/// Parses a single `key=value` binding as used by `--param`.
pub fn parse_binding(text: &str) -> Result<(String, f64)> {
    let mut v = parse_bindings(text, 0)?;
    if v.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected one key=value, got `{text}`"
        )));
    }
    Ok(v.remove(0))
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Builtin(Builtin::Logistic { r }) => write!(f, "logistic:r={r}"),
            MapKind::Builtin(Builtin::Quadratic { c }) => write!(f, "quadratic:c={c}"),
            MapKind::Builtin(Builtin::Cubic { b }) => write!(f, "cubic:b={b}"),
            MapKind::Expression { expr, .. } => write!(f, "{expr}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn designator() {
        let m = MapSpec::parse("logistic:r=4", &no_params()).unwrap();
        assert_eq!(m.kind(), &MapKind::Builtin(Builtin::Logistic { r: 4.0 }));
        assert_eq!(m.domain(), (0.0, 1.0));
        assert_eq!(m.to_string(), "logistic:r=4");
    }

    #[test]
    fn designator_with_param_flag() {
        let extra = BTreeMap::from([("r".to_string(), 3.2)]);
        let m = MapSpec::parse("logistic", &extra).unwrap();
        assert_eq!(m.eval(0.5).unwrap(), 0.8);
        assert!(MapSpec::parse("logistic", &no_params()).is_err());
        assert!(MapSpec::parse("logistic:r=4,k=2", &no_params()).is_err());
        assert!(MapSpec::parse("henon:a=1", &no_params()).is_err());
        assert!(MapSpec::parse("logistic:r", &no_params()).is_err());
    }

    #[test]
    fn expression_with_params() {
        let extra = BTreeMap::from([("r".to_string(), 4.0)]);
        let m = MapSpec::parse("r*x*(1-x)", &extra).unwrap();
        assert_eq!(m.eval(0.25).unwrap(), 0.75);
        assert!(matches!(
            MapSpec::parse("r*x*(1-x)", &no_params()),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn builtin_values() {
        assert_eq!(MapSpec::logistic(4.0).eval(0.75).unwrap(), 0.75);
        assert_eq!(MapSpec::logistic(3.2).eval(0.5).unwrap(), 0.8);
        let q = MapSpec::builtin(Builtin::Quadratic { c: -1.0 });
        assert_eq!(q.eval(0.0).unwrap(), -1.0);
        let c = MapSpec::builtin(Builtin::Cubic { b: 3.0 });
        assert_eq!(c.eval(2.0).unwrap(), -2.0);
        assert_eq!(c.eval_deriv(1.0).unwrap(), 0.0);
    }

    #[test]
    fn derivatives() {
        assert_eq!(MapSpec::logistic(4.0).eval_deriv(0.75).unwrap(), -2.0);
        assert_eq!(MapSpec::logistic(2.7).eval_deriv(0.0).unwrap(), 2.7);
        let s = MapSpec::parse("sin(x)", &no_params()).unwrap();
        assert_eq!(s.eval_deriv(0.0).unwrap(), 1.0);
        let a = MapSpec::parse("abs(x)", &no_params()).unwrap();
        assert_eq!(a.eval_deriv(0.0).unwrap(), 1.0);
    }

    #[test]
    fn logistic_derivative_vs_central_difference() {
        let m = MapSpec::logistic(4.0);
        let h = 1e-6;
        let fd = (m.eval(0.75 + h).unwrap() - m.eval(0.75 - h).unwrap()) / (2.0 * h);
        assert!((fd - m.eval_deriv(0.75).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn eval_errors() {
        let m = MapSpec::parse("1/x", &no_params()).unwrap();
        assert!(matches!(m.eval(0.0), Err(Error::Domain(_))));
        let m = MapSpec::parse("exp(x)", &no_params()).unwrap();
        assert!(matches!(m.eval(1000.0), Err(Error::Overflow { .. })));
        assert!(MapSpec::logistic(4.0).eval(f64::NAN).is_err());
    }

    #[test]
    fn domain_validation() {
        let m = MapSpec::logistic(4.0);
        assert!(m.clone().with_domain(0.5, 0.5).is_err());
        assert!(m.clone().with_domain(1.0, 0.0).is_err());
        assert_eq!(m.with_domain(-1.0, 2.0).unwrap().domain(), (-1.0, 2.0));
    }

    #[test]
    fn binding_parse() {
        assert_eq!(parse_binding("r=3.5").unwrap(), ("r".into(), 3.5));
        assert!(parse_binding("r").is_err());
        assert!(parse_binding("r=a").is_err());
    }
}
