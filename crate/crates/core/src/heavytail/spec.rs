//! Text form of a law: `pareto(alpha,x0,mu)`, `weibull(beta,scale,mu)`,
//! `lognormal(muL,sigmaL,mu)`, `twopoint(u,v,p)`. Names are
//! case-insensitive; parameters are decimal literals.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::scalar::Real;

fn syntax(column: usize, token: &str, message: &str) -> Error {
    Error::LawSyntax { column, token: token.to_string(), message: message.to_string() }
}

fn is_decimal_literal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    let mantissa_ok = digits(int) && frac.is_none_or(digits) && !(int.is_empty() && frac.is_none_or(str::is_empty));
    let exponent_ok = exponent.is_none_or(|e| {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        !e.is_empty() && digits(e)
    });
    mantissa_ok && exponent_ok
}

/// Parses a law spec. Columns in diagnostics are 1-based.
pub fn parse_law<T: Real>(input: &str) -> Result<TailLaw<T>> {
    let open = input.find('(').ok_or_else(|| syntax(input.len() + 1, input.trim(), "expected `(`"))?;
    let name_raw = &input[..open];
    let name = name_raw.trim().to_ascii_lowercase();
    let name_col = name_raw.len() - name_raw.trim_start().len() + 1;
    let arity = match name.as_str() {
        "pareto" | "weibull" | "lognormal" | "twopoint" => 3,
        _ => return Err(syntax(name_col, name_raw.trim(), "unknown law family")),
    };
    let close = input
        .rfind(')')
        .filter(|&c| c > open)
        .ok_or_else(|| syntax(input.len() + 1, "", "expected `)`"))?;
    let trailing = &input[close + 1..];
    if !trailing.trim().is_empty() {
        let col = close + 2 + (trailing.len() - trailing.trim_start().len());
        return Err(syntax(col, trailing.trim(), "unexpected trailing input"));
    }

    let mut params = Vec::with_capacity(arity);
    let mut offset = open + 1;
    for raw in input[open + 1..close].split(',') {
        let tok = raw.trim();
        let col = offset + (raw.len() - raw.trim_start().len()) + 1;
        if !is_decimal_literal(tok) {
            return Err(syntax(col, tok, "expected a decimal literal"));
        }
        let value: f64 = tok.parse().map_err(|_| syntax(col, tok, "expected a decimal literal"))?;
        params.push((T::lit(value), col, tok));
        offset += raw.len() + 1;
    }
    if params.len() != arity {
        return Err(syntax(
            open + 1,
            &input[open..=close],
            &format!("`{name}` takes {arity} parameters, got {}", params.len()),
        ));
    }
    let (a, b, c) = (params[0].0, params[1].0, params[2].0);
    match name.as_str() {
        "pareto" => TailLaw::pareto(a, b, c),
        "weibull" => TailLaw::weibull(a, b, c),
        "lognormal" => TailLaw::lognormal(a, b, c),
        _ => TailLaw::two_point(a, b, c),
    }
}

impl<T: Real> FromStr for TailLaw<T> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_law(s)
    }
}

impl<T: Real> fmt::Display for TailLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailLaw::ParetoShift { alpha, x0, mu } => write!(f, "pareto({alpha},{x0},{mu})"),
            TailLaw::WeibullShift { beta, scale, mu } => write!(f, "weibull({beta},{scale},{mu})"),
            TailLaw::LogNormalShift { mu_l, sigma_l, mu } => {
                write!(f, "lognormal({mu_l},{sigma_l},{mu})")
            }
            TailLaw::TwoPoint { up, down, p } => write!(f, "twopoint({up},{down},{p})"),
        }
    }
}
