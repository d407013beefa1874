//! Literal syntax for approximating and dimension functions.
//!
//! `powerlog:c,tau[,kappa]`, `table:v1,v2,...`, `table:@values.csv`, and
//! `percoord:[lit;lit;...]` for ψ; `power:s`, `powerlog:s,kappa` or a bare `s` for f.

use std::fs;

use smallforms::domain::{ApproxFunction, DimensionFunction, PowerLog};
use smallforms::{Error, Result, Scalar};

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: not a number: {s:?}")))
}

pub fn parse_psi(literal: &str) -> Result<ApproxFunction> {
    let (family, body) = literal
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("psi literal {literal:?} lacks a family prefix")))?;
    match family.trim() {
        "powerlog" => {
            let parts: Vec<&str> = body.split(',').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(Error::Parse(format!("powerlog needs c,tau[,kappa], got {body:?}")));
            }
            let c: Scalar = parts[0].parse()?;
            let tau = number(parts[1], "tau")?;
            let kappa = parts.get(2).map_or(Ok(0.0), |k| number(k, "kappa"))?;
            PowerLog::new(c, tau, kappa).map(ApproxFunction::PowerLog)
        }
        "table" => {
            let text = match body.strip_prefix('@') {
                Some(path) => fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?,
                None => body.to_string(),
            };
            let values = text
                .lines()
                .filter(|l| !l.trim_start().starts_with('#'))
                .flat_map(|l| l.split([',', ' ', '\t']))
                .filter(|t| !t.trim().is_empty())
                .map(|t| number(t, "table value"))
                .collect::<Result<Vec<f64>>>()?;
            ApproxFunction::table(values, 1)
        }
        "percoord" => {
            let inner = body
                .trim()
                .strip_prefix('[')
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("percoord needs [lit;lit;...], got {body:?}")))?;
            let parts = inner.split(';').map(parse_psi).collect::<Result<Vec<_>>>()?;
            ApproxFunction::per_coordinate(parts)
        }
        other => Err(Error::Parse(format!("unknown psi family {other:?}"))),
    }
}

pub fn parse_f(literal: &str) -> Result<DimensionFunction> {
    match literal.split_once(':') {
        None => DimensionFunction::power(number(literal, "s")?),
        Some(("power", s)) => DimensionFunction::power(number(s, "s")?),
        Some(("powerlog", body)) => {
            let (s, k) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("powerlog f needs s,kappa, got {body:?}")))?;
            DimensionFunction::new(number(s, "s")?, number(k, "kappa")?)
        }
        Some((other, _)) => Err(Error::Parse(format!("unknown dimension function family {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_families() {
        let p = parse_psi("powerlog:1,2,0").unwrap();
        assert!(p.has_exact_form());
        assert_eq!(p.eval(2).unwrap(), 0.25);
        assert!(!parse_psi("powerlog:0.5,1.5").unwrap().has_exact_form());
        assert_eq!(parse_psi("table:0.5, 0.25,0.1").unwrap().max_height(), Some(3));
        let pc = parse_psi("percoord:[powerlog:1,1;powerlog:2,3,0]").unwrap();
        assert_eq!(pc.per_form(2).unwrap().len(), 2);
        assert!(parse_psi("powerlog:1").is_err());
        assert!(parse_psi("cubic:1,2").is_err());
    }

    #[test]
    fn table_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.csv");
        fs::write(&path, "# psi values\n0.9\n0.5,0.4\n").unwrap();
        let p = parse_psi(&format!("table:@{}", path.display())).unwrap();
        assert_eq!(p.eval(3).unwrap(), 0.4);
    }

    #[test]
    fn dimension_literals() {
        assert_eq!(parse_f("2.5").unwrap(), DimensionFunction::power(2.5).unwrap());
        assert_eq!(parse_f("power:3").unwrap(), DimensionFunction::power(3.0).unwrap());
        assert_eq!(parse_f("powerlog:3,1").unwrap(), DimensionFunction::new(3.0, 1.0).unwrap());
    }
}
