//! Dimension functions `f(r) = r^s · (ln(1/r))^(-kappa)` near 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behaviour of a dimension function as `r → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Zero,
    Positive,
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DimensionRepr", into = "DimensionRepr")]
pub struct DimensionFunction {
    s: f64,
    kappa: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionRepr {
    s: f64,
    #[serde(default)]
    kappa: f64,
}

impl TryFrom<DimensionRepr> for DimensionFunction {
    type Error = Error;
    fn try_from(r: DimensionRepr) -> Result<Self> {
        DimensionFunction::new(r.s, r.kappa)
    }
}

impl From<DimensionFunction> for DimensionRepr {
    fn from(f: DimensionFunction) -> Self {
        DimensionRepr {
            s: f.s,
            kappa: f.kappa,
        }
    }
}

/// One of the shifted functions `r^(-k) f(r)` a theorem asks about.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedCheck {
    pub label: String,
    pub shift: f64,
    pub valid: bool,
}

impl DimensionFunction {
    pub fn new(s: f64, kappa: f64) -> Result<Self> {
        if let Some(reason) = Self::invalid_reason(s, kappa) {
            return Err(Error::InvalidDimensionFunction(reason));
        }
        Ok(DimensionFunction { s, kappa })
    }

    pub fn power(s: f64) -> Result<Self> {
        Self::new(s, 0.0)
    }

    fn invalid_reason(s: f64, kappa: f64) -> Option<String> {
        if !s.is_finite() || !kappa.is_finite() {
            return Some("exponents must be finite".into());
        }
        if s < 0.0 {
            return Some(format!("s = {s} < 0: f is not increasing near 0"));
        }
        if s == 0.0 && kappa <= 0.0 {
            return Some(format!(
                "s = 0 with kappa = {kappa} <= 0: f does not tend to 0 as r -> 0"
            ));
        }
        None
    }

    /// Whether `(s, kappa)` defines a dimension function.
    pub fn is_valid(s: f64, kappa: f64) -> bool {
        Self::invalid_reason(s, kappa).is_none()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// f(r). The log factor is frozen at 1 for `r >= 1/e`, where `ln(1/r) <= 1`.
    pub fn eval(&self, r: f64) -> f64 {
        let mut v = r.powf(self.s);
        if self.kappa != 0.0 {
            let l = (1.0 / r).ln().max(1.0);
            v *= l.powf(-self.kappa);
        }
        v
    }

    /// `ln f(r)`, finite wherever `f(r)` underflows.
    pub fn ln_eval(&self, r: f64) -> f64 {
        self.ln_eval_at_ln(r.ln())
    }

    /// `ln f(r)` given `ln r`.
    pub fn ln_eval_at_ln(&self, ln_r: f64) -> f64 {
        let mut v = self.s * ln_r;
        if self.kappa != 0.0 {
            v -= self.kappa * (-ln_r).max(1.0).ln();
        }
        v
    }

    /// `r^(-k) f(r)`, failing with the violated condition when it is not a dimension function.
    pub fn shifted(&self, k: f64) -> Result<DimensionFunction> {
        let s = self.s - k;
        match Self::invalid_reason(s, self.kappa) {
            None => Ok(DimensionFunction { s, kappa: self.kappa }),
            Some(reason) => Err(Error::InvalidDimensionFunction(format!(
                "r^(-{k}) f(r): {reason}"
            ))),
        }
    }

    /// Limit of `r^(-k) f(r)` as `r → 0`.
    pub fn limit_shifted(&self, k: f64) -> Limit {
        let e = self.s - k;
        if e < 0.0 || (e == 0.0 && self.kappa < 0.0) {
            Limit::Infinite
        } else if e == 0.0 && self.kappa == 0.0 {
            Limit::Positive
        } else {
            Limit::Zero
        }
    }

    /// The shifted functions named by the measure theorems for an `m × n` system.
    pub fn derived_checks(&self, m: usize, n: usize) -> Vec<ShiftedCheck> {
        let (m, n) = (m as f64, n as f64);
        [
            ("r^(-n^2) f", n * n),
            ("r^(-(m-n-1)n) f", (m - n - 1.0) * n),
            ("r^(-(n-m+1)(m-1)) f", (n - m + 1.0) * (m - 1.0)),
            ("r^(-mn) f", m * n),
            ("r^(-(m-1)(n+1)) f", (m - 1.0) * (n + 1.0)),
        ]
        .into_iter()
        .map(|(label, shift)| ShiftedCheck {
            label: label.to_string(),
            shift,
            valid: Self::is_valid(self.s - shift, self.kappa),
        })
        .collect()
    }
}
