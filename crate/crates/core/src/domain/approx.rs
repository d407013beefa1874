//! Approximating functions ψ and their normalized form Ψ(r) = ψ(r)/r.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{float_to_rational, Scalar};

/// `ψ(r) = c · r^(-tau) · (ln(r+1))^(-kappa)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PowerLogRepr", into = "PowerLogRepr")]
pub struct PowerLog {
    c: Scalar,
    tau: f64,
    kappa: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerLogRepr {
    c: Scalar,
    tau: f64,
    #[serde(default)]
    kappa: f64,
}

impl TryFrom<PowerLogRepr> for PowerLog {
    type Error = Error;
    fn try_from(r: PowerLogRepr) -> Result<Self> {
        PowerLog::new(r.c, r.tau, r.kappa)
    }
}

impl From<PowerLog> for PowerLogRepr {
    fn from(p: PowerLog) -> Self {
        PowerLogRepr {
            c: p.c,
            tau: p.tau,
            kappa: p.kappa,
        }
    }
}

impl PowerLog {
    pub fn new(c: Scalar, tau: f64, kappa: f64) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidApproxFunction(m.to_string()));
        if !c.is_positive() || !c.to_f64().is_finite() {
            return bad("coefficient c must be positive and finite");
        }
        if !tau.is_finite() || !kappa.is_finite() {
            return bad("exponents must be finite");
        }
        if tau < 0.0 {
            return bad("tau < 0 makes psi grow");
        }
        if tau == 0.0 && kappa <= 0.0 {
            return bad("tau = 0 requires kappa > 0 for psi to tend to 0");
        }
        Ok(PowerLog { c, tau, kappa })
    }

    pub fn c(&self) -> &Scalar {
        &self.c
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn eval(&self, r: u64) -> f64 {
        let rf = r as f64;
        let mut v = self.c.to_f64() * rf.powf(-self.tau);
        if self.kappa != 0.0 {
            v *= ((rf + 1.0).ln()).powf(-self.kappa);
        }
        v
    }

    /// True when `c / r^tau` is the whole formula, i.e. integer tau and no log factor.
    pub fn has_exact_form(&self) -> bool {
        self.kappa == 0.0 && self.tau.fract() == 0.0 && self.tau <= u32::MAX as f64
    }

    fn eval_exact(&self, r: u64) -> Result<BigRational> {
        if self.has_exact_form() {
            let c = self.c.to_rational()?;
            let denom: BigInt = Pow::pow(BigInt::from(r), self.tau as u32);
            Ok(c / BigRational::from_integer(denom))
        } else {
            float_to_rational(self.eval(r))
        }
    }

    /// Non-increasing on all integers `r >= 1`.
    fn is_non_increasing(&self) -> bool {
        // (r+1) ln(r+1) / r is increasing on r >= 1, so r = 1 is the binding case.
        self.kappa >= 0.0 || -self.kappa <= 2.0 * std::f64::consts::LN_2 * self.tau
    }
}

/// Tabulated ψ on `r = 1..=values.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct Table {
    values: Vec<f64>,
    cut: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRepr {
    values: Vec<f64>,
    #[serde(default = "default_cut")]
    cut: usize,
}

fn default_cut() -> usize {
    1
}

impl TryFrom<TableRepr> for Table {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        Table::new(r.values, r.cut)
    }
}

impl From<Table> for TableRepr {
    fn from(t: Table) -> Self {
        TableRepr {
            values: t.values,
            cut: t.cut,
        }
    }
}

impl Table {
    /// `cut` is the 1-based index from which the values must be non-increasing.
    pub fn new(values: Vec<f64>, cut: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidApproxFunction(m));
        if values.is_empty() {
            return bad("empty table".into());
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return bad(format!("table value at r = {} is {v}; values must be positive", i + 1));
        }
        if cut == 0 || cut > values.len() {
            return bad(format!("cut index {cut} outside 1..={}", values.len()));
        }
        if let Some(w) = values[cut - 1..].windows(2).position(|w| w[1] > w[0]) {
            return bad(format!(
                "values increase at r = {} beyond cut index {cut}",
                cut + w + 1
            ));
        }
        Ok(Table { values, cut })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    fn eval(&self, r: u64) -> Result<f64> {
        if r == 0 || r as usize > self.values.len() {
            return Err(Error::TableRange {
                r,
                len: self.values.len(),
            });
        }
        Ok(self.values[r as usize - 1])
    }
}

/// Per-coordinate ψ₁, …, ψₙ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentsRepr", into = "ComponentsRepr")]
pub struct Components(Vec<ApproxFunction>);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentsRepr {
    components: Vec<ApproxFunction>,
}

impl TryFrom<ComponentsRepr> for Components {
    type Error = Error;
    fn try_from(r: ComponentsRepr) -> Result<Self> {
        Components::new(r.components)
    }
}

impl From<Components> for ComponentsRepr {
    fn from(c: Components) -> Self {
        ComponentsRepr { components: c.0 }
    }
}

impl Components {
    pub fn new(components: Vec<ApproxFunction>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidApproxFunction(
                "per-coordinate list is empty".into(),
            ));
        }
        if components
            .iter()
            .any(|c| matches!(c, ApproxFunction::PerCoordinate(_)))
        {
            return Err(Error::InvalidApproxFunction(
                "per-coordinate functions cannot nest".into(),
            ));
        }
        Ok(Components(components))
    }

    pub fn as_slice(&self) -> &[ApproxFunction] {
        &self.0
    }
}

/// The approximating function ψ: ℕ → ℝ⁺, tending to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ApproxFunction {
    #[serde(rename = "powerlog")]
    PowerLog(PowerLog),
    #[serde(rename = "table")]
    Table(Table),
    #[serde(rename = "percoord")]
    PerCoordinate(Components),
}

impl ApproxFunction {
    pub fn power_log(c: f64, tau: f64, kappa: f64) -> Result<Self> {
        PowerLog::new(Scalar::Float(c), tau, kappa).map(ApproxFunction::PowerLog)
    }

    /// `c · r^(-tau)` with an exact coefficient.
    pub fn power_exact(c: BigRational, tau: u32) -> Result<Self> {
        PowerLog::new(Scalar::Exact(c), tau as f64, 0.0).map(ApproxFunction::PowerLog)
    }

    pub fn table(values: Vec<f64>, cut: usize) -> Result<Self> {
        Table::new(values, cut).map(ApproxFunction::Table)
    }

    pub fn per_coordinate(components: Vec<ApproxFunction>) -> Result<Self> {
        Components::new(components).map(ApproxFunction::PerCoordinate)
    }

    /// ψ(r).
    pub fn eval(&self, r: u64) -> Result<f64> {
        if r == 0 {
            return Err(Error::ZeroHeight);
        }
        match self {
            ApproxFunction::PowerLog(p) => Ok(p.eval(r)),
            ApproxFunction::Table(t) => t.eval(r),
            ApproxFunction::PerCoordinate(_) => Err(Error::NotScalar),
        }
    }

    /// Ψ(r) = ψ(r)/r.
    pub fn eval_normalized(&self, r: u64) -> Result<f64> {
        Ok(self.eval(r)? / r as f64)
    }

    /// ψ(r) as an exact rational: the exact formula value when ψ is `c r^-tau`
    /// with integer tau, otherwise the exact binary value of the `f64` result.
    pub fn eval_exact(&self, r: u64) -> Result<BigRational> {
        if r == 0 {
            return Err(Error::ZeroHeight);
        }
        match self {
            ApproxFunction::PowerLog(p) => p.eval_exact(r),
            ApproxFunction::Table(t) => float_to_rational(t.eval(r)?),
            ApproxFunction::PerCoordinate(_) => Err(Error::NotScalar),
        }
    }

    /// Ψ(r) exactly.
    pub fn eval_normalized_exact(&self, r: u64) -> Result<BigRational> {
        Ok(self.eval_exact(r)? / BigRational::from_integer(BigInt::from(r)))
    }

    /// One function per form: `n` copies of a uniform ψ, or the listed components.
    pub fn per_form(&self, n: usize) -> Result<Vec<&ApproxFunction>> {
        match self {
            ApproxFunction::PerCoordinate(c) => {
                if c.as_slice().len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: c.as_slice().len(),
                    });
                }
                Ok(c.as_slice().iter().collect())
            }
            other => Ok(vec![other; n]),
        }
    }

    /// Largest height at which ψ is defined (`None` = every height).
    pub fn max_height(&self) -> Option<u64> {
        match self {
            ApproxFunction::PowerLog(_) => None,
            ApproxFunction::Table(t) => Some(t.values.len() as u64),
            ApproxFunction::PerCoordinate(c) => {
                c.as_slice().iter().filter_map(|f| f.max_height()).min()
            }
        }
    }

    /// Whether ψ values are exact rationals of the formula (not rounded floats).
    pub fn has_exact_form(&self) -> bool {
        match self {
            ApproxFunction::PowerLog(p) => p.has_exact_form(),
            ApproxFunction::Table(_) => false,
            ApproxFunction::PerCoordinate(c) => c.as_slice().iter().all(|f| f.has_exact_form()),
        }
    }

    /// Non-increasing on every height where it is defined.
    pub fn is_non_increasing(&self) -> bool {
        match self {
            ApproxFunction::PowerLog(p) => p.is_non_increasing(),
            ApproxFunction::Table(t) => t.values.windows(2).all(|w| w[1] <= w[0]),
            ApproxFunction::PerCoordinate(c) => c.as_slice().iter().all(|f| f.is_non_increasing()),
        }
    }

    /// `factor · ψ`. The coefficient is exact whenever the factor is.
    pub fn scaled(&self, factor: &Scalar) -> Result<ApproxFunction> {
        match self {
            ApproxFunction::PowerLog(p) => {
                // an f64 coefficient is a dyadic rational, so an exact factor keeps it exact
                let c = match factor {
                    Scalar::Exact(b) => Scalar::Exact(p.c.to_rational()? * b),
                    Scalar::Float(b) => Scalar::Float(p.c.to_f64() * b),
                };
                PowerLog::new(c, p.tau, p.kappa).map(ApproxFunction::PowerLog)
            }
            ApproxFunction::Table(t) => {
                let f = factor.to_f64();
                Table::new(t.values.iter().map(|v| v * f).collect(), t.cut).map(ApproxFunction::Table)
            }
            ApproxFunction::PerCoordinate(c) => ApproxFunction::per_coordinate(
                c.as_slice()
                    .iter()
                    .map(|f| f.scaled(factor))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn as_power_log(&self) -> Option<&PowerLog> {
        match self {
            ApproxFunction::PowerLog(p) => Some(p),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_log_values() {
        let p = ApproxFunction::power_log(1.0, 2.0, 0.0).unwrap();
        assert!((p.eval(10).unwrap() - 0.01).abs() < 1e-15);
        assert!((p.eval_normalized(10).unwrap() - 0.001).abs() < 1e-16);

        let l = ApproxFunction::power_log(1.0, 0.0, 1.0).unwrap();
        assert!((l.eval(1).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn table_lookup_and_range() {
        let t = ApproxFunction::table(vec![0.5, 0.25, 0.125], 1).unwrap();
        assert_eq!(t.eval(2).unwrap(), 0.25);
        assert_eq!(t.eval(4), Err(Error::TableRange { r: 4, len: 3 }));
        assert_eq!(t.eval(0), Err(Error::ZeroHeight));
        let t2 = ApproxFunction::table(vec![0.5, 0.25], 1).unwrap();
        assert_eq!(t2.eval_normalized(1).unwrap(), 0.5);
    }

    #[test]
    fn rejects_functions_not_tending_to_zero() {
        assert!(ApproxFunction::power_log(1.0, 0.0, 0.0).is_err());
        assert!(ApproxFunction::power_log(1.0, 0.0, -1.0).is_err());
        assert!(ApproxFunction::power_log(1.0, -0.5, 3.0).is_err());
        assert!(ApproxFunction::power_log(0.0, 1.0, 0.0).is_err());
        assert!(ApproxFunction::table(vec![0.5, 0.0], 1).is_err());
        assert!(ApproxFunction::table(vec![0.1, 0.5, 0.25], 1).is_err());
        assert!(ApproxFunction::table(vec![0.1, 0.5, 0.25], 2).is_ok());
        assert!(ApproxFunction::per_coordinate(vec![]).is_err());
    }

    #[test]
    fn exact_values() {
        let p = ApproxFunction::power_exact(BigRational::new(1.into(), 10.into()), 4).unwrap();
        assert_eq!(
            p.eval_exact(3).unwrap(),
            BigRational::new(1.into(), 810.into())
        );
        assert_eq!(
            p.eval_normalized_exact(3).unwrap() * BigRational::from_integer(3.into()),
            p.eval_exact(3).unwrap()
        );
    }

    #[test]
    fn json_shape() {
        let p = ApproxFunction::power_log(1.0, 2.0, 0.0).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v, serde_json::json!({"family": "powerlog", "c": 1.0, "tau": 2.0, "kappa": 0.0}));
        let back: ApproxFunction = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);

        let bad = serde_json::from_str::<ApproxFunction>(r#"{"family":"powerlog","c":1,"tau":-1,"kappa":0}"#);
        assert!(bad.is_err());

        let pc: ApproxFunction = serde_json::from_str(
            r#"{"family":"percoord","components":[{"family":"powerlog","c":"1/2","tau":1},{"family":"table","values":[0.5,0.25]}]}"#,
        )
        .unwrap();
        assert_eq!(pc.per_form(2).unwrap().len(), 2);
        assert!(pc.per_form(3).is_err());
        assert_eq!(pc.eval(1), Err(Error::NotScalar));
    }

    #[test]
    fn monotonicity_flags() {
        assert!(ApproxFunction::power_log(1.0, 1.0, 0.0).unwrap().is_non_increasing());
        assert!(!ApproxFunction::power_log(1.0, 0.1, -3.0).unwrap().is_non_increasing());
        assert!(!ApproxFunction::table(vec![0.1, 0.5, 0.25], 2).unwrap().is_non_increasing());
    }

    proptest! {
        #[test]
        fn normalized_times_r_is_psi(c in 0.01f64..10.0, tau in 0.01f64..5.0, kappa in -2.0f64..2.0, r in 1u64..100_000) {
            let p = ApproxFunction::power_log(c, tau, kappa).unwrap();
            let psi = p.eval(r).unwrap();
            let big = p.eval_normalized(r).unwrap();
            prop_assert!(((big * r as f64) - psi).abs() <= 4.0 * f64::EPSILON * psi);
        }

        #[test]
        fn normalized_exact_identity(num in 1i64..50, den in 1i64..50, tau in 0u32..6, r in 1u64..2000) {
            prop_assume!(tau > 0);
            let p = ApproxFunction::power_exact(BigRational::new(num.into(), den.into()), tau).unwrap();
            let lhs = p.eval_normalized_exact(r).unwrap() * BigRational::from_integer(r.into());
            prop_assert_eq!(lhs, p.eval_exact(r).unwrap());
        }

        #[test]
        fn strictly_decreasing_for_positive_tau(c in 0.01f64..10.0, tau in 0.05f64..5.0, kappa in 0.0f64..2.0, r in 1u64..10_000) {
            let p = ApproxFunction::power_log(c, tau, kappa).unwrap();
            prop_assert!(p.eval(r + 1).unwrap() < p.eval(r).unwrap());
        }

        #[test]
        fn negative_tau_always_rejected(c in 0.01f64..10.0, tau in -10.0f64..-1e-9, kappa in -5.0f64..5.0) {
            prop_assert!(ApproxFunction::power_log(c, tau, kappa).is_err());
        }
    }
}
