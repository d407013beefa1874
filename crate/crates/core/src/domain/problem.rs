use std::fmt;

use serde::{Deserialize, Serialize};

use super::approx::ApproxFunction;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which set is being approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Small linear forms `|qX|_i < ψ(|q|)` (the set W₀).
    Absolute,
    /// Classical approximation `‖qX‖_i < ψ(|q|)` (the set W).
    Classical,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "absolute" | "w0" => Ok(Variant::Absolute),
            "classical" | "w" => Ok(Variant::Classical),
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

/// Qualitative regime of an `(m, n, variant)` problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `m = 1`, absolute: W₀ is the single point 0.
    Singleton,
    /// `(m, n) = (2, 1)`, absolute: no zero-full law without extra hypotheses.
    Excluded,
    /// `2 < m <= n`, absolute: W₀ lies on an `(m-1)(n+1)`-dimensional hypersurface.
    Hypersurface,
    /// `m > n`, `m + n > 3`, absolute: zero-full law in `I^{mn}`.
    Generic,
    /// `m = 2 <= n`, absolute: degenerate like the hypersurface case, but below
    /// the range where the measure theorem applies.
    Uncovered,
    /// Classical (nearest-integer) variant.
    Classical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Regime of `(m, n, variant)`. Total on `m, n >= 1`.
pub fn classify_regime(m: usize, n: usize, variant: Variant) -> Regime {
    match variant {
        Variant::Classical => Regime::Classical,
        Variant::Absolute => {
            if m == 1 {
                Regime::Singleton
            } else if m == 2 && n == 1 {
                Regime::Excluded
            } else if m > n {
                Regime::Generic
            } else if m > 2 {
                Regime::Hypersurface
            } else {
                Regime::Uncovered
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct ProblemSpec {
    m: usize,
    n: usize,
    variant: Variant,
    psi: ApproxFunction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRepr {
    m: usize,
    n: usize,
    variant: Variant,
    psi: ApproxFunction,
}

impl TryFrom<ProblemRepr> for ProblemSpec {
    type Error = Error;
    fn try_from(r: ProblemRepr) -> Result<Self> {
        ProblemSpec::new(r.m, r.n, r.variant, r.psi)
    }
}

impl From<ProblemSpec> for ProblemRepr {
    fn from(p: ProblemSpec) -> Self {
        ProblemRepr {
            m: p.m,
            n: p.n,
            variant: p.variant,
            psi: p.psi,
        }
    }
}

impl ProblemSpec {
    pub fn new(m: usize, n: usize, variant: Variant, psi: ApproxFunction) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidProblem("m and n must be at least 1".into()));
        }
        if let ApproxFunction::PerCoordinate(c) = &psi {
            if c.as_slice().len() != n {
                return Err(Error::InvalidProblem(format!(
                    "per-coordinate psi has {} components but n = {n}",
                    c.as_slice().len()
                )));
            }
        }
        Ok(ProblemSpec { m, n, variant, psi })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn psi(&self) -> &ApproxFunction {
        &self.psi
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self.m, self.n, self.variant)
    }
}

/// An integer vector `q`; its height is the sup norm.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntegerVector(pub Vec<i64>);

impl IntegerVector {
    pub fn new(components: Vec<i64>) -> Self {
        IntegerVector(components)
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn height(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// First nonzero coordinate is positive (or the vector is zero).
    pub fn is_sign_canonical(&self) -> bool {
        self.0.iter().find(|&&x| x != 0).is_none_or(|&x| x > 0)
    }

    pub fn negated(&self) -> Self {
        IntegerVector(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for IntegerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Membership certificate for one integer vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub q: IntegerVector,
    /// `|qX|_i` (absolute) or `‖qX‖_i` (classical).
    pub form_values: Vec<Scalar>,
    /// `ψ_i(|q|)` per form.
    pub bounds: Vec<Scalar>,
    /// `min_i (bound_i - value_i)`; positive for every emitted record under strict inequality.
    pub margin: Scalar,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(1, 5, Variant::Absolute), Regime::Singleton);
        assert_eq!(classify_regime(2, 1, Variant::Absolute), Regime::Excluded);
        assert_eq!(classify_regime(3, 3, Variant::Absolute), Regime::Hypersurface);
        assert_eq!(classify_regime(3, 1, Variant::Absolute), Regime::Generic);
        assert_eq!(classify_regime(2, 2, Variant::Absolute), Regime::Uncovered);
        assert_eq!(classify_regime(2, 1, Variant::Classical), Regime::Classical);
    }

    proptest! {
        #[test]
        fn regime_partition(m in 1usize..12, n in 1usize..12) {
            let r = classify_regime(m, n, Variant::Absolute);
            let preds = [
                m == 1,
                m == 2 && n == 1,
                2 < m && m <= n,
                m > n && m + n > 3,
                m == 2 && n >= 2,
            ];
            prop_assert_eq!(preds.iter().filter(|&&b| b).count(), 1);
            let expected = [Regime::Singleton, Regime::Excluded, Regime::Hypersurface, Regime::Generic, Regime::Uncovered];
            let idx = preds.iter().position(|&b| b).unwrap();
            prop_assert_eq!(r, expected[idx]);
        }
    }

    #[test]
    fn per_coordinate_length_checked() {
        let psi = ApproxFunction::per_coordinate(vec![
            ApproxFunction::power_log(1.0, 1.0, 0.0).unwrap(),
            ApproxFunction::power_log(1.0, 2.0, 0.0).unwrap(),
        ])
        .unwrap();
        assert!(ProblemSpec::new(3, 2, Variant::Absolute, psi.clone()).is_ok());
        assert!(ProblemSpec::new(3, 1, Variant::Absolute, psi).is_err());
    }

    #[test]
    fn canonical_sign() {
        assert!(IntegerVector::new(vec![0, 2, -1]).is_sign_canonical());
        assert!(!IntegerVector::new(vec![0, -2, 1]).is_sign_canonical());
        assert_eq!(IntegerVector::new(vec![0, -2, 1]).height(), 2);
    }
}
