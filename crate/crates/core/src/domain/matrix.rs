use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, RealMatrix};
use crate::scalar::{parse_rational, Scalar};

/// An `m × n` matrix regarded as a point of the unit cube `I^{mn}`.
///
/// Serialized row-major as nested arrays: rational entries as `"p/q"` strings,
/// float entries as numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Scalar>>", into = "Vec<Vec<Scalar>>")]
pub struct FormMatrix {
    data: RealMatrix,
}

impl TryFrom<Vec<Vec<Scalar>>> for FormMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        FormMatrix::new(RealMatrix::from_scalar_rows(rows)?)
    }
}

impl From<FormMatrix> for Vec<Vec<Scalar>> {
    fn from(m: FormMatrix) -> Self {
        m.data.to_scalar_rows()
    }
}

impl FormMatrix {
    pub fn new(data: RealMatrix) -> Result<Self> {
        let in_unit = match &data {
            RealMatrix::Exact(m) => m
                .entries()
                .iter()
                .all(|x| !x.is_negative() && *x <= BigRational::one()),
            RealMatrix::Float(m) => m.entries().iter().all(|x| (0.0..=1.0).contains(x)),
        };
        if !in_unit {
            return Err(Error::InvalidMatrix(
                "entries must lie in the closed unit interval".into(),
            ));
        }
        Ok(FormMatrix { data })
    }

    pub fn exact(m: Matrix<BigRational>) -> Result<Self> {
        Self::new(RealMatrix::Exact(m))
    }

    pub fn float(m: Matrix<f64>) -> Result<Self> {
        Self::new(RealMatrix::Float(m))
    }

    pub fn zeros_exact(m: usize, n: usize) -> Self {
        FormMatrix {
            data: RealMatrix::Exact(Matrix::from_fn(m, n, |_, _| BigRational::zero())),
        }
    }

    /// Parse the literal syntax: rows separated by `;`, entries by `,`.
    /// All-rational literals (`1/2`, `3`) are exact; decimal literals are floats.
    pub fn parse(literal: &str) -> Result<Self> {
        let rows: Vec<Vec<&str>> = literal
            .split(';')
            .map(|r| r.split(',').map(str::trim).collect())
            .collect();
        let any_float = rows
            .iter()
            .flatten()
            .any(|e| e.contains('.') || e.contains('e') || e.contains('E'));
        let scalars = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| {
                        if any_float {
                            e.parse::<f64>()
                                .map(Scalar::Float)
                                .map_err(|_| Error::Parse(format!("bad float entry {e:?}")))
                        } else {
                            parse_rational(e).map(Scalar::Exact)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FormMatrix::try_from(scalars)
    }

    pub fn m(&self) -> usize {
        self.data.rows()
    }

    pub fn n(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &RealMatrix {
        &self.data
    }

    pub fn is_exact(&self) -> bool {
        self.data.is_exact()
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.data.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_exact_and_float() {
        let x = FormMatrix::parse("1/2;1/3").unwrap();
        assert!(x.is_exact());
        assert_eq!((x.m(), x.n()), (2, 1));
        let y = FormMatrix::parse("0.1, 0.2; 0.3, 0.4").unwrap();
        assert!(!y.is_exact());
        assert_eq!((y.m(), y.n()), (2, 2));
    }

    #[test]
    fn rejects_out_of_cube_and_ragged() {
        assert!(FormMatrix::parse("3/2;1/3").is_err());
        assert!(FormMatrix::parse("-0.1;0.2").is_err());
        assert!(FormMatrix::parse("1/2,1/3;1/4").is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let x = FormMatrix::parse("1/2,2/7;1/3,0").unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"[["1/2","2/7"],["1/3","0"]]"#);
        let back: FormMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let mixed = serde_json::from_str::<FormMatrix>(r#"[["1/2", 0.5]]"#);
        assert!(mixed.is_err());
    }
}
