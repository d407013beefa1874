//! From classical approximation of `X̂` to small linear forms of `X`.
//!
//! For `m > n` write `X = (Iₙ; X̂) X̃` with `X̃` the top `n × n` block and
//! `X̂ = X′ X̃⁻¹`. If `‖rX̂‖_i <= ψ(|r|)/(nN)` and `p` is the nearest integer vector
//! to `rX̂`, then `q = (-p, r)` satisfies `qX = (rX̂ - p) X̃`, hence
//! `|qX|_i <= ψ(|r|)` whenever the entries of `X̃` are bounded by `N`.

use nalgebra::{DMatrix, SVD};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{ApproxFunction, FormMatrix, IntegerVector, ProblemSpec, Variant};
use crate::error::{Error, Result};
use crate::forms::{
    bigint_to_i64, enumerate_solutions, eval_forms, EngineConfig, EnumerationReport,
    HeightWindow, Inequality,
};
use crate::linalg::{Field, Matrix, RealMatrix};
use crate::scalar::{round_half_even, Scalar};

/// Smallest `|det X̃|` accepted for float matrices.
pub const FLOAT_DET_FLOOR: f64 = 1e-8;

/// Parameters of the set `A_{ε,N}`: `ε < det X̃ < 1/ε` and top-block entries bounded by `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MembershipRepr", into = "MembershipRepr")]
pub struct Membership {
    epsilon: Scalar,
    cap: Scalar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MembershipRepr {
    epsilon: Scalar,
    cap: Scalar,
}

impl TryFrom<MembershipRepr> for Membership {
    type Error = Error;
    fn try_from(r: MembershipRepr) -> Result<Self> {
        Membership::new(r.epsilon, r.cap)
    }
}

impl From<Membership> for MembershipRepr {
    fn from(m: Membership) -> Self {
        MembershipRepr {
            epsilon: m.epsilon,
            cap: m.cap,
        }
    }
}

impl Membership {
    pub fn new(epsilon: Scalar, cap: Scalar) -> Result<Self> {
        let e = epsilon.to_f64();
        if !(epsilon.is_positive() && e < 1.0) {
            return Err(Error::InvalidProblem(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if !cap.is_positive() || !cap.to_f64().is_finite() {
            return Err(Error::InvalidProblem(format!("N must be positive, got {cap}")));
        }
        Ok(Membership { epsilon, cap })
    }

    pub fn epsilon(&self) -> &Scalar {
        &self.epsilon
    }

    pub fn cap(&self) -> &Scalar {
        &self.cap
    }

    /// `1/(nN)`, exact when `N` is.
    pub fn scale(&self, n: usize) -> Scalar {
        match &self.cap {
            Scalar::Exact(c) => Scalar::Exact(
                (c * BigRational::from_integer(BigInt::from(n))).recip(),
            ),
            Scalar::Float(c) => Scalar::Float(1.0 / (n as f64 * c)),
        }
    }
}

/// Real scalars the reduction runs over.
trait Real: Field + PartialOrd {
    fn nearest(&self) -> Result<i64>;
    /// `x - floor(x)`.
    fn frac(&self) -> Self;
    fn wrap(m: Matrix<Self>) -> RealMatrix;
    fn psi_at(psi: &ApproxFunction, r: u64) -> Result<Self>;
    const EXACT: bool;
}

impl Real for BigRational {
    fn nearest(&self) -> Result<i64> {
        bigint_to_i64(&round_half_even(self))
    }
    fn frac(&self) -> Self {
        self - self.floor()
    }
    fn wrap(m: Matrix<Self>) -> RealMatrix {
        RealMatrix::Exact(m)
    }
    fn psi_at(psi: &ApproxFunction, r: u64) -> Result<Self> {
        psi.eval_exact(r)
    }
    const EXACT: bool = true;
}

impl Real for f64 {
    fn nearest(&self) -> Result<i64> {
        let r = self.round_ties_even();
        if r.abs() >= 9.0e15 || !r.is_finite() {
            return Err(Error::InvalidProblem(format!("value {self} too large to round")));
        }
        Ok(r as i64)
    }
    fn frac(&self) -> Self {
        self - self.floor()
    }
    fn wrap(m: Matrix<Self>) -> RealMatrix {
        RealMatrix::Float(m)
    }
    fn psi_at(psi: &ApproxFunction, r: u64) -> Result<Self> {
        psi.eval(r)
    }
    const EXACT: bool = false;
}

fn show<T: Real>(v: &T) -> String {
    v.clone().into_scalar().to_string()
}

#[derive(Clone, Debug, PartialEq)]
struct Parts<T> {
    x: Matrix<T>,
    top: Matrix<T>,
    bottom: Matrix<T>,
    hat: Matrix<T>,
    det: T,
}

fn check_top<T: Real>(top: &Matrix<T>, params: &Membership) -> Result<T> {
    let eps = T::from_scalar(params.epsilon())?;
    let cap = T::from_scalar(params.cap())?;
    let det = top.det()?;
    if det == T::zero() || (!T::EXACT && det.abs().to_f64() < FLOAT_DET_FLOOR) {
        return Err(Error::SingularTopBlock);
    }
    let inv_eps = T::one().div(&eps);
    if !(eps < det && det < inv_eps) {
        return Err(Error::MembershipViolation {
            condition: format!(
                "det of top block = {} outside ({}, {})",
                show(&det),
                show(&eps),
                show(&inv_eps)
            ),
        });
    }
    for i in 0..top.rows() {
        for j in 0..top.cols() {
            if top.get(i, j).abs() > cap {
                return Err(Error::MembershipViolation {
                    condition: format!(
                        "top-block entry ({}, {}) = {} exceeds N = {}",
                        i + 1,
                        j + 1,
                        show(top.get(i, j)),
                        show(&cap)
                    ),
                });
            }
        }
    }
    Ok(det)
}

fn decompose_parts<T: Real>(x: &Matrix<T>, params: &Membership) -> Result<Parts<T>> {
    let (m, n) = (x.rows(), x.cols());
    if m <= n {
        return Err(Error::Regime(format!(
            "decomposition needs m > n, got (m, n) = ({m}, {n})"
        )));
    }
    let top = x.row_block(0, n);
    let bottom = x.row_block(n, m);
    let det = check_top(&top, params)?;
    let hat = bottom.mul(&top.inverse()?)?;
    Ok(Parts {
        x: x.clone(),
        top,
        bottom,
        hat,
        det,
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Inner {
    Exact(Parts<BigRational>),
    Float(Parts<f64>),
}

/// `X ∈ A_{ε,N}` with its blocks `X̃`, `X′` and `X̂ = X′ X̃⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedMatrix {
    inner: Inner,
    params: Membership,
}

macro_rules! with_parts {
    ($self:expr, $p:ident => $body:expr) => {
        match &$self.inner {
            Inner::Exact($p) => $body,
            Inner::Float($p) => $body,
        }
    };
}

/// Split `X` and check membership in `A_{ε,N}`; the failed condition is named.
pub fn decompose(x: &RealMatrix, params: &Membership) -> Result<RestrictedMatrix> {
    let inner = match x {
        RealMatrix::Exact(m) => Inner::Exact(decompose_parts(m, params)?),
        RealMatrix::Float(m) => Inner::Float(decompose_parts(m, params)?),
    };
    Ok(RestrictedMatrix {
        inner,
        params: params.clone(),
    })
}

impl RestrictedMatrix {
    pub fn m(&self) -> usize {
        with_parts!(self, p => p.x.rows())
    }

    pub fn n(&self) -> usize {
        with_parts!(self, p => p.x.cols())
    }

    pub fn params(&self) -> &Membership {
        &self.params
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.inner, Inner::Exact(_))
    }

    pub fn x(&self) -> RealMatrix {
        with_parts!(self, p => Real::wrap(p.x.clone()))
    }

    /// `X̃`, the top `n × n` block.
    pub fn top(&self) -> RealMatrix {
        with_parts!(self, p => Real::wrap(p.top.clone()))
    }

    /// `X′`, the bottom `(m - n) × n` block.
    pub fn bottom(&self) -> RealMatrix {
        with_parts!(self, p => Real::wrap(p.bottom.clone()))
    }

    /// `X̂ = X′ X̃⁻¹`.
    pub fn hat(&self) -> RealMatrix {
        with_parts!(self, p => Real::wrap(p.hat.clone()))
    }

    pub fn det(&self) -> Scalar {
        with_parts!(self, p => p.det.to_owned().into_scalar())
    }

    /// `(Iₙ; X̂) X̃`.
    pub fn reconstruct(&self) -> Result<RealMatrix> {
        with_parts!(self, p => {
            let stacked = Matrix::identity(p.top.rows()).stack(&p.hat)?;
            Ok(Real::wrap(stacked.mul(&p.top)?))
        })
    }

    /// `X̂` reduced entrywise mod 1; the classical problem only sees this.
    pub fn hat_mod_one(&self) -> Result<FormMatrix> {
        with_parts!(self, p => FormMatrix::new(Real::wrap(p.hat.map(|v| v.frac()))))
    }
}

/// Exact witness that `q = (-p, r)` makes every form of `X` at most `ψ(|r|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftCertificate {
    /// `X`, row-major.
    pub matrix: Vec<Vec<Scalar>>,
    pub membership: Membership,
    pub psi: ApproxFunction,
    pub r: IntegerVector,
    /// Nearest integer vector to `rX̂`, ties to even.
    pub p: IntegerVector,
    /// `(-p, r)`.
    pub q: IntegerVector,
    /// `‖rX̂‖_i`.
    pub distances: Vec<Scalar>,
    /// `|qX|_i`.
    pub form_values: Vec<Scalar>,
    /// `ψ(|r|)`; every form value is at most this.
    pub bound: Scalar,
    /// `ψ(|q|)`, when ψ is defined there.
    pub psi_at_q: Option<Scalar>,
    /// Whether `|qX|_i < ψ(|q|)` for every `i`.
    pub strict_at_q: Option<bool>,
}

fn lift_parts<T: Real>(
    parts: &Parts<T>,
    params: &Membership,
    r: &IntegerVector,
    psi: &ApproxFunction,
) -> Result<LiftCertificate> {
    let (m, n) = (parts.x.rows(), parts.x.cols());
    if r.len() != m - n {
        return Err(Error::DimensionMismatch {
            expected: m - n,
            got: r.len(),
        });
    }
    let h = r.height();
    if h == 0 {
        return Err(Error::ZeroHeight);
    }
    let bound = T::psi_at(psi, h)?;
    let scale = T::from_scalar(&params.scale(n))?;
    let eq_one = bound.mul(&scale);
    let rv: Vec<T> = r.components().iter().map(|&c| T::from_i64(c)).collect();
    let v = parts.hat.left_mul_vec(&rv)?;
    let mut p = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    for (i, vi) in v.iter().enumerate() {
        let pi = vi.nearest()?;
        let d = vi.sub(&T::from_i64(pi)).abs();
        if d > eq_one {
            return Err(Error::EqOneViolation {
                coordinate: i + 1,
                distance: show(&d),
                bound: show(&eq_one),
            });
        }
        p.push(pi);
        distances.push(d);
    }
    let q: Vec<i64> = p.iter().map(|v| -v).chain(r.components().iter().copied()).collect();
    let qv: Vec<T> = q.iter().map(|&c| T::from_i64(c)).collect();
    let values: Vec<T> = parts.x.left_mul_vec(&qv)?.into_iter().map(|v| v.abs()).collect();
    let slack = if T::EXACT {
        T::zero()
    } else {
        T::from_scalar(&Scalar::Float(1e-9 * bound.to_f64()))?
    };
    let bound_plus = bound.add(&slack);
    if let Some(i) = values.iter().position(|v| *v > bound_plus) {
        return Err(Error::Certificate(format!(
            "form {} = {} exceeds psi(|r|) = {}",
            i + 1,
            show(&values[i]),
            show(&bound)
        )));
    }
    let q = IntegerVector::new(q);
    let psi_q = T::psi_at(psi, q.height()).ok();
    let strict_at_q = psi_q.as_ref().map(|b| values.iter().all(|v| v < b));
    Ok(LiftCertificate {
        matrix: Real::wrap(parts.x.clone()).to_scalar_rows(),
        membership: params.clone(),
        psi: psi.clone(),
        r: r.clone(),
        p: IntegerVector::new(p),
        q,
        distances: distances.into_iter().map(Field::into_scalar).collect(),
        form_values: values.into_iter().map(Field::into_scalar).collect(),
        bound: bound.into_scalar(),
        psi_at_q: psi_q.map(Field::into_scalar),
        strict_at_q,
    })
}

/// Lift a solution `r` of `‖rX̂‖_i <= ψ(|r|)/(nN)` to `q = (-p, r)`.
pub fn lift_solution(
    rx: &RestrictedMatrix,
    r: &IntegerVector,
    psi: &ApproxFunction,
) -> Result<LiftCertificate> {
    with_parts!(rx, p => lift_parts(p, &rx.params, r, psi))
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub q: IntegerVector,
    pub bound: Scalar,
    pub max_form_value: Scalar,
    pub strict_at_q: Option<bool>,
}

/// Re-derive a certificate from `(X, membership, ψ, r)` and check every recorded field,
/// evaluating `qX` through the forms engine rather than the lift.
pub fn verify_certificate(cert: &LiftCertificate) -> Result<CertificateCheck> {
    let fail = |what: &str| Err(Error::Certificate(what.to_string()));
    let x = RealMatrix::from_scalar_rows(cert.matrix.clone())?;
    let rx = decompose(&x, &cert.membership)?;
    let again = lift_solution(&rx, &cert.r, &cert.psi)?;
    if again.p != cert.p {
        return fail("p is not the nearest integer vector to rX^");
    }
    let expect_q: Vec<i64> = cert
        .p
        .components()
        .iter()
        .map(|v| -v)
        .chain(cert.r.components().iter().copied())
        .collect();
    if cert.q.components() != expect_q.as_slice() || cert.q.is_zero() {
        return fail("q is not (-p, r)");
    }
    let values = eval_forms(&cert.q, &x)?;
    let tol = |a: &Scalar| if a.is_exact() { 0.0 } else { 1e-12 * (1.0 + a.to_f64().abs()) };
    let same = |a: &Scalar, b: &Scalar| match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
        _ => (a.to_f64() - b.to_f64()).abs() <= tol(a),
    };
    let abs_values: Vec<Scalar> = values
        .into_iter()
        .map(|v| match v {
            Scalar::Exact(q) => Scalar::Exact(Signed::abs(&q)),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        })
        .collect();
    if abs_values.len() != cert.form_values.len()
        || !abs_values.iter().zip(&cert.form_values).all(|(a, b)| same(a, b))
    {
        return fail("recorded form values do not match |qX|");
    }
    if !same(&again.bound, &cert.bound) {
        return fail("recorded bound is not psi(|r|)");
    }
    let mut max = abs_values[0].clone();
    for v in &abs_values {
        if v.cmp_value(&max).is_gt() {
            max = v.clone();
        }
        let limit = cert.bound.to_f64() + tol(&cert.bound) * cert.bound.to_f64();
        let over = match (v, &cert.bound) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a > b,
            _ => v.to_f64() > limit,
        };
        if over {
            return fail("a form value exceeds psi(|r|)");
        }
    }
    Ok(CertificateCheck {
        q: cert.q.clone(),
        bound: cert.bound.clone(),
        max_form_value: max,
        strict_at_q: again.strict_at_q,
    })
}

/// Classical solutions on `X̂` and their lifts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub classical: EnumerationReport,
    pub certificates: Vec<LiftCertificate>,
}

/// Enumerate `‖rX̂‖_i <= ψ(|r|)/(nN)` over `window` and lift every solution.
pub fn transport_solutions(
    rx: &RestrictedMatrix,
    psi: &ApproxFunction,
    window: HeightWindow,
    config: &EngineConfig,
) -> Result<TransportReport> {
    let (m, n) = (rx.m(), rx.n());
    let scaled = psi.scaled(&rx.params.scale(n))?;
    let spec = ProblemSpec::new(m - n, n, Variant::Classical, scaled)?;
    let config = EngineConfig {
        inequality: Inequality::NonStrict,
        ..*config
    };
    let classical = enumerate_solutions(&spec, &rx.hat_mod_one()?, window, &config)?;
    let certificates = classical
        .solutions
        .iter()
        .map(|s| lift_solution(rx, &s.q, psi))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransportReport {
        classical,
        certificates,
    })
}

fn same_kind(a: &RealMatrix, b: &RealMatrix) -> Result<()> {
    if a.is_exact() != b.is_exact() {
        return Err(Error::InvalidMatrix(
            "mixed exact and float operands".into(),
        ));
    }
    Ok(())
}

/// `η(Y, X̃) = (X̃; Y X̃)`, defined for `X̃` satisfying the `A_{ε,N}` block conditions.
pub fn eta_embed(y: &RealMatrix, xt: &RealMatrix, params: &Membership) -> Result<RealMatrix> {
    same_kind(y, xt)?;
    if xt.rows() != xt.cols() || y.cols() != xt.rows() {
        return Err(Error::DimensionMismatch {
            expected: xt.rows(),
            got: y.cols(),
        });
    }
    fn go<T: Real>(y: &Matrix<T>, xt: &Matrix<T>, params: &Membership) -> Result<RealMatrix> {
        check_top(xt, params)?;
        Ok(T::wrap(xt.stack(&y.mul(xt)?)?))
    }
    match (y, xt) {
        (RealMatrix::Exact(y), RealMatrix::Exact(x)) => go(y, x, params),
        (RealMatrix::Float(y), RealMatrix::Float(x)) => go(y, x, params),
        _ => unreachable!(),
    }
}

/// Lipschitz constant of `η` in the max-entry norm for `Y ∈ [0,1]^{(m-n)n}` and
/// top-block entries bounded by `N`: `|Y X̃ - Y' X̃'| <= n |X̃ - X̃'| + nN |Y - Y'|`.
pub fn eta_lipschitz_constant(n: usize, cap: f64) -> f64 {
    n as f64 * (cap + 1.0)
}

fn max_entry_dist(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `|η(Y₁, X̃₁) - η(Y₂, X̃₂)| / |(Y₁, X̃₁) - (Y₂, X̃₂)|` in the max-entry norm.
pub fn eta_lipschitz_ratio(
    (y1, x1): (&RealMatrix, &RealMatrix),
    (y2, x2): (&RealMatrix, &RealMatrix),
    params: &Membership,
) -> Result<f64> {
    let a = eta_embed(y1, x1, params)?.to_f64();
    let b = eta_embed(y2, x2, params)?.to_f64();
    let din = max_entry_dist(&y1.to_f64(), &y2.to_f64()).max(max_entry_dist(&x1.to_f64(), &x2.to_f64()));
    if din == 0.0 {
        return Ok(0.0);
    }
    Ok(max_entry_dist(&a, &b) / din)
}

/// Rank data of an `m × n` matrix with `m <= n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceWitness {
    pub rank: usize,
    /// Nonzero `c` with `Xc = 0`: the columns are dependent.
    pub column: Option<Vec<Scalar>>,
    /// Nonzero `c` with `cX = 0`: rank below `m`, the condition cutting out the hypersurface.
    pub row: Option<Vec<Scalar>>,
}

/// Scale to a primitive integer vector whose first nonzero entry is positive.
fn primitive(v: &[BigRational]) -> Vec<BigRational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    let g = if g.is_zero() { BigInt::one() } else { g };
    ints.into_iter()
        .map(|x| BigRational::from_integer(x * &sign / &g))
        .collect()
}

fn unit_canonical(v: Vec<f64>, tol: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = match v.iter().find(|x| f64::abs(**x) > tol.max(1e-12)) {
        Some(x) if *x < 0.0 => -1.0,
        _ => 1.0,
    };
    v.into_iter().map(|x| sign * x / norm).collect()
}

/// Least singular value with its right singular vector, and all singular values.
/// Needs at least as many rows as columns so that `V` is square.
fn least_singular(a: DMatrix<f64>) -> (f64, Vec<f64>, Vec<f64>) {
    let svd = SVD::new(a, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let k = (0..values.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    (values[k], v_t.row(k).iter().copied().collect(), values)
}

/// Dependence among columns and rows of `X` for `m <= n`. Exact rationals use
/// exact elimination; floats treat singular values `<= tol` as zero.
pub fn column_dependence_witness(x: &RealMatrix, tol: f64) -> Result<DependenceWitness> {
    let (m, n) = (x.rows(), x.cols());
    if m > n {
        return Err(Error::Regime(format!(
            "dependence witness applies to m <= n, got (m, n) = ({m}, {n})"
        )));
    }
    match x {
        RealMatrix::Exact(a) => {
            let (_, pivots) = a.rref(0.0);
            let wrap = |v: Vec<BigRational>| primitive(&v).into_iter().map(Scalar::Exact).collect();
            Ok(DependenceWitness {
                rank: pivots.len(),
                column: a.null_space(0.0).into_iter().next().map(wrap),
                row: a.transpose().null_space(0.0).into_iter().next().map(wrap),
            })
        }
        RealMatrix::Float(a) => {
            let d = DMatrix::from_row_slice(m, n, a.entries());
            // zero rows pad X to n × n so that V spans all of R^n
            let padded = DMatrix::from_fn(n, n, |i, j| if i < m { d[(i, j)] } else { 0.0 });
            let (col_min, col_vec, values) = least_singular(padded);
            let (row_min, row_vec, _) = least_singular(d.transpose());
            let wrap = |v: Vec<f64>| unit_canonical(v, tol).into_iter().map(Scalar::Float).collect();
            Ok(DependenceWitness {
                rank: values.iter().filter(|&&s| s > tol).count(),
                column: (col_min <= tol).then(|| wrap(col_vec)),
                row: (row_min <= tol).then(|| wrap(row_vec)),
            })
        }
    }
}

impl std::fmt::Display for LiftCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vals: Vec<String> = self.form_values.iter().map(|v| v.to_string()).collect();
        write!(
            f,
            "r = {}, p = {}, q = {}, |qX| = [{}] <= psi(|r|) = {}",
            self.r,
            self.p,
            self.q,
            vals.join(", "),
            self.bound
        )
    }
}
