//! Convergence criteria for the zero-full laws, classified by asymptotic exponents.
//!
//! Every series term is, for power-log `ψ` and `f`, asymptotic to `C · r^e · (ln r)^k`.
//! The verdict is the p-series test on `(e, k)`; partial sums are sampled for inspection
//! and are the only output for tabulated `ψ`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::{ApproxFunction, DimensionFunction, Limit};
use crate::error::{Error, Result};

/// Exponent comparisons treat values within this distance of the threshold as equal.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Partial sums are recorded at these cut-offs.
pub const PARTIAL_SUM_CUTOFFS: [u64; 5] = [10, 100, 1_000, 10_000, 100_000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    /// `r^(m-1) ψ(r)^n`, classical.
    #[serde(rename = "KG_classical", alias = "kg")]
    KhintchineGroshev,
    /// `f(Ψ) Ψ^(-(m-1)n) r^(m-1)`, absolute.
    #[serde(rename = "W0_Hausdorff_Thm1", alias = "thm1")]
    HausdorffAbsolute,
    /// `ψ(r)^n r^(m-n-1)`, absolute, `m > n`.
    #[serde(rename = "W0_Lebesgue_Cor1", alias = "cor1")]
    LebesgueAbsolute,
    /// `ψ(r)^(m-1)`, absolute on the hypersurface, `m <= n`.
    #[serde(rename = "W0_Lebesgue_Cor2", alias = "cor2")]
    LebesgueHypersurface,
    /// `f(Ψ) Ψ^(-(m-1)n) r^(m+n-1)`, classical.
    #[serde(rename = "W_Hausdorff_Thm3", alias = "thm3")]
    HausdorffClassical,
    /// `ψ_1(r) ⋯ ψ_n(r) r^(m-n-1)`, absolute with one rate per form.
    #[serde(rename = "Cor1_DifferentRates", alias = "rates")]
    DifferentRates,
    /// `g(Ψ) Ψ^(-(m-n-1)n) r^(m-1)` with `g = r^(-n²) f`.
    #[serde(rename = "W0_Auxiliary_G", alias = "g")]
    AuxiliaryG,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 7] = [
        CriterionKind::KhintchineGroshev,
        CriterionKind::HausdorffAbsolute,
        CriterionKind::LebesgueAbsolute,
        CriterionKind::LebesgueHypersurface,
        CriterionKind::HausdorffClassical,
        CriterionKind::DifferentRates,
        CriterionKind::AuxiliaryG,
    ];

    pub fn needs_f(&self) -> bool {
        matches!(
            self,
            CriterionKind::HausdorffAbsolute
                | CriterionKind::HausdorffClassical
                | CriterionKind::AuxiliaryG
        )
    }

    /// Short name used on the command line.
    pub fn short_name(&self) -> &'static str {
        match self {
            CriterionKind::KhintchineGroshev => "kg",
            CriterionKind::HausdorffAbsolute => "thm1",
            CriterionKind::LebesgueAbsolute => "cor1",
            CriterionKind::LebesgueHypersurface => "cor2",
            CriterionKind::HausdorffClassical => "thm3",
            CriterionKind::DifferentRates => "rates",
            CriterionKind::AuxiliaryG => "g",
        }
    }
}

impl std::str::FromStr for CriterionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let k = s.to_ascii_lowercase();
        CriterionKind::ALL
            .into_iter()
            .find(|c| {
                c.short_name() == k
                    || serde_json::to_value(c)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_ascii_lowercase))
                        .is_some_and(|name| name == k)
            })
            .ok_or_else(|| Error::Parse(format!("unknown criterion kind {s:?}")))
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionSeries {
    kind: CriterionKind,
    m: usize,
    n: usize,
    psi: ApproxFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f: Option<DimensionFunction>,
}

impl CriterionSeries {
    pub fn new(
        kind: CriterionKind,
        m: usize,
        n: usize,
        psi: ApproxFunction,
        f: Option<DimensionFunction>,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidProblem("m and n must be at least 1".into()));
        }
        if kind.needs_f() && f.is_none() {
            return Err(Error::MissingDimensionFunction);
        }
        if let ApproxFunction::PerCoordinate(c) = &psi {
            if kind != CriterionKind::DifferentRates {
                return Err(Error::InvalidProblem(format!(
                    "per-coordinate psi only applies to the different-rates series, not {kind}"
                )));
            }
            if c.as_slice().len() != n {
                return Err(Error::InvalidProblem(format!(
                    "per-coordinate psi has {} components but n = {n}",
                    c.as_slice().len()
                )));
            }
        }
        let f = if kind.needs_f() { f } else { None };
        if kind == CriterionKind::AuxiliaryG {
            if let Some(f) = &f {
                f.shifted((n * n) as f64)?;
            }
        }
        Ok(CriterionSeries { kind, m, n, psi, f })
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> &ApproxFunction {
        &self.psi
    }

    pub fn f(&self) -> Option<&DimensionFunction> {
        self.f.as_ref()
    }

    /// The term with `m`, `n` substituted.
    pub fn formula(&self) -> String {
        let (m, n) = (self.m as i64, self.n as i64);
        match self.kind {
            CriterionKind::KhintchineGroshev => format!("r^{} * psi(r)^{n}", m - 1),
            CriterionKind::HausdorffAbsolute => {
                format!("f(Psi(r)) * Psi(r)^-{} * r^{}", (m - 1) * n, m - 1)
            }
            CriterionKind::LebesgueAbsolute => format!("psi(r)^{n} * r^{}", m - n - 1),
            CriterionKind::LebesgueHypersurface => format!("psi(r)^{}", m - 1),
            CriterionKind::HausdorffClassical => {
                format!("f(Psi(r)) * Psi(r)^-{} * r^{}", (m - 1) * n, m + n - 1)
            }
            CriterionKind::DifferentRates => {
                let prod: Vec<String> = (1..=n).map(|i| format!("psi_{i}(r)")).collect();
                format!("{} * r^{}", prod.join(" * "), m - n - 1)
            }
            CriterionKind::AuxiliaryG => format!(
                "g(Psi(r)) * Psi(r)^-{} * r^{}, g(r) = r^-{} f(r)",
                (m - n - 1) * n,
                m - 1,
                n * n
            ),
        }
    }

    fn dimension(&self) -> Result<&DimensionFunction> {
        self.f.as_ref().ok_or(Error::MissingDimensionFunction)
    }

    /// Natural log of the term at `r`.
    fn ln_term(&self, r: u64) -> Result<f64> {
        let rf = r as f64;
        Kernel::new(self)?.ln_at(r, rf.ln(), (rf + 1.0).ln().ln())
    }

    /// Asymptotic `(e, k)` of the term, when every function involved is power-log.
    pub fn exponents(&self) -> Option<Exponents> {
        // + 0.0 turns a -0.0 log exponent into 0.0
        self.raw_exponents().map(|e| Exponents { power: e.power + 0.0, log: e.log + 0.0 })
    }

    fn raw_exponents(&self) -> Option<Exponents> {
        let (m, n) = (self.m as f64, self.n as f64);
        let power = |p: &ApproxFunction| p.as_power_log().map(|p| (p.tau(), p.kappa()));
        // f(Ψ) with Ψ ≍ r^-(τ+1) (log r)^-κ contributes r^-(s(τ+1)) (log r)^-(sκ + κ_f).
        let hausdorff = |s: f64, kf: f64, psi_power: f64, r_power: f64| {
            let (tau, kappa) = power(&self.psi)?;
            let net = s - psi_power;
            Some(Exponents {
                power: -net * (tau + 1.0) + r_power,
                log: -net * kappa - kf,
            })
        };
        match self.kind {
            CriterionKind::KhintchineGroshev => {
                let (tau, kappa) = power(&self.psi)?;
                Some(Exponents {
                    power: m - 1.0 - n * tau,
                    log: -n * kappa,
                })
            }
            CriterionKind::LebesgueAbsolute => {
                let (tau, kappa) = power(&self.psi)?;
                Some(Exponents {
                    power: m - n - 1.0 - n * tau,
                    log: -n * kappa,
                })
            }
            CriterionKind::LebesgueHypersurface => {
                let (tau, kappa) = power(&self.psi)?;
                Some(Exponents {
                    power: -(m - 1.0) * tau,
                    log: -(m - 1.0) * kappa,
                })
            }
            CriterionKind::HausdorffAbsolute => {
                let f = self.f.as_ref()?;
                hausdorff(f.s(), f.kappa(), (m - 1.0) * n, m - 1.0)
            }
            CriterionKind::HausdorffClassical => {
                let f = self.f.as_ref()?;
                hausdorff(f.s(), f.kappa(), (m - 1.0) * n, m + n - 1.0)
            }
            CriterionKind::AuxiliaryG => {
                let f = self.f.as_ref()?;
                hausdorff(f.s() - n * n, f.kappa(), (m - n - 1.0) * n, m - 1.0)
            }
            CriterionKind::DifferentRates => {
                let mut e = Exponents {
                    power: m - n - 1.0,
                    log: 0.0,
                };
                for p in self.psi.per_form(self.n).ok()? {
                    let (tau, kappa) = power(p)?;
                    e.power -= tau;
                    e.log -= kappa;
                }
                Some(e)
            }
        }
    }

    fn hypotheses(&self) -> Vec<HypothesisCheck> {
        let (m, n) = (self.m, self.n);
        let mut out = Vec::new();
        let mut push = |label: &str, holds: bool| {
            out.push(HypothesisCheck {
                label: label.to_string(),
                holds,
            })
        };
        let generic = m > n && m + n > 3;
        let hypersurface = 2 < m && m <= n;
        let dim_checks = |shifts: &[(&str, f64)], out: &mut Vec<HypothesisCheck>| {
            if let Some(f) = &self.f {
                for &(label, k) in shifts {
                    out.push(HypothesisCheck {
                        label: format!("{label} is a dimension function"),
                        holds: DimensionFunction::is_valid(f.s() - k, f.kappa()),
                    });
                }
            }
        };
        let (mf, nf) = (m as f64, n as f64);
        match self.kind {
            CriterionKind::KhintchineGroshev => {
                push(
                    "psi non-increasing (needed for divergence when m = n = 1)",
                    m * n > 1 || self.psi.is_non_increasing(),
                );
            }
            CriterionKind::LebesgueAbsolute | CriterionKind::DifferentRates => {
                push("m > n", m > n);
                push("m + n > 3", m + n > 3);
            }
            CriterionKind::LebesgueHypersurface => push("2 < m <= n", hypersurface),
            CriterionKind::HausdorffAbsolute | CriterionKind::AuxiliaryG => {
                if hypersurface {
                    push("2 < m <= n", true);
                    dim_checks(
                        &[
                            ("f", 0.0),
                            ("r^(-n^2) f", nf * nf),
                            ("r^(-(m-n-1)n) f", (mf - nf - 1.0) * nf),
                            ("r^(-(n-m+1)(m-1)) f", (nf - mf + 1.0) * (mf - 1.0)),
                        ],
                        &mut out,
                    );
                    out.push(HypothesisCheck {
                        label: "r^(-(m-1)(n+1)) f monotonic".into(),
                        holds: true,
                    });
                } else {
                    push("m > n", m > n);
                    push("m + n > 3", generic || m + n > 3);
                    dim_checks(
                        &[
                            ("f", 0.0),
                            ("r^(-n^2) f", nf * nf),
                            ("r^(-(m-n-1)n) f", (mf - nf - 1.0) * nf),
                        ],
                        &mut out,
                    );
                    out.push(HypothesisCheck {
                        label: "r^(-mn) f monotonic".into(),
                        holds: true,
                    });
                }
            }
            CriterionKind::HausdorffClassical => {
                push(
                    "m + n > 2, or psi non-increasing",
                    m + n > 2 || self.psi.is_non_increasing(),
                );
                dim_checks(&[("f", 0.0), ("r^(-(m-1)n) f", (mf - 1.0) * nf)], &mut out);
                out.push(HypothesisCheck {
                    label: "r^(-mn) f monotonic".into(),
                    holds: true,
                });
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Convergent,
    Divergent,
    /// `e = -1`, `k = -1`: decided only by log-log refinements, which are not modelled.
    Boundary,
    /// No asymptotic form available (tabulated ψ).
    Unknown,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The term is asymptotic to `C r^power (ln r)^log`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub power: f64,
    pub log: f64,
}

impl Exponents {
    pub fn classify(&self) -> Classification {
        let (e, k) = (self.power, self.log);
        if e < -1.0 - EXPONENT_TOL {
            Classification::Convergent
        } else if e > -1.0 + EXPONENT_TOL {
            Classification::Divergent
        } else if k < -1.0 - EXPONENT_TOL {
            Classification::Convergent
        } else if k <= -1.0 + EXPONENT_TOL {
            Classification::Boundary
        } else {
            Classification::Divergent
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub label: String,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub cutoff: u64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub kind: CriterionKind,
    pub m: usize,
    pub n: usize,
    pub classification: Classification,
    pub exponents: Option<Exponents>,
    pub formula: String,
    pub hypotheses: Vec<HypothesisCheck>,
    pub partial_sums: Vec<PartialSum>,
}

impl SeriesVerdict {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }
}

pub fn series_term(series: &CriterionSeries, r: u64) -> Result<f64> {
    if r == 0 {
        return Err(Error::ZeroHeight);
    }
    Ok(series.ln_term(r)?.exp())
}

/// `(ln r, ln ln(r+1))` for `r = 1..=` the last partial-sum cut-off.
fn log_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let last = *PARTIAL_SUM_CUTOFFS.last().unwrap_or(&1);
        (1..=last)
            .map(|r| {
                let rf = r as f64;
                (rf.ln(), (rf + 1.0).ln().ln())
            })
            .collect()
    })
}

/// `ln ψ(r)` with the power-log constants hoisted.
enum LnPsi<'a> {
    Power { ln_c: f64, tau: f64, kappa: f64 },
    General(&'a ApproxFunction),
}

impl<'a> LnPsi<'a> {
    fn new(psi: &'a ApproxFunction) -> Self {
        match psi.as_power_log() {
            Some(p) => LnPsi::Power { ln_c: p.c().to_f64().ln(), tau: p.tau(), kappa: p.kappa() },
            None => LnPsi::General(psi),
        }
    }

    fn at(&self, r: u64, ln_r: f64, lnln: f64) -> Result<f64> {
        match self {
            LnPsi::Power { ln_c, tau, kappa } => {
                let mut v = ln_c - tau * ln_r;
                if *kappa != 0.0 {
                    v -= kappa * lnln;
                }
                Ok(v)
            }
            LnPsi::General(p) => Ok(p.eval(r)?.ln()),
        }
    }
}

/// Everything in the term that does not depend on `r`.
struct Kernel<'a> {
    kind: CriterionKind,
    m: f64,
    n: f64,
    psi: Vec<LnPsi<'a>>,
    f: Option<DimensionFunction>,
}

impl<'a> Kernel<'a> {
    fn new(series: &'a CriterionSeries) -> Result<Self> {
        let n = series.n as f64;
        let psi = match series.kind {
            CriterionKind::DifferentRates => series.psi.per_form(series.n)?.into_iter().map(LnPsi::new).collect(),
            _ => vec![LnPsi::new(&series.psi)],
        };
        let f = match series.kind {
            CriterionKind::AuxiliaryG => Some(series.dimension()?.shifted(n * n)?),
            k if k.needs_f() => Some(*series.dimension()?),
            _ => None,
        };
        Ok(Kernel { kind: series.kind, m: series.m as f64, n, psi, f })
    }

    fn ln_at(&self, r: u64, ln_r: f64, lnln: f64) -> Result<f64> {
        let (m, n) = (self.m, self.n);
        let ln_psi = self.psi[0].at(r, ln_r, lnln)?;
        let hausdorff = |psi_power: f64, r_power: f64| -> Result<f64> {
            let f = self.f.as_ref().ok_or(Error::MissingDimensionFunction)?;
            let ln_big_psi = ln_psi - ln_r;
            Ok(f.ln_eval_at_ln(ln_big_psi) - psi_power * ln_big_psi + r_power * ln_r)
        };
        match self.kind {
            CriterionKind::KhintchineGroshev => Ok((m - 1.0) * ln_r + n * ln_psi),
            CriterionKind::LebesgueAbsolute => Ok(n * ln_psi + (m - n - 1.0) * ln_r),
            CriterionKind::LebesgueHypersurface => Ok((m - 1.0) * ln_psi),
            CriterionKind::HausdorffAbsolute => hausdorff((m - 1.0) * n, m - 1.0),
            CriterionKind::HausdorffClassical => hausdorff((m - 1.0) * n, m + n - 1.0),
            CriterionKind::AuxiliaryG => hausdorff((m - n - 1.0) * n, m - 1.0),
            CriterionKind::DifferentRates => {
                let mut acc = (m - n - 1.0) * ln_r;
                for p in &self.psi {
                    acc += p.at(r, ln_r, lnln)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Partial sums at [`PARTIAL_SUM_CUTOFFS`], truncated to the range where `ψ` is defined.
pub fn partial_sums(series: &CriterionSeries) -> Result<Vec<PartialSum>> {
    let last = *PARTIAL_SUM_CUTOFFS.last().unwrap_or(&1);
    let limit = series.psi.max_height().map_or(last, |h| h.min(last));
    let mut cutoffs: Vec<u64> = PARTIAL_SUM_CUTOFFS
        .iter()
        .copied()
        .filter(|&c| c <= limit)
        .collect();
    if cutoffs.last() != Some(&limit) {
        cutoffs.push(limit);
    }
    let kernel = Kernel::new(series)?;
    let table = log_table();
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut acc = 0.0;
    let mut next = cutoffs.iter().peekable();
    for r in 1..=limit {
        let (ln_r, lnln) = match table.get(r as usize - 1) {
            Some(&v) => v,
            None => ((r as f64).ln(), (r as f64 + 1.0).ln().ln()),
        };
        acc += kernel.ln_at(r, ln_r, lnln)?.exp();
        if next.peek() == Some(&&r) {
            out.push(PartialSum { cutoff: r, value: acc });
            next.next();
        }
    }
    Ok(out)
}

pub fn classify(series: &CriterionSeries) -> Result<SeriesVerdict> {
    let exponents = series.exponents();
    Ok(SeriesVerdict {
        kind: series.kind,
        m: series.m,
        n: series.n,
        classification: exponents.map_or(Classification::Unknown, |e| e.classify()),
        exponents,
        formula: series.formula(),
        hypotheses: series.hypotheses(),
        partial_sums: partial_sums(series)?,
    })
}

/// Verdict of the auxiliary series with `g = r^(-n²) f` and `m - n` in place of `m`
/// in the `Ψ` power. Its exponents coincide with the absolute Hausdorff series.
pub fn g_series(m: usize, n: usize, psi: ApproxFunction, f: DimensionFunction) -> Result<SeriesVerdict> {
    f.shifted((n * n) as f64)?;
    classify(&CriterionSeries::new(
        CriterionKind::AuxiliaryG,
        m,
        n,
        psi,
        Some(f),
    )?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub kind: CriterionKind,
    pub s_star: f64,
    /// `s* <= mn`; otherwise the ambient Lebesgue measure already decides.
    pub within_ambient: bool,
}

/// The `s` at which the Hausdorff series for `f = r^s`, `ψ = r^-tau` has exponent `-1`.
pub fn critical_exponent(kind: CriterionKind, m: usize, n: usize, tau: f64) -> Result<CriticalExponent> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidApproxFunction(format!(
            "critical exponent needs tau > 0, got {tau}"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidProblem("m and n must be at least 1".into()));
    }
    let (mf, nf) = (m as f64, n as f64);
    let s_star = match kind {
        CriterionKind::HausdorffAbsolute => {
            if m <= n {
                return Err(Error::Hypothesis(format!("m > n fails for (m, n) = ({m}, {n})")));
            }
            if m + n <= 3 {
                return Err(Error::Hypothesis(format!(
                    "m + n > 3 fails for (m, n) = ({m}, {n})"
                )));
            }
            (mf - 1.0) * nf + mf / (tau + 1.0)
        }
        // r^-tau is non-increasing, which stands in for m + n > 2.
        CriterionKind::HausdorffClassical => (mf - 1.0) * nf + (mf + nf) / (tau + 1.0),
        other => {
            return Err(Error::InvalidProblem(format!(
                "no critical exponent for criterion {other}"
            )))
        }
    };
    Ok(CriticalExponent {
        kind,
        s_star,
        within_ambient: s_star <= mf * nf,
    })
}

/// Measure of the absolute set on the hypersurface when `2 < m <= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypersurfaceMeasure {
    Zero,
    Infinite,
    /// Some `0 < K < ∞`; the constant is not effective.
    FinitePositive,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceOutcome {
    pub verdict: SeriesVerdict,
    /// Limit of `r^(-(m-1)(n+1)) f(r)` as `r → 0`.
    pub limit: Limit,
    pub measure: HypersurfaceMeasure,
}

/// The trichotomy for `2 < m <= n`: zero on convergence, otherwise decided by the
/// behaviour of `r^(-(m-1)(n+1)) f` at 0.
pub fn hypersurface_outcome(
    m: usize,
    n: usize,
    psi: ApproxFunction,
    f: DimensionFunction,
) -> Result<HypersurfaceOutcome> {
    if !(2 < m && m <= n) {
        return Err(Error::Hypothesis(format!(
            "2 < m <= n fails for (m, n) = ({m}, {n})"
        )));
    }
    let verdict = classify(&CriterionSeries::new(
        CriterionKind::HausdorffAbsolute,
        m,
        n,
        psi,
        Some(f),
    )?)?;
    let limit = f.limit_shifted(((m - 1) * (n + 1)) as f64);
    let measure = match verdict.classification {
        Classification::Convergent => HypersurfaceMeasure::Zero,
        Classification::Divergent => match limit {
            Limit::Infinite => HypersurfaceMeasure::Infinite,
            Limit::Positive | Limit::Zero => HypersurfaceMeasure::FinitePositive,
        },
        Classification::Boundary | Classification::Unknown => HypersurfaceMeasure::Unknown,
    };
    Ok(HypersurfaceOutcome {
        verdict,
        limit,
        measure,
    })
}
