//! Evaluation of the linear forms `qX` and bounded-height enumeration of solutions.
//!
//! The scan walks sign-canonical integer vectors (first nonzero coordinate
//! positive). For the absolute variant the last coordinate is restricted to the
//! interval where every form can still fall below the largest bound reachable at
//! the prefix height; the remaining candidates are checked form by form with early
//! exit. Exact matrices are screened in `f64` with a conservative slack and then
//! decided in rational arithmetic, so membership never depends on rounding.

use std::cmp::Ordering;
use std::io::Write;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{FormMatrix, IntegerVector, ProblemSpec, SolutionRecord, Variant};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::scalar::{dist_to_nearest, round_half_even, Scalar};

/// Search all `q` with `q_min <= |q| <= q_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct HeightWindow {
    q_min: u64,
    q_max: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct WindowRepr {
    q_min: u64,
    q_max: u64,
}

impl TryFrom<WindowRepr> for HeightWindow {
    type Error = Error;
    fn try_from(w: WindowRepr) -> Result<Self> {
        HeightWindow::new(w.q_min, w.q_max)
    }
}

impl From<HeightWindow> for WindowRepr {
    fn from(w: HeightWindow) -> Self {
        WindowRepr {
            q_min: w.q_min,
            q_max: w.q_max,
        }
    }
}

impl HeightWindow {
    pub fn new(q_min: u64, q_max: u64) -> Result<Self> {
        if q_min == 0 || q_min > q_max {
            return Err(Error::InvalidWindow { q_min, q_max });
        }
        Ok(HeightWindow { q_min, q_max })
    }

    pub fn q_min(&self) -> u64 {
        self.q_min
    }

    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn contains(&self, h: u64) -> bool {
        (self.q_min..=self.q_max).contains(&h)
    }

    pub fn heights(&self) -> std::ops::RangeInclusive<u64> {
        self.q_min..=self.q_max
    }

    /// Number of nonzero vectors in `Z^m` with height in the window.
    pub fn lattice_count(&self, m: usize) -> u128 {
        let cube = |h: u64| -> u128 { (2 * h as u128 + 1).pow(m as u32) };
        cube(self.q_max) - cube(self.q_min - 1)
    }
}

impl std::str::FromStr for HeightWindow {
    type Err = Error;
    /// `"a:b"` or `"b"` (meaning `1:b`).
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad height {t:?} in window {s:?}")))
        };
        match s.split_once(':') {
            Some((a, b)) => HeightWindow::new(parse(a)?, parse(b)?),
            None => HeightWindow::new(1, parse(s)?),
        }
    }
}

/// Strict `<` follows the set definitions; `<=` is available for sensitivity checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    #[default]
    Strict,
    NonStrict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub inequality: Inequality,
    /// Float mode: candidates with `|margin| <= guard * bound` are reported as uncertain.
    pub guard: f64,
    /// Worker threads; results do not depend on this.
    pub jobs: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            inequality: Inequality::Strict,
            guard: 1e-12,
            jobs: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellCount {
    pub r: u64,
    pub count: u64,
}

/// Per-shell solution counts without the records.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellCounts {
    pub window: HeightWindow,
    pub counts: Vec<ShellCount>,
    pub uncertain: u64,
    pub vectors_scanned: u64,
}

impl ShellCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.count).sum()
    }

    /// Smallest height carrying a solution.
    pub fn first_height(&self) -> Option<u64> {
        self.counts.iter().find(|c| c.count > 0).map(|c| c.r)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_shell_csv(&self.counts, w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub spec: ProblemSpec,
    pub window: HeightWindow,
    /// Sign-canonical solutions, by increasing height then lexicographically.
    pub solutions: Vec<SolutionRecord>,
    /// One entry per height in the window.
    pub shell_counts: Vec<ShellCount>,
    pub vectors_scanned: u64,
    /// Float mode only: candidates too close to the bound to decide.
    pub uncertain: Vec<IntegerVector>,
}

impl EnumerationReport {
    pub fn write_shell_csv<W: Write>(&self, w: W) -> Result<()> {
        write_shell_csv(&self.shell_counts, w)
    }
}

fn write_shell_csv<W: Write>(counts: &[ShellCount], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(["r", "count"]).map_err(io)?;
    for c in counts {
        wtr.write_record([c.r.to_string(), c.count.to_string()])
            .map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn check_len(q: &IntegerVector, m: usize) -> Result<()> {
    if q.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: q.len(),
        });
    }
    Ok(())
}

/// The raw forms `qX` (signed).
pub fn eval_forms(q: &IntegerVector, x: &RealMatrix) -> Result<Vec<Scalar>> {
    check_len(q, x.rows())?;
    Ok(match x {
        RealMatrix::Exact(mat) => (0..mat.cols())
            .map(|i| {
                let v = q
                    .components()
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .fold(BigRational::zero(), |acc, (j, &c)| {
                        acc + mat.get(j, i) * BigRational::from_integer(c.into())
                    });
                Scalar::Exact(v)
            })
            .collect(),
        RealMatrix::Float(mat) => (0..mat.cols())
            .map(|i| {
                Scalar::Float(
                    q.components()
                        .iter()
                        .enumerate()
                        .fold(0.0, |acc, (j, &c)| acc + c as f64 * mat.get(j, i)),
                )
            })
            .collect(),
    })
}

/// `(|(qX)_1|, …, |(qX)_n|)`; exact for rational `X`.
pub fn eval_abs_forms(q: &IntegerVector, x: &FormMatrix) -> Result<Vec<Scalar>> {
    Ok(eval_forms(q, x.data())?
        .into_iter()
        .map(|v| match v {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        })
        .collect())
}

/// Nearest-integer distances `‖rY‖_i` and the nearest integer vector `p` (ties to even).
pub fn eval_dist_forms(r: &IntegerVector, y: &FormMatrix) -> Result<(Vec<Scalar>, IntegerVector)> {
    let raw = eval_forms(r, y.data())?;
    let mut dists = Vec::with_capacity(raw.len());
    let mut p = Vec::with_capacity(raw.len());
    for v in raw {
        match v {
            Scalar::Exact(x) => {
                let near = round_half_even(&x);
                p.push(bigint_to_i64(&near)?);
                dists.push(Scalar::Exact(dist_to_nearest(&x)));
            }
            Scalar::Float(x) => {
                let near = x.round_ties_even();
                p.push(near as i64);
                dists.push(Scalar::Float((x - near).abs()));
            }
        }
    }
    Ok((dists, IntegerVector::new(p)))
}

pub(crate) fn bigint_to_i64(v: &num_bigint::BigInt) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::InvalidProblem(format!("integer {v} overflows i64")))
}

/// Enumerate every sign-canonical solution with height in `window`.
pub fn enumerate_solutions(
    spec: &ProblemSpec,
    x: &FormMatrix,
    window: HeightWindow,
    config: &EngineConfig,
) -> Result<EnumerationReport> {
    let engine = Engine::prepare(spec, x, window, config)?;
    let chunks = engine.run(config.jobs, Mode::Records)?;
    let mut solutions = Vec::new();
    let mut uncertain = Vec::new();
    let mut scanned = 0;
    for c in chunks {
        solutions.extend(c.records);
        uncertain.extend(c.uncertain);
        scanned += c.scanned;
    }
    solutions.sort_by(|a, b| shell_order(&a.q, &b.q));
    uncertain.sort_by(shell_order);
    let mut counts = vec![0u64; (window.q_max - window.q_min + 1) as usize];
    for s in &solutions {
        counts[(s.q.height() - window.q_min) as usize] += 1;
    }
    Ok(EnumerationReport {
        spec: spec.clone(),
        window,
        solutions,
        shell_counts: shell_counts(window, &counts),
        vectors_scanned: scanned,
        uncertain,
    })
}

/// Per-shell counts only; agrees exactly with [`enumerate_solutions`].
pub fn count_shells(
    spec: &ProblemSpec,
    x: &FormMatrix,
    window: HeightWindow,
    config: &EngineConfig,
) -> Result<ShellCounts> {
    let engine = Engine::prepare(spec, x, window, config)?;
    let chunks = engine.run(config.jobs, Mode::Counts)?;
    let mut counts = vec![0u64; (window.q_max - window.q_min + 1) as usize];
    let mut uncertain = 0;
    let mut scanned = 0;
    for c in chunks {
        for (acc, v) in counts.iter_mut().zip(&c.counts) {
            *acc += v;
        }
        uncertain += c.uncertain.len() as u64;
        scanned += c.scanned;
    }
    Ok(ShellCounts {
        window,
        counts: shell_counts(window, &counts),
        uncertain,
        vectors_scanned: scanned,
    })
}

fn shell_counts(window: HeightWindow, counts: &[u64]) -> Vec<ShellCount> {
    window
        .heights()
        .zip(counts)
        .map(|(r, &count)| ShellCount { r, count })
        .collect()
}

/// Increasing height, then lexicographic.
pub fn shell_order(a: &IntegerVector, b: &IntegerVector) -> Ordering {
    a.height()
        .cmp(&b.height())
        .then_with(|| a.components().cmp(b.components()))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Records,
    Counts,
}

#[derive(Default)]
struct ChunkResult {
    records: Vec<SolutionRecord>,
    counts: Vec<u64>,
    uncertain: Vec<IntegerVector>,
    scanned: u64,
}

enum Decision {
    Pass,
    Fail,
    Uncertain,
}

/// Prefixes per parallel work item.
const CHUNK: u64 = 4096;

struct Engine {
    m: usize,
    n: usize,
    variant: Variant,
    window: HeightWindow,
    inequality: Inequality,
    guard: f64,
    /// Row-major `m × n`.
    xf: Vec<f64>,
    xq: Option<Vec<BigRational>>,
    /// `bounds_f[(h - q_min) * n + i] = ψ_i(h)`.
    bounds_f: Vec<f64>,
    bounds_q: Option<Vec<BigRational>>,
    /// `suffix_max[(h - q_min) * n + i] = max_{r >= h} ψ_i(r)` over the window.
    suffix_max: Vec<f64>,
    prefix_total: u64,
}

impl Engine {
    fn prepare(
        spec: &ProblemSpec,
        x: &FormMatrix,
        window: HeightWindow,
        config: &EngineConfig,
    ) -> Result<Engine> {
        let (m, n) = (spec.m(), spec.n());
        if x.m() != m || x.n() != n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: x.m() * x.n(),
            });
        }
        if let Some(h) = spec.psi().max_height() {
            if window.q_max > h {
                return Err(Error::TableRange {
                    r: window.q_max,
                    len: h as usize,
                });
            }
        }
        if window.q_max > i64::MAX as u64 / 4 {
            return Err(Error::InvalidWindow {
                q_min: window.q_min,
                q_max: window.q_max,
            });
        }
        let side = 2 * window.q_max + 1;
        let prefix_total = side
            .checked_pow((m - 1) as u32)
            .filter(|&t| t < 1 << 48)
            .ok_or(Error::InvalidWindow {
                q_min: window.q_min,
                q_max: window.q_max,
            })?;
        let psis = spec.psi().per_form(n)?;
        let heights = (window.q_max - window.q_min + 1) as usize;
        let mut bounds_f = Vec::with_capacity(heights * n);
        for h in window.heights() {
            for f in &psis {
                bounds_f.push(f.eval(h)?);
            }
        }
        let mut suffix_max = bounds_f.clone();
        for k in (0..heights.saturating_sub(1)).rev() {
            for i in 0..n {
                suffix_max[k * n + i] = suffix_max[k * n + i].max(suffix_max[(k + 1) * n + i]);
            }
        }
        let (xq, bounds_q) = match x.data() {
            RealMatrix::Exact(mat) => {
                let mut bq = Vec::with_capacity(heights * n);
                for h in window.heights() {
                    for f in &psis {
                        bq.push(f.eval_exact(h)?);
                    }
                }
                (Some(mat.entries().to_vec()), Some(bq))
            }
            RealMatrix::Float(_) => (None, None),
        };
        Ok(Engine {
            m,
            n,
            variant: spec.variant(),
            window,
            inequality: config.inequality,
            guard: config.guard,
            xf: x.to_f64().entries().to_vec(),
            xq,
            bounds_f,
            bounds_q,
            suffix_max,
            prefix_total,
        })
    }

    fn run(&self, jobs: usize, mode: Mode) -> Result<Vec<ChunkResult>> {
        let n_chunks = self.prefix_total.div_ceil(CHUNK);
        let work = |c: u64| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(self.prefix_total);
            self.scan_range(start, end, mode)
        };
        if jobs <= 1 {
            return Ok((0..n_chunks).map(work).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(pool.install(|| (0..n_chunks).into_par_iter().map(work).collect()))
    }

    fn scan_range(&self, start: u64, end: u64, mode: Mode) -> ChunkResult {
        let q_max = self.window.q_max as i64;
        let side = 2 * self.window.q_max + 1;
        let mut out = ChunkResult::default();
        if mode == Mode::Counts {
            out.counts = vec![0; (self.window.q_max - self.window.q_min + 1) as usize];
        }
        let mut q = vec![0i64; self.m];
        let mut partial = vec![0f64; self.n];
        for idx in start..end {
            // decode prefix digits, most significant first
            let mut rem = idx;
            for j in (0..self.m - 1).rev() {
                q[j] = (rem % side) as i64 - q_max;
                rem /= side;
            }
            let prefix = &q[..self.m - 1];
            let first_nonzero = prefix.iter().find(|&&v| v != 0).copied();
            if first_nonzero.is_some_and(|v| v < 0) {
                continue;
            }
            let h_p = prefix.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            for (i, s) in partial.iter_mut().enumerate() {
                *s = prefix
                    .iter()
                    .enumerate()
                    .fold(0.0, |acc, (j, &c)| acc + c as f64 * self.xf[j * self.n + i]);
            }
            let Some((lo, hi)) = self.last_range(first_nonzero.is_none(), h_p, &partial) else {
                continue;
            };
            for last in lo..=hi {
                let h = h_p.max(last.unsigned_abs());
                if !self.window.contains(h) {
                    continue;
                }
                if first_nonzero.is_none() && last <= 0 {
                    continue;
                }
                q[self.m - 1] = last;
                out.scanned += 1;
                match self.decide(&q, h, &partial, last) {
                    Decision::Fail => {}
                    Decision::Uncertain => out.uncertain.push(IntegerVector::new(q.clone())),
                    Decision::Pass => match mode {
                        Mode::Counts => out.counts[(h - self.window.q_min) as usize] += 1,
                        Mode::Records => out.records.push(self.record(&q, h)),
                    },
                }
            }
        }
        out
    }

    /// Candidate range for the last coordinate.
    fn last_range(&self, prefix_zero: bool, h_p: u64, partial: &[f64]) -> Option<(i64, i64)> {
        let q_max = self.window.q_max as i64;
        let mut lo = if prefix_zero { 1 } else { -q_max };
        let mut hi = q_max;
        if self.variant == Variant::Absolute {
            let h_lo = h_p.max(self.window.q_min);
            let base = (h_lo - self.window.q_min) as usize * self.n;
            let mut lo_f = f64::NEG_INFINITY;
            let mut hi_f = f64::INFINITY;
            for (i, &s) in partial.iter().enumerate() {
                let b = self.suffix_max[base + i];
                let a = self.xf[(self.m - 1) * self.n + i];
                let slack = 1e-9 * (1.0 + s.abs());
                if a == 0.0 {
                    if s.abs() > b + slack {
                        return None;
                    }
                    continue;
                }
                let (mut l, mut u) = ((-b - s) / a, (b - s) / a);
                if l > u {
                    std::mem::swap(&mut l, &mut u);
                }
                lo_f = lo_f.max(l);
                hi_f = hi_f.min(u);
            }
            if lo_f.is_finite() {
                lo = lo.max((lo_f.floor() - 1.0).max(-(q_max as f64)) as i64);
            }
            if hi_f.is_finite() {
                hi = hi.min((hi_f.ceil() + 1.0).min(q_max as f64) as i64);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    fn decide(&self, q: &[i64], h: u64, partial: &[f64], last: i64) -> Decision {
        let base = (h - self.window.q_min) as usize * self.n;
        let row = (self.m - 1) * self.n;
        let exact = self.xq.is_some();
        let mut uncertain = false;
        for (i, p) in partial.iter().enumerate().take(self.n) {
            let v = p + last as f64 * self.xf[row + i];
            let val = match self.variant {
                Variant::Absolute => v.abs(),
                Variant::Classical => (v - v.round_ties_even()).abs(),
            };
            let b = self.bounds_f[base + i];
            let margin = b - val;
            if exact {
                let slack = 1e-9 * (1.0 + q.iter().map(|c| c.unsigned_abs() as f64).sum::<f64>());
                if margin < -slack {
                    return Decision::Fail;
                }
                continue;
            }
            let tol = self.guard * b;
            if tol > 0.0 && margin.abs() <= tol {
                uncertain = true;
            } else if !(margin > 0.0 || (margin == 0.0 && self.inequality == Inequality::NonStrict)) {
                return Decision::Fail;
            }
        }
        if exact {
            return self.decide_exact(q, h);
        }
        if uncertain {
            Decision::Uncertain
        } else {
            Decision::Pass
        }
    }

    fn decide_exact(&self, q: &[i64], h: u64) -> Decision {
        let (Some(xq), Some(bq)) = (&self.xq, &self.bounds_q) else {
            return Decision::Fail;
        };
        let base = (h - self.window.q_min) as usize * self.n;
        for i in 0..self.n {
            let val = self.exact_value(xq, q, i);
            let ord = val.cmp(&bq[base + i]);
            let ok = match self.inequality {
                Inequality::Strict => ord == Ordering::Less,
                Inequality::NonStrict => ord != Ordering::Greater,
            };
            if !ok {
                return Decision::Fail;
            }
        }
        Decision::Pass
    }

    fn exact_value(&self, xq: &[BigRational], q: &[i64], i: usize) -> BigRational {
        let v = q
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .fold(BigRational::zero(), |acc, (j, &c)| {
                acc + &xq[j * self.n + i] * BigRational::from_integer(c.into())
            });
        match self.variant {
            Variant::Absolute => v.abs(),
            Variant::Classical => dist_to_nearest(&v),
        }
    }

    fn record(&self, q: &[i64], h: u64) -> SolutionRecord {
        let base = (h - self.window.q_min) as usize * self.n;
        match (&self.xq, &self.bounds_q) {
            (Some(xq), Some(bq)) => {
                let values: Vec<BigRational> =
                    (0..self.n).map(|i| self.exact_value(xq, q, i)).collect();
                let bounds = &bq[base..base + self.n];
                let margin = values
                    .iter()
                    .zip(bounds)
                    .map(|(v, b)| b - v)
                    .min()
                    .unwrap_or_else(BigRational::zero);
                SolutionRecord {
                    q: IntegerVector::new(q.to_vec()),
                    form_values: values.into_iter().map(Scalar::Exact).collect(),
                    bounds: bounds.iter().cloned().map(Scalar::Exact).collect(),
                    margin: Scalar::Exact(margin),
                }
            }
            _ => {
                let values: Vec<f64> = (0..self.n)
                    .map(|i| {
                        let v = q
                            .iter()
                            .enumerate()
                            .fold(0.0, |acc, (j, &c)| acc + c as f64 * self.xf[j * self.n + i]);
                        match self.variant {
                            Variant::Absolute => v.abs(),
                            Variant::Classical => (v - v.round_ties_even()).abs(),
                        }
                    })
                    .collect();
                let bounds = &self.bounds_f[base..base + self.n];
                let margin = values
                    .iter()
                    .zip(bounds)
                    .map(|(v, b)| b - v)
                    .fold(f64::INFINITY, f64::min);
                SolutionRecord {
                    q: IntegerVector::new(q.to_vec()),
                    form_values: values.into_iter().map(Scalar::Float).collect(),
                    bounds: bounds.iter().map(|&b| Scalar::Float(b)).collect(),
                    margin: Scalar::Float(margin),
                }
            }
        }
    }
}
