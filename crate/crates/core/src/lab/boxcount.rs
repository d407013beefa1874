//! Grid box counts of approximation slabs and their log-log slopes.
//!
//! For a fixed `q` the set `{X : |qX|_i < ψ_i(|q|) ∀i}` is a product over the columns
//! of `X` of slabs `{x ∈ I^m : |q·x| < ψ_i}`. A grid box `δ(idx + [0,1]^m)` meets a
//! slab iff the range of `q·x` over the box meets `(-ψ, ψ)`; with `t = q·idx` that is
//! `-ψ/δ - pos < t < ψ/δ - neg`, where `pos`/`neg` sum the positive/negative parts of `q`.
//! Counts along the axis of largest `|q_j|` are taken in closed form.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::criteria::{critical_exponent, CriterionKind};
use crate::domain::{IntegerVector, ProblemSpec, Regime};
use crate::error::{Error, Result};

/// Largest grid, in boxes, for which the union bitset is kept.
pub const UNION_LIMIT: u128 = 1 << 28;

/// Which slabs enter the count at each resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlabSelection {
    /// Slabs whose width `2ψ(|q|)/‖q‖₂` lies in `(δ/ratio, δ]`; `ratio` defaults to
    /// `2^(tau+1)`, one dyadic height shell for a power `ψ`.
    WidthBand { ratio: Option<f64> },
    /// All `q` with `|q| ≤ q_max[j]` at the `j`-th resolution.
    HeightCap { q_max: Vec<u64> },
    /// One fixed vector at every resolution.
    Single { q: IntegerVector },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountPlan {
    /// Boxes per unit edge; `δ = 1/k`. Strictly increasing, at least three.
    pub resolutions: Vec<u64>,
    pub selection: SlabSelection,
    /// Also count the union of the selected slabs (needs `k^{mn} ≤ 2^28`).
    #[serde(default)]
    pub union: bool,
    pub budget: u128,
}

impl BoxCountPlan {
    /// Resolutions `2^lo, ..., 2^hi` under the width-band selection.
    pub fn dyadic(lo: u32, hi: u32, budget: u128) -> Self {
        BoxCountPlan {
            resolutions: (lo..=hi).map(|j| 1u64 << j).collect(),
            selection: SlabSelection::WidthBand { ratio: None },
            union: false,
            budget,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.resolutions.len() < 3 {
            return Err(Error::InvalidPlan(format!(
                "box counting needs at least 3 resolutions, got {}",
                self.resolutions.len()
            )));
        }
        if self.resolutions[0] < 1 || self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPlan("resolutions must be positive and strictly increasing".into()));
        }
        if let SlabSelection::HeightCap { q_max } = &self.selection {
            if q_max.len() != self.resolutions.len() {
                return Err(Error::InvalidPlan(format!(
                    "{} height caps for {} resolutions",
                    q_max.len(),
                    self.resolutions.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountPoint {
    pub resolution: u64,
    pub delta: f64,
    pub slabs: u64,
    /// Sum over selected `q` of the boxes meeting that slab.
    pub cover: u64,
    /// Boxes meeting at least one selected slab.
    pub union: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Least-squares line through `(x, y)`; `None` with fewer than two points.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let k = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    Some(LineFit { slope, intercept, residuals })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimensionEstimate {
    pub m: usize,
    pub n: usize,
    pub points: Vec<BoxCountPoint>,
    /// Slope of `ln cover` against `ln(1/δ)`; absent if some count is zero.
    pub cover_fit: Option<LineFit>,
    pub union_fit: Option<LineFit>,
    /// Critical exponent predicted for a pure power `ψ`.
    pub s_star: Option<f64>,
}

impl BoxDimensionEstimate {
    /// Rows `delta,box_count,union_count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(["delta", "box_count", "union_count"]).map_err(io)?;
        for p in &self.points {
            let union = p.union.map(|u| u.to_string()).unwrap_or_default();
            out.write_record([p.delta.to_string(), p.cover.to_string(), union]).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Lebesgue measure of `{x ∈ [0,1]^m : |q·x| < w}`.
pub fn slab_volume(q: &[i64], w: f64) -> f64 {
    let a: Vec<f64> = q.iter().filter(|&&v| v != 0).map(|&v| (v as f64).abs()).collect();
    if a.is_empty() {
        return if w > 0.0 { 1.0 } else { 0.0 };
    }
    let neg: f64 = q.iter().filter(|&&v| v < 0).map(|&v| v as f64).sum();
    // Σ a_j V_j with V uniform; q·x = neg + that sum
    let d = a.len();
    let scale: f64 = a.iter().product::<f64>() * (1..=d).map(|i| i as f64).product::<f64>();
    let cdf = |x: f64| -> f64 {
        let mut total = 0.0;
        for mask in 0u32..(1 << d) {
            let shift: f64 = (0..d).filter(|j| mask >> j & 1 == 1).map(|j| a[j]).sum();
            let t = x - shift;
            if t > 0.0 {
                let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * t.powi(d as i32);
            }
        }
        (total / scale).clamp(0.0, 1.0)
    };
    (cdf(w - neg) - cdf(-w - neg)).clamp(0.0, 1.0)
}

/// Calls `visit(other, lo, hi)` for every assignment of the non-axis coordinates with a
/// non-empty run `lo..=hi` of axis values; `other` is the flat index with axis value 0.
fn hit_runs(q: &[i64], w: f64, k: u64, mut visit: impl FnMut(u64, u64, u64)) {
    let m = q.len();
    let axis = axis_of(q);
    let pos: f64 = q.iter().filter(|&&v| v > 0).map(|&v| v as f64).sum();
    let neg: f64 = q.iter().filter(|&&v| v < 0).map(|&v| v as f64).sum();
    let (lo_t, hi_t) = (-w * k as f64 - pos, w * k as f64 - neg);
    let qa = q[axis] as f64;
    let others: Vec<usize> = (0..m).filter(|&j| j != axis).collect();
    let mut idx = vec![0u64; others.len()];
    loop {
        let s: f64 = others.iter().zip(&idx).map(|(&j, &v)| q[j] as f64 * v as f64).sum();
        // lo_t < s + qa l < hi_t
        let (a, b) = ((lo_t - s) / qa, (hi_t - s) / qa);
        let (a, b) = if qa > 0.0 { (a, b) } else { (b, a) };
        let lmin = (a.floor() + 1.0).max(0.0);
        let lmax = (b.ceil() - 1.0).min(k as f64 - 1.0);
        if lmin <= lmax {
            let flat: u64 = others
                .iter()
                .zip(&idx)
                .map(|(&j, &v)| v * k.pow(j as u32))
                .sum();
            visit(flat, lmin as u64, lmax as u64);
        }
        let mut p = 0;
        loop {
            if p == idx.len() {
                return;
            }
            idx[p] += 1;
            if idx[p] < k {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Grid boxes of side `1/k` in `[0,1]^m` meeting `{|q·x| < w}`.
pub fn slab_box_count(q: &[i64], w: f64, k: u64) -> u64 {
    let mut total = 0;
    hit_runs(q, w, k, |_, lo, hi| total += hi - lo + 1);
    total
}

fn axis_of(q: &[i64]) -> usize {
    (0..q.len()).max_by_key(|&j| (q[j].unsigned_abs(), std::cmp::Reverse(j))).expect("m >= 1")
}

/// Sign-canonical vectors of height exactly `h` in `Z^m`.
fn shell_vectors(m: usize, h: u64) -> Vec<Vec<i64>> {
    let h = h as i64;
    let side = (2 * h + 1) as u64;
    let mut out = Vec::new();
    for code in 0..side.pow(m as u32) {
        let mut c = code;
        let v: Vec<i64> = (0..m)
            .map(|_| {
                let d = (c % side) as i64 - h;
                c /= side;
                d
            })
            .collect();
        let q = IntegerVector::new(v);
        if q.height() == h as u64 && q.is_sign_canonical() {
            out.push(q.0);
        }
    }
    out
}

fn default_ratio(spec: &ProblemSpec) -> Result<f64> {
    spec.psi()
        .as_power_log()
        .map(|p| 2f64.powf(p.tau() + 1.0))
        .ok_or_else(|| Error::InvalidPlan("width band ratio needed unless psi is a single power-log".into()))
}

/// Vectors selected at resolution index `j`, with their per-column widths.
fn select(spec: &ProblemSpec, plan: &BoxCountPlan, j: usize) -> Result<Vec<(Vec<i64>, Vec<f64>)>> {
    let psis = spec.psi().per_form(spec.n())?;
    let widths = |h: u64| -> Result<Vec<f64>> { psis.iter().map(|f| f.eval(h)).collect() };
    let m = spec.m();
    let mut out = Vec::new();
    match &plan.selection {
        SlabSelection::Single { q } => {
            if q.len() != m || q.is_zero() {
                return Err(Error::InvalidPlan(format!("slab vector must be a nonzero vector of length {m}")));
            }
            out.push((q.0.clone(), widths(q.height())?));
        }
        SlabSelection::HeightCap { q_max } => {
            for h in 1..=q_max[j] {
                let w = widths(h)?;
                out.extend(shell_vectors(m, h).into_iter().map(|q| (q, w.clone())));
            }
        }
        SlabSelection::WidthBand { ratio } => {
            if !spec.psi().is_non_increasing() {
                return Err(Error::InvalidPlan("width band selection needs a non-increasing psi".into()));
            }
            let ratio = match ratio {
                Some(r) if *r > 1.0 => *r,
                Some(r) => return Err(Error::InvalidPlan(format!("band ratio must exceed 1, got {r}"))),
                None => default_ratio(spec)?,
            };
            let delta = 1.0 / plan.resolutions[j] as f64;
            let floor = delta / ratio;
            let limit = spec.psi().max_height().unwrap_or(u64::MAX);
            let mut h = 1;
            while h <= limit {
                let w = widths(h)?;
                let wmax = w.iter().cloned().fold(0.0, f64::max);
                // the widest slab of height h has ‖q‖₂ = h
                if 2.0 * wmax / h as f64 <= floor {
                    break;
                }
                if 2.0 * wmax / (h as f64 * (m as f64).sqrt()) <= delta {
                    for q in shell_vectors(m, h) {
                        let norm = q.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
                        let t = 2.0 * wmax / norm;
                        if t > floor && t <= delta {
                            out.push((q, w.clone()));
                        }
                    }
                }
                h += 1;
            }
        }
    }
    Ok(out)
}

/// Box counts of the selected slabs over a resolution schedule, with log-log slopes.
pub fn box_count_dimension(spec: &ProblemSpec, plan: &BoxCountPlan) -> Result<BoxDimensionEstimate> {
    if spec.regime() != Regime::Generic {
        return Err(Error::Regime(format!(
            "box counting needs the Generic regime, (m, n) = ({}, {}) is {}",
            spec.m(),
            spec.n(),
            spec.regime()
        )));
    }
    plan.validate()?;
    let (m, n) = (spec.m(), spec.n());
    let selections: Vec<_> = (0..plan.resolutions.len())
        .map(|j| select(spec, plan, j))
        .collect::<Result<_>>()?;
    let mut cost: u128 = 0;
    for (sel, &k) in selections.iter().zip(&plan.resolutions) {
        let per = (k as u128).saturating_pow(m as u32 - 1) * n as u128;
        cost = cost.saturating_add(per.saturating_mul(sel.len() as u128));
    }
    if cost > plan.budget {
        return Err(Error::BudgetExceeded { estimate: cost, budget: plan.budget });
    }

    let mut points = Vec::new();
    for (sel, &k) in selections.iter().zip(&plan.resolutions) {
        let cells = (k as u128).checked_pow((m * n) as u32).unwrap_or(u128::MAX);
        let mut bits = (plan.union && cells <= UNION_LIMIT).then(|| vec![0u64; (cells as usize).div_ceil(64)]);
        let mut cover: u64 = 0;
        for (q, w) in sel {
            if let Some(bits) = bits.as_mut() {
                cover += mark_union(q, w, k, m, bits);
            } else {
                cover += w.iter().map(|&wi| slab_box_count(q, wi, k)).product::<u64>();
            }
        }
        points.push(BoxCountPoint {
            resolution: k,
            delta: 1.0 / k as f64,
            slabs: sel.len() as u64,
            cover,
            union: bits.map(|b| b.iter().map(|x| x.count_ones() as u64).sum()),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.resolution as f64).ln()).collect();
    let log_fit = |ys: Option<Vec<f64>>| ys.and_then(|ys| fit_line(&xs, &ys));
    let cover_fit = log_fit(
        points.iter().map(|p| (p.cover > 0).then(|| (p.cover as f64).ln())).collect(),
    );
    let union_fit = log_fit(
        points.iter().map(|p| p.union.filter(|&u| u > 0).map(|u| (u as f64).ln())).collect(),
    );
    let s_star = spec
        .psi()
        .as_power_log()
        .filter(|p| p.kappa() == 0.0)
        .and_then(|p| critical_exponent(CriterionKind::HausdorffAbsolute, m, n, p.tau()).ok())
        .map(|c| c.s_star);
    Ok(BoxDimensionEstimate { m, n, points, cover_fit, union_fit, s_star })
}

/// Sets the boxes of the product slab for `q` and returns how many it has.
fn mark_union(q: &[i64], w: &[f64], k: u64, m: usize, bits: &mut [u64]) -> u64 {
    let stride = k.pow(axis_of(q) as u32);
    let cols: Vec<Vec<u64>> = w
        .iter()
        .map(|&wi| {
            let mut cells = Vec::new();
            hit_runs(q, wi, k, |base, lo, hi| cells.extend((lo..=hi).map(|l| base + l * stride)));
            cells
        })
        .collect();
    let block = k.pow(m as u32);
    let total: u64 = cols.iter().map(|c| c.len() as u64).product();
    if total == 0 {
        return 0;
    }
    let mut pick = vec![0usize; cols.len()];
    loop {
        let flat: u64 = pick
            .iter()
            .enumerate()
            .map(|(i, &p)| cols[i][p] * block.pow(i as u32))
            .sum();
        bits[(flat / 64) as usize] |= 1 << (flat % 64);
        let mut i = 0;
        loop {
            if i == pick.len() {
                return total;
            }
            pick[i] += 1;
            if pick[i] < cols[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}
