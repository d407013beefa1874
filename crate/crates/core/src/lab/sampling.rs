//! Monte Carlo hit fractions over uniformly sampled matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{FormMatrix, ProblemSpec, Regime, Variant};
use crate::error::{Error, Result};
use crate::forms::{count_shells, EngineConfig, HeightWindow};
use crate::linalg::Matrix;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Default cap on estimated form evaluations per run.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

/// Samples handed to one worker at a time.
const SAMPLE_CHUNK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: u64, trials: u64) -> WilsonInterval {
    if trials == 0 {
        return WilsonInterval { low: 0.0, high: 1.0 };
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    WilsonInterval {
        low: (centre - half).max(0.0),
        high: (centre + half).min(1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub window: HeightWindow,
    pub samples: u64,
    /// Samples with at least one solution in the window.
    pub hits: u64,
    pub fraction: f64,
    pub ci: WilsonInterval,
    /// Mean number of sign-canonical solutions per sample.
    pub mean_solutions: f64,
    /// Candidates left undecided by the float guard, over all samples.
    pub uncertain: u64,
}

/// Matrix for sample `index`: stream `index` of ChaCha8 keyed by `seed`, entries
/// uniform on `[0, 1)` in row-major order.
pub fn sample_matrix(m: usize, n: usize, seed: u64, index: u64) -> FormMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let data: Vec<f64> = (0..m * n).map(|_| rng.random::<f64>()).collect();
    let rows = data.chunks(n).map(<[f64]>::to_vec).collect();
    FormMatrix::float(Matrix::from_rows(rows).expect("rectangular")).expect("entries in [0, 1)")
}

/// Regimes where the measure question is non-trivial and answered by a zero-one law.
pub fn check_sampling_regime(spec: &ProblemSpec) -> Result<()> {
    match spec.regime() {
        Regime::Generic | Regime::Classical => Ok(()),
        other => Err(Error::Regime(format!(
            "hit fractions need the Generic or Classical regime, (m, n) = ({}, {}) is {other}",
            spec.m(),
            spec.n()
        ))),
    }
}

/// Upper estimate of the form evaluations one engine scan performs.
pub fn scan_cost(spec: &ProblemSpec, window: HeightWindow) -> Result<u128> {
    let (m, n) = (spec.m() as u32, spec.n() as u128);
    let side = 2 * window.q_max() as u128 + 1;
    match spec.variant() {
        Variant::Classical => Ok(side.pow(m) / 2 * n),
        Variant::Absolute => {
            // the last coordinate runs over an interval of expected length
            // about 2B(1 + ln(side / 2B)) when its matrix entry is uniform
            let mut b: f64 = 0.0;
            for f in spec.psi().per_form(spec.n())? {
                b = b.max(f.eval(window.q_min())?);
            }
            let reach = 2.0 * b;
            let per_prefix = 3.0 + reach * (1.0 + (side as f64 / reach.max(1e-300)).ln().max(0.0));
            let per_prefix = per_prefix.min(side as f64);
            let prefixes = side.pow(m - 1) / 2 + 1;
            Ok((prefixes as f64 * per_prefix).ceil() as u128 * n)
        }
    }
}

/// Per-sample shell data: the smallest solution height and per-height counts.
struct SampleOutcome {
    counts: Vec<u64>,
    uncertain: u64,
}

fn run_samples(
    spec: &ProblemSpec,
    scan: HeightWindow,
    samples: u64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<SampleOutcome>> {
    let engine = EngineConfig::default();
    let one = |i: u64| -> Result<SampleOutcome> {
        let x = sample_matrix(spec.m(), spec.n(), seed, i);
        let c = count_shells(spec, &x, scan, &engine)?;
        Ok(SampleOutcome {
            counts: c.counts.iter().map(|s| s.count).collect(),
            uncertain: c.uncertain,
        })
    };
    let chunks: Vec<(u64, u64)> = (0..samples)
        .step_by(SAMPLE_CHUNK)
        .map(|s| (s, (s + SAMPLE_CHUNK as u64).min(samples)))
        .collect();
    let work = |&(a, b): &(u64, u64)| (a..b).map(one).collect::<Result<Vec<_>>>();
    let nested: Vec<Result<Vec<SampleOutcome>>> = if jobs <= 1 {
        chunks.iter().map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| chunks.par_iter().map(work).collect())
    };
    let mut out = Vec::with_capacity(samples as usize);
    for c in nested {
        out.extend(c?);
    }
    Ok(out)
}

/// Hit fractions for several windows from one scan per distinct `q_min`.
///
/// Windows sharing `q_min` are nested, so a single scan of the widest one yields all
/// of them; results are independent of `jobs`.
pub fn estimate_hit_fractions(
    spec: &ProblemSpec,
    windows: &[HeightWindow],
    samples: u64,
    seed: u64,
    jobs: usize,
    budget: u128,
) -> Result<Vec<HitEstimate>> {
    check_sampling_regime(spec)?;
    if samples == 0 {
        return Err(Error::InvalidPlan("samples must be at least 1".into()));
    }
    let mut scans: Vec<HeightWindow> = Vec::new();
    for w in windows {
        match scans.iter_mut().find(|s| s.q_min() == w.q_min()) {
            Some(s) if s.q_max() < w.q_max() => *s = *w,
            Some(_) => {}
            None => scans.push(*w),
        }
    }
    let mut estimate: u128 = 0;
    for s in &scans {
        estimate = estimate.saturating_add(scan_cost(spec, *s)?.saturating_mul(samples as u128));
    }
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    let mut results = Vec::new();
    for scan in scans {
        results.push((scan, run_samples(spec, scan, samples, seed, jobs)?));
    }
    windows
        .iter()
        .map(|w| {
            let (scan, outcomes) = results
                .iter()
                .find(|(s, _)| s.q_min() == w.q_min())
                .expect("every window has a scan");
            let upto = (w.q_max() - scan.q_min() + 1) as usize;
            let mut hits = 0;
            let mut total = 0u64;
            let mut uncertain = 0;
            for o in outcomes {
                let c: u64 = o.counts[..upto].iter().sum();
                total += c;
                hits += u64::from(c > 0);
                uncertain += o.uncertain;
            }
            Ok(HitEstimate {
                window: *w,
                samples,
                hits,
                fraction: hits as f64 / samples as f64,
                ci: wilson_interval(hits, samples),
                mean_solutions: total as f64 / samples as f64,
                uncertain,
            })
        })
        .collect()
}

/// Fraction of `samples` uniform matrices with a solution of height in `window`.
pub fn estimate_hit_fraction(
    spec: &ProblemSpec,
    window: HeightWindow,
    samples: u64,
    seed: u64,
    jobs: usize,
    budget: u128,
) -> Result<HitEstimate> {
    Ok(estimate_hit_fractions(spec, &[window], samples, seed, jobs, budget)?.remove(0))
}

/// `Σ_r shell(r) Π_i min(1, 2ψ_i(r))` over the window, with `shell(r)` the number of
/// sign-canonical vectors of height `r`. Bounds the mean solution count per sample.
pub fn first_moment_bound(spec: &ProblemSpec, window: HeightWindow) -> Result<f64> {
    let m = spec.m() as i32;
    let psis = spec.psi().per_form(spec.n())?;
    let mut total = 0.0;
    for r in window.heights() {
        let rf = r as f64;
        let shell = ((2.0 * rf + 1.0).powi(m) - (2.0 * rf - 1.0).powi(m)) / 2.0;
        let mut p = 1.0;
        for f in &psis {
            p *= (2.0 * f.eval(r)?).min(1.0);
        }
        total += shell * p;
    }
    Ok(total)
}
