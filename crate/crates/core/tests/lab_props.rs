use proptest::prelude::*;

use smallforms::criteria::Classification;
use smallforms::domain::{ApproxFunction, IntegerVector, ProblemSpec, Variant};
use smallforms::forms::HeightWindow;
use smallforms::lab::{
    box_count_dimension, estimate_hit_fractions, first_moment_bound, load_run, persist_run,
    slab_box_count, slab_volume, zero_one_verdict, Agreement, BoxCountPlan, ExperimentPlan,
    SlabSelection, DEFAULT_BUDGET,
};
use smallforms::Error;

fn spec(m: usize, n: usize, variant: Variant, c: f64, tau: f64) -> ProblemSpec {
    ProblemSpec::new(m, n, variant, ApproxFunction::power_log(c, tau, 0.0).unwrap()).unwrap()
}

#[test]
fn parallel_runs_match_serial() {
    let plan = ExperimentPlan::measure_trend(spec(3, 1, Variant::Absolute, 1.0, 1.5), 99, 1, &[5, 10, 20], 60).unwrap();
    let a = zero_one_verdict(&plan, 1).unwrap();
    let b = zero_one_verdict(&plan, 4).unwrap();
    assert!(a.same_numerics(&b));
    assert_eq!(a.prediction, Classification::Divergent);
}

#[test]
fn record_round_trips_and_reruns() {
    let plan = ExperimentPlan::measure_trend(spec(2, 1, Variant::Classical, 1.0, 1.0), 5, 1, &[10, 40], 40).unwrap();
    let rec = zero_one_verdict(&plan, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    persist_run(&rec, &path).unwrap();
    let back = load_run(&path).unwrap();
    assert_eq!(back, rec);
    let again = zero_one_verdict(&back.plan, 2).unwrap();
    assert!(again.same_numerics(&rec));
}

#[test]
fn missing_seed_is_named() {
    let plan = ExperimentPlan::measure_trend(spec(2, 1, Variant::Classical, 1.0, 1.0), 5, 1, &[10], 4).unwrap();
    let rec = zero_one_verdict(&plan, 1).unwrap();
    let mut json: serde_json::Value = serde_json::to_value(&rec).unwrap();
    json["plan"].as_object_mut().unwrap().remove("seed");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&json).unwrap()).unwrap();
    let Err(Error::Parse(msg)) = load_run(&path) else { panic!("expected parse error") };
    assert!(msg.contains("seed") && msg.contains("line"), "{msg}");
}

#[test]
fn malformed_record_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"schema_version\": 1,\n  oops\n}").unwrap();
    let Err(Error::Parse(msg)) = load_run(&path) else { panic!() };
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn boundary_series_not_applicable() {
    // m = 3, n = 1, psi = r^-2 (ln(r+1))^-1 sits on the boundary
    let psi = ApproxFunction::power_log(1.0, 2.0, 1.0).unwrap();
    let s = ProblemSpec::new(3, 1, Variant::Absolute, psi).unwrap();
    let plan = ExperimentPlan::measure_trend(s, 1, 1, &[5, 10], 8).unwrap();
    let rec = zero_one_verdict(&plan, 1).unwrap();
    assert_eq!(rec.prediction, Classification::Boundary);
    assert_eq!(rec.agreement, Agreement::NotApplicable);
}

#[test]
fn convergent_mean_below_first_moment() {
    let s = spec(3, 1, Variant::Absolute, 0.5, 3.0);
    let w = HeightWindow::new(5, 30).unwrap();
    let est = estimate_hit_fractions(&s, &[w], 300, 17, 1, DEFAULT_BUDGET).unwrap();
    let bound = first_moment_bound(&s, w).unwrap();
    assert!(est[0].mean_solutions <= 3.0 * bound, "{} vs {bound}", est[0].mean_solutions);
}

#[test]
fn classical_mean_tracks_first_moment() {
    // for the classical variant the bound is the exact expectation
    let s = spec(2, 1, Variant::Classical, 0.2, 1.0);
    let w = HeightWindow::new(3, 30).unwrap();
    let est = estimate_hit_fractions(&s, &[w], 400, 23, 1, DEFAULT_BUDGET).unwrap();
    let bound = first_moment_bound(&s, w).unwrap();
    let ratio = est[0].mean_solutions / bound;
    assert!((0.8..1.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn box_plan_needs_three_resolutions() {
    let s = spec(3, 1, Variant::Absolute, 1.0, 4.0);
    let mut plan = BoxCountPlan::dyadic(4, 5, DEFAULT_BUDGET);
    assert!(matches!(box_count_dimension(&s, &plan), Err(Error::InvalidPlan(_))));
    plan.resolutions = vec![16, 8, 32];
    assert!(matches!(box_count_dimension(&s, &plan), Err(Error::InvalidPlan(_))));
}

#[test]
fn single_slab_counts_sandwich_volume() {
    let s = spec(3, 1, Variant::Absolute, 1.0, 2.0);
    for q in [vec![1i64, 0, 0], vec![2, -1, 1], vec![3, 2, -2]] {
        let iv = IntegerVector::new(q.clone());
        let psi = s.psi().eval(iv.height()).unwrap();
        let plan = BoxCountPlan {
            resolutions: vec![8, 16, 32, 64, 128],
            selection: SlabSelection::Single { q: iv },
            union: true,
            budget: DEFAULT_BUDGET,
        };
        let est = box_count_dimension(&s, &plan).unwrap();
        let l1: f64 = q.iter().map(|v| v.abs() as f64).sum();
        let mut prev_volume = f64::INFINITY;
        for p in &est.points {
            assert_eq!(p.union, Some(p.cover));
            let covered = p.cover as f64 * p.delta.powi(3);
            assert!(covered >= slab_volume(&q, psi) - 1e-12);
            assert!(covered <= slab_volume(&q, psi + p.delta * l1) + 1e-12);
            assert!(covered <= prev_volume + 1e-12);
            prev_volume = covered;
        }
        // the excess over the slab volume shrinks with the grid
        let excess = |p: &smallforms::lab::BoxCountPoint| p.cover as f64 * p.delta.powi(3) - slab_volume(&q, psi);
        let (first, last) = (&est.points[0], est.points.last().unwrap());
        assert!(excess(last) <= 0.25 * excess(first) + 1e-12, "{q:?}");
    }
}

#[test]
fn union_never_exceeds_cover() {
    let s = spec(3, 1, Variant::Absolute, 1.0, 3.0);
    let plan = BoxCountPlan {
        resolutions: vec![8, 16, 32],
        selection: SlabSelection::HeightCap { q_max: vec![2, 3, 4] },
        union: true,
        budget: DEFAULT_BUDGET,
    };
    let est = box_count_dimension(&s, &plan).unwrap();
    for p in &est.points {
        let u = p.union.unwrap();
        assert!(u <= p.cover && u <= 32u64.pow(3));
    }
}

#[test]
fn two_column_cover_is_product() {
    let s = spec(3, 2, Variant::Absolute, 1.0, 2.0);
    let q = vec![1i64, -2, 1];
    let plan = BoxCountPlan {
        resolutions: vec![4, 8, 16],
        selection: SlabSelection::Single { q: IntegerVector::new(q.clone()) },
        union: true,
        budget: DEFAULT_BUDGET,
    };
    let est = box_count_dimension(&s, &plan).unwrap();
    for p in &est.points {
        let one = slab_box_count(&q, 0.25, p.resolution);
        assert_eq!(p.cover, one * one);
        assert_eq!(p.union, Some(p.cover));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn truncation_is_monotone(seed in any::<u64>(), tau in 0.5f64..3.0) {
        let s = spec(3, 1, Variant::Absolute, 1.0, tau);
        let ws: Vec<HeightWindow> = [3u64, 6, 12].iter().map(|&q| HeightWindow::new(1, q).unwrap()).collect();
        let est = estimate_hit_fractions(&s, &ws, 24, seed, 1, DEFAULT_BUDGET).unwrap();
        for w in est.windows(2) {
            prop_assert!(w[0].fraction <= w[1].fraction);
            prop_assert!(w[0].mean_solutions <= w[1].mean_solutions);
        }
        for e in &est {
            prop_assert!((0.0..=1.0).contains(&e.fraction));
            prop_assert!(e.ci.low <= e.fraction && e.fraction <= e.ci.high);
        }
    }

    #[test]
    fn partitioning_does_not_change_counts(seed in any::<u64>(), jobs in 2usize..6) {
        let s = spec(3, 1, Variant::Absolute, 1.0, 2.0);
        let ws = [HeightWindow::new(1, 8).unwrap()];
        let a = estimate_hit_fractions(&s, &ws, 40, seed, 1, DEFAULT_BUDGET).unwrap();
        let b = estimate_hit_fractions(&s, &ws, 40, seed, jobs, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(a, b);
    }
}
