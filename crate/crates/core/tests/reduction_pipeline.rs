use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smallforms::domain::ApproxFunction;
use smallforms::forms::{EngineConfig, HeightWindow};
use smallforms::linalg::{Matrix, RealMatrix};
use smallforms::reduction::{
    column_dependence_witness, decompose, eta_embed, eta_lipschitz_constant, eta_lipschitz_ratio,
    transport_solutions, verify_certificate, Membership,
};
use smallforms::scalar::Scalar;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn membership() -> Membership {
    Membership::new(Scalar::Exact(rat(1, 10)), Scalar::from_int(2)).unwrap()
}

fn random_unit_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let q = rng.random_range(1..=20i64);
    rat(rng.random_range(0..=q), q)
}

/// Rejection-sample a rational `m × n` matrix in the unit cube that lies in `A_{0.1,2}`.
fn random_restricted(rng: &mut ChaCha8Rng, m: usize, n: usize) -> RealMatrix {
    loop {
        let rows: Vec<Vec<BigRational>> = (0..m)
            .map(|_| (0..n).map(|_| random_unit_rational(rng)).collect())
            .collect();
        let x = RealMatrix::Exact(Matrix::from_rows(rows).unwrap());
        if decompose(&x, &membership()).is_ok() {
            return x;
        }
    }
}

fn sup_abs(v: &[Scalar]) -> BigRational {
    v.iter()
        .map(|s| s.to_rational().unwrap().abs())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

#[test]
fn pipeline_certificates_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let psi = ApproxFunction::power_exact(rat(1, 1), 1).unwrap();
    let mut lifted = 0;
    let mut monotone_checked = 0;
    for k in 0..240 {
        let m = [3, 4][k % 2];
        let n = [1, 2][(k / 2) % 2];
        let x = random_restricted(&mut rng, m, n);
        let rx = decompose(&x, &membership()).unwrap();
        assert_eq!(rx.reconstruct().unwrap(), x);
        let q_max = if m - n == 3 { 6 } else { 12 };
        let rep = transport_solutions(
            &rx,
            &psi,
            HeightWindow::new(1, q_max).unwrap(),
            &EngineConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.certificates.len(), rep.classical.solutions.len());
        for cert in &rep.certificates {
            let check = verify_certificate(cert).unwrap();
            let bound = cert.bound.to_rational().unwrap();
            assert!(sup_abs(&cert.form_values) <= bound);
            assert_eq!(cert.bound, Scalar::Exact(rat(1, cert.r.height() as i64)));
            // non-increasing psi with |p| <= |r| keeps |q| = |r|
            let p_height = cert.p.height();
            if p_height <= cert.r.height() {
                assert!(check.strict_at_q.is_some());
                assert!(sup_abs(&cert.form_values) <= cert.psi_at_q.as_ref().unwrap().to_rational().unwrap());
                monotone_checked += 1;
            }
            let json = serde_json::to_string(cert).unwrap();
            let back = serde_json::from_str(&json).unwrap();
            assert_eq!(cert, &back);
            lifted += 1;
        }
    }
    assert!(lifted > 100, "only {lifted} certificates");
    assert!(monotone_checked > 0);
}

#[test]
fn eta_decompose_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..200 {
        let n = 1 + k % 2;
        let m = n + 1 + (k / 2) % 2;
        let x = random_restricted(&mut rng, m, n);
        let rx = decompose(&x, &membership()).unwrap();
        let hat_mod = rx.hat_mod_one().unwrap();
        assert!(hat_mod.is_exact());
        let back = eta_embed(&rx.hat(), &rx.top(), &membership()).unwrap();
        assert_eq!(back, x);

        let y: Vec<Vec<BigRational>> = (0..m - n)
            .map(|_| (0..n).map(|_| random_unit_rational(&mut rng)).collect())
            .collect();
        let y = RealMatrix::Exact(Matrix::from_rows(y).unwrap());
        let embedded = eta_embed(&y, &rx.top(), &membership()).unwrap();
        let again = decompose(&embedded, &membership()).unwrap();
        assert_eq!(again.hat(), y);
        assert_eq!(again.top(), rx.top());
    }
}

#[test]
fn eta_ratio_bounded_by_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = Membership::new(Scalar::Float(0.1), Scalar::Float(2.0)).unwrap();
    let n = 2;
    let l = eta_lipschitz_constant(n, 2.0);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < 1000 {
        let xt: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let jitter = |v: f64, lo: f64, hi: f64, rng: &mut ChaCha8Rng| (v + rng.random_range(-1e-3..1e-3)).clamp(lo, hi);
        let xt2: Vec<Vec<f64>> = xt.iter().map(|r| r.iter().map(|&v| jitter(v, -2.0, 2.0, &mut rng)).collect()).collect();
        let y2: Vec<Vec<f64>> = y.iter().map(|r| r.iter().map(|&v| jitter(v, 0.0, 1.0, &mut rng)).collect()).collect();
        let f = |m: Vec<Vec<f64>>| RealMatrix::Float(Matrix::from_rows(m).unwrap());
        let (xa, ya, xb, yb) = (f(xt), f(y), f(xt2), f(y2));
        let Ok(ratio) = eta_lipschitz_ratio((&ya, &xa), (&yb, &xb), &params) else {
            continue;
        };
        worst = worst.max(ratio);
        samples += 1;
    }
    assert!(worst <= l, "observed {worst} > {l}");
}

#[test]
fn float_rank_agrees_with_exact_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..100 {
        let (m, n) = [(2, 2), (3, 3), (3, 4), (2, 3)][k % 4];
        let mut rows: Vec<Vec<BigRational>> = (0..m)
            .map(|_| (0..n).map(|_| random_unit_rational(&mut rng)).collect())
            .collect();
        if k % 3 == 0 {
            // force a row dependence: last row = half of the first
            rows[m - 1] = rows[0].iter().map(|v| v / BigRational::from_integer(BigInt::from(2))).collect();
        }
        let exact = RealMatrix::Exact(Matrix::from_rows(rows).unwrap());
        let float = RealMatrix::Float(exact.to_f64());
        let we = column_dependence_witness(&exact, 0.0).unwrap();
        let wf = column_dependence_witness(&float, 1e-9).unwrap();
        assert_eq!(we.rank, wf.rank, "case {k}");
        assert_eq!(we.row.is_some(), wf.row.is_some());
        assert_eq!(we.column.is_some(), wf.column.is_some());
        if let Some(c) = &we.column {
            let Scalar::Exact(_) = c[0] else { panic!() };
            let cv: Vec<BigRational> = c.iter().map(|s| s.to_rational().unwrap()).collect();
            let RealMatrix::Exact(a) = &exact else { unreachable!() };
            assert!(a.right_mul_vec(&cv).unwrap().iter().all(|v| v.is_zero()));
        }
    }
}
