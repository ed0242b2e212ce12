//! `fit_ols` against a normal-equations solver written from scratch, plus
//! the algebraic identities every least-squares fit must satisfy.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use statrs::distribution::{ContinuousCDF, StudentsT};
use xshuffle_core::stats::{fit_ols, DesignMatrix, StatsError};

/// Solves `a · x = b` for every column of `b` by Gauss–Jordan elimination
/// with partial pivoting.
fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for v in b[col].iter_mut() {
            *v /= d;
        }
        for row in 0..k {
            if row != col {
                let f = a[row][col];
                for c in 0..k {
                    a[row][c] -= f * a[col][c];
                }
                for c in 0..b[row].len() {
                    b[row][c] -= f * b[col][c];
                }
            }
        }
    }
    b
}

struct Oracle {
    beta: Vec<f64>,
    se: Vec<f64>,
    ssr: f64,
    r_squared: f64,
}

fn oracle(x: &[Vec<f64>], y: &[f64]) -> Oracle {
    let (n, k) = (x.len(), x[0].len());
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| (0..n).map(|r| x[r][i] * x[r][j]).sum()).collect())
        .collect();
    let mut rhs: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row = vec![0.0; k + 1];
            row[i] = 1.0;
            row[k] = (0..n).map(|r| x[r][i] * y[r]).sum();
            row
        })
        .collect();
    rhs = gauss_jordan(xtx, rhs);
    let beta: Vec<f64> = rhs.iter().map(|row| row[k]).collect();
    let resid: Vec<f64> = (0..n)
        .map(|r| y[r] - (0..k).map(|j| x[r][j] * beta[j]).sum::<f64>())
        .collect();
    let ssr: f64 = resid.iter().map(|e| e * e).sum();
    let sigma2 = ssr / (n - k) as f64;
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    Oracle {
        se: (0..k).map(|j| (sigma2 * rhs[j][j]).sqrt()).collect(),
        beta,
        ssr,
        r_squared: 1.0 - ssr / tss,
    }
}

fn to_design(x: &[Vec<f64>]) -> DesignMatrix {
    let (n, k) = (x.len(), x[0].len());
    let names = (0..k).map(|j| format!("c{j}")).collect();
    DesignMatrix::new(DMatrix::from_fn(n, k, |i, j| x[i][j]), names).unwrap()
}

/// Intercept plus `k − 1` continuous or dummy regressors, noisy response.
fn random_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Uniform::new_inclusive(12usize, 200).unwrap().sample(&mut rng);
    let k = Uniform::new_inclusive(2usize, 8).unwrap().sample(&mut rng);
    let coin = Uniform::new(0.0f64, 1.0).unwrap();
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..k)
                .map(|j| match j {
                    0 => 1.0,
                    j if j % 2 == 0 => (coin.sample(&mut rng) < 0.4) as u8 as f64,
                    _ => 3.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng),
                })
                .collect()
        })
        .collect();
    let y = x
        .iter()
        .map(|row| {
            row.iter().enumerate().map(|(j, v)| (j as f64 - 1.5) * v).sum::<f64>()
                + Distribution::<f64>::sample(&StandardNormal, &mut rng)
        })
        .collect();
    (x, y)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn matches_normal_equations_on_random_designs() {
    let mut fitted = 0;
    for seed in 0..50 {
        let (x, y) = random_instance(seed);
        let design = to_design(&x);
        let rep = match fit_ols(&DVector::from_vec(y.clone()), &design) {
            Ok(r) => r,
            // an all-zero dummy column can be drawn for small n
            Err(StatsError::Design(_)) => continue,
            Err(e) => panic!("seed {seed}: {e}"),
        };
        let o = oracle(&x, &y);
        for j in 0..x[0].len() {
            assert!(rel_close(rep.coefficients[j].estimate, o.beta[j], 1e-8), "seed {seed} beta[{j}]");
            assert!(rel_close(rep.coefficients[j].std_error, o.se[j], 1e-8), "seed {seed} se[{j}]");
        }
        assert!(rel_close(rep.ssr, o.ssr, 1e-8), "seed {seed} ssr");
        assert!(rel_close(rep.r_squared, o.r_squared, 1e-8), "seed {seed} r2");
        fitted += 1;
    }
    assert!(fitted >= 45, "only {fitted} usable instances");
}

#[test]
fn group_means_for_dummy_coding() {
    // intercept = mean of group 0, dummy j = mean(group j) − mean(group 0)
    let groups: [&[f64]; 3] = [&[1.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 0.0, 1.0], &[1.0, 1.0, 1.0]];
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (g, vals) in groups.iter().enumerate() {
        for &v in vals.iter() {
            x.push(vec![1.0, (g == 1) as u8 as f64, (g == 2) as u8 as f64]);
            y.push(v);
        }
    }
    let rep = fit_ols(&DVector::from_vec(y), &to_design(&x)).unwrap();
    let est = rep.estimates();
    assert!((est[0] - 0.75).abs() < 1e-12);
    assert!((est[1] - (0.4 - 0.75)).abs() < 1e-12);
    assert!((est[2] - 0.25).abs() < 1e-12);
}

#[test]
fn singular_design_is_reported() {
    let x: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let d = (i % 2) as f64;
            vec![1.0, d, 1.0 - d]
        })
        .collect();
    let y = DVector::from_fn(10, |i, _| i as f64);
    match fit_ols(&y, &to_design(&x)) {
        Err(StatsError::Singular(cols)) => assert_eq!(cols, vec!["c2".to_string()]),
        other => panic!("expected a singular-design error, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_orthogonal_to_columns(seed in 0u64..10_000) {
        let (x, y) = random_instance(seed);
        let design = to_design(&x);
        if let Ok(rep) = fit_ols(&DVector::from_vec(y.clone()), &design) {
            let scale: f64 = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for j in 0..x[0].len() {
                let dot: f64 = x.iter().zip(&rep.residuals).map(|(row, r)| row[j] * r).sum();
                prop_assert!(dot.abs() < 1e-9 * scale * x.len() as f64, "column {} dot {}", j, dot);
            }
        }
    }

    #[test]
    fn scaling_response_scales_estimates(seed in 0u64..10_000) {
        let c = 7.3;
        let (x, y) = random_instance(seed);
        let design = to_design(&x);
        let base = fit_ols(&DVector::from_vec(y.clone()), &design);
        let scaled = fit_ols(&DVector::from_vec(y.iter().map(|v| c * v).collect()), &design);
        if let (Ok(a), Ok(b)) = (base, scaled) {
            for (ca, cb) in a.coefficients.iter().zip(&b.coefficients) {
                prop_assert!(rel_close(cb.estimate, c * ca.estimate, 1e-9));
                prop_assert!(rel_close(cb.std_error, c * ca.std_error, 1e-9));
                prop_assert!(rel_close(cb.t, ca.t, 1e-8));
            }
            prop_assert!(rel_close(a.r_squared, b.r_squared, 1e-9));
        }
    }

    #[test]
    fn report_arithmetic_identities(seed in 0u64..10_000) {
        let (x, y) = random_instance(seed);
        if let Ok(rep) = fit_ols(&DVector::from_vec(y), &to_design(&x)) {
            let (n, k) = (rep.n as f64, rep.k as f64);
            prop_assert_eq!(rep.df_resid + rep.df_model + 1, rep.n);
            prop_assert!((rep.aic - (2.0 * k - 2.0 * rep.log_likelihood)).abs() < 1e-9);
            prop_assert!((rep.bic - (k * n.ln() - 2.0 * rep.log_likelihood)).abs() < 1e-9);
            let t_crit = StudentsT::new(0.0, 1.0, rep.df_resid as f64).unwrap().inverse_cdf(0.975);
            for c in &rep.coefficients {
                prop_assert!((c.ci_lower - (c.estimate - t_crit * c.std_error)).abs() < 1e-9);
                prop_assert!((c.ci_upper - (c.estimate + t_crit * c.std_error)).abs() < 1e-9);
                prop_assert!((c.t - c.estimate / c.std_error).abs() < 1e-9 * c.t.abs().max(1.0));
                prop_assert!((0.0..=1.0).contains(&c.p_value));
            }
            let adj = 1.0 - (1.0 - rep.r_squared) * (n - 1.0) / rep.df_resid as f64;
            prop_assert!((rep.adj_r_squared - adj).abs() < 1e-12);
            prop_assert!(rep.condition_number >= 1.0);
        }
    }
}
