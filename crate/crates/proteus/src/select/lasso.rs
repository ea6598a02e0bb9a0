//! Lasso by cyclic coordinate descent on the squared loss:
//!
//!   min_b  (1/2n) ||y_c − X b||^2 + lambda ||b||_1
//!
//! with `y_c` the centered ±1 targets (the unpenalized intercept is the
//! label mean, which is exact for column-standardized X). Convergence is
//! declared when no coordinate moves more than 1e-7 in a full sweep.

use ndarray::ArrayView2;

const TOLERANCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 1000;

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Full coefficient vector of the lasso solution (no intercept entry;
/// the intercept is mean(y)).
pub fn lasso_coefficients(x: &ArrayView2<f64>, y: &[f64], lambda: f64) -> Vec<f64> {
    let (n, d) = x.dim();
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut residual: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // per-column mean squares; zero-variance columns never activate
    let col_norm: Vec<f64> = (0..d)
        .map(|j| x.column(j).iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();

    let mut beta = vec![0.0; d];
    for _ in 0..MAX_SWEEPS {
        let mut max_delta: f64 = 0.0;
        for j in 0..d {
            if col_norm[j] <= 0.0 {
                continue;
            }
            let col = x.column(j);
            let mut rho = 0.0;
            for (r, xv) in residual.iter().zip(col.iter()) {
                rho += r * xv;
            }
            rho = rho / nf + beta[j] * col_norm[j];
            let new = soft_threshold(rho, lambda) / col_norm[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (r, xv) in residual.iter_mut().zip(col.iter()) {
                    *r -= delta * xv;
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < TOLERANCE {
            break;
        }
    }
    beta
}

/// The smallest lambda for which every coefficient is zero.
pub fn lambda_max(x: &ArrayView2<f64>, y: &[f64]) -> f64 {
    let (n, d) = x.dim();
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    (0..d)
        .map(|j| {
            x.column(j)
                .iter()
                .zip(y)
                .map(|(xv, yv)| xv * (yv - y_mean))
                .sum::<f64>()
                .abs()
                / nf
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn standardize_columns(x: &mut Array2<f64>) {
        let n = x.nrows() as f64;
        for mut col in x.columns_mut() {
            let mean = col.sum() / n;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                col.mapv_inplace(|v| (v - mean) / sd);
            }
        }
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> (Array2<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        standardize_columns(&mut x);
        let y: Vec<f64> = (0..n)
            .map(|i| if x[[i, 0]] + 0.5 * x[[i, 1]] + 0.3 * rng.sample::<f64, _>(StandardNormal) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        (x, y)
    }

    #[test]
    fn perfect_predictor_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100;
        let mut x = Array2::from_shape_fn((n, 4), |_| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        for i in 0..n {
            x[[i, 2]] = y[i]; // column 2 equals the target
        }
        standardize_columns(&mut x);
        let beta = lasso_coefficients(&x.view(), &y, 0.01);
        let best = beta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(best, 2);
        assert!(beta[2].abs() > 0.5);
    }

    #[test]
    fn lambda_max_kills_all_coefficients() {
        let (x, y) = random_problem(7, 80, 10);
        let lmax = lambda_max(&x.view(), &y);
        let beta = lasso_coefficients(&x.view(), &y, lmax * 1.0001);
        assert!(beta.iter().all(|&b| b == 0.0), "{beta:?}");
        // just below lambda_max something activates
        let beta = lasso_coefficients(&x.view(), &y, lmax * 0.99);
        assert!(beta.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn kkt_conditions_hold_at_convergence() {
        let (x, y) = random_problem(11, 120, 15);
        let lambda = 0.05;
        let beta = lasso_coefficients(&x.view(), &y, lambda);
        let n = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / n;
        // residual of the fitted model including the intercept
        let resid: Vec<f64> = (0..y.len())
            .map(|i| {
                let pred: f64 = (0..15).map(|j| x[[i, j]] * beta[j]).sum();
                y[i] - y_mean - pred
            })
            .collect();
        for j in 0..15 {
            let grad = x
                .column(j)
                .iter()
                .zip(&resid)
                .map(|(xv, r)| xv * r)
                .sum::<f64>()
                / n;
            if beta[j] == 0.0 {
                assert!(grad.abs() <= lambda + 1e-5, "KKT violated at {j}: {grad}");
            } else {
                assert!(
                    (grad - lambda * beta[j].signum()).abs() <= 1e-5,
                    "active KKT violated at {j}: {grad} vs beta {}",
                    beta[j]
                );
            }
        }
    }
}
