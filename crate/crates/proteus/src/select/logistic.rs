//! Logistic regression by damped Newton iterations, used as the engine
//! behind the conditional-independence tests of the forward-backward
//! selector. Fits carry their deviance so nested models can be compared
//! with a likelihood-ratio test.

use ndarray::ArrayView2;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const RIDGE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone)]
pub struct LogisticFit {
    /// Intercept first, then one coefficient per column.
    #[allow(dead_code)] // exercised by tests; the selector only needs deviance
    pub coefficients: Vec<f64>,
    /// Unpenalized deviance −2·log-likelihood at the fitted coefficients.
    pub deviance: f64,
}

/// log(1 + e^eta), computed without overflow.
fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// Solve `a x = b` for a small symmetric positive-definite system via
/// Cholesky. `a` is row-major p×p.
fn solve_spd(a: &mut [f64], b: &mut [f64], p: usize) -> bool {
    // in-place Cholesky a = L L^T
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i * p + j];
            for k in 0..j {
                sum -= a[i * p + k] * a[j * p + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                a[i * p + i] = sum.sqrt();
            } else {
                a[i * p + j] = sum / a[j * p + j];
            }
        }
    }
    // forward substitution L y = b
    for i in 0..p {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i * p + k] * b[k];
        }
        b[i] = sum / a[i * p + i];
    }
    // back substitution L^T x = y
    for i in (0..p).rev() {
        let mut sum = b[i];
        for k in i + 1..p {
            sum -= a[k * p + i] * b[k];
        }
        b[i] = sum / a[i * p + i];
    }
    true
}

/// Fit the logistic model of `y` on the given columns of `x` plus an
/// intercept. Damping halves the Newton step until the penalized
/// objective stops worsening, so separation and collinearity terminate
/// gracefully instead of diverging.
pub fn fit_logistic(x: &ArrayView2<f64>, columns: &[usize], y: &[u8]) -> LogisticFit {
    let n = y.len();
    let p = columns.len() + 1;
    // design matrix rows: [1, x_c1, x_c2, ...]
    let design: Vec<f64> = (0..n)
        .flat_map(|i| {
            std::iter::once(1.0).chain(columns.iter().map(move |&j| x[[i, j]]))
        })
        .collect();

    let deviance_of = |beta: &[f64], etas: &mut Vec<f64>| -> f64 {
        etas.clear();
        let mut dev = 0.0;
        for i in 0..n {
            let eta: f64 = design[i * p..(i + 1) * p]
                .iter()
                .zip(beta)
                .map(|(d, b)| d * b)
                .sum();
            etas.push(eta);
            dev += 2.0 * (softplus(eta) - f64::from(y[i]) * eta);
        }
        dev
    };
    let penalty = |beta: &[f64]| RIDGE * beta.iter().map(|b| b * b).sum::<f64>();

    let mut beta = vec![0.0; p];
    let mut etas = Vec::with_capacity(n);
    let mut dev = deviance_of(&beta, &mut etas);
    let mut objective = dev + penalty(&beta);

    for _ in 0..MAX_ITERATIONS {
        // gradient of the penalized deviance (up to the factor −2) and
        // the Fisher information
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        for i in 0..n {
            let mu = sigmoid(etas[i]);
            let w = (mu * (1.0 - mu)).max(1e-10);
            let resid = f64::from(y[i]) - mu;
            let row = &design[i * p..(i + 1) * p];
            for a in 0..p {
                grad[a] += row[a] * resid;
                for b in 0..=a {
                    hess[a * p + b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            grad[a] -= RIDGE * beta[a];
            for b in 0..a {
                hess[b * p + a] = hess[a * p + b];
            }
            hess[a * p + a] += RIDGE;
        }

        let mut step = grad.clone();
        if !solve_spd(&mut hess, &mut step, p) {
            break;
        }

        // damped line search on the penalized objective
        let mut scale = 1.0;
        let mut improved = false;
        let mut trial_etas = Vec::with_capacity(n);
        for _ in 0..40 {
            let trial: Vec<f64> = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| b + scale * s)
                .collect();
            let trial_dev = deviance_of(&trial, &mut trial_etas);
            let trial_obj = trial_dev + penalty(&trial);
            if trial_obj <= objective + 1e-12 {
                let delta = objective - trial_obj;
                beta = trial;
                dev = trial_dev;
                objective = trial_obj;
                std::mem::swap(&mut etas, &mut trial_etas);
                improved = delta > 1e-10;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }

    LogisticFit {
        coefficients: beta,
        deviance: dev,
    }
}

/// p-value of the likelihood-ratio test between two nested fits whose
/// dimensionality differs by one (deviance difference ~ chi-squared(1)).
pub fn lrt_pvalue(deviance_small: f64, deviance_large: f64) -> f64 {
    let stat = (deviance_small - deviance_large).max(0.0);
    let chi2 = ChiSquared::new(1.0).expect("dof 1 is valid");
    1.0 - chi2.cdf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn null_model_deviance_is_binomial_entropy() {
        // intercept-only fit: deviance = -2 [k ln p + (n-k) ln(1-p)]
        let x = Array2::<f64>::zeros((10, 1));
        let y = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let fit = fit_logistic(&x.view(), &[], &y);
        let p: f64 = 0.3;
        let expected = -2.0 * (3.0 * p.ln() + 7.0 * (1.0 - p).ln());
        assert_abs_diff_eq!(fit.deviance, expected, epsilon = 1e-6);
        assert_abs_diff_eq!(
            fit.coefficients[0],
            (p / (1.0 - p)).ln(),
            epsilon = 1e-4
        );
    }

    #[test]
    fn informative_feature_shrinks_deviance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200;
        let mut values = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let signal: f64 = rng.sample(StandardNormal);
            let noise: f64 = rng.sample(StandardNormal);
            values.push(signal);
            values.push(noise);
            y.push(u8::from(signal + 0.3 * rng.sample::<f64, _>(StandardNormal) > 0.0));
        }
        let x = Array2::from_shape_vec((n, 2), values).unwrap();
        let null = fit_logistic(&x.view(), &[], &y);
        let with_signal = fit_logistic(&x.view(), &[0], &y);
        let with_noise = fit_logistic(&x.view(), &[1], &y);
        assert!(lrt_pvalue(null.deviance, with_signal.deviance) < 1e-10);
        assert!(lrt_pvalue(null.deviance, with_noise.deviance) > 0.01);
    }

    #[test]
    fn separable_data_terminates_with_tiny_deviance() {
        let n = 40;
        let values: Vec<f64> = (0..n).map(|i| i as f64 - 20.0).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(i >= 20)).collect();
        let x = Array2::from_shape_vec((n, 1), values).unwrap();
        let fit = fit_logistic(&x.view(), &[0], &y);
        assert!(fit.deviance < 1.0, "deviance {}", fit.deviance);
        assert!(fit.coefficients.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn lrt_pvalue_bounds() {
        assert_abs_diff_eq!(lrt_pvalue(10.0, 10.0), 1.0, epsilon = 1e-12);
        assert!(lrt_pvalue(10.0, 12.0) == 1.0); // clamped negative statistic
        let p = lrt_pvalue(14.0, 10.0); // stat 4, chi2(1): ~0.0455
        assert_abs_diff_eq!(p, 0.0455, epsilon = 1e-3);
    }
}
