//! Linear max-margin classifier trained by full-batch subgradient
//! descent on the L2-regularized hinge loss
//!
//!   F(w, b) = (C/2) ||w||^2 + (1/n) sum max(0, 1 − y_i (w·x_i + b))
//!
//! with step size 1/(C·t) at epoch t and a fixed epoch budget. The model
//! keeps the averaged iterate, whose objective is monitored to be
//! non-increasing. Scores are the margin squashed through the logistic
//! function, so they live in [0, 1] with 0.5 at the decision boundary.

use ndarray::ArrayView2;

const EPOCHS: usize = 200;

#[derive(Debug, Clone)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective of the averaged iterate after each epoch.
    pub objective_trace: Vec<f64>,
}

fn objective(x: &ArrayView2<f64>, targets: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let n = targets.len() as f64;
    let reg = 0.5 * c * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = (0..targets.len())
        .map(|i| {
            let margin: f64 = x.row(i).iter().zip(w).map(|(xv, wv)| xv * wv).sum::<f64>() + b;
            (1.0 - targets[i] * margin).max(0.0)
        })
        .sum();
    reg + hinge / n
}

impl SvmModel {
    pub fn fit(x: &ArrayView2<f64>, y: &[u8], c: f64) -> SvmModel {
        let (n, d) = x.dim();
        let nf = n as f64;
        let targets: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut w_avg = vec![0.0; d];
        let mut b_avg = 0.0;
        let mut trace = Vec::with_capacity(EPOCHS);

        for t in 1..=EPOCHS {
            // full-batch subgradient of the objective
            let mut grad_w: Vec<f64> = w.iter().map(|v| c * v).collect();
            let mut grad_b = 0.0;
            for i in 0..n {
                let margin: f64 =
                    x.row(i).iter().zip(&w).map(|(xv, wv)| xv * wv).sum::<f64>() + b;
                if targets[i] * margin < 1.0 {
                    for (g, xv) in grad_w.iter_mut().zip(x.row(i)) {
                        *g -= targets[i] * xv / nf;
                    }
                    grad_b -= targets[i] / nf;
                }
            }
            let step = 1.0 / (c * t as f64);
            for (wv, g) in w.iter_mut().zip(&grad_w) {
                *wv -= step * g;
            }
            b -= step * grad_b;

            // running average of iterates
            let tf = t as f64;
            for (a, wv) in w_avg.iter_mut().zip(&w) {
                *a += (wv - *a) / tf;
            }
            b_avg += (b - b_avg) / tf;
            trace.push(objective(x, &targets, &w_avg, b_avg, c));
        }

        SvmModel {
            weights: w_avg,
            bias: b_avg,
            objective_trace: trace,
        }
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.margin(x)).exp())
    }
}
