//! Forward-Backward selection with Early Dropping.
//!
//! Forward phase: repeatedly add the candidate with the smallest
//! conditional-independence p-value below alpha given the current set,
//! dropping every candidate at or above alpha for the rest of the run.
//! The forward phase reruns over previously dropped features `k_runs`
//! extra times. The backward phase then removes members whose p-value
//! given the rest has risen to alpha or above. Conditional independence
//! is tested with a likelihood-ratio test between nested logistic fits.

use ndarray::ArrayView2;

use super::logistic::{fit_logistic, lrt_pvalue};

// Forward additions are capped well above the selection cap purely as a
// runaway guard; alpha-level noise keeps realistic selections far below it.
const MAX_FORWARD: usize = 30;

#[derive(Debug, Clone)]
pub struct FbedSelection {
    /// Selected feature indices with their final deviance-difference
    /// statistic, sorted descending by statistic.
    pub ranked: Vec<(usize, f64)>,
}

pub fn fbed_select(x: &ArrayView2<f64>, y: &[u8], alpha: f64, k_runs: usize) -> FbedSelection {
    let d = x.ncols();
    let mut selected: Vec<usize> = Vec::new();
    let mut current_deviance = fit_logistic(x, &[], y).deviance;

    for _run in 0..=k_runs {
        let mut candidates: Vec<usize> = (0..d).filter(|j| !selected.contains(j)).collect();
        let mut added_this_run = false;
        loop {
            let mut best: Option<(usize, f64, f64)> = None; // (feature, pvalue, deviance)
            let mut kept = Vec::with_capacity(candidates.len());
            for &j in &candidates {
                let mut cols = selected.clone();
                cols.push(j);
                let fit = fit_logistic(x, &cols, y);
                let p = lrt_pvalue(current_deviance, fit.deviance);
                if p < alpha {
                    kept.push(j);
                    let better = match best {
                        None => true,
                        Some((_, bp, _)) => p < bp,
                    };
                    if better {
                        best = Some((j, p, fit.deviance));
                    }
                }
                // p >= alpha: early-dropped for the rest of this run
            }
            match best {
                Some((j, _, dev)) if selected.len() < MAX_FORWARD => {
                    selected.push(j);
                    current_deviance = dev;
                    added_this_run = true;
                    kept.retain(|&c| c != j);
                    candidates = kept;
                }
                _ => break,
            }
        }
        if !added_this_run {
            break;
        }
    }

    // backward phase: drop the weakest member while any p-value >= alpha
    loop {
        if selected.is_empty() {
            break;
        }
        let mut worst: Option<(usize, f64)> = None; // (position, pvalue)
        for (pos, _) in selected.iter().enumerate() {
            let reduced: Vec<usize> = selected
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != pos)
                .map(|(_, &f)| f)
                .collect();
            let fit = fit_logistic(x, &reduced, y);
            let p = lrt_pvalue(fit.deviance, current_deviance);
            if p >= alpha {
                let is_worse = match worst {
                    None => true,
                    Some((_, wp)) => p > wp,
                };
                if is_worse {
                    worst = Some((pos, p));
                }
            }
        }
        match worst {
            Some((pos, _)) => {
                selected.remove(pos);
                current_deviance = fit_logistic(x, &selected, y).deviance;
            }
            None => break,
        }
    }

    // rank by the deviance increase caused by removing each feature
    let mut ranked: Vec<(usize, f64)> = selected
        .iter()
        .map(|&f| {
            let reduced: Vec<usize> = selected.iter().copied().filter(|&g| g != f).collect();
            let fit = fit_logistic(x, &reduced, y);
            (f, (fit.deviance - current_deviance).max(0.0))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    FbedSelection { ranked }
}
