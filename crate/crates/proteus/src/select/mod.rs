//! Embedded feature selection producing ranked subsets capped at a
//! human-readable size.

mod fbed;
mod lasso;
mod logistic;

pub use lasso::{lambda_max, lasso_coefficients};

use ndarray::ArrayView2;

use crate::error::{ProteusError, Result};

/// Which selector to run, with its hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectorConfig {
    Lasso { lambda: f64 },
    Fbed { alpha: f64, k_runs: usize },
    Full,
}

impl SelectorConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            SelectorConfig::Lasso { lambda } if !(*lambda > 0.0) => Err(
                ProteusError::InvalidParameter(format!("lasso lambda must be > 0, got {lambda}")),
            ),
            SelectorConfig::Fbed { alpha, .. } if !(*alpha > 0.0 && *alpha < 1.0) => Err(
                ProteusError::InvalidParameter(format!("fbed alpha must be in (0,1), got {alpha}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SelectorConfig::Lasso { lambda } => format!("lasso(lambda={lambda})"),
            SelectorConfig::Fbed { alpha, k_runs } => {
                format!("fbed(alpha={alpha},k_runs={k_runs})")
            }
            SelectorConfig::Full => "full".to_string(),
        }
    }
}

/// An ordered feature subset: indices sorted by selector score
/// descending, at most `cap` of them, each with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
}

impl SelectionResult {
    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    fn from_ranked(mut ranked: Vec<(usize, f64)>, cap: usize) -> SelectionResult {
        ranked.truncate(cap);
        SelectionResult {
            selected: ranked.iter().map(|(f, _)| *f).collect(),
            scores: ranked.iter().map(|(_, s)| *s).collect(),
        }
    }
}

/// Run a selector on standardized features and binary targets. Lasso
/// regresses on ±1 targets with squared loss; FBED tests conditional
/// independence with logistic likelihood-ratio tests; Full passes every
/// feature through uncapped with zero scores.
pub fn run_selector(
    config: &SelectorConfig,
    x: &ArrayView2<f64>,
    y: &[u8],
    cap: usize,
) -> Result<SelectionResult> {
    config.validate()?;
    if cap < 1 {
        return Err(ProteusError::InvalidParameter("cap must be >= 1".into()));
    }
    if x.nrows() != y.len() {
        return Err(ProteusError::InvalidData(
            "selector features/targets length mismatch".into(),
        ));
    }
    match config {
        SelectorConfig::Lasso { lambda } => {
            let targets: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
            let beta = lasso_coefficients(x, &targets, *lambda);
            let mut ranked: Vec<(usize, f64)> = beta
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(j, b)| (j, b.abs()))
                .collect();
            ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            Ok(SelectionResult::from_ranked(ranked, cap))
        }
        SelectorConfig::Fbed { alpha, k_runs } => {
            let sel = fbed::fbed_select(x, y, *alpha, *k_runs);
            Ok(SelectionResult::from_ranked(sel.ranked, cap))
        }
        SelectorConfig::Full => Ok(SelectionResult {
            selected: (0..x.ncols()).collect(),
            scores: vec![0.0; x.ncols()],
        }),
    }
}

/// Top-k features by importance score, descending, ties broken by lower
/// index. Turns the per-feature importances of an explaining detector
/// into a selection.
pub fn select_topk_importance(importances: &[f64], k: usize) -> Result<SelectionResult> {
    if k < 1 {
        return Err(ProteusError::InvalidParameter("k must be >= 1".into()));
    }
    let mut ranked: Vec<(usize, f64)> = importances.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(SelectionResult::from_ranked(ranked, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn standardized(seed: u64, n: usize, d: usize) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        let nf = n as f64;
        for mut col in x.columns_mut() {
            let mean = col.sum() / nf;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf).sqrt();
            col.mapv_inplace(|v| (v - mean) / sd);
        }
        x
    }

    #[test]
    fn full_selector_passes_everything_through() {
        let x = standardized(1, 30, 7);
        let y = vec![0u8; 30];
        let sel = run_selector(&SelectorConfig::Full, &x.view(), &y, 3).unwrap();
        assert_eq!(sel.selected, (0..7).collect::<Vec<_>>());
        assert!(sel.scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn lasso_above_lambda_max_returns_empty() {
        let x = standardized(2, 50, 6);
        let y: Vec<u8> = (0..50).map(|i| u8::from(i % 4 == 0)).collect();
        let targets: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let lmax = lambda_max(&x.view(), &targets);
        let sel = run_selector(
            &SelectorConfig::Lasso { lambda: lmax * 1.01 },
            &x.view(),
            &y,
            10,
        )
        .unwrap();
        assert!(sel.is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let x = standardized(3, 60, 12);
        let mut y = vec![0u8; 60];
        for (i, l) in y.iter_mut().enumerate() {
            *l = u8::from(i % 3 == 0);
        }
        let sel = run_selector(
            &SelectorConfig::Lasso { lambda: 1e-4 },
            &x.view(),
            &y,
            4,
        )
        .unwrap();
        assert!(sel.selected.len() <= 4);
    }

    #[test]
    fn topk_importance_ranking_and_ties() {
        let sel = select_topk_importance(&[0.1, 0.9, 0.5], 2).unwrap();
        assert_eq!(sel.selected, vec![1, 2]);

        let sel = select_topk_importance(&[0.3, 0.3, 0.3], 2).unwrap();
        assert_eq!(sel.selected, vec![0, 1]); // ties broken by lower index

        let sel = select_topk_importance(&[0.5], 5).unwrap();
        assert_eq!(sel.selected, vec![0]);
    }

    #[test]
    fn permuting_columns_permutes_the_selection() {
        let n = 120;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = standardized(4, n, 6);
        let y: Vec<u8> = (0..n)
            .map(|i| {
                u8::from(x[[i, 2]] - x[[i, 5]] + 0.3 * rng.sample::<f64, _>(StandardNormal) > 0.0)
            })
            .collect();
        // swap columns 0 and 2
        let mut xp = x.clone();
        for i in 0..n {
            xp.swap([i, 0], [i, 2]);
        }
        for config in [
            SelectorConfig::Lasso { lambda: 0.02 },
            SelectorConfig::Fbed {
                alpha: 0.05,
                k_runs: 0,
            },
        ] {
            let a = run_selector(&config, &x.view(), &y, 10).unwrap();
            let b = run_selector(&config, &xp.view(), &y, 10).unwrap();
            let remap = |j: usize| match j {
                0 => 2,
                2 => 0,
                other => other,
            };
            let mut a_mapped: Vec<usize> = a.selected.iter().map(|&j| remap(j)).collect();
            let mut b_sel = b.selected.clone();
            a_mapped.sort_unstable();
            b_sel.sort_unstable();
            assert_eq!(a_mapped, b_sel, "selector {config:?}");
        }
    }

    proptest! {
        #[test]
        fn selection_is_always_within_bounds(seed in 0u64..50, cap in 1usize..6) {
            let x = standardized(seed, 40, 8);
            let y: Vec<u8> = (0..40).map(|i| u8::from((i + seed as usize) % 5 == 0)).collect();
            let sel = run_selector(
                &SelectorConfig::Lasso { lambda: 0.01 },
                &x.view(),
                &y,
                cap,
            ).unwrap();
            prop_assert!(sel.selected.len() <= cap);
            let mut sorted = sel.selected.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), sel.selected.len());
            prop_assert!(sel.selected.iter().all(|&j| j < 8));
        }
    }
}
