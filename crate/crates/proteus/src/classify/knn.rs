//! K-nearest-neighbors scorer: the anomaly score of a point is the
//! fraction of anomalous labels among its k nearest training rows
//! (Euclidean distance, ties broken by training index).

use ndarray::ArrayView2;

#[derive(Debug, Clone)]
pub struct KnnModel {
    pub(crate) rows: Vec<Vec<f64>>,
    pub(crate) labels: Vec<u8>,
    pub(crate) k: usize,
}

impl KnnModel {
    pub fn fit(x: &ArrayView2<f64>, y: &[u8], k: usize) -> KnnModel {
        let rows: Vec<Vec<f64>> = (0..x.nrows()).map(|i| x.row(i).to_vec()).collect();
        KnnModel {
            rows,
            labels: y.to_vec(),
            k: k.min(y.len()),
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d2: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let hits = dists[..self.k]
            .iter()
            .filter(|&&(_, i)| self.labels[i] == 1)
            .count();
        hits as f64 / self.k as f64
    }
}
