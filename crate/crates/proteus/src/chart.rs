//! Spider Anomaly Explanation charts: radial plots of samples over the
//! explaining feature subset, rendered as standalone SVG.
//!
//! Feature values are mapped to training-set quantiles, so the chart's
//! four concentric rings are the quartiles and the green annulus between
//! the 0.25 and 0.75 rings is the interquartile "normal" band. Extreme
//! low quantiles (below 0.25) are reversed to 1−q so that both tails
//! plot near the outermost ring, far from the normal region.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::ArrayView2;

use crate::error::{ProteusError, Result};

/// Per-feature sorted reference values: the training ECDF of the
/// explained features.
#[derive(Debug, Clone)]
pub struct QuantileMap {
    references: Vec<Vec<f64>>,
}

impl QuantileMap {
    /// Fit on training rows restricted to the explanation's features
    /// (one reference column per chart spoke).
    pub fn fit(reference: &ArrayView2<f64>) -> Result<QuantileMap> {
        if reference.nrows() == 0 || reference.ncols() == 0 {
            return Err(ProteusError::InvalidData(
                "quantile map needs a non-empty reference".into(),
            ));
        }
        let references = (0..reference.ncols())
            .map(|j| {
                let mut col: Vec<f64> = reference.column(j).to_vec();
                col.sort_by(|a, b| a.partial_cmp(b).unwrap());
                col
            })
            .collect();
        Ok(QuantileMap { references })
    }

    pub fn n_features(&self) -> usize {
        self.references.len()
    }

    /// ECDF position of `v` in feature `j`: order statistics interpolate
    /// linearly, tied reference values share their averaged rank, and
    /// values outside the reference range clamp to 0 or 1.
    pub fn quantile(&self, j: usize, v: f64) -> f64 {
        let refs = &self.references[j];
        let m = refs.len();
        if m == 1 {
            return if v < refs[0] {
                0.0
            } else if v > refs[0] {
                1.0
            } else {
                0.5
            };
        }
        if v <= refs[0] {
            return if v < refs[0] { 0.0 } else { averaged_position(refs, 0) };
        }
        if v >= refs[m - 1] {
            return if v > refs[m - 1] {
                1.0
            } else {
                averaged_position(refs, m - 1)
            };
        }
        // first index with refs[idx] >= v
        let idx = refs.partition_point(|&r| r < v);
        if refs[idx] == v {
            return averaged_position(refs, idx);
        }
        let (lo, hi) = (refs[idx - 1], refs[idx]);
        let p_lo = averaged_position(refs, idx - 1);
        let p_hi = averaged_position(refs, idx);
        p_lo + (v - lo) / (hi - lo) * (p_hi - p_lo)
    }

    /// Transform a full sample (already projected to the explained
    /// features) into per-spoke quantiles.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(ProteusError::InvalidData(format!(
                "sample has {} features, quantile map expects {}",
                x.len(),
                self.n_features()
            )));
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| self.quantile(j, v))
            .collect())
    }
}

/// Averaged 0-based rank of the tie group containing index `idx`,
/// normalized to [0, 1].
fn averaged_position(refs: &[f64], idx: usize) -> f64 {
    let v = refs[idx];
    let first = refs.partition_point(|&r| r < v);
    let last = refs.partition_point(|&r| r <= v) - 1;
    let avg = (first + last) as f64 / 2.0;
    avg / (refs.len() - 1) as f64
}

/// Reverse extreme-low quantiles into the high band: q < 0.25 maps to
/// 1 − q, everything else passes through.
pub fn reverse_extremes(q: f64) -> f64 {
    if q < 0.25 {
        1.0 - q
    } else {
        q
    }
}

/// One plotted sample: its label line and radial values after reversal.
#[derive(Debug, Clone)]
pub struct ChartSample {
    pub id: String,
    pub radial: Vec<f64>,
    pub detector_label: Option<u8>,
    pub surrogate_label: Option<u8>,
}

/// A ready-to-render chart over the explaining subspace.
#[derive(Debug, Clone)]
pub struct SaeChart {
    pub axes: Vec<String>,
    pub samples: Vec<ChartSample>,
    /// Set when a two-spoke explanation was padded with a repeated axis.
    pub padded_axis: bool,
}

impl SaeChart {
    /// Build a chart from raw samples: quantile-transform, reverse the
    /// low extremes, and pad two-spoke explanations with a duplicated
    /// axis so the polygon stays two-dimensional.
    pub fn build(
        axes: Vec<String>,
        map: &QuantileMap,
        samples: Vec<(String, Vec<f64>, Option<u8>, Option<u8>)>,
    ) -> Result<SaeChart> {
        if axes.len() != map.n_features() {
            return Err(ProteusError::InvalidData(
                "axis count does not match quantile map".into(),
            ));
        }
        if axes.len() < 2 {
            return Err(ProteusError::InvalidData(
                "a spider chart needs at least 2 axes".into(),
            ));
        }
        let mut chart_axes = axes;
        let padded_axis = chart_axes.len() == 2;
        let mut chart_samples = Vec::with_capacity(samples.len());
        for (id, raw, detector_label, surrogate_label) in samples {
            let mut radial: Vec<f64> = map
                .transform(&raw)?
                .into_iter()
                .map(reverse_extremes)
                .collect();
            if padded_axis {
                radial.push(radial[0]);
            }
            chart_samples.push(ChartSample {
                id,
                radial,
                detector_label,
                surrogate_label,
            });
        }
        if padded_axis {
            let first = chart_axes[0].clone();
            chart_axes.push(first);
        }
        Ok(SaeChart {
            axes: chart_axes,
            samples: chart_samples,
            padded_axis,
        })
    }
}

const VIEW: f64 = 600.0;
const CENTER: f64 = 300.0;
const RADIUS: f64 = 220.0;
const STROKES: [&str; 6] = [
    "#1f6fb4", "#d1362f", "#3a923a", "#8a51a5", "#c97f1e", "#4d4d4d",
];

fn polar(q: f64, spoke: usize, n_spokes: usize) -> (f64, f64) {
    let angle = -std::f64::consts::FRAC_PI_2
        + spoke as f64 * 2.0 * std::f64::consts::PI / n_spokes as f64;
    (
        CENTER + q * RADIUS * angle.cos(),
        CENTER + q * RADIUS * angle.sin(),
    )
}

fn label_text(sample: &ChartSample) -> String {
    let describe = |l: Option<u8>| match l {
        Some(1) => "anomaly",
        Some(_) => "normal",
        None => "?",
    };
    format!(
        "{} (detector: {}, surrogate: {})",
        sample.id,
        describe(sample.detector_label),
        describe(sample.surrogate_label)
    )
}

/// Render the chart to an SVG string. Pure function of its input:
/// identical charts produce byte-identical documents.
pub fn render_svg(chart: &SaeChart) -> Result<String> {
    let n = chart.axes.len();
    if n < 3 {
        return Err(ProteusError::InvalidData(
            "rendering needs at least 3 spokes".into(),
        ));
    }
    for s in &chart.samples {
        if s.radial.len() != n {
            return Err(ProteusError::InvalidData(format!(
                "sample \"{}\" has {} radial values for {} spokes",
                s.id,
                s.radial.len(),
                n
            )));
        }
        if s.radial.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(ProteusError::InvalidData(format!(
                "sample \"{}\" has radial values outside [0,1]",
                s.id
            )));
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{VIEW}\" height=\"{VIEW}\" viewBox=\"0 0 {VIEW} {VIEW}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{VIEW}\" height=\"{VIEW}\" fill=\"#ffffff\"/>");

    // interquartile normal band: annulus between the 0.25 and 0.75 rings
    let _ = writeln!(
        svg,
        "<path d=\"M {c} {o75} A {r75} {r75} 0 1 1 {c} {u75} A {r75} {r75} 0 1 1 {c} {o75} Z M {c} {o25} A {r25} {r25} 0 1 0 {c} {u25} A {r25} {r25} 0 1 0 {c} {o25} Z\" fill=\"#2e8b57\" fill-opacity=\"0.18\" fill-rule=\"evenodd\"/>",
        c = fmt2(CENTER),
        o75 = fmt2(CENTER - 0.75 * RADIUS),
        u75 = fmt2(CENTER + 0.75 * RADIUS),
        r75 = fmt2(0.75 * RADIUS),
        o25 = fmt2(CENTER - 0.25 * RADIUS),
        u25 = fmt2(CENTER + 0.25 * RADIUS),
        r25 = fmt2(0.25 * RADIUS),
    );

    // quartile rings
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#9aa5ad\" stroke-width=\"1\"/>",
            fmt2(CENTER),
            fmt2(CENTER),
            fmt2(ring * RADIUS)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#5a646b\">{}</text>",
            fmt2(CENTER + 4.0),
            fmt2(CENTER - ring * RADIUS - 4.0),
            ring
        );
    }

    // spokes and axis labels
    for (i, axis) in chart.axes.iter().enumerate() {
        let (x, y) = polar(1.0, i, n);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c2c9ce\" stroke-width=\"1\"/>",
            fmt2(CENTER),
            fmt2(CENTER),
            fmt2(x),
            fmt2(y)
        );
        let (lx, ly) = polar(1.13, i, n);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#30373c\" text-anchor=\"middle\">{}</text>",
            fmt2(lx),
            fmt2(ly),
            escape(axis)
        );
    }

    // sample polygons
    for (s_idx, sample) in chart.samples.iter().enumerate() {
        let stroke = STROKES[s_idx % STROKES.len()];
        let points: Vec<String> = sample
            .radial
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                let (x, y) = polar(q, i, n);
                format!("{},{}", fmt2(x), fmt2(y))
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polygon points=\"{}\" fill=\"{stroke}\" fill-opacity=\"0.10\" stroke=\"{stroke}\" stroke-width=\"2\"/>",
            points.join(" ")
        );
    }

    // legend
    for (s_idx, sample) in chart.samples.iter().enumerate() {
        let stroke = STROKES[s_idx % STROKES.len()];
        let y = 20.0 + 18.0 * s_idx as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"12\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{stroke}\"/>",
            fmt2(y - 10.0)
        );
        let _ = writeln!(
            svg,
            "<text x=\"30\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#30373c\">{}</text>",
            fmt2(y),
            escape(&label_text(sample))
        );
    }
    if chart.padded_axis {
        let y = 20.0 + 18.0 * chart.samples.len() as f64;
        let _ = writeln!(
            svg,
            "<text x=\"12\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#8a6d1a\">two-feature explanation: first axis repeated</text>",
            fmt2(y)
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write to a file.
pub fn render_chart(chart: &SaeChart, out: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(chart)?;
    std::fs::write(out.as_ref(), svg).map_err(|e| ProteusError::io(out.as_ref(), e))
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;
    use proptest::prelude::*;

    #[test]
    fn ecdf_interpolates_between_order_statistics() {
        let reference = arr2(&[[1.0], [2.0], [3.0], [4.0]]);
        let map = QuantileMap::fit(&reference.view()).unwrap();
        assert_abs_diff_eq!(map.quantile(0, 2.5), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(map.quantile(0, 1.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(map.quantile(0, 4.0), 1.0, epsilon = 1e-12);
        assert_eq!(map.quantile(0, 0.5), 0.0); // below range clamps
        assert_eq!(map.quantile(0, 9.0), 1.0); // above range clamps
    }

    #[test]
    fn tied_reference_values_share_their_averaged_rank() {
        let reference = arr2(&[[1.0], [2.0], [2.0], [3.0]]);
        let map = QuantileMap::fit(&reference.view()).unwrap();
        // value 2 occupies ranks 1 and 2 of 0..3 → (1+2)/2 / 3 = 0.5
        assert_abs_diff_eq!(map.quantile(0, 2.0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn reversal_rule() {
        assert_abs_diff_eq!(reverse_extremes(0.1), 0.9, epsilon = 1e-12);
        assert_eq!(reverse_extremes(0.25), 0.25); // boundary stays
        assert_eq!(reverse_extremes(0.6), 0.6);
        assert_eq!(reverse_extremes(0.0), 1.0);
    }

    proptest! {
        #[test]
        fn reversal_never_lands_in_the_low_band(q in 0.0f64..=1.0) {
            let r = reverse_extremes(q);
            prop_assert!((0.25..=1.0).contains(&r), "q={q} → {r}");
        }

        #[test]
        fn reversal_is_monotone_on_each_side(a in 0.0f64..0.25, b in 0.0f64..0.25) {
            // anti-monotone below 0.25
            if a < b {
                prop_assert!(reverse_extremes(a) > reverse_extremes(b));
            }
            // monotone above
            let (ha, hb) = (0.25 + a, 0.25 + b);
            if ha < hb {
                prop_assert!(reverse_extremes(ha) <= reverse_extremes(hb));
            }
        }
    }

    fn demo_chart(n_axes: usize) -> SaeChart {
        let reference = ndarray::Array2::from_shape_fn((40, n_axes), |(i, j)| {
            (i as f64 - 20.0) * (1.0 + j as f64 * 0.1)
        });
        let map = QuantileMap::fit(&reference.view()).unwrap();
        let inlier: Vec<f64> = (0..n_axes).map(|j| 0.5 * (1.0 + j as f64 * 0.1)).collect();
        let outlier: Vec<f64> = (0..n_axes).map(|j| 25.0 * (1.0 + j as f64 * 0.1)).collect();
        SaeChart::build(
            (0..n_axes).map(|j| format!("feat_{j}")).collect(),
            &map,
            vec![
                ("sample 3".to_string(), inlier, Some(0), Some(0)),
                ("sample 17".to_string(), outlier, Some(1), Some(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rendering_is_deterministic() {
        let chart = demo_chart(5);
        let a = render_svg(&chart).unwrap();
        let b = render_svg(&chart).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert_eq!(a.matches("<polygon").count(), 2);
        assert_eq!(a.matches("<circle").count(), 4);
    }

    #[test]
    fn normal_sample_polygon_stays_inside_the_band() {
        let chart = demo_chart(6);
        for &q in &chart.samples[0].radial {
            assert!((0.25..=0.75).contains(&q), "inlier radial {q}");
        }
        for &q in &chart.samples[1].radial {
            assert!(q > 0.95, "outlier radial {q}");
        }
    }

    #[test]
    fn two_axis_charts_get_padded() {
        let reference = arr2(&[[0.0, 10.0], [1.0, 20.0], [2.0, 30.0]]);
        let map = QuantileMap::fit(&reference.view()).unwrap();
        let chart = SaeChart::build(
            vec!["a".into(), "b".into()],
            &map,
            vec![("s".to_string(), vec![1.0, 20.0], None, None)],
        )
        .unwrap();
        assert!(chart.padded_axis);
        assert_eq!(chart.axes, vec!["a", "b", "a"]);
        assert_eq!(chart.samples[0].radial.len(), 3);
        let svg = render_svg(&chart).unwrap();
        assert!(svg.contains("first axis repeated"));
    }

    #[test]
    fn single_axis_is_refused() {
        let reference = arr2(&[[0.0], [1.0]]);
        let map = QuantileMap::fit(&reference.view()).unwrap();
        assert!(SaeChart::build(
            vec!["a".into()],
            &map,
            vec![("s".to_string(), vec![0.5], None, None)]
        )
        .is_err());
    }
}
