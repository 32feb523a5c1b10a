//! Graph-based multivariate multiscale dispersion entropy (mvDEG).
//!
//! Per scale `tau` the pipeline is:
//!
//! 1. coarse-grain every channel by non-overlapping means of `tau` samples;
//! 2. standardize each channel (sample mean, sample SD);
//! 3. build the hop basis `y_0 .. y_{m-1}` on the time-by-channel product
//!    graph (see [`crate::kron`]);
//! 4. map every entry to a class in `1..=c` through the Gaussian CDF;
//! 5. histogram the rows `(t, ch)` for `t <= L - m`, i.e. the rows whose
//!    full `m - 1` step temporal window lies inside the signal;
//! 6. return the Shannon entropy normalized by `ln(c^m)`.
//!
//! Standardizing before aggregation makes the result invariant under
//! per-channel increasing affine maps even when the graph mixes channels.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::curve::{CurveConfig, EntropyCurve};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::histogram::{DispersionHistogram, PatternCounter};
use crate::kron::build_hop_basis;
use crate::signal::{channel_stats, standardize, MultivariateSignal};

/// Largest embedding dimension accepted.
pub const MAX_EMBEDDING: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub m: usize,
    pub c: usize,
    pub max_scale: usize,
}

impl EmbeddingConfig {
    pub fn new(m: usize, c: usize, max_scale: usize) -> Result<Self> {
        let cfg = Self { m, c, max_scale };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_pattern_params(self.m, self.c)?;
        if self.max_scale == 0 {
            return Err(Error::InvalidParameter("max_scale must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether scale `tau` leaves at least `m + 1` samples for a signal of
    /// length `n`.
    pub fn scale_defined(&self, n: usize, tau: usize) -> bool {
        n / tau > self.m
    }
}

pub(crate) fn check_pattern_params(m: usize, c: usize) -> Result<()> {
    if !(2..=MAX_EMBEDDING).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension m must be in 2..={MAX_EMBEDDING}, got {m}"
        )));
    }
    if c < 2 || c > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "class count c must be in 2..=65535, got {c}"
        )));
    }
    if (c as u64).checked_pow(m as u32).is_none() {
        return Err(Error::InvalidParameter(format!(
            "pattern space c^m = {c}^{m} does not fit in 64 bits"
        )));
    }
    Ok(())
}

/// Non-overlapping window means; trailing samples that do not fill a
/// window are dropped.
pub fn coarse_grain(signal: &MultivariateSignal, tau: usize) -> Result<MultivariateSignal> {
    if tau == 0 || tau > signal.len() {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be in 1..={}, got {tau}",
            signal.len()
        )));
    }
    if tau == 1 {
        return Ok(signal.clone());
    }
    let len = signal.len() / tau;
    if len < 2 {
        return Err(Error::ScaleUndefined { tau, length: len });
    }
    let src = signal.values();
    let values = Array2::from_shape_fn((signal.channels(), len), |(ch, i)| {
        let window = src.row(ch);
        let sum: f64 = window.iter().skip(i * tau).take(tau).sum();
        sum / tau as f64
    });
    signal.map_values(values)
}

/// Standard normal CDF.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Class of a standard score: `round(c·Φ(z) + 0.5)` clamped to `1..=c`,
/// rounding halves away from zero.
#[inline]
pub fn class_of(z: f64, c: usize) -> u16 {
    let raw = (c as f64 * std_normal_cdf(z) + 0.5).round();
    raw.clamp(1.0, c as f64) as u16
}

/// Per-channel class map using that channel's sample mean and SD.
pub fn ncdf_map(signal: &MultivariateSignal, c: usize) -> Result<Array2<u16>> {
    if c < 2 || c > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "class count c must be in 2..=65535, got {c}"
        )));
    }
    let stats = channel_stats(signal);
    let values = signal.values();
    Ok(Array2::from_shape_fn(values.dim(), |(ch, t)| {
        class_of(stats[ch].z(values[[ch, t]]), c)
    }))
}

/// Entropy and histogram at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleScale {
    pub entropy: f64,
    pub histogram: DispersionHistogram,
}

impl SingleScale {
    pub(crate) fn from_histogram(histogram: DispersionHistogram) -> Result<Self> {
        if histogram.total() == 0 {
            return Err(Error::EmptyPatterns);
        }
        Ok(Self {
            entropy: histogram.entropy(),
            histogram,
        })
    }
}

/// Result for one scale of a curve.
#[derive(Debug)]
pub struct ScaleOutcome {
    pub tau: usize,
    pub result: Result<SingleScale>,
}

/// mvDEG of an (already coarse-grained) signal.
pub fn mvdeg_single_scale(
    signal: &MultivariateSignal,
    graph: &WeightedGraph,
    m: usize,
    c: usize,
) -> Result<SingleScale> {
    check_pattern_params(m, c)?;
    let n = signal.len();
    let p = signal.channels();
    if graph.n() != p {
        return Err(Error::DimensionMismatch {
            context: "interaction graph vertices vs channels",
            expected: p,
            found: graph.n(),
        });
    }
    if n < m + 1 {
        return Err(Error::ScaleUndefined { tau: 1, length: n });
    }
    let basis = build_hop_basis(&standardize(signal), graph, m)?;
    let mut counter = PatternCounter::new(m, c);
    let base = c as u64;
    for t in 0..=(n - m) {
        for ch in 0..p {
            let i = t * p + ch;
            if !basis.row_valid(i) {
                continue;
            }
            let code = basis.columns.iter().fold(0u64, |acc, col| {
                acc * base + (class_of(col.values[i], c) - 1) as u64
            });
            counter.add(code);
        }
    }
    SingleScale::from_histogram(counter.into_histogram())
}

/// Per-scale outcomes for `tau = 1..=max_scale`. Configuration and graph
/// shape errors abort; per-scale failures are recorded.
pub fn mvdeg_scales(
    signal: &MultivariateSignal,
    graph: &WeightedGraph,
    cfg: &EmbeddingConfig,
) -> Result<Vec<ScaleOutcome>> {
    cfg.validate()?;
    if graph.n() != signal.channels() {
        return Err(Error::DimensionMismatch {
            context: "interaction graph vertices vs channels",
            expected: signal.channels(),
            found: graph.n(),
        });
    }
    Ok((1..=cfg.max_scale)
        .map(|tau| ScaleOutcome {
            tau,
            result: single_scale_at(signal, tau, cfg, |coarse| {
                mvdeg_single_scale(coarse, graph, cfg.m, cfg.c)
            }),
        })
        .collect())
}

pub(crate) fn single_scale_at(
    signal: &MultivariateSignal,
    tau: usize,
    cfg: &EmbeddingConfig,
    f: impl FnOnce(&MultivariateSignal) -> Result<SingleScale>,
) -> Result<SingleScale> {
    if !cfg.scale_defined(signal.len(), tau) {
        return Err(Error::ScaleUndefined {
            tau,
            length: signal.len() / tau,
        });
    }
    f(&coarse_grain(signal, tau)?)
}

pub fn mvdeg_curve(
    signal: &MultivariateSignal,
    graph: &WeightedGraph,
    cfg: &EmbeddingConfig,
    graph_label: &str,
) -> Result<EntropyCurve> {
    let outcomes = mvdeg_scales(signal, graph, cfg)?;
    Ok(EntropyCurve::from_realizations(
        "mvDEG",
        CurveConfig {
            m: cfg.m,
            c: cfg.c,
            max_scale: cfg.max_scale,
            graph: graph_label.to_string(),
            seed: None,
        },
        &[outcomes],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_complete_graph, build_zero_graph};
    use ndarray::array;
    use proptest::prelude::*;

    fn ramp() -> MultivariateSignal {
        MultivariateSignal::from_channels(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]]).unwrap()
    }

    #[test]
    fn coarse_grain_examples() {
        let s = MultivariateSignal::from_channels(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(coarse_grain(&s, 2).unwrap().values(), &array![[1.5, 3.5, 5.5]]);
        assert_eq!(coarse_grain(&s, 1).unwrap(), s);
        assert_eq!(coarse_grain(&ramp(), 2).unwrap().values(), &array![[1.5, 3.5]]);
        assert!(matches!(
            coarse_grain(&ramp(), 3),
            Err(Error::ScaleUndefined { tau: 3, length: 1 })
        ));
        assert!(coarse_grain(&ramp(), 0).is_err());
    }

    #[test]
    fn class_map_examples() {
        assert_eq!(class_of(0.0, 6), 4);
        assert_eq!(class_of(-40.0, 6), 1);
        assert_eq!(class_of(f64::NEG_INFINITY, 6), 1);
        assert_eq!(class_of(40.0, 6), 6);
        assert_eq!(class_of(f64::INFINITY, 6), 6);
        assert_eq!(ncdf_map(&ramp(), 2).unwrap(), array![[1u16, 1, 2, 2, 2]]);
        let constant = MultivariateSignal::from_channels(vec![vec![3.0; 4]]).unwrap();
        // round(6/2 + 0.5) = 4
        assert_eq!(ncdf_map(&constant, 6).unwrap(), array![[4u16, 4, 4, 4]]);
    }

    #[test]
    fn hand_enumerated_golden_value() {
        let out = mvdeg_single_scale(&ramp(), &build_zero_graph(1).unwrap(), 2, 2).unwrap();
        assert_eq!(out.histogram.count(&[1, 1]), 1);
        assert_eq!(out.histogram.count(&[1, 2]), 1);
        assert_eq!(out.histogram.count(&[2, 2]), 2);
        assert_eq!(out.histogram.total(), 4);
        assert!((out.entropy - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn constant_signal_has_zero_entropy() {
        let s = MultivariateSignal::from_channels(vec![vec![2.0; 40]; 3]).unwrap();
        for g in [build_zero_graph(3).unwrap(), build_complete_graph(3).unwrap()] {
            let out = mvdeg_single_scale(&s, &g, 3, 5).unwrap();
            assert_eq!(out.histogram.distinct(), 1);
            assert_eq!(out.entropy, 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = build_zero_graph(1).unwrap();
        assert!(mvdeg_single_scale(&ramp(), &g, 1, 2).is_err());
        assert!(mvdeg_single_scale(&ramp(), &g, 2, 1).is_err());
        assert!(matches!(
            mvdeg_single_scale(&ramp(), &build_zero_graph(2).unwrap(), 2, 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            mvdeg_single_scale(&ramp(), &g, 5, 2),
            Err(Error::ScaleUndefined { .. })
        ));
        assert!(EmbeddingConfig::new(2, 2, 0).is_err());
    }

    #[test]
    fn curve_marks_short_scales_undefined() {
        let s = MultivariateSignal::from_channels(vec![(0..12).map(|i| (i * 7 % 5) as f64).collect()])
            .unwrap();
        let cfg = EmbeddingConfig::new(2, 3, 6).unwrap();
        let curve = mvdeg_curve(&s, &build_zero_graph(1).unwrap(), &cfg, "zero").unwrap();
        assert_eq!(curve.records.len(), 6);
        let defined: Vec<bool> = curve.records.iter().map(|r| r.mean.is_some()).collect();
        // floor(12 / tau) >= 3 holds for tau <= 4
        assert_eq!(defined, vec![true, true, true, true, false, false]);
        assert!(curve.records[5].undefined.is_some());
        let direct = mvdeg_single_scale(&s, &build_zero_graph(1).unwrap(), 2, 3).unwrap();
        assert_eq!(curve.records[0].mean, Some(direct.entropy));
    }

    fn count_patterns(n: usize, p: usize, m: usize, graph: &WeightedGraph, seed: u64) -> u64 {
        let data: Vec<Vec<f64>> = (0..p)
            .map(|ch| {
                (0..n)
                    .map(|t| ((t as u64 * 2654435761 + ch as u64 * 97 + seed) % 1013) as f64)
                    .collect()
            })
            .collect();
        let s = MultivariateSignal::from_channels(data).unwrap();
        mvdeg_single_scale(&s, graph, m, 3).unwrap().histogram.total()
    }

    #[test]
    fn pattern_count_bound_exhaustive() {
        for n in 2..=30 {
            for p in 1..=4 {
                for m in 2..=4 {
                    if n < m + 1 {
                        continue;
                    }
                    let directed = WeightedGraph::new(
                        Array2::from_shape_fn((p, p), |(i, j)| if j == (i + 1) % p && p > 1 { 0.5 } else { 0.0 }),
                        true,
                    )
                    .unwrap();
                    for g in [build_zero_graph(p).unwrap(), build_complete_graph(p).unwrap(), directed] {
                        let count = count_patterns(n, p, m, &g, (n * p * m) as u64);
                        assert!(count <= ((n - m) * p + p) as u64);
                        assert_eq!(count, ((n - m + 1) * p) as u64);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_graph_factorizes_over_channels() {
        let data: Vec<Vec<f64>> = (0..3)
            .map(|ch| (0..50).map(|t| ((t * 31 + ch * 17) % 23) as f64 + ch as f64).collect())
            .collect();
        let joint = mvdeg_single_scale(
            &MultivariateSignal::from_channels(data.clone()).unwrap(),
            &build_zero_graph(3).unwrap(),
            3,
            4,
        )
        .unwrap();
        let mut union: Option<DispersionHistogram> = None;
        for ch in data {
            let h = mvdeg_single_scale(
                &MultivariateSignal::from_channels(vec![ch]).unwrap(),
                &build_zero_graph(1).unwrap(),
                3,
                4,
            )
            .unwrap()
            .histogram;
            match union.as_mut() {
                Some(u) => u.merge(&h),
                None => union = Some(h),
            }
        }
        assert_eq!(joint.histogram, union.unwrap());
    }

    proptest! {
        #[test]
        fn affine_maps_preserve_histograms(
            data in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 30), 1..4),
            scales in prop::collection::vec(0.5f64..8.0, 3),
            offsets in prop::collection::vec(-20.0f64..20.0, 3),
            complete in any::<bool>(),
        ) {
            let p = data.len();
            let g = if complete { build_complete_graph(p).unwrap() } else { build_zero_graph(p).unwrap() };
            let s = MultivariateSignal::from_channels(data.clone()).unwrap();
            let mapped: Vec<Vec<f64>> = data
                .iter()
                .enumerate()
                .map(|(i, ch)| ch.iter().map(|x| scales[i] * x + offsets[i]).collect())
                .collect();
            let t = MultivariateSignal::from_channels(mapped).unwrap();
            let a = mvdeg_single_scale(&s, &g, 3, 4).unwrap();
            let b = mvdeg_single_scale(&t, &g, 3, 4).unwrap();
            prop_assert_eq!(a.histogram, b.histogram);
        }

        #[test]
        fn entropy_stays_in_unit_interval(
            data in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 8..40), 1..4),
            m in 2usize..5,
            c in 2usize..8,
            w in 0.0f64..2.0,
        ) {
            let n = data.iter().map(Vec::len).min().unwrap();
            prop_assume!(n > m);
            let data: Vec<Vec<f64>> = data.into_iter().map(|mut ch| { ch.truncate(n); ch }).collect();
            let p = data.len();
            let g = WeightedGraph::new(Array2::from_shape_fn((p, p), |(i, j)| if i == j { 0.0 } else { w }), false).unwrap();
            let out = mvdeg_single_scale(&MultivariateSignal::from_channels(data).unwrap(), &g, m, c).unwrap();
            prop_assert!((0.0..=1.0).contains(&out.entropy));
            prop_assert_eq!(out.entropy == 0.0, out.histogram.distinct() == 1);
        }
    }
}
