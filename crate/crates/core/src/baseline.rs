//! Reference methods: univariate multiscale dispersion entropy and the
//! classical subset-enumerating multivariate dispersion entropy, plus the
//! pattern-count formulas used to compare their cost with mvDEG.

use num_bigint::BigUint;
use serde::Serialize;

use crate::curve::{CurveConfig, EntropyCurve};
use crate::entropy::{
    check_pattern_params, coarse_grain, ncdf_map, single_scale_at, EmbeddingConfig, ScaleOutcome,
    SingleScale,
};
use crate::error::{Error, Result};
use crate::histogram::PatternCounter;
use crate::signal::MultivariateSignal;

/// Default ceiling on the number of patterns classical mvDE may emit.
pub const DEFAULT_PATTERN_CAP: u64 = 100_000_000;

/// Exact `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 1..=k {
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternCounts {
    /// `(N - m + 1) · C(m·p, m)` patterns emitted by classical mvDE.
    #[serde(serialize_with = "as_decimal")]
    pub classical: BigUint,
    /// `(N - m) · p` bound on mvDEG patterns.
    #[serde(serialize_with = "as_decimal")]
    pub graph_bound: BigUint,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn pattern_counts(n: usize, p: usize, m: usize) -> Result<PatternCounts> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter("N and p must be positive".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
    }
    let windows = (n + 1).saturating_sub(m);
    let classical = BigUint::from(windows) * binomial((m * p) as u64, m as u64);
    let graph_bound = BigUint::from(n.saturating_sub(m)) * BigUint::from(p);
    Ok(PatternCounts {
        classical,
        graph_bound,
    })
}

/// Dispersion entropy of one series at one scale: sliding windows of `m`
/// consecutive classes.
fn univariate_single_scale(series: &MultivariateSignal, m: usize, c: usize) -> Result<SingleScale> {
    let classes = ncdf_map(series, c)?;
    let row = classes.row(0);
    let n = row.len();
    if n < m + 1 {
        return Err(Error::ScaleUndefined { tau: 1, length: n });
    }
    let mut counter = PatternCounter::new(m, c);
    for start in 0..=(n - m) {
        let code = (0..m).fold(0u64, |acc, k| acc * c as u64 + (row[start + k] - 1) as u64);
        counter.add(code);
    }
    SingleScale::from_histogram(counter.into_histogram())
}

pub fn univariate_mde_scales(series: &[f64], cfg: &EmbeddingConfig) -> Result<Vec<ScaleOutcome>> {
    cfg.validate()?;
    let signal = MultivariateSignal::from_channels(vec![series.to_vec()])?;
    Ok((1..=cfg.max_scale)
        .map(|tau| ScaleOutcome {
            tau,
            result: single_scale_at(&signal, tau, cfg, |coarse| {
                univariate_single_scale(coarse, cfg.m, cfg.c)
            }),
        })
        .collect())
}

pub fn univariate_mde(series: &[f64], cfg: &EmbeddingConfig) -> Result<EntropyCurve> {
    let outcomes = univariate_mde_scales(series, cfg)?;
    Ok(EntropyCurve::from_realizations(
        "MDE",
        CurveConfig {
            m: cfg.m,
            c: cfg.c,
            max_scale: cfg.max_scale,
            graph: "none".into(),
            seed: None,
        },
        &[outcomes],
    ))
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Classical mvDE at scale `tau`. For every start time the `m·p` classes
/// (channel-major, then lag) are formed and every `m`-element subset in
/// index order becomes a pattern. Refuses with [`Error::Capacity`] when the
/// pattern count exceeds `cap`.
pub fn classical_mvde(
    signal: &MultivariateSignal,
    m: usize,
    c: usize,
    tau: usize,
    cap: u64,
) -> Result<SingleScale> {
    check_pattern_params(m, c)?;
    if tau == 0 {
        return Err(Error::InvalidParameter("scale factor must be at least 1".into()));
    }
    let len = signal.len() / tau;
    let count = pattern_counts(len.max(1), signal.channels(), m)?.classical;
    if count > BigUint::from(cap) {
        return Err(Error::Capacity { count, cap });
    }
    if len < m + 1 {
        return Err(Error::ScaleUndefined { tau, length: len });
    }
    let coarse = coarse_grain(signal, tau)?;
    let classes = ncdf_map(&coarse, c)?;
    let p = coarse.channels();
    let width = m * p;
    let starts = len - m + 1;
    // embed[t * width + ch * m + lag]
    let mut embed = Vec::with_capacity(starts * width);
    for t in 0..starts {
        for ch in 0..p {
            for lag in 0..m {
                embed.push((classes[[ch, t + lag]] - 1) as u64);
            }
        }
    }
    let mut counter = PatternCounter::new(m, c);
    let base = c as u64;
    for_each_combination(width, m, |subset| {
        for row in embed.chunks_exact(width) {
            let code = subset.iter().fold(0u64, |acc, &i| acc * base + row[i]);
            counter.add(code);
        }
    });
    SingleScale::from_histogram(counter.into_histogram())
}

/// Classical mvDE over `tau = 1..=max_scale`.
pub fn classical_mvde_scales(
    signal: &MultivariateSignal,
    cfg: &EmbeddingConfig,
    cap: u64,
) -> Result<Vec<ScaleOutcome>> {
    cfg.validate()?;
    Ok((1..=cfg.max_scale)
        .map(|tau| ScaleOutcome {
            tau,
            result: classical_mvde(signal, cfg.m, cfg.c, tau, cap),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::mvdeg_single_scale;
    use crate::graph::build_zero_graph;

    #[test]
    fn binomials() {
        assert_eq!(binomial(40, 5), BigUint::from(658_008u32));
        assert_eq!(binomial(5, 7), BigUint::from(0u32));
        assert_eq!(binomial(24, 4), BigUint::from(10_626u32));
    }

    #[test]
    fn pattern_count_examples() {
        let pc = pattern_counts(2000, 8, 5).unwrap();
        assert_eq!(pc.classical, BigUint::from(1_313_383_968u64));
        assert_eq!(pc.graph_bound, BigUint::from(15_960u32));
        let small = pattern_counts(5, 1, 2).unwrap();
        assert_eq!(small.classical, BigUint::from(4u32));
        assert_eq!(small.graph_bound, BigUint::from(3u32));
        // far beyond u128
        let huge = pattern_counts(1_000_000, 400, 10).unwrap();
        assert!(huge.classical.bits() > 70);
        assert!(pattern_counts(10, 2, 1).is_err());
    }

    #[test]
    fn combinations_in_lexicographic_order() {
        let mut seen = vec![];
        for_each_combination(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut count = 0;
        for_each_combination(10, 4, |_| count += 1);
        assert_eq!(count, 210);
    }

    #[test]
    fn classical_reduces_to_univariate_for_one_channel() {
        let x: Vec<f64> = (0..60).map(|t| ((t * 37) % 19) as f64 * 0.3).collect();
        let s = MultivariateSignal::from_channels(vec![x]).unwrap();
        let classical = classical_mvde(&s, 3, 4, 1, DEFAULT_PATTERN_CAP).unwrap();
        let univariate = univariate_single_scale(&s, 3, 4).unwrap();
        assert_eq!(classical, univariate);
        let graph = mvdeg_single_scale(&s, &build_zero_graph(1).unwrap(), 3, 4).unwrap();
        assert_eq!(graph, univariate);
    }

    #[test]
    fn classical_emits_expected_count() {
        let data: Vec<Vec<f64>> = (0..3)
            .map(|ch| (0..20).map(|t| ((t * 13 + ch * 5) % 7) as f64).collect())
            .collect();
        let s = MultivariateSignal::from_channels(data).unwrap();
        let out = classical_mvde(&s, 2, 3, 1, DEFAULT_PATTERN_CAP).unwrap();
        // (20 - 2 + 1) * C(6, 2)
        assert_eq!(out.histogram.total(), 19 * 15);
    }

    #[test]
    fn classical_constant_signal_is_zero() {
        let s = MultivariateSignal::from_channels(vec![vec![1.0; 30]; 2]).unwrap();
        assert_eq!(classical_mvde(&s, 3, 6, 1, DEFAULT_PATTERN_CAP).unwrap().entropy, 0.0);
    }

    #[test]
    fn classical_refuses_above_cap() {
        let s = MultivariateSignal::from_channels(vec![vec![0.0, 1.0, 2.0, 3.0]; 8]).unwrap();
        match classical_mvde(&s, 2, 3, 1, 10) {
            Err(Error::Capacity { count, cap }) => {
                assert_eq!(count, BigUint::from(3u32 * 120));
                assert_eq!(cap, 10);
            }
            other => panic!("expected capacity refusal, got {other:?}"),
        }
    }

    #[test]
    fn univariate_golden_and_constant() {
        let cfg = EmbeddingConfig::new(2, 2, 1).unwrap();
        let curve = univariate_mde(&[1.0, 2.0, 3.0, 4.0, 5.0], &cfg).unwrap();
        assert!((curve.records[0].mean.unwrap() - 0.75).abs() <= 1e-12);
        let cfg = EmbeddingConfig::new(3, 6, 5).unwrap();
        let flat = univariate_mde(&[4.2; 100], &cfg).unwrap();
        assert!(flat.records.iter().all(|r| r.mean == Some(0.0)));
    }
}
