//! Multichannel time series container.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// `p` channels of `N` finite samples each, stored channel-by-row.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSignal {
    values: Array2<f64>,
    labels: Vec<String>,
}

impl MultivariateSignal {
    /// Builds a signal from a `p x N` array, labelling channels `ch1..chp`.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let labels = (1..=values.nrows()).map(|i| format!("ch{i}")).collect();
        Self::with_labels(values, labels)
    }

    pub fn with_labels(values: Array2<f64>, labels: Vec<String>) -> Result<Self> {
        let (p, n) = values.dim();
        if p == 0 {
            return Err(Error::InvalidDimension {
                what: "channel count",
                value: p,
            });
        }
        if n < 2 {
            return Err(Error::InvalidDimension {
                what: "sample count",
                value: n,
            });
        }
        if labels.len() != p {
            return Err(Error::DimensionMismatch {
                context: "channel labels",
                expected: p,
                found: labels.len(),
            });
        }
        if let Some(((ch, t), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample at channel {}, time {}",
                ch + 1,
                t + 1
            )));
        }
        Ok(Self { values, labels })
    }

    pub fn from_channels(channels: Vec<Vec<f64>>) -> Result<Self> {
        let p = channels.len();
        let n = channels.first().map_or(0, Vec::len);
        if let Some(bad) = channels.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "channel length",
                expected: n,
                found: bad.len(),
            });
        }
        let flat: Vec<f64> = channels.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((p, n), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(values)
    }

    /// Channel count `p`.
    pub fn channels(&self) -> usize {
        self.values.nrows()
    }

    /// Samples per channel `N`.
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn channel(&self, ch: usize) -> ArrayView1<'_, f64> {
        self.values.row(ch)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Replaces the data while keeping labels. Used by transforms that
    /// preserve the channel set.
    pub(crate) fn map_values(&self, values: Array2<f64>) -> Result<Self> {
        Self::with_labels(values, self.labels.clone())
    }

    /// Vectorizes time-major with channels contiguous inside each time step:
    /// entry `t * p + ch`.
    pub fn vectorize(&self) -> Vec<f64> {
        let (p, n) = self.values.dim();
        let mut out = Vec::with_capacity(n * p);
        for t in 0..n {
            for ch in 0..p {
                out.push(self.values[[ch, t]]);
            }
        }
        out
    }
}

/// Sample mean and standard deviation (denominator `N - 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean: f64,
    pub sd: f64,
}

impl ChannelStats {
    pub fn of<'a>(samples: impl IntoIterator<Item = &'a f64> + Clone) -> Self {
        let (count, sum) = samples
            .clone()
            .into_iter()
            .fold((0usize, 0.0), |(n, s), &x| (n + 1, s + x));
        let mean = sum / count as f64;
        let ss: f64 = samples.into_iter().map(|&x| (x - mean) * (x - mean)).sum();
        let sd = if count > 1 {
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }

    /// Standard score of `x`; zero for a constant channel.
    #[inline]
    pub fn z(&self, x: f64) -> f64 {
        if self.sd > 0.0 {
            (x - self.mean) / self.sd
        } else {
            0.0
        }
    }
}

pub fn channel_stats(signal: &MultivariateSignal) -> Vec<ChannelStats> {
    signal
        .values
        .rows()
        .into_iter()
        .map(|row| ChannelStats::of(row.iter()))
        .collect()
}

/// Replaces every sample by its per-channel standard score.
pub fn standardize(signal: &MultivariateSignal) -> MultivariateSignal {
    let stats = channel_stats(signal);
    let mut values = signal.values.clone();
    for (mut row, st) in values.rows_mut().into_iter().zip(&stats) {
        row.mapv_inplace(|x| st.z(x));
    }
    MultivariateSignal {
        values,
        labels: signal.labels.clone(),
    }
}
