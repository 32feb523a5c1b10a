//! Seeded synthetic signals and the ERT feature transform.
//!
//! Randomness comes from ChaCha20. Channel `ch` of a signal generated with
//! seed `s` draws from `ChaCha20Rng::seed_from_u64(s)` on stream `ch`, so
//! channels are independent and any channel can be regenerated alone.
//! Ensemble realization `r` uses seed [`realization_seed`]`(s, r)`.

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ChannelStats, MultivariateSignal};

/// Identifies the sampling scheme; bump when any generator's output changes.
pub const GENERATOR_VERSION: &str = "chacha20-stream/standard-normal/v1";

/// Tolerance for near-PSD correlation matrices.
pub const PSD_TOLERANCE: f64 = 1e-10;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of realization `r`: `splitmix64(seed ^ splitmix64(r))`.
pub fn realization_seed(seed: u64, r: u64) -> u64 {
    splitmix64(seed ^ splitmix64(r))
}

fn channel_rng(seed: u64, channel: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(channel as u64);
    rng
}

fn normals(seed: u64, channel: usize, n: usize) -> Vec<f64> {
    let mut rng = channel_rng(seed, channel);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_shape(p: usize, n: usize, min_n: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidDimension {
            what: "channel count",
            value: p,
        });
    }
    if n < min_n {
        return Err(Error::InvalidDimension {
            what: "sample count",
            value: n,
        });
    }
    Ok(())
}

/// I.i.d. standard Gaussian channels.
pub fn gen_wgn(p: usize, n: usize, seed: u64) -> Result<MultivariateSignal> {
    check_shape(p, n, 2)?;
    MultivariateSignal::from_channels((0..p).map(|ch| normals(seed, ch, n)).collect())
}

/// Spectrally shaped white noise with power `∝ 1/f`, standardized.
fn pink_channel(seed: u64, channel: usize, n: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = normals(seed, channel, n)
        .into_iter()
        .map(|x| Complex::new(x, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex::new(0.0, 0.0);
    for (k, bin) in buf.iter_mut().enumerate().skip(1) {
        // symmetric frequency so the inverse stays real
        let f = k.min(n - k) as f64 / n as f64;
        *bin *= f.powf(-0.5);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let raw: Vec<f64> = buf.iter().map(|z| z.re).collect();
    let st = ChannelStats::of(raw.iter());
    let centered: Vec<f64> = raw.iter().map(|x| x - st.mean).collect();
    let mean = centered.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = centered.iter().map(|x| x - mean).collect();
    let sd = ChannelStats::of(centered.iter()).sd;
    centered.into_iter().map(|x| x / sd).collect()
}

pub fn gen_one_over_f(p: usize, n: usize, seed: u64) -> Result<MultivariateSignal> {
    check_shape(p, n, 4)?;
    let mut planner = FftPlanner::new();
    MultivariateSignal::from_channels((0..p).map(|ch| pink_channel(seed, ch, n, &mut planner)).collect())
}

/// Lower-triangular `L` with `L Lᵀ = corr`, tolerating semidefinite input.
pub fn correlation_factor(corr: &Array2<f64>) -> Result<Array2<f64>> {
    let (p, q) = corr.dim();
    if p != q || p == 0 {
        return Err(Error::DimensionMismatch {
            context: "correlation matrix columns",
            expected: p,
            found: q,
        });
    }
    for i in 0..p {
        if (corr[[i, i]] - 1.0).abs() > PSD_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "correlation matrix diagonal entry {} is {}, expected 1",
                i + 1,
                corr[[i, i]]
            )));
        }
        for j in 0..i {
            let (a, b) = (corr[[i, j]], corr[[j, i]]);
            if !a.is_finite() || (a - b).abs() > PSD_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "correlation matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut l = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let d = corr[[j, j]] - (0..j).map(|k| l[[j, k]] * l[[j, k]]).sum::<f64>();
        if d < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite { minor: j + 1 });
        }
        let pivot = if d > PSD_TOLERANCE { d.sqrt() } else { 0.0 };
        l[[j, j]] = pivot;
        for i in (j + 1)..p {
            let r = corr[[i, j]] - (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum::<f64>();
            if pivot > 0.0 {
                l[[i, j]] = r / pivot;
            } else if r.abs() > PSD_TOLERANCE.sqrt() {
                // singular leading block that row i cannot be expressed in
                return Err(Error::NotPositiveSemidefinite { minor: i + 1 });
            }
        }
    }
    Ok(l)
}

/// Gaussian channels with correlation `corr`: `L z` for i.i.d. normal `z`
/// drawn exactly as [`gen_wgn`] draws them.
pub fn gen_correlated(n: usize, corr: &Array2<f64>, seed: u64) -> Result<MultivariateSignal> {
    let p = corr.nrows();
    check_shape(p, n, 2)?;
    let l = correlation_factor(corr)?;
    let white = gen_wgn(p, n, seed)?;
    let mixed = l.dot(white.values());
    MultivariateSignal::new(mixed)
}

/// Trivariate `F(q)`: channels `1..=q` white Gaussian, the rest `1/f`, all
/// independent.
pub fn gen_mixture(q: usize, n: usize, seed: u64) -> Result<MultivariateSignal> {
    if q > 3 {
        return Err(Error::InvalidParameter(format!(
            "mixture WGN channel count must be in 0..=3, got {q}"
        )));
    }
    check_shape(3, n, 4)?;
    let mut planner = FftPlanner::new();
    let channels = (0..3)
        .map(|ch| {
            if ch < q {
                normals(seed, ch, n)
            } else {
                pink_channel(seed, ch, n, &mut planner)
            }
        })
        .collect();
    MultivariateSignal::from_channels(channels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Wgn,
    OneOverF,
    Correlated { corr: Vec<Vec<f64>> },
    Mixture { q: usize },
}

/// Full description of a generated signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
}

pub fn corr_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let p = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch {
            context: "correlation matrix row length",
            expected: p,
            found: r.len(),
        });
    }
    Array2::from_shape_vec((p, p), rows.iter().flatten().copied().collect())
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

impl GeneratorSpec {
    pub fn wgn(p: usize, n: usize, seed: u64) -> Self {
        Self { kind: GeneratorKind::Wgn, p, n, seed }
    }

    pub fn one_over_f(p: usize, n: usize, seed: u64) -> Self {
        Self { kind: GeneratorKind::OneOverF, p, n, seed }
    }

    pub fn mixture(q: usize, n: usize, seed: u64) -> Self {
        Self { kind: GeneratorKind::Mixture { q }, p: 3, n, seed }
    }

    pub fn correlated(corr: &Array2<f64>, n: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Correlated {
                corr: corr.rows().into_iter().map(|r| r.to_vec()).collect(),
            },
            p: corr.nrows(),
            n,
            seed,
        }
    }

    /// Same spec with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Theoretical correlation matrix of the channels.
    pub fn correlation(&self) -> Result<Array2<f64>> {
        match &self.kind {
            GeneratorKind::Correlated { corr } => corr_from_rows(corr),
            _ => Ok(Array2::eye(self.p)),
        }
    }

    pub fn generate(&self) -> Result<MultivariateSignal> {
        match &self.kind {
            GeneratorKind::Wgn => gen_wgn(self.p, self.n, self.seed),
            GeneratorKind::OneOverF => gen_one_over_f(self.p, self.n, self.seed),
            GeneratorKind::Mixture { q } => {
                if self.p != 3 {
                    return Err(Error::InvalidParameter("mixture signals are trivariate".into()));
                }
                gen_mixture(*q, self.n, self.seed)
            }
            GeneratorKind::Correlated { corr } => {
                let corr = corr_from_rows(corr)?;
                if corr.nrows() != self.p {
                    return Err(Error::DimensionMismatch {
                        context: "correlation matrix vs channel count",
                        expected: self.p,
                        found: corr.nrows(),
                    });
                }
                gen_correlated(self.n, &corr, self.seed)
            }
        }
    }
}

/// Per-electrode mean relative voltage change against a baseline frame.
///
/// `voltages` has shape `(electrodes, measurements, T)` and `baseline`
/// `(electrodes, measurements)`; the result has one channel per electrode.
pub fn ert_features(voltages: &Array3<f64>, baseline: &Array2<f64>) -> Result<MultivariateSignal> {
    let (electrodes, measurements, frames) = voltages.dim();
    if baseline.dim() != (electrodes, measurements) {
        return Err(Error::DimensionMismatch {
            context: "baseline shape (electrodes x measurements)",
            expected: electrodes * measurements,
            found: baseline.len(),
        });
    }
    if let Some(((i, j), _)) = baseline.indexed_iter().find(|(_, &v)| v == 0.0) {
        return Err(Error::InvalidBaseline {
            electrode: i + 1,
            measurement: j + 1,
        });
    }
    let features = Array2::from_shape_fn((electrodes, frames), |(i, t)| {
        let sum: f64 = (0..measurements)
            .map(|j| {
                let v0 = baseline[[i, j]];
                (voltages[[i, j, t]] - v0) / v0
            })
            .sum();
        sum / measurements as f64
    });
    MultivariateSignal::new(features)
}
