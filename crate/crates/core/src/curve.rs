//! Entropy-vs-scale curves aggregated over realizations.

use serde::{Deserialize, Serialize};

use crate::entropy::ScaleOutcome;

/// Settings echoed into every curve so a run can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub m: usize,
    pub c: usize,
    pub max_scale: usize,
    /// Human-readable graph descriptor, e.g. `zero`, `complete`, `file:g.json`.
    pub graph: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub tau: usize,
    /// `None` when the scale is undefined.
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub n_realizations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub undefined: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub method: String,
    pub config: CurveConfig,
    pub records: Vec<CurveRecord>,
}

/// Mean and sample standard deviation (denominator `n - 1`; zero for `n = 1`).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

impl EntropyCurve {
    /// Aggregates per-realization scale outcomes. Each inner vector covers
    /// `tau = 1..=max_scale` in order. A scale is reported as undefined if
    /// any realization failed there.
    pub fn from_realizations(
        method: impl Into<String>,
        config: CurveConfig,
        realizations: &[Vec<ScaleOutcome>],
    ) -> Self {
        let scales = realizations.first().map_or(0, Vec::len);
        let records = (0..scales)
            .map(|s| {
                let tau = realizations[0][s].tau;
                let mut values = Vec::with_capacity(realizations.len());
                let mut failure = None;
                for r in realizations {
                    match &r[s].result {
                        Ok(single) => values.push(single.entropy),
                        Err(e) => {
                            failure.get_or_insert_with(|| e.to_string());
                        }
                    }
                }
                match failure {
                    None if !values.is_empty() => {
                        let (mean, sd) = mean_sd(&values);
                        CurveRecord {
                            tau,
                            mean: Some(mean),
                            sd: Some(sd),
                            n_realizations: values.len(),
                            undefined: None,
                        }
                    }
                    reason => CurveRecord {
                        tau,
                        mean: None,
                        sd: None,
                        n_realizations: realizations.len(),
                        undefined: Some(reason.unwrap_or_else(|| "no realizations".into())),
                    },
                }
            })
            .collect();
        Self {
            method: method.into(),
            config,
            records,
        }
    }

    pub fn record(&self, tau: usize) -> Option<&CurveRecord> {
        self.records.iter().find(|r| r.tau == tau)
    }

    pub fn means(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.mean).collect()
    }
}
