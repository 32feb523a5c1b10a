//! Inter-channel interaction graphs.
//!
//! Every constructor returns a [`WeightedGraph`] whose weights are square,
//! finite and nonnegative, and symmetric unless the graph is flagged
//! directed.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ChannelStats, MultivariateSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Array2<f64>,
    directed: bool,
}

impl WeightedGraph {
    pub fn new(weights: Array2<f64>, directed: bool) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows == 0 {
            return Err(Error::InvalidDimension {
                what: "vertex count",
                value: 0,
            });
        }
        if rows != cols {
            return Err(Error::DimensionMismatch {
                context: "adjacency matrix columns",
                expected: rows,
                found: cols,
            });
        }
        for ((i, j), &w) in weights.indexed_iter() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight ({}, {}) = {w} is not a nonnegative finite number",
                    i + 1,
                    j + 1
                )));
            }
            if !directed && w != weights[[j, i]] {
                return Err(Error::InvalidInput(format!(
                    "undirected graph has asymmetric weights at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Self { weights, directed })
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Relabels vertices: vertex `i` of the result is vertex `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                context: "permutation length",
                expected: n,
                found: perm.len(),
            });
        }
        let w = Array2::from_shape_fn((n, n), |(i, j)| self.weights[[perm[i], perm[j]]]);
        Self::new(w, self.directed)
    }
}

/// On-disk representation: `{"n": .., "directed": .., "weights": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n: usize,
    pub directed: bool,
    pub weights: Vec<Vec<f64>>,
}

impl From<&WeightedGraph> for GraphDocument {
    fn from(g: &WeightedGraph) -> Self {
        Self {
            n: g.n(),
            directed: g.directed,
            weights: g.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

impl TryFrom<GraphDocument> for WeightedGraph {
    type Error = Error;

    fn try_from(doc: GraphDocument) -> Result<Self> {
        if doc.weights.len() != doc.n {
            return Err(Error::DimensionMismatch {
                context: "graph rows",
                expected: doc.n,
                found: doc.weights.len(),
            });
        }
        if let Some(row) = doc.weights.iter().find(|r| r.len() != doc.n) {
            return Err(Error::DimensionMismatch {
                context: "graph row length",
                expected: doc.n,
                found: row.len(),
            });
        }
        let flat: Vec<f64> = doc.weights.into_iter().flatten().collect();
        let w = Array2::from_shape_vec((doc.n, doc.n), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        WeightedGraph::new(w, doc.directed)
    }
}

/// Planar station coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StationLayout {
    ids: Vec<String>,
    positions: Vec<(f64, f64)>,
}

impl StationLayout {
    pub fn new(ids: Vec<String>, positions: Vec<(f64, f64)>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidDimension {
                what: "station count",
                value: 0,
            });
        }
        if ids.len() != positions.len() {
            return Err(Error::DimensionMismatch {
                context: "station ids",
                expected: positions.len(),
                found: ids.len(),
            });
        }
        if let Some(i) = positions
            .iter()
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "station {} has non-finite coordinates",
                ids[i]
            )));
        }
        Ok(Self { ids, positions })
    }

    pub fn from_positions(positions: Vec<(f64, f64)>) -> Result<Self> {
        let ids = (1..=positions.len()).map(|i| i.to_string()).collect();
        Self::new(ids, positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.positions[i];
        let (xj, yj) = self.positions[j];
        (xi - xj).hypot(yi - yj)
    }
}

/// Parameters of the truncated Gaussian distance kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Kernel variance: weights decay as `exp(-d^2 / (2 * sigma1_sq))`.
    pub sigma1_sq: f64,
    /// Cut-off distance; pairs farther apart get weight 0.
    pub sigma2: f64,
    /// Keep the literal `exp(0) = 1` self-weight on the diagonal.
    #[serde(default)]
    pub self_loops: bool,
}

impl KernelParams {
    pub fn new(sigma1_sq: f64, sigma2: f64) -> Self {
        Self {
            sigma1_sq,
            sigma2,
            self_loops: false,
        }
    }
}

fn check_vertices(p: usize) -> Result<()> {
    if p == 0 {
        Err(Error::InvalidDimension {
            what: "channel count",
            value: 0,
        })
    } else {
        Ok(())
    }
}

pub fn build_zero_graph(p: usize) -> Result<WeightedGraph> {
    check_vertices(p)?;
    Ok(WeightedGraph {
        weights: Array2::zeros((p, p)),
        directed: false,
    })
}

/// Unit weights between all distinct vertices, no self-loops.
pub fn build_complete_graph(p: usize) -> Result<WeightedGraph> {
    check_vertices(p)?;
    let weights = Array2::from_shape_fn((p, p), |(i, j)| if i == j { 0.0 } else { 1.0 });
    Ok(WeightedGraph {
        weights,
        directed: false,
    })
}

pub fn build_gaussian_kernel_graph(
    layout: &StationLayout,
    params: KernelParams,
) -> Result<WeightedGraph> {
    if !(params.sigma1_sq > 0.0 && params.sigma1_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma1_sq must be positive, got {}",
            params.sigma1_sq
        )));
    }
    if params.sigma2.is_nan() || params.sigma2 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be positive, got {}",
            params.sigma2
        )));
    }
    let n = layout.len();
    let weights = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j && !params.self_loops {
            return 0.0;
        }
        let d = layout.distance(i, j);
        if d <= params.sigma2 {
            (-d * d / (2.0 * params.sigma1_sq)).exp()
        } else {
            0.0
        }
    });
    WeightedGraph::new(weights, false)
}

/// Absolute Pearson correlation between channels, zero diagonal.
pub fn estimate_correlation_graph(signal: &MultivariateSignal) -> Result<WeightedGraph> {
    let p = signal.channels();
    let n = signal.len();
    if p < 2 {
        return Err(Error::InvalidDimension {
            what: "channel count (correlation graph needs at least 2)",
            value: p,
        });
    }
    if n < 3 {
        return Err(Error::InvalidDimension {
            what: "sample count (correlation graph needs at least 3)",
            value: n,
        });
    }
    let stats: Vec<ChannelStats> = (0..p)
        .map(|ch| ChannelStats::of(signal.channel(ch).iter()))
        .collect();
    if let Some(ch) = stats.iter().position(|s| s.sd == 0.0) {
        return Err(Error::DegenerateChannel { channel: ch + 1 });
    }
    let centered: Vec<Vec<f64>> = (0..p)
        .map(|ch| {
            signal
                .channel(ch)
                .iter()
                .map(|x| x - stats[ch].mean)
                .collect()
        })
        .collect();
    let mut weights = Array2::zeros((p, p));
    for i in 0..p {
        for j in (i + 1)..p {
            let sxy: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            let sxx: f64 = centered[i].iter().map(|a| a * a).sum();
            let syy: f64 = centered[j].iter().map(|b| b * b).sum();
            let r = (sxy / (sxx * syy).sqrt()).abs().min(1.0);
            weights[[i, j]] = r;
            weights[[j, i]] = r;
        }
    }
    WeightedGraph::new(weights, false)
}

/// Graph from a known correlation matrix: `|corr|` off the diagonal.
pub fn correlation_matrix_graph(corr: &Array2<f64>) -> Result<WeightedGraph> {
    let (p, q) = corr.dim();
    if p != q {
        return Err(Error::DimensionMismatch {
            context: "correlation matrix columns",
            expected: p,
            found: q,
        });
    }
    let weights = Array2::from_shape_fn((p, p), |(i, j)| {
        if i == j {
            0.0
        } else {
            corr[[i, j]].abs()
        }
    });
    WeightedGraph::new(weights, false)
}
