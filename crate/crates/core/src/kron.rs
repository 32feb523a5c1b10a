//! Powers of the time-by-channel product adjacency
//! `A = P ⊗ I_p + I_N ⊗ G`, where `P` is the directed path on `N` time
//! steps and `G` the channel interaction graph.
//!
//! The two Kronecker summands commute, so
//! `A^k = Σ_j C(k, j) · P^j ⊗ G^(k-j)`, and `P^j` is a plain shift by `j`
//! steps. [`apply_hop`] and [`build_hop_basis`] use that identity to apply
//! `A^k` to a signal in `O(k·N·p²)` time without forming any `Np x Np`
//! matrix. The dense builders in this module exist as oracles for tests
//! and for tiny instances.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::signal::MultivariateSignal;

/// Default side-length cap for dense oracle matrices.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// `k`-th power of the directed path adjacency on `n` vertices: ones at
/// `(i, i + k)` while `i + k < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathShift {
    n: usize,
    k: usize,
}

impl PathShift {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Entry at zero-based `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j == i + self.k && j < self.n {
            1.0
        } else {
            0.0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.k >= self.n
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| self.entry(i, j))
    }
}

pub fn path_power(n: usize, k: usize) -> Result<PathShift> {
    if n == 0 {
        return Err(Error::InvalidDimension {
            what: "path length",
            value: 0,
        });
    }
    Ok(PathShift { n, k })
}

/// Kronecker product of two dense matrices.
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::SizeCap { size, cap })
    } else {
        Ok(())
    }
}

/// Dense `Np x Np` adjacency of the product graph.
pub fn product_adjacency(n: usize, graph: &WeightedGraph, cap: usize) -> Result<Array2<f64>> {
    let path = path_power(n, 1)?;
    let p = graph.n();
    check_cap(n * p, cap)?;
    Ok(kron(&path.to_dense(), &Array2::eye(p)) + kron(&Array2::eye(n), graph.weights()))
}

/// Reference power by repeated multiplication.
pub fn naive_power(m: &Array2<f64>, k: usize, cap: usize) -> Result<Array2<f64>> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch {
            context: "naive_power columns",
            expected: rows,
            found: cols,
        });
    }
    check_cap(rows, cap)?;
    let mut acc = Array2::eye(rows);
    for _ in 0..k {
        acc = acc.dot(m);
    }
    Ok(acc)
}

/// Row `k` of Pascal's triangle, exact.
pub fn binomial_row(k: usize) -> Result<Vec<u128>> {
    let mut row = vec![1u128];
    for _ in 0..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(1);
        for w in row.windows(2) {
            next.push(
                w[0].checked_add(w[1])
                    .ok_or(Error::BinomialOverflow { k })?,
            );
        }
        next.push(1);
        row = next;
    }
    Ok(row)
}

/// `G^0 ..= G^max` as dense `p x p` matrices.
pub fn channel_powers(graph: &WeightedGraph, max: usize) -> Vec<Array2<f64>> {
    let p = graph.n();
    let mut out = Vec::with_capacity(max + 1);
    out.push(Array2::eye(p));
    for q in 1..=max {
        let next = out[q - 1].dot(graph.weights());
        out.push(next);
    }
    out
}

/// One summand `coefficient · P^j ⊗ G^(k-j)` of the binomial expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTerm {
    pub coefficient: u128,
    pub shift: PathShift,
    pub channel_power: Array2<f64>,
}

/// `A^k` held as its binomial expansion, ordered by path exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPower {
    pub n: usize,
    pub channel_graph: WeightedGraph,
    pub k: usize,
    pub terms: Vec<PowerTerm>,
}

impl ProductPower {
    /// Sums the Kronecker terms into a dense matrix.
    pub fn expand_dense(&self, cap: usize) -> Result<Array2<f64>> {
        let p = self.channel_graph.n();
        check_cap(self.n * p, cap)?;
        let mut acc = Array2::zeros((self.n * p, self.n * p));
        for term in &self.terms {
            if term.shift.is_zero() {
                continue;
            }
            acc = acc + kron(&term.shift.to_dense(), &term.channel_power) * term.coefficient as f64;
        }
        Ok(acc)
    }
}

pub fn product_power_terms(n: usize, graph: &WeightedGraph, k: usize) -> Result<ProductPower> {
    let binom = binomial_row(k)?;
    let powers = channel_powers(graph, k);
    let terms = (0..=k)
        .map(|j| {
            Ok(PowerTerm {
                coefficient: binom[j],
                shift: path_power(n, j)?,
                channel_power: powers[k - j].clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductPower {
        n,
        channel_graph: graph.clone(),
        k,
        terms,
    })
}

/// Row-normalized `k`-hop aggregate of a vectorized signal.
#[derive(Debug, Clone, PartialEq)]
pub struct HopColumn {
    /// Entry `t * p + ch`; zero where invalid.
    pub values: Vec<f64>,
    /// False where the row sum of `A^k` is zero.
    pub valid: Vec<bool>,
}

/// Columns `y_0 ..= y_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopBasis {
    pub n: usize,
    pub p: usize,
    pub columns: Vec<HopColumn>,
}

impl HopBasis {
    pub fn m(&self) -> usize {
        self.columns.len()
    }

    /// True when every column is valid at vectorized index `i`.
    pub fn row_valid(&self, i: usize) -> bool {
        self.columns.iter().all(|c| c.valid[i])
    }
}

/// Diagonal normalization: divide by the row sum of `A^k`, masking empty rows.
#[inline]
fn normalize(aggregate: f64, row_sum: f64) -> Option<f64> {
    (row_sum > 0.0).then(|| aggregate / row_sum)
}

/// Per-time-step channel propagation `G^q x_t` for `q = 0..=max`, plus the
/// matching row sums `G^q 1`.
struct ChannelPropagation {
    n: usize,
    p: usize,
    /// `propagated[q][t * p + ch]`
    propagated: Vec<Vec<f64>>,
    row_sums: Vec<Vec<f64>>,
}

impl ChannelPropagation {
    fn new(signal: &MultivariateSignal, graph: &WeightedGraph, max: usize) -> Result<Self> {
        let p = signal.channels();
        let n = signal.len();
        if graph.n() != p {
            return Err(Error::DimensionMismatch {
                context: "interaction graph vertices vs channels",
                expected: p,
                found: graph.n(),
            });
        }
        let w = graph.weights();
        let zero_graph = graph.is_zero();
        let mut propagated = vec![signal.vectorize()];
        let mut row_sums = vec![vec![1.0; p]];
        let mut ones = Array1::<f64>::ones(p);
        for q in 1..=max {
            if zero_graph {
                propagated.push(vec![0.0; n * p]);
                row_sums.push(vec![0.0; p]);
                continue;
            }
            let prev = &propagated[q - 1];
            let mut next = vec![0.0; n * p];
            for t in 0..n {
                let src = &prev[t * p..(t + 1) * p];
                let dst = &mut next[t * p..(t + 1) * p];
                for (i, out) in dst.iter_mut().enumerate() {
                    let row = w.row(i);
                    *out = row.iter().zip(src).map(|(a, b)| a * b).sum();
                }
            }
            propagated.push(next);
            ones = w.dot(&ones);
            row_sums.push(ones.to_vec());
        }
        Ok(Self {
            n,
            p,
            propagated,
            row_sums,
        })
    }

    fn column(&self, k: usize, binom: &[u128]) -> HopColumn {
        let (n, p) = (self.n, self.p);
        let mut values = vec![0.0; n * p];
        let mut valid = vec![false; n * p];
        for t in 0..n {
            for ch in 0..p {
                let mut aggregate = 0.0;
                let mut row_sum = 0.0;
                for (j, &coef) in binom.iter().enumerate().take(k + 1) {
                    if t + j >= n {
                        break;
                    }
                    let coef = coef as f64;
                    aggregate += coef * self.propagated[k - j][(t + j) * p + ch];
                    row_sum += coef * self.row_sums[k - j][ch];
                }
                if let Some(y) = normalize(aggregate, row_sum) {
                    values[t * p + ch] = y;
                    valid[t * p + ch] = true;
                }
            }
        }
        HopColumn { values, valid }
    }
}

/// `D_k A^k v` for the vectorized signal `v`, with `D_k` the reciprocal row
/// sums of `A^k`.
pub fn apply_hop(signal: &MultivariateSignal, graph: &WeightedGraph, k: usize) -> Result<HopColumn> {
    let binom = binomial_row(k)?;
    let prop = ChannelPropagation::new(signal, graph, k)?;
    Ok(prop.column(k, &binom))
}

pub fn build_hop_basis(
    signal: &MultivariateSignal,
    graph: &WeightedGraph,
    m: usize,
) -> Result<HopBasis> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension must be at least 2, got {m}"
        )));
    }
    let prop = ChannelPropagation::new(signal, graph, m - 1)?;
    let columns = (0..m)
        .map(|k| Ok(prop.column(k, &binomial_row(k)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HopBasis {
        n: prop.n,
        p: prop.p,
        columns,
    })
}
