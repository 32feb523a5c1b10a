//! Dispersion-pattern histograms and their normalized Shannon entropy.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// A dispersion pattern: `m` class labels, each in `1..=c`.
pub type Pattern = Vec<u16>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispersionHistogram {
    m: usize,
    c: usize,
    counts: BTreeMap<Pattern, u64>,
    total: u64,
}

impl DispersionHistogram {
    /// Builds a histogram from explicit counts. Zero counts are dropped.
    pub fn from_counts(
        m: usize,
        c: usize,
        counts: impl IntoIterator<Item = (Pattern, u64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut total = 0u64;
        for (pattern, n) in counts {
            if pattern.len() != m || pattern.iter().any(|&k| k == 0 || k as usize > c) {
                return Err(Error::InvalidInput(format!(
                    "pattern {pattern:?} is not a length-{m} word over 1..={c}"
                )));
            }
            if n > 0 {
                *map.entry(pattern).or_insert(0) += n;
                total += n;
            }
        }
        Ok(Self {
            m,
            c,
            counts: map,
            total,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// Number of embedding vectors counted.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct patterns observed.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, pattern: &[u16]) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pattern, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// `-Σ p ln p / ln(c^m)`, clamped to `[0, 1]`.
    pub fn entropy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let total = self.total as f64;
        let h: f64 = self
            .counts
            .values()
            .map(|&n| {
                let q = n as f64 / total;
                -q * q.ln()
            })
            .sum();
        let h = h / (self.m as f64 * (self.c as f64).ln());
        if h <= 0.0 {
            0.0
        } else {
            h.min(1.0)
        }
    }

    /// Merges another histogram with the same `(m, c)`.
    pub fn merge(&mut self, other: &DispersionHistogram) {
        assert_eq!((self.m, self.c), (other.m, other.c));
        for (k, &v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
        self.total += other.total;
    }
}

const DENSE_LIMIT: u64 = 1 << 20;

/// Accumulates base-`c` pattern codes, dense when `c^m` is small.
pub(crate) struct PatternCounter {
    m: usize,
    c: usize,
    dense: Option<Vec<u64>>,
    sparse: HashMap<u64, u64>,
}

impl PatternCounter {
    pub(crate) fn new(m: usize, c: usize) -> Self {
        let space = (c as u64).checked_pow(m as u32);
        let dense = match space {
            Some(s) if s <= DENSE_LIMIT => Some(vec![0; s as usize]),
            _ => None,
        };
        Self {
            m,
            c,
            dense,
            sparse: HashMap::new(),
        }
    }

    /// `code` must be `Σ (class_k - 1) c^(m-1-k)`.
    #[inline]
    pub(crate) fn add(&mut self, code: u64) {
        match &mut self.dense {
            Some(d) => d[code as usize] += 1,
            None => *self.sparse.entry(code).or_insert(0) += 1,
        }
    }

    fn decode(&self, mut code: u64) -> Pattern {
        let mut out = vec![0u16; self.m];
        for slot in out.iter_mut().rev() {
            *slot = (code % self.c as u64) as u16 + 1;
            code /= self.c as u64;
        }
        out
    }

    pub(crate) fn into_histogram(self) -> DispersionHistogram {
        let entries: Vec<(u64, u64)> = match &self.dense {
            Some(d) => d
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(code, &n)| (code as u64, n))
                .collect(),
            None => self.sparse.iter().map(|(&k, &v)| (k, v)).collect(),
        };
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for (code, n) in entries {
            counts.insert(self.decode(code), n);
            total += n;
        }
        DispersionHistogram {
            m: self.m,
            c: self.c,
            counts,
            total,
        }
    }
}
