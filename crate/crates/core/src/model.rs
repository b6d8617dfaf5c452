//! Domain types: the element universe, probability and quality vectors, and
//! the explorer's known set.
//!
//! Elements are dense 1-based indices `1..=M`. Storage is 0-based; every
//! public function that accepts or returns an element index uses the
//! 1-based convention.

use crate::error::{Error, Result};

/// Raw inputs may deviate from unit mass by at most this much before being
/// rejected. Accepted inputs are renormalized.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// The finite universe `{1, ..., M}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    size: usize,
}

impl Universe {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::ParameterDomain {
                name: "M",
                value: 0.0,
                reason: "universe must contain at least one element",
            });
        }
        Ok(Universe { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Iterates over the 1-based element indices.
    pub fn elements(&self) -> impl Iterator<Item = usize> {
        1..=self.size
    }
}

/// A probability mass function over the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    weights: Vec<f64>,
}

impl Pmf {
    /// Validates nonnegativity and unit mass (within [`SUM_TOLERANCE`]), then
    /// divides out the residual so the stored weights sum to 1 to rounding.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Validation("pmf must have at least one entry".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!(
                    "pmf entry at element {} is {w}; entries must be finite and nonnegative",
                    i + 1
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "pmf entries sum to {sum} (deviation {:e} from 1)",
                sum - 1.0
            )));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Pmf { weights })
    }

    pub fn universe(&self) -> Universe {
        Universe {
            size: self.weights.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights in element order (index 0 holds element 1).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of the 1-based `element`.
    pub fn weight(&self, element: usize) -> f64 {
        self.weights[element - 1]
    }
}

/// Per-element quality factors, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityVector {
    values: Vec<f64>,
}

impl QualityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("quality vector must have at least one entry".into()));
        }
        if let Some((i, q)) = values.iter().enumerate().find(|(_, q)| !q.is_finite() || **q < 0.0) {
            return Err(Error::Validation(format!(
                "quality at element {} is {q}; qualities must be finite and nonnegative",
                i + 1
            )));
        }
        Ok(QualityVector { values })
    }

    /// All-ones quality; `Q_t` then equals the set size.
    pub fn unit(universe: Universe) -> Self {
        QualityVector {
            values: vec![1.0; universe.size()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The explorer's known set `Θ_t`, a subset of the universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KnownSet {
    members: Vec<bool>,
}

impl KnownSet {
    pub fn empty(universe: Universe) -> Self {
        KnownSet {
            members: vec![false; universe.size()],
        }
    }

    pub fn full(universe: Universe) -> Self {
        KnownSet {
            members: vec![true; universe.size()],
        }
    }

    /// Builds a set from 1-based indices. Duplicates are allowed and collapse.
    pub fn from_indices(universe: Universe, indices: &[usize]) -> Result<Self> {
        let mut set = Self::empty(universe);
        for &i in indices {
            if i == 0 || i > universe.size() {
                return Err(Error::Validation(format!(
                    "element index {i} outside 1..={}",
                    universe.size()
                )));
            }
            set.members[i - 1] = true;
        }
        Ok(set)
    }

    /// The first `count` elements `{1, ..., count}`.
    pub fn first(universe: Universe, count: usize) -> Result<Self> {
        if count > universe.size() {
            return Err(Error::Validation(format!(
                "cannot know {count} elements of a universe of size {}",
                universe.size()
            )));
        }
        let mut set = Self::empty(universe);
        set.members[..count].iter_mut().for_each(|m| *m = true);
        Ok(set)
    }

    pub fn universe(&self) -> Universe {
        Universe {
            size: self.members.len(),
        }
    }

    pub fn contains(&self, element: usize) -> bool {
        element >= 1 && self.members.get(element - 1).copied().unwrap_or(false)
    }

    /// `N_t = |Θ_t|`.
    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i + 1))
            .collect()
    }

    /// Membership mask in element order (index 0 holds element 1).
    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    /// `Q_t`, the summed quality of the members.
    pub fn quality(&self, q: &QualityVector) -> Result<f64> {
        known_set_quality(self, q)
    }
}

pub fn make_uniform_prior(universe: Universe) -> Pmf {
    let m = universe.size();
    Pmf {
        weights: vec![1.0 / m as f64; m],
    }
}

/// Binomial-shaped prior: element `m` gets `C(M-1, m-1) p^(m-1) (1-p)^(M-m)`.
pub fn make_binomial_prior(universe: Universe, p: f64) -> Result<Pmf> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterDomain {
            name: "p",
            value: p,
            reason: "success probability must lie in [0, 1]",
        });
    }
    let n = universe.size() - 1;
    let weights = if p == 0.0 || p == 1.0 {
        let hot = if p == 0.0 { 0 } else { n };
        (0..=n).map(|k| if k == hot { 1.0 } else { 0.0 }).collect()
    } else {
        // log-space keeps large M from overflowing the coefficient
        let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
        let mut ln_choose = 0.0;
        (0..=n)
            .map(|k| {
                if k > 0 {
                    ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
                }
                (ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q).exp()
            })
            .collect()
    };
    Pmf::new(weights)
}

/// Validated prior from explicit weights.
pub fn make_explicit_prior(weights: Vec<f64>) -> Result<Pmf> {
    Pmf::new(weights)
}

/// Summed quality of the members of `set`. Empty set gives 0.
pub fn known_set_quality(set: &KnownSet, q: &QualityVector) -> Result<f64> {
    if q.len() != set.members.len() {
        return Err(Error::DimensionMismatch {
            what: "quality vector",
            expected: set.members.len(),
            found: q.len(),
        });
    }
    Ok(set
        .members
        .iter()
        .zip(q.values())
        .filter(|(m, _)| **m)
        .map(|(_, q)| q)
        .sum())
}
