//! Estimate channels and the effective pmf of the technology's output.
//!
//! An [`EstimateChannel`] is a row-stochastic `M x M` matrix whose entry
//! `(m, n)` is the probability that true element `m` is reported as `n`.
//! Pushing the prior through the channel gives the distribution of the
//! estimate, which is the only quantity the discovery dynamics depend on.

use crate::error::{Error, Result};
use crate::model::{Pmf, Universe, SUM_TOLERANCE};

fn validate_stochastic_rows(what: &str, rows: &[Vec<f64>], width: Option<usize>) -> Result<(usize, Vec<f64>)> {
    let Some(first) = rows.first() else {
        return Err(Error::Validation(format!("{what} has no rows")));
    };
    let cols = width.unwrap_or(first.len());
    if cols == 0 {
        return Err(Error::Validation(format!("{what} has no columns")));
    }
    let mut flat = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Validation(format!(
                "{what} row {} has {} entries, expected {cols}",
                i + 1,
                row.len()
            )));
        }
        if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Validation(format!(
                "{what} row {} column {} is {v}; entries must be finite and nonnegative",
                i + 1,
                j + 1
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "{what} row {} sums to {sum}, expected 1",
                i + 1
            )));
        }
        flat.extend(row.iter().map(|v| v / sum));
    }
    Ok((cols, flat))
}

/// Row-stochastic misclassification matrix `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateChannel {
    size: usize,
    // row-major, entry (m, n) at m * size + n
    entries: Vec<f64>,
}

impl EstimateChannel {
    /// Validates a square row-stochastic matrix and renormalizes its rows.
    pub fn new(matrix: &[Vec<f64>]) -> Result<Self> {
        let (cols, entries) = validate_stochastic_rows("channel", matrix, None)?;
        if cols != matrix.len() {
            return Err(Error::Validation(format!(
                "channel must be square, got {} x {cols}",
                matrix.len()
            )));
        }
        Ok(EstimateChannel { size: cols, entries })
    }

    pub fn identity(universe: Universe) -> Self {
        let m = universe.size();
        let mut entries = vec![0.0; m * m];
        (0..m).for_each(|i| entries[i * m + i] = 1.0);
        EstimateChannel { size: m, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// True when every row puts all its mass on the diagonal.
    pub fn is_identity(&self) -> bool {
        self.rows().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, &v)| v == if i == j { 1.0 } else { 0.0 })
        })
    }

    /// `Pr(estimate = to | truth = from)`, both 1-based.
    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.entries[(from - 1) * self.size + (to - 1)]
    }

    /// Row of the 1-based true element `from`.
    pub fn row(&self, from: usize) -> &[f64] {
        let start = (from - 1) * self.size;
        &self.entries[start..start + self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.size)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

/// Finite observation model: entry `(m, x)` is `Pr(observation x | element m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    elements: usize,
    alphabet: usize,
    likelihood: Vec<f64>,
}

impl ObservationModel {
    pub fn new(likelihood: &[Vec<f64>]) -> Result<Self> {
        let (alphabet, flat) = validate_stochastic_rows("likelihood", likelihood, None)?;
        Ok(ObservationModel {
            elements: likelihood.len(),
            alphabet,
            likelihood: flat,
        })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// `Pr(x | m)` for 1-based element `m` and 0-based observation symbol `x`.
    pub fn likelihood(&self, element: usize, observation: usize) -> f64 {
        self.likelihood[(element - 1) * self.alphabet + observation]
    }
}

/// `M`-ary symmetric channel with total crossover probability `r`, spread
/// evenly as `r / (M - 1)` over the wrong elements.
pub fn symmetric_channel(universe: Universe, r: f64) -> Result<EstimateChannel> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::ParameterDomain {
            name: "r",
            value: r,
            reason: "crossover probability must lie in [0, 1]",
        });
    }
    let m = universe.size();
    if m == 1 {
        if r > 0.0 {
            return Err(Error::ParameterDomain {
                name: "r",
                value: r,
                reason: "a single-element universe admits no crossover",
            });
        }
        return Ok(EstimateChannel::identity(universe));
    }
    let off = r / (m - 1) as f64;
    let entries = (0..m * m).map(|k| if k / m == k % m { 1.0 - r } else { off }).collect();
    Ok(EstimateChannel { size: m, entries })
}

/// Validated channel from an explicit matrix.
pub fn explicit_channel(matrix: &[Vec<f64>]) -> Result<EstimateChannel> {
    EstimateChannel::new(matrix)
}

/// Channel induced by a MAP decision rule over a finite observation model.
///
/// Observation `x` is decoded as `argmax_m prior_m * Pr(x | m)`; ties go to
/// the smallest element index. Entry `(m, n)` accumulates `Pr(x | m)` over
/// every `x` decoded as `n`.
pub fn map_induced_channel(prior: &Pmf, obs: &ObservationModel) -> Result<EstimateChannel> {
    let m = prior.len();
    if obs.elements() != m {
        return Err(Error::DimensionMismatch {
            what: "likelihood rows",
            expected: m,
            found: obs.elements(),
        });
    }
    let mut entries = vec![0.0; m * m];
    for x in 0..obs.alphabet_size() {
        let mut decision = 0;
        let mut best = prior.weights()[0] * obs.likelihood(1, x);
        for (i, &p) in prior.weights().iter().enumerate().skip(1) {
            let score = p * obs.likelihood(i + 1, x);
            if score > best {
                best = score;
                decision = i;
            }
        }
        for from in 0..m {
            entries[from * m + decision] += obs.likelihood(from + 1, x);
        }
    }
    let rows: Vec<Vec<f64>> = entries.chunks_exact(m).map(<[f64]>::to_vec).collect();
    EstimateChannel::new(&rows)
}

/// Distribution of the estimate: `p~_n = sum_m p_m r_mn`.
pub fn effective_pmf(prior: &Pmf, channel: &EstimateChannel) -> Result<Pmf> {
    if prior.len() != channel.size() {
        return Err(Error::DimensionMismatch {
            what: "channel",
            expected: prior.len(),
            found: channel.size(),
        });
    }
    let mut out = vec![0.0; prior.len()];
    for (p, row) in prior.weights().iter().zip(channel.rows()) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += p * r;
        }
    }
    Pmf::new(out)
}
