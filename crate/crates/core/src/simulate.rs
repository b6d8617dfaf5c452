//! Seeded Monte Carlo simulation of the discovery process.
//!
//! Each step draws a true element from the prior, passes it through the
//! estimate channel, and adds the estimate to the known set if it is new.
//! Membership is decided on the estimate; the true element is never
//! consulted.
//!
//! # Reproducibility
//!
//! Run `i` of an ensemble uses its own ChaCha8 stream seeded with
//! [`stream_seed`]`(master_seed, i)`, so a run's trajectory depends only on
//! the pair `(master_seed, i)`. Every step consumes exactly two uniform
//! draws (true element, then estimate), also for the identity channel.
//! Ensemble statistics are reduced in run-index order after all runs
//! finish, making the output independent of the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::EstimateChannel;
use crate::error::{Error, Result};
use crate::model::{KnownSet, Pmf, QualityVector};

/// Inverse-CDF draw: the smallest 1-based element whose cumulative weight
/// exceeds `draw`.
pub fn sample_categorical(weights: &Pmf, draw: f64) -> usize {
    CategoricalSampler::new(weights.weights()).sample(draw)
}

/// Cumulative table for repeated inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl CategoricalSampler {
    pub fn new(weights: &[f64]) -> Self {
        let cumulative = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        CategoricalSampler {
            cumulative,
            last_positive,
        }
    }

    /// Maps `draw` in `[0, 1)` to a 1-based element. Draws beyond the
    /// rounded total mass fall back to the last element of positive weight.
    pub fn sample(&self, draw: f64) -> usize {
        let i = self.cumulative.partition_point(|&c| c <= draw);
        i.min(self.last_positive) + 1
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index`'s private stream:
/// `splitmix64(splitmix64(master_seed) ^ run_index)`.
pub fn stream_seed(master_seed: u64, run_index: u64) -> u64 {
    mix64(mix64(master_seed) ^ run_index)
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub prior: Pmf,
    pub channel: EstimateChannel,
    pub initial: KnownSet,
    pub quality: Option<QualityVector>,
    pub horizon: u64,
    pub n_runs: u64,
    pub master_seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.prior.len();
        if self.channel.size() != m {
            return Err(Error::DimensionMismatch {
                what: "channel",
                expected: m,
                found: self.channel.size(),
            });
        }
        if self.initial.mask().len() != m {
            return Err(Error::DimensionMismatch {
                what: "initial set",
                expected: m,
                found: self.initial.mask().len(),
            });
        }
        if let Some(q) = &self.quality {
            if q.len() != m {
                return Err(Error::DimensionMismatch {
                    what: "quality vector",
                    expected: m,
                    found: q.len(),
                });
            }
        }
        if self.n_runs == 0 {
            return Err(Error::Validation("n_runs must be at least 1".into()));
        }
        Ok(())
    }
}

/// One simulated run: `sizes[t] = N_t` and optionally `qualities[t] = Q_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub run_index: u64,
    pub sizes: Vec<usize>,
    pub qualities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStats {
    pub n_runs: u64,
    pub mean_size: Vec<f64>,
    pub stderr_size: Vec<f64>,
    pub mean_quality: Option<Vec<f64>>,
    pub stderr_quality: Option<Vec<f64>>,
}

struct Samplers {
    prior: CategoricalSampler,
    rows: Vec<CategoricalSampler>,
}

impl Samplers {
    fn new(config: &SimulationConfig) -> Self {
        Samplers {
            prior: CategoricalSampler::new(config.prior.weights()),
            rows: config.channel.rows().map(CategoricalSampler::new).collect(),
        }
    }
}

fn run_with(config: &SimulationConfig, samplers: &Samplers, run_index: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.master_seed, run_index));
    let mut known = config.initial.mask().to_vec();
    let mut size = config.initial.len();
    let q = config.quality.as_ref().map(QualityVector::values);
    let mut quality = q.map(|q| known.iter().zip(q).filter(|(k, _)| **k).map(|(_, v)| v).sum::<f64>());

    let steps = config.horizon as usize;
    let mut sizes = Vec::with_capacity(steps + 1);
    let mut qualities = quality.map(|_| Vec::with_capacity(steps + 1));
    sizes.push(size);
    if let (Some(qs), Some(v)) = (qualities.as_mut(), quality) {
        qs.push(v);
    }
    for _ in 0..steps {
        let truth = samplers.prior.sample(rng.random::<f64>());
        let estimate = samplers.rows[truth - 1].sample(rng.random::<f64>());
        let slot = &mut known[estimate - 1];
        if !*slot {
            *slot = true;
            size += 1;
            if let (Some(acc), Some(q)) = (quality.as_mut(), q) {
                *acc += q[estimate - 1];
            }
        }
        sizes.push(size);
        if let (Some(qs), Some(v)) = (qualities.as_mut(), quality) {
            qs.push(v);
        }
    }
    Trajectory {
        run_index,
        sizes,
        qualities,
    }
}

/// Simulates run `run_index` of `config`.
pub fn simulate_run(config: &SimulationConfig, run_index: u64) -> Result<Trajectory> {
    config.validate()?;
    if run_index >= config.n_runs {
        return Err(Error::Validation(format!(
            "run_index {run_index} outside 0..{}",
            config.n_runs
        )));
    }
    Ok(run_with(config, &Samplers::new(config), run_index))
}

/// Per-step sample mean and standard error (`sd / sqrt(n)`, zero when
/// `n = 1`), summed in row order.
fn mean_and_stderr<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, len: usize, n: u64) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut mean = vec![0.0; len];
    for row in rows.clone() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    if n < 2 {
        return (mean, vec![0.0; len]);
    }
    let mut ss = vec![0.0; len];
    for row in rows {
        ss.iter_mut()
            .zip(row.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    let stderr = ss.into_iter().map(|s| (s / (nf - 1.0)).sqrt() / nf.sqrt()).collect();
    (mean, stderr)
}

/// Runs all `n_runs` trajectories on the global rayon pool.
pub fn simulate_ensemble(config: &SimulationConfig) -> Result<TrajectoryStats> {
    simulate_ensemble_with_workers(config, None)
}

/// Runs all trajectories on a dedicated pool of `workers` threads (or the
/// global pool for `None`). The result does not depend on `workers`.
pub fn simulate_ensemble_with_workers(config: &SimulationConfig, workers: Option<usize>) -> Result<TrajectoryStats> {
    config.validate()?;
    let samplers = Samplers::new(config);
    let simulate = || -> Vec<Trajectory> {
        (0..config.n_runs)
            .into_par_iter()
            .map(|i| run_with(config, &samplers, i))
            .collect()
    };
    let runs = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Validation(format!("cannot start {w} workers: {e}")))?
            .install(simulate),
        None => simulate(),
    };
    Ok(aggregate(&runs, config.horizon))
}

/// Reduces trajectories (assumed to be in run-index order) into statistics.
pub fn aggregate(runs: &[Trajectory], horizon: u64) -> TrajectoryStats {
    let len = horizon as usize + 1;
    let n = runs.len() as u64;
    let sizes: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| r.sizes.iter().map(|&s| s as f64).collect())
        .collect();
    let (mean_size, stderr_size) = mean_and_stderr(sizes.iter().map(Vec::as_slice), len, n);
    let (mean_quality, stderr_quality) = if runs.iter().all(|r| r.qualities.is_some()) && !runs.is_empty() {
        let rows = runs.iter().filter_map(|r| r.qualities.as_deref());
        let (m, s) = mean_and_stderr(rows, len, n);
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    TrajectoryStats {
        n_runs: n,
        mean_size,
        stderr_size,
        mean_quality,
        stderr_quality,
    }
}
