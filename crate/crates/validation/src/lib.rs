//! Reference oracles and random instance generators for the acceptance
//! suite in `tests/acceptance.rs`.
//!
//! Nothing here reuses the closed forms under test: expectations come from
//! enumerating every estimate sequence.

use std::path::PathBuf;

use coupon_discovery::{
    effective_pmf, explicit_channel, make_explicit_prior, map_induced_channel, symmetric_channel, EstimateChannel,
    KnownSet, ObservationModel, Pmf, QualityVector, Universe,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Exact `(E[N_t], E[Q_t])` by enumerating all `M^t` estimate sequences
/// weighted by their probability.
pub fn enumerate_expectations(p_tilde: &[f64], initial: &[bool], q: &[f64], horizon: u32) -> (f64, f64) {
    let m = p_tilde.len();
    let mut size = 0.0;
    let mut quality = 0.0;
    let mut seq = vec![0usize; horizon as usize];
    loop {
        let weight: f64 = seq.iter().map(|&e| p_tilde[e]).product();
        if weight > 0.0 {
            let mut have = initial.to_vec();
            for &e in &seq {
                have[e] = true;
            }
            size += weight * have.iter().filter(|&&h| h).count() as f64;
            quality += weight * have.iter().zip(q).filter(|(h, _)| **h).map(|(_, q)| q).sum::<f64>();
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == seq.len() {
                return (size, quality);
            }
            seq[pos] += 1;
            if seq[pos] < m {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

/// Normalized random weights over `n` outcomes, about 15% of them zero
/// (never all).
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Identity, symmetric, explicit or MAP-induced channel, chosen uniformly.
pub fn random_channel(rng: &mut ChaCha8Rng, prior: &Pmf) -> EstimateChannel {
    let m = prior.len();
    let u = Universe::new(m).expect("prior is nonempty");
    match rng.random_range(0..4) {
        0 => EstimateChannel::identity(u),
        1 if m > 1 => symmetric_channel(u, rng.random::<f64>()).expect("r in [0, 1)"),
        2 => {
            let rows: Vec<Vec<f64>> = (0..m).map(|_| random_weights(rng, m)).collect();
            explicit_channel(&rows).expect("rows are pmfs")
        }
        _ => {
            let x = rng.random_range(1..=m + 1);
            let rows: Vec<Vec<f64>> = (0..m).map(|_| random_weights(rng, x)).collect();
            let obs = ObservationModel::new(&rows).expect("rows are pmfs");
            map_induced_channel(prior, &obs).expect("dimensions match")
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub p_tilde: Pmf,
    pub initial: KnownSet,
    pub quality: QualityVector,
    pub horizon: u64,
}

impl Instance {
    pub fn m(&self) -> usize {
        self.p_tilde.len()
    }
}

/// Random instance with `1 <= M <= max_m` and `0 <= T <= max_horizon`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_m: usize, max_horizon: u64) -> Instance {
    let m = rng.random_range(1..=max_m);
    let horizon = rng.random_range(0..=max_horizon);
    let universe = Universe::new(m).expect("m >= 1");
    let prior = make_explicit_prior(random_weights(rng, m)).expect("weights are a pmf");
    let channel = random_channel(rng, &prior);
    let p_tilde = effective_pmf(&prior, &channel).expect("dimensions match");
    let members: Vec<usize> = (1..=m).filter(|_| rng.random_bool(0.4)).collect();
    let initial = KnownSet::from_indices(universe, &members).expect("indices in range");
    let quality = QualityVector::new((0..m).map(|_| 5.0 * rng.random::<f64>()).collect()).expect("nonnegative");
    Instance {
        p_tilde,
        initial,
        quality,
        horizon,
    }
}

/// The `discovery` binary next to the running test executable, if it has
/// been built (it is whenever the whole workspace is tested).
pub fn discovery_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let bin = dir.join(format!("discovery{}", std::env::consts::EXE_SUFFIX));
    bin.is_file().then_some(bin)
}
