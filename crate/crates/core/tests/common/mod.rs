//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's evaluation paths.
#![allow(dead_code)]

/// `p~_n = Σ_m p_m R[m][n]`, from raw numbers.
pub fn push_forward(prior: &[f64], channel: &[Vec<f64>]) -> Vec<f64> {
    let m = prior.len();
    (0..m).map(|n| (0..m).map(|i| prior[i] * channel[i][n]).sum()).collect()
}

pub fn binomial_shape(m: usize, p: f64) -> Vec<f64> {
    use statrs::distribution::{Binomial, Discrete};
    let b = Binomial::new(p, (m - 1) as u64).unwrap();
    (0..m as u64).map(|k| b.pmf(k)).collect()
}

pub fn symmetric_rows(m: usize, r: f64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if i == j { 1.0 - r } else { r / (m - 1) as f64 })
                .collect()
        })
        .collect()
}

/// Exact `(E[N_T], E[Q_T])` by enumerating all `M^T` estimate sequences,
/// each weighted by the product of its estimate probabilities.
pub fn enumerate_expectations(p_tilde: &[f64], known: &[bool], quality: &[f64], horizon: u32) -> (f64, f64) {
    let m = p_tilde.len();
    let mut seq = vec![0usize; horizon as usize];
    let (mut size_acc, mut quality_acc) = (0.0, 0.0);
    loop {
        let mut set = known.to_vec();
        let mut weight = 1.0;
        for &e in &seq {
            weight *= p_tilde[e];
            set[e] = true;
        }
        let n = set.iter().filter(|&&k| k).count() as f64;
        let q: f64 = set.iter().zip(quality).filter(|(k, _)| **k).map(|(_, q)| q).sum();
        size_acc += weight * n;
        quality_acc += weight * q;

        // odometer increment
        let mut i = 0;
        loop {
            if i == seq.len() {
                return (size_acc, quality_acc);
            }
            seq[i] += 1;
            if seq[i] < m {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

pub fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m).map(move |bits| (0..m).filter(|i| bits & (1 << i) != 0).map(|i| i + 1).collect())
}
