//! Closed-form expectation curves for the discovery process.
//!
//! Each step the technology emits an estimate drawn i.i.d. from the
//! effective pmf `p~`; an element outside the known set joins it the first
//! time it is emitted. An unknown element `θ` is therefore still missing
//! after `t` steps with probability `(1 - p~_θ)^t`, which gives
//!
//! ```text
//! E[N_t | Θ_0] = |Θ_0| + Σ_{θ ∉ Θ_0} (1 - (1 - p~_θ)^t)
//! E[Q_t | Θ_0] = Q_0   + Σ_{θ ∉ Θ_0} q_θ (1 - (1 - p~_θ)^t)
//! ```
//!
//! Expanding `(1 - p~)^t` binomially yields the alternating-sum forms
//! `|Θ_0| - Σ_k (-1)^k C(t, k) Σ_θ p~_θ^k`. Those cancel catastrophically
//! for large `t` and are provided only up to [`MAX_ALTERNATING_HORIZON`], to
//! cross-check the product form.

use crate::error::{Error, Result};
use crate::model::{KnownSet, Pmf, QualityVector};

/// Largest horizon for the alternating sums. `C(30, 15)` is well inside the
/// range where `f64` represents every binomial coefficient exactly.
pub const MAX_ALTERNATING_HORIZON: u64 = 30;

/// Expected value at each step `t = 0..=T`; `values()[0]` is the initial
/// condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationCurve {
    values: Vec<f64>,
}

impl ExpectationCurve {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn at(&self, t: u64) -> f64 {
        self.values[t as usize]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `1 - (1 - p)^t`: probability that an element of estimate mass `p` has
/// been emitted at least once within `t` steps.
pub fn hit_probability(p: f64, t: u64) -> f64 {
    if t == 0 || p == 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if p < 1e-8 || t > i32::MAX as u64 {
        -((t as f64) * (-p).ln_1p()).exp_m1()
    } else {
        1.0 - (1.0 - p).powi(t as i32)
    }
}

/// `(1 - p)^t`: probability that an element of estimate mass `p` is still
/// missing after `t` steps. Computed directly, so it keeps full relative
/// precision where [`hit_probability`] has already rounded to 1.
pub fn miss_probability(p: f64, t: u64) -> f64 {
    if t == 0 || p == 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    if t > i32::MAX as u64 {
        ((t as f64) * (-p).ln_1p()).exp()
    } else {
        (1.0 - p).powi(t as i32)
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}

/// Weighted discovery curve `w_0 + Σ_{θ∉Θ_0} w_θ (1 - (1 - p~_θ)^t)`.
fn weighted_curve(p_tilde: &Pmf, weights: &[f64], initial: &KnownSet, horizon: u64) -> ExpectationCurve {
    let start: f64 = initial
        .mask()
        .iter()
        .zip(weights)
        .filter(|(known, _)| **known)
        .map(|(_, w)| w)
        .sum();
    let missing: Vec<(f64, f64)> = initial
        .mask()
        .iter()
        .zip(weights.iter().zip(p_tilde.weights()))
        .filter(|(known, _)| !**known)
        .map(|(_, (&w, &p))| (w, p))
        .collect();
    let values = (0..=horizon)
        .map(|t| start + missing.iter().map(|&(w, p)| w * hit_probability(p, t)).sum::<f64>())
        .collect();
    ExpectationCurve { values }
}

/// Expected known-set size `E[N_t | Θ_0]` for `t = 0..=horizon`.
pub fn expected_size(p_tilde: &Pmf, initial: &KnownSet, horizon: u64) -> Result<ExpectationCurve> {
    check_len("known set", p_tilde.len(), initial.mask().len())?;
    let ones = vec![1.0; p_tilde.len()];
    Ok(weighted_curve(p_tilde, &ones, initial, horizon))
}

/// Expected number of elements still missing, `M - E[N_t | Θ_0]
/// = Σ_{θ∉Θ_0} (1 - p~_θ)^t`, for `t = 0..=horizon`. Unlike `M` minus
/// [`expected_size`] it does not lose the tail to cancellation.
pub fn expected_missing(p_tilde: &Pmf, initial: &KnownSet, horizon: u64) -> Result<ExpectationCurve> {
    check_len("known set", p_tilde.len(), initial.mask().len())?;
    let missing: Vec<f64> = initial
        .mask()
        .iter()
        .zip(p_tilde.weights())
        .filter(|(known, _)| !**known)
        .map(|(_, &p)| p)
        .collect();
    let values = (0..=horizon)
        .map(|t| missing.iter().map(|&p| miss_probability(p, t)).sum())
        .collect();
    Ok(ExpectationCurve { values })
}

/// Expected known-set quality `E[Q_t | Θ_0]` for `t = 0..=horizon`.
pub fn expected_quality(
    p_tilde: &Pmf,
    q: &QualityVector,
    initial: &KnownSet,
    horizon: u64,
) -> Result<ExpectationCurve> {
    check_len("quality vector", p_tilde.len(), q.len())?;
    check_len("known set", p_tilde.len(), initial.mask().len())?;
    Ok(weighted_curve(p_tilde, q.values(), initial, horizon))
}

/// `D^k(p~, q) = Σ_{θ ∉ excluded} q_θ p~_θ^k`.
pub fn quality_prevalence(p_tilde: &Pmf, q: &QualityVector, excluded: &KnownSet, k: u32) -> Result<f64> {
    check_len("quality vector", p_tilde.len(), q.len())?;
    check_len("known set", p_tilde.len(), excluded.mask().len())?;
    if k == 0 {
        return Err(Error::ParameterDomain {
            name: "k",
            value: 0.0,
            reason: "prevalence order must be at least 1",
        });
    }
    Ok(excluded
        .mask()
        .iter()
        .zip(q.values().iter().zip(p_tilde.weights()))
        .filter(|(known, _)| !**known)
        .map(|(_, (q, p))| q * p.powi(k as i32))
        .sum())
}

fn binomial_coefficient(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    // exact in u64 for n <= 30 since each partial product is itself a coefficient
    let c = (0..k).fold(1u64, |c, i| c * (n - i) / (i + 1));
    c as f64
}

fn check_alternating_horizon(horizon: u64) -> Result<()> {
    if horizon > MAX_ALTERNATING_HORIZON {
        Err(Error::UnsupportedRange {
            horizon,
            max: MAX_ALTERNATING_HORIZON,
        })
    } else {
        Ok(())
    }
}

/// `E[N_T | Θ_0]` evaluated term-by-term as the alternating binomial sum.
pub fn expected_size_alternating(p_tilde: &Pmf, initial: &KnownSet, horizon: u64) -> Result<f64> {
    check_len("known set", p_tilde.len(), initial.mask().len())?;
    let ones = QualityVector::unit(p_tilde.universe());
    expected_quality_alternating(p_tilde, &ones, initial, horizon)
}

/// `E[Q_T | Θ_0] = Q_0 - Σ_k (-1)^k C(T, k) D^k(p~, q)`, summed literally.
///
/// Terms reach `C(T, k) max(p~)^k`, up to `2^30` for `T = 30`, so powers,
/// products and the running sum are carried in double-double arithmetic;
/// plain `f64` would leave errors near `1e-7` after cancellation.
pub fn expected_quality_alternating(p_tilde: &Pmf, q: &QualityVector, initial: &KnownSet, horizon: u64) -> Result<f64> {
    check_alternating_horizon(horizon)?;
    check_len("quality vector", p_tilde.len(), q.len())?;
    let start = initial.quality(q)?;
    let missing: Vec<(f64, f64)> = initial
        .mask()
        .iter()
        .zip(q.values().iter().zip(p_tilde.weights()))
        .filter(|(known, _)| !**known)
        .map(|(_, (&q, &p))| (q, p))
        .collect();
    // powers[i] = p~_i^k, advanced once per k
    let mut powers: Vec<DoubleDouble> = vec![DoubleDouble::from(1.0); missing.len()];
    let mut total = DoubleDouble::from(start);
    for k in 1..=horizon {
        let mut prevalence = DoubleDouble::from(0.0);
        for (power, &(q, p)) in powers.iter_mut().zip(&missing) {
            *power = power.mul_f64(p);
            prevalence = prevalence.add(power.mul_f64(q));
        }
        let term = prevalence.mul_f64(binomial_coefficient(horizon, k));
        total = if k % 2 == 0 { total.sub(term) } else { total.add(term) };
    }
    Ok(total.value())
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(hi: f64) -> Self {
        DoubleDouble { hi, lo: 0.0 }
    }
}

impl DoubleDouble {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        DoubleDouble { hi: s, lo: b - (s - a) }
    }

    fn add(self, other: Self) -> Self {
        let (s, e) = Self::two_sum(self.hi, other.hi);
        let (t, f) = Self::two_sum(self.lo, other.lo);
        let r = Self::quick_two_sum(s, e + t);
        Self::quick_two_sum(r.hi, r.lo + f)
    }

    fn sub(self, other: Self) -> Self {
        self.add(DoubleDouble {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Self::quick_two_sum(p, e + self.lo * b)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `E[ρ_T | ρ_0] = 1 - (1 - ρ_0)(1 - 1/M)^T` for a uniform prior and a
/// noiseless channel.
pub fn expected_fraction_uniform(m: usize, rho0: f64, horizon: u64) -> Result<f64> {
    if m < 1 {
        return Err(Error::ParameterDomain {
            name: "M",
            value: m as f64,
            reason: "universe must contain at least one element",
        });
    }
    if !(0.0..=1.0).contains(&rho0) {
        return Err(Error::ParameterDomain {
            name: "rho0",
            value: rho0,
            reason: "initial fraction must lie in [0, 1]",
        });
    }
    if horizon == 0 {
        return Ok(rho0);
    }
    Ok(1.0 - (1.0 - rho0) * (1.0 - hit_probability(1.0 / m as f64, horizon)))
}

/// Positive exponential decay rate `-ln(1 - 1/M)` of the undiscovered
/// fraction in the uniform noiseless case.
pub fn asymptotic_rate(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::ParameterDomain {
            name: "M",
            value: m as f64,
            reason: "rate is infinite for a single-element universe",
        });
    }
    Ok(-(-1.0 / m as f64).ln_1p())
}
