//! Growth-curve fitting for discovery trajectories.
//!
//! Two three-parameter models are supported:
//!
//! ```text
//! logistic:                D(t) = K / (1 + A e^{-r t})
//! saturating exponential:  D(t) = K (1 - A e^{-r t})
//! ```
//!
//! The saturating exponential is exactly the expected-size curve of a
//! uniform prior under a noiseless channel, with `K = M`, `A = 1 - ρ_0` and
//! `r = -ln(1 - 1/M)`, which [`implied_model_parameters`] inverts.
//!
//! Fits minimise unweighted squared residuals with a damped Gauss-Newton
//! iteration (Marquardt-scaled damping plus step halving).

use crate::error::{Error, Result};

/// Iteration budget of [`fit_growth`].
pub const MAX_ITERATIONS: usize = 200;
const PARAM_TOLERANCE: f64 = 1e-10;
const GRADIENT_TOLERANCE: f64 = 1e-12;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Logistic,
    SaturatingExponential,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::SaturatingExponential => "saturating_exponential",
        }
    }

    /// Model value at `t` for parameters `(K, A, r)`.
    pub fn evaluate(self, capacity: f64, amplitude: f64, rate: f64, t: f64) -> f64 {
        let e = (-rate * t).exp();
        match self {
            ModelKind::Logistic => capacity / (1.0 + amplitude * e),
            ModelKind::SaturatingExponential => capacity * (1.0 - amplitude * e),
        }
    }

    /// Partial derivatives `(∂/∂K, ∂/∂A, ∂/∂r)` at `t`.
    pub fn gradient(self, capacity: f64, amplitude: f64, rate: f64, t: f64) -> [f64; 3] {
        let e = (-rate * t).exp();
        match self {
            ModelKind::Logistic => {
                let d = 1.0 + amplitude * e;
                let d2 = d * d;
                [1.0 / d, -capacity * e / d2, capacity * amplitude * t * e / d2]
            }
            ModelKind::SaturatingExponential => [1.0 - amplitude * e, -capacity * e, capacity * amplitude * t * e],
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "saturating_exponential" | "saturating-exponential" => Ok(ModelKind::SaturatingExponential),
            _ => Err(Error::Validation(format!(
                "unknown model `{s}`; expected `logistic` or `saturating_exponential`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub kind: ModelKind,
    /// Limiting size `K`.
    pub capacity: f64,
    /// Fitting constant `A`.
    pub amplitude: f64,
    /// Growth rate `r0` per step.
    pub rate: f64,
    pub rmse: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the input series decreases somewhere.
    pub non_monotone_input: bool,
}

impl GrowthFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.kind.evaluate(self.capacity, self.amplitude, self.rate, t)
    }
}

/// Universe size and initial fraction implied by a saturating-exponential fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedParameters {
    pub m_est: f64,
    pub rho0_est: f64,
    /// `A > 1` was fitted, so `rho0_est` was clamped to 0.
    pub rho0_clamped: bool,
}

/// Inverts `r0 = -ln(1 - 1/M)`, `A = 1 - ρ_0`.
pub fn implied_model_parameters(fit: &GrowthFit) -> Result<ImpliedParameters> {
    if fit.kind != ModelKind::SaturatingExponential {
        return Err(Error::UnsupportedModel(
            "parameter inversion is exact only for the saturating exponential",
        ));
    }
    if fit.rate <= 0.0 {
        return Err(Error::ParameterDomain {
            name: "r0",
            value: fit.rate,
            reason: "growth rate must be positive",
        });
    }
    let m_est = 1.0 / -(-fit.rate).exp_m1();
    let rho0 = 1.0 - fit.amplitude;
    Ok(ImpliedParameters {
        m_est,
        rho0_est: rho0.max(0.0),
        rho0_clamped: rho0 < 0.0,
    })
}

/// Least-squares slope of `ln(1 - value / capacity)` against `t`, negated.
pub fn log_linear_rate_estimate(series: &[(f64, f64)], capacity: f64) -> Result<f64> {
    let offending: Vec<f64> = series
        .iter()
        .filter(|(_, v)| !(1.0 - v / capacity > 0.0))
        .map(|&(t, _)| t)
        .collect();
    if !offending.is_empty() {
        return Err(Error::NonPositiveResidual { offending_t: offending });
    }
    let distinct = distinct_times(series);
    if distinct < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: distinct,
        });
    }
    let n = series.len() as f64;
    let t_mean = series.iter().map(|p| p.0).sum::<f64>() / n;
    let logs: Vec<f64> = series.iter().map(|&(_, v)| (-v / capacity).ln_1p()).collect();
    let y_mean = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&(t, _), y) in series.iter().zip(&logs) {
        sxy += (t - t_mean) * (y - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(-sxy / sxx)
}

fn distinct_times(series: &[(f64, f64)]) -> usize {
    let mut ts: Vec<f64> = series.iter().map(|p| p.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.len()
}

/// Solves the 3x3 system `a x = b` by Gaussian elimination with partial
/// pivoting. `None` when singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < f64::MIN_POSITIVE || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn sum_squares(kind: ModelKind, p: [f64; 3], series: &[(f64, f64)]) -> f64 {
    series
        .iter()
        .map(|&(t, v)| {
            let r = kind.evaluate(p[0], p[1], p[2], t) - v;
            r * r
        })
        .sum()
}

fn initial_guess(kind: ModelKind, series: &[(f64, f64)], capacity_hint: Option<f64>, max: f64) -> [f64; 3] {
    let capacity = capacity_hint.filter(|k| *k > max).unwrap_or(1.02 * max);
    let (t_min, t_max) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(t, _)| {
            (lo.min(t), hi.max(t))
        });
    let rate = log_linear_rate_estimate(series, capacity)
        .ok()
        .filter(|r| r.is_finite() && *r > 0.0)
        .unwrap_or(1.0 / (t_max - t_min));
    let &(t0, v0) = series
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("series is non-empty");
    let amplitude = match kind {
        ModelKind::Logistic => (capacity / v0 - 1.0) * (rate * t0).exp(),
        ModelKind::SaturatingExponential => (1.0 - v0 / capacity) * (rate * t0).exp(),
    };
    let amplitude = if amplitude.is_finite() && amplitude > 0.0 {
        amplitude
    } else {
        1.0
    };
    [capacity, amplitude, rate]
}

/// Fits `kind` to `(t, value)` pairs. `capacity_hint`, when larger than every
/// observed value, replaces the default initial capacity `1.02 * max`.
pub fn fit_growth(series: &[(f64, f64)], kind: ModelKind, capacity_hint: Option<f64>) -> Result<GrowthFit> {
    if let Some((t, v)) = series.iter().find(|(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(Error::Validation(format!("non-finite sample ({t}, {v})")));
    }
    let distinct = distinct_times(series);
    if distinct < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            found: distinct,
        });
    }
    let first = series[0].1;
    if series.iter().all(|&(_, v)| v == first) {
        return Err(Error::DegenerateSeries(first));
    }
    let max = series.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(Error::Validation("growth series needs positive values".into()));
    }
    let mut ordered = series.to_vec();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let non_monotone_input = ordered.windows(2).any(|w| w[1].1 < w[0].1);

    let mut params = initial_guess(kind, series, capacity_hint, max);
    let mut cost = sum_squares(kind, params, series);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut grad = [0.0; 3];
        for &(t, v) in series {
            let [k, a, r] = params;
            let res = kind.evaluate(k, a, r, t) - v;
            let j = kind.gradient(k, a, r, t);
            for row in 0..3 {
                grad[row] += j[row] * res;
                for col in 0..3 {
                    jtj[row][col] += j[row] * j[col];
                }
            }
        }
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        let mut damped = jtj;
        (0..3).for_each(|i| damped[i][i] += lambda * jtj[i][i].max(f64::MIN_POSITIVE));
        let Some(step) = solve3(damped, grad.map(|g| -g)) else {
            lambda *= 10.0;
            continue;
        };
        let relative = |s: &[f64; 3], scale: f64| {
            (0..3)
                .map(|i| (scale * s[i]).abs() / params[i].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        if relative(&step, 1.0) < PARAM_TOLERANCE {
            converged = true;
            break;
        }

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = [0, 1, 2].map(|i| params[i] + scale * step[i]);
            if trial.iter().all(|v| *v > 0.0 && v.is_finite()) {
                let trial_cost = sum_squares(kind, trial, series);
                if trial_cost < cost {
                    accepted = Some((trial, trial_cost));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, trial_cost)) => {
                let change = relative(&step, scale);
                params = trial;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-12);
                if change < PARAM_TOLERANCE {
                    converged = true;
                    break;
                }
            }
            None => lambda *= 10.0,
        }
        if lambda > 1e16 {
            break;
        }
    }

    Ok(GrowthFit {
        kind,
        capacity: params[0],
        amplitude: params[1],
        rate: params[2],
        rmse: (cost / series.len() as f64).sqrt(),
        converged,
        iterations,
        non_monotone_input,
    })
}
