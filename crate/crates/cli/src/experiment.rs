//! Experiment description: the JSON config schema and its resolution into
//! model objects.
//!
//! ```json
//! {
//!   "M": 4,
//!   "prior":   { "kind": "binomial", "p": 0.2 },
//!   "channel": { "kind": "symmetric", "r": 0.1 },
//!   "initial_set": [1, 2],
//!   "quality": "aligned",
//!   "horizon": 50,
//!   "n_runs": 500,
//!   "seed": 42,
//!   "sweep": { "name": "r", "values": [0, 0.1, 0.2] },
//!   "outputs": [{ "csv": "run.csv", "svg": "run.svg" }]
//! }
//! ```
//!
//! `prior.kind` is `uniform`, `binomial` (`p`) or `explicit` (`weights`).
//! `channel.kind` is `none`, `symmetric` (`r`), `explicit` (`matrix`) or
//! `map` (`likelihood`, an `M x X` observation matrix decoded by MAP).
//! `quality` is `aligned`, `anti_aligned` or an explicit weight list.
//! `rho0` may replace `initial_set`, selecting the first `rho0 * M` elements.

use std::path::{Path, PathBuf};

use coupon_discovery::{
    effective_pmf, expected_size, explicit_channel, make_binomial_prior, make_explicit_prior, make_uniform_prior,
    map_induced_channel, symmetric_channel, EstimateChannel, KnownSet, ObservationModel, Pmf, QualityVector, Universe,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Runs used by `simulate` when the config does not set `n_runs`.
pub const DEFAULT_RUNS: u64 = 500;
/// Cap on the automatically chosen horizon.
pub const MAX_DEFAULT_HORIZON: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    #[default]
    Uniform,
    Binomial {
        p: f64,
    },
    Explicit {
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    #[default]
    None,
    Symmetric {
        r: f64,
    },
    Explicit {
        matrix: Vec<Vec<f64>>,
    },
    Map {
        likelihood: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityPreset {
    Aligned,
    AntiAligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QualitySpec {
    Preset(QualityPreset),
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "r")]
    R,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "rho0")]
    Rho0,
    #[serde(rename = "M")]
    M,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::R => "r",
            SweepParam::P => "p",
            SweepParam::Rho0 => "rho0",
            SweepParam::M => "M",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_set: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<QualitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_runs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<OutputSpec>,
}

impl ExperimentSpec {
    /// A bare experiment over `m` elements with all defaults.
    pub fn new(m: usize) -> Self {
        ExperimentSpec {
            m,
            prior: PriorSpec::Uniform,
            channel: ChannelSpec::None,
            initial_set: None,
            rho0: None,
            quality: None,
            horizon: None,
            n_runs: None,
            seed: None,
            sweep: None,
            outputs: Vec::new(),
        }
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            file: source.to_owned(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Copy of this experiment with the sweep parameter set to `value` and the sweep
    /// removed.
    pub fn with_sweep_value(&self, param: SweepParam, value: f64) -> Result<ExperimentSpec> {
        let mut spec = self.clone();
        spec.sweep = None;
        match param {
            SweepParam::R => match &spec.channel {
                ChannelSpec::None | ChannelSpec::Symmetric { .. } => spec.channel = ChannelSpec::Symmetric { r: value },
                _ => {
                    return Err(CliError::spec(
                        "sweep.name",
                        "`r` can only be swept with a `none` or `symmetric` channel",
                    ))
                }
            },
            SweepParam::P => match &spec.prior {
                PriorSpec::Binomial { .. } => spec.prior = PriorSpec::Binomial { p: value },
                _ => {
                    return Err(CliError::spec(
                        "sweep.name",
                        "`p` can only be swept with a `binomial` prior",
                    ))
                }
            },
            SweepParam::Rho0 => {
                if spec.initial_set.is_some() {
                    return Err(CliError::spec(
                        "sweep.name",
                        "`rho0` cannot be swept when `initial_set` is given",
                    ));
                }
                spec.rho0 = Some(value);
            }
            SweepParam::M => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(CliError::spec(
                        "sweep.values",
                        format!("M = {value} is not a positive integer"),
                    ));
                }
                if matches!(spec.prior, PriorSpec::Explicit { .. }) {
                    return Err(CliError::spec(
                        "sweep.name",
                        "`M` cannot be swept with an explicit prior",
                    ));
                }
                if matches!(spec.channel, ChannelSpec::Explicit { .. } | ChannelSpec::Map { .. }) {
                    return Err(CliError::spec(
                        "sweep.name",
                        "`M` cannot be swept with an explicit or map channel",
                    ));
                }
                if matches!(spec.quality, Some(QualitySpec::Weights(_))) {
                    return Err(CliError::spec(
                        "sweep.name",
                        "`M` cannot be swept with explicit quality weights",
                    ));
                }
                spec.m = value as usize;
            }
        }
        Ok(spec)
    }

    /// Validated sweep (if any).
    pub fn sweep(&self) -> Result<Option<&SweepSpec>> {
        match &self.sweep {
            Some(s) if s.values.is_empty() => Err(CliError::spec("sweep.values", "sweep needs at least one value")),
            Some(s) => {
                if let Some(i) = s.values.iter().position(|v| !v.is_finite()) {
                    return Err(CliError::spec(format!("sweep.values[{i}]"), "value must be finite"));
                }
                Ok(Some(s))
            }
            None => Ok(None),
        }
    }

    /// Resolves everything except the horizon; see [`Experiment::horizon`].
    pub fn resolve(&self) -> Result<Experiment> {
        let universe = Universe::new(self.m).map_err(|_| CliError::spec("M", "must be at least 1"))?;
        let m = self.m;
        let at = |path: &str| {
            let path = path.to_owned();
            move |e: coupon_discovery::Error| CliError::spec(path, e.to_string())
        };

        let prior = match &self.prior {
            PriorSpec::Uniform => make_uniform_prior(universe),
            PriorSpec::Binomial { p } => make_binomial_prior(universe, *p).map_err(at("prior.p"))?,
            PriorSpec::Explicit { weights } => {
                check_len("prior.weights", weights.len(), m)?;
                make_explicit_prior(weights.clone()).map_err(at("prior.weights"))?
            }
        };

        let channel = match &self.channel {
            ChannelSpec::None => EstimateChannel::identity(universe),
            ChannelSpec::Symmetric { r } => symmetric_channel(universe, *r).map_err(at("channel.r"))?,
            ChannelSpec::Explicit { matrix } => {
                check_len("channel.matrix", matrix.len(), m)?;
                explicit_channel(matrix).map_err(at("channel.matrix"))?
            }
            ChannelSpec::Map { likelihood } => {
                check_len("channel.likelihood", likelihood.len(), m)?;
                let obs = ObservationModel::new(likelihood).map_err(at("channel.likelihood"))?;
                map_induced_channel(&prior, &obs).map_err(at("channel.likelihood"))?
            }
        };

        let initial = match (&self.initial_set, self.rho0) {
            (Some(_), Some(_)) => return Err(CliError::spec("rho0", "give either `initial_set` or `rho0`, not both")),
            (Some(indices), None) => {
                if let Some(i) = indices.iter().position(|&x| x == 0 || x > m) {
                    return Err(CliError::spec(
                        format!("initial_set[{i}]"),
                        format!("element {} outside 1..={m}", indices[i]),
                    ));
                }
                KnownSet::from_indices(universe, indices).map_err(at("initial_set"))?
            }
            (None, Some(rho0)) => {
                let count = rho0 * m as f64;
                if !(0.0..=1.0).contains(&rho0) || (count - count.round()).abs() > 1e-9 {
                    return Err(CliError::spec(
                        "rho0",
                        format!("rho0 = {rho0} must lie in [0, 1] and select a whole number of the {m} elements"),
                    ));
                }
                KnownSet::first(universe, count.round() as usize).map_err(at("rho0"))?
            }
            (None, None) => KnownSet::empty(universe),
        };

        let quality = match &self.quality {
            None => None,
            Some(QualitySpec::Weights(w)) => {
                check_len("quality", w.len(), m)?;
                Some(QualityVector::new(w.clone()).map_err(at("quality"))?)
            }
            Some(QualitySpec::Preset(preset)) => Some(quality_preset(&prior, *preset)),
        };

        if self.n_runs == Some(0) {
            return Err(CliError::spec("n_runs", "must be at least 1"));
        }

        let p_tilde = effective_pmf(&prior, &channel)?;
        Ok(Experiment {
            universe,
            prior,
            channel,
            p_tilde,
            initial,
            quality,
            horizon: self.horizon,
            n_runs: self.n_runs,
            seed: self.seed.unwrap_or(0),
        })
    }
}

fn check_len(path: &str, found: usize, m: usize) -> Result<()> {
    if found == m {
        Ok(())
    } else {
        Err(CliError::spec(path, format!("has {found} entries, expected M = {m}")))
    }
}

/// Integer qualities ranked by prior weight: `aligned` gives the most
/// probable element `M` and the least probable 1, `anti_aligned` the
/// reverse. Equal weights rank by element index.
pub fn quality_preset(prior: &Pmf, preset: QualityPreset) -> QualityVector {
    let m = prior.len();
    let mut order: Vec<usize> = (0..m).collect();
    // stable: ties keep index order
    order.sort_by(|&a, &b| prior.weights()[b].total_cmp(&prior.weights()[a]));
    let mut q = vec![0.0; m];
    for (rank, &element) in order.iter().enumerate() {
        q[element] = match preset {
            QualityPreset::Aligned => (m - rank) as f64,
            QualityPreset::AntiAligned => (rank + 1) as f64,
        };
    }
    QualityVector::new(q).expect("ranks are positive")
}

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub universe: Universe,
    pub prior: Pmf,
    pub channel: EstimateChannel,
    pub p_tilde: Pmf,
    pub initial: KnownSet,
    pub quality: Option<QualityVector>,
    horizon: Option<u64>,
    pub n_runs: Option<u64>,
    pub seed: u64,
}

impl Experiment {
    /// The configured horizon, or the first `t` at which the expected number
    /// of still-discoverable elements drops below `0.01 M` (capped at
    /// [`MAX_DEFAULT_HORIZON`]).
    pub fn horizon(&self) -> u64 {
        self.horizon.unwrap_or_else(|| self.default_horizon())
    }

    pub fn default_horizon(&self) -> u64 {
        let m = self.universe.size() as f64;
        let reachable = self.initial.len() as f64
            + self
                .initial
                .mask()
                .iter()
                .zip(self.p_tilde.weights())
                .filter(|(known, p)| !**known && **p > 0.0)
                .count() as f64;
        let curve = expected_size(&self.p_tilde, &self.initial, MAX_DEFAULT_HORIZON).expect("dimensions checked");
        curve
            .values()
            .iter()
            .position(|&v| reachable - v < 0.01 * m)
            .map_or(MAX_DEFAULT_HORIZON, |t| t as u64)
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy_m4() -> ExperimentSpec {
        ExperimentSpec::from_json(
            r#"{"M": 4, "prior": {"kind": "binomial", "p": 0.2},
                "channel": {"kind": "symmetric", "r": 0.1},
                "initial_set": [1, 2], "horizon": 50, "seed": 42}"#,
            "noisy_m4",
        )
        .unwrap()
    }

    #[test]
    fn parses_full_config() {
        let spec = ExperimentSpec::from_json(
            r#"{"M": 3, "prior": {"kind": "explicit", "weights": [0.5, 0.3, 0.2]},
                "channel": {"kind": "map", "likelihood": [[0.8, 0.2], [0.5, 0.5], [0.1, 0.9]]},
                "rho0": 0, "quality": [1, 2, 3], "n_runs": 10,
                "sweep": {"name": "rho0", "values": [0, 1]},
                "outputs": [{"csv": "a.csv", "svg": "a.svg"}]}"#,
            "cfg",
        )
        .unwrap();
        let exp = spec.resolve().unwrap();
        assert_eq!(exp.quality.unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(spec.sweep().unwrap().unwrap().name, SweepParam::Rho0);
        let back = ExperimentSpec::from_json(&spec.to_json(), "round").unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = ExperimentSpec::from_json("{\n\"M\": 4,\n\"bogus\": 1}", "cfg.json").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_paths() {
        let mut spec = noisy_m4();
        spec.m = 0;
        assert!(matches!(spec.resolve(), Err(CliError::Spec { path, .. }) if path == "M"));

        let mut spec = noisy_m4();
        spec.initial_set = Some(vec![1, 5]);
        assert!(matches!(spec.resolve(), Err(CliError::Spec { path, .. }) if path == "initial_set[1]"));

        let mut spec = noisy_m4();
        spec.prior = PriorSpec::Explicit {
            weights: vec![0.5, 0.5],
        };
        assert!(matches!(spec.resolve(), Err(CliError::Spec { path, .. }) if path == "prior.weights"));

        let mut spec = noisy_m4();
        spec.channel = ChannelSpec::Symmetric { r: 1.5 };
        assert!(matches!(spec.resolve(), Err(CliError::Spec { path, .. }) if path == "channel.r"));

        let mut spec = noisy_m4();
        spec.n_runs = Some(0);
        assert!(matches!(spec.resolve(), Err(CliError::Spec { path, .. }) if path == "n_runs"));

        let mut spec = noisy_m4();
        spec.initial_set = None;
        spec.rho0 = Some(0.3);
        assert!(matches!(spec.resolve(), Err(CliError::Spec { path, .. }) if path == "rho0"));
    }

    #[test]
    fn presets_follow_prior_ranking() {
        let exp = noisy_m4().resolve().unwrap();
        assert_eq!(
            quality_preset(&exp.prior, QualityPreset::Aligned).values(),
            &[4.0, 3.0, 2.0, 1.0]
        );
        assert_eq!(
            quality_preset(&exp.prior, QualityPreset::AntiAligned).values(),
            &[1.0, 2.0, 3.0, 4.0]
        );
        let shuffled = Pmf::new(vec![0.1, 0.6, 0.3]).unwrap();
        assert_eq!(
            quality_preset(&shuffled, QualityPreset::Aligned).values(),
            &[1.0, 3.0, 2.0]
        );
        let flat = Pmf::new(vec![0.25; 4]).unwrap();
        assert_eq!(
            quality_preset(&flat, QualityPreset::Aligned).values(),
            &[4.0, 3.0, 2.0, 1.0]
        );
    }

    #[test]
    fn sweep_compatibility() {
        let spec = noisy_m4();
        assert_eq!(
            spec.with_sweep_value(SweepParam::R, 0.3).unwrap().channel,
            ChannelSpec::Symmetric { r: 0.3 }
        );
        assert_eq!(
            spec.with_sweep_value(SweepParam::P, 0.5).unwrap().prior,
            PriorSpec::Binomial { p: 0.5 }
        );
        assert!(spec.with_sweep_value(SweepParam::Rho0, 0.5).is_err());

        let mut explicit = noisy_m4();
        explicit.channel = ChannelSpec::Explicit {
            matrix: vec![vec![1.0, 0.0, 0.0, 0.0]; 4],
        };
        assert!(explicit.with_sweep_value(SweepParam::R, 0.1).is_err());
        assert!(explicit.with_sweep_value(SweepParam::M, 5.0).is_err());

        let mut uniform = ExperimentSpec::new(4);
        uniform.rho0 = Some(0.5);
        let m10 = uniform
            .with_sweep_value(SweepParam::M, 10.0)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(m10.initial.indices(), vec![1, 2, 3, 4, 5]);
        assert!(uniform.with_sweep_value(SweepParam::M, 2.5).is_err());
        assert!(uniform.with_sweep_value(SweepParam::P, 0.5).is_err());

        let mut empty = noisy_m4();
        empty.sweep = Some(SweepSpec {
            name: SweepParam::R,
            values: vec![],
        });
        assert!(empty.sweep().is_err());
    }

    #[test]
    fn default_horizon_saturates() {
        let mut spec = noisy_m4();
        spec.horizon = None;
        let exp = spec.resolve().unwrap();
        let t = exp.horizon();
        let curve = expected_size(&exp.p_tilde, &exp.initial, t).unwrap();
        assert!(4.0 - curve.at(t) < 0.04);
        assert!(4.0 - curve.at(t - 1) >= 0.04);

        // unreachable zero-mass elements do not block saturation
        let mut spec = ExperimentSpec::new(3);
        spec.prior = PriorSpec::Explicit {
            weights: vec![0.5, 0.5, 0.0],
        };
        assert!(spec.resolve().unwrap().horizon() < 20);
    }
}
