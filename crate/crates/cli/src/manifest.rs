//! Experiment manifest: a TOML file describing the source, network, inner
//! scheme, wrappers, converter and `b` sweep of one experiment.
//!
//! Unknown keys are errors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use worstcase_core::lab::{validate_b_list, Converter, SweepConfig, MIN_TRIALS};
use worstcase_core::network::{BitPipeLink, BitPipeNetwork};
use worstcase_core::quantizer::UniformQuantizer;
use worstcase_core::scheme::DEFAULT_LOADING;
use worstcase_core::{
    baseline_scalar_quantizer, baseline_sign_bpsk, baseline_uncoded_lmmse, clip_outputs, limit_encoding_precision,
    limit_reading_precision, pass_through, ClipSpec, ColoredSource, CovarianceSpec, MarginalFamily, NetworkModel,
    PrecisionSpec, SharedScheme, Topology,
};

use crate::error::CliError;

const DEFAULT_DIAGNOSTIC_SAMPLES: usize = 10_000;
const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    /// Transform sizes; ignored when `converter = "none"`.
    #[serde(default)]
    pub b: Vec<usize>,
    pub converter: ConverterSpec,
    /// Also run the inner scheme unconverted (reported as `b = 1`).
    #[serde(default)]
    pub baseline: bool,
    /// Sub-block whose marginal is diagnosed.
    #[serde(default = "default_row")]
    pub diagnostic_row: usize,
    #[serde(default = "default_diagnostic_samples")]
    pub diagnostic_samples: usize,
    /// Report the per-sub-block distortion profile.
    #[serde(default)]
    pub profile: bool,
    pub source: SourceSpec,
    pub network: NetworkSpec,
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub wrappers: WrapperSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_row() -> usize {
    1
}

fn default_diagnostic_samples() -> usize {
    DEFAULT_DIAGNOSTIC_SAMPLES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConverterSpec {
    None,
    Source,
    Noise,
}

impl From<ConverterSpec> for Converter {
    fn from(c: ConverterSpec) -> Self {
        match c {
            ConverterSpec::None => Converter::None,
            ConverterSpec::Source => Converter::Source,
            ConverterSpec::Noise => Converter::Noise,
        }
    }
}

/// i.i.d. vectors with covariance `covariance` and marginal `marginal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub covariance: Vec<Vec<f64>>,
    pub marginal: MarginalFamily,
}

impl SourceSpec {
    fn build(&self, what: &str) -> Result<ColoredSource, CliError> {
        let cov = CovarianceSpec::new(&self.covariance).map_err(|e| CliError::invalid(format!("{what}.covariance: {e}")))?;
        ColoredSource::new(cov, self.marginal.clone()).map_err(|e| CliError::invalid(format!("{what}.marginal: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    /// `Y = H U + Z`.
    Additive {
        nodes: usize,
        sources: Vec<usize>,
        destinations: Vec<usize>,
        h: Vec<Vec<f64>>,
        noise: SourceSpec,
    },
    /// Noiseless rate-limited links.
    BitPipe {
        nodes: usize,
        sources: Vec<usize>,
        destinations: Vec<usize>,
        links: Vec<LinkSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub from: usize,
    pub to: usize,
    pub bits: u32,
    pub amplitude: f64,
}

impl NetworkSpec {
    fn pairs(&self) -> usize {
        match self {
            NetworkSpec::Additive { sources, .. } | NetworkSpec::BitPipe { sources, .. } => sources.len(),
        }
    }

    fn build(&self) -> Result<NetworkModel, CliError> {
        let net = |e: worstcase_core::Error| CliError::invalid(format!("network: {e}"));
        match self {
            NetworkSpec::Additive {
                nodes,
                sources,
                destinations,
                h,
                noise,
            } => {
                let topo = Topology::new(*nodes, sources.clone(), destinations.clone()).map_err(net)?;
                NetworkModel::additive(topo, h, noise.build("network.noise")?).map_err(net)
            }
            NetworkSpec::BitPipe {
                nodes,
                sources,
                destinations,
                links,
            } => {
                let topo = Topology::new(*nodes, sources.clone(), destinations.clone()).map_err(net)?;
                let links = links
                    .iter()
                    .map(|l| {
                        Ok(BitPipeLink {
                            from: l.from,
                            to: l.to,
                            quantizer: UniformQuantizer::new(l.bits, l.amplitude).map_err(net)?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let channel = BitPipeNetwork::new(*nodes, links).map_err(net)?;
                NetworkModel::functional(topo, Arc::new(channel)).map_err(net)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeSpec {
    PassThrough {
        n: usize,
    },
    UncodedLmmse {
        n: usize,
        power: f64,
        source_var: f64,
        noise_var: f64,
    },
    SignBpsk {
        n: usize,
        power: f64,
        noise_var: f64,
        source_var: f64,
    },
    ScalarQuantizer {
        n: usize,
        bits: u32,
        design_var: f64,
        loading: Option<f64>,
    },
}

impl SchemeSpec {
    pub const NAMES: [&'static str; 4] = ["pass_through", "scalar_quantizer", "sign_bpsk", "uncoded_lmmse"];

    fn build(&self) -> Result<SharedScheme, CliError> {
        let s = |e: worstcase_core::Error| CliError::invalid(format!("scheme: {e}"));
        Ok(match *self {
            SchemeSpec::PassThrough { n } => Arc::new(pass_through(n).map_err(s)?),
            SchemeSpec::UncodedLmmse {
                n,
                power,
                source_var,
                noise_var,
            } => Arc::new(baseline_uncoded_lmmse(power, source_var, noise_var, n).map_err(s)?),
            SchemeSpec::SignBpsk {
                n,
                power,
                noise_var,
                source_var,
            } => Arc::new(baseline_sign_bpsk(power, noise_var, source_var, n).map_err(s)?),
            SchemeSpec::ScalarQuantizer {
                n,
                bits,
                design_var,
                loading,
            } => Arc::new(baseline_scalar_quantizer(bits, design_var, loading.unwrap_or(DEFAULT_LOADING), n).map_err(s)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSpec {
    Uniform(u32),
    PerIndex(Vec<u32>),
}

impl RhoSpec {
    fn build(&self, what: &str) -> Result<PrecisionSpec, CliError> {
        match self {
            RhoSpec::Uniform(r) => PrecisionSpec::uniform(*r),
            RhoSpec::PerIndex(r) => PrecisionSpec::per_index(r.clone()),
        }
        .map_err(|e| CliError::invalid(format!("wrappers.{what}: {e}")))
    }
}

/// Optional wrappers applied to the inner scheme before conversion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapperSpec {
    /// Clip decoder outputs to `[-clip, clip]`.
    pub clip: Option<f64>,
    pub encoding_precision: Option<RhoSpec>,
    pub reading_precision: Option<RhoSpec>,
    /// Dither the reading-precision flooring.
    #[serde(default)]
    pub dither: bool,
}

impl WrapperSpec {
    pub fn any(&self) -> bool {
        self.clip.is_some() || self.encoding_precision.is_some() || self.reading_precision.is_some()
    }

    fn apply(&self, mut scheme: SharedScheme) -> Result<SharedScheme, CliError> {
        if let Some(m) = self.clip {
            let spec = ClipSpec::new(m).map_err(|e| CliError::invalid(format!("wrappers.clip: {e}")))?;
            scheme = clip_outputs(scheme, spec);
        }
        if let Some(r) = &self.reading_precision {
            scheme = limit_reading_precision(scheme, r.build("reading_precision")?, self.dither);
        }
        if let Some(r) = &self.encoding_precision {
            scheme = limit_encoding_precision(scheme, r.build("encoding_precision")?);
        }
        Ok(scheme)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    DEFAULT_OUTPUT_DIR.into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

/// A validated manifest turned into core objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: SweepConfig,
    /// Same as `config` without wrappers; present only if wrappers are set.
    pub unwrapped: Option<SweepConfig>,
    pub b_list: Vec<usize>,
    pub baseline: bool,
}

/// Parses TOML text; errors carry the offending key and line.
pub fn parse_manifest(text: &str) -> Result<Manifest, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

impl Manifest {
    /// Checks cross-field invariants and builds the experiment.
    pub fn build(&self) -> Result<Experiment, CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::invalid("name must be non-empty and contain no path separators"));
        }
        if self.trials < MIN_TRIALS {
            return Err(CliError::invalid(format!("trials must be at least {MIN_TRIALS}, got {}", self.trials)));
        }
        let converter = Converter::from(self.converter);
        if converter != Converter::None {
            validate_b_list(&self.b).map_err(|e| CliError::invalid(format!("b: {e}")))?;
        }
        let k = self.source.covariance.len();
        if k != self.network.pairs() {
            return Err(CliError::invalid(format!(
                "source has k = {k} components but the network has {} source/destination pairs",
                self.network.pairs()
            )));
        }
        if self.diagnostic_samples < 100 {
            return Err(CliError::invalid("diagnostic_samples must be at least 100"));
        }
        let model = self.network.build()?;
        if converter == Converter::Noise && !model.is_additive() {
            return Err(CliError::invalid("converter = \"noise\" needs an additive network"));
        }
        let source = self.source.build("source")?;
        let inner = self.scheme.build()?;
        let wrapped = self.wrappers.apply(inner.clone())?;
        let config = SweepConfig {
            model,
            inner: wrapped,
            source,
            converter,
            trials: self.trials,
            seed: self.seed,
            diagnostic_row: self.diagnostic_row,
            diagnostic_samples: self.diagnostic_samples,
            profile: self.profile,
        };
        let unwrapped = self.wrappers.any().then(|| SweepConfig {
            inner,
            ..config.clone()
        });
        Ok(Experiment {
            config,
            unwrapped,
            b_list: if converter == Converter::None { Vec::new() } else { self.b.clone() },
            baseline: self.baseline && converter != Converter::None,
        })
    }
}
