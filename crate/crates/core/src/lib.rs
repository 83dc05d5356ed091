//! Converting coding schemes designed for Gaussian sources or Gaussian noise
//! into schemes for arbitrary i.i.d. data.
//!
//! The central object is an orthogonal `b x b` matrix `Q` built from DFT
//! rows. Applying `Q` to blocks of `b` i.i.d. samples and interleaving the
//! results gives `b` sequences whose marginals approach a Gaussian with the
//! same covariance as `b` grows, while second moments are kept exactly. The
//! [`converters`] module uses this to lift a scheme on the source side or the
//! noise side, and [`lab`] measures how close the lifted scheme gets to its
//! Gaussian design point.
//!
//! Numeric kernels ([`transform`], [`precision`], [`quantizer`], [`stats`])
//! are generic over [`Real`]; the network engine and schemes use `f64`.

pub mod converters;
pub mod error;
pub mod lab;
pub mod network;
pub mod precision;
pub mod quantizer;
pub mod scalar;
pub mod scheme;
pub mod sources;
pub mod stats;
pub mod transform;

pub use converters::{convert_for_noise, convert_for_source, effective_noise_probe, EffectiveNoiseReport};
pub use error::{CausalityViolation, CodecError, Error, Result};
pub use lab::{
    convergence_sweep, estimate_distortion, Converter, DistortionReport, GaussianityDiagnostics, SweepConfig,
    SweepRow,
};
pub use network::{run_scheme, simulate, step, NetworkModel, RunOptions, RunOutput, RunStreams, Topology};
pub use precision::floor_precision;
pub use scalar::Real;
pub use scheme::{
    baseline_scalar_quantizer, baseline_sign_bpsk, baseline_uncoded_lmmse, clip_outputs, limit_encoding_precision,
    limit_reading_precision, pass_through, ClipSpec, CodingScheme, History, NodeCodec, PrecisionSpec, SharedScheme,
};
pub use sources::{ColoredSource, CovarianceSpec, MarginalFamily, SampleStream};
pub use stats::{ks_statistic, normal_cdf};
pub use transform::{apply_q, apply_q_inverse, build_q, degaussianize, gaussianize, BlockGeometry, TransformQ};

pub type TransformQ64 = TransformQ<f64>;
pub type TransformQ32 = TransformQ<f32>;
pub type Quantizer64 = quantizer::UniformQuantizer<f64>;
pub type Quantizer32 = quantizer::UniformQuantizer<f32>;
