//! Monte-Carlo distortion estimates, Gaussianity diagnostics and `b` sweeps.
//!
//! Trial `i` of a run with seed `s` draws its source, channel noise and codec
//! randomness from streams keyed by `(s, role, i)`, so a report is a pure
//! function of its inputs. Trials run in parallel in fixed chunks whose
//! partial sums are combined in chunk order.

use std::fmt;

use rayon::prelude::*;

use crate::converters::{convert_for_noise, convert_for_source, effective_samples};
use crate::error::{Error, Result};
use crate::network::{simulate, NetworkModel, RunOptions, RunStreams};
use crate::scheme::{CodingScheme, SharedScheme};
use crate::sources::{ColoredSource, SampleStream, StreamRole};
use crate::stats::{ks_statistic, moments};
use crate::transform::{cached_q, gaussianize, BlockGeometry};

/// Fewest trials accepted by [`estimate_distortion`].
pub const MIN_TRIALS: usize = 100;

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.96;

const CHUNK: usize = 512;

/// Which conversion a sweep applies to the inner scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Converter {
    None,
    Source,
    Noise,
}

impl Converter {
    pub const TAGS: [&'static str; 3] = ["none", "noise", "source"];

    pub fn tag(self) -> &'static str {
        match self {
            Converter::None => "none",
            Converter::Source => "source",
            Converter::Noise => "noise",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "none" => Ok(Converter::None),
            "source" => Ok(Converter::Source),
            "noise" => Ok(Converter::Noise),
            other => Err(Error::Config(format!(
                "unknown converter {other:?}; expected one of {}",
                Converter::TAGS.join(", ")
            ))),
        }
    }

    /// Wraps `inner` with this conversion at size `b`.
    pub fn apply(self, inner: SharedScheme, b: usize, model: &NetworkModel) -> Result<SharedScheme> {
        match self {
            Converter::None => Ok(inner),
            Converter::Source => convert_for_source(inner, b),
            Converter::Noise => convert_for_noise(inner, b, model),
        }
    }
}

impl fmt::Display for Converter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// How to split the squared error of a block into `b` parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `b` contiguous segments of the block.
    Segments(usize),
    /// The `b` sub-blocks after transforming source and reconstruction.
    Transformed(usize),
}

impl Profile {
    fn parts(self) -> usize {
        match self {
            Profile::Segments(b) | Profile::Transformed(b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DestinationStats {
    /// Pair index `m`.
    pub destination: usize,
    pub mse: f64,
    pub stderr: f64,
    /// Half-width `1.96 * stderr`.
    pub ci95: f64,
    /// Fraction of symbols whose reconstruction has the wrong sign.
    pub sign_error_rate: f64,
    pub sign_error_stderr: f64,
    /// Mean per-symbol distortion of each part; empty without a profile.
    pub profile: Vec<f64>,
}

impl DestinationStats {
    pub fn interval(&self) -> (f64, f64) {
        (self.mse - self.ci95, self.mse + self.ci95)
    }

    pub fn overlaps(&self, other: &DestinationStats) -> bool {
        let (a0, a1) = self.interval();
        let (b0, b1) = other.interval();
        a0 <= b1 && b0 <= a1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub scheme: String,
    pub block_len: usize,
    pub trials: usize,
    pub seed: u64,
    pub destinations: Vec<DestinationStats>,
}

#[derive(Debug, Clone)]
struct Accum {
    sum: f64,
    sumsq: f64,
    sign_sum: f64,
    sign_sumsq: f64,
    profile: Vec<f64>,
}

impl Accum {
    fn new(parts: usize) -> Self {
        Accum {
            sum: 0.0,
            sumsq: 0.0,
            sign_sum: 0.0,
            sign_sumsq: 0.0,
            profile: vec![0.0; parts],
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.sum += other.sum;
        self.sumsq += other.sumsq;
        self.sign_sum += other.sign_sum;
        self.sign_sumsq += other.sign_sumsq;
        for (a, b) in self.profile.iter_mut().zip(&other.profile) {
            *a += b;
        }
    }
}

fn mean_and_stderr(sum: f64, sumsq: f64, count: usize) -> (f64, f64) {
    let n = count as f64;
    let mean = sum / n;
    let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Streams of trial `trial`.
pub fn trial_streams(seed: u64, trial: u64) -> (SampleStream, RunStreams) {
    (
        SampleStream::for_trial(seed, StreamRole::Source, trial),
        RunStreams {
            noise: SampleStream::for_trial(seed, StreamRole::Noise, trial),
            encoder: SampleStream::for_trial(seed, StreamRole::Encoder, trial),
        },
    )
}

/// `len` i.i.d. draws from `source`, one sequence per component.
pub fn draw_sources(source: &ColoredSource, len: usize, stream: SampleStream) -> Vec<Vec<f64>> {
    let k = source.dim();
    let mut rng = stream.rng();
    let mut white = vec![0.0; k];
    let mut draw = vec![0.0; k];
    let mut out: Vec<Vec<f64>> = (0..k).map(|_| Vec::with_capacity(len)).collect();
    for _ in 0..len {
        source.sample_into(&mut rng, &mut white, &mut draw);
        for (o, &v) in out.iter_mut().zip(&draw) {
            o.push(v);
        }
    }
    out
}

fn run_trial(
    model: &NetworkModel,
    scheme: &dyn CodingScheme,
    source: &ColoredSource,
    seed: u64,
    trial: usize,
    profile: Option<Profile>,
    acc: &mut [Accum],
) -> Result<()> {
    let n = scheme.block_len();
    let (source_stream, streams) = trial_streams(seed, trial as u64);
    let x = draw_sources(source, n, source_stream);
    let out = simulate(model, scheme, &x, streams, RunOptions::default()).map_err(|e| Error::Trial {
        trial,
        source: Box::new(e),
    })?;
    for ((xm, xh), a) in x.iter().zip(&out.reconstructions).zip(acc.iter_mut()) {
        let mut se = 0.0;
        let mut signs = 0usize;
        for (u, v) in xm.iter().zip(xh) {
            se += (u - v) * (u - v);
            signs += usize::from((*u >= 0.0) != (*v >= 0.0));
        }
        let d = se / n as f64;
        let s = signs as f64 / n as f64;
        a.sum += d;
        a.sumsq += d * d;
        a.sign_sum += s;
        a.sign_sumsq += s * s;
        match profile {
            Some(Profile::Segments(b)) => {
                let len = n / b;
                for (l, p) in a.profile.iter_mut().enumerate() {
                    let seg = l * len..(l + 1) * len;
                    *p += xm[seg.clone()]
                        .iter()
                        .zip(&xh[seg])
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        / len as f64;
                }
            }
            Some(Profile::Transformed(b)) => {
                let geom = BlockGeometry::new(n / b, b)?;
                let q = cached_q(b)?;
                let tx = gaussianize(q.as_ref(), xm, geom)?;
                let th = gaussianize(q.as_ref(), xh, geom)?;
                for (l, p) in a.profile.iter_mut().enumerate() {
                    *p += tx
                        .sub_block(l)
                        .iter()
                        .zip(th.sub_block(l))
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        / geom.n() as f64;
                }
            }
            None => {}
        }
    }
    Ok(())
}

/// Mean per-symbol squared error of every destination over `trials`
/// independent blocks.
pub fn estimate_distortion(
    model: &NetworkModel,
    scheme: &dyn CodingScheme,
    source: &ColoredSource,
    trials: usize,
    seed: u64,
    profile: Option<Profile>,
) -> Result<DistortionReport> {
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let pairs = model.topology().pairs();
    if source.dim() != pairs {
        return Err(Error::Config(format!(
            "source has {} components, network has {pairs} source/destination pairs",
            source.dim()
        )));
    }
    let n = scheme.block_len();
    if let Some(p) = profile {
        let b = p.parts();
        if b == 0 || n % b != 0 {
            return Err(Error::Config(format!("profile with {b} parts does not divide block length {n}")));
        }
    }
    let parts = profile.map_or(0, Profile::parts);
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Vec<Accum>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Accum::new(parts); pairs];
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                run_trial(model, scheme, source, seed, trial, profile, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Accum::new(parts); pairs];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let destinations = total
        .into_iter()
        .enumerate()
        .map(|(m, a)| {
            let (mse, stderr) = mean_and_stderr(a.sum, a.sumsq, trials);
            let (sign_error_rate, sign_error_stderr) = mean_and_stderr(a.sign_sum, a.sign_sumsq, trials);
            DestinationStats {
                destination: m,
                mse,
                stderr,
                ci95: Z95 * stderr,
                sign_error_rate,
                sign_error_stderr,
                profile: a.profile.iter().map(|p| p / trials as f64).collect(),
            }
        })
        .collect();
    Ok(DistortionReport {
        scheme: scheme.name(),
        block_len: n,
        trials,
        seed,
        destinations,
    })
}

/// Shape of one marginal of the effective data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianityDiagnostics {
    pub row: usize,
    /// KS distance to `N(0, K_ii)`; `None` for a degenerate component.
    pub ks: Option<f64>,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Statistics of component `component`, sub-block `row`, of `source` after
/// the transform of size `b` (`b = 1` means untransformed).
pub fn gaussianity(
    source: &ColoredSource,
    component: usize,
    b: usize,
    row: usize,
    samples: usize,
    stream: SampleStream,
) -> Result<GaussianityDiagnostics> {
    let dim = source.dim();
    if component >= dim {
        return Err(Error::invalid(format!("component {component} out of range 0..{dim}")));
    }
    let column: Vec<f64> = if b == 1 {
        let mut all = draw_sources(source, samples, stream);
        all.swap_remove(component)
    } else {
        let data = effective_samples(source, b, row, samples, stream)?;
        data.chunks_exact(dim).map(|r| r[component]).collect()
    };
    let m = moments(&column)?;
    let var = source.covariance.get(component, component);
    let ks = if var > 0.0 {
        Some(ks_statistic(&column, var.sqrt())?)
    } else {
        None
    };
    Ok(GaussianityDiagnostics {
        row: if b == 1 { 0 } else { row },
        ks,
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
    })
}

/// Everything a sweep needs besides the `b` list.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub model: NetworkModel,
    pub inner: SharedScheme,
    pub source: ColoredSource,
    pub converter: Converter,
    pub trials: usize,
    pub seed: u64,
    /// Sub-block whose marginal is diagnosed, clamped to `b - 1`.
    pub diagnostic_row: usize,
    pub diagnostic_samples: usize,
    pub profile: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Transform size; `1` for the unconverted scheme.
    pub b: usize,
    pub report: DistortionReport,
    /// One entry per destination.
    pub diagnostics: Vec<GaussianityDiagnostics>,
}

/// Checks a `b` list: non-empty, even, strictly ascending.
pub fn validate_b_list(b_list: &[usize]) -> Result<()> {
    if b_list.is_empty() {
        return Err(Error::Config("b list is empty".into()));
    }
    if let Some(&b) = b_list.iter().find(|&&b| b < 2 || b % 2 != 0) {
        return Err(Error::Config(format!("b = {b} must be even and at least 2")));
    }
    if b_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("b list must be strictly ascending".into()));
    }
    Ok(())
}

/// One sweep row at size `b`, or the unconverted scheme when `b == 1`.
pub fn sweep_row(cfg: &SweepConfig, b: usize) -> Result<SweepRow> {
    let converter = if b == 1 { Converter::None } else { cfg.converter };
    let scheme = converter.apply(cfg.inner.clone(), b, &cfg.model)?;
    let profile = match (converter, cfg.profile) {
        (Converter::Source, true) => Some(Profile::Transformed(b)),
        (Converter::Noise, true) => Some(Profile::Segments(b)),
        _ => None,
    };
    let report = estimate_distortion(&cfg.model, scheme.as_ref(), &cfg.source, cfg.trials, cfg.seed, profile)?;
    let row = cfg.diagnostic_row.min(b - 1);
    let stream = SampleStream::for_trial(cfg.seed, StreamRole::Probe, 0);
    let topo = cfg.model.topology();
    let diagnostics = (0..topo.pairs())
        .map(|m| match converter {
            Converter::Noise => {
                let crate::network::ChannelForm::Additive { noise, .. } = cfg.model.form() else {
                    unreachable!("noise conversion requires additive noise")
                };
                gaussianity(noise, topo.destinations()[m], b, row, cfg.diagnostic_samples, stream)
            }
            _ => gaussianity(&cfg.source, m, b, row, cfg.diagnostic_samples, stream),
        })
        .collect::<Result<_>>()?;
    Ok(SweepRow { b, report, diagnostics })
}

/// Runs the configured conversion at every `b` with the same seed. With
/// [`Converter::None`] the list is ignored and a single row with `b = 1` is
/// returned.
pub fn convergence_sweep(cfg: &SweepConfig, b_list: &[usize]) -> Result<Vec<SweepRow>> {
    if cfg.converter == Converter::None {
        return Ok(vec![sweep_row(cfg, 1)?]);
    }
    validate_b_list(b_list)?;
    b_list.iter().map(|&b| sweep_row(cfg, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::pass_through;
    use crate::sources::{CovarianceSpec, MarginalFamily};
    use std::sync::Arc;

    fn gaussian_source() -> ColoredSource {
        ColoredSource::new(CovarianceSpec::identity(1), MarginalFamily::Gaussian).unwrap()
    }

    #[test]
    fn pass_through_is_distortion_free() {
        let model = NetworkModel::scalar_additive(0.0, MarginalFamily::Gaussian).unwrap();
        let scheme = pass_through(8).unwrap();
        let r = estimate_distortion(&model, &scheme, &gaussian_source(), 100, 1, None).unwrap();
        assert_eq!(r.destinations[0].mse, 0.0);
        assert_eq!(r.destinations[0].ci95, 0.0);
    }

    #[test]
    fn rejects_few_trials_and_bad_b() {
        let model = NetworkModel::scalar_additive(0.0, MarginalFamily::Gaussian).unwrap();
        let scheme = pass_through(8).unwrap();
        assert!(estimate_distortion(&model, &scheme, &gaussian_source(), 99, 1, None).is_err());
        assert!(validate_b_list(&[4, 3]).is_err());
        assert!(validate_b_list(&[8, 4]).is_err());
        assert!(validate_b_list(&[]).is_err());
        assert!(validate_b_list(&[2, 4]).is_ok());
    }

    #[test]
    fn none_converter_is_one_row() {
        let cfg = SweepConfig {
            model: NetworkModel::scalar_additive(0.0, MarginalFamily::Gaussian).unwrap(),
            inner: Arc::new(pass_through(4).unwrap()),
            source: gaussian_source(),
            converter: Converter::None,
            trials: 100,
            seed: 0,
            diagnostic_row: 1,
            diagnostic_samples: 1000,
            profile: false,
        };
        let rows = convergence_sweep(&cfg, &[4, 8]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].b, 1);
    }

    #[test]
    fn converter_tags_round_trip() {
        for tag in Converter::TAGS {
            assert_eq!(Converter::from_tag(tag).unwrap().tag(), tag);
        }
        assert!(Converter::from_tag("both").is_err());
    }
}
