//! Lifting an `n`-slot scheme designed for Gaussian data to an `nb`-slot
//! scheme for arbitrary data.
//!
//! [`convert_for_source`] transforms each length-`b` block of every source
//! with `Q` and runs the inner scheme once per interleaved sub-block, one
//! after another. [`convert_for_noise`] runs `b` copies of the inner scheme
//! side by side on an additive network: every `b` physical slots carry
//! `Q^T` of the `b` effective inputs, and the `b` effective outputs are `Q`
//! of the received physical block.

use std::fmt;
use std::sync::Arc;

use crate::error::{CodecError, Error, Result};
use crate::network::{ChannelForm, NetworkModel};
use crate::scheme::{CodingScheme, History, NodeCodec, NodeContext, Role, SharedScheme};
use crate::sources::{ColoredSource, SampleStream};
use crate::stats::{ks_statistic, lag1_autocorrelation, moments};
use crate::transform::{cached_q, degaussianize, gaussianize, BlockGeometry, InterleavedBlocks, TransformQ};

const INNER_SALT: u64 = 0xc0de_0000;

fn inner_codecs<'a>(
    inner: &'a dyn CodingScheme,
    node: NodeContext,
    stream: SampleStream,
    b: usize,
) -> Result<Vec<Box<dyn NodeCodec + 'a>>, CodecError> {
    (0..b)
        .map(|l| inner.codec(node, stream.derive(INNER_SALT + l as u64)))
        .collect()
}

/// Scheme produced by [`convert_for_source`].
pub struct SourceConverted {
    inner: SharedScheme,
    geom: BlockGeometry,
    q: Arc<TransformQ<f64>>,
}

impl fmt::Debug for SourceConverted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceConverted")
            .field("inner", &self.inner.name())
            .field("n", &self.geom.n())
            .field("b", &self.geom.b())
            .finish()
    }
}

impl SourceConverted {
    pub fn inner(&self) -> &SharedScheme {
        &self.inner
    }

    pub fn geometry(&self) -> BlockGeometry {
        self.geom
    }
}

/// Source-side conversion with transform size `b`. The result has block
/// length `n * b` where `n` is the inner block length.
pub fn convert_for_source(inner: SharedScheme, b: usize) -> Result<SharedScheme> {
    let geom = BlockGeometry::new(inner.block_len(), b)?;
    Ok(Arc::new(SourceConverted {
        q: cached_q(b)?,
        inner,
        geom,
    }))
}

struct SourceConvertedCodec<'a> {
    codecs: Vec<Box<dyn NodeCodec + 'a>>,
    geom: BlockGeometry,
    q: &'a TransformQ<f64>,
    effective: Option<InterleavedBlocks<f64>>,
}

impl NodeCodec for SourceConvertedCodec<'_> {
    fn transmit(&mut self, t: usize, source: Option<&[f64]>, received: &History<'_>) -> Result<f64, CodecError> {
        let n = self.geom.n();
        let (l, tau) = (t / n, t % n);
        if l >= self.geom.b() {
            return Err(CodecError::Rejected(format!("slot {t} beyond block length {}", self.geom.total())));
        }
        let sub_source = match source {
            Some(x) => {
                if self.effective.is_none() {
                    let blocks = gaussianize(self.q, x, self.geom).map_err(|e| CodecError::Rejected(e.to_string()))?;
                    self.effective = Some(blocks);
                }
                self.effective.as_ref().map(|e| e.sub_block(l))
            }
            None => None,
        };
        let history = received.sub(l * n, tau)?;
        self.codecs[l].transmit(tau, sub_source, &history)
    }

    fn reconstruct(&mut self, received: &[f64]) -> Result<Vec<f64>, CodecError> {
        let n = self.geom.n();
        if received.len() != self.geom.total() {
            return Err(CodecError::Rejected(format!(
                "received {} samples, expected {}",
                received.len(),
                self.geom.total()
            )));
        }
        let mut data = Vec::with_capacity(self.geom.total());
        for (l, codec) in self.codecs.iter_mut().enumerate() {
            let part = codec.reconstruct(&received[l * n..(l + 1) * n])?;
            if part.len() != n {
                return Err(CodecError::Rejected(format!(
                    "inner decoder returned {} samples, expected {n}",
                    part.len()
                )));
            }
            data.extend(part);
        }
        let blocks = InterleavedBlocks::from_sub_blocks(n, self.geom.b(), data)
            .map_err(|e| CodecError::Rejected(e.to_string()))?;
        degaussianize(self.q, &blocks, self.geom).map_err(|e| CodecError::Rejected(e.to_string()))
    }
}

impl CodingScheme for SourceConverted {
    fn name(&self) -> String {
        format!("source_converted({}, b={})", self.inner.name(), self.geom.b())
    }

    fn block_len(&self) -> usize {
        self.geom.total()
    }

    fn codec(&self, node: NodeContext, stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
        Ok(Box::new(SourceConvertedCodec {
            codecs: inner_codecs(self.inner.as_ref(), node, stream, self.geom.b())?,
            geom: self.geom,
            q: &self.q,
            effective: None,
        }))
    }
}

/// Scheme produced by [`convert_for_noise`].
pub struct NoiseConverted {
    inner: SharedScheme,
    geom: BlockGeometry,
    q: Arc<TransformQ<f64>>,
}

impl fmt::Debug for NoiseConverted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoiseConverted")
            .field("inner", &self.inner.name())
            .field("n", &self.geom.n())
            .field("b", &self.geom.b())
            .finish()
    }
}

impl NoiseConverted {
    pub fn inner(&self) -> &SharedScheme {
        &self.inner
    }

    pub fn geometry(&self) -> BlockGeometry {
        self.geom
    }
}

/// Noise-side conversion with transform size `b` for use on `model`, which
/// must have additive noise.
///
/// Transmit power is preserved per `b`-block in expectation, not per slot.
pub fn convert_for_noise(inner: SharedScheme, b: usize, model: &NetworkModel) -> Result<SharedScheme> {
    if !matches!(model.form(), ChannelForm::Additive { .. }) {
        return Err(Error::invalid(format!(
            "noise conversion needs an additive-noise network, got {}",
            model.form_name()
        )));
    }
    let geom = BlockGeometry::new(inner.block_len(), b)?;
    Ok(Arc::new(NoiseConverted {
        q: cached_q(b)?,
        inner,
        geom,
    }))
}

struct NoiseConvertedCodec<'a> {
    codecs: Vec<Box<dyn NodeCodec + 'a>>,
    geom: BlockGeometry,
    q: &'a TransformQ<f64>,
    is_source: bool,
    /// Effective outputs, sub-block-major: entry `l * n + t`.
    effective_y: Vec<f64>,
    /// Physical inputs of the current `b`-slot group.
    physical_u: Vec<f64>,
    effective_u: Vec<f64>,
    scratch: Vec<f64>,
}

impl NoiseConvertedCodec<'_> {
    fn absorb(&mut self, t: usize, physical: &[f64]) {
        let n = self.geom.n();
        self.q.apply_into(physical, &mut self.scratch);
        for (l, &v) in self.scratch.iter().enumerate() {
            self.effective_y[l * n + t] = v;
        }
    }
}

impl NodeCodec for NoiseConvertedCodec<'_> {
    fn transmit(&mut self, slot: usize, source: Option<&[f64]>, received: &History<'_>) -> Result<f64, CodecError> {
        let (n, b) = (self.geom.n(), self.geom.b());
        let (t, j) = (slot / b, slot % b);
        if t >= n {
            return Err(CodecError::Rejected(format!("slot {slot} beyond block length {}", self.geom.total())));
        }
        if j == 0 {
            if t > 0 {
                let window = received.window((t - 1) * b..t * b)?;
                self.absorb(t - 1, window);
            }
            if self.is_source && source.is_none() {
                return Err(CodecError::Rejected("source node without a source block".into()));
            }
            for l in 0..b {
                let sub_source = source.map(|x| &x[l * n..(l + 1) * n]);
                let history = History::new(&self.effective_y[l * n..l * n + t]);
                self.effective_u[l] = self.codecs[l].transmit(t, sub_source, &history)?;
            }
            self.q.apply_inverse_into(&self.effective_u, &mut self.physical_u);
        }
        Ok(self.physical_u[j])
    }

    fn reconstruct(&mut self, received: &[f64]) -> Result<Vec<f64>, CodecError> {
        let (n, b) = (self.geom.n(), self.geom.b());
        if received.len() != self.geom.total() {
            return Err(CodecError::Rejected(format!(
                "received {} samples, expected {}",
                received.len(),
                self.geom.total()
            )));
        }
        for t in 0..n {
            self.absorb(t, &received[t * b..(t + 1) * b]);
        }
        let mut out = Vec::with_capacity(self.geom.total());
        for l in 0..b {
            let part = self.codecs[l].reconstruct(&self.effective_y[l * n..(l + 1) * n])?;
            if part.len() != n {
                return Err(CodecError::Rejected(format!(
                    "inner decoder returned {} samples, expected {n}",
                    part.len()
                )));
            }
            out.extend(part);
        }
        Ok(out)
    }
}

impl CodingScheme for NoiseConverted {
    fn name(&self) -> String {
        format!("noise_converted({}, b={})", self.inner.name(), self.geom.b())
    }

    fn block_len(&self) -> usize {
        self.geom.total()
    }

    fn codec(&self, node: NodeContext, stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
        let (n, b) = (self.geom.n(), self.geom.b());
        Ok(Box::new(NoiseConvertedCodec {
            codecs: inner_codecs(self.inner.as_ref(), node, stream, b)?,
            geom: self.geom,
            q: &self.q,
            is_source: matches!(node.role, Role::Source(_)),
            effective_y: vec![0.0; n * b],
            physical_u: vec![0.0; b],
            effective_u: vec![0.0; b],
            scratch: vec![0.0; b],
        }))
    }
}

/// Fewest slots accepted by [`effective_noise_probe`] and
/// [`effective_samples`].
pub const PROBE_MIN_SLOTS: usize = 1000;

/// Draws `slots * b` i.i.d. vectors from `source`, transforms each
/// component's length-`b` blocks with `Q`, and returns sub-block `row` as a
/// `slots x dim` row-major matrix.
pub fn effective_samples(source: &ColoredSource, b: usize, row: usize, slots: usize, stream: SampleStream) -> Result<Vec<f64>> {
    let mut out = effective_rows(source, b, &[row], slots, stream)?;
    Ok(out.pop().unwrap_or_default())
}

fn effective_rows(
    source: &ColoredSource,
    b: usize,
    rows: &[usize],
    slots: usize,
    stream: SampleStream,
) -> Result<Vec<Vec<f64>>> {
    let q = cached_q(b)?;
    if let Some(&r) = rows.iter().find(|&&r| r >= b) {
        return Err(Error::invalid(format!("sub-block {r} out of range 0..{b}")));
    }
    let dim = source.dim();
    let mut rng = stream.rng();
    let mut white = vec![0.0; dim];
    let mut draw = vec![0.0; dim];
    let mut blocks = vec![0.0; dim * b];
    let mut transformed = vec![0.0; b];
    let mut out: Vec<Vec<f64>> = rows.iter().map(|_| Vec::with_capacity(slots * dim)).collect();
    let mut per_row = vec![0.0; rows.len() * dim];
    for _ in 0..slots {
        for j in 0..b {
            source.sample_into(&mut rng, &mut white, &mut draw);
            for (i, &v) in draw.iter().enumerate() {
                blocks[i * b + j] = v;
            }
        }
        for i in 0..dim {
            q.apply_into(&blocks[i * b..(i + 1) * b], &mut transformed);
            for (r, &row) in rows.iter().enumerate() {
                per_row[r * dim + i] = transformed[row];
            }
        }
        for (r, o) in out.iter_mut().enumerate() {
            o.extend_from_slice(&per_row[r * dim..(r + 1) * dim]);
        }
    }
    Ok(out)
}

/// Statistics of one effective-noise sub-block across `slots` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveNoiseRow {
    pub row: usize,
    /// Empirical second moments `E[Z~_i Z~_j]`, row-major `dim x dim`.
    pub covariance: Vec<f64>,
    /// Standard error of each covariance entry.
    pub covariance_stderr: Vec<f64>,
    pub skewness: Vec<f64>,
    pub excess_kurtosis: Vec<f64>,
    /// KS distance of each component to `N(0, K_ii)`; `None` where `K_ii = 0`.
    pub ks: Vec<Option<f64>>,
    /// Lag-one autocorrelation across slots, per component.
    pub lag1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveNoiseReport {
    pub b: usize,
    pub slots: usize,
    pub dim: usize,
    pub rows: Vec<EffectiveNoiseRow>,
}

/// Transforms raw noise draws of an additive `model` and reports per-row
/// statistics of the effective noise for the sub-blocks in `rows`.
pub fn effective_noise_probe(
    model: &NetworkModel,
    b: usize,
    slots: usize,
    rows: &[usize],
    stream: SampleStream,
) -> Result<EffectiveNoiseReport> {
    let ChannelForm::Additive { noise, .. } = model.form() else {
        return Err(Error::invalid(format!(
            "effective noise needs an additive-noise network, got {}",
            model.form_name()
        )));
    };
    BlockGeometry::new(1, b)?;
    if slots < PROBE_MIN_SLOTS {
        return Err(Error::invalid(format!("probe needs at least {PROBE_MIN_SLOTS} slots, got {slots}")));
    }
    let dim = noise.dim();
    let samples = effective_rows(noise, b, rows, slots, stream)?;
    let rows = rows
        .iter()
        .zip(samples)
        .map(|(&row, data)| summarize(row, dim, slots, &data, noise))
        .collect::<Result<Vec<_>>>()?;
    Ok(EffectiveNoiseReport { b, slots, dim, rows })
}

fn summarize(row: usize, dim: usize, slots: usize, data: &[f64], noise: &ColoredSource) -> Result<EffectiveNoiseRow> {
    let mut covariance = vec![0.0; dim * dim];
    let mut covariance_stderr = vec![0.0; dim * dim];
    let mut products = vec![0.0; slots];
    for i in 0..dim {
        for j in 0..dim {
            for (t, p) in products.iter_mut().enumerate() {
                *p = data[t * dim + i] * data[t * dim + j];
            }
            let (mean, se) = crate::stats::mean_stderr(&products);
            covariance[i * dim + j] = mean;
            covariance_stderr[i * dim + j] = se;
        }
    }
    let mut skewness = Vec::with_capacity(dim);
    let mut excess_kurtosis = Vec::with_capacity(dim);
    let mut ks = Vec::with_capacity(dim);
    let mut lag1 = Vec::with_capacity(dim);
    for i in 0..dim {
        let column: Vec<f64> = (0..slots).map(|t| data[t * dim + i]).collect();
        let m = moments(&column)?;
        skewness.push(m.skewness);
        excess_kurtosis.push(m.excess_kurtosis);
        lag1.push(lag1_autocorrelation(&column));
        let var = noise.covariance.get(i, i);
        ks.push(if var > 0.0 {
            Some(ks_statistic(&column, var.sqrt())?)
        } else {
            None
        });
    }
    Ok(EffectiveNoiseRow {
        row,
        covariance,
        covariance_stderr,
        skewness,
        excess_kurtosis,
        ks,
        lag1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{run_scheme, RunStreams, Topology};
    use crate::scheme::{baseline_sign_bpsk, pass_through};
    use crate::sources::{CovarianceSpec, MarginalFamily};

    fn noiseless() -> NetworkModel {
        let cov = CovarianceSpec::new(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        NetworkModel::additive(
            Topology::point_to_point(),
            &[vec![0.0, 0.0], vec![1.0, 0.0]],
            ColoredSource::new(cov, MarginalFamily::Gaussian).unwrap(),
        )
        .unwrap()
    }

    fn streams() -> RunStreams {
        RunStreams {
            noise: SampleStream::new(3, 1),
            encoder: SampleStream::new(3, 2),
        }
    }

    #[test]
    fn source_round_trip_b2() {
        let inner: SharedScheme = Arc::new(pass_through(3).unwrap());
        let scheme = convert_for_source(inner, 2).unwrap();
        assert_eq!(scheme.block_len(), 6);
        let x = vec![1.0, -2.0, 0.5, 4.0, -3.25, 0.0];
        let (rec, _) = run_scheme(&noiseless(), scheme.as_ref(), &[x.clone()], streams()).unwrap();
        for (a, b) in rec[0].iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_round_trip() {
        let inner: SharedScheme = Arc::new(pass_through(4).unwrap());
        let model = noiseless();
        let scheme = convert_for_noise(inner, 8, &model).unwrap();
        let x: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin()).collect();
        let (rec, _) = run_scheme(&model, scheme.as_ref(), &[x.clone()], streams()).unwrap();
        for (a, b) in rec[0].iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_odd_and_non_additive() {
        let inner: SharedScheme = Arc::new(pass_through(4).unwrap());
        assert!(convert_for_source(inner.clone(), 3).is_err());
        assert!(convert_for_noise(inner.clone(), 5, &noiseless()).is_err());
        let pipe = NetworkModel::scalar_bit_pipe(3, 4.0).unwrap();
        assert!(convert_for_noise(inner, 4, &pipe).is_err());
    }

    #[test]
    fn bpsk_noise_conversion_runs() {
        let inner: SharedScheme = Arc::new(baseline_sign_bpsk(1.0, 1.0, 1.0, 5).unwrap());
        let model = NetworkModel::scalar_additive(1.0, MarginalFamily::Rademacher).unwrap();
        let scheme = convert_for_noise(inner, 4, &model).unwrap();
        let x = vec![0.3; 20];
        let (rec, transcript) = run_scheme(&model, scheme.as_ref(), &[x], streams()).unwrap();
        assert_eq!(rec[0].len(), 20);
        assert_eq!(transcript.len(), 20);
    }

    #[test]
    fn probe_preconditions() {
        let model = NetworkModel::scalar_additive(1.0, MarginalFamily::Uniform).unwrap();
        assert!(effective_noise_probe(&model, 4, 999, &[0], SampleStream::new(0, 0)).is_err());
        assert!(effective_noise_probe(&model, 4, 1000, &[4], SampleStream::new(0, 0)).is_err());
        let r = effective_noise_probe(&model, 4, 1000, &[1], SampleStream::new(0, 0)).unwrap();
        assert_eq!(r.rows[0].ks[0], None);
        assert!(r.rows[0].ks[1].is_some());
    }
}
