//! Block coding schemes as per-node state machines, the wrappers that make a
//! scheme bounded or finite-precision, and a small library of baselines
//! designed for Gaussian sources and noise.
//!
//! A scheme of block length `n` hands out one [`NodeCodec`] per node and per
//! block. At slot `t` a codec sees only the received samples `Y[0..t]` of its
//! own node (through [`History`]) and, for source nodes, the whole source
//! block. Destinations reconstruct from their full received block after the
//! last slot.

use std::cell::Cell;
use std::fmt::Debug;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{CausalityViolation, CodecError, Error, Result};
use crate::precision::floor_to;
use crate::quantizer::UniformQuantizer;
use crate::sources::{dither, SampleStream, StreamRng};

/// Role of a node in a `(k, N)` network; the index is the pair index `m`
/// for sources and destinations and the relay index `p` for relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Source(usize),
    Relay(usize),
    Destination(usize),
}

/// Identity handed to a codec when it is created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeContext {
    /// Node index in `0..N`.
    pub id: usize,
    pub role: Role,
}

/// Records the largest received index a codec touched.
#[derive(Debug, Default)]
pub struct AccessProbe {
    max_read: Cell<Option<usize>>,
}

impl AccessProbe {
    pub fn new() -> Self {
        Self::default()
    }

    fn touch(&self, index: usize) {
        let cur = self.max_read.get();
        if cur.is_none_or(|m| index > m) {
            self.max_read.set(Some(index));
        }
    }

    pub fn max_read(&self) -> Option<usize> {
        self.max_read.get()
    }

    pub fn reset(&self) {
        self.max_read.set(None);
    }
}

/// Causal view of one node's received signal: only the samples delivered so
/// far are reachable.
#[derive(Debug, Clone, Copy)]
pub struct History<'a> {
    visible: &'a [f64],
    offset: usize,
    probe: Option<&'a AccessProbe>,
}

impl<'a> History<'a> {
    pub fn new(visible: &'a [f64]) -> Self {
        History {
            visible,
            offset: 0,
            probe: None,
        }
    }

    pub fn with_probe(visible: &'a [f64], probe: &'a AccessProbe) -> Self {
        History {
            visible,
            offset: 0,
            probe: Some(probe),
        }
    }

    pub fn empty() -> History<'static> {
        History {
            visible: &[],
            offset: 0,
            probe: None,
        }
    }

    /// View of `len` samples starting at `start`, indexed from zero. Reads
    /// through the view are recorded at their original positions.
    pub fn sub(&self, start: usize, len: usize) -> Result<History<'a>, CausalityViolation> {
        let end = start + len;
        if end > self.visible.len() {
            return Err(CausalityViolation {
                requested: end - 1,
                available: self.visible.len(),
            });
        }
        Ok(History {
            visible: &self.visible[start..end],
            offset: self.offset + start,
            probe: self.probe,
        })
    }

    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }

    /// Sample `index`, or a causality violation if it has not arrived.
    pub fn get(&self, index: usize) -> Result<f64, CausalityViolation> {
        match self.visible.get(index) {
            Some(&v) => {
                if let Some(p) = self.probe {
                    p.touch(self.offset + index);
                }
                Ok(v)
            }
            None => Err(CausalityViolation {
                requested: index,
                available: self.visible.len(),
            }),
        }
    }

    /// Samples in `range`, or a causality violation if any has not arrived.
    pub fn window(&self, range: Range<usize>) -> Result<&'a [f64], CausalityViolation> {
        if range.end > self.visible.len() {
            return Err(CausalityViolation {
                requested: range.end.saturating_sub(1),
                available: self.visible.len(),
            });
        }
        if let (Some(p), false) = (self.probe, range.is_empty()) {
            p.touch(self.offset + range.end - 1);
        }
        Ok(&self.visible[range])
    }

    /// Everything received so far.
    pub fn as_slice(&self) -> &'a [f64] {
        if let (Some(p), false) = (self.probe, self.visible.is_empty()) {
            p.touch(self.offset + self.visible.len() - 1);
        }
        self.visible
    }
}

/// Per-node, per-block state machine of a coding scheme.
pub trait NodeCodec {
    /// Channel input `U[t]`. `source` is the node's whole source block for
    /// source nodes and `None` otherwise.
    fn transmit(&mut self, t: usize, source: Option<&[f64]>, received: &History<'_>) -> Result<f64, CodecError>;

    /// Reconstruction from the full received block; destinations only.
    fn reconstruct(&mut self, _received: &[f64]) -> Result<Vec<f64>, CodecError> {
        Err(CodecError::Rejected("node has no decoder".into()))
    }
}

/// A block coding scheme: a factory of node codecs for one block of length
/// [`block_len`](CodingScheme::block_len).
pub trait CodingScheme: Send + Sync + Debug {
    fn name(&self) -> String;

    fn block_len(&self) -> usize;

    /// Fresh codec for `node`; `stream` is private randomness for that node.
    fn codec(&self, node: NodeContext, stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError>;
}

pub type SharedScheme = Arc<dyn CodingScheme>;

/// Componentwise decoder clamp bound `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipSpec {
    bound: f64,
}

impl ClipSpec {
    pub fn new(bound: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::invalid(format!("clip bound must be positive and finite, got {bound}")));
        }
        Ok(ClipSpec { bound })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// Bits of precision, either one value for every index or one per index
/// (source index for encoding precision, node index for reading precision).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionSpec {
    rho: Vec<u32>,
    per_index: bool,
}

impl PrecisionSpec {
    pub fn uniform(rho: u32) -> Result<Self> {
        Self::check(&[rho])?;
        Ok(PrecisionSpec {
            rho: vec![rho],
            per_index: false,
        })
    }

    pub fn per_index(rho: Vec<u32>) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::invalid("precision list must not be empty"));
        }
        Self::check(&rho)?;
        Ok(PrecisionSpec { rho, per_index: true })
    }

    fn check(rho: &[u32]) -> Result<()> {
        if let Some(bad) = rho.iter().find(|&&r| r == 0 || r > 52) {
            return Err(Error::invalid(format!("precision must be in 1..=52 bits, got {bad}")));
        }
        Ok(())
    }

    pub fn rho_for(&self, index: usize) -> Result<u32, CodecError> {
        if self.per_index {
            self.rho
                .get(index)
                .copied()
                .ok_or_else(|| CodecError::Rejected(format!("no precision given for index {index}")))
        } else {
            Ok(self.rho[0])
        }
    }
}

struct ClippedCodec<'a> {
    inner: Box<dyn NodeCodec + 'a>,
    bound: f64,
}

impl NodeCodec for ClippedCodec<'_> {
    fn transmit(&mut self, t: usize, source: Option<&[f64]>, received: &History<'_>) -> Result<f64, CodecError> {
        self.inner.transmit(t, source, received)
    }

    fn reconstruct(&mut self, received: &[f64]) -> Result<Vec<f64>, CodecError> {
        let mut out = self.inner.reconstruct(received)?;
        for v in &mut out {
            *v = v.clamp(-self.bound, self.bound);
        }
        Ok(out)
    }
}

#[derive(Debug)]
struct ClippedScheme {
    inner: SharedScheme,
    spec: ClipSpec,
}

impl CodingScheme for ClippedScheme {
    fn name(&self) -> String {
        format!("clip({}, M={})", self.inner.name(), self.spec.bound)
    }

    fn block_len(&self) -> usize {
        self.inner.block_len()
    }

    fn codec(&self, node: NodeContext, stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
        Ok(Box::new(ClippedCodec {
            inner: self.inner.codec(node, stream)?,
            bound: self.spec.bound,
        }))
    }
}

/// Clamps every decoder output to `[-M, M]`; encoders are untouched.
pub fn clip_outputs(scheme: SharedScheme, spec: ClipSpec) -> SharedScheme {
    Arc::new(ClippedScheme { inner: scheme, spec })
}

struct EncodingPrecisionCodec<'a> {
    inner: Box<dyn NodeCodec + 'a>,
    rho: u32,
    floored: Vec<f64>,
}

impl NodeCodec for EncodingPrecisionCodec<'_> {
    fn transmit(&mut self, t: usize, source: Option<&[f64]>, received: &History<'_>) -> Result<f64, CodecError> {
        match source {
            Some(x) => {
                self.floored.clear();
                self.floored.extend(x.iter().map(|&v| floor_to(v, self.rho)));
                self.inner.transmit(t, Some(&self.floored), received)
            }
            None => self.inner.transmit(t, None, received),
        }
    }

    fn reconstruct(&mut self, received: &[f64]) -> Result<Vec<f64>, CodecError> {
        self.inner.reconstruct(received)
    }
}

#[derive(Debug)]
struct EncodingPrecisionScheme {
    inner: SharedScheme,
    spec: PrecisionSpec,
}

impl CodingScheme for EncodingPrecisionScheme {
    fn name(&self) -> String {
        format!("encoding_precision({}, rho={:?})", self.inner.name(), self.spec.rho)
    }

    fn block_len(&self) -> usize {
        self.inner.block_len()
    }

    fn codec(&self, node: NodeContext, stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
        let inner = self.inner.codec(node, stream)?;
        match node.role {
            Role::Source(m) => Ok(Box::new(EncodingPrecisionCodec {
                inner,
                rho: self.spec.rho_for(m)?,
                floored: Vec::new(),
            })),
            _ => Ok(inner),
        }
    }
}

/// Source encoders see their source block only through `rho_m`-bit flooring.
pub fn limit_encoding_precision(scheme: SharedScheme, spec: PrecisionSpec) -> SharedScheme {
    Arc::new(EncodingPrecisionScheme { inner: scheme, spec })
}

struct ReadingPrecisionCodec<'a> {
    inner: Box<dyn NodeCodec + 'a>,
    rho: u32,
    dither: Option<StreamRng>,
    read: Vec<f64>,
}

impl ReadingPrecisionCodec<'_> {
    fn process(&mut self, y: f64) -> f64 {
        match &mut self.dither {
            Some(rng) => dither(y, self.rho, rng),
            None => floor_to(y, self.rho),
        }
    }
}

impl NodeCodec for ReadingPrecisionCodec<'_> {
    fn transmit(&mut self, t: usize, source: Option<&[f64]>, received: &History<'_>) -> Result<f64, CodecError> {
        for i in self.read.len()..received.len() {
            let v = self.process(received.get(i)?);
            self.read.push(v);
        }
        let visible = &self.read[..received.len()];
        self.inner.transmit(t, source, &History::new(visible))
    }

    fn reconstruct(&mut self, received: &[f64]) -> Result<Vec<f64>, CodecError> {
        for i in self.read.len()..received.len() {
            let v = self.process(received[i]);
            self.read.push(v);
        }
        self.inner.reconstruct(&self.read[..received.len()])
    }
}

#[derive(Debug)]
struct ReadingPrecisionScheme {
    inner: SharedScheme,
    spec: PrecisionSpec,
    dithered: bool,
}

impl CodingScheme for ReadingPrecisionScheme {
    fn name(&self) -> String {
        format!(
            "reading_precision({}, rho={:?}{})",
            self.inner.name(),
            self.spec.rho,
            if self.dithered { ", dithered" } else { "" }
        )
    }

    fn block_len(&self) -> usize {
        self.inner.block_len()
    }

    fn codec(&self, node: NodeContext, stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
        let rho = self.spec.rho_for(node.id)?;
        let dither = self.dithered.then(|| stream.derive(0xd17e_7000).rng());
        Ok(Box::new(ReadingPrecisionCodec {
            inner: self.inner.codec(node, stream)?,
            rho,
            dither,
            read: Vec::new(),
        }))
    }
}

/// Every read of a received sample, by encoders and decoders alike, goes
/// through `rho_i`-bit flooring at node `i`. With `dithered`, an independent
/// uniform on `(-2^-(rho+1), 2^-(rho+1))` is added to each floored sample.
pub fn limit_reading_precision(scheme: SharedScheme, spec: PrecisionSpec, dithered: bool) -> SharedScheme {
    Arc::new(ReadingPrecisionScheme {
        inner: scheme,
        spec,
        dithered,
    })
}

/// A memoryless per-symbol mapping used by the baselines: the source node of
/// pair `m` sends `encode(X_m[t])` in slot `t`, and its destination
/// reconstructs `decode(Y[t])` sample by sample. Relays and destinations send
/// zero.
pub trait SymbolMap: Send + Sync + Debug {
    fn name(&self) -> String;
    fn encode(&self, x: f64) -> f64;
    fn decode(&self, y: f64) -> f64;
}

/// A [`SymbolMap`] repeated over a block of `n` slots.
#[derive(Debug, Clone)]
pub struct SymbolScheme<M> {
    map: M,
    n: usize,
}

impl<M: SymbolMap> SymbolScheme<M> {
    pub fn new(map: M, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("block length must be >= 1"));
        }
        Ok(SymbolScheme { map, n })
    }

    pub fn map(&self) -> &M {
        &self.map
    }
}

struct SymbolCodec<'a, M> {
    map: &'a M,
    role: Role,
}

impl<M: SymbolMap> NodeCodec for SymbolCodec<'_, M> {
    fn transmit(&mut self, t: usize, source: Option<&[f64]>, _received: &History<'_>) -> Result<f64, CodecError> {
        match (self.role, source) {
            (Role::Source(_), Some(x)) => {
                let v = x
                    .get(t)
                    .ok_or_else(|| CodecError::Rejected(format!("source block shorter than slot {t}")))?;
                Ok(self.map.encode(*v))
            }
            (Role::Source(_), None) => Err(CodecError::Rejected("source node without a source".into())),
            _ => Ok(0.0),
        }
    }

    fn reconstruct(&mut self, received: &[f64]) -> Result<Vec<f64>, CodecError> {
        match self.role {
            Role::Destination(_) => Ok(received.iter().map(|&y| self.map.decode(y)).collect()),
            _ => Err(CodecError::Rejected("node has no decoder".into())),
        }
    }
}

impl<M: SymbolMap> CodingScheme for SymbolScheme<M> {
    fn name(&self) -> String {
        self.map.name()
    }

    fn block_len(&self) -> usize {
        self.n
    }

    fn codec(&self, node: NodeContext, _stream: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
        Ok(Box::new(SymbolCodec {
            map: &self.map,
            role: node.role,
        }))
    }
}

/// `U = gain * X`, `X^ = Y / gain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub gain: f64,
}

impl SymbolMap for Linear {
    fn name(&self) -> String {
        if self.gain == 1.0 {
            "pass_through".into()
        } else {
            format!("linear(gain={})", self.gain)
        }
    }

    fn encode(&self, x: f64) -> f64 {
        self.gain * x
    }

    fn decode(&self, y: f64) -> f64 {
        y / self.gain
    }
}

/// Sends the source sample as is and outputs the received sample.
pub fn pass_through(n: usize) -> Result<SymbolScheme<Linear>> {
    SymbolScheme::new(Linear { gain: 1.0 }, n)
}

/// Uncoded transmission with the linear MMSE decoder designed for Gaussian
/// source and noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncodedLmmse {
    pub enc_gain: f64,
    pub dec_gain: f64,
}

impl SymbolMap for UncodedLmmse {
    fn name(&self) -> String {
        "uncoded_lmmse".into()
    }

    fn encode(&self, x: f64) -> f64 {
        self.enc_gain * x
    }

    fn decode(&self, y: f64) -> f64 {
        self.dec_gain * y
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be non-negative and finite, got {v}")));
    }
    Ok(())
}

/// `U = sqrt(P / var) X`, `X^ = sqrt(P var) / (P + noise_var) Y`.
///
/// A zero noise variance is accepted (noiseless design).
pub fn baseline_uncoded_lmmse(power: f64, source_var: f64, noise_var: f64, n: usize) -> Result<SymbolScheme<UncodedLmmse>> {
    positive("power", power)?;
    positive("source variance", source_var)?;
    non_negative("noise variance", noise_var)?;
    SymbolScheme::new(
        UncodedLmmse {
            enc_gain: (power / source_var).sqrt(),
            dec_gain: (power * source_var).sqrt() / (power + noise_var),
        },
        n,
    )
}

/// Antipodal signalling of the source sign; the decoder outputs the
/// half-normal conditional mean `sign(Y) * sigma * sqrt(2/pi)`. Ties
/// (`X = 0`, `Y = 0`) resolve to the positive sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignBpsk {
    pub amplitude: f64,
    pub level: f64,
}

impl SymbolMap for SignBpsk {
    fn name(&self) -> String {
        "sign_bpsk".into()
    }

    fn encode(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.amplitude
        } else {
            -self.amplitude
        }
    }

    fn decode(&self, y: f64) -> f64 {
        if y >= 0.0 {
            self.level
        } else {
            -self.level
        }
    }
}

pub fn baseline_sign_bpsk(power: f64, noise_var: f64, source_var: f64, n: usize) -> Result<SymbolScheme<SignBpsk>> {
    positive("power", power)?;
    non_negative("noise variance", noise_var)?;
    positive("source variance", source_var)?;
    SymbolScheme::new(
        SignBpsk {
            amplitude: power.sqrt(),
            level: (source_var * 2.0 / std::f64::consts::PI).sqrt(),
        },
        n,
    )
}

/// Mid-rise uniform quantizer over `[-A sigma, A sigma]`. The encoder sends
/// the midpoint of the source cell, which is a fixed point of a bit pipe with
/// the same rate and range, and the decoder requantizes what it receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarQuantizer {
    pub quantizer: UniformQuantizer<f64>,
}

impl SymbolMap for ScalarQuantizer {
    fn name(&self) -> String {
        "scalar_quantizer".into()
    }

    fn encode(&self, x: f64) -> f64 {
        self.quantizer.quantize(x)
    }

    fn decode(&self, y: f64) -> f64 {
        self.quantizer.quantize(y)
    }
}

/// Default loading factor `A`.
pub const DEFAULT_LOADING: f64 = 4.0;

pub fn baseline_scalar_quantizer(bits: u32, design_var: f64, loading: f64, n: usize) -> Result<SymbolScheme<ScalarQuantizer>> {
    positive("design variance", design_var)?;
    positive("loading factor", loading)?;
    let quantizer = UniformQuantizer::new(bits, loading * design_var.sqrt())?;
    SymbolScheme::new(ScalarQuantizer { quantizer }, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source_ctx() -> NodeContext {
        NodeContext {
            id: 0,
            role: Role::Source(0),
        }
    }

    fn dest_ctx() -> NodeContext {
        NodeContext {
            id: 1,
            role: Role::Destination(0),
        }
    }

    #[derive(Debug)]
    struct FixedDecoder(Vec<f64>);

    struct FixedCodec<'a>(&'a [f64]);

    impl NodeCodec for FixedCodec<'_> {
        fn transmit(&mut self, _t: usize, _s: Option<&[f64]>, _r: &History<'_>) -> Result<f64, CodecError> {
            Ok(0.0)
        }
        fn reconstruct(&mut self, _received: &[f64]) -> Result<Vec<f64>, CodecError> {
            Ok(self.0.to_vec())
        }
    }

    impl CodingScheme for FixedDecoder {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn block_len(&self) -> usize {
            self.0.len()
        }
        fn codec(&self, _node: NodeContext, _s: SampleStream) -> Result<Box<dyn NodeCodec + '_>, CodecError> {
            Ok(Box::new(FixedCodec(&self.0)))
        }
    }

    #[test]
    fn clip_clamps_decoder_outputs() {
        let inner: SharedScheme = Arc::new(FixedDecoder(vec![5.0, -7.0, 0.1]));
        let clipped = clip_outputs(inner, ClipSpec::new(2.0).unwrap());
        let mut c = clipped.codec(dest_ctx(), SampleStream::new(0, 0)).unwrap();
        assert_eq!(c.reconstruct(&[0.0; 3]).unwrap(), vec![2.0, -2.0, 0.1]);
        assert!(ClipSpec::new(0.0).is_err());
        assert!(ClipSpec::new(f64::INFINITY).is_err());
    }

    #[test]
    fn history_blocks_future_reads() {
        let data = [1.0, 2.0, 3.0];
        let probe = AccessProbe::new();
        let h = History::with_probe(&data[..2], &probe);
        assert_eq!(h.get(1), Ok(2.0));
        assert_eq!(probe.max_read(), Some(1));
        assert_eq!(
            h.get(2),
            Err(CausalityViolation {
                requested: 2,
                available: 2
            })
        );
        assert!(h.window(0..3).is_err());
        assert_eq!(h.window(0..2).unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn encoding_precision_passes_floored_source() {
        let scheme: SharedScheme = Arc::new(pass_through(1).unwrap());
        let wrapped = limit_encoding_precision(scheme, PrecisionSpec::uniform(1).unwrap());
        let mut c = wrapped.codec(source_ctx(), SampleStream::new(0, 0)).unwrap();
        assert_eq!(c.transmit(0, Some(&[0.7]), &History::empty()).unwrap(), 0.5);
    }

    #[test]
    fn reading_precision_floors_decoder_input() {
        let scheme: SharedScheme = Arc::new(pass_through(2).unwrap());
        let wrapped = limit_reading_precision(scheme, PrecisionSpec::uniform(2).unwrap(), false);
        let mut c = wrapped.codec(dest_ctx(), SampleStream::new(0, 0)).unwrap();
        assert_eq!(c.reconstruct(&[0.3, -0.3]).unwrap(), vec![0.25, -0.5]);
    }

    #[test]
    fn per_index_precision_requires_entry() {
        let scheme: SharedScheme = Arc::new(pass_through(1).unwrap());
        let wrapped = limit_reading_precision(scheme, PrecisionSpec::per_index(vec![3]).unwrap(), false);
        assert!(wrapped.codec(dest_ctx(), SampleStream::new(0, 0)).is_err());
        assert!(PrecisionSpec::uniform(0).is_err());
    }

    #[test]
    fn baseline_parameters_validated() {
        assert!(baseline_uncoded_lmmse(0.0, 1.0, 1.0, 1).is_err());
        assert!(baseline_uncoded_lmmse(1.0, -1.0, 1.0, 1).is_err());
        assert!(baseline_uncoded_lmmse(1.0, 1.0, 0.0, 1).is_ok());
        assert!(baseline_sign_bpsk(1.0, 1.0, 0.0, 1).is_err());
        assert!(baseline_scalar_quantizer(0, 1.0, 4.0, 1).is_err());
        assert!(baseline_scalar_quantizer(17, 1.0, 4.0, 1).is_err());
        assert!(baseline_scalar_quantizer(3, 1.0, 0.0, 1).is_err());
        assert!(pass_through(0).is_err());
    }

    #[test]
    fn scalar_quantizer_example() {
        let s = baseline_scalar_quantizer(1, 1.0, 1.0, 1).unwrap();
        assert_eq!(s.map().encode(0.3), 0.5);
        let s = baseline_scalar_quantizer(3, 1.0, 4.0, 1).unwrap();
        assert_eq!(s.map().encode(50.0), 3.5);
        assert_eq!(s.map().encode(-50.0), -3.5);
    }

    #[test]
    fn bpsk_levels() {
        let s = baseline_sign_bpsk(4.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(s.map().encode(0.1), 2.0);
        assert_eq!(s.map().encode(-0.1), -2.0);
        assert!((s.map().decode(0.2) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }
}
