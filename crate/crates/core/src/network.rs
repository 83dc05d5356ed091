//! Memoryless networks and the time-slotted engine that runs a coding scheme
//! over them.
//!
//! Each slot the engine first draws the exogenous noise, then asks every node
//! codec for its input given the received samples of earlier slots, then
//! evaluates the channel. Noise is drawn from a stream that is never handed to
//! codecs.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{CodecError, Error, Result};
use crate::quantizer::UniformQuantizer;
use crate::scheme::{AccessProbe, CodingScheme, History, NodeContext, Role};
use crate::sources::{ColoredSource, SampleStream, StreamRng};

/// Node roles of a `(k, N)` network. Source `m` is paired with destination
/// `m`; nodes that are neither are relays, numbered in increasing node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: usize,
    sources: Vec<usize>,
    destinations: Vec<usize>,
    relays: Vec<usize>,
    roles: Vec<Role>,
}

impl Topology {
    pub fn new(nodes: usize, sources: Vec<usize>, destinations: Vec<usize>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::invalid("network needs at least one source/destination pair"));
        }
        if sources.len() != destinations.len() {
            return Err(Error::invalid(format!(
                "{} sources but {} destinations",
                sources.len(),
                destinations.len()
            )));
        }
        let mut roles: Vec<Option<Role>> = vec![None; nodes];
        for (m, &s) in sources.iter().enumerate() {
            let slot = roles
                .get_mut(s)
                .ok_or_else(|| Error::invalid(format!("source node {s} out of range 0..{nodes}")))?;
            if slot.is_some() {
                return Err(Error::invalid(format!("node {s} listed twice")));
            }
            *slot = Some(Role::Source(m));
        }
        for (m, &d) in destinations.iter().enumerate() {
            let slot = roles
                .get_mut(d)
                .ok_or_else(|| Error::invalid(format!("destination node {d} out of range 0..{nodes}")))?;
            if slot.is_some() {
                return Err(Error::invalid(format!(
                    "node {d} is both a source and a destination or listed twice"
                )));
            }
            *slot = Some(Role::Destination(m));
        }
        let mut relays = Vec::new();
        let roles = roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.unwrap_or_else(|| {
                    relays.push(i);
                    Role::Relay(relays.len() - 1)
                })
            })
            .collect();
        Ok(Topology {
            nodes,
            sources,
            destinations,
            relays,
            roles,
        })
    }

    /// Two nodes: source `0`, destination `1`.
    pub fn point_to_point() -> Self {
        Topology::new(2, vec![0], vec![1]).expect("valid topology")
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn pairs(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn destinations(&self) -> &[usize] {
        &self.destinations
    }

    pub fn relays(&self) -> &[usize] {
        &self.relays
    }

    pub fn role(&self, node: usize) -> Role {
        self.roles[node]
    }
}

/// Channel given as deterministic per-node maps `Y_i = h_i(U, Z)` of the
/// inputs and an exogenous noise vector `Z` drawn independently of `U`.
pub trait FunctionalChannel: Send + Sync + Debug {
    fn name(&self) -> String;

    fn nodes(&self) -> usize;

    /// Length of `Z`; zero for deterministic channels.
    fn noise_dim(&self) -> usize;

    fn sample_noise(&self, rng: &mut StreamRng, z: &mut [f64]);

    fn output(&self, inputs: &[f64], z: &[f64], out: &mut [f64]);
}

/// One noiseless rate-limited link: node `to` receives the `bits`-bit
/// mid-rise quantization of node `from`'s input over `[-amplitude, amplitude]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitPipeLink {
    pub from: usize,
    pub to: usize,
    pub quantizer: UniformQuantizer<f64>,
}

/// Wireline network of noiseless bit pipes. Nodes without an incoming link
/// receive zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BitPipeNetwork {
    nodes: usize,
    links: Vec<BitPipeLink>,
}

impl BitPipeNetwork {
    pub fn new(nodes: usize, links: Vec<BitPipeLink>) -> Result<Self> {
        let mut incoming = vec![false; nodes];
        for l in &links {
            if l.from >= nodes || l.to >= nodes {
                return Err(Error::invalid(format!("bit pipe {} -> {} out of range 0..{nodes}", l.from, l.to)));
            }
            if std::mem::replace(&mut incoming[l.to], true) {
                return Err(Error::invalid(format!("node {} has more than one incoming bit pipe", l.to)));
            }
        }
        Ok(BitPipeNetwork { nodes, links })
    }

    pub fn links(&self) -> &[BitPipeLink] {
        &self.links
    }
}

impl FunctionalChannel for BitPipeNetwork {
    fn name(&self) -> String {
        "bit_pipe".into()
    }

    fn nodes(&self) -> usize {
        self.nodes
    }

    fn noise_dim(&self) -> usize {
        0
    }

    fn sample_noise(&self, _rng: &mut StreamRng, _z: &mut [f64]) {}

    fn output(&self, inputs: &[f64], _z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for l in &self.links {
            out[l.to] = l.quantizer.quantize(inputs[l.from]);
        }
    }
}

/// How outputs are produced from inputs.
#[derive(Debug, Clone)]
pub enum ChannelForm {
    /// `Y = H U + Z` with `Z` i.i.d. across slots and independent of `U`.
    Additive { h: Vec<f64>, noise: ColoredSource },
    Functional(Arc<dyn FunctionalChannel>),
}

#[derive(Debug, Clone)]
pub struct NetworkModel {
    topology: Topology,
    form: ChannelForm,
}

impl NetworkModel {
    pub fn additive(topology: Topology, h: &[Vec<f64>], noise: ColoredSource) -> Result<Self> {
        let n = topology.nodes();
        if h.len() != n || h.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("H must be {n} x {n}")));
        }
        let h: Vec<f64> = h.iter().flatten().copied().collect();
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("H entries must be finite"));
        }
        if noise.dim() != n {
            return Err(Error::invalid(format!("noise covariance is {0}x{0}, network has {n} nodes", noise.dim())));
        }
        Ok(NetworkModel {
            topology,
            form: ChannelForm::Additive { h, noise },
        })
    }

    pub fn functional(topology: Topology, channel: Arc<dyn FunctionalChannel>) -> Result<Self> {
        if channel.nodes() != topology.nodes() {
            return Err(Error::invalid(format!(
                "channel has {} nodes, topology has {}",
                channel.nodes(),
                topology.nodes()
            )));
        }
        Ok(NetworkModel {
            topology,
            form: ChannelForm::Functional(channel),
        })
    }

    /// `Y_1 = U_0 + Z` on a two-node network, with `Z` of variance
    /// `noise_var` drawn from `family`.
    pub fn scalar_additive(noise_var: f64, family: crate::sources::MarginalFamily) -> Result<Self> {
        let cov = crate::sources::CovarianceSpec::new(&[vec![0.0, 0.0], vec![0.0, noise_var]])?;
        NetworkModel::additive(
            Topology::point_to_point(),
            &[vec![0.0, 0.0], vec![1.0, 0.0]],
            ColoredSource::new(cov, family)?,
        )
    }

    /// A single bit pipe from node 0 to node 1.
    pub fn scalar_bit_pipe(bits: u32, amplitude: f64) -> Result<Self> {
        let link = BitPipeLink {
            from: 0,
            to: 1,
            quantizer: UniformQuantizer::new(bits, amplitude)?,
        };
        NetworkModel::functional(Topology::point_to_point(), Arc::new(BitPipeNetwork::new(2, vec![link])?))
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn form(&self) -> &ChannelForm {
        &self.form
    }

    pub fn is_additive(&self) -> bool {
        matches!(self.form, ChannelForm::Additive { .. })
    }

    pub fn form_name(&self) -> String {
        match &self.form {
            ChannelForm::Additive { .. } => "additive".into(),
            ChannelForm::Functional(c) => c.name(),
        }
    }

    pub fn noise_dim(&self) -> usize {
        match &self.form {
            ChannelForm::Additive { .. } => self.topology.nodes(),
            ChannelForm::Functional(c) => c.noise_dim(),
        }
    }

    /// One slot's exogenous noise; `white` is scratch of length `noise_dim`.
    pub fn sample_noise(&self, rng: &mut StreamRng, white: &mut [f64], z: &mut [f64]) {
        match &self.form {
            ChannelForm::Additive { noise, .. } => noise.sample_into(rng, white, z),
            ChannelForm::Functional(c) => c.sample_noise(rng, z),
        }
    }

    /// Unchecked channel evaluation.
    pub fn output_into(&self, inputs: &[f64], z: &[f64], out: &mut [f64]) {
        match &self.form {
            ChannelForm::Additive { h, .. } => {
                let n = self.topology.nodes();
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &h[i * n..(i + 1) * n];
                    *o = row.iter().zip(inputs).map(|(a, u)| a * u).sum::<f64>() + z[i];
                }
            }
            ChannelForm::Functional(c) => c.output(inputs, z, out),
        }
    }
}

/// Channel outputs for one slot: `H U + Z` or `(h_1(U, Z), ..., h_N(U, Z))`.
pub fn step(model: &NetworkModel, inputs: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
    let n = model.topology().nodes();
    if inputs.len() != n {
        return Err(Error::invalid(format!("expected {n} inputs, got {}", inputs.len())));
    }
    if noise.len() != model.noise_dim() {
        return Err(Error::invalid(format!(
            "expected noise of length {}, got {}",
            model.noise_dim(),
            noise.len()
        )));
    }
    if let Some(i) = inputs.iter().position(|u| !u.is_finite()) {
        return Err(Error::invalid(format!("input of node {i} is not finite")));
    }
    let mut out = vec![0.0; n];
    model.output_into(inputs, noise, &mut out);
    Ok(out)
}

/// Inputs, noise and outputs of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub inputs: Vec<f64>,
    pub noise: Vec<f64>,
    pub outputs: Vec<f64>,
}

/// Largest received index node `node` read while producing its slot-`slot`
/// input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRecord {
    pub slot: usize,
    pub node: usize,
    pub max_read: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStreams {
    /// Exogenous channel noise.
    pub noise: SampleStream,
    /// Private codec randomness; node `i` gets `encoder.for_node(i)`.
    pub encoder: SampleStream,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_transcript: bool,
    pub instrument: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    /// One length-`n` reconstruction per pair.
    pub reconstructions: Vec<Vec<f64>>,
    pub transcript: Vec<SlotRecord>,
    pub access_log: Vec<AccessRecord>,
}

fn codec_error(slot: usize, node: usize, e: CodecError) -> Error {
    match e {
        CodecError::Causality(violation) => Error::Causality { slot, node, violation },
        CodecError::Rejected(reason) => Error::RejectedScheme { slot, node, reason },
    }
}

/// Runs one block of `scheme` over `model` and returns the reconstructions and
/// the per-slot transcript.
pub fn run_scheme(
    model: &NetworkModel,
    scheme: &dyn CodingScheme,
    sources: &[Vec<f64>],
    streams: RunStreams,
) -> Result<(Vec<Vec<f64>>, Vec<SlotRecord>)> {
    let out = simulate(
        model,
        scheme,
        sources,
        streams,
        RunOptions {
            record_transcript: true,
            instrument: false,
        },
    )?;
    Ok((out.reconstructions, out.transcript))
}

/// Runs one block of `scheme` over `model`.
pub fn simulate(
    model: &NetworkModel,
    scheme: &dyn CodingScheme,
    sources: &[Vec<f64>],
    streams: RunStreams,
    opts: RunOptions,
) -> Result<RunOutput> {
    let topo = model.topology();
    let nodes = topo.nodes();
    let n = scheme.block_len();
    if sources.len() != topo.pairs() {
        return Err(Error::Config(format!(
            "{} source sequences for {} source/destination pairs",
            sources.len(),
            topo.pairs()
        )));
    }
    if let Some(m) = sources.iter().position(|s| s.len() != n) {
        return Err(Error::Config(format!(
            "source {m} has length {}, scheme block length is {n}",
            sources[m].len()
        )));
    }

    let mut codecs = Vec::with_capacity(nodes);
    for id in 0..nodes {
        let ctx = NodeContext { id, role: topo.role(id) };
        codecs.push(
            scheme
                .codec(ctx, streams.encoder.for_node(id))
                .map_err(|e| codec_error(0, id, e))?,
        );
    }

    let mut noise_rng = streams.noise.rng();
    let zdim = model.noise_dim();
    let mut white = vec![0.0; zdim];
    let mut z = vec![0.0; zdim];
    let mut inputs = vec![0.0; nodes];
    let mut outputs = vec![0.0; nodes];
    let mut received: Vec<Vec<f64>> = (0..nodes).map(|_| Vec::with_capacity(n)).collect();
    let probe = AccessProbe::new();
    let mut out = RunOutput::default();

    for t in 0..n {
        model.sample_noise(&mut noise_rng, &mut white, &mut z);
        for (id, codec) in codecs.iter_mut().enumerate() {
            probe.reset();
            let history = History::with_probe(&received[id][..t], &probe);
            let source = match topo.role(id) {
                Role::Source(m) => Some(sources[m].as_slice()),
                _ => None,
            };
            let u = codec.transmit(t, source, &history).map_err(|e| codec_error(t, id, e))?;
            if !u.is_finite() {
                return Err(Error::RejectedScheme {
                    slot: t,
                    node: id,
                    reason: format!("non-finite channel input {u}"),
                });
            }
            inputs[id] = u;
            if opts.instrument {
                out.access_log.push(AccessRecord {
                    slot: t,
                    node: id,
                    max_read: probe.max_read(),
                });
            }
        }
        model.output_into(&inputs, &z, &mut outputs);
        for (r, &y) in received.iter_mut().zip(&outputs) {
            r.push(y);
        }
        if opts.record_transcript {
            out.transcript.push(SlotRecord {
                inputs: inputs.clone(),
                noise: z.clone(),
                outputs: outputs.clone(),
            });
        }
    }

    for &d in topo.destinations() {
        let rec = codecs[d].reconstruct(&received[d]).map_err(|e| codec_error(n, d, e))?;
        if rec.len() != n {
            return Err(Error::RejectedScheme {
                slot: n,
                node: d,
                reason: format!("decoder returned {} samples, expected {n}", rec.len()),
            });
        }
        if rec.iter().any(|v| !v.is_finite()) {
            return Err(Error::RejectedScheme {
                slot: n,
                node: d,
                reason: "non-finite reconstruction".into(),
            });
        }
        out.reconstructions.push(rec);
    }
    Ok(out)
}
