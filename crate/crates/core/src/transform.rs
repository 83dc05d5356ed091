//! The real unitary DFT-derived block transform and the block interleaving
//! used by both converters.
//!
//! Layout conventions: a length-`nb` sequence `x` is cut into `n` consecutive
//! blocks of length `b`; block `t` is `x[t*b .. (t+1)*b]`. After the
//! transform, coordinate `l` of block `t` lands in sub-block `l` at position
//! `t`. Interleaved data is stored sub-block-major, so element `(l, t)` lives
//! at index `l*n + t` and the storage order is the effective sequence
//! `(X~(0), X~(1), ..., X~(b-1))`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Block sizes at or above this use the FFT factorization instead of the
/// dense product.
pub const FFT_MIN_BLOCK: usize = 32;

/// The `b x b` real orthogonal matrix obtained by splitting the DFT into
/// renormalized cosine and sine rows.
///
/// Row `0` is the DC row, rows `1..b/2` are cosines, row `b/2` alternates
/// sign and rows `b/2+1..b` are sines.
#[derive(Clone)]
pub struct TransformQ<T: Real> {
    b: usize,
    entries: Vec<T>,
    forward: Option<Arc<dyn Fft<T>>>,
    inverse: Option<Arc<dyn Fft<T>>>,
}

impl<T: Real> std::fmt::Debug for TransformQ<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformQ")
            .field("b", &self.b)
            .field("fft", &self.forward.is_some())
            .finish()
    }
}

/// Builds `Q` for an even block size `b >= 2`.
pub fn build_q<T: Real>(b: usize) -> Result<TransformQ<T>> {
    TransformQ::new(b)
}

impl<T: Real> TransformQ<T> {
    pub fn new(b: usize) -> Result<Self> {
        if b < 2 || b % 2 != 0 {
            return Err(Error::invalid(format!(
                "transform size b must be even and >= 2, got {b}"
            )));
        }
        let half = b / 2;
        let dc = T::one() / T::of_usize(b).sqrt();
        let ac = (T::of(2.0) / T::of_usize(b)).sqrt();
        let tau = T::TAU();
        let mut entries = vec![T::zero(); b * b];
        for i in 0..b {
            for j in 0..b {
                let v = if i == 0 {
                    dc
                } else if i < half {
                    // reduce j*i mod b so the angle stays in [0, 2pi)
                    let k = (j * i) % b;
                    ac * (tau * T::of_usize(k) / T::of_usize(b)).cos()
                } else if i == half {
                    if j % 2 == 0 {
                        dc
                    } else {
                        -dc
                    }
                } else {
                    let k = (j * (i - half)) % b;
                    ac * (tau * T::of_usize(k) / T::of_usize(b)).sin()
                };
                entries[i * b + j] = v;
            }
        }
        let (forward, inverse) = if b >= FFT_MIN_BLOCK {
            let mut planner = FftPlanner::<T>::new();
            (
                Some(planner.plan_fft_forward(b)),
                Some(planner.plan_fft_inverse(b)),
            )
        } else {
            (None, None)
        };
        Ok(TransformQ {
            b,
            entries,
            forward,
            inverse,
        })
    }

    pub fn size(&self) -> usize {
        self.b
    }

    /// Entry `(i, j)`, zero-based.
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.entries[i * self.b + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.b..(i + 1) * self.b]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.b {
            return Err(Error::invalid(format!(
                "block length {len} does not match transform size {}",
                self.b
            )));
        }
        Ok(())
    }

    /// `Q * block`.
    pub fn apply(&self, block: &[T]) -> Result<Vec<T>> {
        self.check_len(block.len())?;
        let mut out = vec![T::zero(); self.b];
        self.apply_into(block, &mut out);
        Ok(out)
    }

    /// `Q^T * block`, the inverse of [`apply`](Self::apply).
    pub fn apply_inverse(&self, block: &[T]) -> Result<Vec<T>> {
        self.check_len(block.len())?;
        let mut out = vec![T::zero(); self.b];
        self.apply_inverse_into(block, &mut out);
        Ok(out)
    }

    /// Unchecked `Q * input` into `out`; both slices must have length `b`.
    pub fn apply_into(&self, input: &[T], out: &mut [T]) {
        debug_assert_eq!(input.len(), self.b);
        debug_assert_eq!(out.len(), self.b);
        match &self.forward {
            Some(fft) => self.fft_forward(fft.as_ref(), input, out),
            None => self.dense_forward(input, out),
        }
    }

    /// Unchecked `Q^T * input` into `out`.
    pub fn apply_inverse_into(&self, input: &[T], out: &mut [T]) {
        debug_assert_eq!(input.len(), self.b);
        debug_assert_eq!(out.len(), self.b);
        match &self.inverse {
            Some(fft) => self.fft_inverse(fft.as_ref(), input, out),
            None => self.dense_inverse(input, out),
        }
    }

    /// Dense matrix-vector product, always available as a reference path.
    pub fn dense_forward(&self, input: &[T], out: &mut [T]) {
        for (row, o) in self.entries.chunks_exact(self.b).zip(out.iter_mut()) {
            *o = row
                .iter()
                .zip(input)
                .fold(T::zero(), |acc, (&q, &x)| acc + q * x);
        }
    }

    pub fn dense_inverse(&self, input: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for (row, &y) in self.entries.chunks_exact(self.b).zip(input) {
            for (o, &q) in out.iter_mut().zip(row) {
                *o = *o + q * y;
            }
        }
    }

    fn fft_forward(&self, fft: &dyn Fft<T>, input: &[T], out: &mut [T]) {
        let b = self.b;
        let half = b / 2;
        let mut buf: Vec<Complex<T>> = input.iter().map(|&x| Complex::new(x, T::zero())).collect();
        fft.process(&mut buf);
        let dc = T::one() / T::of_usize(b).sqrt();
        let ac = (T::of(2.0) / T::of_usize(b)).sqrt();
        out[0] = buf[0].re * dc;
        out[half] = buf[half].re * dc;
        for i in 1..half {
            out[i] = buf[i].re * ac;
            // forward kernel is exp(-i theta), so sum x sin(theta) = -Im
            out[half + i] = -buf[i].im * ac;
        }
    }

    fn fft_inverse(&self, fft: &dyn Fft<T>, input: &[T], out: &mut [T]) {
        let b = self.b;
        let half = b / 2;
        let dc = T::one() / T::of_usize(b).sqrt();
        let ac = (T::of(2.0) / T::of_usize(b)).sqrt();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); b];
        buf[0] = Complex::new(input[0] * dc, T::zero());
        buf[half] = Complex::new(input[half] * dc, T::zero());
        for i in 1..half {
            // Re((a - i c) e^{i theta}) = a cos(theta) + c sin(theta)
            buf[i] = Complex::new(input[i] * ac, -input[half + i] * ac);
        }
        fft.process(&mut buf);
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re;
        }
    }
}

/// Per-process cache of `f64` transforms keyed by block size.
pub fn cached_q(b: usize) -> Result<Arc<TransformQ<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TransformQ<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(q) = cache.lock().expect("transform cache poisoned").get(&b) {
        return Ok(Arc::clone(q));
    }
    let q = Arc::new(TransformQ::new(b)?);
    cache
        .lock()
        .expect("transform cache poisoned")
        .entry(b)
        .or_insert_with(|| Arc::clone(&q));
    Ok(q)
}

/// `Q * block`, rejecting a length mismatch.
pub fn apply_q<T: Real>(q: &TransformQ<T>, block: &[T]) -> Result<Vec<T>> {
    q.apply(block)
}

/// `Q^T * block`, rejecting a length mismatch.
pub fn apply_q_inverse<T: Real>(q: &TransformQ<T>, block: &[T]) -> Result<Vec<T>> {
    q.apply_inverse(block)
}

/// Inner block length `n` and transform size `b` of an `nb`-slot construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockGeometry {
    n: usize,
    b: usize,
}

impl BlockGeometry {
    pub fn new(n: usize, b: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("inner block length n must be >= 1"));
        }
        if b < 2 || b % 2 != 0 {
            return Err(Error::invalid(format!(
                "transform size b must be even and >= 2, got {b}"
            )));
        }
        if n.checked_mul(b).is_none() {
            return Err(Error::invalid("n*b overflows"));
        }
        Ok(BlockGeometry { n, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn total(&self) -> usize {
        self.n * self.b
    }
}

/// `b` sub-blocks of length `n`, stored sub-block-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InterleavedBlocks<T> {
    n: usize,
    b: usize,
    data: Vec<T>,
}

impl<T: Copy> InterleavedBlocks<T> {
    /// Wraps sub-block-major data; `data.len()` must equal `n*b`.
    pub fn from_sub_blocks(n: usize, b: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * b {
            return Err(Error::invalid(format!(
                "interleaved data has length {}, expected {}",
                data.len(),
                n * b
            )));
        }
        Ok(InterleavedBlocks { n, b, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Sub-block `l` (length `n`).
    pub fn sub_block(&self, l: usize) -> &[T] {
        &self.data[l * self.n..(l + 1) * self.n]
    }

    /// Element `(l, t)`.
    pub fn get(&self, l: usize, t: usize) -> T {
        self.data[l * self.n + t]
    }

    /// The concatenation `(sub-block 0, ..., sub-block b-1)`.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }
}

fn check_geometry<T>(blocks: &InterleavedBlocks<T>, geom: BlockGeometry) -> Result<()> {
    if blocks.n != geom.n || blocks.b != geom.b {
        return Err(Error::invalid(format!(
            "interleaved shape ({} x {}) does not match geometry ({} x {})",
            blocks.b, blocks.n, geom.b, geom.n
        )));
    }
    Ok(())
}

/// Index permutation taking `n` blocks of length `b` to `b` sub-blocks of
/// length `n`: element `(l, t)` of the output is `x[t*b + l]`.
pub fn interleave<T: Copy>(x: &[T], geom: BlockGeometry) -> Result<InterleavedBlocks<T>> {
    let (n, b) = (geom.n, geom.b);
    if x.len() != geom.total() {
        return Err(Error::invalid(format!(
            "sequence length {} does not match n*b = {}",
            x.len(),
            geom.total()
        )));
    }
    let mut data = Vec::with_capacity(n * b);
    for l in 0..b {
        data.extend((0..n).map(|t| x[t * b + l]));
    }
    Ok(InterleavedBlocks { n, b, data })
}

/// Exact inverse of [`interleave`].
pub fn deinterleave<T: Copy + Default>(blocks: &InterleavedBlocks<T>, geom: BlockGeometry) -> Result<Vec<T>> {
    check_geometry(blocks, geom)?;
    let (n, b) = (geom.n, geom.b);
    let mut x = vec![T::default(); n * b];
    for l in 0..b {
        for t in 0..n {
            x[t * b + l] = blocks.data[l * n + t];
        }
    }
    Ok(x)
}

/// Transform every length-`b` block of `x` with `Q` and interleave, giving the
/// effective sub-blocks `X~(0..b)` of one source.
pub fn gaussianize<T: Real>(q: &TransformQ<T>, x: &[T], geom: BlockGeometry) -> Result<InterleavedBlocks<T>> {
    if q.size() != geom.b {
        return Err(Error::invalid(format!(
            "transform size {} does not match geometry b = {}",
            q.size(),
            geom.b
        )));
    }
    if x.len() != geom.total() {
        return Err(Error::invalid(format!(
            "sequence length {} does not match n*b = {}",
            x.len(),
            geom.total()
        )));
    }
    let (n, b) = (geom.n, geom.b);
    let mut data = vec![T::zero(); n * b];
    let mut out = vec![T::zero(); b];
    for (t, block) in x.chunks_exact(b).enumerate() {
        q.apply_into(block, &mut out);
        for (l, &v) in out.iter().enumerate() {
            data[l * n + t] = v;
        }
    }
    Ok(InterleavedBlocks { n, b, data })
}

/// Inverse of [`gaussianize`]: gather coordinate `t` of every sub-block into a
/// length-`b` block and apply `Q^T`.
pub fn degaussianize<T: Real>(q: &TransformQ<T>, blocks: &InterleavedBlocks<T>, geom: BlockGeometry) -> Result<Vec<T>> {
    check_geometry(blocks, geom)?;
    if q.size() != geom.b {
        return Err(Error::invalid(format!(
            "transform size {} does not match geometry b = {}",
            q.size(),
            geom.b
        )));
    }
    let (n, b) = (geom.n, geom.b);
    let mut x = vec![T::zero(); n * b];
    let mut column = vec![T::zero(); b];
    for t in 0..n {
        for (l, c) in column.iter_mut().enumerate() {
            *c = blocks.data[l * n + t];
        }
        q.apply_inverse_into(&column, &mut x[t * b..(t + 1) * b]);
    }
    Ok(x)
}

/// Gaussianize a family of `k` equal-length source sequences.
pub fn gaussianize_source<T: Real>(
    q: &TransformQ<T>,
    sources: &[Vec<T>],
    geom: BlockGeometry,
) -> Result<Vec<InterleavedBlocks<T>>> {
    if let Some(bad) = sources.iter().position(|s| s.len() != geom.total()) {
        return Err(Error::invalid(format!(
            "source {bad} has length {}, expected n*b = {}",
            sources[bad].len(),
            geom.total()
        )));
    }
    sources.iter().map(|x| gaussianize(q, x, geom)).collect()
}

/// Inverse of [`gaussianize_source`].
pub fn degaussianize_source<T: Real>(
    q: &TransformQ<T>,
    blocks: &[InterleavedBlocks<T>],
    geom: BlockGeometry,
) -> Result<Vec<Vec<T>>> {
    blocks.iter().map(|bl| degaussianize(q, bl, geom)).collect()
}
