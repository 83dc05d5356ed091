//! Seeded i.i.d. vector sources with a prescribed covariance.
//!
//! Every family is standardized to zero mean and unit variance and then
//! colored with a factor `F` of the covariance (`F F^T = K`), so only second
//! moments are matched for non-Gaussian families.
//!
//! Randomness comes from ChaCha8 with 64-bit stream selection: a
//! [`SampleStream`] is a `(seed, stream id)` pair and distinct ids give
//! independent sequences from the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::floor_to;

/// Generator used for every stream.
pub type StreamRng = ChaCha8Rng;

/// Independent consumers of randomness within one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    Source = 1,
    Noise = 2,
    Encoder = 3,
    Dither = 4,
    Probe = 5,
}

/// A `(seed, stream id)` pair identifying one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleStream {
    pub seed: u64,
    pub stream: u64,
}

impl SampleStream {
    pub const fn new(seed: u64, stream: u64) -> Self {
        SampleStream { seed, stream }
    }

    /// Stream for `role` in trial `trial`; the role occupies the top byte and
    /// the trial the low 40 bits.
    pub fn for_trial(seed: u64, role: StreamRole, trial: u64) -> Self {
        debug_assert!(trial < 1 << 40);
        SampleStream::new(seed, ((role as u64) << 56) | trial)
    }

    /// The same stream specialized to node `node` (bits 40..56).
    pub fn for_node(self, node: usize) -> Self {
        debug_assert!(node < 1 << 16);
        SampleStream::new(self.seed, self.stream | ((node as u64) << 40))
    }

    /// A stream derived from this one by hashing in `salt`; used by wrappers
    /// and converters that need private randomness per node or sub-block.
    pub fn derive(self, salt: u64) -> Self {
        SampleStream::new(self.seed, splitmix64(self.stream ^ splitmix64(salt.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }

    pub fn rng(self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Symmetric positive-semidefinite covariance with a precomputed coloring
/// factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    k: usize,
    matrix: Vec<f64>,
    factor: Vec<f64>,
}

impl CovarianceSpec {
    pub const SYMMETRY_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::invalid("covariance must be at least 1x1"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::invalid(format!("covariance row {bad} has length {}, expected {k}", rows[bad].len())));
        }
        let matrix: Vec<f64> = rows.iter().flatten().copied().collect();
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariance entries must be finite"));
        }
        for i in 0..k {
            for j in 0..i {
                if (matrix[i * k + j] - matrix[j * k + i]).abs() > Self::SYMMETRY_TOL {
                    return Err(Error::invalid(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        let factor = pivoted_factor(&matrix, k)?;
        Ok(CovarianceSpec { k, matrix, factor })
    }

    pub fn identity(k: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        Self::new(&rows).expect("identity is PSD")
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    /// Row-major coloring factor `F` with `F F^T = K`.
    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    /// `out = F * white`.
    pub fn color(&self, white: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.factor[i * self.k..(i + 1) * self.k];
            *o = row.iter().zip(white).map(|(f, w)| f * w).sum();
        }
    }
}

/// Cholesky factorization with diagonal pivoting that stops at numerical rank,
/// so semidefinite matrices are accepted. Rejects matrices with an eigenvalue
/// below `-PSD_TOL` (relative to the largest diagonal entry).
fn pivoted_factor(matrix: &[f64], k: usize) -> Result<Vec<f64>> {
    let scale = (0..k).map(|i| matrix[i * k + i].abs()).fold(1.0, f64::max);
    let tol = CovarianceSpec::PSD_TOL * scale;
    let mut schur = matrix.to_vec();
    let mut factor = vec![0.0; k * k];
    let mut used = vec![false; k];
    for col in 0..k {
        let pivot = (0..k)
            .filter(|&i| !used[i])
            .max_by(|&a, &b| schur[a * k + a].total_cmp(&schur[b * k + b]))
            .expect("unused index remains");
        let d = schur[pivot * k + pivot];
        if d <= tol {
            // remaining Schur complement must vanish for a PSD matrix
            for i in (0..k).filter(|&i| !used[i]) {
                for j in (0..k).filter(|&j| !used[j]) {
                    if schur[i * k + j].abs() > tol {
                        return Err(Error::invalid("covariance is not positive semidefinite"));
                    }
                }
            }
            break;
        }
        let root = d.sqrt();
        used[pivot] = true;
        factor[pivot * k + col] = root;
        for i in (0..k).filter(|&i| !used[i]) {
            factor[i * k + col] = schur[i * k + pivot] / root;
        }
        for i in (0..k).filter(|&i| !used[i]) {
            for j in (0..k).filter(|&j| !used[j]) {
                schur[i * k + j] -= factor[i * k + col] * factor[j * k + col];
            }
        }
    }
    Ok(factor)
}

/// Marginal law of the white components before coloring. Each variant is
/// normalized to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalFamily {
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
    /// `+1` or `-1` with equal probability.
    Rademacher,
    /// Laplace with scale `1/sqrt(2)`.
    Laplace,
    /// Takes `sqrt((1-p)/p)` with probability `p`, else `-sqrt(p/(1-p))`.
    TwoPointAsymmetric { p: f64 },
    /// Gaussian mixture, shifted and scaled to zero mean and unit variance.
    MixtureOfGaussians {
        weights: Vec<f64>,
        means: Vec<f64>,
        std_devs: Vec<f64>,
    },
}

impl MarginalFamily {
    pub const TAGS: [&'static str; 6] = [
        "gaussian",
        "laplace",
        "mixture_of_gaussians",
        "rademacher",
        "two_point_asymmetric",
        "uniform",
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            MarginalFamily::Gaussian => "gaussian",
            MarginalFamily::Uniform => "uniform",
            MarginalFamily::Rademacher => "rademacher",
            MarginalFamily::Laplace => "laplace",
            MarginalFamily::TwoPointAsymmetric { .. } => "two_point_asymmetric",
            MarginalFamily::MixtureOfGaussians { .. } => "mixture_of_gaussians",
        }
    }

    /// Parameterless family from its tag.
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "gaussian" => Ok(MarginalFamily::Gaussian),
            "uniform" => Ok(MarginalFamily::Uniform),
            "rademacher" => Ok(MarginalFamily::Rademacher),
            "laplace" => Ok(MarginalFamily::Laplace),
            "two_point_asymmetric" | "mixture_of_gaussians" => {
                Err(Error::invalid(format!("family '{tag}' requires parameters")))
            }
            other => Err(Error::invalid(format!("unknown family tag '{other}'"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MarginalFamily::TwoPointAsymmetric { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::invalid(format!("two_point_asymmetric needs 0 < p < 1, got {p}")));
                }
            }
            MarginalFamily::MixtureOfGaussians { weights, means, std_devs } => {
                if weights.is_empty() || weights.len() != means.len() || weights.len() != std_devs.len() {
                    return Err(Error::invalid("mixture_of_gaussians needs equal-length non-empty weights, means, std_devs"));
                }
                if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                    return Err(Error::invalid("mixture weights must be positive"));
                }
                if std_devs.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) || means.iter().any(|m| !m.is_finite()) {
                    return Err(Error::invalid("mixture means and std_devs must be finite, std_devs >= 0"));
                }
                let (_, var) = self.mixture_moments();
                if !(var > 0.0) {
                    return Err(Error::invalid("mixture has zero variance"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn mixture_moments(&self) -> (f64, f64) {
        match self {
            MarginalFamily::MixtureOfGaussians { weights, means, std_devs } => {
                let total: f64 = weights.iter().sum();
                let mean: f64 = weights.iter().zip(means).map(|(w, m)| w * m).sum::<f64>() / total;
                let second: f64 = weights
                    .iter()
                    .zip(means.iter().zip(std_devs))
                    .map(|(w, (m, s))| w * (s * s + m * m))
                    .sum::<f64>()
                    / total;
                (mean, second - mean * mean)
            }
            _ => (0.0, 1.0),
        }
    }

    /// One standardized draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MarginalFamily::Gaussian => StandardNormal.sample(rng),
            MarginalFamily::Uniform => {
                let s3 = 3f64.sqrt();
                rng.random_range(-s3..s3)
            }
            MarginalFamily::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            MarginalFamily::Laplace => {
                // inverse CDF on u in (-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                let scale = std::f64::consts::FRAC_1_SQRT_2;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            MarginalFamily::TwoPointAsymmetric { p } => {
                if rng.random::<f64>() < *p {
                    ((1.0 - p) / p).sqrt()
                } else {
                    -(p / (1.0 - p)).sqrt()
                }
            }
            MarginalFamily::MixtureOfGaussians { weights, means, std_devs } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = i;
                        break;
                    }
                    u -= w;
                }
                let z: f64 = StandardNormal.sample(rng);
                let (mean, var) = self.mixture_moments();
                (means[pick] + std_devs[pick] * z - mean) / var.sqrt()
            }
        }
    }
}

/// Row-major `count x dim` sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSamples {
    dim: usize,
    data: Vec<f64>,
}

impl VectorSamples {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Column `j` as a sequence over rows.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// A covariance paired with a marginal family: draws colored i.i.d. vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredSource {
    pub covariance: CovarianceSpec,
    pub family: MarginalFamily,
}

impl ColoredSource {
    pub fn new(covariance: CovarianceSpec, family: MarginalFamily) -> Result<Self> {
        family.validate()?;
        Ok(ColoredSource { covariance, family })
    }

    pub fn dim(&self) -> usize {
        self.covariance.dim()
    }

    /// One colored vector into `out`; `white` is scratch of the same length.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, white: &mut [f64], out: &mut [f64]) {
        for w in white.iter_mut() {
            *w = self.family.sample(rng);
        }
        self.covariance.color(white, out);
    }
}

/// `count` i.i.d. vectors with covariance `spec` and standardized marginals
/// from `family`, drawn from `stream`.
pub fn sample_iid_vectors(
    spec: &CovarianceSpec,
    family: &MarginalFamily,
    count: usize,
    stream: SampleStream,
) -> Result<VectorSamples> {
    if count == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    family.validate()?;
    let k = spec.dim();
    let mut rng = stream.rng();
    let mut white = vec![0.0; k];
    let mut data = vec![0.0; count * k];
    for row in data.chunks_exact_mut(k) {
        for w in white.iter_mut() {
            *w = family.sample(&mut rng);
        }
        spec.color(&white, row);
    }
    Ok(VectorSamples { dim: k, data })
}

/// Subtractive-style dither: floor to `rho` bits, then add an independent
/// uniform on `(-2^-(rho+1), 2^-(rho+1))`. Always within `2^(1-rho)` of `x`.
pub fn dither<R: Rng + ?Sized>(x: f64, rho: u32, rng: &mut R) -> f64 {
    let half = 2f64.powi(-(rho as i32) - 1);
    let u = loop {
        let u = rng.random_range(-half..half);
        if u != -half {
            break u;
        }
    };
    floor_to(x, rho) + u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_scalar_is_two_valued() {
        let k = CovarianceSpec::new(&[vec![1.0]]).unwrap();
        let s = sample_iid_vectors(&k, &MarginalFamily::Rademacher, 4, SampleStream::new(1, 0)).unwrap();
        assert!(s.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn rejects_non_psd_and_asymmetric() {
        assert!(CovarianceSpec::new(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(CovarianceSpec::new(&[vec![1.0, 0.1], vec![0.2, 1.0]]).is_err());
        assert!(CovarianceSpec::new(&[vec![-1.0]]).is_err());
        assert!(CovarianceSpec::new(&[vec![1.0, f64::NAN], vec![f64::NAN, 1.0]]).is_err());
        assert!(CovarianceSpec::new(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn semidefinite_factor_reproduces_matrix() {
        let rows = vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 1.0]];
        let spec = CovarianceSpec::new(&rows).unwrap();
        let f = spec.factor();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|c| f[i * 3 + c] * f[j * 3 + c]).sum();
                assert!((v - rows[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn factor_reproduces_dense_matrix() {
        let rows = vec![vec![2.0, 0.6, -0.3], vec![0.6, 1.0, 0.2], vec![-0.3, 0.2, 0.5]];
        let spec = CovarianceSpec::new(&rows).unwrap();
        let f = spec.factor();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|c| f[i * 3 + c] * f[j * 3 + c]).sum();
                assert!((v - rows[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let spec = CovarianceSpec::identity(2);
        let a = sample_iid_vectors(&spec, &MarginalFamily::Gaussian, 64, SampleStream::new(9, 3)).unwrap();
        let b = sample_iid_vectors(&spec, &MarginalFamily::Gaussian, 64, SampleStream::new(9, 3)).unwrap();
        let c = sample_iid_vectors(&spec, &MarginalFamily::Gaussian, 64, SampleStream::new(9, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn two_point_values() {
        let fam = MarginalFamily::TwoPointAsymmetric { p: 0.2 };
        let mut rng = SampleStream::new(1, 1).rng();
        let hi = 2.0;
        let lo = -0.5;
        for _ in 0..100 {
            let v = fam.sample(&mut rng);
            assert!(v == hi || v == lo, "{v}");
        }
        assert!(MarginalFamily::TwoPointAsymmetric { p: 1.0 }.validate().is_err());
    }

    #[test]
    fn family_tags_round_trip() {
        for tag in ["gaussian", "uniform", "rademacher", "laplace"] {
            assert_eq!(MarginalFamily::from_tag(tag).unwrap().tag(), tag);
        }
        assert!(MarginalFamily::from_tag("cauchy").is_err());
        assert!(MarginalFamily::from_tag("two_point_asymmetric").is_err());
    }

    #[test]
    fn dither_example() {
        let mut rng = SampleStream::new(5, 0).rng();
        for _ in 0..1000 {
            let v = dither(0.75, 1, &mut rng);
            assert!(v > 0.25 && v < 0.75, "{v}");
        }
    }

    #[test]
    fn dither_bound_fine() {
        let mut rng = SampleStream::new(6, 0).rng();
        for i in 0..1000 {
            let x = (i as f64) * 0.123_456_7 - 60.0;
            assert!((dither(x, 20, &mut rng) - x).abs() <= 2f64.powi(-19));
        }
    }
}
