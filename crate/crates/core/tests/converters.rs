use std::sync::Arc;

use proptest::prelude::*;

use worstcase_core::lab::estimate_distortion;
use worstcase_core::network::{run_scheme, simulate, RunOptions, RunStreams};
use worstcase_core::sources::{ColoredSource, CovarianceSpec, MarginalFamily, SampleStream};
use worstcase_core::transform::{cached_q, gaussianize, BlockGeometry};
use worstcase_core::{
    baseline_scalar_quantizer, baseline_sign_bpsk, baseline_uncoded_lmmse, convert_for_noise, convert_for_source,
    effective_noise_probe, pass_through, NetworkModel, SharedScheme, Topology,
};

fn streams(seed: u64) -> RunStreams {
    RunStreams {
        noise: SampleStream::new(seed, 1),
        encoder: SampleStream::new(seed, 2),
    }
}

fn noiseless() -> NetworkModel {
    NetworkModel::scalar_additive(0.0, MarginalFamily::Gaussian).unwrap()
}

#[test]
fn noise_converter_reads_only_completed_groups() {
    let model = NetworkModel::scalar_additive(1.0, MarginalFamily::Uniform).unwrap();
    let inner: SharedScheme = Arc::new(baseline_sign_bpsk(1.0, 1.0, 1.0, 6).unwrap());
    let b = 8;
    let scheme = convert_for_noise(inner, b, &model).unwrap();
    let x: Vec<f64> = (0..48).map(|i| (i as f64).cos()).collect();
    let out = simulate(
        &model,
        scheme.as_ref(),
        &[x],
        streams(1),
        RunOptions {
            record_transcript: false,
            instrument: true,
        },
    )
    .unwrap();
    let mut saw_reads = false;
    for rec in &out.access_log {
        let group_start = rec.slot / b * b;
        if let Some(m) = rec.max_read {
            saw_reads = true;
            assert!(m < group_start, "slot {} node {} read Y[{m}]", rec.slot, rec.node);
        }
        if rec.slot % b != 0 {
            assert_eq!(rec.max_read, None, "slot {} node {} read mid-group", rec.slot, rec.node);
        }
    }
    assert!(saw_reads);
}

#[test]
fn noiseless_noise_conversion_reproduces_inner_outputs() {
    let model = noiseless();
    let n = 5;
    let b = 16;
    let inner: SharedScheme = Arc::new(baseline_uncoded_lmmse(2.0, 1.0, 0.5, n).unwrap());
    let scheme = convert_for_noise(inner.clone(), b, &model).unwrap();
    let x: Vec<f64> = (0..n * b).map(|i| ((i * 7 % 13) as f64 - 6.0) / 3.0).collect();
    let (conv, _) = run_scheme(&model, scheme.as_ref(), &[x.clone()], streams(2)).unwrap();
    for l in 0..b {
        let seg = x[l * n..(l + 1) * n].to_vec();
        let (direct, _) = run_scheme(&model, inner.as_ref(), &[seg], streams(2)).unwrap();
        for (a, e) in conv[0][l * n..(l + 1) * n].iter().zip(&direct[0]) {
            assert!((a - e).abs() <= 1e-9, "{a} vs {e}");
        }
    }
}

#[test]
fn source_conversion_error_is_preserved_by_the_transform() {
    let model = NetworkModel::scalar_bit_pipe(3, 4.0).unwrap();
    let n = 4;
    let b = 32;
    let inner: SharedScheme = Arc::new(baseline_scalar_quantizer(3, 1.0, 4.0, n).unwrap());
    let scheme = convert_for_source(inner.clone(), b).unwrap();
    let source = ColoredSource::new(CovarianceSpec::identity(1), MarginalFamily::Laplace).unwrap();
    let x = worstcase_core::lab::draw_sources(&source, n * b, SampleStream::new(5, 0)).remove(0);
    let (rec, _) = run_scheme(&model, scheme.as_ref(), &[x.clone()], streams(3)).unwrap();
    let physical: f64 = x.iter().zip(&rec[0]).map(|(a, e)| (a - e) * (a - e)).sum();

    let geom = BlockGeometry::new(n, b).unwrap();
    let q = cached_q(b).unwrap();
    let effective = gaussianize(q.as_ref(), &x, geom).unwrap();
    let mut transformed = 0.0;
    for l in 0..b {
        let sub = effective.sub_block(l).to_vec();
        let (inner_rec, _) = run_scheme(&model, inner.as_ref(), &[sub.clone()], streams(3)).unwrap();
        transformed += sub.iter().zip(&inner_rec[0]).map(|(a, e)| (a - e) * (a - e)).sum::<f64>();
    }
    assert!((physical - transformed).abs() <= 1e-9 * transformed, "{physical} vs {transformed}");
}

#[test]
fn gaussian_data_is_a_fixed_point_of_both_converters() {
    let gauss = ColoredSource::new(CovarianceSpec::identity(1), MarginalFamily::Gaussian).unwrap();
    let trials = 20_000;

    let channel = NetworkModel::scalar_additive(1.0, MarginalFamily::Gaussian).unwrap();
    let lmmse: SharedScheme = Arc::new(baseline_uncoded_lmmse(1.0, 1.0, 1.0, 3).unwrap());
    let noise_conv = convert_for_noise(lmmse.clone(), 8, &channel).unwrap();
    let source_conv = convert_for_source(lmmse.clone(), 8).unwrap();
    let base = estimate_distortion(&channel, lmmse.as_ref(), &gauss, trials, 90, None).unwrap();
    for conv in [noise_conv, source_conv] {
        let r = estimate_distortion(&channel, conv.as_ref(), &gauss, trials, 91, None).unwrap();
        let (a, b) = (&base.destinations[0], &r.destinations[0]);
        let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!((a.mse - b.mse).abs() <= 3.0 * se, "{} vs {}", a.mse, b.mse);
    }
}

#[test]
fn effective_noise_keeps_covariance_for_every_family() {
    let k = [vec![1.0, -0.4], vec![-0.4, 2.0]];
    let families = [
        MarginalFamily::Uniform,
        MarginalFamily::Rademacher,
        MarginalFamily::Laplace,
        MarginalFamily::TwoPointAsymmetric { p: 0.2 },
        MarginalFamily::MixtureOfGaussians {
            weights: vec![0.3, 0.7],
            means: vec![-1.0, 2.0],
            std_devs: vec![0.5, 1.0],
        },
    ];
    for family in families {
        let noise = ColoredSource::new(CovarianceSpec::new(&k).unwrap(), family.clone()).unwrap();
        let model = NetworkModel::additive(Topology::point_to_point(), &[vec![0.0, 0.0], vec![1.0, 0.0]], noise).unwrap();
        let r = effective_noise_probe(&model, 16, 20_000, &[0, 3, 8, 15], SampleStream::new(6, 0)).unwrap();
        for row in &r.rows {
            for i in 0..2 {
                for j in 0..2 {
                    let dev = (row.covariance[i * 2 + j] - k[i][j]).abs();
                    assert!(
                        dev <= 4.0 * row.covariance_stderr[i * 2 + j],
                        "{family:?} row {} entry ({i},{j}): {}",
                        row.row,
                        row.covariance[i * 2 + j]
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pass_through_round_trips_through_both_converters(
        half_b in 1usize..9,
        n in 1usize..5,
        seed in any::<u64>(),
    ) {
        let b = 2 * half_b;
        let inner: SharedScheme = Arc::new(pass_through(n).unwrap());
        let model = noiseless();
        let source = ColoredSource::new(CovarianceSpec::identity(1), MarginalFamily::Laplace).unwrap();
        let x = worstcase_core::lab::draw_sources(&source, n * b, SampleStream::new(seed, 0)).remove(0);
        for scheme in [convert_for_source(inner.clone(), b).unwrap(), convert_for_noise(inner.clone(), b, &model).unwrap()] {
            let (rec, _) = run_scheme(&model, scheme.as_ref(), &[x.clone()], streams(seed)).unwrap();
            for (a, e) in rec[0].iter().zip(&x) {
                prop_assert!((a - e).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn converted_block_length(half_b in 1usize..50, n in 1usize..20) {
        let b = 2 * half_b;
        let inner: SharedScheme = Arc::new(pass_through(n).unwrap());
        prop_assert_eq!(convert_for_source(inner.clone(), b).unwrap().block_len(), n * b);
        prop_assert_eq!(convert_for_noise(inner, b, &noiseless()).unwrap().block_len(), n * b);
    }
}
