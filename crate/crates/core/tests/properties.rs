use std::sync::Arc;

use proptest::prelude::*;

use worstcase_core::network::{run_scheme, RunStreams};
use worstcase_core::precision::{cell_width, floor_to};
use worstcase_core::quantizer::UniformQuantizer;
use worstcase_core::scheme::{History, NodeContext, Role};
use worstcase_core::sources::{ColoredSource, CovarianceSpec, MarginalFamily, SampleStream};
use worstcase_core::stats::ks_statistic;
use worstcase_core::transform::{deinterleave, interleave};
use worstcase_core::{
    baseline_uncoded_lmmse, build_q, clip_outputs, degaussianize, gaussianize, limit_encoding_precision,
    BlockGeometry, ClipSpec, NetworkModel, PrecisionSpec, SharedScheme, TransformQ32,
};

fn even_b() -> impl Strategy<Value = usize> {
    (1usize..=40).prop_map(|h| 2 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_orthogonal(b in even_b()) {
        let q = build_q::<f64>(b).unwrap();
        let e = q.entries();
        for i in 0..b {
            for j in 0..b {
                let dot: f64 = (0..b).map(|k| e[i * b + k] * e[j * b + k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - target).abs() <= 1e-12);
            }
        }
        let bound = (2.0 / b as f64).sqrt() + 1e-15;
        prop_assert!(e.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn q_preserves_norm_and_inverts(x in prop::collection::vec(-1e3f64..1e3, 1..=64)) {
        let b = 2 * x.len();
        let mut block = x.clone();
        block.extend(x.iter().map(|v| -0.5 * v));
        let q = build_q::<f64>(b).unwrap();
        let y = q.apply(&block).unwrap();
        let back = q.apply_inverse(&y).unwrap();
        let nx: f64 = block.iter().map(|v| v * v).sum();
        let ny: f64 = y.iter().map(|v| v * v).sum();
        prop_assert!((nx - ny).abs() <= 1e-10 * nx.max(1.0));
        for (a, e) in back.iter().zip(&block) {
            prop_assert!((a - e).abs() <= 1e-9);
        }
    }

    #[test]
    fn interleave_is_a_bijection(b in even_b(), n in 1usize..12) {
        let geom = BlockGeometry::new(n, b).unwrap();
        let x: Vec<usize> = (0..n * b).collect();
        let blocks = interleave(&x, geom).unwrap();
        for l in 0..b {
            for t in 0..n {
                prop_assert_eq!(blocks.get(l, t), x[t * b + l]);
            }
        }
        prop_assert_eq!(deinterleave(&blocks, geom).unwrap(), x);
    }

    #[test]
    fn gaussianize_round_trip(b in even_b(), n in 1usize..6, seed in any::<u64>()) {
        let geom = BlockGeometry::new(n, b).unwrap();
        let src = ColoredSource::new(CovarianceSpec::identity(1), MarginalFamily::Uniform).unwrap();
        let x = worstcase_core::lab::draw_sources(&src, n * b, SampleStream::new(seed, 0)).remove(0);
        let q = build_q::<f64>(b).unwrap();
        let blocks = gaussianize(&q, &x, geom).unwrap();
        let energy_in: f64 = x.iter().map(|v| v * v).sum();
        let energy_out: f64 = blocks.as_slice().iter().map(|v| v * v).sum();
        prop_assert!((energy_in - energy_out).abs() <= 1e-10 * energy_in);
        let back = degaussianize(&q, &blocks, geom).unwrap();
        for (a, e) in back.iter().zip(&x) {
            prop_assert!((a - e).abs() <= 1e-12);
        }
    }

    #[test]
    fn f32_transform_is_nearly_orthogonal(b in even_b()) {
        let q = TransformQ32::new(b).unwrap();
        let x: Vec<f32> = (0..b).map(|i| (i as f32 * 0.37).sin()).collect();
        let back = q.apply_inverse(&q.apply(&x).unwrap()).unwrap();
        for (a, e) in back.iter().zip(&x) {
            prop_assert!((a - e).abs() <= 1e-5);
        }
    }

    #[test]
    fn quantizer_error_is_bounded_in_range(bits in 1u32..=10, range in 0.1f64..10.0, u in -1.0f64..1.0) {
        let q = UniformQuantizer::new(bits, range).unwrap();
        let x = u * range * 0.999_999;
        prop_assert!((q.quantize(x) - x).abs() <= q.step() / 2.0 + 1e-12);
        prop_assert_eq!(q.quantize(q.quantize(x)), q.quantize(x));
    }

    #[test]
    fn ks_is_a_distance(values in prop::collection::vec(-5.0f64..5.0, 100..300), sigma in 0.1f64..5.0) {
        let d = ks_statistic(&values, sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn encoder_output_is_constant_on_precision_cells(
        rho in 1u32..=20,
        x in prop::collection::vec(-8.0f64..8.0, 3),
        offsets in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let inner: SharedScheme = Arc::new(baseline_uncoded_lmmse(1.0, 1.0, 1.0, 3).unwrap());
        let scheme = limit_encoding_precision(inner, PrecisionSpec::uniform(rho).unwrap());
        let w = cell_width::<f64>(rho);
        let mate: Vec<f64> = x.iter().zip(&offsets).map(|(&v, o)| floor_to(v, rho) + o * w).collect();
        let ctx = NodeContext { id: 0, role: Role::Source(0) };
        let mut a = scheme.codec(ctx, SampleStream::new(0, 0)).unwrap();
        let mut b = scheme.codec(ctx, SampleStream::new(0, 0)).unwrap();
        for t in 0..3 {
            prop_assert_eq!(
                a.transmit(t, Some(&x), &History::empty()).unwrap(),
                b.transmit(t, Some(&mate), &History::empty()).unwrap()
            );
        }
    }

    #[test]
    fn clipped_outputs_are_bounded(bound in 0.01f64..3.0, seed in any::<u64>()) {
        let model = NetworkModel::scalar_additive(1.0, MarginalFamily::Laplace).unwrap();
        let inner: SharedScheme = Arc::new(baseline_uncoded_lmmse(1.0, 1.0, 1.0, 8).unwrap());
        let scheme = clip_outputs(inner, ClipSpec::new(bound).unwrap());
        let x: Vec<f64> = (0..8).map(|i| (i as f64 - 4.0) * 2.0).collect();
        let streams = RunStreams { noise: SampleStream::new(seed, 1), encoder: SampleStream::new(seed, 2) };
        let (rec, _) = run_scheme(&model, scheme.as_ref(), &[x], streams).unwrap();
        prop_assert!(rec[0].iter().all(|v| v.abs() <= bound));
    }
}
