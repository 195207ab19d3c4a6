use fmm_core::rng::white_noise;
use fmm_core::{
    band_distance, build_schedule, decay_factor, forward_transform, fuse_spectra, high_pass_intervention,
    inverse_transform, modulate, paired_sample, radial_distance_map, sample_from, weight_field, ConditionSpec,
    ConditionStyle, Error, FilterShape, FilterSpec, PowerLawPrior, RadialMap, RealField, ScheduleKind, Shape,
    WeightField, WeightKind, WeightParams,
};
use proptest::prelude::*;

fn shape(c: usize, h: usize, w: usize) -> Shape {
    Shape::new(c, h, w).unwrap()
}

fn params(alpha: f64, sigma: f64, kind: WeightKind) -> WeightParams {
    WeightParams::new(alpha, sigma, kind, 1000).unwrap()
}

/// Independent scalar evaluations of both weighting forms.
fn oracle(kind: WeightKind, d: f64, d_max: f64, t: f64, horizon: f64, alpha: f64, sigma: f64) -> f64 {
    let decay = ((t - horizon) / horizon).exp();
    let x = d / (d_max * alpha);
    match kind {
        WeightKind::Gaussian => decay * (-x.powi(2) / (2.0 * sigma.powi(2))).exp(),
        WeightKind::Linear => decay * if x < 1.0 { 1.0 - x } else { 0.0 },
    }
}

#[test]
fn decay_examples() {
    assert_eq!(decay_factor(1000, 1000).unwrap(), 1.0);
    assert!((decay_factor(0, 1000).unwrap() - (-1.0f64).exp()).abs() <= 1e-12);
    assert!((decay_factor(0, 1000).unwrap() - 0.3678794).abs() < 1e-7);
    assert!((decay_factor(500, 1000).unwrap() - 0.6065307).abs() < 1e-7);
    assert!(matches!(decay_factor(1001, 1000), Err(Error::InvalidTimestep { .. })));
}

#[test]
fn weight_examples() {
    let g = params(0.2, 0.4, WeightKind::Gaussian);
    assert_eq!(g.weight(0.0, 10.0, 1000).unwrap(), 1.0);
    let far = g.weight(10.0, 10.0, 1000).unwrap();
    assert!((far / (-78.125f64).exp() - 1.0).abs() < 1e-12, "{far}");
    assert!((far - 1.1e-34).abs() < 0.1e-34);
    let l = params(0.2, 0.4, WeightKind::Linear);
    for t in [0, 1, 500, 1000] {
        assert_eq!(l.weight(0.2 * 10.0, 10.0, t).unwrap(), 0.0);
    }
    assert!(matches!(weight_field(&radial_distance_map(8, 8).unwrap(), 1001, &g), Err(Error::InvalidTimestep { .. })));
    assert!(WeightParams::new(0.0, 0.4, WeightKind::Gaussian, 1000).is_err());
    assert!(WeightParams::new(0.2, -1.0, WeightKind::Gaussian, 1000).is_err());
    assert!(WeightParams::new(0.2, 0.4, WeightKind::Gaussian, 0).is_err());
}

#[test]
fn weights_match_scalar_oracle_at_sampled_points() {
    let radial = RadialMap::new(64, 64).unwrap();
    let d_max = radial.d_max();
    for kind in [WeightKind::Gaussian, WeightKind::Linear] {
        for (alpha, sigma) in [(0.2, 0.4), (0.1, 0.3), (0.35, 0.5)] {
            let p = params(alpha, sigma, kind);
            // 20 (bin, t) points spread over the grid and the horizon
            for i in 0..20usize {
                let (u, v) = ((i * 7) % 64, (i * 13 + 5) % 64);
                let t = (i * 53) % 1001;
                let w = weight_field(&radial, t, &p).unwrap();
                let d = radial.distance(u, v);
                let expected = oracle(kind, d, d_max, t as f64, 1000.0, alpha, sigma);
                assert!((w.weights[u * 64 + v] - expected).abs() <= 1e-12, "{kind:?} d {d} t {t}");
            }
        }
    }
}

fn kinds() -> impl Strategy<Value = WeightKind> {
    prop_oneof![Just(WeightKind::Gaussian), Just(WeightKind::Linear)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weights_bounded_by_decay(kind in kinds(), alpha in 0.01f64..2.0, sigma in 0.01f64..2.0, t in 0usize..=1000, h in 2usize..40, w in 2usize..40) {
        let radial = RadialMap::new(h, w).unwrap();
        let field = weight_field(&radial, t, &params(alpha, sigma, kind)).unwrap();
        let decay = decay_factor(t, 1000).unwrap();
        prop_assert!(decay <= 1.0);
        for &x in &field.weights {
            prop_assert!((0.0..=decay).contains(&x));
        }
    }

    #[test]
    fn weights_radially_symmetric_and_monotone(kind in kinds(), alpha in 0.01f64..2.0, sigma in 0.01f64..2.0, t in 0usize..=1000, h in 2usize..40, w in 2usize..40) {
        let radial = RadialMap::new(h, w).unwrap();
        let field = weight_field(&radial, t, &params(alpha, sigma, kind)).unwrap();
        let mut pairs: Vec<(f64, f64)> = radial.distances().iter().copied().zip(field.weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for win in pairs.windows(2) {
            if win[0].0 == win[1].0 {
                prop_assert_eq!(win[0].1.to_bits(), win[1].1.to_bits());
            } else {
                prop_assert!(win[1].1 <= win[0].1);
            }
        }
    }

    #[test]
    fn weights_increase_with_alpha(kind in kinds(), a1 in 0.05f64..1.0, da in 0.01f64..1.0, sigma in 0.2f64..1.0, t in 0usize..=1000, frac in 0.01f64..1.0) {
        let (lo, hi) = (params(a1, sigma, kind), params(a1 + da, sigma, kind));
        let (wl, wh) = (lo.weight(frac * 10.0, 10.0, t).unwrap(), hi.weight(frac * 10.0, 10.0, t).unwrap());
        // strict where the smaller kernel is still representable
        if wl > 1e-300 || kind == WeightKind::Linear && frac < a1 {
            prop_assert!(wh > wl, "{} !> {}", wh, wl);
        } else {
            prop_assert!(wh >= wl);
        }
    }

    #[test]
    fn gaussian_weights_increase_with_sigma(alpha in 0.05f64..1.0, s1 in 0.05f64..1.0, ds in 0.01f64..1.0, t in 0usize..=1000, frac in 0.01f64..1.0) {
        let (lo, hi) = (params(alpha, s1, WeightKind::Gaussian), params(alpha, s1 + ds, WeightKind::Gaussian));
        let (wl, wh) = (lo.weight(frac * 10.0, 10.0, t).unwrap(), hi.weight(frac * 10.0, 10.0, t).unwrap());
        if wl > 1e-300 {
            prop_assert!(wh > wl);
        } else {
            prop_assert!(wh >= wl);
        }
    }

    #[test]
    fn weights_relax_as_sampling_proceeds(kind in kinds(), alpha in 0.05f64..1.0, sigma in 0.05f64..1.0, frac in 0.0f64..1.0) {
        let p = params(alpha, sigma, kind);
        let ws: Vec<f64> = (0..=1000).rev().map(|t| p.weight(frac * 10.0, 10.0, t).unwrap()).collect();
        prop_assert!(ws.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fused_spectra_stay_hermitian(kind in kinds(), alpha in 0.01f64..1.0, sigma in 0.01f64..1.0, t in 0usize..=1000, h in 2usize..24, w in 2usize..24, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (white_noise(shape(2, h, w), s1), white_noise(shape(2, h, w), s2));
        let radial = RadialMap::new(h, w).unwrap();
        let fused = fuse_spectra(&forward_transform(&a).unwrap(), &forward_transform(&b).unwrap(), &weight_field(&radial, t, &params(alpha, sigma, kind)).unwrap()).unwrap();
        prop_assert!(fused.hermitian_error() <= 1e-10);
        prop_assert!(inverse_transform(&fused).is_ok());
    }
}

#[test]
fn fusion_examples() {
    let (a, b) = (white_noise(shape(2, 8, 8), 1), white_noise(shape(2, 8, 8), 2));
    let (fa, fb) = (forward_transform(&a).unwrap(), forward_transform(&b).unwrap());
    let ones = WeightField { timestep: 0, weights: vec![1.0; 64] };
    let zeros = WeightField { timestep: 0, weights: vec![0.0; 64] };
    assert_eq!(fuse_spectra(&fa, &fb, &ones).unwrap(), fa);
    assert_eq!(fuse_spectra(&fa, &fb, &zeros).unwrap(), fb);
    let radial = RadialMap::new(8, 8).unwrap();
    let any = weight_field(&radial, 600, &params(0.3, 0.4, WeightKind::Gaussian)).unwrap();
    assert!(fuse_spectra(&fa, &fa, &any).unwrap().max_abs_diff(&fa).unwrap() < 1e-12);
    let other = forward_transform(&white_noise(shape(1, 8, 8), 3)).unwrap();
    assert!(matches!(fuse_spectra(&fa, &other, &any), Err(Error::ShapeMismatch { .. })));
}

#[test]
fn modulate_examples() {
    let (a, b) = (white_noise(shape(1, 32, 32), 1), white_noise(shape(1, 32, 32), 2));
    let p = params(0.2, 0.4, WeightKind::Gaussian);
    assert!(modulate(&b, &b, 700, &p).unwrap().max_abs_diff(&b).unwrap() <= 1e-10);

    let wide = params(1e6, 0.4, WeightKind::Gaussian);
    assert!(modulate(&a, &b, 1000, &wide).unwrap().max_abs_diff(&a).unwrap() <= 1e-6);

    // vanishing sigma keeps only the zero-frequency bin of the original
    let narrow = params(0.2, 1e-6, WeightKind::Gaussian);
    let out = modulate(&a, &b, 1000, &narrow).unwrap();
    let (low, high) = band_distance(&out, &b, 0.05).unwrap();
    assert!(high < 1e-9, "{high}");
    let mean = |f: &RealField| f.data().iter().sum::<f64>() / 1024.0;
    assert!((mean(&out) - mean(&a)).abs() < 1e-12);
    assert!(low > 0.0);
}

fn lab() -> (ConditionSpec, ConditionSpec, PowerLawPrior, fmm_core::NoiseSchedule) {
    let sh = shape(1, 64, 64);
    let style = ConditionStyle::default();
    (
        ConditionSpec::generate(1, 11, sh, &style).unwrap(),
        ConditionSpec::generate(1, 12, sh, &style).unwrap(),
        PowerLawPrior::new(2.0, 1e5).unwrap(),
        build_schedule(ScheduleKind::LinearBeta, 1000).unwrap(),
    )
}

#[test]
fn paired_sample_limits() {
    let (ori, refd, prior, s) = lab();
    let mut no_decay = params(1e6, 0.4, WeightKind::Gaussian);
    no_decay.decay = false;
    let (mut lim, mut base) = (0.0, 0.0);
    for seed in 0..5 {
        let (o, r) = paired_sample(&ori, &refd, &prior, &s, 50, seed, &no_decay, true).unwrap();
        let (l, h) = band_distance(&r.final_latent, &o.final_latent, 0.15).unwrap();
        lim += l + h;
        let z = fmm_core::sampler::initial_latent(&ori, seed, false);
        let b = sample_from(&refd, &prior, &s, 50, seed, z, &mut []).unwrap().final_latent;
        let (l, h) = band_distance(&b, &o.final_latent, 0.15).unwrap();
        base += l + h;
    }
    assert!(lim * 10.0 <= base, "limit {lim} baseline {base}");
}

#[test]
fn paired_sample_same_condition_matches_plain_run() {
    let (ori, _, prior, s) = lab();
    let p = params(0.2, 0.4, WeightKind::Gaussian);
    for seed in 0..3 {
        let (o, r) = paired_sample(&ori, &ori, &prior, &s, 50, seed, &p, true).unwrap();
        let (low, _) = band_distance(&r.final_latent, &o.final_latent, 0.15).unwrap();
        let (scale, _) = band_distance(&o.final_latent, &RealField::zeros(o.final_latent.shape()), 0.15).unwrap();
        assert!(low / scale <= 1e-3, "{}", low / scale);
    }
}

#[test]
fn paired_sample_independent_noise_differs() {
    let (ori, refd, prior, s) = lab();
    let p = params(0.2, 0.4, WeightKind::Gaussian);
    let (o1, r1) = paired_sample(&ori, &refd, &prior, &s, 10, 3, &p, true).unwrap();
    let (o2, r2) = paired_sample(&ori, &refd, &prior, &s, 10, 3, &p, false).unwrap();
    assert_eq!(o1, o2);
    assert_ne!(r1.final_latent, r2.final_latent);
}

#[test]
fn modulation_hook_rejects_mismatched_grids() {
    let (ori, refd, prior, s) = lab();
    let p = params(0.2, 0.4, WeightKind::Gaussian);
    let z = fmm_core::sampler::initial_latent(&ori, 0, false);
    let original = sample_from(&ori, &prior, &s, 10, 0, z.clone(), &mut []).unwrap();
    let mut hook = fmm_core::ModulationHook::new(&original, p).unwrap();
    let r = sample_from(&refd, &prior, &s, 12, 0, z, &mut [&mut hook]);
    assert!(matches!(r, Err(Error::InvalidConfig(_))));
}

#[test]
fn fmm_balances_structure_and_semantics() {
    let (ori, refd, prior, s) = lab();
    let p = params(0.2, 0.4, WeightKind::Gaussian);
    let (mut fmm_low, mut base_low, mut fmm_high, mut ori_high) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..100 {
        let (o, r) = paired_sample(&ori, &refd, &prior, &s, 50, seed, &p, true).unwrap();
        let z = fmm_core::sampler::initial_latent(&ori, seed, false);
        let target = sample_from(&refd, &prior, &s, 50, seed, z, &mut []).unwrap().final_latent;
        fmm_low += band_distance(&r.final_latent, &o.final_latent, 0.15).unwrap().0;
        base_low += band_distance(&target, &o.final_latent, 0.15).unwrap().0;
        fmm_high += band_distance(&r.final_latent, &target, 0.15).unwrap().1;
        ori_high += band_distance(&o.final_latent, &target, 0.15).unwrap().1;
    }
    assert!(fmm_low < base_low, "{fmm_low} vs {base_low}");
    assert!(fmm_high <= 0.25 * ori_high, "{fmm_high} vs {ori_high}");
}

#[test]
fn high_pass_examples() {
    let f = white_noise(shape(2, 16, 16), 4);
    let tiny = FilterSpec::new(1e-9, FilterShape::Hard, (1, 1)).unwrap();
    let out = high_pass_intervention(&f, &tiny).unwrap();
    for c in 0..2 {
        let m = f.channel(c).iter().sum::<f64>() / 256.0;
        for (o, x) in out.channel(c).iter().zip(f.channel(c)) {
            assert!((o - (x - m)).abs() < 1e-12);
        }
    }
    let spec = FilterSpec::new(0.3, FilterShape::Hard, (1, 1)).unwrap();
    let zero = high_pass_intervention(&RealField::filled(shape(1, 16, 16), 5.0), &spec).unwrap();
    assert!(zero.data().iter().all(|x| x.abs() < 1e-12));
    assert!(FilterSpec::new(0.0, FilterShape::Hard, (1, 1)).is_err());
    assert!(FilterSpec::new(1.0, FilterShape::Hard, (1, 1)).is_err());
    assert!(FilterSpec::new(0.2, FilterShape::Hard, (3, 2)).is_err());
    assert!(spec.check_steps(0).is_err());
}

#[test]
fn hard_high_pass_keeps_expected_energy_of_white_noise() {
    let radial = RadialMap::new(64, 64).unwrap();
    let kept = radial.distances().iter().filter(|&&d| d >= 0.15 * radial.d_max()).count() as f64 / 4096.0;
    let spec = FilterSpec::new(0.15, FilterShape::Hard, (1, 1)).unwrap();
    let (mut e_in, mut e_out) = (0.0, 0.0);
    for seed in 0..50 {
        let f = white_noise(shape(1, 64, 64), seed);
        e_in += f.sum_squares();
        e_out += high_pass_intervention(&f, &spec).unwrap().sum_squares();
    }
    let ratio = e_out / e_in;
    assert!((ratio / kept - 1.0).abs() < 0.01, "{ratio} vs {kept}");
}

#[test]
fn gaussian_edge_filter_profile() {
    let f = white_noise(shape(1, 16, 16), 8);
    let spec = FilterSpec::new(0.25, FilterShape::GaussianEdge, (1, 1)).unwrap();
    let out = forward_transform(&high_pass_intervention(&f, &spec).unwrap()).unwrap();
    let inp = forward_transform(&f).unwrap();
    let radial = RadialMap::new(16, 16).unwrap();
    let cut = 0.25 * radial.d_max();
    for u in 0..16 {
        for v in 0..16 {
            let d = radial.distance(u, v);
            let g = 1.0 - (-(d * d) / (2.0 * cut * cut)).exp();
            assert!((out.get(0, u, v) - inp.get(0, u, v) * g).norm() < 1e-10);
        }
    }
}
