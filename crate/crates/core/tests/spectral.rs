use fmm_core::rng::white_noise;
use fmm_core::{
    brute_force_dft, forward_transform, inverse_transform, psd_slope, radial_distance_map, radially_averaged_psd,
    ComplexSpectrum, Error, PsdAccumulator, PsdProfile, RealField, Shape,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn shape(c: usize, h: usize, w: usize) -> Shape {
    Shape::new(c, h, w).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn constant_field_has_only_dc() {
    let f = RealField::filled(shape(1, 4, 4), 1.0);
    let s = forward_transform(&f).unwrap();
    for u in 0..4 {
        for v in 0..4 {
            let z = s.get(0, u, v);
            if (u, v) == (2, 2) {
                assert_eq!(z, Complex64::new(16.0, 0.0));
            } else {
                assert!(z.norm() < 1e-12, "bin ({u},{v}) = {z}");
            }
        }
    }
}

#[test]
fn delta_has_flat_unit_spectrum() {
    let f = RealField::from_fn(shape(1, 4, 4), |_, r, c| if (r, c) == (0, 0) { 1.0 } else { 0.0 }).unwrap();
    for s in [forward_transform(&f).unwrap(), brute_force_dft(&f).unwrap()] {
        assert!(s.coeffs().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }
}

#[test]
fn brute_force_constant_dc() {
    let s = brute_force_dft(&RealField::filled(shape(1, 4, 4), 1.0)).unwrap();
    assert!((s.get(0, 2, 2) - Complex64::new(16.0, 0.0)).norm() < 1e-12);
}

#[test]
fn fft_matches_brute_force_small_grids() {
    for (i, (h, w)) in [(4, 4), (8, 8), (3, 5), (2, 7), (6, 9)].into_iter().enumerate() {
        let f = white_noise(shape(2, h, w), i as u64);
        let d = forward_transform(&f).unwrap().max_abs_diff(&brute_force_dft(&f).unwrap()).unwrap();
        assert!(d <= 1e-9, "{h}x{w}: {d}");
    }
}

#[test]
fn fft_matches_brute_force_at_oracle_limit() {
    let f = white_noise(shape(1, 64, 64), 3);
    let d = forward_transform(&f).unwrap().max_abs_diff(&brute_force_dft(&f).unwrap()).unwrap();
    assert!(d <= 1e-9, "{d}");
}

#[test]
fn brute_force_refuses_large_grids() {
    let f = RealField::zeros(shape(1, 65, 64));
    assert!(matches!(brute_force_dft(&f), Err(Error::OracleSize { .. })));
}

#[test]
fn non_finite_input_rejected() {
    let r = RealField::new(shape(1, 2, 2), vec![0.0, f64::NAN, 0.0, 0.0]);
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn dc_only_inverse_is_constant() {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 16];
    coeffs[2 * 4 + 2] = Complex64::new(16.0, 0.0);
    let f = inverse_transform(&ComplexSpectrum::new(shape(1, 4, 4), coeffs).unwrap()).unwrap();
    assert!(f.data().iter().all(|&x| (x - 1.0).abs() < 1e-15));
}

#[test]
fn perturbed_bin_is_symmetry_violation() {
    let f = white_noise(shape(1, 4, 4), 9);
    let s = forward_transform(&f).unwrap();
    let mut coeffs = s.coeffs().to_vec();
    // (1, 1) mirrors to (3, 3); perturb only one side
    coeffs[4 + 1] += Complex64::new(1e-3, 0.0);
    let bad = ComplexSpectrum::new(s.shape(), coeffs).unwrap();
    assert!(matches!(inverse_transform(&bad), Err(Error::SymmetryViolation { .. })));
}

#[test]
fn filtered_constant_field_inverts_cleanly() {
    // nearly empty spectra must not trip the symmetry check
    let s = forward_transform(&RealField::filled(shape(1, 8, 8), 3.0)).unwrap();
    let gains: Vec<f64> = (0..64).map(|i| if i == 4 * 8 + 4 { 0.0 } else { 1.0 }).collect();
    let f = inverse_transform(&s.scale_bins(&gains).unwrap()).unwrap();
    assert!(f.data().iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn radial_map_examples() {
    let m = radial_distance_map(4, 4).unwrap();
    assert_eq!(m.distance(2, 2), 0.0);
    assert!((m.distance(0, 0) - 8f64.sqrt()).abs() < 1e-15);
    assert_eq!(m.d_max(), m.distance(0, 0));

    let m = radial_distance_map(3, 5).unwrap();
    assert_eq!(m.center(), (1, 2));
    // exhaustive scan of the 15 bins
    let mut best: f64 = 0.0;
    for u in 0..3i32 {
        for v in 0..5i32 {
            best = best.max((((u - 1).pow(2) + (v - 2).pow(2)) as f64).sqrt());
        }
    }
    assert_eq!(m.d_max(), best);
    assert!((m.d_max() - 5f64.sqrt()).abs() < 1e-15);
    assert_eq!(m.distance(0, 0), m.d_max());
}

#[test]
fn radial_map_rejects_small_dims() {
    assert!(matches!(radial_distance_map(1, 4), Err(Error::InvalidDimension { .. })));
    assert!(matches!(radial_distance_map(4, 1), Err(Error::InvalidDimension { .. })));
}

#[test]
fn radial_map_max_at_corner_and_in_range() {
    for (h, w) in [(2, 2), (4, 7), (9, 6), (64, 64), (5, 5)] {
        let m = radial_distance_map(h, w).unwrap();
        let corners = [m.distance(0, 0), m.distance(0, w - 1), m.distance(h - 1, 0), m.distance(h - 1, w - 1)];
        assert!(corners.contains(&m.d_max()));
        assert!(m.d_max() > 0.0);
        assert!(m.distances().iter().all(|&d| (0.0..=m.d_max()).contains(&d)));
    }
}

#[test]
fn psd_of_constant_field_is_dc_only() {
    let p = radially_averaged_psd(&forward_transform(&RealField::filled(shape(1, 16, 16), 2.0)).unwrap(), 8).unwrap();
    assert!(p.mean_power[0].unwrap() > 0.0);
    assert!(p.mean_power[1..].iter().all(|x| x.unwrap() < 1e-20));
}

#[test]
fn psd_flags_empty_annuli() {
    // on a 2x2 grid radii are 0, 1, 1, sqrt 2: with many bins most annuli are empty
    let p = radially_averaged_psd(&forward_transform(&white_noise(shape(1, 2, 2), 1)).unwrap(), 10).unwrap();
    let empty = p.sample_count.iter().filter(|&&c| c == 0).count();
    assert!(empty > 0);
    for (c, m) in p.sample_count.iter().zip(&p.mean_power) {
        assert_eq!(*c == 0, m.is_none());
    }
}

#[test]
fn white_noise_psd_is_flat() {
    let mut acc = PsdAccumulator::new(16, 16, 6).unwrap();
    for seed in 0..10_000 {
        acc.add(&forward_transform(&white_noise(shape(1, 16, 16), seed)).unwrap()).unwrap();
    }
    let p = acc.finish();
    let powers: Vec<f64> = p.mean_power.iter().flatten().copied().collect();
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    let worst = powers.iter().map(|x| rel(*x, mean)).fold(0.0, f64::max);
    assert!(worst < 0.05, "max deviation {worst}");
}

#[test]
fn psd_slope_exact_power_laws() {
    let d_max = 40.0;
    for beta in [0.0, 1.0, 2.0, 3.5] {
        let centers: Vec<f64> = (0..20).map(|i| (i as f64 + 0.5) * d_max / 20.0).collect();
        let powers = centers.iter().map(|r| Some(7.0 * r.powf(-beta))).collect();
        let p = PsdProfile::from_powers(d_max, powers).unwrap();
        let slope = psd_slope(&p, 0.05, 1.0).unwrap();
        assert!((slope + beta).abs() < 1e-9, "beta {beta}: {slope}");
    }
}

#[test]
fn psd_slope_ignores_dc_annulus_and_needs_three_bins() {
    let mut powers: Vec<Option<f64>> = (0..10).map(|i| Some(((i as f64) + 0.5).powf(-2.0))).collect();
    powers[0] = Some(1e9);
    let p = PsdProfile::from_powers(10.0, powers).unwrap();
    assert!((psd_slope(&p, 0.01, 1.0).unwrap() + 2.0).abs() < 1e-9);
    assert!(matches!(psd_slope(&p, 0.5, 0.7), Err(Error::InsufficientData { usable: 2, .. })));
    assert!(matches!(psd_slope(&p, 0.0, 0.7), Err(Error::InvalidInput(_))));
    assert!(matches!(psd_slope(&p, 0.3, 1.2), Err(Error::InvalidInput(_))));
}

fn sizes() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((4, 4)), Just((8, 8)), Just((16, 16)), Just((64, 64)), (2usize..12, 2usize..12)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parseval_and_hermitian((h, w) in sizes(), channels in 1usize..3, seed in any::<u64>()) {
        let f = white_noise(shape(channels, h, w), seed);
        let s = forward_transform(&f).unwrap();
        for (c, energy) in s.channel_energy().iter().enumerate() {
            let spatial: f64 = f.channel(c).iter().map(|x| x * x).sum();
            prop_assert!(rel(energy / (h * w) as f64, spatial) <= 1e-10);
        }
        prop_assert!(s.hermitian_error() <= 1e-10);
    }

    #[test]
    fn round_trip((h, w) in sizes(), seed in any::<u64>()) {
        let f = white_noise(shape(1, h, w), seed);
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&f).unwrap() <= 1e-10);
    }

    #[test]
    fn linearity((h, w) in sizes(), a in -2.0f64..2.0, b in -2.0f64..2.0, s1 in any::<u64>(), s2 in any::<u64>()) {
        let x = white_noise(shape(1, h, w), s1);
        let y = white_noise(shape(1, h, w), s2);
        let lhs = forward_transform(&x.lin_comb(a, &y, b).unwrap()).unwrap();
        let (fx, fy) = (forward_transform(&x).unwrap(), forward_transform(&y).unwrap());
        let rhs: Vec<Complex64> = fx.coeffs().iter().zip(fy.coeffs()).map(|(p, q)| p * a + q * b).collect();
        let rhs = ComplexSpectrum::new(lhs.shape(), rhs).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn fft_equals_brute_force(h in 2usize..20, w in 2usize..20, seed in any::<u64>()) {
        let f = white_noise(shape(1, h, w), seed);
        let d = forward_transform(&f).unwrap().max_abs_diff(&brute_force_dft(&f).unwrap()).unwrap();
        prop_assert!(d <= 1e-9);
    }

    #[test]
    fn equal_radii_equal_bits(h in 2usize..30, w in 2usize..30) {
        let m = radial_distance_map(h, w).unwrap();
        let (cu, cv) = m.center();
        for u in 0..h {
            for v in 0..w {
                let (du, dv) = ((u as i64 - cu as i64).abs(), (v as i64 - cv as i64).abs());
                // the transposed offset has the same radius whenever it exists on the grid
                let (tu, tv) = (cu as i64 + dv, cv as i64 + du);
                if tu < h as i64 && tv < w as i64 {
                    prop_assert_eq!(m.distance(u, v).to_bits(), m.distance(tu as usize, tv as usize).to_bits());
                }
            }
        }
    }
}
