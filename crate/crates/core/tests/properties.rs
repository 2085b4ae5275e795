use henonlab::dynamics::{HenonParams, Point2, QuadParam, C64};
use henonlab::horseshoe::interval::Interval;
use henonlab::horseshoe::{certify_horseshoe, entropy_census, hex_f64, parse_hex_f64, EntropyVerdict, HorseshoeConfig};
use henonlab::oracle1d::green_1d;
use henonlab::potential::{green_2d, Sign};
use henonlab::rng::split_seed;
use henonlab::saddles::{find_periodic, SearchBudget, SearchKind};
use henonlab::slices::{read_hslc, write_hslc, ParamRegion, Probe, ProbeBudget, Provenance, SliceImage, Window};
use proptest::prelude::*;

fn jacobian() -> impl Strategy<Value = f64> {
    (0.02f64..0.4, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn interval() -> impl Strategy<Value = (Interval, f64)> {
    (-1e3f64..1e3, 0.0f64..10.0, 0.0f64..=1.0).prop_map(|(lo, w, t)| {
        let iv = Interval::new(lo, lo + w);
        (iv, (lo + t * w).clamp(iv.lo, iv.hi))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hex_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(!x.is_nan());
        prop_assert_eq!(parse_hex_f64(&hex_f64(x)).unwrap().to_bits(), bits);
    }

    #[test]
    fn interval_ops_enclose_point_ops((x, px) in interval(), (y, py) in interval()) {
        prop_assert!((x + y).lo <= px + py && px + py <= (x + y).hi);
        prop_assert!((x - y).lo <= px - py && px - py <= (x - y).hi);
        let m = x * y;
        prop_assert!(m.lo <= px * py && px * py <= m.hi);
        let s = x.sqr();
        prop_assert!(s.lo <= px * px && px * px <= s.hi);
        prop_assert!(x.mig() <= px.abs() && px.abs() <= x.mag());
    }

    #[test]
    fn green_1d_doubles_under_the_map(re in -4.0f64..4.0, im in -4.0f64..4.0, a in -2.0f64..3.0) {
        let q = QuadParam::real(a).unwrap();
        let z = C64::new(re, im);
        let g = green_1d(&q, z, 1e-12).unwrap();
        let gf = green_1d(&q, q.apply(z), 1e-12).unwrap();
        prop_assume!(!g.assumed_in_k_flag());
        let tol = 2.0 * g.error_bound + gf.error_bound + 1e-11;
        prop_assert!((gf.value - 2.0 * g.value).abs() <= tol, "{} vs {}", gf.value, 2.0 * g.value);
    }

    #[test]
    fn green_2d_functional_equations(
        x in -3.0f64..3.0, y in -3.0f64..3.0, a in -1.0f64..6.0, b in jacobian(),
    ) {
        let p = HenonParams::real(a, b).unwrap();
        let pt = Point2::real(x, y);
        let fp = p.forward(pt);
        let plus = green_2d(&p, pt, Sign::Plus, 1e-12).unwrap();
        let plus_f = green_2d(&p, fp, Sign::Plus, 1e-12).unwrap();
        if !plus.assumed_in_k_flag() {
            let tol = 2.0 * plus.error_bound + plus_f.error_bound + 1e-10;
            prop_assert!((plus_f.value - 2.0 * plus.value).abs() <= tol);
        }
        let minus = green_2d(&p, pt, Sign::Minus, 1e-12).unwrap();
        let minus_f = green_2d(&p, fp, Sign::Minus, 1e-12).unwrap();
        if !minus_f.assumed_in_k_flag() {
            let tol = 2.0 * minus_f.error_bound + minus.error_bound + 1e-10;
            prop_assert!((minus.value - 2.0 * minus_f.value).abs() <= tol);
        }
    }

    #[test]
    fn hslc_round_trip(w in 1u32..6, h in 1u32..6, seed in any::<u64>()) {
        let n = (w * h) as usize;
        let rate: Vec<f32> = (0..n).map(|k| f32::from_bits(split_seed(seed, k as u64) as u32 & 0x7f7f_ffff)).collect();
        let status: Vec<u8> = (0..n).map(|k| (split_seed(seed, k as u64) >> 40) as u8 % 3).collect();
        let img = SliceImage {
            width: w,
            height: h,
            window: Window::new(-1.0, -2.0, 3.0, 0.5).unwrap(),
            rate,
            status,
            provenance: Provenance::Parameter {
                region: ParamRegion::AB { a0: 1.0, a1: 2.0, b0: 0.1, b1: 0.2 },
                probe: Probe::Horseshoe,
                budget: ProbeBudget::default(),
            },
        };
        prop_assert_eq!(read_hslc(&write_hslc(&img)).unwrap(), img);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_counts_never_exceed_bezout(a in -1.0f64..12.0, b in jacobian(), n in 1u32..=4) {
        let p = HenonParams::real(a, b).unwrap();
        let s = find_periodic(&p, n, SearchKind::ComplexGrid, &SearchBudget::default(), split_seed(0, n as u64)).unwrap();
        prop_assert!(s.records.len() <= 1 << n);
        let real = s.records.iter().filter(|r| r.is_real(1e-8)).count();
        prop_assert!(real <= s.records.len());
        for r in &s.records {
            // det Df^n = b^n at every point of period dividing n
            let det = r.eigen_unstable * r.eigen_stable;
            let want = b.powi(r.period as i32);
            prop_assert!((det.re - want).abs() <= 1e-8 * (1.0 + want.abs()) && det.im.abs() <= 1e-8);
        }
    }

    #[test]
    fn census_rows_are_ordered(a in -1.0f64..12.0, b in jacobian()) {
        let c = entropy_census(a, b, 4).unwrap();
        for r in &c.rows {
            prop_assert!(r.real <= r.complex && r.complex <= 1 << r.n, "{r:?}");
            prop_assert!(r.growth_rate <= std::f64::consts::LN_2 + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certified_horseshoes_have_full_real_census(a in 1.5f64..12.0, b in jacobian()) {
        let cert = certify_horseshoe(a, b, &HorseshoeConfig::fast()).unwrap();
        let census = entropy_census(a, b, 6).unwrap();
        if cert.verified {
            prop_assert_eq!(census.verdict, EntropyVerdict::Consistent, "a = {}, b = {}", a, b);
        }
        if census.verdict == EntropyVerdict::Inconsistent {
            prop_assert!(!cert.verified);
        }
    }
}
