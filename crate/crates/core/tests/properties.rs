use std::f64::consts::PI;

use ernst_theta::cli::parse_complex;
use ernst_theta::linalg::CMat;
use ernst_theta::verify::trisecant_residual;
use ernst_theta::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn b2() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.3, 1.2), c(-0.2, 0.4), c(-0.2, 0.4), c(0.1, 0.9)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complex_literal_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let s = format!("{re}{im:+}i");
        prop_assert_eq!(parse_complex(&s).unwrap(), c(re, im));
        let e = format!("{re:e}{im:+e}i");
        prop_assert_eq!(parse_complex(&e).unwrap(), c(re, im));
    }

    #[test]
    fn theta_quasi_periodicity(x0 in -1.0f64..1.0, y0 in -0.4f64..0.4, x1 in -1.0f64..1.0, y1 in -0.4f64..0.4, j in 0usize..2) {
        let b = b2();
        let ctx = ThetaContext::new(&b, 1e-14).unwrap();
        let ch = Characteristics::zero(2);
        let z = [c(x0, y0), c(x1, y1)];
        let t = ctx.theta(&z, &ch);
        let mut shifted = z;
        shifted[j] += 1.0;
        prop_assert!((ctx.theta(&shifted, &ch) - t).norm() <= 1e-12 * ctx.magnitude(&z, &ch));
        let zb = [z[0] + b[(0, j)], z[1] + b[(1, j)]];
        let factor = (c(0.0, -PI) * b[(j, j)] - c(0.0, 2.0 * PI) * z[j]).exp();
        let scale = ctx.magnitude(&zb, &ch);
        prop_assert!((ctx.theta(&zb, &ch) - factor * t).norm() <= 1e-11 * scale);
    }

    #[test]
    fn theta_parity(x0 in -1.0f64..1.0, y0 in -0.4f64..0.4, x1 in -1.0f64..1.0, y1 in -0.4f64..0.4) {
        let ctx = ThetaContext::new(&b2(), 1e-14).unwrap();
        let z = [c(x0, y0), c(x1, y1)];
        let mz = [-z[0], -z[1]];
        let even = Characteristics::zero(2);
        let odd = Characteristics::real(&[0.5, 0.0], &[0.5, 0.0]);
        let m = ctx.magnitude(&z, &even);
        prop_assert!((ctx.theta(&z, &even) - ctx.theta(&mz, &even)).norm() <= 1e-12 * m);
        prop_assert!((ctx.theta(&z, &odd) + ctx.theta(&mz, &odd)).norm() <= 1e-12 * m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trisecant_on_a_fixed_curve(
        pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, any::<bool>()), 4),
        x in 0.0f64..1.0,
        y in -0.4f64..0.4,
    ) {
        let curve = HyperellipticCurve::from_branch_points(&[c(-1.0, -0.5), c(-0.5, 1.0), c(1.0, 0.2), c(1.5, -1.0)]).unwrap();
        let kc = KernelContext::new(&curve, &PeriodOptions::default(), 1e-14).unwrap();
        let pts: Vec<SurfacePoint> = pts
            .iter()
            .map(|&(re, im, up)| if up { SurfacePoint::plus(c(re, im)) } else { SurfacePoint::minus(c(re, im)) })
            .collect();
        for p in &pts {
            let l = p.lambda().unwrap();
            prop_assume!(curve.distance_to_cuts(l) > 0.2 && curve.distance_to_branch_points(l, None) > 0.2);
        }
        for i in 0..4 {
            for j in 0..i {
                prop_assume!((pts[i].lambda().unwrap() - pts[j].lambda().unwrap()).norm() > 0.1);
            }
        }
        let r = trisecant_residual(&kc, &Characteristics::zero(1), &[c(x, y)], [&pts[0], &pts[1], &pts[2], &pts[3]]);
        prop_assume!(r.is_ok());
        prop_assert!(r.unwrap() < 1e-8);
    }
}
