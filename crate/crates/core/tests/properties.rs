use num_complex::Complex64;
use padic_heat_core::kernel::{z_tent, KernelParams, KernelSlice};
use padic_heat_core::operator::{apply_hypersingular, BallCombination, OperatorParams};
use padic_heat_core::{LocallyConstantFunction, PAdicPoint, PAdicScalar, Radius};
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn scalar(p: u32) -> impl Strategy<Value = PAdicScalar> {
    (-1000i128..1000, 1i128..200).prop_map(move |(a, b)| {
        // keep the denominator's p-part small so 40 digits cover everything
        PAdicScalar::from_rational(p, a, b, 40).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ultrametric_inequality((x, y) in prime().prop_flat_map(|p| (scalar(p), scalar(p)))) {
        let s = x.add(&y);
        prop_assert!(s.norm() <= x.norm().max(y.norm()) * (1.0 + 1e-15));
        if x.norm() != y.norm() {
            prop_assert_eq!(s.norm(), x.norm().max(y.norm()));
        }
    }

    #[test]
    fn character_is_additive((x, y) in prime().prop_flat_map(|p| (scalar(p), scalar(p)))) {
        let lhs = x.add(&y).character();
        let rhs = x.character() * y.character();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kernel_is_nonnegative(
        p in prime(), n in 1u32..4, alpha in 0.3f64..3.0, a in 0.1f64..2.0,
        t in 1e-3f64..100.0, m in -30i32..30,
    ) {
        let params = KernelParams::new(p, n, alpha, a).unwrap();
        prop_assert!(z_tent(Radius::Sphere(m), t, &params).unwrap() >= 0.0);
        prop_assert!(z_tent(Radius::Origin, t, &params).unwrap() >= 0.0);
    }

    #[test]
    fn kernel_has_unit_mass(p in prime(), n in 1u32..4, alpha in 0.5f64..2.5, t in 1e-2f64..10.0) {
        let params = KernelParams::new(p, n, alpha, 1.0).unwrap();
        let mass = KernelSlice::new(&params, t).unwrap().integral().unwrap();
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_is_linear(
        c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, k1 in -2i32..3, k2 in -2i32..3,
        gamma in 0.3f64..2.0, m in -3i32..4,
    ) {
        let p = 3;
        let f = BallCombination::new(vec![(1.0, k1)]).to_lcf(p, 1).unwrap();
        let g = BallCombination::new(vec![(1.0, k2)]).to_lcf(p, 1).unwrap();
        let (a, b) = (Complex64::new(c1, 0.0), Complex64::new(c2, 0.0));
        let h = LocallyConstantFunction::linear_combination(a, &f, b, &g).unwrap();
        let op = OperatorParams::new(gamma).unwrap();
        let x = PAdicPoint::on_sphere(p, 1, m);
        let lhs = apply_hypersingular(&h, &op, &x).unwrap();
        let rhs = a * apply_hypersingular(&f, &op, &x).unwrap() + b * apply_hypersingular(&g, &op, &x).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
}
