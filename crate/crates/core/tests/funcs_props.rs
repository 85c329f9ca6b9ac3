use opmeans::funcs::kernels::{heinz_mean, power_difference, power_mean};
use opmeans::{
    adjoint, builtin, classify, perp, standard_catalog, weight_at_one, Grid, Verdict, CLASSIFY_TOL,
};
use proptest::prelude::*;

fn x_value() -> impl Strategy<Value = f64> {
    (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kernel_interpolates_harmonic_geometric_arithmetic(x in x_value(), lam in 0.0f64..=1.0) {
        let h = power_mean(-1.0, lam, x);
        let g = power_mean(0.0, lam, x);
        let a = power_mean(1.0, lam, x);
        prop_assert!(h <= g * (1.0 + 1e-14));
        prop_assert!(g <= a * (1.0 + 1e-14));
    }

    #[test]
    fn kernel_nondecreasing_in_t(
        x in x_value(),
        lam in 0.0f64..=1.0,
        t1 in -1.0f64..=1.0,
        t2 in -1.0f64..=1.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(power_mean(lo, lam, x) <= power_mean(hi, lam, x) * (1.0 + 1e-13));
    }

    #[test]
    fn kernel_convex_in_lambda(
        x in x_value().prop_filter("away from 1", |x| (x.ln()).abs() > 1e-2),
        t in prop::sample::select(vec![-1.0, -0.5, 0.0, 0.5]),
        lam in 0.05f64..0.95,
    ) {
        let h = 0.05;
        let d2 = power_mean(t, lam - h, x) - 2.0 * power_mean(t, lam, x) + power_mean(t, lam + h, x);
        prop_assert!(d2 > 0.0, "second difference {d2:e}");
    }

    #[test]
    fn power_difference_chain(x in x_value()) {
        let f11 = power_difference(1.0, 1.0, x);
        let f10 = power_difference(1.0, 0.0, x);
        let f00 = power_difference(0.0, 0.0, x);
        prop_assert!(((1.0 + x) / 2.0 - f11).abs() <= 1e-12 * f11);
        prop_assert!(f11 >= f10 * (1.0 - 1e-14));
        prop_assert!(f10 >= f00 * (1.0 - 1e-14));
        prop_assert!((f00 - x.sqrt()).abs() <= 1e-12 * f00);
    }

    #[test]
    fn power_difference_monotone(
        x in x_value(),
        a in -1.0f64..=1.0,
        p1 in -1.0f64..=1.0,
        p2 in -1.0f64..=1.0,
    ) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(power_difference(lo, a, x) <= power_difference(hi, a, x) * (1.0 + 1e-9));
        prop_assert!(power_difference(a, lo, x) <= power_difference(a, hi, x) * (1.0 + 1e-9));
    }

    #[test]
    fn heinz_sandwich(x in x_value(), t in 0.0f64..=1.0) {
        let h = heinz_mean(t, x);
        prop_assert!(x.sqrt() <= h * (1.0 + 1e-14));
        prop_assert!(h <= (1.0 + x) / 2.0 * (1.0 + 1e-14));
    }

    #[test]
    fn weights_lie_in_unit_interval(t in -1.0f64..=1.0, lam in 0.0f64..=1.0) {
        let f = builtin("power", &[t, lam]).unwrap();
        let w = weight_at_one(&f);
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!((w - lam).abs() <= 1e-12);
    }
}

#[test]
fn transforms_are_involutions() {
    let grid = Grid::default();
    for f in standard_catalog() {
        let aa = adjoint(&adjoint(&f).unwrap()).unwrap();
        let pp = perp(&perp(&f).unwrap()).unwrap();
        for &x in grid.points() {
            let y = f.eval(x).unwrap();
            assert!(
                (aa.eval(x).unwrap() - y).abs() <= 1e-10 * y.max(1.0),
                "{} at {x}",
                f.label()
            );
            assert!(
                (pp.eval(x).unwrap() - y).abs() <= 1e-10 * y.max(1.0),
                "{} at {x}",
                f.label()
            );
        }
    }
}

#[test]
fn transforms_swap_the_classes() {
    let grid = Grid::default();
    for f in standard_catalog() {
        let v = classify(&f, &grid, CLASSIFY_TOL).unwrap().verdict;
        let expected = match v {
            Verdict::Pmi => Verdict::Pmd,
            Verdict::Pmd => Verdict::Pmi,
            other => other,
        };
        for g in [adjoint(&f).unwrap(), perp(&f).unwrap()] {
            let got = classify(&g, &grid, CLASSIFY_TOL).unwrap().verdict;
            assert_eq!(got, expected, "{} vs {}", f.label(), g.label());
        }
    }
}

#[test]
fn transforms_keep_weights_consistent() {
    // (f*)'(1) = f'(1) and (f⊥)'(1) = 1 − f'(1)
    for f in standard_catalog() {
        let w = f.weight();
        assert!(
            (adjoint(&f).unwrap().weight() - w).abs() < 1e-8,
            "{}",
            f.label()
        );
        assert!(
            (perp(&f).unwrap().weight() - (1.0 - w)).abs() < 1e-8,
            "{}",
            f.label()
        );
    }
}
