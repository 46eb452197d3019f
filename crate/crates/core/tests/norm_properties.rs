use anosov_forge::{Norms, PlanePoint, Vec2};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn unstable_weight_is_at_least_one(x in -12.0..=12.0f64, y in -12.0..=12.0f64) {
        let nm = Norms::default();
        // defined on the half-plane x + y >= 0
        let p = if x + y >= 0.0 { PlanePoint::new(x, y) } else { PlanePoint::new(-x, -y) };
        let w = nm.weight_u(p).unwrap().omega;
        prop_assert!(w >= 1.0 - 1e-12, "{w}");
    }

    #[test]
    fn unstable_weight_is_one_on_the_anti_diagonal(s in -12.0..=12.0f64) {
        let nm = Norms::default();
        prop_assert_eq!(nm.weight_u(PlanePoint::new(s, -s)).unwrap().omega, 1.0);
    }

    #[test]
    fn metric_is_a_norm(
        x in -12.0..=12.0f64, y in -12.0..=12.0f64,
        a in -3.0..=3.0f64, b in -3.0..=3.0f64, c in -4.0..=4.0f64,
        e in -3.0..=3.0f64, f in -3.0..=3.0f64,
    ) {
        let nm = Norms::default();
        let p = PlanePoint::new(x, y);
        let v = Vec2::new(a, b);
        let w = Vec2::new(e, f);
        let nv = nm.metric_norm(p, v).unwrap();
        prop_assert!((nm.metric_norm(p, c * v).unwrap() - c.abs() * nv).abs() <= 1e-9 * (1.0 + nv * c.abs()));
        prop_assert!(nm.metric_norm(p, v + w).unwrap() <= nv + nm.metric_norm(p, w).unwrap() + 1e-9);
        if v.norm() > 1e-6 {
            prop_assert!(nv > 0.0);
        }
    }
}
