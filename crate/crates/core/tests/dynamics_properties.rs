use anosov_forge::geometry::{dsigma, sigma, tau};
use anosov_forge::{Dynamics, PlanePoint};
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = PlanePoint> {
    (-r..=r, -r..=r).prop_map(|(x, y)| PlanePoint::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn foliations_are_invariant(p in point(12.0)) {
        let d = Dynamics::default();
        let j = d.df(p).unwrap();
        let q = d.f(p).unwrap();
        let u = j.apply(d.fu_dir(p).unwrap().dir);
        let s = j.apply(d.fs_dir(p).unwrap().dir);
        prop_assert!(u.line_angle(&d.fu_dir(q).unwrap().dir) <= 1e-6);
        prop_assert!(s.line_angle(&d.fs_dir(q).unwrap().dir) <= 1e-6);
    }

    #[test]
    fn foliations_are_equivariant(p in point(12.0)) {
        let d = Dynamics::default();
        let u = d.fu_dir(p).unwrap().dir;
        let ut = d.fu_dir(tau(p)).unwrap().dir;
        prop_assert!(u.line_angle(&ut) <= 1e-6, "{u:?} vs {ut:?}");
        let s = dsigma(d.fs_dir(p).unwrap().dir);
        prop_assert!(s.line_angle(&d.fu_dir(sigma(p)).unwrap().dir) <= 1e-6);
    }

    #[test]
    fn every_point_moves_at_least_three_quarters(p in point(30.0)) {
        let d = Dynamics::default();
        let q = d.f(p).unwrap();
        prop_assert!((q.x - p.x).abs().max((q.y - p.y).abs()) >= 0.75 - 1e-9, "{p:?} -> {q:?}");
    }

    #[test]
    fn branch_formulas_agree_on_the_overlap(p in point(12.0)) {
        let d = Dynamics::default();
        if let Some(r) = d.f_both_branches(p) {
            let (a, b) = r.unwrap();
            prop_assert!(a.sup_dist(&b) <= 1e-8, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn inverse_undoes_the_map(p in point(12.0)) {
        let d = Dynamics::default();
        let back = d.f_inv(d.f(p).unwrap()).unwrap();
        prop_assert!(back.sup_dist(&p) <= 1e-9, "{p:?} -> {back:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn forward_orbits_escape(p in point(10.0)) {
        let d = Dynamics::default();
        let mut z = p;
        let mut escaped = false;
        for _ in 0..60 {
            z = d.f(z).unwrap();
            if z.x.hypot(z.y) > 20.0 {
                escaped = true;
                break;
            }
        }
        prop_assert!(escaped, "{p:?} still at {z:?}");
    }
}
