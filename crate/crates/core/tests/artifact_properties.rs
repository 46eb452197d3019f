use anosov_forge::report::{orbit_csv, parse_orbit_csv};
use anosov_forge::{Config, Dynamics, PlanePoint};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn config_round_trips_through_toml(
        seed in any::<u64>(),
        epsilon in 1e-3..0.03f64,
        samples in 1usize..100_000,
        lo in -20.0..-1.0f64,
    ) {
        let c = Config { seed, epsilon, samples, sample_box: [lo, 1.0, lo, 2.0], ..Config::default() };
        prop_assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn orbit_csv_round_trips_exactly(x in -12.0..=12.0f64, y in -12.0..=12.0f64, steps in -8i64..=8) {
        let d = Dynamics::default();
        let text = orbit_csv(&d, PlanePoint::new(x, y), steps).unwrap();
        let rows = parse_orbit_csv(&text).unwrap();
        prop_assert_eq!(rows.len() as i64, steps.abs() + 1);
        for w in rows.windows(2) {
            prop_assert_eq!(w[1].0, w[0].0 + 1);
            prop_assert_eq!(d.f(w[0].1).unwrap(), w[1].1);
        }
        prop_assert_eq!(orbit_csv(&d, PlanePoint::new(x, y), steps).unwrap(), text);
    }
}
