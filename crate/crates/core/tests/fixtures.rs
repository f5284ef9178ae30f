use calibration_measures::fixtures::{by_name, quadratic_gap, Origin, NAMES};
use calibration_measures::report::{evaluate, Config, Input, Measure};

fn check_all(name: &str, eps: f64, n: usize) {
    let fixture = by_name(name, eps, n).unwrap();
    assert!(!fixture.expected.is_empty(), "{name} has no expectations");
    let input = Input::from_instance(fixture.instance.clone());
    let config = Config::default();
    for (id, want) in &fixture.expected {
        let measure: Measure = id.parse().unwrap();
        let mut warnings = Vec::new();
        let got = evaluate(&measure, &input, &config, &mut warnings).unwrap();
        assert!(
            want.contains(got),
            "{name}(eps={eps}) {id} = {got}, expected [{}, {}]",
            want.min,
            want.max
        );
    }
}

#[test]
fn every_fixture_meets_its_expectations() {
    for name in NAMES {
        let grid: &[f64] = match *name {
            "two_point" => &[0.01, 0.05, 0.1, 0.25, 0.4, 0.49],
            "cdl_example_1" | "cdl_example_2" => &[0.001, 0.01, 0.05, 0.09],
            _ => &[0.01, 0.05, 0.1, 0.2, 0.24],
        };
        for &eps in grid {
            check_all(name, eps, 200);
        }
    }
}

#[test]
fn cdl_example_2_across_sizes() {
    for n in [100, 1000, 5000] {
        for eps in [0.02, 0.05, 0.099] {
            check_all("cdl_example_2", eps, n);
        }
    }
}

#[test]
fn calibrated_limit_of_two_point() {
    check_all("two_point", 0.0, 1);
}

#[test]
fn quadratic_gap_variants_share_the_joint() {
    let q = quadratic_gap(0.1).unwrap();
    assert_eq!(q.near.instance.project(), q.far.instance.project());
    assert_ne!(q.near.instance.project(), q.calibrated.instance.project());
}

#[test]
fn origins_serialize_in_snake_case() {
    let text = serde_json::to_string(&Origin::HandDerived).unwrap();
    assert_eq!(text, "\"hand_derived\"");
}

#[test]
fn out_of_range_parameters_are_rejected() {
    assert!(by_name("nope", 0.05, 100).is_err());
    assert!(by_name("cdl_example_2", 0.05, 10).is_err());
    assert!(by_name("cdl_example_1", 0.1, 100).is_err());
    assert!(by_name("quadratic_gap_near", 0.25, 100).is_err());
    assert!(by_name("two_point", 0.5, 100).is_err());
}
