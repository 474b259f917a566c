use lagdelta::delta::{delta_invariant, oracle_delta_dim3, DeltaOptions, DeltaTuple};
use lagdelta::frame::scalar_tau;
use lagdelta::gallery::{example_point, exotic_s3_lift, induced_data_horizontal, EXAMPLES};
use lagdelta::inequality::{evaluate, EvalOptions, Variant};
use lagdelta::lagrangian::{exotic_s3_point, gauss_curvature, mean_curvature};

#[test]
fn exotic_point_in_both_precisions() {
    let t = DeltaTuple::new(3, vec![2]).unwrap();
    let d64 = exotic_s3_point::<f64>();
    let d32 = exotic_s3_point::<f32>();
    let r64 = gauss_curvature(&d64);
    let r32 = gauss_curvature(&d32);
    assert!((scalar_tau(&r64) - 1.0 / 3.0).abs() < 1e-14);
    assert!((scalar_tau(&r32) - 1.0 / 3.0).abs() < 1e-5);
    assert!((oracle_delta_dim3(&r64).unwrap() - 2.0).abs() < 1e-12);
    let a = delta_invariant(&r64, &t, &DeltaOptions::default()).unwrap().value;
    let b = delta_invariant(&r32, &t, &DeltaOptions::default()).unwrap().value;
    assert!((a - 2.0).abs() < 1e-9);
    assert!((b as f64 - 2.0).abs() < 1e-4);
    let rep = evaluate(&d64, Variant::First, &t, &EvalOptions::default()).unwrap();
    assert_eq!(rep.rhs, 2.0);
    assert!(rep.equality);
}

#[test]
fn lift_reproduces_intrinsic_data() {
    for base in [[0.0, 0.0, 0.0], [0.7, -1.3, 2.1], [-2.5, 0.4, 0.9]] {
        let e = induced_data_horizontal(&exotic_s3_lift(base), &[0.0; 3]).unwrap();
        let (_, h2) = mean_curvature(&e.data.h);
        assert!(h2 < 1e-8, "{h2}");
        assert!((scalar_tau(&gauss_curvature(&e.data)) - 1.0 / 3.0).abs() < 1e-4);
        assert!((e.data.h.squared_norm() - exotic_s3_point::<f64>().h.squared_norm()).abs() < 1e-4);
    }
}

#[test]
fn every_example_has_a_point() {
    for name in EXAMPLES {
        let d = example_point(name).unwrap();
        assert_eq!(d.provenance.as_deref(), Some(name));
    }
    assert!(example_point("clifford").is_err());
}
