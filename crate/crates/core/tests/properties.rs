use std::sync::Arc;

use proptest::prelude::*;

use lagdelta::delta::{delta_invariant, enumerate_tuples, DeltaOptions, DeltaTuple};
use lagdelta::frame::{rotate_tensor, scalar_tau};
use lagdelta::gallery::{
    clifford_legendrian, graph_immersion, induced_data_flat, intrinsic_curvature_fd, omega_pullback,
    theorem92_chart, theorem92_interval, CubicPotential,
};
use lagdelta::inequality::{admissible_pairs, evaluate, EvalOptions, Variant};
use lagdelta::lagrangian::{gauss_curvature, mean_curvature, tau_from_cubic, LagrangianPointData};
use lagdelta::random::{haar_orthogonal, random_cubic, rng_for};

fn point(n: usize, c: f64, seed: u64) -> LagrangianPointData<f64> {
    LagrangianPointData::new(c, random_cubic(n, &mut rng_for(seed, 0))).unwrap()
}

fn quick() -> DeltaOptions {
    DeltaOptions { restarts: 8, ..Default::default() }
}

fn c_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(-1.0), -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tau_paths_agree(n in 2usize..=8, c in c_strategy(), seed in any::<u64>()) {
        let d = point(n, c, seed);
        let a = tau_from_cubic(&d);
        let b = scalar_tau(&gauss_curvature(&d));
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn gauss_tensor_is_frame_equivariant(n in 2usize..=7, c in c_strategy(), seed in any::<u64>()) {
        let d = point(n, c, seed);
        let q = haar_orthogonal::<f64, _>(n, &mut rng_for(seed, 1));
        let rotated = LagrangianPointData::new(c, d.h.rotate(&q)).unwrap();
        let lhs = gauss_curvature(&rotated);
        let rhs = rotate_tensor(&gauss_curvature(&d), &q).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * (1.0 + rhs.frobenius_norm()));
        let (_, h2a) = mean_curvature(&d.h);
        let (_, h2b) = mean_curvature(&rotated.h);
        prop_assert!((h2a - h2b).abs() < 1e-10 * (1.0 + h2a));
    }

    #[test]
    fn cubic_form_is_totally_symmetric(n in 1usize..=6, seed in any::<u64>()) {
        let h = random_cubic::<f64, _>(n, &mut rng_for(seed, 0));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = h.get(a, b, c);
                    prop_assert_eq!(v, h.get(b, a, c));
                    prop_assert_eq!(v, h.get(c, b, a));
                    prop_assert_eq!(v, h.get(a, c, b));
                }
            }
        }
    }

    #[test]
    fn point_data_json_round_trips(n in 2usize..=5, c in c_strategy(), seed in any::<u64>()) {
        let d = point(n, c, seed);
        let back = LagrangianPointData::<f64>::from_json(&d.to_json()).unwrap();
        prop_assert_eq!(back.n, d.n);
        prop_assert_eq!(back.c, d.c);
        prop_assert_eq!(back.h, d.h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_is_rotation_invariant(n in 3usize..=5, c in c_strategy(), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let d = point(n, c, seed);
        let tuples = enumerate_tuples(n).unwrap();
        let t = pick.get(&tuples);
        let q = haar_orthogonal::<f64, _>(n, &mut rng_for(seed, 2));
        let r = gauss_curvature(&d);
        let a = delta_invariant(&r, t, &quick()).unwrap().value;
        let b = delta_invariant(&rotate_tensor(&r, &q).unwrap(), t, &quick()).unwrap().value;
        prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} vs {b} for {t}");
    }

    #[test]
    fn delta_bounds(n in 3usize..=5, c in c_strategy(), seed in any::<u64>()) {
        // one plane for (2), and |K| never exceeds the Frobenius norm
        let d = point(n, c, seed);
        let r = gauss_curvature(&d);
        let t = DeltaTuple::new(n, vec![2]).unwrap();
        let res = delta_invariant(&r, &t, &quick()).unwrap();
        prop_assert!((res.value - (res.tau - res.inf)).abs() < 1e-12 * (1.0 + res.tau.abs()));
        let bound = 4.0 * r.frobenius_norm();
        prop_assert!(res.inf.abs() <= bound, "inf {} vs {bound}", res.inf);
    }

    #[test]
    fn inequalities_are_sound(n in 3usize..=5, c in c_strategy(), seed in any::<u64>()) {
        let d = point(n, c, seed);
        let opts = EvalOptions { delta: quick(), ..Default::default() };
        for (v, t) in admissible_pairs(n, &Variant::AUDITED).unwrap() {
            let rep = evaluate(&d, v, &t, &opts).unwrap();
            prop_assert!(rep.holds(1e-9), "{v} {t}: slack {}", rep.slack);
        }
    }

    #[test]
    fn old_is_weakest_improved_bound(n in 4usize..=6, seed in any::<u64>()) {
        let d = point(n, 0.0, seed);
        let opts = EvalOptions { delta: quick(), ..Default::default() };
        let t = DeltaTuple::new(n, vec![2]).unwrap();
        let old = evaluate(&d, Variant::Old, &t, &opts).unwrap();
        let imp = evaluate(&d, Variant::Improved, &t, &opts).unwrap();
        prop_assert!(old.rhs >= imp.rhs);
    }
}

fn random_potential(n: usize, seed: u64) -> CubicPotential {
    let g = random_cubic::<f64, _>(n, &mut rng_for(seed, 7));
    let mut p = CubicPotential::new(n);
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                p.add(g.get(a, b, c) * 0.3, a, b, c);
            }
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn graphs_are_lagrangian_and_gauss_consistent(n in 2usize..=4, seed in any::<u64>(), x in prop::collection::vec(-0.4..0.4f64, 4)) {
        let chart = graph_immersion(random_potential(n, seed));
        let x = &x[..n];
        prop_assert!(omega_pullback(&chart, x).unwrap() < 1e-8);
        let e = induced_data_flat(&chart, x).unwrap();
        let fd = intrinsic_curvature_fd(&chart, x, &e.frame, 1e-3).unwrap();
        let r = gauss_curvature(&e.data);
        prop_assert!(fd.max_abs_diff(&r) < 1e-4 * (1.0 + r.frobenius_norm()), "{}", fd.max_abs_diff(&r));
    }

    #[test]
    fn graph_extraction_at_origin_matches_third_derivatives(n in 2usize..=5, seed in any::<u64>()) {
        let p = random_potential(n, seed);
        let oracle = p.third_derivatives();
        let e = induced_data_flat(&graph_immersion(p), &vec![0.0; n]).unwrap();
        prop_assert!(e.data.h.max_abs_diff(&oracle) < 1e-6);
    }

    #[test]
    fn step_halving_stays_within_truncation_estimate(t in 0.3..0.7f64, u in prop::collection::vec(-3.0..3.0f64, 2)) {
        // central differences carry an O(h²) error; with derivatives of the
        // chart bounded by a few units the estimate is h² (1 + max |h_ABC|)
        let (_, hi) = theorem92_interval(3, 1.0);
        let x = [t * hi, u[0], u[1]];
        let h = 2e-3;
        let chart = |s: f64| {
            theorem92_chart(3, 1.0, Arc::new(clifford_legendrian(3).unwrap())).unwrap().with_steps(vec![s; 3]).unwrap()
        };
        let a = induced_data_flat(&chart(h), &x).unwrap();
        let b = induced_data_flat(&chart(h / 2.0), &x).unwrap();
        let scale = a.data.h.entries().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        let estimate = h * h * (1.0 + scale);
        let change = a.data.h.max_abs_diff(&b.data.h);
        prop_assert!(change < 10.0 * estimate, "change {change:e}, estimate {estimate:e}");
    }
}
