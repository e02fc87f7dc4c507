//! Property tests over seeded families.

mod common;

use fusion_gram::corpus::{generate, operator_from_spec, parse, serialize, to_canonical_json, Document, InstanceSpec};
use fusion_gram::frames::WeightedFamily;
use fusion_gram::gram::{
    adjoint_relation_residual, closed_range_check, cross_gram, cross_gram_by_blocks, dual_riesz_check,
    lw_lower_bound_check, ort_equivalences, phi_block, schatten_norm, GramTriple,
};
use fusion_gram::linalg::{self, TolerancePolicy};
use fusion_gram::stability::{neumann_inverse, perturbation_epsilon};
use proptest::prelude::*;

use common::*;

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn dims_for(n: usize, parts: usize, salt: u64) -> Vec<usize> {
    let mut d = vec![1usize; parts];
    let mut x = salt;
    for _ in parts..n {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        d[(x >> 33) as usize % parts] += 1;
    }
    d
}

fn list(d: &[usize]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

prop_compose! {
    fn riesz_spec()(seed in 0u64..1_000_000, n in 2usize..7, parts in 1usize..4) -> String {
        let parts = parts.min(n);
        format!("riesz:seed={seed},n={n},dims={},weights=uniform:0.5:2", list(&dims_for(n, parts, seed)))
    }
}

prop_compose! {
    fn frame_spec(kind: &'static str)(seed in 0u64..1_000_000, n in 3usize..6, k in 2usize..5) -> String {
        // k proper subspaces, total above n
        let mut d: Vec<usize> = (0..k).map(|i| 1 + (seed as usize + 3 * i) % (n - 1)).collect();
        let mut i = 0;
        while d.iter().sum::<usize>() <= n {
            d[i % k] = (d[i % k] + 1).min(n - 1);
            i += 1;
        }
        format!("{kind}:seed={seed},n={n},dims={},weights=uniform:0.5:2", list(&d))
    }
}

fn any_family() -> impl Strategy<Value = WeightedFamily> {
    prop_oneof![
        riesz_spec().prop_map(|s| family(&s)),
        frame_spec("frame").prop_map(|s| family(&s)),
        (0u64..10_000, 2usize..6).prop_map(|(seed, n)| {
            family(&format!("fusion_onb:seed={seed},n={n},dims={}", list(&dims_for(n, 2.min(n), seed))))
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gram_assembly_paths_agree(spec in frame_spec("dual_pair"), useed in 0u64..1000) {
        let t = tol();
        let (w, v) = pair(&spec);
        let u = operator_from_spec(&format!("random:seed={useed}"), w.ambient_dim()).unwrap();
        let triple = GramTriple::new(u.clone(), w.clone(), v.clone(), &t).unwrap();
        let product = cross_gram(&triple, &t).unwrap().into_matrix();
        let blocks = cross_gram_by_blocks(&triple, &t).unwrap();
        let scale = product.norm().max(1e-300);
        prop_assert!((&product - &blocks).norm() <= 1e-12 * scale);
        prop_assert!((&product - gram(&u, &w, &v)).norm() <= 1e-10 * scale);
    }

    #[test]
    fn hierarchy_holds(w in any_family()) {
        prop_assert!(w.classify(&tol()).hierarchy_consistent());
    }

    #[test]
    fn riesz_equivalences_agree(w in any_family()) {
        let eq = w.riesz_equivalences(&tol());
        prop_assert!(eq.agree(), "{:?}", eq.disagreements());
    }

    #[test]
    fn ort_equivalences_agree(spec in riesz_spec()) {
        let r = ort_equivalences(&family(&spec), &tol()).unwrap();
        prop_assert!(r.agree(), "{r:?}");
    }

    #[test]
    fn fusion_onb_is_orthonormal(seed in 0u64..10_000, n in 2usize..7, parts in 1usize..4) {
        let d = dims_for(n, parts.min(n), seed);
        let w = family(&format!("fusion_onb:seed={seed},n={n},dims={}", list(&d)));
        let r = ort_equivalences(&w, &tol()).unwrap();
        prop_assert!(r.agree() && r.orthonormal_subspaces && r.gram_defect <= 1e-9);
    }

    #[test]
    fn dual_riesz_agree(spec in prop_oneof![
        riesz_spec().prop_map(|s| s.replacen("riesz", "dual_pair", 1)),
        frame_spec("dual_pair"),
    ]) {
        let t = tol();
        let (w, v) = pair(&spec);
        let r = dual_riesz_check(&v, &w, &t).unwrap();
        prop_assert!(r.agree(), "{r:?}");
    }

    #[test]
    fn adjoint_relation(a in frame_spec("frame"), useed in 0u64..1000) {
        let t = tol();
        let w = family(&a);
        let dims: Vec<usize> = w.subspaces().iter().map(|s| s.dim()).collect();
        let v = family(&format!("frame:seed={useed},n={},dims={},weights=uniform:0.5:2", w.ambient_dim(), list(&dims)));
        let u = operator_from_spec(&format!("random:seed={useed}"), w.ambient_dim()).unwrap();
        prop_assert!(adjoint_relation_residual(&u, &w, &v, &t).unwrap() <= 1e-10);
    }

    #[test]
    fn phi_norm_bound(spec in frame_spec("dual_pair")) {
        let t = tol();
        let (w, v) = pair(&spec);
        let phi_norm = linalg::operator_norm(phi_block(&v, &w, &t).unwrap().matrix());
        prop_assert!(phi_norm <= linalg::operator_norm(&inverse(&frame_operator(&w))) + 1e-12);
        prop_assert!((phi_block(&v, &w, &t).unwrap().matrix() - phi(&v, &w)).norm() <= 1e-10 * phi_norm.max(1.0));
    }

    #[test]
    fn alternate_operator_lower_bound(w in any_family()) {
        let r = lw_lower_bound_check(&w, &tol()).unwrap();
        prop_assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn closed_range(spec in frame_spec("dual_pair"), useed in 0u64..1000) {
        let t = tol();
        let (w, v) = pair(&spec);
        let u = operator_from_spec(&format!("random_invertible:seed={useed}"), w.ambient_dim()).unwrap();
        let r = closed_range_check(&u, &v, &w, &t).unwrap();
        prop_assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn epsilon_is_symmetric(seed in 0u64..100_000, n in 2usize..6, theta in 0.0f64..1.5) {
        let d = dims_for(n, 2.min(n), seed);
        let (v, z) = pair(&format!("perturbation:seed={seed},n={n},dims={},{},theta={theta}", list(&d), n));
        prop_assert_eq!(perturbation_epsilon(&v, &z).unwrap(), perturbation_epsilon(&z, &v).unwrap());
    }

    #[test]
    fn epsilon_monotone_in_theta(seed in 0u64..100_000, n in 2usize..6, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let d = list(&dims_for(n, 2.min(n), seed));
        let quarter = std::f64::consts::FRAC_PI_4;
        let (lo, hi) = if a <= b { (a * quarter, b * quarter) } else { (b * quarter, a * quarter) };
        let eps = |theta: f64| {
            let (v, z) = pair(&format!("perturbation:seed={seed},n={n},dims={d},theta={theta}"));
            perturbation_epsilon(&v, &z).unwrap()
        };
        prop_assert!(eps(lo) <= eps(hi) + 1e-12);
    }

    #[test]
    fn neumann_matches_direct_inverse(seed in 0u64..100_000, n in 2usize..7, target in 0.05f64..0.9) {
        let t = tol();
        let f = operator_from_spec(&format!("random_invertible:seed={seed}"), n).unwrap();
        let e = operator_from_spec(&format!("random:seed={}", seed + 1), n).unwrap();
        let e = e.scale(target / (op_norm(&inverse(&f)) * op_norm(&e)));
        let g = &f - &e;
        let stop = 1e-13;
        let r = neumann_inverse(&f, &g, 1_000_000, stop, &t).unwrap();
        let direct = linalg::inverse_checked(&g, &t).unwrap().into_result().unwrap();
        prop_assert!(r.converged);
        // the tail after the last term is at most term / (1 - factor)
        prop_assert!(op_norm(&(&r.inverse - &direct)) <= 10.0 * stop / (1.0 - r.factor) + 1e-12 * op_norm(&direct));
    }

    #[test]
    fn generate_is_deterministic(spec in prop_oneof![riesz_spec(), frame_spec("frame"), frame_spec("dual_pair")]) {
        let s: InstanceSpec = spec.parse().unwrap();
        let (a, b) = (generate(&s).unwrap(), generate(&s).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn documents_round_trip(spec in frame_spec("dual_pair")) {
        let (w, v) = pair(&spec);
        let doc = Document::Pair(w, v);
        let text = serialize(&doc);
        let back = parse(&text, &tol()).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn canonical_json_round_trips_doubles(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = to_canonical_json(&[x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }

    #[test]
    fn schatten_dominates_operator_norm(seed in 0u64..10_000, n in 1usize..7, p in 1.0f64..50.0) {
        let m = operator_from_spec(&format!("random:seed={seed}"), n).unwrap();
        let s = singular_values(&m);
        let oracle = s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p);
        let v = schatten_norm(&m, p).unwrap().value;
        prop_assert!(v >= linalg::operator_norm(&m) * (1.0 - 1e-12));
        prop_assert!((v - oracle).abs() <= 1e-10 * oracle);
    }
}
