use cascade_synth::format::sig;
use cascade_synth::prob::{
    conditional_mutual_information, entropy, mutual_information, total_variation, JointDistribution,
};
use cascade_synth::regions::{task_corner, task_region};
use cascade_synth::synth::index_count;
use cascade_synth::Variable;
use proptest::prelude::*;

fn xyz(w: &[f64]) -> JointDistribution {
    let s: f64 = w.iter().sum();
    let vars = vec![Variable::new("X", 2), Variable::new("Y", 2), Variable::new("Z", 2)];
    JointDistribution::new(vars, w.iter().map(|x| x / s).collect()).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 8).prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tv_is_a_metric(a in weights(), b in weights(), c in weights()) {
        let (p, q, r) = (xyz(&a), xyz(&b), xyz(&c));
        let pq = total_variation(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!(total_variation(&p, &p).unwrap() < 1e-15);
        prop_assert!((pq - total_variation(&q, &p).unwrap()).abs() < 1e-15);
        let pr = total_variation(&p, &r).unwrap();
        let rq = total_variation(&r, &q).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn marginalizing_never_increases_tv(a in weights(), b in weights()) {
        let (p, q) = (xyz(&a), xyz(&b));
        let full = total_variation(&p, &q).unwrap();
        for names in [&["X", "Y"][..], &["Z"][..], &["X", "Z"][..]] {
            let m = total_variation(&p.marginal(names).unwrap(), &q.marginal(names).unwrap()).unwrap();
            prop_assert!(m <= full + 1e-12);
        }
    }

    #[test]
    fn common_independent_component_leaves_tv_unchanged(a in weights(), b in weights(), r in 0.01f64..0.99) {
        let p = xyz(&a).marginal(&["X", "Y"]).unwrap();
        let q = xyz(&b).marginal(&["X", "Y"]).unwrap();
        let w = JointDistribution::new(vec![Variable::new("W", 2)], vec![r, 1.0 - r]).unwrap();
        let lhs = total_variation(&p.product(&w).unwrap(), &q.product(&w).unwrap()).unwrap();
        prop_assert!((lhs - total_variation(&p, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_chain_rule(a in weights()) {
        let p = xyz(&a);
        let lhs = mutual_information(&p, &["X"], &["Y", "Z"]).unwrap();
        let rhs = mutual_information(&p, &["X"], &["Y"]).unwrap()
            + conditional_mutual_information(&p, &["X"], &["Y"], &["Z"]).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
        let h = entropy(&p, &["X", "Y", "Z"]).unwrap();
        prop_assert!((-1e-12..=3.0 + 1e-12).contains(&h));
    }

    #[test]
    fn data_processing(px in 0.01f64..0.99, e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
        let vars = vec![Variable::new("X", 2), Variable::new("Y", 2), Variable::new("Z", 2)];
        let flip = |e: f64, a: usize, b: usize| if a == b { 1.0 - e } else { e };
        let p = JointDistribution::from_fn(vars, |t| {
            [px, 1.0 - px][t[0]] * flip(e1, t[0], t[1]) * flip(e2, t[1], t[2])
        }).unwrap();
        let xz = mutual_information(&p, &["X"], &["Z"]).unwrap();
        prop_assert!(xz <= mutual_information(&p, &["X"], &["Y"]).unwrap() + 1e-12);
        prop_assert!(xz <= mutual_information(&p, &["Y"], &["Z"]).unwrap() + 1e-12);
        prop_assert!(conditional_mutual_information(&p, &["X"], &["Y"], &["Z"]).unwrap() < 1e-9);
    }

    #[test]
    fn index_counts_are_monotone_and_exact_on_powers(n in 1usize..12, r in 0.0f64..4.0, k in 0u32..20) {
        let a = index_count(n, r).unwrap();
        let b = index_count(n, r + 0.1).unwrap();
        prop_assert!(a <= b);
        prop_assert!(a as f64 >= (n as f64 * r).exp2() - 1e-6);
        prop_assert_eq!(index_count(n, k as f64 / n as f64).unwrap(), 1u64 << k);
    }

    #[test]
    fn formatted_numbers_round_trip(x in prop_oneof![-1e20f64..1e20, -1e-3f64..1e-3]) {
        let s = sig(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }

    #[test]
    fn task_corners_are_ordered(m in 3usize..40, a0 in 0usize..1000, b0 in 0usize..1000) {
        let a = 2 + a0 % (m - 2);
        let b = 1 + b0 % (a - 1);
        let [r0, r1, r2] = task_corner(m, a, b).unwrap();
        prop_assert!(r0 >= r1 && r1 > r2 && r2 > 0.0);
        prop_assert!((r1 - r2 - (a as f64 / (a - b) as f64).log2()).abs() < 1e-12);
    }
}

#[test]
fn task_region_contains_every_corner() {
    let f = task_region(8).unwrap();
    for c in f.corners() {
        assert!(f.contains(&c.coords).unwrap());
    }
}
