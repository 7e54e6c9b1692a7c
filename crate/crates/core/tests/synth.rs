mod common;

use cascade_synth::prob::JointDistribution;
use cascade_synth::regions::{rate_triple, scatter_coupling, task_coupling};
use cascade_synth::synth::{
    cascade_experiment, eavesdropper_independence_test, induced_distribution_exact, physical_markov_deviations,
    relay_scheme_experiment, sample_cascade, sample_codebook, secrecy_tv, softcover_experiment,
    superposition_softcover_experiment, synthesis_tv, x_marginal_deviation, CascadeSystem, RelayRates, Sweep,
};
use cascade_synth::{AuxiliaryCoupling, RatePoint, Variable};

const GUARD: u128 = 100_000_000;

fn binary(names: &[&str], f: impl Fn(&[usize]) -> f64) -> JointDistribution {
    JointDistribution::from_fn(names.iter().map(|n| Variable::new(*n, 2)).collect(), f).unwrap()
}

fn copy_coupling() -> AuxiliaryCoupling {
    let joint = binary(&["X", "Y", "Z", "U", "V"], |t| {
        if t.iter().all(|&s| s == t[0]) { 0.5 } else { 0.0 }
    });
    AuxiliaryCoupling::three_node(joint).unwrap()
}

#[test]
fn independent_softcover_is_exact() {
    let q = binary(&["U", "X"], |t| [0.3, 0.7][t[0]] * [0.6, 0.4][t[1]]);
    let r = softcover_experiment(&q, 0.5, &Sweep::new(vec![1, 3, 5], 3, 0, GUARD)).unwrap();
    assert!(r.records.iter().all(|t| t.tv < 1e-12));
    assert_eq!(r.rate_floors, vec![0.0]);
}

#[test]
fn softcover_improves_above_the_floor() {
    let q = binary(&["U", "X"], |t| if t[0] == t[1] { 0.5 } else { 0.0 });
    let r = softcover_experiment(&q, 2.0, &Sweep::new(vec![2, 4, 6], 10, 0, GUARD)).unwrap();
    let m = r.means();
    assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
}

#[test]
fn superposition_base_layer_is_a_bottleneck() {
    let q = binary(&["X", "U", "V"], |t| if t[0] == t[1] && t[1] == t[2] { 0.5 } else { 0.0 });
    let sweep = Sweep::new(vec![6], 10, 0, GUARD);
    let starved = superposition_softcover_experiment(&q, (2.0, 0.25), &sweep).unwrap();
    let fed = superposition_softcover_experiment(&q, (0.25, 2.0), &sweep).unwrap();
    assert!(starved.means()[0] > 0.5, "{:?}", starved.means());
    assert!(fed.means()[0] < starved.means()[0]);
    assert_eq!(starved.rate_floors, vec![1.0, 1.0]);
}

#[test]
fn trivial_relay_is_exact() {
    let joint = JointDistribution::from_fn(
        vec![Variable::new("X", 2), Variable::new("Z", 3), Variable::new("U", 1)],
        |t| [0.4, 0.6][t[0]] * [0.2, 0.3, 0.5][t[1]],
    )
    .unwrap();
    let aux = AuxiliaryCoupling::relay(joint).unwrap();
    let rates = RelayRates { r1: 0.5, r2: 0.5, r01: None, r02: None };
    let r = relay_scheme_experiment(&aux, rates, &Sweep::new(vec![1, 2, 3], 2, 0, GUARD)).unwrap();
    assert!(r.records.iter().all(|t| t.tv < 1e-12));
}

#[test]
fn relay_scatter_converges_above_the_floor() {
    let aux = scatter_coupling(2, 1).unwrap();
    let rates = RelayRates { r1: 1.5, r2: 1.5, r01: None, r02: None };
    let r = relay_scheme_experiment(&aux, rates, &Sweep::new(vec![2, 4, 6], 10, 0, GUARD)).unwrap();
    let m = r.means();
    assert!(m[0] > m[2], "{m:?}");
}

#[test]
fn messages_leak_without_common_randomness() {
    let aux = copy_coupling();
    let cb = sample_codebook(&aux, 2, &RatePoint::triple(0.0, 1.5, 1.5), 1, GUARD).unwrap();
    let system = CascadeSystem::new(aux.clone(), cb).unwrap();
    let induced = induced_distribution_exact(&system, GUARD).unwrap();
    assert!(secrecy_tv(&induced, aux.target()).unwrap() >= 0.4);
}

#[test]
fn secrecy_dominates_synthesis_and_synthesis_survives_relabeling() {
    let mut rng = common::rng(21);
    for seed in 0..5 {
        let aux = AuxiliaryCoupling::three_node(common::random_d_coupling(&mut rng, 2, 2)).unwrap();
        let r = rate_triple(&aux).unwrap().shifted(0.5);
        let cb = sample_codebook(&aux, 2, &r, seed, GUARD).unwrap();
        let a = CascadeSystem::new(aux.clone(), cb.clone()).unwrap();
        let b = CascadeSystem::new(aux.clone(), cb.relabeled(seed + 100)).unwrap();
        let ia = induced_distribution_exact(&a, GUARD).unwrap();
        let ib = induced_distribution_exact(&b, GUARD).unwrap();
        let sa = synthesis_tv(&ia, aux.target()).unwrap();
        assert!(sa <= secrecy_tv(&ia, aux.target()).unwrap() + 1e-12);
        assert!((sa - synthesis_tv(&ib, aux.target()).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn physical_structure_is_exact() {
    let aux = task_coupling(3, 2, 1).unwrap();
    let q_x = aux.joint().marginal(&["X"]).unwrap();
    for n in [1, 2] {
        let r = rate_triple(&aux).unwrap().shifted(0.25);
        let cb = sample_codebook(&aux, n, &r, 7, GUARD).unwrap();
        let system = CascadeSystem::new(aux.clone(), cb).unwrap();
        let induced = induced_distribution_exact(&system, GUARD).unwrap();
        let (a, b) = physical_markov_deviations(&induced).unwrap();
        assert!(a <= 1e-9 && b <= 1e-9, "n={n}: {a} {b}");
        assert!(x_marginal_deviation(&induced, &q_x).unwrap() <= 1e-12);
    }
}

#[test]
fn codebooks_are_reproducible() {
    let aux = task_coupling(4, 3, 1).unwrap();
    let r = rate_triple(&aux).unwrap().shifted(0.3);
    let a = sample_codebook(&aux, 3, &r, 9, GUARD).unwrap();
    let b = sample_codebook(&aux, 3, &r, 9, GUARD).unwrap();
    let c = sample_codebook(&aux, 3, &r, 10, GUARD).unwrap();
    assert_eq!(a.layer_words(0), b.layer_words(0));
    assert_eq!(a.layer_words(1), b.layer_words(1));
    assert_ne!(a.layer_words(0), c.layer_words(0));
}

#[test]
fn sweeps_are_deterministic() {
    let aux = task_coupling(3, 2, 1).unwrap();
    let r = rate_triple(&aux).unwrap().shifted(0.5);
    let sweep = Sweep::new(vec![1, 2], 3, 4, GUARD);
    let a = cascade_experiment(&aux, &r, &sweep).unwrap();
    let b = cascade_experiment(&aux, &r, &sweep).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn guard_stops_large_enumerations() {
    let aux = task_coupling(3, 2, 1).unwrap();
    let r = rate_triple(&aux).unwrap().shifted(0.5);
    let cb = sample_codebook(&aux, 2, &r, 0, GUARD).unwrap();
    let system = CascadeSystem::new(aux, cb).unwrap();
    let err = induced_distribution_exact(&system, 1000).unwrap_err();
    assert!(err.is_capacity());
}

#[test]
fn common_randomness_weakens_the_eavesdropper() {
    let aux = copy_coupling();
    let leaky = sample_codebook(&aux, 2, &RatePoint::triple(0.0, 1.0, 1.0), 3, GUARD).unwrap();
    let samples = sample_cascade(&CascadeSystem::new(aux.clone(), leaky).unwrap(), 2000, 1).unwrap();
    let leak = eavesdropper_independence_test(&samples, 0.01).unwrap();
    assert!(leak.reject && !leak.inconclusive);
    let keyed = sample_codebook(&aux, 2, &RatePoint::triple(3.0, 1.0, 1.0), 3, GUARD).unwrap();
    let samples = sample_cascade(&CascadeSystem::new(aux, keyed).unwrap(), 2000, 1).unwrap();
    let t = eavesdropper_independence_test(&samples, 0.01).unwrap();
    assert!((0.0..=1.0).contains(&t.p_value));
    assert!((t.statistic / t.degrees_of_freedom as f64) < leak.statistic / leak.degrees_of_freedom as f64, "{t:?} {leak:?}");
}
