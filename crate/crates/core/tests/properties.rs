//! Property tests for invariants that span modules.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use srw_core::circuit::{Circuit, Gate, Layer};
use srw_core::compiler::{compile, generate_rules_cached, CompileOptions, SwapSchedule};
use srw_core::estimator::{
    build_states, clipped_difference, hoeffding_half_width, hoeffding_samples, Decomposition,
};
use srw_core::rewriting::{
    brute_force_count, count_walks, delta, delta_scaled, encode, Alphabet, RewritingSystem, Rule, Symbol,
    Walker,
};
use srw_core::spectral::{corner_entry, MMode};
use srw_core::verifier::{verify, ReachableGraph, VerifyOptions};

/// A random system with |𝒜| ≤ 3, window ≤ 2, and a start string of
/// length ≤ 5.
fn arb_system() -> impl Strategy<Value = (RewritingSystem, usize)> {
    (2usize..=3, 1usize..=2)
        .prop_flat_map(|(size, k)| {
            let word = prop::collection::vec(0..size as Symbol, k);
            (
                Just(size),
                Just(k),
                prop::collection::vec((word.clone(), word), 1..=4),
                k..=5usize,
            )
        })
        .prop_map(|(size, k, pairs, len)| {
            let alphabet = Alphabet::new(["a", "b", "c"].into_iter().take(size)).unwrap();
            let rules = pairs.into_iter().filter_map(|(l, r)| Rule::new(l, r).ok());
            (RewritingSystem::new(alphabet, k, rules).unwrap(), len)
        })
}

fn arb_string(sys: &RewritingSystem, len: usize, seed: u64) -> Vec<Symbol> {
    let size = sys.alphabet().len() as u64;
    let mut x = seed;
    (0..len)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) % size) as Symbol
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_counts_are_symmetric((sys, len) in arb_system(), a: u64, b: u64, n in 0usize..=6) {
        let s = arb_string(&sys, len, a);
        let t = arb_string(&sys, len, b);
        prop_assert_eq!(count_walks(&sys, &s, &t, n).unwrap(), count_walks(&sys, &t, &s, n).unwrap());
    }

    #[test]
    fn walk_counts_match_enumeration((sys, len) in arb_system(), a: u64, b: u64, n in 0usize..=6) {
        let s = arb_string(&sys, len, a);
        let t = arb_string(&sys, len, b);
        prop_assert_eq!(
            count_walks(&sys, &s, &t, n).unwrap(),
            brute_force_count(&sys, &s, &t, n, 50_000_000).unwrap()
        );
    }

    #[test]
    fn chapman_kolmogorov((sys, len) in arb_system(), a: u64, b: u64, n in 0usize..=3, p in 0usize..=3) {
        let s = arb_string(&sys, len, a);
        let t = arb_string(&sys, len, b);
        let mut walker = Walker::new(&sys);
        let (_, v) = walker.walk_from(&s, n).unwrap();
        let mut sum = BigInt::zero();
        for (id, k) in v.iter() {
            let u = walker.interner().label(id).clone();
            sum += k * count_walks(&sys, &u, &t, p).unwrap();
        }
        prop_assert_eq!(sum, count_walks(&sys, &s, &t, n + p).unwrap());
    }

    #[test]
    fn counts_respect_degree_bound((sys, len) in arb_system(), a: u64, b: u64, n in 0usize..=6) {
        let s = arb_string(&sys, len, a);
        let t = arb_string(&sys, len, b);
        let g = ReachableGraph::build(&sys, &[&s], Some(n), 1_000_000).unwrap();
        let degree = g.vertices.iter().map(|v| sys.neighbors(v).unwrap().len()).max().unwrap_or(0);
        prop_assert!(count_walks(&sys, &s, &t, n).unwrap() <= BigInt::from(degree).pow(n as u32));
    }

    #[test]
    fn scaled_delta_matches_exact((sys, len) in arb_system(), a: u64, b: u64, e: u64, n in 0usize..=6, c in 0.5f64..4.0) {
        let s = arb_string(&sys, len, a);
        let t = arb_string(&sys, len, b);
        let tp = arb_string(&sys, len, e);
        let exact = delta(&sys, &s, &t, &tp, n).unwrap().to_f64().unwrap() / c.powi(n as i32);
        let scaled = delta_scaled(&sys, &s, &t, &tp, n, c).unwrap();
        prop_assert!((scaled - exact).abs() <= 1e-9 * exact.abs().max(1e-300), "{} vs {}", scaled, exact);
    }

    #[test]
    fn system_json_round_trips((sys, _) in arb_system()) {
        let text = serde_json::to_string(&sys).unwrap();
        let back: RewritingSystem = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        prop_assert_eq!(back.rule_count(), sys.rule_count());
    }

    #[test]
    fn moments_and_polarization((sys, len) in arb_system(), a: u64, b: u64, e: u64, k in 0usize..=8) {
        let s = arb_string(&sys, len, a);
        let t = arb_string(&sys, len, b);
        let tp = arb_string(&sys, len, e);
        prop_assume!(s != t && s != tp && t != tp);
        let g = ReachableGraph::build(&sys, &[&s, &t, &tp], None, 4000).unwrap();
        let dec = Decomposition::new(&g).unwrap();
        let states = build_states(&s, &t, &tp);
        for state in [&states.plus, &states.minus] {
            let m = dec.measure(&g, state).unwrap();
            prop_assert!(m.probabilities.iter().all(|&p| p >= 0.0));
            prop_assert!((m.total() - 1.0).abs() <= 1e-10);
        }
        let walks = count_walks(&sys, &s, &s, k).unwrap().to_f64().unwrap();
        let moment = dec.measure(&g, &states.s).unwrap().moment(k);
        prop_assert!((moment - walks).abs() <= 1e-9 * walks.max(1.0));
        // With c above the spectral radius clipping never acts.
        let c = dec.spectral_radius() + 1.0;
        let diff = dec.difference(&g, &states).unwrap();
        let value = clipped_difference(&dec, &diff, k, c);
        let exact = delta(&sys, &s, &t, &tp, k).unwrap().to_f64().unwrap() / c.powi(k as i32);
        prop_assert!((value - exact).abs() <= 1e-9 * exact.abs().max(1e-6), "{} vs {}", value, exact);
    }

    #[test]
    fn hoeffding_count_meets_half_width(eps in 1e-3f64..1.0, delta in 1e-6f64..0.5) {
        let n = hoeffding_samples(eps, delta).unwrap();
        prop_assert!(hoeffding_half_width(n, delta) <= eps / 2.0 * (1.0 + 1e-12));
        prop_assert!(n == 1 || hoeffding_half_width(n - 1, delta) > eps / 2.0 * (1.0 - 1e-12));
    }

    #[test]
    fn corner_parity_positivity_and_cross_check(ell in 2usize..=200, m in 0usize..=2000) {
        let e = corner_entry(ell, m).unwrap();
        if m % 2 == ell % 2 {
            prop_assert!(e.exact.is_zero());
        } else if m + 1 >= ell {
            prop_assert!(e.exact > BigInt::zero());
        }
        prop_assert!(e.agrees(1e-6), "deviation {}", e.deviation());
    }
}

fn rules() -> &'static RewritingSystem {
    static RULES: OnceLock<RewritingSystem> = OnceLock::new();
    RULES.get_or_init(|| (*generate_rules_cached(SwapSchedule::Aligned).unwrap().system).clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compiled_relation_is_symmetric_and_sparse(w in prop::array::uniform3(0u16..224)) {
        let sys = rules();
        let w: Vec<Symbol> = w.iter().map(|&x| x as Symbol).collect();
        let targets: Vec<u64> = sys.targets(3, encode(&w, 224)).iter().collect();
        prop_assert!(targets.len() <= 2);
        let code = encode(&w, 224);
        for t in targets {
            prop_assert_ne!(t, code);
            prop_assert!(sys.targets(3, t).iter().any(|back| back == code));
        }
    }
}

fn arb_circuit() -> impl Strategy<Value = (Circuit, Vec<bool>)> {
    let gate = |n: usize| {
        prop_oneof![
            (0..n).prop_map(Gate::h),
            (0..n.saturating_sub(1).max(1)).prop_map(Gate::swap),
            (0..n.saturating_sub(2).max(1)).prop_map(Gate::toffoli),
        ]
    };
    (1usize..=3)
        .prop_flat_map(move |n| {
            (
                Just(n),
                prop::collection::vec(gate(n), 1..=2),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_filter_map("gate does not fit", |(n, gates, x)| {
            if gates.iter().any(|g| g.last_qubit() >= n) {
                return None;
            }
            let layers = gates.into_iter().map(|g| Layer::new(vec![g])).collect();
            Some((Circuit::new(n, layers), x))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The reduction holds on arbitrary small circuits with the same σ.
    #[test]
    fn random_circuits_verify((circuit, x) in arb_circuit()) {
        let options = CompileOptions { m_mode: MMode::SignOnly, ..CompileOptions::default() };
        let comp = compile(&circuit, &x, options).unwrap();
        let report = verify(&comp.instance, &circuit, &x, &VerifyOptions::default()).unwrap();
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        prop_assert!(report.passed, "failed checks: {:?}", failed);
        prop_assert!(report.sigma.is_none() || report.sigma == Some(-1));
        // σ is only undetermined when every Δ(n) vanishes.
        prop_assert_eq!(report.sigma.is_none(), report.overlap == "0");
    }
}
