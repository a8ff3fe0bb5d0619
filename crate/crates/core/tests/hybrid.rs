mod common;

use common::{circle, eq, unsat_oracle};
use gadgetforge::hybrid::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn e3(eqs: &[([&str; 3], u8)]) -> MaxE3LinInstance {
    MaxE3LinInstance {
        equations: eqs
            .iter()
            .map(|(v, rhs)| E3Equation {
                vars: v.map(String::from),
                rhs: *rhs,
            })
            .collect(),
    }
}

#[test]
fn contact_iff_multiple_of_seven() {
    for p in 1..=42 {
        assert_eq!(var_kind(p) == VarKind::Contact, p % 7 == 0);
    }
}

#[test]
fn expand_three_occurrences_gives_21_variables() {
    let h = expand(&e3(&[(["a", "b", "c"], 0), (["a", "d", "e"], 1), (["a", "f", "g"], 0)])).unwrap();
    let c = &h.circles()[0];
    assert_eq!(c.length, 21);
    assert_eq!(c.contacts().count(), 3);
    assert_eq!(c.matching.len(), 9);
}

#[test]
fn expand_two_equations_by_hand() {
    let h = expand(&e3(&[(["a", "b", "c"], 0), (["a", "b", "d"], 1)])).unwrap();
    let lengths: Vec<usize> = h.circles().iter().map(|c| c.length).collect();
    assert_eq!(lengths, vec![14, 14, 7, 7]);
    assert_eq!(h.m3(), 2);
    assert_eq!(h.var_count(), 42);
    // cycle + border = length, matching = 3t per circle
    assert_eq!(h.m2(), 42 + 3 * 6);
    assert_eq!(h.shape(), Shape::Theorem);
    // a's second occurrence lands on its second contact
    assert_eq!(h.three_eqs()[1].vars[0], VarRef::new(0, 14));
}

#[test]
fn expand_theorem_scale_counts() {
    // Every variable in exactly 6 equations: 42ν variables, 60ν two-variable
    // and 2ν three-variable equations, here with ν = 3 (9 variables, 18
    // occurrences each... scaled down by using 3 occurrences per variable and
    // reading off the per-variable ratios).
    let mut eqs = Vec::new();
    let names = ["a", "b", "c", "d", "e", "f"];
    for k in 0..12 {
        eqs.push(([names[k % 6], names[(k + 1) % 6], names[(k + 3) % 6]], (k % 2) as u8));
    }
    let h = expand(&e3(&eqs)).unwrap();
    // Each variable occurs 6 times: t = 6, so 42 copies and 7·6 + 3·6 = 60
    // two-variable equations per variable.
    let nu = 6;
    assert!(h.circles().iter().all(|c| c.length == 42));
    assert_eq!(h.var_count(), 42 * nu);
    assert_eq!(h.m2(), 60 * nu);
    assert_eq!(h.m3(), 2 * nu);
}

#[test]
fn expand_rejects_repeated_variable() {
    assert!(matches!(
        expand(&e3(&[(["a", "a", "b"], 0)])),
        Err(HybridError::RepeatedVariable(0))
    ));
}

#[test]
fn unsat_all_zero_xor0_instance_is_zero() {
    let h = HybridInstance::new(vec![circle(7, &[(1, 4), (2, 5), (3, 6)])], vec![]).unwrap();
    assert_eq!(h.unsat_count(&Assignment::zeros(&h)).unwrap(), 0);
}

#[test]
fn unsat_all_zero_rhs_one_is_one() {
    let h = HybridInstance::new(
        vec![circle(7, &[]), circle(7, &[]), circle(7, &[])],
        vec![eq([(0, 7), (1, 7), (2, 7)], [false; 3], 1)],
    )
    .unwrap();
    assert_eq!(h.unsat_count(&Assignment::zeros(&h)).unwrap(), 1);
}

#[test]
fn unsat_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for h in common::mini_corpus() {
        for _ in 0..20 {
            let phi = Assignment::random(&h, &mut rng);
            assert_eq!(h.unsat_count(&phi).unwrap(), unsat_oracle(&h, &phi));
        }
    }
}

#[test]
fn unsat_rejects_partial_assignment() {
    let h = HybridInstance::new(vec![circle(3, &[])], vec![]).unwrap();
    let phi = Assignment {
        values: vec![vec![false, true]],
    };
    assert_eq!(h.unsat_count(&phi), Err(HybridError::PartialAssignment));
}

#[test]
fn bruteforce_cycle_only_is_zero() {
    let h = HybridInstance::new(vec![circle(9, &[])], vec![]).unwrap();
    assert_eq!(h.max_sat_bruteforce().unwrap().1, 0);
}

#[test]
fn bruteforce_single_three_eq_is_zero() {
    let h = HybridInstance::new(
        vec![circle(7, &[]), circle(7, &[]), circle(7, &[])],
        vec![eq([(0, 7), (1, 7), (2, 7)], [false; 3], 1)],
    )
    .unwrap();
    let (phi, u) = h.max_sat_bruteforce().unwrap();
    assert_eq!(u, 0);
    assert_eq!(h.unsat_count(&phi).unwrap(), 0);
}

#[test]
fn bruteforce_contradictory_pair_is_one() {
    // Both equations read the same three circles, whose cycle equations
    // tie each contact to the other: x⊕y⊕z = 0 and = 1 cannot both hold.
    let h = HybridInstance::new(
        vec![circle(14, &[]), circle(14, &[]), circle(14, &[])],
        vec![
            eq([(0, 7), (1, 7), (2, 7)], [false; 3], 0),
            eq([(0, 14), (1, 14), (2, 14)], [false; 3], 1),
        ],
    )
    .unwrap();
    let (phi, u) = h.max_sat_bruteforce().unwrap();
    assert_eq!(u, 1);
    assert_eq!(unsat_oracle(&h, &phi), 1);
}

#[test]
fn bruteforce_matches_full_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for h in common::mini_corpus().into_iter().filter(|h| h.var_count() <= 16) {
        let full = (0..1u64 << h.var_count())
            .map(|k| unsat_oracle(&h, &Assignment::from_index(&h, k)))
            .min()
            .unwrap();
        let (phi, u) = h.max_sat_bruteforce().unwrap();
        assert_eq!(u, full);
        assert_eq!(unsat_oracle(&h, &phi), u);
        let sample = Assignment::random(&h, &mut rng);
        assert!(u <= h.unsat_count(&sample).unwrap());
    }
}

#[test]
fn bruteforce_reports_budget() {
    let h = HybridInstance::new(vec![circle(30, &[])], vec![]).unwrap();
    assert!(matches!(h.max_sat_bruteforce(), Err(HybridError::TooLarge(30, 24))));
}

#[test]
fn generate_single_seven_circle() {
    let spec = MiniSpec {
        circle_lengths: vec![7],
        matching: MatchingMode::Deterministic,
        three_eqs: ThreeEqWiring::Random(0),
    };
    let h = generate_mini(&spec, 1).unwrap();
    assert_eq!(h.var_count(), 7);
    let cb = h
        .equations()
        .iter()
        .filter(|e| matches!(e, Equation::Cycle(..) | Equation::Border(..)))
        .count();
    assert_eq!(cb, 7);
    assert_eq!(h.circles()[0].matching.len(), 3);
}

#[test]
fn generate_is_deterministic() {
    let spec = MiniSpec {
        circle_lengths: vec![7, 14, 7],
        matching: MatchingMode::Random,
        three_eqs: ThreeEqWiring::Random(1),
    };
    assert_eq!(generate_mini(&spec, 42).unwrap(), generate_mini(&spec, 42).unwrap());
}

#[test]
fn generate_three_sevens_with_one_equation_is_theorem_shaped() {
    let spec = MiniSpec {
        circle_lengths: vec![7, 7, 7],
        matching: MatchingMode::Deterministic,
        three_eqs: ThreeEqWiring::Random(1),
    };
    assert_eq!(generate_mini(&spec, 0).unwrap().shape(), Shape::Theorem);
    let relaxed = MiniSpec {
        circle_lengths: vec![3],
        matching: MatchingMode::None,
        three_eqs: ThreeEqWiring::Random(0),
    };
    assert_eq!(generate_mini(&relaxed, 0).unwrap().shape(), Shape::Relaxed);
}

#[test]
fn generate_rejects_odd_checkers() {
    let spec = MiniSpec {
        circle_lengths: vec![4],
        matching: MatchingMode::Deterministic,
        three_eqs: ThreeEqWiring::Random(0),
    };
    assert!(matches!(generate_mini(&spec, 0), Err(HybridError::OddCheckers(0, 3))));
}

#[test]
fn validation_rejects_bad_inputs() {
    assert!(matches!(HybridInstance::new(vec![circle(0, &[])], vec![]), Err(HybridError::EmptyCircle(0))));
    assert!(HybridInstance::new(vec![circle(7, &[(1, 7)])], vec![]).is_err());
    assert!(HybridInstance::new(vec![circle(7, &[(1, 2), (2, 3)])], vec![]).is_err());
    let three = vec![circle(7, &[]), circle(7, &[]), circle(7, &[])];
    // contacts only
    assert!(HybridInstance::new(three.clone(), vec![eq([(0, 3), (1, 7), (2, 7)], [false; 3], 0)]).is_err());
    // each contact at most once
    assert!(HybridInstance::new(
        three,
        vec![
            eq([(0, 7), (1, 7), (2, 7)], [false; 3], 0),
            eq([(0, 7), (1, 7), (2, 7)], [false; 3], 1)
        ]
    )
    .is_err());
}

#[test]
fn json_round_trip_and_key_order() {
    let h = generate_mini(
        &MiniSpec {
            circle_lengths: vec![7, 7, 7],
            matching: MatchingMode::Deterministic,
            three_eqs: ThreeEqWiring::Random(1),
        },
        5,
    )
    .unwrap();
    let s = serde_json::to_string(&h).unwrap();
    assert!(s.starts_with("{\"circles\":[{\"length\":7,\"matching\":"));
    let back: HybridInstance = serde_json::from_str(&s).unwrap();
    assert_eq!(back, h);
    let bad = r#"{"circles":[{"length":7,"matching":[[1,7]]}],"three_eqs":[]}"#;
    assert!(serde_json::from_str::<HybridInstance>(bad).is_err());
}
