mod common;

use common::checks::{assignments, check_extraction, check_forward, check_sandwich, sample_tour};
use common::{build, circle, eq, mini_corpus, tiny_instances, vertex_count};
use gadgetforge::bounds::Ratio;
use gadgetforge::hybrid::{Assignment, HybridInstance};
use gadgetforge::metric::{check_triangle, validate_tour};
use gadgetforge::reduce::tsp::{build_tsp12, build_tsp14};
use gadgetforge::reduce::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNDIRECTED: [Regime; 2] = [Regime::Tsp12, Regime::Tsp14];

fn three_circles() -> HybridInstance {
    HybridInstance::new(
        vec![circle(7, &[(1, 4), (2, 5), (3, 6)]), circle(7, &[(1, 2), (3, 4), (5, 6)]), circle(7, &[(1, 6), (2, 3), (4, 5)])],
        vec![eq([(0, 7), (1, 7), (2, 7)], [false; 3], 1)],
    )
    .unwrap()
}

#[test]
fn border_is_a_three_vertex_path() {
    let h = three_circles();
    let a = build(&h, Regime::Atsp12);
    let u = build_tsp12(&h).unwrap();
    let borders = |i: &ReducedInstance| i.tags().iter().filter(|t| matches!(t, VertexTag::Border { .. })).count();
    assert_eq!(borders(&a), h.n());
    assert_eq!(borders(&u), 3 * h.n());
    for l in 0..h.n() {
        let v = |part| u.vertex(&VertexTag::Border { circle: l, part }).unwrap();
        assert_eq!(u.metric().d(v(1), v(2)), 1);
        assert_eq!(u.metric().d(v(2), v(3)), 1);
    }
}

#[test]
fn vertex_counts_match_construction_rules() {
    for h in mini_corpus().iter().step_by(5) {
        for r in UNDIRECTED {
            assert_eq!(build(h, r).size(), vertex_count(h, r));
        }
    }
}

#[test]
fn tsp12_is_symmetric_one_two() {
    let inst = build_tsp12(&three_circles()).unwrap();
    let m = inst.metric();
    assert!(m.symmetric());
    for u in 0..m.size() {
        for v in 0..m.size() {
            if u != v {
                assert!(m.d(u, v) == 1 || m.d(u, v) == 2);
                assert_eq!(m.d(u, v), m.d(v, u));
            }
        }
    }
}

#[test]
fn tsp14_closure_is_symmetric_metric() {
    let inst = build_tsp14(&three_circles()).unwrap();
    let m = inst.metric();
    check_triangle(m).unwrap();
    m.check_range().unwrap();
    let mut far = 0;
    for u in 0..m.size() {
        for v in 0..m.size() {
            if u != v {
                assert_eq!(m.d(u, v), m.d(v, u));
                far += (m.d(u, v) == 4) as usize;
            }
        }
    }
    assert!(far > 0);
    for a in inst.arcs() {
        let inside = inst.pg_of(a.from).is_some() && inst.pg_of(a.from) == inst.pg_of(a.to);
        assert_eq!(a.weight, if inside { 1 } else { 2 });
    }
}

#[test]
fn satisfying_assignment_gives_base_length() {
    let h = HybridInstance::new(vec![circle(7, &[(1, 4), (2, 5), (3, 6)])], vec![]).unwrap();
    for r in UNDIRECTED {
        let inst = build(&h, r);
        let t = tour_from_assignment(&inst, &Assignment::zeros(&h)).unwrap();
        validate_tour(inst.size(), &t).unwrap();
        assert_eq!(inst.tour_length(&t).unwrap() as i64, inst.base());
    }
    assert_eq!(build(&h, Regime::Tsp12).base(), 8 * 10 + 3 + 1);
    assert_eq!(build(&h, Regime::Tsp14).base(), 10 * 10 + 6 + 2);
}

#[test]
fn three_eq_block_pays_for_its_equation() {
    let h = three_circles();
    for r in UNDIRECTED {
        let inst = build(&h, r);
        let (sat, unsat) = if r == Regime::Tsp12 { (27, 28) } else { (36, 38) };
        for bits in [[0u8, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]] {
            let violated = (bits.iter().sum::<u8>() % 2) != 1;
            let phi = Assignment {
                values: bits.iter().map(|&b| vec![b == 1; 7]).collect(),
            };
            let t = tour_from_assignment(&inst, &phi).unwrap();
            let e = audit_ledger(&inst, &t).unwrap().entry(Block::ThreeEq { eq: 0 }).cloned().unwrap();
            assert_eq!(e.local, Ratio::from_integer(if violated { unsat } else { sat }), "{r} {bits:?}");
        }
    }
}

#[test]
fn forward_bound_on_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for h in mini_corpus().iter().step_by(4) {
        for r in UNDIRECTED {
            let inst = build(h, r);
            for phi in assignments(h, &mut rng).iter().take(300) {
                check_forward(&inst, phi);
            }
        }
    }
}

#[test]
fn normalization_on_random_tours() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let corpus = mini_corpus();
    for r in UNDIRECTED {
        for _ in 0..150 {
            let h = &corpus[rng.gen_range(0..corpus.len())];
            let inst = build(h, r);
            let t = sample_tour(&inst, &mut rng);
            check_extraction(&inst, &t);
            check_extraction(&inst, &t.reversed());
        }
    }
}

#[test]
fn reversed_consistent_tour_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let h = three_circles();
    for r in UNDIRECTED {
        let inst = build(&h, r);
        for _ in 0..20 {
            let t = tour_from_assignment(&inst, &Assignment::random(&h, &mut rng)).unwrap();
            assert!(is_consistent(&inst, &t.reversed()));
            assert_eq!(make_consistent(&inst, &t).unwrap(), t);
        }
    }
}

#[test]
fn oracle_sandwich_on_tiny_instances() {
    let mut n = 0;
    for h in tiny_instances() {
        for r in UNDIRECTED {
            let inst = build(&h, r);
            if inst.size() > 20 {
                continue;
            }
            let (opt, want) = check_sandwich(&inst);
            assert_eq!(opt as i64, want, "{r} {h:?}");
            n += 1;
        }
    }
    assert!(n >= 3);
}

#[test]
fn rebuild_is_deterministic_and_round_trips() {
    let h = three_circles();
    for r in UNDIRECTED {
        let inst = build(&h, r);
        assert_eq!(build(&h, r).metric(), inst.metric());
        let back = ReducedInstance::from_file(&inst.to_file()).unwrap();
        assert_eq!(back.tags(), inst.tags());
    }
}
