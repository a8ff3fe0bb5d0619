//! Reduction properties shared by the per-target suites and the acceptance
//! run. Lengths and violated-equation counts are recomputed with the
//! oracles in the parent module rather than read from the library.

use super::{length_oracle, random_tour, unsat_oracle};
use gadgetforge::bounds::Ratio;
use gadgetforge::hybrid::{Assignment, HybridInstance};
use gadgetforge::metric::{validate_tour, Tour};
use gadgetforge::oracle::{exact_opt, SolveBudget};
use gadgetforge::reduce::{
    assignment_from_tour, audit_ledger, is_consistent, make_consistent, tour_from_assignment, ReducedInstance,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Every assignment when there are at most 2^14, otherwise 500 random ones.
pub fn assignments<R: Rng>(h: &HybridInstance, rng: &mut R) -> Vec<Assignment> {
    let n = h.var_count();
    if n <= 14 {
        (0..1u64 << n).map(|k| Assignment::from_index(h, k)).collect()
    } else {
        (0..500).map(|_| Assignment::random(h, rng)).collect()
    }
}

/// `σ_φ` is a consistent Hamiltonian tour, `ℓ ≤ base + c·u`, and the ledger
/// adds up to the length.
pub fn check_forward(inst: &ReducedInstance, phi: &Assignment) {
    let h = inst.hybrid();
    let t = tour_from_assignment(inst, phi).unwrap();
    validate_tour(inst.size(), &t).unwrap();
    let len = length_oracle(inst.metric(), &t) as i64;
    let u = unsat_oracle(h, phi) as i64;
    assert!(
        len <= inst.base() + inst.slack() * u,
        "{}: length {len} above {} + {}·{u}",
        inst.regime(),
        inst.base(),
        inst.slack()
    );
    assert!(is_consistent(inst, &t));
    let led = audit_ledger(inst, &t).unwrap();
    assert_eq!(led.total(), Ratio::from_integer(len));
    assert_eq!(led.constant_total(), inst.base());
}

/// Normalization never lengthens, is a fixpoint on its output, and the
/// extracted assignment pays for its violated equations.
pub fn check_extraction(inst: &ReducedInstance, t: &Tour) {
    let len = length_oracle(inst.metric(), t);
    let once = make_consistent(inst, t).unwrap();
    validate_tour(inst.size(), &once).unwrap();
    let len1 = length_oracle(inst.metric(), &once);
    assert!(len1 <= len, "{}: normalization {len} -> {len1}", inst.regime());
    let twice = make_consistent(inst, &once).unwrap();
    assert_eq!(length_oracle(inst.metric(), &twice), len1);
    if is_consistent(inst, &once) {
        assert_eq!(twice, once);
    }
    let ex = assignment_from_tour(inst, t).unwrap();
    let lt = length_oracle(inst.metric(), &ex.tour) as i64;
    assert!(lt <= len as i64);
    let u = unsat_oracle(inst.hybrid(), &ex.assignment) as i64;
    assert_eq!(u, ex.unsat as i64);
    assert!(
        inst.slack() * u <= lt - inst.base(),
        "{}: unsat {u} but length {lt} over base {}",
        inst.regime(),
        inst.base()
    );
}

/// A random permutation, or `σ_φ` for a random `φ` with a few random
/// segment reversals and swaps applied.
pub fn sample_tour<R: Rng>(inst: &ReducedInstance, rng: &mut R) -> Tour {
    let n = inst.size();
    if rng.gen_bool(0.5) {
        return random_tour(rng, n);
    }
    let phi = Assignment::random(inst.hybrid(), rng);
    let mut order = tour_from_assignment(inst, &phi).unwrap().order;
    for _ in 0..rng.gen_range(1..4) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if rng.gen_bool(0.5) {
            order.swap(a, b);
        } else {
            let (a, b) = (a.min(b), a.max(b));
            order[a..=b].reverse();
        }
    }
    if rng.gen_bool(0.1) {
        order.shuffle(rng);
    }
    Tour::new(order)
}

/// Optimal tour length against `base + c·u_min`, both computed from
/// scratch.
pub fn check_sandwich(inst: &ReducedInstance) -> (u64, i64) {
    let h = inst.hybrid();
    let u_min = (0..1u64 << h.var_count())
        .map(|k| unsat_oracle(h, &Assignment::from_index(h, k)))
        .min()
        .unwrap() as i64;
    let (opt, witness) = exact_opt(inst.metric(), SolveBudget::dp()).unwrap();
    assert_eq!(length_oracle(inst.metric(), &witness), opt);
    (opt, inst.base() + inst.slack() * u_min)
}
