use ftcluster::gadgets::Gadget;
use ftcluster::montecarlo::{run_trials, TrialPlan};
use ftcluster::oracle::statevec::{random_clifford_circuit, tableau_distribution, total_variation};
use ftcluster::pauli::{Pauli, PauliString};
use ftcluster::steane::{encode_logical, stabilizer_generators, LogicalState, Syndrome};
use ftcluster::tableau::StabilizerState;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0usize..4, n), 0u8..4).prop_map(move |(letters, phase)| {
        let mut p = PauliString::identity(n);
        for (q, l) in letters.into_iter().enumerate() {
            p.set(q, Pauli::ALL[l]);
        }
        p.set_phase(phase);
        p
    })
}

proptest! {
    #[test]
    fn pauli_product_is_associative(a in pauli_string(70), b in pauli_string(70), c in pauli_string(70)) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn products_commute_or_anticommute(a in pauli_string(9), b in pauli_string(9)) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert_eq!(ab.unsigned(), ba.unsigned());
        let sign_flip = (ab.phase() + 4 - ba.phase()) % 4;
        prop_assert_eq!(sign_flip, if a.commutes_with(&b) { 0 } else { 2 });
    }

    #[test]
    fn tableau_stays_valid(seed in any::<u64>(), n in 1usize..9, depth in 0usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = StabilizerState::new(n);
        for g in random_clifford_circuit(n, depth, &mut rng) {
            s.apply(g).unwrap();
            if rng.gen_bool(0.1) {
                let q = rng.gen_range(0..n);
                s.measure_x(q, &mut rng).unwrap();
            }
        }
        prop_assert_eq!(s.check_invariants(), Ok(()));
    }

    #[test]
    fn deferred_frame_matches_applied_pauli(seed in any::<u64>(), n in 1usize..7, err in pauli_string(6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = random_clifford_circuit(n, 30, &mut rng);
        let (head, tail) = gates.split_at(gates.len() / 2);
        let mut e = PauliString::identity(n);
        for q in 0..n {
            e.set(q, err.get(q));
        }
        let mut deferred = StabilizerState::new(n);
        let mut applied = StabilizerState::new(n);
        for &g in head {
            deferred.apply(g).unwrap();
            applied.apply(g).unwrap();
        }
        deferred.push_frame(&e).unwrap();
        applied.apply_pauli(&e).unwrap();
        for &g in tail {
            deferred.apply(g).unwrap();
            applied.apply(g).unwrap();
        }
        let all: Vec<usize> = (0..n).collect();
        let tv = total_variation(&tableau_distribution(&deferred, &all), &tableau_distribution(&applied, &all));
        prop_assert!(tv < 1e-12);
    }

    #[test]
    fn syndromes_are_linear(a in pauli_string(7), b in pauli_string(7)) {
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(Syndrome::of_error(&ab), Syndrome::of_error(&a).xor(Syndrome::of_error(&b)));
    }

    #[test]
    fn syndrome_matches_measured_generators(e in pauli_string(7), plus in any::<bool>()) {
        let which = if plus { LogicalState::Plus } else { LogicalState::Zero };
        let mut s = encode_logical(which);
        s.push_frame(&e.unsigned()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut bits = [0u8; 2];
        for (i, g) in stabilizer_generators().iter().enumerate() {
            let m = s.clone().measure_pauli(g, &mut rng).unwrap();
            prop_assert!(m.deterministic);
            if m.is_minus() {
                bits[i / 3] |= 1 << (i % 3);
            }
        }
        let syn = Syndrome::of_error(&e);
        prop_assert_eq!((bits[0], bits[1]), (syn.x_checks, syn.z_checks));
    }
}

#[test]
fn reports_do_not_depend_on_job_count() {
    let plan = TrialPlan::new(Gadget::EncodePlus, 1, 3e-3)
        .with_trials(3000)
        .with_seed(99);
    let serial = run_trials(&plan.clone().with_jobs(1)).unwrap();
    let parallel = run_trials(&plan.with_jobs(5)).unwrap();
    assert_eq!(serial, parallel);
}
