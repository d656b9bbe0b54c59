//! Exact simulation of stabilizer states under Clifford gates and
//! single-site Z measurements, with bit-packed generator rows.

mod gate;
mod pauli;
mod tableau;

pub use gate::{canonical_index, sample_two_qubit_clifford, CliffordGate};
pub use pauli::PauliString;
pub use tableau::{MeasureOutcome, StabilizerTableau};

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn product_state_generators() {
        let t = StabilizerTableau::product_state(3).unwrap();
        for i in 0..3 {
            let g = t.stabilizer(i);
            assert_eq!(g.sign(), 1);
            assert_eq!(g.letter(i), 'Z');
            assert_eq!((0..3).filter(|&j| g.letter(j) != 'I').count(), 1);
        }
        t.validate().unwrap();
    }

    #[test]
    fn single_qubit_product_state() {
        let t = StabilizerTableau::product_state(1).unwrap();
        assert_eq!(format!("{}", t.stabilizer(0)), "+Z");
    }

    #[test]
    fn empty_register_rejected() {
        assert!(StabilizerTableau::product_state(0).is_err());
        assert!(StabilizerTableau::bell_pairs(0).is_err());
    }

    #[test]
    fn bell_pair_generators() {
        let t = StabilizerTableau::bell_pairs(1).unwrap();
        assert_eq!(format!("{}", t.stabilizer(0)), "+XX");
        assert_eq!(format!("{}", t.stabilizer(1)), "+ZZ");
        t.validate().unwrap();

        let t = StabilizerTableau::bell_pairs(2).unwrap();
        let got: Vec<String> = (0..4).map(|i| format!("{}", t.stabilizer(i))).collect();
        assert_eq!(got, vec!["+XIXI", "+ZIZI", "+IXIX", "+IZIZ"]);
        t.validate().unwrap();
    }

    #[test]
    fn hadamard_takes_z_to_x() {
        let mut t = StabilizerTableau::product_state(1).unwrap();
        t.apply_gate(&CliffordGate::hadamard(), &[0]).unwrap();
        assert_eq!(format!("{}", t.stabilizer(0)), "+X");
    }

    #[test]
    fn bell_preparation_circuit() {
        let mut t = StabilizerTableau::product_state(2).unwrap();
        t.apply_gate(&CliffordGate::hadamard(), &[0]).unwrap();
        t.apply_gate(&CliffordGate::cnot(), &[0, 1]).unwrap();
        let gens: Vec<String> = (0..2).map(|i| format!("{}", t.stabilizer(i))).collect();
        assert!(gens.contains(&"+XX".to_string()), "{gens:?}");
        assert!(gens.contains(&"+ZZ".to_string()), "{gens:?}");
    }

    #[test]
    fn gate_target_errors() {
        let mut t = StabilizerTableau::product_state(3).unwrap();
        let g = CliffordGate::cnot();
        assert!(t.apply_gate(&g, &[0, 0]).is_err());
        assert!(t.apply_gate(&g, &[0, 5]).is_err());
        assert!(t.apply_gate(&g, &[1]).is_err());
    }

    #[test]
    fn measure_z_on_zero_state_is_deterministic() {
        let mut t = StabilizerTableau::product_state(1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let before = t.clone();
        let out = t.measure_z(0, &mut rng).unwrap();
        assert_eq!(out.value, 1);
        assert!(out.deterministic);
        assert_eq!(t, before);
    }

    #[test]
    fn measure_z_on_plus_state_follows_born_rule() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let trials = 10_000;
        let mut plus = 0i64;
        for _ in 0..trials {
            let mut t = StabilizerTableau::product_state(1).unwrap();
            t.apply_gate(&CliffordGate::hadamard(), &[0]).unwrap();
            let out = t.measure_z(0, &mut rng).unwrap();
            assert!(!out.deterministic);
            if out.value == 1 {
                plus += 1;
            }
        }
        // Binomial 5-sigma band around p = 1/2.
        let dev = (plus - trials / 2).abs() as f64;
        assert!(dev < 5.0 * (trials as f64 * 0.25).sqrt(), "bias: {plus}/{trials}");
    }

    #[test]
    fn bell_measurements_are_perfectly_correlated() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut t = StabilizerTableau::bell_pairs(1).unwrap();
            let a = t.measure_z(0, &mut rng).unwrap();
            let b = t.measure_z(1, &mut rng).unwrap();
            assert!(!a.deterministic);
            assert!(b.deterministic);
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn measurement_is_idempotent() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for seed in 0..20 {
            let mut t = random_state(6, 12, seed);
            let site = (seed as usize) % 6;
            let first = t.measure_z(site, &mut rng).unwrap();
            let snapshot = t.clone();
            let second = t.measure_z(site, &mut rng).unwrap();
            assert_eq!(second.value, first.value);
            assert!(second.deterministic);
            assert_eq!(t, snapshot);
        }
    }

    #[test]
    fn append_fresh_qubit_extends_product_structure() {
        let mut t = StabilizerTableau::product_state(1).unwrap();
        t.append_fresh_qubit();
        assert_eq!(t.n(), 2);
        assert_eq!(format!("{}", t.stabilizer(0)), "+ZI");
        assert_eq!(format!("{}", t.stabilizer(1)), "+IZ");
        t.validate().unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let out = t.measure_z(1, &mut rng).unwrap();
        assert_eq!(out.value, 1);
        assert!(out.deterministic);
    }

    #[test]
    fn append_grows_past_capacity() {
        let mut t = StabilizerTableau::product_state(2).unwrap();
        for _ in 0..70 {
            t.append_fresh_qubit();
        }
        assert_eq!(t.n(), 72);
        t.validate().unwrap();
    }

    fn random_state(n: usize, layers: usize, seed: u64) -> StabilizerTableau {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut t = StabilizerTableau::product_state(n).unwrap();
        for layer in 0..layers {
            let start = layer % 2;
            let mut q = start;
            while q + 1 < n {
                let g = sample_two_qubit_clifford(&mut rng);
                t.apply_gate(&g, &[q, q + 1]).unwrap();
                q += 2;
            }
            for site in 0..n {
                if rng.gen::<f64>() < 0.2 {
                    t.measure_z(site, &mut rng).unwrap();
                }
            }
        }
        t
    }

    #[test]
    fn group_closure_survives_random_evolution() {
        for seed in 0..30 {
            let t = random_state(8, 10, seed);
            t.validate().unwrap();
        }
    }

    #[test]
    fn trajectories_are_seed_deterministic() {
        let a = random_state(10, 14, 321);
        let b = random_state(10, 14, 321);
        assert_eq!(a, b);
    }

    #[test]
    fn expectation_identifies_group_membership() {
        let t = StabilizerTableau::bell_pairs(1).unwrap();
        let xx = PauliString::from_bits(&[true, true], &[false, false], 1).unwrap();
        let yy = PauliString::from_bits(&[true, true], &[true, true], 1).unwrap();
        let zi = PauliString::from_bits(&[false, false], &[true, false], 1).unwrap();
        assert_eq!(t.expectation(&xx).unwrap(), 1);
        assert_eq!(t.expectation(&yy).unwrap(), -1); // YY = -XX.ZZ
        assert_eq!(t.expectation(&zi).unwrap(), 0);
    }
}
