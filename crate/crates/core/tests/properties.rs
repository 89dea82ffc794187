use fep_core::bits::Bits;
use fep_core::dynamics::extract_gaps;
use fep_core::estimators::merge_all;
use fep_core::{decompose, replica_stream, FrozenEnsemble, Rule, WindowSampler, WindowSample, WindowStats};
use proptest::prelude::*;

/// A frozen ring from a gap sequence: gap `x` is a renewal site followed by
/// `x` copies of `10`.
fn ring_from_gaps(gaps: &[usize]) -> Bits {
    let text: String = gaps.iter().map(|&x| format!("0{}", "10".repeat(x))).collect();
    Bits::from_str01(&text)
}

fn windows(delta: f64, length: usize, count: usize, seed: u64) -> Vec<WindowSample> {
    let sampler = WindowSampler::new(delta, length).unwrap();
    let mut rng = replica_stream(seed, 0);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_windows_decompose(delta in 0.0f64..0.49, length in 1usize..300, seed in any::<u64>()) {
        for w in windows(delta, length, 20, seed) {
            let d = decompose(&w).unwrap();
            prop_assert_eq!(2 * d.n as i64, length as i64 - d.n_ren as i64 - d.sigma as i64);
            prop_assert_eq!(d.n, w.particle_count());
            prop_assert_eq!(d.n_ren, w.renewal_count());
            prop_assert!(w.check_structure().is_ok());
        }
    }

    #[test]
    fn window_records_round_trip(delta in 0.0f64..0.49, length in 1usize..200, seed in any::<u64>()) {
        for w in windows(delta, length, 5, seed) {
            let rec = w.to_record();
            let text = serde_json::to_string(&rec).unwrap();
            let back = WindowSample::from_record(&serde_json::from_str(&text).unwrap()).unwrap();
            prop_assert_eq!(back, w);
        }
    }

    #[test]
    fn gaps_are_recovered_up_to_rotation(gaps in prop::collection::vec(0usize..12, 1..40), shift in 0usize..1000) {
        let occ = ring_from_gaps(&gaps);
        let n = occ.len();
        let rotated = occ.cyclic_slice(shift % n, n);
        let got = extract_gaps(&rotated).unwrap();
        prop_assert_eq!(got.len(), gaps.len());
        let found = (0..gaps.len()).any(|r| got.iter().cycle().skip(r).take(gaps.len()).eq(gaps.iter()));
        prop_assert!(found, "{:?} vs {:?}", got, gaps);
        prop_assert_eq!(2 * got.iter().sum::<usize>() + got.len(), n);
    }

    #[test]
    fn adjacent_particles_are_rejected(gaps in prop::collection::vec(1usize..6, 1..20), at in 0usize..100) {
        let mut occ = ring_from_gaps(&gaps);
        let n = occ.len();
        let p = occ.iter_ones().nth(at % occ.count_ones()).unwrap();
        occ.set((p + 1) % n, true);
        prop_assert!(extract_gaps(&occ).is_err());
    }

    #[test]
    fn stats_merge_is_associative(
        delta in 0.01f64..0.45,
        length in 2usize..120,
        sizes in prop::collection::vec(2usize..40, 3),
        seed in any::<u64>(),
    ) {
        let all = windows(delta, length, sizes.iter().sum(), seed);
        let mut parts = Vec::new();
        let mut start = 0;
        for &s in &sizes {
            let mut st = WindowStats::new(delta, length);
            for w in &all[start..start + s] {
                st.push_window(w).unwrap();
            }
            parts.push(st);
            start += s;
        }
        let mut left = parts[0].clone();
        left.merge(&parts[1]).unwrap();
        left.merge(&parts[2]).unwrap();
        let mut right = parts[1].clone();
        right.merge(&parts[2]).unwrap();
        let mut right_total = parts[0].clone();
        right_total.merge(&right).unwrap();
        let mut single = WindowStats::new(delta, length);
        for w in &all {
            single.push_window(w).unwrap();
        }
        prop_assert_eq!(&left, &right_total);
        prop_assert_eq!(&left, &single);
        prop_assert_eq!(&merge_all(&parts).unwrap(), &single);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ensemble_container_round_trips(
        ring in 16usize..3000,
        rho in 0.05f64..0.5,
        replicas in 1u64..4,
        seed in any::<u64>(),
        ta in any::<bool>(),
    ) {
        let rule = if ta { Rule::ParallelTa } else { Rule::Continuous };
        // small rings can draw more than N/2 particles and never freeze
        let ens = FrozenEnsemble::simulate(ring, rho, rule, replicas, seed, u64::MAX);
        prop_assume!(ens.is_ok());
        let ens = ens.unwrap();
        let mut buf = Vec::new();
        ens.write_to(&mut buf).unwrap();
        let back = FrozenEnsemble::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &ens);
        for r in &ens.replicas {
            prop_assert!(extract_gaps(&r.occupancy).is_ok());
        }
        let mid = buf.len() / 2;
        buf[mid] ^= 0xff;
        // corrupted payloads either fail to parse or still hold frozen rings
        if let Ok(e) = FrozenEnsemble::read_from(buf.as_slice()) {
            for r in &e.replicas {
                prop_assert!(extract_gaps(&r.occupancy).is_ok());
            }
        }
    }
}
