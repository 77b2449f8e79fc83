//! Property tests for the algebraic invariants that do not need a solver:
//! surrogate tangency, enumeration structure, serialization, and partition
//! counting.

use proptest::prelude::*;

use physi::gsvd::GsvdFactors;
use physi::solver::SubproblemInstance;
use physi::{
    channels_from_text, channels_to_text, classify_subchannels, enumerate_schemes,
    expected_partition_counts, generate_channels, gsvd, surrogate_objective, DEFAULT_CLASSIFY_TOL,
};

/// Strictly interior squared gains keep classification away from the
/// boundary tolerance.
fn interior_gain() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// The linearized objective never exceeds the true one and touches it at
    /// the reference point.
    #[test]
    fn surrogate_is_a_tight_minorant(
        gains in prop::collection::vec((interior_gain(), 0.0f64..150.0, 0.0f64..150.0), 1..5),
    ) {
        let c2: Vec<f64> = gains.iter().map(|g| g.0).collect();
        let d2: Vec<f64> = gains.iter().map(|g| 1.0 - g.0).collect();
        let refs: Vec<f64> = gains.iter().map(|g| g.1).collect();
        let pc: Vec<f64> = gains.iter().map(|g| g.2).collect();
        let n = gains.len();
        let inst = SubproblemInstance::new(
            vec![], vec![], vec![],
            c2, d2, vec![1.0; n],
            1e6, 0.0, refs.clone(),
        ).unwrap();
        let g_at_pc = surrogate_objective(&inst, &pc).unwrap();
        let r_at_pc = inst.true_objective(&pc).unwrap();
        prop_assert!(g_at_pc <= r_at_pc + 1e-10, "surrogate {} above truth {}", g_at_pc, r_at_pc);
        let g_at_ref = surrogate_objective(&inst, &refs).unwrap();
        let r_at_ref = inst.true_objective(&refs).unwrap();
        prop_assert!((g_at_ref - r_at_ref).abs() <= 1e-10, "not tight at reference");
    }

    /// Scheme enumeration: private-2 subchannels are always discarded,
    /// private-1 always confidential, weak common ones always multicast, and
    /// the free common ones generate exactly 2^F schemes.
    #[test]
    fn enumeration_respects_the_forced_assignments(
        c2 in prop::collection::vec(interior_gain(), 1..7),
    ) {
        let n = c2.len();
        let f = GsvdFactors::from_gains(c2.clone(), vec![1.0; n]).unwrap();
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        let set = enumerate_schemes(&f, &part).unwrap();
        let free = c2.iter().filter(|&&c| c > 1.0 - c + 1e-12).count();
        prop_assert_eq!(set.len(), 1usize << free);
        for (scheme, prov) in set.schemes.iter().zip(&set.provenance) {
            for i in 0..n {
                let c = c2[i];
                let d = 1.0 - c;
                if c <= d + 1e-12 {
                    prop_assert!(scheme.gamma0.contains(&i), "weak subchannel {} not multicast", i);
                }
            }
            prop_assert!(scheme.discarded.is_empty(), "interior gains leave nothing to discard");
            let named = prov.forced_multicast.len()
                + prov.free_to_confidential.len()
                + prov.free_to_multicast.len();
            prop_assert_eq!(named, n);
        }
    }

    /// Text serialization of generated channels is bitwise lossless.
    #[test]
    fn channel_text_round_trips(
        nt in 1usize..5, nb in 1usize..5, ne in 1usize..5, seed in any::<u64>(),
    ) {
        let pair = generate_channels(nt, nb, ne, seed).unwrap();
        let text = channels_to_text(&pair);
        let back = channels_from_text(&text).unwrap();
        prop_assert_eq!(&pair.h1, &back.h1);
        prop_assert_eq!(&pair.h2, &back.h2);
    }

    /// Random draws land in the generic partition predicted by the antenna
    /// counts alone.
    #[test]
    fn random_channels_have_generic_partitions(
        nt in 1usize..5, nb in 1usize..5, ne in 1usize..5, seed in 0u64..1000,
    ) {
        let pair = generate_channels(nt, nb, ne, seed).unwrap();
        let f = gsvd(&pair).unwrap();
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        let (cc, pc1, pc2) = expected_partition_counts(nt, nb, ne);
        prop_assert_eq!(part.cc.len(), cc);
        prop_assert_eq!(part.pc1.len(), pc1);
        prop_assert_eq!(part.pc2.len(), pc2);
    }

    /// Power accounting scales linearly with the powers.
    #[test]
    fn total_power_is_linear_in_the_powers(
        c2 in prop::collection::vec(interior_gain(), 1..5),
        scale in 0.25f64..4.0,
    ) {
        let n = c2.len();
        let costs: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 0.25).collect();
        let f = GsvdFactors::from_gains(c2, costs).unwrap();
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        let set = enumerate_schemes(&f, &part).unwrap();
        let scheme = &set.schemes[0];
        let p0: Vec<f64> = (0..scheme.gamma0.len()).map(|i| 1.0 + i as f64).collect();
        let pc: Vec<f64> = (0..scheme.gammac.len()).map(|i| 2.0 + i as f64).collect();
        let base = physi::total_power(&f, scheme, &p0, &pc).unwrap();
        let p0s: Vec<f64> = p0.iter().map(|p| p * scale).collect();
        let pcs: Vec<f64> = pc.iter().map(|p| p * scale).collect();
        let scaled = physi::total_power(&f, scheme, &p0s, &pcs).unwrap();
        prop_assert!((scaled - base * scale).abs() <= 1e-9 * base.max(1.0) * scale);
    }
}
