//! Message-to-subchannel allocation: which subchannels carry the multicast
//! message, which carry the confidential message, and which are discarded.
//!
//! Three structural rules prune the search space without losing optimality:
//! subchannels invisible to receiver 1 can carry nothing useful for it and
//! are discarded; subchannels invisible to receiver 2 are secrecy-free and
//! always go to the confidential message; common subchannels that do not
//! favor receiver 1 would only leak if used confidentially, so they always
//! go to the multicast message. Only the remaining common subchannels are
//! genuinely free, and every split of that free set is enumerated.

use crate::error::{Error, Result};
use crate::gsvd::{secrecy_capable, GsvdFactors, SubchannelPartition};

/// Assignment of every subchannel to exactly one of the two messages or to
/// the discard pile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageAllocation {
    /// Total number of subchannels being partitioned.
    pub q: usize,
    /// Subchannels carrying the multicast message, ascending.
    pub gamma0: Vec<usize>,
    /// Subchannels carrying the confidential message, ascending.
    pub gammac: Vec<usize>,
    /// Unused subchannels, ascending.
    pub discarded: Vec<usize>,
}

impl MessageAllocation {
    /// Validates that the three sets are ascending, disjoint, and together
    /// cover `0..q` exactly.
    pub fn new(q: usize, gamma0: Vec<usize>, gammac: Vec<usize>, discarded: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; q];
        for set in [&gamma0, &gammac, &discarded] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(
                    "allocation sets must be strictly ascending".into(),
                ));
            }
            for &i in set.iter() {
                if i >= q {
                    return Err(Error::IndexOutOfRange {
                        context: "MessageAllocation::new",
                        index: i,
                        len: q,
                    });
                }
                if seen[i] {
                    return Err(Error::InvalidInput(format!(
                        "subchannel {i} appears in more than one allocation set"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidInput(format!(
                "subchannel {missing} is not assigned to any allocation set"
            )));
        }
        Ok(Self { q, gamma0, gammac, discarded })
    }
}

/// Why each subchannel ended up where it did in a scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeProvenance {
    /// Discarded because receiver 1 cannot see them.
    pub discarded_unreachable: Vec<usize>,
    /// Forced confidential because receiver 2 cannot see them.
    pub forced_confidential: Vec<usize>,
    /// Forced multicast because they do not favor receiver 1.
    pub forced_multicast: Vec<usize>,
    /// Free common subchannels this scheme assigns to the confidential message.
    pub free_to_confidential: Vec<usize>,
    /// Free common subchannels this scheme assigns to the multicast message.
    pub free_to_multicast: Vec<usize>,
    /// Bitmask over the free set (bit j set = free subchannel j confidential).
    pub free_mask: u64,
}

/// Ordered collection of candidate allocations with per-scheme provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSet {
    pub schemes: Vec<MessageAllocation>,
    pub provenance: Vec<SchemeProvenance>,
}

impl SchemeSet {
    pub fn len(&self) -> usize {
        self.schemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemes.is_empty()
    }
}

/// Enumerates every allocation consistent with the pruning rules.
///
/// With F free common subchannels the result has `2^F` schemes, ordered by
/// the binary counter over the free set: scheme 0 sends every free
/// subchannel to the multicast message, and bit j of scheme k decides free
/// subchannel j (set = confidential).
pub fn enumerate_schemes(f: &GsvdFactors, part: &SubchannelPartition) -> Result<SchemeSet> {
    let forced_confidential = part.pc1.clone();
    let discarded = part.pc2.clone();
    let mut forced_multicast = Vec::new();
    let mut free = Vec::new();
    for &i in &part.cc {
        if secrecy_capable(f.c_sq[i], f.d_sq[i]) {
            free.push(i);
        } else {
            forced_multicast.push(i);
        }
    }
    if free.len() >= 63 {
        return Err(Error::DimensionTooLarge {
            context: "enumerate_schemes free set",
            size: free.len(),
            limit: 62,
        });
    }

    let mut schemes = Vec::with_capacity(1 << free.len());
    let mut provenance = Vec::with_capacity(1 << free.len());
    for mask in 0u64..(1u64 << free.len()) {
        let mut gamma0 = forced_multicast.clone();
        let mut gammac = forced_confidential.clone();
        let mut free_c = Vec::new();
        let mut free_m = Vec::new();
        for (j, &i) in free.iter().enumerate() {
            if mask & (1 << j) != 0 {
                gammac.push(i);
                free_c.push(i);
            } else {
                gamma0.push(i);
                free_m.push(i);
            }
        }
        gamma0.sort_unstable();
        gammac.sort_unstable();
        schemes.push(MessageAllocation::new(f.q, gamma0, gammac, discarded.clone())?);
        provenance.push(SchemeProvenance {
            discarded_unreachable: discarded.clone(),
            forced_confidential: forced_confidential.clone(),
            forced_multicast: forced_multicast.clone(),
            free_to_confidential: free_c,
            free_to_multicast: free_m,
            free_mask: mask,
        });
    }
    Ok(SchemeSet { schemes, provenance })
}

/// Returns a copy of the set with scheme `k` removed, preserving order.
pub fn remove_scheme(set: &SchemeSet, k: usize) -> Result<SchemeSet> {
    if k >= set.schemes.len() {
        return Err(Error::IndexOutOfRange {
            context: "remove_scheme",
            index: k,
            len: set.schemes.len(),
        });
    }
    let mut out = set.clone();
    out.schemes.remove(k);
    out.provenance.remove(k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsvd::classify_subchannels;

    fn scheme_fixture(c_sq: Vec<f64>) -> (GsvdFactors, SubchannelPartition) {
        let n = c_sq.len();
        let f = GsvdFactors::from_gains(c_sq, vec![1.0; n]).unwrap();
        let part = classify_subchannels(&f, 1e-9).unwrap();
        (f, part)
    }

    #[test]
    fn three_free_subchannels_give_eight_schemes() {
        let (f, part) = scheme_fixture(vec![0.6, 0.7, 0.8]);
        let set = enumerate_schemes(&f, &part).unwrap();
        assert_eq!(set.len(), 8);
        // Scheme 0 sends everything to multicast.
        assert_eq!(set.schemes[0].gamma0, vec![0, 1, 2]);
        assert!(set.schemes[0].gammac.is_empty());
        // Bit j of the scheme index moves free subchannel j to confidential.
        for (k, s) in set.schemes.iter().enumerate() {
            for j in 0..3usize {
                let confidential = s.gammac.contains(&j);
                assert_eq!(confidential, k & (1 << j) != 0, "scheme {k} subchannel {j}");
            }
            assert!(s.discarded.is_empty());
        }
        assert_eq!(set.provenance[5].free_mask, 5);
        assert_eq!(set.provenance[5].free_to_confidential, vec![0, 2]);
        assert_eq!(set.provenance[5].free_to_multicast, vec![1]);
    }

    #[test]
    fn forced_assignments_appear_in_every_scheme() {
        // One free common subchannel plus one private each way, plus one weak
        // common subchannel: 2 schemes total.
        let (f, part) = scheme_fixture(vec![0.0, 0.3, 0.7, 1.0]);
        assert_eq!(part.pc2, vec![0]);
        assert_eq!(part.cc, vec![1, 2]);
        assert_eq!(part.pc1, vec![3]);
        let set = enumerate_schemes(&f, &part).unwrap();
        assert_eq!(set.len(), 2);
        for s in &set.schemes {
            assert!(s.gammac.contains(&3), "private-to-1 always confidential");
            assert_eq!(s.discarded, vec![0], "private-to-2 always discarded");
            assert!(s.gamma0.contains(&1), "weak common always multicast");
        }
        assert_eq!(set.schemes[0].gamma0, vec![1, 2]);
        assert_eq!(set.schemes[1].gammac, vec![2, 3]);
    }

    #[test]
    fn no_free_subchannels_give_one_scheme() {
        let (f, part) = scheme_fixture(vec![0.2, 0.4]);
        let set = enumerate_schemes(&f, &part).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.schemes[0].gamma0, vec![0, 1]);
        assert!(set.schemes[0].gammac.is_empty());
    }

    #[test]
    fn tied_gains_count_as_weak() {
        let (f, part) = scheme_fixture(vec![0.5, 0.5]);
        let set = enumerate_schemes(&f, &part).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.schemes[0].gamma0, vec![0, 1]);
    }

    #[test]
    fn allocation_validation_catches_bad_partitions() {
        assert!(MessageAllocation::new(3, vec![0], vec![1], vec![2]).is_ok());
        // Overlap.
        assert!(MessageAllocation::new(3, vec![0, 1], vec![1], vec![2]).is_err());
        // Missing index.
        assert!(MessageAllocation::new(3, vec![0], vec![1], vec![]).is_err());
        // Out of range.
        assert!(MessageAllocation::new(2, vec![0, 2], vec![1], vec![]).is_err());
        // Not ascending.
        assert!(MessageAllocation::new(3, vec![1, 0], vec![2], vec![]).is_err());
    }

    #[test]
    fn remove_scheme_preserves_order() {
        let (f, part) = scheme_fixture(vec![0.6, 0.7]);
        let set = enumerate_schemes(&f, &part).unwrap();
        assert_eq!(set.len(), 4);
        let smaller = remove_scheme(&set, 1).unwrap();
        assert_eq!(smaller.len(), 3);
        assert_eq!(smaller.provenance[0].free_mask, 0);
        assert_eq!(smaller.provenance[1].free_mask, 2);
        assert_eq!(smaller.provenance[2].free_mask, 3);
        assert!(remove_scheme(&smaller, 3).is_err());
    }
}
