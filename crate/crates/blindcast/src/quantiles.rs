//! Order statistics over completed trials.
//!
//! Quantiles use the nearest-rank convention on the sorted sample:
//! `q(p) = sorted[round(p * (k - 1))]` with round-half-up in integer
//! arithmetic, so outputs stay exact integers and reruns are byte-stable.

/// Summary order statistics of completion rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantiles {
    pub min: u64,
    pub median: u64,
    pub p95: u64,
    pub max: u64,
}

fn nearest_rank_index(len: usize, num: u64, den: u64) -> usize {
    debug_assert!(len > 0 && num <= den);
    (((len as u64 - 1) * num + den / 2) / den) as usize
}

/// Nearest-rank quantile of an unsorted sample; `num/den` is the quantile
/// in [0, 1]. Selection avoids a full sort.
pub fn quantile(values: &[u64], num: u64, den: u64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let idx = nearest_rank_index(values.len(), num, den);
    let mut scratch = values.to_vec();
    let (_, nth, _) = scratch.select_nth_unstable(idx);
    Some(*nth)
}

pub fn summarize(values: &[u64]) -> Option<Quantiles> {
    Some(Quantiles {
        min: quantile(values, 0, 1)?,
        median: quantile(values, 1, 2)?,
        p95: quantile(values, 95, 100)?,
        max: quantile(values, 1, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: full sort plus direct indexing.
    fn sort_oracle(values: &[u64], num: u64, den: u64) -> Option<u64> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        Some(sorted[nearest_rank_index(values.len(), num, den)])
    }

    #[test]
    fn fixed_cases() {
        let v = [5u64, 1, 9, 3, 7];
        assert_eq!(quantile(&v, 0, 1), Some(1));
        assert_eq!(quantile(&v, 1, 2), Some(5));
        assert_eq!(quantile(&v, 1, 1), Some(9));
        assert_eq!(quantile(&[], 1, 2), None);
        assert_eq!(quantile(&[4], 95, 100), Some(4));
    }

    proptest! {
        #[test]
        fn selection_matches_sort_oracle(
            mut values in proptest::collection::vec(0u64..10_000, 1..200),
            num in 0u64..=100,
        ) {
            let q = quantile(&values, num, 100);
            let o = sort_oracle(&values, num, 100);
            prop_assert_eq!(q, o);
            // Permutation invariance.
            values.reverse();
            prop_assert_eq!(quantile(&values, num, 100), o);
        }
    }
}
