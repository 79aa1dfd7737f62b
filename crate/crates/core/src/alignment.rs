//! The alignment relation and its connected components, the rate
//! `1/(L+1)` feasibility test, and the two constructions that achieve that
//! rate on feasible instances.
//!
//! Two messages are related at destination `k` when both interfere there,
//! i.e. neither is desired nor held by `k`. At rate `1/(L+1)` they must then
//! share a dimension. The connected components of the relation are the
//! alignment subsets.
//!
//! Messages no destination desires are idle: they are sent on zero
//! precoders, never interfere, and stay out of the relation.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::galois::{mds_vector_family, smallest_prime_at_least, spread_family, FieldSpec, GaloisError, Matrix};
use crate::model::{normalize_split, DestId, Instance, MessageId, ModelError, Normalized};
use crate::scheme::LinearScheme;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AlignmentError {
    #[error("destinations desire different numbers of messages; normalize first")]
    NotNormalized,
    #[error("rate 1/(L+1) is infeasible: messages {} and {} are aligned but {} desires {} without holding {}", .0.i, .0.j, .0.k, .0.j, .0.i)]
    Infeasible(Witness),
    #[error("the spread construction only covers rate 1/2 (L = 1), got L = {0}")]
    UnsupportedL(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

/// An alignment edge `W_i <-> W_j` induced at destination `k`, with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub i: MessageId,
    pub j: MessageId,
    pub k: DestId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentPartition {
    pub l: usize,
    pub edges: Vec<Edge>,
    /// Subsets ordered by smallest member, each sorted.
    pub subsets: Vec<Vec<MessageId>>,
    /// `subset_of[m]` is the 1-based subset index of message `m`, 0 for
    /// idle messages; index 0 unused.
    pub subset_of: Vec<usize>,
    /// Messages no destination desires.
    pub idle: Vec<MessageId>,
}

impl AlignmentPartition {
    /// Number of alignment subsets.
    pub fn z(&self) -> usize {
        self.subsets.len()
    }

    /// `P(m)`, 1-based; 0 for an idle message.
    pub fn p(&self, m: MessageId) -> usize {
        self.subset_of[m]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "L": self.l,
            "Z": self.z(),
            "subsets": self.subsets,
            "idle": self.idle,
            "edges": self.edges.iter().map(|e| [e.i, e.j, e.k]).collect::<Vec<_>>(),
        })
    }
}

/// Union-find over `0..n` with path halving.
struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Alignment edges and subsets of an instance whose destinations all
/// desire the same number `L` of messages.
pub fn partition(inst: &Instance) -> Result<AlignmentPartition, AlignmentError> {
    let l = inst.uniform_demand().ok_or(AlignmentError::NotNormalized)?;
    let m = inst.num_messages;
    let demand = inst.demand_counts();
    let mut edges = Vec::new();
    let mut dsu = Dsu((0..=m).collect());
    for d in &inst.destinations {
        let int: Vec<MessageId> = d.interferers(m).filter(|&x| demand[x] > 0).collect();
        for (a, &i) in int.iter().enumerate() {
            for &j in &int[a + 1..] {
                edges.push(Edge { i, j, k: d.id });
                dsu.union(i, j);
            }
        }
    }
    // Roots are the smallest members, so numbering by root order numbers
    // subsets by their smallest member.
    let mut subset_of = vec![0; m + 1];
    let mut subsets: Vec<Vec<MessageId>> = Vec::new();
    let mut index_of_root = vec![0; m + 1];
    let mut idle = Vec::new();
    for x in 1..=m {
        if demand[x] == 0 {
            idle.push(x);
            continue;
        }
        let r = dsu.find(x);
        if index_of_root[r] == 0 {
            subsets.push(Vec::new());
            index_of_root[r] = subsets.len();
        }
        subset_of[x] = index_of_root[r];
        subsets[index_of_root[r] - 1].push(x);
    }
    Ok(AlignmentPartition { l, edges, subsets, subset_of, idle })
}

/// A conflict `(i, j, k)`: `i` and `j` share a subset, `k` desires `j`
/// and does not hold `i`. `k` refers to the caller's destination ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub i: MessageId,
    pub j: MessageId,
    pub k: DestId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub witness: Option<Witness>,
    /// The partition of the split instance the verdict was computed on.
    pub partition: AlignmentPartition,
    pub normalized: Normalized,
}

impl FeasibilityVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "feasible": self.feasible,
            "witness": self.witness.map(|w| [w.i, w.j, w.k]),
            "partition": self.partition.to_json(),
        })
    }
}

/// Decides whether every message can get rate `1/(L+1)`. Destinations
/// desiring more than `L` messages are split first.
///
/// The witness is the first conflict in (subset, i, j, k) order, with `k`
/// mapped back to the destination it was split from.
pub fn check_feasibility(inst: &Instance, l: usize) -> Result<FeasibilityVerdict, AlignmentError> {
    let normalized = normalize_split(inst, l)?;
    let split = &normalized.instance;
    let part = partition(split)?;
    let mut witness = None;
    'search: for subset in &part.subsets {
        for &i in subset {
            for &j in subset {
                if i == j {
                    continue;
                }
                for d in &split.destinations {
                    if d.wants.contains(&j) && !d.has.contains(&i) {
                        witness = Some(Witness { i, j, k: normalized.origin[d.id - 1] });
                        break 'search;
                    }
                }
            }
        }
    }
    Ok(FeasibilityVerdict {
        feasible: witness.is_none(),
        witness,
        partition: part,
        normalized,
    })
}

fn feasible_partition(inst: &Instance, l: usize) -> Result<AlignmentPartition, AlignmentError> {
    let v = check_feasibility(inst, l)?;
    match v.witness {
        Some(w) => Err(AlignmentError::Infeasible(w)),
        None => Ok(v.partition),
    }
}

/// Scalar scheme with `n = L + 1` over the smallest prime `p >= Z`: every
/// message of subset `t` is sent along the `t`-th vector of a family in
/// which any `L + 1` vectors are independent.
pub fn build_scalar_scheme(inst: &Instance, l: usize) -> Result<LinearScheme, AlignmentError> {
    let part = feasible_partition(inst, l)?;
    let z = part.z();
    let p = smallest_prime_at_least(z as u64);
    let field = FieldSpec::prime(p as u32)?;
    let family = mds_vector_family(z, l + 1, field)?;
    let v = (1..=inst.num_messages)
        .map(|m| match part.p(m) {
            0 => (m, Matrix::zeros(field, l + 1, 1)),
            t => (m, family.select_columns(&[t - 1])),
        })
        .collect();
    Ok(LinearScheme::new(field, l + 1, v))
}

/// Smallest even `n` whose spread of `GF(2)^n` has at least `z` members.
pub fn spread_length(z: usize) -> usize {
    let mut n = 2;
    while (1usize << (n / 2)) + 1 < z {
        n += 2;
    }
    n
}

/// Rate-1/2 vector scheme over GF(2): subset `t` gets the `t`-th member of
/// a spread of `GF(2)^n`, so distinct subsets never share a dimension.
pub fn build_rate_half_vector_scheme(inst: &Instance, l: usize) -> Result<LinearScheme, AlignmentError> {
    if l != 1 {
        return Err(AlignmentError::UnsupportedL(l));
    }
    let part = feasible_partition(inst, 1)?;
    let n = spread_length(part.z());
    let spread = spread_family(n)?;
    let v = (1..=inst.num_messages)
        .map(|m| match part.p(m) {
            0 => (m, Matrix::zeros(FieldSpec::gf2(), n, n / 2)),
            t => (m, spread[t - 1].basis().clone()),
        })
        .collect();
    Ok(LinearScheme::new(FieldSpec::gf2(), n, v))
}

/// Messages sharing a subset with `m`, excluding `m`.
pub fn aligned_with(part: &AlignmentPartition, m: MessageId) -> BTreeSet<MessageId> {
    if part.p(m) == 0 {
        return BTreeSet::new();
    }
    part.subsets[part.p(m) - 1].iter().copied().filter(|&x| x != m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Destination;
    use crate::scheme::{simulate_exhaustive, verify, DEFAULT_BUDGET};
    use proptest::prelude::*;

    fn aligned_pair() -> Instance {
        Instance::new(
            4,
            vec![
                Destination::new(1, [1, 2], []),
                Destination::new(2, [1, 3], [4]),
                Destination::new(3, [2, 4], [3]),
            ],
        )
    }

    fn broken_chain() -> Instance {
        Instance::new(
            4,
            vec![
                Destination::new(1, [1, 3], [2, 4]),
                Destination::new(2, [2, 3], []),
                Destination::new(3, [3, 4], [2]),
            ],
        )
    }

    fn five_message_chain() -> Instance {
        Instance::new(
            5,
            vec![
                Destination::new(1, [1, 5], [2]),
                Destination::new(2, [1, 2], [3]),
                Destination::new(3, [2, 5], [1, 4]),
                Destination::new(4, [2, 4], [1, 3, 5]),
                Destination::new(5, [2, 3], [1, 4, 5]),
            ],
        )
    }

    fn cycle3() -> Instance {
        Instance::new(
            3,
            vec![
                Destination::new(1, [1], []),
                Destination::new(2, [2], [3]),
                Destination::new(3, [3], [2]),
            ],
        )
    }

    #[test]
    fn aligned_pair_partition_and_scheme() {
        let p = partition(&aligned_pair()).unwrap();
        assert_eq!(p.edges, vec![Edge { i: 3, j: 4, k: 1 }]);
        assert_eq!(p.subsets, vec![vec![1], vec![2], vec![3, 4]]);
        assert_eq!(p.z(), 3);

        let v = check_feasibility(&aligned_pair(), 2).unwrap();
        assert!(v.feasible);
        let s = build_scalar_scheme(&aligned_pair(), 2).unwrap();
        assert_eq!((s.n, s.field.order()), (3, 3));
        assert!(verify(&aligned_pair(), &s).unwrap().valid);
        assert!(simulate_exhaustive(&aligned_pair(), &s, DEFAULT_BUDGET).unwrap().is_ok());
    }

    #[test]
    fn broken_chain_is_infeasible_with_the_expected_witness() {
        let v = check_feasibility(&broken_chain(), 2).unwrap();
        assert!(!v.feasible);
        assert_eq!(v.witness, Some(Witness { i: 1, j: 4, k: 3 }));
        assert!(matches!(build_scalar_scheme(&broken_chain(), 2), Err(AlignmentError::Infeasible(_))));
    }

    #[test]
    fn five_message_chain_edges() {
        let p = partition(&five_message_chain()).unwrap();
        assert!(p.edges.contains(&Edge { i: 3, j: 4, k: 1 }));
        assert!(p.edges.contains(&Edge { i: 4, j: 5, k: 2 }));
    }

    #[test]
    fn complete_side_information_has_no_edges() {
        let inst = Instance::new(
            3,
            (1..=3).map(|k| Destination::new(k, [k], (1..=3).filter(move |&m| m != k))).collect(),
        );
        let p = partition(&inst).unwrap();
        assert!(p.edges.is_empty());
        assert_eq!(p.z(), 3);
    }

    #[test]
    fn cycle_of_three_at_rate_half() {
        let p = partition(&cycle3()).unwrap();
        assert_eq!(p.subsets, vec![vec![1], vec![2, 3]]);
        let s = build_scalar_scheme(&cycle3(), 1).unwrap();
        assert_eq!((s.n, s.field.order()), (2, 2));
        assert!(verify(&cycle3(), &s).unwrap().valid);
        let s = build_rate_half_vector_scheme(&cycle3(), 1).unwrap();
        assert_eq!(s.n, 2);
        assert!(verify(&cycle3(), &s).unwrap().valid);
        assert_eq!(build_rate_half_vector_scheme(&cycle3(), 2), Err(AlignmentError::UnsupportedL(2)));
    }

    #[test]
    fn single_message_and_single_subset() {
        let one = Instance::new(1, vec![Destination::new(1, [1], [])]);
        assert!(check_feasibility(&one, 1).unwrap().feasible);
        let s = build_scalar_scheme(&one, 1).unwrap();
        assert!(verify(&one, &s).unwrap().valid);

        // Messages 2 and 3 interfere together at destination 1 and each is
        // desired only where the other is held: one subset plus a singleton.
        let z1 = Instance::new(
            3,
            vec![
                Destination::new(1, [1], []),
                Destination::new(2, [2], [1, 3]),
                Destination::new(3, [3], [1, 2]),
            ],
        );
        let s = build_scalar_scheme(&z1, 1).unwrap();
        assert_eq!(s.v[&2], s.v[&3]);
        assert!(verify(&z1, &s).unwrap().valid);
    }

    #[test]
    fn spread_lengths() {
        assert_eq!(spread_length(3), 2);
        assert_eq!(spread_length(4), 4);
        assert_eq!(spread_length(5), 4);
        assert_eq!(spread_length(6), 6);
    }

    #[test]
    fn five_subsets_need_four_uses_with_spread() {
        // Five messages with full side information except one neighbor
        // each: no edges, so Z = 5.
        let inst = Instance::new(
            5,
            (1..=5)
                .map(|k| Destination::new(k, [k], (1..=5).filter(move |&m| m != k && m != k % 5 + 1)))
                .collect(),
        );
        assert_eq!(partition(&inst).unwrap().z(), 5);
        let s = build_rate_half_vector_scheme(&inst, 1).unwrap();
        assert_eq!(s.n, 4);
        assert!(s.v.values().all(|m| m.cols() == 2));
        assert!(verify(&inst, &s).unwrap().valid);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        any::<u64>().prop_map(|seed| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..7);
            let k = rng.gen_range(1..7);
            let l = rng.gen_range(1..3usize).min(m);
            let dests = (1..=k)
                .map(|id| {
                    let mut all: Vec<usize> = (1..=m).collect();
                    use rand::seq::SliceRandom;
                    all.shuffle(&mut rng);
                    let wants = all[..l].to_vec();
                    let has = all[l..].iter().copied().filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
                    Destination::new(id, wants, has)
                })
                .collect();
            Instance::new(m, dests)
        })
    }

    fn subset_sets(p: &AlignmentPartition) -> BTreeSet<BTreeSet<usize>> {
        p.subsets.iter().map(|s| s.iter().copied().collect()).collect()
    }

    proptest! {
        #[test]
        fn subsets_are_components(inst in arb_instance()) {
            let p = partition(&inst).unwrap();
            for e in &p.edges {
                prop_assert_eq!(p.p(e.i), p.p(e.j));
                let d = inst.destination(e.k);
                prop_assert!(e.i != e.j);
                for x in [e.i, e.j] {
                    prop_assert!(!d.wants.contains(&x) && !d.has.contains(&x));
                }
            }
            let total: usize = p.subsets.iter().map(Vec::len).sum();
            prop_assert_eq!(total + p.idle.len(), inst.num_messages);
            let firsts: Vec<usize> = p.subsets.iter().map(|s| s[0]).collect();
            prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn partition_ignores_destination_order_and_relabels(inst in arb_instance(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let base = subset_sets(&partition(&inst).unwrap());

            let mut dests = inst.destinations.clone();
            dests.shuffle(&mut rng);
            for (i, d) in dests.iter_mut().enumerate() {
                d.id = i + 1;
            }
            let shuffled = Instance::new(inst.num_messages, dests);
            prop_assert_eq!(&subset_sets(&partition(&shuffled).unwrap()), &base);

            let mut perm: Vec<usize> = (1..=inst.num_messages).collect();
            perm.shuffle(&mut rng);
            let relabeled = subset_sets(&partition(&inst.relabel_messages(&perm)).unwrap());
            let mapped: BTreeSet<BTreeSet<usize>> =
                base.iter().map(|s| s.iter().map(|&m| perm[m - 1]).collect()).collect();
            prop_assert_eq!(relabeled, mapped);
        }

        #[test]
        fn feasible_implies_scalar_scheme_decodes(inst in arb_instance()) {
            let l = inst.uniform_demand().unwrap();
            if check_feasibility(&inst, l).unwrap().feasible {
                let s = build_scalar_scheme(&inst, l).unwrap();
                prop_assert!(verify(&inst, &s).unwrap().valid);
                prop_assert!(simulate_exhaustive(&inst, &s, DEFAULT_BUDGET).unwrap().is_ok());
            }
        }

        #[test]
        fn extra_antidotes_never_hurt(inst in arb_instance(), pick in any::<prop::sample::Index>()) {
            let l = inst.uniform_demand().unwrap();
            let before = check_feasibility(&inst, l).unwrap().feasible;
            let mut more = inst.clone();
            let k = pick.index(more.destinations.len());
            let d = &mut more.destinations[k];
            if let Some(x) = (1..=inst.num_messages).find(|x| !d.wants.contains(x) && !d.has.contains(x)) {
                d.has.insert(x);
            }
            let after = check_feasibility(&more, l).unwrap().feasible;
            prop_assert!(!before || after);
        }
    }
}
