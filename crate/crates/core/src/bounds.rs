//! Outer bounds as checkable certificates `Σ_{m ∈ terms} R_m <= rhs`.
//!
//! Terms are a multiset: chain bounds may count a message more than once.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::alignment::partition;
use crate::model::{
    circ, fmt_rational, normalize_split, DestId, FamilyKind, FamilyTag, Instance, MessageId, ModelError,
    RateVector,
};

pub const DEFAULT_MAX_N: usize = 4;
pub const DEFAULT_CHAIN_BUDGET: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("chain enumeration exceeded the budget of {budget} steps ({} certificates found so far)", .partial.len())]
    BudgetExceeded { budget: u64, partial: Vec<BoundCertificate> },
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CertificateKind {
    Simple,
    Chain,
    FamilyFormula,
    GenieChain,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::Simple => "simple",
            CertificateKind::Chain => "chain",
            CertificateKind::FamilyFormula => "family-formula",
            CertificateKind::GenieChain => "genie-chain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Destination `k` decodes its own messages, then the interfering part
    /// of what `j` wants.
    Simple { k: DestId, j: DestId },
    /// `W_{i_0} <-> W_{i_1} <-> ... <-> W_{i_N}` with link `r` realized at
    /// destination `links[r]`, closed by destination `k` desiring `W_{i_N}`
    /// without holding `W_{i_0}`. Destination ids refer to the input
    /// instance.
    Chain { indices: Vec<MessageId>, links: Vec<DestId>, k: DestId },
    Family(FamilyTag),
    /// Destination `order[0]` learns every message outside the terms, then
    /// decodes `order[r].1` by acting as destination `order[r].0`.
    Genie { order: Vec<(DestId, Vec<MessageId>)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCertificate {
    pub kind: CertificateKind,
    /// Sorted, with repetitions.
    pub terms: Vec<MessageId>,
    pub rhs: Rational64,
    pub provenance: Provenance,
}

impl BoundCertificate {
    fn new(kind: CertificateKind, mut terms: Vec<MessageId>, rhs: Rational64, provenance: Provenance) -> Self {
        terms.sort_unstable();
        BoundCertificate { kind, terms, rhs, provenance }
    }

    pub fn lhs(&self, rates: &RateVector) -> Rational64 {
        self.terms.iter().map(|&m| rates.rate(m)).sum()
    }

    /// `rhs - lhs`; negative means the rate vector violates the bound.
    pub fn slack(&self, rates: &RateVector) -> Rational64 {
        self.rhs - self.lhs(rates)
    }

    pub fn violated_by(&self, rates: &RateVector) -> bool {
        self.slack(rates) < Rational64::from_integer(0)
    }

    /// Largest symmetric rate this certificate allows.
    pub fn symmetric_bound(&self) -> Rational64 {
        self.rhs / Rational64::from_integer(self.terms.len() as i64)
    }

    pub fn to_json(&self) -> Value {
        let provenance = match &self.provenance {
            Provenance::Simple { k, j } => json!({"k": k, "j": j}),
            Provenance::Chain { indices, links, k } => json!({"indices": indices, "links": links, "k": k}),
            Provenance::Family(tag) => serde_json::to_value(tag).expect("tag serializes"),
            Provenance::Genie { order } => {
                json!(order.iter().map(|(d, ms)| json!({"destination": d, "decodes": ms})).collect::<Vec<_>>())
            }
        };
        json!({
            "kind": self.kind.as_str(),
            "terms": self.terms,
            "rhs": fmt_rational(self.rhs),
            "provenance": provenance,
        })
    }
}

fn one() -> Rational64 {
    Rational64::from_integer(1)
}

/// For every ordered pair `(k, j)`: the messages `k` wants plus the
/// messages `j` wants that `k` neither wants nor holds sum to at most one.
/// `j = k` gives the single-destination bound. Deduplicated by terms.
pub fn simple_bounds(inst: &Instance) -> Vec<BoundCertificate> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in &inst.destinations {
        for j in &inst.destinations {
            let extra = j.wants.iter().filter(|m| !k.wants.contains(m) && !k.has.contains(m));
            let terms: Vec<MessageId> = k.wants.iter().copied().chain(extra.copied()).collect();
            if j.id != k.id && terms.len() == k.wants.len() {
                continue;
            }
            let cert = BoundCertificate::new(CertificateKind::Simple, terms, one(), Provenance::Simple { k: k.id, j: j.id });
            if seen.insert(cert.terms.clone()) {
                out.push(cert);
            }
        }
    }
    out
}

/// Alignment-chain bounds with `1 <= N <= max_n` links. The instance is
/// first split so that every destination desires exactly `l` messages;
/// bounds for the split instance hold for the original.
///
/// On budget exhaustion the certificates found so far are returned inside
/// the error; each of them is still a valid bound.
pub fn chain_bounds(inst: &Instance, l: usize, max_n: usize, budget: u64) -> Result<Vec<BoundCertificate>, BoundsError> {
    let norm = normalize_split(inst, l)?;
    let split = &norm.instance;
    let part = partition(split).map_err(|_| ModelError::CannotNormalize("non-uniform demand".into()))?;
    let m = split.num_messages;

    let mut links: BTreeMap<(MessageId, MessageId), Vec<DestId>> = BTreeMap::new();
    for e in &part.edges {
        links.entry((e.i, e.j)).or_default().push(e.k);
        links.entry((e.j, e.i)).or_default().push(e.k);
    }
    let mut neighbors: Vec<Vec<MessageId>> = vec![Vec::new(); m + 1];
    for &(a, b) in links.keys() {
        neighbors[a].push(b);
    }

    // A destination desiring `i_n` without holding `i0`.
    let closing = |i0: MessageId, i_n: MessageId| {
        split
            .destinations
            .iter()
            .find(|d| d.wants.contains(&i_n) && !d.has.contains(&i0))
            .map(|d| d.id)
    };

    struct Search<'a> {
        split: &'a Instance,
        origin: &'a [DestId],
        links: &'a BTreeMap<(MessageId, MessageId), Vec<DestId>>,
        neighbors: &'a [Vec<MessageId>],
        max_n: usize,
        budget: u64,
        steps: u64,
        found: BTreeMap<(Vec<MessageId>, Rational64), BoundCertificate>,
    }

    impl Search<'_> {
        fn dfs(
            &mut self,
            path: &mut Vec<MessageId>,
            via: &mut Vec<DestId>,
            closing: &dyn Fn(MessageId, MessageId) -> Option<DestId>,
        ) -> bool {
            self.steps += 1;
            if self.steps > self.budget {
                return false;
            }
            let n = via.len();
            if n >= 1 {
                if let Some(k) = closing(path[0], path[n]) {
                    let mut terms = path.clone();
                    for &j in via.iter() {
                        terms.extend(self.split.destination(j).wants.iter().copied());
                    }
                    let cert = BoundCertificate::new(
                        CertificateKind::Chain,
                        terms,
                        Rational64::from_integer(n as i64),
                        Provenance::Chain {
                            indices: path.clone(),
                            links: via.iter().map(|&j| self.origin[j - 1]).collect(),
                            k: self.origin[k - 1],
                        },
                    );
                    self.found.entry((cert.terms.clone(), cert.rhs)).or_insert(cert);
                }
            }
            if n == self.max_n {
                return true;
            }
            let last = path[n];
            for &next in &self.neighbors[last] {
                if path.contains(&next) {
                    continue;
                }
                for &j in &self.links[&(last, next)] {
                    path.push(next);
                    via.push(j);
                    let ok = self.dfs(path, via, closing);
                    path.pop();
                    via.pop();
                    if !ok {
                        return false;
                    }
                }
            }
            true
        }
    }

    let mut search = Search {
        split,
        origin: &norm.origin,
        links: &links,
        neighbors: &neighbors,
        max_n,
        budget,
        steps: 0,
        found: BTreeMap::new(),
    };
    let mut complete = true;
    for i0 in 1..=m {
        if !search.dfs(&mut vec![i0], &mut Vec::new(), &closing) {
            complete = false;
            break;
        }
    }
    let mut out: Vec<BoundCertificate> = search.found.into_values().collect();
    out.sort_by(|a, b| (a.rhs, a.terms.len(), &a.terms).cmp(&(b.rhs, b.terms.len(), &b.terms)));
    if complete {
        Ok(out)
    } else {
        Err(BoundsError::BudgetExceeded { budget, partial: out })
    }
}

/// Checks a decoding order and returns the certificate `Σ R <= 1` over the
/// union of the decoded sets. Valid when each `order[r].1` is desired by
/// `order[r].0`, the sets are disjoint, and every message of the union held
/// by `order[r].0` was decoded at an earlier step.
pub fn decode_chain_certificate(inst: &Instance, order: &[(DestId, Vec<MessageId>)]) -> Option<BoundCertificate> {
    let all: BTreeSet<MessageId> = order.iter().flat_map(|(_, ms)| ms.iter().copied()).collect();
    let total: usize = order.iter().map(|(_, ms)| ms.len()).sum();
    if all.len() != total || all.is_empty() {
        return None;
    }
    let mut known = BTreeSet::new();
    for (d, ms) in order {
        if *d == 0 || *d > inst.num_destinations() {
            return None;
        }
        let dest = inst.destination(*d);
        if !ms.iter().all(|m| dest.wants.contains(m)) {
            return None;
        }
        if dest.has.iter().any(|h| all.contains(h) && !known.contains(h)) {
            return None;
        }
        known.extend(ms.iter().copied());
    }
    Some(BoundCertificate::new(
        CertificateKind::GenieChain,
        all.into_iter().collect(),
        one(),
        Provenance::Genie { order: order.to_vec() },
    ))
}

/// Window `W_i..W_{i+D}` decoded by destinations `i, i+1, ..., i+D` in turn.
pub fn interference_window_certificate(inst: &Instance, i: usize, d: usize) -> Option<BoundCertificate> {
    let k = inst.num_messages;
    let order: Vec<(DestId, Vec<MessageId>)> =
        (0..=d).map(|r| circ((i + r) as i64, k)).map(|m| (m, vec![m])).collect();
    decode_chain_certificate(inst, &order)
}

/// `L(L+1)/2` messages of sources `k..k+L-1`: destination `k + r` decodes
/// the messages it wants from sources `k+r..k+L-1`.
pub fn x_network_certificate(inst: &Instance, k: usize, l: usize) -> Option<BoundCertificate> {
    let kk = inst.num_destinations();
    let window: Vec<usize> = (0..l).map(|s| circ((k + s) as i64, kk)).collect();
    let order: Vec<(DestId, Vec<MessageId>)> = (0..l)
        .map(|r| {
            let d = circ((k + r) as i64, kk);
            let from: BTreeSet<MessageId> = window[r..]
                .iter()
                .flat_map(|&s| (1..=l).map(move |p| crate::model::x_message_id(s, p, l)))
                .collect();
            (d, inst.destination(d).wants.iter().copied().filter(|m| from.contains(m)).collect())
        })
        .collect();
    decode_chain_certificate(inst, &order)
}

/// Capacity per message of a tagged symmetric family, with the certificate
/// it rests on.
pub fn symmetric_capacity(inst: &Instance) -> Result<(Rational64, BoundCertificate), BoundsError> {
    let tag = inst
        .family
        .clone()
        .ok_or_else(|| BoundsError::UnsupportedFamily("instance has no family tag".into()))?;
    let unsupported = || BoundsError::UnsupportedFamily(format!("{:?} with these parameters", tag.kind));
    match tag.kind {
        FamilyKind::NeighboringAntidotes => {
            let (k, u, d) = tag.kud_params().ok_or_else(unsupported)?;
            let a = u + d;
            let c = if a + 1 == k { one() } else { Rational64::new((u + 1) as i64, (k - a + 2 * u) as i64) };
            let cert = BoundCertificate::new(
                CertificateKind::FamilyFormula,
                (1..=k).collect(),
                c * Rational64::from_integer(k as i64),
                Provenance::Family(tag),
            );
            Ok((c, cert))
        }
        FamilyKind::NeighboringInterference => {
            let (_, _, d) = tag.kud_params().ok_or_else(unsupported)?;
            let cert = interference_window_certificate(inst, 1, d).ok_or_else(unsupported)?;
            Ok((Rational64::new(1, (d + 1) as i64), cert))
        }
        FamilyKind::XNetwork => {
            let (_, l) = tag.kl_params().ok_or_else(unsupported)?;
            let cert = x_network_certificate(inst, 1, l).ok_or_else(unsupported)?;
            Ok((Rational64::new(2, (l * (l + 1)) as i64), cert))
        }
        FamilyKind::Custom => Err(unsupported()),
    }
}

/// Every certificate this module can produce for `inst`: simple bounds,
/// chain bounds (when demand is uniform; partial on budget exhaustion) and
/// the family certificate when a tag is present.
pub fn all_certificates(inst: &Instance, max_n: usize, budget: u64) -> Vec<BoundCertificate> {
    let mut out = simple_bounds(inst);
    if let Some(l) = inst.uniform_demand() {
        match chain_bounds(inst, l, max_n, budget) {
            Ok(c) => out.extend(c),
            Err(BoundsError::BudgetExceeded { partial, .. }) => out.extend(partial),
            Err(_) => {}
        }
    }
    if let Ok((_, c)) = symmetric_capacity(inst) {
        out.push(c);
    }
    out
}

pub fn certificates_to_json(certs: &[BoundCertificate]) -> Value {
    Value::Array(certs.iter().map(BoundCertificate::to_json).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::check_feasibility;
    use crate::galois::FieldSpec;
    use crate::model::{gen_neighboring_antidotes, gen_neighboring_interference, gen_x_network, x_network_unchecked, Destination};
    use crate::symmetric::{build_antidote_scheme, build_interference_scheme, build_x_scheme, builtin_example};
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn two_groups() -> Instance {
        Instance::new(4, vec![Destination::new(1, [1, 2], []), Destination::new(2, [3, 4], [1, 2])])
    }

    fn three_dest_infeasible() -> Instance {
        Instance::new(
            4,
            vec![
                Destination::new(1, [1, 3], [2, 4]),
                Destination::new(2, [2, 3], []),
                Destination::new(3, [3, 4], [2]),
            ],
        )
    }

    fn five_dest_chain() -> Instance {
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

    #[test]
    fn simple_bound_on_two_groups() {
        let b = simple_bounds(&two_groups());
        assert!(b.iter().any(|c| c.terms == vec![1, 2, 3, 4] && c.rhs == one()));
    }

    #[test]
    fn complete_side_information_gives_single_destination_bounds() {
        let inst = Instance::new(3, (1..=3).map(|k| Destination::new(k, [k], (1..=3).filter(move |&m| m != k))).collect());
        let b = simple_bounds(&inst);
        let terms: Vec<Vec<usize>> = b.iter().map(|c| c.terms.clone()).collect();
        assert_eq!(terms, vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn pentagon_simple_bounds_allow_two_fifths() {
        let ex = builtin_example(2, FieldSpec::gf2()).unwrap();
        let rates = RateVector::uniform(5, r(2, 5));
        let b = simple_bounds(&ex.instance);
        assert!(b.iter().any(|c| c.terms.len() == 2));
        assert!(b.iter().all(|c| !c.violated_by(&rates)));
    }

    #[test]
    fn one_link_chain_on_the_infeasible_instance() {
        let b = chain_bounds(&three_dest_infeasible(), 2, 1, DEFAULT_CHAIN_BUDGET).unwrap();
        let c = b.iter().find(|c| c.terms == vec![1, 2, 3, 4]).expect("R1+R2+R3+R4 <= 1");
        assert_eq!(c.rhs, one());
        assert!(c.violated_by(&RateVector::uniform(4, r(1, 3))));
    }

    #[test]
    fn two_link_chain_with_repeated_terms() {
        let b = chain_bounds(&five_dest_chain(), 2, 2, DEFAULT_CHAIN_BUDGET).unwrap();
        let want = {
            let mut t = vec![3, 1, 5, 4, 1, 2, 5];
            t.sort();
            t
        };
        let c = b.iter().find(|c| c.terms == want && c.rhs == r(2, 1)).expect("chain certificate");
        assert_eq!(c.kind, CertificateKind::Chain);
        assert_eq!(c.terms.iter().filter(|&&m| m == 1).count(), 2);
    }

    #[test]
    fn chain_identity_for_infeasible_instances() {
        for n in 1..6i64 {
            for l in 1..4i64 {
                let terms = n * (l + 1) + 1;
                assert_eq!(r(terms, l + 1), r(n, 1) + r(1, l + 1));
                assert!(r(terms, l + 1) > r(n, 1));
            }
        }
    }

    /// A path of `N + 1` messages where destination `t` links `t` and
    /// `t + 1`, plus one destination closing only the full chain. Path
    /// messages `1..=N` are wanted by destinations holding everything else.
    fn path_instance(n: usize) -> Instance {
        let m = 2 * n + 1;
        // Messages 1..=n+1 form the path; link destinations want messages
        // n+2.. and hold everything but their pair.
        let mut dests = Vec::new();
        for t in 1..=n {
            let w = n + 1 + t;
            let has: Vec<usize> = (1..=m).filter(|&x| x != t && x != t + 1 && x != w).collect();
            dests.push(Destination::new(t, [w], has));
        }
        let has: Vec<usize> = (2..=m).filter(|&x| x != n + 1).collect();
        dests.push(Destination::new(n + 1, [n + 1], has));
        for t in 1..=n {
            let id = dests.len() + 1;
            dests.push(Destination::new(id, [t], (1..=m).filter(|&x| x != t)));
        }
        Instance::new(m, dests)
    }

    #[test]
    fn full_chain_caps_the_symmetric_rate() {
        for n in 1..=4 {
            let inst = path_instance(n);
            let b = chain_bounds(&inst, 1, n, DEFAULT_CHAIN_BUDGET).unwrap();
            assert_eq!(b.len(), 1);
            assert_eq!(b[0].terms.len(), 2 * n + 1);
            assert_eq!(b[0].symmetric_bound(), r(n as i64, 2 * n as i64 + 1));
            assert!(b[0].violated_by(&RateVector::uniform(inst.num_messages, r(1, 2))));
            assert!(!check_feasibility(&inst, 1).unwrap().feasible);
        }
    }

    #[test]
    fn budget_exhaustion_returns_partial_results() {
        match chain_bounds(&five_dest_chain(), 2, 4, 3) {
            Err(BoundsError::BudgetExceeded { budget: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn family_capacities() {
        let (c, cert) = symmetric_capacity(&gen_neighboring_antidotes(8, 1, 2).unwrap()).unwrap();
        assert_eq!(c, r(2, 7));
        assert_eq!(cert.kind, CertificateKind::FamilyFormula);
        assert_eq!(cert.symmetric_bound(), r(2, 7));

        let (c, cert) = symmetric_capacity(&gen_neighboring_interference(9, 1, 2).unwrap()).unwrap();
        assert_eq!(c, r(1, 3));
        assert_eq!(cert.terms, vec![1, 2, 3]);
        assert_eq!(cert.kind, CertificateKind::GenieChain);

        let (c, cert) = symmetric_capacity(&gen_x_network(8, 3).unwrap()).unwrap();
        assert_eq!(c, r(1, 6));
        assert_eq!(cert.terms.len(), 6);

        let (c, cert) = symmetric_capacity(&x_network_unchecked(5, 3).unwrap()).unwrap();
        assert_eq!((c, cert.terms.len()), (r(1, 6), 6));

        assert!(matches!(symmetric_capacity(&two_groups()), Err(BoundsError::UnsupportedFamily(_))));
        assert_eq!(symmetric_capacity(&gen_neighboring_antidotes(4, 1, 2).unwrap()).unwrap().0, one());
    }

    #[test]
    fn decode_chain_rejects_bad_orders() {
        let inst = gen_neighboring_interference(9, 1, 2).unwrap();
        // Destination 2 holds nothing in its window, destination 1 does not
        // hold 3: starting at 3 fails because 3 holds nothing decoded yet
        // but 1 is in its window.
        assert!(decode_chain_certificate(&inst, &[(1, vec![1]), (2, vec![2]), (3, vec![3])]).is_some());
        assert!(decode_chain_certificate(&inst, &[(1, vec![2])]).is_none());
        assert!(decode_chain_certificate(&inst, &[(1, vec![1]), (1, vec![1])]).is_none());
        let all: Vec<(usize, Vec<usize>)> = (1..=9).map(|m| (m, vec![m])).collect();
        assert!(decode_chain_certificate(&inst, &all).is_none());
    }

    #[test]
    fn family_schemes_meet_their_capacity() {
        for k in 4..=10 {
            for d in 0..=k - 3 {
                for u in 0..=d.min(k - 3 - d) {
                    let inst = gen_neighboring_antidotes(k, u, d).unwrap();
                    let s = build_antidote_scheme(k, u, d).unwrap();
                    let (c, cert) = symmetric_capacity(&inst).unwrap();
                    assert_eq!(s.symmetric_rate(), c);
                    assert_eq!(cert.slack(&s.rates()), r(0, 1));
                }
            }
        }
        for (k, u, d) in [(6, 0, 1), (9, 1, 2), (12, 2, 3), (4, 3, 3)] {
            let inst = gen_neighboring_interference(k, u, d).unwrap();
            let s = build_interference_scheme(k, u, d).unwrap();
            let (c, cert) = symmetric_capacity(&inst).unwrap();
            assert_eq!(s.symmetric_rate(), c);
            assert_eq!(cert.slack(&s.rates()), r(0, 1));
        }
        for (k, l) in [(4, 1), (6, 2), (8, 3), (12, 3), (10, 4)] {
            let inst = gen_x_network(k, l).unwrap();
            let s = build_x_scheme(k, l).unwrap();
            let (c, cert) = symmetric_capacity(&inst).unwrap();
            assert_eq!(s.symmetric_rate(), c);
            assert_eq!(cert.slack(&s.rates()), r(0, 1));
        }
    }

    #[test]
    fn builtin_rates_respect_every_certificate() {
        for id in 1..=3 {
            let ex = builtin_example(id, FieldSpec::gf2()).unwrap();
            let rates = ex.scheme.rates();
            for c in all_certificates(&ex.instance, 3, DEFAULT_CHAIN_BUDGET) {
                assert!(!c.violated_by(&rates), "example {id}: {:?}", c);
            }
        }
    }

    #[test]
    fn certificate_json() {
        let b = chain_bounds(&three_dest_infeasible(), 2, 1, DEFAULT_CHAIN_BUDGET).unwrap();
        let v = b[0].to_json();
        assert_eq!(v["kind"], "chain");
        assert_eq!(v["rhs"], "1/1");
    }

    fn arb_uniform() -> impl Strategy<Value = Instance> {
        any::<u64>().prop_map(|seed| {
            use rand::seq::SliceRandom;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..6);
            let k = rng.gen_range(1..5);
            let l = rng.gen_range(1..3usize).min(m - 1);
            let dests = (1..=k)
                .map(|id| {
                    let mut all: Vec<usize> = (1..=m).collect();
                    all.shuffle(&mut rng);
                    let has: Vec<usize> = all[l..].iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
                    Destination::new(id, all[..l].to_vec(), has)
                })
                .collect();
            Instance::new(m, dests)
        })
    }

    fn term_sets(certs: &[BoundCertificate]) -> BTreeSet<(Vec<usize>, Rational64)> {
        certs.iter().map(|c| (c.terms.clone(), c.rhs)).collect()
    }

    proptest! {
        #[test]
        fn certificates_follow_relabeling(inst in arb_uniform(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (1..=inst.num_messages).collect();
            perm.shuffle(&mut rng);
            let l = inst.uniform_demand().unwrap();
            let relabeled = inst.relabel_messages(&perm);
            let map = |certs: Vec<BoundCertificate>| -> BTreeSet<(Vec<usize>, Rational64)> {
                certs.into_iter().map(|c| {
                    let mut t: Vec<usize> = c.terms.iter().map(|&m| perm[m - 1]).collect();
                    t.sort();
                    (t, c.rhs)
                }).collect()
            };
            prop_assert_eq!(map(simple_bounds(&inst)), term_sets(&simple_bounds(&relabeled)));
            let a = chain_bounds(&inst, l, 3, DEFAULT_CHAIN_BUDGET).unwrap();
            let b = chain_bounds(&relabeled, l, 3, DEFAULT_CHAIN_BUDGET).unwrap();
            prop_assert_eq!(map(a), term_sets(&b));
        }

        #[test]
        fn infeasible_means_a_violated_chain(inst in arb_uniform()) {
            let l = inst.uniform_demand().unwrap();
            let feasible = check_feasibility(&inst, l).unwrap().feasible;
            let rates = RateVector::uniform(inst.num_messages, Rational64::new(1, l as i64 + 1));
            let certs = chain_bounds(&inst, l, inst.num_messages - 1, DEFAULT_CHAIN_BUDGET).unwrap();
            prop_assert_eq!(!feasible, certs.iter().any(|c| c.violated_by(&rates)));
        }
    }
}
