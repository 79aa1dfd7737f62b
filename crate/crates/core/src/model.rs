//! Index coding instances: destinations with desired and held message sets,
//! validation, normalization, the symmetric family generators and the JSON
//! instance file format.
//!
//! Message and destination ids are 1-based. Circular arithmetic over `K`
//! objects maps back into `1..=K`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type MessageId = usize;
pub type DestId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Destination {
    pub id: DestId,
    pub wants: BTreeSet<MessageId>,
    pub has: BTreeSet<MessageId>,
}

impl Destination {
    pub fn new(
        id: DestId,
        wants: impl IntoIterator<Item = MessageId>,
        has: impl IntoIterator<Item = MessageId>,
    ) -> Self {
        Self {
            id,
            wants: wants.into_iter().collect(),
            has: has.into_iter().collect(),
        }
    }

    /// Messages that are neither desired nor held here.
    pub fn interferers(&self, num_messages: usize) -> impl Iterator<Item = MessageId> + '_ {
        (1..=num_messages).filter(move |m| !self.wants.contains(m) && !self.has.contains(m))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    NeighboringAntidotes,
    NeighboringInterference,
    XNetwork,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyTag {
    pub kind: FamilyKind,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none", default)]
    pub u: Option<usize>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub a: Option<usize>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none", default)]
    pub l: Option<usize>,
}

impl FamilyTag {
    fn kud(kind: FamilyKind, k: usize, u: usize, d: usize) -> Self {
        Self {
            kind,
            k: Some(k),
            u: Some(u),
            d: Some(d),
            a: Some(u + d),
            l: None,
        }
    }

    pub fn x_network(k: usize, l: usize) -> Self {
        Self {
            kind: FamilyKind::XNetwork,
            k: Some(k),
            u: None,
            d: None,
            a: None,
            l: Some(l),
        }
    }

    /// `(K, U, D)` for the two neighboring families.
    pub fn kud_params(&self) -> Option<(usize, usize, usize)> {
        Some((self.k?, self.u?, self.d?))
    }

    /// `(K, L)` for the x-network family.
    pub fn kl_params(&self) -> Option<(usize, usize)> {
        Some((self.k?, self.l?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub num_messages: usize,
    pub destinations: Vec<Destination>,
    pub family: Option<FamilyTag>,
}

/// A single failed instance invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoMessages,
    NoDestinations,
    DestinationId { position: usize, id: DestId },
    EmptyWants { destination: DestId },
    UnknownMessage { destination: DestId, message: MessageId },
    DesiredAndHeld { destination: DestId, message: MessageId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoMessages => write!(f, "instance has no messages"),
            Violation::NoDestinations => write!(f, "instance has no destinations"),
            Violation::DestinationId { position, id } => {
                write!(f, "destination at position {position} has id {id}, expected {position}")
            }
            Violation::EmptyWants { destination } => {
                write!(f, "destination {destination}: desires no message")
            }
            Violation::UnknownMessage { destination, message } => {
                write!(f, "destination {destination}: unknown message id {message}")
            }
            Violation::DesiredAndHeld { destination, message } => {
                write!(f, "destination {destination}: message {message} both desired and held")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("cannot normalize: {0}")]
    CannotNormalize(String),
    #[error("parse error at {0}")]
    Parse(ParseError),
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Instance {
    pub fn new(num_messages: usize, destinations: Vec<Destination>) -> Self {
        Self {
            num_messages,
            destinations,
            family: None,
        }
    }

    pub fn num_destinations(&self) -> usize {
        self.destinations.len()
    }

    pub fn destination(&self, id: DestId) -> &Destination {
        &self.destinations[id - 1]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.num_messages == 0 {
            out.push(Violation::NoMessages);
        }
        if self.destinations.is_empty() {
            out.push(Violation::NoDestinations);
        }
        for (pos, d) in self.destinations.iter().enumerate() {
            if d.id != pos + 1 {
                out.push(Violation::DestinationId { position: pos + 1, id: d.id });
            }
            if d.wants.is_empty() {
                out.push(Violation::EmptyWants { destination: d.id });
            }
            for &m in d.wants.union(&d.has) {
                if m == 0 || m > self.num_messages {
                    out.push(Violation::UnknownMessage { destination: d.id, message: m });
                }
            }
            for &m in d.wants.intersection(&d.has) {
                out.push(Violation::DesiredAndHeld { destination: d.id, message: m });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(v))
        }
    }

    /// True when no message is desired by more than one destination.
    pub fn is_multiple_unicast(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.destinations
            .iter()
            .flat_map(|d| d.wants.iter())
            .all(|m| seen.insert(*m))
    }

    /// Number of destinations desiring each message (index 0 unused).
    pub fn demand_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_messages + 1];
        for d in &self.destinations {
            for &m in &d.wants {
                if m <= self.num_messages {
                    c[m] += 1;
                }
            }
        }
        c
    }

    /// `Some(L)` when every destination desires exactly `L` messages.
    pub fn uniform_demand(&self) -> Option<usize> {
        let l = self.destinations.first()?.wants.len();
        self.destinations.iter().all(|d| d.wants.len() == l).then_some(l)
    }

    /// Applies a message relabeling `m -> perm[m - 1]` to every set.
    pub fn relabel_messages(&self, perm: &[MessageId]) -> Instance {
        let map = |s: &BTreeSet<MessageId>| s.iter().map(|&m| perm[m - 1]).collect();
        Instance {
            num_messages: self.num_messages,
            destinations: self
                .destinations
                .iter()
                .map(|d| Destination {
                    id: d.id,
                    wants: map(&d.wants),
                    has: map(&d.has),
                })
                .collect(),
            family: None,
        }
    }
}

/// Exact per-message rates `R_1..R_M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateVector(pub Vec<Rational64>);

impl RateVector {
    pub fn uniform(m: usize, r: Rational64) -> Self {
        Self(vec![r; m])
    }

    /// Rate of message `m` (1-based).
    pub fn rate(&self, m: MessageId) -> Rational64 {
        self.0[m - 1]
    }

    pub fn min(&self) -> Option<Rational64> {
        self.0.iter().copied().min()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|r| fmt_rational(*r)).collect()
    }
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn fmt_rational(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Circular index: maps any integer into `1..=k`.
pub fn circ(i: i64, k: usize) -> usize {
    (i - 1).rem_euclid(k as i64) as usize + 1
}

/// Result of a normalization together with the origin of each new destination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub instance: Instance,
    /// Original destination id for each new destination. Virtual
    /// destinations point at the destination whose antidotes they copy.
    pub origin: Vec<DestId>,
    /// Flags destinations added only to pad message demand.
    pub is_virtual: Vec<bool>,
}

/// Splits every destination into destinations that each desire exactly `l`
/// messages, keeping its antidotes. Windows over the sorted desired set are
/// the first `l` messages followed by each one-step slide.
pub fn normalize_split(inst: &Instance, l: usize) -> Result<Normalized, ModelError> {
    if l == 0 {
        return Err(ModelError::CannotNormalize("L must be at least 1".into()));
    }
    let mut dests = Vec::new();
    let mut origin = Vec::new();
    for d in &inst.destinations {
        if d.wants.len() < l {
            return Err(ModelError::CannotNormalize(format!(
                "destination {} desires {} messages, fewer than L = {l}",
                d.id,
                d.wants.len()
            )));
        }
        let w: Vec<MessageId> = d.wants.iter().copied().collect();
        for start in 0..=w.len() - l {
            dests.push(Destination {
                id: dests.len() + 1,
                wants: w[start..start + l].iter().copied().collect(),
                has: d.has.clone(),
            });
            origin.push(d.id);
        }
    }
    let changed = dests.len() != inst.destinations.len();
    let n = dests.len();
    Ok(Normalized {
        instance: Instance {
            num_messages: inst.num_messages,
            destinations: dests,
            family: if changed { None } else { inst.family.clone() },
        },
        origin,
        is_virtual: vec![false; n],
    })
}

/// Groupcast normalization: every destination desires one message and every
/// message is desired by exactly `l` destinations, listed grouped by message
/// so that destination `k` desires message `ceil(k / l)`.
///
/// Destinations desiring several messages are replaced by single-demand
/// copies. Messages desired fewer than `l` times get virtual destinations
/// copying the antidotes of the first destination that desires them.
/// With `l = None` the largest demand count is used.
pub fn normalize_groupcast(inst: &Instance, l: Option<usize>) -> Result<Normalized, ModelError> {
    let mut per_msg: BTreeMap<MessageId, Vec<&Destination>> = BTreeMap::new();
    for d in &inst.destinations {
        for &m in &d.wants {
            per_msg.entry(m).or_default().push(d);
        }
    }
    let max = per_msg.values().map(Vec::len).max().unwrap_or(0);
    let l = l.unwrap_or(max);
    if l == 0 {
        return Err(ModelError::CannotNormalize("L must be at least 1".into()));
    }
    let mut dests = Vec::new();
    let mut origin = Vec::new();
    let mut is_virtual = Vec::new();
    for m in 1..=inst.num_messages {
        let list = per_msg.get(&m).map(Vec::as_slice).unwrap_or(&[]);
        if list.is_empty() {
            return Err(ModelError::CannotNormalize(format!("message {m} is desired by no destination")));
        }
        if list.len() > l {
            return Err(ModelError::CannotNormalize(format!(
                "message {m} is desired by {} destinations, more than L = {l}",
                list.len()
            )));
        }
        for slot in 0..l {
            let src = list.get(slot).copied().unwrap_or(list[0]);
            dests.push(Destination::new(dests.len() + 1, [m], src.has.iter().copied()));
            origin.push(src.id);
            is_virtual.push(slot >= list.len());
        }
    }
    let unchanged = dests.len() == inst.destinations.len()
        && dests.iter().zip(&inst.destinations).all(|(a, b)| a == b);
    Ok(Normalized {
        instance: Instance {
            num_messages: inst.num_messages,
            destinations: dests,
            family: if unchanged { inst.family.clone() } else { None },
        },
        origin,
        is_virtual,
    })
}

/// Neighboring-antidotes family: destination `k` desires `W_k` and holds the `U`
/// preceding and `D` following messages (circularly).
pub fn gen_neighboring_antidotes(k: usize, u: usize, d: usize) -> Result<Instance, ModelError> {
    if u > d {
        return Err(ModelError::BadParams(format!("need U <= D, got U = {u}, D = {d}")));
    }
    if u + d >= k {
        return Err(ModelError::BadParams(format!("need A = U + D < K, got A = {}, K = {k}", u + d)));
    }
    let dests = (1..=k)
        .map(|i| {
            let ii = i as i64;
            let has = (1..=u as i64)
                .map(|s| circ(ii - s, k))
                .chain((1..=d as i64).map(|s| circ(ii + s, k)));
            Destination::new(i, [i], has)
        })
        .collect();
    Ok(Instance {
        num_messages: k,
        destinations: dests,
        family: Some(FamilyTag::kud(FamilyKind::NeighboringAntidotes, k, u, d)),
    })
}

/// Neighboring-interference family, realized circularly: destination `k` desires `W_k` and
/// holds everything outside the window `W_{k-U}..W_{k+D}`.
///
/// When `K = D + 1` the window wraps onto the whole message set and every
/// destination holds nothing.
pub fn gen_neighboring_interference(k: usize, u: usize, d: usize) -> Result<Instance, ModelError> {
    if k == 0 {
        return Err(ModelError::BadParams("K must be at least 1".into()));
    }
    if u > d {
        return Err(ModelError::BadParams(format!("need U <= D, got U = {u}, D = {d}")));
    }
    if k % (d + 1) != 0 {
        return Err(ModelError::BadParams(format!("D + 1 = {} does not divide K = {k}", d + 1)));
    }
    let dests = (1..=k)
        .map(|i| {
            let ii = i as i64;
            let window: BTreeSet<usize> = (-(u as i64)..=d as i64).map(|s| circ(ii + s, k)).collect();
            Destination::new(i, [i], (1..=k).filter(|m| !window.contains(m)))
        })
        .collect();
    Ok(Instance {
        num_messages: k,
        destinations: dests,
        family: Some(FamilyTag::kud(FamilyKind::NeighboringInterference, k, u, d)),
    })
}

/// Message id of the `p`-th message (1-based) of source `s` in the
/// x-network family with `l` messages per source.
pub fn x_message_id(s: usize, p: usize, l: usize) -> MessageId {
    (s - 1) * l + p
}

/// X-network family, realized circularly: `K` sources with `L` messages each.
/// Destination `k` is connected to sources `k..k+L-1` and desires message
/// `L - i` of source `k + i`; it holds every message of the sources it is
/// not connected to.
pub fn gen_x_network(k: usize, l: usize) -> Result<Instance, ModelError> {
    x_network_unchecked(k, l).and_then(|inst| {
        if k % (l + 1) != 0 {
            return Err(ModelError::BadParams(format!("L + 1 = {} does not divide K = {k}", l + 1)));
        }
        if k < 2 * l {
            return Err(ModelError::BadParams(format!("need K >= 2L, got K = {k}, L = {l}")));
        }
        Ok(inst)
    })
}

/// The x-network pattern for any `K >= L >= 1`, without the periodicity
/// conditions. Used for the `K = 5, L = 3` built-in example.
pub fn x_network_unchecked(k: usize, l: usize) -> Result<Instance, ModelError> {
    if l == 0 || k < l {
        return Err(ModelError::BadParams(format!("need K >= L >= 1, got K = {k}, L = {l}")));
    }
    let dests = (1..=k)
        .map(|dk| {
            let sources: BTreeSet<usize> = (0..l).map(|i| circ((dk + i) as i64, k)).collect();
            let wants = (0..l).map(|i| x_message_id(circ((dk + i) as i64, k), l - i, l));
            let has = (1..=k)
                .filter(|s| !sources.contains(s))
                .flat_map(|s| (1..=l).map(move |p| x_message_id(s, p, l)));
            Destination::new(dk, wants, has)
        })
        .collect();
    Ok(Instance {
        num_messages: k * l,
        destinations: dests,
        family: Some(FamilyTag::x_network(k, l)),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DestinationFile {
    id: usize,
    wants: Vec<usize>,
    has: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    messages: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    family: Option<FamilyTag>,
    destinations: Vec<DestinationFile>,
}

pub(crate) fn parse_error(e: &serde_json::Error) -> ParseError {
    ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses an instance file and validates it. Invariant violations are
/// reported as a [`ModelError::Invalid`].
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let f: InstanceFile = serde_json::from_str(text).map_err(|e| ModelError::Parse(parse_error(&e)))?;
    let inst = Instance {
        num_messages: f.messages,
        destinations: f
            .destinations
            .into_iter()
            .map(|d| Destination::new(d.id, d.wants, d.has))
            .collect(),
        family: f.family,
    };
    inst.ensure_valid()?;
    Ok(inst)
}

/// Canonical instance file text: pretty JSON with sorted id lists and a
/// trailing newline.
pub fn serialize_instance(inst: &Instance) -> String {
    let f = InstanceFile {
        messages: inst.num_messages,
        family: inst.family.clone(),
        destinations: inst
            .destinations
            .iter()
            .map(|d| DestinationFile {
                id: d.id,
                wants: d.wants.iter().copied().collect(),
                has: d.has.iter().copied().collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&f).expect("instance serializes");
    s.push('\n');
    s
}

/// JSON value form of an instance, for embedding in larger reports.
pub fn instance_to_json(inst: &Instance) -> serde_json::Value {
    serde_json::from_str(&serialize_instance(inst)).expect("round trip")
}
