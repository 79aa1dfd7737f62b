//! Vector-linear index codes: representation, verification, decoder
//! synthesis, exhaustive zero-error simulation and the dimension audit for
//! the neighboring-antidotes family.
//!
//! Message `m` is precoded by an `n x L_m` matrix `V_m`; the transmitted
//! word is `S = Σ V_m x_m`. A destination `k` decodes `m` with an
//! `L_m x n` matrix `U_{m,k}` that must kill every message it neither
//! holds nor is decoding and be invertible on `V_m`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::galois::{Elem, FieldSpec, GaloisError, Matrix};
use crate::model::{fmt_rational, circ, DestId, FamilyKind, Instance, MessageId, ParseError, RateVector};

pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("malformed scheme: {0}")]
    Malformed(String),
    #[error("no decoder exists for message {message} at destination {destination}")]
    NoDecoderExists { message: MessageId, destination: DestId },
    #[error("{needed} exceeds the budget of {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("parse error at {0}")]
    Parse(ParseError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearScheme {
    pub field: FieldSpec,
    pub n: usize,
    pub v: BTreeMap<MessageId, Matrix>,
    pub u: Option<BTreeMap<(MessageId, DestId), Matrix>>,
}

impl LinearScheme {
    pub fn new(field: FieldSpec, n: usize, v: BTreeMap<MessageId, Matrix>) -> Self {
        Self { field, n, v, u: None }
    }

    /// `L_m`, the number of symbols carried for message `m`.
    pub fn dim(&self, m: MessageId) -> usize {
        self.v.get(&m).map_or(0, Matrix::cols)
    }

    pub fn rate(&self, m: MessageId) -> Rational64 {
        Rational64::new(self.dim(m) as i64, self.n as i64)
    }

    pub fn rates(&self) -> RateVector {
        let max = self.v.keys().copied().max().unwrap_or(0);
        RateVector((1..=max).map(|m| self.rate(m)).collect())
    }

    /// Smallest per-message rate.
    pub fn symmetric_rate(&self) -> Rational64 {
        self.v.keys().map(|&m| self.rate(m)).min().unwrap_or_default()
    }

    pub fn without_decoders(&self) -> Self {
        Self { u: None, ..self.clone() }
    }

    /// Renames message `m` to `perm[m - 1]` in every map key.
    pub fn relabel_messages(&self, perm: &[MessageId]) -> Self {
        Self {
            field: self.field,
            n: self.n,
            v: self.v.iter().map(|(&m, mat)| (perm[m - 1], mat.clone())).collect(),
            u: self
                .u
                .as_ref()
                .map(|u| u.iter().map(|(&(m, k), mat)| ((perm[m - 1], k), mat.clone())).collect()),
        }
    }

    /// Checks field, shape and id consistency against `inst`.
    pub fn check_shape(&self, inst: &Instance) -> Result<(), SchemeError> {
        let bad = |s: String| Err(SchemeError::Malformed(s));
        if self.n == 0 {
            return bad("block length n must be positive".into());
        }
        for m in 1..=inst.num_messages {
            if !self.v.contains_key(&m) {
                return bad(format!("no precoder for message {m}"));
            }
        }
        for (&m, mat) in &self.v {
            if m == 0 || m > inst.num_messages {
                return bad(format!("precoder for unknown message {m}"));
            }
            if mat.field() != self.field {
                return bad(format!("V_{m} is over {} instead of {}", mat.field(), self.field));
            }
            if mat.rows() != self.n {
                return bad(format!("V_{m} has {} rows, expected n = {}", mat.rows(), self.n));
            }
        }
        if let Some(u) = &self.u {
            for (&(m, k), mat) in u {
                if k == 0 || k > inst.num_destinations() || !inst.destination(k).wants.contains(&m) {
                    return bad(format!("decoder U_{{{m},{k}}} for a message destination {k} does not desire"));
                }
                if mat.field() != self.field {
                    return bad(format!("U_{{{m},{k}}} is over {}", mat.field()));
                }
                if mat.rows() != self.dim(m) || mat.cols() != self.n {
                    return bad(format!(
                        "U_{{{m},{k}}} is {}x{}, expected {}x{}",
                        mat.rows(),
                        mat.cols(),
                        self.dim(m),
                        self.n
                    ));
                }
            }
        }
        Ok(())
    }

    fn block(&self, msgs: impl IntoIterator<Item = MessageId>) -> Matrix {
        let parts: Vec<&Matrix> = msgs.into_iter().map(|m| &self.v[&m]).collect();
        Matrix::hstack_all(self.field, self.n, parts).expect("shapes checked")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    /// Properties 1 and 2 against explicit decoders.
    Decoders,
    /// Rank conditions on the precoders alone.
    Rank,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "failure", rename_all = "kebab-case")]
pub enum Diagnostic {
    /// `U_{m,k} V_i != 0` for a message `i` that `k` neither holds nor decodes as `m`.
    InterferenceLeak { message: MessageId, interferer: MessageId, destination: DestId },
    /// `U_{m,k} V_m` is singular.
    SingularOnDesired { message: MessageId, destination: DestId },
    MissingDecoder { message: MessageId, destination: DestId },
    /// Desired and interference spans meet outside zero at `destination`.
    Resolvability { destination: DestId },
    /// The desired precoders at `destination` are not jointly full rank.
    DesiredRankDeficient { destination: DestId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub valid: bool,
    pub mode: VerifyMode,
    pub diagnostics: Vec<Diagnostic>,
    pub rates: RateVector,
}

impl VerificationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.valid,
            "mode": self.mode,
            "diagnostics": self.diagnostics,
            "rates": self.rates.to_strings(),
        })
    }
}

/// Rank-mode verification when the scheme has no decoders, decoder checks
/// otherwise.
pub fn verify(inst: &Instance, s: &LinearScheme) -> Result<VerificationReport, SchemeError> {
    if s.u.is_some() {
        verify_decoders(inst, s)
    } else {
        verify_rank(inst, s)
    }
}

/// At every destination, `rank[V_des | V_int] = rank V_des + rank V_int`
/// and `rank V_des = Σ L_m` over the desired messages.
pub fn verify_rank(inst: &Instance, s: &LinearScheme) -> Result<VerificationReport, SchemeError> {
    s.check_shape(inst)?;
    let mut diagnostics = Vec::new();
    for d in &inst.destinations {
        let des = s.block(d.wants.iter().copied());
        let int = s.block(d.interferers(inst.num_messages));
        let rd = des.rank();
        if rd != des.cols() {
            diagnostics.push(Diagnostic::DesiredRankDeficient { destination: d.id });
        }
        if des.hstack(&int)?.rank() != rd + int.rank() {
            diagnostics.push(Diagnostic::Resolvability { destination: d.id });
        }
    }
    Ok(VerificationReport {
        valid: diagnostics.is_empty(),
        mode: VerifyMode::Rank,
        diagnostics,
        rates: s.rates(),
    })
}

/// Checks Properties 1 and 2 for every `(m, k)` with `m` desired at `k`.
pub fn verify_decoders(inst: &Instance, s: &LinearScheme) -> Result<VerificationReport, SchemeError> {
    s.check_shape(inst)?;
    let empty = BTreeMap::new();
    let u = s.u.as_ref().unwrap_or(&empty);
    let mut diagnostics = Vec::new();
    for d in &inst.destinations {
        for &m in &d.wants {
            let Some(um) = u.get(&(m, d.id)) else {
                diagnostics.push(Diagnostic::MissingDecoder { message: m, destination: d.id });
                continue;
            };
            for i in (1..=inst.num_messages).filter(|&i| i != m && !d.has.contains(&i)) {
                if !um.mul(&s.v[&i])?.is_zero() {
                    diagnostics.push(Diagnostic::InterferenceLeak { message: m, interferer: i, destination: d.id });
                }
            }
            if !um.mul(&s.v[&m])?.is_invertible() {
                diagnostics.push(Diagnostic::SingularOnDesired { message: m, destination: d.id });
            }
        }
    }
    Ok(VerificationReport {
        valid: diagnostics.is_empty(),
        mode: VerifyMode::Decoders,
        diagnostics,
        rates: s.rates(),
    })
}

/// Decoder for `m` at `d`: rows of the left nullspace of every other
/// non-held precoder, trimmed to `L_m` rows on which `V_m` stays invertible.
fn decoder_for(inst: &Instance, s: &LinearScheme, m: MessageId, k: DestId) -> Option<Matrix> {
    let d = inst.destination(k);
    let others = s.block((1..=inst.num_messages).filter(|&i| i != m && !d.has.contains(&i)));
    let left = others.left_nullspace();
    let proj = left.mul(&s.v[&m]).ok()?;
    let rows = proj.transpose().independent_columns();
    (rows.len() == s.dim(m)).then(|| left.select_rows(&rows))
}

/// Returns a copy of `s` carrying one valid decoder per desired
/// (message, destination) pair.
pub fn synthesize_decoders(inst: &Instance, s: &LinearScheme) -> Result<LinearScheme, SchemeError> {
    s.check_shape(inst)?;
    let mut u = BTreeMap::new();
    for d in &inst.destinations {
        for &m in &d.wants {
            let dec = decoder_for(inst, s, m, d.id).ok_or(SchemeError::NoDecoderExists {
                message: m,
                destination: d.id,
            })?;
            u.insert((m, d.id), dec);
        }
    }
    Ok(LinearScheme { u: Some(u), ..s.clone() })
}

pub type Tuple = BTreeMap<MessageId, Vec<Elem>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    /// The decoder output differs from the transmitted symbols.
    WrongDecode,
    /// Two tuples agree on the transmitted word and on every antidote of the
    /// destination but differ in the desired message, so no decoder exists.
    Collision,
    /// `U_{m,k} V_m` is singular, so the decoder cannot separate `tuple`
    /// from the all-zero tuple.
    SingularDecoder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: FailureKind,
    pub destination: DestId,
    pub message: MessageId,
    pub tuple: Tuple,
    pub decoded: Option<Vec<Elem>>,
    pub confusable_with: Option<Tuple>,
}

impl Counterexample {
    pub fn to_json(&self) -> Value {
        let tup = |t: &Tuple| -> Value {
            Value::Object(t.iter().map(|(m, v)| (m.to_string(), json!(v))).collect())
        };
        json!({
            "kind": self.kind,
            "destination": self.destination,
            "message": self.message,
            "tuple": tup(&self.tuple),
            "decoded": self.decoded,
            "confusable_with": self.confusable_with.as_ref().map(tup),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimOutcome {
    AllDecoded { tuples: u64 },
    Counterexample(Box<Counterexample>),
}

impl SimOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, SimOutcome::AllDecoded { .. })
    }
}

fn zero_tuple(s: &LinearScheme) -> Tuple {
    s.v.iter().map(|(&m, mat)| (m, vec![0; mat.cols()])).collect()
}

/// Worker count: `ICX_THREADS` if set, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var("ICX_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t: &usize| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
}

/// A collision at some destination, found from the kernel of the
/// non-held precoders there. Used when no linear decoder exists.
fn collision(inst: &Instance, s: &LinearScheme) -> Option<Counterexample> {
    for d in &inst.destinations {
        let msgs: Vec<MessageId> = (1..=inst.num_messages).filter(|i| !d.has.contains(i)).collect();
        let mut offsets = Vec::with_capacity(msgs.len());
        let mut off = 0;
        for &m in &msgs {
            offsets.push(off);
            off += s.dim(m);
        }
        let kernel = s.block(msgs.iter().copied()).nullspace();
        for &want in &d.wants {
            let pos = msgs.iter().position(|&m| m == want).expect("desired is not held");
            for c in 0..kernel.cols() {
                let x = kernel.column(c);
                let part = &x[offsets[pos]..offsets[pos] + s.dim(want)];
                if part.iter().any(|&v| v != 0) {
                    let mut tuple = zero_tuple(s);
                    for (idx, &m) in msgs.iter().enumerate() {
                        tuple.insert(m, x[offsets[idx]..offsets[idx] + s.dim(m)].to_vec());
                    }
                    return Some(Counterexample {
                        kind: FailureKind::Collision,
                        destination: d.id,
                        message: want,
                        tuple,
                        decoded: None,
                        confusable_with: Some(zero_tuple(s)),
                    });
                }
            }
        }
    }
    None
}

/// Encodes every message tuple, decodes every desired message at every
/// destination from the transmitted word and its antidotes, and checks
/// exact recovery. Schemes without decoders get synthesized ones.
///
/// Tuples are enumerated as an odometer over all `Σ L_m` symbols. The
/// decoding error `D_{m,k} (S - antidote part) - x_m` of every pair is
/// tracked incrementally as digits change, which is exact because each
/// decoder is linear; a tuple passes when every error entry is zero.
pub fn simulate_exhaustive(inst: &Instance, s: &LinearScheme, budget: u64) -> Result<SimOutcome, SchemeError> {
    s.check_shape(inst)?;
    let f = s.field;
    let q = f.order();
    let symbols: Vec<(MessageId, usize)> = s
        .v
        .iter()
        .flat_map(|(&m, mat)| (0..mat.cols()).map(move |c| (m, c)))
        .collect();
    let n_sym = symbols.len();
    let tuples = (q as u128).checked_pow(n_sym as u32).filter(|&t| t <= budget as u128);
    let Some(tuples) = tuples.map(|t| t as u64) else {
        return Err(SchemeError::BudgetExceeded {
            needed: format!("{q}^{n_sym} message tuples"),
            budget,
        });
    };

    let with_u = match &s.u {
        Some(_) => s.clone(),
        None => match synthesize_decoders(inst, s) {
            Ok(x) => x,
            Err(SchemeError::NoDecoderExists { .. }) => {
                let ce = collision(inst, s).expect("a failed decoder implies a kernel collision");
                return Ok(SimOutcome::Counterexample(Box::new(ce)));
            }
            Err(e) => return Err(e),
        },
    };
    let u = with_u.u.as_ref().expect("decoders present");

    // One slot per decoded symbol; `pairs` records where each pair starts.
    let mut pairs: Vec<(DestId, MessageId, usize, Matrix)> = Vec::new();
    let mut slots = 0;
    for d in &inst.destinations {
        for &m in &d.wants {
            let Some(um) = u.get(&(m, d.id)) else {
                return Err(SchemeError::Malformed(format!("no decoder U_{{{m},{}}}", d.id)));
            };
            let g = um.mul(&s.v[&m])?;
            let Some(ginv) = g.inverse() else {
                let kern = g.nullspace();
                let mut tuple = zero_tuple(s);
                tuple.insert(m, kern.column(0));
                return Ok(SimOutcome::Counterexample(Box::new(Counterexample {
                    kind: FailureKind::SingularDecoder,
                    destination: d.id,
                    message: m,
                    tuple,
                    decoded: None,
                    confusable_with: Some(zero_tuple(s)),
                })));
            };
            pairs.push((d.id, m, slots, ginv.mul(um)?));
            slots += s.dim(m);
        }
    }

    // Error contribution of one unit of each symbol.
    let mut unit: Vec<Vec<(usize, Elem)>> = vec![Vec::new(); n_sym];
    for (j, &(i, c)) in symbols.iter().enumerate() {
        let col = s.v[&i].column(c);
        for (k, m, base, dec) in &pairs {
            if inst.destination(*k).has.contains(&i) {
                continue;
            }
            let mut w = dec.apply(&col)?;
            if i == *m {
                w[c] = f.sub(w[c], 1);
            }
            unit[j].extend(w.into_iter().enumerate().filter(|(_, v)| *v != 0).map(|(r, v)| (base + r, v)));
        }
    }

    // Digit value -> field element, and per-step increments. Prime fields
    // count 0, 1, ..., p-1 so every step adds 1. Binary fields walk a Gray
    // code so every step adds a single power of two.
    let binary = f.extension_degree();
    let elem = |d: u64| -> Elem {
        match binary {
            None => d as Elem,
            Some(_) => (d ^ (d >> 1)) as Elem,
        }
    };
    let step_kind = |d: u64| -> usize {
        match binary {
            None => 0,
            Some(_) => (elem(d) ^ elem((d + 1) % q)).trailing_zeros() as usize,
        }
    };
    let kinds = binary.map_or(1, |m| m as usize);
    let updates: Vec<Vec<Vec<(usize, Elem)>>> = unit
        .iter()
        .map(|list| {
            (0..kinds)
                .map(|b| {
                    let scale = if binary.is_some() { 1 << b } else { 1 };
                    list.iter().map(|&(slot, v)| (slot, f.mul(v, scale))).collect()
                })
                .collect()
        })
        .collect();

    let run_chunk = |start: u64, end: u64| -> Option<(u64, Vec<u64>)> {
        let mut digits = vec![0u64; n_sym];
        let mut rest = start;
        for d in digits.iter_mut() {
            *d = rest % q;
            rest /= q;
        }
        let mut err = vec![0 as Elem; slots];
        for (j, &d) in digits.iter().enumerate() {
            let x = elem(d);
            if x != 0 {
                for &(slot, v) in &unit[j] {
                    err[slot] = f.add(err[slot], f.mul(v, x));
                }
            }
        }
        let mut nonzero = err.iter().filter(|&&v| v != 0).count();
        for idx in start..end {
            if nonzero > 0 {
                return Some((idx, digits));
            }
            let mut j = 0;
            while j < n_sym {
                let old = digits[j];
                for &(slot, v) in &updates[j][step_kind(old)] {
                    let o = err[slot];
                    let nv = f.add(o, v);
                    if o == 0 {
                        nonzero += 1;
                    }
                    if nv == 0 {
                        nonzero -= 1;
                    }
                    err[slot] = nv;
                }
                digits[j] = (old + 1) % q;
                if digits[j] != 0 {
                    break;
                }
                j += 1;
            }
        }
        None
    };

    let threads = (thread_count() as u64).min(tuples / 4096 + 1).max(1);
    let chunk = tuples.div_ceil(threads);
    let first = if threads == 1 {
        run_chunk(0, tuples)
    } else {
        std::thread::scope(|sc| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let (a, b) = (t * chunk, ((t + 1) * chunk).min(tuples));
                    let run = &run_chunk;
                    sc.spawn(move || run(a, b))
                })
                .collect();
            handles
                .into_iter()
                .filter_map(|h| h.join().expect("simulation worker panicked"))
                .min_by_key(|(idx, _)| *idx)
        })
    };

    let Some((_, digits)) = first else {
        return Ok(SimOutcome::AllDecoded { tuples });
    };
    let mut tuple = zero_tuple(s);
    for (j, &(m, c)) in symbols.iter().enumerate() {
        tuple.get_mut(&m).expect("symbol of known message")[c] = elem(digits[j]);
    }
    let word = encode(s, &tuple)?;
    for (k, m, _, dec) in &pairs {
        let got = decode_at(inst, s, dec, *k, &word, &tuple)?;
        if got != tuple[m] {
            return Ok(SimOutcome::Counterexample(Box::new(Counterexample {
                kind: FailureKind::WrongDecode,
                destination: *k,
                message: *m,
                tuple,
                decoded: Some(got),
                confusable_with: None,
            })));
        }
    }
    unreachable!("the incremental error count flagged a tuple that decodes everywhere")
}

/// `S = Σ V_m x_m`.
pub fn encode(s: &LinearScheme, tuple: &Tuple) -> Result<Vec<Elem>, SchemeError> {
    let f = s.field;
    let mut word = vec![0; s.n];
    for (m, x) in tuple {
        let part = s.v[m].apply(x)?;
        for (w, p) in word.iter_mut().zip(part) {
            *w = f.add(*w, p);
        }
    }
    Ok(word)
}

/// Applies `dec` to the word after cancelling the antidotes of `k`.
fn decode_at(
    inst: &Instance,
    s: &LinearScheme,
    dec: &Matrix,
    k: DestId,
    word: &[Elem],
    tuple: &Tuple,
) -> Result<Vec<Elem>, SchemeError> {
    let f = s.field;
    let mut y = word.to_vec();
    for &a in &inst.destination(k).has {
        for (w, p) in y.iter_mut().zip(s.v[&a].apply(&tuple[&a])?) {
            *w = f.sub(*w, p);
        }
    }
    Ok(dec.apply(&y)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditCheck {
    pub name: String,
    pub lhs: Rational64,
    pub rhs: Rational64,
}

impl AuditCheck {
    pub fn slack(&self) -> Rational64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// Interference-dimension counts for the neighboring-antidotes family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionAudit {
    /// `alpha[j - 1]` is the sum over `i` of `dim(V_i + ... + V_{i+j-1})`.
    pub alpha: Vec<usize>,
    /// The headline inequality comes first.
    pub checks: Vec<AuditCheck>,
}

impl DimensionAudit {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(AuditCheck::holds)
    }

    pub fn main_check(&self) -> &AuditCheck {
        &self.checks[0]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "holds": self.holds(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "lhs": fmt_rational(c.lhs),
                "rhs": fmt_rational(c.rhs),
                "slack": fmt_rational(c.slack()),
                "holds": c.holds(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Computes `α_1..α_{K-A-1}` and checks
/// `α_{K-A-1} >= (K-A-1+U)/(U+1) · α_1`, together with the two
/// intermediate inequalities it is assembled from.
pub fn dimension_audit(inst: &Instance, s: &LinearScheme) -> Result<DimensionAudit, SchemeError> {
    let tag = inst
        .family
        .as_ref()
        .filter(|t| t.kind == FamilyKind::NeighboringAntidotes)
        .ok_or_else(|| SchemeError::UnsupportedFamily("the audit needs a neighboring-antidotes instance".into()))?;
    let (k, u, d) = tag
        .kud_params()
        .ok_or_else(|| SchemeError::UnsupportedFamily("family tag lacks K, U, D".into()))?;
    let a = u + d;
    if a + 2 > k {
        return Err(SchemeError::UnsupportedFamily(format!(
            "the audit needs A <= K - 2, got A = {a}, K = {k}"
        )));
    }
    s.check_shape(inst)?;
    let top = k - a - 1;
    let alpha: Vec<usize> = (1..=top)
        .map(|j| {
            (1..=k)
                .map(|i| s.block((0..j).map(|t| circ((i + t) as i64, k))).rank())
                .sum()
        })
        .collect();
    let al = |j: usize| Rational64::from_integer(alpha[j - 1] as i64);
    let up1 = (u + 1) as i64;
    let mut checks = vec![AuditCheck {
        name: format!("alpha_{top} >= ({top}+{u})/({u}+1) alpha_1"),
        lhs: al(top),
        rhs: Rational64::new((top + u) as i64, up1) * al(1),
    }];
    let (m, j) = if top % (u + 1) != 0 {
        (top / (u + 1), top % (u + 1))
    } else {
        (top / (u + 1) - 1, u + 1)
    };
    checks.push(AuditCheck {
        name: format!("alpha_{top} >= {m} alpha_1 + alpha_{j}"),
        lhs: al(top),
        rhs: Rational64::from_integer(m as i64) * al(1) + al(j),
    });
    for j in 2..=(u + 1).min(top) {
        checks.push(AuditCheck {
            name: format!("alpha_{j} >= alpha_{} + alpha_1/({u}+1)", j - 1),
            lhs: al(j),
            rhs: al(j - 1) + al(1) / up1,
        });
    }
    Ok(DimensionAudit { alpha, checks })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FieldFile {
    Prime {
        p: u32,
    },
    Gf2m {
        m: u32,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        poly: Option<u64>,
    },
}

pub fn field_from_value(v: &Value) -> Result<FieldSpec, SchemeError> {
    let ff: FieldFile =
        serde_json::from_value(v.clone()).map_err(|e| SchemeError::Malformed(format!("field: {e}")))?;
    Ok(match ff {
        FieldFile::Prime { p } => FieldSpec::prime(p)?,
        FieldFile::Gf2m { m, poly: None } => FieldSpec::gf2m(m)?,
        FieldFile::Gf2m { m, poly: Some(p) } => FieldSpec::gf2m_with_poly(m, p)?,
    })
}

pub fn field_to_value(f: FieldSpec) -> Value {
    let ff = match (f.prime_modulus(), f.extension_degree()) {
        (Some(p), _) => FieldFile::Prime { p },
        (None, Some(m)) => {
            let poly = f.reduction_poly().filter(|&p| Some(p) != crate::galois::default_poly(m));
            FieldFile::Gf2m { m, poly }
        }
        (None, None) => unreachable!("every field is prime or binary"),
    };
    serde_json::to_value(ff).expect("field serializes")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    field: Value,
    n: usize,
    #[serde(rename = "V")]
    v: BTreeMap<String, Vec<Vec<i64>>>,
    #[serde(rename = "U", default)]
    u: Option<BTreeMap<String, Vec<Vec<i64>>>>,
}

fn matrix_from_rows(f: FieldSpec, rows: &[Vec<i64>], empty_cols: usize) -> Result<Matrix, SchemeError> {
    if rows.is_empty() {
        return Ok(Matrix::zeros(f, 0, empty_cols));
    }
    Ok(Matrix::from_int_rows(f, rows)?)
}

fn parse_id(key: &str) -> Result<usize, SchemeError> {
    key.trim()
        .parse()
        .map_err(|_| SchemeError::Malformed(format!("bad id {key:?}")))
}

/// Parses a scheme file. Shapes are checked against an instance later, by
/// [`verify`] and friends.
pub fn parse_scheme(text: &str) -> Result<LinearScheme, SchemeError> {
    let sf: SchemeFile = serde_json::from_str(text).map_err(|e| SchemeError::Parse(crate::model::parse_error(&e)))?;
    let field = field_from_value(&sf.field)?;
    let mut v = BTreeMap::new();
    for (key, rows) in &sf.v {
        v.insert(parse_id(key)?, matrix_from_rows(field, rows, 0)?);
    }
    let u = match &sf.u {
        None => None,
        Some(map) => {
            let mut out = BTreeMap::new();
            for (key, rows) in map {
                let (m, k) = key
                    .split_once('@')
                    .ok_or_else(|| SchemeError::Malformed(format!("decoder key {key:?} is not m@k")))?;
                out.insert((parse_id(m)?, parse_id(k)?), matrix_from_rows(field, rows, sf.n)?);
            }
            Some(out)
        }
    };
    Ok(LinearScheme { field, n: sf.n, v, u })
}

pub fn scheme_to_json(s: &LinearScheme) -> Value {
    let mut obj = Map::new();
    obj.insert("field".into(), field_to_value(s.field));
    obj.insert("n".into(), json!(s.n));
    let v: Map<String, Value> = s.v.iter().map(|(m, mat)| (m.to_string(), json!(mat.to_int_rows()))).collect();
    obj.insert("V".into(), Value::Object(v));
    if let Some(u) = &s.u {
        let u: Map<String, Value> = u
            .iter()
            .map(|((m, k), mat)| (format!("{m}@{k}"), json!(mat.to_int_rows())))
            .collect();
        obj.insert("U".into(), Value::Object(u));
    }
    Value::Object(obj)
}

/// Canonical scheme file text with a trailing newline.
pub fn serialize_scheme(s: &LinearScheme) -> String {
    let mut out = serde_json::to_string_pretty(&scheme_to_json(s)).expect("scheme serializes");
    out.push('\n');
    out
}

/// Messages not held at `k`, excluding `k`'s desired set.
pub fn interference_set(inst: &Instance, k: DestId) -> BTreeSet<MessageId> {
    inst.destination(k).interferers(inst.num_messages).collect()
}
