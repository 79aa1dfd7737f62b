//! Reduction from groupcast to multiple unicast, and the translation of
//! linear schemes in both directions.
//!
//! Each message `W_i`, desired by `L` destinations after normalization,
//! becomes `L + 1` messages `W̄_{i,0..=L}`. Copy `j >= 1` is desired by a
//! stand-in for the `j`-th destination that wanted `W_i`, which also holds
//! every sibling copy and every auxiliary copy `W̄_{·,0}`. The auxiliary
//! copy `W̄_{i,0}` is desired by a new destination holding everything
//! except the copies of `W_i`. A scheme for one instance yields a scheme
//! for the other at the same rates.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};
use thiserror::Error;

use crate::galois::{GaloisError, Matrix, Subspace};
use crate::model::{normalize_groupcast, Destination, DestId, Instance, MessageId, ModelError};
use crate::scheme::{verify, LinearScheme, SchemeError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UnicastError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error("scheme does not verify on the {0} instance")]
    InvalidScheme(&'static str),
    #[error("translation needs the auxiliary messages")]
    NoAuxiliary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnicastMap {
    /// Groupcast form: destination `(i-1)L + j` desires `W_i` alone.
    pub original: Instance,
    /// Original destination each groupcast destination stands for.
    pub origin: Vec<DestId>,
    pub is_virtual: Vec<bool>,
    pub transformed: Instance,
    pub l: usize,
    pub with_aux: bool,
    /// `(i, j) -> id` of `W̄_{i,j}`; `D̄_{i,j}` has the same id.
    pub id_map: BTreeMap<(MessageId, usize), MessageId>,
}

impl UnicastMap {
    pub fn id(&self, i: MessageId, j: usize) -> MessageId {
        self.id_map[&(i, j)]
    }

    /// Re-keys the decoders of a scheme for the instance given to
    /// [`to_unicast`] onto the groupcast destinations.
    pub fn groupcast_scheme(&self, s: &LinearScheme) -> LinearScheme {
        let u = s.u.as_ref().and_then(|su| {
            self.original
                .destinations
                .iter()
                .map(|g| {
                    let m = *g.wants.first().expect("groupcast destinations desire one message");
                    su.get(&(m, self.origin[g.id - 1])).map(|d| ((m, g.id), d.clone()))
                })
                .collect::<Option<BTreeMap<_, _>>>()
        });
        LinearScheme { u, ..s.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "L": self.l,
            "auxiliary": self.with_aux,
            "id_map": self.id_map.iter().map(|(&(i, j), &id)| json!({"i": i, "j": j, "id": id})).collect::<Vec<_>>(),
            "groupcast_origin": self.origin,
        })
    }
}

/// Builds the multiple-unicast instance. `l = None` takes `L` from the
/// largest demand count. With `with_aux = false` the auxiliary messages and
/// destinations are left out and ids become `(i-1)L + j`.
pub fn to_unicast(inst: &Instance, l: Option<usize>, with_aux: bool) -> Result<UnicastMap, UnicastError> {
    inst.ensure_valid()?;
    let norm = normalize_groupcast(inst, l)?;
    let g = norm.instance;
    let m = g.num_messages;
    let l = g.num_destinations() / m;
    let copies: Vec<usize> = if with_aux { (0..=l).collect() } else { (1..=l).collect() };
    let mut id_map = BTreeMap::new();
    for i in 1..=m {
        for &j in &copies {
            id_map.insert((i, j), id_map.len() + 1);
        }
    }
    let mut dests = Vec::with_capacity(id_map.len());
    for (&(i, j), &id) in &id_map {
        let has: BTreeSet<MessageId> = if j == 0 {
            id_map.iter().filter(|(&(ii, _), _)| ii != i).map(|(_, &x)| x).collect()
        } else {
            let k = &g.destinations[(i - 1) * l + j - 1];
            id_map
                .iter()
                .filter(|(&(ii, jj), _)| k.has.contains(&ii) || jj == 0 || (ii == i && jj != j))
                .map(|(_, &x)| x)
                .collect()
        };
        dests.push(Destination { id, wants: BTreeSet::from([id]), has });
    }
    let transformed = Instance::new(id_map.len(), dests);
    Ok(UnicastMap {
        original: g,
        origin: norm.origin,
        is_virtual: norm.is_virtual,
        transformed,
        l,
        with_aux,
        id_map,
    })
}

/// Lifts a scheme for the instance given to [`to_unicast`]: every copy
/// `j >= 1` reuses `V_i`, the auxiliary copy takes identity columns
/// completing `colspan(V_i)`. Decoders are carried over when `s` has them
/// for every destination.
pub fn scheme_to_unicast(map: &UnicastMap, s: &LinearScheme) -> Result<LinearScheme, UnicastError> {
    let s = &map.groupcast_scheme(s);
    if !verify(&map.original, s)?.valid {
        return Err(UnicastError::InvalidScheme("groupcast"));
    }
    let f = s.field;
    let mut v = BTreeMap::new();
    let mut u = s.u.as_ref().map(|_| BTreeMap::new());
    for (&(i, j), &id) in &map.id_map {
        let vi = &s.v[&i];
        if j == 0 {
            let aux = vi.complement_columns();
            if let Some(u) = u.as_mut() {
                // Rows annihilating V_i; they are injective on the complement.
                u.insert((id, id), vi.left_nullspace());
            }
            v.insert(id, aux);
        } else {
            v.insert(id, vi.clone());
            let k = (i - 1) * map.l + j;
            let dec = s.u.as_ref().and_then(|su| su.get(&(i, k)));
            match (u.as_mut(), dec) {
                (Some(u), Some(d)) => {
                    u.insert((id, id), d.clone());
                }
                _ => u = None,
            }
        }
    }
    let mut out = LinearScheme::new(f, s.n, v);
    out.u = u;
    Ok(out)
}

/// Pulls a unicast scheme back to the groupcast form `map.original`.
/// `V_i` spans the intersection of the column spaces of the copies
/// `j >= 1`. Decoders keep the rows of `Ū_{i,j}` that stay independent on
/// `V_i`. Without decoders the result also verifies on the instance given
/// to [`to_unicast`], whose destinations are unions of groupcast ones.
pub fn scheme_to_groupcast(map: &UnicastMap, s: &LinearScheme) -> Result<LinearScheme, UnicastError> {
    if !verify(&map.transformed, s)?.valid {
        return Err(UnicastError::InvalidScheme("unicast"));
    }
    let f = s.field;
    let m = map.original.num_messages;
    let mut v = BTreeMap::new();
    for i in 1..=m {
        let mut acc = Subspace::whole(f, s.n);
        for j in 1..=map.l {
            acc = acc.intersect(&Subspace::span(&s.v[&map.id(i, j)]))?;
        }
        v.insert(i, acc.basis().clone());
    }
    let u = match &s.u {
        None => None,
        Some(su) => {
            let mut u = BTreeMap::new();
            for i in 1..=m {
                for j in 1..=map.l {
                    let id = map.id(i, j);
                    let ub = &su[&(id, id)];
                    let proj = ub.mul(&v[&i])?;
                    let rows = proj.transpose().independent_columns();
                    u.insert((i, (i - 1) * map.l + j), ub.select_rows(&rows));
                }
            }
            Some(u)
        }
    };
    let mut out = LinearScheme::new(f, s.n, v);
    out.u = u;
    Ok(out)
}

/// One inequality in the rank chain for message `i`: after intersecting
/// copies `1..=step`, the intersection keeps at least
/// `Σ rank V̄_{i,j} - (step - 1)(n - rank V̄_{i,0})` dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub message: MessageId,
    pub step: usize,
    pub dim: usize,
    pub bound: i64,
}

impl ChainStep {
    pub fn slack(&self) -> i64 {
        self.dim as i64 - self.bound
    }
}

/// Rank chain of a unicast scheme, one entry per message and per number of
/// intersected copies. Also returns, per message, the check that the copies
/// `j >= 1` together span at most `n - rank V̄_{i,0}` dimensions, which is
/// what makes each step hold.
pub fn intersection_rank_chain(
    map: &UnicastMap,
    s: &LinearScheme,
) -> Result<(Vec<ChainStep>, Vec<(MessageId, usize, usize)>), UnicastError> {
    if !map.with_aux {
        return Err(UnicastError::NoAuxiliary);
    }
    let f = s.field;
    let n = s.n as i64;
    let mut steps = Vec::new();
    let mut sums = Vec::new();
    for i in 1..=map.original.num_messages {
        let r0 = s.dim(map.id(i, 0)) as i64;
        let mut acc = Subspace::whole(f, s.n);
        let mut join = Subspace::zero(f, s.n);
        let mut total = 0i64;
        for j in 1..=map.l {
            let sp = Subspace::span(&s.v[&map.id(i, j)]);
            total += sp.dim() as i64;
            acc = acc.intersect(&sp)?;
            join = join.join(&sp)?;
            steps.push(ChainStep {
                message: i,
                step: j,
                dim: acc.dim(),
                bound: total - (j as i64 - 1) * (n - r0),
            });
        }
        sums.push((i, join.dim(), (n - r0) as usize));
    }
    Ok((steps, sums))
}

/// Whether `[V_i | V̄_{i,0}]` has full rank `n` for every message.
pub fn auxiliary_is_complement(map: &UnicastMap, s: &LinearScheme) -> Result<bool, UnicastError> {
    for i in 1..=map.original.num_messages {
        let both: Matrix = s.v[&map.id(i, 1)].hstack(&s.v[&map.id(i, 0)])?;
        if both.rank() != s.n {
            return Ok(false);
        }
    }
    Ok(true)
}
