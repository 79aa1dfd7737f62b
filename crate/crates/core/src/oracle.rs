//! Brute-force ground truth for small instances. Nothing here shares code
//! with the rank computations in `galois`: GF(2) rows are bitmasks and
//! scalar schemes are checked through explicit span closures. Every
//! witness is then handed to `scheme::verify` before it is returned.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::galois::{FieldSpec, GaloisError, Matrix};
use crate::model::{Instance, MessageId};
use crate::scheme::{scheme_to_json, verify, LinearScheme, SchemeError};

pub const MAX_MINRANK_DESTINATIONS: usize = 6;
pub const MAX_SEARCH_MESSAGES: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("minrank needs a multiple unicast instance where each destination desires one message")]
    NotUnicast,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("{needed} exceeds the budget of {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("internal error: the verifier rejected the oracle witness")]
    WitnessRejected,
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub query: String,
    /// Minrank, or the smallest scheme length found; `None` if nothing
    /// exists within the searched range.
    pub value: Option<usize>,
    pub witness: Option<LinearScheme>,
    /// The fitting matrix for minrank queries, rows indexed by destination.
    pub witness_matrix: Option<Matrix>,
    pub search_space_size: u64,
}

impl OracleResult {
    pub fn to_json(&self) -> Value {
        json!({
            "query": self.query,
            "value": self.value,
            "found": self.value.is_some(),
            "search_space_size": self.search_space_size,
            "witness_matrix": self.witness_matrix.as_ref().map(Matrix::to_int_rows),
            "witness": self.witness.as_ref().map(scheme_to_json),
        })
    }
}

/// Rank over GF(2) of rows given as bitmasks.
fn rank_bits(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len());
    for &r in rows {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            // Keep leading bits distinct so `min` reduces correctly.
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Minimum GF(2) rank of a matrix fitting the side information: row `i`
/// (destination `i`) has a one at its own message, free entries at the
/// messages it holds, zeros elsewhere. Columns are the desired messages in
/// destination order.
pub fn minrank_gf2(inst: &Instance, budget: u64) -> Result<OracleResult, OracleError> {
    if !inst.is_multiple_unicast() || inst.destinations.iter().any(|d| d.wants.len() != 1) {
        return Err(OracleError::NotUnicast);
    }
    let k = inst.num_destinations();
    if k > MAX_MINRANK_DESTINATIONS {
        return Err(OracleError::TooLarge(format!("{k} destinations, at most {MAX_MINRANK_DESTINATIONS}")));
    }
    let desired: Vec<MessageId> = inst.destinations.iter().map(|d| *d.wants.first().expect("one message")).collect();
    let mut free: Vec<(usize, usize)> = Vec::new();
    for (i, d) in inst.destinations.iter().enumerate() {
        for (j, m) in desired.iter().enumerate() {
            if d.has.contains(m) {
                free.push((i, j));
            }
        }
    }
    let space = 1u64.checked_shl(free.len() as u32).unwrap_or(u64::MAX);
    if space > budget {
        return Err(OracleError::BudgetExceeded { needed: format!("2^{} matrices", free.len()), budget });
    }
    let base: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
    let mut best = (k + 1, 0u64);
    let mut rows = base.clone();
    for mask in 0..space {
        rows.copy_from_slice(&base);
        for (b, &(i, j)) in free.iter().enumerate() {
            if mask >> b & 1 == 1 {
                rows[i] |= 1 << j;
            }
        }
        let r = rank_bits(&rows);
        if r < best.0 {
            best = (r, mask);
            if r == 1 {
                break;
            }
        }
    }
    let (r, mask) = best;
    let f = FieldSpec::gf2();
    let mut a = Matrix::zeros(f, k, k);
    for i in 0..k {
        a.set(i, i, 1);
    }
    for (b, &(i, j)) in free.iter().enumerate() {
        if mask >> b & 1 == 1 {
            a.set(i, j, 1);
        }
    }
    // Encoder rows: a basis of the row space; message desired[j] rides
    // column j, undesired messages are not sent.
    let (red, pivots) = a.rref();
    let enc = red.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
    let mut v: BTreeMap<MessageId, Matrix> = (1..=inst.num_messages).map(|m| (m, Matrix::zeros(f, r, 0))).collect();
    for (j, &m) in desired.iter().enumerate() {
        v.insert(m, enc.select_columns(&[j]));
    }
    let scheme = LinearScheme::new(f, r, v);
    if !verify(inst, &scheme)?.valid {
        return Err(OracleError::WitnessRejected);
    }
    Ok(OracleResult {
        query: "minrank over GF(2)".into(),
        value: Some(r),
        witness: Some(scheme),
        witness_matrix: Some(a),
        search_space_size: space,
    })
}

/// Points of `F_q^n` as integers `0..q^n` (base-q digits), with addition
/// and scaling tables and span closure as bitmasks over the points.
struct PointSpace {
    q: usize,
    n: usize,
    size: usize,
    add: Vec<usize>,
    scale: Vec<usize>,
}

impl PointSpace {
    fn new(q: usize, n: usize) -> Self {
        let size = q.pow(n as u32);
        let digits = |x: usize| -> Vec<usize> { (0..n).map(|i| x / q.pow(i as u32) % q).collect() };
        let join = |d: &[usize]| -> usize { d.iter().enumerate().map(|(i, &v)| v * q.pow(i as u32)).sum() };
        let mut add = vec![0; size * size];
        let mut scale = vec![0; q * size];
        for a in 0..size {
            let da = digits(a);
            for b in 0..size {
                let db = digits(b);
                let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % q).collect();
                add[a * size + b] = join(&s);
            }
            for c in 0..q {
                let s: Vec<usize> = da.iter().map(|x| x * c % q).collect();
                scale[c * size + a] = join(&s);
            }
        }
        PointSpace { q, n, size, add, scale }
    }

    /// Span of `vs` as a bitmask over points.
    fn span(&self, vs: impl Iterator<Item = usize>) -> u64 {
        let mut set = 1u64; // the zero point
        for v in vs {
            let mut next = set;
            let mut rest = set;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                for c in 1..self.q {
                    next |= 1 << self.add[s * self.size + self.scale[c * self.size + v]];
                }
            }
            set = next;
        }
        set
    }

    /// Representatives of the 1-dimensional subspaces: first nonzero digit is 1.
    fn projective_points(&self) -> Vec<usize> {
        (1..self.size)
            .filter(|&x| {
                let mut y = x;
                while y % self.q == 0 {
                    y /= self.q;
                }
                y % self.q == 1
            })
            .collect()
    }

    fn column(&self, x: usize) -> Vec<u32> {
        (0..self.n).map(|i| (x / self.q.pow(i as u32) % self.q) as u32).collect()
    }
}

fn scalar_valid(inst: &Instance, ps: &PointSpace, assign: &[usize]) -> bool {
    inst.destinations.iter().all(|d| {
        let des = ps.span(d.wants.iter().map(|&m| assign[m]));
        if des.count_ones() as usize != ps.q.pow(d.wants.len() as u32) {
            return false;
        }
        let int = ps.span(d.interferers(inst.num_messages).map(|m| assign[m]));
        des & int == 1
    })
}

/// Whether a scalar scheme of length `n` over `GF(q)` exists; returns the
/// first one in enumeration order. Message vectors range over projective
/// points, and the first desired message is pinned to `e_1`.
pub fn scalar_search_at(inst: &Instance, q: u32, n: usize, budget: u64) -> Result<(Option<LinearScheme>, u64), OracleError> {
    let f = FieldSpec::prime(q)?;
    let ps = PointSpace::new(q as usize, n);
    let points = ps.projective_points();
    let m = inst.num_messages;
    let desired: Vec<bool> = (0..=m).map(|x| inst.destinations.iter().any(|d| d.wants.contains(&x))).collect();
    let free: Vec<MessageId> = (1..=m).filter(|&x| desired[x]).collect();
    let Some((&pinned, rest)) = free.split_first() else {
        return Ok((Some(LinearScheme::new(f, n, (1..=m).map(|x| (x, Matrix::zeros(f, n, 0))).collect())), 1));
    };
    let space = (points.len() as u64).checked_pow(rest.len() as u32).unwrap_or(u64::MAX);
    if space > budget {
        return Err(OracleError::BudgetExceeded {
            needed: format!("{}^{} assignments", points.len(), rest.len()),
            budget,
        });
    }
    let mut assign = vec![0usize; m + 1];
    assign[pinned] = 1; // e_1
    let mut idx = vec![0usize; rest.len()];
    for _ in 0..space {
        for (slot, &msg) in rest.iter().enumerate() {
            assign[msg] = points[idx[slot]];
        }
        if scalar_valid(inst, &ps, &assign) {
            let v = (1..=m)
                .map(|x| {
                    let col = if desired[x] {
                        Matrix::from_columns(f, n, &[ps.column(assign[x])]).expect("column fits")
                    } else {
                        Matrix::zeros(f, n, 0)
                    };
                    (x, col)
                })
                .collect();
            let s = LinearScheme::new(f, n, v);
            if !verify(inst, &s)?.valid {
                return Err(OracleError::WitnessRejected);
            }
            return Ok((Some(s), space));
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < points.len() {
                break;
            }
            *slot = 0;
        }
    }
    Ok((None, space))
}

/// Smallest `n <= n_max` admitting a scalar scheme over `GF(q)`.
pub fn best_scalar_scheme(inst: &Instance, q: u32, n_max: usize, budget: u64) -> Result<OracleResult, OracleError> {
    if inst.num_messages > MAX_SEARCH_MESSAGES || q > 3 || n_max > 3 {
        return Err(OracleError::TooLarge(format!(
            "scalar search covers M <= {MAX_SEARCH_MESSAGES}, q <= 3, n <= 3; got M = {}, q = {q}, n = {n_max}",
            inst.num_messages
        )));
    }
    let mut total = 0u64;
    for n in 1..=n_max {
        let (found, space) = scalar_search_at(inst, q, n, budget)?;
        total += space;
        if let Some(s) = found {
            return Ok(OracleResult {
                query: format!("shortest scalar scheme over GF({q})"),
                value: Some(n),
                witness: Some(s),
                witness_matrix: None,
                search_space_size: total,
            });
        }
    }
    Ok(OracleResult {
        query: format!("shortest scalar scheme over GF({q})"),
        value: None,
        witness: None,
        witness_matrix: None,
        search_space_size: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::simple_bounds;
    use crate::galois::Subspace;
    use crate::model::{circ, gen_neighboring_antidotes, Destination};
    use crate::scheme::DEFAULT_BUDGET;
    use crate::symmetric::builtin_example;
    use proptest::prelude::*;

    fn pentagon() -> Instance {
        Instance::new(
            5,
            (1..=5)
                .map(|k| Destination::new(k, [k], [circ(k as i64 - 1, 5), circ(k as i64 + 1, 5)]))
                .collect(),
        )
    }

    #[test]
    fn pentagon_minrank_is_three() {
        for inst in [pentagon(), builtin_example(2, FieldSpec::gf2()).unwrap().instance] {
            let res = minrank_gf2(&inst, DEFAULT_BUDGET).unwrap();
            assert_eq!(res.value, Some(3));
            assert_eq!(res.search_space_size, 1 << 10);
            let s = res.witness.unwrap();
            assert_eq!(s.n, 3);
            assert!(verify(&inst, &s).unwrap().valid);
        }
    }

    #[test]
    fn minrank_extremes() {
        let full = gen_neighboring_antidotes(4, 1, 2).unwrap();
        assert_eq!(minrank_gf2(&full, DEFAULT_BUDGET).unwrap().value, Some(1));
        let none = Instance::new(4, (1..=4).map(|k| Destination::new(k, [k], [])).collect());
        let res = minrank_gf2(&none, DEFAULT_BUDGET).unwrap();
        assert_eq!((res.value, res.search_space_size), (Some(4), 1));
        assert_eq!(res.witness_matrix.unwrap(), Matrix::identity(FieldSpec::gf2(), 4));
    }

    #[test]
    fn minrank_rejects_groupcast_and_budget() {
        let g = Instance::new(2, vec![Destination::new(1, [1, 2], [])]);
        assert_eq!(minrank_gf2(&g, DEFAULT_BUDGET), Err(OracleError::NotUnicast));
        assert!(matches!(minrank_gf2(&pentagon(), 1000), Err(OracleError::BudgetExceeded { .. })));
    }

    #[test]
    fn bit_rank() {
        assert_eq!(rank_bits(&[0b11, 0b01, 0b10]), 2);
        assert_eq!(rank_bits(&[0b110, 0b011, 0b101]), 2);
        assert_eq!(rank_bits(&[0b100, 0b010, 0b001]), 3);
        assert_eq!(rank_bits(&[0, 0]), 0);
    }

    #[test]
    fn scalar_search_on_the_three_message_example() {
        let inst = builtin_example(1, FieldSpec::gf2()).unwrap().instance;
        let res = best_scalar_scheme(&inst, 2, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(res.value, Some(2));
        let s = res.witness.unwrap();
        assert_eq!(Subspace::span(&s.v[&2]), Subspace::span(&s.v[&3]));
    }

    #[test]
    fn scalar_search_on_the_four_message_feasible_instance() {
        let inst = Instance::new(
            4,
            vec![
                Destination::new(1, [1, 2], []),
                Destination::new(2, [1, 3], [4]),
                Destination::new(3, [2, 4], [3]),
            ],
        );
        let res = best_scalar_scheme(&inst, 3, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(res.value, Some(3));
    }

    #[test]
    fn scalar_search_not_found() {
        let inst = Instance::new(3, (1..=3).map(|k| Destination::new(k, [k], [])).collect());
        let res = best_scalar_scheme(&inst, 2, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(res.value, None);
        assert!(res.witness.is_none());
        assert!(matches!(best_scalar_scheme(&inst, 5, 2, DEFAULT_BUDGET), Err(OracleError::TooLarge(_))));
    }

    #[test]
    fn point_space_spans() {
        let ps = PointSpace::new(3, 2);
        assert_eq!(ps.projective_points().len(), 4);
        assert_eq!(ps.span([1].into_iter()).count_ones(), 3);
        assert_eq!(ps.span([1, 3].into_iter()).count_ones(), 9);
        assert_eq!(ps.span([1, 2].into_iter()).count_ones(), 3);
    }

    fn arb_unicast() -> impl Strategy<Value = Instance> {
        (2usize..6, any::<u64>()).prop_map(|(k, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Instance::new(
                k,
                (1..=k)
                    .map(|d| Destination::new(d, [d], (1..=k).filter(|&m| m != d && rng.gen_bool(0.45)).collect::<Vec<_>>()))
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn minrank_respects_simple_bounds_and_matches_scalar_search(inst in arb_unicast()) {
            let res = minrank_gf2(&inst, DEFAULT_BUDGET).unwrap();
            let mr = res.value.unwrap();
            let widest = simple_bounds(&inst).iter().map(|c| c.terms.len()).max().unwrap();
            prop_assert!(mr >= widest);
            let search = best_scalar_scheme(&inst, 2, 3, DEFAULT_BUDGET).unwrap();
            if mr <= 3 {
                prop_assert_eq!(search.value, Some(mr));
            } else {
                prop_assert_eq!(search.value, None);
            }
        }

        #[test]
        fn scalar_existence_is_monotone(inst in arb_unicast(), q in prop::sample::select(vec![2u32, 3])) {
            prop_assume!(inst.num_messages <= 4 || q == 2);
            let mut prev = false;
            for n in 1..=3 {
                let now = scalar_search_at(&inst, q, n, DEFAULT_BUDGET).unwrap().0.is_some();
                prop_assert!(!prev || now);
                prev = now;
            }
        }
    }
}
