//! Capacity-achieving constructions for the three symmetric families and
//! the three small worked examples shipped with the crate.

use std::collections::BTreeMap;

use num_rational::Rational64;
use thiserror::Error;

use crate::alignment::{build_scalar_scheme, AlignmentError};
use crate::galois::{mds_vector_family, smallest_prime_at_least, FieldSpec, GaloisError, Matrix};
use crate::model::{
    circ, gen_neighboring_antidotes, gen_neighboring_interference, gen_x_network, x_message_id,
    x_network_unchecked, Destination, DestId, Instance, MessageId, ModelError,
};
use crate::scheme::LinearScheme;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SymmetricError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

/// Neighboring-antidotes scheme: consecutive messages share `U` of their
/// `U + 1` dimensions, so the `K - A - 1` interferers fold into `K - A - 1 + U`
/// dimensions and leave exactly `U + 1` for the desired message.
pub fn build_antidote_scheme(k: usize, u: usize, d: usize) -> Result<LinearScheme, SymmetricError> {
    let inst = gen_neighboring_antidotes(k, u, d)?;
    let a = u + d;
    if a == k - 1 {
        // Everyone holds everything else: send the sum.
        let f = FieldSpec::gf2();
        let v = (1..=k).map(|m| (m, Matrix::identity(f, 1))).collect();
        return Ok(LinearScheme::new(f, 1, v));
    }
    if a == k - 2 {
        return Ok(build_scalar_scheme(&inst, 1)?);
    }
    let n = k - a + 2 * u;
    let field = FieldSpec::prime(smallest_prime_at_least(k as u64) as u32)?;
    let z = mds_vector_family(k, n, field)?;
    let v = (1..=k)
        .map(|i| {
            let cols: Vec<usize> = (0..=u).map(|s| circ((i + s) as i64, k) - 1).collect();
            (i, z.select_columns(&cols))
        })
        .collect();
    Ok(LinearScheme::new(field, n, v))
}

/// Neighboring-interference scheme over GF(2): message `i` is sent on
/// coordinate `i mod (D + 1)`, so messages `D + 1` apart add up on the
/// same coordinate and the receiver's window sees each coordinate once.
pub fn build_interference_scheme(k: usize, u: usize, d: usize) -> Result<LinearScheme, SymmetricError> {
    gen_neighboring_interference(k, u, d)?;
    let f = FieldSpec::gf2();
    let n = d + 1;
    let id = Matrix::identity(f, n);
    let v = (1..=k).map(|i| (i, id.select_columns(&[(i - 1) % n]))).collect();
    Ok(LinearScheme::new(f, n, v))
}

/// Column (0-based) assigned to the unordered residue pair `{a, b}`, `a != b`,
/// of `0..=l`. Pairs containing `l` come first, `{i, l} -> i`; the rest follow
/// lexicographically.
fn pair_column(a: usize, b: usize, l: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    if b == l {
        return a;
    }
    // Pairs {x, y} with x < y < l that come before {a, b}.
    let before: usize = (0..a).map(|x| l - 1 - x).sum::<usize>() + (b - a - 1);
    l + before
}

/// Column (0-based) carrying message `p` of source `s` in the x-network
/// scheme with `l` messages per source. Source `s` has residue
/// `r = (s - 1) mod (l + 1)` and its `p`-th message rides the pair
/// `{r, r + p}`; every receiver's desired pairs share the residue of the
/// one source it skips, and no interfering pair touches that residue.
pub fn x_column(s: usize, p: usize, l: usize) -> usize {
    let r = (s - 1) % (l + 1);
    pair_column(r, (r + p) % (l + 1), l)
}

/// One period of the x-network assignment: row `s` lists the 1-based
/// column index used by messages `1..=l` of source `s`, for `s = 1..=l+1`.
pub fn x_pattern_table(l: usize) -> Vec<Vec<usize>> {
    (1..=l + 1).map(|s| (1..=l).map(|p| x_column(s, p, l) + 1).collect()).collect()
}

/// X-network scheme over GF(2) with `n = L(L+1)/2`, one coordinate per
/// message.
pub fn build_x_scheme(k: usize, l: usize) -> Result<LinearScheme, SymmetricError> {
    gen_x_network(k, l)?;
    Ok(x_scheme_unchecked(k, l))
}

fn x_scheme_unchecked(k: usize, l: usize) -> LinearScheme {
    let f = FieldSpec::gf2();
    let n = l * (l + 1) / 2;
    let id = Matrix::identity(f, n);
    let mut v = BTreeMap::new();
    for s in 1..=k {
        for p in 1..=l {
            v.insert(x_message_id(s, p, l), id.select_columns(&[x_column(s, p, l)]));
        }
    }
    LinearScheme::new(f, n, v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltinExample {
    pub id: u8,
    pub instance: Instance,
    pub scheme: LinearScheme,
    pub claimed_rate: Rational64,
}

/// Matrix over `f` from small signed integer rows.
fn int_matrix(f: FieldSpec, rows: &[Vec<i64>]) -> Matrix {
    Matrix::from_int_rows(f, rows).expect("entries are in {-1, 0, 1}")
}

/// Unit vector `T_i` of length `n`, 1-based.
fn t(i: usize, n: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i - 1] = 1;
    v
}

/// Column matrix from column vectors given as signed integers.
fn col_matrix(f: FieldSpec, cols: &[Vec<i64>]) -> Matrix {
    int_matrix(f, cols).transpose()
}

fn combo(terms: &[(i64, usize)], n: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    for &(c, i) in terms {
        v[i - 1] += c;
    }
    v
}

/// Three messages, one destination without side information and two that
/// hold each other's message. Messages 2 and 3 align on one coordinate.
fn example1(f: FieldSpec) -> BuiltinExample {
    let instance = Instance::new(
        3,
        vec![
            Destination::new(1, [1], []),
            Destination::new(2, [2], [3]),
            Destination::new(3, [3], [2]),
        ],
    );
    let v = BTreeMap::from([
        (1, col_matrix(f, &[vec![0, 1]])),
        (2, col_matrix(f, &[vec![1, 0]])),
        (3, col_matrix(f, &[vec![1, 0]])),
    ]);
    let u = BTreeMap::from([
        ((1, 1), int_matrix(f, &[vec![0, 1]])),
        ((2, 2), int_matrix(f, &[vec![1, 0]])),
        ((3, 3), int_matrix(f, &[vec![1, 0]])),
    ]);
    let mut scheme = LinearScheme::new(f, 2, v);
    scheme.u = Some(u);
    BuiltinExample { id: 1, instance, scheme, claimed_rate: Rational64::new(1, 2) }
}

/// The pentagon: destination `k` wants `W_k` and holds `W_{k+2}, W_{k+3}`.
/// Each message has two streams; the second stream of `W_i` and the first
/// of `W_{i+3}` share a coordinate.
fn example2(f: FieldSpec) -> BuiltinExample {
    let n = 5;
    let instance = Instance::new(
        5,
        (1..=5)
            .map(|k| Destination::new(k, [k], [circ(k as i64 + 2, 5), circ(k as i64 + 3, 5)]))
            .collect(),
    );
    let pairs: [(usize, usize); 5] = [(3, 4), (5, 1), (2, 3), (4, 5), (1, 2)];
    let v = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (i + 1, col_matrix(f, &[t(a, n), t(b, n)])))
        .collect();
    let u = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| ((i + 1, i + 1), int_matrix(f, &[t(a, n), t(b, n)])))
        .collect();
    let mut scheme = LinearScheme::new(f, n, v);
    scheme.u = Some(u);
    BuiltinExample { id: 2, instance, scheme, claimed_rate: Rational64::new(2, 5) }
}

/// Encoding vectors of the 15-message example, with `T_i` the unit vectors
/// of `F^6`.
pub fn example3_vectors() -> BTreeMap<MessageId, Vec<i64>> {
    let n = 6;
    let v10 = combo(&[(1, 1), (1, 2), (1, 3), (-1, 4), (-1, 5)], n);
    BTreeMap::from([
        (1, t(6, n)),
        (2, t(4, n)),
        (3, t(1, n)),
        (4, t(5, n)),
        (5, t(2, n)),
        (6, t(6, n)),
        (7, t(3, n)),
        (8, combo(&[(1, 4), (1, 5), (1, 6)], n)),
        (9, t(5, n)),
        (10, v10.clone()),
        (11, combo(&[(1, 2), (1, 3), (-1, 5)], n)),
        (12, t(3, n)),
        (13, t(1, n)),
        (14, combo(&[(1, 1), (1, 2), (1, 6)], n)),
        (15, v10),
    ])
}

/// Decoding rows `U_{m,k}` of the 15-message example.
pub fn example3_decoders() -> Vec<((MessageId, DestId), Vec<i64>)> {
    vec![
        ((3, 1), vec![1, 0, 0, 0, 0, 0]),
        ((5, 1), vec![0, 1, 0, 0, 0, 0]),
        ((7, 1), vec![0, 0, 1, 0, 0, 0]),
        ((6, 2), vec![-1, 0, 0, -1, 0, 1]),
        ((8, 2), vec![1, 0, 0, 1, 0, 0]),
        ((10, 2), vec![1, 0, 0, 0, 0, 0]),
        ((9, 3), vec![0, 1, 0, 0, 1, -1]),
        ((11, 3), vec![0, 1, 0, 1, 0, -1]),
        ((13, 3), vec![1, 0, 0, 1, 0, -1]),
        ((12, 4), vec![0, 0, 1, 0, 1, 0]),
        ((14, 4), vec![0, 1, 0, 0, 1, 0]),
        ((1, 4), vec![0, -1, 0, 0, -1, 1]),
        ((15, 5), vec![0, 0, 1, 0, 0, 0]),
        ((2, 5), vec![0, 0, 1, 1, 0, 0]),
        ((4, 5), vec![0, 0, 1, 0, 1, 0]),
    ]
}

/// Five sources with three messages each, every receiver connected to three
/// consecutive sources. Interference is packed into three dimensions by
/// aligning subspaces rather than single vectors.
fn example3(f: FieldSpec) -> BuiltinExample {
    let instance = x_network_unchecked(5, 3).expect("K >= L");
    let v = example3_vectors().into_iter().map(|(m, c)| (m, col_matrix(f, &[c]))).collect();
    let u = example3_decoders().into_iter().map(|(key, r)| (key, int_matrix(f, &[r]))).collect();
    let mut scheme = LinearScheme::new(f, 6, v);
    scheme.u = Some(u);
    BuiltinExample { id: 3, instance, scheme, claimed_rate: Rational64::new(1, 6) }
}

/// Built-in example `id` (1, 2 or 3) with its scheme over `field`.
pub fn builtin_example(id: u8, field: FieldSpec) -> Option<BuiltinExample> {
    match id {
        1 => Some(example1(field)),
        2 => Some(example2(field)),
        3 => Some(example3(field)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::Subspace;
    use crate::scheme::{simulate_exhaustive, verify, verify_decoders, verify_rank, DEFAULT_BUDGET};
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn fields() -> [FieldSpec; 3] {
        [FieldSpec::gf2(), FieldSpec::prime(3).unwrap(), FieldSpec::prime(5).unwrap()]
    }

    #[test]
    fn antidote_examples() {
        for (k, u, d, n, rate) in [(8, 1, 2, 7, r(2, 7)), (5, 1, 1, 5, r(2, 5)), (7, 0, 4, 3, r(1, 3))] {
            let inst = gen_neighboring_antidotes(k, u, d).unwrap();
            let s = build_antidote_scheme(k, u, d).unwrap();
            assert_eq!(s.n, n);
            assert!(s.rates().0.iter().all(|&x| x == rate));
            assert!(verify(&inst, &s).unwrap().valid, "{k} {u} {d}");
        }
    }

    #[test]
    fn antidote_edge_cases() {
        let s = build_antidote_scheme(4, 1, 2).unwrap();
        assert_eq!(s.symmetric_rate(), r(1, 1));
        assert!(verify(&gen_neighboring_antidotes(4, 1, 2).unwrap(), &s).unwrap().valid);
        let s = build_antidote_scheme(5, 1, 2).unwrap();
        assert_eq!(s.symmetric_rate(), r(1, 2));
        assert!(verify(&gen_neighboring_antidotes(5, 1, 2).unwrap(), &s).unwrap().valid);
        assert!(matches!(build_antidote_scheme(5, 2, 1), Err(SymmetricError::Model(_))));
        assert!(matches!(build_antidote_scheme(3, 1, 2), Err(SymmetricError::Model(_))));
    }

    #[test]
    fn antidote_interference_fills_the_rest() {
        for k in 4..=9 {
            for d in 0..=k - 3 {
                for u in 0..=d.min(k - 3 - d) {
                    let inst = gen_neighboring_antidotes(k, u, d).unwrap();
                    let s = build_antidote_scheme(k, u, d).unwrap();
                    let a = u + d;
                    for dest in &inst.destinations {
                        let int: Vec<&Matrix> = dest.interferers(k).map(|m| &s.v[&m]).collect();
                        let im = Matrix::hstack_all(s.field, s.n, int).unwrap();
                        assert_eq!(im.rank(), u + k - a - 1);
                        let all = im.hstack(&s.v[&dest.id]).unwrap();
                        assert_eq!(all.rank(), s.n);
                    }
                }
            }
        }
    }

    #[test]
    fn interference_examples() {
        for (k, u, d) in [(6, 0, 1), (9, 1, 2), (12, 2, 3)] {
            let inst = gen_neighboring_interference(k, u, d).unwrap();
            let s = build_interference_scheme(k, u, d).unwrap();
            assert_eq!(s.n, d + 1);
            assert_eq!(s.symmetric_rate(), r(1, d as i64 + 1));
            assert!(verify(&inst, &s).unwrap().valid);
        }
        let inst = gen_neighboring_interference(12, 2, 3).unwrap();
        let s = build_interference_scheme(12, 2, 3).unwrap();
        assert!(simulate_exhaustive(&inst, &s, DEFAULT_BUDGET).unwrap().is_ok());
        assert!(build_interference_scheme(10, 1, 2).is_err());
    }

    #[test]
    fn x_pattern_matches_the_published_periods() {
        assert_eq!(x_pattern_table(2), vec![vec![3, 1], vec![2, 3], vec![1, 2]]);
        assert_eq!(
            x_pattern_table(3),
            vec![vec![4, 5, 1], vec![6, 2, 4], vec![3, 5, 6], vec![1, 2, 3]]
        );
        assert_eq!(x_pattern_table(1), vec![vec![1], vec![1]]);
    }

    #[test]
    fn pair_columns_are_a_bijection() {
        for l in 1..=6 {
            let mut seen = std::collections::BTreeSet::new();
            for a in 0..=l {
                for b in a + 1..=l {
                    assert!(seen.insert(pair_column(a, b, l)));
                }
            }
            assert_eq!(seen, (0..l * (l + 1) / 2).collect());
        }
    }

    #[test]
    fn x_examples() {
        for (k, l, n, rate) in [(6, 2, 3, r(1, 3)), (8, 3, 6, r(1, 6)), (4, 1, 1, r(1, 1))] {
            let inst = gen_x_network(k, l).unwrap();
            let s = build_x_scheme(k, l).unwrap();
            assert_eq!(s.n, n);
            assert_eq!(s.symmetric_rate(), rate);
            assert!(verify(&inst, &s).unwrap().valid, "{k} {l}");
        }
        assert!(build_x_scheme(5, 3).is_err());
    }

    #[test]
    fn example_claims() {
        for f in fields() {
            for id in 1..=3u8 {
                let ex = builtin_example(id, f).unwrap();
                assert!(ex.instance.is_valid());
                assert_eq!(ex.scheme.symmetric_rate(), ex.claimed_rate);
                assert!(verify_decoders(&ex.instance, &ex.scheme).unwrap().valid, "example {id} over {f:?}");
                assert!(verify_rank(&ex.instance, &ex.scheme).unwrap().valid, "example {id} over {f:?}");
            }
        }
        assert_eq!(builtin_example(2, FieldSpec::gf2()).unwrap().claimed_rate, r(2, 5));
        assert_eq!(builtin_example(3, FieldSpec::gf2()).unwrap().claimed_rate, r(1, 6));
        assert!(builtin_example(4, FieldSpec::gf2()).is_none());
    }

    #[test]
    fn example3_is_the_five_source_x_network() {
        let inst = builtin_example(3, FieldSpec::gf2()).unwrap().instance;
        let wants: Vec<Vec<usize>> = inst.destinations.iter().map(|d| d.wants.iter().copied().collect()).collect();
        assert_eq!(wants, vec![vec![3, 5, 7], vec![6, 8, 10], vec![9, 11, 13], vec![1, 12, 14], vec![2, 4, 15]]);
    }

    #[test]
    fn example2_alignments() {
        let s = builtin_example(2, FieldSpec::gf2()).unwrap().scheme;
        let col = |m: usize, j: usize| s.v[&m].column(j);
        assert_eq!(col(2, 1), col(5, 0));
        for i in 1..=5 {
            assert_eq!(col(i, 1), col(circ(i as i64 + 3, 5), 0));
        }
    }

    #[test]
    fn example3_span_constraints() {
        for f in [FieldSpec::prime(3).unwrap(), FieldSpec::prime(7).unwrap(), FieldSpec::gf2()] {
            let v = example3_vectors();
            let vm = |m: usize| col_matrix(f, &[v[&m].clone()]);
            let tm = |i: usize| col_matrix(f, &[t(i, 6)]);
            let span = |ms: &[Matrix]| Subspace::span(&Matrix::hstack_all(f, 6, ms.iter()).unwrap());
            assert!(span(&[tm(4), tm(5), tm(6)]).contains(&span(&[vm(6), vm(8), vm(9)])));
            assert!(span(&[tm(2), tm(3), tm(5)]).contains(&span(&[vm(11)])));
            assert!(span(&[vm(8), tm(3), vm(10)]).contains(&span(&[vm(14)])));
            assert!(span(&[vm(11), vm(10), tm(1)]).contains(&span(&[tm(4)])));
            assert!(span(&[vm(14), tm(1), tm(6)]).contains(&span(&[tm(2)])));
        }
    }

    #[test]
    fn example3_coefficient_solution() {
        let (a, b, c, d, e) = ([1, 1, 1], [1, 1, -1], [1, 1, -1], [1, 1, -1], [1, 1, 1]);
        // Constraints among the coefficients, checked over the integers.
        assert_eq!(d[1], c[0] * e[0]);
        assert_eq!(d[0] * b[0], c[0] * e[1]);
        assert_eq!(d[0] * b[1], c[1]);
        assert_eq!(d[2], c[2] * a[0]);
        assert_eq!(d[0] * b[2], c[2] * a[1]);
        assert_eq!(c[2] * a[2] + c[0] * e[2], 0);

        let v = example3_vectors();
        let n = 6;
        let lin = |terms: &[(i64, &Vec<i64>)]| {
            let mut out = vec![0i64; n];
            for (c, x) in terms {
                for (o, xi) in out.iter_mut().zip(x.iter()) {
                    *o += c * xi;
                }
            }
            out
        };
        let tv: Vec<Vec<i64>> = (1..=6).map(|i| t(i, n)).collect();
        let tt = |i: usize| &tv[i - 1];
        assert_eq!(v[&8], lin(&[(a[0], tt(4)), (a[1], tt(5)), (a[2], tt(6))]));
        assert_eq!(v[&11], lin(&[(b[0], tt(2)), (b[1], tt(3)), (b[2], tt(5))]));
        assert_eq!(v[&10], lin(&[(c[0], &v[&14]), (c[1], tt(3)), (c[2], &v[&8])]));
        assert_eq!(v[&10], lin(&[(d[0], &v[&11]), (d[1], tt(1)), (d[2], tt(4))]));
        assert_eq!(v[&14], lin(&[(e[0], tt(1)), (e[1], tt(2)), (e[2], tt(6))]));
    }

    #[test]
    fn examples_simulate_over_small_fields() {
        for f in [FieldSpec::gf2(), FieldSpec::prime(3).unwrap()] {
            for id in 1..=3u8 {
                let ex = builtin_example(id, f).unwrap();
                assert!(simulate_exhaustive(&ex.instance, &ex.scheme, DEFAULT_BUDGET).unwrap().is_ok());
            }
        }
    }

    fn shift_perm(k: usize) -> Vec<usize> {
        (1..=k).map(|m| circ(m as i64 + 1, k)).collect()
    }

    proptest! {
        #[test]
        fn antidote_schemes_are_rotation_invariant(
            (k, u, d) in (4usize..11).prop_flat_map(|k| (Just(k), 0..=k - 3))
                .prop_flat_map(|(k, a)| (Just(k), 0..=a / 2, Just(a)))
                .prop_map(|(k, u, a)| (k, u, a - u))
        ) {
            let inst = gen_neighboring_antidotes(k, u, d).unwrap();
            let s = build_antidote_scheme(k, u, d).unwrap();
            let perm = shift_perm(k);
            let a = verify(&inst, &s).unwrap().valid;
            let b = verify(&inst.relabel_messages(&perm), &s.relabel_messages(&perm)).unwrap().valid;
            prop_assert!(a && b);
            // The family is circulant, so a rotated scheme also serves the
            // unrotated instance.
            prop_assert!(verify(&inst, &s.relabel_messages(&perm)).unwrap().valid);
        }

        #[test]
        fn interference_schemes_are_rotation_invariant(
            q in 1usize..5,
            (d, u) in (0usize..4).prop_flat_map(|d| (Just(d), 0..=d))
        ) {
            let k = q * (d + 1);
            let inst = gen_neighboring_interference(k, u, d).unwrap();
            let s = build_interference_scheme(k, u, d).unwrap();
            let perm = shift_perm(k);
            prop_assert!(verify(&inst, &s).unwrap().valid);
            prop_assert!(verify(&inst, &s.relabel_messages(&perm)).unwrap().valid);
        }
    }
}
