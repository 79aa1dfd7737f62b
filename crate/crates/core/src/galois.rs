//! Exact arithmetic over prime fields GF(p) and binary extension fields
//! GF(2^m), plus the dense linear algebra used by every other module.
//!
//! Elements are stored as raw `u32` values. For GF(p) the canonical
//! representative is `0..p`; for GF(2^m) the bits of the integer are the
//! polynomial coefficients, so `0b110` is `x^2 + x`.
//!
//! ```
//! use icx::galois::FieldSpec;
//!
//! let f = FieldSpec::gf2m(3).unwrap(); // x^3 + x + 1
//! assert_eq!(f.mul(0b010, 0b100), 0b011);
//! let g = FieldSpec::prime(5).unwrap();
//! assert_eq!(g.inv(3).unwrap(), 2);
//! ```

use std::fmt;

use thiserror::Error;

/// A field element in raw form. Its meaning depends on the owning [`FieldSpec`].
pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaloisError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields ({0} vs {1})")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field of order {order} is too small, need at least {needed} elements")]
    FieldTooSmall { needed: u64, order: u64 },
    #[error("spread construction needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("extension degree {0} outside 1..=32")]
    BadDegree(u32),
    #[error("reduction polynomial {poly:#x} is not an irreducible polynomial of degree {m}")]
    NotIrreducible { m: u32, poly: u64 },
    #[error("value {value} is not a canonical element of {field}")]
    NonCanonical { value: i64, field: FieldSpec },
}

/// Lexicographically smallest irreducible polynomial of each degree 1..=32
/// over GF(2), with the leading `x^m` bit included.
const DEFAULT_POLYS: [u64; 32] = [
    0x2,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11b,
    0x203,
    0x409,
    0x805,
    0x1009,
    0x201b,
    0x4021,
    0x8003,
    0x1002b,
    0x20009,
    0x40009,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001b,
    0x2000009,
    0x400001b,
    0x8000027,
    0x10000003,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008d,
];

/// The default reduction polynomial for GF(2^m).
pub fn default_poly(m: u32) -> Option<u64> {
    (1..=32).contains(&m).then(|| DEFAULT_POLYS[m as usize - 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Prime(u32),
    Binary { m: u32, poly: u64 },
}

/// A finite field: GF(p) for a prime `p < 2^31`, or GF(2^m) for `1 <= m <= 32`.
///
/// Values of this type can only be obtained through the checked
/// constructors, so the modulus is always prime and the reduction
/// polynomial always irreducible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    repr: Repr,
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Prime(p) => write!(f, "GF({p})"),
            Repr::Binary { m, poly } => write!(f, "GF(2^{m}) mod {poly:#x}"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n` (and at least 2).
pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 {
        let da = 63 - a.leading_zeros();
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree `1..=m/2`.
pub fn is_irreducible(poly: u64) -> bool {
    if poly < 2 {
        return false;
    }
    let m = 63 - poly.leading_zeros();
    if m == 1 {
        return true;
    }
    for d in 1..=m / 2 {
        for g in (1u64 << d)..(1u64 << (d + 1)) {
            if poly_mod(poly, g) == 0 {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u32) -> Result<Self, GaloisError> {
        if p >= 1 << 31 || !is_prime(p as u64) {
            return Err(GaloisError::NotPrime(p as u64));
        }
        Ok(Self {
            repr: Repr::Prime(p),
        })
    }

    /// GF(2), the field most constructions in this crate default to.
    pub fn gf2() -> Self {
        Self {
            repr: Repr::Prime(2),
        }
    }

    /// GF(2^m) with the default reduction polynomial.
    pub fn gf2m(m: u32) -> Result<Self, GaloisError> {
        let poly = default_poly(m).ok_or(GaloisError::BadDegree(m))?;
        Ok(Self {
            repr: Repr::Binary { m, poly },
        })
    }

    /// GF(2^m) with an explicit reduction polynomial, checked for irreducibility.
    pub fn gf2m_with_poly(m: u32, poly: u64) -> Result<Self, GaloisError> {
        if !(1..=32).contains(&m) {
            return Err(GaloisError::BadDegree(m));
        }
        if poly >> m != 1 || !is_irreducible(poly) {
            return Err(GaloisError::NotIrreducible { m, poly });
        }
        Ok(Self {
            repr: Repr::Binary { m, poly },
        })
    }

    pub fn prime_modulus(&self) -> Option<u32> {
        match self.repr {
            Repr::Prime(p) => Some(p),
            Repr::Binary { .. } => None,
        }
    }

    pub fn extension_degree(&self) -> Option<u32> {
        match self.repr {
            Repr::Prime(_) => None,
            Repr::Binary { m, .. } => Some(m),
        }
    }

    pub fn reduction_poly(&self) -> Option<u64> {
        match self.repr {
            Repr::Prime(_) => None,
            Repr::Binary { poly, .. } => Some(poly),
        }
    }

    pub fn characteristic(&self) -> u32 {
        match self.repr {
            Repr::Prime(p) => p,
            Repr::Binary { .. } => 2,
        }
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        match self.repr {
            Repr::Prime(p) => p as u64,
            Repr::Binary { m, .. } => 1u64 << m,
        }
    }

    #[inline]
    pub fn is_canonical(&self, a: Elem) -> bool {
        (a as u64) < self.order()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match self.repr {
            Repr::Prime(p) => {
                let s = a as u64 + b as u64;
                (if s >= p as u64 { s - p as u64 } else { s }) as Elem
            }
            Repr::Binary { .. } => a ^ b,
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        match self.repr {
            Repr::Prime(p) => {
                if a == 0 {
                    0
                } else {
                    p - a
                }
            }
            Repr::Binary { .. } => a,
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match self.repr {
            Repr::Prime(p) => ((a as u64 * b as u64) % p as u64) as Elem,
            Repr::Binary { m, poly } => {
                let mut r = 0u64;
                let mut a = a as u64;
                let mut b = b;
                while b != 0 {
                    if b & 1 == 1 {
                        r ^= a;
                    }
                    b >>= 1;
                    a <<= 1;
                    if (a >> m) & 1 == 1 {
                        a ^= poly;
                    }
                }
                r as Elem
            }
        }
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GaloisError> {
        if a == 0 {
            return Err(GaloisError::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GaloisError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Maps an integer into the field. For GF(p) this reduces modulo `p`
    /// (so `-1` becomes `p - 1`). For GF(2^m) the absolute value is read as
    /// a bit pattern, since negation is the identity in characteristic 2.
    pub fn from_int(&self, v: i64) -> Result<Elem, GaloisError> {
        match self.repr {
            Repr::Prime(p) => Ok(v.rem_euclid(p as i64) as Elem),
            Repr::Binary { m, .. } => {
                let mag = v.unsigned_abs();
                if mag >> m != 0 {
                    Err(GaloisError::NonCanonical {
                        value: v,
                        field: *self,
                    })
                } else {
                    Ok(mag as Elem)
                }
            }
        }
    }

    /// Like [`from_int`](Self::from_int) but rejects anything that is not
    /// already a canonical representative.
    pub fn from_canonical(&self, v: i64) -> Result<Elem, GaloisError> {
        if v < 0 || v as u64 >= self.order() {
            return Err(GaloisError::NonCanonical {
                value: v,
                field: *self,
            });
        }
        Ok(v as Elem)
    }
}

impl std::str::FromStr for FieldSpec {
    type Err = GaloisError;

    /// Parses `p=<prime>` or `gf2m=<m>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GaloisError::DimensionMismatch(format!("field must be p=<prime> or gf2m=<m>, got {s:?}"));
        let (kind, val) = s.split_once('=').ok_or_else(bad)?;
        let val: u64 = val.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "p" => FieldSpec::prime(u32::try_from(val).map_err(|_| GaloisError::NotPrime(val))?),
            "gf2m" => FieldSpec::gf2m(u32::try_from(val).map_err(|_| GaloisError::BadDegree(u32::MAX))?),
            _ => Err(bad()),
        }
    }
}

/// An element tagged with its field, for the checked arithmetic entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldElement {
    pub field: FieldSpec,
    pub value: Elem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Inv,
    Neg,
}

impl FieldElement {
    pub fn new(field: FieldSpec, value: Elem) -> Result<Self, GaloisError> {
        if !field.is_canonical(value) {
            return Err(GaloisError::NonCanonical {
                value: value as i64,
                field,
            });
        }
        Ok(Self { field, value })
    }
}

/// Checked field arithmetic. Unary operations (`Inv`, `Neg`) ignore `b`.
pub fn field_arith(
    a: FieldElement,
    b: Option<FieldElement>,
    op: ArithOp,
) -> Result<FieldElement, GaloisError> {
    let f = a.field;
    let rhs = |b: Option<FieldElement>| -> Result<Elem, GaloisError> {
        let b = b.ok_or_else(|| GaloisError::DimensionMismatch("binary op needs two operands".into()))?;
        if b.field != f {
            return Err(GaloisError::FieldMismatch(f, b.field));
        }
        Ok(b.value)
    };
    let value = match op {
        ArithOp::Add => f.add(a.value, rhs(b)?),
        ArithOp::Mul => f.mul(a.value, rhs(b)?),
        ArithOp::Neg => f.neg(a.value),
        ArithOp::Inv => f.inv(a.value)?,
    };
    Ok(FieldElement { field: f, value })
}

/// Dense row-major matrix over a [`FieldSpec`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self, GaloisError> {
        if data.len() != rows * cols {
            return Err(GaloisError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.is_canonical(v)) {
            return Err(GaloisError::NonCanonical {
                value: bad as i64,
                field,
            });
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows, mapping each entry with
    /// [`FieldSpec::from_int`]. All rows must have the same length.
    pub fn from_int_rows(field: FieldSpec, rows: &[Vec<i64>]) -> Result<Self, GaloisError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(GaloisError::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for &v in row {
                data.push(field.from_int(v)?);
            }
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds an `n x k` matrix from `k` column vectors of length `n`.
    pub fn from_columns(field: FieldSpec, n: usize, columns: &[Vec<Elem>]) -> Result<Self, GaloisError> {
        let mut m = Self::zeros(field, n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(GaloisError::DimensionMismatch(format!(
                    "column {j} has length {}, expected {n}",
                    col.len()
                )));
            }
            for (i, &v) in col.iter().enumerate() {
                if !field.is_canonical(v) {
                    return Err(GaloisError::NonCanonical { value: v as i64, field });
                }
                m.data[i * m.cols + j] = v;
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        debug_assert!(self.field.is_canonical(v));
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Elem>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Rows as integers, the form used in scheme files.
    pub fn to_int_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|&v| v as i64).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    fn check_field(&self, other: &Self) -> Result<(), GaloisError> {
        if self.field != other.field {
            return Err(GaloisError::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(GaloisError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, c)));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Elem]) -> Result<Vec<Elem>, GaloisError> {
        if x.len() != self.cols {
            return Err(GaloisError::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(GaloisError::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Self {
            field: self.field,
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Concatenates a list of matrices side by side; `rows` fixes the
    /// height when the list is empty.
    pub fn hstack_all<'a, I>(field: FieldSpec, rows: usize, parts: I) -> Result<Self, GaloisError>
    where
        I: IntoIterator<Item = &'a Matrix>,
    {
        let mut acc = Self::zeros(field, rows, 0);
        for p in parts {
            acc = acc.hstack(p)?;
        }
        Ok(acc)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(GaloisError::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = self.get(r, c);
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Self {
            field: self.field,
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if p != lead {
                for k in 0..self.cols {
                    self.data.swap(p * self.cols + k, lead * self.cols + k);
                }
            }
            let inv = f.inv(self.get(lead, c)).expect("pivot is nonzero");
            for k in 0..self.cols {
                let i = lead * self.cols + k;
                self.data[i] = f.mul(self.data[i], inv);
            }
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if factor == 0 {
                    continue;
                }
                for k in 0..self.cols {
                    let v = f.mul(factor, self.get(lead, k));
                    let i = r * self.cols + k;
                    self.data[i] = f.sub(self.data[i], v);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let piv = m.rref_in_place();
        (m, piv)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Rank and a basis of the right nullspace `{x : self * x = 0}`,
    /// returned as the columns of a `cols x nullity` matrix.
    pub fn rank_and_nullspace(&self) -> (usize, Matrix) {
        let f = self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut ns = Self::zeros(f, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            ns.set(fc, j, 1);
            for (pi, &pc) in pivots.iter().enumerate() {
                ns.set(pc, j, f.neg(r.get(pi, fc)));
            }
        }
        (pivots.len(), ns)
    }

    pub fn nullspace(&self) -> Matrix {
        self.rank_and_nullspace().1
    }

    /// Basis of the left nullspace `{y : y * self = 0}` as rows.
    pub fn left_nullspace(&self) -> Matrix {
        self.transpose().nullspace().transpose()
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let aug = self.hstack(&Self::identity(self.field, n)).ok()?;
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let idx: Vec<usize> = (n..2 * n).collect();
        Some(r.select_columns(&idx))
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Indices of a maximal set of linearly independent columns, chosen
    /// greedily from the left.
    pub fn independent_columns(&self) -> Vec<usize> {
        self.rref().1
    }

    /// Columns of the identity that extend `colspan(self)` to the whole
    /// space, chosen greedily in index order.
    pub fn complement_columns(&self) -> Matrix {
        let n = self.rows;
        let id = Self::identity(self.field, n);
        let stacked = self.hstack(&id).expect("same field and height");
        let extra: Vec<usize> = stacked
            .independent_columns()
            .into_iter()
            .filter(|&c| c >= self.cols)
            .map(|c| c - self.cols)
            .collect();
        id.select_columns(&extra)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// A linear subspace of `F^n`, stored as a basis in reduced column echelon
/// form so that equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
}

impl Subspace {
    /// The column span of `m`.
    pub fn span(m: &Matrix) -> Self {
        let (r, piv) = m.transpose().rref();
        let keep: Vec<usize> = (0..piv.len()).collect();
        Self {
            ambient_dim: m.rows(),
            basis: r.select_rows(&keep).transpose(),
        }
    }

    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Self {
            ambient_dim: n,
            basis: Matrix::zeros(field, n, 0),
        }
    }

    pub fn whole(field: FieldSpec, n: usize) -> Self {
        Self {
            ambient_dim: n,
            basis: Matrix::identity(field, n),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    fn check(&self, other: &Self) -> Result<(), GaloisError> {
        if self.field() != other.field() {
            return Err(GaloisError::FieldMismatch(self.field(), other.field()));
        }
        if self.ambient_dim != other.ambient_dim {
            return Err(GaloisError::DimensionMismatch(format!(
                "subspaces of F^{} and F^{}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(())
    }

    /// Intersection via the kernel of `[A | -B]`: every `(y, z)` with
    /// `A y = B z` yields the common vector `A y`.
    pub fn intersect(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check(other)?;
        let f = self.field();
        let a = &self.basis;
        let mut neg_b = other.basis.clone();
        for v in neg_b.data.iter_mut() {
            *v = f.neg(*v);
        }
        let kernel = a.hstack(&neg_b)?.nullspace();
        let top: Vec<usize> = (0..a.cols()).collect();
        let ys = kernel.select_rows(&top);
        Ok(Self::span(&a.mul(&ys)?))
    }

    /// The sum `self + other`.
    pub fn join(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check(other)?;
        Ok(Self::span(&self.basis.hstack(&other.basis)?))
    }

    pub fn contains_vector(&self, v: &[Elem]) -> bool {
        if v.len() != self.ambient_dim {
            return false;
        }
        let col = Matrix::from_columns(self.field(), self.ambient_dim, &[v.to_vec()]);
        match col {
            Ok(c) => self.basis.hstack(&c).map(|m| m.rank() == self.dim()).unwrap_or(false),
            Err(_) => false,
        }
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.check(other).is_ok()
            && self
                .basis
                .hstack(&other.basis)
                .map(|m| m.rank() == self.dim())
                .unwrap_or(false)
    }
}

/// `count` vectors in `F^dim` (as columns) such that every `min(dim, count)`
/// of them are linearly independent.
///
/// When `count <= dim` the first `count` identity columns are returned.
/// Otherwise column `t` is the Vandermonde vector `(1, a, a^2, ...)` at the
/// evaluation point `a = t`, which needs `|F| >= count`.
pub fn mds_vector_family(count: usize, dim: usize, field: FieldSpec) -> Result<Matrix, GaloisError> {
    if dim == 0 {
        return Err(GaloisError::DimensionMismatch("dimension must be at least 1".into()));
    }
    if count <= dim {
        let id = Matrix::identity(field, dim);
        let idx: Vec<usize> = (0..count).collect();
        return Ok(id.select_columns(&idx));
    }
    if (count as u64) > field.order() {
        return Err(GaloisError::FieldTooSmall {
            needed: count as u64,
            order: field.order(),
        });
    }
    let mut m = Matrix::zeros(field, dim, count);
    for t in 0..count {
        let a = t as Elem;
        let mut x = 1;
        for r in 0..dim {
            m.set(r, t, x);
            x = field.mul(x, a);
        }
    }
    Ok(m)
}

/// The Desarguesian spread of `GF(2)^n`: `2^(n/2) + 1` subspaces of
/// dimension `n/2` that pairwise meet only in zero.
///
/// Coordinates are split into two halves `(x, y)`, each read as an element
/// of `GF(2^(n/2))`. The spread elements are the lines `y = λx` for every
/// `λ`, followed by the line `x = 0`.
pub fn spread_family(n: usize) -> Result<Vec<Subspace>, GaloisError> {
    if n % 2 == 1 || n == 0 {
        return Err(GaloisError::OddDimension(n));
    }
    if n > 32 {
        return Err(GaloisError::DimensionMismatch(format!("spread dimension {n} exceeds 32")));
    }
    let h = n / 2;
    let gf2 = FieldSpec::gf2();
    let half = FieldSpec::gf2m(h as u32)?;
    let bits = |v: Elem| (0..h).map(move |b| (v >> b) & 1);
    let mut out = Vec::with_capacity((1 << h) + 1);
    for lambda in 0..(1u64 << h) {
        let cols: Vec<Vec<Elem>> = (0..h)
            .map(|b| {
                let x: Elem = 1 << b;
                let y = half.mul(lambda as Elem, x);
                bits(x).chain(bits(y)).collect()
            })
            .collect();
        out.push(Subspace::span(&Matrix::from_columns(gf2, n, &cols)?));
    }
    let cols: Vec<Vec<Elem>> = (0..h)
        .map(|b| bits(0).chain(bits(1 << b)).collect())
        .collect();
    out.push(Subspace::span(&Matrix::from_columns(gf2, n, &cols)?));
    Ok(out)
}
