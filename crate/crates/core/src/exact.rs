//! Exact scalars (rationals or F_p) and sparse Gauss–Jordan elimination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HmsError, Result};

/// Ground field of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u64),
}

impl Field {
    pub fn parse(s: &str) -> Result<Field> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("q") || s.eq_ignore_ascii_case("rational") || s.eq_ignore_ascii_case("rationals") {
            return Ok(Field::Rational);
        }
        let digits = s.strip_prefix("F_").or_else(|| s.strip_prefix('p')).unwrap_or(s);
        let p: u64 = digits.parse().map_err(|_| HmsError::Config(format!("unknown field '{s}'")))?;
        Field::prime(p)
    }

    pub fn prime(p: u64) -> Result<Field> {
        if p < 2 || p > (1 << 31) || !is_prime(p) {
            return Err(HmsError::Config(format!("{p} is not a prime below 2^31")));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(self) -> Scalar {
        match self {
            Field::Rational => Scalar::Q(BigRational::zero()),
            Field::Prime(p) => Scalar::P(0, p),
        }
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    pub fn int(self, v: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Q(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => Scalar::P(v.rem_euclid(p as i64) as u64, p),
        }
    }

    pub fn sign(self, odd: bool) -> Scalar {
        self.int(if odd { -1 } else { 1 })
    }

    /// Reduce an exact rational into this field (None if the denominator vanishes mod p).
    pub fn from_rational(self, q: &BigRational) -> Option<Scalar> {
        match self {
            Field::Rational => Some(Scalar::Q(q.clone())),
            Field::Prime(p) => {
                let pm = BigInt::from(p);
                let num = (q.numer() % &pm + &pm) % &pm;
                let den = (q.denom() % &pm + &pm) % &pm;
                let n = num.to_u64()?;
                let d = den.to_u64()?;
                let dinv = Scalar::P(d, p).inv()?;
                Some(&Scalar::P(n, p) * &dinv)
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Field element. Mixing fields in one operation is a contract violation and panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Q(BigRational),
    P(u64, u64),
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Rational,
            Scalar::P(_, p) => Field::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_zero(),
            Scalar::P(v, _) => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_one(),
            Scalar::P(v, _) => *v == 1,
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Q(q) => Scalar::Q(q.recip()),
            Scalar::P(v, p) => Scalar::P(pow_mod(*v, p - 2, *p), *p),
        })
    }

    /// Canonical text form: "a/b" for rationals, the residue in [0,p) otherwise.
    pub fn to_text(&self) -> String {
        match self {
            Scalar::Q(q) => {
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::P(v, _) => v.to_string(),
        }
    }

    pub fn parse(field: Field, s: &str) -> Option<Scalar> {
        let s = s.trim();
        let q = if let Some((a, b)) = s.split_once('/') {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            BigRational::new(a, b)
        } else {
            BigRational::from_integer(s.parse().ok()?)
        };
        field.from_rational(&q)
    }

    /// Reduction of a rational scalar into another field.
    pub fn reduce(&self, field: Field) -> Option<Scalar> {
        match self {
            Scalar::Q(q) => field.from_rational(q),
            Scalar::P(_, _) if self.field() == field => Some(self.clone()),
            Scalar::P(_, _) => None,
        }
    }

    pub fn is_negative_rational(&self) -> bool {
        matches!(self, Scalar::Q(q) if q.is_negative())
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn field_mismatch(a: &Scalar, b: &Scalar) -> ! {
    panic!("scalar field mismatch: {} vs {}", a.field(), b.field())
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::P(a, p), Scalar::P(b, q)) if p == q => Scalar::P((a + b) % p, *p),
            _ => field_mismatch(self, o),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a - b),
            (Scalar::P(a, p), Scalar::P(b, q)) if p == q => Scalar::P((a + p - b) % p, *p),
            _ => field_mismatch(self, o),
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::P(a, p), Scalar::P(b, q)) if p == q => Scalar::P(a * b % p, *p),
            _ => field_mismatch(self, o),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::P(a, p) => Scalar::P((p - a) % p, *p),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = &*self + o;
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

/// Sparse vector: index → nonzero scalar.
pub type SparseVec = BTreeMap<usize, Scalar>;

/// Add `c·v` into `acc`, dropping cancelled entries.
pub fn axpy(acc: &mut SparseVec, c: &Scalar, v: &SparseVec) {
    for (&i, x) in v {
        let t = c * x;
        add_entry(acc, i, &t);
    }
}

pub fn add_entry(acc: &mut SparseVec, i: usize, x: &Scalar) {
    add_term(acc, i, x);
}

/// Accumulate `x` at key `k`, removing the entry if it cancels.
pub fn add_term<K: Ord>(acc: &mut BTreeMap<K, Scalar>, i: K, x: &Scalar) {
    if x.is_zero() {
        return;
    }
    match acc.get_mut(&i) {
        Some(y) => {
            *y += x;
            if y.is_zero() {
                acc.remove(&i);
            }
        }
        None => {
            acc.insert(i, x.clone());
        }
    }
}

/// Row-major sparse matrix over a single field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    field: Field,
    nrows: usize,
    ncols: usize,
    rows: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(field: Field, nrows: usize, ncols: usize) -> Self {
        SparseMatrix { field, nrows, ncols, rows: vec![SparseVec::new(); nrows] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.add(i, i, &field.one());
        }
        m
    }

    pub fn from_dense(field: Field, rows: &[Vec<i64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(field, rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "ragged dense matrix");
            for (j, &v) in r.iter().enumerate() {
                m.add(i, j, &field.int(v));
            }
        }
        m
    }

    /// Build from columns given as sparse vectors over row indices.
    pub fn from_columns(field: Field, nrows: usize, cols: &[SparseVec]) -> Self {
        let mut m = Self::zeros(field, nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (&i, x) in c {
                m.add(i, j, x);
            }
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn row(&self, i: usize) -> &SparseVec {
        &self.rows[i]
    }
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.rows[i].get(&j).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Accumulate `x` at (i, j); entries that cancel are removed.
    pub fn add(&mut self, i: usize, j: usize, x: &Scalar) {
        assert!(i < self.nrows && j < self.ncols, "index ({i},{j}) out of bounds");
        assert_eq!(x.field(), self.field, "scalar from a different field");
        add_entry(&mut self.rows[i], j, x);
    }

    pub fn mul_vec(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, r) in self.rows.iter().enumerate() {
            let mut acc = self.field.zero();
            for (j, a) in r {
                if let Some(b) = x.get(j) {
                    acc += &(a * b);
                }
            }
            if !acc.is_zero() {
                out.insert(i, acc);
            }
        }
        out
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nrows);
        let rows = perm.iter().map(|&i| self.rows[i].clone()).collect();
        SparseMatrix { field: self.field, nrows: self.nrows, ncols: self.ncols, rows }
    }
}

/// Result of Gauss–Jordan elimination: pivot rows are unit in their pivot column
/// and that column is zero elsewhere.
struct Echelon {
    pivots: Vec<(usize, SparseVec)>,
    aug: Vec<Scalar>,
    inconsistent: bool,
}

/// Gauss–Jordan elimination. Pivot choice: the sparsest remaining row, and within it
/// the column touched by fewest rows (least fill); ties go to the lowest index.
fn eliminate(m: &SparseMatrix, rhs: Option<&[Scalar]>, full: bool) -> Echelon {
    let field = m.field;
    let mut rows: Vec<SparseVec> = m.rows.clone();
    let mut aug: Vec<Scalar> = match rhs {
        Some(b) => b.to_vec(),
        None => vec![field.zero(); m.nrows],
    };
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.ncols];
    for (i, r) in rows.iter().enumerate() {
        for &j in r.keys() {
            col_rows[j].insert(i);
        }
    }
    let mut active: BTreeSet<(usize, usize)> =
        rows.iter().enumerate().filter(|(_, r)| !r.is_empty()).map(|(i, r)| (r.len(), i)).collect();
    let mut is_pivot = vec![false; m.nrows];
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    while let Some(&(len, pr)) = active.iter().next() {
        active.remove(&(len, pr));
        let pc = *rows[pr].keys().min_by_key(|&&j| (col_rows[j].len(), j)).expect("active row is nonempty");
        let inv = rows[pr][&pc].inv().expect("pivot is nonzero");
        let prow: SparseVec = rows[pr].iter().map(|(&j, x)| (j, x * &inv)).collect();
        aug[pr] = &aug[pr] * &inv;
        rows[pr] = prow.clone();
        is_pivot[pr] = true;
        pivots.push((pr, pc));
        let targets: Vec<usize> = col_rows[pc].iter().copied().filter(|&i| i != pr && (full || !is_pivot[i])).collect();
        for i in targets {
            let f = -&rows[i][&pc];
            let was_active = !is_pivot[i];
            if was_active {
                active.remove(&(rows[i].len(), i));
            }
            for &j in rows[i].keys() {
                col_rows[j].remove(&i);
            }
            axpy(&mut rows[i], &f, &prow);
            let t = &f * &aug[pr];
            aug[i] = &aug[i] + &t;
            for &j in rows[i].keys() {
                col_rows[j].insert(i);
            }
            if was_active && !rows[i].is_empty() {
                active.insert((rows[i].len(), i));
            }
        }
    }
    let inconsistent = (0..m.nrows).any(|i| !is_pivot[i] && !aug[i].is_zero());
    let pivots_out = pivots.iter().map(|&(r, c)| (c, std::mem::take(&mut rows[r]))).collect();
    let aug_out = pivots.iter().map(|&(r, _)| aug[r].clone()).collect();
    Echelon { pivots: pivots_out, aug: aug_out, inconsistent }
}

pub fn rank(m: &SparseMatrix) -> usize {
    eliminate(m, None, false).pivots.len()
}

/// Rank and a kernel basis (one vector per free column).
pub fn rank_kernel(m: &SparseMatrix) -> (usize, Vec<SparseVec>) {
    let e = eliminate(m, None, true);
    let mut pivot_cols = vec![None; m.ncols];
    for (k, (c, _)) in e.pivots.iter().enumerate() {
        pivot_cols[*c] = Some(k);
    }
    let mut kernel = Vec::new();
    for f in (0..m.ncols).filter(|&c| pivot_cols[c].is_none()) {
        let mut v = SparseVec::new();
        v.insert(f, m.field.one());
        for (c, row) in &e.pivots {
            if let Some(x) = row.get(&f) {
                v.insert(*c, -x);
            }
        }
        kernel.push(v);
    }
    (e.pivots.len(), kernel)
}

/// Some x with Mx = b (free variables set to zero), or None if b ∉ im M.
pub fn solve_in_image(m: &SparseMatrix, b: &[Scalar]) -> Result<Option<SparseVec>> {
    if b.len() != m.nrows {
        return Err(HmsError::Contract(format!(
            "right-hand side has length {} but the matrix has {} rows",
            b.len(),
            m.nrows
        )));
    }
    if let Some(x) = b.iter().find(|x| x.field() != m.field) {
        return Err(HmsError::Contract(format!("right-hand side over {} but matrix over {}", x.field(), m.field)));
    }
    let e = eliminate(m, Some(b), true);
    if e.inconsistent {
        return Ok(None);
    }
    Ok(Some(e.pivots.iter().zip(&e.aug).filter(|(_, a)| !a.is_zero()).map(|((c, _), a)| (*c, a.clone())).collect()))
}

/// dim span(Z) − dim span(B), after checking span(B) ⊆ span(Z).
pub fn quotient_dim(field: Field, z: &[SparseVec], b: &[SparseVec]) -> Result<usize> {
    let dim = z.iter().chain(b).flat_map(|v| v.keys().next_back()).map(|&i| i + 1).max().unwrap_or(0);
    let as_rows = |vs: &[&SparseVec]| {
        let mut m = SparseMatrix::zeros(field, vs.len(), dim);
        for (i, v) in vs.iter().enumerate() {
            for (&j, x) in v.iter() {
                m.add(i, j, x);
            }
        }
        m
    };
    let zr: Vec<&SparseVec> = z.iter().collect();
    let br: Vec<&SparseVec> = b.iter().collect();
    let both: Vec<&SparseVec> = z.iter().chain(b).collect();
    let rz = rank(&as_rows(&zr));
    let rb = rank(&as_rows(&br));
    if rank(&as_rows(&both)) != rz {
        return Err(HmsError::Containment(format!(
            "span(B) is not contained in span(Z) (rank Z = {rz}, rank Z+B larger)"
        )));
    }
    Ok(rz - rb)
}

/// Residue of a rational scalar as small integer if possible (for reports).
pub fn as_i64(x: &Scalar) -> Option<i64> {
    match x {
        Scalar::Q(q) if q.is_integer() => q.numer().to_i64(),
        Scalar::P(v, _) => Some(*v as i64),
        _ => None,
    }
}
