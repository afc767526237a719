//! Reduced Hochschild complex of A with the three-term differential, split into
//! multidefect blocks, and truncated cohomology.
//!
//! Every monomial has a multidegree in Z^{2n}, composition adds multidegrees, and the
//! differential preserves the multidefect Δ = mdeg(value) − mdeg(chain). So the complex
//! is a direct sum of Δ-blocks; each block is finite once input weight is capped, and
//! its internal degree is ⟨(p,q), Δ⟩/D. Signs use Z/2-degrees only, so block
//! complexes do not depend on the grading.
//!
//! Cohomology at arity k is computed from blocks truncated at input weight k + 1,
//! which is exact: in a fixed block, the part of the differential preserving
//! input weight is the bar differential of the quadratic monomial algebra
//! kQ/(uu, vv). Its cohomology sits on the diagonal (weight = arity), so the
//! weight-filtration spectral sequence degenerates at E_2 and H^k = E_2^{k,k} only
//! needs arities k − 1, k, k + 1 at weights ≤ k + 1. The unit tests check the
//! concentration and the independence of the cap directly.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Mutex;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::{BasisMorphism, Category, Chain, Kind, MultiDeg};
use crate::error::{HmsError, Result};
use crate::exact::{self, add_term, Field, Scalar, SparseMatrix, SparseVec};

/// Value of a cochain on one chain.
pub type Value = BTreeMap<BasisMorphism, Scalar>;

/// Truncation window: arity cap K and weight cap W.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub arity_cap: usize,
    pub weight_cap: u32,
}

/// Sparse multilinear map on identity-free composable chains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub arity: usize,
    pub internal_degree: Rational64,
    pub field: Field,
    pub values: BTreeMap<Chain, Value>,
    /// Arity-0 values T()_{X_i}; keyed by object.
    pub nullary: BTreeMap<usize, Value>,
}

impl Cochain {
    pub fn new(field: Field, arity: usize, internal_degree: Rational64) -> Self {
        Cochain { arity, internal_degree, field, values: BTreeMap::new(), nullary: BTreeMap::new() }
    }

    pub fn add(&mut self, chain: Chain, b: BasisMorphism, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        if chain.is_empty() {
            let v = self.nullary.entry(b.src()).or_default();
            add_term(v, b, c);
            if v.is_empty() {
                self.nullary.remove(&b.src());
            }
            return;
        }
        let v = self.values.entry(chain).or_default();
        add_term(v, b, c);
        let empty = v.is_empty();
        if empty {
            self.values.retain(|_, v| !v.is_empty());
        }
    }

    fn add_fast(&mut self, chain: Chain, b: BasisMorphism, c: &Scalar) {
        if chain.is_empty() {
            self.add(chain, b, c);
        } else {
            add_term(self.values.entry(chain).or_default(), b, c);
        }
    }

    fn prune(&mut self) {
        self.values.retain(|_, v| !v.is_empty());
        self.nullary.retain(|_, v| !v.is_empty());
    }

    pub fn get(&self, chain: &[BasisMorphism]) -> Option<&Value> {
        self.values.get(chain)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty() && self.nullary.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.values.values().map(BTreeMap::len).sum::<usize>() + self.nullary.values().map(BTreeMap::len).sum::<usize>()
    }

    /// Iterate (chain, output, coefficient), including arity-0 values with empty chains.
    pub fn entries(&self) -> impl Iterator<Item = (&[BasisMorphism], &BasisMorphism, &Scalar)> {
        let a = self.nullary.values().flat_map(|v| v.iter().map(|(b, c)| (&[][..], b, c)));
        let b = self.values.iter().flat_map(|(ch, v)| v.iter().map(move |(b, c)| (ch.as_slice(), b, c)));
        a.chain(b)
    }

    pub fn scaled(&self, c: &Scalar) -> Cochain {
        let mut out = Cochain::new(self.field, self.arity, self.internal_degree);
        for (ch, b, x) in self.entries() {
            out.add(ch.to_vec(), *b, &(c * x));
        }
        out
    }

    pub fn plus(&self, other: &Cochain) -> Cochain {
        let mut out = self.clone();
        for (ch, b, x) in other.entries() {
            out.add_fast(ch.to_vec(), *b, x);
        }
        out.prune();
        out
    }

    /// Check structural invariants: composable identity-free chains, endpoint-matching
    /// values, homogeneous degree, constant weight defect per multidefect.
    pub fn validate(&self, cat: &Category) -> Result<()> {
        for (ch, b, _) in self.entries() {
            if ch.len() != self.arity {
                return Err(HmsError::Contract("chain of wrong arity stored".into()));
            }
            if ch.iter().any(|a| a.is_id()) {
                return Err(HmsError::Contract("identity in a stored chain".into()));
            }
            if ch.windows(2).any(|w| w[0].tgt != w[1].src) {
                return Err(HmsError::Contract("non-composable chain stored".into()));
            }
            if let (Some(f), Some(l)) = (ch.first(), ch.last()) {
                if b.src != f.src || b.tgt != l.tgt {
                    return Err(HmsError::Contract(format!("value {b} has wrong endpoints")));
                }
            }
            let l = cat.degree(b) - cat.chain_degree(ch);
            if l != self.internal_degree {
                return Err(HmsError::Contract(format!(
                    "component {b} has internal degree {l}, expected {}",
                    self.internal_degree
                )));
            }
        }
        Ok(())
    }

    /// Set of multidefects occurring.
    pub fn multidefects(&self, cat: &Category) -> BTreeSet<MultiDeg> {
        self.entries().map(|(ch, b, _)| multidefect(cat, ch, b)).collect()
    }

    /// Restriction to chains of input weight ≤ w.
    pub fn truncated(&self, w: u32) -> Cochain {
        let mut out = self.clone();
        out.values.retain(|ch, _| chain_weight(ch) <= w);
        out
    }
}

pub fn chain_weight(ch: &[BasisMorphism]) -> u32 {
    ch.iter().map(BasisMorphism::weight).sum()
}

pub fn chain_odd_count(ch: &[BasisMorphism]) -> usize {
    ch.iter().filter(|a| a.odd()).count()
}

pub fn multidefect(cat: &Category, ch: &[BasisMorphism], out: &BasisMorphism) -> MultiDeg {
    let mut m = cat.mdeg(out);
    for a in ch {
        cat.add_mdeg(&mut m, a, -1);
    }
    m
}

fn chain_ends(ch: &[BasisMorphism], out: &BasisMorphism) -> (usize, usize) {
    match (ch.first(), ch.last()) {
        (Some(f), Some(l)) => (f.src(), l.tgt()),
        _ => (out.src(), out.tgt()),
    }
}

/// Contributions of the single basis cochain (chain ↦ c·out) to dT, via the three-term
/// formula with ε_j = Σ_{i≤j} |a_i| − j and N = k + l; only targets of input weight ≤ cap.
pub fn push_d(
    cat: &Category,
    chain: &[BasisMorphism],
    out: &BasisMorphism,
    c: &Scalar,
    cap: u32,
    emit: &mut impl FnMut(Chain, BasisMorphism, Scalar),
) {
    let field = c.field();
    let k = chain.len();
    let w = chain_weight(chain);
    if w > cap {
        return;
    }
    let budget = cap - w;
    // Parity of N = k + l, with l ≡ weight defect mod 2.
    let l_odd = (out.weight() + w) % 2 == 1;
    let n_odd = (k % 2 == 1) ^ l_odd;
    let (src, tgt) = chain_ends(chain, out);
    let odd_total = chain_odd_count(chain);

    // Term 1: (−1)^{N(|a_1|−1)+1} T(a_{k+1},…,a_2)·a_1, new a_1 = f.
    for f in cat.letters_into(src, budget) {
        if let Some(v) = cat.compose_basis(out, &f) {
            let odd = (n_odd && !f.odd()) ^ true;
            let mut ch = Vec::with_capacity(k + 1);
            ch.push(f);
            ch.extend_from_slice(chain);
            emit(ch, v, if odd { -c } else { c.clone() });
        }
    }
    // Term 3: (−1)^{ε_k + N} a_{k+1}·T(a_k,…,a_1), new a_{k+1} = g.
    let eps_k_odd = (odd_total + k) % 2 == 1;
    for g in cat.letters_from(tgt, budget) {
        if let Some(v) = cat.compose_basis(&g, out) {
            let odd = eps_k_odd ^ n_odd;
            let mut ch = Vec::with_capacity(k + 1);
            ch.extend_from_slice(chain);
            ch.push(g);
            emit(ch, v, if odd { -c } else { c.clone() });
        }
    }
    // Term 2: (−1)^{ε_j + N − 1} T(…, a_{j+1}a_j, …): split chain element j into (a_{j+1}, a_j).
    let mut odd_before = 0usize;
    for j in 1..=k {
        let b = &chain[j - 1];
        for (g, f) in cat.factorizations(b) {
            let eps_odd = (odd_before + f.odd() as usize + j) % 2 == 1;
            let odd = eps_odd ^ n_odd ^ true;
            let mut ch = Vec::with_capacity(k + 1);
            ch.extend_from_slice(&chain[..j - 1]);
            ch.push(f);
            ch.push(g);
            ch.extend_from_slice(&chain[j..]);
            emit(ch, *out, if odd { -c } else { c.clone() });
        }
        odd_before += b.odd() as usize;
    }
    let _ = field;
}

/// The Hochschild differential, restricted to chains of input weight ≤ cap.
pub fn hochschild_d(cat: &Category, t: &Cochain, cap: u32) -> Cochain {
    let mut out = Cochain::new(t.field, t.arity + 1, t.internal_degree);
    for (ch, b, c) in t.entries() {
        push_d(cat, ch, b, c, cap, &mut |nc, nb, x| out.add_fast(nc, nb, &x));
    }
    out.prune();
    out
}

/// Basis (chain, output) of the Δ-block at the given arity with input weight ≤ cap,
/// sorted lexicographically.
pub fn block_basis(cat: &Category, arity: usize, delta: &[i32], cap: u32) -> Vec<(Chain, BasisMorphism)> {
    let n = cat.n();
    let dsum: i32 = delta.iter().sum();
    let mut out = Vec::new();
    let out_cap = cap as i64 + dsum as i64;
    if out_cap < 0 {
        return out;
    }
    for s in 0..n {
        for t in 0..n {
            for o in cat.hom_basis(s, t, out_cap as u32, None) {
                let mut m = cat.mdeg(&o);
                for (a, d) in m.iter_mut().zip(delta) {
                    *a -= d;
                }
                if m.iter().any(|&x| x < 0) {
                    continue;
                }
                let w: i32 = m.iter().sum();
                if w as u32 > cap || (w as usize) < arity {
                    continue;
                }
                if arity == 0 {
                    if w == 0 && s == t {
                        out.push((Vec::new(), o));
                    }
                    continue;
                }
                for ch in cat.chains_exact(s, t, arity, &m) {
                    out.push((ch, o));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Matrix of d from the span of `cols` into the span of `rows` (entries outside `rows` must
/// lie beyond the weight cap).
pub fn block_d_matrix(
    cat: &Category,
    field: Field,
    cols: &[(Chain, BasisMorphism)],
    rows: &HashMap<(Chain, BasisMorphism), usize>,
    nrows: usize,
    cap: u32,
) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(field, nrows, cols.len());
    let one = field.one();
    for (j, (ch, o)) in cols.iter().enumerate() {
        push_d(cat, ch, o, &one, cap, &mut |nc, nb, x| {
            let key = (nc, nb);
            match rows.get(&key) {
                Some(&i) => m.add(i, j, &x),
                None => debug_assert!(chain_weight(&key.0) > cap, "pushed outside the block basis"),
            }
        });
    }
    m
}

pub fn index_of(basis: &[(Chain, BasisMorphism)]) -> HashMap<(Chain, BasisMorphism), usize> {
    basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect()
}

/// The three consecutive terms C^{k-1} → C^k → C^{k+1} of one block.
pub struct BlockComplex {
    pub arity: usize,
    pub delta: MultiDeg,
    pub cap: u32,
    pub prev: Vec<(Chain, BasisMorphism)>,
    pub mid: Vec<(Chain, BasisMorphism)>,
    pub next: Vec<(Chain, BasisMorphism)>,
    pub d_prev: SparseMatrix,
    pub d_mid: SparseMatrix,
}

impl BlockComplex {
    pub fn build(cat: &Category, field: Field, arity: usize, delta: &[i32], cap: u32) -> Self {
        let prev = if arity == 0 { Vec::new() } else { block_basis(cat, arity - 1, delta, cap) };
        let mid = block_basis(cat, arity, delta, cap);
        let next = block_basis(cat, arity + 1, delta, cap);
        let d_prev = block_d_matrix(cat, field, &prev, &index_of(&mid), mid.len(), cap);
        let d_mid = block_d_matrix(cat, field, &mid, &index_of(&next), next.len(), cap);
        BlockComplex { arity, delta: delta.to_vec(), cap, prev, mid, next, d_prev, d_mid }
    }

    pub fn cohomology_dim(&self) -> usize {
        if self.mid.is_empty() {
            return 0;
        }
        self.mid.len() - exact::rank(&self.d_mid) - exact::rank(&self.d_prev)
    }

    /// Cocycles (as vectors on `mid`) whose classes form a basis of the block cohomology.
    pub fn cohomology_basis(&self) -> Vec<SparseVec> {
        let (_, ker) = exact::rank_kernel(&self.d_mid);
        let field = self.d_mid.field();
        let mut span: Vec<SparseVec> = (0..self.d_prev.ncols()).map(|j| column(&self.d_prev, j)).collect();
        let mut r = rank_of(field, &span, self.mid.len());
        let mut out = Vec::new();
        for z in ker {
            span.push(z.clone());
            let r2 = rank_of(field, &span, self.mid.len());
            if r2 > r {
                r = r2;
                out.push(z);
            } else {
                span.pop();
            }
        }
        out
    }
}

pub fn column(m: &SparseMatrix, j: usize) -> SparseVec {
    (0..m.nrows()).filter_map(|i| m.row(i).get(&j).map(|x| (i, x.clone()))).collect()
}

fn rank_of(field: Field, vs: &[SparseVec], dim: usize) -> usize {
    let mut m = SparseMatrix::zeros(field, vs.len(), dim);
    for (i, v) in vs.iter().enumerate() {
        for (&j, x) in v {
            m.add(i, j, x);
        }
    }
    exact::rank(&m)
}

/// Bidegree query HH^d(A)^j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HHQuery {
    pub d: i64,
    pub j: i64,
    pub trunc: Truncation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HHEntry {
    pub d: i64,
    pub j: i64,
    pub dim: usize,
    pub stabilized: bool,
    /// Dimension at weight cap W − 2 (absent when W < 2).
    pub dim_previous_cap: Option<usize>,
    pub blocks: usize,
}

/// Extra input weight beyond arity + 1 (zero suffices; see the module notes).
pub const BLOCK_SLACK: u32 = 0;

/// Truncated HH computations sharing a block cache.
pub struct HHEngine {
    cat: Category,
    field: Field,
    cache: Mutex<HashMap<(usize, MultiDeg), usize>>,
}

impl HHEngine {
    pub fn new(cat: Category, field: Field) -> Self {
        HHEngine { cat, field, cache: Mutex::new(HashMap::new()) }
    }

    pub fn category(&self) -> &Category {
        &self.cat
    }

    /// Multidefects Δ of internal degree j met by some arity-k chain of weight-1 letters
    /// with output weight ≤ out_cap.
    pub fn window_blocks(&self, k: usize, j: Rational64, out_cap: u32) -> BTreeSet<MultiDeg> {
        let cat = &self.cat;
        let n = cat.n();
        let mut frontier: HashSet<(usize, usize, MultiDeg)> = (0..n).map(|s| (s, s, cat.zero_mdeg())).collect();
        for _ in 0..k {
            let mut nf = HashSet::with_capacity(frontier.len() * 2);
            for (s, at, m) in &frontier {
                for b in [cat.u(*at), cat.v(*at)] {
                    let mut m2 = m.clone();
                    cat.add_mdeg(&mut m2, &b, 1);
                    nf.insert((*s, b.tgt(), m2));
                }
            }
            frontier = nf;
        }
        let mut out = BTreeSet::new();
        for (s, t, m) in frontier {
            for o in cat.hom_basis(s, t, out_cap, None) {
                let mut delta = cat.mdeg(&o);
                for (a, b) in delta.iter_mut().zip(&m) {
                    *a -= b;
                }
                if cat.mdeg_degree(&delta) == j {
                    out.insert(delta);
                }
            }
        }
        out
    }

    pub fn block_dim(&self, k: usize, delta: &MultiDeg) -> usize {
        if let Some(&d) = self.cache.lock().expect("cache lock").get(&(k, delta.clone())) {
            return d;
        }
        let cap = k as u32 + 1 + BLOCK_SLACK;
        let d = BlockComplex::build(&self.cat, self.field, k, delta, cap).cohomology_dim();
        self.cache.lock().expect("cache lock").insert((k, delta.clone()), d);
        d
    }

    fn dim_for_blocks(&self, k: usize, blocks: &BTreeSet<MultiDeg>) -> usize {
        let v: Vec<&MultiDeg> = blocks.iter().collect();
        v.par_iter().map(|delta| self.block_dim(k, delta)).sum()
    }

    fn arity(&self, q: &HHQuery) -> Result<usize> {
        let k = q.d - q.j;
        if k < 0 {
            return Err(HmsError::Contract(format!("arity d - j = {k} is negative")));
        }
        let k = k as usize;
        if q.trunc.arity_cap < k + 1 {
            return Err(HmsError::Truncation(format!(
                "arity cap {} below {} needed for HH^{}(A)^{}",
                q.trunc.arity_cap,
                k + 1,
                q.d,
                q.j
            )));
        }
        if q.trunc.weight_cap == 0 && q.trunc.arity_cap == 0 {
            return Err(HmsError::Truncation("empty truncation window".into()));
        }
        Ok(k)
    }

    pub fn hh_dim(&self, q: &HHQuery) -> Result<HHEntry> {
        let k = self.arity(q)?;
        let j = Rational64::from(q.j);
        let w = q.trunc.weight_cap;
        let blocks = self.window_blocks(k, j, w);
        let dim = self.dim_for_blocks(k, &blocks);
        let dim_previous_cap = if w >= 2 {
            let b2 = self.window_blocks(k, j, w - 2);
            Some(self.dim_for_blocks(k, &b2))
        } else {
            None
        };
        Ok(HHEntry {
            d: q.d,
            j: q.j,
            dim,
            stabilized: dim_previous_cap == Some(dim),
            dim_previous_cap,
            blocks: blocks.len(),
        })
    }

    /// Cocycles spanning the truncated cohomology at (d, j), grouped by block.
    pub fn hh_representatives(&self, q: &HHQuery) -> Result<Vec<Cochain>> {
        let k = self.arity(q)?;
        let j = Rational64::from(q.j);
        let mut out = Vec::new();
        for delta in self.window_blocks(k, j, q.trunc.weight_cap) {
            if self.block_dim(k, &delta) == 0 {
                continue;
            }
            let cap = k as u32 + 1 + BLOCK_SLACK;
            let bc = BlockComplex::build(&self.cat, self.field, k, &delta, cap);
            for z in bc.cohomology_basis() {
                let mut t = Cochain::new(self.field, k, j);
                for (i, x) in z {
                    let (ch, o) = &bc.mid[i];
                    t.add(ch.clone(), *o, &x);
                }
                out.push(t);
            }
        }
        Ok(out)
    }
}

/// Closed form for HH^d(A)^j with d − j ≥ 2: 2 when j = ⌊d/2⌋(2 − n), else 0.
pub fn closed_form_hh_dim(n: usize, d: i64, j: i64) -> usize {
    if d >= 2 && d - j >= 2 && j == d.div_euclid(2) * (2 - n as i64) {
        2
    } else {
        0
    }
}

/// Chain u_{i,i+1}, u_{i+1,i+2}, … of `len` letters starting at i.
pub fn u_path(cat: &Category, i: usize, len: usize) -> Chain {
    let mut out = Vec::with_capacity(len);
    let mut at = i;
    for _ in 0..len {
        let b = cat.u(at);
        at = b.tgt();
        out.push(b);
    }
    out
}

/// Chain v_{i,i-1}, v_{i-1,i-2}, … of `len` letters starting at i.
pub fn v_path(cat: &Category, i: usize, len: usize) -> Chain {
    let mut out = Vec::with_capacity(len);
    let mut at = i;
    for _ in 0..len {
        let b = cat.v(at);
        at = b.tgt();
        out.push(b);
    }
    out
}

/// The cochain a·id on every m-fold u-cycle and b·id on every m-fold v-cycle
/// (arity mn); closed only up to higher input weight.
pub fn bare_phi(cat: &Category, field: Field, a: &Scalar, b: &Scalar, m: usize) -> Cochain {
    let n = cat.n();
    let mut t = Cochain::new(field, m * n, Rational64::from(m as i64 * (2 - n as i64)));
    for i in 0..n {
        t.add(u_path(cat, i, m * n), BasisMorphism::id(i), a);
        t.add(v_path(cat, i, m * n), BasisMorphism::id(i), b);
    }
    t
}

/// Solve d(T + C) = rhs on chains of weight ≤ cap for a correction C supported off the
/// support of T, block by block. `rhs` may be empty (plain lifting to a cocycle).
pub fn solve_with_fixed(cat: &Category, fixed: &Cochain, rhs: &Cochain, cap: u32) -> Result<Cochain> {
    let field = fixed.field;
    let k = fixed.arity;
    let dfix = hochschild_d(cat, fixed, cap);
    let target = rhs.plus(&dfix.scaled(&field.int(-1)));
    let mut blocks: BTreeMap<MultiDeg, Vec<(Chain, BasisMorphism, Scalar)>> = BTreeMap::new();
    for (ch, b, c) in target.entries() {
        blocks.entry(multidefect(cat, ch, b)).or_default().push((ch.to_vec(), *b, c.clone()));
    }
    let fixed_keys: HashSet<(Chain, BasisMorphism)> = fixed.entries().map(|(ch, b, _)| (ch.to_vec(), *b)).collect();
    let solved: Vec<Result<Vec<(Chain, BasisMorphism, Scalar)>>> = blocks
        .par_iter()
        .map(|(delta, entries)| {
            let cols: Vec<(Chain, BasisMorphism)> =
                block_basis(cat, k, delta, cap).into_iter().filter(|key| !fixed_keys.contains(key)).collect();
            let rows = block_basis(cat, k + 1, delta, cap);
            let idx = index_of(&rows);
            let m = block_d_matrix(cat, field, &cols, &idx, rows.len(), cap);
            let mut b = vec![field.zero(); rows.len()];
            for (ch, o, c) in entries {
                match idx.get(&(ch.clone(), *o)) {
                    Some(&i) => b[i] = c.clone(),
                    None => {
                        return Err(HmsError::Contract("right-hand side outside its block basis".into()));
                    }
                }
            }
            match exact::solve_in_image(&m, &b)? {
                Some(x) => Ok(x.into_iter().map(|(j, c)| (cols[j].0.clone(), cols[j].1, c)).collect()),
                None => Err(HmsError::Obstruction {
                    arity: k,
                    degree: crate::category::rat_text(cat.mdeg_degree(delta)),
                    defect: format!("{delta:?}"),
                }),
            }
        })
        .collect();
    let mut out = fixed.clone();
    for r in solved {
        for (ch, b, c) in r? {
            out.add_fast(ch, b, &c);
        }
    }
    out.prune();
    Ok(out)
}

/// φ^{a,b} lifted to an honest cocycle within input weight ≤ cap.
pub fn phi_cocycle(cat: &Category, field: Field, a: &Scalar, b: &Scalar, cap: u32) -> Result<Cochain> {
    let bare = bare_phi(cat, field, a, b, 1);
    let zero = Cochain::new(field, bare.arity + 1, bare.internal_degree);
    solve_with_fixed(cat, &bare, &zero, cap)
}

/// Whether a cocycle is a coboundary within input weight ≤ cap (block by block).
pub fn is_coboundary(cat: &Category, t: &Cochain, cap: u32) -> Result<bool> {
    if t.arity == 0 {
        return Ok(t.is_zero());
    }
    let field = t.field;
    for delta in t.multidefects(cat) {
        let cols = block_basis(cat, t.arity - 1, &delta, cap);
        let rows = block_basis(cat, t.arity, &delta, cap);
        let idx = index_of(&rows);
        let m = block_d_matrix(cat, field, &cols, &idx, rows.len(), cap);
        let mut b = vec![field.zero(); rows.len()];
        for (ch, o, c) in t.entries() {
            if multidefect(cat, ch, o) != delta {
                continue;
            }
            match idx.get(&(ch.to_vec(), *o)) {
                Some(&i) => b[i] = c.clone(),
                None => return Err(HmsError::Contract("cochain entry beyond the weight cap".into())),
            }
        }
        if exact::solve_in_image(&m, &b)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// (a, b)-coordinates of a class: id-coefficients at the m-fold u- and v-cycles from X_1.
pub fn phi_coordinates(cat: &Category, t: &Cochain, m: usize) -> (Scalar, Scalar) {
    let field = t.field;
    let n = cat.n();
    let id = BasisMorphism::id(0);
    let read = |ch: Chain| t.get(&ch).and_then(|v| v.get(&id)).cloned().unwrap_or_else(|| field.zero());
    (read(u_path(cat, 0, m * n)), read(v_path(cat, 0, m * n)))
}

pub fn is_pure_cycle_word(ch: &[BasisMorphism]) -> bool {
    ch.iter().all(|b| b.kind == Kind::U && b.exp == 0) || ch.iter().all(|b| b.kind == Kind::V && b.exp == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::GradingData;
    use proptest::prelude::*;

    const Q: Field = Field::Rational;

    fn a3() -> Category {
        Category::build(GradingData::integral(vec![1, 1, -1], vec![1, -1, 1]).unwrap()).unwrap()
    }

    fn a4() -> Category {
        Category::build(GradingData::integral(vec![1, 1, 1, -1], vec![1, 1, 1, -1]).unwrap()).unwrap()
    }

    fn a5() -> Category {
        Category::build(GradingData::integral(vec![1, 1, 1, 1, -1], vec![1, 1, 1, 1, -1]).unwrap()).unwrap()
    }

    fn trunc(w: u32) -> Truncation {
        Truncation { arity_cap: 20, weight_cap: w }
    }

    /// Direct pull-style evaluation of dT on one chain, written independently of push_d.
    fn d_on_chain(cat: &Category, t: &Cochain, ch: &[BasisMorphism]) -> Value {
        let field = t.field;
        let k = t.arity;
        assert_eq!(ch.len(), k + 1);
        let mut out = Value::new();
        let deg = |a: &BasisMorphism| a.odd() as i64;
        let eval = |c: &[BasisMorphism]| -> Value {
            if c.is_empty() {
                unreachable!()
            }
            t.get(c).cloned().unwrap_or_default()
        };
        let defect_odd = |v: &BasisMorphism, c: &[BasisMorphism]| (v.weight() + chain_weight(c)) % 2 == 1;
        // a_1 = ch[0], a_{k+1} = ch[k]
        let a1 = ch[0];
        for (v, c) in eval(&ch[1..]) {
            let n = k as i64 + defect_odd(&v, &ch[1..]) as i64;
            if let Some(p) = cat.compose_basis(&v, &a1) {
                let s = field.sign((n * (deg(&a1) - 1) + 1).rem_euclid(2) == 1);
                add_term(&mut out, p, &(&s * &c));
            }
        }
        for j in 1..=k {
            let (aj, aj1) = (ch[j - 1], ch[j]);
            let Some(prod) = cat.compose_basis(&aj1, &aj) else { continue };
            let mut c2: Chain = ch[..j - 1].to_vec();
            c2.push(prod);
            c2.extend_from_slice(&ch[j + 1..]);
            let eps: i64 = ch[..j].iter().map(deg).sum::<i64>() - j as i64;
            for (v, c) in eval(&c2) {
                let n = k as i64 + defect_odd(&v, &c2) as i64;
                let s = field.sign((eps + n - 1).rem_euclid(2) == 1);
                add_term(&mut out, v, &(&s * &c));
            }
        }
        let ak1 = ch[k];
        let eps: i64 = ch[..k].iter().map(deg).sum::<i64>() - k as i64;
        for (v, c) in eval(&ch[..k]) {
            let n = k as i64 + defect_odd(&v, &ch[..k]) as i64;
            if let Some(p) = cat.compose_basis(&ak1, &v) {
                let s = field.sign((eps + n).rem_euclid(2) == 1);
                add_term(&mut out, p, &(&s * &c));
            }
        }
        out
    }

    fn random_cochain(cat: &Category, k: usize, w: u32, seed: u64) -> Cochain {
        let mut t = Cochain::new(Q, k, Rational64::from(0));
        let mut s = seed;
        for ch in cat.chains_up_to_weight(k, w) {
            let (src, tgt) = (ch[0].src(), ch[k - 1].tgt());
            for o in cat.hom_basis(src, tgt, w, None) {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if (s >> 60) < 3 {
                    let c = ((s >> 40) % 5) as i64 - 2;
                    t.add(ch.clone(), o, &Q.int(c));
                }
            }
        }
        // internal degree is not homogeneous here; d only uses parities.
        t
    }

    #[test]
    fn push_matches_pull_evaluation() {
        let cat = a3();
        for k in 1..3 {
            let t = random_cochain(&cat, k, 5, 7 + k as u64);
            let dt = hochschild_d(&cat, &t, 6);
            for ch in cat.chains_up_to_weight(k + 1, 6) {
                let direct = d_on_chain(&cat, &t, &ch);
                let pushed = dt.get(&ch).cloned().unwrap_or_default();
                assert_eq!(direct, pushed, "chain {ch:?}");
            }
        }
    }

    #[test]
    fn d_squared_vanishes() {
        for cat in [a3(), a4(), a5()] {
            for k in 0..3 {
                let t = if k == 0 {
                    let mut t = Cochain::new(Q, 0, Rational64::from(0));
                    for i in 0..cat.n() {
                        for o in cat.hom_basis(i, i, 4, None) {
                            t.add(Vec::new(), o, &Q.int(i as i64 + o.exp as i64 + 1));
                        }
                    }
                    t
                } else {
                    random_cochain(&cat, k, 5, 11 * k as u64 + cat.n() as u64)
                };
                let ddt = hochschild_d(&cat, &hochschild_d(&cat, &t, 8), 8);
                assert!(ddt.is_zero(), "n = {}, k = {k}", cat.n());
            }
        }
    }

    #[test]
    fn unit_is_central() {
        let cat = a3();
        let mut t = Cochain::new(Q, 0, Rational64::from(0));
        for i in 0..3 {
            t.add(Vec::new(), BasisMorphism::id(i), &Q.one());
        }
        assert!(hochschild_d(&cat, &t, 10).is_zero());
    }

    #[test]
    fn d_of_x_multiplication_on_u12() {
        // T: u_{1,2} ↦ x_2 u_{1,2}; dT(v_{2,1}, u_{1,2}) has an x-component.
        let cat = a3();
        let mut t = Cochain::new(Q, 1, Rational64::from(2));
        t.add(vec![cat.u(0)], cat.morphism(Kind::U, 0, 1).unwrap(), &Q.one());
        let dt = hochschild_d(&cat, &t, 6);
        let v = dt.get(&[cat.u(0), cat.v(1)]).expect("nonzero value");
        assert!(v.keys().any(|b| b.kind == Kind::Y), "{v:?}");
        // (v_{2,1}, u_{1,2}) written left to right is a_2 = v_{2,1}, a_1 = u_{1,2}; its value lies in
        // A(X_1, X_1), where v_{2,1} x_2 u_{1,2} = y_1^2.
        let y1sq = cat.morphism(Kind::Y, 0, 2).unwrap();
        assert_eq!(v.get(&y1sq), Some(&Q.int(-1)));
        // and the mirrored chain (u_{1,2}, v_{2,1}) gives the x-component x_2^2
        let v2 = dt.get(&[cat.v(1), cat.u(0)]).expect("nonzero value");
        let x2sq = cat.morphism(Kind::X, 1, 2).unwrap();
        assert!(v2.contains_key(&x2sq));
    }

    #[test]
    fn differential_preserves_multidefect_and_degree() {
        let cat = a4();
        let ch = vec![cat.u(0), cat.u(1)];
        assert!(cat.monomial_with_mdeg(0, 2, &cat.chain_mdeg(&ch)).is_none());
        let ch = vec![cat.u(0), cat.v(1)];
        let y2 = cat.morphism(Kind::Y, 0, 2).unwrap();
        let l = cat.degree(&y2) - cat.chain_degree(&ch);
        let mut t = Cochain::new(Q, 2, l);
        t.add(ch, y2, &Q.one());
        let dt = hochschild_d(&cat, &t, 8);
        let deltas = dt.multidefects(&cat);
        assert_eq!(deltas, t.multidefects(&cat));
        dt.validate(&cat).unwrap();
    }

    #[test]
    fn bar_cohomology_is_diagonal() {
        // Blocks with no arity-k chain of weight k carry no cohomology at arity k.
        let cat = a3();
        let eng = HHEngine::new(cat.clone(), Q);
        for k in 2..5 {
            let mut seen = BTreeSet::new();
            for ch in cat.chains_up_to_weight(k, k as u32 + 2) {
                if chain_weight(&ch) == k as u32 {
                    continue;
                }
                let (s, t) = (ch[0].src(), ch[k - 1].tgt());
                for o in cat.hom_basis(s, t, 6, None) {
                    let delta = multidefect(&cat, &ch, &o);
                    if !seen.insert(delta.clone()) {
                        continue;
                    }
                    let pure = block_basis(&cat, k, &delta, k as u32).len();
                    if pure == 0 {
                        assert_eq!(eng.block_dim(k, &delta), 0, "k = {k}, Δ = {delta:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn block_cohomology_is_stable_in_the_cap() {
        let cat = a3();
        let eng = HHEngine::new(cat.clone(), Q);
        for (d, j) in [(2i64, -1i64), (3, -1), (4, -2), (2, -2), (3, 0)] {
            let k = (d - j) as usize;
            for delta in eng.window_blocks(k, Rational64::from(j), 6) {
                let dims: Vec<usize> = (0..3)
                    .map(|s| BlockComplex::build(&cat, Q, k, &delta, k as u32 + 1 + s).cohomology_dim())
                    .collect();
                assert!(dims.iter().all(|&x| x == dims[0]), "({d},{j}) Δ = {delta:?}: {dims:?}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let eng3 = HHEngine::new(a3(), Q);
        let q = |d, j| HHQuery { d, j, trunc: trunc(8) };
        assert_eq!(eng3.hh_dim(&q(2, -1)).unwrap().dim, 2);
        assert_eq!(eng3.hh_dim(&q(3, -1)).unwrap().dim, 2);
        assert_eq!(eng3.hh_dim(&q(2, -2)).unwrap().dim, 0);
        let eng5 = HHEngine::new(a5(), Q);
        let e = eng5.hh_dim(&q(2, -3)).unwrap();
        assert_eq!((e.dim, e.stabilized), (2, true));
    }

    #[test]
    fn small_cap_is_not_stabilized_and_arity_cap_is_reported() {
        let eng = HHEngine::new(a3(), Q);
        let e = eng.hh_dim(&HHQuery { d: 2, j: -1, trunc: Truncation { arity_cap: 20, weight_cap: 0 } }).unwrap();
        assert!(!e.stabilized);
        let r = eng.hh_dim(&HHQuery { d: 2, j: -1, trunc: Truncation { arity_cap: 3, weight_cap: 8 } });
        assert!(matches!(r, Err(HmsError::Truncation(_))));
    }

    #[test]
    fn phi_classes() {
        for cat in [a3(), a4()] {
            let n = cat.n();
            let cap = 9;
            let p10 = phi_cocycle(&cat, Q, &Q.one(), &Q.zero(), cap).unwrap();
            let p01 = phi_cocycle(&cat, Q, &Q.zero(), &Q.one(), cap).unwrap();
            for p in [&p10, &p01] {
                assert!(hochschild_d(&cat, p, cap).is_zero());
                assert!(!is_coboundary(&cat, p, cap).unwrap());
                p.validate(&cat).unwrap();
            }
            assert_eq!(phi_coordinates(&cat, &p10, 1), (Q.one(), Q.zero()));
            assert_eq!(phi_coordinates(&cat, &p01, 1), (Q.zero(), Q.one()));
            let mix = p10.plus(&p01.scaled(&Q.int(3)));
            assert!(!is_coboundary(&cat, &mix, cap).unwrap());
            // the computed representatives pair nondegenerately with the (a,b)-coordinates
            let eng = HHEngine::new(cat.clone(), Q);
            let q = HHQuery { d: 2, j: 2 - n as i64, trunc: Truncation { arity_cap: 20, weight_cap: 8 } };
            let reps = eng.hh_representatives(&q).unwrap();
            assert_eq!(reps.len(), 2);
            let coords: Vec<(Scalar, Scalar)> = reps.iter().map(|r| phi_coordinates(&cat, r, 1)).collect();
            let det = &(&coords[0].0 * &coords[1].1) - &(&coords[0].1 * &coords[1].0);
            assert!(!det.is_zero());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn d_squared_random(seed in any::<u64>(), k in 1usize..3) {
            let cat = a4();
            let t = random_cochain(&cat, k, 4, seed);
            prop_assert!(hochschild_d(&cat, &hochschild_d(&cat, &t, 7), 7).is_zero());
        }
    }
}
