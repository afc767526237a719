//! Minimal A∞-structures on A: relation and functor checkers, the obstruction-theoretic
//! extension from a seed m_n, the (a, b) invariants, and the sign twist.
//!
//! Conventions. A chain is stored in application order (chain[0] = a_1 is applied
//! first); written left to right it is (a_k, …, a_1). The relations are
//!   Σ_{s+l+t=N} (−1)^{s+lt} m_{N−l+1}(id^s ⊗ m_l ⊗ id^t) = 0,
//! evaluated with the Koszul rule: m_l inserted behind the s leftmost inputs picks up
//! (−1)^{l·Σ_{left}|a|}. Z/2-degrees are weight parities.
//!
//! The part of the arity-(k+1) relation that is linear in m_k equals the Hochschild
//! differential after a diagonal twist: with T = (−1)^{σ}·m_k, σ(a_1,…,a_k) = Σ_i i|a_i|,
//!   L(m_k)(c) = (−1)^{k+1+σ(c)+S(c)} (dT)(c),   S(c) = Σ|a_i|.
//! Extension solves dT_k = −(−1)^{k+1+σ+S}·Q_k block by block, Q_k being the quadratic part.

use std::collections::{BTreeMap, HashMap};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::category::{BasisMorphism, Category, Chain, HomElement, Kind};
use crate::error::{HmsError, Result};
use crate::exact::{add_term, Field, Scalar};
use crate::hochschild::{
    chain_odd_count, chain_weight, hochschild_d, is_pure_cycle_word, multidefect, solve_with_fixed, u_path, v_path,
    Cochain, Truncation, Value,
};

/// σ(c) = Σ_i i|a_i| (1-based positions) mod 2.
pub fn sigma_odd(ch: &[BasisMorphism]) -> bool {
    ch.iter().enumerate().filter(|(i, a)| a.odd() && (i + 1) % 2 == 1).count() % 2 == 1
}

fn chi_odd(k: usize, ch: &[BasisMorphism]) -> bool {
    ((k + 1) % 2 == 1) ^ sigma_odd(ch) ^ (chain_odd_count(ch) % 2 == 1)
}

/// T = (−1)^σ m (an involution).
pub fn twist_to_hochschild(m: &Cochain) -> Cochain {
    let mut out = Cochain::new(m.field, m.arity, m.internal_degree);
    for (ch, b, c) in m.entries() {
        let c = if sigma_odd(ch) { -c } else { c.clone() };
        out.add(ch.to_vec(), *b, &c);
    }
    out
}

#[derive(Clone, Debug)]
pub struct AInftyStructure {
    pub cat: Category,
    pub field: Field,
    pub trunc: Truncation,
    /// m_k for 3 ≤ k ≤ K (absent means zero).
    pub higher: BTreeMap<usize, Cochain>,
}

impl AInftyStructure {
    /// The category itself: m_{≥3} = 0.
    pub fn trivial(cat: Category, field: Field, trunc: Truncation) -> Self {
        AInftyStructure { cat, field, trunc, higher: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.cat.n()
    }

    pub fn product(&self, k: usize) -> Option<&Cochain> {
        self.higher.get(&k)
    }

    pub fn is_trivial(&self) -> bool {
        self.higher.values().all(Cochain::is_zero)
    }

    /// m_k(chain) for k ≥ 2; strictly unital.
    pub fn eval(&self, k: usize, ch: &[BasisMorphism]) -> Value {
        debug_assert_eq!(ch.len(), k);
        let mut out = Value::new();
        if k == 2 {
            if let Some(b) = self.cat.compose_basis(&ch[1], &ch[0]) {
                out.insert(b, self.field.one());
            }
            return out;
        }
        if k < 2 || ch.iter().any(BasisMorphism::is_id) {
            return out;
        }
        self.higher.get(&k).and_then(|m| m.get(ch)).cloned().unwrap_or_default()
    }

    /// m_k on arbitrary elements, expanded multilinearly.
    pub fn eval_elements(&self, args: &[HomElement]) -> Result<HomElement> {
        let (first, last) = match (args.first(), args.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(HmsError::Contract("m_k needs at least one argument".into())),
        };
        if args.windows(2).any(|w| w[0].tgt != w[1].src) {
            return Err(HmsError::Contract("arguments are not composable".into()));
        }
        let mut out = HomElement::zero(first.src, last.tgt);
        let k = args.len();
        if k == 1 {
            return Ok(out);
        }
        let mut cur: Vec<BasisMorphism> = Vec::with_capacity(k);
        self.expand(args, &mut cur, &self.field.one(), &mut out);
        Ok(out)
    }

    fn expand(&self, args: &[HomElement], cur: &mut Chain, c: &Scalar, out: &mut HomElement) {
        if cur.len() == args.len() {
            for (b, x) in self.eval(args.len(), cur) {
                add_term(&mut out.terms, b, &(c * &x));
            }
            return;
        }
        for (b, x) in &args[cur.len()].terms {
            cur.push(*b);
            self.expand(args, cur, &(c * x), out);
            cur.pop();
        }
    }

    /// Degree and identity-freeness invariants of every stored product.
    pub fn validate(&self) -> Result<()> {
        for (&k, m) in &self.higher {
            if m.arity != k || m.internal_degree != Rational64::from(2 - k as i64) {
                return Err(HmsError::Contract(format!("m_{k} stored with wrong arity or degree")));
            }
            m.validate(&self.cat)?;
        }
        Ok(())
    }

    /// Same products, degrees recomputed in another grading of the same quiver.
    pub fn regraded(&self, cat: Category) -> Result<Self> {
        if cat.n() != self.n() {
            return Err(HmsError::Contract("regrading needs the same number of objects".into()));
        }
        let s = AInftyStructure { cat, ..self.clone() };
        s.validate()?;
        Ok(s)
    }

    /// Weight defects of all nonzero higher components.
    pub fn weight_defects(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self
            .higher
            .values()
            .flat_map(|m| m.entries().map(|(ch, b, _)| b.weight() as i64 - chain_weight(ch) as i64).collect::<Vec<_>>())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut prods = Vec::new();
        for (&k, m) in &self.higher {
            for (ch, b, c) in m.entries() {
                prods.push(serde_json::json!({
                    "k": k,
                    "chain": ch.iter().map(BasisMorphism::label).collect::<Vec<_>>(),
                    "output": b.label(),
                    "coefficient": c.to_text(),
                }));
            }
        }
        serde_json::json!({
            "n": self.n(),
            "field": self.field.to_string(),
            "arity_cap": self.trunc.arity_cap,
            "weight_cap": self.trunc.weight_cap,
            "products": prods,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub arity: usize,
    pub chain: Vec<String>,
    pub residual: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub max_arity: usize,
    pub weight_cap: u32,
    pub defects: usize,
    pub first_violation: Option<Violation>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.defects == 0
    }
}

fn sign(c: &Scalar, odd: bool) -> Scalar {
    if odd {
        -c
    } else {
        c.clone()
    }
}

fn odd_sum(ch: &[BasisMorphism]) -> bool {
    chain_odd_count(ch) % 2 == 1
}

/// Push-join of the arity-N relation restricted to terms involving at least one stored
/// product m_{≥3}. `linear` toggles the terms pairing a stored product with m_2, and
/// `inner` restricts the arity of the inner stored product in the quadratic terms.
fn relation_terms(
    m: &AInftyStructure,
    big_n: usize,
    linear: bool,
    inner: std::ops::RangeInclusive<usize>,
) -> BTreeMap<Chain, Value> {
    let cat = &m.cat;
    let w = m.trunc.weight_cap;
    let mut acc: BTreeMap<Chain, Value> = BTreeMap::new();
    let mut emit = |ch: Chain, b: BasisMorphism, c: Scalar| {
        add_term(acc.entry(ch).or_default(), b, &c);
    };
    if linear && big_n >= 4 {
        let l = big_n - 1;
        if let Some(ml) = m.higher.get(&l) {
            for (c, o, x) in ml.entries() {
                let budget = w.saturating_sub(chain_weight(c));
                if chain_weight(c) > w {
                    continue;
                }
                // m_2(m_l(…), a_1): s = 0, t = 1
                for f in cat.letters_into(c[0].src(), budget) {
                    if let Some(v) = cat.compose_basis(o, &f) {
                        let mut ch = vec![f];
                        ch.extend_from_slice(c);
                        emit(ch, v, sign(x, l % 2 == 1));
                    }
                }
                // m_2(a_N, m_l(…)): s = 1, t = 0
                for g in cat.letters_from(c[l - 1].tgt(), budget) {
                    if let Some(v) = cat.compose_basis(&g, o) {
                        let mut ch = c.to_vec();
                        ch.push(g);
                        emit(ch, v, sign(x, true ^ (l % 2 == 1 && g.odd())));
                    }
                }
                // m_l(…, m_2(a_{t+2}, a_{t+1}), …): s = N − t − 2
                for t in 0..l {
                    for (g, f) in cat.factorizations(&c[t]) {
                        let mut ch = Vec::with_capacity(big_n);
                        ch.extend_from_slice(&c[..t]);
                        ch.push(f);
                        ch.push(g);
                        ch.extend_from_slice(&c[t + 1..]);
                        emit(ch, *o, sign(x, (big_n - t - 2) % 2 == 1));
                    }
                }
            }
        }
    }
    // Both stored: inner m_l with output o plugged into position t of an outer chain.
    let mut by_output: HashMap<BasisMorphism, Vec<(usize, &[BasisMorphism], &Scalar)>> = HashMap::new();
    for l in inner.clone() {
        if let Some(ml) = m.higher.get(&l) {
            for (c, o, x) in ml.entries() {
                if !o.is_id() {
                    by_output.entry(*o).or_default().push((l, c, x));
                }
            }
        }
    }
    for l in inner {
        let outer = big_n + 1 - l;
        if outer < 3 || l < 3 {
            continue;
        }
        let Some(mo) = m.higher.get(&outer) else { continue };
        for (c2, o2, x2) in mo.entries() {
            let w2 = chain_weight(c2);
            for t in 0..outer {
                let Some(cands) = by_output.get(&c2[t]) else { continue };
                let left_odd = odd_sum(&c2[t + 1..]);
                let s = outer - t - 1;
                for &(li, c, x) in cands {
                    if li != l || w2 - c2[t].weight() + chain_weight(c) > w {
                        continue;
                    }
                    let odd = (s % 2 == 1) ^ (l * t % 2 == 1) ^ (l % 2 == 1 && left_odd);
                    let mut ch = Vec::with_capacity(big_n);
                    ch.extend_from_slice(&c2[..t]);
                    ch.extend_from_slice(c);
                    ch.extend_from_slice(&c2[t + 1..]);
                    emit(ch, *o2, sign(&(x * x2), odd));
                }
            }
        }
    }
    for v in acc.values_mut() {
        v.retain(|_, c| !c.is_zero());
    }
    acc.retain(|_, v| !v.is_empty());
    acc
}

/// Full relation residual on one chain, by direct evaluation of every term.
pub fn relation_value(m: &AInftyStructure, ch: &[BasisMorphism]) -> Value {
    let big_n = ch.len();
    let mut out = Value::new();
    for t in 0..big_n {
        for l in 2..=(big_n - t) {
            let outer = big_n - l + 1;
            if outer < 2 {
                continue;
            }
            let s = big_n - t - l;
            let left_odd = odd_sum(&ch[t + l..]);
            let odd = (s % 2 == 1) ^ (l * t % 2 == 1) ^ (l % 2 == 1 && left_odd);
            for (r, x) in m.eval(l, &ch[t..t + l]) {
                let mut c2 = Vec::with_capacity(outer);
                c2.extend_from_slice(&ch[..t]);
                c2.push(r);
                c2.extend_from_slice(&ch[t + l..]);
                for (b, y) in m.eval(outer, &c2) {
                    add_term(&mut out, b, &sign(&(&x * &y), odd));
                }
            }
        }
    }
    out
}

fn violation(arity: usize, ch: &[BasisMorphism], v: &Value) -> Violation {
    Violation {
        arity,
        chain: ch.iter().map(BasisMorphism::label).collect(),
        residual: v.iter().map(|(b, c)| (b.label(), c.to_text())).collect(),
    }
}

/// Associativity of m_2 on all composable triples of monomials of total weight ≤ w.
pub fn associativity_defect(cat: &Category, w: u32) -> Option<(BasisMorphism, BasisMorphism, BasisMorphism)> {
    for s in 0..cat.n() {
        for f in cat.letters_from(s, w) {
            for g in cat.letters_from(f.tgt(), w - f.weight()) {
                for h in cat.letters_from(g.tgt(), w - f.weight() - g.weight()) {
                    let left = cat.compose_basis(&h, &g).and_then(|hg| cat.compose_basis(&hg, &f));
                    let right = cat.compose_basis(&g, &f).and_then(|gf| cat.compose_basis(&h, &gf));
                    if left != right {
                        return Some((f, g, h));
                    }
                }
            }
        }
    }
    None
}

/// Every relation of arity ≤ K + 1 on chains of weight ≤ Wmax.
pub fn check_relations(m: &AInftyStructure) -> RelationReport {
    let w = m.trunc.weight_cap;
    let max_arity = m.trunc.arity_cap + 1;
    let mut defects = 0;
    let mut first = None;
    if let Some((f, g, h)) = associativity_defect(&m.cat, w) {
        defects += 1;
        first = Some(Violation {
            arity: 3,
            chain: vec![f.label(), g.label(), h.label()],
            residual: vec![("associativity".into(), "nonzero".into())],
        });
    }
    for big_n in 3..=max_arity {
        let terms = relation_terms(m, big_n, true, 3..=big_n);
        defects += terms.len();
        if first.is_none() {
            if let Some((ch, v)) = terms.iter().next() {
                first = Some(violation(big_n, ch, v));
            }
        }
    }
    RelationReport { max_arity, weight_cap: w, defects, first_violation: first }
}

/// The seed m_n: constant coefficient a on every u-cycle and b on every v-cycle.
pub fn cyclic_seed(cat: &Category, field: Field, a: &Scalar, b: &Scalar) -> AInftyStructure {
    let n = cat.n();
    let mut mn = Cochain::new(field, n, Rational64::from(2 - n as i64));
    for i in 0..n {
        mn.add(u_path(cat, i, n), BasisMorphism::id(i), a);
        mn.add(v_path(cat, i, n), BasisMorphism::id(i), b);
    }
    let mut higher = BTreeMap::new();
    if !mn.is_zero() {
        higher.insert(n, mn);
    }
    AInftyStructure { cat: cat.clone(), field, trunc: Truncation { arity_cap: n, weight_cap: n as u32 }, higher }
}

/// Quadratic part Q_k of the arity-(k+1) relation.
pub fn quadratic_part(m: &AInftyStructure, k: usize) -> Cochain {
    let mut q = Cochain::new(m.field, k + 1, Rational64::from(2 - k as i64));
    if k >= 4 {
        for (ch, v) in relation_terms(m, k + 1, false, 3..=k - 1) {
            for (b, c) in v {
                q.add(ch.clone(), b, &c);
            }
        }
    }
    q
}

/// Right-hand side Φ̃_k of dT_k = Φ̃_k in Hochschild form.
pub fn obstruction_cochain(m: &AInftyStructure, k: usize) -> Cochain {
    let q = quadratic_part(m, k);
    let mut out = Cochain::new(m.field, k + 1, q.internal_degree);
    for (ch, b, c) in q.entries() {
        out.add(ch.to_vec(), *b, &sign(c, !chi_odd(k, ch)));
    }
    out
}

/// Extend a seed (products through arity n) to arity K within weight ≤ Wmax.
pub fn extend_structure(seed: &AInftyStructure, trunc: Truncation) -> Result<AInftyStructure> {
    let cat = &seed.cat;
    let n = cat.n();
    let field = seed.field;
    if trunc.arity_cap < n {
        return Err(HmsError::Truncation(format!("arity cap {} below the seed arity {n}", trunc.arity_cap)));
    }
    if seed.higher.keys().any(|&k| k != n) {
        return Err(HmsError::Contract(format!("a seed carries products of arity {n} only")));
    }
    let seed_t = seed
        .higher
        .get(&n)
        .map(twist_to_hochschild)
        .unwrap_or_else(|| Cochain::new(field, n, Rational64::from(2 - n as i64)))
        .truncated(trunc.weight_cap);
    // The seed class must be closed on pure letter words (its E_1-closedness).
    let d1 = hochschild_d(cat, &seed_t, n as u32 + 1);
    if d1.entries().any(|(ch, _, _)| is_pure_cycle_word(ch)) {
        return Err(HmsError::Contract("seed is not closed on pure u- and v-words".into()));
    }
    let mut m = AInftyStructure { cat: cat.clone(), field, trunc, higher: BTreeMap::new() };
    for k in n..=trunc.arity_cap {
        let (fixed, rhs) = if k == n {
            (seed_t.clone(), Cochain::new(field, k + 1, Rational64::from(2 - k as i64)))
        } else {
            let rhs = obstruction_cochain(&m, k);
            if !hochschild_d(cat, &rhs, trunc.weight_cap).is_zero() {
                return Err(HmsError::Contract(format!("obstruction cochain at arity {k} is not closed")));
            }
            (Cochain::new(field, k, Rational64::from(2 - k as i64)), rhs)
        };
        if fixed.is_zero() && rhs.is_zero() {
            continue;
        }
        let t = solve_with_fixed(cat, &fixed, &rhs, trunc.weight_cap)?;
        let mk = twist_to_hochschild(&t);
        if !mk.is_zero() {
            m.higher.insert(k, mk);
        }
    }
    Ok(m)
}

/// (a, b) read at object i (0-based).
pub fn invariants_at(m: &AInftyStructure, i: usize) -> (Scalar, Scalar) {
    let n = m.n();
    let id = BasisMorphism::id(i);
    let read = |ch: Chain| m.eval(n, &ch).get(&id).cloned().unwrap_or_else(|| m.field.zero());
    (read(u_path(&m.cat, i, n)), read(v_path(&m.cat, i, n)))
}

/// a = m_n(u_{n,1}, …, u_{1,2})(0), b = m_n(v_{2,1}, …, v_{1,n})(0).
pub fn invariants_ab(m: &AInftyStructure) -> Result<(Scalar, Scalar)> {
    if m.trunc.arity_cap < m.n() {
        return Err(HmsError::Truncation(format!("arity cap below {}", m.n())));
    }
    Ok(invariants_at(m, 0))
}

/// Multidegree sign of u ↦ u, v ↦ −v: (−1)^{number of v letters}.
fn v_count_odd(cat: &Category, b: &BasisMorphism) -> bool {
    cat.mdeg(b).iter().skip(1).step_by(2).sum::<i32>() % 2 != 0
}

/// Transport along the strict automorphism u ↦ u, v ↦ −v, x ↦ −x.
pub fn sign_twist(m: &AInftyStructure) -> AInftyStructure {
    let cat = &m.cat;
    let mut higher = BTreeMap::new();
    for (&k, mk) in &m.higher {
        let mut out = Cochain::new(mk.field, mk.arity, mk.internal_degree);
        for (ch, b, c) in mk.entries() {
            let odd = ch.iter().fold(v_count_odd(cat, b), |acc, a| acc ^ v_count_odd(cat, a));
            out.add(ch.to_vec(), *b, &sign(c, odd));
        }
        higher.insert(k, out);
    }
    AInftyStructure { higher, ..m.clone() }
}

/// Transport along the strict automorphism scaling the generator in multidegree slot s
/// by `scales[s]` (slot 2i: u_{i−1,i}, slot 2i+1: v_{i,i−1}).
pub fn rescale_generators(m: &AInftyStructure, scales: &[Scalar]) -> Result<AInftyStructure> {
    let cat = &m.cat;
    if scales.len() != 2 * cat.n() {
        return Err(HmsError::Contract(format!("need {} generator scales", 2 * cat.n())));
    }
    let inv: Vec<Scalar> = scales
        .iter()
        .map(|c| c.inv().ok_or_else(|| HmsError::Contract("generator scales must be invertible".into())))
        .collect::<Result<_>>()?;
    let weight = |b: &BasisMorphism, table: &[Scalar]| {
        let mut acc = m.field.one();
        for (slot, &e) in cat.mdeg(b).iter().enumerate() {
            for _ in 0..e {
                acc = &acc * &table[slot];
            }
        }
        acc
    };
    let mut higher = BTreeMap::new();
    for (&k, mk) in &m.higher {
        let mut out = Cochain::new(mk.field, mk.arity, mk.internal_degree);
        for (ch, b, c) in mk.entries() {
            let mut x = c * &weight(b, scales);
            for a in ch {
                x = &x * &weight(a, &inv);
            }
            out.add(ch.to_vec(), *b, &x);
        }
        higher.insert(k, out);
    }
    Ok(AInftyStructure { higher, ..m.clone() })
}

/// Rescale u_{n,1} by a and v_{1,n} by b, so that both invariants become 1.
pub fn normalize_ab(m: &AInftyStructure) -> Result<AInftyStructure> {
    let (a, b) = invariants_ab(m)?;
    if a.is_zero() || b.is_zero() {
        return Err(HmsError::Contract("normalization needs both invariants nonzero".into()));
    }
    let mut scales = vec![m.field.one(); 2 * m.n()];
    scales[0] = a;
    scales[1] = b;
    rescale_generators(m, &scales)
}

/// Strict homotopy f with f_1 = id; f_k of degree 1 − k for k ≥ 2.
#[derive(Clone, Debug)]
pub struct StrictHomotopy {
    pub field: Field,
    pub components: BTreeMap<usize, Cochain>,
}

impl StrictHomotopy {
    pub fn identity(field: Field) -> Self {
        StrictHomotopy { field, components: BTreeMap::new() }
    }

    pub fn eval(&self, k: usize, ch: &[BasisMorphism]) -> Value {
        let mut out = Value::new();
        if k == 1 {
            out.insert(ch[0], self.field.one());
            return out;
        }
        if ch.iter().any(BasisMorphism::is_id) {
            return out;
        }
        self.components.get(&k).and_then(|f| f.get(ch)).cloned().unwrap_or_default()
    }
}

/// The part of the arity-(k+1) functor relation linear in F = f_k, moved to the m' side:
/// the relation reads m'_{k+1} − m_{k+1} = −D(F) when f_j = 0 for 1 < j < k.
pub fn functor_linear_term(cat: &Category, f: &Cochain, cap: u32) -> Cochain {
    let k = f.arity;
    let mut out = Cochain::new(f.field, k + 1, f.internal_degree);
    for (c, o, x) in f.entries() {
        let w = chain_weight(c);
        if w > cap {
            continue;
        }
        let budget = cap - w;
        // (−1)^{k+1} m'_2(F(…), a_1)
        for a in cat.letters_into(c[0].src(), budget) {
            if let Some(v) = cat.compose_basis(o, &a) {
                let mut ch = vec![a];
                ch.extend_from_slice(c);
                out.add(ch, v, &sign(x, (k + 1) % 2 == 1));
            }
        }
        // (−1)^{(k+1)|a|} m'_2(a_{k+1}, F(…))
        for a in cat.letters_from(c[k - 1].tgt(), budget) {
            if let Some(v) = cat.compose_basis(&a, o) {
                let mut ch = c.to_vec();
                ch.push(a);
                out.add(ch, v, &sign(x, k % 2 == 0 && a.odd()));
            }
        }
        // −(−1)^{s} F(…, m_2, …), s = k − 1 − t
        for t in 0..k {
            for (g, h) in cat.factorizations(&c[t]) {
                let mut ch = Vec::with_capacity(k + 1);
                ch.extend_from_slice(&c[..t]);
                ch.push(h);
                ch.push(g);
                ch.extend_from_slice(&c[t + 1..]);
                out.add(ch, *o, &sign(x, (k - 1 - t) % 2 == 0));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub max_arity: usize,
    pub defects: usize,
    pub first_violation: Option<Violation>,
}

impl HomotopyReport {
    pub fn passed(&self) -> bool {
        self.defects == 0
    }
}

/// Compositions (u_1, …, u_r) of N, u_1 taking the leftmost inputs.
fn compositions(total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for u in 1..=left {
            cur.push(u);
            rec(left - u, cur, out);
            cur.pop();
        }
    }
    rec(total, &mut Vec::new(), &mut out);
    out
}

/// LHS − RHS of the arity-N functor relation on one chain.
pub fn functor_relation_value(
    f: &StrictHomotopy,
    m: &AInftyStructure,
    mp: &AInftyStructure,
    ch: &[BasisMorphism],
) -> Value {
    let big_n = ch.len();
    let mut out = Value::new();
    for us in compositions(big_n) {
        let r = us.len();
        if r < 2 && big_n > 1 {
            // r = 1: f_N(a), on the right-hand side is the l = 1 term m_1 = 0; here m'_1 = 0.
            continue;
        }
        let eps: usize = us.iter().enumerate().map(|(j, &u)| (r - 1 - j) * (u - 1)).sum();
        // blocks in written order: u_1 leftmost = highest indices of the application-order chain
        let mut hi = big_n;
        let mut blocks: Vec<(usize, usize)> = Vec::with_capacity(r);
        let mut kosz = false;
        for &u in &us {
            let lo = hi - u;
            let left_odd = odd_sum(&ch[hi..]);
            kosz ^= (1 + u) % 2 == 1 && left_odd;
            blocks.push((lo, hi));
            hi = lo;
        }
        // expand f_{u_j}(block_j); m'_r takes them in application order (last block first)
        let vals: Vec<Value> = blocks.iter().map(|&(lo, hi)| f.eval(hi - lo, &ch[lo..hi])).collect();
        let mut acc: Vec<(Chain, Scalar)> = vec![(Vec::new(), f.field.sign((eps % 2 == 1) ^ kosz))];
        for v in vals.iter().rev() {
            let mut next = Vec::new();
            for (c, x) in &acc {
                for (b, y) in v {
                    let mut c2 = c.clone();
                    c2.push(*b);
                    next.push((c2, x * y));
                }
            }
            acc = next;
        }
        for (c, x) in acc {
            for (b, y) in mp.eval(r, &c) {
                add_term(&mut out, b, &(&x * &y));
            }
        }
    }
    if big_n == 1 {
        return out;
    }
    for t in 0..big_n {
        for l in 2..=(big_n - t) {
            let outer = big_n - l + 1;
            let s = big_n - t - l;
            let left_odd = odd_sum(&ch[t + l..]);
            let odd = (s % 2 == 1) ^ (l * t % 2 == 1) ^ (l % 2 == 1 && left_odd);
            for (rr, x) in m.eval(l, &ch[t..t + l]) {
                let mut c2 = Vec::with_capacity(outer);
                c2.extend_from_slice(&ch[..t]);
                c2.push(rr);
                c2.extend_from_slice(&ch[t + l..]);
                for (b, y) in f.eval(outer, &c2) {
                    add_term(&mut out, b, &sign(&(&x * &y), !odd));
                }
            }
        }
    }
    out
}

/// Every functor relation of arity ≤ min(K, K') on chains of weight ≤ min(W, W').
pub fn check_homotopy(f: &StrictHomotopy, m: &AInftyStructure, mp: &AInftyStructure) -> Result<HomotopyReport> {
    if m.n() != mp.n() || m.field != mp.field {
        return Err(HmsError::Contract("structures live on different categories".into()));
    }
    let max_arity = m.trunc.arity_cap.min(mp.trunc.arity_cap);
    let w = m.trunc.weight_cap.min(mp.trunc.weight_cap);
    let mut defects = 0;
    let mut first = None;
    for big_n in 2..=max_arity {
        for ch in m.cat.chains_up_to_weight(big_n, w) {
            let v = functor_relation_value(f, m, mp, &ch);
            if !v.is_empty() {
                defects += 1;
                if first.is_none() {
                    first = Some(violation(big_n, &ch, &v));
                }
            }
        }
    }
    Ok(HomotopyReport { max_arity, defects, first_violation: first })
}

/// Multidefect of a single stored product entry (for reports).
pub fn entry_defect(cat: &Category, ch: &[BasisMorphism], out: &BasisMorphism) -> Vec<i32> {
    multidefect(cat, ch, out)
}

pub fn is_cycle_seed_entry(ch: &[BasisMorphism], out: &BasisMorphism) -> bool {
    out.kind == Kind::Id && is_pure_cycle_word(ch)
}
