//! The cycle category A: n objects on a cycle, arrows u_{i-1,i}, v_{i,i-1},
//! endomorphisms k[x_i, y_i]/(x_i y_i).
//!
//! Objects are 0-based internally (`0..n`) and printed 1-based. A chain is stored in
//! application order: `chain[0]` is a_1 (applied first), `chain[k-1]` is a_k.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{HmsError, Result};
use crate::exact::{Field, Scalar};

/// Integral (D = 1) or 1/D-fractional grading: deg u_{i-1,i} = p_i/D, deg v_{i,i-1} = q_i/D.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradingData {
    pub n: usize,
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    pub denom: i64,
}

impl GradingData {
    pub fn integral(p: Vec<i64>, q: Vec<i64>) -> Result<Self> {
        let g = GradingData { n: p.len(), p, q, denom: 1 };
        g.validate()?;
        Ok(g)
    }

    /// p = q = (1, …, 1, −1).
    pub fn standard(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(HmsError::Constraint(format!("need at least 3 objects, got {n}")));
        }
        let mut p = vec![1i64; n];
        p[n - 1] = -1;
        Self::integral(p.clone(), p)
    }

    pub fn fractional(p: Vec<i64>, q: Vec<i64>, denom: i64) -> Result<Self> {
        let g = GradingData { n: p.len(), p, q, denom };
        g.validate()?;
        Ok(g)
    }

    /// The grading p_i = 2d_i + 2d_{i+1} − D, q_i = 2d_{i−2} + 2d_{i−1} − D carried by the
    /// matrix-factorization generators (indices cyclic, 1-based in the formula).
    pub fn from_mf_weights(d: [i64; 3]) -> Result<Self> {
        let denom: i64 = d.iter().sum();
        let at = |i: i64| d[i.rem_euclid(3) as usize];
        let p = (0..3).map(|i| 2 * at(i) + 2 * at(i + 1) - denom).collect();
        let q = (0..3).map(|i| 2 * at(i - 2) + 2 * at(i - 1) - denom).collect();
        Self::fractional(p, q, denom)
    }

    /// The cover grading p = (D − 2d_2, 2d_2 − D, D), q = (D − 2d_3, D, 2d_3 − D).
    pub fn from_cover_weights(d: [i64; 3]) -> Result<Self> {
        let denom: i64 = d.iter().sum();
        let p = vec![denom - 2 * d[1], 2 * d[1] - denom, denom];
        let q = vec![denom - 2 * d[2], denom, 2 * d[2] - denom];
        Self::fractional(p, q, denom)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 3 {
            return Err(HmsError::Constraint(format!("need at least 3 objects, got {n}")));
        }
        if self.p.len() != n || self.q.len() != n {
            return Err(HmsError::Constraint("p and q must both have length n".into()));
        }
        if self.denom < 1 {
            return Err(HmsError::Constraint(format!("denominator D must be positive, got {}", self.denom)));
        }
        if self.denom > 1 && n != 3 {
            return Err(HmsError::Constraint("fractional gradings are defined for n = 3 only".into()));
        }
        let want = self.denom.rem_euclid(2);
        for (name, v) in [("p", &self.p), ("q", &self.q)] {
            if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| x.rem_euclid(2) != want) {
                let kind = if want == 1 { "odd" } else { "even" };
                return Err(HmsError::Constraint(format!(
                    "{name}_{} = {x} must be {kind} (parity of D = {})",
                    i + 1,
                    self.denom
                )));
            }
            let s: i64 = v.iter().sum();
            let target = self.denom * (n as i64 - 2);
            if s != target {
                return Err(HmsError::Constraint(format!("sum of {name} is {s}, must equal D(n-2) = {target}")));
            }
        }
        Ok(())
    }

    /// d_i = (p_i + q_i)/2, so that deg x_i = 2d_i/D.
    pub fn d(&self) -> Vec<i64> {
        self.p.iter().zip(&self.q).map(|(a, b)| (a + b) / 2).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Id,
    /// x_i^k at object i.
    X,
    /// y_i^k at object i.
    Y,
    /// x_{i+1}^k u_{i,i+1} from i to i+1.
    U,
    /// v_{i,i-1} x_i^k from i to i-1.
    V,
}

/// A monomial of A. Ordering is (src, tgt, kind, exp), which fixes every tie-break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisMorphism {
    pub src: u16,
    pub tgt: u16,
    pub kind: Kind,
    pub exp: u32,
}

pub type Chain = Vec<BasisMorphism>;

/// Multidegree in Z^{2n}: slot 2i counts u_{i-1,i}, slot 2i+1 counts v_{i,i-1}.
pub type MultiDeg = Vec<i32>;

impl BasisMorphism {
    pub fn id(i: usize) -> Self {
        BasisMorphism { src: i as u16, tgt: i as u16, kind: Kind::Id, exp: 0 }
    }

    pub fn is_id(&self) -> bool {
        self.kind == Kind::Id
    }

    pub fn src(&self) -> usize {
        self.src as usize
    }

    pub fn tgt(&self) -> usize {
        self.tgt as usize
    }

    pub fn weight(&self) -> u32 {
        match self.kind {
            Kind::Id => 0,
            Kind::X | Kind::Y => 2 * self.exp,
            Kind::U | Kind::V => 2 * self.exp + 1,
        }
    }

    /// Z/2-degree (u, v odd).
    pub fn odd(&self) -> bool {
        self.weight() % 2 == 1
    }

    pub fn label(&self) -> String {
        let (s, t) = (self.src + 1, self.tgt + 1);
        let pw = |base: &str, i: u16, k: u32| match k {
            0 => String::new(),
            1 => format!("{base}_{i}"),
            _ => format!("{base}_{i}^{k}"),
        };
        match self.kind {
            Kind::Id => format!("id_{s}"),
            Kind::X => pw("x", s, self.exp),
            Kind::Y => pw("y", s, self.exp),
            Kind::U => {
                let x = pw("x", t, self.exp);
                let u = format!("u_{{{s},{t}}}");
                if x.is_empty() {
                    u
                } else {
                    format!("{x} {u}")
                }
            }
            Kind::V => {
                let x = pw("x", s, self.exp);
                let v = format!("v_{{{s},{t}}}");
                if x.is_empty() {
                    v
                } else {
                    format!("{v} {x}")
                }
            }
        }
    }
}

impl fmt::Display for BasisMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Linear combination of monomials sharing endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomElement {
    pub src: usize,
    pub tgt: usize,
    pub terms: BTreeMap<BasisMorphism, Scalar>,
}

impl HomElement {
    pub fn zero(src: usize, tgt: usize) -> Self {
        HomElement { src, tgt, terms: BTreeMap::new() }
    }

    pub fn basis(b: BasisMorphism, field: Field) -> Self {
        let mut e = Self::zero(b.src(), b.tgt());
        e.terms.insert(b, field.one());
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: BasisMorphism, c: &Scalar) -> Result<()> {
        if b.src() != self.src || b.tgt() != self.tgt {
            return Err(HmsError::Contract(format!("term {b} does not match endpoints of the element")));
        }
        crate::exact::add_term(&mut self.terms, b, c);
        Ok(())
    }

    pub fn coefficient(&self, b: &BasisMorphism) -> Option<&Scalar> {
        self.terms.get(b)
    }

    /// Degree-homogeneous components.
    pub fn components(&self, cat: &Category) -> BTreeMap<Rational64, HomElement> {
        let mut out: BTreeMap<Rational64, HomElement> = BTreeMap::new();
        for (b, c) in &self.terms {
            out.entry(cat.degree(b)).or_insert_with(|| Self::zero(self.src, self.tgt)).terms.insert(*b, c.clone());
        }
        out
    }
}

/// Handle to A_{(p,q)} (integral or fractional); immutable and cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Category {
    pub grading: GradingData,
}

impl Category {
    /// The integral category; rejects D ≠ 1.
    pub fn build(grading: GradingData) -> Result<Self> {
        if grading.denom != 1 {
            return Err(HmsError::Constraint("integral construction requires D = 1".into()));
        }
        grading.validate()?;
        Ok(Category { grading })
    }

    /// Integral or 1/D-fractional category.
    pub fn build_fractional(grading: GradingData) -> Result<Self> {
        grading.validate()?;
        Ok(Category { grading })
    }

    pub fn n(&self) -> usize {
        self.grading.n
    }

    pub fn norm(&self, i: i64) -> usize {
        i.rem_euclid(self.n() as i64) as usize
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.n()
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.n() - 1) % self.n()
    }

    /// Basis morphism constructor; validates endpoints and exponent.
    pub fn morphism(&self, kind: Kind, src: usize, exp: u32) -> Result<BasisMorphism> {
        if src >= self.n() {
            return Err(HmsError::Contract(format!("object {src} out of range")));
        }
        let tgt = match kind {
            Kind::Id | Kind::X | Kind::Y => src,
            Kind::U => self.next(src),
            Kind::V => self.prev(src),
        };
        let ok = match kind {
            Kind::Id => exp == 0,
            Kind::X | Kind::Y => exp >= 1,
            Kind::U | Kind::V => true,
        };
        if !ok {
            return Err(HmsError::Contract(format!("invalid exponent {exp} for {kind:?}")));
        }
        Ok(BasisMorphism { src: src as u16, tgt: tgt as u16, kind, exp })
    }

    pub fn u(&self, src: usize) -> BasisMorphism {
        self.morphism(Kind::U, src, 0).expect("valid object")
    }

    pub fn v(&self, src: usize) -> BasisMorphism {
        self.morphism(Kind::V, src, 0).expect("valid object")
    }

    pub fn zero_mdeg(&self) -> MultiDeg {
        vec![0; 2 * self.n()]
    }

    pub fn mdeg(&self, b: &BasisMorphism) -> MultiDeg {
        let mut m = self.zero_mdeg();
        self.add_mdeg(&mut m, b, 1);
        m
    }

    pub fn add_mdeg(&self, m: &mut MultiDeg, b: &BasisMorphism, sign: i32) {
        let k = b.exp as i32;
        let s = b.src();
        let t = b.tgt();
        match b.kind {
            Kind::Id => {}
            Kind::X => {
                m[2 * s] += sign * k;
                m[2 * s + 1] += sign * k;
            }
            Kind::Y => {
                let j = self.next(s);
                m[2 * j] += sign * k;
                m[2 * j + 1] += sign * k;
            }
            Kind::U => {
                m[2 * t] += sign * (k + 1);
                m[2 * t + 1] += sign * k;
            }
            Kind::V => {
                m[2 * s + 1] += sign * (k + 1);
                m[2 * s] += sign * k;
            }
        }
    }

    pub fn chain_mdeg(&self, c: &[BasisMorphism]) -> MultiDeg {
        let mut m = self.zero_mdeg();
        for b in c {
            self.add_mdeg(&mut m, b, 1);
        }
        m
    }

    /// Numerator of the degree of a multidegree: Σ M_u p + M_v q.
    pub fn degree_numer(&self, m: &[i32]) -> i64 {
        (0..self.n()).map(|i| m[2 * i] as i64 * self.grading.p[i] + m[2 * i + 1] as i64 * self.grading.q[i]).sum()
    }

    pub fn mdeg_degree(&self, m: &[i32]) -> Rational64 {
        Rational64::new(self.degree_numer(m), self.grading.denom)
    }

    pub fn degree(&self, b: &BasisMorphism) -> Rational64 {
        self.mdeg_degree(&self.mdeg(b))
    }

    pub fn chain_degree(&self, c: &[BasisMorphism]) -> Rational64 {
        c.iter().map(|b| self.degree(b)).sum()
    }

    /// The unique monomial in Hom(s, t) with multidegree m, if there is one.
    pub fn monomial_with_mdeg(&self, s: usize, t: usize, m: &[i32]) -> Option<BasisMorphism> {
        let n = self.n();
        let nonzero: Vec<usize> = (0..2 * n).filter(|&i| m[i] != 0).collect();
        if m.iter().any(|&x| x < 0) {
            return None;
        }
        let mk =
            |kind, src: usize, tgt: usize, exp| Some(BasisMorphism { src: src as u16, tgt: tgt as u16, kind, exp });
        if s == t {
            if nonzero.is_empty() {
                return mk(Kind::Id, s, s, 0);
            }
            let j = self.next(s);
            if nonzero == [2 * s, 2 * s + 1] && m[2 * s] == m[2 * s + 1] {
                return mk(Kind::X, s, s, m[2 * s] as u32);
            }
            let mut yj = [2 * j, 2 * j + 1];
            yj.sort_unstable();
            if nonzero == yj && m[2 * j] == m[2 * j + 1] {
                return mk(Kind::Y, s, s, m[2 * j] as u32);
            }
            return None;
        }
        if t == self.next(s) {
            let only = nonzero.iter().all(|&i| i / 2 == t);
            if only && m[2 * t] == m[2 * t + 1] + 1 {
                return mk(Kind::U, s, t, m[2 * t + 1] as u32);
            }
            return None;
        }
        if t == self.prev(s) {
            let only = nonzero.iter().all(|&i| i / 2 == s);
            if only && m[2 * s + 1] == m[2 * s] + 1 {
                return mk(Kind::V, s, t, m[2 * s] as u32);
            }
        }
        None
    }

    /// g∘f on monomials (coefficient 1 when nonzero).
    pub fn compose_basis(&self, g: &BasisMorphism, f: &BasisMorphism) -> Option<BasisMorphism> {
        debug_assert_eq!(f.tgt, g.src, "compose_basis on non-composable pair");
        use Kind::*;
        let at = |kind, src: u16, tgt: u16, exp| Some(BasisMorphism { src, tgt, kind, exp });
        match (g.kind, f.kind) {
            (Id, _) => Some(*f),
            (_, Id) => Some(*g),
            (X, X) => at(X, f.src, f.src, f.exp + g.exp),
            (Y, Y) => at(Y, f.src, f.src, f.exp + g.exp),
            (X, Y) | (Y, X) => None,
            // x_{i+1}^a x_{i+1}^k u_{i,i+1}; y_{i+1} kills u_{i,i+1}
            (X, U) => at(U, f.src, f.tgt, f.exp + g.exp),
            (Y, U) => None,
            // x^k u y^a = x^{k+a} u ; u x = 0
            (U, Y) => at(U, g.src, g.tgt, g.exp + f.exp),
            (U, X) => None,
            // v x^l x^a ; v y = 0
            (V, X) => at(V, g.src, g.tgt, g.exp + f.exp),
            (V, Y) => None,
            // y^a v x^l = v x^{l+a}; x kills v from the left
            (Y, V) => at(V, f.src, f.tgt, f.exp + g.exp),
            (X, V) => None,
            (U, V) => at(X, f.src, f.src, g.exp + f.exp + 1),
            (V, U) => at(Y, f.src, f.src, g.exp + f.exp + 1),
            (U, U) | (V, V) => None,
        }
    }

    pub fn compose(&self, g: &HomElement, f: &HomElement) -> Result<HomElement> {
        if f.tgt != g.src {
            return Err(HmsError::Contract(format!(
                "cannot compose: target {} of f differs from source {} of g",
                f.tgt + 1,
                g.src + 1
            )));
        }
        let mut out = HomElement::zero(f.src, g.tgt);
        for (gb, gc) in &g.terms {
            for (fb, fc) in &f.terms {
                if let Some(b) = self.compose_basis(gb, fb) {
                    crate::exact::add_term(&mut out.terms, b, &(gc * fc));
                }
            }
        }
        Ok(out)
    }

    /// Monomials of Hom(i, j) with weight ≤ W, optionally within an inclusive degree window.
    pub fn hom_basis(
        &self,
        i: usize,
        j: usize,
        w: u32,
        window: Option<(Rational64, Rational64)>,
    ) -> Vec<BasisMorphism> {
        let mut out = Vec::new();
        let mut push = |b: BasisMorphism| {
            if b.weight() <= w {
                out.push(b);
            }
        };
        let mk = |kind, exp| BasisMorphism { src: i as u16, tgt: j as u16, kind, exp };
        if i == j {
            push(mk(Kind::Id, 0));
            for k in 1..=w / 2 {
                push(mk(Kind::X, k));
                push(mk(Kind::Y, k));
            }
        } else if j == self.next(i) {
            for k in 0..=w / 2 {
                push(mk(Kind::U, k));
            }
        } else if j == self.prev(i) {
            for k in 0..=w / 2 {
                push(mk(Kind::V, k));
            }
        }
        out.retain(|b| b.weight() <= w);
        if let Some((lo, hi)) = window {
            out.retain(|b| {
                let d = self.degree(b);
                lo <= d && d <= hi
            });
        }
        out.sort();
        out
    }

    /// Non-identity monomials starting at s with weight ≤ w.
    pub fn letters_from(&self, s: usize, w: u32) -> Vec<BasisMorphism> {
        let mut out = Vec::new();
        for t in [s, self.next(s), self.prev(s)] {
            out.extend(self.hom_basis(s, t, w, None).into_iter().filter(|b| !b.is_id()));
        }
        out.sort();
        out.dedup();
        out
    }

    /// Non-identity monomials ending at t with weight ≤ w.
    pub fn letters_into(&self, t: usize, w: u32) -> Vec<BasisMorphism> {
        let mut out = Vec::new();
        for s in [t, self.prev(t), self.next(t)] {
            out.extend(self.hom_basis(s, t, w, None).into_iter().filter(|b| !b.is_id()));
        }
        out.sort();
        out.dedup();
        out
    }

    /// All (g, f) of non-identity monomials with g∘f = b.
    pub fn factorizations(&self, b: &BasisMorphism) -> Vec<(BasisMorphism, BasisMorphism)> {
        let w = b.weight();
        let mut out = Vec::new();
        if w < 2 {
            return out;
        }
        let mb = self.mdeg(b);
        for f in self.letters_from(b.src(), w - 1) {
            let mut rest = mb.clone();
            self.add_mdeg(&mut rest, &f, -1);
            if let Some(g) = self.monomial_with_mdeg(f.tgt(), b.tgt(), &rest) {
                if !g.is_id() && self.compose_basis(&g, &f) == Some(*b) {
                    out.push((g, f));
                }
            }
        }
        out
    }

    /// Non-identity monomials from s within componentwise budget r (exact multidegree search).
    pub fn letters_within(&self, s: usize, r: &[i32]) -> Vec<BasisMorphism> {
        let mut out = Vec::new();
        let t = self.next(s);
        let (us, vs, ut, vt) = (r[2 * s], r[2 * s + 1], r[2 * t], r[2 * t + 1]);
        let mk = |kind, tgt: usize, exp| BasisMorphism { src: s as u16, tgt: tgt as u16, kind, exp };
        for a in 1..=us.min(vs).max(0) {
            out.push(mk(Kind::X, s, a as u32));
        }
        for a in 1..=ut.min(vt).max(0) {
            out.push(mk(Kind::Y, s, a as u32));
        }
        if ut >= 1 {
            for k in 0..=(ut - 1).min(vt).max(-1) {
                out.push(mk(Kind::U, t, k as u32));
            }
        }
        if vs >= 1 {
            for k in 0..=(vs - 1).min(us).max(-1) {
                out.push(mk(Kind::V, self.prev(s), k as u32));
            }
        }
        out
    }

    /// Chains s → t of the given arity whose multidegree is exactly `m`.
    pub fn chains_exact(&self, s: usize, t: usize, arity: usize, m: &[i32]) -> Vec<Chain> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(arity);
        let mut rem = m.to_vec();
        self.chains_exact_rec(s, t, arity, &mut rem, &mut cur, &mut out);
        out
    }

    fn chains_exact_rec(
        &self,
        at: usize,
        t: usize,
        left: usize,
        rem: &mut MultiDeg,
        cur: &mut Chain,
        out: &mut Vec<Chain>,
    ) {
        let total: i32 = rem.iter().sum();
        if left == 0 {
            if at == t && total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if total < left as i32 {
            return;
        }
        if left == 1 {
            if let Some(b) = self.monomial_with_mdeg(at, t, rem) {
                if !b.is_id() {
                    cur.push(b);
                    out.push(cur.clone());
                    cur.pop();
                }
            }
            return;
        }
        for b in self.letters_within(at, rem) {
            self.add_mdeg(rem, &b, -1);
            cur.push(b);
            self.chains_exact_rec(b.tgt(), t, left - 1, rem, cur, out);
            cur.pop();
            self.add_mdeg(rem, &b, 1);
        }
    }

    /// All identity-free chains of the given arity with total weight ≤ w.
    pub fn chains_up_to_weight(&self, arity: usize, w: u32) -> Vec<Chain> {
        let mut out = Vec::new();
        for s in 0..self.n() {
            let mut cur = Vec::new();
            self.chains_w_rec(s, arity, w, &mut cur, &mut out);
        }
        out
    }

    fn chains_w_rec(&self, at: usize, left: usize, w: u32, cur: &mut Chain, out: &mut Vec<Chain>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if w < left as u32 {
            return;
        }
        for b in self.letters_from(at, w - (left as u32 - 1)) {
            cur.push(b);
            self.chains_w_rec(b.tgt(), left - 1, w - b.weight(), cur, out);
            cur.pop();
        }
    }

    /// JSON presentation: objects, generators with degrees and weights, hom bases up to weight w.
    pub fn presentation(&self, w: u32) -> serde_json::Value {
        let n = self.n();
        let mut gens = Vec::new();
        for i in 0..n {
            for b in [self.u(i), self.v(i)] {
                gens.push(serde_json::json!({
                    "name": b.label(), "source": b.src() + 1, "target": b.tgt() + 1,
                    "degree": rat_text(self.degree(&b)), "weight": b.weight(),
                }));
            }
        }
        let mut homs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let basis: Vec<_> = self
                    .hom_basis(i, j, w, None)
                    .iter()
                    .map(|b| serde_json::json!({"name": b.label(), "degree": rat_text(self.degree(b)), "weight": b.weight()}))
                    .collect();
                if !basis.is_empty() {
                    homs.push(serde_json::json!({"source": i + 1, "target": j + 1, "basis": basis}));
                }
            }
        }
        serde_json::json!({
            "n": n, "p": self.grading.p, "q": self.grading.q, "D": self.grading.denom,
            "objects": (1..=n).map(|i| format!("X_{i}")).collect::<Vec<_>>(),
            "generators": gens, "weight_cap": w, "homs": homs,
        })
    }
}

pub fn rat_text(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
