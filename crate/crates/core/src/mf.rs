//! Graded and Z/D-equivariant matrix factorizations of W = z_0 z_1 z_2 over
//! R = k[z_0, z_1, z_2], their 2-periodic hom complexes, and homotopy transfer of the
//! dg structure to a minimal A∞-model on the cycle category A_{(p̃,q̃)}.
//!
//! Every factorization used here has rank one in each parity, so a homogeneous map
//! T → S of fixed parity and multidegree has at most two components (one per source
//! generator), each a scalar multiple of a monomial that the slice determines.
//! Multidegrees are doubled: z_j has multidegree 2e_j, W has (2,2,2), and the
//! differentials t_0, t_1 have (1,1,1). The internal degree of multidegree m is
//! ⟨d, m⟩/D, so deg z_j = 2d_j/D.
//!
//! Conventions (objects and variables 0-based, indices mod 3):
//!   T_i: e_0 even, e_1 odd, t_0: e_0 ↦ z_{i+1}z_{i+2}·e_1, t_1: e_1 ↦ z_i·e_0;
//!   D(φ) = t∘φ − (−1)^{|φ|} φ∘t;
//!   ũ_{i−1,i}: e_0 ↦ z_{i+1}·e_1, e_1 ↦ −e_0;  ṽ_{i,i−1}: e_0 ↦ z_{i−2}·e_1, e_1 ↦ −e_0.
//! Then ũ∘ṽ = −z_{i+1}·id on T_i, so x_i ↦ −z_{i+1} and y_i ↦ −z_{i+2}. A u-letter into
//! object j has multidegree (1,1,1) − 2e_{j+2}, a v-letter out of j has (1,1,1) − 2e_j,
//! and the A-weight of a monomial is the coordinate sum of its multidegree.

use std::collections::{BTreeMap, HashMap};

use num_rational::Rational64;
use serde_json::json;

use crate::ainfty::{check_relations, invariants_ab, normalize_ab, AInftyStructure, RelationReport};
use crate::category::{rat_text, BasisMorphism, Category, Chain, GradingData, Kind, MultiDeg};
use crate::error::{HmsError, Result};
use crate::exact::{rank, rank_kernel, solve_in_image, Field, Scalar, SparseMatrix, SparseVec};
use crate::hochschild::{chain_odd_count, Cochain, Truncation, Value};

pub type Exp = [u32; 3];
/// Doubled multidegree.
pub type Mdeg3 = [i32; 3];

const HALF_W: Mdeg3 = [1, 1, 1];

fn add3(a: &Mdeg3, b: &Mdeg3) -> Mdeg3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3(a: &Mdeg3, b: &Mdeg3) -> Mdeg3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn unit3(j: usize, c: i32) -> Mdeg3 {
    let mut m = [0; 3];
    m[j % 3] = c;
    m
}

/// Weights (d_0, d_1, d_2) with D = Σ d_j > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MfWeights {
    pub d: [i64; 3],
    pub denom: i64,
}

impl MfWeights {
    pub fn new(d: [i64; 3]) -> Result<Self> {
        if d.iter().any(|&x| x < 0) {
            return Err(HmsError::Constraint(format!("weights {d:?} must be nonnegative")));
        }
        let denom = d.iter().sum();
        if denom <= 0 {
            return Err(HmsError::Constraint("D = d_1 + d_2 + d_3 must be positive".into()));
        }
        Ok(MfWeights { d, denom })
    }

    pub fn degree(&self, m: &Mdeg3) -> Rational64 {
        Rational64::new(self.numer(m), self.denom)
    }

    fn numer(&self, m: &Mdeg3) -> i64 {
        (0..3).map(|j| self.d[j] * m[j] as i64).sum()
    }

    pub fn z_degree(&self, j: usize) -> Rational64 {
        Rational64::new(2 * self.d[j % 3], self.denom)
    }

    /// Z/D-weight of a monomial.
    pub fn character(&self, e: &Exp) -> i64 {
        (0..3).map(|j| self.d[j] * e[j] as i64).sum::<i64>().rem_euclid(self.denom)
    }

    /// The grading p_i = 2d_i + 2d_{i+1} − D, q_i = 2d_{i−2} + 2d_{i−1} − D of the generators.
    pub fn grading(&self) -> Result<GradingData> {
        GradingData::from_mf_weights(self.d)
    }

    pub fn all_positive(&self) -> bool {
        self.d.iter().all(|&x| x > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub mdeg: Mdeg3,
    pub degree: Rational64,
    /// Character index mod D for equivariant factorizations.
    pub character: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFreeModule {
    pub generators: Vec<Generator>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: i64,
    pub exp: Exp,
}

impl Monomial {
    fn mul(&self, o: &Monomial) -> Monomial {
        Monomial {
            coeff: self.coeff * o.coeff,
            exp: [self.exp[0] + o.exp[0], self.exp[1] + o.exp[1], self.exp[2] + o.exp[2]],
        }
    }

    fn mdeg(&self) -> Mdeg3 {
        [2 * self.exp[0] as i32, 2 * self.exp[1] as i32, 2 * self.exp[2] as i32]
    }
}

/// T_0 ⇄ T_1 with t_0: T_0 → T_1 and t_1: T_1 → T_0 (rank one each).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFactorization {
    pub weights: MfWeights,
    pub index: usize,
    pub even: GradedFreeModule,
    pub odd: GradedFreeModule,
    pub t0: Monomial,
    pub t1: Monomial,
}

impl MatrixFactorization {
    pub fn generator(&self, parity: usize) -> &Generator {
        if parity == 0 {
            &self.even.generators[0]
        } else {
            &self.odd.generators[0]
        }
    }

    /// s in R[s] for the odd generator: 1 − 2d̃_i.
    pub fn odd_shift(&self) -> Rational64 {
        -self.generator(1).degree
    }

    /// t_1 t_0 = t_0 t_1 = W, homogeneity of degree 1, and equivariance of both entries.
    pub fn check(&self) -> Result<()> {
        let w = Monomial { coeff: 1, exp: [1, 1, 1] };
        if self.t1.mul(&self.t0) != w || self.t0.mul(&self.t1) != w {
            return Err(HmsError::Constraint(format!("T_{}: t_1 t_0 is not W", self.index + 1)));
        }
        let (g0, g1) = (self.generator(0), self.generator(1));
        if add3(&g1.mdeg, &self.t0.mdeg()) != add3(&g0.mdeg, &HALF_W)
            || add3(&g0.mdeg, &self.t1.mdeg()) != add3(&g1.mdeg, &HALF_W)
        {
            return Err(HmsError::Constraint(format!(
                "T_{}: differentials are not homogeneous of degree 1",
                self.index + 1
            )));
        }
        for g in [g0, g1] {
            if g.degree != self.weights.degree(&g.mdeg) {
                return Err(HmsError::Constraint(format!("T_{}: generator degree inconsistent", self.index + 1)));
            }
        }
        if let (Some(c0), Some(c1)) = (g0.character, g1.character) {
            let dd = self.weights.denom;
            let ok0 = (c0 + self.weights.character(&self.t0.exp) - c1).rem_euclid(dd) == 0;
            let ok1 = (c1 + self.weights.character(&self.t1.exp) - c0).rem_euclid(dd) == 0;
            if !(ok0 && ok1) {
                return Err(HmsError::Constraint(format!("T_{}: differentials are not equivariant", self.index + 1)));
            }
        }
        Ok(())
    }
}

/// T_i = {R →^{z_{i+1}z_{i+2}} R[1 − 2d̃_i] →^{z_i} R}, index taken mod 3.
pub fn build_t(weights: MfWeights, i: usize) -> MatrixFactorization {
    let i = i % 3;
    let odd_mdeg = sub3(&sub3(&HALF_W, &unit3(i + 1, 2)), &unit3(i + 2, 2));
    let gen = |mdeg: Mdeg3| Generator { mdeg, degree: weights.degree(&mdeg), character: None };
    let mut t0 = [0; 3];
    t0[(i + 1) % 3] = 1;
    t0[(i + 2) % 3] = 1;
    let mut t1 = [0; 3];
    t1[i] = 1;
    MatrixFactorization {
        weights,
        index: i,
        even: GradedFreeModule { generators: vec![gen([0; 3])] },
        odd: GradedFreeModule { generators: vec![gen(odd_mdeg)] },
        t0: Monomial { coeff: 1, exp: t0 },
        t1: Monomial { coeff: 1, exp: t1 },
    }
}

/// T̃_i^k = {R(χ_k) → R(χ_{k−d_i}) → R(χ_k)}.
pub fn build_t_equivariant(weights: MfWeights, i: usize, k: i64) -> Result<MatrixFactorization> {
    if k < 0 || k >= weights.denom {
        return Err(HmsError::Constraint(format!("sheet k = {k} outside 0..{}", weights.denom)));
    }
    let mut t = build_t(weights, i);
    let di = weights.d[t.index];
    t.even.generators[0].character = Some(k);
    t.odd.generators[0].character = Some((k - di).rem_euclid(weights.denom));
    t.check()?;
    Ok(t)
}

/// A slice of Hom(T_src, T_tgt): fixed parity and multidegree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceKey {
    pub src: usize,
    pub tgt: usize,
    pub parity: usize,
    pub mdeg: Mdeg3,
}

impl SliceKey {
    pub fn next(&self) -> SliceKey {
        SliceKey { parity: 1 - self.parity, mdeg: add3(&self.mdeg, &HALF_W), ..*self }
    }

    pub fn prev(&self) -> SliceKey {
        SliceKey { parity: 1 - self.parity, mdeg: sub3(&self.mdeg, &HALF_W), ..*self }
    }

    pub fn weight(&self) -> i32 {
        self.mdeg.iter().sum()
    }
}

/// A homogeneous map: c[a] is the coefficient of the component out of generator e_a.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MfMap {
    pub key: SliceKey,
    pub c: [Scalar; 2],
}

impl MfMap {
    pub fn zero(key: SliceKey, field: Field) -> Self {
        MfMap { key, c: [field.zero(), field.zero()] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Scalar::is_zero)
    }

    pub fn add_scaled(&mut self, x: &Scalar, o: &MfMap) -> Result<()> {
        if o.key != self.key {
            return Err(HmsError::Contract(format!(
                "adding maps from different slices {:?} and {:?}",
                self.key, o.key
            )));
        }
        for a in 0..2 {
            self.c[a] = &self.c[a] + &(x * &o.c[a]);
        }
        Ok(())
    }
}

/// A finite list of factorizations with their hom complexes.
#[derive(Clone, Debug)]
pub struct MfCategory {
    pub weights: MfWeights,
    pub objects: Vec<MatrixFactorization>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceCohomology {
    pub key: SliceKey,
    pub degree: Rational64,
    pub chain_dim: usize,
    pub dim: usize,
    /// Cocycles spanning a complement of the boundaries (echelon order).
    pub representatives: Vec<[Scalar; 2]>,
}

#[derive(Clone, Debug)]
pub struct HomCohomology {
    pub src: usize,
    pub tgt: usize,
    pub weight_cap: i32,
    pub slices: Vec<SliceCohomology>,
    /// Degrees ≤ this bound are complete under the weight cap; None when some
    /// deg z_j ≤ 0, in which case every degree is only known up to the cap.
    pub complete_through: Option<Rational64>,
}

impl HomCohomology {
    pub fn dims_by_degree(&self) -> BTreeMap<(Rational64, usize), usize> {
        let mut out = BTreeMap::new();
        for s in &self.slices {
            *out.entry((s.degree, s.key.parity)).or_insert(0) += s.dim;
        }
        out
    }

    pub fn is_capped(&self) -> bool {
        self.complete_through.is_none()
    }
}

impl MfCategory {
    /// T_0, T_1, T_2.
    pub fn standard(weights: MfWeights) -> Result<Self> {
        let objects: Vec<_> = (0..3).map(|i| build_t(weights, i)).collect();
        for t in &objects {
            t.check()?;
        }
        Ok(MfCategory { weights, objects })
    }

    /// T̃_i^k for i < 3, k < D, object index i·D + k.
    pub fn equivariant(weights: MfWeights) -> Result<Self> {
        let mut objects = Vec::new();
        for i in 0..3 {
            for k in 0..weights.denom {
                objects.push(build_t_equivariant(weights, i, k)?);
            }
        }
        Ok(MfCategory { weights, objects })
    }

    pub fn equivariant_index(&self, i: usize, k: i64) -> usize {
        i * self.weights.denom as usize + k.rem_euclid(self.weights.denom) as usize
    }

    /// Monomial of the component out of e_a, if the slice has one.
    pub fn component(&self, key: &SliceKey, a: usize) -> Option<Exp> {
        let s = &self.objects[key.src];
        let t = &self.objects[key.tgt];
        let b = a ^ key.parity;
        let diff = add3(&sub3(&key.mdeg, &t.generator(b).mdeg), &s.generator(a).mdeg);
        if diff.iter().any(|&x| x < 0 || x % 2 != 0) {
            return None;
        }
        let e = [diff[0] as u32 / 2, diff[1] as u32 / 2, diff[2] as u32 / 2];
        if let (Some(cs), Some(ct)) = (s.generator(a).character, t.generator(b).character) {
            if (cs + self.weights.character(&e) - ct).rem_euclid(self.weights.denom) != 0 {
                return None;
            }
        }
        Some(e)
    }

    fn valid(&self, key: &SliceKey) -> Vec<usize> {
        (0..2).filter(|&a| self.component(key, a).is_some()).collect()
    }

    pub fn slice_dim(&self, key: &SliceKey) -> usize {
        self.valid(key).len()
    }

    pub fn differential_map(&self, i: usize, field: Field) -> MfMap {
        let t = &self.objects[i];
        MfMap {
            key: SliceKey { src: i, tgt: i, parity: 1, mdeg: HALF_W },
            c: [field.int(t.t0.coeff), field.int(t.t1.coeff)],
        }
    }

    pub fn identity(&self, i: usize, field: Field) -> MfMap {
        MfMap { key: SliceKey { src: i, tgt: i, parity: 0, mdeg: [0; 3] }, c: [field.one(), field.one()] }
    }

    /// g ∘ f.
    pub fn compose(&self, g: &MfMap, f: &MfMap) -> Result<MfMap> {
        if f.key.tgt != g.key.src {
            return Err(HmsError::Contract("maps are not composable".into()));
        }
        let key = SliceKey {
            src: f.key.src,
            tgt: g.key.tgt,
            parity: f.key.parity ^ g.key.parity,
            mdeg: add3(&f.key.mdeg, &g.key.mdeg),
        };
        let c = [&g.c[f.key.parity] * &f.c[0], &g.c[1 ^ f.key.parity] * &f.c[1]];
        Ok(MfMap { key, c })
    }

    /// D(φ) = t∘φ − (−1)^{|φ|} φ∘t.
    pub fn differential(&self, f: &MfMap) -> MfMap {
        let field = f.c[0].field();
        let left = self.compose(&self.differential_map(f.key.tgt, field), f).expect("composable");
        let right = self.compose(f, &self.differential_map(f.key.src, field)).expect("composable");
        let mut out = left;
        out.add_scaled(&field.sign(f.key.parity == 0), &right).expect("same slice");
        out
    }

    fn unit(&self, key: SliceKey, a: usize, field: Field) -> MfMap {
        let mut m = MfMap::zero(key, field);
        m.c[a] = field.one();
        m
    }

    /// Matrix of D on the valid components of `key`, rows indexed by components of key.next().
    fn d_matrix(&self, key: &SliceKey, field: Field) -> (SparseMatrix, Vec<usize>) {
        let cols = self.valid(key);
        let mut m = SparseMatrix::zeros(field, 2, cols.len());
        for (j, &a) in cols.iter().enumerate() {
            let d = self.differential(&self.unit(*key, a, field));
            for (r, x) in d.c.iter().enumerate() {
                if !x.is_zero() {
                    m.add(r, j, x);
                }
            }
        }
        (m, cols)
    }

    fn vec_of(v: &SparseVec, cols: &[usize], field: Field) -> [Scalar; 2] {
        let mut out = [field.zero(), field.zero()];
        for (&j, x) in v {
            out[cols[j]] = x.clone();
        }
        out
    }

    /// Cocycles of a slice.
    fn cycles(&self, key: &SliceKey, field: Field) -> Vec<[Scalar; 2]> {
        let (m, cols) = self.d_matrix(key, field);
        let (_, kernel) = rank_kernel(&m);
        kernel.iter().map(|v| Self::vec_of(v, &cols, field)).collect()
    }

    /// Standard components completing the cocycles to a basis of the slice.
    fn complement(&self, key: &SliceKey, field: Field) -> Vec<[Scalar; 2]> {
        let mut basis = self.cycles(key, field);
        let mut out = Vec::new();
        for a in self.valid(key) {
            let e = self.unit(*key, a, field).c;
            let mut trial = basis.clone();
            trial.push(e.clone());
            if rank(&columns(field, &trial)) == trial.len() {
                basis = trial;
                out.push(e);
            }
        }
        out
    }

    pub fn slice_cohomology(&self, key: &SliceKey, field: Field) -> SliceCohomology {
        let chain_dim = self.slice_dim(key);
        let z = self.cycles(key, field);
        let prev = key.prev();
        let boundaries: Vec<[Scalar; 2]> = self
            .complement(&prev, field)
            .into_iter()
            .map(|k| self.differential(&MfMap { key: prev, c: k }).c)
            .collect();
        let mut span = boundaries.clone();
        let mut reps = Vec::new();
        for c in z {
            let mut trial = span.clone();
            trial.push(c.clone());
            if rank(&columns(field, &trial)) == trial.len() {
                span = trial;
                reps.push(c);
            }
        }
        SliceCohomology {
            key: *key,
            degree: self.weights.degree(&key.mdeg),
            chain_dim,
            dim: reps.len(),
            representatives: reps,
        }
    }

    /// Is v = D(w) for some w in the previous slice?
    pub fn is_exact(&self, v: &MfMap) -> bool {
        let field = v.c[0].field();
        let (m, _) = self.d_matrix(&v.key.prev(), field);
        matches!(solve_in_image(&m, &v.c), Ok(Some(_)))
    }

    /// Multidegrees that can carry a nonzero map src → tgt with coordinate sum ≤ cap.
    fn slice_keys(&self, src: usize, tgt: usize, cap: i32) -> Vec<SliceKey> {
        let mut out = Vec::new();
        for m0 in -2..=cap + 4 {
            for m1 in -2..=cap + 4 {
                for m2 in -2..=cap + 4 {
                    if m0 + m1 + m2 > cap {
                        continue;
                    }
                    let mdeg = [m0, m1, m2];
                    let parity = mdeg[0].rem_euclid(2) as usize;
                    if mdeg.iter().any(|x| x.rem_euclid(2) as usize != parity) {
                        continue;
                    }
                    let key = SliceKey { src, tgt, parity, mdeg };
                    if self.slice_dim(&key) > 0 {
                        out.push(key);
                    }
                }
            }
        }
        out
    }

    /// Cohomology of Hom(T_src, T_tgt) on all slices of weight ≤ cap (and degree in window).
    pub fn hom_cohomology(
        &self,
        src: usize,
        tgt: usize,
        weight_cap: i32,
        window: Option<(Rational64, Rational64)>,
        field: Field,
    ) -> HomCohomology {
        let mut slices = Vec::new();
        for key in self.slice_keys(src, tgt, weight_cap) {
            let deg = self.weights.degree(&key.mdeg);
            if let Some((lo, hi)) = window {
                if deg < lo || deg > hi {
                    continue;
                }
            }
            let h = self.slice_cohomology(&key, field);
            if h.dim > 0 {
                slices.push(h);
            }
        }
        // A valid component has every coordinate ≥ −2, so D·deg ≥ d_min(Σm + 6) − 2D.
        let complete_through = if self.weights.all_positive() {
            let dmin = *self.weights.d.iter().min().expect("three weights");
            Some(Rational64::new(dmin * (weight_cap as i64 + 6) - 2 * self.weights.denom, self.weights.denom))
        } else {
            None
        };
        HomCohomology { src, tgt, weight_cap, slices, complete_through }
    }
}

fn columns(field: Field, vs: &[[Scalar; 2]]) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(field, 2, vs.len());
    for (j, v) in vs.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            if !x.is_zero() {
                m.add(r, j, x);
            }
        }
    }
    m
}

/// (ũ_{i−1,i}, ṽ_{i,i−1}) in the standard category.
pub fn generator_morphisms(mf: &MfCategory, i: usize, field: Field) -> (MfMap, MfMap) {
    let i = i % 3;
    let prev = (i + 2) % 3;
    let u = MfMap {
        key: SliceKey { src: prev, tgt: i, parity: 1, mdeg: sub3(&HALF_W, &unit3(i + 2, 2)) },
        c: [field.one(), -field.one()],
    };
    let v = MfMap {
        key: SliceKey { src: i, tgt: prev, parity: 1, mdeg: sub3(&HALF_W, &unit3(i, 2)) },
        c: [field.one(), -field.one()],
    };
    debug_assert!(mf.component(&u.key, 0) == Some(unit_exp(i + 1)));
    debug_assert!(mf.component(&v.key, 0) == Some(unit_exp(i + 1)));
    (u, v)
}

fn unit_exp(j: usize) -> Exp {
    let mut e = [0; 3];
    e[j % 3] = 1;
    e
}

/// Image of an A-multidegree.
pub fn mf_mdeg(m: &MultiDeg) -> Mdeg3 {
    let mut out = [0; 3];
    for j in 0..3 {
        out = add3(&out, &[m[2 * j]; 3]);
        out = sub3(&out, &unit3(j + 2, 2 * m[2 * j]));
        out = add3(&out, &[m[2 * j + 1]; 3]);
        out = sub3(&out, &unit3(j, 2 * m[2 * j + 1]));
    }
    out
}

/// The cycle category A_{(p̃,q̃)} realized inside the standard factorizations, with a
/// contraction (ι, π, h) chosen slice by slice: ι sends a monomial to the composite of
/// its letters, K is spanned by the first standard components completing the cocycles,
/// h(Dk) = −k, and h vanishes on ι(A) and on K. Then ιπ − id = Dh + hD and πι = id.
pub struct MirrorModel {
    pub mf: MfCategory,
    pub cat: Category,
    pub field: Field,
    splits: HashMap<SliceKey, Split>,
}

struct Split {
    basis: SparseMatrix,
    has_iota: bool,
    /// k for each D(k) column, in order after ι.
    prev_k: Vec<[Scalar; 2]>,
    iota: Option<BasisMorphism>,
}

impl MirrorModel {
    pub fn new(weights: MfWeights, field: Field) -> Result<Self> {
        let mf = MfCategory::standard(weights)?;
        let cat = Category::build_fractional(weights.grading()?)?;
        Ok(MirrorModel { mf, cat, field, splits: HashMap::new() })
    }

    pub fn key_of(&self, b: &BasisMorphism) -> SliceKey {
        SliceKey { src: b.src(), tgt: b.tgt(), parity: b.weight() as usize % 2, mdeg: mf_mdeg(&self.cat.mdeg(b)) }
    }

    fn letter(&self, u: bool, at: usize) -> MfMap {
        let (gu, gv) = if u {
            generator_morphisms(&self.mf, (at + 1) % 3, self.field)
        } else {
            generator_morphisms(&self.mf, at, self.field)
        };
        if u {
            gu
        } else {
            gv
        }
    }

    /// Letters of a monomial in application order, as (is_u, source).
    fn word(&self, b: &BasisMorphism) -> Vec<(bool, usize)> {
        let s = b.src();
        let k = b.exp as usize;
        let (nx, pv) = (self.cat.next(s), self.cat.prev(s));
        let mut w = Vec::new();
        match b.kind {
            Kind::Id => {}
            Kind::X => (0..k).for_each(|_| w.extend([(false, s), (true, pv)])),
            Kind::Y => (0..k).for_each(|_| w.extend([(true, s), (false, nx)])),
            Kind::U => {
                w.push((true, s));
                (0..k).for_each(|_| w.extend([(false, nx), (true, s)]));
            }
            Kind::V => {
                (0..k).for_each(|_| w.extend([(false, s), (true, pv)]));
                w.push((false, s));
            }
        }
        w
    }

    /// ι(b): the composite of the letters of b.
    pub fn rho(&self, b: &BasisMorphism) -> MfMap {
        let mut acc = self.mf.identity(b.src(), self.field);
        for (u, at) in self.word(b) {
            acc = self.mf.compose(&self.letter(u, at), &acc).expect("letters compose along the word");
        }
        acc
    }

    pub fn a_monomial_at(&self, key: &SliceKey) -> Option<BasisMorphism> {
        let w = key.weight();
        if w < 0 || key.parity != w as usize % 2 {
            return None;
        }
        self.cat
            .hom_basis(key.src, key.tgt, w as u32, None)
            .into_iter()
            .find(|b| b.weight() as i32 == w && self.key_of(b) == *key)
    }

    fn split(&mut self, key: &SliceKey) -> Result<&Split> {
        if !self.splits.contains_key(key) {
            let s = self.build_split(key)?;
            self.splits.insert(*key, s);
        }
        Ok(&self.splits[key])
    }

    fn build_split(&self, key: &SliceKey) -> Result<Split> {
        let field = self.field;
        let mut cols = Vec::new();
        let iota = self.a_monomial_at(key);
        if let Some(b) = &iota {
            let r = self.rho(b);
            if !self.mf.differential(&r).is_zero() {
                return Err(HmsError::Mismatch(format!("image of {} is not closed", b.label())));
            }
            cols.push(r.c);
        }
        let prev = key.prev();
        let prev_k = self.mf.complement(&prev, field);
        for k in &prev_k {
            cols.push(self.mf.differential(&MfMap { key: prev, c: k.clone() }).c);
        }
        cols.extend(self.mf.complement(key, field));
        let basis = columns(field, &cols);
        let dim = self.mf.slice_dim(key);
        if cols.len() != dim || rank(&basis) != dim {
            return Err(HmsError::Mismatch(format!(
                "slice {}→{} parity {} multidegree {:?}: A-side gives {} class(es), the factorization side disagrees",
                key.src + 1,
                key.tgt + 1,
                key.parity,
                key.mdeg,
                iota.is_some() as usize
            )));
        }
        Ok(Split { basis, has_iota: iota.is_some(), prev_k, iota })
    }

    fn coordinates(&mut self, v: &MfMap) -> Result<(Vec<Scalar>, usize)> {
        let field = self.field;
        let s = self.split(&v.key)?;
        let n = s.basis.ncols();
        let x = solve_in_image(&s.basis, &v.c)?
            .ok_or_else(|| HmsError::Contract(format!("vector outside slice {:?}", v.key)))?;
        let mut out = vec![field.zero(); n];
        for (j, c) in x {
            out[j] = c;
        }
        Ok((out, s.has_iota as usize))
    }

    /// π(v) as an element of A.
    pub fn project(&mut self, v: &MfMap) -> Result<Value> {
        let (x, off) = self.coordinates(v)?;
        let mut out = Value::new();
        if off == 1 && !x[0].is_zero() {
            let b = self.splits[&v.key].iota.expect("iota present");
            out.insert(b, x[0].clone());
        }
        Ok(out)
    }

    /// h(v), an element of the previous slice.
    pub fn homotopy(&mut self, v: &MfMap) -> Result<MfMap> {
        let (x, off) = self.coordinates(v)?;
        let s = &self.splits[&v.key];
        let mut out = MfMap::zero(v.key.prev(), self.field);
        for (l, k) in s.prev_k.iter().enumerate() {
            out.add_scaled(&-&x[off + l], &MfMap { key: v.key.prev(), c: k.clone() })?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub weights: MfWeights,
    pub weight_cap: u32,
    pub slices_checked: usize,
    pub products_checked: usize,
    /// (src, tgt) → (degree, parity) → (A count, MF dim).
    pub tables: BTreeMap<(usize, usize), BTreeMap<(Rational64, usize), (usize, usize)>>,
    pub complete_through: Option<Rational64>,
    pub mismatches: Vec<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let tables: Vec<_> = self
            .tables
            .iter()
            .map(|((s, t), tab)| {
                let rows: Vec<_> = tab
                    .iter()
                    .map(|((deg, par), (a, m))| json!({"degree": rat_text(*deg), "parity": par, "A": a, "MF": m}))
                    .collect();
                json!({"source": s + 1, "target": t + 1, "dims": rows})
            })
            .collect();
        json!({
            "d": self.weights.d, "D": self.weights.denom, "weight_cap": self.weight_cap,
            "slices_checked": self.slices_checked, "products_checked": self.products_checked,
            "complete_through_degree": self.complete_through.map(rat_text),
            "capped": self.complete_through.is_none(),
            "tables": tables, "mismatches": self.mismatches, "passed": self.passed(),
        })
    }
}

/// Per-degree dimension match between A_{(p̃,q̃)} and H*(End(⊕T_i)) on weights ≤ W,
/// slice-by-slice certification of ι, and π(ι g ∘ ι f) = g∘f on all composable pairs.
pub fn verify_a_equivalence(weights: MfWeights, weight_cap: u32, field: Field) -> Result<EquivalenceReport> {
    let mut model = MirrorModel::new(weights, field)?;
    let mut tables = BTreeMap::new();
    let mut mismatches = Vec::new();
    let mut slices_checked = 0;
    let mut complete_through = None;
    for i in 0..3 {
        for j in 0..3 {
            let h = model.mf.hom_cohomology(i, j, weight_cap as i32, None, field);
            complete_through = h.complete_through;
            let mut tab: BTreeMap<(Rational64, usize), (usize, usize)> = BTreeMap::new();
            for ((deg, par), dim) in h.dims_by_degree() {
                tab.entry((deg, par)).or_default().1 += dim;
            }
            for b in model.cat.hom_basis(i, j, weight_cap, None) {
                tab.entry((model.cat.degree(&b), b.weight() as usize % 2)).or_default().0 += 1;
                if model.cat.degree(&b) != weights.degree(&model.key_of(&b).mdeg) {
                    mismatches.push(format!("degree of {} differs between sides", b.label()));
                }
            }
            for ((deg, par), (a, m)) in &tab {
                if a != m {
                    mismatches.push(format!(
                        "Hom({}, {}) degree {} parity {}: A has {a}, factorizations have {m}",
                        i + 1,
                        j + 1,
                        rat_text(*deg),
                        par
                    ));
                }
            }
            for key in model.mf.slice_keys(i, j, weight_cap as i32) {
                slices_checked += 1;
                if let Err(e) = model.split(&key) {
                    mismatches.push(e.to_string());
                }
            }
            tables.insert((i, j), tab);
        }
    }
    let mut products_checked = 0;
    for f in model.cat.chains_up_to_weight(1, weight_cap) {
        let f = f[0];
        for j in 0..3 {
            for g in model.cat.hom_basis(f.tgt(), j, weight_cap - f.weight(), None) {
                if g.is_id() {
                    continue;
                }
                let prod = model.mf.compose(&model.rho(&g), &model.rho(&f))?;
                let got = model.project(&prod)?;
                let mut want = Value::new();
                if let Some(b) = model.cat.compose_basis(&g, &f) {
                    want.insert(b, field.one());
                }
                products_checked += 1;
                if got != want {
                    mismatches.push(format!("class of ι({}) ∘ ι({}) differs from the A-product", g.label(), f.label()));
                }
            }
        }
    }
    Ok(EquivalenceReport {
        weights,
        weight_cap,
        slices_checked,
        products_checked,
        tables,
        complete_through,
        mismatches,
    })
}

#[derive(Clone, Debug)]
pub struct TransferredModel {
    pub structure: AInftyStructure,
    /// Failures of π(ι g ∘ ι f) = g∘f (must be 0).
    pub m2_defects: usize,
    pub raw_ab: (Scalar, Scalar),
    pub normalized: Option<AInftyStructure>,
    pub relations: RelationReport,
}

impl TransferredModel {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "raw_invariants": [self.raw_ab.0.to_text(), self.raw_ab.1.to_text()],
            "m2_defects": self.m2_defects,
            "relations_passed": self.relations.passed(),
            "relation_defects": self.relations.defects,
            "normalized": self.normalized.is_some(),
            "structure": self.structure.to_json(),
        })
    }
}

fn odd_sum(ch: &[BasisMorphism]) -> bool {
    chain_odd_count(ch) % 2 == 1
}

/// Kadeishvili transfer: with U_N = Σ ±m_2(f_{u_1} ⊗ f_{u_2}) − Σ ±f_{N−l+1}(id^s ⊗ m'_l ⊗ id^t)
/// (2 ≤ l < N), the minimal products are m'_N = πU_N and the morphism components are
/// f_N = hU_N; U_N is checked to be closed at every chain.
pub fn transfer_minimal_model(weights: MfWeights, field: Field, trunc: Truncation) -> Result<TransferredModel> {
    let mut model = MirrorModel::new(weights, field)?;
    let cat = model.cat.clone();
    let w = trunc.weight_cap;
    let k_max = trunc.arity_cap;
    let mut f: HashMap<Chain, MfMap> = HashMap::new();
    let mut higher: BTreeMap<usize, Cochain> = BTreeMap::new();
    let mut m2_defects = 0;

    let get_f = |f: &HashMap<Chain, MfMap>, model: &MirrorModel, ch: &[BasisMorphism]| -> Result<MfMap> {
        if ch.len() == 1 {
            return Ok(model.rho(&ch[0]));
        }
        f.get(ch)
            .cloned()
            .ok_or_else(|| HmsError::Truncation(format!("transfer needs a chain outside the weight cap {w}")))
    };

    for big_n in 2..=k_max {
        let mut mn = Cochain::new(field, big_n, Rational64::from(2 - big_n as i64));
        for ch in cat.chains_up_to_weight(big_n, w) {
            let mdeg: Mdeg3 = ch.iter().fold([0; 3], |acc, b| add3(&acc, &model.key_of(b).mdeg));
            let key = SliceKey {
                src: ch[0].src(),
                tgt: ch[big_n - 1].tgt(),
                parity: (chain_odd_count(&ch) + big_n) % 2,
                mdeg: sub3(&mdeg, &[big_n as i32 - 2; 3]),
            };
            let mut u = MfMap::zero(key, field);
            for u1 in 1..big_n {
                let u2 = big_n - u1;
                let (right, left) = ch.split_at(u2);
                let odd = ((u1 - 1) % 2 == 1) ^ (u2 % 2 == 0 && odd_sum(left));
                let g = get_f(&f, &model, left)?;
                let h = get_f(&f, &model, right)?;
                u.add_scaled(&field.sign(odd), &model.mf.compose(&g, &h)?)?;
            }
            for l in 2..big_n {
                for t in 0..=big_n - l {
                    let s = big_n - l - t;
                    let odd = (s % 2 == 1) ^ (l * t % 2 == 1) ^ (l % 2 == 1 && odd_sum(&ch[t + l..]));
                    let mid = &ch[t..t + l];
                    let val: Value = if l == 2 {
                        cat.compose_basis(&mid[1], &mid[0]).map(|b| (b, field.one())).into_iter().collect()
                    } else {
                        higher.get(&l).and_then(|m| m.get(mid)).cloned().unwrap_or_default()
                    };
                    for (b, x) in val {
                        if b.is_id() {
                            continue;
                        }
                        let mut c2 = Vec::with_capacity(big_n - l + 1);
                        c2.extend_from_slice(&ch[..t]);
                        c2.push(b);
                        c2.extend_from_slice(&ch[t + l..]);
                        let fx = get_f(&f, &model, &c2)?;
                        u.add_scaled(&-&(&x * &field.sign(odd)), &fx)?;
                    }
                }
            }
            if !model.mf.differential(&u).is_zero() {
                return Err(HmsError::Contract(format!("transfer: U_{big_n} is not closed")));
            }
            let p = model.project(&u)?;
            if big_n == 2 {
                let want: Value = cat.compose_basis(&ch[1], &ch[0]).map(|b| (b, field.one())).into_iter().collect();
                if p != want {
                    m2_defects += 1;
                }
            } else {
                for (b, x) in &p {
                    mn.add(ch.clone(), *b, x);
                }
            }
            if big_n < k_max {
                let hu = model.homotopy(&u)?;
                f.insert(ch, hu);
            }
        }
        if big_n >= 3 && !mn.is_zero() {
            higher.insert(big_n, mn);
        }
    }
    let structure = AInftyStructure { cat, field, trunc, higher };
    structure.validate()?;
    let relations = check_relations(&structure);
    let raw_ab = invariants_ab(&structure)?;
    let normalized = normalize_ab(&structure).ok();
    Ok(TransferredModel { structure, m2_defects, raw_ab, normalized, relations })
}
