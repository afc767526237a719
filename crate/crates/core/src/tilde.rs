//! The tilde construction: objects (X, k) with 0 ≤ k < D, and morphisms the monomials
//! whose shifted degree N = deg − 2(l − k)/D is an integer of the same parity as the
//! weight. The same rule applied to a 1/D-graded A∞-structure gives a Z-graded one
//! with the induced products. Also: relabelings between gradings with equal d, and the
//! equivariant factorization side of the comparison.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde_json::json;

use crate::ainfty::AInftyStructure;
use crate::category::{BasisMorphism, Category, GradingData};
use crate::error::{HmsError, Result};
use crate::exact::{Field, Scalar};
use crate::mf::{MfCategory, MfWeights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TildeObject {
    pub base: usize,
    pub sheet: i64,
}

impl TildeObject {
    pub fn label(&self) -> String {
        format!("(X_{},{})", self.base + 1, self.sheet)
    }
}

#[derive(Clone, Debug)]
pub struct TildeCategory {
    pub cat: Category,
}

impl TildeCategory {
    /// Ã_{(p̃,q̃)} from a fractional grading.
    pub fn build_a_tilde(grading: GradingData) -> Result<Self> {
        Ok(TildeCategory { cat: Category::build_fractional(grading)? })
    }

    pub fn denom(&self) -> i64 {
        self.cat.grading.denom
    }

    pub fn objects(&self) -> Vec<TildeObject> {
        (0..self.cat.n()).flat_map(|i| (0..self.denom()).map(move |k| TildeObject { base: i, sheet: k })).collect()
    }

    /// Integral degree of b in Hom((i,k),(j,l)), if b belongs there.
    pub fn tilde_degree(&self, b: &BasisMorphism, from: TildeObject, to: TildeObject) -> Option<i64> {
        if b.src() != from.base || b.tgt() != to.base {
            return None;
        }
        let n = self.cat.degree(b) - Rational64::new(2 * (to.sheet - from.sheet), self.denom());
        if !n.is_integer() || (n.to_integer() - b.weight() as i64).rem_euclid(2) != 0 {
            return None;
        }
        Some(n.to_integer())
    }

    pub fn hom_basis(&self, from: TildeObject, to: TildeObject, w: u32) -> Vec<(BasisMorphism, i64)> {
        self.cat
            .hom_basis(from.base, to.base, w, None)
            .into_iter()
            .filter_map(|b| self.tilde_degree(&b, from, to).map(|n| (b, n)))
            .collect()
    }

    pub fn dims_by_degree(&self, from: TildeObject, to: TildeObject, w: u32) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for (_, n) in self.hom_basis(from, to, w) {
            *out.entry(n).or_insert(0) += 1;
        }
        out
    }
}

/// B̃ over a 1/D-graded structure: same products, restricted to integral morphisms.
#[derive(Clone, Debug)]
pub struct TildeStructure {
    pub tilde: TildeCategory,
    pub base: AInftyStructure,
}

pub fn build_b_tilde(m: &AInftyStructure) -> TildeStructure {
    TildeStructure { tilde: TildeCategory { cat: m.cat.clone() }, base: m.clone() }
}

impl TildeStructure {
    /// m_k on a chain of morphisms between objects[0] → objects[1] → … → objects[k].
    pub fn eval(&self, objects: &[TildeObject], chain: &[BasisMorphism]) -> Result<Vec<(BasisMorphism, i64, Scalar)>> {
        let k = chain.len();
        if objects.len() != k + 1 || k < 2 {
            return Err(HmsError::Contract("need k ≥ 2 morphisms and k + 1 objects".into()));
        }
        let mut total = 0;
        for (j, b) in chain.iter().enumerate() {
            total += self.tilde.tilde_degree(b, objects[j], objects[j + 1]).ok_or_else(|| {
                HmsError::Contract(format!(
                    "{} is not a morphism {} → {}",
                    b.label(),
                    objects[j].label(),
                    objects[j + 1].label()
                ))
            })?;
        }
        let mut out = Vec::new();
        for (b, c) in self.base.eval(k, chain) {
            let n = self.tilde.tilde_degree(&b, objects[0], objects[k]);
            if n != Some(total + 2 - k as i64) {
                return Err(HmsError::Contract(format!("output {} leaves the integral part", b.label())));
            }
            out.push((b, total + 2 - k as i64, c));
        }
        Ok(out)
    }

    /// Every product on chains of weight ≤ w and arity ≤ K lands in integral degree.
    pub fn check_integrality(&self) -> Result<usize> {
        let mut checked = 0;
        let d = self.tilde.denom();
        let w = self.base.trunc.weight_cap;
        for k in 2..=self.base.trunc.arity_cap {
            for ch in self.base.cat.chains_up_to_weight(k, w) {
                // Sheets are determined along the chain from the starting sheet.
                for k0 in 0..d {
                    let mut objs = vec![TildeObject { base: ch[0].src(), sheet: k0 }];
                    let mut ok = true;
                    for b in &ch {
                        let from = *objs.last().expect("nonempty");
                        match (0..d)
                            .map(|l| TildeObject { base: b.tgt(), sheet: l })
                            .find(|&to| self.tilde.tilde_degree(b, from, to).is_some())
                        {
                            Some(to) => objs.push(to),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        self.eval(&objs, &ch)?;
                        checked += 1;
                    }
                }
            }
        }
        Ok(checked)
    }
}

/// (i, k) ↦ (i, k + c_i) relating Ã for two gradings with the same d, certified on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    pub shifts: Vec<i64>,
    pub certified: bool,
    /// The prefix sums of p − p' used directly as sheet shifts.
    pub literal_shifts: Vec<i64>,
    pub literal_certified: bool,
    pub pairs_checked: usize,
    /// Even degree offset σ per object for the certified shifts: N' = N + σ(y) − σ(x).
    pub offsets: BTreeMap<TildeObject, i64>,
}

impl Relabeling {
    pub fn image(&self, o: TildeObject, denom: i64) -> TildeObject {
        TildeObject { base: o.base, sheet: (o.sheet + self.shifts[o.base]).rem_euclid(denom) }
    }

    pub fn offset(&self, o: TildeObject) -> i64 {
        self.offsets.get(&o).copied().unwrap_or(0)
    }
}

/// Since Σ(p − p') = 0, deg_p(b) − deg_{p'}(b) = (C(j) − C(i))/D for b: i → j with
/// C(x) = Σ_{0<y≤x} (p_y − p'_y). Shifting sheets by c = −C/2 (mod D) matches hom spaces
/// exactly and integral degrees up to an even shift on each object.
pub fn shift_closure_iso(from: &GradingData, to: &GradingData, w: u32) -> Result<Relabeling> {
    if from.n != 3 || to.n != 3 || from.denom != to.denom || from.d() != to.d() {
        return Err(HmsError::Contract("relabeling needs n = 3, the same D and the same d".into()));
    }
    let dd = from.denom;
    let mut c_prefix = vec![0i64; 3];
    for x in 1..3 {
        c_prefix[x] = c_prefix[x - 1] + from.p[x] - to.p[x];
    }
    let shifts: Vec<i64> = c_prefix.iter().map(|c| (-c / 2).rem_euclid(dd)).collect();
    let literal: Vec<i64> = c_prefix.iter().map(|c| c.rem_euclid(dd)).collect();
    let a = TildeCategory::build_a_tilde(from.clone())?;
    let b = TildeCategory::build_a_tilde(to.clone())?;
    let certify = |sh: &[i64]| -> (bool, usize, BTreeMap<TildeObject, i64>) {
        let img = |o: TildeObject| TildeObject { base: o.base, sheet: (o.sheet + sh[o.base]).rem_euclid(dd) };
        let objs = a.objects();
        let mut pairs = 0;
        // offset[(x, y)] = N' − N on a nonempty hom space; must come from an even shift per object.
        let mut offset = BTreeMap::new();
        for &x in &objs {
            for &y in &objs {
                pairs += 1;
                for m in a.cat.hom_basis(x.base, y.base, w, None) {
                    match (a.tilde_degree(&m, x, y), b.tilde_degree(&m, img(x), img(y))) {
                        (None, None) => {}
                        (Some(n1), Some(n2)) => {
                            if *offset.entry((x, y)).or_insert(n2 - n1) != n2 - n1 {
                                return (false, pairs, BTreeMap::new());
                            }
                        }
                        _ => return (false, pairs, BTreeMap::new()),
                    }
                }
            }
        }
        let mut sigma: BTreeMap<TildeObject, i64> = BTreeMap::new();
        sigma.insert(objs[0], 0);
        let mut changed = true;
        while changed {
            changed = false;
            for (&(x, y), &o) in &offset {
                match (sigma.get(&x).copied(), sigma.get(&y).copied()) {
                    (Some(sx), None) => {
                        sigma.insert(y, sx + o);
                        changed = true;
                    }
                    (None, Some(sy)) => {
                        sigma.insert(x, sy - o);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        let ok = offset.iter().all(|(&(x, y), &o)| {
            o % 2 == 0 && matches!((sigma.get(&x), sigma.get(&y)), (Some(sx), Some(sy)) if sy - sx == o)
        });
        (ok, pairs, sigma)
    };
    let (certified, pairs_checked, offsets) = certify(&shifts);
    let (literal_certified, _, _) = certify(&literal);
    Ok(Relabeling { shifts, certified, literal_shifts: literal, literal_certified, pairs_checked, offsets })
}

/// Equivariant hom cohomology of T̃_i^k → T̃_j^l per integral degree N = deg − 2(l − k)/D.
pub fn equivariant_dims(
    emf: &MfCategory,
    from: TildeObject,
    to: TildeObject,
    w: u32,
    field: Field,
) -> Result<BTreeMap<i64, usize>> {
    let dd = emf.weights.denom;
    let s = emf.equivariant_index(from.base, from.sheet);
    let t = emf.equivariant_index(to.base, to.sheet);
    let h = emf.hom_cohomology(s, t, w as i32, None, field);
    let mut out = BTreeMap::new();
    for sl in &h.slices {
        let n = sl.degree - Rational64::new(2 * (to.sheet - from.sheet), dd);
        if !n.is_integer() || (n.to_integer() - sl.key.parity as i64).rem_euclid(2) != 0 {
            return Err(HmsError::Mismatch(format!(
                "equivariant class {}→{} has degree {} not matching its parity",
                from.label(),
                to.label(),
                n
            )));
        }
        *out.entry(n.to_integer()).or_insert(0) += sl.dim;
    }
    Ok(out)
}

/// Per-pair comparison of Ã (factorization grading) with equivariant cohomology.
pub fn compare_equivariant(weights: MfWeights, w: u32, field: Field) -> Result<(usize, Vec<String>)> {
    let emf = MfCategory::equivariant(weights)?;
    let a = TildeCategory::build_a_tilde(weights.grading()?)?;
    let mut bad = Vec::new();
    let mut pairs = 0;
    for x in a.objects() {
        for y in a.objects() {
            pairs += 1;
            let lhs = a.dims_by_degree(x, y, w);
            let rhs = equivariant_dims(&emf, x, y, w, field)?;
            if lhs != rhs {
                bad.push(format!("{} → {}: tilde {:?} vs equivariant {:?}", x.label(), y.label(), lhs, rhs));
            }
        }
    }
    Ok((pairs, bad))
}

pub fn dims_json(d: &BTreeMap<i64, usize>) -> serde_json::Value {
    json!(d.iter().map(|(n, c)| json!({"degree": n, "dim": c})).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hochschild::Truncation;
    use crate::mf::transfer_minimal_model;

    const Q: Field = Field::Rational;

    fn obj(i: usize, k: i64) -> TildeObject {
        TildeObject { base: i, sheet: k }
    }

    #[test]
    fn degree_one_is_identity_construction() {
        let g = GradingData::integral(vec![1, 1, -1], vec![1, -1, 1]).unwrap();
        let t = TildeCategory::build_a_tilde(g).unwrap();
        assert_eq!(t.objects().len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let all = t.cat.hom_basis(i, j, 8, None);
                let til = t.hom_basis(obj(i, 0), obj(j, 0), 8);
                assert_eq!(all.len(), til.len());
            }
        }
    }

    #[test]
    fn sheets_filter_monomials() {
        let g = GradingData::from_cover_weights([1, 1, 1]).unwrap();
        let t = TildeCategory::build_a_tilde(g).unwrap();
        // Hom((2,0),(1,0)) = {v_{2,1} x_2^m : 3 | m}.
        let basis = t.hom_basis(obj(1, 0), obj(0, 0), 14);
        let exps: Vec<u32> = basis.iter().map(|(b, _)| b.exp).collect();
        assert_eq!(exps, vec![0, 3, 6]);
        // Sheet-changing identity is never integral.
        assert!(t.tilde_degree(&BasisMorphism::id(0), obj(0, 0), obj(0, 1)).is_none());
    }

    #[test]
    fn relabeling_between_gradings() {
        let a = GradingData::fractional(vec![1, -1, 3], vec![1, 3, -1], 3).unwrap();
        let b = GradingData::fractional(vec![-1, 1, 3], vec![3, 1, -1], 3).unwrap();
        let r = shift_closure_iso(&a, &b, 10).unwrap();
        assert!(r.certified && r.literal_certified);
        assert_eq!(r.shifts[1], 1);
        assert_eq!(r.literal_shifts[1], 1);
        assert_eq!(r.pairs_checked, 81);
        // D = 5: the literal shift fails where 5 ∤ 3(p − p')/2.
        let a = GradingData::fractional(vec![1, 3, 1], vec![1, 3, 1], 5).unwrap();
        let b = GradingData::fractional(vec![3, 1, 1], vec![-1, 5, 1], 5).unwrap();
        let r = shift_closure_iso(&a, &b, 8).unwrap();
        assert!(r.certified);
        assert!(!r.literal_certified);
    }

    #[test]
    fn equivariant_cohomology_matches_tilde() {
        for (d, w) in [([1, 1, 1], 8), ([1, 0, 0], 6), ([2, 1, 0], 6), ([3, 1, 1], 6)] {
            let (pairs, bad) = compare_equivariant(MfWeights::new(d).unwrap(), w, Q).unwrap();
            assert_eq!(pairs, 9 * MfWeights::new(d).unwrap().denom.pow(2) as usize);
            assert!(bad.is_empty(), "{d:?}: {bad:?}");
        }
    }

    #[test]
    fn b_tilde_products_stay_integral() {
        let t =
            transfer_minimal_model(MfWeights::new([1, 1, 1]).unwrap(), Q, Truncation { arity_cap: 4, weight_cap: 6 })
                .unwrap();
        let bt = build_b_tilde(&t.structure);
        assert!(bt.check_integrality().unwrap() > 100);
        let a = TildeCategory::build_a_tilde(MfWeights::new([1, 1, 1]).unwrap().grading().unwrap()).unwrap();
        for x in a.objects() {
            for y in a.objects() {
                assert_eq!(bt.tilde.dims_by_degree(x, y, 6), a.dims_by_degree(x, y, 6));
            }
        }
        // m_3 on the u-cycle at sheet 0: integral chain, constant output.
        let cat = &bt.base.cat;
        let ch = crate::hochschild::u_path(cat, 0, 3);
        let mut objs = vec![obj(0, 0)];
        for b in &ch {
            let from = *objs.last().unwrap();
            let to = (0..3).map(|l| obj(b.tgt(), l)).find(|&o| bt.tilde.tilde_degree(b, from, o).is_some()).unwrap();
            objs.push(to);
        }
        assert_eq!(objs[3], obj(0, 0));
        let out = bt.eval(&objs, &ch).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].0.is_id() && out[0].1 == 0);
    }
}
