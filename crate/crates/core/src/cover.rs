//! Graded lifts of the three arcs on the cyclic cover y^D = x^{d_2}(1 − x)^{d_3}, and the
//! sheet rule for lifted chords: a chord m from L̃_i^k lifts to L̃_j^l exactly when
//! l − k ≡ s(m) (mod D), where s is additive over letters with
//!   s(u_{1,2}) = d_2, s(u_{2,3}) = 0, s(u_{3,1}) = −d_2,
//!   s(v_{2,1}) = 0,   s(v_{3,2}) = d_3, s(v_{1,3}) = −d_3
//! (so s(x_i) = s(y_{i−1}) = d_i). Objects are 0-based here: arcs 1, 2, 3 are 0, 1, 2.

use num_rational::Rational64;
use serde_json::json;

use std::collections::BTreeMap;

use crate::category::{rat_text, BasisMorphism, Category, GradingData};
use crate::error::{HmsError, Result};
use crate::exact::Field;
use crate::mf::{MfCategory, MfWeights};
use crate::tilde::{equivariant_dims, shift_closure_iso, TildeCategory, TildeObject};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverSpec {
    pub d: [i64; 3],
    pub denom: i64,
}

impl CoverSpec {
    pub fn new(d: [i64; 3]) -> Result<Self> {
        if d.iter().any(|&x| x < 0) {
            return Err(HmsError::Constraint(format!("cover exponents {d:?} must be nonnegative")));
        }
        let denom = d.iter().sum();
        if denom < 1 {
            return Err(HmsError::Constraint("D = d_1 + d_2 + d_3 must be at least 1".into()));
        }
        Ok(CoverSpec { d, denom })
    }

    /// p = (D − 2d_2, 2d_2 − D, D), q = (D − 2d_3, D, 2d_3 − D).
    pub fn grading(&self) -> Result<GradingData> {
        GradingData::from_cover_weights(self.d)
    }

    fn category(&self) -> Result<Category> {
        Category::build_fractional(self.grading()?)
    }

    /// s of the generator in multidegree slot `slot`.
    pub fn letter_shift(&self, slot: usize) -> i64 {
        let (d2, d3) = (self.d[1], self.d[2]);
        match slot {
            0 => -d2,
            1 => -d3,
            2 => d2,
            3 => 0,
            4 => 0,
            5 => d3,
            _ => panic!("slot {slot} out of range"),
        }
    }

    pub fn sheet_shift(&self, cat: &Category, b: &BasisMorphism) -> i64 {
        cat.mdeg(b)
            .iter()
            .enumerate()
            .map(|(s, &c)| c as i64 * self.letter_shift(s))
            .sum::<i64>()
            .rem_euclid(self.denom)
    }

    /// Phase of the zeroth lift of each arc.
    pub fn base_phase(&self, i: usize) -> Rational64 {
        match i {
            0 => Rational64::new(-self.d[1], self.denom),
            1 => Rational64::from(0),
            _ => Rational64::new(self.d[2], self.denom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradedLift {
    pub base: usize,
    pub sheet: i64,
    pub phase: Rational64,
}

/// L̃_i^k for i < 3, k < D with phases (−d_2, 0, d_3)/D + 2k/D.
pub fn lift_table(spec: &CoverSpec) -> Vec<GradedLift> {
    let mut out = Vec::new();
    for base in 0..3 {
        for sheet in 0..spec.denom {
            out.push(GradedLift { base, sheet, phase: spec.base_phase(base) + Rational64::new(2 * sheet, spec.denom) });
        }
    }
    out
}

/// Monomials of weight ≤ w whose chords lift from L̃_i^k to L̃_j^l.
pub fn cover_hom_basis(spec: &CoverSpec, from: TildeObject, to: TildeObject, w: u32) -> Result<Vec<BasisMorphism>> {
    let cat = spec.category()?;
    let need = (to.sheet - from.sheet).rem_euclid(spec.denom);
    Ok(cat.hom_basis(from.base, to.base, w, None).into_iter().filter(|b| spec.sheet_shift(&cat, b) == need).collect())
}

/// Degree of the lifted chord measured against the lift phases:
/// deg(m) + (φ_j − φ_i at sheet 0) − (φ(L̃_j^l) − φ(L̃_i^k)).
pub fn chord_degree(
    spec: &CoverSpec,
    cat: &Category,
    b: &BasisMorphism,
    from: TildeObject,
    to: TildeObject,
) -> Rational64 {
    let phase = |o: TildeObject| spec.base_phase(o.base) + Rational64::new(2 * o.sheet, spec.denom);
    cat.degree(b) + spec.base_phase(to.base) - spec.base_phase(from.base) - (phase(to) - phase(from))
}

pub fn lifts_json(spec: &CoverSpec) -> serde_json::Value {
    json!(lift_table(spec)
        .iter()
        .map(|l| json!({"arc": l.base + 1, "sheet": l.sheet, "phase": rat_text(l.phase)}))
        .collect::<Vec<_>>())
}

/// Dimensions per integral degree on one pair, from the three constructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDims {
    pub from: TildeObject,
    pub to: TildeObject,
    pub tilde: BTreeMap<i64, usize>,
    pub cover: BTreeMap<i64, usize>,
    pub equivariant: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug)]
pub struct ThreeWayReport {
    pub spec: CoverSpec,
    pub weight_cap: u32,
    /// Sheet shifts taking cover lifts to equivariant factorizations.
    pub shifts: Vec<i64>,
    pub rows: Vec<PairDims>,
    pub mismatches: Vec<String>,
}

impl ThreeWayReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let dims = |d: &BTreeMap<i64, usize>| json!(d.iter().map(|(n, c)| json!([n, c])).collect::<Vec<_>>());
        json!({
            "d": self.spec.d,
            "D": self.spec.denom,
            "weight_cap": self.weight_cap,
            "sheet_shifts": self.shifts,
            "pairs": self.rows.len(),
            "rows": self.rows.iter().map(|r| json!({
                "from": r.from.label(), "to": r.to.label(),
                "tilde": dims(&r.tilde), "cover": dims(&r.cover), "equivariant": dims(&r.equivariant),
            })).collect::<Vec<_>>(),
            "mismatches": self.mismatches,
        })
    }
}

/// Cover lifts (cover grading) against Ã and equivariant factorizations (factorization
/// grading), matched through the sheet relabeling between the two gradings.
pub fn compare_three_way(spec: &CoverSpec, w: u32, field: Field) -> Result<ThreeWayReport> {
    let dd = spec.denom;
    // The factorization grading carries d rotated by one step.
    let weights = MfWeights::new([spec.d[2], spec.d[0], spec.d[1]])?;
    let cover_grading = spec.grading()?;
    let relabel = shift_closure_iso(&cover_grading, &weights.grading()?, w)?;
    if !relabel.certified {
        return Err(HmsError::Mismatch("no sheet relabeling between cover and factorization gradings".into()));
    }
    let cover_tilde = TildeCategory::build_a_tilde(cover_grading)?;
    let mf_tilde = TildeCategory::build_a_tilde(weights.grading()?)?;
    let emf = MfCategory::equivariant(weights)?;
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for x in cover_tilde.objects() {
        for y in cover_tilde.objects() {
            let (xi, yi) = (relabel.image(x, dd), relabel.image(y, dd));
            let shift = relabel.offset(y) - relabel.offset(x);
            let mut cover = BTreeMap::new();
            for b in cover_hom_basis(spec, x, y, w)? {
                let n = cover_tilde
                    .tilde_degree(&b, x, y)
                    .ok_or_else(|| HmsError::Mismatch(format!("lifted chord {} has no integral degree", b.label())))?;
                *cover.entry(n + shift).or_insert(0) += 1;
            }
            let tilde = mf_tilde.dims_by_degree(xi, yi, w);
            let equivariant = equivariant_dims(&emf, xi, yi, w, field)?;
            if cover != tilde || tilde != equivariant {
                mismatches.push(format!(
                    "{} → {}: cover {cover:?}, tilde {tilde:?}, equivariant {equivariant:?}",
                    x.label(),
                    y.label()
                ));
            }
            rows.push(PairDims { from: x, to: y, tilde, cover, equivariant });
        }
    }
    Ok(ThreeWayReport { spec: *spec, weight_cap: w, shifts: relabel.shifts, rows, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::Kind;
    use crate::tilde::TildeCategory;

    fn obj(i: usize, k: i64) -> TildeObject {
        TildeObject { base: i, sheet: k }
    }

    #[test]
    fn lift_examples() {
        let s = CoverSpec::new([1, 1, 1]).unwrap();
        let t = lift_table(&s);
        assert_eq!(t.len(), 9);
        assert_eq!(t[0].phase, Rational64::new(-1, 3));
        let s1 = CoverSpec::new([0, 2, 1]).unwrap();
        assert!(s1.grading().is_ok());
        let one = CoverSpec::new([1, 0, 0]).unwrap();
        let phases: Vec<_> = lift_table(&one).iter().map(|l| l.phase).collect();
        assert_eq!(phases, vec![Rational64::from(0), Rational64::from(0), Rational64::from(0)]);
        // Phases mod 2/D recover the arc.
        for d in [[1, 1, 1], [2, 1, 2], [1, 2, 0]] {
            let s = CoverSpec::new(d).unwrap();
            for l in lift_table(&s) {
                let r = (l.phase - s.base_phase(l.base)) * Rational64::new(s.denom, 2);
                assert!(r.is_integer() && r.to_integer() == l.sheet);
            }
        }
        assert!(CoverSpec::new([0, 0, 0]).is_err());
    }

    #[test]
    fn divisibility_examples() {
        let s = CoverSpec::new([1, 1, 1]).unwrap();
        let b = cover_hom_basis(&s, obj(1, 0), obj(0, 0), 16).unwrap();
        assert!(b.iter().all(|m| m.kind == Kind::V && m.exp % 3 == 0));
        assert_eq!(b.len(), 3);
        // (2,0) → (3,0): y_2^m u_{2,3}, i.e. x_3^m u_{2,3} with 3 | m.
        let b = cover_hom_basis(&s, obj(1, 0), obj(2, 0), 16).unwrap();
        assert_eq!(b.iter().map(|m| m.exp).collect::<Vec<_>>(), vec![0, 3, 6]);
    }

    #[test]
    fn cover_rule_equals_tilde_rule() {
        for d in [[1, 1, 1], [2, 1, 1], [1, 2, 2], [2, 2, 2], [0, 1, 2], [3, 1, 0]] {
            let s = CoverSpec::new(d).unwrap();
            let t = TildeCategory::build_a_tilde(s.grading().unwrap()).unwrap();
            for x in t.objects() {
                for y in t.objects() {
                    let lhs: Vec<_> = t.hom_basis(x, y, 12).into_iter().map(|(b, _)| b).collect();
                    assert_eq!(lhs, cover_hom_basis(&s, x, y, 12).unwrap(), "{d:?} {x:?} {y:?}");
                }
            }
        }
    }

    #[test]
    fn three_way_small() {
        let r = compare_three_way(&CoverSpec::new([1, 1, 1]).unwrap(), 6, Field::Rational).unwrap();
        assert_eq!(r.rows.len(), 81);
        assert!(r.passed(), "{:?}", r.mismatches);
        assert!(r.rows.iter().any(|row| !row.cover.is_empty()));
        let r = compare_three_way(&CoverSpec::new([1, 0, 0]).unwrap(), 6, Field::Rational).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
    }

    #[test]
    fn chord_degree_integrality_matches_rule() {
        let s = CoverSpec::new([1, 1, 1]).unwrap();
        let cat = Category::build_fractional(s.grading().unwrap()).unwrap();
        let t = TildeCategory::build_a_tilde(s.grading().unwrap()).unwrap();
        for x in t.objects() {
            for y in t.objects() {
                let admitted = cover_hom_basis(&s, x, y, 10).unwrap();
                for b in cat.hom_basis(x.base, y.base, 10, None) {
                    let n = chord_degree(&s, &cat, &b, x, y);
                    let ok = n.is_integer() && (n.to_integer() - b.weight() as i64).rem_euclid(2) == 0;
                    assert_eq!(ok, admitted.contains(&b));
                }
            }
        }
    }
}
