//! The fan Σ_n of the mirror X(n), its walls and intersection numbers, the curve
//! configurations on the boundary divisors H_i, the divisor L, and the loop count of
//! the singular locus of W^{−1}(0).
//!
//! Rays are 0-based: ray r is v_{r+1}. All rays lie on the plane z = 1, so every wall
//! relation reads v_c + v_d = α v_a + β v_b with α + β = 2, and then
//! H_c·Γ = H_d·Γ = 1, H_a·Γ = −α, H_b·Γ = −β.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::json;

use crate::category::{Category, GradingData};
use crate::error::{HmsError, Result};

pub type Vec3 = [i64; 3];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan {
    pub n: usize,
    pub rays: Vec<Vec3>,
    /// Maximal cones as sorted ray triples.
    pub cones: Vec<[usize; 3]>,
    /// The grading vector with ⟨ξ, v_i⟩ = 1 on every ray.
    pub xi: Vec3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub rays: [usize; 2],
    pub cones: Vec<usize>,
    pub compact: bool,
    /// Rays opposite the wall in its two cones (compact walls only).
    pub opposite: Option<[usize; 2]>,
    /// (α, β) in v_c + v_d = α v_a + β v_b (compact walls only).
    pub relation: Option<(i64, i64)>,
}

fn det(a: &Vec3, b: &Vec3, c: &Vec3) -> i64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn dot(a: &Vec3, b: &Vec3) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// v_i = (i−1, 1, 1) for i ≤ ⌊n/2⌋, (n−i, 0, 1) otherwise; cones σ_{i,0}, σ_{i,1}.
pub fn build_fan(n: usize) -> Result<Fan> {
    if n < 3 {
        return Err(HmsError::Constraint(format!("need n ≥ 3, got {n}")));
    }
    let half = n / 2;
    let rays: Vec<Vec3> =
        (1..=n).map(|i| if i <= half { [i as i64 - 1, 1, 1] } else { [(n - i) as i64, 0, 1] }).collect();
    let idx = |v: Vec3| -> Result<usize> {
        rays.iter().position(|r| *r == v).ok_or_else(|| HmsError::Contract(format!("cone vertex {v:?} is not a ray")))
    };
    let mut cones = Vec::new();
    for i in 0..(n - 1) / 2 {
        let i = i as i64;
        let mut c = [idx([i, 0, 1])?, idx([i, 1, 1])?, idx([i + 1, 0, 1])?];
        c.sort();
        cones.push(c);
    }
    for i in 0..(n - 2) / 2 {
        let i = i as i64;
        let mut c = [idx([i, 1, 1])?, idx([i + 1, 1, 1])?, idx([i + 1, 0, 1])?];
        c.sort();
        cones.push(c);
    }
    let fan = Fan { n, rays, cones, xi: [0, 0, 1] };
    fan.check()?;
    Ok(fan)
}

impl Fan {
    pub fn cone_determinant(&self, c: usize) -> i64 {
        let [a, b, d] = self.cones[c];
        det(&self.rays[a], &self.rays[b], &self.rays[d])
    }

    /// Smoothness and ⟨ξ, v⟩ = 1.
    pub fn check(&self) -> Result<()> {
        for c in 0..self.cones.len() {
            if self.cone_determinant(c).abs() != 1 {
                return Err(HmsError::Constraint(format!("cone {c} is not unimodular")));
            }
        }
        if let Some(r) = self.rays.iter().position(|v| dot(&self.xi, v) != 1) {
            return Err(HmsError::Constraint(format!("⟨ξ, v_{}⟩ ≠ 1", r + 1)));
        }
        Ok(())
    }

    pub fn walls(&self) -> Vec<Wall> {
        let mut by_pair: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.cones.iter().enumerate() {
            for (x, y) in [(0, 1), (0, 2), (1, 2)] {
                by_pair.entry([c[x], c[y]]).or_default().push(ci);
            }
        }
        by_pair
            .into_iter()
            .map(|(rays, cones)| {
                let compact = cones.len() == 2;
                let (opposite, relation) = if compact {
                    let opp = |ci: usize| *self.cones[ci].iter().find(|r| !rays.contains(r)).expect("third ray");
                    let o = [opp(cones[0]), opp(cones[1])];
                    (Some(o), self.wall_relation(rays, o))
                } else {
                    (None, None)
                };
                Wall { rays, cones, compact, opposite, relation }
            })
            .collect()
    }

    /// Solve v_c + v_d = α v_a + β v_b exactly.
    fn wall_relation(&self, ab: [usize; 2], cd: [usize; 2]) -> Option<(i64, i64)> {
        let (va, vb) = (self.rays[ab[0]], self.rays[ab[1]]);
        let s = [
            self.rays[cd[0]][0] + self.rays[cd[1]][0],
            self.rays[cd[0]][1] + self.rays[cd[1]][1],
            self.rays[cd[0]][2] + self.rays[cd[1]][2],
        ];
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let dt = va[x] * vb[y] - va[y] * vb[x];
            if dt == 0 {
                continue;
            }
            let an = s[x] * vb[y] - s[y] * vb[x];
            let bn = va[x] * s[y] - va[y] * s[x];
            if an % dt != 0 || bn % dt != 0 {
                return None;
            }
            let (al, be) = (an / dt, bn / dt);
            if (0..3).all(|k| al * va[k] + be * vb[k] == s[k]) {
                return Some((al, be));
            }
            return None;
        }
        None
    }

    pub fn wall(&self, i: usize, j: usize) -> Option<Wall> {
        let key = [i.min(j), i.max(j)];
        self.walls().into_iter().find(|w| w.rays == key)
    }

    /// D·Γ for D = Σ coeffs[k] H_k and a compact wall.
    pub fn intersection(&self, coeffs: &[i64], w: &Wall) -> Option<i64> {
        let (o, (al, be)) = (w.opposite?, w.relation?);
        Some(coeffs[o[0]] + coeffs[o[1]] - al * coeffs[w.rays[0]] - be * coeffs[w.rays[1]])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let walls = self.walls();
        let table: Vec<_> = walls
            .iter()
            .filter(|w| w.compact)
            .map(|w| {
                let degs: Vec<i64> = (0..self.n)
                    .map(|k| {
                        let mut c = vec![0; self.n];
                        c[k] = 1;
                        self.intersection(&c, w).unwrap_or(0)
                    })
                    .collect();
                json!({"wall": [w.rays[0] + 1, w.rays[1] + 1], "H_dot": degs})
            })
            .collect();
        json!({
            "n": self.n,
            "rays": self.rays,
            "cones": self.cones.iter().map(|c| c.iter().map(|r| r + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "xi": self.xi,
            "walls": walls.iter().map(|w| json!({
                "rays": [w.rays[0] + 1, w.rays[1] + 1], "compact": w.compact, "relation": w.relation,
            })).collect::<Vec<_>>(),
            "intersections": table,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveProfile {
    Disjoint,
    Affine,
    /// Compact Γ_ij ≅ P¹ with H_i·Γ and H_j·Γ.
    Compact {
        deg_i: i64,
        deg_j: i64,
    },
}

pub fn divisor_intersection_profile(fan: &Fan, i: usize, j: usize) -> Result<CurveProfile> {
    if i == j || i >= fan.n || j >= fan.n {
        return Err(HmsError::Contract(format!("need distinct divisors below {}, got {} and {}", fan.n, i + 1, j + 1)));
    }
    let w = match fan.wall(i, j) {
        None => return Ok(CurveProfile::Disjoint),
        Some(w) => w,
    };
    if !w.compact {
        return Ok(CurveProfile::Affine);
    }
    let deg = |k: usize| {
        let mut c = vec![0; fan.n];
        c[k] = 1;
        fan.intersection(&c, &w).ok_or_else(|| HmsError::Contract("compact wall without relation".into()))
    };
    Ok(CurveProfile::Compact { deg_i: deg(i)?, deg_j: deg(j)? })
}

/// D_i = ∪_j Γ_ij: two affine lines joined by a chain of `compact_chain` projective lines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryShape {
    pub affine_lines: usize,
    pub compact_chain: usize,
    /// Curves in chain order (ray indices of the other divisor).
    pub order: Vec<usize>,
}

impl BoundaryShape {
    pub fn description(&self) -> String {
        match self.compact_chain {
            0 => "two A^1 meeting at one point".into(),
            1 => "two A^1 connected by a P^1".into(),
            k => format!("two A^1 connected by a chain of {k} P^1"),
        }
    }

    /// Dimensions of regular functions by polynomial degree: constants on each P¹, a
    /// polynomial on each A¹, all agreeing at the nodes.
    pub fn function_dims(&self, max_deg: usize) -> Vec<usize> {
        (0..=max_deg).map(|d| if d == 0 { 1 } else { self.affine_lines }).collect()
    }
}

pub fn boundary_profile(fan: &Fan, i: usize) -> Result<BoundaryShape> {
    let walls: Vec<Wall> = fan.walls().into_iter().filter(|w| w.rays.contains(&i)).collect();
    let other = |w: &Wall| if w.rays[0] == i { w.rays[1] } else { w.rays[0] };
    // Two curves in H_i meet at the fixed point of a cone containing both.
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for c in fan.cones.iter().filter(|c| c.contains(&i)) {
        let rest: Vec<usize> = c.iter().copied().filter(|&r| r != i).collect();
        adj.entry(rest[0]).or_default().insert(rest[1]);
        adj.entry(rest[1]).or_default().insert(rest[0]);
    }
    let affine: Vec<usize> = walls.iter().filter(|w| !w.compact).map(other).collect();
    let compact = walls.iter().filter(|w| w.compact).count();
    if affine.len() != 2 {
        return Err(HmsError::Mismatch(format!("H_{} meets {} affine curves", i + 1, affine.len())));
    }
    // Walk from one affine end to the other.
    let mut order = vec![affine[0]];
    let mut prev = usize::MAX;
    while *order.last().expect("nonempty") != affine[1] {
        let cur = *order.last().expect("nonempty");
        let nexts: Vec<usize> = adj.get(&cur).into_iter().flatten().copied().filter(|&x| x != prev).collect();
        if nexts.len() != 1 || order.len() > walls.len() {
            return Err(HmsError::Mismatch(format!("curves on H_{} do not form a chain", i + 1)));
        }
        prev = cur;
        order.push(nexts[0]);
    }
    if order.len() != walls.len() {
        return Err(HmsError::Mismatch(format!("curves on H_{} are not connected", i + 1)));
    }
    Ok(BoundaryShape { affine_lines: 2, compact_chain: compact, order })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LDivisorReport {
    pub n: usize,
    pub coefficients: Vec<i64>,
    pub curves_checked: usize,
    /// (i, wall rays, intersection) with nonzero intersection.
    pub counterexamples: Vec<(usize, [usize; 2], i64)>,
}

impl LDivisorReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn binom2(m: i64) -> i64 {
    if m < 2 {
        0
    } else {
        m * (m - 1) / 2
    }
}

/// L = Σ_{k ≤ ⌊n/2⌋} C(k−1,2) H_k + Σ_{k > ⌊n/2⌋} (C(n−k,2) − 1) H_k; checks
/// (L − H_1 − ⋯ − H_i)·Γ = 0 for every compact toric curve Γ ⊂ H_{i+1}, 0 ≤ i < n − 1.
pub fn check_l_divisor(fan: &Fan) -> LDivisorReport {
    let n = fan.n;
    let half = n / 2;
    let coefficients: Vec<i64> =
        (1..=n).map(|k| if k <= half { binom2(k as i64 - 1) } else { binom2((n - k) as i64) - 1 }).collect();
    let walls = fan.walls();
    let mut curves_checked = 0;
    let mut counterexamples = Vec::new();
    for i in 0..n - 1 {
        let mut c = coefficients.clone();
        for x in c.iter_mut().take(i) {
            *x -= 1;
        }
        for w in walls.iter().filter(|w| w.compact && w.rays.contains(&i)) {
            curves_checked += 1;
            let v = fan.intersection(&c, w).unwrap_or(i64::MIN);
            if v != 0 {
                counterexamples.push((i, w.rays, v));
            }
        }
    }
    LDivisorReport { n, coefficients, curves_checked, counterexamples }
}

/// First Betti number of the bipartite incidence graph: curve components (walls) against
/// intersection points (torus-fixed points, one per maximal cone), one edge per incidence.
pub fn k_minus_one_loops(fan: &Fan) -> usize {
    let walls = fan.walls();
    let nw = walls.len();
    let nv = nw + fan.cones.len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let mut edges = 0;
    for (wi, w) in walls.iter().enumerate() {
        for &c in &w.cones {
            edges += 1;
            let (a, b) = (find(&mut parent, wi), find(&mut parent, nw + c));
            parent[a] = b;
        }
    }
    let comps = (0..nv).filter(|&x| find(&mut parent, x) == x).count();
    edges + comps - nv
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomProfile {
    pub i: usize,
    pub j: usize,
    /// weight → dimension predicted from the curve data.
    pub expected: BTreeMap<u32, usize>,
    /// weight → dimension of the cycle-category hom space.
    pub actual: BTreeMap<u32, usize>,
}

impl HomProfile {
    pub fn matches(&self) -> bool {
        self.expected == self.actual
    }
}

/// Expected Hom(E_i, E_j) by weight: D_i functions (x, y of weight 2) on the diagonal, an
/// odd tower over each affine Γ_ij, nothing over compact Γ_ij with O(−1) or disjoint pairs.
pub fn dsg_hom_profile(fan: &Fan, i: usize, j: usize, w: u32) -> Result<HomProfile> {
    let n = fan.n;
    let mut expected = BTreeMap::new();
    if i == j {
        let shape = boundary_profile(fan, i)?;
        for (deg, dim) in shape.function_dims(w as usize / 2).into_iter().enumerate() {
            expected.insert(2 * deg as u32, dim);
        }
    } else {
        match divisor_intersection_profile(fan, i, j)? {
            CurveProfile::Affine => {
                for k in (1..=w).step_by(2) {
                    expected.insert(k, 1);
                }
            }
            CurveProfile::Compact { deg_i: -1, deg_j: -1 } | CurveProfile::Disjoint => {}
            CurveProfile::Compact { deg_i, deg_j } => {
                return Err(HmsError::Mismatch(format!(
                    "Γ_{}{} has normal degrees ({deg_i}, {deg_j}), not (−1, −1)",
                    i + 1,
                    j + 1
                )))
            }
        }
    }
    let cat = Category::build(GradingData::standard(n)?)?;
    let mut actual = BTreeMap::new();
    for b in cat.hom_basis(i, j, w, None) {
        *actual.entry(b.weight()).or_insert(0) += 1;
    }
    Ok(HomProfile { i, j, expected, actual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_examples() {
        let f3 = build_fan(3).unwrap();
        assert_eq!(f3.rays.len(), 3);
        assert_eq!(f3.cones.len(), 1);
        let f5 = build_fan(5).unwrap();
        assert_eq!(f5.rays, vec![[0, 1, 1], [1, 1, 1], [2, 0, 1], [1, 0, 1], [0, 0, 1]]);
        for n in 3..=12 {
            let f = build_fan(n).unwrap();
            assert_eq!(f.cones.len(), n - 2);
            assert!((0..f.cones.len()).all(|c| f.cone_determinant(c).abs() == 1));
        }
        assert!(build_fan(2).is_err());
    }

    #[test]
    fn curve_profiles() {
        for n in 3..=9 {
            let f = build_fan(n).unwrap();
            let mut compact_seen = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let p = divisor_intersection_profile(&f, i, j).unwrap();
                    let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                    match p {
                        CurveProfile::Affine => assert!(adjacent),
                        CurveProfile::Compact { deg_i, deg_j } => {
                            assert!(!adjacent);
                            assert_eq!((deg_i, deg_j), (-1, -1));
                            compact_seen = true;
                        }
                        CurveProfile::Disjoint => assert!(!adjacent),
                    }
                }
            }
            assert_eq!(compact_seen, n >= 4);
        }
    }

    #[test]
    fn boundary_shapes() {
        let f3 = build_fan(3).unwrap();
        for i in 0..3 {
            assert_eq!(boundary_profile(&f3, i).unwrap().compact_chain, 0);
        }
        let f5 = build_fan(5).unwrap();
        let chains: Vec<usize> = (0..5).map(|i| boundary_profile(&f5, i).unwrap().compact_chain).collect();
        assert!(chains.contains(&1));
        let f8 = build_fan(8).unwrap();
        let chains: Vec<usize> = (0..8).map(|i| boundary_profile(&f8, i).unwrap().compact_chain).collect();
        assert!(chains.contains(&2));
        assert!(chains.iter().all(|&c| c <= 2));
        assert_eq!(boundary_profile(&f8, 2).unwrap().function_dims(3), vec![1, 2, 2, 2]);
    }

    #[test]
    fn l_divisor_restrictions_are_trivial() {
        for n in 3..=10 {
            let r = check_l_divisor(&build_fan(n).unwrap());
            assert!(r.passed(), "n = {n}: {:?}", r.counterexamples);
            assert_eq!(r.curves_checked > 0, n >= 4);
        }
    }

    #[test]
    fn intersection_oracle_on_simple_walls() {
        // n = 4: interior wall {v_1, v_3} between cones with v_2 and v_4.
        let f = build_fan(4).unwrap();
        let w = f.wall(0, 2).unwrap();
        assert!(w.compact);
        assert_eq!(w.relation, Some((1, 1)));
        let mut c = vec![0; 4];
        c[1] = 1;
        assert_eq!(f.intersection(&c, &w), Some(1));
        // Linear equivalence: div(χ^m) = Σ⟨m, v_k⟩ H_k pairs to zero.
        let m = [2, -3, 5];
        let c: Vec<i64> = f.rays.iter().map(|v| dot(&m, v)).collect();
        assert_eq!(f.intersection(&c, &w), Some(0));
    }

    #[test]
    fn loops_vanish() {
        let f3 = build_fan(3).unwrap();
        assert_eq!(f3.walls().len(), 3);
        for n in 3..=10 {
            assert_eq!(k_minus_one_loops(&build_fan(n).unwrap()), 0);
        }
    }

    #[test]
    fn hom_profiles_match_cycle_category() {
        for n in 3..=8 {
            let f = build_fan(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let p = dsg_hom_profile(&f, i, j, 9).unwrap();
                    assert!(p.matches(), "n={n} ({i},{j}): {p:?}");
                }
            }
        }
    }

    #[test]
    fn fan_json_has_tables() {
        let j = build_fan(5).unwrap().to_json();
        assert_eq!(j["rays"].as_array().unwrap().len(), 5);
        assert!(!j["intersections"].as_array().unwrap().is_empty());
    }
}
