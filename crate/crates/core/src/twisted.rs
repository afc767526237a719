//! One-sided twisted complexes over a truncated A∞-structure on A.
//!
//! Convention: an element x ∈ A(X, Y) viewed in Hom(X[a], Y[b]) has shifted degree
//! deg x + a − b. Differentials δ have shifted degree 1 and are strictly lower
//! triangular (entries only from earlier to later objects). The twisted products are
//!   m^Tw_k(a_k, …, a_1) = Σ m_{k+i_0+…+i_k}(δ^{i_k}, a_k, δ^{i_{k−1}}, …, a_1, δ^{i_0})
//! with sign-free insertion, and the Maurer–Cartan residual is Σ_{k≥2} m_k(δ, …, δ).

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::ainfty::AInftyStructure;
use crate::category::{BasisMorphism, HomElement};
use crate::error::{HmsError, Result};
use crate::exact::{add_term, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedComplex {
    /// (object, shift) in order.
    pub objects: Vec<(usize, Rational64)>,
    /// delta[i][j]: component from objects[j] to objects[i]; zero unless i > j.
    pub delta: Vec<Vec<HomElement>>,
}

impl TwistedComplex {
    pub fn single(object: usize, shift: Rational64) -> Self {
        TwistedComplex { objects: vec![(object, shift)], delta: vec![vec![HomElement::zero(object, object)]] }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn validate(&self, m: &AInftyStructure) -> Result<()> {
        let l = self.len();
        if self.delta.len() != l || self.delta.iter().any(|r| r.len() != l) {
            return Err(HmsError::Contract("differential matrix has the wrong shape".into()));
        }
        for i in 0..l {
            for j in 0..l {
                let e = &self.delta[i][j];
                if e.src != self.objects[j].0 || e.tgt != self.objects[i].0 {
                    return Err(HmsError::Contract(format!("entry ({}, {}) has wrong endpoints", i + 1, j + 1)));
                }
                if i <= j && !e.is_zero() {
                    return Err(HmsError::Contract("differential is not strictly lower triangular".into()));
                }
                for b in e.terms.keys() {
                    let d = shifted_degree(m, b, self.objects[j].1, self.objects[i].1);
                    if d != Rational64::from(1) {
                        return Err(HmsError::Contract(format!("differential component {b} has degree {d}")));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn shifted_degree(
    m: &AInftyStructure,
    b: &BasisMorphism,
    src_shift: Rational64,
    tgt_shift: Rational64,
) -> Rational64 {
    m.cat.degree(b) + src_shift - tgt_shift
}

/// Matrix morphism between twisted complexes: entries[i][j] from src.objects[j] to tgt.objects[i].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwMorphism {
    pub src: TwistedComplex,
    pub tgt: TwistedComplex,
    pub entries: Vec<Vec<HomElement>>,
}

impl TwMorphism {
    pub fn zero(src: &TwistedComplex, tgt: &TwistedComplex) -> Self {
        let entries = tgt
            .objects
            .iter()
            .map(|&(o, _)| src.objects.iter().map(|&(s, _)| HomElement::zero(s, o)).collect())
            .collect();
        TwMorphism { src: src.clone(), tgt: tgt.clone(), entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(HomElement::is_zero)
    }

    /// Shifted degrees of all nonzero components.
    pub fn degrees(&self, m: &AInftyStructure) -> Vec<Rational64> {
        let mut out = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                for b in e.terms.keys() {
                    out.push(shifted_degree(m, b, self.src.objects[j].1, self.tgt.objects[i].1));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Sum over object paths of m_r on the chosen matrix entries; `mats[t]` is the t-th
/// argument (a morphism or a δ) in application order.
fn path_sum(
    m: &AInftyStructure,
    mats: &[&Vec<Vec<HomElement>>],
    end: Option<usize>,
    out: &mut Vec<HomElement>,
    acc: &mut Vec<HomElement>,
    at: usize,
) -> Result<()> {
    let t = acc.len();
    if t == mats.len() {
        if end.is_none_or(|e| e == at) {
            out.push(m.eval_elements(acc)?);
        }
        return Ok(());
    }
    for (i, row) in mats[t].iter().enumerate() {
        let e = &row[at];
        if e.is_zero() {
            continue;
        }
        acc.push(e.clone());
        path_sum(m, mats, end, out, acc, i)?;
        acc.pop();
    }
    Ok(())
}

fn max_weight(e: &HomElement) -> u32 {
    e.terms.keys().map(BasisMorphism::weight).max().unwrap_or(0)
}

/// m^Tw_k(a_k, …, a_1); `fs` in application order (fs[0] = a_1).
pub fn tw_product(m: &AInftyStructure, fs: &[&TwMorphism]) -> Result<TwMorphism> {
    let (first, last) = match (fs.first(), fs.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(HmsError::Contract("twisted product needs an argument".into())),
    };
    if fs.windows(2).any(|w| w[0].tgt != w[1].src) {
        return Err(HmsError::Contract("twisted morphisms are not composable".into()));
    }
    let complexes: Vec<&TwistedComplex> = std::iter::once(&first.src).chain(fs.iter().map(|f| &f.tgt)).collect();
    let max_arity = fs.len() + complexes.iter().map(|c| c.len() - 1).sum::<usize>();
    if max_arity > m.trunc.arity_cap {
        return Err(HmsError::Truncation(format!(
            "twisted product may need m_{max_arity}, beyond the arity cap {}",
            m.trunc.arity_cap
        )));
    }
    let weight: u32 = fs.iter().map(|f| f.entries.iter().flatten().map(max_weight).max().unwrap_or(0)).sum::<u32>()
        + complexes
            .iter()
            .map(|c| c.delta.iter().flatten().map(max_weight).max().unwrap_or(0) * (c.len() as u32 - 1))
            .sum::<u32>();
    if weight > m.trunc.weight_cap {
        return Err(HmsError::Truncation(format!(
            "twisted product may need inputs of weight {weight}, beyond the weight cap {}",
            m.trunc.weight_cap
        )));
    }
    let mut result = TwMorphism::zero(&first.src, &last.tgt);
    // Insertion pattern: i_0 δ's of complex 0, f_1, i_1 δ's of complex 1, …
    let mut patterns: Vec<Vec<usize>> = vec![vec![]];
    for c in &complexes {
        let mut next = Vec::new();
        for p in &patterns {
            for i in 0..c.len() {
                let mut q = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        patterns = next;
    }
    for pat in patterns {
        if fs.len() + pat.iter().sum::<usize>() < 2 {
            continue;
        }
        let mut mats: Vec<&Vec<Vec<HomElement>>> = Vec::new();
        for (t, &i) in pat.iter().enumerate() {
            for _ in 0..i {
                mats.push(&complexes[t].delta);
            }
            if t < fs.len() {
                mats.push(&fs[t].entries);
            }
        }
        for j in 0..first.src.len() {
            let mut outs = Vec::new();
            path_sum_rows(m, &mats, j, &mut outs)?;
            for (i, e) in outs {
                for (b, c) in e.terms {
                    add_term(&mut result.entries[i][j].terms, b, &c);
                }
            }
        }
    }
    Ok(result)
}

fn path_sum_rows(
    m: &AInftyStructure,
    mats: &[&Vec<Vec<HomElement>>],
    start: usize,
    out: &mut Vec<(usize, HomElement)>,
) -> Result<()> {
    let rows = mats.last().map(|x| x.len()).unwrap_or(0);
    for end in 0..rows {
        let mut vals = Vec::new();
        let mut acc = Vec::new();
        path_sum(m, mats, Some(end), &mut vals, &mut acc, start)?;
        for v in vals {
            out.push((end, v));
        }
    }
    Ok(())
}

pub fn tw_compose(m: &AInftyStructure, g: &TwMorphism, f: &TwMorphism) -> Result<TwMorphism> {
    tw_product(m, &[f, g])
}

/// Σ_{k≥2} m_k(δ, …, δ) as a matrix.
pub fn maurer_cartan_residual(m: &AInftyStructure, c: &TwistedComplex) -> Result<Vec<Vec<HomElement>>> {
    let l = c.len();
    let mut out: Vec<Vec<HomElement>> =
        (0..l).map(|i| (0..l).map(|j| HomElement::zero(c.objects[j].0, c.objects[i].0)).collect()).collect();
    for k in 2..l {
        if k > m.trunc.arity_cap {
            return Err(HmsError::Truncation(format!("Maurer–Cartan check needs m_{k}")));
        }
        let mats: Vec<&Vec<Vec<HomElement>>> = (0..k).map(|_| &c.delta).collect();
        for j in 0..l {
            let mut outs = Vec::new();
            path_sum_rows(m, &mats, j, &mut outs)?;
            for (i, e) in outs {
                for (b, x) in e.terms {
                    add_term(&mut out[i][j].terms, b, &x);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McDefect {
    pub from: usize,
    pub to: usize,
    pub terms: Vec<(String, String)>,
}

/// E_1 → E_2 → ⋯ → E_{n−1} with differentials u_{i,i+1}, shifted so that δ has degree 1
/// and E_{n−1} sits at shift −1.
pub fn build_chain_complex(m: &AInftyStructure) -> Result<TwistedComplex> {
    let n = m.n();
    if m.trunc.arity_cap < n {
        return Err(HmsError::Truncation(format!("the complex needs m_k up to k = {n}")));
    }
    let l = n - 1;
    let mut shifts = vec![Rational64::from(0); l];
    shifts[l - 1] = Rational64::from(-1);
    for i in (0..l - 1).rev() {
        // δ: E_{i} → E_{i+1} is u(i), degree deg u + s_i − s_{i+1} = 1
        shifts[i] = shifts[i + 1] + Rational64::from(1) - m.cat.degree(&m.cat.u(i));
    }
    let objects: Vec<(usize, Rational64)> = (0..l).zip(shifts).collect();
    let mut delta: Vec<Vec<HomElement>> = (0..l).map(|i| (0..l).map(|j| HomElement::zero(j, i)).collect()).collect();
    for i in 0..l - 1 {
        delta[i + 1][i] = HomElement::basis(m.cat.u(i), m.field);
    }
    let c = TwistedComplex { objects, delta };
    c.validate(m)?;
    let res = maurer_cartan_residual(m, &c)?;
    if let Some((i, j, e)) = res
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, e)| (i, j, e)))
        .find(|t| !t.2.is_zero())
    {
        return Err(HmsError::Contract(format!(
            "Maurer–Cartan fails from E_{} to E_{}: {:?}",
            j + 1,
            i + 1,
            e.terms.iter().map(|(b, c)| format!("{}·{b}", c.to_text())).collect::<Vec<_>>()
        )));
    }
    Ok(c)
}

/// ū_{n,1}: E_n → C_{n−1} and ū_{n−1,n}: C_{n−1} → E_n, both of degree 0.
pub fn convolution_morphisms(m: &AInftyStructure, c: &TwistedComplex) -> (TwMorphism, TwMorphism) {
    let n = m.n();
    let last = n - 1;
    let s_last = c.objects[n - 2].1 + m.cat.degree(&m.cat.u(n - 2));
    let en = TwistedComplex::single(last, s_last);
    let mut into = TwMorphism::zero(&en, c);
    into.entries[0][0] = HomElement::basis(m.cat.u(last), m.field);
    let mut out = TwMorphism::zero(c, &en);
    out.entries[0][n - 2] = HomElement::basis(m.cat.u(n - 2), m.field);
    (into, out)
}

/// id_{E_n}-coefficient of ū_{n−1,n} ∘Tw ū_{n,1}.
pub fn convolution_iso_check(m: &AInftyStructure) -> Result<Scalar> {
    let c = build_chain_complex(m)?;
    let (into, out) = convolution_morphisms(m, &c);
    let p = tw_compose(m, &out, &into)?;
    let id = BasisMorphism::id(m.n() - 1);
    Ok(p.entries[0][0].coefficient(&id).cloned().unwrap_or_else(|| m.field.zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::{cyclic_seed, extend_structure, invariants_at};
    use crate::category::{Category, GradingData};
    use crate::exact::Field;
    use crate::hochschild::Truncation;

    const Q: Field = Field::Rational;

    fn cat(n: usize) -> Category {
        let g = match n {
            3 => GradingData::integral(vec![1, 1, -1], vec![1, -1, 1]),
            4 => GradingData::integral(vec![3, 1, -1, -1], vec![1, 1, 1, -1]),
            _ => GradingData::integral(vec![1, 1, 1, 1, -1], vec![1, 1, 1, 1, -1]),
        };
        Category::build(g.unwrap()).unwrap()
    }

    fn structure(n: usize, a: i64, b: i64) -> AInftyStructure {
        let t = Truncation { arity_cap: n + 1, weight_cap: n as u32 + 2 };
        extend_structure(&cyclic_seed(&cat(n), Q, &Q.int(a), &Q.int(b)), t).unwrap()
    }

    #[test]
    fn chain_complexes_satisfy_maurer_cartan() {
        for n in [3, 4, 5] {
            let m = structure(n, 1, 1);
            let c = build_chain_complex(&m).unwrap();
            assert_eq!(c.len(), n - 1);
            let res = maurer_cartan_residual(&m, &c).unwrap();
            assert!(res.iter().flatten().all(HomElement::is_zero));
        }
    }

    #[test]
    fn maurer_cartan_detects_nonzero_square() {
        // X_1 → X_2 → X_1 with δ = u_{1,2}, v_{2,1}: m_2(δ, δ) = y_1 ≠ 0
        let m = structure(3, 1, 1);
        let c = &m.cat;
        let z = Rational64::from(0);
        let mut delta: Vec<Vec<HomElement>> = vec![vec![]; 3];
        let objs = [0usize, 1, 0];
        for i in 0..3 {
            delta[i] = (0..3).map(|j| HomElement::zero(objs[j], objs[i])).collect();
        }
        delta[1][0] = HomElement::basis(c.u(0), Q);
        delta[2][1] = HomElement::basis(c.v(1), Q);
        let cx = TwistedComplex { objects: objs.iter().map(|&o| (o, z)).collect(), delta };
        let res = maurer_cartan_residual(&m, &cx).unwrap();
        let y = c.morphism(crate::category::Kind::Y, 0, 1).unwrap();
        assert_eq!(res[2][0].coefficient(&y), Some(&Q.one()));
    }

    #[test]
    fn convolution_coefficient_is_a() {
        for n in [3, 4, 5] {
            for (a, b) in [(1, 1), (2, -1), (0, 0)] {
                let m = structure(n, a, b);
                let x = convolution_iso_check(&m).unwrap();
                assert_eq!(x, Q.int(a), "n = {n}");
                assert_eq!(x, invariants_at(&m, n - 1).0);
            }
        }
    }

    #[test]
    fn convolution_morphisms_have_degree_zero() {
        for n in [3, 4, 5] {
            let m = structure(n, 1, 1);
            let c = build_chain_complex(&m).unwrap();
            let (into, out) = convolution_morphisms(&m, &c);
            assert_eq!(into.degrees(&m), vec![Rational64::from(0)]);
            assert_eq!(out.degrees(&m), vec![Rational64::from(0)]);
            let p = tw_compose(&m, &out, &into).unwrap();
            assert!(p.degrees(&m).iter().all(|d| *d == Rational64::from(0)));
        }
    }

    #[test]
    fn degenerate_complexes_reduce_to_m2() {
        let m = structure(3, 1, 1);
        let c = &m.cat;
        let x0 = TwistedComplex::single(0, Rational64::from(0));
        let x1 = TwistedComplex::single(1, Rational64::from(0));
        let mut f = TwMorphism::zero(&x0, &x1);
        f.entries[0][0] = HomElement::basis(c.u(0), Q);
        let mut g = TwMorphism::zero(&x1, &x0);
        g.entries[0][0] = HomElement::basis(c.v(1), Q);
        let p = tw_compose(&m, &g, &f).unwrap();
        let expect = c.compose(&g.entries[0][0], &f.entries[0][0]).unwrap();
        assert_eq!(p.entries[0][0], expect);
        let z = TwMorphism::zero(&x1, &x0);
        assert!(tw_compose(&m, &z, &f).unwrap().is_zero());
    }

    #[test]
    fn insufficient_arity_cap_is_reported() {
        let c = cat(4);
        let m = AInftyStructure::trivial(c, Q, Truncation { arity_cap: 3, weight_cap: 6 });
        assert!(matches!(build_chain_complex(&m), Err(HmsError::Truncation(_))));
    }
}
