//! Finite towers `G_1 <- G_2 <- ...` of surjections standing in for profinite
//! groups, and the Hopf algebra maps induced by group homomorphisms.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::character::{burnside_character_table, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::group::{builtin_group, cyclic, FiniteGroup, GroupJson};
use crate::hopf::{AlgebraElement, Field, TensorElement};
use crate::scalar::C64;
use crate::wedderburn::central_idempotents;

/// `K[f]: K[G] -> K[H]`, `delta_g -> delta_{f(g)}`.
#[derive(Debug, Clone)]
pub struct InducedMap {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    field: Field,
    map: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HopfMorphismResiduals {
    pub multiply: f64,
    pub comultiply: f64,
    pub counit: f64,
    pub antipode: f64,
    pub unit: f64,
}

impl HopfMorphismResiduals {
    pub fn max(&self) -> f64 {
        [self.multiply, self.comultiply, self.counit, self.antipode, self.unit].into_iter().fold(0.0, f64::max)
    }
}

pub fn induced_algebra_map(
    source: &Arc<FiniteGroup>,
    target: &Arc<FiniteGroup>,
    map: &[usize],
    field: Field,
) -> Result<InducedMap> {
    source.check_homomorphism(target, map)?;
    Ok(InducedMap { source: Arc::clone(source), target: Arc::clone(target), field, map: map.to_vec() })
}

impl InducedMap {
    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.coeffs().len() != self.source.order() || a.field() != self.field {
            return Err(Error::ShapeMismatch("element is not in the source algebra".into()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.target.order()];
        for (g, c) in a.coeffs().iter().enumerate() {
            out[self.map[g]] += c;
        }
        AlgebraElement::new(&self.target, self.field, out, 0.0)
    }

    fn apply_tensor(&self, t: &TensorElement) -> Vec<C64> {
        let (n, m) = (self.source.order(), self.target.order());
        let mut out = vec![C64::new(0.0, 0.0); m * m];
        for g in 0..n {
            for h in 0..n {
                out[self.map[g] * m + self.map[h]] += t.coeff(g, h);
            }
        }
        out
    }

    /// Matrix columns are basis vectors, so the rank is the image size.
    pub fn rank(&self) -> usize {
        self.map.iter().collect::<BTreeSet<_>>().len()
    }

    /// Dense matrix with `|H|` rows and `|G|` columns.
    pub fn matrix(&self) -> Vec<Vec<C64>> {
        let mut m = vec![vec![C64::new(0.0, 0.0); self.source.order()]; self.target.order()];
        for (g, &h) in self.map.iter().enumerate() {
            m[h][g] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.target.order()
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.source.order()
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &InducedMap) -> Result<InducedMap> {
        if *inner.target != *self.source || inner.field != self.field {
            return Err(Error::ShapeMismatch("maps do not compose".into()));
        }
        let map = inner.map.iter().map(|&g| self.map[g]).collect::<Vec<_>>();
        induced_algebra_map(&inner.source, &self.target, &map, self.field)
    }

    /// The Hopf morphism identities on basis vectors and pairs of them, where
    /// every coefficient is 0 or 1 and the comparison is exact.
    pub fn basis_hopf_residuals(&self) -> HopfMorphismResiduals {
        let n = self.source.order();
        let basis: Vec<AlgebraElement> = (0..n).map(|g| AlgebraElement::basis(&self.source, self.field, g)).collect();
        let images: Vec<AlgebraElement> = basis.iter().map(|b| self.apply(b).expect("source element")).collect();
        let mut r = HopfMorphismResiduals::default();
        let one = AlgebraElement::one(&self.source, self.field);
        r.unit = self.apply(&one).expect("source element").max_abs_diff(&AlgebraElement::one(&self.target, self.field));
        for g in 0..n {
            let fa = &images[g];
            for h in 0..n {
                let fab = self.apply(&basis[g].multiply(&basis[h]).expect("same algebra")).expect("source element");
                r.multiply = r.multiply.max(fab.max_abs_diff(&fa.multiply(&images[h]).expect("same algebra")));
            }
            let lhs = self.apply_tensor(&basis[g].comultiply());
            let d = lhs.iter().zip(fa.comultiply().coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            r.comultiply = r.comultiply.max(d);
            r.counit = r.counit.max((fa.counit() - basis[g].counit()).norm());
            let s = self.apply(&basis[g].antipode()).expect("source element");
            r.antipode = r.antipode.max(s.max_abs_diff(&fa.antipode()));
        }
        r
    }

    /// Compares both sides of each Hopf morphism identity on random elements.
    pub fn hopf_residuals(&self, samples: usize, seed: u64) -> HopfMorphismResiduals {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = HopfMorphismResiduals::default();
        let one = AlgebraElement::one(&self.source, self.field);
        r.unit = self.apply(&one).expect("source element").max_abs_diff(&AlgebraElement::one(&self.target, self.field));
        for _ in 0..samples {
            let a = AlgebraElement::random(&self.source, self.field, &mut rng);
            let b = AlgebraElement::random(&self.source, self.field, &mut rng);
            let fa = self.apply(&a).expect("source element");
            let fb = self.apply(&b).expect("source element");
            let fab = self.apply(&a.multiply(&b).expect("same algebra")).expect("source element");
            r.multiply = r.multiply.max(fab.max_abs_diff(&fa.multiply(&fb).expect("same algebra")));
            let lhs = self.apply_tensor(&a.comultiply());
            let rhs = fa.comultiply();
            let d = lhs.iter().zip(rhs.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            r.comultiply = r.comultiply.max(d);
            r.counit = r.counit.max((fa.counit() - a.counit()).norm());
            let s = self.apply(&a.antipode()).expect("source element");
            r.antipode = r.antipode.max(s.max_abs_diff(&fa.antipode()));
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub subgroup_order: usize,
    pub group_order: usize,
    pub rank: usize,
    pub injective: bool,
    pub hopf_residuals: HopfMorphismResiduals,
    pub basis_residuals: HopfMorphismResiduals,
}

/// Restriction of the multiplication table to `elements`, relabelled in the given order.
pub fn subgroup(group: &FiniteGroup, elements: &[usize]) -> Result<FiniteGroup> {
    let set: BTreeSet<usize> = elements.iter().copied().collect();
    if set.len() != elements.len() {
        return Err(Error::NotSubgroup("repeated elements".into()));
    }
    if let Some(&g) = elements.iter().find(|&&g| g >= group.order()) {
        return Err(Error::NotSubgroup(format!("element {g} out of range")));
    }
    if !set.contains(&group.identity()) {
        return Err(Error::NotSubgroup("identity missing".into()));
    }
    let index = |g: usize| elements.iter().position(|&x| x == g);
    let mut rows = Vec::with_capacity(elements.len());
    for &a in elements {
        let mut row = Vec::with_capacity(elements.len());
        for &b in elements {
            let p = group.mul(a, b);
            row.push(index(p).ok_or_else(|| Error::NotSubgroup(format!("{a}*{b} = {p} leaves the subset")))?);
        }
        rows.push(row);
    }
    FiniteGroup::from_table(rows)
}

/// Checks that the inclusion `H <= G` induces an injective Hopf morphism `K[H] -> K[G]`.
pub fn subgroup_embedding_check(
    group: &Arc<FiniteGroup>,
    elements: &[usize],
    field: Field,
    seed: u64,
) -> Result<EmbeddingReport> {
    let h = Arc::new(subgroup(group, elements)?);
    let inclusion = induced_algebra_map(&h, group, elements, field)?;
    Ok(EmbeddingReport {
        subgroup_order: h.order(),
        group_order: group.order(),
        rank: inclusion.rank(),
        injective: inclusion.is_injective(),
        hopf_residuals: inclusion.hopf_residuals(10, seed),
        basis_residuals: inclusion.basis_hopf_residuals(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    levels: Vec<Arc<FiniteGroup>>,
    /// `maps[k]` sends level `k + 1` onto level `k`.
    maps: Vec<Vec<usize>>,
}

/// A group given by builtin name or by table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Builtin(String),
    Table(GroupJson),
}

impl GroupRef {
    pub fn resolve(&self) -> Result<FiniteGroup> {
        match self {
            GroupRef::Builtin(name) => builtin_group(name),
            GroupRef::Table(json) => FiniteGroup::from_json(json),
        }
    }
}

/// A thread level: a group element index or a coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThreadEntry {
    Element(usize),
    Coeffs(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerJson {
    pub levels: Vec<GroupRef>,
    pub maps: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub threads: Vec<Vec<ThreadEntry>>,
}

impl Tower {
    pub fn new(levels: Vec<Arc<FiniteGroup>>, maps: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() || maps.len() + 1 != levels.len() {
            return Err(Error::ShapeMismatch(format!("{} levels need {} maps", levels.len(), levels.len().saturating_sub(1))));
        }
        for (k, f) in maps.iter().enumerate() {
            levels[k + 1].check_homomorphism(&levels[k], f)?;
            if f.iter().collect::<BTreeSet<_>>().len() != levels[k].order() {
                return Err(Error::NotSurjective(k));
            }
        }
        Ok(Tower { levels, maps })
    }

    /// `Z/p <- Z/p^2 <- ... <- Z/p^depth` with reduction maps.
    pub fn cyclic_prime_power(p: usize, depth: usize) -> Result<Self> {
        if p < 2 || depth == 0 {
            return Err(Error::UnsupportedParameter(format!("prime power tower ({p}, {depth})")));
        }
        let orders: Vec<usize> = (1..=depth as u32).map(|k| p.pow(k)).collect();
        let levels = orders.iter().map(|&n| cyclic(n).map(Arc::new)).collect::<Result<Vec<_>>>()?;
        let maps = orders.windows(2).map(|w| (0..w[1]).map(|x| x % w[0]).collect()).collect();
        Tower::new(levels, maps)
    }

    pub fn from_json(json: &TowerJson) -> Result<Self> {
        let levels = json.levels.iter().map(|r| r.resolve().map(Arc::new)).collect::<Result<Vec<_>>>()?;
        Tower::new(levels, json.maps.clone())
    }

    pub fn levels(&self) -> &[Arc<FiniteGroup>] {
        &self.levels
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn induced(&self, k: usize, field: Field) -> Result<InducedMap> {
        induced_algebra_map(&self.levels[k + 1], &self.levels[k], &self.maps[k], field)
    }

    pub fn thread_from_entries(&self, entries: &[ThreadEntry], field: Field) -> Result<Vec<AlgebraElement>> {
        if entries.len() != self.levels.len() {
            return Err(Error::ShapeMismatch(format!("thread of length {} on {} levels", entries.len(), self.levels.len())));
        }
        entries
            .iter()
            .zip(&self.levels)
            .map(|(e, g)| match e {
                ThreadEntry::Element(x) if *x < g.order() => Ok(AlgebraElement::basis(g, field, *x)),
                ThreadEntry::Element(x) => Err(Error::InvalidInput(format!("element {x} out of range"))),
                ThreadEntry::Coeffs(c) => AlgebraElement::from_real(g, field, c),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum ThreadVerdict {
    ValidGroupElement { elements: Vec<usize> },
    Broken { level: usize },
}

fn as_basis_element(a: &AlgebraElement, tolerance: f64) -> Option<usize> {
    let mut found = None;
    for (g, c) in a.coeffs().iter().enumerate() {
        if (c - C64::new(1.0, 0.0)).norm() <= tolerance {
            if found.is_some() {
                return None;
            }
            found = Some(g);
        } else if c.norm() > tolerance {
            return None;
        }
    }
    found
}

/// A thread is valid when every level is a basis grouplike and level `k` is
/// the image of level `k + 1`; otherwise the first offending level is reported.
pub fn grouplike_thread_check(tower: &Tower, thread: &[AlgebraElement], tolerance: f64) -> Result<ThreadVerdict> {
    if thread.len() != tower.len() {
        return Err(Error::ShapeMismatch(format!("thread of length {} on {} levels", thread.len(), tower.len())));
    }
    let mut elements = Vec::with_capacity(thread.len());
    for (k, a) in thread.iter().enumerate() {
        if a.coeffs().len() != tower.levels[k].order() {
            return Err(Error::ShapeMismatch(format!("level {k} element has the wrong length")));
        }
        match as_basis_element(a, tolerance) {
            Some(g) => elements.push(g),
            None => return Ok(ThreadVerdict::Broken { level: k }),
        }
    }
    for k in 0..thread.len().saturating_sub(1) {
        if tower.maps[k][elements[k + 1]] != elements[k] {
            return Ok(ThreadVerdict::Broken { level: k });
        }
    }
    Ok(ThreadVerdict::ValidGroupElement { elements })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackLevel {
    pub level: usize,
    /// For each idempotent of level `k`, the level `k + 1` blocks whose sum it pulls back to.
    pub decompositions: Vec<Vec<usize>>,
    pub residual: f64,
}

/// Pulls each central idempotent `e` of `K[G_k]` back along `f_k` as
/// `(1/|ker f_k|) F^T e` and expresses it as a 0/1 combination of the central
/// idempotents of `K[G_{k+1}]`.
pub fn idempotent_pullback_check(tower: &Tower, field: Field, tolerance: f64) -> Result<Vec<PullbackLevel>> {
    let certs = tower
        .levels
        .iter()
        .map(|g| {
            let t = burnside_character_table(g, tolerance, DEFAULT_SEED)?;
            central_idempotents(&t, field, tolerance)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for k in 0..tower.maps.len() {
        let upper = &tower.levels[k + 1];
        let kernel = upper.order() / tower.levels[k].order();
        let f = &tower.maps[k];
        let mut decompositions = Vec::new();
        let mut residual: f64 = 0.0;
        for block in &certs[k].blocks {
            let e = &block.idempotent;
            let coeffs: Vec<C64> = (0..upper.order()).map(|g| e.coeff(f[g]) / kernel as f64).collect();
            let pulled = AlgebraElement::new(upper, field, coeffs, f64::INFINITY)?;
            let mut members = Vec::new();
            let mut sum = AlgebraElement::zero(upper, field);
            for (j, b) in certs[k + 1].blocks.iter().enumerate() {
                // x e_j = c_j e_j with c_j in {0, 1}
                let id = upper.identity();
                let c = pulled.multiply(&b.idempotent)?.coeff(id) / b.idempotent.coeff(id);
                let rounded = c.re.round();
                residual = residual.max((c - C64::new(rounded, 0.0)).norm());
                if rounded == 1.0 {
                    members.push(j);
                    sum = sum.add(&b.idempotent)?;
                } else if rounded != 0.0 {
                    residual = residual.max((c.re - 0.5).abs().max(1.0));
                }
            }
            residual = residual.max(pulled.max_abs_diff(&sum));
            decompositions.push(members);
        }
        if !(residual <= tolerance) {
            return Err(Error::CertificationFailure { what: format!("idempotent pullback at level {k}"), residual });
        }
        out.push(PullbackLevel { level: k, decompositions, residual });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{symmetric, symmetric_elements, trivial};

    fn arc(g: FiniteGroup) -> Arc<FiniteGroup> {
        Arc::new(g)
    }

    #[test]
    fn identity_and_reduction_maps() {
        let c4 = arc(cyclic(4).unwrap());
        let c2 = arc(cyclic(2).unwrap());
        let id = induced_algebra_map(&c4, &c4, &[0, 1, 2, 3], Field::R).unwrap();
        let a = AlgebraElement::from_real(&c4, Field::R, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(id.apply(&a).unwrap(), a);
        let red = induced_algebra_map(&c4, &c2, &[0, 1, 0, 1], Field::R).unwrap();
        assert_eq!(red.rank(), 2);
        assert_eq!(crate::linalg::numeric_rank(&crate::linalg::to_dmatrix(&red.matrix(), 4), 1e-12), 2);
        assert!(red.is_surjective());
        assert!(red.hopf_residuals(10, 1).max() < 1e-12);
        let t = arc(trivial());
        let counit = induced_algebra_map(&c4, &t, &[0; 4], Field::C).unwrap();
        assert_eq!(counit.rank(), 1);
        let ac = AlgebraElement::from_real(&c4, Field::C, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(counit.apply(&ac).unwrap().coeff(0), ac.counit());
        assert!(counit.apply(&a).is_err());
        assert!(matches!(
            induced_algebra_map(&c4, &c2, &[0, 1, 1, 0], Field::R),
            Err(Error::NotHomomorphism(_, _))
        ));
    }

    #[test]
    fn functoriality() {
        let c8 = arc(cyclic(8).unwrap());
        let c4 = arc(cyclic(4).unwrap());
        let c2 = arc(cyclic(2).unwrap());
        let f = induced_algebra_map(&c8, &c4, &(0..8).map(|x| x % 4).collect::<Vec<_>>(), Field::C).unwrap();
        let g = induced_algebra_map(&c4, &c2, &(0..4).map(|x| x % 2).collect::<Vec<_>>(), Field::C).unwrap();
        let gf = g.compose(&f).unwrap();
        for x in 0..8 {
            let d = AlgebraElement::basis(&c8, Field::C, x);
            assert_eq!(gf.apply(&d).unwrap(), g.apply(&f.apply(&d).unwrap()).unwrap());
            assert_eq!(gf.apply(&d).unwrap(), AlgebraElement::basis(&c2, Field::C, x % 2));
        }
    }

    #[test]
    fn subgroup_embeddings() {
        let s3 = arc(symmetric(3).unwrap());
        let perms = symmetric_elements(3);
        let c = perms.iter().position(|p| p[..] == [1, 2, 0]).unwrap();
        let three = vec![s3.identity(), c, s3.mul(c, c)];
        let r = subgroup_embedding_check(&s3, &three, Field::R, 2).unwrap();
        assert_eq!((r.rank, r.injective), (3, true));
        assert!(r.hopf_residuals.max() < 1e-12);
        let r = subgroup_embedding_check(&s3, &[s3.identity()], Field::C, 2).unwrap();
        assert_eq!(r.rank, 1);
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(subgroup_embedding_check(&s3, &all, Field::C, 2).unwrap().rank, 6);
        assert!(matches!(subgroup_embedding_check(&s3, &[s3.identity(), c], Field::R, 2), Err(Error::NotSubgroup(_))));
        let c4 = arc(cyclic(4).unwrap());
        assert!(subgroup_embedding_check(&c4, &[0, 2], Field::C, 2).unwrap().injective);
    }

    #[test]
    fn threads() {
        let t = Tower::cyclic_prime_power(2, 3).unwrap();
        let thread = |xs: [usize; 3]| {
            let entries: Vec<ThreadEntry> = xs.iter().map(|&x| ThreadEntry::Element(x)).collect();
            t.thread_from_entries(&entries, Field::R).unwrap()
        };
        assert_eq!(
            grouplike_thread_check(&t, &thread([0, 0, 0]), 1e-12).unwrap(),
            ThreadVerdict::ValidGroupElement { elements: vec![0, 0, 0] }
        );
        assert_eq!(grouplike_thread_check(&t, &thread([1, 3, 1]), 1e-12).unwrap(), ThreadVerdict::Broken { level: 1 });
        assert!(matches!(
            grouplike_thread_check(&t, &thread([1, 3, 3]), 1e-12).unwrap(),
            ThreadVerdict::ValidGroupElement { .. }
        ));
        let mut bad = thread([1, 3, 3]);
        bad[2] = AlgebraElement::from_real(&t.levels()[2], Field::R, &[0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(grouplike_thread_check(&t, &bad, 1e-12).unwrap(), ThreadVerdict::Broken { level: 2 });
    }

    #[test]
    fn tower_validation() {
        let c2 = arc(cyclic(2).unwrap());
        let c4 = arc(cyclic(4).unwrap());
        assert!(matches!(Tower::new(vec![c2.clone(), c4.clone()], vec![vec![0, 0, 0, 0]]), Err(Error::NotSurjective(0))));
        let json: TowerJson = serde_json::from_str(r#"{"levels": ["c2", "c4"], "maps": [[0, 1, 0, 1]]}"#).unwrap();
        assert_eq!(Tower::from_json(&json).unwrap().len(), 2);
        for k in 1..=4 {
            for p in [2, 3] {
                let t = Tower::cyclic_prime_power(p, k).unwrap();
                for j in 0..k - 1 {
                    let m = t.induced(j, Field::R).unwrap();
                    assert!(m.is_surjective());
                    assert!(m.hopf_residuals(3, 0).max() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pullbacks() {
        for p in [2, 3] {
            let t = Tower::cyclic_prime_power(p, 4).unwrap();
            for field in [Field::R, Field::C] {
                let levels = idempotent_pullback_check(&t, field, 1e-9).unwrap();
                assert_eq!(levels.len(), 3);
                for l in &levels {
                    // pulled-back blocks partition the blocks of the next level
                    let mut all: Vec<usize> = l.decompositions.iter().flatten().copied().collect();
                    all.sort();
                    all.dedup();
                    assert_eq!(all.len(), l.decompositions.iter().map(|d| d.len()).sum::<usize>());
                    assert!(l.decompositions.iter().all(|d| !d.is_empty()));
                }
            }
        }
    }
}
