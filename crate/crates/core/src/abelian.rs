//! Finitely generated abelian groups `Z^r + Z/n_1 + ... + Z/n_k` in invariant
//! factor form, their elements, and the cyclic decomposition of a finite
//! abelian group given by a table.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::snf::{smith_normal_form, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FgAbelianGroup {
    rank: usize,
    torsion: Vec<u64>,
}

/// Either `{"rank": r, "torsion": [...]}` or `{"generators": g, "relations": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AbelianJson {
    Canonical { rank: usize, torsion: Vec<u64> },
    Presented { generators: usize, relations: Vec<Vec<i64>> },
}

impl FgAbelianGroup {
    /// Canonicalizes arbitrary cyclic orders, e.g. `[2, 3]` becomes `[6]`; orders of 1 vanish.
    pub fn new(rank: usize, cyclic_orders: &[u64]) -> Result<Self> {
        if cyclic_orders.contains(&0) {
            return Err(Error::InvalidInput("cyclic order 0; use the rank for free factors".into()));
        }
        let k = cyclic_orders.len();
        let rows: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { cyclic_orders[i] as i64 } else { 0 }).collect())
            .collect();
        let base = fg_abelian_from_relations(k, &rows)?;
        Ok(FgAbelianGroup { rank: rank + base.rank, torsion: base.torsion })
    }

    pub fn free(rank: usize) -> Self {
        FgAbelianGroup { rank, torsion: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(0, &[n])
    }

    pub fn from_json(json: &AbelianJson) -> Result<Self> {
        match json {
            AbelianJson::Canonical { rank, torsion } => Self::new(*rank, torsion),
            AbelianJson::Presented { generators, relations } => {
                fg_abelian_from_relations(*generators, relations)
            }
        }
    }

    pub fn to_json(&self) -> AbelianJson {
        AbelianJson::Canonical { rank: self.rank, torsion: self.torsion.clone() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Invariant factors `n_1 | n_2 | ...`, each at least 2.
    pub fn torsion(&self) -> &[u64] {
        &self.torsion
    }

    /// Torsion-free rank; the dimension of `Hom(G, R)`.
    pub fn torsion_free_rank(&self) -> usize {
        self.rank
    }

    /// `None` when the group is infinite.
    pub fn order(&self) -> Option<u64> {
        (self.rank == 0).then(|| self.torsion.iter().product())
    }

    pub fn zero(&self) -> DualCharacter {
        DualCharacter { free: vec![0; self.rank], torsion: vec![0; self.torsion.len()] }
    }

    pub fn element(&self, free: Vec<i64>, torsion: Vec<i64>) -> Result<DualCharacter> {
        if free.len() != self.rank || torsion.len() != self.torsion.len() {
            return Err(Error::ShapeMismatch(format!(
                "element with {} free and {} torsion coordinates for Z^{} + {:?}",
                free.len(),
                torsion.len(),
                self.rank,
                self.torsion
            )));
        }
        let torsion = torsion
            .iter()
            .zip(&self.torsion)
            .map(|(&t, &n)| t.rem_euclid(n as i64) as u64)
            .collect();
        Ok(DualCharacter { free, torsion })
    }

    pub fn conforms(&self, x: &DualCharacter) -> bool {
        x.free.len() == self.rank
            && x.torsion.len() == self.torsion.len()
            && x.torsion.iter().zip(&self.torsion).all(|(t, n)| t < n)
    }

    fn check(&self, x: &DualCharacter) -> Result<()> {
        if self.conforms(x) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("{x:?} does not belong to Z^{} + {:?}", self.rank, self.torsion)))
        }
    }

    pub fn neg(&self, x: &DualCharacter) -> Result<DualCharacter> {
        self.check(x)?;
        Ok(DualCharacter {
            free: x.free.iter().map(|v| -v).collect(),
            torsion: x.torsion.iter().zip(&self.torsion).map(|(&t, &n)| (n - t) % n).collect(),
        })
    }

    /// Every element, for finite groups only.
    pub fn elements(&self) -> Option<Vec<DualCharacter>> {
        let order = self.order()?;
        let mut out = Vec::with_capacity(order as usize);
        let mut cur = vec![0u64; self.torsion.len()];
        for _ in 0..order {
            out.push(DualCharacter { free: Vec::new(), torsion: cur.clone() });
            for (c, &n) in cur.iter_mut().zip(&self.torsion).rev() {
                *c += 1;
                if *c < n {
                    break;
                }
                *c = 0;
            }
        }
        Some(out)
    }
}

/// An element of a finitely generated abelian group; torsion entries are reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualCharacter {
    pub free: Vec<i64>,
    pub torsion: Vec<u64>,
}

pub fn dual_add(g: &FgAbelianGroup, a: &DualCharacter, b: &DualCharacter) -> Result<DualCharacter> {
    g.check(a)?;
    g.check(b)?;
    Ok(DualCharacter {
        free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
        torsion: a
            .torsion
            .iter()
            .zip(&b.torsion)
            .zip(&g.torsion)
            .map(|((x, y), n)| (x + y) % n)
            .collect(),
    })
}

/// Canonical form of `Z^generators / rowspan(relations)`.
pub fn fg_abelian_from_relations(generators: usize, relations: &[Vec<i64>]) -> Result<FgAbelianGroup> {
    if let Some(r) = relations.iter().find(|r| r.len() != generators) {
        return Err(Error::ShapeMismatch(format!(
            "relation of length {} for {generators} generators",
            r.len()
        )));
    }
    let snf = smith_normal_form(&IntMatrix::with_cols(relations, generators));
    let diag = snf.diagonal();
    let nonzero = diag.iter().filter(|d| !d.is_zero()).count();
    let torsion = diag
        .iter()
        .filter(|d| !d.is_zero() && !(*d == &BigInt::from(1)))
        .map(|d| {
            d.to_u64()
                .ok_or_else(|| Error::UnsupportedParameter(format!("invariant factor {d} exceeds u64")))
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(FgAbelianGroup { rank: generators - nonzero, torsion })
}

/// Cyclic decomposition of a finite abelian group: element `g` has
/// coordinates `coords[g]` in `Z/n_1 + ... + Z/n_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianDecomposition {
    pub structure: FgAbelianGroup,
    pub coords: Vec<Vec<u64>>,
}

impl AbelianDecomposition {
    pub fn element_of(&self, coords: &[u64]) -> Option<usize> {
        self.coords.iter().position(|c| c == coords)
    }
}

/// Builds the relation lattice of a generating set from the Cayley graph
/// (edge relations relative to a BFS spanning tree) and diagonalizes it.
pub fn decompose_finite_abelian(group: &FiniteGroup) -> Result<AbelianDecomposition> {
    if let Some((g, h)) = group.first_noncommuting_pair() {
        return Err(Error::NotAbelian(g, h));
    }
    let n = group.order();
    let gens = group.generating_set();
    let m = gens.len();
    let mut word: Vec<Option<Vec<i64>>> = vec![None; n];
    word[group.identity()] = Some(vec![0; m]);
    let mut queue = vec![group.identity()];
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i];
        for (k, &s) in gens.iter().enumerate() {
            let y = group.mul(x, s);
            if word[y].is_none() {
                let mut w = word[x].clone().expect("visited");
                w[k] += 1;
                word[y] = Some(w);
                queue.push(y);
            }
        }
        i += 1;
    }
    let word: Vec<Vec<i64>> = word.into_iter().map(|w| w.expect("generating set reaches every element")).collect();
    let mut relations = Vec::with_capacity(n * m);
    for x in 0..n {
        for (k, &s) in gens.iter().enumerate() {
            let y = group.mul(x, s);
            let rel: Vec<i64> =
                (0..m).map(|j| word[x][j] + i64::from(j == k) - word[y][j]).collect();
            if rel.iter().any(|&v| v != 0) {
                relations.push(rel);
            }
        }
    }
    let snf = smith_normal_form(&IntMatrix::with_cols(&relations, m));
    let diag = snf.diagonal();
    // columns with invariant factor 1 are trivial; a zero factor would mean an infinite group
    let mut factors = Vec::new();
    let mut keep = Vec::new();
    for (j, d) in diag.iter().enumerate() {
        if d.is_zero() {
            return Err(Error::InvalidInput("relation lattice is not of full rank".into()));
        }
        if d != &BigInt::from(1) {
            factors.push(d.to_u64().expect("divides the group order"));
            keep.push(j);
        }
    }
    // new coordinates y = x V
    let v = &snf.v;
    let coords = word
        .iter()
        .map(|w| {
            keep.iter()
                .zip(&factors)
                .map(|(&j, &n)| {
                    let mut acc = BigInt::zero();
                    for (k, &wk) in w.iter().enumerate() {
                        acc += BigInt::from(wk) * &v[(k, j)];
                    }
                    let r = acc % BigInt::from(n);
                    let r = if r.is_negative() { r + BigInt::from(n) } else { r };
                    r.to_u64().expect("reduced")
                })
                .collect()
        })
        .collect();
    Ok(AbelianDecomposition { structure: FgAbelianGroup { rank: 0, torsion: factors }, coords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{builtin_group, cyclic};

    #[test]
    fn examples_from_relations() {
        assert_eq!(fg_abelian_from_relations(1, &[]).unwrap(), FgAbelianGroup::free(1));
        let g = fg_abelian_from_relations(2, &[vec![2, 0]]).unwrap();
        assert_eq!((g.rank(), g.torsion()), (1, &[2u64][..]));
        let g = fg_abelian_from_relations(2, &[vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!((g.rank(), g.torsion()), (0, &[2u64, 2][..]));
        assert!(matches!(fg_abelian_from_relations(2, &[vec![1]]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn canonical_form() {
        assert_eq!(FgAbelianGroup::new(0, &[2, 3]).unwrap().torsion(), &[6]);
        assert_eq!(FgAbelianGroup::new(1, &[4, 6]).unwrap().torsion(), &[2, 12]);
        assert_eq!(FgAbelianGroup::new(0, &[1]).unwrap(), FgAbelianGroup::free(0));
        assert_eq!(FgAbelianGroup::new(2, &[3]).unwrap().torsion_free_rank(), 2);
    }

    #[test]
    fn addition() {
        let z4 = FgAbelianGroup::cyclic(4).unwrap();
        let a = z4.element(vec![], vec![3]).unwrap();
        let b = z4.element(vec![], vec![2]).unwrap();
        assert_eq!(dual_add(&z4, &a, &b).unwrap().torsion, vec![1]);
        assert_eq!(dual_add(&z4, &a, &z4.zero()).unwrap(), a);
        let z2 = FgAbelianGroup::free(2);
        let s = dual_add(&z2, &z2.element(vec![1, -2], vec![]).unwrap(), &z2.element(vec![3, 5], vec![]).unwrap());
        assert_eq!(s.unwrap().free, vec![4, 3]);
        assert!(matches!(dual_add(&z2, &a, &a), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn json_forms() {
        let a: AbelianJson = serde_json::from_str(r#"{"rank": 1, "torsion": []}"#).unwrap();
        assert_eq!(FgAbelianGroup::from_json(&a).unwrap(), FgAbelianGroup::free(1));
        let b: AbelianJson = serde_json::from_str(r#"{"generators": 2, "relations": [[2, 0]]}"#).unwrap();
        assert_eq!(FgAbelianGroup::from_json(&b).unwrap().torsion(), &[2]);
    }

    #[test]
    fn decomposes_tables() {
        for (name, factors) in [("c1", vec![]), ("c6", vec![6]), ("c2*c2", vec![2, 2]), ("c2*c3", vec![6]), ("c2*c4*c2", vec![2, 2, 4])] {
            let g = builtin_group(name).unwrap();
            let d = decompose_finite_abelian(&g).unwrap();
            assert_eq!(d.structure.torsion(), &factors[..], "{name}");
            // coordinates form an isomorphism
            for x in 0..g.order() {
                for y in 0..g.order() {
                    let sum: Vec<u64> = d.coords[x]
                        .iter()
                        .zip(&d.coords[y])
                        .zip(&factors)
                        .map(|((a, b), n)| (a + b) % n)
                        .collect();
                    assert_eq!(d.coords[g.mul(x, y)], sum);
                }
            }
        }
        assert!(matches!(decompose_finite_abelian(&builtin_group("s3").unwrap()), Err(Error::NotAbelian(..))));
        assert_eq!(decompose_finite_abelian(&cyclic(1).unwrap()).unwrap().coords, vec![Vec::<u64>::new()]);
    }
}
