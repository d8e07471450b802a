//! Finite groups given by multiplication tables.
//!
//! Elements are the dense indices `0..order`. Every constructor goes through
//! [`FiniteGroup::from_table`], so any `FiniteGroup` value has a validated
//! Latin-square, associative table with a located identity and inverses.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported group order.
pub const MAX_ORDER: usize = 4096;
/// Tables up to this order get the full triple associativity check; larger
/// ones use Light's test over a generating set.
pub const FULL_ASSOCIATIVITY_LIMIT: usize = 256;

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("identity", &self.identity)
            .finish()
    }
}

/// Serialized form: `{"order": n, "table": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    pub fn from_table(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty table".into()));
        }
        if n > MAX_ORDER {
            return Err(Error::UnsupportedParameter(format!(
                "order {n} exceeds {MAX_ORDER}"
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: r, len: row.len(), expected: n });
            }
            if let Some((c, &v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(Error::EntryOutOfRange { row: r, col: c, value: v, order: n });
            }
        }
        let table: Vec<usize> = rows.into_iter().flatten().collect();

        let mut seen = vec![false; n];
        for r in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for c in 0..n {
                let v = table[r * n + c];
                if seen[v] {
                    return Err(Error::NotLatinSquare(format!("row {r} repeats {v}")));
                }
                seen[v] = true;
            }
        }
        for c in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for r in 0..n {
                let v = table[r * n + c];
                if seen[v] {
                    return Err(Error::NotLatinSquare(format!("column {c} repeats {v}")));
                }
                seen[v] = true;
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e * n + g] == g && table[g * n + e] == g))
            .ok_or(Error::NoIdentity)?;

        let mut inverses = vec![0; n];
        for (g, inv) in inverses.iter_mut().enumerate() {
            // Latin square: exactly one h in row g with g*h = e.
            *inv = (0..n).find(|&h| table[g * n + h] == identity).ok_or(Error::NoIdentity)?;
        }

        let group = FiniteGroup { order: n, table, identity, inverses };
        if n <= FULL_ASSOCIATIVITY_LIMIT {
            group.check_associative_full()?;
        } else {
            group.check_associative_light()?;
        }
        for g in 0..n {
            let h = group.inverses[g];
            if group.mul(h, g) != identity {
                return Err(Error::NotLatinSquare(format!(
                    "right inverse of {g} is not a left inverse"
                )));
            }
        }
        Ok(group)
    }

    fn check_associative_full(&self) -> Result<()> {
        let n = self.order;
        for a in 0..n {
            for b in 0..n {
                let ab = self.mul(a, b);
                for c in 0..n {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(Error::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(())
    }

    // Light's test: associativity on (x, s, y) for s in a generating set.
    fn check_associative_light(&self) -> Result<()> {
        let n = self.order;
        let gens = self.generating_set();
        for &s in &gens {
            for x in 0..n {
                let xs = self.mul(x, s);
                for y in 0..n {
                    if self.mul(xs, y) != self.mul(x, self.mul(s, y)) {
                        return Err(Error::NotAssociative(x, s, y));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(json: &GroupJson) -> Result<Self> {
        if json.table.len() != json.order {
            return Err(Error::ShapeMismatch(format!(
                "declared order {} but table has {} rows",
                json.order,
                json.table.len()
            )));
        }
        Self::from_table(json.table.clone())
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson { order: self.order, table: self.rows() }
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inverses
    }

    pub fn conjugate(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(x, g), self.inv(x))
    }

    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        self.first_noncommuting_pair().is_none()
    }

    pub fn first_noncommuting_pair(&self) -> Option<(usize, usize)> {
        let n = self.order;
        (0..n)
            .flat_map(|g| (g + 1..n).map(move |h| (g, h)))
            .find(|&(g, h)| self.mul(g, h) != self.mul(h, g))
    }

    /// Closure of `gens` under multiplication (a subgroup, since the group is finite).
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order];
        inside[self.identity] = true;
        let mut elems = vec![self.identity];
        let mut i = 0;
        while i < elems.len() {
            let x = elems[i];
            for &s in gens {
                let y = self.mul(x, s);
                if !inside[y] {
                    inside[y] = true;
                    elems.push(y);
                }
            }
            i += 1;
        }
        elems.sort_unstable();
        elems
    }

    /// Greedy generating set: repeatedly adjoin the smallest element not yet generated.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut inside = vec![false; self.order];
        inside[self.identity] = true;
        let mut count = 1;
        while count < self.order {
            let g = (0..self.order).find(|&g| !inside[g]).expect("count < order");
            gens.push(g);
            let sub = self.generated_subgroup(&gens);
            inside.iter_mut().for_each(|b| *b = false);
            for &x in &sub {
                inside[x] = true;
            }
            count = sub.len();
        }
        gens
    }

    /// The isomorphic group whose element `perm[g]` plays the role of `g`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order;
        if perm.len() != n {
            return Err(Error::ShapeMismatch(format!("permutation of length {} for order {n}", perm.len())));
        }
        let mut rows = vec![vec![0; n]; n];
        for g in 0..n {
            for h in 0..n {
                rows[perm[g]][perm[h]] = perm[self.mul(g, h)];
            }
        }
        Self::from_table(rows)
    }

    /// Check that `map` (indexed by elements of `self`) is a homomorphism into `target`.
    pub fn check_homomorphism(&self, target: &FiniteGroup, map: &[usize]) -> Result<()> {
        if map.len() != self.order {
            return Err(Error::ShapeMismatch(format!(
                "map has {} entries for a group of order {}",
                map.len(),
                self.order
            )));
        }
        if let Some(&v) = map.iter().find(|&&v| v >= target.order) {
            return Err(Error::InvalidInput(format!("image {v} outside target of order {}", target.order)));
        }
        for g in 0..self.order {
            for h in 0..self.order {
                if map[self.mul(g, h)] != target.mul(map[g], map[h]) {
                    return Err(Error::NotHomomorphism(g, h));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Built-in groups

pub fn trivial() -> FiniteGroup {
    FiniteGroup::from_table(vec![vec![0]]).expect("trivial table")
}

pub fn cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::UnsupportedParameter(format!("cyclic({n})")));
    }
    FiniteGroup::from_table((0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect())
}

/// Dihedral group of order `2n`; element `k + n*f` is `r^k s^f`.
pub fn dihedral(n: usize) -> Result<FiniteGroup> {
    if n == 0 || 2 * n > MAX_ORDER {
        return Err(Error::UnsupportedParameter(format!("dihedral({n})")));
    }
    let idx = |k: usize, f: usize| k + n * f;
    let mut rows = vec![vec![0; 2 * n]; 2 * n];
    for f in 0..2 {
        for a in 0..n {
            for g in 0..2 {
                for b in 0..n {
                    // r^a s^f r^b s^g = r^(a + (-1)^f b) s^(f+g)
                    let k = if f == 0 { (a + b) % n } else { (a + n - b) % n };
                    rows[idx(a, f)][idx(b, g)] = idx(k, (f + g) % 2);
                }
            }
        }
    }
    FiniteGroup::from_table(rows)
}

/// Permutations of `0..n` in lexicographic order; the identity comes first.
pub fn symmetric_elements(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Symmetric group on `n <= 5` points; `(s*t)(x) = s(t(x))`, elements ordered as
/// in [`symmetric_elements`].
pub fn symmetric(n: usize) -> Result<FiniteGroup> {
    if n == 0 || n > 5 {
        return Err(Error::UnsupportedParameter(format!("symmetric({n}), need 1 <= n <= 5")));
    }
    let perms = symmetric_elements(n);
    let index: HashMap<&[usize], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let rows = perms
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|t| {
                    let st: Vec<usize> = t.iter().map(|&x| s[x]).collect();
                    index[st.as_slice()]
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(rows)
}

/// Quaternion group; indices 0..8 are 1, -1, i, -i, j, -j, k, -k.
pub fn quaternion8() -> FiniteGroup {
    // unit products on {1,i,j,k} as (sign, unit)
    const UNIT: [[(bool, usize); 4]; 4] = [
        [(false, 0), (false, 1), (false, 2), (false, 3)],
        [(false, 1), (true, 0), (false, 3), (true, 2)],
        [(false, 2), (true, 3), (true, 0), (false, 1)],
        [(false, 3), (false, 2), (true, 1), (true, 0)],
    ];
    let rows = (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (ua, na) = (a / 2, a % 2 == 1);
                    let (ub, nb) = (b / 2, b % 2 == 1);
                    let (neg, u) = UNIT[ua][ub];
                    2 * u + usize::from(neg ^ na ^ nb)
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(rows).expect("quaternion table")
}

/// `G x H` with `(g, h)` at index `g * |H| + h`.
pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<FiniteGroup> {
    let (m, n) = (g.order(), h.order());
    if m * n > MAX_ORDER {
        return Err(Error::UnsupportedParameter(format!("product order {} exceeds {MAX_ORDER}", m * n)));
    }
    let rows = (0..m * n)
        .map(|x| {
            (0..m * n)
                .map(|y| g.mul(x / n, y / n) * n + h.mul(x % n, y % n))
                .collect()
        })
        .collect();
    FiniteGroup::from_table(rows)
}

/// Parses builtin names: `trivial`, `cyclic(n)`/`cN`, `dihedral(n)`/`dN`,
/// `symmetric(n)`/`sN`, `quaternion8`/`q8`, and products joined by `*`.
pub fn builtin_group(name: &str) -> Result<FiniteGroup> {
    let name = name.trim();
    let name = name.strip_prefix("builtin:").unwrap_or(name);
    let mut factors = name.split('*').map(str::trim);
    let first = factors.next().filter(|s| !s.is_empty()).ok_or_else(|| {
        Error::UnsupportedParameter("empty builtin group name".into())
    })?;
    let mut group = builtin_factor(first)?;
    for f in factors {
        group = direct_product(&group, &builtin_factor(f)?)?;
    }
    Ok(group)
}

fn builtin_factor(name: &str) -> Result<FiniteGroup> {
    let lower = name.to_ascii_lowercase();
    let bad = || Error::UnsupportedParameter(format!("unknown builtin group {name:?}"));
    if lower == "trivial" {
        return Ok(trivial());
    }
    if lower == "quaternion8" || lower == "q8" {
        return Ok(quaternion8());
    }
    let (kind, arg) = if let Some(open) = lower.find('(') {
        let close = lower.strip_suffix(')').ok_or_else(bad)?;
        (&lower[..open], &close[open + 1..])
    } else {
        let split = lower.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?;
        (&lower[..split], &lower[split..])
    };
    let n: usize = arg.trim().parse().map_err(|_| bad())?;
    match kind {
        "cyclic" | "c" => cyclic(n),
        "dihedral" | "d" => dihedral(n),
        "symmetric" | "s" => symmetric(n),
        _ => Err(bad()),
    }
}

// ---------------------------------------------------------------------------
// Conjugacy classes

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugacyPartition {
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub class_sizes: Vec<usize>,
}

impl ConjugacyPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Index of the class containing the inverses of class `c`.
    pub fn inverse_class(&self, group: &FiniteGroup, c: usize) -> usize {
        self.class_of[group.inv(self.classes[c][0])]
    }
}

/// Conjugation orbits. Classes are ordered by their minimal element, so the
/// identity class comes first.
pub fn conjugacy_classes(group: &FiniteGroup) -> ConjugacyPartition {
    let n = group.order();
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    // the identity is the minimal element of its class only if it is 0; handle it first
    let mut order: Vec<usize> = vec![group.identity()];
    order.extend((0..n).filter(|&g| g != group.identity()));
    for g in order {
        if class_of[g] != usize::MAX {
            continue;
        }
        let idx = classes.len();
        let mut members: Vec<usize> = (0..n).map(|x| group.conjugate(x, g)).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            class_of[m] = idx;
        }
        classes.push(members);
    }
    // identity class first, the rest by minimal element
    classes[1..].sort_by_key(|c| c[0]);
    for (i, c) in classes.iter().enumerate() {
        for &m in c {
            class_of[m] = i;
        }
    }
    let class_sizes = classes.iter().map(Vec::len).collect();
    ConjugacyPartition { classes, class_of, class_sizes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_class_sizes(g: &FiniteGroup) -> Vec<usize> {
        let n = g.order();
        let mut sizes: Vec<usize> = (0..n)
            .map(|x| {
                let mut orbit: Vec<usize> = (0..n).map(|y| g.mul(g.mul(y, x), g.inv(y))).collect();
                orbit.sort_unstable();
                orbit.dedup();
                orbit
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|o| o.len())
            .collect();
        sizes.sort_unstable();
        sizes
    }

    #[test]
    fn trivial_group() {
        let g = FiniteGroup::from_table(vec![vec![0]]).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn order_two() {
        let g = FiniteGroup::from_table(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.inverses(), &[0, 1]);
    }

    #[test]
    fn identity_need_not_be_zero() {
        let g = FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g.identity(), 1);
        let p = conjugacy_classes(&g);
        assert_eq!(p.classes[0], vec![1]);
    }

    #[test]
    fn mutated_s3_is_not_associative() {
        let s3 = symmetric(3).unwrap();
        let mut rows = s3.rows();
        let n = rows.len();
        // swap the symbols of an intercalate avoiding the identity row/column;
        // the result is still a Latin square with identity 0
        let (r1, r2, c1, c2) = (1..n)
            .flat_map(|r1| (r1 + 1..n).map(move |r2| (r1, r2)))
            .flat_map(|(r1, r2)| {
                (1..n).flat_map(move |c1| (c1 + 1..n).map(move |c2| (r1, r2, c1, c2)))
            })
            .find(|&(r1, r2, c1, c2)| rows[r1][c1] == rows[r2][c2] && rows[r1][c2] == rows[r2][c1])
            .expect("S3 has an intercalate");
        let (a, b) = (rows[r1][c1], rows[r1][c2]);
        rows[r1][c1] = b;
        rows[r2][c2] = b;
        rows[r1][c2] = a;
        rows[r2][c1] = a;
        let expected = (0..n)
            .flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z))))
            .find(|&(x, y, z)| rows[rows[x][y]][z] != rows[x][rows[y][z]])
            .expect("mutation breaks associativity");
        let err = FiniteGroup::from_table(rows).unwrap_err();
        assert_eq!(err, Error::NotAssociative(expected.0, expected.1, expected.2));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            FiniteGroup::from_table(vec![vec![0, 1], vec![0, 1]]),
            Err(Error::NotLatinSquare(_))
        ));
        assert!(matches!(
            FiniteGroup::from_table(vec![vec![0, 1], vec![1]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            FiniteGroup::from_table(vec![vec![0, 2], vec![1, 0]]),
            Err(Error::EntryOutOfRange { .. })
        ));
        // Latin square without identity
        assert_eq!(
            FiniteGroup::from_table(vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 1, 2]]).map(|g| g.identity()),
            Ok(2)
        );
        assert_eq!(
            FiniteGroup::from_table(vec![vec![1, 0, 2], vec![0, 2, 1], vec![2, 1, 0]]).unwrap_err(),
            Error::NoIdentity
        );
    }

    #[test]
    fn builtin_orders() {
        assert_eq!(cyclic(4).unwrap().order(), 4);
        assert!(cyclic(4).unwrap().is_abelian());
        assert_eq!(dihedral(5).unwrap().order(), 10);
        assert_eq!(symmetric(4).unwrap().order(), 24);
        assert_eq!(symmetric(5).unwrap().order(), 120);
        assert_eq!(quaternion8().order(), 8);
        let p = direct_product(&cyclic(2).unwrap(), &symmetric(3).unwrap()).unwrap();
        assert_eq!(p.order(), 12);
        assert!(matches!(symmetric(6), Err(Error::UnsupportedParameter(_))));
        assert!(matches!(cyclic(0), Err(Error::UnsupportedParameter(_))));
        assert!(matches!(builtin_group("klein"), Err(Error::UnsupportedParameter(_))));
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_group("builtin:quaternion8").unwrap(), quaternion8());
        assert_eq!(builtin_group("c4").unwrap(), cyclic(4).unwrap());
        assert_eq!(builtin_group("cyclic(4)").unwrap(), cyclic(4).unwrap());
        assert_eq!(builtin_group("s3").unwrap(), symmetric(3).unwrap());
        assert_eq!(builtin_group("c2*c2").unwrap().order(), 4);
        assert_eq!(builtin_group("dihedral(4)*c3").unwrap().order(), 24);
    }

    #[test]
    fn quaternion_has_one_involution() {
        let q = quaternion8();
        let involutions = (0..8).filter(|&g| q.element_order(g) == 2).count();
        assert_eq!(involutions, 1);
        assert!(!q.is_abelian());
    }

    #[test]
    fn class_sizes_match_brute_force() {
        let s3 = symmetric(3).unwrap();
        let p = conjugacy_classes(&s3);
        assert_eq!(p.class_sizes, vec![1, 3, 2]);
        assert_eq!(p.len(), 3);
        let q = conjugacy_classes(&quaternion8());
        assert_eq!(q.class_sizes, vec![1, 1, 2, 2, 2]);
        for name in ["s4", "d5", "q8", "c3*s3", "d4"] {
            let g = builtin_group(name).unwrap();
            let mut ours = conjugacy_classes(&g).class_sizes;
            ours.sort_unstable();
            assert_eq!(ours, brute_class_sizes(&g), "{name}");
        }
    }

    #[test]
    fn abelian_classes_are_singletons() {
        for n in 1..10 {
            let p = conjugacy_classes(&cyclic(n).unwrap());
            assert_eq!(p.len(), n);
            assert!(p.class_sizes.iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn generating_set_generates() {
        for name in ["s4", "q8", "c2*c2*c2", "d6"] {
            let g = builtin_group(name).unwrap();
            assert_eq!(g.generated_subgroup(&g.generating_set()).len(), g.order());
        }
    }

    #[test]
    fn large_table_uses_light_test() {
        let g = direct_product(&cyclic(20).unwrap(), &cyclic(15).unwrap()).unwrap();
        assert_eq!(g.order(), 300);
        let s5c3 = direct_product(&symmetric(5).unwrap(), &cyclic(3).unwrap()).unwrap();
        assert_eq!(s5c3.order(), 360);
        assert_eq!(conjugacy_classes(&s5c3).len(), 21);
    }

    #[test]
    fn homomorphism_check() {
        let c4 = cyclic(4).unwrap();
        let c2 = cyclic(2).unwrap();
        assert!(c4.check_homomorphism(&c2, &[0, 1, 0, 1]).is_ok());
        assert!(matches!(c4.check_homomorphism(&c2, &[0, 1, 1, 0]), Err(Error::NotHomomorphism(..))));
    }
}
