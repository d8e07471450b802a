//! Complex character tables by the Burnside class-sum method, Frobenius-Schur
//! indicators, and the real division-ring type of each irreducible.
//!
//! The class sums `K_j` span the center of `C[G]`. In the orthonormal basis
//! `K_j / sqrt(|C_j|)` (for the trace inner product) left multiplication by
//! `K_j` has adjoint `K_{j*}`, the class of inverses, so
//!
//! `H = sum_j r_j (N_j + N_{j*}) + i sum_j t_j (N_j - N_{j*})`
//!
//! is Hermitian for real `r, t`. Its eigenvectors are the common
//! eigenvectors of all class matrices, i.e. the primitive central
//! idempotents, and a random choice of `r, t` separates them.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{conjugacy_classes, ConjugacyPartition, FiniteGroup, MAX_ORDER};
use crate::scalar::C64;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0x5eed_0f_6a11;
const MAX_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DivisionRing {
    R,
    C,
    H,
}

impl DivisionRing {
    pub fn real_dim(self) -> usize {
        match self {
            DivisionRing::R => 1,
            DivisionRing::C => 2,
            DivisionRing::H => 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TableResiduals {
    pub hermitian: f64,
    pub min_eigen_gap: f64,
    pub degree_rounding: f64,
    pub row_orthogonality: f64,
    pub column_orthogonality: f64,
}

#[derive(Debug, Clone)]
pub struct CharacterTable {
    group: Arc<FiniteGroup>,
    partition: ConjugacyPartition,
    chars: Vec<Vec<C64>>,
    degrees: Vec<usize>,
    tolerance_used: f64,
    residuals: TableResiduals,
    attempts: usize,
}

impl CharacterTable {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn partition(&self) -> &ConjugacyPartition {
        &self.partition
    }

    /// Row `e` holds the values of the `e`-th irreducible on each class.
    pub fn chars(&self) -> &[Vec<C64>] {
        &self.chars
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn tolerance_used(&self) -> f64 {
        self.tolerance_used
    }

    pub fn residuals(&self) -> &TableResiduals {
        &self.residuals
    }

    /// Number of random combinations tried before the eigenvalues separated.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// `chi_e(g)` for an element `g`.
    pub fn value(&self, e: usize, g: usize) -> C64 {
        self.chars[e][self.partition.class_of[g]]
    }

    pub fn to_report(&self) -> Result<CharacterReport> {
        let types = real_type_report(self)?;
        Ok(CharacterReport {
            degrees: self.degrees.clone(),
            classes: self.partition.classes.clone(),
            class_sizes: self.partition.class_sizes.clone(),
            chars: self.chars.iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect(),
            fs: types.entries.iter().map(|e| e.fs_indicator).collect(),
            types: types.entries.iter().map(|e| e.division_ring).collect(),
            residuals: self.residuals.clone(),
        })
    }
}

/// JSON form of a table together with its indicators.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterReport {
    pub degrees: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub class_sizes: Vec<usize>,
    pub chars: Vec<Vec<[f64; 2]>>,
    pub fs: Vec<i8>,
    pub types: Vec<DivisionRing>,
    pub residuals: TableResiduals,
}

/// `a[j][i][l]`: number of pairs `(x, y)` in `C_j x C_i` with `xy` equal to
/// the fixed representative of `C_l`.
pub fn class_structure_constants(group: &FiniteGroup, p: &ConjugacyPartition) -> Vec<Vec<Vec<u64>>> {
    let k = p.len();
    let mut a = vec![vec![vec![0u64; k]; k]; k];
    let reps: Vec<usize> = p.classes.iter().map(|c| c[0]).collect();
    for x in 0..group.order() {
        for y in 0..group.order() {
            let z = group.mul(x, y);
            let cz = p.class_of[z];
            if reps[cz] == z {
                a[p.class_of[x]][p.class_of[y]][cz] += 1;
            }
        }
    }
    a
}

pub fn burnside_character_table(
    group: &Arc<FiniteGroup>,
    tolerance: f64,
    seed: u64,
) -> Result<CharacterTable> {
    if !(tolerance > 0.0 && tolerance <= 1e-4) {
        return Err(Error::InvalidInput(format!("tolerance {tolerance} outside (0, 1e-4]")));
    }
    if group.order() > MAX_ORDER {
        return Err(Error::UnsupportedParameter(format!("order {}", group.order())));
    }
    let partition = conjugacy_classes(group);
    let k = partition.len();
    let n = group.order() as f64;
    let sizes: Vec<f64> = partition.class_sizes.iter().map(|&s| s as f64).collect();
    let sqrt_sizes: Vec<f64> = sizes.iter().map(|s| s.sqrt()).collect();
    let inv_class: Vec<usize> = (0..k).map(|j| partition.inverse_class(group, j)).collect();
    let a = class_structure_constants(group, &partition);

    // N_j in the orthonormal basis
    let normal: Vec<DMatrix<f64>> = (0..k)
        .map(|j| {
            DMatrix::from_fn(k, k, |l, i| a[j][i][l] as f64 * sqrt_sizes[l] / sqrt_sizes[i])
        })
        .collect();

    let mut residuals = TableResiduals::default();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut h = DMatrix::<C64>::zeros(k, k);
        for j in 0..k {
            let r: f64 = rng.gen_range(-1.0..1.0);
            let t: f64 = rng.gen_range(-1.0..1.0);
            let sym = &normal[j] + &normal[inv_class[j]];
            let anti = &normal[j] - &normal[inv_class[j]];
            h += sym.map(|x| C64::new(r * x, 0.0)) + anti.map(|x| C64::new(0.0, t * x));
        }
        residuals.hermitian = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if residuals.hermitian > 1e3 * f64::EPSILON * scale * k as f64 {
            return Err(Error::OrthogonalityFailure(residuals.hermitian));
        }
        let eig = h.symmetric_eigen();
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        let gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        residuals.min_eigen_gap = if k > 1 { gap } else { 0.0 };
        if k > 1 && gap < 1e-6 * scale {
            continue;
        }

        let mut rows = Vec::with_capacity(k);
        let mut worst_degree = 0.0f64;
        for col in 0..k {
            let v = eig.eigenvectors.column(col);
            // central character omega(K_j) by Rayleigh quotients
            let omega: Vec<C64> = (0..k)
                .map(|j| {
                    let nj = normal[j].map(|x| C64::new(x, 0.0));
                    (v.adjoint() * (nj * v))[(0, 0)]
                })
                .collect();
            let ratio: Vec<C64> = omega.iter().zip(&sizes).map(|(w, s)| w / s).collect();
            let norm: f64 = ratio.iter().zip(&sizes).map(|(t, s)| s * t.norm_sqr()).sum();
            let degree_exact = (n / norm).sqrt();
            let degree = degree_exact.round();
            worst_degree = worst_degree.max((degree_exact - degree).abs());
            let row: Vec<C64> = ratio.iter().map(|t| t * degree).collect();
            rows.push((degree as usize, row));
        }
        residuals.degree_rounding = worst_degree;
        if worst_degree > tolerance {
            return Err(Error::OrthogonalityFailure(worst_degree));
        }

        rows.sort_by(|(da, ra), (db, rb)| {
            da.cmp(db).then_with(|| sort_key(ra).cmp(&sort_key(rb)))
        });
        let degrees: Vec<usize> = rows.iter().map(|(d, _)| *d).collect();
        let chars: Vec<Vec<C64>> = rows.into_iter().map(|(_, r)| r).collect();

        let mut table = CharacterTable {
            group: Arc::clone(group),
            partition,
            chars,
            degrees,
            tolerance_used: tolerance,
            residuals,
            attempts: attempt + 1,
        };
        verify_orthogonality(&mut table)?;
        return Ok(table);
    }
    Err(Error::EigensolveDegenerate { attempts: MAX_ATTEMPTS })
}

fn sort_key(row: &[C64]) -> Vec<(i64, i64)> {
    const GRID: f64 = 1e6;
    row.iter()
        .map(|z| (-(z.re * GRID).round() as i64, -(z.im * GRID).round() as i64))
        .collect()
}

fn verify_orthogonality(t: &mut CharacterTable) -> Result<()> {
    let n = t.group.order() as f64;
    let sizes: Vec<f64> = t.partition.class_sizes.iter().map(|&s| s as f64).collect();
    let k = t.len();
    let mut row_res = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            let ip: C64 = (0..k).map(|c| t.chars[a][c] * t.chars[b][c].conj() * sizes[c]).sum::<C64>() / n;
            let target = if a == b { 1.0 } else { 0.0 };
            row_res = row_res.max((ip - target).norm());
        }
    }
    let mut col_res = 0.0f64;
    for c in 0..k {
        for d in 0..k {
            let ip: C64 = (0..k).map(|e| t.chars[e][c] * t.chars[e][d].conj()).sum::<C64>()
                * (sizes[c] * sizes[d]).sqrt()
                / n;
            let target = if c == d { 1.0 } else { 0.0 };
            col_res = col_res.max((ip - target).norm());
        }
    }
    t.residuals.row_orthogonality = row_res;
    t.residuals.column_orthogonality = col_res;
    let sum_sq: usize = t.degrees.iter().map(|d| d * d).sum();
    if sum_sq != t.group.order() {
        return Err(Error::OrthogonalityFailure(
            (sum_sq as f64 - n).abs(),
        ));
    }
    let first_trivial = t.chars[0].iter().all(|z| (z - C64::new(1.0, 0.0)).norm() <= t.tolerance_used);
    if !first_trivial {
        return Err(Error::OrthogonalityFailure(1.0));
    }
    let worst = row_res.max(col_res);
    if worst > t.tolerance_used {
        return Err(Error::OrthogonalityFailure(worst));
    }
    Ok(())
}

/// Value of the Frobenius-Schur sum `(1/|G|) sum_g chi(g^2)` before rounding.
pub fn fs_value(t: &CharacterTable, e: usize) -> C64 {
    let g = &t.group;
    let total: C64 = (0..g.order()).map(|x| t.value(e, g.mul(x, x))).sum();
    total / g.order() as f64
}

pub fn fs_indicator(t: &CharacterTable, e: usize) -> Result<i8> {
    fs_indicator_with_residual(t, e).map(|(v, _)| v)
}

pub fn fs_indicator_with_residual(t: &CharacterTable, e: usize) -> Result<(i8, f64)> {
    if e >= t.len() {
        return Err(Error::InvalidInput(format!("character index {e} out of range")));
    }
    let v = fs_value(t, e);
    let rounded = v.re.round().clamp(-1.0, 1.0);
    let residual = (v - C64::new(rounded, 0.0)).norm();
    if residual >= 10.0 * t.tolerance_used {
        return Err(Error::IndicatorAmbiguous(v.re));
    }
    Ok((rounded as i8, residual))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealTypeEntry {
    pub fs_indicator: i8,
    pub fs_residual: f64,
    pub division_ring: DivisionRing,
    /// Real dimension of the simple block of `R[G]` this character belongs to.
    pub real_block_dim: usize,
    pub paired_with: Option<usize>,
}

/// A simple factor of `R[G]`: one real character, or a conjugate pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealBlock {
    pub characters: Vec<usize>,
    pub division_ring: DivisionRing,
    pub degree: usize,
    pub real_dim: usize,
    pub center_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealTypeReport {
    pub entries: Vec<RealTypeEntry>,
    pub blocks: Vec<RealBlock>,
}

impl RealTypeReport {
    pub fn total_real_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.real_dim).sum()
    }
}

pub fn real_type_report(t: &CharacterTable) -> Result<RealTypeReport> {
    let k = t.len();
    let match_tol = 1e3 * t.tolerance_used.max(1e-12);
    let conj_row = |i: usize| -> Option<usize> {
        (0..k).find(|&j| {
            t.chars[i].iter().zip(&t.chars[j]).all(|(a, b)| (a.conj() - b).norm() <= match_tol)
        })
    };
    let mut entries = Vec::with_capacity(k);
    for e in 0..k {
        let (fs, fs_residual) = fs_indicator_with_residual(t, e)?;
        let conj = conj_row(e).ok_or(Error::PairingFailure(e))?;
        let d = t.degrees[e];
        let (ring, paired_with, dim) = match fs {
            1 => (DivisionRing::R, None, d * d),
            -1 => (DivisionRing::H, None, d * d),
            _ => (DivisionRing::C, Some(conj), 2 * d * d),
        };
        // real characters are self-conjugate exactly when fs != 0
        if (fs == 0) == (conj == e) {
            return Err(Error::PairingFailure(e));
        }
        entries.push(RealTypeEntry {
            fs_indicator: fs,
            fs_residual,
            division_ring: ring,
            real_block_dim: dim,
            paired_with,
        });
    }
    for (e, entry) in entries.iter().enumerate() {
        if let Some(j) = entry.paired_with {
            if entries[j].paired_with != Some(e) {
                return Err(Error::PairingFailure(e));
            }
        }
    }
    // blocks ordered by degree, then R < C < H, then first character
    let mut blocks: Vec<RealBlock> = entries
        .iter()
        .enumerate()
        .filter(|(e, entry)| entry.paired_with.map_or(true, |j| j > *e))
        .map(|(e, entry)| RealBlock {
            characters: entry.paired_with.map_or(vec![e], |j| vec![e, j]),
            division_ring: entry.division_ring,
            degree: t.degrees[e],
            real_dim: entry.real_block_dim,
            center_dim: if entry.division_ring == DivisionRing::C { 2 } else { 1 },
        })
        .collect();
    blocks.sort_by_key(|b| (b.degree, b.division_ring, b.characters[0]));
    Ok(RealTypeReport { entries, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{builtin_group, cyclic, quaternion8, symmetric};
    use std::f64::consts::PI;

    fn table(g: FiniteGroup) -> CharacterTable {
        burnside_character_table(&Arc::new(g), DEFAULT_TOLERANCE, DEFAULT_SEED).unwrap()
    }

    // one-dimensional characters of a cyclic group solved directly: chi(1) is a root of unity
    #[test]
    fn cyclic_three() {
        let t = table(cyclic(3).unwrap());
        assert_eq!(t.degrees(), &[1, 1, 1]);
        let mut expected: Vec<Vec<C64>> = (0..3)
            .map(|j| (0..3).map(|m| C64::from_polar(1.0, 2.0 * PI * (j * m) as f64 / 3.0)).collect())
            .collect();
        for row in t.chars() {
            let pos = expected
                .iter()
                .position(|e| e.iter().zip(row).all(|(a, b)| (a - b).norm() < 1e-12))
                .expect("row is a homomorphism Z/3 -> C^x");
            expected.remove(pos);
        }
        assert!(expected.is_empty());
        assert!(t.chars()[0].iter().all(|z| (z - 1.0).norm() < 1e-12));
    }

    #[test]
    fn degrees() {
        assert_eq!(table(symmetric(3).unwrap()).degrees(), &[1, 1, 2]);
        assert_eq!(table(quaternion8()).degrees(), &[1, 1, 1, 1, 2]);
        assert_eq!(table(symmetric(4).unwrap()).degrees(), &[1, 1, 2, 3, 3]);
        assert_eq!(table(builtin_group("d5").unwrap()).degrees(), &[1, 1, 2, 2]);
        assert_eq!(table(crate::group::trivial()).degrees(), &[1]);
    }

    // regular representation oracle: sum over irreducibles of d^2 equals |G| and
    // the number of irreducibles equals the number of classes
    #[test]
    fn regular_representation_counts() {
        for name in ["s3", "q8", "d4", "d6", "c2*s3", "s4"] {
            let g = builtin_group(name).unwrap();
            let classes = conjugacy_classes(&g).len();
            let t = table(g.clone());
            assert_eq!(t.len(), classes);
            assert_eq!(t.degrees().iter().map(|d| d * d).sum::<usize>(), g.order());
        }
    }

    #[test]
    fn orthogonality_residuals_are_small() {
        for name in ["s4", "q8*c3", "d6", "c12"] {
            let t = table(builtin_group(name).unwrap());
            assert!(t.residuals().row_orthogonality < 1e-10, "{name}");
            assert!(t.residuals().column_orthogonality < 1e-10, "{name}");
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let g = Arc::new(cyclic(2).unwrap());
        assert!(burnside_character_table(&g, 0.0, 1).is_err());
        assert!(burnside_character_table(&g, 1e-3, 1).is_err());
    }

    #[test]
    fn indicators() {
        let c4 = table(cyclic(4).unwrap());
        // characters of order 4 send the generator to +-i
        let order_four: Vec<usize> = (0..4)
            .filter(|&e| c4.chars()[e].iter().any(|z| z.im.abs() > 0.5))
            .collect();
        assert_eq!(order_four.len(), 2);
        for &e in &order_four {
            // sum_m i^{2m} / 4 = 0
            let direct: C64 = (0..4).map(|m| C64::new(0.0, 1.0).powu(2 * m)).sum::<C64>() / 4.0;
            assert!(direct.norm() < 1e-12);
            assert_eq!(fs_indicator(&c4, e).unwrap(), 0);
        }
        let q = table(quaternion8());
        assert_eq!(fs_indicator(&q, 0).unwrap(), 1);
        // brute force over the eight squares: 1 and -1 square to 1, the rest to -1
        let two_dim = q.degrees().iter().position(|&d| d == 2).unwrap();
        let brute: C64 = (0..8).map(|x| q.value(two_dim, q.group().mul(x, x))).sum::<C64>() / 8.0;
        assert!((brute + 1.0).norm() < 1e-10);
        assert_eq!(fs_indicator(&q, two_dim).unwrap(), -1);
    }

    #[test]
    fn real_types() {
        let r = real_type_report(&table(cyclic(4).unwrap())).unwrap();
        let dims: Vec<usize> = r.blocks.iter().map(|b| b.real_dim).collect();
        assert_eq!(dims, vec![1, 1, 2]);
        assert_eq!(r.blocks[2].division_ring, DivisionRing::C);
        assert_eq!(r.blocks[2].characters.len(), 2);

        let r = real_type_report(&table(quaternion8())).unwrap();
        let rings: Vec<DivisionRing> = r.blocks.iter().map(|b| b.division_ring).collect();
        assert_eq!(rings, vec![DivisionRing::R, DivisionRing::R, DivisionRing::R, DivisionRing::R, DivisionRing::H]);
        assert_eq!(r.total_real_dim(), 8);

        let r = real_type_report(&table(symmetric(3).unwrap())).unwrap();
        assert!(r.blocks.iter().all(|b| b.division_ring == DivisionRing::R));
        assert_eq!(r.blocks.iter().map(|b| b.real_dim).collect::<Vec<_>>(), vec![1, 1, 4]);
    }

    #[test]
    fn real_dimension_identity() {
        for name in ["c5", "c12", "q8*c3", "d5", "s4", "c3*c3", "q8*q8"] {
            let g = builtin_group(name).unwrap();
            let r = real_type_report(&table(g.clone())).unwrap();
            assert_eq!(r.total_real_dim(), g.order(), "{name}");
        }
    }

    #[test]
    fn product_table_is_outer_product() {
        let g = builtin_group("c3").unwrap();
        let h = builtin_group("s3").unwrap();
        let tg = table(g.clone());
        let th = table(h.clone());
        let tp = table(builtin_group("c3*s3").unwrap());
        let nh = h.order();
        // every product row restricted to elements (x, y) factors as chi(x) psi(y)
        let mut remaining: Vec<(usize, usize)> =
            (0..tg.len()).flat_map(|a| (0..th.len()).map(move |b| (a, b))).collect();
        for e in 0..tp.len() {
            let pos = remaining
                .iter()
                .position(|&(a, b)| {
                    (0..g.order() * nh).all(|z| {
                        let lhs = tp.value(e, z);
                        let rhs = tg.value(a, z / nh) * th.value(b, z % nh);
                        (lhs - rhs).norm() < 1e-9
                    })
                })
                .expect("row factors");
            remaining.remove(pos);
        }
        assert!(remaining.is_empty());
    }

    #[test]
    fn degree_one_real_characters_have_indicator_one() {
        for name in ["d4", "s4", "c2*c2*c2", "d5"] {
            let t = table(builtin_group(name).unwrap());
            for e in 0..t.len() {
                let real = t.chars()[e].iter().all(|z| z.im.abs() < 1e-9);
                if t.degrees()[e] == 1 && real {
                    assert_eq!(fs_indicator(&t, e).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn seed_does_not_change_table() {
        let g = Arc::new(symmetric(4).unwrap());
        let a = burnside_character_table(&g, DEFAULT_TOLERANCE, 1).unwrap();
        let b = burnside_character_table(&g, DEFAULT_TOLERANCE, 99).unwrap();
        for (ra, rb) in a.chars().iter().zip(b.chars()) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }
}
