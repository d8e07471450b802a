//! Independent cross-checks that avoid the character-table pipeline.
//!
//! The central idempotent oracle diagonalizes multiplication by a random
//! central element on the span of the class sums, so the primitive central
//! idempotents come out as eigenvectors. The division ring of a real block is
//! read off from the signature of the trace form `(x, y) -> tr(L_{xy})` on the
//! block: `m` for `M_m(R)`, zero for `M_m(C)`, `-2m` for `M_m(H)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::character::DivisionRing;
use crate::dft::DftBridge;
use crate::dual::{DualElement, Expr};
use crate::error::{Error, Result};
use crate::group::{conjugacy_classes, FiniteGroup};
use crate::hopf::{AlgebraElement, Field};
use crate::linalg::{null_space, subspace_distance};
use crate::scalar::C64;
use crate::wedderburn::WedderburnCertificate;

const SEPARATION: f64 = 1e-6;
const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Clone)]
pub struct OracleBlock {
    pub idempotent: AlgebraElement,
    pub block_dim: usize,
    pub center_dim: usize,
    pub division_ring: DivisionRing,
    /// Positive minus negative eigenvalues of the trace form on the block.
    pub signature: i64,
}

fn class_sum(group: &Arc<FiniteGroup>, class: &[usize]) -> AlgebraElement {
    let mut c = vec![0.0; group.order()];
    for &g in class {
        c[g] = 1.0;
    }
    AlgebraElement::from_real(group, Field::C, &c).expect("length n")
}

/// Right singular vector of `m` for its smallest singular value.
fn near_null_vector(m: DMatrix<C64>) -> DVector<C64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    v_t.row(i).adjoint()
}

fn trace_form_signature(group: &FiniteGroup, e: &AlgebraElement, tol: f64) -> i64 {
    let n = group.order();
    let gram = DMatrix::from_fn(n, n, |g, h| n as f64 * e.coeff(group.inv(group.mul(g, h))).re);
    let eig = gram.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    eig.eigenvalues.iter().map(|&x| if x > tol * scale { 1 } else if x < -tol * scale { -1 } else { 0 }).sum()
}

/// Primitive central idempotents of `K[G]`, found without characters.
pub fn central_idempotent_oracle(group: &Arc<FiniteGroup>, field: Field, seed: u64) -> Result<Vec<OracleBlock>> {
    let n = group.order();
    let part = conjugacy_classes(group);
    let k = part.len();
    let sums: Vec<AlgebraElement> = part.classes.iter().map(|c| class_sum(group, c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut z = AlgebraElement::zero(group, Field::C);
        for (w, s) in weights.iter().zip(&sums) {
            z = z.add(&s.scale_real(*w))?;
        }
        // column j: z C_j in class-sum coordinates
        let mut m = DMatrix::<f64>::zeros(k, k);
        for (j, s) in sums.iter().enumerate() {
            let p = z.multiply(s)?;
            for (i, class) in part.classes.iter().enumerate() {
                m[(i, j)] = p.coeff(class[0]).re;
            }
        }
        let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, 10_000) else { continue };
        let eigenvalues: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
        let gap = eigenvalues
            .iter()
            .enumerate()
            .flat_map(|(i, a)| eigenvalues[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        if gap < SEPARATION {
            continue;
        }
        let mc = m.map(|x| C64::new(x, 0.0));
        let mut blocks = Vec::new();
        for &lambda in &eigenvalues {
            let is_real = lambda.im.abs() <= SEPARATION;
            if field == Field::R && !is_real && lambda.im < 0.0 {
                continue;
            }
            let v = near_null_vector(&mc - DMatrix::<C64>::identity(k, k) * lambda);
            let mut coeffs = vec![C64::new(0.0, 0.0); n];
            for (i, class) in part.classes.iter().enumerate() {
                for &g in class {
                    coeffs[g] = v[i];
                }
            }
            let a = AlgebraElement::new(group, Field::C, coeffs, 0.0)?;
            let sq = a.multiply(&a)?;
            let j = (0..n).max_by(|&x, &y| a.coeff(x).norm().total_cmp(&a.coeff(y).norm())).expect("n > 0");
            let e = a.scale(C64::new(1.0, 0.0) * a.coeff(j) / sq.coeff(j))?;
            let (idempotent, center_dim) = match (field, is_real) {
                (Field::C, _) => (e, 1),
                (Field::R, true) => (AlgebraElement::new(group, Field::R, e.coeffs().to_vec(), 1e-8)?, 1),
                (Field::R, false) => {
                    let doubled: Vec<C64> = e.coeffs().iter().map(|c| C64::new(2.0 * c.re, 0.0)).collect();
                    (AlgebraElement::new(group, Field::R, doubled, 0.0)?, 2)
                }
            };
            let trace = n as f64 * idempotent.coeff(group.identity()).re;
            let block_dim = trace.round() as usize;
            if (trace - block_dim as f64).abs() > 1e-6 {
                return Err(Error::CertificationFailure { what: "oracle block trace".into(), residual: trace });
            }
            let (signature, division_ring) = match (field, center_dim) {
                (Field::C, _) => (0, DivisionRing::C),
                (Field::R, 2) => (trace_form_signature(group, &idempotent, 1e-9), DivisionRing::C),
                _ => {
                    let s = trace_form_signature(group, &idempotent, 1e-9);
                    (s, if s > 0 { DivisionRing::R } else { DivisionRing::H })
                }
            };
            blocks.push(OracleBlock { idempotent, block_dim, center_dim, division_ring, signature });
        }
        return Ok(blocks);
    }
    Err(Error::EigensolveDegenerate { attempts: MAX_ATTEMPTS })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    /// Every certificate block has an oracle block with the same idempotent,
    /// dimension, center dimension and division ring.
    pub matched: bool,
    pub idempotent_distance: f64,
}

pub fn compare_with_certificate(cert: &WedderburnCertificate, oracle: &[OracleBlock], tol: f64) -> OracleComparison {
    if cert.blocks.len() != oracle.len() {
        return OracleComparison { matched: false, idempotent_distance: f64::INFINITY };
    }
    let mut used = vec![false; oracle.len()];
    let mut worst: f64 = 0.0;
    let mut matched = true;
    for b in &cert.blocks {
        let best = (0..oracle.len())
            .filter(|&i| !used[i])
            .map(|i| (i, oracle[i].idempotent.max_abs_diff(&b.idempotent)))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let Some((i, d)) = best else {
            return OracleComparison { matched: false, idempotent_distance: f64::INFINITY };
        };
        used[i] = true;
        worst = worst.max(d);
        let o = &oracle[i];
        matched &= d <= tol
            && o.block_dim == b.block_dim
            && o.center_dim == b.center_dim
            && o.division_ring == b.division_ring;
    }
    OracleComparison { matched, idempotent_distance: worst }
}

/// Homomorphisms `Z/n -> C^x` are fixed by the image of 1, a root of
/// `z^n - 1`. The roots are found by Newton iteration from a ring of
/// starting points and counted once each.
pub fn cyclic_character_count(n: usize) -> usize {
    let one = C64::new(1.0, 0.0);
    let mut distinct: Vec<C64> = Vec::new();
    for k in 0..8 * n {
        let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / (8 * n) as f64;
        let mut z = C64::from_polar(1.5, angle);
        for _ in 0..200 {
            let zn1 = z.powu(n as u32 - 1);
            z -= (zn1 * z - one) / (zn1 * n as f64);
        }
        if (z.powu(n as u32) - one).norm() < 1e-9 && distinct.iter().all(|w| (w - z).norm() > SEPARATION) {
            distinct.push(z);
        }
    }
    distinct.len()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaFixedReport {
    pub group_order: usize,
    pub fixed_real_dim: usize,
    pub image_real_dim: usize,
    pub distance: f64,
}

/// Compares the real fixed space of `sigma` on `C^Ghat`, built by applying
/// the dual-model involution to point masses, with the DFT image of `R[G]`.
pub fn sigma_fixed_check(group: &Arc<FiniteGroup>) -> Result<SigmaFixedReport> {
    let bridge = DftBridge::new(group)?;
    let dual = Arc::new(bridge.dual().clone());
    let chars = bridge.characters();
    let n = chars.len();
    let as_real = |values: &[C64]| -> Vec<f64> { values.iter().flat_map(|z| [z.re, z.im]).collect() };
    // sigma - I as a real 2n x 2n matrix, by columns
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(2 * n);
    for chi in chars {
        for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let phi = DualElement::new(&dual, Expr::FiniteSupport(BTreeMap::from([(chi.clone(), unit)])))?;
            let s = phi.sigma();
            let values = chars.iter().map(|c| s.evaluate(c)).collect::<Result<Vec<C64>>>()?;
            let own = chars.iter().map(|c| phi.evaluate(c)).collect::<Result<Vec<C64>>>()?;
            let diff: Vec<C64> = values.iter().zip(&own).map(|(a, b)| a - b).collect();
            columns.push(as_real(&diff));
        }
    }
    let rows: Vec<Vec<f64>> = (0..2 * n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let fixed = null_space(&rows, 2 * n, 1e-10);
    let image: Vec<Vec<f64>> =
        (0..n).map(|g| as_real(&bridge.forward(&AlgebraElement::basis(group, Field::C, g)))).collect();
    let to_matrix = |vs: &[Vec<f64>]| DMatrix::from_fn(2 * n, vs.len(), |i, j| C64::new(vs[j][i], 0.0));
    let image_m = to_matrix(&image);
    let image_real_dim = crate::linalg::numeric_rank(&image_m, 1e-10);
    Ok(SigmaFixedReport {
        group_order: n,
        fixed_real_dim: fixed.len(),
        image_real_dim,
        distance: subspace_distance(&to_matrix(&fixed), &image_m, 1e-10),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::burnside_character_table;
    use crate::group::builtin_group;
    use crate::wedderburn::central_idempotents;

    fn g(name: &str) -> Arc<FiniteGroup> {
        Arc::new(builtin_group(name).unwrap())
    }

    #[test]
    fn quaternion_real_blocks() {
        let blocks = central_idempotent_oracle(&g("q8"), Field::R, 1).unwrap();
        let mut dims: Vec<(usize, usize, DivisionRing)> =
            blocks.iter().map(|b| (b.block_dim, b.center_dim, b.division_ring)).collect();
        dims.sort();
        assert_eq!(dims[4], (4, 1, DivisionRing::H));
        assert!(dims[..4].iter().all(|&d| d == (1, 1, DivisionRing::R)));
        let h = blocks.iter().find(|b| b.division_ring == DivisionRing::H).unwrap();
        // Re(x^2) = a^2 - b^2 - c^2 - d^2 on H
        assert_eq!(h.signature, -2);
    }

    #[test]
    fn matches_certificates() {
        for name in ["c4", "q8", "s3", "d4", "c3*c3", "s4"] {
            let group = g(name);
            let t = burnside_character_table(&group, 1e-9, 3).unwrap();
            for field in [Field::R, Field::C] {
                let cert = central_idempotents(&t, field, 1e-9).unwrap();
                let oracle = central_idempotent_oracle(&group, field, 7).unwrap();
                let cmp = compare_with_certificate(&cert, &oracle, 1e-9);
                assert!(cmp.matched, "{name} {field:?}: {cmp:?}");
            }
        }
    }

    #[test]
    fn real_dihedral_block_is_real() {
        // D4 has a two-dimensional real representation: M_2(R) with signature 2
        let blocks = central_idempotent_oracle(&g("d4"), Field::R, 2).unwrap();
        let big = blocks.iter().find(|b| b.block_dim == 4).unwrap();
        assert_eq!((big.division_ring, big.signature), (DivisionRing::R, 2));
        // C3 over R: R x C, and the C block has zero signature
        let blocks = central_idempotent_oracle(&g("c3"), Field::R, 2).unwrap();
        let c = blocks.iter().find(|b| b.center_dim == 2).unwrap();
        assert_eq!((c.block_dim, c.signature), (2, 0));
    }

    #[test]
    fn cyclic_counts() {
        for n in 1..=12 {
            assert_eq!(cyclic_character_count(n), n);
        }
    }

    #[test]
    fn sigma_fixed() {
        for name in ["c4", "c6", "c2*c2"] {
            let r = sigma_fixed_check(&g(name)).unwrap();
            assert_eq!(r.fixed_real_dim, r.group_order);
            assert_eq!(r.image_real_dim, r.group_order);
            assert!(r.distance < 1e-10, "{r:?}");
        }
    }
}
