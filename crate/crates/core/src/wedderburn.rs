//! Certified decomposition of `K[G]` into simple two-sided ideals, given by
//! central idempotents computed from the character table.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::character::{real_type_report, CharacterTable, DivisionRing};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::hopf::{AlgebraElement, Field};
use crate::linalg::{numeric_rank, to_dmatrix};
use crate::scalar::C64;

/// Up to this order the rank-based dimension counts are cross-checked by SVD.
const SVD_CROSSCHECK_LIMIT: usize = 256;

#[derive(Debug, Clone)]
pub struct WedderburnBlock {
    pub characters: Vec<usize>,
    pub degree: usize,
    pub division_ring: DivisionRing,
    pub idempotent: AlgebraElement,
    /// Dimension over `K` of `K[G] e`.
    pub block_dim: usize,
    /// Dimension over `K` of the center of `K[G] e`.
    pub center_dim: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertificateResiduals {
    pub idempotency: f64,
    pub orthogonality: f64,
    pub completeness: f64,
    pub centrality: f64,
    pub imaginary: f64,
    /// `|trace(x -> xe) - block_dim|`; the rank of an idempotent map is its trace.
    pub trace_rank: f64,
}

impl CertificateResiduals {
    pub fn max(&self) -> f64 {
        [self.idempotency, self.orthogonality, self.completeness, self.centrality, self.imaginary, self.trace_rank]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct WedderburnCertificate {
    pub field: Field,
    pub group_order: usize,
    pub blocks: Vec<WedderburnBlock>,
    pub residuals: CertificateResiduals,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CoeffsJson {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl CoeffsJson {
    pub fn of(a: &AlgebraElement) -> Self {
        match a.field() {
            Field::R => CoeffsJson::Real(a.coeffs().iter().map(|z| z.re).collect()),
            Field::C => CoeffsJson::Complex(a.coeffs().iter().map(|z| [z.re, z.im]).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockJson {
    pub characters: Vec<usize>,
    pub degree: usize,
    pub division_ring: DivisionRing,
    pub block_dim: usize,
    pub center_dim: usize,
    pub idempotent: CoeffsJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateJson {
    pub field: Field,
    pub group_order: usize,
    pub block_count: usize,
    pub block_dims: Vec<usize>,
    pub center_dims: Vec<usize>,
    pub division_rings: Vec<DivisionRing>,
    pub residuals: CertificateResiduals,
    pub tolerance: f64,
    pub blocks: Vec<BlockJson>,
}

impl WedderburnCertificate {
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.block_dim).collect()
    }

    pub fn center_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.center_dim).collect()
    }

    pub fn division_rings(&self) -> Vec<DivisionRing> {
        self.blocks.iter().map(|b| b.division_ring).collect()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            field: self.field,
            group_order: self.group_order,
            block_count: self.blocks.len(),
            block_dims: self.block_dims(),
            center_dims: self.center_dims(),
            division_rings: self.division_rings(),
            residuals: self.residuals.clone(),
            tolerance: self.tolerance,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    characters: b.characters.clone(),
                    degree: b.degree,
                    division_ring: b.division_ring,
                    block_dim: b.block_dim,
                    center_dim: b.center_dim,
                    idempotent: CoeffsJson::of(&b.idempotent),
                })
                .collect(),
        }
    }

    /// Residual of multiplicativity of `a -> (a e_i)_i` on random pairs.
    pub fn decomposition_multiplicativity(&self, pairs: usize, seed: u64) -> f64 {
        let group = self.blocks[0].idempotent.group();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let a = AlgebraElement::random(group, self.field, &mut rng);
            let b = AlgebraElement::random(group, self.field, &mut rng);
            let ab = a.multiply(&b).expect("same algebra");
            for block in &self.blocks {
                let e = &block.idempotent;
                let lhs = ab.multiply(e).expect("same algebra");
                let rhs = a.multiply(e).and_then(|x| x.multiply(&b.multiply(e)?)).expect("same algebra");
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }
}

/// `e_chi = (chi(1)/|G|) sum_g conj(chi(g)) delta_g`, as a complex vector.
fn character_idempotent(t: &CharacterTable, e: usize) -> Vec<C64> {
    let g = t.group();
    let n = g.order() as f64;
    let d = t.degrees()[e] as f64;
    (0..g.order()).map(|x| t.value(e, x).conj() * (d / n)).collect()
}

/// Matrix whose column `h` is the coefficient vector of `delta_h * e`.
fn right_multiplication_image(e: &AlgebraElement) -> Vec<Vec<C64>> {
    let n = e.coeffs().len();
    let mut rows = vec![vec![C64::new(0.0, 0.0); n]; n];
    for h in 0..n {
        let col = e.left_basis_mul(h);
        for (k, c) in col.coeffs().iter().enumerate() {
            rows[k][h] = *c;
        }
    }
    rows
}

/// Dimension of the center of `K[G] e` as the span of `C_k e` over the
/// class sums `C_k`, which span the center of `K[G]`.
fn center_dim_from_class_sums(t: &CharacterTable, e: &AlgebraElement, tol: f64) -> usize {
    let group = t.group();
    let n = group.order();
    let rows: Vec<Vec<C64>> = t
        .partition()
        .classes
        .iter()
        .map(|class| {
            let mut sum = vec![0.0; n];
            for &g in class {
                sum[g] = 1.0;
            }
            let k = AlgebraElement::from_real(group, e.field(), &sum).expect("length n");
            k.multiply(e).expect("same algebra").coeffs().to_vec()
        })
        .collect();
    numeric_rank(&to_dmatrix(&rows, n), tol)
}

/// Nullity of `x -> (xe - x, x g - g x for generators g)`, i.e. the
/// dimension of the commutant of `G` inside `K[G] e`.
fn center_dim_direct(group: &Arc<FiniteGroup>, e: &AlgebraElement, tol: f64) -> usize {
    let n = group.order();
    let gens = group.generating_set();
    let mut rows = Vec::with_capacity(n * (gens.len() + 1));
    let cols: Vec<AlgebraElement> = (0..n).map(|h| AlgebraElement::basis(group, e.field(), h)).collect();
    let mut push_map = |f: &dyn Fn(&AlgebraElement) -> AlgebraElement| {
        let images: Vec<AlgebraElement> = cols.iter().map(f).collect();
        for k in 0..n {
            rows.push(images.iter().map(|img| img.coeff(k)).collect::<Vec<C64>>());
        }
    };
    push_map(&|x| x.multiply(e).expect("same algebra").sub(x).expect("same algebra"));
    for &g in &gens {
        push_map(&|x| x.right_basis_mul(g).sub(&x.left_basis_mul(g)).expect("same algebra"));
    }
    n - numeric_rank(&to_dmatrix(&rows, n), tol)
}

pub fn central_idempotents(t: &CharacterTable, field: Field, tolerance: f64) -> Result<WedderburnCertificate> {
    let group = Arc::clone(t.group());
    let n = group.order();
    let rank_tol = tolerance.max(1e-12).sqrt() * 1e-3;

    // (characters, degree, ring, expected K-dim, expected center dim)
    let plan: Vec<(Vec<usize>, usize, DivisionRing, usize, usize)> = match field {
        Field::C => (0..t.len())
            .map(|e| {
                let d = t.degrees()[e];
                (vec![e], d, DivisionRing::C, d * d, 1)
            })
            .collect(),
        Field::R => real_type_report(t)?
            .blocks
            .into_iter()
            .map(|b| (b.characters, b.degree, b.division_ring, b.real_dim, b.center_dim))
            .collect(),
    };

    let mut residuals = CertificateResiduals::default();
    let mut blocks = Vec::with_capacity(plan.len());
    for (characters, degree, ring, expected_dim, expected_center) in plan {
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for &c in &characters {
            for (acc, v) in coeffs.iter_mut().zip(character_idempotent(t, c)) {
                *acc += v;
            }
        }
        if field == Field::R {
            let imag = coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            residuals.imaginary = residuals.imaginary.max(imag);
        }
        let idempotent = AlgebraElement::new(&group, field, coeffs, f64::INFINITY)?;

        let trace = n as f64 * idempotent.coeff(group.identity()).re;
        let block_dim = trace.round().max(0.0) as usize;
        residuals.trace_rank = residuals.trace_rank.max((trace - block_dim as f64).abs());
        if n <= SVD_CROSSCHECK_LIMIT {
            let svd_rank = numeric_rank(&to_dmatrix(&right_multiplication_image(&idempotent), n), rank_tol);
            if svd_rank != block_dim {
                return Err(Error::CertificationFailure {
                    what: format!("block rank of characters {characters:?}: trace {block_dim}, svd {svd_rank}"),
                    residual: (svd_rank as f64 - trace).abs(),
                });
            }
        }
        let center_dim = center_dim_from_class_sums(t, &idempotent, rank_tol);
        if n <= SVD_CROSSCHECK_LIMIT {
            let direct = center_dim_direct(&group, &idempotent, rank_tol);
            if direct != center_dim {
                return Err(Error::CertificationFailure {
                    what: format!("center dimension of characters {characters:?}: {center_dim} vs {direct}"),
                    residual: (direct as f64 - center_dim as f64).abs(),
                });
            }
        }
        if block_dim != expected_dim || center_dim != expected_center {
            return Err(Error::CertificationFailure {
                what: format!(
                    "characters {characters:?}: dims ({block_dim}, {center_dim}), expected ({expected_dim}, {expected_center})"
                ),
                residual: (block_dim as f64 - expected_dim as f64).abs()
                    + (center_dim as f64 - expected_center as f64).abs(),
            });
        }
        blocks.push(WedderburnBlock { characters, degree, division_ring: ring, idempotent, block_dim, center_dim });
    }

    let gens = group.generating_set();
    let mut total = AlgebraElement::zero(&group, field);
    for (i, b) in blocks.iter().enumerate() {
        let e = &b.idempotent;
        let sq = e.multiply(e)?;
        residuals.idempotency = residuals.idempotency.max(sq.max_abs_diff(e));
        for other in &blocks[i + 1..] {
            let p = e.multiply(&other.idempotent)?;
            let q = other.idempotent.multiply(e)?;
            let zero = AlgebraElement::zero(&group, field);
            residuals.orthogonality = residuals.orthogonality.max(p.max_abs_diff(&zero)).max(q.max_abs_diff(&zero));
        }
        for &g in &gens {
            residuals.centrality = residuals.centrality.max(e.right_basis_mul(g).max_abs_diff(&e.left_basis_mul(g)));
        }
        total = total.add(e)?;
    }
    residuals.completeness = total.max_abs_diff(&AlgebraElement::one(&group, field));

    let checks = [
        ("idempotency", residuals.idempotency),
        ("orthogonality", residuals.orthogonality),
        ("completeness", residuals.completeness),
        ("centrality", residuals.centrality),
        ("imaginary part", residuals.imaginary),
        ("trace rank", residuals.trace_rank),
    ];
    for (what, residual) in checks {
        if !(residual <= tolerance) {
            return Err(Error::CertificationFailure { what: what.into(), residual });
        }
    }
    let sum: usize = blocks.iter().map(|b| b.block_dim).sum();
    if sum != n {
        return Err(Error::CertificationFailure {
            what: format!("block dimensions sum to {sum}, not {n}"),
            residual: (sum as f64 - n as f64).abs(),
        });
    }
    Ok(WedderburnCertificate { field, group_order: n, blocks, residuals, tolerance })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityEntry {
    pub characters: Vec<usize>,
    pub division_ring: DivisionRing,
    /// `<rho_reg, chi_E> / <chi_E, chi_E>` for the character `chi_E` of the simple module.
    pub regular_multiplicity: f64,
    /// `dim_K E / dim_K L` with `L` the commuting division ring.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityReport {
    pub field: Field,
    pub entries: Vec<MultiplicityEntry>,
    pub max_residual: f64,
}

pub fn regular_multiplicity_check(t: &CharacterTable, field: Field, tolerance: f64) -> Result<MultiplicityReport> {
    let group = t.group();
    let n = group.order();
    let p = t.partition();
    // inner product over classes
    let inner = |a: &[C64], b: &[C64]| -> C64 {
        a.iter().zip(b).zip(&p.class_sizes).map(|((x, y), &s)| x * y.conj() * s as f64).sum::<C64>() / n as f64
    };
    let regular: Vec<C64> = (0..p.len())
        .map(|c| if c == p.class_of[group.identity()] { C64::new(n as f64, 0.0) } else { C64::new(0.0, 0.0) })
        .collect();

    // (characters, ring, module character, dim_K E, dim_K L)
    let modules: Vec<(Vec<usize>, DivisionRing, Vec<C64>, usize, usize)> = match field {
        Field::C => (0..t.len())
            .map(|e| (vec![e], DivisionRing::C, t.chars()[e].clone(), t.degrees()[e], 1))
            .collect(),
        Field::R => real_type_report(t)?
            .blocks
            .into_iter()
            .map(|b| {
                let first = &t.chars()[b.characters[0]];
                let (chi, dim_e): (Vec<C64>, usize) = match b.division_ring {
                    DivisionRing::R => (first.clone(), b.degree),
                    DivisionRing::C => {
                        let second = &t.chars()[b.characters[1]];
                        (first.iter().zip(second).map(|(x, y)| x + y).collect(), 2 * b.degree)
                    }
                    DivisionRing::H => (first.iter().map(|x| x * 2.0).collect(), 2 * b.degree),
                };
                let ring = b.division_ring;
                (b.characters, ring, chi, dim_e, ring.real_dim())
            })
            .collect(),
    };
    let mut entries = Vec::with_capacity(modules.len());
    let mut max_residual: f64 = 0.0;
    for (characters, ring, chi, dim_e, dim_l) in modules {
        let m = inner(&regular, &chi) / inner(&chi, &chi);
        let expected = dim_e as f64 / dim_l as f64;
        let residual = (m - C64::new(expected, 0.0)).norm();
        max_residual = max_residual.max(residual);
        if !(residual <= tolerance) {
            return Err(Error::MultiplicityMismatch { index: characters[0], regular: m.re, expected });
        }
        entries.push(MultiplicityEntry { characters, division_ring: ring, regular_multiplicity: m.re, expected });
    }
    Ok(MultiplicityReport { field, entries, max_residual })
}
