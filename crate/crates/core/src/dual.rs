//! `C[G]` for a compact abelian group `G` with finitely generated dual,
//! modelled as the algebra of all functions `Ghat -> C`.
//!
//! Elements are expression DAGs. Leaves carry exact structure (homomorphisms
//! into `C^x` or `C`), so grouplike and primitive elements can be recognized
//! without sampling; anything else is tested on random characters.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abelian::{dual_add, DualCharacter, FgAbelianGroup};
use crate::error::{Error, Result};
use crate::scalar::C64;

pub const DEFAULT_WINDOW: i64 = 20;
pub const DEFAULT_TRIALS: usize = 200;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A homomorphism `Ghat -> C^x`: arbitrary nonzero values on the free
/// generators, `exp(2 pi i k / n)` on a torsion generator of order `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrouplikeData {
    pub free_values: Vec<C64>,
    pub torsion_indices: Vec<u64>,
}

impl GrouplikeData {
    pub fn new(dual: &FgAbelianGroup, free_values: Vec<C64>, torsion_indices: Vec<u64>) -> Result<Self> {
        if free_values.len() != dual.rank() || torsion_indices.len() != dual.torsion().len() {
            return Err(Error::ShapeMismatch(format!(
                "grouplike with {} free and {} torsion values on a dual of rank {} with {} torsion factors",
                free_values.len(),
                torsion_indices.len(),
                dual.rank(),
                dual.torsion().len()
            )));
        }
        if let Some(i) = free_values.iter().position(|z| *z == ZERO || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("free value {i} must be finite and nonzero")));
        }
        let torsion_indices = torsion_indices.iter().zip(dual.torsion()).map(|(k, n)| k % n).collect();
        Ok(GrouplikeData { free_values, torsion_indices })
    }

    pub fn identity(dual: &FgAbelianGroup) -> Self {
        GrouplikeData { free_values: vec![ONE; dual.rank()], torsion_indices: vec![0; dual.torsion().len()] }
    }

    pub fn evaluate(&self, dual: &FgAbelianGroup, chi: &DualCharacter) -> C64 {
        let free: C64 = self.free_values.iter().zip(&chi.free).map(|(z, &e)| int_pow(*z, e)).product();
        free * root_of_unity(&self.torsion_indices, &chi.torsion, dual.torsion())
    }

    pub fn multiply(&self, other: &Self, dual: &FgAbelianGroup) -> Self {
        GrouplikeData {
            free_values: self.free_values.iter().zip(&other.free_values).map(|(a, b)| a * b).collect(),
            torsion_indices: self
                .torsion_indices
                .iter()
                .zip(&other.torsion_indices)
                .zip(dual.torsion())
                .map(|((a, b), n)| (a + b) % n)
                .collect(),
        }
    }

    pub fn inverse(&self, dual: &FgAbelianGroup) -> Self {
        GrouplikeData {
            free_values: self.free_values.iter().map(|z| z.inv()).collect(),
            torsion_indices: self.torsion_indices.iter().zip(dual.torsion()).map(|(k, n)| (n - k) % n).collect(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        self.free_values.iter().all(|z| near_unit_modulus(*z))
    }
}

/// A homomorphism `Ghat -> (C, +)`; it necessarily vanishes on torsion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveData {
    pub free_values: Vec<C64>,
}

impl PrimitiveData {
    /// `torsion_values` must be identically zero.
    pub fn new(dual: &FgAbelianGroup, free_values: Vec<C64>, torsion_values: &[C64]) -> Result<Self> {
        if free_values.len() != dual.rank() {
            return Err(Error::ShapeMismatch(format!(
                "primitive with {} free values on a dual of rank {}",
                free_values.len(),
                dual.rank()
            )));
        }
        if !torsion_values.is_empty() && torsion_values.len() != dual.torsion().len() {
            return Err(Error::ShapeMismatch("torsion values do not match the torsion factors".into()));
        }
        if let Some(i) = torsion_values.iter().position(|z| *z != ZERO) {
            return Err(Error::InvalidInput(format!(
                "primitive value on torsion generator {i} must be 0: Z/n has no nonzero homomorphism to C"
            )));
        }
        Ok(PrimitiveData { free_values })
    }

    pub fn evaluate(&self, chi: &DualCharacter) -> C64 {
        self.free_values.iter().zip(&chi.free).map(|(c, &e)| c * e as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Grouplike(GrouplikeData),
    Primitive(PrimitiveData),
    FiniteSupport(BTreeMap<DualCharacter, C64>),
    Constant(C64),
    Sum(Vec<Arc<Expr>>),
    Product(Vec<Arc<Expr>>),
    Scale(C64, Arc<Expr>),
    Exp(Arc<Expr>),
    Sigma(Arc<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualElement {
    dual: Arc<FgAbelianGroup>,
    expr: Arc<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    StructurallyYes,
    ProbablyYes { residual: f64, trials: usize },
    No { chi1: DualCharacter, chi2: DualCharacter, residual: f64 },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        !matches!(self, Verdict::No { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarDecomposition {
    /// `ln |z_i|`, a point of `Hom(Ghat, R)`.
    pub lie_part: Vec<f64>,
    /// Unit-modulus factor, a point of `G = Hom(Ghat, S^1)`.
    pub group_part: GrouplikeData,
}

impl PolarDecomposition {
    pub fn reconstruct(&self) -> GrouplikeData {
        GrouplikeData {
            free_values: self.lie_part.iter().zip(&self.group_part.free_values).map(|(r, u)| u * r.exp()).collect(),
            torsion_indices: self.group_part.torsion_indices.clone(),
        }
    }
}

fn int_pow(z: C64, e: i64) -> C64 {
    let (mut base, mut k) = if e < 0 { (z.inv(), e.unsigned_abs()) } else { (z, e as u64) };
    let mut acc = ONE;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// `exp(2 pi i sum_j k_j c_j / n_j)`, reducing each term exactly first.
fn root_of_unity(indices: &[u64], chi: &[u64], orders: &[u64]) -> C64 {
    let turns: f64 = indices
        .iter()
        .zip(chi)
        .zip(orders)
        .map(|((&k, &c), &n)| ((k as u128 * c as u128) % n as u128) as f64 / n as f64)
        .sum();
    let turns = turns.fract();
    if turns == 0.0 {
        ONE
    } else {
        C64::from_polar(1.0, 2.0 * PI * turns)
    }
}

/// `| |z| - 1 |` at most a few ulps.
fn near_unit_modulus(z: C64) -> bool {
    (z.norm() - 1.0).abs() <= 4.0 * f64::EPSILON
}

pub fn polar_decompose(g: &GrouplikeData) -> PolarDecomposition {
    let mut lie_part = Vec::with_capacity(g.free_values.len());
    let mut unit = Vec::with_capacity(g.free_values.len());
    for &z in &g.free_values {
        if near_unit_modulus(z) {
            lie_part.push(0.0);
            unit.push(z);
        } else {
            let r = z.norm();
            lie_part.push(r.ln());
            unit.push(z / r);
        }
    }
    PolarDecomposition {
        lie_part,
        group_part: GrouplikeData { free_values: unit, torsion_indices: g.torsion_indices.clone() },
    }
}

/// `dim Hom(Ghat, R)`: the torsion-free rank.
pub fn hom_to_reals_dimension(dual: &FgAbelianGroup) -> usize {
    dual.rank()
}

/// All homomorphisms `Ghat -> C^x` for finite `Ghat`, as exact root-of-unity indices.
pub fn enumerate_torsion_grouplikes(dual: &FgAbelianGroup) -> Result<Vec<GrouplikeData>> {
    if dual.rank() > 0 {
        return Err(Error::UnsupportedParameter(format!(
            "dual of rank {} has a continuum of grouplikes",
            dual.rank()
        )));
    }
    let points = dual.elements().expect("finite");
    Ok(points
        .into_iter()
        .map(|p| GrouplikeData { free_values: Vec::new(), torsion_indices: p.torsion })
        .collect())
}

/// The character `chi -> exp(2 pi i <chi, g>)` of a point of `G`.
pub fn embed_group_point(dual: &Arc<FgAbelianGroup>, angles: &[f64], residues: &[u64]) -> Result<DualElement> {
    if angles.len() != dual.rank() || residues.len() != dual.torsion().len() {
        return Err(Error::ShapeMismatch("point coordinates do not match the dual".into()));
    }
    if let Some(t) = angles.iter().find(|t| !(0.0..1.0).contains(*t)) {
        return Err(Error::InvalidInput(format!("angle {t} outside [0, 1)")));
    }
    if let Some((k, n)) = residues.iter().zip(dual.torsion()).find(|(k, n)| k >= n) {
        return Err(Error::InvalidInput(format!("residue {k} not reduced mod {n}")));
    }
    let free = angles.iter().map(|&t| if t == 0.0 { ONE } else { C64::from_polar(1.0, 2.0 * PI * t) }).collect();
    Ok(DualElement::leaf(dual, Expr::Grouplike(GrouplikeData { free_values: free, torsion_indices: residues.to_vec() })))
}

pub fn random_character<R: Rng>(dual: &FgAbelianGroup, window: i64, rng: &mut R) -> DualCharacter {
    DualCharacter {
        free: (0..dual.rank()).map(|_| rng.gen_range(-window..=window)).collect(),
        torsion: dual.torsion().iter().map(|&n| rng.gen_range(0..n)).collect(),
    }
}

/// Probe characters: every element of a small finite dual, otherwise random
/// characters from the window.
pub fn probe_characters(dual: &FgAbelianGroup, count: usize, window: i64, seed: u64) -> Vec<DualCharacter> {
    if let Some(order) = dual.order() {
        if order as usize <= count {
            return dual.elements().expect("finite");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_character(dual, window, &mut rng)).collect()
}

fn relative_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

impl DualElement {
    fn leaf(dual: &Arc<FgAbelianGroup>, expr: Expr) -> Self {
        DualElement { dual: Arc::clone(dual), expr: Arc::new(expr) }
    }

    /// Checks shapes and normalizes.
    pub fn new(dual: &Arc<FgAbelianGroup>, expr: Expr) -> Result<Self> {
        check_shapes(dual, &expr)?;
        Ok(DualElement { dual: Arc::clone(dual), expr: Arc::new(normalize(dual, &expr)) })
    }

    pub fn grouplike(dual: &Arc<FgAbelianGroup>, data: GrouplikeData) -> Result<Self> {
        Self::new(dual, Expr::Grouplike(data))
    }

    pub fn primitive(dual: &Arc<FgAbelianGroup>, data: PrimitiveData) -> Result<Self> {
        Self::new(dual, Expr::Primitive(data))
    }

    pub fn constant(dual: &Arc<FgAbelianGroup>, c: C64) -> Self {
        Self::leaf(dual, Expr::Constant(c))
    }

    pub fn dual(&self) -> &Arc<FgAbelianGroup> {
        &self.dual
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    fn combine(&self, other: &Self, f: impl Fn(Vec<Arc<Expr>>) -> Expr) -> Result<Self> {
        if *self.dual != *other.dual {
            return Err(Error::ShapeMismatch("elements over different duals".into()));
        }
        let e = f(vec![Arc::clone(&self.expr), Arc::clone(&other.expr)]);
        Ok(DualElement { dual: Arc::clone(&self.dual), expr: Arc::new(normalize(&self.dual, &e)) })
    }

    fn wrap(&self, e: Expr) -> Self {
        DualElement { dual: Arc::clone(&self.dual), expr: Arc::new(normalize(&self.dual, &e)) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Expr::Sum)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, Expr::Product)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.wrap(Expr::Scale(c, Arc::clone(&self.expr)))
    }

    pub fn exp(&self) -> Self {
        self.wrap(Expr::Exp(Arc::clone(&self.expr)))
    }

    pub fn sigma(&self) -> Self {
        self.wrap(Expr::Sigma(Arc::clone(&self.expr)))
    }

    /// Inverse of a structurally grouplike element.
    pub fn grouplike_inverse(&self) -> Result<Self> {
        match &*self.expr {
            Expr::Grouplike(d) => Ok(Self::leaf(&self.dual, Expr::Grouplike(d.inverse(&self.dual)))),
            Expr::Constant(c) if *c == ONE => Ok(self.clone()),
            _ => Err(Error::InvalidInput("element is not structurally grouplike".into())),
        }
    }

    pub fn evaluate(&self, chi: &DualCharacter) -> Result<C64> {
        if !self.dual.conforms(chi) {
            return Err(Error::ShapeMismatch(format!("character {chi:?} does not conform to the dual")));
        }
        Ok(evaluate(&self.dual, &self.expr, chi))
    }

    /// `c(phi)(chi1, chi2) = phi(chi1 + chi2)`.
    pub fn comultiply_eval(&self, chi1: &DualCharacter, chi2: &DualCharacter) -> Result<C64> {
        let sum = dual_add(&self.dual, chi1, chi2)?;
        self.evaluate(&sum)
    }

    pub fn sigma_fixed_residual(&self, probes: &[DualCharacter]) -> Result<f64> {
        let s = self.sigma();
        probes.iter().try_fold(0.0f64, |acc, chi| Ok(acc.max((s.evaluate(chi)? - self.evaluate(chi)?).norm())))
    }

    pub fn is_grouplike(&self, trials: usize, tolerance: f64, seed: u64) -> Verdict {
        match &*self.expr {
            Expr::Grouplike(_) => return Verdict::StructurallyYes,
            Expr::Constant(c) if *c == ONE => return Verdict::StructurallyYes,
            _ => {}
        }
        let zero = self.dual.zero();
        let at_zero = evaluate(&self.dual, &self.expr, &zero);
        let r0 = (at_zero - ONE).norm();
        if r0 > tolerance {
            return Verdict::No { chi1: zero.clone(), chi2: zero, residual: r0 };
        }
        self.sample(trials, tolerance, seed, |a, b, ab| relative_gap(ab, a * b))
    }

    pub fn is_primitive(&self, trials: usize, tolerance: f64, seed: u64) -> Verdict {
        match &*self.expr {
            Expr::Primitive(_) => return Verdict::StructurallyYes,
            Expr::Constant(c) if *c == ZERO => return Verdict::StructurallyYes,
            _ => {}
        }
        let zero = self.dual.zero();
        let r0 = evaluate(&self.dual, &self.expr, &zero).norm();
        if r0 > tolerance {
            return Verdict::No { chi1: zero.clone(), chi2: zero, residual: r0 };
        }
        self.sample(trials, tolerance, seed, |a, b, ab| relative_gap(ab, a + b))
    }

    fn sample(&self, trials: usize, tolerance: f64, seed: u64, gap: impl Fn(C64, C64, C64) -> f64) -> Verdict {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..trials.max(1) {
            let c1 = random_character(&self.dual, DEFAULT_WINDOW, &mut rng);
            let c2 = random_character(&self.dual, DEFAULT_WINDOW, &mut rng);
            let c12 = dual_add(&self.dual, &c1, &c2).expect("conforming");
            let r = gap(
                evaluate(&self.dual, &self.expr, &c1),
                evaluate(&self.dual, &self.expr, &c2),
                evaluate(&self.dual, &self.expr, &c12),
            );
            if !(r <= tolerance) {
                return Verdict::No { chi1: c1, chi2: c2, residual: r };
            }
            worst = worst.max(r);
        }
        Verdict::ProbablyYes { residual: worst, trials: trials.max(1) }
    }
}

fn check_shapes(dual: &FgAbelianGroup, e: &Expr) -> Result<()> {
    match e {
        Expr::Grouplike(d) => {
            GrouplikeData::new(dual, d.free_values.clone(), d.torsion_indices.clone())?;
            if d.torsion_indices.iter().zip(dual.torsion()).any(|(k, n)| k >= n) {
                return Err(Error::InvalidInput("torsion index not reduced".into()));
            }
            Ok(())
        }
        Expr::Primitive(d) => PrimitiveData::new(dual, d.free_values.clone(), &[]).map(|_| ()),
        Expr::FiniteSupport(m) => match m.keys().find(|k| !dual.conforms(k)) {
            Some(k) => Err(Error::ShapeMismatch(format!("support point {k:?} does not conform"))),
            None => Ok(()),
        },
        Expr::Constant(_) => Ok(()),
        Expr::Sum(xs) | Expr::Product(xs) => xs.iter().try_for_each(|x| check_shapes(dual, x)),
        Expr::Scale(_, x) | Expr::Exp(x) | Expr::Sigma(x) => check_shapes(dual, x),
    }
}

fn evaluate(dual: &FgAbelianGroup, e: &Expr, chi: &DualCharacter) -> C64 {
    match e {
        Expr::Grouplike(d) => d.evaluate(dual, chi),
        Expr::Primitive(d) => d.evaluate(chi),
        Expr::FiniteSupport(m) => m.get(chi).copied().unwrap_or(ZERO),
        Expr::Constant(c) => *c,
        Expr::Sum(xs) => xs.iter().map(|x| evaluate(dual, x, chi)).sum(),
        Expr::Product(xs) => xs.iter().map(|x| evaluate(dual, x, chi)).product(),
        Expr::Scale(c, x) => c * evaluate(dual, x, chi),
        Expr::Exp(x) => evaluate(dual, x, chi).exp(),
        Expr::Sigma(x) => {
            let neg = dual.neg(chi).expect("conforming");
            evaluate(dual, x, &neg).conj()
        }
    }
}

fn exp_c(z: C64) -> C64 {
    if z.re == 0.0 {
        C64::from_polar(1.0, z.im)
    } else {
        z.exp()
    }
}

/// Structural rewriting: merges leaves of the same kind under sums and
/// products, maps `exp` of primitives to grouplikes, and pushes the
/// involution down to the leaves.
pub fn normalize(dual: &FgAbelianGroup, e: &Expr) -> Expr {
    match e {
        Expr::Grouplike(_) | Expr::Primitive(_) | Expr::Constant(_) => e.clone(),
        Expr::FiniteSupport(m) => {
            let m: BTreeMap<_, _> = m.iter().filter(|(_, v)| **v != ZERO).map(|(k, v)| (k.clone(), *v)).collect();
            if m.is_empty() {
                Expr::Constant(ZERO)
            } else {
                Expr::FiniteSupport(m)
            }
        }
        Expr::Sum(xs) => normalize_sum(dual, xs),
        Expr::Product(xs) => normalize_product(dual, xs),
        Expr::Scale(c, x) => normalize_scale(*c, normalize(dual, x)),
        Expr::Exp(x) => match normalize(dual, x) {
            Expr::Constant(c) => Expr::Constant(exp_c(c)),
            Expr::Primitive(d) => Expr::Grouplike(GrouplikeData {
                free_values: d.free_values.iter().map(|&c| exp_c(c)).collect(),
                torsion_indices: vec![0; dual.torsion().len()],
            }),
            Expr::Sum(parts) => {
                normalize_product(dual, &parts.into_iter().map(|p| Arc::new(Expr::Exp(p))).collect::<Vec<_>>())
            }
            other => Expr::Exp(Arc::new(other)),
        },
        Expr::Sigma(x) => {
            let pushed = push_sigma(dual, &normalize(dual, x));
            normalize(dual, &pushed)
        }
    }
}

fn push_sigma(dual: &FgAbelianGroup, e: &Expr) -> Expr {
    let rec = |x: &Arc<Expr>| Arc::new(push_sigma(dual, x));
    match e {
        Expr::Grouplike(d) => Expr::Grouplike(GrouplikeData {
            free_values: d.free_values.iter().map(|z| z.conj().inv()).collect(),
            torsion_indices: d.torsion_indices.clone(),
        }),
        Expr::Primitive(d) => {
            Expr::Primitive(PrimitiveData { free_values: d.free_values.iter().map(|c| -c.conj()).collect() })
        }
        Expr::FiniteSupport(m) => {
            Expr::FiniteSupport(m.iter().map(|(k, v)| (dual.neg(k).expect("conforming"), v.conj())).collect())
        }
        Expr::Constant(c) => Expr::Constant(c.conj()),
        Expr::Sum(xs) => Expr::Sum(xs.iter().map(rec).collect()),
        Expr::Product(xs) => Expr::Product(xs.iter().map(rec).collect()),
        Expr::Scale(c, x) => Expr::Scale(c.conj(), rec(x)),
        Expr::Exp(x) => Expr::Exp(rec(x)),
        Expr::Sigma(x) => (**x).clone(),
    }
}

fn normalize_scale(c: C64, x: Expr) -> Expr {
    if c == ZERO {
        return Expr::Constant(ZERO);
    }
    if c == ONE {
        return x;
    }
    match x {
        Expr::Constant(d) => Expr::Constant(c * d),
        Expr::Primitive(d) => Expr::Primitive(PrimitiveData { free_values: d.free_values.iter().map(|v| c * v).collect() }),
        Expr::FiniteSupport(m) => Expr::FiniteSupport(m.into_iter().map(|(k, v)| (k, c * v)).collect()),
        Expr::Scale(d, y) => normalize_scale(c * d, (*y).clone()),
        other => Expr::Scale(c, Arc::new(other)),
    }
}

fn normalize_sum(dual: &FgAbelianGroup, xs: &[Arc<Expr>]) -> Expr {
    let mut flat = Vec::new();
    for x in xs {
        match normalize(dual, x) {
            Expr::Sum(inner) => flat.extend(inner.iter().map(|y| (**y).clone())),
            other => flat.push(other),
        }
    }
    let mut primitive: Option<Vec<C64>> = None;
    let mut constant = ZERO;
    let mut support: BTreeMap<DualCharacter, C64> = BTreeMap::new();
    let mut rest = Vec::new();
    for x in flat {
        match x {
            Expr::Primitive(d) => {
                let acc = primitive.get_or_insert_with(|| vec![ZERO; d.free_values.len()]);
                acc.iter_mut().zip(&d.free_values).for_each(|(a, v)| *a += v);
            }
            Expr::Constant(c) => constant += c,
            Expr::FiniteSupport(m) => m.into_iter().for_each(|(k, v)| *support.entry(k).or_insert(ZERO) += v),
            other => rest.push(Arc::new(other)),
        }
    }
    if let Some(p) = primitive {
        rest.push(Arc::new(Expr::Primitive(PrimitiveData { free_values: p })));
    }
    support.retain(|_, v| *v != ZERO);
    if !support.is_empty() {
        rest.push(Arc::new(Expr::FiniteSupport(support)));
    }
    if constant != ZERO {
        rest.push(Arc::new(Expr::Constant(constant)));
    }
    match rest.len() {
        0 => Expr::Constant(ZERO),
        1 => (*rest[0]).clone(),
        _ => Expr::Sum(rest),
    }
}

fn normalize_product(dual: &FgAbelianGroup, xs: &[Arc<Expr>]) -> Expr {
    let mut flat = Vec::new();
    for x in xs {
        match normalize(dual, x) {
            Expr::Product(inner) => flat.extend(inner.iter().map(|y| (**y).clone())),
            other => flat.push(other),
        }
    }
    let mut grouplike: Option<GrouplikeData> = None;
    let mut constant = ONE;
    let mut rest = Vec::new();
    for x in flat {
        match x {
            Expr::Grouplike(d) => {
                grouplike = Some(match grouplike {
                    Some(g) => g.multiply(&d, dual),
                    None => d,
                })
            }
            Expr::Constant(c) => constant *= c,
            Expr::Scale(c, y) => {
                constant *= c;
                rest.push(y);
            }
            other => rest.push(Arc::new(other)),
        }
    }
    if constant == ZERO {
        return Expr::Constant(ZERO);
    }
    if let Some(g) = grouplike {
        rest.push(Arc::new(Expr::Grouplike(g)));
    }
    let body = match rest.len() {
        0 => Expr::Constant(ONE),
        1 => (*rest[0]).clone(),
        _ => Expr::Product(rest),
    };
    normalize_scale(constant, body)
}

/// A complex literal: a bare number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexLit {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexLit {
    pub fn value(self) -> C64 {
        match self {
            ComplexLit::Real(x) => C64::new(x, 0.0),
            ComplexLit::Pair([re, im]) => C64::new(re, im),
        }
    }

    pub fn of(z: C64) -> Self {
        if z.im == 0.0 {
            ComplexLit::Real(z.re)
        } else {
            ComplexLit::Pair([z.re, z.im])
        }
    }
}

/// JSON expression grammar, e.g.
/// `{"exp": {"primitive": {"free": [[0, 6.283185307179586]]}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprJson {
    Grouplike {
        #[serde(default)]
        free: Vec<ComplexLit>,
        #[serde(default)]
        torsion: Vec<u64>,
    },
    Primitive {
        #[serde(default)]
        free: Vec<ComplexLit>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        torsion: Vec<ComplexLit>,
    },
    Support(Vec<(DualCharacter, ComplexLit)>),
    Constant(ComplexLit),
    Sum(Vec<ExprJson>),
    Product(Vec<ExprJson>),
    Scale { by: ComplexLit, expr: Box<ExprJson> },
    Exp(Box<ExprJson>),
    Sigma(Box<ExprJson>),
}

impl ExprJson {
    pub fn to_expr(&self, dual: &FgAbelianGroup) -> Result<Expr> {
        let lits = |v: &[ComplexLit]| v.iter().map(|c| c.value()).collect::<Vec<_>>();
        Ok(match self {
            ExprJson::Grouplike { free, torsion } => {
                Expr::Grouplike(GrouplikeData::new(dual, lits(free), torsion.clone())?)
            }
            ExprJson::Primitive { free, torsion } => Expr::Primitive(PrimitiveData::new(dual, lits(free), &lits(torsion))?),
            ExprJson::Support(entries) => {
                let mut m = BTreeMap::new();
                for (k, v) in entries {
                    if !dual.conforms(k) {
                        return Err(Error::ShapeMismatch(format!("support point {k:?} does not conform")));
                    }
                    *m.entry(k.clone()).or_insert(ZERO) += v.value();
                }
                Expr::FiniteSupport(m)
            }
            ExprJson::Constant(c) => Expr::Constant(c.value()),
            ExprJson::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.to_expr(dual).map(Arc::new)).collect::<Result<_>>()?),
            ExprJson::Product(xs) => {
                Expr::Product(xs.iter().map(|x| x.to_expr(dual).map(Arc::new)).collect::<Result<_>>()?)
            }
            ExprJson::Scale { by, expr } => Expr::Scale(by.value(), Arc::new(expr.to_expr(dual)?)),
            ExprJson::Exp(x) => Expr::Exp(Arc::new(x.to_expr(dual)?)),
            ExprJson::Sigma(x) => Expr::Sigma(Arc::new(x.to_expr(dual)?)),
        })
    }

    pub fn from_expr(e: &Expr) -> Self {
        let lits = |v: &[C64]| v.iter().map(|&z| ComplexLit::of(z)).collect::<Vec<_>>();
        match e {
            Expr::Grouplike(d) => ExprJson::Grouplike { free: lits(&d.free_values), torsion: d.torsion_indices.clone() },
            Expr::Primitive(d) => ExprJson::Primitive { free: lits(&d.free_values), torsion: Vec::new() },
            Expr::FiniteSupport(m) => ExprJson::Support(m.iter().map(|(k, v)| (k.clone(), ComplexLit::of(*v))).collect()),
            Expr::Constant(c) => ExprJson::Constant(ComplexLit::of(*c)),
            Expr::Sum(xs) => ExprJson::Sum(xs.iter().map(|x| Self::from_expr(x)).collect()),
            Expr::Product(xs) => ExprJson::Product(xs.iter().map(|x| Self::from_expr(x)).collect()),
            Expr::Scale(c, x) => ExprJson::Scale { by: ComplexLit::of(*c), expr: Box::new(Self::from_expr(x)) },
            Expr::Exp(x) => ExprJson::Exp(Box::new(Self::from_expr(x))),
            Expr::Sigma(x) => ExprJson::Sigma(Box::new(Self::from_expr(x))),
        }
    }
}

impl DualElement {
    pub fn from_json(dual: &Arc<FgAbelianGroup>, json: &ExprJson) -> Result<Self> {
        Self::new(dual, json.to_expr(dual)?)
    }

    pub fn to_json(&self) -> ExprJson {
        ExprJson::from_expr(&self.expr)
    }
}
