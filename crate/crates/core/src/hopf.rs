//! The group Hopf algebra `K[G]` of a finite group over `K = R` or `C`.
//!
//! Elements are dense coefficient vectors indexed by group elements. Real
//! elements are stored as complex numbers whose imaginary parts are exactly
//! zero; constructors strip imaginary residuals only after checking them.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::null_space;
use crate::scalar::{Scalar, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    R,
    C,
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "R" | "r" | "real" => Ok(Field::R),
            "C" | "c" | "complex" => Ok(Field::C),
            other => Err(Error::InvalidInput(format!("unknown field {other:?}, expected R or C"))),
        }
    }
}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[derive(Debug, Clone)]
pub struct AlgebraElement {
    group: Arc<FiniteGroup>,
    field: Field,
    coeffs: Vec<C64>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs && same_group(&self.group, &other.group)
    }
}

impl AlgebraElement {
    pub fn zero(group: &Arc<FiniteGroup>, field: Field) -> Self {
        AlgebraElement { group: Arc::clone(group), field, coeffs: vec![C64::new(0.0, 0.0); group.order()] }
    }

    pub fn basis(group: &Arc<FiniteGroup>, field: Field, g: usize) -> Self {
        let mut e = Self::zero(group, field);
        e.coeffs[g] = C64::new(1.0, 0.0);
        e
    }

    pub fn one(group: &Arc<FiniteGroup>, field: Field) -> Self {
        Self::basis(group, field, group.identity())
    }

    pub fn from_real(group: &Arc<FiniteGroup>, field: Field, coeffs: &[f64]) -> Result<Self> {
        Self::new(group, field, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect(), 0.0)
    }

    /// For `Field::R`, imaginary parts up to `imag_tol` are discarded; larger ones are an error.
    pub fn new(group: &Arc<FiniteGroup>, field: Field, mut coeffs: Vec<C64>, imag_tol: f64) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                group.order()
            )));
        }
        if field == Field::R {
            let worst = coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if worst > imag_tol {
                return Err(Error::ShapeMismatch(format!("real element with imaginary part {worst:e}")));
            }
            coeffs.iter_mut().for_each(|z| z.im = 0.0);
        }
        Ok(AlgebraElement { group: Arc::clone(group), field, coeffs })
    }

    pub fn random<R: Rng>(group: &Arc<FiniteGroup>, field: Field, rng: &mut R) -> Self {
        let coeffs = (0..group.order())
            .map(|_| {
                let re = rng.gen_range(-1.0..1.0);
                let im = if field == Field::C { rng.gen_range(-1.0..1.0) } else { 0.0 };
                C64::new(re, im)
            })
            .collect();
        AlgebraElement { group: Arc::clone(group), field, coeffs }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, g: usize) -> C64 {
        self.coeffs[g]
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ShapeMismatch(format!("fields {:?} and {:?}", self.field, other.field)));
        }
        if !same_group(&self.group, &other.group) {
            return Err(Error::ShapeMismatch("elements of different group algebras".into()));
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<C64>) -> Self {
        AlgebraElement { group: Arc::clone(&self.group), field: self.field, coeffs }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|a| a * s).collect())
    }

    /// Complex scaling; a non-real scalar on a real element is an error.
    pub fn scale(&self, s: C64) -> Result<Self> {
        if self.field == Field::R && s.im != 0.0 {
            return Err(Error::ShapeMismatch("non-real scalar on a real element".into()));
        }
        Ok(self.with_coeffs(self.coeffs.iter().map(|a| a * s).collect()))
    }

    /// Convolution product `(ab)[k] = sum_{gh = k} a[g] b[h]`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let n = self.group.order();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (g, a) in self.coeffs.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            for (h, b) in other.coeffs.iter().enumerate() {
                out[self.group.mul(g, h)] += a * b;
            }
        }
        Ok(self.with_coeffs(out))
    }

    /// `delta_g * self`, a permutation of coefficients.
    pub fn left_basis_mul(&self, g: usize) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for (h, c) in self.coeffs.iter().enumerate() {
            out[self.group.mul(g, h)] = *c;
        }
        self.with_coeffs(out)
    }

    /// `self * delta_g`.
    pub fn right_basis_mul(&self, g: usize) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for (h, c) in self.coeffs.iter().enumerate() {
            out[self.group.mul(h, g)] = *c;
        }
        self.with_coeffs(out)
    }

    pub fn comultiply(&self) -> TensorElement {
        let n = self.group.order();
        let mut t = TensorElement::zero(&self.group, self.field);
        for g in 0..n {
            t.coeffs[g * n + g] = self.coeffs[g];
        }
        t
    }

    pub fn counit(&self) -> C64 {
        self.coeffs.iter().sum()
    }

    pub fn antipode(&self) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for (g, c) in self.coeffs.iter().enumerate() {
            out[self.group.inv(g)] = *c;
        }
        self.with_coeffs(out)
    }

    /// l1 norm; submultiplicative for the convolution product.
    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Exponential series with scaling and squaring; terms are summed until
    /// `|term| < tolerance * (1 + |sum|)`.
    pub fn exp(&self, tolerance: f64) -> Self {
        let norm = self.norm1();
        let squarings = if norm > 1.0 { norm.log2().ceil() as u32 } else { 0 };
        let scaled = self.scale_real(0.5f64.powi(squarings as i32));
        let one = Self::one(&self.group, self.field);
        let mut sum = one.clone();
        let mut term = one;
        for k in 1..200 {
            term = term.multiply(&scaled).expect("same algebra").scale_real(1.0 / k as f64);
            sum = sum.add(&term).expect("same algebra");
            if term.norm1() < tolerance * (1.0 + sum.norm1()) {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.multiply(&sum).expect("same algebra");
        }
        sum
    }
}

/// Element of `K[G] (x) K[G]`: coefficient of `g (x) h` at `g * |G| + h`.
#[derive(Debug, Clone)]
pub struct TensorElement {
    group: Arc<FiniteGroup>,
    field: Field,
    coeffs: Vec<C64>,
}

impl TensorElement {
    pub fn zero(group: &Arc<FiniteGroup>, field: Field) -> Self {
        let n = group.order();
        TensorElement { group: Arc::clone(group), field, coeffs: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn outer(a: &AlgebraElement, b: &AlgebraElement) -> Result<Self> {
        a.compatible(b)?;
        let mut t = Self::zero(&a.group, a.field);
        let n = a.group.order();
        for g in 0..n {
            for h in 0..n {
                t.coeffs[g * n + h] = a.coeffs[g] * b.coeffs[h];
            }
        }
        Ok(t)
    }

    pub fn coeff(&self, g: usize, h: usize) -> C64 {
        self.coeffs[g * self.group.order() + h]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `(a (x) b)(c (x) d) = ac (x) bd`.
    pub fn multiply(&self, other: &Self) -> Self {
        let n = self.group.order();
        let mut out = Self::zero(&self.group, self.field);
        for (i, x) in self.coeffs.iter().enumerate() {
            if *x == C64::new(0.0, 0.0) {
                continue;
            }
            let (g1, h1) = (i / n, i % n);
            for (j, y) in other.coeffs.iter().enumerate() {
                let (g2, h2) = (j / n, j % n);
                out.coeffs[self.group.mul(g1, g2) * n + self.group.mul(h1, h2)] += x * y;
            }
        }
        out
    }

    /// `m o (f (x) id)`, i.e. `sum T[g][h] f(delta_g) delta_h`.
    pub fn multiply_out_with(&self, f: impl Fn(&AlgebraElement) -> AlgebraElement) -> AlgebraElement {
        let n = self.group.order();
        let mut out = AlgebraElement::zero(&self.group, self.field);
        for g in 0..n {
            let left = f(&AlgebraElement::basis(&self.group, self.field, g));
            for h in 0..n {
                let c = self.coeff(g, h);
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let term = left.right_basis_mul(h);
                for (o, t) in out.coeffs.iter_mut().zip(&term.coeffs) {
                    *o += c * t;
                }
            }
        }
        out
    }

    /// `m o (id (x) f)`.
    pub fn multiply_out_with_right(&self, f: impl Fn(&AlgebraElement) -> AlgebraElement) -> AlgebraElement {
        let n = self.group.order();
        let mut out = AlgebraElement::zero(&self.group, self.field);
        for h in 0..n {
            let right = f(&AlgebraElement::basis(&self.group, self.field, h));
            for g in 0..n {
                let c = self.coeff(g, h);
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let term = right.left_basis_mul(g);
                for (o, t) in out.coeffs.iter_mut().zip(&term.coeffs) {
                    *o += c * t;
                }
            }
        }
        out
    }
}

/// Residuals of the Hopf algebra axioms evaluated on one element.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HopfResiduals {
    pub coassociativity: f64,
    pub counit: f64,
    pub antipode: f64,
}

impl HopfResiduals {
    pub fn max(&self) -> f64 {
        self.coassociativity.max(self.counit).max(self.antipode)
    }
}

/// Checks coassociativity, the counit law and the antipode law on `a`, using
/// the comultiplication of basis vectors rather than the diagonal shortcut.
pub fn hopf_axiom_residuals(a: &AlgebraElement) -> HopfResiduals {
    let group = &a.group;
    let n = group.order();
    let field = a.field;
    let ca = a.comultiply();
    let basis_co: Vec<TensorElement> =
        (0..n).map(|g| AlgebraElement::basis(group, field, g).comultiply()).collect();

    // (c (x) id) c(a) and (id (x) c) c(a) as dense 3-tensors
    let mut left = vec![C64::new(0.0, 0.0); n * n * n];
    let mut right = vec![C64::new(0.0, 0.0); n * n * n];
    for g in 0..n {
        for h in 0..n {
            let c = ca.coeff(g, h);
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for x in 0..n {
                for y in 0..n {
                    left[(x * n + y) * n + h] += c * basis_co[g].coeff(x, y);
                    right[(g * n + x) * n + y] += c * basis_co[h].coeff(x, y);
                }
            }
        }
    }
    let coassociativity = left.iter().zip(&right).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);

    // (eps (x) id) c(a) = a = (id (x) eps) c(a)
    let mut eps_left = vec![C64::new(0.0, 0.0); n];
    let mut eps_right = vec![C64::new(0.0, 0.0); n];
    for g in 0..n {
        for h in 0..n {
            let c = ca.coeff(g, h);
            eps_left[h] += c * AlgebraElement::basis(group, field, g).counit();
            eps_right[g] += c * AlgebraElement::basis(group, field, h).counit();
        }
    }
    let counit = a
        .coeffs
        .iter()
        .zip(eps_left.iter().zip(&eps_right))
        .map(|(x, (l, r))| (x - l).norm().max((x - r).norm()))
        .fold(0.0, f64::max);

    // m (S (x) id) c(a) = eps(a) 1 = m (id (x) S) c(a)
    let unit = AlgebraElement::one(group, field).scale(a.counit()).expect("counit is real for real a");
    let s_left = ca.multiply_out_with(AlgebraElement::antipode);
    let s_right = ca.multiply_out_with_right(AlgebraElement::antipode);
    let antipode = s_left.max_abs_diff(&unit).max(s_right.max_abs_diff(&unit));

    HopfResiduals { coassociativity, counit, antipode }
}

/// Solves `c(a) = a (x) a`, `counit(a) = 1` coefficientwise. The diagonal
/// equations give `a_g^2 = a_g`, the off-diagonal ones `a_g a_h = 0`, and the
/// counit `sum a_g = 1`; the search below branches over the roots of the
/// diagonal equations and prunes with the others.
pub fn enumerate_grouplike(group: &Arc<FiniteGroup>, field: Field) -> Vec<AlgebraElement> {
    let n = group.order();
    let mut solutions = Vec::new();
    let mut assignment: Vec<f64> = Vec::with_capacity(n);
    search_grouplike(n, &mut assignment, &mut solutions);
    solutions
        .into_iter()
        .map(|coeffs| AlgebraElement::from_real(group, field, &coeffs).expect("length n"))
        .filter(|a| {
            // every candidate must satisfy the defining equations exactly
            let co = a.comultiply();
            let sq = TensorElement::outer(a, a).expect("same algebra");
            co.coeffs == sq.coeffs && a.counit() == C64::new(1.0, 0.0)
        })
        .collect()
}

fn search_grouplike(n: usize, assignment: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    if assignment.len() == n {
        if assignment.iter().sum::<f64>() == 1.0 {
            out.push(assignment.clone());
        }
        return;
    }
    let support = assignment.iter().filter(|&&x| x != 0.0).count();
    // roots of x^2 = x
    for root in [1.0, 0.0] {
        // a_g a_h = 0 for g != h
        if root != 0.0 && support > 0 {
            continue;
        }
        // the counit equation can no longer be met
        if root == 0.0 && support == 0 && assignment.len() + 1 == n {
            continue;
        }
        assignment.push(root);
        search_grouplike(n, assignment, out);
        assignment.pop();
    }
}

/// Basis of `{a : c(a) = a (x) 1 + 1 (x) a}`, solved exactly over the rationals.
pub fn primitive_space(group: &Arc<FiniteGroup>, field: Field) -> Vec<AlgebraElement> {
    use num_rational::BigRational;
    let n = group.order();
    let e = group.identity();
    // equation (g, h): [g = h] a_g - [h = e] a_g - [g = e] a_h = 0; only rows
    // with g = h, g = e or h = e are nontrivial
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|g| (g, g)).collect();
    pairs.extend((0..n).filter(|&g| g != e).flat_map(|g| [(g, e), (e, g)]));
    let rows: Vec<Vec<BigRational>> = pairs
        .iter()
        .map(|&(g, h)| {
            let mut row = vec![BigRational::from_i64(0); n];
            if g == h {
                row[g] = row[g].clone() + BigRational::from_i64(1);
            }
            if h == e {
                row[g] = row[g].clone() - BigRational::from_i64(1);
            }
            if g == e {
                row[h] = row[h].clone() - BigRational::from_i64(1);
            }
            row
        })
        .collect();
    null_space(&rows, n, 0.0)
        .into_iter()
        .map(|v| {
            let coeffs: Vec<f64> = v.iter().map(|q| q.to_c64().re).collect();
            AlgebraElement::from_real(group, field, &coeffs).expect("length n")
        })
        .collect()
}
