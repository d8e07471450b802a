//! Degree-truncated enveloping algebras `U(L)` of finite-dimensional Lie algebras.
//!
//! Elements are written in the symmetrized PBW basis: the label `m` (a
//! nondecreasing index list) stands for the average of all arrangements of
//! the word `x_{m_1} ... x_{m_k}`. Symmetrization is a coalgebra isomorphism
//! `S(L) -> U(L)`, so the comultiplication is degree preserving in this basis
//! and powers of Lie elements are homogeneous. Products are computed by
//! straightening words into ordered PBW form with the bracket and converting
//! back, then discarding degrees above the cutoff.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abelian::FgAbelianGroup;
use crate::dual::{embed_group_point, probe_characters, DualElement, Expr, PrimitiveData, Verdict};
use crate::error::{Error, Result};
use crate::hopf::Field;
use crate::linalg::null_space;
use crate::scalar::{factorial, parse_rational, Scalar, C64};

pub const STRAIGHTENING_BUDGET: usize = 10_000_000;

/// Nondecreasing generator indices labelling a symmetrized PBW monomial.
pub type Mono = Vec<usize>;

fn add_into<K: Ord, S: Scalar>(map: &mut BTreeMap<K, S>, key: K, value: S) {
    if value.is_zero() {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(value);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get().clone() + value;
            if S::EXACT && sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdLieAlgebra<S> {
    dim: usize,
    field: Field,
    /// `c[(i * dim + j) * dim + k]` with `[x_i, x_j] = sum_k c_ijk x_k`.
    c: Vec<S>,
}

/// A structure constant: a number, a rational string such as `"1/2"`, or `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumLit {
    Num(f64),
    Text(String),
    Pair([f64; 2]),
}

impl NumLit {
    pub fn to_scalar<S: Scalar>(&self) -> Result<S> {
        match self {
            NumLit::Num(x) => S::from_f64(*x).ok_or_else(|| Error::InvalidInput(format!("bad number {x}"))),
            NumLit::Text(t) => parse_rational(t)
                .map(|q| S::from_rational(&q))
                .ok_or_else(|| Error::InvalidInput(format!("bad rational {t:?}"))),
            NumLit::Pair([re, im]) => S::from_c64(C64::new(*re, *im))
                .ok_or_else(|| Error::InvalidInput(format!("complex constant [{re}, {im}] needs complex mode"))),
        }
    }
}

/// `{"dim": n, "field": "R", "brackets": [[i, j, [c_0, ..., c_{n-1}]], ...]}`;
/// unlisted brackets are zero and `[x_j, x_i]` is filled in by antisymmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieJson {
    pub dim: usize,
    pub field: Field,
    #[serde(default)]
    pub brackets: Vec<(usize, usize, Vec<NumLit>)>,
}

impl<S: Scalar> FdLieAlgebra<S> {
    /// Validates antisymmetry and the Jacobi identity (exactly for rational
    /// scalars, to `1e-12` otherwise).
    pub fn new(dim: usize, field: Field, c: Vec<S>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::InvalidLieAlgebra(format!("{} structure constants for dimension {dim}", c.len())));
        }
        let lie = FdLieAlgebra { dim, field, c };
        let tol = if S::EXACT { 0.0 } else { 1e-12 };
        let a = lie.antisymmetry_residual();
        if a > tol {
            return Err(Error::InvalidLieAlgebra(format!("antisymmetry residual {a:e}")));
        }
        let j = lie.jacobi_residual();
        if j > tol {
            return Err(Error::InvalidLieAlgebra(format!("Jacobi residual {j:e}")));
        }
        Ok(lie)
    }

    pub fn abelian(dim: usize, field: Field) -> Self {
        FdLieAlgebra { dim, field, c: vec![S::zero(); dim * dim * dim] }
    }

    /// Basis `(e, f, h)` with `[e, f] = h`, `[h, e] = 2e`, `[h, f] = -2f`.
    pub fn sl2(field: Field) -> Self {
        let mut c = vec![S::zero(); 27];
        let mut set = |i: usize, j: usize, k: usize, v: i64| {
            c[(i * 3 + j) * 3 + k] = S::from_i64(v);
            c[(j * 3 + i) * 3 + k] = S::from_i64(-v);
        };
        set(0, 1, 2, 1);
        set(2, 0, 0, 2);
        set(2, 1, 1, -2);
        FdLieAlgebra { dim: 3, field, c }
    }

    pub fn from_json(json: &LieJson) -> Result<Self> {
        let n = json.dim;
        let mut c = vec![S::zero(); n * n * n];
        let mut given = vec![false; n * n];
        for (i, j, coeffs) in &json.brackets {
            let (i, j) = (*i, *j);
            if i >= n || j >= n || coeffs.len() != n {
                return Err(Error::InvalidLieAlgebra(format!("bracket entry [{i}, {j}] has the wrong shape")));
            }
            let values = coeffs.iter().map(|v| v.to_scalar::<S>()).collect::<Result<Vec<S>>>()?;
            for (k, v) in values.iter().enumerate() {
                if given[i * n + j] {
                    return Err(Error::InvalidLieAlgebra(format!("bracket [{i}, {j}] given twice")));
                }
                c[(i * n + j) * n + k] = v.clone();
                if !given[j * n + i] {
                    c[(j * n + i) * n + k] = -v.clone();
                }
            }
            given[i * n + j] = true;
        }
        Self::new(n, json.field, c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &S {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    fn bracket_row(&self, i: usize, j: usize) -> &[S] {
        let n = self.dim;
        &self.c[(i * n + j) * n..(i * n + j + 1) * n]
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = self.structure_constant(i, j, k).clone() + self.structure_constant(j, i, k).clone();
                    worst = worst.max(s.magnitude());
                }
            }
        }
        worst
    }

    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let mut s = S::zero();
                        for k in 0..n {
                            s = s + self.structure_constant(i, j, k).clone() * self.structure_constant(k, l, m).clone()
                                + self.structure_constant(j, l, k).clone() * self.structure_constant(k, i, m).clone()
                                + self.structure_constant(l, i, k).clone() * self.structure_constant(k, j, m).clone();
                        }
                        worst = worst.max(s.magnitude());
                    }
                }
            }
        }
        worst
    }

    /// `L_1 x L_2`, with the generators of `self` first.
    pub fn direct_product(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a + b;
        let mut c = vec![S::zero(); n * n * n];
        for i in 0..a {
            for j in 0..a {
                for k in 0..a {
                    c[(i * n + j) * n + k] = self.structure_constant(i, j, k).clone();
                }
            }
        }
        for i in 0..b {
            for j in 0..b {
                for k in 0..b {
                    c[((a + i) * n + a + j) * n + a + k] = other.structure_constant(i, j, k).clone();
                }
            }
        }
        FdLieAlgebra { dim: n, field: self.field, c }
    }
}

/// Builtin names: `sl2`, `abelian(n)` / `abelianN`, and products joined by `*`.
pub fn builtin_lie<S: Scalar>(name: &str, field: Field) -> Result<FdLieAlgebra<S>> {
    let mut parts = name.split('*').map(str::trim);
    let first = parts.next().unwrap_or_default();
    let mut lie = builtin_lie_factor(first, field)?;
    for p in parts {
        lie = lie.direct_product(&builtin_lie_factor(p, field)?);
    }
    Ok(lie)
}

fn builtin_lie_factor<S: Scalar>(name: &str, field: Field) -> Result<FdLieAlgebra<S>> {
    let name = name.trim().to_ascii_lowercase();
    if name == "sl2" {
        return Ok(FdLieAlgebra::sl2(field));
    }
    let digits = name
        .strip_prefix("abelian")
        .map(|rest| rest.trim_start_matches(['(', '-', ':']).trim_end_matches(')'))
        .ok_or_else(|| Error::InvalidInput(format!("unknown Lie algebra {name:?}")))?;
    let n: usize = digits.parse().map_err(|_| Error::InvalidInput(format!("unknown Lie algebra {name:?}")))?;
    Ok(FdLieAlgebra::abelian(n, field))
}

/// `C(n + d - 1, d)`, the number of degree-`d` monomials in `n` variables.
pub fn pbw_dimension(n: usize, d: usize) -> usize {
    if d == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..d {
        r = r * (n + i) / (i + 1);
    }
    r
}

/// All labels of degree exactly `d`.
pub fn monomials_of_degree(n: usize, d: usize) -> Vec<Mono> {
    fn rec(n: usize, d: usize, start: usize, cur: &mut Mono, out: &mut Vec<Mono>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, d, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, 0, &mut Vec::with_capacity(d), &mut out);
    out
}

pub fn monomials_up_to(n: usize, d: usize) -> Vec<Mono> {
    (0..=d).flat_map(|k| monomials_of_degree(n, k)).collect()
}

/// Distinct arrangements of a multiset, in lexicographic order.
fn arrangements(m: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = m.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedUElement<S> {
    cutoff: usize,
    terms: BTreeMap<Mono, S>,
}

impl<S: Scalar> TruncatedUElement<S> {
    pub fn zero(cutoff: usize) -> Self {
        TruncatedUElement { cutoff, terms: BTreeMap::new() }
    }

    pub fn one(cutoff: usize) -> Self {
        Self::monomial(cutoff, Vec::new(), S::one())
    }

    pub fn monomial(cutoff: usize, m: Mono, c: S) -> Self {
        Self::from_terms(cutoff, [(m, c)])
    }

    /// Labels are sorted into nondecreasing order; degrees above the cutoff are dropped.
    pub fn from_terms(cutoff: usize, terms: impl IntoIterator<Item = (Mono, S)>) -> Self {
        let mut map = BTreeMap::new();
        for (mut m, c) in terms {
            if m.len() <= cutoff {
                m.sort_unstable();
                add_into(&mut map, m, c);
            }
        }
        TruncatedUElement { cutoff, terms: map }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<Mono, S> {
        &self.terms
    }

    pub fn coeff(&self, m: &[usize]) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn counit(&self) -> S {
        self.coeff(&[])
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(m, _)| m.len()).max()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_cutoffs(self.cutoff, other.cutoff)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_into(&mut terms, m.clone(), c.clone());
        }
        Ok(TruncatedUElement { cutoff: self.cutoff, terms })
    }

    pub fn scale(&self, s: &S) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone())).collect();
        Self::from_terms(self.cutoff, terms_vec(terms))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    /// Drops degrees above `cutoff` (which may also raise the nominal cutoff).
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Self::from_terms(cutoff, self.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference; exactly 0 for equal rational elements.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            worst = worst.max((c.clone() - other.coeff(m)).magnitude());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.magnitude());
            }
        }
        worst
    }
}

fn terms_vec<S>(m: BTreeMap<Mono, S>) -> Vec<(Mono, S)> {
    m.into_iter().collect()
}

fn check_cutoffs(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::CutoffMismatch(a, b));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensorU<S> {
    cutoff: usize,
    terms: BTreeMap<(Mono, Mono), S>,
}

impl<S: Scalar> TruncatedTensorU<S> {
    pub fn zero(cutoff: usize) -> Self {
        TruncatedTensorU { cutoff, terms: BTreeMap::new() }
    }

    pub fn outer(a: &TruncatedUElement<S>, b: &TruncatedUElement<S>) -> Self {
        let mut terms = BTreeMap::new();
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                add_into(&mut terms, (m1.clone(), m2.clone()), c1.clone() * c2.clone());
            }
        }
        TruncatedTensorU { cutoff: a.cutoff.max(b.cutoff), terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            add_into(&mut terms, k.clone(), v.clone());
        }
        TruncatedTensorU { cutoff: self.cutoff.max(other.cutoff), terms }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<(Mono, Mono), S> {
        &self.terms
    }

    pub fn coeff(&self, a: &[usize], b: &[usize]) -> S {
        self.terms.get(&(a.to_vec(), b.to_vec())).cloned().unwrap_or_else(S::zero)
    }

    /// Largest coefficient difference over pairs whose total degree is at most `max_total`.
    pub fn distance_up_to(&self, other: &Self, max_total: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<&(Mono, Mono)> = self.terms.keys().chain(other.terms.keys()).collect();
        for k in keys {
            if k.0.len() + k.1.len() > max_total {
                continue;
            }
            let a = self.terms.get(k).cloned().unwrap_or_else(S::zero);
            let b = other.terms.get(k).cloned().unwrap_or_else(S::zero);
            worst = worst.max((a - b).magnitude());
        }
        worst
    }
}

/// `U(L)` at a fixed cutoff, with caches for straightening.
#[derive(Debug)]
pub struct UAlgebra<S> {
    lie: Arc<FdLieAlgebra<S>>,
    cutoff: usize,
    budget: usize,
    word_cache: Mutex<HashMap<Vec<usize>, Arc<Vec<(Mono, S)>>>>,
    sym_cache: Mutex<HashMap<Mono, Arc<Vec<(Mono, S)>>>>,
}

impl<S: Scalar> UAlgebra<S> {
    pub fn new(lie: &Arc<FdLieAlgebra<S>>, cutoff: usize) -> Self {
        Self::with_budget(lie, cutoff, STRAIGHTENING_BUDGET)
    }

    pub fn with_budget(lie: &Arc<FdLieAlgebra<S>>, cutoff: usize, budget: usize) -> Self {
        UAlgebra {
            lie: Arc::clone(lie),
            cutoff,
            budget,
            word_cache: Mutex::new(HashMap::new()),
            sym_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn lie(&self) -> &Arc<FdLieAlgebra<S>> {
        &self.lie
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn basis(&self) -> Vec<Mono> {
        monomials_up_to(self.lie.dim, self.cutoff)
    }

    pub fn generator(&self, i: usize) -> TruncatedUElement<S> {
        TruncatedUElement::monomial(self.cutoff, vec![i], S::one())
    }

    fn check(&self, a: &TruncatedUElement<S>) -> Result<()> {
        check_cutoffs(self.cutoff, a.cutoff)?;
        if let Some(m) = a.terms.keys().find(|m| m.iter().any(|&i| i >= self.lie.dim)) {
            return Err(Error::ShapeMismatch(format!("monomial {m:?} uses a generator outside dimension {}", self.lie.dim)));
        }
        Ok(())
    }

    /// Ordered PBW expansion of a word, using `x_j x_i = x_i x_j + [x_j, x_i]`
    /// for `j > i`. Words are processed longest and most disordered first,
    /// so every word is rewritten once with its full coefficient.
    pub fn straighten_word(&self, word: &[usize]) -> Result<Arc<Vec<(Mono, S)>>> {
        if let Some(hit) = self.word_cache.lock().expect("cache lock").get(word) {
            return Ok(Arc::clone(hit));
        }
        let inversions = |w: &[usize]| {
            let mut k = 0;
            for a in 0..w.len() {
                for b in a + 1..w.len() {
                    k += usize::from(w[a] > w[b]);
                }
            }
            k
        };
        let mut work: BTreeMap<(usize, usize, Vec<usize>), S> = BTreeMap::new();
        work.insert((word.len(), inversions(word), word.to_vec()), S::one());
        let mut out: BTreeMap<Mono, S> = BTreeMap::new();
        let mut steps = 0usize;
        while let Some(((len, inv, w), c)) = work.pop_last() {
            if c.is_zero() {
                continue;
            }
            let Some(p) = (0..len.saturating_sub(1)).find(|&p| w[p] > w[p + 1]) else {
                add_into(&mut out, w, c);
                continue;
            };
            steps += 1;
            if steps > self.budget {
                return Err(Error::StraighteningBudgetExceeded(self.budget));
            }
            let (j, i) = (w[p], w[p + 1]);
            let mut swapped = w.clone();
            swapped.swap(p, p + 1);
            add_into(&mut work, (len, inv - 1, swapped), c.clone());
            for (k, s) in self.lie.bracket_row(j, i).iter().enumerate() {
                if s.is_zero() {
                    continue;
                }
                let mut shorter = Vec::with_capacity(len - 1);
                shorter.extend_from_slice(&w[..p]);
                shorter.push(k);
                shorter.extend_from_slice(&w[p + 2..]);
                let key = (len - 1, inversions(&shorter), shorter);
                add_into(&mut work, key, c.clone() * s.clone());
            }
        }
        let result = Arc::new(terms_vec(out));
        self.word_cache.lock().expect("cache lock").insert(word.to_vec(), Arc::clone(&result));
        Ok(result)
    }

    /// Ordered PBW expansion of the symmetrized monomial `m`.
    pub fn sym_to_ordered(&self, m: &[usize]) -> Result<Arc<Vec<(Mono, S)>>> {
        if let Some(hit) = self.sym_cache.lock().expect("cache lock").get(m) {
            return Ok(Arc::clone(hit));
        }
        let arr = arrangements(m);
        let mut acc: BTreeMap<Mono, S> = BTreeMap::new();
        for w in &arr {
            for (k, c) in self.straighten_word(w)?.iter() {
                add_into(&mut acc, k.clone(), c.clone());
            }
        }
        let count = S::from_i64(arr.len() as i64);
        let result: Vec<(Mono, S)> = acc.into_iter().map(|(k, c)| (k, c / count.clone())).collect();
        let result = Arc::new(result);
        self.sym_cache.lock().expect("cache lock").insert(m.to_vec(), Arc::clone(&result));
        Ok(result)
    }

    /// Inverse of [`Self::sym_to_ordered`], peeling off top-degree terms.
    pub fn ordered_to_sym(&self, ordered: BTreeMap<Mono, S>) -> Result<BTreeMap<Mono, S>> {
        let mut rest = ordered;
        let mut out = BTreeMap::new();
        while let Some(m) = rest.keys().max_by_key(|m| (m.len(), (*m).clone())).cloned() {
            let c = rest.remove(&m).expect("present");
            if c.is_zero() {
                continue;
            }
            for (k, v) in self.sym_to_ordered(&m)?.iter() {
                if *k != m {
                    add_into(&mut rest, k.clone(), -(c.clone() * v.clone()));
                }
            }
            add_into(&mut out, m, c);
        }
        Ok(out)
    }

    fn to_ordered(&self, a: &TruncatedUElement<S>) -> Result<BTreeMap<Mono, S>> {
        let mut out = BTreeMap::new();
        for (m, c) in &a.terms {
            for (k, v) in self.sym_to_ordered(m)?.iter() {
                add_into(&mut out, k.clone(), c.clone() * v.clone());
            }
        }
        Ok(out)
    }

    /// Full product in the symmetrized basis, before truncation.
    fn multiply_untruncated(&self, a: &TruncatedUElement<S>, b: &TruncatedUElement<S>) -> Result<BTreeMap<Mono, S>> {
        let oa = self.to_ordered(a)?;
        let ob = self.to_ordered(b)?;
        let mut prod = BTreeMap::new();
        let mut word = Vec::with_capacity(2 * self.cutoff);
        for (p, cp) in &oa {
            for (q, cq) in &ob {
                word.clear();
                word.extend_from_slice(p);
                word.extend_from_slice(q);
                let c = cp.clone() * cq.clone();
                for (k, v) in self.straighten_word(&word)?.iter() {
                    add_into(&mut prod, k.clone(), c.clone() * v.clone());
                }
            }
        }
        self.ordered_to_sym(prod)
    }

    pub fn multiply(&self, a: &TruncatedUElement<S>, b: &TruncatedUElement<S>) -> Result<TruncatedUElement<S>> {
        self.check(a)?;
        self.check(b)?;
        let full = self.multiply_untruncated(a, b)?;
        Ok(TruncatedUElement::from_terms(self.cutoff, full))
    }

    pub fn commutator(&self, a: &TruncatedUElement<S>, b: &TruncatedUElement<S>) -> Result<TruncatedUElement<S>> {
        self.multiply(a, b)?.sub(&self.multiply(b, a)?)
    }

    /// `Delta sym(x^a) = sum_{b <= a} prod_i C(a_i, b_i) sym(x^b) (x) sym(x^{a-b})`.
    pub fn comultiply(&self, a: &TruncatedUElement<S>) -> Result<TruncatedTensorU<S>> {
        self.check(a)?;
        let mut terms = BTreeMap::new();
        for (m, c) in &a.terms {
            for (left, right, w) in multiset_splits::<S>(m) {
                add_into(&mut terms, (left, right), c.clone() * w);
            }
        }
        Ok(TruncatedTensorU { cutoff: self.cutoff, terms })
    }

    /// The algebra morphism with `Delta(x_i) = x_i (x) 1 + 1 (x) x_i`,
    /// evaluated on every arrangement of each label and averaged.
    pub fn comultiply_via_generators(&self, a: &TruncatedUElement<S>) -> Result<TruncatedTensorU<S>> {
        self.check(a)?;
        let one = TruncatedUElement::one(self.cutoff);
        let mut total = TruncatedTensorU::zero(self.cutoff);
        for (m, c) in &a.terms {
            let arr = arrangements(m);
            let count = S::from_i64(arr.len() as i64);
            for w in &arr {
                let mut t = TruncatedTensorU::outer(&one, &one);
                for &i in w {
                    let x = self.generator(i);
                    let mut dx = TruncatedTensorU::outer(&x, &one);
                    for (k, v) in TruncatedTensorU::outer(&one, &x).terms {
                        add_into(&mut dx.terms, k, v);
                    }
                    t = tensor_multiply(self, self, &t, &dx)?;
                }
                for (k, v) in t.terms {
                    add_into(&mut total.terms, k, v * c.clone() / count.clone());
                }
            }
        }
        Ok(total)
    }

    /// `S(sym(m)) = (-1)^{|m|} sym(m)`.
    pub fn antipode(&self, a: &TruncatedUElement<S>) -> Result<TruncatedUElement<S>> {
        self.check(a)?;
        Ok(TruncatedUElement::from_terms(
            self.cutoff,
            a.terms.iter().map(|(m, c)| (m.clone(), if m.len() % 2 == 1 { -c.clone() } else { c.clone() })),
        ))
    }

    /// Basis of `{a : Delta(a) = a (x) 1 + 1 (x) a}` among elements of degree at most the cutoff.
    pub fn primitive_space(&self, tol: f64) -> Result<Vec<TruncatedUElement<S>>> {
        let basis = self.basis();
        let mut rows: BTreeMap<(Mono, Mono), Vec<S>> = BTreeMap::new();
        for (col, m) in basis.iter().enumerate() {
            let e = TruncatedUElement::monomial(self.cutoff, m.clone(), S::one());
            let mut t = self.comultiply(&e)?;
            let one = TruncatedUElement::one(self.cutoff);
            for (k, v) in TruncatedTensorU::outer(&e, &one).terms.into_iter().chain(TruncatedTensorU::outer(&one, &e).terms) {
                add_into(&mut t.terms, k, -v);
            }
            for (k, v) in t.terms {
                rows.entry(k).or_insert_with(|| vec![S::zero(); basis.len()])[col] = v;
            }
        }
        let rows: Vec<Vec<S>> = rows.into_values().collect();
        Ok(null_space(&rows, basis.len(), tol)
            .into_iter()
            .map(|v| TruncatedUElement::from_terms(self.cutoff, basis.iter().cloned().zip(v)))
            .collect())
    }

    /// `sum_{k <= D} a^k / k!` for `a` with zero constant term. Powers of a
    /// Lie element are homogeneous; for anything of higher degree the powers
    /// are formed at cutoff `D * deg(a)` so that no dropped term can feed
    /// the lower degrees.
    pub fn exp(&self, a: &TruncatedUElement<S>) -> Result<TruncatedUElement<S>> {
        self.check(a)?;
        if !a.counit().is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let d = self.cutoff;
        let deg = a.degree().unwrap_or(0);
        if deg > 1 {
            let wide = UAlgebra::with_budget(&self.lie, d * deg, self.budget);
            return Ok(wide.exp_series(&a.with_cutoff(d * deg), d)?.with_cutoff(d));
        }
        self.exp_series(a, d)
    }

    fn exp_series(&self, a: &TruncatedUElement<S>, terms: usize) -> Result<TruncatedUElement<S>> {
        let mut sum = TruncatedUElement::one(self.cutoff);
        let mut power = TruncatedUElement::one(self.cutoff);
        for k in 1..=terms {
            power = self.multiply(&power, a)?;
            sum = sum.add(&power.scale(&(S::one() / factorial::<S>(k))))?;
        }
        Ok(sum)
    }

    /// `max |Delta(g) - g (x) g|` over tensor components of total degree at most the cutoff.
    pub fn grouplike_residual(&self, g: &TruncatedUElement<S>) -> Result<f64> {
        let lhs = self.comultiply(g)?;
        Ok(lhs.distance_up_to(&TruncatedTensorU::outer(g, g), self.cutoff))
    }

    pub fn random_element<R: Rng>(&self, max_degree: usize, rng: &mut R) -> TruncatedUElement<S> {
        let mut terms: Vec<(Mono, S)> = Vec::new();
        for m in self.basis() {
            if m.len() <= max_degree && rng.gen_bool(0.6) {
                let num = S::from_i64(rng.gen_range(-4..=4));
                let den = S::from_i64(rng.gen_range(1..=3));
                terms.push((m, num / den));
            }
        }
        TruncatedUElement::from_terms(self.cutoff, terms)
    }

    /// Random element of `L` (degree one).
    pub fn random_lie_element<R: Rng>(&self, rng: &mut R) -> TruncatedUElement<S> {
        let terms: Vec<(Mono, S)> = (0..self.lie.dim)
            .map(|i| (vec![i], S::from_i64(rng.gen_range(-5..=5)) / S::from_i64(rng.gen_range(1..=4))))
            .collect();
        TruncatedUElement::from_terms(self.cutoff, terms)
    }
}

/// Splits a multiset label into all (left, right) sub-multiset pairs with
/// their binomial weights.
fn multiset_splits<S: Scalar>(m: &[usize]) -> Vec<(Mono, Mono, S)> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &i in m {
        match groups.last_mut() {
            Some((g, k)) if *g == i => *k += 1,
            _ => groups.push((i, 1)),
        }
    }
    let mut out = vec![(Vec::new(), Vec::new(), S::one())];
    for (g, k) in groups {
        let mut next = Vec::with_capacity(out.len() * (k + 1));
        for (l, r, w) in &out {
            let mut binom: i64 = 1;
            for b in 0..=k {
                let mut l2 = l.clone();
                l2.extend(std::iter::repeat(g).take(b));
                let mut r2 = r.clone();
                r2.extend(std::iter::repeat(g).take(k - b));
                next.push((l2, r2, w.clone() * S::from_i64(binom)));
                binom = binom * (k - b) as i64 / (b + 1) as i64;
            }
        }
        out = next;
    }
    out
}

/// `(u1 (x) v1)(u2 (x) v2) = u1 u2 (x) v1 v2`, computed in full and then cut
/// at each algebra's cutoff.
pub fn tensor_multiply<S: Scalar>(
    left: &UAlgebra<S>,
    right: &UAlgebra<S>,
    a: &TruncatedTensorU<S>,
    b: &TruncatedTensorU<S>,
) -> Result<TruncatedTensorU<S>> {
    let mut terms = BTreeMap::new();
    let one = |alg: &UAlgebra<S>, m: &Mono| TruncatedUElement::monomial(alg.cutoff, m.clone(), S::one());
    for ((u1, v1), c1) in &a.terms {
        for ((u2, v2), c2) in &b.terms {
            let u = left.multiply_untruncated(&one(left, u1), &one(left, u2))?;
            let v = right.multiply_untruncated(&one(right, v1), &one(right, v2))?;
            let c = c1.clone() * c2.clone();
            for (mu, cu) in u.iter().filter(|(m, _)| m.len() <= left.cutoff) {
                for (mv, cv) in v.iter().filter(|(m, _)| m.len() <= right.cutoff) {
                    add_into(&mut terms, (mu.clone(), mv.clone()), c.clone() * cu.clone() * cv.clone());
                }
            }
        }
    }
    Ok(TruncatedTensorU { cutoff: left.cutoff.max(right.cutoff), terms })
}

/// Worst relative gap between `(ab)c` and `a(bc)` over random triples of
/// degree at most `cutoff`. Dropping high degrees is not an ideal quotient in
/// the symmetrized basis, so the products are formed at cutoff `3 * cutoff`
/// (where nothing is lost) and truncated afterwards.
pub fn associativity_residual<S: Scalar>(lie: &Arc<FdLieAlgebra<S>>, cutoff: usize, triples: usize, seed: u64) -> Result<f64> {
    let u = UAlgebra::new(lie, 3 * cutoff);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let a = u.random_element(cutoff, &mut rng);
        let b = u.random_element(cutoff, &mut rng);
        let c = u.random_element(cutoff, &mut rng);
        let left = u.multiply(&u.multiply(&a, &b)?, &c)?.with_cutoff(cutoff);
        let right = u.multiply(&a, &u.multiply(&b, &c)?)?.with_cutoff(cutoff);
        worst = worst.max(left.distance(&right) / left.max_abs().max(1.0));
    }
    Ok(worst)
}

/// Coassociativity and counit residuals on every basis monomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfLawReport {
    pub coassociativity: f64,
    pub counit: f64,
    pub antipode: f64,
    pub comultiplication_routes: f64,
    pub monomials: usize,
}

impl HopfLawReport {
    pub fn max(&self) -> f64 {
        self.coassociativity.max(self.counit).max(self.antipode).max(self.comultiplication_routes)
    }
}

pub fn hopf_law_report<S: Scalar>(alg: &UAlgebra<S>) -> Result<HopfLawReport> {
    let d = alg.cutoff;
    let basis = alg.basis();
    let mut report = HopfLawReport {
        coassociativity: 0.0,
        counit: 0.0,
        antipode: 0.0,
        comultiplication_routes: 0.0,
        monomials: basis.len(),
    };
    for m in &basis {
        let e = TruncatedUElement::monomial(d, m.clone(), S::one());
        let delta = alg.comultiply(&e)?;
        // triple tensors (u, v, w)
        let mut left: BTreeMap<(Mono, Mono, Mono), S> = BTreeMap::new();
        let mut right: BTreeMap<(Mono, Mono, Mono), S> = BTreeMap::new();
        for ((u, v), c) in &delta.terms {
            for (a, b, w) in multiset_splits::<S>(u) {
                add_into(&mut left, (a, b, v.clone()), c.clone() * w);
            }
            for (a, b, w) in multiset_splits::<S>(v) {
                add_into(&mut right, (u.clone(), a, b), c.clone() * w);
            }
        }
        let keys: std::collections::BTreeSet<_> = left.keys().chain(right.keys()).cloned().collect();
        for k in keys {
            if k.0.len() + k.1.len() + k.2.len() > d {
                continue;
            }
            let a = left.get(&k).cloned().unwrap_or_else(S::zero);
            let b = right.get(&k).cloned().unwrap_or_else(S::zero);
            report.coassociativity = report.coassociativity.max((a - b).magnitude());
        }
        // (eps (x) id) Delta = id = (id (x) eps) Delta
        let mut l = TruncatedUElement::zero(d);
        let mut r = TruncatedUElement::zero(d);
        for ((u, v), c) in &delta.terms {
            if u.is_empty() {
                add_into(&mut l.terms, v.clone(), c.clone());
            }
            if v.is_empty() {
                add_into(&mut r.terms, u.clone(), c.clone());
            }
        }
        report.counit = report.counit.max(l.distance(&e)).max(r.distance(&e));
        // m (S (x) id) Delta = eps
        let mut s = TruncatedUElement::zero(d);
        for ((u, v), c) in &delta.terms {
            if u.len() + v.len() > d {
                continue;
            }
            let su = alg.antipode(&TruncatedUElement::monomial(d, u.clone(), c.clone()))?;
            s = s.add(&alg.multiply(&su, &TruncatedUElement::monomial(d, v.clone(), S::one()))?)?;
        }
        let eps = TruncatedUElement::one(d).scale(&e.counit());
        report.antipode = report.antipode.max(s.distance(&eps));
        let via = alg.comultiply_via_generators(&e)?;
        report.comultiplication_routes = report.comultiplication_routes.max(delta.distance_up_to(&via, 2 * d));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCount {
    pub degree: usize,
    pub product_dim: usize,
    pub tensor_dim: usize,
    pub formula_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicativityReport {
    pub degrees: Vec<DegreeCount>,
    pub alpha_residual: f64,
    pub pairs: usize,
}

/// `alpha(sym(x^a y^b)) = sym(x^a) (x) sym(y^b)`, valid because the two
/// factors commute in `L_1 x L_2`.
fn alpha<S: Scalar>(n1: usize, terms: &BTreeMap<Mono, S>, cutoff: usize) -> TruncatedTensorU<S> {
    let mut out = BTreeMap::new();
    for (m, c) in terms {
        let split = m.partition_point(|&i| i < n1);
        let left = m[..split].to_vec();
        let right = m[split..].iter().map(|i| i - n1).collect();
        add_into(&mut out, (left, right), c.clone());
    }
    TruncatedTensorU { cutoff, terms: out }
}

pub fn multiplicativity_check<S: Scalar>(
    l1: &Arc<FdLieAlgebra<S>>,
    l2: &Arc<FdLieAlgebra<S>>,
    cutoff: usize,
    pairs: usize,
    seed: u64,
) -> Result<MultiplicativityReport> {
    if l1.field != l2.field {
        return Err(Error::InvalidLieAlgebra("factors over different fields".into()));
    }
    let prod = Arc::new(l1.direct_product(l2));
    let (n1, n2) = (l1.dim, l2.dim);
    let mut degrees = Vec::new();
    for d in 0..=cutoff {
        let product_dim = monomials_of_degree(n1 + n2, d).len();
        let tensor_dim: usize =
            (0..=d).map(|i| monomials_of_degree(n1, i).len() * monomials_of_degree(n2, d - i).len()).sum();
        let formula_dim = pbw_dimension(n1 + n2, d);
        if product_dim != tensor_dim || product_dim != formula_dim {
            return Err(Error::DimensionMismatch(d));
        }
        degrees.push(DegreeCount { degree: d, product_dim, tensor_dim, formula_dim });
    }
    let up = UAlgebra::new(&prod, cutoff);
    let u1 = UAlgebra::new(l1, cutoff);
    let u2 = UAlgebra::new(l2, cutoff);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = up.random_element(cutoff, &mut rng);
        let b = up.random_element(cutoff, &mut rng);
        let ab = up.multiply(&a, &b)?;
        let lhs = alpha(n1, &ab.terms, cutoff);
        let rhs = tensor_multiply(&u1, &u2, &alpha(n1, &a.terms, cutoff), &alpha(n1, &b.terms, cutoff))?;
        worst = worst.max(lhs.distance_up_to(&rhs, cutoff));
    }
    Ok(MultiplicativityReport { degrees, alpha_residual: worst, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeriesReport {
    pub cutoff: usize,
    pub dimension: usize,
    pub commutator_residual: f64,
    pub polynomial_residual: f64,
}

/// `U` of the one-dimensional abelian Lie algebra at cutoff `D` against
/// `Q[x]/(x^{D+1})`, exactly.
pub fn abelian_powerseries_check(cutoff: usize) -> Result<PowerSeriesReport> {
    let lie = Arc::new(FdLieAlgebra::<BigRational>::abelian(1, Field::R));
    let alg = UAlgebra::new(&lie, cutoff);
    let basis = alg.basis();
    let mut commutator_residual: f64 = 0.0;
    let mut polynomial_residual: f64 = 0.0;
    for a in &basis {
        for b in &basis {
            let x = TruncatedUElement::monomial(cutoff, a.clone(), BigRational::from_i64(1));
            let y = TruncatedUElement::monomial(cutoff, b.clone(), BigRational::from_i64(1));
            commutator_residual = commutator_residual.max(alg.commutator(&x, &y)?.max_abs());
            let expected = if a.len() + b.len() <= cutoff {
                TruncatedUElement::monomial(cutoff, vec![0; a.len() + b.len()], BigRational::from_i64(1))
            } else {
                TruncatedUElement::zero(cutoff)
            };
            polynomial_residual = polynomial_residual.max(alg.multiply(&x, &y)?.distance(&expected));
        }
    }
    Ok(PowerSeriesReport { cutoff, dimension: basis.len(), commutator_residual, polynomial_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    pub cutoff: usize,
    pub probes: usize,
    pub morphism_residual: f64,
    pub primitives_preserved: bool,
    pub exp_residual: f64,
}

/// `omega(sum_k c_k x^k) = sum_k c_k phi^k` with `phi(n) = 2 pi i n` on `Ghat = Z`.
pub fn omega<S: Scalar>(dual: &Arc<FgAbelianGroup>, a: &TruncatedUElement<S>) -> Result<DualElement> {
    let phi = Arc::new(Expr::Primitive(PrimitiveData { free_values: vec![C64::new(0.0, 2.0 * PI)] }));
    let terms: Vec<Arc<Expr>> = a
        .terms
        .iter()
        .map(|(m, c)| {
            let power = Expr::Product(vec![Arc::clone(&phi); m.len()]);
            Arc::new(Expr::Scale(c.to_c64(), Arc::new(power)))
        })
        .collect();
    DualElement::new(dual, Expr::Sum(terms))
}

/// Checks that `omega: U(L(T)) -> C^Z` is multiplicative at probes, sends
/// primitives to primitives, and that `exp(omega(t x))` is the point `t` of `T`.
pub fn omega_torus_check(cutoff: usize, probes: usize, tolerance: f64, seed: u64) -> Result<OmegaReport> {
    if cutoff < 2 {
        return Err(Error::UnsupportedParameter(format!("cutoff {cutoff} < 2")));
    }
    let dual = Arc::new(FgAbelianGroup::free(1));
    let lie = Arc::new(FdLieAlgebra::<f64>::abelian(1, Field::R));
    let alg = UAlgebra::new(&lie, cutoff);
    let chis = probe_characters(&dual, probes, crate::dual::DEFAULT_WINDOW, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0e9a);
    let fail = |probe: String, residual: f64| Error::ProbeFailure { probe, residual };

    let mut morphism_residual: f64 = 0.0;
    for _ in 0..10 {
        let da = rng.gen_range(0..=cutoff);
        let a = alg.random_element(da, &mut rng);
        let b = alg.random_element(cutoff - da, &mut rng);
        let ab = omega(&dual, &alg.multiply(&a, &b)?)?;
        let (oa, ob) = (omega(&dual, &a)?, omega(&dual, &b)?);
        for chi in &chis {
            let lhs = ab.evaluate(chi)?;
            let rhs = oa.evaluate(chi)? * ob.evaluate(chi)?;
            let r = (lhs - rhs).norm() / 1f64.max(lhs.norm()).max(rhs.norm());
            if !(r <= tolerance) {
                return Err(fail(format!("morphism at {:?}", chi.free), r));
            }
            morphism_residual = morphism_residual.max(r);
        }
    }

    let mut primitives_preserved = true;
    for p in alg.primitive_space(1e-12)? {
        primitives_preserved &= omega(&dual, &p)?.is_primitive(DEFAULT_TRIALS_OMEGA, tolerance, seed) == Verdict::StructurallyYes;
    }

    let mut exp_residual: f64 = 0.0;
    for _ in 0..10 {
        let t: f64 = rng.gen_range(0.0..1.0);
        let x = TruncatedUElement::monomial(cutoff, vec![0], t);
        let lhs = omega(&dual, &x)?.exp();
        let rhs = embed_group_point(&dual, &[t], &[])?;
        for chi in &chis {
            let r = (lhs.evaluate(chi)? - rhs.evaluate(chi)?).norm();
            if !(r <= tolerance) {
                return Err(fail(format!("exp at t = {t}, chi = {:?}", chi.free), r));
            }
            exp_residual = exp_residual.max(r);
        }
    }
    Ok(OmegaReport { cutoff, probes: chis.len(), morphism_residual, primitives_preserved, exp_residual })
}

const DEFAULT_TRIALS_OMEGA: usize = 50;
