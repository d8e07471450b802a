//! Smith normal form over the integers.
//!
//! The reduction first runs on `i64` with checked arithmetic. If any
//! intermediate value overflows it restarts from scratch on `BigInt`, so the
//! result is always exact.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged integer matrix");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().cloned().map(Into::into)).collect(),
        }
    }

    pub fn with_cols<T: Into<BigInt> + Clone>(rows: &[Vec<T>], cols: usize) -> Self {
        if rows.is_empty() {
            return Self::zeros(0, cols);
        }
        Self::from_rows(rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.data.chunks(self.cols).map(<[BigInt]>::to_vec).collect()
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.to_rows()
            .into_iter()
            .map(|r| r.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// `u * m * v == d` with `u`, `v` unimodular and `d` diagonal with
/// nonnegative entries `d_1 | d_2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// True if the `i64` pass overflowed and the result came from the `BigInt` pass.
    pub promoted: bool,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|x| !x.is_zero()).count()
    }
}

// Arithmetic that may fail on overflow.
trait Exact: Clone + PartialEq + fmt::Debug {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn vanishes(&self) -> bool;
    fn negative(&self) -> bool;
    fn abs_lt(&self, other: &Self) -> bool;
    fn sub_mul(&self, q: &Self, b: &Self) -> Option<Self>;
    fn add(&self, b: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
    fn quot(&self, b: &Self) -> Option<Self>;
    fn divides(&self, b: &Self) -> bool;
    fn into_big(self) -> BigInt;
}

impl Exact for i64 {
    fn zero_value() -> Self {
        0
    }
    fn one_value() -> Self {
        1
    }
    fn vanishes(&self) -> bool {
        *self == 0
    }
    fn negative(&self) -> bool {
        *self < 0
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.unsigned_abs() < other.unsigned_abs()
    }
    fn sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
        self.checked_sub(q.checked_mul(*b)?)
    }
    fn add(&self, b: &Self) -> Option<Self> {
        self.checked_add(*b)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn quot(&self, b: &Self) -> Option<Self> {
        if *b == -1 {
            self.checked_neg()
        } else {
            Some(self.div_floor(b))
        }
    }
    fn divides(&self, b: &Self) -> bool {
        *self != 0 && b % self == 0
    }
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Exact for BigInt {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.abs() < other.abs()
    }
    fn sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
        Some(self - q * b)
    }
    fn add(&self, b: &Self) -> Option<Self> {
        Some(self + b)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn quot(&self, b: &Self) -> Option<Self> {
        Some(self.div_floor(b))
    }
    fn divides(&self, b: &Self) -> bool {
        !Zero::is_zero(self) && Zero::is_zero(&(b % self))
    }
    fn into_big(self) -> BigInt {
        self
    }
}

struct Work<T> {
    rows: usize,
    cols: usize,
    a: Vec<Vec<T>>,
    u: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Exact> Work<T> {
    fn new(a: Vec<Vec<T>>, rows: usize, cols: usize) -> Self {
        let eye = |n: usize| {
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { T::one_value() } else { T::zero_value() }).collect())
                .collect()
        };
        Work { rows, cols, a, u: eye(rows), v: eye(cols) }
    }

    // row_i -= q * row_k, in a and u
    fn row_sub(&mut self, i: usize, k: usize, q: &T) -> Option<()> {
        for j in 0..self.cols {
            self.a[i][j] = self.a[i][j].sub_mul(q, &self.a[k][j])?;
        }
        for j in 0..self.rows {
            self.u[i][j] = self.u[i][j].sub_mul(q, &self.u[k][j])?;
        }
        Some(())
    }

    // col_j -= q * col_k, in a and v
    fn col_sub(&mut self, j: usize, k: usize, q: &T) -> Option<()> {
        for i in 0..self.rows {
            self.a[i][j] = self.a[i][j].sub_mul(q, &self.a[i][k])?;
        }
        for i in 0..self.cols {
            self.v[i][j] = self.v[i][j].sub_mul(q, &self.v[i][k])?;
        }
        Some(())
    }

    fn row_add(&mut self, t: usize, i: usize) -> Option<()> {
        for j in 0..self.cols {
            self.a[t][j] = self.a[t][j].add(&self.a[i][j])?;
        }
        for j in 0..self.rows {
            self.u[t][j] = self.u[t][j].add(&self.u[i][j])?;
        }
        Some(())
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        for row in &mut self.a {
            row.swap(j, k);
        }
        for row in &mut self.v {
            row.swap(j, k);
        }
    }

    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if x.vanishes() {
                    continue;
                }
                if best.map_or(true, |(bi, bj)| x.abs_lt(&self.a[bi][bj])) {
                    best = Some((i, j));
                }
            }
        }
        best
    }

    fn run(mut self) -> Option<Self> {
        for t in 0..self.rows.min(self.cols) {
            loop {
                let Some((pi, pj)) = self.pivot(t) else { return Some(self) };
                self.a.swap(t, pi);
                self.u.swap(t, pi);
                self.swap_cols(t, pj);

                let mut clean = true;
                for i in t + 1..self.rows {
                    if !self.a[i][t].vanishes() {
                        let q = self.a[i][t].quot(&self.a[t][t])?;
                        self.row_sub(i, t, &q)?;
                        clean &= self.a[i][t].vanishes();
                    }
                }
                for j in t + 1..self.cols {
                    if !self.a[t][j].vanishes() {
                        let q = self.a[t][j].quot(&self.a[t][t])?;
                        self.col_sub(j, t, &q)?;
                        clean &= self.a[t][j].vanishes();
                    }
                }
                if !clean {
                    continue;
                }
                let offender = (t + 1..self.rows).find(|&i| {
                    (t + 1..self.cols).any(|j| !self.a[t][t].divides(&self.a[i][j]))
                });
                match offender {
                    Some(i) => self.row_add(t, i)?,
                    None => break,
                }
            }
            if self.a[t][t].negative() {
                for j in 0..self.cols {
                    self.a[t][j] = self.a[t][j].neg()?;
                }
                for j in 0..self.rows {
                    self.u[t][j] = self.u[t][j].neg()?;
                }
            }
        }
        Some(self)
    }

    fn finish(self, promoted: bool) -> SmithForm {
        let conv = |m: Vec<Vec<T>>, r: usize, c: usize| IntMatrix {
            rows: r,
            cols: c,
            data: m.into_iter().flatten().map(Exact::into_big).collect(),
        };
        SmithForm {
            u: conv(self.u, self.rows, self.rows),
            d: conv(self.a, self.rows, self.cols),
            v: conv(self.v, self.cols, self.cols),
            promoted,
        }
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (r, c) = (m.rows, m.cols);
    let small: Option<Vec<Vec<i64>>> = m.to_i64_rows();
    if let Some(rows) = small {
        if let Some(done) = Work::new(rows, r, c).run() {
            return done.finish(false);
        }
    }
    Work::new(m.to_rows(), r, c)
        .run()
        .expect("BigInt arithmetic cannot overflow")
        .finish(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(m: &IntMatrix) -> BigInt {
        // Laplace expansion; test matrices are tiny
        let n = m.nrows();
        if n == 0 {
            return BigInt::one();
        }
        let mut total = BigInt::zero();
        for j in 0..n {
            let minor_rows: Vec<Vec<BigInt>> = (1..n)
                .map(|i| (0..n).filter(|&k| k != j).map(|k| m[(i, k)].clone()).collect())
                .collect();
            let minor = IntMatrix::with_cols(&minor_rows, n - 1);
            let term = &m[(0, j)] * det(&minor);
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        if n < k {
            return Vec::new();
        }
        let mut with: Vec<Vec<usize>> = subsets(n - 1, k - 1)
            .into_iter()
            .map(|mut s| {
                s.push(n - 1);
                s
            })
            .collect();
        with.extend(subsets(n - 1, k));
        with
    }

    // gcd of all k x k minors = d_1 ... d_k
    fn determinantal_divisor(m: &IntMatrix, k: usize) -> BigInt {
        let mut g = BigInt::zero();
        for rs in subsets(m.nrows(), k) {
            for cs in subsets(m.ncols(), k) {
                let rows: Vec<Vec<BigInt>> =
                    rs.iter().map(|&i| cs.iter().map(|&j| m[(i, j)].clone()).collect()).collect();
                g = g.gcd(&det(&IntMatrix::with_cols(&rows, k)));
            }
        }
        g
    }

    fn check(m: &IntMatrix) {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).mul(&s.v), s.d, "U M V != D");
        assert!(s.d.is_diagonal());
        assert_eq!(det(&s.u).abs(), BigInt::one());
        assert_eq!(det(&s.v).abs(), BigInt::one());
        let diag = s.diagonal();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!((&w[1] % &w[0]).is_zero(), "divisibility chain {diag:?}");
            }
        }
        let mut prod = BigInt::one();
        for (k, d) in diag.iter().enumerate() {
            prod *= d;
            assert_eq!(prod, determinantal_divisor(m, k + 1));
        }
    }

    #[test]
    fn identity_is_fixed() {
        let s = smith_normal_form(&IntMatrix::identity(2));
        assert_eq!(s.d, IntMatrix::identity(2));
    }

    #[test]
    fn two_by_two_example() {
        let m = IntMatrix::from_rows(&[vec![2i64, 4], vec![6, 8]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
        check(&m);
    }

    // independent route: search small unimodular transforms for a diagonal form
    #[test]
    fn two_by_two_example_brute_force() {
        let m = [[2i64, 4], [6, 8]];
        let range = -3i64..=3;
        let mut unimodular = Vec::new();
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    for d in range.clone() {
                        if (a * d - b * c).abs() == 1 {
                            unimodular.push([[a, b], [c, d]]);
                        }
                    }
                }
            }
        }
        let mul = |x: [[i64; 2]; 2], y: [[i64; 2]; 2]| {
            let mut z = [[0i64; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            z
        };
        let found = unimodular.iter().any(|&u| {
            let um = mul(u, m);
            unimodular.iter().any(|&v| mul(um, v) == [[2, 0], [0, 4]])
        });
        assert!(found);
    }

    #[test]
    fn zero_matrix() {
        let m = IntMatrix::zeros(2, 3);
        let s = smith_normal_form(&m);
        assert_eq!(s.d, IntMatrix::zeros(2, 3));
        assert_eq!(s.rank(), 0);
    }

    #[test]
    fn rectangular_and_empty() {
        check(&IntMatrix::from_rows(&[vec![2i64, 0]]));
        check(&IntMatrix::from_rows(&[vec![4i64], vec![6], vec![10]]));
        let s = smith_normal_form(&IntMatrix::zeros(0, 3));
        assert_eq!(s.v, IntMatrix::identity(3));
    }

    #[test]
    fn promotes_on_overflow() {
        let big = i64::MAX / 3;
        let m = IntMatrix::from_rows(&[vec![big, 1], vec![1, big]]);
        let s = smith_normal_form(&m);
        assert!(s.promoted);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
        let product: BigInt = s.diagonal().iter().product();
        assert_eq!(product, det(&m).abs());
    }

    proptest! {
        #[test]
        fn random_matrices(rows in 1usize..4, cols in 1usize..4, seed in proptest::collection::vec(-20i64..20, 16)) {
            let data: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 4 + j]).collect()).collect();
            check(&IntMatrix::from_rows(&data));
        }
    }
}
