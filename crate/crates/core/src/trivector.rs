//! Alternating trilinear forms, their contractions and skew-symmetric forms.

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::{row_reduce, Matrix};
use crate::rng::{random_scalar, LabRng};
use crate::subspace::Subspace;

/// A skew-symmetric bilinear form stored by its strictly upper triangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkewForm {
    field: PrimeField,
    dim: usize,
    upper: Vec<u32>,
}

#[inline]
fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < dim);
    i * dim - i * (i + 1) / 2 + (j - i - 1)
}

impl SkewForm {
    pub fn zero(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            dim,
            upper: vec![0; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Reads a full matrix, rejecting anything that is not alternating.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Shape(format!(
                "skew form from {}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        let f = m.field();
        let mut s = Self::zero(f, m.rows());
        for i in 0..m.rows() {
            if m.get(i, i) != 0 {
                return Err(Error::Shape("nonzero diagonal in skew form".into()));
            }
            for j in i + 1..m.rows() {
                if m.get(j, i) != f.neg(m.get(i, j)) {
                    return Err(Error::Shape("matrix is not skew-symmetric".into()));
                }
                s.set(i, j, m.get(i, j));
            }
        }
        Ok(s)
    }

    pub fn random(rng: &mut LabRng, field: PrimeField, dim: usize) -> Self {
        let mut s = Self::zero(field, dim);
        for x in &mut s.upper {
            *x = random_scalar(rng, field);
        }
        s
    }

    /// The standard symplectic form with `M[2i][2i+1] = 1`.
    pub fn standard_symplectic(field: PrimeField, dim: usize) -> Self {
        let mut s = Self::zero(field, dim);
        for i in 0..dim / 2 {
            s.set(2 * i, 2 * i + 1, 1);
        }
        s
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[upper_index(self.dim, i, j)],
            Greater => self.field.neg(self.upper[upper_index(self.dim, j, i)]),
            Equal => 0,
        }
    }

    /// Sets `M[i][j] = v` (and implicitly `M[j][i] = -v`); `i != j`.
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        assert_ne!(i, j, "diagonal of a skew form is zero");
        let v = v % self.field.p();
        if i < j {
            self.upper[upper_index(self.dim, i, j)] = v;
        } else {
            self.upper[upper_index(self.dim, j, i)] = self.field.neg(v);
        }
    }

    #[inline]
    fn add_upper(&mut self, i: usize, j: usize, v: u32) {
        let k = upper_index(self.dim, i, j);
        self.upper[k] = self.field.add(self.upper[k], v);
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&x| x == 0)
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.dim;
        let mut data = vec![0u32; n * n];
        self.fill_dense(&mut data);
        Matrix::from_vec(self.field, n, n, data).expect("square buffer")
    }

    fn fill_dense(&self, data: &mut [u32]) {
        let n = self.dim;
        let f = self.field;
        let mut k = 0;
        for i in 0..n {
            data[i * n + i] = 0;
            for j in i + 1..n {
                let v = self.upper[k];
                data[i * n + j] = v;
                data[j * n + i] = f.neg(v);
                k += 1;
            }
        }
    }

    /// `u^T M v`.
    pub fn eval(&self, u: &[u32], v: &[u32]) -> u32 {
        self.field.dot(u, &self.apply(v))
    }

    /// `M v`.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.dim);
        let f = self.field;
        let mut out = vec![0u32; self.dim];
        let mut k = 0;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let m = self.upper[k];
                k += 1;
                if m == 0 {
                    continue;
                }
                out[i] = f.mul_add(out[i], m, v[j]);
                out[j] = f.mul_add(out[j], f.neg(m), v[i]);
            }
        }
        out
    }

    /// Rank by Gaussian elimination; always even.
    pub fn rank(&self) -> usize {
        self.rank_capped(usize::MAX)
    }

    /// Rank, but elimination stops once it exceeds `cap` (returns `cap + 1`
    /// or more in that case). Cheap test for `rank <= cap`.
    pub fn rank_capped(&self, cap: usize) -> usize {
        let n = self.dim;
        let mut data = vec![0u32; n * n];
        self.fill_dense(&mut data);
        row_reduce(self.field, &mut data, n, n, false, cap.saturating_add(1)).len()
    }

    pub fn rank_at_most(&self, bound: usize) -> bool {
        self.rank_capped(bound) <= bound
    }

    /// Pfaffian by first-row expansion, memoized over index subsets.
    ///
    /// `Pf = sum_{t >= 1} (-1)^{t+1} M[s_0][s_t] Pf(S \ {s_0, s_t})` for the
    /// sorted remaining index set `S`; `Pf(empty) = 1`.
    pub fn pfaffian(&self) -> Result<u32> {
        if self.dim % 2 == 1 {
            return Err(Error::OddDimension(self.dim));
        }
        if self.dim > 20 {
            return Err(Error::Shape(format!(
                "pfaffian of dimension {} unsupported",
                self.dim
            )));
        }
        let full = (1u32 << self.dim) - 1;
        let mut memo = vec![u32::MAX; 1 << self.dim];
        memo[0] = 1;
        Ok(self.pf_rec(full, &mut memo))
    }

    fn pf_rec(&self, mask: u32, memo: &mut [u32]) -> u32 {
        if memo[mask as usize] != u32::MAX {
            return memo[mask as usize];
        }
        let f = self.field;
        let s0 = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << s0);
        let mut acc = 0u32;
        let mut bits = rest;
        let mut t = 1;
        while bits != 0 {
            let st = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let m = self.upper[upper_index(self.dim, s0, st)];
            if m != 0 {
                let sub = self.pf_rec(rest & !(1 << st), memo);
                let term = f.mul(m, sub);
                acc = if t % 2 == 1 {
                    f.add(acc, term)
                } else {
                    f.sub(acc, term)
                };
            }
            t += 1;
        }
        memo[mask as usize] = acc;
        acc
    }

    /// Pulls the form back along the given vectors: entry `(a, b)` is
    /// `r_a^T M r_b`.
    pub fn restrict_rows(&self, rows: &[Vec<u32>]) -> SkewForm {
        let images: Vec<Vec<u32>> = rows.iter().map(|r| self.apply(r)).collect();
        let mut out = SkewForm::zero(self.field, rows.len());
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                out.set(a, b, self.field.dot(&rows[a], &images[b]));
            }
        }
        out
    }

    /// Restriction to a subspace along its canonical basis.
    pub fn restrict(&self, s: &Subspace) -> Result<SkewForm> {
        if s.ambient() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: s.ambient(),
            });
        }
        Ok(self.restrict_rows(s.basis()))
    }

    /// `A^T M A`.
    pub fn congruence(&self, a: &Matrix) -> Result<SkewForm> {
        if a.rows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: a.rows(),
            });
        }
        let cols: Vec<Vec<u32>> = (0..a.cols()).map(|c| a.column(c)).collect();
        Ok(self.restrict_rows(&cols))
    }

    /// Radical `{v : M v = 0}`.
    pub fn kernel(&self) -> Subspace {
        crate::subspace::kernel_of(&self.to_matrix())
    }

    /// Drops the given indices (rows and columns together).
    pub fn delete(&self, drop: &[usize]) -> SkewForm {
        let keep: Vec<usize> = (0..self.dim).filter(|i| !drop.contains(i)).collect();
        let mut out = SkewForm::zero(self.field, keep.len());
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate().skip(a + 1) {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, c: u32) -> SkewForm {
        let mut out = self.clone();
        for x in &mut out.upper {
            *x = self.field.mul(*x, c);
        }
        out
    }
}

/// Number of index triples `i < j < k < n`.
pub const fn triple_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Position of the sorted triple `(i, j, k)` in lexicographic order.
pub fn triple_index(n: usize, i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k && k < n);
    // triples starting below i, then pairs (j', k') with i < j' < j, then k
    let before_i = triple_count(n) - triple_count(n - i);
    let m = n - i - 1;
    let jj = j - i - 1;
    let before_j = jj * m - jj * (jj + 1) / 2;
    before_i + before_j + (k - j - 1)
}

/// All sorted triples in lexicographic order.
pub fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(triple_count(n));
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push((i, j, k));
            }
        }
    }
    out
}

fn sort3(i: usize, j: usize, k: usize) -> Option<((usize, usize, usize), bool)> {
    if i == j || j == k || i == k {
        return None;
    }
    let mut a = [i, j, k];
    let mut odd = false;
    for x in 0..3 {
        for y in 0..2 - x {
            if a[y] > a[y + 1] {
                a.swap(y, y + 1);
                odd = !odd;
            }
        }
    }
    Some(((a[0], a[1], a[2]), odd))
}

/// An alternating trilinear form on `F_p^n` with dense lexicographic storage:
/// `sigma = sum_{i<j<k} c_ijk e_i^* ^ e_j^* ^ e_k^*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Trivector {
    field: PrimeField,
    n: usize,
    coeffs: Vec<u32>,
}

pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 10;

impl Trivector {
    pub fn zero(field: PrimeField, n: usize) -> Result<Self> {
        if n % 2 == 1 {
            return Err(Error::OddDimension(n));
        }
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::Shape(format!(
                "trivector dimension {n} outside {MIN_DIM}..={MAX_DIM}"
            )));
        }
        Ok(Self {
            field,
            n,
            coeffs: vec![0; triple_count(n)],
        })
    }

    pub fn from_coeffs(field: PrimeField, n: usize, coeffs: Vec<u32>) -> Result<Self> {
        let mut t = Self::zero(field, n)?;
        if coeffs.len() != t.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: t.coeffs.len(),
                found: coeffs.len(),
            });
        }
        t.coeffs = coeffs.into_iter().map(|c| c % field.p()).collect();
        Ok(t)
    }

    pub fn random(rng: &mut LabRng, field: PrimeField, n: usize) -> Result<Self> {
        let mut t = Self::zero(field, n)?;
        for c in &mut t.coeffs {
            *c = random_scalar(rng, field);
        }
        Ok(t)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// `sigma(e_i, e_j, e_k)` for arbitrary index order.
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        match sort3(i, j, k) {
            None => 0,
            Some(((a, b, c), odd)) => {
                let v = self.coeffs[triple_index(self.n, a, b, c)];
                if odd {
                    self.field.neg(v)
                } else {
                    v
                }
            }
        }
    }

    /// Sets the value on `(e_i, e_j, e_k)` (any order, distinct indices).
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: u32) {
        let ((a, b, c), odd) = sort3(i, j, k).expect("distinct indices");
        let v = v % self.field.p();
        self.coeffs[triple_index(self.n, a, b, c)] = if odd { self.field.neg(v) } else { v };
    }

    /// Adds `c * e_i^* ^ e_j^* ^ e_k^*`; repeated indices contribute nothing.
    pub fn add_wedge(&mut self, i: usize, j: usize, k: usize, c: u32) {
        if let Some(((a, b, d), odd)) = sort3(i, j, k) {
            let idx = triple_index(self.n, a, b, d);
            let c = if odd {
                self.field.neg(c % self.field.p())
            } else {
                c % self.field.p()
            };
            self.coeffs[idx] = self.field.add(self.coeffs[idx], c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check_len(&self, v: &[u32]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// The skew form `sigma(u, ., .)`.
    pub fn contract1(&self, u: &[u32]) -> Result<SkewForm> {
        self.check_len(u)?;
        let f = self.field;
        let n = self.n;
        let mut m = SkewForm::zero(f, n);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let c = self.coeffs[idx];
                    idx += 1;
                    if c == 0 {
                        continue;
                    }
                    // c e_i^e_j^e_k contracted with u
                    if u[i] != 0 {
                        m.add_upper(j, k, f.mul(u[i], c));
                    }
                    if u[j] != 0 {
                        m.add_upper(i, k, f.neg(f.mul(u[j], c)));
                    }
                    if u[k] != 0 {
                        m.add_upper(i, j, f.mul(u[k], c));
                    }
                }
            }
        }
        Ok(m)
    }

    /// The covector `sigma(u, v, .)`.
    pub fn contract2(&self, u: &[u32], v: &[u32]) -> Result<Vec<u32>> {
        self.check_len(v)?;
        let m = self.contract1(u)?;
        // sigma(u, v, w) = v^T M w = -(M v) . w
        Ok(m.apply(v).into_iter().map(|x| self.field.neg(x)).collect())
    }

    pub fn eval3(&self, u: &[u32], v: &[u32], w: &[u32]) -> Result<u32> {
        self.check_len(w)?;
        Ok(self.field.dot(&self.contract2(u, v)?, w))
    }

    /// `sigma(h ., h ., h .)` for a square matrix `h`.
    pub fn pullback(&self, h: &Matrix) -> Result<Trivector> {
        if h.rows() != self.n || h.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: h.rows(),
            });
        }
        let cols: Vec<Vec<u32>> = (0..self.n).map(|c| h.column(c)).collect();
        let mut out = Trivector::zero(self.field, self.n)?;
        for i in 0..self.n {
            let mi = self.contract1(&cols[i])?;
            for j in i + 1..self.n {
                let row = mi.apply(&cols[j]);
                for k in j + 1..self.n {
                    // sigma(ci, cj, ck) = cj^T M ck = -(M cj) . ck
                    let v = self.field.neg(self.field.dot(&row, &cols[k]));
                    out.coeffs[triple_index(self.n, i, j, k)] = v;
                }
            }
        }
        Ok(out)
    }

    /// `(g . sigma)(u, v, w) = sigma(g^{-1} u, g^{-1} v, g^{-1} w)`.
    pub fn gl_act(&self, g: &Matrix) -> Result<Trivector> {
        self.pullback(&g.inverse()?)
    }

    /// Rank of `sigma(u, ., .)`.
    pub fn contraction_rank(&self, u: &[u32]) -> Result<usize> {
        Ok(self.contract1(u)?.rank())
    }
}

/// Fast test of `rank sigma(u, ., .) <= bound` for exhaustive scans.
///
/// Rank at most `bound` forces every principal `(bound + 2)`-Pfaffian to
/// vanish, so a few of those are checked first and full elimination only runs
/// on the points that survive them.
pub struct ContractionRankTest<'a> {
    sigma: &'a Trivector,
    bound: usize,
    /// Per filter: its size and, for each pair `a < b`, the coefficients
    /// `sigma(e_i, e_{s_a}, e_{s_b})` over `i`.
    filters: Vec<(usize, Vec<Vec<u32>>)>,
}

impl<'a> ContractionRankTest<'a> {
    pub fn new(sigma: &'a Trivector, bound: usize) -> Self {
        let n = sigma.n();
        let size = bound + 2;
        let mut filters = Vec::new();
        if size <= 8 && size < n {
            // windows starting at 0, at the end, and one interleaved set
            filters.push((0..size).collect());
            filters.push((n - size..n).collect());
            let mut mixed: Vec<usize> = (0..size / 2).chain(n - size / 2..n).collect();
            mixed.sort_unstable();
            filters.push(mixed);
            filters.dedup();
        }
        let filters = filters
            .into_iter()
            .map(|set: Vec<usize>| {
                let mut rows = Vec::new();
                for a in 0..size {
                    for b in a + 1..size {
                        rows.push((0..n).map(|i| sigma.get(i, set[a], set[b])).collect());
                    }
                }
                (size, rows)
            })
            .collect();
        Self {
            sigma,
            bound,
            filters,
        }
    }

    pub fn rank_at_most(&self, u: &[u32]) -> bool {
        let f = self.sigma.field();
        let mut entries = [0u32; 64];
        for (k, rows) in &self.filters {
            let k = *k;
            let mut r = 0;
            for a in 0..k {
                for b in a + 1..k {
                    let row = &rows[r];
                    r += 1;
                    entries[a * 8 + b] = f.dot(row, u);
                }
            }
            let mask = (1u32 << k) - 1;
            if small_pfaffian(f, &entries, mask) != 0 {
                return false;
            }
        }
        self.sigma
            .contract1(u)
            .expect("length n")
            .rank_at_most(self.bound)
    }
}

/// Pfaffian of the principal minor on `mask`, entries at `[a * 8 + b]`, `a < b`.
fn small_pfaffian(f: PrimeField, m: &[u32; 64], mask: u32) -> u32 {
    if mask == 0 {
        return 1;
    }
    let s0 = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << s0);
    let mut bits = rest;
    let mut acc = 0u32;
    let mut t = 1;
    while bits != 0 {
        let st = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let e = m[s0 * 8 + st];
        if e != 0 {
            let term = f.mul(e, small_pfaffian(f, m, rest & !(1 << st)));
            acc = if t % 2 == 1 {
                f.add(acc, term)
            } else {
                f.sub(acc, term)
            };
        }
        t += 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_vector, rng_from_seed};

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn e(n: usize, i: usize) -> Vec<u32> {
        crate::subspace::unit(n, i)
    }

    #[test]
    fn triple_indexing_is_lexicographic() {
        for n in 3..=10 {
            for (pos, &(i, j, k)) in triples(n).iter().enumerate() {
                assert_eq!(triple_index(n, i, j, k), pos);
            }
        }
        assert_eq!(triple_count(10), 120);
    }

    #[test]
    fn small_pfaffians() {
        let fld = f(101);
        let mut m = SkewForm::zero(fld, 2);
        m.set(0, 1, 7);
        assert_eq!(m.pfaffian().unwrap(), 7);
        assert_eq!(SkewForm::standard_symplectic(fld, 4).pfaffian().unwrap(), 1);
        assert_eq!(SkewForm::zero(fld, 0).pfaffian().unwrap(), 1);
        assert!(matches!(
            SkewForm::zero(fld, 3).pfaffian(),
            Err(Error::OddDimension(3))
        ));
        // Pf of 4x4 = m01 m23 - m02 m13 + m03 m12
        let mut m = SkewForm::zero(fld, 4);
        for (i, j, v) in [
            (0, 1, 2),
            (0, 2, 3),
            (0, 3, 5),
            (1, 2, 7),
            (1, 3, 11),
            (2, 3, 13),
        ] {
            m.set(i, j, v);
        }
        assert_eq!(m.pfaffian().unwrap(), fld.from_i64(2 * 13 - 3 * 11 + 5 * 7));
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut rng = rng_from_seed(12);
        for p in [7, 101] {
            let fld = f(p);
            for dim in (2..=10).step_by(2) {
                for _ in 0..100 {
                    let m = SkewForm::random(&mut rng, fld, dim);
                    let pf = m.pfaffian().unwrap();
                    assert_eq!(fld.mul(pf, pf), m.to_matrix().determinant().unwrap());
                }
            }
        }
    }

    #[test]
    fn rank_examples() {
        let fld = f(7);
        assert_eq!(SkewForm::zero(fld, 6).rank(), 0);
        for k in 1..5 {
            assert_eq!(SkewForm::standard_symplectic(fld, 2 * k).rank(), 2 * k);
        }
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            let m = SkewForm::random(&mut rng, fld, 7);
            let r = m.rank();
            assert_eq!(r % 2, 0);
            assert_eq!(r, m.to_matrix().rank());
            assert_eq!(m.rank_at_most(4), r <= 4);
        }
    }

    #[test]
    fn restriction_rank_bounds() {
        let mut rng = rng_from_seed(8);
        let fld = f(101);
        let sigma = Trivector::random(&mut rng, fld, 10).unwrap();
        for _ in 0..50 {
            let u = random_vector(&mut rng, fld, 10);
            let m = sigma.contract1(&u).unwrap();
            let s = crate::subspace::sample_subspace(&mut rng, fld, 10, 4);
            let r = m.restrict(&s).unwrap();
            assert!(r.rank().is_multiple_of(2) && r.rank() <= 4.min(m.rank()));
            assert!(m.restrict(&m.kernel()).unwrap().is_zero());
            assert_eq!(m.restrict(&Subspace::full(fld, 10)).unwrap(), m);
        }
    }

    #[test]
    fn contraction_examples() {
        let fld = f(7);
        let mut sigma = Trivector::zero(fld, 6).unwrap();
        sigma.set(0, 1, 2, 1);
        assert_eq!(sigma.eval3(&e(6, 0), &e(6, 1), &e(6, 2)).unwrap(), 1);
        assert_eq!(sigma.eval3(&e(6, 1), &e(6, 0), &e(6, 2)).unwrap(), 6);
        let m = sigma.contract1(&e(6, 0)).unwrap();
        assert_eq!(m.get(1, 2), 1);
        assert_eq!(m.rank(), 2);
        assert!(sigma.contract1(&[0; 6]).unwrap().is_zero());
        assert_eq!(sigma.contract2(&e(6, 0), &e(6, 1)).unwrap(), e(6, 2));
        assert!(sigma.contract1(&[0; 5]).is_err());
    }

    #[test]
    fn contractions_match_evaluation() {
        let mut rng = rng_from_seed(21);
        let fld = f(101);
        let sigma = Trivector::random(&mut rng, fld, 10).unwrap();
        for _ in 0..100 {
            let u = random_vector(&mut rng, fld, 10);
            let v = random_vector(&mut rng, fld, 10);
            let w = random_vector(&mut rng, fld, 10);
            let x = sigma.eval3(&u, &v, &w).unwrap();
            assert_eq!(sigma.eval3(&v, &u, &w).unwrap(), fld.neg(x));
            assert_eq!(sigma.eval3(&v, &w, &u).unwrap(), x);
            assert_eq!(sigma.eval3(&u, &u, &w).unwrap(), 0);
            assert_eq!(sigma.contract1(&u).unwrap().eval(&v, &w), x);
            assert!(sigma
                .contract1(&u)
                .unwrap()
                .apply(&u)
                .iter()
                .all(|&c| c == 0));
            // brute-force oracle: sum over all ordered index triples
            let mut brute = 0u32;
            for a in 0..10 {
                for b in 0..10 {
                    for c in 0..10 {
                        let t = fld.mul(fld.mul(u[a], v[b]), w[c]);
                        brute = fld.add(brute, fld.mul(sigma.get(a, b, c), t));
                    }
                }
            }
            assert_eq!(brute, x);
        }
    }

    #[test]
    fn gl_action_composes() {
        let mut rng = rng_from_seed(5);
        let fld = f(101);
        let sigma = Trivector::random(&mut rng, fld, 8).unwrap();
        assert_eq!(sigma.gl_act(&Matrix::identity(fld, 8)).unwrap(), sigma);
        let g = Matrix::random_invertible(&mut rng, fld, 8);
        let h = Matrix::random_invertible(&mut rng, fld, 8);
        let lhs = sigma.gl_act(&h).unwrap().gl_act(&g).unwrap();
        let rhs = sigma.gl_act(&g.mul(&h).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let gs = sigma.gl_act(&g).unwrap();
        for _ in 0..50 {
            let u = random_vector(&mut rng, fld, 8);
            let v = random_vector(&mut rng, fld, 8);
            let w = random_vector(&mut rng, fld, 8);
            let (gu, gv, gw) = (
                g.mul_vec(&u).unwrap(),
                g.mul_vec(&v).unwrap(),
                g.mul_vec(&w).unwrap(),
            );
            assert_eq!(
                gs.eval3(&gu, &gv, &gw).unwrap(),
                sigma.eval3(&u, &v, &w).unwrap()
            );
            assert_eq!(
                gs.contraction_rank(&gu).unwrap(),
                sigma.contraction_rank(&u).unwrap()
            );
        }
        let singular = Matrix::zeros(fld, 8, 8);
        assert!(sigma.gl_act(&singular).is_err());
    }

    #[test]
    fn filtered_rank_test_agrees_with_elimination() {
        let mut rng = rng_from_seed(17);
        let fld = f(3);
        for n in [6, 8, 10] {
            let sigma = Trivector::random(&mut rng, fld, n).unwrap();
            for bound in [2, 4, 6] {
                let fast = ContractionRankTest::new(&sigma, bound);
                for _ in 0..300 {
                    let u = random_vector(&mut rng, fld, n);
                    assert_eq!(
                        fast.rank_at_most(&u),
                        sigma.contraction_rank(&u).unwrap() <= bound
                    );
                }
            }
        }
    }

    #[test]
    fn congruence_preserves_rank() {
        let mut rng = rng_from_seed(6);
        let fld = f(11);
        for _ in 0..100 {
            let m = SkewForm::random(&mut rng, fld, 6);
            let a = Matrix::random_invertible(&mut rng, fld, 6);
            let c = m.congruence(&a).unwrap();
            assert_eq!(c.rank(), m.rank());
            // Pf(A^T M A) = det(A) Pf(M)
            let det = a.determinant().unwrap();
            assert_eq!(c.pfaffian().unwrap(), fld.mul(det, m.pfaffian().unwrap()));
        }
    }
}
