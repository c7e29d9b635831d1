//! Linear subspaces in canonical (RREF) form, flags and quotient coordinates.

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::{row_reduce, Matrix};
use crate::rng::{random_scalar, LabRng};

/// A subspace of `F_p^ambient` stored by its reduced row-echelon basis.
///
/// Two subspaces are equal as sets iff their bases are identical, so the
/// derived `PartialEq` is set equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subspace {
    field: PrimeField,
    ambient: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: PrimeField, ambient: usize) -> Self {
        Self {
            field,
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: PrimeField, ambient: usize) -> Self {
        let basis = (0..ambient).map(|i| unit(ambient, i)).collect();
        Self {
            field,
            ambient,
            basis,
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of the given vectors (any number, possibly dependent).
    pub fn span(field: PrimeField, ambient: usize, vectors: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(vectors.len() * ambient);
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: v.len(),
                });
            }
            data.extend(v.iter().map(|&x| x % field.p()));
        }
        let pivots = row_reduce(field, &mut data, vectors.len(), ambient, true, usize::MAX);
        let basis = data
            .chunks(ambient.max(1))
            .take(pivots.len())
            .map(<[u32]>::to_vec)
            .collect();
        Ok(Self {
            field,
            ambient,
            basis,
            pivots,
        })
    }

    /// Span of the standard basis vectors at the given indices.
    pub fn coordinate(field: PrimeField, ambient: usize, indices: &[usize]) -> Self {
        let vs: Vec<Vec<u32>> = indices.iter().map(|&i| unit(ambient, i)).collect();
        Self::span(field, ambient, &vs).expect("unit vectors have ambient length")
    }

    pub fn row_space(m: &Matrix) -> Self {
        Self::span(m.field(), m.cols(), &m.row_vecs()).expect("rows have matrix width")
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }
    #[inline]
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_matrix(&self) -> Matrix {
        Matrix::from_rows(self.field, self.ambient, &self.basis).expect("basis rows are consistent")
    }

    /// Non-pivot columns; the standard vectors there span the canonical complement.
    pub fn complement_pivots(&self) -> Vec<usize> {
        (0..self.ambient)
            .filter(|c| !self.pivots.contains(c))
            .collect()
    }

    /// Reduces `v` by the basis so its pivot entries become zero.
    pub fn reduce(&self, v: &[u32]) -> Result<Vec<u32>> {
        self.check_len(v.len())?;
        let f = self.field;
        let mut out: Vec<u32> = v.iter().map(|&x| x % f.p()).collect();
        for (row, &c) in self.basis.iter().zip(&self.pivots) {
            let factor = out[c];
            if factor == 0 {
                continue;
            }
            let neg = f.neg(factor);
            for (o, &r) in out.iter_mut().zip(row).skip(c) {
                if r != 0 {
                    *o = f.mul_add(*o, neg, r);
                }
            }
        }
        Ok(out)
    }

    pub fn contains(&self, v: &[u32]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|&x| x == 0))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check_same(other)?;
        for b in &other.basis {
            if !self.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coordinates of `v` in this basis; `None` if `v` is not in the subspace.
    pub fn coords_in_basis(&self, v: &[u32]) -> Result<Option<Vec<u32>>> {
        if !self.contains(v)? {
            return Ok(None);
        }
        Ok(Some(
            self.pivots.iter().map(|&c| v[c] % self.field.p()).collect(),
        ))
    }

    /// Linear combination of the basis rows.
    pub fn combine(&self, coeffs: &[u32]) -> Vec<u32> {
        combine(self.field, &self.basis, coeffs, self.ambient)
    }

    /// `{w : <w, b> = 0 for all basis vectors b}` under the standard pairing.
    pub fn annihilator(&self) -> Subspace {
        kernel_of(&self.basis_matrix())
    }

    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same(other)?;
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Subspace::span(self.field, self.ambient, &vs)
    }

    pub fn meet(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same(other)?;
        Ok(self.annihilator().join(&other.annihilator())?.annihilator())
    }

    /// Image under `g` acting on column vectors.
    pub fn image(&self, g: &Matrix) -> Result<Subspace> {
        if g.cols() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: g.cols(),
            });
        }
        let vs = self
            .basis
            .iter()
            .map(|b| g.mul_vec(b))
            .collect::<Result<Vec<_>>>()?;
        Subspace::span(self.field, g.rows(), &vs)
    }

    /// Canonical lifts of a basis of `self / small`: the rows of `self`'s
    /// basis at positions not hit by `small` in `self`'s pivot coordinates.
    pub fn quotient_basis(&self, small: &Subspace) -> Result<Vec<Vec<u32>>> {
        if !self.contains_subspace(small)? {
            return Err(Error::Shape(
                "quotient by a subspace that is not contained".into(),
            ));
        }
        let coords: Vec<Vec<u32>> = small
            .basis
            .iter()
            .map(|b| self.pivots.iter().map(|&c| b[c]).collect())
            .collect();
        let inner = Subspace::span(self.field, self.dim(), &coords)?;
        Ok(inner
            .complement_pivots()
            .into_iter()
            .map(|i| self.basis[i].clone())
            .collect())
    }

    /// Coordinates of `v mod small` on the lifts returned by
    /// [`Subspace::quotient_basis`]. `None` when `v` is not in `self`.
    pub fn coords_mod(&self, small: &Subspace, v: &[u32]) -> Result<Option<Vec<u32>>> {
        let Some(d) = self.coords_in_basis(v)? else {
            return Ok(None);
        };
        let coords: Vec<Vec<u32>> = small
            .basis
            .iter()
            .map(|b| self.pivots.iter().map(|&c| b[c]).collect())
            .collect();
        let inner = Subspace::span(self.field, self.dim(), &coords)?;
        Ok(Some(quotient_coords(
            &d,
            &inner,
            &inner.complement_pivots(),
        )?))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: len,
            });
        }
        Ok(())
    }

    fn check_same(&self, other: &Subspace) -> Result<()> {
        if other.ambient != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: other.ambient,
            });
        }
        Ok(())
    }
}

pub fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

pub fn combine(field: PrimeField, rows: &[Vec<u32>], coeffs: &[u32], n: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    for (row, &c) in rows.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (o, &r) in out.iter_mut().zip(row) {
            *o = field.mul_add(*o, c, r);
        }
    }
    out
}

/// Null space `{v : m v = 0}` in canonical form.
pub fn kernel_of(m: &Matrix) -> Subspace {
    let (rref, pivots) = m.rref_with_pivots();
    let f = m.field();
    let cols = m.cols();
    let vs: Vec<Vec<u32>> = (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|fc| {
            let mut v = vec![0u32; cols];
            v[fc] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = f.neg(rref.get(r, fc));
            }
            v
        })
        .collect();
    Subspace::span(f, cols, &vs).expect("kernel vectors have matrix width")
}

/// Coordinates of `v mod w` on the canonical complement at `complement_pivots`.
pub fn quotient_coords(v: &[u32], w: &Subspace, complement_pivots: &[usize]) -> Result<Vec<u32>> {
    if complement_pivots.len() + w.dim() != w.ambient() {
        return Err(Error::Shape("complement does not match subspace".into()));
    }
    let r = w.reduce(v)?;
    Ok(complement_pivots.iter().map(|&c| r[c]).collect())
}

/// An ascending chain of subspaces, each strictly containing the previous.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Flag {
    spaces: Vec<Subspace>,
}

impl Flag {
    pub fn new(spaces: Vec<Subspace>) -> Result<Self> {
        for pair in spaces.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.ambient() != b.ambient() {
                return Err(Error::DimensionMismatch {
                    expected: a.ambient(),
                    found: b.ambient(),
                });
            }
            if a.dim() >= b.dim() || !b.contains_subspace(a)? {
                return Err(Error::Shape(
                    "flag spaces must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { spaces })
    }

    pub fn spaces(&self) -> &[Subspace] {
        &self.spaces
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(Subspace::dim).collect()
    }

    pub fn image(&self, g: &Matrix) -> Result<Flag> {
        Flag::new(
            self.spaces
                .iter()
                .map(|s| s.image(g))
                .collect::<Result<_>>()?,
        )
    }
}

/// Uniform random subspace of the given dimension.
pub fn sample_subspace(
    rng: &mut LabRng,
    field: PrimeField,
    ambient: usize,
    dim: usize,
) -> Subspace {
    assert!(dim <= ambient, "dimension {dim} exceeds ambient {ambient}");
    loop {
        let vs: Vec<Vec<u32>> = (0..dim)
            .map(|_| (0..ambient).map(|_| random_scalar(rng, field)).collect())
            .collect();
        let s = Subspace::span(field, ambient, &vs).expect("sampled vectors have ambient length");
        if s.dim() == dim {
            return s;
        }
    }
}

/// Uniform random subspace of dimension `dim` containing `inner`.
pub fn sample_superspace(rng: &mut LabRng, inner: &Subspace, dim: usize) -> Subspace {
    assert!(inner.dim() <= dim && dim <= inner.ambient());
    let comp = inner.complement_pivots();
    let q = sample_subspace(rng, inner.field(), comp.len(), dim - inner.dim());
    let mut vs = inner.basis().to_vec();
    for b in q.basis() {
        let mut v = vec![0; inner.ambient()];
        for (&c, &x) in comp.iter().zip(b) {
            v[c] = x;
        }
        vs.push(v);
    }
    Subspace::span(inner.field(), inner.ambient(), &vs).expect("consistent lengths")
}

pub fn sample_gl(rng: &mut LabRng, field: PrimeField, n: usize) -> Matrix {
    Matrix::random_invertible(rng, field, n)
}

/// All subspaces of dimension `k` in `F_p^n`, in RREF lexicographic order.
pub fn enumerate_grassmannian(field: PrimeField, n: usize, k: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(k);
    choose_pivots(field, n, k, 0, &mut pivots, &mut out);
    out
}

fn choose_pivots(
    field: PrimeField,
    n: usize,
    k: usize,
    start: usize,
    pivots: &mut Vec<usize>,
    out: &mut Vec<Subspace>,
) {
    if pivots.len() == k {
        fill_free_entries(field, n, pivots, out);
        return;
    }
    for c in start..n {
        pivots.push(c);
        choose_pivots(field, n, k, c + 1, pivots, out);
        pivots.pop();
    }
}

fn fill_free_entries(field: PrimeField, n: usize, pivots: &[usize], out: &mut Vec<Subspace>) {
    // free slots: row r, column c > pivots[r] with c not a pivot
    let slots: Vec<(usize, usize)> = pivots
        .iter()
        .enumerate()
        .flat_map(|(r, &pc)| {
            (pc + 1..n)
                .filter(|c| !pivots.contains(c))
                .map(move |c| (r, c))
        })
        .collect();
    let p = field.p() as u64;
    let total = p.pow(slots.len() as u32);
    for idx in 0..total {
        let mut basis: Vec<Vec<u32>> = pivots.iter().map(|&c| unit(n, c)).collect();
        let mut x = idx;
        for &(r, c) in &slots {
            basis[r][c] = (x % p) as u32;
            x /= p;
        }
        out.push(Subspace {
            field,
            ambient: n,
            basis,
            pivots: pivots.to_vec(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let fld = f(7);
        assert_eq!(kernel_of(&Matrix::zeros(fld, 4, 4)), Subspace::full(fld, 4));
        assert_eq!(kernel_of(&Matrix::identity(fld, 5)), Subspace::zero(fld, 5));
        let mut rng = rng_from_seed(1);
        let fld = f(101);
        let m = Matrix::random(&mut rng, fld, 6, 10);
        let k = kernel_of(&m);
        assert_eq!(k.dim() + m.rank(), 10);
        for b in k.basis() {
            assert!(m.mul_vec(b).unwrap().iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn meet_join_small() {
        let fld = f(5);
        let a = Subspace::coordinate(fld, 10, &[0]);
        let b = Subspace::coordinate(fld, 10, &[1]);
        assert_eq!(a.meet(&b).unwrap(), Subspace::zero(fld, 10));
        assert_eq!(a.join(&b).unwrap(), Subspace::coordinate(fld, 10, &[0, 1]));
        assert_eq!(a.meet(&a).unwrap(), a);
        assert_eq!(a.join(&a).unwrap(), a);
    }

    #[test]
    fn modular_law_on_random_pairs() {
        let mut rng = rng_from_seed(2);
        let fld = f(101);
        for i in 0..200 {
            let a = sample_subspace(&mut rng, fld, 10, 4);
            // force nontrivial intersections half of the time
            let b = if i % 2 == 0 {
                sample_subspace(&mut rng, fld, 10, 7)
            } else {
                let c = sample_subspace(&mut rng, fld, 10, 8);
                sample_superspace(&mut rng, &a.meet(&c).unwrap(), 7)
            };
            let m = a.meet(&b).unwrap();
            let j = a.join(&b).unwrap();
            assert_eq!(a.dim() + b.dim(), m.dim() + j.dim());
            assert!(a.contains_subspace(&m).unwrap() && b.contains_subspace(&m).unwrap());
        }
    }

    #[test]
    fn quotient_coordinate_examples() {
        let fld = f(7);
        let w = Subspace::coordinate(fld, 4, &[0]);
        let comp = w.complement_pivots();
        assert_eq!(comp, vec![1, 2, 3]);
        assert_eq!(
            quotient_coords(&[1, 0, 0, 1], &w, &comp).unwrap(),
            vec![0, 0, 1]
        );
        assert_eq!(
            quotient_coords(&[3, 0, 0, 0], &w, &comp).unwrap(),
            vec![0, 0, 0]
        );
        let z = Subspace::zero(fld, 4);
        assert_eq!(
            quotient_coords(&[1, 2, 3, 4], &z, &[0, 1, 2, 3]).unwrap(),
            vec![1, 2, 3, 4]
        );
        assert!(quotient_coords(&[1, 2], &w, &comp).is_err());
    }

    #[test]
    fn quotient_basis_completes_the_small_space() {
        let mut rng = rng_from_seed(9);
        let fld = f(7);
        for _ in 0..50 {
            let small = sample_subspace(&mut rng, fld, 10, 3);
            let big = sample_superspace(&mut rng, &small, 7);
            let q = big.quotient_basis(&small).unwrap();
            assert_eq!(q.len(), 4);
            let mut vs = small.basis().to_vec();
            vs.extend(q);
            assert_eq!(Subspace::span(fld, 10, &vs).unwrap(), big);
        }
    }

    #[test]
    fn sampling_extremes() {
        let mut rng = rng_from_seed(4);
        let fld = f(3);
        assert_eq!(sample_subspace(&mut rng, fld, 5, 0), Subspace::zero(fld, 5));
        assert_eq!(sample_subspace(&mut rng, fld, 5, 5), Subspace::full(fld, 5));
    }

    #[test]
    fn grassmannian_counts() {
        assert_eq!(enumerate_grassmannian(f(3), 4, 2).len(), 130);
        assert_eq!(enumerate_grassmannian(f(5), 4, 2).len(), 806);
        assert_eq!(enumerate_grassmannian(f(3), 3, 1).len(), 13);
        for s in enumerate_grassmannian(f(3), 4, 2) {
            let again = Subspace::span(s.field(), 4, s.basis()).unwrap();
            assert_eq!(again, s);
        }
    }

    #[test]
    fn subspace_sampling_is_uniform_on_gr_2_4_f3() {
        let fld = f(3);
        let points = enumerate_grassmannian(fld, 4, 2);
        let mut counts = std::collections::HashMap::new();
        let mut rng = rng_from_seed(77);
        let n = 10_000;
        for _ in 0..n {
            *counts
                .entry(sample_subspace(&mut rng, fld, 4, 2))
                .or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 130);
        let mean = n as f64 / 130.0;
        let sd = (mean * (1.0 - 1.0 / 130.0)).sqrt();
        for pt in &points {
            let c = counts[pt] as f64;
            assert!((c - mean).abs() < 5.0 * sd, "{c} vs {mean}");
        }
    }

    #[test]
    fn flag_rejects_non_nested() {
        let fld = f(5);
        let a = Subspace::coordinate(fld, 4, &[0]);
        let b = Subspace::coordinate(fld, 4, &[1, 2]);
        assert!(Flag::new(vec![a.clone(), b]).is_err());
        assert!(Flag::new(vec![a.clone(), a.clone()]).is_err());
        assert!(Flag::new(vec![a, Subspace::coordinate(fld, 4, &[0, 3])]).is_ok());
    }
}
