//! Dense matrices over a prime field and Gaussian elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::rng::{random_scalar, LabRng};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Matrix {}x{} over F_{}",
            self.rows,
            self.cols,
            self.field.p()
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// In-place row reduction of a `rows x cols` row-major buffer.
///
/// Brings the buffer to reduced row-echelon form when `full` is set, otherwise
/// to a (non-normalized above the pivot) echelon form, and returns the pivot
/// columns. Stops early once `stop_at` pivots have been found.
pub fn row_reduce(
    field: PrimeField,
    data: &mut [u32],
    rows: usize,
    cols: usize,
    full: bool,
    stop_at: usize,
) -> Vec<usize> {
    let p = field.p() as u64;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows || pivots.len() >= stop_at {
            break;
        }
        let Some(found) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if found != r {
            for k in 0..cols {
                data.swap(found * cols + k, r * cols + k);
            }
        }
        let inv = field.inv(data[r * cols + c]).expect("nonzero pivot") as u64;
        for k in c..cols {
            data[r * cols + k] = ((data[r * cols + k] as u64 * inv) % p) as u32;
        }
        let start = if full { 0 } else { r + 1 };
        for i in start..rows {
            if i == r {
                continue;
            }
            let factor = data[i * cols + c] as u64;
            if factor == 0 {
                continue;
            }
            let neg = p - factor;
            for k in c..cols {
                let pk = data[r * cols + k] as u64;
                if pk != 0 {
                    data[i * cols + k] = ((data[i * cols + k] as u64 + neg * pk) % p) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major data, reducing entries mod p.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let p = field.p();
        let data = data.into_iter().map(|x| x % p).collect();
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Rows given as signed integers, reduced mod p.
    pub fn from_rows_i64(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| field.from_i64(x)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_rows(field: PrimeField, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| x % field.p()));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn random(rng: &mut LabRng, field: PrimeField, rows: usize, cols: usize) -> Self {
        let data = (0..rows * cols)
            .map(|_| random_scalar(rng, field))
            .collect();
        Self {
            field,
            rows,
            cols,
            data,
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.p();
    }
    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        let ot = other.transpose();
        for r in 0..self.rows {
            for c in 0..other.cols {
                out.data[r * other.cols + c] = f.dot(self.row(r), ot.row(c));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.field.dot(self.row(r), v))
            .collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Reduced row-echelon form (same shape, zero rows last) and the rank.
    pub fn canonicalize(&self) -> (Matrix, usize) {
        let mut m = self.clone();
        let pivots = row_reduce(self.field, &mut m.data, m.rows, m.cols, true, usize::MAX);
        (m, pivots.len())
    }

    /// RREF together with its pivot columns.
    pub fn rref_with_pivots(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = row_reduce(self.field, &mut m.data, m.rows, m.cols, true, usize::MAX);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        let mut d = self.data.clone();
        row_reduce(self.field, &mut d, self.rows, self.cols, false, usize::MAX).len()
    }

    pub fn determinant(&self) -> Result<u32> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!(
                "determinant of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let f = self.field;
        let n = self.rows;
        let mut d = self.data.clone();
        let mut det = 1u32;
        for c in 0..n {
            let Some(found) = (c..n).find(|&i| d[i * n + c] != 0) else {
                return Ok(0);
            };
            if found != c {
                for k in 0..n {
                    d.swap(found * n + k, c * n + k);
                }
                det = f.neg(det);
            }
            let piv = d[c * n + c];
            det = f.mul(det, piv);
            let inv = f.inv(piv).expect("nonzero pivot");
            for i in c + 1..n {
                let factor = f.mul(d[i * n + c], inv);
                if factor == 0 {
                    continue;
                }
                for k in c..n {
                    d[i * n + k] = f.sub(d[i * n + k], f.mul(factor, d[c * n + k]));
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!(
                "inverse of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = vec![0u32; n * 2 * n];
        for r in 0..n {
            aug[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug[r * 2 * n + n + r] = 1;
        }
        let pivots = row_reduce(self.field, &mut aug, n, 2 * n, true, usize::MAX);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        let mut inv = Matrix::zeros(self.field, n, n);
        for r in 0..n {
            inv.data[r * n..(r + 1) * n].copy_from_slice(&aug[r * 2 * n + n..(r + 1) * 2 * n]);
        }
        Ok(inv)
    }

    /// Uniformly random invertible `n x n` matrix (rejection sampling).
    pub fn random_invertible(rng: &mut LabRng, field: PrimeField, n: usize) -> Matrix {
        loop {
            let m = Matrix::random(rng, field, n, n);
            if m.rank() == n {
                return m;
            }
        }
    }
}

/// A particular solution and a basis of the directions, or `None` for an
/// empty solution set.
pub type AffineSolution = Option<(Vec<u32>, Vec<Vec<u32>>)>;

/// Solves `A x = b`.
pub fn solve_affine(a: &Matrix, b: &[u32]) -> Result<AffineSolution> {
    let (rows, cols) = (a.rows(), a.cols());
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: b.len(),
        });
    }
    let f = a.field();
    let w = cols + 1;
    let mut aug = vec![0u32; rows * w];
    for r in 0..rows {
        aug[r * w..r * w + cols].copy_from_slice(a.row(r));
        aug[r * w + cols] = b[r];
    }
    let pivots = row_reduce(f, &mut aug, rows, w, true, usize::MAX);
    if pivots.last() == Some(&cols) {
        return Ok(None);
    }
    let mut particular = vec![0u32; cols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[r * w + cols];
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = vec![0u32; cols];
            v[fc] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = f.neg(aug[r * w + fc]);
            }
            v
        })
        .collect();
    Ok(Some((particular, kernel)))
}
