//! Polynomials over `F_p`: dense homogeneous forms (with interpolation) and
//! sparse polynomials for symbolic expansions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::{solve_affine, Matrix};

/// Exponent vectors of the degree-`degree` monomials in `nvars` variables,
/// in graded-lex order (`x0^d` first).
pub fn monomials(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(nvars: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, degree, &mut Vec::with_capacity(nvars), &mut out);
    out
}

fn monomial_value(field: PrimeField, exps: &[u8], x: &[u32]) -> u32 {
    exps.iter()
        .zip(x)
        .fold(1, |acc, (&e, &xi)| field.mul(acc, field.pow(xi, e as u64)))
}

/// A homogeneous form with dense coefficients over [`monomials`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousForm {
    field: PrimeField,
    nvars: usize,
    degree: usize,
    monomials: Vec<Vec<u8>>,
    coeffs: Vec<u32>,
}

impl HomogeneousForm {
    pub fn new(field: PrimeField, nvars: usize, degree: usize, coeffs: Vec<u32>) -> Result<Self> {
        let monomials = monomials(nvars, degree);
        if coeffs.len() != monomials.len() {
            return Err(Error::DimensionMismatch {
                expected: monomials.len(),
                found: coeffs.len(),
            });
        }
        let coeffs = coeffs.into_iter().map(|c| c % field.p()).collect();
        Ok(Self {
            field,
            nvars,
            degree,
            monomials,
            coeffs,
        })
    }

    pub fn zero(field: PrimeField, nvars: usize, degree: usize) -> Self {
        let n = monomials(nvars, degree).len();
        Self::new(field, nvars, degree, vec![0; n]).expect("matching length")
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u8]) -> u32 {
        self.monomials
            .iter()
            .position(|m| m == exps)
            .map_or(0, |i| self.coeffs[i])
    }

    pub fn eval(&self, x: &[u32]) -> u32 {
        assert_eq!(x.len(), self.nvars);
        let f = self.field;
        self.monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0)
            .fold(0, |acc, (m, &c)| f.mul_add(acc, c, monomial_value(f, m, x)))
    }

    /// Formal partial derivatives evaluated at `x`.
    pub fn gradient(&self, x: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut grad = vec![0u32; self.nvars];
        for (m, &c) in self.monomials.iter().zip(&self.coeffs) {
            if c == 0 {
                continue;
            }
            for (i, g) in grad.iter_mut().enumerate() {
                if m[i] == 0 {
                    continue;
                }
                let mut d = m.clone();
                d[i] -= 1;
                let term = f.mul(f.mul(c, m[i] as u32 % f.p()), monomial_value(f, &d, x));
                *g = f.add(*g, term);
            }
        }
        grad
    }

    /// The unique form of this shape through the given node values; every
    /// node takes part, so extra nodes double as consistency checks.
    pub fn interpolate(
        field: PrimeField,
        nvars: usize,
        degree: usize,
        nodes: &[Vec<u32>],
        values: &[u32],
    ) -> Result<Self> {
        let mons = monomials(nvars, degree);
        if nodes.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: values.len(),
            });
        }
        let data: Vec<u32> = nodes
            .iter()
            .flat_map(|x| {
                mons.iter()
                    .map(|m| monomial_value(field, m, x))
                    .collect::<Vec<_>>()
            })
            .collect();
        let system = Matrix::from_vec(field, nodes.len(), mons.len(), data)?;
        match solve_affine(&system, values)? {
            None => Err(Error::Interpolation(
                "node values are not those of a single form".into(),
            )),
            Some((_, kernel)) if !kernel.is_empty() => Err(Error::Interpolation(format!(
                "nodes leave {} coefficients undetermined",
                kernel.len()
            ))),
            Some((coeffs, _)) => Self::new(field, nvars, degree, coeffs),
        }
    }

    /// Symmetric Gram matrix of a quadratic form: `q(x) = x^T Q x`.
    pub fn symmetric_matrix(&self) -> Result<Matrix> {
        if self.degree != 2 {
            return Err(Error::Shape(format!(
                "Gram matrix of a degree-{} form",
                self.degree
            )));
        }
        let f = self.field;
        let half = f.inv(2).expect("odd characteristic");
        let mut q = Matrix::zeros(f, self.nvars, self.nvars);
        for (m, &c) in self.monomials.iter().zip(&self.coeffs) {
            let idx: Vec<usize> = (0..self.nvars)
                .flat_map(|i| std::iter::repeat_n(i, m[i] as usize))
                .collect();
            let (a, b) = (idx[0], idx[1]);
            if a == b {
                q.set(a, a, c);
            } else {
                q.set(a, b, f.mul(c, half));
                q.set(b, a, f.mul(c, half));
            }
        }
        Ok(q)
    }

    pub fn linear_combination(&self, a: u32, other: &HomogeneousForm, b: u32) -> HomogeneousForm {
        assert_eq!((self.nvars, self.degree), (other.nvars, other.degree));
        let f = self.field;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| f.add(f.mul(a, x), f.mul(b, y)))
            .collect();
        HomogeneousForm {
            coeffs,
            ..self.clone()
        }
    }
}

/// A sparse polynomial in `nvars` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    field: PrimeField,
    nvars: usize,
    terms: BTreeMap<Vec<u8>, u32>,
}

impl SparsePoly {
    pub fn zero(field: PrimeField, nvars: usize) -> Self {
        Self {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: PrimeField, nvars: usize, c: u32) -> Self {
        let mut p = Self::zero(field, nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(field: PrimeField, nvars: usize, i: usize) -> Self {
        let mut e = vec![0u8; nvars];
        e[i] = 1;
        let mut p = Self::zero(field, nvars);
        p.add_term(e, 1);
        p
    }

    fn add_term(&mut self, exps: Vec<u8>, c: u32) {
        let c = c % self.field.p();
        if c == 0 {
            return;
        }
        let f = self.field;
        let entry = self.terms.entry(exps).or_insert(0);
        *entry = f.add(*entry, c);
        if *entry == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, u32> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: u32) -> SparsePoly {
        let mut out = SparsePoly::zero(self.field, self.nvars);
        for (e, &v) in &self.terms {
            out.add_term(e.clone(), self.field.mul(v, c));
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.scale(self.field.neg(1)))
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(self.field, self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u8> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, self.field.mul(c1, c2));
            }
        }
        out
    }

    pub fn eval(&self, x: &[u32]) -> u32 {
        let f = self.field;
        self.terms
            .iter()
            .fold(0, |acc, (e, &c)| f.mul_add(acc, c, monomial_value(f, e, x)))
    }

    pub fn derivative(&self, i: usize) -> SparsePoly {
        let mut out = SparsePoly::zero(self.field, self.nvars);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, self.field.mul(c, e[i] as u32));
        }
        out
    }

    /// Drops variable `i` (which must not occur), shrinking the variable count.
    pub fn drop_var(&self, i: usize) -> Result<SparsePoly> {
        if self.uses_var(i) {
            return Err(Error::Shape(format!(
                "variable {i} occurs in the polynomial"
            )));
        }
        let mut out = SparsePoly::zero(self.field, self.nvars - 1);
        for (e, &c) in &self.terms {
            let mut d = e.clone();
            d.remove(i);
            out.add_term(d, c);
        }
        Ok(out)
    }
}

/// Pfaffian of a skew matrix of polynomials given by its upper triangle
/// `upper[a][b]`, `a < b`, expanded along the first row.
pub fn symbolic_pfaffian(upper: &[Vec<SparsePoly>], field: PrimeField, nvars: usize) -> SparsePoly {
    fn rec(
        upper: &[Vec<SparsePoly>],
        idx: &[usize],
        field: PrimeField,
        nvars: usize,
    ) -> SparsePoly {
        if idx.is_empty() {
            return SparsePoly::constant(field, nvars, 1);
        }
        let s0 = idx[0];
        let mut acc = SparsePoly::zero(field, nvars);
        for t in 1..idx.len() {
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[t]).collect();
            let term = upper[s0][idx[t]].mul(&rec(upper, &rest, field, nvars));
            acc = if t % 2 == 1 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }
    let idx: Vec<usize> = (0..upper.len()).collect();
    rec(upper, &idx, field, nvars)
}
