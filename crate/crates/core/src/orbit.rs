//! The twenty-dimensional space `B = ∧²A7 / ∧²A2`, the pencil of cubics
//! cutting `O2`, its singular locus and the `O5` family.
//!
//! Indices are 0-based: `A7 = <a0, ..., a6>`, `A2 = <a0, a1>`. A bivector
//! `b = sum b_ij a_i ^ a_j` is stored as the skew form with `M[i][j] = b_ij`;
//! `B` keeps the twenty coordinates `(i, j) != (0, 1)` in lexicographic order.

use crate::error::{Error, Result};
use crate::estimators::Parametrization;
use crate::field::PrimeField;
use crate::matrix::Matrix;
use crate::poly::{symbolic_pfaffian, SparsePoly};
use crate::rng::{random_scalar, random_vector, LabRng};
use crate::subspace::{sample_subspace, Subspace};
use crate::trivector::SkewForm;

pub const A7: usize = 7;
pub const B_DIM: usize = 20;

/// Pairs `(i, j)`, `i < j < 7`, other than `(0, 1)`, in coordinate order.
pub fn b_pairs() -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(B_DIM);
    for i in 0..A7 {
        for j in i + 1..A7 {
            if (i, j) != (0, 1) {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BElement {
    pub coords: Vec<u32>,
}

impl BElement {
    pub fn zero() -> Self {
        Self {
            coords: vec![0; B_DIM],
        }
    }

    /// Lift with `a0 ^ a1` coefficient `s`.
    pub fn lift(&self, field: PrimeField, s: u32) -> SkewForm {
        let mut m = SkewForm::zero(field, A7);
        m.set(0, 1, s);
        for (&(i, j), &c) in b_pairs().iter().zip(&self.coords) {
            m.set(i, j, c);
        }
        m
    }

    /// The image in `∧²(A7 / A2)`, on `a2, ..., a6`.
    pub fn mod_a2(&self, field: PrimeField) -> SkewForm {
        self.lift(field, 0).delete(&[0, 1])
    }
}

pub fn project_to_b(b: &SkewForm) -> Result<BElement> {
    if b.dim() != A7 {
        return Err(Error::DimensionMismatch {
            expected: A7,
            found: b.dim(),
        });
    }
    Ok(BElement {
        coords: b_pairs().iter().map(|&(i, j)| b.get(i, j)).collect(),
    })
}

/// A cubic whose monomials are products of three distinct variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicPoly20 {
    field: PrimeField,
    pub poly: SparsePoly,
    terms: Vec<(u32, [usize; 3])>,
}

impl CubicPoly20 {
    pub fn new(poly: SparsePoly, field: PrimeField) -> Result<Self> {
        let mut terms = Vec::with_capacity(poly.num_terms());
        for (e, &c) in poly.terms() {
            let vars: Vec<usize> = (0..e.len()).filter(|&i| e[i] > 0).collect();
            if vars.len() != 3 || vars.iter().any(|&i| e[i] != 1) {
                return Err(Error::Shape("expected squarefree cubic monomials".into()));
            }
            terms.push((c, [vars[0], vars[1], vars[2]]));
        }
        Ok(Self { field, poly, terms })
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, x: &[u32]) -> u32 {
        let f = self.field;
        self.terms.iter().fold(0, |acc, &(c, [a, b, d])| {
            f.mul_add(acc, f.mul(c, x[a]), f.mul(x[b], x[d]))
        })
    }

    pub fn gradient(&self, x: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut g = vec![0u32; x.len()];
        for &(c, [a, b, d]) in &self.terms {
            g[a] = f.mul_add(g[a], c, f.mul(x[b], x[d]));
            g[b] = f.mul_add(g[b], c, f.mul(x[a], x[d]));
            g[d] = f.mul_add(g[d], c, f.mul(x[a], x[b]));
        }
        g
    }
}

/// `F1 = Pf(b mod a1)` on `(a0, a2, ..., a6)` and `F2 = Pf(b mod a0)` on
/// `(a1, ..., a6)`, expanded symbolically in the twenty coordinates.
#[derive(Clone, Debug)]
pub struct PencilCubics {
    pub field: PrimeField,
    pub f1: CubicPoly20,
    pub f2: CubicPoly20,
}

impl PencilCubics {
    pub fn new(field: PrimeField) -> Result<Self> {
        // 21 symbolic variables: the twenty B coordinates, then b01 last
        let nv = B_DIM + 1;
        let mut index = [[usize::MAX; A7]; A7];
        for (k, &(i, j)) in b_pairs().iter().enumerate() {
            index[i][j] = k;
        }
        index[0][1] = B_DIM;
        let minor_pf = |keep: &[usize]| -> SparsePoly {
            let mut upper = vec![vec![SparsePoly::zero(field, nv); keep.len()]; keep.len()];
            for a in 0..keep.len() {
                for b in a + 1..keep.len() {
                    upper[a][b] = SparsePoly::var(field, nv, index[keep[a]][keep[b]]);
                }
            }
            symbolic_pfaffian(&upper, field, nv)
        };
        let f1 = minor_pf(&[0, 2, 3, 4, 5, 6]);
        let f2 = minor_pf(&[1, 2, 3, 4, 5, 6]);
        // both must be independent of the a0 ^ a1 lift
        let f1 = CubicPoly20::new(f1.drop_var(B_DIM)?, field)?;
        let f2 = CubicPoly20::new(f2.drop_var(B_DIM)?, field)?;
        Ok(Self { field, f1, f2 })
    }

    pub fn eval(&self, b: &BElement) -> (u32, u32) {
        (self.f1.eval(&b.coords), self.f2.eval(&b.coords))
    }

    pub fn o2_member(&self, b: &BElement) -> bool {
        self.f1.eval(&b.coords) == 0 && self.f2.eval(&b.coords) == 0
    }

    /// On `O2` with the two gradients linearly dependent.
    pub fn sing_o2_member(&self, b: &BElement) -> bool {
        self.sing_o2_coords(&b.coords)
    }

    pub fn o2_coords(&self, x: &[u32]) -> bool {
        self.f1.eval(x) == 0 && self.f2.eval(x) == 0
    }

    pub fn sing_o2_coords(&self, x: &[u32]) -> bool {
        if !self.o2_coords(x) {
            return false;
        }
        let f = self.field;
        let g1 = self.f1.gradient(x);
        let g2 = self.f2.gradient(x);
        // all 2x2 minors vanish: compare against the first nonzero entry of either row
        let Some(k) = (0..B_DIM).find(|&k| g1[k] != 0 || g2[k] != 0) else {
            return true;
        };
        (k + 1..B_DIM).all(|j| f.mul(g1[k], g2[j]) == f.mul(g1[j], g2[k]))
    }

    pub fn jacobian_rank(&self, b: &BElement) -> usize {
        let rows = vec![self.f1.gradient(&b.coords), self.f2.gradient(&b.coords)];
        Matrix::from_rows(self.field, B_DIM, &rows)
            .expect("twenty columns")
            .rank()
    }
}

/// `Pf(b mod l)` for `l = alpha a0 + beta a1`. With `beta != 0` the quotient
/// basis is `(a0, a2, ..., a6)` with `a1 -> -(alpha / beta) a0` and the
/// result is multiplied by `beta^3`; with `beta = 0` it is `F2`.
pub fn normalized_pf_mod_line(field: PrimeField, b: &BElement, alpha: u32, beta: u32) -> u32 {
    let m = b.lift(field, 0);
    if beta == 0 {
        return m.delete(&[0]).pfaffian().expect("even dimension");
    }
    let f = field;
    let ratio = f.mul(alpha, f.inv(beta).expect("nonzero"));
    let mut q = m.delete(&[1]);
    // row of a0 in the chart (index 0 of the deleted form)
    for j in 2..A7 {
        let v = f.sub(m.get(0, j), f.mul(ratio, m.get(1, j)));
        q.set(0, j - 1, v);
    }
    let pf = q.pfaffian().expect("even dimension");
    f.mul(pf, f.pow(beta, 3))
}

/// Exists a lift of rank exactly 4 and the image mod `A2` has rank 2.
pub fn o5_sufficient_member(field: PrimeField, b: &BElement) -> bool {
    b.mod_a2(field).rank() == 2 && (0..field.p()).any(|s| b.lift(field, s).rank() == 4)
}

/// Parameters of one point of the `O5` family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct O5Params {
    /// `l = alpha a0 + beta a1`, normalized with first nonzero entry 1.
    pub alpha: u32,
    pub beta: u32,
    /// Two-dimensional subspace of `A7 / A2` in coordinates `a2, ..., a6`.
    pub u2: Subspace,
    /// `v` in coordinates `a2, ..., a6`.
    pub v: Vec<u32>,
    /// `u = x u1 + y u2` on the canonical basis of `u2`.
    pub x: u32,
    pub y: u32,
    pub t: u32,
}

impl O5Params {
    /// `m` completes `l` to a basis of `A2`: `a1` if `alpha != 0`, else `a0`.
    fn m_index(&self) -> usize {
        if self.alpha != 0 {
            1
        } else {
            0
        }
    }
}

fn embed(q: &[u32]) -> Vec<u32> {
    let mut v = vec![0u32; A7];
    v[2..].copy_from_slice(q);
    v
}

fn add_wedge(f: PrimeField, m: &mut SkewForm, x: &[u32], y: &[u32], c: u32) {
    for i in 0..A7 {
        for j in i + 1..A7 {
            let w = f.sub(f.mul(x[i], y[j]), f.mul(x[j], y[i]));
            if w != 0 {
                m.set(i, j, f.mul_add(m.get(i, j), c, w));
            }
        }
    }
}

/// `l ^ v + m ^ u + t u1 ^ u2` as a bivector.
pub fn o5_bivector(field: PrimeField, prm: &O5Params) -> SkewForm {
    let f = field;
    let mut l = vec![0u32; A7];
    l[0] = prm.alpha;
    l[1] = prm.beta;
    let mut m = vec![0u32; A7];
    m[prm.m_index()] = 1;
    let u1 = embed(&prm.u2.basis()[0]);
    let u2 = embed(&prm.u2.basis()[1]);
    let u: Vec<u32> = (0..A7)
        .map(|k| f.add(f.mul(prm.x, u1[k]), f.mul(prm.y, u2[k])))
        .collect();
    let mut b = SkewForm::zero(f, A7);
    add_wedge(f, &mut b, &l, &embed(&prm.v), 1);
    add_wedge(f, &mut b, &m, &u, 1);
    add_wedge(f, &mut b, &u1, &u2, prm.t);
    b
}

pub fn o5_point(field: PrimeField, prm: &O5Params) -> BElement {
    project_to_b(&o5_bivector(field, prm)).expect("seven-dimensional")
}

pub fn o5_sample(rng: &mut LabRng, field: PrimeField) -> (O5Params, BElement) {
    let (alpha, beta) = loop {
        let a = random_scalar(rng, field);
        let b = random_scalar(rng, field);
        if a != 0 {
            break (1, field.mul(b, field.inv(a).expect("nonzero")));
        }
        if b != 0 {
            break (0, 1);
        }
    };
    let prm = O5Params {
        alpha,
        beta,
        u2: sample_subspace(rng, field, 5, 2),
        v: random_vector(rng, field, 5),
        x: random_scalar(rng, field),
        y: random_scalar(rng, field),
        t: random_scalar(rng, field),
    };
    let b = o5_point(field, &prm);
    (prm, b)
}

/// Recovers parameters for `b` following the normal form
/// `b = (a0 + c a1) ^ x + a1 ^ y' + t u1 ^ u2`; `None` if `b` does not
/// decompose that way.
pub fn o5_decompose(field: PrimeField, b: &BElement) -> Option<O5Params> {
    let f = field;
    let m = b.lift(f, 0);
    let w = m.delete(&[0, 1]);
    if w.rank() != 2 {
        return None;
    }
    let x: Vec<u32> = (2..A7).map(|j| m.get(0, j)).collect();
    let y: Vec<u32> = (2..A7).map(|j| m.get(1, j)).collect();
    let rows = w.to_matrix().row_vecs();
    let u2 = Subspace::span(f, 5, &rows).ok()?;
    let (p1, p2) = (u2.pivots()[0], u2.pivots()[1]);
    let t = w.get(p1, p2);
    let coords = |v: &[u32]| u2.coords_in_basis(v).ok().flatten();
    let prm = if let Some(cx) = coords(&x) {
        O5Params {
            alpha: 0,
            beta: 1,
            u2: u2.clone(),
            v: y.clone(),
            x: cx[0],
            y: cx[1],
            t,
        }
    } else {
        let c = (0..f.p()).find(|&c| {
            let r: Vec<u32> = y
                .iter()
                .zip(&x)
                .map(|(&yi, &xi)| f.sub(yi, f.mul(c, xi)))
                .collect();
            coords(&r).is_some()
        })?;
        let r: Vec<u32> = y
            .iter()
            .zip(&x)
            .map(|(&yi, &xi)| f.sub(yi, f.mul(c, xi)))
            .collect();
        let cr = coords(&r)?;
        O5Params {
            alpha: 1,
            beta: c,
            u2: u2.clone(),
            v: x.clone(),
            x: cr[0],
            y: cr[1],
            t,
        }
    };
    (o5_point(f, &prm) == *b).then_some(prm)
}

/// Random element of the parabolic subgroup stabilizing `A2`.
pub fn sample_parabolic(rng: &mut LabRng, field: PrimeField) -> Matrix {
    loop {
        let mut g = Matrix::random(rng, field, A7, A7);
        for r in 2..A7 {
            g.set(r, 0, 0);
            g.set(r, 1, 0);
        }
        if g.rank() == A7 {
            return g;
        }
    }
}

/// `b -> g b` on bivectors: `M -> G M G^T`.
pub fn act_on_bivector(g: &Matrix, b: &SkewForm) -> SkewForm {
    b.congruence(&g.transpose()).expect("matching sizes")
}

/// The fifteen-parameter affine chart of the `O5` family: `l = a0 + s a1`,
/// `U2` the row space of `[I | X]`, then `v`, `(x, y)` and `t`.
pub struct O5Chart {
    pub field: PrimeField,
}

impl O5Chart {
    pub fn params(&self, z: &[u32]) -> O5Params {
        let f = self.field;
        let r1 = vec![1, 0, z[1], z[2], z[3]];
        let r2 = vec![0, 1, z[4], z[5], z[6]];
        O5Params {
            alpha: 1,
            beta: z[0],
            u2: Subspace::span(f, 5, &[r1, r2]).expect("five columns"),
            v: z[7..12].to_vec(),
            x: z[12],
            y: z[13],
            t: z[14],
        }
    }

    pub fn eval(&self, z: &[u32]) -> Vec<u32> {
        o5_point(self.field, &self.params(z)).coords
    }
}

impl Parametrization for O5Chart {
    fn n_params(&self) -> usize {
        15
    }

    fn jacobian(&self, params: &[u32]) -> Matrix {
        crate::estimators::polynomial_jacobian(self.field, params, B_DIM, 3, |z| self.eval(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn bivector(fld: PrimeField, terms: &[(usize, usize, i64)]) -> SkewForm {
        let mut m = SkewForm::zero(fld, A7);
        for &(i, j, c) in terms {
            m.set(i, j, fld.add(m.get(i, j), fld.from_i64(c)));
        }
        m
    }

    #[test]
    fn projection_drops_the_a2_plane() {
        let fld = f(7);
        assert_eq!(
            project_to_b(&bivector(fld, &[(0, 1, 1)])).unwrap(),
            BElement::zero()
        );
        let b = project_to_b(&bivector(fld, &[(2, 3, 1)])).unwrap();
        let pos = b_pairs().iter().position(|&p| p == (2, 3)).unwrap();
        assert_eq!(b.coords.iter().filter(|&&c| c != 0).count(), 1);
        assert_eq!(b.coords[pos], 1);
        let base = bivector(fld, &[(2, 3, 1), (0, 4, 2)]);
        let shifted = bivector(fld, &[(2, 3, 1), (0, 4, 2), (0, 1, 5)]);
        assert_eq!(
            project_to_b(&base).unwrap(),
            project_to_b(&shifted).unwrap()
        );
    }

    #[test]
    fn pencil_cubic_shape_and_values() {
        let fld = f(101);
        let pc = PencilCubics::new(fld).unwrap();
        assert_eq!(pc.f1.num_terms(), 15);
        assert_eq!(pc.f2.num_terms(), 15);
        let sympl = project_to_b(&bivector(fld, &[(1, 2, 1), (3, 4, 1), (5, 6, 1)])).unwrap();
        let (_, v2) = pc.eval(&sympl);
        assert!(v2 == 1 || v2 == 100);
        assert!(!pc.o2_member(&sympl));
        let low = project_to_b(&bivector(fld, &[(2, 3, 1), (4, 5, 1)])).unwrap();
        assert_eq!(pc.eval(&low), (0, 0));
        assert!(pc.o2_member(&low));
        assert!(pc.sing_o2_member(&BElement::zero()));
    }

    #[test]
    fn cubic_gradients_match_sparse_derivatives() {
        let mut rng = rng_from_seed(1);
        let fld = f(101);
        let pc = PencilCubics::new(fld).unwrap();
        for _ in 0..20 {
            let x = random_vector(&mut rng, fld, B_DIM);
            let g = pc.f1.gradient(&x);
            for (k, &gk) in g.iter().enumerate() {
                assert_eq!(gk, pc.f1.poly.derivative(k).eval(&x));
            }
            assert_eq!(pc.f2.eval(&x), pc.f2.poly.eval(&x));
        }
    }

    #[test]
    fn pencil_chart_is_linear_in_the_cubics() {
        let mut rng = rng_from_seed(2);
        let fld = f(101);
        let pc = PencilCubics::new(fld).unwrap();
        for _ in 0..50 {
            let b = BElement {
                coords: random_vector(&mut rng, fld, B_DIM),
            };
            let (alpha, beta) = (random_scalar(&mut rng, fld), random_scalar(&mut rng, fld));
            let (v1, v2) = pc.eval(&b);
            let expected = if beta == 0 {
                v2
            } else {
                let b3 = fld.pow(beta, 3);
                let ab2 = fld.mul(alpha, fld.pow(beta, 2));
                fld.sub(fld.mul(b3, v1), fld.mul(ab2, v2))
            };
            assert_eq!(normalized_pf_mod_line(fld, &b, alpha, beta), expected);
        }
    }

    #[test]
    fn o5_sampler_examples() {
        let fld = f(7);
        let prm = O5Params {
            alpha: 1,
            beta: 0,
            u2: Subspace::coordinate(fld, 5, &[0, 1]),
            v: vec![0, 0, 1, 0, 0],
            x: 0,
            y: 0,
            t: 1,
        };
        let expected = project_to_b(&bivector(fld, &[(0, 4, 1), (2, 3, 1)])).unwrap();
        assert_eq!(o5_point(fld, &prm), expected);
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let (mut prm, _) = o5_sample(&mut rng, fld);
            prm.t = 0;
            prm.x = 0;
            prm.y = 0;
            assert!(o5_bivector(fld, &prm).rank() <= 2);
        }
    }

    #[test]
    fn sufficient_condition_examples() {
        let fld = f(7);
        let yes = project_to_b(&bivector(fld, &[(0, 2, 1), (3, 4, 1)])).unwrap();
        assert!(o5_sufficient_member(fld, &yes));
        let no = project_to_b(&bivector(fld, &[(2, 3, 1), (4, 5, 1)])).unwrap();
        assert!(!o5_sufficient_member(fld, &no));
        assert!(o5_decompose(fld, &yes).is_some());
    }

    #[test]
    fn chart_jacobian_has_full_rank() {
        let fld = f(101);
        let chart = O5Chart { field: fld };
        assert_eq!(
            crate::estimators::image_dim_estimate(fld, &chart, 1, 10),
            15
        );
    }
}
