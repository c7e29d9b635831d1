//! Membership predicates and finite constructions: Peskine loci, the zero
//! locus of a trivector on `Gr(6, 10)`, the Pfaffian cubic on `P(V6)`, the
//! K3 surface conditions and the conic fibers over it.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::estimators::{count_locus, enumerate_locus, Ambient};
use crate::field::PrimeField;
use crate::poly::HomogeneousForm;
use crate::rng::{random_vector, LabRng};
use crate::subspace::{combine, enumerate_grassmannian, Flag, Subspace};
use crate::trivector::{ContractionRankTest, Trivector};

/// `[u]` lies on the Peskine locus: `rank sigma(u, ., .) <= n - 4`.
pub fn peskine_member(sigma: &Trivector, u: &[u32]) -> Result<bool> {
    if u.iter().all(|&c| c == 0) {
        return Err(Error::NotOnLocus(
            "zero vector is not a projective point".into(),
        ));
    }
    Ok(sigma.contract1(u)?.rank_at_most(sigma.n() - 4))
}

/// Exhaustive count of Peskine points in `P^{n-1}(F_p)`.
pub fn peskine_count(sigma: &Trivector, budget: u64) -> Result<u64> {
    let test = ContractionRankTest::new(sigma, sigma.n() - 4);
    count_locus(sigma.field(), Ambient::Projective(sigma.n()), budget, |u| {
        test.rank_at_most(u)
    })
}

pub fn peskine_points(sigma: &Trivector, budget: u64) -> Result<Vec<Vec<u32>>> {
    let test = ContractionRankTest::new(sigma, sigma.n() - 4);
    enumerate_locus(sigma.field(), Ambient::Projective(sigma.n()), budget, |u| {
        test.rank_at_most(u)
    })
}

/// `sigma` vanishes identically on the six-dimensional subspace `u6`.
pub fn dv_member(sigma: &Trivector, u6: &Subspace) -> Result<bool> {
    if u6.dim() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: u6.dim(),
        });
    }
    vanishes_on(sigma, u6)
}

/// `sigma(a, b, c) = 0` for all `a, b, c` in `s`.
pub fn vanishes_on(sigma: &Trivector, s: &Subspace) -> Result<bool> {
    if s.ambient() != sigma.n() {
        return Err(Error::DimensionMismatch {
            expected: sigma.n(),
            found: s.ambient(),
        });
    }
    let b = s.basis();
    for i in 0..b.len() {
        let m = sigma.contract1(&b[i])?;
        for j in i + 1..b.len() {
            let row = m.apply(&b[j]);
            for c in &b[j + 1..] {
                if sigma.field().dot(&row, c) != 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Value at `u` of the Pfaffian of `sigma(u, ., .)` on `V / <u, v1>`, where
/// `<u, v1>` lies in the kernel.
///
/// The quotient is identified with the coordinate complement obtained by
/// deleting the two pivot columns `i < j` of `<u, v1>`, and the Pfaffian is
/// normalized by the volume `det(u, v1, e_rest) = (-1)^{i+j-1} (u_i v1_j -
/// u_j v1_i)`. The result does not depend on the complement and is a cubic
/// in `u`.
pub fn normalized_quotient_pfaffian(sigma: &Trivector, v1: &[u32], u: &[u32]) -> Result<u32> {
    let f = sigma.field();
    let pair = Subspace::span(f, sigma.n(), &[u.to_vec(), v1.to_vec()])?;
    if pair.dim() < 2 {
        return Err(Error::Degenerate(
            "point lies on the distinguished line".into(),
        ));
    }
    let (i, j) = (pair.pivots()[0], pair.pivots()[1]);
    quotient_pfaffian_at(sigma, v1, u, i, j)
}

/// As [`normalized_quotient_pfaffian`] with an explicit complement `(i, j)`.
pub fn quotient_pfaffian_at(
    sigma: &Trivector,
    v1: &[u32],
    u: &[u32],
    i: usize,
    j: usize,
) -> Result<u32> {
    let f = sigma.field();
    let minor = f.sub(f.mul(u[i], v1[j]), f.mul(u[j], v1[i]));
    let inv = f
        .inv(minor)
        .ok_or_else(|| Error::Degenerate("coordinate pair is not a complement".into()))?;
    let pf = sigma.contract1(u)?.delete(&[i, j]).pfaffian()?;
    let value = f.mul(pf, inv);
    Ok(if (i + j).is_multiple_of(2) {
        f.neg(value)
    } else {
        value
    })
}

/// The cubic on `P(V6)` cut by the Pfaffian, in coordinates along the
/// canonical basis of `V6`.
#[derive(Clone, Debug)]
pub struct PfaffianCubic {
    pub cubic: HomogeneousForm,
    pub v6: Subspace,
    /// Generator of `V1`.
    pub v1: Vec<u32>,
    /// Coordinates of `v1` in the basis of `v6`.
    pub v1_coords: Vec<u32>,
}

impl PfaffianCubic {
    pub fn point(&self, x: &[u32]) -> Vec<u32> {
        combine(self.v6.field(), self.v6.basis(), x, self.v6.ambient())
    }

    /// Formal gradient at `[V1]`.
    pub fn singularity_probe(&self) -> Vec<u32> {
        self.cubic.gradient(&self.v1_coords)
    }
}

const CUBIC_MARGIN: usize = 24;

/// Interpolates the Pfaffian cubic from random nodes of `P(V6)`.
pub fn cubic_from_pfaffian(
    rng: &mut LabRng,
    sigma: &Trivector,
    flag: &Flag,
) -> Result<PfaffianCubic> {
    if flag.dims() != [1, 6] {
        return Err(Error::Shape(format!(
            "expected a (1, 6) flag, got {:?}",
            flag.dims()
        )));
    }
    let f = sigma.field();
    let v1 = flag.spaces()[0].basis()[0].clone();
    let v6 = flag.spaces()[1].clone();
    let v1_coords = v6.coords_in_basis(&v1)?.expect("flag is nested");
    let n_nodes = 56 + CUBIC_MARGIN;
    let mut last_err = None;
    for _ in 0..8 {
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut values = Vec::with_capacity(n_nodes);
        while nodes.len() < n_nodes {
            let x = random_vector(rng, f, 6);
            let u = combine(f, v6.basis(), &x, v6.ambient());
            match normalized_quotient_pfaffian(sigma, &v1, &u) {
                Ok(val) => {
                    nodes.push(x);
                    values.push(val);
                }
                Err(Error::Degenerate(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        match HomogeneousForm::interpolate(f, 6, 3, &nodes, &values) {
            Ok(cubic) => {
                return Ok(PfaffianCubic {
                    cubic,
                    v6,
                    v1,
                    v1_coords,
                })
            }
            // underdetermined node sets are resampled, inconsistent ones are not
            Err(Error::Interpolation(msg)) if msg.contains("undetermined") => last_err = Some(msg),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Interpolation(last_err.unwrap_or_default()))
}

/// Condition on `U8 ⊇ V6`: `sigma(V1, U8, U8) = 0`.
pub fn k3_isotropic(sigma: &Trivector, v1: &[u32], u8: &Subspace) -> Result<bool> {
    let m = sigma.contract1(v1)?;
    Ok(m.restrict(u8)?.is_zero())
}

/// All `U4 = V1 + T` with `dim T = 3`, `T ⊂ U8` and `sigma(U4, U4, U8) = 0`,
/// found by exhaustive search over `P(U8 / V1)`. Empty when `U8` fails the
/// isotropy condition. `first_only` stops at the first witness.
pub fn k3_witnesses(
    sigma: &Trivector,
    flag: &Flag,
    u8: &Subspace,
    first_only: bool,
) -> Result<Vec<Subspace>> {
    if flag.dims() != [1, 6] || u8.dim() != 8 || !u8.contains_subspace(&flag.spaces()[1])? {
        return Err(Error::Shape("expected V1 ⊂ V6 ⊂ U8 with dim U8 = 8".into()));
    }
    let f = sigma.field();
    let v1s = &flag.spaces()[0];
    let v1 = &v1s.basis()[0];
    if !k3_isotropic(sigma, v1, u8)? {
        return Ok(Vec::new());
    }
    let lifts = u8.quotient_basis(v1s)?;
    let q = lifts.len();
    // tensor[a][b][w] = sigma(q_a, q_b, w_k) over the basis of U8
    let contractions: Vec<_> = lifts
        .iter()
        .map(|l| sigma.contract1(l))
        .collect::<Result<_>>()?;
    let tensor: Vec<Vec<Vec<u32>>> = contractions
        .iter()
        .map(|m| {
            lifts
                .iter()
                .map(|b| u8.basis().iter().map(|w| m.eval(b, w)).collect())
                .collect()
        })
        .collect();
    // kernel of s -> sigma(t, s, U8) for t given in quotient coordinates
    let annihilator = |t: &[u32]| -> Subspace {
        let mut rows = vec![vec![0u32; q]; u8.dim()];
        for (a, &ta) in t.iter().enumerate() {
            if ta == 0 {
                continue;
            }
            for b in 0..q {
                for (w, row) in rows.iter_mut().enumerate() {
                    row[b] = f.mul_add(row[b], ta, tensor[a][b][w]);
                }
            }
        }
        let m = crate::matrix::Matrix::from_rows(f, q, &rows).expect("consistent rows");
        crate::subspace::kernel_of(&m)
    };
    let mut found = BTreeSet::new();
    let total = f.projective_count(q);
    let mut t1 = vec![0u32; q];
    for idx in 0..total {
        Ambient::Projective(q).point(f, idx, &mut t1);
        let k1 = annihilator(&t1);
        if k1.dim() < 3 {
            continue;
        }
        let line1 = Subspace::span(f, q, &[t1.clone()])?;
        for c in projective_points(f, k1.dim()) {
            let t2 = k1.combine(&c);
            if line1.contains(&t2)? {
                continue;
            }
            let k12 = k1.meet(&annihilator(&t2))?;
            if k12.dim() < 3 {
                continue;
            }
            let plane = Subspace::span(f, q, &[t1.clone(), t2.clone()])?;
            for c3 in projective_points(f, k12.dim()) {
                let t3 = k12.combine(&c3);
                if plane.contains(&t3)? {
                    continue;
                }
                let t = Subspace::span(f, q, &[t1.clone(), t2.clone(), t3])?;
                let mut gens = vec![v1.clone()];
                gens.extend(
                    t.basis()
                        .iter()
                        .map(|c| combine(f, &lifts, c, u8.ambient())),
                );
                found.insert(Subspace::span(f, u8.ambient(), &gens)?);
                if first_only {
                    return Ok(found.into_iter().collect());
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Existence of a K3 witness over `U8`; returns one if found.
pub fn k3_member(sigma: &Trivector, flag: &Flag, u8: &Subspace) -> Result<Option<Subspace>> {
    Ok(k3_witnesses(sigma, flag, u8, true)?.into_iter().next())
}

/// The `U8 = V6 + P` with `P` an isotropic plane of `sigma(v1, ., .)` on
/// the canonical complement of `V6`.
pub fn isotropic_extensions(sigma: &Trivector, flag: &Flag) -> Result<Vec<Subspace>> {
    if flag.dims() != [1, 6] {
        return Err(Error::Shape(format!(
            "expected a (1, 6) flag, got {:?}",
            flag.dims()
        )));
    }
    let f = sigma.field();
    let v1 = &flag.spaces()[0].basis()[0];
    let v6 = &flag.spaces()[1];
    let comp = v6.complement_pivots();
    let m = sigma.contract1(v1)?;
    let mut out = Vec::new();
    for plane in enumerate_grassmannian(f, comp.len(), 2) {
        let lifted: Vec<Vec<u32>> = plane
            .basis()
            .iter()
            .map(|c| {
                let mut v = vec![0u32; sigma.n()];
                for (&pos, &x) in comp.iter().zip(c) {
                    v[pos] = x;
                }
                v
            })
            .collect();
        if m.eval(&lifted[0], &lifted[1]) != 0 {
            continue;
        }
        let mut gens = v6.basis().to_vec();
        gens.extend(lifted);
        out.push(Subspace::span(f, sigma.n(), &gens)?);
    }
    Ok(out)
}

/// Points `U6 = V4 + T`, `T ∈ Gr(2, V8 / V4)`, on which `sigma` vanishes;
/// sorted.
pub fn conic_fiber(sigma: &Trivector, v4: &Subspace, v8: &Subspace) -> Result<Vec<Subspace>> {
    if v4.dim() != 4 || v8.dim() != 8 || !v8.contains_subspace(v4)? {
        return Err(Error::Shape(
            "expected V4 ⊂ V8 of dimensions 4 and 8".into(),
        ));
    }
    let f = sigma.field();
    let lifts = v8.quotient_basis(v4)?;
    let mut out = Vec::new();
    for t in enumerate_grassmannian(f, 4, 2) {
        let mut gens = v4.basis().to_vec();
        gens.extend(t.basis().iter().map(|c| combine(f, &lifts, c, sigma.n())));
        let u6 = Subspace::span(f, sigma.n(), &gens)?;
        if dv_member(sigma, &u6)? {
            out.push(u6);
        }
    }
    out.sort();
    Ok(out)
}

/// Normalized representatives of `P^{k-1}(F_p)`.
pub fn projective_points(f: PrimeField, k: usize) -> Vec<Vec<u32>> {
    let total = f.projective_count(k);
    (0..total)
        .map(|idx| {
            let mut v = vec![0u32; k];
            Ambient::Projective(k).point(f, idx, &mut v);
            v
        })
        .collect()
}
