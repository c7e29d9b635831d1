//! Fibration structures: the projection of the Peskine locus of a `D3_3_10`
//! trivector away from `V3`, and for `D1_6_10` the form `omega` on
//! `V10 / V6`, the perps `U7^perp`, the restricted contractions `sigma'`,
//! the sections `sigma''` with values in `B`, and the pencil of quadrics on
//! each fiber over `P(V10 / V6)`.
//!
//! Every quotient is identified with the span of canonical lifts, see
//! [`Subspace::quotient_basis`].

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::divisor::{verify_flag, DivisorKind};
use crate::error::{Error, Result};
use crate::estimators::{enumerate_locus, Ambient, DEFAULT_BUDGET};
use crate::field::PrimeField;
use crate::matrix::{solve_affine, AffineSolution, Matrix};
use crate::orbit::{b_pairs, BElement};
use crate::poly::HomogeneousForm;
use crate::rng::{random_nonzero_vector, LabRng};
use crate::subspace::{
    combine, kernel_of, quotient_coords, sample_subspace, sample_superspace, unit, Flag, Subspace,
};
use crate::trivector::{ContractionRankTest, SkewForm, Trivector};

const CHUNK: u64 = 4096;

/// The form `sigma(v1, ., .)` on `V10 / V6`.
#[derive(Clone, Debug)]
pub struct OmegaData {
    pub flag: Flag,
    pub v1: Vec<u32>,
    pub v6: Subspace,
    /// Non-pivot columns of `V6`; the standard vectors there span the
    /// complement on which `omega` is written.
    pub complement: Vec<usize>,
    pub omega: SkewForm,
}

pub fn omega_data(sigma: &Trivector, flag: &Flag) -> Result<OmegaData> {
    if flag.dims() != [1, 6] || flag.spaces()[0].ambient() != sigma.n() {
        return Err(Error::Shape(format!(
            "expected a (1, 6) flag, got {:?}",
            flag.dims()
        )));
    }
    if !verify_flag(sigma, flag, DivisorKind::D1_6_10)? {
        return Err(Error::NotOnLocus(
            "sigma(V1, V6, V10) does not vanish".into(),
        ));
    }
    let v1 = flag.spaces()[0].basis()[0].clone();
    let v6 = flag.spaces()[1].clone();
    let complement = v6.complement_pivots();
    let rows: Vec<Vec<u32>> = complement.iter().map(|&c| unit(sigma.n(), c)).collect();
    let omega = sigma.contract1(&v1)?.restrict_rows(&rows);
    let rank = omega.rank();
    if rank < 4 {
        return Err(Error::Degenerate(format!("omega has rank {rank}")));
    }
    Ok(OmegaData {
        flag: flag.clone(),
        v1,
        v6,
        complement,
        omega,
    })
}

impl OmegaData {
    pub fn field(&self) -> PrimeField {
        self.v6.field()
    }

    fn check_u7(&self, u7: &Subspace) -> Result<()> {
        if u7.dim() != 7 || !u7.contains_subspace(&self.v6)? {
            return Err(Error::Shape(format!(
                "expected a 7-dimensional space over V6, got dim {}",
                u7.dim()
            )));
        }
        Ok(())
    }

    /// `U7^perp = p^perp + V6` for the point `p = U7 / V6` of `P(V10 / V6)`.
    pub fn u7_perp(&self, u7: &Subspace) -> Result<Subspace> {
        self.check_u7(u7)?;
        let f = self.field();
        let n = self.v6.ambient();
        let lift = &u7.quotient_basis(&self.v6)?[0];
        let pc = quotient_coords(lift, &self.v6, &self.complement)?;
        let row = self.omega.apply(&pc);
        let perp = kernel_of(&Matrix::from_rows(f, 4, &[row])?);
        let mut vs = self.v6.basis().to_vec();
        for q in perp.basis() {
            let mut v = vec![0u32; n];
            for (&c, &x) in self.complement.iter().zip(q) {
                v[c] = x;
            }
            vs.push(v);
        }
        Subspace::span(f, n, &vs)
    }

    /// `U7 = V6 + <lift>` for a vector `lift` off `V6`.
    pub fn u7_through(&self, lift: &[u32]) -> Result<Subspace> {
        if self.v6.contains(lift)? {
            return Err(Error::Degenerate("vector lies in V6".into()));
        }
        let mut vs = self.v6.basis().to_vec();
        vs.push(lift.to_vec());
        Subspace::span(self.field(), self.v6.ambient(), &vs)
    }
}

pub fn u7_perp(od: &OmegaData, u7: &Subspace) -> Result<Subspace> {
    od.u7_perp(u7)
}

/// `sigma'(l)`: the contraction `sigma(l, ., .)` on `U7^perp / (l + V1)`,
/// for `l` in a fixed `U7`.
pub struct SigmaPrime<'a> {
    sigma: &'a Trivector,
    od: &'a OmegaData,
    u7: Subspace,
    perp: Subspace,
}

impl<'a> SigmaPrime<'a> {
    pub fn new(sigma: &'a Trivector, od: &'a OmegaData, u7: &Subspace) -> Result<Self> {
        let perp = od.u7_perp(u7)?;
        Ok(Self {
            sigma,
            od,
            u7: u7.clone(),
            perp,
        })
    }

    pub fn perp(&self) -> &Subspace {
        &self.perp
    }

    pub fn form(&self, l: &[u32]) -> Result<SkewForm> {
        if !self.u7.contains(l)? {
            return Err(Error::Shape("l is not in U7".into()));
        }
        if self.od.v6.contains(l)? {
            return Err(Error::Degenerate("l lies in V6".into()));
        }
        let small = Subspace::span(
            self.od.field(),
            self.u7.ambient(),
            &[l.to_vec(), self.od.v1.clone()],
        )?;
        let lifts = self.perp.quotient_basis(&small)?;
        Ok(self.sigma.contract1(l)?.restrict_rows(&lifts))
    }

    pub fn rank(&self, l: &[u32]) -> Result<usize> {
        Ok(self.form(l)?.rank())
    }
}

pub fn sigma_prime_rank(sigma: &Trivector, flag: &Flag, u7: &Subspace, l: &[u32]) -> Result<usize> {
    let od = omega_data(sigma, flag)?;
    SigmaPrime::new(sigma, &od, u7)?.rank(l)
}

/// Outcome of comparing the Peskine condition with the `sigma'` rank on
/// every point of `P(U7) \ P(V6)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RankFourScan {
    pub points: u64,
    pub peskine: u64,
    pub rank_four: u64,
    /// Points where exactly one of the two conditions holds.
    pub violations: u64,
    /// Points with `sigma'` rank below four.
    pub below_four: u64,
}

impl RankFourScan {
    fn merge(self, o: Self) -> Self {
        Self {
            points: self.points + o.points,
            peskine: self.peskine + o.peskine,
            rank_four: self.rank_four + o.rank_four,
            violations: self.violations + o.violations,
            below_four: self.below_four + o.below_four,
        }
    }
}

/// The affine chart `l = l0 + V6` of `P(U7) \ P(V6)`: `p^6` points.
fn u7_chart_points<T, F>(od: &OmegaData, u7: &Subspace, budget: u64, visit: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[u32]) -> Result<Option<T>> + Sync,
{
    let f = od.field();
    let n = u7.ambient();
    let l0 = u7.quotient_basis(&od.v6)?.remove(0);
    let chart = Ambient::Affine(6);
    let total = chart.point_count(f);
    if total > budget {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let basis = od.v6.basis();
    let chunks: Vec<Result<Vec<T>>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut a = vec![0u32; 6];
            let mut out = Vec::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                chart.point(f, idx, &mut a);
                let mut l = combine(f, basis, &a, n);
                for (x, &y) in l.iter_mut().zip(&l0) {
                    *x = f.add(*x, y);
                }
                if let Some(t) = visit(&l)? {
                    out.push(t);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c?);
    }
    Ok(all)
}

/// Exhaustive comparison over `P(U7) \ P(V6)` of `rank sigma(l) <= 6` with
/// `rank sigma'(l) = 4`.
pub fn rank_four_scan(
    sigma: &Trivector,
    od: &OmegaData,
    u7: &Subspace,
    budget: u64,
) -> Result<RankFourScan> {
    let sp = SigmaPrime::new(sigma, od, u7)?;
    let test = ContractionRankTest::new(sigma, 6);
    let parts = u7_chart_points(od, u7, budget, |l| {
        let peskine = test.rank_at_most(l);
        let r = sp.rank(l)?;
        Ok(Some(RankFourScan {
            points: 1,
            peskine: peskine as u64,
            rank_four: (r == 4) as u64,
            violations: (peskine != (r == 4)) as u64,
            below_four: (r < 4) as u64,
        }))
    })?;
    Ok(parts
        .into_iter()
        .fold(RankFourScan::default(), RankFourScan::merge))
}

/// Peskine points of `P(U7) \ P(V6)` as vectors `l0 + V6`, in scan order.
pub fn peskine_points_in_u7(
    sigma: &Trivector,
    od: &OmegaData,
    u7: &Subspace,
    budget: u64,
) -> Result<Vec<Vec<u32>>> {
    let test = ContractionRankTest::new(sigma, 6);
    u7_chart_points(od, u7, budget, |l| {
        Ok(test.rank_at_most(l).then(|| l.to_vec()))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberMode {
    /// Scan all `p^3` points of the affine chart.
    Exhaustive,
    /// Solve the three linear equations cutting the fiber.
    Linear,
}

/// Data for the fiber over `V4 / V3`: `l = w + a . v`, with `w` the
/// canonical lift and `v` the basis of `V3`.
struct V4FiberFrame {
    w: Vec<u32>,
    v3: Vec<Vec<u32>>,
    v7: Subspace,
}

fn v4_fiber_frame(sigma: &Trivector, v3: &Subspace, v4: &Subspace) -> Result<V4FiberFrame> {
    if v3.dim() != 3 || v4.dim() != 4 || !v4.contains_subspace(v3)? || v3.ambient() != sigma.n() {
        return Err(Error::Shape(
            "expected V3 ⊂ V4 of dimensions 3 and 4".into(),
        ));
    }
    let w = v4.quotient_basis(v3)?.remove(0);
    let m = sigma.contract1(&w)?;
    let rows: Vec<Vec<u32>> = v3.basis().iter().map(|v| m.apply(v)).collect();
    let cov = Matrix::from_rows(sigma.field(), sigma.n(), &rows)?;
    if cov.rank() < 3 {
        return Err(Error::Degenerate(
            "sigma(l, ., .) is not injective on V3".into(),
        ));
    }
    // sigma(l, V3, .) does not depend on l in w + V3, so neither does V7
    let v7 = kernel_of(&cov);
    debug_assert!(v7.contains_subspace(v4).unwrap_or(false));
    Ok(V4FiberFrame {
        w,
        v3: v3.basis().to_vec(),
        v7,
    })
}

/// The fiber as an affine solution set `particular + span(directions)`, or
/// `None` when it is empty.
pub fn v4_fiber_affine(sigma: &Trivector, v3: &Subspace, v4: &Subspace) -> Result<AffineSolution> {
    let f = sigma.field();
    let fr = v4_fiber_frame(sigma, v3, v4)?;
    let x = fr.v7.quotient_basis(v4)?;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mw = sigma.contract1(&fr.w)?;
    let mv: Vec<SkewForm> = fr
        .v3
        .iter()
        .map(|v| sigma.contract1(v))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<u32>> = pairs
        .iter()
        .map(|&(a, b)| mv.iter().map(|m| m.eval(&x[a], &x[b])).collect())
        .collect();
    let rhs: Vec<u32> = pairs
        .iter()
        .map(|&(a, b)| f.neg(mw.eval(&x[a], &x[b])))
        .collect();
    solve_affine(&Matrix::from_rows(f, 3, &rows)?, &rhs)
}

/// Coordinates `a` of the points `w + a . v` of `P(V4) \ P(V3)` on the
/// Peskine locus, sorted.
pub fn v4_fiber(
    sigma: &Trivector,
    v3: &Subspace,
    v4: &Subspace,
    mode: FiberMode,
) -> Result<Vec<Vec<u32>>> {
    let f = sigma.field();
    match mode {
        FiberMode::Exhaustive => {
            let fr = v4_fiber_frame(sigma, v3, v4)?;
            let test = ContractionRankTest::new(sigma, 6);
            enumerate_locus(f, Ambient::Affine(3), DEFAULT_BUDGET, |a| {
                let mut l = combine(f, &fr.v3, a, sigma.n());
                for (x, &y) in l.iter_mut().zip(&fr.w) {
                    *x = f.add(*x, y);
                }
                test.rank_at_most(&l)
            })
        }
        FiberMode::Linear => {
            let Some((x0, dirs)) = v4_fiber_affine(sigma, v3, v4)? else {
                return Ok(Vec::new());
            };
            let k = dirs.len();
            let total = (f.p() as u64).pow(k as u32);
            if total > DEFAULT_BUDGET {
                return Err(Error::BudgetExceeded {
                    needed: total,
                    budget: DEFAULT_BUDGET,
                });
            }
            let mut c = vec![0u32; k];
            let mut out = Vec::with_capacity(total as usize);
            for idx in 0..total {
                Ambient::Affine(k).point(f, idx, &mut c);
                let mut pt = combine(f, &dirs, &c, 3);
                for (x, &y) in pt.iter_mut().zip(&x0) {
                    *x = f.add(*x, y);
                }
                out.push(pt);
            }
            out.sort_unstable();
            Ok(out)
        }
    }
}

/// Closed under `x + t (y - x)` for all members `x, y` and scalars `t`; in
/// odd characteristic this is exactly being an affine subspace.
pub fn is_affine_linear(field: PrimeField, points: &[Vec<u32>]) -> bool {
    let set: BTreeSet<&[u32]> = points.iter().map(Vec::as_slice).collect();
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            for t in 2..field.p() {
                let z: Vec<u32> = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| field.mul_add(a, t, field.sub(b, a)))
                    .collect();
                if !set.contains(z.as_slice()) {
                    return false;
                }
            }
        }
    }
    true
}

/// Canonical lifts for `sigma''` at `[U2 ⊂ U7]`: the generator `v0` of
/// `U2 / V1` and seven directions of `U7^perp / U2`, the two of
/// `U7^perp / U7` first (the `A2` role) and then the five of `U7 / U2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DprimeFrame {
    pub v0: Vec<u32>,
    pub lifts: Vec<Vec<u32>>,
}

pub fn dprime_frame(od: &OmegaData, u2: &Subspace, u7: &Subspace) -> Result<DprimeFrame> {
    let v1s = &od.flag.spaces()[0];
    if u2.dim() != 2 || !u2.contains_subspace(v1s)? || !u7.contains_subspace(u2)? {
        return Err(Error::Shape("expected V1 ⊂ U2 ⊂ U7 with dim U2 = 2".into()));
    }
    let perp = od.u7_perp(u7)?;
    let v0 = u2.quotient_basis(v1s)?.remove(0);
    let mut lifts = perp.quotient_basis(u7)?;
    lifts.extend(u7.quotient_basis(u2)?);
    Ok(DprimeFrame { v0, lifts })
}

/// `b_ij = sigma(g, r_i, r_j)` on the frame directions, without the `a0 ^ a1`
/// coordinate.
pub fn sigma_dprime_with(
    sigma: &Trivector,
    frame: &DprimeFrame,
    generator: &[u32],
) -> Result<BElement> {
    let m = sigma.contract1(generator)?;
    let r = &frame.lifts;
    Ok(BElement {
        coords: b_pairs()
            .into_iter()
            .map(|(i, j)| m.eval(&r[i], &r[j]))
            .collect(),
    })
}

pub fn sigma_dprime(
    sigma: &Trivector,
    od: &OmegaData,
    u2: &Subspace,
    u7: &Subspace,
) -> Result<BElement> {
    let frame = dprime_frame(od, u2, u7)?;
    sigma_dprime_with(sigma, &frame, &frame.v0)
}

/// `e1 ^ (e0 ^ e9 + e7 ^ e8) + e0 ^ x'` in the basis `f` adapted to the
/// point, with `x'` the lift of `target` whose `a0 ^ a1` coefficient is
/// `lift_s`. Directions `a0, a1` sit at basis positions 7, 8 and `a_k` at `k`.
///
/// The basis is `f0` the generator of `U2 / V1`, `f1 = v1`, `f2..f6` the
/// lifts of `U7 / U2` shifted into `V6` along `f0`, `f7, f8` the lifts of
/// `U9 / U7`, and `f9 = completion`.
/// The result lies on `D1_6_10` with the given flag, has `U7^perp = U9` and
/// `sigma''([U2 ⊂ U7]) = target`.
pub fn generating_trivector(
    flag: &Flag,
    u2: &Subspace,
    u7: &Subspace,
    u9: &Subspace,
    completion: &[u32],
    target: &BElement,
    lift_s: u32,
) -> Result<Trivector> {
    let v1s = &flag.spaces()[0];
    let v6 = &flag.spaces()[1];
    let f = v6.field();
    let n = v6.ambient();
    if !u9.contains_subspace(u7)? || u9.dim() != 9 || v6.contains(&u2.quotient_basis(v1s)?[0])? {
        return Err(Error::Shape(
            "expected U2 ⊄ V6 and U7 ⊂ U9 with dim U9 = 9".into(),
        ));
    }
    let v0 = u2.quotient_basis(v1s)?.remove(0);
    let mut cols = vec![v0.clone(), v1s.basis()[0].clone()];
    // the lifts of U7 / U2 that sigma'' is read in, moved into V6 along v0
    let c0 = u7
        .coords_mod(v6, &v0)?
        .ok_or_else(|| Error::Shape("U2 is not inside U7".into()))?[0];
    let c0_inv = f.inv(c0).expect("v0 is off V6");
    for a in u7.quotient_basis(u2)? {
        let c = f.mul(u7.coords_mod(v6, &a)?.expect("lift lies in U7")[0], c0_inv);
        cols.push(
            a.iter()
                .zip(&v0)
                .map(|(&x, &y)| f.sub(x, f.mul(c, y)))
                .collect(),
        );
    }
    cols.extend(u9.quotient_basis(u7)?);
    cols.push(completion.to_vec());
    let basis = Matrix::from_rows(f, n, &cols)?.transpose();
    let mut std = Trivector::zero(f, n)?;
    std.add_wedge(1, 0, 9, 1);
    std.add_wedge(1, 7, 8, 1);
    let pos = |a: usize| match a {
        0 => 7,
        1 => 8,
        k => k,
    };
    std.add_wedge(0, 7, 8, lift_s);
    for ((a, b), &c) in b_pairs().into_iter().zip(&target.coords) {
        std.add_wedge(0, pos(a), pos(b), c);
    }
    // sigma(f_i, f_j, f_k) = std(e_i, e_j, e_k)
    std.gl_act(&basis)
}

/// Fiber over `[U7]`: the pencil of quadrics on `P(U7 / V1)` in coordinates
/// along the canonical lifts of `U7 / V1`.
#[derive(Clone, Debug)]
pub struct QuadricPencil {
    pub qa: HomogeneousForm,
    pub qb: HomogeneousForm,
    pub u7: Subspace,
    /// Lifts `w_1..w_6` of `U7 / V1`.
    pub lifts: Vec<Vec<u32>>,
    /// Lifts of `U7^perp / U7`; `W_A = U7 + r_0`, `W_B = U7 + r_1`.
    pub perp_lifts: Vec<Vec<u32>>,
}

/// `(-1)^i Pf(M without row and column i) / xi_i` for the first `i` with
/// `xi_i != 0`, where `M = sigma(x, b_a, b_b)` on `b = (w_1..w_6, r)` and
/// `x = sum xi_i w_i`. `x` spans the kernel of `M` together with `V1`, so the
/// principal 6-Pfaffians are `xi_i` times one quadric.
pub fn pencil_quadric_value(
    sigma: &Trivector,
    lifts: &[Vec<u32>],
    r: &[u32],
    xi: &[u32],
) -> Result<u32> {
    let Some(i) = xi.iter().position(|&c| c != 0) else {
        return Err(Error::Degenerate("zero point".into()));
    };
    pencil_quadric_value_at(sigma, lifts, r, xi, i)
}

pub fn pencil_quadric_value_at(
    sigma: &Trivector,
    lifts: &[Vec<u32>],
    r: &[u32],
    xi: &[u32],
    i: usize,
) -> Result<u32> {
    let f = sigma.field();
    let inv = f
        .inv(xi[i])
        .ok_or_else(|| Error::Degenerate("coordinate vanishes".into()))?;
    let x = combine(f, lifts, xi, sigma.n());
    let mut rows = lifts.to_vec();
    rows.push(r.to_vec());
    let m = sigma.contract1(&x)?.restrict_rows(&rows);
    let v = f.mul(m.delete(&[i]).pfaffian()?, inv);
    Ok(if i % 2 == 1 { f.neg(v) } else { v })
}

const QUADRIC_MARGIN: usize = 15;

pub fn quadric_pencil(
    rng: &mut LabRng,
    sigma: &Trivector,
    od: &OmegaData,
    u7: &Subspace,
) -> Result<QuadricPencil> {
    let f = sigma.field();
    let perp = od.u7_perp(u7)?;
    let lifts = u7.quotient_basis(&od.flag.spaces()[0])?;
    let perp_lifts = perp.quotient_basis(u7)?;
    let n_nodes = 21 + QUADRIC_MARGIN;
    let mut forms = Vec::with_capacity(2);
    for r in &perp_lifts {
        let mut last = None;
        for _ in 0..8 {
            let nodes: Vec<Vec<u32>> = (0..n_nodes)
                .map(|_| random_nonzero_vector(rng, f, 6))
                .collect();
            let values: Vec<u32> = nodes
                .iter()
                .map(|xi| pencil_quadric_value(sigma, &lifts, r, xi))
                .collect::<Result<_>>()?;
            match HomogeneousForm::interpolate(f, 6, 2, &nodes, &values) {
                Ok(q) => {
                    last = Some(Ok(q));
                    break;
                }
                Err(Error::Interpolation(msg)) if msg.contains("undetermined") => {
                    last = Some(Err(Error::Interpolation(msg)))
                }
                Err(e) => return Err(e),
            }
        }
        forms.push(last.expect("at least one attempt")?);
    }
    let qb = forms.pop().expect("two forms");
    let qa = forms.pop().expect("two forms");
    Ok(QuadricPencil {
        qa,
        qb,
        u7: u7.clone(),
        lifts,
        perp_lifts,
    })
}

impl QuadricPencil {
    pub fn field(&self) -> PrimeField {
        self.qa.field()
    }

    pub fn matrices(&self) -> Result<(Matrix, Matrix)> {
        Ok((self.qa.symmetric_matrix()?, self.qb.symmetric_matrix()?))
    }

    pub fn member(&self, xi: &[u32]) -> bool {
        self.qa.eval(xi) == 0 && self.qb.eval(xi) == 0
    }

    /// Rank of `alpha Q_A + beta Q_B`.
    pub fn member_rank(&self, alpha: u32, beta: u32) -> Result<usize> {
        Ok(self
            .qa
            .linear_combination(alpha, &self.qb, beta)
            .symmetric_matrix()?
            .rank())
    }

    /// The point `[l + V1]` of `P(U7 / V1)`, leading coordinate 1.
    pub fn point_of(&self, v1s: &Subspace, l: &[u32]) -> Result<Option<Vec<u32>>> {
        let Some(mut xi) = self.u7.coords_mod(v1s, l)? else {
            return Ok(None);
        };
        let f = self.field();
        let Some(lead) = xi.iter().find(|&&c| c != 0).copied() else {
            return Ok(None);
        };
        let inv = f.inv(lead).expect("nonzero");
        for c in &mut xi {
            *c = f.mul(*c, inv);
        }
        Ok(Some(xi))
    }

    /// Rank of the 2 x 6 Jacobian of `(Q_A, Q_B)` at a common zero.
    pub fn jacobian_rank(&self, xi: &[u32]) -> Result<usize> {
        if !self.member(xi) {
            return Err(Error::NotOnLocus("point is not on both quadrics".into()));
        }
        let rows = vec![self.qa.gradient(xi), self.qb.gradient(xi)];
        Ok(Matrix::from_rows(self.field(), 6, &rows)?.rank())
    }

    /// All common zeros in `P^5(F_p)`, sorted.
    pub fn common_zeros(&self, budget: u64) -> Result<Vec<Vec<u32>>> {
        enumerate_locus(self.field(), Ambient::Projective(6), budget, |xi| {
            self.member(xi)
        })
    }
}

pub fn singular_fiber_probe(pencil: &QuadricPencil, xi: &[u32]) -> Result<usize> {
    pencil.jacobian_rank(xi)
}

/// Per-fiber smoothness tally over all common zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberSingularity {
    pub points: u64,
    /// Points with Jacobian rank at most one.
    pub singular: u64,
}

impl FiberSingularity {
    pub fn smooth_fraction(&self) -> f64 {
        if self.points == 0 {
            return 1.0;
        }
        (self.points - self.singular) as f64 / self.points as f64
    }
}

pub fn fiber_singularities(pencil: &QuadricPencil, budget: u64) -> Result<FiberSingularity> {
    let zeros = pencil.common_zeros(budget)?;
    let mut singular = 0;
    for xi in &zeros {
        if pencil.jacobian_rank(xi)? <= 1 {
            singular += 1;
        }
    }
    Ok(FiberSingularity {
        points: zeros.len() as u64,
        singular,
    })
}

/// Comparison of the common zero locus with the images `[l + V1]` of the
/// Peskine points of `P(U7) \ P(V6)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PencilCoverage {
    pub common_zeros: u64,
    pub images: u64,
    /// Images off the common zero locus.
    pub outside: u64,
    /// Common zeros that are not images.
    pub uncovered: u64,
    /// Uncovered zeros with `U2 ⊂ V6`.
    pub uncovered_in_y2: u64,
    /// Uncovered zeros off `Y2` where `sigma''` has rank at most 2 mod `A2`.
    pub uncovered_low_rank: u64,
}

pub fn pencil_coverage(
    sigma: &Trivector,
    od: &OmegaData,
    pencil: &QuadricPencil,
    budget: u64,
) -> Result<PencilCoverage> {
    let v1s = &od.flag.spaces()[0];
    let points = peskine_points_in_u7(sigma, od, &pencil.u7, budget)?;
    let mut images = BTreeSet::new();
    for l in &points {
        images.insert(pencil.point_of(v1s, l)?.expect("l is in U7 and off V1"));
    }
    let zeros: BTreeSet<Vec<u32>> = pencil.common_zeros(budget)?.into_iter().collect();
    let f = od.field();
    let (mut uncovered_in_y2, mut uncovered_low_rank) = (0, 0);
    for xi in zeros.difference(&images) {
        let x = combine(f, &pencil.lifts, xi, sigma.n());
        if od.v6.contains(&x)? {
            uncovered_in_y2 += 1;
            continue;
        }
        let u2 = Subspace::span(f, sigma.n(), &[x, od.v1.clone()])?;
        if sigma_dprime(sigma, od, &u2, &pencil.u7)?.mod_a2(f).rank() <= 2 {
            uncovered_low_rank += 1;
        }
    }
    Ok(PencilCoverage {
        common_zeros: zeros.len() as u64,
        images: images.len() as u64,
        outside: images.difference(&zeros).count() as u64,
        uncovered: zeros.difference(&images).count() as u64,
        uncovered_in_y2,
        uncovered_low_rank,
    })
}

/// Points of `P(U2)` for `U2 = l + V1` on the rank-four locus of `sigma'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BirationalityProbe {
    /// Points `l + a v1` with `rank sigma'(l + a v1) = 4`.
    pub off_v1: u64,
    /// `[V1]` is a Peskine point.
    pub v1_peskine: bool,
}

impl BirationalityProbe {
    pub fn total_on_line(&self) -> u64 {
        self.off_v1 + self.v1_peskine as u64
    }
}

pub fn birationality_probe(
    sigma: &Trivector,
    od: &OmegaData,
    l: &[u32],
) -> Result<BirationalityProbe> {
    let f = od.field();
    let u7 = od.u7_through(l)?;
    let sp = SigmaPrime::new(sigma, od, &u7)?;
    let mut off_v1 = 0;
    for a in 0..f.p() {
        let lp: Vec<u32> = l
            .iter()
            .zip(&od.v1)
            .map(|(&x, &y)| f.mul_add(x, a, y))
            .collect();
        if sp.rank(&lp)? == 4 {
            off_v1 += 1;
        }
    }
    let v1_peskine = sigma.contract1(&od.v1)?.rank_at_most(sigma.n() - 4);
    Ok(BirationalityProbe { off_v1, v1_peskine })
}

/// A Peskine point off `V6`: a random `U7`, a random plane of
/// `P(U7 / V1)` scanned for common zeros of the pencil off `Y2`, and on the
/// line `U2` of such a zero a point `l` with `rank sigma(l) <= 6`.
pub fn sample_x11_point(
    rng: &mut LabRng,
    sigma: &Trivector,
    od: &OmegaData,
    attempts: usize,
) -> Result<Option<Vec<u32>>> {
    let f = od.field();
    let n = sigma.n();
    for _ in 0..attempts {
        let u7 = sample_superspace(rng, &od.v6, 7);
        let pencil = quadric_pencil(rng, sigma, od, &u7)?;
        let plane = sample_subspace(rng, f, 6, 3);
        let mut hits = Vec::new();
        let total = Ambient::Projective(3).point_count(f);
        let mut c = vec![0u32; 3];
        for idx in 0..total {
            Ambient::Projective(3).point(f, idx, &mut c);
            let xi = plane.combine(&c);
            if pencil.member(&xi) {
                hits.push(xi);
            }
        }
        for xi in hits {
            let x = combine(f, &pencil.lifts, &xi, n);
            if od.v6.contains(&x)? {
                continue;
            }
            for a in 0..f.p() {
                let l: Vec<u32> = x
                    .iter()
                    .zip(&od.v1)
                    .map(|(&s, &t)| f.mul_add(s, a, t))
                    .collect();
                if sigma.contract1(&l)?.rank_at_most(n - 4) {
                    return Ok(Some(l));
                }
            }
        }
    }
    Ok(None)
}

/// The chart of `P(V7 / V1)` off `Y2` and off one hyperplane of
/// `P(V10 / V6)`: `z = (s_1..s_3, t_1..t_5)` gives `l0 = c_0 + sum s_i c_i`
/// on the complement of `V6`, `U7 = V6 + l0` and `U2 = V1 + l0 + sum t_j b_j`
/// with `b_j` the lifts of `V6 / V1`.
pub fn dprime_chart_point(sigma: &Trivector, od: &OmegaData, z: &[u32]) -> Result<BElement> {
    if z.len() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: z.len(),
        });
    }
    let f = od.field();
    let n = sigma.n();
    let mut l0 = unit(n, od.complement[0]);
    for (k, &s) in z[..3].iter().enumerate() {
        l0[od.complement[k + 1]] = s;
    }
    let u7 = od.u7_through(&l0)?;
    let b = od.v6.quotient_basis(&od.flag.spaces()[0])?;
    let mut l = combine(f, &b, &z[3..], n);
    for (x, &y) in l.iter_mut().zip(&l0) {
        *x = f.add(*x, y);
    }
    let u2 = Subspace::span(f, n, &[l, od.v1.clone()])?;
    sigma_dprime(sigma, od, &u2, &u7)
}
