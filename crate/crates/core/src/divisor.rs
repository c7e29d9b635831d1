//! Samplers for the special divisors of trivectors on `F_p^10` and their
//! witness flags.
//!
//! Each sampler zeroes the coefficients forced by the divisor condition in
//! standard position, fills the rest uniformly, then applies a uniform
//! random change of basis to both the trivector and the flag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{count_locus, Ambient, DEFAULT_BUDGET};
use crate::field::PrimeField;
use crate::matrix::Matrix;
use crate::rng::{random_scalar, LabRng};
use crate::subspace::{sample_gl, unit, Flag, Subspace};
use crate::trivector::{triples, ContractionRankTest, Trivector};

pub const AMBIENT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DivisorKind {
    General,
    /// `sigma(V3, V3, V10) = 0`
    #[serde(rename = "D3_3_10")]
    D3_3_10,
    /// `sigma(V1, V6, V10) = 0`
    #[serde(rename = "D1_6_10")]
    D1_6_10,
    /// `sigma(U4, V7, V7) = 0`
    #[serde(rename = "D4_7_7")]
    D4_7_7,
}

impl DivisorKind {
    pub const ALL: [DivisorKind; 4] = [
        DivisorKind::General,
        DivisorKind::D3_3_10,
        DivisorKind::D1_6_10,
        DivisorKind::D4_7_7,
    ];

    /// Dimensions of the witness flag.
    pub fn flag_dims(self) -> &'static [usize] {
        match self {
            DivisorKind::General => &[],
            DivisorKind::D3_3_10 => &[3],
            DivisorKind::D1_6_10 => &[1, 6],
            DivisorKind::D4_7_7 => &[4, 7],
        }
    }

    /// Whether the standard-position construction zeroes `c_ijk`.
    pub fn zeroes(self, (i, j, k): (usize, usize, usize)) -> bool {
        match self {
            DivisorKind::General => false,
            DivisorKind::D3_3_10 => [i, j, k].iter().filter(|&&x| x <= 2).count() >= 2,
            DivisorKind::D1_6_10 => i == 0 && j <= 5,
            DivisorKind::D4_7_7 => i <= 3 && k <= 6,
        }
    }

    pub fn standard_flag(self, field: PrimeField) -> Flag {
        let spaces = self
            .flag_dims()
            .iter()
            .map(|&d| Subspace::coordinate(field, AMBIENT, &(0..d).collect::<Vec<_>>()))
            .collect();
        Flag::new(spaces).expect("coordinate flags are nested")
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "GENERAL" => Some(DivisorKind::General),
            "D3_3_10" => Some(DivisorKind::D3_3_10),
            "D1_6_10" => Some(DivisorKind::D1_6_10),
            "D4_7_7" => Some(DivisorKind::D4_7_7),
            _ => None,
        }
    }
}

/// A trivector together with a flag certifying its divisor membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessedTrivector {
    pub sigma: Trivector,
    pub kind: DivisorKind,
    /// Witness flag in the scrambled basis.
    pub flag: Flag,
    pub standard_sigma: Trivector,
    pub standard_flag: Flag,
    /// `sigma = scramble . standard_sigma`, `flag = scramble(standard_flag)`.
    pub scramble: Matrix,
}

/// The trivector in standard position, before scrambling.
pub fn sample_standard(rng: &mut LabRng, field: PrimeField, kind: DivisorKind) -> Trivector {
    let coeffs = triples(AMBIENT)
        .into_iter()
        .map(|t| {
            if kind.zeroes(t) {
                0
            } else {
                random_scalar(rng, field)
            }
        })
        .collect();
    Trivector::from_coeffs(field, AMBIENT, coeffs).expect("ambient dimension is valid")
}

pub fn sample_trivector(
    rng: &mut LabRng,
    field: PrimeField,
    kind: DivisorKind,
) -> WitnessedTrivector {
    let standard_sigma = sample_standard(rng, field, kind);
    let scramble = sample_gl(rng, field, AMBIENT);
    let sigma = standard_sigma
        .gl_act(&scramble)
        .expect("scramble is invertible");
    let standard_flag = kind.standard_flag(field);
    let flag = standard_flag
        .image(&scramble)
        .expect("scramble is invertible");
    WitnessedTrivector {
        sigma,
        kind,
        flag,
        standard_sigma,
        standard_flag,
        scramble,
    }
}

/// Checks the divisor condition on basis vectors of the flag spaces.
pub fn verify_flag(sigma: &Trivector, flag: &Flag, kind: DivisorKind) -> Result<bool> {
    let dims = flag.dims();
    if dims != kind.flag_dims() || flag.spaces().iter().any(|s| s.ambient() != sigma.n()) {
        return Err(Error::Shape(format!(
            "flag of dimensions {dims:?} does not fit {kind:?}"
        )));
    }
    let zero = |v: Vec<u32>| v.iter().all(|&c| c == 0);
    Ok(match kind {
        DivisorKind::General => true,
        DivisorKind::D3_3_10 => {
            let b = flag.spaces()[0].basis();
            (0..3).all(|i| (i + 1..3).all(|j| zero(sigma.contract2(&b[i], &b[j]).unwrap())))
        }
        DivisorKind::D1_6_10 => {
            let v1 = &flag.spaces()[0].basis()[0];
            flag.spaces()[1]
                .basis()
                .iter()
                .all(|b| zero(sigma.contract2(v1, b).unwrap()))
        }
        DivisorKind::D4_7_7 => {
            let u4 = flag.spaces()[0].basis();
            let v7 = flag.spaces()[1].basis();
            u4.iter().all(|a| {
                let m = sigma.contract1(a).unwrap();
                (0..7).all(|i| (i + 1..7).all(|j| m.eval(&v7[i], &v7[j]) == 0))
            })
        }
    })
}

/// Rebuilds `V1 ⊂ V6` from a point whose contraction has rank at most 4;
/// `V6` is the kernel of that contraction.
pub fn recover_flag_d1610(sigma: &Trivector, v1: &[u32]) -> Result<Flag> {
    if v1.iter().all(|&c| c == 0) {
        return Err(Error::NotOnLocus("zero vector".into()));
    }
    let m = sigma.contract1(v1)?;
    if !m.rank_at_most(4) {
        return Err(Error::NotOnLocus(format!(
            "contraction has rank {} > 4",
            m.rank()
        )));
    }
    let kernel = m.kernel();
    if kernel.dim() != 6 {
        return Err(Error::Degenerate(format!(
            "kernel has dimension {}, expected 6",
            kernel.dim()
        )));
    }
    let line = Subspace::span(sigma.field(), sigma.n(), &[v1.to_vec()])?;
    Flag::new(vec![line, kernel])
}

/// Number of points of `P^{n-1}(F_p)` whose contraction has rank at most 4.
pub fn rank4_uniqueness_scan(sigma: &Trivector) -> Result<u64> {
    let test = ContractionRankTest::new(sigma, 4);
    count_locus(
        sigma.field(),
        Ambient::Projective(sigma.n()),
        DEFAULT_BUDGET,
        |u| test.rank_at_most(u),
    )
}

/// A trivector with rank-at-most-4 points at both `e_0` and `e_9`.
pub fn sample_two_rank4_points(rng: &mut LabRng, field: PrimeField) -> Trivector {
    let coeffs = triples(AMBIENT)
        .into_iter()
        .map(|(i, j, k)| {
            // sigma(e0, <e0..e5>, .) = 0 and sigma(e9, <e4..e9>, .) = 0
            let first = i == 0 && j <= 5;
            let second = k == 9 && j >= 4;
            if first || second {
                0
            } else {
                random_scalar(rng, field)
            }
        })
        .collect();
    Trivector::from_coeffs(field, AMBIENT, coeffs).expect("ambient dimension is valid")
}

/// Convenience: the scrambled image of `e_0`, a generator of the recorded `V1`.
pub fn scrambled_v1(w: &WitnessedTrivector) -> Vec<u32> {
    w.scramble
        .mul_vec(&unit(AMBIENT, 0))
        .expect("square scramble")
}
