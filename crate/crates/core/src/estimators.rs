//! Exhaustive scanners and slice-based dimension estimates.
//!
//! Scans split the index range of the ambient points into fixed chunks and
//! reduce per-chunk results in order, so every result is independent of the
//! number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::Matrix;
use crate::rng::{random_vector, sub_rng};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
const CHUNK: u64 = 1 << 12;

/// Where a locus lives: `Affine(n)` is `A^n`, `Projective(n)` is `P^{n-1}`
/// given by vectors of length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ambient {
    Affine(usize),
    Projective(usize),
}

impl Ambient {
    pub fn len(self) -> usize {
        match self {
            Ambient::Affine(n) | Ambient::Projective(n) => n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn point_count(self, field: PrimeField) -> u64 {
        match self {
            Ambient::Affine(n) => (field.p() as u64).pow(n as u32),
            Ambient::Projective(n) => field.projective_count(n),
        }
    }

    /// The `idx`-th point. Projective points are normalized with first
    /// nonzero coordinate 1.
    pub fn point(self, field: PrimeField, idx: u64, out: &mut [u32]) {
        let p = field.p() as u64;
        match self {
            Ambient::Affine(n) => write_radix(p, idx, &mut out[..n]),
            Ambient::Projective(n) => {
                // leading coordinate at position lead, p^{n-1-lead} points each
                let mut rest = idx;
                let mut lead = 0;
                loop {
                    let block = p.pow((n - 1 - lead) as u32);
                    if rest < block {
                        break;
                    }
                    rest -= block;
                    lead += 1;
                }
                out[..lead].fill(0);
                out[lead] = 1;
                write_radix(p, rest, &mut out[lead + 1..n]);
            }
        }
    }
}

fn write_radix(p: u64, mut idx: u64, out: &mut [u32]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % p) as u32;
        idx /= p;
    }
}

fn check_budget(needed: u64, budget: u64) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Number of points of the ambient satisfying `pred`.
pub fn count_locus<F>(field: PrimeField, ambient: Ambient, budget: u64, pred: F) -> Result<u64>
where
    F: Fn(&[u32]) -> bool + Sync,
{
    let total = ambient.point_count(field);
    check_budget(total, budget)?;
    let chunks = total.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut v = vec![0u32; ambient.len()];
            let mut hits = 0u64;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                ambient.point(field, idx, &mut v);
                if pred(&v) {
                    hits += 1;
                }
            }
            hits
        })
        .sum())
}

/// Exhaustive enumeration of a locus, returned in lexicographic order.
pub fn enumerate_locus<F>(
    field: PrimeField,
    ambient: Ambient,
    budget: u64,
    pred: F,
) -> Result<Vec<Vec<u32>>>
where
    F: Fn(&[u32]) -> bool + Sync,
{
    let total = ambient.point_count(field);
    check_budget(total, budget)?;
    let chunks = total.div_ceil(CHUNK);
    let mut points: Vec<Vec<u32>> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut v = vec![0u32; ambient.len()];
            let mut found = Vec::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                ambient.point(field, idx, &mut v);
                if pred(&v) {
                    found.push(v.clone());
                }
            }
            found
        })
        .collect();
    points.sort_unstable();
    Ok(points)
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceConfig {
    /// Random slices per level.
    pub trials: usize,
    /// A level is conclusive once its slices contain this many points in total.
    pub min_hits: u64,
    /// Upper bound on membership tests over all levels.
    pub budget: u64,
    /// Offset added before truncating the log-count; absorbs the upward bias
    /// from several top-dimensional components.
    pub offset: f64,
    /// Half-width of the band around an integer boundary flagged as ambiguous.
    pub band: f64,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            min_hits: 40,
            budget: 20_000_000,
            offset: 0.3,
            band: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelProfile {
    pub slice_dim: usize,
    pub trials: usize,
    /// Slices containing at least one point.
    pub nonempty: usize,
    /// Points found over all slices of this level.
    pub points: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimEstimate {
    /// `-1` when no point was found within the budget.
    pub estimated_dim: i64,
    pub trials: usize,
    pub hit_profile: Vec<LevelProfile>,
    /// `log_p` of the estimated number of points (of the projective locus
    /// for projective ambients).
    pub log_count: Option<f64>,
    pub ambiguous: bool,
    pub confidence_note: String,
}

/// Dimension of a locus from point counts on random affine slices.
///
/// A uniformly random affine map `A^d -> A^N` sends each point of `A^d` to a
/// uniform point of `A^N`, so the expected number of locus points on a slice
/// is exactly `|X(F_p)| p^{d-N}`. Levels `d = 0, 1, ...` are scanned until a
/// level collects `min_hits` points; the mean count there estimates
/// `|X(F_p)|`, and the dimension is `floor(log_p |X| + offset)`. For a
/// projective ambient the scan runs on the affine cone without the origin.
pub fn slice_dim_estimate<F>(
    field: PrimeField,
    ambient: Ambient,
    seed: u64,
    cfg: &SliceConfig,
    pred: F,
) -> Result<DimEstimate>
where
    F: Fn(&[u32]) -> bool + Sync,
{
    let n = ambient.len();
    let p = field.p() as u64;
    let projective = matches!(ambient, Ambient::Projective(_));
    let mut profile = Vec::new();
    let mut spent = 0u64;
    let mut best: Option<(usize, u64)> = None;
    for d in 0..=n {
        let cost = p.pow(d as u32).saturating_mul(cfg.trials as u64);
        if spent.saturating_add(cost) > cfg.budget {
            if profile.is_empty() {
                return Err(Error::BudgetExceeded {
                    needed: cost,
                    budget: cfg.budget,
                });
            }
            break;
        }
        spent += cost;
        let counts: Vec<u64> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| slice_count(field, n, d, seed, t, projective, &pred))
            .collect();
        let points: u64 = counts.iter().sum();
        profile.push(LevelProfile {
            slice_dim: d,
            trials: cfg.trials,
            nonempty: counts.iter().filter(|&&c| c > 0).count(),
            points,
        });
        if points > 0 {
            best = Some((d, points));
        }
        if points >= cfg.min_hits {
            break;
        }
    }
    let pf = p as f64;
    let Some((d, points)) = best else {
        return Ok(DimEstimate {
            estimated_dim: -1,
            trials: cfg.trials,
            hit_profile: profile,
            log_count: None,
            ambiguous: false,
            confidence_note: format!("no points on any slice within {spent} membership tests"),
        });
    };
    let mean = points as f64 / cfg.trials as f64;
    // log_p of the estimated number of (affine or cone) points
    let mut log_count = mean.ln() / pf.ln() + (n - d) as f64;
    if projective {
        // |P(X)| = |cone \ 0| / (p - 1); compare against |P^D| = (p^{D+1}-1)/(p-1)
        log_count = (mean * pf.powi((n - d) as i32) + 1.0).ln() / pf.ln() - 1.0;
    }
    let shifted = log_count + cfg.offset;
    let estimated_dim = shifted.floor() as i64;
    let frac = shifted - shifted.floor();
    let few = points < cfg.min_hits;
    let near_boundary = frac < cfg.band || frac > 1.0 - cfg.band;
    let ambiguous = few || near_boundary;
    let confidence_note = if few {
        format!("only {points} points at slice dimension {d} before the budget ran out")
    } else if near_boundary {
        format!("log-count {log_count:.3} is close to a rounding boundary")
    } else {
        format!("{points} points at slice dimension {d}, log-count {log_count:.3}")
    };
    Ok(DimEstimate {
        estimated_dim,
        trials: cfg.trials,
        hit_profile: profile,
        log_count: Some(log_count),
        ambiguous,
        confidence_note,
    })
}

fn slice_count<F>(
    field: PrimeField,
    n: usize,
    d: usize,
    seed: u64,
    trial: usize,
    skip_origin: bool,
    pred: &F,
) -> u64
where
    F: Fn(&[u32]) -> bool,
{
    let mut rng = sub_rng(seed, &[d as u64, trial as u64]);
    let base = random_vector(&mut rng, field, n);
    let dirs: Vec<Vec<u32>> = (0..d).map(|_| random_vector(&mut rng, field, n)).collect();
    let p = field.p();
    let mut s = vec![0u32; d];
    let mut x = base;
    let mut hits = 0;
    loop {
        if !(skip_origin && x.iter().all(|&c| c == 0)) && pred(&x) {
            hits += 1;
        }
        // odometer step on s, keeping x = base + sum s_i dirs_i
        let mut i = 0;
        loop {
            if i == d {
                return hits;
            }
            s[i] += 1;
            for (xc, &dc) in x.iter_mut().zip(&dirs[i]) {
                *xc = field.add(*xc, dc);
            }
            if s[i] < p {
                break;
            }
            // wrapped: s[i] is back to 0 since p * dir = 0
            s[i] = 0;
            i += 1;
        }
    }
}

/// A polynomial map `F^k -> F^m` with an exact Jacobian.
pub trait Parametrization: Sync {
    fn n_params(&self) -> usize;
    fn jacobian(&self, params: &[u32]) -> Matrix;
}

/// Maximum Jacobian rank over random parameter samples.
pub fn image_dim_estimate<P: Parametrization>(
    field: PrimeField,
    map: &P,
    seed: u64,
    samples: usize,
) -> usize {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sub_rng(seed, &[i as u64]);
            let params = random_vector(&mut rng, field, map.n_params());
            map.jacobian(&params).rank()
        })
        .max()
        .unwrap_or(0)
}

/// Exact Jacobian of a polynomial map of degree at most `degree` at `x`:
/// each partial derivative comes from Lagrange interpolation of the map
/// along the coordinate line at the nodes `0, 1, ..., degree` (needs
/// `p > degree`).
pub fn polynomial_jacobian<F>(
    field: PrimeField,
    x: &[u32],
    n_out: usize,
    degree: usize,
    map: F,
) -> Matrix
where
    F: Fn(&[u32]) -> Vec<u32>,
{
    let f = field;
    assert!(
        (degree as u32) < f.p(),
        "need more field elements than the degree"
    );
    // weight_k = L_k'(0) for the Lagrange basis on nodes 0..=degree
    let weights: Vec<u32> = (0..=degree)
        .map(|k| {
            let kk = k as i64;
            let denom = (0..=degree)
                .filter(|&j| j != k)
                .fold(1u32, |acc, j| f.mul(acc, f.from_i64(kk - j as i64)));
            let mut numer = 0u32;
            for skip in (0..=degree).filter(|&j| j != k) {
                let prod = (0..=degree)
                    .filter(|&j| j != k && j != skip)
                    .fold(1u32, |acc, j| f.mul(acc, f.from_i64(-(j as i64))));
                numer = f.add(numer, prod);
            }
            f.mul(numer, f.inv(denom).expect("distinct nodes"))
        })
        .collect();
    let mut jac = Matrix::zeros(f, n_out, x.len());
    let mut point = x.to_vec();
    for c in 0..x.len() {
        let mut col = vec![0u32; n_out];
        for (k, &w) in weights.iter().enumerate() {
            point[c] = f.add(x[c], k as u32);
            for (o, v) in col.iter_mut().zip(map(&point)) {
                *o = f.mul_add(*o, w, v);
            }
        }
        point[c] = x[c];
        for (r, v) in col.into_iter().enumerate() {
            jac.set(r, c, v);
        }
    }
    jac
}

/// The linear map `x -> A x`.
pub struct LinearMap(pub Matrix);

impl Parametrization for LinearMap {
    fn n_params(&self) -> usize {
        self.0.cols()
    }
    fn jacobian(&self, _params: &[u32]) -> Matrix {
        self.0.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::subspace::{sample_subspace, Subspace};

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let fld = f(3);
        assert!(enumerate_locus(fld, Ambient::Projective(3), 100, |_| false)
            .unwrap()
            .is_empty());
        let all = enumerate_locus(fld, Ambient::Projective(3), 100, |_| true).unwrap();
        assert_eq!(all.len(), 13);
        let mut sorted = all.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 13);
        for v in &all {
            let lead = v.iter().find(|&&c| c != 0).unwrap();
            assert_eq!(*lead, 1);
        }
        assert_eq!(
            count_locus(fld, Ambient::Affine(4), 100, |_| true).unwrap(),
            81
        );
        assert!(matches!(
            count_locus(fld, Ambient::Affine(5), 100, |_| true),
            Err(Error::BudgetExceeded {
                needed: 243,
                budget: 100
            })
        ));
    }

    #[test]
    fn linear_subspaces_calibrate() {
        let fld = f(5);
        let mut rng = rng_from_seed(31);
        let cfg = SliceConfig::default();
        for (i, d) in [3usize, 7, 10].into_iter().enumerate() {
            let s = sample_subspace(&mut rng, fld, 10, d);
            let est = slice_dim_estimate(fld, Ambient::Affine(10), i as u64, &cfg, |x| {
                s.contains(x).unwrap()
            })
            .unwrap();
            assert_eq!(est.estimated_dim, d as i64, "{est:?}");
            assert!(!est.ambiguous, "{est:?}");
        }
        let coord = Subspace::coordinate(fld, 6, &[0, 2]);
        let est = slice_dim_estimate(fld, Ambient::Projective(6), 3, &cfg, |x| {
            coord.contains(x).unwrap()
        })
        .unwrap();
        assert_eq!(est.estimated_dim, 1);
    }

    #[test]
    fn empty_locus_gives_minus_one() {
        let cfg = SliceConfig {
            budget: 10_000,
            ..SliceConfig::default()
        };
        let est = slice_dim_estimate(f(7), Ambient::Affine(8), 1, &cfg, |_| false).unwrap();
        assert_eq!(est.estimated_dim, -1);
    }

    #[test]
    fn linear_parametrization_rank() {
        let fld = f(7);
        let mut rng = rng_from_seed(2);
        let a = Matrix::random(&mut rng, fld, 6, 3);
        let b = Matrix::random(&mut rng, fld, 3, 5);
        let m = a.mul(&b).unwrap();
        assert_eq!(
            image_dim_estimate(fld, &LinearMap(m.clone()), 0, 5),
            m.rank()
        );
        assert_eq!(
            image_dim_estimate(fld, &LinearMap(Matrix::zeros(fld, 4, 4)), 0, 5),
            0
        );
    }

    #[test]
    fn polynomial_jacobian_is_exact() {
        let fld = f(11);
        // (x, y) -> (x^3 + x y, y^2, 5)
        let map = |z: &[u32]| {
            vec![
                fld.add(fld.pow(z[0], 3), fld.mul(z[0], z[1])),
                fld.mul(z[1], z[1]),
                5,
            ]
        };
        let jac = polynomial_jacobian(fld, &[2, 3], 3, 3, map);
        let expected =
            Matrix::from_rows_i64(fld, &[vec![12 + 3, 2], vec![0, 6], vec![0, 0]]).unwrap();
        assert_eq!(jac, expected);
    }

    #[test]
    fn scans_do_not_depend_on_thread_count() {
        let fld = f(5);
        let pred = |v: &[u32]| (v[0] as u64 * v[1] as u64 + v[2] as u64 * v[3] as u64) % 5 == 1;
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                (
                    enumerate_locus(fld, Ambient::Projective(6), DEFAULT_BUDGET, pred).unwrap(),
                    slice_dim_estimate(fld, Ambient::Affine(6), 9, &SliceConfig::default(), pred)
                        .unwrap(),
                )
            })
        };
        assert_eq!(run(1), run(3));
    }
}
