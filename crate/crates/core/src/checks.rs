//! The registry of verification suites behind `verify` and the acceptance
//! suite. A report is a pure function of `(check_id, config)`: every random
//! choice is drawn from a stream derived from the seed and the position of
//! the sample, and parallel loops collect in index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::divisor::{sample_trivector, verify_flag, DivisorKind, AMBIENT};
use crate::error::{Error, Result};
use crate::estimators::{
    count_locus, image_dim_estimate, slice_dim_estimate, Ambient, DimEstimate, SliceConfig,
    DEFAULT_BUDGET,
};
use crate::fibration::{
    birationality_probe, dprime_chart_point, fiber_singularities, generating_trivector,
    is_affine_linear, omega_data, pencil_coverage, quadric_pencil, rank_four_scan,
    sample_x11_point, sigma_dprime, v4_fiber, v4_fiber_affine, FiberMode, OmegaData, SigmaPrime,
};
use crate::field::PrimeField;
use crate::loci::{
    conic_fiber, cubic_from_pfaffian, dv_member, isotropic_extensions, k3_isotropic, k3_member,
    peskine_member,
};
use crate::matrix::Matrix;
use crate::orbit::{
    act_on_bivector, normalized_pf_mod_line, o5_decompose, o5_sample, o5_sufficient_member,
    project_to_b, sample_parabolic, BElement, O5Chart, PencilCubics, A7, B_DIM,
};
use crate::report::{CheckReport, Status};
use crate::rng::{
    derive_seed, random_nonzero_vector, random_scalar, random_vector, sub_rng, LabRng,
};
use crate::subspace::{
    kernel_of, sample_gl, sample_subspace, sample_superspace, unit, Flag, Subspace,
};
use crate::trivector::{ContractionRankTest, SkewForm, Trivector};

/// Every registered check, in report order.
pub const CHECK_IDS: [&str; 18] = [
    "determinism",
    "equivariance",
    "lem-3.13",
    "lem-3.14",
    "lem-3.15",
    "lem-3.16",
    "lem-3.4",
    "lem-3.6",
    "lem-3.8",
    "pencil-cubics",
    "peskine-low",
    "pfaffian",
    "prop-3.17",
    "prop-3.18",
    "prop-3.19",
    "prop-3.2",
    "rem-3.5",
    "thm-2.1",
];

/// Overrides for a check run. `None` fields take the check's default, which
/// are the sizes the acceptance suite runs at.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub seed: u64,
    /// Replaces the check's list of primes with this one prime.
    pub p: Option<u32>,
    /// Outer sample count (seeds, forms, points); inner per-seed counts are
    /// capped at it.
    pub trials: Option<usize>,
    /// Membership-test budget for exhaustive scans.
    pub budget: Option<u64>,
}

impl CheckConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn primes(&self, default: &[u32]) -> Vec<u32> {
        self.p.map_or_else(|| default.to_vec(), |p| vec![p])
    }

    fn prime(&self, default: u32) -> u32 {
        self.p.unwrap_or(default)
    }

    fn outer(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn inner(&self, default: usize) -> usize {
        self.trials.map_or(default, |t| t.min(default))
    }

    fn budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }
}

struct Outcome {
    primes: Vec<u32>,
    params: Map<String, Value>,
    status: Status,
    metrics: Map<String, Value>,
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("json! object literal"),
    }
}

fn field(p: u32) -> Result<PrimeField> {
    PrimeField::new(p)
}

/// `hits / total >= num / den`, exactly.
fn rate_at_least(hits: usize, total: usize, num: usize, den: usize) -> bool {
    total > 0 && hits * den >= total * num
}

fn rate(hits: usize, total: usize) -> Value {
    json!(if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    })
}

pub fn run_check(id: &str, cfg: &CheckConfig) -> Result<CheckReport> {
    let out = match id {
        "determinism" => check_determinism(cfg)?,
        "equivariance" => check_equivariance(cfg)?,
        "lem-3.13" => check_o2_dimensions(cfg)?,
        "lem-3.14" => check_o5_sufficiency(cfg)?,
        "lem-3.15" => check_generation(cfg)?,
        "lem-3.16" => check_dprime_chart(cfg)?,
        "lem-3.4" => check_cubic(cfg)?,
        "lem-3.6" => check_omega(cfg)?,
        "lem-3.8" => check_sigma_prime(cfg)?,
        "pencil-cubics" => check_pencil_cubics(cfg)?,
        "peskine-low" => check_peskine_low(cfg)?,
        "pfaffian" => check_pfaffian(cfg)?,
        "prop-3.17" => check_birationality(cfg)?,
        "prop-3.18" => check_quadric_pencil(cfg)?,
        "prop-3.19" => check_fiber_singularities(cfg)?,
        "prop-3.2" => check_k3_conics(cfg)?,
        "rem-3.5" => check_cubic_singularity(cfg)?,
        "thm-2.1" => check_v4_fiber(cfg)?,
        _ => return Err(Error::UnknownCheck(id.to_string())),
    };
    let mut params = out.params;
    params.insert("budget".into(), json!(cfg.budget()));
    Ok(CheckReport {
        check_id: id.to_string(),
        seed: cfg.seed,
        p: out.primes,
        params,
        status: out.status,
        metrics: out.metrics,
        runtime_ms: None,
    })
}

/// A `D1_6_10` trivector with nondegenerate `omega`, resampling past the
/// degenerate ones.
fn d1610(rng: &mut LabRng, f: PrimeField) -> (Trivector, OmegaData) {
    loop {
        let w = sample_trivector(rng, f, DivisorKind::D1_6_10);
        if let Ok(od) = omega_data(&w.sigma, &w.flag) {
            return (w.sigma, od);
        }
    }
}

fn check_pfaffian(cfg: &CheckConfig) -> Result<Outcome> {
    let primes = cfg.primes(&[101, 7]);
    let trials = cfg.outer(1000);
    let sizes = [2usize, 4, 6, 8, 10];
    let mut metrics = Map::new();
    let mut failures = 0;
    for &p in &primes {
        let f = field(p)?;
        let mut per = Map::new();
        for &dim in &sizes {
            let bad = (0..trials)
                .into_par_iter()
                .map(|i| -> Result<bool> {
                    let mut rng = sub_rng(cfg.seed, &[1, p as u64, dim as u64, i as u64]);
                    let m = SkewForm::random(&mut rng, f, dim);
                    let pf = m.pfaffian()?;
                    Ok(f.mul(pf, pf) != m.to_matrix().determinant()?)
                })
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&b| b)
                .count();
            failures += bad;
            per.insert(dim.to_string(), json!(bad));
        }
        metrics.insert(format!("mismatches_p{p}"), Value::Object(per));
    }
    metrics.insert("mismatches".into(), json!(failures));
    Ok(Outcome {
        primes,
        params: obj(json!({ "sizes": sizes, "trials": trials })),
        status: Status::from_pass(failures == 0),
        metrics,
    })
}

/// Split and non-split point counts of `P^2 x P^2` over `F_p`: the variety
/// is defined over `F_p` either as a product of two planes or as the
/// restriction of scalars of `P^2` from `F_{p^2}`.
pub fn p2xp2_counts(p: u64) -> [u64; 2] {
    let plane = p * p + p + 1;
    [plane * plane, p.pow(4) + p * p + 1]
}

fn check_peskine_low(cfg: &CheckConfig) -> Result<Outcome> {
    let primes6 = cfg.primes(&[7, 11]);
    let p8 = cfg.prime(7);
    let seeds6 = cfg.outer(20);
    let seeds8 = cfg.inner(10);
    let slice = SliceConfig::default();
    let mut metrics = Map::new();
    let mut pass = true;

    for &p in &primes6 {
        let f = field(p)?;
        let two_planes = 2 * f.projective_count(3);
        let mut conform = 0;
        let mut rows = Vec::new();
        for i in 0..seeds6 {
            let mut rng = sub_rng(cfg.seed, &[2, 6, p as u64, i as u64]);
            let sigma = Trivector::random(&mut rng, f, 6)?;
            let test = ContractionRankTest::new(&sigma, 2);
            let count = count_locus(f, Ambient::Projective(6), cfg.budget(), |u| {
                test.rank_at_most(u)
            })?;
            let est = slice_dim_estimate(
                f,
                Ambient::Projective(6),
                derive_seed(cfg.seed, &[2, 6, p as u64, i as u64]),
                &slice,
                |u| test.rank_at_most(u),
            )?;
            // no rational point means the two planes are Galois conjugate
            let ok = !est.ambiguous
                && ((count == two_planes && est.estimated_dim == 2)
                    || (count == 0 && est.estimated_dim == -1));
            conform += usize::from(ok);
            rows.push(json!([count, est.estimated_dim, est.ambiguous]));
        }
        pass &= rate_at_least(conform, seeds6, 9, 10);
        metrics.insert(format!("n6_p{p}_conforming"), json!(conform));
        metrics.insert(format!("n6_p{p}_count_dim_ambiguous"), json!(rows));
    }

    let f = field(p8)?;
    let expected = p2xp2_counts(p8 as u64);
    let mut conform = 0;
    let mut dim_ok = 0;
    let mut rows = Vec::new();
    for i in 0..seeds8 {
        let mut rng = sub_rng(cfg.seed, &[2, 8, p8 as u64, i as u64]);
        let sigma = Trivector::random(&mut rng, f, 8)?;
        let test = ContractionRankTest::new(&sigma, 4);
        let count = count_locus(f, Ambient::Projective(8), cfg.budget(), |u| {
            test.rank_at_most(u)
        })?;
        let est = slice_dim_estimate(
            f,
            Ambient::Projective(8),
            derive_seed(cfg.seed, &[2, 8, p8 as u64, i as u64]),
            &slice,
            |u| test.rank_at_most(u),
        )?;
        conform += usize::from(expected.contains(&count));
        dim_ok += usize::from(est.estimated_dim == 4 && !est.ambiguous);
        rows.push(json!([count, est.estimated_dim, est.ambiguous]));
    }
    pass &= dim_ok == seeds8 && rate_at_least(conform, seeds8, 8, 10);
    metrics.insert(format!("n8_p{p8}_expected_counts"), json!(expected));
    metrics.insert(format!("n8_p{p8}_conforming"), json!(conform));
    metrics.insert(format!("n8_p{p8}_dim4"), json!(dim_ok));
    metrics.insert(format!("n8_p{p8}_count_dim_ambiguous"), json!(rows));

    let mut primes = primes6.clone();
    if !primes.contains(&p8) {
        primes.push(p8);
    }
    Ok(Outcome {
        primes,
        params: obj(json!({ "n6_seeds": seeds6, "n8_seeds": seeds8, "n8_p": p8, "slice": slice })),
        status: Status::from_pass(pass),
        metrics,
    })
}

const FIBERS_PER_SEED: usize = 20;
const EXHAUSTIVE_MAX_P: u32 = 11;

fn check_v4_fiber(cfg: &CheckConfig) -> Result<Outcome> {
    let primes = cfg.primes(&[7, 101]);
    let seeds = cfg.outer(5);
    let fibers = cfg.inner(FIBERS_PER_SEED);
    let mut metrics = Map::new();
    let mut pass = true;
    for &p in &primes {
        let f = field(p)?;
        let exhaustive = p <= EXHAUSTIVE_MAX_P;
        let cases: Vec<(usize, usize)> = (0..seeds)
            .flat_map(|s| (0..fibers).map(move |v| (s, v)))
            .collect();
        let results = cases
            .par_iter()
            .map(|&(s, v)| -> Result<(Vec<Vec<u32>>, Option<bool>, usize)> {
                let mut rng = sub_rng(cfg.seed, &[3, p as u64, s as u64]);
                let w = sample_trivector(&mut rng, f, DivisorKind::D3_3_10);
                let v3 = &w.flag.spaces()[0];
                let mut rng = sub_rng(cfg.seed, &[3, p as u64, s as u64, v as u64]);
                let mut resampled = 0;
                loop {
                    let v4 = sample_superspace(&mut rng, v3, 4);
                    let linear = match v4_fiber(&w.sigma, v3, &v4, FiberMode::Linear) {
                        Err(Error::Degenerate(_)) => {
                            resampled += 1;
                            continue;
                        }
                        r => r?,
                    };
                    let agree = if exhaustive {
                        Some(v4_fiber(&w.sigma, v3, &v4, FiberMode::Exhaustive)? == linear)
                    } else {
                        None
                    };
                    return Ok((linear, agree, resampled));
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let total = results.len();
        let singletons = results.iter().filter(|r| r.0.len() == 1).count();
        let empty = results.iter().filter(|r| r.0.is_empty()).count();
        let disagree = results.iter().filter(|r| r.1 == Some(false)).count();
        let non_affine = results
            .iter()
            .filter(|r| r.0.len() > 1 && !is_affine_linear(f, &r.0))
            .count();
        let resampled: usize = results.iter().map(|r| r.2).sum();
        pass &= rate_at_least(singletons, total, 95, 100) && disagree == 0 && non_affine == 0;
        metrics.insert(
            format!("p{p}"),
            json!({
                "fibers": total,
                "singletons": singletons,
                "singleton_rate": rate(singletons, total),
                "empty": empty,
                "larger": total - singletons - empty,
                "modes_compared": exhaustive,
                "mode_disagreements": disagree,
                "non_affine": non_affine,
                "degenerate_resampled": resampled,
            }),
        );
    }
    Ok(Outcome {
        primes,
        params: obj(
            json!({ "seeds": seeds, "fibers_per_seed": fibers, "exhaustive_max_p": EXHAUSTIVE_MAX_P }),
        ),
        status: Status::from_pass(pass),
        metrics,
    })
}

fn check_cubic(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(11);
    let f = field(p)?;
    let seeds = cfg.outer(3);
    let mut rows = Vec::new();
    let mut pass = true;
    for i in 0..seeds {
        let mut rng = sub_rng(cfg.seed, &[4, p as u64, i as u64]);
        let w = sample_trivector(&mut rng, f, DivisorKind::D1_6_10);
        let cubic = cubic_from_pfaffian(&mut rng, &w.sigma, &w.flag)?;
        let test = ContractionRankTest::new(&w.sigma, AMBIENT - 4);
        let zeros = count_locus(f, Ambient::Projective(6), cfg.budget(), |x| {
            cubic.cubic.eval(x) == 0
        })?;
        let low_rank = count_locus(f, Ambient::Projective(6), cfg.budget(), |x| {
            test.rank_at_most(&cubic.point(x))
        })?;
        let mismatches = count_locus(f, Ambient::Projective(6), cfg.budget(), |x| {
            (cubic.cubic.eval(x) == 0) != test.rank_at_most(&cubic.point(x))
        })?;
        let degree_three = cubic.cubic.degree() == 3 && !cubic.cubic.is_zero();
        pass &= degree_three && mismatches == 0;
        rows.push(json!({
            "degree_three": degree_three,
            "zeros": zeros,
            "rank_le_6": low_rank,
            "mismatches": mismatches,
            "points": f.projective_count(6),
        }));
    }
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "seeds": seeds })),
        status: Status::from_pass(pass),
        metrics: obj(json!({ "per_seed": rows })),
    })
}

fn check_cubic_singularity(cfg: &CheckConfig) -> Result<Outcome> {
    let primes = cfg.primes(&[101, 211]);
    let seeds = cfg.outer(20);
    let mut metrics = Map::new();
    for &p in &primes {
        let f = field(p)?;
        let rows = (0..seeds)
            .into_par_iter()
            .map(|i| -> Result<(bool, bool)> {
                let mut rng = sub_rng(cfg.seed, &[5, p as u64, i as u64]);
                let w = sample_trivector(&mut rng, f, DivisorKind::D1_6_10);
                let cubic = cubic_from_pfaffian(&mut rng, &w.sigma, &w.flag)?;
                let on = cubic.cubic.eval(&cubic.v1_coords) == 0;
                let singular = cubic.singularity_probe().iter().all(|&g| g == 0);
                Ok((on, singular))
            })
            .collect::<Result<Vec<_>>>()?;
        metrics.insert(
            format!("p{p}"),
            json!({
                "seeds": seeds,
                "v1_on_cubic": rows.iter().filter(|r| r.0).count(),
                "gradient_vanishes_at_v1": rows.iter().filter(|r| r.1).count(),
                "per_seed_gradient_vanishes": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            }),
        );
    }
    Ok(Outcome {
        primes,
        params: obj(json!({ "seeds": seeds })),
        status: Status::ReportOnly,
        metrics,
    })
}

fn check_omega(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(101);
    let f = field(p)?;
    let trials = cfg.outer(100);
    let rows = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Option<bool>> {
            let mut rng = sub_rng(cfg.seed, &[6, p as u64, i as u64]);
            let w = sample_trivector(&mut rng, f, DivisorKind::D1_6_10);
            let od = match omega_data(&w.sigma, &w.flag) {
                Ok(od) => od,
                Err(Error::Degenerate(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let u7 = sample_superspace(&mut rng, &od.v6, 7);
            let perp = od.u7_perp(&u7)?;
            // direct annihilator of sigma(v1, U7, .)
            let rows: Vec<Vec<u32>> = u7
                .basis()
                .iter()
                .map(|u| w.sigma.contract2(&od.v1, u))
                .collect::<Result<_>>()?;
            let direct = kernel_of(&Matrix::from_rows(f, AMBIENT, &rows)?);
            Ok(Some(
                perp.dim() == 9 && perp.contains_subspace(&u7)? && perp == direct,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let rank_four = rows.iter().filter(|r| r.is_some()).count();
    let perp_ok = rows.iter().filter(|r| **r == Some(true)).count();
    let pass = rate_at_least(rank_four, trials, 95, 100) && perp_ok == rank_four;
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "trials": trials })),
        status: Status::from_pass(pass),
        metrics: obj(
            json!({ "omega_rank_four": rank_four, "perp_checked": rank_four, "perp_ok": perp_ok }),
        ),
    })
}

fn check_sigma_prime(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(7);
    let f = field(p)?;
    let seeds = cfg.outer(3);
    let per_seed = cfg.inner(5);
    let mut rows = Vec::new();
    let (mut violations, mut below_four) = (0, 0);
    for i in 0..seeds {
        let mut rng = sub_rng(cfg.seed, &[8, p as u64, i as u64]);
        let (sigma, od) = d1610(&mut rng, f);
        for _ in 0..per_seed {
            let u7 = sample_superspace(&mut rng, &od.v6, 7);
            let scan = rank_four_scan(&sigma, &od, &u7, cfg.budget())?;
            violations += scan.violations;
            below_four += scan.below_four;
            rows.push(json!([
                scan.points,
                scan.peskine,
                scan.rank_four,
                scan.violations,
                scan.below_four
            ]));
        }
    }
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "seeds": seeds, "u7_per_seed": per_seed })),
        status: Status::from_pass(violations == 0 && below_four == 0),
        metrics: obj(json!({
            "violations": violations,
            "below_four": below_four,
            "points_peskine_rank4_violations_below4": rows,
        })),
    })
}

fn check_o2_dimensions(cfg: &CheckConfig) -> Result<Outcome> {
    let primes = cfg.primes(&[5, 7]);
    let slice = SliceConfig {
        trials: cfg.outer(20),
        budget: cfg.budget.unwrap_or(SliceConfig::default().budget),
        ..SliceConfig::default()
    };
    let mut dim_o2 = Map::new();
    let mut dim_sing = Map::new();
    let mut profiles = Map::new();
    let (mut wrong, mut ambiguous) = (false, false);
    for &p in &primes {
        let f = field(p)?;
        let pc = PencilCubics::new(f)?;
        let o2 = slice_dim_estimate(
            f,
            Ambient::Affine(B_DIM),
            derive_seed(cfg.seed, &[13, p as u64, 0]),
            &slice,
            |x| pc.o2_coords(x),
        )?;
        let sing = slice_dim_estimate(
            f,
            Ambient::Affine(B_DIM),
            derive_seed(cfg.seed, &[13, p as u64, 1]),
            &slice,
            |x| pc.sing_o2_coords(x),
        )?;
        for (est, target) in [(&o2, 18), (&sing, 15)] {
            ambiguous |= est.ambiguous;
            wrong |= !est.ambiguous && est.estimated_dim != target;
        }
        dim_o2.insert(p.to_string(), json!(o2.estimated_dim));
        dim_sing.insert(p.to_string(), json!(sing.estimated_dim));
        profiles.insert(p.to_string(), json!({ "o2": o2, "sing_o2": sing }));
    }
    let status = if wrong {
        Status::Fail
    } else if ambiguous {
        Status::Ambiguous
    } else {
        Status::Pass
    };
    Ok(Outcome {
        primes,
        params: obj(json!({ "slice": slice })),
        status,
        metrics: obj(json!({ "dim_O2": dim_o2, "dim_SingO2": dim_sing, "estimates": profiles })),
    })
}

fn check_pencil_cubics(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(101);
    let f = field(p)?;
    let elements = cfg.outer(500);
    let lines = cfg.inner(20);
    // construction fails if either cubic involves the a0 ^ a1 coordinate
    let pc = PencilCubics::new(f)?;
    let mismatches: usize = (0..elements)
        .into_par_iter()
        .map(|i| {
            let mut rng = sub_rng(cfg.seed, &[7, p as u64, i as u64]);
            let b = BElement {
                coords: random_vector(&mut rng, f, B_DIM),
            };
            let (v1, v2) = pc.eval(&b);
            (0..lines)
                .filter(|&k| {
                    // every fifth line is the point at infinity of the pencil
                    let (alpha, beta) = if k % 5 == 4 {
                        (1, 0)
                    } else {
                        (random_scalar(&mut rng, f), random_scalar(&mut rng, f))
                    };
                    let expected = if beta == 0 {
                        v2
                    } else {
                        f.sub(
                            f.mul(f.pow(beta, 3), v1),
                            f.mul(f.mul(alpha, f.pow(beta, 2)), v2),
                        )
                    };
                    normalized_pf_mod_line(f, &b, alpha, beta) != expected
                })
                .count()
        })
        .sum();
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "elements": elements, "lines_per_element": lines })),
        status: Status::from_pass(mismatches == 0),
        metrics: obj(json!({
            "b01_free": true,
            "terms_f1": pc.f1.num_terms(),
            "terms_f2": pc.f2.num_terms(),
            "mismatches": mismatches,
        })),
    })
}

/// Accumulates `u ^ v` into `m`.
fn add_wedge(m: &mut SkewForm, u: &[u32], v: &[u32]) {
    let f = m.field();
    for i in 0..m.dim() {
        for j in i + 1..m.dim() {
            let c = f.sub(f.mul(u[i], v[j]), f.mul(u[j], v[i]));
            m.set(i, j, f.add(m.get(i, j), c));
        }
    }
}

/// `a0 ^ x + a1 ^ y + z ^ w` with `z, w` off `A2` and `y` in
/// `<x> + A2 + <z, w>`, moved by a random element of the parabolic group.
fn sufficient_normal_form(rng: &mut LabRng, f: PrimeField) -> BElement {
    loop {
        let x = random_vector(rng, f, A7);
        let mut z = random_vector(rng, f, A7);
        let mut w = random_vector(rng, f, A7);
        z[..2].fill(0);
        w[..2].fill(0);
        let c: Vec<u32> = (0..5).map(|_| random_scalar(rng, f)).collect();
        let y: Vec<u32> = (0..A7)
            .map(|i| {
                let a2 = if i < 2 { c[3 + i] } else { 0 };
                let s = f.add(
                    f.mul(c[0], x[i]),
                    f.add(f.mul(c[1], z[i]), f.mul(c[2], w[i])),
                );
                f.add(s, a2)
            })
            .collect();
        let mut m = SkewForm::zero(f, A7);
        add_wedge(&mut m, &unit(A7, 0), &x);
        add_wedge(&mut m, &unit(A7, 1), &y);
        add_wedge(&mut m, &z, &w);
        let g = sample_parabolic(rng, f);
        let moved = act_on_bivector(&g, &m);
        if moved.rank() == 4 && moved.delete(&[0, 1]).rank() == 2 {
            return project_to_b(&moved).expect("seven-dimensional");
        }
    }
}

fn check_o5_sufficiency(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(101);
    let f = field(p)?;
    let trials = cfg.outer(200);
    let rows: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = sub_rng(cfg.seed, &[14, p as u64, i as u64]);
            let b = sufficient_normal_form(&mut rng, f);
            (o5_sufficient_member(f, &b), o5_decompose(f, &b).is_some())
        })
        .collect();
    let sufficient = rows.iter().filter(|r| r.0).count();
    let decomposed = rows.iter().filter(|r| r.1).count();
    let rank = image_dim_estimate(
        f,
        &O5Chart { field: f },
        derive_seed(cfg.seed, &[14, p as u64]),
        trials,
    );
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "trials": trials, "differential_samples": trials })),
        status: Status::from_pass(sufficient == trials && decomposed == trials && rank <= 15),
        metrics: obj(json!({
            "sufficient": sufficient,
            "decomposed": decomposed,
            "o5_differential_rank": rank,
        })),
    })
}

/// A random point `V1 ⊂ U2 ⊂ U7 ⊂ U9` over a random flag `V1 ⊂ V6` with
/// `U2 ⊄ V6`, `U7 ⊃ V6`, and a completion vector off `U9`.
struct PointFrame {
    flag: Flag,
    u2: Subspace,
    u7: Subspace,
    u9: Subspace,
    completion: Vec<u32>,
    generator: Vec<u32>,
}

fn random_point_frame(rng: &mut LabRng, f: PrimeField) -> Result<PointFrame> {
    let n = AMBIENT;
    let v6 = sample_subspace(rng, f, n, 6);
    let v1 = v6.combine(&random_nonzero_vector(rng, f, 6));
    let flag = Flag::new(vec![
        Subspace::span(f, n, std::slice::from_ref(&v1))?,
        v6.clone(),
    ])?;
    let u7 = sample_superspace(rng, &v6, 7);
    let mut generator = u7.quotient_basis(&v6)?.remove(0);
    for (g, x) in generator
        .iter_mut()
        .zip(v6.combine(&random_vector(rng, f, 6)))
    {
        *g = f.add(*g, x);
    }
    let u2 = Subspace::span(f, n, &[generator.clone(), v1])?;
    let u9 = sample_superspace(rng, &u7, 9);
    let completion = loop {
        let c = random_vector(rng, f, n);
        if !u9.contains(&c)? {
            break c;
        }
    };
    Ok(PointFrame {
        flag,
        u2,
        u7,
        u9,
        completion,
        generator,
    })
}

fn check_generation(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(101);
    let f = field(p)?;
    let trials = cfg.outer(50);
    let rows = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<[bool; 3]> {
            let mut rng = sub_rng(cfg.seed, &[15, p as u64, i as u64]);
            let fr = random_point_frame(&mut rng, f)?;
            let target = BElement {
                coords: random_vector(&mut rng, f, B_DIM),
            };
            let s = random_scalar(&mut rng, f);
            let sigma =
                generating_trivector(&fr.flag, &fr.u2, &fr.u7, &fr.u9, &fr.completion, &target, s)?;
            let on_divisor = verify_flag(&sigma, &fr.flag, DivisorKind::D1_6_10)?;
            let od = omega_data(&sigma, &fr.flag)?;
            let perp = od.u7_perp(&fr.u7)? == fr.u9;
            let reproduced = sigma_dprime(&sigma, &od, &fr.u2, &fr.u7)? == target;
            Ok([on_divisor, perp, reproduced])
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |k: usize| rows.iter().filter(|r| r[k]).count();
    let (on, perp, reproduced) = (count(0), count(1), count(2));
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "pairs": trials })),
        status: Status::from_pass(on == trials && perp == trials && reproduced == trials),
        metrics: obj(
            json!({ "on_divisor": on, "perp_is_u9": perp, "target_reproduced": reproduced }),
        ),
    })
}

fn check_dprime_chart(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(5);
    let f = field(p)?;
    let slice = SliceConfig {
        trials: cfg.outer(20),
        budget: cfg.budget.unwrap_or(SliceConfig::default().budget),
        ..SliceConfig::default()
    };
    let mut rng = sub_rng(cfg.seed, &[16, p as u64]);
    let (sigma, od) = d1610(&mut rng, f);
    let chart = |z: &[u32]| dprime_chart_point(&sigma, &od, z).ok();
    let low = slice_dim_estimate(
        f,
        Ambient::Affine(8),
        derive_seed(cfg.seed, &[16, p as u64, 0]),
        &slice,
        |z| chart(z).is_some_and(|b| b.mod_a2(f).rank() <= 2),
    )?;
    let o5 = slice_dim_estimate(
        f,
        Ambient::Affine(8),
        derive_seed(cfg.seed, &[16, p as u64, 1]),
        &slice,
        |z| chart(z).is_some_and(|b| o5_sufficient_member(f, &b)),
    )?;
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "slice": slice, "chart_dim": 8 })),
        status: Status::ReportOnly,
        metrics: obj(json!({
            "dim_mod_a2_rank_le_2": low.estimated_dim,
            "dim_o5_sufficient": o5.estimated_dim,
            "estimates": { "mod_a2_rank_le_2": low, "o5_sufficient": o5 },
        })),
    })
}

fn check_birationality(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(101);
    let f = field(p)?;
    let points = cfg.outer(100);
    const POINTS_PER_SIGMA: usize = 20;
    const ATTEMPTS: usize = 50;
    let rows = (0..points)
        .into_par_iter()
        .map(|i| -> Result<Option<(u64, bool)>> {
            let mut rng = sub_rng(cfg.seed, &[17, p as u64, (i / POINTS_PER_SIGMA) as u64]);
            let (sigma, od) = d1610(&mut rng, f);
            let mut rng = sub_rng(
                cfg.seed,
                &[17, p as u64, (i / POINTS_PER_SIGMA) as u64, i as u64],
            );
            let Some(l) = sample_x11_point(&mut rng, &sigma, &od, ATTEMPTS)? else {
                return Ok(None);
            };
            let probe = birationality_probe(&sigma, &od, &l)?;
            Ok(Some((probe.off_v1, probe.v1_peskine)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sampled = rows.iter().flatten().count();
    let one = rows.iter().flatten().filter(|r| r.0 == 1).count();
    let mut hist = std::collections::BTreeMap::new();
    for r in rows.iter().flatten() {
        *hist.entry(r.0.to_string()).or_insert(0usize) += 1;
    }

    // a line U2 along which sigma'' stays of rank four: every point counts
    let mut rng = sub_rng(cfg.seed, &[17, p as u64, u64::MAX]);
    let fr = random_point_frame(&mut rng, f)?;
    let mut bv = SkewForm::zero(f, A7);
    bv.set(0, 2, 1);
    bv.set(3, 4, 1);
    let target = project_to_b(&bv)?;
    let s = random_scalar(&mut rng, f);
    let sigma = generating_trivector(&fr.flag, &fr.u2, &fr.u7, &fr.u9, &fr.completion, &target, s)?;
    let od = omega_data(&sigma, &fr.flag)?;
    let targeted = birationality_probe(&sigma, &od, &fr.generator)?.off_v1;

    let pass = rate_at_least(one, points, 95, 100) && targeted == p as u64;
    Ok(Outcome {
        primes: vec![p],
        params: obj(
            json!({ "points": points, "points_per_sigma": POINTS_PER_SIGMA, "sampling_attempts": ATTEMPTS }),
        ),
        status: Status::from_pass(pass),
        metrics: obj(json!({
            "sampled": sampled,
            "count_one": one,
            "count_histogram": hist,
            "targeted_line_count": targeted,
        })),
    })
}

fn check_quadric_pencil(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(7);
    let pg = 101;
    let f = field(p)?;
    let seeds = cfg.outer(3);
    let per_seed = cfg.inner(10);
    let mut totals = [0u64; 6];
    for i in 0..seeds {
        let mut rng = sub_rng(cfg.seed, &[18, p as u64, i as u64]);
        let (sigma, od) = d1610(&mut rng, f);
        for _ in 0..per_seed {
            let u7 = sample_superspace(&mut rng, &od.v6, 7);
            let pencil = quadric_pencil(&mut rng, &sigma, &od, &u7)?;
            let c = pencil_coverage(&sigma, &od, &pencil, cfg.budget())?;
            let add = [
                c.common_zeros,
                c.images,
                c.outside,
                c.uncovered,
                c.uncovered_in_y2,
                c.uncovered_low_rank,
            ];
            for (t, a) in totals.iter_mut().zip(add) {
                *t += a;
            }
        }
    }

    let fg = field(pg)?;
    let samples = cfg.outer(100);
    let ranks = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = sub_rng(cfg.seed, &[18, pg as u64, (i / 20) as u64]);
            let (sigma, od) = d1610(&mut rng, fg);
            let mut rng = sub_rng(cfg.seed, &[18, pg as u64, (i / 20) as u64, i as u64]);
            let u7 = sample_superspace(&mut rng, &od.v6, 7);
            let pencil = quadric_pencil(&mut rng, &sigma, &od, &u7)?;
            let (alpha, beta) = (random_scalar(&mut rng, fg), random_scalar(&mut rng, fg));
            pencil.member_rank(alpha, beta)
        })
        .collect::<Result<Vec<_>>>()?;
    let rank_six = ranks.iter().filter(|&&r| r == 6).count();

    let pass = totals[2] == 0 && rate_at_least(rank_six, samples, 9, 10);
    Ok(Outcome {
        primes: vec![p, pg],
        params: obj(json!({ "seeds": seeds, "u7_per_seed": per_seed, "rank_samples": samples })),
        status: Status::from_pass(pass),
        metrics: obj(json!({
            "common_zeros": totals[0],
            "images": totals[1],
            "images_outside_pencil": totals[2],
            "rank_six_members": rank_six,
            "reverse_coverage": {
                "status": Status::ReportOnly,
                "uncovered": totals[3],
                "uncovered_in_y2": totals[4],
                "uncovered_low_rank": totals[5],
            },
        })),
    })
}

fn check_fiber_singularities(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(7);
    let f = field(p)?;
    let seeds = cfg.outer(3);
    let per_seed = cfg.inner(10);
    let mut rows = Vec::new();
    let mut good = 0;
    for i in 0..seeds {
        let mut rng = sub_rng(cfg.seed, &[19, p as u64, i as u64]);
        let (sigma, od) = d1610(&mut rng, f);
        for _ in 0..per_seed {
            let u7 = sample_superspace(&mut rng, &od.v6, 7);
            let pencil = quadric_pencil(&mut rng, &sigma, &od, &u7)?;
            let s = fiber_singularities(&pencil, cfg.budget())?;
            good += usize::from(s.singular < 10 && s.smooth_fraction() > 0.95);
            rows.push(json!([s.points, s.singular]));
        }
    }
    let total = seeds * per_seed;
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "seeds": seeds, "u7_per_seed": per_seed })),
        status: Status::from_pass(rate_at_least(good, total, 9, 10)),
        metrics: obj(json!({ "fibers": total, "conforming": good, "points_singular": rows })),
    })
}

const PLANE_CHUNK: usize = 8;

/// Witnesses over the isotropic extensions of one `D1_6_10` sample with
/// nondegenerate `omega`, scanned
/// in chunks until `cap` are found; the conic fiber sizes over them.
fn k3_seed(cfg: &CheckConfig, f: PrimeField, i: usize, cap: usize) -> Result<(usize, Vec<usize>)> {
    let mut rng = sub_rng(cfg.seed, &[32, f.p() as u64, i as u64]);
    let (sigma, od) = d1610(&mut rng, f);
    let planes = isotropic_extensions(&sigma, &od.flag)?;
    let mut fibers = Vec::new();
    for chunk in planes.chunks(PLANE_CHUNK) {
        let found = chunk
            .par_iter()
            .map(|u8| -> Result<Option<usize>> {
                match k3_member(&sigma, &od.flag, u8)? {
                    Some(u4) => Ok(Some(conic_fiber(&sigma, &u4, u8)?.len())),
                    None => Ok(None),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        fibers.extend(found.into_iter().flatten());
        if fibers.len() >= cap {
            fibers.truncate(cap);
            break;
        }
    }
    Ok((planes.len(), fibers))
}

fn check_k3_conics(cfg: &CheckConfig) -> Result<Outcome> {
    let pw = cfg.prime(3);
    let conic_primes = cfg.primes(&[3, 5]);
    let seeds = cfg.outer(100);
    let capped_seeds = cfg.inner(10);
    let cap = cfg.inner(3);
    let mut metrics = Map::new();

    let f = field(pw)?;
    let full = (0..seeds)
        .map(|i| k3_seed(cfg, f, i, usize::MAX))
        .collect::<Result<Vec<_>>>()?;
    let with_witness = full.iter().filter(|r| !r.1.is_empty()).count();
    metrics.insert(
        format!("p{pw}_planes"),
        json!(full.iter().map(|r| r.0).max().unwrap_or(0)),
    );
    metrics.insert(format!("p{pw}_seeds_with_witness"), json!(with_witness));
    let mut pass = rate_at_least(with_witness, seeds, 8, 10);

    for &p in &conic_primes {
        let sizes: Vec<usize> = if p == pw {
            full.iter().flat_map(|r| r.1.clone()).collect()
        } else {
            let f = field(p)?;
            let mut out = Vec::new();
            for i in 0..capped_seeds {
                out.extend(k3_seed(cfg, f, i, cap)?.1);
            }
            out
        };
        let conics = sizes.iter().filter(|&&s| s == p as usize + 1).count();
        let mut hist = std::collections::BTreeMap::new();
        for s in &sizes {
            *hist.entry(s.to_string()).or_insert(0usize) += 1;
        }
        pass &= rate_at_least(conics, sizes.len(), 9, 10);
        metrics.insert(
            format!("p{p}_fibers"),
            json!({ "fibers": sizes.len(), "p_plus_one": conics, "rate": rate(conics, sizes.len()), "sizes": hist }),
        );
    }
    let mut primes = vec![pw];
    primes.extend(conic_primes.iter().filter(|&&p| p != pw));
    Ok(Outcome {
        primes,
        params: obj(json!({
            "witness_seeds": seeds,
            "capped_seeds": capped_seeds,
            "witnesses_per_capped_seed": cap,
        })),
        status: Status::from_pass(pass),
        metrics,
    })
}

#[derive(Default)]
struct Tally {
    checked: usize,
    positive: usize,
    mismatched: usize,
}

impl Tally {
    fn record(&mut self, a: bool, b: bool) {
        self.checked += 1;
        self.positive += usize::from(a);
        self.mismatched += usize::from(a != b);
    }

    fn to_json(&self) -> Value {
        json!({ "checked": self.checked, "positive": self.positive, "mismatched": self.mismatched })
    }
}

fn move_vec(g: &Matrix, v: &[u32]) -> Vec<u32> {
    g.mul_vec(v).expect("square action")
}

/// Predicates evaluated on `(sigma, input)` and on `(g sigma, g input)`;
/// every tally entry records one pair.
fn equivariance_triple(
    cfg: &CheckConfig,
    f: PrimeField,
    i: usize,
) -> Result<Vec<(&'static str, bool, bool)>> {
    let mut rng = sub_rng(cfg.seed, &[20, f.p() as u64, i as u64]);
    let g = sample_gl(&mut rng, f, AMBIENT);
    let mut out = Vec::new();

    // Peskine membership at the rank-four point and at a random point
    let w = sample_trivector(&mut rng, f, DivisorKind::D1_6_10);
    let gs = w.sigma.gl_act(&g)?;
    let v1 = &w.flag.spaces()[0].basis()[0];
    for u in [v1.clone(), random_nonzero_vector(&mut rng, f, AMBIENT)] {
        out.push((
            "peskine_member",
            peskine_member(&w.sigma, &u)?,
            peskine_member(&gs, &move_vec(&g, &u))?,
        ));
    }

    // divisor flags, certified and random
    for kind in DivisorKind::ALL {
        let w = sample_trivector(&mut rng, f, kind);
        let gs = w.sigma.gl_act(&g)?;
        let gflag = w.flag.image(&g)?;
        out.push((
            "verify_flag",
            verify_flag(&w.sigma, &w.flag, kind)?,
            verify_flag(&gs, &gflag, kind)?,
        ));
        let mut spaces: Vec<Subspace> = Vec::new();
        for &d in kind.flag_dims() {
            let s = match spaces.last() {
                Some(inner) => sample_superspace(&mut rng, inner, d),
                None => sample_subspace(&mut rng, f, AMBIENT, d),
            };
            spaces.push(s);
        }
        let rflag = Flag::new(spaces)?;
        out.push((
            "verify_flag",
            verify_flag(&w.sigma, &rflag, kind)?,
            verify_flag(&gs, &rflag.image(&g)?, kind)?,
        ));
    }

    // Debarre-Voisin membership: sigma vanishing on a coordinate six-space, and a random one
    let mut s0 = Trivector::random(&mut rng, f, AMBIENT)?;
    for (a, b, c) in crate::trivector::triples(AMBIENT) {
        if c < 6 {
            s0.set(a, b, c, 0);
        }
    }
    let h = sample_gl(&mut rng, f, AMBIENT);
    let sigma = s0.gl_act(&h)?;
    let gs = sigma.gl_act(&g)?;
    let u6 = Subspace::coordinate(f, AMBIENT, &[0, 1, 2, 3, 4, 5]).image(&h)?;
    for u in [u6, sample_subspace(&mut rng, f, AMBIENT, 6)] {
        out.push((
            "dv_member",
            dv_member(&sigma, &u)?,
            dv_member(&gs, &u.image(&g)?)?,
        ));
    }

    // K3 isotropy of V6 + P for an omega-isotropic plane P and a random plane
    let (sigma, od) = d1610(&mut rng, f);
    let gs = sigma.gl_act(&g)?;
    let lift = |c: &[u32]| {
        let mut v = vec![0u32; AMBIENT];
        for (&pos, &x) in od.complement.iter().zip(c) {
            v[pos] = x;
        }
        v
    };
    let c1 = random_nonzero_vector(&mut rng, f, 4);
    let row = od.omega.apply(&c1);
    let orth = kernel_of(&Matrix::from_rows(f, 4, &[row])?);
    let c2 = loop {
        let c = orth.combine(&random_vector(&mut rng, f, orth.dim()));
        if Subspace::span(f, 4, &[c1.clone(), c.clone()])?.dim() == 2 {
            break c;
        }
    };
    let mut gens = od.v6.basis().to_vec();
    gens.extend([lift(&c1), lift(&c2)]);
    let isotropic = Subspace::span(f, AMBIENT, &gens)?;
    let random8 = sample_superspace(&mut rng, &od.v6, 8);
    let gv1 = move_vec(&g, &od.v1);
    for u8 in [isotropic, random8] {
        out.push((
            "k3_isotropic",
            k3_isotropic(&sigma, &od.v1, &u8)?,
            k3_isotropic(&gs, &gv1, &u8.image(&g)?)?,
        ));
    }

    // rank of sigma' at a point of U7 off V6
    let gflag = od.flag.image(&g)?;
    let god = omega_data(&gs, &gflag)?;
    let u7 = sample_superspace(&mut rng, &od.v6, 7);
    let gu7 = u7.image(&g)?;
    let l = u7.combine(&random_vector(&mut rng, f, 7));
    if !od.v6.contains(&l)? {
        let r = SigmaPrime::new(&sigma, &od, &u7)?.rank(&l)?;
        let gr = SigmaPrime::new(&gs, &god, &gu7)?.rank(&move_vec(&g, &l))?;
        out.push(("sigma_prime_rank_four", r == 4, gr == 4));
        out.push(("sigma_prime_rank", true, r == gr));
    }

    // dimension of the fiber of the projection from a D3_3_10 sample
    let w = sample_trivector(&mut rng, f, DivisorKind::D3_3_10);
    let v3 = &w.flag.spaces()[0];
    let v4 = sample_superspace(&mut rng, v3, 4);
    let gs = w.sigma.gl_act(&g)?;
    let fiber_dim = |s: &Trivector, a: &Subspace, b: &Subspace| -> Result<Option<i64>> {
        match v4_fiber_affine(s, a, b) {
            Ok(sol) => Ok(Some(sol.map_or(-1, |(_, d)| d.len() as i64))),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let d = fiber_dim(&w.sigma, v3, &v4)?;
    let gd = fiber_dim(&gs, &v3.image(&g)?, &v4.image(&g)?)?;
    out.push(("fiber_dim_zero", d == Some(0), gd == Some(0)));
    out.push(("fiber_dim", true, d == gd));

    // B-side predicates under the parabolic group of A2
    let pc = PencilCubics::new(f)?;
    let gp = sample_parabolic(&mut rng, f);
    let act = |b: &BElement, s: u32| {
        project_to_b(&act_on_bivector(&gp, &b.lift(f, s))).expect("seven-dimensional")
    };
    let inputs = [
        o5_sample(&mut rng, f).1,
        sufficient_normal_form(&mut rng, f),
        BElement {
            coords: random_vector(&mut rng, f, B_DIM),
        },
    ];
    for b in &inputs {
        let gb = act(b, random_scalar(&mut rng, f));
        out.push(("o2_member", pc.o2_member(b), pc.o2_member(&gb)));
        out.push((
            "sing_o2_member",
            pc.sing_o2_member(b),
            pc.sing_o2_member(&gb),
        ));
        out.push((
            "o5_sufficient_member",
            o5_sufficient_member(f, b),
            o5_sufficient_member(f, &gb),
        ));
    }
    Ok(out)
}

fn check_equivariance(cfg: &CheckConfig) -> Result<Outcome> {
    let p = cfg.prime(101);
    let f = field(p)?;
    let trials = cfg.outer(100);
    let results = (0..trials)
        .into_par_iter()
        .map(|i| equivariance_triple(cfg, f, i))
        .collect::<Result<Vec<_>>>()?;
    let mut tallies: std::collections::BTreeMap<&str, Tally> = std::collections::BTreeMap::new();
    for (name, a, b) in results.into_iter().flatten() {
        tallies.entry(name).or_default().record(a, b);
    }
    let mismatched: usize = tallies.values().map(|t| t.mismatched).sum();
    let per: Map<String, Value> = tallies
        .iter()
        .map(|(k, t)| (k.to_string(), t.to_json()))
        .collect();
    Ok(Outcome {
        primes: vec![p],
        params: obj(json!({ "triples": trials })),
        status: Status::from_pass(mismatched == 0),
        metrics: obj(json!({ "predicates": per, "mismatched": mismatched })),
    })
}

/// Thread counts compared by the determinism check.
pub const DETERMINISM_THREADS: [usize; 2] = [1, 4];

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn check_determinism(cfg: &CheckConfig) -> Result<Outcome> {
    let trials = cfg.trials.unwrap_or(1);
    let reduced = CheckConfig {
        seed: cfg.seed,
        p: None,
        trials: Some(trials),
        budget: cfg.budget,
    };
    let mut differing = Vec::new();
    let mut compared = Vec::new();
    for id in CHECK_IDS.iter().filter(|&&id| id != "determinism") {
        let runs = DETERMINISM_THREADS
            .iter()
            .map(|&t| with_threads(t, || run_check(id, &reduced)).map(|r| r.to_json()))
            .collect::<Result<Vec<_>>>()?;
        if runs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(*id);
        }
        compared.push(*id);
    }
    Ok(Outcome {
        primes: Vec::new(),
        params: obj(json!({ "trials": trials, "threads": DETERMINISM_THREADS })),
        status: Status::from_pass(differing.is_empty()),
        metrics: obj(json!({ "compared": compared, "differing": differing })),
    })
}

/// Named loci for the `scan` and `estimate-dim` commands.
pub const LOCI: [&str; 6] = [
    "peskine-6",
    "peskine-8",
    "peskine-10",
    "rank4",
    "o2",
    "sing-o2",
];

/// Hands the ambient space and membership predicate of a named locus to
/// `k`. Trivector loci use `sigma` when given, otherwise a sample drawn from
/// the seed: a general trivector for the Peskine loci and a `D1_6_10` one
/// for `rank4`.
fn with_locus<R>(
    name: &str,
    f: PrimeField,
    seed: u64,
    sigma: Option<&Trivector>,
    k: impl FnOnce(Ambient, &(dyn Fn(&[u32]) -> bool + Sync)) -> Result<R>,
) -> Result<R> {
    let mut rng = sub_rng(seed, &[40]);
    let (n, bound) = match name {
        "peskine-6" => (6, 2),
        "peskine-8" => (8, 4),
        "peskine-10" => (10, 6),
        "rank4" => (10, 4),
        "o2" | "sing-o2" => {
            let pc = PencilCubics::new(f)?;
            return if name == "o2" {
                k(Ambient::Affine(B_DIM), &|x| pc.o2_coords(x))
            } else {
                k(Ambient::Affine(B_DIM), &|x| pc.sing_o2_coords(x))
            };
        }
        _ => {
            return Err(Error::Shape(format!(
                "unknown locus `{name}`; known: {}",
                LOCI.join(", ")
            )))
        }
    };
    let owned;
    let sigma = match sigma {
        Some(s) => {
            if s.n() != n || s.field() != f {
                return Err(Error::Shape(format!(
                    "locus `{name}` needs a trivector on F_{}^{n}",
                    f.p()
                )));
            }
            s
        }
        None => {
            owned = if name == "rank4" {
                sample_trivector(&mut rng, f, DivisorKind::D1_6_10).sigma
            } else {
                Trivector::random(&mut rng, f, n)?
            };
            &owned
        }
    };
    let test = ContractionRankTest::new(sigma, bound);
    k(Ambient::Projective(n), &|u| test.rank_at_most(u))
}

fn locus_report(
    id: &str,
    seed: u64,
    p: u32,
    params: Map<String, Value>,
    metrics: Map<String, Value>,
) -> CheckReport {
    CheckReport {
        check_id: id.to_string(),
        seed,
        p: vec![p],
        params,
        status: Status::ReportOnly,
        metrics,
        runtime_ms: None,
    }
}

/// Exhaustive point count of a named locus.
pub fn scan_locus(
    name: &str,
    p: u32,
    seed: u64,
    budget: u64,
    sigma: Option<&Trivector>,
) -> Result<CheckReport> {
    let f = field(p)?;
    let (ambient, count) = with_locus(name, f, seed, sigma, |amb, pred| {
        Ok((amb, count_locus(f, amb, budget, pred)?))
    })?;
    let params =
        obj(json!({ "locus": name, "budget": budget, "stored_trivector": sigma.is_some() }));
    let metrics = obj(json!({ "count": count, "ambient_points": ambient.point_count(f) }));
    Ok(locus_report("scan", seed, p, params, metrics))
}

/// Slice-count dimension estimate of a named locus.
pub fn estimate_locus(
    name: &str,
    p: u32,
    seed: u64,
    slice: &SliceConfig,
    sigma: Option<&Trivector>,
) -> Result<CheckReport> {
    let f = field(p)?;
    let est: DimEstimate = with_locus(name, f, seed, sigma, |amb, pred| {
        slice_dim_estimate(f, amb, derive_seed(seed, &[41]), slice, pred)
    })?;
    let params = obj(json!({ "locus": name, "slice": slice, "stored_trivector": sigma.is_some() }));
    let mut metrics =
        obj(json!({ "estimated_dim": est.estimated_dim, "ambiguous": est.ambiguous }));
    metrics.insert("estimate".into(), serde_json::to_value(&est)?);
    let mut r = locus_report("estimate-dim", seed, p, params, metrics);
    if est.ambiguous {
        r.status = Status::Ambiguous;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> CheckConfig {
        CheckConfig {
            seed,
            p: None,
            trials: Some(2),
            budget: None,
        }
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(
            run_check("lem-9.9", &CheckConfig::default()),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn ids_are_sorted_and_unique() {
        let mut sorted = CHECK_IDS.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted, CHECK_IDS.to_vec());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<CheckConfig>(r#"{"seed": 1, "primes": [3]}"#).is_err());
        let c: CheckConfig = serde_json::from_str(r#"{"trials": 4}"#).unwrap();
        assert_eq!(
            c,
            CheckConfig {
                trials: Some(4),
                ..CheckConfig::default()
            }
        );
    }

    #[test]
    fn split_and_nonsplit_counts_at_seven() {
        assert_eq!(p2xp2_counts(7), [3249, 2451]);
    }

    #[test]
    fn report_only_checks_never_assert() {
        let r = run_check(
            "rem-3.5",
            &CheckConfig {
                p: Some(101),
                ..quick(3)
            },
        )
        .unwrap();
        assert_eq!(r.status, Status::ReportOnly);
        assert_eq!(r.p, vec![101]);
    }

    #[test]
    fn reports_repeat_byte_for_byte() {
        for id in ["pfaffian", "thm-2.1", "lem-3.6", "pencil-cubics"] {
            let a = run_check(id, &quick(9)).unwrap().to_json();
            let b = run_check(id, &quick(9)).unwrap().to_json();
            assert_eq!(a, b, "{id}");
        }
    }

    #[test]
    fn small_checks_pass() {
        for id in [
            "pfaffian",
            "pencil-cubics",
            "lem-3.15",
            "lem-3.14",
            "equivariance",
        ] {
            let r = run_check(id, &quick(1)).unwrap();
            assert_eq!(r.status, Status::Pass, "{id}: {}", r.to_json());
        }
    }

    #[test]
    fn scan_counts_two_planes_or_none() {
        for seed in 0..4 {
            let r = scan_locus("peskine-6", 5, seed, DEFAULT_BUDGET, None).unwrap();
            let c = r.metrics["count"].as_u64().unwrap();
            assert!(c == 0 || c == 62, "{c}");
        }
        let too_big = scan_locus("o2", 3, 0, 1000, None);
        assert!(matches!(too_big, Err(Error::BudgetExceeded { .. })));
        assert!(scan_locus("nope", 3, 0, 1000, None).is_err());
    }
}
