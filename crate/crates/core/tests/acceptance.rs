//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; the process exits nonzero if any fails.
//!
//! Oracles here are written independently of the library: ranks come from
//! 3x3 / 4x4 determinants and the progression condition from brute force.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use mrcode::family::verify_zero_sum_property;
use mrcode::progfree::{alon_construct, size_bound};
use mrcode::sim::simulate;
use mrcode::{construct, ErasurePattern, FamilyError, MrCode, VerifyMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const SIM_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(r: u32, q: u64) -> MrCode {
    construct(r, q, None, VerifyMode::Exhaustive).expect("fixture builds").code
}

fn det_mod(m: &[Vec<u64>], q: u64) -> u64 {
    let n = m.len();
    if n == 1 {
        return m[0][0] % q;
    }
    let mut acc = 0u64;
    for j in 0..n {
        let minor: Vec<Vec<u64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
            .collect();
        let term = m[0][j] * det_mod(&minor, q) % q;
        acc = if j % 2 == 0 { (acc + term) % q } else { (acc + q - term) % q };
    }
    acc
}

/// Rank is full (= k) iff some k-subset of the columns has a nonzero
/// determinant.
fn full_rank(code: &MrCode, columns: &[usize]) -> bool {
    let g = code.generator().to_rows();
    let q = code.field().modulus();
    let k = g.len();
    columns.iter().copied().combinations(k).any(|sub| {
        let m: Vec<Vec<u64>> = g.iter().map(|row| sub.iter().map(|&c| row[c]).collect()).collect();
        det_mod(&m, q) != 0
    })
}

/// Rank as the size of the largest nonzero minor.
fn column_rank(code: &MrCode, columns: &[usize]) -> usize {
    let g = code.generator().to_rows();
    let q = code.field().modulus();
    (1..=columns.len())
        .rev()
        .find(|&s| {
            columns.iter().copied().combinations(s).any(|cols| {
                (0..g.len()).combinations(s).any(|rows| {
                    let m: Vec<Vec<u64>> =
                        rows.iter().map(|&i| cols.iter().map(|&c| g[i][c]).collect()).collect();
                    det_mod(&m, q) != 0
                })
            })
        })
        .unwrap_or(0)
}

fn groups_of(code: &MrCode) -> Vec<Vec<usize>> {
    (0..code.group_count()).map(|g| code.group_columns(g).collect()).collect()
}

fn mr_scan(r: u32, q: u64, n: usize, subsets: u64) -> Outcome {
    let code = fixture(r, q);
    let start = Instant::now();
    let report = code.verify_mr(VerifyMode::Exhaustive);
    let elapsed = start.elapsed();
    let k = r as usize + 1;
    let groups = groups_of(&code);

    let mut oracle_deficient = Vec::new();
    for cols in (0..code.len()).combinations(k) {
        if column_rank(&code, &cols) < k {
            oracle_deficient.push(cols);
        }
    }
    let group_ranks_ok = groups.iter().all(|g| column_rank(&code, g) == r as usize);
    let local_ok = groups.iter().all(|g| {
        g.iter()
            .copied()
            .combinations(r as usize)
            .all(|s| column_rank(&code, &s) == r as usize)
    });
    let pass = code.len() == n
        && code.dimension() == k
        && report.passed()
        && !report.sampled
        && report.mds_subsets_checked == subsets
        && report.deficient_subsets == groups
        && oracle_deficient == groups
        && group_ranks_ok
        && local_ok
        && report.local_distance_ok
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "n={} k={} subsets={} deficient={:?} local_ok={} in {:.3}s (limit 1s)",
            code.len(),
            code.dimension(),
            report.mds_subsets_checked,
            report.deficient_subsets,
            local_ok,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_1() -> Outcome {
    mr_scan(2, 101, 6, 20)
}

fn criterion_2() -> Outcome {
    mr_scan(3, 653, 8, 70)
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (r, q) in [(2, 101), (3, 653)] {
        let code = fixture(r, q);
        let ts: Vec<Vec<u64>> = code.family().transversals().iter().map(|t| t.elements.clone()).collect();
        let report = verify_zero_sum_property(&ts, q - 1, r).expect("small family");
        let expected = mrcode::family::binomial(code.len() as u128, r as u128 + 1) as u64;
        pass &= report.passed() && !report.sampled && report.subsets_checked == expected;
        notes.push(format!("r={r}: {} subsets", report.subsets_checked));
    }
    let planted = vec![vec![10, 40, 50], vec![20, 35, 45], vec![70, 12, 18]];
    let report = verify_zero_sum_property(&planted, 100, 2).expect("small family");
    pass &= report.witness == Some(vec![10, 20, 70]);
    notes.push(format!("planted witness {:?}", report.witness));
    outcome(pass, notes.join(", "))
}

/// True iff some `d_0 + ... + d_{r-1} = r d_r` with the `d_i` not all equal.
fn brute_force_violation(set: &[u64], r: u32) -> bool {
    let members: std::collections::HashSet<u64> = set.iter().copied().collect();
    set.iter()
        .copied()
        .combinations_with_replacement(r as usize)
        .any(|lhs| {
            let sum: u64 = lhs.iter().sum();
            sum % r as u64 == 0
                && members.contains(&(sum / r as u64))
                && lhs.iter().any(|&d| d != lhs[0])
        })
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for m in [16u64, 256, 4096] {
        for r in [2u32, 3] {
            match alon_construct(m, r) {
                Ok(set) => {
                    let elements = set.elements();
                    let in_range = elements.iter().all(|&x| (1..=m).contains(&x));
                    let free = !brute_force_violation(elements, r);
                    let bound = size_bound(m, r);
                    let big = elements.len() as f64 >= bound;
                    pass &= in_range && free && big;
                    notes.push(format!("({m},{r}):|D|={}>={bound:.3}", elements.len()));
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("({m},{r}): {e}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    notes.push(format!("in {:.3}s (limit 10s)", elapsed.as_secs_f64()));
    outcome(pass, notes.join(" "))
}

fn random_message(code: &MrCode, rng: &mut impl Rng) -> Vec<u64> {
    let q = code.field().modulus();
    (0..code.dimension()).map(|_| rng.gen_range(0..q)).collect()
}

fn criterion_5() -> Outcome {
    let code = fixture(2, 101);
    let n = code.len();
    let groups = groups_of(&code);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let start = Instant::now();
    let (mut decodable, mut mismatches, mut class_failures, mut round_trips) = (0, 0, 0, 0u64);
    for mask in 0u32..1 << n {
        let erased: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let survivors: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
        let pattern = ErasurePattern::new(n, erased).unwrap();
        let expected = full_rank(&code, &survivors);
        let in_class = survivors.len() >= 3
            && groups.iter().all(|g| g.iter().filter(|c| survivors.contains(c)).count() <= 2);
        let mut all_ok = true;
        for _ in 0..100 {
            let message = random_message(&code, &mut rng);
            let received = pattern.apply(&code.encode(&message).unwrap());
            match code.decode(&received) {
                Ok(m) if m == message => round_trips += 1,
                _ => all_ok = false,
            }
        }
        if expected {
            decodable += 1;
        }
        if all_ok != expected || code.is_correctable(&pattern) != expected {
            mismatches += 1;
        }
        if in_class && !all_ok {
            class_failures += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0
        && class_failures == 0
        && round_trips == decodable * 100
        && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "64 patterns, {decodable} decodable, {mismatches} mismatches, {class_failures} class failures, {round_trips} round trips in {:.3}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let code = fixture(2, 101);
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let (mut cases, mut good) = (0, 0);
    for g in 0..code.group_count() {
        for position in code.group_columns(g) {
            cases += 1;
            let ok = (0..100).all(|_| {
                let codeword = code.encode(&random_message(&code, &mut rng)).unwrap();
                let received = ErasurePattern::new(code.len(), [position]).unwrap().apply(&codeword);
                match code.local_repair(&received, g, position) {
                    Ok(rep) => {
                        rep.value == codeword[position]
                            && rep.read.len() == 2
                            && rep.read.iter().all(|&c| code.group_of(c) == g && c != position)
                    }
                    Err(_) => false,
                }
            });
            good += ok as usize;
        }
    }
    outcome(cases == 6 && good == 6, format!("{good}/{cases} cases x 100 messages, 2 reads each"))
}

fn criterion_7() -> Outcome {
    let code = fixture(2, 101);
    let n = code.len();
    let p = 0.1f64;
    let mut exact = 0.0;
    for mask in 0u32..1 << n {
        let survivors: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
        if !full_rank(&code, &survivors) {
            let e = mask.count_ones() as i32;
            exact += p.powi(e) * (1.0 - p).powi(n as i32 - e);
        }
    }
    let trials = 10_000u64;
    let report = simulate(&code, p, trials, SIM_SEED).unwrap();
    let observed = report.failure_rate();
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    let z = (observed - exact) / se;
    outcome(
        z.abs() <= 3.0,
        format!("observed {observed:.5} vs exact {exact:.6}, z = {z:.2} (limit |z| <= 3, seed {SIM_SEED})"),
    )
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (r, q) in [(2u32, 101u64), (3, 653)] {
        let code = fixture(r, q);
        let g = code.generator().clone();
        let (mut entries, mut caught) = (0, 0);
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let mut bad = g.clone();
                bad.set(i, j, (g.get(i, j) + 1) % q);
                let mutated =
                    MrCode::with_generator(code.field().clone(), code.family().clone(), bad).unwrap();
                let report = mutated.verify_mr(VerifyMode::Exhaustive);
                entries += 1;
                caught += (!report.passed()) as usize;
            }
        }
        let ts: Vec<Vec<u64>> = code.family().transversals().iter().map(|t| t.elements.clone()).collect();
        let (mut exps, mut exps_caught) = (0, 0);
        for t in 0..ts.len() {
            for i in 0..ts[t].len() {
                let mut bad = ts.clone();
                bad[t][i] = (bad[t][i] + 1) % (q - 1);
                exps += 1;
                let detected = match verify_zero_sum_property(&bad, q - 1, r) {
                    Ok(report) => !report.passed(),
                    Err(FamilyError::Collision(_)) => true,
                    Err(_) => false,
                };
                exps_caught += detected as usize;
            }
        }
        pass &= caught == entries && exps_caught == exps;
        notes.push(format!("r={r}: G {caught}/{entries}, exponents {exps_caught}/{exps}"));
    }
    outcome(pass, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exhaustive MR verification, r=2, q=101", criterion_1),
        ("exhaustive MR verification, r=3, q=653", criterion_2),
        ("zero-sum characterization and planted violation", criterion_3),
        ("digit construction is progression-free and large", criterion_4),
        ("decoder completeness over all 64 patterns", criterion_5),
        ("local repair reads r symbols of its group", criterion_6),
        ("simulation within 3 standard errors of exact", criterion_7),
        ("single-entry and single-exponent mutations detected", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, result.detail);
        failed += (!result.pass) as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
