//! End-to-end acceptance gate. Each numbered check prints a single
//! pass/fail line; the test fails if any check fails, but still reports
//! every line first.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use antisym::embedding::{self, EmbedConfig};
use antisym::encoder::{CodePoint, CoordinateEntry};
use antisym::hamel::{HamelVector, Label};
use antisym::rationals::{self, KSet};
use antisym::verify::{self, CampaignConfig, ExecMode, ProofBranch, VerificationReport};

fn label(text: &str) -> Label {
    Label::parse(text).unwrap()
}

struct Gate {
    lines: Vec<(String, bool)>,
}

impl Gate {
    fn record(&mut self, number: u32, name: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        let line = format!("acceptance {number} {name}: {verdict} ({detail})");
        println!("{line}");
        self.lines.push((line, ok));
    }
}

fn summarize(r: &VerificationReport, elapsed: Duration) -> String {
    format!(
        "{} pairs, {} violations, {:.1}s",
        r.pairs_checked,
        r.violations.len(),
        elapsed.as_secs_f64()
    )
}

fn main() {
    let mode = ExecMode::Parallel;
    let mut gate = Gate { lines: Vec::new() };
    let mut all_reports: Vec<VerificationReport> = Vec::new();

    // 1: exhaustive near-symmetry lemma on the two-label universe.
    let started = Instant::now();
    let universe = [label(""), label("1")];
    let exhaustive = verify::exhaustive_lemma_check(&universe, 5, 1_000_000, mode).unwrap();
    let elapsed = started.elapsed();
    let ok = exhaustive.pairs_checked == 625
        && exhaustive.violations.is_empty()
        && elapsed < Duration::from_secs(10);
    gate.record(1, "exhaustive_lemma", ok, summarize(&exhaustive, elapsed));

    // 2: every proof branch exercised at least 50 times, still violation-free.
    let started = Instant::now();
    let three = [label(""), label("1"), label("101")];
    let coverage = verify::branch_coverage_campaign(&three, 8, 10_000, 0, mode).unwrap();
    let elapsed = started.elapsed();
    let mut counts: Vec<(&str, u64)> = ProofBranch::ALL
        .iter()
        .map(|b| {
            let tag = b.tag();
            let total = exhaustive.branch_histogram.get(tag).copied().unwrap_or(0)
                + coverage.branch_histogram.get(tag).copied().unwrap_or(0);
            (tag, total)
        })
        .collect();
    counts.sort_by_key(|&(_, n)| n);
    let ok = coverage.violations.is_empty()
        && counts.iter().all(|&(_, n)| n >= 50)
        && elapsed < Duration::from_secs(60);
    gate.record(
        2,
        "branch_coverage",
        ok,
        format!(
            "{}, rarest branch {} x{}",
            summarize(&coverage, elapsed),
            counts[0].0,
            counts[0].1
        ),
    );
    all_reports.push(exhaustive);
    all_reports.push(coverage);

    // 3: containment chain around 50 random points; 10^4 sampled shifts total.
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let pool = [label(""), label("1"), label("01"), label("11"), label("101")];
    let mut points = Vec::new();
    while points.len() < 50 {
        let mut picks = pool.to_vec();
        picks.shuffle(&mut rng);
        picks.truncate(rng.gen_range(1..=3));
        let x = HamelVector::from_terms(picks.into_iter().map(|l| {
            (l, rationals::enumerate_u64(rng.gen_range(1..=6)))
        }));
        if x.is_zero() {
            continue;
        }
        match x.separation_index() {
            Ok(n) if n <= 4 => points.push(x),
            _ => continue,
        }
    }
    let cfg = CampaignConfig::default();
    let mut sampled_total = 0u64;
    let mut sized_ok = 0u64;
    let mut violation_total = 0usize;
    for (i, x) in points.iter().enumerate() {
        let r = verify::containment_campaign(x, 200, 1000 + i as u64, &cfg, mode).unwrap();
        sampled_total += r.checks.get("sampled_shift").copied().unwrap_or(0);
        sized_ok += r.checks.get("exceptional_set_size_ok").copied().unwrap_or(0);
        violation_total += r.violations.len();
        all_reports.push(r);
    }
    let elapsed = started.elapsed();
    let ok = sampled_total == 10_000
        && sized_ok == 50
        && violation_total == 0
        && elapsed < Duration::from_secs(300);
    gate.record(
        3,
        "containment",
        ok,
        format!(
            "50 points, {sampled_total} sampled shifts, {violation_total} violations, {:.1}s",
            elapsed.as_secs_f64()
        ),
    );

    // 4: the embedding is injective and uniformly separating block by block.
    let started = Instant::now();
    let embed_cfg = EmbedConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut modulus_ok = true;
    for _ in 0..500 {
        let s = random_point(&mut rng);
        let t = random_point(&mut rng);
        let vs = embedding::embed_raw(&s, &embed_cfg).unwrap();
        let vt = embedding::embed_raw(&t, &embed_cfg).unwrap();
        let diff = vs.abs_diff(&vt);
        for k in 1..=4u32 {
            if !diff.at_least_pow3_neg(embedding::block_offset(k)) {
                let agrees = (0..k as usize).all(|i| s.coordinate(i) == t.coordinate(i));
                modulus_ok &= agrees;
            }
        }
    }
    let mut seen_points: HashSet<CodePoint> = HashSet::new();
    while seen_points.len() < 10_000 {
        seen_points.insert(random_point(&mut rng));
    }
    let mut values = HashSet::new();
    let mut range_ok = true;
    for p in &seen_points {
        let v = embedding::embed_raw(p, &embed_cfg).unwrap();
        let q = v.to_rational();
        // in [0, 1), denominator a power of 3
        range_ok &= !q.is_negative() && (&q - &rationals::Rational::one()).is_negative()
            || q.is_zero();
        let mut den = q.denom().magnitude().clone();
        let three = num_bigint::BigUint::from(3u8);
        while (&den % &three) == num_bigint::BigUint::ZERO {
            den /= &three;
        }
        range_ok &= den == num_bigint::BigUint::from(1u8);
        values.insert(v);
    }
    let distinct_ok = values.len() == seen_points.len();
    let elapsed = started.elapsed();
    let ok = modulus_ok && distinct_ok && range_ok && elapsed < Duration::from_secs(60);
    gate.record(
        4,
        "embedding_modulus",
        ok,
        format!(
            "modulus {}, {} of {} values distinct, range {}, {:.1}s",
            modulus_ok,
            values.len(),
            seen_points.len(),
            range_ok,
            elapsed.as_secs_f64()
        ),
    );

    // 5: the rational enumeration round-trips and is injective.
    let started = Instant::now();
    let mut seen = HashSet::new();
    let mut round_trip_ok = true;
    for j in 0..100_000u64 {
        let q = rationals::enumerate_u64(j);
        round_trip_ok &= rationals::index_of(&q).unwrap().to_u64() == Some(j);
        seen.insert(q);
    }
    let zero_first = rationals::enumerate_u64(0).is_zero();
    let elapsed = started.elapsed();
    let ok = round_trip_ok
        && seen.len() == 100_000
        && zero_first
        && elapsed < Duration::from_secs(10);
    gate.record(
        5,
        "rational_enumeration",
        ok,
        format!(
            "10^5 round trips, {} distinct, q_0 = 0: {}, {:.1}s",
            seen.len(),
            zero_first,
            elapsed.as_secs_f64()
        ),
    );

    // 6: the instance at the origin.
    let started = Instant::now();
    let zero = HamelVector::zero();
    let zset = verify::exceptional_set(&zero, 10).unwrap();
    let zset_ok = zset == vec![HamelVector::zero()];
    let r = verify::containment_campaign(&zero, 1000, 5, &cfg, mode).unwrap();
    let elapsed = started.elapsed();
    let ok = zset_ok
        && r.violations.is_empty()
        && r.checks.get("sampled_shift").copied() == Some(1000)
        && elapsed < Duration::from_secs(30);
    gate.record(
        6,
        "zero_point",
        ok,
        format!("exceptional set {{0}}: {zset_ok}, {}", summarize(&r, elapsed)),
    );
    all_reports.push(r);

    // 7: close pairs always have matching separation indices on both sides.
    let equal_n_violations: usize = all_reports
        .iter()
        .flat_map(|r| &r.violations)
        .filter(|v| v.check == "equal_n")
        .count();
    let pairs: u64 = all_reports.iter().map(|r| r.pairs_checked).sum();
    gate.record(
        7,
        "equal_n_side_condition",
        equal_n_violations == 0,
        format!("{pairs} pairs across all campaigns, {equal_n_violations} violations"),
    );

    let failed: Vec<&str> = gate
        .lines
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(l, _)| l.as_str())
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}

/// Random code point with coordinates 0..=3, entries well-formed per width.
fn random_point(rng: &mut ChaCha8Rng) -> CodePoint {
    let mut coords = Vec::new();
    for i in 0..=3u32 {
        let slots = 1u32 << i;
        let count = rng.gen_range(0..=slots.min(3));
        let mut zetas: Vec<u32> = (0..slots).collect();
        zetas.shuffle(rng);
        zetas.truncate(count as usize);
        let entries = zetas
            .into_iter()
            .map(|bits| {
                let zeta: String = (0..i)
                    .map(|b| if bits >> b & 1 == 1 { '1' } else { '0' })
                    .collect();
                let mask_cap = 1u64 << i;
                CoordinateEntry {
                    zeta,
                    parity: rng.gen_range(0..2u8),
                    k_eta: KSet::from_mask(i, rng.gen_range(0..mask_cap)),
                    k_xi: KSet::from_mask(i, rng.gen_range(0..mask_cap)),
                }
            })
            .collect();
        coords.push(entries);
    }
    CodePoint::new(coords).unwrap()
}
