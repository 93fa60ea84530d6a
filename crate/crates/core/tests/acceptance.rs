//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails. Every check recomputes its
//! expectation here rather than trusting the library's own verifiers.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::TestRunner;

use cdvq::families::{scan_family, Family, RecordVerdict, ScanCaps};
use cdvq::lemmas::{nc_gamma0_scan, nc_hypothesis, terminal_conclusion, terminal_scan, TerminalConclusion};
use cdvq::pipeline::{classify, ClassifyOptions};
use cdvq::series::semiinvariant_monomials;
use cdvq::valuation::{sublevel_enumerate, Certificate};
use cdvq::{Monomial, Rational, SeriesSupport, SeriesType, WeightSystem};

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

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn m(e: [u32; 4]) -> Monomial {
    Monomial(e)
}

/// `Σ{j a_i/r} = {j e/r} + j/r + 1` for all `1 <= j < r`, on numerators.
fn terminal_identity(r: i64, a: [i64; 4], e: i64) -> bool {
    (1..r).all(|j| a.iter().map(|&x| (j * x).rem_euclid(r)).sum::<i64>() - (j * e).rem_euclid(r) == j + r)
}

fn pairing_is_valid(r: i64, a: [i64; 4], e: i64, c: &TerminalConclusion) -> bool {
    let zero = |x: i64| x.rem_euclid(r) == 0;
    match *c {
        TerminalConclusion::Divisible { unit, pair } => {
            let mut idx = [unit, pair.0, pair.1];
            idx.sort();
            gcd(e, r) > 1
                && idx == [1, 2, 3]
                && zero(a[3] - e)
                && zero(a[unit - 1] - 1)
                && zero(a[pair.0 - 1] + a[pair.1 - 1])
        }
        TerminalConclusion::Coprime { pairs } => {
            let v = [a[0], a[1], a[2], a[3], -e, -1];
            let mut idx: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
            idx.sort();
            gcd(e, r) == 1 && idx == [1, 2, 3, 4, 5, 6] && pairs.iter().all(|&(i, j)| zero(v[i - 1] + v[j - 1]))
        }
    }
}

fn terminal_exhaustive() -> Outcome {
    let mut holds = 0u64;
    let mut bad = Vec::new();
    let mut canonical = BTreeSet::new();
    for r in 2..=30i64 {
        let units: Vec<i64> = (1..r).filter(|&x| gcd(x, r) == 1).collect();
        for &a1 in &units {
            for &a2 in &units {
                for &a3 in &units {
                    for a4 in 0..r {
                        for e in 0..r {
                            let a = [a1, a2, a3, a4];
                            if gcd(a4, r) != gcd(e, r) || !terminal_identity(r, a, e) {
                                continue;
                            }
                            holds += 1;
                            let ws = WeightSystem::new(r, a, e).expect("hypothesis implies the setting");
                            match terminal_conclusion(&ws) {
                                Ok(c) if pairing_is_valid(r, a, e, &c) => {}
                                other => bad.push(format!("{ws}: {other:?}")),
                            }
                            let mut head = [a1, a2, a3];
                            head.sort();
                            canonical.insert((r, [head[0], head[1], head[2], a4], e));
                        }
                    }
                }
            }
        }
    }
    let library: BTreeSet<(i64, [i64; 4], i64)> = terminal_scan(30)
        .witnesses
        .iter()
        .map(|(ws, _)| (ws.r(), ws.a(), ws.e()))
        .collect();
    let same = library == canonical;
    outcome(
        bad.is_empty() && same,
        format!(
            "{holds} ordered tuples satisfy the hypothesis, {} counterexamples, library scan {} the {} unordered tuples",
            bad.len(),
            if same { "matches" } else { "DIFFERS from" },
            canonical.len()
        ),
    )
}

/// Brute force over `[0, bound]^4` shifts of the non-integral classes;
/// coordinates of every point with `diff <= 1`, sorted.
fn brute_sublevel(r: i64, a: [i64; 4], monomials: &[Monomial], bound: i64) -> Vec<[Rational; 4]> {
    let mut out = Vec::new();
    for j in 1..r {
        let base = a.map(|x| (j * x).rem_euclid(r));
        if base == [0; 4] {
            continue;
        }
        for c0 in 0..=bound {
            for c1 in 0..=bound {
                for c2 in 0..=bound {
                    for c3 in 0..=bound {
                        let n = [base[0] + r * c0, base[1] + r * c1, base[2] + r * c2, base[3] + r * c3];
                        let total: i64 = n.iter().sum();
                        let worst = monomials
                            .iter()
                            .map(|mono| total - (0..4).map(|i| mono.0[i] as i64 * n[i]).sum::<i64>())
                            .max()
                            .unwrap();
                        if worst <= r {
                            out.push(n.map(|x| Rational::new(x, r)));
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn min_diff(r: i64, a: [i64; 4], monomials: &[Monomial], bound: i64) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for j in 1..r {
        let base = a.map(|x| (j * x).rem_euclid(r));
        for c in 0..(bound + 1).pow(4) {
            let shift = [c % (bound + 1), c / (bound + 1) % (bound + 1), c / (bound + 1).pow(2) % (bound + 1), c / (bound + 1).pow(3)];
            let w: [Rational; 4] = [0, 1, 2, 3].map(|i| Rational::new(base[i] + r * shift[i], r));
            let total: Rational = w.iter().copied().sum();
            let d = monomials
                .iter()
                .map(|mono| total - (0..4).map(|i| w[i] * mono.0[i] as i64).sum::<Rational>())
                .max()
                .unwrap();
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

fn worked_example() -> Outcome {
    let (r, a, e) = (5, [3, 1, 2, 4], 4);
    let ws = WeightSystem::new(r, a, e).unwrap();
    let f = [m([1, 1, 0, 0]), m([0, 0, 2, 0]), m([0, 0, 0, 6])];
    let v = classify(&ws, SeriesType::CA, &f, &ClassifyOptions::default());
    let Some(w) = v.witness.as_ref().and_then(|o| o.witness()) else {
        return outcome(false, format!("no witness: {:?}", v.witness));
    };
    let expected = [2, 4, 3, 1].map(|x| Rational::new(x, 5));
    // b (a + 1) ≡ 1 mod r for the family parameter a = 3.
    let b = (1..r).find(|b| (b * 4) % r == 1).unwrap();
    let alpha_b = [r - b + 1, b, b - 1, 1].map(|x| Rational::new(x, r));
    let beta = w.beta.map(|x| x.coords());
    let family = v.normal_forms.iter().any(|nf| nf.family == Family::CaC && nf.a == Some(3));
    let labels = ["1", "2", "3", "4a", "4b", "4c", "5"];
    let conditions = v.structure.as_ref().is_some_and(|s| {
        s.conditions.keys().map(String::as_str).collect::<BTreeSet<_>>() == labels.into_iter().collect()
            && s.all_pass()
    });
    let brute = brute_sublevel(r, a, &f, 9);
    let pass = w.k == 2 && beta == Some(expected) && alpha_b == expected && family && conditions && brute == vec![expected];
    outcome(
        pass,
        format!(
            "k = {}, beta = {:?}, alpha_{b} = {:?}, cA-C(3) matched: {family}, conditions 1-5 pass: {conditions}, brute-force sublevel set = {:?}",
            w.k,
            w.beta.map(|x| x.to_string()),
            alpha_b.map(|x| x.to_string()),
            brute.iter().map(|p| p.map(|x| x.to_string())).collect::<Vec<_>>()
        ),
    )
}

fn k1_control() -> Outcome {
    let (r, a, e) = (2, [1, 1, 0, 1], 0);
    let ws = WeightSystem::new(r, a, e).unwrap();
    let f = [m([1, 1, 0, 0]), m([0, 0, 2, 0]), m([0, 0, 0, 2])];
    let v = classify(&ws, SeriesType::CA, &f, &ClassifyOptions::default());
    let w = v.witness.as_ref().and_then(|o| o.witness());
    let empty = w.is_some_and(|w| w.k == 1 && w.beta.is_none() && w.evidence.points.is_empty());
    let low = min_diff(r, a, &f, 6);
    let pass = empty && low == Some(Rational::new(3, 2)) && brute_sublevel(r, a, &f, 6).is_empty();
    outcome(
        pass,
        format!(
            "k = {:?}, sublevel set empty: {empty}, minimum diff over [0,6]^4 shifts = {}",
            w.map(|w| w.k),
            low.map_or("none".into(), |x| x.to_string())
        ),
    )
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in combinations(n, k - 1) {
            if rest.first().is_none_or(|&x| x > first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
    }
    out
}

fn sublevel_oracle() -> Outcome {
    let (mut compared, mut skipped, mut beyond, mut widest) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    for family in Family::ALL {
        for r in 2..=12 {
            for p in family.parameters(r) {
                let Ok(ws) = family.generate(r, p.unwrap_or(0)) else { continue };
                let f_type = family.series_type();
                let pool = semiinvariant_monomials(&ws, f_type, 6).unwrap_or_default();
                for size in 1..=2.min(pool.len()) {
                    for pick in combinations(pool.len(), size) {
                        let g: Vec<Monomial> = pick.iter().map(|&i| pool[i]).collect();
                        let Ok(s) = SeriesSupport::new(&ws, f_type, &g) else { continue };
                        let set = sublevel_enumerate(&ws, &s, false);
                        if !set.bounded {
                            skipped += 1;
                            continue;
                        }
                        compared += 1;
                        let small = s.max_degree() as i64 + 3;
                        let certified = match &set.certificate {
                            Certificate::Maximin { norm_bound, .. } => norm_bound.floor(),
                            Certificate::NoLatticePoints { search_box, .. } => {
                                search_box.iter().map(|x| x.ceil()).max().unwrap()
                            }
                            Certificate::Recession { .. } => unreachable!("bounded"),
                        };
                        let bound = small.max(certified);
                        widest = widest.max(bound);
                        let brute = brute_sublevel(r, ws.a(), &s.monomials(), bound);
                        if brute.iter().any(|p| p.iter().any(|&x| x > Rational::from_int(small))) {
                            beyond += 1;
                        }
                        let mut found: Vec<[Rational; 4]> = set.points.iter().map(|p| p.weight.coords()).collect();
                        found.sort();
                        if found != brute {
                            bad.push(format!("{ws} f = {s}"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{compared} bounded supports compared, {skipped} unbounded skipped, {} discrepancies; \
             {beyond} supports have points outside [0, maxdeg+3]^4, so the cube is widened to the certified bound (largest side {widest}){}",
            bad.len(),
            bad.first().map_or(String::new(), |b| format!("; first: {b}"))
        ),
    )
}

fn structure_property() -> Outcome {
    let caps = ScanCaps {
        r_max: 25,
        k_max: 3,
        d_max: 8,
        s_max: 3,
        cab_overlap: false,
    };
    let (mut records, mut valid, mut g_checked) = (0, 0, 0);
    let mut bad = Vec::new();
    for family in Family::ALL {
        for rec in scan_family(family, &caps) {
            records += 1;
            let RecordVerdict::Valid { beta, .. } = rec.verdict else { continue };
            valid += 1;
            let (r, a, e) = (rec.weights.r(), rec.weights.a(), rec.weights.e());
            if !terminal_identity(r, a, e) {
                bad.push(format!("{} f = {}: terminal identity", rec.weights, rec.support));
            }
            if family != Family::CdeA {
                continue;
            }
            let Some(beta) = beta else { continue };
            let b = beta.coords();
            for j in 1..r {
                let alpha = a.map(|x| Rational::new((j * x).rem_euclid(r), r));
                let on_line = (0..r).any(|t| (0..4).all(|i| (alpha[i] - b[i] * t).is_integer()));
                if on_line {
                    continue;
                }
                g_checked += 1;
                let weight = rec
                    .support
                    .g()
                    .iter()
                    .map(|mono| (0..4).map(|i| alpha[i] * mono.0[i] as i64).sum::<Rational>())
                    .min()
                    .unwrap();
                if weight != Rational::ONE {
                    bad.push(format!("{} f = {}: alpha_{j}(g) = {weight}", rec.weights, rec.support));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{records} records, {valid} valid, {g_checked} cDE-a (j, record) pairs off the beta line, {} violations{}",
            bad.len(),
            bad.first().map_or(String::new(), |b| format!("; first: {b}"))
        ),
    )
}

/// Both conditions of the non-canonical hypothesis, in rationals.
fn nc_holds(r: i64, a: [i64; 4], e: i64, k0: i64, delta: Rational) -> bool {
    let frac = |n: i64| Rational::new(n.rem_euclid(r), r);
    let lhs = |k: i64| a.iter().map(|&x| frac(k * x)).sum::<Rational>();
    let k0r = Rational::new(k0, r);
    lhs(k0) == frac(k0 * e) + k0r && (1..r).filter(|&k| k != k0).all(|k| lhs(k) >= frac(k * e) + k0r + delta)
}

fn non_canonical() -> Outcome {
    let half = Rational::new(1, 2);
    let ws = WeightSystem::residues(4, [1, 1, 1, 1], 3).unwrap();
    let witness = nc_hypothesis(&ws, 1, half) && nc_holds(4, [1, 1, 1, 1], 3, 1, half);
    let contains = nc_gamma0_scan(half, 4).values.contains(&Rational::from_int(4));

    let delta = Rational::new(1, 14);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| nc_gamma0_scan(delta, 40))
    };
    let one = run(1);
    let two = run(2);
    let identical = serde_json::to_string(&one).unwrap() == serde_json::to_string(&two).unwrap();
    let rechecked = one.witnesses.iter().all(|w| {
        nc_holds(w.r, w.a, w.e, w.k0, delta) && w.index == w.r / gcd(w.r, w.k0)
    });
    outcome(
        witness && contains && identical && rechecked,
        format!(
            "witness passes: {witness}, delta = 1/2 scan contains 4: {contains}; delta = 1/14, r <= 40: {} witnesses, \
             {} values, rechecked: {rechecked}, 1 vs 2 threads byte-identical: {identical}",
            one.witnesses.len(),
            one.values.len()
        ),
    )
}

fn invariants() -> Outcome {
    const CASES: u32 = 10_000;
    let mut failures = Vec::new();
    let mut run = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };
    let runner = || TestRunner::new(common::config(CASES));
    run(
        "complement involution",
        runner()
            .run(&(common::weight_system(40), any::<i64>()), |(ws, j)| common::complement_involution(&ws, j))
            .map_err(|e| e.to_string()),
    );
    run(
        "opposite classes",
        runner()
            .run(&(common::weight_system(40), any::<i64>()), |(ws, j)| common::alpha_pairs(&ws, j))
            .map_err(|e| e.to_string()),
    );
    let shift = || prop::array::uniform4(0i64..4);
    run(
        "midpoint convexity",
        runner()
            .run(
                &(common::system_with_support(13, 6), any::<i64>(), shift(), any::<i64>(), shift()),
                |((ws, s), i, cu, j, cd)| common::convexity(&ws, &s, i, cu, j, cd),
            )
            .map_err(|e| e.to_string()),
    );
    run(
        "permutation equivariance",
        runner()
            .run(&(common::system_with_support(11, 5), any::<usize>()), |((ws, s), pick)| {
                common::permutation_equivariance(&ws, &s, pick)
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "domination pruning",
        runner()
            .run(
                &(
                    common::system_with_support(13, 6),
                    any::<usize>(),
                    prop::array::uniform4(0u32..3),
                    any::<i64>(),
                    shift(),
                ),
                |((ws, s), pick, extra, j, c)| common::domination_pruning(&ws, &s, pick, extra, j, c),
            )
            .map_err(|e| e.to_string()),
    );
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("5 properties x {CASES} cases")
        } else {
            failures.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("terminal lemma, exhaustive r <= 30", terminal_exhaustive),
        ("worked example r = 5", worked_example),
        ("k = 1 control r = 2", k1_control),
        ("sublevel search vs brute force, r <= 12", sublevel_oracle),
        ("ten families r <= 25, k <= 3, D = 8", structure_property),
        ("non-canonical lemma", non_canonical),
        ("invariant suites", invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} [{}] {name} ({:.1} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
