//! Fractional-part lemmas: the terminal lemma, the non-canonical lemma,
//! the bounded-index oracle, and the `α_j(g) = 1` check for the family
//! `1/r(0, a, -a, 1; 0)`.
//!
//! Identities of the form `Σ{x_i} = ...` are evaluated on numerators scaled
//! by `r`, so every comparison is an integer comparison.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::series::{SeriesSupport, SeriesType};
use crate::valuation::BetaWitness;
use crate::weights::{gcd, modr, Rational, WeightSystem};

/// `r · (Σ{j a_i / r} - {j e / r})`.
pub fn scaled_excess(ws: &WeightSystem, j: i64) -> i64 {
    let r = ws.r();
    ws.a().iter().map(|&ai| modr(j * ai, r)).sum::<i64>() - modr(j * ws.e(), r)
}

/// `Σ{j a_i / r} = {j e / r} + j/r + 1` for every `1 <= j <= r-1`.
pub fn terminal_hypothesis(ws: &WeightSystem) -> bool {
    terminal_failure(ws).is_none()
}

/// First `j` at which the terminal identity fails.
pub fn terminal_failure(ws: &WeightSystem) -> Option<i64> {
    let r = ws.r();
    (1..r).find(|&j| scaled_excess(ws, j) != j + r)
}

/// `a_i` coprime to `r` for `i = 1, 2, 3` and `gcd(a4, r) = gcd(e, r)`.
pub fn terminal_preconditions(ws: &WeightSystem) -> bool {
    let r = ws.r();
    let a = ws.a();
    a[..3].iter().all(|&x| gcd(x, r) == 1) && gcd(a[3], r) == gcd(ws.e(), r)
}

/// The pairing structure forced by the terminal identity. Indices are
/// 1-based; in the second case positions 5 and 6 stand for `-e` and `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum TerminalConclusion {
    /// `gcd(e, r) > 1`: `a4 ≡ e`, `a_unit ≡ 1`, `a_pair.0 + a_pair.1 ≡ 0`.
    #[serde(rename = "1")]
    Divisible { unit: usize, pair: (usize, usize) },
    /// `gcd(e, r) = 1`: `(a1, a2, a3, a4, -e, -1)` splits into three pairs
    /// summing to zero.
    #[serde(rename = "2")]
    Coprime { pairs: [(usize, usize); 3] },
}

impl TerminalConclusion {
    pub fn case(&self) -> u8 {
        match self {
            TerminalConclusion::Divisible { .. } => 1,
            TerminalConclusion::Coprime { .. } => 2,
        }
    }

    /// Re-checks the congruences against `ws`.
    pub fn holds(&self, ws: &WeightSystem) -> bool {
        let r = ws.r();
        let v = six(ws);
        let zero = |(i, j): (usize, usize)| modr(v[i - 1] + v[j - 1], r) == 0;
        match *self {
            TerminalConclusion::Divisible { unit, pair } => {
                ws.a()[3] == ws.e() && modr(v[unit - 1] - 1, r) == 0 && zero(pair)
            }
            TerminalConclusion::Coprime { pairs } => pairs.iter().all(|&p| zero(p)),
        }
    }
}

fn six(ws: &WeightSystem) -> [i64; 6] {
    let [a1, a2, a3, a4] = ws.a();
    [a1, a2, a3, a4, -ws.e(), -1]
}

/// The 15 perfect matchings of `{1..6}`, in lexicographic order.
fn matchings() -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::new();
    for b in 2..=6 {
        let rest: Vec<usize> = (2..=6).filter(|&x| x != b).collect();
        let c = rest[0];
        for &d in &rest[1..] {
            let last: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != d).collect();
            out.push([(1, b), (c, d), (last[0], last[1])]);
        }
    }
    out
}

/// Every pairing witnessing the conclusion, in canonical order.
pub fn terminal_conclusions_all(ws: &WeightSystem) -> Vec<TerminalConclusion> {
    let r = ws.r();
    let v = six(ws);
    let mut out = Vec::new();
    if gcd(ws.e(), r) > 1 {
        if ws.a()[3] != ws.e() {
            return out;
        }
        for (unit, pair) in [(1, (2, 3)), (2, (1, 3)), (3, (1, 2))] {
            if modr(v[unit - 1] - 1, r) == 0 && modr(v[pair.0 - 1] + v[pair.1 - 1], r) == 0 {
                out.push(TerminalConclusion::Divisible { unit, pair });
            }
        }
    } else {
        for pairs in matchings() {
            if pairs.iter().all(|&(i, j)| modr(v[i - 1] + v[j - 1], r) == 0) {
                out.push(TerminalConclusion::Coprime { pairs });
            }
        }
    }
    out
}

/// The first pairing in canonical order. Errors when the preconditions or
/// the hypothesis fail, and reports a counterexample when no pairing exists.
pub fn terminal_conclusion(ws: &WeightSystem) -> Result<TerminalConclusion> {
    if !terminal_preconditions(ws) {
        return domain(format!("{ws}: gcd preconditions of the terminal lemma fail"));
    }
    if let Some(j) = terminal_failure(ws) {
        return domain(format!("{ws}: terminal identity fails at j = {j}"));
    }
    terminal_conclusions_all(ws)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Counterexample(format!("{ws}: no pairing")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalScan {
    pub r_max: i64,
    /// Tuples meeting the preconditions and the `j = 1` identity.
    pub tested: u64,
    /// Tuples that also satisfy the identity for every `j`.
    pub hypothesis_holds: u64,
    pub counterexamples: Vec<WeightSystem>,
    /// Every tuple satisfying the hypothesis with its first pairing.
    pub witnesses: Vec<(WeightSystem, TerminalConclusion)>,
}

/// Exhaustive check for `2 <= r <= r_max`. Tuples are taken up to the order
/// of `a1, a2, a3`, which the statement is symmetric in; `e` is determined by
/// the `j = 1` identity. Parallel over `r`, output sorted.
pub fn terminal_scan(r_max: i64) -> TerminalScan {
    let per_r: Vec<TerminalScan> = (2..=r_max.max(1)).into_par_iter().map(terminal_scan_r).collect();
    let mut total = TerminalScan {
        r_max,
        ..Default::default()
    };
    for s in per_r {
        total.tested += s.tested;
        total.hypothesis_holds += s.hypothesis_holds;
        total.counterexamples.extend(s.counterexamples);
        total.witnesses.extend(s.witnesses);
    }
    total.counterexamples.sort();
    total.witnesses.sort();
    total
}

fn terminal_scan_r(r: i64) -> TerminalScan {
    let mut out = TerminalScan {
        r_max: r,
        ..Default::default()
    };
    let units: Vec<i64> = (1..r).filter(|&x| gcd(x, r) == 1).collect();
    for (i1, &a1) in units.iter().enumerate() {
        for (i2, &a2) in units.iter().enumerate().skip(i1) {
            for &a3 in &units[i2..] {
                for a4 in 0..r {
                    // j = 1: a1+a2+a3+a4 = e + 1 + r with e in [0, r).
                    let e = a1 + a2 + a3 + a4 - 1 - r;
                    if !(0..r).contains(&e) || gcd(a4, r) != gcd(e, r) {
                        continue;
                    }
                    let ws = WeightSystem::residues(r, [a1, a2, a3, a4], e).expect("r >= 2");
                    out.tested += 1;
                    if !terminal_hypothesis(&ws) {
                        continue;
                    }
                    out.hypothesis_holds += 1;
                    match terminal_conclusions_all(&ws).first() {
                        Some(c) => out.witnesses.push((ws, *c)),
                        None => out.counterexamples.push(ws),
                    }
                }
            }
        }
    }
    out
}

/// Conditions of the non-canonical lemma: equality
/// `Σ{a_i k0/r} = {e k0/r} + k0/r` and, for every other `k`,
/// `Σ{a_i k/r} >= {e k/r} + k0/r + δ`.
pub fn nc_hypothesis(ws: &WeightSystem, k0: i64, delta: Rational) -> bool {
    let r = ws.r();
    if k0 < 1 || k0 > r - 1 || !delta.is_positive() {
        return false;
    }
    scaled_excess(ws, k0) == k0 && nc_slack_holds(ws, k0, delta)
}

fn nc_slack_holds(ws: &WeightSystem, k0: i64, delta: Rational) -> bool {
    let r = ws.r();
    let (p, q) = (delta.numer(), delta.denom());
    (1..r)
        .filter(|&k| k != k0)
        .all(|k| q * scaled_excess(ws, k) >= q * k0 + p * r)
}

/// `v_1..v_4 = {k0 a_i / r}` and `v_5 = {(r - e) k0 / r}`.
pub fn nc_chain_values(ws: &WeightSystem, k0: i64) -> [Rational; 5] {
    let r = ws.r();
    let a = ws.a();
    let mut v = [Rational::ZERO; 5];
    for i in 0..4 {
        v[i] = Rational::fract_of(k0 * a[i], r);
    }
    v[4] = Rational::fract_of((r - ws.e()) * k0, r);
    v
}

/// `Σ_i (1 + (m-1) v_i - ⌈m v_i⌉)`.
pub fn index_sum(v: &[Rational], m: i64) -> Rational {
    v.iter()
        .map(|&x| Rational::ONE + x * (m - 1) - Rational::from_int((x * m).ceil()))
        .sum()
}

/// The estimate used to reduce the non-canonical lemma to the bounded-index
/// lemma: `index_sum(v, m) >= δ` for `2 <= m <= r/gcd(r,k0) - 1`. Returns
/// the first `m` where it fails.
pub fn nc_chain_failure(ws: &WeightSystem, k0: i64, delta: Rational) -> Option<i64> {
    let v = nc_chain_values(ws, k0);
    let top = ws.r() / gcd(ws.r(), k0) - 1;
    (2..=top).find(|&m| index_sum(&v, m) < delta)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcWitness {
    pub r: i64,
    pub k0: i64,
    pub a: [i64; 4],
    pub e: i64,
    /// `r / gcd(r, k0)`.
    pub index: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcScan {
    pub delta: Rational,
    pub r_max: i64,
    /// Sorted distinct values of `r / gcd(r, k0)`.
    pub values: Vec<Rational>,
    /// All passing tuples with `a` nondecreasing, sorted.
    pub witnesses: Vec<NcWitness>,
}

/// All `(r <= r_max, k0, a, e)` satisfying the non-canonical hypothesis,
/// with `a` taken up to order. For fixed `(r, a, k0)` the equality pins down
/// `e k0 mod r`, so only the matching `e` are tested.
pub fn nc_gamma0_scan(delta: Rational, r_max: i64) -> NcScan {
    let mut witnesses: Vec<NcWitness> = (2..=r_max.max(1))
        .into_par_iter()
        .flat_map_iter(|r| nc_scan_r(r, delta))
        .collect();
    witnesses.sort_by(|x, y| (x.r, x.k0, x.a, x.e).cmp(&(y.r, y.k0, y.a, y.e)));
    let values: BTreeSet<Rational> = witnesses.iter().map(|w| Rational::from_int(w.index)).collect();
    NcScan {
        delta,
        r_max,
        values: values.into_iter().collect(),
        witnesses,
    }
}

fn nc_scan_r(r: i64, delta: Rational) -> Vec<NcWitness> {
    let mut out = Vec::new();
    for a1 in 0..r {
        for a2 in a1..r {
            for a3 in a2..r {
                for a4 in a3..r {
                    let a = [a1, a2, a3, a4];
                    for k0 in 1..r {
                        let c = a.iter().map(|&x| modr(k0 * x, r)).sum::<i64>() - k0;
                        let g = gcd(k0, r);
                        if !(0..r).contains(&c) || c % g != 0 {
                            continue;
                        }
                        for e in 0..r {
                            if modr(e * k0, r) != c {
                                continue;
                            }
                            let ws = WeightSystem::residues(r, a, e).expect("r >= 2");
                            if nc_slack_holds(&ws, k0, delta) {
                                out.push(NcWitness {
                                    r,
                                    k0,
                                    a,
                                    e,
                                    index: r / g,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreakRecord {
    pub v: Vec<Rational>,
    pub streak: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundOracleReport {
    pub d: usize,
    pub epsilon: Rational,
    pub q_max: i64,
    pub r_max: i64,
    pub vectors: u64,
    /// Largest streak over all vectors, degenerate ones included.
    pub max_streak: i64,
    /// Largest streak among vectors that stop before `r_max`, with the
    /// first such vector in lexicographic order.
    pub max_nondegenerate: Option<StreakRecord>,
    /// Vectors whose streak reaches `r_max`.
    pub degenerate: Vec<Vec<Rational>>,
}

/// Largest `r <= r_max` with `index_sum(v, m) >= ε` for all `2 <= m <= r`;
/// 1 when `m = 2` already fails.
pub fn index_streak(v: &[Rational], epsilon: Rational, r_max: i64) -> i64 {
    let mut r = 1;
    for m in 2..=r_max {
        if index_sum(v, m) < epsilon {
            break;
        }
        r = m;
    }
    r.max(1).min(r_max.max(1))
}

/// Rationals in `[0, 1]` with denominator at most `q_max`, sorted.
pub fn farey(q_max: i64) -> Vec<Rational> {
    let set: BTreeSet<Rational> = (1..=q_max.max(1))
        .flat_map(|q| (0..=q).map(move |p| Rational::new(p, q)))
        .collect();
    set.into_iter().collect()
}

/// Empirical search for the bounded-index lemma over `v ∈ [0,1]^d` with
/// denominators up to `q_max`. The inequality is symmetric in the
/// coordinates, so vectors are taken nondecreasing.
pub fn bound_oracle(d: usize, epsilon: Rational, q_max: i64, r_max: i64) -> Result<BoundOracleReport> {
    if d == 0 || !epsilon.is_positive() || q_max < 1 || r_max < 1 {
        return domain("bound oracle needs d >= 1, epsilon > 0, q_max >= 1, r_max >= 1");
    }
    let f = farey(q_max);
    let mut vectors = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        vectors.push(idx.iter().map(|&i| f[i]).collect::<Vec<_>>());
        // Next nondecreasing index tuple.
        let Some(pos) = (0..d).rev().find(|&p| idx[p] + 1 < f.len()) else { break };
        let next = idx[pos] + 1;
        for slot in idx.iter_mut().skip(pos) {
            *slot = next;
        }
    }
    let streaks: Vec<i64> = vectors.par_iter().map(|v| index_streak(v, epsilon, r_max)).collect();
    let mut report = BoundOracleReport {
        d,
        epsilon,
        q_max,
        r_max,
        vectors: vectors.len() as u64,
        max_streak: streaks.iter().copied().max().unwrap_or(1),
        max_nondegenerate: None,
        degenerate: Vec::new(),
    };
    for (v, &s) in vectors.iter().zip(&streaks) {
        if s >= r_max {
            report.degenerate.push(v.clone());
        } else if report.max_nondegenerate.as_ref().is_none_or(|b| s > b.streak) {
            report.max_nondegenerate = Some(StreakRecord { v: v.clone(), streak: s });
        }
    }
    Ok(report)
}

/// True when `ws` is `1/r(0, a, -a, 1; 0)` with `gcd(a, r) = 1`.
pub fn is_zero_first_shape(ws: &WeightSystem) -> bool {
    let r = ws.r();
    let [a1, a2, a3, a4] = ws.a();
    a1 == 0 && ws.e() == 0 && a4 == modr(1, r) && modr(a2 + a3, r) == 0 && gcd(a2, r) == 1
}

/// Classes `j` with `α_j ≢ tβ` for all `1 <= t <= k-1` and `α_j(g) != 1`.
/// Requires a cDE support over `1/r(0, a, -a, 1; 0)`.
pub fn g_weight_lemma_violations(ws: &WeightSystem, s: &SeriesSupport, witness: &BetaWitness) -> Result<Vec<i64>> {
    if !is_zero_first_shape(ws) {
        return domain(format!("{ws} is not of the form 1/r(0,a,-a,1;0)"));
    }
    if s.f_type() != SeriesType::CDE {
        return domain("the g-weight check needs a cDE support");
    }
    let multiples: Vec<_> = match witness.beta {
        Some(b) => (1..witness.k).map(|t| b.scale(t)).collect(),
        None => Vec::new(),
    };
    let mut bad = Vec::new();
    for j in 1..ws.r() {
        let alpha = ws.alpha_unchecked(j);
        if multiples.iter().any(|m| m.congruent(&alpha)) {
            continue;
        }
        if s.weight_of_g(&alpha.coords()) != Rational::ONE {
            bad.push(j);
        }
    }
    Ok(bad)
}

pub fn g_weight_lemma_check(ws: &WeightSystem, s: &SeriesSupport, witness: &BetaWitness) -> Result<bool> {
    Ok(g_weight_lemma_violations(ws, s, witness)?.is_empty())
}
