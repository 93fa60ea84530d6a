//! Condition-by-condition checks of the structure statements for cA and
//! non-cA equations, and the matcher against the ten normal forms.
//!
//! Condition labels: `1` complement dichotomy on `N⁰ \ Ψ`, `2` the
//! two-bullet split of fractional-part sums, `3` gcd pattern, `4a`-`4c`
//! facts about `β = α_{k0}`, `5` the terminal identity, `6` (non-cA only)
//! `gcd(a1, r) = gcd(e, r) >= 2` forces both to equal `r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::families::Family;
use crate::lemmas::terminal_failure;
use crate::series::{perms_fixing_first, weight_of_f, weight_of_monomial, Monomial, SeriesSupport, SeriesType};
use crate::valuation::BetaWitness;
use crate::weights::{gcd, modr, PsiSets, Rational, Weight, WeightSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "cA")]
    CA,
    #[serde(rename = "nonCA")]
    NonCA,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub pass: bool,
    /// The witness for a pass, or the counterexample for a failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionResult {
    fn pass() -> Self {
        ConditionResult { pass: true, note: None }
    }

    fn pass_with(note: impl Into<String>) -> Self {
        ConditionResult {
            pass: true,
            note: Some(note.into()),
        }
    }

    fn fail(note: impl Into<String>) -> Self {
        ConditionResult {
            pass: false,
            note: Some(note.into()),
        }
    }
}

/// An instance where some condition fails, kept as data for the atlas of
/// exceptional `(r, β)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exception {
    pub r: i64,
    pub beta: Option<Weight>,
    pub failed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub theorem: Theorem,
    pub conditions: BTreeMap<String, ConditionResult>,
    /// Coordinate order under which the conditions were evaluated.
    pub permutation: [usize; 4],
    pub exceptions: Vec<Exception>,
    /// `12/13 < k0/r < 13/14`: the strict bound of `4b` is looser than the
    /// `12/13` bound on `diff(β)`.
    pub between_bounds: bool,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.values().all(|c| c.pass)
    }

    pub fn passes(&self, label: &str) -> bool {
        self.conditions.get(label).is_some_and(|c| c.pass)
    }

    fn pass_count(&self) -> usize {
        self.conditions.values().filter(|c| c.pass).count()
    }
}

/// The cA conditions, trying the identity and then `x3 <-> x4`.
pub fn check_ca_structure(ws: &WeightSystem, s: &SeriesSupport, witness: &BetaWitness) -> StructureReport {
    let perms = [[0, 1, 2, 3], [0, 1, 3, 2]];
    best_over(&perms, ws, s, witness, Theorem::CA)
}

/// The non-cA conditions, trying the permutations of `x2, x3, x4`.
pub fn check_nonca_structure(ws: &WeightSystem, s: &SeriesSupport, witness: &BetaWitness) -> StructureReport {
    best_over(&perms_fixing_first(), ws, s, witness, Theorem::NonCA)
}

/// Dispatches on the type of `s`.
pub fn check_structure(ws: &WeightSystem, s: &SeriesSupport, witness: &BetaWitness) -> StructureReport {
    match s.f_type() {
        SeriesType::CA => check_ca_structure(ws, s, witness),
        SeriesType::Odd | SeriesType::CDE => check_nonca_structure(ws, s, witness),
    }
}

/// First permutation with every condition passing; otherwise the one with
/// the most passing conditions (earliest on ties).
fn best_over(
    perms: &[[usize; 4]],
    ws: &WeightSystem,
    s: &SeriesSupport,
    witness: &BetaWitness,
    theorem: Theorem,
) -> StructureReport {
    let mut best: Option<StructureReport> = None;
    for &p in perms {
        let report = evaluate(p, ws, s, witness, theorem);
        if report.all_pass() {
            return report;
        }
        if best.as_ref().is_none_or(|b| report.pass_count() > b.pass_count()) {
            best = Some(report);
        }
    }
    let mut report = best.expect("at least one permutation");
    let failed: Vec<String> = report
        .conditions
        .iter()
        .filter(|(_, c)| !c.pass)
        .map(|(k, _)| k.clone())
        .collect();
    report.exceptions.push(Exception {
        r: ws.r(),
        beta: witness.beta.map(|b| b.permuted(report.permutation)),
        failed,
    });
    report
}

struct Ctx {
    ws: WeightSystem,
    s: SeriesSupport,
    k: i64,
    beta: Option<Weight>,
    psi: PsiSets,
}

impl Ctx {
    fn new(p: [usize; 4], ws: &WeightSystem, s: &SeriesSupport, witness: &BetaWitness) -> Self {
        let ws = ws.permuted(p);
        let beta = witness.beta.map(|b| b.permuted(p));
        let psi = match &beta {
            Some(b) => ws.psi_sets(b, witness.k),
            None => ws.psi_sets(&ws.alpha_unchecked(0), 1),
        };
        Ctx {
            ws,
            s: s.permuted(p),
            k: witness.k,
            beta,
            psi,
        }
    }

    fn wf(&self, w: &Weight) -> Rational {
        weight_of_f(&w.coords(), &self.s)
    }

    /// `β ∈ N⁰`.
    fn beta_in_n0(&self) -> Option<Weight> {
        self.beta.filter(|b| b.in_unit_cube() && !b.is_integral())
    }
}

fn mono(e: [u32; 4]) -> Monomial {
    Monomial(e)
}

fn wm(w: &Weight, e: [u32; 4]) -> Rational {
    weight_of_monomial(&w.coords(), &mono(e))
}

fn evaluate(
    p: [usize; 4],
    ws: &WeightSystem,
    s: &SeriesSupport,
    witness: &BetaWitness,
    theorem: Theorem,
) -> StructureReport {
    let ctx = Ctx::new(p, ws, s, witness);
    let mut conditions = BTreeMap::new();
    let ca = theorem == Theorem::CA;
    conditions.insert("1".to_string(), condition_1(&ctx, ca));
    conditions.insert("2".to_string(), condition_2(&ctx, ca));
    conditions.insert("3".to_string(), if ca { condition_3_ca(&ctx) } else { condition_3_nonca(&ctx) });
    let (c4, between) = condition_4(&ctx, ca);
    for (label, res) in c4 {
        conditions.insert(label.to_string(), res);
    }
    conditions.insert("5".to_string(), condition_5(&ctx));
    if !ca {
        conditions.insert("6".to_string(), condition_6(&ctx));
    }
    StructureReport {
        theorem,
        conditions,
        permutation: p,
        exceptions: Vec::new(),
        between_bounds: between,
    }
}

/// Which of `w` and `w'` satisfies the dichotomy, if either.
fn condition_1(ctx: &Ctx, ca: bool) -> ConditionResult {
    for alpha in ctx.ws.enumerate_n0() {
        if ctx.psi.contains(&alpha) {
            continue;
        }
        let comp = alpha.complement().expect("N⁰ lies in the unit cube");
        let ok = |w: &Weight, wc: &Weight| if ca { dichotomy_ca(ctx, w, wc) } else { dichotomy_nonca(ctx, w, wc) };
        if !(ok(&alpha, &comp) || ok(&comp, &alpha)) {
            return ConditionResult::fail(format!("no admissible choice in {{α, α'}} for α = {alpha}"));
        }
    }
    ConditionResult::pass()
}

fn dichotomy_ca(ctx: &Ctx, w: &Weight, wc: &Weight) -> bool {
    let one = Rational::ONE;
    let w12 = wm(w, [1, 1, 0, 0]);
    let wc12 = wm(wc, [1, 1, 0, 0]);
    let a = ctx.wf(w) == w12 && w12 <= one && ctx.wf(wc) == wc12 - one;
    let b = wm(w, [0, 0, 1, 1]) > one && wm(wc, [0, 0, 1, 1]) < one;
    let c = (w12 == one) == (wc12 == one)
        && (w12 != one || {
            let [_, _, w3, w4] = w.coords();
            let [_, _, c3, c4] = wc.coords();
            (w3 == one || w4 == one) && (c3.is_zero() || c4.is_zero())
        });
    a && b && c
}

fn dichotomy_nonca(ctx: &Ctx, w: &Weight, wc: &Weight) -> bool {
    let one = Rational::ONE;
    let half = Rational::new(1, 2);
    let two_w1 = wm(w, [2, 0, 0, 0]);
    let two_c1 = wm(wc, [2, 0, 0, 0]);
    let a = ctx.wf(w) == two_w1 && two_w1 <= one && ctx.wf(wc) == two_c1 - one && !(two_c1 - one).is_negative();
    let b = wm(w, [0, 1, 1, 1]) > one + w.coords()[0] && wm(wc, [0, 1, 1, 1]) < one + wc.coords()[0];
    let c = (two_w1 == one) == (two_c1 == one)
        && (two_w1 != one || {
            let r = ctx.ws.r();
            let mid = r % 2 == 0 && wc.congruent(&ctx.ws.alpha_unchecked(r / 2));
            let wv = w.coords();
            let cv = wc.coords();
            let pattern = [[1, 2, 3], [2, 1, 3], [3, 1, 2]].iter().any(|&[i, j, l]| {
                (wv[i], wv[j], wv[l]) == (half, half, one) && (cv[i], cv[j], cv[l]) == (half, half, Rational::ZERO)
            });
            mid && pattern
        });
    a && b && c
}

/// Scaled numerators `j a_i mod r` and `j e mod r`.
fn nums(ws: &WeightSystem, j: i64) -> ([i64; 4], i64) {
    (ws.alpha_numerators(j), modr(j * ws.e(), ws.r()))
}

fn condition_2(ctx: &Ctx, ca: bool) -> ConditionResult {
    let r = ctx.ws.r();
    let mut bullets = (0, 0);
    for j in 1..r {
        if ctx.psi.contains(&ctx.ws.alpha_unchecked(j)) {
            continue;
        }
        let ([n1, n2, n3, n4], ne) = nums(&ctx.ws, j);
        let (first, second) = if ca {
            (
                n1 + n2 == ne && n3 + n4 == j + r,
                n1 + n2 == ne + r && n3 + n4 == j,
            )
        } else {
            (
                2 * n1 == ne && n2 + n3 + n4 == n1 + j + r,
                2 * n1 == ne + r && n2 + n3 + n4 == n1 + j,
            )
        };
        if first {
            bullets.0 += 1;
        } else if second {
            bullets.1 += 1;
        } else {
            return ConditionResult::fail(format!("neither alternative holds at j = {j}"));
        }
    }
    ConditionResult::pass_with(format!("first alternative {} times, second {} times", bullets.0, bullets.1))
}

fn condition_3_ca(ctx: &Ctx) -> ConditionResult {
    let r = ctx.ws.r();
    let a = ctx.ws.a();
    for (i, &ai) in a[..3].iter().enumerate() {
        if gcd(ai, r) != 1 {
            return ConditionResult::fail(format!("gcd(a{}, r) = {}", i + 1, gcd(ai, r)));
        }
    }
    if gcd(a[3], r) != gcd(ctx.ws.e(), r) {
        return ConditionResult::fail(format!("gcd(a4, r) = {} but gcd(e, r) = {}", gcd(a[3], r), gcd(ctx.ws.e(), r)));
    }
    ConditionResult::pass()
}

fn condition_3_nonca(ctx: &Ctx) -> ConditionResult {
    let r = ctx.ws.r();
    let g = ctx.ws.a().map(|ai| gcd(ai, r));
    let ge = gcd(ctx.ws.e(), r);
    if g[0] >= 2 && g[0] != ge {
        return ConditionResult::fail(format!("gcd(a1, r) = {} >= 2 but gcd(e, r) = {ge}", g[0]));
    }
    if g[0] == ge && ge >= 2 && g[1..].iter().all(|&x| x == 1) {
        return ConditionResult::pass_with("a");
    }
    if r % 2 == 1 && ge == 1 && g.iter().all(|&x| x == 1) {
        return ConditionResult::pass_with("b");
    }
    if g[3] == 2 && ge == 2 && g[..3].iter().all(|&x| x == 1) {
        return ConditionResult::pass_with("c");
    }
    ConditionResult::fail(format!("gcd pattern {g:?} with gcd(e, r) = {ge} matches no alternative"))
}

fn condition_4(ctx: &Ctx, ca: bool) -> (Vec<(&'static str, ConditionResult)>, bool) {
    let Some(beta) = ctx.beta_in_n0() else {
        let vacuous = || ConditionResult::pass_with("β ∉ N⁰");
        return (vec![("4a", vacuous()), ("4b", vacuous()), ("4c", vacuous())], false);
    };
    let r = ctx.ws.r();
    let k = ctx.k;
    let k0 = beta.class_index();
    let alpha = ctx.ws.alpha_unchecked(k0);
    let exact = beta == alpha;
    let ratio = Rational::new(k0, r);

    let c4a = if ca {
        if exact {
            ConditionResult::pass_with(format!("k0 = {k0}"))
        } else {
            ConditionResult::fail(format!("β = {beta} differs from α_{k0} = {alpha}"))
        }
    } else {
        // β ≡ α_{class(β)} holds by construction.
        ConditionResult::pass_with(format!("k0 = {k0}"))
    };

    let upper = Rational::new(13, 14).min(Rational::new(1, k - 1));
    let lower = Rational::new(1, k);
    let in_range = lower < ratio && ratio < upper;
    let c4b = if ca {
        let b34 = wm(&beta, [0, 0, 1, 1]);
        if b34 == ratio && in_range {
            ConditionResult::pass()
        } else {
            ConditionResult::fail(format!("β(x3x4) = {b34}, k0/r = {ratio}, k = {k}"))
        }
    } else if in_range {
        ConditionResult::pass()
    } else {
        ConditionResult::fail(format!("k0/r = {ratio} outside (1/{k}, {upper})"))
    };
    let between = Rational::new(12, 13) < ratio && ratio < Rational::new(13, 14);

    let ([n1, n2, n3, n4], ne) = nums(&ctx.ws, k0);
    let c4c = if ca {
        let ok = wm(&beta, [1, 1, 0, 0]) >= Rational::ONE && n1 + n2 == ne + r && n3 + n4 == k0;
        if ok {
            ConditionResult::pass()
        } else {
            ConditionResult::fail(format!("sums at k0 = {k0}: {} and {}", n1 + n2, n3 + n4))
        }
    } else if !exact {
        ConditionResult::pass_with("β ≠ α_k0")
    } else {
        let two_b1 = wm(&beta, [2, 0, 0, 0]);
        let ok = ctx.wf(&beta) == two_b1 && two_b1 >= Rational::ONE && 2 * n1 == ne + r && n2 + n3 + n4 == n1 + k0;
        if ok {
            ConditionResult::pass()
        } else {
            ConditionResult::fail(format!("at k0 = {k0}: 2n1 = {}, n2+n3+n4 = {}", 2 * n1, n2 + n3 + n4))
        }
    };
    (vec![("4a", c4a), ("4b", c4b), ("4c", c4c)], between)
}

fn condition_5(ctx: &Ctx) -> ConditionResult {
    match terminal_failure(&ctx.ws) {
        None => ConditionResult::pass(),
        Some(j) => ConditionResult::fail(format!("terminal identity fails at j = {j}")),
    }
}

fn condition_6(ctx: &Ctx) -> ConditionResult {
    let r = ctx.ws.r();
    let g1 = gcd(ctx.ws.a()[0], r);
    let ge = gcd(ctx.ws.e(), r);
    if g1 == ge && g1 >= 2 && g1 != r {
        ConditionResult::fail(format!("gcd(a1, r) = gcd(e, r) = {g1} is neither 1 nor r"))
    } else {
        ConditionResult::pass()
    }
}

/// A match of `ws` against one of the ten normal forms: applying
/// `permutation` to `ws` gives the family tuple at parameter `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalForm {
    pub family: Family,
    pub a: Option<i64>,
    pub permutation: [usize; 4],
}

/// Permutations tried for non-cA types: the first slot takes `x1` or `x2`,
/// in lexicographic order.
fn nonca_perms() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for p0 in 0..4 {
        for p1 in 0..4 {
            for p2 in 0..4 {
                for p3 in 0..4 {
                    let p = [p0, p1, p2, p3];
                    let mut sorted = p;
                    sorted.sort();
                    if sorted == [0, 1, 2, 3] && p0 <= 1 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// All normal forms reproducing `ws` under the interchanges allowed for
/// `f_type`, ordered by permutation, then family, then parameter.
pub fn match_normal_form(ws: &WeightSystem, f_type: SeriesType) -> Vec<NormalForm> {
    let (perms, families): (Vec<[usize; 4]>, Vec<Family>) = match f_type {
        SeriesType::CA => (
            vec![[0, 1, 2, 3], [0, 1, 3, 2], [1, 0, 2, 3], [1, 0, 3, 2]],
            vec![Family::CaC, Family::CaD, Family::CaB],
        ),
        SeriesType::Odd => (nonca_perms(), vec![Family::Odd]),
        SeriesType::CDE => (
            nonca_perms(),
            vec![
                Family::CdeB,
                Family::CdeC,
                Family::CdeD,
                Family::CdeE,
                Family::CdeF,
                Family::CdeA,
            ],
        ),
    };
    let r = ws.r();
    let mut out = Vec::new();
    for p in perms {
        let target = ws.permuted(p);
        for &family in &families {
            for a in family.parameters(r) {
                if let Ok(fam_ws) = family.generate(r, a.unwrap_or(0)) {
                    if fam_ws == target {
                        out.push(NormalForm {
                            family,
                            a,
                            permutation: p,
                        });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{find_beta, BetaOptions, BetaOutcome};

    fn worked() -> (WeightSystem, SeriesSupport, BetaWitness) {
        let ws = WeightSystem::new(5, [3, 1, 2, 4], 4).unwrap();
        let s = SeriesSupport::new(&ws, SeriesType::CA, &[Monomial([0, 0, 2, 0]), Monomial([0, 0, 0, 6])]).unwrap();
        let BetaOutcome::Found(w) = find_beta(&ws, &s, &BetaOptions::default()) else { panic!() };
        (ws, s, w)
    }

    #[test]
    fn worked_example_passes_all() {
        let (ws, s, w) = worked();
        let rep = check_ca_structure(&ws, &s, &w);
        assert!(rep.all_pass(), "{rep:?}");
        assert_eq!(rep.permutation, [0, 1, 2, 3]);
        assert!(rep.exceptions.is_empty());
        assert_eq!(rep.conditions.len(), 7);
        assert_eq!(rep.conditions["4a"].note.as_deref(), Some("k0 = 4"));
    }

    #[test]
    fn condition_2_bullets_on_worked_example() {
        let (ws, s, w) = worked();
        let ctx = Ctx::new([0, 1, 2, 3], &ws, &s, &w);
        // j = 1 and j = 4 are in Ψ; j = 2 takes the first alternative, j = 3 the second.
        let ([n1, n2, _, _], ne) = nums(&ws, 3);
        assert_eq!(n1 + n2, ne + 5);
        assert!(condition_2(&ctx, true).pass);
    }

    #[test]
    fn gcd_condition_uses_swap() {
        // gcd(a3, 4) = 2 sits in slot 3; the x3 <-> x4 swap moves it to slot 4.
        let ws = WeightSystem::residues(4, [1, 1, 2, 3], 2).unwrap();
        let ctx = |ws: WeightSystem| Ctx {
            ws,
            s: worked().1,
            k: 1,
            beta: None,
            psi: ws.psi_sets(&ws.alpha_unchecked(0), 1),
        };
        let res = condition_3_ca(&ctx(ws));
        assert!(!res.pass);
        assert_eq!(res.note.as_deref(), Some("gcd(a3, r) = 2"));
        assert!(condition_3_ca(&ctx(ws.permuted([0, 1, 3, 2]))).pass);
    }

    #[test]
    fn normal_form_examples() {
        let ws = WeightSystem::new(5, [3, 1, 2, 4], 4).unwrap();
        let m = match_normal_form(&ws, SeriesType::CA);
        assert_eq!(
            m[0],
            NormalForm {
                family: Family::CaC,
                a: Some(3),
                permutation: [0, 1, 2, 3]
            }
        );
        let ws = WeightSystem::new(8, [1, 5, 3, 2], 2).unwrap();
        assert!(match_normal_form(&ws, SeriesType::Odd).iter().any(|n| n.family == Family::Odd));
        let ws = WeightSystem::residues(7, [3, 4, 5, 2], 6).unwrap();
        assert!(match_normal_form(&ws, SeriesType::CDE)
            .iter()
            .any(|n| n.family == Family::CdeD && n.a == Some(5) && n.permutation == [0, 1, 2, 3]));
    }

    #[test]
    fn nonca_perm_list() {
        let p = nonca_perms();
        assert_eq!(p.len(), 12);
        assert_eq!(p[0], [0, 1, 2, 3]);
    }
}
