//! End-to-end classification of one singularity, and the verification suites.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{scan_family, Family, RecordVerdict, ScanCaps};
use crate::lemmas::{
    bound_oracle, TerminalConclusion, g_weight_lemma_violations, nc_chain_failure, nc_gamma0_scan, terminal_failure, terminal_scan,
};
use crate::series::{semiinvariant_monomials, Monomial, SeriesSupport, SeriesType};
use crate::structure::{check_structure, match_normal_form, NormalForm, StructureReport};
use crate::valuation::{
    combinations, find_beta, sublevel_enumerate, BetaFailure, BetaOptions, BetaOutcome, Certificate,
};
use crate::weights::{Rational, Weight, WeightSystem};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub beta: BetaOptions,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingCheck {
    pub pass: bool,
    /// Each reason starts with the stage that produced it.
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    TerminalLike,
    EncCandidate { k: i64, beta: Weight },
    SettingViolated,
}

impl Summary {
    pub fn derive(setting: &SettingCheck, witness: Option<&BetaOutcome>) -> Summary {
        match witness.and_then(|o| o.witness()) {
            Some(w) if setting.pass => match w.beta {
                Some(beta) => Summary::EncCandidate { k: w.k, beta },
                None => Summary::TerminalLike,
            },
            _ => Summary::SettingViolated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub weights: WeightSystem,
    pub setting: SettingCheck,
    pub witness: Option<BetaOutcome>,
    pub normal_forms: Vec<NormalForm>,
    pub structure: Option<StructureReport>,
    pub summary: Summary,
}

impl Verdict {
    fn violated(ws: &WeightSystem, reasons: Vec<String>) -> Verdict {
        let setting = SettingCheck { pass: false, reasons };
        Verdict {
            weights: *ws,
            summary: Summary::derive(&setting, None),
            setting,
            witness: None,
            normal_forms: Vec::new(),
            structure: None,
        }
    }
}

fn failure_reason(f: &BetaFailure) -> String {
    let text = match f {
        BetaFailure::Unbounded { direction, .. } => {
            format!("infinitely many points with diff <= 1 along {direction:?}")
        }
        BetaFailure::NotAChain { beta, offending } => {
            format!("{} points with diff <= 1 are not multiples of {beta}", offending.len())
        }
        BetaFailure::NotPrimitive { beta } => format!("{beta} is not primitive"),
        BetaFailure::DiffOutOfRange { beta, diff, k } => format!("diff({beta}) = {diff} out of range for k = {k}"),
        BetaFailure::KExceedsCap { k, k_max, .. } => format!("k = {k} exceeds cap {k_max}"),
    };
    format!("beta: {text}")
}

const EXCLUDED: &str = "weights: excluded cA shape (a,-a,1,0;0)";

/// Classifies a raw input: the residues and monomials are checked here, so
/// malformed systems come back as a violated setting rather than an error.
pub fn classify(ws: &WeightSystem, f_type: SeriesType, monomials: &[Monomial], opts: &ClassifyOptions) -> Verdict {
    if let Err(e) = ws.validate() {
        return Verdict::violated(ws, vec![format!("weights: {e}")]);
    }
    if f_type.is_ca() && ws.is_excluded_ca_shape() {
        return Verdict::violated(ws, vec![EXCLUDED.into()]);
    }
    match SeriesSupport::new(ws, f_type, monomials) {
        Ok(s) => classify_support(ws, &s, opts),
        Err(e) => Verdict::violated(ws, vec![format!("support: {e}")]),
    }
}

/// Setting validation, then `find_beta`, the structure conditions and the
/// normal-form match. Structure is reported whenever a witness exists.
pub fn classify_support(ws: &WeightSystem, s: &SeriesSupport, opts: &ClassifyOptions) -> Verdict {
    if let Err(e) = ws.validate() {
        return Verdict::violated(ws, vec![format!("weights: {e}")]);
    }
    if s.f_type().is_ca() && ws.is_excluded_ca_shape() {
        return Verdict::violated(ws, vec![EXCLUDED.into()]);
    }
    let outcome = find_beta(ws, s, &opts.beta);
    let mut setting = SettingCheck {
        pass: true,
        reasons: Vec::new(),
    };
    if let BetaOutcome::Failed(f) = &outcome {
        setting.pass = false;
        setting.reasons.push(failure_reason(f));
    }
    let structure = outcome.witness().map(|w| check_structure(ws, s, w));
    let summary = Summary::derive(&setting, Some(&outcome));
    Verdict {
        weights: *ws,
        setting,
        witness: Some(outcome),
        normal_forms: match_normal_form(ws, s.f_type()),
        structure,
        summary,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "terminal")]
    Terminal,
    #[serde(rename = "nc")]
    Nc,
    #[serde(rename = "bound-oracle")]
    BoundOracle,
    #[serde(rename = "structure-cA")]
    StructureCa,
    #[serde(rename = "structure-nonCA")]
    StructureNonCa,
    #[serde(rename = "g-weight")]
    GWeight,
    #[serde(rename = "sublevel-oracle")]
    SublevelOracle,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Terminal,
        Suite::Nc,
        Suite::BoundOracle,
        Suite::StructureCa,
        Suite::StructureNonCa,
        Suite::GWeight,
        Suite::SublevelOracle,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::Terminal => "terminal",
            Suite::Nc => "nc",
            Suite::BoundOracle => "bound-oracle",
            Suite::StructureCa => "structure-cA",
            Suite::StructureNonCa => "structure-nonCA",
            Suite::GWeight => "g-weight",
            Suite::SublevelOracle => "sublevel-oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyCaps {
    pub r_max: i64,
    pub k_max: i64,
    pub d_max: u32,
    pub s_max: usize,
    /// Denominator bound of the Farey grid for the bound oracle.
    pub q_max: i64,
    /// Vector length for the bound oracle.
    pub dim: usize,
    pub delta: Rational,
    pub epsilon: Rational,
    /// List every pairing found by the terminal suite.
    pub verbose: bool,
}

impl VerifyCaps {
    /// Defaults sized for a desktop run of each suite.
    pub fn for_suite(suite: Suite) -> VerifyCaps {
        let base = VerifyCaps {
            r_max: 25,
            k_max: 3,
            d_max: 8,
            s_max: 3,
            q_max: 6,
            dim: 3,
            delta: Rational::new(1, 2),
            epsilon: Rational::new(1, 2),
            verbose: false,
        };
        match suite {
            Suite::Terminal => VerifyCaps { r_max: 30, ..base },
            Suite::Nc => VerifyCaps { r_max: 20, ..base },
            Suite::BoundOracle => VerifyCaps { r_max: 30, ..base },
            Suite::SublevelOracle => VerifyCaps {
                r_max: 12,
                d_max: 6,
                s_max: 2,
                ..base
            },
            _ => base,
        }
    }

    fn scan_caps(&self) -> ScanCaps {
        ScanCaps {
            r_max: self.r_max,
            k_max: self.k_max,
            d_max: self.d_max,
            s_max: self.s_max,
            cab_overlap: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    /// No hard assertion failed.
    pub ok: bool,
    pub summary: String,
    /// Failures first, then informational lines.
    pub lines: Vec<String>,
    /// One row per witness, counterexample or failure, with a header.
    #[serde(skip)]
    pub csv: String,
}

impl SuiteReport {
    pub fn status(&self) -> i32 {
        if self.ok {
            0
        } else {
            1
        }
    }
}

pub fn verify_all(suite: Suite, caps: &VerifyCaps) -> Result<SuiteReport> {
    if caps.r_max < 1 || caps.k_max < 1 || caps.d_max < 2 || caps.s_max < 1 || caps.q_max < 1 || caps.dim < 1 {
        return Err(Error::Domain("caps must be positive (degree cap at least 2)".into()));
    }
    if !caps.delta.is_positive() || !caps.epsilon.is_positive() {
        return Err(Error::Domain("delta and epsilon must be positive".into()));
    }
    Ok(match suite {
        Suite::Terminal => verify_terminal(caps),
        Suite::Nc => verify_nc(caps),
        Suite::BoundOracle => verify_bound_oracle(caps)?,
        Suite::StructureCa => verify_structure(suite, &[Family::CaC, Family::CaD, Family::CaB], caps),
        Suite::StructureNonCa => verify_structure(
            suite,
            &[
                Family::Odd,
                Family::CdeA,
                Family::CdeB,
                Family::CdeC,
                Family::CdeD,
                Family::CdeE,
                Family::CdeF,
            ],
            caps,
        ),
        Suite::GWeight => verify_g_weight(caps),
        Suite::SublevelOracle => verify_sublevel(caps),
    })
}

fn verify_terminal(caps: &VerifyCaps) -> SuiteReport {
    let scan = terminal_scan(caps.r_max);
    let mut lines: Vec<String> = scan.counterexamples.iter().map(|ws| format!("counterexample {ws}")).collect();
    if caps.verbose {
        for (ws, c) in &scan.witnesses {
            lines.push(format!("{ws} {}", serde_json::to_string(c).expect("pairings serialize")));
        }
    }
    let mut csv = String::from("r,a1,a2,a3,a4,e,result,case,pairing\n");
    for ws in &scan.counterexamples {
        csv.push_str(&format!("{},counterexample,,\n", csv_weights(ws)));
    }
    for (ws, c) in &scan.witnesses {
        csv.push_str(&format!("{},pairing,{},{}\n", csv_weights(ws), c.case(), csv_pairing(c)));
    }
    SuiteReport {
        suite: Suite::Terminal,
        ok: scan.counterexamples.is_empty(),
        summary: format!(
            "r <= {}: {} tuples tested, {} satisfy the hypothesis, {} counterexamples",
            caps.r_max,
            scan.tested,
            scan.hypothesis_holds,
            scan.counterexamples.len()
        ),
        lines,
        csv,
    }
}

fn csv_weights(ws: &WeightSystem) -> String {
    let [a1, a2, a3, a4] = ws.a();
    format!("{},{a1},{a2},{a3},{a4},{}", ws.r(), ws.e())
}

fn csv_pairing(c: &TerminalConclusion) -> String {
    match c {
        TerminalConclusion::Divisible { unit, pair } => format!("unit {unit} pair {} {}", pair.0, pair.1),
        TerminalConclusion::Coprime { pairs } => pairs.iter().map(|(i, j)| format!("({i} {j})")).collect(),
    }
}

fn csv_vec(v: &[Rational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn verify_nc(caps: &VerifyCaps) -> SuiteReport {
    let scan = nc_gamma0_scan(caps.delta, caps.r_max);
    let mut lines = Vec::new();
    let mut csv = String::from("r,k0,a1,a2,a3,a4,e,index,chain\n");
    for w in &scan.witnesses {
        let ws = WeightSystem::residues(w.r, w.a, w.e).expect("scan residues are reduced");
        let failure = nc_chain_failure(&ws, w.k0, caps.delta);
        if let Some(m) = failure {
            lines.push(format!("{ws} k0 = {}: chain sum below delta at m = {m}", w.k0));
        }
        let [a1, a2, a3, a4] = w.a;
        csv.push_str(&format!(
            "{},{},{a1},{a2},{a3},{a4},{},{},{}\n",
            w.r,
            w.k0,
            w.e,
            w.index,
            if failure.is_some() { "fails" } else { "holds" }
        ));
    }
    let values: Vec<String> = scan.values.iter().map(|v| v.to_string()).collect();
    let ok = lines.is_empty();
    lines.push(format!("values of r/gcd(r, k0): {{{}}}", values.join(", ")));
    SuiteReport {
        suite: Suite::Nc,
        ok,
        summary: format!(
            "delta = {}, r <= {}: {} tuples, {} distinct values",
            caps.delta,
            caps.r_max,
            scan.witnesses.len(),
            scan.values.len()
        ),
        lines,
        csv,
    }
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn verify_bound_oracle(caps: &VerifyCaps) -> Result<SuiteReport> {
    let rep = bound_oracle(caps.dim, caps.epsilon, caps.q_max, caps.r_max)?;
    let mut lines = vec![format!("largest streak: {}", rep.max_streak)];
    match &rep.max_nondegenerate {
        Some(s) => lines.push(format!("largest finite streak: {} at {}", s.streak, fmt_vec(&s.v))),
        None => lines.push("every vector reaches the cap".into()),
    }
    let mut csv = String::from("v,streak,kind\n");
    if let Some(s) = &rep.max_nondegenerate {
        csv.push_str(&format!("{},{},largest\n", csv_vec(&s.v), s.streak));
    }
    for d in &rep.degenerate {
        lines.push(format!("reaches cap: {}", fmt_vec(d)));
        csv.push_str(&format!("{},{},reaches cap\n", csv_vec(d), caps.r_max));
    }
    Ok(SuiteReport {
        suite: Suite::BoundOracle,
        ok: true,
        summary: format!(
            "d = {}, epsilon = {}, q <= {}, r <= {}: {} vectors, {} reach the cap",
            caps.dim,
            caps.epsilon,
            caps.q_max,
            caps.r_max,
            rep.vectors,
            rep.degenerate.len()
        ),
        lines,
        csv,
    })
}

/// Hard assertions: every valid record satisfies the terminal hypothesis, and every generated system is recovered by the normal-form
/// matcher. Exceptions to the other conditions are listed, not fatal.
fn verify_structure(suite: Suite, families: &[Family], caps: &VerifyCaps) -> SuiteReport {
    let scan = caps.scan_caps();
    let mut failures = Vec::new();
    let mut info = Vec::new();
    let mut csv = String::from("family,r,a1,a2,a3,a4,e,support,beta,failed\n");
    let (mut valid, mut records, mut all_pass, mut between) = (0usize, 0usize, 0usize, 0usize);
    for &family in families {
        for r in 2..=caps.r_max {
            for a in family.parameters(r) {
                if let Ok(ws) = family.generate(r, a.unwrap_or(0)) {
                    let found = match_normal_form(&ws, family.series_type())
                        .iter()
                        .any(|nf| nf.family == family);
                    if !found {
                        failures.push(format!("{family}: {ws} not recovered by the matcher"));
                    }
                }
            }
        }
        for rec in scan_family(family, &scan) {
            records += 1;
            let RecordVerdict::Valid { beta, .. } = rec.verdict else { continue };
            valid += 1;
            if let Some(j) = terminal_failure(&rec.weights) {
                failures.push(format!("{family}: {} f = {}: terminal identity fails at j = {j}", rec.weights, rec.support));
                csv.push_str(&format!("{family},{},{},,terminal j = {j}\n", csv_weights(&rec.weights), rec.support));
            }
            if let Some(st) = &rec.structure {
                if st.all_pass() {
                    all_pass += 1;
                }
                if st.between_bounds {
                    between += 1;
                }
                for ex in &st.exceptions {
                    let beta = beta.map(|b| csv_vec(&b.coords())).unwrap_or_else(|| "0".into());
                    csv.push_str(&format!(
                        "{family},{},{},{beta},{}\n",
                        csv_weights(&rec.weights),
                        rec.support,
                        ex.failed.join(" ")
                    ));
                    info.push(format!(
                        "{family}: r = {} beta = {beta} f = {}: conditions {} fail",
                        ex.r,
                        rec.support,
                        ex.failed.join(",")
                    ));
                }
            }
        }
    }
    let ok = failures.is_empty();
    failures.extend(info);
    SuiteReport {
        suite,
        ok,
        summary: format!(
            "r <= {}, k <= {}, degree <= {}, |g| <= {}: {records} records, {valid} valid, {all_pass} with every condition, {between} between 12/13 and 13/14",
            caps.r_max, caps.k_max, caps.d_max, caps.s_max
        ),
        lines: failures,
        csv,
    }
}

/// Every valid cDE-a record re-validates under `find_beta` and has
/// `α_j(g) = 1` off the multiples of `β`.
fn verify_g_weight(caps: &VerifyCaps) -> SuiteReport {
    let opts = BetaOptions {
        k_max: caps.k_max,
        include_integer_classes: false,
    };
    let recs = scan_family(Family::CdeA, &caps.scan_caps());
    let checks: Vec<Option<String>> = recs
        .par_iter()
        .filter(|rec| rec.is_valid())
        .map(|rec| {
            let outcome = find_beta(&rec.weights, &rec.support, &opts);
            let Some(w) = outcome.witness() else {
                return Some(format!("{} f = {}: witness does not re-validate", rec.weights, rec.support));
            };
            match g_weight_lemma_violations(&rec.weights, &rec.support, w) {
                Ok(bad) if bad.is_empty() => None,
                Ok(bad) => Some(format!("{} f = {}: g-weight is not 1 at j = {bad:?}", rec.weights, rec.support)),
                Err(e) => Some(format!("{} f = {}: {e}", rec.weights, rec.support)),
            }
        })
        .collect();
    let valid = checks.len();
    let lines: Vec<String> = checks.into_iter().flatten().collect();
    let csv = failure_csv(&lines);
    SuiteReport {
        suite: Suite::GWeight,
        ok: lines.is_empty(),
        summary: format!("cDE-a, r <= {}: {} records, {valid} valid, {} violations", caps.r_max, recs.len(), lines.len()),
        lines,
        csv,
    }
}

/// Points with `diff <= 1` in classes `1..r` found by brute force over
/// shifts `c ∈ [0, bound]^4`, in the integer form `r·w`.
pub fn sublevel_brute_force(ws: &WeightSystem, s: &SeriesSupport, bound: i64) -> Vec<Weight> {
    let r = ws.r();
    let pieces: Vec<[i64; 4]> = s.monomials().iter().map(|m| m.0.map(|e| 1 - e as i64)).collect();
    let mut out = Vec::new();
    for j in 1..r {
        let base = ws.alpha_unchecked(j);
        let b = ws.alpha_numerators(j);
        for c0 in 0..=bound {
            for c1 in 0..=bound {
                for c2 in 0..=bound {
                    for c3 in 0..=bound {
                        let n = [b[0] + r * c0, b[1] + r * c1, b[2] + r * c2, b[3] + r * c3];
                        let top = pieces
                            .iter()
                            .map(|p| p[0] * n[0] + p[1] * n[1] + p[2] * n[2] + p[3] * n[3])
                            .max()
                            .unwrap();
                        if top <= r {
                            out.push(base.shift([c0, c1, c2, c3]));
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Side of the brute-force cube for a bounded support: `maxdeg + 3`, widened
/// to the certified norm bound when that is larger.
pub fn sublevel_oracle_bound(s: &SeriesSupport, certificate: &Certificate) -> i64 {
    let base = s.max_degree() as i64 + 3;
    let certified = match certificate {
        Certificate::Maximin { norm_bound, .. } => norm_bound.floor(),
        Certificate::NoLatticePoints { search_box, .. } => search_box.iter().map(|x| x.ceil()).max().unwrap_or(0),
        Certificate::Recession { .. } => 0,
    };
    base.max(certified)
}

/// For every generated system with `r <= r_max` and every template whose
/// search is bounded, the search output equals brute force over the cube
/// from [`sublevel_oracle_bound`].
fn verify_sublevel(caps: &VerifyCaps) -> SuiteReport {
    let mut cases = Vec::new();
    for family in Family::ALL {
        for r in 2..=caps.r_max {
            for a in family.parameters(r) {
                if let Ok(ws) = family.generate(r, a.unwrap_or(0)) {
                    cases.push((family, ws));
                }
            }
        }
    }
    let per_case: Vec<(usize, usize, usize, Vec<String>)> = cases
        .par_iter()
        .map(|(family, ws)| {
            let f_type = family.series_type();
            let Ok(pool) = semiinvariant_monomials(ws, f_type, caps.d_max) else {
                return (0, 0, 0, Vec::new());
            };
            let (mut compared, mut skipped, mut beyond, mut bad) = (0, 0, 0, Vec::new());
            for size in 1..=caps.s_max.min(pool.len()) {
                for pick in combinations(pool.len(), size) {
                    let template: Vec<Monomial> = pick.iter().map(|&i| pool[i]).collect();
                    let Ok(s) = SeriesSupport::new(ws, f_type, &template) else { continue };
                    let set = sublevel_enumerate(ws, &s, false);
                    if !set.bounded {
                        skipped += 1;
                        continue;
                    }
                    compared += 1;
                    let small = s.max_degree() as i64 + 3;
                    let bound = sublevel_oracle_bound(&s, &set.certificate);
                    let brute = sublevel_brute_force(ws, &s, bound);
                    if brute.iter().any(|w| w.coords().iter().any(|&x| x > Rational::from_int(small))) {
                        beyond += 1;
                    }
                    if set.weights() != brute {
                        bad.push(format!(
                            "{ws} f = {s}: search {} points, brute force over [0, {bound}]^4 {}",
                            set.points.len(),
                            brute.len()
                        ));
                    }
                }
            }
            (compared, skipped, beyond, bad)
        })
        .collect();
    let compared: usize = per_case.iter().map(|x| x.0).sum();
    let skipped: usize = per_case.iter().map(|x| x.1).sum();
    let beyond: usize = per_case.iter().map(|x| x.2).sum();
    let lines: Vec<String> = per_case.into_iter().flat_map(|x| x.3).collect();
    let csv = failure_csv(&lines);
    SuiteReport {
        suite: Suite::SublevelOracle,
        ok: lines.is_empty(),
        summary: format!(
            "r <= {}: {compared} supports compared, {skipped} unbounded skipped, {beyond} with points beyond [0, maxdeg+3]^4, {} discrepancies",
            caps.r_max,
            lines.len()
        ),
        lines,
        csv,
    }
}

fn failure_csv(lines: &[String]) -> String {
    let mut csv = String::from("failure\n");
    for l in lines {
        csv.push_str(&format!("\"{}\"\n", l.replace('"', "\"\"")));
    }
    csv
}
