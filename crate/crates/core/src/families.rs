//! The ten normal-form families, exhaustive template scans over them, and
//! the atlas of realized `(family, k, r, β)` keys.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{classify_support, ClassifyOptions, Summary};
use crate::series::{semiinvariant_monomials, Monomial, SeriesSupport, SeriesType};
use crate::structure::StructureReport;
use crate::valuation::{combinations, BetaOptions};
use crate::weights::{fmt_coords, gcd, Rational, Weight, WeightSystem};

/// Format version of [`FamilyRecord`].
pub const RECORD_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `(a, 1, -a, a+1; a+1)`, `gcd(a, r) = gcd(a+1, r) = 1`.
    #[serde(rename = "cA-C")]
    CaC,
    /// `(a, -a-1, -a, a+1; -1)`, `gcd(a, r) = gcd(a+1, r) = 1`.
    #[serde(rename = "cA-D")]
    CaD,
    /// `(1, a, -a, a+1; a+1)`, `gcd(a, r) = 1 < gcd(a+1, r)`.
    #[serde(rename = "cA-B")]
    CaB,
    /// `(1, (r+2)/2, (r-2)/2, 2; 2)`, `4 | r`.
    #[serde(rename = "Odd")]
    Odd,
    /// `(0, a, -a, 1; 0)`.
    #[serde(rename = "cDE-a")]
    CdeA,
    /// `(a, -a, 1, 2a; 2a)`, `r` even.
    #[serde(rename = "cDE-b")]
    CdeB,
    /// `(1, a, -a, 2; 2)`, `r` even.
    #[serde(rename = "cDE-c")]
    CdeC,
    /// `((r-1)/2, (r+1)/2, a, -a; -1)`, `r` odd.
    #[serde(rename = "cDE-d")]
    CdeD,
    /// `(a, -a, 2a, 1; 2a)`, `r` odd.
    #[serde(rename = "cDE-e")]
    CdeE,
    /// `(1, a, -a, 2; 2)`, `r` odd.
    #[serde(rename = "cDE-f")]
    CdeF,
}

/// Why a family parameter does not give a valid system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection(pub String);

impl Family {
    pub const ALL: [Family; 10] = [
        Family::CaC,
        Family::CaD,
        Family::CaB,
        Family::Odd,
        Family::CdeA,
        Family::CdeB,
        Family::CdeC,
        Family::CdeD,
        Family::CdeE,
        Family::CdeF,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::CaC => "cA-C",
            Family::CaD => "cA-D",
            Family::CaB => "cA-B",
            Family::Odd => "Odd",
            Family::CdeA => "cDE-a",
            Family::CdeB => "cDE-b",
            Family::CdeC => "cDE-c",
            Family::CdeD => "cDE-d",
            Family::CdeE => "cDE-e",
            Family::CdeF => "cDE-f",
        }
    }

    pub fn series_type(self) -> SeriesType {
        match self {
            Family::CaC | Family::CaD | Family::CaB => SeriesType::CA,
            Family::Odd => SeriesType::Odd,
            _ => SeriesType::CDE,
        }
    }

    /// Parameter values to try at order `r`; `None` for the parameter-free
    /// odd family.
    pub fn parameters(self, r: i64) -> Vec<Option<i64>> {
        match self {
            Family::Odd => vec![None],
            _ => (1..r).map(Some).collect(),
        }
    }

    /// The unreduced tuple `(a1, a2, a3, a4, e)`.
    fn tuple(self, r: i64, a: i64) -> ([i64; 4], i64) {
        match self {
            Family::CaC => ([a, 1, -a, a + 1], a + 1),
            Family::CaD => ([a, -a - 1, -a, a + 1], -1),
            Family::CaB => ([1, a, -a, a + 1], a + 1),
            Family::Odd => ([1, (r + 2) / 2, (r - 2) / 2, 2], 2),
            Family::CdeA => ([0, a, -a, 1], 0),
            Family::CdeB => ([a, -a, 1, 2 * a], 2 * a),
            Family::CdeC | Family::CdeF => ([1, a, -a, 2], 2),
            Family::CdeD => ([(r - 1) / 2, (r + 1) / 2, a, -a], -1),
            Family::CdeE => ([a, -a, 2 * a, 1], 2 * a),
        }
    }

    fn constraint(self, r: i64, a: i64) -> std::result::Result<(), String> {
        let unit = |x: i64| gcd(x, r) == 1;
        if self != Family::Odd && !unit(a) {
            return Err(format!("gcd(a, r) = {} is not 1", gcd(a, r)));
        }
        match self {
            Family::CaC | Family::CaD if !unit(a + 1) => Err(format!("gcd(a+1, r) = {} is not 1", gcd(a + 1, r))),
            Family::CaB if unit(a + 1) => Err("gcd(a+1, r) = 1".into()),
            Family::Odd if r % 4 != 0 => Err("4 does not divide r".into()),
            Family::CdeB | Family::CdeC if r % 2 != 0 => Err("r is odd".into()),
            Family::CdeD | Family::CdeE | Family::CdeF if r % 2 == 0 => Err("r is even".into()),
            _ => Ok(()),
        }
    }

    /// The reduced system for parameter `a` (ignored for the odd family),
    /// or the violated constraint.
    pub fn generate(self, r: i64, a: i64) -> std::result::Result<WeightSystem, Rejection> {
        self.generate_with(r, a, false)
    }

    /// As [`Family::generate`]; with `overlap`, cA-B also accepts
    /// `gcd(a+1, r) = 1`, where it meets cA-C and cA-D.
    pub fn generate_with(self, r: i64, a: i64, overlap: bool) -> std::result::Result<WeightSystem, Rejection> {
        if r < 2 {
            return Err(Rejection("r must be at least 2".into()));
        }
        let relaxed = overlap && self == Family::CaB && gcd(a, r) == 1;
        if !relaxed {
            self.constraint(r, a).map_err(Rejection)?;
        }
        let (t, e) = self.tuple(r, a);
        let ws = WeightSystem::new(r, t, e).map_err(|err| Rejection(err.to_string()))?;
        if self.series_type() == SeriesType::CA && ws.is_excluded_ca_shape() {
            return Err(Rejection("excluded shape 1/r(a,-a,1,0;0)".into()));
        }
        Ok(ws)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

pub fn generate_family(family: Family, r: i64, a: i64) -> std::result::Result<WeightSystem, Rejection> {
    family.generate(r, a)
}

/// Caps for a family scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCaps {
    pub r_max: i64,
    pub k_max: i64,
    /// Largest degree of a template monomial.
    pub d_max: u32,
    /// Largest number of monomials in `g`.
    pub s_max: usize,
    /// Let cA-B run over `gcd(a+1, r) = 1` too.
    #[serde(default)]
    pub cab_overlap: bool,
}

impl Default for ScanCaps {
    fn default() -> Self {
        ScanCaps {
            r_max: 25,
            k_max: 13,
            d_max: 8,
            s_max: 3,
            cab_overlap: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub k: i64,
    pub beta: Option<Weight>,
    pub diff: Option<Rational>,
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RecordVerdict {
    Valid { k: i64, beta: Option<Weight> },
    SettingFails { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub version: u32,
    pub family: Family,
    pub r: i64,
    pub a: Option<i64>,
    pub weights: WeightSystem,
    pub support: SeriesSupport,
    pub witness: Option<WitnessSummary>,
    pub structure: Option<StructureReport>,
    pub verdict: RecordVerdict,
    /// Some monomial of `g` has the maximal allowed degree.
    pub degree_cap_binding: bool,
}

impl FamilyRecord {
    pub fn is_valid(&self) -> bool {
        matches!(self.verdict, RecordVerdict::Valid { .. })
    }
}

/// Runs the pipeline on every admissible `(r, a)` of the family and every
/// `g` made of at most `s_max` domination-minimal semi-invariant monomials
/// of degree at most `d_max`. Records are ordered by `r`, `a`, template.
pub fn scan_family(family: Family, caps: &ScanCaps) -> Vec<FamilyRecord> {
    let systems: Vec<(i64, Option<i64>, WeightSystem)> = (2..=caps.r_max)
        .flat_map(|r| {
            family
                .parameters(r)
                .into_iter()
                .filter_map(move |a| family.generate_with(r, a.unwrap_or(0), caps.cab_overlap).ok().map(|ws| (r, a, ws)))
        })
        .collect();
    systems
        .par_iter()
        .flat_map_iter(|&(r, a, ws)| scan_system(family, r, a, &ws, caps))
        .collect()
}

fn scan_system(family: Family, r: i64, a: Option<i64>, ws: &WeightSystem, caps: &ScanCaps) -> Vec<FamilyRecord> {
    let f_type = family.series_type();
    let Ok(pool) = semiinvariant_monomials(ws, f_type, caps.d_max) else {
        return Vec::new();
    };
    let opts = ClassifyOptions {
        beta: BetaOptions {
            k_max: caps.k_max,
            include_integer_classes: false,
        },
    };
    let mut out = Vec::new();
    for size in 1..=caps.s_max.min(pool.len()) {
        for pick in combinations(pool.len(), size) {
            let template: Vec<Monomial> = pick.iter().map(|&i| pool[i]).collect();
            let Ok(support) = SeriesSupport::new(ws, f_type, &template) else { continue };
            // Templates are antichains by construction, so this is a no-op
            // except for duplicates.
            if support.g().len() != template.len() {
                continue;
            }
            let verdict = classify_support(ws, &support, &opts);
            let witness = verdict.witness.as_ref().and_then(|o| o.witness()).map(|w| WitnessSummary {
                k: w.k,
                beta: w.beta,
                diff: w.diff,
                boundary: w.boundary,
            });
            let record_verdict = match &verdict.summary {
                Summary::TerminalLike => RecordVerdict::Valid { k: 1, beta: None },
                Summary::EncCandidate { k, beta } => RecordVerdict::Valid { k: *k, beta: Some(*beta) },
                Summary::SettingViolated => RecordVerdict::SettingFails {
                    reason: verdict.setting.reasons.join("; "),
                },
            };
            out.push(FamilyRecord {
                version: RECORD_VERSION,
                family,
                r,
                a,
                weights: *ws,
                support: support.clone(),
                witness,
                structure: verdict.structure,
                verdict: record_verdict,
                degree_cap_binding: template.iter().any(|m| m.degree() == caps.d_max),
            });
        }
    }
    out
}

pub fn to_jsonl(records: &[FamilyRecord]) -> String {
    let mut s = String::new();
    for rec in records {
        s.push_str(&serde_json::to_string(rec).expect("records serialize"));
        s.push('\n');
    }
    s
}

pub fn from_jsonl(text: &str) -> Result<Vec<FamilyRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtlasRow {
    pub family: Family,
    pub k: i64,
    pub r: i64,
    pub beta: Option<Weight>,
    /// Number of distinct supports realizing the key.
    pub count: usize,
}

/// Groups the valid records by `(family, k, r, β)` and counts distinct
/// supports. Idempotent, and independent of the order of the records.
pub fn atlas_merge(records: &[FamilyRecord]) -> Result<Vec<AtlasRow>> {
    if let Some(bad) = records.iter().find(|r| r.version != RECORD_VERSION) {
        return Err(Error::VersionMismatch(format!(
            "record version {} but this build reads version {RECORD_VERSION}",
            bad.version
        )));
    }
    type Key = (Family, i64, i64, Option<Weight>);
    let mut table: BTreeMap<Key, BTreeSet<String>> = BTreeMap::new();
    for rec in records {
        if let RecordVerdict::Valid { k, beta } = &rec.verdict {
            let support = serde_json::to_string(&rec.support).expect("supports serialize");
            table.entry((rec.family, *k, rec.r, *beta)).or_default().insert(support);
        }
    }
    Ok(table
        .into_iter()
        .map(|((family, k, r, beta), supports)| AtlasRow {
            family,
            k,
            r,
            beta,
            count: supports.len(),
        })
        .collect())
}

/// CSV with header `family,k,r,beta,count`; `β` is written as
/// `(b1 b2 b3 b4)` and the zero weight as `0`.
pub fn atlas_csv(rows: &[AtlasRow]) -> String {
    let mut s = String::from("family,k,r,beta,count\n");
    for row in rows {
        let beta = match &row.beta {
            Some(b) => fmt_coords(&b.coords()).replace(',', " "),
            None => "0".to_string(),
        };
        s.push_str(&format!("{},{},{},{},{}\n", row.family, row.k, row.r, beta, row.count));
    }
    s
}
