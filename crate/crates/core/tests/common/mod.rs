//! Strategies shared by the property tests and the acceptance run.
#![allow(dead_code)]

use cdvq::series::semiinvariant_monomials;
use cdvq::{Monomial, SeriesSupport, SeriesType, WeightSystem};
use proptest::prelude::*;

/// Valid systems with `2 <= r <= r_max`; `e` is fixed by `Σa - e ≡ 1`.
pub fn weight_system(r_max: i64) -> impl Strategy<Value = WeightSystem> {
    (2..=r_max)
        .prop_flat_map(|r| (Just(r), prop::array::uniform4(0..r)))
        .prop_filter_map("setting conditions", |(r, a)| {
            let e = (a.iter().sum::<i64>() - 1).rem_euclid(r);
            WeightSystem::new(r, a, e).ok()
        })
}

pub fn series_type() -> impl Strategy<Value = SeriesType> {
    prop_oneof![Just(SeriesType::CA), Just(SeriesType::Odd), Just(SeriesType::CDE)]
}

/// A system with a semi-invariant support of at most three g-monomials of
/// degree at most `d_max`.
pub fn system_with_support(r_max: i64, d_max: u32) -> impl Strategy<Value = (WeightSystem, SeriesSupport)> {
    (
        weight_system(r_max),
        series_type(),
        3..=d_max,
        prop::collection::vec(any::<u16>(), 1..=3),
    )
        .prop_filter_map("no support", |(ws, t, d, picks)| {
            let pool = semiinvariant_monomials(&ws, t, d).ok()?;
            if pool.is_empty() {
                return None;
            }
            let g: Vec<Monomial> = picks.iter().map(|&p| pool[p as usize % pool.len()]).collect();
            let s = SeriesSupport::new(&ws, t, &g).ok()?;
            Some((ws, s))
        })
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        max_global_rejects: cases.saturating_mul(200),
        max_local_rejects: u32::MAX,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

use cdvq::pipeline::{classify_support, ClassifyOptions, Summary};
use cdvq::series::weight_of_f;
use cdvq::valuation::diff;
use cdvq::Rational;

fn lattice_point(ws: &WeightSystem, j: i64, c: [i64; 4]) -> [Rational; 4] {
    let r = ws.r();
    let a = ws.a();
    [0, 1, 2, 3].map(|i| Rational::new((j * a[i]).rem_euclid(r), r) + Rational::from_int(c[i]))
}

pub fn complement_involution(ws: &WeightSystem, j: i64) -> Result<(), TestCaseError> {
    let j = 1 + j.rem_euclid(ws.r() - 1);
    let w = ws.alpha(j).unwrap();
    let c = w.complement().unwrap();
    prop_assert_eq!(c.complement().unwrap(), w);
    prop_assert!(c.congruent(&ws.alpha(ws.r() - j).unwrap()));
    Ok(())
}

pub fn alpha_pairs(ws: &WeightSystem, j: i64) -> Result<(), TestCaseError> {
    let r = ws.r();
    let j = 1 + j.rem_euclid(r - 1);
    let (u, v) = (ws.alpha(j).unwrap(), ws.alpha(r - j).unwrap());
    for i in 0..4 {
        let s = u.coords()[i] + v.coords()[i];
        prop_assert!(s == Rational::ZERO || s == Rational::ONE, "{} + {} at {}", u, v, i);
    }
    Ok(())
}

/// `diff(u) + diff(u + 2d) >= 2 diff(u + d)`.
pub fn convexity(ws: &WeightSystem, s: &SeriesSupport, i: i64, cu: [i64; 4], j: i64, cd: [i64; 4]) -> Result<(), TestCaseError> {
    let u = lattice_point(ws, i.rem_euclid(ws.r()), cu);
    let d = lattice_point(ws, j.rem_euclid(ws.r()), cd);
    let m: [Rational; 4] = [0, 1, 2, 3].map(|k| u[k] + d[k]);
    let v: [Rational; 4] = [0, 1, 2, 3].map(|k| u[k] + d[k] * 2);
    prop_assert!(diff(&u, s) + diff(&v, s) >= diff(&m, s) * 2);
    Ok(())
}

pub fn permutation_equivariance(ws: &WeightSystem, s: &SeriesSupport, pick: usize) -> Result<(), TestCaseError> {
    let perms = s.f_type().symmetries();
    let p = perms[pick % perms.len()];
    // The cA exclusion is stated for one coordinate order only, so swapping
    // x3 and x4 can move a system in or out of the setting.
    prop_assume!(!s.f_type().is_ca() || ws.is_excluded_ca_shape() == ws.permuted(p).is_excluded_ca_shape());
    let opts = ClassifyOptions::default();
    let v = classify_support(ws, s, &opts);
    let w = classify_support(&ws.permuted(p), &s.permuted(p), &opts);
    let expected = match v.summary {
        Summary::EncCandidate { k, beta } => Summary::EncCandidate { k, beta: beta.permuted(p) },
        other => other,
    };
    prop_assert_eq!(w.summary, expected, "{} f = {} under {:?}", ws, s, p);
    prop_assert_eq!(w.setting.pass, v.setting.pass);
    Ok(())
}

/// Multiples of a g-monomial never change `w(f)` or `diff`, and the
/// constructor drops them.
pub fn domination_pruning(
    ws: &WeightSystem,
    s: &SeriesSupport,
    pick: usize,
    extra: [u32; 4],
    j: i64,
    c: [i64; 4],
) -> Result<(), TestCaseError> {
    let base = s.g()[pick % s.g().len()];
    let mut bigger = base;
    for i in 0..4 {
        bigger.0[i] += extra[i];
    }
    let padded = s.with_extra_g(&[bigger]);
    let w = lattice_point(ws, j.rem_euclid(ws.r()), c);
    prop_assert_eq!(weight_of_f(&w, &padded), weight_of_f(&w, s));
    prop_assert_eq!(diff(&w, &padded), diff(&w, s));

    let r = ws.r() as u32;
    let var = s.f_type().g_variables()[pick % s.f_type().g_variables().len()];
    let mut invariant = base;
    invariant.0[var] += r;
    let mut g = s.g().to_vec();
    g.push(invariant);
    let rebuilt = SeriesSupport::new(ws, s.f_type(), &g).unwrap();
    prop_assert_eq!(rebuilt.g(), s.g());
    Ok(())
}
