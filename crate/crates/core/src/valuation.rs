//! `diff(w) = w(x1x2x3x4) - w(f)`, its sublevel set `{diff <= 1}` over the
//! lattice, and the search for the distinguished weight `β` and `k`.
//!
//! `diff` is the maximum of the linear forms `⟨1 - m, w⟩` over the support,
//! so it is convex, piecewise linear and positively homogeneous. The search
//! is made finite by a certificate: if `V* = max_{d ∈ simplex} min_m ⟨m,d⟩`
//! is below 1 then `diff(w) >= (1 - V*)|w|`, which bounds the set. When
//! `V* >= 1` the set `{w >= 0 : diff(w) <= 1}` is an unbounded polyhedron and
//! is handled through its vertices and extreme rays.

use num_integer::Integer;

use serde::{Deserialize, Serialize};

use crate::series::{weight_of_f, Monomial, SeriesSupport};
use crate::weights::{gcd, Rational, Weight, WeightSystem};

/// `|w|_1 - w(f)`.
pub fn diff(w: &[Rational; 4], s: &SeriesSupport) -> Rational {
    w.iter().sum::<Rational>() - weight_of_f(w, s)
}

/// Certificate that decides whether `{diff <= 1}` is bounded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Maximin {
    /// `V*`.
    pub value: Rational,
    /// A point of the simplex attaining `V*`.
    pub point: [Rational; 4],
}

/// Exact `max_{d ∈ simplex} min_m ⟨m, d⟩` over the monomials of `s`, by
/// enumerating the basic feasible points of the LP
/// `max t  s.t.  Σd = 1, d >= 0, ⟨m,d⟩ >= t`.
pub fn boundedness_certificate(s: &SeriesSupport) -> Maximin {
    maximin(&s.monomials())
}

pub(crate) fn maximin(monomials: &[Monomial]) -> Maximin {
    assert!(!monomials.is_empty(), "maximin of an empty support");
    // Rows over the variables (d1, d2, d3, d4, t): inequality rows read `row·x >= 0`.
    let mut ineqs: Vec<[Rational; 5]> = Vec::new();
    for i in 0..4 {
        let mut row = [Rational::ZERO; 5];
        row[i] = Rational::ONE;
        ineqs.push(row);
    }
    for m in monomials {
        let mut row = [Rational::ZERO; 5];
        for i in 0..4 {
            row[i] = Rational::from_int(m.0[i] as i64);
        }
        row[4] = -Rational::ONE;
        ineqs.push(row);
    }
    let mut best: Option<([Rational; 4], Rational)> = None;
    for active in combinations(ineqs.len(), 4) {
        let mut mat = vec![vec![Rational::ONE, Rational::ONE, Rational::ONE, Rational::ONE, Rational::ZERO]];
        let mut rhs = vec![Rational::ONE];
        for &a in &active {
            mat.push(ineqs[a].to_vec());
            rhs.push(Rational::ZERO);
        }
        let Some(x) = solve(mat, rhs) else { continue };
        let feasible = ineqs
            .iter()
            .all(|row| !(0..5).map(|i| row[i] * x[i]).sum::<Rational>().is_negative());
        if !feasible {
            continue;
        }
        let d = [x[0], x[1], x[2], x[3]];
        let t = x[4];
        let better = match &best {
            None => true,
            Some((bd, bt)) => t > *bt || (t == *bt && d < *bd),
        };
        if better {
            best = Some((d, t));
        }
    }
    let (point, value) = best.expect("the LP always has a basic optimal point");
    Maximin { value, point }
}

/// How the sublevel search was made finite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `V* < 1`; every point with `diff <= 1` has `|w|_1 <= norm_bound`.
    Maximin {
        value: Rational,
        point: [Rational; 4],
        norm_bound: Rational,
    },
    /// `V* >= 1` but no lattice point lies in the polyhedron; checked over a
    /// box that contains a translate of every such point.
    NoLatticePoints { value: Rational, search_box: [Rational; 4] },
    /// `V* >= 1` and some lattice point has `diff <= 1`; adding integer
    /// multiples of `direction` keeps `diff <= 1`.
    Recession { value: Rational, direction: [i64; 4] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SublevelPoint {
    pub weight: Weight,
    pub diff: Rational,
}

/// The lattice points with `diff <= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SublevelSet {
    /// Sorted by `(class, coords)`. Complete when `bounded`; otherwise the
    /// first [`UNBOUNDED_SAMPLE`] points met in the search box.
    pub points: Vec<SublevelPoint>,
    pub bounded: bool,
    pub certificate: Certificate,
}

impl SublevelSet {
    pub fn weights(&self) -> Vec<Weight> {
        self.points.iter().map(|p| p.weight).collect()
    }
}

/// The linear pieces `1 - m` of `diff`; on numerators `N = r·w`,
/// `r·diff(w) = max ⟨1-m, N⟩`.
fn pieces(s: &SeriesSupport) -> Vec<[i64; 4]> {
    s.monomials().iter().map(|m| m.0.map(|e| 1 - e as i64)).collect()
}

/// Classes searched: `1..r`, plus the integer class when requested.
fn classes(ws: &WeightSystem, include_integer_classes: bool) -> Vec<i64> {
    let start = if include_integer_classes { 0 } else { 1 };
    (start..ws.r()).collect()
}

/// All lattice points `w` (classes `1..r`, or `0..r` with
/// `include_integer_classes`) with `w != 0` and `diff(w) <= 1`.
pub fn sublevel_enumerate(ws: &WeightSystem, s: &SeriesSupport, include_integer_classes: bool) -> SublevelSet {
    let cert = boundedness_certificate(s);
    if cert.value < Rational::ONE {
        bounded_search(ws, s, include_integer_classes, cert)
    } else {
        unbounded_search(ws, s, include_integer_classes, cert)
    }
}

fn to_point(ws: &WeightSystem, s: &SeriesSupport, j: i64, n: [i64; 4]) -> SublevelPoint {
    let r = ws.r();
    let base = ws.alpha_unchecked(j);
    let base_n = ws.alpha_numerators(j);
    let shift = [0, 1, 2, 3].map(|i| (n[i] - base_n[i]) / r);
    let weight = base.shift(shift);
    SublevelPoint {
        diff: diff(&weight.coords(), s),
        weight,
    }
}

fn finish(mut points: Vec<SublevelPoint>, bounded: bool, certificate: Certificate) -> SublevelSet {
    points.sort_by(|a, b| a.weight.cmp(&b.weight));
    SublevelSet {
        points,
        bounded,
        certificate,
    }
}

/// `V* < 1`, so `P` is a polytope; its vertices bound the search box.
fn bounded_search(ws: &WeightSystem, s: &SeriesSupport, include_integer_classes: bool, cert: Maximin) -> SublevelSet {
    let (p, q) = (cert.value.numer(), cert.value.denom());
    let norm_bound = Rational::new(q, q - p);
    let (vertices, _) = polyhedron_skeleton(s);
    let upper = [0, 1, 2, 3].map(|i| vertices.iter().map(|v| v[i]).max().unwrap_or(Rational::ZERO));
    let points = box_scan(ws, s, include_integer_classes, upper, usize::MAX);
    finish(
        points,
        true,
        Certificate::Maximin {
            value: cert.value,
            point: cert.point,
            norm_bound,
        },
    )
}

/// Lattice points `w <= upper` with `diff(w) <= 1`, stopping after `limit`.
/// Partial sums prune the first three coordinates; the last one is solved
/// as an interval.
fn box_scan(
    ws: &WeightSystem,
    s: &SeriesSupport,
    include_integer_classes: bool,
    upper: [Rational; 4],
    limit: usize,
) -> Vec<SublevelPoint> {
    let r = ws.r();
    let pieces = pieces(s);
    let mut points = Vec::new();
    for j in classes(ws, include_integer_classes) {
        let base = ws.alpha_unchecked(j);
        let b = ws.alpha_numerators(j);
        let lim: [i64; 4] = [0, 1, 2, 3].map(|i| (upper[i] - base.coords()[i]).floor());
        if lim.iter().any(|&l| l < 0) {
            continue;
        }
        // rest[k][t]: least value of piece k over coordinates t.. in the box.
        let rest: Vec<[i64; 5]> = pieces
            .iter()
            .map(|c| {
                let mut out = [0i64; 5];
                for t in (0..4).rev() {
                    out[t] = out[t + 1] + (c[t] * b[t]).min(c[t] * (b[t] + r * lim[t]));
                }
                out
            })
            .collect();
        let alive = |partial: &[i64], t: usize| pieces.iter().enumerate().all(|(k, _)| partial[k] + rest[k][t] <= r);
        let mut p0 = vec![0i64; pieces.len()];
        let mut p1 = p0.clone();
        let mut p2 = p0.clone();
        for c0 in 0..=lim[0] {
            let n0 = b[0] + r * c0;
            for (k, c) in pieces.iter().enumerate() {
                p0[k] = c[0] * n0;
            }
            if !alive(&p0, 1) {
                continue;
            }
            for c1 in 0..=lim[1] {
                let n1 = b[1] + r * c1;
                for (k, c) in pieces.iter().enumerate() {
                    p1[k] = p0[k] + c[1] * n1;
                }
                if !alive(&p1, 2) {
                    continue;
                }
                for c2 in 0..=lim[2] {
                    let n2 = b[2] + r * c2;
                    for (k, c) in pieces.iter().enumerate() {
                        p2[k] = p1[k] + c[2] * n2;
                    }
                    if !alive(&p2, 3) {
                        continue;
                    }
                    let (mut lo, mut hi) = (0i64, lim[3]);
                    for (k, c) in pieces.iter().enumerate() {
                        // c3 · (b3 + r·x) <= r - partial
                        let room = r - p2[k] - c[3] * b[3];
                        let step = c[3] * r;
                        match step.signum() {
                            1 => hi = hi.min(Integer::div_floor(&room, &step)),
                            -1 => lo = lo.max(Integer::div_ceil(&room, &step)),
                            _ if room < 0 => hi = -1,
                            _ => {}
                        }
                    }
                    for c3 in lo..=hi {
                        let n = [n0, n1, n2, b[3] + r * c3];
                        if n == [0; 4] {
                            continue;
                        }
                        points.push(to_point(ws, s, j, n));
                        if points.len() >= limit {
                            return points;
                        }
                    }
                }
            }
        }
    }
    points
}

/// Vertices of `P = {w >= 0 : ⟨1-m, w⟩ <= 1}` and primitive integer
/// generators of the extreme rays of its recession cone.
fn polyhedron_skeleton(s: &SeriesSupport) -> (Vec<[Rational; 4]>, Vec<[i64; 4]>) {
    let mut rows: Vec<([Rational; 4], Rational)> = Vec::new();
    for i in 0..4 {
        let mut row = [Rational::ZERO; 4];
        row[i] = Rational::ONE;
        rows.push((row, Rational::ZERO));
    }
    for m in s.monomials() {
        // 1 - ⟨1-m, w⟩ >= 0 written as ⟨m-1, w⟩ >= -1.
        rows.push((m.0.map(|e| Rational::from_int(e as i64 - 1)), -Rational::ONE));
    }
    let satisfies = |x: &[Rational], homogeneous: bool| {
        rows.iter().all(|(row, b)| {
            let lhs: Rational = (0..4).map(|i| row[i] * x[i]).sum();
            let b = if homogeneous { Rational::ZERO } else { *b };
            lhs >= b
        })
    };

    let mut vertices = Vec::new();
    for active in combinations(rows.len(), 4) {
        let mat = active.iter().map(|&a| rows[a].0.to_vec()).collect();
        let rhs = active.iter().map(|&a| rows[a].1).collect();
        if let Some(x) = solve(mat, rhs) {
            if satisfies(&x, false) {
                vertices.push([x[0], x[1], x[2], x[3]]);
            }
        }
    }
    vertices.sort();
    vertices.dedup();

    let mut rays = Vec::new();
    for active in combinations(rows.len(), 3) {
        let mut mat: Vec<Vec<Rational>> = active.iter().map(|&a| rows[a].0.to_vec()).collect();
        let mut rhs = vec![Rational::ZERO; 3];
        mat.push(vec![Rational::ONE; 4]);
        rhs.push(Rational::ONE);
        if let Some(x) = solve(mat, rhs) {
            if satisfies(&x, true) {
                rays.push(primitive_integer([x[0], x[1], x[2], x[3]]));
            }
        }
    }
    rays.sort();
    rays.dedup();
    (vertices, rays)
}

fn primitive_integer(x: [Rational; 4]) -> [i64; 4] {
    let l = x.iter().fold(1i64, |l, c| l / gcd(l, c.denom()) * c.denom());
    let n = x.map(|c| (c * l).numer());
    let g = n.iter().fold(0, |g, &v| gcd(g, v));
    n.map(|v| v / g.max(1))
}

/// Points kept as evidence once the set is known to be infinite.
pub const UNBOUNDED_SAMPLE: usize = 32;

/// Every lattice point of `P` is `u + Σ n_ρ ρ` with integers `n_ρ >= 0` and
/// `u <= max_v v + Σ ρ`, so the box decides whether `P` has lattice points.
fn unbounded_search(ws: &WeightSystem, s: &SeriesSupport, include_integer_classes: bool, cert: Maximin) -> SublevelSet {
    let (vertices, rays) = polyhedron_skeleton(s);
    debug_assert!(!rays.is_empty());
    let mut upper = [Rational::ZERO; 4];
    for (i, u) in upper.iter_mut().enumerate() {
        let vmax = vertices.iter().map(|v| v[i]).max().unwrap_or(Rational::ZERO);
        *u = vmax + Rational::from_int(rays.iter().map(|ray| ray[i]).sum());
    }
    let points = box_scan(ws, s, include_integer_classes, upper, UNBOUNDED_SAMPLE);
    if points.is_empty() {
        finish(
            points,
            true,
            Certificate::NoLatticePoints {
                value: cert.value,
                search_box: upper,
            },
        )
    } else {
        let direction = *rays
            .iter()
            .min_by_key(|ray| (ray.iter().sum::<i64>(), std::cmp::Reverse(**ray)))
            .unwrap();
        finish(
            points,
            false,
            Certificate::Recession {
                value: cert.value,
                direction,
            },
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaOptions {
    pub k_max: i64,
    pub include_integer_classes: bool,
}

impl Default for BetaOptions {
    fn default() -> Self {
        BetaOptions {
            k_max: 13,
            include_integer_classes: false,
        }
    }
}

/// The pair `(k, β)`; `β` is absent exactly when `k = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaWitness {
    pub k: i64,
    pub beta: Option<Weight>,
    pub diff: Option<Rational>,
    /// `diff(β) = 1/(k-1)`, the upper end of the admissible interval.
    pub boundary: bool,
    pub evidence: SublevelSet,
}

/// Why no admissible `(k, β)` exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum BetaFailure {
    /// Infinitely many lattice points have `diff <= 1`.
    Unbounded { direction: [i64; 4], points: Vec<SublevelPoint> },
    /// The sublevel set is not the chain of multiples of its smallest point.
    NotAChain { beta: Weight, offending: Vec<SublevelPoint> },
    NotPrimitive { beta: Weight },
    DiffOutOfRange { beta: Weight, diff: Rational, k: i64 },
    KExceedsCap { beta: Weight, diff: Rational, k: i64, k_max: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum BetaOutcome {
    Found(BetaWitness),
    Failed(BetaFailure),
}

impl BetaOutcome {
    pub fn witness(&self) -> Option<&BetaWitness> {
        match self {
            BetaOutcome::Found(w) => Some(w),
            BetaOutcome::Failed(_) => None,
        }
    }
}

/// `k = ⌊1/d⌋ + 1`, the unique `k` with `1/k < d <= 1/(k-1)`.
pub fn k_for_diff(d: Rational) -> i64 {
    d.recip().floor() + 1
}

/// Searches for the `(k, β)` such that the lattice points with `diff <= 1`
/// are exactly `β, 2β, ..., (k-1)β`, with `β` primitive and
/// `1/k < diff(β) <= min(12/13, 1/(k-1))` or `diff(β) = 1, k = 2`.
pub fn find_beta(ws: &WeightSystem, s: &SeriesSupport, opts: &BetaOptions) -> BetaOutcome {
    let set = sublevel_enumerate(ws, s, opts.include_integer_classes);
    if let Certificate::Recession { direction, .. } = set.certificate {
        return BetaOutcome::Failed(BetaFailure::Unbounded {
            direction,
            points: set.points,
        });
    }
    let Some(first) = set.points.iter().min_by(|a, b| {
        (a.weight.norm1(), a.weight).cmp(&(b.weight.norm1(), b.weight))
    }) else {
        return BetaOutcome::Found(BetaWitness {
            k: 1,
            beta: None,
            diff: None,
            boundary: false,
            evidence: set,
        });
    };
    let beta = first.weight;
    let d = first.diff;
    let k = k_for_diff(d);

    let expected: Vec<Weight> = (1..k)
        .map(|t| beta.scale(t))
        .filter(|w| opts.include_integer_classes || !w.is_integral())
        .collect();
    let offending: Vec<SublevelPoint> = set
        .points
        .iter()
        .filter(|p| !expected.contains(&p.weight))
        .cloned()
        .collect();
    if !offending.is_empty() {
        return BetaOutcome::Failed(BetaFailure::NotAChain { beta, offending });
    }
    if !ws.is_primitive(&beta) {
        return BetaOutcome::Failed(BetaFailure::NotPrimitive { beta });
    }
    let first_bullet = d <= Rational::new(12, 13);
    let second_bullet = d == Rational::ONE && k == 2;
    if !(first_bullet || second_bullet) {
        return BetaOutcome::Failed(BetaFailure::DiffOutOfRange { beta, diff: d, k });
    }
    if k > opts.k_max {
        return BetaOutcome::Failed(BetaFailure::KExceedsCap {
            beta,
            diff: d,
            k,
            k_max: opts.k_max,
        });
    }
    BetaOutcome::Found(BetaWitness {
        k,
        beta: Some(beta),
        diff: Some(d),
        boundary: d == Rational::new(1, k - 1),
        evidence: set,
    })
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Exact Gaussian elimination for a square system; `None` when singular.
pub(crate) fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&row| !a[row][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] = a[col][c] * inv;
        }
        b[col] = b[col] * inv;
        for row in 0..n {
            if row != col && !a[row][col].is_zero() {
                let f = a[row][col];
                for c in col..n {
                    let v = a[col][c];
                    a[row][c] -= f * v;
                }
                let v = b[col];
                b[row] -= f * v;
            }
        }
    }
    Some(b)
}
