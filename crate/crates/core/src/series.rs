//! Finite monomial models of the semi-invariant equation `f`.
//!
//! Every quantity used downstream depends on `f` only through the minimum
//! weight of its monomials, so a support made of the domination-minimal
//! monomials of `f` is a faithful model.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::weights::{modr, Rational, WeightSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeriesType {
    /// `f = x1 x2 + g(x3, x4)`, `g ∈ m^2`.
    #[serde(rename = "cA")]
    CA,
    /// `f = x1^2 + x2^2 + g(x3, x4)`, `g ∈ m^3`, `a1 ≢ a2`.
    #[serde(rename = "odd")]
    Odd,
    /// `f = x1^2 + g(x2, x3, x4)`, `g ∈ m^3`.
    #[serde(rename = "cDE")]
    CDE,
}

impl SeriesType {
    pub fn distinguished(self) -> Vec<Monomial> {
        match self {
            SeriesType::CA => vec![Monomial([1, 1, 0, 0])],
            SeriesType::Odd => vec![Monomial([2, 0, 0, 0]), Monomial([0, 2, 0, 0])],
            SeriesType::CDE => vec![Monomial([2, 0, 0, 0])],
        }
    }

    /// Coordinates `g` may involve.
    pub fn g_variables(self) -> &'static [usize] {
        match self {
            SeriesType::CA | SeriesType::Odd => &[2, 3],
            SeriesType::CDE => &[1, 2, 3],
        }
    }

    pub fn g_min_degree(self) -> u32 {
        match self {
            SeriesType::CA => 2,
            SeriesType::Odd | SeriesType::CDE => 3,
        }
    }

    pub fn is_ca(self) -> bool {
        self == SeriesType::CA
    }

    /// Coordinate permutations that preserve the shape of `f`, identity first.
    pub fn symmetries(self) -> Vec<[usize; 4]> {
        match self {
            SeriesType::CA => vec![[0, 1, 2, 3], [0, 1, 3, 2], [1, 0, 2, 3], [1, 0, 3, 2]],
            SeriesType::Odd => vec![[0, 1, 2, 3], [0, 1, 3, 2], [1, 0, 2, 3], [1, 0, 3, 2]],
            SeriesType::CDE => perms_fixing_first(),
        }
    }
}

impl fmt::Display for SeriesType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesType::CA => "cA",
            SeriesType::Odd => "odd",
            SeriesType::CDE => "cDE",
        })
    }
}

/// The six permutations of `{1,2,3}` with `0` fixed, lexicographic.
pub(crate) fn perms_fixing_first() -> Vec<[usize; 4]> {
    vec![
        [0, 1, 2, 3],
        [0, 1, 3, 2],
        [0, 2, 1, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [0, 3, 2, 1],
    ]
}

/// Exponent vector of `x1^e1 x2^e2 x3^e3 x4^e4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(pub [u32; 4]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Coordinate-wise `self <= other`, i.e. `self` divides `other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `Σ m_i a_i mod r`.
    pub fn residue(&self, ws: &WeightSystem) -> i64 {
        let a = ws.a();
        let s: i64 = (0..4).map(|i| self.0[i] as i64 * a[i]).sum();
        modr(s, ws.r())
    }

    pub fn permuted(&self, perm: [usize; 4]) -> Monomial {
        Monomial(perm.map(|p| self.0[p]))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// `⟨m, w⟩`.
pub fn weight_of_monomial(w: &[Rational; 4], m: &Monomial) -> Rational {
    (0..4).map(|i| w[i] * m.0[i] as i64).sum()
}

/// Minimum of `⟨m, w⟩` over a nonempty list of monomials.
pub fn min_weight(w: &[Rational; 4], monomials: &[Monomial]) -> Result<Rational> {
    monomials
        .iter()
        .map(|m| weight_of_monomial(w, m))
        .min()
        .ok_or_else(|| Error::Domain("empty monomial list".into()))
}

/// Keeps the monomials not divisible by another one in the list; sorted.
pub fn prune_dominated(monomials: &[Monomial]) -> Vec<Monomial> {
    let mut ms = monomials.to_vec();
    ms.sort();
    ms.dedup();
    let keep: Vec<Monomial> = ms
        .iter()
        .filter(|m| !ms.iter().any(|o| o != *m && o.divides(m)))
        .copied()
        .collect();
    keep
}

/// Model of `f`: its distinguished monomials and the support of `g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesSupport {
    #[serde(rename = "type")]
    f_type: SeriesType,
    distinguished: Vec<Monomial>,
    g: Vec<Monomial>,
}

impl SeriesSupport {
    /// Validates the shape of `f` for the given type against `ws`. The
    /// distinguished monomials are added when missing; dominated monomials
    /// of `g` are dropped.
    pub fn new(ws: &WeightSystem, f_type: SeriesType, monomials: &[Monomial]) -> Result<Self> {
        let distinguished = f_type.distinguished();
        let mut g = Vec::new();
        for m in monomials {
            if distinguished.contains(m) {
                continue;
            }
            let vars = f_type.g_variables();
            if (0..4).any(|i| m.0[i] > 0 && !vars.contains(&i)) {
                return Err(Error::InvalidSupport(format!(
                    "{m} is not allowed in g for type {f_type}"
                )));
            }
            if m.degree() < f_type.g_min_degree() {
                return Err(Error::InvalidSupport(format!(
                    "{m} has degree {} < {} required for type {f_type}",
                    m.degree(),
                    f_type.g_min_degree()
                )));
            }
            g.push(*m);
        }
        let g = prune_dominated(&g);
        if g.is_empty() {
            return Err(Error::InvalidSupport("g has empty support".into()));
        }
        let s = SeriesSupport {
            f_type,
            distinguished,
            g,
        };
        s.check_semi_invariant(ws)?;
        if f_type == SeriesType::Odd && ws.a()[0] == ws.a()[1] {
            return Err(Error::InvalidSupport("odd type requires a1 ≢ a2 mod r".into()));
        }
        Ok(s)
    }

    pub fn check_semi_invariant(&self, ws: &WeightSystem) -> Result<()> {
        for m in self.monomials() {
            if m.residue(ws) != ws.e() {
                return Err(Error::InvalidSupport(format!(
                    "{m} has weight {} but e = {} mod {}",
                    m.residue(ws),
                    ws.e(),
                    ws.r()
                )));
            }
        }
        Ok(())
    }

    pub fn f_type(&self) -> SeriesType {
        self.f_type
    }

    pub fn g(&self) -> &[Monomial] {
        &self.g
    }

    pub fn distinguished(&self) -> &[Monomial] {
        &self.distinguished
    }

    /// Distinguished monomials followed by `g`.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut v = self.distinguished.clone();
        v.extend_from_slice(&self.g);
        v
    }

    pub fn max_degree(&self) -> u32 {
        self.monomials().iter().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Support with coordinates reordered. The permutation should be one
    /// of [`SeriesType::symmetries`].
    pub fn permuted(&self, perm: [usize; 4]) -> SeriesSupport {
        let mut g: Vec<Monomial> = self.g.iter().map(|m| m.permuted(perm)).collect();
        g.sort();
        let mut distinguished: Vec<Monomial> =
            self.distinguished.iter().map(|m| m.permuted(perm)).collect();
        distinguished.sort_by_key(|m| std::cmp::Reverse(*m));
        SeriesSupport {
            f_type: self.f_type,
            distinguished,
            g,
        }
    }

    /// Adds monomials without validation; used to test that dominated
    /// monomials never change `w(f)`.
    pub fn with_extra_g(&self, extra: &[Monomial]) -> SeriesSupport {
        let mut g = self.g.clone();
        g.extend_from_slice(extra);
        SeriesSupport {
            f_type: self.f_type,
            distinguished: self.distinguished.clone(),
            g,
        }
    }

    /// `w(g)`, the minimum weight over the support of `g`.
    pub fn weight_of_g(&self, w: &[Rational; 4]) -> Rational {
        min_weight(w, &self.g).expect("g is nonempty")
    }
}

impl fmt::Display for SeriesSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut g = self.g.clone();
        g.sort_by_key(|m| (m.degree(), std::cmp::Reverse(*m)));
        let terms: Vec<String> = self
            .distinguished
            .iter()
            .chain(g.iter())
            .map(|m| m.to_string())
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// `w(f)`.
pub fn weight_of_f(w: &[Rational; 4], s: &SeriesSupport) -> Rational {
    let d = min_weight(w, &s.distinguished).expect("distinguished monomials are nonempty");
    d.min(s.weight_of_g(w))
}

/// Domination-minimal semi-invariant monomials admissible in `g`, with
/// degree at most `max_degree`; sorted.
pub fn semiinvariant_monomials(
    ws: &WeightSystem,
    f_type: SeriesType,
    max_degree: u32,
) -> Result<Vec<Monomial>> {
    if max_degree < 2 {
        return domain(format!("max degree {max_degree} below 2"));
    }
    let vars = f_type.g_variables();
    let mut out = Vec::new();
    let mut exps = [0u32; 4];
    collect_monomials(vars, 0, max_degree, &mut exps, &mut |m| {
        if m.degree() >= f_type.g_min_degree() && m.residue(ws) == ws.e() {
            out.push(m);
        }
    });
    Ok(prune_dominated(&out))
}

fn collect_monomials(
    vars: &[usize],
    idx: usize,
    budget: u32,
    exps: &mut [u32; 4],
    sink: &mut impl FnMut(Monomial),
) {
    if idx == vars.len() {
        sink(Monomial(*exps));
        return;
    }
    for d in 0..=budget {
        exps[vars[idx]] = d;
        collect_monomials(vars, idx + 1, budget - d, exps, sink);
    }
    exps[vars[idx]] = 0;
}
