//! Residue data `1/r(a1,a2,a3,a4; e)`, the lattice `N` of compatible
//! nonnegative weights, fractional-part vectors and complements.

mod rational;

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

pub use rational::Rational;

use crate::error::{domain, Error, Result};

/// `n mod r` in `[0, r)`.
pub fn modr(n: i64, r: i64) -> i64 {
    n.mod_floor(&r)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

/// The residue data of a cyclic action of order `r`: weights `a` on the
/// four coordinates and weight `e` on the equation. Residues are stored
/// reduced into `[0, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightSystem {
    r: i64,
    a: [i64; 4],
    e: i64,
}

impl WeightSystem {
    /// Reduces the residues and checks the three coprimality conditions.
    pub fn new(r: i64, a: [i64; 4], e: i64) -> Result<Self> {
        let ws = Self::residues(r, a, e)?;
        ws.validate()?;
        Ok(ws)
    }

    /// Reduces the residues without checking the coprimality conditions.
    pub fn residues(r: i64, a: [i64; 4], e: i64) -> Result<Self> {
        if r < 1 {
            return Err(Error::InvalidWeightSystem(format!("order r = {r} must be positive")));
        }
        Ok(WeightSystem {
            r,
            a: a.map(|x| modr(x, r)),
            e: modr(e, r),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let (r, a, e) = (self.r, self.a, self.e);
        let ge = gcd(e, r);
        for (i, &ai) in a.iter().enumerate() {
            if ge % gcd(ai, r) != 0 {
                return Err(Error::InvalidWeightSystem(format!(
                    "gcd(a{}, r) = {} does not divide gcd(e, r) = {}",
                    i + 1,
                    gcd(ai, r),
                    ge
                )));
            }
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if gcd3(a[i], a[j], r) != 1 {
                    return Err(Error::InvalidWeightSystem(format!(
                        "gcd(a{}, a{}, r) = {} is not 1",
                        i + 1,
                        j + 1,
                        gcd3(a[i], a[j], r)
                    )));
                }
            }
        }
        if modr(a.iter().sum::<i64>() - e, r) != modr(1, r) {
            return Err(Error::InvalidWeightSystem(format!(
                "a1+a2+a3+a4-e = {} is not 1 mod {}",
                a.iter().sum::<i64>() - e,
                r
            )));
        }
        Ok(())
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn a(&self) -> [i64; 4] {
        self.a
    }

    pub fn e(&self) -> i64 {
        self.e
    }

    /// True when the data is `1/r(a, -a, 1, 0; 0)` for some unit `a`, the
    /// shape excluded for cA-type equations. The order of the last two
    /// coordinates matters: `1/r(a, -a, 0, 1; 0)` is admissible.
    pub fn is_excluded_ca_shape(&self) -> bool {
        let r = self.r;
        let [a1, a2, a3, a4] = self.a;
        gcd(a1, r) == 1 && modr(a1 + a2, r) == 0 && a3 == modr(1, r) && a4 == 0 && self.e == 0
    }

    /// The system with coordinates reordered: slot `i` of the result carries
    /// the weight of coordinate `perm[i]` of `self`.
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        WeightSystem {
            r: self.r,
            a: perm.map(|p| self.a[p]),
            e: self.e,
        }
    }

    /// `α_j = ({j a_i / r})_i`, for `1 <= j <= r-1`.
    pub fn alpha(&self, j: i64) -> Result<Weight> {
        if j < 1 || j > self.r - 1 {
            return domain(format!("class index {j} outside [1, {}]", self.r - 1));
        }
        Ok(self.alpha_unchecked(j))
    }

    /// Fractional-part vector of any class, including `j = 0`.
    pub(crate) fn alpha_unchecked(&self, j: i64) -> Weight {
        let r = self.r;
        let j = modr(j, r);
        Weight {
            class_index: j,
            coords: self.a.map(|ai| Rational::fract_of(j * ai, r)),
            modulus: r,
        }
    }

    /// Numerators `(j a_i mod r)` of `α_j`.
    pub fn alpha_numerators(&self, j: i64) -> [i64; 4] {
        self.a.map(|ai| modr(j * ai, self.r))
    }

    /// Class of a rational 4-vector, if it lies in the lattice.
    pub fn class_of(&self, coords: &[Rational; 4]) -> Option<i64> {
        let r = self.r;
        if coords.iter().any(|c| r % c.denom() != 0) {
            return None;
        }
        let nums = coords.map(|c| modr(c.numer() * (r / c.denom()), r));
        let mut found = None;
        for j in 0..r {
            if self.alpha_numerators(j) == nums {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }

    /// Builds a weight after checking that the vector is nonnegative and
    /// congruent to a unique class. The zero vector is allowed here; use
    /// [`Weight::is_in_n`] to test membership in `N`.
    pub fn weight(&self, coords: [Rational; 4]) -> Result<Weight> {
        if coords.iter().any(|c| c.is_negative()) {
            return domain(format!("negative coordinate in {}", fmt_coords(&coords)));
        }
        match self.class_of(&coords) {
            Some(j) => Ok(Weight {
                class_index: j,
                coords,
                modulus: self.r,
            }),
            None => domain(format!(
                "{} is not congruent to a unique class of 1/{}{:?}",
                fmt_coords(&coords),
                self.r,
                self.a
            )),
        }
    }

    /// Weights in `[0,1]^4` congruent to some `α_j` with `j` in `[1, r-1]`,
    /// minus the vertices `{0,1}^4`. Zero coordinates get both lifts.
    pub fn enumerate_n0(&self) -> Vec<Weight> {
        let mut out = Vec::new();
        for j in 1..self.r {
            let base = self.alpha_unchecked(j);
            let zeros: Vec<usize> = (0..4).filter(|&i| base.coords[i].is_zero()).collect();
            for mask in 0u32..(1 << zeros.len()) {
                let mut w = base;
                for (bit, &i) in zeros.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        w.coords[i] = Rational::ONE;
                    }
                }
                if !w.coords.iter().all(|c| c.is_integer()) {
                    out.push(w);
                }
            }
        }
        out.sort();
        out
    }

    /// No `γ ∈ N` and `t >= 2` with `tγ = w`.
    pub fn is_primitive(&self, w: &Weight) -> bool {
        let r = self.r;
        let scaled = w.coords.map(|c| c.numer() * (r / c.denom()));
        let content = scaled.iter().fold(0, |g, &x| gcd(g, x));
        if content == 0 {
            return false;
        }
        (2..=content).filter(|t| content % t == 0).all(|t| {
            let divided = scaled.map(|x| Rational::new(x / t, r));
            self.class_of(&divided).is_none()
        })
    }

    /// `Ψ1 = {β, 2β, ..., (k-1)β}` and their complements. A multiple with a
    /// coordinate above 1 has no complement and gets `None` in `psi2`.
    pub fn psi_sets(&self, beta: &Weight, k: i64) -> PsiSets {
        let psi1: Vec<Weight> = (1..k.max(1)).map(|t| beta.scale(t)).collect();
        let psi2 = psi1.iter().map(|w| w.complement().ok()).collect();
        PsiSets { k: k.max(1), psi1, psi2 }
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4] = self.a;
        write!(f, "1/{}({},{},{},{};{})", self.r, a1, a2, a3, a4, self.e)
    }
}

/// A nonnegative rational 4-vector congruent to `(j/r)(a1,a2,a3,a4)` mod `Z^4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    #[serde(rename = "class")]
    class_index: i64,
    coords: [Rational; 4],
    #[serde(rename = "r")]
    modulus: i64,
}

impl Weight {
    pub fn coords(&self) -> [Rational; 4] {
        self.coords
    }

    pub fn class_index(&self) -> i64 {
        self.class_index
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn norm1(&self) -> Rational {
        self.coords.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// Nonzero, hence a member of `N`.
    pub fn is_in_n(&self) -> bool {
        !self.is_zero()
    }

    pub fn in_unit_cube(&self) -> bool {
        self.coords.iter().all(|c| *c <= Rational::ONE)
    }

    /// The numerators `r·w_i`.
    pub fn scaled_numerators(&self) -> [i64; 4] {
        self.coords.map(|c| c.numer() * (self.modulus / c.denom()))
    }

    /// `(1,1,1,1) - w`, defined for weights in `[0,1]^4`.
    pub fn complement(&self) -> Result<Weight> {
        if !self.in_unit_cube() {
            return domain(format!("complement of {self:?}: coordinate exceeds 1"));
        }
        Ok(Weight {
            class_index: modr(-self.class_index, self.modulus),
            coords: self.coords.map(|c| Rational::ONE - c),
            modulus: self.modulus,
        })
    }

    pub fn scale(&self, t: i64) -> Weight {
        debug_assert!(t >= 0);
        Weight {
            class_index: modr(t * self.class_index, self.modulus),
            coords: self.coords.map(|c| c * t),
            modulus: self.modulus,
        }
    }

    /// `w + c` for an integer vector with `w + c >= 0`.
    pub fn shift(&self, c: [i64; 4]) -> Weight {
        let mut coords = self.coords;
        for i in 0..4 {
            coords[i] += Rational::from_int(c[i]);
            debug_assert!(!coords[i].is_negative());
        }
        Weight { coords, ..*self }
    }

    /// Coordinates reordered as in [`WeightSystem::permuted`].
    pub fn permuted(&self, perm: [usize; 4]) -> Weight {
        Weight {
            coords: perm.map(|p| self.coords[p]),
            ..*self
        }
    }

    /// True when the vectors agree modulo `Z^4`.
    pub fn congruent(&self, other: &Weight) -> bool {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .all(|(x, y)| (*x - *y).is_integer())
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_coords(&self.coords))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_coords(&self.coords))
    }
}

pub(crate) fn fmt_coords(c: &[Rational; 4]) -> String {
    format!("({},{},{},{})", c[0], c[1], c[2], c[3])
}

/// The multiples of `β` below `k` and their complements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiSets {
    pub k: i64,
    pub psi1: Vec<Weight>,
    pub psi2: Vec<Option<Weight>>,
}

impl PsiSets {
    /// Membership in `Ψ1 ∪ Ψ2`.
    pub fn contains(&self, w: &Weight) -> bool {
        self.psi1.iter().any(|p| p.coords == w.coords)
            || self.psi2.iter().flatten().any(|p| p.coords == w.coords)
    }

    /// Some element of `Ψ1 ∪ Ψ2` agrees with `w` modulo `Z^4`.
    pub fn contains_mod_z(&self, w: &Weight) -> bool {
        self.psi1.iter().any(|p| p.congruent(w)) || self.psi2.iter().flatten().any(|p| p.congruent(w))
    }
}
