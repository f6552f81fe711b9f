//! Truncated Hardy space on the bidisc.
//!
//! Vectors are finite coefficient grids `Σ c_ij z^i w^j`; the monomials form an
//! orthonormal basis, so inner products are plain coefficient sums and the
//! coefficient map is the unitary identification with `ℓ²(ℕ₀×ℕ₀)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, LinearMap, C64, ONE, ZERO};

/// A bidegree `(d1, d2)`: degree in `z` and degree in `w`.
///
/// Ordered lexicographically with `d1` outer, which is also the basis
/// enumeration order of [`TruncatedSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct DegreePair {
    pub d1: usize,
    pub d2: usize,
}

impl From<[usize; 2]> for DegreePair {
    fn from(a: [usize; 2]) -> Self {
        DegreePair { d1: a[0], d2: a[1] }
    }
}

impl From<DegreePair> for [usize; 2] {
    fn from(d: DegreePair) -> Self {
        [d.d1, d.d2]
    }
}

impl fmt::Display for DegreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.d1, self.d2)
    }
}

impl DegreePair {
    pub const ZERO: DegreePair = DegreePair { d1: 0, d2: 0 };

    pub const fn new(d1: usize, d2: usize) -> Self {
        DegreePair { d1, d2 }
    }

    /// Componentwise `self ≤ other`.
    pub fn fits_in(&self, other: &DegreePair) -> bool {
        self.d1 <= other.d1 && self.d2 <= other.d2
    }

    pub fn add(&self, other: &DegreePair) -> DegreePair {
        DegreePair::new(self.d1 + other.d1, self.d2 + other.d2)
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(&self, other: &DegreePair) -> Option<DegreePair> {
        Some(DegreePair::new(self.d1.checked_sub(other.d1)?, self.d2.checked_sub(other.d2)?))
    }

    pub fn join(&self, other: &DegreePair) -> DegreePair {
        DegreePair::new(self.d1.max(other.d1), self.d2.max(other.d2))
    }

    pub fn meet(&self, other: &DegreePair) -> DegreePair {
        DegreePair::new(self.d1.min(other.d1), self.d2.min(other.d2))
    }

    /// Number of lattice points in the box `[0, d1] × [0, d2]`.
    pub fn box_size(&self) -> usize {
        (self.d1 + 1) * (self.d2 + 1)
    }

    /// Lattice points of the box, row-major with `d1` outer.
    pub fn box_iter(&self) -> impl Iterator<Item = DegreePair> + '_ {
        let d2 = self.d2;
        (0..=self.d1).flat_map(move |i| (0..=d2).map(move |j| DegreePair::new(i, j)))
    }
}

/// One of the two coordinate directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Z,
    W,
}

impl Axis {
    pub fn unit(self) -> DegreePair {
        match self {
            Axis::Z => DegreePair::new(1, 0),
            Axis::W => DegreePair::new(0, 1),
        }
    }
}

/// Polynomial `Σ c_ij z^i w^j` with sparse coefficients.
///
/// Zero coefficients are never stored. `maxdeg` bounds the support and is
/// carried through serialization; equality ignores it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct BidiscPoly {
    coeffs: BTreeMap<DegreePair, C64>,
    maxdeg: DegreePair,
}

impl PartialEq for BidiscPoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    maxdeg: DegreePair,
    coeffs: Vec<(usize, usize, f64, f64)>,
}

impl TryFrom<PolyRepr> for BidiscPoly {
    type Error = String;

    fn try_from(r: PolyRepr) -> std::result::Result<Self, String> {
        let mut p = BidiscPoly::with_maxdeg(r.maxdeg);
        for (i, j, re, im) in r.coeffs {
            let d = DegreePair::new(i, j);
            if !d.fits_in(&r.maxdeg) {
                return Err(format!("coefficient at {d} lies outside maxdeg {}", r.maxdeg));
            }
            let prev = p.coeff(d);
            p.set(d, prev + C64::new(re, im));
        }
        Ok(p)
    }
}

impl From<BidiscPoly> for PolyRepr {
    fn from(p: BidiscPoly) -> Self {
        PolyRepr {
            maxdeg: p.maxdeg,
            coeffs: p.coeffs.iter().map(|(d, c)| (d.d1, d.d2, c.re, c.im)).collect(),
        }
    }
}

impl BidiscPoly {
    pub fn zero() -> Self {
        Self::with_maxdeg(DegreePair::ZERO)
    }

    pub fn with_maxdeg(maxdeg: DegreePair) -> Self {
        BidiscPoly { coeffs: BTreeMap::new(), maxdeg }
    }

    pub fn one() -> Self {
        Self::monomial(0, 0)
    }

    pub fn monomial(i: usize, j: usize) -> Self {
        Self::from_terms([(DegreePair::new(i, j), ONE)])
    }

    /// Builds a polynomial from `(degree, coefficient)` pairs; repeated
    /// degrees are summed and `maxdeg` is the componentwise max of the keys.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (DegreePair, C64)>,
    {
        let mut p = Self::zero();
        for (d, c) in terms {
            p.maxdeg = p.maxdeg.join(&d);
            let prev = p.coeff(d);
            p.set(d, prev + c);
        }
        p
    }

    /// Sets a coefficient, widening `maxdeg` if needed.
    pub fn set(&mut self, d: DegreePair, c: C64) {
        self.maxdeg = self.maxdeg.join(&d);
        if c == ZERO {
            self.coeffs.remove(&d);
        } else {
            self.coeffs.insert(d, c);
        }
    }

    pub fn coeff(&self, d: DegreePair) -> C64 {
        self.coeffs.get(&d).copied().unwrap_or(ZERO)
    }

    pub fn maxdeg(&self) -> DegreePair {
        self.maxdeg
    }

    /// Smallest box containing the nonzero coefficients.
    pub fn degree(&self) -> DegreePair {
        self.coeffs.keys().fold(DegreePair::ZERO, |acc, d| acc.join(d))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (DegreePair, C64)> + '_ {
        self.coeffs.iter().map(|(d, c)| (*d, *c))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplication by `z` (or `w`): exact reindexing, no truncation.
    pub fn shift(&self, axis: Axis) -> BidiscPoly {
        let u = axis.unit();
        BidiscPoly {
            coeffs: self.coeffs.iter().map(|(d, c)| (d.add(&u), *c)).collect(),
            maxdeg: self.maxdeg.add(&u),
        }
    }

    pub fn shift_z(&self) -> BidiscPoly {
        self.shift(Axis::Z)
    }

    pub fn shift_w(&self) -> BidiscPoly {
        self.shift(Axis::W)
    }

    /// Exact product of two polynomials.
    pub fn mul(&self, other: &BidiscPoly) -> BidiscPoly {
        let mut out = BidiscPoly::with_maxdeg(self.maxdeg.add(&other.maxdeg));
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let d = a.add(b);
                let prev = out.coeff(d);
                out.set(d, prev + ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> BidiscPoly {
        let mut out = BidiscPoly::with_maxdeg(self.maxdeg);
        for (d, c) in &self.coeffs {
            out.set(*d, c * s);
        }
        out
    }

    pub fn add(&self, other: &BidiscPoly) -> BidiscPoly {
        let mut out = self.clone();
        out.maxdeg = out.maxdeg.join(&other.maxdeg);
        for (d, c) in &other.coeffs {
            let prev = out.coeff(*d);
            out.set(*d, prev + c);
        }
        out
    }

    /// Drops every coefficient outside the box `[0, order]`.
    pub fn truncate(&self, order: DegreePair) -> BidiscPoly {
        BidiscPoly {
            coeffs: self.coeffs.iter().filter(|(d, _)| d.fits_in(&order)).map(|(d, c)| (*d, *c)).collect(),
            maxdeg: self.maxdeg.meet(&order),
        }
    }

    /// Evaluates at a point of `ℂ²` (used on the torus for unimodularity checks).
    pub fn eval(&self, z: C64, w: C64) -> C64 {
        self.coeffs.iter().map(|(d, c)| c * z.powu(d.d1 as u32) * w.powu(d.d2 as u32)).sum()
    }
}

/// `⟨f, g⟩ = Σ c_ij · conj(d_ij)`.
pub fn inner_product(f: &BidiscPoly, g: &BidiscPoly) -> C64 {
    let (small, large, flip) = if f.coeffs.len() <= g.coeffs.len() { (f, g, false) } else { (g, f, true) };
    small
        .coeffs
        .iter()
        .filter_map(|(d, a)| large.coeffs.get(d).map(|b| if flip { b * a.conj() } else { a * b.conj() }))
        .sum()
}

/// Finitely supported element of `ℓ²(ℕ₀×ℕ₀)`.
pub type Sequence = BTreeMap<DegreePair, C64>;

/// The unitary `ℓ²(ℕ₀×ℕ₀) → H²`: `δ_(i,j) ↦ z^i w^j`.
pub fn seq_to_poly(seq: &Sequence) -> BidiscPoly {
    BidiscPoly::from_terms(seq.iter().map(|(d, c)| (*d, *c)))
}

/// Inverse of [`seq_to_poly`]. Zero coefficients are not listed.
pub fn poly_to_seq(p: &BidiscPoly) -> Sequence {
    p.coeffs.clone()
}

/// The finite section `{(i, j) : i ≤ N₁, j ≤ N₂}` with its monomial basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSpace {
    order: DegreePair,
}

impl TruncatedSpace {
    pub fn new(order: DegreePair) -> Self {
        TruncatedSpace { order }
    }

    pub fn order(&self) -> DegreePair {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order.box_size()
    }

    pub fn contains(&self, d: DegreePair) -> bool {
        d.fits_in(&self.order)
    }

    /// Basis position of `z^i w^j` (row-major, `i` outer).
    pub fn index(&self, d: DegreePair) -> Option<usize> {
        self.contains(d).then(|| d.d1 * (self.order.d2 + 1) + d.d2)
    }

    pub fn degree_at(&self, idx: usize) -> DegreePair {
        DegreePair::new(idx / (self.order.d2 + 1), idx % (self.order.d2 + 1))
    }

    pub fn monomials(&self) -> impl Iterator<Item = DegreePair> + '_ {
        self.order.box_iter()
    }

    /// Coordinate vector of `p`; fails if the support leaves the box.
    pub fn coords(&self, p: &BidiscPoly) -> Result<CVector> {
        if !p.degree().fits_in(&self.order) {
            return Err(Error::DegreeOutOfBox {
                degree: p.degree().to_string(),
                order: self.order.to_string(),
            });
        }
        Ok(self.truncated_coords(p))
    }

    /// Coordinates of `Trunc_N(p)`.
    pub fn truncated_coords(&self, p: &BidiscPoly) -> CVector {
        let mut v = CVector::zeros(self.dim());
        for (d, c) in p.terms() {
            if let Some(k) = self.index(d) {
                v[k] = c;
            }
        }
        v
    }

    pub fn basis_vector(&self, d: DegreePair) -> CVector {
        let mut v = CVector::zeros(self.dim());
        if let Some(k) = self.index(d) {
            v[k] = ONE;
        }
        v
    }

    pub fn poly(&self, v: &CVector) -> BidiscPoly {
        let mut p = BidiscPoly::with_maxdeg(self.order);
        for (k, c) in v.iter().enumerate() {
            p.set(self.degree_at(k), *c);
        }
        p
    }

    /// Mask of basis positions whose degree satisfies `pred`.
    pub fn mask(&self, pred: impl Fn(DegreePair) -> bool) -> Vec<bool> {
        self.monomials().map(pred).collect()
    }

    /// Matrix of `Trunc_N ∘ S_z` (or `S_w`): monomials on the far edge map to 0.
    pub fn shift_matrix(&self, axis: Axis) -> LinearMap {
        let n = self.dim();
        let u = axis.unit();
        let mut m = CMatrix::zeros(n, n);
        for d in self.monomials() {
            if let (Some(col), Some(row)) = (self.index(d), self.index(d.add(&u))) {
                m[(row, col)] = ONE;
            }
        }
        m
    }

    /// Backward shift `(i, j) → (i − 1, j)`, the adjoint of [`Self::shift_matrix`].
    pub fn adjoint_shift(&self, axis: Axis) -> LinearMap {
        self.shift_matrix(axis).adjoint()
    }

    /// Matrix of `f ↦ Trunc_N(φ·f)`.
    pub fn mult_operator(&self, phi: &BidiscPoly) -> LinearMap {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for d in self.monomials() {
            let col = self.index(d).expect("box monomial");
            for (e, c) in phi.terms() {
                if let Some(row) = self.index(d.add(&e)) {
                    m[(row, col)] += c;
                }
            }
        }
        m
    }
}
