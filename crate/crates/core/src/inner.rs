//! Inner functions on the bidisc: monomials, one-variable finite Blaschke
//! products and their products.
//!
//! Every catalog function factors as `z^a w^b · B₁(z) · B₂(w)` with `B₁`, `B₂`
//! finite Blaschke products. Each factor is normalized as
//! `b_α(ζ) = (ᾱ/|α|)(α − ζ)/(1 − ᾱζ)` so that `b_α(0) = |α| > 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{BidiscPoly, DegreePair};
use crate::linalg::{C64, ONE};

/// Description of an inner function from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSpec {
    Monomial { a: usize, b: usize },
    BlaschkeZ { zeros: Vec<[f64; 2]> },
    BlaschkeW { zeros: Vec<[f64; 2]> },
    Product { factors: Vec<InnerSpec> },
}

/// Canonical factored form `z^a w^b · Π b_α(z) · Π b_β(w)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Factored {
    pub a: usize,
    pub b: usize,
    pub z_zeros: Vec<C64>,
    pub w_zeros: Vec<C64>,
}

impl InnerSpec {
    pub fn monomial(a: usize, b: usize) -> Self {
        InnerSpec::Monomial { a, b }
    }

    pub fn constant() -> Self {
        InnerSpec::Monomial { a: 0, b: 0 }
    }

    pub fn blaschke_z(zeros: &[C64]) -> Self {
        InnerSpec::BlaschkeZ { zeros: zeros.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn blaschke_w(zeros: &[C64]) -> Self {
        InnerSpec::BlaschkeW { zeros: zeros.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn product(factors: Vec<InnerSpec>) -> Self {
        InnerSpec::Product { factors }
    }

    /// Rejects Blaschke zeros outside the open disc and zeros at the origin
    /// (those are monomial factors).
    pub fn validate(&self) -> Result<()> {
        match self {
            InnerSpec::Monomial { .. } => Ok(()),
            InnerSpec::BlaschkeZ { zeros } | InnerSpec::BlaschkeW { zeros } => {
                for &[re, im] in zeros {
                    let r = C64::new(re, im).norm();
                    if !r.is_finite() || r >= 1.0 {
                        return Err(Error::InvalidInner(format!(
                            "Blaschke zero {re}{im:+}i must lie in the open unit disc"
                        )));
                    }
                    if r == 0.0 {
                        return Err(Error::InvalidInner(
                            "Blaschke zero at the origin: use monomial factor instead".into(),
                        ));
                    }
                }
                Ok(())
            }
            InnerSpec::Product { factors } => factors.iter().try_for_each(InnerSpec::validate),
        }
    }

    /// Bidegree: exact for monomials, number of zeros for Blaschke factors
    /// (numerator degree), summed over products.
    pub fn degree(&self) -> DegreePair {
        match self {
            InnerSpec::Monomial { a, b } => DegreePair::new(*a, *b),
            InnerSpec::BlaschkeZ { zeros } => DegreePair::new(zeros.len(), 0),
            InnerSpec::BlaschkeW { zeros } => DegreePair::new(0, zeros.len()),
            InnerSpec::Product { factors } => {
                factors.iter().fold(DegreePair::ZERO, |acc, f| acc.add(&f.degree()))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == DegreePair::ZERO
    }

    pub fn flatten(&self) -> Factored {
        let mut out = Factored::default();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Factored) {
        let cz = |v: &Vec<[f64; 2]>| v.iter().map(|&[re, im]| C64::new(re, im)).collect::<Vec<_>>();
        match self {
            InnerSpec::Monomial { a, b } => {
                out.a += a;
                out.b += b;
            }
            InnerSpec::BlaschkeZ { zeros } => out.z_zeros.extend(cz(zeros)),
            InnerSpec::BlaschkeW { zeros } => out.w_zeros.extend(cz(zeros)),
            InnerSpec::Product { factors } => factors.iter().for_each(|f| f.flatten_into(out)),
        }
    }

    /// Polynomial `z^a w^b · Π(α − z) · Π(β − w)`.
    ///
    /// For a finite Blaschke product `B`, `B·g` is a polynomial exactly when
    /// `g` carries the factor `Π(1 − ᾱz)`, so the multiples of this polynomial
    /// are precisely the polynomials of `φH²`.
    pub fn generator_polynomial(&self) -> BidiscPoly {
        let f = self.flatten();
        let mut p = BidiscPoly::monomial(f.a, f.b);
        for &alpha in &f.z_zeros {
            p = p.mul(&BidiscPoly::from_terms([
                (DegreePair::new(0, 0), alpha),
                (DegreePair::new(1, 0), -ONE),
            ]));
        }
        for &beta in &f.w_zeros {
            p = p
                .mul(&BidiscPoly::from_terms([(DegreePair::new(0, 0), beta), (DegreePair::new(0, 1), -ONE)]));
        }
        p
    }

    /// Closed-form value at `(z, w)` from the rational factors.
    pub fn eval_exact(&self, z: C64, w: C64) -> C64 {
        let f = self.flatten();
        let mut v = z.powu(f.a as u32) * w.powu(f.b as u32);
        for &alpha in &f.z_zeros {
            v *= blaschke_factor(alpha, z);
        }
        for &beta in &f.w_zeros {
            v *= blaschke_factor(beta, w);
        }
        v
    }
}

pub fn blaschke_factor(alpha: C64, zeta: C64) -> C64 {
    let u = alpha.conj() / alpha.norm();
    u * (alpha - zeta) / (ONE - alpha.conj() * zeta)
}

/// Taylor coefficients `c_0..c_{len-1}` of `ζ^shift · Π b_α(ζ)`.
///
/// Each factor is applied as multiplication by `u(α − ζ)` followed by the
/// division recurrence `y_k = t_k + ᾱ y_{k−1}` for `1/(1 − ᾱζ)`.
pub fn one_variable_series(shift: usize, zeros: &[C64], len: usize) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); len];
    if shift < len {
        s[shift] = ONE;
    }
    for &alpha in zeros {
        let u = alpha.conj() / alpha.norm();
        let mut prev_s = C64::new(0.0, 0.0);
        let mut prev_y = C64::new(0.0, 0.0);
        for sk in s.iter_mut() {
            let t = u * (alpha * *sk - prev_s);
            prev_s = *sk;
            let y = t + alpha.conj() * prev_y;
            *sk = y;
            prev_y = y;
        }
    }
    s
}

/// `ℓ²` norm of the Taylor coefficients of index `> order`.
pub fn one_variable_tail(shift: usize, zeros: &[C64], order: usize) -> f64 {
    if zeros.is_empty() {
        return 0.0;
    }
    let r = zeros.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // coefficients decay like k^{m-1} r^k; run far enough that the rest is
    // below 1e-40 in squared norm
    let per_factor = (92.0 / -r.ln()).ceil() as usize + 8;
    let extra = (per_factor * zeros.len()).clamp(64, 400_000);
    let len = shift + order + 1 + extra;
    let s = one_variable_series(shift, zeros, len);
    s[order + 1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// An inner function together with its Taylor polynomial through `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerPoly {
    pub spec: InnerSpec,
    pub poly: BidiscPoly,
    /// `ℓ²` norm of the dropped coefficients.
    pub trunc_error: f64,
}

/// Taylor coefficients of the inner function through `order`.
pub fn build_inner(spec: &InnerSpec, order: DegreePair) -> Result<InnerPoly> {
    spec.validate()?;
    let f = spec.flatten();
    let mono = DegreePair::new(f.a, f.b);
    if !mono.fits_in(&order) {
        return Err(Error::DegreeOutOfBox { degree: mono.to_string(), order: order.to_string() });
    }
    let fz = one_variable_series(f.a, &f.z_zeros, order.d1 + 1);
    let gw = one_variable_series(f.b, &f.w_zeros, order.d2 + 1);
    let mut poly = BidiscPoly::with_maxdeg(order);
    for (i, ci) in fz.iter().enumerate() {
        for (j, cj) in gw.iter().enumerate() {
            poly.set(DegreePair::new(i, j), ci * cj);
        }
    }
    // the two variables separate and each factor has unit norm, so
    // ‖tail‖² = t_z² + t_w² − t_z² t_w²
    let tz = one_variable_tail(f.a, &f.z_zeros, order.d1);
    let tw = one_variable_tail(f.b, &f.w_zeros, order.d2);
    let trunc_error = (tz * tz + tw * tw - tz * tz * tw * tw).max(0.0).sqrt();
    Ok(InnerPoly { spec: spec.clone(), poly, trunc_error })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnimodularReport {
    pub grid: usize,
    pub max_dev: f64,
}

/// Largest `| |φ(z,w)| − 1 |` of the truncated polynomial over the
/// `grid × grid` equispaced points of the torus.
pub fn verify_unimodular(ip: &InnerPoly, grid: usize) -> Result<UnimodularReport> {
    if grid < 2 {
        return Err(Error::Precondition(format!("grid must be at least 2, got {grid}")));
    }
    let pts: Vec<C64> = (0..grid).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / grid as f64)).collect();
    let mut max_dev: f64 = 0.0;
    for z in &pts {
        for w in &pts {
            max_dev = max_dev.max((ip.poly.eval(*z, *w).norm() - 1.0).abs());
        }
    }
    Ok(UnimodularReport { grid, max_dev })
}
