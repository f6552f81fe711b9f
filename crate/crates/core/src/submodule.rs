//! Shift-invariant subspaces of the truncated space, their quotient modules
//! and the compressed shift pair (two-variable Jordan block).
//!
//! Submodules are built by *degree-safe* closure: a product `z^i w^j g` is
//! included only when it fits in the box, never truncated. The result is an
//! exact subspace of polynomials; identities that involve the shift near the
//! far edge of the box are only checked on interior degrees.

use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::hardy::{Axis, BidiscPoly, DegreePair, TruncatedSpace};
use crate::inner::{InnerPoly, InnerSpec};
use crate::linalg::{
    complement_basis, identity, op_norm, pivoted_orthonormalize, restrict_to_support, CMatrix, CVector,
    LinearMap,
};

pub const RANK_TOL: f64 = 1e-10;
pub const DOUBLY_COMMUTE_TOL: f64 = 1e-8;
pub const APPROXIMATE_INNER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SubmoduleKind {
    /// `φH²` through the degree-safe multiples of `generator`.
    Beurling {
        spec: InnerSpec,
        generator: BidiscPoly,
        trunc_error: f64,
    },
    Generated {
        generators: Vec<BidiscPoly>,
    },
    /// Kernel of a synthesis operator, read as coefficients in the horizon box.
    Kernel,
    Zero,
    Full,
}

impl SubmoduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            SubmoduleKind::Beurling { .. } => "beurling",
            SubmoduleKind::Generated { .. } => "generated",
            SubmoduleKind::Kernel => "kernel",
            SubmoduleKind::Zero => "zero",
            SubmoduleKind::Full => "full",
        }
    }

    /// Largest generator bidegree; the width of the edge where degree-safe
    /// closure under-approximates the true submodule.
    pub fn generator_degree(&self) -> DegreePair {
        match self {
            SubmoduleKind::Beurling { generator, .. } => generator.degree(),
            SubmoduleKind::Generated { generators } => {
                generators.iter().fold(DegreePair::ZERO, |acc, g| acc.join(&g.degree()))
            }
            _ => DegreePair::ZERO,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubmoduleModel {
    pub space: TruncatedSpace,
    pub kind: SubmoduleKind,
    /// Orthonormal columns spanning `M` inside the box.
    pub onb: CMatrix,
    /// Spanning vectors discarded as numerically dependent.
    pub dropped: usize,
    /// Set when the generator is a truncated Taylor polynomial with a
    /// non-negligible tail.
    pub approximate: bool,
}

impl SubmoduleModel {
    pub fn rank(&self) -> usize {
        self.onb.ncols()
    }

    pub fn codimension(&self) -> usize {
        self.space.dim() - self.rank()
    }

    /// Orthogonal projector onto `M`.
    pub fn projector(&self) -> LinearMap {
        &self.onb * self.onb.adjoint()
    }

    pub fn zero(space: TruncatedSpace) -> Self {
        SubmoduleModel {
            space,
            kind: SubmoduleKind::Zero,
            onb: CMatrix::zeros(space.dim(), 0),
            dropped: 0,
            approximate: false,
        }
    }

    pub fn full(space: TruncatedSpace) -> Self {
        SubmoduleModel {
            space,
            kind: SubmoduleKind::Full,
            onb: identity(space.dim()),
            dropped: 0,
            approximate: false,
        }
    }

    /// Wraps an orthonormal basis computed elsewhere (e.g. a synthesis kernel).
    pub fn from_onb(space: TruncatedSpace, kind: SubmoduleKind, onb: CMatrix) -> Result<Self> {
        if onb.nrows() != space.dim() {
            return Err(Error::Dimension(format!(
                "basis has {} rows, space has dimension {}",
                onb.nrows(),
                space.dim()
            )));
        }
        Ok(SubmoduleModel { space, kind, onb, dropped: 0, approximate: false })
    }

    /// Largest `‖(I − P_M) S q‖` over unit `q ∈ M` that stay inside the box
    /// under the shift (degree-safe invariance).
    pub fn shift_invariance_residual(&self, axis: Axis) -> f64 {
        let order = self.space.order();
        let allowed = self.space.mask(|d| match axis {
            Axis::Z => d.d1 < order.d1,
            Axis::W => d.d2 < order.d2,
        });
        let inner = restrict_to_support(&self.onb, &allowed);
        if inner.ncols() == 0 {
            return 0.0;
        }
        let shifted = self.space.shift_matrix(axis) * inner;
        let resid = &shifted - &self.onb * (self.onb.adjoint() * &shifted);
        op_norm(&resid)
    }
}

/// Multiples `z^i w^j g` of each generator that fit in the box.
fn degree_safe_multiples(gens: &[BidiscPoly], space: &TruncatedSpace) -> Result<CMatrix> {
    let order = space.order();
    let mut cols: Vec<CVector> = Vec::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let room = order.checked_sub(&g.degree()).ok_or_else(|| Error::DegreeOutOfBox {
            degree: g.degree().to_string(),
            order: order.to_string(),
        })?;
        let base = space.coords(g)?;
        // shifting the coordinate vector is exact while the support stays in the box
        let sz = space.shift_matrix(Axis::Z);
        let sw = space.shift_matrix(Axis::W);
        let mut row = base;
        for i in 0..=room.d1 {
            if i > 0 {
                row = &sz * row;
            }
            let mut v = row.clone();
            for j in 0..=room.d2 {
                if j > 0 {
                    v = &sw * v;
                }
                cols.push(v.clone());
            }
        }
    }
    let mut m = CMatrix::zeros(space.dim(), cols.len());
    for (k, c) in cols.iter().enumerate() {
        m.set_column(k, c);
    }
    Ok(m)
}

/// `M_N = span{φ z^i w^j : (i, j) ≤ N − deg φ}` for the Taylor polynomial
/// carried by `phi`.
pub fn beurling_submodule(phi: &InnerPoly, space: TruncatedSpace) -> Result<SubmoduleModel> {
    if phi.poly.is_zero() {
        return Err(Error::InvalidInner("inner polynomial is zero".into()));
    }
    let approximate = phi.trunc_error > APPROXIMATE_INNER_TOL;
    if approximate {
        log::warn!(
            "submodule is approximate: truncation error {:.3e} exceeds {:.0e}",
            phi.trunc_error,
            APPROXIMATE_INNER_TOL
        );
    }
    let kind = SubmoduleKind::Beurling {
        spec: phi.spec.clone(),
        generator: phi.poly.clone(),
        trunc_error: phi.trunc_error,
    };
    let mut sub = span_submodule(std::slice::from_ref(&phi.poly), space, kind)?;
    sub.approximate = approximate;
    Ok(sub)
}

/// Exact polynomial part of `φH²`: degree-safe multiples of
/// [`InnerSpec::generator_polynomial`]. Coincides with
/// [`beurling_submodule`] for monomial `φ`.
pub fn beurling_from_spec(spec: &InnerSpec, space: TruncatedSpace) -> Result<SubmoduleModel> {
    spec.validate()?;
    let generator = spec.generator_polynomial();
    let kind = SubmoduleKind::Beurling { spec: spec.clone(), generator: generator.clone(), trunc_error: 0.0 };
    span_submodule(&[generator], space, kind)
}

/// Degree-safe closure of a generator set under both shifts.
pub fn generated_submodule(gens: &[BidiscPoly], space: TruncatedSpace) -> Result<SubmoduleModel> {
    if gens.iter().all(BidiscPoly::is_zero) {
        return Ok(SubmoduleModel::zero(space));
    }
    span_submodule(gens, space, SubmoduleKind::Generated { generators: gens.to_vec() })
}

fn span_submodule(gens: &[BidiscPoly], space: TruncatedSpace, kind: SubmoduleKind) -> Result<SubmoduleModel> {
    let cols = degree_safe_multiples(gens, &space)?;
    let o = pivoted_orthonormalize(&cols, RANK_TOL);
    Ok(SubmoduleModel { space, kind, onb: o.q, dropped: o.dropped, approximate: false })
}

/// `K = box ⊖ M` with the compressions of the truncated shifts.
#[derive(Clone, Debug)]
pub struct QuotientModel {
    pub parent: SubmoduleModel,
    /// `P_K = I − Q_M Q_M*`.
    pub projector: LinearMap,
    pub onb_k: CMatrix,
    /// `P_K S_z|_K` in `onb_k` coordinates.
    pub jordan_z: LinearMap,
    pub jordan_w: LinearMap,
    /// `P_K 1` in `onb_k` coordinates.
    pub seed: CVector,
}

impl QuotientModel {
    pub fn dim(&self) -> usize {
        self.onb_k.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn space(&self) -> TruncatedSpace {
        self.parent.space
    }

    pub fn commutator_residual(&self) -> f64 {
        op_norm(&(&self.jordan_z * &self.jordan_w - &self.jordan_w * &self.jordan_z))
    }

    /// Largest `‖J_z^m J_w^n P_K 1 − P_K z^m w^n‖` over `(m, n) ≤ upto`,
    /// both sides in `onb_k` coordinates.
    pub fn jordan_identity_residual(&self, upto: DegreePair) -> f64 {
        let space = self.space();
        let mut worst: f64 = 0.0;
        let mut row = self.seed.clone();
        for m in 0..=upto.d1 {
            if m > 0 {
                row = &self.jordan_z * row;
            }
            let mut v = row.clone();
            for n in 0..=upto.d2 {
                if n > 0 {
                    v = &self.jordan_w * v;
                }
                let target = match space.index(DegreePair::new(m, n)) {
                    Some(k) => self.onb_k.row(k).adjoint(),
                    None => CVector::zeros(self.dim()),
                };
                worst = worst.max((&v - target).norm());
            }
        }
        worst
    }

    /// Interior range `(N₁ − p − 1, N₂ − q − 1)` on which the Jordan-block
    /// identity is asserted, `(p, q)` being the generator bidegree.
    pub fn interior_range(&self) -> Option<DegreePair> {
        let order = self.space().order();
        let p = self.parent.kind.generator_degree().add(&DegreePair::new(1, 1));
        order.checked_sub(&p)
    }
}

pub fn quotient(sub: &SubmoduleModel) -> QuotientModel {
    let space = sub.space;
    let n = space.dim();
    let projector = identity(n) - sub.projector();
    let onb_k = complement_basis(&sub.onb);
    if onb_k.ncols() == 0 {
        log::warn!("trivial quotient: submodule fills the {} box", space.order());
    }
    let jordan_z = onb_k.adjoint() * space.shift_matrix(Axis::Z) * &onb_k;
    let jordan_w = onb_k.adjoint() * space.shift_matrix(Axis::W) * &onb_k;
    let seed = onb_k.adjoint() * space.basis_vector(DegreePair::ZERO);
    QuotientModel { parent: sub.clone(), projector, onb_k, jordan_z, jordan_w, seed }
}

/// Quotient dimension of the exact polynomial model of `φH²` at each order.
pub fn codimension_profile(spec: &InnerSpec, orders: &[DegreePair]) -> Result<Vec<usize>> {
    spec.validate()?;
    if orders.windows(2).any(|w| !w[0].fits_in(&w[1]) || w[0] == w[1]) {
        return Err(Error::Precondition("orders must be increasing".into()));
    }
    batch::try_map(orders, |&o| beurling_from_spec(spec, TruncatedSpace::new(o)).map(|s| s.codimension()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublyCommuteReport {
    pub residual_interior: f64,
    pub verdict: bool,
    pub tolerance: f64,
    /// Interior box used: `i ≤ z_max`, `w_min ≤ j ≤ w_max`.
    pub interior_z_max: usize,
    pub interior_w_min: usize,
    pub interior_w_max: usize,
    /// Dimension of the interior-supported part of the subspace.
    pub interior_dim: usize,
    /// True when there was nothing to test.
    pub vacuous: bool,
}

/// Norm of `V₁V₂* − V₂*V₁` for `V₁ = S_z|_M`, `V₂* = P_M S_w*|_M`, evaluated
/// on the part of `M` supported in `i ≤ N₁ − 1, 1 ≤ j ≤ N₂`.
pub fn compressed_commutator(space: &TruncatedSpace, onb: &CMatrix) -> DoublyCommuteReport {
    let order = space.order();
    let z_max = order.d1.saturating_sub(1);
    let allowed = space.mask(|d| order.d1 >= 1 && d.d1 <= z_max && d.d2 >= 1);
    let inner = restrict_to_support(onb, &allowed);
    let interior_dim = inner.ncols();
    let residual = if interior_dim == 0 {
        0.0
    } else {
        let pm = onb * onb.adjoint();
        let sz = space.shift_matrix(Axis::Z);
        let swa = space.adjoint_shift(Axis::W);
        let a = &pm * &sz * &pm * &swa * &inner;
        let b = &pm * &swa * &pm * &sz * &inner;
        op_norm(&(a - b))
    };
    DoublyCommuteReport {
        residual_interior: residual,
        verdict: residual <= DOUBLY_COMMUTE_TOL,
        tolerance: DOUBLY_COMMUTE_TOL,
        interior_z_max: z_max,
        interior_w_min: 1,
        interior_w_max: order.d2,
        interior_dim,
        vacuous: interior_dim == 0,
    }
}

/// Mandrekar test: do `S_z` and `S_w` doubly commute on `M`?
pub fn doubly_commute_test(sub: &SubmoduleModel) -> Result<DoublyCommuteReport> {
    if sub.rank() == 0 {
        return Err(Error::Precondition("doubly-commute test needs a nonzero submodule".into()));
    }
    Ok(compressed_commutator(&sub.space, &sub.onb))
}
