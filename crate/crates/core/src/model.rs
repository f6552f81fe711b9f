//! Triples from quotient modules, similarity transport, and reconstruction of
//! the quotient model from a frame.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{frame_bounds, IterateSystem, OperatorTriple, KERNEL_REL};
use crate::hardy::{DegreePair, TruncatedSpace};
use crate::linalg::{
    condition_number, identity, null_space, op_norm, pivoted_orthonormalize, restrict_to_support,
    singular_values, subspace_distance, CMatrix, LinearMap, C64,
};
use crate::submodule::{quotient, QuotientModel, SubmoduleKind, SubmoduleModel};

pub const WITNESS_TOL: f64 = 1e-8;
pub const TRANSPORT_CONDITION_CAP: f64 = 1e6;
pub const UNIQUENESS_TOL: f64 = 1e-8;

/// `(S_{K_z}, S_{K_w}, P_K 1)` in `K` coordinates.
pub fn triple_from_quotient(q: &QuotientModel) -> Result<OperatorTriple> {
    if q.is_trivial() {
        return Err(Error::TrivialQuotient);
    }
    OperatorTriple::new(q.jordan_z.clone(), q.jordan_w.clone(), q.seed.clone())
}

/// `(S_z, S_w, 1)` on the whole truncated space: the quotient of `M = {0}`.
pub fn riesz_triple(order: DegreePair) -> Result<OperatorTriple> {
    triple_from_quotient(&quotient(&SubmoduleModel::zero(TruncatedSpace::new(order))))
}

/// An invertible `L` with `L T₁ = V₁ L`, `L T₂ = V₂ L`, `L φ = f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimilarityWitness {
    #[serde(skip)]
    pub map: LinearMap,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `‖L T₁ − V₁ L‖`.
    pub residual_t1: f64,
    pub residual_t2: f64,
    /// `‖L φ − f‖`.
    pub residual_phi: f64,
    pub certified: bool,
}

impl SimilarityWitness {
    /// Measures how well `map` intertwines `from` with `to`.
    pub fn certify(map: &LinearMap, from: &OperatorTriple, to: &OperatorTriple) -> Result<Self> {
        let (n, m) = (from.dim(), to.dim());
        if map.nrows() != m || map.ncols() != n {
            return Err(Error::Dimension(format!(
                "witness is {}x{}, triples have dimensions {n} and {m}",
                map.nrows(),
                map.ncols()
            )));
        }
        let s = singular_values(map);
        let sigma_max = s.first().copied().unwrap_or(0.0);
        let sigma_min = if n == m { s.last().copied().unwrap_or(0.0) } else { 0.0 };
        let residual_t1 = op_norm(&(map * &from.t1 - &to.t1 * map));
        let residual_t2 = op_norm(&(map * &from.t2 - &to.t2 * map));
        let residual_phi = (map * &from.phi - &to.phi).norm();
        let certified = sigma_min > 0.0
            && residual_t1 <= WITNESS_TOL
            && residual_t2 <= WITNESS_TOL
            && residual_phi <= WITNESS_TOL;
        Ok(SimilarityWitness {
            map: map.clone(),
            sigma_min,
            sigma_max,
            residual_t1,
            residual_t2,
            residual_phi,
            certified,
        })
    }

    pub fn condition(&self) -> f64 {
        if self.sigma_min > 0.0 {
            self.sigma_max / self.sigma_min
        } else {
            f64::INFINITY
        }
    }
}

/// `(L T₁ L⁻¹, L T₂ L⁻¹, L φ)` with its witness.
pub fn transport(triple: &OperatorTriple, l: &LinearMap) -> Result<(OperatorTriple, SimilarityWitness)> {
    let n = triple.dim();
    if l.nrows() != n || l.ncols() != n {
        return Err(Error::Dimension(format!("L is {}x{}, triple has dimension {n}", l.nrows(), l.ncols())));
    }
    let cond = condition_number(l);
    if !cond.is_finite() || cond > TRANSPORT_CONDITION_CAP {
        return Err(Error::Guard(format!(
            "similarity is numerically singular: condition {cond:.3e} > {TRANSPORT_CONDITION_CAP:.0e}"
        )));
    }
    let inv =
        l.clone().try_inverse().ok_or_else(|| Error::Guard("similarity is numerically singular".into()))?;
    let moved = OperatorTriple::new(l * &triple.t1 * &inv, l * &triple.t2 * &inv, l * &triple.phi)?;
    let witness = SimilarityWitness::certify(l, triple, &moved)?;
    Ok((moved, witness))
}

/// `I + εG/‖G‖` with complex Gaussian `G` and `ε < (κ−1)/(κ+1)`, so the
/// condition number stays below the cap `κ`.
pub fn random_similarity<R: Rng + ?Sized>(rng: &mut R, dim: usize, condition_cap: f64) -> Result<LinearMap> {
    if condition_cap <= 1.0 {
        return Err(Error::Config(format!("condition cap must exceed 1, got {condition_cap}")));
    }
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let gn = op_norm(&g);
    let reach = (condition_cap - 1.0) / (condition_cap + 1.0);
    let eps = reach * rng.random_range(0.5..1.0);
    if gn == 0.0 {
        return Ok(identity(dim));
    }
    Ok(identity(dim) + g * C64::new(eps / gn, 0.0))
}

/// `L = U_target U_source* S_source⁻¹`: the map sending each source iterate to
/// the matching target iterate, via the canonical dual frame.
pub fn similarity_from_dual_frame(source: &IterateSystem, target: &IterateSystem) -> Result<LinearMap> {
    check_pairable(source, target)?;
    let s = source.frame_operator();
    let s_inv =
        s.try_inverse().ok_or_else(|| Error::Precondition("source frame operator is singular".into()))?;
    Ok(&target.synthesis * source.synthesis.adjoint() * s_inv)
}

/// Same map through a pivoted choice of `dim` linearly independent source
/// iterates: `L = U_target[:, J] · U_source[:, J]⁻¹`.
pub fn similarity_from_pivots(source: &IterateSystem, target: &IterateSystem) -> Result<LinearMap> {
    check_pairable(source, target)?;
    let n = source.triple.dim();
    let piv = pivoted_orthonormalize(&source.synthesis, KERNEL_REL).pivots;
    if piv.len() < n {
        return Err(Error::Precondition("source iterates do not span the space".into()));
    }
    let cols: Vec<usize> = piv[..n].to_vec();
    let a = source.synthesis.select_columns(cols.iter());
    let b = target.synthesis.select_columns(cols.iter());
    let a_inv = a.try_inverse().ok_or_else(|| Error::Precondition("pivot block is singular".into()))?;
    Ok(b * a_inv)
}

fn check_pairable(source: &IterateSystem, target: &IterateSystem) -> Result<()> {
    if source.horizon != target.horizon {
        return Err(Error::Precondition("systems use different horizons".into()));
    }
    for (name, sys) in [("source", source), ("target", target)] {
        if !frame_bounds(sys).is_frame() {
            return Err(Error::Precondition(format!("{name} system is not a frame")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `‖L₁ − L₂‖` for two certified witnesses between frame systems.
pub fn uniqueness_of_l(
    source: &IterateSystem,
    target: &IterateSystem,
    l1: &LinearMap,
    l2: &LinearMap,
) -> Result<UniquenessReport> {
    check_pairable(source, target)?;
    for (name, l) in [("L1", l1), ("L2", l2)] {
        let w = SimilarityWitness::certify(l, &source.triple, &target.triple)?;
        if !w.certified {
            return Err(Error::Precondition(format!(
                "{name} is not a certified witness (residuals {:.2e}, {:.2e}, {:.2e})",
                w.residual_t1, w.residual_t2, w.residual_phi
            )));
        }
    }
    let distance = op_norm(&(l1 - l2));
    Ok(UniquenessReport { distance, tolerance: UNIQUENESS_TOL, passed: distance <= UNIQUENESS_TOL })
}

/// The quotient model read off a frame: `V = U` on the horizon box,
/// `K = Ker(V)^⊥`, `W = V|_K`.
#[derive(Clone, Debug)]
pub struct ModelRecovery {
    pub kernel_onb: CMatrix,
    pub quotient: QuotientModel,
    /// `W` in `onb_k` coordinates (`dim H × dim K`).
    pub w: LinearMap,
    pub w_condition: f64,
    /// `‖(W S_{K_z} − T₁ W) X‖` over interior-supported `K` vectors `X`.
    pub intertwine_residual_z: f64,
    pub intertwine_residual_w: f64,
    /// `‖W P_K 1 − φ‖`.
    pub seed_residual: f64,
}

impl ModelRecovery {
    pub fn k_dim(&self) -> usize {
        self.quotient.dim()
    }

    /// `W P_K` as a map on horizon coordinates; independent of the basis
    /// chosen for `K`.
    pub fn synthesis_on_k(&self) -> LinearMap {
        &self.w * self.quotient.onb_k.adjoint()
    }

    pub fn summary(&self) -> RecoverySummary {
        RecoverySummary {
            k_dim: self.k_dim(),
            kernel_dim: self.kernel_onb.ncols(),
            w_condition: self.w_condition,
            intertwine_residual_z: self.intertwine_residual_z,
            intertwine_residual_w: self.intertwine_residual_w,
            seed_residual: self.seed_residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub k_dim: usize,
    pub kernel_dim: usize,
    pub w_condition: f64,
    pub intertwine_residual_z: f64,
    pub intertwine_residual_w: f64,
    pub seed_residual: f64,
}

pub fn recover_model(sys: &IterateSystem) -> Result<ModelRecovery> {
    let n = sys.triple.dim();
    if !frame_bounds(sys).is_frame() {
        return Err(Error::Precondition("system is not a frame".into()));
    }
    let box_cols = sys.synthesis.ncols();
    if box_cols < n {
        return Err(Error::Precondition(format!("horizon box has {box_cols} columns, need at least {n}")));
    }
    let space = sys.coefficient_space();
    let kernel_onb = null_space(&sys.synthesis, KERNEL_REL);
    let kernel = SubmoduleModel::from_onb(space, SubmoduleKind::Kernel, kernel_onb.clone())?;
    let q = quotient(&kernel);
    let w = &sys.synthesis * &q.onb_k;
    if w.nrows() != w.ncols() {
        return Err(Error::RecoveryFailed(format!("K has dimension {}, H has {n}", w.ncols())));
    }
    let w_condition = condition_number(&w);
    if !w_condition.is_finite() || w_condition > 1e12 {
        return Err(Error::RecoveryFailed(format!("W is rank deficient (condition {w_condition:.3e})")));
    }
    let h = sys.horizon;
    let residual = |inside: Vec<bool>, jordan: &CMatrix, t: &CMatrix| {
        let part = restrict_to_support(&q.onb_k, &inside);
        let x = q.onb_k.adjoint() * part;
        op_norm(&((&w * jordan - t * &w) * x))
    };
    let intertwine_residual_z = residual(space.mask(|d| d.d1 < h.d1), &q.jordan_z, &sys.triple.t1);
    let intertwine_residual_w = residual(space.mask(|d| d.d2 < h.d2), &q.jordan_w, &sys.triple.t2);
    let seed_residual = (&w * &q.seed - &sys.triple.phi).norm();
    Ok(ModelRecovery {
        kernel_onb,
        quotient: q,
        w,
        w_condition,
        intertwine_residual_z,
        intertwine_residual_w,
        seed_residual,
    })
}

/// Round-trip comparison of a recovered quotient against a reference one on
/// the same box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    /// Sine of the largest principal angle between the two `K`.
    pub subspace_distance: f64,
    /// Distance between singular-value multisets of the Jordan blocks.
    pub jordan_sv_distance: f64,
    /// `‖X* J X − J'‖` with `X` the unitary basis change between the two `K`.
    pub jordan_basis_change_residual: f64,
}

pub fn compare_quotients(reference: &QuotientModel, recovered: &QuotientModel) -> RoundTrip {
    let subspace_distance = subspace_distance(&reference.onb_k, &recovered.onb_k);
    let sv_dist = |a: &CMatrix, b: &CMatrix| {
        let (sa, sb) = (singular_values(a), singular_values(b));
        if sa.len() != sb.len() {
            return f64::INFINITY;
        }
        sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let jordan_sv_distance = sv_dist(&reference.jordan_z, &recovered.jordan_z)
        .max(sv_dist(&reference.jordan_w, &recovered.jordan_w));
    let jordan_basis_change_residual = if reference.dim() == recovered.dim() {
        let x = reference.onb_k.adjoint() * &recovered.onb_k;
        let rz = op_norm(&(x.adjoint() * &reference.jordan_z * &x - &recovered.jordan_z));
        let rw = op_norm(&(x.adjoint() * &reference.jordan_w * &x - &recovered.jordan_w));
        rz.max(rw)
    } else {
        f64::INFINITY
    };
    RoundTrip { subspace_distance, jordan_sv_distance, jordan_basis_change_residual }
}
