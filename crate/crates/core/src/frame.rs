//! Iterate systems `{T₁^i T₂^j φ}` over a finite horizon box, their synthesis
//! and frame operators, frame bounds and the synthesis kernel.

use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::hardy::{Axis, DegreePair, TruncatedSpace};
use crate::linalg::{
    hermitian_eigenvalues, identity, null_space, op_norm, rank, restrict_to_support, CMatrix, CVector,
    LinearMap,
};
use crate::submodule::{compressed_commutator, DoublyCommuteReport};

pub const COMMUTE_TOL: f64 = 1e-10;
/// `λ_min ≤ NOT_FRAME_REL · λ_max` classifies as not a frame.
pub const NOT_FRAME_REL: f64 = 1e-8;
/// `‖S_L − I‖ ≤ PARSEVAL_TOL` classifies as Parseval.
pub const PARSEVAL_TOL: f64 = 1e-8;
/// Singular values of `U` at or below `KERNEL_REL · σ_max` span the kernel.
pub const KERNEL_REL: f64 = 1e-10;
pub const KERNEL_INVARIANCE_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_DIM: usize = 2000;
pub const MAX_COLUMNS: usize = 100_000;

/// Desk-scale guard on the operator dimension, overridable via `BDF_MAX_DIM`.
pub fn max_dim() -> usize {
    std::env::var("BDF_MAX_DIM").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_DIM)
}

/// Two commuting operators on a finite-dimensional space and a seed vector.
#[derive(Clone, Debug)]
pub struct OperatorTriple {
    pub t1: LinearMap,
    pub t2: LinearMap,
    pub phi: CVector,
    pub comm_residual: f64,
}

impl OperatorTriple {
    /// Rejects non-square or mismatched operands and pairs whose commutator
    /// exceeds `1e-10 · max(1, ‖T₁‖‖T₂‖)`.
    pub fn new(t1: LinearMap, t2: LinearMap, phi: CVector) -> Result<Self> {
        let n = phi.len();
        for (name, t) in [("T1", &t1), ("T2", &t2)] {
            if t.nrows() != n || t.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, seed has length {n}",
                    t.nrows(),
                    t.ncols()
                )));
            }
        }
        let comm_residual = op_norm(&(&t1 * &t2 - &t2 * &t1));
        let tolerance = COMMUTE_TOL * (op_norm(&t1) * op_norm(&t2)).max(1.0);
        if comm_residual > tolerance {
            return Err(Error::NonCommuting { residual: comm_residual, tolerance });
        }
        Ok(OperatorTriple { t1, t2, phi, comm_residual })
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn with_seed(&self, phi: CVector) -> Result<Self> {
        OperatorTriple::new(self.t1.clone(), self.t2.clone(), phi)
    }
}

#[derive(Clone, Debug)]
pub struct IterateSystem {
    pub triple: OperatorTriple,
    pub horizon: DegreePair,
    /// Columns are `T₁^i T₂^j φ` in horizon-box order (row-major, `i` outer).
    pub synthesis: LinearMap,
}

impl IterateSystem {
    /// The horizon box as a coefficient space for `ℓ²(box)`.
    pub fn coefficient_space(&self) -> TruncatedSpace {
        TruncatedSpace::new(self.horizon)
    }

    pub fn vector(&self, d: DegreePair) -> Option<CVector> {
        self.coefficient_space().index(d).map(|k| self.synthesis.column(k).into_owned())
    }

    /// Synthesis restricted to the sub-box `[0, h]`.
    pub fn partial_synthesis(&self, h: DegreePair) -> LinearMap {
        let space = self.coefficient_space();
        let h = h.meet(&self.horizon);
        let cols: Vec<usize> = h.box_iter().filter_map(|d| space.index(d)).collect();
        self.synthesis.select_columns(cols.iter())
    }

    pub fn frame_operator(&self) -> LinearMap {
        &self.synthesis * self.synthesis.adjoint()
    }

    /// Orthonormal basis of `Ker(U)` in horizon coordinates.
    pub fn kernel_basis(&self) -> CMatrix {
        null_space(&self.synthesis, KERNEL_REL)
    }
}

/// Fills the horizon box by `v_{i+1,0} = T₁ v_{i,0}`, `v_{i,j+1} = T₂ v_{i,j}`.
pub fn iterate(triple: &OperatorTriple, horizon: DegreePair) -> Result<IterateSystem> {
    let dim = triple.dim();
    let limit = max_dim();
    if dim >= limit {
        return Err(Error::Guard(format!("dimension {dim} is at or above the desk-scale limit {limit}")));
    }
    let cols = horizon.box_size();
    if cols >= MAX_COLUMNS {
        return Err(Error::Guard(format!("horizon box has {cols} columns (limit {MAX_COLUMNS})")));
    }
    let mut synthesis = CMatrix::zeros(dim, cols);
    let mut k = 0;
    let mut row_start = triple.phi.clone();
    for i in 0..=horizon.d1 {
        if i > 0 {
            row_start = &triple.t1 * row_start;
        }
        let mut v = row_start.clone();
        for j in 0..=horizon.d2 {
            if j > 0 {
                v = &triple.t2 * v;
            }
            synthesis.set_column(k, &v);
            k += 1;
        }
    }
    Ok(IterateSystem { triple: triple.clone(), horizon, synthesis })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotFrame,
    Frame,
    Parseval,
    MinimalFrame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub lower: f64,
    pub upper: f64,
    pub classification: Classification,
    pub kernel_dim: usize,
    /// `(h, λ_min, λ_max)` of the partial frame operator over `[0, (h, h)]`.
    pub bound_trace: Vec<(usize, f64, f64)>,
    /// `‖S_L − I‖`.
    pub parseval_defect: f64,
    /// Set for Parseval systems regardless of the headline class (an
    /// orthonormal basis is both Parseval and minimal; it reports as minimal).
    pub parseval: bool,
    pub not_frame_rel: f64,
    pub parseval_tol: f64,
    pub kernel_rel: f64,
}

impl FrameReport {
    pub fn is_frame(&self) -> bool {
        self.classification != Classification::NotFrame
    }
}

fn extreme_eigenvalues(s: &CMatrix) -> (f64, f64) {
    let ev = hermitian_eigenvalues(s);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (lo.max(0.0), hi.max(0.0)),
        _ => (0.0, 0.0),
    }
}

pub fn frame_bounds(sys: &IterateSystem) -> FrameReport {
    let dim = sys.triple.dim();
    let s = sys.frame_operator();
    let (lower, upper) = extreme_eigenvalues(&s);
    let parseval_defect = op_norm(&(&s - identity(dim)));
    let kernel_dim = sys.synthesis.ncols() - rank(&sys.synthesis, KERNEL_REL);

    let hmax = sys.horizon.d1.max(sys.horizon.d2);
    let hs: Vec<usize> = (0..=hmax).collect();
    let bound_trace = batch::map(&hs, |&h| {
        let u = sys.partial_synthesis(DegreePair::new(h, h));
        let (lo, hi) = extreme_eigenvalues(&(&u * u.adjoint()));
        (h, lo, hi)
    });

    let parseval = upper > 0.0 && parseval_defect <= PARSEVAL_TOL;
    let classification = if upper == 0.0 || lower <= NOT_FRAME_REL * upper {
        Classification::NotFrame
    } else if kernel_dim == 0 {
        Classification::MinimalFrame
    } else if parseval {
        Classification::Parseval
    } else {
        Classification::Frame
    };
    FrameReport {
        lower,
        upper,
        classification,
        kernel_dim,
        bound_trace,
        parseval_defect,
        parseval,
        not_frame_rel: NOT_FRAME_REL,
        parseval_tol: PARSEVAL_TOL,
        kernel_rel: KERNEL_REL,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelInvarianceReport {
    /// `max(residual_r1, residual_r2)`.
    pub residual: f64,
    pub residual_r1: f64,
    pub residual_r2: f64,
    pub kernel_dim: usize,
    /// Dimension of the kernel part supported in `[0, horizon − (1, 1)]`.
    pub interior_dim: usize,
    /// No kernel: nothing to test.
    pub vacuous: bool,
    pub passed: bool,
}

/// Right shifts of the horizon box (degree-safe: the far rim shifts out).
pub fn right_shift(horizon: DegreePair, axis: Axis) -> LinearMap {
    TruncatedSpace::new(horizon).shift_matrix(axis)
}

/// `max_k ‖U R c_k‖` over an orthonormal basis of the kernel vectors that
/// stay inside the box under both right shifts.
pub fn kernel_shift_invariance(sys: &IterateSystem) -> Result<KernelInvarianceReport> {
    let kernel = sys.kernel_basis();
    let kernel_dim = kernel.ncols();
    if kernel_dim == 0 {
        return Ok(KernelInvarianceReport {
            residual: 0.0,
            residual_r1: 0.0,
            residual_r2: 0.0,
            kernel_dim,
            interior_dim: 0,
            vacuous: true,
            passed: true,
        });
    }
    let h = sys.horizon;
    let space = sys.coefficient_space();
    let allowed = space.mask(|d| d.d1 < h.d1 && d.d2 < h.d2);
    let inner = restrict_to_support(&kernel, &allowed);
    if inner.ncols() == 0 {
        return Err(Error::Inconclusive(format!(
            "kernel of dimension {kernel_dim} has no part supported inside {h}"
        )));
    }
    let worst_col = |m: CMatrix| (0..m.ncols()).map(|k| m.column(k).norm()).fold(0.0, f64::max);
    let residual_r1 = worst_col(&sys.synthesis * right_shift(h, Axis::Z) * &inner);
    let residual_r2 = worst_col(&sys.synthesis * right_shift(h, Axis::W) * &inner);
    let residual = residual_r1.max(residual_r2);
    Ok(KernelInvarianceReport {
        residual,
        residual_r1,
        residual_r2,
        kernel_dim,
        interior_dim: inner.ncols(),
        vacuous: false,
        passed: residual <= KERNEL_INVARIANCE_TOL,
    })
}

/// Do the right shifts doubly commute on `Ker(U)`? Uses the same interior
/// convention as the submodule test. An empty kernel is vacuously true.
pub fn kernel_doubly_commutes(sys: &IterateSystem) -> Result<DoublyCommuteReport> {
    let kernel = sys.kernel_basis();
    let space = sys.coefficient_space();
    let report = compressed_commutator(&space, &kernel);
    if kernel.ncols() > 0 && report.vacuous {
        return Err(Error::Inconclusive(format!(
            "kernel of dimension {} has no interior part",
            kernel.ncols()
        )));
    }
    Ok(report)
}
