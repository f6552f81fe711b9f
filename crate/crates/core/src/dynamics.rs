//! Orbit norms under the adjoint and forward actions, and changes of frame
//! vector by invertible operators commuting with the pair.

use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::frame::KERNEL_REL;
use crate::frame::{frame_bounds, iterate, Classification, FrameReport, IterateSystem, OperatorTriple};
use crate::hardy::{BidiscPoly, DegreePair, TruncatedSpace};
use crate::linalg::{
    condition_number, identity, null_space, op_norm, subspace_distance, CVector, LinearMap, C64,
};
use crate::submodule::DoublyCommuteReport;

pub const DECAY_REL: f64 = 1e-6;
pub const CHAIN_SLACK: f64 = 1e-8;
pub const EQUIV_COMMUTE_TOL: f64 = 1e-9;
pub const EQUIV_KERNEL_TOL: f64 = 1e-10;
pub const EQUIV_CONDITION_CAP: f64 = 1e12;
pub const CONJECTURE_LABEL: &str = "open conjecture: evidence only";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `T₁ⁱT₂ʲ f`.
    Forward,
    /// `(T₁*)ⁱ(T₂*)ʲ f`.
    Adjoint,
}

/// Norms over the box `[0, horizon]`, stored row-major in `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub horizon: DegreePair,
    pub direction: Direction,
    pub norms: Vec<f64>,
    /// Max over the outer rim `i = h₁` or `j = h₂`.
    pub tail_max: f64,
    /// Max over the square corner `i, j ≥ min(h₁, h₂)`; the sense in which
    /// both indices grow together.
    pub diagonal_tail: f64,
    /// `‖f‖`.
    pub reference_norm: f64,
    /// `tail_max ≤ DECAY_REL·‖f‖`; absent for forward probes.
    pub decayed: Option<bool>,
    pub label: Option<String>,
    /// Whether the doubly-commuting hypothesis was verified, for probes.
    pub hypothesis_verified: Option<bool>,
}

impl OrbitTrace {
    fn from_norms(horizon: DegreePair, direction: Direction, norms: Vec<f64>, reference_norm: f64) -> Self {
        let space = TruncatedSpace::new(horizon);
        let m = horizon.d1.min(horizon.d2);
        let mut tail_max: f64 = 0.0;
        let mut diagonal_tail: f64 = 0.0;
        for (k, d) in space.monomials().enumerate() {
            if d.d1 == horizon.d1 || d.d2 == horizon.d2 {
                tail_max = tail_max.max(norms[k]);
            }
            if d.d1 >= m && d.d2 >= m {
                diagonal_tail = diagonal_tail.max(norms[k]);
            }
        }
        OrbitTrace {
            horizon,
            direction,
            norms,
            tail_max,
            diagonal_tail,
            reference_norm,
            decayed: None,
            label: None,
            hypothesis_verified: None,
        }
    }

    pub fn norm(&self, d: DegreePair) -> Option<f64> {
        let space = TruncatedSpace::new(self.horizon);
        space.index(d).map(|k| self.norms[k])
    }

    /// Max norm over entries with `i ≥ from.d1` or `j ≥ from.d2`.
    pub fn max_beyond(&self, from: DegreePair) -> f64 {
        TruncatedSpace::new(self.horizon)
            .monomials()
            .zip(&self.norms)
            .filter(|(d, _)| d.d1 >= from.d1 || d.d2 >= from.d2)
            .map(|(_, &n)| n)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,norm\n");
        for (d, n) in TruncatedSpace::new(self.horizon).monomials().zip(&self.norms) {
            let _ = writeln!(out, "{},{},{:e}", d.d1, d.d2, n);
        }
        out
    }
}

fn check_vector(triple: &OperatorTriple, f: &CVector) -> Result<()> {
    if f.len() != triple.dim() {
        return Err(Error::Dimension(format!(
            "vector has length {}, triple has dimension {}",
            f.len(),
            triple.dim()
        )));
    }
    Ok(())
}

/// `A₁ⁱA₂ʲ f` norms: the first column by recurrence, then each row
/// independently.
fn orbit_norms(a1: &LinearMap, a2: &LinearMap, f: &CVector, horizon: DegreePair) -> Vec<f64> {
    let mut heads = Vec::with_capacity(horizon.d1 + 1);
    let mut v = f.clone();
    for i in 0..=horizon.d1 {
        if i > 0 {
            v = a1 * &v;
        }
        heads.push(v.clone());
    }
    let rows = batch::map(&heads, |head| {
        let mut v = head.clone();
        let mut row = Vec::with_capacity(horizon.d2 + 1);
        for j in 0..=horizon.d2 {
            if j > 0 {
                v = a2 * &v;
            }
            row.push(v.norm());
        }
        row
    });
    rows.into_iter().flatten().collect()
}

/// `‖(T₁*)ⁱ(T₂*)ʲ f‖` over the horizon box. Requires a frame system report.
pub fn adjoint_decay(
    triple: &OperatorTriple,
    report: &FrameReport,
    f: &CVector,
    horizon: DegreePair,
) -> Result<OrbitTrace> {
    if !report.is_frame() {
        return Err(Error::Precondition("adjoint decay needs a frame system".into()));
    }
    check_vector(triple, f)?;
    let norms = orbit_norms(&triple.t1.adjoint(), &triple.t2.adjoint(), f, horizon);
    let mut trace = OrbitTrace::from_norms(horizon, Direction::Adjoint, norms, f.norm());
    trace.decayed = Some(trace.tail_max <= DECAY_REL * trace.reference_norm);
    Ok(trace)
}

/// Nilpotency index bound used as the default decay horizon: `order + (1, 1)`.
pub fn default_decay_horizon(order: DegreePair) -> DegreePair {
    order.add(&DegreePair::new(1, 1))
}

/// `‖T₁ⁱT₂ʲ f‖` over the horizon box, recorded without a verdict.
pub fn conjecture_probe(
    triple: &OperatorTriple,
    f: &CVector,
    horizon: DegreePair,
    hypothesis: Option<&DoublyCommuteReport>,
) -> Result<OrbitTrace> {
    check_vector(triple, f)?;
    let verified = hypothesis.map(|h| h.verdict && !h.vacuous);
    if verified != Some(true) {
        warn!("doubly-commuting hypothesis on the kernel is not verified; recording anyway");
    }
    let norms = orbit_norms(&triple.t1, &triple.t2, f, horizon);
    let mut trace = OrbitTrace::from_norms(horizon, Direction::Forward, norms, f.norm());
    trace.label = Some(CONJECTURE_LABEL.to_string());
    trace.hypothesis_verified = Some(verified == Some(true));
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    /// `Σ |⟨T₁ⁱT₂ʲφ, f⟩|²` over the horizon box.
    pub sum: f64,
    /// `B‖f‖²`.
    pub bound: f64,
    pub excess: f64,
    pub passed: bool,
}

pub fn summability(sys: &IterateSystem, report: &FrameReport, f: &CVector) -> Result<SummabilityReport> {
    check_vector(&sys.triple, f)?;
    let sum = (sys.synthesis.adjoint() * f).norm_squared();
    let bound = report.upper * f.norm_squared();
    let excess = (sum - bound).max(0.0);
    Ok(SummabilityReport { sum, bound, excess, passed: excess <= CHAIN_SLACK * bound.max(1.0) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerChainReport {
    /// `max_m (A‖(T₁^{m₁}T₂^{m₂})*f‖² − Σ_{i≥m₁, j≥m₂} |⟨T₁ⁱT₂ʲφ, f⟩|²)`.
    pub max_violation: f64,
    pub worst_at: DegreePair,
    pub slack: f64,
    pub passed: bool,
}

/// Checks `A‖(T^m)*f‖² ≤ Σ_{k ≥ m} |⟨T^k φ, f⟩|²` at every `m` in the horizon box.
pub fn lower_bound_chain(sys: &IterateSystem, report: &FrameReport, f: &CVector) -> Result<LowerChainReport> {
    let adj = adjoint_decay(&sys.triple, report, f, sys.horizon)?;
    let h = sys.horizon;
    let space = sys.coefficient_space();
    let coeffs = sys.synthesis.adjoint() * f;
    // suffix[i][j] = Σ_{i' ≥ i, j' ≥ j}, padded by one row and column of zeros
    let (r, c) = (h.d1 + 2, h.d2 + 2);
    let mut suffix = vec![0.0; r * c];
    for i in (0..=h.d1).rev() {
        for j in (0..=h.d2).rev() {
            let here = coeffs[i * (h.d2 + 1) + j].norm_sqr();
            suffix[i * c + j] =
                here + suffix[(i + 1) * c + j] + suffix[i * c + j + 1] - suffix[(i + 1) * c + j + 1];
        }
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_at = DegreePair::ZERO;
    for (k, d) in space.monomials().enumerate() {
        let v = report.lower * adj.norms[k].powi(2) - suffix[d.d1 * c + d.d2];
        if v > max_violation {
            max_violation = v;
            worst_at = d;
        }
    }
    let slack = CHAIN_SLACK * f.norm_squared().max(1.0);
    Ok(LowerChainReport { max_violation, worst_at, slack, passed: max_violation <= slack })
}

/// `Σ c_{ij} T₁ⁱT₂ʲ`.
pub fn polynomial_calculus(triple: &OperatorTriple, p: &BidiscPoly) -> LinearMap {
    let n = triple.dim();
    let mut out = LinearMap::zeros(n, n);
    let mut p1 = identity(n);
    let deg = p.maxdeg();
    for i in 0..=deg.d1 {
        let mut p12 = p1.clone();
        for j in 0..=deg.d2 {
            let c = p.coeff(DegreePair::new(i, j));
            if c != C64::new(0.0, 0.0) {
                out += &p12 * c;
            }
            p12 = &p12 * &triple.t2;
        }
        p1 = &p1 * &triple.t1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub original: FrameReport,
    pub report: FrameReport,
    pub commute_residual_t1: f64,
    pub commute_residual_t2: f64,
    pub v_condition: f64,
    /// Sine of the largest principal angle between the two kernels.
    pub kernel_distance: f64,
    pub classification_preserved: bool,
    pub passed: bool,
}

/// Reruns `sys` with seed `Vφ` for an invertible `V` commuting with `T₁, T₂`.
pub fn equivalent_frame_vector(
    sys: &IterateSystem,
    v: &LinearMap,
) -> Result<(IterateSystem, EquivalenceReport)> {
    let t = &sys.triple;
    let n = t.dim();
    if v.nrows() != n || v.ncols() != n {
        return Err(Error::Dimension(format!("V is {}x{}, triple has dimension {n}", v.nrows(), v.ncols())));
    }
    let commute_residual_t1 = op_norm(&(v * &t.t1 - &t.t1 * v));
    let commute_residual_t2 = op_norm(&(v * &t.t2 - &t.t2 * v));
    for (name, r) in [("T1", commute_residual_t1), ("T2", commute_residual_t2)] {
        if r > EQUIV_COMMUTE_TOL {
            return Err(Error::Precondition(format!(
                "V does not commute with {name}: residual {r:.3e} > {EQUIV_COMMUTE_TOL:.0e}"
            )));
        }
    }
    let v_condition = condition_number(v);
    if !v_condition.is_finite() || v_condition > EQUIV_CONDITION_CAP {
        return Err(Error::Precondition(format!(
            "V is not invertible: condition {v_condition:.3e} > {EQUIV_CONDITION_CAP:.0e}"
        )));
    }
    let moved = iterate(&t.with_seed(v * &t.phi)?, sys.horizon)?;
    let original = frame_bounds(sys);
    let report = frame_bounds(&moved);
    let kernel_distance =
        subspace_distance(&null_space(&sys.synthesis, KERNEL_REL), &null_space(&moved.synthesis, KERNEL_REL));
    let classification_preserved = same_class(&original, &report);
    let passed = classification_preserved && kernel_distance <= EQUIV_KERNEL_TOL;
    let out = EquivalenceReport {
        original,
        report,
        commute_residual_t1,
        commute_residual_t2,
        v_condition,
        kernel_distance,
        classification_preserved,
        passed,
    };
    Ok((moved, out))
}

/// Frame, minimality and non-frame status agree. Parseval is not invariant
/// under a change of frame vector, so frame and Parseval count as equal.
fn same_class(a: &FrameReport, b: &FrameReport) -> bool {
    let bucket = |c: Classification| match c {
        Classification::Parseval => Classification::Frame,
        other => other,
    };
    bucket(a.classification) == bucket(b.classification)
}
