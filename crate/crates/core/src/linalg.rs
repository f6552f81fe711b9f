//! Dense complex linear algebra shared by the model, frame and recovery code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Matrix of a linear operator in the fixed monomial (or horizon) enumeration.
pub type LinearMap = CMatrix;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Singular values, largest first.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.norm()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `sigma_max / sigma_min` of a square matrix; infinite when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Result of a column-pivoted Gram–Schmidt pass.
#[derive(Debug, Clone)]
pub struct Orthonormalized {
    /// Orthonormal columns spanning the accepted directions.
    pub q: CMatrix,
    /// Input column index chosen at each step.
    pub pivots: Vec<usize>,
    /// Number of input columns whose residual fell below tolerance.
    pub dropped: usize,
}

/// Rank-revealing orthonormalization of the columns of `cols` by modified
/// Gram–Schmidt with column pivoting and one reorthogonalization pass.
/// Columns whose residual norm drops to `rel_tol` times the largest input
/// column norm are discarded.
pub fn pivoted_orthonormalize(cols: &CMatrix, rel_tol: f64) -> Orthonormalized {
    let scale = (0..cols.ncols()).map(|k| cols.column(k).norm()).fold(0.0, f64::max);
    let base = CMatrix::zeros(cols.nrows(), 0);
    extend_orthonormal(&base, cols, rel_tol * scale, cols.ncols())
}

/// Extends the orthonormal family `base` by pivoted Gram–Schmidt over the
/// columns of `candidates`, taking at most `limit` new directions whose
/// residual norm exceeds the absolute threshold `abs_tol`. Returns only the
/// new columns.
pub fn extend_orthonormal(
    base: &CMatrix,
    candidates: &CMatrix,
    abs_tol: f64,
    limit: usize,
) -> Orthonormalized {
    let n = candidates.nrows();
    let mut work = candidates.clone();
    for _ in 0..2 {
        if base.ncols() > 0 {
            let proj = base * (base.adjoint() * &work);
            work -= proj;
        }
    }
    let mut chosen: Vec<CVector> = Vec::new();
    let mut pivots = Vec::new();
    let mut used = vec![false; work.ncols()];
    while chosen.len() < limit {
        let mut best: Option<(usize, f64)> = None;
        for (k, &taken) in used.iter().enumerate() {
            if taken {
                continue;
            }
            let nrm = work.column(k).norm();
            if best.is_none_or(|(_, b)| nrm > b) {
                best = Some((k, nrm));
            }
        }
        let Some((k, nrm)) = best else { break };
        if nrm <= abs_tol || nrm == 0.0 {
            break;
        }
        used[k] = true;
        let mut q: CVector = work.column(k) / C64::new(nrm, 0.0);
        // reorthogonalize against everything accepted so far
        if base.ncols() > 0 {
            q -= base * (base.adjoint() * &q);
        }
        for prev in &chosen {
            let d = prev.dotc(&q);
            q -= prev * d;
        }
        let qn = q.norm();
        q /= C64::new(qn, 0.0);
        for (j, &taken) in used.iter().enumerate() {
            if taken {
                continue;
            }
            let d = q.dotc(&work.column(j));
            let upd = &q * d;
            let mut col = work.column_mut(j);
            col -= upd;
        }
        chosen.push(q);
        pivots.push(k);
    }
    let mut q = CMatrix::zeros(n, chosen.len());
    for (j, col) in chosen.iter().enumerate() {
        q.set_column(j, col);
    }
    let dropped = candidates.ncols() - pivots.len();
    Orthonormalized { q, pivots, dropped }
}

/// Orthonormal basis of the orthogonal complement of the orthonormal family
/// `q`, drawn greedily from the standard basis (largest residual first, ties
/// to the lowest index). When `q` is spanned by standard basis vectors the
/// complement basis is exactly the remaining standard basis vectors.
pub fn complement_basis(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    let want = n.saturating_sub(q.ncols());
    extend_orthonormal(q, &identity(n), 1e-8, want).q
}

/// Orthonormal basis of `{x : a x = 0}`; singular values at or below
/// `rel_tol * sigma_max` count as zero.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = a.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return identity(n);
    }
    // pad to at least n rows so the SVD returns a full right factor
    let padded = if a.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thresh = rel_tol * smax;
    let idx: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&k| smax == 0.0 || svd.singular_values[k] <= thresh).collect();
    let mut basis = CMatrix::zeros(n, idx.len());
    for (j, &k) in idx.iter().enumerate() {
        let row = v_t.row(k);
        for r in 0..n {
            basis[(r, j)] = row[r].conj();
        }
    }
    basis
}

/// Numerical rank with relative threshold.
pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Orthonormal basis of the vectors in `span(basis)` that vanish on every
/// coordinate where `allowed` is false. `basis` must be orthonormal.
pub fn restrict_to_support(basis: &CMatrix, allowed: &[bool]) -> CMatrix {
    assert_eq!(basis.nrows(), allowed.len());
    let outside: Vec<usize> = (0..allowed.len()).filter(|&r| !allowed[r]).collect();
    if basis.ncols() == 0 {
        return basis.clone();
    }
    let mut rows = CMatrix::zeros(outside.len(), basis.ncols());
    for (i, &r) in outside.iter().enumerate() {
        rows.set_row(i, &basis.row(r));
    }
    // `basis` is orthonormal, so an absolute threshold is meaningful here
    let n = basis.ncols();
    let null = if rows.nrows() == 0 {
        identity(n)
    } else {
        let s = singular_values(&rows);
        let smax = s.first().copied().unwrap_or(0.0);
        if smax <= 1e-9 {
            identity(n)
        } else {
            null_space(&rows, 1e-9 / smax)
        }
    };
    basis * null
}

/// Sine of the largest principal angle between the column spans of two
/// orthonormal families. Returns 1 when the dimensions differ.
pub fn subspace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let ra = b - a * (a.adjoint() * b);
    let rb = a - b * (b.adjoint() * a);
    op_norm(&ra).max(op_norm(&rb)).min(1.0)
}

pub fn matrix_power_apply(m: &CMatrix, times: usize, v: &CVector) -> CVector {
    let mut out = v.clone();
    for _ in 0..times {
        out = m * out;
    }
    out
}
