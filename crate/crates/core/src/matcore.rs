//! Dense complex matrices, the fixed block matrices used to define the real
//! forms, Hermitian spectral tools, Pfaffians and real congruence.
//!
//! All operations are pure functions of their inputs. Residual checks use a
//! [`Tolerance`] scaled by Frobenius norms.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square complex matrix, the carrier for every group element and form.
pub type ComplexMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Residual policy: a residual `r` measured against a scale `s` passes when
/// `r <= rel * s + abs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-9,
            abs: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0) || !rel.is_finite() || !(abs >= 0.0) || !abs.is_finite() {
            return Err(Error::Parameter(format!(
                "tolerance requires rel > 0 and abs >= 0, got rel={rel}, abs={abs}"
            )));
        }
        Ok(Tolerance { rel, abs })
    }

    /// Same absolute floor, different relative bound.
    pub fn with_rel(rel: f64) -> Result<Self> {
        Tolerance::new(rel, Tolerance::default().abs)
    }

    pub fn bound(&self, scale: f64) -> f64 {
        self.rel * scale + self.abs
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.bound(scale)
    }

    /// Both bounds multiplied by `factor`.
    pub fn loosened(&self, factor: f64) -> Tolerance {
        Tolerance {
            rel: self.rel * factor,
            abs: self.abs * factor,
        }
    }
}

/// Inertia of a nondegenerate Hermitian or real symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Self {
        Signature { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn swapped(&self) -> Self {
        Signature {
            p: self.q,
            q: self.p,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

// -------------------------------------------------------------------------
// Special matrices
// -------------------------------------------------------------------------

/// The fixed block matrices that define the classical groups and their real forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    Identity,
    /// `[[0, I], [-I, 0]]`, even size.
    J,
    /// `diag(I_p, -I_q)`.
    Ipq,
    /// `diag(I_{p,q}, I_{p,q})`, size `2(p+q)`.
    Kpq,
    /// `diag(I_p, i I_q)`.
    Dpq,
}

/// Builds a special matrix of size `dim`. `pq` is required for the signed kinds.
pub fn special_matrix(
    kind: SpecialKind,
    dim: usize,
    pq: Option<(usize, usize)>,
) -> Result<ComplexMatrix> {
    let need_pq = || {
        pq.ok_or_else(|| Error::Parameter(format!("{kind:?} requires (p,q) parameters")))
    };
    match kind {
        SpecialKind::Identity => Ok(identity(dim)),
        SpecialKind::J => {
            if dim % 2 != 0 {
                return Err(Error::Parameter(format!("J requires even size, got {dim}")));
            }
            Ok(j_matrix(dim / 2))
        }
        SpecialKind::Ipq | SpecialKind::Dpq => {
            let (p, q) = need_pq()?;
            if p + q != dim {
                return Err(Error::Parameter(format!(
                    "{kind:?} with (p,q)=({p},{q}) does not have size {dim}"
                )));
            }
            Ok(if kind == SpecialKind::Ipq {
                ipq(p, q)
            } else {
                dpq(p, q)
            })
        }
        SpecialKind::Kpq => {
            let (p, q) = need_pq()?;
            if 2 * (p + q) != dim {
                return Err(Error::Parameter(format!(
                    "K with (p,q)=({p},{q}) has size {}, not {dim}",
                    2 * (p + q)
                )));
            }
            Ok(kpq(p, q))
        }
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `J_{2n}`; the argument is the half size.
pub fn j_matrix(half: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(2 * half, 2 * half);
    for k in 0..half {
        j[(k, half + k)] = ONE;
        j[(half + k, k)] = -ONE;
    }
    j
}

pub fn ipq(p: usize, q: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(p + q, p + q, |r, c| match (r == c, r < p) {
        (true, true) => ONE,
        (true, false) => -ONE,
        _ => ZERO,
    })
}

pub fn kpq(p: usize, q: usize) -> ComplexMatrix {
    block_diag(&[ipq(p, q), ipq(p, q)])
}

pub fn dpq(p: usize, q: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(p + q, p + q, |r, c| match (r == c, r < p) {
        (true, true) => ONE,
        (true, false) => I,
        _ => ZERO,
    })
}

/// `[[0, I_m], [I_m, 0]]`.
pub fn swap_blocks(m: usize) -> ComplexMatrix {
    let mut k = ComplexMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        k[(i, m + i)] = ONE;
        k[(m + i, i)] = ONE;
    }
    k
}

pub fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Real diagonal matrix as a complex matrix.
pub fn real_diag(d: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(d.len(), d.len(), |r, col| {
        if r == col {
            c(d[r], 0.0)
        } else {
            ZERO
        }
    })
}

/// Builds a matrix from real row vectors.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |r, col| c(rows[r][col], 0.0))
}

/// Builds a matrix from complex row vectors.
pub fn from_rows(rows: &[&[Complex64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |r, col| rows[r][col])
}

// -------------------------------------------------------------------------
// Small helpers
// -------------------------------------------------------------------------

pub fn fro(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn is_square(m: &ComplexMatrix) -> bool {
    m.nrows() == m.ncols()
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn imag_part(m: &ComplexMatrix) -> DMatrix<f64> {
    m.map(|z| z.im)
}

pub fn real_part(m: &ComplexMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    fro(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.clone()
        .try_inverse()
        .filter(all_finite)
        .ok_or_else(|| Error::Degenerate("matrix is not invertible".into()))
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::numerical("eigenvalues", format!("{e:?}")))
}

fn to_faer<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> faer::Mat<T> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: nalgebra::Scalar + Copy>(m: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Indices sorting `values` descending; exact ties are ordered by `tie`.
fn descending_order(values: &[f64], tie: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then_with(|| tie(a).cmp(&tie(b))));
    order
}

/// Position of the first entry within rounding of the largest magnitude.
fn leading_index(magnitudes: impl Iterator<Item = f64> + Clone) -> usize {
    let max = magnitudes.clone().fold(0.0, f64::max);
    magnitudes.into_iter().position(|x| x >= max * (1.0 - 1e-9)).unwrap_or(0)
}

/// Full singular value decomposition `A = U diag(s) V*`, with `s` descending.
pub(crate) struct Svd<T: nalgebra::Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

// SVD failure panics instead of threading through every rank decision.
const SVD_FAILED: &str = "singular value decomposition did not converge";

pub(crate) fn svd(m: &ComplexMatrix) -> Svd<Complex64> {
    let d = to_faer(m).svd().expect(SVD_FAILED);
    Svd {
        u: from_faer(d.U()),
        s: d.S().column_vector().iter().map(|x| x.re).collect(),
        v: from_faer(d.V()),
    }
}

pub(crate) fn real_svd(m: &DMatrix<f64>) -> Svd<f64> {
    let d = to_faer(m).svd().expect(SVD_FAILED);
    Svd {
        u: from_faer(d.U()),
        s: d.S().column_vector().iter().copied().collect(),
        v: from_faer(d.V()),
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    to_faer(m).singular_values().expect(SVD_FAILED)
}

/// Ratio of the largest to the smallest singular value (infinite when singular).
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Numerically invertible under the relative rank policy.
pub fn is_invertible(m: &ComplexMatrix, tol: &Tolerance) -> bool {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) => hi > 0.0 && lo > tol.rel * hi,
        _ => false,
    }
}

/// Least-squares scalar `s` minimising `||x - s * reference||`.
pub fn fit_scalar(x: &ComplexMatrix, reference: &ComplexMatrix) -> Complex64 {
    let num: Complex64 = reference.iter().zip(x.iter()).map(|(r, v)| r.conj() * v).sum();
    let den: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    num / den
}

/// Multiplies by a unit scalar so that the first entry (row-major) of maximal
/// modulus is real and positive.
pub fn normalize_phase(m: &mut ComplexMatrix) {
    let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |col| (r, col)))
        .map(|(r, col)| m[(r, col)])
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    *m *= phase;
}

/// Same phase convention for a vector.
pub fn normalize_vector_phase(v: &mut DVector<Complex64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .copied()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    *v *= phase;
}

/// Rescales `m` by a scalar so that its determinant becomes one.
pub fn to_unit_determinant(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.nrows();
    let det = m.determinant();
    if det.norm() == 0.0 || !det.re.is_finite() {
        return Err(Error::Degenerate("cannot normalise a singular matrix".into()));
    }
    let root = det.powf(1.0 / n as f64);
    Ok(m.unscale(1.0) / root)
}

/// Column-major vectorisation.
pub fn vectorize(m: &ComplexMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<Complex64>, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

// -------------------------------------------------------------------------
// Null spaces and rank decisions
// -------------------------------------------------------------------------

/// Right null space of a linear operator, with the spectrum used to decide it.
#[derive(Debug, Clone)]
pub struct NullSpace<T: nalgebra::Scalar> {
    /// Orthonormal basis vectors of the null space.
    pub basis: Vec<DVector<T>>,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// Singular values at or below this are treated as zero.
    pub threshold: f64,
}

impl<T: nalgebra::Scalar> NullSpace<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Rejects rank decisions where some singular value sits within a factor
    /// of 10 of the threshold.
    pub fn check_gap(&self) -> Result<()> {
        check_band(&self.singular_values, self.threshold)
    }
}

pub(crate) fn check_band(singular_values: &[f64], threshold: f64) -> Result<()> {
    if threshold <= 0.0 {
        return Ok(());
    }
    match singular_values
        .iter()
        .find(|&&s| s > threshold / 10.0 && s < threshold * 10.0)
    {
        Some(&value) => Err(Error::Indeterminate { value, threshold }),
        None => Ok(()),
    }
}

fn rank_threshold(sorted: &[f64], tol: &Tolerance) -> f64 {
    sorted.first().copied().unwrap_or(0.0) * tol.rel
}

/// Null space of `a`. Rank decided relative to the largest singular value.
pub fn null_space(a: &ComplexMatrix, tol: &Tolerance) -> NullSpace<Complex64> {
    null_space_with_floor(a, tol, 0.0)
}

/// As [`null_space`], with the threshold taken relative to
/// `max(sigma_max, floor)`. Operators normalised to unit scale pass
/// `floor = 1` so that a numerically zero operator has a full null space.
pub fn null_space_with_floor(a: &ComplexMatrix, tol: &Tolerance, floor: f64) -> NullSpace<Complex64> {
    let d = svd(a);
    null_space_from(d.s, &d.v, a.ncols(), tol, floor)
}

/// Splits the right singular vectors at the rank threshold. Columns beyond
/// the number of singular values (wide matrices) are always null.
fn null_space_from<T: nalgebra::Scalar + Copy>(
    s: Vec<f64>,
    v: &DMatrix<T>,
    cols: usize,
    tol: &Tolerance,
    floor: f64,
) -> NullSpace<T> {
    let mut sorted = s;
    sorted.resize(cols, 0.0);
    let threshold = rank_threshold(&sorted, tol).max(floor * tol.rel);
    let basis = (0..cols)
        .filter(|&i| sorted[i] <= threshold)
        .map(|i| v.column(i).into_owned())
        .collect();
    NullSpace {
        basis,
        singular_values: sorted,
        threshold,
    }
}

/// Real counterpart of [`null_space`].
pub fn real_null_space(a: &DMatrix<f64>, tol: &Tolerance) -> NullSpace<f64> {
    real_null_space_with_floor(a, tol, 0.0)
}

/// Real counterpart of [`null_space_with_floor`].
pub fn real_null_space_with_floor(a: &DMatrix<f64>, tol: &Tolerance, floor: f64) -> NullSpace<f64> {
    let d = real_svd(a);
    null_space_from(d.s, &d.v, a.ncols(), tol, floor)
}

/// Numerical rank of the column span of `a`, with an orthonormal basis of it.
pub fn column_span(a: &ComplexMatrix, tol: &Tolerance) -> (ComplexMatrix, Vec<f64>, f64) {
    if a.ncols() == 0 {
        return (ComplexMatrix::zeros(a.nrows(), 0), vec![], 0.0);
    }
    let d = svd(a);
    let threshold = rank_threshold(&d.s, tol);
    let rank = d.s.iter().filter(|&&x| x > threshold).count();
    let basis = d.u.columns(0, rank).into_owned();
    let sorted = d.s;
    (basis, sorted, threshold)
}

// -------------------------------------------------------------------------
// Hermitian spectral tools
// -------------------------------------------------------------------------

/// `H = U diag(values) U*` with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub vectors: ComplexMatrix,
    pub values: Vec<f64>,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.vectors * real_diag(&self.values) * self.vectors.adjoint()
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order with ties kept in solver order;
/// each eigenvector is phase-normalised (largest entry real positive).
pub fn hermitian_eig(h: &ComplexMatrix, tol: &Tolerance) -> Result<HermitianEigen> {
    if !is_square(h) {
        return Err(Error::Parameter("hermitian_eig needs a square matrix".into()));
    }
    let defect = hermitian_defect(h);
    if !tol.accepts(defect, fro(h)) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (||H - H*|| = {defect:.3e})"
        )));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            vectors: ComplexMatrix::zeros(0, 0),
            values: vec![],
        });
    }
    let eig = to_faer(&hermitian_part(h))
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::numerical("hermitian_eig", format!("{e:?}")))?;
    let raw: Vec<f64> = eig.S().column_vector().iter().map(|x| x.re).collect();
    let raw_vectors = from_faer(eig.U());
    let order = descending_order(&raw, |i| leading_index(raw_vectors.column(i).iter().map(|z| z.norm())));
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = raw_vectors.column(i).into_owned();
        normalize_vector_phase(&mut v);
        vectors.set_column(k, &v);
        values.push(raw[i]);
    }
    Ok(HermitianEigen { vectors, values })
}

/// Inertia of a nondegenerate Hermitian matrix.
pub fn signature(h: &ComplexMatrix, tol: &Tolerance) -> Result<Signature> {
    let eig = hermitian_eig(h, tol)?;
    signature_of_values(&eig.values, tol)
}

pub(crate) fn signature_of_values(values: &[f64], tol: &Tolerance) -> Result<Signature> {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = tol.bound(scale);
    if let Some(v) = values.iter().find(|v| v.abs() <= floor) {
        return Err(Error::Degenerate(format!(
            "eigenvalue {v:.3e} is below the nondegeneracy floor {floor:.3e}"
        )));
    }
    let p = values.iter().filter(|&&v| v > 0.0).count();
    Ok(Signature::new(p, values.len() - p))
}

// -------------------------------------------------------------------------
// Pfaffian
// -------------------------------------------------------------------------

/// Largest size handled by the recursive Pfaffian expansion.
pub const PFAFFIAN_MAX_SIZE: usize = 8;

/// Pfaffian of a skew-symmetric matrix of even size at most 8, by recursive
/// expansion along the first row.
pub fn pfaffian(a: &ComplexMatrix, tol: &Tolerance) -> Result<Complex64> {
    if !is_square(a) {
        return Err(Error::Parameter("pfaffian needs a square matrix".into()));
    }
    let n = a.nrows();
    if n % 2 != 0 {
        return Err(Error::Contract(format!("pfaffian needs even size, got {n}")));
    }
    if n > PFAFFIAN_MAX_SIZE {
        return Err(Error::UnsupportedSize(format!(
            "pfaffian expansion is limited to size {PFAFFIAN_MAX_SIZE}, got {n}"
        )));
    }
    let defect = fro(&(a + a.transpose()));
    if !tol.accepts(defect, fro(a)) {
        return Err(Error::Contract(format!(
            "matrix is not skew-symmetric (||A + A^T|| = {defect:.3e})"
        )));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(pfaffian_expand(a, &idx))
}

fn pfaffian_expand(a: &ComplexMatrix, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => ONE,
        2 => a[(idx[0], idx[1])],
        _ => {
            let first = idx[0];
            let rest = &idx[1..];
            let mut total = ZERO;
            for (k, &j) in rest.iter().enumerate() {
                let entry = a[(first, j)];
                if entry == ZERO {
                    continue;
                }
                let minor: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                total += entry * sign * pfaffian_expand(a, &minor);
            }
            total
        }
    }
}

// -------------------------------------------------------------------------
// Real congruence
// -------------------------------------------------------------------------

/// Real symmetric congruence `C = R^T I_{p,q} R`.
///
/// Returns the real invertible `R` (as a complex matrix with zero imaginary
/// part) and the signature of `C`.
pub fn sylvester_real(cm: &ComplexMatrix, tol: &Tolerance) -> Result<(ComplexMatrix, Signature)> {
    if !is_square(cm) {
        return Err(Error::Parameter("sylvester_real needs a square matrix".into()));
    }
    let scale = fro(cm);
    let imag = imag_part(cm).norm();
    if !tol.accepts(imag, scale) {
        return Err(Error::Contract(format!(
            "matrix has complex entries (||Im C|| = {imag:.3e})"
        )));
    }
    let re = real_part(cm);
    let asym = (&re - re.transpose()).norm();
    if !tol.accepts(asym, scale) {
        return Err(Error::Contract(format!(
            "matrix is not symmetric (||C - C^T|| = {asym:.3e})"
        )));
    }
    let n = re.nrows();
    let sym = (&re + re.transpose()) * 0.5;
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::numerical("sylvester_real", format!("{e:?}")))?;
    let eigenvalues: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let eigenvectors = from_faer(eig.U());
    let order = descending_order(&eigenvalues, |i| leading_index(eigenvectors.column(i).iter().map(|x| x.abs())));
    let values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let sig = signature_of_values(&values, tol)?;
    let mut r = DMatrix::<f64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eigenvectors.column(i).into_owned();
        let pivot = v.iter().copied().fold(0.0, |m: f64, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        if pivot < 0.0 {
            v.neg_mut();
        }
        let s = eigenvalues[i].abs().sqrt();
        r.set_row(k, &(v.transpose() * s));
    }
    Ok((to_complex(&r), sig))
}
