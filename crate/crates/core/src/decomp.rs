//! Structured decompositions: polar decomposition inside a classical group,
//! the symplectic eigendecomposition of Hermitian symplectic matrices, the
//! anti-symplectic and anti-orthogonal reductions, and the Hilbert 90 splitting.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commutant::{self, random_complex};
use crate::error::{Error, Result};
use crate::grouprep::{validate_membership, GroupKind, Target};
use crate::matcore::{self, c, ComplexMatrix, HermitianEigen, Signature, Tolerance, I};

/// Condition number above which a Hilbert 90 candidate is rejected.
pub const HILBERT90_MAX_CONDITION: f64 = 1e8;

/// Random scalars tried after the fixed ones.
const HILBERT90_RANDOM_ATTEMPTS: usize = 16;

/// Eigenvalues within this distance of `+1` or `-1` are paired by
/// quaternionic Gram-Schmidt rather than by their eigenvalue.
const UNIT_CLUSTER: f64 = 1e-8;

/// `||lhs - rhs|| <= tol.bound(scale)` or a numerical error naming `branch`.
fn ensure(branch: &str, what: &str, lhs: &ComplexMatrix, rhs: &ComplexMatrix, scale: f64, tol: &Tolerance) -> Result<()> {
    let r = matcore::fro(&(lhs - rhs));
    let scale = scale.max(matcore::fro(rhs));
    if tol.accepts(r, scale) {
        Ok(())
    } else {
        Err(Error::numerical(
            branch,
            format!("{what}: residual {:.3e} exceeds bound {:.3e}", r / scale, tol.bound(scale) / scale),
        ))
    }
}

fn require_hermitian(h: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    if !matcore::is_square(h) {
        return Err(Error::Parameter("a square matrix is required".into()));
    }
    let defect = matcore::hermitian_defect(h);
    if !tol.accepts(defect, matcore::fro(h)) {
        return Err(Error::Contract(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    Ok(())
}

fn require_even(h: &ComplexMatrix) -> Result<usize> {
    let n = h.nrows();
    if n % 2 != 0 || n == 0 {
        return Err(Error::Contract(format!("an even size is required, got {n}")));
    }
    Ok(n / 2)
}

fn require_relation(what: &str, lhs: &ComplexMatrix, rhs: &ComplexMatrix, scale: f64, tol: &Tolerance) -> Result<()> {
    let r = matcore::fro(&(lhs - rhs));
    if !tol.accepts(r, scale.max(matcore::fro(rhs))) {
        return Err(Error::Contract(format!("input does not satisfy {what} (residual {r:.3e})")));
    }
    Ok(())
}

fn partner(v: &DVector<Complex64>, j: &ComplexMatrix) -> DVector<Complex64> {
    j * v.conjugate()
}

fn columns(vs: &[DVector<Complex64>]) -> ComplexMatrix {
    ComplexMatrix::from_columns(vs)
}

// -------------------------------------------------------------------------
// Polar decomposition
// -------------------------------------------------------------------------

/// `M = U H` with `U` unitary and `H` positive definite.
#[derive(Debug, Clone)]
pub struct PolarPair {
    pub u: ComplexMatrix,
    pub h: ComplexMatrix,
}

/// Polar decomposition of a member of a classical group; both factors are
/// checked to lie in the same group.
pub fn polar_in_group(m: &ComplexMatrix, kind: GroupKind, tol: &Tolerance) -> Result<PolarPair> {
    let report = validate_membership(m, Target::Group(kind), tol)?;
    if !report.passed() {
        return Err(Error::Contract(format!(
            "matrix is not in {kind} (max residual {:.3e})",
            report.max_residual()
        )));
    }
    let PolarPair { u, h } = polar(m, tol)?;
    let loose = tol.loosened(10.0);
    for (name, factor) in [("unitary", &u), ("positive", &h)] {
        let r = validate_membership(factor, Target::Group(kind), &loose)?;
        if !r.passed() {
            return Err(Error::Contract(format!(
                "{name} factor left {kind} (max residual {:.3e})",
                r.max_residual()
            )));
        }
    }
    Ok(PolarPair { u, h })
}

/// Polar decomposition of an invertible matrix, without group checks.
pub fn polar(m: &ComplexMatrix, tol: &Tolerance) -> Result<PolarPair> {
    if !matcore::is_square(m) {
        return Err(Error::Parameter("polar decomposition needs a square matrix".into()));
    }
    let gram = m.adjoint() * m;
    let eig = matcore::hermitian_eig(&matcore::hermitian_part(&gram), tol)?;
    if eig.values.iter().any(|&s| s <= 0.0) {
        return Err(Error::Degenerate("matrix is singular".into()));
    }
    let root: Vec<f64> = eig.values.iter().map(|s| s.sqrt()).collect();
    let inv_root: Vec<f64> = root.iter().map(|s| 1.0 / s).collect();
    let w = &eig.vectors;
    let h = matcore::hermitian_part(&(w * matcore::real_diag(&root) * w.adjoint()));
    let h_inv = w * matcore::real_diag(&inv_root) * w.adjoint();
    let u = m * h_inv;
    ensure("polar", "M = U H", &(&u * &h), m, matcore::fro(m), &tol.loosened(10.0))?;
    Ok(PolarPair { u, h })
}

// -------------------------------------------------------------------------
// Hermitian symplectic matrices
// -------------------------------------------------------------------------

/// `H = V D V*` with `V` unitary symplectic and `D = diag(Lambda, Lambda^{-1})`.
#[derive(Debug, Clone)]
pub struct SymplecticEigen {
    pub v: ComplexMatrix,
    /// The diagonal of `Lambda`, in descending order.
    pub lambda: Vec<f64>,
}

impl SymplecticEigen {
    pub fn d(&self) -> ComplexMatrix {
        let inv: Vec<f64> = self.lambda.iter().map(|l| 1.0 / l).collect();
        matcore::real_diag(&[self.lambda.clone(), inv].concat())
    }
}

/// Picks half of an eigenspace that is closed under `v -> J conj(v)`:
/// each chosen vector is orthogonal to all earlier vectors and their partners.
fn quaternionic_half(
    space: &[DVector<Complex64>],
    j: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Vec<DVector<Complex64>>> {
    if space.len() % 2 != 0 {
        return Err(Error::Pairing(format!(
            "unit eigenvalue cluster has odd multiplicity {}",
            space.len()
        )));
    }
    let mut chosen: Vec<DVector<Complex64>> = Vec::new();
    let mut closed: Vec<DVector<Complex64>> = Vec::new();
    for _ in 0..space.len() / 2 {
        let project = |v: &DVector<Complex64>| {
            let mut r = v.clone();
            for q in &closed {
                r -= q * q.dotc(&r);
            }
            r
        };
        // Earliest candidate wins near-ties.
        let mut best = project(&space[0]);
        for v in &space[1..] {
            let r = project(v);
            if r.norm() > best.norm() * (1.0 + 1e-12) {
                best = r;
            }
        }
        let norm = best.norm();
        if norm <= tol.rel.sqrt() {
            return Err(Error::Pairing("unit eigenvalue cluster is not closed under pairing".into()));
        }
        let mut w = best / c(norm, 0.0);
        // Re-orthogonalise once for stability.
        for q in &closed {
            let overlap = q.dotc(&w);
            w -= q * overlap;
        }
        let norm = w.norm();
        w /= c(norm, 0.0);
        let p = partner(&w, j);
        closed.push(w.clone());
        closed.push(p);
        chosen.push(w);
    }
    Ok(chosen)
}

/// Eigenpairs of a Hermitian matrix grouped by eigenvalue: `(value, vectors)`
/// for each entry, with vectors as columns of the eigenbasis.
fn split_columns(eig: &HermitianEigen, pick: impl Fn(f64) -> bool) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let mut vals = Vec::new();
    let mut vecs = Vec::new();
    for (k, &l) in eig.values.iter().enumerate() {
        if pick(l) {
            vals.push(l);
            vecs.push(eig.vectors.column(k).into_owned());
        }
    }
    (vals, vecs)
}

/// Symplectic eigendecomposition of a Hermitian symplectic matrix.
pub fn symplectic_eig(h: &ComplexMatrix, tol: &Tolerance) -> Result<SymplecticEigen> {
    require_hermitian(h, tol)?;
    let n = require_even(h)?;
    let j = matcore::j_matrix(n);
    let hn = matcore::fro(h);
    require_relation("H^T J H = J", &(h.transpose() * &j * h), &j, hn * hn * matcore::fro(&j), tol)?;
    let eig = matcore::hermitian_eig(h, tol)?;

    let (large_vals, large_vecs) = split_columns(&eig, |l| l.abs() > 1.0 + UNIT_CLUSTER);
    let (small_vals, _) = split_columns(&eig, |l| l.abs() < 1.0 - UNIT_CLUSTER);
    if large_vals.len() != small_vals.len() {
        return Err(Error::Pairing(format!(
            "{} eigenvalues of modulus > 1 but {} of modulus < 1",
            large_vals.len(),
            small_vals.len()
        )));
    }
    let mut pairs: Vec<(f64, DVector<Complex64>)> = large_vals.into_iter().zip(large_vecs).collect();
    for target in [1.0, -1.0] {
        let (_, cluster) = split_columns(&eig, |l| (l - target).abs() <= UNIT_CLUSTER);
        for w in quaternionic_half(&cluster, &j, tol)? {
            pairs.push((target, w));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pairs.len() != n {
        return Err(Error::Pairing(format!("found {} of {n} eigenvalue pairs", pairs.len())));
    }
    // Partner check: H (J conj(w)) = (1 / lambda) J conj(w).
    let bound = tol.loosened(1e3).bound(hn);
    for (l, w) in &pairs {
        let p = partner(w, &j);
        let r = (h * &p - &p * c(1.0 / l, 0.0)).norm();
        if r > bound {
            return Err(Error::Pairing(format!(
                "partner of eigenvalue {l:.6e} is off by {r:.3e}"
            )));
        }
    }
    let lambda: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let w: Vec<DVector<Complex64>> = pairs.into_iter().map(|(_, w)| w).collect();
    let partners: Vec<DVector<Complex64>> = w.iter().map(|v| -partner(v, &j)).collect();
    let v = columns(&[w, partners].concat());
    let out = SymplecticEigen { v, lambda };
    let recon = &out.v * out.d() * out.v.adjoint();
    ensure("symplectic_eig", "H = V D V*", &recon, h, hn, &tol.loosened(1e3))?;
    Ok(out)
}

/// `S` symplectic with `S* H S = K_{p,q}`; returns `S` and the signature
/// `(2p, 2q)` of `H`.
pub fn reduce_to_kpq(h: &ComplexMatrix, tol: &Tolerance) -> Result<(ComplexMatrix, Signature)> {
    let se = symplectic_eig(h, tol)?;
    // Lambda is sorted descending, so the positive entries come first.
    let p = se.lambda.iter().filter(|&&l| l > 0.0).count();
    let q = se.lambda.len() - p;
    let a: Vec<f64> = se.lambda.iter().map(|l| l.abs().powf(-0.5)).collect();
    let a_inv: Vec<f64> = a.iter().map(|x| 1.0 / x).collect();
    let s = &se.v * matcore::real_diag(&[a, a_inv].concat());
    let k = matcore::kpq(p, q);
    let scale = matcore::fro(&s).powi(2) * matcore::fro(h);
    ensure("reduce_to_kpq", "S* H S = K", &(s.adjoint() * h * &s), &k, scale, &tol.loosened(1e3))?;
    Ok((s, Signature::new(2 * p, 2 * q)))
}

/// Positive eigenpairs of `H` after checking its signature is `(n, n)`.
fn positive_half(h: &ComplexMatrix, n: usize, tol: &Tolerance) -> Result<(Vec<f64>, Vec<DVector<Complex64>>)> {
    let eig = matcore::hermitian_eig(h, tol)?;
    let sig = matcore::signature_of_values(&eig.values, tol)?;
    if sig != Signature::new(n, n) {
        return Err(Error::Contract(format!("signature is {sig}, expected ({n},{n})")));
    }
    Ok(split_columns(&eig, |l| l > 0.0))
}

/// `S` symplectic with `S* H S = I_{n,n}`, for Hermitian `H` with `H^T J H = -J`.
pub fn antisymplectic_reduce(h: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    require_hermitian(h, tol)?;
    let n = require_even(h)?;
    let j = matcore::j_matrix(n);
    let hn = matcore::fro(h);
    require_relation("H^T J H = -J", &(h.transpose() * &j * h), &(-&j), hn * hn * matcore::fro(&j), tol)?;
    let (vals, w) = positive_half(h, n, tol)?;
    // Partner check: H (J conj(w)) = -(1 / lambda) J conj(w).
    let bound = tol.loosened(1e3).bound(hn);
    for (l, v) in vals.iter().zip(&w) {
        let p = partner(v, &j);
        let r = (h * &p + &p * c(1.0 / l, 0.0)).norm();
        if r > bound {
            return Err(Error::Pairing(format!("partner of eigenvalue {l:.6e} is off by {r:.3e}")));
        }
    }
    let partners: Vec<DVector<Complex64>> = w.iter().map(|v| -partner(v, &j)).collect();
    let v = columns(&[w, partners].concat());
    let d: Vec<f64> = vals
        .iter()
        .map(|l| l.powf(-0.5))
        .chain(vals.iter().map(|l| l.sqrt()))
        .collect();
    let s = v * matcore::real_diag(&d);
    let scale = matcore::fro(&s).powi(2) * hn;
    ensure(
        "antisymplectic_reduce",
        "S* H S = I_nn",
        &(s.adjoint() * h * &s),
        &matcore::ipq(n, n),
        scale,
        &tol.loosened(1e3),
    )?;
    Ok(s)
}

/// First stage of the anti-orthogonal reduction: `A* H A = I_{n,n}` and
/// `A^T A = [[0, I], [I, 0]]`.
fn antiorthogonal_stage(h: &ComplexMatrix, n: usize, tol: &Tolerance) -> Result<ComplexMatrix> {
    let hn = matcore::fro(h);
    let (vals, w) = positive_half(h, n, tol)?;
    let bound = tol.loosened(1e3).bound(hn);
    for (l, v) in vals.iter().zip(&w) {
        let p = v.conjugate();
        let r = (h * &p + &p * c(1.0 / l, 0.0)).norm();
        if r > bound {
            return Err(Error::Pairing(format!("conjugate of eigenvector for {l:.6e} is off by {r:.3e}")));
        }
    }
    let conj: Vec<DVector<Complex64>> = w.iter().map(|v| v.conjugate()).collect();
    let v = columns(&[w, conj].concat());
    let d: Vec<f64> = vals
        .iter()
        .map(|l| l.powf(-0.5))
        .chain(vals.iter().map(|l| l.sqrt()))
        .collect();
    Ok(v * matcore::real_diag(&d))
}

/// `M` complex orthogonal with `M* H M = iJ`, for Hermitian `H` with `H^T H = -I`.
pub fn antiorthogonal_reduce(h: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    require_hermitian(h, tol)?;
    let n = require_even(h)?;
    let id = matcore::identity(2 * n);
    let hn = matcore::fro(h);
    require_relation("H^T H = -I", &(h.transpose() * h), &(-&id), hn * hn, tol)?;
    let ij = matcore::j_matrix(n) * I;
    let a = antiorthogonal_stage(h, n, tol)?;
    let b = antiorthogonal_stage(&ij, n, tol)?;
    let m = a * matcore::inverse(&b)?;
    let loose = tol.loosened(1e3);
    let mn = matcore::fro(&m);
    ensure("antiorthogonal_reduce", "M^T M = I", &(m.transpose() * &m), &id, mn * mn, &loose)?;
    ensure("antiorthogonal_reduce", "M* H M = iJ", &(m.adjoint() * h * &m), &ij, mn * mn * hn, &loose)?;
    Ok(m)
}

// -------------------------------------------------------------------------
// Hilbert 90
// -------------------------------------------------------------------------

/// `Q` with `conj(Q) H = Q`, i.e. `H = conj(Q)^{-1} Q`.
#[derive(Debug, Clone)]
pub struct Hilbert90 {
    pub q: ComplexMatrix,
    /// The scalar `c` in `Q = conj(c) H + c I`.
    pub c: Complex64,
    pub condition: f64,
}

fn hilbert90_scalars() -> impl Iterator<Item = Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(commutant::DEFAULT_SEED);
    [c(0.5, 0.0), I, c(1.0, 1.0)]
        .into_iter()
        .chain((0..HILBERT90_RANDOM_ATTEMPTS).map(move |_| {
            let z = random_complex(&mut rng);
            z / z.norm()
        }))
}

/// Splitting for any `H` with `conj(H) H = I` (Hermitian or not).
pub(crate) fn real_splitting(h: &ComplexMatrix, tol: &Tolerance) -> Result<Hilbert90> {
    let n = h.nrows();
    let id = matcore::identity(n);
    let hn = matcore::fro(h);
    require_relation("conj(H) H = I", &(h.conjugate() * h), &id, hn * hn, tol)?;
    let mut best = f64::INFINITY;
    for cs in hilbert90_scalars() {
        let q = h * cs.conj() + &id * cs;
        let condition = matcore::condition_number(&q);
        best = best.min(condition);
        if condition < HILBERT90_MAX_CONDITION {
            let qn = matcore::fro(&q);
            ensure("hilbert90", "conj(Q) H = Q", &(q.conjugate() * h), &q, qn * hn, &tol.loosened(1e3))?;
            return Ok(Hilbert90 { q, c: cs, condition });
        }
    }
    Err(Error::Conditioning(format!(
        "every candidate splitting has condition number >= {HILBERT90_MAX_CONDITION:.0e} (best {best:.3e})"
    )))
}

/// Hilbert 90 splitting of a Hermitian `H` with `conj(H) H = I`.
pub fn hilbert90(h: &ComplexMatrix, tol: &Tolerance) -> Result<Hilbert90> {
    require_hermitian(h, tol)?;
    real_splitting(h, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouprep::Family;
    use crate::matcore::{from_real_rows, real_diag};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        matcore::fro(&(a - b)) <= eps
    }

    #[test]
    fn polar_examples() {
        let gl = GroupKind::new(Family::GL, 2).unwrap();
        let m = matcore::identity(2) * c(2.0, 0.0);
        let pp = polar_in_group(&m, gl, &tol()).unwrap();
        assert!(close(&pp.u, &matcore::identity(2), 1e-14));
        assert!(close(&pp.h, &m, 1e-14));

        let u = matcore::from_rows(&[&[c(0.0, 1.0), matcore::ZERO], &[matcore::ZERO, c(0.6, 0.8)]]);
        let pp = polar_in_group(&u, gl, &tol()).unwrap();
        assert!(close(&pp.u, &u, 1e-14));
        assert!(close(&pp.h, &matcore::identity(2), 1e-14));

        let sp = GroupKind::new(Family::Sp, 2).unwrap();
        let m = real_diag(&[2.0, 0.5]);
        let pp = polar_in_group(&m, sp, &tol()).unwrap();
        assert!(close(&pp.u, &matcore::identity(2), 1e-14));
        assert!(close(&pp.h, &m, 1e-14));
    }

    #[test]
    fn polar_rejects_non_members() {
        let sp = GroupKind::new(Family::Sp, 2).unwrap();
        assert!(matches!(
            polar_in_group(&real_diag(&[2.0, 3.0]), sp, &tol()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn symplectic_eig_examples() {
        let se = symplectic_eig(&matcore::identity(4), &tol()).unwrap();
        assert_eq!(se.lambda, vec![1.0, 1.0]);
        assert!(close(&se.v, &matcore::identity(4), 1e-14));

        let h = real_diag(&[2.0, 0.5]);
        let se = symplectic_eig(&h, &tol()).unwrap();
        assert_eq!(se.lambda, vec![2.0]);
        assert!(close(&se.v, &matcore::identity(2), 1e-14));
        assert!(close(&se.d(), &h, 1e-14));
    }

    #[test]
    fn kpq_examples() {
        let k = matcore::kpq(1, 1);
        let (s, sig) = reduce_to_kpq(&k, &tol()).unwrap();
        assert_eq!(sig, Signature::new(2, 2));
        assert!(close(&(s.adjoint() * &k * &s), &k, 1e-13));

        let (s, sig) = reduce_to_kpq(&real_diag(&[4.0, 0.25]), &tol()).unwrap();
        assert_eq!(sig, Signature::new(2, 0));
        assert!(close(&s, &real_diag(&[0.5, 2.0]), 1e-14));
    }

    #[test]
    fn antisymplectic_examples() {
        let h = real_diag(&[3.0, -1.0 / 3.0]);
        let s = antisymplectic_reduce(&h, &tol()).unwrap();
        assert!(close(&s, &real_diag(&[3f64.powf(-0.5), 3f64.sqrt()]), 1e-14));

        let ij = matcore::j_matrix(2) * I;
        let s = antisymplectic_reduce(&ij, &tol()).unwrap();
        let j = matcore::j_matrix(2);
        assert!(close(&(s.transpose() * &j * &s), &j, 1e-13));
        assert!(close(&(s.adjoint() * &ij * &s), &matcore::ipq(2, 2), 1e-13));

        let inn = matcore::ipq(1, 1);
        assert!(close(&antisymplectic_reduce(&inn, &tol()).unwrap(), &matcore::identity(2), 1e-14));
    }

    #[test]
    fn antisymplectic_rejects_wrong_relation() {
        assert!(matches!(
            antisymplectic_reduce(&matcore::identity(2), &tol()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn antiorthogonal_examples() {
        let ij = matcore::j_matrix(1) * I;
        let m = antiorthogonal_reduce(&ij, &tol()).unwrap();
        assert!(close(&m, &matcore::identity(2), 1e-13));

        let h = matcore::from_rows(&[&[matcore::ZERO, I], &[-I, matcore::ZERO]]);
        let m = antiorthogonal_reduce(&h, &tol()).unwrap();
        assert!(close(&(m.transpose() * &m), &matcore::identity(2), 1e-13));
        assert!(close(&(m.adjoint() * &h * &m), &ij, 1e-13));
    }

    #[test]
    fn hilbert90_examples() {
        let r = hilbert90(&matcore::identity(3), &tol()).unwrap();
        assert_eq!(r.c, c(0.5, 0.0));
        assert!(close(&r.q, &matcore::identity(3), 1e-15));

        let r = hilbert90(&real_diag(&[-1.0]), &tol()).unwrap();
        assert_eq!(r.c, I);
        assert!(close(&r.q, &(matcore::identity(1) * c(0.0, 2.0)), 1e-15));

        let h = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = hilbert90(&h, &tol()).unwrap();
        assert_eq!(r.c, c(1.0, 1.0));
        let expected = &h * c(1.0, -1.0) + matcore::identity(2) * c(1.0, 1.0);
        assert!(close(&r.q, &expected, 1e-15));
        assert!((r.q.determinant() - c(0.0, 4.0)).norm() < 1e-14);
        let back = matcore::inverse(&r.q.conjugate()).unwrap() * &r.q;
        assert!(close(&back, &h, 1e-14));
    }
}
