//! Classification of irreducible involution-fixed representations.
//!
//! Each branch produces an explicit conjugator `P` such that every
//! `P rho(g) P^{-1}` lies in the reported real form.

use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::commutant;
use crate::decomp;
use crate::error::{Error, Result};
use crate::formsolver::{self, LambdaRelation};
use crate::grouprep::{
    self, matrix_to_value, validate_membership, Family, GroupKind, MembershipReport, RealFormTag, Representation,
    Target,
};
use crate::invariants::{self, Involution};
use crate::matcore::{self, c, ComplexMatrix, Signature, Tolerance, I};

/// Values of `lambda_0` tried before giving up on `A + lambda_0 B`.
const LAMBDA0_CANDIDATES: i32 = 10;

/// Accepted loss of conditioning of `A + lambda_0 B` relative to `A + iB`.
const LAMBDA0_SLACK: f64 = 1e-2;

/// Proof of a classification: `P rho(g) P^{-1}` lies in `tag` for every generator.
#[derive(Debug, Clone)]
pub struct ConjugationCertificate {
    pub tag: RealFormTag,
    pub p: ComplexMatrix,
    /// Largest membership residual of each conjugated generator.
    pub residuals: Vec<f64>,
    pub lambda_sign: Option<i8>,
    pub branch: String,
}

impl ConjugationCertificate {
    pub fn to_value(&self) -> Value {
        json!({
            "tag": self.tag.name(),
            "params": self.tag.params(),
            "P": matrix_to_value(&self.p),
            "residuals": self.residuals,
            "lambda_sign": self.lambda_sign,
            "branch": self.branch,
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Output of [`verify_certificate`].
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub generators: Vec<MembershipReport>,
    /// Membership of `P` in the ambient group, for branches that require it.
    pub conjugator: Option<MembershipReport>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.generators.iter().all(MembershipReport::passed)
            && self.conjugator.as_ref().is_none_or(MembershipReport::passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.generators
            .iter()
            .chain(self.conjugator.iter())
            .map(MembershipReport::max_residual)
            .fold(0.0, f64::max)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "passed": self.passed(),
            "max_residual": self.max_residual(),
            "generators": self.generators,
            "conjugator": self.conjugator,
        })
    }
}

fn requires_ambient_conjugator(tag: RealFormTag) -> bool {
    matches!(tag.family(), Family::Sp | Family::O | Family::SO)
}

/// Recomputes the membership of every `P rho(g) P^{-1}` in the certificate's tag.
pub fn verify_certificate(
    rep: &Representation,
    cert: &ConjugationCertificate,
    tol: &Tolerance,
) -> Result<CertificateReport> {
    let n = cert.tag.ambient_dim();
    if rep.dim() != n || cert.p.nrows() != n || cert.p.ncols() != n {
        return Err(Error::Parameter(format!(
            "certificate for {} does not match a representation of dimension {}",
            cert.tag,
            rep.dim()
        )));
    }
    let conjugated = rep.conjugated(&cert.p)?;
    let generators = conjugated
        .generators
        .iter()
        .map(|g| validate_membership(g, Target::Form(cert.tag), tol))
        .collect::<Result<Vec<_>>>()?;
    let conjugator = if requires_ambient_conjugator(cert.tag) {
        Some(validate_membership(&cert.p, Target::Group(cert.tag.ambient()), tol)?)
    } else {
        None
    };
    Ok(CertificateReport { generators, conjugator })
}

/// Builds and checks a certificate for the conjugator `p`.
fn certify(
    rep: &Representation,
    tag: RealFormTag,
    p: ComplexMatrix,
    lambda_sign: Option<i8>,
    branch: String,
    tol: &Tolerance,
) -> Result<ConjugationCertificate> {
    let mut cert = ConjugationCertificate {
        tag,
        p,
        residuals: Vec::new(),
        lambda_sign,
        branch,
    };
    let report = verify_certificate(rep, &cert, tol)?;
    cert.residuals = report.generators.iter().map(MembershipReport::max_residual).collect();
    if !report.passed() {
        return Err(Error::numerical(
            &cert.branch,
            format!(
                "conjugated generators miss {tag} (max residual {:.3e})",
                report.max_residual()
            ),
        ));
    }
    Ok(cert)
}

/// Classifies an irreducible representation whose character is fixed by `which`.
pub fn classify_irreducible(
    rep: &Representation,
    which: Involution,
    tol: &Tolerance,
) -> Result<ConjugationCertificate> {
    if !commutant::is_irreducible(rep, tol)? {
        return Err(Error::NotApplicable("representation is not irreducible".into()));
    }
    let verdict = invariants::is_phi_fixed(rep, which, tol)?;
    if !verdict.fixed {
        return Err(Error::NotApplicable(format!("character is not fixed by {which}")));
    }
    match (rep.kind.family, which) {
        (Family::GL | Family::SL, Involution::Phi2) => classify_unitary(rep, tol),
        (Family::GL | Family::SL, Involution::Phi1) => {
            let p = verdict.intertwiner.expect("fixed verdict carries an intertwiner");
            classify_real_or_quaternionic(rep, p, tol)
        }
        (Family::Sp, _) => classify_symplectic(rep, tol),
        (Family::O | Family::SO, _) => classify_orthogonal(rep, tol),
    }
}

fn invariant_form(rep: &Representation, tol: &Tolerance) -> Result<ComplexMatrix> {
    formsolver::invariant_hermitian(rep, tol)?
        .ok_or_else(|| Error::Degenerate("no invariant Hermitian form exists".into()))
}

fn special(kind: GroupKind, p: ComplexMatrix) -> Result<ComplexMatrix> {
    if kind.family == Family::SL {
        matcore::to_unit_determinant(&p)
    } else {
        Ok(p)
    }
}

/// `Phi2` branch: invariant Hermitian form `H = S* I_{p,q} S`, conjugator `S`.
fn classify_unitary(rep: &Representation, tol: &Tolerance) -> Result<ConjugationCertificate> {
    let mut h = invariant_form(rep, tol)?;
    let mut sig = matcore::signature(&h, tol)?;
    if sig.p < sig.q {
        h = -h;
        sig = sig.swapped();
    }
    let eig = matcore::hermitian_eig(&h, tol)?;
    let root: Vec<f64> = eig.values.iter().map(|v| v.abs().sqrt()).collect();
    let s = matcore::real_diag(&root) * eig.vectors.adjoint();
    let tag = match rep.kind.family {
        Family::SL => RealFormTag::Su(sig.p, sig.q),
        _ => RealFormTag::U(sig.p, sig.q),
    };
    certify(rep, tag, special(rep.kind, s)?, None, "unitary-form".into(), tol)
}

/// `Phi1` branch: `P conj(rho) = rho P` with `P conj(P) = s I`.
fn classify_real_or_quaternionic(
    rep: &Representation,
    p: ComplexMatrix,
    tol: &Tolerance,
) -> Result<ConjugationCertificate> {
    let n = rep.dim();
    let pp = &p * p.conjugate();
    let s = matcore::fit_scalar(&pp, &matcore::identity(n));
    if !tol.loosened(1e3).accepts(s.im.abs(), s.norm()) {
        return Err(Error::numerical(
            "phi1-scalar",
            format!("P conj(P) = s I with non-real s = {:.6e}{:+.6e}i", s.re, s.im),
        ));
    }
    let p = &p * c(s.norm().powf(-0.5), 0.0);
    if s.re > 0.0 {
        // conj(P) squares to the identity under bar; split it.
        let split = decomp::real_splitting(&p.conjugate(), &tol.loosened(1e3))?;
        let tag = match rep.kind.family {
            Family::SL => RealFormTag::SlR(n),
            _ => RealFormTag::GlR(n),
        };
        certify(rep, tag, special(rep.kind, split.q)?, None, "phi1-real".into(), tol)
    } else {
        if n % 2 != 0 {
            return Err(Error::numerical(
                "phi1-quaternionic",
                format!("P conj(P) = -I is impossible in odd dimension {n}"),
            ));
        }
        let t = quaternionic_frame(&p)?;
        let tag = match rep.kind.family {
            Family::SL => RealFormTag::SlH(n / 2),
            _ => RealFormTag::GlH(n / 2),
        };
        let pc = matcore::inverse(&t)?;
        certify(rep, tag, special(rep.kind, pc)?, None, "phi1-quaternionic".into(), tol)
    }
}

/// `T = (W, -P conj(W))`, which satisfies `T J = P conj(T)` when
/// `P conj(P) = -I`. Columns of `W` are chosen greedily from the standard
/// basis, each orthogonal to the span built so far.
fn quaternionic_frame(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = p.nrows();
    let m = n / 2;
    let partner = |v: &DVector<Complex64>| p * v.conjugate();
    let mut span: Vec<DVector<Complex64>> = Vec::new();
    let mut w: Vec<DVector<Complex64>> = Vec::new();
    let project = |span: &[DVector<Complex64>], v: &DVector<Complex64>| {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in span {
                r -= q * q.dotc(&r);
            }
        }
        r
    };
    for _ in 0..m {
        let mut best: Option<DVector<Complex64>> = None;
        for k in 0..n {
            let mut e = DVector::<Complex64>::zeros(n);
            e[k] = matcore::ONE;
            let r = project(&span, &e);
            if best.as_ref().is_none_or(|b| r.norm() > b.norm() * (1.0 + 1e-12)) {
                best = Some(r);
            }
        }
        let best = best.expect("n > 0");
        let norm = best.norm();
        if norm < 1e-8 {
            return Err(Error::numerical("phi1-quaternionic", "could not extend the quaternionic frame"));
        }
        let v = best / c(norm, 0.0);
        let pv = partner(&v);
        span.push(v.clone());
        let r = project(&span, &pv);
        let rn = r.norm();
        if rn < 1e-8 * pv.norm() {
            return Err(Error::numerical("phi1-quaternionic", "partner vector is dependent"));
        }
        span.push(r / c(rn, 0.0));
        w.push(v);
    }
    let partners: Vec<DVector<Complex64>> = w.iter().map(|v| -partner(v)).collect();
    Ok(ComplexMatrix::from_columns(&[w, partners].concat()))
}

/// Symplectic branch: `H^T J H = lambda J` with `lambda = +1` or `-1`.
fn classify_symplectic(rep: &Representation, tol: &Tolerance) -> Result<ConjugationCertificate> {
    let n = rep.dim();
    let h = invariant_form(rep, tol)?;
    let (h, sign) = formsolver::normalize_lambda(&h, LambdaRelation::SymplecticJ, &tol.loosened(1e3))?;
    if sign > 0 {
        let (mut s, mut sig) = decomp::reduce_to_kpq(&h, tol)?;
        if sig.p < sig.q {
            (s, sig) = decomp::reduce_to_kpq(&(-&h), tol)?;
        }
        let pc = matcore::inverse(&s)?;
        certify(rep, RealFormTag::Sp(sig.p, sig.q), pc, Some(1), "symplectic-kpq".into(), tol)
    } else {
        let s = decomp::antisymplectic_reduce(&h, tol)?;
        let ij = matcore::j_matrix(n / 2) * I;
        let s1 = decomp::antisymplectic_reduce(&ij, tol)?;
        let pc = s1 * matcore::inverse(&s)?;
        certify(rep, RealFormTag::SpR(n), pc, Some(-1), "symplectic-split".into(), tol)
    }
}

/// Orthogonal branch: `H^T H = lambda I` with `lambda = +1` (real copy of
/// `O(p,q)`) or `-1` (quaternionic, even dimension only).
fn classify_orthogonal(rep: &Representation, tol: &Tolerance) -> Result<ConjugationCertificate> {
    let n = rep.dim();
    let h = invariant_form(rep, tol)?;
    let (h, sign) = formsolver::normalize_lambda(&h, LambdaRelation::OrthogonalI, &tol.loosened(1e3))?;
    let lambda_sign = (n % 2 == 0).then_some(sign);
    let special = rep.kind.family == Family::SO;
    if sign > 0 {
        let (g, sig) = orthogonal_real_conjugator(&h, tol)?;
        let mut branch = String::from("orthogonal-real");
        let mut g = g;
        if special && g.determinant().re < 0.0 {
            if n % 2 == 1 {
                g = -g;
                branch.push_str("+negate");
            } else {
                g = matcore::ipq(n - 1, 1) * g;
                branch.push_str("+reflect");
            }
        }
        let tag = if special {
            RealFormTag::SoPq(sig.p, sig.q)
        } else {
            RealFormTag::OPq(sig.p, sig.q)
        };
        certify(rep, tag, g, lambda_sign, branch, tol)
    } else {
        if n % 2 != 0 {
            return Err(Error::numerical("orthogonal-quaternionic", "H^T H = -I in odd dimension"));
        }
        let m = n / 2;
        let mut pc = matcore::inverse(&decomp::antiorthogonal_reduce(&h, tol)?)?;
        let mut branch = String::from("orthogonal-quaternionic");
        let mut tag = if special { RealFormTag::SoH(m) } else { RealFormTag::OH(m) };
        if special && pc.determinant().re < 0.0 {
            if m % 2 == 1 {
                pc = matcore::swap_blocks(m) * pc;
                branch.push_str("+swap");
            } else {
                pc = grouprep::p0(n) * pc;
                tag = RealFormTag::SoHMinus(m);
                branch.push_str("+p0");
            }
        }
        certify(rep, tag, pc, lambda_sign, branch, tol)
    }
}

/// `G` in `O(n,C)` conjugating into the copy of `O(p,q)`, given the invariant
/// Hermitian form with `H^T H = I`.
/// `Re(Q Q*)^{-1/2} Q`. A real left factor keeps `conj(Q) H = Q` and makes
/// the rows orthonormal for the real inner product.
fn whiten_rows(q: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let gram = matcore::to_complex(&matcore::real_part(&(q * q.adjoint())));
    let eig = matcore::hermitian_eig(&gram, tol)?;
    if eig.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::numerical("orthogonal-real", "splitting rows are dependent"));
    }
    let d: Vec<f64> = eig.values.iter().map(|l| l.powf(-0.5)).collect();
    let r = &eig.vectors * matcore::real_diag(&d) * eig.vectors.adjoint();
    Ok(matcore::to_complex(&matcore::real_part(&r)) * q)
}

fn orthogonal_real_conjugator(h: &ComplexMatrix, tol: &Tolerance) -> Result<(ComplexMatrix, Signature)> {
    let n = h.nrows();
    let loose = tol.loosened(1e3);
    // conj(Q) H = Q makes Q rho Q^{-1} real.
    let q = whiten_rows(&decomp::real_splitting(h, &loose)?.q, tol)?;
    let q_inv = matcore::inverse(&q)?;
    let form = q_inv.transpose() * &q_inv;
    // A and B are real multiples of one form, so a good combination is as
    // well conditioned as `form` itself.
    let fs = matcore::singular_values(&form);
    let form_ratio = fs[n - 1] / fs[0];
    let a = matcore::to_complex(&matcore::real_part(&form));
    let b = matcore::to_complex(&matcore::imag_part(&form));
    let cmat = (0..=2 * LAMBDA0_CANDIDATES)
        .map(|k| {
            // 0, 1, -1, 2, -2, ...
            let l = if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) };
            &a + &b * c(f64::from(l), 0.0)
        })
        .find(|m| {
            let s = matcore::singular_values(m);
            s[n - 1] > LAMBDA0_SLACK * form_ratio * s[0]
        })
        .ok_or_else(|| Error::Conditioning("no invertible combination A + lambda_0 B found".into()))?;
    let cmat = matcore::hermitian_part(&cmat);
    let (mut r, mut sig) = matcore::sylvester_real(&cmat, &loose)?;
    if sig.p < sig.q {
        (r, sig) = matcore::sylvester_real(&(-&cmat), &loose)?;
    }
    let g = matcore::dpq(sig.p, sig.q) * r * q;
    // G^T G commutes with an irreducible orthogonal rep, so it is a scalar.
    let mu2 = matcore::fit_scalar(&(g.transpose() * &g), &matcore::identity(n));
    if mu2.norm() == 0.0 {
        return Err(Error::numerical("orthogonal-real", "conjugator is isotropic"));
    }
    Ok((g / mu2.sqrt(), sig))
}

/// Unitary polar factor of `P`, which conjugates `rep1` to `rep2` inside the
/// compact form.
pub fn compact_conjugator(
    rep1: &Representation,
    rep2: &Representation,
    p: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let kind = rep1.kind;
    let n = kind.n;
    if rep2.kind != kind || p.nrows() != n || p.ncols() != n || rep1.num_generators() != rep2.num_generators() {
        return Err(Error::Parameter("representations and conjugator do not match".into()));
    }
    let compact = compact_form(kind);
    for (name, rep) in [("first", rep1), ("second", rep2)] {
        for g in &rep.generators {
            if !validate_membership(g, Target::Form(compact), tol)?.passed() {
                return Err(Error::NotApplicable(format!("{name} representation is not in {compact}")));
            }
        }
    }
    let loose = tol.loosened(1e3);
    let conjugates = |m: &ComplexMatrix| -> Result<bool> {
        let inv = matcore::inverse(m)?;
        Ok(rep1.generators.iter().zip(&rep2.generators).all(|(a, b)| {
            let lhs = m * a * &inv;
            loose.accepts(matcore::fro(&(&lhs - b)), matcore::fro(b) * matcore::condition_number(m))
        }))
    };
    if !conjugates(p)? {
        return Err(Error::NotApplicable("P does not conjugate the representations".into()));
    }
    let mut u = decomp::polar(p, tol)?.u;
    match kind.family {
        Family::SL | Family::SO => {
            let det = u.determinant();
            if kind.family == Family::SO && det.re < 0.0 && n % 2 == 1 {
                u = -u;
            } else {
                u = matcore::to_unit_determinant(&u)?;
            }
        }
        _ => {}
    }
    if !conjugates(&u)? || !validate_membership(&u, Target::Form(compact), &loose)?.passed() {
        return Err(Error::numerical("compact", "unitary factor does not conjugate inside the compact form"));
    }
    Ok(u)
}

/// The compact real form of an ambient group.
pub fn compact_form(kind: GroupKind) -> RealFormTag {
    let n = kind.n;
    match kind.family {
        Family::GL => RealFormTag::U(n, 0),
        Family::SL => RealFormTag::Su(n, 0),
        Family::O => RealFormTag::OPq(n, 0),
        Family::SO => RealFormTag::SoPq(n, 0),
        Family::Sp => RealFormTag::Sp(n, 0),
    }
}
