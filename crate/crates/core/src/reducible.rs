//! Semi-simple representations in `GL(n,C)`: pairing of irreducible factors
//! under an involution and assembly of a global conjugator.

use serde_json::{json, Value};

use crate::classifier;
use crate::commutant::{self, Intertwiner, IsotypicDecomposition};
use crate::error::{Error, Result};
use crate::grouprep::{
    matrix_to_value, validate_membership, EquationCheck, Family, MembershipReport, RealFormTag, Representation,
    Target,
};
use crate::invariants::{self, Involution};
use crate::matcore::{self, c, ComplexMatrix, Signature, Tolerance};

/// How the isotypic blocks pair up under the involution.
#[derive(Debug, Clone)]
pub struct PhiPairing {
    pub which: Involution,
    pub decomposition: IsotypicDecomposition,
    /// `(block, multiplicity)` for blocks conjugate to their own image.
    pub self_paired: Vec<(usize, usize)>,
    /// `(block, partner, multiplicity)` with `block < partner`.
    pub cross_paired: Vec<(usize, usize, usize)>,
}

fn require_gl(rep: &Representation) -> Result<()> {
    match rep.kind.family {
        Family::GL | Family::SL => Ok(()),
        other => Err(Error::NotApplicable(format!(
            "reducible classification is only available for GL and SL, not {}",
            other.name()
        ))),
    }
}

pub fn split_phi_stable(rep: &Representation, which: Involution, tol: &Tolerance) -> Result<PhiPairing> {
    split_phi_stable_seeded(rep, which, tol, commutant::DEFAULT_SEED)
}

pub fn split_phi_stable_seeded(
    rep: &Representation,
    which: Involution,
    tol: &Tolerance,
    seed: u64,
) -> Result<PhiPairing> {
    require_gl(rep)?;
    let decomposition = commutant::isotypic_decomposition_seeded(rep, tol, seed)?;
    if !invariants::is_phi_fixed(rep, which, tol)?.fixed {
        return Err(Error::NotApplicable(format!("character is not fixed by {which}")));
    }
    let blocks = &decomposition.blocks;
    let mut partner: Vec<Option<usize>> = vec![None; blocks.len()];
    for i in 0..blocks.len() {
        if partner[i].is_some() {
            continue;
        }
        let image = invariants::involution_image(&blocks[i].irrep, which)?;
        // Try the block itself first, then the unmatched ones in order.
        let candidates = std::iter::once(i).chain((0..blocks.len()).filter(|&j| j != i && partner[j].is_none()));
        for j in candidates {
            if blocks[j].irrep_dim() != blocks[i].irrep_dim() {
                continue;
            }
            if let Intertwiner::Invertible(_) = commutant::intertwiner(&blocks[j].irrep, &image, tol)? {
                partner[i] = Some(j);
                partner[j] = Some(i);
                break;
            }
        }
        if partner[i].is_none() {
            return Err(Error::Contract(format!(
                "isotypic block {i} has no partner under {which}"
            )));
        }
    }
    let mut self_paired = Vec::new();
    let mut cross_paired = Vec::new();
    for (i, p) in partner.iter().enumerate() {
        let j = p.expect("every block is matched");
        let m = blocks[i].multiplicity;
        if j == i {
            self_paired.push((i, m));
        } else if i < j {
            if blocks[j].multiplicity != m {
                return Err(Error::Contract(format!(
                    "paired blocks {i} and {j} have multiplicities {m} and {}",
                    blocks[j].multiplicity
                )));
            }
            cross_paired.push((i, j, m));
        }
    }
    Ok(PhiPairing {
        which,
        decomposition,
        self_paired,
        cross_paired,
    })
}

/// `rho (+) Phi(rho)` together with a conjugator into the standard form.
#[derive(Debug, Clone)]
pub struct DoubleBlock {
    pub rep: Representation,
    /// Conjugator: `GL(d,H)` block layout for `Phi1`, `U(d,d)` for `Phi2`.
    pub p: ComplexMatrix,
    /// `[[0, I], [I, 0]]`, preserved by the doubled representation (`Phi2` only).
    pub form: Option<ComplexMatrix>,
    pub tag: RealFormTag,
}

/// `[[I, I], [-I, I]] / sqrt 2` for `Phi1`; `[[I, I], [I, -I]] / sqrt 2` for `Phi2`.
fn doubling_matrix(d: usize, which: Involution) -> ComplexMatrix {
    let id = matcore::identity(d);
    let lower = match which {
        Involution::Phi1 => -&id,
        Involution::Phi2 => id.clone(),
    };
    let mut m = ComplexMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&id);
    m.view_mut((0, d), (d, d)).copy_from(&id);
    m.view_mut((d, 0), (d, d)).copy_from(&lower);
    let last = match which {
        Involution::Phi1 => id,
        Involution::Phi2 => -id,
    };
    m.view_mut((d, d), (d, d)).copy_from(&last);
    m * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

pub fn double_block_conjugate(subrep: &Representation, which: Involution) -> Result<DoubleBlock> {
    let d = subrep.dim();
    let image = invariants::involution_image(subrep, which)?;
    let gens = subrep
        .generators
        .iter()
        .zip(&image.generators)
        .map(|(a, b)| matcore::block_diag(&[a.clone(), b.clone()]))
        .collect();
    let rep = Representation::unchecked(
        crate::grouprep::GroupKind {
            family: Family::GL,
            n: 2 * d,
        },
        gens,
    );
    let (form, tag) = match which {
        Involution::Phi1 => (None, RealFormTag::GlH(d)),
        Involution::Phi2 => (Some(matcore::swap_blocks(d)), RealFormTag::U(d, d)),
    };
    Ok(DoubleBlock {
        rep,
        p: doubling_matrix(d, which),
        form,
        tag,
    })
}

/// Overall shape of a semi-simple classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemisimpleTag {
    Single(RealFormTag),
    /// `GL(real, R) (+) GL(quaternionic, H)` with both parts nonzero.
    Composite { real: usize, quaternionic: usize },
}

impl SemisimpleTag {
    pub fn name(&self) -> String {
        match self {
            SemisimpleTag::Single(t) => t.name().to_string(),
            SemisimpleTag::Composite { .. } => "GL_R+GL_H".into(),
        }
    }

    pub fn params(&self) -> Vec<usize> {
        match self {
            SemisimpleTag::Single(t) => t.params(),
            SemisimpleTag::Composite { real, quaternionic } => vec![*real, *quaternionic],
        }
    }
}

impl std::fmt::Display for SemisimpleTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SemisimpleTag::Single(t) => write!(f, "{t}"),
            SemisimpleTag::Composite { real, quaternionic } => write!(f, "GL_R({real})+GL_H({quaternionic})"),
        }
    }
}

/// Local classification of one isotypic block or cross pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCertificate {
    pub block: usize,
    pub partner: Option<usize>,
    pub multiplicity: usize,
    /// Tag of a single copy (the doubled copy for cross pairs).
    pub tag: RealFormTag,
    pub branch: String,
}

impl BlockCertificate {
    pub fn to_value(&self) -> Value {
        json!({
            "block": self.block,
            "partner": self.partner,
            "multiplicity": self.multiplicity,
            "tag": self.tag.name(),
            "params": self.tag.params(),
            "branch": self.branch,
        })
    }

    /// Signature contributed by all copies, for unitary tags.
    pub fn signature(&self) -> Option<Signature> {
        match self.tag {
            RealFormTag::U(p, q) | RealFormTag::Su(p, q) => {
                Some(Signature::new(p * self.multiplicity, q * self.multiplicity))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SemisimpleCertificate {
    pub tag: SemisimpleTag,
    pub p: ComplexMatrix,
    pub residuals: Vec<f64>,
    pub blocks: Vec<BlockCertificate>,
    pub branch: String,
}

impl SemisimpleCertificate {
    pub fn to_value(&self) -> Value {
        json!({
            "tag": self.tag.name(),
            "params": self.tag.params(),
            "P": matrix_to_value(&self.p),
            "residuals": self.residuals,
            "lambda_sign": Value::Null,
            "branch": self.branch,
            "blocks": self.blocks.iter().map(BlockCertificate::to_value).collect::<Vec<_>>(),
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of the block signatures (`Phi2` only).
    pub fn block_signature(&self) -> Option<Signature> {
        self.blocks.iter().try_fold(Signature::new(0, 0), |acc, b| {
            b.signature().map(|s| Signature::new(acc.p + s.p, acc.q + s.q))
        })
    }
}

/// A group of coordinates (in the decomposed basis) with its local conjugator.
struct Piece {
    coords: Vec<usize>,
    conj: ComplexMatrix,
    layout: Layout,
}

#[derive(Clone, Copy)]
enum Layout {
    /// First `p` coordinates positive, the rest negative.
    Signed { p: usize },
    Real,
    /// Quaternionic block layout with half size `m`.
    Quaternionic { m: usize },
}

pub fn classify_semisimple(rep: &Representation, which: Involution, tol: &Tolerance) -> Result<SemisimpleCertificate> {
    classify_semisimple_seeded(rep, which, tol, commutant::DEFAULT_SEED)
}

pub fn classify_semisimple_seeded(
    rep: &Representation,
    which: Involution,
    tol: &Tolerance,
    seed: u64,
) -> Result<SemisimpleCertificate> {
    let pairing = split_phi_stable_seeded(rep, which, tol, seed)?;
    let dec = &pairing.decomposition;
    let mut offsets = Vec::with_capacity(dec.blocks.len());
    let mut at = 0;
    for b in &dec.blocks {
        offsets.push(at);
        at += b.basis.ncols();
    }
    let copy_coords = |k: usize, copy: usize| -> Vec<usize> {
        let d = dec.blocks[k].irrep_dim();
        (offsets[k] + copy * d..offsets[k] + (copy + 1) * d).collect()
    };

    let mut pieces = Vec::new();
    let mut blocks = Vec::new();
    for &(k, m) in &pairing.self_paired {
        let irrep = &dec.blocks[k].irrep;
        let cert = classifier::classify_irreducible(irrep, which, tol)?;
        let layout = match cert.tag {
            RealFormTag::U(p, _) => Layout::Signed { p },
            RealFormTag::GlR(_) => Layout::Real,
            RealFormTag::GlH(half) => Layout::Quaternionic { m: half },
            other => {
                return Err(Error::numerical(
                    "semisimple",
                    format!("unexpected block tag {other}"),
                ))
            }
        };
        for copy in 0..m {
            pieces.push(Piece {
                coords: copy_coords(k, copy),
                conj: cert.p.clone(),
                layout,
            });
        }
        blocks.push(BlockCertificate {
            block: k,
            partner: None,
            multiplicity: m,
            tag: cert.tag,
            branch: cert.branch,
        });
    }
    for &(i, j, m) in &pairing.cross_paired {
        let left = &dec.blocks[i].irrep;
        let image = invariants::involution_image(left, which)?;
        let align = match commutant::intertwiner(&dec.blocks[j].irrep, &image, tol)? {
            Intertwiner::Invertible(t) => t,
            _ => {
                return Err(Error::numerical(
                    "semisimple",
                    format!("blocks {i} and {j} stopped being paired"),
                ))
            }
        };
        let d = left.dim();
        let double = double_block_conjugate(left, which)?;
        let conj = &double.p * matcore::block_diag(&[matcore::identity(d), align]);
        let layout = match which {
            Involution::Phi1 => Layout::Quaternionic { m: d },
            Involution::Phi2 => Layout::Signed { p: d },
        };
        for copy in 0..m {
            let mut coords = copy_coords(i, copy);
            coords.extend(copy_coords(j, copy));
            pieces.push(Piece {
                coords,
                conj: conj.clone(),
                layout,
            });
        }
        blocks.push(BlockCertificate {
            block: i,
            partner: Some(j),
            multiplicity: m,
            tag: double.tag,
            branch: "doubled".into(),
        });
    }

    let n = rep.dim();
    let special = rep.kind.family == Family::SL;
    // Position of each local coordinate (piece, index) in the final order.
    let order: Vec<(usize, usize)>;
    let tag;
    match which {
        Involution::Phi2 => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (pi, piece) in pieces.iter().enumerate() {
                let Layout::Signed { p } = piece.layout else { unreachable!() };
                for r in 0..piece.coords.len() {
                    if r < p {
                        pos.push((pi, r));
                    } else {
                        neg.push((pi, r));
                    }
                }
            }
            let (p, q) = (pos.len(), neg.len());
            let sig = if p >= q {
                order = [pos, neg].concat();
                Signature::new(p, q)
            } else {
                order = [neg, pos].concat();
                Signature::new(q, p)
            };
            tag = SemisimpleTag::Single(if special {
                RealFormTag::Su(sig.p, sig.q)
            } else {
                RealFormTag::U(sig.p, sig.q)
            });
        }
        Involution::Phi1 => {
            let mut real = Vec::new();
            let mut first = Vec::new();
            let mut second = Vec::new();
            for (pi, piece) in pieces.iter().enumerate() {
                match piece.layout {
                    Layout::Real => real.extend((0..piece.coords.len()).map(|r| (pi, r))),
                    Layout::Quaternionic { m } => {
                        first.extend((0..m).map(|r| (pi, r)));
                        second.extend((m..2 * m).map(|r| (pi, r)));
                    }
                    Layout::Signed { .. } => unreachable!(),
                }
            }
            let (r1, r2) = (real.len(), first.len());
            order = [real, first, second].concat();
            tag = match (r1, r2) {
                (_, 0) => SemisimpleTag::Single(if special { RealFormTag::SlR(n) } else { RealFormTag::GlR(n) }),
                (0, _) => SemisimpleTag::Single(if special { RealFormTag::SlH(r2) } else { RealFormTag::GlH(r2) }),
                _ => SemisimpleTag::Composite {
                    real: r1,
                    quaternionic: r2,
                },
            };
        }
    }

    // P = Pi * blockdiag(local conjugators) * Q * T^{-1}, written directly as
    // rows: row `r` of the result is row `local` of piece `pi`, spread over
    // the piece's coordinates.
    let t_inv = matcore::inverse(&dec.change_of_basis())?;
    let mut local = ComplexMatrix::zeros(n, n);
    for (row, &(pi, r)) in order.iter().enumerate() {
        let piece = &pieces[pi];
        for (col_local, &col) in piece.coords.iter().enumerate() {
            local[(row, col)] = piece.conj[(r, col_local)];
        }
    }
    let mut p = local * t_inv;
    if special {
        p = matcore::to_unit_determinant(&p)?;
    }
    let mut cert = SemisimpleCertificate {
        tag,
        p,
        residuals: Vec::new(),
        blocks,
        branch: format!("semisimple-{which}"),
    };
    let report = verify_semisimple(rep, &cert, tol)?;
    cert.residuals = report.iter().map(MembershipReport::max_residual).collect();
    if !report.iter().all(MembershipReport::passed) {
        return Err(Error::numerical(
            &cert.branch,
            format!(
                "conjugated generators miss {} (max residual {:.3e})",
                cert.tag,
                cert.max_residual()
            ),
        ));
    }
    Ok(cert)
}

fn relative_check(equation: &str, residual: f64, scale: f64, tol: &Tolerance) -> EquationCheck {
    let scale = scale.max(f64::MIN_POSITIVE);
    EquationCheck {
        equation: equation.into(),
        residual: residual / scale,
        bound: tol.rel + tol.abs / scale,
    }
}

/// Membership of every `P rho(g) P^{-1}` in the certificate's tag.
pub fn verify_semisimple(
    rep: &Representation,
    cert: &SemisimpleCertificate,
    tol: &Tolerance,
) -> Result<Vec<MembershipReport>> {
    let conjugated = rep.conjugated(&cert.p)?;
    conjugated
        .generators
        .iter()
        .map(|g| match cert.tag {
            SemisimpleTag::Single(t) => validate_membership(g, Target::Form(t), tol),
            SemisimpleTag::Composite { real, quaternionic } => {
                let mut report = validate_membership(g, Target::Group(rep.kind), tol)?;
                let scale = matcore::fro(g);
                let r1 = real;
                let r2 = 2 * quaternionic;
                let off = matcore::fro(&g.view((0, r1), (r1, r2)).into_owned())
                    + matcore::fro(&g.view((r1, 0), (r2, r1)).into_owned());
                report.checks.push(relative_check("off-diagonal blocks vanish", off, scale, tol));
                let top = g.view((0, 0), (r1, r1)).into_owned();
                report
                    .checks
                    .push(relative_check("real block", matcore::imag_part(&top).norm(), scale, tol));
                let bottom = g.view((r1, r1), (r2, r2)).into_owned();
                let j = matcore::j_matrix(quaternionic);
                let q = matcore::fro(&(&bottom * &j - &j * bottom.conjugate()));
                report.checks.push(relative_check("quaternionic block", q, scale, tol));
                report.target = cert.tag.to_string();
                Ok(report)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouprep::GroupKind;
    use crate::matcore::{from_rows, real_diag, I};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn gl(gens: Vec<ComplexMatrix>) -> Representation {
        let n = gens[0].nrows();
        Representation::unchecked(GroupKind::new(Family::GL, n).unwrap(), gens)
    }

    fn cdiag(d: &[num_complex::Complex64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d))
    }

    #[test]
    fn pairing_examples() {
        let p = split_phi_stable(&gl(vec![real_diag(&[2.0, 3.0])]), Involution::Phi1, &tol()).unwrap();
        assert_eq!(p.self_paired.len(), 2);
        assert!(p.cross_paired.is_empty());

        let r = gl(vec![cdiag(&[c(1.0, 1.0), c(1.0, -1.0)])]);
        let p = split_phi_stable(&r, Involution::Phi1, &tol()).unwrap();
        assert!(p.self_paired.is_empty());
        assert_eq!(p.cross_paired.len(), 1);

        let p = split_phi_stable(&gl(vec![real_diag(&[2.0, 0.5])]), Involution::Phi2, &tol()).unwrap();
        assert_eq!(p.cross_paired, vec![(0, 1, 1)]);
    }

    #[test]
    fn double_block_examples() {
        let scalar = gl(vec![real_diag(&[2.0])]);
        let db = double_block_conjugate(&scalar, Involution::Phi2).unwrap();
        let g = &db.rep.generators[0];
        assert_eq!(*g, real_diag(&[2.0, 0.5]));
        let form = db.form.unwrap();
        assert!(matcore::fro(&(g.adjoint() * &form * g - &form)) == 0.0);
        assert_eq!(matcore::signature(&form, &tol()).unwrap(), Signature::new(1, 1));

        let imag = gl(vec![cdiag(&[I])]);
        let db = double_block_conjugate(&imag, Involution::Phi1).unwrap();
        let p_inv = matcore::inverse(&db.p).unwrap();
        let m = &db.p * &db.rep.generators[0] * p_inv;
        let j = matcore::j_matrix(1);
        assert!(matcore::fro(&(&m * &j - &j * m.conjugate())) < 1e-15);

        let id = gl(vec![matcore::identity(2)]);
        let db = double_block_conjugate(&id, Involution::Phi1).unwrap();
        let p_inv = matcore::inverse(&db.p).unwrap();
        let m = &db.p * &db.rep.generators[0] * p_inv;
        assert!(matcore::fro(&(m - matcore::identity(4))) < 1e-15);
    }

    #[test]
    fn semisimple_examples() {
        let cert = classify_semisimple(&gl(vec![real_diag(&[2.0, 3.0])]), Involution::Phi1, &tol()).unwrap();
        assert_eq!(cert.tag, SemisimpleTag::Single(RealFormTag::GlR(2)));

        let r = gl(vec![cdiag(&[c(1.0, 1.0), c(1.0, -1.0)])]);
        let cert = classify_semisimple(&r, Involution::Phi1, &tol()).unwrap();
        assert_eq!(cert.tag, SemisimpleTag::Single(RealFormTag::GlH(1)));

        let cert = classify_semisimple(&gl(vec![real_diag(&[2.0, 0.5])]), Involution::Phi2, &tol()).unwrap();
        assert_eq!(cert.tag, SemisimpleTag::Single(RealFormTag::U(1, 1)));
        assert_eq!(cert.block_signature(), Some(Signature::new(1, 1)));
    }

    #[test]
    fn composite_real_and_quaternionic() {
        // A real scalar plus a conjugate pair, scrambled.
        let d = cdiag(&[c(3.0, 0.0), c(1.0, 2.0), c(1.0, -2.0)]);
        let s = from_rows(&[
            &[c(1.0, 0.2), c(0.3, 0.0), c(0.0, -0.5)],
            &[c(0.1, 0.0), c(1.0, 0.0), c(0.4, 0.4)],
            &[c(-0.2, 0.3), c(0.0, 0.1), c(1.0, -0.1)],
        ]);
        let r = gl(vec![d]).conjugated(&s).unwrap();
        let cert = classify_semisimple(&r, Involution::Phi1, &tol()).unwrap();
        assert_eq!(
            cert.tag,
            SemisimpleTag::Composite {
                real: 1,
                quaternionic: 1
            }
        );
        let v = cert.to_value();
        assert_eq!(v["tag"], "GL_R+GL_H");
        assert_eq!(v["blocks"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn not_fixed_is_rejected() {
        let r = gl(vec![cdiag(&[c(1.0, 1.0), c(2.0, 0.0)])]);
        assert!(matches!(
            classify_semisimple(&r, Involution::Phi1, &tol()),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn non_semisimple_is_rejected() {
        let r = gl(vec![crate::matcore::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])]);
        assert!(matches!(
            classify_semisimple(&r, Involution::Phi2, &tol()),
            Err(Error::SemiSimplicity(_))
        ));
    }
}
