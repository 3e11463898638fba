//! Commutants, intertwiners, irreducibility and isotypic decomposition.
//!
//! Linear conditions on an unknown matrix `X` are vectorised column-major,
//! so `vec(A X B) = (B^T (x) A) vec(X)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grouprep::{Family, GroupKind, Representation};
use crate::matcore::{self, c, check_band, ComplexMatrix, NullSpace, Tolerance};

/// Default seed for the random elements drawn here.
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

/// Attempts allowed before an isotypic decomposition gives up.
const MAX_ATTEMPTS: u64 = 5;

pub(crate) fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

/// Stacks `X -> L_k X - X R_k` (as `n^2 x n^2` blocks), each block scaled by
/// `1 / (||L_k|| + ||R_k||)`.
pub(crate) fn stacked_operator(pairs: &[(ComplexMatrix, ComplexMatrix)], n: usize) -> ComplexMatrix {
    let id = matcore::identity(n);
    let rows = pairs.len().max(1) * n * n;
    let mut op = ComplexMatrix::zeros(rows, n * n);
    for (k, (left, right)) in pairs.iter().enumerate() {
        let block = id.kronecker(left) - right.transpose().kronecker(&id);
        let norm = matcore::fro(left) + matcore::fro(right);
        let block = if norm > 0.0 { block / c(norm, 0.0) } else { block };
        op.view_mut((k * n * n, 0), (n * n, n * n)).copy_from(&block);
    }
    op
}

fn commutant_space(rep: &Representation, tol: &Tolerance) -> NullSpace<Complex64> {
    let n = rep.dim();
    let pairs: Vec<_> = rep.generators.iter().map(|g| (g.clone(), g.clone())).collect();
    matcore::null_space_with_floor(&stacked_operator(&pairs, n), tol, 1.0)
}

fn to_matrices(basis: &[DVector<Complex64>], n: usize) -> Vec<ComplexMatrix> {
    basis
        .iter()
        .map(|v| {
            let mut m = matcore::unvectorize(v, n);
            matcore::normalize_phase(&mut m);
            m
        })
        .collect()
}

/// Orthonormal (Frobenius) basis of `{X : X rho(g) = rho(g) X for all g}`.
pub fn commutant_basis(rep: &Representation, tol: &Tolerance) -> Vec<ComplexMatrix> {
    to_matrices(&commutant_space(rep, tol).basis, rep.dim())
}

/// Orthonormal basis of the associative algebra generated by the generators,
/// grown by right multiplication from the identity.
pub fn algebra_basis(rep: &Representation, tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    let n = rep.dim();
    let full = n * n;
    let mut span = ComplexMatrix::zeros(full, 1);
    span.set_column(0, &(matcore::vectorize(&matcore::identity(n)) / c((n as f64).sqrt(), 0.0)));
    let mut spectrum = (vec![1.0], 0.0);
    loop {
        let current = span.ncols();
        if current == full {
            break;
        }
        let mut columns: Vec<DVector<Complex64>> =
            (0..current).map(|k| span.column(k).into_owned()).collect();
        for k in 0..current {
            let b = matcore::unvectorize(&columns[k], n);
            for g in &rep.generators {
                let prod = &b * g;
                let norm = matcore::fro(&prod);
                if norm > 0.0 {
                    columns.push(matcore::vectorize(&prod) / c(norm, 0.0));
                }
            }
        }
        let candidates = ComplexMatrix::from_columns(&columns);
        let (basis, values, threshold) = matcore::column_span(&candidates, tol);
        spectrum = (values, threshold);
        if basis.ncols() <= current {
            break;
        }
        span = basis;
    }
    check_band(&spectrum.0, spectrum.1)?;
    Ok((0..span.ncols())
        .map(|k| matcore::unvectorize(&span.column(k).into_owned(), n))
        .collect())
}

/// True iff the commutant is one-dimensional and the generated algebra is the
/// full matrix algebra.
pub fn is_irreducible(rep: &Representation, tol: &Tolerance) -> Result<bool> {
    let n = rep.dim();
    if n == 1 {
        return Ok(true);
    }
    let space = commutant_space(rep, tol);
    space.check_gap()?;
    if space.dim() != 1 {
        return Ok(false);
    }
    Ok(algebra_basis(rep, tol)?.len() == n * n)
}

/// Outcome of an intertwiner solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Intertwiner {
    /// Invertible `P` (unit Frobenius norm) with `P rho1(g) = rho2(g) P`.
    Invertible(ComplexMatrix),
    /// Solutions exist but the sampled one is singular.
    Singular,
    /// Only the zero map intertwines.
    None,
}

impl Intertwiner {
    pub fn matrix(&self) -> Option<&ComplexMatrix> {
        match self {
            Intertwiner::Invertible(p) => Some(p),
            _ => None,
        }
    }
}

/// Solves `P rho1(g) = rho2(g) P` for all generators.
///
/// A one-dimensional solution space yields its (phase-normalised) basis
/// element; larger spaces yield a seeded random combination.
pub fn intertwiner(rep1: &Representation, rep2: &Representation, tol: &Tolerance) -> Result<Intertwiner> {
    intertwiner_seeded(rep1, rep2, tol, DEFAULT_SEED)
}

pub fn intertwiner_seeded(
    rep1: &Representation,
    rep2: &Representation,
    tol: &Tolerance,
    seed: u64,
) -> Result<Intertwiner> {
    let n = rep1.dim();
    if rep2.dim() != n || rep1.num_generators() != rep2.num_generators() {
        return Err(Error::Parameter(format!(
            "intertwiner needs matching dimensions and generator counts, got {}/{} and {}/{}",
            n,
            rep1.num_generators(),
            rep2.dim(),
            rep2.num_generators()
        )));
    }
    let pairs: Vec<_> = rep2
        .generators
        .iter()
        .zip(&rep1.generators)
        .map(|(g2, g1)| (g2.clone(), g1.clone()))
        .collect();
    let space = matcore::null_space_with_floor(&stacked_operator(&pairs, n), tol, 1.0);
    let mut p = match space.dim() {
        0 => return Ok(Intertwiner::None),
        1 => matcore::unvectorize(&space.basis[0], n),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v = DVector::<Complex64>::zeros(n * n);
            for b in &space.basis {
                v += b * random_complex(&mut rng);
            }
            matcore::unvectorize(&v, n)
        }
    };
    p /= c(matcore::fro(&p), 0.0);
    matcore::normalize_phase(&mut p);
    if matcore::is_invertible(&p, tol) {
        Ok(Intertwiner::Invertible(p))
    } else {
        Ok(Intertwiner::Singular)
    }
}

/// Fails with a semi-simplicity error unless the trace form on the generated
/// algebra is nondegenerate.
pub fn check_semisimple(rep: &Representation, tol: &Tolerance) -> Result<()> {
    let basis = algebra_basis(rep, tol)?;
    let k = basis.len();
    let gram = ComplexMatrix::from_fn(k, k, |i, j| (&basis[i] * &basis[j]).trace());
    let s = matcore::singular_values(&gram);
    let hi = s.first().copied().unwrap_or(0.0);
    let lo = s.last().copied().unwrap_or(0.0);
    if hi == 0.0 || lo <= tol.rel.sqrt() * hi {
        return Err(Error::SemiSimplicity(format!(
            "trace form on the generated algebra (dimension {k}) is degenerate: smallest/largest singular value {:.3e}",
            if hi > 0.0 { lo / hi } else { 0.0 }
        )));
    }
    Ok(())
}

/// One isotypic component: an irreducible factor with its multiplicity.
#[derive(Debug, Clone)]
pub struct IsotypicBlock {
    /// The irreducible factor, as a `d x d` representation of kind `GL(d)`.
    pub irrep: Representation,
    pub multiplicity: usize,
    /// `n x (d * multiplicity)` basis; each consecutive group of `d` columns
    /// spans one copy on which the generators act by `irrep`.
    pub basis: ComplexMatrix,
}

impl IsotypicBlock {
    pub fn irrep_dim(&self) -> usize {
        self.irrep.dim()
    }
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    pub blocks: Vec<IsotypicBlock>,
}

impl IsotypicDecomposition {
    /// Concatenation of the block bases, so that `T^{-1} rho(g) T` is block
    /// diagonal with the copies in order.
    pub fn change_of_basis(&self) -> ComplexMatrix {
        let n: usize = self.blocks.iter().map(|b| b.basis.ncols()).sum();
        let rows = self.blocks.first().map_or(0, |b| b.basis.nrows());
        let mut t = ComplexMatrix::zeros(rows, n);
        let mut at = 0;
        for b in &self.blocks {
            t.view_mut((0, at), (rows, b.basis.ncols())).copy_from(&b.basis);
            at += b.basis.ncols();
        }
        t
    }

    /// The block diagonal image of generator `k` in the decomposed basis.
    pub fn block_generator(&self, k: usize) -> ComplexMatrix {
        let blocks: Vec<ComplexMatrix> = self
            .blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.irrep.generators[k].clone(), b.multiplicity))
            .collect();
        matcore::block_diag(&blocks)
    }

    /// `(irrep dimension, multiplicity)` pairs in block order.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.irrep_dim(), b.multiplicity)).collect()
    }
}

/// Rounded generator traces, used to order blocks deterministically.
pub(crate) fn trace_key(rep: &Representation) -> Vec<(i64, i64)> {
    rep.generators
        .iter()
        .map(|g| {
            let t = g.trace();
            ((t.re * 1e6).round() as i64, (t.im * 1e6).round() as i64)
        })
        .collect()
}

struct Piece {
    basis: ComplexMatrix,
    irrep: Representation,
}

fn restrict(rep: &Representation, w: &ComplexMatrix, tol: &Tolerance) -> Result<Representation> {
    let d = w.ncols();
    let w_pinv = w.adjoint();
    let mut gens = Vec::with_capacity(rep.num_generators());
    for g in &rep.generators {
        let image = g * w;
        let local = &w_pinv * &image;
        let defect = matcore::fro(&(&image - w * &local));
        if !tol.loosened(1e3).accepts(defect, matcore::fro(&image)) {
            return Err(Error::numerical(
                "isotypic",
                format!("eigenspace is not invariant (residual {defect:.3e})"),
            ));
        }
        gens.push(local);
    }
    Ok(Representation::unchecked(
        GroupKind {
            family: Family::GL,
            n: d,
        },
        gens,
    ))
}

/// Eigenspaces of a random commutant element, each expected to carry one
/// irreducible copy. `None` when the eigenvalue solver fails on this draw.
fn split_by_commutant(rep: &Representation, tol: &Tolerance, seed: u64) -> Result<Option<Vec<Piece>>> {
    let n = rep.dim();
    let basis = commutant_basis(rep, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = ComplexMatrix::zeros(n, n);
    for b in &basis {
        x += b * random_complex(&mut rng);
    }
    let scale = matcore::fro(&x).max(f64::MIN_POSITIVE);
    let Ok(eigenvalues) = matcore::eigenvalues(&x) else {
        return Ok(None);
    };
    // Cluster numerically repeated eigenvalues.
    let radius = 1e-6 * scale;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for mu in eigenvalues.iter() {
        match clusters.iter_mut().find(|(m, _)| (m - mu).norm() <= radius) {
            Some((m, k)) => {
                *m = (*m * (*k as f64) + mu) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((*mu, 1)),
        }
    }
    let mut pieces = Vec::with_capacity(clusters.len());
    for (mu, k) in clusters {
        let shifted = &x - matcore::identity(n) * mu;
        // Right singular vectors of the k smallest singular values.
        let d = matcore::svd(&shifted);
        let w = d.v.columns(n - k, k).into_owned();
        let irrep = restrict(rep, &w, tol)?;
        pieces.push(Piece { basis: w, irrep });
    }
    Ok(Some(pieces))
}

fn assemble(rep: &Representation, pieces: Option<Vec<Piece>>, tol: &Tolerance) -> Result<Option<IsotypicDecomposition>> {
    let Some(pieces) = pieces else {
        return Ok(None);
    };
    for p in &pieces {
        if !is_irreducible(&p.irrep, tol)? {
            return Ok(None);
        }
    }
    let mut blocks: Vec<IsotypicBlock> = Vec::new();
    for piece in pieces {
        let mut placed = false;
        for block in blocks.iter_mut() {
            if block.irrep.dim() != piece.irrep.dim() {
                continue;
            }
            // T rho_ref = rho_piece T, so the columns W T carry rho_ref.
            if let Intertwiner::Invertible(t) = intertwiner(&block.irrep, &piece.irrep, tol)? {
                let aligned = &piece.basis * t;
                block.basis = block.basis.clone().resize_horizontally(block.basis.ncols() + aligned.ncols(), Complex64::default());
                let start = block.basis.ncols() - aligned.ncols();
                block.basis.view_mut((0, start), (aligned.nrows(), aligned.ncols())).copy_from(&aligned);
                block.multiplicity += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            blocks.push(IsotypicBlock {
                irrep: piece.irrep,
                multiplicity: 1,
                basis: piece.basis,
            });
        }
    }
    blocks.sort_by(|a, b| {
        (a.irrep_dim(), trace_key(&a.irrep)).cmp(&(b.irrep_dim(), trace_key(&b.irrep)))
    });
    let total: usize = blocks.iter().map(|b| b.basis.ncols()).sum();
    if total != rep.dim() {
        return Ok(None);
    }
    let decomposition = IsotypicDecomposition { blocks };
    if !matcore::is_invertible(&decomposition.change_of_basis(), tol) {
        return Ok(None);
    }
    Ok(Some(decomposition))
}

/// Decomposes a semi-simple representation into isotypic components.
pub fn isotypic_decomposition(rep: &Representation, tol: &Tolerance) -> Result<IsotypicDecomposition> {
    isotypic_decomposition_seeded(rep, tol, DEFAULT_SEED)
}

pub fn isotypic_decomposition_seeded(
    rep: &Representation,
    tol: &Tolerance,
    seed: u64,
) -> Result<IsotypicDecomposition> {
    check_semisimple(rep, tol)?;
    for attempt in 0..MAX_ATTEMPTS {
        let s1 = seed.wrapping_add(2 * attempt);
        let s2 = seed.wrapping_add(2 * attempt + 1);
        let first = assemble(rep, split_by_commutant(rep, tol, s1)?, tol)?;
        let second = assemble(rep, split_by_commutant(rep, tol, s2)?, tol)?;
        if let (Some(a), Some(b)) = (first, second) {
            if a.shape() == b.shape() {
                return Ok(a);
            }
        }
    }
    Err(Error::numerical(
        "isotypic",
        format!("no two consistent decompositions in {MAX_ATTEMPTS} attempts"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{from_real_rows, from_rows, real_diag, I, ONE, ZERO};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn gl(gens: Vec<ComplexMatrix>) -> Representation {
        let n = gens[0].nrows();
        Representation::unchecked(GroupKind::new(Family::GL, n).unwrap(), gens)
    }

    fn unipotent_pair() -> Representation {
        gl(vec![
            from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]),
            from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]),
        ])
    }

    fn pauli_pair() -> Representation {
        // i sigma_x and i sigma_z
        gl(vec![
            from_rows(&[&[ZERO, I], &[I, ZERO]]),
            from_rows(&[&[I, ZERO], &[ZERO, -I]]),
        ])
    }

    #[test]
    fn commutant_dimensions() {
        let id = gl(vec![matcore::identity(2)]);
        assert_eq!(commutant_basis(&id, &tol()).len(), 4);
        assert_eq!(commutant_basis(&gl(vec![real_diag(&[2.0, 3.0])]), &tol()).len(), 2);
        assert_eq!(commutant_basis(&unipotent_pair(), &tol()).len(), 1);
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&gl(vec![real_diag(&[5.0])]), &tol()).unwrap());
        assert!(!is_irreducible(&gl(vec![real_diag(&[2.0, 3.0])]), &tol()).unwrap());
        assert!(is_irreducible(&pauli_pair(), &tol()).unwrap());
        // One-dimensional commutant but a common invariant line.
        let borel = gl(vec![
            from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]),
            real_diag(&[1.0, 3.0]),
        ]);
        assert_eq!(commutant_basis(&borel, &tol()).len(), 1);
        assert!(!is_irreducible(&borel, &tol()).unwrap());
    }

    #[test]
    fn intertwiner_of_identical_irreducibles_is_scalar() {
        let rep = pauli_pair();
        let p = intertwiner(&rep, &rep, &tol()).unwrap();
        let p = p.matrix().unwrap();
        let expected = matcore::identity(2) / c(2f64.sqrt(), 0.0);
        assert!(matcore::fro(&(p - expected)) < 1e-12);
    }

    #[test]
    fn intertwiner_recovers_scrambler() {
        let rep = unipotent_pair();
        let p0 = from_rows(&[&[c(1.0, 0.5), c(0.2, 0.0)], &[c(-0.3, 0.1), c(0.9, -0.4)]]);
        let scrambled = rep.conjugated(&p0).unwrap();
        let p = intertwiner(&rep, &scrambled, &tol()).unwrap();
        let p = p.matrix().unwrap().clone();
        let s = matcore::fit_scalar(&p, &p0);
        assert!(matcore::fro(&(p - &p0 * s)) < 1e-10);
    }

    #[test]
    fn inequivalent_irreducibles_have_no_intertwiner() {
        let a = unipotent_pair();
        let b = gl(vec![
            from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]),
            from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]),
        ]);
        assert_eq!(intertwiner(&a, &b, &tol()).unwrap(), Intertwiner::None);
    }

    #[test]
    fn isotypic_examples() {
        let irr = pauli_pair();
        let d = isotypic_decomposition(&irr, &tol()).unwrap();
        assert_eq!(d.shape(), vec![(2, 1)]);

        let doubled = gl(irr
            .generators
            .iter()
            .map(|g| matcore::block_diag(&[g.clone(), g.clone()]))
            .collect());
        let d = isotypic_decomposition(&doubled, &tol()).unwrap();
        assert_eq!(d.shape(), vec![(2, 2)]);

        let diag = gl(vec![real_diag(&[2.0, 3.0, 2.0, 5.0])]);
        let d = isotypic_decomposition(&diag, &tol()).unwrap();
        let mut shape = d.shape();
        shape.sort();
        assert_eq!(shape, vec![(1, 1), (1, 1), (1, 2)]);
    }

    #[test]
    fn isotypic_reassembles_generators() {
        let irr = pauli_pair();
        let other = gl(vec![real_diag(&[2.0]), real_diag(&[-1.0])]);
        let sum = gl(irr
            .generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| matcore::block_diag(&[a.clone(), b.clone(), a.clone()]))
            .collect());
        let p = from_rows(&[
            &[ONE, c(0.3, 0.1), ZERO, c(0.0, 0.2), ZERO],
            &[ZERO, ONE, c(0.5, 0.0), ZERO, ZERO],
            &[c(0.1, 0.0), ZERO, ONE, ZERO, c(0.2, -0.2)],
            &[ZERO, ZERO, ZERO, ONE, c(0.4, 0.0)],
            &[c(0.0, 0.3), ZERO, ZERO, ZERO, ONE],
        ]);
        let scrambled = sum.conjugated(&p).unwrap();
        let d = isotypic_decomposition(&scrambled, &tol()).unwrap();
        assert_eq!(d.shape(), vec![(1, 1), (2, 2)]);
        let t = d.change_of_basis();
        let tinv = matcore::inverse(&t).unwrap();
        for (k, g) in scrambled.generators.iter().enumerate() {
            let back = &t * d.block_generator(k) * &tinv;
            assert!(matcore::fro(&(back - g)) < 1e-8);
        }
    }

    #[test]
    fn non_semisimple_is_rejected() {
        let jordan = gl(vec![from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])]);
        assert!(matches!(
            isotypic_decomposition(&jordan, &tol()),
            Err(Error::SemiSimplicity(_))
        ));
    }
}
