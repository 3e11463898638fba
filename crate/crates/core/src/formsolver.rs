//! Invariant bilinear and Hermitian forms of a representation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commutant::{self, stacked_operator};
use crate::error::{Error, Result};
use crate::grouprep::Representation;
use crate::matcore::{self, c, ComplexMatrix, Tolerance, I, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Bilinear,
    Hermitian,
}

/// A linear space of invariant forms.
#[derive(Debug, Clone)]
pub struct FormSpace {
    pub kind: FormKind,
    /// Orthonormal (Frobenius) basis.
    pub basis: Vec<ComplexMatrix>,
}

impl FormSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Solves `rho(g)^T B rho(g) = B`, posed as `rho(g)^T B - B rho(g)^{-1} = 0`.
pub fn invariant_bilinear_space(rep: &Representation, tol: &Tolerance) -> Result<FormSpace> {
    let n = rep.dim();
    let inverses = rep.inverses()?;
    let pairs: Vec<_> = rep
        .generators
        .iter()
        .zip(&inverses)
        .map(|(g, gi)| (g.transpose(), gi.clone()))
        .collect();
    let space = matcore::null_space_with_floor(&stacked_operator(&pairs, n), tol, 1.0);
    let basis = space
        .basis
        .iter()
        .map(|v| {
            let mut b = matcore::unvectorize(v, n);
            matcore::normalize_phase(&mut b);
            b
        })
        .collect();
    Ok(FormSpace {
        kind: FormKind::Bilinear,
        basis,
    })
}

/// Orthonormal real basis of the `n^2`-dimensional space of Hermitian matrices.
fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(i, i)] = ONE;
        out.push(e);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut re = ComplexMatrix::zeros(n, n);
            re[(i, j)] = c(s, 0.0);
            re[(j, i)] = c(s, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(n, n);
            im[(i, j)] = I * s;
            im[(j, i)] = -I * s;
            out.push(im);
        }
    }
    out
}

/// Real basis of `{H = H* : rho(g)* H rho(g) = H}`, solved as
/// `rho(g)* H - H rho(g)^{-1} = 0` over real Hermitian coordinates.
pub fn invariant_hermitian_space(rep: &Representation, tol: &Tolerance) -> Result<FormSpace> {
    let n = rep.dim();
    let inverses = rep.inverses()?;
    let herm = hermitian_basis(n);
    let block = 2 * n * n;
    let rows = block * rep.num_generators().max(1);
    let mut op = DMatrix::<f64>::zeros(rows, herm.len());
    for (k, (g, gi)) in rep.generators.iter().zip(&inverses).enumerate() {
        let ga = g.adjoint();
        let scale = matcore::fro(g) + matcore::fro(gi);
        for (col, e) in herm.iter().enumerate() {
            let image = (&ga * e - e * gi) / c(scale, 0.0);
            for (idx, z) in image.iter().enumerate() {
                op[(k * block + idx, col)] = z.re;
                op[(k * block + n * n + idx, col)] = z.im;
            }
        }
    }
    let space = matcore::real_null_space_with_floor(&op, tol, 1.0);
    let basis = space
        .basis
        .iter()
        .map(|x| combine(&herm, x))
        .collect();
    Ok(FormSpace {
        kind: FormKind::Hermitian,
        basis,
    })
}

fn combine(herm: &[ComplexMatrix], x: &DVector<f64>) -> ComplexMatrix {
    let n = herm[0].nrows();
    let mut h = ComplexMatrix::zeros(n, n);
    for (e, &w) in herm.iter().zip(x.iter()) {
        h += e * c(w, 0.0);
    }
    h
}

/// Unit Frobenius norm; the largest-modulus diagonal entry made positive.
fn normalize_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let mut h = h / c(matcore::fro(h), 0.0);
    let n = h.nrows();
    let max = (0..n).map(|i| h[(i, i)].re.abs()).fold(0.0, f64::max);
    if let Some(i) = (0..n).find(|&i| h[(i, i)].re.abs() >= max * (1.0 - 1e-9)) {
        if h[(i, i)].re < 0.0 {
            h = -h;
        }
    }
    h
}

/// Attempts at a nondegenerate random combination.
const HERMITIAN_ATTEMPTS: usize = 8;

/// A nondegenerate invariant Hermitian form, if one exists.
///
/// Returns `None` when the solution space is trivial. A one-dimensional
/// space yields its element; larger spaces yield a seeded random combination.
pub fn invariant_hermitian(rep: &Representation, tol: &Tolerance) -> Result<Option<ComplexMatrix>> {
    let space = invariant_hermitian_space(rep, tol)?;
    let nondegenerate = |h: &ComplexMatrix| {
        let s = matcore::singular_values(h);
        s.last().copied().unwrap_or(0.0) > tol.rel.sqrt() * s.first().copied().unwrap_or(0.0)
    };
    match space.dimension() {
        0 => Ok(None),
        1 => {
            let h = normalize_hermitian(&space.basis[0]);
            if nondegenerate(&h) {
                Ok(Some(h))
            } else {
                Err(Error::Degenerate("the only invariant Hermitian form is degenerate".into()))
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(commutant::DEFAULT_SEED);
            for _ in 0..HERMITIAN_ATTEMPTS {
                let mut h = ComplexMatrix::zeros(rep.dim(), rep.dim());
                for b in &space.basis {
                    let w: f64 = rng.random_range(-1.0..1.0);
                    h += b * c(w, 0.0);
                }
                let h = normalize_hermitian(&h);
                if nondegenerate(&h) {
                    return Ok(Some(h));
                }
            }
            Err(Error::Degenerate(format!(
                "no nondegenerate element found in a {}-dimensional space of invariant Hermitian forms",
                space.dimension()
            )))
        }
    }
}

/// Relation fitted by [`normalize_lambda`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRelation {
    /// `H^T J H = mu J`.
    SymplecticJ,
    /// `H^T H = mu I`.
    OrthogonalI,
}

/// Fits the real scalar `mu` of the relation and rescales `H` so that it
/// holds with `mu = +1` or `-1`. Returns the scaled form and the sign.
pub fn normalize_lambda(h: &ComplexMatrix, relation: LambdaRelation, tol: &Tolerance) -> Result<(ComplexMatrix, i8)> {
    let n = h.nrows();
    if !matcore::is_square(h) || (relation == LambdaRelation::SymplecticJ && n % 2 != 0) {
        return Err(Error::Parameter(format!("normalize_lambda: unsuitable size {n}")));
    }
    let reference = match relation {
        LambdaRelation::SymplecticJ => matcore::j_matrix(n / 2),
        LambdaRelation::OrthogonalI => matcore::identity(n),
    };
    let quad = |m: &ComplexMatrix| match relation {
        LambdaRelation::SymplecticJ => m.transpose() * &reference * m,
        LambdaRelation::OrthogonalI => m.transpose() * m,
    };
    let lhs = quad(h);
    let mu = matcore::fit_scalar(&lhs, &reference);
    if mu.norm() == 0.0 || !mu.re.is_finite() {
        return Err(Error::Contract("fitted scalar vanishes".into()));
    }
    if !tol.accepts(mu.im.abs(), mu.norm()) {
        return Err(Error::Contract(format!(
            "fitted scalar {:.6e}{:+.6e}i is not real",
            mu.re, mu.im
        )));
    }
    let sign: i8 = if mu.re > 0.0 { 1 } else { -1 };
    let scaled = h * c(mu.norm().powf(-0.5), 0.0);
    let target = &reference * c(f64::from(sign), 0.0);
    let residual = matcore::fro(&(quad(&scaled) - &target));
    let scale = matcore::fro(&scaled).powi(2) * matcore::fro(&reference);
    if !tol.accepts(residual, scale) {
        return Err(Error::Contract(format!(
            "form does not satisfy the relation up to a scalar (residual {residual:.3e})"
        )));
    }
    Ok((scaled, sign))
}
