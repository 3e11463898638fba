//! Test-side generators and oracles, written without the library's samplers.
#![allow(dead_code)]

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use realform::matcore::{self, c};
use realform::ComplexMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| c(gaussian(rng), gaussian(rng)))
}

pub fn real_gaussian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| c(gaussian(rng), 0.0))
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let x = complex_gaussian(n, rng);
    (&x + x.adjoint()) * c(0.5, 0.0)
}

pub fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    loop {
        let m = complex_gaussian(n, rng);
        if matcore::condition_number(&m) < 1e4 {
            return m;
        }
    }
}

pub fn scaled(m: &ComplexMatrix, s: f64) -> ComplexMatrix {
    m * c(s, 0.0)
}

/// Element of `O(n, C)` with the requested determinant sign.
pub fn random_complex_orthogonal(n: usize, negative: bool, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let x = complex_gaussian(n, rng);
    let skew = scaled(&(&x - x.transpose()), 0.25);
    let mut m = skew.exp();
    if negative {
        let mut d = vec![1.0; n];
        d[n - 1] = -1.0;
        m = matcore::real_diag(&d) * m;
    }
    m
}

/// Element of `Sp(2n, C)`, the exponential of `J B` with `B` symmetric.
pub fn random_complex_symplectic(half: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let b = complex_gaussian(2 * half, rng);
    let sym = scaled(&(&b + b.transpose()), 0.2);
    (matcore::j_matrix(half) * sym).exp()
}

/// Compact unitary element `exp(X)` with `X` anti-Hermitian, traceless when asked.
pub fn random_unitary(n: usize, special: bool, rng: &mut ChaCha8Rng) -> (ComplexMatrix, ComplexMatrix) {
    let h = random_hermitian(n, rng);
    let mut x = h * c(0.0, 0.6);
    if special {
        let tr = x.trace() / c(n as f64, 0.0);
        for i in 0..n {
            x[(i, i)] -= tr;
        }
    }
    (x.exp(), x)
}

/// Real rotation `exp(X)` with `X` real skew-symmetric.
pub fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> (ComplexMatrix, ComplexMatrix) {
    let a = real_gaussian(n, rng);
    let x = scaled(&(&a - a.transpose()), 0.4);
    (x.exp(), x)
}

/// `[[A, -conj(B)], [B, conj(A)]]`.
pub fn quaternionic(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let m = a.nrows();
    let mut out = ComplexMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((0, m), (m, m)).copy_from(&(-b.conjugate()));
    out.view_mut((m, 0), (m, m)).copy_from(b);
    out.view_mut((m, m), (m, m)).copy_from(&a.conjugate());
    out
}

pub fn rel_err(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    matcore::fro(&(lhs - rhs)) / matcore::fro(rhs).max(1.0)
}

// -------------------------------------------------------------------------
// Brute-force invariant-subspace search
// -------------------------------------------------------------------------

/// Singular-value ratio below which a Krylov span is declared rank deficient.
pub const ORACLE_RANK_CUT: f64 = 1e-7;
/// Ratios inside `[ORACLE_BAND_LOW, ORACLE_RANK_CUT)` are too close to call.
pub const ORACLE_BAND_LOW: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Irreducible,
    Reducible,
    Undecided,
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn right_null_vector(m: &ComplexMatrix) -> DVector<Complex64> {
    let svd = to_faer(m).svd().expect("svd");
    let v = svd.V();
    let k = m.ncols() - 1;
    DVector::from_fn(m.ncols(), |i, _| v[(i, k)])
}

/// Smallest-to-largest singular value ratio of the span of the orbit of `v`
/// under words of length `< n` in the generators.
fn krylov_ratio(v: &DVector<Complex64>, gens: &[ComplexMatrix]) -> f64 {
    let n = v.len();
    let mut frontier = vec![v.normalize()];
    let mut all = frontier.clone();
    for _ in 1..n {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let u = g * w;
                next.push(u.normalize());
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let span = ComplexMatrix::from_columns(&all);
    let sv = to_faer(&span).singular_values().expect("svd");
    sv[n - 1] / sv[0]
}

/// An invariant subspace contains an eigenvector of every element of the
/// algebra; with a combination `A` of simple spectrum the lines to test are
/// its `n` eigenlines, and each is invariant-generating iff its orbit span is
/// proper.
pub fn brute_force_irreducible(gens: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> OracleVerdict {
    let n = gens[0].nrows();
    if n == 1 {
        return OracleVerdict::Irreducible;
    }
    let a = loop {
        let mut a = ComplexMatrix::zeros(n, n);
        for g in gens {
            a += g * c(gaussian(rng), gaussian(rng));
        }
        if gens.len() > 1 {
            a += &gens[0] * &gens[1] * c(gaussian(rng), gaussian(rng));
        }
        let Ok(eig) = to_faer(&a).eigenvalues() else {
            continue;
        };
        let scale = matcore::fro(&a);
        let simple = (0..n).all(|i| (i + 1..n).all(|j| (eig[i] - eig[j]).norm() > 1e-4 * scale));
        if simple {
            break (a, eig);
        }
    };
    let (a, eig) = a;
    let mut worst = f64::INFINITY;
    for lambda in eig {
        let shifted = &a - ComplexMatrix::identity(n, n) * lambda;
        let v = right_null_vector(&shifted);
        worst = worst.min(krylov_ratio(&v, gens));
    }
    if worst < ORACLE_BAND_LOW {
        OracleVerdict::Reducible
    } else if worst < ORACLE_RANK_CUT {
        OracleVerdict::Undecided
    } else {
        OracleVerdict::Irreducible
    }
}

/// Exponentials of block upper triangular matrices, so the first `k`
/// coordinates span a common invariant subspace, conjugated by a random
/// invertible matrix.
pub fn reducible_instance(n: usize, k: usize, gens: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    let p = random_invertible(n, rng);
    let p_inv = p.clone().try_inverse().expect("well conditioned");
    (0..gens)
        .map(|_| {
            let mut x = scaled(&complex_gaussian(n, rng), 0.5);
            for i in k..n {
                for j in 0..k {
                    x[(i, j)] = c(0.0, 0.0);
                }
            }
            &p * x.exp() * &p_inv
        })
        .collect()
}

pub fn irreducible_candidate(n: usize, gens: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    (0..gens)
        .map(|_| scaled(&complex_gaussian(n, rng), 0.5).exp())
        .collect()
}

// -------------------------------------------------------------------------
// Direct sums
// -------------------------------------------------------------------------

/// Blocks of a `Phi2` direct sum: self-paired `U(p,q)` pieces and cross pairs
/// `rho (+) rho^{-*}`, with the signature each one contributes.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub generators: Vec<ComplexMatrix>,
    /// Normalized `(max, min)` signature per block, sorted.
    pub block_signatures: Vec<(usize, usize)>,
}

fn normalized(p: usize, q: usize) -> (usize, usize) {
    (p.max(q), p.min(q))
}

fn generic_gl(d: usize, gens: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    (0..gens)
        .map(|_| (scaled(&complex_gaussian(d, rng), 0.5)).exp())
        .collect()
}

fn assemble(parts: Vec<Vec<ComplexMatrix>>, gens: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    let n: usize = parts.iter().map(|p| p[0].nrows()).sum();
    let p = scaled(&complex_gaussian(n, rng), 0.3).exp();
    let p_inv = p.clone().try_inverse().expect("exponential is invertible");
    (0..gens)
        .map(|k| {
            let blocks: Vec<ComplexMatrix> = parts.iter().map(|b| b[k].clone()).collect();
            &p * matcore::block_diag(&blocks) * &p_inv
        })
        .collect()
}

/// Random `Phi2` direct sum of total dimension `n` without repeated blocks.
pub fn phi2_direct_sum(n: usize, rng: &mut ChaCha8Rng) -> DirectSum {
    use realform::harness;
    use realform::RealFormTag;
    let gens = 2;
    let mut parts = Vec::new();
    let mut sigs = Vec::new();
    let mut left = n;
    while left > 0 {
        if left >= 2 && rng.random_bool(0.3) {
            let d = if left >= 4 && rng.random_bool(0.5) { 2 } else { 1 };
            let rho = generic_gl(d, gens, rng);
            let image: Vec<ComplexMatrix> = rho
                .iter()
                .map(|g| g.adjoint().try_inverse().expect("invertible"))
                .collect();
            let pair: Vec<ComplexMatrix> = rho
                .iter()
                .zip(&image)
                .map(|(a, b)| matcore::block_diag(&[a.clone(), b.clone()]))
                .collect();
            parts.push(pair);
            sigs.push((d, d));
            left -= 2 * d;
        } else {
            let d = rng.random_range(1..=left.min(3));
            let p = rng.random_range(0..=d);
            let rep = harness::sample_real_form(RealFormTag::U(p, d - p), gens, rng.random()).expect("valid tag");
            parts.push(rep.generators);
            sigs.push(normalized(p, d - p));
            left -= d;
        }
    }
    sigs.sort();
    DirectSum {
        generators: assemble(parts, gens, rng),
        block_signatures: sigs,
    }
}

/// Random `Phi1` direct sum: real blocks, quaternionic blocks and cross
/// pairs `rho (+) conj(rho)`. Returns the generators and `(r1, r2)`.
pub fn phi1_direct_sum(n: usize, rng: &mut ChaCha8Rng) -> (Vec<ComplexMatrix>, usize, usize) {
    use realform::harness;
    use realform::RealFormTag;
    let gens = 2;
    let mut parts = Vec::new();
    let (mut r1, mut r2) = (0, 0);
    let mut left = n;
    while left > 0 {
        let choice = rng.random_range(0..3);
        if choice == 0 && left >= 2 {
            let d = if left >= 4 && rng.random_bool(0.5) { 2 } else { 1 };
            let rho = generic_gl(d, gens, rng);
            parts.push(
                rho.iter()
                    .map(|g| matcore::block_diag(&[g.clone(), g.conjugate()]))
                    .collect(),
            );
            r2 += d;
            left -= 2 * d;
        } else if choice == 1 && left >= 2 {
            let m = if left >= 4 && rng.random_bool(0.3) { 2 } else { 1 };
            let rep = harness::sample_real_form(RealFormTag::GlH(m), gens, rng.random()).expect("valid tag");
            parts.push(rep.generators);
            r2 += m;
            left -= 2 * m;
        } else {
            let d = rng.random_range(1..=left.min(3));
            let rep = harness::sample_real_form(RealFormTag::GlR(d), gens, rng.random()).expect("valid tag");
            parts.push(rep.generators);
            r1 += d;
            left -= d;
        }
    }
    (assemble(parts, gens, rng), r1, r2)
}
