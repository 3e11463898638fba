//! Seeded sampling inside each real form, ambient scrambling and round-trip
//! trials through the classifier.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classifier::{self, ConjugationCertificate};
use crate::commutant::{self, random_complex};
use crate::error::Result;
use crate::grouprep::{self, Family, GroupKind, RealFormTag, Representation};
use crate::invariants::Involution;
use crate::matcore::{self, c, ComplexMatrix, Tolerance};

/// Standard deviation of the Lie-algebra entries.
pub const SAMPLING_SCALE: f64 = 0.5;

/// Generators drawn per representation unless asked otherwise.
pub const DEFAULT_GENERATORS: usize = 2;

/// Draws allowed before a trial with a reducible sample is skipped.
pub const MAX_RESAMPLES: usize = 10;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let x: f64 = StandardNormal.sample(rng);
    SAMPLING_SCALE * x
}

fn real_gaussian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| c(gaussian(rng), 0.0))
}

fn complex_gaussian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng) * SAMPLING_SCALE)
}

fn traceless(x: ComplexMatrix) -> ComplexMatrix {
    let n = x.nrows();
    let t = x.trace() / c(n as f64, 0.0);
    x - matcore::identity(n) * t
}

fn symmetric(x: &ComplexMatrix) -> ComplexMatrix {
    (x + x.transpose()) * c(0.5, 0.0)
}

fn antisymmetric(x: &ComplexMatrix) -> ComplexMatrix {
    (x - x.transpose()) * c(0.5, 0.0)
}

fn anti_hermitian(x: &ComplexMatrix) -> ComplexMatrix {
    (x - x.adjoint()) * c(0.5, 0.0)
}

/// `[[A, -conj(B)], [B, conj(A)]]`, the complex form of an `m x m`
/// quaternionic matrix.
fn quaternionic_block(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let m = a.nrows();
    let mut out = ComplexMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((0, m), (m, m)).copy_from(&(-b.conjugate()));
    out.view_mut((m, 0), (m, m)).copy_from(b);
    out.view_mut((m, m), (m, m)).copy_from(&a.conjugate());
    out
}

/// Random element of the Lie algebra of the tag's group.
fn lie_algebra_element(tag: RealFormTag, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    use RealFormTag::*;
    match tag {
        GlR(n) => real_gaussian(n, rng),
        SlR(n) => traceless(real_gaussian(n, rng)),
        U(p, q) => matcore::ipq(p, q) * anti_hermitian(&complex_gaussian(p + q, rng)),
        Su(p, q) => traceless(matcore::ipq(p, q) * anti_hermitian(&complex_gaussian(p + q, rng))),
        GlH(m) => quaternionic_block(&complex_gaussian(m, rng), &complex_gaussian(m, rng)),
        SlH(m) => traceless(quaternionic_block(&complex_gaussian(m, rng), &complex_gaussian(m, rng))),
        SpR(n) => matcore::j_matrix(n / 2) * symmetric(&real_gaussian(n, rng)),
        Sp(a, b) => {
            let n = a + b;
            let x = matcore::j_matrix(n / 2) * symmetric(&complex_gaussian(n, rng));
            let k = matcore::kpq(a / 2, b / 2);
            (&x - &k * x.adjoint() * &k) * c(0.5, 0.0)
        }
        OPq(p, q) | SoPq(p, q) => matcore::ipq(p, q) * antisymmetric(&real_gaussian(p + q, rng)),
        OH(m) | SoH(m) | SoHMinus(m) => {
            let x = antisymmetric(&complex_gaussian(2 * m, rng));
            let j = matcore::j_matrix(m);
            let j_inv = -&j;
            (&x + &j * x.conjugate() * j_inv) * c(0.5, 0.0)
        }
    }
}

/// Maps an element of the underlying real Lie group into the tag's copy.
fn embed(tag: RealFormTag, m: ComplexMatrix) -> ComplexMatrix {
    match tag {
        RealFormTag::OPq(p, q) | RealFormTag::SoPq(p, q) => {
            let d = matcore::dpq(p, q);
            let d_inv = matcore::inverse(&d).expect("D_pq is invertible");
            d * m * d_inv
        }
        RealFormTag::SoHMinus(m2) => {
            let p0 = grouprep::p0(2 * m2);
            &p0 * m * &p0
        }
        _ => m,
    }
}

/// A determinant `-1` element of the real form used to leave the identity
/// component of `O(p,q)`.
fn reflection(p: usize, q: usize) -> ComplexMatrix {
    let mut d = vec![1.0; p + q];
    d[0] = -1.0;
    matcore::real_diag(&d)
}

/// Representation of a free group with generators inside `tag`.
pub fn sample_real_form(tag: RealFormTag, num_generators: usize, seed: u64) -> Result<Representation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(tag, num_generators, &mut rng)
}

fn sample_with(tag: RealFormTag, num_generators: usize, rng: &mut ChaCha8Rng) -> Result<Representation> {
    tag.check()?;
    let gens = (0..num_generators)
        .map(|k| {
            let mut g = lie_algebra_element(tag, rng).exp();
            if let (RealFormTag::OPq(p, q), 0) = (tag, k) {
                g = reflection(p, q) * g;
            }
            embed(tag, g)
        })
        .collect();
    Ok(Representation::unchecked(tag.ambient(), gens))
}

/// Random element of the ambient complex Lie algebra.
fn ambient_algebra_element(kind: GroupKind, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let n = kind.n;
    let x = complex_gaussian(n, rng);
    match kind.family {
        Family::GL => x,
        Family::SL => traceless(x),
        Family::Sp => matcore::j_matrix(n / 2) * symmetric(&x),
        Family::O | Family::SO => antisymmetric(&x),
    }
}

/// Random element of the ambient complex group (unit determinant where the
/// group requires it).
pub fn random_ambient(kind: GroupKind, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ambient_algebra_element(kind, rng).exp()
}

/// Conjugates by a random ambient element; returns the scrambled
/// representation and the scrambler.
pub fn scramble(rep: &Representation, rng: &mut ChaCha8Rng) -> Result<(Representation, ComplexMatrix)> {
    let p = random_ambient(rep.kind, rng);
    Ok((rep.conjugated(&p)?, p))
}

/// Involution whose fixed points contain the tag's representations.
pub fn natural_involution(tag: RealFormTag) -> Involution {
    use RealFormTag::*;
    match tag {
        GlR(_) | SlR(_) | GlH(_) | SlH(_) => Involution::Phi1,
        _ => Involution::Phi2,
    }
}

/// Tags whose groups are abelian, so every representation of dimension
/// above one is reducible.
pub fn is_abelian_tag(tag: RealFormTag) -> bool {
    match tag {
        RealFormTag::SoPq(p, q) => p + q == 2,
        RealFormTag::OH(1) | RealFormTag::SoH(1) => true,
        _ => false,
    }
}

/// Whether a recovered tag matches the seeded one: signatures may be swapped
/// and the quaternionic orthogonal tags are identified.
pub fn tags_equivalent(seeded: RealFormTag, recovered: RealFormTag) -> bool {
    use RealFormTag::*;
    let swap = |t: RealFormTag| match t {
        U(p, q) => U(q, p),
        Su(p, q) => Su(q, p),
        Sp(p, q) => Sp(q, p),
        OPq(p, q) => OPq(q, p),
        SoPq(p, q) => SoPq(q, p),
        other => other,
    };
    let collapse = |t: RealFormTag| match t {
        SoH(m) | SoHMinus(m) => OH(m),
        other => other,
    };
    let (a, b) = (collapse(seeded), collapse(recovered));
    a == b || swap(a) == b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Pass,
    Fail,
    Skipped,
    Error,
}

/// Outcome of one round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seeded_tag: RealFormTag,
    pub recovered_tag: Option<RealFormTag>,
    pub status: TrialStatus,
    pub max_residual: Option<f64>,
    pub irreducible: bool,
    pub branch: Option<String>,
    pub lambda_sign: Option<i8>,
    /// Determinant of the scrambler as `[re, im]`.
    pub scrambler_det: Option<[f64; 2]>,
    pub error: Option<String>,
    pub resamples: usize,
    pub seed: u64,
    pub elapsed_ms: f64,
}

impl TrialReport {
    fn new(tag: RealFormTag, seed: u64) -> Self {
        TrialReport {
            seeded_tag: tag,
            recovered_tag: None,
            status: TrialStatus::Skipped,
            max_residual: None,
            irreducible: false,
            branch: None,
            lambda_sign: None,
            scrambler_det: None,
            error: None,
            resamples: 0,
            seed,
            elapsed_ms: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == TrialStatus::Pass
    }

    /// Equality ignoring the wall-clock time.
    pub fn same_outcome(&self, other: &TrialReport) -> bool {
        let mut a = self.clone();
        a.elapsed_ms = other.elapsed_ms;
        a == *other
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trial reports serialise")
    }
}

/// Sample, scramble, classify and verify.
pub fn roundtrip_trial(tag: RealFormTag, num_generators: usize, seed: u64, tol: &Tolerance) -> TrialReport {
    let start = Instant::now();
    let mut report = TrialReport::new(tag, seed);
    if let Err(e) = tag.check() {
        report.status = TrialStatus::Error;
        report.error = Some(e.to_string());
        return report;
    }
    if is_abelian_tag(tag) {
        report.error = Some(format!("{tag} is abelian; no irreducible representation of dimension 2"));
        report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = None;
    for attempt in 0..MAX_RESAMPLES {
        let rep = match sample_with(tag, num_generators, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                report.status = TrialStatus::Error;
                report.error = Some(e.to_string());
                return report;
            }
        };
        if commutant::is_irreducible(&rep, tol).unwrap_or(false) {
            report.resamples = attempt;
            sample = Some(rep);
            break;
        }
    }
    let Some(rep) = sample else {
        report.resamples = MAX_RESAMPLES;
        report.error = Some("no irreducible sample found".into());
        report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        return report;
    };
    report.irreducible = true;
    let outcome = scramble(&rep, &mut rng).and_then(|(scrambled, p)| {
        let det = p.determinant();
        report.scrambler_det = Some([det.re, det.im]);
        let cert = classifier::classify_irreducible(&scrambled, natural_involution(tag), tol)?;
        let check = classifier::verify_certificate(&scrambled, &cert, tol)?;
        Ok((cert, check))
    });
    match outcome {
        Ok((cert, check)) => fill(&mut report, &cert, check.max_residual(), check.passed()),
        Err(e) => {
            report.status = TrialStatus::Error;
            report.error = Some(e.to_string());
        }
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

fn fill(report: &mut TrialReport, cert: &ConjugationCertificate, residual: f64, verified: bool) {
    report.recovered_tag = Some(cert.tag);
    report.branch = Some(cert.branch.clone());
    report.lambda_sign = cert.lambda_sign;
    report.max_residual = Some(residual);
    report.status = if verified && tags_equivalent(report.seeded_tag, cert.tag) {
        TrialStatus::Pass
    } else {
        TrialStatus::Fail
    };
}

/// Seed of trial `index` in a batch started from `base`.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Default seed for batches.
pub const DEFAULT_BATCH_SEED: u64 = commutant::DEFAULT_SEED;
