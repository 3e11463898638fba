//! Character coordinates (trace functions and the Pfaffian polarisation `Q`),
//! the involutions `Phi1` / `Phi2`, and the fixed-point test.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::commutant::{self, Intertwiner};
use crate::error::{Error, Result};
use crate::grouprep::{complex_to_value, Family, Representation};
use crate::matcore::{self, ComplexMatrix, Tolerance, ONE, ZERO};

/// Default maximal word length.
pub const DEFAULT_WORD_CAP: usize = 4;

/// Largest `2m` accepted by [`q_function`].
pub const Q_MAX_SIZE: usize = 8;

/// Coordinate comparisons allow this multiple of the relative tolerance.
const COORDINATE_SLACK: f64 = 1e3;

/// Anti-holomorphic involutions on representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Involution {
    /// Entrywise conjugation.
    Phi1,
    /// Conjugate transpose inverse.
    Phi2,
}

impl fmt::Display for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Involution::Phi1 => "phi1",
            Involution::Phi2 => "phi2",
        })
    }
}

impl FromStr for Involution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi1" => Ok(Involution::Phi1),
            "phi2" => Ok(Involution::Phi2),
            other => Err(Error::Parameter(format!("unknown involution `{other}`"))),
        }
    }
}

// -------------------------------------------------------------------------
// Words
// -------------------------------------------------------------------------

/// Reduced words in signed 1-based generator indices, ordered by length and
/// then lexicographically with `a < a^-1 < b < b^-1 < ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordList {
    pub words: Vec<Vec<i64>>,
}

fn letter_rank(letter: i64) -> u64 {
    2 * (letter.unsigned_abs() - 1) + u64::from(letter < 0)
}

pub fn inverse_word(word: &[i64]) -> Vec<i64> {
    word.iter().rev().map(|l| -l).collect()
}

/// Human-readable form: `a`, `A` for `a^-1`, and so on.
pub fn word_to_string(word: &[i64]) -> String {
    if word.is_empty() {
        return "e".into();
    }
    word.iter()
        .map(|&l| {
            let base = (b'a' + ((l.unsigned_abs() - 1) % 26) as u8) as char;
            if l < 0 {
                base.to_ascii_uppercase()
            } else {
                base
            }
        })
        .collect()
}

impl WordList {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &[i64]) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }
}

/// All reduced words of length `1..=min(cap, 2^n - 1)`.
pub fn word_list(num_generators: usize, n: usize, cap: usize) -> Result<WordList> {
    if cap == 0 {
        return Err(Error::Parameter("word length cap must be at least 1".into()));
    }
    let procesi = if n >= 63 { usize::MAX } else { (1usize << n) - 1 };
    let max_len = cap.min(procesi);
    let letters: Vec<i64> = (1..=num_generators as i64).flat_map(|g| [g, -g]).collect();
    let mut words = Vec::new();
    let mut layer: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        next.sort_by(|a, b| {
            a.iter()
                .map(|&l| letter_rank(l))
                .cmp(b.iter().map(|&l| letter_rank(l)))
        });
        words.extend(next.iter().cloned());
        layer = next;
    }
    Ok(WordList { words })
}

// -------------------------------------------------------------------------
// Coordinates
// -------------------------------------------------------------------------

/// A value of `Q` on a multiset of words (indices into the word list).
#[derive(Debug, Clone, PartialEq)]
pub struct QValue {
    pub args: Vec<usize>,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterCoordinates {
    pub words: WordList,
    pub traces: Vec<Complex64>,
    /// Present exactly for `SO(2m)`.
    pub qvalues: Option<Vec<QValue>>,
}

impl CharacterCoordinates {
    pub fn to_value(&self) -> Value {
        json!({
            "words": self.words.words,
            "traces": self.traces.iter().copied().map(complex_to_value).collect::<Vec<_>>(),
            "qvalues": self.qvalues.as_ref().map(|qs| qs
                .iter()
                .map(|q| json!({"words": q.args, "value": complex_to_value(q.value)}))
                .collect::<Vec<_>>()),
        })
    }
}

/// Maximal word length used for the arguments of `Q`.
fn q_word_len(m: usize) -> usize {
    if m <= 2 {
        2
    } else {
        1
    }
}

/// Nondecreasing `m`-tuples over `0..k`.
fn multisets(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i, k, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, m, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Traces over `words`, plus `Q`-values for `SO(2m)` on multisets of the
/// short words (length at most 2 for `m <= 2`, 1 otherwise).
pub fn trace_coordinates(rep: &Representation, words: &WordList) -> Result<CharacterCoordinates> {
    let inverses = rep.inverses()?;
    let images = words
        .words
        .iter()
        .map(|w| rep.evaluate_with(w, &inverses))
        .collect::<Result<Vec<_>>>()?;
    let traces = images.iter().map(|m| m.trace()).collect();
    let n = rep.dim();
    let qvalues = if rep.kind.family == Family::SO && n % 2 == 0 {
        let m = n / 2;
        let short: Vec<usize> = (0..words.len())
            .filter(|&i| words.words[i].len() <= q_word_len(m))
            .collect();
        let mut out = Vec::new();
        for combo in multisets(short.len(), m) {
            let args: Vec<usize> = combo.iter().map(|&k| short[k]).collect();
            let mats: Vec<ComplexMatrix> = args.iter().map(|&i| images[i].clone()).collect();
            out.push(QValue {
                value: q_function(&mats)?,
                args,
            });
        }
        Some(out)
    } else {
        None
    };
    Ok(CharacterCoordinates {
        words: words.clone(),
        traces,
        qvalues,
    })
}

/// Coordinates of `Phi(rho)` computed from those of `rho`: conjugate traces
/// (at the inverse word for `Phi2`) and conjugate `Q`-values.
pub fn involution_on_coordinates(coords: &CharacterCoordinates, which: Involution) -> Result<CharacterCoordinates> {
    let traces = match which {
        Involution::Phi1 => coords.traces.iter().map(|t| t.conj()).collect(),
        Involution::Phi2 => coords
            .words
            .words
            .iter()
            .map(|w| {
                let inv = inverse_word(w);
                coords
                    .words
                    .index_of(&inv)
                    .map(|i| coords.traces[i].conj())
                    .ok_or_else(|| Error::Parameter("word list is not closed under inversion".into()))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let qvalues = coords.qvalues.as_ref().map(|qs| {
        qs.iter()
            .map(|q| QValue {
                args: q.args.clone(),
                value: q.value.conj(),
            })
            .collect()
    });
    Ok(CharacterCoordinates {
        words: coords.words.clone(),
        traces,
        qvalues,
    })
}

// -------------------------------------------------------------------------
// Q function
// -------------------------------------------------------------------------

/// The signed permutation sum
/// `sum_sigma sign(sigma) prod_i (A_i - A_i^T)[sigma(2i-1), sigma(2i)]`
/// for `m` matrices of size `2m`.
pub fn q_function(matrices: &[ComplexMatrix]) -> Result<Complex64> {
    let m = matrices.len();
    let size = 2 * m;
    if m == 0 {
        return Err(Error::Parameter("q_function needs at least one matrix".into()));
    }
    if size > Q_MAX_SIZE {
        return Err(Error::UnsupportedSize(format!(
            "q_function is limited to size {Q_MAX_SIZE}, got {size}"
        )));
    }
    if let Some(bad) = matrices.iter().find(|a| a.nrows() != size || a.ncols() != size) {
        return Err(Error::Parameter(format!(
            "q_function with {m} matrices needs size {size}, got {}x{}",
            bad.nrows(),
            bad.ncols()
        )));
    }
    let skew: Vec<ComplexMatrix> = matrices.iter().map(|a| a - a.transpose()).collect();
    let term = |perm: &[usize]| -> Complex64 {
        let mut prod = ONE;
        for (i, b) in skew.iter().enumerate() {
            prod *= b[(perm[2 * i], perm[2 * i + 1])];
            if prod == ZERO {
                break;
            }
        }
        prod
    };
    // Heap's algorithm; every swap flips the sign.
    let mut perm: Vec<usize> = (0..size).collect();
    let mut counters = vec![0usize; size];
    let mut sign = 1.0;
    let mut total = term(&perm);
    let mut i = 1;
    while i < size {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            total += term(&perm) * sign;
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

// -------------------------------------------------------------------------
// Involutions
// -------------------------------------------------------------------------

pub fn involution_matrix(m: &ComplexMatrix, which: Involution) -> Result<ComplexMatrix> {
    match which {
        Involution::Phi1 => Ok(m.conjugate()),
        Involution::Phi2 => matcore::inverse(&m.adjoint()),
    }
}

/// Applies the involution to every generator; the kind is preserved.
pub fn involution_image(rep: &Representation, which: Involution) -> Result<Representation> {
    let gens = rep
        .generators
        .iter()
        .map(|g| involution_matrix(g, which))
        .collect::<Result<Vec<_>>>()?;
    Ok(rep.with_generators(gens))
}

/// Result of the fixed-point test.
#[derive(Debug, Clone)]
pub struct PhiVerdict {
    pub fixed: bool,
    /// `P` with `P Phi(rho(g)) = rho(g) P`, unit Frobenius norm, when fixed.
    pub intertwiner: Option<ComplexMatrix>,
    /// Largest normalised gap between the coordinates of `rho` and `Phi(rho)`.
    pub coordinate_gap: f64,
    /// Whether the coordinate cross-check agrees with the verdict.
    pub coordinates_agree: bool,
}

/// Decides whether `Phi(rho)` is conjugate to `rho` by solving for an
/// invertible intertwiner; trace coordinates are compared as a cross-check.
pub fn is_phi_fixed(rep: &Representation, which: Involution, tol: &Tolerance) -> Result<PhiVerdict> {
    let image = involution_image(rep, which)?;
    let outcome = commutant::intertwiner(&image, rep, tol)?;
    let gap = coordinate_gap(rep, &image)?;
    let close = gap <= COORDINATE_SLACK * tol.rel;
    match outcome {
        Intertwiner::Invertible(p) => Ok(PhiVerdict {
            fixed: true,
            intertwiner: Some(p),
            coordinate_gap: gap,
            coordinates_agree: close,
        }),
        Intertwiner::None => Ok(PhiVerdict {
            fixed: false,
            intertwiner: None,
            coordinate_gap: gap,
            coordinates_agree: !close,
        }),
        // Singular intertwiners between semi-simple reps with different
        // characters just mean the reps share a factor.
        Intertwiner::Singular if !close => Ok(PhiVerdict {
            fixed: false,
            intertwiner: None,
            coordinate_gap: gap,
            coordinates_agree: true,
        }),
        Intertwiner::Singular => Err(Error::SemiSimplicity(format!(
            "{which}: intertwiners with the image exist but are singular"
        ))),
    }
}

/// `max_w |tr rho(w) - tr sigma(w)| / (1 + sqrt(n) ||rho(w)||)` over the
/// default word list.
fn coordinate_gap(rep: &Representation, other: &Representation) -> Result<f64> {
    let words = word_list(rep.num_generators(), rep.dim(), DEFAULT_WORD_CAP)?;
    let inv_a = rep.inverses()?;
    let inv_b = other.inverses()?;
    let sqrt_n = (rep.dim() as f64).sqrt();
    let mut gap: f64 = 0.0;
    for w in &words.words {
        let a = rep.evaluate_with(w, &inv_a)?;
        let b = other.evaluate_with(w, &inv_b)?;
        let scale = 1.0 + sqrt_n * matcore::fro(&a).max(matcore::fro(&b));
        gap = gap.max((a.trace() - b.trace()).norm() / scale);
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouprep::GroupKind;
    use crate::matcore::{c, from_real_rows, from_rows, real_diag, I};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rep(family: Family, gens: Vec<ComplexMatrix>) -> Representation {
        let n = gens[0].nrows();
        Representation::unchecked(GroupKind::new(family, n).unwrap(), gens)
    }

    #[test]
    fn word_list_examples() {
        let w = word_list(1, 2, 3).unwrap();
        assert_eq!(
            w.words,
            vec![vec![1], vec![-1], vec![1, 1], vec![-1, -1], vec![1, 1, 1], vec![-1, -1, -1]]
        );
        assert_eq!(word_list(2, 5, 1).unwrap().words, vec![vec![1], vec![-1], vec![2], vec![-2]]);
        assert_eq!(word_list(2, 5, 2).unwrap().len(), 16);
        // n = 1 caps the length at 2^1 - 1 = 1.
        assert_eq!(word_list(2, 1, 4).unwrap().len(), 4);
        assert!(word_list(2, 2, 0).is_err());
    }

    #[test]
    fn word_list_is_closed_under_inversion() {
        let w = word_list(3, 4, 3).unwrap();
        for word in &w.words {
            assert!(w.index_of(&inverse_word(word)).is_some());
        }
    }

    #[test]
    fn trace_examples() {
        let id = rep(Family::GL, vec![matcore::identity(3)]);
        let words = word_list(1, 3, 4).unwrap();
        let coords = trace_coordinates(&id, &words).unwrap();
        assert!(coords.traces.iter().all(|t| *t == c(3.0, 0.0)));
        assert!(coords.qvalues.is_none());

        let d = rep(Family::SL, vec![real_diag(&[2.0, 0.5])]);
        let words = word_list(1, 2, 1).unwrap();
        let coords = trace_coordinates(&d, &words).unwrap();
        assert!((coords.traces[0] - c(2.5, 0.0)).norm() < 1e-15);
        assert!((coords.traces[1] - c(2.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn q_function_examples() {
        let sym = from_real_rows(&[&[1.0, 2.0], &[2.0, 5.0]]);
        assert_eq!(q_function(&[sym]).unwrap(), ZERO);
        let j = matcore::j_matrix(1);
        // Direct S_2 sum: 2 (A_12 - A_21) = 4.
        assert_eq!(q_function(&[j.clone()]).unwrap(), c(4.0, 0.0));
        let pf = matcore::pfaffian(&(&j - j.transpose()), &tol()).unwrap();
        assert_eq!(pf * 2.0, c(4.0, 0.0));
        assert!(matches!(
            q_function(&vec![matcore::identity(10); 5]),
            Err(Error::UnsupportedSize(_))
        ));
        assert!(matches!(
            q_function(&[matcore::identity(3)]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn q_values_present_for_even_special_orthogonal() {
        let r = rep(Family::SO, vec![matcore::identity(4), matcore::identity(4)]);
        let coords = trace_coordinates(&r, &word_list(2, 4, 2).unwrap()).unwrap();
        // 16 words of length <= 2, multisets of size 2: 16 * 17 / 2.
        assert_eq!(coords.qvalues.unwrap().len(), 136);
    }

    #[test]
    fn involution_examples() {
        let real = rep(Family::GL, vec![from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]])]);
        assert_eq!(involution_image(&real, Involution::Phi1).unwrap(), real);

        let u = rep(Family::GL, vec![from_rows(&[&[ZERO, I], &[I, ZERO]])]);
        let back = involution_image(&u, Involution::Phi2).unwrap();
        assert!(matcore::fro(&(&back.generators[0] - &u.generators[0])) < 1e-15);

        let d = rep(Family::GL, vec![matcore::from_rows(&[&[c(0.0, 2.0), ZERO], &[ZERO, c(0.0, -0.5)]])]);
        let img = involution_image(&d, Involution::Phi2).unwrap();
        // conj(2i)^{-1} = (-2i)^{-1} = i/2 ; conj(-i/2)^{-1} = (i/2)^{-1} = -2i
        let expected = matcore::from_rows(&[&[c(0.0, 0.5), ZERO], &[ZERO, c(0.0, -2.0)]]);
        assert!(matcore::fro(&(&img.generators[0] - expected)) < 1e-15);
    }

    #[test]
    fn real_rep_is_phi1_fixed_with_scalar_intertwiner() {
        let r = rep(
            Family::SL,
            vec![
                from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]),
                from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]),
            ],
        );
        let v = is_phi_fixed(&r, Involution::Phi1, &tol()).unwrap();
        assert!(v.fixed && v.coordinates_agree);
        let expected = matcore::identity(2) / c(2f64.sqrt(), 0.0);
        assert!(matcore::fro(&(v.intertwiner.unwrap() - expected)) < 1e-12);
    }

    #[test]
    fn generic_complex_rep_is_not_fixed() {
        let r = rep(
            Family::GL,
            vec![
                from_rows(&[&[c(1.0, 0.7), c(0.3, -0.2)], &[c(0.1, 0.4), c(-0.5, 1.1)]]),
                from_rows(&[&[c(0.2, -1.0), c(1.3, 0.5)], &[c(-0.7, 0.2), c(0.9, 0.3)]]),
            ],
        );
        for which in [Involution::Phi1, Involution::Phi2] {
            let v = is_phi_fixed(&r, which, &tol()).unwrap();
            assert!(!v.fixed && v.coordinates_agree, "{which}");
        }
    }
}
