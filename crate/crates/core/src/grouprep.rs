//! Representations of free groups into the classical complex groups, the
//! real-form tags of the classification table, membership checks and the JSON
//! document format.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcore::{self, c, ComplexMatrix, Tolerance};

/// Ambient complex group family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    GL,
    SL,
    O,
    SO,
    Sp,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GL => "GL",
            Family::SL => "SL",
            Family::O => "O",
            Family::SO => "SO",
            Family::Sp => "Sp",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GL" => Ok(Family::GL),
            "SL" => Ok(Family::SL),
            "O" => Ok(Family::O),
            "SO" => Ok(Family::SO),
            "Sp" => Ok(Family::Sp),
            other => Err(Error::Parameter(format!("unknown group kind `{other}`"))),
        }
    }
}

/// A classical complex group `G(n, C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupKind {
    pub family: Family,
    pub n: usize,
}

impl GroupKind {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("group dimension must be positive".into()));
        }
        if family == Family::Sp && n % 2 != 0 {
            return Err(Error::Parameter(format!("Sp requires even dimension, got {n}")));
        }
        Ok(GroupKind { family, n })
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},C)", self.family.name(), self.n)
    }
}

/// Rows of the real-form table with their parameters.
///
/// `Sp` stores `(2p, 2q)` and `SpR` stores `2n`, matching the group names.
/// Quaternionic tags store `m`, the ambient dimension being `2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RealFormTag {
    GlR(usize),
    GlH(usize),
    U(usize, usize),
    SlR(usize),
    SlH(usize),
    Su(usize, usize),
    SpR(usize),
    Sp(usize, usize),
    OPq(usize, usize),
    SoPq(usize, usize),
    OH(usize),
    SoH(usize),
    SoHMinus(usize),
}

impl RealFormTag {
    pub fn name(&self) -> &'static str {
        match self {
            RealFormTag::GlR(_) => "GL_R",
            RealFormTag::GlH(_) => "GL_H",
            RealFormTag::U(..) => "U",
            RealFormTag::SlR(_) => "SL_R",
            RealFormTag::SlH(_) => "SL_H",
            RealFormTag::Su(..) => "SU",
            RealFormTag::SpR(_) => "Sp_R",
            RealFormTag::Sp(..) => "Sp",
            RealFormTag::OPq(..) => "O_pq",
            RealFormTag::SoPq(..) => "SO_pq",
            RealFormTag::OH(_) => "O_H",
            RealFormTag::SoH(_) => "SO_H",
            RealFormTag::SoHMinus(_) => "SO_H_minus",
        }
    }

    pub fn params(&self) -> Vec<usize> {
        use RealFormTag::*;
        match *self {
            GlR(a) | GlH(a) | SlR(a) | SlH(a) | SpR(a) | OH(a) | SoH(a) | SoHMinus(a) => vec![a],
            U(p, q) | Su(p, q) | Sp(p, q) | OPq(p, q) | SoPq(p, q) => vec![p, q],
        }
    }

    pub fn from_parts(name: &str, params: &[usize]) -> Result<Self> {
        use RealFormTag::*;
        let one = || match params {
            [a] => Ok(*a),
            _ => Err(Error::Parameter(format!("tag {name} takes one parameter"))),
        };
        let two = || match params {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::Parameter(format!("tag {name} takes two parameters"))),
        };
        let tag = match name {
            "GL_R" => GlR(one()?),
            "GL_H" => GlH(one()?),
            "U" => {
                let (p, q) = two()?;
                U(p, q)
            }
            "SL_R" => SlR(one()?),
            "SL_H" => SlH(one()?),
            "SU" => {
                let (p, q) = two()?;
                Su(p, q)
            }
            "Sp_R" => SpR(one()?),
            "Sp" => {
                let (p, q) = two()?;
                Sp(p, q)
            }
            "O_pq" => {
                let (p, q) = two()?;
                OPq(p, q)
            }
            "SO_pq" => {
                let (p, q) = two()?;
                SoPq(p, q)
            }
            "O_H" => OH(one()?),
            "SO_H" => SoH(one()?),
            "SO_H_minus" => SoHMinus(one()?),
            other => return Err(Error::Parameter(format!("unknown real-form tag `{other}`"))),
        };
        tag.check()?;
        Ok(tag)
    }

    /// Validates parameter constraints.
    pub fn check(&self) -> Result<()> {
        use RealFormTag::*;
        let bad = |msg: String| Err(Error::Parameter(msg));
        match *self {
            GlR(n) | SlR(n) | GlH(n) | SlH(n) | OH(n) | SoH(n) if n == 0 => {
                bad(format!("{} needs a positive parameter", self.name()))
            }
            U(p, q) | Su(p, q) | OPq(p, q) | SoPq(p, q) if p + q == 0 => {
                bad(format!("{} needs p + q > 0", self.name()))
            }
            SpR(d) if d == 0 || d % 2 != 0 => bad(format!("Sp_R needs a positive even size, got {d}")),
            Sp(a, b) if a % 2 != 0 || b % 2 != 0 || a + b == 0 => {
                bad(format!("Sp(2p,2q) needs even parameters, got ({a},{b})"))
            }
            SoHMinus(m) if m == 0 || m % 2 != 0 => {
                bad(format!("SO_H_minus needs an even positive parameter, got {m}"))
            }
            _ => Ok(()),
        }
    }

    /// Dimension of the ambient complex group.
    pub fn ambient_dim(&self) -> usize {
        use RealFormTag::*;
        match *self {
            GlR(n) | SlR(n) | SpR(n) => n,
            GlH(m) | SlH(m) | OH(m) | SoH(m) | SoHMinus(m) => 2 * m,
            U(p, q) | Su(p, q) | Sp(p, q) | OPq(p, q) | SoPq(p, q) => p + q,
        }
    }

    pub fn family(&self) -> Family {
        use RealFormTag::*;
        match self {
            GlR(_) | GlH(_) | U(..) => Family::GL,
            SlR(_) | SlH(_) | Su(..) => Family::SL,
            SpR(_) | Sp(..) => Family::Sp,
            OPq(..) | OH(_) => Family::O,
            SoPq(..) | SoH(_) | SoHMinus(_) => Family::SO,
        }
    }

    pub fn ambient(&self) -> GroupKind {
        GroupKind {
            family: self.family(),
            n: self.ambient_dim(),
        }
    }

    /// Swaps `(p,q)` so that `p >= q` where the tag carries a signature.
    /// The embedded orthogonal copies depend on the order and are left alone.
    pub fn normalized(&self) -> Self {
        use RealFormTag::*;
        match *self {
            U(p, q) if p < q => U(q, p),
            Su(p, q) if p < q => Su(q, p),
            Sp(a, b) if a < b => Sp(b, a),
            other => other,
        }
    }

    /// Every tag for an ambient dimension up to `max_n`.
    pub fn all_up_to(max_n: usize) -> Vec<RealFormTag> {
        use RealFormTag::*;
        let mut out = Vec::new();
        for n in 1..=max_n {
            out.push(GlR(n));
            out.push(SlR(n));
            for q in 0..=n / 2 {
                out.push(U(n - q, q));
                out.push(Su(n - q, q));
            }
            if n % 2 == 0 {
                let m = n / 2;
                out.push(GlH(m));
                out.push(SlH(m));
                out.push(SpR(n));
                for q in 0..=m / 2 {
                    out.push(Sp(2 * (m - q), 2 * q));
                }
                out.push(OH(m));
                out.push(SoH(m));
                if m % 2 == 0 {
                    out.push(SoHMinus(m));
                }
            }
            for q in 0..=n / 2 {
                out.push(OPq(n - q, q));
                out.push(SoPq(n - q, q));
            }
        }
        out
    }
}

impl fmt::Display for RealFormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.name(), params.join(","))
    }
}

impl FromStr for RealFormTag {
    type Err = Error;

    /// Parses `NAME(a)` or `NAME(a,b)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::Parameter(format!("tag `{s}` must look like NAME(a,b)")))?;
        if !s.ends_with(')') {
            return Err(Error::Parameter(format!("tag `{s}` must end with `)`")));
        }
        let name = &s[..open];
        let params = s[open + 1..s.len() - 1]
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parameter(format!("bad tag parameter `{p}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        RealFormTag::from_parts(name, &params)
    }
}

impl Serialize for RealFormTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealFormTag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// -------------------------------------------------------------------------
// Membership
// -------------------------------------------------------------------------

/// Target of a membership check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Group(GroupKind),
    Form(RealFormTag),
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Group(k) => k.n,
            Target::Form(t) => t.ambient_dim(),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Group(k) => write!(f, "{k}"),
            Target::Form(t) => write!(f, "{t}"),
        }
    }
}

impl From<GroupKind> for Target {
    fn from(k: GroupKind) -> Self {
        Target::Group(k)
    }
}

impl From<RealFormTag> for Target {
    fn from(t: RealFormTag) -> Self {
        Target::Form(t)
    }
}

/// One defining equation `L = R` with its relative residual
/// `||L - R|| / scale` and the bound `rel + abs / scale` it must meet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub equation: String,
    pub residual: f64,
    pub bound: f64,
}

impl EquationCheck {
    fn new(equation: &str, absolute: f64, scale: f64, tol: &Tolerance) -> Self {
        let scale = scale.max(f64::MIN_POSITIVE);
        EquationCheck {
            equation: equation.to_string(),
            residual: if absolute.is_nan() { f64::INFINITY } else { absolute / scale },
            bound: tol.rel + tol.abs / scale,
        }
    }

    fn matrix(equation: &str, lhs: &ComplexMatrix, rhs: &ComplexMatrix, scale: f64, tol: &Tolerance) -> Self {
        let scale = scale.max(matcore::fro(rhs));
        EquationCheck::new(equation, matcore::fro(&(lhs - rhs)), scale, tol)
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.bound
    }
}

/// Per-equation residuals of one matrix against one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub target: String,
    pub checks: Vec<EquationCheck>,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EquationCheck::passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

fn hadamard_bound(m: &ComplexMatrix) -> f64 {
    m.column_iter().map(|col| col.norm()).product::<f64>()
}

fn check_invertible(m: &ComplexMatrix, tol: &Tolerance) -> EquationCheck {
    // Reciprocal condition number below the relative tolerance counts as singular.
    let s = matcore::singular_values(m);
    let (hi, lo) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    let defect = if hi > 0.0 && lo > tol.rel * hi { 0.0 } else { 1.0 };
    EquationCheck {
        equation: "M invertible".into(),
        residual: defect,
        bound: 0.0,
    }
}

fn check_det_one(m: &ComplexMatrix, tol: &Tolerance) -> EquationCheck {
    let det = m.determinant();
    EquationCheck::new("det M = 1", (det - matcore::ONE).norm(), hadamard_bound(m).max(1.0), tol)
}

fn check_real(m: &ComplexMatrix, tol: &Tolerance) -> EquationCheck {
    EquationCheck::new("conj(M) = M", matcore::imag_part(m).norm() * 2.0, matcore::fro(m), tol)
}

fn check_quadratic(name: &str, m: &ComplexMatrix, form: &ComplexMatrix, tol: &Tolerance) -> EquationCheck {
    let lhs = m.transpose() * form * m;
    let scale = matcore::fro(m).powi(2) * matcore::fro(form);
    EquationCheck::matrix(name, &lhs, form, scale, tol)
}

fn check_sesquilinear(name: &str, m: &ComplexMatrix, form: &ComplexMatrix, tol: &Tolerance) -> EquationCheck {
    let lhs = m.adjoint() * form * m;
    let scale = matcore::fro(m).powi(2) * matcore::fro(form);
    EquationCheck::matrix(name, &lhs, form, scale, tol)
}

fn check_quaternionic(m: &ComplexMatrix, tol: &Tolerance) -> EquationCheck {
    let j = matcore::j_matrix(m.nrows() / 2);
    let lhs = m * &j;
    let rhs = &j * m.conjugate();
    EquationCheck::matrix("M J = J conj(M)", &lhs, &rhs, matcore::fro(m) * matcore::fro(&j), tol)
}

fn group_checks(m: &ComplexMatrix, kind: GroupKind, tol: &Tolerance) -> Vec<EquationCheck> {
    let n = kind.n;
    match kind.family {
        Family::GL => vec![check_invertible(m, tol)],
        Family::SL => vec![check_det_one(m, tol)],
        Family::O => vec![check_quadratic("M^T M = I", m, &matcore::identity(n), tol)],
        Family::SO => vec![
            check_quadratic("M^T M = I", m, &matcore::identity(n), tol),
            check_det_one(m, tol),
        ],
        Family::Sp => vec![check_quadratic("M^T J M = J", m, &matcore::j_matrix(n / 2), tol)],
    }
}

/// `P_0 = diag(1, ..., 1, -1)`, the fixed determinant `-1` orthogonal matrix
/// relating `SO(2m,H)` and `SO^-(2m,H)`.
pub fn p0(n: usize) -> ComplexMatrix {
    let mut d = vec![1.0; n];
    if let Some(last) = d.last_mut() {
        *last = -1.0;
    }
    matcore::real_diag(&d)
}

fn tag_checks(m: &ComplexMatrix, tag: RealFormTag, tol: &Tolerance) -> Vec<EquationCheck> {
    use RealFormTag::*;
    let ambient = group_checks(m, tag.ambient(), tol);
    let extra = match tag {
        GlR(_) | SlR(_) | SpR(_) => vec![check_real(m, tol)],
        GlH(_) | SlH(_) | OH(_) | SoH(_) => vec![check_quaternionic(m, tol)],
        U(p, q) | Su(p, q) => vec![check_sesquilinear(
            "M* I_pq M = I_pq",
            m,
            &matcore::ipq(p, q),
            tol,
        )],
        Sp(a, b) => vec![check_sesquilinear(
            "M* K_pq M = K_pq",
            m,
            &matcore::kpq(a / 2, b / 2),
            tol,
        )],
        OPq(p, q) | SoPq(p, q) => {
            let d = matcore::dpq(p, q);
            let dinv = matcore::inverse(&d).expect("D_pq is invertible");
            let inner = &dinv * m * &d;
            let mut check = check_real(&inner, tol);
            check.equation = "D^-1 M D real".into();
            vec![check]
        }
        SoHMinus(m2) => {
            let p = p0(2 * m2);
            let inner = &p * m * &p;
            let mut check = check_quaternionic(&inner, tol);
            check.equation = "P0 M P0 J = J conj(P0 M P0)".into();
            vec![check]
        }
    };
    ambient.into_iter().chain(extra).collect()
}

/// Evaluates every defining equation of `target` on `m`.
pub fn validate_membership(m: &ComplexMatrix, target: Target, tol: &Tolerance) -> Result<MembershipReport> {
    if !matcore::is_square(m) || m.nrows() != target.dim() {
        return Err(Error::Parameter(format!(
            "matrix of size {}x{} does not match {target} (dimension {})",
            m.nrows(),
            m.ncols(),
            target.dim()
        )));
    }
    if let Target::Form(t) = target {
        t.check()?;
    }
    let checks = match target {
        Target::Group(k) => group_checks(m, k, tol),
        Target::Form(t) => tag_checks(m, t, tol),
    };
    Ok(MembershipReport {
        target: target.to_string(),
        checks,
    })
}

// -------------------------------------------------------------------------
// Representations
// -------------------------------------------------------------------------

/// Generator images of a finitely generated group in a classical group.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub kind: GroupKind,
    pub generators: Vec<ComplexMatrix>,
    pub labels: Option<Vec<String>>,
    /// Words (signed 1-based generator indices) expected to evaluate to the identity.
    pub relations: Option<Vec<Vec<i64>>>,
}

impl Representation {
    /// Builds a representation after checking sizes and membership of every
    /// generator in the ambient group.
    pub fn new(kind: GroupKind, generators: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        let rep = Representation::unchecked(kind, generators);
        rep.check_sizes()?;
        for (i, g) in rep.generators.iter().enumerate() {
            if !matcore::all_finite(g) {
                return Err(Error::Validation(format!("generator {i} has non-finite entries")));
            }
            let report = validate_membership(g, Target::Group(kind), tol)?;
            if !report.passed() {
                return Err(Error::Validation(format!(
                    "generator {i} is not in {kind} (max residual {:.3e})",
                    report.max_residual()
                )));
            }
        }
        Ok(rep)
    }

    /// Builds a representation without membership checks.
    pub fn unchecked(kind: GroupKind, generators: Vec<ComplexMatrix>) -> Self {
        Representation {
            kind,
            generators,
            labels: None,
            relations: None,
        }
    }

    fn check_sizes(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            if g.nrows() != self.kind.n || g.ncols() != self.kind.n {
                return Err(Error::Parameter(format!(
                    "generator {i} is {}x{}, expected {}x{}",
                    g.nrows(),
                    g.ncols(),
                    self.kind.n,
                    self.kind.n
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.kind.n
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Same kind and labels, new generator matrices.
    pub fn with_generators(&self, generators: Vec<ComplexMatrix>) -> Self {
        Representation {
            kind: self.kind,
            generators,
            labels: self.labels.clone(),
            relations: self.relations.clone(),
        }
    }

    /// `P rho(g) P^{-1}` for every generator.
    pub fn conjugated(&self, p: &ComplexMatrix) -> Result<Self> {
        let pinv = matcore::inverse(p)?;
        Ok(self.with_generators(self.generators.iter().map(|g| p * g * &pinv).collect()))
    }

    /// Generator inverses, in order.
    pub fn inverses(&self) -> Result<Vec<ComplexMatrix>> {
        self.generators.iter().map(matcore::inverse).collect()
    }

    /// Image of a word given as signed 1-based generator indices.
    pub fn evaluate_word(&self, word: &[i64]) -> Result<ComplexMatrix> {
        let inverses = self.inverses()?;
        self.evaluate_with(word, &inverses)
    }

    pub(crate) fn evaluate_with(&self, word: &[i64], inverses: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let mut out = matcore::identity(self.dim());
        for &letter in word {
            let idx = letter.unsigned_abs() as usize;
            if letter == 0 || idx > self.generators.len() {
                return Err(Error::Parameter(format!(
                    "letter {letter} out of range for {} generators",
                    self.generators.len()
                )));
            }
            out = if letter > 0 {
                out * &self.generators[idx - 1]
            } else {
                out * &inverses[idx - 1]
            };
        }
        Ok(out)
    }

    /// `||rho(w) - I|| / sqrt(n)` for each declared relation.
    pub fn relation_residuals(&self) -> Result<Vec<f64>> {
        let Some(relations) = &self.relations else {
            return Ok(vec![]);
        };
        let inverses = self.inverses()?;
        let id = matcore::identity(self.dim());
        relations
            .iter()
            .map(|w| {
                let m = self.evaluate_with(w, &inverses)?;
                Ok(matcore::fro(&(m - &id)) / (self.dim() as f64).sqrt())
            })
            .collect()
    }
}

// -------------------------------------------------------------------------
// JSON
// -------------------------------------------------------------------------

fn parse_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn number(v: &Value, pointer: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(pointer, "expected a finite number"))
}

fn complex(v: &Value, pointer: &str) -> Result<Complex64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(c(number(re, &format!("{pointer}/0"))?, number(im, &format!("{pointer}/1"))?)),
        _ => Err(parse_err(pointer, "expected a [re, im] pair")),
    }
}

/// Reads a row-major list of `n*n` `[re, im]` pairs.
pub fn matrix_from_value(v: &Value, n: usize, pointer: &str) -> Result<ComplexMatrix> {
    let entries = v
        .as_array()
        .ok_or_else(|| parse_err(pointer, "expected an array of [re, im] pairs"))?;
    if entries.len() != n * n {
        return Err(parse_err(
            pointer,
            format!("expected {} entries, found {}", n * n, entries.len()),
        ));
    }
    let values = entries
        .iter()
        .enumerate()
        .map(|(k, e)| complex(e, &format!("{pointer}/{k}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::from_row_slice(n, n, &values))
}

/// Row-major list of `[re, im]` pairs.
pub fn matrix_to_value(m: &ComplexMatrix) -> Value {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(r, col)];
            out.push(json!([z.re, z.im]));
        }
    }
    Value::Array(out)
}

pub fn complex_to_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub(crate) fn usize_field(doc: &Value, key: &str) -> Result<usize> {
    let v = doc
        .get(key)
        .ok_or_else(|| parse_err(format!("/{key}"), "missing field"))?;
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("/{key}"), "expected a non-negative integer"))
}

/// Parses a representation document and checks ambient membership.
pub fn load_representation(bytes: &[u8], tol: &Tolerance) -> Result<Representation> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| parse_err("", e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| parse_err("", "document must be a JSON object"))?;
    let family: Family = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err("/kind", "expected one of GL, SL, O, SO, Sp"))?
        .parse()
        .map_err(|e: Error| parse_err("/kind", e.to_string()))?;
    let n = usize_field(&doc, "n")?;
    let kind = GroupKind::new(family, n).map_err(|e| parse_err("/n", e.to_string()))?;
    let gens = obj
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("/generators", "expected an array of matrices"))?;
    let generators = gens
        .iter()
        .enumerate()
        .map(|(i, g)| matrix_from_value(g, n, &format!("/generators/{i}")))
        .collect::<Result<Vec<_>>>()?;
    let labels = match obj.get("labels") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            if items.len() != generators.len() {
                return Err(parse_err("/labels", "one label per generator is required"));
            }
            Some(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        l.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| parse_err(format!("/labels/{i}"), "expected a string"))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        Some(_) => return Err(parse_err("/labels", "expected an array of strings")),
    };
    let relations = match obj.get("relations") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .enumerate()
                .map(|(i, w)| parse_word(w, generators.len(), &format!("/relations/{i}")))
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(parse_err("/relations", "expected an array of words")),
    };
    let mut rep = Representation::new(kind, generators, tol)?;
    rep.labels = labels;
    rep.relations = relations;
    Ok(rep)
}

fn parse_word(v: &Value, num_generators: usize, pointer: &str) -> Result<Vec<i64>> {
    let letters = v
        .as_array()
        .ok_or_else(|| parse_err(pointer, "expected an array of signed generator indices"))?;
    letters
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let p = format!("{pointer}/{k}");
            let x = l.as_i64().ok_or_else(|| parse_err(&p, "expected an integer"))?;
            if x == 0 || x.unsigned_abs() as usize > num_generators {
                return Err(parse_err(&p, format!("letter {x} out of range")));
            }
            Ok(x)
        })
        .collect()
}

pub fn representation_to_value(rep: &Representation) -> Value {
    let mut doc = json!({
        "kind": rep.kind.family.name(),
        "n": rep.kind.n,
        "generators": rep.generators.iter().map(matrix_to_value).collect::<Vec<_>>(),
    });
    if let Some(labels) = &rep.labels {
        doc["labels"] = json!(labels);
    }
    if let Some(relations) = &rep.relations {
        doc["relations"] = json!(relations);
    }
    doc
}

/// Serialises to the document format. Floats are written in shortest
/// round-trip form, so loading the result reproduces the matrices exactly.
pub fn save_representation(rep: &Representation) -> Vec<u8> {
    serde_json::to_vec_pretty(&representation_to_value(rep)).expect("JSON values always serialise")
}
