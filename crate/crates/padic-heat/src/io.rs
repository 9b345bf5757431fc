//! JSON formats for scalars, locally constant functions, Cauchy problems
//! and polynomials, and number formatting for CSV output.
//!
//! Scalars are `["<ord>", "<digits>"]` with base-p digits least significant
//! first (`["0", ""]` is zero). Complex numbers are `[re, im]`.

use std::fmt;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use padic_heat_core::cauchy::{CauchyProblem, Source};
use padic_heat_core::diffusion::Trajectory;
use padic_heat_core::elliptic::{HomogeneousPoly, Monomial};
use padic_heat_core::kernel::KernelParams;
use padic_heat_core::{Ball, LocallyConstantFunction, PAdicPoint, PAdicScalar, Piece, RadialFunction, Tail};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{file}: cannot read: {source}")]
    Read { file: String, source: std::io::Error },
    /// Malformed input, with the position and field path of the problem.
    #[error("{file}:{line}:{column}: at `{path}`: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        path: String,
        message: String,
    },
    /// Well-formed JSON describing an invalid object.
    #[error("{file}: {message}")]
    Invalid { file: String, message: String },
    #[error("cannot serialize: {0}")]
    Unsupported(String),
}

/// Parses `text` as `T`, reporting line, column and field path on failure.
pub fn parse_json<T: for<'de> Deserialize<'de>>(file: &str, text: &str) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        IoError::Parse {
            file: file.to_string(),
            line: inner.line(),
            column: inner.column(),
            path,
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| IoError::Parse {
        file: file.to_string(),
        line: e.line(),
        column: e.column(),
        path: ".".into(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(value)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Reads a file, or stdin for `-`.
pub fn read_input(path: &Path) -> Result<String, IoError> {
    let file = path.display().to_string();
    if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|source| IoError::Read { file, source })?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|source| IoError::Read { file, source })
}

/// `x` with 17 significant digits, enough to round-trip any binary64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

// ---------------------------------------------------------------- scalars

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarJson(pub String, pub String);

pub fn scalar_to_json(x: &PAdicScalar) -> Result<ScalarJson, IoError> {
    let p = x.prime();
    if p > 36 {
        return Err(IoError::Unsupported(format!("digits of a {p}-adic number as base-{p} characters")));
    }
    match x.order() {
        None => Ok(ScalarJson("0".into(), String::new())),
        Some(o) => {
            let digits = x.digits().iter().map(|&d| char::from_digit(d, p).expect("digit below p")).collect();
            Ok(ScalarJson(o.to_string(), digits))
        }
    }
}

pub fn scalar_from_json(p: u32, s: &ScalarJson) -> Result<PAdicScalar, String> {
    let ord: i32 = s.0.trim().parse().map_err(|_| format!("order {:?} is not an integer", s.0))?;
    if p > 36 {
        return Err(format!("base-{p} digit strings are not supported"));
    }
    let digits = s
        .1
        .chars()
        .map(|c| c.to_digit(p).ok_or_else(|| format!("{c:?} is not a base-{p} digit")))
        .collect::<Result<Vec<_>, _>>()?;
    PAdicScalar::from_digits(p, ord, digits).map_err(|e| e.to_string())
}

pub fn point_to_json(x: &PAdicPoint) -> Result<Vec<ScalarJson>, IoError> {
    x.coords().iter().map(scalar_to_json).collect()
}

pub fn point_from_json(p: u32, n: usize, coords: &[ScalarJson]) -> Result<PAdicPoint, String> {
    if coords.len() != n {
        return Err(format!("point has {} coordinates, expected {n}", coords.len()));
    }
    let c = coords.iter().map(|s| scalar_from_json(p, s)).collect::<Result<Vec<_>, _>>()?;
    PAdicPoint::new(c).map_err(|e| e.to_string())
}

fn c64(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

// ------------------------------------------------------ radial functions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailJson {
    Zero,
    Constant { value: [f64; 2] },
    /// `coeff * p^(m * sigma)`.
    PowerLaw { coeff: [f64; 2], sigma: f64 },
}

/// A radial function: `table[i]` on the sphere `p^(m_lo + i)`, tails
/// below and above the table, and the value at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialJson {
    pub m_lo: i32,
    #[serde(default)]
    pub table: Vec<[f64; 2]>,
    pub tail_lo: TailJson,
    pub tail_hi: TailJson,
    #[serde(default)]
    pub at_zero: [f64; 2],
}

fn tail_from_json(t: &TailJson) -> Tail {
    match *t {
        TailJson::Zero => Tail::Zero,
        TailJson::Constant { value } => Tail::Constant(c64(value)),
        TailJson::PowerLaw { coeff, sigma } => Tail::PowerLaw { coeff: c64(coeff), sigma },
    }
}

fn tail_to_json(t: &Tail) -> Result<TailJson, IoError> {
    Ok(match t {
        Tail::Zero => TailJson::Zero,
        Tail::Constant(c) => TailJson::Constant { value: pair(*c) },
        Tail::PowerLaw { coeff, sigma } => TailJson::PowerLaw { coeff: pair(*coeff), sigma: *sigma },
        Tail::Evaluator(_) => return Err(IoError::Unsupported("a radial tail given by a closure".into())),
    })
}

pub fn radial_from_json(p: u32, n: u32, r: &RadialJson) -> Result<RadialFunction, String> {
    RadialFunction::new(
        p,
        n,
        r.m_lo,
        r.table.iter().copied().map(c64).collect(),
        tail_from_json(&r.tail_lo),
        tail_from_json(&r.tail_hi),
        c64(r.at_zero),
    )
    .map_err(|e| e.to_string())
}

pub fn radial_to_json(f: &RadialFunction) -> Result<RadialJson, IoError> {
    let (lo, hi) = f.table_range();
    Ok(RadialJson {
        m_lo: lo,
        table: (lo..=hi).map(|m| pair(f.sphere_value(m))).collect(),
        tail_lo: tail_to_json(f.tail_lo())?,
        tail_hi: tail_to_json(f.tail_hi())?,
        at_zero: pair(f.value_at_zero()),
    })
}

// ------------------------------------------ locally constant functions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceJson {
    pub center: Vec<ScalarJson>,
    pub radius_exp: i32,
    pub value: [f64; 2],
}

/// Pieces may be nested: a point takes the value of the smallest ball
/// containing it, then the tail; a `null` tail means zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcfJson {
    #[serde(default)]
    pub pieces: Vec<PieceJson>,
    #[serde(default)]
    pub tail: Option<RadialJson>,
    pub loc_exp: i32,
    #[serde(default)]
    pub growth_exp: f64,
    pub growth_const: f64,
}

pub fn lcf_from_json(p: u32, n: usize, f: &LcfJson) -> Result<LocallyConstantFunction, String> {
    let pieces = f
        .pieces
        .iter()
        .enumerate()
        .map(|(i, pc)| {
            let center = point_from_json(p, n, &pc.center).map_err(|e| format!("pieces[{i}].center: {e}"))?;
            Ok(Piece { ball: Ball::new(center, pc.radius_exp), value: c64(pc.value) })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let tail = match &f.tail {
        Some(t) => radial_from_json(p, n as u32, t).map_err(|e| format!("tail: {e}"))?,
        None => RadialFunction::constant(p, n as u32, Complex64::new(0.0, 0.0)).map_err(|e| e.to_string())?,
    };
    let tail = Some(tail);
    LocallyConstantFunction::layered(p, n, pieces, tail, f.loc_exp, f.growth_exp, f.growth_const).map_err(|e| e.to_string())
}

pub fn lcf_to_json(f: &LocallyConstantFunction) -> Result<LcfJson, IoError> {
    let pieces = f
        .pieces()
        .iter()
        .map(|pc| {
            Ok(PieceJson {
                center: point_to_json(&pc.ball.center)?,
                radius_exp: pc.ball.radius_exp,
                value: pair(pc.value),
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(LcfJson {
        pieces,
        tail: if f.has_zero_tail() { None } else { f.tail().map(radial_to_json).transpose()? },
        loc_exp: f.loc_exp(),
        growth_exp: f.growth_exp(),
        growth_const: f.growth_const(),
    })
}

// ---------------------------------------------------------------- problems

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsJson {
    pub p: u32,
    pub n: u32,
    pub alpha: f64,
    pub a: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceJson {
    Zero,
    Constant { value: [f64; 2] },
    /// `P(τ) ψ(x)`, `P(τ) = sum_i time_poly[i] τ^i`.
    Separable { time_poly: Vec<f64>, space: LcfJson },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub params: ParamsJson,
    pub phi: LcfJson,
    #[serde(default = "zero_source")]
    pub source: SourceJson,
}

fn zero_source() -> SourceJson {
    SourceJson::Zero
}

/// Builds the problem; validation failures (including the growth
/// constraint) come back as [`IoError::Invalid`].
pub fn problem_from_json(file: &str, pj: &ProblemJson) -> Result<CauchyProblem, IoError> {
    let invalid = |message: String| IoError::Invalid { file: file.to_string(), message };
    let pr = &pj.params;
    let params = KernelParams::new(pr.p, pr.n, pr.alpha, pr.a).map_err(|e| invalid(format!("params: {e}")))?;
    let n = pr.n as usize;
    let phi = lcf_from_json(pr.p, n, &pj.phi).map_err(|e| invalid(format!("phi: {e}")))?;
    let source = match &pj.source {
        SourceJson::Zero => Source::Zero,
        SourceJson::Constant { value } => Source::Constant(c64(*value)),
        SourceJson::Separable { time_poly, space } => Source::Separable {
            time_poly: time_poly.clone(),
            space: lcf_from_json(pr.p, n, space).map_err(|e| invalid(format!("source.space: {e}")))?,
        },
    };
    CauchyProblem::new(params, phi, source, pr.horizon).map_err(|e| invalid(e.to_string()))
}

pub fn load_problem(path: &Path) -> Result<CauchyProblem, IoError> {
    let file = path.display().to_string();
    let text = read_input(path)?;
    let pj: ProblemJson = parse_json(&file, &text)?;
    problem_from_json(&file, &pj)
}

// ------------------------------------------------------------- polynomials

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialJson {
    pub exps: Vec<u32>,
    pub coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub p: u32,
    pub n: usize,
    pub d: u32,
    pub monomials: Vec<MonomialJson>,
}

pub fn poly_from_json(file: &str, pj: &PolyJson) -> Result<HomogeneousPoly, IoError> {
    let monomials = pj.monomials.iter().map(|m| Monomial { exps: m.exps.clone(), coeff: m.coeff }).collect();
    HomogeneousPoly::new(pj.p, pj.n, pj.d, monomials).map_err(|e| IoError::Invalid { file: file.into(), message: e.to_string() })
}

pub fn poly_to_json(f: &HomogeneousPoly) -> PolyJson {
    PolyJson {
        p: f.prime(),
        n: f.nvars(),
        d: f.degree(),
        monomials: f.monomials().iter().map(|m| MonomialJson { exps: m.exps.clone(), coeff: m.coeff }).collect(),
    }
}

pub fn load_poly(path: &Path) -> Result<HomogeneousPoly, IoError> {
    let file = path.display().to_string();
    let text = read_input(path)?;
    let pj: PolyJson = parse_json(&file, &text)?;
    poly_from_json(&file, &pj)
}

/// Human-readable form, e.g. `x1^2 - 2*x2^2`.
pub struct PolyDisplay<'a>(pub &'a HomogeneousPoly);

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.monomials().iter().rev().enumerate() {
            let c = m.coeff;
            match (i, c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut first = true;
            if c.unsigned_abs() != 1 {
                write!(f, "{}", c.unsigned_abs())?;
                first = false;
            }
            for (k, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", k + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

// ----------------------------------------------------------- trajectories

/// One JSONL record per step of a trajectory. `radius_exp` is the exponent
/// of `||state||` (`null` at the origin); `increment_exp` that of the
/// increment taken to reach it (`null` at step 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub path: u64,
    pub step: usize,
    pub t: f64,
    pub state: Vec<ScalarJson>,
    pub radius_exp: Option<i32>,
    pub increment_exp: Option<i32>,
    pub clipped: bool,
}

pub fn step_records(tr: &Trajectory) -> Result<Vec<StepRecord>, IoError> {
    tr.states
        .iter()
        .enumerate()
        .map(|(k, x)| {
            Ok(StepRecord {
                path: tr.path,
                step: k,
                t: tr.times[k],
                state: point_to_json(x)?,
                radius_exp: x.norm_exp(),
                increment_exp: k.checked_sub(1).map(|j| tr.increments[j]),
                clipped: k.checked_sub(1).is_some_and(|j| tr.clipped[j]),
            })
        })
        .collect()
}
