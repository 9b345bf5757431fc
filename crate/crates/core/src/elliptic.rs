//! Homogeneous polynomials whose reduction mod p has no nonzero root on
//! any coordinate stratum, and the norm identity `|f(x)|_p = ||x||^d`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::diffusion::path_rng;
use crate::error::{domain, Error, Result};
use crate::padic::{check_prime, PAdicPoint, PAdicScalar};

/// Enumeration cap for `F_p^n`.
pub const ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousPoly {
    prime: u32,
    nvars: usize,
    degree: u32,
    monomials: Vec<Monomial>,
}

impl HomogeneousPoly {
    /// Like terms are merged; every coefficient must be a unit mod `p`.
    pub fn new(prime: u32, nvars: usize, degree: u32, monomials: Vec<Monomial>) -> Result<Self> {
        check_prime(prime)?;
        if nvars == 0 || degree == 0 {
            return Err(domain("need at least one variable and positive degree"));
        }
        let mut merged: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
        for m in monomials {
            if m.exps.len() != nvars {
                return Err(domain(format!("monomial has {} exponents, expected {nvars}", m.exps.len())));
            }
            if m.exps.iter().sum::<u32>() != degree {
                return Err(domain(format!("monomial {:?} is not of degree {degree}", m.exps)));
            }
            *merged.entry(m.exps).or_insert(0) += m.coeff as i128;
        }
        let mut out = Vec::new();
        for (exps, c) in merged {
            if c == 0 {
                continue;
            }
            if c.rem_euclid(prime as i128) == 0 {
                return Err(domain(format!("coefficient {c} of {exps:?} is not a unit mod {prime}")));
            }
            let coeff = i64::try_from(c).map_err(|_| domain("coefficient overflows i64"))?;
            out.push(Monomial { exps, coeff });
        }
        if out.is_empty() {
            return Err(domain("polynomial is zero"));
        }
        Ok(HomogeneousPoly { prime, nvars, degree, monomials: out })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// `f̄(x)` for `x` in `F_p^n`.
    pub fn eval_mod_p(&self, x: &[u32]) -> u32 {
        let p = self.prime as u64;
        let mut acc = 0u64;
        for m in &self.monomials {
            let mut term = (m.coeff.rem_euclid(p as i64)) as u64;
            for (&xi, &e) in x.iter().zip(&m.exps) {
                for _ in 0..e {
                    term = term * xi as u64 % p;
                }
            }
            acc = (acc + term) % p;
        }
        acc as u32
    }

    /// `f(x)` by digit arithmetic at the precision of `x`.
    pub fn evaluate(&self, x: &PAdicPoint, width: usize) -> Result<PAdicScalar> {
        if x.prime() != self.prime || x.dim() != self.nvars {
            return Err(domain("point lives in a different space"));
        }
        let mut acc = PAdicScalar::zero(self.prime);
        for m in &self.monomials {
            let mut term = PAdicScalar::from_integer(self.prime, m.coeff as i128, width)?;
            for (c, &e) in x.coords().iter().zip(&m.exps) {
                for _ in 0..e {
                    term = term.mul(c);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Product of two polynomials (coefficients need not stay units).
    fn mul_raw(a: &BTreeMap<Vec<u32>, i128>, b: &BTreeMap<Vec<u32>, i128>) -> Result<BTreeMap<Vec<u32>, i128>> {
        let mut out = BTreeMap::new();
        for (ea, ca) in a {
            for (eb, cb) in b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = ca.checked_mul(*cb).ok_or_else(|| Error::Construction("coefficient overflow".into()))?;
                let slot = out.entry(e).or_insert(0i128);
                *slot = slot.checked_add(c).ok_or_else(|| Error::Construction("coefficient overflow".into()))?;
            }
        }
        Ok(out)
    }
}

fn check_cap(p: u32, n: usize) -> Result<u64> {
    let total = (p as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if total > ENUMERATION_CAP {
        return Err(Error::Resource { requested: total as u128, cap: ENUMERATION_CAP as u128 });
    }
    Ok(total)
}

fn point_of(mut idx: u64, p: u32, n: usize) -> Vec<u32> {
    let mut x = vec![0u32; n];
    for xi in x.iter_mut() {
        *xi = (idx % p as u64) as u32;
        idx /= p as u64;
    }
    x
}

/// True iff `f̄` has no root in `F_p^n` other than 0.
pub fn is_elliptic_mod_p(f: &HomogeneousPoly) -> Result<bool> {
    let total = check_cap(f.prime, f.nvars)?;
    Ok((1..total).all(|i| f.eval_mod_p(&point_of(i, f.prime, f.nvars)) != 0))
}

/// A root of `f̄` on the stratum where exactly the coordinates in `subset`
/// (0-based) are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticityWitness {
    pub subset: Vec<usize>,
    pub point: Vec<u32>,
}

/// Checks every stratum `T̄_I`, `I` non-empty, in order of the bitmask of
/// `I`; returns the first root found.
pub fn is_strongly_elliptic(f: &HomogeneousPoly) -> Result<(bool, Option<EllipticityWitness>)> {
    let (p, n) = (f.prime, f.nvars);
    check_cap(p, n)?;
    for mask in 1u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let k = subset.len();
        let count = ((p - 1) as u64).pow(k as u32);
        for idx in 0..count {
            let digits = point_of(idx, p - 1, k);
            let mut x = vec![0u32; n];
            for (&i, d) in subset.iter().zip(digits) {
                x[i] = d + 1;
            }
            if f.eval_mod_p(&x) == 0 {
                return Ok((false, Some(EllipticityWitness { subset, point: x })));
            }
        }
    }
    Ok((true, None))
}

/// True when `v` is not an `l`-th power in `F_p^×`.
fn lacks_lth_root(v: u32, l: u32, p: u32) -> bool {
    (1..p).all(|y| {
        let mut acc = 1u64;
        for _ in 0..l {
            acc = acc * y as u64 % p as u64;
        }
        acc != v as u64
    })
}

/// Exponents `l` in `2..p` admitting a unit without an `l`-th root, each
/// with those units.
pub fn admissible_choices(p: u32) -> Vec<(u32, Vec<u32>)> {
    (2..p)
        .filter_map(|l| {
            let units: Vec<u32> = (1..p).filter(|&v| lacks_lth_root(v, l, p)).collect();
            (!units.is_empty()).then_some((l, units))
        })
        .collect()
}

/// The inductive construction: start from `x_1`, then repeatedly
/// `g^l - υ x_{k+1}^{l deg g}` with `υ` lacking an `l`-th root mod `p`.
/// `seed` picks `l` and `υ` (the smallest choices when `seed = 0`); choices
/// whose expansion has a coefficient divisible by `p` are skipped.
pub fn generate_strongly_elliptic(p: u32, n_target: usize, seed: u64) -> Result<HomogeneousPoly> {
    check_prime(p)?;
    if n_target == 0 {
        return Err(domain("need at least one variable"));
    }
    let choices = admissible_choices(p);
    if n_target > 1 && choices.is_empty() {
        return Err(Error::Construction(format!(
            "no unit of F_{p}^× lacks an l-th root for 2 <= l < {p}; the inductive step is unavailable"
        )));
    }
    let mut rng = path_rng(seed, 0x656c6c);
    let mut g: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
    let mut e1 = vec![0u32; n_target];
    e1[0] = 1;
    g.insert(e1, 1);
    let mut deg = 1u32;
    for k in 1..n_target {
        // ordered candidates: the seeded pick first, then the rest
        let mut cands: Vec<(u32, u32)> = choices.iter().flat_map(|(l, us)| us.iter().map(move |&u| (*l, u))).collect();
        if seed != 0 {
            let first = rng.gen_range(0..cands.len());
            cands.rotate_left(first);
        }
        let mut next = None;
        for (l, v) in cands {
            let mut f = g.clone();
            for _ in 1..l {
                f = HomogeneousPoly::mul_raw(&f, &g)?;
            }
            let mut ek = vec![0u32; n_target];
            ek[k] = l * deg;
            *f.entry(ek).or_insert(0) -= v as i128;
            f.retain(|_, c| *c != 0);
            if f.values().all(|c| c.rem_euclid(p as i128) != 0) {
                next = Some((f, l));
                break;
            }
        }
        let (f, l) = next.ok_or_else(|| {
            Error::Construction(format!("every admissible (l, υ) produced a coefficient divisible by {p}"))
        })?;
        g = f;
        deg *= l;
    }
    let monomials = g
        .into_iter()
        .map(|(exps, c)| {
            i64::try_from(c)
                .map(|coeff| Monomial { exps, coeff })
                .map_err(|_| Error::Construction("coefficient overflows i64".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    HomogeneousPoly::new(p, n_target, deg, monomials)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormViolation {
    pub point: PAdicPoint,
    /// `ord_p f(x)`.
    pub value_order: i32,
    /// `d · min_i ord_p x_i`.
    pub expected_order: i32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormIdentityReport {
    pub checked: usize,
    pub violations: Vec<NormViolation>,
}

/// Compares `ord f(x)` with `d · ord x` exactly at one point. Fails with a
/// precision error when every computed digit of `f(x)` cancels.
pub fn norm_identity_at(f: &HomogeneousPoly, x: &PAdicPoint, width: usize) -> Result<Option<NormViolation>> {
    let expected = match x.norm_exp() {
        None => {
            return Ok(if f.evaluate(x, width)?.is_zero() {
                None
            } else {
                Some(NormViolation { point: x.clone(), value_order: 0, expected_order: i32::MAX })
            })
        }
        Some(m) => -m * f.degree as i32,
    };
    let v = f.evaluate(x, width)?;
    match v.order() {
        None => Err(Error::Precision(format!(
            "all {width} digits of f(x) cancel; retry with more digits"
        ))),
        Some(o) if o == expected => Ok(None),
        Some(o) => Ok(Some(NormViolation { point: x.clone(), value_order: o, expected_order: expected })),
    }
}

/// A random point: each coordinate is 0 with probability 1/4, otherwise it
/// has a random order in `[-4, 4]` and `width` random digits.
pub fn random_point<R: Rng>(p: u32, n: usize, width: usize, rng: &mut R) -> PAdicPoint {
    loop {
        let coords: Vec<PAdicScalar> = (0..n)
            .map(|_| {
                if rng.gen_range(0..4) == 0 {
                    return PAdicScalar::zero(p);
                }
                let order = rng.gen_range(-4..=4);
                let mut digits: Vec<u32> = (0..width).map(|_| rng.gen_range(0..p)).collect();
                digits[0] = rng.gen_range(1..p);
                PAdicScalar::from_digits(p, order, digits).expect("digits below p")
            })
            .collect();
        if coords.iter().any(|c| !c.is_zero()) {
            return PAdicPoint::new(coords).expect("same prime");
        }
    }
}

/// The identity at the origin and at `samples` random points.
pub fn norm_identity_check(f: &HomogeneousPoly, samples: usize, width: usize, seed: u64) -> Result<NormIdentityReport> {
    let mut rng = path_rng(seed, 0x6e6f726d);
    let mut report = NormIdentityReport::default();
    let zero = PAdicPoint::zero(f.prime, f.nvars);
    let points = core::iter::once(zero).chain((0..samples).map(|_| random_point(f.prime, f.nvars, width, &mut rng)));
    for x in points {
        report.checked += 1;
        if let Some(v) = norm_identity_at(f, &x, width)? {
            report.violations.push(v);
        }
    }
    Ok(report)
}
