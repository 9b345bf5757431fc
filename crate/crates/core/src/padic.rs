//! Finite-precision elements of Q_p and Q_p^n.
//!
//! A nonzero scalar is stored as `p^order * sum_j digits[j] p^j` with
//! `digits[0] != 0`. Its value is known modulo `p^(order + digits.len())`;
//! this exponent is the absolute precision cap. Arithmetic keeps the smaller
//! cap of its operands and drops everything above it. Zero is exact.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};

/// Default number of significant digits for scalars built from rationals.
pub const DEFAULT_WIDTH: usize = 24;

const ZERO_ORDER: i32 = i32::MAX;

/// Returns true if `p` is prime (trial division; primes here are small).
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(domain(alloc::format!("{p} is not prime")))
    }
}

/// Position of a point relative to the origin: either the origin itself or
/// the sphere `||x|| = p^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Radius {
    Origin,
    Sphere(i32),
}

impl Radius {
    /// Radius exponent, with the origin mapped to `None`.
    pub fn exponent(self) -> Option<i32> {
        match self {
            Radius::Origin => None,
            Radius::Sphere(m) => Some(m),
        }
    }
}

impl PartialOrd for Radius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Radius {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Radius::Origin, Radius::Origin) => Ordering::Equal,
            (Radius::Origin, _) => Ordering::Less,
            (_, Radius::Origin) => Ordering::Greater,
            (Radius::Sphere(a), Radius::Sphere(b)) => a.cmp(b),
        }
    }
}

/// An element of Q_p at finite precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    prime: u32,
    order: i32,
    digits: Vec<u32>,
}

fn p_adic_order_i128(mut v: i128, p: i128) -> (i32, i128) {
    let mut k = 0;
    while v % p == 0 {
        v /= p;
        k += 1;
    }
    (k, v)
}

fn inverse_mod(a: i128, p: i128) -> i128 {
    // Fermat: a^(p-2) mod p
    let mut base = a.rem_euclid(p);
    let mut e = p - 2;
    let mut acc = 1i128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

impl PAdicScalar {
    pub fn zero(prime: u32) -> Self {
        PAdicScalar {
            prime,
            order: ZERO_ORDER,
            digits: Vec::new(),
        }
    }

    /// Builds the expansion of `num/den` with `width` significant digits.
    pub fn from_rational(prime: u32, num: i128, den: i128, width: usize) -> Result<Self> {
        check_prime(prime)?;
        if den == 0 {
            return Err(domain("zero denominator"));
        }
        if width == 0 {
            return Err(domain("width must be positive"));
        }
        if num == 0 {
            return Ok(Self::zero(prime));
        }
        const LIMIT: i128 = 1 << 100;
        if num.abs() > LIMIT || den.abs() > LIMIT {
            return Err(domain("rational components exceed 2^100"));
        }
        let p = prime as i128;
        let (a, u) = p_adic_order_i128(num, p);
        let (b, w) = p_adic_order_i128(den, p);
        let w_inv = inverse_mod(w, p);
        let mut digits = Vec::with_capacity(width);
        let mut r = u;
        for _ in 0..width {
            let d = (r.rem_euclid(p) * w_inv).rem_euclid(p);
            digits.push(d as u32);
            r = (r - d * w) / p;
        }
        Ok(PAdicScalar {
            prime,
            order: a - b,
            digits,
        })
    }

    pub fn from_integer(prime: u32, value: i128, width: usize) -> Result<Self> {
        Self::from_rational(prime, value, 1, width)
    }

    /// Builds `sum_j digits[j] p^(lowest + j)`; leading zeros are stripped and
    /// the precision cap is `lowest + digits.len()`.
    pub fn from_digits(prime: u32, lowest: i32, digits: Vec<u32>) -> Result<Self> {
        check_prime(prime)?;
        if digits.iter().any(|&d| d >= prime) {
            return Err(domain("digit out of range"));
        }
        Ok(Self::normalized(prime, lowest, digits))
    }

    fn normalized(prime: u32, lowest: i32, mut digits: Vec<u32>) -> Self {
        match digits.iter().position(|&d| d != 0) {
            None => Self::zero(prime),
            Some(idx) => {
                digits.drain(..idx);
                PAdicScalar {
                    prime,
                    order: lowest + idx as i32,
                    digits,
                }
            }
        }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// The p-adic order; `None` for zero.
    pub fn order(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.order)
        }
    }

    /// Significant digits, least significant first.
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Exponent above which digits are unknown; `None` for exact zero.
    pub fn precision_cap(&self) -> Option<i32> {
        self.order().map(|o| o + self.digits.len() as i32)
    }

    /// Coefficient of `p^exponent` in the expansion.
    pub fn digit_at(&self, exponent: i32) -> u32 {
        if self.is_zero() || exponent < self.order {
            return 0;
        }
        let idx = (exponent as i64 - self.order as i64) as usize;
        self.digits.get(idx).copied().unwrap_or(0)
    }

    /// `|x|_p` as a float.
    pub fn norm(&self) -> f64 {
        match self.order() {
            None => 0.0,
            Some(o) => libm::pow(self.prime as f64, -(o as f64)),
        }
    }

    fn check_same_prime(&self, other: &Self) {
        assert_eq!(
            self.prime, other.prime,
            "mixed primes {} and {}",
            self.prime, other.prime
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_prime(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.order.min(other.order);
        let cap = self
            .precision_cap()
            .unwrap()
            .min(other.precision_cap().unwrap());
        let len = (cap - lo) as usize;
        let p = self.prime as u64;
        let mut out = Vec::with_capacity(len);
        let mut carry = 0u64;
        for i in 0..len {
            let e = lo + i as i32;
            let s = self.digit_at(e) as u64 + other.digit_at(e) as u64 + carry;
            out.push((s % p) as u32);
            carry = s / p;
        }
        Self::normalized(self.prime, lo, out)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.prime;
        let mut digits = Vec::with_capacity(self.digits.len());
        digits.push(p - self.digits[0]);
        digits.extend(self.digits[1..].iter().map(|&d| p - 1 - d));
        PAdicScalar {
            prime: p,
            order: self.order,
            digits,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product with relative precision `min(width_a, width_b)`.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_same_prime(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.prime);
        }
        let w = self.digits.len().min(other.digits.len());
        let p = self.prime as u128;
        let mut acc = vec![0u128; w];
        for (i, &a) in self.digits[..w].iter().enumerate() {
            for (j, &b) in other.digits[..w - i].iter().enumerate() {
                acc[i + j] += a as u128 * b as u128;
            }
        }
        let mut out = Vec::with_capacity(w);
        let mut carry = 0u128;
        for v in acc {
            let s = v + carry;
            out.push((s % p) as u32);
            carry = s / p;
        }
        Self::normalized(self.prime, self.order + other.order, out)
    }

    /// Multiplies by `p^k` (a shift of the order).
    pub fn shift(&self, k: i32) -> Self {
        let mut out = self.clone();
        if !out.is_zero() {
            out.order += k;
        }
        out
    }

    /// Keeps only the digits below `cap`.
    pub fn truncate_to(&self, cap: i32) -> Self {
        match self.order() {
            None => self.clone(),
            Some(o) if o >= cap => Self::zero(self.prime),
            Some(o) => {
                let keep = ((cap - o) as usize).min(self.digits.len());
                Self::normalized(self.prime, o, self.digits[..keep].to_vec())
            }
        }
    }

    /// The fractional part `{x}_p` in binary64.
    pub fn fractional_part(&self) -> f64 {
        let o = match self.order() {
            Some(o) if o < 0 => o,
            _ => return 0.0,
        };
        let p = self.prime as f64;
        let mut acc = 0.0;
        for j in 0..(-o) {
            acc = (acc + self.digit_at(o + j) as f64) / p;
        }
        acc
    }

    /// The fractional part `{x}_p` as an exact rational in `[0, 1)`.
    pub fn fractional_part_exact(&self) -> BigRational {
        let o = match self.order() {
            Some(o) if o < 0 => o,
            _ => return BigRational::zero(),
        };
        let p = BigInt::from(self.prime);
        let mut num = BigInt::zero();
        let mut scale = BigInt::one();
        for j in 0..(-o) {
            num += &scale * BigInt::from(self.digit_at(o + j));
            scale *= &p;
        }
        BigRational::new(num, scale)
    }

    /// The standard additive character `exp(2 pi i {x}_p)`.
    pub fn character(&self) -> Complex64 {
        let f = self.fractional_part();
        if f == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let angle = 2.0 * PI * f;
        Complex64::new(libm::cos(angle), libm::sin(angle))
    }
}

/// A point of Q_p^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicPoint {
    coords: Vec<PAdicScalar>,
}

impl PAdicPoint {
    pub fn new(coords: Vec<PAdicScalar>) -> Result<Self> {
        let first = coords
            .first()
            .ok_or_else(|| domain("a point needs at least one coordinate"))?;
        if coords.iter().any(|c| c.prime != first.prime) {
            return Err(Error::Domain("coordinates use different primes".into()));
        }
        Ok(PAdicPoint { coords })
    }

    pub fn zero(prime: u32, dim: usize) -> Self {
        PAdicPoint {
            coords: vec![PAdicScalar::zero(prime); dim],
        }
    }

    /// The point `(p^-m, 0, ..., 0)`, which has norm `p^m`.
    pub fn on_sphere(prime: u32, dim: usize, m: i32) -> Self {
        let mut coords = vec![PAdicScalar::zero(prime); dim];
        let mut digits = vec![0; DEFAULT_WIDTH];
        digits[0] = 1;
        coords[0] = PAdicScalar {
            prime,
            order: -m,
            digits,
        };
        PAdicPoint { coords }
    }

    /// A representative point for a radius: the origin or `on_sphere`.
    pub fn at_radius(prime: u32, dim: usize, r: Radius) -> Self {
        match r {
            Radius::Origin => Self::zero(prime, dim),
            Radius::Sphere(m) => Self::on_sphere(prime, dim, m),
        }
    }

    pub fn prime(&self) -> u32 {
        self.coords[0].prime
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[PAdicScalar] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(PAdicScalar::is_zero)
    }

    /// Exponent `m` with `||x|| = p^m`; `None` at the origin.
    pub fn norm_exp(&self) -> Option<i32> {
        self.coords.iter().filter_map(|c| c.order()).min().map(|o| -o)
    }

    pub fn radius(&self) -> Radius {
        match self.norm_exp() {
            None => Radius::Origin,
            Some(m) => Radius::Sphere(m),
        }
    }

    pub fn norm(&self) -> f64 {
        match self.norm_exp() {
            None => 0.0,
            Some(m) => libm::pow(self.prime() as f64, m as f64),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&PAdicScalar, &PAdicScalar) -> PAdicScalar) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        PAdicPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, PAdicScalar::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, PAdicScalar::sub)
    }

    pub fn neg(&self) -> Self {
        PAdicPoint {
            coords: self.coords.iter().map(PAdicScalar::neg).collect(),
        }
    }

    /// Multiplies every coordinate by `p^k`; the norm becomes `p^-k ||x||`.
    pub fn shift(&self, k: i32) -> Self {
        PAdicPoint {
            coords: self.coords.iter().map(|c| c.shift(k)).collect(),
        }
    }

    /// `x . y = sum_i x_i y_i`.
    pub fn dot(&self, other: &Self) -> PAdicScalar {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(PAdicScalar::zero(self.prime()), |acc, (a, b)| acc.add(&a.mul(b)))
    }
}

/// The closed ball `||x - center|| <= p^radius_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    pub center: PAdicPoint,
    pub radius_exp: i32,
}

impl Ball {
    pub fn new(center: PAdicPoint, radius_exp: i32) -> Self {
        Ball { center, radius_exp }
    }

    pub fn contains(&self, x: &PAdicPoint) -> bool {
        match x.sub(&self.center).norm_exp() {
            None => true,
            Some(m) => m <= self.radius_exp,
        }
    }

    /// True if `other` is a subset of `self`.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.radius_exp <= self.radius_exp && self.contains(&other.center)
    }

    /// Balls are nested or disjoint; this tells which.
    pub fn intersects(&self, other: &Ball) -> bool {
        let (small, big) = if self.radius_exp <= other.radius_exp {
            (self, other)
        } else {
            (other, self)
        };
        big.contains(&small.center)
    }

    /// Largest radius exponent of a point in the ball, or `None` if the
    /// ball is `{0}`-centred with no nonzero extent (never happens for
    /// finite radii).
    pub fn max_norm_exp(&self) -> i32 {
        match self.center.norm_exp() {
            Some(m) if m > self.radius_exp => m,
            _ => self.radius_exp,
        }
    }

    /// Norm exponent of the point of smallest norm, `None` if `0` is inside.
    pub fn min_norm_exp(&self) -> Option<i32> {
        match self.center.norm_exp() {
            Some(m) if m > self.radius_exp => Some(m),
            _ => None,
        }
    }
}
