//! Small numeric helpers shared by the series code.

use core::ops::AddAssign;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Pow};

/// `p^e` in binary64. Integral exponents go through `pow`, which is exact
/// whenever the result is representable.
#[inline]
pub fn pow_p(p: u32, e: f64) -> f64 {
    libm::pow(p as f64, e)
}

#[inline]
pub fn powi_p(p: u32, e: i32) -> f64 {
    libm::pow(p as f64, e as f64)
}

/// Haar measure of the sphere `||x|| = p^k` in Q_p^n.
#[inline]
pub fn sphere_volume(p: u32, n: u32, k: i32) -> f64 {
    let pf = p as f64;
    libm::pow(pf, k as f64 * n as f64) * (1.0 - libm::pow(pf, -(n as f64)))
}

/// Haar measure of the ball `||x|| <= p^k` in Q_p^n.
#[inline]
pub fn ball_volume(p: u32, n: u32, k: i32) -> f64 {
    libm::pow(p as f64, k as f64 * n as f64)
}

/// `p^e` as an exact rational.
pub fn rational_pow(p: u32, e: i64) -> BigRational {
    let base = BigInt::from(p);
    if e >= 0 {
        BigRational::from_integer(base.pow(e as u64))
    } else {
        BigRational::new(BigInt::one(), base.pow((-e) as u64))
    }
}

pub fn sphere_volume_exact(p: u32, n: u32, k: i64) -> BigRational {
    // p^{(k-1)n} (p^n - 1)
    rational_pow(p, (k - 1) * n as i64) * (rational_pow(p, n as i64) - BigRational::one())
}

pub fn ball_volume_exact(p: u32, n: u32, k: i64) -> BigRational {
    rational_pow(p, k * n as i64)
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
    abs: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if libm::fabs(self.sum) >= libm::fabs(v) {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
        self.abs += libm::fabs(v);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    /// Sum of absolute values of everything added so far.
    pub fn abs_sum(&self) -> f64 {
        self.abs
    }
}

impl AddAssign<f64> for Compensated {
    fn add_assign(&mut self, v: f64) {
        self.add(v);
    }
}

/// Compensated accumulator for complex values.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: Compensated,
    im: Compensated,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn abs_sum(&self) -> f64 {
        self.re.abs_sum() + self.im.abs_sum()
    }
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, v: Complex64) {
        self.add(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn ball_is_union_of_spheres_exactly() {
        for &(p, n) in &[(2u32, 1u32), (3, 2), (5, 3)] {
            for big_k in -3i64..4 {
                let mut acc = BigRational::zero();
                // spheres k <= K, truncated at k >= K - 60, plus the ball B_{K-61}
                let lo = big_k - 60;
                for k in lo..=big_k {
                    acc += sphere_volume_exact(p, n, k);
                }
                acc += ball_volume_exact(p, n, lo - 1);
                assert_eq!(acc, ball_volume_exact(p, n, big_k));
            }
        }
    }

    #[test]
    fn compensated_sum_cancels() {
        let mut s = Compensated::new();
        s += 1e16;
        s += 1.0;
        s += -1e16;
        assert_eq!(s.value(), 1.0);
    }
}
