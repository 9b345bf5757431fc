//! Exact integration of locally constant functions by coset enumeration.
//!
//! A [`FiniteWindow`] covers the ball `B_K^n` with the cosets of `B_{-L}^n`.
//! Every coset has Haar measure `p^{-nL}`, so a function that is constant on
//! those cosets integrates exactly to a finite sum over representatives.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::num::{powi_p, rational_pow, ComplexSum};
use crate::padic::{check_prime, PAdicPoint, PAdicScalar, Radius, DEFAULT_WIDTH};

/// Default cap on the number of cosets an enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 26;

/// The cosets of `B_{-inner_exp}^n` inside `B_{outer_exp}^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteWindow {
    prime: u32,
    dim: usize,
    outer_exp: i32,
    inner_exp: i32,
    cap: u128,
}

impl FiniteWindow {
    pub fn new(prime: u32, dim: usize, outer_exp: i32, inner_exp: i32) -> Result<Self> {
        check_prime(prime)?;
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        if outer_exp + inner_exp < 0 {
            return Err(domain("window resolution is coarser than its extent"));
        }
        Ok(FiniteWindow {
            prime,
            dim,
            outer_exp,
            inner_exp,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outer_exp(&self) -> i32 {
        self.outer_exp
    }

    pub fn inner_exp(&self) -> i32 {
        self.inner_exp
    }

    /// Number of base-p digits per coordinate.
    pub fn digits_per_coord(&self) -> usize {
        (self.outer_exp + self.inner_exp) as usize
    }

    /// `p^{n(K+L)}`, saturating at `u128::MAX`.
    pub fn coset_count(&self) -> u128 {
        let e = (self.dim * self.digits_per_coord()) as u32;
        (self.prime as u128).checked_pow(e).unwrap_or(u128::MAX)
    }

    /// Haar measure of one coset, `p^{-nL}`.
    pub fn cell_measure(&self) -> f64 {
        powi_p(self.prime, -(self.dim as i32) * self.inner_exp)
    }

    pub fn total_measure(&self) -> f64 {
        powi_p(self.prime, self.dim as i32 * self.outer_exp)
    }

    pub fn check_cap(&self) -> Result<()> {
        let requested = self.coset_count();
        if requested > self.cap {
            Err(Error::Resource {
                requested,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    /// Iterates over one representative per coset, lexicographically in the
    /// `n x (K+L)` digit array.
    pub fn representatives(&self) -> Result<Representatives<'_>> {
        self.check_cap()?;
        Ok(Representatives {
            window: self,
            digits: vec![0; self.dim * self.digits_per_coord()],
            done: false,
        })
    }

    /// Representative of the coset containing `x` (digits below `p^L` kept).
    pub fn representative_of(&self, x: &PAdicPoint) -> PAdicPoint {
        let coords = x
            .coords()
            .iter()
            .map(|c| self.pad(c.truncate_to(self.inner_exp)))
            .collect();
        PAdicPoint::new(coords).expect("same prime")
    }

    fn pad(&self, c: PAdicScalar) -> PAdicScalar {
        match c.order() {
            None => c,
            Some(o) => {
                let width = (self.inner_exp - o) as usize + DEFAULT_WIDTH;
                let digits = (0..width).map(|j| c.digit_at(o + j as i32)).collect();
                PAdicScalar::from_digits(self.prime, o, digits).expect("digits in range")
            }
        }
    }

    fn point_from_digits(&self, digits: &[u32]) -> PAdicPoint {
        let per = self.digits_per_coord();
        let coords = (0..self.dim)
            .map(|i| {
                let mut d = Vec::with_capacity(per + DEFAULT_WIDTH);
                d.extend_from_slice(&digits[i * per..(i + 1) * per]);
                d.resize(per + DEFAULT_WIDTH, 0);
                PAdicScalar::from_digits(self.prime, -self.outer_exp, d).expect("digits in range")
            })
            .collect();
        PAdicPoint::new(coords).expect("same prime")
    }
}

/// Iterator returned by [`FiniteWindow::representatives`].
pub struct Representatives<'a> {
    window: &'a FiniteWindow,
    digits: Vec<u32>,
    done: bool,
}

impl Iterator for Representatives<'_> {
    type Item = PAdicPoint;

    fn next(&mut self) -> Option<PAdicPoint> {
        if self.done {
            return None;
        }
        let point = self.window.point_from_digits(&self.digits);
        // odometer: last slot varies fastest
        let p = self.window.prime;
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < p {
                break;
            }
            self.digits[i] = 0;
        }
        Some(point)
    }
}

/// `sum over cosets f(rep) * p^{-nL}`; exact when `f` is constant on the
/// cosets of `B_{-L}^n` inside `B_K^n`.
pub fn window_integrate<F>(mut f: F, window: &FiniteWindow) -> Result<Complex64>
where
    F: FnMut(&PAdicPoint) -> Complex64,
{
    let mut acc = ComplexSum::new();
    for rep in window.representatives()? {
        acc += f(&rep);
    }
    Ok(acc.value() * window.cell_measure())
}

/// `∫_{||ξ|| = p^k} Ψ(x·ξ) d^nξ` for a point at radius `r` in Q_p^n, exactly.
pub fn sphere_character_integral_exact(p: u32, n: u32, r: Radius, k: i32) -> BigRational {
    let k = k as i64;
    let n64 = n as i64;
    match r {
        Radius::Sphere(m) if (m as i64) > 1 - k => BigRational::zero(),
        Radius::Sphere(m) if (m as i64) == 1 - k => -rational_pow(p, (k - 1) * n64),
        _ => rational_pow(p, (k - 1) * n64) * (rational_pow(p, n64) - BigRational::one()),
    }
}

/// Closed form of the sphere character integral for a point `x`.
pub fn sphere_character_integral(x: &PAdicPoint, k: i32) -> BigRational {
    sphere_character_integral_exact(x.prime(), x.dim() as u32, x.radius(), k)
}

/// Binary64 version of [`sphere_character_integral_exact`].
pub fn sphere_character_integral_f64(p: u32, n: u32, r: Radius, k: i32) -> f64 {
    let kn = (k - 1) as f64 * n as f64;
    match r {
        Radius::Sphere(m) if m > 1 - k => 0.0,
        Radius::Sphere(m) if m == 1 - k => -libm::pow(p as f64, kn),
        _ => libm::pow(p as f64, kn) * (libm::pow(p as f64, n as f64) - 1.0),
    }
}

/// Turns an exact rational into binary64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n: &BigInt = r.numer();
        let d: &BigInt = r.denom();
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_measures() {
        let w = FiniteWindow::new(3, 2, 1, 2).unwrap();
        assert_eq!(w.coset_count(), 3u128.pow(6));
        assert_eq!(w.representatives().unwrap().count(), 729);
        assert!((w.cell_measure() * 729.0 - w.total_measure()).abs() < 1e-12);
    }

    #[test]
    fn integrates_constant_and_indicator() {
        for l in 0..3 {
            let w = FiniteWindow::new(2, 1, 0, l).unwrap();
            let v = window_integrate(|_| Complex64::new(1.0, 0.0), &w).unwrap();
            assert!((v.re - 1.0).abs() < 1e-15);
        }
        let w = FiniteWindow::new(2, 1, 1, 0).unwrap();
        let v = window_integrate(
            |x| {
                if x.norm_exp().is_none_or(|m| m <= 0) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
            &w,
        )
        .unwrap();
        assert!((v.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_character_integral_cases() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(sphere_character_integral_exact(2, 1, Radius::Origin, 0), half);
        assert_eq!(sphere_character_integral_exact(2, 1, Radius::Sphere(1), 0), -half);
        assert_eq!(
            sphere_character_integral_exact(2, 1, Radius::Sphere(2), 0),
            BigRational::zero()
        );
    }

    #[test]
    fn sphere_character_integral_matches_enumeration() {
        // Ψ(x·ξ) only sees the digits of ξ below p^m, so L >= m resolves it.
        for &(p, n) in &[(2u32, 1usize), (3, 1), (2, 2), (3, 2)] {
            for m in -1..=2 {
                for k in -1..=2 {
                    let x = PAdicPoint::on_sphere(p, n, m);
                    // Ψ(x·ξ) depends on digits of ξ below p^{m}; need L >= m.
                    let inner = m.max(-k + 1);
                    let w = FiniteWindow::new(p, n, k, inner).unwrap();
                    let v = window_integrate(
                        |xi| {
                            if xi.norm_exp() == Some(k) {
                                x.dot(xi).character()
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        },
                        &w,
                    )
                    .unwrap();
                    let exact = rational_to_f64(&sphere_character_integral(&x, k));
                    assert!((v.re - exact).abs() < 1e-12, "p={p} n={n} m={m} k={k}: {v} vs {exact}");
                    assert!(v.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn refuses_large_windows() {
        let w = FiniteWindow::new(5, 3, 5, 5).unwrap();
        assert!(matches!(w.representatives(), Err(Error::Resource { .. })));
    }
}
