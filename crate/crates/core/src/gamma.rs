//! The p-adic Gamma function and Riesz kernels as distributions.

use alloc::format;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Result};
use crate::lcf::LocallyConstantFunction;
use crate::num::{pow_p, rational_pow, ComplexSum};
use crate::padic::{PAdicPoint, Radius};
use crate::window::{rational_to_f64, sphere_character_integral_exact, FiniteWindow};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaArgs {
    pub prime: u32,
    pub dim: u32,
    pub alpha: f64,
}

impl GammaArgs {
    pub fn new(prime: u32, dim: u32, alpha: f64) -> Result<Self> {
        crate::padic::check_prime(prime)?;
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(domain("the Gamma function is undefined at alpha = 0"));
        }
        Ok(GammaArgs { prime, dim, alpha })
    }
}

/// `Γ_p^{(n)}(α) = (1 - p^{α-n}) / (1 - p^{-α})`.
pub fn gamma_p(args: &GammaArgs) -> f64 {
    let (p, n, a) = (args.prime, args.dim as f64, args.alpha);
    (1.0 - pow_p(p, a - n)) / (1.0 - pow_p(p, -a))
}

/// Exact `Γ_p^{(n)}(α)` for integral `α != 0`.
pub fn gamma_p_exact(p: u32, n: u32, alpha: i64) -> Result<BigRational> {
    crate::padic::check_prime(p)?;
    if alpha == 0 {
        return Err(domain("the Gamma function is undefined at alpha = 0"));
    }
    let one = BigRational::one();
    Ok((&one - rational_pow(p, alpha - n as i64)) / (&one - rational_pow(p, -alpha)))
}

fn compact_window(phi: &LocallyConstantFunction, min_outer: i32, min_inner: i32) -> Result<FiniteWindow> {
    if !phi.has_zero_tail() {
        return Err(domain("the Riesz pairing needs a compactly supported test function"));
    }
    let l = phi.loc_exp().max(min_inner);
    let k = phi.support_exp().unwrap_or(-l).max(-l).max(min_outer);
    FiniteWindow::new(phi.prime(), phi.dim(), k, l)
}

/// `<k_α, φ>` for a compactly supported locally constant `φ`:
///
/// ```text
/// (1-p^{-n})/(1-p^{α-n}) φ(0)
///   + (1-p^{-α})/(1-p^{α-n}) ∫_{||x||>1} ||x||^{α-n} φ(x) dx
///   + (1-p^{-α})/(1-p^{α-n}) ∫_{||x||<=1} ||x||^{α-n} (φ(x) - φ(0)) dx.
/// ```
pub fn riesz_pairing(alpha: f64, phi: &LocallyConstantFunction) -> Result<Complex64> {
    let (p, n) = (phi.prime(), phi.dim() as f64);
    if alpha == 0.0 || alpha == n || !alpha.is_finite() {
        return Err(domain(format!(
            "the Riesz kernel is defined for alpha outside {{0, {n}}}; use riesz_delta_limit at 0"
        )));
    }
    // resolution at least 1 so the zero coset lies inside the unit ball
    let w = compact_window(phi, 0, 0)?;
    let phi0 = phi.evaluate(&PAdicPoint::zero(p, phi.dim()))?;
    let cell = w.cell_measure();
    let (mut outer, mut inner) = (ComplexSum::new(), ComplexSum::new());
    for rep in w.representatives()? {
        let k = match rep.norm_exp() {
            Some(k) => k,
            None => continue, // φ - φ(0) vanishes on the zero coset
        };
        let weight = cell * pow_p(p, k as f64 * (alpha - n));
        let v = phi.evaluate(&rep)?;
        if k > 0 {
            outer += v * weight;
        } else {
            inner += (v - phi0) * weight;
        }
    }
    let denom = 1.0 - pow_p(p, alpha - n);
    let point = (1.0 - pow_p(p, -n)) / denom;
    let integral = (1.0 - pow_p(p, -alpha)) / denom;
    Ok(phi0 * point + (outer.value() + inner.value()) * integral)
}

/// `<k_{-α}, φ> = (1-p^α)/(1-p^{-α-n}) ∫ ||x||^{-α-n} (φ(x) - φ(0)) dx`
/// for `α > 0`; outside the support the integrand is `-φ(0) ||x||^{-α-n}`,
/// summed in closed form.
pub fn riesz_pairing_negative(alpha: f64, phi: &LocallyConstantFunction) -> Result<Complex64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(domain("alpha must be positive"));
    }
    let (p, n) = (phi.prime(), phi.dim() as f64);
    let w = compact_window(phi, i32::MIN, i32::MIN)?;
    let phi0 = phi.evaluate(&PAdicPoint::zero(p, phi.dim()))?;
    let cell = w.cell_measure();
    let mut acc = ComplexSum::new();
    for rep in w.representatives()? {
        if let Some(k) = rep.norm_exp() {
            acc += (phi.evaluate(&rep)? - phi0) * (cell * pow_p(p, -(k as f64) * (alpha + n)));
        }
    }
    let k_out = w.outer_exp();
    acc += -phi0 * ((1.0 - pow_p(p, -n)) * pow_p(p, -((k_out + 1) as f64) * alpha) / (1.0 - pow_p(p, -alpha)));
    Ok(acc.value() * ((1.0 - pow_p(p, alpha)) / (1.0 - pow_p(p, -alpha - n))))
}

/// The `α -> 0` limit of the Riesz pairing, `φ(0)`.
pub fn riesz_delta_limit(phi: &LocallyConstantFunction) -> Result<Complex64> {
    phi.evaluate(&PAdicPoint::zero(phi.prime(), phi.dim()))
}

/// Spheres summed explicitly past `1 - m` before the geometric tail.
const EXPLICIT_SPHERES: i32 = 8;

/// `(1/Γ(-α)) ∫ ||y||^{-α-n} (Ψ(-x·y) - 1) dy`, which should equal
/// `||x||^α`; computed from the exact sphere character integrals.
pub fn norm_power_via_integral(x: &PAdicPoint, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(domain("alpha must be positive"));
    }
    let m = match x.norm_exp() {
        None => return Ok(0.0),
        Some(m) => m,
    };
    let (p, n) = (x.prime(), x.dim() as u32);
    let nf = n as f64;
    let last = 1 - m + EXPLICIT_SPHERES;
    let mut acc = ComplexSum::new();
    for k in (-m - 2)..=last {
        // Ψ(-x·y) and Ψ(x·y) have the same sphere integral (y -> -y)
        let diff = sphere_character_integral_exact(p, n, Radius::Sphere(m), k) - crate::num::sphere_volume_exact(p, n, k as i64);
        acc += Complex64::new(rational_to_f64(&diff) * pow_p(p, -(k as f64) * (alpha + nf)), 0.0);
    }
    // k > last: the character integral vanishes, leaving -vol(S_k)
    let tail = -(1.0 - pow_p(p, -nf)) * pow_p(p, -((last + 1) as f64) * alpha) / (1.0 - pow_p(p, -alpha));
    acc += Complex64::new(tail, 0.0);
    let g = gamma_p(&GammaArgs::new(p, n, -alpha)?);
    Ok(acc.value().re / g)
}

/// Exact version of [`norm_power_via_integral`] for integral `α >= 1`.
pub fn norm_power_via_integral_exact(x: &PAdicPoint, alpha: u32) -> Result<BigRational> {
    if alpha == 0 {
        return Err(domain("alpha must be positive"));
    }
    let m = match x.norm_exp() {
        None => return Ok(BigRational::zero()),
        Some(m) => m as i64,
    };
    let (p, n) = (x.prime(), x.dim() as u32);
    let (a, nn) = (alpha as i64, n as i64);
    let last = 1 - m + EXPLICIT_SPHERES as i64;
    let mut acc = BigRational::zero();
    for k in (-m - 2)..=last {
        let diff = sphere_character_integral_exact(p, n, Radius::Sphere(m as i32), k as i32)
            - crate::num::sphere_volume_exact(p, n, k);
        acc += diff * rational_pow(p, -k * (a + nn));
    }
    let one = BigRational::one();
    let tail = -(&one - rational_pow(p, -nn)) * rational_pow(p, -(last + 1) * a) / (&one - rational_pow(p, -a));
    acc += tail;
    Ok(acc / gamma_p_exact(p, n, -a)?)
}

/// `p^{mα}` as an exact rational.
pub fn exact_norm_power(p: u32, m: i32, alpha: u32) -> BigRational {
    rational_pow(p, m as i64 * alpha as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcf::Piece;
    use crate::padic::{Ball, PAdicScalar};
    use alloc::vec;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_p(&GammaArgs::new(2, 1, 1.0).unwrap()), 0.0);
        assert!((gamma_p(&GammaArgs::new(3, 2, 1.0).unwrap()) - 1.0).abs() < 1e-15);
        assert!((gamma_p(&GammaArgs::new(2, 2, -1.0).unwrap()) + 7.0 / 8.0).abs() < 1e-15);
        assert!(GammaArgs::new(2, 2, 0.0).is_err());
        for (p, n, a) in [(2u32, 1u32, 3i64), (3, 2, -2), (5, 3, 1)] {
            let g = gamma_p_exact(p, n, a).unwrap();
            let one = BigRational::one();
            assert_eq!(g * (&one - rational_pow(p, -a)), &one - rational_pow(p, a - n as i64));
        }
    }

    #[test]
    fn pairings_with_unit_ball_indicator() {
        let phi = LocallyConstantFunction::ball_indicator(PAdicPoint::zero(2, 1), 0).unwrap();
        // Eq. (5): only the point term survives
        let v = riesz_pairing(0.5, &phi).unwrap();
        let expected = (1.0 - 0.5) / (1.0 - libm::pow(2.0, -0.5));
        assert!((v.re - expected).abs() < 1e-15);
        // negative order: (1 - p^{-n})/(1 - p^{-n-α}) = 2/3
        let neg = riesz_pairing_negative(1.0, &phi).unwrap();
        assert!((neg.re - 2.0 / 3.0).abs() < 1e-15);
        let via5 = riesz_pairing(-1.0, &phi).unwrap();
        assert!((via5 - neg).norm() < 1e-15);
        assert_eq!(riesz_delta_limit(&phi).unwrap(), c(1.0));
        // the α -> 0 limit approaches φ(0)
        let near = riesz_pairing(1e-9, &phi).unwrap();
        assert!((near.re - 1.0).abs() < 1e-6);
        assert!(riesz_pairing(1.0, &phi).is_err());
    }

    #[test]
    fn pairing_of_a_sphere_indicator() {
        // φ = 1 on ||x|| = p, zero elsewhere (so φ(0) = 0)
        for &(p, n, a) in &[(2u32, 1usize, 0.5), (3, 2, 1.5), (5, 1, -0.7)] {
            let pieces = vec![
                Piece { ball: Ball::new(PAdicPoint::zero(p, n), 1), value: c(1.0) },
                Piece { ball: Ball::new(PAdicPoint::zero(p, n), 0), value: c(0.0) },
            ];
            let zero = crate::radial::RadialFunction::new(p, n as u32, 0, vec![], crate::radial::Tail::Zero, crate::radial::Tail::Zero, c(0.0)).unwrap();
            let phi = LocallyConstantFunction::layered(p, n, pieces, Some(zero), 0, 0.0, 1.0).unwrap();
            let nf = n as f64;
            let vol = crate::num::sphere_volume(p, n as u32, 1);
            let expected = (1.0 - pow_p(p, -a)) / (1.0 - pow_p(p, a - nf)) * pow_p(p, a - nf) * vol;
            let v = riesz_pairing(a, &phi).unwrap();
            assert!((v.re - expected).abs() < 1e-13, "{v} {expected}");
        }
    }

    #[test]
    fn both_negative_order_routes_agree() {
        // an off-centre ball plus the unit ball, p = 3, n = 2
        let p = 3;
        let centre = PAdicPoint::new(vec![
            PAdicScalar::from_rational(p, 1, 3, 24).unwrap(),
            PAdicScalar::from_integer(p, 2, 24).unwrap(),
        ])
        .unwrap();
        let pieces = vec![
            Piece { ball: Ball::new(PAdicPoint::zero(p, 2), 0), value: c(2.0) },
            Piece { ball: Ball::new(centre, -1), value: Complex64::new(-1.0, 0.5) },
        ];
        let zero = crate::radial::RadialFunction::new(p, 2, 0, vec![], crate::radial::Tail::Zero, crate::radial::Tail::Zero, c(0.0)).unwrap();
        let phi = LocallyConstantFunction::new(p, 2, pieces, Some(zero), 1, 0.0, 2.0).unwrap();
        for a in [0.5, 1.0, 2.0] {
            let x = riesz_pairing(-a, &phi).unwrap();
            let y = riesz_pairing_negative(a, &phi).unwrap();
            assert!((x - y).norm() < 1e-13 * y.norm().max(1.0), "{a}: {x} {y}");
        }
    }

    #[test]
    fn norm_powers_from_the_integral() {
        for p in [2u32, 3, 5] {
            for n in [1usize, 2] {
                for a in [0.5, 1.0, 2.0] {
                    for m in -3..=3 {
                        let x = PAdicPoint::on_sphere(p, n, m);
                        let v = norm_power_via_integral(&x, a).unwrap();
                        let target = pow_p(p, m as f64 * a);
                        assert!((v - target).abs() < 1e-12 * target, "p={p} n={n} α={a} m={m}: {v}");
                    }
                }
            }
        }
        assert_eq!(norm_power_via_integral(&PAdicPoint::zero(3, 2), 1.0).unwrap(), 0.0);
        let x = PAdicPoint::on_sphere(3, 1, 2);
        assert!((norm_power_via_integral(&x, 0.5).unwrap() - 3.0).abs() < 1e-13);
        for (p, n, a, m) in [(2u32, 1usize, 1u32, 3), (3, 2, 2, -2), (5, 1, 1, 0)] {
            let x = PAdicPoint::on_sphere(p, n, m);
            assert_eq!(norm_power_via_integral_exact(&x, a).unwrap(), exact_norm_power(p, m, a));
        }
    }
}
