//! The heat kernel `Z(x, t)`, the inverse Fourier transform of
//! `exp(-at ||ξ||^α)`.
//!
//! The canonical evaluation is the tent sum
//!
//! ```text
//! Z(p^m, t) = sum_{l <= -m} p^{nl} (e^{-at p^{lα}} - e^{-at p^{(l+1)α}}),
//! ```
//!
//! whose terms are all nonnegative. Two classical series serve as oracles:
//! the sphere series (`z_series1`) and the power series in `at ||x||^{-α}`
//! (`z_series2`), which is only usable away from the origin.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::num::{pow_p, sphere_volume, Compensated};
use crate::operator::{spectral_value, sum_down, HeatMultiplier, SpectralMultiplier, TermSum};
use crate::padic::Radius;
use crate::radial::{sum_series, Evaluator, RadialFunction, SeriesConfig, Tail};

/// `(p, n, α, a)` plus the truncation policy of every series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub prime: u32,
    pub dim: u32,
    pub alpha: f64,
    pub a: f64,
    pub series: SeriesConfig,
}

impl KernelParams {
    pub fn new(prime: u32, dim: u32, alpha: f64, a: f64) -> Result<Self> {
        crate::padic::check_prime(prime)?;
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(domain(format!("diffusion constant must be positive, got {a}")));
        }
        Ok(KernelParams {
            prime,
            dim,
            alpha,
            a,
            series: SeriesConfig::default(),
        })
    }

    pub fn with_series(mut self, series: SeriesConfig) -> Self {
        self.series = series;
        self
    }

    pub fn multiplier(&self, t: f64) -> HeatMultiplier {
        HeatMultiplier {
            at: self.a * t,
            alpha: self.alpha,
        }
    }

    /// Radius exponent around which `Z(·, t)` changes from flat to decaying.
    pub fn scale_exp(&self, t: f64) -> i32 {
        -self.multiplier(t).scale_index(self.prime)
    }

    fn lp(&self) -> f64 {
        libm::log(self.prime as f64)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("time must be positive, got {t}")))
    }
}

/// Tent sum with its absolute sum (all terms are nonnegative, so they agree
/// up to rounding).
pub fn z_tent_sum(r: Radius, t: f64, params: &KernelParams) -> Result<TermSum> {
    check_time(t)?;
    spectral_value(&params.multiplier(t), params.prime, params.dim, 0.0, r, &params.series)
}

/// `Z(x, t)` at `||x|| = p^m` (or the origin) by the tent sum.
pub fn z_tent(r: Radius, t: f64, params: &KernelParams) -> Result<f64> {
    z_tent_sum(r, t, params).map(|s| s.value)
}

/// `Z` by the sphere series, rearranged so that every term is a difference
/// `e^{-A} - e^{-B}` with `A < B`:
///
/// ```text
/// p^{-mn} (1-p^{-n}) sum_{k>=0} p^{-kn} (e^{-at p^{(-k-m)α}} - e^{-at p^{(1-m)α}}).
/// ```
pub fn z_series1(m: i32, t: f64, params: &KernelParams) -> Result<f64> {
    check_time(t)?;
    let (p, n, alpha) = (params.prime, params.dim as f64, params.alpha);
    let at = params.a * t;
    let b = at * pow_p(p, (1 - m) as f64 * alpha);
    let heat = params.multiplier(t);
    let start = (-m - heat.top(p, params.dim, 0.0)).max(0);
    let lp = params.lp();
    let sum = sum_series(start, 1, &params.series, "sphere series", |k| {
        let a_k = at * pow_p(p, (-k - m) as f64 * alpha);
        let v = libm::exp(-(k as f64) * n * lp - a_k) * -libm::expm1(a_k - b);
        Complex64::new(v, 0.0)
    })?;
    Ok(sum.re * (1.0 - pow_p(p, -n)) * pow_p(p, -(m as f64) * n))
}

/// A truncated series with a rigorous bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEstimate {
    pub value: f64,
    /// Bound on `|exact - value|`: the first omitted term of an alternating
    /// series with decreasing terms, plus accumulated rounding.
    pub remainder_bound: f64,
    pub terms: usize,
}

/// `Z` by the power series
///
/// ```text
/// sum_{j>=1} (-1)^j / j! (1-p^{αj}) / (1-p^{-αj-n}) (at)^j p^{-m(αj+n)}.
/// ```
///
/// The terms alternate in sign. Once they decrease, the first omitted term
/// bounds the remainder. Fails with an accuracy error when `rel_tol` (relative
/// to the value) is not certified within `max_terms` terms.
pub fn z_series2(m: i32, t: f64, params: &KernelParams, max_terms: usize, rel_tol: f64) -> Result<SeriesEstimate> {
    check_time(t)?;
    let (p, n, alpha) = (params.prime, params.dim as f64, params.alpha);
    let lp = params.lp();
    let ln_y = libm::log(params.a * t) - m as f64 * alpha * lp;
    let ln_term = |j: usize| {
        let jf = j as f64;
        let coeff = libm::log(pow_p(p, alpha * jf) - 1.0) - libm::log(1.0 - pow_p(p, -alpha * jf - n));
        jf * ln_y - libm::lgamma(jf + 1.0) + coeff - m as f64 * n * lp
    };
    let mut acc = Compensated::new();
    let mut prev = f64::INFINITY;
    let mut decreasing_from = None;
    for j in 1..=max_terms {
        let mag = libm::exp(ln_term(j));
        // (-1)^j (1 - p^{αj}) has sign (-1)^{j+1}
        let term = if j % 2 == 1 { mag } else { -mag };
        if mag < prev {
            decreasing_from.get_or_insert(j);
        } else {
            decreasing_from = None;
        }
        prev = mag;
        acc += term;
        if decreasing_from.is_some() {
            let next = libm::exp(ln_term(j + 1));
            if next < mag {
                let bound = next + 4.0 * f64::EPSILON * acc.abs_sum();
                let value = acc.value();
                if bound <= rel_tol * libm::fabs(value) {
                    return Ok(SeriesEstimate {
                        value,
                        remainder_bound: bound,
                        terms: j,
                    });
                }
                if next == 0.0 {
                    // further terms add nothing; rounding dominates
                    return Err(Error::Accuracy {
                        requested: rel_tol,
                        achieved: bound / libm::fabs(value),
                        context: String::from("power series for Z (cancellation)"),
                    });
                }
            }
        }
    }
    let value = acc.value();
    Err(Error::Accuracy {
        requested: rel_tol,
        achieved: libm::exp(ln_term(max_terms + 1)) / libm::fabs(value),
        context: format!("power series for Z after {max_terms} terms"),
    })
}

/// `F_t(l) = ∫_{||x|| <= p^l} Z(x, t) dx`
/// `= (1-p^{-n}) sum_{j>=0} p^{-jn} exp(-at p^{-(l+j)α})`.
pub fn radial_cdf(l: i32, t: f64, params: &KernelParams) -> Result<f64> {
    check_time(t)?;
    let (p, n, alpha) = (params.prime, params.dim as f64, params.alpha);
    let at = params.a * t;
    let lp = params.lp();
    let start = (-l - params.multiplier(t).top(p, params.dim, 0.0)).max(0);
    let s = sum_series(start, 1, &params.series, "radial cdf", |j| {
        let v = libm::exp(-(j as f64) * n * lp - at * pow_p(p, -((l + j) as f64) * alpha));
        Complex64::new(v, 0.0)
    })?;
    Ok((s.re * (1.0 - pow_p(p, -n))).min(1.0))
}

/// `1 - F_t(l)`, without cancellation for large `l`.
pub fn radial_ccdf(l: i32, t: f64, params: &KernelParams) -> Result<f64> {
    check_time(t)?;
    let (p, n, alpha) = (params.prime, params.dim as f64, params.alpha);
    let at = params.a * t;
    let s = sum_series(0, 1, &params.series, "radial ccdf", |j| {
        let v = pow_p(p, -(j as f64) * n) * -libm::expm1(-at * pow_p(p, -((l + j) as f64) * alpha));
        Complex64::new(v, 0.0)
    })?;
    Ok(s.re * (1.0 - pow_p(p, -n)))
}

/// `d/dt [p^{kn} e^{-A} (1 - e^{-Δ})]` with `A = at p^{kα}`, `Δ = A (p^α - 1)`.
fn dz_dt_term(heat: &HeatMultiplier, params: &KernelParams, t: f64, k: i32) -> f64 {
    let (p, n, alpha) = (params.prime, params.dim as f64, params.alpha);
    let a_k = heat.at * pow_p(p, k as f64 * alpha);
    let d = a_k * (pow_p(p, alpha) - 1.0);
    libm::exp(k as f64 * n * params.lp() - a_k) * (d * libm::exp(-d) + a_k * libm::expm1(-d)) / t
}

fn derivative_start(r: Radius, t: f64, params: &KernelParams) -> i32 {
    let top = params.multiplier(t).top(params.prime, params.dim, params.alpha);
    match r {
        Radius::Origin => top,
        Radius::Sphere(m) => top.min(-m),
    }
}

/// `∂Z/∂t` by differentiating each tent term in `t`.
pub fn dz_dt_sum(r: Radius, t: f64, params: &KernelParams) -> Result<TermSum> {
    check_time(t)?;
    let heat = params.multiplier(t);
    sum_down(derivative_start(r, t, params), &params.series, "time derivative of Z", |k| {
        dz_dt_term(&heat, params, t, k)
    })
}

pub fn dz_dt(r: Radius, t: f64, params: &KernelParams) -> Result<f64> {
    dz_dt_sum(r, t, params).map(|s| s.value)
}

/// `(D^γ Z)(x, t)` for `0 < γ <= α`, by the sphere series of
/// `∫ Ψ(x·η) ||η||^γ e^{-at||η||^α} dη`.
pub fn dgamma_z_sum(r: Radius, t: f64, gamma: f64, params: &KernelParams) -> Result<TermSum> {
    check_time(t)?;
    if !(gamma > 0.0 && gamma <= params.alpha) {
        return Err(domain(format!(
            "fractional order {gamma} outside (0, α] with α = {}",
            params.alpha
        )));
    }
    spectral_value(&params.multiplier(t), params.prime, params.dim, gamma, r, &params.series)
}

pub fn dgamma_z(r: Radius, t: f64, gamma: f64, params: &KernelParams) -> Result<f64> {
    dgamma_z_sum(r, t, gamma, params).map(|s| s.value)
}

/// `∂Z/∂t + a D^α Z`, paired term by term (both series run over the same
/// spheres), and `sum |∂Z/∂t term|` as the scale to compare against.
pub fn heat_identity_residual(r: Radius, t: f64, params: &KernelParams) -> Result<TermSum> {
    check_time(t)?;
    let heat = params.multiplier(t);
    let (p, n, alpha) = (params.prime, params.dim, params.alpha);
    let mut scale = 0.0;
    let res = sum_down(derivative_start(r, t, params), &params.series, "heat identity", |k| {
        let dt = dz_dt_term(&heat, params, t, k);
        scale += libm::fabs(dt);
        dt + params.a * heat.tent_term(p, n, alpha, k)
    })?;
    Ok(TermSum { value: res.value, abs_sum: scale })
}

/// Half-width of the table stored in a [`KernelSlice`] around its scale.
const SLICE_HALF_WIDTH: i32 = 60;

/// `Z(·, t)` as a radial function: a table around the scale `t^{1/α}` and
/// tent-sum evaluators beyond it.
#[derive(Clone, Debug)]
pub struct KernelSlice {
    params: KernelParams,
    t: f64,
    radial: RadialFunction,
}

impl KernelSlice {
    pub fn new(params: &KernelParams, t: f64) -> Result<Self> {
        check_time(t)?;
        let c = params.scale_exp(t);
        let (lo, hi) = (c - SLICE_HALF_WIDTH, c + SLICE_HALF_WIDTH);
        let pr = *params;
        let eval: Evaluator = Arc::new(move |m| {
            Complex64::new(z_tent(Radius::Sphere(m), t, &pr).unwrap_or(f64::NAN), 0.0)
        });
        let mut err = None;
        let radial = RadialFunction::tabulate(
            params.prime,
            params.dim,
            lo,
            hi,
            Tail::Evaluator(eval.clone()),
            Tail::Evaluator(eval),
            |r| match z_tent(r, t, params) {
                Ok(v) => Complex64::new(v, 0.0),
                Err(e) => {
                    err.get_or_insert(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            },
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let radial = radial
            .with_decay(-params.alpha - params.dim as f64)
            .with_series(params.series);
        Ok(KernelSlice {
            params: *params,
            t,
            radial,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn radial(&self) -> &RadialFunction {
        &self.radial
    }

    pub fn value(&self, r: Radius) -> f64 {
        self.radial.value(r).re
    }

    /// `∫ Z(x, t) dx`, which should be 1.
    pub fn integral(&self) -> Result<f64> {
        self.radial.integrate().map(|v| v.re)
    }

    /// Probability mass of the sphere `||x|| = p^m`.
    pub fn sphere_mass(&self, m: i32) -> f64 {
        self.value(Radius::Sphere(m)) * sphere_volume(self.params.prime, self.params.dim, m)
    }

    pub fn cdf(&self, l: i32) -> Result<f64> {
        radial_cdf(l, self.t, &self.params)
    }
}

/// `D^γ Z(·, t)` as a radial function.
pub fn dgamma_slice(params: &KernelParams, t: f64, gamma: f64) -> Result<RadialFunction> {
    check_time(t)?;
    if !(gamma > 0.0 && gamma <= params.alpha) {
        return Err(domain(format!("fractional order {gamma} outside (0, α]")));
    }
    crate::operator::apply_fourier_radial(
        Arc::new(params.multiplier(t)),
        params.prime,
        params.dim,
        gamma,
        params.series,
    )
}

/// `∂Z/∂t(·, t)` as a radial function.
pub fn dz_dt_slice(params: &KernelParams, t: f64) -> Result<RadialFunction> {
    check_time(t)?;
    let pr = *params;
    let at_zero = dz_dt(Radius::Origin, t, params)?;
    let eval: Evaluator = Arc::new(move |m| Complex64::new(dz_dt(Radius::Sphere(m), t, &pr).unwrap_or(f64::NAN), 0.0));
    Ok(RadialFunction::from_evaluator(params.prime, params.dim, eval, Complex64::new(at_zero, 0.0))?
        .with_series(params.series)
        .with_decay(-params.alpha - params.dim as f64))
}

/// Anything that can hand out kernel slices, possibly from a cache.
pub trait KernelSource: Send + Sync {
    fn params(&self) -> &KernelParams;
    fn slice(&self, t: f64) -> Result<Arc<KernelSlice>>;
}

impl KernelSource for KernelParams {
    fn params(&self) -> &KernelParams {
        self
    }

    fn slice(&self, t: f64) -> Result<Arc<KernelSlice>> {
        KernelSlice::new(self, t).map(Arc::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcf::LocallyConstantFunction;
    use crate::num::powi_p;
    use crate::operator::apply_hypersingular_radial;
    use crate::padic::PAdicPoint;
    use crate::radial::convolve_radial;
    use crate::window::{sphere_character_integral_f64, window_integrate, FiniteWindow};

    fn grid() -> impl Iterator<Item = KernelParams> {
        let mut v = alloc::vec::Vec::new();
        for p in [2u32, 3, 5] {
            for n in [1u32, 2, 3] {
                for alpha in [0.5, 1.0, 2.0] {
                    v.push(KernelParams::new(p, n, alpha, 0.5).unwrap());
                }
            }
        }
        v.into_iter()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelParams::new(4, 1, 1.0, 1.0).is_err());
        assert!(KernelParams::new(2, 1, 0.0, 1.0).is_err());
        assert!(KernelParams::new(2, 1, 1.0, -1.0).is_err());
        let k = KernelParams::new(2, 1, 1.0, 1.0).unwrap();
        assert!(z_tent(Radius::Origin, 0.0, &k).is_err());
        assert!(dgamma_z(Radius::Origin, 1.0, 1.5, &k).is_err());
    }

    #[test]
    fn tent_is_nonnegative_and_matches_sphere_series() {
        for k in grid() {
            for t in [0.01, 1.0, 10.0] {
                for m in -15..=15 {
                    let a = z_tent(Radius::Sphere(m), t, &k).unwrap();
                    let b = z_series1(m, t, &k).unwrap();
                    assert!(a >= 0.0);
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{k:?} t={t} m={m}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn tent_vanishes_as_t_grows() {
        let k = KernelParams::new(2, 1, 1.0, 1.0).unwrap();
        let a = z_tent(Radius::Sphere(0), 1e3, &k).unwrap();
        let b = z_tent(Radius::Sphere(0), 1e6, &k).unwrap();
        assert!(b < a && b < 1e-5);
        // near t = 0 the two sphere-series terms cancel off the origin;
        // what is left is O(t ||x||^{-α-n})
        assert!(z_series1(5, 1e-6, &k).unwrap().abs() < 1e-8);
        let small = z_series1(1, 1e-6, &k).unwrap();
        assert!(small > 0.0 && small < 1e-6);
    }

    #[test]
    fn power_series_where_certified() {
        let k = KernelParams::new(2, 1, 1.0, 1.0).unwrap();
        let tent = z_tent(Radius::Sphere(0), 1.0, &k).unwrap();
        let s2 = z_series2(0, 1.0, &k, 200, 1e-12).unwrap();
        assert!((tent - s2.value).abs() < 1e-10 * tent);
        // leading term is positive and dominates far out
        let far = z_series2(30, 1.0, &k, 200, 1e-12).unwrap();
        let lead = -(1.0 - 2.0) / (1.0 - 0.25) * libm::pow(2.0, -60.0);
        assert!(lead > 0.0 && (far.value - lead).abs() < 1e-8 * lead);
        // a one-term truncation is within the second term
        let y = libm::pow(2.0, -10.0);
        let t1 = 4.0 / 3.0 * y;
        let t2 = 0.5 * y * y * 3.0 / (1.0 - 0.125);
        let z = z_tent(Radius::Sphere(10), 1.0, &k).unwrap() * libm::pow(2.0, 10.0);
        assert!((z - t1).abs() <= t2);
        // near the origin cancellation makes it useless
        assert!(matches!(z_series2(-12, 1.0, &k, 200, 1e-12), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn cdf_consistency() {
        for k in grid() {
            let t = 0.3;
            for l in -10..=10 {
                let f = radial_cdf(l, t, &k).unwrap();
                let g = radial_cdf(l - 1, t, &k).unwrap();
                let mass = z_tent(Radius::Sphere(l), t, &k).unwrap() * sphere_volume(k.prime, k.dim, l);
                assert!((f - g - mass).abs() < 1e-13, "{k:?} l={l}");
                assert!((f + radial_ccdf(l, t, &k).unwrap() - 1.0).abs() < 1e-14);
            }
            assert!((radial_cdf(400, t, &k).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cdf_against_window_enumeration() {
        // ∫_{B_l} Z = sum_k e^{-at p^{kα}} ∫_{B_l} (∫_{S_k} Ψ(x·ξ) dξ) dx; the
        // inner sphere integral is constant on cosets of B_{-k}
        for &(p, n, alpha) in &[(2u32, 1usize, 1.0), (3, 1, 0.5), (2, 2, 2.0)] {
            let k = KernelParams::new(p, n as u32, alpha, 1.0).unwrap();
            let t = 0.7;
            for l in [-1, 0, 2] {
                let top = 6;
                let w = FiniteWindow::new(p, n, l, top.max(-l)).unwrap();
                let mut acc = 0.0;
                for kk in (-l - 40)..=top {
                    let j = window_integrate(
                        |x| Complex64::new(sphere_character_integral_f64(p, n as u32, x.radius(), kk), 0.0),
                        &w,
                    )
                    .unwrap()
                    .re;
                    acc += libm::exp(-t * pow_p(p, kk as f64 * alpha)) * j;
                }
                let f = radial_cdf(l, t, &k).unwrap();
                assert!((acc - f).abs() < 1e-8, "p={p} n={n} l={l}: {acc} {f}");
            }
        }
    }

    #[test]
    fn normalization_and_vanishing_integrals() {
        for k in grid() {
            for t in [0.01, 1.0] {
                let s = KernelSlice::new(&k, t).unwrap();
                assert!((s.integral().unwrap() - 1.0).abs() < 1e-12, "{k:?} t={t}");
                for g in [k.alpha / 2.0, k.alpha] {
                    let d = dgamma_slice(&k, t, g).unwrap();
                    let scale = d.value_at_zero().re * powi_p(k.prime, k.scale_exp(t) * k.dim as i32);
                    assert!(d.integrate().unwrap().norm() < 1e-12 * scale.max(1.0), "{k:?} t={t} γ={g}");
                }
                let dt = dz_dt_slice(&k, t).unwrap();
                assert!(dt.integrate().unwrap().norm() < 1e-10 / t);
            }
        }
    }

    #[test]
    fn heat_equation_termwise_and_by_differences() {
        for k in grid() {
            for t in [0.1, 1.0] {
                for r in [Radius::Origin, Radius::Sphere(-3), Radius::Sphere(0), Radius::Sphere(4)] {
                    let res = heat_identity_residual(r, t, &k).unwrap();
                    assert!(res.value.abs() <= 1e-14 * res.abs_sum, "{k:?} {r:?}");
                    let h = 1e-5;
                    let fd = (z_tent(r, t + h, &k).unwrap() - z_tent(r, t - h, &k).unwrap()) / (2.0 * h);
                    let d = dz_dt(r, t, &k).unwrap();
                    assert!((fd - d).abs() < 1e-6 * d.abs().max(1e-300), "{k:?} {r:?} {fd} {d}");
                }
            }
        }
    }

    #[test]
    fn spectral_form_recovers_kernel() {
        let k = KernelParams::new(3, 2, 0.5, 1.0).unwrap();
        let f = crate::operator::apply_fourier_radial(Arc::new(k.multiplier(0.2)), 3, 2, 0.0, k.series).unwrap();
        for m in -5..=5 {
            let z = z_tent(Radius::Sphere(m), 0.2, &k).unwrap();
            assert!((f.sphere_value(m).re - z).abs() <= 1e-15 * z);
        }
    }

    #[test]
    fn hypersingular_on_kernel_slice() {
        for &(p, n, alpha) in &[(2u32, 1u32, 1.0), (3, 2, 0.5), (5, 1, 2.0)] {
            let k = KernelParams::new(p, n, alpha, 1.0).unwrap();
            let s = KernelSlice::new(&k, 0.5).unwrap();
            for g in [alpha / 2.0, alpha] {
                for r in [Radius::Origin, Radius::Sphere(-2), Radius::Sphere(0), Radius::Sphere(3)] {
                    let h = apply_hypersingular_radial(s.radial(), g, r).unwrap().re;
                    let d = dgamma_z(r, 0.5, g, &k).unwrap();
                    assert!((h - d).abs() < 1e-8 * d.abs().max(1.0), "{p} {n} {alpha} γ={g} {r:?}: {h} {d}");
                }
            }
        }
    }

    #[test]
    fn indicator_convolution_closed_form() {
        for &(p, n) in &[(2u32, 1usize), (3, 2)] {
            let k = KernelParams::new(p, n as u32, 1.0, 1.0).unwrap();
            let t = 0.4;
            let s = KernelSlice::new(&k, t).unwrap();
            let phi = LocallyConstantFunction::ball_indicator(PAdicPoint::zero(p, n), 0).unwrap();
            let x = PAdicPoint::zero(p, n);
            let w = phi.default_window(Some(&x)).unwrap();
            let u = phi.convolve_window(s.radial(), &x, &w).unwrap().value.re;
            let mut oracle = 0.0;
            for kk in -80..=0 {
                oracle += powi_p(p, kk * n as i32) * libm::exp(-t * powi_p(p, kk));
            }
            oracle *= 1.0 - powi_p(p, -(n as i32));
            assert!((u - oracle).abs() < 1e-14, "{u} {oracle}");
        }
    }

    #[test]
    fn semigroup_via_exact_radial_convolution() {
        let k = KernelParams::new(3, 1, 0.5, 1.0).unwrap();
        let (a, b) = (KernelSlice::new(&k, 0.1).unwrap(), KernelSlice::new(&k, 1.0).unwrap());
        let c = KernelSlice::new(&k, 1.1).unwrap();
        for r in core::iter::once(Radius::Origin).chain((-4..=6).map(Radius::Sphere)) {
            let v = convolve_radial(a.radial(), b.radial(), r).unwrap().re;
            assert!((v - c.value(r)).abs() < 1e-12 * c.value(Radius::Origin), "{r:?}");
        }
    }
}
