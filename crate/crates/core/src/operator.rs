//! The Taibleson operator `D^γ`, computed two independent ways.
//!
//! *Spectral side*: for a radial function whose Fourier transform is `g(k)`
//! on the sphere `||ξ|| = p^k`, the sphere character integrals telescope and
//!
//! ```text
//! (D^γ f)(x) = sum_{k <= -m} p^{kn} (h(k) - h(k+1)),   h(k) = p^{kγ} g(k),
//! ```
//!
//! at `||x|| = p^m`, with the sum over every `k` at the origin.
//!
//! *Hypersingular side*: `c ∫ ||y||^{-γ-n} (φ(x-y) - φ(x)) dy` with
//! `c = (1-p^γ)/(1-p^{-γ-n})`, summed sphere by sphere. Near spheres vanish
//! by local constancy, middle spheres are enumerated on a window and the far
//! spheres are a closed-form geometric tail.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::lcf::LocallyConstantFunction;
use crate::num::{ball_volume, pow_p, powi_p, ComplexSum};
use crate::padic::{PAdicPoint, Radius};
use crate::radial::{sum_series, Evaluator, RadialFunction, SeriesConfig, Tail};
use crate::window::FiniteWindow;

/// A radial Fourier multiplier `g(k)` on the spheres `||ξ|| = p^k`.
pub trait SpectralMultiplier: Send + Sync {
    /// `p^{kn} (h(k) - h(k+1))` with `h(k) = p^{kγ} g(k)`.
    fn tent_term(&self, p: u32, n: u32, gamma: f64, k: i32) -> f64;

    /// An index above which every tent term is negligible (or zero).
    fn top(&self, p: u32, n: u32, gamma: f64) -> i32;
}

/// `g(k) = exp(-at p^{kα})`, the symbol of the heat kernel at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatMultiplier {
    pub at: f64,
    pub alpha: f64,
}

impl HeatMultiplier {
    /// Smallest `k` with `at p^{kα} >= 1`.
    pub fn scale_index(&self, p: u32) -> i32 {
        let lp = libm::log(p as f64);
        libm::ceil(-libm::log(self.at) / (lp * self.alpha)) as i32
    }

    fn exponent(&self, p: u32, k: i32) -> f64 {
        self.at * pow_p(p, k as f64 * self.alpha)
    }
}

impl SpectralMultiplier for HeatMultiplier {
    fn tent_term(&self, p: u32, n: u32, gamma: f64, k: i32) -> f64 {
        let lp = libm::log(p as f64);
        let a_k = self.exponent(p, k);
        let delta = a_k * (pow_p(p, self.alpha) - 1.0);
        // p^{k(n+γ)} e^{-A_k} (1 - p^γ e^{-ΔA}), kept in log form so that
        // huge p^{kn} never meets an underflowed exponential
        libm::exp(k as f64 * (n as f64 + gamma) * lp - a_k) * -libm::expm1(gamma * lp - delta)
    }

    fn top(&self, p: u32, n: u32, gamma: f64) -> i32 {
        let lp = libm::log(p as f64);
        let ks = self.scale_index(p);
        let mut k = ks;
        while self.exponent(p, k) - (k - ks) as f64 * (n as f64 + gamma) * lp <= 60.0 {
            k += 1;
        }
        k
    }
}

/// Fourier transform of the indicator of `B_K`: `p^{Kn}` on `||ξ|| <= p^{-K}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallMultiplier {
    pub radius_exp: i32,
}

impl SpectralMultiplier for BallMultiplier {
    fn tent_term(&self, p: u32, n: u32, gamma: f64, k: i32) -> f64 {
        let top = -self.radius_exp;
        if k > top {
            return 0.0;
        }
        let scale = pow_p(p, self.radius_exp as f64 * n as f64);
        let lead = scale * pow_p(p, k as f64 * (n as f64 + gamma));
        if k == top {
            lead
        } else {
            lead * (1.0 - pow_p(p, gamma))
        }
    }

    fn top(&self, _p: u32, _n: u32, _gamma: f64) -> i32 {
        -self.radius_exp
    }
}

/// A finite combination `sum c_i 1_{B_{k_i}}` of centred ball indicators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BallCombination {
    pub terms: Vec<(f64, i32)>,
}

impl BallCombination {
    pub fn new(terms: Vec<(f64, i32)>) -> Self {
        BallCombination { terms }
    }

    /// Value on the sphere `p^m` (or at the origin).
    pub fn value(&self, r: Radius) -> f64 {
        self.terms
            .iter()
            .filter(|(_, k)| match r {
                Radius::Origin => true,
                Radius::Sphere(m) => m <= *k,
            })
            .map(|(c, _)| c)
            .sum()
    }

    /// The same function as a locally constant function with zero tail.
    pub fn to_lcf(&self, p: u32, n: usize) -> Result<LocallyConstantFunction> {
        use crate::lcf::Piece;
        use crate::padic::Ball;
        let mut radii: Vec<i32> = self.terms.iter().map(|(_, k)| *k).collect();
        radii.sort_unstable();
        radii.dedup();
        let finest = *radii.first().ok_or_else(|| domain("empty ball combination"))?;
        let pieces: Vec<Piece> = radii
            .iter()
            .map(|&k| Piece {
                ball: Ball::new(PAdicPoint::zero(p, n), k),
                value: Complex64::new(self.value(Radius::Sphere(k)), 0.0),
            })
            .collect();
        let bound: f64 = self.terms.iter().map(|(c, _)| libm::fabs(*c)).sum();
        let zero = RadialFunction::new(p, n as u32, 0, Vec::new(), Tail::Zero, Tail::Zero, Complex64::new(0.0, 0.0))?;
        LocallyConstantFunction::layered(p, n, pieces, Some(zero), -finest, 0.0, bound)
    }
}

impl SpectralMultiplier for BallCombination {
    fn tent_term(&self, p: u32, n: u32, gamma: f64, k: i32) -> f64 {
        self.terms
            .iter()
            .map(|&(c, r)| c * BallMultiplier { radius_exp: r }.tent_term(p, n, gamma, k))
            .sum()
    }

    fn top(&self, p: u32, n: u32, gamma: f64) -> i32 {
        self.terms
            .iter()
            .map(|&(_, r)| BallMultiplier { radius_exp: r }.top(p, n, gamma))
            .max()
            .unwrap_or(0)
    }
}

/// An arbitrary multiplier given pointwise; `g` must vanish above `top`.
pub struct FnMultiplier<F> {
    pub g: F,
    pub top: i32,
}

impl<F> SpectralMultiplier for FnMultiplier<F>
where
    F: Fn(i32) -> f64 + Send + Sync,
{
    fn tent_term(&self, p: u32, n: u32, gamma: f64, k: i32) -> f64 {
        let h = |j: i32| if j > self.top { 0.0 } else { pow_p(p, j as f64 * gamma) * (self.g)(j) };
        powi_p(p, k * n as i32) * (h(k) - h(k + 1))
    }

    fn top(&self, _p: u32, _n: u32, _gamma: f64) -> i32 {
        self.top
    }
}

/// A finished series: its value and the sum of absolute values of its terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermSum {
    pub value: f64,
    pub abs_sum: f64,
}

/// Sums `term(start), term(start-1), ...` until negligible.
pub(crate) fn sum_down<F>(start: i32, cfg: &SeriesConfig, context: &str, mut term: F) -> Result<TermSum>
where
    F: FnMut(i32) -> f64,
{
    let mut abs = 0.0;
    let v = sum_series(start, -1, cfg, context, |k| {
        let t = term(k);
        abs += libm::fabs(t);
        Complex64::new(t, 0.0)
    })?;
    Ok(TermSum { value: v.re, abs_sum: abs })
}

/// `(D^γ f)` at radius `r` for a radial `f` with spectral multiplier `g`.
pub fn spectral_value<M>(mult: &M, p: u32, n: u32, gamma: f64, r: Radius, cfg: &SeriesConfig) -> Result<TermSum>
where
    M: SpectralMultiplier + ?Sized,
{
    let top = mult.top(p, n, gamma);
    let start = match r {
        Radius::Origin => top,
        Radius::Sphere(m) => top.min(-m),
    };
    sum_down(start, cfg, "spectral sphere sum", |k| mult.tent_term(p, n, gamma, k))
}

/// `D^γ` of the radial function with multiplier `mult`, as a radial function.
///
/// Fails with a divergence error if the series at the origin does not
/// settle; sphere values that fail later evaluate to NaN.
pub fn apply_fourier_radial(
    mult: Arc<dyn SpectralMultiplier>,
    p: u32,
    n: u32,
    gamma: f64,
    cfg: SeriesConfig,
) -> Result<RadialFunction> {
    crate::padic::check_prime(p)?;
    if !(gamma >= 0.0) {
        return Err(domain("operator order must be nonnegative"));
    }
    let at_zero = spectral_value(&*mult, p, n, gamma, Radius::Origin, &cfg)?.value;
    let eval: Evaluator = Arc::new(move |m| {
        let v = spectral_value(&*mult, p, n, gamma, Radius::Sphere(m), &cfg)
            .map(|s| s.value)
            .unwrap_or(f64::NAN);
        Complex64::new(v, 0.0)
    });
    Ok(RadialFunction::from_evaluator(p, n, eval, Complex64::new(at_zero, 0.0))?
        .with_series(cfg)
        .with_decay(-gamma - n as f64))
}

/// `(1 - p^γ) / (1 - p^{-γ-n})`.
pub fn hypersingular_coefficient(p: u32, n: u32, gamma: f64) -> f64 {
    (1.0 - pow_p(p, gamma)) / (1.0 - pow_p(p, -gamma - n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorParams {
    pub gamma: f64,
    pub series: SeriesConfig,
    /// Extra spheres enumerated past the support before the closed-form tail.
    pub margin: i32,
}

impl OperatorParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(domain("operator order must be positive"));
        }
        Ok(OperatorParams {
            gamma,
            series: SeriesConfig::default(),
            margin: 4,
        })
    }

    pub fn with_margin(mut self, margin: i32) -> Self {
        self.margin = margin.max(0);
        self
    }

    pub fn with_series(mut self, series: SeriesConfig) -> Self {
        self.series = series;
        self
    }
}

/// `sum_{k >= k1} (1 - p^{-n}) p^{-kγ} T(k)` for a radial tail `T`.
fn far_tail(tail: &RadialFunction, k1: i32, gamma: f64, cfg: &SeriesConfig) -> Result<Complex64> {
    let (p, n) = (tail.prime(), tail.dim());
    let w = 1.0 - powi_p(p, -(n as i32));
    let (_, hi) = tail.table_range();
    let mut acc = ComplexSum::new();
    let mut k = k1;
    while k <= hi {
        acc += tail.sphere_value(k) * (w * pow_p(p, -(k as f64) * gamma));
        k += 1;
    }
    let rest = match tail.tail_hi() {
        Tail::Zero => Complex64::new(0.0, 0.0),
        Tail::Constant(c) => c * (w * pow_p(p, -(k as f64) * gamma) / (1.0 - pow_p(p, -gamma))),
        Tail::PowerLaw { coeff, sigma } => {
            let s = sigma - gamma;
            if s >= 0.0 {
                return Err(domain(format!(
                    "power-law tail p^(m*{sigma}) grows too fast for order {gamma}"
                )));
            }
            coeff * (w * pow_p(p, k as f64 * s) / (1.0 - pow_p(p, s)))
        }
        Tail::Evaluator(f) => sum_series(k, 1, cfg, "operator far tail", |j| {
            f(j) * (w * pow_p(p, -(j as f64) * gamma))
        })?,
    };
    acc += rest;
    Ok(acc.value())
}

/// `(D^γ φ)(x)` by the hypersingular integral.
pub fn apply_hypersingular(
    phi: &LocallyConstantFunction,
    params: &OperatorParams,
    x: &PAdicPoint,
) -> Result<Complex64> {
    let (p, n) = (phi.prime(), phi.dim());
    let gamma = params.gamma;
    if x.prime() != p || x.dim() != n {
        return Err(domain("point lives in a different space"));
    }
    if !(gamma > phi.growth_exp()) {
        return Err(domain(format!(
            "operator order {gamma} must exceed the growth exponent {}",
            phi.growth_exp()
        )));
    }
    let tail = phi
        .tail()
        .ok_or_else(|| domain("the hypersingular integral needs values outside the pieces (no tail)"))?;
    let l = phi.loc_exp();
    let mut k0 = phi.support_exp().unwrap_or(-l).max(-l);
    if let Some(m) = x.norm_exp() {
        k0 = k0.max(m);
    }
    let k_out = k0 + params.margin;
    let window = FiniteWindow::new(p, n, k_out, l)?;
    let phi_x = phi.evaluate(x)?;
    let nn = n as f64;
    let cell = window.cell_measure();
    let mut acc = ComplexSum::new();
    for rep in window.representatives()? {
        // the coset of 0 has ||y|| <= p^{-l}, where the integrand vanishes
        let k = match rep.norm_exp() {
            Some(k) => k,
            None => continue,
        };
        let diff = phi.evaluate(&x.sub(&rep))? - phi_x;
        if diff != Complex64::new(0.0, 0.0) {
            acc += diff * (cell * pow_p(p, -(k as f64) * (gamma + nn)));
        }
    }
    // beyond B_{k_out}: ||x - y|| = ||y||, so φ(x - y) is the tail
    let w = 1.0 - pow_p(p, -nn);
    acc += -phi_x * (w * pow_p(p, -((k_out + 1) as f64) * gamma) / (1.0 - pow_p(p, -gamma)));
    acc += far_tail(tail, k_out + 1, gamma, &params.series)?;
    Ok(acc.value() * hypersingular_coefficient(p, n as u32, gamma))
}

/// `(D^γ f)` at radius `r` for a radial `f`, by the hypersingular integral
/// written out sphere by sphere.
///
/// At `||x|| = p^m` the sphere `||y|| = p^m` sends `x - y` over `B_{m-1}`
/// and over the rest of the sphere; smaller spheres leave `f` unchanged and
/// larger ones see `f(||y||)`.
pub fn apply_hypersingular_radial(f: &RadialFunction, gamma: f64, r: Radius) -> Result<Complex64> {
    if !(gamma > 0.0) {
        return Err(domain("operator order must be positive"));
    }
    let (p, n) = (f.prime(), f.dim());
    let nn = n as f64;
    let w = 1.0 - pow_p(p, -nn);
    let c = hypersingular_coefficient(p, n, gamma);
    let cfg = *f.series();
    match r {
        Radius::Origin => {
            let f0 = f.value_at_zero();
            let term = |k: i32| (f.sphere_value(k) - f0) * (w * pow_p(p, -(k as f64) * gamma));
            let up = sum_series(1, 1, &cfg, "hypersingular (outer spheres)", term)?;
            let down = sum_series(0, -1, &cfg, "hypersingular (inner spheres)", term)?;
            Ok((up + down) * c)
        }
        Radius::Sphere(m) => {
            let fm = f.sphere_value(m);
            let own = (f.ball_integral(m - 1)? - fm * ball_volume(p, n, m - 1)) * pow_p(p, -(m as f64) * (gamma + nn));
            let outer = sum_series(m + 1, 1, &cfg, "hypersingular (outer spheres)", |k| {
                (f.sphere_value(k) - fm) * (w * pow_p(p, -(k as f64) * gamma))
            })?;
            Ok((own + outer) * c)
        }
    }
}

/// Largest deviation between the two evaluation routes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossCheckReport {
    pub samples: Vec<(Radius, f64, f64)>,
    pub max_deviation: f64,
}

/// Evaluates a centred ball combination both ways at the given radii.
pub fn operator_cross_check(
    phi: &BallCombination,
    p: u32,
    n: usize,
    params: &OperatorParams,
    radii: &[Radius],
) -> Result<CrossCheckReport> {
    let mut report = CrossCheckReport::default();
    if radii.is_empty() {
        return Ok(report);
    }
    let lcf = phi.to_lcf(p, n)?;
    for &r in radii {
        let x = PAdicPoint::at_radius(p, n, r);
        let hyper = apply_hypersingular(&lcf, params, &x)?.re;
        let spectral = spectral_value(phi, p, n as u32, params.gamma, r, &params.series)?.value;
        let dev = libm::fabs(hyper - spectral);
        report.max_deviation = report.max_deviation.max(dev);
        report.samples.push((r, hyper, spectral));
    }
    Ok(report)
}
