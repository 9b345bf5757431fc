//! Functions of `||x||` only.
//!
//! A [`RadialFunction`] stores its value on each sphere `||x|| = p^m` for
//! `m` in a finite table, an analytic or callable model outside the table,
//! and its value at the origin (which lies on no sphere).

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::num::{ball_volume, sphere_volume, ComplexSum};
use crate::padic::{PAdicPoint, Radius};
use crate::window::FiniteWindow;

/// Truncation policy shared by every infinite sum in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesConfig {
    /// Stop once a term falls below `eps` times the running absolute sum.
    pub eps: f64,
    /// Hard cap on the number of terms (sphere indices) per tail.
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            eps: 1e-16,
            max_terms: 400,
        }
    }
}

pub type Evaluator = Arc<dyn Fn(i32) -> Complex64 + Send + Sync>;

/// Model of a radial function outside its table.
#[derive(Clone)]
pub enum Tail {
    Zero,
    Constant(Complex64),
    /// `coeff * p^(m * sigma)`.
    PowerLaw { coeff: Complex64, sigma: f64 },
    Evaluator(Evaluator),
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Zero => write!(f, "Zero"),
            Tail::Constant(c) => write!(f, "Constant({c})"),
            Tail::PowerLaw { coeff, sigma } => write!(f, "PowerLaw({coeff}, {sigma})"),
            Tail::Evaluator(_) => write!(f, "Evaluator(..)"),
        }
    }
}

impl Tail {
    fn value(&self, p: u32, m: i32) -> Complex64 {
        match self {
            Tail::Zero => Complex64::new(0.0, 0.0),
            Tail::Constant(c) => *c,
            Tail::PowerLaw { coeff, sigma } => coeff * libm::pow(p as f64, m as f64 * sigma),
            Tail::Evaluator(f) => f(m),
        }
    }
}

/// Sums `term(start), term(start + step), ...` until terms are negligible
/// relative to the running absolute sum.
pub(crate) fn sum_series<F>(start: i32, step: i32, cfg: &SeriesConfig, context: &str, mut term: F) -> Result<Complex64>
where
    F: FnMut(i32) -> Complex64,
{
    let mut acc = ComplexSum::new();
    let mut small_run = 0;
    let mut k = start;
    for i in 0..cfg.max_terms {
        let t = term(k);
        acc += t;
        let mag = t.norm();
        let scale = acc.abs_sum();
        if (scale > 0.0 && mag <= cfg.eps * scale) || (scale == 0.0 && i >= 64) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(acc.value());
            }
        } else {
            small_run = 0;
        }
        k += step;
    }
    Err(Error::Divergence {
        terms: cfg.max_terms,
        context: String::from(context),
    })
}

/// A function on Q_p^n that depends only on `||x||`.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    prime: u32,
    dim: u32,
    m_lo: i32,
    table: Vec<Complex64>,
    tail_lo: Tail,
    tail_hi: Tail,
    at_zero: Complex64,
    decay: Option<f64>,
    series: SeriesConfig,
}

impl RadialFunction {
    /// `table[i]` is the value on the sphere `||x|| = p^(m_lo + i)`.
    pub fn new(
        prime: u32,
        dim: u32,
        m_lo: i32,
        table: Vec<Complex64>,
        tail_lo: Tail,
        tail_hi: Tail,
        at_zero: Complex64,
    ) -> Result<Self> {
        crate::padic::check_prime(prime)?;
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        let decay = match &tail_hi {
            Tail::Zero => Some(f64::NEG_INFINITY),
            Tail::PowerLaw { sigma, .. } => Some(*sigma),
            Tail::Constant(_) => Some(0.0),
            Tail::Evaluator(_) => None,
        };
        Ok(RadialFunction {
            prime,
            dim,
            m_lo,
            table,
            tail_lo,
            tail_hi,
            at_zero,
            decay,
            series: SeriesConfig::default(),
        })
    }

    /// Tabulates `f` on `m_lo..=m_hi` and at the origin.
    pub fn tabulate<F>(prime: u32, dim: u32, m_lo: i32, m_hi: i32, tail_lo: Tail, tail_hi: Tail, mut f: F) -> Result<Self>
    where
        F: FnMut(Radius) -> Complex64,
    {
        let table = (m_lo..=m_hi).map(|m| f(Radius::Sphere(m))).collect();
        Self::new(prime, dim, m_lo, table, tail_lo, tail_hi, f(Radius::Origin))
    }

    /// Builds a radial function from a single evaluator on every sphere.
    pub fn from_evaluator(prime: u32, dim: u32, f: Evaluator, at_zero: Complex64) -> Result<Self> {
        Self::new(
            prime,
            dim,
            0,
            Vec::new(),
            Tail::Evaluator(f.clone()),
            Tail::Evaluator(f),
            at_zero,
        )
    }

    /// Indicator of the ball `||x|| <= p^k`.
    pub fn ball_indicator(prime: u32, dim: u32, k: i32) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(prime, dim, k, alloc::vec![one], Tail::Constant(one), Tail::Zero, one)
    }

    pub fn constant(prime: u32, dim: u32, c: Complex64) -> Result<Self> {
        Self::new(prime, dim, 0, Vec::new(), Tail::Constant(c), Tail::Constant(c), c)
    }

    /// Declares `|f(m)| = O(p^(m * sigma))` as `m -> +inf`.
    pub fn with_decay(mut self, sigma: f64) -> Self {
        self.decay = Some(sigma);
        self
    }

    pub fn with_series(mut self, series: SeriesConfig) -> Self {
        self.series = series;
        self
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn decay(&self) -> Option<f64> {
        self.decay
    }

    pub fn series(&self) -> &SeriesConfig {
        &self.series
    }

    /// Inclusive range of tabulated radius exponents (empty if `lo > hi`).
    pub fn table_range(&self) -> (i32, i32) {
        (self.m_lo, self.m_lo + self.table.len() as i32 - 1)
    }

    pub fn tail_lo(&self) -> &Tail {
        &self.tail_lo
    }

    pub fn tail_hi(&self) -> &Tail {
        &self.tail_hi
    }

    pub fn value(&self, r: Radius) -> Complex64 {
        match r {
            Radius::Origin => self.at_zero,
            Radius::Sphere(m) => self.sphere_value(m),
        }
    }

    pub fn sphere_value(&self, m: i32) -> Complex64 {
        let (lo, hi) = self.table_range();
        if m < lo {
            self.tail_lo.value(self.prime, m)
        } else if m > hi {
            self.tail_hi.value(self.prime, m)
        } else {
            self.table[(m - lo) as usize]
        }
    }

    pub fn value_at_zero(&self) -> Complex64 {
        self.at_zero
    }

    pub fn evaluate(&self, x: &PAdicPoint) -> Complex64 {
        self.value(x.radius())
    }

    fn vol(&self, m: i32) -> f64 {
        sphere_volume(self.prime, self.dim, m)
    }

    /// `sum_{m < below} f(m) vol(S_m)` for the low tail.
    fn low_tail_mass(&self, below: i32) -> Result<Complex64> {
        let (p, n) = (self.prime, self.dim as f64);
        match &self.tail_lo {
            Tail::Zero => Ok(Complex64::new(0.0, 0.0)),
            Tail::Constant(c) => Ok(c * ball_volume(p, self.dim, below - 1)),
            Tail::PowerLaw { coeff, sigma } => {
                let s = sigma + n;
                if s <= 0.0 {
                    return Err(domain("low power-law tail is not integrable at the origin"));
                }
                let pf = p as f64;
                let first = libm::pow(pf, (below - 1) as f64 * s);
                Ok(coeff * (1.0 - libm::pow(pf, -n)) * first / (1.0 - libm::pow(pf, -s)))
            }
            Tail::Evaluator(f) => sum_series(below - 1, -1, &self.series, "low radial tail", |m| {
                f(m) * self.vol(m)
            }),
        }
    }

    /// `sum_{m > above} f(m) vol(S_m)` for the high tail.
    fn high_tail_mass(&self, above: i32) -> Result<Complex64> {
        let (p, n) = (self.prime, self.dim as f64);
        match &self.tail_hi {
            Tail::Zero => Ok(Complex64::new(0.0, 0.0)),
            Tail::Constant(c) if *c == Complex64::new(0.0, 0.0) => Ok(*c),
            Tail::Constant(_) => Err(domain("constant tail is not integrable")),
            Tail::PowerLaw { coeff, sigma } => {
                let s = sigma + n;
                if s >= 0.0 {
                    return Err(domain(format!(
                        "power-law tail p^(m*{sigma}) is not integrable in dimension {n}"
                    )));
                }
                let pf = p as f64;
                let first = libm::pow(pf, (above + 1) as f64 * s);
                Ok(coeff * (1.0 - libm::pow(pf, -n)) * first / (1.0 - libm::pow(pf, s)))
            }
            Tail::Evaluator(f) => sum_series(above + 1, 1, &self.series, "high radial tail", |m| {
                f(m) * self.vol(m)
            }),
        }
    }

    /// `∫_{Q_p^n} f(x) d^n x`.
    pub fn integrate(&self) -> Result<Complex64> {
        let (lo, hi) = self.table_range();
        let mut acc = ComplexSum::new();
        acc += self.low_tail_mass(lo)?;
        for m in lo..=hi {
            acc += self.sphere_value(m) * self.vol(m);
        }
        acc += self.high_tail_mass(hi)?;
        Ok(acc.value())
    }

    /// `∫_{||x|| <= p^l} f(x) d^n x`.
    pub fn ball_integral(&self, l: i32) -> Result<Complex64> {
        let (lo, _) = self.table_range();
        if l < lo {
            return self.low_tail_mass(l + 1);
        }
        let mut acc = ComplexSum::new();
        acc += self.low_tail_mass(lo)?;
        for m in lo..=l {
            acc += self.sphere_value(m) * self.vol(m);
        }
        Ok(acc.value())
    }

    /// `sum_{m > k} f(m) w(m) vol(S_m)`, summed until negligible.
    pub fn weighted_mass_above<W>(&self, k: i32, weight: W) -> Result<Complex64>
    where
        W: Fn(i32) -> Complex64,
    {
        sum_series(k + 1, 1, &self.series, "weighted radial tail", |m| {
            self.sphere_value(m) * weight(m) * self.vol(m)
        })
    }

    /// Pointwise linear combination `a f + b g` on the union of both tables.
    pub fn combine(&self, a: Complex64, other: &RadialFunction, b: Complex64) -> Result<RadialFunction> {
        if self.prime != other.prime || self.dim != other.dim {
            return Err(domain("radial functions live on different spaces"));
        }
        let f = self.clone();
        let g = other.clone();
        let at_zero = a * f.at_zero + b * g.at_zero;
        let decay = match (f.decay, g.decay) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        let eval: Evaluator = Arc::new(move |m| a * f.sphere_value(m) + b * g.sphere_value(m));
        let mut out = RadialFunction::from_evaluator(self.prime, self.dim, eval, at_zero)?;
        out.decay = decay;
        out.series = self.series;
        Ok(out)
    }
}

/// `(f * g)(x) = ∫ f(x - ξ) g(ξ) dξ` for radial `f`, `g`, using only the
/// ultrametric structure: for `||x|| = p^m`, points `ξ` inside the sphere
/// see `f(m)`, points outside see `f(||ξ||)`, and on the sphere `x - ξ`
/// covers `B_{m-1}` plus the sphere minus the coset of `x`.
pub fn convolve_radial(f: &RadialFunction, g: &RadialFunction, r: Radius) -> Result<Complex64> {
    if f.prime != g.prime || f.dim != g.dim {
        return Err(domain("radial functions live on different spaces"));
    }
    let (p, n) = (f.prime, f.dim);
    match r {
        Radius::Origin => {
            // ∫ f(ξ) g(ξ) over all spheres
            let both_lo = sum_series(0, -1, &f.series, "radial product (inner)", |k| {
                f.sphere_value(k) * g.sphere_value(k) * sphere_volume(p, n, k)
            })?;
            let both_hi = f.weighted_mass_above(0, |k| g.sphere_value(k))?;
            Ok(both_lo + both_hi)
        }
        Radius::Sphere(m) => {
            let fm = f.sphere_value(m);
            let gm = g.sphere_value(m);
            let inner = fm * g.ball_integral(m - 1)?;
            let shell_measure = sphere_volume(p, n, m) - ball_volume(p, n, m - 1);
            let on_sphere = gm * (f.ball_integral(m - 1)? + fm * shell_measure);
            let outer = f.weighted_mass_above(m, |k| g.sphere_value(k))?;
            Ok(inner + on_sphere + outer)
        }
    }
}

/// Window version of [`convolve_radial`] at a point `x` with
/// `p^-L < ||x|| <= p^K`: the cosets of `B_{-L}` inside `B_K` are summed
/// explicitly, the two cosets where a factor is not constant (around `0`
/// and around `x`) use ball integrals, and the region outside `B_K`
/// contributes `sum_{k > K} f(k) g(k) vol(S_k)`.
pub fn convolve_radial_window(
    f: &RadialFunction,
    g: &RadialFunction,
    x: &PAdicPoint,
    window: &FiniteWindow,
) -> Result<Complex64> {
    if f.prime != g.prime || f.dim != g.dim || window.prime() != f.prime || window.dim() as u32 != f.dim {
        return Err(domain("window and radial functions live on different spaces"));
    }
    let (k_out, l_in) = (window.outer_exp(), window.inner_exp());
    let m = match x.norm_exp() {
        Some(m) if m > -l_in && m <= k_out => m,
        _ => return Err(domain("point must satisfy p^-L < ||x|| <= p^K")),
    };
    let x_rep = window.representative_of(x);
    let cell = window.cell_measure();
    let mut acc = ComplexSum::new();
    for rep in window.representatives()? {
        if rep.is_zero() {
            // ξ near 0: g varies, f(x - ξ) = f(x)
            acc += f.sphere_value(m) * g.ball_integral(-l_in)?;
        } else if rep == x_rep {
            // ξ near x: f varies, g(ξ) = g(x)
            acc += g.sphere_value(m) * f.ball_integral(-l_in)?;
        } else {
            let diff = x.sub(&rep);
            acc += f.evaluate(&diff) * g.evaluate(&rep) * cell;
        }
    }
    acc += f.weighted_mass_above(k_out, |k| g.sphere_value(k))?;
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::powi_p;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unit_ball_has_unit_mass() {
        for &(p, n) in &[(2, 1), (3, 2), (5, 3)] {
            let f = RadialFunction::ball_indicator(p, n, 0).unwrap();
            assert!((f.integrate().unwrap() - c(1.0)).norm() < 1e-15);
            assert!((f.ball_integral(-2).unwrap() - c(powi_p(p, -2 * n as i32))).norm() < 1e-15);
        }
    }

    #[test]
    fn geometric_table_with_power_tail() {
        // f(m) = p^{-m(α+n)} for m >= 1, p=2, n=1, α=1; ∫ = Σ 2^{-2m} 2^{m-1} = 1/2
        let f = RadialFunction::new(
            2,
            1,
            1,
            vec![c(0.25), c(1.0 / 16.0)],
            Tail::Zero,
            Tail::PowerLaw { coeff: c(1.0), sigma: -2.0 },
            c(0.0),
        )
        .unwrap();
        let mut oracle = 0.0;
        for m in 1..200 {
            oracle += libm::pow(2.0, -2.0 * m as f64) * libm::pow(2.0, m as f64 - 1.0);
        }
        assert!((oracle - 0.5).abs() < 1e-15);
        assert!((f.integrate().unwrap().re - oracle).abs() < 1e-15);
        let g = f.clone().with_decay(-2.0);
        let ev: Evaluator = Arc::new(move |m| if m >= 1 { c(libm::pow(2.0, -2.0 * m as f64)) } else { c(0.0) });
        let h = RadialFunction::from_evaluator(2, 1, ev, c(0.0)).unwrap();
        assert!((h.integrate().unwrap().re - 0.5).abs() < 1e-15);
        assert_eq!(g.decay(), Some(-2.0));
    }

    #[test]
    fn divergent_tail_is_rejected() {
        let f = RadialFunction::new(3, 2, 0, vec![], Tail::Zero, Tail::PowerLaw { coeff: c(1.0), sigma: -1.0 }, c(0.0))
            .unwrap();
        assert!(matches!(f.integrate(), Err(Error::Domain(_))));
        let g = RadialFunction::constant(3, 1, c(1.0)).unwrap();
        assert!(g.integrate().is_err());
    }

    #[test]
    fn evaluate_indicator() {
        let f = RadialFunction::ball_indicator(2, 1, 0).unwrap();
        assert_eq!(f.evaluate(&PAdicPoint::zero(2, 1)), c(1.0));
        assert_eq!(f.evaluate(&PAdicPoint::on_sphere(2, 1, 1)), c(0.0));
        assert_eq!(f.evaluate(&PAdicPoint::on_sphere(2, 1, -3)), c(1.0));
    }

    #[test]
    fn radial_convolution_routes_agree() {
        // two ball indicators convolve to vol(smaller) on the bigger ball
        for &(p, n) in &[(2u32, 1u32), (3, 1), (2, 2)] {
            let f = RadialFunction::ball_indicator(p, n, 0).unwrap();
            let g = RadialFunction::ball_indicator(p, n, -1).unwrap();
            let w = FiniteWindow::new(p, n as usize, 2, 2).unwrap();
            for m in -1..=2 {
                let x = PAdicPoint::on_sphere(p, n as usize, m);
                let exact = if m <= 0 { ball_volume(p, n, -1) } else { 0.0 };
                let a = convolve_radial(&f, &g, Radius::Sphere(m)).unwrap();
                let b = convolve_radial_window(&f, &g, &x, &w).unwrap();
                assert!((a.re - exact).abs() < 1e-14, "{p} {n} {m} {a}");
                assert!((b.re - exact).abs() < 1e-14, "{p} {n} {m} {b}");
            }
        }
    }

    #[test]
    fn combine_is_pointwise() {
        let f = RadialFunction::ball_indicator(3, 1, 0).unwrap();
        let g = RadialFunction::ball_indicator(3, 1, 2).unwrap();
        let h = f.combine(c(2.0), &g, c(-1.0)).unwrap();
        assert_eq!(h.sphere_value(0), c(1.0));
        assert_eq!(h.sphere_value(1), c(-1.0));
        assert_eq!(h.sphere_value(3), c(0.0));
    }
}
