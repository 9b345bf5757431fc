//! Empirical constants for the pointwise bounds on `Z`, `∂Z/∂t` and `D^γ Z`.
//!
//! The bounds only assert existence of a constant, so it is fitted: the
//! ratio `R(x, t) = |value| / bound-shape` is maximized over a coarse
//! `t` grid (continuously, inside every coarse interval) and the resulting
//! `Ĉ` is then checked on a finer grid.

use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::kernel::{dgamma_z, dz_dt, z_tent, KernelParams};
use crate::padic::Radius;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundKind {
    /// `Z ≤ C t (t^{1/α} + ||x||)^{-α-n}`.
    Kernel,
    /// `|∂Z/∂t| ≤ C (t^{1/α} + ||x||)^{-α-n}`.
    TimeDerivative,
    /// `|D^γ Z| ≤ C (t^{1/α} + ||x||)^{-γ-n}`.
    Fractional(f64),
}

/// `|value| / shape` at one point.
pub fn bound_ratio(kind: BoundKind, r: Radius, t: f64, params: &KernelParams) -> Result<f64> {
    let p = params.prime;
    let n = params.dim as f64;
    let s = libm::pow(t, 1.0 / params.alpha);
    let dist = s + crate::lcf::radius_value(p, r);
    Ok(match kind {
        BoundKind::Kernel => z_tent(r, t, params)? * libm::pow(dist, params.alpha + n) / t,
        BoundKind::TimeDerivative => dz_dt(r, t, params)?.abs() * libm::pow(dist, params.alpha + n),
        BoundKind::Fractional(g) => dgamma_z(r, t, g, params)?.abs() * libm::pow(dist, g + n),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundFit {
    pub kind: BoundKind,
    pub constant: f64,
    /// Where the maximum was found.
    pub argmax: (Radius, f64),
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundValidation {
    pub constant: f64,
    pub checked: usize,
    pub max_ratio: f64,
    /// `(radius, t, ratio)` for every point with `ratio > C (1 + 1e-12)`.
    pub violations: Vec<(Radius, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub fit: BoundFit,
    /// Largest ratio seen on the coarse grid points alone.
    pub coarse_max: f64,
    pub validation: BoundValidation,
}

const SUBSCAN: usize = 64;
const GOLDEN_ITERS: usize = 80;

struct Tracker {
    best: f64,
    at: (Radius, f64),
    evals: usize,
}

impl Tracker {
    fn eval(&mut self, kind: BoundKind, r: Radius, t: f64, params: &KernelParams) -> Result<f64> {
        let v = bound_ratio(kind, r, t, params)?;
        if !v.is_finite() {
            return Err(domain("bound ratio is not finite"));
        }
        self.evals += 1;
        if v > self.best {
            self.best = v;
            self.at = (r, t);
        }
        Ok(v)
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(domain("time grid must be non-empty and positive"));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Maximizes the ratio over `radii × [t_0, t_last]`: a log-spaced scan of
/// each coarse interval, then golden-section refinement of every local
/// maximum of the scan. A single-point grid gives the ratio there.
pub fn fit_bound_constant(kind: BoundKind, params: &KernelParams, t_grid: &[f64], radii: &[Radius]) -> Result<BoundFit> {
    check_grid(t_grid)?;
    if radii.is_empty() {
        return Err(domain("radius grid is empty"));
    }
    let mut tr = Tracker {
        best: f64::NEG_INFINITY,
        at: (radii[0], t_grid[0]),
        evals: 0,
    };
    for &r in radii {
        for &t in t_grid {
            tr.eval(kind, r, t, params)?;
        }
        for w in t_grid.windows(2) {
            let (u0, u1) = (libm::log(w[0]), libm::log(w[1]));
            let step = (u1 - u0) / SUBSCAN as f64;
            let mut vals = Vec::with_capacity(SUBSCAN + 1);
            for i in 0..=SUBSCAN {
                let u = if i == SUBSCAN { u1 } else { u0 + step * i as f64 };
                vals.push(tr.eval(kind, r, libm::exp(u), params)?);
            }
            for i in 0..=SUBSCAN {
                let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
                let right = if i == SUBSCAN { f64::NEG_INFINITY } else { vals[i + 1] };
                if vals[i] >= left && vals[i] >= right {
                    let lo = u0 + step * (i as f64 - 1.0).max(0.0);
                    let hi = (u0 + step * (i as f64 + 1.0)).min(u1);
                    golden_max(&mut tr, kind, r, params, lo, hi)?;
                }
            }
        }
    }
    Ok(BoundFit {
        kind,
        constant: tr.best,
        argmax: tr.at,
        evaluations: tr.evals,
    })
}

fn golden_max(tr: &mut Tracker, kind: BoundKind, r: Radius, params: &KernelParams, mut a: f64, mut b: f64) -> Result<()> {
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = tr.eval(kind, r, libm::exp(c), params)?;
    let mut fd = tr.eval(kind, r, libm::exp(d), params)?;
    for _ in 0..GOLDEN_ITERS {
        if b - a < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = tr.eval(kind, r, libm::exp(c), params)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = tr.eval(kind, r, libm::exp(d), params)?;
        }
    }
    Ok(())
}

/// Checks `ratio ≤ C (1 + 1e-12)` at every grid point.
pub fn validate_bound(kind: BoundKind, params: &KernelParams, constant: f64, t_grid: &[f64], radii: &[Radius]) -> Result<BoundValidation> {
    check_grid(t_grid)?;
    let limit = constant * (1.0 + 1e-12);
    let mut out = BoundValidation {
        constant,
        checked: 0,
        max_ratio: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for &r in radii {
        for &t in t_grid {
            let v = bound_ratio(kind, r, t, params)?;
            out.checked += 1;
            out.max_ratio = out.max_ratio.max(v);
            if !(v <= limit) {
                out.violations.push((r, t, v));
            }
        }
    }
    Ok(out)
}

/// Inserts `factor - 1` log-spaced points into every interval of `grid`.
pub fn refine_log_grid(grid: &[f64], factor: usize) -> Vec<f64> {
    let factor = factor.max(1);
    let mut out = Vec::with_capacity(grid.len().saturating_sub(1) * factor + 1);
    for w in grid.windows(2) {
        let (u0, u1) = (libm::log(w[0]), libm::log(w[1]));
        for i in 0..factor {
            out.push(if i == 0 { w[0] } else { libm::exp(u0 + (u1 - u0) * i as f64 / factor as f64) });
        }
    }
    if let Some(&last) = grid.last() {
        out.push(last);
    }
    out
}

/// Fits `Ĉ` on `t_grid` and validates it on the 10× refined grid.
pub fn bound_check(kind: BoundKind, params: &KernelParams, t_grid: &[f64], radii: &[Radius]) -> Result<BoundReport> {
    let fit = fit_bound_constant(kind, params, t_grid, radii)?;
    let coarse = validate_bound(kind, params, fit.constant, t_grid, radii)?;
    let fine = refine_log_grid(t_grid, 10);
    let validation = validate_bound(kind, params, fit.constant, &fine, radii)?;
    Ok(BoundReport {
        fit,
        coarse_max: coarse.max_ratio,
        validation,
    })
}

/// The origin and every sphere `m_lo ..= m_hi`.
pub fn radius_grid(m_lo: i32, m_hi: i32) -> Vec<Radius> {
    core::iter::once(Radius::Origin).chain((m_lo..=m_hi).map(Radius::Sphere)).collect()
}

/// `t (t^{1/α} + p^m)^{-α-n}`, the shape of the kernel bound.
pub fn kernel_bound_shape(params: &KernelParams, r: Radius, t: f64) -> f64 {
    let s = libm::pow(t, 1.0 / params.alpha);
    let d = s + crate::lcf::radius_value(params.prime, r);
    t * libm::pow(d, -params.alpha - params.dim as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_grid_returns_that_ratio() {
        let params = KernelParams::new(2, 1, 1.0, 1.0).unwrap();
        let r = Radius::Sphere(2);
        let fit = fit_bound_constant(BoundKind::Kernel, &params, &[0.5], &[r]).unwrap();
        let z = z_tent(r, 0.5, &params).unwrap();
        let expected = z * libm::pow(0.5 + 4.0, 2.0) / 0.5;
        assert!((fit.constant - expected).abs() < 1e-15 * expected);
        assert!((kernel_bound_shape(&params, r, 0.5) * fit.constant - z).abs() < 1e-15);
    }

    #[test]
    fn fitted_constants_survive_refinement() {
        let t_grid = [0.01, 0.1, 1.0, 10.0];
        let radii = radius_grid(-10, 10);
        for (p, n, alpha) in [(2, 1, 1.0), (3, 2, 0.5), (5, 1, 2.0)] {
            let params = KernelParams::new(p, n, alpha, 0.5).unwrap();
            for kind in [BoundKind::Kernel, BoundKind::TimeDerivative, BoundKind::Fractional(alpha / 2.0)] {
                let rep = bound_check(kind, &params, &t_grid, &radii).unwrap();
                assert!(rep.fit.constant.is_finite() && rep.fit.constant > 0.0);
                assert!(rep.fit.constant >= rep.coarse_max);
                assert!(rep.validation.violations.is_empty(), "{kind:?} p={p}: {:?}", rep.validation.violations);
                assert_eq!(rep.validation.checked, radii.len() * 31);
            }
        }
    }

    #[test]
    fn refinement_keeps_endpoints() {
        let g = refine_log_grid(&[0.01, 1.0], 2);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0], 0.01);
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert_eq!(g[2], 1.0);
        assert!(fit_bound_constant(BoundKind::Kernel, &KernelParams::new(2, 1, 1.0, 1.0).unwrap(), &[1.0, 0.5], &[Radius::Origin]).is_err());
    }
}
