//! Adaptive Simpson quadrature for complex-valued integrands.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance on the whole integral.
    pub tol: f64,
    /// The interval is first cut into this many equal panels.
    pub min_panels: usize,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-10,
            min_panels: 64,
            max_depth: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    /// Sum of the local Richardson error estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: Vec<Complex64>,
    fm: Vec<Complex64>,
    fb: Vec<Complex64>,
    whole: Vec<Complex64>,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: &[Complex64], fm: &[Complex64], fb: &[Complex64]) -> Vec<Complex64> {
    let w = (b - a) / 6.0;
    fa.iter().zip(fm).zip(fb).map(|((x, y), z)| (x + y * 4.0 + z) * w).collect()
}

/// `∫_a^b f`. Fails with an accuracy error (carrying the achieved error
/// estimate) when some panel cannot be resolved within `max_depth` halvings.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let r = adaptive_simpson_vec(|x| Ok(alloc::vec![f(x)?]), 1, a, b, cfg)?;
    Ok(QuadResult {
        value: r.values[0],
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VecQuadResult {
    pub values: Vec<Complex64>,
    /// Largest per-component error estimate.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// [`adaptive_simpson`] for `len` integrands sharing their nodes; a panel is
/// accepted once every component meets its share of the tolerance.
pub fn adaptive_simpson_vec<F>(mut f: F, len: usize, a: f64, b: f64, cfg: &QuadConfig) -> Result<VecQuadResult>
where
    F: FnMut(f64) -> Result<Vec<Complex64>>,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(domain(format!("bad integration interval [{a}, {b}]")));
    }
    if !(cfg.tol > 0.0) || cfg.min_panels == 0 {
        return Err(domain("tolerance and panel count must be positive"));
    }
    let zero = Complex64::new(0.0, 0.0);
    if a == b {
        return Ok(VecQuadResult { values: alloc::vec![zero; len], error_estimate: 0.0, evaluations: 0 });
    }
    let mut evals = 0usize;
    let mut eval = |x: f64| -> Result<Vec<Complex64>> {
        evals += 1;
        let v = f(x)?;
        if v.len() != len {
            return Err(domain("integrand returned the wrong number of components"));
        }
        if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(domain(format!("integrand is not finite at {x}")));
        }
        Ok(v)
    };
    let np = cfg.min_panels;
    let width = (b - a) / np as f64;
    let node = |i: usize| if i == np { b } else { a + width * i as f64 };
    let mut stack = Vec::new();
    let mut f_left = eval(a)?;
    for i in 0..np {
        let (pa, pb) = (node(i), node(i + 1));
        let fm = eval(0.5 * (pa + pb))?;
        let fb = eval(pb)?;
        let whole = simpson(pa, pb, &f_left, &fm, &fb);
        stack.push(Panel { a: pa, b: pb, fa: f_left, fm, fb: fb.clone(), whole, tol: cfg.tol / np as f64, depth: 0 });
        f_left = fb;
    }
    let mut total = alloc::vec![zero; len];
    let mut err = alloc::vec![0.0f64; len];
    let mut unresolved = false;
    while let Some(pn) = stack.pop() {
        let m = 0.5 * (pn.a + pn.b);
        let flm = eval(0.5 * (pn.a + m))?;
        let frm = eval(0.5 * (m + pn.b))?;
        let left = simpson(pn.a, m, &pn.fa, &flm, &pn.fm);
        let right = simpson(m, pn.b, &pn.fm, &frm, &pn.fb);
        let local = (0..len).map(|i| (left[i] + right[i] - pn.whole[i]).norm() / 15.0).fold(0.0, f64::max);
        if local <= pn.tol || pn.depth >= cfg.max_depth {
            unresolved |= local > pn.tol;
            for i in 0..len {
                let diff = left[i] + right[i] - pn.whole[i];
                total[i] += left[i] + right[i] + diff / 15.0;
                err[i] += diff.norm() / 15.0;
            }
        } else {
            let tol = 0.5 * pn.tol;
            let depth = pn.depth + 1;
            stack.push(Panel { a: pn.a, b: m, fa: pn.fa, fm: flm, fb: pn.fm.clone(), whole: left, tol, depth });
            stack.push(Panel { a: m, b: pn.b, fa: pn.fm, fm: frm, fb: pn.fb, whole: right, tol, depth });
        }
    }
    let worst = err.iter().cloned().fold(0.0, f64::max);
    if unresolved && worst > cfg.tol {
        return Err(Error::Accuracy {
            requested: cfg.tol,
            achieved: worst,
            context: format!("adaptive Simpson on [{a}, {b}] hit depth {}", cfg.max_depth),
        });
    }
    Ok(VecQuadResult { values: total, error_estimate: worst, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn polynomials_and_exponentials() {
        let cfg = QuadConfig::default();
        let r = adaptive_simpson(|x| Ok(re(x * x * x)), 0.0, 2.0, &cfg).unwrap();
        assert!((r.value.re - 4.0).abs() < 1e-13);
        assert_eq!(r.evaluations, 1 + 2 * 64 + 2 * 64);
        let r = adaptive_simpson(|x| Ok(Complex64::new(libm::exp(-3.0 * x), libm::sin(x))), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value.re - (1.0 - libm::exp(-3.0)) / 3.0).abs() < 1e-11);
        assert!((r.value.im - (1.0 - libm::cos(1.0))).abs() < 1e-11);
        assert_eq!(adaptive_simpson(|_| Ok(re(1.0)), 1.0, 1.0, &cfg).unwrap().value, re(0.0));
    }

    #[test]
    fn sharp_features_refine() {
        let cfg = QuadConfig::default();
        let r = adaptive_simpson(|x| Ok(re(libm::sqrt(x))), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value.re - 2.0 / 3.0).abs() < 1e-9);
        assert!(r.evaluations > 300);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let cfg = QuadConfig { tol: 1e-12, min_panels: 1, max_depth: 3 };
        match adaptive_simpson(|x| Ok(re(if x < 0.3 { 0.0 } else { 1.0 })), 0.0, 1.0, &cfg) {
            Err(Error::Accuracy { achieved, .. }) => assert!(achieved > 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(adaptive_simpson(|_| Ok(re(1.0)), 1.0, 0.0, &QuadConfig::default()).is_err());
    }

    #[test]
    fn vector_integrands_share_nodes() {
        let r = adaptive_simpson_vec(|x| Ok(alloc::vec![re(1.0), re(x), re(libm::cos(x))]), 3, 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((r.values[0].re - 1.0).abs() < 1e-15);
        assert!((r.values[1].re - 0.5).abs() < 1e-15);
        assert!((r.values[2].re - libm::sin(1.0)).abs() < 1e-12);
    }
}
