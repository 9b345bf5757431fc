//! The Cauchy problem `∂u/∂t + a D^α u = f`, `u(·, 0) = φ`, solved as
//! `u = Z_t * φ + ∫_0^t Z_{t-τ} * f(·, τ) dτ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::kernel::{dgamma_slice, KernelParams, KernelSlice, KernelSource};
use crate::lcf::LocallyConstantFunction;
use crate::operator::{apply_hypersingular, OperatorParams};
use crate::padic::PAdicPoint;
use crate::quad::{adaptive_simpson_vec, QuadConfig, QuadResult, VecQuadResult};
use crate::radial::{RadialFunction, Tail};
use crate::window::FiniteWindow;

/// Right-hand side `f(x, τ)`.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Source {
    Zero,
    Constant(Complex64),
    /// `P(τ) ψ(x)` with `P(τ) = sum_i time_poly[i] τ^i`.
    Separable {
        time_poly: Vec<f64>,
        space: LocallyConstantFunction,
    },
}

impl Source {
    pub fn growth_exp(&self) -> f64 {
        match self {
            Source::Separable { space, .. } => space.growth_exp(),
            _ => 0.0,
        }
    }

    pub fn time_factor(&self, tau: f64) -> f64 {
        match self {
            Source::Separable { time_poly, .. } => time_poly.iter().rev().fold(0.0, |acc, c| acc * tau + c),
            _ => 1.0,
        }
    }

    pub fn evaluate(&self, x: &PAdicPoint, tau: f64) -> Result<Complex64> {
        match self {
            Source::Zero => Ok(Complex64::new(0.0, 0.0)),
            Source::Constant(c) => Ok(*c),
            Source::Separable { space, .. } => Ok(space.evaluate(x)? * self.time_factor(tau)),
        }
    }

    fn space(&self) -> Option<&LocallyConstantFunction> {
        match self {
            Source::Separable { space, .. } => Some(space),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CauchyProblem {
    pub params: KernelParams,
    pub phi: LocallyConstantFunction,
    pub source: Source,
    pub horizon: f64,
}

impl CauchyProblem {
    pub fn new(params: KernelParams, phi: LocallyConstantFunction, source: Source, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(domain("time horizon must be positive"));
        }
        let same = |f: &LocallyConstantFunction| f.prime() == params.prime && f.dim() == params.dim as usize;
        if !same(&phi) || !source.space().is_none_or(same) {
            return Err(domain("data and kernel live on different spaces"));
        }
        let prob = CauchyProblem { params, phi, source, horizon };
        let lambda = prob.growth_exp();
        if !(lambda < params.alpha) {
            return Err(domain(format!(
                "growth exponent λ = {lambda} of the data must satisfy 0 <= λ < α = {}",
                params.alpha
            )));
        }
        Ok(prob)
    }

    /// `λ = max(λ_φ, λ_f)`.
    pub fn growth_exp(&self) -> f64 {
        self.phi.growth_exp().max(self.source.growth_exp())
    }

    /// Finest exponent of local constancy among the data.
    pub fn loc_exp(&self) -> i32 {
        self.source.space().map_or(self.phi.loc_exp(), |s| s.loc_exp().max(self.phi.loc_exp()))
    }

    /// `B_K` containing every piece of the data.
    pub fn support_exp(&self) -> i32 {
        let l = self.loc_exp();
        let mut k = self.phi.support_exp().unwrap_or(-l).max(-l);
        if let Some(s) = self.source.space().and_then(LocallyConstantFunction::support_exp) {
            k = k.max(s);
        }
        k
    }
}

/// `sup |u(x, t)| / (1 + ||x||^λ)` over a sample of points and times.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCertificate {
    pub constant: f64,
    pub lambda: f64,
    /// `(t, largest ratio at t)`.
    pub per_time: Vec<(f64, f64)>,
}

/// Sample used for the growth certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub quad: QuadConfig,
    pub certificate_radii: Vec<i32>,
    /// Fractions of the horizon.
    pub certificate_times: Vec<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            quad: QuadConfig::default(),
            certificate_radii: vec![-4, -2, 0, 2, 4, 8, 12],
            certificate_times: vec![0.0, 0.25, 0.5, 1.0],
        }
    }
}

/// `u(·, t)` frozen as a locally constant function: one value per coset
/// inside `B_K`, a radial table outside.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub function: LocallyConstantFunction,
    pub tail_spheres: i32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Parts {
    All,
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSample {
    pub x: PAdicPoint,
    pub t: f64,
    pub du_dt: Complex64,
    pub operator: Complex64,
    pub source: Complex64,
    pub residual: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub h: f64,
    pub samples: Vec<ResidualSample>,
    pub max_abs: f64,
}

pub struct SolutionField<'a> {
    problem: &'a CauchyProblem,
    kernels: &'a dyn KernelSource,
    quad: QuadConfig,
    certificate: GrowthCertificate,
}

/// Builds the solution and its growth certificate.
pub fn solve<'a>(problem: &'a CauchyProblem, kernels: &'a dyn KernelSource) -> Result<SolutionField<'a>> {
    solve_with(problem, kernels, &SolveOptions::default())
}

pub fn solve_with<'a>(problem: &'a CauchyProblem, kernels: &'a dyn KernelSource, opts: &SolveOptions) -> Result<SolutionField<'a>> {
    if kernels.params() != &problem.params {
        return Err(domain("kernel source parameters differ from the problem's"));
    }
    let mut field = SolutionField {
        problem,
        kernels,
        quad: opts.quad,
        certificate: GrowthCertificate { constant: 0.0, lambda: problem.growth_exp(), per_time: Vec::new() },
    };
    let (p, n) = (problem.params.prime, problem.params.dim as usize);
    let mut points = vec![PAdicPoint::zero(p, n)];
    points.extend(opts.certificate_radii.iter().map(|&m| PAdicPoint::on_sphere(p, n, m)));
    let lambda = problem.growth_exp();
    for &frac in &opts.certificate_times {
        let t = frac * problem.horizon;
        let values = field.values_at(&points, t)?;
        let ratio = points
            .iter()
            .zip(&values)
            .map(|(x, v)| v.norm() / growth_weight(p, x, lambda))
            .fold(0.0, f64::max);
        field.certificate.per_time.push((t, ratio));
        field.certificate.constant = field.certificate.constant.max(ratio);
    }
    Ok(field)
}

/// `u₁(x, t)` alone.
pub fn solve_homogeneous(problem: &CauchyProblem, kernels: &dyn KernelSource, x: &PAdicPoint, t: f64) -> Result<Complex64> {
    let field = SolutionField {
        problem,
        kernels,
        quad: QuadConfig::default(),
        certificate: GrowthCertificate { constant: f64::NAN, lambda: problem.growth_exp(), per_time: Vec::new() },
    };
    field.homogeneous(x, t)
}

/// `u₂(x, t)` alone, with the quadrature diagnostics.
pub fn solve_duhamel(problem: &CauchyProblem, x: &PAdicPoint, t: f64, quad: &QuadConfig) -> Result<QuadResult> {
    let field = SolutionField {
        problem,
        kernels: &problem.params,
        quad: *quad,
        certificate: GrowthCertificate { constant: f64::NAN, lambda: problem.growth_exp(), per_time: Vec::new() },
    };
    field.duhamel(x, t)
}

fn growth_weight(p: u32, x: &PAdicPoint, lambda: f64) -> f64 {
    1.0 + x.norm_exp().map_or(0.0, |m| libm::pow(p as f64, m as f64 * lambda))
}

impl<'a> SolutionField<'a> {
    pub fn problem(&self) -> &CauchyProblem {
        self.problem
    }

    pub fn certificate(&self) -> &GrowthCertificate {
        &self.certificate
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.problem.horizon * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(domain(format!("time {t} outside [0, {}]", self.problem.horizon)))
        }
    }

    fn phi_window(&self) -> Result<FiniteWindow> {
        self.problem.phi.default_window(None)
    }

    /// `(Z_t * φ)(x)`, or `φ(x)` at `t = 0`.
    pub fn homogeneous(&self, x: &PAdicPoint, t: f64) -> Result<Complex64> {
        self.check_time(t)?;
        if t == 0.0 {
            return self.problem.phi.evaluate(x);
        }
        let slice = self.kernels.slice(t)?;
        Ok(self.problem.phi.convolve_window(slice.radial(), x, &self.phi_window()?)?.value)
    }

    /// `∫_0^t (Z_{t-τ} * f(·, τ))(x) dτ`.
    pub fn duhamel(&self, x: &PAdicPoint, t: f64) -> Result<QuadResult> {
        let r = self.duhamel_many(core::slice::from_ref(x), t, &self.quad)?;
        Ok(QuadResult { value: r.values[0], error_estimate: r.error_estimate, evaluations: r.evaluations })
    }

    /// The Duhamel term at several points from one shared quadrature.
    pub fn duhamel_many(&self, xs: &[PAdicPoint], t: f64, quad: &QuadConfig) -> Result<VecQuadResult> {
        self.check_time(t)?;
        let zero = Complex64::new(0.0, 0.0);
        match &self.problem.source {
            Source::Zero => Ok(VecQuadResult { values: vec![zero; xs.len()], error_estimate: 0.0, evaluations: 0 }),
            Source::Constant(c) => {
                // spatially constant, so Z_s * c = c ∫ Z_s
                let c = *c;
                let params = self.problem.params;
                let r = adaptive_simpson_vec(
                    |tau| {
                        let s = t - tau;
                        let mass = if s <= 0.0 { 1.0 } else { KernelSlice::new(&params, s)?.integral()? };
                        Ok(vec![c * mass])
                    },
                    1,
                    0.0,
                    t,
                    quad,
                )?;
                Ok(VecQuadResult { values: vec![r.values[0]; xs.len()], ..r })
            }
            Source::Separable { space, .. } => {
                let window = space.default_window(None)?;
                let params = self.problem.params;
                let source = &self.problem.source;
                adaptive_simpson_vec(
                    |tau| {
                        let s = t - tau;
                        let pt = source.time_factor(tau);
                        if s <= 0.0 {
                            return xs.iter().map(|x| Ok(space.evaluate(x)? * pt)).collect();
                        }
                        let slice = KernelSlice::new(&params, s)?;
                        xs.iter()
                            .map(|x| Ok(space.convolve_window(slice.radial(), x, &window)?.value * pt))
                            .collect()
                    },
                    xs.len(),
                    0.0,
                    t,
                    quad,
                )
            }
        }
    }

    /// `u(x, t) = u₁ + u₂`, with `u(x, 0) = φ(x)`.
    pub fn evaluate(&self, x: &PAdicPoint, t: f64) -> Result<Complex64> {
        Ok(self.homogeneous(x, t)? + self.duhamel(x, t)?.value)
    }

    fn values_at(&self, xs: &[PAdicPoint], t: f64) -> Result<Vec<Complex64>> {
        self.values_with(xs, t, Parts::All, &self.quad)
    }

    fn values_with(&self, xs: &[PAdicPoint], t: f64, parts: Parts, quad: &QuadConfig) -> Result<Vec<Complex64>> {
        self.check_time(t)?;
        let mut out = Vec::with_capacity(xs.len());
        if t == 0.0 {
            for x in xs {
                out.push(self.problem.phi.evaluate(x)?);
            }
            return Ok(out);
        }
        let slice = self.kernels.slice(t)?;
        let window = self.phi_window()?;
        for x in xs {
            out.push(self.problem.phi.convolve_window(slice.radial(), x, &window)?.value);
        }
        if parts == Parts::All {
            let d = self.duhamel_many(xs, t, quad)?;
            for (o, v) in out.iter_mut().zip(d.values) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// `u(·, t)` materialized on `B_K` at the data's resolution, plus a
    /// radial table outside. The table runs far enough that spheres beyond
    /// it weigh less than `1e-16` in a hypersingular integral of order
    /// `gamma`; past it the last value is held.
    pub fn snapshot(&self, t: f64, gamma: f64) -> Result<Snapshot> {
        self.snapshot_parts(t, gamma, Parts::All, &self.quad)
    }

    fn snapshot_parts(&self, t: f64, gamma: f64, parts: Parts, quad: &QuadConfig) -> Result<Snapshot> {
        if !(gamma > 0.0) {
            return Err(domain("operator order must be positive"));
        }
        let prob = self.problem;
        let (p, n) = (prob.params.prime, prob.params.dim as usize);
        let l = prob.loc_exp();
        let k = prob.support_exp();
        let window = FiniteWindow::new(p, n, k, l)?;
        let h = libm::ceil(16.0 * libm::log(10.0) / (gamma * libm::log(p as f64))) as i32 + 2;
        let mut points: Vec<PAdicPoint> = window.representatives()?.collect();
        let inside = points.len();
        points.extend((1..=h).map(|j| PAdicPoint::on_sphere(p, n, k + j)));
        let values = self.values_with(&points, t, parts, quad)?;
        let lambda = prob.growth_exp();
        let growth_const = points
            .iter()
            .zip(&values)
            .map(|(x, v)| v.norm() / growth_weight(p, x, lambda))
            .fold(0.0, f64::max)
            * (1.0 + 1e-9);
        let table = values[inside..].to_vec();
        let last = *table.last().unwrap_or(&Complex64::new(0.0, 0.0));
        let tail = RadialFunction::new(p, n as u32, k + 1, table, Tail::Zero, Tail::Constant(last), values[0])?
            .with_series(prob.params.series);
        let mut grid = values[..inside].iter();
        let function = LocallyConstantFunction::from_window(
            window,
            |_| Ok(*grid.next().expect("one value per coset")),
            Some(tail),
            lambda,
            growth_const,
        )?;
        Ok(Snapshot { t, function, tail_spheres: h })
    }

    /// `∂u/∂t + a D^α u - f` at each `(x, t)`: the time derivative by central
    /// differences with step `h`, the operator by the hypersingular integral
    /// of the snapshot `u(·, t)`.
    pub fn residual_check(&self, points: &[PAdicPoint], times: &[f64], h: f64) -> Result<ResidualReport> {
        if !(h > 0.0) {
            return Err(domain("finite-difference step must be positive"));
        }
        let prob = self.problem;
        let quad = QuadConfig { tol: self.quad.tol.min(1e-12), ..self.quad };
        let op = OperatorParams::new(prob.params.alpha)?.with_series(prob.params.series);
        let mut samples = Vec::new();
        let mut max_abs = 0.0f64;
        for &t in times {
            if !(t - h > 0.0) {
                return Err(domain(format!("time {t} too close to 0 for step {h}")));
            }
            self.check_time(t + h)?;
            let snap = self.snapshot_parts(t, prob.params.alpha, Parts::All, &quad)?;
            let plus = self.values_with(points, t + h, Parts::All, &quad)?;
            let minus = self.values_with(points, t - h, Parts::All, &quad)?;
            for (i, x) in points.iter().enumerate() {
                let du_dt = (plus[i] - minus[i]) / (2.0 * h);
                let operator = apply_hypersingular(&snap.function, &op, x)?;
                let source = prob.source.evaluate(x, t)?;
                let residual = du_dt + operator * prob.params.a - source;
                max_abs = max_abs.max(residual.norm());
                samples.push(ResidualSample { x: x.clone(), t, du_dt, operator, source, residual });
            }
        }
        Ok(ResidualReport { h, samples, max_abs })
    }

    /// `D^γ u₁` with the operator moved onto the kernel:
    /// `∫ (D^γ Z)(x - ξ, t) φ(ξ) dξ`, for `λ < γ <= α`.
    pub fn dgamma_homogeneous_exchanged(&self, x: &PAdicPoint, t: f64, gamma: f64) -> Result<Complex64> {
        self.check_order(gamma)?;
        let g = dgamma_slice(&self.problem.params, t, gamma)?;
        Ok(self.problem.phi.convolve_window(&g, x, &self.phi_window()?)?.value)
    }

    /// `D^γ u₁` by the hypersingular integral of the `u₁` snapshot.
    pub fn dgamma_homogeneous_direct(&self, x: &PAdicPoint, t: f64, gamma: f64) -> Result<Complex64> {
        self.check_order(gamma)?;
        let snap = self.snapshot_parts(t, gamma, Parts::Homogeneous, &self.quad)?;
        let op = OperatorParams::new(gamma)?.with_series(self.problem.params.series);
        apply_hypersingular(&snap.function, &op, x)
    }

    fn check_order(&self, gamma: f64) -> Result<()> {
        let lambda = self.problem.growth_exp();
        if gamma > lambda && gamma <= self.problem.params.alpha {
            Ok(())
        } else {
            Err(domain(format!("order {gamma} outside (λ, α] = ({lambda}, {}]", self.problem.params.alpha)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::radial_cdf;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn params() -> KernelParams {
        KernelParams::new(2, 1, 1.0, 1.0).unwrap()
    }

    fn unit_ball(p: u32, n: usize) -> LocallyConstantFunction {
        LocallyConstantFunction::ball_indicator(PAdicPoint::zero(p, n), 0).unwrap()
    }

    #[test]
    fn constant_data_is_preserved() {
        let pr = params();
        let prob = CauchyProblem::new(pr, LocallyConstantFunction::constant(2, 1, c(1.0)).unwrap(), Source::Zero, 1.0).unwrap();
        let field = solve(&prob, &pr).unwrap();
        for m in [-3, 0, 5] {
            let x = PAdicPoint::on_sphere(2, 1, m);
            for t in [0.01, 0.3, 1.0] {
                assert!((field.evaluate(&x, t).unwrap() - c(1.0)).norm() < 1e-12);
            }
        }
        assert!((field.certificate().constant - 1.0).abs() < 1e-12);
        let rep = field.residual_check(&[PAdicPoint::zero(2, 1), PAdicPoint::on_sphere(2, 1, 3)], &[0.5], 1e-4).unwrap();
        assert!(rep.max_abs < 1e-10, "{}", rep.max_abs);
    }

    #[test]
    fn unit_ball_at_the_origin_matches_the_closed_form() {
        for (p, n, alpha) in [(2u32, 1usize, 1.0), (3, 2, 0.5)] {
            let pr = KernelParams::new(p, n as u32, alpha, 0.7).unwrap();
            let prob = CauchyProblem::new(pr, unit_ball(p, n), Source::Zero, 2.0).unwrap();
            for t in [0.01, 0.5, 2.0] {
                let u = solve_homogeneous(&prob, &pr, &PAdicPoint::zero(p, n), t).unwrap();
                assert!((u.re - radial_cdf(0, t, &pr).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_source_integrates_to_t() {
        let pr = params();
        let prob = CauchyProblem::new(pr, LocallyConstantFunction::zero(2, 1).unwrap(), Source::Constant(c(1.0)), 1.0).unwrap();
        for t in [0.1, 0.5, 1.0] {
            let r = solve_duhamel(&prob, &PAdicPoint::on_sphere(2, 1, 2), t, &QuadConfig::default()).unwrap();
            assert!((r.value.re - t).abs() < 1e-10, "{t}: {}", r.value.re);
        }
        let field = solve(&prob, &pr).unwrap();
        let rep = field.residual_check(&[PAdicPoint::zero(2, 1)], &[0.5], 1e-4).unwrap();
        assert!(rep.max_abs < 1e-6, "{}", rep.max_abs);
    }

    #[test]
    fn separable_source_matches_the_one_dimensional_oracle() {
        // f = (1 + τ) 1_{Z_p}; at x = 0 the inner integral is F_{t-τ}(0)
        let pr = params();
        let src = Source::Separable { time_poly: vec![1.0, 1.0], space: unit_ball(2, 1) };
        let prob = CauchyProblem::new(pr, LocallyConstantFunction::zero(2, 1).unwrap(), src, 1.0).unwrap();
        let t = 0.8;
        let got = solve_duhamel(&prob, &PAdicPoint::zero(2, 1), t, &QuadConfig::default()).unwrap();
        let oracle = crate::quad::adaptive_simpson(
            |tau| {
                let s = t - tau;
                let mass = if s <= 0.0 { 1.0 } else { radial_cdf(0, s, &pr)? };
                Ok(c((1.0 + tau) * mass))
            },
            0.0,
            t,
            &QuadConfig { tol: 1e-13, ..QuadConfig::default() },
        )
        .unwrap();
        assert!((got.value - oracle.value).norm() < 1e-10);
    }

    #[test]
    fn rejects_fast_growth() {
        let pr = KernelParams::new(2, 1, 0.5, 1.0).unwrap();
        let tail = RadialFunction::new(2, 1, 1, vec![], Tail::Zero, Tail::PowerLaw { coeff: c(1.0), sigma: 0.7 }, c(0.0)).unwrap();
        let phi = LocallyConstantFunction::new(2, 1, vec![], Some(tail), 0, 0.7, 1.0).unwrap();
        let err = CauchyProblem::new(pr, phi, Source::Zero, 1.0).unwrap_err();
        assert!(format!("{err}").contains("0 <= λ < α"));
    }

    #[test]
    fn residual_vanishes_for_a_ball_indicator() {
        let pr = params();
        let prob = CauchyProblem::new(pr, unit_ball(2, 1), Source::Zero, 1.0).unwrap();
        let field = solve(&prob, &pr).unwrap();
        let pts = [PAdicPoint::zero(2, 1), PAdicPoint::on_sphere(2, 1, -1), PAdicPoint::on_sphere(2, 1, 1), PAdicPoint::on_sphere(2, 1, 3)];
        let rep = field.residual_check(&pts, &[0.1, 0.5], 1e-4).unwrap();
        assert!(rep.max_abs < 1e-5, "{:?}", rep.max_abs);
        assert!(field.certificate().constant <= 1.0 + 1e-12);
    }

    #[test]
    fn exchanged_and_direct_fractional_derivatives_agree() {
        let pr = KernelParams::new(3, 1, 1.0, 0.5).unwrap();
        let prob = CauchyProblem::new(pr, unit_ball(3, 1), Source::Zero, 1.0).unwrap();
        let field = solve(&prob, &pr).unwrap();
        for gamma in [0.5, 1.0] {
            for m in [None, Some(0), Some(2)] {
                let x = m.map_or(PAdicPoint::zero(3, 1), |m| PAdicPoint::on_sphere(3, 1, m));
                let a = field.dgamma_homogeneous_exchanged(&x, 0.4, gamma).unwrap();
                let b = field.dgamma_homogeneous_direct(&x, 0.4, gamma).unwrap();
                assert!((a - b).norm() < 1e-7, "γ={gamma} {m:?}: {a} {b}");
            }
        }
        assert!(field.dgamma_homogeneous_exchanged(&PAdicPoint::zero(3, 1), 0.4, 1.5).is_err());
    }

    #[test]
    fn solution_map_is_linear() {
        let pr = params();
        let phi1 = unit_ball(2, 1);
        let phi2 = LocallyConstantFunction::ball_indicator(PAdicPoint::on_sphere(2, 1, 1), -1).unwrap();
        let (a, b) = (c(2.0), Complex64::new(-0.5, 1.0));
        let combo = LocallyConstantFunction::linear_combination(a, &phi1, b, &phi2).unwrap();
        let solve_at = |phi: LocallyConstantFunction, x: &PAdicPoint| {
            let prob = CauchyProblem::new(pr, phi, Source::Zero, 1.0).unwrap();
            solve_homogeneous(&prob, &pr, x, 0.3).unwrap()
        };
        for m in [-1, 0, 1, 3] {
            let x = PAdicPoint::on_sphere(2, 1, m);
            let lhs = solve_at(combo.clone(), &x);
            let rhs = a * solve_at(phi1.clone(), &x) + b * solve_at(phi2.clone(), &x);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn initial_values_are_approached_linearly() {
        let pr = params();
        let prob = CauchyProblem::new(pr, unit_ball(2, 1), Source::Zero, 1.0).unwrap();
        let pts: Vec<_> = core::iter::once(PAdicPoint::zero(2, 1)).chain((-3..=3).map(|m| PAdicPoint::on_sphere(2, 1, m))).collect();
        let sup = |t: f64| {
            pts.iter()
                .map(|x| (solve_homogeneous(&prob, &pr, x, t).unwrap() - prob.phi.evaluate(x).unwrap()).norm())
                .fold(0.0, f64::max)
        };
        let (e2, e3, e4) = (sup(1e-2), sup(1e-3), sup(1e-4));
        assert!(e4 < 1e-3);
        for r in [e2 / e3, e3 / e4] {
            assert!(r > 5.0 && r < 20.0, "{r}");
        }
    }
}
