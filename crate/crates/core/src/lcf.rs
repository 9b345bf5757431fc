//! Locally constant functions with controlled growth.
//!
//! A [`LocallyConstantFunction`] is a finite set of (ball, value) pieces, or a
//! dense grid of coset values, plus an optional radial tail used outside
//! the pieces. It carries an exponent of local constancy `l` (the function
//! is constant on every coset of `B_{-l}^n`) and a growth bound
//! `|φ(x)| <= C (1 + ||x||^λ)`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::num::{ball_volume, powi_p, sphere_volume, ComplexSum};
use crate::padic::{PAdicPoint, Radius};
use crate::radial::{RadialFunction, Tail};
use crate::window::FiniteWindow;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub ball: crate::padic::Ball,
    pub value: Complex64,
}

#[derive(Clone, Debug)]
enum Body {
    /// Balls; evaluation picks the smallest ball containing the point.
    Pieces(Vec<Piece>),
    /// One value per coset of `B_{-L}` inside `B_K`, in window order.
    Grid { window: FiniteWindow, values: Vec<Complex64> },
}

#[derive(Clone, Debug)]
pub struct LocallyConstantFunction {
    prime: u32,
    dim: usize,
    body: Body,
    tail: Option<RadialFunction>,
    loc_exp: i32,
    growth_exp: f64,
    growth_const: f64,
}

/// Result of a kernel convolution, split into its window and tail parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convolution {
    pub value: Complex64,
    pub window_part: Complex64,
    pub tail_part: Complex64,
    /// Estimate of the truncation error in the tail series.
    pub tail_error: f64,
}

impl LocallyConstantFunction {
    /// Pieces must be pairwise disjoint.
    pub fn new(
        prime: u32,
        dim: usize,
        pieces: Vec<Piece>,
        tail: Option<RadialFunction>,
        loc_exp: i32,
        growth_exp: f64,
        growth_const: f64,
    ) -> Result<Self> {
        for (i, a) in pieces.iter().enumerate() {
            for b in &pieces[i + 1..] {
                if a.ball.intersects(&b.ball) {
                    return Err(domain(format!(
                        "pieces overlap: balls of radius p^{} and p^{}",
                        a.ball.radius_exp, b.ball.radius_exp
                    )));
                }
            }
        }
        Self::build(prime, dim, Body::Pieces(pieces), tail, loc_exp, growth_exp, growth_const)
    }

    /// Like [`new`](Self::new) but allows nested balls; a point takes the
    /// value of the smallest ball containing it. Identical balls are rejected.
    pub fn layered(
        prime: u32,
        dim: usize,
        pieces: Vec<Piece>,
        tail: Option<RadialFunction>,
        loc_exp: i32,
        growth_exp: f64,
        growth_const: f64,
    ) -> Result<Self> {
        for (i, a) in pieces.iter().enumerate() {
            for b in &pieces[i + 1..] {
                if a.ball.radius_exp == b.ball.radius_exp && a.ball.intersects(&b.ball) {
                    return Err(domain("layered pieces contain the same ball twice"));
                }
            }
        }
        Self::build(prime, dim, Body::Pieces(pieces), tail, loc_exp, growth_exp, growth_const)
    }

    /// Materializes `value` on every coset of `window`, with `tail` outside.
    pub fn from_window<F>(
        window: FiniteWindow,
        mut value: F,
        tail: Option<RadialFunction>,
        growth_exp: f64,
        growth_const: f64,
    ) -> Result<Self>
    where
        F: FnMut(&PAdicPoint) -> Result<Complex64>,
    {
        let mut values = Vec::new();
        for rep in window.representatives()? {
            values.push(value(&rep)?);
        }
        let loc_exp = window.inner_exp();
        Self::build(
            window.prime(),
            window.dim(),
            Body::Grid { window, values },
            tail,
            loc_exp,
            growth_exp,
            growth_const,
        )
    }

    fn build(
        prime: u32,
        dim: usize,
        body: Body,
        tail: Option<RadialFunction>,
        loc_exp: i32,
        growth_exp: f64,
        growth_const: f64,
    ) -> Result<Self> {
        crate::padic::check_prime(prime)?;
        if !(growth_exp >= 0.0) || !(growth_const >= 0.0) {
            return Err(domain("growth exponent and constant must be nonnegative"));
        }
        if let Body::Pieces(pieces) = &body {
            for piece in pieces {
                let c = &piece.ball.center;
                if c.prime() != prime || c.dim() != dim {
                    return Err(domain("piece centre lives in a different space"));
                }
                if piece.ball.radius_exp < -loc_exp {
                    return Err(domain(format!(
                        "ball of radius p^{} is finer than the local constancy exponent {}",
                        piece.ball.radius_exp, loc_exp
                    )));
                }
            }
        }
        if let Some(t) = &tail {
            if t.prime() != prime || t.dim() as usize != dim {
                return Err(domain("tail lives in a different space"));
            }
        }
        let f = LocallyConstantFunction {
            prime,
            dim,
            body,
            tail,
            loc_exp,
            growth_exp,
            growth_const,
        };
        f.check_tail_near_origin()?;
        f.check_growth()?;
        Ok(f)
    }

    fn check_tail_near_origin(&self) -> Result<()> {
        let tail = match &self.tail {
            Some(t) => t,
            None => return Ok(()),
        };
        let origin = PAdicPoint::zero(self.prime, self.dim);
        if self.piece_value(&origin).is_some() {
            return Ok(());
        }
        let v0 = tail.value_at_zero();
        for m in (-self.loc_exp - 24)..=-self.loc_exp {
            if tail.sphere_value(m) != v0 {
                return Err(domain(format!(
                    "tail is not constant on B_{} around the origin",
                    -self.loc_exp
                )));
            }
        }
        Ok(())
    }

    fn bound(&self, r: Option<i32>) -> f64 {
        let norm_pow = match r {
            None => 0.0,
            Some(m) => libm::pow(self.prime as f64, m as f64 * self.growth_exp),
        };
        self.growth_const * (1.0 + norm_pow) * (1.0 + 1e-12)
    }

    fn check_growth(&self) -> Result<()> {
        let fail = |what: &str| Err(domain(format!("growth bound C(1+||x||^λ) violated at {what}")));
        match &self.body {
            Body::Pieces(pieces) => {
                for piece in pieces {
                    if piece.value.norm() > self.bound(piece.ball.min_norm_exp()) {
                        return fail("a piece");
                    }
                }
            }
            Body::Grid { window, values } => {
                for (rep, v) in window.representatives()?.zip(values) {
                    if v.norm() > self.bound(rep.norm_exp()) {
                        return fail("a grid cell");
                    }
                }
            }
        }
        if let Some(t) = &self.tail {
            if t.value_at_zero().norm() > self.bound(None) {
                return fail("the origin");
            }
            // evaluator tails may be arbitrarily expensive; only tabulated
            // values and analytic tails are checked
            let (lo, hi) = t.table_range();
            let analytic = |tail: &Tail| !matches!(tail, Tail::Evaluator(_));
            let first = if analytic(t.tail_lo()) { lo.min(-20) } else { lo };
            let last = if analytic(t.tail_hi()) { hi.max(60) } else { hi };
            for m in first..=last {
                if t.sphere_value(m).norm() > self.bound(Some(m)) {
                    return fail("a tail sphere");
                }
            }
        }
        Ok(())
    }

    /// Indicator of the ball `||x - center|| <= p^k`, zero elsewhere.
    pub fn ball_indicator(center: PAdicPoint, k: i32) -> Result<Self> {
        let (p, n) = (center.prime(), center.dim());
        let zero = RadialFunction::new(
            p,
            n as u32,
            0,
            Vec::new(),
            Tail::Zero,
            Tail::Zero,
            Complex64::new(0.0, 0.0),
        )?;
        let piece = Piece {
            ball: crate::padic::Ball::new(center, k),
            value: Complex64::new(1.0, 0.0),
        };
        Self::new(p, n, alloc::vec![piece], Some(zero), -k, 0.0, 1.0)
    }

    pub fn constant(prime: u32, dim: usize, c: Complex64) -> Result<Self> {
        let tail = RadialFunction::constant(prime, dim as u32, c)?;
        Self::new(prime, dim, Vec::new(), Some(tail), 0, 0.0, c.norm())
    }

    pub fn zero(prime: u32, dim: usize) -> Result<Self> {
        Self::constant(prime, dim, Complex64::new(0.0, 0.0))
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn loc_exp(&self) -> i32 {
        self.loc_exp
    }

    pub fn growth_exp(&self) -> f64 {
        self.growth_exp
    }

    pub fn growth_const(&self) -> f64 {
        self.growth_const
    }

    pub fn tail(&self) -> Option<&RadialFunction> {
        self.tail.as_ref()
    }

    /// The pieces; a grid body is expanded into one ball per coset.
    pub fn pieces(&self) -> Vec<Piece> {
        match &self.body {
            Body::Pieces(p) => p.clone(),
            Body::Grid { window, values } => window
                .representatives()
                .map(|reps| {
                    reps.zip(values)
                        .map(|(rep, v)| Piece {
                            ball: crate::padic::Ball::new(rep, -window.inner_exp()),
                            value: *v,
                        })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    /// Smallest `K` with every piece inside `B_K`; `None` without pieces.
    pub fn support_exp(&self) -> Option<i32> {
        match &self.body {
            Body::Pieces(p) => p.iter().map(|piece| piece.ball.max_norm_exp()).max(),
            Body::Grid { window, .. } => Some(window.outer_exp()),
        }
    }

    /// True when nothing is nonzero outside the pieces.
    pub fn has_zero_tail(&self) -> bool {
        match &self.tail {
            None => true,
            Some(t) => matches!(t.tail_hi(), Tail::Zero) && {
                let (lo, hi) = t.table_range();
                (lo..=hi).all(|m| t.sphere_value(m) == Complex64::new(0.0, 0.0))
                    && matches!(t.tail_lo(), Tail::Zero)
                    && t.value_at_zero() == Complex64::new(0.0, 0.0)
            },
        }
    }

    fn piece_value(&self, x: &PAdicPoint) -> Option<Complex64> {
        match &self.body {
            Body::Pieces(pieces) => pieces
                .iter()
                .filter(|p| p.ball.contains(x))
                .min_by_key(|p| p.ball.radius_exp)
                .map(|p| p.value),
            Body::Grid { window, values } => grid_index(window, x).map(|i| values[i]),
        }
    }

    pub fn evaluate(&self, x: &PAdicPoint) -> Result<Complex64> {
        if let Some(v) = self.piece_value(x) {
            return Ok(v);
        }
        match &self.tail {
            Some(t) => Ok(t.evaluate(x)),
            None => Err(domain("point lies outside every piece and there is no tail")),
        }
    }

    /// Window with `B_K` covering the pieces (and `x`, if given) at the
    /// resolution of local constancy.
    pub fn default_window(&self, x: Option<&PAdicPoint>) -> Result<FiniteWindow> {
        let l = self.loc_exp;
        let mut k = self.support_exp().unwrap_or(-l).max(-l);
        if let Some(m) = x.and_then(PAdicPoint::norm_exp) {
            k = k.max(m);
        }
        FiniteWindow::new(self.prime, self.dim, k, l)
    }

    /// `∫_{B_K} φ` over the window's ball.
    pub fn window_integral(&self, window: &FiniteWindow) -> Result<Complex64> {
        let mut acc = ComplexSum::new();
        for rep in window.representatives()? {
            acc += self.evaluate(&rep)?;
        }
        Ok(acc.value() * window.cell_measure())
    }

    fn check_window(&self, window: &FiniteWindow) -> Result<()> {
        if window.prime() != self.prime || window.dim() != self.dim {
            return Err(domain("window lives in a different space"));
        }
        if window.inner_exp() < self.loc_exp {
            return Err(domain("window is coarser than the exponent of local constancy"));
        }
        if let Some(k) = self.support_exp() {
            if k > window.outer_exp() {
                return Err(domain("pieces extend beyond the window"));
            }
        }
        Ok(())
    }

    /// `∫ g(x - ξ) φ(ξ) dξ` for a radial kernel `g`.
    ///
    /// Inside `B_K` every coset of `B_{-L}` is summed; on the coset of `x`
    /// the kernel is replaced by its ball integral. Outside `B_K` the
    /// function equals its radial tail and the contribution follows from the
    /// ultrametric structure.
    pub fn convolve_window(&self, g: &RadialFunction, x: &PAdicPoint, window: &FiniteWindow) -> Result<Convolution> {
        self.check_window(window)?;
        if g.prime() != self.prime || g.dim() as usize != self.dim {
            return Err(domain("kernel lives in a different space"));
        }
        let n = self.dim as f64;
        if !self.has_zero_tail() {
            match g.decay() {
                Some(sigma) if self.growth_exp < -sigma - n => {}
                Some(sigma) => {
                    return Err(domain(format!(
                        "growth exponent {} is not below the kernel decay order {} (requires 0 <= λ < α)",
                        self.growth_exp,
                        -sigma - n
                    )))
                }
                None => return Err(domain("kernel has no declared decay; cannot pair with a growing tail")),
            }
        }
        let (k_out, l_in) = (window.outer_exp(), window.inner_exp());
        let (p, nn) = (self.prime, self.dim as u32);
        let window_part = match x.norm_exp() {
            Some(m) if m > k_out => {
                // ||x - ξ|| = ||x|| on all of B_K
                g.sphere_value(m) * self.window_integral(window)?
            }
            _ => {
                let x_rep = window.representative_of(x);
                let cell = window.cell_measure();
                let near = g.ball_integral(-l_in)?;
                let mut acc = ComplexSum::new();
                for rep in window.representatives()? {
                    let v = self.evaluate(&rep)?;
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    if rep == x_rep {
                        acc += v * near;
                    } else {
                        acc += v * g.evaluate(&x.sub(&rep)) * cell;
                    }
                }
                acc.value()
            }
        };
        let (tail_part, tail_error) = match &self.tail {
            Some(t) if !self.has_zero_tail() => {
                let eps = g.series().eps;
                match x.norm_exp() {
                    Some(m) if m > k_out => {
                        let mut acc = ComplexSum::new();
                        for k in (k_out + 1)..m {
                            acc += t.sphere_value(k) * sphere_volume(p, nn, k);
                        }
                        let gm = g.sphere_value(m);
                        let inner = gm * acc.value();
                        let on_sphere = t.sphere_value(m)
                            * (g.ball_integral(m - 1)? + gm * (sphere_volume(p, nn, m) - ball_volume(p, nn, m - 1)));
                        let outer = t.weighted_mass_above(m, |k| g.sphere_value(k))?;
                        let total = inner + on_sphere + outer;
                        (total, eps * (inner.norm() + on_sphere.norm() + outer.norm()))
                    }
                    _ => {
                        let outer = t.weighted_mass_above(k_out, |k| g.sphere_value(k))?;
                        (outer, eps * outer.norm())
                    }
                }
            }
            _ => (Complex64::new(0.0, 0.0), 0.0),
        };
        let _ = n;
        Ok(Convolution {
            value: window_part + tail_part,
            window_part,
            tail_part,
            tail_error,
        })
    }

    /// `a φ + b ψ` materialized on a window covering both.
    pub fn linear_combination(a: Complex64, f: &Self, b: Complex64, g: &Self) -> Result<Self> {
        if f.prime != g.prime || f.dim != g.dim {
            return Err(domain("functions live on different spaces"));
        }
        let l = f.loc_exp.max(g.loc_exp);
        let k = f
            .support_exp()
            .unwrap_or(-l)
            .max(g.support_exp().unwrap_or(-l))
            .max(-l);
        let window = FiniteWindow::new(f.prime, f.dim, k, l)?;
        let zero = RadialFunction::new(f.prime, f.dim as u32, 0, Vec::new(), Tail::Zero, Tail::Zero, Complex64::new(0.0, 0.0))?;
        let tail = match (&f.tail, &g.tail) {
            (None, None) => None,
            (ft, gt) => {
                let ft = ft.clone().unwrap_or_else(|| zero.clone());
                let gt = gt.clone().unwrap_or_else(|| zero.clone());
                Some(ft.combine(a, &gt, b)?)
            }
        };
        let growth_exp = f.growth_exp.max(g.growth_exp);
        let growth_const = a.norm() * f.growth_const + b.norm() * g.growth_const;
        Self::from_window(
            window,
            |x| Ok(a * f.evaluate(x)? + b * g.evaluate(x)?),
            tail,
            growth_exp,
            growth_const,
        )
    }
}

/// Index of the coset of `x` in a window, or `None` outside `B_K`.
fn grid_index(window: &FiniteWindow, x: &PAdicPoint) -> Option<usize> {
    let k = window.outer_exp();
    if let Some(m) = x.norm_exp() {
        if m > k {
            return None;
        }
    }
    let p = window.prime() as usize;
    let per = window.digits_per_coord() as i32;
    let mut idx = 0usize;
    for c in x.coords() {
        for j in 0..per {
            idx = idx * p + c.digit_at(-k + j) as usize;
        }
    }
    Some(idx)
}

/// `||x||` as `p^m` in binary64, with the origin mapped to 0.
pub fn radius_value(p: u32, r: Radius) -> f64 {
    match r {
        Radius::Origin => 0.0,
        Radius::Sphere(m) => powi_p(p, m),
    }
}
