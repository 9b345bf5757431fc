//! Sampling the Markov process whose transition density is `Z`.
//!
//! An increment over time `t` has radius `p^m` with probability
//! `Z(p^m, t) vol(S_m)` and is uniform on its sphere. States keep the
//! digits with valuations in a fixed window.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::kernel::{radial_ccdf, radial_cdf, z_tent, KernelParams};
use crate::num::sphere_volume;
use crate::padic::{PAdicPoint, PAdicScalar, Radius};

/// Digits with valuation `lo ..= hi` are kept; so `||x|| <= p^{-lo}` and
/// resolution `p^{-hi}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateWindow {
    pub lo: i32,
    pub hi: i32,
}

impl Default for StateWindow {
    fn default() -> Self {
        StateWindow { lo: -32, hi: 32 }
    }
}

impl StateWindow {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(domain("state window is empty"));
        }
        Ok(StateWindow { lo, hi })
    }

    /// Radius exponents an increment may take.
    pub fn radius_range(&self) -> (i32, i32) {
        (-self.hi, -self.lo)
    }

    pub fn truncate(&self, x: &PAdicPoint) -> PAdicPoint {
        let coords = x.coords().iter().map(|c| c.truncate_to(self.hi + 1)).collect();
        PAdicPoint::new(coords).expect("same space")
    }
}

/// Default bound on the probability of an increment outside the window.
pub const DEFAULT_CLIP_BOUND: f64 = 1e-9;

/// Exact law of the radius exponent of an increment over time `t`,
/// restricted to a window of spheres.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementLaw {
    pub params: KernelParams,
    pub t: f64,
    pub m_lo: i32,
    pub m_hi: i32,
    /// `pmf[i]` is the mass of the sphere `m_lo + i`.
    pub pmf: Vec<f64>,
    /// Mass outside `[m_lo, m_hi]`, including the origin.
    pub clipped_mass: f64,
    cumulative: Vec<f64>,
}

impl IncrementLaw {
    pub fn new(params: &KernelParams, t: f64, window: &StateWindow, clip_bound: f64) -> Result<Self> {
        let (m_lo, m_hi) = window.radius_range();
        let mut pmf = Vec::with_capacity((m_hi - m_lo + 1) as usize);
        for m in m_lo..=m_hi {
            pmf.push(z_tent(Radius::Sphere(m), t, params)? * sphere_volume(params.prime, params.dim, m));
        }
        let clipped_mass = radial_cdf(m_lo - 1, t, params)? + radial_ccdf(m_hi, t, params)?;
        if !(clipped_mass <= clip_bound) {
            return Err(Error::WindowTooSmall { clipped: clipped_mass, bound: clip_bound });
        }
        let mut acc = 0.0;
        let cumulative = pmf
            .iter()
            .map(|q| {
                acc += q;
                acc
            })
            .collect();
        Ok(IncrementLaw { params: *params, t, m_lo, m_hi, pmf, clipped_mass, cumulative })
    }

    pub fn prob(&self, m: i32) -> f64 {
        if m < self.m_lo || m > self.m_hi {
            0.0
        } else {
            self.pmf[(m - self.m_lo) as usize]
        }
    }

    pub fn window_mass(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Inverse CDF on the window; `u` in `[0, 1)` of the window mass.
    pub fn quantile(&self, u: f64) -> i32 {
        let target = u * self.window_mass();
        let idx = self.cumulative.partition_point(|&c| c <= target);
        self.m_lo + idx.min(self.pmf.len() - 1) as i32
    }
}

/// Stream `path` of the generator seeded with `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// A uniform point on the sphere `||y|| = p^m`, digits down to the window
/// resolution. In dimension one the leading digit is drawn from `1..p`;
/// otherwise every coordinate is uniform on `B_m` and the draw is rejected
/// unless some leading digit is nonzero.
pub fn sample_on_sphere<R: Rng>(p: u32, n: usize, m: i32, window: &StateWindow, rng: &mut R) -> PAdicPoint {
    let len = (window.hi + m + 1).max(1) as usize;
    loop {
        let coords: Vec<PAdicScalar> = (0..n)
            .map(|_| {
                let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..p)).collect();
                if n == 1 {
                    digits[0] = rng.gen_range(1..p);
                }
                PAdicScalar::from_digits(p, -m, digits).expect("digits below p")
            })
            .collect();
        if coords.iter().any(|c| c.order() == Some(-m)) {
            return PAdicPoint::new(coords).expect("same prime");
        }
    }
}

/// One increment: `(y, m, clipped)`. With probability `clipped_mass` the
/// first draw falls outside the window; it is then redrawn from the window
/// (the resample policy) and flagged.
pub fn sample_increment<R: Rng>(law: &IncrementLaw, window: &StateWindow, rng: &mut R) -> (PAdicPoint, i32, bool) {
    let clipped = rng.gen::<f64>() < law.clipped_mass;
    let m = law.quantile(rng.gen::<f64>());
    let y = sample_on_sphere(law.params.prime, law.params.dim as usize, m, window, rng);
    (y, m, clipped)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub params: KernelParams,
    pub dt: f64,
    pub steps: usize,
    pub paths: u64,
    pub seed: u64,
    pub window: StateWindow,
    pub clip_bound: f64,
    pub start: Option<PAdicPoint>,
}

impl SimConfig {
    pub fn new(params: KernelParams, dt: f64, steps: usize, paths: u64, seed: u64) -> Self {
        SimConfig {
            params,
            dt,
            steps,
            paths,
            seed,
            window: StateWindow::default(),
            clip_bound: DEFAULT_CLIP_BOUND,
            start: None,
        }
    }

    pub fn law(&self) -> Result<IncrementLaw> {
        IncrementLaw::new(&self.params, self.dt, &self.window, self.clip_bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub path: u64,
    pub seed: u64,
    /// `times[0] = 0` and `states[0]` is the start.
    pub times: Vec<f64>,
    pub states: Vec<PAdicPoint>,
    /// Radius exponent of the increment leading to each state after the first.
    pub increments: Vec<i32>,
    pub clipped: Vec<bool>,
}

/// Path `path` of the run; independent of every other path.
pub fn simulate_path(cfg: &SimConfig, law: &IncrementLaw, path: u64) -> Trajectory {
    let (p, n) = (cfg.params.prime, cfg.params.dim as usize);
    let mut rng = path_rng(cfg.seed, path);
    let mut x = cfg.window.truncate(&cfg.start.clone().unwrap_or_else(|| PAdicPoint::zero(p, n)));
    let mut tr = Trajectory {
        path,
        seed: cfg.seed,
        times: vec![0.0],
        states: vec![x.clone()],
        increments: Vec::with_capacity(cfg.steps),
        clipped: Vec::with_capacity(cfg.steps),
    };
    for k in 1..=cfg.steps {
        let (y, m, clipped) = sample_increment(law, &cfg.window, &mut rng);
        x = cfg.window.truncate(&x.add(&y));
        tr.times.push(k as f64 * cfg.dt);
        tr.states.push(x.clone());
        tr.increments.push(m);
        tr.clipped.push(clipped);
    }
    tr
}

/// All paths, in order.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    let law = cfg.law()?;
    Ok((0..cfg.paths).map(|i| simulate_path(cfg, &law, i)).collect())
}

/// Counts per radius exponent on `[lo, hi]`, plus everything else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusHistogram {
    pub lo: i32,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl RadiusHistogram {
    pub fn new(lo: i32, hi: i32) -> Self {
        RadiusHistogram { lo, counts: vec![0; (hi - lo + 1).max(0) as usize], outside: 0 }
    }

    pub fn add(&mut self, r: Radius) {
        match r {
            Radius::Sphere(m) if m >= self.lo && ((m - self.lo) as usize) < self.counts.len() => {
                self.counts[(m - self.lo) as usize] += 1
            }
            _ => self.outside += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn merge(&mut self, other: &RadiusHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub bins: usize,
}

/// Pearson's statistic for observed counts against probabilities; adjacent
/// bins are pooled from both ends until every expected count reaches
/// `min_expected`. Probabilities are renormalized over the given bins.
pub fn chi_square(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquare> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(domain("observed and expected bins differ"));
    }
    let total: u64 = observed.iter().sum();
    let mass: f64 = probs.iter().sum();
    if total == 0 || !(mass > 0.0) {
        return Err(domain("empty histogram"));
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &q) in observed.iter().zip(probs) {
        o += c as f64;
        e += q / mass * total as f64;
        if e >= min_expected {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 2 {
        return Err(domain(format!("only {} bin(s) after pooling", bins.len())));
    }
    let statistic = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquare { statistic, dof: bins.len() - 1, bins: bins.len() })
}

/// Pearson's independence statistic for a contingency table (rows are
/// conditions); columns with tiny totals are pooled first.
pub fn contingency_chi_square(table: &[Vec<u64>], min_expected: f64) -> Result<ChiSquare> {
    let rows = table.len();
    if rows < 2 || table.iter().any(|r| r.len() != table[0].len()) {
        return Err(domain("contingency table needs two or more equal rows"));
    }
    let total: u64 = table.iter().flatten().sum();
    let row_tot: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let min_row = row_tot.iter().cloned().fold(f64::INFINITY, f64::min);
    // pool columns until the smallest row expects `min_expected` per cell
    let mut cols: Vec<Vec<u64>> = Vec::new();
    let mut acc = vec![0u64; rows];
    for j in 0..table[0].len() {
        for (a, row) in acc.iter_mut().zip(table) {
            *a += row[j];
        }
        let col_tot: u64 = acc.iter().sum();
        if min_row * col_tot as f64 / total as f64 >= min_expected {
            cols.push(core::mem::replace(&mut acc, vec![0; rows]));
        }
    }
    if acc.iter().any(|&c| c > 0) {
        match cols.last_mut() {
            Some(last) => last.iter_mut().zip(&acc).for_each(|(a, b)| *a += b),
            None => cols.push(acc),
        }
    }
    if cols.len() < 2 {
        return Err(domain("fewer than two columns after pooling"));
    }
    let mut stat = 0.0;
    for col in &cols {
        let ct: u64 = col.iter().sum();
        for i in 0..rows {
            let e = row_tot[i] * ct as f64 / total as f64;
            let d = col[i] as f64 - e;
            stat += d * d / e;
        }
    }
    Ok(ChiSquare { statistic: stat, dof: (rows - 1) * (cols.len() - 1), bins: cols.len() })
}

/// `½ sum |f_i - q_i|` between empirical frequencies and probabilities.
pub fn total_variation(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return 1.0;
    }
    0.5 * observed
        .iter()
        .zip(probs)
        .map(|(&c, &q)| (c as f64 / total as f64 - q).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> KernelParams {
        KernelParams::new(2, 1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn law_accounts_for_all_mass() {
        for (p, n, alpha) in [(2u32, 1u32, 1.0), (3, 2, 0.5), (5, 3, 2.0)] {
            let pr = KernelParams::new(p, n, alpha, 1.0).unwrap();
            // heavy tails when α is small need room above p^32
            let w = if alpha < 1.0 { StateWindow::new(-48, 32).unwrap() } else { StateWindow::default() };
            let law = IncrementLaw::new(&pr, 0.7, &w, 1e-9).unwrap();
            assert!((law.window_mass() + law.clipped_mass - 1.0).abs() < 1e-12);
            assert!(law.pmf.iter().all(|&q| q >= 0.0));
            for m in [-3, 0, 4] {
                let ratio = law.prob(m) / law.prob(m - 1);
                let zr = z_tent(Radius::Sphere(m), 0.7, &pr).unwrap() / z_tent(Radius::Sphere(m - 1), 0.7, &pr).unwrap();
                assert!((ratio / (zr * (p as f64).powi(n as i32)) - 1.0).abs() < 1e-12);
            }
        }
        let err = IncrementLaw::new(&params(), 1.0, &StateWindow::new(-3, 3).unwrap(), 1e-9).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall { .. }));
    }

    #[test]
    fn median_radius_tracks_the_scale() {
        let pr = KernelParams::new(3, 1, 1.0, 1.0).unwrap();
        for t in [0.01, 1.0, 100.0] {
            let l = libm::ceil(libm::log(t) / libm::log(3.0)) as i32;
            let f = radial_cdf(l, t, &pr).unwrap();
            assert!(f > 0.25 && f < 0.9, "{t}: {f}");
        }
    }

    #[test]
    fn sphere_draws_land_on_the_sphere() {
        let w = StateWindow::default();
        let mut rng = path_rng(7, 0);
        for (p, n) in [(2u32, 1usize), (3, 2), (5, 3)] {
            for m in [-5, 0, 7] {
                for _ in 0..50 {
                    let y = sample_on_sphere(p, n, m, &w, &mut rng);
                    assert_eq!(y.norm_exp(), Some(m));
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let mut cfg = SimConfig::new(params(), 0.5, 3, 4, 42);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].states, a[1].states);
        cfg.steps = 0;
        let z = simulate(&cfg).unwrap();
        assert!(z.iter().all(|t| t.states.len() == 1 && t.states[0].is_zero()));
    }

    #[test]
    fn increment_radii_follow_the_law() {
        let pr = params();
        let w = StateWindow::default();
        let law = IncrementLaw::new(&pr, 1.0, &w, 1e-9).unwrap();
        let mut rng = path_rng(1, 0);
        let mut counts = vec![0u64; law.pmf.len()];
        for _ in 0..20_000 {
            let (_, m, _) = sample_increment(&law, &w, &mut rng);
            counts[(m - law.m_lo) as usize] += 1;
        }
        let cs = chi_square(&counts, &law.pmf, 5.0).unwrap();
        let bound = cs.dof as f64 + 5.0 * libm::sqrt(2.0 * cs.dof as f64);
        assert!(cs.statistic < bound, "{cs:?}");
        assert!(total_variation(&counts, &law.pmf) < 0.05);
    }

    #[test]
    fn pooling_and_contingency() {
        let cs = chi_square(&[10, 10, 0, 1], &[0.5, 0.45, 0.04, 0.01], 5.0).unwrap();
        assert_eq!(cs.bins, 2);
        let same = contingency_chi_square(&[vec![50, 30, 20], vec![100, 60, 40]], 5.0).unwrap();
        assert!(same.statistic.abs() < 1e-12);
        assert_eq!(same.dof, 2);
        assert!(chi_square(&[1], &[1.0], 5.0).is_err());
    }
}
