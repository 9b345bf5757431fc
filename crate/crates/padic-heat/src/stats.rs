//! Goodness-of-fit tests for the simulated increments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use padic_heat_core::diffusion::{
    chi_square, contingency_chi_square, path_rng, sample_increment, total_variation, ChiSquare,
    IncrementLaw, SimConfig, StateWindow,
};
use padic_heat_core::kernel::KernelParams;
use padic_heat_core::Result;

use crate::sim::simulate_parallel;

/// Minimum expected count per bin; sparser bins are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

/// Upper tail probability of the statistic under its chi-square law.
pub fn p_value(cs: &ChiSquare) -> f64 {
    if cs.dof == 0 {
        return 1.0;
    }
    ChiSquared::new(cs.dof as f64).map_or(f64::NAN, |d| d.sf(cs.statistic))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawTest {
    pub samples: usize,
    pub chi: ChiSquare,
    pub p_value: f64,
    pub total_variation: f64,
    pub clipped_mass: f64,
    /// Draws flagged by the resample policy.
    pub clipped_draws: usize,
}

/// Draws `samples` increments over `t` and compares their radii with the
/// exact sphere masses.
pub fn increment_law_test(params: &KernelParams, t: f64, window: &StateWindow, samples: usize, seed: u64) -> Result<LawTest> {
    let law = IncrementLaw::new(params, t, window, padic_heat_core::diffusion::DEFAULT_CLIP_BOUND)?;
    let mut rng = path_rng(seed, 0);
    let mut counts = vec![0u64; law.pmf.len()];
    let mut clipped_draws = 0;
    for _ in 0..samples {
        let (_, m, clipped) = sample_increment(&law, window, &mut rng);
        counts[(m - law.m_lo) as usize] += 1;
        clipped_draws += clipped as usize;
    }
    let probs: Vec<f64> = law.pmf.iter().map(|q| q / law.window_mass()).collect();
    let chi = chi_square(&counts, &probs, MIN_EXPECTED)?;
    Ok(LawTest {
        samples,
        p_value: p_value(&chi),
        total_variation: total_variation(&counts, &probs),
        chi,
        clipped_mass: law.clipped_mass,
        clipped_draws,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChapmanKolmogorovTest {
    pub samples: u64,
    /// Two steps of `dt` against one step of `2 dt`.
    pub contingency: ChiSquare,
    pub p_value: f64,
    /// Two steps of `dt` against the exact law at `2 dt`.
    pub exact: ChiSquare,
    pub exact_p_value: f64,
}

/// Compares the radius of `X_{2dt}` reached in two steps with one step of
/// length `2 dt`, by a two-sample contingency test and against the exact
/// sphere masses.
pub fn chapman_kolmogorov_test(params: &KernelParams, dt: f64, window: &StateWindow, samples: u64, seed: u64) -> Result<ChapmanKolmogorovTest> {
    let mut two = SimConfig::new(*params, dt, 2, samples, seed);
    two.window = *window;
    let mut one = SimConfig::new(*params, 2.0 * dt, 1, samples, seed ^ 0x9e37_79b9_7f4a_7c15);
    one.window = *window;
    let exact = one.law()?;
    let (lo, hi) = (exact.m_lo, exact.m_hi);
    let histogram = |cfg: &SimConfig| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; (hi - lo + 2) as usize];
        for tr in simulate_parallel(cfg)? {
            let slot = match tr.states.last().and_then(|x| x.norm_exp()) {
                Some(m) if (lo..=hi).contains(&m) => (m - lo) as usize,
                _ => counts.len() - 1,
            };
            counts[slot] += 1;
        }
        Ok(counts)
    };
    let (a, b) = (histogram(&two)?, histogram(&one)?);
    let contingency = contingency_chi_square(&[a.clone(), b], MIN_EXPECTED)?;
    let mut probs: Vec<f64> = exact.pmf.clone();
    probs.push(exact.clipped_mass);
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|q| *q /= total);
    let exact_chi = chi_square(&a, &probs, MIN_EXPECTED)?;
    Ok(ChapmanKolmogorovTest {
        samples,
        p_value: p_value(&contingency),
        contingency,
        exact_p_value: p_value(&exact_chi),
        exact: exact_chi,
    })
}
