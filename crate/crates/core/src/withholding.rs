//! The stochastic withholding engine.
//!
//! Given the items relevant to a question and the source's persuasion level,
//! draw a disclosure fraction `x ~ Beta(alpha, beta)` for the persona's
//! effective level and return the first `round(x * |relevant|)` items.
//!
//! Sampling uses only the [`SimRng`] stream and `libm`, so draws are
//! reproducible bit-for-bit across platforms:
//!
//! * standard normal: Marsaglia polar method, first variate of each pair
//! * Gamma(a), a >= 1: Marsaglia–Tsang squeeze/rejection
//! * Gamma(a), a < 1: Gamma(a + 1) * U^(1/a)
//! * Beta(a, b): X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b)

use crate::domain::{InfoItem, PersuasionLevel};
use crate::persona::{BetaParams, PersuasionProfile};
use crate::rng::SimRng;

fn standard_normal(rng: &mut SimRng) -> f64 {
    loop {
        let u = 2.0 * rng.uniform() - 1.0;
        let v = 2.0 * rng.uniform() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * libm::sqrt(-2.0 * libm::log(s) / s);
        }
    }
}

pub fn sample_gamma(shape: f64, rng: &mut SimRng) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let boosted = sample_gamma(shape + 1.0, rng);
        return boosted * libm::pow(rng.uniform(), 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / libm::sqrt(9.0 * d);
    loop {
        let x = standard_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if libm::log(u) < 0.5 * x2 + d * (1.0 - v + libm::log(v)) {
            return d * v;
        }
    }
}

pub fn sample_beta(params: BetaParams, rng: &mut SimRng) -> f64 {
    let x = sample_gamma(params.alpha, rng);
    let y = sample_gamma(params.beta, rng);
    let sum = x + y;
    if sum > 0.0 {
        (x / sum).clamp(0.0, 1.0)
    } else {
        params.mean()
    }
}

/// `round(fraction * available)` with halves rounded away from zero, clamped.
pub fn disclosure_count(fraction: f64, available: usize) -> usize {
    let n = (fraction * available as f64).round();
    (n.max(0.0) as usize).min(available)
}

/// Result of one withholding decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Disclosure {
    pub effective_level: PersuasionLevel,
    pub fraction: Option<f64>,
    pub items: Vec<InfoItem>,
}

/// Selects which relevant items the source gives up this turn.
///
/// An empty `relevant` list consumes no randomness.
pub fn items_to_return(
    relevant: &[InfoItem],
    level: PersuasionLevel,
    profile: &PersuasionProfile,
    rng: &mut SimRng,
) -> Disclosure {
    let effective_level = profile.effective_level(level);
    if relevant.is_empty() {
        return Disclosure {
            effective_level,
            fraction: None,
            items: Vec::new(),
        };
    }
    let fraction = sample_beta(profile.params_for(effective_level), rng);
    let n = disclosure_count(fraction, relevant.len());
    Disclosure {
        effective_level,
        fraction: Some(fraction),
        items: relevant[..n].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use statrs::distribution::{Beta, ContinuousCDF};

    use super::*;
    use crate::domain::PersonaKind;
    use crate::persona::PersonaCatalog;

    fn items(n: u32) -> Vec<InfoItem> {
        (1..=n)
            .map(|id| InfoItem {
                id,
                text: format!("item {id}"),
            })
            .collect()
    }

    #[test]
    fn empty_relevant_consumes_nothing() {
        let catalog = PersonaCatalog::bundled();
        let mut rng = SimRng::new(1, "w");
        let out = items_to_return(
            &[],
            PersuasionLevel::new(4).unwrap(),
            catalog.profile(PersonaKind::Anxious),
            &mut rng,
        );
        assert!(out.items.is_empty());
        assert_eq!(out.fraction, None);
        assert_eq!(rng.position(), 0);
    }

    #[test]
    fn returns_prefix_in_scenario_order() {
        let catalog = PersonaCatalog::bundled();
        let relevant = items(6);
        let mut rng = SimRng::new(9, "w");
        for _ in 0..200 {
            let out = items_to_return(
                &relevant,
                PersuasionLevel::new(3).unwrap(),
                catalog.profile(PersonaKind::Clueless),
                &mut rng,
            );
            let f = out.fraction.unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert_eq!(out.items.len(), disclosure_count(f, 6));
            assert_eq!(out.items[..], relevant[..out.items.len()]);
        }
    }

    #[test]
    fn count_rounds_half_away_from_zero() {
        assert_eq!(disclosure_count(0.25, 2), 1);
        assert_eq!(disclosure_count(0.24, 2), 0);
        assert_eq!(disclosure_count(0.75, 2), 2);
        assert_eq!(disclosure_count(0.0, 5), 0);
        assert_eq!(disclosure_count(1.0, 5), 5);
        assert_eq!(disclosure_count(0.5, 0), 0);
    }

    // Oracle: closed-form Beta mean 5/6 scaled by |relevant| = 6.
    #[test]
    fn beta_5_1_mean_count_matches_closed_form() {
        let profile = PersuasionProfile {
            persona: PersonaKind::Anxious,
            cue_description: String::new(),
            cue_examples: vec!["x".into()],
            beta_params: [BetaParams::new(5.0, 1.0); 5],
            level_shift: 0,
        };
        let relevant = items(6);
        let mut rng = SimRng::new(2024, "beta51");
        let total: usize = (0..10_000)
            .map(|_| {
                items_to_return(&relevant, PersuasionLevel::new(3).unwrap(), &profile, &mut rng)
                    .items
                    .len()
            })
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 6.0 * 5.0 / 6.0).abs() <= 0.15, "mean count {mean}");
    }

    #[test]
    fn sampler_moments_match_closed_form() {
        for &(a, b) in &[(1.0, 5.0), (3.0, 3.0), (5.0, 1.0), (0.5, 0.5), (2.2, 3.8), (0.3, 2.0)] {
            let params = BetaParams::new(a, b);
            let mut rng = SimRng::new(11, &format!("moments/{a}/{b}"));
            let n = 40_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_beta(params, &mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (params.variance() / n as f64).sqrt();
            assert!((mean - params.mean()).abs() < 5.0 * se, "Beta({a},{b}) mean {mean}");
            assert!((var - params.variance()).abs() < 0.1 * params.variance(), "Beta({a},{b}) var {var}");
        }
    }

    // Kolmogorov–Smirnov against an independent CDF implementation.
    #[test]
    fn sampler_passes_ks_against_reference_cdf() {
        for &(a, b) in &[(1.0, 5.0), (2.0, 4.0), (4.0, 2.0), (0.7, 1.3)] {
            let reference = Beta::new(a, b).unwrap();
            let mut rng = SimRng::new(5, &format!("ks/{a}/{b}"));
            let n = 5_000;
            let mut draws: Vec<f64> = (0..n).map(|_| sample_beta(BetaParams::new(a, b), &mut rng)).collect();
            draws.sort_by(f64::total_cmp);
            let d = draws
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let cdf = reference.cdf(x);
                    (cdf - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - cdf).abs())
                })
                .fold(0.0, f64::max);
            // 1% critical value ~ 1.63 / sqrt(n)
            assert!(d < 1.63 / (n as f64).sqrt(), "Beta({a},{b}) KS D = {d}");
        }
    }

    #[test]
    fn gamma_mean_matches_shape() {
        for &shape in &[0.4, 1.0, 2.5, 9.0] {
            let mut rng = SimRng::new(3, &format!("gamma/{shape}"));
            let n = 40_000;
            let mean = (0..n).map(|_| sample_gamma(shape, &mut rng)).sum::<f64>() / n as f64;
            let se = (shape / n as f64).sqrt();
            assert!((mean - shape).abs() < 5.0 * se, "Gamma({shape}) mean {mean}");
        }
    }
}
