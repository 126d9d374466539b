//! Exact finite-support divergence toolkit.
//!
//! Everything here is an exact weighted sum over a finite support, never a
//! Monte-Carlo estimate, which makes this module the numerical oracle for
//! the training code. It provides the mixture and complement densities, the
//! optimal discriminator responses, and three independent routes to the
//! game's value function:
//!
//! - [`value_from_definition`]: plug response tables into the game's loss
//!   expectations and sum.
//! - [`value_kl_form`]: the same quantity rewritten as KL divergences
//!   against the mixture plus log-ratio terms against the pointwise sum
//!   density, plus a constant in `K`.
//! - [`value_js_form`]: the same quantity rewritten with generalized
//!   Jensen-Shannon divergences.
//!
//! At optimal responses the three agree to ~1e-12 on floored random
//! instances; the `verify` module and the acceptance suite check this.
//!
//! Conventions: `0·ln(0/q) = 0`, and `p > 0, q = 0` yields an infinity
//! sentinel rather than an error.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DivergenceError {
    #[error("distributions have different support sizes: {0} vs {1}")]
    SupportMismatch(usize, usize),
    #[error("probabilities sum to {0}, expected 1 within 1e-12")]
    NotNormalized(f64),
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("weights must sum to 1, got {0}")]
    BadWeights(f64),
    #[error("expected {expected} weights for {expected} components, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("component index {0} out of range for {1} components")]
    ComponentIndex(usize, usize),
    #[error("complement distribution is undefined for a single component")]
    ComplementUndefined,
    #[error("operation requires uniform mixture weights")]
    NonUniformWeights,
    #[error("response table undefined at support point {0} with positive density")]
    UndefinedResponse(usize),
    #[error("expected {expected} response tables, got {got}")]
    TableCount { expected: usize, got: usize },
}

const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over an indexed finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, DivergenceError> {
        for (index, &value) in probabilities.iter().enumerate() {
            if value < 0.0 || value.is_nan() {
                return Err(DivergenceError::NegativeProbability { index, value });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DivergenceError::NotNormalized(sum));
        }
        Ok(DiscreteDistribution { probabilities })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn normalized(weights: &[f64]) -> Result<Self, DivergenceError> {
        for (index, &value) in weights.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(DivergenceError::NegativeProbability { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(DivergenceError::NotNormalized(sum));
        }
        DiscreteDistribution::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn support_size(&self) -> usize {
        self.probabilities.len()
    }
}

/// K component distributions on a shared support plus mixture weights.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    components: Vec<DiscreteDistribution>,
    weights: Vec<f64>,
}

impl MixtureModel {
    pub fn new(
        components: Vec<DiscreteDistribution>,
        weights: Vec<f64>,
    ) -> Result<Self, DivergenceError> {
        if components.is_empty() {
            return Err(DivergenceError::EmptyMixture);
        }
        let support = components[0].support_size();
        for c in &components {
            if c.support_size() != support {
                return Err(DivergenceError::SupportMismatch(support, c.support_size()));
            }
        }
        if weights.len() != components.len() {
            return Err(DivergenceError::WeightCount {
                expected: components.len(),
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if value < 0.0 || value.is_nan() {
                return Err(DivergenceError::NegativeProbability { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DivergenceError::BadWeights(sum));
        }
        Ok(MixtureModel {
            components,
            weights,
        })
    }

    /// Uniform weights 1/K, the default throughout the game.
    pub fn uniform(components: Vec<DiscreteDistribution>) -> Result<Self, DivergenceError> {
        let k = components.len();
        if k == 0 {
            return Err(DivergenceError::EmptyMixture);
        }
        MixtureModel::new(components, vec![1.0 / k as f64; k])
    }

    pub fn components(&self) -> &[DiscreteDistribution] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn support_size(&self) -> usize {
        self.components[0].support_size()
    }

    fn require_uniform(&self) -> Result<(), DivergenceError> {
        let k = self.component_count() as f64;
        if self
            .weights
            .iter()
            .any(|&w| (w - 1.0 / k).abs() > NORMALIZATION_TOL)
        {
            return Err(DivergenceError::NonUniformWeights);
        }
        Ok(())
    }
}

/// Pointwise weighted sum of the components.
pub fn mixture_pdf(m: &MixtureModel) -> DiscreteDistribution {
    let n = m.support_size();
    let mut probabilities = vec![0.0; n];
    for (component, &weight) in m.components.iter().zip(&m.weights) {
        for (acc, &p) in probabilities.iter_mut().zip(component.probabilities()) {
            *acc += weight * p;
        }
    }
    DiscreteDistribution { probabilities }
}

/// Equi-probable mixture of all components except `k` (0-based).
/// Defined only for uniform weights and K >= 2.
pub fn complement_pdf(m: &MixtureModel, k: usize) -> Result<DiscreteDistribution, DivergenceError> {
    let count = m.component_count();
    if count < 2 {
        return Err(DivergenceError::ComplementUndefined);
    }
    if k >= count {
        return Err(DivergenceError::ComponentIndex(k, count));
    }
    m.require_uniform()?;
    let n = m.support_size();
    let share = 1.0 / (count - 1) as f64;
    let mut probabilities = vec![0.0; n];
    for (j, component) in m.components.iter().enumerate() {
        if j == k {
            continue;
        }
        for (acc, &p) in probabilities.iter_mut().zip(component.probabilities()) {
            *acc += share * p;
        }
    }
    Ok(DiscreteDistribution { probabilities })
}

/// `Σ_x p(x)·ln(p(x)/q(x))` with `0·ln(0/q) = 0`; returns `+inf` when some
/// `p(x) > 0` has `q(x) = 0`.
pub fn kl_divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<f64, DivergenceError> {
    if p.support_size() != q.support_size() {
        return Err(DivergenceError::SupportMismatch(
            p.support_size(),
            q.support_size(),
        ));
    }
    let mut total = 0.0;
    for (&pv, &qv) in p.probabilities().iter().zip(q.probabilities()) {
        if pv == 0.0 {
            continue;
        }
        if qv == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += pv * (pv / qv).ln();
    }
    Ok(total)
}

/// π-generalized Jensen-Shannon divergence:
/// `Σ_k π_k · KL(p_k ‖ Σ_j π_j p_j)`. Bounded by the weight entropy
/// (ln K for uniform weights); zero iff all weighted components coincide.
pub fn generalized_js(m: &MixtureModel) -> f64 {
    let mix = mixture_pdf(m);
    let mut total = 0.0;
    for (component, &weight) in m.components.iter().zip(&m.weights) {
        if weight == 0.0 {
            continue;
        }
        // The mixture dominates each weighted component, so KL is finite.
        total += weight * kl_divergence(component, &mix).expect("shared support");
    }
    total
}

/// Classic two-distribution JS divergence via the average distribution.
pub fn js_divergence(
    a: &DiscreteDistribution,
    b: &DiscreteDistribution,
) -> Result<f64, DivergenceError> {
    let m = MixtureModel::uniform(vec![a.clone(), b.clone()])?;
    Ok(generalized_js(&m))
}

/// Optimal supplementary response `h_k*(x) = p_k(x) / (K·p_mix(x))` as a
/// table over the support. Points with zero mixture mass carry NaN: the
/// response is undefined there and no expectation ever weights them.
pub fn optimal_supplementary(m: &MixtureModel, k: usize) -> Result<Vec<f64>, DivergenceError> {
    let count = m.component_count();
    if k >= count {
        return Err(DivergenceError::ComponentIndex(k, count));
    }
    m.require_uniform()?;
    let mix = mixture_pdf(m);
    let kf = count as f64;
    Ok(m.components[k]
        .probabilities()
        .iter()
        .zip(mix.probabilities())
        .map(|(&pk, &pm)| if pm > 0.0 { pk / (kf * pm) } else { f64::NAN })
        .collect())
}

/// Optimal adversarial response `h*(x) = p_real(x) / (p_mix(x) + p_real(x))`
/// as a table over the support; NaN where both densities vanish.
pub fn optimal_adversarial(
    p_real: &DiscreteDistribution,
    p_mix: &DiscreteDistribution,
) -> Result<Vec<f64>, DivergenceError> {
    if p_real.support_size() != p_mix.support_size() {
        return Err(DivergenceError::SupportMismatch(
            p_real.support_size(),
            p_mix.support_size(),
        ));
    }
    Ok(p_real
        .probabilities()
        .iter()
        .zip(p_mix.probabilities())
        .map(|(&pr, &pm)| {
            let denom = pr + pm;
            if denom > 0.0 {
                pr / denom
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// `Σ_x d(x)·ln(t(x))` with zero-density points skipped. A table value of
/// 0 under positive density yields `-inf`; NaN there is a contract error.
pub fn expected_log(d: &DiscreteDistribution, table: &[f64]) -> Result<f64, DivergenceError> {
    let mut total = 0.0;
    for (i, (&dv, &tv)) in d.probabilities().iter().zip(table).enumerate() {
        if dv == 0.0 {
            continue;
        }
        if tv.is_nan() {
            return Err(DivergenceError::UndefinedResponse(i));
        }
        if tv <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += dv * tv.ln();
    }
    Ok(total)
}

fn one_minus(table: &[f64]) -> Vec<f64> {
    table.iter().map(|&t| 1.0 - t).collect()
}

/// Value of the game for arbitrary response tables, as the exact
/// expectation the closed forms reduce:
///
/// `V = E_real ln h + E_mix ln(1-h)
///      - Σ_k [ E_{p_k} ln h_k + E_{complement_k} ln(1-h_k) ]`
///
/// This is the brute-force route the closed forms are checked against.
/// Saturated responses under positive density produce an infinity sentinel.
pub fn value_from_definition(
    p_real: &DiscreteDistribution,
    m: &MixtureModel,
    h: &[f64],
    hks: &[Vec<f64>],
) -> Result<f64, DivergenceError> {
    let k = m.component_count();
    if hks.len() != k {
        return Err(DivergenceError::TableCount {
            expected: k,
            got: hks.len(),
        });
    }
    let n = m.support_size();
    if p_real.support_size() != n {
        return Err(DivergenceError::SupportMismatch(p_real.support_size(), n));
    }
    if h.len() != n {
        return Err(DivergenceError::SupportMismatch(h.len(), n));
    }
    let p_mix = mixture_pdf(m);

    let mut value = expected_log(p_real, h)? + expected_log(&p_mix, &one_minus(h))?;
    for (idx, table) in hks.iter().enumerate() {
        if table.len() != n {
            return Err(DivergenceError::SupportMismatch(table.len(), n));
        }
        let own = expected_log(&m.components()[idx], table)?;
        let complement = complement_pdf(m, idx)?;
        let other = expected_log(&complement, &one_minus(table))?;
        value -= own + other;
    }
    Ok(value)
}

/// `Σ_x p(x)·ln(p(x)/s(x))` against an unnormalized measure `s`; the same
/// zero conventions as [`kl_divergence`].
fn log_ratio_expectation(p: &DiscreteDistribution, s: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pv, &sv) in p.probabilities().iter().zip(s) {
        if pv == 0.0 {
            continue;
        }
        if sv == 0.0 {
            return f64::INFINITY;
        }
        total += pv * (pv / sv).ln();
    }
    total
}

/// Value at optimal responses in KL form:
///
/// `V = D(p_real ‖ p_mix + p_real) + D(p_mix ‖ p_mix + p_real)
///      - Σ_k KL(p_k ‖ p_mix) - Σ_k KL(complement_k ‖ p_mix)
///      - K·ln((K-1)/K²)`
///
/// where the first two `D` terms are log-ratio expectations against the
/// pointwise sum density (each equals KL-against-average minus ln 2).
/// Uniform weights and K >= 2 required.
pub fn value_kl_form(
    p_real: &DiscreteDistribution,
    m: &MixtureModel,
) -> Result<f64, DivergenceError> {
    let k = m.component_count();
    if k < 2 {
        return Err(DivergenceError::ComplementUndefined);
    }
    m.require_uniform()?;
    let n = m.support_size();
    if p_real.support_size() != n {
        return Err(DivergenceError::SupportMismatch(p_real.support_size(), n));
    }
    let p_mix = mixture_pdf(m);
    let summed: Vec<f64> = p_mix
        .probabilities()
        .iter()
        .zip(p_real.probabilities())
        .map(|(&a, &b)| a + b)
        .collect();

    let mut value =
        log_ratio_expectation(p_real, &summed) + log_ratio_expectation(&p_mix, &summed);
    for idx in 0..k {
        value -= kl_divergence(&m.components()[idx], &p_mix)?;
        let complement = complement_pdf(m, idx)?;
        value -= kl_divergence(&complement, &p_mix)?;
    }
    let kf = k as f64;
    value -= kf * ((kf - 1.0) / (kf * kf)).ln();
    Ok(value)
}

/// Value at optimal responses in Jensen-Shannon form:
///
/// `V = 2·JS(p_mix, p_real) - K·JS(p_1, ..., p_K)
///      - K·JS(complement_1, ..., complement_K)
///      - K·ln((K-1)/K²) - ln 4`
///
/// with uniform weights in every generalized JS term.
pub fn value_js_form(
    p_real: &DiscreteDistribution,
    m: &MixtureModel,
) -> Result<f64, DivergenceError> {
    let k = m.component_count();
    if k < 2 {
        return Err(DivergenceError::ComplementUndefined);
    }
    m.require_uniform()?;
    let n = m.support_size();
    if p_real.support_size() != n {
        return Err(DivergenceError::SupportMismatch(p_real.support_size(), n));
    }
    let p_mix = mixture_pdf(m);
    let kf = k as f64;

    let complements: Vec<DiscreteDistribution> = (0..k)
        .map(|idx| complement_pdf(m, idx))
        .collect::<Result<_, _>>()?;

    let value = 2.0 * js_divergence(&p_mix, p_real)?
        - kf * generalized_js(&MixtureModel::uniform(m.components().to_vec())?)
        - kf * generalized_js(&MixtureModel::uniform(complements)?)
        - kf * ((kf - 1.0) / (kf * kf)).ln()
        - (4.0f64).ln();
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    const LN_2: f64 = std::f64::consts::LN_2;

    fn dist(probabilities: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(probabilities.to_vec()).unwrap()
    }

    /// Random floored instance: support 2..=16, K in {2,3,4}, densities
    /// clamped at 1e-3 then renormalized (keeps every sentinel away).
    pub(crate) fn random_instance(
        rng: &mut impl Rng,
    ) -> (DiscreteDistribution, MixtureModel) {
        let support = rng.gen_range(2..=16);
        let k = rng.gen_range(2..=4);
        let mut draw = |n: usize| -> DiscreteDistribution {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().max(1e-3)).collect();
            DiscreteDistribution::normalized(&raw).unwrap()
        };
        let p_real = draw(support);
        let components: Vec<_> = (0..k).map(|_| draw(support)).collect();
        (p_real, MixtureModel::uniform(components).unwrap())
    }

    #[test]
    fn mixture_pdf_two_point_masses() {
        let m = MixtureModel::uniform(vec![dist(&[1.0, 0.0]), dist(&[0.0, 1.0])]).unwrap();
        assert_eq!(mixture_pdf(&m).probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn mixture_of_identical_components_is_the_component() {
        let c = dist(&[0.3, 0.7]);
        let m = MixtureModel::uniform(vec![c.clone(), c.clone(), c.clone()]).unwrap();
        for (a, b) in mixture_pdf(&m).probabilities().iter().zip(c.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_pdf_three_components() {
        let m = MixtureModel::uniform(vec![
            dist(&[0.5, 0.5]),
            dist(&[0.2, 0.8]),
            dist(&[0.9, 0.1]),
        ])
        .unwrap();
        let p = mixture_pdf(&m);
        assert!((p.probabilities()[0] - 8.0 / 15.0).abs() < 1e-15);
        assert!((p.probabilities()[1] - 7.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn complement_at_k2_is_the_other_component() {
        let a = dist(&[0.7, 0.3]);
        let b = dist(&[0.1, 0.9]);
        let m = MixtureModel::uniform(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(complement_pdf(&m, 0).unwrap(), b);
        assert_eq!(complement_pdf(&m, 1).unwrap(), a);
    }

    #[test]
    fn complement_three_components_hand_average() {
        let m = MixtureModel::uniform(vec![
            dist(&[0.5, 0.5]),
            dist(&[0.2, 0.8]),
            dist(&[0.9, 0.1]),
        ])
        .unwrap();
        let c = complement_pdf(&m, 0).unwrap();
        assert!((c.probabilities()[0] - 0.55).abs() < 1e-15);
        assert!((c.probabilities()[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn complement_requires_two_components() {
        let m = MixtureModel::uniform(vec![dist(&[1.0])]).unwrap();
        assert!(matches!(
            complement_pdf(&m, 0),
            Err(DivergenceError::ComplementUndefined)
        ));
    }

    #[test]
    fn complement_mean_recovers_mixture() {
        let mut r = rng::stream(21, "divergences");
        for _ in 0..50 {
            let (_, m) = random_instance(&mut r);
            let k = m.component_count();
            let mix = mixture_pdf(&m);
            let mut mean = vec![0.0; m.support_size()];
            for idx in 0..k {
                let c = complement_pdf(&m, idx).unwrap();
                for (acc, &p) in mean.iter_mut().zip(c.probabilities()) {
                    *acc += p / k as f64;
                }
            }
            for (a, b) in mean.iter().zip(mix.probabilities()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn kl_of_self_is_zero() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl_point_mass_against_uniform() {
        let v = kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((v - LN_2).abs() < 1e-15);
    }

    #[test]
    fn kl_hand_evaluated() {
        let v = kl_divergence(&dist(&[0.5, 0.5]), &dist(&[0.25, 0.75])).unwrap();
        let expected = 0.5 * LN_2 + 0.5 * (2.0f64 / 3.0).ln();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn kl_infinite_when_q_misses_support() {
        let v = kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap();
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn kl_support_mismatch_rejected() {
        assert!(matches!(
            kl_divergence(&dist(&[1.0]), &dist(&[0.5, 0.5])),
            Err(DivergenceError::SupportMismatch(1, 2))
        ));
    }

    #[test]
    fn js_zero_for_identical_components() {
        let c = dist(&[0.4, 0.6]);
        let m = MixtureModel::uniform(vec![c.clone(), c.clone()]).unwrap();
        assert!(generalized_js(&m).abs() < 1e-15);
    }

    #[test]
    fn js_disjoint_reaches_ln2() {
        let m = MixtureModel::uniform(vec![dist(&[1.0, 0.0]), dist(&[0.0, 1.0])]).unwrap();
        assert!((generalized_js(&m) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn js_two_point_brute_force() {
        // Components [0.5,0.5] and [0.25,0.75], mixture [0.375,0.625]:
        // 0.5·KL(p1‖mix) + 0.5·KL(p2‖mix) summed over the 2-point support.
        let p1 = [0.5f64, 0.5];
        let p2 = [0.25f64, 0.75];
        let mix = [0.375f64, 0.625];
        let mut expected = 0.0;
        for x in 0..2 {
            expected += 0.5 * p1[x] * (p1[x] / mix[x]).ln();
            expected += 0.5 * p2[x] * (p2[x] / mix[x]).ln();
        }
        let m = MixtureModel::uniform(vec![dist(&p1), dist(&p2)]).unwrap();
        assert!((generalized_js(&m) - expected).abs() < 1e-15);
        assert!((expected - 0.033822).abs() < 1e-6);
    }

    #[test]
    fn js_bounds_and_zero_iff_equal() {
        let mut r = rng::stream(22, "divergences");
        for _ in 0..100 {
            let (_, m) = random_instance(&mut r);
            let v = generalized_js(&m);
            let ln_k = (m.component_count() as f64).ln();
            assert!((0.0..=ln_k + 1e-12).contains(&v));
            // Floored instances have distinct components, so strictly > 0.
            assert!(v > 0.0);
        }
    }

    #[test]
    fn js_monotone_in_separation() {
        // One-parameter family p1 = [t, 1-t], p2 = [1-t, t]: separation grows
        // with t on [0.5, 1], and so must the divergence.
        let mut prev = -1.0;
        for step in 0..=20 {
            let t = 0.5 + 0.5 * step as f64 / 20.0;
            let m = MixtureModel::uniform(vec![dist(&[t, 1.0 - t]), dist(&[1.0 - t, t])]).unwrap();
            let v = generalized_js(&m);
            assert!(v >= prev - 1e-15, "js decreased along the family");
            prev = v;
        }
    }

    #[test]
    fn optimal_supplementary_constant_for_equal_components() {
        let c = dist(&[0.3, 0.7]);
        let m = MixtureModel::uniform(vec![c.clone(), c.clone(), c.clone()]).unwrap();
        for table in (0..3).map(|k| optimal_supplementary(&m, k).unwrap()) {
            for v in table {
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn optimal_supplementary_hand_instance() {
        let m = MixtureModel::uniform(vec![dist(&[0.8, 0.2]), dist(&[0.2, 0.8])]).unwrap();
        let h1 = optimal_supplementary(&m, 0).unwrap();
        assert!((h1[0] - 0.8).abs() < 1e-15);
        assert!((h1[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn optimal_supplementary_sums_to_one() {
        let mut r = rng::stream(23, "divergences");
        for _ in 0..50 {
            let (_, m) = random_instance(&mut r);
            let tables: Vec<_> = (0..m.component_count())
                .map(|k| optimal_supplementary(&m, k).unwrap())
                .collect();
            for x in 0..m.support_size() {
                let s: f64 = tables.iter().map(|t| t[x]).sum();
                assert!((s - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn optimal_adversarial_half_iff_equal() {
        let p = dist(&[0.3, 0.7]);
        for v in optimal_adversarial(&p, &p).unwrap() {
            assert_eq!(v, 0.5);
        }
        let q = dist(&[0.7, 0.3]);
        let table = optimal_adversarial(&p, &q).unwrap();
        assert!(table.iter().any(|&v| (v - 0.5).abs() > 1e-12));
    }

    #[test]
    fn optimal_adversarial_disjoint_and_hand_ratio() {
        let table = optimal_adversarial(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap();
        assert_eq!(table, vec![1.0, 0.0]);

        let table = optimal_adversarial(&dist(&[0.6, 0.4]), &dist(&[0.2, 0.8])).unwrap();
        assert!((table[0] - 0.75).abs() < 1e-15);
        assert!((table[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    /// Optimal tables for an instance; helper for the identity tests.
    fn optimal_tables(p_real: &DiscreteDistribution, m: &MixtureModel) -> (Vec<f64>, Vec<Vec<f64>>) {
        let h = optimal_adversarial(p_real, &mixture_pdf(m)).unwrap();
        let hks = (0..m.component_count())
            .map(|k| optimal_supplementary(m, k).unwrap())
            .collect();
        (h, hks)
    }

    #[test]
    fn value_all_equal_k2_is_ln4() {
        let c = dist(&[0.5, 0.5]);
        let m = MixtureModel::uniform(vec![c.clone(), c.clone()]).unwrap();
        let (h, hks) = optimal_tables(&c, &m);
        let v = value_from_definition(&c, &m, &h, &hks).unwrap();
        let ln4 = (4.0f64).ln();
        assert!((v - ln4).abs() <= 1e-12);
        assert!((value_kl_form(&c, &m).unwrap() - ln4).abs() <= 1e-12);
        assert!((value_js_form(&c, &m).unwrap() - ln4).abs() <= 1e-12);
    }

    #[test]
    fn value_identity_chain_on_random_instances() {
        let mut r = rng::stream(24, "divergences");
        for _ in 0..100 {
            let (p_real, m) = random_instance(&mut r);
            let (h, hks) = optimal_tables(&p_real, &m);
            let def = value_from_definition(&p_real, &m, &h, &hks).unwrap();
            let kl = value_kl_form(&p_real, &m).unwrap();
            let js = value_js_form(&p_real, &m).unwrap();
            assert!((def - kl).abs() <= 1e-9, "def {def} vs kl {kl}");
            assert!((kl - js).abs() <= 1e-9, "kl {kl} vs js {js}");
        }
    }

    #[test]
    fn suboptimal_adversarial_lowers_value() {
        let mut r = rng::stream(25, "divergences");
        for _ in 0..20 {
            let (p_real, m) = random_instance(&mut r);
            let (h, hks) = optimal_tables(&p_real, &m);
            let at_opt = value_from_definition(&p_real, &m, &h, &hks).unwrap();
            let constant = vec![0.5; m.support_size()];
            let at_half = value_from_definition(&p_real, &m, &constant, &hks).unwrap();
            // Generic floored instances have p_real != p_mix, so strict.
            assert!(at_half < at_opt);
        }
    }

    #[test]
    fn value_kl_form_real_equals_mixture_case() {
        // p_real equal to the mixture of distinct components: value is
        // ln 16 - ln 4 - 2·KL(p1‖mix) - 2·KL(p2‖mix), strictly below ln 4.
        let p1 = dist(&[0.8, 0.2]);
        let p2 = dist(&[0.2, 0.8]);
        let m = MixtureModel::uniform(vec![p1.clone(), p2.clone()]).unwrap();
        let mix = mixture_pdf(&m);
        let v = value_kl_form(&mix, &m).unwrap();
        let expected = -(4.0f64).ln() + (16.0f64).ln()
            - 2.0 * kl_divergence(&p1, &mix).unwrap()
            - 2.0 * kl_divergence(&p2, &mix).unwrap();
        assert!((v - expected).abs() <= 1e-12);
        assert!(v < (4.0f64).ln());
    }

    #[test]
    fn js_of_complements_equals_js_of_components_at_k2() {
        let p1 = dist(&[0.9, 0.1]);
        let p2 = dist(&[0.3, 0.7]);
        let m = MixtureModel::uniform(vec![p1.clone(), p2.clone()]).unwrap();
        let comp = generalized_js(&m);
        let complements = MixtureModel::uniform(vec![
            complement_pdf(&m, 0).unwrap(),
            complement_pdf(&m, 1).unwrap(),
        ])
        .unwrap();
        assert!((generalized_js(&complements) - comp).abs() < 1e-15);
    }

    #[test]
    fn saturated_response_yields_sentinel() {
        let p_real = dist(&[0.5, 0.5]);
        let m = MixtureModel::uniform(vec![dist(&[0.5, 0.5]), dist(&[0.5, 0.5])]).unwrap();
        let hks = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        // h = 1 where the mixture has mass: log(1-h) term blows down.
        let v = value_from_definition(&p_real, &m, &[1.0, 1.0], &hks).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(DiscreteDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::new(vec![0.25; 4]).is_ok());
    }
}
