//! Constants of the exponential forgetting bounds and the bounds themselves.
//!
//! `alpha` is the worst two-step transition ratio and `eta` the posterior
//! floor it induces; `alpha(x)`, `eta(x)` additionally weigh the middle state
//! by its density at `x`. `beta` is the smallest expected `eta(X)` under any
//! class density and `gamma = 1 - 2 beta` the per-step contraction of the
//! risk gap. `(a, b)` are uniform ergodicity constants of the hidden chain.
//!
//! Every constant requires strictly positive transitions and densities; when
//! that fails the functions return [`Error::AssumptionAViolated`] instead of
//! an infinite value.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_assumption_a, EmissionModel, HiddenMarkovModel, Observation, Sampler, TransitionMatrix};
use crate::posterior::MC_BLOCK;

/// Default Monte Carlo sample count per class for gaussian `beta`.
pub const DEFAULT_BETA_SAMPLES: u64 = 1_000_000;

fn require_positive_transition(t: &TransitionMatrix) -> Result<()> {
    if t.strictly_positive() {
        Ok(())
    } else {
        Err(Error::AssumptionAViolated("transition matrix has zero entries".into()))
    }
}

/// `max over (iota, kappa, i, j) of p_{i iota} p_{iota j} / (p_{i kappa} p_{kappa j})`.
pub fn alpha_const(t: &TransitionMatrix) -> Result<f64> {
    require_positive_transition(t)?;
    let m = t.states();
    let mut best = 1.0f64;
    for i in 0..m {
        for j in 0..m {
            let two_step = (0..m).map(|k| t.get(i, k) * t.get(k, j));
            let (hi, lo) = two_step.fold((0.0f64, f64::INFINITY), |(h, l), v| (h.max(v), l.min(v)));
            best = best.max(hi / lo);
        }
    }
    Ok(best)
}

/// `log alpha(x)`. Evaluated in log space so far-away gaussian points do not
/// underflow the density ratio.
pub fn log_alpha_x(t: &TransitionMatrix, emission: &EmissionModel, x: &Observation) -> Result<f64> {
    require_positive_transition(t)?;
    let log_f = emission.log_densities(x)?;
    if log_f.contains(&f64::NEG_INFINITY) {
        return Err(Error::AssumptionAViolated(format!("a class density vanishes at {x:?}")));
    }
    let m = t.states();
    let mut best = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let mut hi = f64::NEG_INFINITY;
            let mut lo = f64::INFINITY;
            for (k, lf) in log_f.iter().enumerate() {
                let v = t.ln_get(i, k) + t.ln_get(k, j) + lf;
                hi = hi.max(v);
                lo = lo.min(v);
            }
            best = best.max(hi - lo);
        }
    }
    Ok(best)
}

pub fn alpha_x(t: &TransitionMatrix, emission: &EmissionModel, x: &Observation) -> Result<f64> {
    log_alpha_x(t, emission, x).map(f64::exp)
}

/// `(1 + (m - 1) alpha)^{-1}`.
pub fn eta_const(alpha: f64, classes: usize) -> f64 {
    1.0 / (1.0 + (classes as f64 - 1.0) * alpha)
}

fn eta_from_log_alpha(log_alpha: f64, classes: usize) -> f64 {
    eta_const(log_alpha.exp(), classes)
}

pub fn eta_x(t: &TransitionMatrix, emission: &EmissionModel, x: &Observation) -> Result<f64> {
    log_alpha_x(t, emission, x).map(|la| eta_from_log_alpha(la, t.states()))
}

/// How the `beta` integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integration {
    ExactSum,
    MonteCarlo { n: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaMethod {
    ExactSum,
    MonteCarlo { n: u64, seed: u64, std_error: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaGamma {
    pub beta: f64,
    pub gamma: f64,
    /// `integral of eta(x) f_k(x)` for every class `k`.
    pub per_class: Vec<f64>,
    pub method: BetaMethod,
}

/// `beta = min_k E_k[eta(X)]` and `gamma = 1 - 2 beta`.
pub fn beta_gamma(model: &HiddenMarkovModel, integration: Integration) -> Result<BetaGamma> {
    let report = validate_assumption_a(model);
    if !report.holds {
        return Err(Error::AssumptionAViolated(report.violations.join(", ")));
    }
    let m = model.classes();
    let t = model.transition();
    let emission = model.emission();
    let (per_class, errors, method) = match (integration, emission) {
        (Integration::ExactSum, EmissionModel::Discrete(d)) => {
            let etas = (0..d.alphabet_size())
                .map(|x| eta_x(t, emission, &Observation::Symbol(x)))
                .collect::<Result<Vec<_>>>()?;
            let per_class: Vec<f64> = (0..m)
                .map(|k| etas.iter().enumerate().map(|(x, e)| e * d.prob(k, x)).sum())
                .collect();
            (per_class, vec![0.0; m], BetaMethod::ExactSum)
        }
        (Integration::ExactSum, EmissionModel::Gaussian(_)) => return Err(Error::IntegrationUnavailable),
        (Integration::MonteCarlo { n, seed }, _) => {
            if n == 0 {
                return Err(Error::InvalidArgument("beta sample count must be at least 1".into()));
            }
            let mut means = Vec::with_capacity(m);
            let mut errors = Vec::with_capacity(m);
            for k in 0..m {
                let (mean, se) = mc_class_eta(model, k, n, seed)?;
                means.push(mean);
                errors.push(se);
            }
            (means, errors, BetaMethod::MonteCarlo { n, seed, std_error: 0.0 })
        }
    };
    let argmin = per_class
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v < per_class[best] { k } else { best });
    let beta = per_class[argmin];
    if !(beta > 0.0 && beta <= 0.5 + 1e-12) {
        return Err(Error::AssumptionAViolated(format!("beta = {beta} outside (0, 1/2]")));
    }
    let method = match method {
        BetaMethod::MonteCarlo { n, seed, .. } => BetaMethod::MonteCarlo { n, seed, std_error: errors[argmin] },
        other => other,
    };
    Ok(BetaGamma { beta, gamma: 1.0 - 2.0 * beta, per_class, method })
}

/// Mean and standard error of `eta(X)` for `X ~ f_class`.
fn mc_class_eta(model: &HiddenMarkovModel, class: usize, n: u64, seed: u64) -> Result<(f64, f64)> {
    let m = model.classes();
    let mut point = vec![0.0; m];
    point[class] = 1.0;
    let sampler = Sampler::new(model, &point)?;
    let t = model.transition();
    let blocks = n.div_ceil(MC_BLOCK as u64);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((class as u64) << 40) | b);
            let len = (n - b * MC_BLOCK as u64).min(MC_BLOCK as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let x = sampler.observe(class, &mut rng);
                let la = log_alpha_x(t, model.emission(), &x).expect("densities are positive");
                let e = eta_from_log_alpha(la, m);
                s += e;
                s2 += e * e;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Dobrushin contraction coefficient `max_{i,j} (1/2) sum_k |p_ik - p_jk|`.
pub fn dobrushin_coefficient(t: &TransitionMatrix) -> f64 {
    let m = t.states();
    let mut b = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            let d: f64 = t.row(i).iter().zip(t.row(j)).map(|(p, q)| (p - q).abs()).sum();
            b = b.max(0.5 * d);
        }
    }
    b
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ergodicity {
    /// Total-variation diameter of the simplex in the l1 convention.
    pub a: f64,
    pub b: f64,
    /// False when `b = 1`: the bound `a b^k` is then vacuous.
    pub one_step_contractive: bool,
}

/// `a = 2` and `b` the Dobrushin coefficient, so that
/// `|| mu P^k - pi ||_1 <= a b^k` for every start `mu`.
pub fn ergodicity_constants(t: &TransitionMatrix) -> Result<Ergodicity> {
    crate::model::stationary_distribution(t)?;
    let b = dobrushin_coefficient(t);
    Ok(Ergodicity { a: 2.0, b, one_step_contractive: b < 1.0 })
}

/// `prod (1 - 2 eta_j)` over the supplied per-offset floors.
pub fn gap_bound(per_point_eta: &[f64]) -> f64 {
    per_point_eta.iter().map(|e| 1.0 - 2.0 * e).product()
}

/// Floors `eta_j` for offsets `from..=to`: `eta(x_j)` where `x_j` is
/// observed, the constant `eta` elsewhere.
pub fn eta_hat(
    model: &HiddenMarkovModel,
    eta: f64,
    observed: &BTreeMap<i64, Observation>,
    from: i64,
    to: i64,
) -> Result<Vec<f64>> {
    (from..=to)
        .map(|j| match observed.get(&j) {
            Some(x) => eta_x(model.transition(), model.emission(), x),
            None => Ok(eta),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskGapBounds {
    /// `gamma^(l+1)`: both risks from the same model.
    pub same_model: f64,
    /// `2 (gamma^(l/2) + a b^(l/2))`: risks from models with different starts.
    pub general: f64,
}

impl RiskGapBounds {
    /// Risks lie in `[0, 1]`, so report values above one as one.
    pub fn clipped(self) -> Self {
        Self { same_model: self.same_model.min(1.0), general: self.general.min(1.0) }
    }
}

pub fn risk_gap_bounds(l: usize, gamma: f64, a: f64, b: f64) -> RiskGapBounds {
    let half = l as f64 / 2.0;
    RiskGapBounds {
        same_model: gamma.powi(l as i32 + 1),
        general: 2.0 * (gamma.powf(half) + a * b.powf(half)),
    }
}

/// All bound constants of a model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub one_step_contractive: bool,
    pub beta_method: BetaMethod,
}

impl BoundConstants {
    pub fn compute(model: &HiddenMarkovModel, integration: Integration) -> Result<Self> {
        let alpha = alpha_const(model.transition())?;
        let eta = eta_const(alpha, model.classes());
        let bg = beta_gamma(model, integration)?;
        let erg = ergodicity_constants(model.transition())?;
        Ok(Self {
            alpha,
            eta,
            beta: bg.beta,
            gamma: bg.gamma,
            a: erg.a,
            b: erg.b,
            one_step_contractive: erg.one_step_contractive,
            beta_method: bg.method,
        })
    }

    /// Exact sum for discrete emissions, Monte Carlo otherwise.
    pub fn default_integration(model: &HiddenMarkovModel, seed: u64) -> Integration {
        match model.emission() {
            EmissionModel::Discrete(_) => Integration::ExactSum,
            EmissionModel::Gaussian(_) => Integration::MonteCarlo { n: DEFAULT_BETA_SAMPLES, seed },
        }
    }

    pub fn risk_gap_bounds(&self, l: usize) -> RiskGapBounds {
        risk_gap_bounds(l, self.gamma, self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransitionMatrix;
    use approx::assert_abs_diff_eq;

    // Independent m^4 loop, kept apart from the m^3 implementation.
    fn brute_alpha_x(t: &TransitionMatrix, f: &[f64]) -> f64 {
        let m = t.states();
        let mut best = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let r = t.get(i, a) * t.get(a, j) * f[a] / (t.get(i, b) * t.get(b, j) * f[b]);
                        best = best.max(r);
                    }
                }
            }
        }
        best
    }

    fn asym() -> TransitionMatrix {
        TransitionMatrix::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_const(&TransitionMatrix::uniform(3).unwrap()).unwrap(), 1.0);
        assert_abs_diff_eq!(alpha_const(&asym()).unwrap(), 49.0 / 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_const(&asym()).unwrap(), brute_alpha_x(&asym(), &[1.0, 1.0]), epsilon = 1e-12);
        let chain = TransitionMatrix::new(vec![
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.3, 0.7, 0.0, 0.0],
            vec![0.7, 0.3, 0.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(alpha_const(&chain), Err(Error::AssumptionAViolated(_))));
    }

    #[test]
    fn alpha_x_examples() {
        let same = EmissionModel::discrete(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let x = Observation::Symbol(1);
        assert_abs_diff_eq!(alpha_x(&asym(), &same, &x).unwrap(), 49.0 / 12.0, epsilon = 1e-12);

        // f_0(x) / f_1(x) = 2 at symbol 0
        let e = EmissionModel::discrete(vec![vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
        let got = alpha_x(&asym(), &e, &Observation::Symbol(0)).unwrap();
        assert_abs_diff_eq!(got, brute_alpha_x(&asym(), &[0.6, 0.3]), epsilon = 1e-12);
        assert_abs_diff_eq!(got, 49.0 / 6.0, epsilon = 1e-12);

        let e = EmissionModel::discrete(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let u = TransitionMatrix::uniform(2).unwrap();
        assert_abs_diff_eq!(alpha_x(&u, &e, &Observation::Symbol(0)).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_const(1.0, 2), 0.5);
        assert_eq!(eta_const(1.0, 4), 0.25);
        assert_abs_diff_eq!(eta_const(49.0 / 12.0, 2), 12.0 / 61.0, epsilon = 1e-15);
    }

    fn model(t: TransitionMatrix, table: Vec<Vec<f64>>) -> HiddenMarkovModel {
        HiddenMarkovModel::new(t, EmissionModel::discrete(table).unwrap(), None).unwrap()
    }

    #[test]
    fn beta_gamma_trivial_cases() {
        let m2 = model(TransitionMatrix::uniform(2).unwrap(), vec![vec![0.4, 0.6]; 2]);
        let bg = beta_gamma(&m2, Integration::ExactSum).unwrap();
        assert_abs_diff_eq!(bg.beta, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(bg.gamma, 0.0, epsilon = 1e-15);

        let m4 = model(TransitionMatrix::uniform(4).unwrap(), vec![vec![0.1, 0.9]; 4]);
        let bg = beta_gamma(&m4, Integration::ExactSum).unwrap();
        assert_abs_diff_eq!(bg.beta, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(bg.gamma, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn beta_for_sticky_model_by_hand() {
        let t = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let m = model(t.clone(), vec![vec![0.8, 0.2], vec![0.2, 0.8]]);
        // alpha(a): best tuple is i=j=0, iota=0, kappa=1: 0.81*0.8 / (0.01*0.2) = 324
        let fa = [0.8, 0.2];
        let alpha_a = brute_alpha_x(&t, &fa);
        assert_abs_diff_eq!(alpha_a, 324.0, epsilon = 1e-9);
        let alpha_b = brute_alpha_x(&t, &[0.2, 0.8]);
        assert_abs_diff_eq!(alpha_b, 324.0, epsilon = 1e-9);
        let eta = 1.0 / 325.0;
        let bg = beta_gamma(&m, Integration::ExactSum).unwrap();
        assert_abs_diff_eq!(bg.beta, eta * 0.8 + eta * 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(bg.gamma, 1.0 - 2.0 / 325.0, epsilon = 1e-15);
    }

    #[test]
    fn beta_monte_carlo_agrees_with_exact_sum() {
        let t = TransitionMatrix::new(vec![vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
        let m = model(t, vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.3, 0.6]]);
        let exact = beta_gamma(&m, Integration::ExactSum).unwrap();
        let mc = beta_gamma(&m, Integration::MonteCarlo { n: 200_000, seed: 4 }).unwrap();
        let BetaMethod::MonteCarlo { std_error, .. } = mc.method else { panic!() };
        assert!((mc.beta - exact.beta).abs() <= 4.0 * std_error.max(1e-12));
    }

    #[test]
    fn gaussian_beta_needs_monte_carlo() {
        let e = EmissionModel::gaussian(vec![vec![0.0], vec![1.0]], vec![vec![1.0]]).unwrap();
        let m = HiddenMarkovModel::new(asym(), e, None).unwrap();
        assert_eq!(beta_gamma(&m, Integration::ExactSum), Err(Error::IntegrationUnavailable));
        let bg = beta_gamma(&m, Integration::MonteCarlo { n: 20_000, seed: 1 }).unwrap();
        assert!(bg.beta > 0.0 && bg.beta <= 0.5);
        assert_eq!(bg, beta_gamma(&m, Integration::MonteCarlo { n: 20_000, seed: 1 }).unwrap());
    }

    #[test]
    fn ergodicity_examples() {
        let u = ergodicity_constants(&TransitionMatrix::uniform(3).unwrap()).unwrap();
        assert_eq!(u.b, 0.0);
        assert_eq!(u.a, 2.0);
        assert_abs_diff_eq!(ergodicity_constants(&asym()).unwrap().b, 0.3, epsilon = 1e-15);
        // identity has many invariant measures; its coefficient is still 1
        let id = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(dobrushin_coefficient(&id), 1.0);
        assert!(ergodicity_constants(&id).is_err());
        let flip = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = ergodicity_constants(&flip).unwrap();
        assert_eq!(e.b, 1.0);
        assert!(!e.one_step_contractive);
    }

    #[test]
    fn gap_bound_examples() {
        assert_eq!(gap_bound(&[0.2, 0.5, 0.1]), 0.0);
        assert_abs_diff_eq!(gap_bound(&[0.2; 3]), 0.6f64.powi(3), epsilon = 1e-15);

        let t = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let m = model(t, vec![vec![0.8, 0.2], vec![0.2, 0.8]]);
        let observed: BTreeMap<_, _> = [(-1, Observation::Symbol(0)), (0, Observation::Symbol(0))].into();
        let etas = eta_hat(&m, 0.3, &observed, -1, 0).unwrap();
        assert_abs_diff_eq!(gap_bound(&etas), (1.0 - 2.0 / 325.0f64).powi(2), epsilon = 1e-14);
        let etas = eta_hat(&m, 0.3, &observed, -3, -2).unwrap();
        assert_eq!(etas, vec![0.3, 0.3]);
    }

    #[test]
    fn risk_gap_examples() {
        assert_eq!(risk_gap_bounds(5, 0.0, 2.0, 0.3).same_model, 0.0);
        assert_abs_diff_eq!(risk_gap_bounds(3, 0.5, 2.0, 0.3).same_model, 0.0625, epsilon = 1e-15);
        let gamma = 1.0 - 2.0 / 325.0;
        let r = risk_gap_bounds(4, gamma, 2.0, 0.3);
        assert_abs_diff_eq!(r.general, 2.0 * (gamma * gamma + 2.0 * 0.09), epsilon = 1e-14);
        assert_eq!(r.clipped().general, 1.0);
        assert_abs_diff_eq!(r.same_model, gamma.powi(5), epsilon = 1e-15);
    }
}
