//! Property suites for the forgetting inequalities, on random models that
//! satisfy strict positivity. The acceptance suite runs larger versions.

mod common;

use std::collections::BTreeMap;

use common::*;
use hmmem::bounds::{
    alpha_const, beta_gamma, ergodicity_constants, eta_const, eta_hat, eta_x, gap_bound, log_alpha_x,
    risk_gap_bounds, Integration,
};
use hmmem::posterior::{anchored_extremes, bayes_risk_exact_from, conditional_state_distribution, ConditioningEvent};
use hmmem::{bayes_risk_exact, ClassLabel, Observation};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn constants_are_in_range(seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw = random_discrete(&mut r, 4, 5);
        let model = raw.model();
        let alpha = alpha_const(model.transition()).unwrap();
        let eta = eta_const(alpha, raw.classes());
        prop_assert!(alpha >= 1.0 && alpha.is_finite());
        prop_assert!(eta > 0.0 && eta <= 0.5);
        let bg = beta_gamma(&model, Integration::ExactSum).unwrap();
        prop_assert!(bg.beta > 0.0 && bg.beta <= 0.5);
        prop_assert!((0.0..1.0).contains(&bg.gamma));
        let etas: Vec<f64> = (0..raw.alphabet())
            .map(|x| eta_x(model.transition(), model.emission(), &Observation::Symbol(x)).unwrap())
            .collect();
        for e in &etas {
            prop_assert!(*e > 0.0 && *e <= 0.5);
        }
        for k in 0..raw.classes() {
            let lhs: f64 = etas.iter().enumerate().map(|(x, e)| (1.0 - 2.0 * e) * raw.table[k][x]).sum();
            prop_assert!(lhs <= bg.gamma + 1e-12);
        }
        let la = log_alpha_x(model.transition(), model.emission(), &Observation::Symbol(0)).unwrap();
        prop_assert!(la >= 0.0);
    }

    #[test]
    fn dobrushin_bounds_total_variation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = r.random_range(2..=5);
        let raw = RawDiscrete::random(&mut r, m, 2, 0.01);
        let model = raw.model();
        let erg = ergodicity_constants(model.transition()).unwrap();
        let pi = model.stationary().unwrap().to_vec();
        let mut dist = random_simplex(&mut r, m, 0.0);
        if r.random_bool(0.5) {
            dist = vec![0.0; m];
            dist[r.random_range(0..m)] = 1.0;
        }
        for k in 1..=20 {
            dist = model.transition().propagate(&dist);
            let tv: f64 = dist.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(tv <= erg.a * erg.b.powi(k) + 1e-12, "k={} tv={} b={}", k, tv, erg.b);
        }
    }

    #[test]
    fn risk_is_monotone_and_gaps_are_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw = random_discrete(&mut r, 3, 3);
        let model = raw.model();
        let bg = beta_gamma(&model, Integration::ExactSum).unwrap();
        let erg = ergodicity_constants(model.transition()).unwrap();
        let risks: Vec<f64> = (0..=5).map(|l| bayes_risk_exact(&model, l).unwrap().value).collect();
        for l in 0..3 {
            prop_assert!(risks[l] >= risks[l + 1] - 1e-12);
        }
        for l in 0..=3 {
            for k in 1..=2 {
                let b = risk_gap_bounds(l, bg.gamma, erg.a, erg.b);
                prop_assert!((risks[l] - risks[l + k]).abs() <= b.same_model + 1e-10);
            }
        }
        // different start distributions, each model running before -l
        let nu1 = random_simplex(&mut r, raw.classes(), 0.0);
        let nu2 = random_simplex(&mut r, raw.classes(), 0.0);
        for l in 0..=3 {
            for k in 1..=2 {
                let s1 = propagate_k(&raw, &nu1, 1);
                let s2 = propagate_k(&raw, &nu2, 1);
                let r1 = bayes_risk_exact_from(&model, l, Some(&s1), 1 << 20).unwrap().value;
                let r2 = bayes_risk_exact_from(&model, l + k, Some(&s2), 1 << 20).unwrap().value;
                let b = risk_gap_bounds(l, bg.gamma, erg.a, erg.b);
                prop_assert!((r1 - r2).abs() <= b.general + 1e-10);
            }
        }
    }

    #[test]
    fn anchored_gap_is_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw = random_discrete(&mut r, 4, 4);
        let model = raw.model();
        let m = raw.classes();
        let l = r.random_range(1..=4i64);
        let n = r.random_range(0..=4i64);
        let start_time = (-l).min(-n) - 1 - r.random_range(0..2);
        let start = random_simplex(&mut r, m, 0.0);
        let observed: BTreeMap<i64, usize> = (-n..=0).map(|t| (t, r.random_range(0..raw.alphabet()))).collect();
        let obs = symbols(&observed);
        let set = random_subset(&mut r, m);
        let ev = ConditioningEvent { start_time, start_dist: Some(&start), observed: &obs, anchor: None };
        let (hi, lo) = anchored_extremes(&model, &ev, -l, 0, &set).unwrap();
        let eta = eta_const(alpha_const(model.transition()).unwrap(), m);
        let bound = gap_bound(&eta_hat(&model, eta, &obs, -l + 1, 0).unwrap());
        prop_assert!(hi - lo <= bound + 1e-10, "gap {} bound {}", hi - lo, bound);
    }

    #[test]
    fn one_step_ratio_and_floor(seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw = random_discrete(&mut r, 4, 4);
        let model = raw.model();
        let m = raw.classes();
        let start_time = -r.random_range(2..=4i64);
        let l = r.random_range(0..=(-start_time - 1));
        let start = random_simplex(&mut r, m, 0.0);
        let mut observed = BTreeMap::new();
        for t in start_time..=0 {
            if r.random_bool(0.5) {
                observed.insert(t, r.random_range(0..raw.alphabet()));
            }
        }
        let obs = symbols(&observed);
        let anchor = r.random_range(0..m);
        let ev = ConditioningEvent {
            start_time,
            start_dist: Some(&start),
            observed: &obs,
            anchor: Some((-l - 1, ClassLabel(anchor))),
        };
        let d = conditional_state_distribution(&model, &ev, -l).unwrap();
        let alpha = alpha_const(model.transition()).unwrap();
        let (a_hat, e_hat) = match obs.get(&-l) {
            Some(x) => {
                let a = log_alpha_x(model.transition(), model.emission(), x).unwrap().exp();
                (a, eta_const(a, m))
            }
            None => (alpha, eta_const(alpha, m)),
        };
        for i in 0..m {
            prop_assert!(d[i] >= e_hat - 1e-10);
            for k in 0..m {
                prop_assert!(d[i] / d[k] <= a_hat + 1e-10);
            }
        }
    }
}
