//! Windowed posterior inference for the current hidden state, the
//! Bayes-optimal rule with memory `l`, and its misclassification risk.
//!
//! All recursions run in log space.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ClassLabel, EmissionModel, HiddenMarkovModel, Observation, Sampler};

/// Default cap on the number of windows visited by exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Samples per Monte Carlo block. Each block draws from its own ChaCha
/// stream so results do not depend on the number of worker threads.
pub const MC_BLOCK: usize = 8192;

/// `log(sum(exp(v)))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Observations `(x_{-l}, .., x_0)`, oldest first.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationWindow {
    points: Vec<Observation>,
}

impl ObservationWindow {
    pub fn new(points: Vec<Observation>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("observation window is empty".into()));
        }
        Ok(Self { points })
    }

    /// Memory `l`: number of observations preceding `x_0`.
    pub fn memory(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Observation] {
        &self.points
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PosteriorVector {
    pub probs: Vec<f64>,
    /// Log of the window's marginal density `f(x_{-l}, .., x_0)`.
    pub log_evidence: f64,
}

impl PosteriorVector {
    pub fn map_class(&self) -> ClassLabel {
        ClassLabel(argmax_lowest(&self.probs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub value: f64,
    /// Binomial plug-in standard error; zero for exact values.
    pub std_error: f64,
    pub method: RiskMethod,
    pub n_samples: u64,
}

impl RiskEstimate {
    pub fn from_counts(errors: u64, n: u64, method: RiskMethod) -> Self {
        let value = errors as f64 / n as f64;
        let std_error = (value * (1.0 - value) / n as f64).sqrt();
        Self { value, std_error, method, n_samples: n }
    }
}

/// Log-space forward recursion over `points`, returning unnormalized log
/// weights `log P(Y_0 = y, x_{-l}^0)`.
fn forward_log(model: &HiddenMarkovModel, points: &[Observation], start: &[f64], out: &mut Vec<f64>) {
    let m = model.classes();
    let trans = model.transition();
    let emission = model.emission();
    out.clear();
    out.extend((0..m).map(|y| start[y].ln() + emission.ln_density_at(y, &points[0])));
    let mut next = vec![0.0; m];
    let mut terms = vec![0.0; m];
    for x in &points[1..] {
        for (y, slot) in next.iter_mut().enumerate() {
            for (yp, t) in terms.iter_mut().enumerate() {
                *t = out[yp] + trans.ln_get(yp, y);
            }
            *slot = emission.ln_density_at(y, x) + log_sum_exp(&terms);
        }
        std::mem::swap(out, &mut next);
    }
}

fn normalize_log(weights: &[f64]) -> Result<PosteriorVector> {
    let log_evidence = log_sum_exp(weights);
    if log_evidence == f64::NEG_INFINITY {
        return Err(Error::EvidenceUnderflow);
    }
    let probs = weights.iter().map(|w| (w - log_evidence).exp()).collect();
    Ok(PosteriorVector { probs, log_evidence })
}

fn check_window(model: &HiddenMarkovModel, window: &ObservationWindow) -> Result<()> {
    window.points.iter().try_for_each(|x| model.emission().check(x))
}

/// `P(Y_0 = . | X_{-l}^0 = window)`, where `start` is the distribution of
/// `Y_{-l}` (stationary when `None`).
pub fn posterior_window(
    model: &HiddenMarkovModel,
    window: &ObservationWindow,
    start: Option<&[f64]>,
) -> Result<PosteriorVector> {
    let start = model.start_or_stationary(start)?;
    check_window(model, window)?;
    let mut w = Vec::new();
    forward_log(model, &window.points, start, &mut w);
    normalize_log(&w)
}

/// Bayes-optimal class for `Y_0` under the stationary chain.
pub fn bayes_classify(model: &HiddenMarkovModel, window: &ObservationWindow) -> Result<ClassLabel> {
    bayes_classify_from(model, window, None)
}

pub fn bayes_classify_from(
    model: &HiddenMarkovModel,
    window: &ObservationWindow,
    start: Option<&[f64]>,
) -> Result<ClassLabel> {
    posterior_window(model, window, start).map(|p| p.map_class())
}

/// Exact `R_l` by enumerating all windows, with `Y_{-l}` distributed as π.
pub fn bayes_risk_exact(model: &HiddenMarkovModel, l: usize) -> Result<RiskEstimate> {
    bayes_risk_exact_from(model, l, None, DEFAULT_ENUMERATION_CAP)
}

/// Exact `R_l` for a discrete emission model:
/// `sum over windows of (f(window) - max_y P(Y_0 = y, window))`.
pub fn bayes_risk_exact_from(
    model: &HiddenMarkovModel,
    l: usize,
    start: Option<&[f64]>,
    cap: u64,
) -> Result<RiskEstimate> {
    let EmissionModel::Discrete(table) = model.emission() else {
        return Err(Error::UnsupportedEmission);
    };
    let start = model.start_or_stationary(start)?;
    let k = table.alphabet_size() as u128;
    let windows = (0..=l).try_fold(1u128, |acc, _| acc.checked_mul(k)).unwrap_or(u128::MAX);
    if windows > cap as u128 {
        return Err(Error::EnumerationTooLarge { windows, cap });
    }

    struct Walk<'a> {
        model: &'a HiddenMarkovModel,
        alphabet: usize,
        risk: f64,
    }

    impl Walk<'_> {
        // `alpha` holds P(Y_t = y, x_{-l}^t) for the current prefix.
        fn descend(&mut self, alpha: &[f64], remaining: usize) {
            let m = alpha.len();
            let EmissionModel::Discrete(table) = self.model.emission() else { unreachable!() };
            let pred = self.model.transition().propagate(alpha);
            let mut child = vec![0.0; m];
            for x in 0..self.alphabet {
                for (y, c) in child.iter_mut().enumerate() {
                    *c = pred[y] * table.prob(y, x);
                }
                self.visit(&child, remaining);
            }
        }

        fn visit(&mut self, alpha: &[f64], remaining: usize) {
            if remaining == 0 {
                let total: f64 = alpha.iter().sum();
                let best = alpha.iter().copied().fold(0.0, f64::max);
                self.risk += total - best;
            } else {
                self.descend(alpha, remaining - 1);
            }
        }
    }

    let mut walk = Walk { model, alphabet: table.alphabet_size(), risk: 0.0 };
    let m = model.classes();
    let mut first = vec![0.0; m];
    for x in 0..table.alphabet_size() {
        for (y, f) in first.iter_mut().enumerate() {
            *f = start[y] * table.prob(y, x);
        }
        walk.visit(&first, l);
    }
    Ok(RiskEstimate {
        value: walk.risk.clamp(0.0, 1.0),
        std_error: 0.0,
        method: RiskMethod::ExactEnumeration,
        n_samples: windows as u64,
    })
}

/// Monte Carlo estimate of `R_l`: draws independent windows (labels from
/// `start` then the chain), classifies each with the Bayes rule for the same
/// start, and counts errors.
pub fn bayes_risk_monte_carlo(
    model: &HiddenMarkovModel,
    l: usize,
    n_samples: u64,
    seed: u64,
    start: Option<&[f64]>,
) -> Result<RiskEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let start = model.start_or_stationary(start)?;
    let sampler = Sampler::new(model, start)?;
    let blocks = n_samples.div_ceil(MC_BLOCK as u64);
    let errors: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = (n_samples - b * MC_BLOCK as u64).min(MC_BLOCK as u64);
            let mut labels = vec![0usize; l + 1];
            let mut obs = Vec::with_capacity(l + 1);
            let mut w = Vec::with_capacity(model.classes());
            let mut errs = 0u64;
            for _ in 0..len {
                sampler.fill_path(&mut labels, &mut obs, &mut rng);
                forward_log(model, &obs, start, &mut w);
                if argmax_lowest(&w) != labels[l] {
                    errs += 1;
                }
            }
            errs
        })
        .collect();
    Ok(RiskEstimate::from_counts(errors.iter().sum(), n_samples, RiskMethod::MonteCarlo))
}

/// Conditioning event for anchored state posteriors: a model started at
/// `start_time` (distribution `start_dist` of `Y_{start_time}`, stationary by
/// default), observations at arbitrary offsets, and optionally one clamped
/// hidden state.
#[derive(Clone, Copy, Debug)]
pub struct ConditioningEvent<'a> {
    pub start_time: i64,
    pub start_dist: Option<&'a [f64]>,
    pub observed: &'a BTreeMap<i64, Observation>,
    pub anchor: Option<(i64, ClassLabel)>,
}

/// Distribution of `Y_target_time` given the event, by forward-backward over
/// the time range from `start_time` to the last relevant offset.
pub fn conditional_state_distribution(
    model: &HiddenMarkovModel,
    event: &ConditioningEvent<'_>,
    target_time: i64,
) -> Result<Vec<f64>> {
    let m = model.classes();
    let start = model.start_or_stationary(event.start_dist)?;
    let t0 = event.start_time;
    let mut last = target_time.max(0);
    if let Some((&t, _)) = event.observed.iter().next_back() {
        last = last.max(t);
    }
    let mut earliest = target_time;
    if let Some((&t, _)) = event.observed.iter().next() {
        earliest = earliest.min(t);
    }
    if let Some((t, y)) = event.anchor {
        if y.0 >= m {
            return Err(Error::LabelOutOfRange { label: y.0, classes: m });
        }
        earliest = earliest.min(t);
        last = last.max(t);
    }
    if earliest < t0 {
        return Err(Error::InvalidArgument(format!(
            "offset {earliest} precedes the model start {t0}"
        )));
    }
    for x in event.observed.values() {
        model.emission().check(x)?;
    }

    let steps = (last - t0 + 1) as usize;
    // log local evidence per step and class
    let mut local = vec![0.0; steps * m];
    for (&t, x) in event.observed {
        let s = (t - t0) as usize;
        for y in 0..m {
            local[s * m + y] = model.emission().ln_density_at(y, x);
        }
    }
    if let Some((t, a)) = event.anchor {
        let s = (t - t0) as usize;
        for y in (0..m).filter(|&y| y != a.0) {
            local[s * m + y] = f64::NEG_INFINITY;
        }
    }

    let trans = model.transition();
    let mut fwd = vec![0.0; steps * m];
    for y in 0..m {
        fwd[y] = start[y].ln() + local[y];
    }
    let mut terms = vec![0.0; m];
    for s in 1..steps {
        for y in 0..m {
            for (yp, t) in terms.iter_mut().enumerate() {
                *t = fwd[(s - 1) * m + yp] + trans.ln_get(yp, y);
            }
            fwd[s * m + y] = local[s * m + y] + log_sum_exp(&terms);
        }
    }
    let mut bwd = vec![0.0; steps * m];
    for s in (0..steps - 1).rev() {
        for y in 0..m {
            for (yn, t) in terms.iter_mut().enumerate() {
                *t = trans.ln_get(y, yn) + local[(s + 1) * m + yn] + bwd[(s + 1) * m + yn];
            }
            bwd[s * m + y] = log_sum_exp(&terms);
        }
    }

    let s = (target_time - t0) as usize;
    let joint: Vec<f64> = (0..m).map(|y| fwd[s * m + y] + bwd[s * m + y]).collect();
    normalize_log(&joint)
        .map(|p| p.probs)
        .map_err(|_| Error::InconsistentConditioning)
}

/// `P(Y_target_time in target_set | event)`.
pub fn conditional_state_posterior(
    model: &HiddenMarkovModel,
    event: &ConditioningEvent<'_>,
    target_time: i64,
    target_set: &[ClassLabel],
) -> Result<f64> {
    let dist = conditional_state_distribution(model, event, target_time)?;
    let mut seen = vec![false; dist.len()];
    let mut p = 0.0;
    for c in target_set {
        if c.0 >= dist.len() {
            return Err(Error::LabelOutOfRange { label: c.0, classes: dist.len() });
        }
        if !std::mem::replace(&mut seen[c.0], true) {
            p += dist[c.0];
        }
    }
    Ok(p)
}

/// Largest and smallest value of `P(Y_target in set | event, Y_anchor_time = i)`
/// over all anchor classes `i`.
pub fn anchored_extremes(
    model: &HiddenMarkovModel,
    event: &ConditioningEvent<'_>,
    anchor_time: i64,
    target_time: i64,
    target_set: &[ClassLabel],
) -> Result<(f64, f64)> {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for i in 0..model.classes() {
        let ev = ConditioningEvent { anchor: Some((anchor_time, ClassLabel(i))), ..*event };
        let p = conditional_state_posterior(model, &ev, target_time, target_set)?;
        hi = hi.max(p);
        lo = lo.min(p);
    }
    Ok((hi, lo))
}
