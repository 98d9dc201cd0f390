//! Test-only helpers: random model generators and brute-force oracles that
//! enumerate the full joint distribution of labels and observations. They
//! use plain linear-space sums and never call the inference code they check.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hmmem::{ClassLabel, EmissionModel, HiddenMarkovModel, Observation, TransitionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Probability vector with every entry at least `floor / len` before
/// normalization, so (A) holds comfortably.
pub fn random_simplex<R: Rng>(rng: &mut R, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| floor + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / s).collect();
    // push the rounding residue into the largest entry
    let resid = 1.0 - v.iter().sum::<f64>();
    let k = (0..len).fold(0, |b, i| if v[i] > v[b] { i } else { b });
    v[k] += resid;
    v
}

/// Raw parameters of a discrete model, kept for the oracles.
#[derive(Clone, Debug)]
pub struct RawDiscrete {
    pub trans: Vec<Vec<f64>>,
    pub table: Vec<Vec<f64>>,
}

impl RawDiscrete {
    pub fn random<R: Rng>(rng: &mut R, classes: usize, alphabet: usize, floor: f64) -> Self {
        let trans = (0..classes).map(|_| random_simplex(rng, classes, floor)).collect();
        let table = (0..classes).map(|_| random_simplex(rng, alphabet, floor)).collect();
        Self { trans, table }
    }

    pub fn model(&self) -> HiddenMarkovModel {
        HiddenMarkovModel::new(
            TransitionMatrix::new(self.trans.clone()).unwrap(),
            EmissionModel::discrete(self.table.clone()).unwrap(),
            None,
        )
        .unwrap()
    }

    pub fn classes(&self) -> usize {
        self.trans.len()
    }

    pub fn alphabet(&self) -> usize {
        self.table[0].len()
    }
}

/// Random model with `2..=max_classes` classes and `2..=max_alphabet` symbols.
pub fn random_discrete<R: Rng>(rng: &mut R, max_classes: usize, max_alphabet: usize) -> RawDiscrete {
    let m = rng.random_range(2..=max_classes);
    let k = rng.random_range(2..=max_alphabet);
    let floor = [0.02, 0.1, 0.5][rng.random_range(0..3)];
    RawDiscrete::random(rng, m, k, floor)
}

/// Conditional distribution of `Y_target` given observations at the offsets
/// of `observed` and an optional clamped state, in a model started at
/// `start_time` with `Y_start_time ~ start`. Enumerates every label path.
pub fn brute_conditional(
    raw: &RawDiscrete,
    start_time: i64,
    start: &[f64],
    observed: &BTreeMap<i64, usize>,
    anchor: Option<(i64, usize)>,
    target: i64,
) -> Option<Vec<f64>> {
    let m = raw.classes();
    let mut end = target.max(0);
    if let Some((&t, _)) = observed.iter().next_back() {
        end = end.max(t);
    }
    if let Some((t, _)) = anchor {
        end = end.max(t);
    }
    let len = (end - start_time + 1) as usize;
    let mut joint = vec![0.0; m];
    let mut path = vec![0usize; len];
    let total = m.pow(len as u32);
    for code in 0..total {
        let mut c = code;
        for slot in path.iter_mut() {
            *slot = c % m;
            c /= m;
        }
        if let Some((t, a)) = anchor {
            if path[(t - start_time) as usize] != a {
                continue;
            }
        }
        let mut p = start[path[0]];
        for s in 1..len {
            p *= raw.trans[path[s - 1]][path[s]];
        }
        for (&t, &x) in observed {
            p *= raw.table[path[(t - start_time) as usize]][x];
        }
        joint[path[(target - start_time) as usize]] += p;
    }
    let z: f64 = joint.iter().sum();
    if z == 0.0 {
        return None;
    }
    Some(joint.iter().map(|p| p / z).collect())
}

/// Exact Bayes risk by enumerating windows and, inside each window, all label
/// paths of the window's length.
pub fn brute_risk(raw: &RawDiscrete, l: usize, start: &[f64]) -> f64 {
    let m = raw.classes();
    let k = raw.alphabet();
    let len = l + 1;
    let mut risk = 0.0;
    for wcode in 0..k.pow(len as u32) {
        let window: Vec<usize> = (0..len).map(|i| (wcode / k.pow(i as u32)) % k).collect();
        let mut joint = vec![0.0; m];
        for pcode in 0..m.pow(len as u32) {
            let path: Vec<usize> = (0..len).map(|i| (pcode / m.pow(i as u32)) % m).collect();
            let mut p = start[path[0]] * raw.table[path[0]][window[0]];
            for s in 1..len {
                p *= raw.trans[path[s - 1]][path[s]] * raw.table[path[s]][window[s]];
            }
            joint[path[len - 1]] += p;
        }
        let total: f64 = joint.iter().sum();
        let best = joint.iter().copied().fold(0.0, f64::max);
        risk += total - best;
    }
    risk
}

pub fn symbols(observed: &BTreeMap<i64, usize>) -> BTreeMap<i64, Observation> {
    observed.iter().map(|(&t, &x)| (t, Observation::Symbol(x))).collect()
}

pub fn random_subset<R: Rng>(rng: &mut R, m: usize) -> Vec<ClassLabel> {
    (0..m).filter(|_| rng.random_bool(0.5)).map(ClassLabel).collect()
}

/// `dist * P^k`.
pub fn propagate_k(raw: &RawDiscrete, dist: &[f64], k: usize) -> Vec<f64> {
    let m = raw.classes();
    let mut d = dist.to_vec();
    for _ in 0..k {
        let mut next = vec![0.0; m];
        for (i, di) in d.iter().enumerate() {
            for (j, slot) in next.iter_mut().enumerate() {
                *slot += di * raw.trans[i][j];
            }
        }
        d = next;
    }
    d
}
