//! Hidden Markov model definition: transition matrix, class-conditional
//! emission densities and the distribution of the earliest hidden state.
//!
//! The reference measure of the emission densities is implied by the
//! emission variant: counting measure for [`EmissionModel::Discrete`],
//! Lebesgue measure on `R^d` for [`EmissionModel::Gaussian`].

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for row sums of stochastic matrices and probability vectors.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Index of a class (hidden state) in `{0, .., |M| - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(pub usize);

impl ClassLabel {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single observable value.
#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    /// Symbol of a finite alphabet.
    Symbol(usize),
    /// Point of `R^d`.
    Vector(Vec<f64>),
}

impl Observation {
    /// Appends the Euclidean coordinates of the observation. Symbols map to
    /// a single coordinate equal to their index.
    pub fn push_coords(&self, out: &mut Vec<f64>) {
        match self {
            Observation::Symbol(s) => out.push(*s as f64),
            Observation::Vector(v) => out.extend_from_slice(v),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.push_coords(&mut out);
        out
    }
}

fn check_probability_vector(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidModel(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidModel(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Row-stochastic `m x m` matrix of the hidden chain, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    states: usize,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    strictly_positive: bool,
}

impl TransitionMatrix {
    /// Builds the matrix from its rows. Rows must sum to one within
    /// [`STOCHASTIC_TOL`]; they are never renormalized.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let states = rows.len();
        if states < 2 {
            return Err(Error::InvalidModel(format!("need at least 2 states, got {states}")));
        }
        let mut probs = Vec::with_capacity(states * states);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != states {
                return Err(Error::InvalidModel(format!(
                    "transition row {i} has {} entries, expected {states}",
                    row.len()
                )));
            }
            check_probability_vector(row, &format!("transition row {i}"))?;
            probs.extend_from_slice(row);
        }
        let log_probs = probs.iter().map(|&p| ln(p)).collect();
        let strictly_positive = probs.iter().all(|&p| p > 0.0);
        Ok(Self { states, probs, log_probs, strictly_positive })
    }

    /// Matrix with every entry equal to `1/m`: i.i.d. labels.
    pub fn uniform(states: usize) -> Result<Self> {
        Self::new(vec![vec![1.0 / states as f64; states]; states])
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.probs[from * self.states + to]
    }

    #[inline]
    pub fn ln_get(&self, from: usize, to: usize) -> f64 {
        self.log_probs[from * self.states + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.probs[from * self.states..(from + 1) * self.states]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.states).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    /// One step of the chain applied to a distribution: `dist * P`.
    pub fn propagate(&self, dist: &[f64]) -> Vec<f64> {
        let m = self.states;
        let mut out = vec![0.0; m];
        for (i, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.row(i)) {
                *o += w * p;
            }
        }
        out
    }
}

/// Finite-alphabet emissions: `table[y][x] = P(X = x | Y = y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteEmission {
    classes: usize,
    alphabet_size: usize,
    table: Vec<f64>,
    log_table: Vec<f64>,
}

impl DiscreteEmission {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let classes = table.len();
        let alphabet_size = table.first().map_or(0, Vec::len);
        if classes == 0 || alphabet_size == 0 {
            return Err(Error::InvalidModel("empty emission table".into()));
        }
        let mut flat = Vec::with_capacity(classes * alphabet_size);
        for (y, row) in table.iter().enumerate() {
            if row.len() != alphabet_size {
                return Err(Error::InvalidModel(format!(
                    "emission row {y} has {} entries, expected {alphabet_size}",
                    row.len()
                )));
            }
            check_probability_vector(row, &format!("emission row {y}"))?;
            flat.extend_from_slice(row);
        }
        let log_table = flat.iter().map(|&p| ln(p)).collect();
        Ok(Self { classes, alphabet_size, table: flat, log_table })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    #[inline]
    pub fn prob(&self, class: usize, symbol: usize) -> f64 {
        self.table[class * self.alphabet_size + symbol]
    }

    #[inline]
    pub fn ln_prob(&self, class: usize, symbol: usize) -> f64 {
        self.log_table[class * self.alphabet_size + symbol]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.table.chunks(self.alphabet_size).map(<[f64]>::to_vec).collect()
    }
}

/// Multivariate normal emissions with class-specific means and one shared
/// covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianEmission {
    means: Vec<DVector<f64>>,
    covariance: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianEmission {
    pub fn new(means: Vec<Vec<f64>>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let dim = covariance.len();
        if dim == 0 || means.is_empty() {
            return Err(Error::InvalidModel("empty gaussian emission".into()));
        }
        if covariance.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidModel("covariance is not square".into()));
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| covariance[i][j]);
        for i in 0..dim {
            for j in 0..i {
                let scale = cov[(i, j)].abs().max(cov[(j, i)].abs()).max(1.0);
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidModel("covariance is not symmetric".into()));
                }
            }
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidModel("covariance is not positive definite".into()))?
            .l();
        let mut means_v = Vec::with_capacity(means.len());
        for (y, m) in means.into_iter().enumerate() {
            if m.len() != dim {
                return Err(Error::InvalidModel(format!(
                    "mean of class {y} has dimension {}, expected {dim}",
                    m.len()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("mean of class {y} is not finite")));
            }
            means_v.push(DVector::from_vec(m));
        }
        let log_det: f64 = (0..dim).map(|i| chol[(i, i)].ln()).sum::<f64>() * 2.0;
        let log_norm = -0.5 * (dim as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self { means: means_v, covariance: cov, chol, log_norm })
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        self.means.iter().map(|m| m.iter().copied().collect()).collect()
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.covariance[(i, j)]).collect()).collect()
    }

    /// `log f_class(x)` for a point already checked to have the right dimension.
    fn ln_density_unchecked(&self, class: usize, x: &[f64]) -> f64 {
        let diff = DVector::from_iterator(
            x.len(),
            x.iter().zip(self.means[class].iter()).map(|(a, b)| a - b),
        );
        let z = self
            .chol
            .solve_lower_triangular(&diff)
            .expect("cholesky factor has a positive diagonal");
        self.log_norm - 0.5 * z.norm_squared()
    }

    fn sample<R: Rng + ?Sized>(&self, class: usize, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let x = &self.means[class] + &self.chol * z;
        x.iter().copied().collect()
    }
}

/// Which kind of values the observables take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservationSpace {
    Discrete { alphabet_size: usize },
    Continuous { dim: usize },
}

impl ObservationSpace {
    /// Number of Euclidean coordinates of one observation.
    pub fn coord_len(self) -> usize {
        match self {
            ObservationSpace::Discrete { .. } => 1,
            ObservationSpace::Continuous { dim } => dim,
        }
    }
}

/// Class-conditional densities `f_y` of the observables.
#[derive(Clone, Debug, PartialEq)]
pub enum EmissionModel {
    Discrete(DiscreteEmission),
    Gaussian(GaussianEmission),
}

impl EmissionModel {
    pub fn discrete(table: Vec<Vec<f64>>) -> Result<Self> {
        DiscreteEmission::new(table).map(Self::Discrete)
    }

    pub fn gaussian(means: Vec<Vec<f64>>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        GaussianEmission::new(means, covariance).map(Self::Gaussian)
    }

    pub fn classes(&self) -> usize {
        match self {
            EmissionModel::Discrete(d) => d.classes,
            EmissionModel::Gaussian(g) => g.means.len(),
        }
    }

    pub fn space(&self) -> ObservationSpace {
        match self {
            EmissionModel::Discrete(d) => ObservationSpace::Discrete { alphabet_size: d.alphabet_size },
            EmissionModel::Gaussian(g) => ObservationSpace::Continuous { dim: g.dim() },
        }
    }

    /// Gaussian densities are positive everywhere; discrete ones iff every
    /// table entry is.
    pub fn strictly_positive(&self) -> bool {
        match self {
            EmissionModel::Discrete(d) => d.table.iter().all(|&p| p > 0.0),
            EmissionModel::Gaussian(_) => true,
        }
    }

    pub fn check(&self, x: &Observation) -> Result<()> {
        match (self, x) {
            (EmissionModel::Discrete(d), Observation::Symbol(s)) => {
                if *s < d.alphabet_size {
                    Ok(())
                } else {
                    Err(Error::InvalidObservation(format!(
                        "symbol {s} outside alphabet of size {}",
                        d.alphabet_size
                    )))
                }
            }
            (EmissionModel::Gaussian(g), Observation::Vector(v)) => {
                if v.len() != g.dim() {
                    Err(Error::DimensionMismatch { expected: g.dim(), got: v.len() })
                } else if v.iter().any(|c| !c.is_finite()) {
                    Err(Error::InvalidObservation("non-finite coordinate".into()))
                } else {
                    Ok(())
                }
            }
            (EmissionModel::Discrete(_), Observation::Vector(_)) => {
                Err(Error::InvalidObservation("vector given to a discrete emission".into()))
            }
            (EmissionModel::Gaussian(_), Observation::Symbol(_)) => {
                Err(Error::InvalidObservation("symbol given to a gaussian emission".into()))
            }
        }
    }

    /// `log f_class(x)`; `-inf` only for zero entries of a discrete table.
    pub fn log_density(&self, class: ClassLabel, x: &Observation) -> Result<f64> {
        if class.0 >= self.classes() {
            return Err(Error::LabelOutOfRange { label: class.0, classes: self.classes() });
        }
        self.check(x)?;
        Ok(self.ln_density_at(class.0, x))
    }

    /// Log densities of `x` under every class.
    pub fn log_densities(&self, x: &Observation) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok((0..self.classes()).map(|y| self.ln_density_at(y, x)).collect())
    }

    pub(crate) fn ln_density_at(&self, class: usize, x: &Observation) -> f64 {
        match (self, x) {
            (EmissionModel::Discrete(d), Observation::Symbol(s)) => d.ln_prob(class, *s),
            (EmissionModel::Gaussian(g), Observation::Vector(v)) => g.ln_density_unchecked(class, v),
            _ => unreachable!("observation checked against emission space"),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, class: usize, samplers: &[WeightedIndex<f64>], rng: &mut R) -> Observation {
        match self {
            EmissionModel::Discrete(_) => Observation::Symbol(samplers[class].sample(rng)),
            EmissionModel::Gaussian(g) => Observation::Vector(g.sample(class, rng)),
        }
    }
}

/// Stationary distribution of a row-stochastic matrix.
///
/// Solves `pi (I - P) = 0` together with `sum(pi) = 1` by SVD of the
/// augmented `(m+1) x m` system; a rank below `m` means the invariant
/// measure is not unique.
pub fn stationary_distribution(transition: &TransitionMatrix) -> Result<Vec<f64>> {
    let m = transition.states();
    let mut a = DMatrix::<f64>::zeros(m + 1, m);
    for i in 0..m {
        for j in 0..m {
            // row j of (P^T - I)
            a[(j, i)] = transition.get(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        a[(m, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m + 1);
    b[m] = 1.0;

    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1.0);
    let rank = svd.rank(tol);
    if rank < m {
        return Err(Error::NonUniqueStationary { rank, states: m });
    }
    let sol = svd.solve(&b, tol).map_err(|e| Error::InvalidModel(e.to_string()))?;
    let mut pi: Vec<f64> = sol.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= total;
    }
    Ok(pi)
}

/// A fully specified hidden Markov model.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenMarkovModel {
    transition: TransitionMatrix,
    emission: EmissionModel,
    initial: Vec<f64>,
    stationary: Result<Vec<f64>>,
}

impl HiddenMarkovModel {
    /// `initial` is the distribution of the earliest hidden state; `None`
    /// selects the stationary distribution.
    pub fn new(transition: TransitionMatrix, emission: EmissionModel, initial: Option<Vec<f64>>) -> Result<Self> {
        let m = transition.states();
        if emission.classes() != m {
            return Err(Error::InvalidModel(format!(
                "emission has {} classes, transition has {m} states",
                emission.classes()
            )));
        }
        let stationary = stationary_distribution(&transition);
        let initial = match initial {
            Some(v) => {
                if v.len() != m {
                    return Err(Error::DimensionMismatch { expected: m, got: v.len() });
                }
                check_probability_vector(&v, "initial distribution")?;
                v
            }
            None => stationary.clone()?,
        };
        Ok(Self { transition, emission, initial, stationary })
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn emission(&self) -> &EmissionModel {
        &self.emission
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn classes(&self) -> usize {
        self.transition.states()
    }

    pub fn stationary(&self) -> Result<&[f64]> {
        self.stationary.as_deref().map_err(Clone::clone)
    }

    /// Resolves an optional start distribution, defaulting to stationary.
    pub(crate) fn start_or_stationary<'a>(&'a self, start: Option<&'a [f64]>) -> Result<&'a [f64]> {
        match start {
            Some(s) => {
                if s.len() != self.classes() {
                    return Err(Error::DimensionMismatch { expected: self.classes(), got: s.len() });
                }
                check_probability_vector(s, "start distribution")?;
                Ok(s)
            }
            None => self.stationary(),
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        let emission = match &self.emission {
            EmissionModel::Discrete(d) => EmissionSpec::Discrete { table: d.rows() },
            EmissionModel::Gaussian(g) => EmissionSpec::Gaussian { means: g.means(), covariance: g.covariance() },
        };
        ModelSpec { transition: self.transition.rows(), emission, initial: Some(self.initial.clone()) }
    }
}

/// JSON document describing a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub transition: Vec<Vec<f64>>,
    pub emission: EmissionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EmissionSpec {
    Discrete { table: Vec<Vec<f64>> },
    Gaussian { means: Vec<Vec<f64>>, covariance: Vec<Vec<f64>> },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn build(&self) -> Result<HiddenMarkovModel> {
        let transition = TransitionMatrix::new(self.transition.clone())?;
        let emission = match &self.emission {
            EmissionSpec::Discrete { table } => EmissionModel::discrete(table.clone())?,
            EmissionSpec::Gaussian { means, covariance } => {
                EmissionModel::gaussian(means.clone(), covariance.clone())?
            }
        };
        HiddenMarkovModel::new(transition, emission, self.initial.clone())
    }
}

/// Observations with their hidden labels, in temporal order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSequence {
    observations: Vec<Observation>,
    labels: Vec<ClassLabel>,
}

impl LabeledSequence {
    pub fn new(observations: Vec<Observation>, labels: Vec<ClassLabel>) -> Result<Self> {
        if observations.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: observations.len(), got: labels.len() });
        }
        Ok(Self { observations, labels })
    }

    /// Checks labels and observations against a model's spaces.
    pub fn validate(&self, classes: usize, space: ObservationSpace) -> Result<()> {
        for l in &self.labels {
            if l.0 >= classes {
                return Err(Error::LabelOutOfRange { label: l.0, classes });
            }
        }
        for x in &self.observations {
            match (space, x) {
                (ObservationSpace::Discrete { alphabet_size }, Observation::Symbol(s)) if *s < alphabet_size => {}
                (ObservationSpace::Continuous { dim }, Observation::Vector(v)) if v.len() == dim => {}
                _ => return Err(Error::InvalidObservation(format!("{x:?}"))),
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }
}

/// Draws labels and observations from a model. Built once, reused for many
/// draws.
pub struct Sampler<'a> {
    model: &'a HiddenMarkovModel,
    start: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
    emit: Vec<WeightedIndex<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(model: &'a HiddenMarkovModel, start: &[f64]) -> Result<Self> {
        let weighted = |w: &[f64]| WeightedIndex::new(w.iter().copied()).map_err(|e| Error::InvalidModel(e.to_string()));
        let start = weighted(start)?;
        let rows = (0..model.classes())
            .map(|i| weighted(model.transition.row(i)))
            .collect::<Result<Vec<_>>>()?;
        let emit = match &model.emission {
            EmissionModel::Discrete(d) => d.table.chunks(d.alphabet_size).map(weighted).collect::<Result<Vec<_>>>()?,
            EmissionModel::Gaussian(_) => Vec::new(),
        };
        Ok(Self { model, start, rows, emit })
    }

    pub fn first_label<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.start.sample(rng)
    }

    pub fn next_label<R: Rng + ?Sized>(&self, from: usize, rng: &mut R) -> usize {
        self.rows[from].sample(rng)
    }

    pub fn observe<R: Rng + ?Sized>(&self, class: usize, rng: &mut R) -> Observation {
        self.model.emission.sample(class, &self.emit, rng)
    }

    /// Fills `labels` and `observations` with a fresh path of their length.
    pub fn fill_path<R: Rng + ?Sized>(&self, labels: &mut [usize], observations: &mut Vec<Observation>, rng: &mut R) {
        observations.clear();
        let mut prev = None;
        for slot in labels.iter_mut() {
            let y = match prev {
                None => self.first_label(rng),
                Some(p) => self.next_label(p, rng),
            };
            *slot = y;
            observations.push(self.observe(y, rng));
            prev = Some(y);
        }
    }
}

/// Simulates `length` steps of the model starting from its `initial`
/// distribution. Identical seeds give identical sequences.
pub fn simulate(model: &HiddenMarkovModel, length: usize, seed: u64) -> Result<LabeledSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with(model, length, model.initial(), &mut rng)
}

pub fn simulate_with<R: Rng + ?Sized>(
    model: &HiddenMarkovModel,
    length: usize,
    start: &[f64],
    rng: &mut R,
) -> Result<LabeledSequence> {
    if length == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    let sampler = Sampler::new(model, start)?;
    let mut labels = vec![0usize; length];
    let mut observations = Vec::with_capacity(length);
    sampler.fill_path(&mut labels, &mut observations, rng);
    LabeledSequence::new(observations, labels.into_iter().map(ClassLabel).collect())
}

/// Outcome of checking strict positivity of transitions and densities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssumptionReport {
    pub holds: bool,
    pub violations: Vec<String>,
}

/// Checks that every transition probability and every emission density is
/// strictly positive. Zero entries are listed by name.
pub fn validate_assumption_a(model: &HiddenMarkovModel) -> AssumptionReport {
    let m = model.classes();
    let mut violations = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if model.transition.get(i, j) <= 0.0 {
                violations.push(format!("p_{{{i}{j}}}=0"));
            }
        }
    }
    if let EmissionModel::Discrete(d) = &model.emission {
        for y in 0..m {
            for x in 0..d.alphabet_size {
                if d.prob(y, x) <= 0.0 {
                    violations.push(format!("f_{y}({x})=0"));
                }
            }
        }
    }
    AssumptionReport { holds: violations.is_empty(), violations }
}
