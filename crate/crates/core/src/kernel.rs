//! Kernel classification rules with memory.
//!
//! A query window `(x_{-l}, .., x_0)` is compared with every training window
//! `(X'_i, .., X'_{i+l})` (stride one, overlapping). Each training window
//! votes for its last label `Y'_{i+l}` with weight `K((query - window) / h)`,
//! using the Euclidean norm on the concatenated coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassLabel, LabeledSequence, Observation};
use crate::posterior::{argmax_lowest, ObservationWindow, RiskEstimate, RiskMethod};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `exp(-|z|^2 / 2)`; unbounded support.
    #[serde(alias = "normal")]
    Gaussian,
    /// `1{|z| <= 1}`.
    Box,
    /// `(1 - |z|^2)_+`.
    Epanechnikov,
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Box => "box",
            Self::Epanechnikov => "epanechnikov",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "box" => Ok(Self::Box),
            "epanechnikov" => Ok(Self::Epanechnikov),
            other => Err(Error::InvalidArgument(format!("unknown kernel {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Regularity {
    pub t0: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        Self { kind }
    }

    pub fn support_radius(&self) -> f64 {
        match self.kind {
            KernelKind::Gaussian => f64::INFINITY,
            KernelKind::Box | KernelKind::Epanechnikov => 1.0,
        }
    }

    /// Floor constants `(t0, c)` with `K(z) >= c` for `|z| <= t0`, present
    /// only for bounded-support kernels.
    pub fn regularity(&self) -> Option<Regularity> {
        match self.kind {
            KernelKind::Gaussian => None,
            KernelKind::Box => Some(Regularity { t0: 1.0, c: 1.0 }),
            KernelKind::Epanechnikov => Some(Regularity { t0: 0.5, c: 0.75 }),
        }
    }

    pub fn is_regular(&self) -> bool {
        self.regularity().is_some()
    }

    pub fn value(&self, sq_norm: f64) -> f64 {
        self.log_value(sq_norm).exp()
    }

    /// `log K(z)` as a function of `|z|^2`.
    #[inline]
    pub fn log_value(&self, sq_norm: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => -0.5 * sq_norm,
            KernelKind::Box => {
                if sq_norm <= 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            KernelKind::Epanechnikov => {
                if sq_norm < 1.0 {
                    (1.0 - sq_norm).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Simulated { seed: u64 },
    Ingested,
}

/// Labeled training stream of length `n + l`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSequence {
    pub sequence: LabeledSequence,
    pub provenance: Provenance,
}

impl TrainingSequence {
    pub fn new(sequence: LabeledSequence, provenance: Provenance) -> Self {
        Self { sequence, provenance }
    }
}

fn flatten(observations: &[Observation]) -> Result<(Vec<f64>, usize)> {
    let mut flat = Vec::new();
    let mut width = None;
    for x in observations {
        let before = flat.len();
        x.push_coords(&mut flat);
        let w = flat.len() - before;
        match width {
            None => width = Some(w),
            Some(d) if d != w => return Err(Error::DimensionMismatch { expected: d, got: w }),
            _ => {}
        }
    }
    Ok((flat, width.unwrap_or(0)))
}

#[derive(Clone, Debug)]
pub struct KernelClassifier {
    memory: usize,
    bandwidth: f64,
    kernel: KernelSpec,
    classes: usize,
    coord_len: usize,
    /// `n` training windows, each `(l + 1) * coord_len` coordinates.
    windows: Vec<f64>,
    labels: Vec<usize>,
    majority: usize,
}

impl KernelClassifier {
    pub fn new(training: &TrainingSequence, memory: usize, bandwidth: f64, kernel: KernelSpec, classes: usize) -> Result<Self> {
        let seq = &training.sequence;
        if seq.len() < memory + 1 {
            return Err(Error::InvalidArgument(format!(
                "training sequence of length {} is too short for memory {memory}",
                seq.len()
            )));
        }
        let (flat, d) = flatten(seq.observations())?;
        let n = seq.len() - memory;
        let span = (memory + 1) * d;
        let mut windows = Vec::with_capacity(n * span);
        for i in 0..n {
            windows.extend_from_slice(&flat[i * d..i * d + span]);
        }
        let labels = seq.labels()[memory..].iter().map(|c| c.0).collect();
        Self::from_parts(windows, labels, memory, d, bandwidth, kernel, classes)
    }

    /// Builds a classifier from explicit training windows, each given as
    /// `l + 1` observations oldest first together with its voting label.
    pub fn from_windows(
        windows: &[(Vec<Observation>, ClassLabel)],
        bandwidth: f64,
        kernel: KernelSpec,
        classes: usize,
    ) -> Result<Self> {
        let Some((first, _)) = windows.first() else {
            return Err(Error::InvalidArgument("no training windows".into()));
        };
        let memory = first.len().checked_sub(1).ok_or_else(|| Error::InvalidArgument("empty training window".into()))?;
        let mut flat = Vec::new();
        let mut labels = Vec::with_capacity(windows.len());
        let mut d = 0;
        for (obs, label) in windows {
            if obs.len() != memory + 1 {
                return Err(Error::WindowLengthMismatch { expected: memory + 1, got: obs.len() });
            }
            let (f, w) = flatten(obs)?;
            if d == 0 {
                d = w;
            } else if w != d {
                return Err(Error::DimensionMismatch { expected: d, got: w });
            }
            flat.extend(f);
            labels.push(label.0);
        }
        Self::from_parts(flat, labels, memory, d, bandwidth, kernel, classes)
    }

    fn from_parts(
        windows: Vec<f64>,
        labels: Vec<usize>,
        memory: usize,
        coord_len: usize,
        bandwidth: f64,
        kernel: KernelSpec,
        classes: usize,
    ) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let mut counts = vec![0usize; classes];
        for &y in &labels {
            if y >= classes {
                return Err(Error::LabelOutOfRange { label: y, classes });
            }
            counts[y] += 1;
        }
        let majority = counts.iter().enumerate().fold(0, |b, (i, &c)| if c > counts[b] { i } else { b });
        Ok(Self { memory, bandwidth, kernel, classes, coord_len, windows, labels, majority })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// Number of training windows `n`.
    pub fn training_windows(&self) -> usize {
        self.labels.len()
    }

    /// Most frequent voting label; the answer when no training window has
    /// positive weight.
    pub fn majority(&self) -> ClassLabel {
        ClassLabel(self.majority)
    }

    fn span(&self) -> usize {
        (self.memory + 1) * self.coord_len
    }

    fn classify_coords(&self, query: &[f64], log_w: &mut Vec<f64>) -> usize {
        let inv_h2 = 1.0 / (self.bandwidth * self.bandwidth);
        log_w.clear();
        let mut max = f64::NEG_INFINITY;
        for w in self.windows.chunks_exact(self.span()) {
            let sq: f64 = query.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
            let lk = self.kernel.log_value(sq * inv_h2);
            max = max.max(lk);
            log_w.push(lk);
        }
        if max == f64::NEG_INFINITY {
            return self.majority;
        }
        let mut scores = vec![0.0; self.classes];
        for (lk, &y) in log_w.iter().zip(&self.labels) {
            scores[y] += (lk - max).exp();
        }
        argmax_lowest(&scores)
    }

    pub fn classify(&self, window: &ObservationWindow) -> Result<ClassLabel> {
        if window.points().len() != self.memory + 1 {
            return Err(Error::WindowLengthMismatch { expected: self.memory + 1, got: window.points().len() });
        }
        let (q, d) = flatten(window.points())?;
        if d != self.coord_len {
            return Err(Error::DimensionMismatch { expected: self.coord_len, got: d });
        }
        Ok(ClassLabel(self.classify_coords(&q, &mut Vec::with_capacity(self.labels.len()))))
    }

    /// Misclassification frequency over every length-`l + 1` window of `test`,
    /// scored against the label at the window end.
    pub fn empirical_risk(&self, test: &LabeledSequence) -> Result<RiskEstimate> {
        if test.len() < self.memory + 1 {
            return Err(Error::InvalidArgument(format!(
                "test sequence of length {} is too short for memory {}",
                test.len(),
                self.memory
            )));
        }
        let (flat, d) = flatten(test.observations())?;
        if d != self.coord_len {
            return Err(Error::DimensionMismatch { expected: self.coord_len, got: d });
        }
        let n = test.len() - self.memory;
        let span = self.span();
        let labels = test.labels();
        let errors: u64 = (0..n)
            .into_par_iter()
            .map_init(Vec::new, |buf, i| {
                let y = self.classify_coords(&flat[i * d..i * d + span], buf);
                u64::from(y != labels[i + self.memory].0)
            })
            .sum();
        Ok(RiskEstimate::from_counts(errors, n as u64, RiskMethod::MonteCarlo))
    }
}

/// One `(h, risk)` row per bandwidth, all on the same training and test data.
pub fn bandwidth_grid_eval(
    training: &TrainingSequence,
    memory: usize,
    kernel: KernelSpec,
    classes: usize,
    h_values: &[f64],
    test: &LabeledSequence,
) -> Result<Vec<(f64, RiskEstimate)>> {
    if h_values.is_empty() {
        return Err(Error::InvalidArgument("empty bandwidth grid".into()));
    }
    h_values
        .iter()
        .map(|&h| {
            let clf = KernelClassifier::new(training, memory, h, kernel, classes)?;
            Ok((h, clf.empirical_risk(test)?))
        })
        .collect()
}
