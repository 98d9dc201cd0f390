//! The simulation study: three 4-class models with 3-D Gaussian emissions,
//! kernel-rule error rates for memory 0 and 1 at three training sizes.

use hmmem::{
    derive_seed, simulate, EmissionModel, HiddenMarkovModel, KernelClassifier, KernelKind, KernelSpec, Provenance,
    Result, TrainingSequence, TransitionMatrix,
};
use rayon::prelude::*;

use crate::table::{Cell, ResultTable};

pub const SIMS: [usize; 3] = [1, 2, 3];
pub const MEMORIES: [usize; 2] = [0, 1];
pub const TRAIN_SIZES: [usize; 3] = [100, 300, 500];

/// Reference error rates, indexed `[sim - 1][l][n index]`.
pub const REFERENCE: [[[f64; 3]; 2]; 3] = [
    [[0.03, 0.03, 0.03], [0.01, 0.03, 0.02]],
    [[0.21, 0.19, 0.21], [0.05, 0.05, 0.04]],
    [[0.30, 0.28, 0.31], [0.34, 0.33, 0.30]],
];

/// Model of simulation 1, 2 or 3. Panics on other numbers.
pub fn sim_model(sim: usize) -> HiddenMarkovModel {
    let transition = match sim {
        1 | 2 => TransitionMatrix::new(vec![
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.3, 0.7, 0.0, 0.0],
            vec![0.7, 0.3, 0.0, 0.0],
        ]),
        3 => TransitionMatrix::uniform(4),
        _ => panic!("no simulation {sim}"),
    }
    .expect("valid chain");
    let means = match sim {
        1 => vec![vec![0.0, 0.0, 0.0], vec![4.0, 0.0, 0.0], vec![3.9, 3.9, 0.0], vec![0.0, 3.9, 0.0]],
        _ => vec![vec![0.0, 0.0, 0.0], vec![4.0, 0.0, 0.0], vec![4.0, 4.0, 0.0], vec![3.8, 3.8, 0.0]],
    };
    let identity = (0..3).map(|i| (0..3).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let emission = EmissionModel::gaussian(means, identity).expect("valid emission");
    HiddenMarkovModel::new(transition, emission, None).expect("valid model")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimTableOptions {
    pub seed: u64,
    pub test_windows: usize,
    pub replicates: usize,
    pub bandwidth: f64,
    pub kernel: KernelKind,
}

impl Default for SimTableOptions {
    fn default() -> Self {
        Self { seed: 0, test_windows: 10_000, replicates: 5, bandwidth: 1.0, kernel: KernelKind::Gaussian }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimCell {
    pub sim: usize,
    pub l: usize,
    pub n: usize,
    pub replicates: Vec<f64>,
    pub median: f64,
    pub reference: f64,
}

/// Error rate of one replicate: train on `n` windows, test on
/// `test_windows` windows of an independent sequence.
pub fn replicate_error(sim: usize, l: usize, n: usize, rep: usize, opts: &SimTableOptions) -> Result<f64> {
    let model = sim_model(sim);
    let tags = [sim as u64, l as u64, n as u64, rep as u64];
    let train_seed = derive_seed(opts.seed, &[tags[0], tags[1], tags[2], tags[3], 0]);
    let test_seed = derive_seed(opts.seed, &[tags[0], tags[1], tags[2], tags[3], 1]);
    let train = simulate(&model, n + l, train_seed)?;
    let test = simulate(&model, opts.test_windows + l, test_seed)?;
    let training = TrainingSequence::new(train, Provenance::Simulated { seed: train_seed });
    let clf = KernelClassifier::new(&training, l, opts.bandwidth, KernelSpec::new(opts.kernel), 4)?;
    Ok(clf.empirical_risk(&test)?.value)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// All 18 cells in `(sim, l, n)` order. Replicates run concurrently; the
/// result does not depend on the thread count.
pub fn sim_table_cells(opts: &SimTableOptions) -> Result<Vec<SimCell>> {
    let mut jobs = Vec::new();
    for (si, &sim) in SIMS.iter().enumerate() {
        for &l in &MEMORIES {
            for (ni, &n) in TRAIN_SIZES.iter().enumerate() {
                for rep in 0..opts.replicates {
                    jobs.push((si, sim, l, ni, n, rep));
                }
            }
        }
    }
    let errors = jobs
        .par_iter()
        .map(|&(_, sim, l, _, n, rep)| replicate_error(sim, l, n, rep, opts))
        .collect::<Result<Vec<f64>>>()?;
    Ok(jobs
        .chunks(opts.replicates)
        .zip(errors.chunks(opts.replicates))
        .map(|(job, errs)| {
            let (si, sim, l, ni, n, _) = job[0];
            SimCell { sim, l, n, replicates: errs.to_vec(), median: median(errs), reference: REFERENCE[si][l][ni] }
        })
        .collect())
}

pub fn sim_table(cells: &[SimCell], opts: &SimTableOptions) -> ResultTable {
    let mut t = ResultTable::new(["sim", "l", "n", "median_error", "min_error", "max_error", "reference"]);
    for c in cells {
        let lo = c.replicates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.replicates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        t.push(vec![
            c.sim.into(),
            c.l.into(),
            c.n.into(),
            Cell::Float(c.median),
            Cell::Float(lo),
            Cell::Float(hi),
            Cell::Float(c.reference),
        ]);
    }
    t.meta("bandwidth", opts.bandwidth);
    t.meta("kernel", opts.kernel);
    t.meta("replicates", opts.replicates);
    t.meta("test_windows", opts.test_windows);
    t
}

/// The table in grid form, with reference values.
pub fn sim_table_summary(cells: &[SimCell]) -> String {
    let mut out = String::from("sim  l     n=100          n=300          n=500\n");
    for chunk in cells.chunks(TRAIN_SIZES.len()) {
        out.push_str(&format!("{:>3} {:>2}", chunk[0].sim, chunk[0].l));
        for c in chunk {
            out.push_str(&format!("  {:.3} ({:.2})", c.median, c.reference));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmmem::validate_assumption_a;

    #[test]
    fn models() {
        for sim in SIMS {
            let m = sim_model(sim);
            let pi = m.stationary().unwrap();
            for p in pi {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
        let report = validate_assumption_a(&sim_model(2));
        assert!(!report.holds);
        assert!(report.violations.iter().any(|v| v == "p_{00}=0"));
        assert!(validate_assumption_a(&sim_model(3)).holds);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_table_is_deterministic() {
        let opts = SimTableOptions { test_windows: 200, replicates: 2, ..Default::default() };
        let a = sim_table_cells(&opts).unwrap();
        assert_eq!(a.len(), 18);
        assert_eq!(a, sim_table_cells(&opts).unwrap());
        assert_eq!((a[4].sim, a[4].l, a[4].n), (1, 1, 300));
        assert_eq!(a[7].reference, 0.19);
    }
}
