//! Crowdsourced label aggregation under the Dawid-Skene model.
//!
//! Worker answers are viewed as one-hot blocks: item j becomes the vector
//! of indicators `1{X_ij = g}` over workers i and classes g, and the center
//! of class h is worker i's confusion row `pi_{h,.}`. Lloyd's iterations in
//! that space alternate empirical confusion estimates with least-squares
//! label assignment; missing answers simply drop out of both steps.

use crate::error::{ClusterError, Result};
use crate::model::trace::Recorder;
use crate::model::{ConvergenceTrace, LabelVector, Reference};

/// m workers x n items of answers. Entries are 1-based class labels, with 0
/// marking a missing answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdTable {
    m: usize,
    n: usize,
    k: usize,
    entries: Vec<u16>,
}

impl CrowdTable {
    /// `entries` is worker-major (`entries[i * n + j]`).
    pub fn new(m: usize, n: usize, k: usize, entries: Vec<u16>) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(ClusterError::InvalidParameter(
                "crowd table needs at least one worker, item and class".into(),
            ));
        }
        if k > u16::MAX as usize {
            return Err(ClusterError::InvalidParameter(format!("too many classes: {k}")));
        }
        if entries.len() != m * n {
            return Err(ClusterError::LengthMismatch {
                expected: m * n,
                got: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&x| x as usize > k) {
            return Err(ClusterError::LabelOutOfRange {
                label: bad as usize,
                k,
            });
        }
        Ok(Self { m, n, k, entries })
    }

    pub fn workers(&self) -> usize {
        self.m
    }

    pub fn items(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    /// Raw entry: 0 for missing, otherwise the 1-based label.
    pub fn raw(&self, worker: usize, item: usize) -> u16 {
        self.entries[worker * self.n + item]
    }

    /// 0-based class answered by `worker` for `item`, if observed.
    pub fn answer(&self, worker: usize, item: usize) -> Option<usize> {
        match self.raw(worker, item) {
            0 => None,
            x => Some(x as usize - 1),
        }
    }

    pub fn observed_count(&self) -> usize {
        self.entries.iter().filter(|&&x| x != 0).count()
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }
}

/// `pi[i][g][h]`: probability that worker i answers h when the truth is g.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionTensor {
    m: usize,
    k: usize,
    probs: Vec<f64>,
    /// `(worker, true class)` rows that had no observations and were set to
    /// the uniform distribution.
    pub degenerate_rows: Vec<(usize, usize)>,
}

impl ConfusionTensor {
    /// `rows[i][g]` is the answer distribution of worker i for truth g; each
    /// must be a probability vector.
    pub fn new(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let m = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(ClusterError::InvalidParameter("empty confusion tensor".into()));
        }
        let mut probs = Vec::with_capacity(m * k * k);
        for (i, worker) in rows.iter().enumerate() {
            if worker.len() != k {
                return Err(ClusterError::LengthMismatch {
                    expected: k,
                    got: worker.len(),
                });
            }
            for (g, row) in worker.iter().enumerate() {
                if row.len() != k {
                    return Err(ClusterError::LengthMismatch {
                        expected: k,
                        got: row.len(),
                    });
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(ClusterError::InvalidParameter(format!(
                        "confusion row (worker {i}, class {g}) is not a probability vector"
                    )));
                }
                probs.extend_from_slice(row);
            }
        }
        Ok(Self {
            m,
            k,
            probs,
            degenerate_rows: Vec::new(),
        })
    }

    /// Every worker answers correctly with probability `accuracy` and
    /// spreads the rest evenly over the other classes.
    pub fn one_coin(m: usize, k: usize, accuracy: f64) -> Result<Self> {
        if k < 2 {
            return Err(ClusterError::InvalidParameter("one-coin model needs k >= 2".into()));
        }
        let off = (1.0 - accuracy) / (k - 1) as f64;
        let worker: Vec<Vec<f64>> = (0..k)
            .map(|g| (0..k).map(|h| if g == h { accuracy } else { off }).collect())
            .collect();
        Self::new(&vec![worker; m])
    }

    pub fn workers(&self) -> usize {
        self.m
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, worker: usize, truth: usize, answer: usize) -> f64 {
        self.probs[(worker * self.k + truth) * self.k + answer]
    }

    pub fn row(&self, worker: usize, truth: usize) -> &[f64] {
        let start = (worker * self.k + truth) * self.k;
        &self.probs[start..start + self.k]
    }
}

/// Majority vote over observed answers; ties go to the smallest class.
pub fn majority_vote(table: &CrowdTable) -> Result<LabelVector> {
    let k = table.classes();
    let mut labels = Vec::with_capacity(table.items());
    let mut votes = vec![0usize; k];
    for j in 0..table.items() {
        votes.iter_mut().for_each(|v| *v = 0);
        let mut any = false;
        for i in 0..table.workers() {
            if let Some(h) = table.answer(i, j) {
                votes[h] += 1;
                any = true;
            }
        }
        if !any {
            return Err(ClusterError::NoObservedLabels { item: j });
        }
        let mut best = 0;
        for h in 1..k {
            if votes[h] > votes[best] {
                best = h;
            }
        }
        labels.push(best);
    }
    Ok(LabelVector::from_vec_unchecked(labels, k))
}

fn check_labels(table: &CrowdTable, labels: &LabelVector) -> Result<()> {
    if labels.len() != table.items() {
        return Err(ClusterError::LengthMismatch {
            expected: table.items(),
            got: labels.len(),
        });
    }
    if labels.k() != table.classes() {
        return Err(ClusterError::ClusterCountMismatch {
            left: table.classes(),
            right: labels.k(),
        });
    }
    Ok(())
}

/// Empirical confusion rows: among items currently labeled g that worker i
/// answered, the fraction answered h. Rows with no such items become
/// uniform and are listed in `degenerate_rows`.
pub fn confusion_update(table: &CrowdTable, labels: &LabelVector) -> Result<ConfusionTensor> {
    check_labels(table, labels)?;
    let (m, k) = (table.workers(), table.classes());
    let mut counts = vec![0usize; m * k * k];
    for i in 0..m {
        for (j, &g) in labels.as_slice().iter().enumerate() {
            if let Some(h) = table.answer(i, j) {
                counts[(i * k + g) * k + h] += 1;
            }
        }
    }
    let mut probs = vec![0.0; m * k * k];
    let mut degenerate_rows = Vec::new();
    for i in 0..m {
        for g in 0..k {
            let start = (i * k + g) * k;
            let total: usize = counts[start..start + k].iter().sum();
            for h in 0..k {
                probs[start + h] = if total > 0 {
                    counts[start + h] as f64 / total as f64
                } else {
                    1.0 / k as f64
                };
            }
            if total == 0 {
                degenerate_rows.push((i, g));
            }
        }
    }
    Ok(ConfusionTensor {
        m,
        k,
        probs,
        degenerate_rows,
    })
}

/// Squared distance between item j's one-hot answers and class h's
/// confusion rows, over the workers who answered j.
fn item_cost(table: &CrowdTable, pi: &ConfusionTensor, item: usize, class: usize) -> f64 {
    let k = table.classes();
    let mut cost = 0.0;
    for i in 0..table.workers() {
        let Some(answer) = table.answer(i, item) else {
            continue;
        };
        let row = pi.row(i, class);
        for (g, &p) in row.iter().enumerate().take(k) {
            let indicator = if g == answer { 1.0 } else { 0.0 };
            cost += (indicator - p) * (indicator - p);
        }
    }
    cost
}

fn check_tensor(table: &CrowdTable, pi: &ConfusionTensor) -> Result<()> {
    if pi.workers() != table.workers() {
        return Err(ClusterError::LengthMismatch {
            expected: table.workers(),
            got: pi.workers(),
        });
    }
    if pi.classes() != table.classes() {
        return Err(ClusterError::ClusterCountMismatch {
            left: table.classes(),
            right: pi.classes(),
        });
    }
    Ok(())
}

/// Least-squares label update: each item goes to the class whose confusion
/// rows are nearest to its observed one-hot answers (ties to the smallest
/// class). Missing answers are skipped.
pub fn ls_label_update(table: &CrowdTable, pi: &ConfusionTensor) -> Result<LabelVector> {
    Ok(ls_assign(table, pi)?.0)
}

fn ls_assign(table: &CrowdTable, pi: &ConfusionTensor) -> Result<(LabelVector, f64)> {
    check_tensor(table, pi)?;
    let k = table.classes();
    let mut labels = Vec::with_capacity(table.items());
    let mut objective = 0.0;
    for j in 0..table.items() {
        if (0..table.workers()).all(|i| table.answer(i, j).is_none()) {
            return Err(ClusterError::NoObservedLabels { item: j });
        }
        let mut best = 0;
        let mut best_cost = item_cost(table, pi, j, 0);
        for h in 1..k {
            let c = item_cost(table, pi, j, h);
            if c < best_cost {
                best = h;
                best_cost = c;
            }
        }
        labels.push(best);
        objective += best_cost;
    }
    Ok((LabelVector::from_vec_unchecked(labels, k), objective))
}

/// Least-squares objective of a labeling against a confusion tensor.
pub fn ls_objective(table: &CrowdTable, labels: &LabelVector, pi: &ConfusionTensor) -> Result<f64> {
    check_labels(table, labels)?;
    check_tensor(table, pi)?;
    Ok(labels
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &h)| item_cost(table, pi, j, h))
        .sum())
}

/// `min_{g != h} (1/m) (sqrt(sum_i pi_igg) - sqrt(sum_i pi_igh))^2`;
/// infinite when k = 1 (nothing to confuse).
pub fn v_pi(pi: &ConfusionTensor) -> f64 {
    let (m, k) = (pi.workers(), pi.classes());
    let mut best = f64::INFINITY;
    for g in 0..k {
        let diag: f64 = (0..m).map(|i| pi.get(i, g, g)).sum();
        for h in (0..k).filter(|&h| h != g) {
            let off: f64 = (0..m).map(|i| pi.get(i, g, h)).sum();
            let v = (diag.sqrt() - off.sqrt()).powi(2) / m as f64;
            best = best.min(v);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrowdConfig {
    pub max_iter: usize,
    pub early_stop: bool,
}

impl Default for CrowdConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            early_stop: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrowdFit {
    pub labels: LabelVector,
    pub confusion: ConfusionTensor,
    /// Entry 0 is the majority vote.
    pub trace: ConvergenceTrace,
    pub initial_labels: LabelVector,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Majority-vote initialization followed by alternating confusion and
/// least-squares label updates until the labels stop changing.
pub fn fit_crowd_lloyd(
    table: &CrowdTable,
    config: &CrowdConfig,
    reference: Option<&Reference>,
) -> Result<CrowdFit> {
    if config.max_iter == 0 {
        return Err(ClusterError::InvalidParameter("max_iter must be at least 1".into()));
    }
    let initial_labels = majority_vote(table)?;
    let mut labels = initial_labels.clone();
    let mut confusion = confusion_update(table, &labels)?;

    let mut recorder = Recorder::new(reference);
    recorder.record(0, &labels, None, Some(ls_objective(table, &labels, &confusion)?));

    let mut converged = false;
    let mut iterations_run = 0;
    for s in 1..=config.max_iter {
        let (next, _) = ls_assign(table, &confusion)?;
        let unchanged = next == labels;
        labels = next;
        confusion = confusion_update(table, &labels)?;
        iterations_run = s;
        recorder.record(s, &labels, None, Some(ls_objective(table, &labels, &confusion)?));
        if unchanged {
            converged = true;
            if config.early_stop {
                break;
            }
        }
    }
    Ok(CrowdFit {
        labels,
        confusion,
        trace: recorder.finish(),
        initial_labels,
        iterations_run,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(m: usize, n: usize, k: usize, rows: &[&[u16]]) -> CrowdTable {
        CrowdTable::new(m, n, k, rows.concat()).unwrap()
    }

    #[test]
    fn majority_examples() {
        // items as columns: votes [1,1,2], [1,2,0], [0,0,2]
        let t = table(3, 3, 2, &[&[1, 1, 0], &[1, 2, 0], &[2, 0, 2]]);
        assert_eq!(majority_vote(&t).unwrap().as_slice(), &[0, 0, 1]);
    }

    #[test]
    fn unobserved_item_is_an_error() {
        let t = table(2, 2, 2, &[&[1, 0], &[2, 0]]);
        assert_eq!(majority_vote(&t), Err(ClusterError::NoObservedLabels { item: 1 }));
        let pi = ConfusionTensor::one_coin(2, 2, 0.8).unwrap();
        assert_eq!(ls_label_update(&t, &pi), Err(ClusterError::NoObservedLabels { item: 1 }));
    }

    #[test]
    fn table_rejects_out_of_range() {
        assert!(CrowdTable::new(1, 2, 2, vec![1, 3]).is_err());
        assert!(CrowdTable::new(1, 2, 2, vec![1]).is_err());
    }

    #[test]
    fn confusion_is_empirical_frequency() {
        let t = table(1, 2, 2, &[&[1, 2]]);
        let z = LabelVector::new(vec![0, 0], 2).unwrap();
        let pi = confusion_update(&t, &z).unwrap();
        assert_eq!(pi.row(0, 0), &[0.5, 0.5]);
        // class 1 has no items: uniform and flagged
        assert_eq!(pi.row(0, 1), &[0.5, 0.5]);
        assert_eq!(pi.degenerate_rows, vec![(0, 1)]);
    }

    #[test]
    fn perfect_worker_gives_identity() {
        let t = table(1, 4, 2, &[&[1, 2, 2, 1]]);
        let z = LabelVector::new(vec![0, 1, 1, 0], 2).unwrap();
        let pi = confusion_update(&t, &z).unwrap();
        assert_eq!(pi.row(0, 0), &[1.0, 0.0]);
        assert_eq!(pi.row(0, 1), &[0.0, 1.0]);
    }

    #[test]
    fn ls_examples() {
        let t = table(1, 1, 2, &[&[1]]);
        let identity = ConfusionTensor::new(&[vec![vec![1.0, 0.0], vec![0.0, 1.0]]]).unwrap();
        assert_eq!(ls_label_update(&t, &identity).unwrap().as_slice(), &[0]);

        let t = table(2, 3, 3, &[&[1, 2, 3], &[3, 0, 1]]);
        let uniform = ConfusionTensor::one_coin(2, 3, 1.0 / 3.0).unwrap();
        assert_eq!(ls_label_update(&t, &uniform).unwrap().as_slice(), &[0, 0, 0]);
    }

    #[test]
    fn v_pi_examples() {
        let identity = ConfusionTensor::new(&[vec![vec![1.0, 0.0], vec![0.0, 1.0]]]).unwrap();
        assert!((v_pi(&identity) - 1.0).abs() < 1e-15);
        let uniform = ConfusionTensor::one_coin(5, 3, 1.0 / 3.0).unwrap();
        assert!(v_pi(&uniform).abs() < 1e-15);
        for (k, p) in [(2, 0.7), (3, 0.6), (5, 0.35)] {
            let pi = ConfusionTensor::one_coin(40, k, p).unwrap();
            let expected = (p.sqrt() - ((1.0 - p) / (k - 1) as f64).sqrt()).powi(2);
            assert!((v_pi(&pi) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_table_is_recovered_by_the_vote() {
        let truth = [0usize, 2, 1, 1, 0, 2];
        let row: Vec<u16> = truth.iter().map(|&z| z as u16 + 1).collect();
        let t = CrowdTable::new(3, 6, 3, [row.clone(), row.clone(), row].concat()).unwrap();
        let fit = fit_crowd_lloyd(&t, &CrowdConfig::default(), None).unwrap();
        assert_eq!(fit.initial_labels.as_slice(), &truth);
        assert_eq!(fit.labels.as_slice(), &truth);
        assert!(fit.converged);
        assert_eq!(fit.iterations_run, 1);
    }
}
