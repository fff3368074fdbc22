//! Cross-validation folds, rank-based AUC and the comparative analyses run
//! over a table of per-fold AUC scores.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Fold index of every row, per repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    pub assignments: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn test_indices(&self, repeat: usize, fold: usize) -> Vec<usize> {
        (0..self.assignments[repeat].len())
            .filter(|&i| self.assignments[repeat][i] == fold)
            .collect()
    }

    pub fn train_indices(&self, repeat: usize, fold: usize) -> Vec<usize> {
        (0..self.assignments[repeat].len())
            .filter(|&i| self.assignments[repeat][i] != fold)
            .collect()
    }
}

/// Stratified folds for `d`; see [`stratified_folds`].
pub fn stratified_kfold(d: &Dataset, repeats: usize, folds: usize, seed: u64) -> Result<FoldPlan> {
    stratified_folds(d.name(), d.labels(), repeats, folds, seed)
}

/// Shuffles each class with a per-repeat seed, then deals its rows to folds
/// round-robin. Dealing continues across classes (minority first), so fold
/// sizes also differ by at most one.
pub fn stratified_folds(
    name: &str,
    labels: &[u8],
    repeats: usize,
    folds: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if folds < 2 || repeats == 0 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 folds and 1 repeat, got {folds} folds and {repeats} repeats"
        )));
    }
    let minority: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let majority: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    let smallest = minority.len().min(majority.len());
    if smallest < folds {
        return Err(Error::TooFewForFolds {
            dataset: name.to_string(),
            minority: smallest,
            folds,
        });
    }
    let assignments = (0..repeats)
        .map(|r| {
            let mut rng = seed::rng(seed::derive(seed, &[r as u64]));
            let mut fold_of = vec![0; labels.len()];
            let mut next = 0;
            for class in [&minority, &majority] {
                let mut rows = class.clone();
                rows.shuffle(&mut rng);
                for i in rows {
                    fold_of[i] = next;
                    next = (next + 1) % folds;
                }
            }
            fold_of
        })
        .collect();
    Ok(FoldPlan {
        repeats,
        folds,
        seed,
        assignments,
    })
}

/// Mann-Whitney AUC from average ranks: the probability that a random
/// positive outscores a random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    let ranks = average_ranks(scores);
    let pos_rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y == 1)
        .map(|(r, _)| r)
        .sum();
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// 1-based ascending ranks, ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub dataset: String,
    pub method: String,
    pub repeat: usize,
    pub fold: usize,
    pub auc: f64,
}

/// Per-fold AUC scores, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

const SCORE_HEADER: [&str; 5] = ["dataset", "method", "repeat", "fold", "auc"];

impl ScoreTable {
    pub fn push(&mut self, dataset: &str, method: &str, repeat: usize, fold: usize, auc: f64) {
        self.rows.push(ScoreRow {
            dataset: dataset.to_string(),
            method: method.to_string(),
            repeat,
            fold,
            auc,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct datasets in order of first appearance.
    pub fn datasets(&self) -> Vec<String> {
        first_seen(self.rows.iter().map(|r| r.dataset.as_str()))
    }

    /// Distinct methods in order of first appearance.
    pub fn methods(&self) -> Vec<String> {
        first_seen(self.rows.iter().map(|r| r.method.as_str()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SCORE_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.dataset.clone(),
                r.method.clone(),
                r.repeat.to_string(),
                r.fold.to_string(),
                r.auc.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != SCORE_HEADER {
            return Err(Error::Header {
                line: 1,
                message: format!("expected `{}`, found `{}`", SCORE_HEADER.join(","), header.join(",")),
            });
        }
        let mut table = ScoreTable::default();
        for (i, rec) in reader.deserialize::<ScoreRow>().enumerate() {
            let row = rec?;
            if !(0.0..=1.0).contains(&row.auc) {
                return Err(Error::InvalidInput(format!(
                    "row {}: AUC {} outside [0, 1]",
                    i + 2,
                    row.auc
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    /// Errors listing every missing `(dataset, method, repeat, fold)` cell of
    /// the full grid spanned by the table's datasets, methods and cells.
    pub fn check_complete(&self) -> Result<()> {
        let cells: BTreeSet<(usize, usize)> = self.rows.iter().map(|r| (r.repeat, r.fold)).collect();
        let present: BTreeSet<(&str, &str, usize, usize)> = self
            .rows
            .iter()
            .map(|r| (r.dataset.as_str(), r.method.as_str(), r.repeat, r.fold))
            .collect();
        let mut missing = Vec::new();
        for d in self.datasets() {
            for m in self.methods() {
                for &(r, f) in &cells {
                    if !present.contains(&(d.as_str(), m.as_str(), r, f)) {
                        missing.push(format!("{d}/{m}/repeat {r}/fold {f}"));
                    }
                }
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompleteTable(missing))
        }
    }

    /// Mean AUC per (dataset, method) over all of its cells.
    pub fn mean_auc(&self) -> MeanTable {
        let datasets = self.datasets();
        let methods = self.methods();
        let d_ix: HashMap<&str, usize> = datasets.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
        let m_ix: HashMap<&str, usize> = methods.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
        let mut sums = vec![vec![(0.0, 0usize); methods.len()]; datasets.len()];
        for r in &self.rows {
            let cell = &mut sums[d_ix[r.dataset.as_str()]][m_ix[r.method.as_str()]];
            cell.0 += r.auc;
            cell.1 += 1;
        }
        let values = sums
            .into_iter()
            .map(|row| row.into_iter().map(|(s, c)| s / c as f64).collect())
            .collect();
        MeanTable {
            datasets,
            methods,
            values,
        }
    }
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in items {
        if seen.insert(s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Dataset-by-method matrix of mean AUCs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanTable {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    /// `values[dataset][method]`
    pub values: Vec<Vec<f64>>,
}

impl MeanTable {
    pub fn method_index(&self, method: &str) -> Result<usize> {
        self.methods
            .iter()
            .position(|m| m == method)
            .ok_or_else(|| Error::UnknownMethod(method.to_string()))
    }

    pub fn get(&self, dataset: usize, method: &str) -> Result<f64> {
        Ok(self.values[dataset][self.method_index(method)?])
    }

    /// The rows for `datasets`, in this table's order.
    pub fn restrict(&self, datasets: &[String]) -> MeanTable {
        let keep: Vec<usize> = (0..self.datasets.len())
            .filter(|&i| datasets.contains(&self.datasets[i]))
            .collect();
        MeanTable {
            datasets: keep.iter().map(|&i| self.datasets[i].clone()).collect(),
            methods: self.methods.clone(),
            values: keep.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_matrix(w, &self.datasets, &self.methods, &self.values)
    }
}

fn write_matrix<W: Write>(w: W, rows: &[String], cols: &[String], values: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["dataset".to_string()];
    header.extend(cols.iter().cloned());
    out.write_record(&header)?;
    for (name, row) in rows.iter().zip(values) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(f64::to_string));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Ranks per dataset (rank 1 = highest AUC, ties averaged).
pub fn rank_matrix(table: &MeanTable) -> Vec<Vec<f64>> {
    table
        .values
        .iter()
        .map(|row| {
            let negated: Vec<f64> = row.iter().map(|v| -v).collect();
            average_ranks(&negated)
        })
        .collect()
}

/// Mean rank of every method over the datasets, in the table's method order.
pub fn average_rank(table: &MeanTable) -> Vec<(String, f64)> {
    let ranks = rank_matrix(table);
    let n = ranks.len() as f64;
    table
        .methods
        .iter()
        .enumerate()
        .map(|(j, m)| (m.clone(), ranks.iter().map(|r| r[j]).sum::<f64>() / n))
        .collect()
}

/// `100 * (auc_m - auc_ref) / auc_ref` for every dataset and every
/// non-reference method; negative values favour the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PctDiff {
    pub reference: String,
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl PctDiff {
    pub fn column(&self, method: &str) -> Result<Vec<f64>> {
        let j = self
            .methods
            .iter()
            .position(|m| m == method)
            .ok_or_else(|| Error::UnknownMethod(method.to_string()))?;
        Ok(self.values.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_matrix(w, &self.datasets, &self.methods, &self.values)
    }
}

pub fn pct_diff(table: &MeanTable, reference: &str) -> Result<PctDiff> {
    let r = table.method_index(reference)?;
    let cols: Vec<usize> = (0..table.methods.len()).filter(|&j| j != r).collect();
    Ok(PctDiff {
        reference: reference.to_string(),
        datasets: table.datasets.clone(),
        methods: cols.iter().map(|&j| table.methods[j].clone()).collect(),
        values: table
            .values
            .iter()
            .map(|row| cols.iter().map(|&j| 100.0 * (row[j] - row[r]) / row[r]).collect())
            .collect(),
    })
}

/// Win/draw/loss frequencies from the reference method's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RopeOutcome {
    pub win: f64,
    pub draw: f64,
    pub loss: f64,
    pub n: usize,
}

/// A difference below `-rope` is a win for the reference, above `+rope` a
/// loss, anything in between a draw.
pub fn rope_outcomes(diffs: &[f64], rope: f64) -> RopeOutcome {
    let n = diffs.len();
    let wins = diffs.iter().filter(|&&d| d < -rope).count();
    let losses = diffs.iter().filter(|&&d| d > rope).count();
    let draws = n - wins - losses;
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    RopeOutcome {
        win: frac(wins),
        draw: frac(draws),
        loss: frac(losses),
        n,
    }
}

/// Datasets where `baseline`'s mean AUC is below `cutoff`.
pub fn filter_difficult(table: &MeanTable, baseline: &str, cutoff: f64) -> Result<Vec<String>> {
    let b = table.method_index(baseline)?;
    Ok(table
        .datasets
        .iter()
        .zip(&table.values)
        .filter(|(_, row)| row[b] < cutoff)
        .map(|(d, _)| d.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub reference: String,
    pub n_datasets: usize,
    pub avg_rank: Vec<(String, f64)>,
    pub pct_diff: PctDiff,
    pub rope_percent: f64,
    /// Outcome of the reference against each other method.
    pub rope: Vec<(String, RopeOutcome)>,
}

pub fn compare(table: &MeanTable, reference: &str, rope_percent: f64) -> Result<ComparisonSummary> {
    let pct = pct_diff(table, reference)?;
    let rope = pct
        .methods
        .iter()
        .map(|m| Ok((m.clone(), rope_outcomes(&pct.column(m)?, rope_percent))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonSummary {
        reference: reference.to_string(),
        n_datasets: table.datasets.len(),
        avg_rank: average_rank(table),
        pct_diff: pct,
        rope_percent,
        rope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fold_counts() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 10 == 0)).collect();
        let plan = stratified_folds("d", &labels, 2, 5, 7).unwrap();
        for r in 0..2 {
            let mut seen = vec![false; 100];
            for f in 0..5 {
                let test = plan.test_indices(r, f);
                assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 2);
                assert_eq!(test.len(), 20);
                for i in test {
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
        assert_ne!(plan.assignments[0], plan.assignments[1]);
        assert_eq!(plan, stratified_folds("d", &labels, 2, 5, 7).unwrap());
    }

    #[test]
    fn too_few_minority_names_dataset() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1];
        let err = stratified_folds("tiny", &labels, 1, 5, 0).unwrap_err();
        assert!(err.to_string().contains("tiny"));
    }

    #[test]
    fn auc_basics() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.1], &[0, 1]).unwrap(), 0.0);
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(Error::UndefinedAuc)));
        // one tie among four pairs
        assert_eq!(auc(&[0.1, 0.5, 0.5, 0.9], &[0, 0, 1, 1]).unwrap(), 0.875);
    }

    fn table_from(rows: &[(&str, &str, f64)]) -> ScoreTable {
        let mut t = ScoreTable::default();
        for (d, m, a) in rows {
            t.push(d, m, 0, 0, *a);
        }
        t
    }

    #[test]
    fn ranks_hand_computed() {
        // 3 methods, 4 datasets.
        let t = table_from(&[
            ("d1", "A", 0.9), ("d1", "B", 0.8), ("d1", "C", 0.7),
            ("d2", "A", 0.6), ("d2", "B", 0.6), ("d2", "C", 0.9),
            ("d3", "A", 0.5), ("d3", "B", 0.7), ("d3", "C", 0.6),
            ("d4", "A", 0.8), ("d4", "B", 0.8), ("d4", "C", 0.8),
        ]);
        let ranks = average_rank(&t.mean_auc());
        // A: 1, 2.5, 3, 2   B: 2, 2.5, 1, 2   C: 3, 1, 2, 2
        assert_eq!(ranks[0], ("A".to_string(), 8.5 / 4.0));
        assert_eq!(ranks[1], ("B".to_string(), 7.5 / 4.0));
        assert_eq!(ranks[2], ("C".to_string(), 8.0 / 4.0));
    }

    #[test]
    fn pct_and_rope() {
        let t = table_from(&[
            ("d1", "ref", 1.0), ("d1", "m", 0.9),
            ("d2", "ref", 0.8), ("d2", "m", 0.8),
            ("d3", "ref", 0.5), ("d3", "m", 0.6),
        ]);
        let p = pct_diff(&t.mean_auc(), "ref").unwrap();
        let col = p.column("m").unwrap();
        assert!((col[0] + 10.0).abs() < 1e-12);
        assert_eq!(col[1], 0.0);
        assert!((col[2] - 20.0).abs() < 1e-12);
        let o = rope_outcomes(&col, 1.0);
        assert_eq!((o.win, o.draw, o.loss), (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
        let o = rope_outcomes(&[-0.5, -2.0, 1.0, -1.0], 1.0);
        assert_eq!((o.win, o.draw, o.loss), (0.25, 0.75, 0.0));
        assert!(pct_diff(&t.mean_auc(), "missing").is_err());
    }

    #[test]
    fn difficult_subset() {
        let t = table_from(&[("d1", "base", 0.95), ("d2", "base", 0.97)]);
        assert!(filter_difficult(&t.mean_auc(), "base", 0.9).unwrap().is_empty());
        assert_eq!(filter_difficult(&t.mean_auc(), "base", 1.01).unwrap().len(), 2);
    }

    #[test]
    fn incomplete_grid_lists_cells() {
        let mut t = ScoreTable::default();
        t.push("d1", "A", 0, 0, 0.5);
        t.push("d1", "A", 0, 1, 0.5);
        t.push("d1", "B", 0, 0, 0.5);
        match t.check_complete() {
            Err(Error::IncompleteTable(m)) => assert_eq!(m, vec!["d1/B/repeat 0/fold 1".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_header_checked() {
        assert!(ScoreTable::read_csv("a,b\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn score_csv_round_trip(aucs in prop::collection::vec(0.0f64..=1.0, 1..30)) {
            let mut t = ScoreTable::default();
            for (i, a) in aucs.iter().enumerate() {
                t.push(&format!("d{}", i % 3), &format!("m,{}", i % 2), i % 2, i, *a);
            }
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            prop_assert_eq!(ScoreTable::read_csv(buf.as_slice()).unwrap(), t);
        }

        #[test]
        fn auc_monotone_invariant(
            pairs in prop::collection::vec((0u32..200, 0u8..2), 2..50)
        ) {
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let s: Vec<f64> = pairs.iter().map(|p| f64::from(p.0) / 200.0).collect();
            let a = auc(&s, &labels).unwrap();
            let cubed: Vec<f64> = s.iter().map(|v| v * v * v + 3.0).collect();
            prop_assert_eq!(a, auc(&cubed, &labels).unwrap());
            let flipped: Vec<f64> = s.iter().map(|v| 1.0 - v).collect();
            prop_assert!((a + auc(&flipped, &labels).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ranks_are_permutations(rows in prop::collection::vec(prop::collection::vec(0u8..5, 4), 1..8)) {
            let mut t = ScoreTable::default();
            for (d, row) in rows.iter().enumerate() {
                for (m, v) in row.iter().enumerate() {
                    t.push(&format!("d{d}"), &format!("m{m}"), 0, 0, f64::from(*v) / 4.0);
                }
            }
            for r in rank_matrix(&t.mean_auc()) {
                prop_assert!((r.iter().sum::<f64>() - 10.0).abs() < 1e-12);
            }
        }
    }
}
