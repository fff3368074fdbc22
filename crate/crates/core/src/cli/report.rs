//! Aggregation of a score table into the comparison reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::benchmark::{DegeneracyRecord, Failure};
use crate::error::{Error, Result};
use crate::evaluation::{compare, filter_difficult, ComparisonSummary, MeanTable, ScoreTable};
use crate::layering::{DegeneracyKind, GroupCounts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub reference: String,
    pub baseline: String,
    pub rope: f64,
    pub cutoff: f64,
    /// Keep datasets whose clustering left the mixed group empty in some fold.
    pub keep_degenerate: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            reference: "ICLL+SMOTE(L2)".to_string(),
            baseline: "NoResample-RF".to_string(),
            rope: 1.0,
            cutoff: 0.9,
            keep_degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ReportConfig,
    pub datasets: Vec<String>,
    /// Datasets left out because the mixed group was empty.
    pub excluded: Vec<String>,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub mean: Option<MeanTable>,
    pub overall: ComparisonSummary,
    /// Difficult datasets with the baseline's mean AUC.
    pub difficult: Vec<(String, f64)>,
    pub difficult_summary: Option<ComparisonSummary>,
}

/// Datasets with an empty mixed group in at least one fold, in first-seen order.
pub fn empty_mixed_datasets(records: &[DegeneracyRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if r.degeneracy == DegeneracyKind::EmptyCmix && !out.contains(&r.dataset) {
            out.push(r.dataset.clone());
        }
    }
    out
}

pub fn aggregate(
    scores: &ScoreTable,
    degeneracy: &[DegeneracyRecord],
    failures: &[Failure],
    config: &ReportConfig,
) -> Result<Report> {
    if scores.is_empty() {
        return Err(Error::InvalidInput("the score table is empty".into()));
    }
    scores.check_complete()?;
    let all = scores.mean_auc();
    all.method_index(&config.baseline)?;
    all.method_index(&config.reference)?;
    let excluded: Vec<String> = if config.keep_degenerate {
        Vec::new()
    } else {
        empty_mixed_datasets(degeneracy)
            .into_iter()
            .filter(|d| all.datasets.contains(d))
            .collect()
    };
    let datasets: Vec<String> = all.datasets.iter().filter(|d| !excluded.contains(d)).cloned().collect();
    if datasets.is_empty() {
        return Err(Error::InvalidInput("no datasets left after exclusions".into()));
    }
    let mean = all.restrict(&datasets);
    let overall = compare(&mean, &config.reference, config.rope)?;
    let hard = filter_difficult(&mean, &config.baseline, config.cutoff)?;
    let b = mean.method_index(&config.baseline)?;
    let difficult = hard
        .iter()
        .map(|d| {
            let i = mean.datasets.iter().position(|x| x == d).expect("dataset present");
            (d.clone(), mean.values[i][b])
        })
        .collect();
    let difficult_summary = if hard.is_empty() {
        None
    } else {
        Some(compare(&mean.restrict(&hard), &config.reference, config.rope)?)
    };
    Ok(Report {
        config: config.clone(),
        datasets,
        excluded,
        failures: failures.to_vec(),
        mean: Some(mean),
        overall,
        difficult,
        difficult_summary,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_ranks<W: Write>(w: W, s: &ComparisonSummary) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "avg_rank"])?;
    for (m, r) in &s.avg_rank {
        out.write_record([m.clone(), r.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn write_rope<W: Write>(w: W, s: &ComparisonSummary) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "win", "draw", "loss", "n"])?;
    for (m, o) in &s.rope {
        out.write_record([m.clone(), o.win.to_string(), o.draw.to_string(), o.loss.to_string(), o.n.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn write_summary_files(dir: &Path, suffix: &str, s: &ComparisonSummary) -> Result<()> {
    write_ranks(create(dir, &format!("ranks{suffix}.csv"))?, s)?;
    s.pct_diff.write_csv(create(dir, &format!("pct_diff{suffix}.csv"))?)?;
    write_rope(create(dir, &format!("rope{suffix}.csv"))?, s)
}

impl Report {
    /// Writes every aggregate table plus `summary.json` and `summary.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        if let Some(mean) = &self.mean {
            mean.write_csv(create(dir, "mean_auc.csv")?)?;
        }
        write_summary_files(dir, "", &self.overall)?;
        let mut out = csv::Writer::from_writer(create(dir, "difficult.csv")?);
        out.write_record(["dataset", "baseline_auc"])?;
        for (d, a) in &self.difficult {
            out.write_record([d.clone(), a.to_string()])?;
        }
        out.flush()?;
        if let Some(s) = &self.difficult_summary {
            write_summary_files(dir, "_difficult", s)?;
        } else {
            for name in ["ranks_difficult.csv", "pct_diff_difficult.csv", "rope_difficult.csv"] {
                let _ = std::fs::remove_file(dir.join(name));
            }
        }
        let mut json = create(dir, "summary.json")?;
        serde_json::to_writer_pretty(&mut json, self)?;
        writeln!(json)?;
        json.flush()?;
        std::fs::write(dir.join("summary.txt"), self.text())?;
        Ok(())
    }

    /// Plain-text summary.
    pub fn text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "datasets: {}", self.datasets.len());
        if !self.excluded.is_empty() {
            let _ = writeln!(t, "excluded (mixed group empty): {}", self.excluded.join(", "));
        }
        for f in &self.failures {
            let _ = writeln!(t, "failed: {} ({})", f.dataset, f.reason);
        }
        let _ = writeln!(t, "reference: {}", self.config.reference);
        section(&mut t, "all datasets", &self.overall);
        let _ = writeln!(
            t,
            "\ndifficult datasets ({} mean AUC < {}): {}",
            self.config.baseline,
            self.config.cutoff,
            self.difficult.len()
        );
        if let Some(s) = &self.difficult_summary {
            section(&mut t, "difficult datasets", s);
        }
        t
    }
}

fn section(t: &mut String, title: &str, s: &ComparisonSummary) {
    let _ = writeln!(t, "\naverage rank, {title} (n = {}):", s.n_datasets);
    let mut ranks = s.avg_rank.clone();
    ranks.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (m, r) in ranks {
        let _ = writeln!(t, "  {m:<16} {r:.3}");
    }
    let _ = writeln!(t, "ROPE +/-{}%, {} against (win / draw / loss):", s.rope_percent, s.reference);
    for (m, o) in &s.rope {
        let _ = writeln!(t, "  {m:<16} {:.3} / {:.3} / {:.3}", o.win, o.draw, o.loss);
    }
}

pub fn write_failures<W: Write>(w: W, failures: &[Failure]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dataset", "reason"])?;
    for f in failures {
        out.write_record([&f.dataset, &f.reason])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_failures<R: Read>(r: R) -> Result<Vec<Failure>> {
    let mut reader = csv::Reader::from_reader(r);
    reader.deserialize().map(|f| f.map_err(Error::from)).collect()
}

const DEGENERACY_HEADER: [&str; 9] = [
    "dataset",
    "repeat",
    "fold",
    "initial",
    "degeneracy",
    "fallback_single_model",
    "pure_majority",
    "pure_minority",
    "mixed",
];

fn kind_code(k: DegeneracyKind) -> &'static str {
    match k {
        DegeneracyKind::None => "none",
        DegeneracyKind::EmptyCmin => "empty_pure_minority",
        DegeneracyKind::EmptyCmix => "empty_mixed",
        DegeneracyKind::EmptyCmaj => "empty_pure_majority",
    }
}

fn parse_kind(s: &str) -> Result<DegeneracyKind> {
    [
        DegeneracyKind::None,
        DegeneracyKind::EmptyCmin,
        DegeneracyKind::EmptyCmix,
        DegeneracyKind::EmptyCmaj,
    ]
    .into_iter()
    .find(|k| kind_code(*k) == s)
    .ok_or_else(|| Error::InvalidInput(format!("unknown degeneracy `{s}`")))
}

pub fn write_degeneracy<W: Write>(w: W, records: &[DegeneracyRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(DEGENERACY_HEADER)?;
    for r in records {
        out.write_record([
            r.dataset.clone(),
            r.repeat.to_string(),
            r.fold.to_string(),
            kind_code(r.initial).to_string(),
            kind_code(r.degeneracy).to_string(),
            r.fallback_single_model.to_string(),
            r.counts.majority.to_string(),
            r.counts.minority.to_string(),
            r.counts.mixed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_degeneracy<R: Read>(r: R) -> Result<Vec<DegeneracyRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != DEGENERACY_HEADER.len() {
            return Err(Error::Arity {
                row: i + 2,
                expected: DEGENERACY_HEADER.len(),
                found: rec.len(),
            });
        }
        let num = |j: usize| -> Result<usize> {
            rec[j].parse().map_err(|_| Error::Numeric {
                row: i + 2,
                column: DEGENERACY_HEADER[j].to_string(),
                value: rec[j].to_string(),
            })
        };
        out.push(DegeneracyRecord {
            dataset: rec[0].to_string(),
            repeat: num(1)?,
            fold: num(2)?,
            initial: parse_kind(&rec[3])?,
            degeneracy: parse_kind(&rec[4])?,
            fallback_single_model: &rec[5] == "true",
            counts: GroupCounts {
                majority: num(6)?,
                minority: num(7)?,
                mixed: num(8)?,
            },
        });
    }
    Ok(out)
}
