use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Metrics, Task};

/// A system variant: scorer backend plus PERTO gate setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub scorer: String,
    pub perto: bool,
}

impl Configuration {
    pub fn new(scorer: impl Into<String>, perto: bool) -> Self {
        Self {
            scorer: scorer.into(),
            perto,
        }
    }

    pub fn label(&self) -> String {
        if self.perto {
            format!("{} + PERTO", self.scorer)
        } else {
            self.scorer.clone()
        }
    }
}

/// Percentages rounded to one decimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub configuration: String,
    pub scorer: String,
    pub perto: bool,
    pub task: Task,
    pub subset: Option<String>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// F1 minus the F1 of the same scorer/task/subset with PERTO off.
    pub delta_f1: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

fn pct(x: f64) -> f64 {
    (x * 1000.0).round() / 10.0
}

fn one_decimal(x: f64) -> String {
    format!("{x:.1}")
}

/// One evaluated cell of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub configuration: Configuration,
    pub task: Task,
    pub subset: Option<String>,
    pub metrics: Metrics,
}

pub fn report(entries: &[Entry]) -> Report {
    let rows = entries
        .iter()
        .map(|e| {
            let delta_f1 = e.configuration.perto.then(|| {
                entries
                    .iter()
                    .find(|o| {
                        !o.configuration.perto
                            && o.configuration.scorer == e.configuration.scorer
                            && o.task == e.task
                            && o.subset == e.subset
                    })
                    .map(|o| pct(e.metrics.f1) - pct(o.metrics.f1))
                    .map(|d| (d * 10.0).round() / 10.0)
            });
            ReportRow {
                configuration: e.configuration.label(),
                scorer: e.configuration.scorer.clone(),
                perto: e.configuration.perto,
                task: e.task,
                subset: e.subset.clone(),
                precision: pct(e.metrics.precision),
                recall: pct(e.metrics.recall),
                f1: pct(e.metrics.f1),
                delta_f1: delta_f1.flatten(),
                tp: e.metrics.true_positives,
                fp: e.metrics.false_positives,
                fn_: e.metrics.false_negatives,
            }
        })
        .collect();
    Report { rows }
}

const HEADER: [&str; 12] = [
    "configuration",
    "scorer",
    "perto",
    "task",
    "subset",
    "precision",
    "recall",
    "f1",
    "delta_f1",
    "tp",
    "fp",
    "fn",
];

impl ReportRow {
    fn fields(&self) -> [String; 12] {
        [
            self.configuration.clone(),
            self.scorer.clone(),
            self.perto.to_string(),
            self.task.to_string(),
            self.subset.clone().unwrap_or_default(),
            one_decimal(self.precision),
            one_decimal(self.recall),
            one_decimal(self.f1),
            self.delta_f1.map(one_decimal).unwrap_or_default(),
            self.tp.to_string(),
            self.fp.to_string(),
            self.fn_.to_string(),
        ]
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.fields()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn from_csv(src: &str) -> Result<Self, csv::Error> {
        let mut rd = csv::Reader::from_reader(src.as_bytes());
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| rec[i].parse::<f64>().unwrap_or(f64::NAN);
            let int = |i: usize| rec[i].parse::<u64>().unwrap_or(0);
            rows.push(ReportRow {
                configuration: rec[0].to_string(),
                scorer: rec[1].to_string(),
                perto: &rec[2] == "true",
                task: rec[3].parse().unwrap_or(Task::NonWordDetection),
                subset: (!rec[4].is_empty()).then(|| rec[4].to_string()),
                precision: num(5),
                recall: num(6),
                f1: num(7),
                delta_f1: (!rec[8].is_empty()).then(|| num(8)),
                tp: int(9),
                fp: int(10),
                fn_: int(11),
            });
        }
        Ok(Self { rows })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self
            .rows
            .iter()
            .map(|r| r.configuration.chars().count())
            .max()
            .unwrap_or(0)
            .max(13);
        let _ = writeln!(
            out,
            "{:<width$}  {:<18}  {:<13}  {:>9}  {:>6}  {:>5}  {:>7}",
            "Configuration", "Task", "Subset", "Precision", "Recall", "F1", "ΔF1"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:<18}  {:<13}  {:>9.1}  {:>6.1}  {:>5.1}  {:>7}",
                r.configuration,
                r.task.as_str(),
                r.subset.as_deref().unwrap_or("all"),
                r.precision,
                r.recall,
                r.f1,
                r.delta_f1
                    .map(|d| format!("{d:+.1}"))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        out
    }
}
