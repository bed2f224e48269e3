use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::confidence::PartitionSets;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Partition,
    Unlearn,
    Repartition,
    RelearnMixup,
    RelearnAgree,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Partition => "partition",
            Phase::Unlearn => "unlearn",
            Phase::Repartition => "repartition",
            Phase::RelearnMixup => "relearn_mixup",
            Phase::RelearnAgree => "relearn_agree",
        }
    }
}

/// One row per (iteration, phase). Set sizes are those of the partition the
/// phase operated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub phase: Phase,
    pub high_disagree: usize,
    pub low_disagree: usize,
    pub high_agree: usize,
    pub low_agree: usize,
    pub mean_joint_confidence: f64,
    /// Mean student loss over the last pass of the phase.
    pub loss: Option<f64>,
    pub test_accuracy: Option<f64>,
}

impl TraceRow {
    pub fn new(iteration: usize, phase: Phase, sets: &PartitionSets) -> Self {
        let [hd, ld, ha, la] = sets.sizes();
        TraceRow {
            iteration,
            phase,
            high_disagree: hd,
            low_disagree: ld,
            high_agree: ha,
            low_agree: la,
            mean_joint_confidence: sets.mean_joint_confidence(),
            loss: None,
            test_accuracy: None,
        }
    }

    pub fn total(&self) -> usize {
        self.high_disagree + self.low_disagree + self.high_agree + self.low_agree
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub rows: Vec<TraceRow>,
    pub notes: Vec<String>,
}

pub const TRACE_CSV_HEADER: &str =
    "iteration,phase,high_disagree,low_disagree,high_agree,low_agree,mean_joint_confidence,loss,test_accuracy";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl PhaseTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:?},{},{}",
                r.iteration,
                r.phase.as_str(),
                r.high_disagree,
                r.low_disagree,
                r.high_agree,
                r.low_agree,
                r.mean_joint_confidence,
                opt(r.loss),
                opt(r.test_accuracy)
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("trace serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Accuracy after the last phase that recorded one.
    pub fn final_accuracy(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.test_accuracy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_columns() {
        let sets = PartitionSets {
            joint_conf: vec![0.5, 1.0],
            high_agree: vec![1],
            low_disagree: vec![0],
            ..PartitionSets::default()
        };
        let mut row = TraceRow::new(2, Phase::RelearnAgree, &sets);
        row.loss = Some(0.25);
        let trace = PhaseTrace { rows: vec![row], notes: vec![] };
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_CSV_HEADER));
        assert_eq!(lines.next(), Some("2,relearn_agree,0,1,1,0,0.75,0.25,"));
    }

    #[test]
    fn json_roundtrip() {
        let trace = PhaseTrace {
            rows: vec![TraceRow::new(0, Phase::Partition, &PartitionSets::default())],
            notes: vec!["x".into()],
        };
        let back: PhaseTrace = serde_json::from_str(&trace.to_json()).unwrap();
        assert_eq!(back, trace);
    }
}
