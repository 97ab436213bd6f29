//! Metrics CSV files.
//!
//! Training metrics: `epoch,total_error,out_mean_1,…,out_mean_m,wall_ms`.
//! Batch sweep: `batch_size,final_error,epochs,wall_time_ms`.
//! Reals are written with Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use batchprop::ErrorReport;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub total_error: f64,
    pub out_means: Vec<f64>,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    outputs: usize,
    rows: Vec<EpochRow>,
}

impl RunMetrics {
    pub fn new(outputs: usize) -> Self {
        Self {
            outputs,
            rows: Vec::new(),
        }
    }

    /// Appends an epoch; epoch indices must increase.
    pub fn record(&mut self, epoch: usize, report: &ErrorReport, wall_ms: u128) {
        debug_assert!(self.rows.last().is_none_or(|r| r.epoch < epoch));
        debug_assert_eq!(report.per_output_mean.len(), self.outputs);
        self.rows.push(EpochRow {
            epoch,
            total_error: report.total,
            out_means: report.per_output_mean.clone(),
            wall_ms,
        });
    }

    pub fn rows(&self) -> &[EpochRow] {
        &self.rows
    }

    pub fn header(&self) -> String {
        let mut cols = vec!["epoch".to_string(), "total_error".to_string()];
        cols.extend((1..=self.outputs).map(|j| format!("out_mean_{j}")));
        cols.push("wall_ms".to_string());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{}", r.epoch, r.total_error);
            for m in &r.out_means {
                let _ = write!(out, ",{m}");
            }
            let _ = writeln!(out, ",{}", r.wall_ms);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub batch_size: usize,
    pub final_error: f64,
    pub epochs: usize,
    pub wall_time_ms: u128,
}

pub const SWEEP_HEADER: &str = "batch_size,final_error,epochs,wall_time_ms";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.batch_size, r.final_error, r.epochs, r.wall_time_ms
        );
    }
    out
}
