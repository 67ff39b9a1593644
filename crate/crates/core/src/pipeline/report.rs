use std::fmt::Write as _;
use std::time::Instant;

use super::{fit_mapping, reconstruct_columns, ExperimentConfig, Method, PairedData, Subspaces};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-sample and average RMSE over one split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    /// `√(‖x̂ − x‖² / dim)` per sample.
    pub per_sample_rmse: Vec<f64>,
    pub average_rmse: f64,
    pub runtime_secs: f64,
    /// Sample labels, one per entry of `per_sample_rmse` (may be empty).
    pub labels: Vec<String>,
    /// Configuration the numbers came from, as TOML.
    pub config: String,
}

impl EvaluationReport {
    /// `sample,rmse` rows; deterministic (no timing).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,rmse\n");
        for (i, r) in self.per_sample_rmse.iter().enumerate() {
            let label = self.labels.get(i).cloned().unwrap_or_else(|| i.to_string());
            writeln!(out, "{label},{r}").unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "samples:       {}", self.per_sample_rmse.len()).unwrap();
        writeln!(out, "average RMSE:  {:.6}", self.average_rmse).unwrap();
        let max = self.per_sample_rmse.iter().copied().fold(0.0, f64::max);
        writeln!(out, "max RMSE:      {max:.6}").unwrap();
        writeln!(out, "runtime:       {:.3} s", self.runtime_secs).unwrap();
        if !self.config.is_empty() {
            writeln!(out, "\nconfiguration:\n{}", self.config).unwrap();
        }
        out
    }
}

fn sample_rmse(pred: &[f64], truth: &[f64]) -> f64 {
    let sse: f64 = pred.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    (sse / truth.len() as f64).sqrt()
}

/// Scores predicted shape vectors against ground truth, one vector per
/// sample.
pub fn evaluate_rmse(predictions: &[Vec<f64>], truths: &[Vec<f64>]) -> Result<EvaluationReport> {
    let start = Instant::now();
    if predictions.len() != truths.len() {
        return Err(Error::InvalidInput(format!(
            "prediction count {} does not match ground-truth count {}",
            predictions.len(),
            truths.len()
        )));
    }
    if truths.is_empty() {
        return Err(Error::InvalidInput("nothing to evaluate".into()));
    }
    let per_sample_rmse = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| {
            if p.len() != t.len() || t.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "prediction length {} does not match ground-truth length {}",
                    p.len(),
                    t.len()
                )));
            }
            Ok(sample_rmse(p, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let average_rmse = per_sample_rmse.iter().sum::<f64>() / per_sample_rmse.len() as f64;
    Ok(EvaluationReport {
        per_sample_rmse,
        average_rmse,
        runtime_secs: start.elapsed().as_secs_f64(),
        labels: Vec::new(),
        config: String::new(),
    })
}

/// [`evaluate_rmse`] with samples as matrix columns.
pub fn evaluate_columns(predictions: &Matrix, truths: &Matrix) -> Result<EvaluationReport> {
    if predictions.shape() != truths.shape() {
        return Err(Error::InvalidInput(format!(
            "prediction shape {:?} does not match ground-truth shape {:?}",
            predictions.shape(),
            truths.shape()
        )));
    }
    evaluate_rmse(&predictions.columns(), &truths.columns())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: Method,
    /// Effective subspace sizes; `None` for the direct method.
    pub k_2d: Option<usize>,
    pub k_3d: Option<usize>,
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub config: String,
}

impl ComparisonReport {
    pub fn row(&self, method: Method) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// `method,k_2d,k_3d,train_rmse,test_rmse`; deterministic (no timing).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,k_2d,k_3d,train_rmse,test_rmse\n");
        let opt = |k: Option<usize>| k.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.method, opt(r.k_2d), opt(r.k_3d), r.train_rmse, r.test_rmse).unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<8} {:>5} {:>5} {:>12} {:>12} {:>9}", "method", "k_2d", "k_3d", "train RMSE", "test RMSE", "time (s)")
            .unwrap();
        let opt = |k: Option<usize>| k.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            writeln!(
                out,
                "{:<8} {:>5} {:>5} {:>12.6} {:>12.6} {:>9.2}",
                r.method.name(),
                opt(r.k_2d),
                opt(r.k_3d),
                r.train_rmse,
                r.test_rmse,
                r.runtime_secs
            )
            .unwrap();
        }
        if !self.config.is_empty() {
            writeln!(out, "\nconfiguration:\n{}", self.config).unwrap();
        }
        out
    }
}

/// Fits and scores every method on the same subspaces and splits.
pub fn compare_methods(
    experiment: &ExperimentConfig,
    models: &Subspaces,
    train: &PairedData,
    test: &PairedData,
) -> Result<ComparisonReport> {
    let mut rows = Vec::new();
    for method in Method::ALL {
        let start = Instant::now();
        let mapping = fit_mapping(method, experiment, models, train)?;
        let train_eval = evaluate_columns(&reconstruct_columns(models, &mapping, &train.images)?, &train.shapes)?;
        let test_eval = evaluate_columns(&reconstruct_columns(models, &mapping, &test.images)?, &test.shapes)?;
        let ks = match method {
            Method::Direct => (None, None),
            _ => (Some(models.image.k()), Some(models.shape.k())),
        };
        log::info!(
            "{method}: train RMSE {:.6}, test RMSE {:.6}",
            train_eval.average_rmse,
            test_eval.average_rmse
        );
        rows.push(ComparisonRow {
            method,
            k_2d: ks.0,
            k_3d: ks.1,
            train_rmse: train_eval.average_rmse,
            test_rmse: test_eval.average_rmse,
            runtime_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ComparisonReport { rows, config: String::new() })
}
