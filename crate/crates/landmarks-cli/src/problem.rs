//! Problem JSON: kernel, smoothing, arrays, and command parameters.

use std::path::PathBuf;

use serde::Deserialize;

use landmarks::kernels::Kernel;
use landmarks::manifold::Smoothing;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kernel: Option<Kernel>,
    pub lambda: Option<LambdaSpec>,
    pub q: Option<Vec<Vec<f64>>>,
    pub p: Option<Vec<Vec<f64>>>,
    pub alpha: Option<Vec<Vec<f64>>>,
    pub beta: Option<Vec<Vec<f64>>>,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub passive: Option<Vec<Vec<f64>>>,
    pub grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Number(f64),
    Text(String),
}

/// Rectangular grid of passive points (two-dimensional problems).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<Vec<f64>>, CliError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(CliError::input("grid needs nx, ny >= 2"));
        }
        let mut rows = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64;
            for i in 0..self.nx {
                let x = self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64;
                rows.push(vec![x, y]);
            }
        }
        Ok(rows)
    }
}

impl ProblemSpec {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read problem file: {e}")))?;
        let spec: ProblemSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("malformed problem JSON: {e}")))?;
        Ok(spec)
    }

    pub fn smoothing(&self) -> Result<Smoothing, CliError> {
        match &self.lambda {
            None => Ok(Smoothing::Exact),
            Some(LambdaSpec::Number(v)) => {
                Smoothing::finite(*v).map_err(|e| CliError::input(format!("invalid lambda: {e}")))
            }
            Some(LambdaSpec::Text(s)) if s == "inf" => Ok(Smoothing::Exact),
            Some(LambdaSpec::Text(s)) => Err(CliError::input(format!(
                "lambda must be a number or \"inf\", got {s:?}"
            ))),
        }
    }

    /// Geodesics and curvature are defined for exact matching only.
    pub fn require_exact_matching(&self, command: &str) -> Result<(), CliError> {
        match self.smoothing()? {
            Smoothing::Exact => Ok(()),
            Smoothing::Finite(_) => Err(CliError::input(format!(
                "{command} requires lambda = \"inf\" (exact matching)"
            ))),
        }
    }
}

/// Parse `--kernel-json` as either a file path or inline JSON.
pub fn kernel_from_arg(arg: &str) -> Result<Kernel, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::input(format!("cannot read kernel file: {e}")))?
    };
    let kernel: Kernel = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed kernel JSON: {e}")))?;
    kernel
        .validate()
        .map_err(|e| CliError::input(format!("{e}")))?;
    Ok(kernel)
}
