//! The discovery report: a single structured-text (JSON) document with
//! stable key order, plus the plot-data CSV emitters behind it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bridge::Line;
use crate::discovery::{CandidateRanking, IntegerizedLoadings};
use crate::error::{Error, Result};
use crate::numeric::ttest::TTestResult;
use crate::numeric::MatrixKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub command: String,
    pub input: String,
    pub seed: Option<u64>,
    pub options: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub kind: MatrixKind,
    pub n_cases: usize,
    pub n_variables: usize,
    pub n_retained_columns: usize,
    pub n_eigenpairs: usize,
    pub eigenvalues: Vec<f64>,
    pub dropped_columns: Vec<String>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreePoint {
    pub index: usize,
    pub sqrt_eigenvalue: f64,
}

/// Gridded preprocessing bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub nlat: usize,
    pub nlon: usize,
    pub n_latitude_rows: usize,
    pub n_time_raw: usize,
    pub lag: Option<usize>,
    pub n_cases: usize,
    pub crop: Option<(f64, f64)>,
    pub field_names: Vec<String>,
    /// 1-based inclusive index ranges of each field in the stacked
    /// loading vector.
    pub segments_1based: Vec<(usize, usize)>,
    pub equal_loading_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingSdRow {
    pub eigenvector_index: usize,
    pub field_name: String,
    pub loading_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub mean: f64,
    pub per_case_sd: f64,
    pub halved_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedEigenvector {
    /// 1-based rank of the eigenvector within the spectrum.
    pub eigenvector_index: usize,
    pub eigenvalue: f64,
    pub raw_loadings: Vec<f64>,
    pub integerized: Option<IntegerizedLoadings>,
    pub constant: Option<ConstantEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSummary {
    pub pair: (String, String),
    pub mean: f64,
    pub valid_points: usize,
    pub total_points: usize,
    pub theoretical: Option<f64>,
    pub t_test: Option<TTestResult>,
    pub histogram: Vec<HistBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaLinesSection {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
    pub line_plus: Line,
    pub line_minus: Line,
    pub regression: Line,
    pub beta_from_plus: f64,
    pub beta_from_minus: f64,
    /// Printed-formula variant, for comparison only.
    pub beta_verbatim_from_plus: f64,
}

/// The full structured report. Field order is the serialized key order;
/// identical runs serialize byte-identically and round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryReport {
    pub meta: ReportMeta,
    pub spectrum: Option<SpectrumSummary>,
    pub scree: Vec<ScreePoint>,
    pub grid: Option<GridInfo>,
    pub loading_sd: Vec<LoadingSdRow>,
    pub candidates: Option<CandidateRanking>,
    pub selected: Option<SelectedEigenvector>,
    pub beta: Option<BetaSummary>,
    pub pca_lines: Option<PcaLinesSection>,
}

impl DiscoveryReport {
    pub fn new(meta: ReportMeta) -> Self {
        DiscoveryReport {
            meta,
            spectrum: None,
            scree: vec![],
            grid: None,
            loading_sd: vec![],
            candidates: None,
            selected: None,
            beta: None,
            pca_lines: None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Freedman-Diaconis histogram; `bins_override` forces a bin count.
pub fn histogram(values: &[f64], bins_override: Option<usize>) -> Vec<HistBin> {
    if values.is_empty() {
        return vec![];
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len();
    let nbins = match bins_override {
        Some(b) => b.max(1),
        None => {
            let q = |p: f64| -> f64 {
                // linear interpolation between order statistics
                let h = p * (n - 1) as f64;
                let lo = h.floor() as usize;
                let hi = h.ceil() as usize;
                sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
            };
            let iqr = q(0.75) - q(0.25);
            let width = 2.0 * iqr / (n as f64).cbrt();
            if width > 0.0 && max > min {
                ((max - min) / width).ceil() as usize
            } else {
                1
            }
        }
    };
    let span = if max > min { max - min } else { 1.0 };
    let width = span / nbins as f64;
    let mut bins: Vec<HistBin> = (0..nbins)
        .map(|i| HistBin { left: min + i as f64 * width, right: min + (i + 1) as f64 * width, count: 0 })
        .collect();
    for &v in values {
        let mut idx = ((v - min) / width) as usize;
        if idx >= nbins {
            idx = nbins - 1;
        }
        bins[idx].count += 1;
    }
    bins
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Scree,
    LoadingSd,
    BetaHist,
    PcaLines,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scree" => Ok(PlotKind::Scree),
            "loading-sd" => Ok(PlotKind::LoadingSd),
            "beta-hist" => Ok(PlotKind::BetaHist),
            "pca-lines" => Ok(PlotKind::PcaLines),
            other => Err(Error::input(format!(
                "unknown plot data kind {other:?} (expected scree, loading-sd, beta-hist, or pca-lines)"
            ))),
        }
    }
}

impl PlotKind {
    pub fn file_name(&self) -> &'static str {
        match self {
            PlotKind::Scree => "scree.csv",
            PlotKind::LoadingSd => "loading_sd.csv",
            PlotKind::BetaHist => "beta_hist.csv",
            PlotKind::PcaLines => "pca_lines.csv",
        }
    }
}

/// Render the CSV behind one figure. Byte-stable for identical reports.
pub fn plot_data_csv(report: &DiscoveryReport, kind: PlotKind) -> Result<String> {
    let mut out = String::new();
    match kind {
        PlotKind::Scree => {
            out.push_str("index,sqrt_eigenvalue\n");
            for p in &report.scree {
                out.push_str(&format!("{},{}\n", p.index, p.sqrt_eigenvalue));
            }
        }
        PlotKind::LoadingSd => {
            if report.loading_sd.is_empty() {
                return Err(Error::input("report carries no loading-SD table"));
            }
            out.push_str("eigenvector_index,field_name,loading_sd\n");
            for r in &report.loading_sd {
                out.push_str(&format!("{},{},{}\n", r.eigenvector_index, r.field_name, r.loading_sd));
            }
            if let Some(grid) = &report.grid {
                out.push_str(&format!(
                    "0,equal_loading_reference,{}\n",
                    grid.equal_loading_reference
                ));
            }
        }
        PlotKind::BetaHist => {
            let beta = report
                .beta
                .as_ref()
                .ok_or_else(|| Error::input("report carries no beta summary"))?;
            out.push_str("bin_left,bin_right,count\n");
            for b in &beta.histogram {
                out.push_str(&format!("{},{},{}\n", b.left, b.right, b.count));
            }
        }
        PlotKind::PcaLines => {
            let pl = report
                .pca_lines
                .as_ref()
                .ok_or_else(|| Error::input("report carries no PCA-lines section"))?;
            out.push_str("line,slope,intercept\n");
            out.push_str(&format!("pca_plus,{},{}\n", pl.line_plus.slope, pl.line_plus.intercept));
            out.push_str(&format!("pca_minus,{},{}\n", pl.line_minus.slope, pl.line_minus.intercept));
            out.push_str(&format!("regression,{},{}\n", pl.regression.slope, pl.regression.intercept));
        }
    }
    Ok(out)
}

/// Write one plot-data CSV next to `out_dir`, returning the path.
pub fn emit_plot_data(
    report: &DiscoveryReport,
    kind: PlotKind,
    out_dir: &Path,
) -> Result<std::path::PathBuf> {
    let csv = plot_data_csv(report, kind)?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(kind.file_name());
    std::fs::write(&path, csv)?;
    Ok(path)
}
