//! End-to-end discovery pipelines shared by the CLI and the C ABI.

use std::collections::BTreeMap;

use crate::bridge::{pca_lines_demo, pca_slope_to_beta, pca_slope_to_beta_verbatim, pca_slopes, BivariateMoments};
use crate::datagen;
use crate::discovery::{
    grid_beta_map, integerize, rank_law_candidates, estimate_constant, SegmentSpec,
};
use crate::error::{Error, Result};
use crate::gridded::{crop_latitudes, difference_filter, flatten_stack, GriddedStack};
use crate::numeric::{ConstantColumnPolicy, MatrixKind};
use crate::pca::{fit_pca_with_space, log_transform_si, scree_data, PcaModel};
use crate::report::{
    histogram, BetaSummary, ConstantEstimate, DiscoveryReport, GridInfo, LoadingSdRow,
    PcaLinesSection, ReportMeta, ScreePoint, SelectedEigenvector, SpectrumSummary,
};
use crate::table::DataTable;

#[derive(Debug, Clone)]
pub struct TabularOptions {
    pub log_si: bool,
    pub kind: MatrixKind,
    pub pool_quantile: f64,
    pub pivot_target: Option<u32>,
    pub max_target: u32,
}

impl Default for TabularOptions {
    fn default() -> Self {
        TabularOptions {
            log_si: false,
            kind: MatrixKind::Covariance,
            pool_quantile: 0.25,
            pivot_target: None,
            max_target: 6,
        }
    }
}

fn spectrum_summary(model: &PcaModel, n_vars: usize) -> SpectrumSummary {
    SpectrumSummary {
        kind: model.decomposition.kind,
        n_cases: model.n_cases,
        n_variables: n_vars,
        n_retained_columns: model.retained.len(),
        n_eigenpairs: model.k(),
        eigenvalues: model.decomposition.eigenvalues.clone(),
        dropped_columns: model
            .dropped
            .iter()
            .map(|&j| model.variable_names[j].clone())
            .collect(),
        warning: model.decomposition.warning.clone(),
    }
}

fn scree_points(model: &PcaModel) -> Vec<ScreePoint> {
    scree_data(model)
        .into_iter()
        .map(|(index, sqrt_eigenvalue)| ScreePoint { index, sqrt_eigenvalue })
        .collect()
}

/// First loading whose magnitude is at least a tenth of the largest;
/// the pivot convention that exposes near-integer loading patterns.
pub fn default_pivot(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter().position(|x| x.abs() >= 0.1 * max).unwrap_or(0)
}

/// Tabular discovery: optional log/SI transform, PCA, candidate ranking
/// over per-variable segments, integerization of the best candidate, and
/// the constant estimate.
pub fn discover_tabular(
    table: &DataTable,
    opts: &TabularOptions,
    meta: ReportMeta,
) -> Result<DiscoveryReport> {
    let working = if opts.log_si {
        log_transform_si(table, None)?
    } else {
        table.clone()
    };
    let model = fit_pca_with_space(&working, opts.kind, ConstantColumnPolicy::Drop, opts.log_si)?;

    let mut report = DiscoveryReport::new(meta);
    report.spectrum = Some(spectrum_summary(&model, table.n_vars));
    report.scree = scree_points(&model);

    // one single-loading segment per retained variable
    let segments = SegmentSpec::new(
        model.retained.iter().map(|&j| model.variable_names[j].clone()).collect(),
        (0..model.retained.len()).map(|i| (i, i + 1)).collect(),
    )?;
    let ranking = rank_law_candidates(&model, &segments, opts.pool_quantile, None)?;

    if let Some(best) = ranking.best() {
        let j = best.eigenvector_index;
        let v = model.decomposition.eigenvector(j).to_vec();
        let ints = integerize(&v, Some(default_pivot(&v)), opts.pivot_target, opts.max_target)?;
        let (mean, per_case) = estimate_constant(&model, &working, &ints, false)?;
        let n = per_case.len() as f64;
        let var = per_case.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        report.selected = Some(SelectedEigenvector {
            eigenvector_index: j + 1,
            eigenvalue: best.eigenvalue,
            raw_loadings: v,
            integerized: Some(ints),
            constant: Some(ConstantEstimate {
                mean,
                per_case_sd: var.sqrt(),
                halved_mean: mean / 2.0,
            }),
        });
    }
    report.candidates = Some(ranking);
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct GriddedOptions {
    pub lag: Option<usize>,
    pub crop: Option<(f64, f64)>,
    pub pool_quantile: f64,
    pub law_fields: Option<Vec<String>>,
    pub pair: Option<(String, String)>,
    pub theoretical_beta: Option<f64>,
    pub histogram_bins: Option<usize>,
}

impl GriddedOptions {
    pub fn new() -> Self {
        GriddedOptions { pool_quantile: 0.25, ..Default::default() }
    }
}

/// Gridded discovery: difference filter, latitude crop, flatten,
/// correlation PCA, loading-SD ranking, and the per-grid-point beta map
/// for the chosen field pair.
pub fn discover_gridded(
    stack: &GriddedStack,
    opts: &GriddedOptions,
    meta: ReportMeta,
) -> Result<DiscoveryReport> {
    let n_time_raw = stack.n_time;
    let mut working = stack.clone();
    if let Some(lag) = opts.lag {
        working = difference_filter(&working, lag)?;
    }
    if let Some((lo, hi)) = opts.crop {
        working = crop_latitudes(&working, lo, hi)?;
    }
    let (table, segments) = flatten_stack(&working)?;
    let model =
        fit_pca_with_space(&table, MatrixKind::Correlation, ConstantColumnPolicy::Drop, false)?;

    let mut report = DiscoveryReport::new(meta);
    report.spectrum = Some(spectrum_summary(&model, table.n_vars));
    report.scree = scree_points(&model);
    report.grid = Some(GridInfo {
        nlat: working.nlat,
        nlon: working.nlon,
        n_latitude_rows: working.nlat,
        n_time_raw,
        lag: opts.lag,
        n_cases: working.n_time,
        crop: opts.crop,
        field_names: segments.field_names.clone(),
        segments_1based: segments.bounds.iter().map(|&(s, e)| (s + 1, e)).collect(),
        equal_loading_reference: segments.equal_loading_reference(),
    });

    for j in 0..model.k() {
        let (sds, _) =
            crate::discovery::segment_loading_sd(model.decomposition.eigenvector(j), &segments)?;
        for (f, sd) in segments.field_names.iter().zip(sds) {
            report.loading_sd.push(LoadingSdRow {
                eigenvector_index: j + 1,
                field_name: f.clone(),
                loading_sd: sd,
            });
        }
    }

    let ranking = rank_law_candidates(
        &model,
        &segments,
        opts.pool_quantile,
        opts.law_fields.as_deref(),
    )?;
    let best = ranking.best().cloned();
    report.candidates = Some(ranking);

    if let Some(best) = best {
        let j = best.eigenvector_index;
        report.selected = Some(SelectedEigenvector {
            eigenvector_index: j + 1,
            eigenvalue: best.eigenvalue,
            raw_loadings: model.decomposition.eigenvector(j).to_vec(),
            integerized: None,
            constant: None,
        });
        if let Some((fx, fy)) = &opts.pair {
            let map = grid_beta_map(
                &model,
                &table,
                &segments,
                working.nlat,
                working.nlon,
                j,
                (fx, fy),
                opts.theoretical_beta,
            )?;
            let valid = map.valid_betas();
            report.beta = Some(BetaSummary {
                pair: (fx.clone(), fy.clone()),
                mean: map.mean_beta,
                valid_points: valid.len(),
                total_points: map.beta.len(),
                theoretical: map.theoretical_beta,
                t_test: map.summary.clone(),
                histogram: histogram(&valid, opts.histogram_bins),
            });
        }
    } else if opts.pair.is_some() {
        return Err(Error::input("no candidate eigenvector available for beta mapping"));
    }
    Ok(report)
}

/// Bivariate demonstration: seeded sample, PCA-line and regression
/// geometry, and both slope-to-beta conversions.
pub fn demo_bivariate(seed: u64, meta: ReportMeta) -> Result<DiscoveryReport> {
    let table = datagen::synth_bivariate_demo(seed);
    let xs = table.column(0);
    let ys = table.column(1);
    let m = BivariateMoments::from_samples(&xs, &ys)?;
    let slopes = pca_slopes(&m)?;
    let (plus, minus, regression) = pca_lines_demo(&m)?;
    let mut report = DiscoveryReport::new(meta);
    report.pca_lines = Some(PcaLinesSection {
        mu_x: m.mu_x,
        mu_y: m.mu_y,
        sigma_x: m.sigma_x,
        sigma_y: m.sigma_y,
        rho: m.rho,
        line_plus: plus,
        line_minus: minus,
        regression,
        beta_from_plus: pca_slope_to_beta(slopes.a_plus, m.rho)?,
        beta_from_minus: pca_slope_to_beta(slopes.a_minus, m.rho)?,
        beta_verbatim_from_plus: pca_slope_to_beta_verbatim(slopes.a_plus, m.rho)?,
    });
    Ok(report)
}

/// Standard report metadata block.
pub fn meta(command: &str, input: &str, seed: Option<u64>, options: &[(&str, String)]) -> ReportMeta {
    ReportMeta {
        command: command.to_string(),
        input: input.to_string(),
        seed,
        options: options
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
    }
}
