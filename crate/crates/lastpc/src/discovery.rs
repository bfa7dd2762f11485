//! The law-finding layer: ranking low-eigenvalue eigenvectors by the
//! spatial variability of their loadings, integerizing loadings,
//! estimating the law constant, and mapping a selected eigenvector to
//! per-grid-point regression slopes.

use serde::{Deserialize, Serialize};

use crate::bridge::pca_slope_to_beta;
use crate::error::{Error, Result};
use crate::numeric::ttest::{t_test_one_sample, TTestResult};
use crate::numeric::NULL_EIGENVALUE_REL;
use crate::pca::{project_vector_uncentered, PcaModel};
use crate::table::DataTable;

/// Contiguous per-field index ranges into a stacked loading vector.
/// Bounds are 0-based half-open; together they cover [0, L) exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub field_names: Vec<String>,
    pub bounds: Vec<(usize, usize)>,
}

impl SegmentSpec {
    pub fn new(field_names: Vec<String>, bounds: Vec<(usize, usize)>) -> Result<Self> {
        if field_names.len() != bounds.len() || bounds.is_empty() {
            return Err(Error::input("segment names and bounds must match and be non-empty"));
        }
        let mut expected_start = 0;
        for &(s, e) in &bounds {
            if s != expected_start || e <= s {
                return Err(Error::input(
                    "segments must be disjoint, contiguous, and cover the loading vector",
                ));
            }
            expected_start = e;
        }
        Ok(SegmentSpec { field_names, bounds })
    }

    pub fn total_len(&self) -> usize {
        self.bounds.last().map(|&(_, e)| e).unwrap_or(0)
    }

    pub fn field_bounds(&self, name: &str) -> Option<(usize, usize)> {
        self.field_names
            .iter()
            .position(|f| f == name)
            .map(|i| self.bounds[i])
    }

    /// The loading value of an all-equal unit eigenvector, 1/sqrt(L).
    pub fn equal_loading_reference(&self) -> f64 {
        1.0 / (self.total_len() as f64).sqrt()
    }
}

/// Population standard deviation of the loadings within each segment,
/// plus the equal-loading reference 1/sqrt(L).
pub fn segment_loading_sd(eigenvector: &[f64], segments: &SegmentSpec) -> Result<(Vec<f64>, f64)> {
    if eigenvector.len() != segments.total_len() {
        return Err(Error::input(format!(
            "loading vector length {} does not match segment total {}",
            eigenvector.len(),
            segments.total_len()
        )));
    }
    let sds = segments
        .bounds
        .iter()
        .map(|&(s, e)| {
            let seg = &eigenvector[s..e];
            let m = seg.iter().sum::<f64>() / seg.len() as f64;
            (seg.iter().map(|x| (x - m).powi(2)).sum::<f64>() / seg.len() as f64).sqrt()
        })
        .collect();
    Ok((sds, segments.equal_loading_reference()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub eigenvector_index: usize,
    pub eigenvalue: f64,
    pub per_segment_loading_sd: Vec<f64>,
    pub law_score: f64,
    /// Largest absolute loading on a zero-variance column; tie-breaker
    /// that demotes trivially-constant directions.
    pub constant_column_weight: f64,
}

/// Candidates from the low-eigenvalue pool, ascending by law score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRanking {
    pub entries: Vec<CandidateEntry>,
    pub equal_loading_reference: f64,
}

impl CandidateRanking {
    pub fn best(&self) -> Option<&CandidateEntry> {
        self.entries.first()
    }
}

/// Rank eigenvectors whose eigenvalue lies in the lowest `pool_quantile`
/// of the nonzero spectrum, plus every numerically-zero eigenpair. The
/// law score of a candidate is the maximum per-segment loading SD over
/// the law fields (all fields when unspecified); small scores rank
/// first. Ties prefer candidates whose loadings avoid constant columns
/// (a direction along a zero-variance column is constant trivially, not
/// a relation), then the smaller eigenvalue.
pub fn rank_law_candidates(
    model: &PcaModel,
    segments: &SegmentSpec,
    pool_quantile: f64,
    law_fields: Option<&[String]>,
) -> Result<CandidateRanking> {
    if !(pool_quantile > 0.0 && pool_quantile <= 1.0) {
        return Err(Error::input("pool quantile must lie in (0, 1]"));
    }
    let law_idx: Vec<usize> = match law_fields {
        None => (0..segments.field_names.len()).collect(),
        Some(names) => {
            let mut idx = Vec::new();
            for name in names {
                match segments.field_names.iter().position(|f| f == name) {
                    Some(i) => idx.push(i),
                    None => {
                        return Err(Error::input(format!(
                            "law field {name:?} is not a segment field (have: {})",
                            segments.field_names.join(", ")
                        )))
                    }
                }
            }
            idx
        }
    };

    let eigenvalues = &model.decomposition.eigenvalues;
    let lam_max = eigenvalues.first().copied().unwrap_or(0.0);
    let nonzero: Vec<usize> = (0..eigenvalues.len())
        .filter(|&j| eigenvalues[j] > NULL_EIGENVALUE_REL * lam_max)
        .collect();
    if nonzero.is_empty() {
        return Err(Error::input("empty nonzero spectrum; nothing to rank"));
    }
    let pool_size = ((pool_quantile * nonzero.len() as f64).ceil() as usize).max(1);
    let mut pool: Vec<usize> =
        nonzero[nonzero.len() - pool_size.min(nonzero.len())..].to_vec();
    pool.extend((0..eigenvalues.len()).filter(|j| !nonzero.contains(j)));
    pool.sort_unstable();

    let constant_cols: Vec<usize> = (0..model.sds.len())
        .filter(|&j| model.sds[j] <= f64::EPSILON)
        .collect();
    let mut entries = Vec::with_capacity(pool.len());
    for &j in &pool {
        let v = model.decomposition.eigenvector(j);
        let (sds, _) = segment_loading_sd(v, segments)?;
        let law_score = law_idx.iter().map(|&i| sds[i]).fold(f64::NEG_INFINITY, f64::max);
        let constant_column_weight = constant_cols
            .iter()
            .map(|&c| v[c].abs())
            .fold(0.0f64, f64::max);
        entries.push(CandidateEntry {
            eigenvector_index: j,
            eigenvalue: eigenvalues[j],
            per_segment_loading_sd: sds,
            law_score,
            constant_column_weight,
        });
    }
    entries.sort_by(|a, b| {
        a.law_score
            .partial_cmp(&b.law_score)
            .unwrap()
            .then(a.constant_column_weight.partial_cmp(&b.constant_column_weight).unwrap())
            .then(a.eigenvalue.partial_cmp(&b.eigenvalue).unwrap())
            .then(a.eigenvector_index.cmp(&b.eigenvector_index))
    });
    Ok(CandidateRanking { entries, equal_loading_reference: segments.equal_loading_reference() })
}

/// An eigenvector rescaled so its loadings approach small integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerizedLoadings {
    pub raw: Vec<f64>,
    pub scale: f64,
    pub scaled: Vec<f64>,
    pub rounded: Vec<i64>,
    pub max_residual: f64,
}

/// Loadings with scaled magnitude below this do not count toward the
/// integerization residual.
const NEGLIGIBLE_SCALED: f64 = 0.1;

fn residual_for(scaled: &[f64]) -> f64 {
    scaled
        .iter()
        .filter(|x| x.abs() > NEGLIGIBLE_SCALED)
        .map(|x| (x - x.round()).abs())
        .fold(0.0, f64::max)
}

/// Rescale an eigenvector so the pivot loading maps to an integer
/// target, picking the target in `1..=max_target` that minimizes the
/// worst distance of the non-negligible loadings to the nearest integer.
///
/// `pivot = None` selects the largest-magnitude loading; `target = None`
/// searches the range.
pub fn integerize(
    eigenvector: &[f64],
    pivot: Option<usize>,
    target: Option<u32>,
    max_target: u32,
) -> Result<IntegerizedLoadings> {
    if eigenvector.is_empty() {
        return Err(Error::input("empty loading vector"));
    }
    let pivot = match pivot {
        Some(i) if i < eigenvector.len() => i,
        Some(i) => return Err(Error::input(format!("pivot index {i} out of range"))),
        None => {
            let mut best = 0;
            for (i, x) in eigenvector.iter().enumerate() {
                if x.abs() > eigenvector[best].abs() {
                    best = i;
                }
            }
            best
        }
    };
    if eigenvector[pivot] == 0.0 {
        return Err(Error::input("pivot loading is zero"));
    }

    let candidates: Vec<u32> = match target {
        Some(t) => vec![t],
        None => (1..=max_target.max(1)).collect(),
    };
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for t in candidates {
        let scale = t as f64 / eigenvector[pivot];
        let scaled: Vec<f64> = eigenvector.iter().map(|x| x * scale).collect();
        let res = residual_for(&scaled);
        if best.as_ref().is_none_or(|(r, _, _)| res < *r) {
            best = Some((res, scale, scaled));
        }
    }
    let (max_residual, scale, scaled) = best.unwrap();
    let rounded = scaled.iter().map(|x| x.round() as i64).collect();
    Ok(IntegerizedLoadings { raw: eigenvector.to_vec(), scale, scaled, rounded, max_residual })
}

/// Mean (over cases) of the uncentered projection onto the integerized
/// loadings; per-case values come along for dispersion diagnostics.
pub fn estimate_constant(
    model: &PcaModel,
    table: &DataTable,
    loadings: &IntegerizedLoadings,
    use_rounded: bool,
) -> Result<(f64, Vec<f64>)> {
    let w: Vec<f64> = if use_rounded {
        loadings.rounded.iter().map(|&x| x as f64).collect()
    } else {
        loadings.scaled.clone()
    };
    let per_case = project_vector_uncentered(model, table, &w)?;
    let mean = per_case.iter().sum::<f64>() / per_case.len() as f64;
    Ok((mean, per_case))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    NearZeroLoading,
    DegenerateMoments,
}

/// Per-grid-point regression slopes recovered from one eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaMap {
    pub nlat: usize,
    pub nlon: usize,
    /// Physical-unit slope per grid point (lat-major); finite only where
    /// valid.
    pub beta: Vec<f64>,
    pub valid: Vec<bool>,
    pub invalid_reasons: Vec<Option<InvalidReason>>,
    pub mean_beta: f64,
    pub theoretical_beta: Option<f64>,
    pub summary: Option<TTestResult>,
}

impl BetaMap {
    pub fn valid_betas(&self) -> Vec<f64> {
        self.beta
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&b, _)| b)
            .collect()
    }
}

/// A pair loading whose magnitude falls below this multiple of the
/// segment RMS loading is too noise-dominated for a slope ratio.
pub const BETA_LOADING_RMS_FRACTION: f64 = 1.0;

/// Map a selected eigenvector of a correlation-kind model over a
/// flattened stack to per-grid-point regression slopes for one field
/// pair.
///
/// Per point g: the constancy line vx(g) x + vy(g) y ~ const gives the
/// standardized PCA slope b = -vx/vy, converted to a standardized
/// regression slope with the per-point sample correlation, then
/// unstandardized by sd_y/sd_x. Points where either pair loading is
/// near zero relative to its segment RMS, or the moments degenerate,
/// are masked invalid.
#[allow(clippy::too_many_arguments)]
pub fn grid_beta_map(
    model: &PcaModel,
    table: &DataTable,
    segments: &SegmentSpec,
    nlat: usize,
    nlon: usize,
    eigenvector_index: usize,
    pair: (&str, &str),
    theoretical_beta: Option<f64>,
) -> Result<BetaMap> {
    let (xs, xe) = segments
        .field_bounds(pair.0)
        .ok_or_else(|| Error::input(format!("pair field {:?} not in segments", pair.0)))?;
    let (ys, ye) = segments
        .field_bounds(pair.1)
        .ok_or_else(|| Error::input(format!("pair field {:?} not in segments", pair.1)))?;
    let npts = nlat * nlon;
    if xe - xs != npts || ye - ys != npts {
        return Err(Error::input("segment sizes do not match the grid dimensions"));
    }
    if eigenvector_index >= model.k() {
        return Err(Error::input(format!(
            "eigenvector index {eigenvector_index} out of range (k = {})",
            model.k()
        )));
    }
    if model.retained.len() != table.n_vars {
        return Err(Error::input(
            "beta mapping requires a model fitted without dropped columns",
        ));
    }
    let v = model.decomposition.eigenvector(eigenvector_index);
    let vx = &v[xs..xe];
    let vy = &v[ys..ye];
    let rms = |w: &[f64]| (w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64).sqrt();
    let (rms_x, rms_y) = (rms(vx), rms(vy));
    let floor_x = (BETA_LOADING_RMS_FRACTION * rms_x).max(1e-8);
    let floor_y = (BETA_LOADING_RMS_FRACTION * rms_y).max(1e-8);

    let n = table.n_cases;
    let mut beta = vec![f64::NAN; npts];
    let mut valid = vec![false; npts];
    let mut reasons: Vec<Option<InvalidReason>> = vec![None; npts];
    for g in 0..npts {
        if vx[g].abs() < floor_x || vy[g].abs() < floor_y {
            reasons[g] = Some(InvalidReason::NearZeroLoading);
            continue;
        }
        // per-point sample moments of the raw pair series
        let (mut mx, mut my) = (0.0, 0.0);
        for i in 0..n {
            mx += table.get(i, xs + g);
            my += table.get(i, ys + g);
        }
        mx /= n as f64;
        my /= n as f64;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let dx = table.get(i, xs + g) - mx;
            let dy = table.get(i, ys + g) - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        if sxx <= 0.0 || syy <= 0.0 {
            reasons[g] = Some(InvalidReason::DegenerateMoments);
            continue;
        }
        let rho = sxy / (sxx * syy).sqrt();
        let sd_ratio = (syy / sxx).sqrt();
        let b_std = -vx[g] / vy[g];
        let beta_std = match pca_slope_to_beta(b_std, rho.clamp(-1.0, 1.0)) {
            Ok(b) => b,
            Err(_) => {
                reasons[g] = Some(InvalidReason::DegenerateMoments);
                continue;
            }
        };
        let b_phys = beta_std * sd_ratio;
        if !b_phys.is_finite() {
            reasons[g] = Some(InvalidReason::DegenerateMoments);
            continue;
        }
        beta[g] = b_phys;
        valid[g] = true;
    }

    let valid_betas: Vec<f64> =
        beta.iter().zip(&valid).filter(|(_, &ok)| ok).map(|(&b, _)| b).collect();
    if valid_betas.is_empty() {
        return Err(Error::numerical("no valid grid points in beta map"));
    }
    let mean_beta = valid_betas.iter().sum::<f64>() / valid_betas.len() as f64;
    let summary = match theoretical_beta {
        Some(b0) => t_test_one_sample(&valid_betas, b0).ok(),
        None => None,
    };
    Ok(BetaMap {
        nlat,
        nlon,
        beta,
        valid,
        invalid_reasons: reasons,
        mean_beta,
        theoretical_beta,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ConstantColumnPolicy, MatrixKind};
    use crate::pca::fit_pca;
    use approx::assert_abs_diff_eq;

    #[test]
    fn segment_spec_validation() {
        assert!(SegmentSpec::new(vec!["a".into()], vec![(0, 3)]).is_ok());
        // gap
        assert!(SegmentSpec::new(vec!["a".into(), "b".into()], vec![(0, 2), (3, 5)]).is_err());
        // overlap
        assert!(SegmentSpec::new(vec!["a".into(), "b".into()], vec![(0, 3), (2, 5)]).is_err());
        // empty segment
        assert!(SegmentSpec::new(vec!["a".into()], vec![(0, 0)]).is_err());
        let s = SegmentSpec::new(vec!["a".into(), "b".into()], vec![(0, 2), (2, 6)]).unwrap();
        assert_eq!(s.total_len(), 6);
        assert_abs_diff_eq!(s.equal_loading_reference(), 1.0 / 6.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn segment_loading_sd_oracle() {
        let s = SegmentSpec::new(vec!["a".into(), "b".into()], vec![(0, 3), (3, 5)]).unwrap();
        let v = [1.0, 2.0, 3.0, 4.0, 4.0];
        let (sds, _) = segment_loading_sd(&v, &s).unwrap();
        // population SD of (1, 2, 3) and of (4, 4)
        assert_abs_diff_eq!(sds[0], (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(sds[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn integerize_planted_two_to_one() {
        // y = 2x has constancy direction proportional to (2, -1)
        let v = [2.0 / 5.0f64.sqrt(), -1.0 / 5.0f64.sqrt()];
        let ints = integerize(&v, Some(0), None, 6).unwrap();
        assert_eq!(ints.rounded, vec![2, -1]);
        assert!(ints.max_residual < 1e-9);
    }

    #[test]
    fn integerize_is_scale_invariant() {
        let v = [0.3, -0.6, 0.9];
        let scaled: Vec<f64> = v.iter().map(|x| x * -7.3).collect();
        let a = integerize(&v, Some(0), None, 6).unwrap();
        let b = integerize(&scaled, Some(0), None, 6).unwrap();
        assert_eq!(a.rounded, b.rounded);
        assert_abs_diff_eq!(a.max_residual, b.max_residual, epsilon = 1e-12);
    }

    #[test]
    fn integerize_ignores_negligible_loadings() {
        let v = [0.5, 1e-6, -0.25];
        let ints = integerize(&v, Some(0), Some(2), 6).unwrap();
        assert_eq!(ints.rounded, vec![2, 0, -1]);
        // the near-zero loading does not drive the residual
        assert!(ints.max_residual < 1e-5);
    }

    #[test]
    fn planted_law_pipeline_recovers_direction() {
        // y = 2x exactly, plus an independent third variable
        let n = 40;
        let mut values = Vec::new();
        for i in 0..n {
            let x = i as f64 * 0.1 + (i as f64 * 0.7).sin();
            values.extend_from_slice(&[x, 2.0 * x, (i as f64 * 1.3).cos()]);
        }
        let table = crate::table::DataTable::new(
            vec!["x".into(), "y".into(), "w".into()],
            vec![1.0, 1.0, 1.0],
            values,
            n,
        )
        .unwrap();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let last = model.k() - 1;
        assert!(model.decomposition.eigenvalues[last].abs() < 1e-10);
        let v = model.decomposition.eigenvector(last);
        let ints = integerize(v, Some(0), None, 6).unwrap();
        assert_eq!(ints.rounded, vec![2, -1, 0]);
        // the combination 2x - y is the zero constant
        let ints_est = crate::discovery::estimate_constant(&model, &table, &ints, true).unwrap();
        assert_abs_diff_eq!(ints_est.0, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn ranking_prefers_flat_law_segments() {
        // two fields of 3 loadings each; candidate pool of everything
        let n = 30;
        let mut values = Vec::new();
        for i in 0..n {
            let t = i as f64 * 0.37;
            let a = t.sin();
            let b = (1.7 * t).cos();
            // first field: three copies of a (flat loadings for any
            // direction involving it); second field: mixtures
            values.extend_from_slice(&[a, a, a, b, 0.5 * a + b, a - 0.3 * b]);
        }
        let table = crate::table::DataTable::new(
            (0..6).map(|j| format!("c{j}")).collect(),
            vec![1.0; 6],
            values,
            n,
        )
        .unwrap();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let segments =
            SegmentSpec::new(vec!["F".into(), "G".into()], vec![(0, 3), (3, 6)]).unwrap();
        let ranking = rank_law_candidates(&model, &segments, 1.0, None).unwrap();
        assert!(!ranking.entries.is_empty());
        for pair in ranking.entries.windows(2) {
            assert!(pair[0].law_score <= pair[1].law_score + 1e-15);
        }
    }

    #[test]
    fn pool_quantile_bounds_checked() {
        let s = SegmentSpec::new(vec!["a".into()], vec![(0, 2)]).unwrap();
        let table = crate::table::DataTable::new(
            vec!["x".into(), "y".into()],
            vec![1.0, 1.0],
            vec![1.0, 2.0, 2.0, 4.2, 3.0, 5.9],
            3,
        )
        .unwrap();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        assert!(rank_law_candidates(&model, &s, 0.0, None).is_err());
        assert!(rank_law_candidates(&model, &s, 1.5, None).is_err());
    }
}
