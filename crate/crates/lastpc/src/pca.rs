//! Fitting a PCA model: log/SI transform, centering or standardization,
//! eigendecomposition (direct or snapshot), and PC scores.

use crate::error::{Error, Result};
use crate::numeric::{
    eigh_jacobi, eigh_snapshot, moment_matrix, ConstantColumnPolicy, EigenDecomposition,
    MatrixKind,
};
use crate::table::DataTable;

/// A fitted PCA model. Immutable after fit.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Column means of the retained columns, in retained order.
    pub means: Vec<f64>,
    /// Column standard deviations (n-1 denominator) of the retained columns.
    pub sds: Vec<f64>,
    pub decomposition: EigenDecomposition,
    /// PC scores of the fitted data, row-major `n_cases * k`.
    pub scores: Vec<f64>,
    pub n_cases: usize,
    pub log_space: bool,
    /// Original column indices retained in the fit.
    pub retained: Vec<usize>,
    /// Original column indices dropped as constant.
    pub dropped: Vec<usize>,
    pub variable_names: Vec<String>,
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.decomposition.len()
    }

    pub fn score(&self, case: usize, pc: usize) -> f64 {
        self.scores[case * self.k() + pc]
    }

    pub fn score_column(&self, pc: usize) -> Vec<f64> {
        (0..self.n_cases).map(|i| self.score(i, pc)).collect()
    }
}

/// Natural-log transform after conversion to SI units.
///
/// `constant_additions` (per variable, in pre-log SI units) is applied
/// before the log, for variables that need an offset.
pub fn log_transform_si(
    table: &DataTable,
    constant_additions: Option<&[f64]>,
) -> Result<DataTable> {
    if let Some(adds) = constant_additions {
        if adds.len() != table.n_vars {
            return Err(Error::input("constant_additions length must match variable count"));
        }
    }
    let mut values = Vec::with_capacity(table.values.len());
    for i in 0..table.n_cases {
        for j in 0..table.n_vars {
            let mut v = table.get(i, j) * table.unit_scale[j];
            if let Some(adds) = constant_additions {
                v += adds[j];
            }
            if v.is_nan() || v <= 0.0 {
                let case = table
                    .case_labels
                    .as_ref()
                    .map(|l| l[i].clone())
                    .unwrap_or_else(|| format!("{}", i + 1));
                return Err(Error::input(format!(
                    "nonpositive value {v} for variable {} in case {case}; cannot take log",
                    table.variable_names[j]
                )));
            }
            values.push(v.ln());
        }
    }
    let mut out = DataTable::new(
        table.variable_names.clone(),
        vec![1.0; table.n_vars],
        values,
        table.n_cases,
    )?;
    out.case_labels = table.case_labels.clone();
    Ok(out)
}

/// Fit a PCA model on the table.
///
/// The snapshot (Gram-matrix) route is taken automatically when the
/// retained column count exceeds the case count; the direct route
/// decomposes the p-by-p moment matrix.
pub fn fit_pca(
    table: &DataTable,
    kind: MatrixKind,
    policy: ConstantColumnPolicy,
) -> Result<PcaModel> {
    fit_pca_with_space(table, kind, policy, false)
}

pub fn fit_pca_with_space(
    table: &DataTable,
    kind: MatrixKind,
    policy: ConstantColumnPolicy,
    log_space: bool,
) -> Result<PcaModel> {
    let n = table.n_cases;
    let mm = moment_matrix(table, kind, policy)?;
    let pr = mm.retained.len();

    // centered (and standardized, for correlation kind) retained data
    let mut z = vec![0.0; n * pr];
    for i in 0..n {
        for (a, &j) in mm.retained.iter().enumerate() {
            let mut v = table.get(i, j) - mm.means[j];
            if kind == MatrixKind::Correlation {
                v /= mm.sds[j];
            }
            z[i * pr + a] = v;
        }
    }

    let decomposition = if pr > n {
        eigh_snapshot(&z, n, pr, kind)?
    } else {
        eigh_jacobi(&mm.matrix)?
    };

    let k = decomposition.len();
    let mut scores = vec![0.0; n * k];
    for i in 0..n {
        for (j, v) in decomposition.vectors.iter().enumerate() {
            let mut s = 0.0;
            for a in 0..pr {
                s += z[i * pr + a] * v[a];
            }
            scores[i * k + j] = s;
        }
    }

    Ok(PcaModel {
        means: mm.retained.iter().map(|&j| mm.means[j]).collect(),
        sds: mm.retained.iter().map(|&j| mm.sds[j]).collect(),
        decomposition,
        scores,
        n_cases: n,
        log_space,
        retained: mm.retained,
        dropped: mm.dropped,
        variable_names: table.variable_names.clone(),
    })
}

/// Scree data: 1-based index paired with the square root of each
/// eigenvalue (tiny negative eigenvalues clamp to zero).
pub fn scree_data(model: &PcaModel) -> Vec<(usize, f64)> {
    model
        .decomposition
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lam)| (i + 1, lam.max(0.0).sqrt()))
        .collect()
}

/// Projection of the raw (uncentered) table values onto
/// `loading_scale * eigenvector`, one value per case.
///
/// The table must be in the same (log or raw) space as the fitted model.
pub fn project_uncentered(
    model: &PcaModel,
    table: &DataTable,
    eigenvector_index: usize,
    loading_scale: f64,
) -> Result<Vec<f64>> {
    if eigenvector_index >= model.k() {
        return Err(Error::input(format!(
            "eigenvector index {eigenvector_index} out of range (k = {})",
            model.k()
        )));
    }
    let v = model.decomposition.eigenvector(eigenvector_index);
    let w: Vec<f64> = v.iter().map(|x| x * loading_scale).collect();
    project_vector_uncentered(model, table, &w)
}

/// Uncentered projection onto an arbitrary loading vector over the
/// model's retained columns.
pub fn project_vector_uncentered(
    model: &PcaModel,
    table: &DataTable,
    loadings: &[f64],
) -> Result<Vec<f64>> {
    if loadings.len() != model.retained.len() {
        return Err(Error::input(format!(
            "loading vector length {} does not match retained column count {}",
            loadings.len(),
            model.retained.len()
        )));
    }
    let mut out = Vec::with_capacity(table.n_cases);
    for i in 0..table.n_cases {
        let mut s = 0.0;
        for (a, &j) in model.retained.iter().enumerate() {
            s += table.get(i, j) * loadings[a];
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::solar_dataset;
    use crate::numeric::{ConstantColumnPolicy, MatrixKind};
    use crate::table::DataTable;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_si_transform_oracle_values() {
        let table = solar_dataset();
        let logged = log_transform_si(&table, None).unwrap();
        // Earth row: a = 14.95104 * 1e10, T = 31557600 * 1
        assert_abs_diff_eq!(logged.get(2, 0), 25.730631792574997, epsilon = 1e-12);
        assert_abs_diff_eq!(logged.get(2, 4), 17.267325005422954, epsilon = 1e-12);
        assert_eq!(logged.unit_scale, vec![1.0; 5]);
    }

    #[test]
    fn log_transform_rejects_nonpositive() {
        let table = DataTable::new(
            vec!["x".into()],
            vec![1.0],
            vec![1.0, -2.0, 3.0],
            3,
        )
        .unwrap();
        let err = log_transform_si(&table, None).unwrap_err();
        assert!(err.to_string().contains("x"));
    }

    fn simple_table() -> DataTable {
        DataTable::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![1.0, 1.0, 1.0],
            vec![
                1.0, 2.0, 0.5, //
                2.0, 3.9, 1.1, //
                3.0, 6.2, 1.4, //
                4.0, 7.8, 2.2, //
                5.0, 10.1, 2.4, //
                6.0, 12.0, 3.1,
            ],
            6,
        )
        .unwrap()
    }

    #[test]
    fn score_variance_equals_eigenvalue() {
        let table = simple_table();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let n = model.n_cases as f64;
        for pc in 0..model.k() {
            let col = model.score_column(pc);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert_abs_diff_eq!(var, model.decomposition.eigenvalues[pc], epsilon = 1e-10);
        }
    }

    #[test]
    fn scores_are_uncorrelated() {
        let table = simple_table();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let n = model.n_cases as f64;
        for a in 0..model.k() {
            for b in (a + 1)..model.k() {
                let (ca, cb) = (model.score_column(a), model.score_column(b));
                let (ma, mb) = (
                    ca.iter().sum::<f64>() / n,
                    cb.iter().sum::<f64>() / n,
                );
                let cov: f64 = ca
                    .iter()
                    .zip(&cb)
                    .map(|(x, y)| (x - ma) * (y - mb))
                    .sum::<f64>()
                    / (n - 1.0);
                assert_abs_diff_eq!(cov, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn eigenvalue_sum_matches_total_variance() {
        let table = simple_table();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let n = model.n_cases as f64;
        let mut total = 0.0;
        for j in 0..table.n_vars {
            let col = table.column(j);
            let mean = col.iter().sum::<f64>() / n;
            total += col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        }
        let sum: f64 = model.decomposition.eigenvalues.iter().sum();
        assert_abs_diff_eq!(sum, total, epsilon = 1e-10);
    }

    #[test]
    fn column_permutation_permutes_loadings() {
        let table = simple_table();
        let permuted = table.select_columns(&[2, 0, 1]);
        let m1 = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let m2 = fit_pca(&permuted, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        for pc in 0..m1.k() {
            assert_abs_diff_eq!(
                m1.decomposition.eigenvalues[pc],
                m2.decomposition.eigenvalues[pc],
                epsilon = 1e-10
            );
            let v1 = m1.decomposition.eigenvector(pc);
            let v2 = m2.decomposition.eigenvector(pc);
            // permuted column j of m2 is original column perm[j]
            for (j2, &j1) in [2usize, 0, 1].iter().enumerate() {
                assert_abs_diff_eq!(v2[j2], v1[j1], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn scree_is_one_based_and_sqrt() {
        let table = simple_table();
        let model = fit_pca(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let scree = scree_data(&model);
        assert_eq!(scree[0].0, 1);
        assert_abs_diff_eq!(
            scree[0].1,
            model.decomposition.eigenvalues[0].sqrt(),
            epsilon = 1e-14
        );
    }
}
