//! Deterministic symmetric eigensolvers and moment estimation.

pub mod sampling;
pub mod special;
pub mod ttest;

use crate::error::{Error, Result};
use crate::table::DataTable;

/// Relative eigenvalue threshold below which a mode counts as part of the
/// numerical null space.
pub const NULL_EIGENVALUE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Covariance,
    Correlation,
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixKind::Covariance => write!(f, "covariance"),
            MatrixKind::Correlation => write!(f, "correlation"),
        }
    }
}

/// Dense symmetric matrix; the upper triangle is authoritative and the
/// lower triangle mirrors it exactly.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    pub dim: usize,
    entries: Vec<f64>,
    pub kind: MatrixKind,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize, kind: MatrixKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("symmetric matrix dimension must be >= 1"));
        }
        Ok(SymmetricMatrix { dim, entries: vec![0.0; dim * dim], kind })
    }

    /// Build from a row-major buffer, mirroring the upper triangle.
    pub fn from_upper(dim: usize, data: &[f64], kind: MatrixKind) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::input("buffer length does not match dimension"));
        }
        let mut m = Self::zeros(dim, kind)?;
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, data[i * dim + j]);
            }
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim, MatrixKind::Covariance)?;
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Symmetric write of entry (i, j).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
/// matrix. Eigenvectors are stored column-wise: `vectors[j][i]` is the
/// i-th component of eigenvector j.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub kind: MatrixKind,
    pub source_dim: usize,
    /// Set when the input carried no signal (e.g. all-zero data matrix).
    pub warning: Option<String>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }
}

/// Flip a loading vector so its largest-magnitude entry is positive,
/// ties broken by lowest index.
pub fn normalize_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn lex_cmp_desc(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match y.partial_cmp(x) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Sort eigenpairs descending by eigenvalue; degenerate pairs
/// (within `tie_tol`) are ordered by lexicographic order of their
/// sign-normalized loadings, largest first.
fn sort_eigenpairs(values: &mut Vec<f64>, vectors: &mut Vec<Vec<f64>>, tie_tol: f64) {
    for v in vectors.iter_mut() {
        normalize_sign(v);
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        if (values[a] - values[b]).abs() <= tie_tol {
            lex_cmp_desc(&vectors[a], &vectors[b])
        } else {
            values[b].partial_cmp(&values[a]).unwrap()
        }
    });
    *values = idx.iter().map(|&i| values[i]).collect();
    *vectors = idx.iter().map(|&i| vectors[i].clone()).collect();
}

/// Full eigendecomposition of a symmetric matrix via cyclic Jacobi sweeps.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||m||_F`, up to 100 sweeps.
pub fn eigh_jacobi(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if !m.is_finite() {
        return Err(Error::input("matrix contains NaN or Inf"));
    }
    let n = m.dim;
    let frob = m.frobenius_norm();
    let tol = 1e-12 * frob;

    let mut a: Vec<f64> = (0..n * n).map(|k| m.get(k / n, k % n)).collect();
    // eigenvector matrix, v[i*n + j] = component i of eigenvector j
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut converged = off(&a) <= tol;
    let mut sweeps = 0usize;
    while !converged && sweeps < 100 {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // smaller-magnitude root for stability
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off(&a) <= tol;
    }
    if !converged {
        return Err(Error::numerical(format!(
            "Jacobi eigensolver did not converge after {sweeps} sweeps; off-diagonal norm {:.3e} (tolerance {:.3e})",
            off(&a),
            tol
        )));
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut vectors: Vec<Vec<f64>> =
        (0..n).map(|j| (0..n).map(|i| v[i * n + j]).collect()).collect();
    let lam_max = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    sort_eigenpairs(&mut values, &mut vectors, NULL_EIGENVALUE_REL * lam_max);
    Ok(EigenDecomposition {
        eigenvalues: values,
        vectors,
        kind: m.kind,
        source_dim: n,
        warning: None,
    })
}

/// Eigenpairs of the p-by-p sample covariance of a centered n-by-p data
/// matrix, computed through the n-by-n Gram matrix ("snapshot" route).
///
/// Returns only the eigenpairs with eigenvalue above
/// `1e-12 * lambda_max`; their count never exceeds `min(p, n - 1)`.
pub fn eigh_snapshot(
    data_centered: &[f64],
    n: usize,
    p: usize,
    kind: MatrixKind,
) -> Result<EigenDecomposition> {
    if n < 2 {
        return Err(Error::input(format!("snapshot eigensolver needs n >= 2 cases, got {n}")));
    }
    if data_centered.len() != n * p {
        return Err(Error::input("data buffer length does not match n x p"));
    }
    if data_centered.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("data matrix contains NaN or Inf"));
    }
    if data_centered.iter().all(|v| *v == 0.0) {
        return Ok(EigenDecomposition {
            eigenvalues: vec![],
            vectors: vec![],
            kind,
            source_dim: p,
            warning: Some("zero data matrix: empty spectrum".to_string()),
        });
    }

    let mut gram = SymmetricMatrix::zeros(n, kind)?;
    let denom = (n - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..p {
                s += data_centered[i * p + k] * data_centered[j * p + k];
            }
            gram.set(i, j, s / denom);
        }
    }
    let gdec = eigh_jacobi(&gram)?;
    let lam_max = gdec.eigenvalues.first().copied().unwrap_or(0.0);
    let cutoff = NULL_EIGENVALUE_REL * lam_max.max(0.0);
    let limit = p.min(n - 1);

    let mut values = Vec::new();
    let mut vectors = Vec::new();
    for (j, &lam) in gdec.eigenvalues.iter().enumerate() {
        if lam <= cutoff || values.len() == limit {
            break;
        }
        let u = gdec.eigenvector(j);
        // reconstruct p-dimensional eigenvector as X^T u / ||X^T u||
        let mut w = vec![0.0; p];
        for (i, ui) in u.iter().enumerate() {
            for k in 0..p {
                w[k] += data_centered[i * p + k] * ui;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        normalize_sign(&mut w);
        values.push(lam);
        vectors.push(w);
    }
    Ok(EigenDecomposition { eigenvalues: values, vectors, kind, source_dim: p, warning: None })
}

/// Column statistics and the moment matrix of a data table.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: SymmetricMatrix,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Original column indices dropped as constant (correlation kind,
    /// drop policy only).
    pub dropped: Vec<usize>,
    /// Original column indices retained, in order.
    pub retained: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantColumnPolicy {
    Error,
    Drop,
}

/// Variance below this (in squared data units) marks a column constant.
pub const CONSTANT_VARIANCE_EPS: f64 = 1e-24;

/// Unbiased covariance or correlation matrix of the table columns.
pub fn moment_matrix(
    table: &DataTable,
    kind: MatrixKind,
    policy: ConstantColumnPolicy,
) -> Result<MomentMatrix> {
    let n = table.n_cases;
    let p = table.n_vars;
    if n < 2 {
        return Err(Error::input(format!("moment matrix needs at least 2 cases, got {n}")));
    }

    let means: Vec<f64> =
        (0..p).map(|j| (0..n).map(|i| table.get(i, j)).sum::<f64>() / n as f64).collect();
    let vars: Vec<f64> = (0..p)
        .map(|j| {
            (0..n).map(|i| (table.get(i, j) - means[j]).powi(2)).sum::<f64>() / (n - 1) as f64
        })
        .collect();
    let sds: Vec<f64> = vars.iter().map(|v| v.sqrt()).collect();

    let constant: Vec<usize> =
        (0..p).filter(|&j| vars[j] < CONSTANT_VARIANCE_EPS).collect();
    let (retained, dropped) = if kind == MatrixKind::Correlation && !constant.is_empty() {
        match policy {
            ConstantColumnPolicy::Error => {
                let names: Vec<&str> =
                    constant.iter().map(|&j| table.variable_names[j].as_str()).collect();
                return Err(Error::input(format!(
                    "constant column(s) under correlation kind: {}",
                    names.join(", ")
                )));
            }
            ConstantColumnPolicy::Drop => {
                let retained: Vec<usize> = (0..p).filter(|j| !constant.contains(j)).collect();
                (retained, constant)
            }
        }
    } else {
        ((0..p).collect(), vec![])
    };

    let pr = retained.len();
    if pr == 0 {
        return Err(Error::input("all columns are constant; nothing to decompose"));
    }
    let mut m = SymmetricMatrix::zeros(pr, kind)?;
    for (a, &ja) in retained.iter().enumerate() {
        for (b, &jb) in retained.iter().enumerate().skip(a) {
            let mut s = 0.0;
            for i in 0..n {
                s += (table.get(i, ja) - means[ja]) * (table.get(i, jb) - means[jb]);
            }
            let mut cov = s / (n - 1) as f64;
            if kind == MatrixKind::Correlation {
                cov /= sds[ja] * sds[jb];
            } else if vars[ja] < CONSTANT_VARIANCE_EPS || vars[jb] < CONSTANT_VARIANCE_EPS {
                // constant column under covariance kind: exact zero row/col
                cov = 0.0;
            }
            if a == b && kind == MatrixKind::Correlation {
                cov = 1.0;
            }
            m.set(a, b, cov);
        }
    }
    Ok(MomentMatrix { matrix: m, means, sds, dropped, retained })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::DataTable;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
        let mut m = SymmetricMatrix::zeros(dim, MatrixKind::Covariance).unwrap();
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    fn check_decomposition(m: &SymmetricMatrix, d: &EigenDecomposition) {
        let n = m.dim;
        // orthonormality
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n)
                    .map(|i| d.eigenvector(a)[i] * d.eigenvector(b)[i])
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-9);
            }
        }
        // residual ||M v - lambda v||
        for a in 0..n {
            let v = d.eigenvector(a);
            for i in 0..n {
                let mv: f64 = (0..n).map(|j| m.get(i, j) * v[j]).sum();
                assert_abs_diff_eq!(mv, d.eigenvalues[a] * v[i], epsilon = 1e-8);
            }
        }
        // trace preservation
        let trace_sum: f64 = d.eigenvalues.iter().sum();
        assert_abs_diff_eq!(trace_sum, m.trace(), epsilon = 1e-9);
        // descending order
        for w in d.eigenvalues.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn jacobi_identity_matrix() {
        let mut m = SymmetricMatrix::zeros(4, MatrixKind::Covariance).unwrap();
        for i in 0..4 {
            m.set(i, i, 1.0);
        }
        let d = eigh_jacobi(&m).unwrap();
        for lam in &d.eigenvalues {
            assert_abs_diff_eq!(*lam, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn jacobi_known_2x2() {
        // eigenvalues of [[2, 1], [1, 2]] are 3 and 1
        let mut m = SymmetricMatrix::zeros(2, MatrixKind::Covariance).unwrap();
        m.set(0, 0, 2.0);
        m.set(1, 1, 2.0);
        m.set(0, 1, 1.0);
        let d = eigh_jacobi(&m).unwrap();
        assert_abs_diff_eq!(d.eigenvalues[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.eigenvalues[1], 1.0, epsilon = 1e-12);
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(d.eigenvector(0)[0], s, epsilon = 1e-12);
        assert_abs_diff_eq!(d.eigenvector(0)[1], s, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_random_matrices_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for dim in [2usize, 3, 5, 8, 12] {
            let m = random_symmetric(dim, &mut rng);
            let d = eigh_jacobi(&m).unwrap();
            check_decomposition(&m, &d);
        }
    }

    #[test]
    fn sign_convention_largest_loading_positive() {
        let mut v = vec![0.3, -0.8, 0.5];
        normalize_sign(&mut v);
        assert_eq!(v, vec![-0.3, 0.8, -0.5]);
        let mut w = vec![0.3, 0.8, -0.5];
        normalize_sign(&mut w);
        assert_eq!(w, vec![0.3, 0.8, -0.5]);
    }

    #[test]
    fn nan_matrix_rejected() {
        let mut m = SymmetricMatrix::zeros(2, MatrixKind::Covariance).unwrap();
        m.set(0, 0, f64::NAN);
        assert!(eigh_jacobi(&m).is_err());
    }

    fn random_table(n: usize, p: usize, seed: u64) -> DataTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-2.0..2.0)).collect();
        DataTable::new(
            (0..p).map(|j| format!("x{j}")).collect(),
            vec![1.0; p],
            values,
            n,
        )
        .unwrap()
    }

    #[test]
    fn snapshot_matches_direct_on_wide_data() {
        // p > n: every nonzero eigenpair of the direct solve must appear
        // in the snapshot solve with matching eigenvector up to the
        // shared sign convention
        let (n, p) = (6usize, 10usize);
        let table = random_table(n, p, 7);
        let mm = moment_matrix(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let direct = eigh_jacobi(&mm.matrix).unwrap();

        let mut centered = table.values.clone();
        for i in 0..n {
            for j in 0..p {
                centered[i * p + j] -= mm.means[j];
            }
        }
        let snap = eigh_snapshot(&centered, n, p, MatrixKind::Covariance).unwrap();
        assert!(snap.eigenvalues.len() < n);
        for (k, lam) in snap.eigenvalues.iter().enumerate() {
            assert_abs_diff_eq!(*lam, direct.eigenvalues[k], epsilon = 1e-9);
            for j in 0..p {
                assert_abs_diff_eq!(
                    snap.eigenvector(k)[j],
                    direct.eigenvector(k)[j],
                    epsilon = 1e-7
                );
            }
        }
    }

    #[test]
    fn moment_matrix_matches_naive_oracle() {
        let table = random_table(9, 4, 3);
        let mm = moment_matrix(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        let n = table.n_cases as f64;
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for i in 0..table.n_cases {
                    s += (table.get(i, a) - mm.means[a]) * (table.get(i, b) - mm.means[b]);
                }
                assert_abs_diff_eq!(mm.matrix.get(a, b), s / (n - 1.0), epsilon = 1e-12);
            }
        }
        let cm = moment_matrix(&table, MatrixKind::Correlation, ConstantColumnPolicy::Drop).unwrap();
        for a in 0..4 {
            assert_abs_diff_eq!(cm.matrix.get(a, a), 1.0, epsilon = 1e-12);
            for b in 0..4 {
                assert_abs_diff_eq!(
                    cm.matrix.get(a, b),
                    mm.matrix.get(a, b) / (mm.sds[a] * mm.sds[b]),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn constant_column_policies() {
        let table = DataTable::new(
            vec!["x".into(), "c".into()],
            vec![1.0, 1.0],
            vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0],
            3,
        )
        .unwrap();
        // covariance keeps the constant column with an exactly zero row
        let mm = moment_matrix(&table, MatrixKind::Covariance, ConstantColumnPolicy::Drop).unwrap();
        assert_eq!(mm.matrix.get(1, 1), 0.0);
        assert_eq!(mm.matrix.get(0, 1), 0.0);
        // correlation with Error policy refuses
        assert!(moment_matrix(&table, MatrixKind::Correlation, ConstantColumnPolicy::Error).is_err());
        // correlation with Drop policy drops it
        let cm = moment_matrix(&table, MatrixKind::Correlation, ConstantColumnPolicy::Drop).unwrap();
        assert_eq!(cm.dropped, vec![1]);
        assert_eq!(cm.retained, vec![0]);
        assert_eq!(cm.matrix.dim, 1);
    }
}
