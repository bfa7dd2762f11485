use crate::error::{Error, Result};

/// A cases-by-variables numeric table, the input to PCA.
///
/// `unit_scale[j]` is the multiplicative factor that converts column `j`
/// into SI units (applied by [`crate::pca::log_transform_si`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub variable_names: Vec<String>,
    pub unit_scale: Vec<f64>,
    /// Row-major, `n_cases * n_vars` values.
    pub values: Vec<f64>,
    pub n_cases: usize,
    pub n_vars: usize,
    pub case_labels: Option<Vec<String>>,
}

impl DataTable {
    pub fn new(
        variable_names: Vec<String>,
        unit_scale: Vec<f64>,
        values: Vec<f64>,
        n_cases: usize,
    ) -> Result<Self> {
        let n_vars = variable_names.len();
        if unit_scale.len() != n_vars {
            return Err(Error::input(format!(
                "unit_scale has {} entries for {} variables",
                unit_scale.len(),
                n_vars
            )));
        }
        for (i, name) in variable_names.iter().enumerate() {
            if variable_names[..i].contains(name) {
                return Err(Error::input(format!("duplicate variable name {name:?}")));
            }
        }
        if values.len() != n_cases * n_vars {
            return Err(Error::input(format!(
                "value buffer has {} entries, expected {}x{}",
                values.len(),
                n_cases,
                n_vars
            )));
        }
        if let Some(s) = unit_scale.iter().find(|s| s.is_nan() || **s <= 0.0) {
            return Err(Error::input(format!("unit scale must be positive, got {s}")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite value {} at case {}, variable {}",
                v,
                i / n_vars + 1,
                variable_names[i % n_vars]
            )));
        }
        Ok(DataTable {
            variable_names,
            unit_scale,
            values,
            n_cases,
            n_vars,
            case_labels: None,
        })
    }

    pub fn with_case_labels(mut self, labels: Vec<String>) -> Self {
        self.case_labels = Some(labels);
        self
    }

    #[inline]
    pub fn get(&self, case: usize, var: usize) -> f64 {
        self.values[case * self.n_vars + var]
    }

    /// One column as a fresh vector.
    pub fn column(&self, var: usize) -> Vec<f64> {
        (0..self.n_cases).map(|i| self.get(i, var)).collect()
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DataTable {
        let mut values = Vec::with_capacity(self.n_cases * cols.len());
        for i in 0..self.n_cases {
            for &j in cols {
                values.push(self.get(i, j));
            }
        }
        DataTable {
            variable_names: cols.iter().map(|&j| self.variable_names[j].clone()).collect(),
            unit_scale: cols.iter().map(|&j| self.unit_scale[j]).collect(),
            values,
            n_cases: self.n_cases,
            n_vars: cols.len(),
            case_labels: self.case_labels.clone(),
        }
    }
}
