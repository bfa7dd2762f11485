//! Gridded-field stacks and their preprocessing chain: flattening to a
//! data table, lag differencing, latitude cropping, and virtual
//! temperature.
//!
//! Flattening order is field-major with latitude rows and longitude
//! fastest: index = field * (nlat * nlon) + lat * nlon + lon.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discovery::SegmentSpec;
use crate::error::{Error, Result};
use crate::table::DataTable;

pub const FLATTEN_ORDER: &str = "field-major,lat-rows,lon-fastest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDesc {
    pub name: String,
    pub units: String,
}

/// A time sequence of multi-field gridded values.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedStack {
    pub fields: Vec<FieldDesc>,
    pub nlat: usize,
    pub nlon: usize,
    pub lat0: f64,
    pub dlat: f64,
    pub lon0: f64,
    pub dlon: f64,
    pub n_time: usize,
    /// `n_time * n_fields * nlat * nlon` values, time-major then
    /// flattening order.
    pub values: Vec<f64>,
    pub time_labels: Option<Vec<String>>,
}

impl GriddedStack {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fields: Vec<FieldDesc>,
        nlat: usize,
        nlon: usize,
        lat0: f64,
        dlat: f64,
        lon0: f64,
        dlon: f64,
        n_time: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nlat == 0 || nlon == 0 || fields.is_empty() {
            return Err(Error::input("grid and field list must be non-empty"));
        }
        if values.len() != n_time * fields.len() * nlat * nlon {
            return Err(Error::input(format!(
                "value buffer has {} entries, expected {} x {} x {} x {}",
                values.len(),
                n_time,
                fields.len(),
                nlat,
                nlon
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("gridded values must be finite"));
        }
        Ok(GriddedStack {
            fields,
            nlat,
            nlon,
            lat0,
            dlat,
            lon0,
            dlon,
            n_time,
            values,
            time_labels: None,
        })
    }

    pub fn points_per_field(&self) -> usize {
        self.nlat * self.nlon
    }

    /// Columns per time step across all fields.
    pub fn width(&self) -> usize {
        self.fields.len() * self.points_per_field()
    }

    #[inline]
    pub fn get(&self, t: usize, field: usize, lat: usize, lon: usize) -> f64 {
        self.values[t * self.width()
            + field * self.points_per_field()
            + lat * self.nlon
            + lon]
    }

    pub fn latitudes(&self) -> Vec<f64> {
        (0..self.nlat).map(|i| self.lat0 + i as f64 * self.dlat).collect()
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    /// One field at one time step as a flat lat-major slice.
    pub fn field_slice(&self, t: usize, field: usize) -> &[f64] {
        let ppf = self.points_per_field();
        let start = t * self.width() + field * ppf;
        &self.values[start..start + ppf]
    }
}

/// Flatten a stack into an `n_time x (fields * nlat * nlon)` data table
/// with one contiguous segment per field.
pub fn flatten_stack(stack: &GriddedStack) -> Result<(DataTable, SegmentSpec)> {
    let ppf = stack.points_per_field();
    let width = stack.width();
    let mut names = Vec::with_capacity(width);
    for f in &stack.fields {
        for lat in 0..stack.nlat {
            for lon in 0..stack.nlon {
                names.push(format!("{}[{},{}]", f.name, lat, lon));
            }
        }
    }
    let table = DataTable::new(names, vec![1.0; width], stack.values.clone(), stack.n_time)?;
    let segments = SegmentSpec::new(
        stack.fields.iter().map(|f| f.name.clone()).collect(),
        (0..stack.fields.len()).map(|f| (f * ppf, (f + 1) * ppf)).collect(),
    )?;
    Ok((table, segments))
}

/// Rebuild a stack from a flattened table (the inverse of
/// `flatten_stack` given the original grid metadata).
pub fn unflatten_stack(template: &GriddedStack, table: &DataTable) -> Result<GriddedStack> {
    if table.n_vars != template.width() {
        return Err(Error::input("table width does not match stack layout"));
    }
    let mut out = template.clone();
    out.n_time = table.n_cases;
    out.values = table.values.clone();
    out.time_labels = table.case_labels.clone();
    Ok(out)
}

/// Lag differencing: out[t] = in[t] - in[t - lag].
pub fn difference_filter(stack: &GriddedStack, lag: usize) -> Result<GriddedStack> {
    if lag == 0 {
        return Err(Error::input("lag must be positive"));
    }
    if stack.n_time <= lag {
        return Err(Error::input(format!(
            "difference filter needs more than {lag} time steps, got {}",
            stack.n_time
        )));
    }
    let width = stack.width();
    let n_out = stack.n_time - lag;
    let mut values = Vec::with_capacity(n_out * width);
    for t in lag..stack.n_time {
        for c in 0..width {
            values.push(stack.values[t * width + c] - stack.values[(t - lag) * width + c]);
        }
    }
    let mut out = stack.clone();
    out.n_time = n_out;
    out.values = values;
    out.time_labels = stack
        .time_labels
        .as_ref()
        .map(|l| l[lag..].to_vec());
    Ok(out)
}

/// Keep latitude rows with lat_min <= lat <= lat_max (inclusive).
pub fn crop_latitudes(stack: &GriddedStack, lat_min: f64, lat_max: f64) -> Result<GriddedStack> {
    const EPS: f64 = 1e-9;
    let lats = stack.latitudes();
    let keep: Vec<usize> = (0..stack.nlat)
        .filter(|&i| lats[i] >= lat_min - EPS && lats[i] <= lat_max + EPS)
        .collect();
    if keep.is_empty() {
        return Err(Error::input(format!(
            "latitude range [{lat_min}, {lat_max}] does not intersect the grid"
        )));
    }
    let mut values = Vec::with_capacity(stack.n_time * stack.fields.len() * keep.len() * stack.nlon);
    for t in 0..stack.n_time {
        for f in 0..stack.fields.len() {
            for &lat in &keep {
                for lon in 0..stack.nlon {
                    values.push(stack.get(t, f, lat, lon));
                }
            }
        }
    }
    let mut out = stack.clone();
    out.nlat = keep.len();
    out.lat0 = lats[keep[0]];
    out.values = values;
    Ok(out)
}

/// Virtual temperature T (1 + q/0.622) / (1 + q), elementwise.
///
/// `t` in kelvin, `q` specific humidity in kg/kg.
pub fn virtual_temperature(t: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    if t.len() != q.len() {
        return Err(Error::input("temperature and humidity fields differ in length"));
    }
    t.iter()
        .zip(q)
        .map(|(&tk, &qk)| {
            if tk.is_nan() || tk <= 0.0 {
                return Err(Error::input(format!("nonpositive temperature {tk} K")));
            }
            if qk < 0.0 {
                return Err(Error::input(format!("negative specific humidity {qk}")));
            }
            Ok(tk * (1.0 + qk / 0.622) / (1.0 + qk))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct StackMeta {
    fields: Vec<FieldDesc>,
    nlat: usize,
    nlon: usize,
    lat0: f64,
    dlat: f64,
    lon0: f64,
    dlon: f64,
    n_time: usize,
    order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_labels: Option<Vec<String>>,
}

/// Write a stack as a directory: `meta.json` plus one headerless CSV per
/// field with `n_time` rows of `nlat * nlon` values.
pub fn write_stack(stack: &GriddedStack, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let meta = StackMeta {
        fields: stack.fields.clone(),
        nlat: stack.nlat,
        nlon: stack.nlon,
        lat0: stack.lat0,
        dlat: stack.dlat,
        lon0: stack.lon0,
        dlon: stack.dlon,
        n_time: stack.n_time,
        order: FLATTEN_ORDER.to_string(),
        time_labels: stack.time_labels.clone(),
    };
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    for (f, desc) in stack.fields.iter().enumerate() {
        let mut text = String::new();
        for t in 0..stack.n_time {
            let row: Vec<String> =
                stack.field_slice(t, f).iter().map(|v| format!("{v}")).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        std::fs::write(dir.join(format!("{}.csv", desc.name)), text)?;
    }
    Ok(())
}

/// Read a stack directory written by [`write_stack`].
pub fn read_stack(dir: &Path) -> Result<GriddedStack> {
    let meta_path = dir.join("meta.json");
    let meta: StackMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path).map_err(
        |e| Error::input(format!("cannot read {}: {e}", meta_path.display())),
    )?)?;
    if meta.order != FLATTEN_ORDER {
        return Err(Error::input(format!(
            "unsupported flattening order {:?} (expected {:?})",
            meta.order, FLATTEN_ORDER
        )));
    }
    let ppf = meta.nlat * meta.nlon;
    let width = meta.fields.len() * ppf;
    let mut values = vec![0.0; meta.n_time * width];
    for (f, desc) in meta.fields.iter().enumerate() {
        let path = dir.join(format!("{}.csv", desc.name));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
        let mut rows = 0usize;
        for (t, line) in text.lines().enumerate() {
            if t >= meta.n_time {
                return Err(Error::input(format!(
                    "{}: more rows than n_time = {}",
                    path.display(),
                    meta.n_time
                )));
            }
            let mut cols = 0usize;
            for (c, tok) in line.split(',').enumerate() {
                if c >= ppf {
                    return Err(Error::input(format!(
                        "{} line {}: more than {ppf} columns",
                        path.display(),
                        t + 1
                    )));
                }
                let v: f64 = tok.trim().parse().map_err(|_| {
                    Error::input(format!(
                        "{} line {}: cannot parse {:?} as a number",
                        path.display(),
                        t + 1,
                        tok
                    ))
                })?;
                values[t * width + f * ppf + c] = v;
                cols += 1;
            }
            if cols != ppf {
                return Err(Error::input(format!(
                    "{} line {}: {cols} columns, expected {ppf}",
                    path.display(),
                    t + 1
                )));
            }
            rows += 1;
        }
        if rows != meta.n_time {
            return Err(Error::input(format!(
                "{}: {rows} rows, expected {}",
                path.display(),
                meta.n_time
            )));
        }
    }
    let mut stack = GriddedStack::new(
        meta.fields, meta.nlat, meta.nlon, meta.lat0, meta.dlat, meta.lon0, meta.dlon,
        meta.n_time, values,
    )?;
    stack.time_labels = meta.time_labels;
    Ok(stack)
}
