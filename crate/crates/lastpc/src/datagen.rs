//! Embedded reference data and seeded synthetic generators, so every
//! pipeline runs without external data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gridded::{FieldDesc, GriddedStack};
use crate::numeric::sampling::sample_gaussian_pairs;
use crate::table::DataTable;

/// Specific gas constant for dry air, m^2 / (s^2 K).
pub const GAS_CONSTANT_DRY_AIR: f64 = 287.0;
/// Gravitational acceleration, m/s^2.
pub const GRAVITY: f64 = 9.8;

/// (R/g) ln(850/500), the thickness-to-virtual-temperature slope for the
/// 850-500 hPa layer, in m/K.
pub fn hypsometric_beta() -> f64 {
    GAS_CONSTANT_DRY_AIR / GRAVITY * (850.0f64 / 500.0).ln()
}

/// Solar-system orbital data: 8 planets by (a, b, m, M, T).
///
/// Semi-axes in units of 1e10 m, planet mass in 1e24 kg, the shared
/// central mass M in kg, and the orbital period in seconds.
pub fn solar_dataset() -> DataTable {
    const M_SUN: f64 = 1.986616e30;
    let rows: [(&str, f64, f64, f64, f64); 8] = [
        ("Mercury", 5.852857, 5.727818, 0.3244425, 7605382.0),
        ("Venus", 10.81012, 10.80988, 4.861260, 19407924.0),
        ("Earth", 14.95104, 14.94896, 5.975000, 31557600.0),
        ("Mars", 22.82995, 22.73016, 0.6387275, 59359846.0),
        ("Jupiter", 77.82562, 77.73441, 1902.141, 374336251.0),
        ("Saturn", 142.7208, 142.4993, 569.4175, 929623781.0),
        ("Uranus", 287.0700, 286.7501, 87.11550, 2651311764.0),
        ("Neptune", 449.5683, 449.5517, 103.1285, 5200313789.0),
    ];
    let mut values = Vec::with_capacity(8 * 5);
    let mut labels = Vec::with_capacity(8);
    for (name, a, b, m, t) in rows {
        labels.push(name.to_string());
        values.extend_from_slice(&[a, b, m, M_SUN, t]);
    }
    DataTable::new(
        ["a", "b", "m", "M", "T"].iter().map(|s| s.to_string()).collect(),
        vec![1e10, 1e10, 1e24, 1.0, 1.0],
        values,
        8,
    )
    .expect("embedded table is well-formed")
    .with_case_labels(labels)
}

/// Parameters of the synthetic hypsometric stack generator.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub nlat: usize,
    pub nlon: usize,
    pub n_time: usize,
    /// True thickness-to-temperature slope, m/K.
    pub beta_true: f64,
    /// Thickness noise SD as a fraction of beta_true.
    pub noise_sd_fraction: f64,
    /// Moving-average radius, in grid cells, applied to the raw noise
    /// fields to give them within-field spatial correlation.
    pub smoothing_radius: usize,
    pub seed: u64,
    /// Adds a 12-periodic component to every field, for exercising the
    /// difference filter.
    pub seasonal: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            nlat: 8,
            nlon: 24,
            n_time: 120,
            beta_true: hypsometric_beta(),
            noise_sd_fraction: 0.05,
            smoothing_radius: 1,
            seed: 1,
            seasonal: false,
        }
    }
}

impl SynthSpec {
    /// The 144 x 17 grid of the full-scale workflow.
    pub fn large_grid(mut self) -> Self {
        self.nlat = 17;
        self.nlon = 144;
        self
    }
}

/// Moving-average smoothing with a clamped (truncated at the boundary)
/// square window.
fn smooth_field(field: &[f64], nlat: usize, nlon: usize, radius: usize) -> Vec<f64> {
    if radius == 0 {
        return field.to_vec();
    }
    let r = radius as isize;
    let mut out = vec![0.0; field.len()];
    for i in 0..nlat as isize {
        for j in 0..nlon as isize {
            let (i0, i1) = ((i - r).max(0), (i + r).min(nlat as isize - 1));
            let (j0, j1) = ((j - r).max(0), (j + r).min(nlon as isize - 1));
            let mut s = 0.0;
            for ii in i0..=i1 {
                for jj in j0..=j1 {
                    s += field[(ii * nlon as isize + jj) as usize];
                }
            }
            out[(i * nlon as isize + j) as usize] =
                s / ((i1 - i0 + 1) * (j1 - j0 + 1)) as f64;
        }
    }
    out
}

fn smoothed_unit_stack(
    rng: &mut ChaCha8Rng,
    nlat: usize,
    nlon: usize,
    n_time: usize,
    radius: usize,
) -> Vec<f64> {
    let npts = nlat * nlon;
    let mut values = Vec::with_capacity(n_time * npts);
    for _ in 0..n_time {
        let raw: Vec<f64> = (0..npts).map(|_| StandardNormal.sample(rng)).collect();
        values.extend(smooth_field(&raw, nlat, nlon, radius));
    }
    // scale the whole stack to population SD 1
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let sd =
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    for x in values.iter_mut() {
        *x /= sd;
    }
    values
}

/// Seeded synthetic stack obeying H = beta_true * T_v plus controlled
/// noise, with an independent V field. Fields are T_v (K), H (m),
/// V (m/s), deterministic per seed.
pub fn synth_hypsometric(spec: &SynthSpec) -> Result<GriddedStack> {
    if spec.nlat == 0 || spec.nlon == 0 || spec.n_time == 0 {
        return Err(Error::input("grid and time dimensions must be positive"));
    }
    if spec.noise_sd_fraction < 0.0 {
        return Err(Error::input("noise SD fraction must be >= 0"));
    }
    let npts = spec.nlat * spec.nlon;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let tv = smoothed_unit_stack(&mut rng, spec.nlat, spec.nlon, spec.n_time, spec.smoothing_radius);
    let noise_sd = spec.noise_sd_fraction * spec.beta_true;
    let h: Vec<f64> = tv
        .iter()
        .map(|&x| {
            let eps: f64 = StandardNormal.sample(&mut rng);
            spec.beta_true * x + noise_sd * eps
        })
        .collect();
    let v = smoothed_unit_stack(&mut rng, spec.nlat, spec.nlon, spec.n_time, spec.smoothing_radius);

    let width = 3 * npts;
    let mut values = Vec::with_capacity(spec.n_time * width);
    for t in 0..spec.n_time {
        let seasonal = if spec.seasonal {
            (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin()
        } else {
            0.0
        };
        values.extend(tv[t * npts..(t + 1) * npts].iter().map(|x| x + seasonal));
        values.extend(h[t * npts..(t + 1) * npts].iter().map(|x| x + spec.beta_true * seasonal));
        values.extend(v[t * npts..(t + 1) * npts].iter().map(|x| x + seasonal));
    }

    GriddedStack::new(
        vec![
            FieldDesc { name: "T_v".to_string(), units: "K".to_string() },
            FieldDesc { name: "H".to_string(), units: "m".to_string() },
            FieldDesc { name: "V".to_string(), units: "m/s".to_string() },
        ],
        spec.nlat,
        spec.nlon,
        77.5,
        -(77.5 - 37.5) / ((spec.nlat - 1).max(1) as f64),
        0.0,
        360.0 / spec.nlon as f64,
        spec.n_time,
        values,
    )
}

/// 200 seeded draws from the reference bivariate configuration
/// (mu = (0, 10), variances (2, 3), rho = 0.8).
pub fn synth_bivariate_demo(seed: u64) -> DataTable {
    sample_gaussian_pairs(200, 0.0, 10.0, 2.0, 3.0, 0.8, seed)
        .expect("demo parameters are valid")
}
