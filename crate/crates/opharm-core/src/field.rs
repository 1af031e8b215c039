//! Matrix-valued fields on the lattice and their exact trigonometric
//! Fourier calculus.
//!
//! Fields are band-limited by construction (band < N/2), which makes the
//! discrete transform an exact trigonometric interpolation: multiplier
//! convolutions and Plancherel pairings below are exact up to rounding.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::Fft;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::matrix::{self, hermitian_violation, max_abs};
use crate::par;
use crate::{MatrixValue, C64};

/// Matrix-valued function sampled on the lattice of a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct OperatorField {
    grid: GridSpec,
    n: usize,
    values: Vec<MatrixValue>,
    hermitian: bool,
}

/// Fourier side of an [`OperatorField`]: one matrix coefficient per lattice
/// frequency, stored in the same flat layout, plus the measured band limit.
#[derive(Debug, Clone)]
pub struct SpectrumField {
    grid: GridSpec,
    n: usize,
    coeffs: Vec<MatrixValue>,
    band: usize,
}

impl OperatorField {
    pub fn new(
        grid: GridSpec,
        n: usize,
        values: Vec<MatrixValue>,
        hermitian: bool,
    ) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::Shape(format!(
                "field needs {} values, got {}",
                grid.num_points(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.nrows() != n || v.ncols() != n) {
            return Err(Error::Shape(format!("all values must be {n}x{n}")));
        }
        if hermitian {
            for v in &values {
                if hermitian_violation(v) > 1e-12 * (1.0 + max_abs(v)) {
                    return Err(Error::Domain(
                        "hermitian flag set but a value is not Hermitian".into(),
                    ));
                }
            }
        }
        Ok(OperatorField {
            grid,
            n,
            values,
            hermitian,
        })
    }

    pub fn constant(grid: GridSpec, a: MatrixValue) -> Self {
        let n = a.nrows();
        let hermitian = hermitian_violation(&a) <= 1e-12 * (1.0 + max_abs(&a));
        let values = vec![a; grid.num_points()];
        OperatorField {
            grid,
            n,
            values,
            hermitian,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn values(&self) -> &[MatrixValue] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> &MatrixValue {
        &self.values[idx]
    }

    /// Pointwise adjoint field f*.
    pub fn adjoint(&self) -> Self {
        let values = self.values.iter().map(|v| v.adjoint()).collect();
        OperatorField {
            grid: self.grid,
            n: self.n,
            values,
            hermitian: self.hermitian,
        }
    }

    pub fn scaled(&self, lambda: C64) -> Self {
        let values = self.values.iter().map(|v| v * lambda).collect();
        OperatorField {
            grid: self.grid,
            n: self.n,
            values,
            hermitian: self.hermitian && lambda.im == 0.0,
        }
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.n != other.n {
            return Err(Error::Shape(
                "fields live on different grids or sizes".into(),
            ));
        }
        Ok(())
    }
}

impl SpectrumField {
    pub fn new(grid: GridSpec, n: usize, coeffs: Vec<MatrixValue>) -> Result<Self> {
        if coeffs.len() != grid.num_points() {
            return Err(Error::Shape(format!(
                "spectrum needs {} coefficients, got {}",
                grid.num_points(),
                coeffs.len()
            )));
        }
        let band = measured_band(&grid, &coeffs);
        Ok(SpectrumField {
            grid,
            n,
            coeffs,
            band,
        })
    }

    /// Builds a spectrum from an explicit list of (frequency, coefficient).
    pub fn from_modes(grid: GridSpec, n: usize, modes: &[([i64; 3], MatrixValue)]) -> Result<Self> {
        let mut coeffs = vec![matrix::zero(n); grid.num_points()];
        for (m, a) in modes {
            let band = grid.freq_band(m);
            if band >= grid.n_axis() / 2 {
                return Err(Error::Band {
                    band,
                    limit: grid.n_axis() / 2,
                });
            }
            coeffs[grid.freq_index(&m[..grid.d()])] += a;
        }
        Self::new(grid, n, coeffs)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[MatrixValue] {
        &self.coeffs
    }

    pub fn coeff(&self, m: &[i64]) -> &MatrixValue {
        &self.coeffs[self.grid.freq_index(m)]
    }

    /// Largest max-norm of a frequency carrying a nonzero coefficient.
    pub fn band(&self) -> usize {
        self.band
    }

    /// Fails unless the band stays strictly below N/2 (exact trigonometric
    /// interpolation, no aliasing).
    pub fn check_band(&self) -> Result<()> {
        let limit = self.grid.n_axis() / 2;
        if self.band >= limit {
            return Err(Error::Band {
                band: self.band,
                limit,
            });
        }
        Ok(())
    }

    /// The coefficient at frequency zero.
    pub fn mean(&self) -> &MatrixValue {
        &self.coeffs[0]
    }
}

fn measured_band(grid: &GridSpec, coeffs: &[MatrixValue]) -> usize {
    let global = coeffs.iter().map(max_abs).fold(0.0f64, f64::max);
    let thr = global * 1e-13;
    let mut band = 0usize;
    for (idx, c) in coeffs.iter().enumerate() {
        if max_abs(c) > thr {
            band = band.max(grid.freq_band(&grid.freq(idx)));
        }
    }
    band
}

// FFT plan cache, keyed by (length, forward?).
fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = rustfft::FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// In-place multidimensional DFT of one scalar lattice (row-major layout).
pub(crate) fn dft_lattice(grid: &GridSpec, data: &mut [C64], forward: bool) {
    let n = grid.n_axis();
    let d = grid.d();
    let total = grid.num_points();
    let fft = plan(n, forward);
    let mut line = vec![C64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let lines = total / n;
        for l in 0..lines {
            // base index of this line: expand l over the other axes
            let block = stride * n;
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * block + inner;
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[base + k * stride];
            }
            fft.process(&mut line);
            for (k, slot) in line.iter().enumerate() {
                data[base + k * stride] = *slot;
            }
        }
    }
}

/// Forward transform: coefficients f̂(m) = h^d Σ_s f(s) e^{-2πi m·s}.
pub fn fft_forward(f: &OperatorField) -> SpectrumField {
    let grid = f.grid();
    let n = f.n();
    let total = grid.num_points();
    let hd = grid.cell_volume();
    // one scalar DFT per matrix entry
    let per_entry: Vec<Vec<C64>> = par::map_indexed(n * n, |e| {
        let (i, j) = (e / n, e % n);
        let mut data: Vec<C64> = (0..total).map(|s| f.values[s][(i, j)]).collect();
        dft_lattice(&grid, &mut data, true);
        for z in data.iter_mut() {
            *z *= hd;
        }
        data
    });
    let coeffs: Vec<MatrixValue> = par::map_indexed(total, |s| {
        MatrixValue::from_fn(n, n, |i, j| per_entry[i * n + j][s])
    });
    SpectrumField::new(grid, n, coeffs).expect("shape is consistent by construction")
}

/// Inverse transform: f(s) = Σ_m f̂(m) e^{2πi m·s}.
pub fn fft_inverse(spec: &SpectrumField) -> OperatorField {
    let grid = spec.grid();
    let n = spec.n();
    let total = grid.num_points();
    let per_entry: Vec<Vec<C64>> = par::map_indexed(n * n, |e| {
        let (i, j) = (e / n, e % n);
        let mut data: Vec<C64> = (0..total).map(|s| spec.coeffs[s][(i, j)]).collect();
        dft_lattice(&grid, &mut data, false);
        data
    });
    let values: Vec<MatrixValue> = par::map_indexed(total, |s| {
        MatrixValue::from_fn(n, n, |i, j| per_entry[i * n + j][s])
    });
    let hermitian = values
        .iter()
        .all(|v| hermitian_violation(v) <= 1e-12 * (1.0 + max_abs(v)));
    OperatorField {
        grid,
        n,
        values,
        hermitian,
    }
}

/// Lattice quadrature of ∫ g*(s) f(s) ds, the operator-valued pairing.
///
/// For band-limited fields this equals the spectral sum Σ_m ĝ(m)* f̂(m)
/// exactly: frequency differences never wrap around the lattice.
pub fn plancherel_pairing(f: &OperatorField, g: &OperatorField) -> Result<MatrixValue> {
    f.check_same_shape(g)?;
    let n = f.n();
    let hd = f.grid().cell_volume();
    let mut acc = matrix::zero(n);
    for s in 0..f.grid().num_points() {
        acc += g.values[s].adjoint() * &f.values[s];
    }
    Ok(acc * C64::new(hd, 0.0))
}

/// Spectral-side pairing Σ_m ĝ(m)* f̂(m); cross-check twin of
/// [`plancherel_pairing`].
pub fn spectral_pairing(f: &SpectrumField, g: &SpectrumField) -> Result<MatrixValue> {
    if f.grid != g.grid || f.n != g.n {
        return Err(Error::Shape(
            "spectra live on different grids or sizes".into(),
        ));
    }
    let mut acc = matrix::zero(f.n);
    for m in 0..f.grid.num_points() {
        acc += g.coeffs[m].adjoint() * &f.coeffs[m];
    }
    Ok(acc)
}

/// Noncommutative L_p norm of a field: `(h^d Σ_s tr|f(s)|^p)^{1/p}`,
/// `sup_s ||f(s)||_op` for p = ∞. Uses the unnormalized matrix trace.
pub fn lp_field_norm(f: &OperatorField, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Domain(format!("L_p norm needs p >= 1, got {p}")));
    }
    let total = f.grid().num_points();
    if p.is_infinite() {
        let sups = par::map_indexed(total, |s| matrix::op_norm(&f.values[s]));
        return Ok(sups.into_iter().fold(0.0, f64::max));
    }
    let hd = f.grid().cell_volume();
    let sum = par::sum_indexed(total, |s| matrix::schatten_power_trace(&f.values[s], p));
    Ok((hd * sum).powf(1.0 / p))
}

/// Serialized form of a field: row-major lattice order, each value stored
/// as n*n row-major (re, im) pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldJson {
    pub d: usize,
    pub n_axis: usize,
    pub n: usize,
    pub hermitian: bool,
    pub layout: String,
    pub values: Vec<[f64; 2]>,
}

pub const FIELD_LAYOUT: &str = "row-major s-index, then nxn row-major complex (re,im) pairs";

pub fn field_to_json(f: &OperatorField) -> FieldJson {
    let n = f.n();
    let mut values = Vec::with_capacity(f.grid().num_points() * n * n);
    for v in &f.values {
        for i in 0..n {
            for j in 0..n {
                let z = v[(i, j)];
                values.push([z.re, z.im]);
            }
        }
    }
    FieldJson {
        d: f.grid().d(),
        n_axis: f.grid().n_axis(),
        n,
        hermitian: f.hermitian(),
        layout: FIELD_LAYOUT.to_string(),
        values,
    }
}

pub fn field_from_json(j: &FieldJson) -> Result<OperatorField> {
    let grid = GridSpec::new(j.d, j.n_axis)?;
    let n = j.n;
    let total = grid.num_points();
    if j.values.len() != total * n * n {
        return Err(Error::Shape(format!(
            "expected {} complex entries, got {}",
            total * n * n,
            j.values.len()
        )));
    }
    let values: Vec<MatrixValue> = (0..total)
        .map(|s| {
            MatrixValue::from_fn(n, n, |i, r| {
                let [re, im] = j.values[s * n * n + i * n + r];
                C64::new(re, im)
            })
        })
        .collect();
    OperatorField::new(grid, n, values, j.hermitian)
}
