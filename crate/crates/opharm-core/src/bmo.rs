//! BMO norms (cube oscillation and circular-Poisson forms) and Carleson
//! measure norms, continuous and discrete, over dyadic cube families.

use serde::{Deserialize, Serialize};

use crate::companion::MultiplierPair;
use crate::cubes::{cube_mean, Cube, CubeFamily};
use crate::error::{Error, Result};
use crate::field::{fft_forward, fft_inverse, lp_field_norm, OperatorField, SpectrumField};
use crate::matrix::{self, add_scaled_abs_square, hermitize, op_norm};
use crate::par;
use crate::scale::{DyadicLevels, ScaleGrid};
use crate::scalefield::convolve_one_scale;
use crate::symbols::RadialSymbol;
use crate::{MatrixValue, C64};

/// Mean quadratic oscillation of `f` over one cube:
/// |Q|^{-1} ∫_Q |f - f_Q|², a PSD matrix.
fn cube_oscillation(f: &OperatorField, family: &CubeFamily, cube: &Cube) -> Result<MatrixValue> {
    let mean = cube_mean(f, family, cube)?;
    let pts = family.points(cube);
    let mut acc = matrix::zero(f.n());
    let w = 1.0 / pts.len() as f64;
    for &s in &pts {
        let dev = f.value(s) - &mean;
        add_scaled_abs_square(&mut acc, &dev, w);
    }
    Ok(hermitize(&acc))
}

/// BMO norm over a cube family.
///
/// `q = ∞` evaluates max(‖f_mean‖, sup_Q ‖osc_Q‖^{1/2}) with the operator
/// norm; finite q (> 2) uses the literal pointwise supremum of the scalar
/// oscillations and is restricted to n = 1.
pub fn bmo_norm(f: &OperatorField, family: &CubeFamily, q: f64) -> Result<f64> {
    if q <= 2.0 {
        return Err(Error::Domain(format!("BMO_q needs q > 2, got {q}")));
    }
    let cubes = family.cubes();
    let global_mean = cube_mean(f, family, &cubes[0])?;
    let mean_term = op_norm(&global_mean);
    if q.is_infinite() {
        let oscs = par::map_indexed(cubes.len(), |i| {
            cube_oscillation(f, family, &cubes[i]).map(|m| op_norm(&m))
        });
        let mut sup = 0.0f64;
        for o in oscs {
            sup = sup.max(o?);
        }
        return Ok(mean_term.max(sup.sqrt()));
    }
    if f.n() != 1 {
        return Err(Error::Unsupported(
            "matrix-valued BMO_q is not implemented; finite q needs scalar fields (n = 1)".into(),
        ));
    }
    // a(s) = sup over cubes containing s of the oscillation average
    let mut majorant = vec![0.0f64; f.grid().num_points()];
    for cube in &cubes {
        let osc = cube_oscillation(f, family, cube)?[(0, 0)].re;
        for s in family.points(cube) {
            majorant[s] = majorant[s].max(osc);
        }
    }
    let hd = f.grid().cell_volume();
    let qh = q / 2.0;
    let lq = (hd * majorant.iter().map(|a| a.powf(qh)).sum::<f64>()).powf(1.0 / qh);
    Ok(mean_term.max(lq.sqrt()))
}

/// One cube row of a Carleson report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarlesonRow {
    pub level: u32,
    pub shift: [i64; 3],
    pub cube_index: [usize; 3],
    pub value_opnorm: f64,
    pub witness: bool,
}

/// Per-cube averaged tent masses of dμ(f) with the supremum and its
/// witness cube.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub rows: Vec<CarlesonRow>,
    pub sup_norm: f64,
    /// Row index attaining the supremum.
    pub witness: usize,
    /// Scalar-only finite-q norm ‖a‖_{q/2}^{1/2} of the pointwise majorant.
    pub q_norm: Option<f64>,
}

fn carleson_with_scales(
    f: &OperatorField,
    sym: &RadialSymbol,
    family: &CubeFamily,
    scales: &[f64],
    weights: &[f64],
    q: f64,
) -> Result<CarlesonReport> {
    if q <= 2.0 {
        return Err(Error::Domain(format!("q-Carleson needs q > 2, got {q}")));
    }
    if !q.is_infinite() && f.n() != 1 {
        return Err(Error::Unsupported(
            "finite-q Carleson norms need scalar fields (n = 1)".into(),
        ));
    }
    let spectrum = fft_forward(f);
    spectrum.check_band()?;
    let grid = f.grid();
    let hd = grid.cell_volume();
    let cubes = family.cubes();
    let n = f.n();
    let mut acc: Vec<MatrixValue> = vec![matrix::zero(n); cubes.len()];
    // stream scales; each cube keeps scales below its tent height
    for (k, (&eps, &w)) in scales.iter().zip(weights).enumerate() {
        let _ = k;
        let max_height = family.tent_height(0);
        if eps > max_height {
            continue;
        }
        let slice = convolve_one_scale(&spectrum, sym, eps);
        // per-point squares once per scale
        let squares: Vec<MatrixValue> = par::map_indexed(grid.num_points(), |s| {
            let mut m = matrix::zero(n);
            add_scaled_abs_square(&mut m, &slice.values()[s], 1.0);
            m
        });
        for (ci, cube) in cubes.iter().enumerate() {
            if eps > family.tent_height(cube.level) {
                continue;
            }
            let mut cube_sum = matrix::zero(n);
            for s in family.points(cube) {
                cube_sum += &squares[s];
            }
            acc[ci] += cube_sum * C64::new(w * hd, 0.0);
        }
    }
    let mut rows = Vec::with_capacity(cubes.len());
    let mut sup = 0.0f64;
    let mut witness = 0usize;
    for (ci, cube) in cubes.iter().enumerate() {
        let value = hermitize(&(&acc[ci] * C64::new(1.0 / family.volume(cube.level), 0.0)));
        let vn = op_norm(&value);
        if vn > sup {
            sup = vn;
            witness = ci;
        }
        rows.push(CarlesonRow {
            level: cube.level,
            shift: cube.shift,
            cube_index: cube.index,
            value_opnorm: vn,
            witness: false,
        });
        acc[ci] = value;
    }
    if !rows.is_empty() {
        rows[witness].witness = true;
    }
    let q_norm = if q.is_infinite() {
        None
    } else {
        let mut majorant = vec![0.0f64; grid.num_points()];
        for (ci, cube) in cubes.iter().enumerate() {
            let v = acc[ci][(0, 0)].re;
            for s in family.points(cube) {
                majorant[s] = majorant[s].max(v);
            }
        }
        let qh = q / 2.0;
        Some(
            (hd * majorant.iter().map(|a| a.powf(qh)).sum::<f64>())
                .powf(1.0 / qh)
                .sqrt(),
        )
    };
    Ok(CarlesonReport {
        rows,
        sup_norm: sup,
        witness,
        q_norm,
    })
}

/// Carleson norm of dμ(f) = |Φ_ε * f|² ds dε/ε over the family's tents
/// T(Q) = Q × (0, side/2], with scales from `sgrid` clipped per tent.
pub fn carleson_norm(
    f: &OperatorField,
    pair: &MultiplierPair,
    family: &CubeFamily,
    sgrid: &ScaleGrid,
    q: f64,
) -> Result<CarlesonReport> {
    carleson_with_scales(f, &pair.phi(), family, sgrid.nodes(), sgrid.weights(), q)
}

/// Discrete Carleson norm: dyadic scales 2^{-j} with unit weights, summed
/// over levels with 2^{-j} ≤ side/2.
pub fn discrete_carleson_norm(
    f: &OperatorField,
    pair: &MultiplierPair,
    family: &CubeFamily,
    levels: &DyadicLevels,
) -> Result<CarlesonReport> {
    let scales: Vec<f64> = levels.scales().collect();
    let weights = vec![1.0; scales.len()];
    carleson_with_scales(f, &pair.phi(), family, &scales, &weights, f64::INFINITY)
}

/// Circular-Poisson BMO norm:
/// max(‖f̂(0)‖, sup_r ‖P_r(|f - P_r f|²)‖_∞^{1/2}) over the given r nodes.
///
/// The squared deviation is treated as the sampled trigonometric
/// interpolant when P_r is applied.
pub fn poisson_bmo_norm(f: &OperatorField, r_nodes: &[f64]) -> Result<f64> {
    if r_nodes.iter().any(|&r| !(0.0..1.0).contains(&r)) {
        return Err(Error::Domain("Poisson nodes must lie in [0, 1)".into()));
    }
    let spectrum = fft_forward(f);
    let grid = f.grid();
    let n = f.n();
    let mean_term = op_norm(spectrum.mean());
    let mut sup = 0.0f64;
    for &r in r_nodes {
        let pr_f = poisson_semigroup(&spectrum, r);
        let dev_sq: Vec<MatrixValue> = par::map_indexed(grid.num_points(), |s| {
            let dev = f.value(s) - &pr_f.values()[s];
            let mut m = matrix::zero(n);
            add_scaled_abs_square(&mut m, &dev, 1.0);
            m
        });
        let dev_field = OperatorField::new(grid, n, dev_sq, true)?;
        let smoothed = poisson_semigroup(&fft_forward(&dev_field), r);
        sup = sup.max(lp_field_norm(&smoothed, f64::INFINITY)?);
    }
    Ok(mean_term.max(sup.sqrt()))
}

/// P_r as a Fourier multiplier r^{|m|} (Euclidean |m|).
pub fn poisson_semigroup(spectrum: &SpectrumField, r: f64) -> OperatorField {
    let grid = spectrum.grid();
    let coeffs: Vec<MatrixValue> = (0..grid.num_points())
        .map(|idx| {
            let m = grid.freq(idx);
            let factor = if r == 0.0 {
                if grid.freq_band(&m) == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                r.powf(grid.freq_norm(&m))
            };
            &spectrum.coeffs()[idx] * C64::new(factor, 0.0)
        })
        .collect();
    fft_inverse(&SpectrumField::new(grid, spectrum.n(), coeffs).expect("consistent"))
}

/// Default Poisson nodes: 32 cosine-clustered points on [0, 1 - 2^{-10}].
pub fn default_poisson_nodes() -> Vec<f64> {
    let k = 32usize;
    let rmax = 1.0 - 0.5f64.powi(10);
    (0..k)
        .map(|i| rmax * 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (k - 1) as f64).cos()))
        .collect()
}
