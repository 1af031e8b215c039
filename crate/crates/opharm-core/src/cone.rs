//! Cone geometry: lattice quadrature weights for torus balls.
//!
//! The weight of a lattice point is the measure of its cell clipped to the
//! ball, so the weights sum to the exact ball volume: on-grid and sub-grid
//! radii are handled by one rule, and single-mode cone/radial factorization
//! is exact up to the scale quadrature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::dft_lattice;
use crate::grid::GridSpec;
use crate::C64;

/// Cone of aperture 1 (|t| < ε) truncated at `eps_max`; `stoltz` doubles
/// the ball radius, reproducing the aperture-2 Stoltz domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConeSpec {
    pub eps_max: f64,
    pub stoltz: bool,
}

impl Default for ConeSpec {
    fn default() -> Self {
        ConeSpec {
            eps_max: 1.0,
            stoltz: false,
        }
    }
}

impl ConeSpec {
    pub fn aperture(&self) -> f64 {
        if self.stoltz {
            2.0
        } else {
            1.0
        }
    }

    /// Ball radius used at scale ε.
    pub fn radius_at(&self, eps: f64) -> f64 {
        self.aperture() * eps
    }
}

/// Ball quadrature kernel on a lattice: cell-clipped weights, their total
/// (the measured ball volume) and the real DFT spectrum used for fast
/// correlation.
#[derive(Debug, Clone)]
pub struct BallKernel {
    pub radius: f64,
    pub volume: f64,
    /// weight per lattice offset, dense in flat layout
    pub weights: Vec<f64>,
    /// unnormalized DFT of the weights; real because weights are symmetric
    pub spectrum: Vec<f64>,
}

/// Unit-ball volume c_d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => unreachable!("grids are 1..=3 dimensional"),
    }
}

/// Area of {u² + v² ≤ ρ²} ∩ [x0,x1] × [y0,y1], in closed form.
///
/// The chord length is integrated in u with the interval split where the
/// circle crosses the y-bounds; every piece is a constant plus copies of
/// ±sqrt(ρ²-u²), whose antiderivative is explicit.
fn disc_cell_area(rho: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let lo = x0.max(-rho);
    let hi = x1.min(rho);
    if lo >= hi {
        return 0.0;
    }
    // ∫ sqrt(ρ²-u²) du
    let anti = |u: f64| -> f64 {
        let c = (u / rho).clamp(-1.0, 1.0);
        0.5 * (u * (rho * rho - u * u).max(0.0).sqrt() + rho * rho * c.asin())
    };
    let mut breaks = vec![lo, hi];
    for b in [y0.abs(), y1.abs()] {
        if b < rho {
            let u = (rho * rho - b * b).sqrt();
            for cand in [-u, u] {
                if cand > lo && cand < hi {
                    breaks.push(cand);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a < 1e-300 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let w_mid = (rho * rho - mid * mid).max(0.0).sqrt();
        let top_is_w = w_mid < y1;
        let bottom_is_w = -w_mid > y0;
        let chord_mid = (w_mid.min(y1) - (-w_mid).max(y0)).max(0.0);
        if chord_mid <= 0.0 {
            continue;
        }
        let top = if top_is_w {
            anti(b) - anti(a)
        } else {
            y1 * (b - a)
        };
        let bottom = if bottom_is_w {
            -(anti(b) - anti(a))
        } else {
            y0 * (b - a)
        };
        acc += top - bottom;
    }
    acc
}

fn build_kernel(grid: &GridSpec, radius: f64) -> Result<BallKernel> {
    let d = grid.d();
    if d == 3 {
        return Err(Error::Unsupported(
            "cone quadrature is implemented for d <= 2".into(),
        ));
    }
    let h = grid.spacing();
    let total = grid.num_points();
    let mut weights = vec![0.0f64; total];
    match d {
        1 => {
            for (idx, w) in weights.iter_mut().enumerate() {
                let t = grid.torus_offset(idx)[0];
                if 2.0 * radius >= 1.0 {
                    *w = h;
                    continue;
                }
                // overlap of the cell with (-ρ, ρ), including wrapped images
                let mut acc = 0.0;
                for image in [-1.0, 0.0, 1.0] {
                    let c = t + image;
                    acc += ((c + h / 2.0).min(radius) - (c - h / 2.0).max(-radius)).max(0.0);
                }
                *w = acc;
            }
        }
        2 => {
            let diag = h * std::f64::consts::SQRT_2 / 2.0;
            for (idx, w) in weights.iter_mut().enumerate() {
                let t = grid.torus_offset(idx);
                let dist = (t[0] * t[0] + t[1] * t[1]).sqrt();
                if radius >= std::f64::consts::SQRT_2 / 2.0 {
                    // ball covers the torus
                    *w = h * h;
                } else if dist + diag <= radius && radius <= 0.5 {
                    *w = h * h;
                } else if dist - diag >= radius {
                    *w = 0.0;
                } else if radius <= 0.5 {
                    // boundary cell, no wrap: exact circle-cell area
                    *w = disc_cell_area(
                        radius,
                        t[0] - h / 2.0,
                        t[0] + h / 2.0,
                        t[1] - h / 2.0,
                        t[1] + h / 2.0,
                    );
                } else {
                    // wrapped shell: subsample with torus distance
                    let ss = 64usize;
                    let mut hit = 0usize;
                    for a in 0..ss {
                        for b in 0..ss {
                            let x = t[0] - h / 2.0 + h * (a as f64 + 0.5) / ss as f64;
                            let y = t[1] - h / 2.0 + h * (b as f64 + 0.5) / ss as f64;
                            let wx = x - x.round();
                            let wy = y - y.round();
                            if wx * wx + wy * wy <= radius * radius {
                                hit += 1;
                            }
                        }
                    }
                    *w = h * h * hit as f64 / (ss * ss) as f64;
                }
            }
        }
        _ => unreachable!(),
    }
    let volume: f64 = weights.iter().sum();
    // real spectrum of the symmetric weight function
    let mut buf: Vec<C64> = weights.iter().map(|&w| C64::new(w, 0.0)).collect();
    dft_lattice(grid, &mut buf, true);
    let spectrum: Vec<f64> = buf.iter().map(|z| z.re).collect();
    Ok(BallKernel {
        radius,
        volume,
        weights,
        spectrum,
    })
}

/// Global kernel cache; scales repeat across corpus items, the geometry
/// does not depend on the field.
pub fn ball_kernel(grid: &GridSpec, radius: f64) -> Result<Arc<BallKernel>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, u64), Arc<BallKernel>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (grid.d(), grid.n_axis(), radius.to_bits());
    if let Some(k) = cache.lock().unwrap().get(&key) {
        return Ok(k.clone());
    }
    let built = Arc::new(build_kernel(grid, radius)?);
    cache.lock().unwrap().insert(key, built.clone());
    Ok(built)
}
