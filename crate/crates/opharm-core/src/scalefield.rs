//! Scale families ε ↦ Φ_ε * f as frequency-side multipliers.

use crate::error::{Error, Result};
use crate::field::{fft_forward, fft_inverse, OperatorField, SpectrumField};
use crate::grid::GridSpec;
use crate::scale::{DyadicLevels, ScaleGrid};
use crate::symbols::RadialSymbol;
use crate::{MatrixValue, C64};

/// Frequency-side multiplier evaluated per scale node and lattice frequency.
pub trait ScaleMultiplier: Sync {
    fn eval(&self, eps: f64, m: &[i64; 3], grid: &GridSpec) -> C64;
    fn label(&self) -> String;
}

impl ScaleMultiplier for RadialSymbol {
    fn eval(&self, eps: f64, m: &[i64; 3], grid: &GridSpec) -> C64 {
        C64::new(RadialSymbol::eval(self, eps * grid.freq_norm(m)), 0.0)
    }

    fn label(&self) -> String {
        RadialSymbol::label(self)
    }
}

/// Partial-derivative companion of a radial symbol: the multiplier of
/// D^m Φ at scale ε is (2πi εξ)^m Φ̂(ε|ξ|).
#[derive(Debug, Clone, Copy)]
pub struct DerivativeSymbol {
    pub base: RadialSymbol,
    pub orders: [u32; 3],
}

impl ScaleMultiplier for DerivativeSymbol {
    fn eval(&self, eps: f64, m: &[i64; 3], grid: &GridSpec) -> C64 {
        let mut z = C64::new(self.base.eval(eps * grid.freq_norm(m)), 0.0);
        for a in 0..grid.d() {
            let factor = C64::new(0.0, std::f64::consts::TAU * eps * m[a] as f64);
            for _ in 0..self.orders[a] {
                z *= factor;
            }
        }
        z
    }

    fn label(&self) -> String {
        format!("D^{:?} {}", &self.orders, self.base.label())
    }
}

/// Radial symbol divided by the square root of its dyadic energy, making
/// Σ_j |Φ̂(2^j ξ)|² exactly one along every ray.
#[derive(Debug, Clone, Copy)]
pub struct DyadicNormalizedSymbol(pub RadialSymbol);

impl ScaleMultiplier for DyadicNormalizedSymbol {
    fn eval(&self, eps: f64, m: &[i64; 3], grid: &GridSpec) -> C64 {
        let u = eps * grid.freq_norm(m);
        let s = crate::companion::dyadic_energy(&self.0, u);
        if s < 1e-300 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(self.0.eval(u) / s.sqrt(), 0.0)
        }
    }

    fn label(&self) -> String {
        format!("dyadic_normalized {}", self.0.label())
    }
}

/// Radial derivative of the circular Poisson kernel parametrized by
/// r = e^{-2πε}: the multiplier ε · 2πr · |m| r^{|m|-1}, i.e. the exact
/// Jacobian transport of |∂_r P_r(f)|² dr onto the ε grid.
#[derive(Debug, Clone, Copy)]
pub struct PoissonRadialDeriv;

impl ScaleMultiplier for PoissonRadialDeriv {
    fn eval(&self, eps: f64, m: &[i64; 3], grid: &GridSpec) -> C64 {
        let mod_m = grid.freq_norm(m);
        if mod_m == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let r = (-std::f64::consts::TAU * eps).exp();
        C64::new(
            eps * std::f64::consts::TAU * r * mod_m * r.powf(mod_m - 1.0),
            0.0,
        )
    }

    fn label(&self) -> String {
        "poisson_radial_deriv".into()
    }
}

/// Scale axis of a scale family: a log grid carrying dε/ε weights or plain
/// dyadic levels 2^{-j}.
#[derive(Debug, Clone)]
pub enum ScaleSpec {
    Log(ScaleGrid),
    Dyadic(DyadicLevels),
}

impl ScaleSpec {
    pub fn scales(&self) -> Vec<f64> {
        match self {
            ScaleSpec::Log(g) => g.nodes().to_vec(),
            ScaleSpec::Dyadic(l) => l.scales().collect(),
        }
    }

    /// Quadrature weight attached to each scale node (1 for dyadic sums).
    pub fn weights(&self) -> Vec<f64> {
        match self {
            ScaleSpec::Log(g) => g.weights().to_vec(),
            ScaleSpec::Dyadic(l) => vec![1.0; l.len()],
        }
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self, ScaleSpec::Dyadic(_))
    }

    pub fn len(&self) -> usize {
        match self {
            ScaleSpec::Log(g) => g.len(),
            ScaleSpec::Dyadic(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The family (s, ε_k) ↦ (Φ_{ε_k} * f)(s), materialized per scale.
#[derive(Debug, Clone)]
pub struct ScaleField {
    grid: GridSpec,
    n: usize,
    spec: ScaleSpec,
    /// values[k][s]
    values: Vec<Vec<MatrixValue>>,
}

impl ScaleField {
    /// Assembles a scale family from precomputed slices.
    pub fn from_parts(
        grid: GridSpec,
        n: usize,
        spec: ScaleSpec,
        values: Vec<Vec<MatrixValue>>,
    ) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Shape("one slice per scale node required".into()));
        }
        if values.iter().any(|v| v.len() != grid.num_points()) {
            return Err(Error::Shape("each slice must cover the lattice".into()));
        }
        Ok(ScaleField {
            grid,
            n,
            spec,
            values,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &ScaleSpec {
        &self.spec
    }

    pub fn slice(&self, k: usize) -> &[MatrixValue] {
        &self.values[k]
    }

    pub fn value(&self, k: usize, s: usize) -> &MatrixValue {
        &self.values[k][s]
    }
}

/// One scale slice Φ_ε * f computed on the frequency side; exact for
/// band-limited fields.
pub fn convolve_one_scale(
    spectrum: &SpectrumField,
    mult: &dyn ScaleMultiplier,
    eps: f64,
) -> OperatorField {
    let grid = spectrum.grid();
    let n = spectrum.n();
    let coeffs: Vec<MatrixValue> = (0..grid.num_points())
        .map(|idx| {
            let m = grid.freq(idx);
            &spectrum.coeffs()[idx] * mult.eval(eps, &m, &grid)
        })
        .collect();
    fft_inverse(&SpectrumField::new(grid, n, coeffs).expect("consistent shape"))
}

/// Materializes the whole scale family. Fails if the field is not
/// band-limited (aliasing would make the multiplier identity wrong).
pub fn convolve_scales(
    f: &OperatorField,
    mult: &dyn ScaleMultiplier,
    spec: ScaleSpec,
) -> Result<ScaleField> {
    if spec.is_empty() {
        return Err(Error::Domain("empty scale grid".into()));
    }
    let spectrum = fft_forward(f);
    spectrum.check_band()?;
    let values: Vec<Vec<MatrixValue>> = spec
        .scales()
        .iter()
        .map(|&e| convolve_one_scale(&spectrum, mult, e).values().to_vec())
        .collect();
    Ok(ScaleField {
        grid: f.grid(),
        n: f.n(),
        spec,
        values,
    })
}
