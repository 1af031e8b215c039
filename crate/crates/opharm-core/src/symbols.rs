//! Radial test symbols and their nondegeneracy scans.

use serde::{Deserialize, Serialize};

use crate::scale::ScaleGrid;

/// Magnitude threshold below which a symbol value counts as vanishing.
pub const NONDEGENERACY_TOL: f64 = 1e-8;

/// Radial Fourier symbols Φ̂(|ξ|) shipped with the library.
///
/// All kinds except `Poisson` vanish at the origin (vanishing mean);
/// `Zero` is a degenerate control for the failure paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum RadialSymbol {
    /// e^{-2π r}; the Poisson kernel symbol (mean 1, not vanishing).
    Poisson,
    /// 2π r e^{-2π r}; the radial-derivative Poisson symbol.
    DPoisson,
    /// r^α e^{-2π r} for α > 0; Riesz potential of the Poisson kernel.
    RieszPoisson(f64),
    /// r² e^{-r²}; Gaussian Littlewood-Paley symbol.
    GaussLp,
    /// Smooth bump supported in [1/2, 2].
    AnnulusBump,
    /// Identically zero; degenerate by construction.
    Zero,
}

impl RadialSymbol {
    /// Symbol value at radius r ≥ 0.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match *self {
            RadialSymbol::Poisson => (-std::f64::consts::TAU * r).exp(),
            RadialSymbol::DPoisson => {
                std::f64::consts::TAU * r * (-std::f64::consts::TAU * r).exp()
            }
            RadialSymbol::RieszPoisson(alpha) => {
                if r == 0.0 {
                    0.0
                } else {
                    r.powf(alpha) * (-std::f64::consts::TAU * r).exp()
                }
            }
            RadialSymbol::GaussLp => r * r * (-r * r).exp(),
            RadialSymbol::AnnulusBump => bump_half_two(r),
            RadialSymbol::Zero => 0.0,
        }
    }

    /// True for symbols with Φ̂(0) = 0.
    pub fn vanishing_mean(&self) -> bool {
        !matches!(self, RadialSymbol::Poisson)
    }

    pub fn label(&self) -> String {
        match *self {
            RadialSymbol::Poisson => "poisson".into(),
            RadialSymbol::DPoisson => "d_poisson".into(),
            RadialSymbol::RieszPoisson(a) => format!("riesz_poisson({a})"),
            RadialSymbol::GaussLp => "gauss_lp".into(),
            RadialSymbol::AnnulusBump => "annulus_bump".into(),
            RadialSymbol::Zero => "zero".into(),
        }
    }
}

/// The C^∞ bump η on [1/2, 2]: exp(1 - 1/(1-u²)) with u = (r - 5/4)/(3/4).
pub fn bump_half_two(r: f64) -> f64 {
    let u = (r - 1.25) / 0.75;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Which quantifier the nondegeneracy scan certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NondegeneracyMode {
    /// For each ξ some ε > 0 with |Φ̂(εξ)| above threshold.
    Continuous,
    /// For each ξ a dyadic window (a, 2a] on which |Φ̂(εξ)| stays above
    /// threshold throughout.
    Discrete,
    /// For each |ξ| ≥ 1 a witness ε inside (0, 1).
    Torus,
}

/// Outcome of a nondegeneracy scan over a finite frequency set.
///
/// The scan checks sampled radii only; a pass certifies the tested set,
/// not the universal statement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub mode: NondegeneracyMode,
    pub tested: usize,
    pub passed: bool,
    /// Radii |ξ| with no admissible witness.
    pub failures: Vec<f64>,
    /// One (|ξ|, ε) witness per passing radius.
    pub witnesses: Vec<(f64, f64)>,
}

/// Scans the symbol over a fine log grid of scales for every frequency
/// radius in `radii` (all nonzero).
pub fn check_nondegenerate(
    sym: &RadialSymbol,
    mode: NondegeneracyMode,
    radii: &[f64],
) -> NondegeneracyReport {
    let scan = ScaleGrid::new(1e-6, 1e3, 2048).expect("static grid");
    let mut failures = Vec::new();
    let mut witnesses = Vec::new();
    for &r in radii {
        debug_assert!(r > 0.0);
        let witness = match mode {
            NondegeneracyMode::Continuous => scan
                .nodes()
                .iter()
                .find(|&&e| sym.eval(e * r).abs() > NONDEGENERACY_TOL)
                .copied(),
            NondegeneracyMode::Torus => scan
                .nodes()
                .iter()
                .filter(|&&e| e < 1.0)
                .find(|&&e| sym.eval(e * r).abs() > NONDEGENERACY_TOL)
                .copied(),
            NondegeneracyMode::Discrete => dyadic_window_witness(sym, r, &scan),
        };
        match witness {
            Some(e) => witnesses.push((r, e)),
            None => failures.push(r),
        }
    }
    NondegeneracyReport {
        mode,
        tested: radii.len(),
        passed: failures.is_empty(),
        failures,
        witnesses,
    }
}

/// Looks for a window (a, 2a] on which the symbol magnitude stays above
/// threshold at every sampled scale.
fn dyadic_window_witness(sym: &RadialSymbol, r: f64, scan: &ScaleGrid) -> Option<f64> {
    let nodes = scan.nodes();
    'outer: for (i, &a) in nodes.iter().enumerate() {
        let mut j = i;
        while j < nodes.len() && nodes[j] <= 2.0 * a {
            if sym.eval(nodes[j] * r).abs() <= NONDEGENERACY_TOL {
                continue 'outer;
            }
            j += 1;
        }
        if j > i && (j == nodes.len() || nodes[j] > 2.0 * a) && j - i > 1 {
            return Some(a);
        }
    }
    None
}

/// Numeric shadow of the square-function kernel bound: the largest value of
/// `(Σ_k w_k |Φ̂(ε_k ξ)|²)^{1/2}` over the given frequency radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub symbol: String,
    pub sup_value: f64,
    pub attained_at: f64,
}

pub fn kernel_bound_report(
    sym: &RadialSymbol,
    radii: &[f64],
    grid: &ScaleGrid,
) -> KernelBoundReport {
    let mut sup = 0.0f64;
    let mut arg = 0.0;
    for &r in radii {
        let v = grid.integrate(|e| sym.eval(e * r).powi(2)).sqrt();
        if v > sup {
            sup = v;
            arg = r;
        }
    }
    KernelBoundReport {
        symbol: sym.label(),
        sup_value: sup,
        attained_at: arg,
    }
}
